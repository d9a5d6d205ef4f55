//! Universal eigenvalue inequalities evaluated on a plain eigenvalue list
//! plus the pair (n, H0^2). Pure formula layer: no geometry dependence.
//!
//! Every row is oriented so that `margin = rhs - lhs >= 0` means the
//! inequality holds; a relative slack of 1e-10 absorbs float noise on exact
//! ties (degenerate spectra hit exact equality). Rows carry an applicability
//! tag: inequalities proved only for a class the domain does not belong to
//! (and the unproven sharp-constant conjecture rows) are emitted as advisory
//! and never gate exit codes.

use serde::{Deserialize, Serialize};

use crate::analytic::bessel_zero;
use crate::error::{Error, Result};

/// Relative slack used when flagging a row as satisfied.
pub const SATISFIED_SLACK: f64 = 1e-10;

/// Declared geometry class of the domain a spectrum came from. Drives which
/// rows are exact theorems and which are advisory context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryClass {
    /// Flat domain in Euclidean space.
    Euclidean,
    /// Bounded domain in a non-flat minimal submanifold of Euclidean space.
    Minimal,
    /// Bounded domain in the unit sphere.
    Sphere,
    /// Anything else: only the curvature-constant rows are theorems.
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Applicability {
    Exact,
    Advisory,
}

/// Inputs for the inequality suite.
#[derive(Debug, Clone)]
pub struct BoundContext {
    pub n: usize,
    /// Squared curvature constant; enters every formula as n^2 H0^2 / lambda.
    pub h0_sq: f64,
    /// Ascending positive eigenvalues.
    pub lambdas: Vec<f64>,
    pub geometry: GeometryClass,
}

impl BoundContext {
    pub fn new(n: usize, h0_sq: f64, lambdas: Vec<f64>, geometry: GeometryClass) -> Result<Self> {
        if n < 1 {
            return Err(Error::Argument("dimension must be >= 1".into()));
        }
        if !(h0_sq >= 0.0) {
            return Err(Error::Argument(format!(
                "curvature constant must be nonnegative, got {h0_sq}"
            )));
        }
        if lambdas.is_empty() || lambdas[0] <= 0.0 {
            return Err(Error::Argument("need a positive first eigenvalue".into()));
        }
        for w in lambdas.windows(2) {
            if w[1] < w[0] {
                return Err(Error::Argument("eigenvalues must be ascending".into()));
            }
        }
        Ok(Self {
            n,
            h0_sq,
            lambdas,
            geometry,
        })
    }

    fn lam(&self, i: usize) -> f64 {
        // 1-based indexing to match the formulas.
        self.lambdas[i - 1]
    }

    fn require(&self, count: usize, what: &str) -> Result<()> {
        if self.lambdas.len() < count {
            Err(Error::Argument(format!(
                "{what} needs {count} eigenvalues, only {} available",
                self.lambdas.len()
            )))
        } else {
            Ok(())
        }
    }

    /// (lambda_2 + ... + lambda_{n+1}) / lambda_1.
    fn sum_ratio(&self) -> f64 {
        let s: f64 = (2..=self.n + 1).map(|i| self.lam(i)).sum();
        s / self.lam(1)
    }
}

/// One evaluated inequality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundRow {
    pub inequality_id: String,
    pub k: Option<usize>,
    pub l: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub satisfied: bool,
    pub applicability: Applicability,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl BoundRow {
    pub fn new(id: &str, k: Option<usize>, l: Option<usize>, lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        let satisfied = margin >= -SATISFIED_SLACK * rhs.abs().max(1.0);
        Self {
            inequality_id: id.to_string(),
            k,
            l,
            lhs,
            rhs,
            margin,
            satisfied,
            applicability: Applicability::Exact,
            note: None,
        }
    }

    pub fn advisory(mut self) -> Self {
        self.applicability = Applicability::Advisory;
        self
    }

    pub fn tagged(mut self, applicability: Applicability) -> Self {
        self.applicability = applicability;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Collection of rows for one spectrum.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn all_exact_satisfied(&self) -> bool {
        self.rows
            .iter()
            .filter(|r| r.applicability == Applicability::Exact)
            .all(|r| r.satisfied)
    }

    pub fn violations(&self) -> Vec<&BoundRow> {
        self.rows
            .iter()
            .filter(|r| r.applicability == Applicability::Exact && !r.satisfied)
            .collect()
    }
}

/// Ratios feeding the trial-exponent machinery: `a = lambda_2/lambda_1`,
/// `b = n^2 H0^2 / lambda_1`, and a trial exponent `t`.
#[derive(Debug, Clone, Copy)]
pub struct TrialParams {
    pub a: f64,
    pub b: f64,
    pub t: f64,
}

impl TrialParams {
    pub fn new(a: f64, b: f64, t: f64) -> Result<Self> {
        if !(a > 1.0) {
            return Err(Error::Argument(format!(
                "eigenvalue ratio must exceed 1, got {a}"
            )));
        }
        if !(b >= 0.0) {
            return Err(Error::Argument(format!(
                "curvature ratio must be nonnegative, got {b}"
            )));
        }
        Ok(Self { a, b, t })
    }

    /// Upper end of the valid trial interval, `a + sqrt(a^2 - a)`.
    pub fn t_sup(&self) -> f64 {
        self.a + (self.a * self.a - self.a).sqrt()
    }
}

fn euclidean_tag(geometry: GeometryClass) -> Applicability {
    match geometry {
        GeometryClass::Euclidean => Applicability::Exact,
        _ => Applicability::Advisory,
    }
}

fn sphere_tag(geometry: GeometryClass) -> Applicability {
    match geometry {
        GeometryClass::Sphere => Applicability::Exact,
        _ => Applicability::Advisory,
    }
}

/// Gap bound `lambda_{k+1} - lambda_k <= (4/(kn)) sum_{i<=k} lambda_i`
/// (Euclidean domains).
pub fn ppw_gap(ctx: &BoundContext, k: usize) -> Result<BoundRow> {
    ctx.require(k + 1, "the gap bound")?;
    let lhs = ctx.lam(k + 1) - ctx.lam(k);
    let rhs = 4.0 / (k as f64 * ctx.n as f64) * (1..=k).map(|i| ctx.lam(i)).sum::<f64>();
    Ok(BoundRow::new("ppw_gap", Some(k), None, lhs, rhs).tagged(euclidean_tag(ctx.geometry)))
}

/// `sum_{i<=k} lambda_i / (lambda_{k+1} - lambda_i) >= kn/4` (Euclidean
/// domains), oriented so the sum sits on the rhs. A closed spectral gap makes
/// the row vacuously satisfied with an infinite sentinel.
pub fn hile_protter(ctx: &BoundContext, k: usize) -> Result<BoundRow> {
    ctx.require(k + 1, "the ratio-sum bound")?;
    let lhs = k as f64 * ctx.n as f64 / 4.0;
    let gap = ctx.lam(k + 1) - ctx.lam(k);
    let row = if gap <= 0.0 {
        BoundRow::new("hile_protter", Some(k), None, lhs, f64::INFINITY)
            .with_note("vacuous: spectral gap at k is zero")
    } else {
        let rhs: f64 = (1..=k)
            .map(|i| ctx.lam(i) / (ctx.lam(k + 1) - ctx.lam(i)))
            .sum();
        BoundRow::new("hile_protter", Some(k), None, lhs, rhs)
    };
    Ok(row.tagged(euclidean_tag(ctx.geometry)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YangVariant {
    /// Additive term 0 (Euclidean domains).
    Euclidean,
    /// Additive term n^2/4 (domains in the unit sphere).
    Sphere,
    /// Additive term n^2 H0^2 / 4 (any ambient manifold).
    Curvature,
}

/// Quadratic eigenvalue inequality
/// `sum (lambda_{k+1}-lambda_i)^2 <= (4/n) sum (lambda_{k+1}-lambda_i)(lambda_i + term)`.
pub fn yang_type(ctx: &BoundContext, k: usize, variant: YangVariant) -> Result<BoundRow> {
    ctx.require(k + 1, "the quadratic bound")?;
    let n = ctx.n as f64;
    let (id, term, tag) = match variant {
        YangVariant::Euclidean => ("yang_euclidean", 0.0, euclidean_tag(ctx.geometry)),
        YangVariant::Sphere => ("yang_sphere", n * n / 4.0, sphere_tag(ctx.geometry)),
        YangVariant::Curvature => (
            "yang_curvature",
            n * n * ctx.h0_sq / 4.0,
            Applicability::Exact,
        ),
    };
    let top = ctx.lam(k + 1);
    let lhs: f64 = (1..=k).map(|i| (top - ctx.lam(i)).powi(2)).sum();
    let rhs: f64 = 4.0 / n
        * (1..=k)
            .map(|i| (top - ctx.lam(i)) * (ctx.lam(i) + term))
            .sum::<f64>();
    Ok(BoundRow::new(id, Some(k), None, lhs, rhs).tagged(tag))
}

/// The classical lower-order sum bounds, the per-j gap/sum dichotomy, and the
/// sharp-constant conjecture reference row.
pub fn lower_order_suite(ctx: &BoundContext) -> Result<Vec<BoundRow>> {
    ctx.require(ctx.n + 1, "the lower-order suite")?;
    let n = ctx.n as f64;
    let s = ctx.sum_ratio();
    let l1 = ctx.lam(1);
    let mut rows = vec![
        BoundRow::new("sum_basic", None, None, s, n + 4.0).tagged(euclidean_tag(ctx.geometry)),
        BoundRow::new("sum_gap_ratio", None, None, s, n + 3.0 + l1 / ctx.lam(2))
            .tagged(euclidean_tag(ctx.geometry)),
        BoundRow::new("sum_sphere", None, None, s, n + 4.0 + n * n / l1)
            .tagged(sphere_tag(ctx.geometry)),
        BoundRow::new(
            "sum_curvature",
            None,
            None,
            s,
            n + 4.0 + n * n * ctx.h0_sq / l1,
        ),
    ];
    // Sharp-constant reference from the ball conjecture: advisory everywhere
    // (it is a conjecture, and stated only for Euclidean domains anyway).
    let jn = bessel_zero(n / 2.0, 1)?;
    let jd = bessel_zero(n / 2.0 - 1.0, 1)?;
    rows.push(
        BoundRow::new("ppw_sum_conjecture", None, None, s, n * jn * jn / (jd * jd))
            .advisory()
            .with_note("conjectured sharp constant; informational"),
    );
    // Per-j dichotomy: at least one of
    //   lambda_2/lambda_1 < 2 - lambda_1/lambda_j,
    //   S <= n + 3 + lambda_1/lambda_j
    // holds for every j (Euclidean domains).
    let jmax = (ctx.n + 2).min(ctx.lambdas.len());
    for j in 1..=jmax {
        let ratio_rhs = 2.0 - l1 / ctx.lam(j);
        let ratio_holds = ctx.lam(2) / l1 < ratio_rhs;
        let sum_rhs = n + 3.0 + l1 / ctx.lam(j);
        let sum_holds = s <= sum_rhs + SATISFIED_SLACK * sum_rhs.abs().max(1.0);
        let note = match (ratio_holds, sum_holds) {
            (true, true) => "both branches hold",
            (true, false) => "ratio branch holds",
            (false, true) => "sum branch holds",
            (false, false) => "no branch holds",
        };
        let mut row = BoundRow::new("gap_dichotomy", Some(j), None, s, sum_rhs);
        row.satisfied = ratio_holds || sum_holds;
        row.margin = sum_rhs - s;
        rows.push(
            row.tagged(euclidean_tag(ctx.geometry))
                .with_note(format!("{note}; reported side: sum branch")),
        );
    }
    Ok(rows)
}

/// Inner bracket of the sharpened lower-order bound, as a function of
/// `r = lambda_1/lambda_2` and `b = n^2 H0^2/lambda_1`.
fn sharp_bracket(r: f64, b: f64) -> f64 {
    let b2 = b * r; // n^2 H0^2 / lambda_2
    ((2.0 - r) * b + 3.0 + r + ((3.0 + r + b2).powi(2) + 4.0 * (1.0 - r) * b2).sqrt()) / 2.0
}

/// Sharpened lower-order sum bound:
/// `S <= n + sqrt((b + 4) * bracket(r, b))`. Exact for every ambient
/// manifold; strictly below the classical `n + 4 + b` bound.
pub fn sharp_sum_bound(ctx: &BoundContext) -> Result<BoundRow> {
    ctx.require(ctx.n + 1, "the sharpened sum bound")?;
    if ctx.n < 2 {
        return Err(Error::Argument("the sharpened bound needs n >= 2".into()));
    }
    let l1 = ctx.lam(1);
    let l2 = ctx.lam(2);
    if !(l2 > l1) {
        return Err(Error::Argument(
            "the sharpened bound needs lambda_2 > lambda_1".into(),
        ));
    }
    let n = ctx.n as f64;
    let b = n * n * ctx.h0_sq / l1;
    let r = l1 / l2;
    let rhs = n + ((b + 4.0) * sharp_bracket(r, b)).sqrt();
    Ok(BoundRow::new(
        "sum_curvature_sharp",
        None,
        None,
        ctx.sum_ratio(),
        rhs,
    ))
}

/// The strict improvement behind the sharpened bound: the inner bracket is
/// always below `b + 4`. Returns (bracket, b + 4).
pub fn bracket_gap(tp: &TrialParams) -> Result<(f64, f64)> {
    let r = 1.0 / tp.a;
    Ok((sharp_bracket(r, tp.b), tp.b + 4.0))
}

/// Trial objective `f(t) = (b(2t-1) + (1+t)^2) / (a(2t-1) - t^2)`,
/// defined where the denominator is positive.
pub fn trial_objective(tp: &TrialParams) -> Result<f64> {
    let t = tp.t;
    let den = tp.a * (2.0 * t - 1.0) - t * t;
    if !(den > 0.0) {
        return Err(Error::Domain(format!(
            "trial exponent {t} outside the valid interval (denominator {den})"
        )));
    }
    Ok((tp.b * (2.0 * t - 1.0) + (1.0 + t) * (1.0 + t)) / den)
}

/// Minimizer of the trial objective:
/// `t0 = (a+b-1 + sqrt((a+b-1)^2 + 8a(a+b+1))) / (2(a+b+1))`.
pub fn optimal_exponent(tp: &TrialParams) -> f64 {
    let s = tp.a + tp.b;
    (s - 1.0 + ((s - 1.0) * (s - 1.0) + 8.0 * tp.a * (s + 1.0)).sqrt()) / (2.0 * (s + 1.0))
}

/// Closed form of the minimum value:
/// `((2a-1)b + 3a + 1 + sqrt((a+b-1)^2 + 8a(a+b+1))) / (2a(a-1))`.
pub fn trial_objective_min(tp: &TrialParams) -> f64 {
    let s = tp.a + tp.b;
    let root = ((s - 1.0) * (s - 1.0) + 8.0 * tp.a * (s + 1.0)).sqrt();
    ((2.0 * tp.a - 1.0) * tp.b + 3.0 * tp.a + 1.0 + root) / (2.0 * tp.a * (tp.a - 1.0))
}

/// Trial-function bound on the eigenfunction-power ratio:
/// `B(t) <= sqrt((a-1)(2t-1) / (a(2t-1) - t^2))` for `1 < t < a + sqrt(a^2-a)`;
/// the value is 1 at t = 1.
pub fn brands_bt_bound(tp: &TrialParams) -> Result<f64> {
    let t = tp.t;
    if t == 1.0 {
        return Ok(1.0);
    }
    if !(t > 1.0 && t < tp.t_sup()) {
        return Err(Error::Domain(format!(
            "trial exponent {t} outside (1, {})",
            tp.t_sup()
        )));
    }
    let den = tp.a * (2.0 * t - 1.0) - t * t;
    Ok(((tp.a - 1.0) * (2.0 * t - 1.0) / den).sqrt())
}

/// Constant of the minimal-submanifold ratio bound,
/// `(n + 3 + sqrt(n^2 + 10n + 9)) / (2n)`.
pub fn minimal_ratio_constant(n: usize) -> f64 {
    let nf = n as f64;
    (nf + 3.0 + (nf * nf + 10.0 * nf + 9.0).sqrt()) / (2.0 * nf)
}

/// The minimal-submanifold rows: sharpened sum bound at H0 = 0, the ratio
/// bound with its quadratic form, the basic k = l = 1 gap bound, and (for
/// n = 2) the historical constants as advisory context.
pub fn minimal_submanifold_suite(ctx: &BoundContext) -> Result<Vec<BoundRow>> {
    if ctx.h0_sq != 0.0 {
        return Err(Error::Argument(format!(
            "minimal-submanifold rows require a vanishing curvature constant (H0^2 = {})",
            ctx.h0_sq
        )));
    }
    ctx.require(2, "the minimal-submanifold suite")?;
    let n = ctx.n as f64;
    let l1 = ctx.lam(1);
    let l2 = ctx.lam(2);
    let ratio = l2 / l1;
    let mut rows = Vec::new();
    if ctx.lambdas.len() > ctx.n {
        rows.push(BoundRow::new(
            "minimal_sum",
            None,
            None,
            ctx.sum_ratio(),
            n + 2.0 * (3.0 + l1 / l2).sqrt(),
        ));
    }
    rows.push(BoundRow::new(
        "minimal_ratio",
        None,
        None,
        ratio,
        minimal_ratio_constant(ctx.n),
    ));
    // Equivalent quadratic form n r^2 - (n+3) r - 1 <= 0 at r = lambda_2/lambda_1.
    rows.push(BoundRow::new(
        "minimal_ratio_quadratic",
        None,
        None,
        n * ratio * ratio - (n + 3.0) * ratio - 1.0,
        0.0,
    ));
    // Basic gap bound: n (lambda_2 - lambda_1) <= 3 lambda_1 + lambda_1^2/lambda_2.
    rows.push(BoundRow::new(
        "minimal_gap_basic",
        Some(1),
        Some(1),
        n * (l2 - l1),
        3.0 * l1 + l1 * l1 / l2,
    ));
    if ctx.n == 2 && ctx.lambdas.len() >= 3 {
        let s2 = (l2 + ctx.lam(3)) / l1;
        for (id, c) in [
            ("brands_two_dim", 3.0 + 7.0f64.sqrt()),
            ("hile_protter_two_dim", 5.622),
            ("marcellini_two_dim", (15.0 + 345.0f64.sqrt()) / 6.0),
            ("chen_zheng_two_dim", 5.3507),
        ] {
            rows.push(
                BoundRow::new(id, None, None, s2, c)
                    .advisory()
                    .with_note("historical planar constant; informational"),
            );
        }
    }
    Ok(rows)
}

/// Evaluate every applicable row for the context, in a fixed deterministic
/// order: per-k gap/ratio/quadratic rows, the lower-order suite, the
/// sharpened bound, then the minimal-submanifold rows when H0 = 0.
pub fn evaluate_all(ctx: &BoundContext, kmax: usize) -> Result<BoundReport> {
    let mut rows = Vec::new();
    let avail = ctx.lambdas.len();
    let kcap = kmax.min(avail.saturating_sub(1));
    for k in 1..=kcap {
        rows.push(ppw_gap(ctx, k)?);
        rows.push(hile_protter(ctx, k)?);
        rows.push(yang_type(ctx, k, YangVariant::Euclidean)?);
        rows.push(yang_type(ctx, k, YangVariant::Sphere)?);
        rows.push(yang_type(ctx, k, YangVariant::Curvature)?);
    }
    if avail > ctx.n {
        rows.extend(lower_order_suite(ctx)?);
        if ctx.n >= 2 && ctx.lam(2) > ctx.lam(1) {
            rows.push(sharp_sum_bound(ctx)?);
        }
    }
    if ctx.h0_sq == 0.0 && avail >= 2 {
        rows.extend(minimal_submanifold_suite(ctx)?);
    }
    Ok(BoundReport { rows })
}
