//! Orchestration: config ingestion, the mesh -> assemble -> solve -> bounds
//! -> diagnostics pipeline, convergence studies, and report emission.

use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::bounds::{self, BoundContext, BoundReport, BoundRow, GeometryClass};
use crate::diagnostics::{self, ResidualValue};
use crate::eigensolve::{self, Spectrum};
use crate::error::{Error, Result};
use crate::fem::Discretization;
use crate::geometry::{sup_mean_curvature_sq, ImmersedChart};
use crate::mesh::{self, RegionSpec, TriMesh};

/// Quadrature-limited residuals must shrink by this factor per refinement.
pub const TREND_FACTOR: f64 = 1.5;

/// Residuals below this are floating-point noise; trends are not judged there.
pub const TREND_FLOOR: f64 = 1e-10;

/// Full-basis diagnostics run only below this reduced dimension.
pub const FULL_BASIS_LIMIT: usize = 1200;

/// One domain to process.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DomainSpec {
    pub domain_id: String,
    pub geometry: GeometrySpec,
    /// Initial mesh size; required for FEM geometries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default)]
    pub refinements: usize,
    pub eigen_count: usize,
    #[serde(default)]
    pub h0_sq_policy: H0Policy,
    /// Trial exponents for the diagnostics passes (empty: no diagnostics).
    #[serde(default)]
    pub diagnostics_t: Vec<f64>,
    #[serde(default = "default_kmax")]
    pub kmax: usize,
    #[serde(default = "default_lmax")]
    pub lmax: usize,
}

fn default_kmax() -> usize {
    3
}

fn default_lmax() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Default)]
#[serde(rename_all = "snake_case")]
pub enum H0Policy {
    /// Force the curvature constant to zero (flat or minimal immersions).
    Zero,
    /// Take max |H|^2 over the finest mesh's quadrature points.
    #[default]
    Computed,
    /// Supplied externally.
    Explicit(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeometrySpec {
    Rectangle {
        width: f64,
        height: f64,
    },
    Disk {
        radius: f64,
    },
    SphereCap {
        theta0: f64,
    },
    CatenoidPatch {
        u_min: f64,
        u_max: f64,
        v_min: f64,
        v_max: f64,
    },
    HelicoidPatch {
        u_min: f64,
        u_max: f64,
        v_min: f64,
        v_max: f64,
    },
    AnalyticRectangle {
        a: f64,
        b: f64,
    },
    AnalyticBall {
        n: usize,
    },
    AnalyticHemisphere,
}

impl GeometrySpec {
    pub fn is_analytic(&self) -> bool {
        matches!(
            self,
            GeometrySpec::AnalyticRectangle { .. }
                | GeometrySpec::AnalyticBall { .. }
                | GeometrySpec::AnalyticHemisphere
        )
    }

    pub fn geometry_class(&self) -> GeometryClass {
        match self {
            GeometrySpec::Rectangle { .. }
            | GeometrySpec::Disk { .. }
            | GeometrySpec::AnalyticRectangle { .. }
            | GeometrySpec::AnalyticBall { .. } => GeometryClass::Euclidean,
            GeometrySpec::SphereCap { .. } | GeometrySpec::AnalyticHemisphere => {
                GeometryClass::Sphere
            }
            GeometrySpec::CatenoidPatch { .. } | GeometrySpec::HelicoidPatch { .. } => {
                GeometryClass::Minimal
            }
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self {
            GeometrySpec::AnalyticBall { n } => *n,
            _ => 2,
        }
    }

    /// Chart and meshable region for FEM geometries.
    pub fn chart(&self, domain_id: &str) -> Result<(ImmersedChart, RegionSpec)> {
        match *self {
            GeometrySpec::Rectangle { width, height } => Ok((
                ImmersedChart::flat_plane(domain_id, 0.0, width, 0.0, height),
                RegionSpec::Rectangle {
                    u_min: 0.0,
                    u_max: width,
                    v_min: 0.0,
                    v_max: height,
                },
            )),
            GeometrySpec::Disk { radius } => Ok((
                ImmersedChart::flat_plane(domain_id, -radius, radius, -radius, radius),
                RegionSpec::Disk { radius },
            )),
            GeometrySpec::SphereCap { theta0 } => Ok((
                ImmersedChart::sphere_cap(domain_id, theta0)?,
                RegionSpec::Disk { radius: theta0 },
            )),
            GeometrySpec::CatenoidPatch {
                u_min,
                u_max,
                v_min,
                v_max,
            } => Ok((
                ImmersedChart::catenoid(domain_id, u_min, u_max, v_min, v_max),
                RegionSpec::Rectangle {
                    u_min,
                    u_max,
                    v_min,
                    v_max,
                },
            )),
            GeometrySpec::HelicoidPatch {
                u_min,
                u_max,
                v_min,
                v_max,
            } => Ok((
                ImmersedChart::helicoid(domain_id, u_min, u_max, v_min, v_max),
                RegionSpec::Rectangle {
                    u_min,
                    u_max,
                    v_min,
                    v_max,
                },
            )),
            _ => Err(Error::Config(format!(
                "domain '{domain_id}' is analytic and has no chart"
            ))),
        }
    }

    /// Closed-form spectrum for analytic geometries.
    pub fn analytic_spectrum(&self, count: usize) -> Result<Spectrum> {
        match *self {
            GeometrySpec::AnalyticRectangle { a, b } => analytic::rectangle_spectrum(a, b, count),
            GeometrySpec::AnalyticBall { n } => analytic::ball_spectrum(n, count),
            GeometrySpec::AnalyticHemisphere => analytic::hemisphere_spectrum(count),
            _ => Err(Error::Config("not an analytic geometry".into())),
        }
    }

    /// Reference eigenvalues for convergence tables, when a closed form
    /// exists for the FEM geometry.
    fn reference_spectrum(&self, count: usize) -> Option<Vec<f64>> {
        match *self {
            GeometrySpec::Rectangle { width, height } => {
                analytic::rectangle_spectrum(width, height, count)
                    .ok()
                    .map(|s| s.lambdas)
            }
            GeometrySpec::Disk { radius } => analytic::ball_spectrum(2, count)
                .ok()
                .map(|s| s.lambdas.iter().map(|l| l / (radius * radius)).collect()),
            GeometrySpec::SphereCap { theta0 }
                if (theta0 - std::f64::consts::FRAC_PI_2).abs() < 1e-12 =>
            {
                analytic::hemisphere_spectrum(count).ok().map(|s| s.lambdas)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct Config {
    pub domains: Vec<DomainSpec>,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub h: f64,
    pub vertices: usize,
    pub interior: usize,
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub index: usize,
    pub per_level: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed_order: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsSection {
    pub level: usize,
    pub t: f64,
    pub full_basis: bool,
    pub triangular_residual: f64,
    pub residuals: Vec<ResidualValue>,
    pub gap_rows: Vec<BoundRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub domain_id: String,
    pub n: usize,
    pub geometry_class: GeometryClass,
    pub h0_sq: f64,
    pub levels: Vec<LevelReport>,
    pub convergence: Vec<ConvergenceRow>,
    pub bounds: BoundReport,
    pub diagnostics: Vec<DiagnosticsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub timing_ms: u64,
}

/// Observed convergence order from the last levels of a value sequence:
/// against the reference when one exists, otherwise by successive
/// differences (needs three levels).
fn observed_order(per_level: &[f64], reference: Option<f64>) -> Option<f64> {
    match reference {
        Some(r) if per_level.len() >= 2 => {
            let e0 = (per_level[per_level.len() - 2] - r).abs();
            let e1 = (per_level[per_level.len() - 1] - r).abs();
            if e1 > 0.0 && e0 > 0.0 {
                Some((e0 / e1).log2())
            } else {
                None
            }
        }
        None if per_level.len() >= 3 => {
            let l = per_level.len();
            let d0 = (per_level[l - 3] - per_level[l - 2]).abs();
            let d1 = (per_level[l - 2] - per_level[l - 1]).abs();
            if d1 > 0.0 && d0 > 0.0 {
                Some((d0 / d1).log2())
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Spectrum to hand the diagnostics: the full discrete basis where the dense
/// path is affordable, otherwise the already-solved low modes (or a fresh
/// partial solve if more are needed).
fn diagnostics_spectrum(
    disc: &Discretization,
    solved: &Spectrum,
    m_needed: usize,
) -> Result<(Spectrum, bool)> {
    let dim = disc.sys.dim();
    if dim <= FULL_BASIS_LIMIT {
        Ok((eigensolve::solve_all(&disc.sys)?, true))
    } else if solved.modes.ncols() >= m_needed {
        Ok((solved.clone(), false))
    } else {
        Ok((eigensolve::solve_lowest(&disc.sys, m_needed)?, false))
    }
}

fn run_diagnostics_level(
    mesh: &TriMesh,
    chart: &ImmersedChart,
    disc: &Discretization,
    solved: &Spectrum,
    spec: &DomainSpec,
    level: usize,
    sup_h_sq: f64,
) -> Result<Vec<DiagnosticsSection>> {
    let m_needed = (chart.ambient_dim() + 1)
        .max(spec.kmax + 1)
        .max(spec.lmax + 1);
    let (diag_spec, full) = diagnostics_spectrum(disc, solved, m_needed)?;
    let mut out = Vec::new();
    for &t in &spec.diagnostics_t {
        let ws = diagnostics::build_workspace(mesh, chart, disc, &diag_spec, t)?;
        let mut residuals = Vec::new();
        residuals.extend(diagnostics::check_coefficient_relation(&ws));
        residuals.extend(diagnostics::check_parseval(&ws, disc));
        let (_, grad) = diagnostics::check_gradient_bound(&ws, mesh, chart)?;
        residuals.extend(grad);
        let u1_full = disc.sys.extend_field(ws.first_mode(), mesh.num_vertices());
        residuals.extend(diagnostics::check_coordinate_identities(
            mesh, chart, disc, &u1_full,
        )?);
        if t != 1.0 {
            residuals.extend(diagnostics::check_beta_identities(&ws, disc)?);
            if ws.is_minimal {
                residuals.extend(diagnostics::check_minimal_identities(&ws, disc)?);
            }
        }
        let mut gap_rows = Vec::new();
        let kmax = spec.kmax.min(ws.mode_count().saturating_sub(1)).max(1);
        let lmax = spec.lmax.min(ws.mode_count().saturating_sub(1)).max(1);
        let (row, _) = diagnostics::general_gap_bound(&ws, sup_h_sq, 1, lmax)?;
        gap_rows.push(row);
        if kmax > 1 {
            let (row, _) = diagnostics::general_gap_bound(&ws, sup_h_sq, kmax, lmax)?;
            gap_rows.push(row);
        }
        if ws.is_minimal {
            gap_rows.extend(diagnostics::minimal_gap_suite(&ws, 1, 1)?);
            if kmax > 1 || lmax > 1 {
                gap_rows.extend(diagnostics::minimal_gap_suite(&ws, kmax, lmax)?);
            }
        }
        out.push(DiagnosticsSection {
            level,
            t,
            full_basis: full,
            triangular_residual: ws.triangular_residual,
            residuals,
            gap_rows,
        });
    }
    Ok(out)
}

struct FemOutcome {
    levels: Vec<LevelReport>,
    convergence: Vec<ConvergenceRow>,
    bounds: BoundReport,
    diagnostics: Vec<DiagnosticsSection>,
    h0_sq: f64,
}

fn run_fem(spec: &DomainSpec) -> Result<FemOutcome> {
    let (chart, region) = spec.geometry.chart(&spec.domain_id)?;
    let h = spec
        .h
        .ok_or_else(|| Error::Config(format!("domain '{}' needs a mesh size h", spec.domain_id)))?;
    let mut meshes = vec![mesh::mesh_chart(&chart, region, h)?];
    for _ in 0..spec.refinements {
        let next = mesh::refine(meshes.last().unwrap(), &chart)?;
        meshes.push(next);
    }
    let nlevels = meshes.len();
    let mut levels = Vec::new();
    let mut diagnostics_all = Vec::new();
    let mut finest_lambdas = Vec::new();
    let mut sup_h_sq_finest = 0.0;
    for (level, m) in meshes.iter().enumerate() {
        let disc = Discretization::build(m, &chart)?;
        let m_req = spec.eigen_count.min(disc.sys.dim());
        let solved = eigensolve::solve_lowest(&disc.sys, m_req)?;
        levels.push(LevelReport {
            level,
            h: m.h,
            vertices: m.num_vertices(),
            interior: disc.sys.dim(),
            lambdas: solved.lambdas.clone(),
        });
        let sup_h_sq = sup_mean_curvature_sq(&chart, m)?;
        // Diagnostics on the two finest levels.
        if !spec.diagnostics_t.is_empty() && level + 2 >= nlevels {
            diagnostics_all.extend(run_diagnostics_level(
                m, &chart, &disc, &solved, spec, level, sup_h_sq,
            )?);
        }
        if level + 1 == nlevels {
            sup_h_sq_finest = sup_h_sq;
            finest_lambdas = solved.lambdas;
        }
    }
    let h0_sq = match spec.h0_sq_policy {
        H0Policy::Zero => 0.0,
        H0Policy::Computed => sup_h_sq_finest,
        H0Policy::Explicit(v) => v,
    };
    let ctx = BoundContext::new(2, h0_sq, finest_lambdas, spec.geometry.geometry_class())?;
    let bound_report = bounds::evaluate_all(&ctx, spec.kmax)?;
    // Convergence table.
    let count = levels.iter().map(|l| l.lambdas.len()).min().unwrap_or(0);
    let reference = spec.geometry.reference_spectrum(count);
    let mut convergence = Vec::new();
    for i in 0..count {
        let per_level: Vec<f64> = levels.iter().map(|l| l.lambdas[i]).collect();
        let rf = reference.as_ref().map(|r| r[i]);
        let order = observed_order(&per_level, rf);
        convergence.push(ConvergenceRow {
            index: i + 1,
            per_level,
            reference: rf,
            observed_order: order,
        });
    }
    Ok(FemOutcome {
        levels,
        convergence,
        bounds: bound_report,
        diagnostics: diagnostics_all,
        h0_sq,
    })
}

/// Execute the pipeline for one domain. Errors are folded into the report so
/// a config keeps producing partial output.
pub fn run(spec: &DomainSpec) -> RunReport {
    let start = std::time::Instant::now();
    let n = spec.geometry.intrinsic_dim();
    let class = spec.geometry.geometry_class();
    let result: Result<RunReport> = (|| {
        if spec.geometry.is_analytic() {
            let spectrum = spec.geometry.analytic_spectrum(spec.eigen_count)?;
            let h0_sq = match spec.h0_sq_policy {
                H0Policy::Zero => 0.0,
                H0Policy::Computed => match spec.geometry {
                    GeometrySpec::AnalyticHemisphere => 1.0,
                    _ => 0.0,
                },
                H0Policy::Explicit(v) => v,
            };
            let ctx = BoundContext::new(n, h0_sq, spectrum.lambdas.clone(), class)?;
            let bound_report = bounds::evaluate_all(&ctx, spec.kmax)?;
            Ok(RunReport {
                domain_id: spec.domain_id.clone(),
                n,
                geometry_class: class,
                h0_sq,
                levels: vec![LevelReport {
                    level: 0,
                    h: 0.0,
                    vertices: 0,
                    interior: 0,
                    lambdas: spectrum.lambdas,
                }],
                convergence: Vec::new(),
                bounds: bound_report,
                diagnostics: Vec::new(),
                error: None,
                timing_ms: 0,
            })
        } else {
            let out = run_fem(spec)?;
            Ok(RunReport {
                domain_id: spec.domain_id.clone(),
                n,
                geometry_class: class,
                h0_sq: out.h0_sq,
                levels: out.levels,
                convergence: out.convergence,
                bounds: out.bounds,
                diagnostics: out.diagnostics,
                error: None,
                timing_ms: 0,
            })
        }
    })();
    let mut report = result.unwrap_or_else(|e| RunReport {
        domain_id: spec.domain_id.clone(),
        n,
        geometry_class: class,
        h0_sq: 0.0,
        levels: Vec::new(),
        convergence: Vec::new(),
        bounds: BoundReport::default(),
        diagnostics: Vec::new(),
        error: Some(e.to_string()),
        timing_ms: 0,
    });
    report.timing_ms = start.elapsed().as_millis() as u64;
    report
}

/// Run every domain of a config, in config order.
pub fn run_config(config: &Config) -> Vec<RunReport> {
    config.domains.iter().map(run).collect()
}

fn verdict_reasons(report: &RunReport) -> Vec<String> {
    let mut reasons = Vec::new();
    if let Some(e) = &report.error {
        reasons.push(format!("{}: pipeline error: {e}", report.domain_id));
        return reasons;
    }
    for row in report.bounds.violations() {
        reasons.push(format!(
            "{}: inequality {} violated (margin {:.3e})",
            report.domain_id, row.inequality_id, row.margin
        ));
    }
    for section in &report.diagnostics {
        for row in &section.gap_rows {
            if row.applicability == bounds::Applicability::Exact && !row.satisfied {
                reasons.push(format!(
                    "{}: level {} t={} gap row {} violated (margin {:.3e})",
                    report.domain_id, section.level, section.t, row.inequality_id, row.margin
                ));
            }
        }
        if section.triangular_residual > 1e-9 {
            reasons.push(format!(
                "{}: level {} orthogonalization residual {:.3e} above 1e-9",
                report.domain_id, section.level, section.triangular_residual
            ));
        }
        for r in &section.residuals {
            if let Some(th) = r.absolute_threshold {
                if r.value > th {
                    reasons.push(format!(
                        "{}: level {} t={} residual {} = {:.3e} above {th:.1e}",
                        report.domain_id, section.level, section.t, r.name, r.value
                    ));
                }
            }
        }
    }
    // Trend gate: quadrature-limited residuals must decrease between the two
    // diagnostics levels for each trial exponent.
    let mut ts: Vec<f64> = report.diagnostics.iter().map(|s| s.t).collect();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup();
    for &t in &ts {
        let mut secs: Vec<&DiagnosticsSection> =
            report.diagnostics.iter().filter(|s| s.t == t).collect();
        secs.sort_by_key(|s| s.level);
        if secs.len() < 2 {
            continue;
        }
        let (coarse, fine) = (secs[secs.len() - 2], secs[secs.len() - 1]);
        for rc in &coarse.residuals {
            if rc.absolute_threshold.is_some() {
                continue;
            }
            let Some(rf) = fine.residuals.iter().find(|r| r.name == rc.name) else {
                continue;
            };
            let pass = rf.value <= TREND_FLOOR
                || rc.value <= TREND_FLOOR
                || rf.value <= rc.value / TREND_FACTOR;
            if !pass {
                reasons.push(format!(
                    "{}: t={} residual {} did not decrease ({:.3e} -> {:.3e})",
                    report.domain_id, t, rc.name, rc.value, rf.value
                ));
            }
        }
    }
    reasons
}

/// Gate over a whole run: true when every non-advisory row is satisfied and
/// every diagnostics residual meets its threshold or its refinement trend.
pub fn all_pass(reports: &[RunReport]) -> (bool, Vec<String>) {
    let mut reasons = Vec::new();
    for r in reports {
        reasons.extend(verdict_reasons(r));
    }
    (reasons.is_empty(), reasons)
}

/// 12-significant-digit float formatting used by every CSV/stdout emitter.
pub fn fmt_float(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.11e}")
}

fn csv_opt(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Inequality rows as CSV: bounds rows at the finest level followed by the
/// per-level diagnostics gap rows, in run order.
pub fn bounds_csv(reports: &[RunReport]) -> String {
    let mut out =
        String::from("domain_id,level,inequality_id,k,l,lhs,rhs,margin,satisfied,applicability\n");
    for report in reports {
        let finest = report.levels.last().map(|l| l.level).unwrap_or(0);
        let emit = |out: &mut String, level: usize, row: &BoundRow| {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                report.domain_id,
                level,
                row.inequality_id,
                csv_opt(row.k),
                csv_opt(row.l),
                fmt_float(row.lhs),
                fmt_float(row.rhs),
                fmt_float(row.margin),
                row.satisfied,
                match row.applicability {
                    bounds::Applicability::Exact => "exact",
                    bounds::Applicability::Advisory => "advisory",
                }
            ));
        };
        for row in &report.bounds.rows {
            emit(&mut out, finest, row);
        }
        for section in &report.diagnostics {
            for row in &section.gap_rows {
                emit(&mut out, section.level, row);
            }
        }
    }
    out
}

/// Long-format convergence table.
pub fn convergence_csv(reports: &[RunReport]) -> String {
    let mut out = String::from("domain_id,eigen_index,level,h,lambda,reference,observed_order\n");
    for report in reports {
        for row in &report.convergence {
            for (level, lam) in row.per_level.iter().enumerate() {
                let is_last = level + 1 == row.per_level.len();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    report.domain_id,
                    row.index,
                    level,
                    fmt_float(report.levels[level].h),
                    fmt_float(*lam),
                    row.reference.map(fmt_float).unwrap_or_default(),
                    if is_last {
                        row.observed_order.map(fmt_float).unwrap_or_default()
                    } else {
                        String::new()
                    }
                ));
            }
        }
    }
    out
}

/// Spectrum CSV (`index,lambda`).
pub fn spectrum_csv(lambdas: &[f64]) -> String {
    let mut out = String::from("index,lambda\n");
    for (i, l) in lambdas.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, fmt_float(*l)));
    }
    out
}

/// Parse a spectrum CSV produced by [`spectrum_csv`] (or any `index,lambda`
/// list; a header line is skipped).
pub fn parse_spectrum_csv(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(|f| f.trim()).collect();
        let value = fields.last().unwrap();
        if value.parse::<f64>().is_err() && lineno == 0 {
            continue; // header
        }
        let v: f64 = value.parse().map_err(|_| {
            Error::Argument(format!(
                "line {}: cannot parse '{value}' as a number",
                lineno + 1
            ))
        })?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::Argument("spectrum file holds no eigenvalues".into()));
    }
    Ok(out)
}

/// Bounds-only evaluation of an external eigenvalue list (`check` command).
pub fn check_spectrum(
    lambdas: Vec<f64>,
    n: usize,
    h0_sq: f64,
    minimal: bool,
    kmax: usize,
) -> Result<BoundReport> {
    let class = if h0_sq == 0.0 {
        if minimal {
            GeometryClass::Minimal
        } else {
            GeometryClass::Euclidean
        }
    } else {
        GeometryClass::General
    };
    let ctx = BoundContext::new(n, h0_sq, lambdas, class)?;
    bounds::evaluate_all(&ctx, kmax)
}

/// Full JSON report.
pub fn reports_json(reports: &[RunReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(reports)?)
}
