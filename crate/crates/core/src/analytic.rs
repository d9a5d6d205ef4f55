//! Closed-form reference spectra and the Bessel-zero root finder.
//!
//! These are the independent oracles for FEM validation and the only source
//! of spectra in dimensions other than two. Bessel evaluation uses the
//! ascending series for `x <= 12` and order recurrences beyond (upward when
//! the order is below `x`, Miller's downward recurrence otherwise), seeded by
//! the Hankel modulus/phase expansion at fractional order; the switchover is
//! fixed for determinism.

use crate::eigensolve::Spectrum;
use crate::error::{Error, Result};

const SERIES_LIMIT: f64 = 12.0;

/// ln Gamma(x) for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    #[allow(clippy::excessive_precision)] // published coefficient digits
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection; only reached for x in (0, 0.5).
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let xm = x - 1.0;
    let mut a = COEF[0];
    let t = xm + 7.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (xm + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (xm + 0.5) * t.ln() - t + a.ln()
}

/// Ascending power series for J_p(x); accurate for x <= 12.
fn bessel_j_series(p: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if p == 0.0 { 1.0 } else { 0.0 };
    }
    let q = 0.5 * x;
    let mut term = (p * q.ln() - ln_gamma(p + 1.0)).exp();
    let mut sum = term;
    let mut peak = term.abs();
    let qq = q * q;
    for m in 1..400 {
        let mf = m as f64;
        term *= -qq / (mf * (p + mf));
        sum += term;
        peak = peak.max(term.abs());
        if term.abs() < 1e-18 * peak {
            break;
        }
    }
    sum
}

/// Hankel modulus/phase asymptotic for J_mu(x); used only for the recurrence
/// base orders mu in [0, 2) at x > 12.
fn bessel_j_asymptotic(mu: f64, x: f64) -> f64 {
    let mu4 = 4.0 * mu * mu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..30 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu4 - odd * odd) / (kf * 8.0 * x);
        if a.abs() >= prev {
            break;
        }
        prev = a.abs();
        // Sign pattern: P = a0 - a2 + a4 - ..., Q = a1 - a3 + a5 - ...
        let sgn = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += sgn * a;
        } else {
            p += sgn * a;
        }
        if a.abs() < 1e-18 {
            break;
        }
    }
    let chi = x - (0.5 * mu + 0.25) * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (chi.cos() * p - chi.sin() * q)
}

/// Bessel function of the first kind, real order p >= 0, x >= 0.
pub fn bessel_j(p: f64, x: f64) -> Result<f64> {
    if !(p >= 0.0) || !p.is_finite() || !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Argument(format!(
            "bessel_j needs p >= 0 and x >= 0 (got p={p}, x={x})"
        )));
    }
    if x <= SERIES_LIMIT {
        return Ok(bessel_j_series(p, x));
    }
    let steps = p.floor() as usize;
    let mu = p - steps as f64;
    if p <= x {
        // Upward recurrence from the fractional base order.
        let jm = bessel_j_asymptotic(mu, x);
        let jp1 = bessel_j_asymptotic(mu + 1.0, x);
        if steps == 0 {
            return Ok(jm);
        }
        let mut prev = jm;
        let mut cur = jp1;
        for s in 1..steps {
            let nu = mu + s as f64;
            let next = (2.0 * nu / x) * cur - prev;
            prev = cur;
            cur = next;
        }
        Ok(cur)
    } else {
        // Miller's downward recurrence, normalized against the asymptotic
        // value at the base order (whichever of J_mu, J_{mu+1} is larger).
        let extra = 15 + (2.0 * p.sqrt()).ceil() as usize;
        let total = steps + extra;
        let mut above = 0.0f64; // J_{nu+1}
        let mut cur = 1e-300f64; // J_nu at nu = mu + total
        let mut at_p = None;
        let mut at_p_scale = 1.0f64;
        if extra == 0 {
            at_p = Some(cur);
        }
        for s in 0..total {
            let nu = mu + (total - s) as f64;
            let next = (2.0 * nu / x) * cur - above;
            above = cur;
            cur = next;
            if cur.abs() > 1e250 {
                cur *= 1e-250;
                above *= 1e-250;
                at_p_scale *= 1e-250;
            }
            if s + 1 == extra {
                at_p = Some(cur / at_p_scale);
            }
        }
        // cur = J_mu (trial), above = J_{mu+1} (trial), both times at_p_scale.
        let a0 = bessel_j_asymptotic(mu, x);
        let a1 = bessel_j_asymptotic(mu + 1.0, x);
        let scale = if a0.abs() >= a1.abs() {
            a0 / cur
        } else {
            a1 / above
        };
        let target = at_p
            .ok_or_else(|| Error::Internal("downward recurrence missed the target order".into()))?;
        Ok(target * at_p_scale * scale)
    }
}

/// k-th positive zero of J_p, to about 1e-12 absolute.
///
/// Zeros are located by a unit-step scan starting below the first zero
/// (consecutive-zero spacing always exceeds 3 for p >= 0, so steps of 1 cannot
/// skip a zero) followed by bisection.
pub fn bessel_zero(p: f64, k: usize) -> Result<f64> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::Argument(format!("order must be >= 0, got {p}")));
    }
    if k < 1 {
        return Err(Error::Argument("zero index must be >= 1".into()));
    }
    // J_p > 0 on (0, j_{p,1}) and j_{p,1} > max(2.4, p).
    let mut x = p.max(0.5);
    let mut f = bessel_j(p, x)?;
    let mut found = 0usize;
    for _ in 0..200_000 {
        let xn = x + 1.0;
        let fn_ = bessel_j(p, xn)?;
        if f == 0.0 {
            found += 1;
            if found == k {
                return Ok(x);
            }
        } else if f * fn_ < 0.0 {
            found += 1;
            if found == k {
                // Bisection on [x, xn].
                let (mut lo, mut hi) = (x, xn);
                let mut flo = f;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let fm = bessel_j(p, mid)?;
                    if fm == 0.0 {
                        return Ok(mid);
                    }
                    if flo * fm < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                    if hi - lo < 1e-12 {
                        break;
                    }
                }
                return Ok(0.5 * (lo + hi));
            }
        }
        x = xn;
        f = fn_;
    }
    Err(Error::Numeric(format!(
        "failed to locate zero {k} of J_{p}"
    )))
}

/// Exact binomial coefficient (fits comfortably for the orders used here).
fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Dimension of the space of degree-l spherical harmonics on S^{n-1}.
pub fn harmonic_multiplicity(n: usize, l: usize) -> usize {
    if l == 0 {
        return 1;
    }
    let a = binom(l + n - 1, l);
    let b = if l >= 2 { binom(l + n - 3, l - 2) } else { 0 };
    (a - b) as usize
}

/// Dirichlet spectrum of an a x b rectangle: sorted pi^2 (i^2/a^2 + j^2/b^2).
/// The enumeration window grows until the requested prefix is provably
/// complete.
pub fn rectangle_spectrum(a: f64, b: f64, count: usize) -> Result<Spectrum> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Argument(format!(
            "rectangle sides must be positive (got {a}, {b})"
        )));
    }
    if count == 0 {
        return Err(Error::Argument("count must be >= 1".into()));
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let mut w = 4usize;
    for _ in 0..24 {
        let mut vals = Vec::with_capacity(w * w);
        for i in 1..=w {
            for j in 1..=w {
                vals.push(pi2 * ((i * i) as f64 / (a * a) + (j * j) as f64 / (b * b)));
            }
        }
        vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        // Smallest value involving any index above w.
        let wf = ((w + 1) * (w + 1)) as f64;
        let bound = pi2 * (wf / (a * a) + 1.0 / (b * b)).min(1.0 / (a * a) + wf / (b * b));
        if vals.len() >= count && vals[count - 1] <= bound {
            vals.truncate(count);
            return Ok(Spectrum::analytic(vals, 2));
        }
        w *= 2;
    }
    Err(Error::Numeric(
        "rectangle enumeration window overflow".into(),
    ))
}

/// Dirichlet spectrum of the unit n-ball: sorted squares of Bessel zeros
/// `j_{n/2-1+l, k}` with the spherical-harmonic multiplicity in dimension n.
pub fn ball_spectrum(n: usize, count: usize) -> Result<Spectrum> {
    if n < 2 {
        return Err(Error::Argument(format!(
            "ball dimension must be >= 2, got {n}"
        )));
    }
    if count == 0 {
        return Err(Error::Argument("count must be >= 1".into()));
    }
    let p0 = 0.5 * n as f64 - 1.0;
    let mut lmax = 6usize;
    let mut kmax = 6usize;
    for _ in 0..12 {
        let mut vals = Vec::new();
        for l in 0..=lmax {
            let mult = harmonic_multiplicity(n, l);
            for k in 1..=kmax {
                let z = bessel_zero(p0 + l as f64, k)?;
                for _ in 0..mult {
                    vals.push(z * z);
                }
            }
        }
        vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        // First value excluded by the window: order above lmax has first zero
        // above p0 + lmax + 1; index above kmax is bounded by j_{p0, kmax+1}.
        let next_l = p0 + (lmax + 1) as f64;
        let next_k = bessel_zero(p0, kmax + 1)?;
        let bound = (next_l * next_l).min(next_k * next_k);
        if vals.len() >= count && vals[count - 1] <= bound {
            vals.truncate(count);
            return Ok(Spectrum::analytic(vals, n));
        }
        lmax *= 2;
        kmax *= 2;
    }
    Err(Error::Numeric("ball enumeration window overflow".into()))
}

/// Dirichlet spectrum of the unit hemisphere: spherical harmonics on S^2 odd
/// under the equatorial reflection, enumerated by explicit (l, m) parity.
pub fn hemisphere_spectrum(count: usize) -> Result<Spectrum> {
    if count == 0 {
        return Err(Error::Argument("count must be >= 1".into()));
    }
    let mut lmax = 8usize;
    for _ in 0..24 {
        let mut vals = Vec::new();
        for l in 1..=lmax {
            for m in -(l as i64)..=(l as i64) {
                if (l as i64 + m) % 2 != 0 {
                    vals.push((l * (l + 1)) as f64);
                }
            }
        }
        vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let bound = (lmax * (lmax + 1)) as f64;
        if vals.len() >= count && vals[count - 1] <= bound {
            vals.truncate(count);
            return Ok(Spectrum::analytic(vals, 2));
        }
        lmax *= 2;
    }
    Err(Error::Numeric(
        "hemisphere enumeration window overflow".into(),
    ))
}
