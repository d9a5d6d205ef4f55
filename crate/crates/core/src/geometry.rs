//! Immersed surface charts: embeddings into Euclidean space, induced metrics,
//! and mean curvature.
//!
//! Every chart kind carries hard-coded analytic first derivatives; the induced
//! metric is always computed as `g_ij = sum_a dy_a/dx^i dy_a/dx^j` from those
//! derivatives, so the trace identity `tr(g^-1 g) = 2` holds to rounding.

use crate::error::{Error, Result};

/// Maximum ambient dimension of the built-in charts.
pub const MAX_AMBIENT: usize = 3;

/// Supported chart kinds. Derivatives and curvature are closed-form per kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartKind {
    /// Isometric planar patch `(u, v) -> (u, v)`; ambient dimension 2.
    FlatPlane,
    /// Cap of the unit sphere around the north pole, in normal (geodesic
    /// polar) coordinates `(p, q)` with `r = |(p, q)|` the polar angle.
    /// Valid for `r < pi`; `theta0` is the cap's geodesic radius.
    SphereCap { theta0: f64 },
    /// `(u, v) -> (cosh v cos u, cosh v sin u, v)`; minimal.
    Catenoid,
    /// `(u, v) -> (v cos u, v sin u, u)`; minimal.
    Helicoid,
}

/// A parametrized immersion of a surface patch into `R^N`.
#[derive(Debug, Clone)]
pub struct ImmersedChart {
    pub name: String,
    pub kind: ChartKind,
    /// Parameter rectangle `[u_min, u_max] x [v_min, v_max]`.
    pub param_domain: [f64; 4],
}

/// Induced metric at a parameter point.
#[derive(Debug, Clone, Copy)]
pub struct MetricSample {
    /// 2x2 symmetric positive definite matrix.
    pub g: [[f64; 2]; 2],
    /// Area density `sqrt(det g)`.
    pub sqrt_det_g: f64,
}

impl MetricSample {
    /// Inverse metric `g^{ij}`.
    pub fn inverse(&self) -> [[f64; 2]; 2] {
        let det = self.sqrt_det_g * self.sqrt_det_g;
        [
            [self.g[1][1] / det, -self.g[0][1] / det],
            [-self.g[1][0] / det, self.g[0][0] / det],
        ]
    }

    /// Metric inner product of two parameter-space gradients (covectors),
    /// i.e. `g(grad f, grad h) = df^T g^{-1} dh`.
    pub fn grad_inner(&self, df: [f64; 2], dh: [f64; 2]) -> f64 {
        let inv = self.inverse();
        df[0] * (inv[0][0] * dh[0] + inv[0][1] * dh[1])
            + df[1] * (inv[1][0] * dh[0] + inv[1][1] * dh[1])
    }
}

/// sin(r)/r, stable at r = 0.
fn sinc(r: f64) -> f64 {
    if r < 1e-4 {
        let r2 = r * r;
        1.0 - r2 / 6.0 + r2 * r2 / 120.0
    } else {
        r.sin() / r
    }
}

/// (cos r - sin(r)/r) / r^2, stable at r = 0.
fn sinc_slope(r: f64) -> f64 {
    if r < 1e-4 {
        let r2 = r * r;
        -1.0 / 3.0 + r2 / 30.0 - r2 * r2 / 840.0
    } else {
        (r.cos() - sinc(r)) / (r * r)
    }
}

impl ImmersedChart {
    pub fn flat_plane(name: &str, u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Self {
        Self {
            name: name.to_string(),
            kind: ChartKind::FlatPlane,
            param_domain: [u_min, u_max, v_min, v_max],
        }
    }

    /// Unit-sphere cap of geodesic radius `theta0 < pi`. The parameter domain
    /// is the bounding square of the polar parameter disk.
    pub fn sphere_cap(name: &str, theta0: f64) -> Result<Self> {
        if !(theta0 > 0.0 && theta0 < std::f64::consts::PI) {
            return Err(Error::Argument(format!(
                "sphere cap radius must lie in (0, pi), got {theta0}"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            kind: ChartKind::SphereCap { theta0 },
            param_domain: [-theta0, theta0, -theta0, theta0],
        })
    }

    pub fn catenoid(name: &str, u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Self {
        Self {
            name: name.to_string(),
            kind: ChartKind::Catenoid,
            param_domain: [u_min, u_max, v_min, v_max],
        }
    }

    pub fn helicoid(name: &str, u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Self {
        Self {
            name: name.to_string(),
            kind: ChartKind::Helicoid,
            param_domain: [u_min, u_max, v_min, v_max],
        }
    }

    /// Ambient dimension N (2 for the flat chart, 3 otherwise).
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            ChartKind::FlatPlane => 2,
            _ => 3,
        }
    }

    /// Intrinsic dimension n. Fixed at 2 for all FEM charts.
    pub fn intrinsic_dim(&self) -> usize {
        2
    }

    /// Whether the immersed surface is minimal (|H| identically zero).
    pub fn is_minimal(&self) -> bool {
        matches!(
            self.kind,
            ChartKind::FlatPlane | ChartKind::Catenoid | ChartKind::Helicoid
        )
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let [u0, u1, v0, v1] = self.param_domain;
        let tol = 1e-12 * (1.0 + (u1 - u0).abs().max((v1 - v0).abs()));
        p[0] >= u0 - tol && p[0] <= u1 + tol && p[1] >= v0 - tol && p[1] <= v1 + tol
    }

    fn require_inside(&self, p: [f64; 2]) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "parameter point ({}, {}) outside domain of chart '{}'",
                p[0], p[1], self.name
            )))
        }
    }

    /// Embedded position of a parameter point, padded with zeros beyond the
    /// chart's ambient dimension.
    pub fn embed(&self, p: [f64; 2]) -> [f64; MAX_AMBIENT] {
        let (u, v) = (p[0], p[1]);
        match self.kind {
            ChartKind::FlatPlane => [u, v, 0.0],
            ChartKind::SphereCap { .. } => {
                let r = (u * u + v * v).sqrt();
                let s = sinc(r);
                [u * s, v * s, r.cos()]
            }
            ChartKind::Catenoid => [v.cosh() * u.cos(), v.cosh() * u.sin(), v],
            ChartKind::Helicoid => [v * u.cos(), v * u.sin(), u],
        }
    }

    /// Analytic first derivatives of the embedding: `jac[i][a] = dy_a / dx^i`.
    pub fn jacobian(&self, p: [f64; 2]) -> [[f64; MAX_AMBIENT]; 2] {
        let (u, v) = (p[0], p[1]);
        match self.kind {
            ChartKind::FlatPlane => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            ChartKind::SphereCap { .. } => {
                let r = (u * u + v * v).sqrt();
                let s = sinc(r);
                let w = sinc_slope(r);
                [
                    [s + u * u * w, u * v * w, -u * s],
                    [u * v * w, s + v * v * w, -v * s],
                ]
            }
            ChartKind::Catenoid => [
                [-v.cosh() * u.sin(), v.cosh() * u.cos(), 0.0],
                [v.sinh() * u.cos(), v.sinh() * u.sin(), 1.0],
            ],
            ChartKind::Helicoid => [[-v * u.sin(), v * u.cos(), 1.0], [u.cos(), u.sin(), 0.0]],
        }
    }

    /// Induced metric at a parameter point.
    pub fn metric_at(&self, p: [f64; 2]) -> Result<MetricSample> {
        self.require_inside(p)?;
        let jac = self.jacobian(p);
        let nn = self.ambient_dim();
        let mut g = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = 0.0;
                for a in 0..nn {
                    acc += jac[i][a] * jac[j][a];
                }
                g[i][j] = acc;
            }
        }
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        if !(det > 0.0) || !(g[0][0] > 0.0) {
            return Err(Error::Immersion(format!(
                "degenerate induced metric at ({}, {}) on chart '{}' (det = {det})",
                p[0], p[1], self.name
            )));
        }
        Ok(MetricSample {
            g,
            sqrt_det_g: det.sqrt(),
        })
    }

    /// Mean curvature norm |H| at a parameter point, with the convention
    /// `sum_a (Lap y_a)^2 = n^2 |H|^2`.
    pub fn mean_curvature_norm_at(&self, p: [f64; 2]) -> Result<f64> {
        self.require_inside(p)?;
        // Validate the immersion as metric_at does.
        self.metric_at(p)?;
        Ok(match self.kind {
            ChartKind::FlatPlane | ChartKind::Catenoid | ChartKind::Helicoid => 0.0,
            ChartKind::SphereCap { .. } => 1.0,
        })
    }
}

/// Maximum of |H|^2 over the mesh quadrature points (element centroids).
/// Used as the curvature constant for the bound context; the reported bounds
/// are those of the supplied immersion.
pub fn sup_mean_curvature_sq(chart: &ImmersedChart, mesh: &crate::mesh::TriMesh) -> Result<f64> {
    if mesh.chart_id != chart.name {
        return Err(Error::Config(format!(
            "mesh was generated from chart '{}', not '{}'",
            mesh.chart_id, chart.name
        )));
    }
    let mut sup = 0.0f64;
    for tri in &mesh.triangles {
        let c = mesh.param_centroid(*tri);
        let h = chart.mean_curvature_norm_at(c)?;
        sup = sup.max(h * h);
    }
    Ok(sup)
}
