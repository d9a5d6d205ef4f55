//! P1 Laplace-Beltrami stiffness and mass assembly on a chart mesh, plus
//! Dirichlet reduction by row/column deletion.
//!
//! The induced metric is frozen at each triangle's parameter centroid
//! (one-point quadrature), which preserves the O(h^2) eigenvalue convergence
//! of linear elements and keeps assembly exactly reproducible.

use crate::error::{Error, Result};
use crate::geometry::ImmersedChart;
use crate::linalg::{SparseSymMatrix, SymBuilder};
use crate::mesh::TriMesh;

/// Dirichlet-reduced system with the vertex index maps needed to reconstruct
/// fields on the full mesh.
#[derive(Debug, Clone)]
pub struct DirichletSystem {
    pub k_int: SparseSymMatrix,
    pub m_int: SparseSymMatrix,
    /// interior index -> mesh vertex index (ascending).
    pub interior_to_mesh: Vec<usize>,
    /// mesh vertex index -> interior index.
    pub mesh_to_interior: Vec<Option<usize>>,
}

impl DirichletSystem {
    pub fn dim(&self) -> usize {
        self.k_int.dim()
    }

    /// Restrict a full-mesh nodal field to the interior vertices.
    pub fn restrict_field(&self, full: &[f64]) -> Vec<f64> {
        self.interior_to_mesh.iter().map(|&v| full[v]).collect()
    }

    /// Scatter an interior vector to a full-mesh field (zero on the boundary).
    pub fn extend_field(&self, interior: &[f64], num_vertices: usize) -> Vec<f64> {
        let mut full = vec![0.0; num_vertices];
        for (i, &v) in self.interior_to_mesh.iter().enumerate() {
            full[v] = interior[i];
        }
        full
    }
}

/// Everything the diagnostics need from one mesh level: the unreduced
/// matrices (for discrete Laplacians of coordinate fields) and the reduced
/// Dirichlet system.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub k_full: SparseSymMatrix,
    pub m_full: SparseSymMatrix,
    pub sys: DirichletSystem,
}

impl Discretization {
    pub fn build(mesh: &TriMesh, chart: &ImmersedChart) -> Result<Self> {
        let (k_full, m_full) = assemble(mesh, chart)?;
        let sys = apply_dirichlet(&k_full, &m_full, mesh)?;
        Ok(Self {
            k_full,
            m_full,
            sys,
        })
    }
}

/// Gradients of the three P1 basis functions on a parameter triangle, plus
/// its area. `grads[a]` is constant over the element.
pub fn p1_gradients(pa: [f64; 2], pb: [f64; 2], pc: [f64; 2]) -> ([[f64; 2]; 3], f64) {
    let det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
    let area = 0.5 * det;
    let grads = [
        [(pb[1] - pc[1]) / det, (pc[0] - pb[0]) / det],
        [(pc[1] - pa[1]) / det, (pa[0] - pc[0]) / det],
        [(pa[1] - pb[1]) / det, (pb[0] - pa[0]) / det],
    ];
    (grads, area)
}

/// Assemble stiffness and mass on the full vertex set.
///
/// Stiffness entries are `int g^{ij} dphi_a/dx^i dphi_b/dx^j sqrt(det g)`,
/// mass uses the standard consistent P1 local matrix scaled by the centroid
/// area density.
pub fn assemble(
    mesh: &TriMesh,
    chart: &ImmersedChart,
) -> Result<(SparseSymMatrix, SparseSymMatrix)> {
    if mesh.chart_id != chart.name {
        return Err(Error::Config(format!(
            "mesh was generated from chart '{}', not '{}'",
            mesh.chart_id, chart.name
        )));
    }
    let n = mesh.num_vertices();
    let mut kb = SymBuilder::new(n);
    let mut mb = SymBuilder::new(n);
    for (t_idx, tri) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = *tri;
        let (grads, area) = p1_gradients(mesh.params[a], mesh.params[b], mesh.params[c]);
        if !(area > 0.0) {
            return Err(Error::Assembly(format!(
                "triangle {t_idx} is degenerate (area {area})"
            )));
        }
        let metric = chart.metric_at(mesh.param_centroid(*tri))?;
        let w = metric.sqrt_det_g * area;
        let verts = [a, b, c];
        for p in 0..3 {
            for q in 0..=p {
                let kk = w * metric.grad_inner(grads[p], grads[q]);
                kb.add(verts[p], verts[q], kk);
                let mm = w / 12.0 * if p == q { 2.0 } else { 1.0 };
                mb.add(verts[p], verts[q], mm);
            }
        }
    }
    Ok((kb.build(), mb.build()))
}

/// Delete boundary rows and columns, keeping the index maps.
pub fn apply_dirichlet(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    mesh: &TriMesh,
) -> Result<DirichletSystem> {
    if mesh.boundary.iter().all(|b| !*b) {
        return Err(Error::Argument(
            "mesh has no boundary vertices; Dirichlet reduction needs a nonempty boundary".into(),
        ));
    }
    let interior_to_mesh: Vec<usize> = (0..mesh.num_vertices())
        .filter(|&v| !mesh.boundary[v])
        .collect();
    if interior_to_mesh.is_empty() {
        return Err(Error::Argument(
            "all vertices are boundary vertices; the reduced system is empty".into(),
        ));
    }
    let mut mesh_to_interior = vec![None; mesh.num_vertices()];
    for (i, &v) in interior_to_mesh.iter().enumerate() {
        mesh_to_interior[v] = Some(i);
    }
    Ok(DirichletSystem {
        k_int: k.restrict(&interior_to_mesh),
        m_int: m.restrict(&interior_to_mesh),
        interior_to_mesh,
        mesh_to_interior,
    })
}
