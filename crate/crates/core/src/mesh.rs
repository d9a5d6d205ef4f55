//! Triangulations of parameter domains carrying embedded coordinates and
//! boundary flags.
//!
//! Only structured generators are provided (grid and concentric rings): their
//! output is deterministic, which keeps every downstream report reproducible.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{ImmersedChart, MAX_AMBIENT};

/// Meshable subset of a chart's parameter domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionSpec {
    Rectangle {
        u_min: f64,
        u_max: f64,
        v_min: f64,
        v_max: f64,
    },
    /// Disk of the given radius centered at the parameter origin.
    Disk { radius: f64 },
}

/// Triangulated domain. `params` are parameter-space positions, `coords` the
/// embedded positions (zero-padded beyond the chart's ambient dimension).
#[derive(Debug, Clone)]
pub struct TriMesh {
    pub chart_id: String,
    pub region: RegionSpec,
    pub params: Vec<[f64; 2]>,
    pub coords: Vec<[f64; MAX_AMBIENT]>,
    /// Vertex index triples, counterclockwise in parameter space.
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    /// Target edge length in parameter units.
    pub h: f64,
}

impl TriMesh {
    pub fn num_vertices(&self) -> usize {
        self.params.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn interior_count(&self) -> usize {
        self.boundary.iter().filter(|b| !**b).count()
    }

    pub fn param_centroid(&self, tri: [usize; 3]) -> [f64; 2] {
        let [a, b, c] = tri;
        [
            (self.params[a][0] + self.params[b][0] + self.params[c][0]) / 3.0,
            (self.params[a][1] + self.params[b][1] + self.params[c][1]) / 3.0,
        ]
    }

    /// Signed parameter-space area of a triangle.
    pub fn param_area(&self, tri: [usize; 3]) -> f64 {
        let [a, b, c] = tri;
        let (pa, pb, pc) = (self.params[a], self.params[b], self.params[c]);
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }

    pub fn total_param_area(&self) -> f64 {
        self.triangles.iter().map(|t| self.param_area(*t)).sum()
    }

    /// Edge incidence counts, keyed by sorted vertex pair.
    pub fn edge_incidence(&self) -> BTreeMap<(usize, usize), usize> {
        let mut edges = BTreeMap::new();
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let key = (a.min(b), a.max(b));
                *edges.entry(key).or_insert(0) += 1;
            }
        }
        edges
    }

    /// Edges lying on exactly one triangle.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        self.edge_incidence()
            .into_iter()
            .filter(|&(_, c)| c == 1)
            .map(|(e, _)| e)
            .collect()
    }

    /// Number of closed loops formed by the boundary edges.
    pub fn boundary_loop_count(&self) -> usize {
        let edges = self.boundary_edges();
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(a, b) in &edges {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        let mut seen: BTreeMap<usize, bool> = adj.keys().map(|&k| (k, false)).collect();
        let mut loops = 0;
        for &start in adj.keys() {
            if seen[&start] {
                continue;
            }
            loops += 1;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                if std::mem::replace(seen.get_mut(&v).unwrap(), true) {
                    continue;
                }
                for &w in &adj[&v] {
                    if !seen[&w] {
                        stack.push(w);
                    }
                }
            }
        }
        loops
    }

    /// (V, E, F) counts for the Euler relation V - E + F = 1 (disk topology,
    /// outer face not counted).
    pub fn euler_counts(&self) -> (usize, usize, usize) {
        (
            self.num_vertices(),
            self.edge_incidence().len(),
            self.num_triangles(),
        )
    }

    /// Smallest parameter-space triangle angle, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut min = f64::INFINITY;
        for t in &self.triangles {
            for r in 0..3 {
                let a = self.params[t[r]];
                let b = self.params[t[(r + 1) % 3]];
                let c = self.params[t[(r + 2) % 3]];
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let dot = u[0] * v[0] + u[1] * v[1];
                let nu = (u[0] * u[0] + u[1] * u[1]).sqrt();
                let nv = (v[0] * v[0] + v[1] * v[1]).sqrt();
                let ang = (dot / (nu * nv)).clamp(-1.0, 1.0).acos();
                min = min.min(ang.to_degrees());
            }
        }
        min
    }

    /// Structural validation: positive areas, boundary-flag consistency,
    /// no duplicate vertices within 1e-12 parameter distance.
    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.triangles.iter().enumerate() {
            if self.param_area(*t) <= 0.0 {
                return Err(Error::Assembly(format!(
                    "triangle {i} has nonpositive parameter area"
                )));
            }
        }
        let mut on_bedge = vec![false; self.num_vertices()];
        for (a, b) in self.boundary_edges() {
            on_bedge[a] = true;
            on_bedge[b] = true;
        }
        if on_bedge != self.boundary {
            return Err(Error::Internal(
                "boundary mask disagrees with boundary-edge incidence".into(),
            ));
        }
        let mut order: Vec<usize> = (0..self.num_vertices()).collect();
        order.sort_by(|&i, &j| {
            self.params[i]
                .partial_cmp(&self.params[j])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for w in order.windows(2) {
            let (p, q) = (self.params[w[0]], self.params[w[1]]);
            let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            if d < 1e-12 {
                return Err(Error::Internal(format!(
                    "duplicate vertices {} and {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    /// Plain-text dump: one `v u v x1 .. xN bflag` line per vertex and one
    /// `t i j k` line per triangle.
    pub fn dump(&self, ambient_dim: usize) -> String {
        let mut out = String::new();
        for (i, p) in self.params.iter().enumerate() {
            out.push_str(&format!("v {:.17e} {:.17e}", p[0], p[1]));
            for a in 0..ambient_dim {
                out.push_str(&format!(" {:.17e}", self.coords[i][a]));
            }
            out.push_str(&format!(" {}\n", if self.boundary[i] { 1 } else { 0 }));
        }
        for t in &self.triangles {
            out.push_str(&format!("t {} {} {}\n", t[0], t[1], t[2]));
        }
        out
    }
}

fn flag_boundary(mesh: &mut TriMesh) {
    let mut flags = vec![false; mesh.num_vertices()];
    for (a, b) in mesh.boundary_edges() {
        flags[a] = true;
        flags[b] = true;
    }
    mesh.boundary = flags;
}

fn cells(extent: f64, h: f64) -> usize {
    ((extent / h) - 1e-9).ceil().max(1.0) as usize
}

/// Structured grid triangulation of `[0, width] x [0, height]` with the
/// alternating split (see [`mesh_rectangle_with`]).
pub fn mesh_rectangle(width: f64, height: f64, h: f64) -> Result<TriMesh> {
    mesh_rectangle_with(width, height, h, true)
}

/// Structured grid triangulation of `[0, width] x [0, height]`.
///
/// With `alternate` the split diagonal flips by cell parity, which on even
/// cell counts preserves the full dihedral symmetry of a square (symmetric
/// eigenvalue pairs stay exactly degenerate discretely). Without it every
/// cell uses the same diagonal, so each interior vertex patch pairs into
/// parallelograms and the lumped vertex Laplacian stays consistent under a
/// variable metric.
pub fn mesh_rectangle_with(width: f64, height: f64, h: f64, alternate: bool) -> Result<TriMesh> {
    if !(width > 0.0 && height > 0.0 && h > 0.0) {
        return Err(Error::Argument(format!(
            "rectangle sizes and target edge length must be positive (got {width}, {height}, {h})"
        )));
    }
    if h >= width.min(height) / 2.0 + 1e-12 {
        return Err(Error::Argument(format!(
            "target edge length {h} too coarse for a {width} x {height} rectangle"
        )));
    }
    let nu = cells(width, h);
    let nv = cells(height, h);
    let (du, dv) = (width / nu as f64, height / nv as f64);
    let mut params = Vec::with_capacity((nu + 1) * (nv + 1));
    for i in 0..=nu {
        for j in 0..=nv {
            params.push([i as f64 * du, j as f64 * dv]);
        }
    }
    let idx = |i: usize, j: usize| i * (nv + 1) + j;
    let mut triangles = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            if !alternate || (i + j) % 2 == 0 {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    let coords = params.iter().map(|p| [p[0], p[1], 0.0]).collect();
    let mut mesh = TriMesh {
        chart_id: String::new(),
        region: RegionSpec::Rectangle {
            u_min: 0.0,
            u_max: width,
            v_min: 0.0,
            v_max: height,
        },
        params,
        coords,
        triangles,
        boundary: Vec::new(),
        h,
    };
    flag_boundary(&mut mesh);
    Ok(mesh)
}

/// Triangulate the band between two concentric vertex rings by a merge walk
/// over their angular positions. Produces `inner.len() + outer.len()`
/// counterclockwise triangles. Ring vertices must be in ascending angular
/// order starting at angle zero.
fn triangulate_band(inner: &[usize], outer: &[usize], triangles: &mut Vec<[usize; 3]>) {
    let (ma, mb) = (inner.len(), outer.len());
    let (mut i, mut j) = (0usize, 0usize);
    while i < ma || j < mb {
        // Compare the fractional angles of the next candidates exactly.
        let advance_inner = if i == ma {
            false
        } else if j == mb {
            true
        } else {
            (i + 1) * mb <= (j + 1) * ma
        };
        if advance_inner {
            triangles.push([inner[i % ma], outer[j % mb], inner[(i + 1) % ma]]);
            i += 1;
        } else {
            triangles.push([inner[i % ma], outer[j % mb], outer[(j + 1) % mb]]);
            j += 1;
        }
    }
}

/// Concentric-ring triangulation of a disk centered at the parameter origin.
/// Ring `k` holds `6k` vertices, so all edge lengths stay below `1.5 h`.
pub fn mesh_disk(radius: f64, h: f64) -> Result<TriMesh> {
    if !(radius > 0.0 && h > 0.0) {
        return Err(Error::Argument(format!(
            "disk radius and target edge length must be positive (got {radius}, {h})"
        )));
    }
    let nrings = cells(radius, h);
    let dr = radius / nrings as f64;
    let mut params = vec![[0.0, 0.0]];
    let mut rings: Vec<Vec<usize>> = vec![vec![0]];
    for k in 1..=nrings {
        let m = 6 * k;
        let r = k as f64 * dr;
        let mut ring = Vec::with_capacity(m);
        for j in 0..m {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            ring.push(params.len());
            params.push([r * phi.cos(), r * phi.sin()]);
        }
        rings.push(ring);
    }
    let mut triangles = Vec::new();
    // Center fan.
    let first = &rings[1];
    for j in 0..first.len() {
        triangles.push([0, first[j], first[(j + 1) % first.len()]]);
    }
    for k in 2..=nrings {
        triangulate_band(&rings[k - 1], &rings[k], &mut triangles);
    }
    let coords = params.iter().map(|p| [p[0], p[1], 0.0]).collect();
    let mut mesh = TriMesh {
        chart_id: String::new(),
        region: RegionSpec::Disk { radius },
        params,
        coords,
        triangles,
        boundary: Vec::new(),
        h,
    };
    flag_boundary(&mut mesh);
    Ok(mesh)
}

/// Mesh a region of a chart's parameter domain and embed the vertices.
pub fn mesh_chart(chart: &ImmersedChart, region: RegionSpec, h: f64) -> Result<TriMesh> {
    let mut mesh = match region {
        RegionSpec::Rectangle {
            u_min,
            u_max,
            v_min,
            v_max,
        } => {
            for corner in [
                [u_min, v_min],
                [u_max, v_min],
                [u_min, v_max],
                [u_max, v_max],
            ] {
                if !chart.contains(corner) {
                    return Err(Error::Domain(format!(
                        "region corner ({}, {}) escapes parameter domain of chart '{}'",
                        corner[0], corner[1], chart.name
                    )));
                }
            }
            let alternate = chart.ambient_dim() == chart.intrinsic_dim();
            let mut m = mesh_rectangle_with(u_max - u_min, v_max - v_min, h, alternate)?;
            for p in &mut m.params {
                p[0] += u_min;
                p[1] += v_min;
            }
            m.region = region;
            m
        }
        RegionSpec::Disk { radius } => {
            for corner in [[radius, 0.0], [-radius, 0.0], [0.0, radius], [0.0, -radius]] {
                if !chart.contains(corner) {
                    return Err(Error::Domain(format!(
                        "parameter disk of radius {radius} escapes domain of chart '{}'",
                        chart.name
                    )));
                }
            }
            mesh_disk(radius, h)?
        }
    };
    mesh.chart_id = chart.name.clone();
    for (i, p) in mesh.params.iter().enumerate() {
        mesh.coords[i] = chart.embed(*p);
    }
    Ok(mesh)
}

/// Uniform 1-to-4 midpoint refinement. New midpoints of boundary edges are
/// projected onto the exact parameter boundary curve and re-embedded through
/// the chart; the target edge length is halved.
pub fn refine(mesh: &TriMesh, chart: &ImmersedChart) -> Result<TriMesh> {
    if mesh.chart_id != chart.name {
        return Err(Error::Config(format!(
            "mesh was generated from chart '{}', not '{}'",
            mesh.chart_id, chart.name
        )));
    }
    let incidence = mesh.edge_incidence();
    let mut params = mesh.params.clone();
    let mut boundary = mesh.boundary.clone();
    let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&(a, b), &count) in &incidence {
        let pa = mesh.params[a];
        let pb = mesh.params[b];
        let mut p = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
        let on_boundary = count == 1;
        if on_boundary {
            if let RegionSpec::Disk { radius } = mesh.region {
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                p = [p[0] * radius / r, p[1] * radius / r];
            }
            // Rectangle boundary edges are axis-aligned segments; their
            // midpoints already lie on the boundary.
        }
        midpoint.insert((a, b), params.len());
        params.push(p);
        boundary.push(on_boundary);
    }
    let mid = |a: usize, b: usize| midpoint[&(a.min(b), a.max(b))];
    let mut triangles = Vec::with_capacity(4 * mesh.num_triangles());
    for t in &mesh.triangles {
        let [a, b, c] = *t;
        let (mab, mbc, mca) = (mid(a, b), mid(b, c), mid(c, a));
        triangles.push([a, mab, mca]);
        triangles.push([mab, b, mbc]);
        triangles.push([mca, mbc, c]);
        triangles.push([mab, mbc, mca]);
    }
    let coords = params.iter().map(|p| chart.embed(*p)).collect();
    Ok(TriMesh {
        chart_id: mesh.chart_id.clone(),
        region: mesh.region,
        params,
        coords,
        triangles,
        boundary,
        h: mesh.h / 2.0,
    })
}
