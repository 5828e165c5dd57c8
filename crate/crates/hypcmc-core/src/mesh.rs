//! Embedded meshes of Killing graphs and an independent curvature oracle.
//!
//! The oracle estimates Euclidean mean curvature and normal per vertex by a
//! local quadric fit over the 2-ring neighborhood, then converts to the
//! hyperbolic value through `H_hyp = height * H_euc + nu_last`. It shares no
//! code with the PDE discretization, which is what makes the end-to-end
//! check (solve, embed, measure curvature) meaningful.

use crate::boundary::BoundaryGraph;
use crate::error::{Error, Result};
use crate::geometry::ChartCase;
use crate::grid::GraphFunction;
use crate::surfaces::{ModelSurface, Orientation, SurfaceKind};

/// Structured quad mesh of an embedded surface in the half-space model.
///
/// Vertices are stored row-major (`idx = i * dims[1] + j`); either axis may
/// be periodic (closed angular directions).
#[derive(Debug, Clone)]
pub struct EmbeddedMesh {
    pub dims: [usize; 2],
    pub periodic: [bool; 2],
    pub vertices: Vec<[f64; 3]>,
    /// Per-vertex Euclidean unit normal fixing the curvature orientation.
    pub normals: Vec<[f64; 3]>,
}

impl EmbeddedMesh {
    fn build(
        dims: [usize; 2],
        periodic: [bool; 2],
        vertices: Vec<[f64; 3]>,
        normals: Vec<[f64; 3]>,
    ) -> Result<Self> {
        if vertices.len() != dims[0] * dims[1] || normals.len() != vertices.len() {
            return Err(Error::GridMismatch("mesh array sizes disagree".into()));
        }
        if vertices.iter().any(|v| v[2] <= 0.0) {
            return Err(Error::Domain(
                "mesh vertex left the half space (height <= 0)".into(),
            ));
        }
        Ok(Self {
            dims,
            periodic,
            vertices,
            normals,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn flat(&self, i: usize, j: usize) -> usize {
        i * self.dims[1] + j
    }

    /// Neighbor lookup with periodic wrap; `None` off an open edge.
    pub fn neighbor(&self, i: usize, j: usize, di: i64, dj: i64) -> Option<usize> {
        let wrap = |x: i64, count: usize, per: bool| -> Option<usize> {
            if per {
                Some(x.rem_euclid(count as i64) as usize)
            } else if x < 0 || x >= count as i64 {
                None
            } else {
                Some(x as usize)
            }
        };
        let ii = wrap(i as i64 + di, self.dims[0], self.periodic[0])?;
        let jj = wrap(j as i64 + dj, self.dims[1], self.periodic[1])?;
        Some(self.flat(ii, jj))
    }

    /// Triangle list: each grid quad split into two triangles.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let mut tris = Vec::new();
        let imax = if self.periodic[0] {
            self.dims[0]
        } else {
            self.dims[0] - 1
        };
        let jmax = if self.periodic[1] {
            self.dims[1]
        } else {
            self.dims[1] - 1
        };
        for i in 0..imax {
            for j in 0..jmax {
                let a = self.flat(i, j);
                let b = self.neighbor(i, j, 1, 0).unwrap();
                let c = self.neighbor(i, j, 1, 1).unwrap();
                let d = self.neighbor(i, j, 0, 1).unwrap();
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            }
        }
        tris
    }

    /// Vertices with a complete 2-ring, where the curvature fit is defined.
    pub fn interior_vertices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for i in 0..self.dims[0] {
            'v: for j in 0..self.dims[1] {
                for di in -2i64..=2 {
                    for dj in -2i64..=2 {
                        if self.neighbor(i, j, di, dj).is_none() {
                            continue 'v;
                        }
                    }
                }
                out.push(self.flat(i, j));
            }
        }
        out
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Embeds a graph function: vertex = flow of the chart point by `u`.
///
/// Parabolic: `(u, y, z)`. Hyperbolic (polar grid): `e^u (xi, s)`. Normals
/// come from mesh tangents, oriented against the flow (`<nu, Z> <= 0`).
pub fn embed_graph(u: &GraphFunction) -> Result<EmbeddedMesh> {
    let grid = &u.grid;
    if grid.dim() != 2 {
        return Err(Error::Domain(
            "mesh embedding is implemented for surfaces (n = 2)".into(),
        ));
    }
    let case = grid.case;
    let field = case.field();
    let dims = [grid.axes[0].count, grid.axes[1].count];
    let periodic = [grid.axes[0].periodic, grid.axes[1].periodic];
    let mut vertices = Vec::with_capacity(grid.len());
    for f in 0..grid.len() {
        let idx = grid.unflat(f);
        let cart = grid.to_cartesian(&grid.coords(&idx));
        let x = case.embed(&cart)?;
        let y = field.flow(u.values[f], &x)?;
        let c = y.coords();
        vertices.push([c[0], c[1], c[2]]);
    }
    // Normals from centered (one-sided at edges) mesh tangents.
    let mesh0 = EmbeddedMesh {
        dims,
        periodic,
        vertices: vertices.clone(),
        normals: vec![[0.0; 3]; vertices.len()],
    };
    let mut normals = Vec::with_capacity(vertices.len());
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            let v = mesh0.flat(i, j);
            let tangent = |axis: usize| -> [f64; 3] {
                let (dp, dm) = if axis == 0 { ((1, 0), (-1, 0)) } else { ((0, 1), (0, -1)) };
                let p = mesh0.neighbor(i, j, dp.0, dp.1);
                let m = mesh0.neighbor(i, j, dm.0, dm.1);
                let (a, b) = match (p, m) {
                    (Some(p), Some(m)) => (vertices[p], vertices[m]),
                    (Some(p), None) => (vertices[p], vertices[v]),
                    (None, Some(m)) => (vertices[v], vertices[m]),
                    (None, None) => (vertices[v], vertices[v]),
                };
                [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
            };
            let mut nrm = cross(tangent(0), tangent(1));
            let l = norm(nrm);
            if l == 0.0 {
                return Err(Error::Numerics("degenerate mesh tangents".into()));
            }
            nrm = scale(nrm, 1.0 / l);
            let z_dir = match case {
                ChartCase::Parabolic { .. } => [1.0, 0.0, 0.0],
                ChartCase::Hyperbolic { .. } => vertices[v],
            };
            if dot(nrm, z_dir) > 0.0 {
                nrm = scale(nrm, -1.0);
            }
            normals.push(nrm);
        }
    }
    EmbeddedMesh::build(dims, periodic, vertices, normals)
}

/// Samples a model surface as a mesh with target spacing `h`, using canonical
/// extents: planes over `y in [-1, 1]`, `z in [0.25, 2.25]`; horospheres over
/// `[-1, 1]^2`; sphere pieces in latitude-longitude bands above `0.15 rho`.
pub fn sample_surface_mesh(s: &ModelSurface, h: f64) -> Result<EmbeddedMesh> {
    let sign = match s.orientation {
        Orientation::AgainstFlow => 1.0,
        Orientation::TowardFlow => -1.0,
    };
    match &s.kind {
        SurfaceKind::VerticalPlane { offset } | SurfaceKind::TiltedPlane { offset, .. } => {
            let m = match &s.kind {
                SurfaceKind::TiltedPlane { slope, .. } => *slope,
                _ => 0.0,
            };
            let ny = (2.0 / h).round() as usize + 1;
            let nz = (2.0 / h).round() as usize + 1;
            let w = (1.0 + m * m).sqrt();
            let nrm = [-sign / w, 0.0, sign * m / w];
            let mut vertices = Vec::with_capacity(ny * nz);
            for i in 0..ny {
                let y = -1.0 + 2.0 * i as f64 / (ny - 1) as f64;
                for j in 0..nz {
                    let z = 0.25 + 2.0 * j as f64 / (nz - 1) as f64;
                    vertices.push([offset + m * z, y, z]);
                }
            }
            let normals = vec![nrm; vertices.len()];
            EmbeddedMesh::build([ny, nz], [false, false], vertices, normals)
        }
        SurfaceKind::Horosphere { height } => {
            let n = (2.0 / h).round() as usize + 1;
            let mut vertices = Vec::with_capacity(n * n);
            for i in 0..n {
                let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                for j in 0..n {
                    let y = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
                    vertices.push([x, y, *height]);
                }
            }
            let normals = vec![[0.0, 0.0, sign]; vertices.len()];
            EmbeddedMesh::build([n, n], [false, false], vertices, normals)
        }
        SurfaceKind::Hemisphere { .. } | SurfaceKind::SphericalCap { .. } => {
            let (c, rho) = s.euclidean_sphere().unwrap();
            let z_cut = 0.15 * rho;
            let cos_max = ((z_cut - c[2]) / rho).clamp(-1.0, 1.0);
            let psi_max = cos_max.acos();
            let psi_min = (2.0 * h / rho).min(psi_max / 4.0);
            sphere_band(
                [c[0], c[1], c[2]],
                rho,
                psi_min,
                psi_max,
                h,
                sign > 0.0, // AgainstFlow = outward for sphere pieces
            )
        }
    }
}

/// Latitude-longitude band of the Euclidean sphere; polar angle away from
/// the vertical axis in `[psi_min, psi_max]`. `outward` picks the normal.
fn sphere_band(
    center: [f64; 3],
    rho: f64,
    psi_min: f64,
    psi_max: f64,
    h: f64,
    outward: bool,
) -> Result<EmbeddedMesh> {
    let n_phi = ((std::f64::consts::TAU * rho / h).round() as usize).max(16);
    let n_psi = (((psi_max - psi_min) * rho / h).round() as usize).max(8) + 1;
    let mut vertices = Vec::with_capacity(n_psi * n_phi);
    let mut normals = Vec::with_capacity(n_psi * n_phi);
    let s = if outward { 1.0 } else { -1.0 };
    for i in 0..n_psi {
        let psi = psi_min + (psi_max - psi_min) * i as f64 / (n_psi - 1) as f64;
        for j in 0..n_phi {
            let phi = std::f64::consts::TAU * j as f64 / n_phi as f64;
            let dir = [psi.sin() * phi.cos(), psi.sin() * phi.sin(), psi.cos()];
            vertices.push([
                center[0] + rho * dir[0],
                center[1] + rho * dir[1],
                center[2] + rho * dir[2],
            ]);
            normals.push(scale(dir, s));
        }
    }
    EmbeddedMesh::build([n_psi, n_phi], [false, true], vertices, normals)
}

/// Full geodesic sphere (Euclidean sphere strictly inside the half space),
/// used as a known-curvature oracle target.
pub fn sample_sphere_mesh(center: [f64; 3], r: f64, h: f64, inward: bool) -> Result<EmbeddedMesh> {
    if center[2] - r <= 0.0 {
        return Err(Error::Domain(
            "sphere must lie strictly inside the half space".into(),
        ));
    }
    let psi_min = (2.0 * h / r).min(0.3);
    sphere_band(center, r, psi_min, std::f64::consts::PI - psi_min, h, !inward)
}

/// Solves the 6x6 normal equations of the quadric fit by Gaussian
/// elimination; `None` when the neighborhood is degenerate.
fn solve6(mut a: [[f64; 7]; 6]) -> Option<[f64; 6]> {
    for col in 0..6 {
        let mut piv = col;
        for r in col + 1..6 {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-13 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..6 {
            if r == col {
                continue;
            }
            let f = a[r][col] / a[col][col];
            for k in col..7 {
                a[r][k] -= f * a[col][k];
            }
        }
    }
    let mut x = [0.0; 6];
    for i in 0..6 {
        x[i] = a[i][6] / a[i][i];
    }
    Some(x)
}

/// Per-vertex hyperbolic mean curvature by 2-ring quadric fitting; `None` at
/// vertices without a full 2-ring or with a degenerate fit.
pub fn numeric_mean_curvature(mesh: &EmbeddedMesh) -> Vec<Option<f64>> {
    let mut out = vec![None; mesh.len()];
    for i in 0..mesh.dims[0] {
        'v: for j in 0..mesh.dims[1] {
            let v = i * mesh.dims[1] + j;
            let nu = mesh.normals[v];
            // Local frame aligned with the stored reference normal.
            let pick = if nu[0].abs() < 0.9 {
                [1.0, 0.0, 0.0]
            } else {
                [0.0, 1.0, 0.0]
            };
            let mut t1 = cross(nu, pick);
            t1 = scale(t1, 1.0 / norm(t1));
            let t2 = cross(nu, t1);

            // Normal equations for h ~ f + d s + e t + a s^2/2 + b s t + c t^2/2.
            let mut ata = [[0.0f64; 7]; 6];
            let p0 = mesh.vertices[v];
            let mut scale_s = 0.0f64;
            for di in -2i64..=2 {
                for dj in -2i64..=2 {
                    let Some(q) = mesh.neighbor(i, j, di, dj) else {
                        continue 'v;
                    };
                    let p = mesh.vertices[q];
                    let d = [p[0] - p0[0], p[1] - p0[1], p[2] - p0[2]];
                    let (s, t, hh) = (dot(d, t1), dot(d, t2), dot(d, nu));
                    scale_s = scale_s.max(s.abs()).max(t.abs());
                    let row = [1.0, s, t, 0.5 * s * s, s * t, 0.5 * t * t];
                    for r in 0..6 {
                        for c in 0..6 {
                            ata[r][c] += row[r] * row[c];
                        }
                        ata[r][6] += row[r] * hh;
                    }
                }
            }
            if scale_s < 1e-300 {
                continue;
            }
            let Some(x) = solve6(ata) else {
                continue;
            };
            let (d, e) = (x[1], x[2]);
            let (a, b, c) = (x[3], x[4], x[5]);
            let e1 = 1.0 + d * d;
            let f1 = d * e;
            let g1 = 1.0 + e * e;
            let w = (1.0 + d * d + e * e).sqrt();
            let denom = 2.0 * w * (e1 * g1 - f1 * f1);
            if denom.abs() < 1e-13 {
                continue;
            }
            let h_euc = (a * g1 - 2.0 * b * f1 + c * e1) / denom;
            // Fitted unit normal in world coordinates.
            let nu_fit = scale(
                [
                    -d * t1[0] - e * t2[0] + nu[0],
                    -d * t1[1] - e * t2[1] + nu[1],
                    -d * t1[2] - e * t2[2] + nu[2],
                ],
                1.0 / w,
            );
            out[v] = Some(p0[2] * h_euc + nu_fit[2]);
        }
    }
    out
}

/// Summary of the curvature oracle against an expected constant.
#[derive(Debug, Clone)]
pub struct CurvatureStats {
    pub count: usize,
    pub max_dev: f64,
    pub mean: f64,
}

/// Curvature statistics of an embedded graph against an expected constant,
/// restricted to vertices at least `margin` (chart coordinate distance) away
/// from the Dirichlet edges. Curvature at boundary vertices is out of scope,
/// so near-edge vertices are excluded from the check region.
pub fn graph_curvature_stats(
    u: &GraphFunction,
    expected: f64,
    margin: f64,
) -> Result<CurvatureStats> {
    let mesh = embed_graph(u)?;
    let vals = numeric_mean_curvature(&mesh);
    let grid = &u.grid;
    let mut count = 0;
    let mut max_dev = 0.0f64;
    let mut mean = 0.0;
    for f in 0..grid.len() {
        if grid.dirichlet_margin(&grid.unflat(f)) < margin {
            continue;
        }
        if let Some(v) = vals[f] {
            count += 1;
            max_dev = max_dev.max((v - expected).abs());
            mean += v;
        }
    }
    if count == 0 {
        return Err(Error::Domain(
            "no interior vertices inside the margin".into(),
        ));
    }
    Ok(CurvatureStats {
        count,
        max_dev,
        mean: mean / count as f64,
    })
}

pub fn curvature_deviation(mesh: &EmbeddedMesh, expected: f64) -> CurvatureStats {
    let vals = numeric_mean_curvature(mesh);
    let mut count = 0;
    let mut max_dev = 0.0f64;
    let mut mean = 0.0;
    for v in vals.into_iter().flatten() {
        count += 1;
        max_dev = max_dev.max((v - expected).abs());
        mean += v;
    }
    if count > 0 {
        mean /= count as f64;
    }
    CurvatureStats {
        count,
        max_dev,
        mean,
    }
}

/// Boundary attainment report: Richardson-extrapolated edge limits of `u`
/// against the datum.
#[derive(Debug, Clone)]
pub struct TraceReport {
    /// Ideal-boundary probe coordinates (transverse position or angle).
    pub probes: Vec<f64>,
    pub limits: Vec<f64>,
    pub errors: Vec<f64>,
    pub max_error: f64,
}

/// Extrapolates `u` along inward grid lines from the ideal edge (depths
/// `eps, 2 eps, 4 eps`) with a two-level Richardson scheme for a first-order
/// boundary layer, and compares with `phi` at every edge column.
pub fn boundary_trace(u: &GraphFunction, phi: &BoundaryGraph) -> Result<TraceReport> {
    let grid = &u.grid;
    if grid.dim() != 2 {
        return Err(Error::Domain("trace extraction needs n = 2".into()));
    }
    let mut probes = Vec::new();
    let mut limits = Vec::new();
    let mut errors = Vec::new();
    let sample = |col: usize, depth_coord: f64| -> Result<f64> {
        // Linear interpolation along the depth axis (axis 1).
        let ax = &grid.axes[1];
        let pos = (depth_coord - ax.origin) / ax.h;
        let i0 = pos.floor().clamp(0.0, (ax.count - 1) as f64) as usize;
        let i1 = (i0 + 1).min(ax.count - 1);
        let w = (pos - i0 as f64).clamp(0.0, 1.0);
        if pos < -1e-9 || pos > (ax.count - 1) as f64 + 1e-9 {
            return Err(Error::Domain(
                "too few layers for trace extrapolation".into(),
            ));
        }
        Ok(u.value(&[col, i0]) * (1.0 - w) + u.value(&[col, i1]) * w)
    };
    match grid.case {
        ChartCase::Parabolic { .. } => {
            let eps = grid.axes[1].origin;
            for col in 0..grid.axes[0].count {
                let y = grid.axes[0].coord(col);
                let v1 = sample(col, eps)?;
                let v2 = sample(col, 2.0 * eps)?;
                let v3 = sample(col, 4.0 * eps)?;
                let r1 = 2.0 * v1 - v2;
                let r1b = 2.0 * v2 - v3;
                let limit = (4.0 * r1 - r1b) / 3.0;
                probes.push(y);
                limits.push(limit);
                errors.push((limit - phi.eval(&[y])).abs());
            }
        }
        ChartCase::Hyperbolic { .. } => {
            let rim = grid.axes[1].coord(grid.axes[1].count - 1);
            let eps = 1.0 - rim;
            if 1.0 - 4.0 * eps <= grid.axes[1].origin {
                return Err(Error::Domain(
                    "too few layers for trace extrapolation".into(),
                ));
            }
            for col in 0..grid.axes[0].count {
                let alpha = grid.axes[0].coord(col);
                let v1 = sample(col, 1.0 - eps)?;
                let v2 = sample(col, 1.0 - 2.0 * eps)?;
                let v3 = sample(col, 1.0 - 4.0 * eps)?;
                let r1 = 2.0 * v1 - v2;
                let r1b = 2.0 * v2 - v3;
                let limit = (4.0 * r1 - r1b) / 3.0;
                probes.push(alpha);
                limits.push(limit);
                errors.push((limit - phi.eval(&[alpha])).abs());
            }
        }
    }
    let max_error = errors.iter().cloned().fold(0.0, f64::max);
    Ok(TraceReport {
        probes,
        limits,
        errors,
        max_error,
    })
}
