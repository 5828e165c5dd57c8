//! Exact differential geometry of the half-space model of hyperbolic space.
//!
//! The ambient manifold is the upper half space `{x in R^{n+1} : x_{n+1} > 0}`
//! with metric `delta / x_{n+1}^2` (curvature -1). Two Killing fields are
//! supported, both in canonical position:
//!
//! - hyperbolic: the dilation field `Z(x) = x`, axis through the origin and
//!   infinity, orthogonal to the unit upper hemisphere;
//! - parabolic: the horizontal translation `Z(x) = e_1`, fixing infinity,
//!   orthogonal to the vertical plane `{x_1 = 0}`.
//!
//! The totally geodesic hypersurface `M` orthogonal to the field is carried as
//! a coordinate chart ([`ChartCase`]): the hemisphere uses the disk coordinate
//! `xi` with embedding `(xi, sqrt(1-|xi|^2))`, the plane uses the inclusion
//! `(0, xi)`. The quantity `gamma = 1 / <Z,Z>` is the central coefficient of
//! the mean-curvature operator and is provided with its chart-metric gradient.
//!
//! Everything here is closed form; finite differences appear only in tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Point of the open half space; the last coordinate is the height.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpacePoint {
    coords: Vec<f64>,
}

impl HalfSpacePoint {
    /// Builds a point, rejecting heights `<= 0` and non-finite coordinates.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Domain(format!(
                "ambient dimension must be >= 2, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        let h = coords[coords.len() - 1];
        if h <= 0.0 {
            return Err(Error::Domain(format!(
                "height must be positive, got {h}"
            )));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Height above the ideal boundary plane.
    pub fn height(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }

    /// Ambient dimension `n + 1`.
    pub fn ambient_dim(&self) -> usize {
        self.coords.len()
    }
}

/// Tangent vector at a half-space point, in Euclidean components.
#[derive(Debug, Clone)]
pub struct TangentVector {
    pub base: HalfSpacePoint,
    pub components: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: HalfSpacePoint, components: Vec<f64>) -> Result<Self> {
        if components.len() != base.ambient_dim() {
            return Err(Error::Domain("component/point dimension mismatch".into()));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite tangent component".into()));
        }
        Ok(Self { base, components })
    }

    /// Hyperbolic norm `|v| / height`.
    pub fn hyperbolic_norm(&self) -> f64 {
        let e: f64 = self.components.iter().map(|c| c * c).sum::<f64>().sqrt();
        e / self.base.height()
    }
}

/// The two canonical Killing field types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KillingFieldKind {
    /// Dilation about the origin; ideal fixed points 0 and infinity.
    Hyperbolic,
    /// Unit translation along `e_1`; ideal fixed point infinity.
    Parabolic,
}

/// A Killing field in canonical position, for graphs over an `n`-dimensional
/// totally geodesic hypersurface of `H^{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillingField {
    pub kind: KillingFieldKind,
    /// Dimension of the graph domain `M` (ambient dimension is `n + 1`).
    pub n: usize,
}

impl KillingField {
    pub fn new(kind: KillingFieldKind, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("dimension n must be >= 2, got {n}")));
        }
        Ok(Self { kind, n })
    }

    fn check_point(&self, x: &HalfSpacePoint) -> Result<()> {
        if x.ambient_dim() != self.n + 1 {
            return Err(Error::Domain(format!(
                "point dimension {} does not match ambient {}",
                x.ambient_dim(),
                self.n + 1
            )));
        }
        Ok(())
    }

    /// Field value at `x`: position vector (hyperbolic) or `e_1` (parabolic).
    pub fn eval(&self, x: &HalfSpacePoint) -> Result<TangentVector> {
        self.check_point(x)?;
        let comps = match self.kind {
            KillingFieldKind::Hyperbolic => x.coords().to_vec(),
            KillingFieldKind::Parabolic => {
                let mut v = vec![0.0; self.n + 1];
                v[0] = 1.0;
                v
            }
        };
        TangentVector::new(x.clone(), comps)
    }

    /// Flow `Psi(t, x)`: dilation by `e^t` or translation by `t e_1`.
    pub fn flow(&self, t: f64, x: &HalfSpacePoint) -> Result<HalfSpacePoint> {
        self.check_point(x)?;
        let coords = match self.kind {
            KillingFieldKind::Hyperbolic => {
                let s = t.exp();
                x.coords().iter().map(|c| s * c).collect()
            }
            KillingFieldKind::Parabolic => {
                let mut c = x.coords().to_vec();
                c[0] += t;
                c
            }
        };
        HalfSpacePoint::new(coords)
    }

    /// `gamma = 1 / <Z,Z>` as an ambient function.
    pub fn gamma_at(&self, x: &HalfSpacePoint) -> Result<f64> {
        self.check_point(x)?;
        let h = x.height();
        Ok(match self.kind {
            KillingFieldKind::Parabolic => h * h,
            KillingFieldKind::Hyperbolic => {
                let r2: f64 = x.coords().iter().map(|c| c * c).sum();
                h * h / r2
            }
        })
    }

    /// `nabla_Z Z` through the Killing identity `(1/(2 gamma^2)) grad gamma`.
    ///
    /// This is the form used by the PDE coefficients; the Christoffel route
    /// lives in [`nabla_z_z_christoffel`] and is compared against this one by
    /// [`accel_consistency`].
    pub fn nabla_z_z(&self, x: &HalfSpacePoint) -> Result<TangentVector> {
        self.check_point(x)?;
        let dim = self.n + 1;
        let h = x.height();
        // Ambient gradient of gamma: g_inv * d(gamma) = h^2 * d(gamma).
        let mut dgamma = vec![0.0; dim];
        match self.kind {
            KillingFieldKind::Parabolic => {
                dgamma[dim - 1] = 2.0 * h;
            }
            KillingFieldKind::Hyperbolic => {
                let r2: f64 = x.coords().iter().map(|c| c * c).sum();
                for (k, d) in dgamma.iter_mut().enumerate() {
                    *d = -2.0 * h * h * x.coords()[k] / (r2 * r2);
                }
                dgamma[dim - 1] += 2.0 * h / r2;
            }
        }
        let gamma = self.gamma_at(x)?;
        let scale = h * h / (2.0 * gamma * gamma);
        TangentVector::new(x.clone(), dgamma.iter().map(|d| scale * d).collect())
    }
}

/// Ambient Christoffel symbols of the conformal metric `delta / x_{n+1}^2`:
/// `Gamma^k_ij = -(d^k_i d_{j,last} + d^k_j d_{i,last} - d_{ij} d_{k,last}) / height`.
pub fn ambient_christoffel(x: &HalfSpacePoint, k: usize, i: usize, j: usize) -> f64 {
    let last = x.ambient_dim() - 1;
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut v = 0.0;
    if j == last {
        v -= d(k, i);
    }
    if i == last {
        v -= d(k, j);
    }
    if k == last {
        v += d(i, j);
    }
    v / x.height()
}

/// `nabla_Z Z` assembled from the ambient Christoffel symbols.
pub fn nabla_z_z_christoffel(field: &KillingField, x: &HalfSpacePoint) -> Result<TangentVector> {
    let z = field.eval(x)?;
    let dim = x.ambient_dim();
    let mut out = vec![0.0; dim];
    // Z^i d_i Z^k: zero for the constant parabolic field, x^k for the dilation.
    if field.kind == KillingFieldKind::Hyperbolic {
        out.copy_from_slice(x.coords());
    }
    for (k, o) in out.iter_mut().enumerate() {
        for i in 0..dim {
            for j in 0..dim {
                *o += ambient_christoffel(x, k, i, j) * z.components[i] * z.components[j];
            }
        }
    }
    TangentVector::new(x.clone(), out)
}

/// Hyperbolic norm of the difference between the Christoffel and the
/// Killing-identity evaluations of `nabla_Z Z` at `x`.
pub fn accel_consistency(field: &KillingField, x: &HalfSpacePoint) -> Result<f64> {
    let a = nabla_z_z_christoffel(field, x)?;
    let b = field.nabla_z_z(x)?;
    let diff: Vec<f64> = a
        .components
        .iter()
        .zip(&b.components)
        .map(|(u, v)| u - v)
        .collect();
    Ok(TangentVector::new(x.clone(), diff)?.hyperbolic_norm())
}

/// Dense symmetric metric data at a point: matrix, inverse, coordinate
/// partials `dg[k][i][j] = d_k g_ij`, and `sqrt(det g)`.
#[derive(Debug, Clone)]
pub struct ChartMetricData {
    pub g: Vec<Vec<f64>>,
    pub g_inv: Vec<Vec<f64>>,
    pub dg: Vec<Vec<Vec<f64>>>,
    pub sqrt_det_g: f64,
}

/// Ambient metric `delta / x_{n+1}^2` with inverse and partials.
pub fn ambient_metric(x: &HalfSpacePoint) -> Result<ChartMetricData> {
    let dim = x.ambient_dim();
    let h = x.height();
    let h2 = h * h;
    let mut g = vec![vec![0.0; dim]; dim];
    let mut g_inv = vec![vec![0.0; dim]; dim];
    let mut dg = vec![vec![vec![0.0; dim]; dim]; dim];
    for i in 0..dim {
        g[i][i] = 1.0 / h2;
        g_inv[i][i] = h2;
        dg[dim - 1][i][i] = -2.0 / (h2 * h);
    }
    Ok(ChartMetricData {
        g,
        g_inv,
        dg,
        sqrt_det_g: h.powi(-(dim as i32)),
    })
}

/// Coordinate chart of the totally geodesic hypersurface `M`.
///
/// - `Parabolic`: `M = {x_1 = 0}` with chart coordinate
///   `xi = (x_2, ..., x_{n+1})`, the last entry being the height.
/// - `Hyperbolic`: `M` is the unit upper hemisphere with disk coordinate
///   `xi = (x_1, ..., x_n)`, `|xi| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChartCase {
    Parabolic { n: usize },
    Hyperbolic { n: usize },
}

impl ChartCase {
    pub fn n(&self) -> usize {
        match *self {
            ChartCase::Parabolic { n } | ChartCase::Hyperbolic { n } => n,
        }
    }

    /// The Killing field this chart is orthogonal to.
    pub fn field(&self) -> KillingField {
        match *self {
            ChartCase::Parabolic { n } => KillingField {
                kind: KillingFieldKind::Parabolic,
                n,
            },
            ChartCase::Hyperbolic { n } => KillingField {
                kind: KillingFieldKind::Hyperbolic,
                n,
            },
        }
    }

    fn check_coord(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.n() {
            return Err(Error::Domain(format!(
                "chart coordinate dimension {} != n = {}",
                xi.len(),
                self.n()
            )));
        }
        if xi.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite chart coordinate".into()));
        }
        match self {
            ChartCase::Parabolic { .. } => {
                if xi[xi.len() - 1] <= 0.0 {
                    return Err(Error::Domain(format!(
                        "parabolic chart requires last coordinate > 0, got {}",
                        xi[xi.len() - 1]
                    )));
                }
            }
            ChartCase::Hyperbolic { .. } => {
                let r2: f64 = xi.iter().map(|c| c * c).sum();
                if r2 >= 1.0 {
                    return Err(Error::Domain(format!(
                        "hyperbolic chart requires |xi| < 1, got |xi| = {}",
                        r2.sqrt()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Embeds a chart coordinate into the ambient half space.
    pub fn embed(&self, xi: &[f64]) -> Result<HalfSpacePoint> {
        self.check_coord(xi)?;
        match self {
            ChartCase::Parabolic { .. } => {
                let mut c = Vec::with_capacity(xi.len() + 1);
                c.push(0.0);
                c.extend_from_slice(xi);
                HalfSpacePoint::new(c)
            }
            ChartCase::Hyperbolic { .. } => {
                let r2: f64 = xi.iter().map(|c| c * c).sum();
                let mut c = xi.to_vec();
                c.push((1.0 - r2).sqrt());
                HalfSpacePoint::new(c)
            }
        }
    }

    /// `gamma = 1 / <Z,Z>` restricted to the chart, with its chart-metric
    /// gradient `g^{ij} d_j gamma`.
    pub fn gamma(&self, xi: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_coord(xi)?;
        match self {
            ChartCase::Parabolic { .. } => {
                let z = xi[xi.len() - 1];
                let mut grad = vec![0.0; xi.len()];
                // g_inv = z^2 I, d(gamma) = 2 z e_last.
                grad[xi.len() - 1] = 2.0 * z * z * z;
                Ok((z * z, grad))
            }
            ChartCase::Hyperbolic { .. } => {
                let r2: f64 = xi.iter().map(|c| c * c).sum();
                let gamma = 1.0 - r2;
                // g_inv d(gamma) = s^2 (I - xi xi^T)(-2 xi) = -2 gamma^2 xi.
                let grad = xi.iter().map(|c| -2.0 * gamma * gamma * c).collect();
                Ok((gamma, grad))
            }
        }
    }

    /// Warp function `rho = 1 / sqrt(gamma)` of the cylinder's warped-product
    /// structure. Documentation accessor; no operation consumes it.
    pub fn warp_rho(&self, xi: &[f64]) -> Result<f64> {
        Ok(1.0 / self.gamma(xi)?.0.sqrt())
    }

    /// Chart metric (pullback of the ambient metric through [`embed`]).
    ///
    /// Parabolic: `delta / z^2`. Hyperbolic: `(delta_ij + xi_i xi_j / s^2) / s^2`
    /// with `s^2 = 1 - |xi|^2`.
    ///
    /// [`embed`]: ChartCase::embed
    pub fn metric(&self, xi: &[f64]) -> Result<ChartMetricData> {
        self.check_coord(xi)?;
        let n = xi.len();
        match self {
            ChartCase::Parabolic { .. } => {
                let z = xi[n - 1];
                let z2 = z * z;
                let mut g = vec![vec![0.0; n]; n];
                let mut g_inv = vec![vec![0.0; n]; n];
                let mut dg = vec![vec![vec![0.0; n]; n]; n];
                for i in 0..n {
                    g[i][i] = 1.0 / z2;
                    g_inv[i][i] = z2;
                    dg[n - 1][i][i] = -2.0 / (z2 * z);
                }
                Ok(ChartMetricData {
                    g,
                    g_inv,
                    dg,
                    sqrt_det_g: z.powi(-(n as i32)),
                })
            }
            ChartCase::Hyperbolic { .. } => {
                let r2: f64 = xi.iter().map(|c| c * c).sum();
                let s2 = 1.0 - r2;
                let s4 = s2 * s2;
                let mut g = vec![vec![0.0; n]; n];
                let mut g_inv = vec![vec![0.0; n]; n];
                let mut dg = vec![vec![vec![0.0; n]; n]; n];
                for i in 0..n {
                    for j in 0..n {
                        let d = if i == j { 1.0 } else { 0.0 };
                        g[i][j] = (d + xi[i] * xi[j] / s2) / s2;
                        g_inv[i][j] = s2 * (d - xi[i] * xi[j]);
                        for k in 0..n {
                            let dk = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                            dg[k][i][j] = 2.0 * xi[k] * d / s4
                                + (dk(k, i) * xi[j] + dk(k, j) * xi[i]) / s4
                                + 4.0 * xi[i] * xi[j] * xi[k] / (s4 * s2);
                        }
                    }
                }
                Ok(ChartMetricData {
                    g,
                    g_inv,
                    dg,
                    sqrt_det_g: s2.sqrt().powi(-(n as i32 + 1)),
                })
            }
        }
    }
}

/// Hyperbolic distance via `cosh d = 1 + |x - y|^2 / (2 h_x h_y)`.
pub fn hyperbolic_distance(x: &HalfSpacePoint, y: &HalfSpacePoint) -> Result<f64> {
    if x.ambient_dim() != y.ambient_dim() {
        return Err(Error::Domain("dimension mismatch".into()));
    }
    let d2: f64 = x
        .coords()
        .iter()
        .zip(y.coords())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((1.0 + d2 / (2.0 * x.height() * y.height())).acosh())
}

/// Point at arc length `t` along the unit-speed ambient geodesic from `x`
/// with initial direction `v` (`v` is normalized internally).
///
/// Geodesics are vertical rays or Euclidean semicircles orthogonal to the
/// ideal boundary; both branches are closed form.
pub fn geodesic_point(x: &HalfSpacePoint, v: &[f64], t: f64) -> Result<HalfSpacePoint> {
    let dim = x.ambient_dim();
    if v.len() != dim {
        return Err(Error::Domain("direction dimension mismatch".into()));
    }
    let norm: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::Domain("degenerate geodesic direction".into()));
    }
    let d: Vec<f64> = v.iter().map(|c| c / norm).collect();
    let z = x.height();
    let horiz: f64 = d[..dim - 1].iter().map(|c| c * c).sum::<f64>().sqrt();
    if horiz < 1e-14 {
        // Vertical ray.
        let mut c = x.coords().to_vec();
        c[dim - 1] = z * (d[dim - 1].signum() * t).exp();
        return HalfSpacePoint::new(c);
    }
    // Semicircle: cos(theta0) = d_z, unit horizontal direction e = -d_h/|d_h|.
    let cos0 = d[dim - 1].clamp(-1.0, 1.0);
    let sin0 = horiz;
    let radius = z / sin0;
    let e: Vec<f64> = d[..dim - 1].iter().map(|c| -c / horiz).collect();
    // Center on the ideal plane.
    let center: Vec<f64> = x.coords()[..dim - 1]
        .iter()
        .zip(&e)
        .map(|(c, ei)| c - radius * cos0 * ei)
        .collect();
    // theta(t) = 2 atan(tan(theta0/2) e^t); theta0 in (0, pi).
    let theta0 = cos0.acos();
    let theta = 2.0 * ((theta0 / 2.0).tan() * t.exp()).atan();
    let mut out = vec![0.0; dim];
    for i in 0..dim - 1 {
        out[i] = center[i] + radius * theta.cos() * e[i];
    }
    out[dim - 1] = radius * theta.sin();
    HalfSpacePoint::new(out)
}
