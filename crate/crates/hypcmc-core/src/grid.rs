//! Finite-difference grids over the chart of the graph hypersurface.
//!
//! The parabolic chart uses a Cartesian box `[lo, hi]^{n-1} x [eps, z_hi]`
//! whose four (2n) edges are all Dirichlet; the bottom edge `z = eps` is the
//! truncated ideal boundary. The hyperbolic chart uses polar coordinates
//! `(alpha, r)` on the disk with a periodic angle, radius staggered by half a
//! cell so the coordinate center `r = 0` falls on a cell face (where the
//! radial flux vanishes identically), and a single Dirichlet rim at
//! `r = 1 - eps`. In both cases the chart metric is diagonal in grid
//! coordinates, which keeps the operator stencil compact.
//!
//! Radial lookups past the polar center reflect through it: the node
//! `(alpha, -r)` is the node `(alpha + pi, r)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ChartCase;

/// Role of a Dirichlet edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeLabel {
    /// Truncated ideal boundary; carries the datum `phi`.
    Ideal,
    /// Artificial truncation edge; carries policy data.
    Artificial,
}

/// Closure of one end of a non-periodic axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisEnd {
    Dirichlet(EdgeLabel),
    /// Lower end of the polar radius: no boundary nodes; lookups reflect
    /// through the center and the radial flux vanishes at `r = 0`.
    PolarCenter,
}

/// One grid axis with uniformly spaced nodes `origin + i * h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub origin: f64,
    pub h: f64,
    pub count: usize,
    pub periodic: bool,
    /// `None` for periodic axes.
    pub lo: Option<AxisEnd>,
    pub hi: Option<AxisEnd>,
}

impl GridAxis {
    pub fn coord(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.h
    }
}

/// Tensor-product grid over a chart, with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartGrid {
    pub case: ChartCase,
    pub axes: Vec<GridAxis>,
}

/// Diagonal metric data at a grid coordinate.
#[derive(Debug, Clone)]
pub struct MetricSample {
    /// Diagonal of the inverse metric, one entry per axis.
    pub g_inv: Vec<f64>,
    pub sqrt_det: f64,
    pub gamma: f64,
    /// Coordinate partials of gamma.
    pub dgamma: Vec<f64>,
    /// `sqrt_det * g_inv[a]`, the conservative flux coefficient; finite and
    /// zero at the polar center where `g_inv` alone would blow up.
    pub flux_coeff: Vec<f64>,
}

impl ChartGrid {
    /// Cartesian box grid for the parabolic chart. `transverse` gives
    /// `(lo, hi, count)` per transverse axis; the height axis runs from
    /// `eps` to `z_hi` with `z_count` nodes.
    pub fn parabolic_box(
        n: usize,
        transverse: &[(f64, f64, usize)],
        eps: f64,
        z_hi: f64,
        z_count: usize,
    ) -> Result<Self> {
        if transverse.len() != n - 1 {
            return Err(Error::Domain(format!(
                "expected {} transverse axes, got {}",
                n - 1,
                transverse.len()
            )));
        }
        if eps <= 0.0 || z_hi <= eps {
            return Err(Error::Domain("need 0 < eps < z_hi".into()));
        }
        let mut axes = Vec::new();
        for &(lo, hi, count) in transverse {
            if count < 5 || hi <= lo {
                return Err(Error::Domain("axis needs >= 5 nodes and hi > lo".into()));
            }
            axes.push(GridAxis {
                origin: lo,
                h: (hi - lo) / (count - 1) as f64,
                count,
                periodic: false,
                lo: Some(AxisEnd::Dirichlet(EdgeLabel::Artificial)),
                hi: Some(AxisEnd::Dirichlet(EdgeLabel::Artificial)),
            });
        }
        if z_count < 5 {
            return Err(Error::Domain("axis needs >= 5 nodes".into()));
        }
        axes.push(GridAxis {
            origin: eps,
            h: (z_hi - eps) / (z_count - 1) as f64,
            count: z_count,
            periodic: false,
            lo: Some(AxisEnd::Dirichlet(EdgeLabel::Ideal)),
            hi: Some(AxisEnd::Dirichlet(EdgeLabel::Artificial)),
        });
        Ok(Self {
            case: ChartCase::Parabolic { n },
            axes,
        })
    }

    /// Polar disk grid for the hyperbolic chart (n = 2): periodic angle with
    /// `alpha_count` nodes (must be even for center reflection), staggered
    /// radius with `r_count` nodes, rim at `r = 1 - eps`.
    pub fn polar_disk(alpha_count: usize, r_count: usize, eps: f64) -> Result<Self> {
        if alpha_count < 8 || alpha_count % 2 != 0 {
            return Err(Error::Domain(
                "alpha axis needs an even count >= 8".into(),
            ));
        }
        if r_count < 5 {
            return Err(Error::Domain("radius axis needs >= 5 nodes".into()));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Domain("need 0 < eps < 1".into()));
        }
        let h_r = (1.0 - eps) / (r_count as f64 - 0.5);
        Ok(Self {
            case: ChartCase::Hyperbolic { n: 2 },
            axes: vec![
                GridAxis {
                    origin: 0.0,
                    h: std::f64::consts::TAU / alpha_count as f64,
                    count: alpha_count,
                    periodic: true,
                    lo: None,
                    hi: None,
                },
                GridAxis {
                    origin: 0.5 * h_r,
                    h: h_r,
                    count: r_count,
                    periodic: false,
                    lo: Some(AxisEnd::PolarCenter),
                    hi: Some(AxisEnd::Dirichlet(EdgeLabel::Ideal)),
                },
            ],
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Strides of the row-major layout (last axis fastest).
    pub fn strides(&self) -> Vec<usize> {
        let d = self.dim();
        let mut s = vec![1usize; d];
        for k in (0..d.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.axes[k + 1].count;
        }
        s
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        let strides = self.strides();
        idx.iter().zip(&strides).map(|(i, s)| i * s).sum()
    }

    pub fn unflat(&self, mut flat: usize) -> Vec<usize> {
        let strides = self.strides();
        strides
            .iter()
            .map(|s| {
                let i = flat / s;
                flat %= s;
                i
            })
            .collect()
    }

    /// Grid coordinates of a node.
    pub fn coords(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.coord(i))
            .collect()
    }

    /// Cartesian chart coordinates of a grid coordinate vector.
    pub fn to_cartesian(&self, c: &[f64]) -> Vec<f64> {
        match self.case {
            ChartCase::Parabolic { .. } => c.to_vec(),
            ChartCase::Hyperbolic { .. } => {
                let (alpha, r) = (c[0], c[1]);
                vec![r * alpha.cos(), r * alpha.sin()]
            }
        }
    }

    /// Diagonal metric data at grid coordinates `c` (nodes or face midpoints).
    pub fn metric_at(&self, c: &[f64]) -> MetricSample {
        match self.case {
            ChartCase::Parabolic { n } => {
                let z = c[c.len() - 1];
                let z2 = z * z;
                let d = self.dim();
                let sqrt_det = z.powi(-(n as i32));
                let mut dgamma = vec![0.0; d];
                dgamma[d - 1] = 2.0 * z;
                MetricSample {
                    g_inv: vec![z2; d],
                    sqrt_det,
                    gamma: z2,
                    dgamma,
                    flux_coeff: vec![sqrt_det * z2; d],
                }
            }
            ChartCase::Hyperbolic { .. } => {
                let r = c[1];
                let s2 = 1.0 - r * r;
                let sqrt_s2 = s2.sqrt();
                // g = diag(r^2/s^2, 1/s^4) in (alpha, r), so
                // sqrt(det) = r / s^3, flux coefficients r sqrt(s^2) (radial)
                // and 1/(r sqrt(s^2)) (angular).
                let g_inv_alpha = if r == 0.0 { f64::INFINITY } else { s2 / (r * r) };
                let flux_alpha = if r == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / (r * sqrt_s2)
                };
                MetricSample {
                    g_inv: vec![g_inv_alpha, s2 * s2],
                    sqrt_det: r / (s2 * sqrt_s2),
                    gamma: s2,
                    dgamma: vec![0.0, -2.0 * r],
                    flux_coeff: vec![flux_alpha, r * sqrt_s2],
                }
            }
        }
    }

    /// Resolves `base + delta`, wrapping periodic axes and reflecting through
    /// the polar center. Returns `None` past a Dirichlet edge.
    pub fn resolve(&self, base: &[usize], delta: &[i64]) -> Option<Vec<usize>> {
        let mut idx: Vec<i64> = base
            .iter()
            .zip(delta)
            .map(|(&b, &d)| b as i64 + d)
            .collect();
        // Center reflection first: r index -k-1 maps to k with alpha shifted
        // by half a turn.
        for a in 0..self.dim() {
            let ax = &self.axes[a];
            if idx[a] < 0 && ax.lo == Some(AxisEnd::PolarCenter) {
                idx[a] = -1 - idx[a];
                // The angle axis is axis 0 by construction of polar grids.
                idx[0] += (self.axes[0].count / 2) as i64;
            }
        }
        for a in 0..self.dim() {
            let ax = &self.axes[a];
            if ax.periodic {
                idx[a] = idx[a].rem_euclid(ax.count as i64);
            } else if idx[a] < 0 || idx[a] >= ax.count as i64 {
                return None;
            }
        }
        Some(idx.iter().map(|&i| i as usize).collect())
    }

    /// Whether the node lies on a Dirichlet edge.
    pub fn is_dirichlet(&self, idx: &[usize]) -> bool {
        idx.iter().zip(&self.axes).any(|(&i, ax)| {
            (i == 0 && matches!(ax.lo, Some(AxisEnd::Dirichlet(_))))
                || (i + 1 == ax.count && matches!(ax.hi, Some(AxisEnd::Dirichlet(_))))
        })
    }

    /// Labels of the Dirichlet edges through this node (may be several at a
    /// corner).
    pub fn edge_labels(&self, idx: &[usize]) -> Vec<EdgeLabel> {
        let mut out = Vec::new();
        for (&i, ax) in idx.iter().zip(&self.axes) {
            if i == 0 {
                if let Some(AxisEnd::Dirichlet(l)) = ax.lo {
                    out.push(l);
                }
            }
            if i + 1 == ax.count {
                if let Some(AxisEnd::Dirichlet(l)) = ax.hi {
                    out.push(l);
                }
            }
        }
        out
    }

    /// Flat indices of all interior (non-Dirichlet) nodes, in layout order.
    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&f| !self.is_dirichlet(&self.unflat(f)))
            .collect()
    }

    /// Iterates all multi-indices in layout order.
    pub fn iter_indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.len()).map(|f| self.unflat(f))
    }

    /// Chart-coordinate distance from a node to the nearest Dirichlet edge.
    pub fn dirichlet_margin(&self, idx: &[usize]) -> f64 {
        let mut m = f64::INFINITY;
        for (a, ax) in self.axes.iter().enumerate() {
            let x = ax.coord(idx[a]);
            if let Some(AxisEnd::Dirichlet(_)) = ax.lo {
                m = m.min(x - ax.coord(0));
            }
            if let Some(AxisEnd::Dirichlet(_)) = ax.hi {
                m = m.min(ax.coord(ax.count - 1) - x);
            }
        }
        m
    }
}

/// Grid samples of a graph function; boundary nodes carry Dirichlet data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFunction {
    pub grid: ChartGrid,
    pub values: Vec<f64>,
}

impl GraphFunction {
    pub fn new(grid: ChartGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerics("non-finite graph value".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: ChartGrid, c: f64) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![c; n],
        }
    }

    /// Samples a function of the Cartesian chart coordinates on every node;
    /// fails if the function is undefined at some node.
    pub fn from_fn(grid: ChartGrid, f: impl Fn(&[f64]) -> Option<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for idx in grid.iter_indices() {
            let cart = grid.to_cartesian(&grid.coords(&idx));
            match f(&cart) {
                Some(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(Error::Domain(format!(
                        "function undefined at grid node {:?} (cartesian {:?})",
                        idx, cart
                    )))
                }
            }
        }
        Ok(Self { grid, values })
    }

    pub fn value(&self, idx: &[usize]) -> f64 {
        self.values[self.grid.flat(idx)]
    }
}
