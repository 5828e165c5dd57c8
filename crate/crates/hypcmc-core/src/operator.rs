//! Metric-aware finite-difference discretization of the Killing-graph
//! mean-curvature operator.
//!
//! With the chart metric diagonal in grid coordinates, the residual at an
//! interior node is
//!
//! ```text
//! R[u] = (1/sqrt g) sum_a ( Phi_a(+) - Phi_a(-) ) / h_a
//!        - (1/(2 gamma w)) sum_a g^aa du_a dgamma_a  +  n H
//! ```
//!
//! where `Phi_a = sqrt(g) g^aa (D_a u) / w` is evaluated at staggered face
//! midpoints, `w = sqrt(gamma + |grad u|^2)`, and the lower-order term is the
//! Killing-identity form of the flow-acceleration coupling. Face values of
//! `w` use the one-sided normal difference and averaged centered transverse
//! differences, which keeps the stencil inside the 3^n node box and the
//! truncation error at second order.
//!
//! The residual vanishes (to discretization error) exactly on the model
//! surfaces of [`crate::surfaces`] with their closed-form `H`, which is the
//! convention anchor for the whole crate: equidistant planes tilted toward
//! the flow have `H = slope / sqrt(1 + slope^2) > 0`.
//!
//! `H` is not range-checked here; the solver enforces `|H| < 1` where
//! barriers demand it, while the residual itself remains evaluable for the
//! model surfaces with `|H| = 1` (horospheres).

use crate::error::{Error, Result};
use crate::grid::{ChartGrid, GraphFunction};

/// Set of unknown nodes for assembly: always a subset of the grid interior.
#[derive(Debug, Clone)]
pub struct ActiveSet {
    /// Flat indices of unknowns, ascending.
    pub unknowns: Vec<usize>,
    /// Node -> unknown rank, or -1.
    pub rank: Vec<i64>,
}

impl ActiveSet {
    /// All non-Dirichlet nodes.
    pub fn full_interior(grid: &ChartGrid) -> Self {
        Self::from_flags(grid, |_| true)
    }

    /// Interior nodes selected by a predicate on flat indices.
    pub fn from_flags(grid: &ChartGrid, keep: impl Fn(usize) -> bool) -> Self {
        let mut unknowns = Vec::new();
        let mut rank = vec![-1i64; grid.len()];
        for f in 0..grid.len() {
            if keep(f) && !grid.is_dirichlet(&grid.unflat(f)) {
                rank[f] = unknowns.len() as i64;
                unknowns.push(f);
            }
        }
        Self { unknowns, rank }
    }

    pub fn len(&self) -> usize {
        self.unknowns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unknowns.is_empty()
    }
}

/// Per-node residual values with norms.
#[derive(Debug, Clone)]
pub struct ResidualField {
    /// Per grid node; zero outside the active set.
    pub values: Vec<f64>,
    /// Max norm over the active set.
    pub max_norm: f64,
    /// L2 norm weighted by the metric volume element `sqrt(g) prod(h_a)`.
    pub l2_norm: f64,
}

/// Sparse Jacobian rows (triplets over unknown indices) plus the residual.
#[derive(Debug, Clone)]
pub struct JacobianSystem {
    pub n_unknowns: usize,
    pub triplets: Vec<(usize, usize, f64)>,
    pub residual: Vec<f64>,
}

struct NodeContext<'a> {
    grid: &'a ChartGrid,
    u: &'a [f64],
}

impl NodeContext<'_> {
    fn val(&self, base: &[usize], delta: &[i64]) -> (usize, f64) {
        let idx = self
            .grid
            .resolve(base, delta)
            .expect("stencil lookup left the grid: node is not interior");
        let f = self.grid.flat(&idx);
        (f, self.u[f])
    }
}

/// Pointwise residual and, when `grad` is given, its derivatives with respect
/// to the stencil values, accumulated as (flat node, coefficient) pairs.
fn node_residual(
    ctx: &NodeContext,
    idx: &[usize],
    h_curv: f64,
    mut grad: Option<&mut Vec<(usize, f64)>>,
) -> f64 {
    let grid = ctx.grid;
    let dim = grid.dim();
    let n = grid.case.n() as f64;
    let c_p = grid.coords(idx);
    let m_p = grid.metric_at(&c_p);

    let mut divergence = 0.0;

    for a in 0..dim {
        let h_a = grid.axes[a].h;
        for dir in [1i64, -1] {
            // Face between lo and hi = lo + e_a.
            let mut face = c_p.clone();
            face[a] += dir as f64 * h_a / 2.0;
            let m_f = grid.metric_at(&face);
            let s_flux = m_f.flux_coeff[a];
            if s_flux == 0.0 {
                continue; // polar center: no radial flux through r = 0
            }
            let lo_delta: Vec<i64> = (0..dim).map(|k| if k == a { dir.min(0) } else { 0 }).collect();
            let hi_delta: Vec<i64> = (0..dim).map(|k| if k == a { dir.max(0) } else { 0 }).collect();
            let (lo_f, lo_v) = ctx.val(idx, &lo_delta);
            let (hi_f, hi_v) = ctx.val(idx, &hi_delta);

            let d_a = (hi_v - lo_v) / h_a;
            // Transverse derivatives at the face: average of the centered
            // differences on both sides.
            let mut d = vec![0.0; dim];
            d[a] = d_a;
            let mut d_contrib: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
            if grad.is_some() {
                d_contrib[a] = vec![(hi_f, 1.0 / h_a), (lo_f, -1.0 / h_a)];
            }
            for b in 0..dim {
                if b == a {
                    continue;
                }
                let h_b = grid.axes[b].h;
                let mut db = 0.0;
                for (side_delta, _side_f) in [(&lo_delta, lo_f), (&hi_delta, hi_f)] {
                    let mut dp = side_delta.clone();
                    dp[b] += 1;
                    let mut dm = side_delta.clone();
                    dm[b] -= 1;
                    let (pf, pv) = ctx.val(idx, &dp);
                    let (mf, mv) = ctx.val(idx, &dm);
                    db += (pv - mv) / (4.0 * h_b);
                    if grad.is_some() {
                        d_contrib[b].push((pf, 1.0 / (4.0 * h_b)));
                        d_contrib[b].push((mf, -1.0 / (4.0 * h_b)));
                    }
                }
                d[b] = db;
            }
            let mut w2 = m_f.gamma;
            for b in 0..dim {
                w2 += m_f.g_inv[b] * d[b] * d[b];
            }
            let w = w2.sqrt();
            let phi = s_flux * d_a / w;
            let sgn = dir as f64;
            divergence += sgn * phi / h_a;

            if let Some(g) = grad.as_deref_mut() {
                // dPhi = S ( dD_a / w - D_a/w^3 sum_b g^bb D_b dD_b ).
                let scale = sgn / (h_a * m_p.sqrt_det);
                for &(q, c) in &d_contrib[a] {
                    g.push((q, scale * s_flux * c / w));
                }
                let pref = -s_flux * d_a / (w2 * w);
                for b in 0..dim {
                    let gb = m_f.g_inv[b] * d[b];
                    if gb == 0.0 {
                        continue;
                    }
                    for &(q, c) in &d_contrib[b] {
                        g.push((q, scale * pref * gb * c));
                    }
                }
            }
        }
    }

    // Lower-order term at the node.
    let mut d0 = vec![0.0; dim];
    let mut d0_nodes = vec![(0usize, 0usize); dim];
    for a in 0..dim {
        let h_a = grid.axes[a].h;
        let plus: Vec<i64> = (0..dim).map(|k| if k == a { 1 } else { 0 }).collect();
        let minus: Vec<i64> = (0..dim).map(|k| if k == a { -1 } else { 0 }).collect();
        let (pf, pv) = ctx.val(idx, &plus);
        let (mf, mv) = ctx.val(idx, &minus);
        d0[a] = (pv - mv) / (2.0 * h_a);
        d0_nodes[a] = (pf, mf);
    }
    let mut w2 = m_p.gamma;
    let mut p_term = 0.0;
    for a in 0..dim {
        w2 += m_p.g_inv[a] * d0[a] * d0[a];
        p_term += m_p.g_inv[a] * m_p.dgamma[a] * d0[a];
    }
    let w_p = w2.sqrt();
    let lot = p_term / (2.0 * m_p.gamma * w_p);

    if let Some(g) = grad.as_deref_mut() {
        // dlot = dP/(2 gamma w) - P/(2 gamma w^2) dw,
        // dw = (1/w) sum_a g^aa D0_a dD0_a.
        for a in 0..dim {
            let h_a = grid.axes[a].h;
            let (pf, mf) = d0_nodes[a];
            let dp_coeff = m_p.g_inv[a] * m_p.dgamma[a] / (2.0 * m_p.gamma * w_p);
            let dw_coeff = -p_term / (2.0 * m_p.gamma * w2) * (m_p.g_inv[a] * d0[a] / w_p);
            let c = (dp_coeff + dw_coeff) / (2.0 * h_a);
            g.push((pf, -c));
            g.push((mf, c));
        }
    }

    divergence / m_p.sqrt_det - lot + n * h_curv
}

/// `w = sqrt(gamma + |grad u|^2)` at a node, from centered differences.
pub fn flux_w(u: &GraphFunction, idx: &[usize]) -> Result<f64> {
    let grid = &u.grid;
    if grid.is_dirichlet(idx) {
        return Err(Error::Domain("flux_w needs an interior node".into()));
    }
    let dim = grid.dim();
    let c = grid.coords(idx);
    let m = grid.metric_at(&c);
    let mut w2 = m.gamma;
    for a in 0..dim {
        let h_a = grid.axes[a].h;
        let plus: Vec<i64> = (0..dim).map(|k| if k == a { 1 } else { 0 }).collect();
        let minus: Vec<i64> = (0..dim).map(|k| if k == a { -1 } else { 0 }).collect();
        let pv = grid
            .resolve(idx, &plus)
            .map(|i| u.values[grid.flat(&i)])
            .ok_or_else(|| Error::Domain("flux_w stencil leaves grid".into()))?;
        let mv = grid
            .resolve(idx, &minus)
            .map(|i| u.values[grid.flat(&i)])
            .ok_or_else(|| Error::Domain("flux_w stencil leaves grid".into()))?;
        let d = (pv - mv) / (2.0 * h_a);
        w2 += m.g_inv[a] * d * d;
    }
    Ok(w2.sqrt())
}

/// Residual of the discrete mean-curvature operator over the active set.
pub fn residual_masked(
    u: &GraphFunction,
    h_curv: f64,
    active: &ActiveSet,
) -> Result<ResidualField> {
    if !h_curv.is_finite() {
        return Err(Error::Domain("H must be finite".into()));
    }
    let grid = &u.grid;
    let ctx = NodeContext {
        grid,
        u: &u.values,
    };
    let cell: f64 = grid.axes.iter().map(|a| a.h).product();
    let mut values = vec![0.0; grid.len()];
    let mut max_norm = 0.0f64;
    let mut l2 = 0.0;
    for &f in &active.unknowns {
        let idx = grid.unflat(f);
        let r = node_residual(&ctx, &idx, h_curv, None);
        values[f] = r;
        max_norm = max_norm.max(r.abs());
        let m = grid.metric_at(&grid.coords(&idx));
        l2 += r * r * m.sqrt_det * cell;
    }
    Ok(ResidualField {
        values,
        max_norm,
        l2_norm: l2.sqrt(),
    })
}

/// Residual over the full grid interior.
pub fn residual(u: &GraphFunction, h_curv: f64) -> Result<ResidualField> {
    residual_masked(u, h_curv, &ActiveSet::full_interior(&u.grid))
}

/// Jacobian of the residual with respect to the active unknowns, with the
/// current residual vector. Entries to non-active nodes (Dirichlet data or
/// frozen values) are dropped: they sit on the right-hand side.
pub fn jacobian(u: &GraphFunction, h_curv: f64, active: &ActiveSet) -> Result<JacobianSystem> {
    if !h_curv.is_finite() {
        return Err(Error::Domain("H must be finite".into()));
    }
    let grid = &u.grid;
    let ctx = NodeContext {
        grid,
        u: &u.values,
    };
    let mut triplets = Vec::with_capacity(active.len() * (3usize.pow(grid.dim() as u32)));
    let mut res = Vec::with_capacity(active.len());
    let mut scratch: Vec<(usize, f64)> = Vec::with_capacity(32);
    for (row, &f) in active.unknowns.iter().enumerate() {
        let idx = grid.unflat(f);
        scratch.clear();
        let r = node_residual(&ctx, &idx, h_curv, Some(&mut scratch));
        res.push(r);
        scratch.sort_unstable_by_key(|&(q, _)| q);
        let mut i = 0;
        while i < scratch.len() {
            let q = scratch[i].0;
            let mut c = 0.0;
            while i < scratch.len() && scratch[i].0 == q {
                c += scratch[i].1;
                i += 1;
            }
            let col = active.rank[q];
            // Zero-valued entries are kept: the pattern must stay constant
            // across Newton iterations for symbolic-factorization reuse.
            if col >= 0 {
                triplets.push((row, col as usize, c));
            }
        }
    }
    Ok(JacobianSystem {
        n_unknowns: active.len(),
        triplets,
        residual: res,
    })
}
