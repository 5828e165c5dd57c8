//! Nonlinear solves: damped Newton with continuation in `H` for the bounded
//! Dirichlet problem and for the truncated asymptotic problem.
//!
//! The asymptotic pipeline normalizes the datum so that `inf phi = 0`
//! (flowing the whole configuration is an isometry, so the shift is exact and
//! undone on output), truncates the chart, prescribes `phi` on the ideal
//! edge, fills artificial edges by policy, and runs Newton from `H = 0`
//! upward in steps. Comparison, gradient and sandwich monitors are reported
//! alongside the solution.

use serde::{Deserialize, Serialize};

use crate::boundary::{validate_boundary, BoundaryGraph};
use crate::error::{Error, Result};
use crate::geometry::ChartCase;
use crate::grid::{ChartGrid, EdgeLabel, GraphFunction};
use crate::linsolve::StencilSolver;
use crate::operator::{jacobian, residual_masked, ActiveSet};
use crate::surfaces::{supersolution_barrier, BarrierEnvelope, SheetGraph};

/// Newton iteration parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NewtonConfig {
    pub max_iter: usize,
    /// Absolute tolerance on the residual max-norm.
    pub abs_tol: f64,
    /// Backtracking factor for the damped step.
    pub backtrack: f64,
    pub min_step: f64,
    /// A stalled iteration with residual below this value counts as
    /// converged: badly scaled rows (polar center, thin cutoffs) put the
    /// attainable rounding floor above `abs_tol`.
    #[serde(default = "default_stall_tol")]
    pub stall_tol: f64,
}

fn default_stall_tol() -> f64 {
    1e-8
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            max_iter: 40,
            abs_tol: 1e-10,
            backtrack: 0.5,
            min_step: 1e-6,
            stall_tol: default_stall_tol(),
        }
    }
}

/// Data policy on artificial truncation edges (parabolic case).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtificialBc {
    /// Top edge: midpoint of the lower and upper barrier solutions through
    /// `inf phi = 0` and `sup phi`. Side edges: linear transition from the
    /// ideal datum at the bottom corner to the top-edge midpoint, so the
    /// boundary data stays continuous around the box.
    BarrierBlend,
    /// `phi` extended along the chart normal.
    ConstantExtension,
}

/// Truncation of the unbounded chart.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationConfig {
    /// Ideal-boundary cutoff: bottom edge height (parabolic) or rim defect
    /// (hyperbolic).
    pub eps: f64,
    /// Transverse half-extent of the parabolic box.
    pub transverse_extent: f64,
    /// Top edge height of the parabolic box.
    pub z_hi: f64,
    /// Target grid spacing.
    pub h: f64,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            eps: 1.0 / 32.0,
            transverse_extent: 3.0,
            z_hi: 2.0,
            h: 1.0 / 32.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub newton: NewtonConfig,
    /// Maximum continuation step in `H`; the ladder always starts at 0.
    pub continuation_step: f64,
    pub truncation: TruncationConfig,
    pub artificial_bc: ArtificialBc,
    /// Re-solve on an enlarged domain and report the interior change.
    pub sensitivity_check: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            newton: NewtonConfig::default(),
            continuation_step: 0.1,
            truncation: TruncationConfig::default(),
            artificial_bc: ArtificialBc::BarrierBlend,
            sensitivity_check: false,
        }
    }
}

/// Newton seed selection (used for the empirical uniqueness probe).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedChoice {
    /// Constant `inf phi` (after normalization, zero).
    ConstantInf,
    /// The supersolution barrier sampled on the grid.
    Barrier,
}

/// Solution diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub residual_max: f64,
    pub residual_l2: f64,
    /// Residual max-norms per Newton iteration, one list per continuation
    /// stage.
    pub newton_history: Vec<Vec<f64>>,
    /// Sup of the chart-metric gradient norm over nodes at least the default
    /// margin away from the Dirichlet boundary.
    pub gradient_sup: f64,
    /// `min(u - 0)` over nodes, in normalized scale (set when `H >= 0`).
    pub sandwich_lower: Option<f64>,
    /// `min(barrier - u)` over nodes, in normalized scale (set when `H >= 0`).
    pub sandwich_upper: Option<f64>,
    /// Max interior change under an enlarged truncation, when measured.
    pub truncation_sensitivity: Option<f64>,
    /// Normalization shift that was applied internally and undone on output.
    pub shift: f64,
}

/// A solved problem: grid samples of `u` plus diagnostics, in the original
/// (un-normalized) scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solution {
    pub u: GraphFunction,
    pub h_curv: f64,
    pub phi: Option<BoundaryGraph>,
    pub diagnostics: Diagnostics,
}

fn check_h(h: f64) -> Result<()> {
    if !(h.is_finite() && h.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "mean curvature must satisfy |H| < 1, got {h}"
        )));
    }
    Ok(())
}

/// Continuation ladder `0, step, 2 step, ..., H`.
fn h_ladder(target: f64, step: f64) -> Vec<f64> {
    let mut steps = vec![0.0];
    if target != 0.0 {
        let k = (target.abs() / step).ceil() as usize;
        for i in 1..=k {
            steps.push(target.signum() * target.abs().min(i as f64 * step));
        }
    }
    steps
}

/// Damped Newton over the active set, walking the continuation ladder.
/// `values` holds the full grid vector; Dirichlet and inactive entries are
/// left untouched.
///
/// Damping is affine invariant: a trial step is accepted when the Newton
/// decrement computed with the current factorization contracts
/// (`|J^-1 R(u + t d)| <= (1 - t/2) |d|`), which is insensitive to the badly
/// scaled rows near the degenerate ideal boundary. Convergence is declared
/// on the plain residual max-norm.
pub(crate) fn newton_solve_on(
    grid: &ChartGrid,
    active: &ActiveSet,
    values: &mut [f64],
    h_steps: &[f64],
    cfg: &NewtonConfig,
) -> Result<Vec<Vec<f64>>> {
    let mut history = Vec::new();
    let mut solver = StencilSolver::new(active.len());
    let l2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for &h in h_steps {
        let mut stage = Vec::new();
        let mut converged = false;
        for _ in 0..cfg.max_iter {
            let u = GraphFunction::new(grid.clone(), values.to_vec())?;
            let sys = jacobian(&u, h, active)?;
            let norm = sys.residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
            stage.push(norm);
            if norm <= cfg.abs_tol {
                converged = true;
                break;
            }
            let factor = solver.factor(&sys.triplets)?;
            let rhs: Vec<f64> = sys.residual.iter().map(|r| -r).collect();
            let delta = factor.solve(&rhs)?;
            let dn0 = l2(&delta);
            // Cap the initial step: near-degenerate ellipticity at steep
            // gradients can make the raw Newton step enormous.
            let delta_max = delta.iter().fold(0.0f64, |m, d| m.max(d.abs()));
            let spread = {
                let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (hi - lo).max(1.0)
            };
            let mut t = if delta_max > 4.0 * spread {
                4.0 * spread / delta_max
            } else {
                1.0
            };
            let mut accepted = false;
            while t >= cfg.min_step {
                let mut trial = values.to_vec();
                for (k, &f) in active.unknowns.iter().enumerate() {
                    trial[f] += t * delta[k];
                }
                if trial.iter().all(|v| v.is_finite()) {
                    let ut = GraphFunction::new(grid.clone(), trial.clone())?;
                    let rt = residual_masked(&ut, h, active)?;
                    if rt.max_norm <= cfg.abs_tol {
                        values.copy_from_slice(&trial);
                        accepted = true;
                        break;
                    }
                    let rt_vec: Vec<f64> =
                        active.unknowns.iter().map(|&f| -rt.values[f]).collect();
                    let decrement = factor.solve(&rt_vec)?;
                    if l2(&decrement) <= (1.0 - 0.5 * t) * dn0 {
                        values.copy_from_slice(&trial);
                        accepted = true;
                        break;
                    }
                }
                t *= cfg.backtrack;
            }
            if !accepted {
                if norm <= cfg.stall_tol {
                    converged = true;
                    break;
                }
                return Err(Error::Solver(format!(
                    "Newton stagnated at H = {h}: residual {norm:.3e}, history {stage:?}"
                )));
            }
        }
        if !converged {
            let u = GraphFunction::new(grid.clone(), values.to_vec())?;
            let r = residual_masked(&u, h, active)?;
            if r.max_norm <= cfg.abs_tol.max(cfg.stall_tol) {
                stage.push(r.max_norm);
            } else {
                return Err(Error::Solver(format!(
                    "Newton did not reach tolerance at H = {h}: residual {:.3e} after {} iterations",
                    r.max_norm, cfg.max_iter
                )));
            }
        }
        history.push(stage);
    }
    Ok(history)
}

/// Newton with the continuation ladder and a boundary-data ramp fallback.
///
/// `boundary` is a full-length node vector whose Dirichlet entries carry the
/// data; `seed` optionally overrides the default constant-mean start on the
/// unknowns. Steep data can defeat plain Newton, in which case the data is
/// ramped up from its mean with warm starts.
fn solve_with_ramp(
    grid: &ChartGrid,
    active: &ActiveSet,
    boundary: &[f64],
    seed: Option<&[f64]>,
    h_curv: f64,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut mean = 0.0;
    let mut count = 0usize;
    for f in 0..grid.len() {
        if grid.is_dirichlet(&grid.unflat(f)) {
            mean += boundary[f];
            count += 1;
        }
    }
    mean /= count.max(1) as f64;
    let mut values = boundary.to_vec();
    for &f in &active.unknowns {
        values[f] = seed.map_or(mean, |s| s[f]);
    }
    let ladder = h_ladder(h_curv, cfg.continuation_step);
    match newton_solve_on(grid, active, &mut values, &ladder, &cfg.newton) {
        Ok(history) => Ok((values, history)),
        Err(Error::Solver(_)) => {
            let mut values2 = boundary.to_vec();
            for &f in &active.unknowns {
                values2[f] = mean;
            }
            let mut hist = Vec::new();
            for k in 1..=8 {
                let theta = k as f64 / 8.0;
                for f in 0..grid.len() {
                    if grid.is_dirichlet(&grid.unflat(f)) {
                        values2[f] = mean + theta * (boundary[f] - mean);
                    }
                }
                let stage_ladder: &[f64] = if k == 8 { &ladder } else { &ladder[..1] };
                hist.extend(newton_solve_on(
                    grid,
                    active,
                    &mut values2,
                    stage_ladder,
                    &cfg.newton,
                )?);
            }
            Ok((values2, hist))
        }
        Err(e) => Err(e),
    }
}

/// Solves the bounded Dirichlet problem on `grid`: `boundary` is a
/// full-length node vector whose Dirichlet entries carry the data.
pub fn dirichlet_solve(
    grid: &ChartGrid,
    h_curv: f64,
    boundary: &[f64],
    cfg: &SolverConfig,
) -> Result<Solution> {
    check_h(h_curv)?;
    if boundary.len() != grid.len() {
        return Err(Error::GridMismatch(
            "boundary vector length != grid size".into(),
        ));
    }
    if boundary.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("non-finite boundary data".into()));
    }
    let active = ActiveSet::full_interior(grid);
    let (values, history) = solve_with_ramp(grid, &active, boundary, None, h_curv, cfg)?;
    let u = GraphFunction::new(grid.clone(), values)?;
    let res = residual_masked(&u, h_curv, &active)?;
    let gradient_sup = gradient_monitor(&u, default_margin(grid)).sup;
    Ok(Solution {
        u,
        h_curv,
        phi: None,
        diagnostics: Diagnostics {
            residual_max: res.max_norm,
            residual_l2: res.l2_norm,
            newton_history: history,
            gradient_sup,
            sandwich_lower: None,
            sandwich_upper: None,
            truncation_sensitivity: None,
            shift: 0.0,
        },
    })
}

/// Default interior margin for the gradient monitor: a fixed fraction of the
/// domain size, at least a few cells.
pub fn default_margin(grid: &ChartGrid) -> f64 {
    let max_h = grid.axes.iter().fold(0.0f64, |m, a| m.max(a.h));
    let span = grid
        .axes
        .iter()
        .filter(|a| !a.periodic)
        .map(|a| (a.count - 1) as f64 * a.h)
        .fold(f64::INFINITY, f64::min);
    (0.1 * span).max(3.0 * max_h)
}

/// An asymptotic Plateau problem instance.
#[derive(Debug, Clone)]
pub struct AsymptoticProblem {
    pub phi: BoundaryGraph,
    pub h_curv: f64,
}

fn build_grid(case: ChartCase, tr: &TruncationConfig) -> Result<ChartGrid> {
    match case {
        ChartCase::Parabolic { n } => {
            let l = tr.transverse_extent;
            let count = (2.0 * l / tr.h).round() as usize + 1;
            let z_count = ((tr.z_hi - tr.eps) / tr.h).round() as usize + 1;
            let transverse = vec![(-l, l, count); n - 1];
            ChartGrid::parabolic_box(n, &transverse, tr.eps, tr.z_hi, z_count)
        }
        ChartCase::Hyperbolic { n } => {
            if n != 2 {
                return Err(Error::Domain(
                    "the hyperbolic disk grid is implemented for n = 2".into(),
                ));
            }
            let alpha_count = {
                let c = (std::f64::consts::TAU / tr.h).round() as usize;
                (c + c % 2).max(16)
            };
            let r_count = ((1.0 - tr.eps) / tr.h).round().max(5.0) as usize;
            ChartGrid::polar_disk(alpha_count, r_count, tr.eps)
        }
    }
}

/// Fills Dirichlet data for the normalized problem (`inf phi = 0`): the ideal
/// edge carries `phi - shift`; artificial edges follow the policy. Corners
/// adjacent to the ideal edge take the ideal datum.
fn fill_boundary(
    grid: &ChartGrid,
    phi: &BoundaryGraph,
    shift: f64,
    h_curv: f64,
    policy: ArtificialBc,
    sup_shifted: f64,
) -> Vec<f64> {
    let slope = h_curv / (1.0 - h_curv * h_curv).sqrt();
    let mut bc = vec![0.0; grid.len()];
    for f in 0..grid.len() {
        let idx = grid.unflat(f);
        if !grid.is_dirichlet(&idx) {
            continue;
        }
        let labels = grid.edge_labels(&idx);
        let c = grid.coords(&idx);
        let datum = if labels.contains(&EdgeLabel::Ideal) {
            match grid.case {
                ChartCase::Parabolic { .. } => phi.eval(&c[..c.len() - 1]) - shift,
                ChartCase::Hyperbolic { .. } => phi.eval(&[c[0]]) - shift,
            }
        } else {
            match policy {
                ArtificialBc::BarrierBlend => {
                    let z_ax = &grid.axes[grid.dim() - 1];
                    let (eps, z_hi) = (z_ax.coord(0), z_ax.coord(z_ax.count - 1));
                    let z = c[c.len() - 1];
                    let top = slope * z_hi + sup_shifted / 2.0;
                    if z >= z_hi {
                        top
                    } else {
                        // Side edge: continuous ramp from the ideal corner
                        // datum to the top-edge barrier midpoint.
                        let corner = phi.eval(&c[..c.len() - 1]) - shift;
                        let w = (z - eps) / (z_hi - eps);
                        (1.0 - w) * corner + w * top
                    }
                }
                ArtificialBc::ConstantExtension => phi.eval(&c[..c.len() - 1]) - shift,
            }
        };
        bc[f] = datum;
    }
    bc
}

fn barrier_for(case: ChartCase, sup_shifted: f64, h_curv: f64) -> Result<SheetGraph> {
    let envelope = match case {
        ChartCase::Parabolic { .. } => BarrierEnvelope::Slab {
            sup_phi: sup_shifted,
        },
        ChartCase::Hyperbolic { .. } => BarrierEnvelope::EnclosingSphere {
            radius: sup_shifted.exp(),
        },
    };
    supersolution_barrier(case, &envelope, h_curv)
}

/// Solves the truncated asymptotic problem with a chosen Newton seed.
pub fn asymptotic_solve_seeded(
    problem: &AsymptoticProblem,
    cfg: &SolverConfig,
    seed: SeedChoice,
) -> Result<Solution> {
    check_h(problem.h_curv)?;
    let report = validate_boundary(&problem.phi)?;
    let shift = report.inf;
    let sup_shifted = report.sup - shift;
    let case = problem.phi.case;
    let grid = build_grid(case, &cfg.truncation)?;
    let mut values = fill_boundary(
        &grid,
        &problem.phi,
        shift,
        problem.h_curv,
        cfg.artificial_bc,
        sup_shifted,
    );
    let active = ActiveSet::full_interior(&grid);
    let barrier = barrier_for(case, sup_shifted, problem.h_curv)?;
    let bc = values.clone();
    let seed_values: Option<Vec<f64>> = match seed {
        SeedChoice::ConstantInf => Some(vec![0.0; grid.len()]),
        SeedChoice::Barrier => {
            let mut s = vec![0.0; grid.len()];
            for &f in &active.unknowns {
                let cart = grid.to_cartesian(&grid.coords(&grid.unflat(f)));
                s[f] = barrier.eval(&cart).ok_or_else(|| {
                    Error::Numerics("barrier undefined at a grid node".into())
                })?;
            }
            Some(s)
        }
    };
    let (solved, history) = solve_with_ramp(
        &grid,
        &active,
        &bc,
        seed_values.as_deref(),
        problem.h_curv,
        cfg,
    )?;
    values = solved;

    // Monitors in the normalized scale.
    let u_norm = GraphFunction::new(grid.clone(), values.clone())?;
    let (mut lower, mut upper) = (None, None);
    if problem.h_curv >= 0.0 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::INFINITY;
        for f in 0..grid.len() {
            let cart = grid.to_cartesian(&grid.coords(&grid.unflat(f)));
            lo = lo.min(values[f]);
            if let Some(w) = barrier.eval(&cart) {
                hi = hi.min(w - values[f]);
            }
        }
        lower = Some(lo);
        upper = Some(hi);
    }
    let gradient_sup = gradient_monitor(&u_norm, default_margin(&grid)).sup;

    // Undo the normalization shift. Residual norms are recomputed on the
    // shifted-back values so the reported figures match any later
    // recomputation exactly.
    let u = GraphFunction::new(grid, values.iter().map(|v| v + shift).collect())?;
    let res = residual_masked(&u, problem.h_curv, &active)?;
    Ok(Solution {
        u,
        h_curv: problem.h_curv,
        phi: Some(problem.phi.clone()),
        diagnostics: Diagnostics {
            residual_max: res.max_norm,
            residual_l2: res.l2_norm,
            newton_history: history,
            gradient_sup,
            sandwich_lower: lower,
            sandwich_upper: upper,
            truncation_sensitivity: None,
            shift,
        },
    })
}

/// Solves the truncated asymptotic problem; optionally re-solves on an
/// enlarged domain and reports the interior change.
pub fn asymptotic_solve(problem: &AsymptoticProblem, cfg: &SolverConfig) -> Result<Solution> {
    let mut sol = asymptotic_solve_seeded(problem, cfg, SeedChoice::ConstantInf)?;
    if cfg.sensitivity_check {
        let mut big = cfg.clone();
        big.sensitivity_check = false;
        match problem.phi.case {
            ChartCase::Parabolic { .. } => {
                big.truncation.transverse_extent *= 2.0;
                big.truncation.z_hi *= 2.0;
            }
            ChartCase::Hyperbolic { .. } => {
                big.truncation.eps /= 2.0;
            }
        }
        let wide = asymptotic_solve_seeded(problem, &big, SeedChoice::ConstantInf)?;
        sol.diagnostics.truncation_sensitivity =
            Some(max_change_on_shared_nodes(&sol.u, &wide.u));
    }
    Ok(sol)
}

/// Max |difference| over nodes of `small` that coincide with nodes of `big`
/// (coordinates matched to a tolerance).
pub fn max_change_on_shared_nodes(small: &GraphFunction, big: &GraphFunction) -> f64 {
    let tol = 1e-9;
    let mut worst = 0.0f64;
    // Match per axis by offset arithmetic; grids share spacing by
    // construction, so positions align exactly where they overlap.
    for f in 0..small.grid.len() {
        let c = small.grid.coords(&small.grid.unflat(f));
        let mut idx_big = Vec::with_capacity(c.len());
        let mut ok = true;
        for (a, ax) in big.grid.axes.iter().enumerate() {
            let pos = (c[a] - ax.origin) / ax.h;
            let i = pos.round();
            if (pos - i).abs() > tol || i < 0.0 || i as usize >= ax.count {
                ok = false;
                break;
            }
            idx_big.push(i as usize);
        }
        if ok {
            worst = worst.max((small.values[f] - big.value(&idx_big)).abs());
        }
    }
    worst
}

/// Pointwise ordering report between two solutions on the same grid.
#[derive(Debug, Clone)]
pub struct OrderingReport {
    /// `min(u2 - u1)` over all nodes.
    pub min_diff: f64,
    /// Flat indices where `u2 - u1 < -tol` (tol = 1e-8).
    pub violations: Vec<usize>,
}

pub fn compare_solutions(u1: &GraphFunction, u2: &GraphFunction) -> Result<OrderingReport> {
    if u1.grid != u2.grid {
        return Err(Error::GridMismatch(
            "compare_solutions needs a shared grid".into(),
        ));
    }
    let mut min_diff = f64::INFINITY;
    let mut violations = Vec::new();
    for (f, (a, b)) in u1.values.iter().zip(&u2.values).enumerate() {
        let d = b - a;
        min_diff = min_diff.min(d);
        if d < -1e-8 {
            violations.push(f);
        }
    }
    Ok(OrderingReport {
        min_diff,
        violations,
    })
}

/// Gradient monitor output.
#[derive(Debug, Clone)]
pub struct GradientReport {
    /// Sup of `|grad u|_g` over nodes at least `margin` from the Dirichlet
    /// boundary (in chart coordinate distance).
    pub sup: f64,
    /// `(shell inner margin, sup over shell)` profile.
    pub shells: Vec<(f64, f64)>,
}

/// Sup of the chart-metric gradient norm away from the boundary, with a
/// per-shell profile. The norm is `sqrt(w^2 - gamma)` from centered
/// differences.
pub fn gradient_monitor(u: &GraphFunction, margin: f64) -> GradientReport {
    let grid = &u.grid;
    let mut sup = 0.0f64;
    let mut shells: Vec<(f64, f64)> = Vec::new();
    let n_shells = 4;
    for f in grid.interior_nodes() {
        let idx = grid.unflat(f);
        let d = grid.dirichlet_margin(&idx);
        if d < margin {
            continue;
        }
        let w = match crate::operator::flux_w(u, &idx) {
            Ok(w) => w,
            Err(_) => continue,
        };
        let gamma = grid.metric_at(&grid.coords(&idx)).gamma;
        let g = (w * w - gamma).max(0.0).sqrt();
        sup = sup.max(g);
        let shell = (((d / margin).floor() as usize).saturating_sub(1)).min(n_shells - 1);
        if shells.len() <= shell {
            shells.resize(shell + 1, (0.0, 0.0));
        }
        shells[shell] = ((shell + 1) as f64 * margin, shells[shell].1.max(g));
    }
    GradientReport { sup, shells }
}
