//! Constructive sub/supersolution machinery: hemisphere lifts, CMC-cap
//! descents, boundary-attainment certificates at ideal probes, and local
//! solution lifts on geodesic balls.
//!
//! A subsolution is a base function patched from below by totally geodesic
//! hemisphere sheets over clear spheres of the boundary curve; a
//! supersolution is the global barrier patched from above by CMC-cap sheets.
//! Patched evaluation takes the max (sub) or min (super) of base and patch
//! values, which keeps the objects in the right semicontinuity class and
//! makes every lift monotone by construction. Sphere parameters are stored
//! exactly; evaluation is lazy and closed form.
//!
//! The hemisphere lift is a subsolution of the CMC-`H` problem only for
//! `H >= 0`; certificate ladders therefore require a nonnegative `H` (the
//! mirrored problem covers negative values).

use crate::boundary::{clear_sphere_radius, BoundaryGraph, GammaSide, IdealSphere};
use crate::error::{Error, Result};
use crate::geometry::{hyperbolic_distance, ChartCase};
use crate::grid::GraphFunction;
use crate::mesh::{numeric_mean_curvature, EmbeddedMesh};
use crate::operator::{residual_masked, ActiveSet};
use crate::solver::NewtonConfig;
use crate::surfaces::{
    cmc_cap_for_boundary_sphere, supersolution_barrier, surface_sheet, BarrierEnvelope, CapSide,
    ModelSurface, Sheet, SheetGraph, SurfaceKind,
};

/// Base function of a piecewise barrier.
#[derive(Debug, Clone)]
pub enum BarrierBase {
    Constant(f64),
    Sheet(SheetGraph),
}

#[derive(Debug, Clone)]
struct Piecewise {
    case: ChartCase,
    base: BarrierBase,
    patches: Vec<SheetGraph>,
    /// Max-fold for subsolutions, min-fold for supersolutions.
    take_max: bool,
}

impl Piecewise {
    fn eval(&self, cart: &[f64]) -> Option<f64> {
        let mut v = match &self.base {
            BarrierBase::Constant(c) => Some(*c),
            BarrierBase::Sheet(s) => s.eval(cart),
        }?;
        for p in &self.patches {
            if let Some(pv) = p.eval(cart) {
                v = if self.take_max { v.max(pv) } else { v.min(pv) };
            }
        }
        Some(v)
    }

    fn eval_ideal(&self, y: &[f64]) -> Option<f64> {
        let mut v = match &self.base {
            BarrierBase::Constant(c) => Some(*c),
            BarrierBase::Sheet(s) => s.ideal_trace(y),
        }?;
        for p in &self.patches {
            if let Some(pv) = p.ideal_trace(y) {
                v = if self.take_max { v.max(pv) } else { v.min(pv) };
            }
        }
        Some(v)
    }
}

/// Lower-semicontinuous subsolution: base plus hemisphere patches from below.
#[derive(Debug, Clone)]
pub struct Subsolution(Piecewise);

/// Upper-semicontinuous supersolution: barrier plus cap patches from above.
#[derive(Debug, Clone)]
pub struct Supersolution(Piecewise);

impl Subsolution {
    pub fn constant(case: ChartCase, c: f64) -> Self {
        Self(Piecewise {
            case,
            base: BarrierBase::Constant(c),
            patches: Vec::new(),
            take_max: true,
        })
    }

    pub fn eval(&self, cart: &[f64]) -> Option<f64> {
        self.0.eval(cart)
    }

    pub fn eval_ideal(&self, y: &[f64]) -> Option<f64> {
        self.0.eval_ideal(y)
    }

    pub fn patch_count(&self) -> usize {
        self.0.patches.len()
    }
}

impl Supersolution {
    pub fn from_sheet(case: ChartCase, sheet: SheetGraph) -> Self {
        Self(Piecewise {
            case,
            base: BarrierBase::Sheet(sheet),
            patches: Vec::new(),
            take_max: false,
        })
    }

    pub fn constant(case: ChartCase, c: f64) -> Self {
        Self(Piecewise {
            case,
            base: BarrierBase::Constant(c),
            patches: Vec::new(),
            take_max: false,
        })
    }

    pub fn eval(&self, cart: &[f64]) -> Option<f64> {
        self.0.eval(cart)
    }

    pub fn eval_ideal(&self, y: &[f64]) -> Option<f64> {
        self.0.eval_ideal(y)
    }

    pub fn patch_count(&self) -> usize {
        self.0.patches.len()
    }
}

/// Outcome of one lift/descent step.
#[derive(Debug, Clone)]
pub enum LiftStep<T> {
    Advanced { next: T, sphere: IdealSphere },
    /// The flowed probe has reached the boundary curve.
    Converged,
}

/// Ideal-plane coordinates of the probe flowed by `t`.
fn flowed_probe(case: ChartCase, probe: &[f64], t: f64) -> Vec<f64> {
    match case {
        ChartCase::Parabolic { .. } => {
            let mut c = Vec::with_capacity(probe.len() + 1);
            c.push(t);
            c.extend_from_slice(probe);
            c
        }
        ChartCase::Hyperbolic { .. } => {
            let r = t.exp();
            vec![r * probe[0].cos(), r * probe[0].sin()]
        }
    }
}

fn is_terminal(err: &Error) -> bool {
    matches!(err, Error::Numerics(m) if m.contains("zero radius"))
        || matches!(err, Error::Domain(m) if m.contains("requested side"))
}

/// One minimal lift: patch the subsolution with the flow-facing sheet of the
/// totally geodesic hemisphere over the clear sphere at the flowed probe.
pub fn sub_lift(
    sigma: &Subsolution,
    probe: &[f64],
    phi: &BoundaryGraph,
) -> Result<LiftStep<Subsolution>> {
    let case = sigma.0.case;
    let s = sigma
        .eval_ideal(probe)
        .ok_or_else(|| Error::Domain("subsolution undefined at the probe".into()))?;
    let center = flowed_probe(case, probe, s);
    let sphere = match clear_sphere_radius(phi, &center, GammaSide::ContainsM) {
        Ok(sp) => sp,
        Err(e) if is_terminal(&e) => return Ok(LiftStep::Converged),
        Err(e) => return Err(e),
    };
    let hemi = ModelSurface::new(SurfaceKind::Hemisphere {
        center: sphere.center.clone(),
        radius: sphere.radius,
    })?;
    let mut next = sigma.clone();
    next.0
        .patches
        .push(surface_sheet(&hemi, case, Sheet::FlowFacing));
    Ok(LiftStep::Advanced { next, sphere })
}

/// One `H`-descent: patch the supersolution with the chart-facing sheet of
/// the CMC-`H` cap over the clear sphere beyond the boundary curve.
pub fn super_descent(
    w: &Supersolution,
    probe: &[f64],
    phi: &BoundaryGraph,
    h_curv: f64,
) -> Result<LiftStep<Supersolution>> {
    if h_curv.abs() >= 1.0 {
        return Err(Error::Domain(format!("|H| = {} >= 1", h_curv.abs())));
    }
    let case = w.0.case;
    let t = w
        .eval_ideal(probe)
        .ok_or_else(|| Error::Domain("supersolution undefined at the probe".into()))?;
    let center = flowed_probe(case, probe, t);
    let sphere = match clear_sphere_radius(phi, &center, GammaSide::OppositeM) {
        Ok(sp) => sp,
        Err(e) if is_terminal(&e) => return Ok(LiftStep::Converged),
        Err(e) => return Err(e),
    };
    let cap = cmc_cap_for_boundary_sphere(&sphere, h_curv, CapSide::AwayFromDisk)?;
    let mut next = w.clone();
    next.0
        .patches
        .push(surface_sheet(&cap, case, Sheet::FlowOpposing));
    Ok(LiftStep::Advanced { next, sphere })
}

/// Probe-point certificate: the sub/super ladders evaluated at the probe.
#[derive(Debug, Clone)]
pub struct BarrierCertificate {
    pub probe: Vec<f64>,
    /// `sigma_k(probe)` for `k = 0, 1, ...` (nondecreasing).
    pub sigma: Vec<f64>,
    /// `w_k(probe)` for `k = 0, 1, ...` (nonincreasing).
    pub w: Vec<f64>,
    /// `phi(probe)`.
    pub target: f64,
    pub sub_converged: bool,
    pub sup_converged: bool,
}

impl BarrierCertificate {
    pub fn final_gap(&self) -> f64 {
        self.w.last().unwrap() - self.sigma.last().unwrap()
    }
}

/// A certificate together with the final barrier objects, for grid checks.
#[derive(Debug, Clone)]
pub struct BarrierLadder {
    pub certificate: BarrierCertificate,
    pub sub: Subsolution,
    pub sup: Supersolution,
}

/// Runs the lift and descent ladders at one ideal probe.
///
/// Requires `0 <= H < 1`: the hemisphere lifts are subsolutions of the
/// CMC-`H` problem only for nonnegative `H`.
pub fn barrier_sequence(
    probe: &[f64],
    phi: &BoundaryGraph,
    h_curv: f64,
    k_max: usize,
) -> Result<BarrierLadder> {
    if !(0.0..1.0).contains(&h_curv) {
        return Err(Error::Domain(format!(
            "certificate ladders need 0 <= H < 1, got {h_curv}"
        )));
    }
    let case = phi.case;
    let (inf_phi, sup_phi) = phi.bounds();
    // sigma_0 = 0 whenever the slab normalization allows it; sign-changing
    // hyperbolic data starts from the constant inf phi instead.
    let sigma0 = if inf_phi >= 0.0 { 0.0 } else { inf_phi };
    let envelope = match case {
        ChartCase::Parabolic { .. } => BarrierEnvelope::Slab { sup_phi },
        ChartCase::Hyperbolic { .. } => BarrierEnvelope::EnclosingSphere {
            radius: sup_phi.exp(),
        },
    };
    let mut sub = Subsolution::constant(case, sigma0);
    let mut sup = Supersolution::from_sheet(case, supersolution_barrier(case, &envelope, h_curv)?);

    let target = phi.eval(probe);
    let mut sigma_vals = vec![sub.eval_ideal(probe).unwrap()];
    let mut w_vals = vec![sup
        .eval_ideal(probe)
        .ok_or_else(|| Error::Numerics("barrier trace undefined at probe".into()))?];
    let mut sub_converged = false;
    let mut sup_converged = false;
    for _ in 0..k_max {
        let gap_before = w_vals.last().unwrap() - sigma_vals.last().unwrap();
        if !sub_converged {
            match sub_lift(&sub, probe, phi)? {
                LiftStep::Advanced { next, .. } => {
                    sub = next;
                    sigma_vals.push(sub.eval_ideal(probe).unwrap());
                }
                LiftStep::Converged => sub_converged = true,
            }
        }
        if !sup_converged {
            match super_descent(&sup, probe, phi, h_curv)? {
                LiftStep::Advanced { next, .. } => {
                    sup = next;
                    w_vals.push(sup.eval_ideal(probe).unwrap());
                }
                LiftStep::Converged => sup_converged = true,
            }
        }
        if sub_converged && sup_converged {
            break;
        }
        let gap_after = w_vals.last().unwrap() - sigma_vals.last().unwrap();
        if gap_before - gap_after < 1e-10 && !(sub_converged || sup_converged) {
            // Stagnation cutoff; recorded, not fatal.
            break;
        }
    }
    Ok(BarrierLadder {
        certificate: BarrierCertificate {
            probe: probe.to_vec(),
            sigma: sigma_vals,
            w: w_vals,
            target,
            sub_converged,
            sup_converged,
        },
        sub,
        sup,
    })
}

/// Sandwich margins of a grid function between a sub- and supersolution.
#[derive(Debug, Clone)]
pub struct SandwichReport {
    /// `min(u - sigma)` over nodes where the subsolution is defined.
    pub min_above_sub: f64,
    /// `min(w - u)` over nodes where the supersolution is defined.
    pub min_below_sup: f64,
    /// Nodes violating either side beyond 1e-8.
    pub violations: usize,
}

pub fn sandwich_check(
    sub: &Subsolution,
    sup: &Supersolution,
    u: &GraphFunction,
) -> SandwichReport {
    let grid = &u.grid;
    let mut above = f64::INFINITY;
    let mut below = f64::INFINITY;
    let mut violations = 0;
    for f in 0..grid.len() {
        let cart = grid.to_cartesian(&grid.coords(&grid.unflat(f)));
        let v = u.values[f];
        if let Some(s) = sub.eval(&cart) {
            above = above.min(v - s);
            if v - s < -1e-8 {
                violations += 1;
            }
        }
        if let Some(w) = sup.eval(&cart) {
            below = below.min(w - v);
            if w - v < -1e-8 {
                violations += 1;
            }
        }
    }
    SandwichReport {
        min_above_sub: above,
        min_below_sup: below,
        violations,
    }
}

/// Geodesic ball in the chart hypersurface (center in Cartesian chart
/// coordinates, radius in the hyperbolic metric).
#[derive(Debug, Clone)]
pub struct GeodesicBallSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Inf of the mean curvature of the Killing cylinder over the geodesic
/// circle of radius `r` (inner orientation), measured by the mesh oracle on
/// a flowed band.
pub fn cylinder_curvature(case: ChartCase, center: &[f64], r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::Domain("ball radius must be > 0".into()));
    }
    let field = case.field();
    let x_c = case.embed(center)?;
    let amb = crate::geometry::ambient_metric(&x_c)?;
    // Hyperbolically orthonormal tangent basis of the chart hypersurface.
    let dim = x_c.ambient_dim();
    let cols: Vec<Vec<f64>> = match case {
        ChartCase::Parabolic { .. } => (1..dim)
            .map(|i| {
                let mut v = vec![0.0; dim];
                v[i] = 1.0;
                v
            })
            .collect(),
        ChartCase::Hyperbolic { .. } => {
            let s = x_c.coords()[dim - 1];
            (0..dim - 1)
                .map(|i| {
                    let mut v = vec![0.0; dim];
                    v[i] = 1.0;
                    v[dim - 1] = -center[i] / s;
                    v
                })
                .collect()
        }
    };
    let ip = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(k, (x, y))| amb.g[k][k] * x * y)
            .sum()
    };
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut v in cols {
        for b in &basis {
            let c = ip(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
        let n = ip(&v, &v).sqrt();
        for vi in v.iter_mut() {
            *vi /= n;
        }
        basis.push(v);
    }
    if basis.len() != 2 {
        return Err(Error::Domain(
            "cylinder curvature is implemented for n = 2".into(),
        ));
    }

    // Sample the geodesic circle exactly, then flow a thin band.
    let k_samples = 128usize;
    let mut circle = Vec::with_capacity(k_samples);
    for k in 0..k_samples {
        let a = std::f64::consts::TAU * k as f64 / k_samples as f64;
        let dir: Vec<f64> = (0..dim)
            .map(|i| a.cos() * basis[0][i] + a.sin() * basis[1][i])
            .collect();
        circle.push(crate::geometry::geodesic_point(&x_c, &dir, r)?);
    }
    let spacing = {
        let a = circle[0].coords();
        let b = circle[1].coords();
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let rows = 7usize;
    let mut vertices = Vec::with_capacity(rows * k_samples);
    let mut normals = Vec::with_capacity(rows * k_samples);
    for j in 0..rows {
        let t = (j as f64 - (rows as f64 - 1.0) / 2.0) * spacing;
        let axis_pt = field.flow(t, &x_c)?;
        for p in &circle {
            let q = field.flow(t, p)?;
            let qc = q.coords();
            let ac = axis_pt.coords();
            let mut inner = [ac[0] - qc[0], ac[1] - qc[1], ac[2] - qc[2]];
            let nn = (inner[0] * inner[0] + inner[1] * inner[1] + inner[2] * inner[2]).sqrt();
            inner = [inner[0] / nn, inner[1] / nn, inner[2] / nn];
            vertices.push([qc[0], qc[1], qc[2]]);
            normals.push(inner);
        }
    }
    let mesh = EmbeddedMesh {
        dims: [rows, k_samples],
        periodic: [false, true],
        vertices,
        normals,
    };
    let vals = numeric_mean_curvature(&mesh);
    let mid = rows / 2;
    let mut inf = f64::INFINITY;
    for k in 0..k_samples {
        if let Some(v) = vals[mid * k_samples + k] {
            inf = inf.min(v);
        }
    }
    if !inf.is_finite() {
        return Err(Error::Numerics(
            "cylinder curvature estimation failed on every sample".into(),
        ));
    }
    Ok(inf)
}

/// Checks the ball hypotheses: the cylinder curvature must dominate both
/// `|H|` and `sqrt((n-1)/n)`. Returns the computed inf.
pub fn check_ball(case: ChartCase, ball: &GeodesicBallSpec, h_curv: f64) -> Result<f64> {
    let n = case.n() as f64;
    let needed = h_curv.abs().max(((n - 1.0) / n).sqrt());
    let inf = cylinder_curvature(case, &ball.center, ball.radius)?;
    if inf < needed {
        return Err(Error::Validation(format!(
            "ball radius {} too large: cylinder curvature {inf:.4} < required {needed:.4}",
            ball.radius
        )));
    }
    Ok(inf)
}

/// Largest radius (within a factor of ~2) whose cylinder curvature exceeds
/// the requirement with a 10% margin.
pub fn suggest_ball_radius(case: ChartCase, center: &[f64], h_curv: f64) -> Result<f64> {
    let n = case.n() as f64;
    let needed = 1.1 * h_curv.abs().max(((n - 1.0) / n).sqrt());
    let mut r = 1.0;
    for _ in 0..20 {
        if cylinder_curvature(case, center, r)? >= needed {
            return Ok(r);
        }
        r /= 2.0;
    }
    Err(Error::Numerics(
        "no admissible ball radius found".into(),
    ))
}

/// Result of a ball lift.
#[derive(Debug, Clone)]
pub struct BallLift {
    pub u: GraphFunction,
    /// `min(lifted - input)` over the ball nodes; nonnegative (to 1e-8) when
    /// the input is a subsolution.
    pub min_increase: f64,
    /// Computed cylinder curvature of the ball boundary.
    pub cylinder_h: f64,
}

/// Replaces `v` inside the geodesic ball by the CMC-`H` solution with
/// boundary data `v`, leaving it untouched outside. Grid-node membership is
/// exact (ambient hyperbolic distance); the ball closure must avoid the
/// Dirichlet edges.
pub fn ball_lift(
    v: &GraphFunction,
    ball: &GeodesicBallSpec,
    h_curv: f64,
    newton: &NewtonConfig,
) -> Result<BallLift> {
    if h_curv.abs() >= 1.0 {
        return Err(Error::Domain(format!("|H| = {} >= 1", h_curv.abs())));
    }
    let grid = &v.grid;
    let case = grid.case;
    let cylinder_h = check_ball(case, ball, h_curv)?;
    let x_c = case.embed(&ball.center)?;
    let mut mask = vec![false; grid.len()];
    let mut any = false;
    for f in 0..grid.len() {
        let cart = grid.to_cartesian(&grid.coords(&grid.unflat(f)));
        let x = case.embed(&cart)?;
        if hyperbolic_distance(&x, &x_c)? < ball.radius {
            if grid.is_dirichlet(&grid.unflat(f)) {
                return Err(Error::Domain(
                    "ball is not compactly contained in the grid interior".into(),
                ));
            }
            mask[f] = true;
            any = true;
        }
    }
    if !any {
        return Err(Error::Domain("ball contains no grid nodes".into()));
    }
    let active = ActiveSet::from_flags(grid, |f| mask[f]);
    let mut values = v.values.clone();
    // Newton from the input values; walk H up from zero for robustness.
    let ladder: Vec<f64> = if h_curv == 0.0 {
        vec![0.0]
    } else {
        vec![0.0, h_curv]
    };
    crate::solver::newton_solve_on(grid, &active, &mut values, &ladder, newton)?;
    let mut min_increase = f64::INFINITY;
    for &f in &active.unknowns {
        min_increase = min_increase.min(values[f] - v.values[f]);
    }
    let u = GraphFunction::new(grid.clone(), values)?;
    // Sanity: the lifted region solves the equation.
    let res = residual_masked(&u, h_curv, &active)?;
    if res.max_norm > newton.abs_tol * 10.0 {
        return Err(Error::Solver(format!(
            "ball lift residual {:.3e} above tolerance",
            res.max_norm
        )));
    }
    Ok(BallLift {
        u,
        min_increase,
        cylinder_h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::PhiPreset;
    use crate::grid::ChartGrid;
    use approx::assert_relative_eq;

    const PAR: ChartCase = ChartCase::Parabolic { n: 2 };

    fn flat_phi() -> BoundaryGraph {
        BoundaryGraph::from_preset(PAR, PhiPreset::Constant { a: 1.0 }).unwrap()
    }

    #[test]
    fn sub_lift_flat_data_attains_target_in_one_step() {
        let phi = flat_phi();
        let probe = [0.3];
        let sigma0 = Subsolution::constant(PAR, 0.0);
        let LiftStep::Advanced { next, sphere } = sub_lift(&sigma0, &probe, &phi).unwrap() else {
            panic!("expected a lift");
        };
        assert_relative_eq!(sphere.radius, 1.0, epsilon = 1e-9);
        // Near-boundary node value: hemisphere over (0, 0.3) radius 1.
        assert_relative_eq!(next.eval(&[0.3, 0.6]).unwrap(), 0.8, epsilon = 1e-9);
        // Boundary limit reaches phi = 1 after one lift.
        assert_relative_eq!(next.eval_ideal(&probe).unwrap(), 1.0, epsilon = 1e-9);
        // Monotone, strictly above the base inside the patch disk.
        assert!(next.eval(&[0.3, 0.6]).unwrap() > 0.0);
        // A second lift is terminal.
        assert!(matches!(
            sub_lift(&next, &probe, &phi).unwrap(),
            LiftStep::Converged
        ));
    }

    #[test]
    fn super_descent_from_planes() {
        let phi = flat_phi();
        let probe = [0.3];
        // The tight barrier is already touching: descent is stationary.
        let w0 = Supersolution::from_sheet(
            PAR,
            supersolution_barrier(PAR, &BarrierEnvelope::Slab { sup_phi: 1.0 }, 0.0).unwrap(),
        );
        assert!(matches!(
            super_descent(&w0, &probe, &phi, 0.0).unwrap(),
            LiftStep::Converged
        ));

        // From a loose plane at 2 the first descent cuts a hemisphere sheet.
        let w0 = Supersolution::constant(PAR, 2.0);
        let LiftStep::Advanced { next, sphere } = super_descent(&w0, &probe, &phi, 0.0).unwrap()
        else {
            panic!("expected a descent");
        };
        assert_relative_eq!(sphere.radius, 1.0, epsilon = 1e-9);
        assert_relative_eq!(next.eval(&[0.3, 0.6]).unwrap(), 1.2, epsilon = 1e-9);
        assert_relative_eq!(next.eval_ideal(&probe).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn descent_cap_with_positive_h_stays_below() {
        let phi = flat_phi();
        let probe = [0.0];
        let w0 = Supersolution::constant(PAR, 2.0);
        let LiftStep::Advanced { next, .. } = super_descent(&w0, &probe, &phi, 0.5).unwrap()
        else {
            panic!("expected a descent");
        };
        // Strict decrease somewhere on the patch.
        let before = 2.0;
        let after = next.eval(&[0.0, 0.5]).unwrap();
        assert!(after < before, "descent did not decrease ({after})");
    }

    #[test]
    fn certificate_flat_data_closes_in_two_iterations() {
        let phi = flat_phi();
        for h in [0.0, 0.3, 0.6] {
            let ladder = barrier_sequence(&[0.4], &phi, h, 12).unwrap();
            let c = &ladder.certificate;
            assert!(c.sub_converged && c.sup_converged);
            assert!(c.sigma.len() <= 3, "sigma ladder {:?}", c.sigma);
            assert!(c.final_gap().abs() < 1e-9, "gap {}", c.final_gap());
            assert_relative_eq!(*c.sigma.last().unwrap(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn certificate_bump_data_monotone_and_sandwiched() {
        let phi = BoundaryGraph::from_preset(PAR, PhiPreset::Bump { a: 1.0, b: 0.5 }).unwrap();
        let ladder = barrier_sequence(&[0.2], &phi, 0.0, 10).unwrap();
        let c = &ladder.certificate;
        for w in c.sigma.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "sigma not monotone: {:?}", c.sigma);
        }
        for w in c.w.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "w not monotone: {:?}", c.w);
        }
        for (s, w) in c.sigma.iter().zip(&c.w) {
            assert!(*s <= c.target + 1e-12 && c.target <= *w + 1e-12);
        }
        // Gaps strictly decrease while the ladder advances.
        let gaps: Vec<f64> = c
            .sigma
            .iter()
            .zip(&c.w)
            .map(|(s, w)| w - s)
            .collect();
        for g in gaps.windows(2) {
            assert!(g[1] < g[0], "gaps not strictly decreasing: {gaps:?}");
        }
    }

    #[test]
    fn certificate_rejects_negative_h() {
        let phi = flat_phi();
        assert!(barrier_sequence(&[0.0], &phi, -0.2, 5).is_err());
    }

    #[test]
    fn cylinder_curvature_matches_closed_form() {
        // For the parabolic chart the Killing cylinder over a geodesic circle
        // is a Euclidean cylinder; inf H = e^{-r} / (2 sinh r).
        for r in [0.4, 0.8] {
            let inf = cylinder_curvature(PAR, &[0.0, 1.0], r).unwrap();
            let expect = (-r).exp() / (2.0 * r.sinh());
            assert!(
                (inf - expect).abs() < 0.02,
                "r = {r}: {inf} vs {expect}"
            );
        }
    }

    #[test]
    fn ball_radius_suggestion_satisfies_check() {
        let r = suggest_ball_radius(PAR, &[0.0, 1.0], 0.3).unwrap();
        let ball = GeodesicBallSpec {
            center: vec![0.0, 1.0],
            radius: r,
        };
        assert!(check_ball(PAR, &ball, 0.3).is_ok());
        let too_big = GeodesicBallSpec {
            center: vec![0.0, 1.0],
            radius: 4.0,
        };
        assert!(check_ball(PAR, &too_big, 0.3).is_err());
    }

    fn lift_grid() -> ChartGrid {
        ChartGrid::parabolic_box(2, &[(-1.0, 1.0, 33)], 0.5, 2.5, 33).unwrap()
    }

    #[test]
    fn ball_lift_fixes_constants() {
        let grid = lift_grid();
        let v = GraphFunction::constant(grid, 0.4);
        let ball = GeodesicBallSpec {
            center: vec![0.0, 1.2],
            radius: 0.35,
        };
        let lift = ball_lift(&v, &ball, 0.0, &NewtonConfig::default()).unwrap();
        for (a, b) in lift.u.values.iter().zip(&v.values) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(lift.min_increase.abs() < 1e-12);
    }

    #[test]
    fn ball_lift_raises_step_at_center() {
        let grid = lift_grid();
        // Lower-semicontinuous step across y = 0.
        let v = GraphFunction::from_fn(grid, |c| Some(if c[0] > 0.0 { 0.5 } else { 0.3 }))
            .unwrap();
        let ball = GeodesicBallSpec {
            center: vec![0.0, 1.2],
            radius: 0.35,
        };
        let lift = ball_lift(&v, &ball, 0.0, &NewtonConfig::default()).unwrap();
        // Outside the ball nothing changed.
        let case = PAR;
        let x_c = case.embed(&ball.center).unwrap();
        for f in 0..v.grid.len() {
            let cart = v.grid.to_cartesian(&v.grid.coords(&v.grid.unflat(f)));
            let x = case.embed(&cart).unwrap();
            if hyperbolic_distance(&x, &x_c).unwrap() >= ball.radius {
                assert_eq!(lift.u.values[f], v.values[f]);
            }
        }
        // Strictly above the lsc value at the ball center node.
        let center_idx = [16usize, 11usize];
        assert_relative_eq!(v.grid.coords(&center_idx)[0], 0.0);
        let lifted = lift.u.value(&center_idx);
        assert!(
            lifted > 0.3 + 1e-3,
            "expected strict increase at the jump, got {lifted}"
        );
    }

    #[test]
    fn ball_lift_is_idempotent() {
        let grid = lift_grid();
        let v = GraphFunction::from_fn(grid, |c| Some(0.1 * c[0] + 0.4)).unwrap();
        let ball = GeodesicBallSpec {
            center: vec![0.0, 1.2],
            radius: 0.35,
        };
        let once = ball_lift(&v, &ball, 0.2, &NewtonConfig::default()).unwrap();
        let twice = ball_lift(&once.u, &ball, 0.2, &NewtonConfig::default()).unwrap();
        let mut worst = 0.0f64;
        for (a, b) in once.u.values.iter().zip(&twice.u.values) {
            worst = worst.max((a - b).abs());
        }
        assert!(worst < 1e-10, "second lift moved by {worst}");
    }

    #[test]
    fn ball_lift_monotone_on_subsolution_input() {
        // Patched hemisphere subsolution sampled on the grid is a genuine
        // subsolution; the lift must sit above it.
        let phi = flat_phi();
        let sigma0 = Subsolution::constant(PAR, 0.0);
        let LiftStep::Advanced { next, .. } = sub_lift(&sigma0, &[0.0], &phi).unwrap() else {
            panic!()
        };
        let grid = lift_grid();
        let v = GraphFunction::from_fn(grid, |c| next.eval(c)).unwrap();
        let ball = GeodesicBallSpec {
            center: vec![0.2, 1.0],
            radius: 0.3,
        };
        let lift = ball_lift(&v, &ball, 0.0, &NewtonConfig::default()).unwrap();
        assert!(
            lift.min_increase >= -1e-8,
            "lift dipped below the subsolution by {}",
            lift.min_increase
        );
    }
}
