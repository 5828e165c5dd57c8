//! Ideal boundary data for the asymptotic problem.
//!
//! The boundary curve is always a Killing graph over the ideal boundary of the
//! chart hypersurface: in the parabolic case a function `phi(y)` with the
//! first ambient coordinate as graph value, in the hyperbolic case a
//! log-radial function `phi(theta)` on the unit sphere (the curve is
//! `e^{phi(theta)} theta` in the ideal plane). Non-graph data is rejected by
//! construction.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ChartCase;

/// Round sphere in the ideal boundary plane `{x_{n+1} = 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealSphere {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Closed-form boundary datum presets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiPreset {
    /// `phi = a`.
    Constant { a: f64 },
    /// `phi(y) = a + b exp(-|y|^2)`.
    Bump { a: f64, b: f64 },
    /// `phi(y) = a + b sin(y) / (1 + y^2)`.
    SinusoidalDecay { a: f64, b: f64 },
    /// `phi(y) = a + b (1 + tanh(y / width)) / 2`.
    StepMollified { a: f64, b: f64, width: f64 },
    /// `phi(y) = a + slope * y`; unbounded, kept to exercise rejection paths.
    Linear { a: f64, slope: f64 },
    /// `phi(theta) = a + b sin(freq * theta)` on the circle.
    Sinusoidal { a: f64, b: f64, freq: u32 },
}

impl PhiPreset {
    fn eval(&self, y: &[f64]) -> f64 {
        match *self {
            PhiPreset::Constant { a } => a,
            PhiPreset::Bump { a, b } => {
                let r2: f64 = y.iter().map(|c| c * c).sum();
                a + b * (-r2).exp()
            }
            PhiPreset::SinusoidalDecay { a, b } => a + b * y[0].sin() / (1.0 + y[0] * y[0]),
            PhiPreset::StepMollified { a, b, width } => {
                a + b * (1.0 + (y[0] / width).tanh()) / 2.0
            }
            PhiPreset::Linear { a, slope } => a + slope * y[0],
            PhiPreset::Sinusoidal { a, b, freq } => a + b * (freq as f64 * y[0]).sin(),
        }
    }

    fn bounds(&self) -> (f64, f64) {
        match *self {
            PhiPreset::Constant { a } => (a, a),
            PhiPreset::Bump { a, b } | PhiPreset::StepMollified { a, b, .. } => {
                (a.min(a + b), a.max(a + b))
            }
            PhiPreset::SinusoidalDecay { a, b } => {
                // Extremes of sin(y)/(1+y^2), located numerically once.
                let g = max_scan(|y| y.sin() / (1.0 + y * y), -4.0, 4.0, 40_000);
                (a - b.abs() * g, a + b.abs() * g)
            }
            PhiPreset::Linear { a, slope } => {
                if slope == 0.0 {
                    (a, a)
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                }
            }
            PhiPreset::Sinusoidal { a, b, .. } => (a - b.abs(), a + b.abs()),
        }
    }
}

fn max_scan(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for i in 0..=n {
        let y = lo + (hi - lo) * i as f64 / n as f64;
        m = m.max(f(y));
    }
    m
}

/// Representation of `phi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiRepr {
    Preset(PhiPreset),
    /// Piecewise-linear table over strictly increasing 1-D sites. Constant
    /// extension beyond the range (parabolic) or periodic wrap (hyperbolic).
    Table { sites: Vec<f64>, values: Vec<f64> },
}

/// Validated boundary datum: the curve `Gamma` as a Killing graph over the
/// ideal boundary of the chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGraph {
    pub case: ChartCase,
    pub repr: PhiRepr,
    bounds: (f64, f64),
}

/// Hypothesis report from [`validate_boundary`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub inf: f64,
    pub sup: f64,
    /// Max sampled difference quotient; a modulus-of-continuity estimate.
    pub modulus: f64,
}

/// Which component of the ideal plane minus `Gamma` a point is claimed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaSide {
    /// The component whose closure contains the ideal boundary of `M`.
    ContainsM,
    /// The other component.
    OppositeM,
}

impl BoundaryGraph {
    /// Builds and validates a boundary datum from a preset.
    pub fn from_preset(case: ChartCase, preset: PhiPreset) -> Result<Self> {
        let bounds = preset.bounds();
        let graph = Self {
            case,
            repr: PhiRepr::Preset(preset),
            bounds,
        };
        validate_boundary(&graph)?;
        Ok(graph)
    }

    /// Builds a piecewise-linear datum from a sample table.
    pub fn from_table(case: ChartCase, sites: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if case.n() != 2 {
            return Err(Error::Validation(
                "sampled tables are supported for n = 2 only".into(),
            ));
        }
        if sites.len() != values.len() || sites.len() < 2 {
            return Err(Error::Validation(
                "table needs >= 2 rows with matching site/value counts".into(),
            ));
        }
        if sites.iter().any(|s| !s.is_finite()) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite table entry".into()));
        }
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse(
                "table sites must be strictly increasing".into(),
            ));
        }
        if matches!(case, ChartCase::Hyperbolic { .. }) {
            let tau = std::f64::consts::TAU;
            if sites[0] < 0.0 || *sites.last().unwrap() >= tau {
                return Err(Error::Parse(
                    "hyperbolic table sites must lie in [0, 2*pi)".into(),
                ));
            }
        }
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let graph = Self {
            case,
            repr: PhiRepr::Table { sites, values },
            bounds: (lo, hi),
        };
        validate_boundary(&graph)?;
        Ok(graph)
    }

    /// Reads a sample table from a CSV file (header row required, columns
    /// `y_1, ..., y_{n-1}, phi`, strictly increasing sites).
    pub fn from_csv(case: ChartCase, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty table file".into()))?;
        if header
            .split(',')
            .next()
            .map(|c| c.trim().parse::<f64>().is_ok())
            .unwrap_or(false)
        {
            return Err(Error::Parse("missing header row".into()));
        }
        let mut sites = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(Error::Parse(format!(
                    "row {}: expected 2 columns, got {}",
                    i + 2,
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: bad number {s:?}", i + 2)))
            };
            sites.push(parse(cols[0])?);
            values.push(parse(cols[1])?);
        }
        Self::from_table(case, sites, values)
    }

    /// Evaluates `phi` at an ideal boundary chart point (`y` has length
    /// `n - 1` in the parabolic case; `[theta]` in the hyperbolic case).
    pub fn eval(&self, y: &[f64]) -> f64 {
        match &self.repr {
            PhiRepr::Preset(p) => p.eval(y),
            PhiRepr::Table { sites, values } => {
                let mut t = y[0];
                if matches!(self.case, ChartCase::Hyperbolic { .. }) {
                    let tau = std::f64::consts::TAU;
                    t = t.rem_euclid(tau);
                    // Periodic wrap: interpolate across the seam.
                    if t < sites[0] || t >= *sites.last().unwrap() {
                        let (s0, v0) = (*sites.last().unwrap(), *values.last().unwrap());
                        let (s1, v1) = (sites[0] + tau, values[0]);
                        let tt = if t < sites[0] { t + tau } else { t };
                        return v0 + (v1 - v0) * (tt - s0) / (s1 - s0);
                    }
                }
                match sites.binary_search_by(|s| s.partial_cmp(&t).unwrap()) {
                    Ok(i) => values[i],
                    Err(0) => values[0],
                    Err(i) if i == sites.len() => *values.last().unwrap(),
                    Err(i) => {
                        let w = (t - sites[i - 1]) / (sites[i] - sites[i - 1]);
                        values[i - 1] * (1.0 - w) + values[i] * w
                    }
                }
            }
        }
    }

    /// `(inf phi, sup phi)`.
    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    /// Point of `Gamma` in ideal plane coordinates over the boundary chart
    /// point `y`.
    pub fn gamma_point(&self, y: &[f64]) -> Vec<f64> {
        let phi = self.eval(y);
        match self.case {
            ChartCase::Parabolic { .. } => {
                let mut p = Vec::with_capacity(y.len() + 1);
                p.push(phi);
                p.extend_from_slice(y);
                p
            }
            ChartCase::Hyperbolic { .. } => {
                let r = phi.exp();
                vec![r * y[0].cos(), r * y[0].sin()]
            }
        }
    }
}

/// Checks the slab/graph hypotheses and reports bounds and a modulus of
/// continuity estimate. Violations name the failed hypothesis.
pub fn validate_boundary(phi: &BoundaryGraph) -> Result<ValidationReport> {
    let (inf, sup) = phi.bounds();
    if !inf.is_finite() || !sup.is_finite() {
        return Err(Error::Validation(
            "boundary datum is not between tangent hyperspheres (phi unbounded)".into(),
        ));
    }
    if matches!(phi.case, ChartCase::Parabolic { .. }) && inf < 0.0 {
        return Err(Error::Validation(format!(
            "boundary datum leaves the slab: inf phi = {inf} < 0"
        )));
    }
    // Modulus estimate by dense sampling of difference quotients.
    let (lo, hi) = sample_window(phi);
    let n = 20_000;
    let dt = (hi - lo) / n as f64;
    let mut modulus = 0.0f64;
    let mut prev = phi.eval(&[lo]);
    for i in 1..=n {
        let t = lo + dt * i as f64;
        let v = phi.eval(&[t]);
        modulus = modulus.max((v - prev).abs() / dt);
        prev = v;
    }
    Ok(ValidationReport { inf, sup, modulus })
}

fn sample_window(phi: &BoundaryGraph) -> (f64, f64) {
    match (&phi.case, &phi.repr) {
        (ChartCase::Hyperbolic { .. }, _) => (0.0, std::f64::consts::TAU),
        (_, PhiRepr::Table { sites, .. }) => (sites[0] - 1.0, *sites.last().unwrap() + 1.0),
        _ => (-8.0, 8.0),
    }
}

/// Largest sphere centered at `center` that stays inside the `side` component
/// of the ideal plane minus `Gamma`. Found by coarse scan plus golden-section
/// refinement of the distance to the curve.
pub fn clear_sphere_radius(
    phi: &BoundaryGraph,
    center: &[f64],
    side: GammaSide,
) -> Result<IdealSphere> {
    let n = phi.case.n();
    if center.len() != n {
        return Err(Error::Domain(format!(
            "clear-sphere center must have dimension n = {n}"
        )));
    }
    if n != 2 {
        return Err(Error::Domain(
            "clear_sphere_radius is implemented for n = 2".into(),
        ));
    }
    // Side check at the center's transverse position.
    let signed_gap = match phi.case {
        ChartCase::Parabolic { .. } => phi.eval(&center[1..]) - center[0],
        ChartCase::Hyperbolic { .. } => {
            let r = (center[0] * center[0] + center[1] * center[1]).sqrt();
            if r == 0.0 {
                // Origin is always strictly inside.
                f64::INFINITY
            } else {
                phi.eval(&[center[1].atan2(center[0]).rem_euclid(std::f64::consts::TAU)]).exp() - r
            }
        }
    };
    let on_requested_side = match side {
        GammaSide::ContainsM => signed_gap > 0.0,
        GammaSide::OppositeM => signed_gap < 0.0,
    };
    if signed_gap == 0.0 || signed_gap.abs() < 1e-14 {
        return Err(Error::Numerics(
            "clear sphere has zero radius: center lies on Gamma".into(),
        ));
    }
    if !on_requested_side {
        return Err(Error::Domain(format!(
            "center is not strictly on the requested side of Gamma (signed gap {signed_gap})"
        )));
    }

    let dist2 = |t: f64| -> f64 {
        let p = phi.gamma_point(&[t]);
        p.iter()
            .zip(center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
    };
    let (lo, hi, periodic) = match phi.case {
        ChartCase::Parabolic { .. } => {
            // The vertical candidate bounds how far the transverse minimizer
            // can wander.
            let window = signed_gap.abs() + 1.0;
            (center[1] - window, center[1] + window, false)
        }
        ChartCase::Hyperbolic { .. } => (0.0, std::f64::consts::TAU, true),
    };
    let coarse = 4096;
    let step = (hi - lo) / coarse as f64;
    let mut best: Vec<(f64, f64)> = Vec::new(); // (dist2, t)
    for i in 0..=coarse {
        let t = lo + step * i as f64;
        let d = dist2(t);
        best.push((d, t));
    }
    best.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut min_d2 = f64::INFINITY;
    for &(_, t0) in best.iter().take(4) {
        let (mut a, mut b) = (t0 - step, t0 + step);
        if !periodic {
            a = a.max(lo);
            b = b.min(hi);
        }
        // Golden-section refinement.
        let gr = (5.0f64.sqrt() - 1.0) / 2.0;
        let (mut c, mut d) = (b - gr * (b - a), a + gr * (b - a));
        let (mut fc, mut fd) = (dist2(c), dist2(d));
        for _ in 0..120 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - gr * (b - a);
                fc = dist2(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + gr * (b - a);
                fd = dist2(d);
            }
        }
        min_d2 = min_d2.min(fc.min(fd));
    }
    if !min_d2.is_finite() {
        return Err(Error::Numerics(
            "clear-sphere minimization produced non-finite distance".into(),
        ));
    }
    Ok(IdealSphere {
        center: center.to_vec(),
        radius: min_d2.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const PAR: ChartCase = ChartCase::Parabolic { n: 2 };
    const HYP: ChartCase = ChartCase::Hyperbolic { n: 2 };

    #[test]
    fn preset_constant() {
        let g = BoundaryGraph::from_preset(PAR, PhiPreset::Constant { a: 1.0 }).unwrap();
        assert_eq!(g.bounds(), (1.0, 1.0));
        assert_eq!(g.eval(&[3.7]), 1.0);
    }

    #[test]
    fn preset_bump_bounds() {
        let g = BoundaryGraph::from_preset(PAR, PhiPreset::Bump { a: 1.0, b: 0.5 }).unwrap();
        assert_eq!(g.bounds(), (1.0, 1.5));
    }

    #[test]
    fn table_interpolation_and_bounds() {
        let g = BoundaryGraph::from_table(PAR, vec![-1.0, 0.0, 1.0], vec![1.0, 1.4, 1.0]).unwrap();
        assert_eq!(g.bounds(), (1.0, 1.4));
        assert_relative_eq!(g.eval(&[-0.5]), 1.2);
        // Constant extension.
        assert_relative_eq!(g.eval(&[5.0]), 1.0);
        assert_relative_eq!(g.eval(&[-5.0]), 1.0);
    }

    #[test]
    fn unbounded_datum_rejected() {
        let err = BoundaryGraph::from_preset(PAR, PhiPreset::Linear { a: 0.0, slope: 1.0 })
            .unwrap_err();
        assert!(err.to_string().contains("not between tangent hyperspheres"));
    }

    #[test]
    fn negative_datum_rejected_parabolic() {
        let err =
            BoundaryGraph::from_preset(PAR, PhiPreset::Constant { a: -0.5 }).unwrap_err();
        assert!(err.to_string().contains("slab"));
    }

    #[test]
    fn validation_report_examples() {
        let g = BoundaryGraph::from_preset(PAR, PhiPreset::Constant { a: 1.0 }).unwrap();
        let r = validate_boundary(&g).unwrap();
        assert_eq!((r.inf, r.sup), (1.0, 1.0));
        assert_eq!(r.modulus, 0.0);

        // Bump modulus bounded by the calculus bound b * sqrt(2/e).
        let g = BoundaryGraph::from_preset(PAR, PhiPreset::Bump { a: 1.0, b: 0.5 }).unwrap();
        let r = validate_boundary(&g).unwrap();
        let bound = 0.5 * (2.0f64 / std::f64::consts::E).sqrt();
        assert!(r.modulus <= bound + 1e-6, "{} > {}", r.modulus, bound);
        assert!(r.modulus > 0.9 * bound);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("phi.csv");
        std::fs::write(&path, "y,phi\n-1.0,1.0\n0.0,1.4\n1.0,1.0\n").unwrap();
        let g = BoundaryGraph::from_csv(PAR, &path).unwrap();
        assert_eq!(g.bounds(), (1.0, 1.4));
        // Missing header rejected.
        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "-1.0,1.0\n0.0,1.4\n").unwrap();
        assert!(BoundaryGraph::from_csv(PAR, &bad).is_err());
        // Non-monotone sites rejected.
        let bad2 = dir.path().join("bad2.csv");
        std::fs::write(&bad2, "y,phi\n0.0,1.0\n-1.0,1.4\n").unwrap();
        assert!(BoundaryGraph::from_csv(PAR, &bad2).is_err());
    }

    #[test]
    fn clear_sphere_constant_data() {
        let g = BoundaryGraph::from_preset(PAR, PhiPreset::Constant { a: 1.0 }).unwrap();
        let s = clear_sphere_radius(&g, &[0.25, 3.0], GammaSide::ContainsM).unwrap();
        assert_relative_eq!(s.radius, 0.75, epsilon = 1e-9);
        let s = clear_sphere_radius(&g, &[2.0, -1.0], GammaSide::OppositeM).unwrap();
        assert_relative_eq!(s.radius, 1.0, epsilon = 1e-9);
        // Transverse position does not matter for constant data.
        let s2 = clear_sphere_radius(&g, &[2.0, 17.0], GammaSide::OppositeM).unwrap();
        assert_relative_eq!(s.radius, s2.radius, epsilon = 1e-10);
    }

    #[test]
    fn clear_sphere_side_and_zero_errors() {
        let g = BoundaryGraph::from_preset(PAR, PhiPreset::Constant { a: 1.0 }).unwrap();
        assert!(clear_sphere_radius(&g, &[2.0, 0.0], GammaSide::ContainsM).is_err());
        assert!(clear_sphere_radius(&g, &[1.0, 0.0], GammaSide::ContainsM).is_err());
    }

    #[test]
    fn clear_sphere_bump_matches_brute_force() {
        let g = BoundaryGraph::from_preset(PAR, PhiPreset::Bump { a: 1.0, b: 0.5 }).unwrap();
        let s = clear_sphere_radius(&g, &[0.0, 0.0], GammaSide::ContainsM).unwrap();
        // Brute force over a million samples.
        let mut best = f64::INFINITY;
        for i in 0..1_000_000u32 {
            let y = -4.0 + 8.0 * i as f64 / 1e6;
            let p = g.eval(&[y]);
            best = best.min(p * p + y * y);
        }
        assert_relative_eq!(s.radius, best.sqrt(), max_relative = 1e-6);
    }

    #[test]
    fn clear_sphere_is_lipschitz_in_center() {
        let g = BoundaryGraph::from_preset(PAR, PhiPreset::Bump { a: 1.0, b: 0.5 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..40 {
            let c1 = rng.gen_range(0.0..0.8);
            let c2 = rng.gen_range(-2.0..2.0);
            let delta = rng.gen_range(0.001..0.1);
            let r0 = clear_sphere_radius(&g, &[c1, c2], GammaSide::ContainsM)
                .unwrap()
                .radius;
            let r1 = clear_sphere_radius(&g, &[c1 - delta, c2], GammaSide::ContainsM)
                .unwrap()
                .radius;
            assert!((r1 - r0).abs() <= delta + 1e-8);
        }
    }

    #[test]
    fn clear_sphere_never_exceeds_sampled_distance() {
        let g = BoundaryGraph::from_preset(
            PAR,
            PhiPreset::SinusoidalDecay { a: 1.0, b: 0.4 },
        )
        .unwrap();
        let center = [0.2, 0.7];
        let s = clear_sphere_radius(&g, &center, GammaSide::ContainsM).unwrap();
        for i in 0..10_000 {
            let y = -6.0 + 12.0 * i as f64 / 1e4;
            let p = g.gamma_point(&[y]);
            let d = ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt();
            assert!(s.radius <= d + 1e-8);
        }
    }

    #[test]
    fn clear_sphere_hyperbolic_case() {
        // Gamma is the circle of radius e^{0.2}; from the origin the clear
        // radius is exactly e^{0.2}.
        let g = BoundaryGraph::from_preset(HYP, PhiPreset::Constant { a: 0.2 }).unwrap();
        let s = clear_sphere_radius(&g, &[0.0, 0.0], GammaSide::ContainsM).unwrap();
        assert_relative_eq!(s.radius, 0.2f64.exp(), epsilon = 1e-9);

        let g = BoundaryGraph::from_preset(
            HYP,
            PhiPreset::Sinusoidal { a: 0.0, b: 0.1, freq: 1 },
        )
        .unwrap();
        let s = clear_sphere_radius(&g, &[0.3, 0.0], GammaSide::ContainsM).unwrap();
        let mut brute = f64::INFINITY;
        for i in 0..1_000_000u32 {
            let t = std::f64::consts::TAU * i as f64 / 1e6;
            let p = g.gamma_point(&[t]);
            brute = brute.min(((p[0] - 0.3).powi(2) + p[1] * p[1]).sqrt());
        }
        assert_relative_eq!(s.radius, brute, max_relative = 1e-6);
    }

    #[test]
    fn hyperbolic_table_wraps_periodically() {
        let tau = std::f64::consts::TAU;
        let g = BoundaryGraph::from_table(
            HYP,
            vec![0.0, tau / 2.0, 3.0 * tau / 4.0],
            vec![0.1, 0.3, 0.2],
        )
        .unwrap();
        // Across the seam: interpolate between (3 tau/4, 0.2) and (tau, 0.1).
        let mid = 7.0 * tau / 8.0;
        assert_relative_eq!(g.eval(&[mid]), 0.15, epsilon = 1e-12);
        assert_relative_eq!(g.eval(&[mid + tau]), 0.15, epsilon = 1e-12);
    }
}
