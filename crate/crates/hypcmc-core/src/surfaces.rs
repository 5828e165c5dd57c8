//! Exact CMC hypersurfaces of hyperbolic space in the half-space model.
//!
//! Every variant is a Euclidean plane or sphere piece, so its hyperbolic mean
//! curvature is closed form through the conformal relation
//!
//! ```text
//! H_hyp = height * H_euc + nu_last
//! ```
//!
//! where `nu` is the Euclidean unit normal on the chosen side and curvatures
//! are averages of principal curvatures with the shape operator `-D nu`. The
//! sign convention everywhere is the one fixed by the unit normal `eta` with
//! `<eta, Z> <= 0` ("against the flow"): with it, upward horospheres have
//! `H = +1`, equidistant planes tilted toward the flow have `H = m/sqrt(1+m^2)`,
//! and spherical caps with contact angle `theta` have `H = cos(theta)` on
//! their outward side.

use serde::{Deserialize, Serialize};

use crate::boundary::IdealSphere;
use crate::error::{Error, Result};
use crate::geometry::ChartCase;

/// Normal orientation of a model surface.
///
/// `AgainstFlow` is the convention side (`<eta, Z> <= 0`): for planes the
/// normal with negative first component, for sphere pieces the outward normal,
/// for horospheres the upward normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    AgainstFlow,
    TowardFlow,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::AgainstFlow => 1.0,
            Orientation::TowardFlow => -1.0,
        }
    }
}

/// Shape of an exact CMC surface. Centers live in the ideal boundary plane
/// `{x_{n+1} = 0}`; in the parabolic chart its coordinates are
/// `(x_1, x_2, ..., x_n)` with `x_1` the flow direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SurfaceKind {
    /// Totally geodesic plane `{x_1 = offset}`; `H = 0`.
    VerticalPlane { offset: f64 },
    /// Equidistant plane `{x_1 = offset + slope * x_{n+1}}`;
    /// `|H| = slope / sqrt(1 + slope^2)`.
    TiltedPlane { offset: f64, slope: f64 },
    /// Totally geodesic hemisphere over the ideal sphere of this center and
    /// radius; `H = 0`.
    Hemisphere { center: Vec<f64>, radius: f64 },
    /// Spherical cap meeting the ideal plane at `contact_angle` over the
    /// ideal sphere of this center and radius; `|H| = |cos(contact_angle)|`.
    SphericalCap {
        center: Vec<f64>,
        radius: f64,
        contact_angle: f64,
    },
    /// Horizontal plane `{x_{n+1} = height}`; `|H| = 1`.
    Horosphere { height: f64 },
}

/// An exact CMC model surface with a chosen normal orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSurface {
    pub kind: SurfaceKind,
    pub orientation: Orientation,
}

impl ModelSurface {
    pub fn new(kind: SurfaceKind) -> Result<Self> {
        Self::with_orientation(kind, Orientation::AgainstFlow)
    }

    pub fn with_orientation(kind: SurfaceKind, orientation: Orientation) -> Result<Self> {
        match &kind {
            SurfaceKind::Hemisphere { radius, .. } => {
                if *radius <= 0.0 {
                    return Err(Error::Domain("hemisphere radius must be > 0".into()));
                }
            }
            SurfaceKind::SphericalCap {
                radius,
                contact_angle,
                ..
            } => {
                if *radius <= 0.0 {
                    return Err(Error::Domain("cap radius must be > 0".into()));
                }
                if !(*contact_angle > 0.0 && *contact_angle < std::f64::consts::PI) {
                    return Err(Error::Domain(format!(
                        "contact angle must lie in (0, pi), got {contact_angle}"
                    )));
                }
            }
            SurfaceKind::Horosphere { height } => {
                if *height <= 0.0 {
                    return Err(Error::Domain("horosphere height must be > 0".into()));
                }
            }
            _ => {}
        }
        Ok(Self { kind, orientation })
    }

    /// The constant hyperbolic mean curvature of the surface with respect to
    /// its stored orientation.
    pub fn exact_mean_curvature(&self) -> f64 {
        let s = self.orientation.sign();
        match &self.kind {
            SurfaceKind::VerticalPlane { .. } | SurfaceKind::Hemisphere { .. } => 0.0,
            SurfaceKind::Horosphere { .. } => s,
            SurfaceKind::TiltedPlane { slope, .. } => {
                s * slope / (1.0 + slope * slope).sqrt()
            }
            SurfaceKind::SphericalCap { contact_angle, .. } => s * contact_angle.cos(),
        }
    }

    /// Center and radius of the underlying Euclidean sphere, when the surface
    /// is a sphere piece. The center's last coordinate is its signed height
    /// `a = -R cot(theta)`; the Euclidean radius is `R / sin(theta)`.
    pub fn euclidean_sphere(&self) -> Option<(Vec<f64>, f64)> {
        match &self.kind {
            SurfaceKind::Hemisphere { center, radius } => {
                let mut c = center.clone();
                c.push(0.0);
                Some((c, *radius))
            }
            SurfaceKind::SphericalCap {
                center,
                radius,
                contact_angle,
            } => {
                let mut c = center.clone();
                c.push(-radius * contact_angle.cos() / contact_angle.sin());
                Some((c, radius / contact_angle.sin()))
            }
            _ => None,
        }
    }

    /// Ideal boundary sphere of a sphere-piece surface.
    pub fn asymptotic_boundary(&self) -> Option<IdealSphere> {
        match &self.kind {
            SurfaceKind::Hemisphere { center, radius }
            | SurfaceKind::SphericalCap { center, radius, .. } => Some(IdealSphere {
                center: center.clone(),
                radius: *radius,
            }),
            _ => None,
        }
    }
}

/// Which side the mean curvature vector of a constructed cap points into,
/// relative to the ideal disk bounded by `E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapSide {
    /// Into the component whose ideal boundary contains the open disk of `E`.
    /// Used for caps enclosing the boundary curve from outside.
    TowardDisk,
    /// Into the complementary component. Used for descent caps whose disk is
    /// in the clear region beyond the boundary curve.
    AwayFromDisk,
}

/// The CMC-`H` hypersphere with asymptotic boundary exactly `E`, oriented so
/// that its mean curvature vector points into the requested side.
///
/// `H = 0` returns the totally geodesic hemisphere; `|H| >= 1` is rejected
/// (no hypersphere attains it).
pub fn cmc_cap_for_boundary_sphere(e: &IdealSphere, h: f64, side: CapSide) -> Result<ModelSurface> {
    if e.radius <= 0.0 {
        return Err(Error::Domain("ideal sphere radius must be > 0".into()));
    }
    if h.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "no hypersphere has |H| = {} >= 1",
            h.abs()
        )));
    }
    if h == 0.0 {
        return ModelSurface::new(SurfaceKind::Hemisphere {
            center: e.center.clone(),
            radius: e.radius,
        });
    }
    // Contact angle and orientation resolving the requested side:
    // AwayFromDisk caps have sphere-center height a = -H R / sqrt(1-H^2)
    // (theta = arccos(H), outward normal), TowardDisk caps the mirror image.
    let (theta, orientation) = match side {
        CapSide::AwayFromDisk => (h.acos(), Orientation::AgainstFlow),
        CapSide::TowardDisk => ((-h).acos(), Orientation::TowardFlow),
    };
    ModelSurface::with_orientation(
        SurfaceKind::SphericalCap {
            center: e.center.clone(),
            radius: e.radius,
            contact_angle: theta,
        },
        orientation,
    )
}

/// Which graph sheet of a two-sheeted surface to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sheet {
    /// The sheet on the flow side (larger graph value).
    FlowFacing,
    /// The sheet facing the chart hypersurface (smaller graph value).
    FlowOpposing,
}

/// A model-surface sheet as a Killing graph over a chart subdomain.
///
/// Evaluation is exact (sphere/plane parameters only); `eval` returns `None`
/// outside the sheet's domain.
#[derive(Debug, Clone)]
pub struct SheetGraph {
    pub case: ChartCase,
    pub surface: ModelSurface,
    pub sheet: Sheet,
}

impl SheetGraph {
    /// Graph value at the chart point `xi` (Cartesian chart coordinates), or
    /// `None` when the flow orbit through `xi` misses the sheet.
    pub fn eval(&self, xi: &[f64]) -> Option<f64> {
        let sgn = match self.sheet {
            Sheet::FlowFacing => 1.0,
            Sheet::FlowOpposing => -1.0,
        };
        match self.case {
            ChartCase::Parabolic { .. } => {
                let z = xi[xi.len() - 1];
                match &self.surface.kind {
                    SurfaceKind::VerticalPlane { offset } => Some(*offset),
                    SurfaceKind::TiltedPlane { offset, slope } => Some(offset + slope * z),
                    SurfaceKind::Horosphere { .. } => None,
                    SurfaceKind::Hemisphere { .. } | SurfaceKind::SphericalCap { .. } => {
                        let (c, rho) = self.surface.euclidean_sphere().unwrap();
                        // c = (c_1, c', a): graph x_1 = c_1 +/- sqrt(rho^2 - |xi - (c', a)|^2).
                        let mut d2 = 0.0;
                        for (i, x) in xi[..xi.len() - 1].iter().enumerate() {
                            d2 += (x - c[1 + i]) * (x - c[1 + i]);
                        }
                        d2 += (z - c[c.len() - 1]) * (z - c[c.len() - 1]);
                        let rad = rho * rho - d2;
                        if rad <= 0.0 {
                            None
                        } else {
                            Some(c[0] + sgn * rad.sqrt())
                        }
                    }
                }
            }
            ChartCase::Hyperbolic { .. } => {
                let r2: f64 = xi.iter().map(|c| c * c).sum();
                if r2 >= 1.0 {
                    return None;
                }
                let s = (1.0 - r2).sqrt();
                match &self.surface.kind {
                    SurfaceKind::VerticalPlane { offset } => {
                        let v = offset / xi[0];
                        (v.is_finite() && v > 0.0).then(|| v.ln())
                    }
                    SurfaceKind::TiltedPlane { offset, slope } => {
                        let v = offset / (xi[0] - slope * s);
                        (v.is_finite() && v > 0.0).then(|| v.ln())
                    }
                    SurfaceKind::Horosphere { height } => Some((height / s).ln()),
                    SurfaceKind::Hemisphere { .. } | SurfaceKind::SphericalCap { .. } => {
                        // e^u = q +/- sqrt(q^2 - d2), q = m(xi).C, d2 = |c'|^2 - R^2.
                        let (c, rho) = self.surface.euclidean_sphere().unwrap();
                        let mut q = s * c[c.len() - 1];
                        let mut c2 = c[c.len() - 1] * c[c.len() - 1];
                        for (i, x) in xi.iter().enumerate() {
                            q += x * c[i];
                            c2 += c[i] * c[i];
                        }
                        let d2 = c2 - rho * rho;
                        let rad = q * q - d2;
                        if rad <= 0.0 {
                            return None;
                        }
                        let v = q + sgn * rad.sqrt();
                        (v > 0.0).then(|| v.ln())
                    }
                }
            }
        }
    }

    /// Limit of the graph value at an ideal boundary point of the chart
    /// (`y` of length `n-1` parabolic, `[theta]` hyperbolic).
    pub fn ideal_trace(&self, y: &[f64]) -> Option<f64> {
        match self.case {
            ChartCase::Parabolic { n } => {
                let mut xi = vec![0.0; n];
                xi[..n - 1].copy_from_slice(y);
                // The z -> 0 limit of the sphere-sheet formulas is the same
                // expression with the sphere replaced by its ideal boundary.
                match &self.surface.kind {
                    SurfaceKind::VerticalPlane { offset }
                    | SurfaceKind::TiltedPlane { offset, .. } => Some(*offset),
                    SurfaceKind::Horosphere { .. } => None,
                    SurfaceKind::Hemisphere { .. } | SurfaceKind::SphericalCap { .. } => {
                        let e = self.surface.asymptotic_boundary().unwrap();
                        let mut d2 = 0.0;
                        for (i, v) in y.iter().enumerate() {
                            d2 += (v - e.center[1 + i]) * (v - e.center[1 + i]);
                        }
                        let rad = e.radius * e.radius - d2;
                        let sgn = match self.sheet {
                            Sheet::FlowFacing => 1.0,
                            Sheet::FlowOpposing => -1.0,
                        };
                        (rad >= 0.0).then(|| e.center[0] + sgn * rad.sqrt())
                    }
                }
            }
            ChartCase::Hyperbolic { n } => {
                if n != 2 {
                    return None;
                }
                let theta = y[0];
                let dir = [theta.cos(), theta.sin()];
                match &self.surface.kind {
                    SurfaceKind::VerticalPlane { offset } => {
                        let v = offset / dir[0];
                        (v.is_finite() && v > 0.0).then(|| v.ln())
                    }
                    SurfaceKind::TiltedPlane { offset, .. } => {
                        let v = offset / dir[0];
                        (v.is_finite() && v > 0.0).then(|| v.ln())
                    }
                    SurfaceKind::Horosphere { .. } => None,
                    SurfaceKind::Hemisphere { .. } | SurfaceKind::SphericalCap { .. } => {
                        let e = self.surface.asymptotic_boundary().unwrap();
                        let q = dir[0] * e.center[0] + dir[1] * e.center[1];
                        let c2 = e.center.iter().map(|c| c * c).sum::<f64>();
                        let rad = q * q - (c2 - e.radius * e.radius);
                        if rad < 0.0 {
                            return None;
                        }
                        let sgn = match self.sheet {
                            Sheet::FlowFacing => 1.0,
                            Sheet::FlowOpposing => -1.0,
                        };
                        let v = q + sgn * rad.sqrt();
                        (v > 0.0).then(|| v.ln())
                    }
                }
            }
        }
    }
}

/// The flow-facing sheet of `s` as a Killing graph over the chart.
pub fn surface_as_graph(s: &ModelSurface, case: ChartCase) -> SheetGraph {
    surface_sheet(s, case, Sheet::FlowFacing)
}

/// A chosen sheet of `s` as a Killing graph over the chart.
pub fn surface_sheet(s: &ModelSurface, case: ChartCase, sheet: Sheet) -> SheetGraph {
    SheetGraph {
        case,
        surface: s.clone(),
        sheet,
    }
}

/// Envelope data for the global supersolution barrier.
#[derive(Debug, Clone, PartialEq)]
pub enum BarrierEnvelope {
    /// Parabolic case: the slab bound `sup phi`.
    Slab { sup_phi: f64 },
    /// Hyperbolic case: an ideal sphere centered at the origin enclosing the
    /// boundary curve (radius `e^{sup phi}`).
    EnclosingSphere { radius: f64 },
}

/// Global graph of the CMC-`H` hypersphere lying above the boundary curve on
/// the flow side; an exact solution of the mean-curvature equation.
///
/// Parabolic: the equidistant plane through `{x_1 = sup phi}` with signed
/// slope `H / sqrt(1 - H^2)`. Hyperbolic: the cap over the enclosing sphere
/// with its mean curvature vector pointing into the disk side.
pub fn supersolution_barrier(
    case: ChartCase,
    envelope: &BarrierEnvelope,
    h: f64,
) -> Result<SheetGraph> {
    if h.abs() >= 1.0 {
        return Err(Error::Domain(format!("|H| = {} >= 1", h.abs())));
    }
    match (case, envelope) {
        (ChartCase::Parabolic { .. }, BarrierEnvelope::Slab { sup_phi }) => {
            if !sup_phi.is_finite() {
                return Err(Error::Validation(
                    "unbounded datum: no slab barrier exists".into(),
                ));
            }
            let slope = h / (1.0 - h * h).sqrt();
            let s = if slope == 0.0 {
                ModelSurface::new(SurfaceKind::VerticalPlane { offset: *sup_phi })?
            } else {
                ModelSurface::new(SurfaceKind::TiltedPlane {
                    offset: *sup_phi,
                    slope,
                })?
            };
            Ok(surface_as_graph(&s, case))
        }
        (ChartCase::Hyperbolic { n }, BarrierEnvelope::EnclosingSphere { radius }) => {
            if !(radius.is_finite() && *radius > 0.0) {
                return Err(Error::Validation("invalid enclosing sphere".into()));
            }
            let e = IdealSphere {
                center: vec![0.0; n],
                radius: *radius,
            };
            let cap = cmc_cap_for_boundary_sphere(&e, h, CapSide::TowardDisk)?;
            Ok(surface_as_graph(&cap, case))
        }
        _ => Err(Error::Domain(
            "envelope kind does not match the chart case".into(),
        )),
    }
}
