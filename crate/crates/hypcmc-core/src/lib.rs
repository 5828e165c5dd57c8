//! Numerical machinery for constant-mean-curvature (CMC) Killing graphs in the
//! half-space model of hyperbolic space.
//!
//! The crate solves the quasilinear mean-curvature equation for graphs over a
//! totally geodesic hypersurface, flowed by either a hyperbolic (dilation) or
//! parabolic (horizontal translation) Killing field, with boundary data
//! prescribed on the ideal boundary. Exact model surfaces (horospheres,
//! hemispheres, equidistant planes, spherical caps) serve as Newton seeds,
//! comparison barriers and curvature oracles, and a Perron-style
//! sub/supersolution ladder produces machine-checkable boundary-attainment
//! certificates.
//!
//! Modules map onto the stages of the pipeline:
//!
//! - [`geometry`]: half-space metric, Killing fields, flows, charts.
//! - [`surfaces`]: exact CMC model surfaces and their closed-form curvature.
//! - [`boundary`]: ideal boundary data, validation, clear-sphere distances.
//! - [`grid`] / [`operator`]: metric-aware finite-difference residual and
//!   Jacobian of the mean-curvature operator.
//! - [`solver`]: damped Newton with continuation in `H`, bounded Dirichlet
//!   and truncated asymptotic problems.
//! - [`barriers`]: sub/supersolution lifts, descent sequences, certificates.
//! - [`mesh`]: graph embedding, independent mesh-curvature oracle, traces.
//! - [`export`]: PLY/OBJ meshes, CSV/JSON reports.

pub mod barriers;
pub mod boundary;
pub mod error;
pub mod export;
pub mod geometry;
pub mod grid;
pub mod linsolve;
pub mod mesh;
pub mod operator;
pub mod solver;
pub mod surfaces;

pub use error::{Error, Result};
pub use geometry::{ChartCase, HalfSpacePoint, KillingField, KillingFieldKind, TangentVector};
pub use grid::{ChartGrid, GraphFunction};
pub use solver::{Solution, SolverConfig};
pub use surfaces::{ModelSurface, Orientation};
