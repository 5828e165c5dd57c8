//! Shared fixtures for the benchmarks.

use hypcmc_core::boundary::{BoundaryGraph, PhiPreset};
use hypcmc_core::geometry::ChartCase;
use hypcmc_core::grid::{ChartGrid, GraphFunction};
use hypcmc_core::surfaces::{surface_as_graph, ModelSurface, SurfaceKind};

/// Hemisphere graph samples on a parabolic box at spacing `h`.
pub fn hemisphere_graph(h: f64) -> GraphFunction {
    let s = ModelSurface::new(SurfaceKind::Hemisphere {
        center: vec![0.0, 0.0],
        radius: 2.0,
    })
    .unwrap();
    let sheet = surface_as_graph(&s, ChartCase::Parabolic { n: 2 });
    let ny = (0.6 / h).round() as usize + 1;
    let nz = (0.5 / h).round() as usize + 1;
    let grid = ChartGrid::parabolic_box(2, &[(-0.3, 0.3, ny)], 0.5, 1.0, nz).unwrap();
    GraphFunction::from_fn(grid, |c| sheet.eval(c)).unwrap()
}

/// The standard bump datum.
pub fn bump_phi() -> BoundaryGraph {
    BoundaryGraph::from_preset(
        ChartCase::Parabolic { n: 2 },
        PhiPreset::Bump { a: 1.0, b: 0.5 },
    )
    .unwrap()
}
