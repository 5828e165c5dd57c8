//! Mode implementations: solve, verify, barriers, oracle.

use std::collections::BTreeMap;
use std::path::Path;

use hypcmc_core::barriers::{barrier_sequence, sandwich_check, BarrierLadder};
use hypcmc_core::boundary::BoundaryGraph;
use hypcmc_core::export::{write_csv, write_json_summary, write_obj, write_ply, ReportTable};
use hypcmc_core::geometry::ChartCase;
use hypcmc_core::mesh::{
    boundary_trace, curvature_deviation, embed_graph, graph_curvature_stats, sample_sphere_mesh,
    sample_surface_mesh,
};
use hypcmc_core::solver::{
    asymptotic_solve, default_margin, AsymptoticProblem, Solution, SolverConfig,
};
use hypcmc_core::surfaces::{
    supersolution_barrier, BarrierEnvelope, ModelSurface, SurfaceKind,
};

use crate::config::{
    BarriersConfig, BoundarySpec, CaseName, Mode, OracleConfig, OutputConfig, ProblemConfig,
    RunConfig, VerifyConfig,
};

/// Failure classes mapped to exit codes 1/2/3.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Solver(String),
    Verification(String),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Solver(m) => write!(f, "solver failure: {m}"),
            Failure::Verification(m) => write!(f, "verification failure: {m}"),
        }
    }
}

type RunResult = Result<(), Failure>;

fn cfg_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn solver_err(e: impl std::fmt::Display) -> Failure {
    Failure::Solver(e.to_string())
}

fn worker_cap() -> usize {
    std::env::var("HYPCMC_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn build_boundary(problem: &ProblemConfig) -> Result<BoundaryGraph, Failure> {
    let case = match problem.case {
        CaseName::Parabolic => ChartCase::Parabolic { n: problem.n },
        CaseName::Hyperbolic => ChartCase::Hyperbolic { n: problem.n },
    };
    match &problem.boundary {
        BoundarySpec::Preset(p) => BoundaryGraph::from_preset(case, *p).map_err(cfg_err),
        BoundarySpec::TableCsv(path) => BoundaryGraph::from_csv(case, path).map_err(cfg_err),
    }
}

fn need_problem(config: &RunConfig) -> Result<&ProblemConfig, Failure> {
    config
        .problem
        .as_ref()
        .ok_or_else(|| Failure::Config("this mode needs a `problem` section".into()))
}

pub fn run(config: &RunConfig, mode_override: Option<Mode>) -> RunResult {
    let mode = mode_override.unwrap_or(config.mode);
    match mode {
        Mode::Solve => run_solve(config),
        Mode::Verify => run_verify(config),
        Mode::Barriers => run_barriers(config),
        Mode::Oracle => run_oracle(config),
    }
}

/// Scalar diagnostics of a solved problem, shared by solve and verify.
fn solution_summary(sol: &Solution) -> Result<BTreeMap<String, f64>, Failure> {
    let mut summary = BTreeMap::new();
    summary.insert("residual_max".into(), sol.diagnostics.residual_max);
    summary.insert("residual_l2".into(), sol.diagnostics.residual_l2);
    summary.insert("gradient_sup".into(), sol.diagnostics.gradient_sup);
    let stats = graph_curvature_stats(&sol.u, sol.h_curv, default_margin(&sol.u.grid))
        .map_err(solver_err)?;
    summary.insert("oracle_H_max_dev".into(), stats.max_dev);
    if let Some(phi) = &sol.phi {
        let trace = boundary_trace(&sol.u, phi).map_err(solver_err)?;
        summary.insert("trace_max_err".into(), trace.max_error);
    }
    let sandwich = sol
        .diagnostics
        .sandwich_lower
        .into_iter()
        .chain(sol.diagnostics.sandwich_upper)
        .fold(f64::INFINITY, f64::min);
    if sandwich.is_finite() {
        summary.insert("sandwich_min_margin".into(), sandwich);
    }
    if let Some(s) = sol.diagnostics.truncation_sensitivity {
        summary.insert("truncation_sensitivity".into(), s);
    }
    Ok(summary)
}

fn write_solution_outputs(
    sol: &Solution,
    out: &OutputConfig,
    summary: &BTreeMap<String, f64>,
) -> RunResult {
    if let Some(path) = &out.mesh_ply {
        let mesh = embed_graph(&sol.u).map_err(solver_err)?;
        write_ply(&mesh, path).map_err(cfg_err)?;
    }
    if let Some(path) = &out.mesh_obj {
        let mesh = embed_graph(&sol.u).map_err(solver_err)?;
        write_obj(&mesh, path).map_err(cfg_err)?;
    }
    if let Some(path) = &out.report_csv {
        if let Some(phi) = &sol.phi {
            let trace = boundary_trace(&sol.u, phi).map_err(solver_err)?;
            let mut table = ReportTable::new(&["probe", "limit", "phi", "trace_err"]);
            for i in 0..trace.probes.len() {
                table.push(vec![
                    trace.probes[i],
                    trace.limits[i],
                    phi.eval(&[trace.probes[i]]),
                    trace.errors[i],
                ]);
            }
            write_csv(&table, path).map_err(cfg_err)?;
        }
    }
    if let Some(path) = &out.summary_json {
        write_json_summary(summary, path).map_err(cfg_err)?;
    }
    if let Some(path) = &out.solution_json {
        let body = serde_json::to_string(sol)
            .map_err(|e| Failure::Solver(format!("solution serialization failed: {e}")))?;
        std::fs::write(path, body)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn run_solve(config: &RunConfig) -> RunResult {
    let problem = need_problem(config)?;
    let phi = build_boundary(problem)?;
    if !(problem.h_curv.is_finite() && problem.h_curv.abs() < 1.0) {
        return Err(Failure::Config(format!(
            "mean curvature must satisfy |H| < 1, got {}",
            problem.h_curv
        )));
    }
    let cfg: SolverConfig = config.solver.build();
    let sol = asymptotic_solve(
        &AsymptoticProblem {
            phi,
            h_curv: problem.h_curv,
        },
        &cfg,
    )
    .map_err(solver_err)?;
    let summary = solution_summary(&sol)?;
    write_solution_outputs(&sol, &config.output, &summary)?;
    for (k, v) in &summary {
        println!("{k} = {v}");
    }
    Ok(())
}

fn load_solution(path: &Path) -> Result<Solution, Failure> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&body)
        .map_err(|e| Failure::Config(format!("bad solution file {}: {e}", path.display())))
}

fn run_verify(config: &RunConfig) -> RunResult {
    let vc: &VerifyConfig = config
        .verify
        .as_ref()
        .ok_or_else(|| Failure::Config("verify mode needs a `verify` section".into()))?;
    let sol = load_solution(&vc.solution_json)?;
    let mut summary = solution_summary(&sol)?;

    // Residual check against a fresh recomputation.
    let res = hypcmc_core::operator::residual(&sol.u, sol.h_curv).map_err(solver_err)?;
    summary.insert("residual_max".into(), res.max_norm);

    // Sandwich margins recomputed from the datum.
    let mut sandwich_min = f64::INFINITY;
    if let Some(phi) = &sol.phi {
        if sol.h_curv >= 0.0 {
            let (inf, sup) = phi.bounds();
            let envelope = match phi.case {
                ChartCase::Parabolic { .. } => BarrierEnvelope::Slab { sup_phi: sup - inf },
                ChartCase::Hyperbolic { .. } => BarrierEnvelope::EnclosingSphere {
                    radius: (sup - inf).exp(),
                },
            };
            let barrier =
                supersolution_barrier(phi.case, &envelope, sol.h_curv).map_err(solver_err)?;
            let grid = &sol.u.grid;
            for f in 0..grid.len() {
                let cart = grid.to_cartesian(&grid.coords(&grid.unflat(f)));
                let v = sol.u.values[f] - inf;
                sandwich_min = sandwich_min.min(v);
                if let Some(w) = barrier.eval(&cart) {
                    sandwich_min = sandwich_min.min(w - v);
                }
            }
            summary.insert("sandwich_min_margin".into(), sandwich_min);
        }
    }

    if let Some(path) = &config.output.summary_json {
        write_json_summary(&summary, path).map_err(cfg_err)?;
    }
    for (k, v) in &summary {
        println!("{k} = {v}");
    }

    if res.max_norm > vc.residual_tol {
        return Err(Failure::Verification(format!(
            "residual check failed: max-norm {:.3e} > {:.3e}",
            res.max_norm, vc.residual_tol
        )));
    }
    let oracle_dev = summary["oracle_H_max_dev"];
    if oracle_dev > vc.oracle_tol {
        return Err(Failure::Verification(format!(
            "curvature oracle check failed: deviation {:.3e} > {:.3e}",
            oracle_dev, vc.oracle_tol
        )));
    }
    if sandwich_min.is_finite() && sandwich_min < -vc.sandwich_tol {
        return Err(Failure::Verification(format!(
            "sandwich check failed: margin {sandwich_min:.3e} < -{:.3e}",
            vc.sandwich_tol
        )));
    }
    Ok(())
}

fn run_barriers(config: &RunConfig) -> RunResult {
    let bc: &BarriersConfig = config
        .barriers
        .as_ref()
        .ok_or_else(|| Failure::Config("barriers mode needs a `barriers` section".into()))?;
    let problem = need_problem(config)?;
    let phi = build_boundary(problem)?;
    let h_curv = problem.h_curv;

    // Certificates for distinct probes are independent; compute them on a
    // worker pool capped by HYPCMC_THREADS, collecting in probe order.
    let cap = worker_cap().max(1);
    let mut ladders: Vec<Option<Result<BarrierLadder, String>>> = vec![None; bc.probes.len()];
    for chunk_start in (0..bc.probes.len()).step_by(cap) {
        let chunk_end = (chunk_start + cap).min(bc.probes.len());
        let results: Vec<(usize, Result<BarrierLadder, String>)> = std::thread::scope(|s| {
            let handles: Vec<_> = (chunk_start..chunk_end)
                .map(|i| {
                    let phi = &phi;
                    let probe = bc.probes[i];
                    let k_max = bc.k_max;
                    s.spawn(move || {
                        (
                            i,
                            barrier_sequence(&[probe], phi, h_curv, k_max)
                                .map_err(|e| e.to_string()),
                        )
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for (i, r) in results {
            ladders[i] = Some(r);
        }
    }

    let mut table = ReportTable::new(&["probe", "k", "sigma_k", "w_k", "gap"]);
    let mut summary = BTreeMap::new();
    let mut final_gap_max = 0.0f64;
    let mut resolved = Vec::new();
    for (i, slot) in ladders.into_iter().enumerate() {
        let ladder = slot.unwrap().map_err(Failure::Config)?;
        let c = &ladder.certificate;
        let kk = c.sigma.len().max(c.w.len());
        for k in 0..kk {
            let s = c.sigma[k.min(c.sigma.len() - 1)];
            let w = c.w[k.min(c.w.len() - 1)];
            table.push(vec![bc.probes[i], k as f64, s, w, w - s]);
        }
        final_gap_max = final_gap_max.max(c.final_gap());
        resolved.push(ladder);
    }
    summary.insert("certificate_gap_max".into(), final_gap_max);

    let mut violations = 0usize;
    if bc.check_sandwich {
        let cfg: SolverConfig = config.solver.build();
        let sol = asymptotic_solve(
            &AsymptoticProblem {
                phi: phi.clone(),
                h_curv,
            },
            &cfg,
        )
        .map_err(solver_err)?;
        let mut min_above = f64::INFINITY;
        let mut min_below = f64::INFINITY;
        for ladder in &resolved {
            let rep = sandwich_check(&ladder.sub, &ladder.sup, &sol.u);
            violations += rep.violations;
            min_above = min_above.min(rep.min_above_sub);
            min_below = min_below.min(rep.min_below_sup);
        }
        summary.insert("sandwich_violations".into(), violations as f64);
        summary.insert("sandwich_min_above_sub".into(), min_above);
        summary.insert("sandwich_min_below_sup".into(), min_below);
    }

    if let Some(path) = &config.output.report_csv {
        write_csv(&table, path).map_err(cfg_err)?;
    }
    if let Some(path) = &config.output.summary_json {
        write_json_summary(&summary, path).map_err(cfg_err)?;
    }
    for (k, v) in &summary {
        println!("{k} = {v}");
    }
    if violations > 0 {
        return Err(Failure::Verification(format!(
            "barrier sandwich check failed at {violations} nodes"
        )));
    }
    Ok(())
}

fn run_oracle(config: &RunConfig) -> RunResult {
    let oc = config.oracle.clone().unwrap_or(OracleConfig {
        h: 1.0 / 64.0,
        tol: 0.01,
    });
    let suite: Vec<(&str, ModelSurface, f64)> = vec![
        (
            "vertical_plane",
            ModelSurface::new(SurfaceKind::VerticalPlane { offset: 0.7 }).map_err(cfg_err)?,
            0.0,
        ),
        (
            "tilted_plane",
            ModelSurface::new(SurfaceKind::TiltedPlane {
                offset: 1.0,
                slope: 0.75,
            })
            .map_err(cfg_err)?,
            0.6,
        ),
        (
            "hemisphere",
            ModelSurface::new(SurfaceKind::Hemisphere {
                center: vec![0.0, 0.0],
                radius: 3.0,
            })
            .map_err(cfg_err)?,
            0.0,
        ),
        (
            "spherical_cap_60",
            ModelSurface::new(SurfaceKind::SphericalCap {
                center: vec![0.0, 0.0],
                radius: 1.0,
                contact_angle: std::f64::consts::FRAC_PI_3,
            })
            .map_err(cfg_err)?,
            0.5,
        ),
        (
            "spherical_cap_120",
            ModelSurface::new(SurfaceKind::SphericalCap {
                center: vec![0.0, 0.0],
                radius: 1.0,
                contact_angle: 2.0 * std::f64::consts::FRAC_PI_3,
            })
            .map_err(cfg_err)?,
            -0.5,
        ),
        (
            "horosphere",
            ModelSurface::new(SurfaceKind::Horosphere { height: 2.0 }).map_err(cfg_err)?,
            1.0,
        ),
    ];
    let mut csv = String::from("surface,exact_h,max_dev,mean,count\n");
    let mut summary = BTreeMap::new();
    let mut worst: Option<(String, f64)> = None;
    let mut record = |name: &str, expected: f64, stats: hypcmc_core::mesh::CurvatureStats| {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            name, expected, stats.max_dev, stats.mean, stats.count
        ));
        summary.insert(format!("oracle_dev_{name}"), stats.max_dev);
        if worst.as_ref().map(|(_, d)| stats.max_dev > *d).unwrap_or(true) {
            worst = Some((name.to_string(), stats.max_dev));
        }
    };
    for (name, surface, expected) in &suite {
        let exact = surface.exact_mean_curvature();
        debug_assert!((exact - expected).abs() < 1e-12);
        let mesh = sample_surface_mesh(surface, oc.h).map_err(solver_err)?;
        record(name, *expected, curvature_deviation(&mesh, *expected));
    }
    // Geodesic sphere: Euclidean sphere at height 2, radius 1, inward
    // orientation; H = 2.
    let sphere = sample_sphere_mesh([0.0, 0.0, 2.0], 1.0, oc.h, true).map_err(solver_err)?;
    record("geodesic_sphere", 2.0, curvature_deviation(&sphere, 2.0));
    drop(record);

    if let Some(path) = &config.output.report_csv {
        std::fs::write(path, &csv)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    if let Some(path) = &config.output.summary_json {
        write_json_summary(&summary, path).map_err(cfg_err)?;
    }
    print!("{csv}");
    if let Some((name, dev)) = worst {
        if dev > oc.tol {
            return Err(Failure::Verification(format!(
                "curvature regression failed for {name}: deviation {dev:.3e} > {:.3e}",
                oc.tol
            )));
        }
    }
    Ok(())
}
