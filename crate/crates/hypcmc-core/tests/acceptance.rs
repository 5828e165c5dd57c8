//! Acceptance suite: eleven end-to-end criteria, each printed as one
//! PASS/FAIL line. A single test walks all of them so that expensive solves
//! can be shared; every tolerance is pinned here in code.
//!
//! Run with `cargo test -p hypcmc-core --test acceptance -- --nocapture`.

use std::collections::{BTreeMap, HashMap};

use hypcmc_core::barriers::{barrier_sequence, sandwich_check};
use hypcmc_core::boundary::{BoundaryGraph, PhiPreset};
use hypcmc_core::geometry::{
    accel_consistency, ChartCase, HalfSpacePoint, KillingField, KillingFieldKind,
};
use hypcmc_core::grid::{ChartGrid, GraphFunction};
use hypcmc_core::mesh::{
    boundary_trace, curvature_deviation, embed_graph, numeric_mean_curvature, sample_sphere_mesh,
    sample_surface_mesh,
};
use hypcmc_core::operator::residual;
use hypcmc_core::solver::{
    asymptotic_solve_seeded, compare_solutions, default_margin, AsymptoticProblem, SeedChoice,
    Solution, SolverConfig, TruncationConfig,
};
use hypcmc_core::surfaces::{surface_sheet, ModelSurface, Sheet, SurfaceKind};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PAR: ChartCase = ChartCase::Parabolic { n: 2 };

fn fmt_vec(v: &[f64]) -> String {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", cells.join(", "))
}
const HYP: ChartCase = ChartCase::Hyperbolic { n: 2 };

struct Harness {
    cache: HashMap<String, Solution>,
    failures: Vec<String>,
}

impl Harness {
    fn check(&mut self, criterion: &str, ok: bool, detail: String) {
        if ok {
            println!("PASS {criterion}: {detail}");
        } else {
            println!("FAIL {criterion}: {detail}");
            self.failures.push(format!("{criterion}: {detail}"));
        }
    }

    fn solve(&mut self, phi: &BoundaryGraph, h_curv: f64, h: f64, seed: SeedChoice) -> Solution {
        let key = format!("{:?}|{:?}|{h_curv}|{h}|{seed:?}", phi.case, phi.repr);
        if let Some(s) = self.cache.get(&key) {
            return s.clone();
        }
        let cfg = SolverConfig {
            truncation: TruncationConfig {
                eps: h,
                transverse_extent: 2.0,
                z_hi: 2.0,
                h,
            },
            ..SolverConfig::default()
        };
        let sol = asymptotic_solve_seeded(
            &AsymptoticProblem {
                phi: phi.clone(),
                h_curv,
            },
            &cfg,
            seed,
        )
        .unwrap_or_else(|e| panic!("solve failed for {key}: {e}"));
        self.cache.insert(key, sol.clone());
        sol
    }
}

fn bump() -> BoundaryGraph {
    BoundaryGraph::from_preset(PAR, PhiPreset::Bump { a: 1.0, b: 0.5 }).unwrap()
}

fn flat(a: f64) -> BoundaryGraph {
    BoundaryGraph::from_preset(PAR, PhiPreset::Constant { a }).unwrap()
}

fn sin_theta() -> BoundaryGraph {
    BoundaryGraph::from_preset(
        HYP,
        PhiPreset::Sinusoidal {
            a: 0.0,
            b: 0.1,
            freq: 1,
        },
    )
    .unwrap()
}

/// Max residual of an exact sheet solution on a box grid.
fn sheet_residual(kind: &SurfaceKind, h_curv: f64, h: f64, y: (f64, f64), z: (f64, f64)) -> f64 {
    let s = ModelSurface::new(kind.clone()).unwrap();
    let sheet = surface_sheet(&s, PAR, Sheet::FlowFacing);
    let ny = ((y.1 - y.0) / h).round() as usize + 1;
    let nz = ((z.1 - z.0) / h).round() as usize + 1;
    let grid = ChartGrid::parabolic_box(2, &[(y.0, y.1, ny)], z.0, z.1, nz).unwrap();
    let u = GraphFunction::from_fn(grid, |c| sheet.eval(c)).unwrap();
    residual(&u, h_curv).unwrap().max_norm
}

/// Oracle deviation of a solved graph over the monitor's interior margin.
fn oracle_dev(sol: &Solution) -> f64 {
    let grid = &sol.u.grid;
    let mesh = embed_graph(&sol.u).unwrap();
    let vals = numeric_mean_curvature(&mesh);
    let margin = default_margin(grid);
    let mut max_dev = 0.0f64;
    for f in 0..grid.len() {
        if grid.dirichlet_margin(&grid.unflat(f)) >= margin {
            if let Some(v) = vals[f] {
                max_dev = max_dev.max((v - sol.h_curv).abs());
            }
        }
    }
    max_dev
}

fn criterion_1(h: &mut Harness) {
    // Vertical plane / constants: exact to 1e-12.
    let exact = sheet_residual(
        &SurfaceKind::VerticalPlane { offset: 0.7 },
        0.0,
        1.0 / 32.0,
        (-0.5, 0.5),
        (1.0, 2.0),
    );
    h.check(
        "criterion 1a (vertical plane exact)",
        exact < 1e-12,
        format!("max residual {exact:.2e} (tol 1e-12)"),
    );

    // Curved exact solutions: observed order 2.0 +/- 0.3 across
    // h in {1/16, 1/32, 1/64}.
    let cases: Vec<(&str, SurfaceKind, f64, (f64, f64), (f64, f64))> = vec![
        (
            "tilted m=0.25",
            SurfaceKind::TiltedPlane {
                offset: 1.0,
                slope: 0.25,
            },
            0.25 / (1.0f64 + 0.25 * 0.25).sqrt(),
            (-0.5, 0.5),
            (1.0, 2.0),
        ),
        (
            "tilted m=0.75",
            SurfaceKind::TiltedPlane {
                offset: 1.0,
                slope: 0.75,
            },
            0.6,
            (-0.5, 0.5),
            (1.0, 2.0),
        ),
        (
            "tilted m=2",
            SurfaceKind::TiltedPlane {
                offset: 1.0,
                slope: 2.0,
            },
            2.0 / 5.0f64.sqrt(),
            (-0.5, 0.5),
            (1.0, 2.0),
        ),
        (
            "hemisphere",
            SurfaceKind::Hemisphere {
                center: vec![0.0, 0.0],
                radius: 2.0,
            },
            0.0,
            (-0.3, 0.3),
            (0.5, 1.0),
        ),
        (
            "cap theta=pi/3",
            SurfaceKind::SphericalCap {
                center: vec![2.0, 0.0],
                radius: 2.0,
                contact_angle: std::f64::consts::FRAC_PI_3,
            },
            0.5,
            (-0.3, 0.3),
            (0.3, 0.7),
        ),
        (
            "cap theta=2pi/3",
            SurfaceKind::SphericalCap {
                center: vec![2.0, 0.0],
                radius: 1.0,
                contact_angle: 2.0 * std::f64::consts::FRAC_PI_3,
            },
            -0.5,
            (-0.3, 0.3),
            (0.3, 0.7),
        ),
    ];
    for (name, kind, hc, y, z) in cases {
        let r: Vec<f64> = [16.0, 32.0, 64.0]
            .iter()
            .map(|d| sheet_residual(&kind, hc, 1.0 / d, y, z))
            .collect();
        let o1 = (r[0] / r[1]).log2();
        let o2 = (r[1] / r[2]).log2();
        // For cap theta=pi/3 the sheet for the descent orientation is the
        // chart-facing one; flow-facing flips the sign of H.
        let ok = (o1 - 2.0).abs() <= 0.3 && (o2 - 2.0).abs() <= 0.3;
        h.check(
            "criterion 1b (exact-solution residual order)",
            ok,
            format!("{name}: orders {o1:.2}, {o2:.2} (2.0 +/- 0.3), residuals {}", fmt_vec(&r)),
        );
    }
}

fn criterion_2(h: &mut Harness) {
    let mut rng = ChaCha8Rng::seed_from_u64(2026);
    let mut worst_accel = 0.0f64;
    let mut worst_gamma = 0.0f64;
    for kind in [KillingFieldKind::Parabolic, KillingFieldKind::Hyperbolic] {
        let field = KillingField::new(kind, 2).unwrap();
        for _ in 0..100 {
            let x = HalfSpacePoint::new(vec![
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.5..2.5),
            ])
            .unwrap();
            worst_accel = worst_accel.max(accel_consistency(&field, &x).unwrap());
            let t = rng.gen_range(-2.0..2.0);
            let g0 = field.gamma_at(&x).unwrap();
            let g1 = field.gamma_at(&field.flow(t, &x).unwrap()).unwrap();
            worst_gamma = worst_gamma.max((g0 - g1).abs() / g0.max(1.0));
        }
    }
    h.check(
        "criterion 2 (Killing identity)",
        worst_accel < 1e-10 && worst_gamma <= 1e-12,
        format!("accel deviation {worst_accel:.2e} (tol 1e-10), gamma flow-drift {worst_gamma:.2e} (tol 1e-12)"),
    );
}

fn criterion_3(h: &mut Harness) {
    let hh = 1.0 / 64.0;
    let suite: Vec<(&str, ModelSurface, f64)> = vec![
        (
            "vertical plane",
            ModelSurface::new(SurfaceKind::VerticalPlane { offset: 0.7 }).unwrap(),
            0.0,
        ),
        (
            "tilted plane",
            ModelSurface::new(SurfaceKind::TiltedPlane {
                offset: 1.0,
                slope: 0.75,
            })
            .unwrap(),
            0.6,
        ),
        (
            "hemisphere",
            ModelSurface::new(SurfaceKind::Hemisphere {
                center: vec![0.0, 0.0],
                radius: 3.0,
            })
            .unwrap(),
            0.0,
        ),
        (
            "cap pi/3",
            ModelSurface::new(SurfaceKind::SphericalCap {
                center: vec![0.0, 0.0],
                radius: 1.0,
                contact_angle: std::f64::consts::FRAC_PI_3,
            })
            .unwrap(),
            0.5,
        ),
        (
            "cap 2pi/3",
            ModelSurface::new(SurfaceKind::SphericalCap {
                center: vec![0.0, 0.0],
                radius: 1.0,
                contact_angle: 2.0 * std::f64::consts::FRAC_PI_3,
            })
            .unwrap(),
            -0.5,
        ),
        (
            "horosphere",
            ModelSurface::new(SurfaceKind::Horosphere { height: 2.0 }).unwrap(),
            1.0,
        ),
    ];
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for (name, surface, expected) in &suite {
        let mesh = sample_surface_mesh(surface, hh).unwrap();
        let stats = curvature_deviation(&mesh, *expected);
        worst = worst.max(stats.max_dev);
        detail.push_str(&format!("{name} {:.1e}; ", stats.max_dev));
    }
    let sphere = sample_sphere_mesh([0.0, 0.0, 2.0], 1.0, hh, true).unwrap();
    let stats = curvature_deviation(&sphere, 2.0);
    worst = worst.max(stats.max_dev);
    detail.push_str(&format!("geodesic sphere {:.1e}", stats.max_dev));
    h.check(
        "criterion 3 (curvature oracle)",
        worst <= 0.01,
        format!("max deviation {worst:.2e} at h=1/64 (tol 0.01): {detail}"),
    );
}

fn criterion_4(h: &mut Harness) {
    let phi = bump();
    for hc in [0.0, 0.3, 0.6] {
        let mut devs = Vec::new();
        let mut res_ok = true;
        for d in [16.0, 32.0, 64.0] {
            let sol = h.solve(&phi, hc, 1.0 / d, SeedChoice::ConstantInf);
            res_ok &= sol.diagnostics.residual_max <= 1e-8;
            devs.push(oracle_dev(&sol));
        }
        let decreasing = devs[1] < devs[0] && devs[2] < devs[1];
        h.check(
            "criterion 4 (end-to-end CMC, parabolic bump)",
            res_ok && devs[2] <= 0.05 && decreasing,
            format!(
                "H={hc}: residuals <= 1e-8: {res_ok}; oracle devs {} (tol 0.05 at 1/64, decreasing)",
                fmt_vec(&devs)
            ),
        );
    }
}

fn criterion_5(h: &mut Harness) {
    let phi = sin_theta();
    for hc in [0.0, 0.3] {
        let mut devs = Vec::new();
        let mut res_ok = true;
        for d in [32.0, 64.0] {
            let sol = h.solve(&phi, hc, 1.0 / d, SeedChoice::ConstantInf);
            res_ok &= sol.diagnostics.residual_max <= 1e-8;
            devs.push(oracle_dev(&sol));
        }
        h.check(
            "criterion 5 (end-to-end CMC, hyperbolic disk)",
            res_ok && devs[1] <= 0.05,
            format!("H={hc}: residuals <= 1e-8: {res_ok}; oracle devs {} (tol 0.05 at 1/64)", fmt_vec(&devs)),
        );
    }
}

fn criterion_6(h: &mut Harness) {
    // Ordered boundary data => ordered solutions.
    let phi_lo = bump();
    let phi_hi = BoundaryGraph::from_preset(PAR, PhiPreset::Bump { a: 1.5, b: 0.5 }).unwrap();
    let hc = 0.3;
    let u1 = h.solve(&phi_lo, hc, 1.0 / 32.0, SeedChoice::ConstantInf);
    let u2 = h.solve(&phi_hi, hc, 1.0 / 32.0, SeedChoice::ConstantInf);
    let rep = compare_solutions(&u1.u, &u2.u).unwrap();
    h.check(
        "criterion 6a (comparison in boundary data)",
        rep.min_diff >= -1e-8,
        format!("min(u2 - u1) = {:.2e} (tol -1e-8)", rep.min_diff),
    );

    // H = 0 vs H = 0.3 at phi = 1.
    let phi = flat(1.0);
    let u0 = h.solve(&phi, 0.0, 1.0 / 32.0, SeedChoice::ConstantInf);
    let u3 = h.solve(&phi, 0.3, 1.0 / 32.0, SeedChoice::ConstantInf);
    let rep = compare_solutions(&u0.u, &u3.u).unwrap();
    h.check(
        "criterion 6b (comparison in H)",
        rep.min_diff >= -1e-8,
        format!("min(u_H=0.3 - u_H=0) = {:.2e} (tol -1e-8)", rep.min_diff),
    );
}

fn criterion_7(h: &mut Harness) {
    // Flat data: the gap closes within two iterations exactly.
    let phi = flat(1.0);
    for hc in [0.0, 0.3, 0.6] {
        let ladder = barrier_sequence(&[0.4], &phi, hc, 12).unwrap();
        let c = &ladder.certificate;
        let ok = c.sub_converged
            && c.sup_converged
            && c.sigma.len() <= 3
            && c.final_gap().abs() <= 1e-9;
        h.check(
            "criterion 7a (flat-data certificate)",
            ok,
            format!(
                "H={hc}: sigma ladder {:?}, final gap {:.2e}",
                c.sigma,
                c.final_gap()
            ),
        );
    }

    // Bump data: strictly decreasing gaps at 5 probes, k <= 10, and the
    // solved u sandwiched at every shared node.
    let phi = bump();
    let sol = h.solve(&phi, 0.0, 1.0 / 32.0, SeedChoice::ConstantInf);
    let mut all_ok = true;
    let mut worst_gap = 0.0f64;
    let mut violations = 0usize;
    for probe in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let ladder = barrier_sequence(&[probe], &phi, 0.0, 10).unwrap();
        let c = &ladder.certificate;
        let gaps: Vec<f64> = c.sigma.iter().zip(&c.w).map(|(s, w)| w - s).collect();
        for g in gaps.windows(2) {
            if g[1] >= g[0] {
                all_ok = false;
            }
        }
        worst_gap = worst_gap.max(*gaps.last().unwrap());
        let rep = sandwich_check(&ladder.sub, &ladder.sup, &sol.u);
        violations += rep.violations;
    }
    h.check(
        "criterion 7b (bump certificates)",
        all_ok && violations == 0,
        format!(
            "gaps strictly decreasing: {all_ok}; final gap max {worst_gap:.2e}; sandwich violations {violations}"
        ),
    );
}

fn criterion_8(h: &mut Harness) {
    let phi = bump();
    let mut errs = Vec::new();
    for d in [16.0, 32.0, 64.0] {
        let sol = h.solve(&phi, 0.0, 1.0 / d, SeedChoice::ConstantInf);
        errs.push(boundary_trace(&sol.u, &phi).unwrap().max_error);
    }
    let ok = errs[1] < errs[0] && errs[2] < errs[1];
    h.check(
        "criterion 8 (boundary attainment)",
        ok,
        format!("trace max errors across eps 1/16,1/32,1/64: {} (monotone decreasing)", fmt_vec(&errs)),
    );
}

fn criterion_9(h: &mut Harness) {
    let mut cases: Vec<(BoundaryGraph, f64, f64)> = Vec::new();
    for hc in [0.0, 0.3, 0.6] {
        cases.push((bump(), hc, 1.0 / 64.0));
    }
    for hc in [0.0, 0.3] {
        cases.push((sin_theta(), hc, 1.0 / 64.0));
    }
    for (phi, hc, hh) in cases {
        let a = h.solve(&phi, hc, hh, SeedChoice::ConstantInf);
        let b = h.solve(&phi, hc, hh, SeedChoice::Barrier);
        let mut worst = 0.0f64;
        for (x, y) in a.u.values.iter().zip(&b.u.values) {
            worst = worst.max((x - y).abs());
        }
        h.check(
            "criterion 9 (empirical uniqueness)",
            worst <= 1e-6,
            format!("{:?} H={hc}: seed difference {worst:.2e} (tol 1e-6)", phi.case),
        );
    }
}

fn criterion_10(h: &mut Harness) {
    let mut cases: Vec<(BoundaryGraph, f64)> = Vec::new();
    for hc in [0.0, 0.3, 0.6] {
        cases.push((bump(), hc));
    }
    for hc in [0.0, 0.3] {
        cases.push((sin_theta(), hc));
    }
    for (phi, hc) in cases {
        let g32 = h
            .solve(&phi, hc, 1.0 / 32.0, SeedChoice::ConstantInf)
            .diagnostics
            .gradient_sup;
        let g64 = h
            .solve(&phi, hc, 1.0 / 64.0, SeedChoice::ConstantInf)
            .diagnostics
            .gradient_sup;
        let drift = (g64 - g32).abs() / g64.max(1e-12);
        h.check(
            "criterion 10 (gradient monitor)",
            drift <= 0.10,
            format!(
                "{:?} H={hc}: sup |grad u| {g32:.4} -> {g64:.4}, drift {:.1}% (tol 10%)",
                phi.case,
                100.0 * drift
            ),
        );
    }
}

fn criterion_11(h: &mut Harness) {
    use hypcmc_core::export::{write_csv, write_json_summary, write_ply, ReportTable};
    let phi = bump();
    let dir = tempfile::tempdir().unwrap();
    let mut files: Vec<(Vec<u8>, Vec<u8>, Vec<u8>)> = Vec::new();
    for run in 0..2 {
        let sol = {
            // Fresh solve each run, bypassing the cache.
            let cfg = SolverConfig {
                truncation: TruncationConfig {
                    eps: 1.0 / 16.0,
                    transverse_extent: 2.0,
                    z_hi: 2.0,
                    h: 1.0 / 16.0,
                },
                ..SolverConfig::default()
            };
            asymptotic_solve_seeded(
                &AsymptoticProblem {
                    phi: phi.clone(),
                    h_curv: 0.3,
                },
                &cfg,
                SeedChoice::ConstantInf,
            )
            .unwrap()
        };
        let trace = boundary_trace(&sol.u, &phi).unwrap();
        let mut table = ReportTable::new(&["probe", "limit", "err"]);
        for i in 0..trace.probes.len() {
            table.push(vec![trace.probes[i], trace.limits[i], trace.errors[i]]);
        }
        let csv_path = dir.path().join(format!("r{run}.csv"));
        write_csv(&table, &csv_path).unwrap();
        let mut summary = BTreeMap::new();
        summary.insert("residual_max".to_string(), sol.diagnostics.residual_max);
        summary.insert("trace_max_err".to_string(), trace.max_error);
        summary.insert("gradient_sup".to_string(), sol.diagnostics.gradient_sup);
        let json_path = dir.path().join(format!("r{run}.json"));
        write_json_summary(&summary, &json_path).unwrap();
        let ply_path = dir.path().join(format!("r{run}.ply"));
        write_ply(&embed_graph(&sol.u).unwrap(), &ply_path).unwrap();
        files.push((
            std::fs::read(&csv_path).unwrap(),
            std::fs::read(&json_path).unwrap(),
            std::fs::read(&ply_path).unwrap(),
        ));
    }
    let ok = files[0] == files[1];
    h.check(
        "criterion 11 (determinism)",
        ok,
        "repeated identical runs produce byte-identical CSV/JSON/PLY reports".to_string(),
    );
}

#[test]
fn acceptance() {
    let mut h = Harness {
        cache: HashMap::new(),
        failures: Vec::new(),
    };
    criterion_1(&mut h);
    criterion_2(&mut h);
    criterion_3(&mut h);
    criterion_4(&mut h);
    criterion_5(&mut h);
    criterion_6(&mut h);
    criterion_7(&mut h);
    criterion_8(&mut h);
    criterion_9(&mut h);
    criterion_10(&mut h);
    criterion_11(&mut h);
    assert!(
        h.failures.is_empty(),
        "acceptance failures:\n{}",
        h.failures.join("\n")
    );
}
