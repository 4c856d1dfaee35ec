//! Acceptance harness: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fsi_split::ale::{harmonic_extension, volume_rule};
use fsi_split::config::{parse_config_str, SimConfig};
use fsi_split::diagnostics::{refinement_study, shift_report, Norms, ShiftField};
use fsi_split::driver::{run, RunOutput, StopReason};
use fsi_split::fluid::{gcl_identity_terms, velocity_at_quadrature};
use fsi_split::geometry::{build_reference_mesh, interface_grid, InterfaceGrid, ReferencePolygon};
use fsi_split::shell::{
    assemble_shell_operator, structure_step, verify_structure_identity, StructureParams,
    StructureState,
};

const BENCHMARK: &str = include_str!("../../../configs/free_oscillation.toml");
const POISEUILLE: &str = include_str!("../../../configs/poiseuille.toml");
const DEGENERATE: &str = include_str!("../../../configs/degenerate.toml");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed <= limit
}

fn gcl_probe() -> Outcome {
    let t = Instant::now();
    let mesh = build_reference_mesh(&ReferencePolygon::unit_square_default(), 16, 16).unwrap();
    let nq = mesh.num_cells() * volume_rule().points.len();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let mut field = || -> Vec<[f64; 2]> {
            (0..mesh.num_q2_nodes())
                .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect()
        };
        let u0 = field();
        let u1 = field();
        let j0: Vec<f64> = (0..nq).map(|_| rng.random_range(0.1..2.0)).collect();
        let j1: Vec<f64> = (0..nq).map(|_| rng.random_range(0.1..2.0)).collect();
        let rho = rng.random_range(0.1..10.0);
        let r = gcl_identity_terms(&mesh, &u0, &u1, &j0, &j1, rho).unwrap().residual();
        worst = worst.max(r);
    }
    let el = t.elapsed();
    outcome(
        worst <= 1e-12 && within(el, Duration::from_secs(10)),
        format!("max residual {worst:.3e}, {:.2}s", el.as_secs_f64()),
    )
}

fn structure_probe() -> Outcome {
    let t = Instant::now();
    let mesh = build_reference_mesh(&ReferencePolygon::unit_square_default(), 32, 2).unwrap();
    let grid = interface_grid(&mesh).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let dt = [1e-1, 1e-3, 1e-6][k % 3];
        let params = StructureParams {
            rho_s: rng.random_range(0.1..10.0),
            h: rng.random_range(0.01..1.0),
            bending: [rng.random_range(0.1..10.0), rng.random_range(0.1..10.0)],
            coercivity_c: 1.0,
        };
        let op = assemble_shell_operator(&params, &grid).unwrap();
        let mut draw = || -> Vec<f64> {
            (0..grid.num_dofs())
                .map(|d| if grid.is_clamped_dof(d) { 0.0 } else { rng.random_range(-1.0..1.0) })
                .collect()
        };
        let pre = StructureState::new(&grid, draw(), draw()).unwrap();
        let post = structure_step(&op, &pre, dt, &params).unwrap();
        worst = worst.max(verify_structure_identity(&op, &params, &pre, &post));
    }
    let el = t.elapsed();
    outcome(
        worst <= 1e-10 && within(el, Duration::from_secs(10)),
        format!("max residual {worst:.3e}, {:.2}s", el.as_secs_f64()),
    )
}

fn benchmark_config() -> SimConfig {
    parse_config_str(BENCHMARK).unwrap()
}

fn energy_chain(out: &RunOutput, elapsed: Duration) -> Outcome {
    let rows = &out.ledger.rows;
    let mut worst: f64 = f64::INFINITY;
    for w in rows.windows(2) {
        let (prev, r) = (&w[0], &w[1]);
        let fluid = r.e_half - (r.e_full + r.d);
        let structure = prev.e_full - r.e_half;
        worst = worst.min(fluid).min(structure);
    }
    let e0 = out.ledger.e0();
    let e_end = rows.last().unwrap().e_full;
    let complete = out.summary.stop_reason == StopReason::Completed && rows.len() == 201;
    outcome(
        complete && worst >= -1e-10 && e_end <= e0 && within(elapsed, Duration::from_secs(300)),
        format!(
            "min slack {worst:.3e}, E200/E0 = {:.6}, {} rows, {:.1}s",
            e_end / e0,
            rows.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn telescoped(out: &RunOutput) -> Outcome {
    let bound = 2.0 * out.ledger.e0() + 1e-9;
    let s = out.ledger.telescoped_sums();
    outcome(
        s.iter().all(|&x| x <= bound),
        format!(
            "sums [{:.3e}, {:.3e}, {:.3e}, {:.3e}] vs bound {bound:.3e}",
            s[0], s[1], s[2], s[3]
        ),
    )
}

fn shift_scaling(out: &RunOutput, cfg: &SimConfig) -> Outcome {
    let dt = cfg.time.dt;
    let hs: Vec<f64> = [1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|k| k * dt).collect();
    let norms = Norms::for_config(cfg).unwrap();
    let fields = [ShiftField::U, ShiftField::V, ShiftField::VStar, ShiftField::EtaTilde];
    match shift_report(&out.trajectory, &norms, &fields, &hs) {
        Ok(rep) => {
            let betas: Vec<(ShiftField, f64)> =
                fields.iter().map(|&f| (f, rep.fit(f).unwrap().beta)).collect();
            let text: Vec<String> =
                betas.iter().map(|(f, b)| format!("{}={b:.3}", f.name())).collect();
            outcome(betas.iter().all(|(_, b)| *b >= 0.45), format!("beta {}", text.join(" ")))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn extension_oracle() -> Outcome {
    let t = Instant::now();
    let eps = 0.05;
    let err = |n: usize| -> f64 {
        let mesh = build_reference_mesh(&ReferencePolygon::unit_square_default(), n, n).unwrap();
        let grid = interface_grid(&mesh).unwrap();
        let mut eta =
            grid.interpolate(|z| ([0.0, eps * (PI * z).sin()], [0.0, eps * PI * (PI * z).cos()]));
        for k in [0, grid.num_nodes() - 1] {
            eta[InterfaceGrid::dof(k, 1, 0)] = 0.0;
        }
        let map = harmonic_extension(&eta, &mesh, &grid).unwrap();
        mesh.nodes
            .iter()
            .zip(&map.displacement)
            .map(|(p, b)| (b[1] - eps * (PI * p[0]).sin() * (PI * p[1]).sinh() / PI.sinh()).abs())
            .fold(0.0, f64::max)
    };
    let e: Vec<f64> = [8, 16, 32].iter().map(|&n| err(n)).collect();
    let orders: Vec<f64> = e.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let el = t.elapsed();
    outcome(
        orders.iter().all(|o| (o - 2.0).abs() <= 0.2) && within(el, Duration::from_secs(60)),
        format!("orders {:.3} {:.3}, {:.2}s", orders[0], orders[1], el.as_secs_f64()),
    )
}

fn poiseuille() -> Outcome {
    let t = Instant::now();
    let cfg = parse_config_str(POISEUILLE).unwrap();
    let out = match run(&cfg) {
        Ok(o) => o,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mesh = build_reference_mesh(&cfg.polygon().unwrap(), cfg.domain.nx, cfg.domain.ny).unwrap();
    let dp = 0.1;
    let (len, height) = (1.0, 1.0);
    let (mu, aw) = (cfg.fluid.mu, cfg.fluid.alpha_wall);
    let exact = |r: f64| dp / (2.0 * mu * len) * (r * (height - r) + aw * mu * height);
    let u = &out.trajectory.snapshots.last().unwrap().u;
    let uq = velocity_at_quadrature(&mesh, u);
    let rule = volume_rule();
    let (mut num, mut den) = (0.0, 0.0);
    for c in 0..mesh.num_cells() {
        let (_, size) = mesh.cell_box(c);
        for (k, (p, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let x = mesh.map_point(c, *p);
            let wq = w * 0.25 * size[0] * size[1];
            let uh = uq[c * rule.points.len() + k];
            let ue = exact(x[1]);
            num += wq * ((uh[0] - ue).powi(2) + uh[1] * uh[1]);
            den += wq * ue * ue;
        }
    }
    let rel = (num / den).sqrt();
    let el = t.elapsed();
    outcome(
        rel <= 0.02 && within(el, Duration::from_secs(120)),
        format!("relative L2 error {rel:.3e}, {:.1}s", el.as_secs_f64()),
    )
}

fn degeneration() -> Outcome {
    let cfg = parse_config_str(DEGENERATE).unwrap();
    match run(&cfg) {
        Ok(out) => {
            let s = &out.summary;
            let recorded = s.min_j <= cfg.guards.j_floor || s.min_injectivity_margin <= 0.0;
            outcome(
                s.stop_reason == StopReason::DomainDegenerate && s.stop_step <= 2 && recorded,
                format!(
                    "stop {:?} at step {}, j_min {:.3e}, margin {:.3e}",
                    s.stop_reason, s.stop_step, s.min_j, s.min_injectivity_margin
                ),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn refinement(cfg: &SimConfig) -> Outcome {
    let t = Instant::now();
    let dts: Vec<f64> = (0..5).map(|k| cfg.time.dt / f64::powi(2.0, k)).collect();
    match refinement_study(cfg, &dts) {
        Ok(table) => {
            let col: Vec<String> = table.rows.iter().map(|r| format!("{:.3e}", r.diff_u)).collect();
            outcome(
                table.rows.len() == 4 && table.strictly_decreasing(),
                format!("diff_u [{}], {:.0}s", col.join(", "), t.elapsed().as_secs_f64()),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn determinism(first: &RunOutput, cfg: &SimConfig) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, out: &RunOutput| {
        let p = dir.path().join(name);
        std::fs::write(&p, out.ledger.to_csv()).unwrap();
        std::fs::read(&p).unwrap()
    };
    let a = write("a.csv", first);
    let second = run(cfg).unwrap();
    let b = write("b.csv", &second);
    outcome(a == b, format!("{} bytes, identical = {}", a.len(), a == b))
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |k: usize, name: &'static str, o: Outcome| {
        println!("criterion {k:>2} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((k, name, o));
    };
    report(1, "GCL identity", gcl_probe());
    report(2, "structure energy identity", structure_probe());

    let cfg = benchmark_config();
    let t = Instant::now();
    let bench = run(&cfg).expect("benchmark run");
    let elapsed = t.elapsed();
    report(3, "energy decay chain", energy_chain(&bench, elapsed));
    report(4, "telescoped differences", telescoped(&bench));
    report(5, "time-shift scaling", shift_scaling(&bench, &cfg));
    report(6, "harmonic extension oracle", extension_oracle());
    report(7, "Navier-slip Poiseuille", poiseuille());
    report(8, "domain degeneration guard", degeneration());
    report(9, "refinement Cauchy study", refinement(&cfg));
    report(10, "determinism", determinism(&bench, &cfg));

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
