use fsi_split::config::{InterfaceProfile, SimConfig};
use fsi_split::driver::{initialize, run, run_simulation, StopReason};

fn small(n: usize, steps: usize) -> SimConfig {
    let mut cfg = SimConfig::default();
    cfg.domain.nx = n;
    cfg.domain.ny = n;
    cfg.time.dt = 1e-3;
    cfg.time.t_end = steps as f64 * 1e-3;
    cfg.structure.initial_displacement = InterfaceProfile::Sine { tangential: 0.0, normal: 0.02 };
    cfg
}

#[test]
fn short_run_satisfies_the_energy_chain() {
    let cfg = small(6, 6);
    let out = run(&cfg).unwrap();
    assert_eq!(out.summary.stop_reason, StopReason::Completed);
    assert!(!out.summary.failed, "{:?}", out.summary.failures);
    let rows = &out.ledger.rows;
    assert_eq!(rows.len(), 7);
    for w in rows.windows(2) {
        assert!(w[1].e_half <= w[0].e_full + 1e-10);
        assert!(w[1].e_full + w[1].d <= w[1].e_half + 1e-10);
        assert!(w[1].d >= 0.0);
        assert!(w[1].normal_res <= 1e-9);
        assert!(w[1].gcl_res <= 1e-12);
    }
    assert!(out.summary.e_final < out.summary.e0);
}

#[test]
fn runs_are_bitwise_reproducible() {
    let cfg = small(5, 4);
    let a = run(&cfg).unwrap().ledger.to_csv();
    let b = run(&cfg).unwrap().ledger.to_csv();
    assert_eq!(a, b);
}

#[test]
fn stepping_matches_a_full_run() {
    let cfg = small(4, 3);
    let mut sim = initialize(&cfg).unwrap();
    while sim.step < cfg.num_steps() {
        assert!(sim.advance().unwrap());
    }
    let full = run(&cfg).unwrap();
    assert_eq!(sim.ledger.to_csv(), full.ledger.to_csv());
    let mut again = initialize(&cfg).unwrap();
    let s = run_simulation(&mut again, 2, |_| {});
    assert_eq!(s.stop_step, 2);
}
