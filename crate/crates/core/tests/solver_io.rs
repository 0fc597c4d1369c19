mod common;

use std::fs;

use proptest::prelude::*;
use qfslbm::benchmarks::{taylor_green_exact, Case, ReferenceProfile, T_COLD, T_HOT};
use qfslbm::io::{
    config_to_text, execute, parse_config, parse_snapshot_csv, parse_snapshot_vtk,
    read_convergence_csv, snapshot_csv, snapshot_vtk, write_snapshot_csv, RunSummary,
};
use qfslbm::kernels::{Grid, MacroState, LATTICE_CS2};
use qfslbm::solver::{
    derive_params, residual, run, LengthConvention, Method, RunConfig, RunStatus, Solver,
};

fn sum(v: &[f64]) -> f64 {
    v.iter().sum()
}

#[test]
fn derived_parameter_examples() {
    let mut c = RunConfig::new(Case::Cavity2d, Method::ClassicalFs, 16);
    c.length = LengthConvention::Nodes;
    assert!((derive_params(&c).unwrap().nu - 0.1 * 16.0 / 100.0).abs() < 1e-15);
    let mut nc = RunConfig::new(Case::Nc2d, Method::ClassicalFs, 64);
    nc.length = LengthConvention::Nodes;
    let p = derive_params(&nc).unwrap();
    let oracle = (0.71f64 * 1e-5 * 262144.0 / 1000.0).sqrt();
    assert!((p.nu - oracle).abs() < 1e-15);
    assert!((p.kappa - oracle / 0.71).abs() < 1e-15);
    assert_eq!(p.t_mean, 0.5 * (T_HOT + T_COLD));
}

#[test]
fn intrinsic_viscosity_fs_matches_lks_with_zero_constants() {
    let mut fs = RunConfig::new(Case::Tg2d, Method::ClassicalFs, 16);
    fs.nu = Some(LATTICE_CS2 / 2.0);
    let mut lks = fs.clone();
    lks.method = Method::ClassicalLks;
    assert_eq!(derive_params(&lks).unwrap().lks, Some((0.0, 0.0)));
    let a = run(&fs).unwrap();
    let b = run(&lks).unwrap();
    assert_eq!(a.state, b.state);
}

#[test]
fn quantum_matches_classical_on_walled_cases() {
    for (case, n, steps) in [
        (Case::Cavity2d, 16, 60),
        (Case::Nc2d, 16, 60),
        (Case::Nc3d, 8, 10),
    ] {
        // CD is unstable for the small thermal grid and would amplify roundoff
        let mut cc = RunConfig::new(case, Method::ClassicalFs, n);
        cc.stencil = Some(qfslbm::Stencil::Ss);
        for method in [Method::QuantumFsI, Method::QuantumFsII] {
            let mut qc = cc.clone();
            qc.method = method;
            let mut c = Solver::new(&cc, None).unwrap();
            let mut q = Solver::new(&qc, None).unwrap();
            for _ in 0..steps {
                let rc = c.step().unwrap();
                let rq = q.step().unwrap();
                assert!(
                    (rc - rq).abs() <= 1e-8 * rc.abs().max(1e-30),
                    "{case} {method}: {rc} vs {rq}"
                );
            }
            let d = common::max_abs_diff(c.state().u.component(0), q.state().u.component(0));
            assert!(d < 1e-12, "{case} {method}: {d}");
        }
    }
}

#[test]
fn lks_quantum_matches_classical_lks() {
    let cc = RunConfig::new(Case::Nc2d, Method::ClassicalLks, 16);
    for method in [Method::QuantumLksI, Method::QuantumLksII] {
        let mut qc = cc.clone();
        qc.method = method;
        let mut c = Solver::new(&cc, None).unwrap();
        let mut q = Solver::new(&qc, None).unwrap();
        for _ in 0..40 {
            c.step().unwrap();
            q.step().unwrap();
        }
        let t = |s: &Solver| s.state().temperature.clone().unwrap();
        assert!(common::max_abs_diff(t(&c).values(), t(&q).values()) < 1e-12);
        assert!(common::max_abs_diff(c.state().u.component(1), q.state().u.component(1)) < 1e-12);
    }
}

#[test]
fn taylor_green_horizon_is_ceiling() {
    for n in [8, 16] {
        let mut c = RunConfig::new(Case::Tg2d, Method::ClassicalFs, n);
        c.u_ref = 0.03;
        let out = run(&c).unwrap();
        let expected = (1.0 * (n as f64 / 2.0) / 0.03_f64).ceil() as usize;
        assert_eq!(out.log.steps(), expected);
        assert_eq!(out.status(), RunStatus::Completed);
    }
}

#[test]
fn cavity_converges_and_stops_below_epsilon() {
    let mut c = RunConfig::new(Case::Cavity2d, Method::ClassicalFs, 16);
    c.epsilon = Some(1e-5);
    let out = run(&c).unwrap();
    assert_eq!(out.status(), RunStatus::Converged);
    let rs: Vec<f64> = out.log.records.iter().map(|r| r.residual).collect();
    assert!(*rs.last().unwrap() < 1e-5);
    assert!(rs[..rs.len() - 1].iter().all(|&r| r >= 1e-5));
    assert!(rs.iter().all(|r| r.is_finite() && *r >= 0.0));
}

#[test]
fn max_steps_is_reported() {
    let mut c = RunConfig::new(Case::Cavity2d, Method::ClassicalFs, 16);
    c.max_steps = 25;
    let out = run(&c).unwrap();
    assert_eq!(out.status(), RunStatus::MaxSteps);
    assert_eq!(out.log.steps(), 25);
}

#[test]
fn divergence_keeps_last_good_state() {
    // A lid at 0.5 pushes the flow past the sound speed within a few steps.
    let mut c = RunConfig::new(Case::Cavity2d, Method::ClassicalFs, 16);
    c.u_ref = 0.5;
    c.re = Some(1e6);
    c.stencil = Some(qfslbm::Stencil::Cd);
    let out = run(&c).unwrap();
    assert_eq!(out.status(), RunStatus::Diverged);
    assert!(out.log.reason.is_some());
    assert!(out.state.is_finite());
}

#[test]
fn summary_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = RunConfig::new(Case::Nc2d, Method::ClassicalFs, 16);
    c.max_steps = 300;
    c.log_every = 10;
    c.snapshot_every = 100;
    c.vtk = true;
    c.out_dir = Some(dir.path().join("a"));
    let (_, s1) = execute(&c).unwrap();
    let read = RunSummary::read(&dir.path().join("a/summary.json")).unwrap();
    assert_eq!(read, s1);
    let mut again = read.config.clone();
    again.out_dir = Some(dir.path().join("b"));
    let (_, s2) = execute(&again).unwrap();
    assert_eq!(s2.metrics, s1.metrics);
    for f in [
        "convergence.csv",
        "field_final.csv",
        "field_00000200.csv",
        "field_final.vtk",
    ] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
    }
    let rows = read_convergence_csv(&dir.path().join("a/convergence.csv")).unwrap();
    assert_eq!(rows.len(), 30);
    assert_eq!(rows.last().unwrap().0, 300);
    assert!(rows.iter().all(|r| r.2.is_some()));
    let echo = fs::read_to_string(dir.path().join("a/config.txt")).unwrap();
    assert_eq!(echo, config_to_text(&c));
    let state =
        qfslbm::io::read_snapshot_csv(&dir.path().join("a/field_final.csv"), Some(&[16, 16]))
            .unwrap();
    let vtk = qfslbm::io::read_snapshot_vtk(&dir.path().join("a/field_final.vtk")).unwrap();
    assert_eq!(state, vtk);
}

#[test]
fn diverged_status_reaches_summary() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = RunConfig::new(Case::Cavity2d, Method::ClassicalFs, 16);
    c.u_ref = 0.5;
    c.re = Some(1e6);
    c.stencil = Some(qfslbm::Stencil::Cd);
    c.out_dir = Some(dir.path().to_path_buf());
    let (_, s) = execute(&c).unwrap();
    assert_eq!(s.status, RunStatus::Diverged);
    let text = fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(text.contains("\"diverged\""));
}

#[test]
fn custom_case_runs_from_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::periodic(&[8, 8]).unwrap();
    let state = common::random_state(grid, 0.02, false, &mut common::rng(3));
    let path = dir.path().join("init.csv");
    write_snapshot_csv(&state, &path).unwrap();
    let cfg = parse_config(
        "case = custom\nshape = 8x8\nnu = 0.05\nmax_steps = 5\ninitial = init.csv\n",
        Some(dir.path()),
    )
    .unwrap();
    let out = run(&cfg).unwrap();
    assert_eq!(out.log.steps(), 5);
    let m0 = sum(state.rho.values());
    assert!((sum(out.state.rho.values()) - m0).abs() / m0 < 1e-12);
}

#[test]
fn initial_taylor_green_snapshot_matches_exact() {
    let cfg = RunConfig::new(Case::Tg2d, Method::ClassicalFs, 16);
    let s = Solver::new(&cfg, None).unwrap();
    let back = parse_snapshot_csv(&snapshot_csv(s.state())).unwrap();
    let exact = taylor_green_exact(s.grid(), 0.0, cfg.u_ref, 8.0, 10.0, 1.0, LATTICE_CS2).unwrap();
    for d in 0..2 {
        assert!(common::max_abs_diff(back.u.component(d), exact.u.component(d)) <= 1e-15);
    }
    assert!(common::max_abs_diff(back.rho.values(), exact.rho.values()) <= 1e-15);
}

#[test]
fn shipped_reference_profiles_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    for f in [
        "cavity_re100_u.txt",
        "cavity_re100_v.txt",
        "cavity_re1000_u.txt",
        "cavity_re1000_v.txt",
    ] {
        let p = ReferenceProfile::read(&dir.join(f)).unwrap();
        assert_eq!(p.coords.len(), 17, "{f}");
        assert!(p.source.contains("1982"));
        assert_eq!(p.coords[0], 0.0);
        assert_eq!(p.values[0], 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn snapshots_round_trip(seed in any::<u64>(), thermal in any::<bool>(), three_d in any::<bool>()) {
        let shape: &[usize] = if three_d { &[4, 5, 4] } else { &[6, 4] };
        let grid = Grid::periodic(shape).unwrap();
        let s = common::random_state(grid, 0.1, thermal, &mut common::rng(seed));
        prop_assert_eq!(&parse_snapshot_csv(&snapshot_csv(&s)).unwrap(), &s);
        prop_assert_eq!(&parse_snapshot_vtk(&snapshot_vtk(&s)).unwrap(), &s);
    }

    #[test]
    fn residual_scaling(seed in any::<u64>(), c in 0.1f64..4.0) {
        let grid = Grid::periodic(&[4, 4]).unwrap();
        let a = common::random_state(grid, 0.1, false, &mut common::rng(seed));
        let mut b = a.clone();
        for d in 0..2 {
            b.u.component_mut(d).iter_mut().for_each(|v| *v *= c);
        }
        prop_assert_eq!(residual(&a, &a, false).unwrap(), 0.0);
        let r = residual(&a, &b, false).unwrap();
        prop_assert!((r - (c - 1.0).abs() / c).abs() < 1e-12);
    }

    #[test]
    fn periodic_mass_is_conserved(seed in any::<u64>(), quantum in any::<bool>()) {
        let grid = Grid::periodic(&[8, 8]).unwrap();
        let state = common::random_state(grid, 0.05, false, &mut common::rng(seed));
        let mut cfg = RunConfig::new(Case::Tg2d, if quantum { Method::QuantumFsII } else { Method::ClassicalFs }, 8);
        cfg.nu = Some(0.05);
        let params = derive_params(&cfg).unwrap();
        let mut s = Solver::from_state(&cfg, params, None, state, None).unwrap();
        let m0 = sum(s.state().rho.values());
        for _ in 0..5 {
            s.step().unwrap();
            let m = sum(s.state().rho.values());
            prop_assert!(((m - m0) / m0).abs() < 1e-12);
        }
    }

    #[test]
    fn config_text_round_trips(n in prop::sample::select(vec![8usize, 16, 32]), re in 1.0f64..5000.0, eps in 1e-9f64..1e-3) {
        let mut c = RunConfig::new(Case::Cavity2d, Method::QuantumFsI, n);
        c.re = Some(re);
        c.epsilon = Some(eps);
        prop_assert_eq!(parse_config(&config_to_text(&c), None).unwrap(), c);
    }
}

#[test]
fn uniform_snapshot_has_constant_columns() {
    let grid = Grid::periodic(&[4, 4]).unwrap();
    let text = snapshot_csv(&MacroState::at_rest(grid, Some(1.5)));
    for line in text.lines().skip(2) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(&cols[2..], ["1.0", "0.0", "0.0", "1.5"]);
    }
}
