use std::f64::consts::PI;

use crestwave::evolution::{rk4, run, Stepper};
use crestwave::initdata::{crest_profile, crest_state};
use crestwave::*;

fn random(n: usize, seed: u64, amplitude: f64, symmetric: bool) -> State {
    let d = InitialData::Random { max_mode: Some(n / 8), amplitude, w_amplitude: amplitude, decay: 4.0, seed, symmetric };
    make_ic(&d, n).unwrap()
}

fn integrate(s: &State, t_end: f64, dt: f64) -> State {
    let opts = StateOptions::default();
    let steps = (t_end / dt).round() as usize;
    (0..steps).fold(s.clone(), |s, _| rk4(&s, dt, &opts).unwrap())
}

fn gap(a: &State, b: &State) -> f64 {
    a.w.dist_inf(&b.w).max(a.vbar.dist_inf(&b.vbar))
}

#[test]
fn rk4_converges_at_fourth_order() {
    let s = random(64, 11, 0.05, false);
    let u1 = integrate(&s, 0.4, 0.04);
    let u2 = integrate(&s, 0.4, 0.02);
    let u3 = integrate(&s, 0.4, 0.01);
    let ratio = gap(&u1, &u2) / gap(&u2, &u3);
    assert!((12.0..=20.0).contains(&ratio), "self-convergence ratio {ratio}");
}

#[test]
fn mirror_symmetry_survives_filtered_steps() {
    let n = 64;
    let cfg = RunConfig { grid_n: n, ..RunConfig::default() };
    let stepper = Stepper::from_config(&cfg);
    let mut s = random(n, 5, 0.1, true);
    for i in 0..100 {
        s = stepper.step(&s, 5e-3, i).unwrap().0;
    }
    let mut err: f64 = 0.0;
    for j in 0..n {
        let m = (n - j) % n;
        err = err.max((s.w.at(m) + s.w.at(j).conj()).norm());
        err = err.max((s.vbar.at(m) + s.vbar.at(j).conj()).norm());
    }
    assert!(err < 1e-12, "symmetry defect {err}");
    assert!(s.w.linf_norm() > 1e-3);
}

#[test]
fn runs_are_deterministic() {
    let cfg = RunConfig {
        grid_n: 32,
        t_end: 0.3,
        dt: 0.01,
        ic: InitialData::Random { max_mode: None, amplitude: 0.1, w_amplitude: 0.1, decay: 4.0, seed: 0, symmetric: false },
        seed: Some(99),
        ..RunConfig::default()
    };
    let a = run(&cfg).unwrap();
    let b = run(&cfg).unwrap();
    let rows = |o: &evolution::RunOutput| o.rows.iter().map(|r| r.energy).collect::<Vec<_>>();
    assert_eq!(rows(&a), rows(&b));
    assert_eq!(a.snapshots, b.snapshots);
}

#[test]
fn flat_run_has_constant_rows() {
    let out = run(&RunConfig::default()).unwrap();
    assert_eq!(out.rows.len(), 11);
    assert!(out.rows.iter().all(|r| r.energy.components() == out.rows[0].energy.components()));
}

#[test]
fn crest_profile_vanishes_at_the_corner() {
    let g = Grid::new(1024).unwrap();
    let q = crest_profile(&g, 2.5, CrestLocation::Corner).unwrap();
    assert!(q.at(0).norm() <= 1e-3 * q.linf_norm());
}

#[test]
fn crest_profile_has_the_prescribed_power() {
    let n = 1024;
    let g = Grid::new(n).unwrap();
    let q = crest_profile(&g, 2.5, CrestLocation::Corner).unwrap();
    // the decade of distances h..10h from the corner
    let pts: Vec<(f64, f64)> = (1..=10).map(|m| ((2.0 * m as f64 / n as f64).ln(), q.at(n - m).norm().ln())).collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / 10.0;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / 10.0;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope - 0.6).abs() <= 0.05, "slope {slope}");
}

#[test]
fn crest_state_is_a_holomorphic_rest_state() {
    let g = Grid::new(256).unwrap();
    for r in [1.5, 2.5, 4.0] {
        let s = crest_state(&g, r, CrestLocation::Corner).unwrap();
        assert_eq!(s.vbar.linf_norm(), 0.0);
        // Z(1) - Z(-1) = 2: the mean of Z' is one
        assert!((s.zp().mean() - 1.0).norm() < 1e-12);
    }
}

#[test]
fn small_mode_oscillates_at_linear_frequency() {
    // Re W(0, t) = -3 (eps / omega) sin(omega t) to leading order
    let eps = 1e-5;
    let omega = PI.sqrt();
    let cfg = RunConfig {
        grid_n: 32,
        t_end: 1.0,
        dt: 1e-2,
        ic: InitialData::Mode { k: -1, eps },
        ..RunConfig::default()
    };
    let out = run(&cfg).unwrap();
    for &(t, w) in out.probe.iter().step_by(10) {
        let want = -3.0 * eps / omega * (omega * t).sin();
        assert!((w - want).abs() < 1e-3 * eps, "t = {t}: {w} vs {want}");
    }
}
