//! Acceptance criteria. Each test prints one PASS/FAIL line to stderr
//! (written directly, so it shows even when output is captured) and then
//! asserts.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex;

use crestwave::evolution::{run, Stepper};
use crestwave::kernels::hilbert_pv;
use crestwave::state::{compute_a1, compute_a1_double_integral, compute_b, compute_b_direct};
use crestwave::verify::{self, VerifyReport};
use crestwave::*;

const SEED: u64 = 20240611;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[acceptance] criterion {id:>2} {tag} {name}: {detail}");
}

fn worst(rep: &VerifyReport) -> String {
    rep.records
        .iter()
        .map(|r| format!("{}={:.3e}{}", r.check_id, r.value, if r.pass { "" } else { "(fail)" }))
        .collect::<Vec<_>>()
        .join(" ")
}

fn mode_state(n: usize, eps: f64) -> State {
    make_ic(&InitialData::Mode { k: -1, eps }, n).unwrap()
}

fn random_holomorphic(n: usize, seed: u64, amplitude: f64) -> State {
    let d = InitialData::Random {
        max_mode: Some(n / 8),
        amplitude,
        w_amplitude: amplitude,
        decay: 4.0,
        seed,
        symmetric: false,
    };
    make_ic(&d, n).unwrap()
}

#[test]
fn criterion_01_hilbert_fidelity() {
    let n = 256;
    let g = Grid::new(n).unwrap();
    let fam = initdata::RandomFamily::fields(n);
    let mut rng = initdata::rng(SEED);
    let mut err: f64 = 0.0;
    for _ in 0..50 {
        let f = fam.field(&g, &mut rng).unwrap();
        err = err.max(hilbert_pv(&f).dist_inf(&f.hilbert()));
    }
    let s = Field::from_real_fn(&g, |a| (PI * a).sin());
    let want = Field::from_fn(&g, |a| Complex::new(0.0, (PI * a).cos()));
    let sine = s.hilbert().dist_inf(&want);
    let pass = err <= 1e-8 && sine <= 1e-8;
    report(1, "Hilbert fidelity", pass, &format!("multiplier vs pv {err:.2e}, H sin - i cos {sine:.2e}"));
    assert!(pass);
}

#[test]
fn criterion_02_a1_exactness() {
    let eps = 0.01;
    let s = mode_state(128, eps);
    let opts = StateOptions::default();
    let want = 1.0 + PI * 1e-4;
    let a = compute_a1(&s, &opts).unwrap();
    let b = compute_a1_double_integral(&s).unwrap();
    let e1 = a.samples().iter().map(|z| (z - want).norm()).fold(0.0, f64::max);
    let e2 = b.samples().iter().map(|z| (z - want).norm()).fold(0.0, f64::max);
    let mut min_a1 = f64::INFINITY;
    for i in 0..200u64 {
        let amp = 0.05 + 0.25 * (i % 10) as f64 / 9.0;
        let s = random_holomorphic(128, SEED + i, amp);
        min_a1 = min_a1.min(compute_a1(&s, &opts).unwrap().min_re());
    }
    let pass = e1 <= 1e-9 && e2 <= 1e-9 && min_a1 >= 1.0 - 1e-9;
    report(2, "A1 exactness", pass, &format!("commutator {e1:.2e}, double integral {e2:.2e}, min A1 over 200 states {min_a1:.12}"));
    assert!(pass);
}

#[test]
fn criterion_03_b_field() {
    let eps = 0.01;
    let n = 128;
    let opts = StateOptions::default();
    let s = mode_state(n, eps);
    let g = s.grid().clone();
    let want = Field::from_real_fn(&g, |a| 2.0 * eps * (1.0 + (PI * a).cos()));
    let fb = compute_b(&s, &opts).unwrap();
    let closed = fb.b.dist_inf(&want);
    let mut paths: f64 = fb.b.dist_inf(&compute_b_direct(&s, &opts).unwrap());
    let mut imag: f64 = fb.b.max_abs_imag();
    for i in 0..20u64 {
        let s = random_holomorphic(n, SEED + 500 + i, 0.2);
        let a = compute_b(&s, &opts).unwrap().b;
        let b = compute_b_direct(&s, &opts).unwrap();
        paths = paths.max(a.dist_inf(&b));
        imag = imag.max(a.max_abs_imag()).max(b.max_abs_imag());
    }
    let pass = closed <= 1e-8 && paths <= 1e-8 && imag <= 1e-10;
    report(3, "b field", pass, &format!("closed form {closed:.2e}, two paths {paths:.2e}, Im b {imag:.1e}"));
    assert!(pass);
}

#[test]
fn criterion_04_rest_fixed_point() {
    let cfg = RunConfig { grid_n: 128, ..RunConfig::default() };
    let stepper = Stepper::from_config(&cfg);
    let g = Grid::new(128).unwrap();
    let mut s = State::rest(&g);
    for i in 0..1000 {
        s = stepper.step(&s, 1e-3, i).unwrap().0;
    }
    let size = s.w.linf_norm() + s.vbar.linf_norm();
    let pass = size <= 1e-12;
    report(4, "flat rest is fixed", pass, &format!("|W| + |Vbar| after 1000 steps = {size:.1e}"));
    assert!(pass);
}

#[test]
fn criterion_05_linear_dispersion() {
    let cfg = RunConfig {
        grid_n: 128,
        t_end: 8.0,
        dt: 1e-2,
        output_cadence: 0.5,
        ic: InitialData::Mode { k: -1, eps: 1e-4 },
        ..RunConfig::default()
    };
    let out = run(&cfg).unwrap();
    assert!(out.error.is_none());
    let want = 2.0 * PI.sqrt();
    let got = out.summary.measured_period.unwrap_or(f64::NAN);
    let rel = (got - want).abs() / want;
    let pass = rel <= 0.01;
    report(5, "linear dispersion", pass, &format!("period {got:.6} vs {want:.6}, rel err {rel:.1e}"));
    assert!(pass);
}

#[test]
fn criterion_06_energy_monitor() {
    let cfg_at = |n: usize| RunConfig {
        grid_n: n,
        t_end: 2.0,
        dt: 1e-3,
        output_cadence: 0.05,
        ic: InitialData::Mode { k: -1, eps: 0.05 },
        ..RunConfig::default()
    };
    let coarse = run(&cfg_at(256)).unwrap();
    let fine = run(&cfg_at(512)).unwrap();
    assert!(coarse.error.is_none() && fine.error.is_none());
    let (lo, hi) = (coarse.summary.energy_ratio_min, coarse.summary.energy_ratio_max);
    let (b1, b2) = (coarse.summary.energy_growth_bound, fine.summary.energy_growth_bound);
    let pass = lo >= 0.5 && hi <= 2.0 && b2.is_finite() && b2 <= 1.5 * b1;
    report(
        6,
        "energy monitor",
        pass,
        &format!("E/E0 in [{lo:.4}, {hi:.4}], growth bound p={} n=256 {b1:.4e} n=512 {b2:.4e}", coarse.summary.monitor_power),
    );
    assert!(pass);
}

#[test]
fn criterion_07_identity_suite() {
    let rep = verify::check_identities(256, 100, SEED).unwrap();
    let pass = rep.all_pass() && rep.records.iter().all(|r| r.value <= 1e-8);
    report(7, "identity suite", pass, &worst(&rep));
    assert!(pass);
}

#[test]
fn criterion_08_inequality_suite() {
    let rep = verify::check_inequalities(256, 100, SEED).unwrap();
    let detail = rep
        .records
        .iter()
        .map(|r| format!("{} {:.3}->{:.3}", r.check_id, r.reference.unwrap_or(f64::NAN), r.value))
        .collect::<Vec<_>>()
        .join(", ");
    let pass = rep.all_pass();
    report(8, "inequality suite", pass, &detail);
    assert!(pass);
}

#[test]
fn criterion_09_crest_angle_classification() {
    let n_list = [128, 256, 512, 1024, 2048];
    let scans = verify::crest_angle_scan(&[1.5, 2.5], &n_list).unwrap();
    let steep = scans[0].ratios(false);
    let gentle = scans[1].ratios(false);
    // growth of the first norm on every refinement, as stated
    let steep_ok = steep.iter().all(|r| *r >= 1.3);
    let gentle_ok = gentle.iter().all(|r| *r <= 1.1);
    let pass = steep_ok && gentle_ok;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    report(
        9,
        "crest angle classification",
        pass,
        &format!(
            "r=1.5 norm1 ratios [{}] (need >= 1.3), norm2 ratios [{}], class {}; r=2.5 norm1 ratios [{}] (need <= 1.1), class {}",
            fmt(&steep),
            fmt(&scans[0].ratios(true)),
            scans[0].classification.as_str(),
            fmt(&gentle),
            scans[1].classification.as_str()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_a1_transport() {
    let rep = verify::check_a1_transport(128, 0.05, &[0.04, 0.02, 0.01], SEED).unwrap();
    let e: Vec<f64> = rep.records.iter().map(|r| r.value).collect();
    let ratios: Vec<f64> = e.windows(2).map(|w| w[0] / w[1]).collect();
    let quartering = ratios.iter().all(|r| (3.0..=5.5).contains(r));
    let bound = e.iter().zip([0.04f64, 0.02, 0.01]).all(|(err, h)| *err <= 1e-3 * h * h + 1e-6);
    let pass = quartering && bound;
    report(10, "A1 transport", pass, &format!("errors [{}], ratios {ratios:.3?}", e.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ")));
    assert!(pass);
}

#[test]
fn criterion_11_characterization_comparability() {
    let rep = verify::check_characterization(256, 50, SEED).unwrap();
    let detail = rep
        .records
        .iter()
        .map(|r| format!("{} n=256 {:.4e} n=512 {:.4e}", r.check_id, r.reference.unwrap_or(f64::NAN), r.value))
        .collect::<Vec<_>>()
        .join(", ");
    let pass = rep.all_pass();
    report(11, "characterization comparability", pass, &detail);
    assert!(pass);
}
