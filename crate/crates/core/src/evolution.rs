//! Time integration of `(W, Vbar)` in the Riemannian frame.
//!
//! Frame derivatives are `W_t = Z_t - b Z'` and `Vbar_t = Zbar_tt - b Vbar'`.
//! Each step is classical RK4 followed by an exponential filter and a
//! projection back onto holomorphic data.

use std::time::Instant;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::energy::{energy, EnergyReport};
use crate::error::{Error, Result};
use crate::grid::PeriodicGrid;
use crate::initdata::{make_ic_on, InitialData};
use crate::scalar::Real;
use crate::spectral::SpectralField;
use crate::state::{compute_a1, derive, enforce_holomorphic, kinematics, InterfaceState, StateOptions, Tolerances};

type Field<T> = SpectralField<T>;

pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid_n: usize,
    /// Fixed step. Ignored when `cfl` is set.
    pub dt: f64,
    pub cfl: Option<f64>,
    pub t_end: f64,
    pub filter_order: u32,
    pub filter_strength: f64,
    pub reproject_every: usize,
    pub output_cadence: f64,
    /// Times at which snapshots are written; `t_end` is always included.
    pub snapshot_times: Vec<f64>,
    pub ic: InitialData,
    pub anchor_alpha0: f64,
    /// Overrides the seed of a random initial state when set.
    pub seed: Option<u64>,
    /// Grid point whose `Re W` is recorded every step.
    pub probe_alpha: f64,
    /// Exponent in the energy-growth monitor `|dE/dt| / (1 + E)^p`.
    pub monitor_power: f64,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid_n: 128,
            dt: 1e-3,
            cfl: None,
            t_end: 1.0,
            filter_order: 36,
            filter_strength: 36.0,
            reproject_every: 1,
            output_cadence: 0.1,
            snapshot_times: vec![0.0],
            ic: InitialData::Flat,
            anchor_alpha0: 0.0,
            seed: None,
            probe_alpha: 0.0,
            monitor_power: 2.0,
            tolerances: Tolerances::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.grid_n < 8 || !self.grid_n.is_power_of_two() {
            return bad(format!("grid_n = {} must be a power of two >= 8", self.grid_n));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return bad(format!("t_end = {} must be positive", self.t_end));
        }
        match self.cfl {
            Some(c) if !(c > 0.0) => return bad(format!("cfl = {c} must be positive")),
            None if !(self.dt > 0.0) => return bad(format!("dt = {} must be positive", self.dt)),
            _ => {}
        }
        if !(self.output_cadence > 0.0) {
            return bad(format!("output_cadence = {} must be positive", self.output_cadence));
        }
        if self.reproject_every == 0 {
            return bad("reproject_every must be at least 1".into());
        }
        let n = self.grid_n as f64;
        for (name, a) in [("anchor_alpha0", self.anchor_alpha0), ("probe_alpha", self.probe_alpha)] {
            let x = (a + 1.0) * n / 2.0;
            if (x - x.round()).abs() > 1e-9 {
                return bad(format!("{name} = {a} is not a grid point"));
            }
        }
        Ok(())
    }

    /// Initial data with the run seed applied.
    pub fn initial_data(&self) -> InitialData {
        match (&self.ic, self.seed) {
            (InitialData::Random { max_mode, amplitude, w_amplitude, decay, symmetric, .. }, Some(seed)) => {
                InitialData::Random {
                    max_mode: *max_mode,
                    amplitude: *amplitude,
                    w_amplitude: *w_amplitude,
                    decay: *decay,
                    seed,
                    symmetric: *symmetric,
                }
            }
            (ic, _) => ic.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub format_version: u32,
    pub t: f64,
    pub grid_n: usize,
    #[serde(rename = "W")]
    pub w: Vec<[f64; 2]>,
    #[serde(rename = "Vbar")]
    pub vbar: Vec<[f64; 2]>,
}

impl Snapshot {
    pub fn of<T: Real>(s: &InterfaceState<T>) -> Self {
        let pack = |f: &Field<T>| f.samples().iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect();
        Self { format_version: SNAPSHOT_FORMAT_VERSION, t: s.t.as_f64(), grid_n: s.len(), w: pack(&s.w), vbar: pack(&s.vbar) }
    }

    pub fn to_state<T: Real>(&self) -> Result<InterfaceState<T>> {
        if self.w.len() != self.grid_n || self.vbar.len() != self.grid_n {
            return Err(Error::SampleCount { expected: self.grid_n, got: self.w.len().min(self.vbar.len()) });
        }
        if self.w.iter().chain(&self.vbar).flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInitialData("snapshot contains non-finite samples".into()));
        }
        let grid = PeriodicGrid::new(self.grid_n)?;
        let unpack = |v: &[[f64; 2]]| v.iter().map(|p| Complex::new(T::lit(p[0]), T::lit(p[1]))).collect();
        InterfaceState::new(
            Field::from_samples(&grid, unpack(&self.w))?,
            Field::from_samples(&grid, unpack(&self.vbar))?,
            T::lit(self.t),
        )
    }
}

/// Frame time derivatives `(W_t, Vbar_t)`.
pub fn rhs<T: Real>(s: &InterfaceState<T>, opts: &StateOptions) -> Result<(Field<T>, Field<T>)> {
    let k = kinematics(s, opts)?;
    let b = &k.frame.b;
    let dw = &s.zt() - &b.mul_with(&k.zp, opts.products);
    let dv = &k.ztt_bar - &b.mul_with(&s.vbar.derivative(), opts.products);
    Ok((dw, dv))
}

/// One classical RK4 step without filtering or projection.
pub fn rk4<T: Real>(s: &InterfaceState<T>, dt: T, opts: &StateOptions) -> Result<InterfaceState<T>> {
    let half = dt * T::lit(0.5);
    let (w1, v1) = rhs(s, opts)?;
    let (w2, v2) = rhs(&s.axpy(half, &w1, &v1), opts)?;
    let (w3, v3) = rhs(&s.axpy(half, &w2, &v2), opts)?;
    let (w4, v4) = rhs(&s.axpy(dt, &w3, &v3), opts)?;
    let two = Complex::new(T::lit(2.0), T::zero());
    let sum = |a: &Field<T>, b: &Field<T>, c: &Field<T>, d: &Field<T>| {
        &(&(a + &b.scale(two)) + &c.scale(two)) + d
    };
    let c = dt / T::lit(6.0);
    Ok(s.axpy(c, &sum(&w1, &w2, &w3, &w4), &sum(&v1, &v2, &v3, &v4)))
}

/// Step settings shared by every step of a run.
#[derive(Debug, Clone, Copy)]
pub struct Stepper {
    pub filter_order: u32,
    pub filter_strength: f64,
    pub reproject_every: usize,
    pub opts: StateOptions,
}

impl Stepper {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self {
            filter_order: cfg.filter_order,
            filter_strength: cfg.filter_strength,
            reproject_every: cfg.reproject_every,
            opts: StateOptions { tol: cfg.tolerances, ..StateOptions::default() },
        }
    }

    /// RK4, filter, then projection when `index` is a multiple of
    /// `reproject_every`. Returns the new state and the projection drift.
    pub fn step<T: Real>(&self, s: &InterfaceState<T>, dt: T, index: usize) -> Result<(InterfaceState<T>, T)> {
        let next = rk4(s, dt, &self.opts)?;
        let strength = T::lit(self.filter_strength);
        let mut next = InterfaceState {
            w: next.w.filter(self.filter_order, strength),
            vbar: next.vbar.filter(self.filter_order, strength),
            t: next.t,
        };
        let mut drift = T::zero();
        if (index + 1).is_multiple_of(self.reproject_every) {
            let (p, d) = enforce_holomorphic(&next);
            next = p;
            drift = d;
        }
        if !next.is_finite() {
            return Err(Error::NonFinite { step: index, t: next.t.as_f64() });
        }
        Ok((next, drift))
    }
}

/// CFL step `cfl (2/n) / max(1, ||b||_inf + ||Z_t||_inf)`.
pub fn cfl_dt<T: Real>(s: &InterfaceState<T>, cfl: f64, opts: &StateOptions) -> Result<f64> {
    let k = kinematics(s, opts)?;
    let speed = k.frame.b.linf_norm().as_f64() + s.vbar.linf_norm().as_f64();
    Ok(cfl * 2.0 / s.len() as f64 / speed.max(1.0))
}

/// One row of the energy time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRow {
    pub energy: EnergyReport,
    pub min_a1: f64,
    /// Largest projection drift since the previous row.
    pub holo_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub format_version: u32,
    pub steps: usize,
    pub t_final: f64,
    pub min_a1: f64,
    pub max_holo_drift: f64,
    pub wall_time_s: f64,
    /// Dominant period of `Re W` at the probe point, when it oscillates.
    pub measured_period: Option<f64>,
    pub monitor_power: f64,
    /// `sup |dE/dt| / (1 + E)^p` over the energy rows.
    pub energy_growth_bound: f64,
    pub energy_ratio_min: f64,
    pub energy_ratio_max: f64,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

/// Everything a run produced. On failure `error` is set and the series
/// stop at the last good step.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<EnergyRow>,
    pub snapshots: Vec<Snapshot>,
    pub probe: Vec<(f64, f64)>,
    pub a1_history: Vec<(f64, Vec<f64>)>,
    pub summary: RunSummary,
    pub error: Option<Error>,
}

/// Options for [`run_with`] beyond the configuration file.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunHooks {
    /// Keep `A1` samples for every step (used by transport checks).
    pub record_a1: bool,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    run_with::<f64>(cfg, RunHooks::default())
}

pub fn run_with<T: Real>(cfg: &RunConfig, hooks: RunHooks) -> Result<RunOutput> {
    cfg.validate()?;
    let clock = Instant::now();
    let grid = PeriodicGrid::<T>::new(cfg.grid_n)?;
    let mut s = make_ic_on(&cfg.initial_data(), &grid)?;
    let stepper = Stepper::from_config(cfg);
    let opts = stepper.opts;
    let probe_j = grid.index_of(cfg.probe_alpha).expect("validated");

    let mut snap_times: Vec<f64> = cfg.snapshot_times.iter().copied().filter(|t| *t >= 0.0 && *t <= cfg.t_end).collect();
    snap_times.push(cfg.t_end);
    snap_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    snap_times.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let n_out = (cfg.t_end / cfg.output_cadence + 1e-9).floor() as usize;
    let out_times: Vec<f64> = (0..=n_out).map(|k| k as f64 * cfg.output_cadence).collect();

    let mut out = RunOutput {
        rows: Vec::new(),
        snapshots: Vec::new(),
        probe: vec![(0.0, s.w.at(probe_j).re.as_f64())],
        a1_history: Vec::new(),
        summary: RunSummary {
            format_version: SNAPSHOT_FORMAT_VERSION,
            steps: 0,
            t_final: 0.0,
            min_a1: f64::INFINITY,
            max_holo_drift: 0.0,
            wall_time_s: 0.0,
            measured_period: None,
            monitor_power: cfg.monitor_power,
            energy_growth_bound: 0.0,
            energy_ratio_min: 1.0,
            energy_ratio_max: 1.0,
            warnings: Vec::new(),
            error: None,
        },
        error: None,
    };

    let mut t = 0.0f64;
    let mut step = 0usize;
    let mut next_out = 0usize;
    let mut next_snap = 0usize;
    let mut drift_since_row = 0.0f64;
    let eps_t = 1e-9 * cfg.t_end.max(1.0);

    let result: Result<()> = (|| {
        loop {
            let a1 = compute_a1(&s, &opts)?;
            let min_a1 = a1.min_re().as_f64();
            out.summary.min_a1 = out.summary.min_a1.min(min_a1);
            if hooks.record_a1 {
                out.a1_history.push((t, a1.samples().iter().map(|z| z.re.as_f64()).collect()));
            }
            if next_out < out_times.len() && (t - out_times[next_out]).abs() <= eps_t {
                let d = derive(&s, &opts)?;
                for w in d.warnings.iter() {
                    if out.summary.warnings.len() < 20 {
                        out.summary.warnings.push(format!("t = {t:.6}: {w}"));
                    }
                }
                let e = energy(&s, &d, cfg.anchor_alpha0, opts.products)?;
                out.rows.push(EnergyRow { energy: e, min_a1, holo_drift: drift_since_row });
                drift_since_row = 0.0;
                next_out += 1;
            }
            while next_snap < snap_times.len() && snap_times[next_snap] <= t + eps_t {
                out.snapshots.push(Snapshot::of(&s));
                next_snap += 1;
            }
            if t >= cfg.t_end - eps_t {
                return Ok(());
            }
            // land exactly on the next output, snapshot or the final time
            let mut target = cfg.t_end;
            if next_out < out_times.len() {
                target = target.min(out_times[next_out]);
            }
            if next_snap < snap_times.len() {
                target = target.min(snap_times[next_snap]);
            }
            let mut dt = match cfg.cfl {
                Some(c) => cfl_dt(&s, c, &opts)?,
                None => cfg.dt,
            };
            if t + dt > target - eps_t {
                dt = target - t;
            } else if t + 2.0 * dt > target {
                // split the remainder evenly instead of leaving a sliver
                dt = 0.5 * (target - t);
            }
            let (ns, drift) = stepper.step(&s, T::lit(dt), step)?;
            step += 1;
            t = if (ns.t.as_f64() - target).abs() <= eps_t { target } else { t + dt };
            s = ns;
            s.t = T::lit(t);
            let drift = drift.as_f64();
            drift_since_row = drift_since_row.max(drift);
            out.summary.max_holo_drift = out.summary.max_holo_drift.max(drift);
            out.probe.push((t, s.w.at(probe_j).re.as_f64()));
        }
    })();

    out.summary.steps = step;
    out.summary.t_final = t;
    out.summary.measured_period = dominant_period(&out.probe);
    let totals: Vec<(f64, f64)> = out.rows.iter().map(|r| (r.energy.t, r.energy.total)).collect();
    out.summary.energy_growth_bound = growth_bound(&totals, cfg.monitor_power);
    if let Some(&(_, e0)) = totals.first() {
        if e0 > 0.0 {
            for &(_, e) in &totals {
                out.summary.energy_ratio_min = out.summary.energy_ratio_min.min(e / e0);
                out.summary.energy_ratio_max = out.summary.energy_ratio_max.max(e / e0);
            }
        }
    }
    out.summary.wall_time_s = clock.elapsed().as_secs_f64();
    if let Err(e) = result {
        out.summary.error = Some(e.to_string());
        out.error = Some(e);
    }
    Ok(out)
}

/// `sup |dE/dt| / (1 + E)^p` with central differences in the interior and
/// one-sided differences at the ends.
pub fn growth_bound(series: &[(f64, f64)], p: f64) -> f64 {
    let m = series.len();
    if m < 2 {
        return 0.0;
    }
    (0..m)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(m - 1));
            let de = (series[b].1 - series[a].1) / (series[b].0 - series[a].0);
            de.abs() / (1.0 + series[i].1).powf(p)
        })
        .fold(0.0, f64::max)
}

/// Period of a signal from the spacing of its crossings of the midrange
/// level. `None` when fewer than three crossings are seen.
pub fn dominant_period(series: &[(f64, f64)]) -> Option<f64> {
    let (lo, hi) = series.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &(_, v)| (l.min(v), h.max(v)));
    if !(hi > lo) {
        return None;
    }
    let mid = 0.5 * (lo + hi);
    let mut crossings = Vec::new();
    for w in series.windows(2) {
        let (t0, v0) = (w[0].0, w[0].1 - mid);
        let (t1, v1) = (w[1].0, w[1].1 - mid);
        if v0 == 0.0 {
            continue;
        }
        if v0 * v1 < 0.0 || v1 == 0.0 {
            crossings.push(t0 + (t1 - t0) * v0 / (v0 - v1));
        }
    }
    if crossings.len() < 3 {
        return None;
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    Some(2.0 * span / (crossings.len() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rest_rhs_vanishes() {
        let g = PeriodicGrid::<f64>::new(16).unwrap();
        let (dw, dv) = rhs(&InterfaceState::rest(&g), &StateOptions::default()).unwrap();
        assert_eq!(dw.linf_norm(), 0.0);
        assert_eq!(dv.linf_norm(), 0.0);
    }

    #[test]
    fn single_mode_rhs() {
        let eps = 0.01;
        let g = PeriodicGrid::<f64>::new(64).unwrap();
        let v = Field::from_modes(&g, &[(-1, Complex::new(eps, 0.0))]).unwrap();
        let s = InterfaceState::new(Field::zeros(&g), v, 0.0).unwrap();
        let (_, dv) = rhs(&s, &StateOptions::default()).unwrap();
        let want = Field::from_fn(&g, |a| {
            let b = 2.0 * eps * (1.0 + (PI * a).cos());
            Complex::new(0.0, -PI * eps * eps) - Complex::new(0.0, -PI * eps) * Complex::new(0.0, -PI * a).exp() * b
        });
        assert!(dv.dist_inf(&want) < 1e-12);
    }

    #[test]
    fn period_of_a_sine() {
        let series: Vec<(f64, f64)> = (0..800).map(|i| {
            let t = i as f64 * 0.01;
            (t, -(t * PI.sqrt()).sin())
        }).collect();
        let p = dominant_period(&series).unwrap();
        assert!((p - 2.0 * PI.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_ok());
        c.grid_n = 100;
        assert!(c.validate().is_err());
        c.grid_n = 64;
        c.anchor_alpha0 = 0.01;
        assert!(c.validate().is_err());
    }

    #[test]
    fn snapshot_round_trip() {
        let g = PeriodicGrid::<f64>::new(16).unwrap();
        let v = Field::from_modes(&g, &[(-2, Complex::new(0.1, 0.2))]).unwrap();
        let s = InterfaceState::new(Field::zeros(&g), v, 0.5).unwrap();
        let back: InterfaceState<f64> = Snapshot::of(&s).to_state().unwrap();
        assert_eq!(back.vbar.samples(), s.vbar.samples());
        assert_eq!(back.t, 0.5);
    }
}
