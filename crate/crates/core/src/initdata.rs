//! Initial interfaces: rest, single modes, seeded random states and
//! angled crests.

use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PeriodicGrid;
use crate::scalar::Real;
use crate::spectral::SpectralField;
use crate::state::{enforce_holomorphic, InterfaceState};

type Field<T> = SpectralField<T>;

/// Where an angled crest sits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CrestLocation {
    /// At the wall, `a = +-1`.
    #[default]
    Corner,
    /// At an interior point `-1 < a < 1`.
    Interior(f64),
}

/// Declarative description of an initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Flat,
    /// `Vbar = eps exp(i pi k a)` with `k < 0`, flat interface.
    Mode { k: i64, eps: f64 },
    /// Holomorphic state with coefficients `amp * rho (1 + i sigma) / (1 + |k|)^decay`.
    Random {
        #[serde(default)]
        max_mode: Option<usize>,
        #[serde(default = "default_amp")]
        amplitude: f64,
        #[serde(default = "default_amp")]
        w_amplitude: f64,
        #[serde(default = "default_decay")]
        decay: f64,
        #[serde(default)]
        seed: u64,
        /// Mirror symmetric about `a = 0`: all coefficients imaginary.
        #[serde(default)]
        symmetric: bool,
    },
    /// Interface at rest whose `1/Z'` behaves like `(a - a_c)^(1 - 1/r)`,
    /// an interior angle of `pi / r`.
    Crest {
        r: f64,
        #[serde(default)]
        location: CrestLocation,
    },
}

fn default_amp() -> f64 {
    0.1
}

fn default_decay() -> f64 {
    4.0
}

/// Coefficient generator shared by every random family.
///
/// Coefficients are drawn in the order `k = 0, 1, -1, 2, -2, ...`, so the
/// first modes agree across resolutions for a fixed seed.
#[derive(Debug, Clone)]
pub struct RandomFamily {
    pub max_mode: usize,
    pub decay: f64,
    pub amplitude: f64,
}

impl RandomFamily {
    /// Decay used for the inequality test fields.
    pub fn fields(n: usize) -> Self {
        Self { max_mode: n / 4, decay: 2.5, amplitude: 1.0 }
    }

    fn coeff(&self, rng: &mut ChaCha8Rng, k: i64, symmetric: bool) -> Complex<f64> {
        let rho: f64 = rng.gen_range(-1.0..=1.0);
        let sigma: f64 = rng.gen_range(-1.0..=1.0);
        let w = self.amplitude / (1.0 + k.unsigned_abs() as f64).powf(self.decay);
        if symmetric {
            Complex::new(0.0, rho * w)
        } else {
            Complex::new(rho, rho * sigma) * w
        }
    }

    /// Draws `(k, a_k)` pairs; `keep` picks which wavenumbers are used.
    pub fn draw(&self, rng: &mut ChaCha8Rng, keep: impl Fn(i64) -> bool, symmetric: bool) -> Vec<(i64, Complex<f64>)> {
        let mut out = Vec::new();
        let m = self.max_mode as i64;
        let ks = std::iter::once(0).chain((1..=m).flat_map(|k| [k, -k]));
        for k in ks {
            let c = self.coeff(rng, k, symmetric);
            if keep(k) {
                out.push((k, c));
            }
        }
        out
    }

    pub fn field<T: Real>(&self, grid: &Arc<PeriodicGrid<T>>, rng: &mut ChaCha8Rng) -> Result<Field<T>> {
        let modes = self.draw(rng, |_| true, false);
        to_field(grid, &modes)
    }

    /// Holomorphic field (modes `k <= 0`).
    pub fn holomorphic_field<T: Real>(&self, grid: &Arc<PeriodicGrid<T>>, rng: &mut ChaCha8Rng) -> Result<Field<T>> {
        let modes = self.draw(rng, |k| k <= 0, false);
        to_field(grid, &modes)
    }
}

fn to_field<T: Real>(grid: &Arc<PeriodicGrid<T>>, modes: &[(i64, Complex<f64>)]) -> Result<Field<T>> {
    let m: Vec<(i64, Complex<T>)> =
        modes.iter().map(|&(k, c)| (k, Complex::new(T::lit(c.re), T::lit(c.im)))).collect();
    Field::from_modes(grid, &m)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Builds the state described by `desc` on `n` points.
pub fn make_ic<T: Real>(desc: &InitialData, n: usize) -> Result<InterfaceState<T>> {
    let grid = PeriodicGrid::new(n)?;
    make_ic_on(desc, &grid)
}

pub fn make_ic_on<T: Real>(desc: &InitialData, grid: &Arc<PeriodicGrid<T>>) -> Result<InterfaceState<T>> {
    let n = grid.len();
    match *desc {
        InitialData::Flat => Ok(InterfaceState::rest(grid)),
        InitialData::Mode { k, eps } => {
            if k >= 0 || k.unsigned_abs() as usize > n / 2 {
                return Err(Error::InvalidInitialData(format!(
                    "mode index {k} must satisfy -{} <= k < 0",
                    n / 2
                )));
            }
            if !(eps >= 0.0) || !eps.is_finite() {
                return Err(Error::InvalidInitialData(format!("mode amplitude {eps} must be finite and >= 0")));
            }
            let v = to_field(grid, &[(k, Complex::new(eps, 0.0))])?;
            InterfaceState::new(Field::zeros(grid), v, T::zero())
        }
        InitialData::Random { max_mode, amplitude, w_amplitude, decay, seed, symmetric } => {
            let m = max_mode.unwrap_or(n / 8);
            if m == 0 || m >= n / 2 {
                return Err(Error::InvalidInitialData(format!("max_mode {m} must lie in 1..{}", n / 2)));
            }
            for (name, x) in [("amplitude", amplitude), ("w_amplitude", w_amplitude), ("decay", decay)] {
                if !(x >= 0.0) || !x.is_finite() {
                    return Err(Error::InvalidInitialData(format!("{name} = {x} must be finite and >= 0")));
                }
            }
            let mut r = rng(seed);
            let vf = RandomFamily { max_mode: m, decay, amplitude };
            let wf = RandomFamily { max_mode: m, decay, amplitude: w_amplitude };
            let v = to_field(grid, &vf.draw(&mut r, |k| k < 0, symmetric))?;
            let w = to_field(grid, &wf.draw(&mut r, |k| k <= 0, symmetric))?;
            let s = InterfaceState::new(w, v, T::zero())?;
            let (s, _) = enforce_holomorphic(&s);
            if let Some(j) = s.zp().samples().iter().position(|z| z.norm() < T::lit(1e-3)) {
                return Err(Error::InvalidInitialData(format!("Z' nearly vanishes at sample {j}")));
            }
            Ok(s)
        }
        InitialData::Crest { r, location } => crest_state(grid, r, location),
    }
}

/// Angled crest at rest.
///
/// `1/Z'` is the closed form `c (1 - exp(-i pi (a - a_c)))^(1 - 1/r)`
/// sampled on the grid. When the crest falls on a grid point its sample is
/// chosen so that the trapezoid mean of `Z'` is exactly one, which keeps `W`
/// periodic without rescaling; otherwise `c` is rescaled to the same end.
pub fn crest_state<T: Real>(grid: &Arc<PeriodicGrid<T>>, r: f64, location: CrestLocation) -> Result<InterfaceState<T>> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(Error::InvalidInitialData(format!("crest parameter r = {r} must exceed 1")));
    }
    let ac = match location {
        CrestLocation::Corner => 1.0,
        CrestLocation::Interior(a) => {
            if !(a > -1.0 && a < 1.0) {
                return Err(Error::InvalidInitialData(format!("interior crest at {a} is not inside (-1, 1)")));
            }
            a
        }
    };
    let p = 1.0 - 1.0 / r;
    let n = grid.len();
    let on_grid = grid.index_of(ac);
    let zp_raw: Vec<Complex<f64>> = (0..n)
        .map(|j| {
            if Some(j) == on_grid {
                return Complex::new(0.0, 0.0);
            }
            let a = grid.point(j).as_f64();
            let base = Complex::new(1.0, 0.0) - Complex::new(0.0, -std::f64::consts::PI * (a - ac)).exp();
            base.powf(-p)
        })
        .collect();
    let total: Complex<f64> = zp_raw.iter().sum();
    let zp: Vec<Complex<f64>> = match on_grid {
        Some(jc) => {
            let mut z = zp_raw;
            z[jc] = Complex::new(n as f64, 0.0) - total;
            if !(z[jc].re > 0.0) || !z[jc].is_finite() {
                return Err(Error::CrestNormalization(format!("crest sample {} is not positive", z[jc])));
            }
            z
        }
        None => {
            let c = total / n as f64;
            if !c.is_finite() || c.norm() < 1e-12 {
                return Err(Error::CrestNormalization(format!("mean of Z' is {c}")));
            }
            zp_raw.into_iter().map(|z| z / c).collect()
        }
    };
    let zp = Field::from_samples(grid, zp.into_iter().map(|z| Complex::new(T::lit(z.re), T::lit(z.im))).collect())?;
    let w = zp.add_const(Complex::new(-T::one(), T::zero())).antiderivative();
    InterfaceState::new(w, Field::zeros(grid), T::zero())
}

/// The constructed factor `1/Z'` of [`crest_state`], exactly zero at an
/// on-grid crest. It agrees with `1/Z'` of the state everywhere else; the
/// state's crest sample instead carries the mass-balancing value.
pub fn crest_profile<T: Real>(grid: &Arc<PeriodicGrid<T>>, r: f64, location: CrestLocation) -> Result<Field<T>> {
    let s = crest_state(grid, r, location)?;
    let mut q = s.zp().recip()?;
    let ac = match location {
        CrestLocation::Corner => 1.0,
        CrestLocation::Interior(a) => a,
    };
    if let Some(jc) = grid.index_of(ac) {
        q.samples_mut()[jc] = Complex::new(T::zero(), T::zero());
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{compute_a1, StateOptions};

    #[test]
    fn flat_and_mode() {
        let s: InterfaceState<f64> = make_ic(&InitialData::Flat, 16).unwrap();
        assert_eq!(s.w.linf_norm(), 0.0);
        let s: InterfaceState<f64> = make_ic(&InitialData::Mode { k: -2, eps: 0.1 }, 16).unwrap();
        assert!((s.vbar.mode(-2).re - 0.1).abs() < 1e-15);
        assert!(make_ic::<f64>(&InitialData::Mode { k: 1, eps: 0.1 }, 16).is_err());
    }

    #[test]
    fn random_states_are_holomorphic_and_reproducible() {
        let d = InitialData::Random {
            max_mode: None,
            amplitude: 0.2,
            w_amplitude: 0.2,
            decay: 4.0,
            seed: 3,
            symmetric: false,
        };
        let a: InterfaceState<f64> = make_ic(&d, 64).unwrap();
        let b: InterfaceState<f64> = make_ic(&d, 64).unwrap();
        assert_eq!(a.w.samples(), b.w.samples());
        assert!(a.holomorphy_residual().max() < 1e-15);
        assert!(compute_a1(&a, &StateOptions::default()).is_ok());
    }

    #[test]
    fn random_families_nest_under_refinement() {
        let fam = RandomFamily::fields(32);
        let small = fam.draw(&mut rng(9), |_| true, false);
        let fam2 = RandomFamily::fields(64);
        let big = fam2.draw(&mut rng(9), |_| true, false);
        assert_eq!(&big[..small.len()], &small[..]);
    }

    #[test]
    fn symmetric_states_are_mirror_symmetric() {
        let d = InitialData::Random {
            max_mode: Some(6),
            amplitude: 0.2,
            w_amplitude: 0.2,
            decay: 3.0,
            seed: 1,
            symmetric: true,
        };
        let s: InterfaceState<f64> = make_ic(&d, 32).unwrap();
        for j in 1..32 {
            let m = 32 - j;
            assert!((s.w.at(m) + s.w.at(j).conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn crest_is_normalized() {
        let g = PeriodicGrid::<f64>::new(128).unwrap();
        for loc in [CrestLocation::Corner, CrestLocation::Interior(0.3)] {
            let s = crest_state(&g, 2.5, loc).unwrap();
            assert!((s.zp().mean() - Complex::new(1.0, 0.0)).norm() < 1e-12);
        }
        assert!(crest_state(&g, 0.8, CrestLocation::Corner).is_err());
    }
}
