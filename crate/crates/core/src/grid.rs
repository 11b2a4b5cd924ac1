//! Uniform periodic grid on [-1, 1) and the FFT plans that go with it.

use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `n` equispaced samples `a_j = -1 + 2j/n` of the period-2 interval.
///
/// A grid owns forward and inverse plans for `n` points and for the
/// `2n`-point padded grid used by dealiased products. Grids are shared
/// behind an `Arc`; two grids with the same `n` are interchangeable.
pub struct PeriodicGrid<T: Real> {
    n: usize,
    pub(crate) fwd: Arc<dyn Fft<T>>,
    pub(crate) inv: Arc<dyn Fft<T>>,
    pub(crate) fwd2: Arc<dyn Fft<T>>,
    pub(crate) inv2: Arc<dyn Fft<T>>,
}

impl<T: Real> PeriodicGrid<T> {
    pub fn new(n: usize) -> Result<Arc<Self>> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGridSize(n));
        }
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            fwd2: planner.plan_fft_forward(2 * n),
            inv2: planner.plan_fft_inverse(2 * n),
        }))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `2/n`, also the trapezoid weight.
    pub fn spacing(&self) -> T {
        T::lit(2.0 / self.n as f64)
    }

    pub fn point(&self, j: usize) -> T {
        T::lit(-1.0 + 2.0 * j as f64 / self.n as f64)
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Wavenumber of FFT slot `i`. Slot `n/2` carries `k = -n/2`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT slot holding wavenumber `k`, for `-n/2 <= k < n/2`.
    pub fn slot(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k < -half || k >= half {
            return None;
        }
        Some(k.rem_euclid(self.n as i64) as usize)
    }

    /// Index of the grid point at `alpha`, if `alpha` lies on the grid
    /// (points `-1` and `1` are identified).
    pub fn index_of(&self, alpha: f64) -> Option<usize> {
        let x = (alpha + 1.0) * self.n as f64 / 2.0;
        let j = x.round();
        if (x - j).abs() > 1e-9 {
            return None;
        }
        Some((j as i64).rem_euclid(self.n as i64) as usize)
    }
}

impl<T: Real> fmt::Debug for PeriodicGrid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid").field("n", &self.n).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(PeriodicGrid::<f64>::new(4).is_err());
        assert!(PeriodicGrid::<f64>::new(24).is_err());
        assert!(PeriodicGrid::<f64>::new(16).is_ok());
    }

    #[test]
    fn slots_round_trip() {
        let g = PeriodicGrid::<f64>::new(16).unwrap();
        for i in 0..16 {
            assert_eq!(g.slot(g.wavenumber(i)), Some(i));
        }
        assert_eq!(g.wavenumber(8), -8);
        assert_eq!(g.slot(8), None);
    }

    #[test]
    fn endpoints_are_identified() {
        let g = PeriodicGrid::<f64>::new(32).unwrap();
        assert_eq!(g.index_of(-1.0), Some(0));
        assert_eq!(g.index_of(1.0), Some(0));
        assert_eq!(g.index_of(0.0), Some(16));
        assert_eq!(g.index_of(0.01), None);
    }
}
