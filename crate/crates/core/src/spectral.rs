//! Sampled periodic fields and their Fourier-multiplier operators.
//!
//! A field stores complex samples on a [`PeriodicGrid`]. Its modes are the
//! coefficients of `exp(i pi k a)` for `-n/2 <= k < n/2`; the Nyquist slot is
//! read as `k = -n/2`, so it counts as holomorphic and derivative followed by
//! antiderivative is exact on every mean-free field.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::PeriodicGrid;
use crate::scalar::Real;

/// Which half of the spectrum a projection keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `(I + H)/2`: modes `k < 0`, half the mean.
    Holomorphic,
    /// `(I - H)/2`: modes `k > 0`, half the mean.
    Antiholomorphic,
}

/// How pointwise products of fields are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProductRule {
    /// Zero-pad to `2n`, multiply, truncate back. No aliasing into kept modes.
    #[default]
    Dealiased,
    /// Multiply samples directly. Preferred for non-smooth (crest) data.
    Pointwise,
}

#[derive(Clone)]
pub struct SpectralField<T: Real> {
    grid: Arc<PeriodicGrid<T>>,
    samples: Vec<Complex<T>>,
}

impl<T: Real> std::fmt::Debug for SpectralField<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralField")
            .field("n", &self.len())
            .field("samples", &self.samples)
            .finish()
    }
}

fn check_same<T: Real>(a: &SpectralField<T>, b: &SpectralField<T>) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch { left: a.len(), right: b.len() });
    }
    Ok(())
}

impl<T: Real> SpectralField<T> {
    pub fn from_samples(grid: &Arc<PeriodicGrid<T>>, samples: Vec<Complex<T>>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::SampleCount { expected: grid.len(), got: samples.len() });
        }
        Ok(Self { grid: grid.clone(), samples })
    }

    pub fn from_fn(grid: &Arc<PeriodicGrid<T>>, mut f: impl FnMut(T) -> Complex<T>) -> Self {
        let samples = grid.points().into_iter().map(&mut f).collect();
        Self { grid: grid.clone(), samples }
    }

    pub fn from_real_fn(grid: &Arc<PeriodicGrid<T>>, mut f: impl FnMut(T) -> T) -> Self {
        Self::from_fn(grid, |a| Complex::new(f(a), T::zero()))
    }

    pub fn constant(grid: &Arc<PeriodicGrid<T>>, c: Complex<T>) -> Self {
        Self { grid: grid.clone(), samples: vec![c; grid.len()] }
    }

    pub fn zeros(grid: &Arc<PeriodicGrid<T>>) -> Self {
        Self::constant(grid, Complex::new(T::zero(), T::zero()))
    }

    /// Builds a field from `(k, coefficient)` pairs. Wavenumbers outside
    /// `[-n/2, n/2)` are rejected.
    pub fn from_modes(grid: &Arc<PeriodicGrid<T>>, modes: &[(i64, Complex<T>)]) -> Result<Self> {
        let mut spec = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        for &(k, c) in modes {
            let slot = grid.slot(k).ok_or_else(|| {
                Error::InvalidInitialData(format!("wavenumber {k} is not resolved on {} points", grid.len()))
            })?;
            spec[slot] = spec[slot] + c;
        }
        Ok(Self::from_spectrum(grid, spec))
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid<T>> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex<T>> {
        self.samples
    }

    pub fn at(&self, j: usize) -> Complex<T> {
        self.samples[j]
    }

    /// Mode coefficients in FFT slot order (see [`PeriodicGrid::wavenumber`]).
    pub fn spectrum(&self) -> Vec<Complex<T>> {
        let n = self.len();
        let mut buf = self.samples.clone();
        self.grid.fwd.process(&mut buf);
        let scale = T::one() / T::lit(n as f64);
        for (i, c) in buf.iter_mut().enumerate() {
            // exp(i pi k a_j) = (-1)^k exp(2 pi i k j / n)
            let sign = if self.grid.wavenumber(i) % 2 == 0 { scale } else { -scale };
            *c = *c * sign;
        }
        buf
    }

    pub fn from_spectrum(grid: &Arc<PeriodicGrid<T>>, mut spec: Vec<Complex<T>>) -> Self {
        for (i, c) in spec.iter_mut().enumerate() {
            if grid.wavenumber(i) % 2 != 0 {
                *c = -*c;
            }
        }
        grid.inv.process(&mut spec);
        Self { grid: grid.clone(), samples: spec }
    }

    /// Coefficient of `exp(i pi k a)`.
    pub fn mode(&self, k: i64) -> Complex<T> {
        match self.grid.slot(k) {
            Some(s) => self.spectrum()[s],
            None => Complex::new(T::zero(), T::zero()),
        }
    }

    /// Applies the Fourier multiplier `m(k)`.
    pub fn apply_multiplier(&self, m: impl Fn(i64) -> Complex<T>) -> Self {
        let n = self.len();
        let mut buf = self.samples.clone();
        self.grid.fwd.process(&mut buf);
        let scale = T::one() / T::lit(n as f64);
        for (i, c) in buf.iter_mut().enumerate() {
            *c = *c * m(self.grid.wavenumber(i)) * scale;
        }
        self.grid.inv.process(&mut buf);
        Self { grid: self.grid.clone(), samples: buf }
    }

    fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self { grid: self.grid.clone(), samples: self.samples.iter().map(|&z| f(z)).collect() }
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        assert_eq!(self.len(), other.len(), "fields live on different grids");
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid.clone(), samples }
    }

    /// Periodic Hilbert transform, multiplier `-sgn(k)` (Nyquist gets `+1`).
    pub fn hilbert(&self) -> Self {
        let one = Complex::new(T::one(), T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        self.apply_multiplier(|k| if k < 0 { one } else if k > 0 { -one } else { zero })
    }

    pub fn project(&self, side: Side) -> Self {
        let one = Complex::new(T::one(), T::zero());
        let half = Complex::new(T::lit(0.5), T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        match side {
            Side::Holomorphic => self.apply_multiplier(|k| if k < 0 { one } else if k == 0 { half } else { zero }),
            Side::Antiholomorphic => {
                self.apply_multiplier(|k| if k > 0 { one } else if k == 0 { half } else { zero })
            }
        }
    }

    pub fn derivative(&self) -> Self {
        let pi = T::PI();
        self.apply_multiplier(|k| Complex::new(T::zero(), pi * T::lit(k as f64)))
    }

    /// Mean-free spectral antiderivative.
    pub fn antiderivative(&self) -> Self {
        let pi = T::PI();
        self.apply_multiplier(|k| {
            if k == 0 {
                Complex::new(T::zero(), T::zero())
            } else {
                Complex::new(T::zero(), -T::one() / (pi * T::lit(k as f64)))
            }
        })
    }

    /// Exponential filter `exp(-strength (|k|/(n/2))^order)`.
    pub fn filter(&self, order: u32, strength: T) -> Self {
        let half = T::lit((self.len() / 2) as f64);
        self.apply_multiplier(|k| {
            let x = T::lit(k.unsigned_abs() as f64) / half;
            Complex::new((-strength * x.powi(order as i32)).exp(), T::zero())
        })
    }

    /// Average `(1/2) * integral over [-1, 1]`.
    pub fn mean(&self) -> Complex<T> {
        let n = T::lit(self.len() as f64);
        self.samples.iter().fold(Complex::new(T::zero(), T::zero()), |acc, &z| acc + z) / n
    }

    /// Trapezoid integral over one period.
    pub fn integral(&self) -> Complex<T> {
        self.mean() * T::lit(2.0)
    }

    pub fn l2_norm(&self) -> T {
        let h = self.grid.spacing();
        (self.samples.iter().map(|z| z.norm_sqr()).sum::<T>() * h).sqrt()
    }

    pub fn linf_norm(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, z| nan_max(m, z.norm()))
    }

    /// Squared homogeneous half-derivative seminorm, `2 pi sum |k| |f_k|^2`.
    pub fn h_half_norm_sq(&self) -> T {
        let spec = self.spectrum();
        let two_pi = T::lit(2.0) * T::PI();
        spec.iter()
            .enumerate()
            .map(|(i, c)| T::lit(self.grid.wavenumber(i).unsigned_abs() as f64) * c.norm_sqr())
            .sum::<T>()
            * two_pi
    }

    /// `||f||_{L^2(w)}`; the weight must be real and non-negative.
    pub fn weighted_l2_norm(&self, w: &Self) -> Result<T> {
        check_same(self, w)?;
        let scale = w.linf_norm().max(T::one());
        let tol = T::lit(1e-12) * scale;
        let mut acc = T::zero();
        for (j, (f, wj)) in self.samples.iter().zip(&w.samples).enumerate() {
            if wj.im.abs() > tol || wj.re < -tol || !wj.re.is_finite() {
                return Err(Error::InvalidWeight { index: j });
            }
            acc = acc + f.norm_sqr() * wj.re.max(T::zero());
        }
        Ok((acc * self.grid.spacing()).sqrt())
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    /// Real part, as a field with zero imaginary part.
    pub fn re(&self) -> Self {
        self.map(|z| Complex::new(z.re, T::zero()))
    }

    pub fn im(&self) -> Self {
        self.map(|z| Complex::new(z.im, T::zero()))
    }

    pub fn abs(&self) -> Self {
        self.map(|z| Complex::new(z.norm(), T::zero()))
    }

    pub fn abs_sqr(&self) -> Self {
        self.map(|z| Complex::new(z.norm_sqr(), T::zero()))
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        self.map(|z| z * c)
    }

    pub fn scale_re(&self, c: T) -> Self {
        self.map(|z| z * c)
    }

    pub fn add_const(&self, c: Complex<T>) -> Self {
        self.map(|z| z + c)
    }

    /// Pointwise reciprocal. Fails on a sample that vanishes to round-off.
    pub fn recip(&self) -> Result<Self> {
        let tiny = T::epsilon() * T::lit(1e3) * self.linf_norm().max(T::one());
        if let Some(j) = self.samples.iter().position(|z| !(z.norm() > tiny) || !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::DegenerateMap { index: j });
        }
        Ok(self.map(|z| z.inv()))
    }

    pub fn mul_pointwise(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a * b)
    }

    pub fn div_pointwise(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a / b)
    }

    /// Product computed on the padded `2n` grid and truncated back.
    pub fn mul_dealiased(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "fields live on different grids");
        let n = self.len();
        let m = 2 * n;
        let zero = Complex::new(T::zero(), T::zero());
        let pad = |f: &Self| {
            let mut raw = f.samples.clone();
            self.grid.fwd.process(&mut raw);
            let inv_n = T::one() / T::lit(n as f64);
            let mut big = vec![zero; m];
            for (i, c) in raw.iter().enumerate() {
                let k = self.grid.wavenumber(i);
                big[k.rem_euclid(m as i64) as usize] = *c * inv_n;
            }
            self.grid.inv2.process(&mut big);
            big
        };
        let a = pad(self);
        let b = pad(other);
        let mut prod: Vec<Complex<T>> = a.iter().zip(&b).map(|(&x, &y)| x * y).collect();
        self.grid.fwd2.process(&mut prod);
        let inv_m = T::one() / T::lit(m as f64);
        let mut small = vec![zero; n];
        for (i, c) in small.iter_mut().enumerate() {
            let k = self.grid.wavenumber(i);
            *c = prod[k.rem_euclid(m as i64) as usize] * inv_m;
        }
        self.grid.inv.process(&mut small);
        Self { grid: self.grid.clone(), samples: small }
    }

    pub fn mul_with(&self, other: &Self, rule: ProductRule) -> Self {
        match rule {
            ProductRule::Dealiased => self.mul_dealiased(other),
            ProductRule::Pointwise => self.mul_pointwise(other),
        }
    }

    /// Checked dealiased product.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        check_same(self, other)?;
        Ok(self.mul_dealiased(other))
    }

    /// Largest imaginary part, useful to confirm a field is real.
    pub fn max_abs_imag(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, z| nan_max(m, z.im.abs()))
    }

    pub fn min_re(&self) -> T {
        self.samples.iter().fold(T::infinity(), |m, z| -nan_max(-m, -z.re))
    }

    pub fn max_re(&self) -> T {
        self.samples.iter().fold(T::neg_infinity(), |m, z| nan_max(m, z.re))
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Sup-norm distance to another field on the same grid.
    pub fn dist_inf(&self, other: &Self) -> T {
        assert_eq!(self.len(), other.len(), "fields live on different grids");
        self.samples.iter().zip(&other.samples).fold(T::zero(), |m, (a, b)| nan_max(m, (*a - *b).norm()))
    }

    /// Same field on a grid of size `m`, by spectral interpolation or
    /// truncation. Used by refinement studies.
    pub fn resample(&self, grid: &Arc<PeriodicGrid<T>>) -> Self {
        let spec = self.spectrum();
        let mut out = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        for (i, c) in spec.iter().enumerate() {
            if let Some(s) = grid.slot(self.grid.wavenumber(i)) {
                out[s] = *c;
            }
        }
        Self::from_spectrum(grid, out)
    }
}

/// Commutator `[f, H] g = f H g - H(f g)` using `rule` for the products.
pub fn commutator_h_with<T: Real>(
    f: &SpectralField<T>,
    g: &SpectralField<T>,
    rule: ProductRule,
) -> Result<SpectralField<T>> {
    check_same(f, g)?;
    Ok(&f.mul_with(&g.hilbert(), rule) - &f.mul_with(g, rule).hilbert())
}

/// `max` that lets NaN through instead of discarding it.
fn nan_max<T: Real>(a: T, b: T) -> T {
    if a.is_nan() || b.is_nan() {
        T::nan()
    } else {
        a.max(b)
    }
}

/// Commutator `[f, H] g` with dealiased products.
pub fn commutator_h<T: Real>(f: &SpectralField<T>, g: &SpectralField<T>) -> Result<SpectralField<T>> {
    commutator_h_with(f, g, ProductRule::Dealiased)
}

impl<T: Real> Add for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn add(self, rhs: Self) -> SpectralField<T> {
        self.zip(rhs, |a, b| a + b)
    }
}

impl<T: Real> Sub for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn sub(self, rhs: Self) -> SpectralField<T> {
        self.zip(rhs, |a, b| a - b)
    }
}

/// Dealiased product.
impl<T: Real> Mul for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn mul(self, rhs: Self) -> SpectralField<T> {
        self.mul_dealiased(rhs)
    }
}

impl<T: Real> Neg for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn neg(self) -> SpectralField<T> {
        self.map(|z| -z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    type F = SpectralField<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn grid(n: usize) -> Arc<PeriodicGrid<f64>> {
        PeriodicGrid::new(n).unwrap()
    }

    #[test]
    fn modes_match_basis_convention() {
        let g = grid(16);
        let f = F::from_fn(&g, |a| c(0.0, PI * 3.0 * a).exp() * 2.0);
        assert!((f.mode(3) - c(2.0, 0.0)).norm() < 1e-13);
        assert!(f.mode(-3).norm() < 1e-13);
        let back = F::from_modes(&g, &[(3, c(2.0, 0.0))]).unwrap();
        assert!(back.dist_inf(&f) < 1e-13);
    }

    #[test]
    fn hilbert_of_sine_and_cosine() {
        let g = grid(32);
        let s = F::from_real_fn(&g, |a| (PI * a).sin());
        let hc = F::from_real_fn(&g, |a| (PI * a).cos()).hilbert();
        // -sgn(k) on cos gives -i sin
        let want = s.scale(c(0.0, -1.0));
        assert!(hc.dist_inf(&want) < 1e-13);
        // H(1) = 0
        let one = F::constant(&g, c(1.0, 0.0));
        assert!(one.hilbert().linf_norm() < 1e-14);
    }

    #[test]
    fn dealiased_product_is_exact_for_resolved_sums() {
        let g = grid(16);
        let a = F::from_modes(&g, &[(5, c(1.0, 0.5)), (-7, c(0.3, 0.0))]).unwrap();
        let b = F::from_modes(&g, &[(2, c(0.2, -1.0)), (-1, c(1.0, 0.0))]).unwrap();
        let p = a.mul_dealiased(&b);
        // mode 7 = 5 + 2, mode -8 = -7 - 1 survive; mode 4 and -5 also
        assert!((p.mode(7) - c(1.0, 0.5) * c(0.2, -1.0)).norm() < 1e-13);
        assert!((p.mode(-8) - c(0.3, 0.0)).norm() < 1e-13);
        assert!((p.mode(4) - c(1.0, 0.5)).norm() < 1e-13);
        assert!((p.mode(-5) - c(0.3, 0.0) * c(0.2, -1.0)).norm() < 1e-13);
    }

    #[test]
    fn h_half_of_single_mode() {
        let g = grid(32);
        let f = F::from_modes(&g, &[(-3, c(0.0, 2.0))]).unwrap();
        assert!((f.h_half_norm_sq() - 2.0 * PI * 3.0 * 4.0).abs() < 1e-10);
    }

    #[test]
    fn nyquist_is_holomorphic() {
        let g = grid(8);
        let f = F::from_modes(&g, &[(-4, c(1.0, 0.0))]).unwrap();
        assert!(f.project(Side::Antiholomorphic).linf_norm() < 1e-14);
        assert!(f.derivative().antiderivative().dist_inf(&f) < 1e-13);
    }

    #[test]
    fn weight_checks() {
        let g = grid(8);
        let f = F::constant(&g, c(1.0, 0.0));
        let w = F::constant(&g, c(-1.0, 0.0));
        assert_eq!(f.weighted_l2_norm(&w), Err(Error::InvalidWeight { index: 0 }));
        let w = F::constant(&g, c(4.0, 0.0));
        assert!((f.weighted_l2_norm(&w).unwrap() - 8f64.sqrt()).abs() < 1e-14);
        let other = F::zeros(&grid(16));
        assert!(matches!(f.weighted_l2_norm(&other), Err(Error::GridMismatch { .. })));
        assert!(matches!(commutator_h(&f, &other), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn commutator_of_constant_vanishes() {
        let g = grid(16);
        let f = F::constant(&g, c(2.5, -1.0));
        let h = F::from_real_fn(&g, |a| (PI * a).cos() + 0.3 * (2.0 * PI * a).sin());
        assert!(commutator_h(&f, &h).unwrap().linf_norm() < 1e-13);
    }

    #[test]
    fn single_precision_runs() {
        let g = PeriodicGrid::<f32>::new(16).unwrap();
        let f = SpectralField::from_real_fn(&g, |a| (std::f32::consts::PI * a).sin());
        let d = f.derivative();
        let want = SpectralField::from_real_fn(&g, |a| std::f32::consts::PI * (std::f32::consts::PI * a).cos());
        assert!(d.dist_inf(&want) < 1e-4);
    }

    #[test]
    fn sup_norms_do_not_hide_nan() {
        let g = grid(8);
        let mut f = F::zeros(&g);
        f.samples_mut()[3] = c(f64::NAN, 0.0);
        assert!(f.linf_norm().is_nan());
        assert!(f.min_re().is_nan());
        assert!(f.dist_inf(&F::zeros(&g)).is_nan());
    }
}
