//! Direct quadratures for the singular kernels `cot` and `1/sin^2`.
//!
//! The difference quotient `(f(a) - f(b)) / sin(pi/2 (a - b))` is smooth
//! for smooth periodic `f`, so the trapezoid rule with the diagonal limit
//! `(2/pi) f'(a)` converges spectrally. The principal value Hilbert kernel
//! is handled by the alternating-point rule, which skips the singular node.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{commutator_h, SpectralField};

type Field<T> = SpectralField<T>;

/// `sin^2(pi d / n)` for every offset `d = j - m mod n`.
fn sin2_table<T: Real>(n: usize) -> Vec<T> {
    (0..n)
        .map(|d| {
            let s = (T::PI() * T::lit(d as f64) / T::lit(n as f64)).sin();
            s * s
        })
        .collect()
}

/// Rough size of a jump between `a = 1` and `a = -1` hidden in the samples.
///
/// A jump of height `J` leaves a `J / (pi k)` tail in the spectrum; the
/// energy in the top quarter of the modes is inverted to estimate `J`.
pub fn boundary_jump_estimate<T: Real>(f: &Field<T>) -> T {
    let n = f.len();
    let spec = f.spectrum();
    let lo = (n / 4) as i64;
    let tail: T = spec
        .iter()
        .enumerate()
        .filter(|(i, _)| f.grid().wavenumber(*i).abs() > lo)
        .map(|(_, c)| c.norm_sqr())
        .sum();
    (tail * T::PI() * T::PI() * T::lit(n as f64) / T::lit(4.0)).sqrt()
}

fn check_periodic<T: Real>(f: &Field<T>) -> Result<()> {
    let jump = boundary_jump_estimate(f);
    let scale = f.linf_norm().max(T::one());
    if jump > T::lit(0.05) * scale {
        return Err(Error::BoundaryJump { jump: jump.as_f64() });
    }
    Ok(())
}

fn check_same<T: Real>(a: &Field<T>, b: &Field<T>) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch { left: a.len(), right: b.len() });
    }
    Ok(())
}

/// Hilbert transform by the alternating-point trapezoid rule on the
/// principal value integral; an independent route to [`SpectralField::hilbert`].
pub fn hilbert_pv<T: Real>(f: &Field<T>) -> Field<T> {
    let n = f.len();
    let pi = T::PI();
    let cot: Vec<T> = (0..n)
        .map(|d| if d % 2 == 1 { T::one() / (pi * T::lit(d as f64) / T::lit(n as f64)).tan() } else { T::zero() })
        .collect();
    // (1 / 2i) * (4 / n) * sum
    let pref = Complex::new(T::zero(), -T::lit(2.0) / T::lit(n as f64));
    let s = f.samples();
    let out = (0..n)
        .map(|j| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (m, fm) in s.iter().enumerate() {
                let d = (j + n - m) % n;
                if d % 2 == 1 {
                    acc = acc + *fm * cot[d];
                }
            }
            acc * pref
        })
        .collect();
    Field::from_samples(f.grid(), out).expect("same grid")
}

/// Calderon bracket `[f, g; h](a) = (pi/4i) int Df Dg / sin^2 h` by quadrature.
pub fn calderon_bracket<T: Real>(f: &Field<T>, g: &Field<T>, h: &Field<T>) -> Result<Field<T>> {
    check_same(f, g)?;
    check_same(f, h)?;
    check_periodic(f)?;
    check_periodic(g)?;
    let n = f.len();
    let s2 = sin2_table::<T>(n);
    let df = f.derivative();
    let dg = g.derivative();
    let (fs, gs, hs) = (f.samples(), g.samples(), h.samples());
    let pi = T::PI();
    let diag = T::lit(4.0) / (pi * pi);
    // (pi / 4i) * (2 / n)
    let pref = Complex::new(T::zero(), -pi / T::lit(2.0 * n as f64));
    let out = (0..n)
        .map(|j| {
            let mut acc = df.at(j) * dg.at(j) * hs[j] * diag;
            for m in 0..n {
                if m == j {
                    continue;
                }
                let d = (j + n - m) % n;
                acc = acc + (fs[j] - fs[m]) * (gs[j] - gs[m]) * hs[m] / s2[d];
            }
            acc * pref
        })
        .collect();
    Field::from_samples(f.grid(), out)
}

/// Calderon bracket through the commutator identity
/// `[f, g; h] = f' [g, H] h + g' [f, H] h - d/da ([f, [g, H]] h)`.
pub fn calderon_bracket_spectral<T: Real>(f: &Field<T>, g: &Field<T>, h: &Field<T>) -> Result<Field<T>> {
    check_same(f, g)?;
    check_same(f, h)?;
    let gh = commutator_h(g, h)?;
    let fh = commutator_h(f, h)?;
    let fgh = &(f * &gh) - &commutator_h(g, &(f * h))?;
    let out = &(&(&f.derivative() * &gh) + &(&g.derivative() * &fh)) - &fgh.derivative();
    Ok(out)
}

/// Pointwise values of `int |f(a) - f(b)|^2 / sin^2(pi/2 (a - b)) db`.
pub fn hardy_profile<T: Real>(f: &Field<T>) -> Result<Vec<T>> {
    check_periodic(f)?;
    let n = f.len();
    let s2 = sin2_table::<T>(n);
    let df = f.derivative();
    let fs = f.samples();
    let pi = T::PI();
    let h = f.grid().spacing();
    Ok((0..n)
        .map(|j| {
            let mut acc = df.at(j).norm_sqr() * T::lit(4.0) / (pi * pi);
            for m in 0..n {
                if m != j {
                    acc = acc + (fs[j] - fs[m]).norm_sqr() / s2[(j + n - m) % n];
                }
            }
            acc * h
        })
        .collect())
}

/// Sup over `a` of [`hardy_profile`].
pub fn hardy_sup<T: Real>(f: &Field<T>) -> Result<T> {
    Ok(hardy_profile(f)?.into_iter().fold(T::zero(), T::max))
}

/// Half-derivative seminorm squared from the double integral
/// `(pi/8) int int |f(a) - f(b)|^2 / sin^2(pi/2 (a - b))`.
pub fn h_half_norm_sq_quadrature<T: Real>(f: &Field<T>) -> Result<T> {
    let prof = hardy_profile(f)?;
    let h = f.grid().spacing();
    Ok(T::PI() / T::lit(8.0) * h * prof.into_iter().sum::<T>())
}

/// `int (f(a) - f(b)) / sin^2(pi/2 (a - b)) g(b) db` for periodic `g`,
/// evaluated as `(4i/pi) (H(f' g) - [f, H] g')`.
pub fn sin2_integral<T: Real>(f: &Field<T>, g: &Field<T>) -> Result<Field<T>> {
    check_same(f, g)?;
    let a = (&f.derivative() * g).hilbert();
    let b = commutator_h(f, &g.derivative())?;
    Ok((&a - &b).scale(Complex::new(T::zero(), T::lit(4.0) / T::PI())))
}
