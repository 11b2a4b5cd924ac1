//! Interface state `(W, Vbar)` in Riemannian variables and the quantities
//! derived from it: the Taylor coefficient `A1`, the acceleration, the
//! frame velocity `b` and the growth rate of the Taylor coefficient.
//!
//! `W = Z - a` is the periodic part of the interface map and `Vbar` is the
//! conjugate velocity `Zbar_t`. Both are boundary values of holomorphic
//! functions in the lower half strip, i.e. they carry only modes `k <= 0`,
//! and `Vbar` is mean free.

use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PeriodicGrid;
use crate::kernels::calderon_bracket;
use crate::scalar::Real;
use crate::spectral::{commutator_h_with, ProductRule, Side, SpectralField};

type Field<T> = SpectralField<T>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub holo_tol: f64,
    pub a1_tol: f64,
    pub gauge_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { holo_tol: 1e-8, a1_tol: 1e-9, gauge_tol: 1e-8 }
    }
}

/// Options threaded through every state computation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateOptions {
    pub tol: Tolerances,
    pub products: ProductRule,
}

impl StateOptions {
    pub fn pointwise() -> Self {
        Self { products: ProductRule::Pointwise, ..Self::default() }
    }

    pub fn mul<T: Real>(&self, a: &Field<T>, b: &Field<T>) -> Field<T> {
        a.mul_with(b, self.products)
    }
}

#[derive(Debug, Clone)]
pub struct InterfaceState<T: Real> {
    pub w: Field<T>,
    pub vbar: Field<T>,
    pub t: T,
}

/// Sizes of the parts of a state that should vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolomorphyResidual {
    /// `||P_A Vbar||_inf` including half the mean.
    pub vbar_anti: f64,
    pub vbar_mean: f64,
    /// `||P_A W - mean(W)/2||_inf`.
    pub w_anti: f64,
}

impl HolomorphyResidual {
    pub fn max(&self) -> f64 {
        self.vbar_anti.max(self.vbar_mean).max(self.w_anti)
    }
}

impl<T: Real> InterfaceState<T> {
    pub fn new(w: Field<T>, vbar: Field<T>, t: T) -> Result<Self> {
        if w.len() != vbar.len() {
            return Err(Error::GridMismatch { left: w.len(), right: vbar.len() });
        }
        Ok(Self { w, vbar, t })
    }

    /// Flat interface at rest.
    pub fn rest(grid: &Arc<PeriodicGrid<T>>) -> Self {
        Self { w: Field::zeros(grid), vbar: Field::zeros(grid), t: T::zero() }
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid<T>> {
        self.w.grid()
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `Z' = 1 + W'`.
    pub fn zp(&self) -> Field<T> {
        self.w.derivative().add_const(Complex::new(T::one(), T::zero()))
    }

    /// Velocity `Z_t = conj(Vbar)`.
    pub fn zt(&self) -> Field<T> {
        self.vbar.conj()
    }

    pub fn holomorphy_residual(&self) -> HolomorphyResidual {
        let anti_w = &self.w.project(Side::Antiholomorphic)
            - &Field::constant(self.grid(), self.w.mean() * T::lit(0.5));
        HolomorphyResidual {
            vbar_anti: self.vbar.project(Side::Antiholomorphic).linf_norm().as_f64(),
            vbar_mean: self.vbar.mean().norm().as_f64(),
            w_anti: anti_w.linf_norm().as_f64(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.vbar.is_finite() && self.t.is_finite()
    }

    /// `self + c * d` for a state increment `d = (dW, dVbar)`.
    pub fn axpy(&self, c: T, dw: &Field<T>, dv: &Field<T>) -> Self {
        let cc = Complex::new(c, T::zero());
        Self { w: &self.w + &dw.scale(cc), vbar: &self.vbar + &dv.scale(cc), t: self.t + c }
    }
}

/// Projects `W` onto holomorphic modes (keeping its mean) and `Vbar` onto
/// mean-free holomorphic modes. Returns the new state and the sup-norm of
/// what was removed.
pub fn enforce_holomorphic<T: Real>(s: &InterfaceState<T>) -> (InterfaceState<T>, T) {
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let w = s.w.apply_multiplier(|k| if k <= 0 { one } else { zero });
    let v = s.vbar.apply_multiplier(|k| if k < 0 { one } else { zero });
    let drift = w.dist_inf(&s.w).max(v.dist_inf(&s.vbar));
    (InterfaceState { w, vbar: v, t: s.t }, drift)
}

fn check_holomorphic<T: Real>(s: &InterfaceState<T>, tol: &Tolerances) -> Result<()> {
    let r = s.holomorphy_residual();
    let residual = r.vbar_anti.max(r.vbar_mean);
    let limit = 100.0 * tol.holo_tol * s.vbar.linf_norm().as_f64().max(1.0);
    if !(residual <= limit) {
        return Err(Error::NotHolomorphic { residual, limit });
    }
    Ok(())
}

/// Real field holding the real parts of `f`.
fn real<T: Real>(f: &Field<T>) -> Field<T> {
    f.re()
}

/// `A1 = 1 + Im(-[Z_t, H] d Vbar)`.
pub fn compute_a1<T: Real>(s: &InterfaceState<T>, opts: &StateOptions) -> Result<Field<T>> {
    check_holomorphic(s, &opts.tol)?;
    let c = commutator_h_with(&s.zt(), &s.vbar.derivative(), opts.products)?;
    Ok((-&c).im().add_const(Complex::new(T::one(), T::zero())))
}

/// `A1 = 1 + (pi/8) int |Z_t(a) - Z_t(b)|^2 / sin^2(pi/2 (a - b)) db`,
/// the manifestly positive form.
pub fn compute_a1_double_integral<T: Real>(s: &InterfaceState<T>) -> Result<Field<T>> {
    let prof = crate::kernels::hardy_profile(&s.zt())?;
    let k = T::PI() / T::lit(8.0);
    let samples = prof.into_iter().map(|p| Complex::new(T::one() + k * p, T::zero())).collect();
    Field::from_samples(s.grid(), samples)
}

/// Conjugate acceleration `Zbar_tt = i - i A1 / Z'`, together with `1/Z'`.
pub fn compute_ztt<T: Real>(s: &InterfaceState<T>, a1: &Field<T>) -> Result<(Field<T>, Field<T>)> {
    let zp_inv = s.zp().recip()?;
    let i = Complex::new(T::zero(), T::one());
    let ztt_bar = a1.mul_pointwise(&zp_inv).scale(-i).add_const(i);
    Ok((ztt_bar, zp_inv))
}

/// Frame velocity and its derivative.
#[derive(Debug, Clone)]
pub struct FrameVelocity<T: Real> {
    pub b: Field<T>,
    pub b_prime: Field<T>,
    /// Mean of the raw `b'` that was subtracted; nonzero means the input was
    /// not quite consistent.
    pub mean_removed: T,
}

/// `b` from the closed form for `b'`, integrated with `b(1) = 0`.
pub fn compute_b<T: Real>(s: &InterfaceState<T>, opts: &StateOptions) -> Result<FrameVelocity<T>> {
    let zp_inv = s.zp().recip()?;
    compute_b_with(s, &zp_inv, opts)
}

fn compute_b_with<T: Real>(s: &InterfaceState<T>, zp_inv: &Field<T>, opts: &StateOptions) -> Result<FrameVelocity<T>> {
    let zt = s.zt();
    let dzt = opts.mul(zp_inv, &zt.derivative());
    let c1 = commutator_h_with(&zp_inv.conj(), &s.vbar.derivative(), opts.products)?;
    let c2 = commutator_h_with(&zt, &zp_inv.derivative(), opts.products)?;
    let raw = &dzt.re().scale_re(T::lit(2.0)) + &(&c2 - &c1).re();
    let mean = raw.mean().re;
    let b_prime = raw.add_const(Complex::new(-mean, T::zero()));
    let b = real(&b_prime.antiderivative());
    let b0 = b.at(0);
    let b = b.add_const(-b0);
    Ok(FrameVelocity { b, b_prime, mean_removed: mean })
}

/// `b = Re (I - H)(Z_t / Z') + c` with `b(1) = 0`; an independent route.
pub fn compute_b_direct<T: Real>(s: &InterfaceState<T>, opts: &StateOptions) -> Result<Field<T>> {
    let q = opts.mul(&s.zt(), &s.zp().recip()?);
    let b = (&q - &q.hilbert()).re();
    let b0 = b.at(0);
    Ok(b.add_const(-b0))
}

/// `D f = (1/Z') f'`.
pub fn weighted_derivative<T: Real>(zp_inv: &Field<T>, f: &Field<T>, rule: ProductRule) -> Field<T> {
    zp_inv.mul_with(&f.derivative(), rule)
}

/// `A_t |Z'|^2 = -Im(2 [Z_t, H] Zbar_tt' + 2 [Z_tt, H] Vbar' - [Z_t, Z_t; D Vbar])`.
pub fn compute_at<T: Real>(
    s: &InterfaceState<T>,
    zp_inv: &Field<T>,
    ztt_bar: &Field<T>,
    opts: &StateOptions,
) -> Result<Field<T>> {
    let zt = s.zt();
    let dv = s.vbar.derivative();
    let two = T::lit(2.0);
    let t1 = commutator_h_with(&zt, &ztt_bar.derivative(), opts.products)?.scale_re(two);
    let t2 = commutator_h_with(&ztt_bar.conj(), &dv, opts.products)?.scale_re(two);
    let t3 = calderon_bracket(&zt, &zt, &opts.mul(zp_inv, &dv))?;
    Ok((-&(&(&t1 + &t2) - &t3)).im())
}

/// `A_t / A = (A_t |Z'|^2) / A1`. Requires `A1 >= 1/2`.
pub fn compute_at_over_a<T: Real>(a1: &Field<T>, at_abs2: &Field<T>) -> Result<Field<T>> {
    if let Some((j, z)) = a1.samples().iter().enumerate().find(|(_, z)| !(z.re >= T::lit(0.5))) {
        return Err(Error::A1TooSmall { index: j, value: z.re.as_f64() });
    }
    Ok(at_abs2.div_pointwise(a1))
}

/// Everything the evolution and the energy need from one state.
#[derive(Debug, Clone)]
pub struct DerivedState<T: Real> {
    pub zp: Field<T>,
    pub zp_inv: Field<T>,
    pub a1: Field<T>,
    pub ztt_bar: Field<T>,
    pub b: Field<T>,
    pub b_prime: Field<T>,
    pub at_abs2: Field<T>,
    pub at_over_a: Field<T>,
    /// `A1 / |Z'|`, the Taylor sign coefficient.
    pub taylor: Field<T>,
    /// `A1 / |Z'|^2`.
    pub cal_a: Field<T>,
    pub warnings: Vec<String>,
}

/// The part of [`DerivedState`] the time stepper needs.
#[derive(Debug, Clone)]
pub struct Kinematics<T: Real> {
    pub zp: Field<T>,
    pub zp_inv: Field<T>,
    pub a1: Field<T>,
    pub ztt_bar: Field<T>,
    pub frame: FrameVelocity<T>,
}

pub fn kinematics<T: Real>(s: &InterfaceState<T>, opts: &StateOptions) -> Result<Kinematics<T>> {
    let zp = s.zp();
    let a1 = compute_a1(s, opts)?;
    let (ztt_bar, zp_inv) = compute_ztt(s, &a1)?;
    let frame = compute_b_with(s, &zp_inv, opts)?;
    Ok(Kinematics { zp, zp_inv, a1, ztt_bar, frame })
}

pub fn derive<T: Real>(s: &InterfaceState<T>, opts: &StateOptions) -> Result<DerivedState<T>> {
    let k = kinematics(s, opts)?;
    let mut warnings = Vec::new();
    if k.frame.mean_removed.abs().as_f64() > opts.tol.gauge_tol {
        warnings.push(format!("b' had mean {:.3e} before removal", k.frame.mean_removed.as_f64()));
    }
    let min_a1 = k.a1.min_re().as_f64();
    if min_a1 < 1.0 - opts.tol.a1_tol {
        warnings.push(format!("A1 dips to {min_a1:.12}"));
    }
    let at_abs2 = compute_at(s, &k.zp_inv, &k.ztt_bar, opts)?;
    let at_over_a = compute_at_over_a(&k.a1, &at_abs2)?;
    let zp_abs = k.zp.abs();
    let taylor = k.a1.div_pointwise(&zp_abs);
    let cal_a = k.a1.div_pointwise(&k.zp.abs_sqr());
    Ok(DerivedState {
        zp: k.zp,
        zp_inv: k.zp_inv,
        a1: k.a1,
        ztt_bar: k.ztt_bar,
        b: k.frame.b,
        b_prime: k.frame.b_prime,
        at_abs2,
        at_over_a,
        taylor,
        cal_a,
        warnings,
    })
}

/// Norms of the quantities a priori estimates are stated in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlledQuantities {
    pub a1_linf: f64,
    pub a1_min: f64,
    pub dzt_linf: f64,
    pub dzt_half: f64,
    pub d2zt_l2: f64,
    pub dt_dzt_linf: f64,
    pub b_prime_linf: f64,
    pub at_over_a_linf: f64,
    pub zp_inv_linf: f64,
    pub d_zp_inv_l2: f64,
    pub ztt_linf: f64,
    pub taylor_min: f64,
}

pub fn controlled_quantities<T: Real>(
    s: &InterfaceState<T>,
    d: &DerivedState<T>,
    opts: &StateOptions,
) -> ControlledQuantities {
    let rule = opts.products;
    let dzt = weighted_derivative(&d.zp_inv, &s.vbar, rule);
    let d2zt = weighted_derivative(&d.zp_inv, &dzt, rule);
    let dzt_conj = weighted_derivative(&d.zp_inv, &s.zt(), rule);
    let dt_dzt = &weighted_derivative(&d.zp_inv, &d.ztt_bar, rule) - &opts.mul(&dzt_conj, &dzt);
    ControlledQuantities {
        a1_linf: d.a1.linf_norm().as_f64(),
        a1_min: d.a1.min_re().as_f64(),
        dzt_linf: dzt.linf_norm().as_f64(),
        dzt_half: dzt.h_half_norm_sq().sqrt().as_f64(),
        d2zt_l2: d2zt.l2_norm().as_f64(),
        dt_dzt_linf: dt_dzt.linf_norm().as_f64(),
        b_prime_linf: d.b_prime.linf_norm().as_f64(),
        at_over_a_linf: d.at_over_a.linf_norm().as_f64(),
        zp_inv_linf: d.zp_inv.linf_norm().as_f64(),
        d_zp_inv_l2: d.zp_inv.derivative().l2_norm().as_f64(),
        ztt_linf: d.ztt_bar.linf_norm().as_f64(),
        taylor_min: d.taylor.min_re().as_f64(),
    }
}
