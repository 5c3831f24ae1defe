//! The bicomplex algebra 𝔹 = {u + jv : u, v ∈ ℂ} with j² = −1 and ij = ji.
//!
//! Values are stored as the pair (Sc W, Vec W). Products, inverses and the
//! exponential go through the idempotent coordinates
//! W± = Sc W ∓ i·Vec W, where multiplication is componentwise.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative threshold below which an idempotent component counts as zero.
pub const ZERO_DIVISOR_RTOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Bicomplex {
    pub sc: Complex64,
    pub vec: Complex64,
}

/// Idempotent coordinates: W = p⁺·plus + p⁻·minus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IdempotentPair {
    pub plus: Complex64,
    pub minus: Complex64,
}

impl IdempotentPair {
    pub const fn new(plus: Complex64, minus: Complex64) -> Self {
        Self { plus, minus }
    }

    pub fn recompose(self) -> Bicomplex {
        Bicomplex::from_idempotent(self)
    }
}

impl Bicomplex {
    pub const ZERO: Self = Self::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    pub const ONE: Self = Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    pub const J: Self = Self::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    /// The imaginary unit i of the scalar field, i.e. i + j·0.
    pub const I: Self = Self::new(Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0));
    /// k = ij.
    pub const K: Self = Self::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
    /// p⁺ = (1 + k)/2.
    pub const P_PLUS: Self = Self::new(Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5));
    /// p⁻ = (1 − k)/2.
    pub const P_MINUS: Self = Self::new(Complex64::new(0.5, 0.0), Complex64::new(0.0, -0.5));

    pub const fn new(sc: Complex64, vec: Complex64) -> Self {
        Self { sc, vec }
    }

    pub fn from_parts(sc_re: f64, sc_im: f64, vec_re: f64, vec_im: f64) -> Self {
        Self::new(Complex64::new(sc_re, sc_im), Complex64::new(vec_re, vec_im))
    }

    /// A complex scalar embedded as u + j·0.
    pub const fn scalar(c: Complex64) -> Self {
        Self::new(c, Complex64::new(0.0, 0.0))
    }

    pub const fn real(x: f64) -> Self {
        Self::scalar(Complex64::new(x, 0.0))
    }

    pub fn idempotent(self) -> IdempotentPair {
        IdempotentPair {
            plus: self.sc - I * self.vec,
            minus: self.sc + I * self.vec,
        }
    }

    pub fn from_idempotent(p: IdempotentPair) -> Self {
        Self {
            sc: (p.plus + p.minus) * 0.5,
            vec: (p.plus - p.minus) * I * 0.5,
        }
    }

    /// W̄ = u − jv. Swaps the idempotent components.
    pub fn conj_bar(self) -> Self {
        Self::new(self.sc, -self.vec)
    }

    /// W† = (Sc W)* − j(Vec W)*. Conjugates each idempotent component in place.
    pub fn conj_dagger(self) -> Self {
        Self::new(self.sc.conj(), -self.vec.conj())
    }

    /// W* = (Sc W)* + j(Vec W)*. Swaps and conjugates the idempotent components.
    pub fn conj_star(self) -> Self {
        Self::new(self.sc.conj(), self.vec.conj())
    }

    /// ⟨W, V⟩ = Sc(W V†) = Sc W (Sc V)* + Vec W (Vec V)*.
    pub fn inner(self, other: Self) -> Complex64 {
        self.sc * other.sc.conj() + self.vec * other.vec.conj()
    }

    pub fn norm_sqr(self) -> f64 {
        self.sc.norm_sqr() + self.vec.norm_sqr()
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_zero_divisor(self) -> bool {
        let p = self.idempotent();
        let tol = ZERO_DIVISOR_RTOL * self.norm().max(1.0);
        p.plus.norm() < tol || p.minus.norm() < tol
    }

    pub fn inverse(self) -> Result<Self> {
        if self.is_zero_divisor() {
            return Err(Error::ZeroDivisor(self.to_string()));
        }
        let p = self.idempotent();
        Ok(Self::from_idempotent(IdempotentPair {
            plus: p.plus.inv(),
            minus: p.minus.inv(),
        }))
    }

    /// e^W = p⁺e^{W⁺} + p⁻e^{W⁻}.
    pub fn exp(self) -> Self {
        let p = self.idempotent();
        Self::from_idempotent(IdempotentPair {
            plus: p.plus.exp(),
            minus: p.minus.exp(),
        })
    }

    pub fn scale(self, c: Complex64) -> Self {
        Self::new(self.sc * c, self.vec * c)
    }

    /// j·W without a full product: j(u + jv) = −v + ju.
    pub fn mul_j(self) -> Self {
        Self::new(-self.vec, self.sc)
    }

    pub fn is_finite(self) -> bool {
        self.sc.is_finite() && self.vec.is_finite()
    }
}

/// ẑ = x + jy for z = x + iy.
pub fn hat(z: Complex64) -> Bicomplex {
    Bicomplex::from_parts(z.re, 0.0, z.im, 0.0)
}

/// (ẑ − ẑ₀)ⁿ, whose idempotent components are ((z − z₀)*ⁿ, (z − z₀)ⁿ).
pub fn hat_power(z: Complex64, z0: Complex64, n: i32) -> Result<Bicomplex> {
    let d = z - z0;
    if n < 0 && d.norm() == 0.0 {
        return Err(Error::ZeroDivisor(format!(
            "negative power {n} of ẑ − ẑ₀ at z = z₀ = {z0}"
        )));
    }
    Ok(Bicomplex::from_idempotent(IdempotentPair {
        plus: d.conj().powi(n),
        minus: d.powi(n),
    }))
}

impl From<Complex64> for Bicomplex {
    fn from(c: Complex64) -> Self {
        Self::scalar(c)
    }
}

impl From<f64> for Bicomplex {
    fn from(x: f64) -> Self {
        Self::real(x)
    }
}

impl Add for Bicomplex {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.sc + o.sc, self.vec + o.vec)
    }
}

impl Sub for Bicomplex {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.sc - o.sc, self.vec - o.vec)
    }
}

impl Neg for Bicomplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.sc, -self.vec)
    }
}

impl Mul for Bicomplex {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let a = self.idempotent();
        let b = o.idempotent();
        Self::from_idempotent(IdempotentPair {
            plus: a.plus * b.plus,
            minus: a.minus * b.minus,
        })
    }
}

impl Mul<Complex64> for Bicomplex {
    type Output = Self;
    fn mul(self, c: Complex64) -> Self {
        self.scale(c)
    }
}

impl Mul<f64> for Bicomplex {
    type Output = Self;
    fn mul(self, x: f64) -> Self {
        Self::new(self.sc * x, self.vec * x)
    }
}

impl Mul<Bicomplex> for Complex64 {
    type Output = Bicomplex;
    fn mul(self, w: Bicomplex) -> Bicomplex {
        w.scale(self)
    }
}

impl Mul<Bicomplex> for f64 {
    type Output = Bicomplex;
    fn mul(self, w: Bicomplex) -> Bicomplex {
        w * self
    }
}

impl Div<f64> for Bicomplex {
    type Output = Self;
    fn div(self, x: f64) -> Self {
        Self::new(self.sc / x, self.vec / x)
    }
}

impl AddAssign for Bicomplex {
    fn add_assign(&mut self, o: Self) {
        self.sc += o.sc;
        self.vec += o.vec;
    }
}

impl SubAssign for Bicomplex {
    fn sub_assign(&mut self, o: Self) {
        self.sc -= o.sc;
        self.vec -= o.vec;
    }
}

impl MulAssign for Bicomplex {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl Sum for Bicomplex {
    fn sum<It: Iterator<Item = Self>>(iter: It) -> Self {
        iter.fold(Self::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Bicomplex> for Bicomplex {
    fn sum<It: Iterator<Item = &'a Self>>(iter: It) -> Self {
        iter.fold(Self::ZERO, |acc, w| acc + *w)
    }
}

fn fmt_complex(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    let sign = if c.im.is_sign_negative() { '-' } else { '+' };
    write!(f, "{}{}{}i", c.re, sign, c.im.abs())
}

/// Textual form `a+bi + j(c+di)`.
impl fmt::Display for Bicomplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_complex(f, self.sc)?;
        f.write_str(" + j(")?;
        fmt_complex(f, self.vec)?;
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Bicomplex, b: Bicomplex, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn j_squared_is_minus_one() {
        assert_eq!(Bicomplex::J * Bicomplex::J, Bicomplex::real(-1.0));
    }

    #[test]
    fn idempotents_annihilate() {
        assert_eq!(Bicomplex::P_PLUS * Bicomplex::P_MINUS, Bicomplex::ZERO);
        assert_eq!(Bicomplex::P_PLUS * Bicomplex::P_PLUS, Bicomplex::P_PLUS);
        assert_eq!(Bicomplex::P_PLUS + Bicomplex::P_MINUS, Bicomplex::ONE);
    }

    #[test]
    fn one_plus_j_times_one_minus_j() {
        let w = Bicomplex::ONE + Bicomplex::J;
        let v = Bicomplex::ONE - Bicomplex::J;
        // Expanded by hand: 1 − j + j − j² = 2.
        let expanded = Bicomplex::from_parts(
            1.0 * 1.0 - 1.0 * (-1.0),
            0.0,
            1.0 * (-1.0) + 1.0 * 1.0,
            0.0,
        );
        assert_eq!(w * v, expanded);
        assert_eq!(w * v, Bicomplex::real(2.0));
        let (pw, pv) = (w.idempotent(), v.idempotent());
        assert_eq!(pw.plus * pv.plus, c(2.0, 0.0));
        assert_eq!(pw.minus * pv.minus, c(2.0, 0.0));
    }

    #[test]
    fn product_matches_component_formula() {
        let w = Bicomplex::new(c(0.3, -1.2), c(2.0, 0.7));
        let v = Bicomplex::new(c(-0.4, 0.9), c(1.1, -0.6));
        let direct = Bicomplex::new(w.sc * v.sc - w.vec * v.vec, w.sc * v.vec + w.vec * v.sc);
        assert!(close(w * v, direct, 1e-14));
    }

    #[test]
    fn idempotent_split_examples() {
        assert_eq!(Bicomplex::ONE.idempotent(), IdempotentPair::new(c(1.0, 0.0), c(1.0, 0.0)));
        let pj = Bicomplex::J.idempotent();
        assert_eq!(pj, IdempotentPair::new(c(0.0, -1.0), c(0.0, 1.0)));
        let rebuilt = Bicomplex::P_PLUS * Bicomplex::scalar(pj.plus)
            + Bicomplex::P_MINUS * Bicomplex::scalar(pj.minus);
        assert_eq!(rebuilt, Bicomplex::J);
        assert_eq!(Bicomplex::P_PLUS.idempotent(), IdempotentPair::new(c(1.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn involution_examples() {
        let w = Bicomplex::ONE + Bicomplex::J;
        assert_eq!(w.conj_bar(), Bicomplex::ONE - Bicomplex::J);
        let w = Bicomplex::I + Bicomplex::J;
        assert_eq!(w.conj_dagger(), -Bicomplex::I - Bicomplex::J);
        let w = Bicomplex::new(c(0.0, 1.0), c(0.0, 1.0));
        assert_eq!(w.conj_star(), Bicomplex::new(c(0.0, -1.0), c(0.0, -1.0)));
    }

    #[test]
    fn dagger_conjugates_components_without_swapping() {
        let w = Bicomplex::new(c(0.3, -1.2), c(2.0, 0.7));
        let p = w.idempotent();
        let d = w.conj_dagger().idempotent();
        assert!((d.plus - p.plus.conj()).norm() < 1e-15);
        assert!((d.minus - p.minus.conj()).norm() < 1e-15);
        let s = w.conj_star().idempotent();
        assert!((s.plus - p.minus.conj()).norm() < 1e-15);
        let b = w.conj_bar().idempotent();
        assert!((b.plus - p.minus).norm() < 1e-15);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(Bicomplex::real(2.0).inverse().unwrap(), Bicomplex::real(0.5));
        assert_eq!(Bicomplex::J.inverse().unwrap(), -Bicomplex::J);
        assert!(matches!(Bicomplex::P_PLUS.inverse(), Err(Error::ZeroDivisor(_))));
        assert!(matches!(Bicomplex::ZERO.inverse(), Err(Error::ZeroDivisor(_))));
    }

    #[test]
    fn zero_divisor_threshold_is_scale_relative() {
        let small = Bicomplex::real(1e-10);
        assert!(!small.is_zero_divisor());
        assert!(small.inverse().is_ok());
        // Below unit magnitude the floor is absolute.
        assert!(Bicomplex::real(1e-200).is_zero_divisor());
        let big = Bicomplex::P_PLUS * 1e20 + Bicomplex::P_MINUS * 1e4;
        assert!(big.is_zero_divisor());
    }

    #[test]
    fn w_times_bar_w_is_sum_of_squares() {
        let w = Bicomplex::new(c(0.3, -1.2), c(2.0, 0.7));
        let prod = w * w.conj_bar();
        let expected = w.sc * w.sc + w.vec * w.vec;
        assert!((prod.sc - expected).norm() < 1e-14);
        assert!(prod.vec.norm() < 1e-14);
        assert_eq!(Bicomplex::P_PLUS * Bicomplex::P_PLUS.conj_bar(), Bicomplex::ZERO);
    }

    #[test]
    fn inner_and_norm_examples() {
        assert_eq!(Bicomplex::ONE.inner(Bicomplex::J), c(0.0, 0.0));
        let w = Bicomplex::ONE + Bicomplex::J;
        assert!((w.norm() - 2f64.sqrt()).abs() < 1e-15);
        assert!((w.inner(w).re - w.norm_sqr()).abs() < 1e-15);
    }

    #[test]
    fn exp_examples() {
        assert_eq!(Bicomplex::ZERO.exp(), Bicomplex::ONE);
        let w = Bicomplex::J * std::f64::consts::FRAC_PI_2;
        assert!(close(w.exp(), Bicomplex::J, 1e-15));
    }

    #[test]
    fn hat_power_examples() {
        let z = c(0.4, -0.7);
        assert_eq!(hat_power(z, c(0.0, 0.0), 0).unwrap(), Bicomplex::ONE);
        assert_eq!(hat_power(z, c(0.0, 0.0), 1).unwrap(), Bicomplex::from_parts(0.4, 0.0, -0.7, 0.0));
        let p = hat_power(c(1.0, 1.0), c(0.0, 0.0), 2).unwrap().idempotent();
        assert!((p.plus - c(0.0, -2.0)).norm() < 1e-15);
        assert!((p.minus - c(0.0, 2.0)).norm() < 1e-15);
        assert!(matches!(hat_power(z, z, -1), Err(Error::ZeroDivisor(_))));
        let w = hat_power(z, c(0.1, 0.1), -2).unwrap() * hat_power(z, c(0.1, 0.1), 2).unwrap();
        assert!(close(w, Bicomplex::ONE, 1e-14));
    }

    #[test]
    fn display_form() {
        let w = Bicomplex::from_parts(1.0, 2.0, 3.0, -4.0);
        assert_eq!(w.to_string(), "1+2i + j(3-4i)");
    }
}
