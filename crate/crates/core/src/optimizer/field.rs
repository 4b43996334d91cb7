//! Arithmetic used by the simplex tableau.
//!
//! [`Rational`] gives exact pivoting with zero tolerances; `f64` uses fixed pivot and
//! integrality tolerances.

use std::fmt::Debug;

use num_traits::{One, Signed, Zero};

use crate::ratlinalg::{self, Rational};

/// Pivot tolerance for floating-point tableaus.
pub const FLOAT_PIVOT_TOL: f64 = 1e-9;
/// Distance from an integer below which a float value counts as integral.
pub const FLOAT_INTEGRALITY_TOL: f64 = 1e-6;
/// Phase-one residual above which a float model is declared infeasible.
pub const FLOAT_FEASIBILITY_TOL: f64 = 1e-7;

/// Scalar field for the simplex tableau.
pub trait LpField: Clone + Debug + PartialOrd + Send + Sync + 'static {
    /// True when comparisons are exact and no tolerance applies.
    const EXACT: bool;

    fn zero_value() -> Self;
    fn one_value() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact value; floats convert through their binary expansion.
    fn to_rational(&self) -> Rational;

    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;
    /// `self -= a * b`
    fn sub_mul(&mut self, a: &Self, b: &Self);

    /// Exactly zero.
    fn is_zero_value(&self) -> bool;
    /// Numerically zero under the pivot tolerance.
    fn is_negligible(&self) -> bool;
    /// Rounds round-off noise to zero after an update.
    fn snap(&mut self) {}
    fn is_pos(&self) -> bool {
        !self.is_negligible() && *self > Self::zero_value()
    }
    fn is_neg(&self) -> bool {
        !self.is_negligible() && *self < Self::zero_value()
    }
    /// Phase-one objective value that still proves infeasibility.
    fn is_infeasibility_residual(&self) -> bool;
    /// Distance to the nearest integer, as `f64`.
    fn fractionality(&self) -> f64;
    fn is_integral(&self) -> bool;
    fn floor(&self) -> Self;
    fn ceil(&self) -> Self;
    /// Nearest integer.
    fn round_integral(&self) -> Self;
}

impl LpField for Rational {
    const EXACT: bool = true;

    fn zero_value() -> Self {
        Zero::zero()
    }
    fn one_value() -> Self {
        One::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        ratlinalg::to_f64(self)
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
    fn is_infeasibility_residual(&self) -> bool {
        !self.is_zero()
    }
    fn fractionality(&self) -> f64 {
        let f = self - self.floor();
        let g = <Rational as One>::one() - &f;
        ratlinalg::to_f64(if f < g { &f } else { &g })
    }
    fn is_integral(&self) -> bool {
        Rational::is_integer(self)
    }
    fn floor(&self) -> Self {
        Rational::floor(self)
    }
    fn ceil(&self) -> Self {
        Rational::ceil(self)
    }
    fn round_integral(&self) -> Self {
        Rational::round(self)
    }
}

impl LpField for f64 {
    const EXACT: bool = false;

    fn zero_value() -> Self {
        0.0
    }
    fn one_value() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        ratlinalg::to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_rational(&self) -> Rational {
        ratlinalg::from_f64(*self).unwrap_or_else(Zero::zero)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
    fn is_zero_value(&self) -> bool {
        *self == 0.0
    }
    fn is_negligible(&self) -> bool {
        f64::abs(*self) <= FLOAT_PIVOT_TOL
    }
    fn snap(&mut self) {
        if f64::abs(*self) < 1e-12 {
            *self = 0.0;
        }
    }
    fn is_infeasibility_residual(&self) -> bool {
        *self > FLOAT_FEASIBILITY_TOL
    }
    fn fractionality(&self) -> f64 {
        f64::abs(self - self.round())
    }
    fn is_integral(&self) -> bool {
        self.fractionality() <= FLOAT_INTEGRALITY_TOL
    }
    fn floor(&self) -> Self {
        // keep values within tolerance of an integer from dropping a whole unit
        if self.is_integral() {
            self.round()
        } else {
            f64::floor(*self)
        }
    }
    fn ceil(&self) -> Self {
        if self.is_integral() {
            self.round()
        } else {
            f64::ceil(*self)
        }
    }
    fn round_integral(&self) -> Self {
        self.round()
    }
}
