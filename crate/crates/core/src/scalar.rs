use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_traits::{Num, ToPrimitive};

use crate::Rational;

/// Values a stencil can be evaluated over: `f32`, `f64`, or exact [`Rational`].
pub trait Scalar: Clone + Debug + Display + PartialOrd + Num + Neg<Output = Self> {
    fn from_rational(value: &Rational) -> Self;

    fn is_finite_value(&self) -> bool {
        true
    }
}

impl Scalar for f64 {
    fn from_rational(value: &Rational) -> Self {
        value.to_f64().unwrap_or(f64::NAN)
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f32 {
    fn from_rational(value: &Rational) -> Self {
        value.to_f32().unwrap_or(f32::NAN)
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Rational {
    fn from_rational(value: &Rational) -> Self {
        value.clone()
    }
}
