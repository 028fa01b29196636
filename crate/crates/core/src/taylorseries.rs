//! Exact Taylor expansion of an operator applied to an analytic function.
//!
//! For an operator of differentiation order `m`,
//! `expr u(t) = u^(m)(t) + Σ_{i>m} e_i k^(i-m) u^(i)(t)`,
//! with `e_i = spacing^(i-m) / i! · Σ_j w_j o_j^i` over the expanded nodes.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{FdError, Result};
use crate::exactmath::{factorial, format_rational, parse_rational};
use crate::gridops::{expand, OperatorExpr};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorSeries {
    lead: u32,
    /// `e_i` for `lead < i <= truncation`, zeros included.
    coeffs: BTreeMap<u32, Rational>,
}

/// Enough terms for every correction of a formula of the given order.
pub fn default_truncation(lead: u32, order: u32) -> u32 {
    lead + 2 * order + 2
}

pub fn error_series(expr: &OperatorExpr, truncation: u32) -> Result<ErrorSeries> {
    let lead = expr.order();
    if truncation <= lead {
        return Err(FdError::Truncation {
            truncation,
            order: lead,
        });
    }
    let raw = expand(expr);
    debug_assert!((0..lead).all(|i| raw.moment(i).is_zero()));
    debug_assert_eq!(raw.moment(lead), Rational::from_integer(factorial(lead)));

    let coeffs = (lead + 1..=truncation)
        .map(|i| {
            let scale = num_traits::Pow::pow(expr.spacing(), i - lead);
            let value = scale * raw.moment(i) / Rational::from_integer(factorial(i));
            (i, value)
        })
        .collect();
    Ok(ErrorSeries { lead, coeffs })
}

impl ErrorSeries {
    pub fn lead(&self) -> u32 {
        self.lead
    }

    pub fn truncation(&self) -> u32 {
        self.coeffs.keys().next_back().copied().unwrap_or(self.lead)
    }

    /// Coefficient of `k^(i-lead) u^(i)`; `None` past the truncation.
    pub fn coeff(&self, i: u32) -> Option<Rational> {
        if i < self.lead {
            Some(Rational::zero())
        } else if i == self.lead {
            Some(Rational::one())
        } else {
            self.coeffs.get(&i).cloned()
        }
    }

    /// Stored coefficients above the lead order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.coeffs.iter().map(|(i, c)| (*i, c))
    }

    /// First nonzero coefficient above the lead order.
    pub fn first_nonzero(&self) -> Option<(u32, &Rational)> {
        self.iter().find(|(_, c)| !c.is_zero())
    }
}

impl Serialize for ErrorSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Coeffs<'a>(&'a BTreeMap<u32, Rational>);

        impl Serialize for Coeffs<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(self.0.len()))?;
                for (i, c) in self.0 {
                    map.serialize_entry(&i.to_string(), &format_rational(c))?;
                }
                map.end()
            }
        }

        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("lead", &self.lead)?;
        map.serialize_entry("coeffs", &Coeffs(&self.coeffs))?;
        map.end()
    }
}

impl<'de> Deserialize<'de> for ErrorSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            lead: u32,
            coeffs: BTreeMap<String, String>,
        }

        let repr = Repr::deserialize(deserializer)?;
        let mut coeffs = BTreeMap::new();
        for (key, value) in repr.coeffs {
            let i: u32 = key.parse().map_err(D::Error::custom)?;
            if i <= repr.lead {
                return Err(D::Error::custom(format!(
                    "coefficient index {i} not above lead {}",
                    repr.lead
                )));
            }
            coeffs.insert(i, parse_rational(&value).map_err(D::Error::custom)?);
        }
        Ok(ErrorSeries {
            lead: repr.lead,
            coeffs,
        })
    }
}

/// Coefficient list of the classical backward expansion
/// `D-^m u = u^(m) + Σ_{i>m} k^(i-m)/i! · Σ_j (-1)^j C(m,j) (-j)^i · u^(i)`.
pub fn classical_backward_coefficient(m: u32, i: u32) -> Rational {
    let mut sum = BigInt::zero();
    for j in 0..=m {
        let term =
            crate::exactmath::binom(m, j).expect("j <= m") * num_traits::pow(BigInt::from(-(j as i64)), i as usize);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Rational::new(sum, factorial(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{binom, int, rat};

    #[test]
    fn forward_difference_series() {
        let s = error_series(&OperatorExpr::d_plus(1), 4).unwrap();
        assert_eq!(s.coeff(1), Some(int(1)));
        assert_eq!(s.coeff(2), Some(rat(1, 2)));
        assert_eq!(s.coeff(3), Some(rat(1, 6)));
        assert_eq!(s.coeff(4), Some(rat(1, 24)));
        assert_eq!(s.coeff(5), None);
    }

    #[test]
    fn second_difference_series() {
        let s = error_series(&OperatorExpr::composite(1), 6).unwrap();
        assert_eq!(s.coeff(4), Some(rat(1, 12)));
        assert_eq!(s.coeff(6), Some(rat(1, 360)));
        assert_eq!(s.coeff(3), Some(int(0)));
        assert_eq!(s.coeff(5), Some(int(0)));
    }

    #[test]
    fn centered_third_difference_series() {
        let expr = OperatorExpr::composite(1).cent(1).at(rat(1, 2));
        let s = error_series(&expr, 5).unwrap();
        assert_eq!(s.lead(), 3);
        assert_eq!(s.coeff(4), Some(int(0)));
        // (2 (3/2)^5 - 6 (1/2)^5) / 5!
        assert_eq!(s.coeff(5), Some(rat(1, 8)));
    }

    fn averaged_composite_closed_form(m: u32, i: u32) -> Rational {
        // a_{mi} = 1/2 Σ_j (-1)^j C(2m,j) [(m-j+1/2)^(2i) + (m-j-1/2)^(2i)]
        let mut sum = Rational::zero();
        for j in 0..=2 * m {
            let c = Rational::from_integer(binom(2 * m, j).unwrap());
            let base = int(m as i64) - int(j as i64);
            let plus = num_traits::Pow::pow(&(&base + rat(1, 2)), 2 * i);
            let minus = num_traits::Pow::pow(&(&base - rat(1, 2)), 2 * i);
            let term = c * (plus + minus);
            if j % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
        }
        sum / int(2)
    }

    #[test]
    fn averaged_composite_matches_closed_form() {
        let expr = OperatorExpr::composite(1).avg(1).at(rat(1, 2));
        let s = error_series(&expr, 4).unwrap();
        let a12 = averaged_composite_closed_form(1, 2);
        assert_eq!(a12, int(5));
        assert_eq!(s.coeff(4), Some(a12 / int(24)));

        for m in 1..=4u32 {
            let expr = OperatorExpr::composite(m).avg(1).at(rat(1, 2));
            let s = error_series(&expr, 2 * m + 9).unwrap();
            for i in m + 1..=m + 4 {
                let expected = averaged_composite_closed_form(m, i) / Rational::from_integer(factorial(2 * i));
                assert_eq!(s.coeff(2 * i), Some(expected), "m={m} i={i}");
                assert_eq!(s.coeff(2 * i + 1), Some(int(0)));
            }
        }
    }

    fn signed_binomial_moment(n: u32, shift: &Rational, power: u32) -> Rational {
        // Σ_{j=0}^{n} (-1)^j C(n,j) (shift - j)^power
        (0..=n)
            .map(|j| {
                let c = Rational::from_integer(binom(n, j).unwrap());
                let t = c * num_traits::Pow::pow(&(shift - int(j as i64)), power);
                if j % 2 == 0 {
                    t
                } else {
                    -t
                }
            })
            .sum()
    }

    #[test]
    fn forward_power_closed_form() {
        for m in 1..=6u32 {
            let s = error_series(&OperatorExpr::d_plus(m), m + 6).unwrap();
            for i in m + 1..=m + 6 {
                let expected = signed_binomial_moment(m, &int(m as i64), i) / Rational::from_integer(factorial(i));
                assert_eq!(s.coeff(i), Some(expected));
            }
        }
    }

    #[test]
    fn backward_power_matches_classical_expansion() {
        for m in 1..=6u32 {
            let s = error_series(&OperatorExpr::d_minus(m), m + 6).unwrap();
            for i in m + 1..=m + 6 {
                assert_eq!(s.coeff(i), Some(classical_backward_coefficient(m, i)), "m={m} i={i}");
            }
        }
        let s = error_series(&OperatorExpr::d_minus(1), 3).unwrap();
        assert_eq!(s.coeff(2), Some(rat(-1, 2)));
        assert_eq!(s.coeff(3), Some(rat(1, 6)));
    }

    #[test]
    fn composite_families_closed_forms() {
        for m in 0..=4u32 {
            let mi = int(m as i64);
            // D-(D+D-)^m at t_n, nodes m - j.
            let odd = error_series(&OperatorExpr::composite(m).bwd(1), 2 * m + 7).unwrap();
            for i in 2 * m + 2..=2 * m + 7 {
                let expected = signed_binomial_moment(2 * m + 1, &mi, i) / Rational::from_integer(factorial(i));
                assert_eq!(odd.coeff(i), Some(expected));
            }
            if m == 0 {
                continue;
            }
            // (D+D-)^m at t_n: only even powers survive.
            let even = error_series(&OperatorExpr::composite(m), 2 * m + 8).unwrap();
            for i in m + 1..=m + 4 {
                let expected = signed_binomial_moment(2 * m, &mi, 2 * i) / Rational::from_integer(factorial(2 * i));
                assert_eq!(even.coeff(2 * i), Some(expected));
                assert_eq!(even.coeff(2 * i - 1), Some(int(0)));
            }
            // D(D+D-)^m at t_{n+1/2}: only odd powers survive, nodes m + 1/2 - j.
            let centered = error_series(&OperatorExpr::composite(m).cent(1).at(rat(1, 2)), 2 * m + 9).unwrap();
            for i in m + 1..=m + 4 {
                let expected = signed_binomial_moment(2 * m + 1, &(&mi + rat(1, 2)), 2 * i + 1)
                    / Rational::from_integer(factorial(2 * i + 1));
                assert_eq!(centered.coeff(2 * i + 1), Some(expected));
                assert_eq!(centered.coeff(2 * i), Some(int(0)));
            }
        }
    }

    #[test]
    fn centered_composite_nodes_are_not_shifted_by_a_whole_step() {
        // Expanding about t_{n+1/2} with nodes t_{n+m-j} (offsets m - j - 1/2)
        // describes D-(D+D-)^m u(t_n), not D(D+D-)^m u(t_{n+1/2}).
        let direct = signed_binomial_moment(3, &rat(3, 2), 5);
        let shifted = signed_binomial_moment(3, &rat(1, 2), 5);
        assert_eq!(direct, int(15));
        assert_eq!(shifted, int(75));
        let s = error_series(&OperatorExpr::composite(1).cent(1).at(rat(1, 2)), 5).unwrap();
        assert_eq!(s.coeff(5), Some(direct / int(120)));
    }

    #[test]
    fn spacing_scales_coefficients() {
        let wide = OperatorExpr::d_plus(1).with_spacing(int(3)).unwrap();
        let s = error_series(&wide, 3).unwrap();
        assert_eq!(s.coeff(2), Some(rat(3, 2)));
        assert_eq!(s.coeff(3), Some(rat(9, 6)));
    }

    #[test]
    fn truncation_must_exceed_order() {
        assert!(matches!(
            error_series(&OperatorExpr::composite(2), 4),
            Err(FdError::Truncation {
                truncation: 4,
                order: 4
            })
        ));
    }

    #[test]
    fn json_shape() {
        let s = error_series(&OperatorExpr::d_plus(1), 3).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"lead":1,"coeffs":{"2":"1/2","3":"1/6"}}"#);
        let back: ErrorSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
