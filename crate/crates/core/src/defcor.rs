//! Deferred-correction synthesis of finite-difference formulae.
//!
//! Start from a low-order seed operator `B` approximating `u^(m)` and its
//! exact error series. Each correction operator `T` of order `d` satisfies
//! `T = u^(d) + O(k)`, so subtracting `r_d k^(d-m) T` (with `r_d` the
//! current coefficient of `k^(d-m) u^(d)`) cancels that error term and
//! folds the rest of `T`'s series into the residual. Every named family
//! below is this loop with a fixed choice of seed and correction operators.

use std::fmt;

use log::debug;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{FdError, Result};
use crate::exactmath::{int, rat, serde_rational};
use crate::gridops::OperatorExpr;
use crate::taylorseries::{default_truncation, error_series};
use crate::Rational;

/// Largest truncation tried when a residual vanishes through the default one.
const MAX_TRUNCATION: u32 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Centered,
    CenteredAverage,
    InteriorCentered,
    InteriorCenteredAverage,
    ForwardCentered,
    BackwardCentered,
    StandardForward,
    StandardBackward,
    General,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Centered => "centered",
            Family::CenteredAverage => "centered-average",
            Family::InteriorCentered => "interior-centered",
            Family::InteriorCenteredAverage => "interior-centered-average",
            Family::ForwardCentered => "forward-centered",
            Family::BackwardCentered => "backward-centered",
            Family::StandardForward => "standard-forward",
            Family::StandardBackward => "standard-backward",
            Family::General => "general",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One subtracted correction: `coeff * k^(order(expr) - m) * expr`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    #[serde(with = "serde_rational")]
    pub coeff: Rational,
    #[serde(rename = "operator")]
    pub expr: OperatorExpr,
}

/// `u^(m)(t) = base u(t) - Σ coeff_i k^(d_i - m) T_i u(t) - E k^q u^(m+q)(t) + ...`
///
/// `error_constant` is `E` in `formula - u^(m) = E k^q u^(m+q) + O(k^(q+1))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionFormula {
    pub family: Family,
    #[serde(rename = "m")]
    pub derivative: u32,
    pub order: u32,
    #[serde(with = "serde_rational")]
    pub error_constant: Rational,
    pub terms: Vec<Term>,
    pub base: OperatorExpr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<u32>,
}

impl CorrectionFormula {
    /// Grid position (units of `k`) the formula approximates at.
    pub fn evaluation_point(&self) -> &Rational {
        self.base.base_shift()
    }

    // Factor turning a stored (subtracted) coefficient into the one the
    // family's textbook form prints.
    fn table_factor(&self) -> Rational {
        match self.family {
            Family::BackwardCentered | Family::StandardBackward => int(-1),
            Family::InteriorCentered => self.base.spacing().clone(),
            _ => Rational::one(),
        }
    }

    /// Coefficients in the family's own convention, indexed by the order of
    /// their operator: `c_i` for centered and interior families (the interior
    /// derivative form divides by `b - a = (2p+1)k`), `a_i` / `b_i` for the
    /// forward/backward-centered pair, `(-1)^i/i` and `1/i` for the standard
    /// one-sided formulas.
    pub fn table_coefficients(&self) -> Vec<(u32, Rational)> {
        let factor = self.table_factor();
        self.terms
            .iter()
            .map(|t| (t.expr.order(), &t.coeff * &factor))
            .collect()
    }

    /// The error constant in the same convention, i.e. the coefficient the
    /// next correction would receive. Indexed by `m + order`.
    pub fn table_error_constant(&self) -> (u32, Rational) {
        (self.derivative + self.order, &self.error_constant * self.table_factor())
    }
}

/// Runs the correction loop for a seed `base` and explicit correction
/// operators, stopping as soon as the residual reaches order `target`.
///
/// `epsilons` rescales the spacing of each choice (`k_i = ε_i k`); pass an
/// empty slice for unit spacings.
pub fn general_defcor(
    base: &OperatorExpr,
    target: u32,
    choices: &[OperatorExpr],
    epsilons: &[Rational],
) -> Result<CorrectionFormula> {
    let choices = if epsilons.is_empty() {
        choices.to_vec()
    } else {
        if epsilons.len() != choices.len() {
            return Err(FdError::Domain(format!(
                "{} spacing factors for {} choices",
                epsilons.len(),
                choices.len()
            )));
        }
        choices
            .iter()
            .zip(epsilons)
            .map(|(c, eps)| {
                let spacing = c.spacing() * eps;
                c.clone().with_spacing(spacing)
            })
            .collect::<Result<Vec<_>>>()?
    };
    synthesize(Family::General, None, base, target, &choices)
}

fn synthesize(
    family: Family,
    parameter: Option<u32>,
    base: &OperatorExpr,
    target: u32,
    choices: &[OperatorExpr],
) -> Result<CorrectionFormula> {
    if target == 0 {
        return Err(FdError::Domain("target order must be positive".into()));
    }
    let m = base.order();
    let widest = choices.iter().map(OperatorExpr::order).max().unwrap_or(0);
    let mut truncation = default_truncation(m, target).max(widest + 2);
    loop {
        if let Some((terms, order, error_constant)) = correct(base, target, choices, truncation)? {
            debug!(
                "{family}: {} terms, order {order}, error constant {error_constant}",
                terms.len()
            );
            return Ok(CorrectionFormula {
                family,
                derivative: m,
                order,
                error_constant,
                terms,
                base: base.clone(),
                parameter,
            });
        }
        // Exact through the truncation: look further for the error term.
        truncation *= 2;
        debug!("{family}: residual vanishes, truncation raised to {truncation}");
        if truncation > MAX_TRUNCATION {
            return Err(FdError::Domain(format!(
                "no error term found through order {MAX_TRUNCATION}"
            )));
        }
    }
}

type Corrected = (Vec<Term>, u32, Rational);

fn correct(base: &OperatorExpr, target: u32, choices: &[OperatorExpr], truncation: u32) -> Result<Option<Corrected>> {
    let m = base.order();
    let mut residual: Vec<(u32, Rational)> = error_series(base, truncation)?
        .iter()
        .map(|(i, c)| (i, c.clone()))
        .collect();
    let pending = |residual: &[(u32, Rational)]| residual.iter().find(|(_, c)| !c.is_zero()).map(|(i, _)| *i);

    let mut terms = Vec::new();
    for (idx, choice) in choices.iter().enumerate() {
        let next = pending(&residual);
        if next.is_none_or(|i| i - m >= target) {
            break;
        }
        if choice.base_shift() != base.base_shift() {
            return Err(FdError::MismatchedBase {
                choice: idx,
                expected: Box::new(base.base_shift().clone()),
                found: Box::new(choice.base_shift().clone()),
            });
        }
        let d = choice.order();
        let next = next.expect("checked above");
        if d <= m || d > next {
            return Err(FdError::DegenerateChoice {
                choice: idx,
                operator_order: d,
                pending: next,
            });
        }
        let series = error_series(choice, truncation)?;
        let coeff = residual[(d - m - 1) as usize].1.clone();
        for (i, r) in residual.iter_mut() {
            if *i >= d {
                *r -= &coeff * series.coeff(*i).expect("within truncation");
            }
        }
        terms.push(Term {
            coeff,
            expr: choice.clone(),
        });
    }

    let Some(first) = pending(&residual) else {
        return Ok(None);
    };
    let order = first - m;
    if order < target {
        return Err(FdError::TargetNotReached {
            achieved: order,
            target,
        });
    }
    let error_constant = residual[(first - m - 1) as usize].1.clone();
    Ok(Some((terms, order, error_constant)))
}

fn require(p: u32, min: u32, what: &str) -> Result<()> {
    if p < min {
        return Err(FdError::Domain(format!("{what} needs p >= {min}, got {p}")));
    }
    Ok(())
}

/// `u'(t_{n+1/2}) = D u - Σ_{i=1}^{p} c_{2i+1} k^{2i} D(D+D-)^i u + O(k^{2p+2})`.
pub fn centered_formula(p: u32) -> Result<CorrectionFormula> {
    require(p, 1, "centered formula")?;
    let half = rat(1, 2);
    let base = OperatorExpr::new(0, 0, 1, 0).at(half.clone());
    let choices: Vec<_> = (1..=p)
        .map(|i| OperatorExpr::composite(i).cent(1).at(half.clone()))
        .collect();
    synthesize(Family::Centered, Some(p), &base, 2 * p + 2, &choices)
}

/// `u(t_{n+1/2}) = E u - Σ_{i=1}^{p} c_{2i} k^{2i} (D+D-)^i E u + O(k^{2p+2})`.
pub fn centered_average_formula(p: u32) -> Result<CorrectionFormula> {
    require(p, 1, "centered average formula")?;
    let half = rat(1, 2);
    let base = OperatorExpr::new(0, 0, 0, 1).at(half.clone());
    let choices: Vec<_> = (1..=p)
        .map(|i| OperatorExpr::composite(i).avg(1).at(half.clone()))
        .collect();
    synthesize(Family::CenteredAverage, Some(p), &base, 2 * p + 2, &choices)
}

/// Derivative and value at the midpoint of `[a, b]`, `b - a = (2p+1)k`,
/// seeded by the end-point difference quotient and average.
pub fn interior_centered(p: u32) -> Result<(CorrectionFormula, CorrectionFormula)> {
    require(p, 1, "interior-centered formula")?;
    let width = int(2 * p as i64 + 1);
    let middle = rat(2 * p as i64 + 1, 2);

    let base = OperatorExpr::new(0, 0, 1, 0)
        .at(middle.clone())
        .with_spacing(width.clone())?;
    let choices: Vec<_> = (1..=p)
        .map(|i| OperatorExpr::composite(i).cent(1).at(middle.clone()))
        .collect();
    let deriv = synthesize(Family::InteriorCentered, Some(p), &base, 2 * p + 2, &choices)?;

    let base = OperatorExpr::new(0, 0, 0, 1).at(middle.clone()).with_spacing(width)?;
    let choices: Vec<_> = (1..=p)
        .map(|i| OperatorExpr::composite(i).avg(1).at(middle.clone()))
        .collect();
    let value = synthesize(Family::InteriorCenteredAverage, Some(p), &base, 2 * p + 2, &choices)?;
    Ok((deriv, value))
}

/// `u'(t_n) = D+ u - Σ_{i=2}^{p} a_i k^{i-1} D-^τ(i) (D+D-)^μ(i) u + O(k^p)`.
pub fn forward_centered(p: u32) -> Result<CorrectionFormula> {
    require(p, 2, "forward-centered formula")?;
    let choices: Vec<_> = (2..=p).map(OperatorExpr::balanced).collect();
    synthesize(Family::ForwardCentered, Some(p), &OperatorExpr::d_plus(1), p, &choices)
}

/// `u'(t_{n+1}) = D- u + Σ_{i=2}^{p} b_i k^{i-1} D-^τ(i) (D+D-)^μ(i) u + O(k^p)`.
pub fn backward_centered(p: u32) -> Result<CorrectionFormula> {
    require(p, 2, "backward-centered formula")?;
    let at = int(1);
    let base = OperatorExpr::d_minus(1).at(at.clone());
    let choices: Vec<_> = (2..=p).map(|i| OperatorExpr::balanced(i).at(at.clone())).collect();
    synthesize(Family::BackwardCentered, Some(p), &base, p, &choices)
}

/// `u'(t_n) = D+ u - Σ_{i=2}^{p} ((-1)^i / i) k^{i-1} D+^i u + O(k^p)`.
pub fn standard_forward(p: u32) -> Result<CorrectionFormula> {
    require(p, 2, "standard forward formula")?;
    let choices: Vec<_> = (2..=p).map(OperatorExpr::d_plus).collect();
    synthesize(Family::StandardForward, Some(p), &OperatorExpr::d_plus(1), p, &choices)
}

/// `u'(t_{n+1}) = D- u + Σ_{i=2}^{p} (1/i) k^{i-1} D-^i u + O(k^p)`.
pub fn standard_backward(p: u32) -> Result<CorrectionFormula> {
    require(p, 2, "standard backward formula")?;
    let at = int(1);
    let base = OperatorExpr::d_minus(1).at(at.clone());
    let choices: Vec<_> = (2..=p).map(|i| OperatorExpr::d_minus(i).at(at.clone())).collect();
    synthesize(Family::StandardBackward, Some(p), &base, p, &choices)
}
