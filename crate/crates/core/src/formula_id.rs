//! Short names for the generated formulas: `B6`, `BC10`, `IC6`, `centered:p=3`.
//!
//! The number after a short prefix is the accuracy order. Centered families
//! (`C`, `CA`, `IC`, `ICA`) gain two orders per correction, so their order is
//! `2p + 2` and must be even and at least 4; the one-sided families (`B`, `F`,
//! `BC`, `FC`) use `p` as the order directly.

use std::fmt;
use std::str::FromStr;

use crate::defcor::{
    backward_centered, centered_average_formula, centered_formula, forward_centered, interior_centered,
    standard_backward, standard_forward, CorrectionFormula, Family,
};
use crate::error::{FdError, Result};
use crate::stencil::{flatten, Stencil};

const PREFIXES: [(&str, Family); 8] = [
    ("ICA", Family::InteriorCenteredAverage),
    ("IC", Family::InteriorCentered),
    ("CA", Family::CenteredAverage),
    ("BC", Family::BackwardCentered),
    ("FC", Family::ForwardCentered),
    ("C", Family::Centered),
    ("B", Family::StandardBackward),
    ("F", Family::StandardForward),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FormulaId {
    pub family: Family,
    pub p: u32,
}

fn is_centered(family: Family) -> bool {
    matches!(
        family,
        Family::Centered | Family::CenteredAverage | Family::InteriorCentered | Family::InteriorCenteredAverage
    )
}

impl FormulaId {
    pub fn new(family: Family, p: u32) -> Result<Self> {
        let min = if is_centered(family) { 1 } else { 2 };
        if family == Family::General || p < min {
            return Err(FdError::FormulaId(format!("{family}:p={p}")));
        }
        Ok(FormulaId { family, p })
    }

    /// Builds the id from a family and an accuracy order.
    pub fn from_order(family: Family, order: u32) -> Result<Self> {
        if is_centered(family) {
            if !order.is_multiple_of(2) || order < 4 {
                return Err(FdError::FormulaId(format!(
                    "{family} formulas have even orders >= 4, got {order}"
                )));
            }
            FormulaId::new(family, (order - 2) / 2)
        } else {
            FormulaId::new(family, order)
        }
    }

    pub fn order(&self) -> u32 {
        if is_centered(self.family) {
            2 * self.p + 2
        } else {
            self.p
        }
    }

    pub fn formula(&self) -> Result<CorrectionFormula> {
        let p = self.p;
        match self.family {
            Family::Centered => centered_formula(p),
            Family::CenteredAverage => centered_average_formula(p),
            Family::InteriorCentered => Ok(interior_centered(p)?.0),
            Family::InteriorCenteredAverage => Ok(interior_centered(p)?.1),
            Family::ForwardCentered => forward_centered(p),
            Family::BackwardCentered => backward_centered(p),
            Family::StandardForward => standard_forward(p),
            Family::StandardBackward => standard_backward(p),
            Family::General => Err(FdError::FormulaId("general".into())),
        }
    }

    pub fn stencil(&self) -> Result<Stencil> {
        flatten(&self.formula()?)
    }

    /// Every id of every family with accuracy order at most `max_order`.
    pub fn all_up_to(max_order: u32) -> Vec<FormulaId> {
        let mut ids = Vec::new();
        for (_, family) in PREFIXES {
            for order in 2..=max_order {
                if let Ok(id) = FormulaId::from_order(family, order) {
                    ids.push(id);
                }
            }
        }
        ids
    }
}

impl FromStr for FormulaId {
    type Err = FdError;

    fn from_str(text: &str) -> Result<Self> {
        let bad = || FdError::FormulaId(text.to_string());
        let trimmed = text.trim();
        if let Some((name, param)) = trimmed.split_once(':') {
            let family = PREFIXES
                .iter()
                .map(|(_, f)| *f)
                .find(|f| f.as_str() == name.trim())
                .ok_or_else(bad)?;
            let p = param
                .trim()
                .strip_prefix("p=")
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(bad)?;
            return FormulaId::new(family, p);
        }
        let split = trimmed.find(|c: char| c.is_ascii_digit()).ok_or_else(bad)?;
        let (prefix, digits) = trimmed.split_at(split);
        let family = PREFIXES
            .iter()
            .find(|(short, _)| short.eq_ignore_ascii_case(prefix))
            .map(|(_, f)| *f)
            .ok_or_else(bad)?;
        let order = digits.parse().map_err(|_| bad())?;
        FormulaId::from_order(family, order)
    }
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = PREFIXES
            .iter()
            .find(|(_, family)| *family == self.family)
            .map(|(short, _)| *short)
            .expect("every named family has a prefix");
        write!(f, "{prefix}{}", self.order())
    }
}
