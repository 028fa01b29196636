//! Flat node/weight stencils, their moment-condition oracle and verification.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::defcor::{CorrectionFormula, Family};
use crate::error::{FdError, Result};
use crate::exactmath::{factorial, format_rational, pow, serde_rational};
use crate::gridops::{expand, node_list, OperatorExpr};
use crate::Rational;

/// Formula family and parameter a stencil was flattened from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub family: Family,
    pub p: u32,
}

/// `u^(m)(x0) ≈ k^{-m} Σ_j w_j u(x0 + o_j k)`, with
/// `approximation - u^(m)(x0) = error_constant k^order u^(m+order)(x0) + ...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StencilRepr", into = "StencilRepr")]
pub struct Stencil {
    m: u32,
    order: u32,
    error_constant: Rational,
    offsets: Vec<Rational>,
    weights: Vec<Rational>,
    provenance: Option<Provenance>,
}

#[derive(Serialize, Deserialize)]
struct StencilRepr {
    m: u32,
    order: u32,
    #[serde(with = "serde_rational")]
    error_constant: Rational,
    #[serde(with = "node_list")]
    nodes: BTreeMap<Rational, Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

impl TryFrom<StencilRepr> for Stencil {
    type Error = FdError;

    fn try_from(repr: StencilRepr) -> Result<Self> {
        let mut stencil = Stencil::new(repr.m, repr.order, repr.error_constant, repr.nodes)?;
        stencil.provenance = repr.provenance;
        Ok(stencil)
    }
}

impl From<Stencil> for StencilRepr {
    fn from(s: Stencil) -> Self {
        StencilRepr {
            m: s.m,
            order: s.order,
            error_constant: s.error_constant,
            nodes: s.offsets.into_iter().zip(s.weights).collect(),
            provenance: s.provenance,
        }
    }
}

impl Stencil {
    /// Builds a stencil from `(offset, weight)` pairs, sorting by offset.
    pub fn new<I>(m: u32, order: u32, error_constant: Rational, nodes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let mut pairs: Vec<_> = nodes.into_iter().collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(FdError::Domain("stencil offsets must be distinct".into()));
        }
        if pairs.is_empty() {
            return Err(FdError::Domain("stencil needs at least one node".into()));
        }
        let (offsets, weights) = pairs.into_iter().unzip();
        Ok(Stencil {
            m,
            order,
            error_constant,
            offsets,
            weights,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn error_constant(&self) -> &Rational {
        &self.error_constant
    }

    /// Ascending offsets, in units of `k` from the evaluation point.
    pub fn offsets(&self) -> &[Rational] {
        &self.offsets
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.provenance
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.offsets.iter().zip(&self.weights)
    }

    /// `Σ_j w_j o_j^r`.
    pub fn moment(&self, r: u32) -> Rational {
        self.nodes().map(|(o, w)| w * num_traits::Pow::pow(o, r)).sum()
    }

    /// Copy with one weight replaced; used to exercise the verifier.
    pub fn with_weight(&self, index: usize, weight: Rational) -> Self {
        let mut out = self.clone();
        out.weights[index] = weight;
        out
    }
}

impl fmt::Display for Stencil {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "m={} order={} error_constant={} [",
            self.m,
            self.order,
            format_rational(&self.error_constant)
        )?;
        for (i, (o, w)) in self.nodes().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: {}", format_rational(o), format_rational(w))?;
        }
        f.write_str("]")
    }
}

/// Merges the seed and every correction of `formula` into one stencil and
/// checks the result with [`verify`].
///
/// Offsets are measured from the formula's evaluation point. Terms may use
/// different spacings as long as they are rational multiples of `k`; nodes
/// whose weights cancel are kept.
pub fn flatten(formula: &CorrectionFormula) -> Result<Stencil> {
    let m = formula.derivative;
    let mut nodes: BTreeMap<Rational, Rational> = BTreeMap::new();
    let mut add = |expr: &OperatorExpr, coeff: &Rational| -> Result<()> {
        if expr.base_shift() != formula.evaluation_point() {
            return Err(FdError::Domain(format!(
                "term {expr} is not evaluated at {}",
                format_rational(formula.evaluation_point())
            )));
        }
        // coeff k^{d-m} (s k)^{-d} Σ w u(x0 + o s k) = k^{-m} Σ (coeff s^{-d} w) u(...)
        let raw = expand(expr);
        let scale = coeff * pow(expr.spacing(), -(raw.scale_order as i32))?;
        for (offset, weight) in &raw.nodes {
            *nodes.entry(offset * expr.spacing()).or_insert_with(Rational::zero) += &scale * weight;
        }
        Ok(())
    };
    add(&formula.base, &Rational::one())?;
    for term in &formula.terms {
        add(&term.expr, &-term.coeff.clone())?;
    }

    let mut stencil = Stencil::new(m, formula.order, formula.error_constant.clone(), nodes)?;
    if let Some(p) = formula.parameter {
        stencil = stencil.with_provenance(Provenance {
            family: formula.family,
            p,
        });
    }
    let report = verify(&stencil);
    if !report.passed() {
        return Err(FdError::Verification(Box::new(report)));
    }
    Ok(stencil)
}

/// Weights solving `Σ_j w_j o_j^r = m! [r = m]` for `r = 0..n-1`, `n` the
/// number of offsets, by exact Gaussian elimination.
///
/// When `m + q > n` the square system alone does not certify order `q`, so
/// the remaining moments `r = n..m+q-1` are checked as well.
pub fn oracle_weights(offsets: &[Rational], m: u32, q: u32) -> Result<Vec<Rational>> {
    let n = offsets.len();
    if n <= m as usize {
        return Err(FdError::OrderUnattainable {
            derivative: m,
            order: q,
            moment: n as u32,
        });
    }
    let mut sorted: Vec<_> = offsets.to_vec();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(FdError::Singular("duplicate offsets".into()));
    }

    // Augmented Vandermonde system, row r: o_j^r | m! [r = m].
    let mut rows: Vec<Vec<Rational>> = (0..n)
        .map(|r| {
            let mut row: Vec<Rational> = offsets.iter().map(|o| num_traits::Pow::pow(o, r as u32)).collect();
            let rhs = if r == m as usize {
                Rational::from_integer(factorial(m))
            } else {
                Rational::zero()
            };
            row.push(rhs);
            row
        })
        .collect();

    for col in 0..n {
        // Largest |numerator| pivot keeps intermediate entries small.
        let pivot = (col..n)
            .filter(|&r| !rows[r][col].is_zero())
            .max_by(|&a, &b| rows[a][col].numer().abs().cmp(&rows[b][col].numer().abs()))
            .ok_or_else(|| FdError::Singular(format!("no pivot in column {col}")))?;
        rows.swap(col, pivot);
        let inv = rows[col][col].recip();
        for entry in rows[col].iter_mut() {
            *entry *= &inv;
        }
        let pivot_row = rows[col].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (entry, p) in row.iter_mut().zip(&pivot_row) {
                *entry -= &factor * p;
            }
        }
    }
    let weights: Vec<Rational> = rows.into_iter().map(|mut row| row.pop().expect("augmented")).collect();

    for r in n as u32..m + q {
        let sum: Rational = offsets
            .iter()
            .zip(&weights)
            .map(|(o, w)| w * num_traits::Pow::pow(o, r))
            .sum();
        if !sum.is_zero() {
            return Err(FdError::OrderUnattainable {
                derivative: m,
                order: q,
                moment: r,
            });
        }
    }
    Ok(weights)
}

/// Outcome of [`verify`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub m: u32,
    pub order: u32,
    /// First `r < m + order` whose moment condition fails.
    pub first_failing_moment: Option<u32>,
    #[serde(with = "serde_rational")]
    pub claimed_error_constant: Rational,
    /// `(1/(m+q)!) Σ w_j o_j^{m+q}`.
    #[serde(with = "serde_rational")]
    pub recomputed_error_constant: Rational,
    /// Exact agreement with [`oracle_weights`]; `None` when the stencil has
    /// more nodes than the claimed order determines.
    pub matches_oracle: Option<bool>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.first_failing_moment.is_none()
            && self.claimed_error_constant == self.recomputed_error_constant
            && self.matches_oracle != Some(false)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "pass: m={} order={}", self.m, self.order);
        }
        write!(f, "fail: m={} order={}", self.m, self.order)?;
        if let Some(r) = self.first_failing_moment {
            write!(f, ", moment r={r} fails")?;
        }
        if self.claimed_error_constant != self.recomputed_error_constant {
            write!(
                f,
                ", error constant {} claimed, {} recomputed",
                format_rational(&self.claimed_error_constant),
                format_rational(&self.recomputed_error_constant)
            )?;
        }
        if self.matches_oracle == Some(false) {
            f.write_str(", weights differ from the moment oracle")?;
        }
        Ok(())
    }
}

/// Checks every moment condition, recomputes the error constant and, when
/// the claimed order pins the weights down, compares against the oracle.
pub fn verify(stencil: &Stencil) -> VerifyReport {
    let m = stencil.m;
    let q = stencil.order;
    let m_factorial = Rational::from_integer(factorial(m));
    let first_failing_moment = (0..m + q).find(|&r| {
        let expected = if r == m { m_factorial.clone() } else { Rational::zero() };
        stencil.moment(r) != expected
    });
    let recomputed_error_constant = stencil.moment(m + q) / Rational::from_integer(factorial(m + q));

    let matches_oracle = if stencil.offsets.len() <= (m + q) as usize {
        Some(
            oracle_weights(&stencil.offsets, m, q)
                .map(|w| w == stencil.weights)
                .unwrap_or(false),
        )
    } else {
        None
    };

    VerifyReport {
        m,
        order: q,
        first_failing_moment,
        claimed_error_constant: stencil.error_constant.clone(),
        recomputed_error_constant,
        matches_oracle,
    }
}
