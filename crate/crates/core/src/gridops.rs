//! Finite-difference operators on a uniform grid.
//!
//! An operator word `D+^a D-^b D^c E^d` is stored by its exponents: the
//! four operators commute, so nothing else about the order matters. Each
//! word carries the point it is evaluated at (`base_shift`, in units of the
//! global spacing `k`) and its own spacing `spacing * k`.
//!
//! Expanding a word gives a [`RawStencil`]: the operator equals
//! `(spacing * k)^-m * Σ w_j u(base + o_j * spacing * k)`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{FdError, Result};
use crate::exactmath::{binom, format_rational, int, rat, serde_rational};
use crate::scalar::Scalar;
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "OperatorRepr", into = "OperatorRepr")]
pub struct OperatorExpr {
    forward: u32,
    backward: u32,
    centered: u32,
    average: u32,
    base_shift: Rational,
    spacing: Rational,
}

impl OperatorExpr {
    /// The identity operator at `t_n` with unit spacing.
    pub fn identity() -> Self {
        Self {
            forward: 0,
            backward: 0,
            centered: 0,
            average: 0,
            base_shift: Rational::zero(),
            spacing: Rational::one(),
        }
    }

    pub fn new(forward: u32, backward: u32, centered: u32, average: u32) -> Self {
        Self {
            forward,
            backward,
            centered,
            average,
            ..Self::identity()
        }
    }

    /// `D+^n`.
    pub fn d_plus(n: u32) -> Self {
        Self::new(n, 0, 0, 0)
    }

    /// `D-^n`.
    pub fn d_minus(n: u32) -> Self {
        Self::new(0, n, 0, 0)
    }

    /// `(D+ D-)^mu`.
    pub fn composite(mu: u32) -> Self {
        Self::new(mu, mu, 0, 0)
    }

    /// `D-^tau (D+ D-)^mu` with `i = 2 mu + tau`: the operator of order `i`
    /// leaning at most one node backwards.
    pub fn balanced(i: u32) -> Self {
        Self::new(i / 2, i / 2 + i % 2, 0, 0)
    }

    pub fn fwd(mut self, n: u32) -> Self {
        self.forward += n;
        self
    }

    pub fn bwd(mut self, n: u32) -> Self {
        self.backward += n;
        self
    }

    pub fn cent(mut self, n: u32) -> Self {
        self.centered += n;
        self
    }

    pub fn avg(mut self, n: u32) -> Self {
        self.average += n;
        self
    }

    /// Evaluate at `t_{n + shift}`.
    pub fn at(mut self, shift: Rational) -> Self {
        self.base_shift = shift;
        self
    }

    pub fn with_spacing(mut self, spacing: Rational) -> Result<Self> {
        if !spacing.is_positive() {
            return Err(FdError::Domain(format!(
                "spacing factor must be positive, got {spacing}"
            )));
        }
        self.spacing = spacing;
        Ok(self)
    }

    pub fn forward(&self) -> u32 {
        self.forward
    }

    pub fn backward(&self) -> u32 {
        self.backward
    }

    pub fn centered(&self) -> u32 {
        self.centered
    }

    pub fn average(&self) -> u32 {
        self.average
    }

    pub fn base_shift(&self) -> &Rational {
        &self.base_shift
    }

    pub fn spacing(&self) -> &Rational {
        &self.spacing
    }

    /// Total differentiation order.
    pub fn order(&self) -> u32 {
        self.forward + self.backward + self.centered
    }
}

impl fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (name, power) in [
            ("D+", self.forward),
            ("D-", self.backward),
            ("D", self.centered),
            ("E", self.average),
        ] {
            match power {
                0 => {}
                1 => parts.push(name.to_string()),
                p => parts.push(format!("{name}^{p}")),
            }
        }
        if parts.is_empty() {
            parts.push("I".to_string());
        }
        write!(f, "{} @ {}", parts.join(" "), format_rational(&self.base_shift))?;
        if !self.spacing.is_one() {
            write!(f, " (spacing {}k)", format_rational(&self.spacing))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    fwd: u32,
    bwd: u32,
    cent: u32,
    avg: u32,
    #[serde(with = "serde_rational")]
    base_shift: Rational,
    #[serde(with = "serde_rational")]
    spacing: Rational,
}

impl TryFrom<OperatorRepr> for OperatorExpr {
    type Error = FdError;

    fn try_from(repr: OperatorRepr) -> Result<Self> {
        OperatorExpr::new(repr.fwd, repr.bwd, repr.cent, repr.avg)
            .at(repr.base_shift)
            .with_spacing(repr.spacing)
    }
}

impl From<OperatorExpr> for OperatorRepr {
    fn from(expr: OperatorExpr) -> Self {
        Self {
            fwd: expr.forward,
            bwd: expr.backward,
            cent: expr.centered,
            avg: expr.average,
            base_shift: expr.base_shift,
            spacing: expr.spacing,
        }
    }
}

/// Node/weight form of an operator word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawStencil {
    pub scale_order: u32,
    #[serde(with = "serde_rational")]
    pub base_shift: Rational,
    /// Offset (units of `spacing * k`, relative to the base point) to weight.
    #[serde(with = "node_list")]
    pub nodes: BTreeMap<Rational, Rational>,
}

impl RawStencil {
    pub fn weight_sum(&self) -> Rational {
        self.nodes.values().sum()
    }

    /// `Σ w_j o_j^power`.
    pub fn moment(&self, power: u32) -> Rational {
        self.nodes
            .iter()
            .map(|(offset, weight)| weight * num_traits::Pow::pow(offset, power))
            .sum()
    }
}

pub(crate) mod node_list {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::exactmath::serde_rational;
    use crate::Rational;

    #[derive(Serialize, Deserialize)]
    struct Node {
        #[serde(with = "serde_rational")]
        offset: Rational,
        #[serde(with = "serde_rational")]
        weight: Rational,
    }

    pub fn serialize<S: Serializer>(nodes: &BTreeMap<Rational, Rational>, serializer: S) -> Result<S::Ok, S::Error> {
        let list: Vec<Node> = nodes
            .iter()
            .map(|(offset, weight)| Node {
                offset: offset.clone(),
                weight: weight.clone(),
            })
            .collect();
        list.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<BTreeMap<Rational, Rational>, D::Error> {
        let list = Vec::<Node>::deserialize(deserializer)?;
        Ok(list.into_iter().map(|n| (n.offset, n.weight)).collect())
    }
}

type Laurent = BTreeMap<Rational, Rational>;

fn convolve(lhs: &Laurent, rhs: &Laurent) -> Laurent {
    let mut out = Laurent::new();
    for (a, wa) in lhs {
        for (b, wb) in rhs {
            *out.entry(a + b).or_insert_with(Rational::zero) += wa * wb;
        }
    }
    out.retain(|_, w| !w.is_zero());
    out
}

fn binomial_difference(power: u32, top: &Rational) -> Laurent {
    // (S^top - S^(top-1))^power expanded with the binomial theorem.
    (0..=power)
        .map(|j| {
            let weight = Rational::from_integer(binom(power, j).expect("j <= power"));
            let weight = if j % 2 == 0 { weight } else { -weight };
            (top - int(j as i64), weight)
        })
        .collect()
}

pub fn expand(expr: &OperatorExpr) -> RawStencil {
    // D+^a D-^b is a single binomial difference with top node a.
    let shifts = expr.forward + expr.backward;
    let mut nodes = binomial_difference(shifts, &int(expr.forward as i64));
    if expr.centered > 0 {
        nodes = convolve(
            &nodes,
            &binomial_difference(expr.centered, &rat(expr.centered as i64, 2)),
        );
    }
    let average: Laurent = [(rat(1, 2), rat(1, 2)), (rat(-1, 2), rat(1, 2))].into_iter().collect();
    for _ in 0..expr.average {
        nodes = convolve(&nodes, &average);
    }
    RawStencil {
        scale_order: expr.order(),
        base_shift: expr.base_shift.clone(),
        nodes,
    }
}

/// Rewrites `D+^a D-^b` with `a + b` even as `(D+D-)^((a+b)/2)` evaluated
/// `(a - b)/2` nodes away. Returns `Ok(None)` when `a + b` is odd.
pub fn normalize_composite(expr: &OperatorExpr) -> Result<Option<(OperatorExpr, Rational)>> {
    if expr.centered != 0 || expr.average != 0 {
        return Err(FdError::Domain(format!(
            "only D+/D- words can be normalized, got {expr}"
        )));
    }
    let total = expr.forward + expr.backward;
    if !total.is_multiple_of(2) {
        return Ok(None);
    }
    let delta = (int(expr.forward as i64) - int(expr.backward as i64)) / int(2) * &expr.spacing;
    let normalized = OperatorExpr {
        forward: total / 2,
        backward: total / 2,
        base_shift: &expr.base_shift + &delta,
        ..expr.clone()
    };
    Ok(Some((normalized, delta)))
}

/// Samples of a function on (possibly half-integer) grid indices.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T> {
    samples: BTreeMap<Rational, T>,
}

impl<T> Default for GridFunction<T> {
    fn default() -> Self {
        Self {
            samples: BTreeMap::new(),
        }
    }
}

impl<T: Clone> GridFunction<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_fn<I, F>(indices: I, mut f: F) -> Self
    where
        I: IntoIterator<Item = Rational>,
        F: FnMut(&Rational) -> T,
    {
        indices
            .into_iter()
            .map(|i| {
                let value = f(&i);
                (i, value)
            })
            .collect()
    }

    pub fn insert(&mut self, index: Rational, value: T) -> Option<T> {
        self.samples.insert(index, value)
    }

    pub fn get(&self, index: &Rational) -> Result<&T> {
        self.samples
            .get(index)
            .ok_or_else(|| FdError::MissingSample { index: index.clone() })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Rational, &T)> {
        self.samples.iter()
    }
}

impl<T: Scalar> GridFunction<T> {
    /// Pointwise product on the indices both functions share.
    pub fn product(&self, other: &Self) -> Self {
        self.samples
            .iter()
            .filter_map(|(i, a)| other.samples.get(i).map(|b| (i.clone(), a.clone() * b.clone())))
            .collect()
    }
}

impl<T> FromIterator<(Rational, T)> for GridFunction<T> {
    fn from_iter<I: IntoIterator<Item = (Rational, T)>>(iter: I) -> Self {
        Self {
            samples: iter.into_iter().collect(),
        }
    }
}

/// Evaluates `expr` at `t_{n + base_shift}` on spacing `k`.
pub fn apply<T: Scalar>(expr: &OperatorExpr, u: &GridFunction<T>, n: &Rational, k: &Rational) -> Result<T> {
    let raw = expand(expr);
    let centre = n + &expr.base_shift;
    let mut total = T::zero();
    for (offset, weight) in &raw.nodes {
        let index = &centre + offset * &expr.spacing;
        total = total + T::from_rational(weight) * u.get(&index)?.clone();
    }
    let step = T::from_rational(&(k * &expr.spacing));
    Ok(total / num_traits::pow(step, raw.scale_order as usize))
}

/// Both sides of the discrete product rule for `(D+D-)^m (f g)(t_n)`.
///
/// With `D^α = D+^{α1} D-^{α2}`, the right side is
/// `Σ_j C(m, j) k^{2j} Σ C(m-j, α1-j) C(m-j, α2-j) D^α f · D^β g`
/// over `α, β ∈ {j..m}²` with `α + β = (m + j, m + j)`. It is the expansion
/// of `P^m`, where `D+D-(fg) = P(f, g)` has the five terms of the `m = 1`
/// rule; `Q = D+D- ⊗ 1 + 1 ⊗ D+D- + D+ ⊗ D- + D- ⊗ D+` factors as
/// `(D+ ⊗ 1 + 1 ⊗ D+)(D- ⊗ 1 + 1 ⊗ D-)`, which is where the binomial
/// weights come from.
pub fn product_rule_check<T: Scalar>(
    m: u32,
    f: &GridFunction<T>,
    g: &GridFunction<T>,
    n: i64,
    k: &Rational,
) -> Result<(T, T)> {
    product_rule_sides(m, f, g, n, k, true)
}

/// Same double sum with every inner weight set to 1. Agrees with the left
/// side only for `m = 1`.
pub fn unweighted_product_sum<T: Scalar>(
    m: u32,
    f: &GridFunction<T>,
    g: &GridFunction<T>,
    n: i64,
    k: &Rational,
) -> Result<T> {
    Ok(product_rule_sides(m, f, g, n, k, false)?.1)
}

fn product_rule_sides<T: Scalar>(
    m: u32,
    f: &GridFunction<T>,
    g: &GridFunction<T>,
    n: i64,
    k: &Rational,
    weighted: bool,
) -> Result<(T, T)> {
    if m == 0 {
        return Err(FdError::Domain("product rule needs m >= 1".into()));
    }
    let at = int(n);
    let lhs = apply(&OperatorExpr::composite(m), &f.product(g), &at, k)?;

    let mut rhs = T::zero();
    for j in 0..=m {
        let target = m + j;
        // The unweighted form ranges over all of {0..m}²; weighted terms
        // outside {j..m}² vanish anyway.
        let low = if weighted { j } else { 0 };
        let mut inner = T::zero();
        for a1 in low..=m {
            for a2 in low..=m {
                let (b1, b2) = match (target.checked_sub(a1), target.checked_sub(a2)) {
                    (Some(b1), Some(b2)) if b1 <= m && b2 <= m => (b1, b2),
                    _ => continue,
                };
                let df = apply(&OperatorExpr::new(a1, a2, 0, 0), f, &at, k)?;
                let dg = apply(&OperatorExpr::new(b1, b2, 0, 0), g, &at, k)?;
                let weight = if weighted {
                    binom(m - j, a1 - j)? * binom(m - j, a2 - j)?
                } else {
                    BigInt::one()
                };
                inner = inner + T::from_rational(&Rational::from_integer(weight)) * df * dg;
            }
        }
        let weight = Rational::from_integer(binom(m, j)?) * num_traits::Pow::pow(k, 2 * j);
        rhs = rhs + T::from_rational(&weight) * inner;
    }
    Ok((lhs, rhs))
}
