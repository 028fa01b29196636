//! Test functions for `study`: `sin100pi`, `sin1000pi` and `poly:<expr>`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};

#[derive(Clone, Debug, PartialEq)]
pub enum TestFunction {
    /// `sin(omega x)`.
    Sine { name: String, omega: f64 },
    /// Power to coefficient.
    Polynomial { text: String, coeffs: BTreeMap<u32, f64> },
}

impl TestFunction {
    pub fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// `f^(m)(x)`, computed analytically.
    pub fn derivative(&self, m: u32, x: f64) -> f64 {
        match self {
            TestFunction::Sine { omega, .. } => omega.powi(m as i32) * (omega * x + m as f64 * PI / 2.0).sin(),
            TestFunction::Polynomial { coeffs, .. } => coeffs
                .iter()
                .filter(|(power, _)| **power >= m)
                .map(|(power, c)| {
                    let falling: f64 = (0..m).map(|i| (power - i) as f64).product();
                    c * falling * x.powi((power - m) as i32)
                })
                .sum(),
        }
    }

    /// Name safe to use inside a file name.
    pub fn file_stem(&self) -> String {
        self.to_string()
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                    c
                } else {
                    '_'
                }
            })
            .collect()
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Sine { name, .. } => f.write_str(name),
            TestFunction::Polynomial { text, .. } => write!(f, "poly:{text}"),
        }
    }
}

impl FromStr for TestFunction {
    type Err = anyhow::Error;

    fn from_str(text: &str) -> anyhow::Result<Self> {
        match text {
            "sin100pi" => Ok(TestFunction::Sine {
                name: text.into(),
                omega: 100.0 * PI,
            }),
            "sin1000pi" => Ok(TestFunction::Sine {
                name: text.into(),
                omega: 1000.0 * PI,
            }),
            _ => {
                let expr = text.strip_prefix("poly:").ok_or_else(|| {
                    anyhow!("unknown function `{text}` (expected sin100pi, sin1000pi or poly:<expr>)")
                })?;
                Ok(TestFunction::Polynomial {
                    text: expr.to_string(),
                    coeffs: parse_polynomial(expr)?,
                })
            }
        }
    }
}

/// Parses sums of terms like `3*x^2`, `-x`, `0.5x^4`, `7`.
pub fn parse_polynomial(text: &str) -> anyhow::Result<BTreeMap<u32, f64>> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        bail!("empty polynomial");
    }
    let mut terms = Vec::new();
    let mut start = 0;
    let bytes = compact.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        // A sign splits terms unless it opens the text or follows an exponent marker.
        let after_exponent = i > 0 && matches!(bytes[i - 1], b'e' | b'E' | b'^');
        if (b == b'+' || b == b'-') && i > start && !after_exponent {
            terms.push(&compact[start..i]);
            start = i;
        }
    }
    terms.push(&compact[start..]);

    let mut coeffs = BTreeMap::new();
    for term in terms {
        let (coeff, power) = parse_term(term).with_context(|| format!("bad term `{term}` in `{text}`"))?;
        *coeffs.entry(power).or_insert(0.0) += coeff;
    }
    Ok(coeffs)
}

fn parse_term(term: &str) -> anyhow::Result<(f64, u32)> {
    let Some(x_at) = term.find('x') else {
        return Ok((term.parse()?, 0));
    };
    let head = term[..x_at].trim_end_matches('*');
    let coeff = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse()?,
    };
    let tail = &term[x_at + 1..];
    let power = if tail.is_empty() {
        1
    } else {
        tail.strip_prefix('^')
            .ok_or_else(|| anyhow!("expected ^ after x"))?
            .parse()?
    };
    Ok((coeff, power))
}
