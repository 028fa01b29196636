//! Floating-point (or exact) evaluation of stencils and convergence studies.

use std::io::Write;
use std::path::Path;

use log::warn;
use num_traits::Float;

use crate::error::{FdError, Result};
use crate::gridops::GridFunction;
use crate::scalar::Scalar;
use crate::stencil::Stencil;
use crate::Rational;

/// Errors within this factor of the rounding bound count as floor.
const FLOOR_FACTOR: f64 = 10.0;

/// A stencil with its weights converted to `T` once.
#[derive(Clone, Debug)]
pub struct Evaluator<T> {
    m: u32,
    offsets: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> Evaluator<T> {
    pub fn new(stencil: &Stencil) -> Self {
        Evaluator {
            m: stencil.m(),
            offsets: stencil.offsets().iter().map(T::from_rational).collect(),
            weights: stencil.weights().iter().map(T::from_rational).collect(),
        }
    }

    /// `h^{-m} Σ_j w_j f(x0 + o_j h)`, summed in ascending offset order.
    pub fn apply<F: Fn(T) -> T>(&self, f: F, x0: T, h: T) -> Result<T> {
        let step = h.clone();
        self.evaluate(|_, o| Ok(f(x0.clone() + o.clone() * step.clone())), h)
    }

    // `sample(j, o_j)` supplies the value at node `j`.
    fn evaluate<G: FnMut(usize, &T) -> Result<T>>(&self, mut sample: G, h: T) -> Result<T> {
        if h <= T::zero() {
            return Err(FdError::Domain(format!("step must be positive, got {h}")));
        }
        let mut total = T::zero();
        for (j, (o, w)) in self.offsets.iter().zip(&self.weights).enumerate() {
            let value = sample(j, o)?;
            if !value.is_finite_value() {
                warn!("nonfinite sample {value} at offset {o}");
            }
            total = total + w.clone() * value;
        }
        Ok(total / num_traits::pow(h, self.m as usize))
    }

    // (eps/2) Σ |w_j| (|f_j| + |x_j| L) h^{-m}, L the steepest slope between
    // neighbouring nodes: rounding of the samples and of their abscissae.
    fn rounding_bound<F: Fn(T) -> T>(&self, f: &F, x0: T, h: T) -> T
    where
        T: Float,
    {
        let half_eps = T::epsilon() / (T::one() + T::one());
        let xs: Vec<T> = self.offsets.iter().map(|o| x0 + *o * h).collect();
        let fs: Vec<T> = xs.iter().map(|x| f(*x)).collect();
        let slope = xs
            .windows(2)
            .zip(fs.windows(2))
            .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs())
            .fold(T::zero(), T::max);
        let mut total = T::zero();
        for ((x, fx), w) in xs.iter().zip(&fs).zip(&self.weights) {
            total = total + w.abs() * (fx.abs() + x.abs() * slope);
        }
        half_eps * total / h.powi(self.m as i32)
    }
}

pub fn apply_stencil<T: Scalar, F: Fn(T) -> T>(stencil: &Stencil, f: F, x0: T, h: T) -> Result<T> {
    Evaluator::new(stencil).apply(f, x0, h)
}

/// Same sum over stored samples; `center` and the offsets are grid indices.
pub fn apply_to_samples<T: Scalar>(stencil: &Stencil, samples: &GridFunction<T>, center: &Rational, h: T) -> Result<T> {
    let offsets = stencil.offsets();
    Evaluator::<T>::new(stencil).evaluate(|j, _| samples.get(&(center + &offsets[j])).cloned(), h)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub formula: String,
    pub h: Vec<f64>,
    pub abs_errors: Vec<f64>,
    /// `log(err_i / err_{i+1}) / log(h_i / h_{i+1})`, one per consecutive pair.
    pub observed_orders: Vec<f64>,
    /// Rounding-error bound of each evaluation.
    pub rounding_bounds: Vec<f64>,
    /// First index whose error is within a small factor of its rounding bound.
    pub roundoff_floor_index: Option<usize>,
}

impl ConvergenceReport {
    /// Indices before the roundoff floor.
    pub fn pre_floor(&self) -> std::ops::Range<usize> {
        0..self.roundoff_floor_index.unwrap_or(self.h.len())
    }

    /// Least-squares slope of `ln err` against `ln h` over the last octave of
    /// pre-floor spacings, where the leading error term dominates.
    pub fn fitted_order(&self) -> Option<f64> {
        let range = self.pre_floor();
        let last = range.end.checked_sub(1)?;
        let cutoff = 2.0 * self.h[last] * (1.0 + 1e-12);
        let points: Vec<(f64, f64)> = range
            .filter(|&i| self.h[i] <= cutoff)
            .map(|i| (self.h[i].ln(), self.abs_errors[i].ln()))
            .collect();
        if points.len() < 2 || points.iter().any(|(_, e)| !e.is_finite()) {
            return None;
        }
        let n = points.len() as f64;
        let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
        let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
        Some(sxy / sxx)
    }

    /// Smallest error reached anywhere on the grid.
    pub fn min_error(&self) -> f64 {
        self.abs_errors.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// CSV with columns `h, abs_error, observed_order`; the first row has no
    /// observed order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["h", "abs_error", "observed_order"])?;
        for (i, (h, e)) in self.h.iter().zip(&self.abs_errors).enumerate() {
            let order = if i == 0 {
                String::new()
            } else {
                format!("{:e}", self.observed_orders[i - 1])
            };
            out.write_record([format!("{h:e}"), format!("{e:e}"), order])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Errors `|apply(h) - df_true|` over a strictly decreasing `h_list`.
pub fn convergence_study<T, F>(
    formula: &str,
    stencil: &Stencil,
    f: F,
    df_true: T,
    x0: T,
    h_list: &[T],
) -> Result<ConvergenceReport>
where
    T: Scalar + Float,
    F: Fn(T) -> T,
{
    if h_list.len() < 3 {
        return Err(FdError::Domain(format!(
            "need at least 3 spacings, got {}",
            h_list.len()
        )));
    }
    if h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(FdError::Domain("spacings must be strictly decreasing".into()));
    }
    let evaluator = Evaluator::<T>::new(stencil);
    let to_f64 = |v: T| v.to_f64().unwrap_or(f64::NAN);

    let mut abs_errors = Vec::with_capacity(h_list.len());
    let mut rounding_bounds = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let approx = evaluator.apply(&f, x0, h)?;
        abs_errors.push(to_f64((approx - df_true).abs()));
        rounding_bounds.push(to_f64(evaluator.rounding_bound(&f, x0, h)));
    }
    let h: Vec<f64> = h_list.iter().map(|&v| to_f64(v)).collect();
    let observed_orders = (0..h.len() - 1)
        .map(|i| (abs_errors[i] / abs_errors[i + 1]).ln() / (h[i] / h[i + 1]).ln())
        .collect();
    let roundoff_floor_index = abs_errors
        .iter()
        .zip(&rounding_bounds)
        .position(|(e, b)| *e <= FLOOR_FACTOR * b);

    Ok(ConvergenceReport {
        formula: formula.to_string(),
        h,
        abs_errors,
        observed_orders,
        rounding_bounds,
        roundoff_floor_index,
    })
}

/// `h0 * ratio^{-j}` for `j = 0..count`.
pub fn geometric_grid(h0: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| h0 * ratio.powi(-(j as i32))).collect()
}
