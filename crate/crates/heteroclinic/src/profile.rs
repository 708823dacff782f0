//! Uniform grids on a truncation window and wave profiles sampled on them.

use crate::error::{Error, Result};
use crate::scalar::{cast, to_f64, Real};

/// Uniform grid `t_min + i h`, `i = 0..=n`. The window endpoints must be an
/// integer number of steps apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    t_min: T,
    t_max: T,
    h: T,
    n: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(t_min: T, t_max: T, h: T) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
            return Err(Error::InvalidParameter(format!(
                "grid window must be finite with t_min < t_max, got [{}, {}]",
                to_f64(t_min),
                to_f64(t_max)
            )));
        }
        if !(h.is_finite() && h > T::zero()) {
            return Err(Error::InvalidParameter("grid step must be positive".into()));
        }
        let ratio = (t_max - t_min) / h;
        let n = ratio.round();
        let tol = cast::<T>(1e-9).max(T::epsilon() * cast::<T>(8.0)) * T::one().max(ratio);
        if (ratio - n).abs() > tol || n < T::one() {
            return Err(Error::InvalidParameter(format!(
                "step {} does not divide the window [{}, {}]",
                to_f64(h),
                to_f64(t_min),
                to_f64(t_max)
            )));
        }
        let n = n.to_usize().ok_or_else(|| {
            Error::InvalidParameter("grid has too many nodes".into())
        })?;
        Ok(Self { t_min, t_max, h, n })
    }

    pub fn t_min(&self) -> T {
        self.t_min
    }

    pub fn t_max(&self) -> T {
        self.t_max
    }

    pub fn h(&self) -> T {
        self.h
    }

    /// Number of nodes, i.e. intervals plus one.
    pub fn num_nodes(&self) -> usize {
        self.n + 1
    }

    pub fn node(&self, i: usize) -> T {
        debug_assert!(i <= self.n);
        self.t_min + self.h * T::from_usize(i).unwrap()
    }

    /// Whole number of grid steps making up `delay`, or an error when the
    /// delay falls between nodes (delayed terms are read by node offset, so
    /// misalignment would silently distort them).
    pub fn delay_offset(&self, delay: T) -> Result<usize> {
        let ratio = delay / self.h;
        let k = ratio.round();
        let tol = cast::<T>(1e-9).max(T::epsilon() * cast::<T>(8.0)) * T::one().max(ratio);
        if (ratio - k).abs() > tol || k < T::one() {
            return Err(Error::GridMismatch(format!(
                "delay {} is not a positive whole number of steps of {}",
                to_f64(delay),
                to_f64(self.h)
            )));
        }
        k.to_usize()
            .ok_or_else(|| Error::GridMismatch("delay offset overflows".into()))
    }

    /// The heteroclinic window must see both tails, so 0 strictly inside.
    pub fn straddles_zero(&self) -> bool {
        self.t_min < T::zero() && T::zero() < self.t_max
    }
}

/// Grid samples of a wave profile plus its off-window models: an
/// `e^{left_rate (t - t_min)}` tail on the left, a clamp to the final value
/// on the right. `right_limit` records the intended limit for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T> {
    spec: GridSpec<T>,
    values: Vec<T>,
    left_rate: T,
    right_limit: T,
}

impl<T: Real> Profile<T> {
    pub fn new(spec: GridSpec<T>, values: Vec<T>, left_rate: T, right_limit: T) -> Result<Self> {
        if values.len() != spec.num_nodes() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                spec.num_nodes()
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: format!("profile value at node {i}"),
                    t: to_f64(spec.node(i)),
                });
            }
        }
        Ok(Self { spec, values, left_rate, right_limit })
    }

    pub fn sample(
        f: impl Fn(T) -> T,
        spec: &GridSpec<T>,
        left_rate: T,
        right_limit: T,
    ) -> Result<Self> {
        let values: Vec<T> = (0..spec.num_nodes()).map(|i| f(spec.node(i))).collect();
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: format!("sampled function at node {i}"),
                    t: to_f64(spec.node(i)),
                });
            }
        }
        Ok(Self { spec: *spec, values, left_rate, right_limit })
    }

    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn left_rate(&self) -> T {
        self.left_rate
    }

    pub fn right_limit(&self) -> T {
        self.right_limit
    }

    /// Piecewise-linear on the window, exponential tail on the left,
    /// clamped on the right.
    pub fn eval(&self, t: T) -> T {
        if t <= self.spec.t_min {
            return self.values[0] * (self.left_rate * (t - self.spec.t_min)).exp();
        }
        if t >= self.spec.t_max {
            return self.values[self.values.len() - 1];
        }
        let x = (t - self.spec.t_min) / self.spec.h;
        let i = x.floor().to_usize().unwrap_or(0).min(self.values.len() - 2);
        let theta = (t - self.spec.node(i)) / self.spec.h;
        self.values[i] + theta * (self.values[i + 1] - self.values[i])
    }

    /// Nondecreasing up to `slack` of backsliding per step.
    pub fn is_monotone(&self, slack: T) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0] - slack)
    }

    /// Max nodewise distance; the grids must be identical.
    pub fn sup_diff(&self, other: &Self) -> Result<T> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch(
                "sup distance needs both profiles on the same grid".into(),
            ));
        }
        let mut worst = T::zero();
        for (a, b) in self.values.iter().zip(&other.values) {
            worst = worst.max((*a - *b).abs());
        }
        Ok(worst)
    }
}
