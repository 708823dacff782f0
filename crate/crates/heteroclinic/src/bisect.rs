use crate::scalar::Real;

pub(crate) struct Bisection<T> {
    pub root: T,
    pub lo: T,
    pub hi: T,
    pub iterations: u32,
}

/// Bisect `f` on a sign-changing bracket `[lo, hi]` until both
/// `|f(mid)| <= f_tol` and `hi - lo <= x_tol`, or the bracket collapses to
/// adjacent floats. Returns `None` only if the residual target is still
/// unmet at floating-point resolution.
pub(crate) fn bisect<T: Real>(
    f: impl Fn(T) -> T,
    mut lo: T,
    mut hi: T,
    f_tol: T,
    x_tol: T,
    max_iter: u32,
) -> Option<Bisection<T>> {
    let two = T::one() + T::one();
    let f_lo = f(lo);
    debug_assert!(f_lo * f(hi) <= T::zero(), "bisect needs a sign change");
    let lo_positive = f_lo > T::zero();
    let mut iterations = 0;
    let mut mid = (lo + hi) / two;
    while iterations < max_iter {
        let fm = f(mid);
        if fm.abs() <= f_tol && hi - lo <= x_tol {
            return Some(Bisection { root: mid, lo, hi, iterations });
        }
        if fm == T::zero() {
            // Exact hit but the bracket is still wide: shrink symmetrically
            // around the root so the caller gets a strict enclosure.
            let w = (hi - lo) / (two + two);
            lo = mid - w;
            hi = mid + w;
        } else if (fm > T::zero()) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
        let next = (lo + hi) / two;
        if next <= lo || next >= hi {
            // Adjacent floats; accept whichever end has the smaller residual.
            let (a, b) = (f(lo).abs(), f(hi).abs());
            let best = if a < b { lo } else { hi };
            return if f(best).abs() <= f_tol {
                Some(Bisection { root: best, lo, hi, iterations })
            } else {
                None
            };
        }
        mid = next;
        iterations += 1;
    }
    if f(mid).abs() <= f_tol {
        Some(Bisection { root: mid, lo, hi, iterations })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let b = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-12, 1e-11, 200).unwrap();
        assert!((b.root - 2f64.sqrt()).abs() < 1e-11);
        assert!(b.lo < b.root && b.root < b.hi || b.root == b.lo || b.root == b.hi);
    }

    #[test]
    fn decreasing_function() {
        let b = bisect(|x: f64| 1.0 - x, 0.0, 3.0, 1e-14, 1e-13, 200).unwrap();
        assert!((b.root - 1.0).abs() < 1e-13);
    }

    #[test]
    fn unreachable_residual_returns_none() {
        // Steep root: |f| near the root is either ~1e5 * ulp or exactly
        // 1e-20 (the shift keeps an exact zero unattainable), so a 1e-30
        // residual target cannot be met in f64.
        let steep = |x: f64| 1e5 * (x - 1.234_567) + 1e-20;
        assert!(bisect(steep, 0.0, 2.0, 1e-30, 1e-30, 500).is_none());
    }

    #[test]
    fn exact_zero_mid_is_handled() {
        let b = bisect(|x: f64| x, -1.0, 1.0, 1e-15, 1e-14, 200).unwrap();
        assert!(b.root.abs() <= 1e-15);
    }

    #[test]
    fn works_in_f32() {
        let b = bisect(|x: f32| x * x - 2.0, 0.0, 2.0, 1e-5, 1e-5, 200).unwrap();
        assert!((b.root - 2f32.sqrt()).abs() < 1e-5);
    }
}
