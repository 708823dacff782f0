//! Monotone iteration towards the wave profile.
//!
//! Writing the equation as `x' + beta x = H(x)` with
//!
//! ```text
//! H(x)(t) = (beta - delta) x(t) - H x(t - sigma) + rho w e^{-w},   w = x(t - r),
//! ```
//!
//! bounded solutions solve `x(t) = int_{-inf}^t e^{-beta (t-s)} H(x)(s) ds`.
//! For `beta` in the feasible interval the map is order preserving between
//! the lower and upper solutions, so iterating from the upper solution
//! produces a pointwise nonincreasing sequence pinched onto a wave.

use crate::bounds::{LowerSolution, UpperSolution};
use crate::error::{Error, Result};
use crate::model::{check_hypotheses, DerivedConstants, ModelParams};
use crate::profile::{GridSpec, Profile};
use crate::report::CheckReport;
use crate::scalar::{cast, to_f64, Real};

/// Evaluate the shifted right-hand side `H(x)` at every grid node. Delayed
/// arguments are read by whole-node offset when the delay aligns with the
/// step (the intended setup) and by interpolation otherwise; left of the
/// window the profile's exponential tail model supplies the values.
pub fn apply_operator_h<T: Real>(x: &Profile<T>, p: &ModelParams<T>, beta: T) -> Vec<T> {
    let spec = *x.spec();
    let n = spec.num_nodes();
    let v = x.values();
    let lookup = |delay: T| -> Box<dyn Fn(usize) -> T + '_> {
        match spec.delay_offset(delay) {
            Ok(k) => Box::new(move |i: usize| {
                if i >= k {
                    v[i - k]
                } else {
                    x.eval(spec.node(i) - delay)
                }
            }),
            Err(_) => Box::new(move |i: usize| x.eval(spec.node(i) - delay)),
        }
    };
    let at_sigma = lookup(p.sigma);
    let at_r = lookup(p.r);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let w = at_r(i);
        out.push((beta - p.delta) * v[i] - p.harvest * at_sigma(i) + p.rho * w * (-w).exp());
    }
    out
}

/// Exact convolution `int_{-inf}^t e^{-beta (t-s)} g(s) ds` of the
/// piecewise-linear interpolant of `gvals`, extended to the left of the
/// window by `g(t_min) e^{left_rate (s - t_min)}` (hence the closed-form
/// seed). Marching with the one-step weights
///
/// ```text
/// x_{i+1} = a x_i + w0 g_i + w1 g_{i+1},   a = e^{-beta h},
/// w0 = (1 - a - a beta h)/(beta^2 h),      w1 = (beta h - 1 + a)/(beta^2 h)
/// ```
///
/// introduces no quadrature error beyond the interpolation itself.
pub fn convolve<T: Real>(gvals: &[T], beta: T, spec: &GridSpec<T>, left_rate: T) -> Profile<T> {
    let n = spec.num_nodes();
    assert_eq!(gvals.len(), n, "one forcing value per grid node");
    let h = spec.h();
    let x = beta * h;
    let one_m_a = -(-x).exp_m1();
    let a = T::one() - one_m_a;
    let denom = beta * beta * h;
    let w1 = (x - one_m_a) / denom;
    let w0 = (one_m_a - a * x) / denom;
    let mut vals = Vec::with_capacity(n);
    let mut cur = gvals[0] / (beta + left_rate);
    vals.push(cur);
    for i in 1..n {
        cur = a * cur + w0 * gvals[i - 1] + w1 * gvals[i];
        vals.push(cur);
    }
    let last = *vals.last().unwrap();
    Profile::new(*spec, vals, left_rate, last)
        .expect("convolution of finite forcing stays finite")
}

#[derive(Debug, Clone, Copy)]
pub struct IterateOptions<T> {
    /// Sup-norm gap between successive iterates that counts as converged.
    pub tol: T,
    pub max_iter: usize,
    /// Also verify the two exponential-ordering properties each step.
    pub check_p34: bool,
    /// How many leading iterates (x0, x1, ...) to keep in the result.
    pub save_count: usize,
    /// Proceed although the advisory amplitude checks failed.
    pub allow_uncertified: bool,
}

impl<T: Real> Default for IterateOptions<T> {
    fn default() -> Self {
        Self {
            tol: cast(1e-8),
            max_iter: 500,
            check_p34: false,
            save_count: 4,
            allow_uncertified: false,
        }
    }
}

/// Per-step record; the run aborts on ordering/monotonicity violations, so
/// on a returned result those flags are all true, while the opt-in
/// properties are recorded as observed.
#[derive(Debug, Clone, Copy)]
pub struct StepCheck {
    pub step: usize,
    /// Sandwich order: lower <= x_{m+1} <= x_m held nodewise.
    pub ordering: bool,
    /// The new iterate is nondecreasing in t.
    pub monotone: bool,
    /// Gap to the previous iterate nondecreasing under the e^{beta t} weight.
    pub p3: Option<bool>,
    /// The new iterate itself nondecreasing under the e^{beta t} weight.
    pub p4: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct IterationResult<T> {
    pub final_profile: Profile<T>,
    /// Sup-norm gaps between successive iterates, one per step taken.
    pub gaps: Vec<T>,
    pub steps: usize,
    pub p_checks: Vec<StepCheck>,
    pub converged: bool,
    /// Leading iterates x0, x1, ... up to `save_count`.
    pub saved: Vec<Profile<T>>,
    /// Ceiling on the seed error committed by modeling the forcing tail
    /// left of the window: |H(x0)(t_min)| (1/beta - 1/(beta+lambda)).
    pub seed_tail_budget: T,
    /// The hypothesis report that gated the run.
    pub hypotheses: CheckReport,
}

/// Iterate `x_{m+1} = convolve(H(x_m))` from the upper solution until the
/// sup gap drops below `tol`. Errors if a required hypothesis fails, if an
/// advisory amplitude check fails without `allow_uncertified`, if the grid
/// cannot host the delays, or if the sandwich ordering breaks (which a
/// certified setup cannot do, so it signals an inconsistent configuration).
pub fn iterate<T: Real>(
    p: &ModelParams<T>,
    c: &DerivedConstants<T>,
    spec: &GridSpec<T>,
    opts: &IterateOptions<T>,
) -> Result<IterationResult<T>> {
    if !spec.straddles_zero() {
        return Err(Error::InvalidParameter(
            "the window must contain the transition point 0 strictly".into(),
        ));
    }
    spec.delay_offset(p.sigma)?;
    spec.delay_offset(p.r)?;
    if !(opts.tol.is_finite() && opts.tol > T::zero()) {
        return Err(Error::InvalidParameter("iteration tolerance must be positive".into()));
    }

    let hypotheses = check_hypotheses(p, c);
    if !hypotheses.required_pass() {
        return Err(Error::HypothesisGate(format!(
            "required checks failed: {}",
            hypotheses.failed_names().join(", ")
        )));
    }
    if !hypotheses.all_pass() && !opts.allow_uncertified {
        return Err(Error::HypothesisGate(format!(
            "advisory checks failed ({}); set allow_uncertified to run anyway",
            hypotheses.failed_names().join(", ")
        )));
    }

    let upper = UpperSolution::new(c.kappa, c.lambda, c.beta);
    let lower = LowerSolution::new(c.alpha, c.epsilon, c.lambda, c.t0);
    let x0 = Profile::sample(|t| upper.value(t), spec, c.lambda, c.kappa)?;
    let hundredth = cast::<T>(0.01);
    if x0.values()[0] > hundredth * c.kappa {
        return Err(Error::InvalidParameter(format!(
            "window too short on the left: upper solution is still {} at t_min \
             (more than 1% of kappa)",
            to_f64(x0.values()[0])
        )));
    }

    let h0 = apply_operator_h(&x0, p, c.beta);
    let seed_tail_budget = h0[0].abs() * (c.beta.recip() - (c.beta + c.lambda).recip());

    let slack = cast::<T>(1e-10) * (T::one() + c.kappa);
    let floor = cast::<T>(1e-12) * (T::one() + c.kappa);
    let growth = (c.beta * spec.h()).exp() * (T::one() + cast::<T>(1e-8));
    // The quadrature carries an O((lambda h)^2 / 12) relative bias where the
    // profile follows e^{lambda t}, which can nudge an iterate above its
    // predecessor in the far tail; the ordering checks tolerate that scale
    // (12x the leading constant) but nothing coarser.
    let bias_rel = (c.lambda * spec.h()) * (c.lambda * spec.h());
    let n = spec.num_nodes();

    let mut saved = Vec::new();
    if opts.save_count > 0 {
        saved.push(x0.clone());
    }
    let mut prev = x0;
    let mut gaps = Vec::new();
    let mut p_checks = Vec::new();
    let mut converged = false;
    let mut steps = 0;

    for m in 1..=opts.max_iter {
        let hv = apply_operator_h(&prev, p, c.beta);
        let next = convolve(&hv, c.beta, spec, c.lambda);

        for i in 0..n {
            let t = spec.node(i);
            let (a, b) = (next.values()[i], prev.values()[i]);
            if a > b + bias_rel * b.abs() + floor {
                return Err(Error::MonotonicityBreach {
                    step: m,
                    t: to_f64(t),
                    detail: format!("iterate rose above its predecessor: {} > {}", to_f64(a), to_f64(b)),
                });
            }
            let lo = lower.value(t);
            if a < lo - bias_rel * lo.abs() - floor {
                return Err(Error::MonotonicityBreach {
                    step: m,
                    t: to_f64(t),
                    detail: format!("iterate fell below the lower solution: {} < {}", to_f64(a), to_f64(lo)),
                });
            }
        }
        if !next.is_monotone(slack) {
            return Err(Error::MonotonicityBreach {
                step: m,
                t: f64::NAN,
                detail: "iterate is not nondecreasing".into(),
            });
        }

        let (p3, p4) = if opts.check_p34 {
            // Weighted monotonicity is certified down to the quadrature
            // noise scale bias_rel * x (where the step differences sit
            // inside the discretization error the statement is vacuous);
            // the noise enters both sides, hence the (1 + growth) factor.
            let mut ok3 = true;
            let mut ok4 = true;
            for i in 0..n - 1 {
                let noise = (T::one() + growth) * bias_rel * next.values()[i + 1];
                let d_here = prev.values()[i] - next.values()[i];
                let d_next = prev.values()[i + 1] - next.values()[i + 1];
                if d_here > growth * d_next + noise + floor {
                    ok3 = false;
                }
                let s_here = next.values()[i + 1] - next.values()[i];
                if i + 2 < n {
                    let s_next = next.values()[i + 2] - next.values()[i + 1];
                    let noise4 = cast::<T>(2.0) * (T::one() + growth) * bias_rel * next.values()[i + 2];
                    if s_here > growth * s_next + noise4 + floor {
                        ok4 = false;
                    }
                }
            }
            (Some(ok3), Some(ok4))
        } else {
            (None, None)
        };

        let gap = next.sup_diff(&prev)?;
        gaps.push(gap);
        p_checks.push(StepCheck { step: m, ordering: true, monotone: true, p3, p4 });
        if saved.len() < opts.save_count {
            saved.push(next.clone());
        }
        steps = m;
        prev = next;
        if gap <= opts.tol {
            converged = true;
            break;
        }
    }

    Ok(IterationResult {
        final_profile: prev,
        gaps,
        steps,
        p_checks,
        converged,
        saved,
        seed_tail_budget,
        hypotheses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_constants, Overrides};

    fn reference() -> ModelParams<f64> {
        ModelParams::new(1.0, 2.0, 6.0, 0.15, 1.8).unwrap()
    }

    // The left edge must sit deep enough that the seed tail bias, which
    // scales like e^{lambda t_min}, is below the gap tolerance; shallower
    // windows stall just above 1e-8.
    fn coarse() -> GridSpec<f64> {
        GridSpec::new(-45.0, 15.0, 0.05).unwrap()
    }

    #[test]
    fn convolution_weights_are_exact_for_linear_forcing() {
        // The convolution solves x' = g - beta x; for g(s) = s the solution
        // is t/beta - 1/beta^2 plus a decaying mode fixed by the seed, and
        // the one-step weights must reproduce it to rounding.
        let spec = GridSpec::new(-2.0, 3.0, 0.01).unwrap();
        let beta = 4.0;
        let g: Vec<f64> = (0..spec.num_nodes()).map(|i| spec.node(i)).collect();
        // left tail model with rate 0: g constant -2 before the window, so
        // the seed is x(t_min) = -2/beta
        let x = convolve(&g, beta, &spec, 0.0);
        let xp = |t: f64| t / beta - 1.0 / (beta * beta);
        let mode = -2.0 / beta - xp(-2.0);
        for i in (0..spec.num_nodes()).step_by(50) {
            let t = spec.node(i);
            let exact = xp(t) + mode * (-beta * (t + 2.0)).exp();
            assert!(
                (x.values()[i] - exact).abs() < 1e-11,
                "node {i}: {} vs {exact}",
                x.values()[i]
            );
        }
    }

    #[test]
    fn operator_on_equilibria() {
        let p = reference();
        let spec = coarse();
        let kappa = p.kappa();
        let beta = 6.7093;
        let zeros = Profile::sample(|_| 0.0, &spec, 0.3420, 0.0).unwrap();
        assert!(apply_operator_h(&zeros, &p, beta).iter().all(|&v| v == 0.0));
        // a constant equals its own tail only with rate zero
        let keq = Profile::sample(|_| kappa, &spec, 0.0, kappa).unwrap();
        for v in apply_operator_h(&keq, &p, beta) {
            assert!((v - beta * kappa).abs() < 1e-13);
        }
    }

    #[test]
    fn iteration_converges_on_a_coarse_grid() {
        let p = reference();
        let c = derive_constants(&p, &Overrides::default()).unwrap();
        let run = iterate(&p, &c, &coarse(), &IterateOptions::default()).unwrap();
        assert!(run.converged, "gaps: {:?}", run.gaps);
        assert!(run.steps < 200);
        assert!(run.final_profile.is_monotone(1e-10));
        // at this step size the decrease is not strictly monotone near the
        // final handover between modes, but the trend must hold
        let first = run.gaps[0];
        let last = *run.gaps.last().unwrap();
        assert!(last < 1e-6 * first, "first {first}, last {last}");
        assert_eq!(run.saved.len(), 4);
        assert!(run.seed_tail_budget > 0.0 && run.seed_tail_budget < 1e-3);
        assert!(run.hypotheses.all_pass());
        // re-applying the map moves the fixed point by at most the last gap
        let hv = apply_operator_h(&run.final_profile, &p, c.beta);
        let again = convolve(&hv, c.beta, run.final_profile.spec(), c.lambda);
        assert!(again.sup_diff(&run.final_profile).unwrap() <= *run.gaps.last().unwrap());
    }

    #[test]
    fn gate_blocks_uncertified_alpha_unless_allowed() {
        let p = reference();
        let c = derive_constants(
            &p,
            &Overrides {
                beta: Some(6.7093),
                lambda: Some(0.3420),
                epsilon: Some(0.33),
                alpha: Some(0.5),
                t0: Some(-1.0),
                ..Overrides::default()
            },
        )
        .unwrap();
        let refused = iterate(&p, &c, &coarse(), &IterateOptions::default());
        assert!(matches!(refused, Err(Error::HypothesisGate(_))));
        // the four-digit rate 0.3420 is not an exact root, which caps the
        // reachable gap near 2.6e-6, so ask only for 1e-5 here
        let run = iterate(
            &p,
            &c,
            &coarse(),
            &IterateOptions { tol: 1e-5, allow_uncertified: true, ..IterateOptions::default() },
        )
        .unwrap();
        assert!(run.converged);
    }

    #[test]
    fn oversized_alpha_breaks_the_sandwich_and_is_caught() {
        // alpha above the cap puts the lower solution over the upper one far
        // left, so the first iterate must dip under it: a certified breach.
        let p = reference();
        let c = derive_constants(
            &p,
            &Overrides { alpha: Some(0.68), ..Overrides::default() },
        )
        .unwrap();
        let res = iterate(
            &p,
            &c,
            &coarse(),
            &IterateOptions { allow_uncertified: true, ..IterateOptions::default() },
        );
        assert!(matches!(res, Err(Error::MonotonicityBreach { step: 1, .. })), "{res:?}");
    }

    #[test]
    fn zero_max_iter_returns_the_seed() {
        let p = reference();
        let c = derive_constants(&p, &Overrides::default()).unwrap();
        let run = iterate(
            &p,
            &c,
            &coarse(),
            &IterateOptions { max_iter: 0, ..IterateOptions::default() },
        )
        .unwrap();
        assert!(!run.converged);
        assert_eq!(run.steps, 0);
        assert!(run.gaps.is_empty());
        let u = UpperSolution::new(c.kappa, c.lambda, c.beta);
        let x0 = Profile::sample(|t| u.value(t), &coarse(), c.lambda, c.kappa).unwrap();
        assert_eq!(run.final_profile.sup_diff(&x0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_hostile_grids() {
        let p = reference();
        let c = derive_constants(&p, &Overrides::default()).unwrap();
        let misaligned = GridSpec::new(-21.0, 14.0, 0.07).unwrap();
        assert!(matches!(
            iterate(&p, &c, &misaligned, &IterateOptions::default()),
            Err(Error::GridMismatch(_))
        ));
        let one_sided = GridSpec::new(5.0, 15.0, 0.05).unwrap();
        assert!(matches!(
            iterate(&p, &c, &one_sided, &IterateOptions::default()),
            Err(Error::InvalidParameter(_))
        ));
        let short_left = GridSpec::new(-5.0, 15.0, 0.05).unwrap();
        assert!(matches!(
            iterate(&p, &c, &short_left, &IterateOptions::default()),
            Err(Error::InvalidParameter(_))
        ));
        let bad_tol = IterateOptions { tol: 0.0, ..IterateOptions::default() };
        assert!(iterate(&p, &c, &coarse(), &bad_tol).is_err());
    }
}
