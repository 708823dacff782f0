//! Post-hoc validation of a computed profile, independent of how it was
//! produced: plug it into the equation with finite differences, reintegrate
//! it forward by the method of steps, and check the asymptotics.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::profile::{GridSpec, Profile};
use crate::report::CheckReport;
use crate::scalar::{cast, to_f64, Real};

#[derive(Debug, Clone, Copy)]
pub struct ResidualReport<T> {
    /// Sup over interior nodes of |x'(t) - rhs(t)| with a central-difference
    /// derivative; O(h^2) for a true solution.
    pub sup_residual: T,
    pub argmax_t: T,
    /// |x(t_min)| and |x(t_max) - kappa|.
    pub endpoint_errors: (T, T),
}

/// Defect of the profile in the delayed equation at every interior node
/// (the two boundary nodes have no centered derivative and are excluded).
pub fn dde_residual<T: Real>(x: &Profile<T>, p: &ModelParams<T>) -> ResidualReport<T> {
    let spec = *x.spec();
    let v = x.values();
    let n = spec.num_nodes();
    let two_h = spec.h() + spec.h();
    let delayed = |delay: T| -> Box<dyn Fn(usize) -> T + '_> {
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
    let at_sigma = delayed(p.sigma);
    let at_r = delayed(p.r);
    let mut sup = T::zero();
    let mut argmax = spec.t_min();
    for i in 1..n.saturating_sub(1) {
        let deriv = (v[i + 1] - v[i - 1]) / two_h;
        let w = at_r(i);
        let rhs = -p.delta * v[i] - p.harvest * at_sigma(i) + p.rho * w * (-w).exp();
        let res = (deriv - rhs).abs();
        if res > sup {
            sup = res;
            argmax = spec.node(i);
        }
    }
    let kappa = p.kappa();
    ResidualReport {
        sup_residual: sup,
        argmax_t: argmax,
        endpoint_errors: (v[0].abs(), (v[n - 1] - kappa).abs()),
    }
}

/// Integrate the equation forward from a history segment by the method of
/// steps with classical RK4; delayed stage values are read from the already
/// computed past, linearly interpolated at half-steps. Requires `dt` to
/// divide both delays and not exceed the shorter one, and the history to
/// span at least the longer delay at step `dt`.
pub fn method_of_steps<T: Real>(
    history: &Profile<T>,
    p: &ModelParams<T>,
    t_end: T,
    dt: T,
) -> Result<Profile<T>> {
    if !(dt.is_finite() && dt > T::zero()) {
        return Err(Error::InvalidParameter("dt must be positive".into()));
    }
    if dt > p.sigma {
        return Err(Error::InvalidParameter(
            "dt must not exceed the shorter delay, or delayed stages would \
             need values that are not computed yet"
                .into(),
        ));
    }
    let hspec = history.spec();
    let align_tol = cast::<T>(1e-9);
    if ((hspec.h() - dt) / dt).abs() > align_tol {
        return Err(Error::GridMismatch("history step must equal dt".into()));
    }
    let whole = |x: T, what: &str| -> Result<usize> {
        let k = (x / dt).round();
        if ((x / dt) - k).abs() > align_tol * T::one().max(x / dt) || k < T::one() {
            return Err(Error::GridMismatch(format!(
                "{what} = {} is not a positive whole number of dt = {}",
                to_f64(x),
                to_f64(dt)
            )));
        }
        k.to_usize()
            .ok_or_else(|| Error::GridMismatch(format!("{what}/dt overflows")))
    };
    let ks = whole(p.sigma, "sigma")?;
    let kr = whole(p.r, "r")?;
    let start = hspec.t_max();
    if hspec.num_nodes() - 1 < kr {
        return Err(Error::InvalidParameter(
            "history must span the reproduction delay r".into(),
        ));
    }
    if !(t_end > start) {
        return Err(Error::InvalidParameter("t_end must lie beyond the history".into()));
    }
    let m = whole(t_end - start, "t_end - history end")?;

    let mut vals = history.values().to_vec();
    let base = vals.len() - 1; // index of the node at `start`
    let half = cast::<T>(0.5);
    let sixth = cast::<T>(6.0).recip();
    let two = cast::<T>(2.0);
    let f = |y: T, xs: T, xr: T| -p.delta * y - p.harvest * xs + p.rho * xr * (-xr).exp();
    for step in 0..m {
        let j = base + step;
        let mid = |idx: usize| (vals[idx] + vals[idx + 1]) * half;
        let y = vals[j];
        let k1 = f(y, vals[j - ks], vals[j - kr]);
        let k2 = f(y + half * dt * k1, mid(j - ks), mid(j - kr));
        let k3 = f(y + half * dt * k2, mid(j - ks), mid(j - kr));
        let k4 = f(y + dt * k3, vals[j + 1 - ks], vals[j + 1 - kr]);
        let next = y + dt * sixth * (k1 + two * k2 + two * k3 + k4);
        if !next.is_finite() {
            return Err(Error::BlowUp {
                t: to_f64(hspec.t_max() + dt * T::from_usize(step + 1).unwrap()),
            });
        }
        vals.push(next);
    }
    let out_spec = GridSpec::new(hspec.t_min(), t_end, dt)?;
    let last = *vals.last().unwrap();
    Profile::new(out_spec, vals, history.left_rate(), last)
}

/// Do the computed ends of the window behave like the two equilibria:
/// small on the left, near `kappa` and already flat on the right.
pub fn asymptotic_check<T: Real>(
    x: &Profile<T>,
    kappa: T,
    tol_left: T,
    tol_right: T,
) -> CheckReport {
    let v = x.values();
    let spec = x.spec();
    let mut rep = CheckReport::new();
    rep.push(
        "left-end",
        to_f64(tol_left - v[0].abs()),
        format!("|x(t_min)| = {:.3e} within {:.1e}", to_f64(v[0].abs()), to_f64(tol_left)),
        true,
    );
    let right = (v[v.len() - 1] - kappa).abs();
    rep.push(
        "right-end",
        to_f64(tol_right - right),
        format!("|x(t_max) - kappa| = {:.3e} within {:.1e}", to_f64(right), to_f64(tol_right)),
        true,
    );
    let flat = (x.eval(spec.t_max()) - x.eval(spec.t_max() - cast::<T>(5.0))).abs();
    rep.push(
        "right-flat",
        to_f64(tol_right - flat),
        format!("|x(t_max) - x(t_max - 5)| = {:.3e}", to_f64(flat)),
        true,
    );
    rep
}
