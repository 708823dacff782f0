//! Characteristic function at the trivial equilibrium and the derived
//! feasibility quantities built from its smallest positive root.
//!
//! Linearizing at zero and inserting `e^{zt}` gives
//!
//! ```text
//! chi0(z) = -z - delta - H e^{-sigma z} + rho e^{-r z}
//! ```
//!
//! Under the growth condition `chi0(0) = rho - delta - H > 0`, and
//! `chi0 -> -inf`, so a smallest positive root `lambda` exists; it is the
//! decay rate of the wave tail at the trivial state.

use crate::bisect::bisect;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::scalar::{cast, to_f64, Real};

pub fn chi0<T: Real>(z: T, p: &ModelParams<T>) -> T {
    -z - p.delta - p.harvest * (-p.sigma * z).exp() + p.rho * (-p.r * z).exp()
}

#[derive(Debug, Clone, Copy)]
pub struct RootResult<T> {
    pub root: T,
    /// Characteristic value at `root`; `|residual| <= tol` on success.
    pub residual: T,
    /// Enclosing bracket with a sign change at its ends.
    pub bracket: (T, T),
    pub iterations: u32,
}

/// Smallest positive root of `chi0`, certified to `|chi0(root)| <= tol` with
/// a bracket width of at most `10 tol`. The sign change is located by
/// doubling an upper end until `chi0` goes negative, then scanning for the
/// first crossing so later roots of a non-monotone `chi0` are ignored.
pub fn find_lambda<T: Real>(p: &ModelParams<T>, tol: T) -> Result<RootResult<T>> {
    if !(tol.is_finite() && tol > T::zero()) {
        return Err(Error::InvalidParameter("root tolerance must be positive".into()));
    }
    let f = |z: T| chi0(z, p);
    if !(f(T::zero()) > T::zero()) {
        return Err(Error::NoRoot(
            "chi0(0) = rho - delta - H is not positive".into(),
        ));
    }
    let mut hi = T::one();
    let mut doublings = 0;
    while f(hi) >= T::zero() {
        hi = hi + hi;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::NoRoot("no sign change of chi0 on (0, 2^60]".into()));
        }
    }
    // First sign change over a uniform scan of (0, hi].
    let cells = 1024usize;
    let step = hi / T::from_usize(cells).unwrap();
    let (mut lo, mut up) = (T::zero(), hi);
    let mut prev = f(T::zero());
    for i in 1..=cells {
        let x = step * T::from_usize(i).unwrap();
        let v = f(x);
        if prev > T::zero() && v <= T::zero() {
            lo = step * T::from_usize(i - 1).unwrap();
            up = x;
            break;
        }
        prev = v;
    }
    let b = bisect(f, lo, up, tol, tol * cast(10.0), 2000).ok_or_else(|| {
        Error::NoRoot(format!(
            "cannot certify |chi0| <= {} at floating-point resolution",
            to_f64(tol)
        ))
    })?;
    Ok(RootResult {
        root: b.root,
        residual: f(b.root),
        bracket: (b.lo, b.hi),
        iterations: b.iterations,
    })
}

/// Lower end of the admissible `epsilon` range: the exponent `lambda + eps`
/// must satisfy `H e^{-(lambda+eps) sigma} >= rho e^{-(lambda+eps) r}`,
/// i.e. `eps >= ln(rho/H)/(r - sigma) - lambda`, clipped at zero.
pub fn epsilon_lower_bound<T: Real>(
    rho: T,
    harvest: T,
    sigma: T,
    r: T,
    lambda: T,
) -> Result<T> {
    if !(rho > T::zero() && harvest > T::zero()) {
        return Err(Error::InvalidParameter(
            "epsilon bound needs rho > 0 and harvest > 0".into(),
        ));
    }
    if !(r > sigma) {
        return Err(Error::InvalidParameter("epsilon bound needs r > sigma".into()));
    }
    Ok(((rho / harvest).ln() / (r - sigma) - lambda).max(T::zero()))
}

/// Admissible open interval for `epsilon`: lower end from the delayed-term
/// domination condition, upper end `lambda` itself. Empty (lo >= hi) means
/// the lower-solution recipe has no valid shape parameter at this `lambda`.
pub fn epsilon_window<T: Real>(p: &ModelParams<T>, lambda: T) -> (T, T) {
    let lo = epsilon_lower_bound(p.rho, p.harvest, p.sigma, p.r, lambda)
        .expect("validated params always admit the bound");
    (lo, lambda)
}

/// Amplitude constraints for the lower solution at shape `(lambda, eps)`:
/// returns `(bound, cap)` where `bound` is the residual-sign bound
/// `min(m1, m2)/rho` and `cap = kappa beta / (lambda + beta)` keeps the
/// lower solution below the upper one. The bound may come out nonpositive;
/// deciding what to do with that is the caller's business.
pub fn alpha_bound<T: Real>(
    p: &ModelParams<T>,
    lambda: T,
    eps: T,
    kappa: T,
    beta: T,
) -> Result<(T, T)> {
    if !(lambda > T::zero() && lambda.is_finite()) {
        return Err(Error::Domain("alpha bound needs lambda > 0".into()));
    }
    if !(eps > T::zero() && eps < lambda) {
        return Err(Error::Domain(format!(
            "alpha bound needs 0 < eps < lambda, got eps = {}, lambda = {}",
            to_f64(eps),
            to_f64(lambda)
        )));
    }
    let ze = lambda + eps;
    let m1 = lambda + p.delta + p.harvest * (-ze * p.sigma).exp() - p.rho * (-ze * p.r).exp();
    let four = cast::<T>(4.0);
    let m2 = -chi0(ze, p) * ze.powf(ze / eps)
        / (four * eps * eps * (lambda - eps).powf((lambda - eps) / eps));
    let bound = m1.min(m2) / p.rho;
    let cap = kappa * beta / (lambda + beta);
    Ok((bound, cap))
}
