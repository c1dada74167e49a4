//! Small numeric helpers shared across modules.

use std::f64::consts::TAU;

/// Wraps an angle into `[0, 2*pi)`.
pub(crate) fn wrap_tau(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    // rem_euclid of a tiny negative angle can round up to exactly 2*pi.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wraps an angle into `[-pi, pi]`.
pub(crate) fn wrap_pm_pi(phi: f64) -> f64 {
    let r = wrap_tau(phi);
    if r > std::f64::consts::PI {
        r - TAU
    } else {
        r
    }
}

/// Golden-section minimization of a unimodal-enough `f` on `[a, b]`.
///
/// Shrinks the bracket until it is narrower than `tol`, then returns the
/// midpoint and its value. Deterministic for a deterministic `f`.
pub(crate) fn golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    debug_assert!(b >= a);
    let gr = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut c = hi - gr * (hi - lo);
    let mut d = lo + gr * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Golden-section maximization; see [`golden_min`].
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (x, neg) = golden_min(|t| -f(t), a, b, tol);
    (x, -neg)
}
