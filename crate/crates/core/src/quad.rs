//! Adaptive Simpson quadrature.

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Number of integrand evaluations.
    pub evaluations: usize,
    /// Sum of the local error estimates that were accepted.
    pub error_estimate: f64,
}

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` by adaptive Simpson bisection until every
/// local error estimate is within its share of `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Quadrature {
    let fa = f(a);
    let fb = f(b);
    integrate_with_endpoints(&f, a, b, fa, fb, tol, 2)
}

/// As [`adaptive_simpson`], with the endpoint values supplied by the caller.
///
/// Useful when `f` has jumps at `a` or `b` and the one-sided limits are
/// known separately.
pub fn adaptive_simpson_ends<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    tol: f64,
) -> Quadrature {
    integrate_with_endpoints(&f, a, b, fa, fb, tol, 0)
}

fn integrate_with_endpoints<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    tol: f64,
    spent: usize,
) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            evaluations: spent,
            error_estimate: 0.0,
        };
    }
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut q = Quadrature {
        value: 0.0,
        evaluations: spent + 1,
        error_estimate: 0.0,
    };
    recurse(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut q);
    q
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    q: &mut Quadrature,
) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    q.evaluations += 2;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || m <= a || b <= m {
        q.value += left + right + delta / 15.0;
        q.error_estimate += delta.abs() / 15.0;
        return;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, q);
    recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, q);
}
