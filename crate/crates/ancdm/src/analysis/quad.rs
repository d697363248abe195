//! Adaptive Simpson quadrature.

use crate::{Error, Result};

const MAX_DEPTH: u32 = 60;
/// Hard cap on function evaluations; a request that needs more than this is
/// asking for accuracy below the floating-point noise of the integrand.
const MAX_EVALS: u64 = 20_000_000;

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
    evals: &mut u64,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    *evals += 2;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 || *evals > MAX_EVALS {
        return Err(Error::Numeric(format!(
            "adaptive Simpson did not converge on [{a}, {b}] (residual {delta:e}, \
             {evals} evaluations); the tolerance is below what the integrand supports"
        )));
    }
    let l = recurse(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1, evals)?;
    let r = recurse(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1, evals)?;
    Ok(l + r)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `eps`.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, eps: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !a.is_finite() || !b.is_finite() || eps <= 0.0 || eps.is_nan() {
        return Err(Error::Numeric(format!(
            "bad quadrature request: interval [{a}, {b}], eps {eps}"
        )));
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    let mut evals = 3;
    recurse(f, a, b, fa, fm, fb, whole, eps, MAX_DEPTH, &mut evals)
}

/// Fixed-grid composite Simpson; a cheap magnitude estimate used to pick a
/// sensible tolerance before an adaptive pass.
pub fn composite_simpson<F>(f: &F, a: f64, b: f64, panels: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let n = panels.max(1);
    let h = (b - a) / n as f64;
    let mut acc = 0.0;
    let mut fa = f(a);
    for k in 0..n {
        let x0 = a + k as f64 * h;
        let fm = f(x0 + 0.5 * h);
        let fb = f(x0 + h);
        acc += simpson(x0, x0 + h, fa, fm, fb);
        fa = fb;
    }
    acc
}
