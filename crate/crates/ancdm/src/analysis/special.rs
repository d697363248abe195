//! Modified Bessel functions of the second kind, orders zero and one, and
//! the Gaussian Q function.
//!
//! `K0`/`K1` use the ascending series for `x <= 2` and Steed's continued
//! fraction (Thompson and Barnett, J. Comput. Phys. 64, 490 (1986)) above.
//! The plain large-argument asymptotic series cannot reach 1e-8 near the
//! crossover, the continued fraction converges to machine precision there.

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_ITER: usize = 400;

/// `K0(x)` and `K1(x)` evaluated together, relative error below 1e-10.
pub fn bessel_k0_k1(x: f64) -> Result<(f64, f64)> {
    if x <= 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!(
            "modified Bessel K requires x > 0, got {x}"
        )));
    }
    if x <= 2.0 {
        Ok(k0_k1_series(x))
    } else {
        k0_k1_steed(x)
    }
}

/// Zeroth-order modified Bessel function of the second kind.
pub fn bessel_k0(x: f64) -> Result<f64> {
    bessel_k0_k1(x).map(|(k0, _)| k0)
}

/// First-order modified Bessel function of the second kind.
pub fn bessel_k1(x: f64) -> Result<f64> {
    bessel_k0_k1(x).map(|(_, k1)| k1)
}

/// `x * K1(x)`, stable down to x = 0 where it tends to 1.
pub fn x_times_k1(x: f64) -> Result<f64> {
    if x < 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("x*K1(x) requires x >= 0, got {x}")));
    }
    // below this the correction terms x^2*ln(x) are under 1e-20
    if x < 1e-10 {
        return Ok(1.0);
    }
    Ok(x * bessel_k1(x)?)
}

/// Ascending series, accurate for `0 < x <= 2`:
/// `K0 = -(ln(x/2) + g) I0 + sum_{k>=1} q^k/(k!)^2 H_k` and
/// `K1 = 1/x + ln(x/2) I1 - (x/4) sum_k [psi(k+1)+psi(k+2)] q^k/(k!(k+1)!)`
/// with `q = x^2/4`.
fn k0_k1_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let log_half_x = (0.5 * x).ln();

    // I0, I1 and the companion log-series sums, all in one sweep
    let mut i0 = 1.0;
    let mut i1_sum = 1.0; // I1 = (x/2) * i1_sum
    let mut k0_sum = 0.0;
    let mut k1_sum = 0.0;
    let mut term0 = 1.0; // q^k / (k!)^2
    let mut term1 = 1.0; // q^k / (k!(k+1)!)
    let mut harmonic = 0.0; // H_k
    let mut psi_a = -EULER_GAMMA; // psi(k+1)
    let mut psi_b = 1.0 - EULER_GAMMA; // psi(k+2)
    k1_sum += term1 * (psi_a + psi_b);
    for k in 1..=MAX_ITER {
        let kf = k as f64;
        term0 *= q / (kf * kf);
        term1 *= q / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        psi_a += 1.0 / kf;
        psi_b += 1.0 / (kf + 1.0);
        i0 += term0;
        i1_sum += term1;
        k0_sum += term0 * harmonic;
        k1_sum += term1 * (psi_a + psi_b);
        if term0 < 1e-18 * i0 {
            break;
        }
    }
    let i1 = 0.5 * x * i1_sum;
    let k0 = -(log_half_x + EULER_GAMMA) * i0 + k0_sum;
    let k1 = 1.0 / x + log_half_x * i1 - 0.25 * x * k1_sum;
    (k0, k1)
}

/// Steed's continued fraction for `K_v`, `K_{v+1}` at `v = 0`; converges to
/// machine precision for `x > 1`.
fn k0_k1_steed(x: f64) -> Result<(f64, f64)> {
    let mut a = -0.25;
    let mut b = 2.0 * (x + 1.0);
    let mut d = 1.0 / b;
    let mut delta = d;
    let mut f = d;
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut q = 0.25;
    let mut c = 0.25;
    let mut s = 1.0 + q * delta;

    for k in 2..MAX_ITER {
        let kf = k as f64;
        a -= 2.0 * (kf - 1.0);
        b += 2.0;
        d = 1.0 / (a * d + b);
        delta *= b * d - 1.0;
        f += delta;
        let t = (prev - (b - 2.0) * cur) / a;
        prev = cur;
        cur = t;
        c *= -a / kf;
        q += c * t;
        s += q * delta;
        if (q * delta).abs() < s.abs() * f64::EPSILON {
            let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
            let k1 = k0 * (0.5 + x - 0.25 * f) / x;
            return Ok((k0, k1));
        }
    }
    Err(Error::Numeric(format!(
        "Steed continued fraction for K0/K1 failed to converge at x = {x}"
    )))
}

/// Gaussian Q function, `Q(x) = 0.5 * erfc(x / sqrt(2))`.
pub fn gaussian_q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}
