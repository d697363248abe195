//! Source-side processing: blind estimation of the self-interference gain,
//! cancellation, and the linear differential detector, plus genie-aided and
//! coherent benchmark detectors and instantaneous-SNR diagnostics.
//!
//! After the conjugate relay broadcast, source S1 sees
//! `y1(t) = mu*conj(s1(t)) + nu*conj(s2(t)) + w1(t)` with a real positive
//! `mu`. S1 knows its own `s1`, so it estimates `mu` from frame energies,
//! subtracts `mu*conj(s1(t))` and differentially decodes the partner's data
//! from what is left.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{add_awgn, ChannelRealization, NoiseModel};
use crate::modem::{bit_errors, Constellation};
use crate::relay::PowerProfile;
use crate::{Error, Result};

/// Effective end-to-end gains of a frame, for a given relay scaling `beta`:
/// `mu` multiplies the source's own conjugated signal, `nu` the partner's.
#[derive(Debug, Clone, Copy)]
pub struct LinkGains {
    /// `beta * sqrt(p_s*p_r) * |h1|^2`, always real and nonnegative.
    pub mu: f64,
    /// `beta * sqrt(p_s*p_r) * h1 * conj(h2)`.
    pub nu: Complex64,
}

/// Gains realized by a relay that scaled with `beta_used` (blind estimate or
/// exact value), seen at the source whose own link is `ch.h1`.
pub fn link_gains(beta_used: f64, ch: &ChannelRealization, pw: &PowerProfile) -> LinkGains {
    let amp = beta_used * (pw.p_s() * pw.p_r()).sqrt();
    LinkGains {
        mu: amp * ch.h1.norm_sqr(),
        nu: amp * ch.h1 * ch.h2.conj(),
    }
}

/// Reception at the source: `y1(t) = sqrt(p_r)*h1*x_r(t) + n1(t)`.
pub fn source_receive<R: Rng + ?Sized>(
    x_r: &[Complex64],
    ch: &ChannelRealization,
    pw: &PowerProfile,
    noise: &NoiseModel,
    rng: &mut R,
) -> Vec<Complex64> {
    let a = pw.p_r().sqrt() * ch.h1;
    let clean: Vec<Complex64> = x_r.iter().map(|x| a * x).collect();
    add_awgn(&clean, noise, rng)
}

/// The self-interference-free transformation
/// `y~(t) = conj(c1(t)) * y1(t-1) - y1(t)`, one entry per information symbol.
///
/// `own_info` holds the source's own alphabet symbols `c1(t)` in transmission
/// order (length `L - 1`); the source's contribution cancels exactly because
/// `s1(t) = s1(t-1)*c1(t)`.
pub fn build_difference_sequence(
    y1: &[Complex64],
    own_info: &[Complex64],
) -> Result<Vec<Complex64>> {
    if y1.len() < 2 {
        return Err(Error::InsufficientFrame {
            need: 2,
            got: y1.len(),
        });
    }
    if own_info.len() != y1.len() - 1 {
        return Err(Error::Framing(format!(
            "expected {} own symbols for a frame of {}, got {}",
            y1.len() - 1,
            y1.len(),
            own_info.len()
        )));
    }
    Ok((1..y1.len())
        .map(|t| own_info[t - 1].conj() * y1[t - 1] - y1[t])
        .collect())
}

/// Blind per-frame estimates of the cancellation gain.
#[derive(Debug, Clone, Copy)]
pub struct CancellationEstimate {
    /// `||y1||^2/L - nu_sq_hat`; may go negative at low SNR.
    pub delta: f64,
    /// `sqrt(delta)` clamped at zero, since the true gain is nonnegative.
    pub mu_hat: f64,
    /// Partner-gain energy estimate from the difference sequence.
    pub nu_sq_hat: f64,
}

/// Estimates `mu` and `|nu|^2` from the frame energies.
///
/// `diff_pw` is `E[|s2(t-1)|^2] * E[|c1(t)-c2(t)|^2]` from the constellation
/// pair (2 for unit-power M-PSK alphabets); see [`crate::modem::diff_power`].
pub fn estimate_cancellation(
    y1: &[Complex64],
    y1_tilde: &[Complex64],
    diff_pw: f64,
) -> Result<CancellationEstimate> {
    if diff_pw <= 0.0 || diff_pw.is_nan() {
        return Err(Error::Config(format!(
            "difference power must be positive, got {diff_pw}"
        )));
    }
    if y1.is_empty() || y1_tilde.is_empty() {
        return Err(Error::InsufficientFrame {
            need: 2,
            got: y1.len(),
        });
    }
    let mean_y = y1.iter().map(|z| z.norm_sqr()).sum::<f64>() / y1.len() as f64;
    let mean_t = y1_tilde.iter().map(|z| z.norm_sqr()).sum::<f64>() / y1_tilde.len() as f64;
    let nu_sq_hat = mean_t / diff_pw;
    let delta = mean_y - nu_sq_hat;
    Ok(CancellationEstimate {
        delta,
        mu_hat: delta.max(0.0).sqrt(),
        nu_sq_hat,
    })
}

fn cancel(y1: &[Complex64], mu: f64, own_s1: &[Complex64]) -> Vec<Complex64> {
    y1.iter()
        .zip(own_s1)
        .map(|(y, s)| y - mu * s.conj())
        .collect()
}

/// Differential detection of the partner's symbols after subtracting
/// `mu_hat * conj(s1(t))`: for each t,
/// `argmax_c Re{ y'(t) * conj(y'(t-1)) * c }` over the partner's alphabet.
///
/// Always returns a decision per information symbol.
pub fn differential_detect(
    y1: &[Complex64],
    mu_hat: f64,
    own_s1: &[Complex64],
    constellation: &Constellation,
) -> Vec<usize> {
    assert_eq!(y1.len(), own_s1.len(), "frame lengths must agree");
    assert!(y1.len() >= 2, "need a reference and at least one symbol");
    let y1p = cancel(y1, mu_hat, own_s1);
    (1..y1p.len())
        // argmax_c Re{y'(t) conj(y'(t-1)) c} == nearest point to its conjugate
        .map(|t| constellation.nearest((y1p[t] * y1p[t - 1].conj()).conj()))
        .collect()
}

/// Same decoder as [`differential_detect`] but with the exact gain handed
/// over by a genie; isolates the cost of estimating `mu`.
pub fn genie_detect(
    y1: &[Complex64],
    mu_true: f64,
    own_s1: &[Complex64],
    constellation: &Constellation,
) -> Vec<usize> {
    differential_detect(y1, mu_true, own_s1, constellation)
}

/// Coherent benchmark: full channel knowledge plus genie access to the
/// partner's previous symbol. Subtracts the exact `mu*conj(s1(t))` and
/// matched-filters against `nu*conj(s2(t-1))`, so only one noise term enters
/// each decision.
pub fn coherent_detect(
    y1: &[Complex64],
    gains: &LinkGains,
    own_s1: &[Complex64],
    s2_prev: &[Complex64],
    constellation: &Constellation,
) -> Vec<usize> {
    assert_eq!(y1.len(), own_s1.len(), "frame lengths must agree");
    assert_eq!(s2_prev.len(), y1.len() - 1, "need s2(t-1) per decision");
    let y1p = cancel(y1, gains.mu, own_s1);
    (1..y1p.len())
        .map(|t| {
            let reference = gains.nu * s2_prev[t - 1].conj();
            constellation.nearest((y1p[t] * reference.conj()).conj())
        })
        .collect()
}

/// Instantaneous post-cancellation SNRs of the two receivers.
#[derive(Debug, Clone, Copy)]
pub struct SnrPair {
    /// Differential detector SNR; exactly half of `gamma_c`.
    pub gamma_d: f64,
    /// Coherent detector SNR.
    pub gamma_c: f64,
}

/// Evaluates the closed-form SNRs for a channel draw:
/// `gamma_c = psi_s*psi_r*|h1|^2*|h2|^2 /
///            ((psi_s+psi_r)*|h1|^2 + psi_s*|h2|^2 + 1)` and
/// `gamma_d = gamma_c / 2`.
pub fn instantaneous_snrs(
    ch: &ChannelRealization,
    pw: &PowerProfile,
    noise: &NoiseModel,
) -> SnrPair {
    let psi_s = pw.psi_s(noise);
    let psi_r = pw.psi_r(noise);
    let a = ch.h1.norm_sqr();
    let b = ch.h2.norm_sqr();
    let gamma_c = psi_s * psi_r * a * b / ((psi_s + psi_r) * a + psi_s * b + 1.0);
    SnrPair {
        gamma_d: gamma_c / 2.0,
        gamma_c,
    }
}

/// Outcome of decoding one frame, with SNR diagnostics attached.
#[derive(Debug, Clone)]
pub struct DetectionReport {
    pub decoded_indices: Vec<usize>,
    pub bit_errors: u64,
    pub gamma_d: f64,
    pub gamma_c: f64,
}

impl DetectionReport {
    pub fn new(
        decoded_indices: Vec<usize>,
        truth: &[usize],
        constellation: &Constellation,
        snrs: SnrPair,
    ) -> Self {
        let errors = bit_errors(&decoded_indices, truth, constellation);
        Self {
            decoded_indices,
            bit_errors: errors,
            gamma_d: snrs.gamma_d,
            gamma_c: snrs.gamma_c,
        }
    }
}
