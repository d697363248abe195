//! Single-frame simulation of the full link: encode at both sources, relay
//! superposition and conjugate broadcast, then source-side estimation,
//! cancellation and detection.

use crate::channel::{draw_channel, NoiseModel, SimRng};
use crate::modem::{bit_errors, diff_power, Constellation, Frame};
use crate::receiver::{
    build_difference_sequence, coherent_detect, differential_detect, estimate_cancellation,
    genie_detect, link_gains,
};
use crate::relay::{self, PowerProfile};
use crate::Result;

/// Which detectors to run on each simulated frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectorSet {
    pub differential: bool,
    pub genie: bool,
    pub coherent: bool,
}

impl DetectorSet {
    pub const NONE: Self = Self {
        differential: false,
        genie: false,
        coherent: false,
    };

    pub const ALL: Self = Self {
        differential: true,
        genie: true,
        coherent: true,
    };

    pub fn is_empty(&self) -> bool {
        !(self.differential || self.genie || self.coherent)
    }
}

/// Bit-error counts of one frame, per detector.
#[derive(Debug, Clone, Copy, Default)]
pub struct DetectorErrors {
    pub differential: u64,
    pub genie: u64,
    pub coherent: u64,
}

impl DetectorErrors {
    pub fn add(&mut self, other: &DetectorErrors) {
        self.differential += other.differential;
        self.genie += other.genie;
        self.coherent += other.coherent;
    }
}

/// Everything measured on one frame.
#[derive(Debug, Clone, Copy)]
pub struct FrameOutcome {
    /// Information bits carried per decoding side.
    pub info_bits: u64,
    /// Errors at S1 decoding S2's data.
    pub s1_side: DetectorErrors,
    /// Errors at S2 decoding S1's data, when the mirror side is simulated.
    pub s2_side: Option<DetectorErrors>,
    /// Self-interference gain realized by the relay scaling actually used.
    pub mu_actual: f64,
    /// Blind estimate of the same gain at S1.
    pub mu_hat: f64,
    /// Whether the estimator clamped a negative energy difference to zero.
    pub mu_clamped: bool,
}

/// Static per-experiment inputs of the frame simulation.
#[derive(Debug, Clone)]
pub struct FrameParams {
    /// S1's alphabet (never rotated).
    pub const_s1: Constellation,
    /// S2's alphabet, possibly rotated against S1's.
    pub const_s2: Constellation,
    pub frame_len: usize,
    pub power: PowerProfile,
    pub noise: NoiseModel,
    /// `E[|s|^2] * E[|c1 - c2|^2]` consumed by the blind estimator.
    pub diff_pw: f64,
    pub detectors: DetectorSet,
    /// Also run the mirrored receiver at S2.
    pub decode_both: bool,
}

impl FrameParams {
    pub fn new(
        const_s1: Constellation,
        const_s2: Constellation,
        frame_len: usize,
        power: PowerProfile,
        noise: NoiseModel,
        detectors: DetectorSet,
        decode_both: bool,
    ) -> Self {
        let diff_pw = diff_power(&const_s1, &const_s2);
        Self {
            const_s1,
            const_s2,
            frame_len,
            power,
            noise,
            diff_pw,
            detectors,
            decode_both,
        }
    }

    pub fn info_bits_per_side(&self) -> u64 {
        ((self.frame_len - 1) * self.const_s2.bits_per_symbol()) as u64
    }
}

#[allow(clippy::too_many_arguments)]
fn decode_one_side(
    y: &[num_complex::Complex64],
    own: &Frame,
    own_const: &Constellation,
    partner: &Frame,
    partner_const: &Constellation,
    mu_actual: f64,
    nu_gains: &crate::receiver::LinkGains,
    params: &FrameParams,
) -> Result<(DetectorErrors, f64, bool)> {
    let mut errors = DetectorErrors::default();
    let mut mu_hat = f64::NAN;
    let mut clamped = false;

    // the blind estimate is also what the mu-MSE experiment measures, so
    // compute it for the differential path and for detector-less runs
    if params.detectors.differential || params.detectors.is_empty() {
        let own_info = own.info_symbols(own_const)?;
        let tilde = build_difference_sequence(y, &own_info)?;
        let est = estimate_cancellation(y, &tilde, params.diff_pw)?;
        mu_hat = est.mu_hat;
        clamped = est.delta <= 0.0;
        if params.detectors.differential {
            let decoded = differential_detect(y, est.mu_hat, &own.tx_symbols, partner_const);
            errors.differential = bit_errors(&decoded, &partner.info_indices, partner_const);
        }
    }
    if params.detectors.genie {
        let decoded = genie_detect(y, mu_actual, &own.tx_symbols, partner_const);
        errors.genie = bit_errors(&decoded, &partner.info_indices, partner_const);
    }
    if params.detectors.coherent {
        let prev = &partner.tx_symbols[..partner.tx_symbols.len() - 1];
        let decoded = coherent_detect(y, nu_gains, &own.tx_symbols, prev, partner_const);
        errors.coherent = bit_errors(&decoded, &partner.info_indices, partner_const);
    }
    Ok((errors, mu_hat, clamped))
}

/// Simulates one frame end to end on its own random substream.
///
/// Draw order is fixed (channel, S1 data, S2 data, relay noise, S1 receive
/// noise, then S2 receive noise if requested), so a frame's outcome depends
/// only on its substream, never on scheduling.
pub fn simulate_frame(params: &FrameParams, rng: &mut SimRng) -> Result<FrameOutcome> {
    let ch = draw_channel(rng);
    let f1 = Frame::random(&params.const_s1, params.frame_len, rng)?;
    let f2 = Frame::random(&params.const_s2, params.frame_len, rng)?;

    let rf = relay::receive(
        &f1.tx_symbols,
        &f2.tx_symbols,
        &ch,
        &params.power,
        &params.noise,
        rng,
    )?;
    let x_r = rf.broadcast();

    let y1 = crate::receiver::source_receive(&x_r, &ch, &params.power, &params.noise, rng);
    let gains1 = link_gains(rf.beta_hat, &ch, &params.power);
    let (s1_side, mu_hat, mu_clamped) = decode_one_side(
        &y1,
        &f1,
        &params.const_s1,
        &f2,
        &params.const_s2,
        gains1.mu,
        &gains1,
        params,
    )?;

    let s2_side = if params.decode_both {
        let flipped = ch.swapped();
        let y2 = crate::receiver::source_receive(&x_r, &flipped, &params.power, &params.noise, rng);
        let gains2 = link_gains(rf.beta_hat, &flipped, &params.power);
        let (errors, _, _) = decode_one_side(
            &y2,
            &f2,
            &params.const_s2,
            &f1,
            &params.const_s1,
            gains2.mu,
            &gains2,
            params,
        )?;
        Some(errors)
    } else {
        None
    };

    Ok(FrameOutcome {
        info_bits: params.info_bits_per_side(),
        s1_side,
        s2_side,
        mu_actual: gains1.mu,
        mu_hat,
        mu_clamped,
    })
}
