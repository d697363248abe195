//! Block Rayleigh fading, AWGN and reproducible random substreams.
//!
//! Fading gains are constant over one frame and independent across frames.
//! The same gain applies in both transmission phases (channel reciprocity
//! within the coherence block).
//!
//! Every experiment derives one ChaCha substream per (experiment, SNR point,
//! frame) triple from the master seed, so results are bit-identical no matter
//! how frames are scheduled across workers.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// RNG used for all simulation draws.
pub type SimRng = ChaCha8Rng;

const DOMAIN_BITS: u32 = 4;
const POINT_BITS: u32 = 12;
const FRAME_BITS: u32 = 48;

/// Deterministic per-frame generator: the master seed keys the cipher and the
/// (domain, point, frame) triple is packed injectively into the stream id.
pub fn substream(master_seed: u64, domain: u64, point: u64, frame: u64) -> SimRng {
    assert!(domain < 1 << DOMAIN_BITS, "domain id out of range");
    assert!(point < 1 << POINT_BITS, "point index out of range");
    assert!(frame < 1 << FRAME_BITS, "frame index out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((domain << (POINT_BITS + FRAME_BITS)) | (point << FRAME_BITS) | frame);
    rng
}

/// Per-frame fading pair: `h1` on the S1-relay link, `h2` on the S2-relay
/// link, both circularly-symmetric complex Gaussian with unit variance.
#[derive(Debug, Clone, Copy)]
pub struct ChannelRealization {
    pub h1: Complex64,
    pub h2: Complex64,
}

impl ChannelRealization {
    /// The same physical channel seen from S2's side: link roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            h1: self.h2,
            h2: self.h1,
        }
    }
}

/// Complex AWGN level: each sample has total variance `n0` (`n0/2` per
/// dimension), identical at both sources and the relay.
#[derive(Debug, Clone, Copy)]
pub struct NoiseModel {
    n0: f64,
}

impl NoiseModel {
    pub fn new(n0: f64) -> Result<Self> {
        if n0 <= 0.0 || !n0.is_finite() {
            return Err(Error::Domain(format!(
                "noise variance must be positive, got {n0}"
            )));
        }
        Ok(Self { n0 })
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let sigma = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(sigma * re, sigma * im)
}

/// Draws one frame's fading pair, `E[|h|^2] = 1` per link, independent links.
pub fn draw_channel<R: Rng + ?Sized>(rng: &mut R) -> ChannelRealization {
    ChannelRealization {
        h1: complex_gaussian(rng, 1.0),
        h2: complex_gaussian(rng, 1.0),
    }
}

/// Adds i.i.d. complex Gaussian noise of total variance `n0` per sample.
pub fn add_awgn<R: Rng + ?Sized>(
    signal: &[Complex64],
    noise: &NoiseModel,
    rng: &mut R,
) -> Vec<Complex64> {
    signal
        .iter()
        .map(|s| s + complex_gaussian(rng, noise.n0))
        .collect()
}
