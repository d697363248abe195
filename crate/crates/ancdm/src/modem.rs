//! Rotated M-PSK constellations, differential encoding/decoding and Gray bit
//! mapping.
//!
//! A source transmits `s(t) = s(t-1) * c(t)` where `c(t)` is drawn from a
//! unit-power M-PSK alphabet. A constellation may carry a rotation angle
//! `theta`, applied as `c * exp(-j*theta)`; giving the two sources a relative
//! rotation keeps the difference `c1(t) - c2(t)` away from zero.

use num_complex::Complex64;
use rand::Rng;

use crate::{Error, Result};

/// Unit-power M-PSK alphabet with an optional rotation and Gray labeling.
#[derive(Debug, Clone)]
pub struct Constellation {
    order: usize,
    rotation: f64,
    points: Vec<Complex64>,
    /// Gray label carried by each alphabet index.
    labels: Vec<usize>,
    /// Inverse of `labels`: alphabet index for each Gray label.
    index_by_label: Vec<usize>,
}

impl Constellation {
    /// Builds the M points `exp(j*(2*pi*k/M - rotation))`, k = 0..M-1.
    ///
    /// `order` must be a power of two and at least 2.
    pub fn new(order: usize, rotation: f64) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::InvalidConstellation(format!(
                "order must be a power of two >= 2, got {order}"
            )));
        }
        let points = (0..order)
            .map(|k| {
                Complex64::cis(2.0 * std::f64::consts::PI * k as f64 / order as f64 - rotation)
            })
            .collect();
        let labels: Vec<usize> = (0..order).map(|k| k ^ (k >> 1)).collect();
        let mut index_by_label = vec![0; order];
        for (idx, &label) in labels.iter().enumerate() {
            index_by_label[label] = idx;
        }
        Ok(Self {
            order,
            rotation,
            points,
            labels,
            index_by_label,
        })
    }

    /// Unrotated BPSK, `{+1, -1}`.
    pub fn bpsk() -> Self {
        Self::new(2, 0.0).expect("BPSK is always valid")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Bits carried by one symbol, `log2(M)`.
    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    /// Rotation angle as given at construction.
    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    /// Rotation reduced modulo the constellation symmetry `2*pi/M` into
    /// `[-pi/M, pi/M]`; this is the only part of the angle that matters.
    pub fn effective_rotation(&self) -> f64 {
        let sector = 2.0 * std::f64::consts::PI / self.order as f64;
        self.rotation - sector * (self.rotation / sector).round()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Result<Complex64> {
        self.points
            .get(index)
            .copied()
            .ok_or_else(|| Error::InvalidSymbol(format!("index {index} out of range")))
    }

    /// Gray label of an alphabet index.
    pub fn label(&self, index: usize) -> usize {
        self.labels[index]
    }

    /// Alphabet index carrying a Gray label.
    pub fn index_with_label(&self, label: usize) -> usize {
        self.index_by_label[label]
    }

    /// Index of the alphabet point maximizing `Re(z * conj(point))`, which for
    /// unit-modulus points is the minimum-distance decision.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_metric = f64::NEG_INFINITY;
        for (idx, p) in self.points.iter().enumerate() {
            let metric = (z * p.conj()).re;
            if metric > best_metric {
                best_metric = metric;
                best = idx;
            }
        }
        best
    }
}

/// One block-fading frame: a fixed reference symbol followed by `L - 1`
/// information symbols.
#[derive(Debug, Clone)]
pub struct Frame {
    /// Alphabet indices of the information symbols (length `L - 1`).
    pub info_indices: Vec<usize>,
    /// Transmitted symbols including the reference (length `L`).
    pub tx_symbols: Vec<Complex64>,
}

impl Frame {
    /// Differentially encodes `info` behind the fixed reference symbol
    /// (alphabet index 0 at frame position 1).
    pub fn encode(info: &[usize], constellation: &Constellation) -> Result<Self> {
        let reference = constellation.point(0)?;
        let tx_symbols = diff_encode(info, constellation, reference)?;
        Ok(Self {
            info_indices: info.to_vec(),
            tx_symbols,
        })
    }

    /// Random frame of `frame_len` symbols (`frame_len - 1` uniform
    /// information symbols behind the reference).
    pub fn random<R: Rng + ?Sized>(
        constellation: &Constellation,
        frame_len: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if frame_len < 2 {
            return Err(Error::InsufficientFrame {
                need: 2,
                got: frame_len,
            });
        }
        let info: Vec<usize> = (0..frame_len - 1)
            .map(|_| rng.random_range(0..constellation.order()))
            .collect();
        Self::encode(&info, constellation)
    }

    /// Frame length `L` (reference plus information symbols).
    pub fn len(&self) -> usize {
        self.tx_symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tx_symbols.is_empty()
    }

    /// The alphabet symbols `c(t)` that multiplied the running product, in
    /// transmission order (length `L - 1`).
    pub fn info_symbols(&self, constellation: &Constellation) -> Result<Vec<Complex64>> {
        self.info_indices
            .iter()
            .map(|&i| constellation.point(i))
            .collect()
    }
}

/// Differential encoding: `out[0] = reference`, `out[t] = out[t-1] * c(t)`.
pub fn diff_encode(
    info: &[usize],
    constellation: &Constellation,
    reference: Complex64,
) -> Result<Vec<Complex64>> {
    if (reference.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidSymbol(format!(
            "reference symbol must have unit modulus, got |r| = {}",
            reference.norm()
        )));
    }
    let mut out = Vec::with_capacity(info.len() + 1);
    out.push(reference);
    for &idx in info {
        let c = constellation.point(idx)?;
        let prev = *out.last().expect("sequence starts with the reference");
        out.push(prev * c);
    }
    Ok(out)
}

/// Noiseless differential decode: nearest alphabet point to
/// `s(t) * conj(s(t-1))` for t = 2..L. Inverse of [`diff_encode`].
pub fn diff_decode(symbols: &[Complex64], constellation: &Constellation) -> Result<Vec<usize>> {
    if symbols.len() < 2 {
        return Err(Error::InsufficientFrame {
            need: 2,
            got: symbols.len(),
        });
    }
    Ok(symbols
        .windows(2)
        .map(|w| constellation.nearest(w[1] * w[0].conj()))
        .collect())
}

/// Average power `E[|c1 - c2|^2]` of the difference of two independently,
/// uniformly drawn alphabet symbols, by exact enumeration of all pairs.
pub fn diff_power(const_a: &Constellation, const_b: &Constellation) -> f64 {
    let mut acc = 0.0;
    for a in const_a.points() {
        for b in const_b.points() {
            acc += (a - b).norm_sqr();
        }
    }
    acc / (const_a.order() * const_b.order()) as f64
}

/// Smallest distance `|c1 - c2|` over all alphabet pairs; positive iff the
/// two alphabets share no point.
pub fn min_diff_distance(const_a: &Constellation, const_b: &Constellation) -> f64 {
    let mut min = f64::INFINITY;
    for a in const_a.points() {
        for b in const_b.points() {
            min = min.min((a - b).norm());
        }
    }
    min
}

/// Gray-maps a bit string onto alphabet indices, `log2(M)` bits per symbol,
/// most significant bit first.
pub fn bits_to_indices(bits: &[bool], constellation: &Constellation) -> Result<Vec<usize>> {
    let k = constellation.bits_per_symbol();
    if !bits.len().is_multiple_of(k) {
        return Err(Error::Framing(format!(
            "bit length {} is not a multiple of {} bits per symbol",
            bits.len(),
            k
        )));
    }
    Ok(bits
        .chunks(k)
        .map(|chunk| {
            let label = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            constellation.index_with_label(label)
        })
        .collect())
}

/// Inverse of [`bits_to_indices`].
pub fn indices_to_bits(indices: &[usize], constellation: &Constellation) -> Result<Vec<bool>> {
    let k = constellation.bits_per_symbol();
    let mut bits = Vec::with_capacity(indices.len() * k);
    for &idx in indices {
        if idx >= constellation.order() {
            return Err(Error::InvalidSymbol(format!("index {idx} out of range")));
        }
        let label = constellation.label(idx);
        for shift in (0..k).rev() {
            bits.push((label >> shift) & 1 == 1);
        }
    }
    Ok(bits)
}

/// Number of differing Gray-label bits between two index sequences.
pub fn bit_errors(decoded: &[usize], truth: &[usize], constellation: &Constellation) -> u64 {
    decoded
        .iter()
        .zip(truth)
        .map(|(&d, &t)| (constellation.label(d) ^ constellation.label(t)).count_ones() as u64)
        .sum()
}
