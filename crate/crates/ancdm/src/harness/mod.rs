//! Experiment orchestration: Monte Carlo BER sweeps, the lambda sweep, the
//! mu-estimation MSE measurement, analytic tables and CSV output.
//!
//! Every experiment is reproducible: a frame's randomness comes only from
//! the (experiment, point, frame) substream of the master seed, rounds and
//! batches are fixed-size, and partial sums are merged in batch order, so
//! the output is byte-identical for any worker count.

mod config;
mod frame;

pub use config::parse_config;
pub use frame::{simulate_frame, DetectorErrors, DetectorSet, FrameOutcome, FrameParams};

use crate::analysis::{asymptotic_ber, ber_numeric, optimal_power, AsymptoticBerInput};
use crate::channel::{substream, NoiseModel};
use crate::modem::Constellation;
use crate::relay::PowerProfile;
use crate::{Error, Result};

/// Frames per work item; one substream each, merged in index order.
const BATCH_FRAMES: u64 = 256;
/// Frames in the first stop-rule round; later rounds double.
const INITIAL_ROUND: u64 = 2048;
const MAX_ROUND: u64 = 1 << 16;

/// The detectors a sweep can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    Differential,
    Genie,
    Coherent,
}

impl Detector {
    pub const ALL: [Detector; 3] = [
        Detector::Differential,
        Detector::Genie,
        Detector::Coherent,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Detector::Differential => "differential",
            Detector::Genie => "genie",
            Detector::Coherent => "coherent",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "differential" => Ok(Detector::Differential),
            "genie" => Ok(Detector::Genie),
            "coherent" => Ok(Detector::Coherent),
            other => Err(Error::Config(format!("unknown detector '{other}'"))),
        }
    }

    fn errors_of(&self, e: &DetectorErrors) -> u64 {
        match self {
            Detector::Differential => e.differential,
            Detector::Genie => e.genie,
            Detector::Coherent => e.coherent,
        }
    }
}

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    BerSweep,
    LambdaSweep,
    MseMu,
    RotationCompare,
    Analytic,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::BerSweep => "ber-sweep",
            Experiment::LambdaSweep => "lambda-sweep",
            Experiment::MseMu => "mse-mu",
            Experiment::RotationCompare => "rotation-compare",
            Experiment::Analytic => "analytic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ber-sweep" => Ok(Experiment::BerSweep),
            "lambda-sweep" => Ok(Experiment::LambdaSweep),
            "mse-mu" => Ok(Experiment::MseMu),
            "rotation-compare" => Ok(Experiment::RotationCompare),
            // the power optimum is part of the analytic table
            "analytic" | "power-opt" => Ok(Experiment::Analytic),
            other => Err(Error::Config(format!("unknown experiment '{other}'"))),
        }
    }

    /// Substream domain id; analytic runs draw nothing.
    fn domain(&self) -> u64 {
        match self {
            Experiment::BerSweep => 0,
            Experiment::LambdaSweep => 1,
            Experiment::MseMu => 2,
            Experiment::RotationCompare => 3,
            Experiment::Analytic => 0,
        }
    }
}

/// How the total budget `p` is split between the sources and the relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerMode {
    /// `p_s = p_r = p/3`.
    Equal,
    /// `p_s = p/4`, `p_r = p/2`.
    Optimal,
    /// Explicit `(p_s, p_r)`.
    Custom { p_s: f64, p_r: f64 },
}

impl PowerMode {
    pub fn profile(&self, total: f64) -> Result<PowerProfile> {
        match self {
            PowerMode::Equal => PowerProfile::equal(total),
            PowerMode::Optimal => PowerProfile::optimal(total),
            PowerMode::Custom { p_s, p_r } => PowerProfile::custom(*p_s, *p_r),
        }
    }
}

/// Stop rule of one SNR point: collect at least `min_errors` bit errors on
/// every requested detector, giving up after `max_bits` information bits.
#[derive(Debug, Clone, Copy)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_bits: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_errors: 200,
            max_bits: 20_000_000,
        }
    }
}

/// Full experiment description; every field has a default and a config key.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub detectors: Vec<Detector>,
    pub modulation_order: usize,
    /// Rotation of S2's alphabet relative to S1's, radians.
    pub rotation: f64,
    pub frame_len: usize,
    pub power_mode: PowerMode,
    pub total_power: f64,
    pub snr_grid_db: Vec<f64>,
    pub stop_rule: StopRule,
    pub seed: u64,
    /// `p_s/p_r` grid of the lambda sweep.
    pub lambda_grid: Vec<f64>,
    /// Noise levels of the lambda sweep.
    pub n0_list: Vec<f64>,
    /// Frames per SNR point of the mu-MSE experiment.
    pub mse_frames: u64,
    /// Also decode the mirrored direction (S2 recovering S1's data).
    pub decode_both: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::BerSweep,
            detectors: Detector::ALL.to_vec(),
            modulation_order: 2,
            rotation: 0.0,
            frame_len: 100,
            power_mode: PowerMode::Equal,
            total_power: 3.0,
            snr_grid_db: vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0],
            stop_rule: StopRule::default(),
            seed: 1,
            lambda_grid: vec![0.125, 0.25, 0.5, 1.0, 2.0, 4.0],
            n0_list: vec![0.01, 0.001],
            mse_frames: 10_000,
            decode_both: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.modulation_order < 2 || !self.modulation_order.is_power_of_two() {
            return Err(Error::Config(format!(
                "modulation_order must be a power of two >= 2, got {}",
                self.modulation_order
            )));
        }
        if self.frame_len < 2 {
            return Err(Error::Config(format!(
                "frame_length must be at least 2, got {}",
                self.frame_len
            )));
        }
        if !self.rotation.is_finite() {
            return Err(Error::Config("rotation must be finite".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::Config("snr_grid_db must not be empty".into()));
        }
        if !self.snr_grid_db.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config(
                "snr_grid_db must be strictly increasing".into(),
            ));
        }
        if self.stop_rule.min_errors == 0 || self.stop_rule.max_bits == 0 {
            return Err(Error::Config(
                "stop rule needs min_errors >= 1 and max_bits >= 1".into(),
            ));
        }
        if self.total_power <= 0.0 || self.total_power.is_nan() {
            return Err(Error::Config(format!(
                "total_power must be positive, got {}",
                self.total_power
            )));
        }
        let simulates = matches!(
            self.experiment,
            Experiment::BerSweep | Experiment::LambdaSweep | Experiment::RotationCompare
        );
        if simulates && self.detectors.is_empty() {
            return Err(Error::Config("detectors must not be empty".into()));
        }
        if self.experiment == Experiment::LambdaSweep {
            if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|&l| l <= 0.0 || l.is_nan()) {
                return Err(Error::Config("lambda_grid must be positive".into()));
            }
            if self.n0_list.is_empty() || self.n0_list.iter().any(|&n| n <= 0.0 || n.is_nan()) {
                return Err(Error::Config("n0_list must be positive".into()));
            }
        }
        if self.experiment == Experiment::MseMu && self.mse_frames == 0 {
            return Err(Error::Config("mse_frames must be at least 1".into()));
        }
        self.power_mode.profile(self.total_power)?;
        Ok(())
    }

    fn detector_set(&self) -> DetectorSet {
        DetectorSet {
            differential: self.detectors.contains(&Detector::Differential),
            genie: self.detectors.contains(&Detector::Genie),
            coherent: self.detectors.contains(&Detector::Coherent),
        }
    }
}

/// One output row: a measured (or analytic) BER value with its full context.
#[derive(Debug, Clone)]
pub struct BerPoint {
    pub experiment: &'static str,
    pub detector: String,
    pub psi_s_db: f64,
    pub lambda: f64,
    pub n0: f64,
    pub p_s: f64,
    pub p_r: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    /// Binomial 95% half-width (for mu-MSE rows: 1.96 standard errors).
    pub ci95: f64,
    pub truncated: bool,
}

fn binomial_ci95(errors: u64, bits: u64) -> f64 {
    if bits == 0 {
        return 0.0;
    }
    let p = errors as f64 / bits as f64;
    1.96 * (p * (1.0 - p) / bits as f64).sqrt()
}

/// Accumulated measurements of one point, merged in deterministic order.
#[derive(Debug, Clone, Copy, Default)]
struct PointAccum {
    frames: u64,
    bits: u64,
    s1: DetectorErrors,
    s2: DetectorErrors,
    clamped: u64,
    sum_err_sq: f64,
    sum_err_4th: f64,
    sum_mu: f64,
}

impl PointAccum {
    fn merge(&mut self, o: &PointAccum) {
        self.frames += o.frames;
        self.bits += o.bits;
        self.s1.add(&o.s1);
        self.s2.add(&o.s2);
        self.clamped += o.clamped;
        self.sum_err_sq += o.sum_err_sq;
        self.sum_err_4th += o.sum_err_4th;
        self.sum_mu += o.sum_mu;
    }
}

fn simulate_batch(
    params: &FrameParams,
    seed: u64,
    domain: u64,
    point: u64,
    first: u64,
    last: u64,
) -> Result<PointAccum> {
    let mut acc = PointAccum::default();
    for frame in first..last {
        let mut rng = substream(seed, domain, point, frame);
        let out = simulate_frame(params, &mut rng)?;
        acc.frames += 1;
        acc.bits += out.info_bits;
        acc.s1.add(&out.s1_side);
        if let Some(s2) = out.s2_side {
            acc.s2.add(&s2);
        }
        if out.mu_hat.is_finite() {
            let d = out.mu_actual - out.mu_hat;
            acc.sum_err_sq += d * d;
            acc.sum_err_4th += d * d * d * d;
            acc.sum_mu += out.mu_actual;
            if out.mu_clamped {
                acc.clamped += 1;
            }
        }
    }
    Ok(acc)
}

fn map_batches(
    params: &FrameParams,
    seed: u64,
    domain: u64,
    point: u64,
    first: u64,
    last: u64,
) -> Result<PointAccum> {
    let starts: Vec<u64> = (first..last).step_by(BATCH_FRAMES as usize).collect();
    #[cfg(feature = "parallel")]
    let partials: Result<Vec<PointAccum>> = {
        use rayon::prelude::*;
        starts
            .par_iter()
            .map(|&s| simulate_batch(params, seed, domain, point, s, (s + BATCH_FRAMES).min(last)))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Result<Vec<PointAccum>> = starts
        .iter()
        .map(|&s| simulate_batch(params, seed, domain, point, s, (s + BATCH_FRAMES).min(last)))
        .collect();
    let mut acc = PointAccum::default();
    for p in partials? {
        acc.merge(&p);
    }
    Ok(acc)
}

/// Runs frames in doubling rounds until every active detector collected the
/// required errors or the bit budget ran out. Round boundaries depend only
/// on accumulated counts, never on scheduling.
fn run_point_with_stop(
    params: &FrameParams,
    seed: u64,
    domain: u64,
    point: u64,
    active: &[Detector],
    stop: &StopRule,
) -> Result<PointAccum> {
    let bits_per_frame = params.info_bits_per_side();
    let max_frames = stop.max_bits.div_ceil(bits_per_frame).max(1);
    let mut acc = PointAccum::default();
    let mut done = 0u64;
    let mut round = INITIAL_ROUND;
    while done < max_frames {
        let this_round = round.min(max_frames - done);
        acc.merge(&map_batches(
            params,
            seed,
            domain,
            point,
            done,
            done + this_round,
        )?);
        done += this_round;
        let worst = active
            .iter()
            .map(|d| {
                let s1 = d.errors_of(&acc.s1);
                if params.decode_both {
                    s1.min(d.errors_of(&acc.s2))
                } else {
                    s1
                }
            })
            .min()
            .unwrap_or(u64::MAX);
        if worst >= stop.min_errors {
            break;
        }
        round = (round * 2).min(MAX_ROUND);
    }
    Ok(acc)
}

fn rows_for_point(
    cfg: &ExperimentConfig,
    experiment: &'static str,
    detector_suffix: &str,
    pw: &PowerProfile,
    noise: &NoiseModel,
    acc: &PointAccum,
) -> Vec<BerPoint> {
    let psi_db = 10.0 * pw.psi_s(noise).log10();
    let mut rows = Vec::new();
    let mut push = |detector: String, errors: u64| {
        rows.push(BerPoint {
            experiment,
            detector,
            psi_s_db: psi_db,
            lambda: pw.lambda(),
            n0: noise.n0(),
            p_s: pw.p_s(),
            p_r: pw.p_r(),
            bits: acc.bits,
            errors,
            ber: if acc.bits == 0 {
                0.0
            } else {
                errors as f64 / acc.bits as f64
            },
            ci95: binomial_ci95(errors, acc.bits),
            truncated: errors < cfg.stop_rule.min_errors,
        });
    };
    for d in &cfg.detectors {
        push(
            format!("{}{detector_suffix}", d.name()),
            d.errors_of(&acc.s1),
        );
    }
    if cfg.decode_both {
        for d in &cfg.detectors {
            push(
                format!("{}{detector_suffix}-s2", d.name()),
                d.errors_of(&acc.s2),
            );
        }
    }
    rows
}

fn sweep_with_rotation(
    cfg: &ExperimentConfig,
    rotation: f64,
    experiment: Experiment,
    detector_suffix: &str,
) -> Result<Vec<BerPoint>> {
    let pw = cfg.power_mode.profile(cfg.total_power)?;
    let const_s1 = Constellation::new(cfg.modulation_order, 0.0)?;
    let const_s2 = Constellation::new(cfg.modulation_order, rotation)?;
    let mut rows = Vec::new();
    for (idx, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
        let noise = NoiseModel::new(pw.p_s() / 10f64.powf(snr_db / 10.0))?;
        let params = FrameParams::new(
            const_s1.clone(),
            const_s2.clone(),
            cfg.frame_len,
            pw,
            noise,
            cfg.detector_set(),
            cfg.decode_both,
        );
        let acc = run_point_with_stop(
            &params,
            cfg.seed,
            experiment.domain(),
            idx as u64,
            &cfg.detectors,
            &cfg.stop_rule,
        )?;
        rows.extend(rows_for_point(
            cfg,
            experiment.name(),
            detector_suffix,
            &pw,
            &noise,
            &acc,
        ));
    }
    Ok(rows)
}

/// Monte Carlo BER against `psi_s = p_s/N0`, sweeping the noise level at
/// fixed powers, for every configured detector.
pub fn run_ber_sweep(cfg: &ExperimentConfig) -> Result<Vec<BerPoint>> {
    sweep_with_rotation(cfg, cfg.rotation, Experiment::BerSweep, "")
}

/// BER against the power ratio `lambda = p_s/p_r` under the total-power
/// constraint, one simulated curve per configured noise level with the
/// high-SNR prediction alongside.
pub fn run_lambda_sweep(cfg: &ExperimentConfig) -> Result<Vec<BerPoint>> {
    let const_s1 = Constellation::new(cfg.modulation_order, 0.0)?;
    let const_s2 = Constellation::new(cfg.modulation_order, cfg.rotation)?;
    let mut rows = Vec::new();
    for (i_n0, &n0) in cfg.n0_list.iter().enumerate() {
        let noise = NoiseModel::new(n0)?;
        for (i_l, &lambda) in cfg.lambda_grid.iter().enumerate() {
            let pw = PowerProfile::from_lambda(lambda, cfg.total_power)?;
            let point = (i_n0 * cfg.lambda_grid.len() + i_l) as u64;
            let params = FrameParams::new(
                const_s1.clone(),
                const_s2.clone(),
                cfg.frame_len,
                pw,
                noise,
                cfg.detector_set(),
                cfg.decode_both,
            );
            let acc = run_point_with_stop(
                &params,
                cfg.seed,
                Experiment::LambdaSweep.domain(),
                point,
                &cfg.detectors,
                &cfg.stop_rule,
            )?;
            rows.extend(rows_for_point(
                cfg,
                Experiment::LambdaSweep.name(),
                "",
                &pw,
                &noise,
                &acc,
            ));
            let input = AsymptoticBerInput::from_power(&pw, &noise);
            rows.push(BerPoint {
                experiment: Experiment::LambdaSweep.name(),
                detector: "asymptotic".into(),
                psi_s_db: 10.0 * input.psi_s().log10(),
                lambda,
                n0,
                p_s: pw.p_s(),
                p_r: pw.p_r(),
                bits: 0,
                errors: 0,
                ber: asymptotic_ber(&input),
                ci95: 0.0,
                truncated: false,
            });
        }
    }
    Ok(rows)
}

/// Normalized mean square error of the blind gain estimate per SNR point:
/// `mean((mu - mu_hat)^2) / mean(mu)` over a fixed number of frames.
///
/// Rows carry the frame count in `bits`, the number of zero-clamped frames
/// in `errors` and the MSE in `ber`.
pub fn run_mse_mu(cfg: &ExperimentConfig) -> Result<Vec<BerPoint>> {
    let pw = cfg.power_mode.profile(cfg.total_power)?;
    let const_s1 = Constellation::new(cfg.modulation_order, 0.0)?;
    let const_s2 = Constellation::new(cfg.modulation_order, cfg.rotation)?;
    let mut rows = Vec::new();
    for (idx, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
        let noise = NoiseModel::new(pw.p_s() / 10f64.powf(snr_db / 10.0))?;
        let params = FrameParams::new(
            const_s1.clone(),
            const_s2.clone(),
            cfg.frame_len,
            pw,
            noise,
            DetectorSet::NONE,
            false,
        );
        let acc = map_batches(
            &params,
            cfg.seed,
            Experiment::MseMu.domain(),
            idx as u64,
            0,
            cfg.mse_frames,
        )?;
        let n = acc.frames as f64;
        let mean_mu = acc.sum_mu / n;
        let mean_sq = acc.sum_err_sq / n;
        let mse = mean_sq / mean_mu;
        let var_sq = (acc.sum_err_4th / n - mean_sq * mean_sq).max(0.0);
        rows.push(BerPoint {
            experiment: Experiment::MseMu.name(),
            detector: "mu-mse".into(),
            psi_s_db: snr_db,
            lambda: pw.lambda(),
            n0: noise.n0(),
            p_s: pw.p_s(),
            p_r: pw.p_r(),
            bits: acc.frames,
            errors: acc.clamped,
            ber: mse,
            ci95: 1.96 * (var_sq / n).sqrt() / mean_mu,
            truncated: false,
        });
    }
    Ok(rows)
}

/// The same BER sweep with and without the quarter-symbol rotation of S2's
/// alphabet, on shared random substreams so the two curves differ only
/// through the constellation.
pub fn run_rotation_compare(cfg: &ExperimentConfig) -> Result<Vec<BerPoint>> {
    let rotation = if cfg.rotation != 0.0 {
        cfg.rotation
    } else {
        std::f64::consts::PI / cfg.modulation_order as f64
    };
    let mut rows = sweep_with_rotation(cfg, 0.0, Experiment::RotationCompare, "")?;
    rows.extend(sweep_with_rotation(
        cfg,
        rotation,
        Experiment::RotationCompare,
        "-rotated",
    )?);
    Ok(rows)
}

/// Analytic table over the configured SNR grid: closed-form high-SNR BER,
/// the numeric BER integral, and the optimal power split, no simulation.
pub fn emit_analytic(cfg: &ExperimentConfig) -> Result<Vec<BerPoint>> {
    let pw = cfg.power_mode.profile(cfg.total_power)?;
    let (opt_s, opt_r) = optimal_power(cfg.total_power)?;
    let mut rows = Vec::new();
    for &snr_db in &cfg.snr_grid_db {
        let psi_s = 10f64.powf(snr_db / 10.0);
        let n0 = pw.p_s() / psi_s;
        let input = AsymptoticBerInput::new(pw.lambda(), psi_s)?;
        let mut push = |detector: &str, ber: f64, p_s: f64, p_r: f64, lambda: f64| {
            rows.push(BerPoint {
                experiment: Experiment::Analytic.name(),
                detector: detector.into(),
                psi_s_db: snr_db,
                lambda,
                n0,
                p_s,
                p_r,
                bits: 0,
                errors: 0,
                ber,
                ci95: 0.0,
                truncated: false,
            });
        };
        push(
            "asymptotic",
            asymptotic_ber(&input),
            pw.p_s(),
            pw.p_r(),
            pw.lambda(),
        );
        push(
            "numeric",
            ber_numeric(&input)?,
            pw.p_s(),
            pw.p_r(),
            pw.lambda(),
        );
        // the optimum under the same psi_s axis
        let opt_input = AsymptoticBerInput::new(0.5, psi_s)?;
        push(
            "optimal-power",
            asymptotic_ber(&opt_input),
            opt_s,
            opt_r,
            0.5,
        );
    }
    Ok(rows)
}

/// Dispatches on the configured experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<BerPoint>> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::BerSweep => run_ber_sweep(cfg),
        Experiment::LambdaSweep => run_lambda_sweep(cfg),
        Experiment::MseMu => run_mse_mu(cfg),
        Experiment::RotationCompare => run_rotation_compare(cfg),
        Experiment::Analytic => emit_analytic(cfg),
    }
}

/// Pinned CSV header.
pub const CSV_HEADER: &str =
    "experiment,detector,psi_s_db,lambda,n0,p_s,p_r,bits,errors,ber,ci95,truncated";

fn fmt_float(x: f64) -> String {
    // nine significant digits
    format!("{x:.8e}")
}

/// Renders rows as CSV, one line per (point, detector).
pub fn to_csv(points: &[BerPoint]) -> String {
    let mut out = String::with_capacity(64 * (points.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            p.experiment,
            p.detector,
            fmt_float(p.psi_s_db),
            fmt_float(p.lambda),
            fmt_float(p.n0),
            fmt_float(p.p_s),
            fmt_float(p.p_r),
            p.bits,
            p.errors,
            fmt_float(p.ber),
            fmt_float(p.ci95),
            u8::from(p.truncated),
        ));
    }
    out
}

/// SNR (dB) at which a detector's curve crosses `target_ber`, by log-linear
/// interpolation between bracketing grid points.
pub fn snr_at_ber(points: &[BerPoint], detector: &str, target_ber: f64) -> Option<f64> {
    let mut curve: Vec<&BerPoint> = points
        .iter()
        .filter(|p| p.detector == detector && p.ber > 0.0)
        .collect();
    curve.sort_by(|a, b| a.psi_s_db.partial_cmp(&b.psi_s_db).expect("finite SNRs"));
    for w in curve.windows(2) {
        let (a, b) = (w[0], w[1]);
        if (a.ber >= target_ber && b.ber <= target_ber)
            || (a.ber <= target_ber && b.ber >= target_ber)
        {
            let t = (target_ber.ln() - a.ber.ln()) / (b.ber.ln() - a.ber.ln());
            return Some(a.psi_s_db + t * (b.psi_s_db - a.psi_s_db));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg() -> ExperimentConfig {
        ExperimentConfig {
            snr_grid_db: vec![10.0, 14.0],
            stop_rule: StopRule {
                min_errors: 50,
                max_bits: 200_000,
            },
            seed: 11,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn sweep_emits_one_row_per_point_and_detector() {
        let cfg = tiny_cfg();
        let rows = run_ber_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 2 * 3);
        for r in &rows {
            assert_eq!(r.experiment, "ber-sweep");
            assert!(r.errors <= r.bits);
            assert!(r.ber >= 0.0 && r.ber <= 1.0);
        }
    }

    #[test]
    fn stop_rule_reaches_min_errors_or_flags_truncation() {
        let cfg = tiny_cfg();
        for r in run_ber_sweep(&cfg).unwrap() {
            if r.truncated {
                // only the exhausted bit budget may cut a point short
                assert!(r.errors < cfg.stop_rule.min_errors);
                assert!(r.bits >= cfg.stop_rule.max_bits);
            } else {
                assert!(r.errors >= cfg.stop_rule.min_errors);
            }
        }
    }

    #[test]
    fn ber_monotone_in_snr_within_ci() {
        let cfg = ExperimentConfig {
            snr_grid_db: vec![5.0, 10.0, 15.0, 20.0],
            stop_rule: StopRule {
                min_errors: 300,
                max_bits: 2_000_000,
            },
            detectors: vec![Detector::Differential],
            seed: 12,
            ..ExperimentConfig::default()
        };
        let rows = run_ber_sweep(&cfg).unwrap();
        for w in rows.windows(2) {
            assert!(
                w[1].ber <= w[0].ber + w[0].ci95 + w[1].ci95,
                "BER not monotone: {} -> {}",
                w[0].ber,
                w[1].ber
            );
        }
    }

    #[test]
    fn decode_both_sides_agree_within_ci() {
        let cfg = ExperimentConfig {
            snr_grid_db: vec![12.0],
            stop_rule: StopRule {
                min_errors: 400,
                max_bits: 2_000_000,
            },
            detectors: vec![Detector::Differential],
            decode_both: true,
            seed: 13,
            ..ExperimentConfig::default()
        };
        let rows = run_ber_sweep(&cfg).unwrap();
        let s1 = rows.iter().find(|r| r.detector == "differential").unwrap();
        let s2 = rows
            .iter()
            .find(|r| r.detector == "differential-s2")
            .unwrap();
        assert!(
            (s1.ber - s2.ber).abs() <= s1.ci95 + s2.ci95,
            "sides disagree: {} vs {}",
            s1.ber,
            s2.ber
        );
    }

    #[test]
    fn csv_shape_and_header() {
        let cfg = tiny_cfg();
        let rows = run_ber_sweep(&cfg).unwrap();
        let csv = to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let first = lines.next().unwrap();
        assert_eq!(first.split(',').count(), 12);
        assert_eq!(csv.lines().count(), rows.len() + 1);
    }

    #[test]
    fn identical_seed_reproduces_csv() {
        let cfg = tiny_cfg();
        let a = to_csv(&run_ber_sweep(&cfg).unwrap());
        let b = to_csv(&run_ber_sweep(&cfg).unwrap());
        assert_eq!(a, b);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn worker_count_does_not_change_output() {
        let cfg = tiny_cfg();
        let with_pool = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("pool")
                .install(|| to_csv(&run_ber_sweep(&cfg).unwrap()))
        };
        assert_eq!(with_pool(1), with_pool(3));
    }

    #[test]
    fn lambda_sweep_has_asymptotic_overlay() {
        let cfg = ExperimentConfig {
            experiment: Experiment::LambdaSweep,
            detectors: vec![Detector::Differential],
            lambda_grid: vec![0.5, 1.0],
            n0_list: vec![0.02],
            stop_rule: StopRule {
                min_errors: 50,
                max_bits: 100_000,
            },
            ..ExperimentConfig::default()
        };
        let rows = run_lambda_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().any(|r| r.detector == "asymptotic"));
        let asym: Vec<_> = rows.iter().filter(|r| r.detector == "asymptotic").collect();
        // psi_s follows lambda p / ((2 lambda + 1) N0)
        for r in asym {
            let expected = r.lambda * cfg.total_power / ((2.0 * r.lambda + 1.0) * r.n0);
            assert!((r.psi_s_db - 10.0 * expected.log10()).abs() < 1e-9);
        }
    }

    #[test]
    fn mse_rows_decrease_with_snr() {
        let cfg = ExperimentConfig {
            experiment: Experiment::MseMu,
            snr_grid_db: vec![5.0, 15.0, 25.0],
            mse_frames: 2_000,
            seed: 14,
            ..ExperimentConfig::default()
        };
        let rows = run_mse_mu(&cfg).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[1].ber < rows[0].ber);
        assert!(rows[2].ber < rows[1].ber);
    }

    #[test]
    fn longer_frames_sharpen_the_estimate() {
        // the block estimator's sampling error scales with 1/L, which is
        // what bounds the MSE once noise stops dominating
        let mse_for = |frame_len: usize| {
            let cfg = ExperimentConfig {
                experiment: Experiment::MseMu,
                snr_grid_db: vec![20.0],
                mse_frames: 1_500,
                frame_len,
                seed: 15,
                ..ExperimentConfig::default()
            };
            run_mse_mu(&cfg).unwrap()[0].ber
        };
        let short = mse_for(100);
        let long = mse_for(1000);
        assert!(long < short / 2.0, "L=1000 MSE {long} vs L=100 {short}");
    }

    #[test]
    fn analytic_table_contains_power_optimum() {
        let cfg = ExperimentConfig {
            experiment: Experiment::Analytic,
            snr_grid_db: vec![20.0, 30.0],
            ..ExperimentConfig::default()
        };
        let rows = emit_analytic(&cfg).unwrap();
        let opt: Vec<_> = rows
            .iter()
            .filter(|r| r.detector == "optimal-power")
            .collect();
        assert!(!opt.is_empty());
        for r in &opt {
            assert!((r.p_s - 0.75).abs() < 1e-12);
            assert!((r.p_r - 1.5).abs() < 1e-12);
        }
        // numeric sits above the asymptote and approaches it
        let at = |det: &str, snr: f64| {
            rows.iter()
                .find(|r| r.detector == det && (r.psi_s_db - snr).abs() < 1e-9)
                .unwrap()
                .ber
        };
        assert!(at("numeric", 20.0) >= at("asymptotic", 20.0));
        let gap20 = at("numeric", 20.0) / at("asymptotic", 20.0);
        let gap30 = at("numeric", 30.0) / at("asymptotic", 30.0);
        assert!(gap30 < gap20);
    }

    #[test]
    fn snr_interpolation_crosses_target() {
        let mk = |snr: f64, ber: f64| BerPoint {
            experiment: "ber-sweep",
            detector: "differential".into(),
            psi_s_db: snr,
            lambda: 1.0,
            n0: 0.01,
            p_s: 1.0,
            p_r: 1.0,
            bits: 1000,
            errors: (ber * 1000.0) as u64,
            ber,
            ci95: 0.0,
            truncated: false,
        };
        let pts = vec![mk(10.0, 1e-1), mk(20.0, 1e-3)];
        let snr = snr_at_ber(&pts, "differential", 1e-2).unwrap();
        assert!((snr - 15.0).abs() < 1e-9, "got {snr}");
        assert!(snr_at_ber(&pts, "differential", 1e-5).is_none());
    }

    #[test]
    fn validation_catches_bad_configs() {
        let bad = [
            ExperimentConfig {
                modulation_order: 3,
                ..ExperimentConfig::default()
            },
            ExperimentConfig {
                snr_grid_db: vec![10.0, 10.0],
                ..ExperimentConfig::default()
            },
            ExperimentConfig {
                frame_len: 1,
                ..ExperimentConfig::default()
            },
            ExperimentConfig {
                detectors: vec![],
                ..ExperimentConfig::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }
}
