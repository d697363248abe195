//! Browser bindings for the two-way relay differential-modulation simulator.
//!
//! Exposes the analytic BER curves, the power-ratio sweep, the destination
//! SNR density and a live Monte Carlo run to a static page. Results are JSON
//! strings, plotted in plain JavaScript.
//!
//! The `*_impl` functions are ordinary Rust (unit-testable on any target);
//! the `#[wasm_bindgen]` wrappers only translate errors for JavaScript.

use wasm_bindgen::prelude::*;

use ancdm::analysis::{
    asymptotic_ber, ber_numeric, optimal_power, AsymptoticBerInput, SnrDistribution,
};
use ancdm::harness::{run_ber_sweep, Detector, ExperimentConfig, PowerMode, StopRule};
use ancdm::{Error, Result};

fn json_numbers(xs: &[f64]) -> String {
    let items: Vec<String> = xs
        .iter()
        .map(|x| {
            if x.is_finite() {
                format!("{x:.9e}")
            } else {
                "null".to_string()
            }
        })
        .collect();
    format!("[{}]", items.join(","))
}

fn ber_curves_impl(
    lambda: f64,
    snr_min_db: f64,
    snr_max_db: f64,
    points: usize,
) -> Result<String> {
    let n = points.clamp(2, 512);
    let mut snr = Vec::with_capacity(n);
    let mut asym = Vec::with_capacity(n);
    let mut numeric = Vec::with_capacity(n);
    for k in 0..n {
        let db = snr_min_db + (snr_max_db - snr_min_db) * k as f64 / (n - 1) as f64;
        let input = AsymptoticBerInput::new(lambda, 10f64.powf(db / 10.0))?;
        snr.push(db);
        asym.push(asymptotic_ber(&input));
        numeric.push(ber_numeric(&input)?);
    }
    Ok(format!(
        "{{\"snr_db\":{},\"asymptotic\":{},\"numeric\":{}}}",
        json_numbers(&snr),
        json_numbers(&asym),
        json_numbers(&numeric)
    ))
}

fn lambda_curve_impl(n0: f64, total_power: f64, points: usize) -> Result<String> {
    let n = points.clamp(2, 512);
    let (lo, hi) = (0.05f64, 20.0f64);
    let mut lambdas = Vec::with_capacity(n);
    let mut bers = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = lo * (hi / lo).powf(k as f64 / (n - 1) as f64);
        let input = AsymptoticBerInput::from_constraint(lambda, total_power, n0)?;
        lambdas.push(lambda);
        bers.push(asymptotic_ber(&input));
    }
    let (p_s, p_r) = optimal_power(total_power)?;
    Ok(format!(
        "{{\"lambda\":{},\"ber\":{},\"optimal_lambda\":0.5,\"p_s\":{p_s:.9e},\"p_r\":{p_r:.9e}}}",
        json_numbers(&lambdas),
        json_numbers(&bers)
    ))
}

fn snr_density_impl(lambda: f64, psi_s_db: f64, points: usize) -> Result<String> {
    let n = points.clamp(2, 1024);
    let input = AsymptoticBerInput::new(lambda, 10f64.powf(psi_s_db / 10.0))?;
    let dist = SnrDistribution::new(input)?;
    // span: past the 99th percentile of the exponential envelope
    let span = 5.0 / dist.approx_pdf(0.0);
    let mut xs = Vec::with_capacity(n);
    let mut pdf = Vec::with_capacity(n);
    let mut approx = Vec::with_capacity(n);
    for k in 0..n {
        let x = span * k as f64 / (n - 1) as f64;
        xs.push(x);
        pdf.push(dist.pdf(x)?);
        approx.push(dist.approx_pdf(x));
    }
    Ok(format!(
        "{{\"x\":{},\"pdf\":{},\"approx\":{}}}",
        json_numbers(&xs),
        json_numbers(&pdf),
        json_numbers(&approx)
    ))
}

fn simulate_ber_impl(
    power_mode: &str,
    snr_min_db: f64,
    snr_max_db: f64,
    points: usize,
    seed: u64,
    max_bits_per_point: u64,
) -> Result<String> {
    let n = points.clamp(1, 32);
    let mode = match power_mode {
        "equal" => PowerMode::Equal,
        "optimal" => PowerMode::Optimal,
        other => match other
            .strip_prefix("custom:")
            .and_then(|l| l.parse::<f64>().ok())
        {
            Some(lambda) if lambda > 0.0 => {
                let p_r = 3.0 / (2.0 * lambda + 1.0);
                PowerMode::Custom {
                    p_s: lambda * p_r,
                    p_r,
                }
            }
            _ => {
                return Err(Error::Config(format!(
                    "bad power_mode '{power_mode}'"
                )))
            }
        },
    };
    let grid: Vec<f64> = (0..n)
        .map(|k| {
            if n == 1 {
                snr_min_db
            } else {
                snr_min_db + (snr_max_db - snr_min_db) * k as f64 / (n - 1) as f64
            }
        })
        .collect();
    let cfg = ExperimentConfig {
        detectors: Detector::ALL.to_vec(),
        power_mode: mode,
        snr_grid_db: grid.clone(),
        stop_rule: StopRule {
            min_errors: 200,
            max_bits: max_bits_per_point.clamp(10_000, 20_000_000),
        },
        seed,
        ..ExperimentConfig::default()
    };
    let rows = run_ber_sweep(&cfg)?;
    let series = |name: &str| -> Vec<f64> {
        rows.iter()
            .filter(|r| r.detector == name)
            .map(|r| r.ber)
            .collect()
    };
    Ok(format!(
        "{{\"snr_db\":{},\"differential\":{},\"genie\":{},\"coherent\":{}}}",
        json_numbers(&grid),
        json_numbers(&series("differential")),
        json_numbers(&series("genie")),
        json_numbers(&series("coherent"))
    ))
}

fn err_to_js(e: Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Asymptotic and numeric BER over an SNR grid at a fixed power ratio.
///
/// Returns `{"snr_db":[...],"asymptotic":[...],"numeric":[...]}`.
#[wasm_bindgen]
pub fn ber_curves(
    lambda: f64,
    snr_min_db: f64,
    snr_max_db: f64,
    points: usize,
) -> std::result::Result<String, JsValue> {
    ber_curves_impl(lambda, snr_min_db, snr_max_db, points).map_err(err_to_js)
}

/// Asymptotic BER against the source/relay power ratio under the budget
/// `2*p_s + p_r = p`, plus the closed-form optimum.
#[wasm_bindgen]
pub fn lambda_curve(
    n0: f64,
    total_power: f64,
    points: usize,
) -> std::result::Result<String, JsValue> {
    lambda_curve_impl(n0, total_power, points).map_err(err_to_js)
}

/// Density of the differential destination SNR at one operating point,
/// with the exponential high-SNR form alongside.
#[wasm_bindgen]
pub fn snr_density(
    lambda: f64,
    psi_s_db: f64,
    points: usize,
) -> std::result::Result<String, JsValue> {
    snr_density_impl(lambda, psi_s_db, points).map_err(err_to_js)
}

/// Live Monte Carlo BER at the given SNR points for all three detectors,
/// with budgets small enough for a browser. `power_mode` is `"equal"`,
/// `"optimal"` or `"custom:<lambda>"`.
#[wasm_bindgen]
pub fn simulate_ber(
    power_mode: &str,
    snr_min_db: f64,
    snr_max_db: f64,
    points: usize,
    seed: u64,
    max_bits_per_point: u64,
) -> std::result::Result<String, JsValue> {
    simulate_ber_impl(
        power_mode,
        snr_min_db,
        snr_max_db,
        points,
        seed,
        max_bits_per_point,
    )
    .map_err(err_to_js)
}
