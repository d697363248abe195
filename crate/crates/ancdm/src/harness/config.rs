//! Flat key-value experiment configuration.
//!
//! One `key = value` pair per line, `#` starts a comment, every key is
//! optional, unknown keys are rejected. Lists are comma separated.

use super::{Detector, Experiment, ExperimentConfig, PowerMode};
use crate::{Error, Result};

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for {key}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|v| parse_num(key, v.trim()))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("invalid value '{value}' for {key}"))),
    }
}

/// Parses configuration text into an [`ExperimentConfig`] over the defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut custom_ps: Option<f64> = None;
    let mut custom_pr: Option<f64> = None;
    let mut total_set = false;
    let mut mode_key: Option<String> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "experiment" => cfg.experiment = Experiment::parse(value)?,
            "detectors" => {
                cfg.detectors = value
                    .split(',')
                    .map(|d| Detector::parse(d.trim()))
                    .collect::<Result<_>>()?;
            }
            "modulation_order" => cfg.modulation_order = parse_num(key, value)?,
            "rotation" => cfg.rotation = parse_num(key, value)?,
            "frame_length" => cfg.frame_len = parse_num(key, value)?,
            "power_mode" => mode_key = Some(value.to_string()),
            "p_s" => custom_ps = Some(parse_num(key, value)?),
            "p_r" => custom_pr = Some(parse_num(key, value)?),
            "total_power" => {
                cfg.total_power = parse_num(key, value)?;
                total_set = true;
            }
            "snr_grid_db" => cfg.snr_grid_db = parse_list(key, value)?,
            "min_errors" => cfg.stop_rule.min_errors = parse_num(key, value)?,
            "max_bits" => cfg.stop_rule.max_bits = parse_num(key, value)?,
            "seed" => cfg.seed = parse_num(key, value)?,
            "lambda_grid" => cfg.lambda_grid = parse_list(key, value)?,
            "n0_list" => cfg.n0_list = parse_list(key, value)?,
            "mse_frames" => cfg.mse_frames = parse_num(key, value)?,
            "decode_both" => cfg.decode_both = parse_bool(key, value)?,
            other => {
                return Err(Error::Config(format!(
                    "line {}: unknown key '{other}'",
                    lineno + 1
                )))
            }
        }
    }

    match mode_key.as_deref() {
        None | Some("equal") => {
            if custom_ps.is_some() || custom_pr.is_some() {
                return Err(Error::Config(
                    "p_s/p_r are only valid with power_mode = custom".into(),
                ));
            }
        }
        Some("optimal") => {
            if custom_ps.is_some() || custom_pr.is_some() {
                return Err(Error::Config(
                    "p_s/p_r are only valid with power_mode = custom".into(),
                ));
            }
            cfg.power_mode = PowerMode::Optimal;
        }
        Some("custom") => {
            let (p_s, p_r) = match (custom_ps, custom_pr) {
                (Some(s), Some(r)) => (s, r),
                _ => {
                    return Err(Error::Config(
                        "power_mode = custom requires both p_s and p_r".into(),
                    ))
                }
            };
            let implied = 2.0 * p_s + p_r;
            if total_set && (implied - cfg.total_power).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "total_power {} conflicts with 2*p_s + p_r = {implied}",
                    cfg.total_power
                )));
            }
            cfg.total_power = implied;
            cfg.power_mode = PowerMode::Custom { p_s, p_r };
        }
        Some(other) => {
            return Err(Error::Config(format!("unknown power_mode '{other}'")));
        }
    }

    cfg.validate()?;
    Ok(cfg)
}
