//! Scenario file ingestion and emission.
//!
//! The format is flat `key = value` text with `#` comments, one scenario
//! per file, strict SI units (pascal, kelvin, m², m, m⁻¹) plus eV for the
//! photoelectron energy. Unknown keys, duplicate keys, missing required
//! fields, and nonpositive quantities are rejected with the field name and
//! line number.

use std::collections::HashMap;
use std::path::Path;

use decotrace_core::constants::EV_J;
use decotrace_core::{Recoil, Scenario};

use crate::error::{CliError, Result};
use crate::format::fmt_num;

const KNOWN_KEYS: &[&str] = &[
    "label",
    "pressure_pa",
    "temperature_k",
    "cross_section_m2",
    "length_m",
    "photoelectron_ev",
    "sigma_q2_m2",
    "n_interactions",
    "sigma_p_per_m",
    "sigma_c_per_m",
];

/// Reads and validates a scenario file.
pub fn parse_scenario_file(path: &Path) -> Result<Scenario<f64>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario_str(&text, &path.display().to_string())
}

/// Parses scenario text; `file` names the source in diagnostics.
pub fn parse_scenario_str(text: &str, file: &str) -> Result<Scenario<f64>> {
    let err = |line: usize, message: String| CliError::Parse {
        file: file.to_string(),
        line,
        message,
    };

    let mut fields: HashMap<&str, (usize, String)> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, "expected `key = value`".into()))?;
        let key = key.trim();
        let value = value.trim();
        let canonical = KNOWN_KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| err(line_no, format!("unknown key \"{key}\"")))?;
        if value.is_empty() {
            return Err(err(line_no, format!("empty value for \"{key}\"")));
        }
        if fields.insert(canonical, (line_no, value.to_string())).is_some() {
            return Err(err(line_no, format!("duplicate key \"{key}\"")));
        }
    }

    let number = |key: &str| -> Result<Option<(usize, f64)>> {
        match fields.get(key) {
            None => Ok(None),
            Some((line, value)) => {
                let x: f64 = value
                    .parse()
                    .map_err(|_| err(*line, format!("field \"{key}\": invalid number \"{value}\"")))?;
                if !x.is_finite() {
                    return Err(err(*line, format!("field \"{key}\" must be finite")));
                }
                Ok(Some((*line, x)))
            }
        }
    };
    let positive = |key: &str| -> Result<Option<f64>> {
        match number(key)? {
            None => Ok(None),
            Some((line, x)) => {
                if x <= 0.0 {
                    return Err(err(line, format!("field \"{key}\" must be positive, got {x}")));
                }
                Ok(Some(x))
            }
        }
    };
    let nonnegative = |key: &str| -> Result<Option<f64>> {
        match number(key)? {
            None => Ok(None),
            Some((line, x)) => {
                if x < 0.0 {
                    return Err(err(line, format!("field \"{key}\" must be >= 0, got {x}")));
                }
                Ok(Some(x))
            }
        }
    };
    let required = |key: &str, value: Option<f64>| -> Result<f64> {
        value.ok_or_else(|| err(0, format!("missing required field \"{key}\"")))
    };

    let label = fields
        .get("label")
        .map(|(_, v)| v.clone())
        .ok_or_else(|| err(0, "missing required field \"label\"".into()))?;

    let pressure = positive("pressure_pa")?;
    let temperature = positive("temperature_k")?.unwrap_or(300.0);
    let cross_section = positive("cross_section_m2")?;
    let path_length = positive("length_m")?;
    let interaction_count = nonnegative("n_interactions")?;
    let sigma_p = required("sigma_p_per_m", positive("sigma_p_per_m")?)?;
    let sigma_c = required("sigma_c_per_m", positive("sigma_c_per_m")?)?;

    let energy_ev = nonnegative("photoelectron_ev")?;
    let sigma_q2 = positive("sigma_q2_m2")?;
    let recoil = match (energy_ev, sigma_q2) {
        (Some(ev), None) => Recoil::PhotoelectronEnergy(ev * EV_J),
        (None, Some(s2)) => Recoil::SigmaQ2(s2),
        (Some(_), Some(_)) => {
            return Err(err(
                0,
                "fields \"photoelectron_ev\" and \"sigma_q2_m2\" are mutually exclusive".into(),
            ))
        }
        (None, None) => {
            return Err(err(
                0,
                "need exactly one of \"photoelectron_ev\" or \"sigma_q2_m2\"".into(),
            ))
        }
    };

    if interaction_count.is_none() {
        for (key, value) in [
            ("pressure_pa", pressure),
            ("cross_section_m2", cross_section),
            ("length_m", path_length),
        ] {
            if value.is_none() {
                return Err(err(
                    0,
                    format!("missing required field \"{key}\" (or provide \"n_interactions\")"),
                ));
            }
        }
    }

    let scenario = Scenario {
        label,
        pressure,
        temperature,
        cross_section,
        path_length,
        interaction_count,
        recoil,
        sigma_p,
        sigma_c,
    };
    scenario
        .validate()
        .map_err(|e| err(0, format!("invalid scenario: {e}")))?;
    Ok(scenario)
}

/// Serializes a scenario in the file format; `parse_scenario_str` of the
/// output reproduces the scenario.
pub fn serialize_scenario(s: &Scenario<f64>) -> String {
    let mut out = String::new();
    let mut push = |key: &str, value: String| {
        out.push_str(key);
        out.push_str(" = ");
        out.push_str(&value);
        out.push('\n');
    };
    push("label", s.label.clone());
    if let Some(p) = s.pressure {
        push("pressure_pa", fmt_num(p));
    }
    push("temperature_k", fmt_num(s.temperature));
    if let Some(cs) = s.cross_section {
        push("cross_section_m2", fmt_num(cs));
    }
    if let Some(l) = s.path_length {
        push("length_m", fmt_num(l));
    }
    if let Some(n) = s.interaction_count {
        push("n_interactions", fmt_num(n));
    }
    match s.recoil {
        Recoil::PhotoelectronEnergy(joules) => {
            push("photoelectron_ev", fmt_num(ev_for_joules(joules)));
        }
        Recoil::SigmaQ2(s2) => push("sigma_q2_m2", fmt_num(s2)),
    }
    push("sigma_p_per_m", fmt_num(s.sigma_p));
    push("sigma_c_per_m", fmt_num(s.sigma_c));
    out
}

/// Electronvolt value whose parse (multiplication by `EV_J`) recovers the
/// stored joule value bit-exactly when such a value exists; plain division
/// otherwise.
fn ev_for_joules(joules: f64) -> f64 {
    let guess = joules / EV_J;
    for candidate in [
        guess,
        f64::from_bits(guess.to_bits().wrapping_sub(1)),
        f64::from_bits(guess.to_bits().wrapping_add(1)),
    ] {
        if candidate * EV_J == joules {
            return candidate;
        }
    }
    guess
}
