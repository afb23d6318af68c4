//! Key-value configuration files.
//!
//! ```text
//! # underdamped reference run
//! lambda = 0.2
//! mu = 0.1
//! temp.C = 3
//! init.delta = 4
//! ```
//!
//! Keys: `m`, `omega`, `lambda`, `mu`, `hbar`, `temp.C` or `temp.T`,
//! `init.delta`, `init.r`, `init.q0`, `init.p0`, `closed`. `temp.T` is the
//! thermal energy `kT` in the units of `ħω`. Everything after `#` is a
//! comment. `m`, `omega` and `hbar` default to 1, `mu`, `init.r`, `init.q0`
//! and `init.p0` to 0, `init.delta` to 1 and the temperature to zero;
//! `lambda` must be given unless `closed = true`.

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::model::{InitialStateSpec, OscillatorConfig, TemperatureSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TempInput {
    Coth(f64),
    ThermalEnergy(f64),
}

/// Parsed but not yet validated configuration; command-line overrides are
/// applied to this before [`RawConfig::build`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawConfig {
    pub m: Option<f64>,
    pub omega: Option<f64>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub hbar: Option<f64>,
    pub temp: Option<TempInput>,
    pub delta: Option<f64>,
    pub r: Option<f64>,
    pub q0: Option<f64>,
    pub p0: Option<f64>,
    pub closed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub oscillator: OscillatorConfig,
    pub initial: InitialStateSpec,
}

fn cfg_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Config {
        line,
        reason: reason.into(),
    }
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let n = idx + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| cfg_err(n, format!("expected `key = value`, got `{body}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let canonical = if key == "temp.T" { "temp.C" } else { key };
            if seen.contains(&canonical) {
                return Err(cfg_err(n, format!("duplicate key `{key}`")));
            }
            if key == "closed" {
                raw.closed = match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(cfg_err(n, format!("`closed` must be true or false, got `{value}`"))),
                };
                seen.push("closed");
                continue;
            }
            let x: f64 = value
                .parse()
                .map_err(|_| cfg_err(n, format!("`{key}`: not a number: `{value}`")))?;
            if !x.is_finite() {
                return Err(cfg_err(n, format!("`{key}` must be finite")));
            }
            let slot = match key {
                "m" => &mut raw.m,
                "omega" => &mut raw.omega,
                "lambda" => &mut raw.lambda,
                "mu" => &mut raw.mu,
                "hbar" => &mut raw.hbar,
                "init.delta" => &mut raw.delta,
                "init.r" => &mut raw.r,
                "init.q0" => &mut raw.q0,
                "init.p0" => &mut raw.p0,
                "temp.C" => {
                    raw.temp = Some(TempInput::Coth(x));
                    seen.push(canonical);
                    continue;
                }
                "temp.T" => {
                    raw.temp = Some(TempInput::ThermalEnergy(x));
                    seen.push(canonical);
                    continue;
                }
                _ => return Err(cfg_err(n, format!("unknown key `{key}`"))),
            };
            *slot = Some(x);
            seen.push(canonical);
        }
        Ok(raw)
    }

    pub fn build(&self) -> Result<RunConfig> {
        let m = self.m.unwrap_or(1.0);
        let omega = self.omega.unwrap_or(1.0);
        let hbar = self.hbar.unwrap_or(1.0);
        let temp = match self.temp {
            None => TemperatureSpec::ZERO,
            Some(TempInput::Coth(c)) => TemperatureSpec::from_coth(c)?,
            Some(TempInput::ThermalEnergy(kt)) => TemperatureSpec::from_thermal_energy(kt, hbar, omega)?,
        };
        let oscillator = if self.closed {
            if self.lambda.unwrap_or(0.0) != 0.0 || self.mu.unwrap_or(0.0) != 0.0 {
                return Err(Error::param("closed", "closed system requires lambda = mu = 0"));
            }
            OscillatorConfig {
                temp,
                ..OscillatorConfig::closed(m, omega, hbar)?
            }
        } else {
            let lambda = self
                .lambda
                .ok_or_else(|| Error::param("lambda", "missing (set `closed = true` for a closed system)"))?;
            OscillatorConfig::new(m, omega, lambda, self.mu.unwrap_or(0.0), hbar, temp)?
        };
        let initial = InitialStateSpec::new(
            self.delta.unwrap_or(1.0),
            self.r.unwrap_or(0.0),
            self.q0.unwrap_or(0.0),
            self.p0.unwrap_or(0.0),
        )?;
        Ok(RunConfig { oscillator, initial })
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        RawConfig::parse(text)?.build()
    }

    /// Canonical text form; parses back to the same configuration.
    pub fn to_text(&self) -> String {
        let c = &self.oscillator;
        let i = &self.initial;
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        if c.closed {
            line("closed", "true".into());
        }
        for (k, v) in [
            ("m", c.m),
            ("omega", c.omega),
            ("lambda", c.lambda),
            ("mu", c.mu),
            ("hbar", c.hbar),
        ] {
            line(k, fmt_f64(v));
        }
        line("temp.C", fmt_f64(c.coth()));
        for (k, v) in [
            ("init.delta", i.delta),
            ("init.r", i.r),
            ("init.q0", i.q0),
            ("init.p0", i.p0),
        ] {
            line(k, fmt_f64(v));
        }
        out
    }
}
