//! Parameter sweeps over the configured base point.

use std::path::Path;

use anyhow::{bail, Context};
use rayon::prelude::*;

use lindho::classicality::{delta_cc, delta_qd};
use lindho::config::{RawConfig, TempInput};
use lindho::decoherence::decoherence_time;
use lindho::io::{csv_row, fmt_f64};
use lindho::model::{initial_state, thermal_coefficients};
use lindho::propagate::covariance_lyapunov;

use crate::ParamArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisName {
    Lambda,
    Mu,
    Delta,
    R,
    C,
    T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: AxisName,
    pub label: &'static str,
    pub values: Vec<f64>,
}

impl Axis {
    /// Parses `name:min:max:count[:lin|log]`.
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if !(4..=5).contains(&parts.len()) {
            bail!("axis `{text}`: expected name:min:max:count[:lin|log]");
        }
        let (name, label) = match parts[0] {
            "lambda" => (AxisName::Lambda, "lambda"),
            "mu" => (AxisName::Mu, "mu"),
            "delta" => (AxisName::Delta, "delta"),
            "r" => (AxisName::R, "r"),
            "C" => (AxisName::C, "C"),
            "t" => (AxisName::T, "t"),
            other => bail!("unknown sweep axis `{other}` (lambda, mu, delta, r, C, t)"),
        };
        let num = |s: &str| {
            s.parse::<f64>()
                .with_context(|| format!("axis `{text}`: bad number `{s}`"))
        };
        let (lo, hi) = (num(parts[1])?, num(parts[2])?);
        let count: usize = parts[3]
            .parse()
            .with_context(|| format!("axis `{text}`: bad count `{}`", parts[3]))?;
        let log = match parts.get(4) {
            None | Some(&"lin") => false,
            Some(&"log") => true,
            Some(other) => bail!("axis `{text}`: spacing must be lin or log, got `{other}`"),
        };
        if count < 1 {
            bail!("axis `{text}`: count must be >= 1");
        }
        if !lo.is_finite() || !hi.is_finite() {
            bail!("axis `{text}`: bounds must be finite");
        }
        if log && !(lo > 0.0 && hi > 0.0) {
            bail!("axis `{text}`: log spacing needs positive bounds");
        }
        let frac = |k: usize| if count == 1 { 0.0 } else { k as f64 / (count - 1) as f64 };
        let values = (0..count)
            .map(|k| {
                if log {
                    (lo.ln() + frac(k) * (hi.ln() - lo.ln())).exp()
                } else {
                    lo + frac(k) * (hi - lo)
                }
            })
            .collect();
        Ok(Self { name, label, values })
    }
}

const QUANTITIES: [&str; 8] = [
    "delta_qd",
    "delta_cc",
    "sigma_det",
    "gamma",
    "s_qq",
    "s_pp",
    "s_pq",
    "t_deco",
];

fn evaluate(base: &RawConfig, axes: &[Axis], point: &[f64], quantities: &[&str]) -> lindho::Result<Vec<f64>> {
    let mut raw = base.clone();
    let mut t = 0.0;
    for (axis, &v) in axes.iter().zip(point) {
        match axis.name {
            AxisName::Lambda => raw.lambda = Some(v),
            AxisName::Mu => raw.mu = Some(v),
            AxisName::Delta => raw.delta = Some(v),
            AxisName::R => raw.r = Some(v),
            AxisName::C => raw.temp = Some(TempInput::Coth(v)),
            AxisName::T => t = v,
        }
    }
    let cfg = raw.build()?;
    let d = thermal_coefficients(&cfg.oscillator)?;
    let s0 = initial_state(&cfg.initial, &cfg.oscillator)?;
    let s = covariance_lyapunov(&s0, &cfg.oscillator, &d, t)?;
    let hbar = cfg.oscillator.hbar;
    Ok(quantities
        .iter()
        .map(|&q| match q {
            "delta_qd" => delta_qd(&s, hbar),
            "delta_cc" => delta_cc(&s),
            "sigma_det" => s.sigma_det(),
            "gamma" => s.sigma_det() / (2.0 * hbar * hbar * s.s_qq),
            "s_qq" => s.s_qq,
            "s_pp" => s.s_pp,
            "s_pq" => s.s_pq,
            "t_deco" => decoherence_time(&cfg.initial, &cfg.oscillator).time,
            _ => unreachable!("quantities are checked up front"),
        })
        .collect())
}

/// Evaluates the cartesian product of the axes (first axis slowest) and
/// returns the CSV text. Points violating a constraint yield `nan` rows.
pub fn sweep_csv(base: &RawConfig, axes: &[Axis], quantities: &[&str]) -> (String, usize) {
    let dims: Vec<usize> = axes.iter().map(|a| a.values.len()).collect();
    let total: usize = dims.iter().product();
    let rows: Vec<(Vec<f64>, bool)> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rem = flat;
            let mut point = vec![0.0; axes.len()];
            for a in (0..axes.len()).rev() {
                point[a] = axes[a].values[rem % dims[a]];
                rem /= dims[a];
            }
            match evaluate(base, axes, &point, quantities) {
                Ok(vals) => {
                    point.extend(vals);
                    (point, true)
                }
                Err(_) => {
                    point.extend(std::iter::repeat_n(f64::NAN, quantities.len()));
                    (point, false)
                }
            }
        })
        .collect();

    let mut header: Vec<&str> = axes.iter().map(|a| a.label).collect();
    header.extend_from_slice(quantities);
    let mut text = header.join(",");
    text.push('\n');
    let mut invalid = 0;
    for (row, ok) in &rows {
        invalid += usize::from(!ok);
        text.push_str(&csv_row(row));
        text.push('\n');
    }
    (text, invalid)
}

pub fn run(params: &ParamArgs, axes: &[String], quantities: &str, out: Option<&Path>) -> anyhow::Result<()> {
    let base = params.raw()?;
    let axes = axes
        .iter()
        .map(|a| Axis::parse(a))
        .collect::<anyhow::Result<Vec<_>>>()?;
    for (i, a) in axes.iter().enumerate() {
        if axes[..i].iter().any(|b| b.name == a.name) {
            bail!("axis `{}` given twice", a.label);
        }
    }
    let quantities: Vec<&str> = quantities.split(',').map(str::trim).collect();
    if let Some(bad) = quantities.iter().find(|q| !QUANTITIES.contains(q)) {
        bail!("unknown quantity `{bad}` (one of {})", QUANTITIES.join(", "));
    }
    let (text, invalid) = sweep_csv(&base, &axes, &quantities);
    if invalid > 0 {
        eprintln!(
            "warning: {invalid} sweep points violate a constraint and are reported as {}",
            fmt_f64(f64::NAN)
        );
    }
    crate::emit(out, &text)
}
