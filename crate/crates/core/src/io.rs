//! Locale-independent number formatting and CSV helpers.

use std::fmt::Write as _;

use crate::model::GaussianState;
use crate::propagate::Trajectory;

/// 17 significant digits; infinities as `inf` / `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Parses numbers written by [`fmt_f64`] (and plain decimals).
pub fn parse_f64(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        t => t.parse().ok(),
    }
}

/// Serializes non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`
/// so JSON output stays portable.
pub mod inf_as_string {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&super::fmt_f64(*x))
        }
    }
}

pub fn csv_row(values: &[f64]) -> String {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_f64(*v));
    }
    out
}

pub const TRAJECTORY_HEADER: &str = "t,mean_q,mean_p,s_qq,s_pp,s_pq,sigma_det";

pub fn state_row(s: &GaussianState) -> String {
    csv_row(&[s.t, s.mean_q, s.mean_p, s.s_qq, s.s_pp, s.s_pq, s.sigma_det()])
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(traj.len() * 170 + 64);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for s in traj.samples() {
        let _ = writeln!(out, "{}", state_row(s));
    }
    out
}
