//! Degree of quantum decoherence `δ_QD`, degree of classical correlations
//! `δ_CC`, the 1σ contour and the windows where both hold.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::csv_row;
use crate::model::{GaussianState, OscillatorConfig};
use crate::propagate::Trajectory;
use crate::states::alpha_beta_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalityMetrics {
    pub t: f64,
    pub delta_qd: f64,
    /// `+∞` when `σ_pq = 0`.
    pub delta_cc: f64,
    pub gamma: f64,
    pub sigma_det: f64,
    pub sigma_pq: f64,
}

/// `δ_QD = ħ / 2√σ`, equal to `½√(α/γ)`.
pub fn delta_qd(state: &GaussianState, hbar: f64) -> f64 {
    hbar / (2.0 * state.sigma_det().sqrt())
}

/// Asymptotic `δ_QD = tanh(ħω/2kT) = 1/C`, independent of the initial state.
pub fn delta_qd_asymptotic(cfg: &OscillatorConfig) -> f64 {
    1.0 / cfg.coth()
}

/// `δ_CC = √σ / |σ_pq|`, equal to `2√(αγ)/|β|`.
pub fn delta_cc(state: &GaussianState) -> f64 {
    if state.s_pq == 0.0 {
        return f64::INFINITY;
    }
    state.sigma_det().sqrt() / state.s_pq.abs()
}

/// `δ_CC` of the undamped oscillator started in an uncorrelated state with
/// squeezing `delta`: `2 / |(δ − 1/δ) sin 2ωt|`.
pub fn delta_cc_closed_system(delta: f64, cfg: &OscillatorConfig, t: f64) -> Result<f64> {
    if cfg.lambda != 0.0 || cfg.mu != 0.0 {
        return Err(Error::Invalid("closed-system delta_cc needs lambda = mu = 0".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::param("delta", "need delta > 0"));
    }
    let arg = 2.0 * cfg.omega * t;
    let s = arg.sin();
    // sin of a rounded argument: anything below the argument's rounding
    // error is a zero of the sine
    if s.abs() <= 4.0 * f64::EPSILON * arg.abs().max(1.0) {
        return Ok(f64::INFINITY);
    }
    let amp = (delta - 1.0 / delta).abs();
    Ok(if amp == 0.0 {
        f64::INFINITY
    } else {
        2.0 / (amp * s.abs())
    })
}

pub fn metrics(state: &GaussianState, hbar: f64) -> ClassicalityMetrics {
    ClassicalityMetrics {
        t: state.t,
        delta_qd: delta_qd(state, hbar),
        delta_cc: delta_cc(state),
        gamma: alpha_beta_gamma(state, hbar).gamma,
        sigma_det: state.sigma_det(),
        sigma_pq: state.s_pq,
    }
}

pub const METRICS_HEADER: &str = "t,delta_qd,delta_cc,gamma,sigma_det,sigma_pq";

pub fn metrics_csv(rows: &[ClassicalityMetrics]) -> String {
    let mut out = String::with_capacity(rows.len() * 150 + 64);
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for m in rows {
        let _ = writeln!(
            out,
            "{}",
            csv_row(&[m.t, m.delta_qd, m.delta_cc, m.gamma, m.sigma_det, m.sigma_pq])
        );
    }
    out
}

/// 1σ contour `(1/2σ)[σ_pp x² + σ_qq y² − 2σ_pq x y] = 1` around the means.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ellipse {
    pub centre: [f64; 2],
    /// Semi-axis lengths, longer first.
    pub semi_axes: [f64; 2],
    /// Angle of the longer axis from the `q` axis.
    pub angle: f64,
    pub points: Vec<[f64; 2]>,
}

impl Ellipse {
    pub fn area(&self) -> f64 {
        PI * self.semi_axes[0] * self.semi_axes[1]
    }

    /// Shoelace area of the sampled polygon.
    pub fn polygon_area(&self) -> f64 {
        let n = self.points.len();
        let twice: f64 = (0..n)
            .map(|i| {
                let [x0, y0] = self.points[i];
                let [x1, y1] = self.points[(i + 1) % n];
                x0 * y1 - x1 * y0
            })
            .sum();
        0.5 * twice.abs()
    }
}

/// Samples the 1σ contour at `n_points` equally spaced parameter values.
/// Semi-axes are `√(2λᵢ)` for the covariance eigenvalues `λᵢ`.
pub fn one_sigma_contour(state: &GaussianState, n_points: usize) -> Result<Ellipse> {
    if n_points < 8 {
        return Err(Error::param("n_points", "need at least 8 contour points"));
    }
    let ([l1, l2], angle) = state.covariance().symmetric_eigen();
    let (a, b) = ((2.0 * l1).sqrt(), (2.0 * l2).sqrt());
    let (sn, cs) = angle.sin_cos();
    let points = (0..n_points)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / n_points as f64;
            let (x, y) = (a * th.cos(), b * th.sin());
            [state.mean_q + cs * x - sn * y, state.mean_p + sn * x + cs * y]
        })
        .collect();
    Ok(Ellipse {
        centre: state.mean(),
        semi_axes: [a, b],
        angle,
        points,
    })
}

/// Semi-axes of the 1σ contour in the coordinates `(ħβq − p, ħβq)`:
/// `2ħ√γ` and `ħ|β|/√α`. Their ratio is `δ_CC`.
pub fn correlation_semi_axes(state: &GaussianState, hbar: f64) -> (f64, f64) {
    let abg = alpha_beta_gamma(state, hbar);
    (2.0 * hbar * abg.gamma.sqrt(), hbar * abg.beta.abs() / abg.alpha.sqrt())
}

/// Thresholds below which decoherence and classical correlations count as
/// significant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub qd: f64,
    pub cc: f64,
}

impl Thresholds {
    pub fn new(qd: f64, cc: f64) -> Result<Self> {
        for (name, v) in [("qd_threshold", qd), ("cc_threshold", cc)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be in (0, inf), got {v}")));
            }
        }
        Ok(Self { qd, cc })
    }

    pub fn holds(&self, state: &GaussianState, hbar: f64) -> bool {
        delta_qd(state, hbar) < self.qd && delta_cc(state) < self.cc
    }
}

/// Maximal time interval on which `δ_QD < qd` and `δ_CC < cc` both hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

/// Time resolution of refined window edges.
pub const WINDOW_RESOLUTION: f64 = 1e-6;

/// Finds the classicality windows of a trajectory. The predicate is sampled
/// on the trajectory times; each transition is refined by bisection on
/// `state_at` (typically the closed forms) to [`WINDOW_RESOLUTION`].
pub fn classicality_window<F>(
    traj: &Trajectory,
    hbar: f64,
    thresholds: Thresholds,
    state_at: F,
) -> Result<Vec<Interval>>
where
    F: Fn(f64) -> Result<GaussianState>,
{
    let samples = traj.samples();
    if samples.len() < 2 {
        return Err(Error::Invalid("window detection needs at least 2 samples".into()));
    }
    let inside: Vec<bool> = samples.iter().map(|s| thresholds.holds(s, hbar)).collect();
    let edge = |lo: f64, hi: f64, lo_inside: bool| -> Result<f64> {
        let (mut a, mut b) = (lo, hi);
        while b - a > WINDOW_RESOLUTION {
            let mid = 0.5 * (a + b);
            if thresholds.holds(&state_at(mid)?, hbar) == lo_inside {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    };

    let mut out = Vec::new();
    let mut start = if inside[0] { Some(samples[0].t) } else { None };
    for i in 1..samples.len() {
        let (t0, t1) = (samples[i - 1].t, samples[i].t);
        match (inside[i - 1], inside[i]) {
            (false, true) => start = Some(edge(t0, t1, false)?),
            (true, false) => {
                let end = edge(t0, t1, true)?;
                out.push(Interval {
                    start: start.take().unwrap_or(t0),
                    end,
                });
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Interval {
            start: s,
            end: samples[samples.len() - 1].t,
        });
    }
    Ok(out)
}
