//! Time evolution of Gaussian states.
//!
//! Three routes are provided and kept independent of one another:
//!
//! * [`Route::ClosedForm`]: the analytic mean solution, the analytic
//!   uncertainty function `σ(t)` and covariance `σ_pq(t)`, and the Gibbs
//!   asymptote (thermal bath only).
//! * [`Route::Lyapunov`]: `Σ(t) = e^{Yt}(Σ₀ − Σ∞)e^{Yᵀt} + Σ∞` with the matrix
//!   exponential from the 2×2 eigenvalues and `Σ∞` from the Lyapunov equation.
//! * [`Route::Rk4`]: fixed-step RK4 on the five moment equations
//!   `d⟨x⟩/dt = Y⟨x⟩`, `dΣ/dt = YΣ + ΣYᵀ + 2D`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_lyapunov, Mat2};
use crate::model::{initial_state, DiffusionCoefficients, GaussianState, InitialStateSpec, OscillatorConfig};
use crate::quadrature::simpson_refined;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    ClosedForm,
    Lyapunov,
    Rk4,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::ClosedForm, Route::Lyapunov, Route::Rk4];

    pub fn name(&self) -> &'static str {
        match self {
            Route::ClosedForm => "closed",
            Route::Lyapunov => "lyapunov",
            Route::Rk4 => "rk4",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Route {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" | "closed-form" => Ok(Route::ClosedForm),
            "lyapunov" => Ok(Route::Lyapunov),
            "rk4" | "rk4-oracle" => Ok(Route::Rk4),
            _ => Err(Error::Invalid(format!("unknown route `{s}`"))),
        }
    }
}

/// Time-ordered samples of one propagation route.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    route: Route,
    samples: Vec<GaussianState>,
}

impl Trajectory {
    pub fn new(route: Route, samples: Vec<GaussianState>) -> Result<Self> {
        if samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::Invalid("trajectory times must be strictly increasing".into()));
        }
        Ok(Self { route, samples })
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn samples(&self) -> &[GaussianState] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&GaussianState> {
        self.samples.last()
    }

    /// Keeps every `k`-th sample plus the final one.
    pub fn thinned(&self, k: usize) -> Trajectory {
        let k = k.max(1);
        let n = self.samples.len();
        let samples = self
            .samples
            .iter()
            .enumerate()
            .filter(|(i, _)| i % k == 0 || *i + 1 == n)
            .map(|(_, s)| *s)
            .collect();
        Trajectory {
            route: self.route,
            samples,
        }
    }
}

/// Fundamental matrix of the mean equations, written out from the analytic
/// underdamped solution.
pub fn mean_propagator_closed(cfg: &OscillatorConfig, t: f64) -> Mat2 {
    let big = cfg.big_omega();
    let (s, c) = (big * t).sin_cos();
    let decay = (-cfg.lambda * t).exp();
    Mat2::new(
        c + cfg.mu / big * s,
        s / (cfg.m * big),
        -cfg.m * cfg.omega * cfg.omega / big * s,
        c - cfg.mu / big * s,
    )
    .scale(decay)
}

/// Means at elapsed time `t` from the analytic underdamped solution.
pub fn mean_closed_form(state0: &GaussianState, cfg: &OscillatorConfig, t: f64) -> (f64, f64) {
    let [q, p] = mean_propagator_closed(cfg, t).apply(state0.mean());
    (q, p)
}

/// Steady-state covariance `Σ∞` solving `YΣ + ΣYᵀ + 2D = 0`.
pub fn steady_state_covariance(cfg: &OscillatorConfig, d: &DiffusionCoefficients) -> Result<Mat2> {
    solve_lyapunov(&cfg.drift(), &d.matrix().scale(2.0))
        .ok_or_else(|| Error::NoSteadyState("Lyapunov system is singular (lambda = 0)".into()))
}

/// Exact propagation through the matrix exponential and the Lyapunov
/// steady state. Without damping the Lyapunov system is singular and the
/// noise integral `∫₀ᵗ e^{Ys} 2D e^{Yᵀs} ds` is evaluated by quadrature.
pub fn covariance_lyapunov(
    state0: &GaussianState,
    cfg: &OscillatorConfig,
    d: &DiffusionCoefficients,
    t: f64,
) -> Result<GaussianState> {
    if !(t >= 0.0) {
        return Err(Error::param("t", format!("need t >= 0, got {t}")));
    }
    let y = cfg.drift();
    let e = y.scale(t).exp();
    let sigma0 = state0.covariance();
    let cov = match steady_state_covariance(cfg, d) {
        Ok(inf) => e.congruence(&(sigma0 - inf)) + inf,
        Err(_) => e.congruence(&sigma0) + noise_integral(&y, d, t),
    };
    let mean = e.apply(state0.mean());
    Ok(GaussianState::from_moments(state0.t + t, mean, cov))
}

fn noise_integral(y: &Mat2, d: &DiffusionCoefficients, t: f64) -> Mat2 {
    let q = d.matrix().scale(2.0);
    if q.max_abs() == 0.0 || t == 0.0 {
        return Mat2::ZERO;
    }
    let entry = |pick: fn(&Mat2) -> f64| simpson_refined(|s| pick(&y.scale(s).exp().congruence(&q)), 0.0, t, 1e-13).0;
    let qq = entry(|m| m.a);
    let pq = entry(|m| m.b);
    let pp = entry(|m| m.d);
    Mat2::new(qq, pq, pq, pp)
}

fn thermal_combinations(spec: &InitialStateSpec) -> (f64, f64, f64) {
    let one_r2 = spec.one_minus_r2();
    let inv = 1.0 / (spec.delta * one_r2);
    (spec.delta + inv, spec.delta - inv, one_r2.sqrt())
}

/// Uncertainty function `σ(t) = det Σ(t)` for a correlated coherent initial
/// state in a thermal bath, in closed form.
pub fn sigma_det_closed(spec: &InitialStateSpec, cfg: &OscillatorConfig, t: f64) -> f64 {
    let (sum, diff, sqrt_1r2) = thermal_combinations(spec);
    let c = cfg.coth();
    let (lam, mu, w) = (cfg.lambda, cfg.mu, cfg.omega);
    let big = cfg.big_omega();
    let (s2, c2) = (2.0 * big * t).sin_cos();
    let bracket = (sum - 2.0 * c) * (w * w - mu * mu * c2) / (big * big)
        + diff * mu * s2 / big
        + 2.0 * spec.r * mu * w * (1.0 - c2) / (big * big * sqrt_1r2);
    let h2 = cfg.hbar * cfg.hbar;
    0.25 * h2 * ((-4.0 * lam * t).exp() * (1.0 - sum * c + c * c) + (-2.0 * lam * t).exp() * c * bracket + c * c)
}

/// Covariance `σ_pq(t)` for a correlated coherent initial state in a thermal
/// bath, in closed form.
///
/// The overall sign is fixed so that `σ_pq(0) = ħr / 2√(1−r²)`, matching the
/// initial state and the Lyapunov route.
pub fn sigma_pq_closed(spec: &InitialStateSpec, cfg: &OscillatorConfig, t: f64) -> f64 {
    let (sum, diff, sqrt_1r2) = thermal_combinations(spec);
    let c = cfg.coth();
    let (lam, mu, w) = (cfg.lambda, cfg.mu, cfg.omega);
    let big = cfg.big_omega();
    let (s2, c2) = (2.0 * big * t).sin_cos();
    let r_term = spec.r / sqrt_1r2;
    let braces = (mu * w * (2.0 * c - sum) - 2.0 * w * w * r_term) * c2
        + w * big * diff * s2
        + mu * w * (sum - 2.0 * c)
        + 2.0 * mu * mu * r_term;
    -cfg.hbar / (4.0 * big * big) * (-2.0 * lam * t).exp() * braces
}

/// Gibbs asymptote: `σ_qq = (ħ/2mω)C`, `σ_pp = (ħmω/2)C`, `σ_pq = 0`.
pub fn asymptotic_covariance(cfg: &OscillatorConfig) -> Result<GaussianState> {
    cfg.check()?;
    if cfg.closed || !(cfg.lambda > 0.0) {
        return Err(Error::NoSteadyState("no asymptotic state without damping".into()));
    }
    let c = cfg.coth();
    let mw = cfg.m * cfg.omega;
    Ok(GaussianState {
        t: f64::INFINITY,
        mean_q: 0.0,
        mean_p: 0.0,
        s_qq: cfg.hbar / (2.0 * mw) * c,
        s_pp: cfg.hbar * mw / 2.0 * c,
        s_pq: 0.0,
    })
}

/// State at time `t` assembled from the closed forms alone: analytic means,
/// `σ_qq` from the analytic fundamental matrix and the Gibbs asymptote,
/// `σ_pq` and `σ(t)` from their closed forms, and `σ_pp` fixed by the
/// determinant. Applies to thermal coefficients or the closed system.
pub fn closed_form_state(spec: &InitialStateSpec, cfg: &OscillatorConfig, t: f64) -> Result<GaussianState> {
    let s0 = initial_state(spec, cfg)?;
    let m = mean_propagator_closed(cfg, t);
    let sigma0 = s0.covariance();
    let cov = if cfg.closed {
        m.congruence(&sigma0)
    } else {
        let inf = asymptotic_covariance(cfg)?.covariance();
        m.congruence(&(sigma0 - inf)) + inf
    };
    let s_qq = cov.a;
    let s_pq = sigma_pq_closed(spec, cfg, t);
    let sigma = sigma_det_closed(spec, cfg, t);
    let [q, p] = m.apply(s0.mean());
    Ok(GaussianState {
        t,
        mean_q: q,
        mean_p: p,
        s_qq,
        s_pp: (sigma + s_pq * s_pq) / s_qq,
        s_pq,
    })
}

type MomentVec = [f64; 5];

fn pack(s: &GaussianState) -> MomentVec {
    [s.mean_q, s.mean_p, s.s_qq, s.s_pq, s.s_pp]
}

fn unpack(t: f64, v: &MomentVec) -> GaussianState {
    GaussianState {
        t,
        mean_q: v[0],
        mean_p: v[1],
        s_qq: v[2],
        s_pq: v[3],
        s_pp: v[4],
    }
}

fn moment_rhs(y: &Mat2, d: &DiffusionCoefficients, v: &MomentVec) -> MomentVec {
    let [dq, dp] = y.apply([v[0], v[1]]);
    let s = Mat2::new(v[2], v[3], v[3], v[4]);
    let ys = *y * s;
    // YΣ + ΣYᵀ = YΣ + (YΣ)ᵀ
    [
        dq,
        dp,
        2.0 * ys.a + 2.0 * d.d_qq,
        ys.b + ys.c + 2.0 * d.d_pq,
        2.0 * ys.d + 2.0 * d.d_pp,
    ]
}

fn axpy(a: f64, x: &MomentVec, y: &MomentVec) -> MomentVec {
    std::array::from_fn(|i| y[i] + a * x[i])
}

/// Classic fixed-step RK4 on the moment equations. The step is `dt`, shrunk
/// uniformly when `t_end` is not a multiple of it. Every step is recorded.
pub fn integrate_moments_rk4(
    state0: &GaussianState,
    cfg: &OscillatorConfig,
    d: &DiffusionCoefficients,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::param("dt", format!("need dt > 0, got {dt}")));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::param("t_end", format!("need finite t_end >= 0, got {t_end}")));
    }
    let n = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let h = if n == 0 { 0.0 } else { t_end / n as f64 };
    let y = cfg.drift();
    let mut v = pack(state0);
    let mut samples = Vec::with_capacity(n + 1);
    samples.push(*state0);
    for step in 1..=n {
        let k1 = moment_rhs(&y, d, &v);
        let k2 = moment_rhs(&y, d, &axpy(0.5 * h, &k1, &v));
        let k3 = moment_rhs(&y, d, &axpy(0.5 * h, &k2, &v));
        let k4 = moment_rhs(&y, d, &axpy(h, &k3, &v));
        v = std::array::from_fn(|i| v[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        let t = state0.t + step as f64 * h;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { step, t });
        }
        samples.push(unpack(t, &v));
    }
    Trajectory::new(Route::Rk4, samples)
}

/// Samples one route on the uniform grid `0, dt, …, t_end` (the last step
/// shortened as in [`integrate_moments_rk4`]).
pub fn trajectory(
    route: Route,
    spec: &InitialStateSpec,
    cfg: &OscillatorConfig,
    d: &DiffusionCoefficients,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    let s0 = initial_state(spec, cfg)?;
    if route == Route::Rk4 {
        return integrate_moments_rk4(&s0, cfg, d, t_end, dt);
    }
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::param("dt/t_end", "need dt > 0 and t_end >= 0"));
    }
    let n = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let h = if n == 0 { 0.0 } else { t_end / n as f64 };
    let samples = (0..=n)
        .map(|k| {
            let t = k as f64 * h;
            match route {
                Route::ClosedForm => closed_form_state(spec, cfg, t),
                _ => covariance_lyapunov(&s0, cfg, d, t),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(route, samples)
}

/// Largest scaled discrepancy between two states at the same time.
///
/// `σ` is compared relative to itself, covariance entries relative to the
/// largest variance, and means relative to the larger of the mean vector
/// norm and the position/momentum spread `√(σ_qq + σ_pp)`.
pub fn max_relative_deviation(a: &GaussianState, b: &GaussianState) -> f64 {
    let sig = (a.sigma_det() - b.sigma_det()).abs() / b.sigma_det().abs();
    let cov_scale = b.s_qq.abs().max(b.s_pp.abs());
    let cov = [a.s_qq - b.s_qq, a.s_pp - b.s_pp, a.s_pq - b.s_pq]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()))
        / cov_scale;
    let mean_scale = b.mean_q.hypot(b.mean_p).max((b.s_qq + b.s_pp).sqrt());
    let mean = (a.mean_q - b.mean_q).hypot(a.mean_p - b.mean_p) / mean_scale;
    sig.max(cov).max(mean)
}
