//! Physical parameters, bath coefficients and initial correlated coherent states.
//!
//! Everything here is a plain value type. Natural units `m = ω = ħ = 1` are the
//! default; all formulas keep the constants explicit so that other unit systems
//! work unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;

/// Bath temperature, stored as `C = coth(ħω / 2kT)`.
///
/// `C = 1` is zero temperature and `C → ∞` is infinite temperature. Storing
/// `C` keeps `T = 0` exact, where `ε = ħω/2kT` would overflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureSpec {
    coth: f64,
}

impl TemperatureSpec {
    pub const ZERO: TemperatureSpec = TemperatureSpec { coth: 1.0 };

    pub fn from_coth(coth: f64) -> Result<Self> {
        if !(coth >= 1.0) || coth.is_infinite() {
            return Err(Error::param("temp.C", format!("need finite C >= 1, got {coth}")));
        }
        Ok(Self { coth })
    }

    /// From `ε = ħω / 2kT > 0`. `ε = ∞` is accepted and means `T = 0`.
    pub fn from_epsilon(eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::param("epsilon", format!("need epsilon > 0, got {eps}")));
        }
        Ok(Self { coth: 1.0 / eps.tanh() })
    }

    /// From thermal energy `kT` (with `k` folded in) for an oscillator with
    /// quantum `ħω`.
    pub fn from_thermal_energy(kt: f64, hbar: f64, omega: f64) -> Result<Self> {
        if !(kt >= 0.0) || kt.is_infinite() {
            return Err(Error::param("temp.T", format!("need finite T >= 0, got {kt}")));
        }
        if kt == 0.0 {
            return Ok(Self::ZERO);
        }
        Self::from_epsilon(hbar * omega / (2.0 * kt))
    }

    #[inline]
    pub fn coth(&self) -> f64 {
        self.coth
    }

    /// `ε = arcoth C`; infinite at `T = 0`.
    pub fn epsilon(&self) -> f64 {
        (1.0 / self.coth).atanh()
    }

    /// `τ = 1/ε = 2kT/ħω`.
    pub fn tau(&self) -> f64 {
        1.0 / self.epsilon()
    }

    /// Thermal energy `kT = ħω / 2ε`.
    pub fn thermal_energy(&self, hbar: f64, omega: f64) -> f64 {
        hbar * omega / (2.0 * self.epsilon())
    }

    pub fn is_zero(&self) -> bool {
        self.coth == 1.0
    }
}

/// Oscillator and bath parameters.
///
/// `closed` selects the zero-damping, zero-diffusion limit explicitly; in that
/// mode `lambda` and `mu` are zero and the bath temperature is ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorConfig {
    pub m: f64,
    pub omega: f64,
    pub lambda: f64,
    pub mu: f64,
    pub hbar: f64,
    pub temp: TemperatureSpec,
    pub closed: bool,
}

impl OscillatorConfig {
    pub fn new(m: f64, omega: f64, lambda: f64, mu: f64, hbar: f64, temp: TemperatureSpec) -> Result<Self> {
        let cfg = Self {
            m,
            omega,
            lambda,
            mu,
            hbar,
            temp,
            closed: false,
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// Natural units `m = ω = ħ = 1`.
    pub fn natural(lambda: f64, mu: f64, coth: f64) -> Result<Self> {
        Self::new(1.0, 1.0, lambda, mu, 1.0, TemperatureSpec::from_coth(coth)?)
    }

    /// Closed (unitary) oscillator: `λ = μ = 0` with no diffusion.
    pub fn closed(m: f64, omega: f64, hbar: f64) -> Result<Self> {
        let cfg = Self {
            m,
            omega,
            lambda: 0.0,
            mu: 0.0,
            hbar,
            temp: TemperatureSpec::ZERO,
            closed: true,
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// Hard invariants: positive `m`, `ω`, `ħ`, non-negative `λ`, and the
    /// underdamped condition `ω > μ`.
    pub fn check(&self) -> Result<()> {
        for (name, v) in [("m", self.m), ("omega", self.omega), ("hbar", self.hbar)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::param("lambda", format!("must be >= 0, got {}", self.lambda)));
        }
        if !self.mu.is_finite() {
            return Err(Error::param("mu", "must be finite"));
        }
        if self.closed && (self.lambda != 0.0 || self.mu != 0.0) {
            return Err(Error::param("closed", "closed system requires lambda = mu = 0"));
        }
        if !(self.omega > self.mu) {
            return Err(Error::Constraint(format!(
                "underdamped regime requires omega > mu (omega = {}, mu = {})",
                self.omega, self.mu
            )));
        }
        Ok(())
    }

    /// `Ω = √(ω² − μ²)`.
    pub fn big_omega(&self) -> f64 {
        (self.omega * self.omega - self.mu * self.mu).sqrt()
    }

    pub fn coth(&self) -> f64 {
        self.temp.coth()
    }

    /// Drift matrix of the first-moment equations.
    pub fn drift(&self) -> Mat2 {
        Mat2::new(
            -(self.lambda - self.mu),
            1.0 / self.m,
            -self.m * self.omega * self.omega,
            -(self.lambda + self.mu),
        )
    }
}

/// Noise coefficients `D_pp`, `D_qq`, `D_pq` of the master equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionCoefficients {
    pub d_pp: f64,
    pub d_qq: f64,
    pub d_pq: f64,
}

impl DiffusionCoefficients {
    pub const ZERO: DiffusionCoefficients = DiffusionCoefficients {
        d_pp: 0.0,
        d_qq: 0.0,
        d_pq: 0.0,
    };

    /// `D_pp D_qq − D_pq²`.
    pub fn determinant(&self) -> f64 {
        self.d_pp * self.d_qq - self.d_pq * self.d_pq
    }

    /// Diffusion matrix in `(q, p)` ordering.
    pub fn matrix(&self) -> Mat2 {
        Mat2::new(self.d_qq, self.d_pq, self.d_pq, self.d_pp)
    }
}

/// Coefficients for which the asymptotic state is the Gibbs state of `H₀`.
pub fn thermal_coefficients(cfg: &OscillatorConfig) -> Result<DiffusionCoefficients> {
    cfg.check()?;
    if cfg.closed {
        return Ok(DiffusionCoefficients::ZERO);
    }
    if !(cfg.lambda > cfg.mu) {
        return Err(Error::Constraint(format!(
            "thermal coefficients need lambda > mu (lambda = {}, mu = {}); D_qq would be non-positive",
            cfg.lambda, cfg.mu
        )));
    }
    let c = cfg.coth();
    let mw = cfg.m * cfg.omega;
    Ok(DiffusionCoefficients {
        d_pp: 0.5 * (cfg.lambda + cfg.mu) * cfg.hbar * mw * c,
        d_qq: 0.5 * (cfg.lambda - cfg.mu) * (cfg.hbar / mw) * c,
        d_pq: 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Advisory checks never fail a report.
    pub fatal: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    /// All fatal checks pass.
    pub fn is_ok(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.fatal)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.fatal && !c.passed)
    }
}

/// Evaluates every positivity and regime constraint; never errors.
pub fn validate(cfg: &OscillatorConfig, d: &DiffusionCoefficients) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name, passed, fatal, detail: String| {
        checks.push(Check {
            name,
            passed,
            fatal,
            detail,
        })
    };

    if cfg.closed {
        push("d_pp_positive", true, true, "closed system: not applicable".into());
        push("d_qq_positive", true, true, "closed system: not applicable".into());
    } else {
        push("d_pp_positive", d.d_pp > 0.0, true, format!("D_pp = {}", d.d_pp));
        push("d_qq_positive", d.d_qq > 0.0, true, format!("D_qq = {}", d.d_qq));
    }

    let det = d.determinant();
    let bound = cfg.lambda * cfg.lambda * cfg.hbar * cfg.hbar / 4.0;
    push(
        "diffusion_determinant",
        det >= bound,
        true,
        format!("D_pp D_qq - D_pq^2 = {det} vs lambda^2 hbar^2 / 4 = {bound}"),
    );

    let c = cfg.coth();
    let lhs = (cfg.lambda * cfg.lambda - cfg.mu * cfg.mu) * c * c;
    let rhs = cfg.lambda * cfg.lambda;
    push(
        "thermal_constraint",
        lhs >= rhs,
        true,
        format!("(lambda^2 - mu^2) C^2 = {lhs} vs lambda^2 = {rhs}"),
    );

    push(
        "underdamped",
        cfg.omega > cfg.mu,
        true,
        format!("omega = {}, mu = {}", cfg.omega, cfg.mu),
    );

    push(
        "weak_coupling",
        cfg.lambda < 0.1 * cfg.omega,
        false,
        format!("lambda = {} vs 0.1 omega = {}", cfg.lambda, 0.1 * cfg.omega),
    );

    ValidationReport { checks }
}

/// Parameters of an initial correlated coherent state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialStateSpec {
    /// Squeezing `δ > 0`; `δ = 1` with `r = 0` is a Glauber coherent state.
    pub delta: f64,
    /// Correlation coefficient, `|r| < 1`.
    pub r: f64,
    pub q0: f64,
    pub p0: f64,
}

impl InitialStateSpec {
    pub fn new(delta: f64, r: f64, q0: f64, p0: f64) -> Result<Self> {
        let s = Self { delta, r, q0, p0 };
        s.check()?;
        Ok(s)
    }

    pub fn centered(delta: f64, r: f64) -> Result<Self> {
        Self::new(delta, r, 0.0, 0.0)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::param(
                "init.delta",
                format!("need delta > 0, got {}", self.delta),
            ));
        }
        if !(self.r.abs() < 1.0) {
            return Err(Error::param("init.r", format!("need |r| < 1, got {}", self.r)));
        }
        if !self.q0.is_finite() || !self.p0.is_finite() {
            return Err(Error::param("init.q0/p0", "initial means must be finite"));
        }
        Ok(())
    }

    /// `1 − r²`
    pub(crate) fn one_minus_r2(&self) -> f64 {
        1.0 - self.r * self.r
    }
}

/// First and second moments of a Gaussian state at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    pub t: f64,
    pub mean_q: f64,
    pub mean_p: f64,
    pub s_qq: f64,
    pub s_pp: f64,
    pub s_pq: f64,
}

impl GaussianState {
    pub fn from_moments(t: f64, mean: [f64; 2], cov: Mat2) -> Self {
        Self {
            t,
            mean_q: mean[0],
            mean_p: mean[1],
            s_qq: cov.a,
            s_pp: cov.d,
            s_pq: 0.5 * (cov.b + cov.c),
        }
    }

    /// Generalized uncertainty function `σ = σ_qq σ_pp − σ_pq²`.
    #[inline]
    pub fn sigma_det(&self) -> f64 {
        self.s_qq * self.s_pp - self.s_pq * self.s_pq
    }

    pub fn covariance(&self) -> Mat2 {
        Mat2::new(self.s_qq, self.s_pq, self.s_pq, self.s_pp)
    }

    pub fn mean(&self) -> [f64; 2] {
        [self.mean_q, self.mean_p]
    }

    pub fn check(&self) -> Result<()> {
        let vals = [self.t, self.mean_q, self.mean_p, self.s_qq, self.s_pp, self.s_pq];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("state has non-finite moments".into()));
        }
        if !(self.s_qq > 0.0 && self.s_pp > 0.0 && self.sigma_det() > 0.0) {
            return Err(Error::Invalid(format!(
                "covariance not positive definite (s_qq = {}, s_pp = {}, det = {})",
                self.s_qq,
                self.s_pp,
                self.sigma_det()
            )));
        }
        Ok(())
    }

    pub fn translated(&self, dq: f64, dp: f64) -> Self {
        Self {
            mean_q: self.mean_q + dq,
            mean_p: self.mean_p + dp,
            ..*self
        }
    }

    pub fn centered(&self) -> Self {
        Self {
            mean_q: 0.0,
            mean_p: 0.0,
            ..*self
        }
    }
}

/// Correlated coherent state at `t = 0`; a minimum-uncertainty state.
pub fn initial_state(spec: &InitialStateSpec, cfg: &OscillatorConfig) -> Result<GaussianState> {
    spec.check()?;
    cfg.check()?;
    let mw = cfg.m * cfg.omega;
    let one_r2 = spec.one_minus_r2();
    Ok(GaussianState {
        t: 0.0,
        mean_q: spec.q0,
        mean_p: spec.p0,
        s_qq: cfg.hbar * spec.delta / (2.0 * mw),
        s_pp: cfg.hbar * mw / (2.0 * spec.delta * one_r2),
        s_pq: cfg.hbar * spec.r / (2.0 * one_r2.sqrt()),
    })
}
