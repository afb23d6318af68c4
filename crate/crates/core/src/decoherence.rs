//! Decoherence, statistical-fluctuation and relaxation time scales, and the
//! asymptotic uncertainty regimes.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{fmt_f64, inf_as_string};
use crate::model::{DiffusionCoefficients, InitialStateSpec, OscillatorConfig, TemperatureSpec};

/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380649e-23;
/// Reduced Planck constant, J·s.
pub const HBAR_SI: f64 = 1.054571817e-34;

/// Which formula produced a decoherence time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecoherenceVariant {
    #[serde(rename = "order-estimate")]
    OrderEstimate,
    #[serde(rename = "general")]
    General,
    #[serde(rename = "r0")]
    R0,
    #[serde(rename = "high_T")]
    HighT,
    #[serde(rename = "high_T_r0")]
    HighTR0,
}

impl DecoherenceVariant {
    pub fn tag(&self) -> &'static str {
        match self {
            DecoherenceVariant::OrderEstimate => "order-estimate",
            DecoherenceVariant::General => "general",
            DecoherenceVariant::R0 => "r0",
            DecoherenceVariant::HighT => "high_T",
            DecoherenceVariant::HighTR0 => "high_T_r0",
        }
    }
}

/// A decoherence time together with the formula that produced it. `+∞`
/// means the off-diagonal terms do not decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoherenceTime {
    #[serde(with = "inf_as_string")]
    pub time: f64,
    pub variant: DecoherenceVariant,
}

impl DecoherenceTime {
    fn from_rate(rate: f64, variant: DecoherenceVariant) -> Self {
        Self {
            time: if rate > 0.0 { 1.0 / rate } else { f64::INFINITY },
            variant,
        }
    }
}

/// Order-of-magnitude estimate `2ħ / ((λ+μ) m ω σ_qq(0) C)`, taking the
/// separation `(q − q')²` of the order of the initial spread `σ_qq(0)`.
pub fn decoherence_time_order(cfg: &OscillatorConfig, s_qq0: f64) -> DecoherenceTime {
    let denom = (cfg.lambda + cfg.mu) * cfg.m * cfg.omega * s_qq0 * cfg.coth();
    DecoherenceTime::from_rate(denom / (2.0 * cfg.hbar), DecoherenceVariant::OrderEstimate)
}

fn r2_ratio(spec: &InitialStateSpec) -> f64 {
    spec.r * spec.r / (spec.delta * spec.one_minus_r2())
}

/// Exponential decay rate of the off-diagonal coherences at short times:
/// `2[λ(δ + r²/δ(1−r²))C + μ(δ − r²/δ(1−r²))C − λ − μ − ωr/δ√(1−r²)]`.
pub fn decoherence_rate(spec: &InitialStateSpec, cfg: &OscillatorConfig) -> f64 {
    let x = r2_ratio(spec);
    let c = cfg.coth();
    let (lam, mu, d) = (cfg.lambda, cfg.mu, spec.delta);
    2.0 * (lam * (d + x) * c + mu * (d - x) * c - lam - mu - cfg.omega * spec.r / (d * spec.one_minus_r2().sqrt()))
}

/// `t_deco = 1 / rate`; `+∞` when the rate is not positive (for example a
/// coherent state at zero temperature).
pub fn decoherence_time(spec: &InitialStateSpec, cfg: &OscillatorConfig) -> DecoherenceTime {
    DecoherenceTime::from_rate(decoherence_rate(spec, cfg), DecoherenceVariant::General)
}

/// Uncorrelated initial state: `t_deco = 1 / 2(λ+μ)(δC − 1)`.
pub fn decoherence_time_uncorrelated(delta: f64, cfg: &OscillatorConfig) -> DecoherenceTime {
    let rate = 2.0 * (cfg.lambda + cfg.mu) * (delta * cfg.coth() - 1.0);
    DecoherenceTime::from_rate(rate, DecoherenceVariant::R0)
}

/// High-temperature decoherence time. For `r = 0` this is written through the
/// thermal energy, `ħω / 4(λ+μ)δkT`.
pub fn decoherence_time_high_t(spec: &InitialStateSpec, cfg: &OscillatorConfig) -> DecoherenceTime {
    let tau = cfg.temp.tau();
    if spec.r == 0.0 {
        let kt = cfg.temp.thermal_energy(cfg.hbar, cfg.omega);
        let denom = 4.0 * (cfg.lambda + cfg.mu) * spec.delta * kt;
        return DecoherenceTime::from_rate(denom / (cfg.hbar * cfg.omega), DecoherenceVariant::HighTR0);
    }
    let x = r2_ratio(spec);
    let rate = 2.0 * (cfg.lambda * (spec.delta + x) + cfg.mu * (spec.delta - x)) * tau;
    DecoherenceTime::from_rate(rate, DecoherenceVariant::HighT)
}

/// Time at which thermal fluctuations in `σ(t)` become comparable with the
/// quantum ones (high-temperature form, `τ = 1/ε`).
pub fn statistical_time(spec: &InitialStateSpec, cfg: &OscillatorConfig) -> f64 {
    let inv = 1.0 / (spec.delta * spec.one_minus_r2());
    let bracket = cfg.lambda * (spec.delta + inv) + cfg.mu * (spec.delta - inv);
    let rate = 2.0 * cfg.temp.tau() * bracket;
    if rate > 0.0 {
        1.0 / rate
    } else {
        f64::INFINITY
    }
}

/// `t_rel ≈ 1/λ`.
pub fn relaxation_time(cfg: &OscillatorConfig) -> f64 {
    if cfg.lambda > 0.0 {
        1.0 / cfg.lambda
    } else {
        f64::INFINITY
    }
}

/// Linear short-time expansion of the off-diagonal coefficient,
/// `γ(t) ≈ (mω/4ħδ)(1 + rate·t)`.
///
/// The magnitude is positive: `γ = σ/(2ħ²σ_qq) > 0`, and the exact `γ(t)` is
/// the arbiter of the sign.
pub fn gamma_short_time(spec: &InitialStateSpec, cfg: &OscillatorConfig, t: f64) -> f64 {
    let g0 = cfg.m * cfg.omega / (4.0 * cfg.hbar * spec.delta);
    g0 * (1.0 + decoherence_rate(spec, cfg) * t)
}

/// Linear short-time expansion of the uncertainty function.
pub fn sigma_short_time(spec: &InitialStateSpec, cfg: &OscillatorConfig, t: f64) -> f64 {
    let inv = 1.0 / (spec.delta * spec.one_minus_r2());
    let c = cfg.coth();
    let slope = 2.0 * (cfg.lambda * (spec.delta + inv) * c + cfg.mu * (spec.delta - inv) * c - 2.0 * cfg.lambda);
    0.25 * cfg.hbar * cfg.hbar * (1.0 + slope * t)
}

/// Decay rate `(D_pp/ħ²)(q − q')²` of a coherence when momentum diffusion
/// dominates.
pub fn pure_decoherence_rate(d: &DiffusionCoefficients, hbar: f64, q: f64, q2: f64) -> f64 {
    let sep = q - q2;
    d.d_pp / (hbar * hbar) * sep * sep
}

/// Attenuation `exp[−(D_pp/ħ²)(q − q')² t]`; the diagonal is untouched.
pub fn pure_decoherence_factor(d: &DiffusionCoefficients, hbar: f64, q: f64, q2: f64, t: f64) -> f64 {
    (-pure_decoherence_rate(d, hbar, q, q2) * t).exp()
}

/// `ρ(q, q'; t)` from `ρ(q, q'; 0)` in the diffusion-dominated limit.
pub fn pure_decoherence_evolve(
    rho0: Complex64,
    d: &DiffusionCoefficients,
    hbar: f64,
    q: f64,
    q2: f64,
    t: f64,
) -> Complex64 {
    rho0 * pure_decoherence_factor(d, hbar, q, q2, t)
}

/// Ratio of the decoherence rate at separation `Δq` to the relaxation rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRatio {
    /// `(mω/2ħ)(Δq)² coth(ħω/2kT)`
    pub exact: f64,
    /// `(mkT/ħ²)(Δq)²`, the high-temperature form.
    pub high_t: f64,
}

impl RateRatio {
    pub fn exponent(&self) -> i32 {
        self.exact.log10().floor() as i32
    }
}

/// Decoherence rate over relaxation rate; an order-of-magnitude quantity.
/// Requires `μ = 0`.
pub fn rate_ratio(cfg: &OscillatorConfig, separation: f64) -> Result<RateRatio> {
    cfg.check()?;
    if cfg.mu != 0.0 {
        return Err(Error::param("mu", "rate ratio is defined for mu = 0"));
    }
    let sep2 = separation * separation;
    let exact = cfg.m * cfg.omega / (2.0 * cfg.hbar) * sep2 * cfg.coth();
    let kt = cfg.temp.thermal_energy(cfg.hbar, cfg.omega);
    let high_t = cfg.m * kt / (cfg.hbar * cfg.hbar) * sep2;
    Ok(RateRatio { exact, high_t })
}

/// SI-unit configuration of a macroscopic body of `mass_kg` at
/// `temperature_k`, oscillating at `omega` rad/s.
pub fn macroscopic_config(mass_kg: f64, temperature_k: f64, omega: f64, lambda: f64) -> Result<OscillatorConfig> {
    let temp = TemperatureSpec::from_thermal_energy(K_B * temperature_k, HBAR_SI, omega)?;
    OscillatorConfig::new(mass_kg, omega, lambda, 0.0, HBAR_SI, temp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Quantum,
    QuantumStatistical,
    ClassicalStatistical,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Quantum => "quantum",
            Regime::QuantumStatistical => "quantum-statistical",
            Regime::ClassicalStatistical => "classical-statistical",
        }
    }
}

/// Asymptotic uncertainty levels: Bose–Einstein `(ħ²/4)C²`, Heisenberg
/// `ħ²/4` and Maxwell–Boltzmann `(kT/ω)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    pub sigma_be: f64,
    pub sigma_heisenberg: f64,
    pub sigma_mb: f64,
    pub regime: Regime,
}

/// Relative band for "agreement" in the regime classification.
pub const REGIME_BAND: f64 = 0.01;

pub fn regime_report(cfg: &OscillatorConfig) -> RegimeReport {
    let c = cfg.coth();
    let h0 = 0.25 * cfg.hbar * cfg.hbar;
    let sigma_be = h0 * c * c;
    let kt = cfg.temp.thermal_energy(cfg.hbar, cfg.omega);
    let sigma_mb = (kt / cfg.omega).powi(2);
    let ratio = sigma_be / sigma_mb;
    let regime = if (ratio - 1.0).abs() <= REGIME_BAND {
        Regime::ClassicalStatistical
    } else if c < 1.0 + REGIME_BAND {
        Regime::Quantum
    } else {
        Regime::QuantumStatistical
    };
    RegimeReport {
        sigma_be,
        sigma_heisenberg: h0,
        sigma_mb,
        regime,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeScales {
    pub t_deco: DecoherenceTime,
    pub t_deco_order: DecoherenceTime,
    pub t_deco_high_t: DecoherenceTime,
    #[serde(with = "inf_as_string")]
    pub t_d: f64,
    #[serde(with = "inf_as_string")]
    pub t_rel: f64,
}

pub fn time_scales(spec: &InitialStateSpec, cfg: &OscillatorConfig) -> Result<TimeScales> {
    spec.check()?;
    cfg.check()?;
    let s_qq0 = cfg.hbar * spec.delta / (2.0 * cfg.m * cfg.omega);
    let t_deco = if spec.r == 0.0 {
        decoherence_time_uncorrelated(spec.delta, cfg)
    } else {
        decoherence_time(spec, cfg)
    };
    Ok(TimeScales {
        t_deco,
        t_deco_order: decoherence_time_order(cfg, s_qq0),
        t_deco_high_t: decoherence_time_high_t(spec, cfg),
        t_d: statistical_time(spec, cfg),
        t_rel: relaxation_time(cfg),
    })
}

/// Everything `deco` reports, with the inputs echoed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoherenceReport {
    pub config: OscillatorConfig,
    pub initial: InitialStateSpec,
    pub time_scales: TimeScales,
    pub regime: RegimeReport,
}

impl DecoherenceReport {
    pub fn new(spec: &InitialStateSpec, cfg: &OscillatorConfig) -> Result<Self> {
        Ok(Self {
            config: *cfg,
            initial: *spec,
            time_scales: time_scales(spec, cfg)?,
            regime: regime_report(cfg),
        })
    }

    /// Flat `key = value` block.
    pub fn to_key_values(&self) -> String {
        let c = &self.config;
        let ts = &self.time_scales;
        let rg = &self.regime;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("m", fmt_f64(c.m));
        kv("omega", fmt_f64(c.omega));
        kv("lambda", fmt_f64(c.lambda));
        kv("mu", fmt_f64(c.mu));
        kv("hbar", fmt_f64(c.hbar));
        kv("temp.C", fmt_f64(c.coth()));
        kv("init.delta", fmt_f64(self.initial.delta));
        kv("init.r", fmt_f64(self.initial.r));
        kv("t_deco", fmt_f64(ts.t_deco.time));
        kv("t_deco.variant", ts.t_deco.variant.tag().into());
        kv("t_deco_order", fmt_f64(ts.t_deco_order.time));
        kv("t_deco_order.variant", ts.t_deco_order.variant.tag().into());
        kv("t_deco_high_T", fmt_f64(ts.t_deco_high_t.time));
        kv("t_deco_high_T.variant", ts.t_deco_high_t.variant.tag().into());
        kv("t_d", fmt_f64(ts.t_d));
        kv("t_rel", fmt_f64(ts.t_rel));
        kv("sigma_be", fmt_f64(rg.sigma_be));
        kv("sigma_heisenberg", fmt_f64(rg.sigma_heisenberg));
        kv("sigma_mb", fmt_f64(rg.sigma_mb));
        kv("regime", rg.regime.label().into());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{initial_state, thermal_coefficients};
    use crate::propagate::{covariance_lyapunov, sigma_det_closed};
    use crate::states::alpha_beta_gamma;

    fn cfg(lambda: f64, mu: f64, c: f64) -> OscillatorConfig {
        OscillatorConfig::natural(lambda, mu, c).unwrap()
    }

    fn spec(delta: f64, r: f64) -> InitialStateSpec {
        InitialStateSpec::centered(delta, r).unwrap()
    }

    fn tau_config(lambda: f64, mu: f64, tau: f64) -> OscillatorConfig {
        let temp = TemperatureSpec::from_epsilon(1.0 / tau).unwrap();
        OscillatorConfig::new(1.0, 1.0, lambda, mu, 1.0, temp).unwrap()
    }

    #[test]
    fn order_estimate() {
        let t = decoherence_time_order(&cfg(0.2, 0.1, 3.0), 2.0);
        assert!((t.time - 10.0 / 9.0).abs() < 1e-15);
        assert_eq!(t.variant, DecoherenceVariant::OrderEstimate);
        let half = decoherence_time_order(&cfg(0.2, 0.1, 3.0), 4.0);
        assert!((half.time - 0.5 * t.time).abs() < 1e-15);
        assert!(decoherence_time_order(&cfg(0.2, 0.1, 1e12), 2.0).time < 1e-11);
    }

    #[test]
    fn decoherence_time_table() {
        let t = decoherence_time(&spec(4.0, 0.0), &cfg(0.2, 0.1, 3.0)).time;
        assert!((t - 1.0 / 6.6).abs() < 1e-15);
        assert!((t - 0.15152).abs() < 1e-5);
        assert_eq!(t, decoherence_time_uncorrelated(4.0, &cfg(0.2, 0.1, 3.0)).time);

        let zero_t = cfg(0.2, 0.0, 1.0);
        assert_eq!(decoherence_time(&spec(1.0, 0.0), &zero_t).time, f64::INFINITY);
        let t = decoherence_time(&spec(4.0, 0.0), &zero_t).time;
        assert!((t - 1.0 / 1.2).abs() < 1e-15);
    }

    #[test]
    fn high_temperature_forms() {
        let c = tau_config(0.2, 0.1, 10.0);
        let t = decoherence_time_high_t(&spec(4.0, 0.0), &c);
        assert_eq!(t.variant, DecoherenceVariant::HighTR0);
        assert!((t.time - 1.0 / 24.0).abs() < 1e-14);
        let td = statistical_time(&spec(4.0, 0.0), &c);
        assert!((td - 1.0 / 24.5).abs() < 1e-14);
        assert!((td - 0.040816).abs() < 1e-6);

        // the general high-T form with r = 0 agrees with the kT form
        let almost = InitialStateSpec::centered(4.0, 1e-300).unwrap();
        let g = decoherence_time_high_t(&almost, &c);
        assert_eq!(g.variant, DecoherenceVariant::HighT);
        assert!((g.time - t.time).abs() < 1e-14);

        let ratios: Vec<f64> = [4.0, 8.0, 16.0]
            .iter()
            .map(|&d| decoherence_time_high_t(&spec(d, 0.0), &c).time / statistical_time(&spec(d, 0.0), &c))
            .collect();
        assert!(ratios[2] >= 0.9 && ratios[2] <= 1.1);
        assert!((ratios[0] - 1.0).abs() > (ratios[1] - 1.0).abs());
        assert!((ratios[1] - 1.0).abs() > (ratios[2] - 1.0).abs());
    }

    #[test]
    fn gamma_short_time_matches_exact() {
        let c = cfg(0.2, 0.1, 3.0);
        let s = spec(1.0, 0.0);
        assert!((gamma_short_time(&s, &c, 0.0) - 0.25).abs() < 1e-15);
        let s0 = initial_state(&s, &c).unwrap();
        assert!((alpha_beta_gamma(&s0, 1.0).gamma - 0.25).abs() < 1e-15);

        let s = spec(4.0, 0.0);
        let s0 = initial_state(&s, &c).unwrap();
        let d = thermal_coefficients(&c).unwrap();
        let h = 1e-4;
        let g = |t: f64| alpha_beta_gamma(&covariance_lyapunov(&s0, &c, &d, t).unwrap(), 1.0).gamma;
        let fd_slope = (g(h) - g(0.0)) / h;
        let slope = gamma_short_time(&s, &c, 1.0) - gamma_short_time(&s, &c, 0.0);
        assert!((fd_slope - slope).abs() / slope.abs() < 1e-3);
        assert!(slope > 0.0);

        let pure = cfg(0.2, 0.0, 1.0);
        let s = spec(1.0, 0.0);
        assert_eq!(gamma_short_time(&s, &pure, 5.0), gamma_short_time(&s, &pure, 0.0));
    }

    #[test]
    fn rate_equals_gamma_linear_coefficient() {
        for (s, c) in [
            (spec(4.0, 0.0), cfg(0.2, 0.1, 3.0)),
            (spec(2.5, 0.4), cfg(0.15, 0.05, 7.0)),
            (spec(0.8, -0.6), cfg(0.3, 0.0, 1.5)),
        ] {
            let g0 = gamma_short_time(&s, &c, 0.0);
            let coeff = gamma_short_time(&s, &c, 1.0) / g0 - 1.0;
            let t = decoherence_time(&s, &c).time;
            assert!((coeff - 1.0 / t).abs() <= 1e-10 * coeff.abs().max(1.0));
        }
    }

    #[test]
    fn sigma_short_time_slope() {
        let c = cfg(0.2, 0.1, 3.0);
        let s = spec(4.0, 0.0);
        assert_eq!(sigma_short_time(&s, &c, 0.0), 0.25);
        let h = 1e-5;
        let fd = (sigma_det_closed(&s, &c, h) - sigma_det_closed(&s, &c, -h)) / (2.0 * h);
        let slope = sigma_short_time(&s, &c, 1.0) - sigma_short_time(&s, &c, 0.0);
        assert!((fd - slope).abs() / slope.abs() < 1e-6, "{fd} vs {slope}");
        let pure = cfg(0.2, 0.0, 1.0);
        let s = spec(1.0, 0.0);
        assert_eq!(sigma_short_time(&s, &pure, 3.0), 0.25);
    }

    #[test]
    fn pure_decoherence() {
        let d = thermal_coefficients(&cfg(0.2, 0.1, 3.0)).unwrap();
        assert_eq!(pure_decoherence_factor(&d, 1.0, 0.7, 0.7, 100.0), 1.0);
        let f = pure_decoherence_factor(&d, 1.0, 1.0, -1.0, 1.0);
        assert!((f - (-1.8f64).exp()).abs() < 1e-15);
        assert!((f - 0.16530).abs() < 1e-5);
        assert!((pure_decoherence_rate(&d, 1.0, 1.0, -1.0) - 1.8).abs() < 1e-15);
        let z = pure_decoherence_evolve(Complex64::new(0.3, -0.4), &d, 1.0, 1.0, -1.0, 1.0);
        assert!((z.norm() - 0.5 * f).abs() < 1e-15);
    }

    #[test]
    fn macroscopic_rate_ratio() {
        let c = macroscopic_config(1e-3, 300.0, 1.0, 1.0).unwrap();
        let r = rate_ratio(&c, 1e-2).unwrap();
        assert!((r.exact - r.high_t).abs() / r.high_t < 1e-9);
        assert_eq!(r.exponent(), 40);
        assert!((r.exact / 3.7244e40 - 1.0).abs() < 1e-3);
        let half = rate_ratio(&c, 0.5e-2).unwrap();
        assert!((half.exact * 4.0 - r.exact).abs() / r.exact < 1e-14);

        let natural = rate_ratio(&cfg(0.2, 0.0, 3.0), 1.0).unwrap();
        assert!((natural.exact - 1.5).abs() < 1e-15);
        assert!(rate_ratio(&cfg(0.2, 0.1, 3.0), 1.0).is_err());
    }

    #[test]
    fn regimes() {
        let r = regime_report(&cfg(0.2, 0.1, 1.0));
        assert_eq!((r.sigma_be, r.sigma_heisenberg), (0.25, 0.25));
        assert_eq!(r.regime, Regime::Quantum);

        let r = regime_report(&cfg(0.2, 0.1, 3.0));
        assert!((r.sigma_be - 2.25).abs() < 1e-15);
        // kT = 1/ln 2 exactly at C = 3
        assert!((r.sigma_mb - 1.0 / 2f64.ln().powi(2)).abs() < 1e-14);
        assert!((r.sigma_mb - 2.0815).abs() < 5e-4);
        assert_eq!(r.regime, Regime::QuantumStatistical);

        let r = regime_report(&cfg(0.2, 0.1, 100.0));
        assert!((r.sigma_be / r.sigma_mb - 1.0).abs() < 1e-4);
        assert_eq!(r.regime, Regime::ClassicalStatistical);
    }

    #[test]
    fn t_deco_monotone_on_grid() {
        let mu = 0.05;
        let lambdas: Vec<f64> = (0..10).map(|i| 0.1 + 0.02 * i as f64).collect();
        let cs: Vec<f64> = (0..10).map(|i| 1.5 + 0.9 * i as f64).collect();
        let deltas: Vec<f64> = (0..10).map(|i| 1.0 + i as f64).collect();
        let t = |l: f64, c: f64, d: f64| decoherence_time(&spec(d, 0.0), &cfg(l, mu, c)).time;
        for i in 0..10 {
            for j in 0..10 {
                for k in 0..10 {
                    let v = t(lambdas[i], cs[j], deltas[k]);
                    if i + 1 < 10 {
                        assert!(t(lambdas[i + 1], cs[j], deltas[k]) < v);
                    }
                    if j + 1 < 10 {
                        assert!(t(lambdas[i], cs[j + 1], deltas[k]) < v);
                    }
                    if k + 1 < 10 {
                        assert!(t(lambdas[i], cs[j], deltas[k + 1]) < v);
                    }
                }
            }
        }
    }

    #[test]
    fn t_deco_same_scale_as_t_d() {
        for c in [10.0, 20.0, 50.0] {
            let conf = cfg(0.2, 0.1, c);
            for d in [2.0, 4.0, 8.0, 16.0] {
                let s = spec(d, 0.0);
                let ratio = decoherence_time(&s, &conf).time / statistical_time(&s, &conf);
                assert!((0.5..=2.0).contains(&ratio), "C={c} delta={d}: {ratio}");
            }
        }
    }

    #[test]
    fn decoherence_precedes_relaxation() {
        let c = cfg(0.2, 0.1, 3.0);
        let ts = time_scales(&spec(4.0, 0.0), &c).unwrap();
        assert!(ts.t_deco.time < ts.t_rel);
        assert_eq!(ts.t_rel, 5.0);
        assert_eq!(ts.t_deco.variant, DecoherenceVariant::R0);
    }

    #[test]
    fn sigma_be_interpolates() {
        let mut prev = 0.0;
        for c in [1.0, 1.2, 2.0, 5.0, 30.0, 300.0] {
            let r = regime_report(&cfg(0.2, 0.1, c));
            assert!(r.sigma_be >= r.sigma_heisenberg);
            assert_eq!(r.sigma_be == r.sigma_heisenberg, c == 1.0);
            let gap = (r.sigma_be / r.sigma_mb - 1.0).abs();
            if c > 1.0 {
                assert!(prev == 0.0 || gap < prev);
                prev = gap;
            }
        }
    }

    #[test]
    fn report_serializes_infinity_as_string() {
        let rep = DecoherenceReport::new(&spec(1.0, 0.0), &cfg(0.2, 0.0, 1.0)).unwrap();
        let json = serde_json::to_value(rep).unwrap();
        assert_eq!(json["time_scales"]["t_deco"]["time"], "inf");
        assert_eq!(json["time_scales"]["t_d"], "inf");
        let kv = rep.to_key_values();
        assert!(kv.contains("t_deco = inf\n"));
        assert!(kv.contains("regime = quantum\n"));
    }
}
