//! The acceptance battery: ten formula- and oracle-level checks, shared by
//! the `acceptance` test target and `lindho selftest`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classicality::{delta_cc, delta_qd, delta_qd_asymptotic};
use crate::decoherence::{
    decoherence_time, decoherence_time_uncorrelated, macroscopic_config, rate_ratio, regime_report, statistical_time,
};
use crate::error::Result;
use crate::fpe::{covering_domain, evolve_wigner, l2_distance, linf_distance, max_stable_dt, FpeRunSpec};
use crate::model::{
    initial_state, thermal_coefficients, GaussianState, InitialStateSpec, OscillatorConfig, TemperatureSpec,
};
use crate::propagate::{
    asymptotic_covariance, closed_form_state, covariance_lyapunov, integrate_moments_rk4, max_relative_deviation,
    sigma_det_closed,
};
use crate::states::{density_matrix, render_grid, wigner, wigner_by_fourier, wigner_marginal_q};

const SEED: u64 = 0x5eed_0001;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<28} {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

type Check = fn() -> Result<(bool, String)>;

pub const CRITERIA: [(u8, &str, Check); 10] = [
    (1, "asymptotic-decoherence", asymptotic_decoherence),
    (2, "triple-route-covariance", triple_route),
    (3, "uncertainty-inequality", uncertainty),
    (4, "decoherence-time-table", decoherence_table),
    (5, "tdeco-vs-td-scale", deco_vs_statistical),
    (6, "macroscopic-estimate", macroscopic),
    (7, "fpe-oracle", fpe_oracle),
    (8, "wigner-density-consistency", wigner_density),
    (9, "regime-interpolation", regimes),
    (10, "monotonicity-battery", monotonicity),
];

pub fn run_one(id: u8) -> Option<CriterionResult> {
    let &(id, name, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let (passed, detail) = match check() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    Some(CriterionResult {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|c| run_one(c.0)).collect()
}

fn reference() -> Result<(OscillatorConfig, InitialStateSpec)> {
    Ok((
        OscillatorConfig::natural(0.2, 0.1, 3.0)?,
        InitialStateSpec::centered(4.0, 0.0)?,
    ))
}

fn asymptotic_decoherence() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for c in [1.5, 3.0, 20.0] {
        let cfg = OscillatorConfig::natural(0.2, 0.1, c)?;
        let d = thermal_coefficients(&cfg)?;
        let closed = cfg.temp.epsilon().tanh();
        let asym = delta_qd(&asymptotic_covariance(&cfg)?, cfg.hbar);
        let s0 = initial_state(&InitialStateSpec::centered(4.0, 0.0)?, &cfg)?;
        let late = delta_qd(&covariance_lyapunov(&s0, &cfg, &d, 20.0 / cfg.lambda)?, cfg.hbar);
        let helper = delta_qd_asymptotic(&cfg);
        for v in [asym, late, helper] {
            worst = worst.max((v - closed).abs());
        }
    }
    Ok((worst < 1e-8, format!("max disagreement {worst:.2e} (tol 1e-8)")))
}

fn triple_route() -> Result<(bool, String)> {
    let (cfg, spec) = reference()?;
    let d = thermal_coefficients(&cfg)?;
    let s0 = initial_state(&spec, &cfg)?;
    let rk4 = integrate_moments_rk4(&s0, &cfg, &d, 14.0, 1e-4)?;
    let mut worst = 0.0f64;
    for s in rk4.samples() {
        let closed = closed_form_state(&spec, &cfg, s.t)?;
        let lyap = covariance_lyapunov(&s0, &cfg, &d, s.t)?;
        worst = worst
            .max(max_relative_deviation(s, &lyap))
            .max(max_relative_deviation(&closed, &lyap))
            .max(max_relative_deviation(s, &closed));
    }
    Ok((worst < 1e-6, format!("max relative deviation {worst:.2e} (tol 1e-6)")))
}

fn random_valid_case(rng: &mut ChaCha8Rng) -> Result<(OscillatorConfig, InitialStateSpec)> {
    let lambda: f64 = rng.gen_range(0.01..0.5);
    let mu = lambda * rng.gen_range(0.0..0.95);
    let c_min = lambda / (lambda * lambda - mu * mu).sqrt();
    // one case in ten sits exactly on the thermal-constraint boundary
    let coth = if rng.gen_bool(0.1) {
        c_min
    } else {
        c_min * (1.0 + rng.gen_range(0.0..4.0f64))
    };
    let temp = TemperatureSpec::from_coth(coth)?;
    let cfg = OscillatorConfig::new(rng.gen_range(0.5..2.0), rng.gen_range(0.6..2.0), lambda, mu, 1.0, temp)?;
    let delta = 10f64.powf(rng.gen_range(-1.0..1.0));
    let spec = InitialStateSpec::centered(delta, rng.gen_range(-0.95..0.95))?;
    Ok((cfg, spec))
}

fn uncertainty() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = f64::INFINITY;
    let mut count = 0;
    while count < 10_000 {
        let (cfg, spec) = random_valid_case(&mut rng)?;
        let d = thermal_coefficients(&cfg)?;
        let s0 = initial_state(&spec, &cfg)?;
        let floor = cfg.hbar * cfg.hbar / 4.0;
        for k in 0..10 {
            let t = if k == 0 { 0.0 } else { rng.gen_range(0.0..40.0) };
            let closed = sigma_det_closed(&spec, &cfg, t);
            let lyap = covariance_lyapunov(&s0, &cfg, &d, t)?.sigma_det();
            worst = worst.min(closed - floor).min(lyap - floor);
            count += 1;
        }
    }
    Ok((
        worst >= -1e-12,
        format!("{count} points, min sigma - hbar^2/4 = {worst:.3e} (tol -1e-12)"),
    ))
}

fn gamma_exact(s: &GaussianState, hbar: f64) -> f64 {
    s.sigma_det() / (2.0 * hbar * hbar * s.s_qq)
}

fn decoherence_table() -> Result<(bool, String)> {
    let (cfg, spec) = reference()?;
    let t47 = decoherence_time_uncorrelated(4.0, &cfg).time;
    let zero_t = OscillatorConfig::natural(0.2, 0.0, 1.0)?;
    let t48 = decoherence_time_uncorrelated(4.0, &zero_t).time;
    let coherent = decoherence_time(&InitialStateSpec::centered(1.0, 0.0)?, &zero_t).time;
    let table_ok = (t47 - 0.15152).abs() < 5e-6 && (t48 - 0.8333).abs() < 5e-5 && coherent == f64::INFINITY;

    // short-time slope of ln γ from the exact propagation
    let d = thermal_coefficients(&cfg)?;
    let s0 = initial_state(&spec, &cfg)?;
    let h = 1e-5;
    let g0 = gamma_exact(&s0, cfg.hbar);
    let gp = gamma_exact(&covariance_lyapunov(&s0, &cfg, &d, h)?, cfg.hbar);
    let gm = gamma_exact(&covariance_lyapunov(&s0, &cfg, &d, 2.0 * h)?, cfg.hbar);
    // second-order one-sided difference
    let slope = (-3.0 * g0.ln() + 4.0 * gp.ln() - gm.ln()) / (2.0 * h);
    let rel = (slope * decoherence_time(&spec, &cfg).time - 1.0).abs();
    Ok((
        table_ok && rel < 0.01,
        format!("t47={t47:.5} t48={t48:.4} t(T=0,delta=1)={coherent} fd-rate rel err {rel:.2e}"),
    ))
}

fn deco_vs_statistical() -> Result<(bool, String)> {
    let temp = TemperatureSpec::from_epsilon(0.1)?;
    let cfg = OscillatorConfig::new(1.0, 1.0, 0.2, 0.1, 1.0, temp)?;
    let mut ratios = Vec::new();
    for delta in [4.0, 8.0, 16.0] {
        let spec = InitialStateSpec::centered(delta, 0.0)?;
        ratios.push(decoherence_time(&spec, &cfg).time / statistical_time(&spec, &cfg));
    }
    let in_band = ratios.iter().all(|r| (0.8..=1.25).contains(r));
    let approaching = ratios.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
    Ok((
        in_band && approaching,
        format!("ratios {:.4} {:.4} {:.4}", ratios[0], ratios[1], ratios[2]),
    ))
}

fn macroscopic() -> Result<(bool, String)> {
    let cfg = macroscopic_config(1e-3, 300.0, 1.0, 1e-3)?;
    let ratio = rate_ratio(&cfg, 1e-2)?;
    let e = ratio.exponent();
    Ok((
        (40..=41).contains(&e),
        format!("ratio {:.4e}, exponent {e}", ratio.exact),
    ))
}

fn fpe_oracle() -> Result<(bool, String)> {
    let (cfg, spec) = reference()?;
    let d = thermal_coefficients(&cfg)?;

    let inf = asymptotic_covariance(&cfg)?;
    let stat_grid = covering_domain(&inf, None, 6.0, 256, 256)?;
    let w_inf = render_grid(&inf, stat_grid)?;
    let dt = 0.9 * max_stable_dt(&stat_grid, &cfg, &d);
    let stat = evolve_wigner(&w_inf, &cfg, &d, &FpeRunSpec::new(dt, 1.0))?;
    let drift = linf_distance(&stat.grid, &w_inf);

    let s0 = initial_state(&spec, &cfg)?;
    let exact = covariance_lyapunov(&s0, &cfg, &d, 0.5)?;
    let l2_at = |n: usize| -> Result<f64> {
        let g = covering_domain(&s0, Some(&inf), 6.0, n, n)?;
        let out = evolve_wigner(&render_grid(&s0, g)?, &cfg, &d, &FpeRunSpec::new(2e-4, 0.5))?;
        Ok(l2_distance(&out.grid, &render_grid(&exact, g)?))
    };
    let errs = [l2_at(128)?, l2_at(256)?, l2_at(512)?];
    let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
    let pass = drift < 2e-3 && errs[1] < 1e-3 && ratios.iter().all(|&r| r >= 3.0);
    Ok((
        pass,
        format!(
            "stationary Linf {drift:.2e}; L2(128/256/512) {:.2e}/{:.2e}/{:.2e}; ratios {:.2}/{:.2}",
            errs[0], errs[1], errs[2], ratios[0], ratios[1]
        ),
    ))
}

fn wigner_density() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (cfg, spec) = random_valid_case(&mut rng)?;
        let d = thermal_coefficients(&cfg)?;
        let s0 = initial_state(&spec, &cfg)?.translated(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let s = covariance_lyapunov(&s0, &cfg, &d, rng.gen_range(0.0..10.0))?;
        let q = s.mean_q + s.s_qq.sqrt() * rng.gen_range(-2.5..2.5);
        let p = s.mean_p + s.s_pp.sqrt() * rng.gen_range(-2.5..2.5);
        let marginal = (wigner_marginal_q(&s, q) - density_matrix(&s, cfg.hbar, q, q).re).abs();
        let fourier = (wigner_by_fourier(&s, cfg.hbar, q, p) - wigner(&s, q, p)).abs();
        worst = worst.max(marginal).max(fourier);
    }
    Ok((
        worst < 1e-6,
        format!("100 states, max abs error {worst:.2e} (tol 1e-6)"),
    ))
}

fn regimes() -> Result<(bool, String)> {
    let zero = regime_report(&OscillatorConfig::natural(0.2, 0.1, 1.0)?);
    let exact_zero = zero.sigma_be == zero.sigma_heisenberg;
    let hot = regime_report(&OscillatorConfig::natural(0.2, 0.1, 100.0)?);
    let gap = hot.sigma_be / hot.sigma_mb - 1.0;
    Ok((
        exact_zero && gap.abs() < 1e-4,
        format!(
            "sigma_BE(T=0)={} ; sigma_BE/sigma_MB-1 at C=100: {gap:.3e}",
            zero.sigma_be
        ),
    ))
}

fn monotonicity() -> Result<(bool, String)> {
    let mut failures = Vec::new();

    let cs: Vec<f64> = (0..200).map(|k| 1.0 + 0.1 * k as f64).collect();
    let qd: Vec<f64> = cs
        .iter()
        .map(|&c| Ok(delta_qd_asymptotic(&OscillatorConfig::natural(0.2, 0.1, c)?)))
        .collect::<Result<_>>()?;
    if qd.windows(2).any(|w| w[1] >= w[0]) {
        failures.push("delta_QD(inf) vs C");
    }

    // 10 x 10 x 10 grid over (λ, C, δ) at μ = 0.1, r = 0
    let lambdas: Vec<f64> = (0..10).map(|k| 0.15 + 0.05 * k as f64).collect();
    let cs: Vec<f64> = (0..10).map(|k| 1.5 + 0.5 * k as f64).collect();
    let deltas: Vec<f64> = (0..10).map(|k| 1.5 + 0.5 * k as f64).collect();
    let t = |l: f64, c: f64, dl: f64| -> Result<f64> {
        let cfg = OscillatorConfig::natural(l, 0.1, c)?;
        Ok(decoherence_time(&InitialStateSpec::centered(dl, 0.0)?, &cfg).time)
    };
    let mut grid = vec![0.0; 1000];
    for (i, &l) in lambdas.iter().enumerate() {
        for (j, &c) in cs.iter().enumerate() {
            for (k, &dl) in deltas.iter().enumerate() {
                grid[(i * 10 + j) * 10 + k] = t(l, c, dl)?;
            }
        }
    }
    let at = |i: usize, j: usize, k: usize| grid[(i * 10 + j) * 10 + k];
    let (mut in_l, mut in_c, mut in_d) = (true, true, true);
    for a in 0..10 {
        for b in 0..10 {
            for k in 1..10 {
                in_l &= at(k, a, b) < at(k - 1, a, b);
                in_c &= at(a, k, b) < at(a, k - 1, b);
                in_d &= at(a, b, k) < at(a, b, k - 1);
            }
        }
    }
    for (ok, what) in [
        (in_l, "t_deco vs lambda"),
        (in_c, "t_deco vs C"),
        (in_d, "t_deco vs delta"),
    ] {
        if !ok {
            failures.push(what);
        }
    }

    let (cfg, _) = reference()?;
    let d = thermal_coefficients(&cfg)?;
    let mut prev = (f64::INFINITY, f64::INFINITY);
    let mut row = Vec::new();
    for delta in [1.0, 2.0, 4.0, 8.0] {
        let s0 = initial_state(&InitialStateSpec::centered(delta, 0.0)?, &cfg)?;
        let s = covariance_lyapunov(&s0, &cfg, &d, 0.5)?;
        let cur = (delta_qd(&s, cfg.hbar), delta_cc(&s));
        if cur.0 >= prev.0 {
            failures.push("delta_QD(t=0.5) vs delta");
        }
        if cur.1 >= prev.1 {
            failures.push("delta_CC(t=0.5) vs delta");
        }
        row.push(format!("({:.3},{:.3})", cur.0, cur.1));
        prev = cur;
    }
    let detail = if failures.is_empty() {
        format!("all monotone; (qd,cc) at t=0.5: {}", row.join(" "))
    } else {
        format!("violations: {}", failures.join(", "))
    };
    Ok((failures.is_empty(), detail))
}
