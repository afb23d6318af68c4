//! Coordinate-representation density matrix and Wigner function of a
//! Gaussian state, plus sampled grids of both.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{csv_row, fmt_f64, parse_f64};
use crate::model::GaussianState;
use crate::quadrature::simpson_refined;

/// Coefficients of the density matrix in `(Σ, Δ) = ((q+q')/2, q−q')`:
/// `α` sets the diagonal width, `γ` the off-diagonal width and `β` the
/// position–momentum correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaBetaGamma {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl AlphaBetaGamma {
    /// Inverse map back to `(σ_qq, σ_pp, σ_pq)`.
    pub fn covariance(&self, hbar: f64) -> (f64, f64, f64) {
        let s_qq = 0.5 / self.alpha;
        let sigma = hbar * hbar * self.gamma / self.alpha;
        let s_pq = self.beta * hbar * s_qq;
        (s_qq, (sigma + s_pq * s_pq) / s_qq, s_pq)
    }
}

pub fn alpha_beta_gamma(state: &GaussianState, hbar: f64) -> AlphaBetaGamma {
    AlphaBetaGamma {
        alpha: 0.5 / state.s_qq,
        beta: state.s_pq / (hbar * state.s_qq),
        gamma: state.sigma_det() / (2.0 * hbar * hbar * state.s_qq),
    }
}

/// `⟨q|ρ|q'⟩` written in terms of the moments.
pub fn density_matrix(state: &GaussianState, hbar: f64, q: f64, q2: f64) -> Complex64 {
    let s_qq = state.s_qq;
    let centre = 0.5 * (q + q2) - state.mean_q;
    let diff = q - q2;
    let re = -centre * centre / (2.0 * s_qq) - state.sigma_det() / (2.0 * hbar * hbar * s_qq) * diff * diff;
    let im = state.s_pq / (hbar * s_qq) * centre * diff + state.mean_p / hbar * diff;
    Complex64::new(re, im).exp() / (2.0 * PI * s_qq).sqrt()
}

/// The same density matrix evaluated through `(α, β, γ)` in the variables
/// `Σ = (q+q')/2`, `Δ = q − q'`.
pub fn density_sigma_delta(state: &GaussianState, hbar: f64, sum: f64, delta: f64) -> Complex64 {
    let AlphaBetaGamma { alpha, beta, gamma } = alpha_beta_gamma(state, hbar);
    let (mq, mp) = (state.mean_q, state.mean_p);
    let re = -alpha * sum * sum - gamma * delta * delta + 2.0 * alpha * mq * sum - alpha * mq * mq;
    let im = beta * sum * delta + (mp / hbar - beta * mq) * delta;
    Complex64::new(re, im).exp() * (alpha / PI).sqrt()
}

/// Wigner function from the covariance matrix.
pub fn wigner(state: &GaussianState, q: f64, p: f64) -> f64 {
    let sigma = state.sigma_det();
    let (x, y) = (q - state.mean_q, p - state.mean_p);
    let form = state.s_pp * x * x + state.s_qq * y * y - 2.0 * state.s_pq * x * y;
    (-form / (2.0 * sigma)).exp() / (2.0 * PI * sigma.sqrt())
}

/// Wigner function as the Wigner transform of the `(α, β, γ)` density matrix.
pub fn wigner_transform_form(state: &GaussianState, hbar: f64, q: f64, p: f64) -> f64 {
    let AlphaBetaGamma { alpha, beta, gamma } = alpha_beta_gamma(state, hbar);
    let (x, y) = (q - state.mean_q, p - state.mean_p);
    let ridge = hbar * beta * x - y;
    let expo = -ridge * ridge / (4.0 * hbar * hbar * gamma) - alpha * x * x;
    (alpha / gamma).sqrt() * expo.exp() / (2.0 * PI * hbar)
}

/// `W(q, p) = (1/2πħ) ∫ ρ(q + Δ/2, q − Δ/2) e^{−ipΔ/ħ} dΔ` by Simpson
/// quadrature over ±8 standard deviations of the off-diagonal profile.
pub fn wigner_by_fourier(state: &GaussianState, hbar: f64, q: f64, p: f64) -> f64 {
    let gamma = alpha_beta_gamma(state, hbar).gamma;
    let half = 8.0 / (2.0 * gamma).sqrt();
    let integrand = |delta: f64| {
        let rho = density_sigma_delta(state, hbar, q, delta);
        (rho * Complex64::from_polar(1.0, -p * delta / hbar)).re
    };
    simpson_refined(integrand, -half, half, 1e-12).0 / (2.0 * PI * hbar)
}

/// `∫ W(q, p) dp` by Simpson quadrature over ±8 momentum standard deviations
/// around the conditional mean.
pub fn wigner_marginal_q(state: &GaussianState, q: f64) -> f64 {
    let sd = state.s_pp.sqrt();
    let centre = state.mean_p + state.s_pq / state.s_qq * (q - state.mean_q);
    simpson_refined(|p| wigner(state, q, p), centre - 8.0 * sd, centre + 8.0 * sd, 1e-12).0
}

/// `∫ ρ(q, q) dq` by Simpson quadrature over ±8 standard deviations.
pub fn density_trace(state: &GaussianState, hbar: f64) -> f64 {
    let sd = state.s_qq.sqrt();
    simpson_refined(
        |q| density_matrix(state, hbar, q, q).re,
        state.mean_q - 8.0 * sd,
        state.mean_q + 8.0 * sd,
        1e-9,
    )
    .0
}

/// Lattice geometry; both endpoints of each axis are sample points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub n_q: usize,
    pub n_p: usize,
}

impl GridSpec {
    pub fn new(q: (f64, f64), p: (f64, f64), n_q: usize, n_p: usize) -> Result<Self> {
        let g = Self {
            q_min: q.0,
            q_max: q.1,
            p_min: p.0,
            p_max: p.1,
            n_q,
            n_p,
        };
        g.check()?;
        Ok(g)
    }

    /// Symmetric box of `±k` standard deviations of `state` around its means.
    pub fn covering(state: &GaussianState, k: f64, n_q: usize, n_p: usize) -> Result<Self> {
        let (hq, hp) = (k * state.s_qq.sqrt(), k * state.s_pp.sqrt());
        Self::new(
            (state.mean_q - hq, state.mean_q + hq),
            (state.mean_p - hp, state.mean_p + hp),
            n_q,
            n_p,
        )
    }

    pub fn check(&self) -> Result<()> {
        let finite = [self.q_min, self.q_max, self.p_min, self.p_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.q_max > self.q_min) || !(self.p_max > self.p_min) {
            return Err(Error::Invalid(format!("degenerate grid range {self:?}")));
        }
        if self.n_q < 3 || self.n_p < 3 {
            return Err(Error::Invalid("grid needs at least 3 points per axis".into()));
        }
        Ok(())
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / (self.n_q - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.n_p - 1) as f64
    }

    pub fn q(&self, i: usize) -> f64 {
        self.q_min + i as f64 * self.dq()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    pub fn len(&self) -> usize {
        self.n_q * self.n_p
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn header(&self) -> String {
        format!(
            "# {} {} {} {} {} {}",
            fmt_f64(self.q_min),
            fmt_f64(self.q_max),
            fmt_f64(self.p_min),
            fmt_f64(self.p_max),
            self.n_q,
            self.n_p
        )
    }
}

/// Real values on a `(q, p)` lattice, row-major with `q` as the slow axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl PhaseSpaceGrid {
    pub fn from_fn<F>(spec: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        spec.check()?;
        let mut values = vec![0.0; spec.len()];
        values.par_chunks_mut(spec.n_p).enumerate().for_each(|(i, row)| {
            let q = spec.q(i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(q, spec.p(j));
            }
        });
        Ok(Self { spec, values })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.n_p + j]
    }

    pub fn cell_area(&self) -> f64 {
        self.spec.dq() * self.spec.dp()
    }

    /// Riemann sum `Σ W Δq Δp`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Header line with the geometry, then one row per `q` value.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 25 + 128);
        out.push_str(&self.spec.header());
        out.push('\n');
        for row in self.values.chunks(self.spec.n_p) {
            let _ = writeln!(out, "{}", csv_row(row));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let bad = |m: &str| Error::Invalid(format!("grid csv: {m}"));
        let head = lines.next().ok_or_else(|| bad("empty input"))?;
        let fields: Vec<&str> = head
            .strip_prefix('#')
            .ok_or_else(|| bad("missing `#` header"))?
            .split_whitespace()
            .collect();
        if fields.len() != 6 {
            return Err(bad("header needs 6 fields"));
        }
        let num = |s: &str| parse_f64(s).ok_or_else(|| bad("bad number in header"));
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad("bad size in header"));
        let spec = GridSpec::new(
            (num(fields[0])?, num(fields[1])?),
            (num(fields[2])?, num(fields[3])?),
            int(fields[4])?,
            int(fields[5])?,
        )?;
        let mut values = Vec::with_capacity(spec.len());
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let row: Vec<f64> = line
                .split(',')
                .map(|s| parse_f64(s).ok_or_else(|| bad("bad value")))
                .collect::<Result<_>>()?;
            if row.len() != spec.n_p {
                return Err(bad("row length does not match n_p"));
            }
            values.extend(row);
        }
        if values.len() != spec.len() {
            return Err(bad("row count does not match n_q"));
        }
        Ok(Self { spec, values })
    }
}

/// Samples the Wigner function of `state`.
pub fn render_grid(state: &GaussianState, spec: GridSpec) -> Result<PhaseSpaceGrid> {
    let s = *state;
    PhaseSpaceGrid::from_fn(spec, move |q, p| wigner(&s, q, p))
}

/// Which real view of a complex density-matrix grid to export.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityPart {
    Abs,
    Re,
    Im,
}

/// Complex `ρ(q, q')` on a square lattice, row-major with `q` slow.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub q_min: f64,
    pub q_max: f64,
    pub n: usize,
    pub values: Vec<Complex64>,
}

impl DensityGrid {
    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / (self.n - 1) as f64
    }

    pub fn q(&self, i: usize) -> f64 {
        self.q_min + i as f64 * self.dq()
    }

    pub fn get(&self, i: usize, k: usize) -> Complex64 {
        self.values[i * self.n + k]
    }

    pub fn to_csv(&self, part: DensityPart) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# {} {} {} {} {} {}",
            fmt_f64(self.q_min),
            fmt_f64(self.q_max),
            fmt_f64(self.q_min),
            fmt_f64(self.q_max),
            self.n,
            self.n
        );
        for row in self.values.chunks(self.n) {
            let real: Vec<f64> = row
                .iter()
                .map(|z| match part {
                    DensityPart::Abs => z.norm(),
                    DensityPart::Re => z.re,
                    DensityPart::Im => z.im,
                })
                .collect();
            let _ = writeln!(out, "{}", csv_row(&real));
        }
        out
    }
}

pub fn density_grid(state: &GaussianState, hbar: f64, q_range: (f64, f64), n: usize) -> Result<DensityGrid> {
    let (q_min, q_max) = q_range;
    if !(q_max > q_min) || !q_min.is_finite() || !q_max.is_finite() || n < 3 {
        return Err(Error::Invalid(format!(
            "degenerate density grid ({q_min}, {q_max}) x {n}"
        )));
    }
    let dq = (q_max - q_min) / (n - 1) as f64;
    let mut values = vec![Complex64::new(0.0, 0.0); n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let q = q_min + i as f64 * dq;
        for (k, v) in row.iter_mut().enumerate() {
            *v = density_matrix(state, hbar, q, q_min + k as f64 * dq);
        }
    });
    Ok(DensityGrid {
        q_min,
        q_max,
        n,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{initial_state, InitialStateSpec, OscillatorConfig};
    use crate::propagate::asymptotic_covariance;
    use proptest::prelude::*;

    fn stationary(c: f64) -> GaussianState {
        asymptotic_covariance(&OscillatorConfig::natural(0.2, 0.1, c).unwrap()).unwrap()
    }

    fn init(delta: f64, r: f64) -> GaussianState {
        let cfg = OscillatorConfig::natural(0.2, 0.1, 3.0).unwrap();
        initial_state(&InitialStateSpec::centered(delta, r).unwrap(), &cfg).unwrap()
    }

    fn sample_state() -> GaussianState {
        GaussianState {
            t: 1.0,
            mean_q: 0.4,
            mean_p: -1.1,
            s_qq: 1.3,
            s_pp: 0.9,
            s_pq: -0.35,
        }
    }

    #[test]
    fn density_diagonal_at_mean() {
        let s = sample_state();
        let v = density_matrix(&s, 1.0, s.mean_q, s.mean_q);
        assert!((v.re - 1.0 / (2.0 * PI * s.s_qq).sqrt()).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn stationary_density_at_origin() {
        let v = density_matrix(&stationary(3.0), 1.0, 0.0, 0.0);
        assert!((v.re - (1.0 / (3.0 * PI)).sqrt()).abs() < 1e-15);
        assert!((v.re - 0.32574).abs() < 1e-5);
    }

    #[test]
    fn density_is_hermitian_and_normalized() {
        let s = sample_state();
        for (q, q2) in [(0.3, -1.2), (2.0, 0.1), (-0.7, -0.7)] {
            let a = density_matrix(&s, 1.0, q, q2);
            let b = density_matrix(&s, 1.0, q2, q);
            assert!((a - b.conj()).norm() < 1e-15);
        }
        assert!((density_trace(&s, 1.0) - 1.0).abs() < 1e-8);
        assert!((density_trace(&init(4.0, 0.6), 1.0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn off_diagonal_width_of_stationary_state() {
        let s = stationary(3.0);
        let abg = alpha_beta_gamma(&s, 1.0);
        assert!((abg.gamma - 0.75).abs() < 1e-15);
        let width = 1.0 / abg.gamma.sqrt();
        assert!((width - 1.1547).abs() < 1e-4);
        let ratio = density_sigma_delta(&s, 1.0, 0.0, width).norm() / density_sigma_delta(&s, 1.0, 0.0, 0.0).norm();
        assert!((ratio - (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn alpha_beta_gamma_examples() {
        let check = |s: GaussianState, a: f64, g: f64| {
            let abg = alpha_beta_gamma(&s, 1.0);
            assert!((abg.alpha - a).abs() < 1e-15 && (abg.gamma - g).abs() < 1e-15);
            assert_eq!(abg.beta, 0.0);
        };
        check(init(1.0, 0.0), 1.0, 0.25);
        check(init(4.0, 0.0), 0.25, 0.0625);
        check(stationary(3.0), 1.0 / 3.0, 0.75);
    }

    #[test]
    fn wigner_peak_values() {
        let s = init(1.0, 0.0);
        assert!((wigner(&s, 0.0, 0.0) - 1.0 / PI).abs() < 1e-15);
        let w = wigner(&stationary(3.0), 0.0, 0.0);
        assert!((w - 1.0 / (3.0 * PI)).abs() < 1e-15);
        assert!((w - 0.106103).abs() < 1e-6);
    }

    #[test]
    fn wigner_fourier_consistency() {
        for s in [sample_state(), init(4.0, 0.6), stationary(3.0)] {
            let direct = wigner(&s, 0.3, 0.7);
            let ft = wigner_by_fourier(&s, 1.0, 0.3, 0.7);
            assert!((direct - ft).abs() < 1e-6, "{direct} vs {ft}");
        }
    }

    #[test]
    fn wigner_marginal_is_diagonal_density() {
        let s = sample_state();
        for q in [-2.0, 0.4, 1.7] {
            let m = wigner_marginal_q(&s, q);
            assert!((m - density_matrix(&s, 1.0, q, q).re).abs() < 1e-6);
        }
    }

    #[test]
    fn stationary_grid_normalized() {
        let s = stationary(3.0);
        let g = render_grid(&s, GridSpec::covering(&s, 6.0, 256, 256).unwrap()).unwrap();
        assert!((g.integral() - 1.0).abs() < 1e-4, "{}", g.integral());
    }

    #[test]
    fn grid_translation_covariance() {
        let s = init(4.0, 0.3);
        let moved = s.translated(1.5, -0.5);
        let spec = GridSpec::new((-6.0, 6.0), (-3.0, 3.0), 25, 13).unwrap();
        let shifted = GridSpec::new((-4.5, 7.5), (-3.5, 2.5), 25, 13).unwrap();
        let a = render_grid(&s, spec).unwrap();
        let b = render_grid(&moved, shifted).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_csv_round_trip_and_errors() {
        let s = stationary(3.0);
        let g = render_grid(&s, GridSpec::covering(&s, 4.0, 5, 4).unwrap()).unwrap();
        let text = g.to_csv();
        assert!(text.starts_with("# "));
        assert!(text.ends_with('\n'));
        assert_eq!(PhaseSpaceGrid::from_csv(&text).unwrap(), g);
        assert!(GridSpec::new((1.0, 1.0), (0.0, 1.0), 4, 4).is_err());
        assert!(GridSpec::new((0.0, 1.0), (0.0, 1.0), 2, 4).is_err());
        assert!(density_grid(&s, 1.0, (0.0, 0.0), 10).is_err());
    }

    #[test]
    fn density_grid_matches_pointwise() {
        let s = init(4.0, 0.0);
        let g = density_grid(&s, 1.0, (-4.0, 4.0), 9).unwrap();
        assert_eq!(g.get(2, 7), density_matrix(&s, 1.0, g.q(2), g.q(7)));
        let csv = g.to_csv(DensityPart::Abs);
        assert_eq!(csv.lines().count(), 10);
    }

    fn arb_state() -> impl Strategy<Value = GaussianState> {
        (-3.0..3.0f64, -3.0..3.0f64, 0.1..5.0f64, 0.1..5.0f64, -0.95..0.95f64).prop_map(|(mq, mp, s_qq, s_pp, corr)| {
            GaussianState {
                t: 0.0,
                mean_q: mq,
                mean_p: mp,
                s_qq,
                s_pp,
                s_pq: corr * (s_qq * s_pp).sqrt(),
            }
        })
    }

    proptest! {
        #[test]
        fn abg_round_trip(s in arb_state(), hbar in 0.2..3.0f64) {
            let (qq, pp, pq) = alpha_beta_gamma(&s, hbar).covariance(hbar);
            prop_assert!((qq - s.s_qq).abs() <= 1e-14 * s.s_qq);
            prop_assert!((pp - s.s_pp).abs() <= 1e-12 * s.s_pp);
            prop_assert!((pq - s.s_pq).abs() <= 1e-14 * s.s_qq.max(s.s_pp));
        }

        #[test]
        fn wigner_forms_agree(s in arb_state(), q in -4.0..4.0f64, p in -4.0..4.0f64, hbar in 0.2..3.0f64) {
            let a = wigner(&s, q, p);
            let b = wigner_transform_form(&s, hbar, q, p);
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300), "{} vs {}", a, b);
        }

        #[test]
        fn sigma_delta_is_change_of_variables(s in arb_state(), x in -4.0..4.0f64, y in -4.0..4.0f64) {
            let a = density_matrix(&s, 1.0, x, y);
            let b = density_sigma_delta(&s, 1.0, 0.5 * (x + y), x - y);
            prop_assert!((a - b).norm() <= 1e-13 * a.norm().max(1e-300) + 1e-300);
        }

        #[test]
        fn diagonal_positive(s in arb_state(), q in -6.0..6.0f64) {
            let v = density_matrix(&s, 1.0, q, q);
            prop_assert!(v.re > 0.0 && v.im == 0.0);
        }
    }
}
