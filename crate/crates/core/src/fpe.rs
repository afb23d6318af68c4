//! Finite-difference integration of the Wigner-function Fokker–Planck
//! equation, used as an independent check on the Gaussian closed forms.
//!
//! The equation is integrated in flux form,
//!
//! ```text
//! ∂W/∂t = −∂_q(v_q W) − ∂_p(v_p W) + D_qq ∂²_q W + D_pp ∂²_p W + 2 D_pq ∂_q ∂_p W
//! v_q = p/m − (λ−μ) q,   v_p = −mω² q − (λ+μ) p
//! ```
//!
//! which expands to the Liouville terms `−(p/m)∂_q W + mω² q ∂_p W`, the
//! friction terms `(λ+μ)∂_p(pW) + (λ−μ)∂_q(qW)` and the three diffusion
//! terms. Time stepping is forward Euler; boundary cells are held at zero.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DiffusionCoefficients, GaussianState, OscillatorConfig};
use crate::states::{GridSpec, PhaseSpaceGrid};

/// Safety factor applied to every step-size limit.
pub const STABILITY_SAFETY: f64 = 0.5;
/// Regularizer for vanishing diffusion in the step-size limit.
const DIFFUSION_FLOOR: f64 = 1e-12;

/// Spatial discretization of the drift and friction terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Second-order centered flux differences.
    #[default]
    Central,
    /// First-order upwind fluxes at cell faces.
    Upwind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpeRunSpec {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// Times at which to keep a copy of the grid; rounded to the nearest step.
    pub snapshot_times: Vec<f64>,
}

impl FpeRunSpec {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            scheme: Scheme::Central,
            snapshot_times: Vec::new(),
        }
    }
}

/// Largest `dt` allowed on `grid`:
/// `0.5 · min(Δq²/2D_qq, Δp²/2D_pp, Δq/max|v_q|, Δp/max|v_p|)`.
pub fn max_stable_dt(grid: &GridSpec, cfg: &OscillatorConfig, d: &DiffusionCoefficients) -> f64 {
    let (dq, dp) = (grid.dq(), grid.dp());
    let (vq, vp) = max_velocities(grid, cfg);
    let limits = [
        dq * dq / (2.0 * d.d_qq.abs() + DIFFUSION_FLOOR),
        dp * dp / (2.0 * d.d_pp.abs() + DIFFUSION_FLOOR),
        dq / vq.max(DIFFUSION_FLOOR),
        dp / vp.max(DIFFUSION_FLOOR),
    ];
    STABILITY_SAFETY * limits.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max_velocities(grid: &GridSpec, cfg: &OscillatorConfig) -> (f64, f64) {
    // both velocity components are linear, so the extremes sit at corners
    let corners = [
        (grid.q_min, grid.p_min),
        (grid.q_min, grid.p_max),
        (grid.q_max, grid.p_min),
        (grid.q_max, grid.p_max),
    ];
    corners.iter().fold((0.0f64, 0.0f64), |(a, b), &(q, p)| {
        let (vq, vp) = velocity(cfg, q, p);
        (a.max(vq.abs()), b.max(vp.abs()))
    })
}

#[inline]
fn velocity(cfg: &OscillatorConfig, q: f64, p: f64) -> (f64, f64) {
    (
        p / cfg.m - (cfg.lambda - cfg.mu) * q,
        -cfg.m * cfg.omega * cfg.omega * q - (cfg.lambda + cfg.mu) * p,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FpeTelemetry {
    pub steps: usize,
    pub dt: f64,
    pub dt_limit: f64,
    pub initial_mass: f64,
    pub final_mass: f64,
    /// `|final − initial|` of the Riemann-sum mass.
    pub mass_loss: f64,
    /// Smallest grid value seen over the whole run.
    pub min_value: f64,
}

#[derive(Debug, Clone)]
pub struct FpeOutcome {
    pub grid: PhaseSpaceGrid,
    pub snapshots: Vec<(f64, PhaseSpaceGrid)>,
    pub telemetry: FpeTelemetry,
}

/// Integrates the Wigner Fokker–Planck equation from `w0` to `run.t_end`.
pub fn evolve_wigner(
    w0: &PhaseSpaceGrid,
    cfg: &OscillatorConfig,
    d: &DiffusionCoefficients,
    run: &FpeRunSpec,
) -> Result<FpeOutcome> {
    let spec = w0.spec;
    spec.check()?;
    let initial_mass = w0.integral();
    if (initial_mass - 1.0).abs() > 1e-3 {
        return Err(Error::Invalid(format!(
            "initial Wigner grid must be normalized within 1e-3 (mass = {initial_mass})"
        )));
    }
    if !(run.t_end >= 0.0) || !run.t_end.is_finite() {
        return Err(Error::param("t_end", "need finite t_end >= 0"));
    }
    if !(run.dt > 0.0) {
        return Err(Error::param("dt", "need dt > 0"));
    }
    let dt_limit = max_stable_dt(&spec, cfg, d);
    if run.dt > dt_limit {
        return Err(Error::Unstable {
            dt: run.dt,
            limit: dt_limit,
        });
    }

    let steps = (run.t_end / run.dt - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { run.t_end / steps as f64 };
    let snapshot_steps: Vec<(usize, f64)> = run
        .snapshot_times
        .iter()
        .map(|&t| {
            let k = if h > 0.0 { (t / h).round() as usize } else { 0 };
            (k.min(steps), t)
        })
        .collect();

    let stencil = Stencil::new(&spec, cfg, d, run.scheme);
    let mut cur = w0.values.clone();
    zero_boundary(&mut cur, spec.n_q, spec.n_p);
    let mut next = vec![0.0; cur.len()];
    let mut min_value = cur.iter().copied().fold(f64::INFINITY, f64::min);
    let mut snapshots = Vec::new();
    let grid_of = |values: &[f64]| PhaseSpaceGrid {
        spec,
        values: values.to_vec(),
    };
    for &(k, t) in &snapshot_steps {
        if k == 0 {
            snapshots.push((t, grid_of(&cur)));
        }
    }

    for step in 1..=steps {
        stencil.step(&cur, &mut next, h);
        std::mem::swap(&mut cur, &mut next);
        let (lo, finite) = cur
            .par_iter()
            .fold(|| (f64::INFINITY, true), |(m, ok), &v| (m.min(v), ok && v.is_finite()))
            .reduce(|| (f64::INFINITY, true), |a, b| (a.0.min(b.0), a.1 && b.1));
        if !finite {
            return Err(Error::NonFinite {
                step,
                t: step as f64 * h,
            });
        }
        min_value = min_value.min(lo);
        for &(k, t) in &snapshot_steps {
            if k == step {
                snapshots.push((t, grid_of(&cur)));
            }
        }
    }

    let grid = PhaseSpaceGrid { spec, values: cur };
    let final_mass = grid.integral();
    Ok(FpeOutcome {
        telemetry: FpeTelemetry {
            steps,
            dt: h,
            dt_limit,
            initial_mass,
            final_mass,
            mass_loss: (final_mass - initial_mass).abs(),
            min_value,
        },
        grid,
        snapshots,
    })
}

fn zero_boundary(w: &mut [f64], n_q: usize, n_p: usize) {
    for j in 0..n_p {
        w[j] = 0.0;
        w[(n_q - 1) * n_p + j] = 0.0;
    }
    for i in 0..n_q {
        w[i * n_p] = 0.0;
        w[i * n_p + n_p - 1] = 0.0;
    }
}

struct Stencil {
    n_q: usize,
    n_p: usize,
    dq: f64,
    dp: f64,
    scheme: Scheme,
    d: DiffusionCoefficients,
    /// Node velocities, row-major.
    vq: Vec<f64>,
    vp: Vec<f64>,
}

impl Stencil {
    fn new(spec: &GridSpec, cfg: &OscillatorConfig, d: &DiffusionCoefficients, scheme: Scheme) -> Self {
        let n = spec.len();
        let mut vq = Vec::with_capacity(n);
        let mut vp = Vec::with_capacity(n);
        for i in 0..spec.n_q {
            for j in 0..spec.n_p {
                let (a, b) = velocity(cfg, spec.q(i), spec.p(j));
                vq.push(a);
                vp.push(b);
            }
        }
        Self {
            n_q: spec.n_q,
            n_p: spec.n_p,
            dq: spec.dq(),
            dp: spec.dp(),
            scheme,
            d: *d,
            vq,
            vp,
        }
    }

    fn step(&self, cur: &[f64], next: &mut [f64], h: f64) {
        let n_p = self.n_p;
        let n_q = self.n_q;
        next.par_chunks_mut(n_p).enumerate().for_each(|(i, row)| {
            if i == 0 || i + 1 == n_q {
                row.fill(0.0);
                return;
            }
            row[0] = 0.0;
            row[n_p - 1] = 0.0;
            for (j, v) in row.iter_mut().enumerate().take(n_p - 1).skip(1) {
                let k = i * n_p + j;
                *v = cur[k] + h * self.rhs(cur, k);
            }
        });
    }

    #[inline]
    fn rhs(&self, w: &[f64], k: usize) -> f64 {
        let n_p = self.n_p;
        let (up, dn, rt, lf) = (k + n_p, k - n_p, k + 1, k - 1);
        let (dq, dp) = (self.dq, self.dp);

        let advection = match self.scheme {
            Scheme::Central => {
                (self.vq[up] * w[up] - self.vq[dn] * w[dn]) / (2.0 * dq)
                    + (self.vp[rt] * w[rt] - self.vp[lf] * w[lf]) / (2.0 * dp)
            }
            Scheme::Upwind => {
                let face = |a: usize, b: usize, v: &[f64]| {
                    let vf = 0.5 * (v[a] + v[b]);
                    if vf > 0.0 {
                        vf * w[a]
                    } else {
                        vf * w[b]
                    }
                };
                (face(k, up, &self.vq) - face(dn, k, &self.vq)) / dq
                    + (face(k, rt, &self.vp) - face(lf, k, &self.vp)) / dp
            }
        };

        let c = w[k];
        let mut diffusion =
            self.d.d_qq * (w[up] - 2.0 * c + w[dn]) / (dq * dq) + self.d.d_pp * (w[rt] - 2.0 * c + w[lf]) / (dp * dp);
        if self.d.d_pq != 0.0 {
            let cross = (w[up + 1] - w[up - 1] - w[dn + 1] + w[dn - 1]) / (4.0 * dq * dp);
            diffusion += 2.0 * self.d.d_pq * cross;
        }
        diffusion - advection
    }
}

/// Riemann-sum moments of a grid, normalized by its mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMoments {
    pub mass: f64,
    pub mean_q: f64,
    pub mean_p: f64,
    pub s_qq: f64,
    pub s_pp: f64,
    pub s_pq: f64,
}

impl GridMoments {
    pub fn to_state(&self, t: f64) -> GaussianState {
        GaussianState {
            t,
            mean_q: self.mean_q,
            mean_p: self.mean_p,
            s_qq: self.s_qq,
            s_pp: self.s_pp,
            s_pq: self.s_pq,
        }
    }
}

pub fn grid_moments(w: &PhaseSpaceGrid) -> GridMoments {
    let spec = &w.spec;
    let area = w.cell_area();
    let mut m0 = 0.0;
    let (mut mq, mut mp) = (0.0, 0.0);
    for i in 0..spec.n_q {
        let q = spec.q(i);
        for j in 0..spec.n_p {
            let v = w.get(i, j);
            m0 += v;
            mq += v * q;
            mp += v * spec.p(j);
        }
    }
    let (mq, mp) = (mq / m0, mp / m0);
    let (mut qq, mut pp, mut pq) = (0.0, 0.0, 0.0);
    for i in 0..spec.n_q {
        let x = spec.q(i) - mq;
        for j in 0..spec.n_p {
            let y = spec.p(j) - mp;
            let v = w.get(i, j);
            qq += v * x * x;
            pp += v * y * y;
            pq += v * x * y;
        }
    }
    GridMoments {
        mass: m0 * area,
        mean_q: mq,
        mean_p: mp,
        s_qq: qq / m0,
        s_pp: pp / m0,
        s_pq: pq / m0,
    }
}

/// `√(Σ (a − b)² Δq Δp)` over two grids of identical geometry.
pub fn l2_distance(a: &PhaseSpaceGrid, b: &PhaseSpaceGrid) -> f64 {
    assert_eq!(a.spec, b.spec, "grids must share geometry");
    let ss: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y) * (x - y)).sum();
    (ss * a.cell_area()).sqrt()
}

pub fn linf_distance(a: &PhaseSpaceGrid, b: &PhaseSpaceGrid) -> f64 {
    assert_eq!(a.spec, b.spec, "grids must share geometry");
    a.values
        .iter()
        .zip(&b.values)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Domain of `±k` asymptotic standard deviations around the origin, widened
/// to contain the `±k` box of the initial state.
pub fn covering_domain(
    initial: &GaussianState,
    asymptotic: Option<&GaussianState>,
    k: f64,
    n_q: usize,
    n_p: usize,
) -> Result<GridSpec> {
    let mut q = (
        initial.mean_q - k * initial.s_qq.sqrt(),
        initial.mean_q + k * initial.s_qq.sqrt(),
    );
    let mut p = (
        initial.mean_p - k * initial.s_pp.sqrt(),
        initial.mean_p + k * initial.s_pp.sqrt(),
    );
    if let Some(a) = asymptotic {
        let (hq, hp) = (k * a.s_qq.sqrt(), k * a.s_pp.sqrt());
        q = (q.0.min(a.mean_q - hq), q.1.max(a.mean_q + hq));
        p = (p.0.min(a.mean_p - hp), p.1.max(a.mean_p + hp));
    }
    GridSpec::new(q, p, n_q, n_p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{initial_state, thermal_coefficients, InitialStateSpec};
    use crate::propagate::{asymptotic_covariance, covariance_lyapunov};
    use crate::states::render_grid;

    fn small_setup(n: usize) -> (OscillatorConfig, DiffusionCoefficients, PhaseSpaceGrid) {
        let cfg = OscillatorConfig::natural(0.2, 0.1, 3.0).unwrap();
        let d = thermal_coefficients(&cfg).unwrap();
        let s0 = initial_state(&InitialStateSpec::centered(4.0, 0.0).unwrap(), &cfg).unwrap();
        let inf = asymptotic_covariance(&cfg).unwrap();
        let spec = covering_domain(&s0, Some(&inf), 6.0, n, n).unwrap();
        (cfg, d, render_grid(&s0, spec).unwrap())
    }

    #[test]
    fn rejects_unstable_step() {
        let (cfg, d, w0) = small_setup(64);
        let limit = max_stable_dt(&w0.spec, &cfg, &d);
        let err = evolve_wigner(&w0, &cfg, &d, &FpeRunSpec::new(1.01 * limit, 0.1)).unwrap_err();
        assert!(matches!(err, Error::Unstable { .. }));
        assert!(evolve_wigner(&w0, &cfg, &d, &FpeRunSpec::new(limit, 0.1)).is_ok());
    }

    #[test]
    fn rejects_unnormalized_input() {
        let (cfg, d, mut w0) = small_setup(64);
        w0.values.iter_mut().for_each(|v| *v *= 1.01);
        assert!(evolve_wigner(&w0, &cfg, &d, &FpeRunSpec::new(1e-3, 0.1)).is_err());
    }

    #[test]
    fn short_run_tracks_moments() {
        let (cfg, d, w0) = small_setup(96);
        let mut run = FpeRunSpec::new(1e-3, 0.3);
        run.snapshot_times = vec![0.0, 0.15, 0.3];
        let out = evolve_wigner(&w0, &cfg, &d, &run).unwrap();
        assert_eq!(out.snapshots.len(), 3);
        assert_eq!(out.telemetry.steps, 300);
        assert!(out.telemetry.mass_loss < 1e-6);
        assert!(out.telemetry.min_value > -1e-6);

        let s0 = initial_state(&InitialStateSpec::centered(4.0, 0.0).unwrap(), &cfg).unwrap();
        let exact = covariance_lyapunov(&s0, &cfg, &d, 0.3).unwrap();
        let m = grid_moments(&out.grid);
        assert!((m.s_qq - exact.s_qq).abs() < 1e-2);
        assert!((m.s_pp - exact.s_pp).abs() < 1e-2);
        assert!((m.s_pq - exact.s_pq).abs() < 1e-2);
    }

    #[test]
    fn moments_of_translated_gaussian_shift_exactly() {
        let s = GaussianState {
            t: 0.0,
            mean_q: 0.0,
            mean_p: 0.0,
            s_qq: 0.8,
            s_pp: 1.1,
            s_pq: 0.2,
        };
        let spec = GridSpec::covering(&s, 8.0, 101, 101).unwrap();
        let base = grid_moments(&render_grid(&s, spec).unwrap());
        let moved = s.translated(0.75, -0.5);
        let shifted = GridSpec::new(
            (spec.q_min + 0.75, spec.q_max + 0.75),
            (spec.p_min - 0.5, spec.p_max - 0.5),
            101,
            101,
        )
        .unwrap();
        let m = grid_moments(&render_grid(&moved, shifted).unwrap());
        assert!((m.mean_q - base.mean_q - 0.75).abs() < 1e-12);
        assert!((m.mean_p - base.mean_p + 0.5).abs() < 1e-12);
        assert!((m.s_qq - base.s_qq).abs() < 1e-12);
    }

    #[test]
    fn upwind_scheme_runs_and_conserves_mass() {
        let (cfg, d, w0) = small_setup(64);
        let mut run = FpeRunSpec::new(1e-3, 0.2);
        run.scheme = Scheme::Upwind;
        let out = evolve_wigner(&w0, &cfg, &d, &run).unwrap();
        assert!(out.telemetry.mass_loss < 1e-6);
        assert!(out.telemetry.min_value >= -1e-12);
    }

    #[test]
    fn cross_diffusion_term_spreads_correlation() {
        // D_pq alone builds σ_pq at rate 2 D_pq
        let cfg = OscillatorConfig::closed(1.0, 1.0, 1.0).unwrap();
        let cfg = OscillatorConfig { omega: 1e-9, ..cfg };
        let d = DiffusionCoefficients {
            d_pp: 0.05,
            d_qq: 0.05,
            d_pq: 0.02,
        };
        let s = GaussianState {
            t: 0.0,
            mean_q: 0.0,
            mean_p: 0.0,
            s_qq: 0.5,
            s_pp: 0.5,
            s_pq: 0.0,
        };
        let spec = GridSpec::covering(&s, 8.0, 121, 121).unwrap();
        let w0 = render_grid(&s, spec).unwrap();
        let out = evolve_wigner(&w0, &cfg, &d, &FpeRunSpec::new(1e-3, 0.5)).unwrap();
        let m = grid_moments(&out.grid);
        let exact = covariance_lyapunov(&s, &cfg, &d, 0.5).unwrap();
        assert!((m.s_pq - exact.s_pq).abs() < 1e-3, "{} vs {}", m.s_pq, exact.s_pq);
        assert!(exact.s_pq > 0.015);
    }
}
