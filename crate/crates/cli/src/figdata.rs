//! Data grids for the standard plots, using the reference parameters
//! (λ = 0.2, μ = 0.1, δ = 4, r = 0, m = ω = ħ = 1).

use std::io::Write as _;
use std::path::Path;

use anyhow::bail;
use rayon::prelude::*;

use lindho::classicality::one_sigma_contour;
use lindho::config::RawConfig;
use lindho::io::{csv_row, trajectory_csv};
use lindho::model::{initial_state, thermal_coefficients, GaussianState, InitialStateSpec, OscillatorConfig};
use lindho::propagate::{asymptotic_covariance, trajectory, Route};
use lindho::states::{density_grid, render_grid, DensityPart, GridSpec};

use crate::sweep::{sweep_csv, Axis};

pub const FIGURES: [&str; 8] = ["1", "2a", "2b", "3a", "3b", "3c", "4a", "4b"];

const GRID_POINTS: usize = 201;
const CONTOUR_POINTS: usize = 256;

fn reference(coth: f64) -> anyhow::Result<OscillatorConfig> {
    Ok(OscillatorConfig::natural(0.2, 0.1, coth)?)
}

fn squeezed(cfg: &OscillatorConfig) -> anyhow::Result<GaussianState> {
    Ok(initial_state(&InitialStateSpec::centered(4.0, 0.0)?, cfg)?)
}

fn contour_csv(state: &GaussianState) -> anyhow::Result<String> {
    let ellipse = one_sigma_contour(state, CONTOUR_POINTS)?;
    let mut text = String::from("q,p\n");
    for [q, p] in &ellipse.points {
        text.push_str(&csv_row(&[*q, *p]));
        text.push('\n');
    }
    Ok(text)
}

fn density_csv(state: &GaussianState, part: DensityPart) -> anyhow::Result<String> {
    let half = 4.0 * state.s_qq.sqrt();
    let grid = density_grid(state, 1.0, (state.mean_q - half, state.mean_q + half), GRID_POINTS)?;
    Ok(grid.to_csv(part))
}

fn wigner_csv(state: &GaussianState) -> anyhow::Result<String> {
    let spec = GridSpec::covering(state, 5.0, GRID_POINTS, GRID_POINTS)?;
    Ok(render_grid(state, spec)?.to_csv())
}

fn surface(quantity: &str) -> anyhow::Result<String> {
    let base = RawConfig::parse("lambda = 0.2\nmu = 0.1\ninit.delta = 4\ninit.r = 0")?;
    let axes = [Axis::parse("C:1:6:51")?, Axis::parse("t:0:20:201")?];
    Ok(sweep_csv(&base, &axes, &[quantity]).0)
}

/// `(file name, contents)` for one figure.
fn figure_files(figure: &str) -> anyhow::Result<Vec<(String, String)>> {
    let file = |name: &str, text: String| (format!("fig{name}.csv"), text);
    Ok(match figure {
        "1" => {
            // the mean trajectory does not depend on temperature or squeezing
            let cfg = reference(3.0)?;
            let d = thermal_coefficients(&cfg)?;
            let spec = |delta| InitialStateSpec::new(delta, 0.0, 6.0, 4.0);
            let traj = trajectory(Route::Lyapunov, &spec(1.0)?, &cfg, &d, 14.0, 0.01)?;
            vec![
                file("1_trajectory", trajectory_csv(&traj)),
                file("1_contour_delta1", contour_csv(&initial_state(&spec(1.0)?, &cfg)?)?),
                file("1_contour_delta4", contour_csv(&initial_state(&spec(4.0)?, &cfg)?)?),
            ]
        }
        "2a" => vec![file("2a", surface("delta_qd")?)],
        "2b" => vec![file("2b", surface("delta_cc")?)],
        "3a" => vec![file("3a", density_csv(&squeezed(&reference(3.0)?)?, DensityPart::Abs)?)],
        "3b" => vec![file(
            "3b",
            density_csv(&asymptotic_covariance(&reference(3.0)?)?, DensityPart::Re)?,
        )],
        "3c" => vec![file(
            "3c",
            density_csv(&asymptotic_covariance(&reference(20.0)?)?, DensityPart::Re)?,
        )],
        "4a" => vec![file("4a", wigner_csv(&squeezed(&reference(3.0)?)?)?)],
        "4b" => vec![file("4b", wigner_csv(&asymptotic_covariance(&reference(3.0)?)?)?)],
        other => bail!("unknown figure `{other}` (one of {}, all)", FIGURES.join(", ")),
    })
}

pub fn run(figure: &str, out: &Path) -> anyhow::Result<()> {
    let figures: Vec<&str> = if figure == "all" {
        FIGURES.to_vec()
    } else {
        vec![figure]
    };
    let files: Vec<Vec<(String, String)>> = figures
        .par_iter()
        .map(|f| figure_files(f))
        .collect::<anyhow::Result<_>>()?;
    for (name, text) in files.iter().flatten() {
        let path = out.join(name);
        crate::write_file(&path, text)?;
        writeln!(std::io::stdout().lock(), "{}", path.display())?;
    }
    Ok(())
}
