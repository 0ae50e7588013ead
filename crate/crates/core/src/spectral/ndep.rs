use serde::Serialize;

use super::oracle::oracle_spectrum;
use super::potential::PotentialSpec;
use super::rectify::rectify;
use super::shooting::{refine, SecantOptions};
use super::EigenResult;
use crate::contours::ContourSpec;
use crate::exec::Execution;
use crate::grid::GridSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NDependenceOptions {
    /// Half-width of the `N = 0` interval; other `N` reach the same `|r|`.
    pub half_width: f64,
    pub points: usize,
    pub secant: SecantOptions,
}

impl Default for NDependenceOptions {
    fn default() -> Self {
        NDependenceOptions {
            half_width: 8.0,
            points: 4001,
            secant: SecantOptions::default(),
        }
    }
}

/// Shooting/oracle agreement tolerance `max(1e-5, 50 h^2)`.
pub fn agreement_tolerance(grid: &GridSpec) -> f64 {
    let h = grid.spacing();
    (50.0 * h * h).max(1e-5)
}

/// Parameter half-width at which the toboggan with winding `n` reaches
/// `|r| = |L0 - i eps|`.
pub fn matched_half_width(half_width: f64, epsilon: f64, n: u32) -> f64 {
    let m = f64::from(2 * n + 1);
    let u = (half_width * half_width + epsilon * epsilon).powf(0.5 / m);
    (u * u - epsilon * epsilon).max(0.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelComparison {
    pub oracle: EigenResult,
    pub shooting: EigenResult,
    /// `|E_shooting - E_oracle|`.
    pub agreement: f64,
    pub tolerance: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NRow {
    pub winding: u32,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    pub levels: Vec<LevelComparison>,
    /// Set when this `N` failed; the other rows are still computed.
    pub error: Option<String>,
}

fn row(potential: &PotentialSpec, epsilon: f64, n: u32, k: usize, options: &NDependenceOptions) -> Result<NRow> {
    let l = matched_half_width(options.half_width, epsilon, n);
    let grid = GridSpec::new(-l, l, options.points)?;
    let contour = ContourSpec::toboggan(epsilon, n)?;
    let problem = rectify(potential, &contour, &grid)?;
    let tolerance = agreement_tolerance(&grid);
    let oracle = oracle_spectrum(&problem, k)?;
    let mut levels = Vec::with_capacity(oracle.len());
    for o in oracle {
        let s = refine(&problem, o.energy, &options.secant)?;
        let agreement = (s.energy - o.energy).norm();
        levels.push(LevelComparison {
            agrees: s.converged && agreement <= tolerance,
            oracle: o,
            shooting: s,
            agreement,
            tolerance,
        });
    }
    Ok(NRow {
        winding: n,
        x_min: grid.x_min,
        x_max: grid.x_max,
        points: grid.n,
        levels,
        error: None,
    })
}

/// Lowest `k` levels per winding number from both solvers.
///
/// A toboggan with `N >= 1` turns into its asymptotic direction only once
/// `|x| >> epsilon`, so large `epsilon` leaves the truncated ends outside the
/// decay sectors and the two solvers stop agreeing. `epsilon` around 0.3
/// works for the shipped potentials.
pub fn n_dependence_report(
    potential: &PotentialSpec,
    epsilon: f64,
    windings: &[u32],
    k: usize,
    options: &NDependenceOptions,
    exec: Execution,
) -> Result<Vec<NRow>> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::validation("spectral", format!("epsilon must be positive, got {epsilon}")));
    }
    potential.validate()?;
    Ok(exec.map(windings, |&n| {
        row(potential, epsilon, n, k, options).unwrap_or_else(|e| NRow {
            winding: n,
            x_min: f64::NAN,
            x_max: f64::NAN,
            points: options.points,
            levels: Vec::new(),
            error: Some(e.to_string()),
        })
    }))
}
