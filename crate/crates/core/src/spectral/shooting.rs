use num_complex::Complex64;
use serde::Serialize;

use super::ode::{integrate, OdeOptions, State};
use super::rectify::RectifiedProblem;
use super::{EigenResult, Method};
use crate::exec::Execution;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    /// Where the two solutions meet; grid midpoint when `None`.
    pub matching_point: Option<f64>,
    /// `|effective - E weight|` below this at an endpoint is an error.
    pub branch_tolerance: f64,
    pub ode: OdeOptions,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            matching_point: None,
            branch_tolerance: 1e-8,
            ode: OdeOptions::default(),
        }
    }
}

/// Decaying start `(1, +-sqrt(q))` at an endpoint.
fn endpoint_state(problem: &RectifiedProblem, energy: Complex64, x: f64, sign: f64, tol: f64) -> Result<State> {
    let c = problem.at(x)?;
    let q = c.effective - energy * c.weight;
    if q.norm() < tol {
        return Err(Error::BranchSelection {
            x,
            modulus: q.norm(),
            tolerance: tol,
        });
    }
    if q.re < 0.0 {
        log::debug!("spectral: Re(effective - E weight) = {:e} < 0 at x = {x}; endpoint is oscillatory", q.re);
    }
    let kappa = q.sqrt();
    Ok([Complex64::new(1.0, 0.0), sign * kappa])
}

/// Normalised Wronskian of the left- and right-decaying solutions at the
/// matching point.
pub fn shoot(problem: &RectifiedProblem, energy: Complex64) -> Result<Complex64> {
    shoot_with(problem, energy, &ShootingOptions::default())
}

pub fn shoot_with(problem: &RectifiedProblem, energy: Complex64, options: &ShootingOptions) -> Result<Complex64> {
    Ok(wronskian(problem, energy, options)?.normalised)
}

struct Wronskian {
    normalised: Complex64,
    /// Analytic in the energy up to `exp(log_scale)`.
    scaled: Complex64,
    log_scale: f64,
}

fn wronskian(problem: &RectifiedProblem, energy: Complex64, options: &ShootingOptions) -> Result<Wronskian> {
    if !(energy.re.is_finite() && energy.im.is_finite()) {
        return Err(Error::domain("spectral", format!("energy {energy} is not finite")));
    }
    let grid = problem.grid;
    let xm = options.matching_point.unwrap_or_else(|| grid.midpoint());
    if !(xm > grid.x_min && xm < grid.x_max) {
        return Err(Error::validation(
            "spectral",
            format!("matching point {xm} outside ({}, {})", grid.x_min, grid.x_max),
        ));
    }
    let rhs = |x: f64, y: &State| -> Result<State> {
        let c = problem.at(x)?;
        Ok([y[1], (c.effective - energy * c.weight) * y[0]])
    };
    let left0 = endpoint_state(problem, energy, grid.x_min, 1.0, options.branch_tolerance)?;
    let right0 = endpoint_state(problem, energy, grid.x_max, -1.0, options.branch_tolerance)?;
    let left = integrate(rhs, grid.x_min, xm, left0, &options.ode)?;
    let right = integrate(rhs, grid.x_max, xm, right0, &options.ode)?;
    let (l, r) = (left.state, right.state);
    let size = |y: &State| (y[0].norm_sqr() + y[1].norm_sqr()).sqrt();
    let scaled = l[0] * r[1] - l[1] * r[0];
    Ok(Wronskian {
        normalised: scaled / (size(&l) * size(&r)),
        scaled,
        log_scale: left.log_scale + right.log_scale,
    })
}

const CLUSTER_NODES: usize = 32;

/// Locates the roots of the matching function inside `|E - center| < radius`
/// from contour moments of its logarithmic derivative. Returns their count
/// and centroid; the centroid of a cluster stays well conditioned when the
/// individual roots do not.
fn cluster(
    problem: &RectifiedProblem,
    center: Complex64,
    radius: f64,
    options: &ShootingOptions,
) -> Result<Option<(usize, Complex64)>> {
    let m = CLUSTER_NODES;
    let nodes: Vec<Complex64> = (0..m)
        .map(|k| Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / m as f64))
        .collect();
    let mut samples = Vec::with_capacity(m);
    for d in &nodes {
        samples.push(wronskian(problem, center + d, options)?);
    }
    let reference = samples[0].log_scale;
    let g: Vec<Complex64> = samples
        .iter()
        .map(|w| w.scaled * (w.log_scale - reference).exp())
        .collect();
    if g.iter().any(|v| *v == Complex64::new(0.0, 0.0) || !v.norm().is_finite()) {
        return Ok(None);
    }
    // Taylor coefficients about the center times radius^j.
    let taylor: Vec<Complex64> = (0..m)
        .map(|j| {
            g.iter()
                .enumerate()
                .map(|(k, v)| v * Complex64::from_polar(1.0, -std::f64::consts::TAU * (j * k) as f64 / m as f64))
                .sum::<Complex64>()
                / m as f64
        })
        .collect();
    let (mut s0, mut s1) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for (k, d) in nodes.iter().enumerate() {
        let unit = d / radius;
        // d g / d E at the node
        let dg: Complex64 = (1..m).map(|j| j as f64 * taylor[j] * unit.powu(j as u32 - 1)).sum::<Complex64>() / radius;
        let ratio = dg / g[k] * d / m as f64;
        s0 += ratio;
        s1 += (center + d) * ratio;
    }
    let count = s0.re.round();
    if count < 1.0 || (s0 - count).norm() > 0.05 {
        return Ok(None);
    }
    Ok(Some((count as usize, s1 / count)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecantOptions {
    pub max_iter: usize,
    /// Stop once `|dE| <= tol * max(1, |E|)`.
    pub tol: f64,
    pub shooting: ShootingOptions,
}

impl Default for SecantOptions {
    fn default() -> Self {
        SecantOptions {
            max_iter: 60,
            tol: 1e-11,
            shooting: ShootingOptions::default(),
        }
    }
}

/// Secant refinement from one guess. When the iteration stalls, as it does
/// at a multiple root, the roots near the last iterate are resolved as a
/// cluster and their centroid is returned.
pub fn refine(problem: &RectifiedProblem, guess: Complex64, options: &SecantOptions) -> Result<EigenResult> {
    let f = |e: Complex64| shoot_with(problem, e, &options.shooting);
    let mut e0 = guess;
    let mut e1 = guess + 1e-3 * guess.norm().max(1.0);
    let mut f0 = f(e0)?;
    let mut f1 = f(e1)?;
    let mut iterations = options.max_iter;
    let mut steps: Vec<f64> = Vec::new();
    let mut settled = false;
    for iter in 1..=options.max_iter {
        let df = f1 - f0;
        if f1 == Complex64::new(0.0, 0.0) {
            return Ok(result(e1, f1, iter, true));
        }
        if df == Complex64::new(0.0, 0.0) {
            iterations = iter;
            break;
        }
        let e2 = e1 - f1 * (e1 - e0) / df;
        if !(e2.re.is_finite() && e2.im.is_finite()) {
            return Ok(result(e1, f1, iter, false));
        }
        let f2 = f(e2)?;
        steps.push((e2 - e1).norm());
        let done = (e2 - e1).norm() <= options.tol * e2.norm().max(1.0);
        e0 = e1;
        f0 = f1;
        e1 = e2;
        f1 = f2;
        if done {
            if !linear_tail(&steps) {
                return Ok(result(e1, f1, iter, true));
            }
            settled = true;
            iterations = iter;
            break;
        }
    }
    let radius = 1e-2 * e1.norm().max(1.0);
    if let Some((count, centroid)) = cluster(problem, e1, radius, &options.shooting)? {
        if count > 1 {
            log::debug!("spectral: secant stalled near {e1}; {count} roots merged");
            let mut r = result(centroid, f(centroid)?, iterations + CLUSTER_NODES, true);
            r.multiplicity = count;
            return Ok(r);
        }
    }
    Ok(result(e1, f1, iterations, settled))
}

/// Secant steps shrinking only geometrically (ratio near 0.6) signal a
/// multiple root.
fn linear_tail(steps: &[f64]) -> bool {
    steps.len() >= 4
        && steps[steps.len() - 4..]
            .windows(2)
            .filter(|w| w[0] > 0.0 && w[1] / w[0] > 0.3)
            .count()
            >= 2
}

fn result(energy: Complex64, value: Complex64, iterations: usize, converged: bool) -> EigenResult {
    EigenResult {
        energy,
        residual: value.norm(),
        method: Method::Shooting,
        iterations,
        converged,
        multiplicity: 1,
    }
}

/// Outcome of a batch of secant runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootingOutcome {
    /// Converged roots, deduplicated within `100 tol`, sorted by real then
    /// imaginary part.
    pub roots: Vec<EigenResult>,
    /// Guesses whose iteration did not converge, with their last iterate.
    pub unconverged: Vec<EigenResult>,
}

/// Runs [`refine`] from every guess (concurrently when enabled).
pub fn find_eigenvalues(
    problem: &RectifiedProblem,
    guesses: &[Complex64],
    max_iter: usize,
    tol: f64,
) -> Result<ShootingOutcome> {
    let options = SecantOptions {
        max_iter,
        tol,
        ..SecantOptions::default()
    };
    find_eigenvalues_with(problem, guesses, &options, Execution::default())
}

pub fn find_eigenvalues_with(
    problem: &RectifiedProblem,
    guesses: &[Complex64],
    options: &SecantOptions,
    exec: Execution,
) -> Result<ShootingOutcome> {
    if !(options.tol > 0.0) {
        return Err(Error::validation("spectral", "secant tolerance must be positive"));
    }
    if let Some(g) = guesses.iter().find(|g| !(g.re.is_finite() && g.im.is_finite())) {
        return Err(Error::validation("spectral", format!("guess {g} is not finite")));
    }
    let runs = exec.map(guesses, |g| refine(problem, *g, options));
    let mut roots: Vec<EigenResult> = Vec::new();
    let mut unconverged = Vec::new();
    for run in runs {
        let r = run?;
        if r.converged {
            roots.push(r);
        } else {
            unconverged.push(r);
        }
    }
    super::sort_results(&mut roots);
    let mut deduped: Vec<EigenResult> = Vec::with_capacity(roots.len());
    for r in roots {
        let scale = 100.0 * options.tol * r.energy.norm().max(1.0);
        match deduped.iter_mut().find(|d| (d.energy - r.energy).norm() <= scale) {
            Some(d) => {
                if r.residual < d.residual {
                    *d = r;
                }
            }
            None => deduped.push(r),
        }
    }
    super::sort_results(&mut deduped);
    super::sort_results(&mut unconverged);
    Ok(ShootingOutcome {
        roots: deduped,
        unconverged,
    })
}
