//! Finite-difference eigenvalue oracle for the rectified pencil
//! `(-D2 + diag(effective)) phi = E diag(weight) phi` with Dirichlet ends.
//!
//! With `S = diag(sqrt(weight))` the pencil becomes the complex-symmetric
//! tridiagonal matrix `S^-1 A S^-1`, whose eigenvalues come from an implicit
//! QL sweep using complex orthogonal rotations. A dense general eigen solver
//! is kept as a cross-check for small grids.

use num_complex::Complex64;

use super::rectify::RectifiedProblem;
use super::{sort_results, EigenResult, Method};
use crate::{Error, Result};

pub const MAX_ORACLE_POINTS: usize = 6000;
pub const MAX_ORACLE_LEVELS: usize = 20;
/// Largest grid accepted by the dense backend.
pub const MAX_DENSE_POINTS: usize = 1500;
/// `min |weight| / max |weight|` below this is a conditioning error.
pub const WEIGHT_CONDITION_LIMIT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleBackend {
    #[default]
    Tridiagonal,
    Dense,
}

/// Symmetrised tridiagonal form on the interior points.
#[derive(Debug, Clone, PartialEq)]
pub struct Pencil {
    /// Dirichlet-reduced diagonal of `A` and of `B`.
    pub a_diag: Vec<Complex64>,
    pub a_off: f64,
    pub weight: Vec<Complex64>,
    /// `S^-1 A S^-1`.
    pub diag: Vec<Complex64>,
    pub off: Vec<Complex64>,
}

pub fn pencil(problem: &RectifiedProblem) -> Result<Pencil> {
    let n = problem.grid.n;
    if n > MAX_ORACLE_POINTS + 2 {
        return Err(Error::validation(
            "spectral",
            format!("oracle supports at most {MAX_ORACLE_POINTS} interior points, got {}", n - 2),
        ));
    }
    let h = problem.grid.spacing();
    let inner = 1..n - 1;
    let weight: Vec<Complex64> = problem.weight.values()[inner.clone()].to_vec();
    let (lo, hi) = weight
        .iter()
        .map(|w| w.norm())
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), m| (lo.min(m), hi.max(m)));
    if !(lo > 0.0) || lo < WEIGHT_CONDITION_LIMIT * hi {
        return Err(Error::Conditioning(format!(
            "|weight| ranges over [{lo:e}, {hi:e}]"
        )));
    }
    let k = 1.0 / (h * h);
    let a_diag: Vec<Complex64> = problem.effective.values()[inner]
        .iter()
        .map(|e| e + 2.0 * k)
        .collect();
    let s: Vec<Complex64> = weight.iter().map(|w| w.sqrt()).collect();
    let diag = a_diag.iter().zip(&weight).map(|(a, w)| a / w).collect();
    let off = s.windows(2).map(|p| -k / (p[0] * p[1])).collect();
    Ok(Pencil {
        a_diag,
        a_off: -k,
        weight,
        diag,
        off,
    })
}

/// Eigenvalues of a complex-symmetric tridiagonal matrix by implicit QL.
pub fn tridiagonal_eigenvalues(diag: &[Complex64], off: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e: Vec<Complex64> = off.to_vec();
    e.push(Complex64::new(0.0, 0.0));
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].norm() + d[m + 1].norm();
                if e[m].norm() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::EigenSolver(format!(
                    "QL sweep did not converge for eigenvalue {l}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = (g * g + one).sqrt();
            let shift = if (g + r).norm() >= (g - r).norm() { g + r } else { g - r };
            g = d[m] - d[l] + e[l] / shift;
            let (mut s, mut c, mut p) = (one, one, zero);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = (f * f + g * g).sqrt();
                e[i + 1] = r;
                if r.norm() <= f64::MIN_POSITIVE * 1e10 {
                    d[i + 1] -= p;
                    e[m] = zero;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = zero;
        }
    }
    if d.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::EigenSolver("non-finite eigenvalue".into()));
    }
    Ok(d)
}

/// Solves a tridiagonal system in place with partial pivoting. Exact zero
/// pivots are replaced by a tiny value, which is what inverse iteration wants.
fn tridiagonal_solve(sub: &[Complex64], diag: &[Complex64], sup: &[Complex64], b: &mut [Complex64]) {
    let n = diag.len();
    let mut dl = sub.to_vec();
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    let mut du2 = vec![Complex64::new(0.0, 0.0); n.saturating_sub(2)];
    let mut swapped = vec![false; n.saturating_sub(1)];
    let scale = d.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let tiny = Complex64::new(f64::EPSILON * scale, 0.0);
    for i in 0..n.saturating_sub(1) {
        if d[i].norm() >= dl[i].norm() {
            if d[i] == Complex64::new(0.0, 0.0) {
                d[i] = tiny;
            }
            let fact = dl[i] / d[i];
            dl[i] = fact;
            d[i + 1] -= fact * du[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            let temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du[i + 1];
            }
            swapped[i] = true;
        }
    }
    if d[n - 1] == Complex64::new(0.0, 0.0) {
        d[n - 1] = tiny;
    }
    for i in 0..n.saturating_sub(1) {
        if swapped[i] {
            let t = b[i];
            b[i] = b[i + 1];
            b[i + 1] = t - dl[i] * b[i];
        } else {
            b[i + 1] -= dl[i] * b[i];
        }
    }
    b[n - 1] /= d[n - 1];
    if n >= 2 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
}

fn normalise(v: &mut [Complex64]) {
    let s = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if s > 0.0 {
        v.iter_mut().for_each(|z| *z /= s);
    }
}

impl Pencil {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `||A phi - E B phi|| / ||phi||` for the unsymmetrised pencil.
    pub fn residual(&self, energy: Complex64, phi: &[Complex64]) -> f64 {
        let n = phi.len();
        let mut num = 0.0;
        for i in 0..n {
            let mut a = self.a_diag[i] * phi[i];
            if i > 0 {
                a += self.a_off * phi[i - 1];
            }
            if i + 1 < n {
                a += self.a_off * phi[i + 1];
            }
            num += (a - energy * self.weight[i] * phi[i]).norm_sqr();
        }
        let den = phi.iter().map(|z| z.norm_sqr()).sum::<f64>();
        (num / den).sqrt()
    }

    /// Inverse iteration on the symmetrised matrix, returning the pencil
    /// eigenvector `phi = S^-1 y` and the bilinear Rayleigh quotient.
    pub fn eigenvector(&self, energy: Complex64) -> (Vec<Complex64>, Complex64) {
        let n = self.dim();
        let shifted: Vec<Complex64> = self.diag.iter().map(|d| d - energy).collect();
        let mut y: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0, 0.1 * ((i % 7) as f64)))
            .collect();
        normalise(&mut y);
        for _ in 0..3 {
            tridiagonal_solve(&self.off, &shifted, &self.off, &mut y);
            normalise(&mut y);
        }
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let mut ty = self.diag[i] * y[i];
            if i > 0 {
                ty += self.off[i - 1] * y[i - 1];
            }
            if i + 1 < n {
                ty += self.off[i] * y[i + 1];
            }
            num += y[i] * ty;
            den += y[i] * y[i];
        }
        let rq = if den.norm() > 0.0 { num / den } else { energy };
        let phi = y
            .iter()
            .zip(&self.weight)
            .map(|(v, w)| v / w.sqrt())
            .collect();
        (phi, rq)
    }

    fn dense_eigenvalues(&self) -> Result<Vec<Complex64>> {
        let n = self.dim();
        if n > MAX_DENSE_POINTS {
            return Err(Error::validation(
                "spectral",
                format!("dense backend supports at most {MAX_DENSE_POINTS} points, got {n}"),
            ));
        }
        let m = faer::Mat::<Complex64>::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else if i + 1 == j {
                self.off[i]
            } else if j + 1 == i {
                self.off[j]
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        m.eigenvalues()
            .map_err(|e| Error::EigenSolver(format!("dense eigen solver: {e:?}")))
    }
}

/// The `k` eigenvalues of smallest modulus, sorted by real then imaginary
/// part, each with its pencil residual.
pub fn oracle_spectrum(problem: &RectifiedProblem, k: usize) -> Result<Vec<EigenResult>> {
    oracle_spectrum_with(problem, k, OracleBackend::Tridiagonal)
}

pub fn oracle_spectrum_with(problem: &RectifiedProblem, k: usize, backend: OracleBackend) -> Result<Vec<EigenResult>> {
    if k == 0 || k > MAX_ORACLE_LEVELS {
        return Err(Error::validation(
            "spectral",
            format!("oracle level count must be in 1..={MAX_ORACLE_LEVELS}, got {k}"),
        ));
    }
    let p = pencil(problem)?;
    let mut all = match backend {
        OracleBackend::Tridiagonal => tridiagonal_eigenvalues(&p.diag, &p.off)?,
        OracleBackend::Dense => p.dense_eigenvalues()?,
    };
    all.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    all.truncate(k);
    let mut out: Vec<EigenResult> = all
        .into_iter()
        .map(|e| {
            let (phi, rq) = p.eigenvector(e);
            let (r0, r1) = (p.residual(e, &phi), p.residual(rq, &phi));
            let (energy, residual) = if r1 < r0 { (rq, r1) } else { (e, r0) };
            EigenResult {
                energy,
                residual,
                method: Method::Oracle,
                iterations: 0,
                converged: true,
                multiplicity: 1,
            }
        })
        .collect();
    sort_results(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_matches_known_spectrum() {
        // second-difference matrix: 2 - 2 cos(j pi / (n + 1))
        let n = 50;
        let diag = vec![Complex64::new(2.0, 0.0); n];
        let off = vec![Complex64::new(-1.0, 0.0); n - 1];
        let mut ev = tridiagonal_eigenvalues(&diag, &off).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (j, e) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((e - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn complex_symmetric_two_by_two() {
        // [[1, i], [i, 3]]: E = 2 +- sqrt(1 - 1) = 2 (defective), use [[0, 1], [1, 2i]] instead
        let diag = [Complex64::new(0.0, 0.0), Complex64::new(0.0, 2.0)];
        let off = [Complex64::new(1.0, 0.5)];
        let ev = tridiagonal_eigenvalues(&diag, &off).unwrap();
        for e in ev {
            let det = e * (e - diag[1]) - off[0] * off[0];
            assert!(det.norm() < 1e-12);
        }
    }

    #[test]
    fn pivoted_solve() {
        let sub = [Complex64::new(3.0, 0.0), Complex64::new(1.0, 1.0)];
        let diag = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)];
        let sup = [Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)];
        let x = [Complex64::new(1.0, 2.0), Complex64::new(-1.0, 0.0), Complex64::new(0.5, 0.5)];
        let mut b = vec![
            diag[0] * x[0] + sup[0] * x[1],
            sub[0] * x[0] + diag[1] * x[1] + sup[1] * x[2],
            sub[1] * x[1] + diag[2] * x[2],
        ];
        tridiagonal_solve(&sub, &diag, &sup, &mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).norm() < 1e-14);
        }
    }
}
