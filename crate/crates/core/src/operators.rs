//! Discretised linear and antilinear operators, and the supercharge algebra.
//!
//! An antilinear operator is stored as the matrix `M` with `X v = M conj(v)`.
//! Composition follows from that: `X o Y` has matrix `M_X M_Y` when `X` is
//! linear and `M_X conj(M_Y)` when it is antilinear, and is antilinear when
//! exactly one factor is.
//!
//! Every operator carries the contour it reads from and the contour it writes
//! to. Composition checks them, which is how `T` and `T^-1` stay distinct even
//! though both are plain elementwise conjugation on a grid.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::band::BandMatrix;
use crate::exec::Execution;
use crate::grid::{derivative_matrix, GridFunction, GridSpec};
use crate::{Error, Result};

/// Which copy of the contour a grid vector lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// The contour itself.
    Original,
    /// Its complex-conjugate image.
    Conjugate,
}

/// Contour identifier with a sheet label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContourTag {
    pub side: Side,
    pub sheet: i64,
}

impl ContourTag {
    pub const GAMMA: ContourTag = ContourTag {
        side: Side::Original,
        sheet: 0,
    };
    pub const GAMMA_STAR: ContourTag = ContourTag {
        side: Side::Conjugate,
        sheet: 0,
    };

    pub fn new(side: Side, sheet: i64) -> Self {
        ContourTag { side, sheet }
    }
}

impl fmt::Display for ContourTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.side {
            Side::Original => "G",
            Side::Conjugate => "G*",
        };
        write!(f, "{name}[{}]", self.sheet)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    matrix: BandMatrix,
    antilinear: bool,
    domain: ContourTag,
    codomain: ContourTag,
}

impl DiscreteOperator {
    pub fn new(matrix: BandMatrix, antilinear: bool, domain: ContourTag, codomain: ContourTag) -> Self {
        DiscreteOperator {
            matrix,
            antilinear,
            domain,
            codomain,
        }
    }

    pub fn linear(matrix: BandMatrix, tag: ContourTag) -> Self {
        Self::new(matrix, false, tag, tag)
    }

    pub fn identity(n: usize, tag: ContourTag) -> Self {
        Self::linear(BandMatrix::identity(n), tag)
    }

    /// Multiplication by sampled values.
    pub fn diagonal(values: &[Complex64], tag: ContourTag) -> Self {
        Self::linear(BandMatrix::from_diagonal(values), tag)
    }

    pub fn matrix(&self) -> &BandMatrix {
        &self.matrix
    }

    pub fn is_antilinear(&self) -> bool {
        self.antilinear
    }

    pub fn domain(&self) -> ContourTag {
        self.domain
    }

    pub fn codomain(&self) -> ContourTag {
        self.codomain
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Same operator acting on (and into) another contour.
    pub fn retagged(mut self, domain: ContourTag, codomain: ContourTag) -> Self {
        self.domain = domain;
        self.codomain = codomain;
        self
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        if self.antilinear {
            let c: Vec<Complex64> = v.iter().map(|z| z.conj()).collect();
            self.matrix.mul_vec(&c)
        } else {
            self.matrix.mul_vec(v)
        }
    }

    /// `self o other` (apply `other` first).
    pub fn compose(&self, other: &DiscreteOperator) -> Result<DiscreteOperator> {
        if self.dim() != other.dim() {
            return Err(Error::Composition(format!(
                "dimension {} after dimension {}",
                self.dim(),
                other.dim()
            )));
        }
        if other.codomain != self.domain {
            return Err(Error::Composition(format!(
                "operator on {} applied to output on {}",
                self.domain, other.codomain
            )));
        }
        let right = if self.antilinear {
            other.matrix.conj()
        } else {
            other.matrix.clone()
        };
        Ok(DiscreteOperator {
            matrix: self.matrix.matmul(&right),
            antilinear: self.antilinear ^ other.antilinear,
            domain: other.domain,
            codomain: self.codomain,
        })
    }

    /// `self + factor * other`; both must share linearity and tags.
    pub fn add_scaled(&self, other: &DiscreteOperator, factor: f64) -> Result<DiscreteOperator> {
        if self.dim() != other.dim() {
            return Err(Error::Composition(format!(
                "cannot add dimension {} to {}",
                other.dim(),
                self.dim()
            )));
        }
        if self.antilinear != other.antilinear {
            return Err(Error::Composition(
                "cannot add a linear and an antilinear operator".into(),
            ));
        }
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::Composition(format!(
                "cannot add {} -> {} to {} -> {}",
                other.domain, other.codomain, self.domain, self.codomain
            )));
        }
        Ok(DiscreteOperator {
            matrix: self.matrix.add_scaled(&other.matrix, Complex64::new(factor, 0.0)),
            ..self.clone()
        })
    }

    pub fn add(&self, other: &DiscreteOperator) -> Result<DiscreteOperator> {
        self.add_scaled(other, 1.0)
    }

    pub fn sub(&self, other: &DiscreteOperator) -> Result<DiscreteOperator> {
        self.add_scaled(other, -1.0)
    }

    /// Left multiplication by a scalar: `(c X) v = c (X v)`.
    pub fn scale(&self, c: Complex64) -> DiscreteOperator {
        DiscreteOperator {
            matrix: self.matrix.scale(c),
            ..self.clone()
        }
    }
}

/// Finite-difference `d/dx` or `d^2/dx^2` on the original contour.
pub fn derivative_operator(grid: &GridSpec, order: usize, accuracy: usize) -> Result<DiscreteOperator> {
    Ok(DiscreteOperator::linear(
        derivative_matrix(grid, order, accuracy)?,
        ContourTag::GAMMA,
    ))
}

/// Elementwise conjugation carrying vectors from `from` to `to`.
pub fn conjugation_operator(grid: &GridSpec, from: ContourTag, to: ContourTag) -> Result<DiscreteOperator> {
    grid.validate()?;
    Ok(DiscreteOperator::new(BandMatrix::identity(grid.n), true, from, to))
}

/// 2x2 block operator on pairs `(u, v)` with `u` on the domain contour of the
/// first column and `v` on that of the second.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperBlock {
    n: usize,
    blocks: [[Option<DiscreteOperator>; 2]; 2],
}

impl SuperBlock {
    pub fn new(n: usize, blocks: [[Option<DiscreteOperator>; 2]; 2]) -> Result<Self> {
        for op in blocks.iter().flatten().flatten() {
            if op.dim() != n {
                return Err(Error::Composition(format!(
                    "block of dimension {} in a super block of dimension {n}",
                    op.dim()
                )));
            }
        }
        Ok(SuperBlock { n, blocks })
    }

    pub fn zero(n: usize) -> Self {
        SuperBlock {
            n,
            blocks: Default::default(),
        }
    }

    pub fn block(&self, row: usize, col: usize) -> Option<&DiscreteOperator> {
        self.blocks[row][col].as_ref()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Blockwise `self o other`.
    pub fn compose(&self, other: &SuperBlock) -> Result<SuperBlock> {
        let mut out = SuperBlock::zero(self.n);
        for i in 0..2 {
            for j in 0..2 {
                let mut acc: Option<DiscreteOperator> = None;
                for k in 0..2 {
                    if let (Some(a), Some(b)) = (&self.blocks[i][k], &other.blocks[k][j]) {
                        let term = a.compose(b)?;
                        acc = Some(match acc {
                            Some(prev) => prev.add(&term)?,
                            None => term,
                        });
                    }
                }
                out.blocks[i][j] = acc;
            }
        }
        Ok(out)
    }

    /// Blockwise `self + factor * other`.
    pub fn add_scaled(&self, other: &SuperBlock, factor: f64) -> Result<SuperBlock> {
        let mut out = SuperBlock::zero(self.n);
        for i in 0..2 {
            for j in 0..2 {
                out.blocks[i][j] = match (&self.blocks[i][j], &other.blocks[i][j]) {
                    (Some(a), Some(b)) => Some(a.add_scaled(b, factor)?),
                    (Some(a), None) => Some(a.clone()),
                    (None, Some(b)) => Some(b.scale(Complex64::new(factor, 0.0))),
                    (None, None) => None,
                };
            }
        }
        Ok(out)
    }

    pub fn anticommutator(&self, other: &SuperBlock) -> Result<SuperBlock> {
        self.compose(other)?.add_scaled(&other.compose(self)?, 1.0)
    }

    pub fn commutator(&self, other: &SuperBlock) -> Result<SuperBlock> {
        self.compose(other)?.add_scaled(&other.compose(self)?, -1.0)
    }

    pub fn apply(&self, v: &[Vec<Complex64>; 2]) -> [Vec<Complex64>; 2] {
        let mut out = [vec![Complex64::new(0.0, 0.0); self.n], vec![Complex64::new(0.0, 0.0); self.n]];
        for (i, row) in self.blocks.iter().enumerate() {
            for (j, op) in row.iter().enumerate() {
                if let Some(op) = op {
                    for (o, y) in out[i].iter_mut().zip(op.apply(&v[j])) {
                        *o += y;
                    }
                }
            }
        }
        out
    }
}

/// Supercharges and the super-Hamiltonian built from a superpotential.
#[derive(Debug, Clone, PartialEq)]
pub struct Charges {
    /// `A = -T D + T W`, from the first contour to the second.
    pub a: DiscreteOperator,
    /// `B = D T^-1 + W T^-1`, back again.
    pub b: DiscreteOperator,
    /// `[[0, 0], [A, 0]]`.
    pub q: SuperBlock,
    /// `[[0, B], [0, 0]]`.
    pub q_tilde: SuperBlock,
    /// `blockdiag(BA, AB)`.
    pub h: SuperBlock,
}

/// Builds `A`, `B`, `Q`, `Q~` and `H` with first-derivative stencils of the
/// given accuracy (2 or 4).
pub fn build_charges(
    w_minus: &GridFunction,
    conj: &DiscreteOperator,
    inverse_conj: &DiscreteOperator,
    accuracy: usize,
) -> Result<Charges> {
    let n = w_minus.len();
    if conj.dim() != n || inverse_conj.dim() != n {
        return Err(Error::Composition(format!(
            "conjugations of dimension {} and {} for a grid of {n} points",
            conj.dim(),
            inverse_conj.dim()
        )));
    }
    let home = conj.domain();
    if inverse_conj.codomain() != home || inverse_conj.domain() != conj.codomain() {
        return Err(Error::Composition(format!(
            "inverse conjugation maps {} -> {}, expected {} -> {}",
            inverse_conj.domain(),
            inverse_conj.codomain(),
            conj.codomain(),
            home
        )));
    }
    let d = derivative_operator(w_minus.grid(), 1, accuracy)?.retagged(home, home);
    let w = DiscreteOperator::diagonal(w_minus.values(), home);

    let a = conj.compose(&w)?.sub(&conj.compose(&d)?)?;
    let b = d.compose(inverse_conj)?.add(&w.compose(inverse_conj)?)?;

    let q = SuperBlock::new(n, [[None, None], [Some(a.clone()), None]])?;
    let q_tilde = SuperBlock::new(n, [[None, Some(b.clone())], [None, None]])?;
    let h = SuperBlock::new(
        n,
        [[Some(b.compose(&a)?), None], [None, Some(a.compose(&b)?)]],
    )?;
    Ok(Charges { a, b, q, q_tilde, h })
}

/// Linear Hamiltonians transported back to the contour each zero mode lives on:
/// `T^-1 (AB) T` on the first contour and `T (BA) T^-1` on the second.
pub fn physical_hamiltonians(
    charges: &Charges,
    conj: &DiscreteOperator,
    inverse_conj: &DiscreteOperator,
) -> Result<(DiscreteOperator, DiscreteOperator)> {
    let ab = charges.a.compose(&charges.b)?;
    let ba = charges.b.compose(&charges.a)?;
    let minus = inverse_conj.compose(&ab.compose(conj)?)?;
    let plus = conj.compose(&ba.compose(inverse_conj)?)?;
    Ok((minus, plus))
}

/// `||H psi|| / ||psi||` for a zero-mode candidate.
pub fn zero_mode_residual(h: &DiscreteOperator, psi: &[Complex64]) -> f64 {
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    norm(&h.apply(psi)) / norm(psi)
}

/// Largest residual of one identity over all trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub identity: String,
    /// `max ||(X - Y) v|| / max(||v||, ||X v||, ||Y v||)`.
    pub relative: f64,
    /// `max ||(X - Y) v|| / ||v||`.
    pub per_unit_vector: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperalgebraReport {
    pub dimension: usize,
    pub trials: usize,
    pub seed: u64,
    pub residuals: Vec<IdentityResidual>,
    pub passed: bool,
}

/// Relative tolerance used by [`check_superalgebra`].
pub const SUPERALGEBRA_TOLERANCE: f64 = 1e-12;

/// Random vector pair for trial `trial`: real and imaginary parts uniform in
/// `[-1, 1)`.
pub fn trial_vector(n: usize, seed: u64, trial: u64) -> [Vec<Complex64>; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let mut draw = || {
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect::<Vec<_>>()
    };
    let u = draw();
    let v = draw();
    [u, v]
}

fn pair_norm(v: &[Vec<Complex64>; 2]) -> f64 {
    v.iter()
        .flatten()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn pair_diff_norm(a: &[Vec<Complex64>; 2], b: &[Vec<Complex64>; 2]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Checks `{Q, Q~} = H`, `Q^2 = 0`, `Q~^2 = 0`, `[H, Q] = 0` and `[H, Q~] = 0`
/// on seeded random vectors.
pub fn check_superalgebra(
    q: &SuperBlock,
    q_tilde: &SuperBlock,
    h: &SuperBlock,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<SuperalgebraReport> {
    let n = h.dim();
    if q.dim() != n || q_tilde.dim() != n {
        return Err(Error::Composition("super blocks differ in dimension".into()));
    }
    if trials == 0 {
        return Err(Error::validation("operators", "at least one trial is required"));
    }
    let zero = SuperBlock::zero(n);
    let pairs: Vec<(&str, SuperBlock, SuperBlock)> = vec![
        ("{Q,Qt} = H", q.anticommutator(q_tilde)?, h.clone()),
        ("Q Q = 0", q.compose(q)?, zero.clone()),
        ("Qt Qt = 0", q_tilde.compose(q_tilde)?, zero.clone()),
        ("H Q = Q H", h.compose(q)?, q.compose(h)?),
        ("H Qt = Qt H", h.compose(q_tilde)?, q_tilde.compose(h)?),
    ];
    let per_trial = exec.map_range(trials, |t| {
        let v = trial_vector(n, seed, t as u64);
        let vn = pair_norm(&v);
        pairs
            .iter()
            .map(|(_, x, y)| {
                let (xv, yv) = (x.apply(&v), y.apply(&v));
                let diff = pair_diff_norm(&xv, &yv);
                let scale = vn.max(pair_norm(&xv)).max(pair_norm(&yv));
                (diff / scale, diff / vn)
            })
            .collect::<Vec<_>>()
    });
    let residuals: Vec<IdentityResidual> = pairs
        .iter()
        .enumerate()
        .map(|(k, (name, _, _))| {
            let relative = per_trial.iter().map(|r| r[k].0).fold(0.0, f64::max);
            let per_unit_vector = per_trial.iter().map(|r| r[k].1).fold(0.0, f64::max);
            IdentityResidual {
                identity: (*name).to_string(),
                relative,
                per_unit_vector,
                tolerance: SUPERALGEBRA_TOLERANCE,
                passed: relative < SUPERALGEBRA_TOLERANCE,
            }
        })
        .collect();
    Ok(SuperalgebraReport {
        dimension: n,
        trials,
        seed,
        passed: residuals.iter().all(|r| r.passed),
        residuals,
    })
}
