//! Spectra of contour Schrodinger problems.
//!
//! A problem `-psi'' + V(r) psi = E psi` along `r(x)` is first rectified to
//! the real parameter axis, then solved two ways: complex shooting with
//! secant refinement, and a finite-difference pencil oracle.

mod ndep;
pub mod ode;
mod oracle;
mod potential;
mod rectify;
mod shooting;

use num_complex::Complex64;
use serde::Serialize;

pub use ndep::{
    agreement_tolerance, matched_half_width, n_dependence_report, LevelComparison, NDependenceOptions, NRow,
};
pub use oracle::{
    oracle_spectrum, oracle_spectrum_with, pencil, tridiagonal_eigenvalues, OracleBackend, Pencil,
    MAX_DENSE_POINTS, MAX_ORACLE_LEVELS, MAX_ORACLE_POINTS,
};
pub use potential::{PotentialKind, PotentialSpec};
pub use rectify::{rectify, Coefficients, RectifiedProblem, CONTOUR_DERIVATIVE_TOLERANCE, POLE_TOLERANCE};
pub use shooting::{
    find_eigenvalues, find_eigenvalues_with, refine, shoot, shoot_with, SecantOptions, ShootingOptions,
    ShootingOutcome,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Shooting,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenResult {
    #[serde(serialize_with = "serialize_complex")]
    pub energy: Complex64,
    /// `|matching|` for shooting, relative pencil residual for the oracle.
    pub residual: f64,
    pub method: Method,
    pub iterations: usize,
    pub converged: bool,
    /// Number of roots merged into `energy` (their centroid) when shooting
    /// meets a multiple root.
    pub multiplicity: usize,
}

fn serialize_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("Complex", 2)?;
    st.serialize_field("re", &z.re)?;
    st.serialize_field("im", &z.im)?;
    st.end()
}

pub(crate) fn sort_results(results: &mut [EigenResult]) {
    results.sort_by(|a, b| {
        a.energy
            .re
            .total_cmp(&b.energy.re)
            .then(a.energy.im.total_cmp(&b.energy.im))
    });
}
