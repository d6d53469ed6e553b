//! State reconstruction from projective statistics.
//!
//! Every matrix element `rho_ij` lives in the two-dimensional subspace
//! `span{|i>, |j>}`, which the measurement parameterization reaches by pinning
//! all but two angles (see [`subspace_params`]). Three settings per pair
//! (`|i>`, `(|i>+|j>)/sqrt 2`, `(|i>+i|j>)/sqrt 2`) plus one per diagonal entry
//! recover the whole matrix. For a bipartite state the same queries, made
//! with a projector on A, return `n_b x n_b` blocks `<i|rho|j>` instead of
//! scalars.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;

use crate::error::{QncError, Result};
use crate::linalg::{
    hermitian_eigenvalues, hermiticity_defect, partial_trace_matrix, CMatrix, DensityMatrix,
    Subsystem,
};
use crate::measurement::{basis_params, projector_from_params, subspace_params, MeasurementParams};

/// Inconsistency threshold for assembled states.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// Measurement statistics `Tr(M(params) rho)` of an unknown state.
pub trait ExpectationOracle {
    fn dim(&self) -> usize;
    fn expectation(&self, params: &MeasurementParams) -> f64;
}

/// Operator-valued statistics `Tr_A((M(params) (x) I) rho_AB)` of an unknown
/// bipartite state.
pub trait ConditionalOracle {
    fn dims(&self) -> (usize, usize);
    fn conditional(&self, params: &MeasurementParams) -> CMatrix;
}

/// Exact oracle backed by a known state.
#[derive(Clone, Debug)]
pub struct StateOracle {
    rho: DensityMatrix,
}

pub fn oracle_from_state(rho: &DensityMatrix) -> StateOracle {
    StateOracle { rho: rho.clone() }
}

impl ExpectationOracle for StateOracle {
    fn dim(&self) -> usize {
        self.rho.dim()
    }

    fn expectation(&self, params: &MeasurementParams) -> f64 {
        let m = projector_from_params(params);
        (m.matrix() * self.rho.matrix()).trace().re
    }
}

impl ConditionalOracle for StateOracle {
    fn dims(&self) -> (usize, usize) {
        self.rho.split().unwrap_or((self.rho.dim(), 1))
    }

    fn conditional(&self, params: &MeasurementParams) -> CMatrix {
        let (n_a, n_b) = self.dims();
        let m = projector_from_params(params);
        let lifted = m.matrix().kronecker(&CMatrix::identity(n_b, n_b));
        partial_trace_matrix(&(lifted * self.rho.matrix()), n_a, n_b, Subsystem::A)
    }
}

/// Assembles the `n_a^2` blocks `<i|rho|j>` from
/// `n_a + 3 n_a (n_a - 1) / 2` queries, issued in a fixed order.
fn reconstruct_blocks<F>(n_a: usize, n_b: usize, mut query: F) -> Result<CMatrix>
where
    F: FnMut(&MeasurementParams) -> CMatrix,
{
    if n_a < 2 {
        return Err(QncError::Domain(format!(
            "reconstruction needs a measured dimension of at least 2, got {n_a}"
        )));
    }
    let half = Complex64::new(0.5, 0.0);
    let mut diag = Vec::with_capacity(n_a);
    for k in 0..n_a {
        let block = query(&basis_params(n_a, k)?);
        if block.nrows() != n_b || block.ncols() != n_b {
            return Err(QncError::Dimension(format!(
                "oracle returned a {}x{} block, expected {n_b}x{n_b}",
                block.nrows(),
                block.ncols()
            )));
        }
        diag.push(block);
    }
    let mut rho = CMatrix::zeros(n_a * n_b, n_a * n_b);
    for (k, block) in diag.iter().enumerate() {
        rho.view_mut((k * n_b, k * n_b), (n_b, n_b)).copy_from(block);
    }
    for i in 0..n_a {
        for j in i + 1..n_a {
            let family = subspace_params(i, j, n_a)?;
            let at_i = query(&family.params(0.0, 0.0)?);
            let real = query(&family.params(FRAC_PI_4, 0.0)?);
            let imag = query(&family.params(FRAC_PI_4, FRAC_PI_2)?);

            let mismatch = (&at_i - &diag[i]).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if mismatch > RECONSTRUCTION_TOL {
                return Err(QncError::InconsistentOracle(format!(
                    "setting |{i}> answered differently in two families (gap {mismatch:.3e})"
                )));
            }
            let mean = (&diag[i] + &diag[j]) * half;
            // real = mean + (B_ij + B_ji)/2, imag = mean + i(B_ij - B_ji)/2
            let sum = (&real - &mean) * Complex64::new(2.0, 0.0);
            let diff = (&imag - &mean) * Complex64::new(0.0, -2.0);
            let b_ij = (&sum + &diff) * half;
            let b_ji = (&sum - &diff) * half;
            rho.view_mut((i * n_b, j * n_b), (n_b, n_b)).copy_from(&b_ij);
            rho.view_mut((j * n_b, i * n_b), (n_b, n_b)).copy_from(&b_ji);
        }
    }
    Ok(rho)
}

fn validate_reconstruction(m: CMatrix, split: Option<(usize, usize)>) -> Result<DensityMatrix> {
    let herm = hermiticity_defect(&m);
    if herm > RECONSTRUCTION_TOL {
        return Err(QncError::InconsistentOracle(format!(
            "assembled matrix is not Hermitian (defect {herm:.3e})"
        )));
    }
    let tr = m.trace().re;
    if (tr - 1.0).abs() > RECONSTRUCTION_TOL {
        return Err(QncError::InconsistentOracle(format!(
            "assembled matrix has trace {tr}"
        )));
    }
    let min = hermitian_eigenvalues(&m).first().copied().unwrap_or(0.0);
    if min < -RECONSTRUCTION_TOL {
        return Err(QncError::InconsistentOracle(format!(
            "assembled matrix has eigenvalue {min:.3e}"
        )));
    }
    Ok(DensityMatrix::from_trusted(m, split))
}

/// Rebuilds an `n`-level state from its expectation statistics.
pub fn reconstruct_state<O: ExpectationOracle + ?Sized>(oracle: &O, n: usize) -> Result<DensityMatrix> {
    if oracle.dim() != n {
        return Err(QncError::Dimension(format!(
            "oracle has dimension {}, asked for {n}",
            oracle.dim()
        )));
    }
    let m = reconstruct_blocks(n, 1, |p| {
        CMatrix::from_element(1, 1, Complex64::new(oracle.expectation(p), 0.0))
    })?;
    validate_reconstruction(m, None)
}

/// Rebuilds a bipartite state from its conditional (steering) statistics.
pub fn reconstruct_bipartite<O: ConditionalOracle + ?Sized>(
    oracle: &O,
    n_a: usize,
    n_b: usize,
) -> Result<DensityMatrix> {
    if oracle.dims() != (n_a, n_b) {
        return Err(QncError::Dimension(format!(
            "oracle has dimensions {:?}, asked for ({n_a}, {n_b})",
            oracle.dims()
        )));
    }
    let m = reconstruct_blocks(n_a, n_b, |p| oracle.conditional(p))?;
    validate_reconstruction(m, Some((n_a, n_b)))
}

/// Whether two oracles describe the same state: both are reconstructed and
/// compared in trace norm at [`RECONSTRUCTION_TOL`].
pub fn states_equal_by_statistics<O1, O2>(first: &O1, second: &O2, n: usize) -> Result<bool>
where
    O1: ExpectationOracle + ?Sized,
    O2: ExpectationOracle + ?Sized,
{
    let a = reconstruct_state(first, n)?;
    let b = reconstruct_state(second, n)?;
    Ok(crate::linalg::trace_norm_hermitian(&(a.matrix() - b.matrix())) <= RECONSTRUCTION_TOL)
}
