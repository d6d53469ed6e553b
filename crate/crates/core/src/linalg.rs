//! Dense complex-matrix foundation: density matrices with an optional
//! bipartite split, tensor products, partial traces, trace norms, spectra and
//! local unitary actions.
//!
//! All matrices are `nalgebra::DMatrix<Complex64>`. Bipartite indices follow
//! the usual convention `(a, b) -> a * n_b + b`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{QncError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance for the Hermitian, trace and positivity checks on states.
pub const STATE_TOL: f64 = 1e-10;

/// Tolerance for the unitarity check on local operators.
pub const UNITARY_TOL: f64 = 1e-10;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

impl Subsystem {
    pub fn other(self) -> Self {
        match self {
            Subsystem::A => Subsystem::B,
            Subsystem::B => Subsystem::A,
        }
    }
}

/// A validated density matrix, optionally tagged with a bipartite split
/// `(n_a, n_b)` where `n_a * n_b` equals the dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    split: Option<(usize, usize)>,
}

impl DensityMatrix {
    /// Validates `matrix` against the Hermitian, unit-trace and positivity
    /// invariants (all at [`STATE_TOL`]).
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_density(&matrix, STATE_TOL)?;
        Ok(Self {
            matrix,
            split: None,
        })
    }

    pub fn bipartite(matrix: CMatrix, n_a: usize, n_b: usize) -> Result<Self> {
        Self::new(matrix)?.with_split(n_a, n_b)
    }

    /// The pure state `|psi><psi|` of a (not necessarily normalized) ket.
    pub fn from_ket(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 1e-15) {
            return Err(QncError::Domain("zero ket".into()));
        }
        let unit = psi / Complex64::new(norm, 0.0);
        Ok(Self {
            matrix: outer(&unit, &unit),
            split: None,
        })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(QncError::Dimension("dimension must be positive".into()));
        }
        Ok(Self {
            matrix: CMatrix::identity(n, n) / Complex64::new(n as f64, 0.0),
            split: None,
        })
    }

    /// Attaches a bipartite split. Fails if `n_a * n_b` is not the dimension.
    pub fn with_split(mut self, n_a: usize, n_b: usize) -> Result<Self> {
        if n_a == 0 || n_b == 0 || n_a * n_b != self.dim() {
            return Err(QncError::Dimension(format!(
                "split {n_a}x{n_b} does not match dimension {}",
                self.dim()
            )));
        }
        self.split = Some((n_a, n_b));
        Ok(self)
    }

    /// Skips validation. Callers guarantee the invariants by construction
    /// (conditional states, convex mixtures of valid states).
    pub(crate) fn from_trusted(matrix: CMatrix, split: Option<(usize, usize)>) -> Self {
        let matrix = hermitian_part(&matrix);
        Self { matrix, split }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn split(&self) -> Option<(usize, usize)> {
        self.split
    }

    pub fn require_split(&self) -> Result<(usize, usize)> {
        self.split
            .ok_or_else(|| QncError::Dimension("state has no bipartite split".into()))
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }
}

/// Checks the density-matrix invariants with tolerance `tol`, returning the
/// first violated one.
pub fn check_density(m: &CMatrix, tol: f64) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(QncError::Dimension(format!(
            "density matrix must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(QncError::Domain("non-finite matrix entry".into()));
    }
    let herm = hermiticity_defect(m);
    if herm > tol {
        return Err(QncError::NotHermitian(herm));
    }
    let tr = m.trace().re;
    if (tr - 1.0).abs() > tol {
        return Err(QncError::Trace((tr - 1.0).abs()));
    }
    let min = hermitian_eigenvalues(m)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if min < -tol {
        return Err(QncError::NotPositive(min));
    }
    Ok(())
}

/// `max |m_ij - conj(m_ji)|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev = match m.nrows() {
        0 => Vec::new(),
        1 => vec![m[(0, 0)].re],
        2 => {
            let a = m[(0, 0)].re;
            let d = m[(1, 1)].re;
            let b = m[(0, 1)];
            let mean = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
            vec![mean - rad, mean + rad]
        }
        _ => m.clone().symmetric_eigenvalues().iter().copied().collect(),
    };
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues (descending) and matching orthonormal eigenvectors (columns).
pub fn hermitian_eigensystem(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Tensor (Kronecker) product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Partial trace of a bipartite state over `traced` (the returned state lives
/// on the other factor).
pub fn partial_trace(rho: &DensityMatrix, traced: Subsystem) -> Result<DensityMatrix> {
    let (n_a, n_b) = rho.require_split()?;
    let m = partial_trace_matrix(rho.matrix(), n_a, n_b, traced);
    Ok(DensityMatrix::from_trusted(m, None))
}

/// Partial trace of an arbitrary `n_a*n_b` square matrix.
pub fn partial_trace_matrix(m: &CMatrix, n_a: usize, n_b: usize, traced: Subsystem) -> CMatrix {
    match traced {
        Subsystem::A => CMatrix::from_fn(n_b, n_b, |b, c| {
            (0..n_a).map(|a| m[(a * n_b + b, a * n_b + c)]).sum()
        }),
        Subsystem::B => CMatrix::from_fn(n_a, n_a, |a, c| {
            (0..n_b).map(|b| m[(a * n_b + b, c * n_b + b)]).sum()
        }),
    }
}

/// Trace norm `Tr|m|` of a Hermitian matrix. Non-Hermitian input (beyond
/// [`STATE_TOL`]) is a contract violation.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(QncError::Dimension("trace norm needs a square matrix".into()));
    }
    let defect = hermiticity_defect(m);
    if defect > STATE_TOL {
        return Err(QncError::Contract(format!(
            "trace norm of non-Hermitian matrix (defect {defect:.3e})"
        )));
    }
    Ok(trace_norm_hermitian(m))
}

/// Trace norm without the Hermitian check.
pub(crate) fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|x| x.abs()).sum()
}

/// Trace distance-style norm of a difference, `Tr|a - b|`.
pub fn trace_norm_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    trace_norm(&(a - b))
}

/// `-sum lambda log2 lambda` over the spectrum, with `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    spectral_entropy(&rho.eigenvalues())
}

pub(crate) fn spectral_entropy(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

pub fn check_unitary(u: &CMatrix) -> Result<()> {
    if !u.is_square() {
        return Err(QncError::Contract("unitary must be square".into()));
    }
    let n = u.nrows();
    let defect = (u.adjoint() * u - CMatrix::identity(n, n))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if defect > UNITARY_TOL {
        return Err(QncError::Contract(format!(
            "operator is not unitary (defect {defect:.3e})"
        )));
    }
    Ok(())
}

/// `(U_A (x) U_B) rho (U_A (x) U_B)^dagger`; a missing factor is the identity.
pub fn apply_local_unitary(
    rho: &DensityMatrix,
    u_a: Option<&CMatrix>,
    u_b: Option<&CMatrix>,
) -> Result<DensityMatrix> {
    let (n_a, n_b) = rho.require_split()?;
    let u = local_operator(n_a, n_b, u_a, u_b)?;
    let m = &u * rho.matrix() * u.adjoint();
    Ok(DensityMatrix::from_trusted(m, Some((n_a, n_b))))
}

fn local_operator(
    n_a: usize,
    n_b: usize,
    u_a: Option<&CMatrix>,
    u_b: Option<&CMatrix>,
) -> Result<CMatrix> {
    let factor = |u: Option<&CMatrix>, n: usize| -> Result<CMatrix> {
        match u {
            None => Ok(CMatrix::identity(n, n)),
            Some(u) => {
                if u.nrows() != n || u.ncols() != n {
                    return Err(QncError::Dimension(format!(
                        "local unitary is {}x{}, subsystem has dimension {n}",
                        u.nrows(),
                        u.ncols()
                    )));
                }
                check_unitary(u)?;
                Ok(u.clone())
            }
        }
    };
    Ok(kron(&factor(u_a, n_a)?, &factor(u_b, n_b)?))
}

/// Convex mixture `sum_i lambda_i (U_i (x) I) rho (U_i (x) I)^dagger` with the
/// unitaries acting on `side`.
pub fn mix_local_unitaries(
    rho: &DensityMatrix,
    weights: &[f64],
    unitaries: &[CMatrix],
    side: Subsystem,
) -> Result<DensityMatrix> {
    let (n_a, n_b) = rho.require_split()?;
    if weights.len() != unitaries.len() || weights.is_empty() {
        return Err(QncError::Contract(format!(
            "{} weights for {} unitaries",
            weights.len(),
            unitaries.len()
        )));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(QncError::Contract("mixture weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(QncError::Contract(format!(
            "mixture weights sum to {total}, not 1"
        )));
    }
    let mut acc = CMatrix::zeros(n_a * n_b, n_a * n_b);
    for (&w, u) in weights.iter().zip(unitaries) {
        let op = match side {
            Subsystem::A => local_operator(n_a, n_b, Some(u), None)?,
            Subsystem::B => local_operator(n_a, n_b, None, Some(u))?,
        };
        acc += (&op * rho.matrix() * op.adjoint()) * Complex64::new(w, 0.0);
    }
    Ok(DensityMatrix::from_trusted(acc, Some((n_a, n_b))))
}

/// Exchanges the roles of A and B: the result has split `(n_b, n_a)`.
pub fn swap_subsystems(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let (n_a, n_b) = rho.require_split()?;
    let m = rho.matrix();
    let swapped = CMatrix::from_fn(n_a * n_b, n_a * n_b, |r, c| {
        let (rb, ra) = (r / n_a, r % n_a);
        let (cb, ca) = (c / n_a, c % n_a);
        m[(ra * n_b + rb, ca * n_b + cb)]
    });
    Ok(DensityMatrix {
        matrix: swapped,
        split: Some((n_b, n_a)),
    })
}
