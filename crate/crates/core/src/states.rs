//! Canonical example states and seeded random ensembles.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{QncError, Result};
use crate::linalg::{kron, outer, CMatrix, CVector, DensityMatrix, ONE, ZERO};

/// The seeded stream used throughout the crate.
pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` derived from a base seed.
pub fn split_rng(seed: u64, index: u64) -> SeededRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index + 1);
    r
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `cos(alpha)|00> + sin(alpha) e^{i gamma}|11>` on two qubits.
pub fn pure_two_qubit(alpha: f64, gamma: f64) -> DensityMatrix {
    let psi = CVector::from_vec(vec![
        c(alpha.cos(), 0.0),
        ZERO,
        ZERO,
        Complex64::from_polar(alpha.sin(), gamma),
    ]);
    pure_bipartite(&psi, 2, 2)
}

/// `(|00><00| + |11><11|) / 2`.
pub fn classical_correlated() -> DensityMatrix {
    let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.5, 0.0), ZERO, ZERO, c(0.5, 0.0)]));
    DensityMatrix::from_trusted(m, Some((2, 2)))
}

/// Equal mixture of the Bell states `(|00> +- |11>)/sqrt 2`.
pub fn bell_mixture() -> DensityMatrix {
    let (plus, minus) = bell_phi_pair();
    let m = (outer(&plus, &plus) + outer(&minus, &minus)) * c(0.5, 0.0);
    DensityMatrix::from_trusted(m, Some((2, 2)))
}

/// The kets `(|00> + |11>)/sqrt 2` and `(|00> - |11>)/sqrt 2`.
pub fn bell_phi_pair() -> (CVector, CVector) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (
        CVector::from_vec(vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)]),
        CVector::from_vec(vec![c(s, 0.0), ZERO, ZERO, c(-s, 0.0)]),
    )
}

pub fn pure_bipartite(psi: &CVector, n_a: usize, n_b: usize) -> DensityMatrix {
    let unit = psi / c(psi.norm(), 0.0);
    DensityMatrix::from_trusted(outer(&unit, &unit), Some((n_a, n_b)))
}

/// `sum_i w_i rho_A^i (x) rho_B^i`. Weights must be a probability vector.
pub fn separable_mixture(terms: &[(f64, &DensityMatrix, &DensityMatrix)]) -> Result<DensityMatrix> {
    let first = terms
        .first()
        .ok_or_else(|| QncError::Domain("empty separable mixture".into()))?;
    let (n_a, n_b) = (first.1.dim(), first.2.dim());
    let total: f64 = terms.iter().map(|t| t.0).sum();
    if (total - 1.0).abs() > 1e-12 || terms.iter().any(|t| t.0 < 0.0) {
        return Err(QncError::Domain("separable mixture weights must form a distribution".into()));
    }
    let mut acc = CMatrix::zeros(n_a * n_b, n_a * n_b);
    for (w, ra, rb) in terms {
        if ra.dim() != n_a || rb.dim() != n_b {
            return Err(QncError::Dimension("inconsistent factor dimensions".into()));
        }
        acc += kron(ra.matrix(), rb.matrix()) * c(*w, 0.0);
    }
    Ok(DensityMatrix::from_trusted(acc, Some((n_a, n_b))))
}

/// Pure qubit state `cos(t)|0> + sin(t) e^{i f}|1>`.
pub fn qubit(t: f64, f: f64) -> DensityMatrix {
    let psi = CVector::from_vec(vec![c(t.cos(), 0.0), Complex64::from_polar(t.sin(), f)]);
    DensityMatrix::from_trusted(outer(&psi, &psi), None)
}

/// Computational basis projector `|k><k|` in dimension `n`.
pub fn basis_state(n: usize, k: usize) -> DensityMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(k, k)] = ONE;
    DensityMatrix::from_trusted(m, None)
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    })
}

/// Full-rank random state from the Hilbert-Schmidt ensemble `G G^dagger / Tr`.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    let g = gaussian_matrix(n, n, rng);
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::from_trusted(m / tr, None)
}

/// Random state of rank at most `rank`.
pub fn random_density_rank<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let g = gaussian_matrix(n, rank, rng);
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::from_trusted(m / tr, None)
}

/// Random real (symmetric) density matrix.
pub fn random_real_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| {
        let x: f64 = StandardNormal.sample(rng);
        c(x, 0.0)
    });
    let m = &g * g.transpose();
    let tr = m.trace();
    DensityMatrix::from_trusted(m / tr, None)
}

pub fn random_ket<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    let v = gaussian_matrix(n, 1, rng).column(0).into_owned();
    let norm = v.norm();
    v / c(norm, 0.0)
}

pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    let v = random_ket(n, rng);
    DensityMatrix::from_trusted(outer(&v, &v), None)
}

/// Haar-random unitary (QR of a Ginibre matrix with the phase correction).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(n, n, rng);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            u[(i, j)] *= phase;
        }
    }
    u
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(n, n, rng);
    (&g + g.adjoint()) * c(0.5, 0.0)
}

/// Weights drawn uniformly from the probability simplex.
pub fn random_simplex<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}
