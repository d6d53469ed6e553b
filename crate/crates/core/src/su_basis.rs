//! Generalized Gell-Mann generators normalized to `Tr(G_i G_j) = n delta_ij`,
//! and the map between density matrices and their Bloch vectors
//! `rho = (I + sum_k r_k G_k) / n`.

use num_complex::Complex64;

use crate::error::{QncError, Result};
use crate::linalg::{CMatrix, DensityMatrix, ZERO};

/// The `n^2 - 1` traceless Hermitian generators of SU(n), ordered as the
/// symmetric off-diagonal block, the antisymmetric off-diagonal block and the
/// diagonal block, each in lexicographic index order. For `n = 2` this is
/// `(sigma_x, sigma_y, sigma_z)`.
#[derive(Clone, Debug)]
pub struct GeneratorBasis {
    dim: usize,
    generators: Vec<CMatrix>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlochVector {
    pub dim: usize,
    pub components: Vec<f64>,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        self.components.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &BlochVector) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl GeneratorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

pub fn generator_basis(n: usize) -> Result<GeneratorBasis> {
    if n < 2 {
        return Err(QncError::Domain(format!(
            "generator basis needs n >= 2, got {n}"
        )));
    }
    // Standard Gell-Mann matrices have Tr(G_i G_j) = 2 delta_ij.
    let scale = (n as f64 / 2.0).sqrt();
    let mut generators = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in j + 1..n {
            let mut g = CMatrix::zeros(n, n);
            g[(j, k)] = Complex64::new(scale, 0.0);
            g[(k, j)] = Complex64::new(scale, 0.0);
            generators.push(g);
        }
    }
    for j in 0..n {
        for k in j + 1..n {
            let mut g = CMatrix::zeros(n, n);
            g[(j, k)] = Complex64::new(0.0, -scale);
            g[(k, j)] = Complex64::new(0.0, scale);
            generators.push(g);
        }
    }
    for l in 1..n {
        let lf = l as f64;
        let norm = scale * (2.0 / (lf * (lf + 1.0))).sqrt();
        let mut g = CMatrix::zeros(n, n);
        for d in 0..l {
            g[(d, d)] = Complex64::new(norm, 0.0);
        }
        g[(l, l)] = Complex64::new(-lf * norm, 0.0);
        generators.push(g);
    }
    Ok(GeneratorBasis { dim: n, generators })
}

/// `r_k = Tr(rho G_k)`.
pub fn bloch_vector(rho: &DensityMatrix, basis: &GeneratorBasis) -> Result<BlochVector> {
    bloch_components(rho.matrix(), basis)
}

/// Bloch components of any square matrix of the basis dimension (no
/// density-matrix requirement; used for unnormalized conditional blocks).
pub fn bloch_components(m: &CMatrix, basis: &GeneratorBasis) -> Result<BlochVector> {
    if m.nrows() != basis.dim || m.ncols() != basis.dim {
        return Err(QncError::Dimension(format!(
            "matrix is {}x{}, basis has dimension {}",
            m.nrows(),
            m.ncols(),
            basis.dim
        )));
    }
    let components = basis
        .generators
        .iter()
        .map(|g| trace_of_product(m, g).re)
        .collect();
    Ok(BlochVector {
        dim: basis.dim,
        components,
    })
}

fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `(I + sum_k r_k G_k) / n`. Hermitian with unit trace; positivity is not
/// guaranteed for arbitrary `r`.
pub fn from_bloch(r: &BlochVector, basis: &GeneratorBasis) -> Result<CMatrix> {
    if r.dim != basis.dim || r.components.len() != basis.generators.len() {
        return Err(QncError::Dimension(format!(
            "Bloch vector of dimension {} ({} components) against basis of dimension {}",
            r.dim,
            r.components.len(),
            basis.dim
        )));
    }
    let n = basis.dim;
    let mut m = CMatrix::identity(n, n);
    for (rk, g) in r.components.iter().zip(&basis.generators) {
        m += g * Complex64::new(*rk, 0.0);
    }
    Ok(m / Complex64::new(n as f64, 0.0))
}
