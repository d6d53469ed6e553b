//! Pure-state decompositions, productization and the entanglement quantities
//! `E = C (G(rho) - sup_d G(prod(d)))` and
//! `E_s = inf_d S(prod(d)) - S(rho)`.
//!
//! Every decomposition of a rank-`r` state into `m` pure terms is
//! `|psi_i> = sum_j V_ij sqrt(lambda_j) |e_j>` for an `m x r` isometry `V`
//! over the eigensystem `(lambda_j, |e_j>)`. The search runs over `V`,
//! parameterized by an unconstrained complex matrix orthonormalized by QR.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{QncError, Result};
use crate::linalg::{
    hermitian_eigensystem, outer, partial_trace_matrix, von_neumann_entropy, CMatrix, CVector,
    DensityMatrix, Subsystem, ZERO,
};
use crate::optimize::NelderMead;
use crate::states::split_rng;
use crate::strength::{strength, IntegratorConfig, SymmetricRule};

/// `C` in `E = C (G(rho) - G_best)`.
pub const E_SCALE: f64 = 1.0;

/// Eigenvalues below this count as zero when taking the rank.
pub const RANK_TOL: f64 = 1e-10;

/// Terms lighter than this are dropped from a decomposition.
const WEIGHT_FLOOR: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct Decomposition {
    weights: Vec<f64>,
    kets: Vec<CVector>,
    split: (usize, usize),
    isometry: CMatrix,
}

impl Decomposition {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Normalized kets of the terms.
    pub fn kets(&self) -> &[CVector] {
        &self.kets
    }

    pub fn states(&self) -> Vec<DensityMatrix> {
        self.kets
            .iter()
            .map(|k| DensityMatrix::from_trusted(outer(k, k), Some(self.split)))
            .collect()
    }

    /// The isometry (rows: terms before dropping, columns: source ensemble).
    pub fn isometry(&self) -> &CMatrix {
        &self.isometry
    }

    pub fn len(&self) -> usize {
        self.kets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kets.is_empty()
    }

    pub fn split(&self) -> (usize, usize) {
        self.split
    }

    /// `sum_i gamma_i |psi_i><psi_i|`.
    pub fn resum(&self) -> CMatrix {
        let d = self.split.0 * self.split.1;
        let mut acc = CMatrix::zeros(d, d);
        for (w, k) in self.weights.iter().zip(&self.kets) {
            acc += outer(k, k) * Complex64::new(*w, 0.0);
        }
        acc
    }
}

fn check_isometry(v: &CMatrix, cols: usize) -> Result<()> {
    if v.ncols() != cols || v.nrows() < cols {
        return Err(QncError::Contract(format!(
            "isometry must be m x {cols} with m >= {cols}, got {}x{}",
            v.nrows(),
            v.ncols()
        )));
    }
    let defect = (v.adjoint() * v - CMatrix::identity(cols, cols))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if defect > 1e-10 {
        return Err(QncError::Contract(format!(
            "columns are not orthonormal (defect {defect:.3e})"
        )));
    }
    Ok(())
}

/// Remixes an ensemble `{(w_j, |k_j>)}` through the isometry `V`:
/// `|psi_i> = sum_j V_ij sqrt(w_j) |k_j>`.
pub fn decomposition_from_ensemble(
    weights: &[f64],
    kets: &[CVector],
    split: (usize, usize),
    v: &CMatrix,
) -> Result<Decomposition> {
    if weights.len() != kets.len() || kets.is_empty() {
        return Err(QncError::Dimension("ensemble weights and kets differ in length".into()));
    }
    let d = split.0 * split.1;
    if kets.iter().any(|k| k.len() != d) {
        return Err(QncError::Dimension(format!("ensemble kets must have length {d}")));
    }
    check_isometry(v, kets.len())?;
    Ok(remix_unchecked(weights, kets, split, v))
}

fn remix_unchecked(
    weights: &[f64],
    kets: &[CVector],
    split: (usize, usize),
    v: &CMatrix,
) -> Decomposition {
    let d = split.0 * split.1;
    let scaled: Vec<CVector> = kets
        .iter()
        .zip(weights)
        .map(|(k, w)| k * Complex64::new(w.max(0.0).sqrt(), 0.0))
        .collect();
    let mut out_w = Vec::with_capacity(v.nrows());
    let mut out_k = Vec::with_capacity(v.nrows());
    for i in 0..v.nrows() {
        let mut psi = CVector::zeros(d);
        for (j, s) in scaled.iter().enumerate() {
            let c = v[(i, j)];
            if c != ZERO {
                psi += s * c;
            }
        }
        let gamma = psi.norm_squared();
        if gamma > WEIGHT_FLOOR {
            out_k.push(psi / Complex64::new(gamma.sqrt(), 0.0));
            out_w.push(gamma);
        }
    }
    let total: f64 = out_w.iter().sum();
    for w in &mut out_w {
        *w /= total;
    }
    Decomposition {
        weights: out_w,
        kets: out_k,
        split,
        isometry: v.clone(),
    }
}

/// Eigen-ensemble of a state: weights and kets with eigenvalue above
/// [`RANK_TOL`].
pub fn eigen_ensemble(rho: &DensityMatrix) -> (Vec<f64>, Vec<CVector>) {
    let (values, vectors) = hermitian_eigensystem(rho.matrix());
    values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > RANK_TOL)
        .map(|(j, &l)| (l, vectors.column(j).into_owned()))
        .unzip()
}

pub fn decomposition_from_isometry(rho: &DensityMatrix, v: &CMatrix) -> Result<Decomposition> {
    let split = rho.require_split()?;
    let (weights, kets) = eigen_ensemble(rho);
    check_isometry(v, kets.len())?;
    Ok(remix_unchecked(&weights, &kets, split, v))
}

/// `sum_i gamma_i Tr_B(psi_i) (x) Tr_A(psi_i)`.
pub fn productize(d: &Decomposition) -> DensityMatrix {
    let (n_a, n_b) = d.split;
    let mut acc = CMatrix::zeros(n_a * n_b, n_a * n_b);
    for (w, k) in d.weights.iter().zip(&d.kets) {
        let pure = outer(k, k);
        let ra = partial_trace_matrix(&pure, n_a, n_b, Subsystem::B);
        let rb = partial_trace_matrix(&pure, n_a, n_b, Subsystem::A);
        acc += ra.kronecker(&rb) * Complex64::new(*w, 0.0);
    }
    DensityMatrix::from_trusted(acc, Some(d.split))
}

/// An `m x r` isometry from `2 m r` reals (real parts, then imaginary parts,
/// column-major), orthonormalized by QR.
pub fn isometry_from_params(x: &[f64], m: usize, r: usize) -> Result<CMatrix> {
    if x.len() != 2 * m * r || m < r {
        return Err(QncError::Dimension(format!(
            "need 2*{m}*{r} parameters with m >= r, got {}",
            x.len()
        )));
    }
    let raw = DMatrix::from_fn(m, r, |i, j| Complex64::new(x[j * m + i], x[m * r + j * m + i]));
    Ok(raw.qr().q())
}

/// Haar-distributed `m x r` isometry (or a real orthogonal one).
pub fn random_isometry<R: Rng + ?Sized>(m: usize, r: usize, real: bool, rng: &mut R) -> CMatrix {
    isometry_from_params(&random_isometry_params(m, r, real, rng), m, r)
        .expect("parameter count matches by construction")
}

fn random_isometry_params<R: Rng + ?Sized>(m: usize, r: usize, real: bool, rng: &mut R) -> Vec<f64> {
    (0..2 * m * r)
        .map(|k| {
            if real && k >= m * r {
                0.0
            } else {
                StandardNormal.sample(rng)
            }
        })
        .collect()
}

fn identity_params(m: usize, r: usize) -> Vec<f64> {
    let mut x = vec![0.0; 2 * m * r];
    for j in 0..r {
        x[j * m + j] = 1.0;
    }
    x
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Largest number of terms tried; `None` means `rank^2`.
    pub m_max: Option<usize>,
    pub seed: u64,
    pub max_evaluations: usize,
    pub tolerance: f64,
    /// Gauss-Legendre nodes per axis used on qubit sides during the search.
    pub search_nodes: usize,
    /// Gauss-Legendre nodes per axis for the reported values.
    pub report_nodes: usize,
    /// Monte Carlo samples on larger sides, during the search and for the
    /// report.
    pub search_samples: usize,
    pub report_samples: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            m_max: None,
            seed: 0,
            max_evaluations: 1500,
            tolerance: 1e-7,
            search_nodes: 32,
            report_nodes: 128,
            search_samples: 4_000,
            report_samples: 100_000,
        }
    }
}

impl OptimizerConfig {
    fn side(&self, n: usize, report: bool) -> IntegratorConfig {
        match (n, report) {
            (2, false) => IntegratorConfig::quadrature(self.search_nodes),
            (2, true) => IntegratorConfig::quadrature(self.report_nodes),
            (_, false) => IntegratorConfig::monte_carlo(self.search_samples, self.seed),
            (_, true) => IntegratorConfig::monte_carlo(self.report_samples, self.seed),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchTrace {
    pub restarts: usize,
    pub evaluations: usize,
    /// The best restart met the simplex tolerance and is no worse than the
    /// eigendecomposition start.
    pub converged: bool,
    /// Number of terms of the best decomposition's isometry.
    pub m: usize,
}

#[derive(Clone, Debug)]
pub struct EntanglementResult {
    pub e: f64,
    pub g_rho: f64,
    pub g_best_product: f64,
    /// Combined integration error of the two reported strengths.
    pub integration_error: f64,
    pub best: Decomposition,
    pub trace: SearchTrace,
}

#[derive(Clone, Debug)]
pub struct EntropyResult {
    pub e_s: f64,
    pub s_rho: f64,
    pub s_best_product: f64,
    pub best: Decomposition,
    pub trace: SearchTrace,
}

/// Maximizes `score` over decompositions of `rho`.
fn search<F>(rho: &DensityMatrix, cfg: &OptimizerConfig, score: F) -> Result<(Decomposition, f64, SearchTrace)>
where
    F: Fn(&Decomposition) -> f64,
{
    let split = rho.require_split()?;
    if cfg.restarts == 0 {
        return Err(QncError::Domain("at least one restart is needed".into()));
    }
    let (weights, kets) = eigen_ensemble(rho);
    let r = kets.len();
    let m_max = cfg.m_max.unwrap_or(r * r).max(r);
    let nm = NelderMead {
        step: 0.5,
        tolerance: cfg.tolerance,
        max_evaluations: cfg.max_evaluations,
    };
    let real_mixing = split == (2, 2);
    let objective = |x: &[f64], m: usize| -> f64 {
        match isometry_from_params(x, m, r) {
            Ok(v) => -score(&remix_unchecked(&weights, &kets, split, &v)),
            Err(_) => f64::INFINITY,
        }
    };

    let eigen_start = identity_params(r, r);
    let eigen_value = -objective(&eigen_start, r);
    let mut best: Option<(f64, Vec<f64>, usize, bool)> = None;
    let mut evaluations = 1;
    for k in 0..cfg.restarts {
        let m = r + k % (m_max - r + 1);
        let start = if k == 0 {
            identity_params(m, r)
        } else {
            let mut stream = split_rng(cfg.seed, k as u64);
            random_isometry_params(m, r, real_mixing && k % 2 == 1, &mut stream)
        };
        let found = nm.minimize(&start, |x| objective(x, m));
        evaluations += found.evaluations;
        let value = -found.value;
        // Strict improvement keeps the earliest restart on ties.
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, found.x, m, found.converged));
        }
    }
    let (value, x, m, hit_tolerance) = best.expect("at least one restart ran");
    let v = isometry_from_params(&x, m, r)?;
    let decomposition = remix_unchecked(&weights, &kets, split, &v);
    Ok((
        decomposition,
        value,
        SearchTrace {
            restarts: cfg.restarts,
            evaluations,
            converged: hit_tolerance && value >= eigen_value - cfg.tolerance,
            m,
        },
    ))
}

/// `E = C (G(rho) - G(prod(d*)))` with `d*` the best decomposition found.
/// The optimum is not certified: the reported `E` is an upper bound.
pub fn entanglement_e(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<EntanglementResult> {
    let (n_a, n_b) = rho.require_split()?;
    let coarse = SymmetricRule::new(n_a, n_b, &cfg.side(n_a, false), &cfg.side(n_b, false))?;
    let (best, _, trace) = search(rho, cfg, |d| coarse.evaluate(&productize(d)).unwrap_or(f64::NEG_INFINITY))?;
    let report = |state: &DensityMatrix| -> Result<(f64, f64)> {
        let ab = crate::strength::strength_directed(
            state,
            crate::strength::Direction::AtoB,
            &cfg.side(n_a, true),
        )?;
        let ba = crate::strength::strength_directed(
            state,
            crate::strength::Direction::BtoA,
            &cfg.side(n_b, true),
        )?;
        Ok((
            0.5 * (ab.value + ba.value),
            0.5 * ab.error_estimate.hypot(ba.error_estimate),
        ))
    };
    let (g_rho, err_rho) = report(rho)?;
    let (g_best_product, err_best) = report(&productize(&best))?;
    Ok(EntanglementResult {
        e: E_SCALE * (g_rho - g_best_product),
        g_rho,
        g_best_product,
        integration_error: err_rho.hypot(err_best),
        best,
        trace,
    })
}

/// `E_s = min_d S(prod(d)) - S(rho)`.
pub fn entanglement_es(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<EntropyResult> {
    let (best, neg_entropy, trace) = search(rho, cfg, |d| -von_neumann_entropy(&productize(d)))?;
    let s_rho = von_neumann_entropy(rho);
    let s_best_product = -neg_entropy;
    Ok(EntropyResult {
        e_s: s_best_product - s_rho,
        s_rho,
        s_best_product,
        best,
        trace,
    })
}

/// Symmetric `G` of a decomposition's productization, for spot checks.
pub fn productized_strength(d: &Decomposition, cfg: &IntegratorConfig) -> Result<f64> {
    Ok(strength(&productize(d), cfg)?.value)
}
