//! Conditional states and the characteristic function.
//!
//! For a measurement `M = |psi><psi|` on A the unnormalized conditional
//! operator is `N = Tr_A((M (x) I) rho) = sum_{k,l} psi_k conj(psi_l) B_lk`
//! where `B_lk = <l|rho|k>` is an `n_b x n_b` block. Each component of the
//! characteristic function is
//!
//! ```text
//! F_x = || d(N/p)/dx ||_1 / || dM/dx ||_1,     p = Tr N
//! ```
//!
//! and the quotient rule gives `p F_x = || dN - N dp/p ||_1 / || dM ||_1`,
//! which stays bounded as `p -> 0`. The engine below works with that product
//! directly.

use num_complex::Complex64;

use crate::error::{QncError, Result};
use crate::linalg::{trace_norm_hermitian, CMatrix, CVector, DensityMatrix, ZERO};
use crate::measurement::{
    closed_grid, ket_derivative, ket_from_params, param_indices, MeasurementParams, Projector,
};
use crate::su_basis::{bloch_components, generator_basis};

/// Probability below which the conditional state is left undefined.
pub const P_CUTOFF: f64 = 1e-12;

/// Denominator trace norm below which a component sits on a coordinate pole.
pub const POLE_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct CharSample {
    pub params: MeasurementParams,
    pub p: f64,
    pub cond_state: Option<DensityMatrix>,
    /// `F` along `t_1..t_{n-1}` then `f_1..f_{n-1}`. Zero where undefined.
    pub components: Vec<f64>,
    pub magnitude: f64,
    pub defined: bool,
    /// Components forced to zero because `dM/dx` vanishes.
    pub poles: Vec<bool>,
}

impl CharSample {
    /// `p |F|`, the strength integrand (zero when undefined).
    pub fn weighted_magnitude(&self) -> f64 {
        if self.defined {
            self.p * self.magnitude
        } else {
            0.0
        }
    }
}

/// The state-independent part of a sample: the measured ket, its
/// derivatives and the denominator norms.
#[derive(Clone, Debug)]
pub(crate) struct Probe {
    pub ket: CVector,
    pub dkets: Vec<CVector>,
    pub dm_norms: Vec<f64>,
}

impl Probe {
    pub fn new(params: &MeasurementParams) -> Self {
        let ket = ket_from_params(params);
        let dkets: Vec<CVector> = param_indices(params.dim())
            .into_iter()
            .map(|x| ket_derivative(params, x))
            .collect();
        // |d psi><psi| + |psi><d psi| has eigenvalues +-|v| with v the part
        // of d psi orthogonal to psi.
        let dm_norms = dkets
            .iter()
            .map(|d| {
                let overlap = ket.dotc(d).norm_sqr();
                2.0 * (d.norm_squared() - overlap).max(0.0).sqrt()
            })
            .collect();
        Self { ket, dkets, dm_norms }
    }
}

/// Result of evaluating one probe against a state.
#[derive(Clone, Debug)]
pub(crate) struct Response {
    pub p: f64,
    pub n: CMatrix,
    /// `p F_x` per component.
    pub weighted: Vec<f64>,
    pub poles: Vec<bool>,
    pub defined: bool,
}

impl Response {
    pub fn weighted_magnitude(&self) -> f64 {
        if self.defined {
            self.weighted.iter().map(|x| x * x).sum::<f64>().sqrt()
        } else {
            0.0
        }
    }
}

/// A bipartite state cut into its `n_a^2` blocks.
#[derive(Clone, Debug)]
pub(crate) struct BlockState {
    pub n_a: usize,
    pub n_b: usize,
    blocks: Vec<CMatrix>,
}

impl BlockState {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        let (n_a, n_b) = rho.require_split()?;
        Ok(Self::from_matrix(rho.matrix(), n_a, n_b))
    }

    pub fn from_matrix(m: &CMatrix, n_a: usize, n_b: usize) -> Self {
        let mut blocks = Vec::with_capacity(n_a * n_a);
        for l in 0..n_a {
            for k in 0..n_a {
                blocks.push(m.view((l * n_b, k * n_b), (n_b, n_b)).into_owned());
            }
        }
        Self { n_a, n_b, blocks }
    }

    fn block(&self, l: usize, k: usize) -> &CMatrix {
        &self.blocks[l * self.n_a + k]
    }

    /// `C_k = sum_l conj(psi_l) B_lk`, so that `N = sum_k psi_k C_k`.
    fn contract(&self, ket: &CVector) -> Vec<CMatrix> {
        (0..self.n_a)
            .map(|k| {
                let mut c = CMatrix::zeros(self.n_b, self.n_b);
                for l in 0..self.n_a {
                    let w = ket[l].conj();
                    if w != ZERO {
                        c += self.block(l, k) * w;
                    }
                }
                c
            })
            .collect()
    }

    pub fn conditional(&self, ket: &CVector) -> CMatrix {
        combine(&self.contract(ket), ket)
    }

    pub fn respond(&self, probe: &Probe, p_cutoff: f64) -> Response {
        let c = self.contract(&probe.ket);
        let n = combine(&c, &probe.ket);
        let p = n.trace().re;
        let dims = probe.dkets.len();
        if !(p > p_cutoff) {
            return Response {
                p,
                n,
                weighted: vec![0.0; dims],
                poles: vec![false; dims],
                defined: false,
            };
        }
        let mut weighted = Vec::with_capacity(dims);
        let mut poles = Vec::with_capacity(dims);
        for (d, &dm) in probe.dkets.iter().zip(&probe.dm_norms) {
            if dm < POLE_TOL {
                weighted.push(0.0);
                poles.push(true);
                continue;
            }
            // dN = X + X^dagger with X = sum_k d psi_k C_k.
            let x = combine(&c, d);
            let dn = &x + x.adjoint();
            let dp = dn.trace().re;
            let numerator = dn - &n * Complex64::new(dp / p, 0.0);
            weighted.push(trace_norm_hermitian(&numerator) / dm);
            poles.push(false);
        }
        Response {
            p,
            n,
            weighted,
            poles,
            defined: true,
        }
    }
}

fn combine(c: &[CMatrix], coeffs: &CVector) -> CMatrix {
    let mut out = CMatrix::zeros(c[0].nrows(), c[0].ncols());
    for (ck, &w) in c.iter().zip(coeffs.iter()) {
        if w != ZERO {
            out += ck * w;
        }
    }
    out
}

fn check_measured_dim(rho: &DensityMatrix, n: usize) -> Result<(usize, usize)> {
    let (n_a, n_b) = rho.require_split()?;
    if n != n_a {
        return Err(QncError::Dimension(format!(
            "measurement acts on dimension {n}, subsystem A has {n_a}"
        )));
    }
    Ok((n_a, n_b))
}

/// `p = Tr((M (x) I) rho)` and, when `p` exceeds [`P_CUTOFF`], the
/// normalized conditional state of B.
pub fn conditional_state(
    rho: &DensityMatrix,
    m: &Projector,
) -> Result<(f64, Option<DensityMatrix>)> {
    let (n_a, n_b) = check_measured_dim(rho, m.dim())?;
    let blocks = BlockState::from_matrix(rho.matrix(), n_a, n_b);
    // Any rank-one projector is |psi><psi| for psi = M e_k / |M e_k|.
    let column = (0..n_a)
        .map(|k| m.matrix().column(k).into_owned())
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .ok_or_else(|| QncError::Dimension("empty projector".into()))?;
    let ket = &column / Complex64::new(column.norm(), 0.0);
    let n = blocks.conditional(&ket);
    let p = n.trace().re;
    if p > P_CUTOFF {
        Ok((p, Some(DensityMatrix::from_trusted(n / Complex64::new(p, 0.0), None))))
    } else {
        Ok((p, None))
    }
}

fn sample_from_response(params: &MeasurementParams, r: Response) -> CharSample {
    let Response {
        p,
        n,
        weighted,
        poles,
        defined,
    } = r;
    if !defined {
        let k = weighted.len();
        return CharSample {
            params: params.clone(),
            p,
            cond_state: None,
            components: vec![0.0; k],
            magnitude: 0.0,
            defined,
            poles,
        };
    }
    let components: Vec<f64> = weighted.iter().map(|w| w / p).collect();
    let magnitude = components.iter().map(|x| x * x).sum::<f64>().sqrt();
    CharSample {
        params: params.clone(),
        p,
        cond_state: Some(DensityMatrix::from_trusted(n / Complex64::new(p, 0.0), None)),
        components,
        magnitude,
        defined,
        poles,
    }
}

pub fn char_components(rho: &DensityMatrix, params: &MeasurementParams) -> Result<CharSample> {
    let (n_a, n_b) = check_measured_dim(rho, params.dim())?;
    let blocks = BlockState::from_matrix(rho.matrix(), n_a, n_b);
    let r = blocks.respond(&Probe::new(params), P_CUTOFF);
    Ok(sample_from_response(params, r))
}

/// Two-qubit form using Euclidean norms of Bloch-vector derivatives.
pub fn char_components_bloch(rho: &DensityMatrix, params: &MeasurementParams) -> Result<CharSample> {
    let (n_a, n_b) = check_measured_dim(rho, params.dim())?;
    if n_a != 2 || n_b != 2 {
        return Err(QncError::Dimension(format!(
            "Bloch form needs two qubits, got {n_a}x{n_b}"
        )));
    }
    let basis = generator_basis(2)?;
    let blocks = BlockState::from_matrix(rho.matrix(), 2, 2);
    let ket = ket_from_params(params);
    let c = blocks.contract(&ket);
    let n = combine(&c, &ket);
    let p = n.trace().re;
    let axes = param_indices(2);
    if !(p > P_CUTOFF) {
        return Ok(CharSample {
            params: params.clone(),
            p,
            cond_state: None,
            components: vec![0.0; axes.len()],
            magnitude: 0.0,
            defined: false,
            poles: vec![false; axes.len()],
        });
    }
    let mut components = Vec::with_capacity(axes.len());
    let mut poles = Vec::with_capacity(axes.len());
    for x in axes {
        let d = ket_derivative(params, x);
        let dm = crate::linalg::outer(&d, &ket) + crate::linalg::outer(&ket, &d);
        let rm = bloch_components(&dm, &basis)?.norm();
        if rm < POLE_TOL {
            components.push(0.0);
            poles.push(true);
            continue;
        }
        let xm = combine(&c, &d);
        let dn = &xm + xm.adjoint();
        let dp = dn.trace().re;
        let drho = dn / Complex64::new(p, 0.0) - &n * Complex64::new(dp / (p * p), 0.0);
        components.push(bloch_components(&drho, &basis)?.norm() / rm);
        poles.push(false);
    }
    let magnitude = components.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(CharSample {
        params: params.clone(),
        p,
        cond_state: Some(DensityMatrix::from_trusted(n / Complex64::new(p, 0.0), None)),
        components,
        magnitude,
        defined: true,
        poles,
    })
}

/// Samples on the closed grid of [`closed_grid`], in its row-major order.
pub fn char_surface(rho: &DensityMatrix, resolutions: &[usize]) -> Result<Vec<CharSample>> {
    let (n_a, n_b) = rho.require_split()?;
    let grid = closed_grid(n_a, resolutions)?;
    let blocks = BlockState::from_matrix(rho.matrix(), n_a, n_b);
    Ok(grid
        .iter()
        .map(|params| sample_from_response(params, blocks.respond(&Probe::new(params), P_CUTOFF)))
        .collect())
}
