//! Rank-one projective measurements in hyperspherical coordinates.
//!
//! A measurement on an `n`-level system is `M = |psi><psi|` with
//!
//! ```text
//! a_1 = cos t_1
//! a_k = sin t_1 ... sin t_{k-1} cos t_k e^{i f_{k-1}}     1 < k < n
//! a_n = sin t_1 ... sin t_{n-1} e^{i f_{n-1}}
//! ```
//!
//! with `t_l` in `[0, pi]` and `f_l` in `[0, 2 pi]`. Integrals over the
//! measurement manifold use the weight `prod_l sin(t_l)^(n-l-1)` over that box.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{QncError, Result};
use crate::linalg::{outer, CMatrix, CVector, ZERO};

/// Angles `(t_1..t_{n-1}, f_1..f_{n-1})` of a rank-one projector.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementParams {
    thetas: Vec<f64>,
    phis: Vec<f64>,
}

/// One coordinate of the measurement box (zero-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParamIndex {
    Theta(usize),
    Phi(usize),
}

impl MeasurementParams {
    /// Both angle lists must have the same nonzero length, with thetas in
    /// `[0, pi]` and phis in `[0, 2 pi]`.
    pub fn new(thetas: Vec<f64>, phis: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() || thetas.len() != phis.len() {
            return Err(QncError::Domain(format!(
                "need n-1 >= 1 thetas and phis, got {} and {}",
                thetas.len(),
                phis.len()
            )));
        }
        if let Some(t) = thetas.iter().find(|t| !(0.0..=PI).contains(*t)) {
            return Err(QncError::Domain(format!("theta {t} outside [0, pi]")));
        }
        if let Some(f) = phis.iter().find(|f| !(0.0..=TAU).contains(*f)) {
            return Err(QncError::Domain(format!("phi {f} outside [0, 2pi]")));
        }
        Ok(Self { thetas, phis })
    }

    /// Qubit measurement at `(theta, phi)`.
    pub fn qubit(theta: f64, phi: f64) -> Result<Self> {
        Self::new(vec![theta], vec![phi])
    }

    pub fn dim(&self) -> usize {
        self.thetas.len() + 1
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn get(&self, which: ParamIndex) -> f64 {
        match which {
            ParamIndex::Theta(i) => self.thetas[i],
            ParamIndex::Phi(i) => self.phis[i],
        }
    }

    /// Copy with one coordinate replaced; no range check (used for finite
    /// differences that step just outside the box).
    pub fn with_value(&self, which: ParamIndex, value: f64) -> Self {
        let mut out = self.clone();
        match which {
            ParamIndex::Theta(i) => out.thetas[i] = value,
            ParamIndex::Phi(i) => out.phis[i] = value,
        }
        out
    }

    /// All coordinates, thetas first.
    pub fn values(&self) -> Vec<f64> {
        self.thetas.iter().chain(&self.phis).copied().collect()
    }
}

/// Coordinate order used for characteristic-function components and grids:
/// `t_1..t_{n-1}, f_1..f_{n-1}`.
pub fn param_indices(n: usize) -> Vec<ParamIndex> {
    (0..n - 1)
        .map(ParamIndex::Theta)
        .chain((0..n - 1).map(ParamIndex::Phi))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: CMatrix,
}

impl Projector {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Projector onto a (normalized internally) ket.
    pub fn from_ket(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 1e-15) {
            return Err(QncError::Domain("zero ket".into()));
        }
        let unit = psi / Complex64::new(norm, 0.0);
        Ok(Self {
            matrix: outer(&unit, &unit),
        })
    }
}

/// `prod_{l < k, l != skip} sin t_l`.
fn sin_prefix(thetas: &[f64], k: usize, skip: Option<usize>) -> f64 {
    thetas[..k]
        .iter()
        .enumerate()
        .filter(|(l, _)| Some(*l) != skip)
        .map(|(_, t)| t.sin())
        .product()
}

pub fn ket_from_params(p: &MeasurementParams) -> CVector {
    let n = p.dim();
    let t = &p.thetas;
    CVector::from_fn(n, |k, _| {
        let radial = if k + 1 < n {
            sin_prefix(t, k, None) * t[k].cos()
        } else {
            sin_prefix(t, k, None)
        };
        if k == 0 {
            Complex64::new(radial, 0.0)
        } else {
            Complex64::from_polar(radial, p.phis[k - 1])
        }
    })
}

/// Analytic derivative of the ket with respect to one coordinate.
pub fn ket_derivative(p: &MeasurementParams, which: ParamIndex) -> CVector {
    let n = p.dim();
    let t = &p.thetas;
    match which {
        ParamIndex::Phi(j) => {
            let psi = ket_from_params(p);
            CVector::from_fn(n, |k, _| {
                if k == j + 1 {
                    psi[k] * Complex64::new(0.0, 1.0)
                } else {
                    ZERO
                }
            })
        }
        ParamIndex::Theta(j) => CVector::from_fn(n, |k, _| {
            let radial = if k < j {
                0.0
            } else if k == j {
                -sin_prefix(t, k, None) * t[k].sin()
            } else {
                let head = sin_prefix(t, k, Some(j)) * t[j].cos();
                if k + 1 < n {
                    head * t[k].cos()
                } else {
                    head
                }
            };
            if k == 0 {
                Complex64::new(radial, 0.0)
            } else {
                Complex64::from_polar(1.0, p.phis[k - 1]) * radial
            }
        }),
    }
}

pub fn projector_from_params(p: &MeasurementParams) -> Projector {
    let psi = ket_from_params(p);
    Projector {
        matrix: outer(&psi, &psi),
    }
}

/// `dM/dx = |d psi><psi| + |psi><d psi|`. Vanishes at parameterization poles.
pub fn projector_derivative(p: &MeasurementParams, which: ParamIndex) -> CMatrix {
    let psi = ket_from_params(p);
    let d = ket_derivative(p, which);
    outer(&d, &psi) + outer(&psi, &d)
}

/// Recovers angles for a ket (global phase removed so that `a_1` is real and
/// nonnegative). Coordinates left undetermined by zero amplitudes are set to 0.
pub fn params_from_ket(psi: &CVector) -> Result<MeasurementParams> {
    let n = psi.len();
    if n < 2 {
        return Err(QncError::Domain("ket dimension must be at least 2".into()));
    }
    let norm = psi.norm();
    if !(norm > 1e-15) {
        return Err(QncError::Domain("zero ket".into()));
    }
    let mut v = psi / Complex64::new(norm, 0.0);
    let lead = v.iter().find(|z| z.norm() > 1e-300).copied().unwrap_or(ZERO);
    if v[0].norm() > 0.0 {
        let phase = v[0] / v[0].norm();
        v /= phase;
    } else if lead.norm() > 0.0 {
        // a_1 = 0: any global phase works; keep the first nonzero one real.
        let phase = lead / lead.norm();
        v /= phase;
    }
    let mut thetas = Vec::with_capacity(n - 1);
    let mut phis = Vec::with_capacity(n - 1);
    let mut remaining = 1.0_f64;
    for k in 0..n - 1 {
        let theta = if remaining > 1e-300 {
            (v[k].norm() / remaining).clamp(-1.0, 1.0).acos()
        } else {
            0.0
        };
        remaining *= theta.sin();
        thetas.push(theta);
    }
    for k in 1..n {
        let arg = v[k].arg();
        phis.push(if arg < 0.0 { arg + TAU } else { arg });
    }
    MeasurementParams::new(thetas, phis)
}

/// `prod_{l=1}^{n-1} sin(t_l)^(n-l-1)`.
pub fn measure_weight(p: &MeasurementParams) -> f64 {
    let n = p.dim();
    p.thetas
        .iter()
        .enumerate()
        .map(|(l, t)| t.sin().powi((n - l - 2) as i32))
        .product()
}

/// `int_0^pi sin^k(t) dt`.
pub fn sin_power_integral(k: usize) -> f64 {
    match k {
        0 => PI,
        1 => 2.0,
        _ => (k as f64 - 1.0) / k as f64 * sin_power_integral(k - 2),
    }
}

/// Total weighted volume of the measurement box in dimension `n`.
pub fn omega_volume(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(QncError::Domain(format!("omega volume needs n >= 2, got {n}")));
    }
    let angular: f64 = (1..n).map(|l| sin_power_integral(n - l - 1)).product();
    Ok(TAU.powi((n - 1) as i32) * angular)
}

/// Draws angles with density proportional to [`measure_weight`].
pub fn sample_params<R: Rng + ?Sized>(n: usize, rng: &mut R) -> MeasurementParams {
    let thetas = (1..n).map(|l| sample_sin_power(n - l - 1, rng)).collect();
    let phis = (1..n).map(|_| rng.random::<f64>() * TAU).collect();
    MeasurementParams { thetas, phis }
}

fn sample_sin_power<R: Rng + ?Sized>(k: usize, rng: &mut R) -> f64 {
    match k {
        0 => rng.random::<f64>() * PI,
        1 => (1.0 - 2.0 * rng.random::<f64>()).acos(),
        _ => loop {
            let t = rng.random::<f64>() * PI;
            if rng.random::<f64>() < t.sin().powi(k as i32) {
                break t;
            }
        },
    }
}

/// Closed grid over the measurement box, row-major over
/// [`param_indices`] order (the last coordinate varies fastest). Each
/// resolution must be at least 2 so that both endpoints are included.
pub fn closed_grid(n: usize, resolutions: &[usize]) -> Result<Vec<MeasurementParams>> {
    let axes = param_indices(n);
    if resolutions.len() != axes.len() {
        return Err(QncError::Domain(format!(
            "need {} grid resolutions, got {}",
            axes.len(),
            resolutions.len()
        )));
    }
    if resolutions.iter().any(|&k| k < 2) {
        return Err(QncError::Domain("grid resolution must be at least 2".into()));
    }
    let values: Vec<Vec<f64>> = axes
        .iter()
        .zip(resolutions)
        .map(|(axis, &k)| {
            let top = match axis {
                ParamIndex::Theta(_) => PI,
                ParamIndex::Phi(_) => TAU,
            };
            (0..k).map(|i| top * i as f64 / (k - 1) as f64).collect()
        })
        .collect();
    let total: usize = resolutions.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes.len()];
    for _ in 0..total {
        let coords: Vec<f64> = idx.iter().zip(&values).map(|(&i, v)| v[i]).collect();
        let (t, f) = coords.split_at(n - 1);
        out.push(MeasurementParams {
            thetas: t.to_vec(),
            phis: f.to_vec(),
        });
        for d in (0..idx.len()).rev() {
            idx[d] += 1;
            if idx[d] < resolutions[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(out)
}

/// Angle assignments that confine the measured ket to `span{|i>, |j>}`
/// (zero-based, `i < j`), leaving two free coordinates that sweep the
/// embedded qubit `cos(t)|i> + sin(t) e^{i f}|j>`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceFamily {
    pub n: usize,
    pub i: usize,
    pub j: usize,
    base: MeasurementParams,
    /// The coordinate playing the role of the qubit polar angle.
    pub free_theta: ParamIndex,
    /// The coordinate playing the role of the qubit phase.
    pub free_phi: ParamIndex,
}

impl SubspaceFamily {
    /// Parameters for `cos(t)|i> + sin(t) e^{i f}|j>`.
    pub fn params(&self, t: f64, f: f64) -> Result<MeasurementParams> {
        let p = self.base.with_value(self.free_theta, t).with_value(self.free_phi, f);
        MeasurementParams::new(p.thetas, p.phis)
    }
}

pub fn subspace_params(i: usize, j: usize, n: usize) -> Result<SubspaceFamily> {
    if n < 2 || i >= j || j >= n {
        return Err(QncError::Domain(format!(
            "subspace indices need 0 <= i < j < n, got i={i}, j={j}, n={n}"
        )));
    }
    let mut thetas = vec![0.0; n - 1];
    for (l, t) in thetas.iter_mut().enumerate() {
        if l < j && l != i {
            // cos = 0 removes |l>, sin = 1 passes amplitude through.
            *t = FRAC_PI_2;
        }
    }
    // t_j = 0 (when it exists) removes every level above j.
    let base = MeasurementParams {
        thetas,
        phis: vec![0.0; n - 1],
    };
    Ok(SubspaceFamily {
        n,
        i,
        j,
        base,
        free_theta: ParamIndex::Theta(i),
        free_phi: ParamIndex::Phi(j - 1),
    })
}

/// Parameters of the basis projector `|k><k|`.
pub fn basis_params(n: usize, k: usize) -> Result<MeasurementParams> {
    if k >= n {
        return Err(QncError::Domain(format!("basis index {k} out of range for n={n}")));
    }
    if k + 1 < n {
        subspace_params(k, k + 1, n)?.params(0.0, 0.0)
    } else {
        subspace_params(k - 1, k, n)?.params(FRAC_PI_2, 0.0)
    }
}
