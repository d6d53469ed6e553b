//! Steering surfaces of two-qubit states and the main-normal test.
//!
//! Measuring `M(t, f)` on A steers B to the Bloch vector `r_B`; the
//! unnormalized vector `s = p r_B = Tr(N sigma)` is smooth everywhere. For a
//! separable state whose A-parts are real, `s` lies in a plane, so the unit
//! normal `d_t s x d_f s / |...|` is the same line at every point. The test
//! below measures how far the normals stray from a common line.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::characteristic::BlockState;
use crate::error::{QncError, Result};
use crate::linalg::{CMatrix, CVector, DensityMatrix, ONE, ZERO};
use crate::measurement::{basis_params, closed_grid, ket_from_params, sample_params, MeasurementParams};
use crate::states::rng;

/// Cross products shorter than this leave the normal undefined.
pub const NORMAL_TOL: f64 = 1e-10;

/// Default angular tolerance for a constant normal, in radians.
pub const DEFAULT_NORMAL_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct SteeringPoint {
    pub params: MeasurementParams,
    pub p: f64,
    /// Bloch vector of the conditional state of B; `None` where `p` vanishes.
    pub r_b: Option<[f64; 3]>,
    pub s: [f64; 3],
    pub normal: Option<[f64; 3]>,
}

/// Steering points on a closed `k x k` grid over `(t, f)`, row-major in `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct SteeringSurface {
    pub resolution: usize,
    pub points: Vec<SteeringPoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SeparableReal,
    NotSeparableReal,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparabilityVerdict {
    pub verdict: Verdict,
    /// Largest angle between a normal line and the reference line.
    pub max_normal_deviation: f64,
    pub degenerate_fraction: f64,
    pub tolerance: f64,
}

fn pauli_vector(n: &CMatrix) -> [f64; 3] {
    [
        2.0 * n[(0, 1)].re,
        2.0 * n[(1, 0)].im,
        (n[(0, 0)] - n[(1, 1)]).re,
    ]
}

fn steering_point(blocks: &BlockState, params: &MeasurementParams, p_cutoff: f64) -> SteeringPoint {
    let n = blocks.conditional(&ket_from_params(params));
    let p = n.trace().re;
    let s = pauli_vector(&n);
    let r_b = (p > p_cutoff).then(|| [s[0] / p, s[1] / p, s[2] / p]);
    SteeringPoint {
        params: params.clone(),
        p,
        r_b,
        s,
        normal: None,
    }
}

fn require_qubit_b(rho: &DensityMatrix) -> Result<(usize, usize)> {
    let (n_a, n_b) = rho.require_split()?;
    if n_b != 2 {
        return Err(QncError::Dimension(format!(
            "steering needs a qubit on B, got dimension {n_b}"
        )));
    }
    Ok((n_a, n_b))
}

/// Steering surface of a two-qubit state with normals from central
/// differences (periodic in `f`, one-sided at the `t` edges).
pub fn steering_surface(rho: &DensityMatrix, k: usize) -> Result<SteeringSurface> {
    let (n_a, _) = require_qubit_b(rho)?;
    if n_a != 2 {
        return Err(QncError::Dimension(format!(
            "steering surfaces need a qubit on A, got dimension {n_a}"
        )));
    }
    if k < 3 {
        return Err(QncError::Domain(format!("surface grid needs k >= 3, got {k}")));
    }
    let blocks = BlockState::new(rho)?;
    let grid = closed_grid(2, &[k, k])?;
    let mut points: Vec<SteeringPoint> = grid
        .iter()
        .map(|params| steering_point(&blocks, params, crate::characteristic::P_CUTOFF))
        .collect();
    let s = |i: usize, j: usize| Vector3::from(points[i * k + j].s);
    let h_t = std::f64::consts::PI / (k - 1) as f64;
    let h_f = std::f64::consts::TAU / (k - 1) as f64;
    let mut normals = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let d_t = if i == 0 {
                (s(1, j) - s(0, j)) / h_t
            } else if i == k - 1 {
                (s(k - 1, j) - s(k - 2, j)) / h_t
            } else {
                (s(i + 1, j) - s(i - 1, j)) / (2.0 * h_t)
            };
            // Column k-1 repeats column 0 (f = 2 pi).
            let prev = if j == 0 { k - 2 } else { j - 1 };
            let next = if j == k - 1 { 1 } else { j + 1 };
            let d_f = (s(i, next) - s(i, prev)) / (2.0 * h_f);
            let c = d_t.cross(&d_f);
            let norm = c.norm();
            normals.push((norm >= NORMAL_TOL).then(|| {
                let u = c / norm;
                [u[0], u[1], u[2]]
            }));
        }
    }
    for (pt, n) in points.iter_mut().zip(normals) {
        pt.normal = n;
    }
    Ok(SteeringSurface { resolution: k, points })
}

/// Sampled steering points for any measured dimension (no normals).
pub fn steering_samples(rho: &DensityMatrix, count: usize, seed: u64) -> Result<Vec<SteeringPoint>> {
    let (n_a, _) = require_qubit_b(rho)?;
    let blocks = BlockState::new(rho)?;
    let mut r = rng(seed);
    Ok((0..count)
        .map(|_| steering_point(&blocks, &sample_params(n_a, &mut r), crate::characteristic::P_CUTOFF))
        .collect())
}

/// Compares every defined normal with the first one, as lines.
pub fn main_normal_constancy(surface: &SteeringSurface, tol: f64) -> SeparabilityVerdict {
    let normals: Vec<Vector3<f64>> = surface
        .points
        .iter()
        .filter_map(|p| p.normal.map(Vector3::from))
        .collect();
    let total = surface.points.len().max(1);
    let degenerate_fraction = (surface.points.len() - normals.len()) as f64 / total as f64;
    let max_normal_deviation = match normals.first() {
        Some(reference) => normals
            .iter()
            .map(|n| n.cross(reference).norm().atan2(n.dot(reference).abs()))
            .fold(0.0, f64::max),
        None => 0.0,
    };
    let verdict = if degenerate_fraction >= 0.5 {
        Verdict::Inconclusive
    } else if max_normal_deviation <= tol {
        Verdict::SeparableReal
    } else {
        Verdict::NotSeparableReal
    };
    SeparabilityVerdict {
        verdict,
        max_normal_deviation,
        degenerate_fraction,
        tolerance: tol,
    }
}

/// Closed form for the overlap `Tr(|psi_k><psi_k| M(t, f))` with
/// `|psi_k> = cos(a)|0> + sin(a) e^{i f_k}|1>`, as published.
///
/// The sign of the second term is `+`; the direct overlap has `-`
/// (see [`lambda_direct`]). Both are kept so the difference stays visible.
pub fn lambda_closed_form(theta: f64, phi: f64, alpha_k: f64, phi_k: f64) -> f64 {
    (theta - alpha_k).cos().powi(2)
        + (2.0 * theta).sin() * (2.0 * alpha_k).sin() * (0.5 * (phi - phi_k)).sin().powi(2)
}

/// `|<psi_k|psi_M>|^2` evaluated directly from the kets.
pub fn lambda_direct(theta: f64, phi: f64, alpha_k: f64, phi_k: f64) -> f64 {
    let m = CVector::from_vec(vec![
        Complex64::new(theta.cos(), 0.0),
        Complex64::from_polar(theta.sin(), phi),
    ]);
    let k = CVector::from_vec(vec![
        Complex64::new(alpha_k.cos(), 0.0),
        Complex64::from_polar(alpha_k.sin(), phi_k),
    ]);
    k.dotc(&m).norm_sqr()
}

/// `sum_i (1/m) |i><i| (x) |b_i><b_i|` with
/// `|b_i> = cos(i pi/m)|0> + sin(i pi/m)|1>`, `i = 1..m`.
pub fn polytope_state(m: usize) -> Result<DensityMatrix> {
    if m < 2 {
        return Err(QncError::Domain(format!("polytope needs m >= 2, got {m}")));
    }
    let w = 1.0 / m as f64;
    let mut rho = CMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        let angle = (i + 1) as f64 * std::f64::consts::PI / m as f64;
        let b = [Complex64::new(angle.cos(), 0.0), Complex64::new(angle.sin(), 0.0)];
        for r in 0..2 {
            for c in 0..2 {
                rho[(2 * i + r, 2 * i + c)] = b[r] * b[c].conj() * w;
            }
        }
    }
    Ok(DensityMatrix::from_trusted(rho, Some((m, 2))))
}

/// Bloch vectors `(sin(2 i pi/m), 0, cos(2 i pi/m))` of the B parts.
pub fn polytope_vertices(m: usize) -> Vec<[f64; 3]> {
    (1..=m)
        .map(|i| {
            let a = 2.0 * i as f64 * std::f64::consts::PI / m as f64;
            [a.sin(), 0.0, a.cos()]
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolytopeReport {
    pub m: usize,
    pub samples: usize,
    /// Largest distance of a steered point outside the hull (negative when
    /// every point is strictly inside).
    pub max_outside: f64,
    pub all_inside: bool,
    /// Largest distance from a vertex to its nearest steered point.
    pub max_vertex_gap: f64,
    pub hull_vertices: usize,
    pub points: Vec<SteeringPoint>,
}

pub const HULL_SLACK: f64 = 1e-9;

/// Steers the polytope state with `samples` random A-measurements plus the
/// `m` basis measurements and checks the points against the hull of the
/// vertex Bloch vectors.
pub fn polytope_diagnostics(m: usize, samples: usize, seed: u64) -> Result<PolytopeReport> {
    let rho = polytope_state(m)?;
    let mut points = steering_samples(&rho, samples, seed)?;
    let blocks = BlockState::new(&rho)?;
    for k in 0..m {
        points.push(steering_point(&blocks, &basis_params(m, k)?, crate::characteristic::P_CUTOFF));
    }
    let vertices = polytope_vertices(m);
    let hull = PlanarHull::new(&vertices)?;
    let mut max_outside = f64::NEG_INFINITY;
    let mut steered = Vec::with_capacity(points.len());
    for p in &points {
        let r = p
            .r_b
            .ok_or_else(|| QncError::Contract("polytope measurement with vanishing probability".into()))?;
        max_outside = max_outside.max(hull.outside_distance(&r));
        steered.push(Vector3::from(r));
    }
    let max_vertex_gap = vertices
        .iter()
        .map(|v| {
            let v = Vector3::from(*v);
            steered.iter().map(|r| (r - v).norm()).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(PolytopeReport {
        m,
        samples,
        max_outside,
        all_inside: max_outside <= HULL_SLACK,
        max_vertex_gap,
        hull_vertices: hull.vertices.len(),
        points,
    })
}

/// Convex hull of coplanar points in 3D, held in 2D plane coordinates.
#[derive(Clone, Debug)]
pub struct PlanarHull {
    origin: Vector3<f64>,
    axes: [Vector3<f64>; 2],
    normal: Vector3<f64>,
    /// Counter-clockwise, without collinear points.
    pub vertices: Vec<[f64; 2]>,
}

impl PlanarHull {
    pub fn new(points: &[[f64; 3]]) -> Result<Self> {
        if points.is_empty() {
            return Err(QncError::Domain("hull of no points".into()));
        }
        let pts: Vec<Vector3<f64>> = points.iter().map(|p| Vector3::from(*p)).collect();
        let origin = pts.iter().sum::<Vector3<f64>>() / pts.len() as f64;
        let mut cov = Matrix3::zeros();
        for p in &pts {
            let d = p - origin;
            cov += d * d.transpose();
        }
        let eig = cov.symmetric_eigen();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let axes = [
            eig.eigenvectors.column(order[0]).into_owned(),
            eig.eigenvectors.column(order[1]).into_owned(),
        ];
        let normal = eig.eigenvectors.column(order[2]).into_owned();
        let off_plane = pts.iter().map(|p| (p - origin).dot(&normal).abs()).fold(0.0, f64::max);
        if off_plane > 1e-9 {
            return Err(QncError::Contract(format!(
                "hull points are not coplanar (offset {off_plane:.3e})"
            )));
        }
        let flat: Vec<[f64; 2]> = pts
            .iter()
            .map(|p| {
                let d = p - origin;
                [d.dot(&axes[0]), d.dot(&axes[1])]
            })
            .collect();
        Ok(Self {
            origin,
            axes,
            normal,
            vertices: monotone_chain(flat),
        })
    }

    /// Signed distance outside the hull in 3D (out-of-plane offset
    /// included); `<= 0` means inside.
    pub fn outside_distance(&self, p: &[f64; 3]) -> f64 {
        let d = Vector3::from(*p) - self.origin;
        let off = d.dot(&self.normal).abs();
        let q = [d.dot(&self.axes[0]), d.dot(&self.axes[1])];
        let in_plane = match self.vertices.len() {
            1 => dist2(q, self.vertices[0]),
            2 => segment_distance(q, self.vertices[0], self.vertices[1]),
            _ => {
                let mut worst = f64::NEG_INFINITY;
                for (i, &a) in self.vertices.iter().enumerate() {
                    let b = self.vertices[(i + 1) % self.vertices.len()];
                    let edge = [b[0] - a[0], b[1] - a[1]];
                    let len = edge[0].hypot(edge[1]);
                    // Positive to the right of a counter-clockwise edge.
                    let side = -(edge[0] * (q[1] - a[1]) - edge[1] * (q[0] - a[0])) / len;
                    worst = worst.max(side);
                }
                worst
            }
        };
        if off > 0.0 {
            in_plane.max(0.0).hypot(off).max(in_plane)
        } else {
            in_plane
        }
    }
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn segment_distance(q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        (((q[0] - a[0]) * ab[0] + (q[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist2(q, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain, dropping collinear points (within 1e-12).
fn monotone_chain(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| dist2(*a, *b) < 1e-12);
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross2(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-12 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross2(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-12 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// `(|0><0| (x) |0><0| + |+><+| (x) |+><+|) / 2`.
pub fn real_separable_example() -> DensityMatrix {
    let zero = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
    let half = Complex64::new(0.5, 0.0);
    let plus = CMatrix::from_element(2, 2, half);
    let m = (zero.kronecker(&zero) + plus.kronecker(&plus)) * half;
    DensityMatrix::from_trusted(m, Some((2, 2)))
}

/// Random separable two-qubit state with real A-parts:
/// `sum_i w_i rho_A^i (x) rho_B^i`, `terms` components.
pub fn random_real_separable<R: Rng + ?Sized>(terms: usize, r: &mut R) -> DensityMatrix {
    let w = crate::states::random_simplex(terms, r);
    let mut acc = CMatrix::zeros(4, 4);
    for wi in w {
        let ra = crate::states::random_real_density(2, r);
        let rb = crate::states::random_density(2, r);
        acc += ra.matrix().kronecker(rb.matrix()) * Complex64::new(wi, 0.0);
    }
    DensityMatrix::from_trusted(acc, Some((2, 2)))
}
