//! The strength functional
//!
//! ```text
//! G_{A->B} = sqrt(n_A) / Omega * int p |F| dOmega
//! ```
//!
//! integrated over the measurement box of the measured side, either by a
//! tensor Gauss-Legendre rule or by Monte Carlo sampling from the measure.
//! `G_{B->A}` measures B instead, and the symmetric `G` is their mean.

use std::f64::consts::{PI, TAU};

use gauss_quad::legendre::GaussLegendre;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::characteristic::{BlockState, Probe, P_CUTOFF};
use crate::error::{QncError, Result};
use crate::linalg::{swap_subsystems, DensityMatrix};
use crate::measurement::{measure_weight, omega_volume, sample_params, MeasurementParams};
use crate::states::split_rng;

#[derive(Clone, Debug, PartialEq)]
pub enum IntegrationMode {
    /// Gauss-Legendre with `nodes` points on every axis. The error estimate
    /// is the change from a rule with half as many nodes.
    Quadrature { nodes: usize },
    /// Measure-weighted sampling. The error estimate is the standard error.
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub mode: IntegrationMode,
    pub p_cutoff: f64,
}

impl IntegratorConfig {
    pub fn quadrature(nodes: usize) -> Self {
        Self {
            mode: IntegrationMode::Quadrature { nodes },
            p_cutoff: P_CUTOFF,
        }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        Self {
            mode: IntegrationMode::MonteCarlo { samples, seed },
            p_cutoff: P_CUTOFF,
        }
    }

    /// 128-node quadrature for a measured qubit, 10^5 Monte Carlo samples
    /// otherwise (`seed` only matters then).
    pub fn default_for(n_measured: usize, seed: u64) -> Self {
        if n_measured <= 2 {
            Self::quadrature(128)
        } else {
            Self::monte_carlo(100_000, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            IntegrationMode::Quadrature { nodes } if nodes < 2 => {
                return Err(QncError::Domain(format!(
                    "quadrature needs at least 2 nodes per axis, got {nodes}"
                )))
            }
            IntegrationMode::MonteCarlo { samples, .. } if samples < 2 => {
                return Err(QncError::Domain(format!(
                    "Monte Carlo needs at least 2 samples, got {samples}"
                )))
            }
            _ => {}
        }
        if !(self.p_cutoff >= 0.0 && self.p_cutoff.is_finite()) {
            return Err(QncError::Domain(format!("invalid p cutoff {}", self.p_cutoff)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "AB")]
    AtoB,
    #[serde(rename = "BA")]
    BtoA,
    #[serde(rename = "sym")]
    Symmetric,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrengthResult {
    pub value: f64,
    pub error_estimate: f64,
    pub direction: Direction,
    pub config: IntegratorConfig,
}

/// Deterministic pairwise summation.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Integration points for one measured dimension, with weights folded so that
/// `scale * sum_i weight_i * (p |F|)_i` is the directed strength.
#[derive(Clone, Debug)]
pub(crate) struct NodeSet {
    pub n: usize,
    probes: Vec<Probe>,
    weights: Vec<f64>,
    scale: f64,
}

impl NodeSet {
    /// Tensor Gauss-Legendre rule with `k` nodes per axis.
    pub fn gauss(n: usize, k: usize) -> Result<Self> {
        let k = std::num::NonZeroUsize::new(k)
            .ok_or_else(|| QncError::Domain("quadrature needs at least one node".into()))?;
        let rule = GaussLegendre::new(k);
        let pairs = rule.as_node_weight_pairs();
        let axes = 2 * (n - 1);
        let total = pairs.len().pow(axes as u32);
        let mut probes = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; axes];
        for _ in 0..total {
            let mut coords = Vec::with_capacity(axes);
            let mut w = 1.0;
            for (axis, &i) in idx.iter().enumerate() {
                let top = if axis < n - 1 { PI } else { TAU };
                let (x, wx) = pairs[i];
                coords.push(0.5 * top * (x + 1.0));
                w *= 0.5 * top * wx;
            }
            let (t, f) = coords.split_at(n - 1);
            let params = MeasurementParams::new(t.to_vec(), f.to_vec())?;
            weights.push(w * measure_weight(&params));
            probes.push(Probe::new(&params));
            for d in (0..axes).rev() {
                idx[d] += 1;
                if idx[d] < pairs.len() {
                    break;
                }
                idx[d] = 0;
            }
        }
        Ok(Self {
            n,
            probes,
            weights,
            scale: (n as f64).sqrt() / omega_volume(n)?,
        })
    }

    /// `samples` draws from the normalized measure.
    pub fn sampled<R: Rng + ?Sized>(n: usize, samples: usize, rng: &mut R) -> Self {
        let probes = (0..samples).map(|_| Probe::new(&sample_params(n, rng))).collect();
        Self {
            n,
            probes,
            weights: vec![1.0; samples],
            scale: (n as f64).sqrt() / samples as f64,
        }
    }

    fn terms(&self, blocks: &BlockState, p_cutoff: f64) -> Vec<f64> {
        self.probes
            .iter()
            .zip(&self.weights)
            .map(|(probe, w)| w * blocks.respond(probe, p_cutoff).weighted_magnitude())
            .collect()
    }

    pub fn integrate(&self, blocks: &BlockState, p_cutoff: f64) -> f64 {
        self.scale * pairwise_sum(&self.terms(blocks, p_cutoff))
    }

    /// Mean and standard error, for sampled sets.
    fn mean_and_error(&self, blocks: &BlockState, p_cutoff: f64) -> (f64, f64) {
        let terms = self.terms(blocks, p_cutoff);
        let m = terms.len() as f64;
        let mean = pairwise_sum(&terms) / m;
        let sq: Vec<f64> = terms.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = pairwise_sum(&sq) / (m - 1.0);
        let root = (self.n as f64).sqrt();
        (root * mean, root * (var / m).sqrt())
    }
}

fn measured_state(rho: &DensityMatrix, direction: Direction) -> Result<DensityMatrix> {
    rho.require_split()?;
    match direction {
        Direction::AtoB => Ok(rho.clone()),
        Direction::BtoA => swap_subsystems(rho),
        Direction::Symmetric => Err(QncError::Domain(
            "directed strength needs AB or BA".into(),
        )),
    }
}

/// `G_{A->B}` or `G_{B->A}`.
pub fn strength_directed(
    rho: &DensityMatrix,
    direction: Direction,
    cfg: &IntegratorConfig,
) -> Result<StrengthResult> {
    cfg.validate()?;
    let state = measured_state(rho, direction)?;
    let blocks = BlockState::new(&state)?;
    let n = blocks.n_a;
    let (value, error_estimate) = match cfg.mode {
        IntegrationMode::Quadrature { nodes } => {
            let fine = NodeSet::gauss(n, nodes)?.integrate(&blocks, cfg.p_cutoff);
            let coarse = NodeSet::gauss(n, (nodes / 2).max(1))?.integrate(&blocks, cfg.p_cutoff);
            (fine, (fine - coarse).abs())
        }
        IntegrationMode::MonteCarlo { samples, seed } => {
            let stream = match direction {
                Direction::BtoA => 1,
                _ => 0,
            };
            let mut r = split_rng(seed, stream);
            NodeSet::sampled(n, samples, &mut r).mean_and_error(&blocks, cfg.p_cutoff)
        }
    };
    Ok(StrengthResult {
        value,
        error_estimate,
        direction,
        config: cfg.clone(),
    })
}

/// Symmetric `G = (G_{A->B} + G_{B->A}) / 2`.
pub fn strength(rho: &DensityMatrix, cfg: &IntegratorConfig) -> Result<StrengthResult> {
    let ab = strength_directed(rho, Direction::AtoB, cfg)?;
    let ba = strength_directed(rho, Direction::BtoA, cfg)?;
    Ok(StrengthResult {
        value: 0.5 * (ab.value + ba.value),
        error_estimate: 0.5 * ab.error_estimate.hypot(ba.error_estimate),
        direction: Direction::Symmetric,
        config: cfg.clone(),
    })
}

/// Symmetric `G` with each direction integrated by
/// [`IntegratorConfig::default_for`] its measured dimension.
pub fn strength_default(rho: &DensityMatrix, seed: u64) -> Result<StrengthResult> {
    let (n_a, n_b) = rho.require_split()?;
    let ab = strength_directed(rho, Direction::AtoB, &IntegratorConfig::default_for(n_a, seed))?;
    let ba = strength_directed(rho, Direction::BtoA, &IntegratorConfig::default_for(n_b, seed))?;
    Ok(StrengthResult {
        value: 0.5 * (ab.value + ba.value),
        error_estimate: 0.5 * ab.error_estimate.hypot(ba.error_estimate),
        direction: Direction::Symmetric,
        config: ab.config,
    })
}

/// Point rules for both directions of one split, reused across many states
/// (the optimizer in the entanglement module evaluates thousands).
#[derive(Clone, Debug)]
pub(crate) struct SymmetricRule {
    ab: NodeSet,
    ba: NodeSet,
    n_a: usize,
    n_b: usize,
    p_cutoff: f64,
}

impl SymmetricRule {
    pub fn new(
        n_a: usize,
        n_b: usize,
        cfg_ab: &IntegratorConfig,
        cfg_ba: &IntegratorConfig,
    ) -> Result<Self> {
        cfg_ab.validate()?;
        cfg_ba.validate()?;
        if cfg_ab.p_cutoff != cfg_ba.p_cutoff {
            return Err(QncError::Domain("both directions need the same p cutoff".into()));
        }
        let build = |n: usize, cfg: &IntegratorConfig, stream: u64| -> Result<NodeSet> {
            match cfg.mode {
                IntegrationMode::Quadrature { nodes } => NodeSet::gauss(n, nodes),
                IntegrationMode::MonteCarlo { samples, seed } => {
                    Ok(NodeSet::sampled(n, samples, &mut split_rng(seed, stream)))
                }
            }
        };
        Ok(Self {
            ab: build(n_a, cfg_ab, 0)?,
            ba: build(n_b, cfg_ba, 1)?,
            n_a,
            n_b,
            p_cutoff: cfg_ab.p_cutoff,
        })
    }

    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.require_split()? != (self.n_a, self.n_b) {
            return Err(QncError::Dimension("state split does not match the rule".into()));
        }
        let ab = self.ab.integrate(&BlockState::new(rho)?, self.p_cutoff);
        let ba = self.ba.integrate(&BlockState::new(&swap_subsystems(rho)?)?, self.p_cutoff);
        Ok(0.5 * (ab + ba))
    }
}
