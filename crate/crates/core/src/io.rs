//! State files, CSV surfaces and JSON reports.
//!
//! Every float is written with 17 significant digits so that values
//! round-trip exactly; non-finite values become `nan` in CSV and `null` in
//! JSON.

use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Number, Value};

use crate::characteristic::CharSample;
use crate::entanglement::{EntanglementResult, EntropyResult};
use crate::error::{QncError, Result};
use crate::linalg::{CMatrix, DensityMatrix};
use crate::steering::{SeparabilityVerdict, SteeringPoint};
use crate::strength::{IntegrationMode, StrengthResult};

/// On-disk form of a bipartite state: `dims = [n_a, n_b]` and the matrix as
/// row-major `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: [usize; 2],
    pub matrix: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Result<Self> {
        let (n_a, n_b) = rho.require_split()?;
        let m = rho.matrix();
        let d = m.nrows();
        let mut matrix = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                matrix.push([m[(r, c)].re, m[(r, c)].im]);
            }
        }
        Ok(Self { dims: [n_a, n_b], matrix })
    }

    /// Validates and converts; the error names the violated invariant.
    pub fn to_state(&self) -> Result<DensityMatrix> {
        let [n_a, n_b] = self.dims;
        let d = n_a * n_b;
        if n_a == 0 || n_b == 0 || self.matrix.len() != d * d {
            return Err(QncError::Dimension(format!(
                "dims {n_a}x{n_b} need {} matrix entries, got {}",
                d * d,
                self.matrix.len()
            )));
        }
        if self.matrix.iter().flatten().any(|x| !x.is_finite()) {
            return Err(QncError::Parse("matrix entries must be finite".into()));
        }
        let m = CMatrix::from_fn(d, d, |r, c| {
            let [re, im] = self.matrix[r * d + c];
            Complex64::new(re, im)
        });
        DensityMatrix::bipartite(m, n_a, n_b)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dims": self.dims,
            "matrix": self
                .matrix
                .iter()
                .map(|[re, im]| Value::Array(vec![number(*re), number(*im)]))
                .collect::<Vec<_>>(),
        })
    }
}

pub fn parse_state(text: &str) -> Result<DensityMatrix> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| QncError::Parse(format!("state file: {e}")))?;
    file.to_state()
}

pub fn state_json(rho: &DensityMatrix) -> Result<Value> {
    Ok(StateFile::from_state(rho)?.to_json())
}

/// `x` with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "nan".to_string()
    }
}

/// A JSON number carrying exactly the [`fmt17`] digits; `null` when not
/// finite.
pub fn number(x: f64) -> Value {
    if x.is_finite() {
        Number::from_str(&fmt17(x)).map(Value::Number).unwrap_or(Value::Null)
    } else {
        Value::Null
    }
}

pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn push_row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

/// `theta_1.., phi_1.., p, F_theta_1.., F_phi_1.., F_mag, defined`.
pub fn charfunc_csv(samples: &[CharSample]) -> String {
    let mut out = String::new();
    let Some(first) = samples.first() else {
        return out;
    };
    let k = first.params.dim() - 1;
    let mut header: Vec<String> = Vec::new();
    header.extend((1..=k).map(|i| format!("theta_{i}")));
    header.extend((1..=k).map(|i| format!("phi_{i}")));
    header.push("p".into());
    header.extend((1..=k).map(|i| format!("F_theta_{i}")));
    header.extend((1..=k).map(|i| format!("F_phi_{i}")));
    header.push("F_mag".into());
    header.push("defined".into());
    push_row(&mut out, &header);
    for s in samples {
        let mut row: Vec<String> = s.params.values().into_iter().map(fmt17).collect();
        row.push(fmt17(s.p));
        if s.defined {
            row.extend(s.components.iter().map(|c| fmt17(*c)));
            row.push(fmt17(s.magnitude));
        } else {
            row.extend(std::iter::repeat_n("nan".to_string(), 2 * k + 1));
        }
        row.push(if s.defined { "1" } else { "0" }.into());
        push_row(&mut out, &row);
    }
    out
}

/// `theta, phi, p, rBx, rBy, rBz, sx, sy, sz, nx, ny, nz, defined` for a
/// measured qubit; larger measured sides use `theta_1.., phi_1..` in place
/// of `theta, phi`. `defined` refers to the normal.
pub fn steering_csv(points: &[SteeringPoint]) -> String {
    let mut out = String::new();
    let Some(first) = points.first() else {
        return out;
    };
    let k = first.params.dim() - 1;
    let mut header: Vec<String> = if k == 1 {
        vec!["theta".into(), "phi".into()]
    } else {
        (1..=k)
            .map(|i| format!("theta_{i}"))
            .chain((1..=k).map(|i| format!("phi_{i}")))
            .collect()
    };
    for h in ["p", "rBx", "rBy", "rBz", "sx", "sy", "sz", "nx", "ny", "nz", "defined"] {
        header.push(h.into());
    }
    push_row(&mut out, &header);
    let nan3 = [f64::NAN; 3];
    for pt in points {
        let mut row: Vec<String> = pt.params.values().into_iter().map(fmt17).collect();
        row.push(fmt17(pt.p));
        row.extend(pt.r_b.unwrap_or(nan3).iter().map(|x| fmt17(*x)));
        row.extend(pt.s.iter().map(|x| fmt17(*x)));
        row.extend(pt.normal.unwrap_or(nan3).iter().map(|x| fmt17(*x)));
        row.push(if pt.normal.is_some() { "1" } else { "0" }.into());
        push_row(&mut out, &row);
    }
    out
}

pub fn strength_json(r: &StrengthResult) -> Value {
    let config = match r.config.mode {
        IntegrationMode::Quadrature { nodes } => json!({
            "mode": "quadrature",
            "nodes": nodes,
            "p_cutoff": number(r.config.p_cutoff),
        }),
        IntegrationMode::MonteCarlo { samples, seed } => json!({
            "mode": "monte-carlo",
            "samples": samples,
            "seed": seed,
            "p_cutoff": number(r.config.p_cutoff),
        }),
    };
    json!({
        "value": number(r.value),
        "error": number(r.error_estimate),
        "direction": r.direction,
        "config": config,
    })
}

pub fn entanglement_json(r: &EntanglementResult) -> Value {
    let mut m = Map::new();
    m.insert("E".into(), number(r.e));
    m.insert("G_rho".into(), number(r.g_rho));
    m.insert("G_best_product".into(), number(r.g_best_product));
    m.insert("m".into(), json!(r.trace.m));
    m.insert("restarts".into(), json!(r.trace.restarts));
    m.insert("converged".into(), json!(r.trace.converged));
    m.insert("evaluations".into(), json!(r.trace.evaluations));
    m.insert("integration_error".into(), number(r.integration_error));
    m.insert("terms".into(), json!(r.best.len()));
    Value::Object(m)
}

pub fn entropy_json(r: &EntropyResult) -> Value {
    let mut m = Map::new();
    m.insert("E_s".into(), number(r.e_s));
    m.insert("S_rho".into(), number(r.s_rho));
    m.insert("S_best_product".into(), number(r.s_best_product));
    m.insert("m".into(), json!(r.trace.m));
    m.insert("restarts".into(), json!(r.trace.restarts));
    m.insert("converged".into(), json!(r.trace.converged));
    m.insert("evaluations".into(), json!(r.trace.evaluations));
    m.insert("terms".into(), json!(r.best.len()));
    Value::Object(m)
}

pub fn verdict_json(v: &SeparabilityVerdict) -> Value {
    json!({
        "verdict": v.verdict,
        "max_normal_deviation": number(v.max_normal_deviation),
        "degenerate_fraction": number(v.degenerate_fraction),
        "tolerance": number(v.tolerance),
    })
}
