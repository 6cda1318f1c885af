//! CSV and JSON serialization of trajectories and density matrices.

use serde_json::{json, Value};

use crate::dynamics::lindblad::Trajectory;
use crate::linalg::CMatrix;

/// `t_ns,P_site1,...,P_siteK,trace,purity`, one row per recorded sample.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let k = traj.basis.n_sites();
    let mut out = String::from("t_ns");
    for s in 1..=k {
        out.push_str(&format!(",P_site{s}"));
    }
    out.push_str(",trace,purity\n");
    for s in &traj.samples {
        out.push_str(&format!("{:.6}", s.t_ns));
        for p in &s.populations {
            out.push_str(&format!(",{:.10}", p));
        }
        out.push_str(&format!(",{:.10},{:.10}\n", s.trace, s.purity));
    }
    out
}

/// Nested `[[[re, im], ...], ...]` rows.
pub fn density_json(rho: &CMatrix) -> Value {
    let rows: Vec<Value> = (0..rho.nrows())
        .map(|i| {
            Value::Array(
                (0..rho.ncols())
                    .map(|j| json!([rho[(i, j)].re, rho[(i, j)].im]))
                    .collect(),
            )
        })
        .collect();
    Value::Array(rows)
}
