//! Nelder–Mead simplex search with dimension-adaptive coefficients.

use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NelderMeadOptions {
    pub max_iterations: usize,
    /// Stop when the spread of simplex costs falls below this.
    pub f_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iterations: 400,
            f_tol: 1e-12,
        }
    }
}

/// Best point found plus the best-so-far cost after every iteration (index 0 = start).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub x: Vec<f64>,
    pub cost: f64,
    pub best_costs: Vec<f64>,
    pub best_points: Vec<Vec<f64>>,
    pub evaluations: usize,
    /// Set when a cost evaluation failed; the trace up to that point is kept.
    pub aborted: Option<String>,
}

impl SearchResult {
    pub(crate) fn empty(x0: &[f64]) -> Self {
        Self {
            x: x0.to_vec(),
            cost: f64::INFINITY,
            best_costs: Vec::new(),
            best_points: Vec::new(),
            evaluations: 0,
            aborted: None,
        }
    }

    pub(crate) fn record(&mut self, x: &[f64], cost: f64) {
        if cost <= self.cost {
            self.cost = cost;
            self.x = x.to_vec();
        }
        self.best_costs.push(self.cost);
        self.best_points.push(self.x.clone());
    }

    pub(crate) fn finish(mut self, outcome: Result<()>) -> Self {
        if let Err(e) = outcome {
            self.aborted = Some(e.to_string());
        }
        self
    }

    /// Per-iteration trace as JSON lines of `{iteration, cost, x}`.
    pub fn trace_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.best_costs
                .iter()
                .zip(&self.best_points)
                .enumerate()
                .map(|(i, (c, x))| serde_json::json!({"iteration": i, "cost": c, "x": x}))
                .collect(),
        )
    }

    pub fn iterations(&self) -> usize {
        self.best_costs.len().saturating_sub(1)
    }

    /// First iteration whose best-so-far cost is within `tol` of the final best.
    pub fn stabilization_iteration(&self, tol: f64) -> usize {
        self.best_costs
            .iter()
            .position(|&c| c - self.cost <= tol)
            .unwrap_or(0)
    }
}

/// Minimize `f` from `x0` with initial simplex offsets `step[i]` along each axis.
///
/// One iteration is one simplex update (reflection, expansion, contraction or shrink).
/// A failing cost evaluation stops the search; the result then carries `aborted`.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> Result<f64>,
    x0: &[f64],
    step: &[f64],
    opts: &NelderMeadOptions,
) -> SearchResult {
    let mut res = SearchResult::empty(x0);
    let outcome = run(&mut f, x0, step, opts, &mut res);
    res.finish(outcome)
}

fn run(
    f: &mut impl FnMut(&[f64]) -> Result<f64>,
    x0: &[f64],
    step: &[f64],
    opts: &NelderMeadOptions,
    res: &mut SearchResult,
) -> Result<()> {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let mut eval = |x: &[f64], res: &mut SearchResult| {
        res.evaluations += 1;
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0, res)?));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step[i];
        let fx = eval(&x, res)?;
        simplex.push((x, fx));
    }
    let sort = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    sort(&mut simplex);
    res.record(&simplex[0].0, simplex[0].1);
    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> { c.iter().zip(w).map(|(a, b)| a + t * (b - a)).collect() };
    for _ in 0..opts.max_iterations {
        if simplex[n].1 - simplex[0].1 <= opts.f_tol {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / nf)
            .collect();
        let worst = simplex[n].clone();
        let xr = point(&centroid, &worst.0, -alpha);
        let fr = eval(&xr, res)?;
        if fr < simplex[0].1 {
            let xe = point(&centroid, &worst.0, -alpha * beta);
            let fe = eval(&xe, res)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = if fr < worst.1 {
                point(&centroid, &xr, gamma)
            } else {
                point(&centroid, &worst.0, gamma)
            };
            let fc = eval(&xc, res)?;
            if fc < fr.min(worst.1) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x = point(&best, &v.0, delta);
                    let fx = eval(&x, res)?;
                    *v = (x, fx);
                }
            }
        }
        sort(&mut simplex);
        res.record(&simplex[0].0, simplex[0].1);
    }
    Ok(())
}
