//! Differential evolution, rand/1/bin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::calibration::nelder_mead::SearchResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DifferentialEvolutionOptions {
    pub population: usize,
    pub mutation: f64,
    pub crossover: f64,
    pub max_generations: usize,
    pub seed: u64,
}

impl Default for DifferentialEvolutionOptions {
    fn default() -> Self {
        Self {
            population: 15,
            mutation: 0.6,
            crossover: 0.8,
            max_generations: 400,
            seed: 7,
        }
    }
}

/// Minimize `f` inside the box `[lower, upper]`; `x0` seeds the first member.
///
/// One iteration is one generation. Trial costs within a generation are
/// evaluated in parallel; the outcome does not depend on the thread count.
pub fn differential_evolution(
    f: impl Fn(&[f64]) -> Result<f64> + Sync,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &DifferentialEvolutionOptions,
) -> SearchResult {
    let mut res = SearchResult::empty(x0);
    let outcome = run(&f, x0, lower, upper, opts, &mut res);
    res.finish(outcome)
}

fn run(
    f: &(impl Fn(&[f64]) -> Result<f64> + Sync),
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &DifferentialEvolutionOptions,
    res: &mut SearchResult,
) -> Result<()> {
    let n = x0.len();
    let np = opts.population;
    if np < 4 || lower.len() != n || upper.len() != n {
        return Err(Error::Precondition(format!(
            "differential evolution needs population >= 4 and {n}-dimensional bounds"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut pop: Vec<Vec<f64>> = vec![x0.to_vec()];
    for _ in 1..np {
        pop.push((0..n).map(|k| rng.random_range(lower[k]..=upper[k])).collect());
    }
    let eval_all = |xs: &[Vec<f64>]| -> Vec<Result<f64>> { xs.par_iter().map(|x| f(x)).collect() };
    res.evaluations += np;
    let mut costs: Vec<f64> = eval_all(&pop).into_iter().collect::<Result<_>>()?;
    let best = |costs: &[f64]| (0..costs.len()).min_by(|&a, &b| costs[a].total_cmp(&costs[b])).unwrap();
    let b = best(&costs);
    res.record(&pop[b], costs[b]);
    for _ in 0..opts.max_generations {
        let trials: Vec<Vec<f64>> = (0..np)
            .map(|i| {
                let mut pick = || loop {
                    let r = rng.random_range(0..np);
                    if r != i {
                        break r;
                    }
                };
                let r1 = pick();
                let r2 = loop {
                    let r = pick();
                    if r != r1 {
                        break r;
                    }
                };
                let r3 = loop {
                    let r = pick();
                    if r != r1 && r != r2 {
                        break r;
                    }
                };
                let jrand = rng.random_range(0..n);
                (0..n)
                    .map(|k| {
                        if k == jrand || rng.random::<f64>() < opts.crossover {
                            let v = pop[r1][k] + opts.mutation * (pop[r2][k] - pop[r3][k]);
                            v.clamp(lower[k], upper[k])
                        } else {
                            pop[i][k]
                        }
                    })
                    .collect()
            })
            .collect();
        res.evaluations += np;
        let trial_costs: Vec<f64> = eval_all(&trials).into_iter().collect::<Result<_>>()?;
        for (i, (t, c)) in trials.into_iter().zip(trial_costs).enumerate() {
            if c <= costs[i] {
                pop[i] = t;
                costs[i] = c;
            }
        }
        let b = best(&costs);
        res.record(&pop[b], costs[b]);
    }
    Ok(())
}
