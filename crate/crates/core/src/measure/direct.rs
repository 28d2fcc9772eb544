//! Importance sampling from the Poisson measure, reweighted by `W(omega)`.

use serde::{Deserialize, Serialize};

use super::{Observable, SamplerOutput, WeightSpec};
use crate::error::{invalid, Error, Result};
use crate::events::{check_beta, check_u, EventList};
use crate::lattice::Graph;
use crate::loops::{LoopDecomposition, LoopTracer, Orientation};
use crate::par::{map_indexed, Execution};
use crate::rng::stream;
use crate::stats::BatchSeries;

fn default_batches() -> usize {
    50
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectConfig {
    pub n_samples: usize,
    #[serde(default = "default_batches")]
    pub n_batches: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub execution: Execution,
}

impl DirectConfig {
    pub fn new(n_samples: usize, seed: u64) -> DirectConfig {
        DirectConfig {
            n_samples,
            n_batches: default_batches(),
            seed,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_batches < 2 {
            return Err(invalid("n_batches", "need at least 2 batches"));
        }
        if self.n_samples < 100 * self.n_batches {
            return Err(invalid(
                "n_samples",
                format!("need at least 100 samples per batch, got {} for {} batches", self.n_samples, self.n_batches),
            ));
        }
        if !self.n_samples.is_multiple_of(self.n_batches) {
            return Err(invalid(
                "n_samples",
                format!("{} is not divisible by {} batches", self.n_samples, self.n_batches),
            ));
        }
        Ok(())
    }
}

/// Sums of one batch, scaled by `exp(-shift)` to keep weights finite.
struct WeightedBatch {
    shift: f64,
    sum_w: f64,
    sum_fw: Vec<f64>,
    n: usize,
}

impl WeightedBatch {
    fn new(n_obs: usize) -> WeightedBatch {
        WeightedBatch {
            shift: f64::NEG_INFINITY,
            sum_w: 0.0,
            sum_fw: vec![0.0; n_obs],
            n: 0,
        }
    }

    fn add(&mut self, log_w: f64, values: &[f64]) {
        if log_w > self.shift {
            let scale = (self.shift - log_w).exp();
            self.sum_w *= scale;
            self.sum_fw.iter_mut().for_each(|s| *s *= scale);
            self.shift = log_w;
        }
        let w = (log_w - self.shift).exp();
        self.sum_w += w;
        for (s, v) in self.sum_fw.iter_mut().zip(values) {
            *s += v * w;
        }
        self.n += 1;
    }
}

/// Estimates `E[f] = sum f W / sum W` for every observable and
/// `Y = E_rho[W]`, from `n_samples` independent draws of the Poisson process.
/// Batch `b` uses random stream `(seed, b)`.
pub fn direct_estimate(
    graph: &Graph,
    beta: f64,
    u: f64,
    spec: &WeightSpec,
    observables: &[&dyn Observable],
    config: &DirectConfig,
) -> Result<SamplerOutput> {
    check_beta(beta)?;
    check_u(u)?;
    spec.validate_for(graph)?;
    config.validate()?;
    let per_batch = config.n_samples / config.n_batches;

    let batches: Vec<WeightedBatch> = map_indexed(config.n_batches, config.execution, |b| {
        let mut rng = stream(config.seed, b as u64);
        let mut omega = EventList::empty(beta, u).expect("validated");
        let mut tracer = LoopTracer::new();
        let mut dec = LoopDecomposition::default();
        let mut values = vec![0.0; observables.len()];
        let mut acc = WeightedBatch::new(observables.len());
        let mut phases = Vec::new();
        // without observables only the weight is needed, so skip the segments
        let weight_only = observables.is_empty();
        for _ in 0..per_batch {
            omega.resample(graph, &mut rng);
            if weight_only {
                let log_w = match spec.field_coupling() {
                    Some((h, signed)) if !spec.is_zero_field() => {
                        tracer.loop_phases(graph, &omega, h, signed, &mut phases);
                        spec.log_weight_from_phases(&phases)
                    }
                    _ => spec.log_weight_from_count(tracer.count_loops(graph, &omega)),
                };
                acc.add(log_w, &[]);
                continue;
            }
            tracer.trace_into(graph, &omega, Orientation::Upward, &mut dec);
            for (v, obs) in values.iter_mut().zip(observables) {
                *v = obs.evaluate(&omega, &dec);
            }
            acc.add(spec.log_weight(&dec), &values);
        }
        acc
    });

    if batches.iter().any(|b| !(b.sum_w > 0.0) || !b.shift.is_finite()) {
        return Err(Error::ZeroTotalWeight);
    }
    let top = batches.iter().map(|b| b.shift).fold(f64::NEG_INFINITY, f64::max);
    let total_w: f64 = batches.iter().map(|b| b.sum_w * (b.shift - top).exp()).sum();

    let series = (0..observables.len())
        .map(|k| {
            let total_fw: f64 = batches.iter().map(|b| b.sum_fw[k] * (b.shift - top).exp()).sum();
            let per: Vec<f64> = batches.iter().map(|b| b.sum_fw[k] / b.sum_w).collect();
            BatchSeries::new(total_fw / total_w, per, config.n_samples)
        })
        .collect();

    let per_y: Vec<f64> = batches
        .iter()
        .map(|b| (b.shift + (b.sum_w / b.n as f64).ln()).exp())
        .collect();
    let partition = BatchSeries::from_batches(per_y, config.n_samples);

    Ok(SamplerOutput {
        observables: series,
        partition,
    })
}
