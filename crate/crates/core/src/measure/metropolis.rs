//! Metropolis-Hastings chain on realizations.
//!
//! Moves: insert a uniformly placed event, delete a uniformly chosen event,
//! and flip the kind of one event. Loops are retraced from scratch after each
//! proposal. The stationary law is `W(omega) rho(d omega) / Y`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Observable, SamplerOutput, WeightSpec};
use crate::error::{invalid, Result};
use crate::events::{check_beta, check_u, EventList, Kind};
use crate::lattice::Graph;
use crate::loops::{LoopDecomposition, LoopTracer, Orientation};
use crate::par::{map_indexed, Execution};
use crate::rng::{stream, StreamRng};
use crate::stats::BatchSeries;

fn default_batches() -> usize {
    50
}

fn default_chains() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetropolisConfig {
    /// Measured sweeps per chain.
    pub n_sweeps: usize,
    #[serde(default)]
    pub burn_in: usize,
    /// Total number of batches, split evenly over the chains.
    #[serde(default = "default_batches")]
    pub n_batches: usize,
    #[serde(default = "default_chains")]
    pub n_chains: usize,
    #[serde(default)]
    pub seed: u64,
    /// `None` enables kind flips whenever `0 < u < 1`.
    #[serde(default)]
    pub relabel: Option<bool>,
    #[serde(default)]
    pub execution: Execution,
}

impl MetropolisConfig {
    pub fn new(n_sweeps: usize, burn_in: usize, seed: u64) -> MetropolisConfig {
        MetropolisConfig {
            n_sweeps,
            burn_in,
            n_batches: default_batches(),
            n_chains: default_chains(),
            seed,
            relabel: None,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_chains == 0 {
            return Err(invalid("n_chains", "need at least one chain"));
        }
        if self.n_batches < 2 || !self.n_batches.is_multiple_of(self.n_chains) {
            return Err(invalid(
                "n_batches",
                format!("need at least 2 batches, divisible by {} chains", self.n_chains),
            ));
        }
        let per_chain = self.n_batches / self.n_chains;
        if self.n_sweeps == 0 || !self.n_sweeps.is_multiple_of(per_chain) {
            return Err(invalid(
                "n_sweeps",
                format!("must be a positive multiple of {per_chain} batches per chain"),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveKind {
    Insert,
    Delete,
    Relabel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MoveOutcome {
    pub kind: MoveKind,
    pub accepted: bool,
}

/// `min(1, (W'/W) |E| beta / (n + 1))` for adding an event to `n` events.
pub fn insert_acceptance(weight_ratio: f64, n_edges: usize, beta: f64, n: usize) -> f64 {
    (weight_ratio * n_edges as f64 * beta / (n as f64 + 1.0)).min(1.0)
}

/// `min(1, (W'/W) n / (|E| beta))` for removing one of `n` events.
pub fn delete_acceptance(weight_ratio: f64, n_edges: usize, beta: f64, n: usize) -> f64 {
    (weight_ratio * n as f64 / (n_edges as f64 * beta)).min(1.0)
}

/// `min(1, (W'/W) r)` with `r = (1-u)/u` for cross to bar and `u/(1-u)` back.
pub fn relabel_acceptance(weight_ratio: f64, u: f64, from: Kind) -> f64 {
    let r = match from {
        Kind::Cross => (1.0 - u) / u,
        Kind::Bar => u / (1.0 - u),
    };
    (weight_ratio * r).min(1.0)
}

pub struct MetropolisChain<'a> {
    graph: &'a Graph,
    spec: &'a WeightSpec,
    omega: EventList,
    loops: LoopDecomposition,
    log_w: f64,
    proposal: LoopDecomposition,
    tracer: LoopTracer,
    rng: StreamRng,
    relabel: bool,
    proposals_per_sweep: usize,
    /// Zero field: proposals only count loops, and `loops` is rebuilt on
    /// demand.
    count_only: bool,
    stale: bool,
}

impl<'a> MetropolisChain<'a> {
    /// A chain started from the empty realization.
    pub fn new(
        graph: &'a Graph,
        beta: f64,
        u: f64,
        spec: &'a WeightSpec,
        relabel: Option<bool>,
        rng: StreamRng,
    ) -> Result<MetropolisChain<'a>> {
        check_beta(beta)?;
        check_u(u)?;
        spec.validate_for(graph)?;
        let interior = u > 0.0 && u < 1.0;
        let relabel = match relabel {
            Some(true) if !interior => {
                return Err(invalid("relabel", format!("kind flips are undefined for u = {u}")));
            }
            Some(r) => r,
            None => interior,
        };
        let omega = EventList::empty(beta, u)?;
        let mut tracer = LoopTracer::new();
        let mut loops = LoopDecomposition::default();
        tracer.trace_into(graph, &omega, Orientation::Upward, &mut loops);
        let log_w = spec.log_weight(&loops);
        Ok(MetropolisChain {
            graph,
            spec,
            omega,
            loops,
            log_w,
            proposal: LoopDecomposition::default(),
            tracer,
            rng,
            relabel,
            proposals_per_sweep: ((graph.n_edges() as f64 * beta).ceil() as usize).max(1),
            count_only: spec.is_zero_field(),
            stale: false,
        })
    }

    pub fn state(&self) -> &EventList {
        &self.omega
    }

    pub fn loops(&mut self) -> &LoopDecomposition {
        if self.stale {
            self.tracer
                .trace_into(self.graph, &self.omega, Orientation::Upward, &mut self.loops);
            self.stale = false;
        }
        &self.loops
    }

    pub fn log_weight(&self) -> f64 {
        self.log_w
    }

    fn retrace_proposal(&mut self) -> f64 {
        if self.count_only {
            let n = self.tracer.count_loops(self.graph, &self.omega);
            return self.spec.log_weight_from_count(n);
        }
        self.tracer
            .trace_into(self.graph, &self.omega, Orientation::Upward, &mut self.proposal);
        self.spec.log_weight(&self.proposal)
    }

    fn accept(&mut self, log_w: f64) {
        if self.count_only {
            self.stale = true;
        } else {
            std::mem::swap(&mut self.loops, &mut self.proposal);
        }
        self.log_w = log_w;
    }

    /// One proposal and its accept/reject decision.
    pub fn step(&mut self) -> MoveOutcome {
        let kind = match self.rng.random_range(0..if self.relabel { 3 } else { 2 }) {
            0 => MoveKind::Insert,
            1 => MoveKind::Delete,
            _ => MoveKind::Relabel,
        };
        let accepted = match kind {
            MoveKind::Insert => self.try_insert(),
            MoveKind::Delete => self.try_delete(),
            MoveKind::Relabel => self.try_relabel(),
        };
        MoveOutcome { kind, accepted }
    }

    fn try_insert(&mut self) -> bool {
        let n_edges = self.graph.n_edges();
        if n_edges == 0 {
            return false;
        }
        let beta = self.omega.beta();
        let n = self.omega.len();
        let edge = self.rng.random_range(0..n_edges);
        let time = self.rng.random::<f64>() * beta;
        let kind = if self.rng.random::<f64>() < self.omega.u() {
            Kind::Cross
        } else {
            Kind::Bar
        };
        let Ok(index) = self.omega.insert(edge, time, kind) else {
            return false;
        };
        let log_w = self.retrace_proposal();
        let a = insert_acceptance((log_w - self.log_w).exp(), n_edges, beta, n);
        if self.rng.random::<f64>() < a {
            self.accept(log_w);
            true
        } else {
            self.omega.remove(index).expect("just inserted");
            false
        }
    }

    fn try_delete(&mut self) -> bool {
        let n = self.omega.len();
        if n == 0 {
            return false;
        }
        let index = self.rng.random_range(0..n);
        let removed = self.omega.remove(index).expect("index in range");
        let log_w = self.retrace_proposal();
        let a = delete_acceptance(
            (log_w - self.log_w).exp(),
            self.graph.n_edges(),
            self.omega.beta(),
            n,
        );
        if self.rng.random::<f64>() < a {
            self.accept(log_w);
            true
        } else {
            self.omega
                .insert(removed.edge, removed.time, removed.kind)
                .expect("restoring a removed event");
            false
        }
    }

    fn try_relabel(&mut self) -> bool {
        let n = self.omega.len();
        if n == 0 {
            return false;
        }
        let index = self.rng.random_range(0..n);
        let from = self.omega.events()[index].kind;
        self.omega.set_kind(index, from.flipped());
        let log_w = self.retrace_proposal();
        let a = relabel_acceptance((log_w - self.log_w).exp(), self.omega.u(), from);
        if self.rng.random::<f64>() < a {
            self.accept(log_w);
            true
        } else {
            self.omega.set_kind(index, from);
            false
        }
    }

    /// `ceil(|E| beta)` proposals.
    pub fn sweep(&mut self) {
        for _ in 0..self.proposals_per_sweep {
            self.step();
        }
    }
}

struct ChainBatches {
    /// `[batch][observable]` means.
    values: Vec<Vec<f64>>,
    /// Per batch: smallest `ln W` and `sum exp(-(ln W - min))`.
    inverse_weight: Vec<(f64, f64)>,
}

/// Runs `n_chains` independent chains (chain `c` on stream `(seed, c)`),
/// each with `burn_in` discarded sweeps and `n_sweeps` measured sweeps.
/// Observables are measured once per sweep. The partition function comes
/// from `1/Y = E[1/W]` under the weighted measure.
pub fn metropolis_estimate(
    graph: &Graph,
    beta: f64,
    u: f64,
    spec: &WeightSpec,
    observables: &[&dyn Observable],
    config: &MetropolisConfig,
) -> Result<SamplerOutput> {
    config.validate()?;
    // surface parameter errors before spawning workers
    MetropolisChain::new(graph, beta, u, spec, config.relabel, stream(config.seed, 0))?;
    let per_chain = config.n_batches / config.n_chains;
    let sweeps_per_batch = config.n_sweeps / per_chain;

    let chains: Vec<ChainBatches> = map_indexed(config.n_chains, config.execution, |c| {
        let mut chain = MetropolisChain::new(graph, beta, u, spec, config.relabel, stream(config.seed, c as u64))
            .expect("validated");
        for _ in 0..config.burn_in {
            chain.sweep();
        }
        let mut values = Vec::with_capacity(per_chain);
        let mut inverse_weight = Vec::with_capacity(per_chain);
        let mut log_ws = Vec::with_capacity(sweeps_per_batch);
        for _ in 0..per_chain {
            let mut sums = vec![0.0; observables.len()];
            log_ws.clear();
            for _ in 0..sweeps_per_batch {
                chain.sweep();
                chain.loops();
                for (s, obs) in sums.iter_mut().zip(observables) {
                    *s += obs.evaluate(&chain.omega, &chain.loops);
                }
                log_ws.push(chain.log_weight());
            }
            values.push(sums.iter().map(|s| s / sweeps_per_batch as f64).collect());
            let min = log_ws.iter().copied().fold(f64::INFINITY, f64::min);
            let sum: f64 = log_ws.iter().map(|l| (min - l).exp()).sum();
            inverse_weight.push((min, sum / sweeps_per_batch as f64));
        }
        ChainBatches { values, inverse_weight }
    });

    let n_samples = config.n_sweeps * config.n_chains;
    let all: Vec<&Vec<f64>> = chains.iter().flat_map(|c| c.values.iter()).collect();
    let series = (0..observables.len())
        .map(|k| BatchSeries::from_batches(all.iter().map(|b| b[k]).collect(), n_samples))
        .collect();

    // batch means of 1/W relative to exp(-floor), then the delta method
    let inv: Vec<(f64, f64)> = chains.iter().flat_map(|c| c.inverse_weight.iter().copied()).collect();
    let floor = inv.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let scaled: Vec<f64> = inv.iter().map(|&(m, s)| s * (floor - m).exp()).collect();
    let avg = scaled.iter().sum::<f64>() / scaled.len() as f64;
    let y = floor.exp() / avg;
    let partition = BatchSeries::new(
        y,
        scaled.iter().map(|s| y * (2.0 - s / avg)).collect(),
        n_samples,
    );

    Ok(SamplerOutput {
        observables: series,
        partition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acceptance_formulas() {
        assert_eq!(insert_acceptance(1.0, 4, 1.0, 0), 1.0);
        assert_eq!(insert_acceptance(1.0, 4, 1.0, 7), 0.5);
        assert_eq!(delete_acceptance(1.0, 4, 1.0, 2), 0.5);
        assert_eq!(delete_acceptance(2.0, 4, 1.0, 2), 1.0);
        assert!((relabel_acceptance(1.0, 0.25, Kind::Cross) - 1.0).abs() < 1e-15);
        assert!((relabel_acceptance(1.0, 0.25, Kind::Bar) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn delete_on_empty_is_rejected() {
        let g = Graph::chain(2, false).unwrap();
        let spec = WeightSpec::uniform(2.0).unwrap();
        let mut chain = MetropolisChain::new(&g, 1.0, 0.5, &spec, None, stream(1, 0)).unwrap();
        assert!(!chain.try_delete());
        assert!(!chain.try_relabel());
        assert!(chain.state().is_empty());
    }

    #[test]
    fn relabel_requires_interior_u() {
        let g = Graph::chain(2, false).unwrap();
        let spec = WeightSpec::uniform(2.0).unwrap();
        assert!(MetropolisChain::new(&g, 1.0, 1.0, &spec, Some(true), stream(1, 0)).is_err());
        assert!(MetropolisChain::new(&g, 1.0, 0.0, &spec, None, stream(1, 0)).is_ok());
    }

    #[test]
    fn uniform_weight_ratios_are_powers_of_theta() {
        // every accepted move changes ln W by a multiple of ln theta
        let g = Graph::chain(4, true).unwrap();
        let spec = WeightSpec::uniform(3.0).unwrap();
        let mut chain = MetropolisChain::new(&g, 1.5, 0.5, &spec, None, stream(4, 0)).unwrap();
        let ln3 = 3f64.ln();
        for _ in 0..2000 {
            let before = chain.loops().n_loops() as i64;
            chain.step();
            let after = chain.loops().n_loops() as i64;
            assert!((after - before).abs() <= 1);
            assert!((chain.log_weight() - after as f64 * ln3).abs() < 1e-9);
        }
    }

    #[test]
    fn state_stays_consistent_with_loops() {
        let g = Graph::torus(&[2, 2]).unwrap();
        let spec = WeightSpec::field(1, vec![0.2, -0.1, 0.3, 0.0]).unwrap();
        let mut chain = MetropolisChain::new(&g, 1.0, 0.5, &spec, None, stream(8, 2)).unwrap();
        for _ in 0..50 {
            chain.sweep();
            chain.state().validate(&g).unwrap();
            let fresh = crate::loops::build_loops(&g, chain.state()).unwrap();
            assert_eq!(&fresh, chain.loops());
            assert!((spec.log_weight(&fresh) - chain.log_weight()).abs() < 1e-12);
        }
    }

    #[test]
    fn count_only_chain_rebuilds_loops_on_demand() {
        let g = Graph::chain(5, true).unwrap();
        let spec = WeightSpec::uniform(2.0).unwrap();
        let mut chain = MetropolisChain::new(&g, 2.0, 0.3, &spec, None, stream(9, 1)).unwrap();
        for _ in 0..50 {
            chain.sweep();
            let fresh = crate::loops::build_loops(&g, chain.state()).unwrap();
            assert_eq!(&fresh, chain.loops());
            assert_eq!(spec.log_weight(&fresh), chain.log_weight());
        }
    }

    #[test]
    fn config_validation() {
        let mut c = MetropolisConfig::new(100, 10, 0);
        assert!(c.validate().is_ok());
        c.n_sweeps = 101;
        assert!(c.validate().is_err());
        c.n_sweeps = 100;
        c.n_batches = 25;
        assert!(c.validate().is_err());
    }
}
