//! Loop weights and the samplers for the weighted loop measure
//! `W(omega) rho(d omega) / Y`, where `W(omega)` is the product of the loop
//! weights and `rho` the Poisson measure.

mod direct;
mod metropolis;

pub use direct::{direct_estimate, DirectConfig};
pub use metropolis::{
    delete_acceptance, insert_acceptance, metropolis_estimate, relabel_acceptance, MetropolisChain,
    MetropolisConfig, MoveKind, MoveOutcome,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::events::EventList;
use crate::lattice::Graph;
use crate::loops::LoopDecomposition;
use crate::stats::{BatchSeries, EstimateWithError};

/// Loop weight functional. Spins are stored as `two_s = 2S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSpec {
    /// `w(gamma) = theta`.
    Uniform { theta: f64 },
    /// `w(gamma) = sum_{a=-S..S} exp(a sum_x h_x ell_x(gamma))`.
    Field { two_s: u32, h: Vec<f64> },
    /// `w(gamma) = sum_{a=-S..S} exp(a sum_x h_x [ell+_x - ell-_x](gamma))`,
    /// integer `S` only.
    FieldDirected { two_s: u32, h: Vec<f64> },
}

impl WeightSpec {
    pub fn uniform(theta: f64) -> Result<WeightSpec> {
        let spec = WeightSpec::Uniform { theta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn field(two_s: u32, h: Vec<f64>) -> Result<WeightSpec> {
        let spec = WeightSpec::Field { two_s, h };
        spec.validate()?;
        Ok(spec)
    }

    pub fn field_directed(two_s: u32, h: Vec<f64>) -> Result<WeightSpec> {
        let spec = WeightSpec::FieldDirected { two_s, h };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightSpec::Uniform { theta } => {
                if !(theta.is_finite() && *theta > 0.0) {
                    return Err(invalid("theta", format!("must be positive, got {theta}")));
                }
            }
            WeightSpec::Field { h, .. } | WeightSpec::FieldDirected { h, .. } => {
                if h.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("h", "field values must be finite"));
                }
            }
        }
        if let WeightSpec::FieldDirected { two_s, .. } = self {
            if two_s % 2 != 0 {
                return Err(Error::HalfIntegerSpin(*two_s));
            }
        }
        Ok(())
    }

    /// Checks that the field covers every site of `graph`.
    pub fn validate_for(&self, graph: &Graph) -> Result<()> {
        self.validate()?;
        match self {
            WeightSpec::Field { h, .. } | WeightSpec::FieldDirected { h, .. } if h.len() != graph.n_sites() => {
                Err(invalid(
                    "h",
                    format!("has {} entries for {} sites", h.len(), graph.n_sites()),
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn two_s(&self) -> Option<u32> {
        match self {
            WeightSpec::Uniform { .. } => None,
            WeightSpec::Field { two_s, .. } | WeightSpec::FieldDirected { two_s, .. } => Some(*two_s),
        }
    }

    pub fn is_zero_field(&self) -> bool {
        match self {
            WeightSpec::Uniform { .. } => true,
            WeightSpec::Field { h, .. } | WeightSpec::FieldDirected { h, .. } => h.iter().all(|&v| v == 0.0),
        }
    }

    /// Weight of a loop with zero field, `theta` or `2S + 1`.
    pub fn zero_field_weight(&self) -> f64 {
        match self {
            WeightSpec::Uniform { theta } => *theta,
            WeightSpec::Field { two_s, .. } | WeightSpec::FieldDirected { two_s, .. } => f64::from(two_s + 1),
        }
    }

    fn loop_phase(&self, dec: &LoopDecomposition, id: usize) -> f64 {
        match self {
            WeightSpec::Uniform { .. } => 0.0,
            WeightSpec::Field { h, .. } => dec.site_lengths(id).iter().map(|l| h[l.site] * l.total()).sum(),
            WeightSpec::FieldDirected { h, .. } => dec
                .site_lengths(id)
                .iter()
                .map(|l| h[l.site] * (l.up - l.down))
                .sum(),
        }
    }

    /// Weight of one loop.
    pub fn weight_of(&self, dec: &LoopDecomposition, id: usize) -> f64 {
        match self {
            WeightSpec::Uniform { theta } => *theta,
            WeightSpec::Field { two_s, .. } | WeightSpec::FieldDirected { two_s, .. } => {
                spin_sum(*two_s, self.loop_phase(dec, id))
            }
        }
    }

    /// `ln w(gamma)` for one loop, stable for large phases.
    pub fn log_weight_of(&self, dec: &LoopDecomposition, id: usize) -> f64 {
        match self {
            WeightSpec::Uniform { theta } => theta.ln(),
            WeightSpec::Field { two_s, .. } | WeightSpec::FieldDirected { two_s, .. } => {
                log_spin_sum(*two_s, self.loop_phase(dec, id))
            }
        }
    }

    /// `ln W(omega) = sum_gamma ln w(gamma)`.
    pub fn log_weight(&self, dec: &LoopDecomposition) -> f64 {
        if self.is_zero_field() {
            return self.log_weight_from_count(dec.n_loops());
        }
        (0..dec.n_loops()).map(|id| self.log_weight_of(dec, id)).sum()
    }

    /// Field and whether it couples to the signed length, for the field
    /// weights.
    pub fn field_coupling(&self) -> Option<(&[f64], bool)> {
        match self {
            WeightSpec::Uniform { .. } => None,
            WeightSpec::Field { h, .. } => Some((h, false)),
            WeightSpec::FieldDirected { h, .. } => Some((h, true)),
        }
    }

    /// `ln W` from per-loop phases as produced by
    /// [`LoopTracer::loop_phases`](crate::loops::LoopTracer::loop_phases).
    pub fn log_weight_from_phases(&self, phases: &[f64]) -> f64 {
        match self {
            WeightSpec::Uniform { theta } => phases.len() as f64 * theta.ln(),
            WeightSpec::Field { two_s, .. } | WeightSpec::FieldDirected { two_s, .. } => {
                phases.iter().map(|&phi| log_spin_sum(*two_s, phi)).sum()
            }
        }
    }

    /// `|L| ln w` at zero field, where the weight only sees the loop count.
    pub fn log_weight_from_count(&self, n_loops: usize) -> f64 {
        debug_assert!(self.is_zero_field());
        n_loops as f64 * self.zero_field_weight().ln()
    }
}

/// `sum_{a=-S..S} exp(a phi)` with `2S = two_s`.
fn spin_sum(two_s: u32, phi: f64) -> f64 {
    (0..=two_s)
        .map(|k| ((f64::from(k) - f64::from(two_s) / 2.0) * phi).exp())
        .sum()
}

fn log_spin_sum(two_s: u32, phi: f64) -> f64 {
    let s = f64::from(two_s) / 2.0;
    let a = phi.abs();
    s * a + (0..=two_s).map(|k| (-(f64::from(k)) * a).exp()).sum::<f64>().ln()
}

/// `W(omega) = prod_gamma w(gamma)`.
pub fn loop_weight(spec: &WeightSpec, dec: &LoopDecomposition) -> Result<f64> {
    if let WeightSpec::Field { h, .. } | WeightSpec::FieldDirected { h, .. } = spec {
        if h.len() != dec.n_sites() {
            return Err(invalid(
                "h",
                format!("has {} entries for {} sites", h.len(), dec.n_sites()),
            ));
        }
    }
    let w: f64 = (0..dec.n_loops()).map(|id| spec.weight_of(dec, id)).product();
    if w > 0.0 && w.is_finite() {
        Ok(w)
    } else {
        Err(Error::NonPositiveWeight)
    }
}

/// A real functional of a realization and its loops.
pub trait Observable: Sync {
    fn evaluate(&self, omega: &EventList, loops: &LoopDecomposition) -> f64;
}

impl<F> Observable for F
where
    F: Fn(&EventList, &LoopDecomposition) -> f64 + Sync,
{
    fn evaluate(&self, omega: &EventList, loops: &LoopDecomposition) -> f64 {
        self(omega, loops)
    }
}

/// Sampler output: one series per observable, plus the partition function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerOutput {
    pub observables: Vec<BatchSeries>,
    pub partition: BatchSeries,
}

impl SamplerOutput {
    pub fn estimate(&self, index: usize) -> EstimateWithError {
        self.observables[index].estimate()
    }

    pub fn estimates(&self) -> Vec<EstimateWithError> {
        self.observables.iter().map(BatchSeries::estimate).collect()
    }

    pub fn partition_estimate(&self) -> EstimateWithError {
        self.partition.estimate()
    }
}

/// Which sampler to run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SamplerConfig {
    Direct(DirectConfig),
    Metropolis(MetropolisConfig),
}

impl SamplerConfig {
    pub fn run(
        &self,
        graph: &Graph,
        beta: f64,
        u: f64,
        spec: &WeightSpec,
        observables: &[&dyn Observable],
    ) -> Result<SamplerOutput> {
        match self {
            SamplerConfig::Direct(c) => direct_estimate(graph, beta, u, spec, observables, c),
            SamplerConfig::Metropolis(c) => metropolis_estimate(graph, beta, u, spec, observables, c),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SamplerConfig::Direct(c) => c.validate(),
            SamplerConfig::Metropolis(c) => c.validate(),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            SamplerConfig::Direct(c) => c.seed,
            SamplerConfig::Metropolis(c) => c.seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> SamplerConfig {
        match &mut self {
            SamplerConfig::Direct(c) => c.seed = seed,
            SamplerConfig::Metropolis(c) => c.seed = seed,
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{Event, Kind};
    use crate::loops::build_loops;

    fn dec_of(graph: &Graph, beta: f64, items: &[(usize, f64, Kind)]) -> LoopDecomposition {
        let omega = EventList::from_events(
            beta,
            0.5,
            items.iter().map(|&(edge, time, kind)| Event { edge, time, kind }).collect(),
        )
        .unwrap();
        build_loops(graph, &omega).unwrap()
    }

    #[test]
    fn uniform_weight_of_empty_chain() {
        let g = Graph::chain(4, false).unwrap();
        let dec = dec_of(&g, 1.0, &[]);
        assert_eq!(loop_weight(&WeightSpec::uniform(2.0).unwrap(), &dec).unwrap(), 16.0);
    }

    #[test]
    fn zero_field_matches_uniform_exactly() {
        let g = Graph::chain(3, true).unwrap();
        let dec = dec_of(&g, 2.0, &[(0, 0.3, Kind::Bar), (1, 0.9, Kind::Cross), (2, 1.5, Kind::Bar)]);
        for two_s in 1..=4u32 {
            let uni = WeightSpec::uniform(f64::from(two_s + 1)).unwrap();
            let field = WeightSpec::field(two_s, vec![0.0; 3]).unwrap();
            assert_eq!(loop_weight(&uni, &dec).unwrap(), loop_weight(&field, &dec).unwrap());
            assert_eq!(uni.log_weight(&dec), field.log_weight(&dec));
            assert_eq!(
                loop_weight(&field, &dec).unwrap(),
                f64::from(two_s + 1).powi(dec.n_loops() as i32)
            );
        }
        let directed = WeightSpec::field_directed(2, vec![0.0; 3]).unwrap();
        assert_eq!(loop_weight(&directed, &dec).unwrap(), 3f64.powi(dec.n_loops() as i32));
    }

    #[test]
    fn single_site_field_weight() {
        let g = Graph::from_edges(1, vec![]).unwrap();
        let dec = dec_of(&g, 1.5, &[]);
        let h0 = 0.7;
        let spec = WeightSpec::field(1, vec![h0]).unwrap();
        let want = (h0 * 1.5 / 2.0).exp() + (-h0 * 1.5 / 2.0).exp();
        assert!((loop_weight(&spec, &dec).unwrap() - want).abs() < 1e-14);
        assert!((spec.log_weight(&dec) - want.ln()).abs() < 1e-14);
    }

    #[test]
    fn directed_weight_uses_signed_lengths() {
        // a single bar joins both sites; one site is traversed up, the other down
        let g = Graph::chain(2, false).unwrap();
        let dec = dec_of(&g, 1.0, &[(0, 0.4, Kind::Bar)]);
        let h = vec![0.5, 0.5];
        let plain = WeightSpec::field(2, h.clone()).unwrap();
        let directed = WeightSpec::field_directed(2, h).unwrap();
        // ell = 2 for the plain weight, ell+ - ell- = 0 for the directed one
        assert!((loop_weight(&plain, &dec).unwrap() - (1.0 + 2.0 * 1f64.cosh())).abs() < 1e-13);
        assert!((loop_weight(&directed, &dec).unwrap() - 3.0).abs() < 1e-13);
    }

    #[test]
    fn log_weight_is_stable_for_large_fields() {
        assert!((log_spin_sum(2, 800.0) - (800.0 + (1.0 + (-800f64).exp()).ln())).abs() < 1e-9);
        assert!((log_spin_sum(3, -0.3) - spin_sum(3, -0.3).ln()).abs() < 1e-14);
    }

    #[test]
    fn spec_validation() {
        assert!(WeightSpec::uniform(0.0).is_err());
        assert_eq!(WeightSpec::field_directed(1, vec![0.0]), Err(Error::HalfIntegerSpin(1)));
        let g = Graph::chain(3, false).unwrap();
        assert!(WeightSpec::field(1, vec![0.0; 2]).unwrap().validate_for(&g).is_err());
        assert!(WeightSpec::field(1, vec![0.0; 3]).unwrap().validate_for(&g).is_ok());
    }
}
