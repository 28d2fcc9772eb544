//! Loop-event probabilities at time 0 and the spin correlations they encode.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::events::EventList;
use crate::lattice::Graph;
use crate::loops::{LoopDecomposition, PairEvent};
use crate::measure::{Observable, SamplerConfig, WeightSpec};
use crate::oracle::spin::SiteMatrix;
use crate::stats::{BatchSeries, EstimateWithError};

/// Probabilities of `E+` (same loop, same direction), `E-` (same loop,
/// opposite directions), `E = E+ u E-` and its complement.
#[derive(Clone, Debug, PartialEq)]
pub struct PairEventProbs {
    pub p_plus: EstimateWithError,
    pub p_minus: EstimateWithError,
    pub p_same: EstimateWithError,
    pub p_diff: EstimateWithError,
    plus: BatchSeries,
    minus: BatchSeries,
}

impl PairEventProbs {
    /// Builds the four estimates from the `E+` and `E-` indicator series of
    /// one sampling run.
    pub fn from_series(plus: BatchSeries, minus: BatchSeries) -> Result<PairEventProbs> {
        if plus.batches.len() != minus.batches.len() {
            return Err(Error::DimensionMismatch {
                expected: plus.batches.len(),
                found: minus.batches.len(),
            });
        }
        let same = BatchSeries::linear(0.0, &[(1.0, &plus), (1.0, &minus)]);
        let diff = BatchSeries::linear(1.0, &[(-1.0, &same)]);
        Ok(PairEventProbs {
            p_plus: plus.estimate(),
            p_minus: minus.estimate(),
            p_same: same.estimate(),
            p_diff: diff.estimate(),
            plus,
            minus,
        })
    }

    /// Known probabilities with zero error bars.
    pub fn exact(p_plus: f64, p_minus: f64) -> Result<PairEventProbs> {
        for (name, p) in [("p_plus", p_plus), ("p_minus", p_minus)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(name, format!("{p} is not a probability")));
            }
        }
        if p_plus + p_minus > 1.0 {
            return Err(invalid("p_minus", "p_plus + p_minus exceeds 1"));
        }
        PairEventProbs::from_series(
            BatchSeries::new(p_plus, vec![p_plus; 2], 0),
            BatchSeries::new(p_minus, vec![p_minus; 2], 0),
        )
    }

    pub fn plus_series(&self) -> &BatchSeries {
        &self.plus
    }

    pub fn minus_series(&self) -> &BatchSeries {
        &self.minus
    }
}

fn indicator(dec: &LoopDecomposition, x: usize, y: usize, want: PairEvent) -> f64 {
    if dec.pair_event(x, y) == want {
        1.0
    } else {
        0.0
    }
}

fn check_pair(graph: &Graph, x: usize, y: usize) -> Result<()> {
    if x == y {
        return Err(Error::SameSite(x));
    }
    for s in [x, y] {
        if s >= graph.n_sites() {
            return Err(invalid("site", format!("{s} out of range for {} sites", graph.n_sites())));
        }
    }
    Ok(())
}

/// Event probabilities for one pair. The field must vanish.
pub fn pair_event_probs(
    graph: &Graph,
    beta: f64,
    u: f64,
    spec: &WeightSpec,
    x: usize,
    y: usize,
    sampler: &SamplerConfig,
) -> Result<PairEventProbs> {
    let mut out = pair_event_table(graph, beta, u, spec, &[(x, y)], sampler)?;
    Ok(out.remove(0))
}

/// Event probabilities for many pairs from a single sampling run.
pub fn pair_event_table(
    graph: &Graph,
    beta: f64,
    u: f64,
    spec: &WeightSpec,
    pairs: &[(usize, usize)],
    sampler: &SamplerConfig,
) -> Result<Vec<PairEventProbs>> {
    if !spec.is_zero_field() {
        return Err(invalid("h", "pair events are only related to correlations at zero field"));
    }
    if pairs.is_empty() {
        return Err(invalid("pairs", "no pairs requested"));
    }
    for &(x, y) in pairs {
        check_pair(graph, x, y)?;
    }
    let observables: Vec<Box<dyn Observable>> = pairs
        .iter()
        .flat_map(|&(x, y)| {
            [PairEvent::SameDirection, PairEvent::OppositeDirection].map(|want| {
                Box::new(move |_: &EventList, dec: &LoopDecomposition| indicator(dec, x, y, want))
                    as Box<dyn Observable>
            })
        })
        .collect();
    let refs: Vec<&dyn Observable> = observables.iter().map(|b| b.as_ref()).collect();
    let out = sampler.run(graph, beta, u, spec, &refs)?;
    let mut series = out.observables.into_iter();
    pairs
        .iter()
        .map(|_| {
            let plus = series.next().expect("two series per pair");
            let minus = series.next().expect("two series per pair");
            PairEventProbs::from_series(plus, minus)
        })
        .collect()
}

/// `<A_x B_y> = plus P(E+) + minus P(E-) + apart P(E^c)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationCoefficients {
    pub plus: f64,
    pub minus: f64,
    pub apart: f64,
}

fn check_square(a: &SiteMatrix, b: &SiteMatrix, two_s: u32) -> Result<usize> {
    let d = two_s as usize + 1;
    a.expect_dim(d)?;
    b.expect_dim(d)?;
    Ok(d)
}

fn trace_of_product(a: &SiteMatrix, b: &SiteMatrix) -> Complex64 {
    let d = a.dim();
    let mut t = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            t += a.get(i, j) * b.get(j, i);
        }
    }
    t
}

impl CorrelationCoefficients {
    /// Coefficients for the plain loop measure:
    /// `tr AB / (2S+1)`, `tr AB^t / (2S+1)`, `tr A tr B / (2S+1)^2`.
    pub fn plain(a: &SiteMatrix, b: &SiteMatrix, two_s: u32) -> Result<CorrelationCoefficients> {
        let d = check_square(a, b, two_s)? as f64;
        Ok(CorrelationCoefficients {
            plus: trace_of_product(a, b).re / d,
            minus: trace_of_product(a, &b.transpose()).re / d,
            apart: (a.trace() * b.trace()).re / (d * d),
        })
    }

    /// Coefficients for the tilde measure (integer spin only). The `E-` term
    /// becomes `sum_{a,b} (-1)^{a+b} <a|A|b> <-a|B|-b> / (2S+1)`.
    pub fn tilde(a: &SiteMatrix, b: &SiteMatrix, two_s: u32) -> Result<CorrelationCoefficients> {
        if two_s % 2 == 1 {
            return Err(Error::HalfIntegerSpin(two_s));
        }
        let mut c = CorrelationCoefficients::plain(a, b, two_s)?;
        let d = a.dim();
        let mut minus = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                // a - b has the parity of i - j because S is an integer
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                minus += sign * a.get(i, j) * b.get(d - 1 - i, d - 1 - j);
            }
        }
        c.minus = minus.re / d as f64;
        Ok(c)
    }

    /// Coefficients of `<A_x B_y> - <A_x><B_y>`, where `offset = <A><B>`.
    pub fn shifted(self, offset: f64) -> CorrelationCoefficients {
        CorrelationCoefficients {
            plus: self.plus - offset,
            minus: self.minus - offset,
            apart: self.apart - offset,
        }
    }

    pub fn apply(&self, probs: &PairEventProbs) -> f64 {
        self.plus * probs.p_plus.mean + self.minus * probs.p_minus.mean + self.apart * probs.p_diff.mean
    }

    /// The combination with a batch-means error bar.
    pub fn estimate(&self, probs: &PairEventProbs) -> EstimateWithError {
        let series = BatchSeries::linear(
            self.apart,
            &[
                (self.plus - self.apart, &probs.plus),
                (self.minus - self.apart, &probs.minus),
            ],
        );
        EstimateWithError {
            mean: self.apply(probs),
            ..series.estimate()
        }
    }
}

/// `<A_x> = tr A / (2S+1)`, real part.
pub fn one_point(a: &SiteMatrix, two_s: u32) -> Result<f64> {
    let d = two_s as usize + 1;
    a.expect_dim(d)?;
    Ok(a.trace().re / d as f64)
}

/// `<A_x B_y>` under the plain loop measure.
pub fn correlation_plain(a: &SiteMatrix, b: &SiteMatrix, probs: &PairEventProbs, two_s: u32) -> Result<f64> {
    Ok(CorrelationCoefficients::plain(a, b, two_s)?.apply(probs))
}

/// `<A_x B_y>` under the tilde loop measure.
pub fn correlation_tilde(a: &SiteMatrix, b: &SiteMatrix, probs: &PairEventProbs, two_s: u32) -> Result<f64> {
    Ok(CorrelationCoefficients::tilde(a, b, two_s)?.apply(probs))
}

pub fn correlation_plain_estimate(
    a: &SiteMatrix,
    b: &SiteMatrix,
    probs: &PairEventProbs,
    two_s: u32,
) -> Result<EstimateWithError> {
    Ok(CorrelationCoefficients::plain(a, b, two_s)?.estimate(probs))
}

pub fn correlation_tilde_estimate(
    a: &SiteMatrix,
    b: &SiteMatrix,
    probs: &PairEventProbs,
    two_s: u32,
) -> Result<EstimateWithError> {
    Ok(CorrelationCoefficients::tilde(a, b, two_s)?.estimate(probs))
}

/// Truncated correlation `<A_x B_y> - <A_x><B_y>` under the tilde measure.
pub fn truncated_tilde_estimate(
    a: &SiteMatrix,
    b: &SiteMatrix,
    probs: &PairEventProbs,
    two_s: u32,
) -> Result<EstimateWithError> {
    let offset = one_point(a, two_s)? * one_point(b, two_s)?;
    Ok(CorrelationCoefficients::tilde(a, b, two_s)?.shifted(offset).estimate(probs))
}

/// Spin 1/2: `<S^1 S^1> = <S^3 S^3> = P(E) / 4`.
pub fn spin_half_longitudinal(probs: &PairEventProbs) -> EstimateWithError {
    CorrelationCoefficients { plus: 0.25, minus: 0.25, apart: 0.0 }.estimate(probs)
}

/// Spin 1/2: `<S^2 S^2> = (P(E+) - P(E-)) / 4`.
pub fn spin_half_transverse(probs: &PairEventProbs) -> EstimateWithError {
    CorrelationCoefficients { plus: 0.25, minus: -0.25, apart: 0.0 }.estimate(probs)
}

fn integer_spin(two_s: u32) -> Result<f64> {
    if two_s % 2 == 1 {
        Err(Error::HalfIntegerSpin(two_s))
    } else {
        Ok(f64::from(two_s / 2))
    }
}

/// Tilde measure, integer `S`: `<S^i_x S^i_y> = S(S+1)/3 (P(E+) - P(E-))`.
pub fn tilde_spin_correlation(probs: &PairEventProbs, two_s: u32) -> Result<EstimateWithError> {
    let s = integer_spin(two_s)?;
    let c = s * (s + 1.0) / 3.0;
    Ok(CorrelationCoefficients { plus: c, minus: -c, apart: 0.0 }.estimate(probs))
}

/// Tilde measure, integer `S`: truncated `<(S^3_x)^2 (S^3_y)^2>` equals
/// `S(S+1)(2S-1)(2S+3)/45 P(E)`.
pub fn tilde_nematic_correlation(probs: &PairEventProbs, two_s: u32) -> Result<EstimateWithError> {
    let s = integer_spin(two_s)?;
    let c = s * (s + 1.0) * (2.0 * s - 1.0) * (2.0 * s + 3.0) / 45.0;
    Ok(CorrelationCoefficients { plus: c, minus: c, apart: 0.0 }.estimate(probs))
}

/// `E[l_0 / (beta |Lambda|)]` with `l_0` the length of the loop through
/// `(0, 0)`, under the uniform weight `theta^{|L|}`.
pub fn macroscopic_fraction(
    graph: &Graph,
    beta: f64,
    u: f64,
    theta: f64,
    sampler: &SamplerConfig,
) -> Result<EstimateWithError> {
    let spec = WeightSpec::uniform(theta)?;
    let volume = beta * graph.n_sites() as f64;
    let obs = move |_: &EventList, dec: &LoopDecomposition| dec.length_through(0) / volume;
    let out = sampler.run(graph, beta, u, &spec, &[&obs])?;
    Ok(out.estimate(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::spin::{spin_component, spin_z};

    fn sq(m: &SiteMatrix) -> SiteMatrix {
        m.mul(m).unwrap()
    }

    #[test]
    fn spin_half_table() {
        let probs = PairEventProbs::exact(0.3, 0.2).unwrap();
        for i in [1, 3] {
            let s = spin_component(1, i);
            let v = correlation_plain(&s, &s, &probs, 1).unwrap();
            assert!((v - 0.25 * 0.5).abs() < 1e-15);
        }
        let s2 = spin_component(1, 2);
        let v = correlation_plain(&s2, &s2, &probs, 1).unwrap();
        assert!((v - 0.25 * 0.1).abs() < 1e-15);
        assert_eq!(spin_half_longitudinal(&probs).mean, 0.125);
    }

    #[test]
    fn longitudinal_is_quarter_of_p_same_exactly() {
        let probs = PairEventProbs::exact(0.123456789, 0.3141592).unwrap();
        let s3 = spin_z(1);
        assert_eq!(correlation_plain(&s3, &s3, &probs, 1).unwrap(), 0.25 * probs.p_same.mean);
    }

    #[test]
    fn identity_gives_one_point() {
        let probs = PairEventProbs::exact(0.1, 0.4).unwrap();
        for two_s in [1, 2, 3] {
            let d = two_s as usize + 1;
            let a = spin_z(two_s).add(&SiteMatrix::identity(d).scaled(0.7)).unwrap();
            let v = correlation_plain(&a, &SiteMatrix::identity(d), &probs, two_s).unwrap();
            assert!((v - one_point(&a, two_s).unwrap()).abs() < 1e-14);
        }
        let id = SiteMatrix::identity(3);
        assert!((correlation_tilde(&id, &id, &probs, 2).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tilde_spin_one_table() {
        let probs = PairEventProbs::exact(0.35, 0.15).unwrap();
        let sz = spin_z(2);
        for i in 1..=3 {
            let s = spin_component(2, i);
            let v = correlation_tilde(&s, &s, &probs, 2).unwrap();
            assert!((v - 2.0 / 3.0 * 0.2).abs() < 1e-14, "component {i}: {v}");
        }
        let nematic = truncated_tilde_estimate(&sq(&sz), &sq(&sz), &probs, 2).unwrap();
        assert!((nematic.mean - 2.0 / 9.0 * 0.5).abs() < 1e-14);
        assert!((tilde_nematic_correlation(&probs, 2).unwrap().mean - nematic.mean).abs() < 1e-14);
    }

    #[test]
    fn specializations_match_tables_for_larger_spin() {
        let probs = PairEventProbs::exact(0.25, 0.3).unwrap();
        for two_s in [2, 4, 6] {
            let sz = spin_z(two_s);
            let spin = correlation_tilde(&sz, &sz, &probs, two_s).unwrap();
            assert!((spin - tilde_spin_correlation(&probs, two_s).unwrap().mean).abs() < 1e-12);
            let nematic = truncated_tilde_estimate(&sq(&sz), &sq(&sz), &probs, two_s).unwrap();
            assert!((nematic.mean - tilde_nematic_correlation(&probs, two_s).unwrap().mean).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        let probs = PairEventProbs::exact(0.1, 0.1).unwrap();
        assert!(correlation_plain(&spin_z(1), &spin_z(2), &probs, 1).is_err());
        assert_eq!(
            correlation_tilde(&spin_z(1), &spin_z(1), &probs, 1),
            Err(Error::HalfIntegerSpin(1))
        );
        assert!(tilde_spin_correlation(&probs, 3).is_err());
        assert!(PairEventProbs::exact(0.7, 0.6).is_err());
    }

    #[test]
    fn probabilities_add_up() {
        let plus = BatchSeries::from_batches(vec![0.1, 0.2, 0.15], 30);
        let minus = BatchSeries::from_batches(vec![0.3, 0.25, 0.2], 30);
        let p = PairEventProbs::from_series(plus, minus).unwrap();
        assert_eq!(p.p_same.mean, p.p_plus.mean + p.p_minus.mean);
        assert_eq!(p.p_same.mean + p.p_diff.mean, 1.0);
    }

    #[test]
    fn field_is_rejected() {
        use crate::measure::DirectConfig;
        let g = Graph::chain(2, false).unwrap();
        let spec = WeightSpec::field(1, vec![0.1, 0.0]).unwrap();
        let sampler = SamplerConfig::Direct(DirectConfig {
            n_samples: 1000,
            n_batches: 10,
            seed: 1,
            execution: Default::default(),
        });
        assert!(pair_event_probs(&g, 1.0, 0.5, &spec, 0, 1, &sampler).is_err());
        let spec = WeightSpec::uniform(2.0).unwrap();
        assert_eq!(
            pair_event_probs(&g, 1.0, 0.5, &spec, 1, 1, &sampler),
            Err(Error::SameSite(1))
        );
    }
}
