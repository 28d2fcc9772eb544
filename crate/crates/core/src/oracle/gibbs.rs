//! Time-ordered operator product attached to one realization. Its Poisson
//! average is `e^{-beta H}`.

use super::hamiltonian::Family;
use super::operator::{pair_operator, DenseOperator, PairKind, SpinSpace, DEFAULT_DIM_CAP};
use crate::error::Result;
use crate::events::{check_beta, check_u, sample_events, EventList, Kind};
use crate::lattice::Graph;
use crate::measure::DirectConfig;
use crate::par::map_indexed;
use crate::rng::stream;
use crate::stats::BatchSeries;

/// `e^{(beta - t_n) F} A_n e^{(t_n - t_{n-1}) F} ... A_1 e^{t_1 F}` with
/// `F = sum_x h_x S^3_x`, `A_j = T` for crosses and the family's bar operator
/// (`Q` or `P`) for double bars.
pub fn gibbs_from_events(
    graph: &Graph,
    omega: &EventList,
    two_s: u32,
    h: &[f64],
    family: Family,
) -> Result<DenseOperator> {
    omega.validate(graph)?;
    let space = SpinSpace::with_cap(graph.n_sites(), two_s, DEFAULT_DIM_CAP)?;
    let field = space.field_operator(h)?;
    let diag: Vec<f64> = (0..space.dim()).map(|i| field.get(i, i)).collect();
    let t = pair_operator(PairKind::T, two_s);
    let bar = pair_operator(family.bar_operator(), two_s);

    let evolve = |m: &mut DenseOperator, dt: f64| {
        if dt == 0.0 || diag.iter().all(|&f| f == 0.0) {
            return;
        }
        let n = m.dim();
        for (i, f) in diag.iter().enumerate() {
            let c = (dt * f).exp();
            for j in 0..n {
                m.set(i, j, c * m.get(i, j));
            }
        }
    };

    let mut m = DenseOperator::identity(space.dim());
    let mut now = 0.0;
    for e in omega.events() {
        evolve(&mut m, e.time - now);
        now = e.time;
        let (x, y) = graph.edge(e.edge);
        let local = match e.kind {
            Kind::Cross => &t,
            Kind::Bar => &bar,
        };
        space.apply_pair_left(&mut m, local, x, y)?;
    }
    evolve(&mut m, omega.beta() - now);
    Ok(m)
}

/// Poisson average of [`gibbs_from_events`], one series per matrix entry in
/// row-major order. Batch `b` draws from stream `(seed, b)`.
pub fn gibbs_average(
    graph: &Graph,
    beta: f64,
    u: f64,
    two_s: u32,
    h: &[f64],
    family: Family,
    config: &DirectConfig,
) -> Result<Vec<BatchSeries>> {
    check_beta(beta)?;
    check_u(u)?;
    config.validate()?;
    let dim = SpinSpace::with_cap(graph.n_sites(), two_s, DEFAULT_DIM_CAP)?.dim();
    // surface field and graph errors before spawning workers
    gibbs_from_events(graph, &EventList::empty(beta, u)?, two_s, h, family)?;
    let per_batch = config.n_samples / config.n_batches;
    let batches: Vec<Result<DenseOperator>> = map_indexed(config.n_batches, config.execution, |b| {
        let mut rng = stream(config.seed, b as u64);
        let mut acc = DenseOperator::zeros(dim);
        for _ in 0..per_batch {
            let omega = sample_events(graph, beta, u, &mut rng)?;
            acc = acc.add_scaled(&gibbs_from_events(graph, &omega, two_s, h, family)?, 1.0)?;
        }
        Ok(acc.scaled(1.0 / per_batch as f64))
    });
    let batches = batches.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..dim * dim)
        .map(|k| {
            BatchSeries::from_batches(batches.iter().map(|m| m.as_slice()[k]).collect(), config.n_samples)
        })
        .collect())
}
