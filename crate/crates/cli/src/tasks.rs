//! One function per task. Each returns the rows to report.

use qloop::estimators::{correlation_plain_estimate, correlation_tilde_estimate, truncated_tilde_estimate};
use qloop::oracle::spin::{spin_component, spin_z};
use qloop::oracle::{
    count_compatible_configs, gibbs_average, hamiltonian, ConfigMode, Family, SpinSpace, Thermal,
};
use qloop::rng::stream;
use qloop::{
    macroscopic_fraction, pair_event_table, sample_events, EventList, LoopDecomposition, LoopTracer, SamplerConfig,
    WeightSpec,
};
use serde_json::json;

use crate::config::{Run, Task};
use crate::error::CliError;
use crate::report::{Report, Row};

/// Slack for Gibbs entries that vanish identically.
const GIBBS_FLOOR: f64 = 1e-12;

pub fn run(run: &Run) -> Result<Report, CliError> {
    match run.task {
        Task::Sample => sample(run),
        Task::VerifyZ => verify_z(run),
        Task::Correlate => correlate(run),
        Task::GibbsCheck => gibbs_check(run),
        Task::ConfigsCheck => configs_check(run),
        Task::Ed => ed(run),
        Task::MacroLoop => macro_loop(run),
    }
}

fn thermal(run: &Run) -> Result<Thermal, CliError> {
    let c = &run.config;
    let space = SpinSpace::new(run.graph.n_sites(), c.two_s)?;
    let h = hamiltonian(&run.graph, c.two_s, c.u, &run.h, c.family)?;
    Ok(Thermal::new(space, &h, c.beta)?)
}

fn sample(run: &Run) -> Result<Report, CliError> {
    let c = &run.config;
    let spec = match c.theta {
        Some(theta) => WeightSpec::uniform(theta)?,
        None => run.field_weights()?,
    };
    let n_loops = |_: &EventList, d: &LoopDecomposition| d.n_loops() as f64;
    let n_events = |w: &EventList, _: &LoopDecomposition| w.len() as f64;
    let out = run.sampler.run(&run.graph, c.beta, c.u, &spec, &[&n_loops, &n_events])?;
    let mut report = Report::default();
    report.push(Row::estimate("partition", out.partition_estimate()));
    report.push(Row::estimate("n_loops", out.estimate(0)));
    report.push(Row::estimate("n_events", out.estimate(1)));
    Ok(report)
}

fn verify_z(run: &Run) -> Result<Report, CliError> {
    let c = &run.config;
    let z = thermal(run)?.partition_function();
    let out = run.sampler.run(&run.graph, c.beta, c.u, &run.field_weights()?, &[])?;
    let mut report = Report::default();
    report.push(Row::compare("partition", out.partition_estimate(), z, 0.0));
    Ok(report)
}

fn correlate(run: &Run) -> Result<Report, CliError> {
    let c = &run.config;
    let th = thermal(run)?;
    let pairs = run.pairs();
    let table = pair_event_table(&run.graph, c.beta, c.u, &run.field_weights()?, &pairs, &run.sampler)?;
    let sz = spin_z(c.two_s);
    let sz2 = sz.mul(&sz)?;
    let mut report = Report::default();
    for (&(x, y), probs) in pairs.iter().zip(&table) {
        report.push(Row::estimate("p_plus", probs.p_plus).at(x, y));
        report.push(Row::estimate("p_minus", probs.p_minus).at(x, y));
        for i in 1..=3 {
            let s = spin_component(c.two_s, i);
            let est = match c.family {
                Family::Q => correlation_plain_estimate(&s, &s, probs, c.two_s)?,
                Family::P => correlation_tilde_estimate(&s, &s, probs, c.two_s)?,
            };
            let exact = th.two_point(&s, x, &s, y)?;
            report.push(Row::compare(format!("S{i}S{i}"), est, exact, 0.0).at(x, y));
        }
        if c.family == Family::P {
            let est = truncated_tilde_estimate(&sz2, &sz2, probs, c.two_s)?;
            let exact = th.truncated_two_point(&sz2, x, &sz2, y)?;
            report.push(Row::compare("nematic", est, exact, 0.0).at(x, y));
        }
    }
    Ok(report)
}

fn gibbs_check(run: &Run) -> Result<Report, CliError> {
    let c = &run.config;
    let SamplerConfig::Direct(direct) = &run.sampler else {
        unreachable!("validated in config");
    };
    let exact = thermal(run)?.gibbs_operator().clone();
    let series = gibbs_average(&run.graph, c.beta, c.u, c.two_s, &run.h, c.family, direct)?;
    let dim = exact.dim();
    let mut report = Report::default();
    for (k, s) in series.iter().enumerate() {
        let (i, j) = (k / dim, k % dim);
        report.push(Row::compare("gibbs", s.estimate(), exact.get(i, j), GIBBS_FLOOR).at(i, j));
    }
    Ok(report)
}

fn configs_check(run: &Run) -> Result<Report, CliError> {
    let c = &run.config;
    let mode = match c.family {
        Family::Q => ConfigMode::Plain,
        Family::P => ConfigMode::Tilde,
    };
    let mut tracer = LoopTracer::new();
    let mut report = Report::default();
    for r in 0..c.n_realizations {
        let omega = sample_events(&run.graph, c.beta, c.u, &mut stream(run.seed, r as u64))?;
        let loops = tracer.count_loops(&run.graph, &omega) as u32;
        let want = u128::from(c.two_s + 1).pow(loops);
        let got = count_compatible_configs(&run.graph, &omega, c.two_s, mode)?;
        report.push(Row {
            exact: Some(want as f64),
            pass: Some(got == want),
            ..Row::value(format!("configs#{r}"), got as f64)
        });
    }
    Ok(report)
}

fn ed(run: &Run) -> Result<Report, CliError> {
    let c = &run.config;
    let th = thermal(run)?;
    let sz = spin_z(c.two_s);
    let mut report = Report::default();
    let z = th.partition_function();
    report.push(Row::value("Z", z));
    report.push(Row::value("E0", th.eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)));
    let mut correlations = Vec::new();
    for (x, y) in run.pairs() {
        let v = th.two_point(&sz, x, &sz, y)?;
        report.push(Row::value("S3S3", v).at(x, y));
        correlations.push(json!({"x": x, "y": y, "observable": "S3S3", "value": v}));
    }
    report.oracle = Some(json!({
        "graph": c.graph,
        "S": f64::from(c.two_s) / 2.0,
        "u": c.u,
        "beta": c.beta,
        "family": c.family,
        "Z": z,
        "correlations": correlations,
    }));
    Ok(report)
}

fn macro_loop(run: &Run) -> Result<Report, CliError> {
    let c = &run.config;
    let est = macroscopic_fraction(&run.graph, c.beta, c.u, run.theta(), &run.sampler)?;
    let mut report = Report::default();
    report.push(Row::estimate("l0_fraction", est));
    Ok(report)
}
