//! Counting space-time spin configurations compatible with a realization.
//!
//! The count runs on spin configurations directly, without the loop tracer:
//! every initial configuration at time 0 is pushed through the events in time
//! order and the periodic ones are kept.
//!
//! * plain: a cross swaps the two spins; a double bar needs equal spins
//!   before and leaves any equal pair after.
//! * tilde: spins flip sign where the loop reverses direction, so a double
//!   bar needs opposite spins before and leaves any opposite pair after.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{EventList, Kind};
use crate::lattice::Graph;

pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfigMode {
    Plain,
    Tilde,
}

pub fn count_compatible_configs(graph: &Graph, omega: &EventList, two_s: u32, mode: ConfigMode) -> Result<u128> {
    count_compatible_configs_with_cap(graph, omega, two_s, mode, DEFAULT_ENUMERATION_CAP)
}

/// `cap` bounds both the number of time-0 configurations and the count.
pub fn count_compatible_configs_with_cap(
    graph: &Graph,
    omega: &EventList,
    two_s: u32,
    mode: ConfigMode,
    cap: u128,
) -> Result<u128> {
    omega.validate(graph)?;
    let n = graph.n_sites();
    let d = u128::from(two_s) + 1;
    let states = d.checked_pow(n as u32).unwrap_or(u128::MAX);
    if states > cap {
        return Err(Error::EnumerationCap { size: states, cap });
    }
    // spins stored as 2a in -2S, -2S+2, ..., 2S
    let values: Vec<i32> = (0..=two_s as i32).map(|k| 2 * k - two_s as i32).collect();

    let mut total: u128 = 0;
    let mut start = vec![values[0]; n];
    loop {
        let mut layer: HashMap<Vec<i32>, u128> = HashMap::from([(start.clone(), 1)]);
        for e in omega.events() {
            let (x, y) = graph.edge(e.edge);
            let mut next: HashMap<Vec<i32>, u128> = HashMap::with_capacity(layer.len());
            for (mut sigma, ways) in layer {
                match e.kind {
                    Kind::Cross => {
                        sigma.swap(x, y);
                        *next.entry(sigma).or_default() += ways;
                    }
                    Kind::Bar => {
                        let linked = match mode {
                            ConfigMode::Plain => sigma[x] == sigma[y],
                            ConfigMode::Tilde => sigma[x] == -sigma[y],
                        };
                        if !linked {
                            continue;
                        }
                        for &v in &values {
                            sigma[x] = v;
                            sigma[y] = match mode {
                                ConfigMode::Plain => v,
                                ConfigMode::Tilde => -v,
                            };
                            *next.entry(sigma.clone()).or_default() += ways;
                        }
                    }
                }
            }
            layer = next;
        }
        total += layer.get(&start).copied().unwrap_or(0);
        if total > cap {
            return Err(Error::EnumerationCap { size: total, cap });
        }
        if !advance(&mut start, &values) {
            break;
        }
    }
    Ok(total)
}

/// Next configuration in lexicographic order; false after the last one.
fn advance(sigma: &mut [i32], values: &[i32]) -> bool {
    let top = *values.last().expect("at least one value");
    for s in sigma.iter_mut().rev() {
        if *s < top {
            *s += 2;
            return true;
        }
        *s = values[0];
    }
    false
}
