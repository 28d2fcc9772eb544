//! Finite graphs carrying the loop model and the spin Hamiltonians.
//!
//! Parallel edges are kept: every edge carries its own Poisson process, so a
//! torus with a side of length 2 has each of those bonds twice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a graph is described in a run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSpec {
    Chain { n: usize, periodic: bool },
    Torus(Vec<usize>),
    Edges { n_sites: usize, edges: Vec<[usize; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    n_sites: usize,
    edges: Vec<(usize, usize)>,
    /// Side lengths when built from a chain or torus.
    dims: Option<Vec<usize>>,
    periodic: bool,
}

impl Graph {
    pub fn build(spec: &GraphSpec) -> Result<Graph> {
        match spec {
            GraphSpec::Chain { n, periodic } => Graph::chain(*n, *periodic),
            GraphSpec::Torus(dims) => Graph::torus(dims),
            GraphSpec::Edges { n_sites, edges } => Graph::from_edges(
                *n_sites,
                edges.iter().map(|&[x, y]| (x, y)).collect(),
            ),
        }
    }

    /// Open or periodic chain `0 - 1 - ... - n-1`. A periodic chain with
    /// `n = 2` has two parallel edges; `n = 1` has no edges.
    pub fn chain(n: usize, periodic: bool) -> Result<Graph> {
        if n == 0 {
            return Err(Error::InvalidGraph("chain needs at least one site".into()));
        }
        let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|x| (x, x + 1)).collect();
        if periodic && n > 1 {
            edges.push((n - 1, 0));
        }
        Ok(Graph {
            n_sites: n,
            edges,
            dims: Some(vec![n]),
            periodic,
        })
    }

    /// Periodic box `L_1 x ... x L_d`, sites in row-major order (last
    /// coordinate fastest). Each site gets one edge in the positive direction
    /// of every axis with `L_i >= 2`.
    pub fn torus(dims: &[usize]) -> Result<Graph> {
        if dims.is_empty() {
            return Err(Error::InvalidGraph("torus needs at least one dimension".into()));
        }
        if let Some(pos) = dims.iter().position(|&l| l == 0) {
            return Err(Error::InvalidGraph(format!("torus side {pos} has length 0")));
        }
        let n_sites: usize = dims.iter().product();
        let d = dims.len();
        let mut strides = vec![1usize; d];
        for i in (0..d - 1).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let mut edges = Vec::with_capacity(d * n_sites);
        for site in 0..n_sites {
            for axis in 0..d {
                let len = dims[axis];
                if len < 2 {
                    continue;
                }
                let coord = (site / strides[axis]) % len;
                let next = if coord + 1 == len {
                    site - coord * strides[axis]
                } else {
                    site + strides[axis]
                };
                edges.push((site, next));
            }
        }
        Ok(Graph {
            n_sites,
            edges,
            dims: Some(dims.to_vec()),
            periodic: true,
        })
    }

    pub fn from_edges(n_sites: usize, edges: Vec<(usize, usize)>) -> Result<Graph> {
        if n_sites == 0 {
            return Err(Error::InvalidGraph("graph needs at least one site".into()));
        }
        for (i, &(x, y)) in edges.iter().enumerate() {
            if x >= n_sites || y >= n_sites {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} = {{{x},{y}}} references a site outside 0..{n_sites}"
                )));
            }
            if x == y {
                return Err(Error::InvalidGraph(format!("edge {i} is a self-loop at {x}")));
            }
        }
        Ok(Graph {
            n_sites,
            edges,
            dims: None,
            periodic: false,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> (usize, usize) {
        self.edges[index]
    }

    pub fn dims(&self) -> Option<&[usize]> {
        self.dims.as_deref()
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn degree(&self, site: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(x, y)| x == site || y == site)
            .count()
    }
}
