//! The two Hamiltonian families
//!
//! ```text
//! H  = -sum_{xy} (u T_xy + (1-u) Q_xy - 1) - sum_x h_x S^3_x
//! H~ = -sum_{xy} (u T_xy + (1-u) P_xy - 1) - sum_x h_x S^3_x
//! ```
//!
//! and their spin-operator forms for `S = 1/2` (first family) and `S = 1`
//! (second family).

use serde::{Deserialize, Serialize};

use super::operator::{pair_operator, DenseOperator, PairKind, SpinSpace, DEFAULT_DIM_CAP};
use super::spin::spin_component;
use crate::error::{invalid, Result};
use crate::events::check_u;
use crate::lattice::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Double bars act as `Q`; pairs with the plain loop measure.
    Q,
    /// Double bars act as `P`; pairs with the tilde loop measure.
    P,
}

impl Family {
    pub fn bar_operator(self) -> PairKind {
        match self {
            Family::Q => PairKind::Q,
            Family::P => PairKind::P,
        }
    }
}

pub fn hamiltonian(graph: &Graph, two_s: u32, u: f64, h: &[f64], family: Family) -> Result<DenseOperator> {
    hamiltonian_with_cap(graph, two_s, u, h, family, DEFAULT_DIM_CAP)
}

pub fn hamiltonian_with_cap(
    graph: &Graph,
    two_s: u32,
    u: f64,
    h: &[f64],
    family: Family,
    cap: usize,
) -> Result<DenseOperator> {
    check_u(u)?;
    let space = SpinSpace::with_cap(graph.n_sites(), two_s, cap)?;
    let t = pair_operator(PairKind::T, two_s);
    let bar = pair_operator(family.bar_operator(), two_s);
    let mut op = space.field_operator(h)?.scaled(-1.0);
    for &(x, y) in graph.edges() {
        space.add_pair(&mut op, &t, x, y, -u)?;
        space.add_pair(&mut op, &bar, x, y, -(1.0 - u))?;
    }
    for i in 0..space.dim() {
        op.add_at(i, i, graph.n_edges() as f64);
    }
    Ok(op)
}

/// `S^i_x S^i_y` for component `i`.
fn spin_pair(space: &SpinSpace, i: usize, x: usize, y: usize) -> Result<DenseOperator> {
    let s = spin_component(space.two_s(), i);
    space.embed_product(&s, x, &s, y)
}

/// Hamiltonian assembled from spin operators:
///
/// * first family, `S = 1/2`:
///   `-2 sum (S1S1 + (2u-1) S2S2 + S3S3 - 1/4) - sum h S3`
/// * second family, `S = 1`:
///   `-sum (u S.S + (S.S)^2 - 2) - sum h S3`
pub fn spin_form_hamiltonian(graph: &Graph, two_s: u32, u: f64, h: &[f64], family: Family) -> Result<DenseOperator> {
    check_u(u)?;
    let space = SpinSpace::new(graph.n_sites(), two_s)?;
    let dim = space.dim();
    let id = DenseOperator::identity(dim);
    let mut op = space.field_operator(h)?.scaled(-1.0);
    for &(x, y) in graph.edges() {
        let (s1, s2, s3) = (
            spin_pair(&space, 1, x, y)?,
            spin_pair(&space, 2, x, y)?,
            spin_pair(&space, 3, x, y)?,
        );
        let term = match (family, two_s) {
            (Family::Q, 1) => s1
                .add_scaled(&s2, 2.0 * u - 1.0)?
                .add_scaled(&s3, 1.0)?
                .add_scaled(&id, -0.25)?
                .scaled(-2.0),
            (Family::P, 2) => {
                let dot = s1.add_scaled(&s2, 1.0)?.add_scaled(&s3, 1.0)?;
                let dot2 = dot.mul(&dot)?;
                dot.scaled(u).add_scaled(&dot2, 1.0)?.add_scaled(&id, -2.0)?.scaled(-1.0)
            }
            _ => {
                return Err(invalid(
                    "two_s",
                    format!("spin form is available for family Q with S=1/2 and family P with S=1, got {family:?} with 2S={two_s}"),
                ))
            }
        };
        op = op.add_scaled(&term, 1.0)?;
    }
    Ok(op)
}

/// `T`, `Q` (for `S = 1/2`) or `T`, `P` (for `S = 1`) written with spin
/// operators on two sites.
pub fn spin_form_pair(kind: PairKind, two_s: u32) -> Result<DenseOperator> {
    let space = SpinSpace::new(2, two_s)?;
    let id = DenseOperator::identity(space.dim());
    let (s1, s2, s3) = (
        spin_pair(&space, 1, 0, 1)?,
        spin_pair(&space, 2, 0, 1)?,
        spin_pair(&space, 3, 0, 1)?,
    );
    let dot = s1.add_scaled(&s2, 1.0)?.add_scaled(&s3, 1.0)?;
    match (kind, two_s) {
        (PairKind::T, 1) => dot.scaled(2.0).add_scaled(&id, 0.5),
        (PairKind::Q, 1) => s1
            .add_scaled(&s2, -1.0)?
            .add_scaled(&s3, 1.0)?
            .scaled(2.0)
            .add_scaled(&id, 0.5),
        (PairKind::T, 2) => dot.add_scaled(&dot.mul(&dot)?, 1.0)?.add_scaled(&id, -1.0),
        (PairKind::P, 2) => dot.mul(&dot)?.add_scaled(&id, -1.0),
        _ => Err(invalid(
            "two_s",
            format!("no spin form for {kind:?} with 2S={two_s}"),
        )),
    }
}
