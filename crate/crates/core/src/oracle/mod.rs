//! Exact quantum-side computations on small Hilbert spaces.

pub mod configs;
pub mod eigen;
pub mod gibbs;
pub mod hamiltonian;
pub mod operator;
pub mod spin;
pub mod thermal;

pub use configs::{count_compatible_configs, ConfigMode};
pub use eigen::{symmetric_eigen, Eigen};
pub use gibbs::{gibbs_average, gibbs_from_events};
pub use hamiltonian::{hamiltonian, spin_form_hamiltonian, Family};
pub use operator::{pair_operator, DenseOperator, PairKind, SpinSpace};
pub use spin::SiteMatrix;
pub use thermal::{partition_function, thermal_two_point, Thermal};
