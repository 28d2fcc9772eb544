//! Partition functions and equal-time thermal correlations from a full
//! eigendecomposition.

use num_complex::Complex64;

use super::eigen::{symmetric_eigen, Eigen};
use super::operator::{DenseOperator, SpinSpace};
use super::spin::SiteMatrix;
use crate::error::{Error, Result};
use crate::events::check_beta;

/// `e^{-beta H}` and `Z = Tr e^{-beta H}` for one Hamiltonian.
#[derive(Clone, Debug)]
pub struct Thermal {
    space: SpinSpace,
    eigen: Eigen,
    gibbs: DenseOperator,
    z: f64,
}

impl Thermal {
    pub fn new(space: SpinSpace, hamiltonian: &DenseOperator, beta: f64) -> Result<Thermal> {
        check_beta(beta)?;
        if hamiltonian.dim() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: hamiltonian.dim(),
            });
        }
        let eigen = symmetric_eigen(hamiltonian)?;
        let gibbs = eigen.apply_fn(|l| (-beta * l).exp());
        let z = eigen.values.iter().map(|l| (-beta * l).exp()).sum();
        Ok(Thermal {
            space,
            eigen,
            gibbs,
            z,
        })
    }

    pub fn partition_function(&self) -> f64 {
        self.z
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    /// `e^{-beta H}`.
    pub fn gibbs_operator(&self) -> &DenseOperator {
        &self.gibbs
    }

    /// `<A_x B_y> = Tr(A_x B_y e^{-beta H}) / Z`, real part.
    pub fn two_point(&self, a: &SiteMatrix, x: usize, b: &SiteMatrix, y: usize) -> Result<f64> {
        let d = self.space.local_dim();
        a.expect_dim(d)?;
        b.expect_dim(d)?;
        if x == y {
            return self.one_point(&a.mul(b)?, x);
        }
        for s in [x, y] {
            if s >= self.space.n_sites() {
                return Err(Error::InvalidParameter {
                    name: "site",
                    reason: format!("{s} out of range for {} sites", self.space.n_sites()),
                });
            }
        }
        let (sx, sy) = (self.space.stride(x), self.space.stride(y));
        let mut total = Complex64::new(0.0, 0.0);
        for state in 0..self.space.dim() {
            let (ix, iy) = (self.space.local_index(state, x), self.space.local_index(state, y));
            let rest = state - ix * sx - iy * sy;
            for jx in 0..d {
                let ax = a.get(ix, jx);
                if ax.norm_sqr() == 0.0 {
                    continue;
                }
                for jy in 0..d {
                    let other = rest + jx * sx + jy * sy;
                    total += ax * b.get(iy, jy) * self.gibbs.get(other, state);
                }
            }
        }
        Ok(total.re / self.z)
    }

    /// `<A_x>`, real part.
    pub fn one_point(&self, a: &SiteMatrix, x: usize) -> Result<f64> {
        let d = self.space.local_dim();
        a.expect_dim(d)?;
        let sx = self.space.stride(x);
        let mut total = Complex64::new(0.0, 0.0);
        for state in 0..self.space.dim() {
            let ix = self.space.local_index(state, x);
            let rest = state - ix * sx;
            for jx in 0..d {
                total += a.get(ix, jx) * self.gibbs.get(rest + jx * sx, state);
            }
        }
        Ok(total.re / self.z)
    }

    /// `<A_x B_y> - <A_x><B_y>`.
    pub fn truncated_two_point(&self, a: &SiteMatrix, x: usize, b: &SiteMatrix, y: usize) -> Result<f64> {
        Ok(self.two_point(a, x, b, y)? - self.one_point(a, x)? * self.one_point(b, y)?)
    }
}

/// `Tr e^{-beta H}`.
pub fn partition_function(hamiltonian: &DenseOperator, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let eigen = symmetric_eigen(hamiltonian)?;
    Ok(eigen.values.iter().map(|l| (-beta * l).exp()).sum())
}

/// `Tr(A_x B_y e^{-beta H}) / Tr e^{-beta H}`.
pub fn thermal_two_point(
    space: SpinSpace,
    hamiltonian: &DenseOperator,
    a: &SiteMatrix,
    x: usize,
    b: &SiteMatrix,
    y: usize,
    beta: f64,
) -> Result<f64> {
    Thermal::new(space, hamiltonian, beta)?.two_point(a, x, b, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Graph;
    use crate::oracle::hamiltonian::{hamiltonian, Family};
    use crate::oracle::spin::{spin_component, spin_z};

    #[test]
    fn closed_form_partition_functions() {
        let g = Graph::chain(2, false).unwrap();
        let ferro = hamiltonian(&g, 1, 1.0, &[0.0; 2], Family::Q).unwrap();
        let z = partition_function(&ferro, 1.0).unwrap();
        assert!((z - (3.0 + (-2f64).exp())).abs() < 1e-12);
        assert!((z - 3.13534).abs() < 5e-6);
        let q = hamiltonian(&g, 1, 0.0, &[0.0; 2], Family::Q).unwrap();
        let z = partition_function(&q, 1.0).unwrap();
        assert!((z - (1f64.exp() + 3.0 * (-1f64).exp())).abs() < 1e-12);
        assert!((z - 3.82192).abs() < 5e-6);
    }

    #[test]
    fn two_site_q_correlation() {
        let g = Graph::chain(2, false).unwrap();
        let space = SpinSpace::new(2, 1).unwrap();
        let h = hamiltonian(&g, 1, 0.0, &[0.0; 2], Family::Q).unwrap();
        for beta in [0.5, 1.0, 2.0] {
            let th = Thermal::new(space, &h, beta).unwrap();
            let (e, em) = (f64::exp(beta), f64::exp(-beta));
            let want = 0.25 * (e - em) / (e + 3.0 * em);
            let sz = spin_z(1);
            assert!((th.two_point(&sz, 0, &sz, 1).unwrap() - want).abs() < 1e-12);
            let sx = spin_component(1, 1);
            assert!((th.two_point(&sx, 0, &sx, 1).unwrap() - want).abs() < 1e-12);
            let sy = spin_component(1, 2);
            assert!((th.two_point(&sy, 0, &sy, 1).unwrap() + want).abs() < 1e-12);
        }
    }

    #[test]
    fn one_point_is_normalized_trace_at_zero_field() {
        let g = Graph::chain(3, true).unwrap();
        let space = SpinSpace::new(3, 2).unwrap();
        let h = hamiltonian(&g, 2, 0.3, &[0.0; 3], Family::P).unwrap();
        let th = Thermal::new(space, &h, 1.2).unwrap();
        let sz = spin_z(2);
        let sz2 = sz.mul(&sz).unwrap();
        assert!((th.one_point(&sz2, 1).unwrap() - 2.0 / 3.0).abs() < 1e-9);
        assert!(th.one_point(&sz, 0).unwrap().abs() < 1e-9);
        assert!(th.partition_function() > 0.0);
    }

    #[test]
    fn rejects_mismatched_input() {
        let g = Graph::chain(2, false).unwrap();
        let h = hamiltonian(&g, 1, 0.5, &[0.0; 2], Family::Q).unwrap();
        let space = SpinSpace::new(3, 1).unwrap();
        assert!(Thermal::new(space, &h, 1.0).is_err());
        let space = SpinSpace::new(2, 1).unwrap();
        assert!(Thermal::new(space, &h, 0.0).is_err());
        let th = Thermal::new(space, &h, 1.0).unwrap();
        assert!(th.two_point(&spin_z(2), 0, &spin_z(2), 1).is_err());
    }
}
