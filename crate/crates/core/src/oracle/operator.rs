//! Dense real operators on `(C^(2S+1))^(x |Lambda|)` and the two-site
//! operators `T`, `P`, `Q`.
//!
//! Basis states `|sigma>` are ordered lexicographically in
//! `sigma in {-S..S}^Lambda` with site 0 the slowest index.

use serde::{Deserialize, Serialize};

use super::spin::{twice_value, SiteMatrix};
use crate::error::{Error, Result};

pub const DEFAULT_DIM_CAP: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    data: Vec<f64>,
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> DenseOperator {
        DenseOperator {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> DenseOperator {
        let mut m = DenseOperator::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_rows(dim: usize, data: Vec<f64>) -> Result<DenseOperator> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(DenseOperator { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.dim + col] = v;
    }

    #[inline]
    pub(crate) fn add_at(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.dim + col] += v;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn mul(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.check_same(other)?;
        let n = self.dim;
        let mut out = DenseOperator::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let (dst, src) = (&mut out.data[i * n..(i + 1) * n], &other.data[k * n..(k + 1) * n]);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &DenseOperator, c: f64) -> Result<DenseOperator> {
        self.check_same(other)?;
        Ok(DenseOperator {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + c * b).collect(),
        })
    }

    pub fn scaled(&self, c: f64) -> DenseOperator {
        DenseOperator {
            dim: self.dim,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn transpose(&self) -> DenseOperator {
        let n = self.dim;
        let mut t = DenseOperator::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.data[j * n + i] = self.data[i * n + j];
            }
        }
        t
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn check_symmetric(&self, tol: f64) -> Result<()> {
        let a = self.asymmetry();
        if a > tol {
            Err(Error::NotSymmetric(a))
        } else {
            Ok(())
        }
    }

    fn check_same(&self, other: &DenseOperator) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

/// Tensor-product space of `n_sites` spins `S = two_s / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinSpace {
    n_sites: usize,
    two_s: u32,
    local: usize,
    dim: usize,
}

impl SpinSpace {
    pub fn new(n_sites: usize, two_s: u32) -> Result<SpinSpace> {
        SpinSpace::with_cap(n_sites, two_s, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(n_sites: usize, two_s: u32, cap: usize) -> Result<SpinSpace> {
        let local = two_s as usize + 1;
        let mut dim = 1usize;
        for _ in 0..n_sites {
            dim = dim.saturating_mul(local);
            if dim > cap {
                return Err(Error::DimensionCap { dim, cap });
            }
        }
        Ok(SpinSpace {
            n_sites,
            two_s,
            local,
            dim,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn two_s(&self) -> u32 {
        self.two_s
    }

    /// `2S + 1`.
    pub fn local_dim(&self) -> usize {
        self.local
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn stride(&self, site: usize) -> usize {
        self.local.pow((self.n_sites - 1 - site) as u32)
    }

    /// Local basis index of `site` in basis state `state`.
    #[inline]
    pub fn local_index(&self, state: usize, site: usize) -> usize {
        (state / self.stride(site)) % self.local
    }

    /// Spin configuration of a basis state, as `2 sigma_x`.
    pub fn configuration(&self, state: usize) -> Vec<i64> {
        (0..self.n_sites)
            .map(|x| twice_value(self.two_s, self.local_index(state, x)))
            .collect()
    }

    fn check_sites(&self, x: usize, y: usize) -> Result<()> {
        if x == y {
            return Err(Error::SameSite(x));
        }
        if x >= self.n_sites || y >= self.n_sites {
            return Err(Error::InvalidParameter {
                name: "site",
                reason: format!("({x}, {y}) out of range for {} sites", self.n_sites),
            });
        }
        Ok(())
    }

    /// Adds `coeff * local_{xy}` to `op`, where `local` acts on
    /// `C^(2S+1) (x) C^(2S+1)` with pair index `i_x (2S+1) + i_y`.
    pub fn add_pair(&self, op: &mut DenseOperator, local: &DenseOperator, x: usize, y: usize, coeff: f64) -> Result<()> {
        self.check_sites(x, y)?;
        let d = self.local;
        if local.dim() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: local.dim(),
            });
        }
        let (sx, sy) = (self.stride(x), self.stride(y));
        for state in 0..self.dim {
            let (ix, iy) = (self.local_index(state, x), self.local_index(state, y));
            let rest = state - ix * sx - iy * sy;
            let row = ix * d + iy;
            for jx in 0..d {
                for jy in 0..d {
                    let v = local.get(row, jx * d + jy);
                    if v != 0.0 {
                        op.add_at(state, rest + jx * sx + jy * sy, coeff * v);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn embed_pair(&self, local: &DenseOperator, x: usize, y: usize) -> Result<DenseOperator> {
        let mut op = DenseOperator::zeros(self.dim);
        self.add_pair(&mut op, local, x, y, 1.0)?;
        Ok(op)
    }

    /// `m <- local_{xy} m`.
    pub fn apply_pair_left(&self, m: &mut DenseOperator, local: &DenseOperator, x: usize, y: usize) -> Result<()> {
        let op = self.embed_pair(local, x, y)?;
        *m = op.mul(m)?;
        Ok(())
    }

    /// Diagonal operator `sum_x h_x S^3_x`.
    pub fn field_operator(&self, h: &[f64]) -> Result<DenseOperator> {
        if h.len() != self.n_sites {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites,
                found: h.len(),
            });
        }
        let mut op = DenseOperator::zeros(self.dim);
        for state in 0..self.dim {
            let m: f64 = (0..self.n_sites)
                .map(|x| h[x] * twice_value(self.two_s, self.local_index(state, x)) as f64 / 2.0)
                .sum();
            op.set(state, state, m);
        }
        Ok(op)
    }

    /// `A_x B_y` as a real operator; fails when the product has an imaginary
    /// part. With `x == y` the product `(AB)_x` is embedded.
    pub fn embed_product(&self, a: &SiteMatrix, x: usize, b: &SiteMatrix, y: usize) -> Result<DenseOperator> {
        a.expect_dim(self.local)?;
        b.expect_dim(self.local)?;
        if x == y {
            let ab = a.mul(b)?;
            return self.embed_site(&ab, x);
        }
        self.check_sites(x, y)?;
        let d = self.local;
        let (sx, sy) = (self.stride(x), self.stride(y));
        let mut op = DenseOperator::zeros(self.dim);
        let mut worst_imag = 0.0f64;
        for state in 0..self.dim {
            let (ix, iy) = (self.local_index(state, x), self.local_index(state, y));
            let rest = state - ix * sx - iy * sy;
            for jx in 0..d {
                for jy in 0..d {
                    let v = a.get(ix, jx) * b.get(iy, jy);
                    worst_imag = worst_imag.max(v.im.abs());
                    if v.re != 0.0 {
                        op.set(state, rest + jx * sx + jy * sy, v.re);
                    }
                }
            }
        }
        if worst_imag > 1e-12 {
            return Err(Error::NotReal(worst_imag));
        }
        Ok(op)
    }

    /// `A_x` as a real operator.
    pub fn embed_site(&self, a: &SiteMatrix, x: usize) -> Result<DenseOperator> {
        a.expect_dim(self.local)?;
        if x >= self.n_sites {
            return Err(Error::InvalidParameter {
                name: "site",
                reason: format!("{x} out of range for {} sites", self.n_sites),
            });
        }
        let d = self.local;
        let sx = self.stride(x);
        let mut op = DenseOperator::zeros(self.dim);
        let mut worst_imag = 0.0f64;
        for state in 0..self.dim {
            let ix = self.local_index(state, x);
            let rest = state - ix * sx;
            for jx in 0..d {
                let v = a.get(ix, jx);
                worst_imag = worst_imag.max(v.im.abs());
                if v.re != 0.0 {
                    op.set(state, rest + jx * sx, v.re);
                }
            }
        }
        if worst_imag > 1e-12 {
            return Err(Error::NotReal(worst_imag));
        }
        Ok(op)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairKind {
    /// Transposition `T|a,b> = |b,a>`.
    T,
    /// `<a,b|P|c,d> = (-1)^(a-c) delta_{a,-b} delta_{c,-d}`.
    P,
    /// `<a,b|Q|c,d> = delta_{a,b} delta_{c,d}`.
    Q,
}

/// The two-site operator of the given kind on `C^(2S+1) (x) C^(2S+1)`.
pub fn pair_operator(kind: PairKind, two_s: u32) -> DenseOperator {
    let d = two_s as usize + 1;
    let mut m = DenseOperator::zeros(d * d);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let v = match kind {
                        PairKind::T => f64::from(u8::from(a == e && b == c)),
                        PairKind::Q => f64::from(u8::from(a == b && c == e)),
                        PairKind::P => {
                            // index i has value i - S, so -a has index 2S - i
                            if b == d - 1 - a && e == d - 1 - c {
                                let diff = (twice_value(two_s, a) - twice_value(two_s, c)) / 2;
                                if diff % 2 == 0 {
                                    1.0
                                } else {
                                    -1.0
                                }
                            } else {
                                0.0
                            }
                        }
                    };
                    m.set(a * d + b, c * d + e, v);
                }
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::spin::spin_z;

    #[test]
    fn t_for_spin_half_swaps_middle_states() {
        let t = pair_operator(PairKind::T, 1);
        // basis |dd>, |du>, |ud>, |uu>
        let want = [
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ];
        assert_eq!(t.as_slice(), &want);
    }

    #[test]
    fn q_for_spin_half_connects_aligned_states() {
        let q = pair_operator(PairKind::Q, 1);
        let ones: Vec<(usize, usize)> = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .filter(|&(i, j)| q.get(i, j) != 0.0)
            .collect();
        assert_eq!(ones, vec![(0, 0), (0, 3), (3, 0), (3, 3)]);
        assert!(ones.iter().all(|&(i, j)| q.get(i, j) == 1.0));
    }

    #[test]
    fn algebraic_identities() {
        for two_s in 1..=4u32 {
            let theta = f64::from(two_s + 1);
            let t = pair_operator(PairKind::T, two_s);
            let p = pair_operator(PairKind::P, two_s);
            let q = pair_operator(PairKind::Q, two_s);
            let dim = t.dim();
            assert_eq!(t.mul(&t).unwrap(), DenseOperator::identity(dim));
            assert_eq!(p.mul(&p).unwrap(), p.scaled(theta));
            assert_eq!(q.mul(&q).unwrap(), q.scaled(theta));
            for m in [&t, &p, &q] {
                assert_eq!(m.asymmetry(), 0.0);
            }
        }
    }

    #[test]
    fn p_annihilates_nothing_but_the_singlet_direction() {
        // P / (2S+1) is the singlet projector: total S^3 of its range is 0
        let p = pair_operator(PairKind::P, 2);
        assert!((p.trace() - 3.0).abs() < 1e-15);
        let space = SpinSpace::new(2, 2).unwrap();
        let sz = spin_z(2);
        let total = space
            .embed_site(&sz, 0)
            .unwrap()
            .add_scaled(&space.embed_site(&sz, 1).unwrap(), 1.0)
            .unwrap();
        assert_eq!(total.mul(&p).unwrap().frobenius_norm(), 0.0);
    }

    #[test]
    fn embedding_respects_site_order() {
        let space = SpinSpace::new(3, 1).unwrap();
        assert_eq!(space.dim(), 8);
        assert_eq!(space.stride(0), 4);
        assert_eq!(space.configuration(1), vec![-1, -1, 1]);
        let t = pair_operator(PairKind::T, 1);
        let t02 = space.embed_pair(&t, 0, 2).unwrap();
        // |d d u> -> |u d d>
        assert_eq!(t02.get(4, 1), 1.0);
        assert!(space.embed_pair(&t, 1, 1).is_err());
        assert!(space.embed_pair(&t, 0, 3).is_err());
    }

    #[test]
    fn dimension_cap() {
        assert!(matches!(SpinSpace::with_cap(13, 1, 4096), Err(Error::DimensionCap { .. })));
        assert!(SpinSpace::with_cap(12, 1, 4096).is_ok());
    }
}
