//! Single-site operators on `C^(2S+1)` in the `S^3` eigenbasis, ordered
//! `a = -S, ..., S`.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SiteMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl SiteMatrix {
    pub fn zeros(dim: usize) -> SiteMatrix {
        SiteMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> SiteMatrix {
        let mut m = SiteMatrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Row-major real entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<SiteMatrix> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(SiteMatrix {
            dim,
            data: entries.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        })
    }

    pub fn from_complex(dim: usize, entries: Vec<Complex64>) -> Result<SiteMatrix> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(SiteMatrix { dim, data: entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.data[row * self.dim + col] = v;
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn transpose(&self) -> SiteMatrix {
        let mut t = SiteMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &SiteMatrix) -> Result<SiteMatrix> {
        self.same_dim(other)?;
        let n = self.dim;
        let mut out = SiteMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> SiteMatrix {
        SiteMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &SiteMatrix) -> Result<SiteMatrix> {
        self.same_dim(other)?;
        Ok(SiteMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub(crate) fn same_dim(&self, other: &SiteMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub(crate) fn expect_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim,
            });
        }
        Ok(())
    }
}

/// Spin value `a` of basis index `i`, as `2a`.
pub fn twice_value(two_s: u32, i: usize) -> i64 {
    2 * i as i64 - i64::from(two_s)
}

/// `S^3 = diag(-S, ..., S)`.
pub fn spin_z(two_s: u32) -> SiteMatrix {
    let d = two_s as usize + 1;
    let mut m = SiteMatrix::zeros(d);
    for i in 0..d {
        m.set(i, i, Complex64::new(twice_value(two_s, i) as f64 / 2.0, 0.0));
    }
    m
}

/// `S^+ |a> = sqrt(S(S+1) - a(a+1)) |a+1>`.
pub fn spin_raise(two_s: u32) -> SiteMatrix {
    let d = two_s as usize + 1;
    let s = f64::from(two_s) / 2.0;
    let mut m = SiteMatrix::zeros(d);
    for i in 0..d - 1 {
        let a = twice_value(two_s, i) as f64 / 2.0;
        m.set(i + 1, i, Complex64::new((s * (s + 1.0) - a * (a + 1.0)).sqrt(), 0.0));
    }
    m
}

/// `S^1 = (S^+ + S^-) / 2`.
pub fn spin_x(two_s: u32) -> SiteMatrix {
    let up = spin_raise(two_s);
    up.add(&up.transpose()).expect("same dim").scaled(0.5)
}

/// `S^2 = (S^+ - S^-) / 2i`.
pub fn spin_y(two_s: u32) -> SiteMatrix {
    let up = spin_raise(two_s);
    let down = up.transpose();
    let diff = up.add(&down.scaled(-1.0)).expect("same dim");
    let factor = Complex64::new(0.0, -0.5);
    SiteMatrix {
        dim: diff.dim,
        data: diff.data.iter().map(|v| v * factor).collect(),
    }
}

/// Spin component `i in {1, 2, 3}`.
pub fn spin_component(two_s: u32, i: usize) -> SiteMatrix {
    match i {
        1 => spin_x(two_s),
        2 => spin_y(two_s),
        3 => spin_z(two_s),
        _ => panic!("spin component must be 1, 2 or 3, got {i}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &SiteMatrix, b: &SiteMatrix) -> bool {
        a.data.iter().zip(&b.data).all(|(x, y)| (x - y).norm() < 1e-13)
    }

    #[test]
    fn commutation_relations() {
        for two_s in 1..=4 {
            let (x, y, z) = (spin_x(two_s), spin_y(two_s), spin_z(two_s));
            let xy = x.mul(&y).unwrap();
            let yx = y.mul(&x).unwrap();
            let comm = xy.add(&yx.scaled(-1.0)).unwrap();
            let iz = SiteMatrix {
                dim: z.dim,
                data: z.data.iter().map(|v| v * Complex64::new(0.0, 1.0)).collect(),
            };
            assert!(close(&comm, &iz), "2S = {two_s}");
        }
    }

    #[test]
    fn casimir() {
        for two_s in 1..=4u32 {
            let s = f64::from(two_s) / 2.0;
            let mut total = SiteMatrix::zeros(two_s as usize + 1);
            for i in 1..=3 {
                let c = spin_component(two_s, i);
                total = total.add(&c.mul(&c).unwrap()).unwrap();
            }
            let want = SiteMatrix::identity(two_s as usize + 1).scaled(s * (s + 1.0));
            assert!(close(&total, &want));
        }
    }

    #[test]
    fn transpose_of_sy_flips_sign() {
        let y = spin_y(1);
        assert!(close(&y.transpose(), &y.scaled(-1.0)));
        assert_eq!(spin_z(2).trace(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn dimension_errors() {
        assert!(SiteMatrix::from_real(2, &[1.0, 0.0, 0.0]).is_err());
        assert!(spin_z(1).mul(&spin_z(2)).is_err());
    }
}
