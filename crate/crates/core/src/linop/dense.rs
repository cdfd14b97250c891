//! Small dense matrices over the rationals (fundamental representations,
//! Yang's R-matrix, weight blocks).

use std::fmt;

use crate::error::{Error, Result};
use crate::exactnum::Rat;

#[derive(Clone, PartialEq, Eq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Rat::one() } else { Rat::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Rat) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    /// Matrix unit `E_ij` (zero-based).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.set(i, j, Rat::one());
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn scale(&self, c: &Rat) -> Self {
        DenseMatrix {
            data: self.data.iter().map(|x| x * c).collect(),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(DenseMatrix {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(DenseMatrix {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
            ..self.clone()
        })
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Kronecker product; `(i1, i2)` maps to `i1 * rows(other) + i2`.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            self.get(i / other.rows, j / other.cols) * other.get(i % other.rows, j % other.cols)
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rat::is_zero)
    }

    pub fn first_nonzero(&self) -> Option<(usize, usize, Rat)> {
        self.data
            .iter()
            .position(|x| !x.is_zero())
            .map(|p| (p / self.cols, p % self.cols, self.data[p].clone()))
    }

    /// Scalar `c` if the matrix equals `c * I`.
    pub fn as_scalar(&self) -> Option<Rat> {
        if self.rows != self.cols {
            return None;
        }
        let c = if self.rows == 0 {
            Rat::zero()
        } else {
            self.get(0, 0).clone()
        };
        (*self == Self::identity(self.rows).scale(&c)).then_some(c)
    }

    /// Rank by exact Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..m.cols {
            let Some(p) = (rank..m.rows).find(|&r| !m.get(r, c).is_zero()) else {
                continue;
            };
            for j in 0..m.cols {
                m.data.swap(p * m.cols + j, rank * m.cols + j);
            }
            let inv = m.get(rank, c).recip().expect("pivot is nonzero");
            for r in 0..m.rows {
                if r == rank || m.get(r, c).is_zero() {
                    continue;
                }
                let f = m.get(r, c) * &inv;
                for j in c..m.cols {
                    let v = m.get(rank, j) * &f;
                    m.data[r * m.cols + j] -= &v;
                }
            }
            rank += 1;
        }
        rank
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Flip operator on `C^d ⊗ C^d`.
pub fn permutation(d: usize) -> DenseMatrix {
    DenseMatrix::from_fn(d * d, d * d, |i, j| {
        let (a, b) = (j / d, j % d);
        if i == b * d + a {
            Rat::one()
        } else {
            Rat::zero()
        }
    })
}

/// Place a two-site operator on sites `(s, t)` of `(C^d)^{⊗3}`, `s < t`.
pub fn embed_pair(r: &DenseMatrix, d: usize, sites: (usize, usize)) -> Result<DenseMatrix> {
    let id = DenseMatrix::identity(d);
    match sites {
        (1, 2) => Ok(r.kron(&id)),
        (2, 3) => Ok(id.kron(r)),
        (1, 3) => {
            let p23 = id.kron(&permutation(d));
            p23.mul(&r.kron(&id))?.mul(&p23)
        }
        _ => Err(Error::Config(format!("no site pair {sites:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_and_permutation() {
        let p = permutation(2);
        assert_eq!(p.mul(&p).unwrap(), DenseMatrix::identity(4));
        let a = DenseMatrix::unit(2, 0, 1);
        let b = DenseMatrix::unit(2, 1, 0);
        // P (a ⊗ b) P = b ⊗ a
        let lhs = p.mul(&a.kron(&b)).unwrap().mul(&p).unwrap();
        assert_eq!(lhs, b.kron(&a));
    }

    #[test]
    fn site_13_embedding() {
        let a = DenseMatrix::unit(2, 0, 1);
        let b = DenseMatrix::unit(2, 1, 1);
        let id = DenseMatrix::identity(2);
        let r13 = embed_pair(&a.kron(&b), 2, (1, 3)).unwrap();
        assert_eq!(r13, a.kron(&id).kron(&b));
    }

    #[test]
    fn rank_and_scalar() {
        let m = DenseMatrix::from_fn(3, 3, |i, j| Rat::from_int((i * 3 + j) as i64));
        assert_eq!(m.rank(), 2);
        assert_eq!(
            DenseMatrix::identity(3).scale(&Rat::new(2, 5)).as_scalar(),
            Some(Rat::new(2, 5))
        );
        assert_eq!(m.as_scalar(), None);
    }
}
