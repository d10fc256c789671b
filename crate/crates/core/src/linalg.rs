//! Exact linear algebra over a coefficient ring, pivoting on units only.
//!
//! Over ℚ and 𝔽_p every nonzero entry is a unit, so this is plain Gaussian
//! elimination. Over a graded field the homogeneous entries are units and
//! elimination goes through as long as a unit pivot is always available;
//! otherwise the routines report [`Error::UnsupportedCase`] rather than
//! guess.

use crate::error::{Error, Result};
use crate::rings::{CoeffRing, RingElem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    ring: CoeffRing,
    rows: usize,
    cols: usize,
    data: Vec<RingElem>,
}

impl Matrix {
    pub fn zero(ring: &CoeffRing, rows: usize, cols: usize) -> Self {
        Matrix {
            ring: ring.clone(),
            rows,
            cols,
            data: vec![RingElem::zero(); rows * cols],
        }
    }

    /// The matrix whose columns are `cols`, each of length `rows`.
    pub fn from_columns(ring: &CoeffRing, rows: usize, cols: &[Vec<RingElem>]) -> Self {
        let mut m = Self::zero(ring, rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length");
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &RingElem {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: RingElem) {
        self.data[i * self.cols + j] = x;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(RingElem::is_zero)
    }

    pub fn column(&self, j: usize) -> Vec<RingElem> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn select_columns(&self, js: &[usize]) -> Matrix {
        let cols: Vec<_> = js.iter().map(|&j| self.column(j)).collect();
        Self::from_columns(&self.ring, self.rows, &cols)
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows || self.ring != other.ring {
            return Err(Error::Invariant("matrix shapes do not match".into()));
        }
        let r = &self.ring;
        let mut out = Self::zero(r, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let s = r.add(out.get(i, j), &r.mul(a, b));
                        out.set(i, j, s);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self) -> Result<Vec<usize>> {
        let r = self.ring.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let found = (row..self.rows).find(|&i| r.is_unit(self.get(i, col)));
            let Some(p) = found else {
                if (row..self.rows).any(|i| !self.get(i, col).is_zero()) {
                    return Err(Error::UnsupportedCase(
                        "elimination needs a non-unit pivot".into(),
                    ));
                }
                continue;
            };
            for j in 0..self.cols {
                self.data.swap(p * self.cols + j, row * self.cols + j);
            }
            let inv = r.inverse(self.get(row, col))?;
            for j in 0..self.cols {
                let x = r.mul(self.get(row, j), &inv);
                self.set(row, j, x);
            }
            for i in 0..self.rows {
                let f = self.get(i, col).clone();
                if i == row || f.is_zero() {
                    continue;
                }
                for j in 0..self.cols {
                    let x = r.sub(self.get(i, j), &r.mul(&f, self.get(row, j)));
                    self.set(i, j, x);
                }
            }
            pivots.push(col);
            row += 1;
        }
        Ok(pivots)
    }

    pub fn rank(&self) -> Result<usize> {
        Ok(self.clone().rref()?.len())
    }

    /// A basis of the right kernel, one vector per free column.
    pub fn kernel(&self) -> Result<Vec<Vec<RingElem>>> {
        let r = &self.ring;
        let mut m = self.clone();
        let pivots = m.rref()?;
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|j| !pivots.contains(j)) {
            let mut v = vec![RingElem::zero(); self.cols];
            v[free] = r.one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = r.neg(m.get(row, free));
            }
            basis.push(v);
        }
        Ok(basis)
    }
}
