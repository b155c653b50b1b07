//! Dense linear algebra over `F_q`.
//!
//! Matrices here are at most a few hundred rows and columns, so everything is
//! a flat row-major `Vec` and Gaussian elimination uses the plain
//! first-nonzero pivot rule. Results are bit-reproducible.

use std::fmt;

use crate::error::{Error, Result};
use crate::gf::{FieldElement, PrimeField};

#[derive(Clone, PartialEq, Eq)]
pub struct FqMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl fmt::Debug for FqMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FqMatrix {}x{} over F_{}", self.rows, self.cols, self.field.q())?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

impl FqMatrix {
    pub fn zeros(field: &PrimeField, rows: usize, cols: usize) -> Self {
        FqMatrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![FieldElement::ZERO; rows * cols],
        }
    }

    pub fn identity(field: &PrimeField, size: usize) -> Self {
        let mut m = Self::zeros(field, size, size);
        for i in 0..size {
            m.set(i, i, field.one());
        }
        m
    }

    /// Builds a matrix from integer rows, reducing every entry mod `q`.
    pub fn from_rows(field: &PrimeField, rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(field, rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, field.elem(v));
            }
        }
        Ok(m)
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.data[r * self.cols + c] = v;
    }

    /// Adds `v` to entry `(r, c)`.
    pub fn add_at(&mut self, r: usize, c: usize, v: FieldElement) {
        let idx = r * self.cols + c;
        self.data[idx] = self.field.add(self.data[idx], v);
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [FieldElement] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    /// Number of nonzero entries in row `r`.
    pub fn row_weight(&self, r: usize) -> usize {
        self.row(r).iter().filter(|v| !v.is_zero()).count()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn scaled(&self, c: FieldElement) -> Self {
        let mut out = self.clone();
        self.field.scale_slice(&mut out.data, c);
        out
    }

    pub fn neg(&self) -> Self {
        self.scaled(self.field.elem(-1))
    }

    /// `[self | rhs]`.
    pub fn hstack(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: rhs.rows,
            });
        }
        let mut out = Self::zeros(&self.field, self.rows, self.cols + rhs.cols);
        for r in 0..self.rows {
            let row = out.row_mut(r);
            row[..self.cols].copy_from_slice(self.row(r));
            row[self.cols..].copy_from_slice(rhs.row(r));
        }
        Ok(out)
    }

    /// `[self; rhs]`.
    pub fn vstack(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: rhs.cols,
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&rhs.data);
        Ok(FqMatrix {
            field: self.field.clone(),
            rows: self.rows + rhs.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                got: rhs.rows * rhs.cols,
            });
        }
        let mut out = self.clone();
        self.field.axpy(&mut out.data, &rhs.data, self.field.one());
        Ok(out)
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: rhs.rows,
            });
        }
        let mut out = Self::zeros(&self.field, self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                let (dst, src) = (r * rhs.cols, k * rhs.cols);
                self.field
                    .axpy(&mut out.data[dst..dst + rhs.cols], &rhs.data[src..src + rhs.cols], a);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows).map(|r| dot(&self.field, self.row(r), v)).collect())
    }

    /// Swaps rows `a` and `b`.
    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * self.cols);
        head[lo * self.cols..(lo + 1) * self.cols].swap_with_slice(&mut tail[..self.cols]);
    }

    /// `row[dst] += c * row[src]` restricted to columns `from..`.
    pub(crate) fn row_axpy(&mut self, dst: usize, src: usize, c: FieldElement, from: usize) {
        debug_assert_ne!(dst, src);
        let cols = self.cols;
        let (d, s) = if dst < src {
            let (head, tail) = self.data.split_at_mut(src * cols);
            (&mut head[dst * cols..(dst + 1) * cols], &tail[..cols])
        } else {
            let (head, tail) = self.data.split_at_mut(dst * cols);
            (&mut tail[..cols], &head[src * cols..(src + 1) * cols])
        };
        self.field.axpy(&mut d[from..], &s[from..], c);
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Reduced row echelon form. Pivots are the first nonzero entry found
    /// scanning columns left to right and rows top to bottom, scaled to 1.
    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let pivots = m.reduce_in_place(usize::MAX);
        let rank = pivots.len();
        Rref {
            reduced: m,
            pivots,
            rank,
        }
    }

    /// Gauss-Jordan elimination in place, stopping after `max_rank` pivots.
    /// Returns the pivot columns; pivot `i` sits in row `i`.
    pub(crate) fn reduce_in_place(&mut self, max_rank: usize) -> Vec<usize> {
        let field = self.field.clone();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows || rank == max_rank {
                break;
            }
            let Some(p) = (rank..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            self.swap_rows(rank, p);
            let inv = field.inv(self.get(rank, col)).expect("pivot is nonzero");
            field.scale_slice(&mut self.row_mut(rank)[col..], inv);
            for r in 0..self.rows {
                if r == rank {
                    continue;
                }
                let c = self.get(r, col);
                if !c.is_zero() {
                    // pivot row is zero left of `col`
                    self.row_axpy(r, rank, field.neg(c), col);
                }
            }
            pivots.push(col);
            rank += 1;
        }
        pivots
    }

    /// Basis of the right null space `{v : M v = 0}`.
    pub fn kernel_basis(&self) -> Vec<Vec<FieldElement>> {
        let rref = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &rref.pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![FieldElement::ZERO; self.cols];
                v[free] = self.field.one();
                for (i, &p) in rref.pivots.iter().enumerate() {
                    v[p] = self.field.neg(rref.reduced.get(i, free));
                }
                v
            })
            .collect()
    }

    /// Matrix whose rows are the given vectors.
    pub fn from_vectors(field: &PrimeField, cols: usize, vectors: &[Vec<FieldElement>]) -> Result<Self> {
        let mut m = Self::zeros(field, vectors.len(), cols);
        for (r, v) in vectors.iter().enumerate() {
            if v.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: v.len(),
                });
            }
            m.row_mut(r).copy_from_slice(v);
        }
        Ok(m)
    }
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug)]
pub struct Rref {
    pub reduced: FqMatrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

impl Rref {
    /// Reduces `v` against the pivot rows, returning the remainder.
    pub fn reduce(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>> {
        let m = &self.reduced;
        if v.len() != m.cols {
            return Err(Error::DimensionMismatch {
                expected: m.cols,
                got: v.len(),
            });
        }
        let field = m.field();
        let mut rem = v.to_vec();
        for (i, &p) in self.pivots.iter().enumerate() {
            let c = rem[p];
            if !c.is_zero() {
                field.axpy(&mut rem, m.row(i), field.neg(c));
            }
        }
        Ok(rem)
    }

    /// True iff `v` lies in the row space.
    pub fn in_rowspace(&self, v: &[FieldElement]) -> Result<bool> {
        Ok(self.reduce(v)?.iter().all(|x| x.is_zero()))
    }
}

pub fn in_rowspace(v: &[FieldElement], rref: &Rref) -> Result<bool> {
    rref.in_rowspace(v)
}

pub fn dot(field: &PrimeField, a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
    let q = field.q() as u64;
    let mut acc = 0u64;
    for (x, y) in a.iter().zip(b) {
        acc += x.value() as u64 * y.value() as u64;
        // at most 2^32 per term; reduce well before u64 overflow
        if acc >= 1 << 62 {
            acc %= q;
        }
    }
    field.elem((acc % q) as i64)
}

pub fn weight(v: &[FieldElement]) -> usize {
    v.iter().filter(|x| !x.is_zero()).count()
}
