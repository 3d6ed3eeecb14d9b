//! Dense matrices over a binary field, including the Cauchy coefficient
//! matrices used to mix subfiles inside a multicast message.

use super::field::{Field, Symbol};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct CoeffMatrix {
    field: &'static Field,
    rows: usize,
    cols: usize,
    data: Vec<Symbol>,
}

impl CoeffMatrix {
    pub fn zeros(field: &'static Field, rows: usize, cols: usize) -> Self {
        CoeffMatrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: &'static Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(field: &'static Field, rows: &[Vec<Symbol>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::InvalidParams("ragged matrix rows".into()));
            }
            if let Some(&bad) = r.iter().find(|&&x| !field.contains(x)) {
                return Err(Error::InvalidParams(format!(
                    "entry {bad} is not an element of {field:?}"
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(CoeffMatrix {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn field(&self) -> &'static Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Symbol {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Symbol) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Symbol] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Symbol>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut m = Self::zeros(self.field, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                m.set(r, j, self.get(r, c));
            }
        }
        m
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut m = Self::zeros(self.field, rows.len(), self.cols);
        for (i, &r) in rows.iter().enumerate() {
            m.data[i * self.cols..(i + 1) * self.cols].copy_from_slice(self.row(r));
        }
        m
    }

    pub fn mul(&self, other: &CoeffMatrix) -> Result<CoeffMatrix> {
        if self.cols != other.rows || self.field != other.field {
            return Err(Error::InvalidParams("matrix shapes do not conform".into()));
        }
        let mut out = Self::zeros(self.field, self.rows, other.cols);
        for r in 0..self.rows {
            let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for k in 0..self.cols {
                self.field.mul_acc(dst, other.row(k), self.get(r, k));
            }
        }
        Ok(out)
    }

    /// Row `r` applied to a list of equal-length symbol blocks:
    /// `sum_c self[r][c] * blocks[c]`.
    pub fn combine_row(&self, r: usize, blocks: &[&[Symbol]]) -> Vec<Symbol> {
        assert_eq!(blocks.len(), self.cols, "one block per column");
        let len = blocks.first().map_or(0, |b| b.len());
        let mut acc = vec![0; len];
        for (c, block) in blocks.iter().enumerate() {
            self.field.mul_acc(&mut acc, block, self.get(r, c));
        }
        acc
    }

    pub fn determinant(&self) -> Result<Symbol> {
        if self.rows != self.cols {
            return Err(Error::InvalidParams("determinant of a non-square matrix".into()));
        }
        let f = self.field;
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det: Symbol = 1;
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| a[r * n + col] != 0) else {
                return Ok(0);
            };
            if p != col {
                // row swaps only flip sign, which is a no-op in characteristic two
                for c in 0..n {
                    a.swap(p * n + c, col * n + c);
                }
            }
            let pivot = a[col * n + col];
            det = f.mul(det, pivot);
            let inv = f.inv(pivot)?;
            for r in col + 1..n {
                let factor = f.mul(a[r * n + col], inv);
                if factor != 0 {
                    for c in col..n {
                        a[r * n + c] ^= f.mul(factor, a[col * n + c]);
                    }
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<CoeffMatrix> {
        if self.rows != self.cols {
            return Err(Error::InvalidParams("inverse of a non-square matrix".into()));
        }
        let rhs = Self::identity(self.field, self.rows).to_rows();
        let x = solve(self, rhs)?;
        CoeffMatrix::from_rows(self.field, &x)
    }
}

impl std::fmt::Debug for CoeffMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CoeffMatrix {}x{} over {:?}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Solves `a * x = rhs` where `a` is m x u with m >= u and rank u, and each
/// right-hand side row is a block of symbols. Returns the u unknown blocks.
/// Surplus equations are eliminated but not checked for consistency.
pub fn solve(a: &CoeffMatrix, rhs: Vec<Vec<Symbol>>) -> Result<Vec<Vec<Symbol>>> {
    let f = a.field;
    let (m, u) = (a.rows, a.cols);
    if rhs.len() != m {
        return Err(Error::InvalidParams("one right-hand side per equation".into()));
    }
    if m < u {
        return Err(Error::Singular);
    }
    let mut coef: Vec<Vec<Symbol>> = a.to_rows();
    let mut rhs = rhs;
    for col in 0..u {
        let p = (col..m).find(|&r| coef[r][col] != 0).ok_or(Error::Singular)?;
        coef.swap(p, col);
        rhs.swap(p, col);
        let inv = f.inv(coef[col][col])?;
        f.scale(&mut coef[col], inv);
        f.scale(&mut rhs[col], inv);
        for r in 0..m {
            if r == col {
                continue;
            }
            let factor = coef[r][col];
            if factor != 0 {
                let (pivot_c, row_c) = pair_mut(&mut coef, col, r);
                f.mul_acc(row_c, pivot_c, factor);
                let (pivot_r, row_r) = pair_mut(&mut rhs, col, r);
                f.mul_acc(row_r, pivot_r, factor);
            }
        }
    }
    rhs.truncate(u);
    Ok(rhs)
}

fn pair_mut<T>(v: &mut [T], a: usize, b: usize) -> (&T, &mut T) {
    debug_assert_ne!(a, b);
    if a < b {
        let (lo, hi) = v.split_at_mut(b);
        (&lo[a], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(a);
        (&hi[0], &mut lo[b])
    }
}

/// Cauchy matrix with entries `1 / (x_i + y_j)` for `x_i = i`, `y_j = rows + j`,
/// with each column scaled so that the first row is all ones. Every square
/// submatrix is nonsingular.
pub(crate) fn cauchy(rows: usize, cols: usize, field: &'static Field) -> Result<CoeffMatrix> {
    let needed = rows + cols;
    if needed > field.order() {
        return Err(Error::FieldTooSmall {
            bits: field.bits(),
            order: field.order(),
            needed,
        });
    }
    let mut m = CoeffMatrix::zeros(field, rows, cols);
    if rows == 0 {
        return Ok(m);
    }
    for j in 0..cols {
        let y = (rows + j) as Symbol;
        let first = field.inv(y)?; // x_0 = 0
        let norm = field.inv(first)?;
        for i in 0..rows {
            let entry = field.inv((i as Symbol) ^ y)?;
            m.set(i, j, field.mul(entry, norm));
        }
    }
    Ok(m)
}

/// An `a x b` matrix in which every choice of `a` columns is invertible.
/// The first row is all ones, so a single-row matrix is a plain XOR.
pub fn make_coeff_matrix(a: usize, b: usize, field: &'static Field) -> Result<CoeffMatrix> {
    if a == 0 || a > b {
        return Err(Error::InvalidParams(format!(
            "coefficient matrix needs 1 <= rows <= cols, got {a} x {b}"
        )));
    }
    cauchy(a, b, field)
}
