//! Dense matrices over a [`Scalar`], with Gaussian elimination that is valid
//! over division rings: row operations only ever multiply rows on the left,
//! and solution vectors are read as right linear combinations of columns.

use std::fmt;

use crate::poly::Poly;
use crate::scalar::{Rat, Scalar};

#[derive(Clone, PartialEq)]
pub struct Mat<T: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

/// Row-echelon data produced by [`Mat::echelon`].
struct Echelon<T: Scalar> {
    reduced: Mat<T>,
    pivots: Vec<usize>,
}

impl<T: Scalar> Mat<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn zeros(rows: usize, cols: usize, ctx: &T) -> Self {
        Mat {
            rows,
            cols,
            data: vec![ctx.zero_like(); rows * cols],
        }
    }

    pub fn identity(n: usize, ctx: &T) -> Self {
        Self::scalar(n, &ctx.one_like())
    }

    pub fn scalar(n: usize, s: &T) -> Self {
        let mut m = Self::zeros(n, n, s);
        for i in 0..n {
            m.set(i, i, s.clone());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn row(&self, r: usize) -> Vec<T> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn col(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r)).collect()
    }

    pub fn from_cols(cols: &[Vec<T>], ctx: &T) -> Self {
        let n = cols.first().map_or(0, |c| c.len());
        let mut m = Self::zeros(n, cols.len(), ctx);
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    /// Any entry, used as a context for building neutral elements. Panics on
    /// an empty matrix.
    pub fn ctx(&self) -> &T {
        &self.data[0]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.add_ref(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.sub_ref(b))
                .collect(),
        }
    }

    /// `s·self`, with `s` multiplying every entry on the left.
    pub fn scale_left(&self, s: &T) -> Self {
        self.map(|x| s.mul_ref(x))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix shape mismatch in product");
        if self.rows == 0 || other.cols == 0 {
            return Mat {
                rows: self.rows,
                cols: other.cols,
                data: Vec::new(),
            };
        }
        let z = if self.data.is_empty() {
            other.ctx().zero_like()
        } else {
            self.ctx().zero_like()
        };
        let mut out = Self::zeros(self.rows, other.cols, &z);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(i, j).add_ref(&a.mul_ref(b));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = self.ctx().zero_like();
                for (k, x) in v.iter().enumerate() {
                    acc = acc.add_ref(&self.get(i, k).mul_ref(x));
                }
                acc
            })
            .collect()
    }

    pub fn pow(&self, e: u64) -> Self {
        assert!(self.is_square());
        let mut result = Self::identity(self.rows, self.ctx());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Evaluates a polynomial with central coefficients at this matrix.
    pub fn eval_poly(&self, p: &Poly<T>) -> Self {
        let n = self.rows;
        let mut acc = Self::zeros(n, n, self.ctx());
        for c in p.coeffs().iter().rev() {
            acc = acc.mul(self).add(&Self::scalar(n, c));
        }
        acc
    }

    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        Self::from_fn(r1 - r0, c1 - c0, |r, c| self.get(r0 + r, c0 + c).clone())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Mat::from_rows(idx.iter().map(|&i| self.row(i)).collect())
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |r, c| self.get(r, idx[c]).clone())
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self.get(r, c).clone()
            } else {
                other.get(r, c - self.cols).clone()
            }
        })
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Mat {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn block_diag(blocks: &[Self], ctx: &T) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(n, m, ctx);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for r in 0..b.rows {
                for c in 0..b.cols {
                    out.set(r0 + r, c0 + c, b.get(r, c).clone());
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    fn echelon(&self) -> Echelon<T> {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for c in 0..m.cols {
                    m.data.swap(p * m.cols + c, row * m.cols + c);
                }
            }
            let inv = m.get(row, col).inv_ref().expect("nonzero pivot is invertible");
            for c in 0..m.cols {
                let v = inv.mul_ref(m.get(row, c));
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let f = m.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for c in 0..m.cols {
                    let v = m.get(r, c).sub_ref(&f.mul_ref(m.get(row, c)));
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        Echelon { reduced: m, pivots }
    }

    pub fn rank(&self) -> usize {
        if self.data.is_empty() {
            return 0;
        }
        self.echelon().pivots.len()
    }

    /// Indices of columns forming a basis of the (right) column span.
    pub fn pivot_columns(&self) -> Vec<usize> {
        if self.data.is_empty() {
            return Vec::new();
        }
        self.echelon().pivots
    }

    /// Basis of `{x : self·x = 0}` as a right module.
    pub fn kernel(&self) -> Vec<Vec<T>> {
        if self.cols == 0 {
            return Vec::new();
        }
        if self.rows == 0 {
            return (0..self.cols)
                .map(|i| {
                    let mut v = vec![self.ctx_or_panic().zero_like(); self.cols];
                    v[i] = v[i].one_like();
                    v
                })
                .collect();
        }
        let e = self.echelon();
        let z = self.ctx().zero_like();
        let free: Vec<usize> = (0..self.cols).filter(|c| !e.pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![z.clone(); self.cols];
                v[f] = z.one_like();
                for (r, &pc) in e.pivots.iter().enumerate() {
                    v[pc] = e.reduced.get(r, f).neg_ref();
                }
                v
            })
            .collect()
    }

    fn ctx_or_panic(&self) -> &T {
        self.data.first().expect("context needed for empty matrix")
    }

    /// Some `x` with `self·x = b`, or `None` when inconsistent.
    pub fn solve_right(&self, b: &[T]) -> Option<Vec<T>> {
        assert_eq!(b.len(), self.rows);
        if self.cols == 0 {
            return b.iter().all(|x| x.is_zero()).then(Vec::new);
        }
        let z = self.ctx().zero_like();
        let bcol = Mat::from_cols(&[b.to_vec()], &z);
        let aug = self.hstack(&bcol);
        let e = aug.echelon();
        if e.pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![z.clone(); self.cols];
        for (r, &pc) in e.pivots.iter().enumerate() {
            x[pc] = e.reduced.get(r, self.cols).clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return Some(self.clone());
        }
        let aug = self.hstack(&Self::identity(n, self.ctx()));
        let e = aug.echelon();
        if e.pivots.len() < n || e.pivots[n - 1] != n - 1 {
            return None;
        }
        Some(e.reduced.submatrix(0, n, n, 2 * n))
    }

    /// Extends a set of independent columns to a basis with unit vectors;
    /// returns the indices of the unit vectors appended.
    pub fn complete_with_units(&self) -> Vec<usize> {
        let mut cur = self.clone();
        let mut added = Vec::new();
        let z = self.ctx_or_panic().zero_like();
        for i in 0..self.rows {
            let mut e = vec![z.clone(); self.rows];
            e[i] = z.one_like();
            let cand = cur.hstack(&Mat::from_cols(&[e], &z));
            if cand.rank() > cur.rank() {
                cur = cand;
                added.push(i);
            }
        }
        added
    }
}

pub type QMat = Mat<Rat>;

pub fn qmat(rows: &[&[i64]]) -> QMat {
    Mat::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&x| crate::scalar::rat(x)).collect())
            .collect(),
    )
}

/// Minimal polynomial over ℚ of a square rational matrix, by Krylov
/// iteration on matrix powers.
pub fn min_poly_q(a: &QMat) -> Poly<Rat> {
    let zero = crate::scalar::rat(0);
    krylov_min_poly(a, &zero, |vecs, target| {
        let m = Mat::from_cols(vecs, &zero);
        m.solve_right(target)
    })
}

/// Generic Krylov minimal polynomial: `solve(columns, target)` must return
/// central coefficients expressing `target` in terms of `columns`.
pub fn krylov_min_poly<T: Scalar>(
    a: &Mat<T>,
    zero: &T,
    solve: impl Fn(&[Vec<T>], &[T]) -> Option<Vec<T>>,
) -> Poly<T> {
    let n = a.rows();
    if n == 0 {
        return Poly::one(zero);
    }
    let flat = |m: &Mat<T>| m.entries().cloned().collect::<Vec<T>>();
    let mut powers = vec![flat(&Mat::identity(n, zero))];
    let mut cur = Mat::identity(n, zero);
    for k in 1..=n * n + 1 {
        cur = cur.mul(a);
        let v = flat(&cur);
        if let Some(c) = solve(&powers, &v) {
            let mut coeffs: Vec<T> = c.iter().map(|x| x.neg_ref()).collect();
            coeffs.push(zero.one_like());
            debug_assert_eq!(coeffs.len(), k + 1);
            return Poly::new(coeffs, zero);
        }
        powers.push(v);
    }
    unreachable!("Krylov sequence must become dependent")
}
