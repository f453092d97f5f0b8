//! Linear algebra over a division algebra: Jordan forms for a central
//! eigenvalue and splittings along coprime central polynomials.
//!
//! Vectors are columns in a right vector space; matrices act on the left and
//! elimination only multiplies rows on the left.

use crate::endo::{CenterField, EndoError};
use crate::matrix::Mat;
use crate::poly::Poly;
use crate::scalar::Scalar;

pub fn solve_right<T: Scalar>(a: &Mat<T>, b: &[T]) -> Option<Vec<T>> {
    a.solve_right(b)
}

/// Upper Jordan block with `alpha` on the diagonal and 1 above it.
pub fn jordan_block<T: Scalar>(alpha: &T, size: usize) -> Mat<T> {
    let mut j = Mat::scalar(size, alpha);
    for i in 0..size.saturating_sub(1) {
        j.set(i, i + 1, alpha.one_like());
    }
    j
}

#[derive(Clone, Debug)]
pub struct JordanSpec<T: Scalar> {
    pub eigenvalue: T,
    /// Block sizes, descending.
    pub blocks: Vec<usize>,
    /// `p_inv · A · p` is the Jordan matrix.
    pub p: Mat<T>,
    pub p_inv: Mat<T>,
}

impl<T: Scalar> JordanSpec<T> {
    pub fn jordan_matrix(&self) -> Mat<T> {
        let blocks: Vec<Mat<T>> = self.blocks.iter().map(|&s| jordan_block(&self.eigenvalue, s)).collect();
        Mat::block_diag(&blocks, &self.eigenvalue)
    }
}

fn span_rank<T: Scalar>(vecs: &[Vec<T>], zero: &T) -> usize {
    if vecs.is_empty() {
        return 0;
    }
    Mat::from_cols(vecs, zero).rank()
}

/// Jordan form of `a` when its minimal polynomial over the center is
/// `(x − α)^r` with α central.
pub fn jordan_form_central<T: CenterField>(a: &Mat<T>) -> Result<JordanSpec<T>, EndoError> {
    let mp = T::min_poly_over_center(a);
    let r = mp.deg();
    let ctx = a.ctx().clone();
    let alpha = mp
        .coeff(r - 1)
        .neg_ref()
        .mul_ref(&ctx.from_int_like(r as i64).inv_ref().unwrap());
    if Poly::linear_root(&alpha).pow(r) != mp {
        return Err(EndoError::PreconditionViolated(
            "minimal polynomial is not a power of a linear factor".into(),
        ));
    }
    if !alpha.is_central() {
        return Err(EndoError::PreconditionViolated("eigenvalue is not central".into()));
    }
    jordan_with_eigenvalue(a, &alpha)
}

/// Jordan form for a known central eigenvalue `alpha` with `a − alpha`
/// nilpotent.
pub fn jordan_with_eigenvalue<T: CenterField>(a: &Mat<T>, alpha: &T) -> Result<JordanSpec<T>, EndoError> {
    let n = a.rows();
    let zero = alpha.zero_like();
    let nil = a.sub(&Mat::scalar(n, alpha));
    let mut powers = vec![Mat::identity(n, &zero)];
    while !powers.last().unwrap().is_zero() {
        if powers.len() > n + 1 {
            return Err(EndoError::PreconditionViolated("a − α is not nilpotent".into()));
        }
        let next = powers.last().unwrap().mul(&nil);
        powers.push(next);
    }
    let r = powers.len() - 1;
    let kernels: Vec<Vec<Vec<T>>> = powers.iter().map(|m| m.kernel()).collect();
    let apply_pow = |k: usize, v: &Vec<T>| powers[k].mul_vec(v);
    let mut heads: Vec<(usize, Vec<T>)> = Vec::new();
    for j in (1..=r).rev() {
        let mut base: Vec<Vec<T>> = kernels[j - 1].clone();
        for (s, v) in &heads {
            base.push(apply_pow(s - j, v));
        }
        let mut rank = span_rank(&base, &zero);
        for w in &kernels[j] {
            base.push(w.clone());
            let nr = span_rank(&base, &zero);
            if nr > rank {
                rank = nr;
                heads.push((j, w.clone()));
            } else {
                base.pop();
            }
        }
    }
    let mut cols = Vec::with_capacity(n);
    let mut blocks = Vec::new();
    for (s, v) in &heads {
        for k in (0..*s).rev() {
            cols.push(apply_pow(k, v));
        }
        blocks.push(*s);
    }
    let p = Mat::from_cols(&cols, &zero);
    let p_inv = p
        .inverse()
        .ok_or_else(|| EndoError::PreconditionViolated("generalized eigenvectors are dependent".into()))?;
    let spec = JordanSpec { eigenvalue: alpha.clone(), blocks, p, p_inv };
    if spec.p_inv.mul(a).mul(&spec.p) != spec.jordan_matrix() {
        return Err(EndoError::PreconditionViolated("Jordan verification failed".into()));
    }
    Ok(spec)
}

/// Pivot-column basis of the column span.
pub fn column_basis<T: Scalar>(m: &Mat<T>) -> Vec<Vec<T>> {
    m.pivot_columns().into_iter().map(|c| m.col(c)).collect()
}

#[derive(Clone, Debug)]
pub struct CoprimeSplit<T: Scalar> {
    pub p: Mat<T>,
    pub p_inv: Mat<T>,
    pub a1: Mat<T>,
    pub a2: Mat<T>,
    /// Projector onto the kernel of `p1(A)`.
    pub e1: Mat<T>,
}

/// Splits `a` along `p1·p2 = minpoly(a)` with `gcd(p1, p2) = 1`, using the
/// central Bézout identity `s·p1 + t·p2 = 1`.
pub fn coprime_split<T: CenterField>(a: &Mat<T>, p1: &Poly<T>, p2: &Poly<T>) -> Result<CoprimeSplit<T>, EndoError> {
    let mp = T::min_poly_over_center(a);
    if p1.mul(p2).monic() != mp {
        return Err(EndoError::PreconditionViolated("p1·p2 is not the minimal polynomial".into()));
    }
    let (g, s, t) = p1.ext_gcd(p2);
    if g.deg() != 0 {
        return Err(EndoError::PreconditionViolated("factors are not coprime".into()));
    }
    let e1 = a.eval_poly(&t.mul(p2));
    let e2 = a.eval_poly(&s.mul(p1));
    let n = a.rows();
    let zero = a.ctx().zero_like();
    debug_assert_eq!(e1.add(&e2), Mat::identity(n, &zero));
    let mut cols = column_basis(&e1);
    let k1 = cols.len();
    cols.extend(column_basis(&e2));
    let p = Mat::from_cols(&cols, &zero);
    let p_inv = p
        .inverse()
        .ok_or_else(|| EndoError::PreconditionViolated("projector images are not complementary".into()))?;
    let b = p_inv.mul(a).mul(&p);
    let a1 = b.submatrix(0, k1, 0, k1);
    let a2 = b.submatrix(k1, n, k1, n);
    if b.submatrix(0, k1, k1, n).entries().any(|x| !x.is_zero())
        || b.submatrix(k1, n, 0, k1).entries().any(|x| !x.is_zero())
    {
        return Err(EndoError::PreconditionViolated("splitting is not block diagonal".into()));
    }
    Ok(CoprimeSplit { p, p_inv, a1, a2, e1 })
}

/// Splits along several pairwise coprime central factors whose product is
/// the minimal polynomial; the columns for factor i span `ker f_i(A)`.
/// Returns the change of basis and the diagonal blocks in factor order.
pub fn primary_split<T: CenterField>(a: &Mat<T>, factors: &[Poly<T>]) -> Result<(Mat<T>, Mat<T>, Vec<Mat<T>>), EndoError> {
    let n = a.rows();
    let zero = a.ctx().zero_like();
    let mut cols = Vec::new();
    let mut sizes = Vec::new();
    for (i, _) in factors.iter().enumerate() {
        let mut others = Poly::one(&zero);
        for (j, f) in factors.iter().enumerate() {
            if j != i {
                others = others.mul(f);
            }
        }
        let basis = column_basis(&a.eval_poly(&others));
        sizes.push(basis.len());
        cols.extend(basis);
    }
    if cols.len() != n {
        return Err(EndoError::PreconditionViolated("factors do not split the space".into()));
    }
    let p = Mat::from_cols(&cols, &zero);
    let p_inv = p
        .inverse()
        .ok_or_else(|| EndoError::PreconditionViolated("primary components are not independent".into()))?;
    let b = p_inv.mul(a).mul(&p);
    let mut blocks = Vec::new();
    let mut off = 0;
    for &s in &sizes {
        blocks.push(b.submatrix(off, off + s, off, off + s));
        off += s;
    }
    let rebuilt = Mat::block_diag(&blocks, &zero);
    if rebuilt != b {
        return Err(EndoError::PreconditionViolated("primary splitting is not block diagonal".into()));
    }
    Ok((p, p_inv, blocks))
}
