//! Normal form of a dominant self-map `x ↦ β·ψ(x)`.
//!
//! After replacing the map by an iterate, the minimal polynomial of the
//! linear part splits as `(x − 1)^s · h₂`. The `(x − 1)^s` piece is put in
//! unipotent Jordan form with its translation pushed onto block-last
//! coordinates; on the other piece the translation is conjugated away and the
//! matrix is split into Jordan blocks for eigenvalues `F^n` and a remainder
//! whose eigenvalues are independent of the Frobenius.
//!
//! Torus factors are handled on integer lattices so the conjugation `h` is an
//! integer matrix and point-level checks are exact; abstract factors only
//! carry matrix data.

use std::sync::Arc;

use num_integer::Integer;
use num_traits::{One, Signed};
use rayon::prelude::*;

use crate::endo::{det_q, split_frobenius_classes, Algebra, CenterField, EndoError, RingElem};
use crate::field::{ExpPoint, FieldError};
use crate::lattice::{diagonalize, from_qmat, saturate_columns, to_qmat};
use crate::matrix::{min_poly_q, Mat, QMat};
use crate::poly::{cyclotomic, Poly};
use crate::scalar::{common_denominator, euler_phi, rat, rat_int, Int, Rat, Scalar};
use crate::skew::{jordan_block, jordan_with_eigenvalue};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReductionError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

impl From<EndoError> for ReductionError {
    fn from(e: EndoError) -> Self {
        match e {
            EndoError::InvalidRing(s) => ReductionError::Domain(s),
            EndoError::PreconditionViolated(s) => ReductionError::PreconditionViolated(s),
        }
    }
}

/// Scalars the pipeline can split over. Over ℚ images are saturated integer
/// lattices, so conjugations stay integral.
pub trait ReductionScalar: CenterField {
    /// Basis `U` (n×k) of the column span of `m` and `V` (k×n) with `V·U = I`.
    fn image_basis(m: &Mat<Self>, zero: &Self) -> (Mat<Self>, Mat<Self>);
    /// Least positive integer `d` with `d·self` integral.
    fn denom(&self) -> Int;
}

impl ReductionScalar for Rat {
    fn image_basis(m: &Mat<Self>, _zero: &Self) -> (Mat<Self>, Mat<Self>) {
        let n = m.rows();
        let (u, v) = saturate_columns(m);
        let k = v.len();
        (to_qmat(&u, k), to_qmat(&v, n))
    }

    fn denom(&self) -> Int {
        self.denom().clone()
    }
}

impl ReductionScalar for RingElem {
    fn image_basis(m: &Mat<Self>, zero: &Self) -> (Mat<Self>, Mat<Self>) {
        let n = m.rows();
        let cols: Vec<Vec<RingElem>> = m.pivot_columns().into_iter().map(|c| m.col(c)).collect();
        let k = cols.len();
        if k == 0 {
            return (Mat::from_vec(n, 0, Vec::new()), Mat::from_vec(0, n, Vec::new()));
        }
        let u = Mat::from_cols(&cols, zero);
        let mut full = cols.clone();
        for i in u.complete_with_units() {
            let mut e = vec![zero.clone(); n];
            e[i] = zero.one_like();
            full.push(e);
        }
        let inv = Mat::from_cols(&full, zero).inverse().expect("completed basis is invertible");
        (u, inv.submatrix(0, k, 0, n))
    }

    fn denom(&self) -> Int {
        self.denominator()
    }
}

fn mat_denominator<T: ReductionScalar>(m: &Mat<T>) -> Int {
    m.entries().fold(Int::one(), |acc, x| acc.lcm(&x.denom()))
}

fn poly_denominator<T: ReductionScalar>(p: &Poly<T>) -> Int {
    p.coeffs().iter().fold(Int::one(), |acc, x| acc.lcm(&x.denom()))
}

fn scale_int<T: ReductionScalar>(m: &Mat<T>, c: &Int, zero: &T) -> Mat<T> {
    m.scale_left(&zero.from_rat_like(&rat_int(c)))
}

fn is_square_invertible<T: Scalar>(m: &Mat<T>) -> bool {
    m.rows() == m.cols() && (m.rows() == 0 || m.inverse().is_some())
}

#[derive(Clone, Debug)]
pub struct IterateData {
    pub n_star: u64,
    /// Orders n of roots of unity among the eigenvalues.
    pub unity_orders: Vec<u64>,
    /// Pairs (m, k) with λ^m = F^k found among the eigenvalues.
    pub frobenius_relations: Vec<(u32, i64)>,
}

/// Least iterate `n★` after which roots of unity become 1 and Frobenius-dependent
/// eigenvalues become exact Frobenius powers.
pub fn iterate_normalize<T: ReductionScalar>(
    a: &Mat<T>,
    frob: &T,
    m_bound: u32,
) -> Result<(IterateData, Mat<T>), ReductionError> {
    if a.rows() == 0 {
        return Err(ReductionError::Domain("empty matrix".into()));
    }
    let reg = T::regular_matrix(a);
    if det_q(&reg).is_zero() {
        return Err(ReductionError::Domain("map is not dominant (singular matrix)".into()));
    }
    let gq = min_poly_q(&reg);
    let deg = gq.deg() as u64;
    let mut unity_orders = Vec::new();
    for n in 1..=(2 * deg * deg + 2) {
        if euler_phi(n) <= deg && gq.gcd(&cyclotomic(n)).deg() > 0 {
            unity_orders.push(n);
        }
    }
    let g = T::min_poly_over_center(a);
    let (classes, _) = split_frobenius_classes(&g, frob, m_bound, false);
    let mut rels = Vec::new();
    for c in &classes {
        if c.k < 0 {
            return Err(ReductionError::PreconditionViolated(format!(
                "eigenvalue with λ^{} = F^{} is a negative Frobenius power",
                c.m, c.k
            )));
        }
        rels.push((c.m, c.k));
    }
    let n_star = unity_orders
        .iter()
        .copied()
        .chain(rels.iter().map(|&(m, _)| m as u64))
        .fold(1u64, |acc, x| acc.lcm(&x));
    Ok((IterateData { n_star, unity_orders, frobenius_relations: rels }, a.pow(n_star)))
}

#[derive(Clone, Debug)]
pub struct Bezout<T: Scalar> {
    /// Multiplicity of the eigenvalue 1.
    pub s: usize,
    pub h1: Poly<T>,
    pub h2: Poly<T>,
    pub q1: Poly<T>,
    pub q2: Poly<T>,
    pub l0: Int,
}

/// `g = (x − 1)^s·h₂` with integral `Q₁(x−1)^s + Q₂h₂ = ℓ₀`.
pub fn unity_split<T: ReductionScalar>(g: &Poly<T>) -> Bezout<T> {
    let ctx = g.ctx().clone();
    let one = ctx.one_like();
    let s = g.root_multiplicity(&one);
    let h1 = Poly::linear_root(&one).pow(s);
    let h2 = g.div_exact(&h1).expect("(x-1)^s divides g");
    let (d, a, b) = h1.ext_gcd(&h2);
    debug_assert_eq!(d.deg(), 0);
    let l0 = poly_denominator(&a).lcm(&poly_denominator(&b));
    let l = ctx.from_rat_like(&rat_int(&l0));
    let q1 = a.scale(&l);
    let q2 = b.scale(&l);
    Bezout { s, h1, h2, q1, q2, l0 }
}

impl<T: Scalar> Bezout<T> {
    pub fn identity_holds(&self) -> bool {
        let lhs = self.q1.mul(&self.h1).add(&self.q2.mul(&self.h2));
        lhs.deg() == 0 && !lhs.is_zero()
    }
}

/// An invariant piece cut out by a projector: `coords` maps the ambient
/// space to lattice coordinates on the image, `block` is the induced matrix.
#[derive(Clone, Debug)]
struct Piece<T: Scalar> {
    basis: Mat<T>,
    coords: Mat<T>,
    block: Mat<T>,
}

fn piece<T: ReductionScalar>(a: &Mat<T>, proj: &Mat<T>, zero: &T) -> Option<Piece<T>> {
    let (u, v) = T::image_basis(proj, zero);
    if u.cols() == 0 {
        return None;
    }
    Some(Piece { coords: v.mul(proj), block: v.mul(a).mul(&u), basis: u })
}

/// A Jordan block `J_{F^n, size}` of the Frobenius part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusBlock {
    pub exponent: i64,
    pub size: usize,
}

#[derive(Clone, Debug)]
pub struct FrobeniusSplit<T: Scalar> {
    pub blocks: Vec<FrobeniusBlock>,
    /// Integral conjugation `K` with `K·A₂ = (J ⊕ B₂)·K`.
    pub conj: Mat<T>,
    pub jordan: Option<Mat<T>>,
    /// Block with no eigenvalue dependent on the Frobenius.
    pub nfp: Option<Mat<T>>,
}

impl<T: Scalar> FrobeniusSplit<T> {
    pub fn normal_matrix(&self, zero: &T) -> Mat<T> {
        let parts: Vec<Mat<T>> = self.jordan.iter().chain(self.nfp.iter()).cloned().collect();
        Mat::block_diag(&parts, zero)
    }
}

/// Splits `a2` (no root-of-unity eigenvalues, iterate-normalized) into
/// Jordan blocks for eigenvalues `F^n`, n ≥ 1, and a remainder.
pub fn frobenius_split<T: ReductionScalar>(
    a2: &Mat<T>,
    frob: &T,
    m_bound: u32,
) -> Result<FrobeniusSplit<T>, ReductionError> {
    let zero = a2.ctx().zero_like();
    let g = T::min_poly_over_center(a2);
    let (mut classes, rest) = split_frobenius_classes(&g, frob, m_bound, true);
    for c in &classes {
        if c.k == 0 {
            return Err(ReductionError::PreconditionViolated("root of unity eigenvalue outside the unipotent part".into()));
        }
        if c.m != 1 || c.k < 0 {
            return Err(ReductionError::PreconditionViolated(format!(
                "eigenvalue with λ^{} = F^{} is not a positive Frobenius power; iterate first",
                c.m, c.k
            )));
        }
    }
    classes.sort_by_key(|c| c.k);
    let mut factors: Vec<Poly<T>> = classes.iter().map(|c| c.factor.clone()).collect();
    if rest.deg() > 0 {
        factors.push(rest.clone());
    }
    let mut rows: Vec<Mat<T>> = Vec::new();
    let mut jblocks: Vec<Mat<T>> = Vec::new();
    let mut blocks = Vec::new();
    let mut nfp = None;
    for (i, f) in factors.iter().enumerate() {
        let mut others = Poly::one(&zero);
        for (j, h) in factors.iter().enumerate() {
            if j != i {
                others = others.mul(h);
            }
        }
        let (d, u, _) = others.ext_gcd(f);
        if d.deg() != 0 {
            return Err(ReductionError::Invariant("eigenvalue classes are not coprime".into()));
        }
        let e = u.mul(&others).rem(&g);
        let c = poly_denominator(&e);
        let proj = a2.eval_poly(&e.scale(&zero.from_rat_like(&rat_int(&c))));
        let pc = piece(a2, &proj, &zero).ok_or_else(|| ReductionError::Invariant("empty primary component".into()))?;
        if i < classes.len() {
            let k = classes[i].k;
            let lambda = pow_center(frob, k as u64);
            let spec = jordan_with_eigenvalue(&pc.block, &lambda)?;
            let sigma = scale_int(&spec.p_inv, &mat_denominator(&spec.p_inv), &zero);
            rows.push(sigma.mul(&pc.coords));
            for &s in &spec.blocks {
                jblocks.push(jordan_block(&lambda, s));
                blocks.push(FrobeniusBlock { exponent: k, size: s });
            }
        } else {
            rows.push(pc.coords.clone());
            nfp = Some(pc.block.clone());
        }
    }
    let conj = rows.iter().skip(1).fold(rows[0].clone(), |acc, r| acc.vstack(r));
    let jordan = (!jblocks.is_empty()).then(|| Mat::block_diag(&jblocks, &zero));
    let split = FrobeniusSplit { blocks, conj, jordan, nfp };
    if split.conj.mul(a2) != split.normal_matrix(&zero).mul(&split.conj) || !is_square_invertible(&split.conj) {
        return Err(ReductionError::Invariant("Frobenius splitting failed verification".into()));
    }
    Ok(split)
}

fn pow_center<T: Scalar>(x: &T, e: u64) -> T {
    let mut acc = x.one_like();
    for _ in 0..e {
        acc = acc.mul_ref(x);
    }
    acc
}

/// Matrix-level normal form of one factor.
#[derive(Clone, Debug)]
pub struct MatrixNormalForm<T: Scalar> {
    pub iterate: IterateData,
    /// Matrix of the iterate `ψ^{n★}`.
    pub a_star: Mat<T>,
    pub bezout: Bezout<T>,
    pub unipotent_blocks: Vec<usize>,
    pub frobenius_blocks: Vec<FrobeniusBlock>,
    pub nfp: Option<Mat<T>>,
    /// Conjugation with `h·A★ = A_Φ·h`; rows are unipotent coordinates, then
    /// Frobenius Jordan coordinates, then the remainder.
    pub h: Mat<T>,
    pub a_phi: Mat<T>,
    /// Exponent of the quotient of the ambient lattice by the two pieces.
    pub m1: Int,
    /// Least ℓ with `ℓ·h⁻¹` and `ℓ·A_Φ` integral.
    pub l2: Int,
    /// Rows of `h` restricted to the unipotent part (k₁ × n).
    unipotent_rows: Option<Mat<T>>,
    /// Coordinates of the non-unipotent piece, its matrix and the integral
    /// conjugation of that piece into normal form.
    part2: Option<(Mat<T>, Mat<T>, Mat<T>)>,
}

impl<T: Scalar> MatrixNormalForm<T> {
    pub fn n_star(&self) -> u64 {
        self.iterate.n_star
    }

    pub fn unipotent_dim(&self) -> usize {
        self.unipotent_blocks.iter().sum()
    }

    pub fn matrix_identity_holds(&self) -> bool {
        self.h.mul(&self.a_star) == self.a_phi.mul(&self.h)
    }

    /// Row index ranges of the Frobenius blocks inside `h` / `A_Φ`.
    pub fn frobenius_block_rows(&self) -> Vec<(FrobeniusBlock, std::ops::Range<usize>)> {
        let mut off = self.unipotent_dim();
        self.frobenius_blocks
            .iter()
            .map(|b| {
                let r = off..off + b.size;
                off += b.size;
                (b.clone(), r)
            })
            .collect()
    }
}

/// Runs the matrix pipeline with a prescribed iterate `n_star` (a multiple of
/// the factor's own `n★`).
pub fn matrix_normal_form<T: ReductionScalar>(
    a: &Mat<T>,
    frob: &T,
    m_bound: u32,
    n_star: Option<u64>,
) -> Result<MatrixNormalForm<T>, ReductionError> {
    let (mut iterate, mut a_star) = iterate_normalize(a, frob, m_bound)?;
    if let Some(n) = n_star {
        if n % iterate.n_star != 0 {
            return Err(ReductionError::Invariant("forced iterate is not a multiple of n★".into()));
        }
        iterate.n_star = n;
        a_star = a.pow(n);
    }
    let zero = a.ctx().zero_like();
    let n = a.rows();
    let g = T::min_poly_over_center(&a_star);
    let bezout = unity_split(&g);
    if !bezout.identity_holds() {
        return Err(ReductionError::Invariant("Bézout identity failed".into()));
    }
    let p1 = piece(&a_star, &a_star.eval_poly(&bezout.q2.mul(&bezout.h2)), &zero);
    let p2 = piece(&a_star, &a_star.eval_poly(&bezout.q1.mul(&bezout.h1)), &zero);
    let mut rows = Vec::new();
    let mut blocks = Vec::new();
    let mut unipotent_blocks = Vec::new();
    let mut unipotent_rows = None;
    let mut bases = Vec::new();
    if let Some(pc) = &p1 {
        let one = zero.one_like();
        let spec = jordan_with_eigenvalue(&pc.block, &one)?;
        let sigma = scale_int(&spec.p_inv, &mat_denominator(&spec.p_inv), &zero);
        let r = sigma.mul(&pc.coords);
        rows.push(r.clone());
        unipotent_rows = Some(r);
        blocks.push(spec.jordan_matrix());
        unipotent_blocks = spec.blocks.clone();
        bases.push(pc.basis.clone());
    }
    let mut frobenius_blocks = Vec::new();
    let mut nfp = None;
    let mut part2 = None;
    if let Some(pc) = &p2 {
        let fs = frobenius_split(&pc.block, frob, m_bound)?;
        rows.push(fs.conj.mul(&pc.coords));
        blocks.push(fs.normal_matrix(&zero));
        frobenius_blocks = fs.blocks.clone();
        nfp = fs.nfp.clone();
        part2 = Some((pc.coords.clone(), pc.block.clone(), fs.conj.clone()));
        bases.push(pc.basis.clone());
    }
    let h = rows.iter().skip(1).fold(rows[0].clone(), |acc, r| acc.vstack(r));
    let a_phi = Mat::block_diag(&blocks, &zero);
    let w = bases.iter().skip(1).fold(bases[0].clone(), |acc, b| acc.hstack(b));
    let winv = w
        .inverse()
        .ok_or_else(|| ReductionError::Invariant("pieces are not complementary".into()))?;
    let hinv = h
        .inverse()
        .ok_or_else(|| ReductionError::Invariant("conjugation is singular".into()))?;
    debug_assert_eq!(h.rows(), n);
    let nf = MatrixNormalForm {
        iterate,
        a_star,
        bezout,
        unipotent_blocks,
        frobenius_blocks,
        nfp,
        m1: mat_denominator(&winv),
        l2: mat_denominator(&hinv).lcm(&mat_denominator(&a_phi)),
        h,
        a_phi,
        unipotent_rows,
        part2,
    };
    if !nf.matrix_identity_holds() {
        return Err(ReductionError::Invariant("h·A★ ≠ A_Φ·h".into()));
    }
    Ok(nf)
}

/// Torus factor `G_m^N`: rational matrix `A = M/m` and translation β.
#[derive(Clone, Debug)]
pub struct TorusMap {
    pub matrix: QMat,
    pub beta: ExpPoint,
}

impl TorusMap {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn denominator(&self) -> Int {
        common_denominator(self.matrix.entries())
    }

    /// One step `x ↦ β·x^A`, choosing torsion representatives as in
    /// [`ExpPoint::act_rational`].
    pub fn step(&self, x: &ExpPoint, p: u64) -> Result<ExpPoint, FieldError> {
        Ok(x.act_rational(&self.matrix, p)?.mul(&self.beta))
    }
}

/// Factor with an abstract endomorphism ring; matrix-level data only.
#[derive(Clone, Debug)]
pub struct AbstractMap {
    pub label: String,
    pub algebra: Arc<Algebra>,
    pub matrix: Mat<RingElem>,
    /// Dimension of the simple factor C (1 for elliptic curves).
    pub dim: usize,
}

#[derive(Clone, Debug)]
pub struct SelfMap {
    pub p: u64,
    pub q: Int,
    pub m_bound: u32,
    pub torus: Option<TorusMap>,
    pub factors: Vec<AbstractMap>,
}

/// `γ` and `β′ = β·(γ^{Q−I})` supported on block-last coordinates of the
/// unipotent Jordan matrix with the given block sizes.
pub fn normalize_translation(blocks: &[usize], beta: &ExpPoint) -> (ExpPoint, ExpPoint) {
    let n = beta.dim();
    let s = beta.basis_len();
    let mut gamma = ExpPoint::identity(n, s);
    let mut off = 0;
    let mut parts = Vec::new();
    for &b in blocks {
        for i in 0..b {
            if i == 0 {
                parts.push(ExpPoint::identity(1, s));
            } else {
                parts.push(beta.select(&[off + i - 1]).inv());
            }
        }
        off += b;
    }
    if let Some(first) = parts.first() {
        gamma = parts.iter().skip(1).fold(first.clone(), |acc, x| acc.concat(x));
    }
    let j = Mat::block_diag(&blocks.iter().map(|&b| jordan_block(&rat(1), b)).collect::<Vec<_>>(), &rat(0));
    let shift = gamma.act(&from_qmat(&j.sub(&QMat::identity(n, &rat(0)))).expect("integer matrix"));
    (gamma, beta.mul(&shift))
}

/// Solves `M·z = b` in the divisible hull: exponents exactly, torsion via a
/// diagonalization of the integer matrix `D·M` against `D·b`.
pub fn solve_point(m: &QMat, b: &ExpPoint, p: u64) -> Result<ExpPoint, ReductionError> {
    let n = m.rows();
    let s = b.basis_len();
    let mut exps = vec![vec![rat(0); s]; n];
    for k in 0..s {
        let rhs: Vec<Rat> = b.exps().iter().map(|e| e[k].clone()).collect();
        let x = m
            .solve_right(&rhs)
            .ok_or_else(|| ReductionError::PreconditionViolated("translation equation is inconsistent".into()))?;
        for (i, v) in x.into_iter().enumerate() {
            exps[i][k] = v;
        }
    }
    let d = common_denominator(m.entries());
    let mi = from_qmat(&m.scale_left(&rat_int(&d))).expect("cleared denominators");
    let (u, diag, v) = diagonalize(&mi, n, n);
    let t: Vec<Rat> = b.tors().iter().map(|x| x * rat_int(&d)).collect();
    let ut: Vec<Rat> = u
        .iter()
        .map(|row| row.iter().zip(&t).fold(rat(0), |acc, (a, x)| acc + rat_int(a) * x))
        .collect();
    let mut y = Vec::with_capacity(n);
    for (i, x) in ut.iter().enumerate() {
        let di = diag.get(i).cloned().unwrap_or_default();
        if di.sign() == num_bigint::Sign::NoSign {
            return Err(ReductionError::PreconditionViolated("translation matrix is singular".into()));
        }
        let r = crate::field::point::divide_torsion(x, &di.abs(), p)?;
        y.push(if di.sign() == num_bigint::Sign::Minus { crate::scalar::frac(&-r) } else { r });
    }
    let tors: Vec<Rat> = v
        .iter()
        .map(|row| row.iter().zip(&y).fold(rat(0), |acc, (a, x)| acc + rat_int(a) * x))
        .collect();
    Ok(ExpPoint::new(exps, tors))
}

/// `z` with `(ψ₂ − I)·z = ℓ₀·β₂`; conjugating by `z` removes the translation.
pub fn kill_translation(psi2: &QMat, beta2: &ExpPoint, l0: &Int, p: u64) -> Result<ExpPoint, ReductionError> {
    let n = psi2.rows();
    let m = psi2.sub(&QMat::identity(n, &rat(0)));
    solve_point(&m, &beta2.pow(l0), p)
}

/// Torus normal form: `h(x) = x^H·shift` conjugates `Ψ★(x) = β★·x^{A★}` to
/// `Φ(u) = β_Φ·u^{A_Φ}`.
#[derive(Clone, Debug)]
pub struct TorusNormalForm {
    pub matrix: MatrixNormalForm<Rat>,
    pub beta_star: ExpPoint,
    /// Normalized unipotent translation (k₁ coordinates).
    pub unipotent_translation: ExpPoint,
    pub gamma: ExpPoint,
    /// Translation-killing point on the non-unipotent piece.
    pub z: Option<ExpPoint>,
    pub shift: ExpPoint,
    pub beta_phi: ExpPoint,
}

impl TorusNormalForm {
    pub fn apply_h(&self, x: &ExpPoint, p: u64) -> Result<ExpPoint, FieldError> {
        Ok(x.act_rational(&self.matrix.h, p)?.mul(&self.shift))
    }

    /// `Φ^n(u)` by a single matrix power and the summed translation.
    pub fn phi_power(&self, u: &ExpPoint, n: u64, p: u64) -> Result<ExpPoint, FieldError> {
        let a = &self.matrix.a_phi;
        let mut trans = ExpPoint::identity(u.dim(), u.basis_len());
        let mut cur = self.beta_phi.clone();
        for _ in 0..n {
            trans = trans.mul(&cur);
            cur = cur.act_rational(a, p)?;
        }
        Ok(u.act_rational(&a.pow(n), p)?.mul(&trans))
    }

    /// One step of the iterate `Ψ★`.
    pub fn step_star(&self, x: &ExpPoint, p: u64) -> Result<ExpPoint, FieldError> {
        Ok(x.act_rational(&self.matrix.a_star, p)?.mul(&self.beta_star))
    }
}

/// `Σ_{j<n} ψ^j(β)`: translation of the n-th iterate.
pub fn iterate_translation(map: &TorusMap, n: u64, p: u64) -> Result<ExpPoint, FieldError> {
    let mut acc = ExpPoint::identity(map.dim(), map.beta.basis_len());
    let mut cur = map.beta.clone();
    for _ in 0..n {
        acc = acc.mul(&cur);
        cur = cur.act_rational(&map.matrix, p)?;
    }
    Ok(acc)
}

pub fn torus_normal_form(
    map: &TorusMap,
    p: u64,
    q: &Int,
    m_bound: u32,
    n_star: Option<u64>,
) -> Result<TorusNormalForm, ReductionError> {
    let frob = rat_int(q);
    let nf = matrix_normal_form(&map.matrix, &frob, m_bound, n_star)?;
    let beta_star = iterate_translation(map, nf.n_star(), p)?;
    let s = map.beta.basis_len();
    let k1 = nf.unipotent_dim();
    let (gamma, unipotent_translation) = match &nf.unipotent_rows {
        Some(r) => normalize_translation(&nf.unipotent_blocks, &beta_star.act_rational(r, p)?),
        None => (ExpPoint::identity(0, s), ExpPoint::identity(0, s)),
    };
    let (z, part2_shift) = match &nf.part2 {
        Some((coords, a2, conj)) => {
            let b2 = beta_star.act_rational(coords, p)?;
            let z = kill_translation(a2, &b2, &Int::one(), p)?;
            let c = z.act_rational(conj, p)?;
            (Some(z), c)
        }
        None => (None, ExpPoint::identity(0, s)),
    };
    let shift = gamma.inv().concat(&part2_shift);
    let beta_phi = unipotent_translation.concat(&ExpPoint::identity(map.dim() - k1, s));
    Ok(TorusNormalForm { matrix: nf, beta_star, unipotent_translation, gamma, z, shift, beta_phi })
}

#[derive(Clone, Debug)]
pub struct AbstractNormalForm {
    pub label: String,
    pub dim: usize,
    pub matrix: MatrixNormalForm<RingElem>,
}

#[derive(Clone, Debug)]
pub struct NormalForm {
    pub p: u64,
    pub q: Int,
    pub n_star: u64,
    pub torus: Option<TorusNormalForm>,
    pub factors: Vec<AbstractNormalForm>,
}

/// Full pipeline; all factors use the common iterate `n★` (lcm over factors).
pub fn build_normal_form(s: &SelfMap) -> Result<NormalForm, ReductionError> {
    if s.torus.is_none() && s.factors.is_empty() {
        return Err(ReductionError::Domain("self-map has no factors".into()));
    }
    let mut n_star = 1u64;
    if let Some(t) = &s.torus {
        n_star = n_star.lcm(&iterate_normalize(&t.matrix, &rat_int(&s.q), s.m_bound)?.0.n_star);
    }
    for f in &s.factors {
        n_star = n_star.lcm(&iterate_normalize(&f.matrix, &f.algebra.frobenius(), s.m_bound)?.0.n_star);
    }
    let torus = s
        .torus
        .as_ref()
        .map(|t| torus_normal_form(t, s.p, &s.q, s.m_bound, Some(n_star)))
        .transpose()?;
    let factors = s
        .factors
        .iter()
        .map(|f| {
            Ok(AbstractNormalForm {
                label: f.label.clone(),
                dim: f.dim,
                matrix: matrix_normal_form(&f.matrix, &f.algebra.frobenius(), s.m_bound, Some(n_star))?,
            })
        })
        .collect::<Result<Vec<_>, ReductionError>>()?;
    Ok(NormalForm { p: s.p, q: s.q.clone(), n_star, torus, factors })
}

#[derive(Clone, Debug)]
pub struct PointFailure {
    pub sample: usize,
    pub iteration: usize,
    pub difference: ExpPoint,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    /// `h·A★ = A_Φ·h` for every factor.
    pub matrix_identity: bool,
    /// `Ψ★(x)` equals `n★` single steps of Ψ up to the allowed torsion.
    pub iterate_identity: bool,
    pub samples: usize,
    pub iterations: usize,
    pub failures: Vec<PointFailure>,
    /// Torsion order allowed after one iteration; it is ℓ₂ for integral
    /// systems and grows by the step denominator per iteration otherwise.
    pub torsion_bound: Int,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.matrix_identity && self.iterate_identity && self.failures.is_empty()
    }
}

/// Checks `h∘Ψ★^n − Φ^n∘h ∈ G′[ℓ]` on samples and the matrix identity.
pub fn verify_almost_commutative(
    nf: &NormalForm,
    s: &SelfMap,
    samples: &[ExpPoint],
    iterations: usize,
) -> Result<VerifyReport, ReductionError> {
    let mut matrix_identity = nf.factors.iter().all(|f| f.matrix.matrix_identity_holds());
    let mut report = VerifyReport {
        matrix_identity,
        iterate_identity: true,
        samples: samples.len(),
        iterations,
        failures: Vec::new(),
        torsion_bound: Int::one(),
    };
    let (Some(tnf), Some(map)) = (&nf.torus, &s.torus) else {
        return Ok(report);
    };
    matrix_identity &= tnf.matrix.matrix_identity_holds();
    report.matrix_identity = matrix_identity;
    let p = nf.p;
    let step_den = common_denominator(tnf.matrix.a_star.entries())
        .lcm(&common_denominator(tnf.matrix.a_phi.entries()))
        .lcm(&common_denominator(tnf.matrix.h.entries()));
    let base_den = map.denominator();
    report.torsion_bound = tnf.matrix.l2.clone() * &step_den;
    let results: Vec<Result<(bool, Vec<PointFailure>), FieldError>> = samples
        .par_iter()
        .enumerate()
        .map(|(si, x)| {
            let mut direct = x.clone();
            for _ in 0..nf.n_star {
                direct = map.step(&direct, p)?;
            }
            let once = tnf.step_star(x, p)?;
            let iter_ok = direct
                .mul(&once.inv())
                .killed_by(&num_traits::pow(base_den.clone(), nf.n_star as usize));
            let hx = tnf.apply_h(x, p)?;
            let mut y = x.clone();
            let mut fails = Vec::new();
            let mut tol = tnf.matrix.l2.clone();
            for n in 1..=iterations {
                y = tnf.step_star(&y, p)?;
                tol *= &step_den;
                let lhs = tnf.apply_h(&y, p)?;
                let rhs = tnf.phi_power(&hx, n as u64, p)?;
                let diff = lhs.mul(&rhs.inv());
                if !diff.killed_by(&tol) {
                    fails.push(PointFailure { sample: si, iteration: n, difference: diff });
                }
            }
            Ok((iter_ok, fails))
        })
        .collect();
    for r in results {
        let (ok, fails) = r?;
        report.iterate_identity &= ok;
        report.failures.extend(fails);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::qmat;
    use crate::poly::qpoly;
    use crate::scalar::ratio;

    fn int(x: i64) -> Int {
        Int::from(x)
    }

    #[test]
    fn rotation_needs_fourth_iterate() {
        let a = qmat(&[&[0, -1], &[1, 0]]);
        let (it, a4) = iterate_normalize(&a, &rat(3), 8).unwrap();
        assert_eq!(it.n_star, 4);
        assert_eq!(a4, QMat::identity(2, &rat(0)));
    }

    #[test]
    fn square_root_of_q_needs_second_iterate() {
        let a = qmat(&[&[0, 3], &[1, 0]]);
        let (it, a2) = iterate_normalize(&a, &rat(3), 8).unwrap();
        assert_eq!(it.n_star, 2);
        assert_eq!(a2, QMat::scalar(2, &rat(3)));
    }

    #[test]
    fn singular_is_rejected() {
        assert!(iterate_normalize(&qmat(&[&[1, 1], &[1, 1]]), &rat(3), 4).is_err());
    }

    #[test]
    fn bezout_examples() {
        let g = qpoly(&[-1, 1]).mul(&qpoly(&[-3, 1]));
        let b = unity_split(&g);
        assert_eq!(b.l0, int(2));
        assert_eq!(b.q1.mul(&b.h1).add(&b.q2.mul(&b.h2)), Poly::constant(rat(2)));
        let b = unity_split(&qpoly(&[-1, 1]).pow(2));
        assert_eq!((b.s, b.l0.clone(), b.h2.deg()), (2, int(1), 0));
        let b = unity_split(&qpoly(&[-3, 1]));
        assert_eq!((b.s, b.l0), (0, int(1)));
    }

    #[test]
    fn kill_translation_examples() {
        let z = kill_translation(&qmat(&[&[3]]), &ExpPoint::from_int_exps(&[vec![1]]), &int(1), 3).unwrap();
        assert_eq!(z.exps()[0], vec![ratio(1, 2)]);
        let z = kill_translation(
            &qmat(&[&[3, 1], &[0, 3]]),
            &ExpPoint::from_int_exps(&[vec![1], vec![0]]),
            &int(1),
            3,
        )
        .unwrap();
        // [[2,1],[0,2]]·z = (1, 0)
        assert_eq!(z.exps()[0], vec![ratio(1, 2)]);
        assert_eq!(z.exps()[1], vec![rat(0)]);
        let tors = ExpPoint::new(vec![vec![rat(0)]], vec![ratio(1, 4)]);
        let z = kill_translation(&qmat(&[&[3]]), &tors, &int(1), 3).unwrap();
        assert_eq!(crate::scalar::frac(&(z.tors()[0].clone() * rat(2))), ratio(1, 4));
    }

    #[test]
    fn solve_point_negative_pivot_keeps_torsion_sign() {
        let b = ExpPoint::new(vec![vec![rat(3)]], vec![ratio(11, 24)]);
        let z = solve_point(&qmat(&[&[-17]]), &b, 5).unwrap();
        assert_eq!(crate::scalar::frac(&(z.tors()[0].clone() * rat(-17))), ratio(11, 24));
        assert_eq!(z.exps()[0], vec![ratio(-3, 17)]);
    }

    #[test]
    fn frobenius_split_examples() {
        let fs = frobenius_split(&qmat(&[&[0, 2], &[1, 0]]), &rat(3), 8).unwrap();
        assert!(fs.blocks.is_empty());
        assert!(fs.nfp.is_some());
        let u = qmat(&[&[2, 1], &[1, 1]]);
        let a = u.mul(&qmat(&[&[3, 0], &[0, 9]])).mul(&u.inverse().unwrap());
        let fs = frobenius_split(&a, &rat(3), 8).unwrap();
        let exps: Vec<i64> = fs.blocks.iter().map(|b| b.exponent).collect();
        assert_eq!(exps, vec![1, 2]);
        assert!(fs.nfp.is_none());
    }

    #[test]
    fn translation_normalization() {
        let beta = ExpPoint::from_int_exps(&[vec![1], vec![2]]);
        let (gamma, b) = normalize_translation(&[2], &beta);
        assert_eq!(b.exps(), ExpPoint::from_int_exps(&[vec![0], vec![2]]).exps());
        assert_eq!(gamma.exps()[1], vec![rat(-1)]);
    }

    fn intro() -> SelfMap {
        SelfMap {
            p: 3,
            q: int(3),
            m_bound: 8,
            torus: Some(TorusMap {
                matrix: qmat(&[&[1, 0, 0], &[0, 3, 0], &[0, 0, 3]]),
                beta: ExpPoint::identity(3, 1),
            }),
            factors: Vec::new(),
        }
    }

    #[test]
    fn intro_example_normal_form() {
        let s = intro();
        let nf = build_normal_form(&s).unwrap();
        let t = nf.torus.as_ref().unwrap();
        assert_eq!(nf.n_star, 1);
        assert_eq!(t.matrix.unipotent_blocks, vec![1]);
        assert_eq!(
            t.matrix.frobenius_blocks,
            vec![FrobeniusBlock { exponent: 1, size: 1 }, FrobeniusBlock { exponent: 1, size: 1 }]
        );
        assert!(t.matrix.nfp.is_none());
        let samples = vec![ExpPoint::from_int_exps(&[vec![1], vec![1], vec![1]])];
        let r = verify_almost_commutative(&nf, &s, &samples, 5).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn translated_identity_is_unipotent() {
        let s = SelfMap {
            p: 3,
            q: int(3),
            m_bound: 8,
            torus: Some(TorusMap { matrix: qmat(&[&[1]]), beta: ExpPoint::from_int_exps(&[vec![1]]) }),
            factors: Vec::new(),
        };
        let nf = build_normal_form(&s).unwrap();
        let t = nf.torus.unwrap();
        assert_eq!(t.matrix.unipotent_blocks, vec![1]);
        assert_eq!(t.unipotent_translation.exps()[0], vec![rat(1)]);
    }

    #[test]
    fn mixed_system_verifies() {
        let s = SelfMap {
            p: 3,
            q: int(3),
            m_bound: 8,
            torus: Some(TorusMap {
                matrix: qmat(&[&[1, 1, 0], &[0, 1, 2], &[0, 0, 3]]),
                beta: ExpPoint::new(vec![vec![rat(1), rat(0)], vec![rat(0), rat(1)], vec![rat(2), rat(1)]], vec![
                    ratio(1, 2),
                    rat(0),
                    ratio(1, 4),
                ]),
            }),
            factors: Vec::new(),
        };
        let nf = build_normal_form(&s).unwrap();
        let samples: Vec<ExpPoint> = (0..4)
            .map(|i| ExpPoint::new(vec![vec![rat(i), rat(1)], vec![rat(2), rat(-i)], vec![rat(1), rat(1)]], vec![rat(0), ratio(1, 5), rat(0)]))
            .collect();
        let r = verify_almost_commutative(&nf, &s, &samples, 6).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn quadratic_factor_matrix_level() {
        let alg = Algebra::quadratic(int(1), int(3)).unwrap();
        let f = alg.frobenius();
        let m = Mat::from_rows(vec![vec![f.clone(), alg.one()], vec![alg.zero(), f.clone()]]);
        let nf = matrix_normal_form(&m, &f, 8, None).unwrap();
        assert_eq!(nf.frobenius_blocks, vec![FrobeniusBlock { exponent: 1, size: 2 }]);
        assert!(nf.matrix_identity_holds());
    }
}
