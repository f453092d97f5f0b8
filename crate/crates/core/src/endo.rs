//! Endomorphism algebras with a central Frobenius element: ℚ, quadratic
//! fields ℚ(F) with F² = aF − q, and definite quaternion algebras (a, b / ℚ).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive};
use rand::Rng;

use crate::matrix::{krylov_min_poly, min_poly_q, Mat, QMat};
use crate::poly::{Poly, QPoly};
use crate::scalar::{common_denominator, rat, rat_int, Int, Rat, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EndoError {
    #[error("invalid ring description: {0}")]
    InvalidRing(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RingKind {
    Integer,
    /// ℤ[F] with F² = trace·F − norm.
    Quadratic { trace: Int, norm: Int },
    /// Basis 1, i, j, k with i² = a, j² = b, ij = k = −ji.
    Quaternion { a: Int, b: Int },
}

pub struct Algebra {
    kind: RingKind,
    dim: usize,
    /// `table[i][j]` = coordinates of `e_i·e_j`.
    table: Vec<Vec<Vec<Rat>>>,
    frobenius: Vec<Rat>,
    q: Int,
    /// ℤ-basis of the order, as coordinate vectors.
    order_basis: Vec<Vec<Rat>>,
    /// Inverse of the matrix whose columns are `order_basis`.
    order_inverse: QMat,
}

impl fmt::Debug for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} (q = {})", self.kind, self.q)
    }
}

fn unit_vec(n: usize, i: usize) -> Vec<Rat> {
    let mut v = vec![rat(0); n];
    v[i] = Rat::one();
    v
}

fn is_square(n: &Int) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}

impl Algebra {
    fn build(
        kind: RingKind,
        table: Vec<Vec<Vec<Rat>>>,
        frobenius: Vec<Rat>,
        q: Int,
        order_basis: Option<Vec<Vec<Rat>>>,
    ) -> Result<Arc<Self>, EndoError> {
        let dim = table.len();
        let order_basis = order_basis.unwrap_or_else(|| (0..dim).map(|i| unit_vec(dim, i)).collect());
        if order_basis.len() != dim || order_basis.iter().any(|v| v.len() != dim) {
            return Err(EndoError::InvalidRing("order basis must have one vector per basis element".into()));
        }
        let basis_mat = QMat::from_cols(&order_basis, &rat(0));
        let order_inverse = basis_mat
            .inverse()
            .ok_or_else(|| EndoError::InvalidRing("order basis is not a ℚ-basis".into()))?;
        if q < Int::from(2) {
            return Err(EndoError::InvalidRing("Frobenius size q must be at least 2".into()));
        }
        let alg = Arc::new(Algebra { kind, dim, table, frobenius, q, order_basis, order_inverse });
        let f = alg.frobenius();
        if !f.is_central() {
            return Err(EndoError::InvalidRing("Frobenius element is not central".into()));
        }
        if f.is_zero() {
            return Err(EndoError::InvalidRing("Frobenius element is zero".into()));
        }
        for x in &alg.order_basis {
            for y in &alg.order_basis {
                let prod = alg.elem(x.clone()).mul_ref(&alg.elem(y.clone()));
                if !prod.is_integral() {
                    return Err(EndoError::InvalidRing(
                        "order basis is not closed under multiplication".into(),
                    ));
                }
            }
        }
        if !alg.elem(unit_vec(dim, 0)).is_integral() {
            return Err(EndoError::InvalidRing("order does not contain 1".into()));
        }
        Ok(alg)
    }

    /// The ring ℤ acting on a torus, with Frobenius `q`.
    pub fn integer(q: Int) -> Result<Arc<Self>, EndoError> {
        let table = vec![vec![vec![Rat::one()]]];
        let f = vec![rat_int(&q)];
        Self::build(RingKind::Integer, table, f, q, None)
    }

    /// ℤ[F] with F² = trace·F − norm; the Frobenius is F and its size is `norm`.
    pub fn quadratic(trace: Int, norm: Int) -> Result<Arc<Self>, EndoError> {
        let disc = &trace * &trace - Int::from(4) * &norm;
        if is_square(&disc) {
            return Err(EndoError::InvalidRing(format!(
                "x^2 - {trace}x + {norm} is reducible over ℚ (discriminant {disc})"
            )));
        }
        let (a, q) = (rat_int(&trace), rat_int(&norm));
        let table = vec![
            vec![vec![rat(1), rat(0)], vec![rat(0), rat(1)]],
            vec![vec![rat(0), rat(1)], vec![-q, a]],
        ];
        Self::build(RingKind::Quadratic { trace, norm: norm.clone() }, table, vec![rat(0), rat(1)], norm, None)
    }

    /// Definite quaternion algebra (a, b / ℚ) with a rational Frobenius.
    pub fn quaternion(
        a: Int,
        b: Int,
        frobenius: Rat,
        q: Int,
        order_basis: Option<Vec<Vec<Rat>>>,
    ) -> Result<Arc<Self>, EndoError> {
        if !(a.is_negative() && b.is_negative()) {
            return Err(EndoError::InvalidRing(
                "quaternion parameters must both be negative (definite division algebra)".into(),
            ));
        }
        let (ar, br) = (rat_int(&a), rat_int(&b));
        let z = rat(0);
        let v = |c: [Rat; 4]| c.to_vec();
        let one = Rat::one();
        // rows: e_i·e_j for basis 1, i, j, k
        let table = vec![
            vec![
                v([one.clone(), z.clone(), z.clone(), z.clone()]),
                v([z.clone(), one.clone(), z.clone(), z.clone()]),
                v([z.clone(), z.clone(), one.clone(), z.clone()]),
                v([z.clone(), z.clone(), z.clone(), one.clone()]),
            ],
            vec![
                v([z.clone(), one.clone(), z.clone(), z.clone()]),
                v([ar.clone(), z.clone(), z.clone(), z.clone()]),
                v([z.clone(), z.clone(), z.clone(), one.clone()]),
                v([z.clone(), z.clone(), ar.clone(), z.clone()]),
            ],
            vec![
                v([z.clone(), z.clone(), one.clone(), z.clone()]),
                v([z.clone(), z.clone(), z.clone(), -one.clone()]),
                v([br.clone(), z.clone(), z.clone(), z.clone()]),
                v([z.clone(), -br.clone(), z.clone(), z.clone()]),
            ],
            vec![
                v([z.clone(), z.clone(), z.clone(), one.clone()]),
                v([z.clone(), z.clone(), -ar.clone(), z.clone()]),
                v([z.clone(), br.clone(), z.clone(), z.clone()]),
                v([-(&ar * &br), z.clone(), z.clone(), z.clone()]),
            ],
        ];
        let f = vec![frobenius, z.clone(), z.clone(), z];
        Self::build(RingKind::Quaternion { a, b }, table, f, q, order_basis)
    }

    pub fn kind(&self) -> &RingKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self) -> &Int {
        &self.q
    }

    pub fn is_commutative(&self) -> bool {
        !matches!(self.kind, RingKind::Quaternion { .. })
    }

    pub fn order_basis(&self) -> &[Vec<Rat>] {
        &self.order_basis
    }

    pub fn elem(self: &Arc<Self>, c: Vec<Rat>) -> RingElem {
        assert_eq!(c.len(), self.dim);
        RingElem { alg: self.clone(), c }
    }

    pub fn zero(self: &Arc<Self>) -> RingElem {
        self.elem(vec![rat(0); self.dim])
    }

    pub fn one(self: &Arc<Self>) -> RingElem {
        self.elem(unit_vec(self.dim, 0))
    }

    pub fn from_rat(self: &Arc<Self>, r: &Rat) -> RingElem {
        let mut c = vec![rat(0); self.dim];
        c[0] = r.clone();
        self.elem(c)
    }

    pub fn from_int(self: &Arc<Self>, n: i64) -> RingElem {
        self.from_rat(&rat(n))
    }

    pub fn basis(self: &Arc<Self>, i: usize) -> RingElem {
        self.elem(unit_vec(self.dim, i))
    }

    pub fn frobenius(self: &Arc<Self>) -> RingElem {
        self.elem(self.frobenius.clone())
    }

    /// Random element of the order with coefficients in `[-bound, bound]`.
    pub fn random_order_elem<R: Rng>(self: &Arc<Self>, rng: &mut R, bound: i64) -> RingElem {
        let mut c = vec![rat(0); self.dim];
        for b in &self.order_basis {
            let k = rat(rng.gen_range(-bound..=bound));
            for (ci, bi) in c.iter_mut().zip(b) {
                *ci += &k * bi;
            }
        }
        self.elem(c)
    }

    fn mul_coords(&self, x: &[Rat], y: &[Rat]) -> Vec<Rat> {
        let mut out = vec![rat(0); self.dim];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let s = xi * yj;
                for (k, t) in self.table[i][j].iter().enumerate() {
                    if !t.is_zero() {
                        out[k] += &s * t;
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone)]
pub struct RingElem {
    alg: Arc<Algebra>,
    c: Vec<Rat>,
}

impl PartialEq for RingElem {
    fn eq(&self, other: &Self) -> bool {
        self.c == other.c && self.alg.kind == other.alg.kind
    }
}

impl fmt::Debug for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: &[&str] = match self.alg.kind {
            RingKind::Integer => &[""],
            RingKind::Quadratic { .. } => &["", "F"],
            RingKind::Quaternion { .. } => &["", "i", "j", "k"],
        };
        let terms: Vec<String> = self
            .c
            .iter()
            .zip(names)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, n)| {
                let cs = crate::scalar::rat_to_string(c);
                match (*n, cs.as_str()) {
                    ("", _) => cs,
                    (n, "1") => n.to_string(),
                    (n, "-1") => format!("-{n}"),
                    (n, _) => format!("{cs}{n}"),
                }
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl RingElem {
    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.alg
    }

    pub fn coords(&self) -> &[Rat] {
        &self.c
    }

    /// Left-multiplication matrix on the algebra basis.
    pub fn regular_representation(&self) -> QMat {
        let d = self.alg.dim;
        let cols: Vec<Vec<Rat>> = (0..d).map(|j| self.alg.mul_coords(&self.c, &unit_vec(d, j))).collect();
        QMat::from_cols(&cols, &rat(0))
    }

    pub fn is_central(&self) -> bool {
        (0..self.alg.dim).all(|i| {
            let e = unit_vec(self.alg.dim, i);
            self.alg.mul_coords(&self.c, &e) == self.alg.mul_coords(&e, &self.c)
        })
    }

    /// Rational value if the element lies in ℚ·1.
    pub fn as_rational(&self) -> Option<Rat> {
        self.c[1..].iter().all(|x| x.is_zero()).then(|| self.c[0].clone())
    }

    /// Coordinates on the order's ℤ-basis.
    pub fn order_coords(&self) -> Vec<Rat> {
        self.alg.order_inverse.mul_vec(&self.c)
    }

    pub fn is_integral(&self) -> bool {
        self.order_coords().iter().all(|x| x.is_integer())
    }

    /// Least positive integer `d` with `d·self` in the order.
    pub fn denominator(&self) -> Int {
        common_denominator(self.order_coords().iter())
    }

    pub fn scale_rat(&self, r: &Rat) -> RingElem {
        RingElem { alg: self.alg.clone(), c: self.c.iter().map(|x| x * r).collect() }
    }

    /// Determinant of the regular representation.
    pub fn norm_q(&self) -> Rat {
        let m = self.regular_representation();
        det_q(&m)
    }

    pub fn pow_i(&self, k: i64) -> Option<RingElem> {
        let base = if k < 0 { self.inv_ref()? } else { self.clone() };
        let mut acc = self.one_like();
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul_ref(&base);
        }
        Some(acc)
    }
}

pub fn det_q(m: &QMat) -> Rat {
    let n = m.rows();
    let mut a = m.to_rows();
    let mut det = Rat::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return rat(0);
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        let inv = a[c][c].recip();
        for r in (c + 1)..n {
            let f = &a[r][c] * &inv;
            if f.is_zero() {
                continue;
            }
            for k in c..n {
                let v = &a[c][k] * &f;
                a[r][k] -= v;
            }
        }
    }
    det
}

impl Scalar for RingElem {
    fn zero_like(&self) -> Self {
        self.alg.zero()
    }
    fn one_like(&self) -> Self {
        self.alg.one()
    }
    fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }
    fn add_ref(&self, o: &Self) -> Self {
        RingElem { alg: self.alg.clone(), c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }
    fn sub_ref(&self, o: &Self) -> Self {
        RingElem { alg: self.alg.clone(), c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }
    fn mul_ref(&self, o: &Self) -> Self {
        RingElem { alg: self.alg.clone(), c: self.alg.mul_coords(&self.c, &o.c) }
    }
    fn neg_ref(&self) -> Self {
        RingElem { alg: self.alg.clone(), c: self.c.iter().map(|a| -a).collect() }
    }
    fn inv_ref(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.alg.dim == 1 {
            return Some(self.alg.elem(vec![self.c[0].recip()]));
        }
        let y = self.regular_representation().solve_right(&unit_vec(self.alg.dim, 0))?;
        Some(self.alg.elem(y))
    }
    fn from_int_like(&self, n: i64) -> Self {
        self.alg.from_int(n)
    }
}

/// Scalars of a division algebra together with the operations needed to
/// reason about its center (the field ℚ(F)).
pub trait CenterField: Scalar + Send + Sync {
    fn is_central(&self) -> bool;
    fn from_rat_like(&self, r: &Rat) -> Self;
    /// Rational value when the element lies in ℚ.
    fn rational_value(&self) -> Option<Rat>;
    /// Matrix of the ℚ-linear map `v ↦ A·v` on D^n.
    fn regular_matrix(a: &Mat<Self>) -> QMat;
    /// Monic minimal polynomial of `a` with central coefficients.
    fn min_poly_over_center(a: &Mat<Self>) -> Poly<Self>;
    /// Product of all ℚ-conjugates of a polynomial with central coefficients.
    fn norm_poly(p: &Poly<Self>) -> QPoly;
}

impl CenterField for Rat {
    fn is_central(&self) -> bool {
        true
    }
    fn from_rat_like(&self, r: &Rat) -> Self {
        r.clone()
    }
    fn rational_value(&self) -> Option<Rat> {
        Some(self.clone())
    }
    fn regular_matrix(a: &Mat<Self>) -> QMat {
        a.clone()
    }
    fn min_poly_over_center(a: &Mat<Self>) -> Poly<Self> {
        min_poly_q(a)
    }
    fn norm_poly(p: &Poly<Self>) -> QPoly {
        p.clone()
    }
}

impl CenterField for RingElem {
    fn is_central(&self) -> bool {
        RingElem::is_central(self)
    }
    fn from_rat_like(&self, r: &Rat) -> Self {
        self.alg.from_rat(r)
    }
    fn rational_value(&self) -> Option<Rat> {
        self.as_rational()
    }
    fn regular_matrix(a: &Mat<Self>) -> QMat {
        let n = a.rows();
        let d = a.get(0, 0).alg.dim;
        let mut out = QMat::zeros(n * d, a.cols() * d, &rat(0));
        for i in 0..n {
            for j in 0..a.cols() {
                let l = a.get(i, j).regular_representation();
                for r in 0..d {
                    for c in 0..d {
                        out.set(i * d + r, j * d + c, l.get(r, c).clone());
                    }
                }
            }
        }
        out
    }
    fn min_poly_over_center(a: &Mat<Self>) -> Poly<Self> {
        let alg = a.get(0, 0).alg.clone();
        let zero = alg.zero();
        if alg.is_commutative() {
            return krylov_min_poly(a, &zero, |vecs, target| {
                Mat::from_cols(vecs, &zero).solve_right(target)
            });
        }
        // center is ℚ: flatten coordinates and solve over ℚ
        let flat = |v: &[RingElem]| v.iter().flat_map(|x| x.c.clone()).collect::<Vec<Rat>>();
        krylov_min_poly(a, &zero, |vecs, target| {
            let cols: Vec<Vec<Rat>> = vecs.iter().map(|v| flat(v)).collect();
            let sol = QMat::from_cols(&cols, &rat(0)).solve_right(&flat(target))?;
            Some(sol.iter().map(|r| alg.from_rat(r)).collect())
        })
    }
    fn norm_poly(p: &Poly<Self>) -> QPoly {
        let alg = p.ctx().alg.clone();
        let zq = rat(0);
        match &alg.kind {
            RingKind::Quadratic { trace, .. } => {
                let a = rat_int(trace);
                // conjugation F ↦ trace − F
                let conj = p.map(&alg.zero(), |x| {
                    alg.elem(vec![&x.c[0] + &a * &x.c[1], -x.c[1].clone()])
                });
                let prod = p.mul(&conj);
                prod.map(&zq, |x| x.as_rational().expect("norm is rational"))
            }
            _ => p.map(&zq, |x| x.as_rational().expect("central coefficients are rational")),
        }
    }
}

/// Approximate moduli of the distinct complex roots of a rational polynomial
/// (Durand–Kerner on the squarefree part). Used only to steer exact searches.
pub fn root_moduli(p: &QPoly) -> Vec<f64> {
    if p.deg() == 0 {
        return Vec::new();
    }
    let sq = p.div_exact(&p.gcd(&p.derivative())).unwrap_or_else(|| p.clone()).monic();
    let n = sq.deg();
    let coeffs: Vec<f64> = sq.coeffs().iter().map(|c| c.to_f64().unwrap_or(f64::MAX)).collect();
    let eval = |z: Complex64| coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let radius = 1.0 + coeffs[..n].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut roots: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius * 0.5 + 0.1, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = Complex64::new(1e-12, 0.0);
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-14 {
            break;
        }
    }
    roots.iter().map(|z| z.norm()).collect()
}

/// Roots λ of `p` grouped by the relation `λ^m = F^k`.
#[derive(Clone, Debug)]
pub struct FrobeniusClass<T: Scalar> {
    pub m: u32,
    pub k: i64,
    /// Product of the linear-over-ℚ(F)-closure factors of `p` whose roots
    /// satisfy the relation, with multiplicity.
    pub factor: Poly<T>,
}

fn x_pow_mod<T: Scalar>(m: u32, p: &Poly<T>) -> Poly<T> {
    let x = Poly::x(p.ctx());
    let mut acc = Poly::one(p.ctx()).rem(p);
    for _ in 0..m {
        acc = acc.mul(&x).rem(p);
    }
    acc
}

fn center_pow<T: Scalar>(f: &T, k: i64) -> T {
    let base = if k < 0 { f.inv_ref().unwrap() } else { f.clone() };
    let mut acc = f.one_like();
    for _ in 0..k.unsigned_abs() {
        acc = acc.mul_ref(&base);
    }
    acc
}

/// Splits off, for m = 1..=m_bound in turn, all roots λ of `p` with
/// `λ^m = frob^k` for some integer k (k = 0 only when `include_roots_of_unity`).
/// Returns the classes (minimal m per root) and the remaining factor, whose
/// roots are multiplicatively independent of the Frobenius within the bound.
pub fn split_frobenius_classes<T: CenterField>(
    p: &Poly<T>,
    frob: &T,
    m_bound: u32,
    include_roots_of_unity: bool,
) -> (Vec<FrobeniusClass<T>>, Poly<T>) {
    let mut rest = p.monic();
    let mut classes = Vec::new();
    let frob_moduli = root_moduli(&T::norm_poly(&Poly::linear_root(frob)));
    for m in 1..=m_bound {
        if rest.deg() == 0 {
            break;
        }
        let moduli = root_moduli(&T::norm_poly(&rest));
        let mut ks: Vec<i64> = Vec::new();
        for &r in &moduli {
            for &f in &frob_moduli {
                if r <= 0.0 || (f.ln()).abs() < 1e-12 {
                    continue;
                }
                let est = m as f64 * r.ln() / f.ln();
                let lo = est.floor() as i64 - 1;
                for k in lo..=lo + 3 {
                    if !ks.contains(&k) {
                        ks.push(k);
                    }
                }
            }
        }
        ks.sort_unstable();
        if !include_roots_of_unity {
            ks.retain(|&k| k != 0);
        }
        let xm = x_pow_mod(m, &rest);
        for k in ks {
            if rest.deg() == 0 {
                break;
            }
            let target = xm.sub(&Poly::constant(center_pow(frob, k)));
            let mut factor = Poly::one(p.ctx());
            loop {
                let g = rest.gcd(&target.rem(&rest));
                if g.deg() == 0 {
                    break;
                }
                rest = rest.div_exact(&g).unwrap();
                factor = factor.mul(&g);
                if rest.deg() == 0 {
                    break;
                }
            }
            if factor.deg() > 0 {
                classes.push(FrobeniusClass { m, k, factor });
            }
        }
    }
    (classes, rest)
}

/// Minimal `(m, k)` with `λ^m = F^k` for every root λ of `min_poly`, checked
/// exactly by polynomial reduction; `None` if no such pair with m ≤ m_bound.
pub fn is_frobenius_power<T: CenterField>(min_poly: &Poly<T>, frob: &T, m_bound: u32) -> Option<(u32, i64)> {
    assert!(min_poly.deg() > 0, "eigenvalue polynomial must be non-constant");
    assert!(!min_poly.coeff(0).is_zero(), "eigenvalue must be nonzero");
    let (classes, rest) = split_frobenius_classes(min_poly, frob, m_bound, true);
    if rest.deg() > 0 || classes.len() != 1 {
        return None;
    }
    Some((classes[0].m, classes[0].k))
}

/// Exact check of `λ^m = F^k` for all roots of `min_poly`.
pub fn satisfies_power_relation<T: Scalar>(min_poly: &Poly<T>, frob: &T, m: u32, k: i64) -> bool {
    let r = x_pow_mod(m, min_poly).sub(&Poly::constant(center_pow(frob, k)));
    r.rem(min_poly).is_zero()
}

/// No root of `p` satisfies a relation `λ^m = F^k` with m ≤ m_bound.
pub fn is_nfp_poly<T: CenterField>(p: &Poly<T>, frob: &T, m_bound: u32) -> bool {
    split_frobenius_classes(p, frob, m_bound, true).0.is_empty()
}
