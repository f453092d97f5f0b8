//! Dense univariate polynomials over a [`Scalar`].
//!
//! Coefficients are stored lowest degree first. Callers that work over a
//! noncommutative algebra must keep coefficients central; all routines here
//! multiply coefficients in the natural order and never reorder factors.

use crate::scalar::{Rat, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T: Scalar> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Poly<T> {
    /// Builds a polynomial, trimming trailing zeros. `zero` supplies context
    /// for the zero polynomial when `coeffs` is empty.
    pub fn new(mut coeffs: Vec<T>, zero: &T) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(zero.zero_like());
        }
        Poly { coeffs }
    }

    pub fn constant(c: T) -> Self {
        let z = c.zero_like();
        Poly::new(vec![c], &z)
    }

    pub fn zero(ctx: &T) -> Self {
        Poly::new(Vec::new(), ctx)
    }

    pub fn one(ctx: &T) -> Self {
        Poly::constant(ctx.one_like())
    }

    /// The monomial `x`.
    pub fn x(ctx: &T) -> Self {
        Poly::new(vec![ctx.zero_like(), ctx.one_like()], ctx)
    }

    /// `x - a`.
    pub fn linear_root(a: &T) -> Self {
        Poly::new(vec![a.neg_ref(), a.one_like()], a)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn ctx(&self) -> &T {
        &self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn deg(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn lead(&self) -> &T {
        self.coeffs.last().unwrap()
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| self.ctx().zero_like())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|i| self.coeff(i).add_ref(&other.coeff(i)))
            .collect();
        Poly::new(c, self.ctx())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|i| self.coeff(i).sub_ref(&other.coeff(i)))
            .collect();
        Poly::new(c, self.ctx())
    }

    pub fn neg(&self) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.neg_ref()).collect(), self.ctx())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.ctx());
        }
        let z = self.ctx().zero_like();
        let mut c = vec![z.clone(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] = c[i + j].add_ref(&a.mul_ref(b));
            }
        }
        Poly::new(c, &z)
    }

    pub fn scale(&self, s: &T) -> Self {
        Poly::new(self.coeffs.iter().map(|c| s.mul_ref(c)).collect(), self.ctx())
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = Poly::one(self.ctx());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Euclidean division by a nonzero polynomial with invertible leading
    /// coefficient.
    pub fn div_rem(&self, other: &Self) -> (Self, Self) {
        assert!(!other.is_zero(), "polynomial division by zero");
        let inv_lead = other.lead().inv_ref().expect("leading coefficient not invertible");
        let z = self.ctx().zero_like();
        let mut rem = self.coeffs.clone();
        let db = other.deg();
        if self.is_zero() || self.deg() < db {
            return (Poly::zero(&z), self.clone());
        }
        let mut quot = vec![z.clone(); self.deg() - db + 1];
        for k in (0..quot.len()).rev() {
            let c = rem[k + db].mul_ref(&inv_lead);
            if c.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                rem[k + j] = rem[k + j].sub_ref(&c.mul_ref(b));
            }
            quot[k] = c;
        }
        rem.truncate(db.max(1));
        (Poly::new(quot, &z), Poly::new(rem, &z))
    }

    pub fn rem(&self, other: &Self) -> Self {
        self.div_rem(other).1
    }

    /// Exact quotient, `None` if `other` does not divide `self`.
    pub fn div_exact(&self, other: &Self) -> Option<Self> {
        let (q, r) = self.div_rem(other);
        r.is_zero().then_some(q)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.lead().inv_ref().unwrap();
        self.scale(&inv)
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Returns `(g, s, t)` with `s·self + t·other = g`, `g` monic.
    pub fn ext_gcd(&self, other: &Self) -> (Self, Self, Self) {
        let ctx = self.ctx();
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Poly::one(ctx), Poly::zero(ctx));
        let (mut t0, mut t1) = (Poly::zero(ctx), Poly::one(ctx));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let s2 = s0.sub(&q.mul(&s1));
            let t2 = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
            t0 = t1;
            t1 = t2;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = r0.lead().inv_ref().unwrap();
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = self.ctx().zero_like();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_ref(x).add_ref(c);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.from_int_like(i as i64).mul_ref(c))
            .collect();
        Poly::new(c, self.ctx())
    }

    /// Multiplicity of `root` as a root of `self` (0 when `self` is zero).
    pub fn root_multiplicity(&self, root: &T) -> usize {
        if self.is_zero() {
            return 0;
        }
        let lin = Poly::linear_root(root);
        let mut p = self.clone();
        let mut k = 0;
        while let Some(q) = p.div_exact(&lin) {
            p = q;
            k += 1;
        }
        k
    }

    pub fn map<U: Scalar>(&self, zero: &U, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly::new(self.coeffs.iter().map(f).collect(), zero)
    }
}

pub type QPoly = Poly<Rat>;

pub fn qpoly(coeffs: &[i64]) -> QPoly {
    let z = crate::scalar::rat(0);
    Poly::new(coeffs.iter().map(|&c| crate::scalar::rat(c)).collect(), &z)
}

/// `x^n - c`.
pub fn binomial<T: Scalar>(n: usize, c: &T) -> Poly<T> {
    let mut coeffs = vec![c.zero_like(); n + 1];
    coeffs[0] = c.neg_ref();
    coeffs[n] = c.one_like().add_ref(&coeffs[n]);
    Poly::new(coeffs, c)
}

/// The n-th cyclotomic polynomial over ℚ.
pub fn cyclotomic(n: u64) -> QPoly {
    let z = crate::scalar::rat(0);
    let mut p = binomial(n as usize, &crate::scalar::rat(1));
    for d in 1..n {
        if n.is_multiple_of(d) {
            p = p.div_exact(&cyclotomic(d)).expect("cyclotomic divisibility");
        }
    }
    Poly::new(p.coeffs().to_vec(), &z)
}
