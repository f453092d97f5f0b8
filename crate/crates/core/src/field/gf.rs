//! Finite fields GF(p^e) as F_p[x]/(f) with a monic irreducible `f`.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::poly::Poly;
use crate::scalar::{int_pow, is_prime_u64, prime_factors, Int, Scalar};

use super::FieldError;

/// Dense F_p polynomial helpers on coefficient vectors (lowest degree first).
mod fp {
    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u128; a.len() + b.len() - 1];
        let pp = p as u128;
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] += x as u128 * y as u128;
            }
        }
        trim(out.into_iter().map(|v| (v % pp) as u64).collect())
    }

    /// `a·b mod m` for reduced `a`, `b` and monic `m`, padded to `deg m`
    /// coefficients. Reductions are deferred: one `%` per coefficient.
    pub fn mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let e = m.len() - 1;
        let pp = p as u128;
        let mut acc = vec![0u128; a.len() + b.len()];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let x = x as u128;
            for (j, &y) in b.iter().enumerate() {
                acc[i + j] += x * y as u128;
            }
        }
        for k in (e..acc.len()).rev() {
            let c = acc[k] % pp;
            if c == 0 {
                continue;
            }
            // x^k ≡ −Σ m_j x^{k−e+j}
            for (j, &mj) in m[..e].iter().enumerate() {
                acc[k - e + j] += c * ((p - mj) % p) as u128;
            }
        }
        acc.truncate(e);
        acc.resize(e, 0);
        acc.into_iter().map(|v| (v % pp) as u64).collect()
    }

    pub fn inv_mod(a: u64, p: u64) -> u64 {
        pow_mod(a, p - 2, p)
    }

    pub fn pow_mod(a: u64, mut e: u64, p: u64) -> u64 {
        let pp = p as u128;
        let mut r = 1u128;
        let mut b = (a % p) as u128;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % pp;
            }
            b = b * b % pp;
            e >>= 1;
        }
        r as u64
    }

    /// Remainder of `a` modulo a nonzero `m`.
    pub fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut r = trim(a.to_vec());
        let dm = m.len() - 1;
        let inv = inv_mod(m[dm], p);
        while r.len() > dm {
            let k = r.len() - 1 - dm;
            let c = (*r.last().unwrap() as u128 * inv as u128 % p as u128) as u64;
            for (j, &mj) in m.iter().enumerate() {
                let sub = (c as u128 * mj as u128 % p as u128) as u64;
                r[k + j] = (r[k + j] + p - sub) % p;
            }
            r = trim(r);
        }
        r
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        trim(
            (0..n)
                .map(|i| {
                    let x = a.get(i).copied().unwrap_or(0);
                    let y = b.get(i).copied().unwrap_or(0);
                    (x + p - y) % p
                })
                .collect(),
        )
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut x = trim(a.to_vec());
        let mut y = trim(b.to_vec());
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        if let Some(&l) = x.last() {
            let inv = inv_mod(l, p);
            x = x.iter().map(|&c| (c as u128 * inv as u128 % p as u128) as u64).collect();
        }
        x
    }

    /// `base^(p^k) mod m`.
    pub fn frobenius_power(base: &[u64], k: usize, m: &[u64], p: u64) -> Vec<u64> {
        let mut y = rem(base, m, p);
        for _ in 0..k {
            let mut acc = vec![1u64];
            let mut b = y.clone();
            let mut e = p;
            while e > 0 {
                if e & 1 == 1 {
                    acc = rem(&mul(&acc, &b, p), m, p);
                }
                b = rem(&mul(&b, &b, p), m, p);
                e >>= 1;
            }
            y = acc;
        }
        y
    }
}

/// Rabin's irreducibility test for a monic `f` over F_p.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let n = f.len() - 1;
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let x = vec![0, 1];
    for r in prime_factors(&Int::from(n)) {
        let k = n / r.to_usize().unwrap();
        let h = fp::sub(&fp::frobenius_power(&x, k, f, p), &x, p);
        if fp::gcd(f, &h, p).len() != 1 {
            return false;
        }
    }
    fp::sub(&fp::frobenius_power(&x, n, f, p), &x, p).is_empty()
}

struct Primitive {
    generator: Vec<u64>,
    group_order: u64,
    baby_steps: OnceLock<HashMap<Vec<u64>, u64>>,
}

pub struct GfCtx {
    p: u64,
    e: usize,
    modulus: Vec<u64>,
    order: Int,
    primitive: OnceLock<Primitive>,
}

impl fmt::Debug for GfCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{}) mod {:?}", self.p, self.e, self.modulus)
    }
}

impl GfCtx {
    /// GF(p^e) with the smallest monic irreducible modulus (coefficients
    /// compared as base-p digits, constant term least significant).
    pub fn new(p: u64, e: usize) -> Result<Arc<Self>, FieldError> {
        check_prime(p)?;
        if e == 0 {
            return Err(FieldError::Domain("extension degree must be positive".into()));
        }
        if e == 1 {
            return Self::with_modulus(p, vec![0, 1]);
        }
        let total = int_pow(&Int::from(p), e as u64);
        let mut idx = Int::zero();
        while idx < total {
            let mut coeffs = digits(&idx, p, e);
            coeffs.push(1);
            if coeffs[0] != 0 && is_irreducible(&coeffs, p) {
                return Self::with_modulus(p, coeffs);
            }
            idx += 1u32;
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<Arc<Self>, FieldError> {
        check_prime(p)?;
        let modulus: Vec<u64> = fp::trim(modulus.into_iter().map(|c| c % p).collect());
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(FieldError::Domain(
                "defining polynomial must be monic of positive degree".into(),
            ));
        }
        if !is_irreducible(&modulus, p) {
            return Err(FieldError::Domain("defining polynomial is reducible".into()));
        }
        let e = modulus.len() - 1;
        Ok(Arc::new(GfCtx {
            p,
            e,
            modulus,
            order: int_pow(&Int::from(p), e as u64),
            primitive: OnceLock::new(),
        }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Number of elements, p^e.
    pub fn order(&self) -> &Int {
        &self.order
    }

    pub fn zero(self: &Arc<Self>) -> Gf {
        Gf { ctx: self.clone(), c: vec![0; self.e] }
    }

    pub fn one(self: &Arc<Self>) -> Gf {
        self.from_int(1)
    }

    pub fn from_int(self: &Arc<Self>, n: i64) -> Gf {
        let mut c = vec![0; self.e];
        c[0] = n.rem_euclid(self.p as i64) as u64;
        Gf { ctx: self.clone(), c }
    }

    pub fn from_big(self: &Arc<Self>, n: &Int) -> Gf {
        let r = n.mod_floor(&Int::from(self.p)).to_u64().unwrap();
        let mut c = vec![0; self.e];
        c[0] = r;
        Gf { ctx: self.clone(), c }
    }

    /// The class of `x`, i.e. the declared generator `g` of the extension.
    pub fn generator(self: &Arc<Self>) -> Gf {
        let mut c = vec![0u64; self.e + 1];
        c[1] = 1;
        Gf { ctx: self.clone(), c: self.reduce(c) }
    }

    pub fn from_coords(self: &Arc<Self>, coords: &[u64]) -> Gf {
        let c = self.reduce(coords.iter().map(|x| x % self.p).collect());
        Gf { ctx: self.clone(), c }
    }

    /// Element with base-p digit encoding `idx` (0 ≤ idx < q).
    pub fn from_index(self: &Arc<Self>, idx: &Int) -> Gf {
        Gf { ctx: self.clone(), c: digits(idx, self.p, self.e) }
    }

    pub fn random<R: Rng>(self: &Arc<Self>, rng: &mut R) -> Gf {
        let c = (0..self.e).map(|_| rng.gen_range(0..self.p)).collect();
        Gf { ctx: self.clone(), c }
    }

    /// All elements in index order (desk-scale fields only).
    pub fn elements(self: &Arc<Self>) -> impl Iterator<Item = Gf> + '_ {
        let q = self.order.to_u64().expect("field too large to enumerate");
        (0..q).map(move |i| self.from_index(&Int::from(i)))
    }

    fn reduce(&self, c: Vec<u64>) -> Vec<u64> {
        let mut r = fp::rem(&c, &self.modulus, self.p);
        r.resize(self.e, 0);
        r
    }

    fn primitive(self: &Arc<Self>) -> &Primitive {
        self.primitive.get_or_init(|| {
            let n = (&self.order - 1u32)
                .to_u64()
                .expect("multiplicative group too large for discrete logarithms");
            let factors = prime_factors(&Int::from(n));
            let mut idx = 1u64;
            loop {
                let g = self.from_index(&Int::from(idx));
                if !g.is_zero()
                    && factors
                        .iter()
                        .all(|r| !g.pow(&(Int::from(n) / r)).is_one())
                {
                    return Primitive {
                        generator: g.c,
                        group_order: n,
                        baby_steps: OnceLock::new(),
                    };
                }
                idx += 1;
            }
        })
    }

    /// The smallest (by index) generator of the multiplicative group.
    pub fn primitive_element(self: &Arc<Self>) -> Gf {
        Gf { ctx: self.clone(), c: self.primitive().generator.clone() }
    }

    /// Discrete logarithm to the base [`Self::primitive_element`] by
    /// baby-step/giant-step; `None` for zero.
    pub fn dlog(self: &Arc<Self>, x: &Gf) -> Option<u64> {
        if x.is_zero() {
            return None;
        }
        let prim = self.primitive();
        let n = prim.group_order;
        let m = (n as f64).sqrt().ceil() as u64 + 1;
        let g = self.primitive_element();
        let table = prim.baby_steps.get_or_init(|| {
            let mut t = HashMap::new();
            let mut cur = self.one();
            for j in 0..m {
                t.entry(cur.c.clone()).or_insert(j);
                cur = cur.mul_ref(&g);
            }
            t
        });
        let giant = g.pow(&Int::from(m)).inv_ref().unwrap();
        let mut gamma = x.clone();
        for i in 0..=m {
            if let Some(&j) = table.get(&gamma.c) {
                return Some((i * m + j) % n);
            }
            gamma = gamma.mul_ref(&giant);
        }
        unreachable!("primitive element generates the group")
    }
}

fn check_prime(p: u64) -> Result<(), FieldError> {
    if !is_prime_u64(p) || p > u32::MAX as u64 {
        return Err(FieldError::Domain(format!("p must be prime (got {p})")));
    }
    Ok(())
}

fn digits(n: &Int, p: u64, len: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(len);
    let mut n = n.clone();
    let pb = Int::from(p);
    for _ in 0..len {
        let (q, r) = n.div_mod_floor(&pb);
        out.push(r.to_u64().unwrap());
        n = q;
    }
    out
}

#[derive(Clone)]
pub struct Gf {
    ctx: Arc<GfCtx>,
    c: Vec<u64>,
}

impl Gf {
    pub fn ctx(&self) -> &Arc<GfCtx> {
        &self.ctx
    }

    pub fn coords(&self) -> &[u64] {
        &self.c
    }

    pub fn index(&self) -> Int {
        let p = Int::from(self.ctx.p);
        self.c.iter().rev().fold(Int::zero(), |acc, &d| acc * &p + d)
    }

    /// `self^n`; negative exponents invert.
    pub fn pow(&self, n: &Int) -> Gf {
        if n < &Int::zero() {
            return self.inv_ref().expect("zero has no inverse").pow(&-n);
        }
        let mut acc = self.one_like();
        let bits = n.bits();
        for i in (0..bits).rev() {
            acc = acc.mul_ref(&acc);
            if n.bit(i) {
                acc = acc.mul_ref(self);
            }
        }
        acc
    }

    pub fn pow_u64(&self, n: u64) -> Gf {
        self.pow(&Int::from(n))
    }

    /// Multiplicative order (desk-scale fields only).
    pub fn multiplicative_order(&self) -> Option<u64> {
        if self.is_zero() {
            return None;
        }
        let n = (self.ctx.order() - 1u32).to_u64()?;
        let mut ord = n;
        for r in prime_factors(&Int::from(n)) {
            let r = r.to_u64().unwrap();
            while ord % r == 0 && self.pow_u64(ord / r).is_one() {
                ord /= r;
            }
        }
        Some(ord)
    }
}

impl PartialEq for Gf {
    fn eq(&self, other: &Self) -> bool {
        self.c == other.c && self.ctx.p == other.ctx.p && self.ctx.modulus == other.ctx.modulus
    }
}

impl Eq for Gf {}

impl Hash for Gf {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.c.hash(state);
    }
}

impl fmt::Debug for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "g".to_string(),
                (1, c) => format!("{c}*g"),
                (i, 1) => format!("g^{i}"),
                (i, c) => format!("{c}*g^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl Scalar for Gf {
    fn zero_like(&self) -> Self {
        self.ctx.zero()
    }
    fn one_like(&self) -> Self {
        self.ctx.one()
    }
    fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }
    fn is_one(&self) -> bool {
        self.c[0] == 1 && self.c[1..].iter().all(|&x| x == 0)
    }
    fn add_ref(&self, other: &Self) -> Self {
        let p = self.ctx.p;
        let c = self.c.iter().zip(&other.c).map(|(a, b)| (a + b) % p).collect();
        Gf { ctx: self.ctx.clone(), c }
    }
    fn sub_ref(&self, other: &Self) -> Self {
        let p = self.ctx.p;
        let c = self.c.iter().zip(&other.c).map(|(a, b)| (a + p - b) % p).collect();
        Gf { ctx: self.ctx.clone(), c }
    }
    fn mul_ref(&self, other: &Self) -> Self {
        let p = self.ctx.p;
        if self.ctx.e == 1 {
            let c = vec![(self.c[0] as u128 * other.c[0] as u128 % p as u128) as u64];
            return Gf { ctx: self.ctx.clone(), c };
        }
        Gf { ctx: self.ctx.clone(), c: fp::mulmod(&self.c, &other.c, &self.ctx.modulus, p) }
    }
    fn neg_ref(&self) -> Self {
        let p = self.ctx.p;
        let c = self.c.iter().map(|&a| (p - a) % p).collect();
        Gf { ctx: self.ctx.clone(), c }
    }
    fn inv_ref(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.ctx.e == 1 {
            let c = vec![fp::inv_mod(self.c[0], self.ctx.p)];
            return Some(Gf { ctx: self.ctx.clone(), c });
        }
        Some(self.pow(&(self.ctx.order() - 2u32)))
    }
    fn from_int_like(&self, n: i64) -> Self {
        self.ctx.from_int(n)
    }
}

fn poly_powmod(base: &Poly<Gf>, exp: &Int, m: &Poly<Gf>) -> Poly<Gf> {
    let mut acc = Poly::one(base.ctx());
    let b = base.rem(m);
    for i in (0..exp.bits()).rev() {
        acc = acc.mul(&acc).rem(m);
        if exp.bit(i) {
            acc = acc.mul(&b).rem(m);
        }
    }
    acc
}

/// All roots in `field` of a polynomial that splits into distinct linear
/// factors there (equal-degree splitting with a fixed internal seed).
fn split_roots(f: &Poly<Gf>, field: &Arc<GfCtx>, rng: &mut ChaCha8Rng) -> Vec<Gf> {
    let f = f.monic();
    match f.deg() {
        0 => return Vec::new(),
        1 => return vec![f.coeff(0).neg_ref()],
        _ => {}
    }
    let z = field.zero();
    loop {
        let r = field.random(rng);
        let h = if field.p() == 2 {
            // trace of r·x
            let rx = Poly::new(vec![z.clone(), r], &z);
            let mut t = rx.rem(&f);
            let mut acc = t.clone();
            for _ in 1..field.e() {
                t = t.mul(&t).rem(&f);
                acc = acc.add(&t);
            }
            acc
        } else {
            let lin = Poly::new(vec![r, field.one()], &z);
            let half = (field.order() - 1u32) / 2u32;
            poly_powmod(&lin, &half, &f).sub(&Poly::one(&z))
        };
        let g = f.gcd(&h);
        if g.deg() > 0 && g.deg() < f.deg() {
            let rest = f.div_exact(&g).unwrap();
            let mut out = split_roots(&g, field, rng);
            out.extend(split_roots(&rest, field, rng));
            return out;
        }
    }
}

/// Field embedding GF(p^e) → GF(p^E) for e | E, sending the generator of
/// the small field to the smallest root of its modulus in the large field.
#[derive(Clone, Debug)]
pub struct Embedding {
    image_of_generator: Gf,
    target: Arc<GfCtx>,
}

impl Embedding {
    pub fn new(small: &Arc<GfCtx>, big: &Arc<GfCtx>) -> Result<Self, FieldError> {
        if small.p() != big.p() || !big.e().is_multiple_of(small.e()) {
            return Err(FieldError::Domain(format!(
                "GF({}^{}) does not embed in GF({}^{})",
                small.p(),
                small.e(),
                big.p(),
                big.e()
            )));
        }
        let z = big.zero();
        let f = Poly::new(small.modulus().iter().map(|&c| big.from_int(c as i64)).collect(), &z);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut roots = split_roots(&f, big, &mut rng);
        roots.sort_by_key(|r| r.index());
        Ok(Embedding { image_of_generator: roots[0].clone(), target: big.clone() })
    }

    pub fn apply(&self, x: &Gf) -> Gf {
        let mut acc = self.target.zero();
        for &c in x.coords().iter().rev() {
            acc = acc.mul_ref(&self.image_of_generator).add_ref(&self.target.from_int(c as i64));
        }
        acc
    }
}

impl Gf {
    /// p-th power map.
    pub fn frobenius(&self) -> Gf {
        self.pow_u64(self.ctx.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_field_basics() {
        let f = GfCtx::new(5, 1).unwrap();
        let two = f.from_int(2);
        assert_eq!(f.primitive_element(), two);
        assert_eq!(f.dlog(&two), Some(1));
        assert_eq!(f.dlog(&f.from_int(4)), Some(2));
        assert_eq!(two.inv_ref().unwrap(), f.from_int(3));
    }

    #[test]
    fn extension_field_dlog_roundtrip() {
        let f = GfCtx::new(3, 2).unwrap();
        let g = f.primitive_element();
        for x in f.elements().skip(1) {
            let k = f.dlog(&x).unwrap();
            assert_eq!(g.pow_u64(k), x);
            assert_eq!(x.mul_ref(&x.inv_ref().unwrap()), f.one());
        }
    }

    #[test]
    fn rejects_composite_and_reducible() {
        assert!(GfCtx::new(4, 1).is_err());
        assert!(GfCtx::with_modulus(2, vec![1, 0, 1]).is_err());
        assert!(GfCtx::with_modulus(2, vec![1, 1, 1]).is_ok());
    }

    #[test]
    fn embedding_is_homomorphism() {
        let small = GfCtx::new(2, 2).unwrap();
        let big = GfCtx::new(2, 6).unwrap();
        let emb = Embedding::new(&small, &big).unwrap();
        let elems: Vec<Gf> = small.elements().collect();
        for a in &elems {
            for b in &elems {
                assert_eq!(emb.apply(&a.mul_ref(b)), emb.apply(a).mul_ref(&emb.apply(b)));
                assert_eq!(emb.apply(&a.add_ref(b)), emb.apply(a).add_ref(&emb.apply(b)));
            }
        }
        let small3 = GfCtx::new(3, 2).unwrap();
        let big3 = GfCtx::new(3, 4).unwrap();
        let emb3 = Embedding::new(&small3, &big3).unwrap();
        let g = small3.generator();
        let lhs = emb3.apply(&g.mul_ref(&g));
        assert_eq!(lhs, emb3.apply(&g).mul_ref(&emb3.apply(&g)));
    }
}
