//! Sparse multivariate polynomials over GF(q) in graded lexicographic order
//! with t1 > t2 > ... .

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::scalar::{Int, Scalar};

use super::gf::{Gf, GfCtx};

/// Exponent vector ordered by total degree, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn divides(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone)]
pub struct MPoly {
    ctx: Arc<GfCtx>,
    nvars: usize,
    terms: BTreeMap<Mono, Gf>,
}

impl PartialEq for MPoly {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.terms == other.terms
    }
}

impl Eq for MPoly {}

impl MPoly {
    pub fn zero(ctx: &Arc<GfCtx>, nvars: usize) -> Self {
        MPoly { ctx: ctx.clone(), nvars, terms: BTreeMap::new() }
    }

    pub fn constant(c: Gf, nvars: usize) -> Self {
        let mut p = MPoly::zero(c.ctx(), nvars);
        if !c.is_zero() {
            p.terms.insert(Mono(vec![0; nvars]), c);
        }
        p
    }

    pub fn one(ctx: &Arc<GfCtx>, nvars: usize) -> Self {
        MPoly::constant(ctx.one(), nvars)
    }

    /// The variable t_{i+1}.
    pub fn var(ctx: &Arc<GfCtx>, nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = MPoly::zero(ctx, nvars);
        p.terms.insert(Mono(e), ctx.one());
        p
    }

    pub fn from_terms(ctx: &Arc<GfCtx>, nvars: usize, terms: Vec<(Vec<u32>, Gf)>) -> Self {
        let mut p = MPoly::zero(ctx, nvars);
        for (e, c) in terms {
            p.add_term(Mono(e), c);
        }
        p
    }

    fn add_term(&mut self, m: Mono, c: Gf) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = v.add_ref(&c);
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn ctx(&self) -> &Arc<GfCtx> {
        &self.ctx
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &Gf)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn constant_value(&self) -> Option<Gf> {
        if !self.is_constant() {
            return None;
        }
        Some(self.terms.values().next().cloned().unwrap_or_else(|| self.ctx.zero()))
    }

    pub fn is_one(&self) -> bool {
        self.constant_value().is_some_and(|c| c.is_one())
    }

    pub fn lead(&self) -> Option<(&Mono, &Gf)> {
        self.terms.iter().next_back()
    }

    pub fn lead_coeff(&self) -> Gf {
        self.lead().map(|(_, c)| c.clone()).unwrap_or_else(|| self.ctx.zero())
    }

    pub fn total_degree(&self) -> u32 {
        self.lead().map_or(0, |(m, _)| m.degree())
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m.0[v]).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        MPoly {
            ctx: self.ctx.clone(),
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg_ref())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Gf) -> Self {
        if s.is_zero() {
            return MPoly::zero(&self.ctx, self.nvars);
        }
        MPoly {
            ctx: self.ctx.clone(),
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.mul_ref(s))).collect(),
        }
    }

    fn mul_term(&self, m: &Mono, c: &Gf) -> Self {
        MPoly {
            ctx: self.ctx.clone(),
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(a, x)| {
                    let e = a.0.iter().zip(&m.0).map(|(i, j)| i + j).collect();
                    (Mono(e), x.mul_ref(c))
                })
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = MPoly::zero(&self.ctx, self.nvars);
        for (m, c) in &other.terms {
            for (a, x) in self.mul_term(m, c).terms {
                out.add_term(a, x);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = MPoly::one(&self.ctx, self.nvars);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    /// Scales to leading coefficient 1 (zero stays zero).
    pub fn monic(&self) -> Self {
        match self.lead() {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.inv_ref().unwrap()),
        }
    }

    /// Exact quotient `self / d`, `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        assert!(!d.is_zero(), "division by zero polynomial");
        let (dm, dc) = d.lead().unwrap();
        let inv = dc.inv_ref().unwrap();
        let mut rem = self.clone();
        let mut quot = MPoly::zero(&self.ctx, self.nvars);
        while let Some((m, c)) = rem.lead() {
            if !dm.divides(m) {
                return None;
            }
            let qm = Mono(m.0.iter().zip(&dm.0).map(|(a, b)| a - b).collect());
            let qc = c.mul_ref(&inv);
            rem = rem.sub(&d.mul_term(&qm, &qc));
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Coefficients in powers of t_{v+1}, each free of that variable.
    fn to_univariate(&self, v: usize) -> Vec<MPoly> {
        let mut out = vec![MPoly::zero(&self.ctx, self.nvars); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            let k = e[v] as usize;
            e[v] = 0;
            out[k].add_term(Mono(e), c.clone());
        }
        out
    }

    fn from_univariate(coeffs: &[MPoly], v: usize, ctx: &Arc<GfCtx>, nvars: usize) -> Self {
        let mut out = MPoly::zero(ctx, nvars);
        for (k, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; nvars];
            e[v] = k as u32;
            for (a, x) in c.mul_term(&Mono(e), &ctx.one()).terms {
                out.add_term(a, x);
            }
        }
        out
    }

    fn first_var(&self) -> Option<usize> {
        (0..self.nvars).find(|&v| self.degree_in(v) > 0)
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        let v = match (self.first_var(), other.first_var()) {
            (None, None) => return MPoly::one(&self.ctx, self.nvars),
            (Some(a), None) | (None, Some(a)) => a,
            (Some(a), Some(b)) => a.min(b),
        };
        let (ca, pa) = self.content_split(v);
        let (cb, pb) = other.content_split(v);
        let c = ca.gcd(&cb);
        let mut a = pa.to_univariate(v);
        let mut b = pb.to_univariate(v);
        if a.len() < b.len() {
            std::mem::swap(&mut a, &mut b);
        }
        let g = loop {
            if b.iter().all(|x| x.is_zero()) {
                break MPoly::from_univariate(&a, v, &self.ctx, self.nvars);
            }
            if b.len() == 1 {
                break MPoly::one(&self.ctx, self.nvars);
            }
            let r = pseudo_rem(&a, &b);
            let r = MPoly::from_univariate(&r, v, &self.ctx, self.nvars);
            a = b;
            b = if r.is_zero() { vec![r] } else { r.content_split(v).1.to_univariate(v) };
        };
        let g = g.content_split(v).1;
        c.mul(&g).monic()
    }

    /// `(content, primitive part)` with respect to t_{v+1}.
    fn content_split(&self, v: usize) -> (MPoly, MPoly) {
        let coeffs = self.to_univariate(v);
        let mut cont = MPoly::zero(&self.ctx, self.nvars);
        for c in &coeffs {
            cont = cont.gcd(c);
            if cont.is_one() {
                break;
            }
        }
        let prim = self.div_exact(&cont).expect("content divides");
        (cont, prim)
    }

    /// Evaluates at a point of an extension field, mapping coefficients with
    /// `coeff`.
    pub fn eval_with(&self, point: &[Gf], coeff: impl Fn(&Gf) -> Gf) -> Gf {
        let z = point[0].zero_like();
        let mut acc = z.clone();
        for (m, c) in &self.terms {
            let mut t = coeff(c);
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t = t.mul_ref(&x.pow(&Int::from(e)));
                }
            }
            acc = acc.add_ref(&t);
        }
        acc
    }

    pub fn eval(&self, point: &[Gf]) -> Gf {
        if point.is_empty() {
            return self.constant_value().unwrap_or_else(|| self.ctx.zero());
        }
        self.eval_with(point, |c| c.clone())
    }

    /// Sort key giving a deterministic total order on polynomials.
    pub fn sort_key(&self) -> Vec<(Mono, Int)> {
        self.terms.iter().rev().map(|(m, c)| (m.clone(), c.index())).collect()
    }

    pub fn fmt_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (m, c) in self.terms.iter().rev() {
            let vars: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    let name = names.get(i).cloned().unwrap_or_else(|| format!("t{}", i + 1));
                    if e == 1 {
                        name
                    } else {
                        format!("{name}^{e}")
                    }
                })
                .collect();
            let cs = c.to_string();
            let cs = if cs.contains('+') { format!("({cs})") } else { cs };
            parts.push(match (vars.is_empty(), c.is_one()) {
                (true, _) => cs,
                (false, true) => vars.join("*"),
                (false, false) => format!("{cs}*{}", vars.join("*")),
            });
        }
        parts.join(" + ")
    }
}

fn pseudo_rem(a: &[MPoly], b: &[MPoly]) -> Vec<MPoly> {
    let mut r: Vec<MPoly> = a.to_vec();
    let db = b.len() - 1;
    let lb = &b[db];
    while r.len() > db && !r.iter().all(|x| x.is_zero()) {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        let mut next: Vec<MPoly> = r.iter().map(|c| c.mul(lb)).collect();
        for (j, bj) in b.iter().enumerate() {
            next[shift + j] = next[shift + j].sub(&bj.mul(&lr));
        }
        while next.len() > 1 && next.last().unwrap().is_zero() {
            next.pop();
        }
        r = next;
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
    }
    r
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_with(&[]))
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_with(&[]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Arc<GfCtx>, MPoly, MPoly) {
        let f = GfCtx::new(5, 1).unwrap();
        let t1 = MPoly::var(&f, 2, 0);
        let t2 = MPoly::var(&f, 2, 1);
        (f, t1, t2)
    }

    #[test]
    fn grlex_lead() {
        let (_, t1, t2) = setup();
        let p = t1.add(&t2.pow(2));
        assert_eq!(p.lead().unwrap().0 .0, vec![0, 2]);
        let q = t1.mul(&t2).add(&t2.pow(2));
        assert_eq!(q.lead().unwrap().0 .0, vec![1, 1]);
    }

    #[test]
    fn gcd_bivariate() {
        let (f, t1, t2) = setup();
        let one = MPoly::one(&f, 2);
        let a = t1.add(&t2).mul(&t1.sub(&one));
        let b = t1.add(&t2).mul(&t2.add(&one)).mul(&t1);
        let g = a.gcd(&b);
        assert_eq!(g, t1.add(&t2));
        assert!(a.div_exact(&g).is_some());
        assert!(t1.div_exact(&t2).is_none());
    }

    #[test]
    fn gcd_coprime_is_one() {
        let (f, t1, _) = setup();
        let one = MPoly::one(&f, 2);
        assert!(t1.gcd(&t1.add(&one)).is_one());
    }
}
