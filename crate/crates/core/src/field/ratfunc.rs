//! Elements of GF(q)(t1..td) in lowest terms with monic denominator.

use std::fmt;
use std::sync::Arc;

use crate::scalar::Scalar;

use super::gf::{Gf, GfCtx};
use super::mpoly::MPoly;
use super::FieldError;

#[derive(Clone, PartialEq, Eq)]
pub struct RationalFunction {
    num: MPoly,
    den: MPoly,
}

impl RationalFunction {
    pub fn new(num: MPoly, den: MPoly) -> Result<Self, FieldError> {
        if den.is_zero() {
            return Err(FieldError::Domain("zero denominator".into()));
        }
        let g = num.gcd(&den);
        let num = num.div_exact(&g).unwrap();
        let den = den.div_exact(&g).unwrap();
        let inv = den.lead_coeff().inv_ref().unwrap();
        Ok(RationalFunction { num: num.scale(&inv), den: den.scale(&inv) })
    }

    pub fn from_poly(p: MPoly) -> Self {
        let den = MPoly::one(p.ctx(), p.nvars());
        RationalFunction { num: p, den }
    }

    pub fn constant(c: Gf, nvars: usize) -> Self {
        Self::from_poly(MPoly::constant(c, nvars))
    }

    pub fn one(ctx: &Arc<GfCtx>, nvars: usize) -> Self {
        Self::from_poly(MPoly::one(ctx, nvars))
    }

    pub fn var(ctx: &Arc<GfCtx>, nvars: usize, i: usize) -> Self {
        Self::from_poly(MPoly::var(ctx, nvars, i))
    }

    pub fn num(&self) -> &MPoly {
        &self.num
    }

    pub fn den(&self) -> &MPoly {
        &self.den
    }

    pub fn ctx(&self) -> &Arc<GfCtx> {
        self.num.ctx()
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
        .unwrap()
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        RationalFunction { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(self.num.mul(&o.num), self.den.mul(&o.den)).unwrap()
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::Domain("inverse of zero".into()));
        }
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &Self) -> Result<Self, FieldError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, n: i64) -> Result<Self, FieldError> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let k = u32::try_from(n.unsigned_abs())
            .map_err(|_| FieldError::Domain("exponent too large".into()))?;
        Ok(RationalFunction { num: base.num.pow(k), den: base.den.pow(k) })
    }

    /// Value at a point, `None` when the denominator vanishes there.
    pub fn eval_with(&self, point: &[Gf], coeff: impl Fn(&Gf) -> Gf) -> Option<Gf> {
        let d = self.den.eval_with(point, &coeff);
        let n = self.num.eval_with(point, &coeff);
        d.inv_ref().map(|di| n.mul_ref(&di))
    }

    pub fn fmt_with(&self, names: &[String]) -> String {
        let n = self.num.fmt_with(names);
        if self.den.is_one() {
            return n;
        }
        let wrap = |s: String, p: &MPoly| if p.terms().count() > 1 { format!("({s})") } else { s };
        format!("{}/{}", wrap(n, &self.num), wrap(self.den.fmt_with(names), &self.den))
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_with(&[]))
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_with(&[]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_is_idempotent() {
        let f = GfCtx::new(3, 1).unwrap();
        let t = MPoly::var(&f, 1, 0);
        let one = MPoly::one(&f, 1);
        // (2t^2 - 2)/(2t - 2) = t + 1
        let num = t.pow(2).sub(&one).scale(&f.from_int(2));
        let den = t.sub(&one).scale(&f.from_int(2));
        let r = RationalFunction::new(num, den).unwrap();
        assert_eq!(r, RationalFunction::from_poly(t.add(&one)));
        let again = RationalFunction::new(r.num().clone(), r.den().clone()).unwrap();
        assert_eq!(again, r);
    }
}
