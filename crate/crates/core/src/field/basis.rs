//! Coprime bases by gcd refinement, exponent coordinates and multiplicative
//! relations among elements of K^*.

use std::sync::Arc;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::lattice::{integer_kernel, IntMat};
use crate::scalar::{frac, rat_int, Int, Rat, Scalar};

use super::gf::GfCtx;
use super::mpoly::MPoly;
use super::ratfunc::RationalFunction;
use super::FieldError;

/// Pairwise coprime, monic, non-constant polynomials.
#[derive(Clone, Debug)]
pub struct CoprimeBasis {
    ctx: Arc<GfCtx>,
    nvars: usize,
    elems: Vec<MPoly>,
}

impl PartialEq for CoprimeBasis {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.elems == other.elems
    }
}

impl CoprimeBasis {
    pub fn empty(ctx: &Arc<GfCtx>, nvars: usize) -> Self {
        CoprimeBasis { ctx: ctx.clone(), nvars, elems: Vec::new() }
    }

    pub fn elems(&self) -> &[MPoly] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn ctx(&self) -> &Arc<GfCtx> {
        &self.ctx
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Modulus `q - 1` of the constant subgroup F_q^*.
    pub fn torsion_modulus(&self) -> Int {
        self.ctx.order() - 1u32
    }

    /// Rebuilds `ζ·Π f_j^{e_j}` from integer exponents and a torsion value
    /// whose denominator divides `q - 1`.
    pub fn reconstruct(&self, exps: &[Int], tors: &Rat) -> Result<RationalFunction, FieldError> {
        let n = self.torsion_modulus();
        let k = frac(tors) * rat_int(&n);
        if !k.is_integer() {
            return Err(FieldError::Domain(format!("torsion {tors} is not in F_q^*")));
        }
        let c = self.ctx.primitive_element().pow(&k.to_integer());
        let mut acc = RationalFunction::constant(c, self.nvars);
        for (f, e) in self.elems.iter().zip(exps) {
            let e: i64 = e.try_into().map_err(|_| FieldError::Domain("exponent too large".into()))?;
            acc = acc.mul(&RationalFunction::from_poly(f.clone()).pow(e)?);
        }
        Ok(acc)
    }
}

/// Refines `polys` into a pairwise coprime family generating the same
/// multiplicative group modulo constants.
fn refine(polys: Vec<MPoly>) -> Vec<MPoly> {
    let mut list: Vec<MPoly> = polys.into_iter().filter(|p| !p.is_constant()).map(|p| p.monic()).collect();
    'outer: loop {
        for i in 0..list.len() {
            for j in (i + 1)..list.len() {
                let g = list[i].gcd(&list[j]);
                if g.is_constant() {
                    continue;
                }
                let a = list[i].div_exact(&g).unwrap();
                let b = list[j].div_exact(&g).unwrap();
                list.remove(j);
                list.remove(i);
                for p in [a, b, g] {
                    if !p.is_constant() {
                        list.push(p.monic());
                    }
                }
                continue 'outer;
            }
        }
        break;
    }
    list.sort_by_key(|p| p.sort_key());
    list.dedup();
    list
}

pub fn coprime_basis(elems: &[RationalFunction]) -> Result<CoprimeBasis, FieldError> {
    let first = elems
        .first()
        .ok_or_else(|| FieldError::Domain("coprime basis of an empty family".into()))?;
    if elems.iter().any(|x| x.is_zero()) {
        return Err(FieldError::Domain("zero element has no exponent coordinates".into()));
    }
    let polys = elems.iter().flat_map(|x| [x.num().clone(), x.den().clone()]).collect();
    Ok(CoprimeBasis { ctx: first.ctx().clone(), nvars: first.nvars(), elems: refine(polys) })
}

/// Extends `basis` so that it also covers `extra` (pairwise coprime again).
pub fn extend_basis(basis: &CoprimeBasis, extra: &[RationalFunction]) -> CoprimeBasis {
    let mut polys = basis.elems.clone();
    polys.extend(extra.iter().flat_map(|x| [x.num().clone(), x.den().clone()]));
    CoprimeBasis { ctx: basis.ctx.clone(), nvars: basis.nvars, elems: refine(polys) }
}

/// Exponent of every element of `from` expressed over `to`, as an integer
/// matrix (rows = elements of `from`). `to` must refine `from`.
pub fn transition_matrix(from: &CoprimeBasis, to: &CoprimeBasis) -> Result<IntMat, FieldError> {
    from.elems
        .iter()
        .map(|f| {
            let (e, _) = to_exponents(&RationalFunction::from_poly(f.clone()), to)?;
            Ok(e)
        })
        .collect()
}

fn strip(p: &MPoly, basis: &CoprimeBasis, exps: &mut [Int], sign: i64) -> MPoly {
    let mut rest = p.clone();
    for (k, f) in basis.elems.iter().enumerate() {
        while let Some(q) = rest.div_exact(f) {
            rest = q;
            exps[k] += sign;
            if rest.is_constant() {
                break;
            }
        }
    }
    rest
}

/// Integer exponents over `basis` and the torsion value of the constant part.
pub fn to_exponents(x: &RationalFunction, basis: &CoprimeBasis) -> Result<(Vec<Int>, Rat), FieldError> {
    if x.is_zero() {
        return Err(FieldError::Domain("zero has no exponent coordinates".into()));
    }
    let mut exps = vec![Int::zero(); basis.len()];
    let rn = strip(x.num(), basis, &mut exps, 1);
    let rd = strip(x.den(), basis, &mut exps, -1);
    for r in [&rn, &rd] {
        if !r.is_constant() {
            return Err(FieldError::NotInSpan(r.to_string()));
        }
    }
    let c = rn.constant_value().unwrap().mul_ref(&rd.constant_value().unwrap().inv_ref().unwrap());
    let ctx = basis.ctx();
    let k = ctx.dlog(&c).expect("nonzero constant");
    let tors = Rat::new(Int::from(k), basis.torsion_modulus());
    Ok((exps, frac(&tors)))
}

/// A nonzero integer vector `v` with `Π x_i^{v_i} = 1`, or `None` when the
/// elements are multiplicatively independent. Among relations found, a short
/// one is returned (Gauss-reduced lattice basis, sign-normalized).
pub fn mult_dependence(elems: &[RationalFunction]) -> Result<Option<Vec<Int>>, FieldError> {
    if elems.is_empty() {
        return Ok(None);
    }
    let basis = coprime_basis(elems)?;
    let coords = elems
        .iter()
        .map(|x| to_exponents(x, &basis))
        .collect::<Result<Vec<_>, _>>()?;
    let n = basis.torsion_modulus();
    let exps: Vec<Vec<Int>> = coords.iter().map(|(e, _)| e.clone()).collect();
    let tors: Vec<Int> = coords.iter().map(|(_, t)| (t * rat_int(&n)).to_integer()).collect();
    Ok(relation_lattice(&exps, &tors, &n).into_iter().next())
}

/// Basis (shortest first) of `{v : Σ v_i·exps_i = 0, Σ v_i·tors_i ≡ 0 mod n}`.
pub fn relation_lattice(exps: &[Vec<Int>], tors: &[Int], n: &Int) -> Vec<Vec<Int>> {
    let r = exps.len();
    let s = exps.first().map_or(0, |e| e.len());
    // unknowns (v_1..v_r, w); rows: exponent columns, then torsion with -w·n
    let mut m: IntMat = (0..s)
        .map(|j| {
            let mut row: Vec<Int> = exps.iter().map(|e| e[j].clone()).collect();
            row.push(Int::zero());
            row
        })
        .collect();
    let mut trow: Vec<Int> = tors.to_vec();
    trow.push(-n.clone());
    m.push(trow);
    let kernel = integer_kernel(&m, r + 1);
    let vs: Vec<Vec<Int>> = kernel.into_iter().map(|mut v| {
        v.pop();
        v
    }).collect();
    let mut reduced = reduce_basis(vs);
    for v in reduced.iter_mut() {
        normalize_sign(v);
    }
    reduced.sort_by(|a, b| norm2(a).cmp(&norm2(b)).then_with(|| b.cmp(a)));
    reduced
}

pub fn norm2(v: &[Int]) -> Int {
    v.iter().map(|x| x * x).sum()
}

fn dot(a: &[Int], b: &[Int]) -> Int {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn normalize_sign(v: &mut [Int]) {
    if v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        for x in v.iter_mut() {
            *x = -x.clone();
        }
    }
}

/// Pairwise size reduction until no vector can be shortened by subtracting
/// an integer multiple of another (exact Gauss reduction in rank 2).
pub fn reduce_basis(mut b: Vec<Vec<Int>>) -> Vec<Vec<Int>> {
    b.retain(|v| v.iter().any(|x| !x.is_zero()));
    loop {
        let mut changed = false;
        for i in 0..b.len() {
            for j in 0..b.len() {
                if i == j {
                    continue;
                }
                let nj = norm2(&b[j]);
                let d = dot(&b[i], &b[j]);
                // nearest integer to d / nj
                let two = Int::from(2);
                let k = (&d * &two + &nj).div_floor(&(&nj * &two));
                if k.is_zero() {
                    continue;
                }
                let cand: Vec<Int> = b[i].iter().zip(&b[j]).map(|(x, y)| x - &k * y).collect();
                if norm2(&cand) < norm2(&b[i]) {
                    b[i] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    b
}

/// Checks `Π x_i^{v_i} = 1` by direct rational-function arithmetic.
pub fn is_relation(elems: &[RationalFunction], v: &[Int]) -> Result<bool, FieldError> {
    let first = elems.first().ok_or_else(|| FieldError::Domain("empty family".into()))?;
    let mut acc = RationalFunction::one(first.ctx(), first.nvars());
    for (x, e) in elems.iter().zip(v) {
        let e: i64 = e.try_into().map_err(|_| FieldError::Domain("exponent too large".into()))?;
        acc = acc.mul(&x.pow(e)?);
    }
    Ok(acc.is_one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse::{default_names, parse_rational_function};

    fn rf(ctx: &Arc<GfCtx>, s: &str) -> RationalFunction {
        parse_rational_function(s, ctx, &default_names(1)).unwrap()
    }

    #[test]
    fn refinement_examples() {
        let f = GfCtx::new(5, 1).unwrap();
        let b = coprime_basis(&[rf(&f, "t^2*(t+1)"), rf(&f, "t*(t+1)^2")]).unwrap();
        assert_eq!(b.elems(), &[rf(&f, "t").num().clone(), rf(&f, "t+1").num().clone()]);
        let b = coprime_basis(&[rf(&f, "t"), rf(&f, "t")]).unwrap();
        assert_eq!(b.len(), 1);
        let f3 = GfCtx::new(3, 1).unwrap();
        let b = coprime_basis(&[rf(&f3, "t^2-1"), rf(&f3, "t-1")]).unwrap();
        assert_eq!(b.elems(), &[rf(&f3, "t+1").num().clone(), rf(&f3, "t-1").num().clone()]);
    }

    #[test]
    fn exponents_with_constant() {
        let f = GfCtx::new(5, 1).unwrap();
        let b = coprime_basis(&[rf(&f, "t"), rf(&f, "t+1")]).unwrap();
        let (e, tors) = to_exponents(&rf(&f, "2*t/(t+1)"), &b).unwrap();
        assert_eq!(e, vec![Int::from(1), Int::from(-1)]);
        // dlog of 2 to the base 2 (smallest generator of F_5^*) is 1
        assert_eq!(tors, Rat::new(Int::from(1), Int::from(4)));
        assert_eq!(b.reconstruct(&e, &tors).unwrap(), rf(&f, "2*t/(t+1)"));
        assert!(matches!(to_exponents(&rf(&f, "t+2"), &b), Err(FieldError::NotInSpan(_))));
    }

    #[test]
    fn dependence_examples() {
        let f = GfCtx::new(5, 1).unwrap();
        let v = mult_dependence(&[rf(&f, "t"), rf(&f, "t^2")]).unwrap().unwrap();
        assert_eq!(v, vec![Int::from(2), Int::from(-1)]);
        assert!(mult_dependence(&[rf(&f, "t"), rf(&f, "t+1")]).unwrap().is_none());
        let f7 = GfCtx::new(7, 1).unwrap();
        let v = mult_dependence(&[rf(&f7, "2"), rf(&f7, "3")]).unwrap().unwrap();
        assert_eq!(v, vec![Int::from(1), Int::from(-2)]);
        assert!(is_relation(&[rf(&f7, "2"), rf(&f7, "3")], &v).unwrap());
    }
}
