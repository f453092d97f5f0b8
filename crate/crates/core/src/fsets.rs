//! F-sets `γ·Π F^{k_j n_j}(α_j)·H` in exponent coordinates, membership, and
//! equations in Frobenius powers `P(n) = c₀ + Σ c_j·q^{δ_j n_j}`.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;

use crate::endo::{is_nfp_poly, CenterField};
use crate::field::ExpPoint;
use crate::lattice::{solve_integer, IntMat};
use crate::matrix::{Mat, QMat};
use crate::poly::QPoly;
use crate::scalar::{common_denominator, int_pow, rat, rat_int, Int, Rat, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FSetError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

#[derive(Clone, Debug)]
pub struct FSet {
    pub gamma: ExpPoint,
    pub alphas: Vec<ExpPoint>,
    pub steps: Vec<u32>,
    /// Generators of the subgroup H.
    pub subgroup: Vec<ExpPoint>,
    pub q: Int,
    /// H was declared a ℤ[F]-module; checked on construction.
    pub f_stable: bool,
    /// Divisible-hull constant ℓ with ℓ·γ in the ambient group.
    pub ell: Int,
}

impl FSet {
    pub fn new(
        gamma: ExpPoint,
        alphas: Vec<ExpPoint>,
        steps: Vec<u32>,
        subgroup: Vec<ExpPoint>,
        q: Int,
        f_stable: bool,
    ) -> Result<Self, FSetError> {
        if alphas.len() != steps.len() {
            return Err(FSetError::Domain("one step size per orbit generator".into()));
        }
        if steps.contains(&0) {
            return Err(FSetError::Domain("step sizes must be at least 1".into()));
        }
        if q < Int::from(2) {
            return Err(FSetError::Domain("q must be at least 2".into()));
        }
        let shape = (gamma.dim(), gamma.basis_len());
        if alphas.iter().chain(&subgroup).any(|x| (x.dim(), x.basis_len()) != shape) {
            return Err(FSetError::Domain("points are not over a common basis".into()));
        }
        let s = FSet { gamma, alphas, steps, subgroup, q, f_stable, ell: Int::one() };
        if f_stable && !s.subgroup.iter().all(|h| subgroup_coeffs(&s.subgroup, &h.pow(&s.q)).is_some()) {
            return Err(FSetError::Domain("subgroup is not Frobenius-stable".into()));
        }
        Ok(s)
    }

    pub fn with_ell(mut self, ell: Int) -> Self {
        self.ell = ell;
        self
    }

    /// `γ·Π F^{k_j n_j}(α_j)·Π h_i^{c_i}`.
    pub fn point(&self, ns: &[u64], coeffs: &[Int]) -> ExpPoint {
        let mut x = self.gamma.clone();
        for ((a, &k), &n) in self.alphas.iter().zip(&self.steps).zip(ns) {
            x = x.mul(&a.pow(&int_pow(&self.q, k as u64 * n)));
        }
        for (h, c) in self.subgroup.iter().zip(coeffs) {
            x = x.mul(&h.pow(c));
        }
        x
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub ns: Vec<u64>,
    /// Coefficients of the subgroup generators.
    pub h_coeffs: Vec<Int>,
}

#[derive(Clone, Debug)]
pub struct Membership {
    pub certificate: Option<Certificate>,
    /// False when orbit generators have dependent projections and the search
    /// fell back to a size bound.
    pub complete: bool,
}

/// Integer coefficients writing `r` in the subgroup generated by `gens`.
pub fn subgroup_coeffs(gens: &[ExpPoint], r: &ExpPoint) -> Option<Vec<Int>> {
    if gens.is_empty() {
        return r.is_identity().then(Vec::new);
    }
    let n = r.dim();
    let s = r.basis_len();
    let k = gens.len();
    let all = gens.iter().chain(std::iter::once(r));
    let d = common_denominator(all.clone().flat_map(|x| x.exps().iter().flatten()));
    let t = common_denominator(all.flat_map(|x| x.tors().iter()));
    let (dr, tr) = (rat_int(&d), rat_int(&t));
    let cols = k + n;
    let mut a: IntMat = Vec::new();
    let mut b = Vec::new();
    for i in 0..n {
        for c in 0..s {
            let mut row: Vec<Int> = gens.iter().map(|g| (&g.exps()[i][c] * &dr).to_integer()).collect();
            row.extend(std::iter::repeat_n(Int::from(0), n));
            a.push(row);
            b.push((&r.exps()[i][c] * &dr).to_integer());
        }
    }
    for i in 0..n {
        let mut row: Vec<Int> = gens.iter().map(|g| (&g.tors()[i] * &tr).to_integer()).collect();
        let mut wraps = vec![Int::from(0); n];
        wraps[i] = -t.clone();
        row.extend(wraps);
        a.push(row);
        b.push((&r.tors()[i] * &tr).to_integer());
    }
    let rows = a.len();
    let x = solve_integer(&a, rows, cols, &b)?;
    Some(x[..k].to_vec())
}

fn flat_exps(x: &ExpPoint) -> Vec<Rat> {
    x.exps().iter().flatten().cloned().collect()
}

/// Exact `e ≥ 0` with `x = q^e` and `δ | e`.
pub fn exact_log(x: &Rat, q: &Int, delta: u32) -> Option<u64> {
    if !x.is_integer() || !x.is_positive() {
        return None;
    }
    let mut v = x.to_integer();
    let mut e = 0u64;
    while v > Int::one() {
        let (d, r) = v.div_rem(q);
        if r.sign() != num_bigint::Sign::NoSign {
            return None;
        }
        v = d;
        e += 1;
    }
    e.is_multiple_of(delta as u64).then_some(e / delta as u64)
}

/// Orthogonal projection onto the complement of the ℚ-span of `gens`.
fn complement_projection(gens: &[Vec<Rat>], dim: usize) -> QMat {
    let z = rat(0);
    let id = QMat::identity(dim, &z);
    let basis: Vec<Vec<Rat>> = {
        let m = QMat::from_rows(gens.to_vec());
        if gens.is_empty() {
            Vec::new()
        } else {
            let t = m.transpose();
            t.pivot_columns().into_iter().map(|c| t.col(c)).collect()
        }
    };
    if basis.is_empty() {
        return id;
    }
    let b = QMat::from_cols(&basis, &z);
    let bt = b.transpose();
    let gram_inv = bt.mul(&b).inverse().expect("independent columns");
    id.sub(&b.mul(&gram_inv).mul(&bt))
}

/// The values of `n` to try for an orbit generator whose contribution is
/// only seen modulo H: `q^{kn}` modulo some `c` with `c·α ∈ H`, until it
/// repeats.
fn periodic_representatives(alpha: &ExpPoint, gens: &[ExpPoint], q: &Int, k: u32) -> Vec<u64> {
    let z = rat(0);
    let target = flat_exps(alpha);
    let c1 = if gens.is_empty() {
        Int::one()
    } else {
        let m = QMat::from_cols(&gens.iter().map(flat_exps).collect::<Vec<_>>(), &z);
        let y = m.solve_right(&target).expect("exponents lie in the span of H");
        common_denominator(y.iter())
    };
    let mut c = c1.clone();
    // torsion defect of c1·α against H, bounded by its order
    let scaled = alpha.pow(&c1);
    if subgroup_coeffs(gens, &scaled).is_none() {
        let den = common_denominator(scaled.tors().iter()).lcm(&common_denominator(
            gens.iter().flat_map(|g| g.tors().iter()),
        ));
        c *= den;
    }
    let step = int_pow(q, k as u64);
    let mut seen = std::collections::HashSet::new();
    let mut reps = Vec::new();
    let mut v = Int::one().mod_floor(&c);
    for n in 0u64.. {
        if !seen.insert(v.clone()) {
            break;
        }
        reps.push(n);
        v = (v * &step).mod_floor(&c);
    }
    reps
}

/// Decides whether `x` lies in `set`, returning a certificate.
pub fn fset_member(x: &ExpPoint, set: &FSet) -> Result<Membership, FSetError> {
    if (x.dim(), x.basis_len()) != (set.gamma.dim(), set.gamma.basis_len()) {
        return Err(FSetError::Domain("point and F-set are over different bases".into()));
    }
    let r0 = x.mul(&set.gamma.inv());
    let dim = r0.exps().len() * r0.basis_len();
    let proj = complement_projection(&set.subgroup.iter().map(flat_exps).collect::<Vec<_>>(), dim);
    let projected: Vec<Vec<Rat>> = set.alphas.iter().map(|a| proj.mul_vec(&flat_exps(a))).collect();
    let free: Vec<usize> = (0..set.alphas.len()).filter(|&j| projected[j].iter().any(|v| !v.is_zero())).collect();
    let periodic: Vec<usize> = (0..set.alphas.len()).filter(|j| !free.contains(j)).collect();
    let target = proj.mul_vec(&flat_exps(&r0));

    let z = rat(0);
    let mut complete = true;
    let free_choices: Vec<Vec<u64>> = if free.is_empty() {
        if target.iter().any(|v| !v.is_zero()) {
            return Ok(Membership { certificate: None, complete });
        }
        vec![Vec::new()]
    } else {
        let m = QMat::from_cols(&free.iter().map(|&j| projected[j].clone()).collect::<Vec<_>>(), &z);
        if m.rank() == free.len() {
            let Some(c) = m.solve_right(&target) else {
                return Ok(Membership { certificate: None, complete });
            };
            let mut ns = Vec::new();
            for (v, &j) in c.iter().zip(&free) {
                match exact_log(v, &set.q, set.steps[j]) {
                    Some(n) => ns.push(n),
                    None => return Ok(Membership { certificate: None, complete }),
                }
            }
            vec![ns]
        } else {
            complete = false;
            bounded_free_choices(set, &free, &projected, &target)
        }
    };
    let reps: Vec<Vec<u64>> = periodic
        .iter()
        .map(|&j| periodic_representatives(&set.alphas[j], &set.subgroup, &set.q, set.steps[j]))
        .collect();
    for fc in &free_choices {
        let mut idx = vec![0usize; periodic.len()];
        loop {
            let mut ns = vec![0u64; set.alphas.len()];
            for (i, &j) in free.iter().enumerate() {
                ns[j] = fc[i];
            }
            for (i, &j) in periodic.iter().enumerate() {
                ns[j] = reps[i][idx[i]];
            }
            let base = set.point(&ns, &[]);
            if let Some(h) = subgroup_coeffs(&set.subgroup, &x.mul(&base.inv())) {
                let cert = Certificate { ns, h_coeffs: h };
                debug_assert_eq!(&set.point(&cert.ns, &cert.h_coeffs), x);
                return Ok(Membership { certificate: Some(cert), complete });
            }
            // advance mixed-radix counter
            let mut i = 0;
            while i < idx.len() {
                idx[i] += 1;
                if idx[i] < reps[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == idx.len() {
                break;
            }
        }
    }
    Ok(Membership { certificate: None, complete })
}

/// Size bound `q^{k n}·min|α| ≤ max|x − γ| + Σ‖h‖` on projected coordinates.
fn bounded_free_choices(set: &FSet, free: &[usize], projected: &[Vec<Rat>], target: &[Rat]) -> Vec<Vec<u64>> {
    let maxabs = |v: &[Rat]| v.iter().map(|x| x.abs()).max().unwrap_or_else(|| rat(0));
    let cover: Rat = set.subgroup.iter().map(|h| maxabs(&flat_exps(h))).sum();
    let rhs = maxabs(target) + cover + rat(1);
    let mut ranges = Vec::new();
    for &j in free {
        let minabs = projected[j].iter().filter(|x| !x.is_zero()).map(|x| x.abs()).min().unwrap();
        let step = int_pow(&set.q, set.steps[j] as u64);
        let mut n = 0u64;
        let mut val = minabs.clone();
        while val <= rhs {
            n += 1;
            val *= rat_int(&step);
        }
        ranges.push(n.max(1));
    }
    let mut out = vec![Vec::new()];
    for r in ranges {
        out = out
            .into_iter()
            .flat_map(|pre| {
                (0..r).map(move |n| {
                    let mut v = pre.clone();
                    v.push(n);
                    v
                })
            })
            .collect();
    }
    out
}

/// `P(n) = c₀ + Σ c_j·q^{δ_j n_j}` with rational data.
#[derive(Clone, Debug)]
pub struct FrobEq {
    pub poly: QPoly,
    pub c0: Rat,
    pub coeffs: Vec<Rat>,
    pub deltas: Vec<u32>,
    pub q: Int,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrobSolution {
    pub ns: Vec<u64>,
    /// False only for vanishing sums with three or more mixed-sign terms,
    /// which are searched up to a size bound.
    pub complete: bool,
}

impl FrobEq {
    pub fn new(poly: QPoly, c0: Rat, coeffs: Vec<Rat>, deltas: Vec<u32>, q: Int) -> Result<Self, FSetError> {
        if coeffs.len() != deltas.len() {
            return Err(FSetError::Domain("one step size per Frobenius term".into()));
        }
        if deltas.contains(&0) {
            return Err(FSetError::Domain("step sizes must be at least 1".into()));
        }
        if coeffs.iter().any(|c| c.is_zero()) {
            return Err(FSetError::Domain("Frobenius term coefficients must be nonzero".into()));
        }
        if q < Int::from(2) {
            return Err(FSetError::Domain("q must be at least 2".into()));
        }
        Ok(FrobEq { poly, c0, coeffs, deltas, q })
    }

    pub fn eval_poly(&self, n: u64) -> Rat {
        self.poly.eval(&rat_int(&Int::from(n)))
    }

    pub fn lhs(&self, ns: &[u64]) -> Rat {
        self.coeffs
            .iter()
            .zip(&self.deltas)
            .zip(ns)
            .fold(self.c0.clone(), |acc, ((c, &d), &n)| acc + c * rat_int(&int_pow(&self.q, d as u64 * n)))
    }
}

struct Term<'a> {
    idx: usize,
    c: &'a Rat,
    delta: u32,
}

/// Existence search for `Σ c_j q^{e_j} = target`, `e_j ∈ δ_j·ℕ₀`.
fn solve_terms(target: &Rat, terms: &[Term<'_>], q: &Int, l: &Int, ns: &mut Vec<(usize, u64)>) -> (bool, bool) {
    match terms.len() {
        0 => return (target.is_zero(), true),
        1 => {
            let t = &terms[0];
            return match exact_log(&(target / t.c), q, t.delta) {
                Some(n) => {
                    ns.push((t.idx, n));
                    (true, true)
                }
                None => (false, true),
            };
        }
        _ => {}
    }
    if target.is_zero() {
        if terms.iter().all(|t| t.c.is_positive()) || terms.iter().all(|t| t.c.is_negative()) {
            return (false, true);
        }
        if terms.len() == 2 {
            return vanishing_pair(&terms[0], &terms[1], q, ns);
        }
        return (bounded_terms(target, terms, q, l, ns), false);
    }
    // the smallest power q^e satisfies q^e ≤ |target|·l
    let bound = target.abs() * rat_int(l);
    let mut complete = true;
    for i in 0..terms.len() {
        let t = &terms[i];
        let rest: Vec<Term<'_>> = terms
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, x)| Term { idx: x.idx, c: x.c, delta: x.delta })
            .collect();
        let step = int_pow(q, t.delta as u64);
        let mut pw = Int::one();
        let mut n = 0u64;
        while rat_int(&pw) <= bound {
            let mark = ns.len();
            ns.push((t.idx, n));
            let (ok, comp) = solve_terms(&(target - t.c * rat_int(&pw)), &rest, q, l, ns);
            complete &= comp;
            if ok {
                return (true, complete);
            }
            ns.truncate(mark);
            pw *= &step;
            n += 1;
        }
    }
    (false, complete)
}

/// `c₁q^{a} + c₂q^{b} = 0`: needs `−c₂/c₁ = q^D` with `D = δ₁n₁ − δ₂n₂`.
fn vanishing_pair(t1: &Term<'_>, t2: &Term<'_>, q: &Int, ns: &mut Vec<(usize, u64)>) -> (bool, bool) {
    let r = -(t2.c / t1.c);
    let (flip, r) = if r >= rat(1) { (false, r) } else { (true, r.recip()) };
    let Some(d) = exact_log(&r, q, 1) else {
        return (false, true);
    };
    // find n₁, n₂ ≥ 0 with δ₁n₁ − δ₂n₂ = ±d
    let (d1, d2) = (t1.delta as u64, t2.delta as u64);
    let span = d1.lcm(&d2) + d;
    for n2 in 0..=span {
        for n1 in 0..=span {
            let (lhs, rhs) = if flip { (d2 * n2, d1 * n1 + d) } else { (d1 * n1, d2 * n2 + d) };
            if lhs == rhs {
                ns.push((t1.idx, n1));
                ns.push((t2.idx, n2));
                return (true, true);
            }
        }
    }
    (false, true)
}

fn bounded_terms(target: &Rat, terms: &[Term<'_>], q: &Int, l: &Int, ns: &mut Vec<(usize, u64)>) -> bool {
    let total: Rat = terms.iter().map(|t| t.c.abs()).sum();
    let bound = (target.abs() + total) * rat_int(l) * rat_int(&int_pow(q, 2 * terms.iter().map(|t| t.delta as u64).max().unwrap()));
    let maxn: Vec<u64> = terms
        .iter()
        .map(|t| {
            let mut n = 0;
            let step = rat_int(&int_pow(q, t.delta as u64));
            let mut v = rat(1);
            while v <= bound {
                v *= &step;
                n += 1;
            }
            n
        })
        .collect();
    let mut cur = vec![0u64; terms.len()];
    loop {
        let sum: Rat = terms
            .iter()
            .zip(&cur)
            .map(|(t, &n)| t.c * rat_int(&int_pow(q, t.delta as u64 * n)))
            .sum();
        if &sum == target {
            ns.extend(terms.iter().zip(&cur).map(|(t, &n)| (t.idx, n)));
            return true;
        }
        let mut i = 0;
        while i < cur.len() {
            cur[i] += 1;
            if cur[i] <= maxn[i] {
                break;
            }
            cur[i] = 0;
            i += 1;
        }
        if i == cur.len() {
            return false;
        }
    }
}

/// A solution `(n₁..n_t)` of `P(n) = c₀ + Σ c_j q^{δ_j n_j}`, or `None`.
pub fn frob_eq_solve(e: &FrobEq, n: u64) -> Option<FrobSolution> {
    solve_target(e, &(e.eval_poly(n) - &e.c0))
}

fn solve_target(e: &FrobEq, target: &Rat) -> Option<FrobSolution> {
    let terms: Vec<Term<'_>> = e
        .coeffs
        .iter()
        .zip(&e.deltas)
        .enumerate()
        .map(|(idx, (c, &delta))| Term { idx, c, delta })
        .collect();
    let l = common_denominator(e.coeffs.iter());
    let mut ns = Vec::new();
    let (ok, complete) = solve_terms(target, &terms, &e.q, &l, &mut ns);
    if !ok {
        return None;
    }
    let mut out = vec![0u64; e.coeffs.len()];
    for (i, n) in ns {
        out[i] = n;
    }
    debug_assert_eq!(&(e.lhs(&out) - &e.c0), target);
    Some(FrobSolution { ns: out, complete })
}

#[derive(Clone, Debug)]
pub struct FrobCount {
    /// Solvable n in `1..=N`, ascending.
    pub solvable: Vec<u64>,
    pub total: usize,
    /// `(N′, count(N′), count(N′)/N′)` at powers of two and at N.
    pub curve: Vec<(u64, usize, f64)>,
    /// Least-squares slope of log count against log log N′.
    pub growth_exponent: Option<f64>,
    /// `C = max count(N′)/(ln N′)^t` over checkpoints up to √N.
    pub polylog_constant: Option<f64>,
    /// `count(N′) ≤ C·(ln N′)^t` at every checkpoint.
    pub polylog_bound_holds: bool,
    /// P is constant (every or no n solves it).
    pub degenerate: bool,
    pub complete: bool,
}

/// Counts `n ∈ [1, N]` for which `frob_eq_solve` succeeds.
pub fn frob_eq_count(e: &FrobEq, n_max: u64) -> FrobCount {
    let results: Vec<Option<FrobSolution>> = (1..=n_max).into_par_iter().map(|n| frob_eq_solve(e, n)).collect();
    let complete = results.iter().flatten().all(|s| s.complete);
    let solvable: Vec<u64> = (1..=n_max).zip(&results).filter(|(_, r)| r.is_some()).map(|(n, _)| n).collect();
    let mut checkpoints: Vec<u64> = (1..64).map(|k| 1u64 << k).take_while(|&c| c <= n_max).collect();
    if checkpoints.last() != Some(&n_max) && n_max >= 2 {
        checkpoints.push(n_max);
    }
    let count_upto = |c: u64| solvable.partition_point(|&n| n <= c);
    let curve: Vec<(u64, usize, f64)> = checkpoints
        .iter()
        .map(|&c| {
            let k = count_upto(c);
            (c, k, k as f64 / c as f64)
        })
        .collect();
    let t = e.coeffs.len() as i32;
    let degenerate = e.poly.degree().unwrap_or(0) == 0;
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .filter(|&&(c, k, _)| k > 0 && c >= 4)
        .map(|&(c, k, _)| ((c as f64).ln().ln(), (k as f64).ln()))
        .collect();
    let growth_exponent = (pts.len() >= 2).then(|| {
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        num / den
    });
    let root = (n_max as f64).sqrt();
    let ratio = |c: u64, k: usize| k as f64 / (c as f64).ln().powi(t.max(1));
    let fit: Vec<f64> = curve.iter().filter(|&&(c, _, _)| (c as f64) <= root).map(|&(c, k, _)| ratio(c, k)).collect();
    let polylog_constant = fit.iter().cloned().reduce(f64::max);
    let polylog_bound_holds = match polylog_constant {
        Some(cst) => curve.iter().all(|&(c, k, _)| k as f64 <= cst * (c as f64).ln().powi(t.max(1)) + 1e-9),
        None => false,
    };
    FrobCount { total: solvable.len(), solvable, curve, growth_exponent, polylog_constant, polylog_bound_holds, degenerate, complete }
}

#[derive(Clone, Debug)]
pub struct MatrixEqResult {
    /// `n ≤ S` with a solution, each with one witness `(n₁..n_r)`.
    pub solutions: Vec<(u64, Vec<u64>)>,
    pub complete: bool,
}

impl MatrixEqResult {
    pub fn solvable(&self) -> Vec<u64> {
        self.solutions.iter().map(|(n, _)| *n).collect()
    }
}

/// `n ∈ [0, S]` for which `A^n v = C v + Σ F^{δ_i n_i} B_i v` has a solution
/// with `n_i ≥ 0`. Requires A NFP and a rational Frobenius.
pub fn matrix_frob_eq_test<T: CenterField>(
    a: &Mat<T>,
    bs: &[Mat<T>],
    c: &Mat<T>,
    v: &[T],
    deltas: &[u32],
    frob: &T,
    s_bound: u64,
    m_bound: u32,
) -> Result<MatrixEqResult, FSetError> {
    if bs.len() != deltas.len() || deltas.contains(&0) {
        return Err(FSetError::Domain("one positive step size per B matrix".into()));
    }
    let q = frob
        .rational_value()
        .filter(|x| x.is_integer() && x > &rat(1))
        .ok_or_else(|| FSetError::Domain("matrix equations need an integral Frobenius q ≥ 2".into()))?
        .to_integer();
    let det_ok = T::regular_matrix(a).inverse().is_some();
    if !det_ok {
        return Err(FSetError::PreconditionViolated("A is not invertible".into()));
    }
    if !is_nfp_poly(&T::min_poly_over_center(a), frob, m_bound) {
        return Err(FSetError::PreconditionViolated("A is not NFP".into()));
    }
    let flat = |w: &[T]| -> Vec<Rat> {
        w.iter()
            .flat_map(|x| {
                let m = T::regular_matrix(&Mat::from_rows(vec![vec![x.clone()]]));
                m.col(0)
            })
            .collect()
    };
    let us: Vec<Vec<Rat>> = bs.iter().map(|b| flat(&b.mul_vec(v))).collect();
    let cv = c.mul_vec(v);
    let z = rat(0);
    let dim = us.first().map_or_else(|| flat(v).len(), |u| u.len());
    let u_mat = if us.is_empty() { QMat::zeros(dim, 0, &z) } else { QMat::from_cols(&us, &z) };
    let full_rank = !us.is_empty() && u_mat.rank() == us.len();
    let mut powers = Vec::with_capacity(s_bound as usize + 1);
    let mut cur = v.to_vec();
    for _ in 0..=s_bound {
        powers.push(cur.clone());
        cur = a.mul_vec(&cur);
    }
    let results: Vec<(u64, Option<Vec<u64>>, bool)> = powers
        .par_iter()
        .enumerate()
        .map(|(n, an_v)| {
            let w: Vec<Rat> = flat(an_v).into_iter().zip(flat(&cv)).map(|(x, y)| x - y).collect();
            if us.is_empty() {
                return (n as u64, w.iter().all(|x| x.is_zero()).then(Vec::new), true);
            }
            if full_rank {
                let sol = u_mat.solve_right(&w).and_then(|xs| {
                    xs.iter().zip(deltas).map(|(x, &d)| exact_log(x, &q, d)).collect::<Option<Vec<u64>>>()
                });
                return (n as u64, sol, true);
            }
            // dependent columns: per-coordinate search bounded by the sizes involved
            let maxw = w.iter().map(|x| x.abs()).max().unwrap_or_else(|| rat(0));
            let minu = us
                .iter()
                .flatten()
                .filter(|x| !x.is_zero())
                .map(|x| x.abs())
                .min()
                .unwrap_or_else(|| rat(1));
            let bound = (maxw + rat(1)) / minu * rat(us.len() as i64);
            let eq = DependentSearch { us: &us, w: &w, deltas, q: &q, bound };
            (n as u64, eq.search(), false)
        })
        .collect();
    let complete = results.iter().all(|r| r.2);
    let solutions = results.into_iter().filter_map(|(n, s, _)| s.map(|s| (n, s))).collect();
    Ok(MatrixEqResult { solutions, complete })
}

struct DependentSearch<'a> {
    us: &'a [Vec<Rat>],
    w: &'a [Rat],
    deltas: &'a [u32],
    q: &'a Int,
    bound: Rat,
}

impl DependentSearch<'_> {
    fn search(&self) -> Option<Vec<u64>> {
        let maxn: Vec<u64> = self
            .deltas
            .iter()
            .map(|&d| {
                let step = rat_int(&int_pow(self.q, d as u64));
                let (mut v, mut n) = (rat(1), 0);
                while v <= self.bound {
                    v *= &step;
                    n += 1;
                }
                n
            })
            .collect();
        let mut cur = vec![0u64; self.us.len()];
        loop {
            let ok = (0..self.w.len()).all(|r| {
                let s: Rat = self
                    .us
                    .iter()
                    .zip(&cur)
                    .zip(self.deltas)
                    .map(|((u, &n), &d)| &u[r] * rat_int(&int_pow(self.q, d as u64 * n)))
                    .sum();
                s == self.w[r]
            });
            if ok {
                return Some(cur);
            }
            let mut i = 0;
            while i < cur.len() {
                cur[i] += 1;
                if cur[i] <= maxn[i] {
                    break;
                }
                cur[i] = 0;
                i += 1;
            }
            if i == cur.len() {
                return None;
            }
        }
    }
}

/// Largest solvable `n`, for stabilization checks.
pub fn max_solution(r: &MatrixEqResult) -> Option<u64> {
    r.solutions.iter().map(|(n, _)| *n).max()
}

pub fn to_u64(x: &Int) -> Option<u64> {
    x.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::qmat;
    use crate::poly::qpoly;

    fn pt(e: i64) -> ExpPoint {
        ExpPoint::from_int_exps(&[vec![e]])
    }

    #[test]
    fn trivial_fset() {
        let s = FSet::new(pt(4), vec![], vec![], vec![], Int::from(3), false).unwrap();
        let m = fset_member(&pt(4), &s).unwrap();
        assert_eq!(m.certificate, Some(Certificate { ns: vec![], h_coeffs: vec![] }));
        assert!(fset_member(&pt(5), &s).unwrap().certificate.is_none());
    }

    #[test]
    fn orbit_membership() {
        let s = FSet::new(pt(0), vec![pt(1)], vec![1], vec![], Int::from(3), false).unwrap();
        assert_eq!(fset_member(&pt(9), &s).unwrap().certificate.unwrap().ns, vec![2]);
        assert!(fset_member(&pt(5), &s).unwrap().certificate.is_none());
    }

    #[test]
    fn membership_with_subgroup_and_torsion() {
        // α = (1/2 torsion) lies in the span of H only through torsion
        let alpha = ExpPoint::new(vec![vec![rat(0)]], vec![crate::scalar::ratio(1, 4)]);
        let s = FSet::new(pt(0), vec![alpha], vec![1], vec![pt(2)], Int::from(3), true).unwrap();
        let x = ExpPoint::new(vec![vec![rat(6)]], vec![crate::scalar::ratio(3, 4)]);
        let cert = fset_member(&x, &s).unwrap().certificate.unwrap();
        assert_eq!(s.point(&cert.ns, &cert.h_coeffs), x);
        let y = ExpPoint::new(vec![vec![rat(6)]], vec![crate::scalar::ratio(1, 2)]);
        assert!(fset_member(&y, &s).unwrap().certificate.is_none());
    }

    #[test]
    fn frob_eq_examples() {
        let e = FrobEq::new(qpoly(&[0, 1]), rat(0), vec![rat(1)], vec![1], Int::from(3)).unwrap();
        assert_eq!(frob_eq_solve(&e, 9).unwrap().ns, vec![2]);
        assert!(frob_eq_solve(&e, 5).is_none());
        let e = FrobEq::new(qpoly(&[0, 0, 1]), rat(1), vec![rat(2)], vec![2], Int::from(2)).unwrap();
        assert_eq!(frob_eq_solve(&e, 3).unwrap().ns, vec![1]);
    }

    #[test]
    fn mixed_sign_pair() {
        // n = 2^a − 2^b
        let e = FrobEq::new(qpoly(&[0, 1]), rat(0), vec![rat(1), rat(-1)], vec![1, 1], Int::from(2)).unwrap();
        let s = frob_eq_solve(&e, 1 << 19).unwrap();
        assert_eq!(e.lhs(&s.ns), rat(1 << 19));
        assert!(frob_eq_solve(&e, 5).is_none());
        assert!(frob_eq_solve(&e, 6).is_some());
    }

    #[test]
    fn count_powers_of_two() {
        let e = FrobEq::new(qpoly(&[0, 1]), rat(0), vec![rat(1)], vec![1], Int::from(2)).unwrap();
        let c = frob_eq_count(&e, 1024);
        assert_eq!(c.total, 11);
        assert!(c.polylog_bound_holds);
    }

    #[test]
    fn nfp_matrix_equation() {
        let a = qmat(&[&[5]]);
        let r = matrix_frob_eq_test(&a, &[qmat(&[&[1]])], &qmat(&[&[0]]), &[rat(1)], &[1], &rat(3), 30, 24).unwrap();
        assert_eq!(r.solvable(), vec![0]);
        let r = matrix_frob_eq_test(&a, &[qmat(&[&[1]])], &qmat(&[&[0]]), &[rat(0)], &[1], &rat(3), 30, 24).unwrap();
        assert_eq!(r.solvable().len(), 31);
        assert!(matrix_frob_eq_test(&qmat(&[&[9]]), &[], &qmat(&[&[0]]), &[rat(1)], &[], &rat(3), 3, 24).is_err());
    }
}
