//! Conditions (A)/(B)/(C) read off a normal form: invariant characters,
//! Frobenius quotients, dense starting points, orbits and density evidence.
//!
//! Action convention: `(x^Q)_i = Π_j x_j^{Q_ij}`. Jordan blocks are upper
//! triangular, so the last coordinate of each block is fixed by `Q` and
//! the left eigenvectors of `A_Φ` are its block-last rows.

use std::collections::{BTreeMap, HashSet};

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::endo::RingElem;
use crate::field::basis::{normalize_sign, norm2, reduce_basis, relation_lattice};
use crate::field::{coprime_basis, mult_dependence, to_exponents, CoprimeBasis, Embedding, ExpPoint, FieldError, Gf, GfCtx, MPoly, RationalFunction};
use crate::lattice::primitive_integer_vector;
use crate::matrix::{Mat, QMat};
use crate::reduction::{build_normal_form, NormalForm, ReductionError, TorusNormalForm};
use crate::scalar::{common_denominator, int_pow, rat, rat_int, Int, Rat, Scalar};
use crate::system::System;

pub use crate::reduction::normalize_translation;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrichotomyError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

type Result<T> = std::result::Result<T, TrichotomyError>;

/// Number of random points used to re-check witnesses.
pub const WITNESS_SAMPLES: usize = 20;
const SAMPLE_SEED: u64 = 0x0b5e_55ed;

/// Torsion-free points with small integer exponents.
pub fn sample_points(n: usize, s: usize, count: usize, seed: u64) -> Vec<ExpPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let exps = (0..n).map(|_| (0..s).map(|_| rat(rng.gen_range(-9..=9))).collect()).collect();
            ExpPoint::new(exps, vec![rat(0); n])
        })
        .collect()
}

/// `x^v = Π x_i^{v_i}` as a one-coordinate point.
pub fn character(x: &ExpPoint, v: &[Int]) -> ExpPoint {
    x.act(&vec![v.to_vec()])
}

/// A short nonzero `σ` with `Π c_i^{σ_i} = 1` exactly, for one-coordinate
/// points, or `None` when they are multiplicatively independent.
pub fn point_dependence(cs: &[ExpPoint]) -> Option<Vec<Int>> {
    if cs.is_empty() {
        return None;
    }
    let d = common_denominator(cs.iter().flat_map(|c| c.exps()[0].iter()));
    let t = common_denominator(cs.iter().map(|c| &c.tors()[0]));
    let exps: Vec<Vec<Int>> = cs
        .iter()
        .map(|c| c.exps()[0].iter().map(|e| (e * rat_int(&d)).to_integer()).collect())
        .collect();
    let tors: Vec<Int> = cs.iter().map(|c| (&c.tors()[0] * rat_int(&t)).to_integer()).collect();
    relation_lattice(&exps, &tors, &t).into_iter().next()
}

fn block_lasts(blocks: &[usize]) -> Vec<usize> {
    blocks
        .iter()
        .scan(0, |acc, &b| {
            *acc += b;
            Some(*acc - 1)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub enum Character {
    /// Exponent vector `v` on the torus coordinates: `f(x) = x^v`.
    Torus(Vec<Int>),
    /// Row `r` over the endomorphism ring of an abstract factor with
    /// `r·A★ = r` (matrix level only).
    Abstract { label: String, row: Vec<RingElem> },
}

#[derive(Clone, Debug)]
pub struct WitnessB {
    /// Dependence among the block-last translation coordinates.
    pub sigma: Vec<Int>,
    /// Normal-form coordinates carrying `sigma`.
    pub support: Vec<usize>,
    pub character: Character,
    pub verified: bool,
}

/// `A★ᵀv = v`, `β★^v = 1` and `f(Ψ★x) = f(x)` on sample points.
pub fn verify_torus_character(t: &TorusNormalForm, v: &[Int], p: u64) -> Result<bool> {
    let vr: Vec<Rat> = v.iter().map(rat_int).collect();
    if t.matrix.a_star.transpose().mul_vec(&vr) != vr {
        return Ok(false);
    }
    if !character(&t.beta_star, v).is_identity() {
        return Ok(false);
    }
    let n = t.beta_star.dim();
    for x in sample_points(n, t.beta_star.basis_len(), WITNESS_SAMPLES, SAMPLE_SEED) {
        if character(&t.step_star(&x, p)?, v) != character(&x, v) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn torus_witness_b(t: &TorusNormalForm, p: u64) -> Result<Option<WitnessB>> {
    let blocks = &t.matrix.unipotent_blocks;
    if blocks.is_empty() {
        return Ok(None);
    }
    let lasts = block_lasts(blocks);
    let coords: Vec<ExpPoint> = lasts.iter().map(|&i| t.unipotent_translation.select(&[i])).collect();
    let Some(sigma) = point_dependence(&coords) else {
        return Ok(None);
    };
    let n = t.matrix.h.rows();
    let mut full = vec![rat(0); n];
    for (s, &i) in sigma.iter().zip(&lasts) {
        full[i] = rat_int(s);
    }
    let mut v = primitive_integer_vector(&t.matrix.h.transpose().mul_vec(&full));
    // torsion left by the choice of roots in the conjugation
    let k = character(&t.beta_star, &v).denominator();
    v.iter_mut().for_each(|x| *x *= &k);
    let g = v.iter().fold(Int::from(0), |acc, x| acc.gcd(x));
    let verified = verify_torus_character(t, &v, p)?;
    debug_assert!(!g.is_zero_like());
    Ok(Some(WitnessB { sigma, support: lasts, character: Character::Torus(v), verified }))
}

trait ZeroLike {
    fn is_zero_like(&self) -> bool;
}

impl ZeroLike for Int {
    fn is_zero_like(&self) -> bool {
        self.sign() == num_bigint::Sign::NoSign
    }
}

/// Searches for an invariant character (condition B). Torus factors first,
/// then abstract factors with a unipotent part.
pub fn check_condition_b(nf: &NormalForm) -> Result<Option<WitnessB>> {
    if let Some(t) = &nf.torus {
        if let Some(w) = torus_witness_b(t, nf.p)? {
            return Ok(Some(w));
        }
    }
    for f in &nf.factors {
        let m = &f.matrix;
        if m.unipotent_blocks.is_empty() {
            continue;
        }
        let idx = m.unipotent_blocks[0] - 1;
        let row = m.h.select_rows(&[idx]);
        let verified = row.mul(&m.a_star) == row;
        return Ok(Some(WitnessB {
            sigma: vec![Int::one()],
            support: vec![idx],
            character: Character::Abstract { label: f.label.clone(), row: row.row(0) },
            verified,
        }));
    }
    Ok(None)
}

#[derive(Clone, Debug)]
pub struct WitnessC {
    pub n0: u64,
    /// `T·A^{n₀} = F^r·T`.
    pub r: i64,
    pub dim_z: usize,
    /// Quotient rows on the torus coordinates.
    pub torus_rows: Option<QMat>,
    /// Quotient rows on abstract factors.
    pub factor_rows: Vec<(String, Mat<RingElem>)>,
    /// Torsion order allowed in `τ∘Φ^{n₀} − F^r∘τ` on points.
    pub ell0: Int,
    pub verified: bool,
}

#[derive(Default)]
struct FrobClass {
    dim: usize,
    torus_rows: Vec<usize>,
    factor_rows: BTreeMap<usize, Vec<usize>>,
}

fn frobenius_classes(nf: &NormalForm) -> BTreeMap<i64, FrobClass> {
    let mut classes: BTreeMap<i64, FrobClass> = BTreeMap::new();
    if let Some(t) = &nf.torus {
        for (b, r) in t.matrix.frobenius_block_rows() {
            let c = classes.entry(b.exponent).or_default();
            c.dim += 1;
            c.torus_rows.push(r.end - 1);
        }
    }
    for (fi, f) in nf.factors.iter().enumerate() {
        for (b, r) in f.matrix.frobenius_block_rows() {
            let c = classes.entry(b.exponent).or_default();
            c.dim += f.dim;
            c.factor_rows.entry(fi).or_default().push(r.end - 1);
        }
    }
    classes
}

/// Condition C: a Frobenius class whose total dimension exceeds `d`.
pub fn check_condition_c(nf: &NormalForm, d: usize) -> Result<Option<WitnessC>> {
    let classes = frobenius_classes(nf);
    let Some((&r, class)) = classes.iter().fold(None, |best: Option<(&i64, &FrobClass)>, (k, c)| match best {
        Some((_, b)) if b.dim >= c.dim => best,
        _ => Some((k, c)),
    }) else {
        return Ok(None);
    };
    if class.dim <= d {
        return Ok(None);
    }
    let p = nf.p;
    let mut verified = true;
    let mut ell0 = Int::one();
    let torus_rows = match &nf.torus {
        Some(t) if !class.torus_rows.is_empty() => {
            let rows = QMat::from_rows(
                class
                    .torus_rows
                    .iter()
                    .map(|&i| primitive_integer_vector(&t.matrix.h.row(i)).iter().map(rat_int).collect())
                    .collect(),
            );
            let qr = rat_int(&int_pow(&nf.q, r as u64));
            verified &= rows.mul(&t.matrix.a_star) == rows.scale_left(&qr);
            let step_den = common_denominator(t.matrix.a_star.entries())
                .lcm(&common_denominator(t.matrix.a_phi.entries()))
                .lcm(&common_denominator(t.matrix.h.entries()));
            ell0 = t.matrix.l2.clone() * step_den;
            let qpow = int_pow(&nf.q, r as u64);
            for x in sample_points(t.beta_star.dim(), t.beta_star.basis_len(), WITNESS_SAMPLES, SAMPLE_SEED) {
                let lhs = t.apply_h(&t.step_star(&x, p)?, p)?.select(&class.torus_rows);
                let rhs = t.apply_h(&x, p)?.select(&class.torus_rows).pow(&qpow);
                verified &= lhs.mul(&rhs.inv()).killed_by(&ell0);
            }
            Some(rows)
        }
        _ => None,
    };
    let mut factor_rows = Vec::new();
    for (&fi, idx) in &class.factor_rows {
        let f = &nf.factors[fi];
        let rows = f.matrix.h.select_rows(idx);
        let frob = f.matrix.a_star.ctx().algebra().frobenius();
        let fr = (0..r).fold(frob.one_like(), |acc, _| acc.mul_ref(&frob));
        verified &= rows.mul(&f.matrix.a_star) == rows.scale_left(&fr);
        factor_rows.push((f.label.clone(), rows));
    }
    Ok(Some(WitnessC { n0: nf.n_star, r, dim_z: class.dim, torus_rows, factor_rows, ell0, verified }))
}

/// Variable assignment of one Frobenius block.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassAssignment {
    pub exponent: i64,
    /// Index among the torus Frobenius blocks.
    pub block: usize,
    /// `S`: dimensions of the earlier members of the class.
    pub offset: usize,
    /// 0-based index of the transcendental variable `t_{S+1}`.
    pub variable: usize,
    /// Normal-form coordinates of the block.
    pub coordinates: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct DensePointPlan {
    pub classes: Vec<ClassAssignment>,
    /// α in normal-form coordinates.
    pub coordinates: Vec<RationalFunction>,
    /// The system rewritten over a basis covering α.
    pub system: System,
    pub alpha: ExpPoint,
    /// Starting point in the original coordinates with `h(x₀) = α` up to
    /// torsion.
    pub start: ExpPoint,
    /// Generators of the avoided group Γ (given elements and the
    /// translation basis).
    pub gamma: Vec<RationalFunction>,
    pub variables_distinct: bool,
    pub independent: bool,
    pub avoids_gamma: bool,
    pub attempts: usize,
}

impl DensePointPlan {
    pub fn verified(&self) -> bool {
        self.variables_distinct && self.independent && self.avoids_gamma
    }
}

const PLAN_RETRIES: usize = 8;

fn linear_candidate(ctx: &std::sync::Arc<GfCtx>, nv: usize, var: usize, deg: u32, idx: u64) -> MPoly {
    let q = ctx.order().to_u64().unwrap_or(u64::MAX);
    let t = MPoly::var(ctx, nv, var);
    let mut poly = t.pow(deg);
    let mut rest = idx;
    for k in 0..deg {
        let c = ctx.from_index(&Int::from(rest % q));
        rest /= q;
        poly = poly.add(&t.pow(k).scale(&c));
    }
    poly
}

/// The `skip`-th monic polynomial in `t_var` (by degree, then coefficient
/// index) that is coprime to everything in `taken`.
fn fresh_poly(ctx: &std::sync::Arc<GfCtx>, nv: usize, var: usize, skip: usize, taken: &[MPoly]) -> Option<MPoly> {
    let q = ctx.order().to_u64().unwrap_or(u64::MAX);
    let mut seen = 0;
    for deg in 1..=6u32 {
        let count = q.checked_pow(deg).unwrap_or(u64::MAX).min(4096);
        for idx in 0..count {
            let cand = linear_candidate(ctx, nv, var, deg, idx);
            if taken.iter().all(|f| cand.gcd(f).is_constant()) {
                if seen == skip {
                    return Some(cand);
                }
                seen += 1;
            }
        }
    }
    None
}

/// No relation of the whole family involves α.
fn avoids(alpha: &[RationalFunction], gamma: &[RationalFunction]) -> Result<bool> {
    if gamma.is_empty() || alpha.is_empty() {
        return Ok(true);
    }
    let all: Vec<RationalFunction> = alpha.iter().chain(gamma).cloned().collect();
    let basis = coprime_basis(&all)?;
    let n = basis.torsion_modulus();
    let mut exps = Vec::new();
    let mut tors = Vec::new();
    for x in &all {
        let (e, t) = to_exponents(x, &basis)?;
        exps.push(e);
        tors.push((t * rat_int(&n)).to_integer());
    }
    let lattice = relation_lattice(&exps, &tors, &n);
    Ok(lattice.iter().all(|v| v[..alpha.len()].iter().all(|x| x.is_zero_like())))
}

/// Builds α and the starting point for condition A. With `share_variables`
/// a class larger than `d` reuses variables cyclically; otherwise that is an
/// error.
pub fn construct_dense_point(
    sys: &System,
    nf: &NormalForm,
    gamma_avoid: &[RationalFunction],
    share_variables: bool,
) -> Result<DensePointPlan> {
    let t = nf
        .torus
        .as_ref()
        .ok_or_else(|| TrichotomyError::Unsupported("dense points are built on the torus factor only".into()))?;
    let d = sys.d();
    let ctx = sys.ctx().clone();
    let n = t.matrix.h.rows();
    let lasts: HashSet<usize> = block_lasts(&t.matrix.unipotent_blocks).into_iter().collect();
    let mut classes = Vec::new();
    let mut per_class: BTreeMap<i64, usize> = BTreeMap::new();
    let mut variables_distinct = true;
    for (bi, (b, r)) in t.matrix.frobenius_block_rows().into_iter().enumerate() {
        let offset = per_class.entry(b.exponent).or_insert(0);
        if *offset >= d {
            if !share_variables {
                return Err(TrichotomyError::Invariant(format!(
                    "Frobenius class {} needs more than d = {d} variables",
                    b.exponent
                )));
            }
            variables_distinct = false;
        }
        classes.push(ClassAssignment {
            exponent: b.exponent,
            block: bi,
            offset: *offset,
            variable: *offset % d,
            coordinates: r.collect(),
        });
        *offset += 1;
    }
    let mut gamma: Vec<RationalFunction> = gamma_avoid.to_vec();
    gamma.extend(sys.basis.elems().iter().map(|f| RationalFunction::from_poly(f.clone())));
    let gamma_polys: Vec<MPoly> = gamma
        .iter()
        .flat_map(|g| [g.num().clone(), g.den().clone()])
        .filter(|f| !f.is_constant())
        .collect();
    let one = RationalFunction::one(&ctx, d);
    for attempt in 0..PLAN_RETRIES {
        let mut taken = gamma_polys.clone();
        let mut coords: Vec<Option<RationalFunction>> = vec![None; n];
        for &i in &lasts {
            coords[i] = Some(one.clone());
        }
        let mut failed = false;
        for c in &classes {
            for &i in &c.coordinates {
                match fresh_poly(&ctx, d, c.variable, attempt, &taken) {
                    Some(f) => {
                        taken.push(f.clone());
                        coords[i] = Some(RationalFunction::from_poly(f));
                    }
                    None => failed = true,
                }
            }
        }
        let mut var = 0;
        for slot in coords.iter_mut().filter(|c| c.is_none()) {
            match fresh_poly(&ctx, d, var % d, attempt, &taken) {
                Some(f) => {
                    taken.push(f.clone());
                    *slot = Some(RationalFunction::from_poly(f));
                }
                None => failed = true,
            }
            var += 1;
        }
        if failed {
            continue;
        }
        let coords: Vec<RationalFunction> = coords.into_iter().map(|c| c.expect("assigned")).collect();
        let nontrivial: Vec<RationalFunction> = coords.iter().filter(|c| !c.is_one()).cloned().collect();
        let independent = nontrivial.is_empty() || mult_dependence(&nontrivial)?.is_none();
        let avoids_gamma = avoids(&nontrivial, &gamma)?;
        if !(independent && avoids_gamma) {
            continue;
        }
        let system = sys.rebase(&nontrivial)?;
        let alpha = point_over(&coords, &system.basis)?;
        let rebuilt = build_normal_form(&system.map)?;
        let tn = rebuilt.torus.as_ref().expect("torus factor");
        let hinv = tn
            .matrix
            .h
            .inverse()
            .ok_or_else(|| TrichotomyError::Invariant("conjugation is singular".into()))?;
        let start = alpha.mul(&tn.shift.inv()).act_rational(&hinv, sys.p())?;
        return Ok(DensePointPlan {
            classes,
            coordinates: coords,
            system,
            alpha,
            start,
            gamma,
            variables_distinct,
            independent,
            avoids_gamma,
            attempts: attempt + 1,
        });
    }
    Err(TrichotomyError::Domain(format!("no admissible dense point after {PLAN_RETRIES} attempts")))
}

fn point_over(coords: &[RationalFunction], basis: &CoprimeBasis) -> Result<ExpPoint> {
    let mut exps = Vec::new();
    let mut tors = Vec::new();
    for c in coords {
        let (e, t) = to_exponents(c, basis)?;
        exps.push(e.iter().map(rat_int).collect());
        tors.push(t);
    }
    Ok(ExpPoint::new(exps, tors))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TorsionRule {
    /// Torsion representative 0 at every step.
    Deterministic,
    /// Report the whole coset: the n-th iterate is known up to `m^n`-torsion.
    Enumerate,
}

#[derive(Clone, Debug)]
pub struct Orbit {
    pub points: Vec<ExpPoint>,
    /// Torsion modulus of each point (1 for the start).
    pub torsion_modulus: Vec<Int>,
}

pub fn simulate_orbit(sys: &System, x0: &ExpPoint, steps: usize, rule: TorsionRule) -> Result<Orbit> {
    let map = sys
        .map
        .torus
        .as_ref()
        .ok_or_else(|| TrichotomyError::Unsupported("orbits are simulated on torus factors only".into()))?;
    let p = Int::from(sys.p());
    if (&sys.m % &p).is_zero_like() || (map.denominator() % &p).is_zero_like() {
        return Err(TrichotomyError::Unsupported(format!(
            "denominator {} is divisible by p (inseparable correspondence)",
            sys.m
        )));
    }
    if x0.dim() != map.dim() || x0.basis_len() != map.beta.basis_len() {
        return Err(TrichotomyError::Domain("starting point does not match the system".into()));
    }
    let mut points = vec![x0.clone()];
    let mut torsion_modulus = vec![Int::one()];
    let mut acc = Int::one();
    for _ in 0..steps {
        let next = map.step(points.last().unwrap(), sys.p())?;
        points.push(next);
        acc *= &sys.m;
        torsion_modulus.push(match rule {
            TorsionRule::Deterministic => sys.m.clone(),
            TorsionRule::Enumerate => acc.clone(),
        });
    }
    Ok(Orbit { points, torsion_modulus })
}

#[derive(Clone, Debug)]
pub struct EvidenceOptions {
    /// Largest entry allowed in a binomial relation vector.
    pub index_bound: u64,
    pub spec_trials: usize,
    pub degree_bound: u32,
    pub seed: u64,
    /// Explicit orbit indices to test instead of the whole orbit.
    pub subset: Option<Vec<usize>>,
}

impl Default for EvidenceOptions {
    fn default() -> Self {
        EvidenceOptions { index_bound: 64, spec_trials: 5, degree_bound: 3, seed: 0, subset: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvidenceVerdict {
    DenseEvidence,
    RelationFound,
    Inconclusive,
}

impl EvidenceVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            EvidenceVerdict::DenseEvidence => "DENSE-EVIDENCE",
            EvidenceVerdict::RelationFound => "RELATION-FOUND",
            EvidenceVerdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// `x^v = c` along the whole orbit.
#[derive(Clone, Debug)]
pub struct BinomialRelation {
    pub v: Vec<Int>,
    pub constant: ExpPoint,
}

#[derive(Clone, Debug)]
pub struct TrialResult {
    pub trial: usize,
    /// Distinct specialized points examined; evaluation stops once the rank
    /// reaches the number of monomials.
    pub distinct_points: usize,
    pub rank: usize,
}

#[derive(Clone, Debug)]
pub struct EvidenceReport {
    pub verdict: EvidenceVerdict,
    pub relation: Option<BinomialRelation>,
    pub points: usize,
    pub monomials: usize,
    /// Degree of the specialization field over F_p.
    pub field_degree: usize,
    pub trials: Vec<TrialResult>,
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Exponent tuples of total degree at most `deg` in `n` variables.
fn monomials(n: usize, deg: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|pre: Vec<u32>| {
                let used: u32 = pre.iter().sum();
                (0..=deg - used).map(move |e| {
                    let mut v = pre.clone();
                    v.push(e);
                    v
                })
            })
            .collect();
    }
    out
}

/// Integer `v` with `‖v‖_∞ ≤ bound` and `x^v` constant along the points.
pub fn binomial_relation(points: &[ExpPoint], bound: u64) -> Option<BinomialRelation> {
    let x0 = points.first()?;
    let n = x0.dim();
    let s = x0.basis_len();
    let mut rows = Vec::new();
    for x in &points[1..] {
        for k in 0..s {
            let row: Vec<Rat> = (0..n).map(|i| &x.exps()[i][k] - &x0.exps()[i][k]).collect();
            if row.iter().any(|v| !v.is_zero()) {
                rows.push(row);
            }
        }
    }
    let kernel: Vec<Vec<Rat>> = if rows.is_empty() {
        (0..n).map(|i| (0..n).map(|j| rat((i == j) as i64)).collect()).collect()
    } else {
        QMat::from_rows(rows).kernel()
    };
    let mut cands = reduce_basis(kernel.iter().map(|v| primitive_integer_vector(v)).collect());
    for v in cands.iter_mut() {
        normalize_sign(v);
    }
    cands.sort_by(|a, b| norm2(a).cmp(&norm2(b)).then_with(|| b.cmp(a)));
    for mut v in cands {
        // make the torsion part constant as well
        let diffs = points.iter().map(|x| character(&x.mul(&x0.inv()), &v));
        let k = common_denominator(diffs.flat_map(|c| c.tors().to_vec()).collect::<Vec<_>>().iter());
        v.iter_mut().for_each(|x| *x *= &k);
        if v.iter().all(|x| x.abs() <= Int::from(bound)) {
            let constant = character(x0, &v);
            return Some(BinomialRelation { v, constant });
        }
    }
    None
}

/// Smallest extension degree `E = e·k` with `k > M` and `p^E ≥ max(10M, 2^16)`.
pub fn specialization_degree(p: u64, e: usize, m: usize) -> usize {
    let target = ((10 * m).max(1 << 16)) as f64;
    let mut k = m + 1;
    while (p as f64).powf((e * k) as f64) < target {
        k += 1;
    }
    e * k
}

fn specialize(
    points: &[ExpPoint],
    basis: &CoprimeBasis,
    big: &std::sync::Arc<GfCtx>,
    emb: &Embedding,
    mons: &[Vec<u32>],
    seed: u64,
    trial: usize,
) -> TrialResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let nv = basis.nvars();
    let group = big.order() - 1u32;
    let vals = loop {
        let a: Vec<Gf> = (0..nv).map(|_| big.random(&mut rng)).collect();
        let v: Vec<Gf> = basis.elems().iter().map(|f| f.eval_with(&a, |c| emb.apply(c))).collect();
        if v.iter().all(|x| !x.is_zero()) {
            break v;
        }
    };
    let den = common_denominator(points.iter().flat_map(|x| x.exps().iter().flatten()));
    let one = big.one();
    // v^(2^b) for every basis value
    let bits = group.bits() as usize;
    let squares: Vec<Vec<Gf>> = vals
        .iter()
        .map(|v| {
            let mut t = vec![v.clone()];
            for _ in 1..bits {
                let last = t.last().unwrap();
                t.push(last.mul_ref(last));
            }
            t
        })
        .collect();
    let power = |i: usize, k: &Int| {
        (0..bits as u64).filter(|&b| k.bit(b)).fold(one.clone(), |acc, b| acc.mul_ref(&squares[i][b as usize]))
    };
    let deg = mons.iter().flatten().copied().max().unwrap_or(0) as usize;
    let m = mons.len();
    let mut seen = HashSet::new();
    // echelon rows with a leading 1 at the recorded column
    let mut echelon: Vec<(usize, Vec<Gf>)> = Vec::new();
    for x in points {
        let y: Vec<Gf> = x
            .exps()
            .iter()
            .map(|row| {
                row.iter().enumerate().fold(one.clone(), |acc, (i, e)| {
                    let k = (e * rat_int(&den)).to_integer().mod_floor(&group);
                    acc.mul_ref(&power(i, &k))
                })
            })
            .collect();
        if !seen.insert(y.clone()) {
            continue;
        }
        let powers: Vec<Vec<Gf>> = y
            .iter()
            .map(|c| {
                let mut ps = vec![one.clone()];
                for _ in 0..deg {
                    let last = ps.last().unwrap().mul_ref(c);
                    ps.push(last);
                }
                ps
            })
            .collect();
        let mut row: Vec<Gf> = mons
            .iter()
            .map(|mo| mo.iter().zip(&powers).fold(one.clone(), |acc, (&e, ps)| acc.mul_ref(&ps[e as usize])))
            .collect();
        for (col, b) in &echelon {
            let f = row[*col].clone();
            if !f.is_zero() {
                for (r, bv) in row.iter_mut().zip(b) {
                    *r = r.sub_ref(&f.mul_ref(bv));
                }
            }
        }
        if let Some(col) = row.iter().position(|c| !c.is_zero()) {
            let inv = row[col].inv_ref().expect("nonzero pivot");
            echelon.push((col, row.iter().map(|c| c.mul_ref(&inv)).collect()));
            if echelon.len() == m {
                break;
            }
        }
    }
    TrialResult { trial, distinct_points: seen.len(), rank: echelon.len() }
}

/// Two tests on an orbit over the basis: a bounded binomial relation, and
/// polynomial relations of degree ≤ `degree_bound` after specializing
/// `t1..td` into a large finite field. Orbit points are raised to the
/// common exponent denominator first, which keeps closures comparable.
pub fn density_evidence(points: &[ExpPoint], basis: &CoprimeBasis, opts: &EvidenceOptions) -> Result<EvidenceReport> {
    let chosen: Vec<ExpPoint> = match &opts.subset {
        Some(idx) => idx
            .iter()
            .map(|&i| points.get(i).cloned().ok_or_else(|| TrichotomyError::Domain(format!("subset index {i} out of range"))))
            .collect::<Result<_>>()?,
        None => points.to_vec(),
    };
    if chosen.is_empty() {
        return Err(TrichotomyError::Domain("empty orbit".into()));
    }
    let n = chosen[0].dim();
    let m = binomial(n + opts.degree_bound as usize, opts.degree_bound as usize);
    let ctx = basis.ctx();
    let e_big = specialization_degree(ctx.p(), ctx.e(), m);
    let relation = binomial_relation(&chosen, opts.index_bound);
    let big = GfCtx::new(ctx.p(), e_big)?;
    let emb = Embedding::new(ctx, &big)?;
    let mons = monomials(n, opts.degree_bound);
    let trials: Vec<TrialResult> = (0..opts.spec_trials)
        .into_par_iter()
        .map(|i| specialize(&chosen, basis, &big, &emb, &mons, opts.seed, i))
        .collect();
    let all_full = !trials.is_empty() && trials.iter().all(|t| t.rank == m);
    let all_deficient_determined = !trials.is_empty() && trials.iter().all(|t| t.rank < m && t.distinct_points > m);
    let verdict = if relation.is_some() || all_deficient_determined {
        EvidenceVerdict::RelationFound
    } else if all_full {
        EvidenceVerdict::DenseEvidence
    } else {
        EvidenceVerdict::Inconclusive
    };
    Ok(EvidenceReport { verdict, relation, points: chosen.len(), monomials: m, field_degree: e_big, trials })
}

#[derive(Clone, Debug)]
pub struct AnalyzeOptions {
    pub steps: usize,
    pub evidence: EvidenceOptions,
    /// Extra elements of K^* the dense point must avoid.
    pub gamma_avoid: Vec<RationalFunction>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { steps: 50, evidence: EvidenceOptions::default(), gamma_avoid: Vec::new() }
    }
}

#[derive(Clone, Debug)]
pub struct ConditionA {
    pub plan: DensePointPlan,
    pub orbit: Orbit,
    pub evidence: EvidenceReport,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub d: usize,
    pub normal_form: NormalForm,
    pub condition_b: Option<WitnessB>,
    pub condition_c: Option<WitnessC>,
    pub condition_a: Option<ConditionA>,
    /// Abstract factors are analyzed at the matrix level only.
    pub matrix_level_only: bool,
    pub notes: Vec<String>,
}

pub fn analyze(sys: &System, opts: &AnalyzeOptions) -> Result<Verdict> {
    let nf = build_normal_form(&sys.map)?;
    let d = sys.d();
    let condition_b = check_condition_b(&nf)?;
    let condition_c = check_condition_c(&nf, d)?;
    let mut notes = Vec::new();
    if let Some(w) = condition_b.as_ref().filter(|w| !w.verified) {
        return Err(TrichotomyError::Invariant(format!("invariant character failed verification: {:?}", w.sigma)));
    }
    if condition_c.as_ref().is_some_and(|w| !w.verified) {
        return Err(TrichotomyError::Invariant("Frobenius quotient failed verification".into()));
    }
    let mut condition_a = None;
    if condition_b.is_some() {
        notes.push("an invariant character exists, so no orbit is dense; no point constructed".into());
    } else if nf.torus.is_none() {
        notes.push("no torus factor: dense points are not constructed for abstract factors".into());
    } else {
        let plan = construct_dense_point(sys, &nf, &opts.gamma_avoid, condition_c.is_some())?;
        if !plan.variables_distinct {
            notes.push("a Frobenius class exceeds d; the candidate point shares variables".into());
        }
        let orbit = simulate_orbit(&plan.system, &plan.start, opts.steps, TorsionRule::Deterministic)?;
        let evidence = density_evidence(&orbit.points, &plan.system.basis, &opts.evidence)?;
        condition_a = Some(ConditionA { plan, orbit, evidence });
    }
    Ok(Verdict { d, matrix_level_only: !nf.factors.is_empty(), normal_form: nf, condition_b, condition_c, condition_a, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse::{default_names, parse_rational_function};
    use crate::system::SystemDescription;

    fn system(src: &str) -> System {
        SystemDescription::from_json(src).unwrap().build(None).unwrap()
    }

    fn torus_system(p: u64, d: usize, rows: &str, translation: Option<&str>) -> System {
        let n = rows.matches('[').count() - 1;
        let tr = translation.map_or(String::new(), |t| format!(", \"translation\": {t}"));
        system(&format!(
            r#"{{"p": {p}, "d": {d}, "group": [{{"type": "torus", "rank": {n}}}], "map": {{"blocks": [{rows}]{tr}}}}}"#
        ))
    }

    fn intro(d: usize) -> System {
        torus_system(3, d, "[[1,0,0],[0,3,0],[0,0,3]]", None)
    }

    #[test]
    fn intro_example_b_and_c() {
        let v = analyze(&intro(1), &AnalyzeOptions::default()).unwrap();
        let b = v.condition_b.unwrap();
        assert!(b.verified);
        assert!(matches!(&b.character, Character::Torus(x) if *x == vec![Int::one(), Int::from(0), Int::from(0)]));
        let c = v.condition_c.unwrap();
        assert!(c.verified);
        assert_eq!((c.dim_z, c.n0, c.r), (2, 1, 1));
        assert_eq!(c.torus_rows.unwrap(), crate::matrix::qmat(&[&[0, 1, 0], &[0, 0, 1]]));
        assert!(v.condition_a.is_none());
    }

    #[test]
    fn threshold_is_strict() {
        let nf = build_normal_form(&intro(2).map).unwrap();
        assert!(check_condition_c(&nf, 2).unwrap().is_none());
        let jb = torus_system(3, 1, "[[3,1],[0,3]]", None);
        let nf = build_normal_form(&jb.map).unwrap();
        assert!(check_condition_c(&nf, 1).unwrap().is_none());
    }

    #[test]
    fn unipotent_dependence_examples() {
        let s = torus_system(5, 1, "[[1,1,0],[0,1,0],[0,0,1]]", Some(r#"["1", "t", "t^2"]"#));
        let nf = build_normal_form(&s.map).unwrap();
        let w = check_condition_b(&nf).unwrap().unwrap();
        assert!(w.verified);
        assert_eq!(w.sigma, vec![Int::from(2), Int::from(-1)]);
        let s = torus_system(5, 1, "[[1,1,0],[0,1,0],[0,0,1]]", Some(r#"["1", "t", "t+1"]"#));
        let nf = build_normal_form(&s.map).unwrap();
        assert!(check_condition_b(&nf).unwrap().is_none());
    }

    #[test]
    fn frobenius_orbit_is_dense_evidence() {
        let s = torus_system(3, 1, "[[3]]", None);
        let v = analyze(&s, &AnalyzeOptions { steps: 29, ..Default::default() }).unwrap();
        assert!(v.condition_b.is_none() && v.condition_c.is_none());
        let a = v.condition_a.unwrap();
        assert_eq!(a.plan.coordinates[0].to_string(), "t1");
        assert_eq!(a.evidence.verdict, EvidenceVerdict::DenseEvidence);
    }

    #[test]
    fn translation_orbit() {
        let s = torus_system(3, 1, "[[1]]", Some(r#"["t"]"#));
        let v = analyze(&s, &AnalyzeOptions::default()).unwrap();
        assert!(v.condition_b.is_none());
        let a = v.condition_a.unwrap();
        assert!(a.plan.coordinates[0].is_one());
        assert_eq!(a.orbit.points[3].exps()[0], vec![rat(3)]);
        assert_eq!(a.evidence.verdict, EvidenceVerdict::DenseEvidence);
    }

    #[test]
    fn relations_in_orbits() {
        let s = torus_system(3, 1, "[[1]]", None);
        let ctx = s.ctx().clone();
        let t = parse_rational_function("t", &ctx, &default_names(1)).unwrap();
        let s2 = s.rebase(&[t]).unwrap();
        let x0 = s2.point_from_literals(&["t".into()]).unwrap();
        let orbit = simulate_orbit(&s2, &x0, 10, TorsionRule::Deterministic).unwrap();
        let r = density_evidence(&orbit.points, &s2.basis, &EvidenceOptions::default()).unwrap();
        assert_eq!(r.verdict, EvidenceVerdict::RelationFound);
        assert_eq!(r.relation.unwrap().v, vec![Int::one()]);
        let s = torus_system(3, 1, "[[1,0],[0,1]]", Some(r#"["t", "t"]"#));
        let x0 = ExpPoint::identity(2, 1);
        let orbit = simulate_orbit(&s, &x0, 20, TorsionRule::Deterministic).unwrap();
        let r = density_evidence(&orbit.points, &s.basis, &EvidenceOptions::default()).unwrap();
        assert_eq!(r.relation.unwrap().v, vec![Int::one(), Int::from(-1)]);
    }

    #[test]
    fn intro_orbit_and_plan() {
        let s = intro(1);
        let ctx = s.ctx().clone();
        let t = parse_rational_function("t", &ctx, &default_names(1)).unwrap();
        let s = s.rebase(&[t]).unwrap();
        let x0 = s.point_from_literals(&["t".into(), "t".into(), "t".into()]).unwrap();
        let o = simulate_orbit(&s, &x0, 2, TorsionRule::Deterministic).unwrap();
        let e: Vec<Rat> = o.points[2].exps().iter().map(|r| r[0].clone()).collect();
        assert_eq!(e, vec![rat(1), rat(9), rat(9)]);
        let s2 = intro(2);
        let nf = build_normal_form(&s2.map).unwrap();
        let plan = construct_dense_point(&s2, &nf, &[], false).unwrap();
        assert!(plan.verified());
        let vars: Vec<usize> = plan.classes.iter().map(|c| c.variable).collect();
        assert_eq!(vars, vec![0, 1]);
    }

    #[test]
    fn correspondence_reports_modulus() {
        let s = system(r#"{"p": 3, "d": 1, "group": [{"type": "torus", "rank": 1}],
            "map": {"blocks": [[[2]]], "m": 2, "translation": ["t"]}}"#);
        let x0 = ExpPoint::identity(1, 1);
        let o = simulate_orbit(&s, &x0, 3, TorsionRule::Deterministic).unwrap();
        assert_eq!(o.torsion_modulus[1], Int::from(2));
        let o = simulate_orbit(&s, &x0, 3, TorsionRule::Enumerate).unwrap();
        assert_eq!(o.torsion_modulus[3], Int::from(8));
        let bad = system(r#"{"p": 3, "d": 1, "group": [{"type": "torus", "rank": 1}],
            "map": {"blocks": [[[3]]], "m": 3}}"#);
        assert!(simulate_orbit(&bad, &ExpPoint::identity(1, 0), 1, TorsionRule::Deterministic).is_err());
    }
}
