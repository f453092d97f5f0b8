//! Input formats for the auxiliary commands and JSON/CSV rendering of
//! results. Rationals are written as strings (`"3/2"`), which keeps the
//! output exact and byte-stable.

use std::sync::Arc;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::endo::{Algebra, RingElem};
use crate::field::parse::{default_names, parse_rational_function};
use crate::field::{coprime_basis, CoprimeBasis, ExpPoint, GfCtx, RationalFunction};
use crate::fsets::{FSet, FrobCount, FrobEq, Membership};
use crate::matrix::Mat;
use crate::poly::Poly;
use crate::reduction::{FrobeniusBlock, MatrixNormalForm, NormalForm};
use crate::scalar::{int_pow, is_prime_u64, rat, rat_to_string, Int, Rat, Scalar};
use crate::skew::JordanSpec;
use crate::system::{build_algebra, input_err, json_matrix, json_rat, literals_to_point, ring_entry, InputError, RingSpec};
use crate::trichotomy::{Character, ConditionA, EvidenceReport, Orbit, Verdict, WitnessB, WitnessC};

/// Scalars that render as JSON.
pub trait JsonScalar: Scalar {
    fn to_json(&self) -> Value;
    fn label(&self) -> String;
}

impl JsonScalar for Rat {
    fn to_json(&self) -> Value {
        Value::String(rat_to_string(self))
    }
    fn label(&self) -> String {
        rat_to_string(self)
    }
}

impl JsonScalar for RingElem {
    fn to_json(&self) -> Value {
        Value::Array(self.coords().iter().map(|c| Value::String(rat_to_string(c))).collect())
    }
    fn label(&self) -> String {
        self.to_string()
    }
}

pub fn int_json(x: &Int) -> Value {
    Value::String(x.to_string())
}

pub fn vec_json<T: JsonScalar>(v: &[T]) -> Value {
    Value::Array(v.iter().map(|x| x.to_json()).collect())
}

pub fn ints_json(v: &[Int]) -> Value {
    Value::Array(v.iter().map(int_json).collect())
}

pub fn mat_json<T: JsonScalar>(m: &Mat<T>) -> Value {
    Value::Array(m.to_rows().iter().map(|r| vec_json(r)).collect())
}

/// Exponents over the basis and torsion; also the coordinates as rational
/// functions when every exponent is integral.
pub fn point_json(x: &ExpPoint, basis: &CoprimeBasis, names: &[String]) -> Value {
    let literals: Option<Vec<String>> = x
        .exps()
        .iter()
        .zip(x.tors())
        .map(|(row, t)| {
            if !row.iter().all(|e| e.is_integer()) {
                return None;
            }
            let ints: Vec<Int> = row.iter().map(|e| e.to_integer()).collect();
            basis.reconstruct(&ints, t).ok().map(|f| f.fmt_with(names))
        })
        .collect();
    json!({
        "exponents": x.exps().iter().map(|r| vec_json(r)).collect::<Vec<_>>(),
        "torsion": vec_json(x.tors()),
        "literals": literals,
    })
}

pub fn basis_json(basis: &CoprimeBasis, names: &[String]) -> Value {
    Value::Array(basis.elems().iter().map(|f| Value::String(f.fmt_with(names))).collect())
}

fn jordan_label(eigen: &str, size: usize) -> String {
    format!("J_{{{eigen},{size}}}")
}

fn frobenius_eigen_label(b: &FrobeniusBlock, q: &Int, abstract_factor: bool) -> String {
    if abstract_factor {
        return format!("F^{}", b.exponent);
    }
    let qk = int_pow(q, b.exponent.unsigned_abs());
    if b.exponent >= 0 {
        qk.to_string()
    } else {
        format!("1/{qk}")
    }
}

fn matrix_nf_json<T: JsonScalar>(m: &MatrixNormalForm<T>, q: &Int, abstract_factor: bool) -> Value {
    let mut labels: Vec<String> = m.unipotent_blocks.iter().map(|&s| jordan_label("1", s)).collect();
    labels.extend(
        m.frobenius_blocks
            .iter()
            .map(|b| jordan_label(&frobenius_eigen_label(b, q, abstract_factor), b.size)),
    );
    json!({
        "nStar": m.n_star(),
        "H": mat_json(&m.h),
        "APhi": mat_json(&m.a_phi),
        "AStar": mat_json(&m.a_star),
        "unipotentBlocks": m.unipotent_blocks,
        "frobeniusBlocks": m.frobenius_blocks.iter().map(|b| json!({"exponent": b.exponent, "size": b.size})).collect::<Vec<_>>(),
        "nfp": m.nfp.as_ref().map(mat_json),
        "jordanBlocks": labels,
        "l2": int_json(&m.l2),
        "matrixIdentity": m.matrix_identity_holds(),
    })
}

pub fn normal_form_json(nf: &NormalForm, basis: &CoprimeBasis, names: &[String]) -> Value {
    let torus = nf.torus.as_ref().map(|t| {
        let mut v = matrix_nf_json(&t.matrix, &nf.q, false);
        let obj = v.as_object_mut().expect("object");
        obj.insert("betaStar".into(), point_json(&t.beta_star, basis, names));
        obj.insert("unipotentTranslation".into(), point_json(&t.unipotent_translation, basis, names));
        obj.insert("gamma".into(), point_json(&t.gamma, basis, names));
        obj.insert("shift".into(), point_json(&t.shift, basis, names));
        obj.insert("betaPhi".into(), point_json(&t.beta_phi, basis, names));
        obj.insert("z".into(), t.z.as_ref().map_or(Value::Null, |z| point_json(z, basis, names)));
        v
    });
    let factors: Vec<Value> = nf
        .factors
        .iter()
        .map(|f| {
            let mut v = matrix_nf_json(&f.matrix, &nf.q, true);
            let obj = v.as_object_mut().expect("object");
            obj.insert("label".into(), json!(f.label));
            obj.insert("dim".into(), json!(f.dim));
            v
        })
        .collect();
    json!({
        "p": nf.p,
        "q": int_json(&nf.q),
        "nStar": nf.n_star,
        "basis": basis_json(basis, names),
        "torus": torus,
        "factors": factors,
    })
}

pub fn witness_b_json(w: &WitnessB) -> Value {
    let vector = match &w.character {
        Character::Torus(v) => ints_json(v),
        Character::Abstract { label, row } => json!({"factor": label, "row": vec_json(row)}),
    };
    json!({"vector": vector, "sigma": ints_json(&w.sigma), "support": w.support, "verified": w.verified})
}

pub fn witness_c_json(w: &WitnessC) -> Value {
    json!({
        "T": w.torus_rows.as_ref().map(mat_json),
        "factorRows": w.factor_rows.iter().map(|(l, m)| json!({"factor": l, "rows": mat_json(m)})).collect::<Vec<_>>(),
        "n0": w.n0,
        "r": w.r,
        "dimZ": w.dim_z,
        "ell0": int_json(&w.ell0),
        "verified": w.verified,
    })
}

pub fn evidence_json(e: &EvidenceReport, basis: &CoprimeBasis, names: &[String]) -> Value {
    json!({
        "verdict": e.verdict.label(),
        "relation": e.relation.as_ref().map(|r| json!({"v": ints_json(&r.v), "constant": point_json(&r.constant, basis, names)})),
        "points": e.points,
        "monomials": e.monomials,
        "fieldDegree": e.field_degree,
        "trials": e.trials.iter().map(|t| json!({"trial": t.trial, "distinctPoints": t.distinct_points, "rank": t.rank})).collect::<Vec<_>>(),
    })
}

/// Number of orbit points echoed in reports.
pub const ORBIT_SAMPLE: usize = 5;

fn condition_a_json(a: &ConditionA) -> Value {
    let sys = &a.plan.system;
    let names = &sys.names;
    json!({
        "alpha": a.plan.coordinates.iter().map(|c| c.fmt_with(names)).collect::<Vec<_>>(),
        "point": point_json(&a.plan.start, &sys.basis, names),
        "classes": a.plan.classes.iter().map(|c| json!({
            "exponent": c.exponent, "block": c.block, "offset": c.offset,
            "variable": names[c.variable], "coordinates": c.coordinates,
        })).collect::<Vec<_>>(),
        "gamma": a.plan.gamma.iter().map(|g| g.fmt_with(names)).collect::<Vec<_>>(),
        "checks": {
            "variablesDistinct": a.plan.variables_distinct,
            "independent": a.plan.independent,
            "avoidsGamma": a.plan.avoids_gamma,
            "attempts": a.plan.attempts,
        },
        "basis": basis_json(&sys.basis, names),
        "orbitLength": a.orbit.points.len(),
        "orbitSample": a.orbit.points.iter().take(ORBIT_SAMPLE).map(|x| point_json(x, &sys.basis, names)).collect::<Vec<_>>(),
        "evidence": evidence_json(&a.evidence, &sys.basis, names),
    })
}

pub fn verdict_json(v: &Verdict, basis: &CoprimeBasis, names: &[String]) -> Value {
    json!({
        "d": v.d,
        "normalForm": normal_form_json(&v.normal_form, basis, names),
        "conditionB": v.condition_b.as_ref().map(witness_b_json),
        "conditionC": v.condition_c.as_ref().map(witness_c_json),
        "conditionA": v.condition_a.as_ref().map(condition_a_json),
        "matrixLevelOnly": v.matrix_level_only,
        "notes": v.notes,
    })
}

pub fn jordan_json<T: JsonScalar>(a: &Mat<T>, j: &JordanSpec<T>) -> Value {
    let jm = j.jordan_matrix();
    let ev = j.eigenvalue.label();
    json!({
        "eigenvalue": j.eigenvalue.to_json(),
        "blocks": j.blocks,
        "jordanBlocks": j.blocks.iter().map(|&s| jordan_label(&ev, s)).collect::<Vec<_>>(),
        "P": mat_json(&j.p),
        "PInv": mat_json(&j.p_inv),
        "J": mat_json(&jm),
        "verified": j.p_inv.mul(a).mul(&j.p) == jm,
    })
}

pub fn membership_json(m: &Membership) -> Value {
    json!({
        "member": m.certificate.is_some(),
        "certificate": m.certificate.as_ref().map(|c| json!({"n": c.ns, "h": ints_json(&c.h_coeffs)})),
        "complete": m.complete,
    })
}

fn f64_json(x: Option<f64>) -> Value {
    x.filter(|v| v.is_finite()).map_or(Value::Null, |v| json!(v))
}

pub fn frob_count_json(c: &FrobCount, n_max: u64) -> Value {
    json!({
        "N": n_max,
        "count": c.total,
        "solvable": c.solvable,
        "curve": c.curve.iter().map(|&(n, k, dens)| json!({"N": n, "count": k, "density": dens})).collect::<Vec<_>>(),
        "growthExponent": f64_json(c.growth_exponent),
        "polylogConstant": f64_json(c.polylog_constant),
        "polylogBoundHolds": c.polylog_bound_holds,
        "degenerate": c.degenerate,
        "complete": c.complete,
    })
}

/// One row per step: index, per-coordinate exponent vectors and torsion
/// (JSON-encoded), torsion modulus.
pub fn orbit_csv(orbit: &Orbit) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let n = orbit.points.first().map_or(0, |x| x.dim());
    let mut header = vec!["step".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend(["torsion".into(), "torsion_modulus".into()]);
    w.write_record(&header)?;
    for (k, (x, m)) in orbit.points.iter().zip(&orbit.torsion_modulus).enumerate() {
        let mut rec = vec![k.to_string()];
        rec.extend(x.exps().iter().map(|r| vec_json(r).to_string()));
        rec.push(vec_json(x.tors()).to_string());
        rec.push(m.to_string());
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn parse_json<T: for<'de> Deserialize<'de>>(src: &str) -> Result<T, InputError> {
    serde_json::from_str(src).map_err(|e| input_err(format!("line {} column {}", e.line(), e.column()), e.to_string()))
}

/// Matrix for `jordan`: rational entries, or ring elements when `ring` is
/// given (`q` is the Frobenius degree of that ring).
#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct JordanInput {
    #[serde(default)]
    pub ring: Option<RingSpec>,
    #[serde(default)]
    pub q: Option<i64>,
    pub matrix: Value,
}

pub enum JordanMatrix {
    Rational(Mat<Rat>),
    Ring(Arc<Algebra>, Mat<RingElem>),
}

impl JordanInput {
    pub fn from_json(src: &str) -> Result<Self, InputError> {
        parse_json(src)
    }

    pub fn build(&self) -> Result<JordanMatrix, InputError> {
        let n = self.matrix.as_array().map_or(0, |r| r.len());
        if n == 0 {
            return Err(input_err("matrix", "expected a nonempty square matrix"));
        }
        match &self.ring {
            None => Ok(JordanMatrix::Rational(Mat::from_rows(json_matrix(&self.matrix, n, "matrix", json_rat)?))),
            Some(ring) => {
                let q = Int::from(self.q.ok_or_else(|| input_err("q", "q is required with a ring"))?);
                let alg = build_algebra(ring, &q, "ring")?;
                let rows = json_matrix(&self.matrix, n, "matrix", |v, p| ring_entry(&alg, v, p))?;
                Ok(JordanMatrix::Ring(alg, Mat::from_rows(rows)))
            }
        }
    }
}

/// An F-set `γ·Π F^{k_j ℕ}(α_j)·H` given by literals in `K = F_q(t1..td)`.
#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct FSetInput {
    pub p: u64,
    #[serde(default = "one")]
    pub e: usize,
    pub d: usize,
    #[serde(default)]
    pub variables: Option<Vec<String>>,
    pub gamma: Vec<String>,
    #[serde(default)]
    pub alphas: Vec<Vec<String>>,
    #[serde(default)]
    pub steps: Option<Vec<u32>>,
    #[serde(default)]
    pub subgroup: Vec<Vec<String>>,
    #[serde(default)]
    pub f_stable: bool,
    #[serde(default)]
    pub ell: Option<i64>,
}

fn one() -> usize {
    1
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct PointInput {
    pub point: Vec<String>,
}

impl PointInput {
    pub fn from_json(src: &str) -> Result<Self, InputError> {
        parse_json(src)
    }
}

pub struct FSetProblem {
    pub set: FSet,
    pub point: ExpPoint,
    pub basis: CoprimeBasis,
    pub names: Vec<String>,
}

impl FSetInput {
    pub fn from_json(src: &str) -> Result<Self, InputError> {
        parse_json(src)
    }

    /// Puts the set and the point over one coprime basis.
    pub fn build(&self, point: &PointInput) -> Result<FSetProblem, InputError> {
        if !is_prime_u64(self.p) {
            return Err(input_err("p", "p must be prime"));
        }
        if self.e == 0 || self.d == 0 {
            return Err(input_err("d", "e and d must be at least 1"));
        }
        let names = match &self.variables {
            Some(v) if v.len() == self.d => v.clone(),
            Some(v) => return Err(input_err("variables", format!("expected {} names, found {}", self.d, v.len()))),
            None => default_names(self.d),
        };
        let ctx = GfCtx::new(self.p, self.e).map_err(|e| input_err("p", e.to_string()))?;
        let n = self.gamma.len();
        let mut groups: Vec<(String, &Vec<String>)> = vec![("gamma".into(), &self.gamma), ("point".into(), &point.point)];
        groups.extend(self.alphas.iter().enumerate().map(|(i, a)| (format!("alphas[{i}]"), a)));
        groups.extend(self.subgroup.iter().enumerate().map(|(i, h)| (format!("subgroup[{i}]"), h)));
        let mut parsed: Vec<RationalFunction> = Vec::new();
        for (path, lits) in &groups {
            if lits.len() != n {
                return Err(input_err(path.clone(), format!("expected {n} coordinates")));
            }
            for (j, l) in lits.iter().enumerate() {
                let f = parse_rational_function(l, &ctx, &names)
                    .map_err(|e| input_err(format!("{path}[{j}]"), e.to_string()))?;
                if f.is_zero() {
                    return Err(input_err(format!("{path}[{j}]"), "coordinates must be nonzero"));
                }
                if !f.num().is_constant() || !f.den().is_constant() {
                    parsed.push(f);
                }
            }
        }
        let basis = if parsed.is_empty() {
            CoprimeBasis::empty(&ctx, self.d)
        } else {
            coprime_basis(&parsed).map_err(|e| input_err("gamma", e.to_string()))?
        };
        let pt = |path: &str, lits: &[String]| literals_to_point(lits, &basis, &ctx, &names, path);
        let gamma = pt("gamma", &self.gamma)?;
        let x = pt("point", &point.point)?;
        let alphas = self
            .alphas
            .iter()
            .enumerate()
            .map(|(i, a)| pt(&format!("alphas[{i}]"), a))
            .collect::<Result<Vec<_>, _>>()?;
        let subgroup = self
            .subgroup
            .iter()
            .enumerate()
            .map(|(i, h)| pt(&format!("subgroup[{i}]"), h))
            .collect::<Result<Vec<_>, _>>()?;
        let steps = self.steps.clone().unwrap_or_else(|| vec![1; alphas.len()]);
        let set = FSet::new(gamma, alphas, steps, subgroup, ctx.order().clone(), self.f_stable)
            .map_err(|e| input_err("fset", e.to_string()))?
            .with_ell(Int::from(self.ell.unwrap_or(1)));
        Ok(FSetProblem { set, point: x, basis, names })
    }
}

/// `P(n) = c0 + Σ c_j·q^{δ_j n_j}`; `poly` lists coefficients of P from
/// the constant term up.
#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct FrobEqInput {
    pub q: i64,
    pub poly: Vec<Value>,
    #[serde(default)]
    pub c0: Option<Value>,
    pub coeffs: Vec<Value>,
    #[serde(default)]
    pub deltas: Option<Vec<u32>>,
}

impl FrobEqInput {
    pub fn from_json(src: &str) -> Result<Self, InputError> {
        parse_json(src)
    }

    pub fn build(&self) -> Result<FrobEq, InputError> {
        let poly = self
            .poly
            .iter()
            .enumerate()
            .map(|(i, v)| json_rat(v, &format!("poly[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, v)| json_rat(v, &format!("coeffs[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let c0 = self.c0.as_ref().map(|v| json_rat(v, "c0")).transpose()?.unwrap_or_else(|| rat(0));
        let deltas = self.deltas.clone().unwrap_or_else(|| vec![1; coeffs.len()]);
        FrobEq::new(Poly::new(poly, &rat(0)), c0, coeffs, deltas, Int::from(self.q))
            .map_err(|e| input_err("equation", e.to_string()))
    }
}
