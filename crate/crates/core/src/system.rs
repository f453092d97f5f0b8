//! System descriptions: the field `F_q(t1..td)`, the group and the map,
//! read from JSON.

use std::sync::Arc;

use num_traits::One;
use serde::Deserialize;

use crate::endo::{Algebra, RingElem};
use crate::field::basis::{extend_basis, transition_matrix};
use crate::field::parse::default_names;
use crate::field::{coprime_basis, parse_rational_function, to_exponents, CoprimeBasis, ExpPoint, GfCtx, RationalFunction};
use crate::matrix::{Mat, QMat};
use crate::reduction::{AbstractMap, SelfMap, TorusMap};
use crate::scalar::{is_prime_u64, parse_rat, rat, rat_int, Int, Rat};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct InputError {
    /// Location inside the description, e.g. `map.translation[1]`.
    pub path: String,
    pub message: String,
}

pub(crate) fn input_err(path: impl Into<String>, message: impl Into<String>) -> InputError {
    InputError { path: path.into(), message: message.into() }
}

#[derive(Clone, Debug)]
pub struct System {
    pub map: SelfMap,
    /// Basis of the translation coordinates over `F_q(t1..td)`.
    pub basis: CoprimeBasis,
    pub names: Vec<String>,
    /// Declared denominator m of the torus map `M/m`.
    pub m: Int,
}

impl System {
    pub fn d(&self) -> usize {
        self.basis.nvars()
    }

    pub fn ctx(&self) -> &Arc<GfCtx> {
        self.basis.ctx()
    }

    pub fn p(&self) -> u64 {
        self.map.p
    }

    /// The same system with translations written over a refinement of the
    /// basis by `extra`.
    pub fn rebase(&self, extra: &[RationalFunction]) -> Result<System, crate::field::FieldError> {
        let basis = extend_basis(&self.basis, extra);
        let mut map = self.map.clone();
        if let Some(t) = map.torus.as_mut() {
            t.beta = rebase_point(&t.beta, &self.basis, &basis)?;
        }
        Ok(System { map, basis, names: self.names.clone(), m: self.m.clone() })
    }

    /// A point over the system basis from rational-function literals.
    pub fn point_from_literals(&self, lits: &[String]) -> Result<ExpPoint, InputError> {
        literals_to_point(lits, &self.basis, self.ctx(), &self.names, "point")
    }
}

/// Rewrites exponents over `from` as exponents over the refinement `to`.
pub fn rebase_point(x: &ExpPoint, from: &CoprimeBasis, to: &CoprimeBasis) -> Result<ExpPoint, crate::field::FieldError> {
    let t = transition_matrix(from, to)?;
    let exps = x
        .exps()
        .iter()
        .map(|row| {
            (0..to.len())
                .map(|k| row.iter().zip(&t).fold(rat(0), |acc, (e, tr)| acc + e * rat_int(&tr[k])))
                .collect()
        })
        .collect();
    Ok(ExpPoint::new(exps, x.tors().to_vec()))
}

pub(crate) fn literals_to_point(
    lits: &[String],
    basis: &CoprimeBasis,
    ctx: &Arc<GfCtx>,
    names: &[String],
    path: &str,
) -> Result<ExpPoint, InputError> {
    let mut exps = Vec::new();
    let mut tors = Vec::new();
    for (i, l) in lits.iter().enumerate() {
        let here = format!("{path}[{i}]");
        let f = parse_rational_function(l, ctx, names).map_err(|e| input_err(&here, e.to_string()))?;
        let (e, t) = to_exponents(&f, basis).map_err(|e| input_err(&here, e.to_string()))?;
        exps.push(e.iter().map(rat_int).collect());
        tors.push(t);
    }
    Ok(ExpPoint::new(exps, tors))
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct SystemDescription {
    pub p: u64,
    #[serde(default = "one")]
    pub e: usize,
    pub d: usize,
    #[serde(default)]
    pub variables: Option<Vec<String>>,
    #[serde(default = "default_m_bound")]
    pub m_bound: u32,
    pub group: Vec<FactorSpec>,
    pub map: MapSpec,
}

fn one() -> usize {
    1
}

fn default_m_bound() -> u32 {
    24
}

#[derive(Deserialize, Debug)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum FactorSpec {
    Torus {
        rank: usize,
    },
    Abstract {
        label: String,
        ring: RingSpec,
        #[serde(default = "one")]
        dim: usize,
        /// Multiplicity k in `C^k`.
        copies: usize,
    },
}

#[derive(Deserialize, Debug)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RingSpec {
    /// `ℤ` with Frobenius `q`.
    Integer,
    /// `ℤ[F]` with `F² − trace·F + norm = 0`.
    Quadratic { trace: i64, norm: i64 },
    /// `(a, b)_ℚ` with Frobenius `f` (a rational central element).
    Quaternion {
        a: i64,
        b: i64,
        frobenius: String,
        #[serde(default)]
        order_basis: Option<Vec<Vec<String>>>,
    },
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    /// One matrix per factor, in group order. Torus entries are integers or
    /// rationals as strings; ring entries are coordinate lists.
    pub blocks: Vec<serde_json::Value>,
    #[serde(default = "default_m")]
    pub m: i64,
    /// Torus translation, one literal per coordinate.
    #[serde(default)]
    pub translation: Option<Vec<String>>,
}

fn default_m() -> i64 {
    1
}

pub(crate) fn json_rat(v: &serde_json::Value, path: &str) -> Result<Rat, InputError> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(rat)
            .ok_or_else(|| input_err(path, "entries must be integers or rational strings")),
        serde_json::Value::String(s) => parse_rat(s).ok_or_else(|| input_err(path, format!("bad rational '{s}'"))),
        _ => Err(input_err(path, "entries must be integers or rational strings")),
    }
}

pub(crate) fn json_matrix<T>(
    v: &serde_json::Value,
    n: usize,
    path: &str,
    entry: impl Fn(&serde_json::Value, &str) -> Result<T, InputError>,
) -> Result<Vec<Vec<T>>, InputError> {
    let rows = v.as_array().ok_or_else(|| input_err(path, "expected a matrix (array of rows)"))?;
    if rows.len() != n {
        return Err(input_err(path, format!("expected {n} rows, found {}", rows.len())));
    }
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let r = r.as_array().ok_or_else(|| input_err(format!("{path}[{i}]"), "expected a row"))?;
            if r.len() != n {
                return Err(input_err(format!("{path}[{i}]"), format!("expected {n} entries, found {}", r.len())));
            }
            r.iter().enumerate().map(|(j, x)| entry(x, &format!("{path}[{i}][{j}]"))).collect()
        })
        .collect()
}

pub(crate) fn build_algebra(ring: &RingSpec, q: &Int, path: &str) -> Result<Arc<Algebra>, InputError> {
    let err = |e: crate::endo::EndoError| input_err(path, e.to_string());
    match ring {
        RingSpec::Integer => Algebra::integer(q.clone()).map_err(err),
        RingSpec::Quadratic { trace, norm } => {
            if Int::from(*norm) != *q {
                return Err(input_err(path, "Frobenius norm must equal q"));
            }
            Algebra::quadratic(Int::from(*trace), Int::from(*norm)).map_err(err)
        }
        RingSpec::Quaternion { a, b, frobenius, order_basis } => {
            let f = parse_rat(frobenius).ok_or_else(|| input_err(path, "bad Frobenius value"))?;
            let basis = order_basis
                .as_ref()
                .map(|rows| {
                    rows.iter()
                        .map(|r| {
                            r.iter()
                                .map(|s| parse_rat(s).ok_or_else(|| input_err(path, format!("bad rational '{s}'"))))
                                .collect::<Result<Vec<_>, _>>()
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()?;
            Algebra::quaternion(Int::from(*a), Int::from(*b), f, q.clone(), basis).map_err(err)
        }
    }
}

impl SystemDescription {
    pub fn from_json(src: &str) -> Result<Self, InputError> {
        serde_json::from_str(src)
            .map_err(|e| input_err(format!("line {} column {}", e.line(), e.column()), e.to_string()))
    }

    /// Validates and builds the system; `d_override` replaces `d`.
    pub fn build(&self, d_override: Option<usize>) -> Result<System, InputError> {
        if !is_prime_u64(self.p) {
            return Err(input_err("p", "p must be prime"));
        }
        if self.e == 0 {
            return Err(input_err("e", "e must be at least 1"));
        }
        let d = d_override.unwrap_or(self.d);
        if d == 0 {
            return Err(input_err("d", "d must be at least 1"));
        }
        let names = match &self.variables {
            Some(v) if v.len() == d => v.clone(),
            Some(v) if d_override.is_some() && v.len() < d => {
                let mut v = v.clone();
                v.extend((v.len() + 1..=d).map(|i| format!("t{i}")));
                v
            }
            Some(v) => return Err(input_err("variables", format!("expected {d} names, found {}", v.len()))),
            None => default_names(d),
        };
        let ctx = GfCtx::new(self.p, self.e).map_err(|e| input_err("p", e.to_string()))?;
        let q = ctx.order().clone();
        if self.map.blocks.len() != self.group.len() {
            return Err(input_err("map.blocks", "one matrix per group factor"));
        }
        if self.map.m < 1 {
            return Err(input_err("map.m", "m must be positive"));
        }
        let m = Int::from(self.map.m);
        let mut torus = None;
        let mut factors = Vec::new();
        let mut basis = CoprimeBasis::empty(&ctx, d);
        for (i, (f, blk)) in self.group.iter().zip(&self.map.blocks).enumerate() {
            let path = format!("map.blocks[{i}]");
            match f {
                FactorSpec::Torus { rank } => {
                    if torus.is_some() {
                        return Err(input_err(format!("group[{i}]"), "at most one torus factor"));
                    }
                    if *rank == 0 {
                        return Err(input_err(format!("group[{i}]"), "rank must be positive"));
                    }
                    let rows = json_matrix(blk, *rank, &path, json_rat)?;
                    let mr = rat_int(&m);
                    let matrix = QMat::from_rows(rows.into_iter().map(|r| r.into_iter().map(|x| x / &mr).collect()).collect());
                    let lits = self.map.translation.clone().unwrap_or_else(|| vec!["1".into(); *rank]);
                    if lits.len() != *rank {
                        return Err(input_err("map.translation", format!("expected {rank} literals")));
                    }
                    let parsed = lits
                        .iter()
                        .enumerate()
                        .map(|(j, l)| {
                            parse_rational_function(l, &ctx, &names)
                                .map_err(|e| input_err(format!("map.translation[{j}]"), e.to_string()))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    if let Some(j) = parsed.iter().position(|x| x.is_zero()) {
                        return Err(input_err(format!("map.translation[{j}]"), "translation must be nonzero"));
                    }
                    if parsed.iter().any(|x| !x.num().is_constant() || !x.den().is_constant()) {
                        basis = coprime_basis(&parsed).map_err(|e| input_err("map.translation", e.to_string()))?;
                    }
                    let beta = literals_to_point(&lits, &basis, &ctx, &names, "map.translation")?;
                    torus = Some(TorusMap { matrix, beta });
                }
                FactorSpec::Abstract { label, ring, dim, copies } => {
                    let alg = build_algebra(ring, &q, &format!("group[{i}].ring"))?;
                    let rows = json_matrix(blk, *copies, &path, |v, p| ring_entry(&alg, v, p))?;
                    factors.push(AbstractMap { label: label.clone(), algebra: alg, matrix: Mat::from_rows(rows), dim: *dim });
                }
            }
        }
        if !m.is_one() && torus.is_none() {
            return Err(input_err("map.m", "correspondences are supported on the torus factor only"));
        }
        let map = SelfMap { p: self.p, q, m_bound: self.m_bound, torus, factors };
        Ok(System { map, basis, names, m })
    }
}

pub(crate) fn ring_entry(alg: &Arc<Algebra>, v: &serde_json::Value, path: &str) -> Result<RingElem, InputError> {
    match v {
        serde_json::Value::Array(cs) => {
            if cs.len() != alg.dim() {
                return Err(input_err(path, format!("expected {} coordinates", alg.dim())));
            }
            let c = cs.iter().map(|x| json_rat(x, path)).collect::<Result<Vec<_>, _>>()?;
            Ok(alg.elem(c))
        }
        other => Ok(alg.from_rat(&json_rat(other, path)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INTRO: &str = r#"{
        "p": 3, "d": 1,
        "group": [{"type": "torus", "rank": 3}],
        "map": {"blocks": [[[1,0,0],[0,3,0],[0,0,3]]]}
    }"#;

    #[test]
    fn parses_intro_system() {
        let s = SystemDescription::from_json(INTRO).unwrap().build(None).unwrap();
        assert_eq!(s.d(), 1);
        assert_eq!(s.map.torus.unwrap().beta, ExpPoint::identity(3, 0));
    }

    #[test]
    fn rejects_composite_p() {
        let src = INTRO.replace("\"p\": 3", "\"p\": 4");
        let e = SystemDescription::from_json(&src).unwrap().build(None).unwrap_err();
        assert_eq!(e.message, "p must be prime");
    }

    #[test]
    fn translation_literals() {
        let src = r#"{"p": 5, "d": 1, "group": [{"type": "torus", "rank": 2}],
            "map": {"blocks": [[[1,1],[0,1]]], "translation": ["t", "2*t^2"]}}"#;
        let s = SystemDescription::from_json(src).unwrap().build(None).unwrap();
        let b = s.map.torus.unwrap().beta;
        assert_eq!(b.exps()[1], vec![rat(2)]);
        let bad = src.replace("2*t^2", "2*t^^2");
        let e = SystemDescription::from_json(&bad).unwrap().build(None).unwrap_err();
        assert_eq!(e.path, "map.translation[1]");
    }
}
