//! Points of G_m^N in the divisible hull of a finitely generated group:
//! each coordinate is `ζ · Π f_j^{e_j}` with rational `e_j` over a coprime
//! basis and a root of unity `ζ = exp(2πi·τ)` stored as `τ ∈ [0, 1)`.

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::lattice::IntMat;
use crate::matrix::QMat;
use crate::scalar::{common_denominator, frac, rat_int, Int, Rat};

use super::FieldError;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExpPoint {
    exps: Vec<Vec<Rat>>,
    tors: Vec<Rat>,
}

impl ExpPoint {
    pub fn new(exps: Vec<Vec<Rat>>, tors: Vec<Rat>) -> Self {
        assert_eq!(exps.len(), tors.len());
        ExpPoint { exps, tors: tors.iter().map(frac).collect() }
    }

    pub fn identity(n: usize, s: usize) -> Self {
        ExpPoint { exps: vec![vec![Rat::zero(); s]; n], tors: vec![Rat::zero(); n] }
    }

    pub fn from_int_exps(exps: &[Vec<i64>]) -> Self {
        let e: Vec<Vec<Rat>> = exps
            .iter()
            .map(|r| r.iter().map(|&x| Rat::from_integer(Int::from(x))).collect())
            .collect();
        let n = e.len();
        ExpPoint::new(e, vec![Rat::zero(); n])
    }

    pub fn dim(&self) -> usize {
        self.tors.len()
    }

    pub fn basis_len(&self) -> usize {
        self.exps.first().map_or(0, |r| r.len())
    }

    pub fn exps(&self) -> &[Vec<Rat>] {
        &self.exps
    }

    pub fn tors(&self) -> &[Rat] {
        &self.tors
    }

    pub fn is_identity(&self) -> bool {
        self.exps.iter().flatten().all(|x| x.is_zero()) && self.tors.iter().all(|t| t.is_zero())
    }

    /// Group operation (coordinatewise product in K^*).
    pub fn mul(&self, other: &Self) -> Self {
        let exps = self
            .exps
            .iter()
            .zip(&other.exps)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        let tors = self.tors.iter().zip(&other.tors).map(|(a, b)| a + b).collect();
        ExpPoint::new(exps, tors)
    }

    pub fn inv(&self) -> Self {
        let exps = self.exps.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        let tors = self.tors.iter().map(|t| -t).collect();
        ExpPoint::new(exps, tors)
    }

    pub fn pow(&self, k: &Int) -> Self {
        let kr = rat_int(k);
        let exps = self.exps.iter().map(|r| r.iter().map(|x| x * &kr).collect()).collect();
        let tors = self.tors.iter().map(|t| t * &kr).collect();
        ExpPoint::new(exps, tors)
    }

    /// Monomial action `(x^M)_i = Π_j x_j^{M_ij}` of an integer matrix.
    pub fn act(&self, m: &IntMat) -> Self {
        let s = self.basis_len();
        let exps = m
            .iter()
            .map(|row| {
                (0..s)
                    .map(|k| {
                        row.iter()
                            .zip(&self.exps)
                            .fold(Rat::zero(), |acc, (a, e)| acc + rat_int(a) * &e[k])
                    })
                    .collect()
            })
            .collect();
        let tors = m
            .iter()
            .map(|row| row.iter().zip(&self.tors).fold(Rat::zero(), |acc, (a, t)| acc + rat_int(a) * t))
            .collect();
        ExpPoint::new(exps, tors)
    }

    /// Action of a rational matrix `M = M'/D`: the integer matrix `M'` is
    /// applied, then every coordinate is divided by `D` (see [`Self::root`]).
    pub fn act_rational(&self, m: &QMat, p: u64) -> Result<Self, FieldError> {
        let d = common_denominator(m.entries());
        let mi: IntMat = m
            .to_rows()
            .iter()
            .map(|r| r.iter().map(|x| (x * rat_int(&d)).to_integer()).collect())
            .collect();
        self.act(&mi).root(&d, p)
    }

    /// A `k`-th root: exponents are divided exactly; torsion is divided
    /// uniquely along the p-part of `k` and by the representative `τ/k'`
    /// along the prime-to-p part `k'`.
    pub fn root(&self, k: &Int, p: u64) -> Result<Self, FieldError> {
        assert!(!k.is_zero(), "root of order zero");
        let kr = rat_int(k);
        let exps = self.exps.iter().map(|r| r.iter().map(|x| x / &kr).collect()).collect();
        let tors = self
            .tors
            .iter()
            .map(|t| divide_torsion(t, k, p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ExpPoint::new(exps, tors))
    }

    /// Multiplication of every coordinate by `q` (the q-power Frobenius).
    pub fn frobenius_apply(&self, q: &Int) -> Self {
        self.pow(q)
    }

    /// True when `ℓ·x` is the identity, i.e. `x` is torsion of order dividing ℓ.
    pub fn killed_by(&self, l: &Int) -> bool {
        self.pow(l).is_identity()
    }

    /// lcm of all exponent and torsion denominators.
    pub fn denominator(&self) -> Int {
        common_denominator(self.exps.iter().flatten().chain(self.tors.iter()))
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        ExpPoint {
            exps: idx.iter().map(|&i| self.exps[i].clone()).collect(),
            tors: idx.iter().map(|&i| self.tors[i].clone()).collect(),
        }
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut exps = self.exps.clone();
        exps.extend(other.exps.iter().cloned());
        let mut tors = self.tors.clone();
        tors.extend(other.tors.iter().cloned());
        ExpPoint { exps, tors }
    }
}

/// Solves `k·y ≡ τ (mod 1)` choosing the representative described in
/// [`ExpPoint::root`]. Torsion with p in the denominator is rejected.
pub fn divide_torsion(t: &Rat, k: &Int, p: u64) -> Result<Rat, FieldError> {
    let pb = Int::from(p);
    if (t.denom() % &pb).is_zero() {
        return Err(FieldError::Inseparable(format!("torsion {t} has p in its denominator")));
    }
    let mut kp = k.clone();
    let mut pk = Int::one();
    while (&kp % &pb).is_zero() {
        kp /= &pb;
        pk *= &pb;
    }
    let modulus = t.denom() * &kp;
    let modulus = if modulus < Int::zero() { -modulus } else { modulus };
    let u = mod_inverse(&pk, &modulus);
    Ok(frac(&Rat::new(t.numer() * u, modulus)))
}

fn mod_inverse(a: &Int, m: &Int) -> Int {
    if m.is_one() {
        return Int::zero();
    }
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn frobenius_scales() {
        let x = ExpPoint::new(vec![vec![ratio(1, 1), ratio(-1, 1)]], vec![ratio(1, 8)]);
        let y = x.frobenius_apply(&Int::from(3));
        assert_eq!(y.exps()[0], vec![ratio(3, 1), ratio(-3, 1)]);
        assert_eq!(y.tors()[0], ratio(3, 8));
    }

    #[test]
    fn p_part_division_is_exact_inverse() {
        // dividing by 3 in characteristic 3 must undo multiplication by 3
        let t = ratio(1, 8);
        let y = divide_torsion(&t, &Int::from(3), 3).unwrap();
        assert_eq!(frac(&(y * ratio(3, 1))), t);
        let y = divide_torsion(&t, &Int::from(6), 3).unwrap();
        assert_eq!(frac(&(y * ratio(6, 1))), t);
        assert!(divide_torsion(&ratio(1, 3), &Int::from(2), 3).is_err());
    }
}
