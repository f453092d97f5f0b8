#![allow(dead_code)]

use frobdyn::field::ExpPoint;
use frobdyn::matrix::{Mat, QMat};
use frobdyn::poly::Poly;
use frobdyn::scalar::{rat, Int, Rat, Scalar};
use frobdyn::skew::jordan_block;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `P = E_1⋯E_k` with elementary row operations, and its inverse built
/// from the inverse operations (no elimination involved).
pub fn random_unimodular<T: Scalar, R: Rng>(
    n: usize,
    zero: &T,
    rng: &mut R,
    ops: usize,
    mut coeff: impl FnMut(&mut R) -> T,
) -> (Mat<T>, Mat<T>) {
    let mut p = Mat::identity(n, zero);
    let mut p_inv = Mat::identity(n, zero);
    if n < 2 {
        return (p, p_inv);
    }
    for _ in 0..ops {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let c = coeff(rng);
        let mut e = Mat::identity(n, zero);
        e.set(i, j, c.clone());
        let mut e_inv = Mat::identity(n, zero);
        e_inv.set(i, j, c.neg_ref());
        p = p.mul(&e);
        p_inv = e_inv.mul(&p_inv);
    }
    (p, p_inv)
}

pub fn random_int_unimodular<R: Rng>(n: usize, rng: &mut R) -> (QMat, QMat) {
    random_unimodular(n, &rat(0), rng, 2 * n, |r| rat(r.gen_range(-2..=2)))
}

/// Random composition of `n` into positive parts.
pub fn random_partition<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut parts = Vec::new();
    let mut left = n;
    while left > 0 {
        let k = rng.gen_range(1..=left);
        parts.push(k);
        left -= k;
    }
    parts
}

pub fn jordan_matrix<T: Scalar>(alpha: &T, sizes: &[usize]) -> Mat<T> {
    let blocks: Vec<Mat<T>> = sizes.iter().map(|&s| jordan_block(alpha, s)).collect();
    Mat::block_diag(&blocks, alpha)
}

/// Companion matrix of a monic polynomial; its minimal polynomial is `g`.
pub fn companion(g: &Poly<Rat>) -> QMat {
    let n = g.deg();
    let mut c = QMat::zeros(n, n, &rat(0));
    for i in 1..n {
        c.set(i, i - 1, rat(1));
    }
    for i in 0..n {
        c.set(i, n - 1, -g.coeff(i));
    }
    c
}

pub fn random_point<R: Rng>(n: usize, s: usize, rng: &mut R) -> ExpPoint {
    let exps = (0..n).map(|_| (0..s).map(|_| rat(rng.gen_range(-5..=5))).collect()).collect();
    ExpPoint::new(exps, vec![rat(0); n])
}

pub fn int(x: i64) -> Int {
    Int::from(x)
}

/// Pass/fail line printer for harness-free test targets.
pub struct Report {
    failures: usize,
}

impl Report {
    pub fn new() -> Self {
        Report { failures: 0 }
    }

    pub fn record(&mut self, name: &str, started: std::time::Instant, result: Result<String, String>) {
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {name}: {detail} ({secs:.2}s)"),
            Err(detail) => {
                self.failures += 1;
                println!("FAIL  {name}: {detail} ({secs:.2}s)");
            }
        }
    }

    pub fn finish(self) {
        if self.failures > 0 {
            println!("{} criteria failed", self.failures);
            std::process::exit(1);
        }
    }
}
