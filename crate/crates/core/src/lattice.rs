//! Integer matrices: column Hermite-style echelon with unimodular transform,
//! integer kernels, diagonalization (used to solve equations in divisible
//! groups) and saturation of column spans.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::matrix::QMat;
use crate::scalar::{common_denominator, rat_int, Int, Rat};

pub type IntMat = Vec<Vec<Int>>;

pub fn int_identity(n: usize) -> IntMat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Int::one() } else { Int::zero() }).collect())
        .collect()
}

pub fn int_mat(rows: &[&[i64]]) -> IntMat {
    rows.iter().map(|r| r.iter().map(|&x| Int::from(x)).collect()).collect()
}

pub fn to_qmat(a: &IntMat, cols: usize) -> QMat {
    QMat::from_fn(a.len(), cols, |r, c| rat_int(&a[r][c]))
}

/// Converts an integral rational matrix; `None` if some entry is not an integer.
pub fn from_qmat(a: &QMat) -> Option<IntMat> {
    (0..a.rows())
        .map(|r| {
            (0..a.cols())
                .map(|c| {
                    let x = a.get(r, c);
                    x.is_integer().then(|| x.to_integer())
                })
                .collect()
        })
        .collect()
}

pub fn int_mul(a: &IntMat, b: &IntMat, inner: usize, cols: usize) -> IntMat {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(Int::zero(), |acc, k| acc + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

pub fn int_mul_vec(a: &IntMat, v: &[Int]) -> Vec<Int> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(Int::zero(), |acc, (x, y)| acc + x * y))
        .collect()
}

/// Extended gcd with `s·x + t·y = g ≥ 0`.
pub fn egcd(x: &Int, y: &Int) -> (Int, Int, Int) {
    let e = x.extended_gcd(y);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Unimodular `(s, t, u, v)` sending `(x, y)` to `(gcd, 0)`. When `x`
/// divides `y` this is a plain elimination, which keeps the pivot line fixed.
fn reducer(x: &Int, y: &Int) -> (Int, Int, Int, Int) {
    if !x.is_zero() && (y % x).is_zero() {
        return (Int::one(), Int::zero(), -(y / x), Int::one());
    }
    let (g, s, t) = egcd(x, y);
    (s, t, -(y / &g), x / &g)
}

fn col_combine(m: &mut IntMat, j: usize, k: usize, s: &Int, t: &Int, u: &Int, v: &Int) {
    // (col_j, col_k) <- (s·col_j + t·col_k, u·col_j + v·col_k)
    for row in m.iter_mut() {
        let a = row[j].clone();
        let b = row[k].clone();
        row[j] = s * &a + t * &b;
        row[k] = u * &a + v * &b;
    }
}

fn row_combine(m: &mut IntMat, i: usize, k: usize, s: &Int, t: &Int, u: &Int, v: &Int) {
    let (ri, rk) = (m[i].clone(), m[k].clone());
    m[i] = ri.iter().zip(&rk).map(|(a, b)| s * a + t * b).collect();
    m[k] = ri.iter().zip(&rk).map(|(a, b)| u * a + v * b).collect();
}

/// Column echelon form: returns `(h, w, rank)` with `a·w = h`, `w` unimodular
/// (`cols × cols`), the first `rank` columns of `h` in echelon shape and the
/// remaining columns zero. Columns `rank..` of `w` span the integer kernel.
pub fn column_echelon(a: &IntMat, cols: usize) -> (IntMat, IntMat, usize) {
    let mut h = a.clone();
    let mut w = int_identity(cols);
    let mut piv = 0;
    for i in 0..h.len() {
        if piv == cols {
            break;
        }
        for k in (piv + 1)..cols {
            if h[i][k].is_zero() {
                continue;
            }
            if h[i][piv].is_zero() {
                for row in h.iter_mut() {
                    row.swap(piv, k);
                }
                for row in w.iter_mut() {
                    row.swap(piv, k);
                }
                continue;
            }
            let x = h[i][piv].clone();
            let y = h[i][k].clone();
            let (g, s, t) = egcd(&x, &y);
            let u = -(&y / &g);
            let v = &x / &g;
            col_combine(&mut h, piv, k, &s, &t, &u, &v);
            col_combine(&mut w, piv, k, &s, &t, &u, &v);
        }
        if !h[i][piv].is_zero() {
            if h[i][piv].is_negative() {
                for row in h.iter_mut() {
                    row[piv] = -row[piv].clone();
                }
                for row in w.iter_mut() {
                    row[piv] = -row[piv].clone();
                }
            }
            piv += 1;
        }
    }
    (h, w, piv)
}

/// Basis (as vectors) of the integer right kernel `{x ∈ ℤ^cols : a·x = 0}`.
/// The basis spans a saturated sublattice.
pub fn integer_kernel(a: &IntMat, cols: usize) -> Vec<Vec<Int>> {
    if a.is_empty() {
        return int_identity(cols);
    }
    let (_, w, r) = column_echelon(a, cols);
    (r..cols).map(|j| w.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Integer left kernel `{v : vᵀ·a = 0}` of an `rows × cols` matrix.
pub fn integer_left_kernel(a: &IntMat, rows: usize, cols: usize) -> Vec<Vec<Int>> {
    let t: IntMat = (0..cols).map(|c| (0..rows).map(|r| a[r][c].clone()).collect()).collect();
    integer_kernel(&t, rows)
}

/// Diagonalization `u·a·v = diag(d)`, `u`, `v` unimodular. Returns
/// `(u, d, v)` where `d` has `min(rows, cols)` entries.
pub fn diagonalize(a: &IntMat, rows: usize, cols: usize) -> (IntMat, Vec<Int>, IntMat) {
    let mut m = a.clone();
    let mut u = int_identity(rows);
    let mut v = int_identity(cols);
    let n = rows.min(cols);
    for t in 0..n {
        // bring a nonzero entry of the trailing block to (t, t)
        let Some((pr, pc)) = (t..rows)
            .flat_map(|r| (t..cols).map(move |c| (r, c)))
            .filter(|&(r, c)| !m[r][c].is_zero())
            .min_by_key(|&(r, c)| m[r][c].abs())
        else {
            break;
        };
        m.swap(t, pr);
        u.swap(t, pr);
        for row in m.iter_mut() {
            row.swap(t, pc);
        }
        for row in v.iter_mut() {
            row.swap(t, pc);
        }
        loop {
            let mut changed = false;
            for k in (t + 1)..cols {
                if m[t][k].is_zero() {
                    continue;
                }
                let (s, tt, uu, vv) = reducer(&m[t][t], &m[t][k]);
                col_combine(&mut m, t, k, &s, &tt, &uu, &vv);
                col_combine(&mut v, t, k, &s, &tt, &uu, &vv);
                changed = true;
            }
            for k in (t + 1)..rows {
                if m[k][t].is_zero() {
                    continue;
                }
                let (s, tt, uu, vv) = reducer(&m[t][t], &m[k][t]);
                row_combine(&mut m, t, k, &s, &tt, &uu, &vv);
                row_combine(&mut u, t, k, &s, &tt, &uu, &vv);
                changed = true;
            }
            if !changed {
                break;
            }
        }
    }
    let d = (0..n).map(|i| m[i][i].clone()).collect();
    (u, d, v)
}

/// Integer solution of `a·x = b`, if any.
pub fn solve_integer(a: &IntMat, rows: usize, cols: usize, b: &[Int]) -> Option<Vec<Int>> {
    let (u, d, v) = diagonalize(a, rows, cols);
    let ub = int_mul_vec(&u, b);
    let mut y = vec![Int::zero(); cols];
    for i in 0..rows {
        let di = d.get(i).cloned().unwrap_or_else(Int::zero);
        if di.is_zero() {
            if !ub[i].is_zero() {
                return None;
            }
        } else {
            let (q, r) = ub[i].div_rem(&di);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        }
    }
    Some(int_mul_vec(&v, &y))
}

/// Clears denominators of a rational vector, returning the primitive integer
/// vector with the same ℚ-span (sign normalized so the first nonzero entry is
/// positive).
pub fn primitive_integer_vector(v: &[Rat]) -> Vec<Int> {
    let d = common_denominator(v.iter());
    let ints: Vec<Int> = v.iter().map(|x| (x * rat_int(&d)).to_integer()).collect();
    let g = ints.iter().fold(Int::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    let sign = ints
        .iter()
        .find(|x| !x.is_zero())
        .map_or(Int::one(), |x| if x.is_negative() { -Int::one() } else { Int::one() });
    ints.into_iter().map(|x| x / &g * &sign).collect()
}

/// Saturated integer basis of the ℚ-column span of `y` (`n × m` rational),
/// with an integer left inverse. Returns `(basis, left_inverse)` where
/// `basis` is `n × k`, `left_inverse` is `k × n` and `left_inverse·basis = I`.
pub fn saturate_columns(y: &QMat) -> (IntMat, IntMat) {
    let n = y.rows();
    let yt = y.transpose();
    // left kernel of y = kernel of yᵀ
    let left = if y.cols() == 0 {
        (0..n)
            .map(|i| {
                let mut e = vec![Rat::zero(); n];
                e[i] = Rat::one();
                e
            })
            .collect()
    } else {
        yt.kernel()
    };
    let k_rows: IntMat = left.iter().map(|v| primitive_integer_vector(v)).collect();
    let (w, r) = if k_rows.is_empty() {
        (int_identity(n), 0)
    } else {
        let (_, w, r) = column_echelon(&k_rows, n);
        (w, r)
    };
    let winv = from_qmat(&to_qmat(&w, n).inverse().expect("unimodular"))
        .expect("inverse of unimodular matrix is integral");
    let basis: IntMat = (0..n).map(|i| (r..n).map(|j| w[i][j].clone()).collect()).collect();
    let left_inv: IntMat = (r..n).map(|j| winv[j].clone()).collect();
    (basis, left_inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonalize_with_divisible_entries() {
        let a = int_mat(&[&[3, 3, -6], &[3, 3, 3], &[-6, 9, 3]]);
        let (u, d, v) = diagonalize(&a, 3, 3);
        let m = int_mul(&int_mul(&u, &a, 3, 3), &v, 3, 3);
        for (i, row) in m.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                assert_eq!(x, &if i == j { d[i].clone() } else { Int::zero() });
            }
        }
    }

    #[test]
    fn kernel_of_row() {
        let a = int_mat(&[&[2, 4, 6]]);
        let k = integer_kernel(&a, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(int_mul_vec(&a, v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn diagonalize_reconstructs() {
        let a = int_mat(&[&[2, 4], &[6, 8]]);
        let (u, d, v) = diagonalize(&a, 2, 2);
        let uav = int_mul(&int_mul(&u, &a, 2, 2), &v, 2, 2);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { d[i].clone() } else { Int::zero() };
                assert_eq!(uav[i][j], expect);
            }
        }
    }

    #[test]
    fn solve_integer_consistency() {
        let a = int_mat(&[&[2, 0], &[0, 3]]);
        assert_eq!(
            solve_integer(&a, 2, 2, &[Int::from(4), Int::from(9)]),
            Some(vec![Int::from(2), Int::from(3)])
        );
        assert!(solve_integer(&a, 2, 2, &[Int::from(1), Int::from(0)]).is_none());
    }

    #[test]
    fn saturation_of_image() {
        // image of [[2],[2]] is spanned by (2,2); saturation is (1,1)
        let y = crate::matrix::qmat(&[&[2], &[2]]);
        let (b, l) = saturate_columns(&y);
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].len(), 1);
        assert_eq!(b[0][0].abs(), Int::one());
        assert_eq!(b[0][0], b[1][0]);
        let prod = int_mul(&l, &b, 2, 1);
        assert_eq!(prod, int_identity(1));
    }
}
