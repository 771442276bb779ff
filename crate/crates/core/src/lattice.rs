//! Integer row reduction: Hermite normal form with transform, saturated
//! left kernels and determinants over `Z`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

/// Row-style Hermite normal form.
#[derive(Debug, Clone)]
pub struct Hnf {
    /// `transform * input`, echelon with positive pivots; entries above a
    /// pivot are reduced into `[0, pivot)`. Zero rows sit at the bottom.
    pub form: IntMatrix,
    /// Unimodular matrix with `transform * input == form`.
    pub transform: IntMatrix,
    /// `(row, column)` of each pivot.
    pub pivots: Vec<(usize, usize)>,
}

impl Hnf {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Rows of the transform that annihilate the input. They span the full
    /// (saturated) left kernel since the transform is unimodular.
    pub fn left_kernel(&self) -> IntMatrix {
        self.transform[self.rank()..].to_vec()
    }
}

fn sub_row_multiple(rows: &mut [Vec<BigInt>], target: usize, source: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let src = rows[source].clone();
    for (t, s) in rows[target].iter_mut().zip(&src) {
        if !s.is_zero() {
            *t -= q * s;
        }
    }
}

fn negate_row(row: &mut [BigInt]) {
    for v in row.iter_mut() {
        *v = -std::mem::take(v);
    }
}

/// Computes the Hermite normal form of an `m x cols` integer matrix.
pub fn hnf(input: &[Vec<BigInt>], cols: usize) -> Hnf {
    let m = input.len();
    let mut a: IntMatrix = input.to_vec();
    let mut u: IntMatrix = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m {
            break;
        }
        // Euclid on column c among rows r.. until a single nonzero remains.
        loop {
            let best = (r..m)
                .filter(|&i| !a[i][c].is_zero())
                .min_by(|&i, &j| a[i][c].abs().cmp(&a[j][c].abs()));
            let Some(best) = best else { break };
            a.swap(r, best);
            u.swap(r, best);
            let mut done = true;
            for i in r + 1..m {
                if a[i][c].is_zero() {
                    continue;
                }
                let q = a[i][c].div_floor(&a[r][c]);
                sub_row_multiple(&mut a, i, r, &q);
                sub_row_multiple(&mut u, i, r, &q);
                if !a[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            negate_row(&mut a[r]);
            negate_row(&mut u[r]);
        }
        for i in 0..r {
            let q = a[i][c].div_floor(&a[r][c]);
            sub_row_multiple(&mut a, i, r, &q);
            sub_row_multiple(&mut u, i, r, &q);
        }
        pivots.push((r, c));
        r += 1;
    }
    Hnf {
        form: a,
        transform: u,
        pivots,
    }
}

/// Scales a rational matrix to an integer one by the lcm of all denominators.
pub fn clear_denominators(rows: &[Vec<BigRational>]) -> (IntMatrix, BigInt) {
    let lcm = rows
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let scale = BigRational::from_integer(lcm.clone());
    let ints = rows
        .iter()
        .map(|r| r.iter().map(|q| (q * &scale).to_integer()).collect())
        .collect();
    (ints, lcm)
}

/// Rank over `Q` of a rational matrix.
pub fn rational_rank(rows: &[Vec<BigRational>], cols: usize) -> usize {
    let (ints, _) = clear_denominators(rows);
    hnf(&ints, cols).rank()
}

/// Saturated basis of `{c in Z^m : c * rows == 0}`.
pub fn integer_left_kernel(rows: &[Vec<BigRational>], cols: usize) -> IntMatrix {
    let (ints, _) = clear_denominators(rows);
    hnf(&ints, cols).left_kernel()
}

/// Determinant of a square integer matrix (fraction-free elimination).
pub fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Solves `c * rows == v` for integer `c` using an HNF of `rows`.
pub fn solve_integer(h: &Hnf, v: &[BigInt]) -> Option<Vec<BigInt>> {
    let m = h.transform.len();
    let mut residual = v.to_vec();
    let mut coeffs_form = vec![BigInt::zero(); m];
    for &(r, c) in &h.pivots {
        let piv = &h.form[r][c];
        // Entries left of the pivot column must already be cleared.
        let (q, rem) = residual[c].div_rem(piv);
        if !rem.is_zero() {
            return None;
        }
        if !q.is_zero() {
            for (res, f) in residual.iter_mut().zip(&h.form[r]) {
                *res -= &q * f;
            }
        }
        coeffs_form[r] = q;
    }
    if residual.iter().any(|x| !x.is_zero()) {
        return None;
    }
    // coefficients are with respect to the HNF rows; map back through U.
    let mut out = vec![BigInt::zero(); m];
    for (r, q) in coeffs_form.iter().enumerate() {
        if q.is_zero() {
            continue;
        }
        for (o, t) in out.iter_mut().zip(&h.transform[r]) {
            *o += q * t;
        }
    }
    Some(out)
}
