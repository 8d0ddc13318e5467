//! Small dense linear algebra shared by the geometric modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exterior::Vector;
use crate::scalar::Scalar;

/// Deterministic generator for sub-task `stream` of a run seeded by `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Gaussian elimination with partial pivoting on the augmented system.
/// Exact on the rational backend.
pub fn solve<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>, tol: f64) -> Result<Vec<S>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .max_by(|&r, &s| a[r][col].to_f64().abs().total_cmp(&a[s][col].to_f64().abs()))
            .ok_or(Error::Singular)?;
        if a[pivot][col].is_negligible(tol) {
            return Err(Error::Singular);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / a[col][col].clone();
            for c in col..n {
                let d = f.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - d;
            }
            let d = f * b[col].clone();
            b[r] = b[r].clone() - d;
        }
    }
    let mut x = vec![S::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            acc = acc - a[r][c].clone() * x[c].clone();
        }
        x[r] = acc / a[r][r].clone();
    }
    Ok(x)
}

/// Row rank by elimination. Exact on rationals; on floats an entry counts as
/// zero when below `tol` times the largest entry.
pub fn rank<S: Scalar>(rows: &[Vec<S>], tol: f64) -> usize {
    let mut m: Vec<Vec<S>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let scale = m.iter().flatten().map(|x| x.to_f64().abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut rank = 0;
    for col in 0..ncols {
        let pivot = (rank..m.len()).max_by(|&r, &s| m[r][col].to_f64().abs().total_cmp(&m[s][col].to_f64().abs()));
        let Some(p) = pivot else { break };
        if m[p][col].is_zero() || m[p][col].is_negligible(tol * scale) {
            continue;
        }
        m.swap(rank, p);
        for r in 0..m.len() {
            if r == rank || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone() / m[rank][col].clone();
            for c in col..ncols {
                let d = f.clone() * m[rank][c].clone();
                m[r][c] = m[r][c].clone() - d;
            }
        }
        rank += 1;
    }
    rank
}

pub fn to_dmatrix<S: Scalar>(rows: &[Vec<S>]) -> DMatrix<f64> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(nrows, ncols, |r, c| rows[r][c].to_f64())
}

/// Matrix whose columns are the given vectors.
pub fn columns(vectors: &[Vector<f64>]) -> DMatrix<f64> {
    let n = vectors.first().map_or(0, Vector::dim);
    DMatrix::from_fn(n, vectors.len(), |r, c| vectors[c].comps()[r])
}

pub fn column_vectors(m: &DMatrix<f64>) -> Vec<Vector<f64>> {
    m.column_iter().map(|c| Vector::new(c.iter().copied().collect())).collect()
}

/// Singular-value rank with threshold relative to the largest singular value.
pub fn svd_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Haar-distributed orthonormal `k`-frame in ℝⁿ (QR of a Gaussian matrix with
/// the sign of `R`'s diagonal fixed).
pub fn haar_frame<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<Vector<f64>> {
    let g = DMatrix::from_fn(n, k, |_, _| gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    column_vectors(&q)
}

/// Haar-random unitary `m × m` matrix.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(m, m, |_, _| Complex64::new(gaussian(rng), gaussian(rng)));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        let d = r[(j, j)];
        let norm = d.norm();
        if norm > 0.0 {
            let phase = d / norm;
            for i in 0..m {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Real `2m × 2m` matrix of a complex `m × m` matrix under `z_k = x_{2k-1} + i x_{2k}`.
pub fn realify(u: &DMatrix<Complex64>) -> DMatrix<f64> {
    let m = u.nrows();
    let mut out = DMatrix::zeros(2 * m, 2 * m);
    for r in 0..m {
        for c in 0..m {
            let z = u[(r, c)];
            out[(2 * r, 2 * c)] = z.re;
            out[(2 * r + 1, 2 * c)] = z.im;
            out[(2 * r, 2 * c + 1)] = -z.im;
            out[(2 * r + 1, 2 * c + 1)] = z.re;
        }
    }
    out
}

/// Modified Gram–Schmidt; returns the orthonormalized vectors and the
/// number of input vectors that were numerically independent.
pub fn gram_schmidt(vectors: &[Vector<f64>], tol: f64) -> (Vec<Vector<f64>>, usize) {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut w = DVector::from_column_slice(v.comps());
        let scale = w.norm().max(1.0);
        for _ in 0..2 {
            for u in &out {
                let p = u.dot(&w);
                w -= u * p;
            }
        }
        let n = w.norm();
        if n > tol * scale {
            out.push(w / n);
        }
    }
    let rank = out.len();
    (out.into_iter().map(|c| Vector::new(c.iter().copied().collect())).collect(), rank)
}

/// Pfaffian of a real skew-symmetric matrix by pivoted elimination.
pub fn pfaffian(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    if n % 2 == 1 {
        return 0.0;
    }
    let mut m = a.clone();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        // bring the largest entry of column k (below row k) to row k+1
        let (p, _) =
            (k + 1..n)
                .map(|r| (r, m[(r, k)].abs()))
                .fold((k + 1, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if p != k + 1 {
            m.swap_rows(k + 1, p);
            m.swap_columns(k + 1, p);
            pf = -pf;
        }
        let piv = m[(k, k + 1)];
        if piv == 0.0 {
            return 0.0;
        }
        pf *= piv;
        if k + 2 < n {
            // eliminate rows/cols k+2.. against the pivot pair
            for r in k + 2..n {
                let f = m[(k, r)] / piv;
                let g = m[(k + 1, r)] / piv;
                for c in 0..n {
                    let t = m[(k + 1, c)] * f;
                    m[(r, c)] -= t;
                }
                for c in 0..n {
                    let t = m[(c, k + 1)] * f;
                    m[(c, r)] -= t;
                }
                for c in 0..n {
                    let t = m[(k, c)] * g;
                    m[(r, c)] += t;
                }
                for c in 0..n {
                    let t = m[(c, k)] * g;
                    m[(c, r)] += t;
                }
            }
        }
        k += 2;
    }
    pf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn exact_solve() {
        let q = |n: i64| Rational::from_i64(n);
        let a = vec![vec![q(2), q(1)], vec![q(1), q(3)]];
        let x = solve(a, vec![q(3), q(5)], 0.0).unwrap();
        assert_eq!(x, vec![Rational::from_ratio(4, 5), Rational::from_ratio(7, 5)]);
        let sing = vec![vec![q(1), q(2)], vec![q(2), q(4)]];
        assert_eq!(solve(sing, vec![q(1), q(1)], 0.0), Err(Error::Singular));
    }

    #[test]
    fn rank_exact_and_float() {
        let rows = vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0], vec![0.0, 1.0, 1.0]];
        assert_eq!(rank(&rows, 1e-12), 2);
        assert_eq!(svd_rank(&to_dmatrix(&rows), 1e-12), 2);
    }

    #[test]
    fn pfaffian_matches_canonical_form() {
        // block-diagonal with blocks a, b: Pf = a·b, and invariant under
        // congruence by a rotation up to det = 1
        let mut a = DMatrix::zeros(4, 4);
        a[(0, 1)] = 0.7;
        a[(1, 0)] = -0.7;
        a[(2, 3)] = -0.3;
        a[(3, 2)] = 0.3;
        assert!((pfaffian(&a) + 0.21).abs() < 1e-15);
        let mut rng = seeded_rng(3, 0);
        let q = columns(&haar_frame(&mut rng, 4, 4));
        let det = q.determinant();
        let b = q.transpose() * &a * &q;
        assert!((pfaffian(&b) - det * pfaffian(&a)).abs() < 1e-12);
    }

    #[test]
    fn haar_frames_are_orthonormal() {
        let mut rng = seeded_rng(1, 7);
        let f = columns(&haar_frame(&mut rng, 8, 4));
        let g = f.transpose() * &f;
        assert!((g - DMatrix::identity(4, 4)).amax() < 1e-12);
        let u = haar_unitary(&mut rng, 3);
        let e = u.adjoint() * &u - DMatrix::identity(3, 3);
        assert!(e.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }
}
