//! Symmetric eigen-decomposition helpers and exact rational kernels.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Eigenvalues in ascending order with matching eigenvector columns.
pub fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Smallest eigenvalue (`+inf` for an empty matrix).
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigen(m).0.first().copied().unwrap_or(f64::INFINITY)
}

/// Largest absolute eigenvalue.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    sym_eigen(m).0.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// `lambda_min >= -tol * max(1, ||M||)`.
pub fn is_psd(m: &DMatrix<f64>, tol: f64) -> bool {
    let (vals, _) = sym_eigen(m);
    let norm = vals.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    vals.first().is_none_or(|&l| l >= -tol * norm)
}

/// `lambda_min >= tol * max(1, ||M||)`.
pub fn is_pd(m: &DMatrix<f64>, tol: f64) -> bool {
    let (vals, _) = sym_eigen(m);
    let norm = vals.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    vals.first().is_none_or(|&l| l >= tol * norm)
}

/// Orthonormal eigenvectors whose eigenvalues satisfy `|lambda| <= tol * max(1, sigma_max)`.
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let (vals, vecs) = sym_eigen(m);
    let sigma = vals.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    vals.iter()
        .enumerate()
        .filter(|(_, v)| v.abs() <= tol * sigma)
        .map(|(i, _)| vecs.column(i).into_owned())
        .collect()
}

fn to_integer_rows(m: &DMatrix<BigRational>) -> Vec<Vec<BigInt>> {
    (0..m.nrows())
        .map(|r| {
            let l = (0..m.ncols()).fold(BigInt::one(), |acc, c| acc.lcm(m[(r, c)].denom()));
            (0..m.ncols())
                .map(|c| {
                    let v = &m[(r, c)];
                    v.numer() * (&l / v.denom())
                })
                .collect()
        })
        .collect()
}

/// Fraction-free (Bareiss) row echelon form. Returns the reduced rows and the
/// pivot column of each nonzero row.
fn bareiss_echelon(mut a: Vec<Vec<BigInt>>, ncols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let nrows = a.len();
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..nrows {
            for j in c + 1..ncols {
                let num = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                let (q, rem) = num.div_rem(&prev);
                debug_assert!(rem.is_zero(), "Bareiss division must be exact");
                a[i][j] = q;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

/// Exact rational basis of the kernel of `m`, one vector per free column.
pub fn kernel_exact(m: &DMatrix<BigRational>) -> Vec<DVector<BigRational>> {
    let ncols = m.ncols();
    let (rows, pivots) = bareiss_echelon(to_integer_rows(m), ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![BigRational::zero(); ncols];
            x[f] = BigRational::one();
            for (row, &pc) in rows.iter().zip(&pivots).rev() {
                let mut acc = BigRational::zero();
                for j in pc + 1..ncols {
                    if !row[j].is_zero() && !x[j].is_zero() {
                        acc += BigRational::from_integer(row[j].clone()) * &x[j];
                    }
                }
                x[pc] = -acc / BigRational::from_integer(row[pc].clone());
            }
            DVector::from_vec(x)
        })
        .collect()
}

/// Exact psd test by symmetric Gaussian pivots along the diagonal: a negative
/// pivot fails, a zero pivot requires its remaining row to vanish.
pub fn is_psd_exact(m: &DMatrix<BigRational>) -> bool {
    let n = m.nrows();
    let mut a = m.clone();
    for k in 0..n {
        let piv = a[(k, k)].clone();
        if piv.is_negative() {
            return false;
        }
        if piv.is_zero() {
            if (k + 1..n).any(|j| !a[(k, j)].is_zero() || !a[(j, k)].is_zero()) {
                return false;
            }
            continue;
        }
        for i in k + 1..n {
            if a[(i, k)].is_zero() {
                continue;
            }
            let f = &a[(i, k)] / &piv;
            for j in k + 1..n {
                let v = &f * &a[(k, j)];
                a[(i, j)] -= v;
            }
        }
    }
    true
}

/// Leading principal minors of a square rational matrix.
pub fn leading_minors_exact(m: &DMatrix<BigRational>) -> Vec<BigRational> {
    (1..=m.nrows())
        .map(|k| determinant_exact(&m.view((0, 0), (k, k)).into_owned()))
        .collect()
}

/// Exact pd test: every leading principal minor is positive.
pub fn is_pd_exact(m: &DMatrix<BigRational>) -> bool {
    leading_minors_exact(m).iter().all(|d| d.is_positive())
}

pub fn determinant_exact(m: &DMatrix<BigRational>) -> BigRational {
    let n = m.nrows();
    if n == 0 {
        return BigRational::one();
    }
    let scale = (0..n).fold(BigRational::one(), |acc, r| {
        let l = (0..n).fold(BigInt::one(), |acc, c| acc.lcm(m[(r, c)].denom()));
        acc * BigRational::from_integer(l)
    });
    let rows = to_integer_rows(m);
    let mut a = rows;
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return BigRational::zero();
        };
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    BigRational::from_integer(sign * &a[n - 1][n - 1]) / scale
}
