use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::builders::build_sos_sdp;
use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::CubicPolynomial;
use crate::sdp::{solve, SdpStatus, SolverOptions};

/// Default tolerance of [`gamma_membership`], relative to `1 + ||x||^2`.
pub const MEMBERSHIP_TOL: f64 = 1e-5;

/// Solution of the sum-of-squares program: `p - gamma = sigma + Tr(S hess p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SosCertificate {
    pub n: usize,
    pub gamma: f64,
    /// Gram matrix of `sigma` over `(x, 1)`.
    pub sigma: Vec<Vec<f64>>,
    /// Gram matrix of `y^T S(x) y` over `y_j (x, 1)_k`, index `j (n + 1) + k`.
    pub s: Vec<Vec<f64>>,
}

fn monomials(x: &[f64]) -> Vec<f64> {
    let mut m = x.to_vec();
    m.push(1.0);
    m
}

fn to_matrix(v: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(v.len(), v.len(), |i, j| v[i][j])
}

impl SosCertificate {
    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn sigma_eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let m = DVector::from_vec(monomials(x));
        Ok((m.transpose() * to_matrix(&self.sigma) * &m)[(0, 0)])
    }

    /// The `n x n` matrix `S(x)`.
    pub fn s_eval(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_dim(x)?;
        let n = self.n;
        let m = monomials(x);
        let w = n + 1;
        Ok(DMatrix::from_fn(n, n, |j, l| {
            let mut acc = 0.0;
            for k in 0..w {
                for kk in 0..w {
                    acc += self.s[j * w + k][l * w + kk] * m[k] * m[kk];
                }
            }
            acc
        }))
    }

    /// `p(x) - gamma - sigma(x) - Tr(S(x) hess p(x))`.
    pub fn identity_residual(&self, p: &CubicPolynomial, x: &[f64]) -> Result<f64> {
        let h = p.hessian(x)?;
        let tr = (self.s_eval(x)? * h).trace();
        Ok(p.eval(x)? - self.gamma - self.sigma_eval(x)? - tr)
    }

    /// Largest absolute identity residual over `points`.
    pub fn max_identity_residual(&self, p: &CubicPolynomial, points: &[Vec<f64>]) -> Result<f64> {
        points
            .iter()
            .map(|x| self.identity_residual(p, x).map(f64::abs))
            .try_fold(0.0_f64, |acc, r| r.map(|r| acc.max(r)))
    }
}

/// Solves the sum-of-squares program. Returns `None` when it is infeasible
/// (no second-order point) and an error on numerical failure.
pub fn solve_sos(p: &CubicPolynomial, opts: &SolverOptions) -> Result<Option<SosCertificate>> {
    let sdp = build_sos_sdp(p);
    let sol = solve(&sdp.problem, opts)?;
    match sol.status {
        SdpStatus::Optimal => {}
        SdpStatus::Infeasible | SdpStatus::Unbounded => return Ok(None),
        SdpStatus::NumericalFailure => {
            return Err(Error::Solver {
                stage: "sum-of-squares".into(),
                msg: format!("{} after {} iterations", sol.solver_status, sol.iterations),
            })
        }
    }
    let rows = |b: usize| -> Vec<Vec<f64>> {
        let m = sol.matrix(b).expect("psd block");
        m.row_iter().map(|r| r.iter().copied().collect()).collect()
    };
    Ok(Some(SosCertificate {
        n: sdp.n,
        gamma: sol.value(&sdp.problem.vec(sdp.gamma_block, 0)),
        sigma: rows(sdp.sigma_block),
        s: rows(sdp.s_block),
    }))
}

/// Tests `hess p(x) >= 0`, `sigma(x) = 0` and `Tr(S(x) hess p(x)) = 0`, each
/// within `tol (1 + ||x||^2)`.
pub fn gamma_membership(p: &CubicPolynomial, cert: &SosCertificate, x: &[f64], tol: f64) -> Result<bool> {
    let h = p.hessian(x)?;
    let scale = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
    if !linalg::is_psd(&h, tol) {
        return Ok(false);
    }
    let sigma = cert.sigma_eval(x)?;
    let tr = (cert.s_eval(x)? * &h).trace();
    Ok(sigma.abs() <= tol * scale && tr.abs() <= tol * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::MonomialMap;

    fn poly(n: usize, terms: &[(&[u32], f64)]) -> CubicPolynomial {
        let map: MonomialMap<f64> = terms.iter().map(|(e, c)| (e.to_vec(), *c)).collect();
        CubicPolynomial::from_monomials(n, &map).unwrap()
    }

    fn grid(n: usize) -> Vec<Vec<f64>> {
        let vals = [-2.0, -0.5, 0.0, 0.7, 1.5];
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|v| {
                    vals.iter().map(move |&a| {
                        let mut w = v.clone();
                        w.push(a);
                        w
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn gamma_is_value_at_second_order_point() {
        let opts = SolverOptions::default();
        let p = poly(1, &[(&[3], 1.0), (&[1], -6.0)]);
        let c = solve_sos(&p, &opts).unwrap().unwrap();
        assert!((c.gamma + 4.0 * 2f64.sqrt()).abs() < 1e-5, "{}", c.gamma);
        assert!(c.max_identity_residual(&p, &grid(1)).unwrap() < 1e-5);

        let sq = poly(1, &[(&[2], 1.0)]);
        assert!(solve_sos(&sq, &opts).unwrap().unwrap().gamma.abs() < 1e-6);

        assert!(solve_sos(&poly(1, &[(&[1], 1.0)]), &opts).unwrap().is_none());
    }

    #[test]
    fn membership() {
        let opts = SolverOptions::default();
        let ex32 = poly(2, &[(&[0, 2], 1.0), (&[2, 1], -1.0)]);
        let c = solve_sos(&ex32, &opts).unwrap().unwrap();
        assert!(c.gamma.abs() < 1e-6);
        assert!(c.max_identity_residual(&ex32, &grid(2)).unwrap() < 1e-5);
        assert!(gamma_membership(&ex32, &c, &[0.0, 0.0], MEMBERSHIP_TOL).unwrap());
        assert!(!gamma_membership(&ex32, &c, &[1.0, 0.0], MEMBERSHIP_TOL).unwrap());

        let ex31 = poly(2, &[(&[2, 1], 1.0)]);
        let c = solve_sos(&ex31, &opts).unwrap().unwrap();
        assert!(gamma_membership(&ex31, &c, &[0.0, 2.0], MEMBERSHIP_TOL).unwrap());
        assert!(!gamma_membership(&ex31, &c, &[0.0, -2.0], MEMBERSHIP_TOL).unwrap());
        assert!(!gamma_membership(&ex31, &c, &[1.0, 2.0], MEMBERSHIP_TOL).unwrap());
    }
}
