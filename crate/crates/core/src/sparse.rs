//! Exponent-map polynomials of any degree, used by the reduction generators
//! and brute-force oracles.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{CubicPolynomial, MonomialMap};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsePolynomial {
    n: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

fn monomial(exp: &[u32], x: &[f64]) -> f64 {
    exp.iter()
        .zip(x)
        .filter(|(e, _)| **e > 0)
        .map(|(&e, &v)| v.powi(e as i32))
        .product()
}

impl SparsePolynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(vec![0; n], c).expect("length n");
        p
    }

    /// The coordinate `x_i`.
    pub fn variable(n: usize, i: usize) -> Self {
        let mut exp = vec![0; n];
        exp[i] = 1;
        let mut p = Self::zero(n);
        p.add_term(exp, 1.0).expect("length n");
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, f64)>>(n: usize, terms: I) -> Result<Self> {
        let mut p = Self::zero(n);
        for (exp, coef) in terms {
            p.add_term(exp, coef)?;
        }
        Ok(p)
    }

    /// Adds `coef * x^exp`, dropping the entry if it cancels to zero.
    pub fn add_term(&mut self, exp: Vec<u32>, coef: f64) -> Result<()> {
        check_dim(self.n, exp.len())?;
        if coef == 0.0 {
            return Ok(());
        }
        match self.terms.entry(exp) {
            Entry::Vacant(v) => {
                v.insert(coef);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coef;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, f64> {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c)?;
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s).expect("same length");
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        let mut out = Self::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb)?;
            }
        }
        Ok(out)
    }

    /// Re-indexes into `new_n` variables, variable `i` becoming `offset + i`.
    pub fn embed(&self, new_n: usize, offset: usize) -> Result<Self> {
        if offset + self.n > new_n {
            return Err(Error::DimensionMismatch {
                expected: new_n,
                got: offset + self.n,
            });
        }
        let mut out = Self::zero(new_n);
        for (e, c) in &self.terms {
            let mut ne = vec![0; new_n];
            ne[offset..offset + self.n].copy_from_slice(e);
            out.add_term(ne, *c)?;
        }
        Ok(out)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.n, x.len())?;
        Ok(self.terms.iter().map(|(e, c)| c * monomial(e, x)).sum())
    }

    pub fn gradient(&self, x: &[f64]) -> Result<DVector<f64>> {
        check_dim(self.n, x.len())?;
        let mut g = DVector::zeros(self.n);
        let mut e = vec![0u32; self.n];
        for (exp, c) in &self.terms {
            for i in 0..self.n {
                if exp[i] == 0 {
                    continue;
                }
                e.copy_from_slice(exp);
                e[i] -= 1;
                g[i] += c * exp[i] as f64 * monomial(&e, x);
            }
        }
        Ok(g)
    }

    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.n, x.len())?;
        let mut h = DMatrix::zeros(self.n, self.n);
        let mut e = vec![0u32; self.n];
        for (exp, c) in &self.terms {
            for i in 0..self.n {
                if exp[i] == 0 {
                    continue;
                }
                for j in i..self.n {
                    e.copy_from_slice(exp);
                    let fi = e[i] as f64;
                    e[i] -= 1;
                    if e[j] == 0 {
                        continue;
                    }
                    let fj = e[j] as f64;
                    e[j] -= 1;
                    let v = c * fi * fj * monomial(&e, x);
                    h[(i, j)] += v;
                    if i != j {
                        h[(j, i)] += v;
                    }
                }
            }
        }
        Ok(h)
    }

    /// Canonical cubic form; fails when the degree exceeds 3.
    pub fn to_cubic(&self) -> Result<CubicPolynomial> {
        let map: MonomialMap<f64> = self.terms.clone();
        CubicPolynomial::from_monomials(self.n, &map)
    }

    pub fn from_cubic(p: &CubicPolynomial) -> Self {
        let mut out = Self::zero(p.n());
        for (e, c) in p.to_monomials() {
            out.add_term(e, c).expect("same length");
        }
        out
    }
}
