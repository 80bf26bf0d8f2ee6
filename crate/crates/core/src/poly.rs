//! Cubic polynomials in canonical form
//! `p(x) = 1/6 sum_i x_i x^T H_i x + 1/2 x^T Q x + b^T x + c`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;

use crate::coeff::{ratio, small, Coeff};
use crate::error::{Error, Result};

/// Exponent vector -> coefficient.
pub type MonomialMap<T> = BTreeMap<Vec<u32>, T>;

/// Degree-at-most-3 polynomial in `n` variables, stored as the Hessian slices
/// `H_i`, the quadratic part `Q`, the linear part `b` and the constant `c`.
///
/// The slices satisfy `(H_i)_jk = (H_j)_ik = (H_k)_ij`, so `sum_i x_i H_i + Q`
/// is the Hessian at `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicPolynomial<T: Coeff = f64> {
    n: usize,
    h: Vec<DMatrix<T>>,
    q: DMatrix<T>,
    b: DVector<T>,
    c: T,
}

pub type RationalCubic = CubicPolynomial<BigRational>;

/// `a3 t^3 + a2 t^2 + a1 t + a0`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnivariateCubic<T: Coeff = f64> {
    pub a3: T,
    pub a2: T,
    pub a1: T,
    pub a0: T,
}

impl<T: Coeff> UnivariateCubic<T> {
    pub fn eval(&self, t: &T) -> T {
        ((self.a3.clone() * t.clone() + self.a2.clone()) * t.clone() + self.a1.clone()) * t.clone()
            + self.a0.clone()
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

fn factorial(k: u32) -> i64 {
    (1..=k as i64).product()
}

/// Indices of an exponent vector with multiplicity, e.g. `[2, 1] -> [0, 0, 1]`.
fn expand_indices(exp: &[u32]) -> Vec<usize> {
    exp.iter()
        .enumerate()
        .flat_map(|(i, &e)| std::iter::repeat_n(i, e as usize))
        .collect()
}

fn bilinear<T: Coeff>(m: &DMatrix<T>, x: &[T], y: &[T]) -> T {
    let mut acc = T::zero();
    for j in 0..m.nrows() {
        if x[j].is_zero() {
            continue;
        }
        let mut row = T::zero();
        for k in 0..m.ncols() {
            row = row + m[(j, k)].clone() * y[k].clone();
        }
        acc = acc + x[j].clone() * row;
    }
    acc
}

fn dot<T: Coeff>(x: &[T], y: &[T]) -> T {
    x.iter()
        .zip(y)
        .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

impl<T: Coeff> CubicPolynomial<T> {
    /// The zero polynomial in `n` variables.
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            h: vec![DMatrix::from_element(n, n, T::zero()); n],
            q: DMatrix::from_element(n, n, T::zero()),
            b: DVector::from_element(n, T::zero()),
            c: T::zero(),
        }
    }

    /// Builds the canonical form from a monomial map. Each cubic coefficient is
    /// spread over every index permutation, so the cross-slice symmetry holds
    /// exactly.
    pub fn from_monomials(n: usize, terms: &MonomialMap<T>) -> Result<Self> {
        let mut p = Self::zero(n);
        for (exp, coef) in terms {
            check_dim(n, exp.len())?;
            let degree: u32 = exp.iter().sum();
            if degree > 3 {
                return Err(Error::DegreeTooHigh {
                    exponent: exp.clone(),
                    degree,
                    max: 3,
                });
            }
            if coef.is_zero() {
                continue;
            }
            let mult = small::<T>(exp.iter().map(|&e| factorial(e)).product());
            let idx = expand_indices(exp);
            match idx.as_slice() {
                [] => p.c = coef.clone(),
                [i] => p.b[*i] = coef.clone(),
                [j, k] => {
                    let v = coef.clone() * mult;
                    p.q[(*j, *k)] = v.clone();
                    p.q[(*k, *j)] = v;
                }
                [i, j, k] => {
                    let v = coef.clone() * mult;
                    for (a, b, c) in [
                        (i, j, k),
                        (i, k, j),
                        (j, i, k),
                        (j, k, i),
                        (k, i, j),
                        (k, j, i),
                    ] {
                        p.h[*a][(*b, *c)] = v.clone();
                    }
                }
                _ => unreachable!("degree checked above"),
            }
        }
        Ok(p)
    }

    /// Builds from explicit components, validating shapes and symmetry
    /// (exactly for rationals, to `1e-9` relative for floats).
    pub fn from_parts(h: Vec<DMatrix<T>>, q: DMatrix<T>, b: DVector<T>, c: T) -> Result<Self> {
        let n = b.len();
        check_dim(n, h.len())?;
        check_dim(n, q.nrows())?;
        check_dim(n, q.ncols())?;
        for hi in &h {
            check_dim(n, hi.nrows())?;
            check_dim(n, hi.ncols())?;
        }
        let scale = h
            .iter()
            .flat_map(|m| m.iter())
            .chain(q.iter())
            .map(|v| v.to_f64().abs())
            .fold(1.0, f64::max);
        let tol = 1e-9 * scale;
        let near = |a: &T, b: &T| (a.clone() - b.clone()).is_negligible(tol);
        for j in 0..n {
            for k in 0..n {
                if !near(&q[(j, k)], &q[(k, j)]) {
                    return Err(Error::InvalidPolynomial(format!(
                        "Q is not symmetric at ({j}, {k})"
                    )));
                }
                for i in 0..n {
                    let v = &h[i][(j, k)];
                    if !near(v, &h[j][(i, k)]) || !near(v, &h[k][(i, j)]) {
                        return Err(Error::InvalidPolynomial(format!(
                            "H slices violate (H_i)_jk = (H_j)_ik = (H_k)_ij at ({i}, {j}, {k})"
                        )));
                    }
                }
            }
        }
        Ok(Self { n, h, q, b, c })
    }

    /// Inverse of [`from_monomials`](Self::from_monomials); zero coefficients are omitted.
    pub fn to_monomials(&self) -> MonomialMap<T> {
        let n = self.n;
        let mut out = MonomialMap::new();
        let mut put = |idx: &[usize], v: T| {
            if v.is_zero() {
                return;
            }
            let mut exp = vec![0u32; n];
            for &i in idx {
                exp[i] += 1;
            }
            let mult: i64 = exp.iter().map(|&e| factorial(e)).product();
            out.insert(exp, v / small::<T>(mult));
        };
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    put(&[i, j, k], self.h[i][(j, k)].clone());
                }
            }
        }
        for j in 0..n {
            for k in j..n {
                put(&[j, k], self.q[(j, k)].clone());
            }
        }
        for i in 0..n {
            put(&[i], self.b[i].clone());
        }
        put(&[], self.c.clone());
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> &[DMatrix<T>] {
        &self.h
    }

    pub fn q(&self) -> &DMatrix<T> {
        &self.q
    }

    pub fn b(&self) -> &DVector<T> {
        &self.b
    }

    pub fn c(&self) -> &T {
        &self.c
    }

    /// True when every `H_i` vanishes.
    pub fn is_at_most_quadratic(&self) -> bool {
        self.h.iter().all(|m| m.iter().all(|v| v.is_zero()))
    }

    /// `sum_i y_i H_i`.
    pub fn slice_combination(&self, y: &[T]) -> Result<DMatrix<T>> {
        check_dim(self.n, y.len())?;
        let mut m = DMatrix::from_element(self.n, self.n, T::zero());
        for (yi, hi) in y.iter().zip(&self.h) {
            if yi.is_zero() {
                continue;
            }
            for (dst, src) in m.iter_mut().zip(hi.iter()) {
                *dst = dst.clone() + yi.clone() * src.clone();
            }
        }
        Ok(m)
    }

    pub fn eval(&self, x: &[T]) -> Result<T> {
        let cubic = self.cubic_part_eval(x)?;
        let quad = bilinear(&self.q, x, x) * ratio::<T>(1, 2);
        Ok(cubic + quad + dot(self.b.as_slice(), x) + self.c.clone())
    }

    /// Entry `i` is `1/2 x^T H_i x + e_i^T Q x + b_i`.
    pub fn gradient(&self, x: &[T]) -> Result<DVector<T>> {
        let mut g = self.cubic_part_grad(x)?;
        for i in 0..self.n {
            let qi: T = (0..self.n).fold(T::zero(), |acc, k| {
                acc + self.q[(i, k)].clone() * x[k].clone()
            });
            g[i] = g[i].clone() + qi + self.b[i].clone();
        }
        Ok(g)
    }

    /// `sum_i x_i H_i + Q`.
    pub fn hessian(&self, x: &[T]) -> Result<DMatrix<T>> {
        let m = self.slice_combination(x)?;
        Ok(m.zip_map(&self.q, |a, b| a + b))
    }

    /// `p_3(v) = 1/6 sum_i v_i v^T H_i v`.
    pub fn cubic_part_eval(&self, v: &[T]) -> Result<T> {
        let g = self.cubic_part_grad(v)?;
        Ok(dot(g.as_slice(), v) * ratio::<T>(1, 3))
    }

    /// Entry `i` is `1/2 v^T H_i v`.
    pub fn cubic_part_grad(&self, v: &[T]) -> Result<DVector<T>> {
        check_dim(self.n, v.len())?;
        let half = ratio::<T>(1, 2);
        Ok(DVector::from_iterator(
            self.n,
            self.h.iter().map(|hi| bilinear(hi, v, v) * half.clone()),
        ))
    }

    /// `sum_i v_i H_i`.
    pub fn cubic_part_hessian(&self, v: &[T]) -> Result<DMatrix<T>> {
        self.slice_combination(v)
    }

    /// Coefficients of `t -> p(x + t v)`:
    /// `(p_3(v), 1/2 v^T hess(x) v, grad(x)^T v, p(x))`.
    pub fn restrict_to_line(&self, x: &[T], v: &[T]) -> Result<UnivariateCubic<T>> {
        check_dim(self.n, x.len())?;
        check_dim(self.n, v.len())?;
        let hess = self.hessian(x)?;
        Ok(UnivariateCubic {
            a3: self.cubic_part_eval(v)?,
            a2: bilinear(&hess, v, v) * ratio::<T>(1, 2),
            a1: dot(self.gradient(x)?.as_slice(), v),
            a0: self.eval(x)?,
        })
    }

    pub fn to_f64(&self) -> CubicPolynomial<f64> {
        CubicPolynomial {
            n: self.n,
            h: self.h.iter().map(|m| m.map(|v| v.to_f64())).collect(),
            q: self.q.map(|v| v.to_f64()),
            b: self.b.map(|v| v.to_f64()),
            c: self.c.to_f64(),
        }
    }

    /// Same polynomial with the constant term replaced.
    pub fn with_constant(mut self, c: T) -> Self {
        self.c = c;
        self
    }

    /// `p(x + shift)` re-expressed in canonical form around the new origin.
    pub fn shifted(&self, shift: &[T]) -> Result<Self> {
        Ok(Self {
            n: self.n,
            h: self.h.clone(),
            q: self.hessian(shift)?,
            b: self.gradient(shift)?,
            c: self.eval(shift)?,
        })
    }
}

impl CubicPolynomial<f64> {
    /// Largest absolute coefficient among `H`, `Q` and `b` (at least 1).
    pub fn coefficient_scale(&self) -> f64 {
        self.h
            .iter()
            .flat_map(|m| m.iter())
            .chain(self.q.iter())
            .chain(self.b.iter())
            .fold(1.0_f64, |acc, v| acc.max(v.abs()))
    }
}

impl RationalCubic {
    /// Exact rational image of a float polynomial.
    pub fn from_f64_exact(p: &CubicPolynomial<f64>) -> Result<Self> {
        let conv = |v: &f64| crate::coeff::rational_from_f64(*v);
        let map_m = |m: &DMatrix<f64>| -> Result<DMatrix<BigRational>> {
            let data = m.iter().map(conv).collect::<Result<Vec<_>>>()?;
            Ok(DMatrix::from_vec(m.nrows(), m.ncols(), data))
        };
        Ok(Self {
            n: p.n,
            h: p.h.iter().map(map_m).collect::<Result<_>>()?,
            q: map_m(&p.q)?,
            b: DVector::from_vec(p.b.iter().map(conv).collect::<Result<_>>()?),
            c: conv(&p.c)?,
        })
    }
}
