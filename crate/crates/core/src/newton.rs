//! Classical and third-order Newton iterations, the multivariate variant
//! that steps to a local minimum of the cubic Taylor model, and basins of
//! attraction of univariate polynomials on the complex plane.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::local_min::{find_local_minimum, SearchOptions, Verdict};
use crate::poly::CubicPolynomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Classical,
    ThirdMin,
    ThirdMax,
    MultivariateThird,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "classical" => Ok(Self::Classical),
            "third_min" => Ok(Self::ThirdMin),
            "third_max" => Ok(Self::ThirdMax),
            "multivariate_third" => Ok(Self::MultivariateThird),
            _ => Err(Error::InvalidInput(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Stop once `|f'| <= tol` (gradient norm in the multivariate case).
    pub tol: f64,
    pub max_iter: usize,
    /// Third-order steps fall back to the classical step when
    /// `|f'''| <= tol_f3 max(1, |f''|)`.
    pub tol_f3: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
            tol_f3: 1e-12,
        }
    }
}

type Derivs = dyn Fn(f64) -> [f64; 4] + Send + Sync;

/// `x -> (f, f', f'', f''')` on the real line.
#[derive(Clone)]
pub struct ScalarC3Function {
    pub name: String,
    derivs: Arc<Derivs>,
}

impl fmt::Debug for ScalarC3Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarC3Function").field("name", &self.name).finish()
    }
}

impl ScalarC3Function {
    pub fn new(name: &str, derivs: impl Fn(f64) -> [f64; 4] + Send + Sync + 'static) -> Self {
        Self {
            name: name.to_string(),
            derivs: Arc::new(derivs),
        }
    }

    pub fn eval(&self, x: f64) -> [f64; 4] {
        (self.derivs)(x)
    }

    /// `20 x atan(x) - 10 log(1 + x^2) + x^2`, strongly convex with minimum 0 at 0.
    pub fn arctan_test() -> Self {
        Self::new("arctan-test", |x| {
            let s = 1.0 + x * x;
            [
                20.0 * x * x.atan() - 10.0 * s.ln() + x * x,
                20.0 * x.atan() + 2.0 * x,
                2.0 + 20.0 / s,
                -40.0 * x / (s * s),
            ]
        })
    }

    pub fn polynomial(p: &UnivariatePolynomial) -> Self {
        let p = p.clone();
        Self::new(&p.to_string(), move |x| {
            let d = p.derivs(Complex64::new(x, 0.0));
            [d[0].re, d[1].re, d[2].re, d[3].re]
        })
    }

    /// `builtin:arctan-test` or `poly:<expression in x>`.
    pub fn parse(text: &str) -> Result<Self> {
        if let Some(name) = text.strip_prefix("builtin:") {
            return match name {
                "arctan-test" => Ok(Self::arctan_test()),
                _ => Err(Error::InvalidInput(format!("unknown builtin function {name:?}"))),
            };
        }
        let expr = text.strip_prefix("poly:").unwrap_or(text);
        Ok(Self::polynomial(&UnivariatePolynomial::parse(expr)?))
    }

    /// Compares each derivative with a central difference of the previous
    /// one at `points`, with relative tolerance `tol`.
    pub fn check_derivatives(&self, points: &[f64], tol: f64) -> Result<()> {
        for &x in points {
            let h = 1e-5 * x.abs().max(1.0);
            let (lo, hi, mid) = (self.eval(x - h), self.eval(x + h), self.eval(x));
            for k in 0..3 {
                let fd = (hi[k] - lo[k]) / (2.0 * h);
                let scale = mid[k + 1].abs().max(fd.abs()).max(1.0);
                if (fd - mid[k + 1]).abs() > tol * scale {
                    return Err(Error::InvalidInput(format!(
                        "{}: derivative {} at {x} is {} but finite differences give {fd}",
                        self.name,
                        k + 1,
                        mid[k + 1]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Scalars the univariate steps run over.
pub trait NewtonScalar:
    Copy
    + Send
    + Sync
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + fmt::Debug
{
    fn from_f64(v: f64) -> Self;
    fn modulus(self) -> f64;
    /// Principal square root; `None` where no root exists in the field.
    fn root(self) -> Option<Self>;
}

impl NewtonScalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn root(self) -> Option<Self> {
        (self >= 0.0).then(|| self.sqrt())
    }
}

impl NewtonScalar for Complex64 {
    fn from_f64(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn root(self) -> Option<Self> {
        Some(self.sqrt())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step<T> {
    pub next: T,
    /// `f''^2 - 2 f' f'''` for third-order steps.
    pub discriminant: Option<T>,
    /// The classical step was taken because `f'''` vanished.
    pub fallback: bool,
}

fn step_failed(msg: String) -> Error {
    Error::StepFailed(msg)
}

/// `x - f'/f''`.
pub fn classical_step<T: NewtonScalar>(x: T, d: &[T; 4]) -> Result<Step<T>> {
    if d[2].modulus() == 0.0 || !d[2].modulus().is_finite() {
        return Err(step_failed(format!("second derivative {:?} at {x:?}", d[2])));
    }
    Ok(Step {
        next: x - d[1] / d[2],
        discriminant: None,
        fallback: false,
    })
}

/// `x - (f'' -+ sqrt(f''^2 - 2 f' f''')) / f'''`: the minus branch moves to
/// the local minimum of the cubic Taylor model, the plus branch to its local
/// maximum. Evaluated in the conjugate form `2 f' / (f'' +- sqrt)` whenever
/// that avoids cancellation.
pub fn third_order_step<T: NewtonScalar>(x: T, d: &[T; 4], minimum: bool, tol_f3: f64) -> Result<Step<T>> {
    if d[3].modulus() <= tol_f3 * d[2].modulus().max(1.0) {
        return classical_step(x, d).map(|s| Step { fallback: true, ..s });
    }
    let disc = d[2] * d[2] - T::from_f64(2.0) * d[1] * d[3];
    let Some(s) = disc.root() else {
        return Err(step_failed(format!(
            "negative discriminant {disc:?} at {x:?}: the cubic model has no critical point"
        )));
    };
    let s = if minimum { s } else { T::from_f64(0.0) - s };
    let (direct, conj) = (d[2] - s, d[2] + s);
    let delta = if conj.modulus() >= direct.modulus() && conj.modulus() > 0.0 {
        T::from_f64(2.0) * d[1] / conj
    } else {
        direct / d[3]
    };
    Ok(Step {
        next: x - delta,
        discriminant: Some(disc),
        fallback: false,
    })
}

pub fn step_classical(f: &ScalarC3Function, x: f64) -> Result<f64> {
    classical_step(x, &f.eval(x)).map(|s| s.next)
}

pub fn step_third_min(f: &ScalarC3Function, x: f64, opts: &NewtonOptions) -> Result<Step<f64>> {
    third_order_step(x, &f.eval(x), true, opts.tol_f3)
}

pub fn step_third_max(f: &ScalarC3Function, x: f64, opts: &NewtonOptions) -> Result<Step<f64>> {
    third_order_step(x, &f.eval(x), false, opts.tol_f3)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIter,
    StepFailed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub discriminant: Option<f64>,
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonTrace {
    pub method: Method,
    /// `x_0, x_1, ...`; one entry per coordinate.
    pub iterates: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    /// `|f'(x_k)|`, or the gradient norm.
    pub gradient_norms: Vec<f64>,
    /// One entry per step taken.
    pub steps: Vec<StepDiagnostics>,
    pub termination: Termination,
    pub failure: Option<String>,
}

impl NewtonTrace {
    pub fn last(&self) -> &[f64] {
        self.iterates.last().expect("x_0 is always recorded")
    }
}

/// Iterates until `|f'| <= tol` or `max_iter` steps have been taken.
pub fn run(f: &ScalarC3Function, x0: f64, method: Method, opts: &NewtonOptions) -> Result<NewtonTrace> {
    if method == Method::MultivariateThird {
        return Err(Error::InvalidInput(
            "multivariate_third needs a multivariate function".into(),
        ));
    }
    let mut x = x0;
    let mut trace = NewtonTrace {
        method,
        iterates: vec![],
        values: vec![],
        gradient_norms: vec![],
        steps: vec![],
        termination: Termination::MaxIter,
        failure: None,
    };
    loop {
        let d = f.eval(x);
        trace.iterates.push(vec![x]);
        trace.values.push(d[0]);
        trace.gradient_norms.push(d[1].abs());
        if d[1].abs() <= opts.tol {
            trace.termination = Termination::Converged;
            break;
        }
        if trace.steps.len() >= opts.max_iter {
            break;
        }
        let step = match method {
            Method::Classical => classical_step(x, &d),
            Method::ThirdMin => third_order_step(x, &d, true, opts.tol_f3),
            _ => third_order_step(x, &d, false, opts.tol_f3),
        };
        match step {
            Ok(s) => {
                trace.steps.push(StepDiagnostics {
                    discriminant: s.discriminant,
                    fallback: s.fallback,
                });
                x = s.next;
            }
            Err(e) => {
                trace.termination = Termination::StepFailed;
                trace.failure = Some(e.to_string());
                break;
            }
        }
    }
    Ok(trace)
}

/// Value, gradient, Hessian and third-derivative tensor; `tensor[i]` is the
/// derivative of the Hessian along `e_i`.
#[derive(Clone, Debug)]
pub struct TaylorData {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
    pub tensor: Vec<DMatrix<f64>>,
}

type Oracle = dyn Fn(&[f64]) -> TaylorData + Send + Sync;

#[derive(Clone)]
pub struct MultiC3Function {
    pub name: String,
    pub n: usize,
    oracle: Arc<Oracle>,
}

impl fmt::Debug for MultiC3Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiC3Function")
            .field("name", &self.name)
            .field("n", &self.n)
            .finish()
    }
}

impl MultiC3Function {
    pub fn new(name: &str, n: usize, oracle: impl Fn(&[f64]) -> TaylorData + Send + Sync + 'static) -> Self {
        Self {
            name: name.to_string(),
            n,
            oracle: Arc::new(oracle),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<TaylorData> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok((self.oracle)(x))
    }

    /// `sum_i g(x_i)`.
    pub fn separable(g: &ScalarC3Function, n: usize) -> Self {
        let g = g.clone();
        Self::new(&format!("sum of {}", g.name), n, move |x| {
            let ds: Vec<[f64; 4]> = x.iter().map(|&v| g.eval(v)).collect();
            let n = x.len();
            TaylorData {
                value: ds.iter().map(|d| d[0]).sum(),
                gradient: DVector::from_fn(n, |i, _| ds[i][1]),
                hessian: DMatrix::from_fn(n, n, |i, j| if i == j { ds[i][2] } else { 0.0 }),
                tensor: (0..n)
                    .map(|i| DMatrix::from_fn(n, n, |j, k| if i == j && j == k { ds[i][3] } else { 0.0 }))
                    .collect(),
            }
        })
    }

    /// A cubic polynomial, whose Taylor model is itself.
    pub fn cubic(p: &CubicPolynomial) -> Self {
        let p = p.clone();
        Self::new("cubic", p.n(), move |x| TaylorData {
            value: p.eval(x).expect("dimension checked"),
            gradient: p.gradient(x).expect("dimension checked"),
            hessian: p.hessian(x).expect("dimension checked"),
            tensor: p.h().to_vec(),
        })
    }
}

/// Cubic Taylor model in the displacement `d`.
pub fn taylor_model(t: &TaylorData) -> Result<CubicPolynomial> {
    CubicPolynomial::from_parts(t.tensor.clone(), t.hessian.clone(), t.gradient.clone(), t.value)
}

/// Moves to the local minimum of the cubic Taylor model found by the
/// semidefinite search. Fails when the model has no local minimum.
pub fn step_multivariate_third(f: &MultiC3Function, x: &[f64], search: &SearchOptions) -> Result<Vec<f64>> {
    let model = taylor_model(&f.eval(x)?)?;
    let r = find_local_minimum(&model, search)?;
    match (r.verdict, r.point) {
        (Verdict::LocalMinFound, Some(d)) => Ok(x.iter().zip(&d).map(|(a, b)| a + b).collect()),
        (v, _) => Err(step_failed(format!(
            "Taylor model at {x:?} has no local minimum ({v:?}, stage {:?})",
            r.stage
        ))),
    }
}

pub fn run_multivariate(
    f: &MultiC3Function,
    x0: &[f64],
    opts: &NewtonOptions,
    search: &SearchOptions,
) -> Result<NewtonTrace> {
    let mut x = x0.to_vec();
    let mut trace = NewtonTrace {
        method: Method::MultivariateThird,
        iterates: vec![],
        values: vec![],
        gradient_norms: vec![],
        steps: vec![],
        termination: Termination::MaxIter,
        failure: None,
    };
    loop {
        let t = f.eval(&x)?;
        trace.iterates.push(x.clone());
        trace.values.push(t.value);
        trace.gradient_norms.push(t.gradient.norm());
        if t.gradient.norm() <= opts.tol {
            trace.termination = Termination::Converged;
            break;
        }
        if trace.steps.len() >= opts.max_iter {
            break;
        }
        match step_multivariate_third(f, &x, search) {
            Ok(next) => {
                trace.steps.push(StepDiagnostics {
                    discriminant: None,
                    fallback: false,
                });
                x = next;
            }
            Err(e @ Error::StepFailed(_)) => {
                trace.termination = Termination::StepFailed;
                trace.failure = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(trace)
}

/// Polynomial in one variable with complex coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct UnivariatePolynomial {
    pub coeffs: Vec<Complex64>,
}

impl fmt::Display for UnivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let coef = if c.im == 0.0 {
                let r = c.re;
                if !first {
                    write!(f, "{}", if r < 0.0 { "-" } else { "+" })?;
                } else if r < 0.0 {
                    write!(f, "-")?;
                }
                let a = r.abs();
                if a == 1.0 && k > 0 {
                    String::new()
                } else {
                    format!("{a}")
                }
            } else {
                if !first {
                    write!(f, "+")?;
                }
                format!("({c})")
            };
            first = false;
            match k {
                0 => write!(f, "{}", if coef.is_empty() { "1".into() } else { coef })?,
                1 => write!(f, "{coef}x")?,
                _ => write!(f, "{coef}x^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl UnivariatePolynomial {
    pub fn from_real(coeffs: &[f64]) -> Self {
        Self {
            coeffs: coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        }
    }

    /// Parses sums of terms `c`, `c x`, `c*x^k`, `x^k` with real `c`,
    /// e.g. `x^5 - 5x`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidInput(format!("cannot parse polynomial {s:?}: {why}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad("empty"));
        }
        let mut terms = Vec::new();
        let mut start = 0;
        let bytes = compact.as_bytes();
        for i in 1..bytes.len() {
            let prev = bytes[i - 1];
            if (bytes[i] == b'+' || bytes[i] == b'-') && prev != b'e' && prev != b'E' && prev != b'^' {
                terms.push(&compact[start..i]);
                start = i;
            }
        }
        terms.push(&compact[start..]);
        let mut coeffs: Vec<f64> = Vec::new();
        for t in terms {
            let (sign, body) = match t.as_bytes()[0] {
                b'-' => (-1.0, &t[1..]),
                b'+' => (1.0, &t[1..]),
                _ => (1.0, t),
            };
            let (coef, deg) = match body.find('x') {
                None => (body.parse::<f64>().map_err(|_| bad(t))?, 0usize),
                Some(pos) => {
                    let c = body[..pos].trim_end_matches('*');
                    let c = if c.is_empty() { 1.0 } else { c.parse::<f64>().map_err(|_| bad(t))? };
                    let rest = &body[pos + 1..];
                    let d = if rest.is_empty() {
                        1
                    } else {
                        rest.strip_prefix('^')
                            .and_then(|e| e.parse::<usize>().ok())
                            .ok_or_else(|| bad(t))?
                    };
                    (c, d)
                }
            };
            if coeffs.len() <= deg {
                coeffs.resize(deg + 1, 0.0);
            }
            coeffs[deg] += sign * coef;
        }
        Ok(Self::from_real(&coeffs))
    }

    pub fn derivative(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        }
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
    }

    /// `f, f', f'', f'''` at `x`.
    pub fn derivs(&self, x: Complex64) -> [Complex64; 4] {
        let d1 = self.derivative();
        let d2 = d1.derivative();
        let d3 = d2.derivative();
        [self.eval(x), d1.eval(x), d2.eval(x), d3.eval(x)]
    }

    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| *c != Complex64::new(0.0, 0.0))
            .unwrap_or(0)
    }

    /// Roots from the eigenvalues of the companion matrix, ordered by angle
    /// in `[0, 2 pi)` and then by modulus.
    pub fn roots(&self) -> Vec<Complex64> {
        let deg = self.degree();
        if deg == 0 {
            return vec![];
        }
        let lead = self.coeffs[deg];
        let mut c = DMatrix::<Complex64>::zeros(deg, deg);
        for i in 1..deg {
            c[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..deg {
            c[(i, deg - 1)] = -self.coeffs[i] / lead;
        }
        let mut roots: Vec<Complex64> = c
            .schur()
            .eigenvalues()
            .map(|v| v.iter().copied().collect())
            .unwrap_or_default();
        let angle = |z: &Complex64| {
            let a = z.arg();
            if a.abs() <= 1e-12 {
                0.0
            } else if a < 0.0 {
                a + std::f64::consts::TAU
            } else {
                a
            }
        };
        roots.sort_by(|a, b| angle(a).total_cmp(&angle(b)).then(a.norm().total_cmp(&b.norm())));
        roots
    }

    /// Critical points: roots of the derivative.
    pub fn critical_points(&self) -> Vec<Complex64> {
        self.derivative().roots()
    }
}

/// Label for starting points that did not reach a critical point.
pub const NO_CONVERGENCE: i32 = -1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl std::str::FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidInput(format!("region {s:?}: expected re_min,re_max,im_min,im_max")))?;
        match v.as_slice() {
            &[a, b, c, d] if a < b && c < d => Ok(Self {
                re_min: a,
                re_max: b,
                im_min: c,
                im_max: d,
            }),
            _ => Err(Error::InvalidInput(format!(
                "region {s:?}: expected re_min<re_max,im_min<im_max"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractalGrid {
    pub width: usize,
    pub height: usize,
    pub critical_points: Vec<[f64; 2]>,
    /// Row-major, row 0 at `im_max`.
    pub labels: Vec<i32>,
}

impl FractalGrid {
    pub fn label(&self, row: usize, col: usize) -> i32 {
        self.labels[row * self.width + col]
    }

    /// Binary PGM; label `k` maps to gray `255 (k + 1) / (count + 1)`, and
    /// non-convergent pixels are black.
    pub fn to_pgm(&self) -> Vec<u8> {
        let count = self.critical_points.len() as i32;
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.labels.iter().map(|&l| {
            if l < 0 {
                0u8
            } else {
                (255 * (l + 1) / (count + 1)) as u8
            }
        }));
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for row in self.labels.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|l| l.to_string()).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }
}

/// Index of the critical point that the iteration from `z0` reaches within
/// `1e-8`, or [`NO_CONVERGENCE`].
pub fn basin_label(p: &UnivariatePolynomial, crit: &[Complex64], z0: Complex64, method: Method, max_iter: usize) -> i32 {
    let near = |z: Complex64| crit.iter().position(|c| (z - c).norm() <= 1e-8);
    let mut z = z0;
    for _ in 0..=max_iter {
        if let Some(k) = near(z) {
            return k as i32;
        }
        let d = p.derivs(z);
        let step = match method {
            Method::Classical => classical_step(z, &d),
            Method::ThirdMin => third_order_step(z, &d, true, 1e-12),
            _ => third_order_step(z, &d, false, 1e-12),
        };
        match step {
            Ok(s) if s.next.re.is_finite() && s.next.im.is_finite() => z = s.next,
            _ => return NO_CONVERGENCE,
        }
    }
    NO_CONVERGENCE
}

/// Basin labels over `width x height` pixel centers of `region`.
pub fn fractal_grid(
    p: &UnivariatePolynomial,
    region: &Region,
    width: usize,
    height: usize,
    method: Method,
    max_iter: usize,
) -> Result<FractalGrid> {
    if method == Method::MultivariateThird {
        return Err(Error::InvalidInput("basins use a univariate method".into()));
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidInput("resolution must be positive".into()));
    }
    if p.degree() < 2 {
        return Err(Error::InvalidInput("need a polynomial of degree at least 2".into()));
    }
    let crit = p.critical_points();
    let dx = (region.re_max - region.re_min) / width as f64;
    let dy = (region.im_max - region.im_min) / height as f64;
    let labels = (0..width * height)
        .into_par_iter()
        .map(|k| {
            let (row, col) = (k / width, k % width);
            let z = Complex64::new(
                region.re_min + (col as f64 + 0.5) * dx,
                region.im_max - (row as f64 + 0.5) * dy,
            );
            basin_label(p, &crit, z, method, max_iter)
        })
        .collect();
    Ok(FractalGrid {
        width,
        height,
        critical_points: crit.iter().map(|c| [c.re, c.im]).collect(),
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quintic() -> UnivariatePolynomial {
        UnivariatePolynomial::parse("x^5-5x").unwrap()
    }

    #[test]
    fn classical_examples() {
        let sq = ScalarC3Function::parse("x^2").unwrap();
        assert_eq!(step_classical(&sq, 5.0).unwrap(), 0.0);
        let c = ScalarC3Function::parse("x^3 - 6x").unwrap();
        assert_eq!(step_classical(&c, 2.0).unwrap(), 1.5);
        let x1 = step_classical(&ScalarC3Function::arctan_test(), 1.5).unwrap();
        assert!((x1 + 1.2786).abs() < 1e-4, "{x1}");
        let flat = ScalarC3Function::parse("x").unwrap();
        assert!(matches!(step_classical(&flat, 1.0), Err(Error::StepFailed(_))));
    }

    #[test]
    fn third_order_examples() {
        let o = NewtonOptions::default();
        let c = ScalarC3Function::parse("x^3 - 6x").unwrap();
        assert!((step_third_min(&c, 2.0, &o).unwrap().next - 2f64.sqrt()).abs() < 1e-14);
        assert!((step_third_max(&c, 2.0, &o).unwrap().next + 2f64.sqrt()).abs() < 1e-14);
        let sq = ScalarC3Function::parse("x^2").unwrap();
        let s = step_third_min(&sq, 3.0, &o).unwrap();
        assert!(s.fallback && s.next == 0.0);
        assert_eq!(step_third_max(&sq, 3.0, &o).unwrap().next, 0.0);
        let neg = ScalarC3Function::parse("-x^2").unwrap();
        assert_eq!(step_third_max(&neg, 3.0, &o).unwrap().next, 0.0);
        let x1 = step_third_min(&ScalarC3Function::arctan_test(), 1.5, &o).unwrap().next;
        assert!((x1 + 0.2327).abs() < 1e-4, "{x1}");
        // x^3 + x has no real critical point
        let mono = ScalarC3Function::parse("x^3 + x").unwrap();
        assert!(matches!(step_third_min(&mono, 1.0, &o), Err(Error::StepFailed(_))));
    }

    #[test]
    fn traces() {
        let f = ScalarC3Function::arctan_test();
        let o = NewtonOptions {
            max_iter: 4,
            ..NewtonOptions::default()
        };
        let t = run(&f, 1.5, Method::Classical, &o).unwrap();
        assert_eq!(t.iterates.len(), 5);
        assert_eq!(t.termination, Termination::MaxIter);
        let want = [19.9473, 15.1411, 7.7329, 1.2477, 0.0058];
        for (v, w) in t.values.iter().zip(want) {
            assert!((v - w).abs() < 1e-4, "{v} vs {w}");
        }
        let t = run(&f, 1.5, Method::ThirdMin, &NewtonOptions::default()).unwrap();
        assert_eq!(t.termination, Termination::Converged);
        assert!(t.values[1] > 0.5909 && t.values[1] < 0.5911);
        assert!(t.values[3] <= 1e-8);
        let t = run(&f, 1.72, Method::Classical, &NewtonOptions::default()).unwrap();
        assert_eq!(t.termination, Termination::MaxIter);
        assert!((t.last()[0].abs() - 13.4942).abs() < 1e-3, "{:?}", t.last());
        let t = run(&f, 1.7121, Method::Classical, &NewtonOptions::default()).unwrap();
        assert_eq!(t.termination, Termination::Converged);
    }

    #[test]
    fn derivative_check() {
        let pts = [-3.0, -0.4, 0.0, 0.9, 2.5];
        ScalarC3Function::arctan_test().check_derivatives(&pts, 1e-6).unwrap();
        let wrong = ScalarC3Function::new("wrong", |x| [x * x, 2.0 * x, 3.0, 0.0]);
        assert!(wrong.check_derivatives(&pts, 1e-6).is_err());
    }

    #[test]
    fn polynomial_parsing() {
        let p = quintic();
        assert_eq!(p.degree(), 5);
        assert_eq!(p.to_string(), "x^5-5x");
        let q = UnivariatePolynomial::parse("2.5*x^3 + x - 1e-3").unwrap();
        assert_eq!(q.coeffs[0].re, -1e-3);
        assert_eq!(q.coeffs[3].re, 2.5);
        assert!(UnivariatePolynomial::parse("x^").is_err());
        assert!(UnivariatePolynomial::parse("y^2").is_err());
    }

    #[test]
    fn quintic_critical_points() {
        let c = quintic().critical_points();
        let want = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (z, w) in c.iter().zip(want) {
            assert!((z.re - w.0).abs() < 1e-12 && (z.im - w.1).abs() < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn multivariate_examples() {
        let search = SearchOptions::default();
        let norm = MultiC3Function::new("norm", 2, |x| TaylorData {
            value: x[0] * x[0] + x[1] * x[1],
            gradient: DVector::from_vec(vec![2.0 * x[0], 2.0 * x[1]]),
            hessian: DMatrix::identity(2, 2) * 2.0,
            tensor: vec![DMatrix::zeros(2, 2); 2],
        });
        let x = step_multivariate_third(&norm, &[3.0, -4.0], &search).unwrap();
        assert!(x[0].abs() < 1e-6 && x[1].abs() < 1e-6, "{x:?}");

        let sep = MultiC3Function::separable(&ScalarC3Function::arctan_test(), 2);
        let x = step_multivariate_third(&sep, &[1.5, 1.5], &search).unwrap();
        assert!((x[0] + 0.2327).abs() < 1e-3 && (x[1] + 0.2327).abs() < 1e-3, "{x:?}");
    }
}
