//! Point classification for cubic polynomials: critical, second-order, local
//! minimum (via the third-order condition) and strict local minimum, with a
//! validated descent certificate whenever local minimality fails.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::coeff::{rational_from_f64, Coeff};
use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{CubicPolynomial, RationalCubic};
use crate::sparse::SparsePolynomial;

/// Float-mode thresholds. `grad` and `toc` are scaled by the coefficient size
/// of `p` (and `grad` also by `max(1, |x|_inf)^2`); `psd`, `pd` and `null` are
/// relative to `max(1, ||hessian||)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloatTolerances {
    pub grad: f64,
    pub psd: f64,
    pub pd: f64,
    pub null: f64,
    pub toc: f64,
}

impl Default for FloatTolerances {
    fn default() -> Self {
        Self {
            grad: 1e-8,
            psd: 1e-8,
            pd: 1e-8,
            null: 1e-8,
            toc: 1e-8,
        }
    }
}

impl FloatTolerances {
    /// Looser thresholds for points recovered from an interior-point solve.
    pub fn sdp_recovery() -> Self {
        Self {
            grad: 1e-5,
            psd: 1e-6,
            pd: 1e-6,
            null: 1e-5,
            toc: 1e-5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum TolerancePolicy {
    Exact,
    Float(FloatTolerances),
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy::Float(FloatTolerances::default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    DescentDirection,
    DescentParabola,
}

/// The curve `base + t * direction + parabola_ratio * t^2 * parabola_axis`,
/// along which `p` is strictly below `p(base)` for sampled `t` in `(0, validity_step]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentCertificate {
    pub kind: CertificateKind,
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
    pub parabola_axis: Vec<f64>,
    pub parabola_ratio: f64,
    pub validity_step: f64,
}

impl DescentCertificate {
    pub fn point(&self, t: f64) -> Vec<f64> {
        let rt2 = self.parabola_ratio * t * t;
        self.base
            .iter()
            .zip(&self.direction)
            .zip(&self.parabola_axis)
            .map(|((x, d), z)| x + t * d + rt2 * z)
            .collect()
    }
}

/// A nonzero coefficient of `g(lambda) = grad p3(sum_a lambda_a v_a)`: entry
/// `entry` of `g`, monomial `lambda_a * lambda_b` (`a <= b`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TocCoefficient<T: Coeff = f64> {
    pub entry: usize,
    pub a: usize,
    pub b: usize,
    pub value: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TocViolation {
    /// Null-space vector with `grad p3(d) != 0`.
    pub d: Vec<f64>,
    pub grad_p3: Vec<f64>,
    pub coefficient: TocCoefficient<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub mode: String,
    pub is_critical: bool,
    pub is_second_order: bool,
    pub is_local_min: bool,
    pub is_strict_local_min: bool,
    pub gradient_norm: f64,
    pub min_hessian_eigenvalue: f64,
    pub nullspace_basis: Vec<Vec<f64>>,
    pub toc_violation: Option<TocViolation>,
    pub certificate: Option<DescentCertificate>,
}

/// Checks every coefficient of `g(lambda) = grad p3(sum_a lambda_a v_a)`.
/// The `lambda_a^2` coefficient of entry `m` is `1/2 v_a^T H_m v_a`, the
/// `lambda_a lambda_b` one (`a < b`) is `v_a^T H_m v_b`. Returns the first
/// coefficient that is not negligible, or `None` when the condition holds.
pub fn toc_holds<T: Coeff>(
    p: &CubicPolynomial<T>,
    basis: &[DVector<T>],
    tol: f64,
) -> Result<Option<TocCoefficient<T>>> {
    for v in basis {
        if v.len() != p.n() {
            return Err(Error::DimensionMismatch {
                expected: p.n(),
                got: v.len(),
            });
        }
    }
    let half = T::one() / (T::one() + T::one());
    for (m, hm) in p.h().iter().enumerate() {
        let hv: Vec<DVector<T>> = basis.iter().map(|v| mat_vec(hm, v)).collect();
        for a in 0..basis.len() {
            for b in a..basis.len() {
                let mut value = dot(&basis[a], &hv[b]);
                if a == b {
                    value = value * half.clone();
                }
                if !value.is_negligible(tol) {
                    return Ok(Some(TocCoefficient {
                        entry: m,
                        a,
                        b,
                        value,
                    }));
                }
            }
        }
    }
    Ok(None)
}

fn mat_vec<T: Coeff>(m: &DMatrix<T>, v: &DVector<T>) -> DVector<T> {
    DVector::from_iterator(
        m.nrows(),
        (0..m.nrows()).map(|r| {
            (0..m.ncols()).fold(T::zero(), |acc, c| acc + m[(r, c)].clone() * v[c].clone())
        }),
    )
}

fn dot<T: Coeff>(a: &DVector<T>, b: &DVector<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Candidate null-space directions: the sum of all basis vectors, each vector,
/// pairwise sums and differences, then triple sums.
fn candidates<T: Coeff>(basis: &[DVector<T>]) -> Vec<DVector<T>> {
    let k = basis.len();
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    let sum = |idx: &[(usize, bool)]| {
        let mut v = DVector::from_element(basis[0].len(), T::zero());
        for &(i, neg) in idx {
            for (dst, src) in v.iter_mut().zip(basis[i].iter()) {
                *dst = if neg {
                    dst.clone() - src.clone()
                } else {
                    dst.clone() + src.clone()
                };
            }
        }
        v
    };
    out.push(sum(&(0..k).map(|i| (i, false)).collect::<Vec<_>>()));
    for a in 0..k {
        out.push(basis[a].clone());
    }
    for a in 0..k {
        for b in a + 1..k {
            out.push(sum(&[(a, false), (b, false)]));
            out.push(sum(&[(a, false), (b, true)]));
        }
    }
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                out.push(sum(&[(a, false), (b, false), (c, false)]));
            }
        }
    }
    out
}

/// Null-space vector `d` with `grad p3(d)` not negligible.
fn toc_witness<T: Coeff>(p: &CubicPolynomial<T>, basis: &[DVector<T>], tol: f64) -> Option<(DVector<T>, DVector<T>)> {
    candidates(basis).into_iter().find_map(|d| {
        let g = p.cubic_part_grad(d.as_slice()).ok()?;
        g.iter().any(|v| !v.is_negligible(tol)).then_some((d, g))
    })
}

/// Null-space vector `d` with `p3(d)` not negligible.
fn tonc_witness<T: Coeff>(p: &CubicPolynomial<T>, basis: &[DVector<T>], tol: f64) -> Option<DVector<T>> {
    candidates(basis).into_iter().find(|d| {
        p.cubic_part_eval(d.as_slice())
            .map(|v| !v.is_negligible(tol))
            .unwrap_or(false)
    })
}

/// Largest `t` in `{1, 1/2, 1/4, ...}` such that `drop(s) < 0` at every sample
/// `s = t*k/16` and `s = t/2^j`.
fn validity_step(drop: impl Fn(f64) -> f64) -> Option<f64> {
    let mut t = 1.0_f64;
    for _ in 0..60 {
        let ok = (1..=16)
            .map(|k| t * k as f64 / 16.0)
            .chain((1..=8).map(|j| t / 2f64.powi(j)))
            .all(|s| drop(s) < 0.0);
        if ok {
            return Some(t);
        }
        t *= 0.5;
    }
    None
}

fn build_certificate(
    p: &CubicPolynomial,
    x: &[f64],
    kind: CertificateKind,
    direction: DVector<f64>,
    axis: DVector<f64>,
    ratio: f64,
) -> Result<Option<DescentCertificate>> {
    // Values relative to p(x) without the constant term's rounding.
    let local = p.shifted(x)?.with_constant(0.0);
    let mut cert = DescentCertificate {
        kind,
        base: x.to_vec(),
        direction: direction.as_slice().to_vec(),
        parabola_axis: axis.as_slice().to_vec(),
        parabola_ratio: ratio,
        validity_step: 0.0,
    };
    let offset = |t: f64| -> Vec<f64> {
        (0..x.len())
            .map(|i| t * direction[i] + ratio * t * t * axis[i])
            .collect()
    };
    let drop = |t: f64| local.eval(&offset(t)).unwrap_or(f64::NAN);
    Ok(validity_step(drop).map(|t| {
        cert.validity_step = t;
        cert
    }))
}

fn normalized(v: DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        v
    }
}

/// Straight line `x + t d` with `d = sign(-p3(d0)) d0 / |d0|`, valid when `d0`
/// lies in the Hessian null space of a critical point and `p3(d0) != 0`.
fn tonc_line(p: &CubicPolynomial, x: &[f64], d0: DVector<f64>) -> Result<Option<DescentCertificate>> {
    let d = normalized(d0);
    let s = if p.cubic_part_eval(d.as_slice())? > 0.0 { -1.0 } else { 1.0 };
    let n = x.len();
    build_certificate(p, x, CertificateKind::DescentDirection, d * s, DVector::zeros(n), 0.0)
}

/// The parabola `x + t d + r t^2 z` with `z = -grad p3(d)/|grad p3(d)|` and
/// `r = |grad p3(d)| / z^T hess z` (or `r = 1` when `z^T hess z = 0`), for a
/// unit witness `d` of the third-order condition.
fn parabola_from_witness(p: &CubicPolynomial, x: &[f64], d0: DVector<f64>) -> Result<Option<DescentCertificate>> {
    let d = normalized(d0);
    let g = p.cubic_part_grad(d.as_slice())?;
    let gn = g.norm();
    if gn == 0.0 {
        return Ok(None);
    }
    let z = -g / gn;
    let hz = p.hessian(x)? * &z;
    let curv = z.dot(&hz);
    let r = if curv > 0.0 { gn / curv } else { 1.0 };
    build_certificate(p, x, CertificateKind::DescentParabola, d, z, r)
}

/// Descent certificate for a second-order point at which the third-order
/// condition fails (float thresholds from `tol`).
pub fn descent_parabola(p: &CubicPolynomial, x: &[f64], tol: &FloatTolerances) -> Result<DescentCertificate> {
    let report = classify_float(p, x, tol)?;
    if !report.is_second_order || report.is_local_min {
        return Err(Error::Precondition(
            "descent_parabola needs a second-order point that is not a local minimum".into(),
        ));
    }
    report
        .certificate
        .ok_or_else(|| Error::Precondition("no descent curve could be validated".into()))
}

/// Basis of the null space of a symmetric matrix (orthonormal, float mode).
pub fn null_space_basis(m: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    linalg::null_space(m, tol)
}

/// Exact rational kernel basis.
pub fn null_space_basis_exact(m: &DMatrix<BigRational>) -> Vec<DVector<BigRational>> {
    linalg::kernel_exact(m)
}

pub fn classify(p: &CubicPolynomial, x: &[f64], policy: &TolerancePolicy) -> Result<PointReport> {
    match policy {
        TolerancePolicy::Float(tol) => classify_float(p, x, tol),
        TolerancePolicy::Exact => {
            let pr = RationalCubic::from_f64_exact(p)?;
            let xr = x
                .iter()
                .map(|v| rational_from_f64(*v))
                .collect::<Result<Vec<_>>>()?;
            classify_rational(&pr, &xr)
        }
    }
}

/// Rejects polynomials of degree above 3 before classifying.
pub fn classify_sparse(p: &SparsePolynomial, x: &[f64], policy: &TolerancePolicy) -> Result<PointReport> {
    classify(&p.to_cubic()?, x, policy)
}

fn to_f64_vec<T: Coeff>(v: &DVector<T>) -> Vec<f64> {
    v.iter().map(|e| e.to_f64()).collect()
}

fn check_point(n: usize, x: usize) -> Result<()> {
    if n == x {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: n, got: x })
    }
}

/// Certificate for a point that is not a local minimum; `basis`/`witness` are
/// only used at second-order points.
fn failure_certificate(
    p: &CubicPolynomial,
    x: &[f64],
    critical: bool,
    second_order: bool,
    tonc: Option<DVector<f64>>,
    witness: Option<DVector<f64>>,
) -> Result<Option<DescentCertificate>> {
    let n = x.len();
    if !critical {
        let g = p.gradient(x)?;
        return build_certificate(p, x, CertificateKind::DescentDirection, -normalized(g), DVector::zeros(n), 0.0);
    }
    if !second_order {
        let (vals, vecs) = linalg::sym_eigen(&p.hessian(x)?);
        debug_assert!(vals[0] < 0.0);
        let v = vecs.column(0).into_owned();
        let s = if p.cubic_part_eval(v.as_slice())? > 0.0 { -1.0 } else { 1.0 };
        return build_certificate(p, x, CertificateKind::DescentDirection, v * s, DVector::zeros(n), 0.0);
    }
    if let Some(d) = tonc {
        if let Some(c) = tonc_line(p, x, d)? {
            return Ok(Some(c));
        }
    }
    match witness {
        Some(d) => parabola_from_witness(p, x, d),
        None => Ok(None),
    }
}

pub fn classify_float(p: &CubicPolynomial, x: &[f64], tol: &FloatTolerances) -> Result<PointReport> {
    check_point(p.n(), x.len())?;
    let xs = x.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let scale = p.coefficient_scale();
    let g = p.gradient(x)?;
    let hess = p.hessian(x)?;
    let critical = g.amax() <= tol.grad * scale * xs * xs;
    let second_order = critical && linalg::is_psd(&hess, tol.psd);
    let strict = critical && linalg::is_pd(&hess, tol.pd);
    let basis = linalg::null_space(&hess, tol.null);
    let toc_tol = tol.toc * scale;

    let mut toc_violation = None;
    let mut tonc = None;
    let mut witness = None;
    let mut local_min = false;
    if second_order {
        match toc_holds(p, &basis, toc_tol)? {
            None => local_min = true,
            Some(coef) => {
                let (d, gd) = toc_witness(p, &basis, toc_tol)
                    .expect("a nonzero TOC coefficient has a witness among the candidates");
                tonc = tonc_witness(p, &basis, toc_tol);
                toc_violation = Some(TocViolation {
                    d: d.as_slice().to_vec(),
                    grad_p3: gd.as_slice().to_vec(),
                    coefficient: coef,
                });
                witness = Some(d);
            }
        }
    }
    let local_min = local_min || strict;
    let certificate = if local_min {
        None
    } else {
        failure_certificate(p, x, critical, second_order, tonc, witness)?
    };
    Ok(PointReport {
        mode: "float".into(),
        is_critical: critical,
        is_second_order: second_order || strict,
        is_local_min: local_min,
        is_strict_local_min: strict,
        gradient_norm: g.norm(),
        min_hessian_eigenvalue: linalg::min_eigenvalue(&hess),
        nullspace_basis: basis.iter().map(|v| v.as_slice().to_vec()).collect(),
        toc_violation,
        certificate,
    })
}

/// Bit-exact classification over the rationals: exact kernel, pivot psd test,
/// leading-minor pd test and exact third-order coefficients.
pub fn classify_rational(p: &RationalCubic, x: &[BigRational]) -> Result<PointReport> {
    check_point(p.n(), x.len())?;
    let g = p.gradient(x)?;
    let hess = p.hessian(x)?;
    let critical = g.iter().all(|v| v.is_negligible(0.0));
    let second_order = critical && linalg::is_psd_exact(&hess);
    let strict = critical && linalg::is_pd_exact(&hess);
    let basis = linalg::kernel_exact(&hess);

    let pf = p.to_f64();
    let xf: Vec<f64> = x.iter().map(|v| v.to_f64()).collect();
    let mut toc_violation = None;
    let mut tonc = None;
    let mut witness = None;
    let mut local_min = false;
    if second_order {
        match toc_holds(p, &basis, 0.0)? {
            None => local_min = true,
            Some(coef) => {
                let (d, gd) = toc_witness(p, &basis, 0.0)
                    .expect("a nonzero TOC coefficient has a witness among the candidates");
                tonc = tonc_witness(p, &basis, 0.0).map(|v| DVector::from_vec(to_f64_vec(&v)));
                toc_violation = Some(TocViolation {
                    d: to_f64_vec(&d),
                    grad_p3: to_f64_vec(&gd),
                    coefficient: TocCoefficient {
                        entry: coef.entry,
                        a: coef.a,
                        b: coef.b,
                        value: coef.value.to_f64(),
                    },
                });
                witness = Some(DVector::from_vec(to_f64_vec(&d)));
            }
        }
    }
    let certificate = if local_min {
        None
    } else {
        failure_certificate(&pf, &xf, critical, second_order, tonc, witness)?
    };
    let gf = DVector::from_vec(to_f64_vec(&g));
    Ok(PointReport {
        mode: "exact".into(),
        is_critical: critical,
        is_second_order: second_order,
        is_local_min: local_min,
        is_strict_local_min: strict,
        gradient_norm: gf.norm(),
        min_hessian_eigenvalue: linalg::min_eigenvalue(&hess.map(|v| v.to_f64())),
        nullspace_basis: basis.iter().map(to_f64_vec).collect(),
        toc_violation,
        certificate,
    })
}
