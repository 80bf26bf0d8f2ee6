use log::{debug, warn};
use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::builders::{build_complete_sdp, CompleteSdp};
use crate::classify::{classify_float, classify_rational, FloatTolerances, PointReport};
use crate::coeff::rationalize;
use crate::error::{Error, Result};
use crate::poly::{CubicPolynomial, RationalCubic};
use crate::sdp::{solve, Entry, SdpProblem, SdpSolution, SdpStatus, Sense, SolverOptions};

/// Threshold on the optimal value of the complete SDP below which the set of
/// second-order points is treated as nonempty.
pub const EPSILON_ZERO: f64 = 1e-6;
/// Half-width of the box used when a bound solve fails numerically.
pub const FALLBACK_BOX: f64 = 1e6;
/// Relative width below which a coordinate range is treated as a single value.
pub const DEGENERATE_WIDTH: f64 = 1e-4;
/// Largest denominator used when rationalizing a point for the exact recheck.
pub const EXACT_MAX_DENOMINATOR: u64 = 1_000_000;

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub solver: SolverOptions,
    pub epsilon_zero: f64,
    /// Tolerances for the float recheck of the recovered point.
    pub tolerances: FloatTolerances,
    /// Also rationalize the point and rerun the exact classification.
    pub exact: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            epsilon_zero: EPSILON_ZERO,
            tolerances: FloatTolerances::sdp_recovery(),
            exact: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderCheck {
    pub exists: bool,
    /// The `y` part of the solution when `exists`.
    pub witness: Option<Vec<f64>>,
    /// Optimal value of the complete SDP, when it was solved to optimality.
    pub objective: Option<f64>,
    pub status: SdpStatus,
    /// Classification of the witness; `is_second_order` is the recheck.
    pub witness_report: Option<PointReport>,
    pub solves: usize,
}

fn extract_y(sdp: &CompleteSdp, sol: &SdpSolution) -> Vec<f64> {
    (0..sdp.n).map(|i| sol.value(&sdp.y(i))).collect()
}

fn solver_err(stage: &str, sol: &SdpSolution) -> Error {
    Error::Solver {
        stage: stage.to_string(),
        msg: format!("{:?} ({}) after {} iterations", sol.status, sol.solver_status, sol.iterations),
    }
}

/// Decides whether `p` has a second-order point by solving the complete SDP
/// and comparing its optimal value with `epsilon_zero`. A numerical failure
/// there is retried as the feasibility problem with the objective pinned to
/// zero.
pub fn has_second_order_point(p: &CubicPolynomial, opts: &SearchOptions) -> Result<SecondOrderCheck> {
    let sdp = build_complete_sdp(p);
    let sol = solve(&sdp.problem, &opts.solver)?;
    let mut solves = 1;
    let (exists, witness, objective, status) = match sol.status {
        SdpStatus::Infeasible => (false, None, None, sol.status),
        SdpStatus::Optimal => {
            let ok = sol.objective <= opts.epsilon_zero;
            (ok, ok.then(|| extract_y(&sdp, &sol)), Some(sol.objective), sol.status)
        }
        SdpStatus::Unbounded | SdpStatus::NumericalFailure => {
            debug!("complete SDP returned {:?}, retrying as feasibility problem", sol.status);
            let mut feas = sdp.clone();
            feas.pin_objective_zero(p);
            let fs = solve(&feas.problem, &opts.solver)?;
            solves += 1;
            match fs.status {
                SdpStatus::Optimal => (true, Some(extract_y(&feas, &fs)), None, fs.status),
                SdpStatus::Infeasible => (false, None, None, fs.status),
                _ => return Err(solver_err("second-order test", &fs)),
            }
        }
    };
    let witness_report = match &witness {
        Some(y) => Some(classify_float(p, y, &opts.tolerances)?),
        None => None,
    };
    Ok(SecondOrderCheck {
        exists,
        witness,
        objective,
        status,
        witness_report,
        solves,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateRange {
    /// `None` when unbounded above.
    pub sup: Option<f64>,
    /// `None` when unbounded below.
    pub inf: Option<f64>,
    pub value: f64,
    pub pinned: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeInterior {
    pub point: Vec<f64>,
    pub ranges: Vec<CoordinateRange>,
    pub solves: usize,
    pub warnings: Vec<String>,
}

enum Bound {
    Finite(f64),
    Infinite,
    Empty,
}

/// Adds `-r <= e <= r` through two 1x1 psd slacks.
fn with_box(prob: &SdpProblem, e: Entry, r: f64) -> SdpProblem {
    let mut b = prob.clone();
    let hi = b.add_psd_block("box_hi", 1);
    let lo = b.add_psd_block("box_lo", 1);
    let (hi, lo) = (b.mat(hi, 0, 0), b.mat(lo, 0, 0));
    b.add_equality([(e, 1.0), (hi, 1.0)], r);
    b.add_equality([(e, -1.0), (lo, 1.0)], r);
    b
}

fn bound(
    set: &SdpProblem,
    e: Entry,
    sense: Sense,
    opts: &SolverOptions,
    solves: &mut usize,
    warnings: &mut Vec<String>,
) -> Result<Bound> {
    let mut prob = set.clone();
    prob.objective.clear();
    prob.add_objective(e, 1.0);
    prob.sense = sense;
    let sol = solve(&prob, opts)?;
    *solves += 1;
    match sol.status {
        SdpStatus::Optimal => return Ok(Bound::Finite(sol.objective)),
        SdpStatus::Unbounded => return Ok(Bound::Infinite),
        SdpStatus::Infeasible => return Ok(Bound::Empty),
        SdpStatus::NumericalFailure => {}
    }
    let boxed = with_box(&prob, e, FALLBACK_BOX);
    let bs = solve(&boxed, opts)?;
    *solves += 1;
    let what = match sense {
        Sense::Max => "sup",
        Sense::Min => "inf",
    };
    match bs.status {
        SdpStatus::Optimal if bs.objective.abs() < 0.99 * FALLBACK_BOX => {
            warnings.push(format!(
                "{what} of block {} entry ({}, {}) failed numerically; used the value {} from the box +-{FALLBACK_BOX:e}",
                e.block, e.i, e.j, bs.objective
            ));
            Ok(Bound::Finite(bs.objective))
        }
        SdpStatus::Infeasible => Ok(Bound::Empty),
        _ => {
            warnings.push(format!(
                "{what} of block {} entry ({}, {}) failed numerically, also within the box +-{FALLBACK_BOX:e}; treated as unbounded",
                e.block, e.i, e.j
            ));
            Ok(Bound::Infinite)
        }
    }
}

/// Computes a point in the relative interior of the projection of the
/// feasible set of `set` onto `coords`: for each coordinate in turn its sup
/// and inf are computed over the current set, the coordinate is fixed to an
/// intermediate value (midpoint; finite bound moved by one toward the
/// interior; or zero) and the next coordinate is processed. Coordinates whose
/// range is numerically a single value are reported but not fixed. Returns
/// `None` when the set is empty.
pub fn relative_interior_point(
    set: &SdpProblem,
    coords: &[Entry],
    opts: &SolverOptions,
) -> Result<Option<RelativeInterior>> {
    let mut cur = set.clone();
    cur.objective.clear();
    let mut solves = 0;
    let mut warnings = Vec::new();
    let mut ranges: Vec<CoordinateRange> = Vec::with_capacity(coords.len());
    for (k, &e) in coords.iter().enumerate() {
        let sup = bound(&cur, e, Sense::Max, opts, &mut solves, &mut warnings)?;
        let inf = bound(&cur, e, Sense::Min, opts, &mut solves, &mut warnings)?;
        let (sup, inf) = match (sup, inf) {
            (Bound::Empty, _) | (_, Bound::Empty) if k == 0 => return Ok(None),
            (Bound::Empty, _) | (_, Bound::Empty) => {
                warnings.push(format!(
                    "coordinate {k} became infeasible after fixing earlier coordinates; remaining coordinates left free"
                ));
                break;
            }
            (s, i) => (
                match s {
                    Bound::Finite(v) => Some(v),
                    _ => None,
                },
                match i {
                    Bound::Finite(v) => Some(v),
                    _ => None,
                },
            ),
        };
        let (value, pinned) = match (sup, inf) {
            (Some(s), Some(i)) => {
                let (s, i) = if s < i { (i, s) } else { (s, i) };
                let width = s - i;
                (0.5 * (s + i), width > DEGENERATE_WIDTH * s.abs().max(i.abs()).max(1.0))
            }
            (Some(s), None) => (s - 1.0, true),
            (None, Some(i)) => (i + 1.0, true),
            (None, None) => (0.0, true),
        };
        if pinned {
            cur.add_equality([(e, 1.0)], value);
        }
        ranges.push(CoordinateRange {
            sup,
            inf,
            value,
            pinned,
        });
    }
    if ranges.len() < coords.len() {
        // Fill the remaining coordinates from any feasible point of the
        // current set, dropping the last pin if that set is empty.
        let mut sol = solve(&cur, opts)?;
        solves += 1;
        if !sol.is_optimal() {
            if let Some(r) = ranges.iter_mut().rev().find(|r| r.pinned) {
                r.pinned = false;
            }
            cur.equalities.pop();
            sol = solve(&cur, opts)?;
            solves += 1;
        }
        if !sol.is_optimal() {
            return Err(Error::Solver {
                stage: "relative interior".into(),
                msg: format!("no feasible point after fixing coordinates: {:?}", sol.status),
            });
        }
        for &e in &coords[ranges.len()..] {
            let v = sol.value(&e);
            ranges.push(CoordinateRange {
                sup: None,
                inf: None,
                value: v,
                pinned: false,
            });
        }
    }
    Ok(Some(RelativeInterior {
        point: ranges.iter().map(|r| r.value).collect(),
        ranges,
        solves,
        warnings,
    }))
}

/// Pseudo-inverse Newton steps on the gradient, kept while the gradient
/// norm decreases and the total move stays below `1e-3`.
pub fn polish_critical_point(p: &CubicPolynomial, x: &[f64]) -> Result<Vec<f64>> {
    let x0 = DVector::from_column_slice(x);
    let mut cur = x0.clone();
    let mut g = p.gradient(cur.as_slice())?;
    for _ in 0..8 {
        let gn = g.norm();
        if gn == 0.0 {
            break;
        }
        let h = p.hessian(cur.as_slice())?;
        let eps = 1e-9 * h.norm().max(1.0);
        let Ok(hp) = h.pseudo_inverse(eps) else { break };
        let cand = &cur - hp * &g;
        if (&cand - &x0).amax() > 1e-3 {
            break;
        }
        let cg = p.gradient(cand.as_slice())?;
        if cg.norm() >= gn {
            break;
        }
        cur = cand;
        g = cg;
    }
    Ok(cur.as_slice().to_vec())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    LocalMinFound,
    StrictLocalMinFound,
    NoLocalMinimum,
    /// A local minimum exists but the recovered point has a singular Hessian.
    NoStrictLocalMinimum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Test1Infeasible,
    Test2Failed,
    Success,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalMinResult {
    pub verdict: Verdict,
    pub point: Option<Vec<f64>>,
    pub stage: Stage,
    /// Optimal value of the complete SDP when it was solved to optimality.
    pub sdp_objective: Option<f64>,
    pub report: Option<PointReport>,
    /// Exact classification of the rationalized point, when requested.
    pub exact_report: Option<PointReport>,
    pub exact_point: Option<Vec<String>>,
    /// `2/3` of the complete SDP value: bound on `p(x*) - inf p` over the
    /// critical points.
    pub epsilon_bound: Option<f64>,
    pub solves: usize,
    pub warnings: Vec<String>,
}

fn search(p: &CubicPolynomial, opts: &SearchOptions, strict: bool) -> Result<LocalMinResult> {
    let check = has_second_order_point(p, opts)?;
    let mut solves = check.solves;
    let mut warnings = Vec::new();
    let epsilon_bound = check.objective.map(|v| 2.0 / 3.0 * v);
    if !check.exists {
        return Ok(LocalMinResult {
            verdict: Verdict::NoLocalMinimum,
            point: None,
            stage: Stage::Test1Infeasible,
            sdp_objective: check.objective,
            report: None,
            exact_report: None,
            exact_point: None,
            epsilon_bound,
            solves,
            warnings,
        });
    }
    let mut face = build_complete_sdp(p);
    face.pin_objective_zero(p);
    let coords: Vec<Entry> = (0..face.n).map(|i| face.y(i)).collect();
    let raw = match relative_interior_point(&face.problem, &coords, &opts.solver)? {
        Some(ri) => {
            solves += ri.solves;
            warnings.extend(ri.warnings);
            ri.point
        }
        None => {
            let msg = "second-order face is numerically empty; using the complete SDP solution";
            warn!("{msg}");
            warnings.push(msg.into());
            check.witness.clone().expect("witness when second-order points exist")
        }
    };
    let x = polish_critical_point(p, &raw)?;
    let report = classify_float(p, &x, &opts.tolerances)?;
    let (exact_report, exact_point) = if opts.exact {
        let xr: Vec<BigRational> = x
            .iter()
            .map(|v| rationalize(*v, EXACT_MAX_DENOMINATOR))
            .collect::<Result<_>>()?;
        let pr = RationalCubic::from_f64_exact(p)?;
        let rep = classify_rational(&pr, &xr)?;
        if !rep.is_critical {
            let msg = "the rationalized point is not critical in exact arithmetic; the minimizer may be irrational";
            warn!("{msg}");
            warnings.push(msg.into());
        }
        (Some(rep), Some(xr.iter().map(|r| r.to_string()).collect()))
    } else {
        (None, None)
    };
    let (verdict, stage) = match (report.is_local_min, strict, report.is_strict_local_min) {
        (false, _, _) => (Verdict::NoLocalMinimum, Stage::Test2Failed),
        (true, false, _) => (Verdict::LocalMinFound, Stage::Success),
        (true, true, true) => (Verdict::StrictLocalMinFound, Stage::Success),
        (true, true, false) => (Verdict::NoStrictLocalMinimum, Stage::Test2Failed),
    };
    Ok(LocalMinResult {
        verdict,
        point: Some(x),
        stage,
        sdp_objective: check.objective,
        report: Some(report),
        exact_report,
        exact_point,
        epsilon_bound,
        solves,
        warnings,
    })
}

/// Searches for a local minimum: second-order test, relative-interior
/// recovery on the second-order face, then a third-order recheck.
pub fn find_local_minimum(p: &CubicPolynomial, opts: &SearchOptions) -> Result<LocalMinResult> {
    search(p, opts, false)
}

/// As [`find_local_minimum`], accepting the point only if the Hessian there
/// is positive definite.
pub fn find_strict_local_minimum(p: &CubicPolynomial, opts: &SearchOptions) -> Result<LocalMinResult> {
    search(p, opts, true)
}

/// The matrix `[[sum y_i H_i + Q, sum Tr(H_i Y) e_i + Q y], [., z]]`.
pub fn t_matrix(p: &CubicPolynomial, big_y: &DMatrix<f64>, y: &[f64], z: f64) -> Result<DMatrix<f64>> {
    let n = p.n();
    if big_y.nrows() != n || big_y.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: big_y.nrows(),
        });
    }
    let top = p.slice_combination(y)? + p.q();
    let col = DVector::from_fn(n, |i, _| (&p.h()[i] * big_y).trace()) + p.q() * DVector::from_column_slice(y);
    let mut t = DMatrix::zeros(n + 1, n + 1);
    t.view_mut((0, 0), (n, n)).copy_from(&top);
    for i in 0..n {
        t[(i, n)] = col[i];
        t[(n, i)] = col[i];
    }
    t[(n, n)] = z;
    Ok(t)
}

fn tr_qy(p: &CubicPolynomial, big_y: &DMatrix<f64>) -> f64 {
    (p.q() * big_y).trace()
}

/// `1/2 Tr(QY) + b^T y + z/2`.
pub fn complete_value(p: &CubicPolynomial, big_y: &DMatrix<f64>, y: &[f64], z: f64) -> f64 {
    0.5 * tr_qy(p, big_y) + p.b().iter().zip(y).map(|(b, y)| b * y).sum::<f64>() + 0.5 * z
}

/// `1/6 Tr(QY) + z/3`.
pub fn intermediate_value(p: &CubicPolynomial, big_y: &DMatrix<f64>, z: f64) -> f64 {
    tr_qy(p, big_y) / 6.0 + z / 3.0
}

/// Dual objective at `(S, s, lambda, rho) = (Y, y, y, z)`:
/// `-b^T y - z/6 - 1/3 Tr(QY)`.
pub fn dual_value(p: &CubicPolynomial, big_y: &DMatrix<f64>, y: &[f64], z: f64) -> f64 {
    -p.b().iter().zip(y).map(|(b, y)| b * y).sum::<f64>() - z / 6.0 - tr_qy(p, big_y) / 3.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleResiduals {
    /// `max_i |1/2 Tr(H_i Y) + (Q y)_i + b_i| / (1 + |b_i|)`.
    pub equality: f64,
    /// Smallest eigenvalue of `T`, relative to `max(1, ||T||)`.
    pub t_min_eigenvalue: f64,
    /// Smallest eigenvalue of `[[Y, y], [y^T, 1]]`, relative to its norm.
    pub m_min_eigenvalue: f64,
}

impl TripleResiduals {
    pub fn feasible(&self, tol: f64) -> bool {
        self.equality <= tol && self.t_min_eigenvalue >= -tol && self.m_min_eigenvalue >= -tol
    }
}

pub fn triple_residuals(p: &CubicPolynomial, big_y: &DMatrix<f64>, y: &[f64], z: f64) -> Result<TripleResiduals> {
    let n = p.n();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let t = t_matrix(p, big_y, y, z)?;
    let qy = p.q() * DVector::from_column_slice(y);
    let equality = (0..n)
        .map(|i| {
            let r = 0.5 * (&p.h()[i] * big_y).trace() + qy[i] + p.b()[i];
            r.abs() / (1.0 + p.b()[i].abs())
        })
        .fold(0.0, f64::max);
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(big_y);
    for i in 0..n {
        m[(i, n)] = y[i];
        m[(n, i)] = y[i];
    }
    m[(n, n)] = 1.0;
    let rel = |a: &DMatrix<f64>| crate::linalg::min_eigenvalue(a) / crate::linalg::spectral_norm(a).max(1.0);
    Ok(TripleResiduals {
        equality,
        t_min_eigenvalue: rel(&t),
        m_min_eigenvalue: rel(&m),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonCertificate {
    /// Value of the complete SDP objective at the triple.
    pub epsilon: f64,
    /// `2/3 epsilon`: `p(y) <= p(x) + bound` for every critical point `x`.
    pub bound: f64,
    pub residuals: TripleResiduals,
}

/// Certifies `p(y) <= inf over critical points + 2/3 eps` for a triple that
/// is feasible for the complete SDP within `tol`.
pub fn epsilon_certificate(
    p: &CubicPolynomial,
    big_y: &DMatrix<f64>,
    y: &[f64],
    z: f64,
    tol: f64,
) -> Result<EpsilonCertificate> {
    let residuals = triple_residuals(p, big_y, y, z)?;
    if !residuals.feasible(tol) {
        return Err(Error::Precondition(format!(
            "triple is not feasible within {tol:e}: equality residual {:e}, min eig(T) {:e}, min eig(M) {:e}",
            residuals.equality, residuals.t_min_eigenvalue, residuals.m_min_eigenvalue
        )));
    }
    let epsilon = complete_value(p, big_y, y, z);
    Ok(EpsilonCertificate {
        epsilon,
        bound: 2.0 / 3.0 * epsilon,
        residuals,
    })
}

/// The `(Y, y, z)` part of a solution of the complete SDP.
pub fn extract_triple(sdp: &CompleteSdp, sol: &SdpSolution) -> (DMatrix<f64>, Vec<f64>, f64) {
    let n = sdp.n;
    let big_y = DMatrix::from_fn(n, n, |i, j| sol.value(&sdp.big_y(i.min(j), i.max(j))));
    (big_y, extract_y(sdp, sol), sol.value(&sdp.z()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::MonomialMap;

    fn poly(n: usize, terms: &[(&[u32], f64)]) -> CubicPolynomial {
        let map: MonomialMap<f64> = terms.iter().map(|(e, c)| (e.to_vec(), *c)).collect();
        CubicPolynomial::from_monomials(n, &map).unwrap()
    }

    fn cubic_6x() -> CubicPolynomial {
        poly(1, &[(&[3], 1.0), (&[1], -6.0)])
    }

    #[test]
    fn interval_and_point() {
        // 0 <= y1 <= 1, y2 = 0
        let mut prob = SdpProblem::new(Sense::Min);
        let y = prob.add_free_block("y", 2);
        let s = prob.add_psd_block("s", 1);
        let t = prob.add_psd_block("t", 1);
        let (y1, y2) = (prob.vec(y, 0), prob.vec(y, 1));
        let (s, t) = (prob.mat(s, 0, 0), prob.mat(t, 0, 0));
        prob.add_equality([(y1, 1.0), (s, -1.0)], 0.0);
        prob.add_equality([(y1, 1.0), (t, 1.0)], 1.0);
        prob.add_equality([(y2, 1.0)], 0.0);
        let ri = relative_interior_point(&prob, &[y1, y2], &SolverOptions::default())
            .unwrap()
            .unwrap();
        assert!((ri.point[0] - 0.5).abs() < 1e-6, "{:?}", ri);
        assert!(ri.point[1].abs() < 1e-6);
        assert_eq!(ri.solves, 4);
        assert!(ri.ranges[0].pinned && !ri.ranges[1].pinned);
    }

    #[test]
    fn free_coordinate_goes_to_zero() {
        let mut prob = SdpProblem::new(Sense::Min);
        let y = prob.add_free_block("y", 2);
        let (y1, y2) = (prob.vec(y, 0), prob.vec(y, 1));
        prob.add_equality([(y2, 1.0)], 3.0);
        let ri = relative_interior_point(&prob, &[y1, y2], &SolverOptions::default())
            .unwrap()
            .unwrap();
        assert_eq!(ri.ranges[0].sup, None);
        assert_eq!(ri.ranges[0].inf, None);
        assert_eq!(ri.point[0], 0.0);
        assert!((ri.point[1] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn half_line_moves_inside() {
        let mut prob = SdpProblem::new(Sense::Min);
        let y = prob.add_free_block("y", 1);
        let s = prob.add_psd_block("s", 1);
        let (y1, s) = (prob.vec(y, 0), prob.mat(s, 0, 0));
        prob.add_equality([(y1, 1.0), (s, -1.0)], 2.0);
        let ri = relative_interior_point(&prob, &[y1], &SolverOptions::default())
            .unwrap()
            .unwrap();
        assert_eq!(ri.ranges[0].sup, None);
        assert!((ri.point[0] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn empty_set() {
        let mut prob = SdpProblem::new(Sense::Min);
        let s = prob.add_psd_block("s", 1);
        let s = prob.mat(s, 0, 0);
        prob.add_equality([(s, 1.0)], -1.0);
        assert!(relative_interior_point(&prob, &[s], &SolverOptions::default())
            .unwrap()
            .is_none());
    }

    #[test]
    fn second_order_test() {
        let opts = SearchOptions::default();
        let ex32 = poly(2, &[(&[0, 2], 1.0), (&[2, 1], -1.0)]);
        let c = has_second_order_point(&ex32, &opts).unwrap();
        assert!(c.exists);
        let w = c.witness.unwrap();
        assert!(w[0].abs() < 1e-3 && w[1].abs() < 1e-3, "{w:?}");
        assert!(c.witness_report.unwrap().is_second_order);

        let lin = poly(1, &[(&[1], 1.0)]);
        assert!(!has_second_order_point(&lin, &opts).unwrap().exists);

        let ex31 = poly(2, &[(&[2, 1], 1.0)]);
        let c = has_second_order_point(&ex31, &opts).unwrap();
        let w = c.witness.unwrap();
        assert!(w[0].abs() < 1e-3 && w[1] > -1e-6, "{w:?}");
    }

    #[test]
    fn strict_min_of_cubic() {
        let r = find_strict_local_minimum(&cubic_6x(), &SearchOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::StrictLocalMinFound);
        assert!((r.point.unwrap()[0] - 2f64.sqrt()).abs() <= 1e-5);
    }

    #[test]
    fn no_local_min_at_degenerate_saddle() {
        let p = poly(2, &[(&[0, 2], 1.0), (&[2, 1], -1.0)]);
        let r = find_local_minimum(&p, &SearchOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::NoLocalMinimum);
        assert_eq!(r.stage, Stage::Test2Failed);
        let x = r.point.unwrap();
        assert!(x[0].abs() < 1e-3 && x[1].abs() < 1e-3);
    }

    #[test]
    fn exact_recheck_reports_rational_point() {
        let opts = SearchOptions {
            exact: true,
            ..SearchOptions::default()
        };
        let p = poly(1, &[(&[3], 1.0), (&[1], -3.0)]);
        let r = find_local_minimum(&p, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::LocalMinFound);
        assert_eq!(r.exact_point.unwrap(), vec!["1".to_string()]);
        assert!(r.exact_report.unwrap().is_local_min);
    }

    #[test]
    fn epsilon_at_optimal_and_perturbed_triples() {
        let p = cubic_6x();
        let r2 = 2f64.sqrt();
        let opt = DMatrix::from_element(1, 1, 2.0);
        let c = epsilon_certificate(&p, &opt, &[r2], 12.0 * r2, 1e-9).unwrap();
        assert!(c.epsilon.abs() < 1e-12 && c.bound.abs() < 1e-12);

        let y = r2 - 0.01;
        let c = epsilon_certificate(&p, &opt, &[y], 24.0 / y, 1e-9).unwrap();
        assert!(c.epsilon > 0.0);
        for x in [r2, -r2] {
            assert!(p.eval(&[y]).unwrap() <= p.eval(&[x]).unwrap() + c.bound + 1e-12);
        }
        assert!(epsilon_certificate(&p, &opt, &[y], 1.0, 1e-9).is_err());
        assert!(epsilon_certificate(&p, &DMatrix::from_element(1, 1, 3.0), &[y], 30.0, 1e-9).is_err());
    }

    #[test]
    fn complete_value_is_the_duality_gap() {
        let p = poly(2, &[(&[3, 0], 1.0), (&[1, 2], 2.0), (&[2, 0], -1.0), (&[0, 1], 0.5)]);
        let y = [0.3, -0.7];
        let big_y = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.9]);
        let z = 2.5;
        let gap = intermediate_value(&p, &big_y, z) - dual_value(&p, &big_y, &y, z);
        assert!((gap - complete_value(&p, &big_y, &y, z)).abs() < 1e-12);
    }
}
