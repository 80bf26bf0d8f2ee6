use std::collections::BTreeMap;

use crate::poly::CubicPolynomial;
use crate::sdp::{Entry, LinearForm, SdpProblem, Sense};

/// Objective used with the shared `(Y, y, z)` constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompleteObjective {
    /// `1/2 Tr(QY) + b^T y + z/2`, nonnegative on the feasible set.
    Complete,
    /// `1/6 Tr(QY) + z/3`.
    Intermediate,
}

/// The SDP over `(Y, y, z)` with constraints
/// `1/2 Tr(H_i Y) + e_i^T Q y + b_i = 0`, `T(Y, y, z) >= 0` and
/// `[[Y, y], [y^T, 1]] >= 0`.
///
/// `T` is its own psd block (`t_block`), tied to `M = [[Y, y], [y^T, 1]]`
/// (`m_block`) by linear equalities; `z` is the corner of `T`.
#[derive(Clone, Debug)]
pub struct CompleteSdp {
    pub problem: SdpProblem,
    pub n: usize,
    pub t_block: usize,
    pub m_block: usize,
}

impl CompleteSdp {
    pub fn y(&self, i: usize) -> Entry {
        self.problem.mat(self.m_block, i, self.n)
    }

    pub fn big_y(&self, i: usize, j: usize) -> Entry {
        self.problem.mat(self.m_block, i, j)
    }

    pub fn z(&self) -> Entry {
        self.problem.mat(self.t_block, self.n, self.n)
    }

    /// `c1 Tr(QY) + cb b^T y + cz z` as a linear form.
    fn form(&self, p: &CubicPolynomial, c1: f64, cb: f64, cz: f64) -> LinearForm {
        let mut f = LinearForm::new();
        let mut add = |e: Entry, v: f64| {
            if v != 0.0 {
                *f.entry(e).or_insert(0.0) += v;
            }
        };
        let q = p.q();
        for j in 0..self.n {
            add(self.big_y(j, j), c1 * q[(j, j)]);
            for k in j + 1..self.n {
                add(self.big_y(j, k), 2.0 * c1 * q[(j, k)]);
            }
            add(self.y(j), cb * p.b()[j]);
        }
        add(self.z(), cz);
        f.retain(|_, v| *v != 0.0);
        f
    }

    /// `1/2 Tr(QY) + b^T y + z/2`.
    pub fn complete_objective(&self, p: &CubicPolynomial) -> LinearForm {
        self.form(p, 0.5, 1.0, 0.5)
    }

    /// `1/6 Tr(QY) + z/3`.
    pub fn intermediate_objective(&self, p: &CubicPolynomial) -> LinearForm {
        self.form(p, 1.0 / 6.0, 0.0, 1.0 / 3.0)
    }

    /// Pins the complete objective to zero, turning the problem into the
    /// feasibility description of the second-order points, with no objective.
    pub fn pin_objective_zero(&mut self, p: &CubicPolynomial) {
        let f = self.complete_objective(p);
        self.problem.equalities.push(crate::sdp::Equality { coeffs: f, rhs: 0.0 });
        self.problem.objective.clear();
    }
}

/// `Tr(H Y)` as coefficients on the upper triangle of `Y`.
fn trace_form(sdp: &CompleteSdp, h: &nalgebra::DMatrix<f64>, scale: f64) -> Vec<(Entry, f64)> {
    let n = sdp.n;
    let mut out = Vec::new();
    for a in 0..n {
        if h[(a, a)] != 0.0 {
            out.push((sdp.big_y(a, a), scale * h[(a, a)]));
        }
        for b in a + 1..n {
            if h[(a, b)] != 0.0 {
                out.push((sdp.big_y(a, b), 2.0 * scale * h[(a, b)]));
            }
        }
    }
    out
}

pub fn build_complete_sdp(p: &CubicPolynomial) -> CompleteSdp {
    build_complete_sdp_with(p, CompleteObjective::Complete)
}

pub fn build_complete_sdp_with(p: &CubicPolynomial, objective: CompleteObjective) -> CompleteSdp {
    let n = p.n();
    let mut prob = SdpProblem::new(Sense::Min);
    let t_block = prob.add_psd_block("T", n + 1);
    let m_block = prob.add_psd_block("M", n + 1);
    let mut sdp = CompleteSdp {
        problem: prob,
        n,
        t_block,
        m_block,
    };
    let (h, q, b) = (p.h(), p.q(), p.b());

    // 1/2 Tr(H_i Y) + e_i^T Q y = -b_i
    for i in 0..n {
        let mut terms = trace_form(&sdp, &h[i], 0.5);
        for k in 0..n {
            if q[(i, k)] != 0.0 {
                terms.push((sdp.y(k), q[(i, k)]));
            }
        }
        sdp.problem.add_equality(terms, -b[i]);
    }
    // Corner of M is 1.
    let corner = sdp.problem.mat(m_block, n, n);
    sdp.problem.add_equality([(corner, 1.0)], 1.0);
    // Top-left of T: sum_i y_i H_i + Q.
    for j in 0..n {
        for k in j..n {
            let mut terms = vec![(sdp.problem.mat(t_block, j, k), 1.0)];
            for i in 0..n {
                if h[i][(j, k)] != 0.0 {
                    terms.push((sdp.y(i), -h[i][(j, k)]));
                }
            }
            sdp.problem.add_equality(terms, q[(j, k)]);
        }
    }
    // Last column of T: Tr(H_j Y) + (Q y)_j.
    for j in 0..n {
        let mut terms: Vec<(Entry, f64)> = trace_form(&sdp, &h[j], -1.0);
        terms.push((sdp.problem.mat(t_block, j, n), 1.0));
        for k in 0..n {
            if q[(j, k)] != 0.0 {
                terms.push((sdp.y(k), -q[(j, k)]));
            }
        }
        sdp.problem.add_equality(terms, 0.0);
    }
    let obj = match objective {
        CompleteObjective::Complete => sdp.complete_objective(p),
        CompleteObjective::Intermediate => sdp.intermediate_objective(p),
    };
    sdp.problem.objective = obj;
    sdp
}

/// Layout of the sum-of-squares program: `gamma`, the Gram matrix of `sigma`
/// over `(x, 1)`, and the Gram matrix of `y^T S(x) y` over `y_j * (x, 1)_k`
/// at index `j * (n + 1) + k`.
#[derive(Clone, Debug)]
pub struct SosSdp {
    pub problem: SdpProblem,
    pub n: usize,
    pub gamma_block: usize,
    pub sigma_block: usize,
    pub s_block: usize,
}

fn exponent(n: usize, idx: &[usize]) -> Vec<u32> {
    let mut e = vec![0u32; n];
    for &i in idx {
        if i < n {
            e[i] += 1;
        }
    }
    e
}

/// `max gamma  s.t.  p - gamma = sigma + Tr(S hess p)` with `sigma` a
/// degree-2 sos polynomial and `S` an sos-matrix with quadratic entries,
/// matched coefficient by coefficient for every monomial of degree <= 3.
pub fn build_sos_sdp(p: &CubicPolynomial) -> SosSdp {
    let n = p.n();
    let m = n + 1;
    let mut prob = SdpProblem::new(Sense::Max);
    let gamma_block = prob.add_free_block("gamma", 1);
    let sigma_block = prob.add_psd_block("sigma", m);
    let s_block = prob.add_psd_block("S", n * m);
    let gamma = prob.vec(gamma_block, 0);
    prob.add_objective(gamma, 1.0);

    let mut rows: BTreeMap<Vec<u32>, Vec<(Entry, f64)>> = BTreeMap::new();
    // Every monomial of degree <= 3 gets a row, even when all terms vanish.
    for a in 0..=n {
        for b in a..=n {
            for c in b..=n {
                rows.entry(exponent(n, &[a, b, c])).or_default();
            }
        }
    }
    rows.get_mut(&vec![0; n]).expect("constant row").push((gamma, 1.0));
    for k in 0..m {
        for l in k..m {
            let w = if k == l { 1.0 } else { 2.0 };
            rows.get_mut(&exponent(n, &[k, l]))
                .expect("degree <= 2")
                .push((prob.mat(sigma_block, k, l), w));
        }
    }
    let (h, q) = (p.h(), p.q());
    let idx = |j: usize, k: usize| j * m + k;
    for j in 0..n {
        for k in 0..m {
            for l in 0..n {
                for kk in 0..m {
                    let (u, v) = (idx(j, k), idx(l, kk));
                    if u > v {
                        continue;
                    }
                    let w = if u == v { 1.0 } else { 2.0 };
                    let e = prob.mat(s_block, u, v);
                    // W[u, v] multiplies m_k m_kk (hess p)_{lj}.
                    if q[(l, j)] != 0.0 {
                        rows.get_mut(&exponent(n, &[k, kk]))
                            .expect("degree <= 2")
                            .push((e, w * q[(l, j)]));
                    }
                    for (i, hi) in h.iter().enumerate() {
                        if hi[(l, j)] != 0.0 {
                            rows.get_mut(&exponent(n, &[i, k, kk]))
                                .expect("degree <= 3")
                                .push((e, w * hi[(l, j)]));
                        }
                    }
                }
            }
        }
    }
    let coeffs = p.to_monomials();
    for (exp, terms) in rows {
        let rhs = coeffs.get(&exp).copied().unwrap_or(0.0);
        prob.add_equality(terms, rhs);
    }
    SosSdp {
        problem: prob,
        n,
        gamma_block,
        sigma_block,
        s_block,
    }
}
