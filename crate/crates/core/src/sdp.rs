//! Block-structured semidefinite programs and their solution through an
//! interior-point conic backend (Clarabel).
//!
//! Every upper-triangle entry `(i, j)`, `i <= j`, of a psd block and every
//! entry of a free block is one scalar decision variable. Linear forms are
//! coefficient maps over those variables, so `Tr(A X)` for symmetric `A`
//! carries coefficient `A_ii` on `(i, i)` and `2 A_ij` on `(i, j)`.

use std::collections::BTreeMap;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Environment variable overriding the default solver tolerance.
pub const SOLVER_TOL_ENV: &str = "CUBICMIN_SOLVER_TOL";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Psd,
    Free,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub kind: BlockKind,
    pub size: usize,
}

impl Block {
    pub fn num_vars(&self) -> usize {
        match self.kind {
            BlockKind::Psd => self.size * (self.size + 1) / 2,
            BlockKind::Free => self.size,
        }
    }
}

/// Address of one scalar variable: `(block, i, j)` with `i <= j` for psd
/// blocks and `j = 0` for free blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Entry {
    pub block: usize,
    pub i: usize,
    pub j: usize,
}

pub type LinearForm = BTreeMap<Entry, f64>;

#[derive(Clone, Debug, PartialEq)]
pub struct Equality {
    pub coeffs: LinearForm,
    pub rhs: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<Block>,
    pub objective: LinearForm,
    pub equalities: Vec<Equality>,
    pub sense: Sense,
}

fn add_to(form: &mut LinearForm, e: Entry, c: f64) {
    if c == 0.0 {
        return;
    }
    let v = form.entry(e).or_insert(0.0);
    *v += c;
    if *v == 0.0 {
        form.remove(&e);
    }
}

impl SdpProblem {
    pub fn new(sense: Sense) -> Self {
        Self {
            blocks: Vec::new(),
            objective: LinearForm::new(),
            equalities: Vec::new(),
            sense,
        }
    }

    pub fn add_psd_block(&mut self, name: &str, size: usize) -> usize {
        self.blocks.push(Block {
            name: name.into(),
            kind: BlockKind::Psd,
            size,
        });
        self.blocks.len() - 1
    }

    pub fn add_free_block(&mut self, name: &str, len: usize) -> usize {
        self.blocks.push(Block {
            name: name.into(),
            kind: BlockKind::Free,
            size: len,
        });
        self.blocks.len() - 1
    }

    /// Matrix entry `(i, j)` of a psd block, in either order.
    pub fn mat(&self, block: usize, i: usize, j: usize) -> Entry {
        Entry {
            block,
            i: i.min(j),
            j: i.max(j),
        }
    }

    /// Entry `k` of a free block.
    pub fn vec(&self, block: usize, k: usize) -> Entry {
        Entry { block, i: k, j: 0 }
    }

    pub fn add_objective(&mut self, e: Entry, c: f64) {
        add_to(&mut self.objective, e, c);
    }

    pub fn add_equality<I: IntoIterator<Item = (Entry, f64)>>(&mut self, terms: I, rhs: f64) {
        let mut coeffs = LinearForm::new();
        for (e, c) in terms {
            add_to(&mut coeffs, e, c);
        }
        self.equalities.push(Equality { coeffs, rhs });
    }

    fn check_entry(&self, e: &Entry) -> Result<()> {
        let b = self
            .blocks
            .get(e.block)
            .ok_or_else(|| Error::InvalidSdp(format!("undeclared block {}", e.block)))?;
        let ok = match b.kind {
            BlockKind::Psd => e.i <= e.j && e.j < b.size,
            BlockKind::Free => e.j == 0 && e.i < b.size,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSdp(format!(
                "entry ({}, {}) outside block {:?}",
                e.i, e.j, b.name
            )))
        }
    }

    pub fn validate(&self) -> Result<()> {
        for e in self.objective.keys() {
            self.check_entry(e)?;
        }
        for eq in &self.equalities {
            for e in eq.coeffs.keys() {
                self.check_entry(e)?;
            }
            if !eq.rhs.is_finite() {
                return Err(Error::InvalidSdp("non-finite right-hand side".into()));
            }
        }
        if self
            .objective
            .values()
            .chain(self.equalities.iter().flat_map(|e| e.coeffs.values()))
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidSdp("non-finite coefficient".into()));
        }
        Ok(())
    }

    /// Offset of each block in the stacked variable vector.
    fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.blocks.len());
        let mut acc = 0;
        for b in &self.blocks {
            off.push(acc);
            acc += b.num_vars();
        }
        off
    }

    fn num_vars(&self) -> usize {
        self.blocks.iter().map(Block::num_vars).sum()
    }

    /// Column index of a variable: psd blocks use the column-major upper
    /// triangle, free blocks their natural order.
    fn column(&self, offsets: &[usize], e: &Entry) -> usize {
        match self.blocks[e.block].kind {
            BlockKind::Psd => offsets[e.block] + e.j * (e.j + 1) / 2 + e.i,
            BlockKind::Free => offsets[e.block] + e.i,
        }
    }

    /// Evaluates a linear form at a solution.
    pub fn eval_form(&self, form: &LinearForm, sol: &SdpSolution) -> f64 {
        form.iter().map(|(e, c)| c * sol.value(e)).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BlockValue {
    Matrix(Vec<Vec<f64>>),
    Vector(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpResiduals {
    /// `max_k |a_k . x - b_k| / (1 + |b_k|)`.
    pub eq_residual: f64,
    /// Smallest eigenvalue over all psd blocks, relative to `max(1, ||X||)`.
    pub min_block_eigenvalue: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub objective: f64,
    pub block_values: Vec<BlockValue>,
    pub residuals: SdpResiduals,
    pub solver_status: String,
    pub iterations: u32,
}

impl SdpSolution {
    pub fn value(&self, e: &Entry) -> f64 {
        match &self.block_values[e.block] {
            BlockValue::Matrix(m) => m[e.i][e.j],
            BlockValue::Vector(v) => v[e.i],
        }
    }

    pub fn matrix(&self, block: usize) -> Option<DMatrix<f64>> {
        match &self.block_values[block] {
            BlockValue::Matrix(m) => Some(DMatrix::from_fn(m.len(), m.len(), |i, j| m[i][j])),
            BlockValue::Vector(_) => None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Feasibility and duality-gap tolerance handed to the backend.
    pub tol: f64,
    pub max_iter: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 500,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    /// Defaults, with the tolerance taken from `CUBICMIN_SOLVER_TOL` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(SOLVER_TOL_ENV) {
            Ok(s) => {
                let tol: f64 = s
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("{SOLVER_TOL_ENV}={s:?}")))?;
                if !(tol > 0.0 && tol < 1.0) {
                    return Err(Error::InvalidInput(format!("{SOLVER_TOL_ENV} must lie in (0, 1)")));
                }
                Ok(Self::with_tol(tol))
            }
            Err(_) => Ok(Self::default()),
        }
    }
}

/// Solves `prob` with Clarabel. Optimal solutions are reported only when the
/// backend converged (fully, or to reduced accuracy with residuals within
/// `100 * tol`).
pub fn solve(prob: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    prob.validate()?;
    let offsets = prob.offsets();
    let nvars = prob.num_vars();
    let sign = match prob.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let mut q = vec![0.0; nvars];
    for (e, c) in &prob.objective {
        q[prob.column(&offsets, e)] += sign * c;
    }

    let (mut rows, mut cols, mut vals) = (Vec::new(), Vec::new(), Vec::new());
    let mut b = Vec::new();
    let mut cones = Vec::new();
    for eq in &prob.equalities {
        let r = b.len();
        for (e, c) in &eq.coeffs {
            rows.push(r);
            cols.push(prob.column(&offsets, e));
            vals.push(*c);
        }
        b.push(eq.rhs);
    }
    if !prob.equalities.is_empty() {
        cones.push(SupportedConeT::ZeroConeT(prob.equalities.len()));
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    for (k, blk) in prob.blocks.iter().enumerate() {
        if blk.kind != BlockKind::Psd || blk.size == 0 {
            continue;
        }
        // s = b - A x = svec(X): off-diagonal entries scaled by sqrt(2).
        for j in 0..blk.size {
            for i in 0..=j {
                let r = b.len();
                rows.push(r);
                cols.push(prob.column(&offsets, &Entry { block: k, i, j }));
                vals.push(if i == j { -1.0 } else { -sqrt2 });
                b.push(0.0);
            }
        }
        cones.push(SupportedConeT::PSDTriangleConeT(blk.size));
    }

    let a = CscMatrix::new_from_triplets(b.len(), nvars, rows, cols, vals);
    let p = CscMatrix::<f64>::zeros((nvars, nvars));
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(opts.max_iter)
        .tol_gap_abs(opts.tol)
        .tol_gap_rel(opts.tol)
        .tol_feas(opts.tol)
        .tol_infeas_abs(opts.tol)
        .tol_infeas_rel(opts.tol)
        .max_threads(1)
        .build()
        .map_err(|e| Error::Solver {
            stage: "settings".into(),
            msg: format!("{e:?}"),
        })?;
    let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings).map_err(|e| Error::Solver {
        stage: "setup".into(),
        msg: format!("{e:?}"),
    })?;
    solver.solve();
    let raw = &solver.solution;

    let block_values = prob
        .blocks
        .iter()
        .enumerate()
        .map(|(k, blk)| match blk.kind {
            BlockKind::Psd => {
                let mut m = vec![vec![0.0; blk.size]; blk.size];
                for j in 0..blk.size {
                    for i in 0..=j {
                        let v = raw.x[prob.column(&offsets, &Entry { block: k, i, j })];
                        m[i][j] = v;
                        m[j][i] = v;
                    }
                }
                BlockValue::Matrix(m)
            }
            BlockKind::Free => {
                BlockValue::Vector((0..blk.size).map(|i| raw.x[offsets[k] + i]).collect())
            }
        })
        .collect();
    let mut sol = SdpSolution {
        status: SdpStatus::NumericalFailure,
        objective: f64::NAN,
        block_values,
        residuals: SdpResiduals {
            eq_residual: f64::NAN,
            min_block_eigenvalue: f64::NAN,
        },
        solver_status: format!("{:?}", raw.status),
        iterations: raw.iterations,
    };
    sol.objective = prob.eval_form(&prob.objective, &sol);
    sol.residuals = residuals(prob, &sol);
    let within = |scale: f64| {
        sol.residuals.eq_residual <= scale * opts.tol && sol.residuals.min_block_eigenvalue >= -scale * opts.tol
    };
    sol.status = match raw.status {
        SolverStatus::Solved if within(10.0) => SdpStatus::Optimal,
        SolverStatus::AlmostSolved if within(100.0) => SdpStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SdpStatus::Infeasible,
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SdpStatus::Unbounded,
        _ => SdpStatus::NumericalFailure,
    };
    log::debug!(
        "sdp solve: {} vars, {} eqs, status {:?} -> {:?}, obj {:.3e}",
        nvars,
        prob.equalities.len(),
        raw.status,
        sol.status,
        sol.objective
    );
    Ok(sol)
}

fn residuals(prob: &SdpProblem, sol: &SdpSolution) -> SdpResiduals {
    let eq_residual = prob
        .equalities
        .iter()
        .map(|eq| (prob.eval_form(&eq.coeffs, sol) - eq.rhs).abs() / (1.0 + eq.rhs.abs()))
        .fold(0.0, f64::max);
    let min_block_eigenvalue = prob
        .blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| b.kind == BlockKind::Psd && b.size > 0)
        .map(|(k, _)| {
            let m = sol.matrix(k).expect("psd block");
            let (vals, _) = linalg::sym_eigen(&m);
            let norm = vals.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
            vals[0] / norm
        })
        .fold(f64::INFINITY, f64::min);
    SdpResiduals {
        eq_residual,
        min_block_eigenvalue: if min_block_eigenvalue.is_finite() {
            min_block_eigenvalue
        } else {
            0.0
        },
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn forced_one() -> SdpProblem {
        let mut p = SdpProblem::new(Sense::Min);
        let b = p.add_psd_block("Y", 1);
        let e = p.mat(b, 0, 0);
        p.add_equality([(e, 1.0)], 1.0);
        p
    }

    /// min x s.t. [[x, 1], [1, x]] psd, with x free and the matrix a psd block.
    pub(crate) fn two_by_two() -> SdpProblem {
        let mut p = SdpProblem::new(Sense::Min);
        let x = p.add_free_block("x", 1);
        let m = p.add_psd_block("M", 2);
        let (xv, m00, m01, m11) = (p.vec(x, 0), p.mat(m, 0, 0), p.mat(m, 0, 1), p.mat(m, 1, 1));
        p.add_objective(xv, 1.0);
        p.add_equality([(m00, 1.0), (xv, -1.0)], 0.0);
        p.add_equality([(m11, 1.0), (xv, -1.0)], 0.0);
        p.add_equality([(m01, 1.0)], 1.0);
        p
    }

    pub(crate) fn forced_negative() -> SdpProblem {
        let mut p = SdpProblem::new(Sense::Min);
        let b = p.add_psd_block("Y", 1);
        let e = p.mat(b, 0, 0);
        p.add_equality([(e, 1.0)], -1.0);
        p
    }

    #[test]
    fn forced_value() {
        let s = solve(&forced_one(), &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.value(&Entry { block: 0, i: 0, j: 0 }) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn determinant_bound() {
        let s = solve(&two_by_two(), &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-6, "{}", s.objective);
        assert!(s.residuals.eq_residual <= 1e-8);
        assert!(s.residuals.min_block_eigenvalue >= -1e-8);
    }

    #[test]
    fn infeasible_psd() {
        let s = solve(&forced_negative(), &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Infeasible);
    }

    #[test]
    fn unbounded_and_max_sense() {
        // max x s.t. X = [[x]] psd is unbounded.
        let mut p = SdpProblem::new(Sense::Max);
        let b = p.add_psd_block("X", 1);
        let e = p.mat(b, 0, 0);
        p.add_objective(e, 1.0);
        assert_eq!(solve(&p, &SolverOptions::default()).unwrap().status, SdpStatus::Unbounded);
        // max -x s.t. [[x,1],[1,x]] psd has optimum -1.
        let mut p = two_by_two();
        p.sense = Sense::Max;
        let x = p.vec(0, 0);
        p.objective.clear();
        p.add_objective(x, -1.0);
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.objective + 1.0).abs() < 1e-6);
    }

    #[test]
    fn deterministic() {
        let a = solve(&two_by_two(), &SolverOptions::default()).unwrap();
        let b = solve(&two_by_two(), &SolverOptions::default()).unwrap();
        assert_eq!(a.status, b.status);
        assert!((a.objective - b.objective).abs() <= 1e-9);
    }

    #[test]
    fn validation_rejects_bad_entries() {
        let mut p = forced_one();
        p.add_equality([(Entry { block: 0, i: 1, j: 0 }, 1.0)], 0.0);
        assert!(p.validate().is_err());
        let mut p = forced_one();
        p.add_objective(Entry { block: 4, i: 0, j: 0 }, 1.0);
        assert!(solve(&p, &SolverOptions::default()).is_err());
    }
}
