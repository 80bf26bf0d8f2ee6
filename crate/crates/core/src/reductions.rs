//! Hardness-reduction and representability instances: MAXCUT as a quadratic
//! system, the cubic and quartic polynomials built from such a system, and
//! cubics `y^T A(x) y` built from linear matrix pencils. Brute-force
//! verifiers enumerate `{-1, 1}^n` and are limited to `n <= 20`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{CubicPolynomial, MonomialMap};
use crate::sparse::SparsePolynomial;

/// Largest vertex count accepted by the brute-force verifiers.
pub const BRUTE_FORCE_MAX_N: usize = 20;
/// Relative singular-value threshold for the kernel reduction of a pencil.
pub const KERNEL_RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxCutInstance {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
    k: usize,
}

impl MaxCutInstance {
    /// Simple undirected graph on `0..n_vertices`. Self-loops, repeated edges
    /// and `k > n (n - 1) / 2` are rejected.
    pub fn new(n_vertices: usize, edges: &[(usize, usize)], k: usize) -> Result<Self> {
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at vertex {u}")));
            }
            if u >= n_vertices || v >= n_vertices {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) out of range for {n_vertices} vertices"
                )));
            }
            let e = (u.min(v), u.max(v));
            if norm.contains(&e) {
                return Err(Error::InvalidInput(format!("repeated edge ({}, {})", e.0, e.1)));
            }
            norm.push(e);
        }
        let max_k = n_vertices * n_vertices.saturating_sub(1) / 2;
        if k > max_k {
            return Err(Error::InvalidInput(format!("k = {k} exceeds n(n-1)/2 = {max_k}")));
        }
        norm.sort_unstable();
        Ok(Self {
            n_vertices,
            edges: norm,
            k,
        })
    }

    /// Parses an edge list: one `u v` pair per line (0-based), `#` comments,
    /// and an optional `vertices N` line. Without it the vertex count is one
    /// more than the largest index.
    pub fn parse_edge_list(text: &str, k: usize) -> Result<Self> {
        let mut edges = Vec::new();
        let mut declared = None;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let words: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|w| !w.is_empty()).collect();
            let bad = || Error::InvalidInput(format!("edge list line {}: {raw:?}", ln + 1));
            match words.as_slice() {
                ["vertices", n] => declared = Some(n.parse::<usize>().map_err(|_| bad())?),
                [u, v] => edges.push((u.parse::<usize>().map_err(|_| bad())?, v.parse::<usize>().map_err(|_| bad())?)),
                _ => return Err(bad()),
            }
        }
        let n = declared.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
        Self::new(n, &edges, k)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn adjacency(&self) -> DMatrix<u8> {
        let mut e = DMatrix::zeros(self.n_vertices, self.n_vertices);
        for &(u, v) in &self.edges {
            e[(u, v)] = 1;
            e[(v, u)] = 1;
        }
        e
    }

    /// Number of edges cut by the sign pattern `x`.
    pub fn cut_size(&self, x: &[i8]) -> usize {
        self.edges.iter().filter(|&&(u, v)| x[u] != x[v]).count()
    }
}

fn check_brute_force(n: usize) -> Result<()> {
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::InvalidInput(format!(
            "brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    Ok(())
}

/// The sign vector encoded by the bits of `mask`.
pub fn sign_vector(n: usize, mask: u64) -> Vec<i8> {
    (0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect()
}

/// All sign patterns cutting exactly `k` edges.
pub fn brute_force_cuts(inst: &MaxCutInstance) -> Result<Vec<Vec<i8>>> {
    let n = inst.n_vertices;
    check_brute_force(n)?;
    Ok((0..1u64 << n)
        .into_par_iter()
        .map(|m| sign_vector(n, m))
        .filter(|x| inst.cut_size(x) == inst.k)
        .collect())
}

pub fn max_cut(inst: &MaxCutInstance) -> Result<usize> {
    let n = inst.n_vertices;
    check_brute_force(n)?;
    Ok((0..1u64 << n)
        .into_par_iter()
        .map(|m| inst.cut_size(&sign_vector(n, m)))
        .max()
        .unwrap_or(0))
}

/// Quadratic polynomials `q_0, ..., q_{m-1}` in `n` variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSystem {
    n: usize,
    polys: Vec<SparsePolynomial>,
}

impl QuadraticSystem {
    pub fn new(n: usize, polys: Vec<SparsePolynomial>) -> Result<Self> {
        for (i, q) in polys.iter().enumerate() {
            if q.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: q.n(),
                });
            }
            if q.degree() > 2 {
                return Err(Error::InvalidPolynomial(format!(
                    "q_{i} has degree {}, at most 2 allowed",
                    q.degree()
                )));
            }
        }
        Ok(Self { n, polys })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn polys(&self) -> &[SparsePolynomial] {
        &self.polys
    }

    pub fn residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.polys.iter().map(|q| q.eval(x)).collect()
    }

    pub fn is_solution(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.residuals(x)?.iter().all(|r| r.abs() <= tol))
    }
}

/// `q_0 = 1/4 sum_ij E_ij (1 - x_i x_j) - k` and `q_i = x_i^2 - 1`.
pub fn maxcut_to_system(inst: &MaxCutInstance) -> QuadraticSystem {
    let n = inst.n_vertices;
    let mut q0 = SparsePolynomial::zero(n);
    let e = inst.adjacency();
    let mut constant = -(inst.k as f64);
    for i in 0..n {
        for j in 0..n {
            if e[(i, j)] == 1 {
                constant += 0.25;
                let mut exp = vec![0u32; n];
                exp[i] += 1;
                exp[j] += 1;
                q0.add_term(exp, -0.25).expect("length n");
            }
        }
    }
    q0.add_term(vec![0; n], constant).expect("length n");
    let mut polys = vec![q0];
    for i in 0..n {
        let mut exp = vec![0u32; n];
        exp[i] = 2;
        let q = SparsePolynomial::from_terms(n, [(exp, 1.0), (vec![0; n], -1.0)]).expect("length n");
        polys.push(q);
    }
    QuadraticSystem::new(n, polys).expect("quadratics")
}

/// `p(x, y) = sum_i y_i q_i(x)` in `n + m` variables, `y` after `x`.
pub fn system_to_cubic(sys: &QuadraticSystem) -> Result<CubicPolynomial> {
    let (n, m) = (sys.n, sys.polys.len());
    let total = n + m;
    let mut p = SparsePolynomial::zero(total);
    for (i, q) in sys.polys.iter().enumerate() {
        let y = SparsePolynomial::variable(total, n + i);
        p = p.add(&y.mul(&q.embed(total, 0)?)?)?;
    }
    p.to_cubic()
}

/// `p(x, y, z) = sum_i (y_i^2 - z_i^2) q_i(x)` in `n + 2m` variables.
pub fn system_to_quartic(sys: &QuadraticSystem) -> Result<SparsePolynomial> {
    let (n, m) = (sys.n, sys.polys.len());
    let total = n + 2 * m;
    let mut p = SparsePolynomial::zero(total);
    for (i, q) in sys.polys.iter().enumerate() {
        let y = SparsePolynomial::variable(total, n + i);
        let z = SparsePolynomial::variable(total, n + m + i);
        let w = y.mul(&y)?.add(&z.mul(&z)?.scale(-1.0))?;
        p = p.add(&w.mul(&q.embed(total, 0)?)?)?;
    }
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub n_vertices: usize,
    pub k: usize,
    pub max_cut: usize,
    /// Sign patterns cutting exactly `k` edges.
    pub solutions: usize,
    /// Each sign pattern solves the system iff it cuts `k` edges.
    pub system_agrees: bool,
    /// `(x, 0)` is a critical point of the cubic iff `x` solves the system.
    pub cubic_agrees: bool,
    /// Gradient and Hessian of the quartic vanish at every `(x, 0, 0)` with
    /// `x` a solution, and the Hessian is not psd at every `(x, 0, 0)` with
    /// `x` a non-solution sign pattern.
    pub quartic_agrees: bool,
    /// Largest absolute coefficient over the system, cubic and quartic.
    pub max_abs_coefficient: f64,
}

impl ReductionReport {
    pub fn consistent(&self) -> bool {
        self.system_agrees && self.cubic_agrees && self.quartic_agrees
    }
}

/// Checks both reductions against brute force over `{-1, 1}^n`. Points off
/// the cube never solve the system, so the cube is the whole candidate set.
pub fn verify_maxcut_reduction(inst: &MaxCutInstance) -> Result<ReductionReport> {
    let n = inst.n_vertices;
    check_brute_force(n)?;
    let sys = maxcut_to_system(inst);
    let cubic = system_to_cubic(&sys)?;
    let quartic = system_to_quartic(&sys)?;
    let m = sys.polys.len();
    let tol = 1e-9;
    let rows: Vec<(bool, bool, bool, bool)> = (0..1u64 << n)
        .into_par_iter()
        .map(|mask| -> Result<(bool, bool, bool, bool)> {
            let s = sign_vector(n, mask);
            let x: Vec<f64> = s.iter().map(|&v| v as f64).collect();
            let is_cut = inst.cut_size(&s) == inst.k;
            let solves = sys.is_solution(&x, tol)?;
            let mut xc = x.clone();
            xc.resize(n + m, 0.0);
            let critical = cubic.gradient(&xc)?.amax() <= tol;
            let mut xq = x.clone();
            xq.resize(n + 2 * m, 0.0);
            let quartic_ok = if solves {
                quartic.gradient(&xq)?.amax() <= tol && quartic.hessian(&xq)?.amax() <= tol
            } else {
                !linalg::is_psd(&quartic.hessian(&xq)?, tol)
            };
            Ok((is_cut, solves == is_cut, critical == solves, quartic_ok))
        })
        .collect::<Result<_>>()?;
    let max_abs_coefficient = sys
        .polys
        .iter()
        .flat_map(|q| q.terms().values())
        .chain(SparsePolynomial::from_cubic(&cubic).terms().values())
        .chain(quartic.terms().values())
        .fold(0.0f64, |a, c| a.max(c.abs()));
    Ok(ReductionReport {
        n_vertices: n,
        k: inst.k,
        max_cut: max_cut(inst)?,
        solutions: rows.iter().filter(|r| r.0).count(),
        system_agrees: rows.iter().all(|r| r.1),
        cubic_agrees: rows.iter().all(|r| r.2),
        quartic_agrees: rows.iter().all(|r| r.3),
        max_abs_coefficient,
    })
}

/// Every labeled simple graph on `n` vertices, as edge lists.
pub fn all_graphs(n: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    if n > 6 {
        return Err(Error::InvalidInput(format!("graph catalog limited to n <= 6, got {n}")));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    Ok((0..1u64 << pairs.len())
        .map(|mask| {
            pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect()
        })
        .collect())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    permutations(n - 1)
        .into_iter()
        .flat_map(|p| {
            (0..n).map(move |pos| {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                q
            })
        })
        .collect()
}

/// One representative per isomorphism class of simple graphs on `n`
/// vertices: the labeling with the smallest sorted edge list.
pub fn nonisomorphic_graphs(n: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    let perms = permutations(n);
    let canonical = |edges: &Vec<(usize, usize)>| -> Vec<(usize, usize)> {
        perms
            .iter()
            .map(|p| {
                let mut e: Vec<(usize, usize)> = edges
                    .iter()
                    .map(|&(u, v)| (p[u].min(p[v]), p[u].max(p[v])))
                    .collect();
                e.sort_unstable();
                e
            })
            .min()
            .expect("at least one permutation")
    };
    let mut reps: Vec<Vec<(usize, usize)>> = all_graphs(n)?.par_iter().map(canonical).collect();
    reps.sort();
    reps.dedup();
    Ok(reps)
}

/// Symmetric pencil `A(x) = A_0 + sum_i x_i A_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrahedronDescription {
    /// `A_0, A_1, ..., A_n`, row-major.
    pub matrices: Vec<Vec<Vec<f64>>>,
}

fn dmat(rows: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j])
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl SpectrahedronDescription {
    pub fn new(matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return Err(Error::InvalidInput("a pencil needs at least A_0".into()));
        };
        let size = first.nrows();
        for (k, a) in matrices.iter().enumerate() {
            if a.nrows() != size || a.ncols() != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    got: a.nrows().max(a.ncols()),
                });
            }
            let scale = a.amax().max(1.0);
            if (a - a.transpose()).amax() > 1e-12 * scale {
                return Err(Error::InvalidInput(format!("A_{k} is not symmetric")));
            }
        }
        Ok(Self {
            matrices: matrices.iter().map(rows_of).collect(),
        })
    }

    /// Number of pencil variables `n`.
    pub fn n(&self) -> usize {
        self.matrices.len() - 1
    }

    /// Matrix size `m`.
    pub fn size(&self) -> usize {
        self.matrices[0].len()
    }

    pub fn matrix(&self, k: usize) -> DMatrix<f64> {
        dmat(&self.matrices[k])
    }

    pub fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        let mut a = self.matrix(0);
        for (i, xi) in x.iter().enumerate() {
            a += self.matrix(i + 1) * *xi;
        }
        Ok(a)
    }

    /// `A(x) >= 0` with smallest eigenvalue at least `-tol max(1, ||A(x)||)`.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(linalg::is_psd(&self.eval(x)?, tol))
    }

    /// Orthonormal basis `V` of the complement of the common kernel of all
    /// `A_i`. The identity when the common kernel is trivial.
    pub fn kernel_complement(&self) -> DMatrix<f64> {
        let m = self.size();
        let stacked = DMatrix::from_fn(m * self.matrices.len(), m, |r, c| self.matrices[r / m][r % m][c]);
        let svd = stacked.svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > KERNEL_RANK_TOL * smax && smax > 0.0)
            .collect();
        if keep.len() == m {
            return DMatrix::identity(m, m);
        }
        DMatrix::from_fn(m, keep.len(), |r, c| vt[(keep[c], r)])
    }

    /// The pencil `B_i = V^T A_i V` on the complement of the common kernel.
    pub fn reduced(&self) -> Self {
        let v = self.kernel_complement();
        let mats = (0..self.matrices.len())
            .map(|k| {
                let b = v.transpose() * self.matrix(k) * &v;
                rows_of(&(0.5 * (&b + b.transpose())))
            })
            .collect();
        Self { matrices: mats }
    }
}

/// `p(x, y) = y^T A(x) y`, `y` after `x`.
pub fn sdpf_to_cubic(pencil: &SpectrahedronDescription) -> Result<CubicPolynomial> {
    let (n, m) = (pencil.n(), pencil.size());
    let total = n + m;
    let mut terms: MonomialMap<f64> = MonomialMap::new();
    for (k, a) in pencil.matrices.iter().enumerate() {
        for j in 0..m {
            for l in j..m {
                let c = if j == l { a[j][l] } else { 2.0 * a[j][l] };
                if c == 0.0 {
                    continue;
                }
                let mut e = vec![0u32; total];
                if k > 0 {
                    e[k - 1] += 1;
                }
                e[n + j] += 1;
                e[n + l] += 1;
                *terms.entry(e).or_insert(0.0) += c;
            }
        }
    }
    CubicPolynomial::from_monomials(total, &terms)
}

/// `p(x, y) = y^T B(x) y` with `B` the kernel reduction of the pencil; the
/// projection of its convexity region onto `x` is the spectrahedron and the
/// projection of its local minima is the interior.
pub fn spectrahedron_to_cubic(pencil: &SpectrahedronDescription) -> Result<CubicPolynomial> {
    sdpf_to_cubic(&pencil.reduced())
}

/// The 4x4 pencil `[[2, x, 0, 0], [x, 1, 0, 0], [0, 0, 2x, 2], [0, 0, 2, x]]`,
/// feasible only at `x = sqrt(2)`.
pub fn irrational_pencil() -> SpectrahedronDescription {
    let a0 = DMatrix::from_row_slice(4, 4, &[2., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 2., 0., 0., 2., 0.]);
    let a1 = DMatrix::from_row_slice(4, 4, &[0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 2., 0., 0., 0., 0., 1.]);
    SpectrahedronDescription::new(vec![a0, a1]).expect("symmetric")
}

/// `[[1 - x_1, x_2], [x_2, 1 + x_1]]`, feasible on the unit disk.
pub fn disk_pencil() -> SpectrahedronDescription {
    let a0 = DMatrix::identity(2, 2);
    let a1 = DMatrix::from_row_slice(2, 2, &[-1., 0., 0., 1.]);
    let a2 = DMatrix::from_row_slice(2, 2, &[0., 1., 1., 0.]);
    SpectrahedronDescription::new(vec![a0, a1, a2]).expect("symmetric")
}

/// Block diagonal pencil with blocks `[[x_1, 2], [2, 1]]` and
/// `[[x_k, x_{k-1}], [x_{k-1}, 1]]`; feasibility forces `x_k >= 2^(2^k)`.
pub fn doubling_pencil(n: usize) -> Result<SpectrahedronDescription> {
    if n == 0 {
        return Err(Error::InvalidInput("the doubling pencil needs n >= 1".into()));
    }
    let m = 2 * n;
    let mut mats = vec![DMatrix::zeros(m, m); n + 1];
    for k in 0..n {
        let r = 2 * k;
        mats[k + 1][(r, r)] = 1.0;
        mats[0][(r + 1, r + 1)] = 1.0;
        if k == 0 {
            mats[0][(r, r + 1)] = 2.0;
            mats[0][(r + 1, r)] = 2.0;
        } else {
            mats[k][(r, r + 1)] = 1.0;
            mats[k][(r + 1, r)] = 1.0;
        }
    }
    SpectrahedronDescription::new(mats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(k: usize) -> MaxCutInstance {
        MaxCutInstance::new(3, &[(0, 1), (1, 2), (0, 2)], k).unwrap()
    }

    #[test]
    fn triangle_cut_of_two() {
        let sys = maxcut_to_system(&triangle(2));
        assert!(sys.is_solution(&[1.0, 1.0, -1.0], 0.0).unwrap());
        let p = system_to_cubic(&sys).unwrap();
        assert_eq!(p.n(), 7);
        let g = p.gradient(&[1.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(g.amax(), 0.0);
    }

    #[test]
    fn triangle_has_no_cut_of_three() {
        let inst = triangle(3);
        assert!(brute_force_cuts(&inst).unwrap().is_empty());
        let r = verify_maxcut_reduction(&inst).unwrap();
        assert_eq!(r.max_cut, 2);
        assert!(r.system_agrees && r.cubic_agrees && r.quartic_agrees);
    }

    #[test]
    fn single_edge() {
        let inst = MaxCutInstance::new(2, &[(0, 1)], 1).unwrap();
        assert!(maxcut_to_system(&inst).is_solution(&[1.0, -1.0], 0.0).unwrap());
    }

    #[test]
    fn input_validation() {
        assert!(MaxCutInstance::new(3, &[(1, 1)], 0).is_err());
        assert!(MaxCutInstance::new(3, &[(0, 1), (1, 0)], 0).is_err());
        assert!(MaxCutInstance::new(3, &[(0, 3)], 0).is_err());
        assert!(MaxCutInstance::new(3, &[], 4).is_err());
        let inst = MaxCutInstance::parse_edge_list("# triangle\n0 1\n1 2\n0,2\n", 2).unwrap();
        assert_eq!(inst, triangle(2));
        let inst = MaxCutInstance::parse_edge_list("vertices 5\n0 1\n", 1).unwrap();
        assert_eq!(inst.n_vertices(), 5);
        assert!(MaxCutInstance::parse_edge_list("0 1 2\n", 1).is_err());
        assert!(brute_force_cuts(&MaxCutInstance::new(21, &[], 0).unwrap()).is_err());
    }

    #[test]
    fn lone_quadratic() {
        // n = 0: p = y_0 q_0 with q_0 constant
        let q = SparsePolynomial::constant(0, 2.0);
        let p = system_to_cubic(&QuadraticSystem::new(0, vec![q]).unwrap()).unwrap();
        assert_eq!(p.gradient(&[5.0]).unwrap()[0], 2.0);
        let q = SparsePolynomial::from_terms(1, [(vec![2], 1.0), (vec![0], -4.0)]).unwrap();
        let p = system_to_cubic(&QuadraticSystem::new(1, vec![q]).unwrap()).unwrap();
        assert_eq!(p.gradient(&[2.0, 0.0]).unwrap().amax(), 0.0);
        assert!(QuadraticSystem::new(1, vec![SparsePolynomial::from_terms(1, [(vec![3], 1.0)]).unwrap()]).is_err());
    }

    #[test]
    fn quartic_hessian() {
        let sys = maxcut_to_system(&triangle(2));
        let p = system_to_quartic(&sys).unwrap();
        assert_eq!(p.n(), 11);
        let mut x = vec![0.0; 11];
        x[..3].copy_from_slice(&[1.0, 1.0, -1.0]);
        assert_eq!(p.hessian(&x).unwrap().amax(), 0.0);
        x[..3].copy_from_slice(&[0.5, 1.0, -1.0]);
        let h = p.hessian(&x).unwrap();
        let q = sys.residuals(&x[..3]).unwrap();
        for i in 0..4 {
            assert!((h[(3 + i, 3 + i)] - 2.0 * q[i]).abs() < 1e-12);
            assert!((h[(7 + i, 7 + i)] + 2.0 * q[i]).abs() < 1e-12);
        }
        assert!(!linalg::is_psd(&h, 1e-9));
        let zero = system_to_quartic(&QuadraticSystem::new(2, vec![SparsePolynomial::zero(2)]).unwrap()).unwrap();
        assert!(zero.is_zero());
    }

    #[test]
    fn scalar_pencil() {
        let pencil = SpectrahedronDescription::new(vec![DMatrix::zeros(1, 1), DMatrix::identity(1, 1)]).unwrap();
        let p = spectrahedron_to_cubic(&pencil).unwrap();
        let mono = p.to_monomials();
        assert_eq!(mono.len(), 1);
        assert_eq!(mono[&vec![1, 2]], 1.0);
    }

    #[test]
    fn disk_pencil_gives_four_variable_cubic() {
        let p = spectrahedron_to_cubic(&disk_pencil()).unwrap();
        let mono = p.to_monomials();
        let expect: MonomialMap<f64> = [
            (vec![1, 0, 2, 0], -1.0),
            (vec![1, 0, 0, 2], 1.0),
            (vec![0, 1, 1, 1], 2.0),
            (vec![0, 0, 2, 0], 1.0),
            (vec![0, 0, 0, 2], 1.0),
        ]
        .into_iter()
        .collect();
        assert_eq!(mono, expect);
    }

    #[test]
    fn padded_pencil_reduces() {
        let disk = disk_pencil();
        let padded: Vec<DMatrix<f64>> = (0..3)
            .map(|k| {
                let mut m = DMatrix::zeros(3, 3);
                m.view_mut((0, 0), (2, 2)).copy_from(&disk.matrix(k));
                m
            })
            .collect();
        let padded = SpectrahedronDescription::new(padded).unwrap();
        assert_eq!(padded.kernel_complement().ncols(), 2);
        let red = padded.reduced();
        assert_eq!(red.size(), 2);
        for x in [[0.3, 0.4], [0.9, 0.5], [0.0, -1.0], [1.2, 0.0]] {
            assert_eq!(red.contains(&x, 1e-9).unwrap(), disk.contains(&x, 1e-9).unwrap(), "{x:?}");
        }
        assert_eq!(disk.kernel_complement(), DMatrix::identity(2, 2));
    }

    #[test]
    fn irrational_pencil_feasible_only_at_root_two() {
        let pencil = irrational_pencil();
        assert!(pencil.contains(&[2f64.sqrt()], 1e-12).unwrap());
        for x in [1.0, 1.4, 1.42, 2.0] {
            assert!(!pencil.contains(&[x], 1e-9).unwrap());
        }
    }

    #[test]
    fn graph_catalog_sizes() {
        let counts: Vec<usize> = (1..=5).map(|n| nonisomorphic_graphs(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 2, 4, 11, 34]);
    }

    #[test]
    fn doubling_pencil_thresholds() {
        let pencil = doubling_pencil(3).unwrap();
        assert!(pencil.contains(&[4.0, 16.0, 256.0], 1e-12).unwrap());
        assert!(!pencil.contains(&[4.0, 16.0, 255.0], 1e-12).unwrap());
        assert!(!pencil.contains(&[3.9, 16.0, 256.0], 1e-12).unwrap());
        assert_eq!(sdpf_to_cubic(&pencil).unwrap().n(), 9);
    }
}
