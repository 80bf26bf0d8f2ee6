#![allow(dead_code)]

use cubicmin::reductions::SpectrahedronDescription;
use cubicmin::{CubicPolynomial, MonomialMap};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, rank, |_, _| uniform(rng, -1.0, 1.0));
    &g * g.transpose()
}

pub fn orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| uniform(rng, -1.0, 1.0)).qr().q()
}

/// Random cubic with a prescribed second-order point `x0`, whose Hessian there
/// is a random psd matrix of random rank.
pub fn cubic_with_second_order_point(rng: &mut ChaCha8Rng, n: usize) -> (CubicPolynomial, Vec<f64>) {
    let mut terms = MonomialMap::new();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let mut e = vec![0u32; n];
                e[i] += 1;
                e[j] += 1;
                e[k] += 1;
                terms.insert(e, uniform(rng, -1.0, 1.0));
            }
        }
    }
    let p3 = CubicPolynomial::from_monomials(n, &terms).unwrap();
    let x0: Vec<f64> = (0..n).map(|_| uniform(rng, -1.0, 1.0)).collect();
    let rank = rng.gen_range(0..=n);
    let q = random_psd(rng, n, rank) - p3.hessian(&x0).unwrap();
    let q = (&q + q.transpose()) * 0.5;
    let b = -(p3.gradient(&x0).unwrap() + &q * DVector::from_column_slice(&x0));
    let p = CubicPolynomial::from_parts(p3.h().to_vec(), q, b, uniform(rng, -1.0, 1.0)).unwrap();
    (p, x0)
}

/// `g(a^T x) + 1/2 x^T P x` with `g' = 3 alpha (t - r1)(t - r2)`, `P` psd and
/// `P a = 0`. The critical points are the two affine subspaces
/// `{x : a^T x = r_i, P x = 0}`.
pub struct RidgeInstance {
    pub p: CubicPolynomial,
    pub roots: [f64; 2],
    /// Orthonormal; column 0 is `a`, columns `1..kernel` span the rest of the kernel of `P`.
    pub basis: DMatrix<f64>,
    pub kernel: usize,
}

impl RidgeInstance {
    pub fn random(rng: &mut ChaCha8Rng, n: usize) -> Self {
        let basis = orthogonal(rng, n);
        let kernel = rng.gen_range(1..=n);
        let a = basis.column(0).into_owned();
        let r1 = uniform(rng, -2.0, 1.0);
        let r2 = r1 + uniform(rng, 0.2, 2.0);
        let alpha = uniform(rng, 0.2, 2.0);
        let beta = -1.5 * alpha * (r1 + r2);
        let gamma = 3.0 * alpha * r1 * r2;
        let mut pm = DMatrix::zeros(n, n);
        for j in kernel..n {
            let u = basis.column(j);
            pm += u * u.transpose() * uniform(rng, 0.3, 2.0);
        }
        let aat = &a * a.transpose();
        let h: Vec<DMatrix<f64>> = (0..n).map(|i| &aat * (6.0 * alpha * a[i])).collect();
        let q = &aat * (2.0 * beta) + pm;
        let q = (&q + q.transpose()) * 0.5;
        let p = CubicPolynomial::from_parts(h, q, &a * gamma, 0.0).unwrap();
        Self {
            p,
            roots: [r1, r2],
            basis,
            kernel,
        }
    }

    pub fn sample_critical(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let r = self.roots[rng.gen_range(0..2)];
        let mut x = self.basis.column(0) * r;
        for j in 1..self.kernel {
            x += self.basis.column(j) * uniform(rng, -5.0, 5.0);
        }
        x.iter().copied().collect()
    }

    /// A second-order point: the larger root is the local minimum of `g`.
    pub fn sample_second_order(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut x = self.basis.column(0) * self.roots[1];
        for j in 1..self.kernel {
            x += self.basis.column(j) * uniform(rng, -5.0, 5.0);
        }
        x.iter().copied().collect()
    }
}

/// Pencil with `A_0` positive definite on the complement of a random common
/// kernel of dimension `kernel_dim`.
pub fn random_pencil(rng: &mut ChaCha8Rng, n: usize, m: usize, kernel_dim: usize) -> SpectrahedronDescription {
    let w = orthogonal(rng, m);
    let r = m - kernel_dim;
    let embed = |b: DMatrix<f64>| {
        let mut full = DMatrix::zeros(m, m);
        full.view_mut((0, 0), (r, r)).copy_from(&b);
        &w * full * w.transpose()
    };
    let mut mats = vec![embed(DMatrix::identity(r, r) + random_psd(rng, r, r) * 0.5)];
    for _ in 0..n {
        let b = DMatrix::from_fn(r, r, |_, _| uniform(rng, -1.0, 1.0));
        mats.push(embed((&b + b.transpose()) * 0.5));
    }
    let mats = mats.into_iter().map(|a| (&a + a.transpose()) * 0.5).collect();
    SpectrahedronDescription::new(mats).unwrap()
}

/// Point strictly inside the spectrahedron of the reduced pencil.
pub fn interior_point(rng: &mut ChaCha8Rng, reduced: &SpectrahedronDescription) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..reduced.n()).map(|_| uniform(rng, -0.8, 0.8)).collect();
        let a = reduced.eval(&x).unwrap();
        if cubicmin::linalg::min_eigenvalue(&a) > 1e-3 {
            return x;
        }
    }
}

/// Point on the boundary of the spectrahedron, on the segment from an
/// interior point outward.
pub fn boundary_point(rng: &mut ChaCha8Rng, reduced: &SpectrahedronDescription) -> Option<Vec<f64>> {
    let inside = interior_point(rng, reduced);
    let dir: Vec<f64> = (0..reduced.n()).map(|_| uniform(rng, -1.0, 1.0)).collect();
    let at = |t: f64| -> Vec<f64> { inside.iter().zip(&dir).map(|(a, d)| a + t * d).collect() };
    let lam = |t: f64| cubicmin::linalg::min_eigenvalue(&reduced.eval(&at(t)).unwrap());
    let mut hi = 1.0;
    while lam(hi) >= 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lam(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(at(lo))
}

/// `(x, 0)` in the variables of the pencil cubic.
pub fn lift(x: &[f64], total: usize) -> Vec<f64> {
    let mut v = x.to_vec();
    v.resize(total, 0.0);
    v
}

/// Random univariate cubic `a x^3 + b x^2 + c x` whose derivative has two
/// distinct real roots; returns `(a, b, c, local minimum)`.
pub fn cubic_with_strict_min(rng: &mut ChaCha8Rng) -> (f64, f64, f64, f64) {
    loop {
        let a = uniform(rng, 0.2, 3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let b = uniform(rng, -3.0, 3.0);
        let c = uniform(rng, -3.0, 3.0);
        let disc = 4.0 * b * b - 12.0 * a * c;
        if disc > 1e-3 {
            // roots of 3a x^2 + 2b x + c without cancellation; the minimum has f'' = 6a x + 2b > 0
            let q = -(b + b.signum() * 0.5 * disc.sqrt());
            let roots = [q / (3.0 * a), c / q];
            let min = roots.into_iter().find(|r| 6.0 * a * r + 2.0 * b > 0.0);
            if let Some(r) = min {
                return (a, b, c, r);
            }
        }
    }
}

pub type Triple = (DMatrix<f64>, Vec<f64>, f64);

/// Smallest `z` making `T(Y, y, z)` psd, plus `slack`; `None` when the
/// Hessian at `y` is not psd.
pub fn schur_z(p: &CubicPolynomial, big_y: &DMatrix<f64>, y: &[f64], slack: f64) -> Option<f64> {
    let h = p.hessian(y).unwrap();
    if cubicmin::linalg::min_eigenvalue(&h) < -1e-9 {
        return None;
    }
    let yv = DVector::from_column_slice(y);
    let v = DVector::from_fn(p.n(), |i, _| (&p.h()[i] * big_y).trace()) + p.q() * &yv;
    let (vals, vecs) = cubicmin::linalg::sym_eigen(&h);
    let cut = 1e-10 * vals.iter().fold(1.0_f64, |m, l| m.max(l.abs()));
    let quad: f64 = vals
        .iter()
        .enumerate()
        .filter(|(_, l)| **l > cut)
        .map(|(k, l)| vecs.column(k).dot(&v).powi(2) / l)
        .sum();
    Some(quad + slack)
}

/// `(x x^T, x, z)` at a second-order point `x`.
pub fn point_triple(p: &CubicPolynomial, x: &[f64], slack: f64) -> Triple {
    let xv = DVector::from_column_slice(x);
    let big_y = &xv * xv.transpose();
    let z = schur_z(p, &big_y, x, slack).expect("second-order point");
    (big_y, x.to_vec(), z)
}

pub fn combine(parts: &[(f64, Triple)]) -> Triple {
    let n = parts[0].1 .1.len();
    let mut big_y = DMatrix::zeros(n, n);
    let mut y = vec![0.0; n];
    let mut z = 0.0;
    for (w, (yy, v, zz)) in parts {
        big_y += yy * *w;
        for (a, b) in y.iter_mut().zip(v) {
            *a += w * b;
        }
        z += w * zz;
    }
    (big_y, y, z)
}

impl RidgeInstance {
    /// Feasible triple whose `y` is generally not a critical point: `a^T y`
    /// lies between the inflection point and the local minimum of `g`, and
    /// `Y - y y^T` puts weight `-g'(a^T y) / (3 alpha)` on `a a^T`.
    pub fn feasible_triple(&self, rng: &mut ChaCha8Rng) -> Triple {
        let n = self.p.n();
        let [r1, r2] = self.roots;
        let mid = 0.5 * (r1 + r2);
        let t = mid + (r2 - mid) * rng.gen_range(0.05..=1.0);
        let a = self.basis.column(0).into_owned();
        let mut y = &a * t;
        for j in 1..self.kernel {
            y += self.basis.column(j) * uniform(rng, -3.0, 3.0);
        }
        // g'(t) = 3 alpha (t - r1)(t - r2), so -g'(t) / (3 alpha) = (t - r1)(r2 - t)
        let mut big_y = &y * y.transpose() + &a * a.transpose() * ((t - r1) * (r2 - t));
        for j in 1..n {
            let u = self.basis.column(j);
            big_y += u * u.transpose() * uniform(rng, 0.0, 0.5);
        }
        let y: Vec<f64> = y.iter().copied().collect();
        let z = schur_z(&self.p, &big_y, &y, uniform(rng, 0.0, 0.5)).expect("convex direction");
        (big_y, y, z)
    }
}

pub fn small_psd(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let rank = rng.gen_range(0..=n);
    random_psd(rng, n, rank) * scale
}
