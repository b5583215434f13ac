//! Sparsifier quality: preconditioned conjugate gradient on `L_G x = b` with
//! the sparsifier Laplacian `L_P` as preconditioner, plus a dense relative
//! condition number for small pairs.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sprs::FillInReduction;
use sprs_ldl::{Ldl, LdlNumeric};

use crate::error::{Error, Result};
use crate::graph::Laplacian;

pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Largest vertex count accepted by [`relative_condition_number`].
pub const DENSE_LIMIT: usize = 2000;

/// Pivots below this fraction of the largest diagonal entry count as zero.
const PIVOT_RTOL: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn remove_mean(x: &mut [f64]) {
    if x.is_empty() {
        return;
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    for v in x {
        *v -= mean;
    }
}

/// Direct solver for a Laplacian restricted to zero-sum vectors.
///
/// Row and column `ground` are removed and the remaining positive-definite
/// matrix is factored as `L D L^T` under a reverse Cuthill-McKee ordering.
pub struct Preconditioner {
    ground: usize,
    n: usize,
    factor: Option<LdlNumeric<f64, usize>>,
}

impl Preconditioner {
    pub fn new(lp: &Laplacian, ground: usize) -> Result<Self> {
        let n = lp.n();
        if ground >= n {
            return Err(Error::Validation(format!("ground vertex {ground} out of range for {n} vertices")));
        }
        if !lp.is_connected() {
            return Err(Error::Factorization(
                "sparsifier Laplacian is singular after grounding (sparsifier is disconnected)".into(),
            ));
        }
        if n == 1 {
            return Ok(Preconditioner { ground, n, factor: None });
        }
        let a = lp.grounded_csr(ground);
        let factor = Ldl::new()
            .fill_in_reduction(FillInReduction::ReverseCuthillMcKee)
            .numeric(a.view())
            .map_err(|e| Error::Factorization(e.to_string()))?;
        let scale = lp.diagonal().into_iter().fold(0.0f64, f64::max);
        if let Some(i) = factor.d().iter().position(|&d| !(d > PIVOT_RTOL * scale)) {
            return Err(Error::Factorization(format!("pivot {i} of the grounded sparsifier is not positive")));
        }
        Ok(Preconditioner {
            ground,
            n,
            factor: Some(factor),
        })
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solves `L_P z = r` for zero-sum `r`; the result is zero-sum.
    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        assert_eq!(r.len(), self.n);
        let Some(factor) = &self.factor else {
            return vec![0.0; self.n];
        };
        let rhs: Vec<f64> = r
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != self.ground)
            .map(|(_, &x)| x)
            .collect();
        let y: Vec<f64> = factor.solve(&rhs[..]);
        let mut z = Vec::with_capacity(self.n);
        z.extend_from_slice(&y[..self.ground]);
        z.push(0.0);
        z.extend_from_slice(&y[self.ground..]);
        remove_mean(&mut z);
        z
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// `||L_G x - b|| / ||b||` at the last iterate, recomputed from scratch.
    pub final_relative_residual: f64,
    /// Relative residual after each iteration.
    pub residual_history: Vec<f64>,
}

/// Preconditioned conjugate gradient for `lg x = b`.
///
/// A right-hand side that does not sum to zero is projected first, with a
/// warning. Convergence is judged on the true residual after every
/// iteration; hitting `max_iter` gives a report with `converged = false`.
pub fn pcg_solve(lg: &Laplacian, b: &[f64], m: &Preconditioner, tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolveReport)> {
    let n = lg.n();
    if b.len() != n || m.n() != n {
        return Err(Error::Validation(format!(
            "dimension mismatch: system {n}, rhs {}, preconditioner {}",
            b.len(),
            m.n()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Validation(format!("tolerance must be positive, got {tol}")));
    }
    let mut b = b.to_vec();
    let sum: f64 = b.iter().sum();
    if sum.abs() > 1e-10 * (1.0 + norm(&b)) {
        log::warn!("right-hand side sums to {sum:e}; projecting onto zero-sum vectors");
        remove_mean(&mut b);
    }

    let mut x = vec![0.0; n];
    let b_norm = norm(&b);
    let mut report = SolveReport {
        iterations: 0,
        converged: true,
        final_relative_residual: 0.0,
        residual_history: Vec::new(),
    };
    if b_norm == 0.0 {
        return Ok((x, report));
    }
    report.final_relative_residual = 1.0;
    if tol >= 1.0 {
        return Ok((x, report));
    }

    let mut r = b.clone();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut lx = vec![0.0; n];
    let mut rho_prev = 0.0;
    report.converged = false;
    for k in 0..max_iter {
        let z = m.apply(&r);
        let rho = dot(&r, &z);
        let beta = if k == 0 { 0.0 } else { rho / rho_prev };
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        lg.mul_vec(&p, &mut q);
        let step = rho / dot(&p, &q);
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * q[i];
        }
        remove_mean(&mut x);
        rho_prev = rho;

        lg.mul_vec(&x, &mut lx);
        let res = lx.iter().zip(&b).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt() / b_norm;
        report.residual_history.push(res);
        report.iterations = k + 1;
        report.final_relative_residual = res;
        if res <= tol {
            report.converged = true;
            break;
        }
        if !step.is_finite() {
            log::warn!("PCG broke down at iteration {}", k + 1);
            break;
        }
    }
    if !report.converged {
        log::warn!(
            "PCG stopped after {} iterations at relative residual {:e}",
            report.iterations,
            report.final_relative_residual
        );
    }
    Ok((x, report))
}

/// Deterministic zero-sum right-hand side of unit norm.
pub fn make_rhs(n: usize, seed: u64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Validation(format!("right-hand side needs at least 2 entries, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    remove_mean(&mut b);
    let s = norm(&b);
    for v in &mut b {
        *v /= s;
    }
    Ok(b)
}

/// Extreme generalized eigenvalues `(λ_min, λ_max)` of the pencil
/// `(L_G, L_P)` on zero-sum vectors, computed densely.
pub fn generalized_eigen_range(lg: &Laplacian, lp: &Laplacian) -> Result<(f64, f64)> {
    let n = lg.n();
    if lp.n() != n {
        return Err(Error::Validation(format!("vertex counts differ: {n} vs {}", lp.n())));
    }
    if n > DENSE_LIMIT {
        return Err(Error::Capability(format!(
            "dense condition number limited to {DENSE_LIMIT} vertices, got {n}"
        )));
    }
    if !lg.is_connected() || !lp.is_connected() {
        return Err(Error::Connectivity("condition number needs connected graphs".into()));
    }
    if n < 2 {
        return Err(Error::Validation("condition number needs at least 2 vertices".into()));
    }
    // Grounding one vertex leaves the nonzero spectrum of the pencil intact.
    let ground = |m: DMatrix<f64>| m.remove_row(0).remove_column(0);
    let a = ground(lg.to_dense());
    let bmat = ground(lp.to_dense());
    let chol = bmat
        .cholesky()
        .ok_or_else(|| Error::Factorization("grounded sparsifier Laplacian is not positive definite".into()))?;
    let c = chol.l();
    let y = c
        .solve_lower_triangular(&a)
        .ok_or_else(|| Error::Factorization("singular Cholesky factor".into()))?;
    let s = c
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::Factorization("singular Cholesky factor".into()))?;
    let s = (&s + s.transpose()) * 0.5;
    let eig = s.symmetric_eigenvalues();
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Relative condition number `κ(L_G, L_P) = λ_max / λ_min`.
pub fn relative_condition_number(lg: &Laplacian, lp: &Laplacian) -> Result<f64> {
    let (lo, hi) = generalized_eigen_range(lg, lp)?;
    Ok(hi / lo)
}
