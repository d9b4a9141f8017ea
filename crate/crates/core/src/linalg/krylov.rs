//! Jacobi-preconditioned Krylov solvers behind a common trait, looked up
//! by name.

use std::fmt::Debug;
use std::sync::Arc;

use super::sparse::{dot, norm, SparseOperator};
use crate::error::{Result, VppError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub rtol: f64,
    pub max_iter: usize,
}

impl SolverConfig {
    pub fn new(rtol: f64, max_iter: usize) -> Result<Self> {
        let cfg = SolverConfig { rtol, max_iter };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return Err(VppError::param("rtol", "must lie in (0, 1)"));
        }
        if self.max_iter == 0 {
            return Err(VppError::param("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

pub trait KrylovMethod: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// Solves `op x = rhs` in place, starting from the incoming `x`.
    /// Converged when `||op x - rhs|| <= rtol ||rhs||`.
    fn solve(
        &self,
        op: &SparseOperator,
        rhs: &[f64],
        x: &mut [f64],
        cfg: &SolverConfig,
    ) -> Result<SolveStats>;
}

fn jacobi(op: &SparseOperator) -> Vec<f64> {
    op.diagonal()
        .into_iter()
        .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect()
}

fn residual(op: &SparseOperator, rhs: &[f64], x: &[f64], r: &mut [f64]) {
    op.apply_into(x, r);
    for (ri, bi) in r.iter_mut().zip(rhs) {
        *ri = bi - *ri;
    }
}

// Trivial right-hand side: the exact solution is zero.
fn zero_rhs(x: &mut [f64]) -> SolveStats {
    x.iter_mut().for_each(|v| *v = 0.0);
    SolveStats {
        iterations: 0,
        relative_residual: 0.0,
    }
}

/// Preconditioned conjugate gradients, for symmetric positive definite operators.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConjugateGradient;

impl KrylovMethod for ConjugateGradient {
    fn name(&self) -> &'static str {
        "cg"
    }

    fn solve(
        &self,
        op: &SparseOperator,
        rhs: &[f64],
        x: &mut [f64],
        cfg: &SolverConfig,
    ) -> Result<SolveStats> {
        let n = rhs.len();
        let bnorm = norm(rhs);
        if bnorm == 0.0 {
            return Ok(zero_rhs(x));
        }
        let target = cfg.rtol * bnorm;
        let minv = jacobi(op);
        let mut r = vec![0.0; n];
        residual(op, rhs, x, &mut r);
        let mut rnorm = norm(&r);
        if rnorm <= target {
            return Ok(SolveStats {
                iterations: 0,
                relative_residual: rnorm / bnorm,
            });
        }
        let mut z: Vec<f64> = r.iter().zip(&minv).map(|(a, m)| a * m).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        for it in 1..=cfg.max_iter {
            op.apply_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 || !pap.is_finite() {
                return Err(VppError::NonConvergence {
                    method: "cg",
                    achieved: rnorm / bnorm,
                    target: cfg.rtol,
                    iterations: it,
                });
            }
            let alpha = rz / pap;
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            rnorm = norm(&r);
            if rnorm <= target {
                // confirm against the true residual
                residual(op, rhs, x, &mut r);
                rnorm = norm(&r);
                if rnorm <= target {
                    return Ok(SolveStats {
                        iterations: it,
                        relative_residual: rnorm / bnorm,
                    });
                }
            }
            for k in 0..n {
                z[k] = r[k] * minv[k];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        Err(VppError::NonConvergence {
            method: "cg",
            achieved: rnorm / bnorm,
            target: cfg.rtol,
            iterations: cfg.max_iter,
        })
    }
}

/// Right-preconditioned BiCGSTAB, for general nonsymmetric operators.
#[derive(Debug, Clone, Copy, Default)]
pub struct BiCgStab;

impl KrylovMethod for BiCgStab {
    fn name(&self) -> &'static str {
        "bicgstab"
    }

    fn solve(
        &self,
        op: &SparseOperator,
        rhs: &[f64],
        x: &mut [f64],
        cfg: &SolverConfig,
    ) -> Result<SolveStats> {
        let n = rhs.len();
        let bnorm = norm(rhs);
        if bnorm == 0.0 {
            return Ok(zero_rhs(x));
        }
        let target = cfg.rtol * bnorm;
        let minv = jacobi(op);
        let mut r = vec![0.0; n];
        residual(op, rhs, x, &mut r);
        let mut rnorm = norm(&r);
        if rnorm <= target {
            return Ok(SolveStats {
                iterations: 0,
                relative_residual: rnorm / bnorm,
            });
        }
        let mut r_hat = r.clone();
        let mut rho = 1.0;
        let mut alpha = 1.0;
        let mut omega = 1.0;
        let mut v = vec![0.0; n];
        let mut p = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut z = vec![0.0; n];
        let mut s = vec![0.0; n];
        let mut t = vec![0.0; n];
        let fail = |achieved: f64, it: usize| VppError::NonConvergence {
            method: "bicgstab",
            achieved,
            target: cfg.rtol,
            iterations: it,
        };
        let mut restarts = 0;
        let mut it = 0;
        while it < cfg.max_iter {
            it += 1;
            let rho_new = dot(&r_hat, &r);
            if rho_new.abs() < 1e-300 || !rho_new.is_finite() {
                // breakdown: restart from the current residual
                if restarts > 10 {
                    return Err(fail(rnorm / bnorm, it));
                }
                restarts += 1;
                residual(op, rhs, x, &mut r);
                r_hat.copy_from_slice(&r);
                rho = 1.0;
                alpha = 1.0;
                omega = 1.0;
                v.iter_mut().for_each(|e| *e = 0.0);
                p.iter_mut().for_each(|e| *e = 0.0);
                continue;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for k in 0..n {
                p[k] = r[k] + beta * (p[k] - omega * v[k]);
                y[k] = minv[k] * p[k];
            }
            op.apply_into(&y, &mut v);
            let rv = dot(&r_hat, &v);
            if rv == 0.0 || !rv.is_finite() {
                return Err(fail(rnorm / bnorm, it));
            }
            alpha = rho / rv;
            for k in 0..n {
                s[k] = r[k] - alpha * v[k];
            }
            if norm(&s) <= target {
                for k in 0..n {
                    x[k] += alpha * y[k];
                }
                residual(op, rhs, x, &mut r);
                rnorm = norm(&r);
                if rnorm <= target {
                    return Ok(SolveStats {
                        iterations: it,
                        relative_residual: rnorm / bnorm,
                    });
                }
                continue;
            }
            for k in 0..n {
                z[k] = minv[k] * s[k];
            }
            op.apply_into(&z, &mut t);
            let tt = dot(&t, &t);
            omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
            for k in 0..n {
                x[k] += alpha * y[k] + omega * z[k];
                r[k] = s[k] - omega * t[k];
            }
            rnorm = norm(&r);
            if rnorm <= target {
                residual(op, rhs, x, &mut r);
                rnorm = norm(&r);
                if rnorm <= target {
                    return Ok(SolveStats {
                        iterations: it,
                        relative_residual: rnorm / bnorm,
                    });
                }
            }
            if omega == 0.0 {
                return Err(fail(rnorm / bnorm, it));
            }
        }
        Err(fail(rnorm / bnorm, cfg.max_iter))
    }
}

pub const KRYLOV_METHODS: &[&str] = &["cg", "bicgstab"];

pub fn krylov_method(name: &str) -> Result<Arc<dyn KrylovMethod>> {
    match name {
        "cg" => Ok(Arc::new(ConjugateGradient)),
        "bicgstab" => Ok(Arc::new(BiCgStab)),
        other => Err(VppError::UnknownStrategy {
            kind: "linear solver",
            name: other.to_string(),
            available: KRYLOV_METHODS.join(", "),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::OperatorBuilder;

    fn tridiag(n: usize, lo: f64, d: f64, hi: f64) -> SparseOperator {
        let mut b = OperatorBuilder::new(n);
        for r in 0..n {
            let mut row = vec![(r, d)];
            if r > 0 {
                row.push((r - 1, lo));
            }
            if r + 1 < n {
                row.push((r + 1, hi));
            }
            b.push_row(row);
        }
        b.finish().unwrap()
    }

    #[test]
    fn zero_rhs_returns_zero_without_iterating() {
        let a = tridiag(10, -1.0, 3.0, -1.0);
        let cfg = SolverConfig::new(1e-10, 100).unwrap();
        for m in KRYLOV_METHODS {
            let mut x = vec![1.0; 10];
            let st = krylov_method(m)
                .unwrap()
                .solve(&a, &[0.0; 10], &mut x, &cfg)
                .unwrap();
            assert_eq!(st.iterations, 0);
            assert!(x.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn identity_solves_in_one_iteration() {
        let a = SparseOperator::identity(7);
        let b: Vec<f64> = (0..7).map(|k| k as f64 - 2.5).collect();
        let cfg = SolverConfig::new(1e-12, 10).unwrap();
        for m in KRYLOV_METHODS {
            let mut x = vec![0.0; 7];
            let st = krylov_method(m)
                .unwrap()
                .solve(&a, &b, &mut x, &cfg)
                .unwrap();
            assert!(st.iterations <= 1);
            assert_eq!(x, b);
        }
    }

    #[test]
    fn nonsymmetric_system_with_bicgstab() {
        let a = tridiag(50, -1.3, 4.0, -0.4);
        let xs: Vec<f64> = (0..50).map(|k| (k as f64 * 0.3).sin()).collect();
        let b = a.apply(&xs);
        let mut x = vec![0.0; 50];
        let cfg = SolverConfig::new(1e-12, 500).unwrap();
        BiCgStab.solve(&a, &b, &mut x, &cfg).unwrap();
        for (p, q) in x.iter().zip(&xs) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn non_convergence_reports_residual() {
        let a = tridiag(200, -1.0, 2.0, -1.0);
        let b = vec![1.0; 200];
        let mut x = vec![0.0; 200];
        let cfg = SolverConfig::new(1e-14, 3).unwrap();
        match ConjugateGradient.solve(&a, &b, &mut x, &cfg) {
            Err(VppError::NonConvergence {
                achieved,
                iterations,
                ..
            }) => {
                assert_eq!(iterations, 3);
                assert!(achieved > 1e-14);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0.0, 10).is_err());
        assert!(SolverConfig::new(1.0, 10).is_err());
        assert!(SolverConfig::new(1e-8, 0).is_err());
        assert!(krylov_method("gmres").is_err());
    }
}
