//! Matrix-free Krylov solvers.

use serde::Serialize;

use super::EllipticError;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SolverOptions {
    /// Relative residual tolerance.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, max_iter: 20_000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final relative residual (recomputed from the operator, not the recurrence).
    pub residual: f64,
    pub history: Vec<f64>,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned conjugate gradients for SPD (or consistent semidefinite)
/// systems. `project` is applied to the right-hand side and every search direction,
/// which handles constant null spaces.
pub fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    opts: SolverOptions,
    project: Option<&dyn Fn(&mut [f64])>,
) -> Result<SolveStats, EllipticError> {
    let n = b.len();
    let mut rhs = b.to_vec();
    if let Some(p) = project {
        p(&mut rhs);
        p(x);
    }
    let bnorm = norm(&rhs);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats { iterations: 0, residual: 0.0, history: vec![0.0] });
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for i in 0..n {
        r[i] = rhs[i] - r[i];
    }
    let precond = |r: &[f64], z: &mut [f64]| {
        for i in 0..n {
            z[i] = if diag[i] != 0.0 { r[i] / diag[i] } else { r[i] };
        }
        if let Some(p) = project {
            p(z);
        }
    };
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut history = vec![norm(&r) / bnorm];
    let mut it = 0;
    while it < opts.max_iter && *history.last().unwrap() > opts.tol {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        it += 1;
        history.push(norm(&r) / bnorm);
    }
    if let Some(pr) = project {
        pr(x);
    }
    // Verify by substitution.
    apply(x, &mut r);
    for i in 0..n {
        r[i] = rhs[i] - r[i];
    }
    let residual = norm(&r) / bnorm;
    if residual > opts.tol * 10.0 {
        return Err(EllipticError::NoConvergence { residual, iterations: it, history });
    }
    Ok(SolveStats { iterations: it, residual, history })
}

/// Preconditioned MINRES for symmetric indefinite systems with an SPD diagonal
/// preconditioner `diag`.
pub fn minres(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    opts: SolverOptions,
) -> Result<SolveStats, EllipticError> {
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats { iterations: 0, residual: 0.0, history: vec![0.0] });
    }
    let minv = |v: &[f64], z: &mut [f64]| {
        for i in 0..n {
            z[i] = v[i] / diag[i];
        }
    };
    let mut v_prev = vec![0.0; n];
    let mut v = vec![0.0; n];
    apply(x, &mut v);
    for i in 0..n {
        v[i] = b[i] - v[i];
    }
    let mut z = vec![0.0; n];
    minv(&v, &mut z);
    let mut gamma = dot(&z, &v).sqrt();
    let gamma0 = gamma;
    let mut gamma_prev = 1.0;
    let mut eta = gamma;
    let (mut s_prev, mut s) = (0.0, 0.0);
    let (mut c_prev, mut c) = (1.0, 1.0);
    let mut w_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut az = vec![0.0; n];
    let mut v_next = vec![0.0; n];
    let mut z_next = vec![0.0; n];
    let mut history = vec![1.0];
    let mut it = 0;
    while it < opts.max_iter && gamma > 0.0 {
        for zi in z.iter_mut() {
            *zi /= gamma;
        }
        apply(&z, &mut az);
        let delta = dot(&az, &z);
        for i in 0..n {
            v_next[i] = az[i] - (delta / gamma) * v[i] - (gamma / gamma_prev) * v_prev[i];
        }
        minv(&v_next, &mut z_next);
        let gamma_next = dot(&z_next, &v_next).max(0.0).sqrt();
        let a0 = c * delta - c_prev * s * gamma;
        let a1 = (a0 * a0 + gamma_next * gamma_next).sqrt();
        let a2 = s * delta + c_prev * c * gamma;
        let a3 = s_prev * gamma;
        let c_next = a0 / a1;
        let s_next = gamma_next / a1;
        for i in 0..n {
            let wn = (z[i] - a3 * w_prev[i] - a2 * w[i]) / a1;
            w_prev[i] = w[i];
            w[i] = wn;
            x[i] += c_next * eta * wn;
        }
        eta *= -s_next;
        it += 1;
        history.push(eta.abs() / gamma0);
        std::mem::swap(&mut v_prev, &mut v);
        std::mem::swap(&mut v, &mut v_next);
        std::mem::swap(&mut z, &mut z_next);
        gamma_prev = gamma;
        gamma = gamma_next;
        c_prev = c;
        c = c_next;
        s_prev = s;
        s = s_next;
        if eta.abs() <= opts.tol * gamma0 * 1e-2 {
            break;
        }
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let residual = norm(&r) / bnorm;
    if residual > opts.tol {
        return Err(EllipticError::NoConvergence { residual, iterations: it, history });
    }
    Ok(SolveStats { iterations: it, residual, history })
}
