//! Discrete harmonic fields (curl- and divergence-free, homogeneous mixed
//! boundary conditions) and the Poincaré constant on their complement.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::grid::{face_inner, BoundarySpec, FaceField, Grid};

use super::krylov::{dot, norm, pcg, SolverOptions};
use super::sparse::MagneticOperators;
use super::EllipticError;

#[derive(Clone, Debug)]
pub struct HarmonicBasis {
    pub fields: Vec<FaceField>,
    pub gram: Vec<Vec<f64>>,
    /// Smallest singular values of the stacked operator found by the eigensolver.
    pub spectrum_tail: Vec<f64>,
    pub sigma_max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HarmonicSummary {
    pub dimension: usize,
    pub spectrum_tail: Vec<f64>,
    pub sigma_max: f64,
    pub zero_threshold: f64,
}

impl HarmonicBasis {
    pub fn dim(&self) -> usize {
        self.fields.len()
    }
    pub fn empty() -> Self {
        HarmonicBasis { fields: Vec::new(), gram: Vec::new(), spectrum_tail: Vec::new(), sigma_max: 0.0 }
    }
    pub fn summary(&self) -> HarmonicSummary {
        HarmonicSummary {
            dimension: self.dim(),
            spectrum_tail: self.spectrum_tail.clone(),
            sigma_max: self.sigma_max,
            zero_threshold: ZERO_REL * self.sigma_max,
        }
    }
}

const ZERO_REL: f64 = 1e-8;
const GAP: f64 = 1e2;

fn orthonormalize(cols: &mut [Vec<f64>], inner: &dyn Fn(&[f64], &[f64]) -> f64) {
    for _ in 0..2 {
        for i in 0..cols.len() {
            for j in 0..i {
                let r = inner(&cols[i], &cols[j]);
                let (lo, hi) = cols.split_at_mut(i);
                hi[0].iter_mut().zip(&lo[j]).for_each(|(x, y)| *x -= r * y);
            }
            let nrm = inner(&cols[i], &cols[i]).sqrt();
            if nrm > 0.0 {
                cols[i].iter_mut().for_each(|x| *x /= nrm);
            }
        }
    }
}

/// Euclidean orthonormal basis of the span, dropping numerically dependent vectors.
fn orthonormal_span(vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for mut v in vs {
        let n0 = norm(&v);
        if n0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &out {
                let r = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= r * y);
            }
        }
        let n1 = norm(&v);
        if n1 > 1e-8 * n0 {
            v.iter_mut().for_each(|x| *x /= n1);
            out.push(v);
        }
    }
    out
}

fn stacked_apply(ops: &MagneticOperators, x: &[f64], y: &mut [f64], tmp_div: &mut [f64], tmp_curl: &mut [f64]) {
    ops.div.mul(x, tmp_div);
    ops.curl.mul(x, tmp_curl);
    y.iter_mut().for_each(|v| *v = 0.0);
    ops.div.mul_t_add(tmp_div, y);
    ops.curl.mul_t_add(tmp_curl, y);
    ops.pin(y);
}

/// Null space of the stacked (div, curl) operator under the homogeneous conditions
/// of `spec`.
pub fn harmonic_space(grid: &Grid, spec: &BoundarySpec) -> Result<HarmonicBasis, EllipticError> {
    let ops = MagneticOperators::new(grid, spec);
    let n = ops.index.len;
    let mut td = vec![0.0; ops.div.nrows()];
    let mut tc = vec![0.0; ops.curl.nrows()];
    let ata = |x: &[f64], y: &mut [f64], td: &mut [f64], tc: &mut [f64]| stacked_apply(&ops, x, y, td, tc);

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_4a2d);
    // Largest eigenvalue of AᵀA by power iteration.
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ops.pin(&mut v);
    let mut w = vec![0.0; n];
    let mut lam_max = 0.0;
    for _ in 0..60 {
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        ata(&v, &mut w, &mut td, &mut tc);
        lam_max = dot(&v, &w);
        std::mem::swap(&mut v, &mut w);
    }
    let lam_max = lam_max * 1.05;
    let sigma_max = lam_max.sqrt();
    let shift = 1e-3 * lam_max;

    let mut diag = ops.div.normal_diag();
    diag.iter_mut().zip(ops.curl.normal_diag()).for_each(|(d, c)| *d += c + shift);
    let mut k = 4;
    loop {
        let mut cols: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                let mut c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                ops.pin(&mut c);
                c
            })
            .collect();
        let euclid = |a: &[f64], b: &[f64]| dot(a, b);
        orthonormalize(&mut cols, &euclid);
        let mut ritz = vec![0.0; k];
        let mut prev = vec![f64::INFINITY; k];
        for iter in 0..40 {
            for c in cols.iter_mut() {
                let rhs = c.clone();
                let mut x = c.clone();
                let apply = |x: &[f64], y: &mut [f64]| {
                    let mut a = vec![0.0; ops.div.nrows()];
                    let mut b = vec![0.0; ops.curl.nrows()];
                    stacked_apply(&ops, x, y, &mut a, &mut b);
                    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += shift * xi);
                };
                pcg(apply, &diag, &rhs, &mut x, SolverOptions { tol: 1e-11, max_iter: 50_000 }, None)?;
                ops.pin(&mut x);
                *c = x;
            }
            orthonormalize(&mut cols, &euclid);
            // Rayleigh–Ritz with AᵀA.
            let acols: Vec<Vec<f64>> = cols
                .iter()
                .map(|c| {
                    let mut y = vec![0.0; n];
                    ata(c, &mut y, &mut td, &mut tc);
                    y
                })
                .collect();
            let g = DMatrix::from_fn(k, k, |i, j| 0.5 * (dot(&cols[i], &acols[j]) + dot(&cols[j], &acols[i])));
            let eig = SymmetricEigen::new(g);
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
            let rotated: Vec<Vec<f64>> = order
                .iter()
                .map(|&e| {
                    let mut v = vec![0.0; n];
                    for (j, c) in cols.iter().enumerate() {
                        let coef = eig.eigenvectors[(j, e)];
                        v.iter_mut().zip(c).for_each(|(x, y)| *x += coef * y);
                    }
                    v
                })
                .collect();
            cols = rotated;
            // Singular values from ‖A x‖ directly (more accurate near zero).
            for (i, c) in cols.iter().enumerate() {
                ops.div.mul(c, &mut td);
                ops.curl.mul(c, &mut tc);
                ritz[i] = (dot(&td, &td) + dot(&tc, &tc)).sqrt() / norm(c);
            }
            let settled = ritz.iter().zip(&prev).all(|(r, p)| {
                r < &(ZERO_REL * 1e-2 * sigma_max) || (r - p).abs() <= 1e-6 * r.max(1e-300)
            });
            prev = ritz.clone();
            if iter >= 3 && settled {
                break;
            }
        }
        let threshold = ZERO_REL * sigma_max;
        let zeros = ritz.iter().filter(|s| **s < threshold).count();
        if zeros == k {
            k *= 2;
            if k > 64 {
                return Err(EllipticError::AmbiguousSpectrum { tail: ritz });
            }
            continue;
        }
        if ritz.iter().any(|s| *s >= threshold && *s < GAP * threshold) {
            return Err(EllipticError::AmbiguousSpectrum { tail: ritz });
        }
        let mut basis: Vec<Vec<f64>> = cols.into_iter().take(zeros).collect();
        let weighted = |a: &[f64], b: &[f64]| ops.weighted_dot(a, b);
        orthonormalize(&mut basis, &weighted);
        let fields: Vec<FaceField> = basis.iter().map(|b| ops.to_field(grid, b)).collect();
        let gram = fields.iter().map(|a| fields.iter().map(|b| face_inner(grid, a, b)).collect()).collect();
        return Ok(HarmonicBasis { fields, gram, spectrum_tail: ritz, sigma_max });
    }
}

/// Remove the harmonic component of `b` (orthogonal projection in the discrete L² product).
pub fn project_off_harmonic(grid: &Grid, b: &FaceField, basis: &HarmonicBasis) -> FaceField {
    let k = basis.dim();
    if k == 0 {
        return b.clone();
    }
    let g = DMatrix::from_fn(k, k, |i, j| basis.gram[i][j]);
    let rhs = nalgebra::DVector::from_iterator(k, basis.fields.iter().map(|h| face_inner(grid, b, h)));
    let coef = g.lu().solve(&rhs).unwrap_or(rhs);
    let mut out = b.clone();
    for (h, c) in basis.fields.iter().zip(coef.iter()) {
        out.axpy(-c, h);
    }
    out
}

/// Moments `⟨B, h_i⟩`.
pub fn harmonic_moments(grid: &Grid, b: &FaceField, basis: &HarmonicBasis) -> Vec<f64> {
    basis.fields.iter().map(|h| face_inner(grid, b, h)).collect()
}

/// Estimate of the constant in `‖b‖_{H¹} ≤ C ‖curl b‖` over divergence-free fields
/// orthogonal to the harmonic space: `C = λ_min^{-1/2}` for the smallest generalised
/// Rayleigh quotient `‖curl b‖² / ‖b‖²_{H¹}`.
pub fn poincare_constant(grid: &Grid, spec: &BoundarySpec, basis: &HarmonicBasis) -> Result<f64, EllipticError> {
    let ops = MagneticOperators::new(grid, spec);
    let n = ops.index.len;
    let vol = ops.vol;
    let nd = ops.div.nrows();
    let nc = ops.curl.nrows();
    let nf = ops.diff.nrows();
    let hvecs: Vec<Vec<f64>> = basis.fields.iter().map(|f| f.to_vec()).collect();
    let mut h_euclid = hvecs.clone();
    orthonormalize(&mut h_euclid, &|a: &[f64], b: &[f64]| dot(a, b));

    let k_apply = |x: &[f64], y: &mut [f64]| {
        let mut tc = vec![0.0; nc];
        let mut td = vec![0.0; nd];
        ops.curl.mul(x, &mut tc);
        ops.div.mul(x, &mut td);
        y.iter_mut().for_each(|v| *v = 0.0);
        ops.curl.mul_t_add(&tc, y);
        ops.div.mul_t_add(&td, y);
        y.iter_mut().for_each(|v| *v *= vol);
        ops.pin(y);
    };
    let m_apply = |x: &[f64], y: &mut [f64]| {
        let mut tf = vec![0.0; nf];
        ops.diff.mul(x, &mut tf);
        y.iter_mut().zip(x).zip(&ops.weights).for_each(|((yi, xi), w)| *yi = w * xi);
        let mut g = vec![0.0; n];
        ops.diff.mul_t_add(&tf, &mut g);
        y.iter_mut().zip(&g).for_each(|(yi, gi)| *yi += vol * gi);
        ops.pin(y);
    };
    let mut kdiag = ops.curl.normal_diag();
    kdiag.iter_mut().zip(ops.div.normal_diag()).for_each(|(a, b)| *a = (*a + b) * vol);
    kdiag.iter_mut().zip(&ops.free).for_each(|(d, f)| {
        if !f {
            *d = 1.0
        }
    });

    // Projection onto discrete divergence-free fields: x − Dᵀ L⁻¹ D x, L = D Dᵀ.
    let ldiag: Vec<f64> = ops.div.rows.iter().map(|r| r.iter().map(|(_, w)| w * w).sum()).collect();
    let l_singular = {
        // L is singular exactly when no boundary-normal entry is free.
        let ones = vec![1.0; nd];
        let mut y = vec![0.0; n];
        ops.div.mul_t_add(&ones, &mut y);
        norm(&y) < 1e-12 * (nd as f64).sqrt()
    };
    let project_div = |x: &mut Vec<f64>| -> Result<(), EllipticError> {
        let mut dx = vec![0.0; nd];
        ops.div.mul(x, &mut dx);
        if norm(&dx) == 0.0 {
            return Ok(());
        }
        let l_apply = |q: &[f64], y: &mut [f64]| {
            let mut t = vec![0.0; n];
            ops.div.mul_t_add(q, &mut t);
            ops.div.mul(&t, y);
        };
        let mut q = vec![0.0; nd];
        let remove_mean = |v: &mut [f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter_mut().for_each(|x| *x -= m);
        };
        let proj: &dyn Fn(&mut [f64]) = &remove_mean;
        pcg(l_apply, &ldiag, &dx, &mut q, SolverOptions { tol: 1e-12, max_iter: 50_000 }, l_singular.then_some(proj))?;
        let mut t = vec![0.0; n];
        ops.div.mul_t_add(&q, &mut t);
        x.iter_mut().zip(&t).for_each(|(a, b)| *a -= b);
        Ok(())
    };
    let project_h = |x: &mut Vec<f64>| {
        for h in &hvecs {
            let c = ops.weighted_dot(x, h) / ops.weighted_dot(h, h);
            x.iter_mut().zip(h).for_each(|(a, b)| *a -= c * b);
        }
    };
    let project_h_euclid = |x: &mut Vec<f64>| {
        for h in &h_euclid {
            let c = dot(x, h);
            x.iter_mut().zip(h).for_each(|(a, b)| *a -= c * b);
        }
    };

    let k = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(0x90c4_17e1);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ops.pin(&mut c);
        project_div(&mut c)?;
        project_h(&mut c);
        cols.push(c);
    }
    let mut lam_prev = f64::INFINITY;
    let mut prev: Vec<Vec<f64>> = Vec::new();
    let max_iter = 300;
    for iter in 0..max_iter {
        // Locally optimal search space: current Ritz vectors, their inverse-iteration
        // images and the previous Ritz vectors.
        let mut space = Vec::with_capacity(3 * k);
        for c in &cols {
            let mut rhs = vec![0.0; n];
            m_apply(c, &mut rhs);
            project_h_euclid(&mut rhs);
            let mut y = c.clone();
            pcg(k_apply, &kdiag, &rhs, &mut y, SolverOptions { tol: 1e-10, max_iter: 50_000 }, None)?;
            ops.pin(&mut y);
            project_div(&mut y)?;
            project_h(&mut y);
            space.push(y);
        }
        space.extend(cols.iter().cloned());
        space.append(&mut prev);
        let space = orthonormal_span(space);
        let m = space.len();
        let mk: Vec<Vec<f64>> = space
            .iter()
            .map(|c| {
                let mut y = vec![0.0; n];
                m_apply(c, &mut y);
                y
            })
            .collect();
        let curls: Vec<Vec<f64>> = space
            .iter()
            .map(|c| {
                let mut tc = vec![0.0; nc];
                ops.curl.mul(c, &mut tc);
                tc
            })
            .collect();
        let kr = DMatrix::from_fn(m, m, |i, j| vol * dot(&curls[i], &curls[j]));
        let mr = DMatrix::from_fn(m, m, |i, j| 0.5 * (dot(&space[i], &mk[j]) + dot(&space[j], &mk[i])));
        let chol = mr.cholesky().ok_or_else(|| EllipticError::NoConvergence {
            residual: f64::NAN,
            iterations: iter,
            history: vec![],
        })?;
        let linv = chol.l().try_inverse().expect("cholesky factor invertible");
        let reduced = &linv * &kr * linv.transpose();
        let reduced = (&reduced + reduced.transpose()) * 0.5;
        let eig = SymmetricEigen::new(reduced);
        let coeffs = linv.transpose() * &eig.eigenvectors;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
        prev = std::mem::take(&mut cols);
        cols = order
            .iter()
            .take(k)
            .map(|&e| {
                let mut v = vec![0.0; n];
                for (j, c) in space.iter().enumerate() {
                    let coef = coeffs[(j, e)];
                    v.iter_mut().zip(c).for_each(|(x, y)| *x += coef * y);
                }
                v
            })
            .collect();
        let lam = eig.eigenvalues[order[0]];
        if !(lam > 0.0 && lam.is_finite()) {
            return Err(EllipticError::NoConvergence { residual: lam, iterations: iter, history: vec![] });
        }
        if iter > 2 && (lam_prev - lam).abs() <= 1e-9 * lam {
            return Ok(1.0 / lam.sqrt());
        }
        lam_prev = lam;
    }
    Err(EllipticError::NoConvergence { residual: lam_prev, iterations: max_iter, history: vec![] })
}
