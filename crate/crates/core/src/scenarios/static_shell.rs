//! Radial steady conduction between two concentric spheres, and the field
//! `∇M × ∇θ` whose non-vanishing rules out a static state in a rotating frame.
//!
//! With `s = 1/r` the flux condition `(r² κ(θ) θ')' = 0` becomes
//! `(κ(θ) θ_s)_s = 0`, which is discretized on a uniform `s` grid and solved by
//! Newton's method with a tridiagonal Jacobian. For constant `κ` the discrete
//! solution is exact (θ is affine in `1/r`).

use serde::{Deserialize, Serialize};

use super::ScenarioError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellParams {
    pub r1: f64,
    pub r2: f64,
    pub theta_int: f64,
    pub theta_ext: f64,
    pub omega: [f64; 3],
    /// Gravity `M = gbar / r + ½|ω×x|²`.
    pub gbar: f64,
    pub kappa0: f64,
    /// `κ = κ0 (1 + θ^β)` when set; constant `κ0` otherwise.
    pub beta: Option<f64>,
    /// Radial nodes including both walls.
    pub nodes: usize,
    /// Polar samples per quarter turn on each shell; azimuth uses four times as many.
    pub polar_samples: usize,
}

impl Default for ShellParams {
    fn default() -> Self {
        ShellParams {
            r1: 1.0,
            r2: 2.0,
            theta_int: 2.0,
            theta_ext: 1.0,
            omega: [0.0, 0.0, 1.0],
            gbar: 1.0,
            kappa0: 1.0,
            beta: None,
            nodes: 201,
            polar_samples: 32,
        }
    }
}

impl ShellParams {
    fn kappa(&self, theta: f64) -> (f64, f64) {
        match self.beta {
            None => (self.kappa0, 0.0),
            Some(b) => (self.kappa0 * (1.0 + theta.powf(b)), self.kappa0 * b * theta.powf(b - 1.0)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellProfile {
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    pub dtheta_dr: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticShell {
    pub params: ShellParams,
    pub profile: ShellProfile,
    pub newton_iterations: usize,
    pub max_obstruction: f64,
    /// Sample point where the maximum is attained.
    pub argmax: [f64; 3],
    /// `|B| |ω|² / (2 r1)` with `θ = A + B/r`; only for constant conductivity.
    pub closed_form: Option<f64>,
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = diag[0];
    c[0] = sup[0] / d;
    rhs[0] /= d;
    for i in 1..n {
        d = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / d } else { 0.0 };
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / d;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

pub fn static_shell(p: &ShellParams) -> Result<StaticShell, ScenarioError> {
    let bad = |field: &str, message: &str| ScenarioError::Config { field: field.into(), message: message.into() };
    if !(p.r1 > 0.0 && p.r2 > p.r1 && p.r2.is_finite()) {
        return Err(bad("r1/r2", "need 0 < r1 < r2"));
    }
    if !(p.theta_int > p.theta_ext && p.theta_ext > 0.0 && p.theta_int.is_finite()) {
        return Err(bad("theta_int/theta_ext", "need theta_int > theta_ext > 0"));
    }
    if !(p.kappa0 > 0.0) || p.nodes < 3 || p.polar_samples < 2 {
        return Err(bad("kappa0/nodes/polar_samples", "need kappa0 > 0, nodes >= 3, polar_samples >= 2"));
    }
    let n = p.nodes - 1;
    let (s1, s2) = (1.0 / p.r1, 1.0 / p.r2);
    let ds = (s2 - s1) / n as f64;
    let s: Vec<f64> = (0..=n).map(|i| s1 + ds * i as f64).collect();
    let mut theta: Vec<f64> =
        (0..=n).map(|i| p.theta_int + (p.theta_ext - p.theta_int) * i as f64 / n as f64).collect();
    let flux = |th: &[f64], i: usize| {
        let (k, dk) = p.kappa(0.5 * (th[i] + th[i + 1]));
        let g = (th[i + 1] - th[i]) / ds;
        (k * g, 0.5 * dk * g - k / ds, 0.5 * dk * g + k / ds)
    };
    let mut iterations = 0;
    let scale = p.theta_int;
    loop {
        let m = n - 1;
        let (mut sub, mut diag, mut sup, mut res) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        let mut rnorm = 0.0_f64;
        for j in 0..m {
            let i = j + 1;
            let (fr, dr_l, dr_r) = flux(&theta, i);
            let (fl, dl_l, dl_r) = flux(&theta, i - 1);
            res[j] = -(fr - fl);
            rnorm = rnorm.max(res[j].abs());
            diag[j] = dr_l - dl_r;
            sup[j] = dr_r;
            sub[j] = -dl_l;
        }
        if m == 0 {
            break;
        }
        thomas(&sub, &diag, &sup, &mut res);
        let step = res.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        for j in 0..m {
            theta[j + 1] += res[j];
        }
        iterations += 1;
        if theta.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(ScenarioError::NoConvergence { what: "static shell Newton".into(), iterations, residual: rnorm });
        }
        if step <= 1e-14 * scale {
            break;
        }
        if iterations >= 100 {
            return Err(ScenarioError::NoConvergence { what: "static shell Newton".into(), iterations, residual: rnorm });
        }
    }
    let phi = (0..n).map(|i| flux(&theta, i).0).sum::<f64>() / n as f64;
    let r: Vec<f64> = s.iter().map(|v| 1.0 / v).collect();
    let dtheta_dr: Vec<f64> = (0..=n).map(|i| -s[i] * s[i] * phi / p.kappa(theta[i]).0).collect();

    let w = p.omega;
    let (np, na) = (2 * p.polar_samples, 4 * p.polar_samples);
    let mut best = (0.0_f64, [0.0; 3]);
    for i in 0..=n {
        for a in 0..=np {
            let pol = std::f64::consts::PI * a as f64 / np as f64;
            for b in 0..na {
                let az = 2.0 * std::f64::consts::PI * b as f64 / na as f64;
                let x = [r[i] * pol.sin() * az.cos(), r[i] * pol.sin() * az.sin(), r[i] * pol.cos()];
                let r3 = r[i] * r[i] * r[i];
                let wx = w[0] * x[0] + w[1] * x[1] + w[2] * x[2];
                let w2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
                let grad_m: [f64; 3] = std::array::from_fn(|k| -p.gbar * x[k] / r3 + w2 * x[k] - wx * w[k]);
                let grad_t: [f64; 3] = std::array::from_fn(|k| dtheta_dr[i] * x[k] / r[i]);
                let c = [
                    grad_m[1] * grad_t[2] - grad_m[2] * grad_t[1],
                    grad_m[2] * grad_t[0] - grad_m[0] * grad_t[2],
                    grad_m[0] * grad_t[1] - grad_m[1] * grad_t[0],
                ];
                let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                if norm > best.0 {
                    best = (norm, x);
                }
            }
        }
    }
    let closed_form = p.beta.is_none().then(|| {
        let bcoef = (p.theta_int - p.theta_ext) / (1.0 / p.r1 - 1.0 / p.r2);
        let w2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
        bcoef.abs() * w2 / (2.0 * p.r1)
    });
    Ok(StaticShell {
        params: p.clone(),
        profile: ShellProfile { r, theta, dtheta_dr },
        newton_iterations: iterations,
        max_obstruction: best.0,
        argmax: best.1,
        closed_form,
    })
}
