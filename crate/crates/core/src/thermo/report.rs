use serde::Serialize;

use super::{EosModel, TransportModel};

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisEntry {
    pub id: &'static str,
    pub description: &'static str,
    pub passed: bool,
    /// Smallest (normalised) slack observed; negative means violated.
    pub worst_margin: f64,
    pub detail: String,
}

/// Constants measured on the sampled range rather than asserted.
#[derive(Clone, Debug, Serialize)]
pub struct MeasuredConstants {
    /// `min`/`max` of `p / (ρ^{5/3} + θ⁴)`; the upper bound uses `ρ^{5/3} + θ⁴ + 1`.
    pub pressure_lower: f64,
    pub pressure_upper: f64,
    /// `min`/`max` of `ρe / p`.
    pub energy_pressure_min: f64,
    pub energy_pressure_max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub entries: Vec<HypothesisEntry>,
    pub constants: MeasuredConstants,
    pub all_passed: bool,
}

impl HypothesisReport {
    pub fn entry(&self, id: &str) -> Option<&HypothesisEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

fn entry(id: &'static str, description: &'static str, margin: f64, detail: String) -> HypothesisEntry {
    HypothesisEntry { id, description, passed: margin > 0.0 && margin.is_finite(), worst_margin: margin, detail }
}

/// Evaluate every structural and transport hypothesis on the sample lattices.
pub fn hypothesis_report(
    eos: &EosModel,
    transport: &TransportModel,
    z_grid: &[f64],
    theta_grid: &[f64],
) -> HypothesisReport {
    let f = eos.structural();
    let mut entries = Vec::new();

    // P(0) = 0, P' > 0.
    let p0 = f.value(0.0).abs();
    let min_dp = z_grid.iter().chain(std::iter::once(&0.0)).map(|&z| f.derivative(z)).fold(f64::INFINITY, f64::min);
    let margin = if p0 == 0.0 { min_dp } else { -p0 };
    entries.push(entry("P_monotone", "P(0) = 0 and P'(Z) > 0", margin, format!("|P(0)| = {p0:e}, min P' = {min_dp:e}")));

    let min_stab = z_grid.iter().map(|&z| f.stability_margin(z)).fold(f64::INFINITY, f64::min);
    entries.push(entry(
        "P_stability",
        "(5/3 P(Z) − P'(Z) Z)/Z > 0",
        min_stab,
        format!("min over {} samples = {min_stab:e}", z_grid.len()),
    ));

    // P/Z^{5/3} decreasing towards p_inf > 0.
    let mut zs: Vec<f64> = z_grid.iter().copied().filter(|z| *z > 0.0).collect();
    zs.sort_by(f64::total_cmp);
    let ratio = |z: f64| f.value(z) / z.powf(5.0 / 3.0);
    let p_inf = f.p_inf();
    let mut worst_decrease = f64::INFINITY;
    for w in zs.windows(2) {
        let (r0, r1) = (ratio(w[0]), ratio(w[1]));
        worst_decrease = worst_decrease.min((r0 - r1) / r0.abs().max(1e-300));
    }
    let above = zs.iter().map(|&z| ratio(z) - p_inf).fold(f64::INFINITY, f64::min);
    let margin = p_inf.min(if worst_decrease >= 0.0 && above >= 0.0 { p_inf } else { -1.0 });
    entries.push(entry(
        "degenerate_limit",
        "P(Z)/Z^{5/3} decreases to p_inf > 0",
        margin,
        format!("p_inf = {p_inf:e}, min relative step decrease = {worst_decrease:e}, min ratio − p_inf = {above:e}"),
    ));

    // Thermodynamic stability by finite differences.
    let mut min_dpdr = f64::INFINITY;
    let mut min_dedt = f64::INFINITY;
    let mut p_lo = f64::INFINITY;
    let mut p_hi = 0.0_f64;
    let mut ep_lo = f64::INFINITY;
    let mut ep_hi = 0.0_f64;
    let mut min_rho_s = f64::INFINITY;
    for &theta in theta_grid {
        for &z in z_grid {
            let rho = z * theta.powf(1.5);
            let h = 1e-6;
            let dp = (eos.pressure_raw(rho * (1.0 + h), theta) - eos.pressure_raw(rho * (1.0 - h), theta)) / (2.0 * h * rho);
            let de = (eos.energy_density_raw(rho, theta * (1.0 + h)) / rho
                - eos.energy_density_raw(rho, theta * (1.0 - h)) / rho)
                / (2.0 * h * theta);
            min_dpdr = min_dpdr.min(dp / (eos.pressure_raw(rho, theta) / rho));
            min_dedt = min_dedt.min(de / (eos.energy_density_raw(rho, theta) / (rho * theta)));
            let p = eos.pressure_raw(rho, theta);
            let scale = rho.powf(5.0 / 3.0) + theta.powi(4);
            p_lo = p_lo.min(p / scale);
            p_hi = p_hi.max(p / (scale + 1.0));
            let ep = eos.energy_density_raw(rho, theta) / p;
            ep_lo = ep_lo.min(ep);
            ep_hi = ep_hi.max(ep);
            min_rho_s = min_rho_s.min(eos.entropy_density_raw(rho, theta));
        }
    }
    entries.push(entry(
        "thermo_stability",
        "∂p/∂ρ > 0 and ∂e/∂θ > 0 (relative, finite differences)",
        min_dpdr.min(min_dedt),
        format!("min ρ∂ρp/p = {min_dpdr:e}, min θ∂θe/e = {min_dedt:e}"),
    ));
    entries.push(entry(
        "pressure_bounds",
        "ρ^{5/3} + θ⁴ ≲ p ≲ ρ^{5/3} + θ⁴ + 1 with finite measured constants",
        if p_lo > 0.0 && p_hi.is_finite() { p_lo } else { -1.0 },
        format!("p/(ρ^(5/3)+θ⁴) ≥ {p_lo:e}, p/(ρ^(5/3)+θ⁴+1) ≤ {p_hi:e}"),
    ));
    entries.push(entry(
        "energy_pressure_band",
        "ρe and p comparable (ρe/p in a bounded band)",
        if ep_lo > 0.0 && ep_hi.is_finite() { ep_lo } else { -1.0 },
        format!("ρe/p ∈ [{ep_lo:e}, {ep_hi:e}]"),
    ));

    // Third law: S(Z) → 0 monotonically.
    let mut worst_mono = f64::INFINITY;
    for w in zs.windows(2) {
        let (s0, s1) = (eos.structural_entropy(w[0]), eos.structural_entropy(w[1]));
        worst_mono = worst_mono.min(s0 - s1);
    }
    let s_far = eos.structural_entropy(1e12);
    let third = if !eos.table().third_law() {
        -1.0
    } else if worst_mono >= 0.0 && (0.0..1e-2).contains(&s_far) {
        eos.structural_entropy(zs.last().copied().unwrap_or(1.0)).max(f64::MIN_POSITIVE)
    } else {
        -s_far.abs()
    };
    entries.push(entry(
        "third_law",
        "S(Z) → 0 monotonically as Z → ∞",
        third,
        format!("anchored at infinity: {}, S(1e12) = {s_far:e}, min step decrease = {worst_mono:e}", eos.table().third_law()),
    ));
    entries.push(entry(
        "entropy_nonnegative",
        "ρs ≥ 0 on the sampled states",
        if min_rho_s >= 0.0 { min_rho_s.max(f64::MIN_POSITIVE) } else { min_rho_s },
        format!("min ρs = {min_rho_s:e}"),
    ));

    // Transport bounds.
    let b = transport.bounds();
    let mut m_mu = f64::INFINITY;
    let mut m_eta = f64::INFINITY;
    let mut m_kappa = f64::INFINITY;
    let mut m_zeta = f64::INFINITY;
    let mut max_deriv = 0.0_f64;
    for &theta in theta_grid {
        let lin = 1.0 + theta;
        let pw = 1.0 + theta.powf(transport.beta);
        let mu = transport.mu(theta);
        m_mu = m_mu.min((mu - b.mu_lo * lin).min(b.mu_hi * lin - mu) / lin);
        let eta = transport.eta(theta);
        // η may vanish identically; only the upper bound carries a strict margin.
        m_eta = m_eta.min(if eta >= 0.0 { (b.eta_hi * lin - eta) / lin } else { eta / lin });
        let kappa = transport.kappa(theta);
        m_kappa = m_kappa.min((kappa - b.kappa_lo * pw).min(b.kappa_hi * pw - kappa) / pw);
        let zeta = transport.zeta(theta);
        m_zeta = m_zeta.min((zeta - b.zeta_lo * lin).min(b.zeta_hi * lin - zeta) / lin);
        let h = 1e-6 * theta.max(1e-3);
        let dmu = ((transport.mu(theta + h) - transport.mu(theta - h)) / (2.0 * h)).abs();
        let dzeta = ((transport.zeta(theta + h) - transport.zeta(theta - h)) / (2.0 * h)).abs();
        max_deriv = max_deriv.max(dmu).max(dzeta);
    }
    entries.push(entry("viscosity_bounds", "mu_lo(1+θ) ≤ μ ≤ mu_hi(1+θ)", m_mu, format!("min normalised slack {m_mu:e}")));
    entries.push(entry("bulk_viscosity_bounds", "0 ≤ η ≤ eta_hi(1+θ)", m_eta, format!("min normalised slack {m_eta:e}")));
    entries.push(entry(
        "derivative_bounds",
        "|μ'|, |ζ'| bounded on the sampled range",
        b.derivative_max - max_deriv,
        format!("max |μ'|,|ζ'| = {max_deriv:e} vs admissible {:e}", b.derivative_max),
    ));
    entries.push(entry(
        "conductivity_bounds",
        "kappa_lo(1+θ^β) ≤ κ ≤ kappa_hi(1+θ^β)",
        m_kappa,
        format!("min normalised slack {m_kappa:e}"),
    ));
    entries.push(entry(
        "conductivity_exponent",
        "β > 6",
        transport.beta - 6.0,
        format!("β = {}", transport.beta),
    ));
    entries.push(entry("resistivity_bounds", "zeta_lo(1+θ) ≤ ζ ≤ zeta_hi(1+θ)", m_zeta, format!("min normalised slack {m_zeta:e}")));

    let all_passed = entries.iter().all(|e| e.passed);
    HypothesisReport {
        entries,
        constants: MeasuredConstants {
            pressure_lower: p_lo,
            pressure_upper: p_hi,
            energy_pressure_min: ep_lo,
            energy_pressure_max: ep_hi,
        },
        all_passed,
    }
}

/// Log-spaced sample lattices: `Z ∈ [1e-4, 1e4]` (81 points) and `θ ∈ [1e-2, 1e2]` (41 points).
pub fn default_lattices() -> (Vec<f64>, Vec<f64>) {
    let logspace = |a: f64, b: f64, n: usize| -> Vec<f64> {
        (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
    };
    (logspace(-4.0, 4.0, 81), logspace(-2.0, 2.0, 41))
}

#[derive(Clone, Debug, Serialize)]
pub struct GibbsSample {
    pub rho: f64,
    pub theta: f64,
    /// `|θ ∂s/∂θ − ∂e/∂θ|` and `|θ ∂s/∂ρ − (∂e/∂ρ − p/ρ²)|`.
    pub residual: [f64; 2],
    /// The same, divided by the magnitude of the terms being balanced.
    pub relative: [f64; 2],
}

/// Gibbs-relation residuals, absolute and relative, on the 5×5 product of `ρ, θ ∈ {0.1, 0.5, 1, 2, 10}`.
pub fn gibbs_samples(eos: &EosModel, h: f64) -> Result<Vec<GibbsSample>, super::ThermoError> {
    let values = [0.1, 0.5, 1.0, 2.0, 10.0];
    let mut out = Vec::with_capacity(25);
    for &rho in &values {
        for &theta in &values {
            let residual = eos.gibbs_residual(rho, theta, h)?;
            let e = |r: f64, t: f64| eos.energy_density_raw(r, t) / r;
            let de_dt = (e(rho, theta * (1.0 + h)) - e(rho, theta * (1.0 - h))) / (2.0 * h * theta);
            let de_dr = (e(rho * (1.0 + h), theta) - e(rho * (1.0 - h), theta)) / (2.0 * h * rho);
            let p_term = eos.pressure_raw(rho, theta) / (rho * rho);
            // θ∂s balances ∂e (and ∂e − p/ρ²), so these set the scale.
            let relative = [residual[0] / de_dt.abs(), residual[1] / (de_dr.abs() + p_term)];
            out.push(GibbsSample { rho, theta, residual, relative });
        }
    }
    Ok(out)
}
