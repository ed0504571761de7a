use serde::{Deserialize, Serialize};

use super::{DiagnosticsError, DiagnosticsRecord};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonitorOptions {
    /// Window length in records.
    pub window: usize,
    /// Entropy decreases below `entropy_rel_tol·|S|` between records are ignored.
    pub entropy_rel_tol: f64,
    /// Increases of the shifted ballistic energy below `ballistic_rel_tol·max(|F|, 1)` are ignored.
    pub ballistic_rel_tol: f64,
    /// Candidate absorbing level for the total energy.
    pub energy_level: Option<f64>,
}

impl Default for MonitorOptions {
    fn default() -> Self {
        MonitorOptions { window: 10, entropy_rel_tol: 1e-8, ballistic_rel_tol: 1e-6, energy_level: None }
    }
}

/// Windowed behaviour of the shifted ballistic energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallisticTrend {
    pub windows: usize,
    /// Windows over which F increased beyond tolerance.
    pub increasing_windows: usize,
    /// Windows over which `ΔF + ∫θ̃σ dt` was positive beyond tolerance.
    pub balance_defects: usize,
    pub max_balance_excess: f64,
    /// Least-squares slope of F over time.
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub records: usize,
    pub ballistic: Option<BallisticTrend>,
    pub entropy_defects: usize,
    /// Largest relative entropy drop between consecutive records (0 when monotone).
    pub worst_entropy_drop: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub energy_max: f64,
    pub energy_min: f64,
    /// Least-squares slope of the total energy over time.
    pub energy_trend: f64,
    /// First time from which the energy stays at or below the level for a full window.
    pub energy_entry_time: Option<f64>,
    /// Whether the energy never left the level again after entering.
    pub energy_stays_below: Option<bool>,
}

fn slope(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let num: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let den: f64 = t.iter().map(|a| (a - tm) * (a - tm)).sum();
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn inequality_monitor(records: &[DiagnosticsRecord], opts: &MonitorOptions) -> Result<MonitorReport, DiagnosticsError> {
    if records.len() < 2 {
        return Err(DiagnosticsError::TooFewRecords(records.len()));
    }
    let w = opts.window.max(1);
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let e: Vec<f64> = records.iter().map(|r| r.e_total).collect();

    let ballistic = records
        .iter()
        .map(|r| Some((r.f_shifted?, r.ballistic_dissipation?)))
        .collect::<Option<Vec<_>>>()
        .map(|fd| {
            let f: Vec<f64> = fd.iter().map(|p| p.0).collect();
            let mut trend = BallisticTrend {
                windows: 0,
                increasing_windows: 0,
                balance_defects: 0,
                max_balance_excess: f64::NEG_INFINITY,
                slope: slope(&t, &f),
            };
            let mut start = 0;
            while start + 1 < records.len() {
                let end = (start + w).min(records.len() - 1);
                let df = f[end] - f[start];
                let diss: f64 = (start..end).map(|i| 0.5 * (fd[i].1 + fd[i + 1].1) * (t[i + 1] - t[i])).sum();
                let tol = opts.ballistic_rel_tol * f[start].abs().max(1.0);
                let excess = df + diss;
                trend.windows += 1;
                trend.increasing_windows += usize::from(df > tol);
                trend.balance_defects += usize::from(excess > tol);
                trend.max_balance_excess = trend.max_balance_excess.max(excess);
                start = end;
            }
            trend
        });

    let mut entropy_defects = 0;
    let mut worst_entropy_drop = 0.0_f64;
    for p in records.windows(2) {
        let (a, b) = (p[0].s_total, p[1].s_total);
        let drop = (a - b) / a.abs().max(f64::MIN_POSITIVE);
        if drop > opts.entropy_rel_tol {
            entropy_defects += 1;
        }
        worst_entropy_drop = worst_entropy_drop.max(drop);
    }

    let (energy_entry_time, energy_stays_below) = match opts.energy_level {
        Some(level) => {
            let entry = (0..e.len()).find(|&k| e[k..(k + w).min(e.len())].iter().all(|&v| v <= level));
            (entry.map(|k| t[k]), Some(entry.is_some_and(|k| e[k..].iter().all(|&v| v <= level))))
        }
        None => (None, None),
    };

    Ok(MonitorReport {
        records: records.len(),
        ballistic,
        entropy_defects,
        worst_entropy_drop,
        energy_initial: e[0],
        energy_final: e[e.len() - 1],
        energy_max: e.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        energy_min: e.iter().copied().fold(f64::INFINITY, f64::min),
        energy_trend: slope(&t, &e),
        energy_entry_time,
        energy_stays_below,
    })
}
