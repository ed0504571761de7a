//! Tabulated entropy function `S(Z)` on logarithmic nodes.
//!
//! `S` is built by integrating `−S'` downward from `Z = +∞` (anchor `S(∞) = 0`)
//! when `−S'` is integrable there; otherwise it is anchored at `S(1) = 0` and the
//! table records that the third-law normalisation is unavailable.

use super::structural::StructuralFunction;

const LN_Z_MIN: f64 = -13.815510557964274; // ln 1e-6
const LN_Z_MAX: f64 = 13.815510557964274; // ln 1e6
const NODES_PER_DECADE: usize = 400;

const GL_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL_W: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

#[derive(Clone, Debug)]
pub struct EntropyTable {
    du: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    tail_exponent: Option<f64>,
}

/// ∫ g(e^u) e^u du over [a, b] with one 4-point Gauss panel.
fn panel(f: &StructuralFunction, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GL_X.iter()
        .zip(GL_W.iter())
        .map(|(x, w)| {
            let u = mid + half * x;
            let z = u.exp();
            w * f.entropy_slope_neg(z) * z
        })
        .sum::<f64>()
        * half
}

impl EntropyTable {
    pub fn build(f: &StructuralFunction) -> Self {
        let decades = ((LN_Z_MAX - LN_Z_MIN) / std::f64::consts::LN_10).round() as usize;
        let n = decades * NODES_PER_DECADE + 1;
        let du = (LN_Z_MAX - LN_Z_MIN) / (n - 1) as f64;
        let rate = |u: f64| {
            let z = u.exp();
            f.entropy_slope_neg(z) * z
        };
        // Local decay exponent of −dS/du at the top of the table.
        let q = (rate(LN_Z_MAX).ln() - rate(LN_Z_MAX - 1.0).ln()) / 1.0;
        let integrable = q < -1e-3;

        let mut values = vec![0.0; n];
        if integrable {
            let mut tail = 0.0;
            let width = 0.25;
            let mut a = LN_Z_MAX;
            while rate(a) > 1e-18 * rate(LN_Z_MAX) && a < LN_Z_MAX + 2000.0 {
                tail += panel(f, a, a + width);
                a += width;
            }
            values[n - 1] = tail;
            for i in (0..n - 1).rev() {
                let a = LN_Z_MIN + i as f64 * du;
                values[i] = values[i + 1] + panel(f, a, a + du);
            }
        } else {
            let i0 = ((0.0 - LN_Z_MIN) / du).round() as usize;
            values[i0] = 0.0;
            for i in (0..i0).rev() {
                let a = LN_Z_MIN + i as f64 * du;
                values[i] = values[i + 1] + panel(f, a, a + du);
            }
            for i in i0 + 1..n {
                let a = LN_Z_MIN + (i - 1) as f64 * du;
                values[i] = values[i - 1] - panel(f, a, a + du);
            }
        }
        let slopes = (0..n).map(|i| -rate(LN_Z_MIN + i as f64 * du)).collect();
        let tail_exponent = if integrable {
            Some(-rate(LN_Z_MAX) / values[n - 1])
        } else {
            None
        };
        EntropyTable { du, values, slopes, tail_exponent }
    }

    /// Whether the table is anchored at `S(∞) = 0`.
    pub fn third_law(&self) -> bool {
        self.tail_exponent.is_some()
    }

    pub fn eval(&self, z: f64) -> f64 {
        let u = z.ln();
        let n = self.values.len();
        if u <= LN_Z_MIN {
            return self.values[0] + self.slopes[0] * (u - LN_Z_MIN);
        }
        if u >= LN_Z_MAX {
            return match self.tail_exponent {
                Some(r) => self.values[n - 1] * (r * (u - LN_Z_MAX)).exp(),
                None => self.values[n - 1] + self.slopes[n - 1] * (u - LN_Z_MAX),
            };
        }
        let s = (u - LN_Z_MIN) / self.du;
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.du, self.slopes[i + 1] * self.du);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1
    }
}
