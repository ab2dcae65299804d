//! Reference computations shared by the integration tests. Nothing here calls
//! the code paths it is used to check.
#![allow(dead_code)]

use std::collections::BTreeMap;

/// Rows of `tests/data/specfun_oracle.csv`, keyed by function name.
pub fn specfun_table() -> BTreeMap<String, Vec<(f64, f64)>> {
    let text = include_str!("../data/specfun_oracle.csv");
    let mut table: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for line in text.lines().skip(1) {
        let mut fields = line.split(',');
        let name = fields.next().unwrap().to_owned();
        let x: f64 = fields.next().unwrap().parse().unwrap();
        let v: f64 = fields.next().unwrap().parse().unwrap();
        table.entry(name).or_default().push((x, v));
    }
    table
}

/// `exp(z) K1(z) = ∫₀^∞ exp(-z (cosh t - 1)) cosh t dt` by the trapezoidal rule,
/// which converges geometrically for this integrand.
pub fn k1_scaled_trapezoid(z: f64) -> f64 {
    let h = (0.25 / z.sqrt()).min(0.02);
    let f = |t: f64| {
        let s = (0.5 * t).sinh();
        (-2.0 * z * s * s).exp() * t.cosh()
    };
    let mut sum = 0.5 * f(0.0);
    let mut k = 1;
    loop {
        let term = f(k as f64 * h);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
        k += 1;
    }
    h * sum
}

/// Composite Gauss–Legendre (5 points per panel) on `[a, b]` with `panels` panels.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    const NODES: [f64; 5] = [
        0.0,
        0.538_469_310_105_683_1,
        -0.538_469_310_105_683_1,
        0.906_179_845_938_664,
        -0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = a + (p as f64 + 0.5) * width;
            let half = 0.5 * width;
            NODES
                .iter()
                .zip(WEIGHTS)
                .map(|(&x, w)| w * f(mid + half * x))
                .sum::<f64>()
                * half
        })
        .sum()
}

/// Small deterministic generator for randomized test inputs.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed)
    }

    /// splitmix64 output mapped to [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn log_range(&mut self, lo: f64, hi: f64) -> f64 {
        (self.range(lo.ln(), hi.ln())).exp()
    }
}

pub fn rel_err(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        value.abs()
    } else {
        ((value - reference) / reference).abs()
    }
}
