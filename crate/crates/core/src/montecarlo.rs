//! Monte-Carlo estimators that check the closed forms independently.
//!
//! Samples are split into a fixed number of chunks. Chunk `j` draws from a
//! ChaCha8 stream seeded with the user seed and positioned on stream `j`, so the
//! result depends only on `(seed, n_samples, n_chunks)` and not on how rayon
//! schedules the chunks. Tallies are merged in chunk order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::analytic::{Modulation, OutageQuery};
use crate::model::{relaying_gain, sndr, sndr_asymptotic, Direction, SystemConfig};
use crate::specfun::gaussian_q;
use crate::{Error, Result};

/// Random stream used by every estimator.
pub type SampleRng = ChaCha8Rng;

pub const DEFAULT_SAMPLES: u64 = 1_000_000;
/// Default chunk count. Fixed rather than tied to the thread count so that
/// results do not change with the machine.
pub const DEFAULT_CHUNKS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_samples: u64,
    pub seed: u64,
    pub n_chunks: u32,
    /// Two-sided confidence level of the reported interval.
    pub confidence: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_samples: DEFAULT_SAMPLES,
            seed: 0,
            n_chunks: DEFAULT_CHUNKS,
            confidence: 0.95,
        }
    }
}

impl McConfig {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        McConfig {
            n_samples,
            seed,
            ..McConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidConfig("n_samples must be >= 1".to_owned()));
        }
        if self.n_chunks == 0 {
            return Err(Error::InvalidConfig("n_chunks must be >= 1".to_owned()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        Ok(())
    }

    fn chunks(&self) -> u64 {
        u64::from(self.n_chunks).min(self.n_samples)
    }

    fn chunk_len(&self, chunk: u64) -> u64 {
        let chunks = self.chunks();
        self.n_samples / chunks + u64::from(chunk < self.n_samples % chunks)
    }
}

/// Random stream for one chunk.
pub fn chunk_rng(seed: u64, chunk: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// A Monte-Carlo estimate with its confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Binomial standard deviation of a proportion estimate around `p`.
    pub fn binomial_sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.n_samples as f64).sqrt()
    }
}

/// Upper-tail standard normal quantile: the `z` with `Q(z) = tail`.
pub fn normal_upper_quantile(tail: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gaussian_q(mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

fn proportion_estimate(successes: u64, mc: &McConfig) -> McEstimate {
    let z = normal_upper_quantile(0.5 * (1.0 - mc.confidence));
    let (ci_low, ci_high) = wilson_interval(successes, mc.n_samples, z);
    McEstimate {
        mean: successes as f64 / mc.n_samples as f64,
        ci_low,
        ci_high,
        n_samples: mc.n_samples,
        seed: mc.seed,
    }
}

/// Runs `body` once per chunk on its own stream and returns the results in chunk order.
fn run_chunks<T, F>(mc: &McConfig, body: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut SampleRng, u64) -> T + Sync,
{
    (0..mc.chunks())
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(mc.seed, chunk);
            body(&mut rng, mc.chunk_len(chunk))
        })
        .collect()
}

fn count_chunks<F>(mc: &McConfig, hit: F) -> u64
where
    F: Fn(&mut SampleRng) -> bool + Sync,
{
    run_chunks(mc, |rng, len| (0..len).filter(|_| hit(rng)).count() as u64)
        .into_iter()
        .sum()
}

/// Independent exponential channel gains `|h1|^2`, `|h2|^2` with means `omega1`, `omega2`.
pub fn sample_channel_gains<R: Rng + ?Sized>(rng: &mut R, omega1: f64, omega2: f64) -> (f64, f64) {
    let e1: f64 = rng.sample(Exp1);
    let e2: f64 = rng.sample(Exp1);
    (omega1 * e1, omega2 * e2)
}

/// Circularly-symmetric complex Gaussian sample with the given variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(scale * re, scale * im)
}

/// Estimates `Pr{SNDR_i <= x}` from per-realization SNDR values. Honors a gain mismatch.
pub fn mc_outage(config: &SystemConfig, query: OutageQuery, mc: &McConfig) -> Result<McEstimate> {
    config.validate()?;
    mc.validate()?;
    let OutageQuery { x, dir } = query;
    let hits = count_chunks(mc, |rng| {
        let (rho1, rho2) = sample_channel_gains(rng, config.omega1, config.omega2);
        sndr(config, dir, rho1, rho2) <= x
    });
    Ok(proportion_estimate(hits, mc))
}

/// Estimates the high-power outage `Pr{rho_ri / ((rho1 + rho2) c) <= x}`.
pub fn mc_outage_asymptotic(
    omega1: f64,
    omega2: f64,
    dir: Direction,
    c: f64,
    x: f64,
    mc: &McConfig,
) -> Result<McEstimate> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::domain("mc_outage_asymptotic", c, "c > 0"));
    }
    mc.validate()?;
    let hits = count_chunks(mc, |rng| {
        let (rho1, rho2) = sample_channel_gains(rng, omega1, omega2);
        // a zero sum only arises from underflow; the SNDR is then zero
        sndr_asymptotic(dir, rho1, rho2, c).map_or(true, |s| s <= x)
    });
    Ok(proportion_estimate(hits, mc))
}

/// Estimates `E[alpha Q(sqrt(2 beta SNDR_i))]` over the fading distribution.
pub fn mc_ser_expectation(
    config: &SystemConfig,
    dir: Direction,
    modulation: &Modulation,
    mc: &McConfig,
) -> Result<McEstimate> {
    config.validate()?;
    modulation.validate()?;
    mc.validate()?;
    let Modulation { alpha, beta, .. } = *modulation;
    let sums = run_chunks(mc, |rng, len| {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..len {
            let (rho1, rho2) = sample_channel_gains(rng, config.omega1, config.omega2);
            let v = alpha * gaussian_q((2.0 * beta * sndr(config, dir, rho1, rho2)).sqrt());
            sum += v;
            sum_sq += v * v;
        }
        (sum, sum_sq)
    });
    let (sum, sum_sq) = sums
        .into_iter()
        .fold((0.0, 0.0), |(s, q), (cs, cq)| (s + cs, q + cq));
    let n = mc.n_samples as f64;
    let mean = sum / n;
    let variance = if mc.n_samples > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    let z = normal_upper_quantile(0.5 * (1.0 - mc.confidence));
    let half = z * (variance / n).sqrt();
    let top = 0.5 * alpha;
    Ok(McEstimate {
        mean,
        ci_low: (mean - half).clamp(0.0, mean),
        ci_high: (mean + half).clamp(mean, top.max(mean)),
        n_samples: mc.n_samples,
        seed: mc.seed,
    })
}

/// One draw of the complete two-slot signal chain for a BPSK exchange.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalRealization {
    pub h1: Complex64,
    pub h2: Complex64,
    pub s1: Complex64,
    pub s2: Complex64,
    pub eta_3r: Complex64,
    pub eta_3t: Complex64,
    pub nu1: Complex64,
    pub nu2: Complex64,
    pub nu3: Complex64,
    /// Superposition received by the relay in the first slot.
    pub y3: Complex64,
    pub gain: f64,
    /// Sample at the receiving terminal after its own echo was subtracted.
    pub y_i: Complex64,
}

impl SignalRealization {
    /// Draws Rayleigh channels and then the rest of the chain.
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, config: &SystemConfig, dir: Direction) -> Self {
        let h1 = complex_gaussian(rng, config.omega1);
        let h2 = complex_gaussian(rng, config.omega2);
        Self::draw_given_channels(rng, config, dir, h1, h2)
    }

    /// Draws symbols and noises for fixed channel coefficients.
    pub fn draw_given_channels<R: Rng + ?Sized>(
        rng: &mut R,
        config: &SystemConfig,
        dir: Direction,
        h1: Complex64,
        h2: Complex64,
    ) -> Self {
        let bpsk = |rng: &mut R, power: f64| {
            let amplitude = power.sqrt();
            Complex64::new(if rng.random::<bool>() { amplitude } else { -amplitude }, 0.0)
        };
        let s1 = bpsk(rng, config.p1);
        let s2 = bpsk(rng, config.p2);
        let (rho1, rho2) = (h1.norm_sqr(), h2.norm_sqr());
        let kr = config.relay.kappa_r;
        let kt = config.relay.kappa_t;

        let eta_3r = complex_gaussian(rng, kr * kr * (rho1 * config.p1 + rho2 * config.p2));
        let nu3 = complex_gaussian(rng, config.n3);
        let y3 = h1 * s1 + h2 * s2 + eta_3r + nu3;

        let gain = relaying_gain(config, rho1, rho2);
        let eta_3t = complex_gaussian(rng, kt * kt * config.p3);
        let nu1 = complex_gaussian(rng, config.n1);
        let nu2 = complex_gaussian(rng, config.n2);

        let (h_i, s_i, nu_i) = match dir {
            Direction::T1 => (h1, s1, nu1),
            Direction::T2 => (h2, s2, nu2),
        };
        let received = h_i * (gain * y3 + eta_3t) + nu_i;
        let y_i = received - gain * h_i * h_i * s_i;

        SignalRealization {
            h1,
            h2,
            s1,
            s2,
            eta_3r,
            eta_3t,
            nu1,
            nu2,
            nu3,
            y3,
            gain,
            y_i,
        }
    }

    /// Coherent BPSK decision on the partner's symbol; true when it is wrong.
    pub fn is_symbol_error(&self, dir: Direction) -> bool {
        let composite = self.gain * self.h1 * self.h2;
        let s_ri = match dir {
            Direction::T1 => self.s2,
            Direction::T2 => self.s1,
        };
        let statistic = (composite.conj() * self.y_i).re;
        (statistic >= 0.0) != (s_ri.re > 0.0)
    }
}

/// BPSK symbol error rate from a full signal-level simulation with
/// self-interference cancellation and coherent detection.
pub fn mc_ser_signal_level(config: &SystemConfig, dir: Direction, mc: &McConfig) -> Result<McEstimate> {
    config.validate()?;
    mc.validate()?;
    let errors = count_chunks(mc, |rng| SignalRealization::draw(rng, config, dir).is_symbol_error(dir));
    Ok(proportion_estimate(errors, mc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ImpairmentPair;

    #[test]
    fn chunk_lengths_cover_all_samples() {
        let mc = McConfig {
            n_samples: 1003,
            n_chunks: 10,
            ..McConfig::default()
        };
        let total: u64 = (0..mc.chunks()).map(|c| mc.chunk_len(c)).sum();
        assert_eq!(total, 1003);
        let tiny = McConfig {
            n_samples: 3,
            ..McConfig::default()
        };
        assert_eq!(tiny.chunks(), 3);
    }

    #[test]
    fn golden_first_draws() {
        let mut rng = chunk_rng(0, 0);
        let first: [u64; 2] = [rng.random(), rng.random()];
        let mut again = chunk_rng(0, 0);
        assert_eq!(first, [again.random::<u64>(), again.random::<u64>()]);
        assert_eq!(first, GOLDEN_SEED0_STREAM0);
        let mut other = chunk_rng(0, 1);
        assert_ne!(first[0], other.random::<u64>());
    }

    const GOLDEN_SEED0_STREAM0: [u64; 2] = [13_080_132_717_333_068_652, 8_594_738_769_458_413_623];

    #[test]
    fn wilson_contains_estimate() {
        for (k, n) in [(0u64, 10u64), (10, 10), (3, 10), (500, 1000)] {
            let (lo, hi) = wilson_interval(k, n, 1.96);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0);
        }
        assert_eq!(wilson_interval(0, 100, 1.96).0, 0.0);
        assert_eq!(wilson_interval(100, 100, 1.96).1, 1.0);
    }

    #[test]
    fn quantile_of_95_percent() {
        assert!((normal_upper_quantile(0.025) - 1.959_963_984_540_054).abs() < 1e-9);
    }

    #[test]
    fn validation_errors() {
        let cfg = SystemConfig::symmetric(10.0, 1.0, 1.0, ImpairmentPair::IDEAL);
        let q = OutageQuery { x: 1.0, dir: Direction::T1 };
        assert!(mc_outage(&cfg, q, &McConfig::new(0, 1)).is_err());
        let bad = McConfig {
            confidence: 1.0,
            ..McConfig::new(10, 1)
        };
        assert!(mc_outage(&cfg, q, &bad).is_err());
        assert!(mc_outage_asymptotic(1.0, 1.0, Direction::T1, 0.0, 1.0, &McConfig::new(10, 1)).is_err());
    }

    #[test]
    fn zero_threshold_has_no_outage() {
        let cfg = SystemConfig::symmetric(10.0, 2.0, 1.0, ImpairmentPair::new(0.1, 0.1).unwrap());
        let est = mc_outage(&cfg, OutageQuery { x: 0.0, dir: Direction::T1 }, &McConfig::new(20_000, 3)).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.ci_low, 0.0);
    }
}
