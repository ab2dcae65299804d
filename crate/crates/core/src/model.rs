//! System parameters and instantaneous SNDR of two-way AF relaying with an
//! impaired relay.
//!
//! Terminals `T1` and `T2` transmit simultaneously to the relay `R`, which
//! amplifies what it received with a variable gain and broadcasts it back.
//! Each terminal cancels the echo of its own symbol and detects its partner's.
//! Powers and noise variances are linear (watts) throughout.

use crate::{Error, Result};

/// Transmit and receive error-vector-magnitude levels of the relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpairmentPair {
    pub kappa_t: f64,
    pub kappa_r: f64,
}

impl ImpairmentPair {
    pub fn new(kappa_t: f64, kappa_r: f64) -> Result<Self> {
        let pair = ImpairmentPair { kappa_t, kappa_r };
        pair.validate()?;
        Ok(pair)
    }

    pub const IDEAL: ImpairmentPair = ImpairmentPair {
        kappa_t: 0.0,
        kappa_r: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        for (name, k) in [("kappa_t", self.kappa_t), ("kappa_r", self.kappa_r)] {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be finite and >= 0, got {k}")));
            }
        }
        Ok(())
    }

    /// Single EVM level with the same total distortion power, `sqrt(kt^2 + kr^2)`.
    ///
    /// Impairments at the terminals can be folded into the relay levels by this
    /// reinterpretation; they are not modelled separately.
    pub fn aggregate(&self) -> f64 {
        self.kappa_t.hypot(self.kappa_r)
    }

    /// The severity constant `c = kt^2 + kr^2 + kt^2 kr^2`; `1/c` is the SNDR ceiling.
    pub fn c(&self) -> f64 {
        let t2 = self.kappa_t * self.kappa_t;
        let r2 = self.kappa_r * self.kappa_r;
        t2 + r2 + t2 * r2
    }

    pub fn is_ideal(&self) -> bool {
        self.kappa_t == 0.0 && self.kappa_r == 0.0
    }
}

/// Receiving terminal of a link. `T1` detects the symbol of `T2` and vice versa.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    T1,
    T2,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::T1, Direction::T2];

    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Direction::T1),
            2 => Ok(Direction::T2),
            other => Err(Error::InvalidConfig(format!("direction must be 1 or 2, got {other}"))),
        }
    }

    /// Index of the receiving terminal.
    pub fn receiver(self) -> usize {
        match self {
            Direction::T1 => 1,
            Direction::T2 => 2,
        }
    }

    /// Index of the terminal whose symbol is detected.
    pub fn partner(self) -> usize {
        match self {
            Direction::T1 => 2,
            Direction::T2 => 1,
        }
    }

    /// Picks `(value at receiver, value at partner)` from a per-terminal pair.
    pub fn select<T: Copy>(self, first: T, second: T) -> (T, T) {
        match self {
            Direction::T1 => (first, second),
            Direction::T2 => (second, first),
        }
    }
}

/// Full parameterization of the two-way link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub relay: ImpairmentPair,
    /// Receive EVM the relay believes it has when setting its gain. `None` means
    /// the gain uses the true `relay.kappa_r`.
    pub assumed_kappa_r: Option<f64>,
}

impl SystemConfig {
    /// Unit noise everywhere, `P1 = P2 = 2 P3 = p1` and the given channel gains.
    pub fn symmetric(p1: f64, omega1: f64, omega2: f64, relay: ImpairmentPair) -> Self {
        SystemConfig {
            p1,
            p2: p1,
            p3: 0.5 * p1,
            n1: 1.0,
            n2: 1.0,
            n3: 1.0,
            omega1,
            omega2,
            relay,
            assumed_kappa_r: None,
        }
    }

    pub fn with_powers(mut self, p1: f64, p2: f64, p3: f64) -> Self {
        self.p1 = p1;
        self.p2 = p2;
        self.p3 = p3;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("p1", self.p1),
            ("p2", self.p2),
            ("p3", self.p3),
            ("n1", self.n1),
            ("n2", self.n2),
            ("n3", self.n3),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        self.relay.validate()?;
        if let Some(k) = self.assumed_kappa_r {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "assumed kappa_r must be finite and >= 0, got {k}"
                )));
            }
        }
        Ok(())
    }

    pub fn power(&self, terminal: usize) -> f64 {
        match terminal {
            1 => self.p1,
            2 => self.p2,
            _ => self.p3,
        }
    }

    pub fn noise(&self, terminal: usize) -> f64 {
        match terminal {
            1 => self.n1,
            2 => self.n2,
            _ => self.n3,
        }
    }

    pub fn omega(&self, terminal: usize) -> f64 {
        if terminal == 1 {
            self.omega1
        } else {
            self.omega2
        }
    }

    /// Receive EVM used inside the relaying gain.
    pub fn gain_kappa_r(&self) -> f64 {
        self.assumed_kappa_r.unwrap_or(self.relay.kappa_r)
    }

    /// True when the relay sets its gain with its actual receive EVM.
    pub fn is_matched(&self) -> bool {
        self.assumed_kappa_r.map_or(true, |k| k == self.relay.kappa_r)
    }

    pub fn c(&self) -> f64 {
        self.relay.c()
    }
}

/// Per-direction constants of the closed-form SNDR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// `a_i = N3 (1 + kt^2) / P_{r_i}`, `b_i = N_i (1 + kr^2) / P3` and the shared `c`.
pub fn derived_constants(config: &SystemConfig, dir: Direction) -> DerivedConstants {
    let kt2 = config.relay.kappa_t * config.relay.kappa_t;
    let kr2 = config.relay.kappa_r * config.relay.kappa_r;
    DerivedConstants {
        a: config.n3 / config.power(dir.partner()) * (1.0 + kt2),
        b: config.noise(dir.receiver()) / config.p3 * (1.0 + kr2),
        c: config.relay.c(),
    }
}

/// Variable relaying gain for instantaneous channel gains `rho1 = |h1|^2`, `rho2 = |h2|^2`.
///
/// Uses the assumed receive EVM when one is configured.
pub fn relaying_gain(config: &SystemConfig, rho1: f64, rho2: f64) -> f64 {
    let kr = config.gain_kappa_r();
    let received = (rho1 * config.p1 + rho2 * config.p2) * (1.0 + kr * kr) + config.n3;
    (config.p3 / received).sqrt()
}

/// Instantaneous SNDR at the receiving terminal of `dir`.
///
/// With a matched gain this is the closed form [`sndr_closed_form`]; under a
/// gain mismatch it goes through the explicit gain ([`sndr_via_gain`]).
pub fn sndr(config: &SystemConfig, dir: Direction, rho1: f64, rho2: f64) -> f64 {
    if config.is_matched() {
        sndr_closed_form(config, dir, rho1, rho2)
    } else {
        sndr_via_gain(config, dir, rho1, rho2, relaying_gain(config, rho1, rho2))
    }
}

/// SNDR after self-interference cancellation for an arbitrary relaying gain `gain`.
pub fn sndr_via_gain(config: &SystemConfig, dir: Direction, rho1: f64, rho2: f64, gain: f64) -> f64 {
    let (rho_i, rho_ri) = dir.select(rho1, rho2);
    let kt2 = config.relay.kappa_t * config.relay.kappa_t;
    let kr2 = config.relay.kappa_r * config.relay.kappa_r;
    let relay_signal = rho1 * config.p1 + rho2 * config.p2;
    let signal = rho_i * rho_ri * config.power(dir.partner());
    let relay_noise = rho_i * (config.n3 + kr2 * relay_signal);
    let terminal_noise = (rho_i * kt2 * config.p3 + config.noise(dir.receiver())) / (gain * gain);
    signal / (relay_noise + terminal_noise)
}

/// Matched-gain SNDR written through [`DerivedConstants`]:
///
/// ```text
///                              rho_i rho_ri
/// ---------------------------------------------------------------------------------
/// rho_i^2 (P_i/P_ri) c + rho_i rho_ri c + rho_ri b_i + rho_i (a_i + (P_i/P_ri) b_i) + N_i N3/(P_ri P3)
/// ```
pub fn sndr_closed_form(config: &SystemConfig, dir: Direction, rho1: f64, rho2: f64) -> f64 {
    let DerivedConstants { a, b, c } = derived_constants(config, dir);
    let (rho_i, rho_ri) = dir.select(rho1, rho2);
    let p_i = config.power(dir.receiver());
    let p_ri = config.power(dir.partner());
    let ratio = p_i / p_ri;
    let noise_floor = config.noise(dir.receiver()) * config.n3 / (p_ri * config.p3);
    let product = rho_i * rho_ri;
    let denom = rho_i * rho_i * ratio * c
        + product * c
        + rho_ri * b
        + rho_i * (a + ratio * b)
        + noise_floor;
    product / denom
}

fn require_positive_c(function: &'static str, c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(function, c, "c > 0 (no finite limit under ideal hardware)"))
    }
}

/// High-power limit of the SNDR, `rho_ri / ((rho1 + rho2) c)`. Independent of the
/// power ratio `tau`.
pub fn sndr_asymptotic(dir: Direction, rho1: f64, rho2: f64, c: f64) -> Result<f64> {
    require_positive_c("sndr_asymptotic", c)?;
    let sum = rho1 + rho2;
    if !(sum > 0.0) {
        return Err(Error::domain("sndr_asymptotic", sum, "rho1 + rho2 > 0"));
    }
    let (_, rho_ri) = dir.select(rho1, rho2);
    Ok(rho_ri / (sum * c))
}

/// Power-independent upper bound `1/c` on the SNDR.
pub fn sndr_ceiling(c: f64) -> Result<f64> {
    require_positive_c("sndr_ceiling", c)?;
    Ok(1.0 / c)
}

/// Power scaling `P1 = P2 = tau * P3` of the high-power regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighPowerRegime {
    pub tau: f64,
}

impl HighPowerRegime {
    pub fn new(tau: f64) -> Result<Self> {
        if tau > 0.0 && tau.is_finite() {
            Ok(HighPowerRegime { tau })
        } else {
            Err(Error::InvalidConfig(format!("tau must be finite and > 0, got {tau}")))
        }
    }
}

/// Limit of [`relaying_gain`] as all powers grow with `P1 = P2 = tau P3`.
pub fn relaying_gain_asymptotic(regime: HighPowerRegime, rho1: f64, rho2: f64, kappa_r: f64) -> f64 {
    (1.0 / (regime.tau * (rho1 + rho2) * (1.0 + kappa_r * kappa_r))).sqrt()
}

/// Splits a total EVM budget `kappa_t + kappa_r = kappa_tot` evenly, which
/// minimizes `c` over all splits with the same sum.
pub fn optimal_split(kappa_tot: f64) -> Result<ImpairmentPair> {
    if !(kappa_tot > 0.0 && kappa_tot.is_finite()) {
        return Err(Error::domain("optimal_split", kappa_tot, "kappa_tot > 0"));
    }
    ImpairmentPair::new(0.5 * kappa_tot, 0.5 * kappa_tot)
}

/// Equal EVM level `kappa` with `c = 2 kappa^2 + kappa^4`.
pub fn equal_split_for_c(c: f64) -> Result<f64> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::domain("equal_split_for_c", c, "c >= 0"));
    }
    // kappa^2 = sqrt(1 + c) - 1, written without cancellation
    Ok((c / ((1.0 + c).sqrt() + 1.0)).sqrt())
}
