//! Outage probability and symbol error rate: exact, asymptotic and inverted.

use std::f64::consts::PI;

use crate::model::{derived_constants, Direction, SystemConfig};
use crate::quadrature::integrate;
pub use crate::quadrature::QuadratureSpec;
use crate::specfun::{bessel_k1_scaled, erfc, lower_incomplete_gamma};
use crate::{Error, Result};

/// Constants of a modulation whose conditional SER is `alpha * Q(sqrt(2 beta snr))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Modulation {
    pub alpha: f64,
    pub beta: f64,
    pub name: String,
}

impl Modulation {
    pub fn new(name: impl Into<String>, alpha: f64, beta: f64) -> Result<Self> {
        let m = Modulation {
            alpha,
            beta,
            name: name.into(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn bpsk() -> Self {
        Modulation {
            alpha: 1.0,
            beta: 1.0,
            name: "bpsk".to_owned(),
        }
    }

    /// Looks up a preset by name.
    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "bpsk" => Some(Modulation::bpsk()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha > 0.0 && self.alpha.is_finite() && self.beta > 0.0 && self.beta.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "modulation constants must be positive, got alpha={} beta={}",
                self.alpha, self.beta
            )))
        }
    }
}

/// SNDR threshold `x` (linear) and the link it applies to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageQuery {
    pub x: f64,
    pub dir: Direction,
}

/// Matched-gain outage CDF of one direction with all configuration-dependent
/// constants folded in.
#[derive(Debug, Clone, Copy)]
struct OutageKernel {
    a: f64,
    b: f64,
    c: f64,
    ratio: f64,
    noise_floor: f64,
    omega_i: f64,
    omega_ri: f64,
}

impl OutageKernel {
    fn new(config: &SystemConfig, dir: Direction) -> Result<Self> {
        config.validate()?;
        if !config.is_matched() {
            return Err(Error::Unsupported(
                "closed-form outage requires the relay gain to use the true kappa_r; \
                 use the Monte-Carlo estimators for a mismatched gain"
                    .to_owned(),
            ));
        }
        let k = derived_constants(config, dir);
        let p_i = config.power(dir.receiver());
        let p_ri = config.power(dir.partner());
        Ok(OutageKernel {
            a: k.a,
            b: k.b,
            c: k.c,
            ratio: p_i / p_ri,
            noise_floor: config.noise(dir.receiver()) * config.n3 / (p_ri * config.p3),
            omega_i: config.omega(dir.receiver()),
            omega_ri: config.omega(dir.partner()),
        })
    }

    fn cdf(&self, x: f64) -> f64 {
        let OutageKernel {
            a,
            b,
            c,
            ratio,
            noise_floor,
            omega_i,
            omega_ri,
        } = *self;
        if x <= 0.0 {
            return 0.0;
        }
        let cx = c * x;
        if cx >= 1.0 || !x.is_finite() {
            return 1.0;
        }
        let k = 1.0 - cx;
        let exponent = x / k * (a / omega_ri + b / omega_i) + x * (1.0 + cx) / (k * k) * b / omega_ri * ratio;
        let bessel_sq = ((x + x * x) / (k * k) * noise_floor + x * x / (k * k * k) * b * b * ratio)
            / (omega_i * omega_ri);
        let scale_ln = (cx / k * ratio * omega_i / omega_ri).ln_1p();

        // survival = exp(-E) * (z / D) * K1(z) with z = 2 sqrt(A D), assembled in logs
        let log_survival = if bessel_sq > 0.0 {
            let z = 2.0 * (bessel_sq * scale_ln.exp()).sqrt();
            match bessel_k1_scaled(z) {
                Ok(k1s) => -exponent + z.ln() - scale_ln + k1s.ln() - z,
                Err(_) => f64::NEG_INFINITY,
            }
        } else {
            // z K1(z) -> 1 as z -> 0
            -exponent - scale_ln
        };
        (-log_survival.exp_m1()).clamp(0.0, 1.0)
    }
}

/// Exact outage probability `Pr{SNDR_i <= x}` under Rayleigh fading.
///
/// Returns exactly 1 when `c > 0` and `x >= 1/c`. Requires a matched relay gain.
pub fn outage_probability(config: &SystemConfig, query: OutageQuery) -> Result<f64> {
    if !(query.x >= 0.0) {
        return Err(Error::domain("outage_probability", query.x, "x >= 0"));
    }
    Ok(OutageKernel::new(config, query.dir)?.cdf(query.x))
}

/// High-power outage floor for `P1 = P2 = tau P3 -> infinity`.
pub fn outage_asymptotic(omega_i: f64, omega_ri: f64, c: f64, x: f64) -> f64 {
    if c == 0.0 || x <= 0.0 {
        return 0.0;
    }
    let cx = c * x;
    if cx >= 1.0 {
        return 1.0;
    }
    omega_i * cx / (omega_ri + cx * (omega_i - omega_ri))
}

// (alpha sqrt(beta) / (2 sqrt(pi))) * integral_0^inf e^{-beta x} x^{-1/2} F(x) dx, with
// F = 1 beyond 1/c handled in closed form and x = u^2 below it.
fn ser_from_cdf<F: Fn(f64) -> f64>(cdf: F, c: f64, modulation: &Modulation, quad: &QuadratureSpec) -> Result<f64> {
    let Modulation { alpha, beta, .. } = *modulation;
    let truncation = (50.0 / beta).max(50.0);
    let upper = if c > 0.0 { (1.0 / c).min(truncation) } else { truncation };
    let body = integrate(|u: f64| 2.0 * (-beta * u * u).exp() * cdf(u * u), 0.0, upper.sqrt(), quad)?;
    let tail = if c > 0.0 { 0.5 * alpha * erfc((beta / c).sqrt()) } else { 0.0 };
    let ser = alpha * beta.sqrt() / (2.0 * PI.sqrt()) * body.value + tail;
    Ok(ser.clamp(0.0, 0.5 * alpha))
}

/// Average SER at the receiving terminal of `dir`, by numerical integration of
/// the exact outage CDF.
pub fn ser(config: &SystemConfig, dir: Direction, modulation: &Modulation, quad: &QuadratureSpec) -> Result<f64> {
    modulation.validate()?;
    let kernel = OutageKernel::new(config, dir)?;
    ser_from_cdf(|x| kernel.cdf(x), kernel.c, modulation, quad)
}

fn require_positive_c(function: &'static str, c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(function, c, "c > 0 (ideal hardware has no floor)"))
    }
}

/// High-power SER floor for identical average channel gains `omega1 = omega2`.
pub fn ser_asymptotic(modulation: &Modulation, c: f64) -> Result<f64> {
    modulation.validate()?;
    require_positive_c("ser_asymptotic", c)?;
    let Modulation { alpha, beta, .. } = *modulation;
    let ratio = beta / c;
    let gamma = lower_incomplete_gamma(1.5, ratio)?;
    Ok(alpha * c / (2.0 * beta * PI.sqrt()) * gamma + 0.5 * alpha * erfc(ratio.sqrt()))
}

/// High-power SER floor for arbitrary `omega_i`, `omega_ri`: the SER integral
/// applied to the asymptotic outage CDF. Reduces to [`ser_asymptotic`] when the
/// gains are equal; for unequal gains it has no closed form.
pub fn ser_asymptotic_quadrature(
    omega_i: f64,
    omega_ri: f64,
    modulation: &Modulation,
    c: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    modulation.validate()?;
    require_positive_c("ser_asymptotic_quadrature", c)?;
    for (name, v) in [("omega_i", omega_i), ("omega_ri", omega_ri)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidConfig(format!("{name} must be > 0, got {v}")));
        }
    }
    ser_from_cdf(|x| outage_asymptotic(omega_i, omega_ri, c, x), c, modulation, quad)
}

/// Largest `c` whose high-power outage floor at threshold `x` does not exceed `target_op`.
pub fn invert_impairment_for_op(target_op: f64, x: f64, omega_i: f64, omega_ri: f64) -> Result<f64> {
    if !(target_op > 0.0 && target_op < 1.0) {
        return Err(Error::Infeasible(format!(
            "outage target must lie in (0, 1), got {target_op}"
        )));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain("invert_impairment_for_op", x, "x > 0"));
    }
    if !(omega_i > 0.0 && omega_ri > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "channel gains must be positive, got {omega_i} and {omega_ri}"
        )));
    }
    let denom = x * (omega_i - target_op * (omega_i - omega_ri));
    if !(denom > 0.0) {
        return Err(Error::Infeasible(format!(
            "no finite impairment level reaches outage {target_op}"
        )));
    }
    Ok(target_op * omega_ri / denom)
}

/// The `c` at which the equal-gain SER floor equals `target_ser`, by bisection.
pub fn invert_impairment_for_ser(target_ser: f64, modulation: &Modulation) -> Result<f64> {
    modulation.validate()?;
    let ceiling = 0.5 * modulation.alpha;
    if !(target_ser > 0.0 && target_ser < ceiling) {
        return Err(Error::Infeasible(format!(
            "SER floor target must lie in (0, {ceiling}), got {target_ser}"
        )));
    }
    let floor = |c: f64| ser_asymptotic(modulation, c);

    let mut hi = 1.0;
    while floor(hi)? < target_ser {
        hi *= 2.0;
        if !hi.is_finite() || hi > 1e300 {
            return Err(Error::Infeasible(format!("SER floor target {target_ser} is not reachable")));
        }
    }
    let mut lo = hi;
    while floor(lo)? >= target_ser {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::Infeasible(format!("SER floor target {target_ser} is not reachable")));
        }
    }
    // floor(lo) < target <= floor(hi)
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if floor(mid)? < target_ser {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
