//! Scalar special functions used by the closed-form expressions.
//!
//! Everything here is a pure function of `f64` arguments. Inputs outside the
//! documented domain are rejected with [`Error::Domain`] instead of producing
//! `NaN`.

use std::f64::consts::{FRAC_2_SQRT_PI, PI, SQRT_2};

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Largest argument for which `exp(-z)` is still a normal double.
const K1_UNDERFLOW: f64 = 708.0;

/// Crossover between the power series and the continued fraction for `K1`.
const K1_SERIES_MAX: f64 = 2.0;

/// Beyond this the asymptotic expansion reaches full precision in a few terms.
const K1_ASYMPTOTIC_MIN: f64 = 100.0;

/// Modified Bessel function of the second kind, order one.
///
/// Returns 0 once the result underflows (`z` beyond roughly 705).
pub fn bessel_k1(z: f64) -> Result<f64> {
    check_k1_arg("bessel_k1", z)?;
    if z <= K1_SERIES_MAX {
        Ok(k1_series(z))
    } else if z > K1_UNDERFLOW + 40.0 {
        Ok(0.0)
    } else {
        Ok(k1_scaled_large(z) * (-z).exp())
    }
}

/// `exp(z) * K1(z)`, which stays representable for arguments far beyond the
/// underflow point of [`bessel_k1`].
pub fn bessel_k1_scaled(z: f64) -> Result<f64> {
    check_k1_arg("bessel_k1_scaled", z)?;
    if z <= K1_SERIES_MAX {
        Ok(k1_series(z) * z.exp())
    } else {
        Ok(k1_scaled_large(z))
    }
}

fn k1_scaled_large(z: f64) -> f64 {
    if z < K1_ASYMPTOTIC_MIN {
        k1_scaled_cf(z)
    } else {
        k1_scaled_asymptotic(z)
    }
}

// sqrt(pi/(2z)) * sum_k prod_{j<=k} (4 - (2j-1)^2) / (k! (8z)^k)
fn k1_scaled_asymptotic(z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..30 {
        let odd = (2 * k - 1) as f64;
        term *= (4.0 - odd * odd) / (k as f64 * 8.0 * z);
        sum += term;
        if term.abs() < 1e-17 * sum {
            break;
        }
    }
    (PI / (2.0 * z)).sqrt() * sum
}

fn check_k1_arg(function: &'static str, z: f64) -> Result<()> {
    if z > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(function, z, "z > 0 and finite"))
    }
}

// K1(z) = 1/z + ln(z/2) I1(z) - (z/4) sum_k [psi(k+1) + psi(k+2)] (z^2/4)^k / (k! (k+1)!)
fn k1_series(z: f64) -> f64 {
    let t = 0.25 * z * z;
    let mut term = 1.0;
    let mut psi_sum = 1.0 - 2.0 * EULER_GAMMA;
    let mut i1_sum = 0.0;
    let mut psi_weighted = 0.0;
    for k in 1..64 {
        i1_sum += term;
        psi_weighted += psi_sum * term;
        let k = k as f64;
        term *= t / (k * (k + 1.0));
        psi_sum += 1.0 / k + 1.0 / (k + 1.0);
        if term < 1e-17 * i1_sum {
            break;
        }
    }
    1.0 / z + 0.5 * z * i1_sum * (0.5 * z).ln() - 0.25 * z * psi_weighted
}

// Steed's continued fraction (Temme's CF2 form) for K0 and K1 at order zero,
// returned with the exp(-z) factor removed.
fn k1_scaled_cf(z: f64) -> f64 {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + z);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0_scaled = (PI / (2.0 * z)).sqrt() / s;
    k0_scaled * (z + 0.5 - h) / z
}

/// Complementary error function. Underflows to 0 for `x` above about 26.5.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 0.5 {
        1.0 - erf_taylor(x)
    } else if x < ERFC_CF_MIN {
        1.0 - erf_positive_series(x)
    } else if x > 27.3 {
        0.0
    } else {
        erfc_continued_fraction(x)
    }
}

/// Error function, `1 - erfc(x)` evaluated without cancellation near zero.
pub fn erf(x: f64) -> f64 {
    if x.abs() < 0.5 {
        erf_taylor(x)
    } else {
        1.0 - erfc(x)
    }
}

const ERFC_CF_MIN: f64 = 2.5;

// exp(-x^2) with the square split so the rounding of x*x does not get
// amplified by the large exponent.
fn exp_neg_square(x: f64) -> f64 {
    let hi = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
    let lo = x - hi;
    (-hi * hi).exp() * (-lo * (x + hi)).exp()
}

fn erf_taylor(x: f64) -> f64 {
    let x2 = x * x;
    let mut power = x;
    let mut sum = x;
    for n in 1..60 {
        let n = n as f64;
        power *= -x2 / n;
        let term = power / (2.0 * n + 1.0);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    FRAC_2_SQRT_PI * sum
}

// erf(x) = 2/sqrt(pi) exp(-x^2) sum_n x (2x^2)^n / (1*3*...*(2n+1)); all terms positive.
fn erf_positive_series(x: f64) -> f64 {
    let two_x2 = 2.0 * x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..200 {
        term *= two_x2 / (2.0 * n as f64 + 1.0);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    FRAC_2_SQRT_PI * exp_neg_square(x) * sum
}

// erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), modified Lentz.
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..500 {
        let a = 0.5 * n as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    exp_neg_square(x) / (SQRT_PI * f)
}

/// Gaussian Q-function, the upper tail of the standard normal distribution.
pub fn gaussian_q(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Standard normal density.
pub fn gaussian_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for positive arguments (Lanczos, g = 7).
pub fn gamma(p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain("gamma", p, "p > 0 and finite"));
    }
    if p < 0.5 {
        // reflection keeps the Lanczos sum in its accurate range
        return Ok(PI / ((PI * p).sin() * gamma(1.0 - p)?));
    }
    let z = p - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok((2.0 * PI).sqrt() * t.powf(0.5 * (z + 0.5)) * (-t).exp() * t.powf(0.5 * (z + 0.5)) * series)
}

/// Lower incomplete gamma function `γ(p, x) = ∫₀ˣ t^{p-1} e^{-t} dt`.
///
/// Accuracy is verified to 1e-10 relative for `p = 1/2` and `p = 3/2`; other
/// orders use the same series and continued fraction on a best-effort basis.
pub fn lower_incomplete_gamma(p: f64, x: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain("lower_incomplete_gamma", p, "p > 0"));
    }
    if !(x >= 0.0) {
        return Err(Error::domain("lower_incomplete_gamma", x, "x >= 0"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return gamma(p);
    }
    if x < p + 1.0 {
        Ok(lower_gamma_series(p, x))
    } else {
        Ok(gamma(p)? - upper_gamma_continued_fraction(p, x))
    }
}

fn lower_gamma_series(p: f64, x: f64) -> f64 {
    let mut denom = p;
    let mut term = 1.0 / p;
    let mut sum = term;
    for _ in 0..500 {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum * (p * x.ln() - x).exp()
}

fn upper_gamma_continued_fraction(p: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - p;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - p);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (p * x.ln() - x).exp() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn k1_small_argument_limit() {
        let z = 1e-8;
        assert!(rel(z * bessel_k1(z).unwrap(), 1.0) < 1e-6);
    }

    #[test]
    fn k1_reference_values() {
        assert!(rel(bessel_k1(1.0).unwrap(), 0.601_907_230_197_234_6) < 1e-12);
        assert!(rel(bessel_k1(10.0).unwrap(), 1.864_877_345_382_558_4e-5) < 1e-12);
        assert!(rel(bessel_k1_scaled(1.0).unwrap(), 1.636_153_486_263_258_2) < 1e-12);
    }

    #[test]
    fn k1_scaled_matches_definition_and_asymptote() {
        let z: f64 = 5.0;
        let direct = z.exp() * bessel_k1(z).unwrap();
        assert!(rel(bessel_k1_scaled(z).unwrap(), direct) < 1e-13);

        let big = 1e6;
        let lead = bessel_k1_scaled(big).unwrap() * (2.0 * big / PI).sqrt();
        assert!((lead - 1.0).abs() < 1e-5);
    }

    #[test]
    fn k1_underflows_to_zero() {
        assert_eq!(bessel_k1(800.0).unwrap(), 0.0);
        assert!(bessel_k1_scaled(800.0).unwrap() > 0.0);
    }

    #[test]
    fn k1_rejects_nonpositive() {
        assert!(matches!(bessel_k1(0.0), Err(Error::Domain { .. })));
        assert!(bessel_k1(-1.0).is_err());
        assert!(bessel_k1_scaled(0.0).is_err());
        assert!(bessel_k1(f64::NAN).is_err());
    }

    #[test]
    fn erfc_reference_values() {
        assert_eq!(erfc(0.0), 1.0);
        assert!(rel(erfc(1.0), 0.157_299_207_050_285_13) < 1e-12);
        assert!((erfc(-0.7) - (2.0 - erfc(0.7))).abs() < 1e-14);
    }

    #[test]
    fn erfc_underflow_is_zero() {
        assert_eq!(erfc(40.0), 0.0);
        assert_eq!(erfc(-40.0), 2.0);
    }

    #[test]
    fn incomplete_gamma_values() {
        assert_eq!(lower_incomplete_gamma(1.5, 0.0).unwrap(), 0.0);
        assert!(rel(lower_incomplete_gamma(1.5, 1.0).unwrap(), 0.378_944_691_640_984_7) < 1e-10);
        let full = SQRT_PI / 2.0;
        assert!(rel(lower_incomplete_gamma(1.5, 200.0).unwrap(), full) < 1e-14);
        assert!(rel(lower_incomplete_gamma(1.5, f64::INFINITY).unwrap(), full) < 1e-14);
    }

    #[test]
    fn incomplete_gamma_rejects_bad_arguments() {
        assert!(lower_incomplete_gamma(0.0, 1.0).is_err());
        assert!(lower_incomplete_gamma(1.5, -1.0).is_err());
    }

    #[test]
    fn gamma_half_integers() {
        assert!(rel(gamma(0.5).unwrap(), SQRT_PI) < 1e-14);
        assert!(rel(gamma(1.5).unwrap(), SQRT_PI / 2.0) < 1e-14);
        assert!(rel(gamma(5.0).unwrap(), 24.0) < 1e-14);
        assert!(rel(gamma(0.25).unwrap(), 3.625_609_908_221_908_3) < 1e-13);
    }

    #[test]
    fn q_function_values() {
        assert_eq!(gaussian_q(0.0), 0.5);
        assert!(rel(gaussian_q(1.0), 0.158_655_253_931_457_07) < 1e-12);
        assert!((gaussian_q(2.3) + gaussian_q(-2.3) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn monotone_on_grids() {
        let mut prev_k1 = f64::INFINITY;
        let mut prev_erfc = f64::INFINITY;
        let mut prev_q = f64::INFINITY;
        for i in 0..400 {
            let z = 1e-3 * (1.03f64).powi(i);
            let k1 = bessel_k1_scaled(z).unwrap() * (-z).exp();
            assert!(k1 < prev_k1, "K1 not decreasing at {z}");
            prev_k1 = k1;

            let x = -4.0 + 0.055 * i as f64;
            let e = erfc(x);
            let q = gaussian_q(x);
            assert!(e < prev_erfc && q < prev_q, "not decreasing at {x}");
            prev_erfc = e;
            prev_q = q;
        }
    }
}
