//! Evaluation of `f(z) = exp(z) + a * z^k` and the band coordinates built on it.
//!
//! The two terms of `f` live on wildly different scales away from the zero
//! chain, so every routine here works with the log-magnitudes of the two terms
//! and factors out the larger one before combining them. Nothing is ever
//! exponentiated past the binary64 range unless the caller asks for the
//! unscaled value, in which case an [`Error::Overflow`] is returned instead of
//! an infinity.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ln(f64::MAX)`; anything whose log-magnitude exceeds this overflows.
pub const LN_MAX: f64 = 709.782_712_893_384;

/// Exponent beyond which the subdominant term of a ratio form is dropped.
pub const SATURATION: f64 = 700.0;

/// Which of the two coordinate families `Re z + (-1)^S k ln|z|` is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `S = 1`: `Re z - k ln|z|`. Its level set at `ln|a|` carries the zeros.
    S1,
    /// `S = 2`: `Re z + k ln|z|`.
    S2,
}

impl Family {
    pub fn from_index(s: u8) -> Result<Self> {
        match s {
            1 => Ok(Family::S1),
            2 => Ok(Family::S2),
            other => Err(Error::InvalidQuery(format!("family index must be 1 or 2, got {other}"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Family::S1 => 1,
            Family::S2 => 2,
        }
    }

    /// `(-1)^S`.
    pub fn sign(self) -> f64 {
        match self {
            Family::S1 => -1.0,
            Family::S2 => 1.0,
        }
    }
}

/// `f` and `f'` divided by the common positive factor `exp(log_scale)`.
///
/// `log_scale` is the larger of the two term log-magnitudes, so
/// `|value|` is exactly the relative residual `|f| / max(|e^z|, |a||z|^k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub value: Complex64,
    pub derivative: Complex64,
    pub log_scale: f64,
}

/// A ratio-form lower-bound quantity. `saturated` is set when the subdominant
/// term was below `exp(-700)` and the ratio was replaced by its limit 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub value: f64,
    pub saturated: bool,
}

/// The quasipolynomial `exp(z) + a * z^k` with `k >= 1` and `a != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quasipolynomial {
    k: u32,
    a: Complex64,
}

pub(crate) fn ensure_finite(z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(z))
    }
}

impl Quasipolynomial {
    pub fn new(k: u32, a: Complex64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidQuasipolynomial("k must be at least 1".into()));
        }
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::InvalidQuasipolynomial(format!("coefficient {a} is not finite")));
        }
        if a.norm() == 0.0 {
            return Err(Error::InvalidQuasipolynomial("coefficient must be non-zero".into()));
        }
        Ok(Self { k, a })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn kf(&self) -> f64 {
        f64::from(self.k)
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn abs_a(&self) -> f64 {
        self.a.norm()
    }

    /// `|B_k| = 1 / |a|`.
    pub fn abs_b(&self) -> f64 {
        1.0 / self.a.norm()
    }

    pub fn ln_abs_a(&self) -> f64 {
        self.a.norm().ln()
    }

    /// Principal argument of `a`, in `(-pi, pi]`.
    pub fn arg_a(&self) -> f64 {
        let arg = self.a.arg();
        if arg == -PI {
            PI
        } else {
            arg
        }
    }

    /// `f` and `f'` with the dominant term factored out.
    pub fn scaled(&self, z: Complex64) -> Result<Scaled> {
        ensure_finite(z)?;
        if z.re == 0.0 && z.im == 0.0 {
            let tail = if self.k == 1 { self.a } else { Complex64::new(0.0, 0.0) };
            return Ok(Scaled {
                value: Complex64::new(1.0, 0.0),
                derivative: Complex64::new(1.0, 0.0) + tail,
                log_scale: 0.0,
            });
        }
        let r = z.norm();
        let log_exp = z.re;
        let log_pow = self.ln_abs_a() + self.kf() * r.ln();
        let log_scale = log_exp.max(log_pow);

        let exp_term = Complex64::from_polar((log_exp - log_scale).exp(), z.im);
        let unit = z / r;
        let pow_term = (self.a / self.a.norm()) * unit.powu(self.k) * (log_pow - log_scale).exp();

        Ok(Scaled { value: exp_term + pow_term, derivative: exp_term + pow_term * (self.kf() / z), log_scale })
    }

    /// `exp(z) + a z^k`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let s = self.scaled(z)?;
        unscale(s.value, s.log_scale, z)
    }

    /// `exp(z) + a k z^(k-1)`.
    pub fn eval_derivative(&self, z: Complex64) -> Result<Complex64> {
        let s = self.scaled(z)?;
        unscale(s.derivative, s.log_scale, z)
    }

    /// `|f(z)| / max(|exp(z)|, |a||z|^k)`.
    pub fn relative_residual(&self, z: Complex64) -> Result<f64> {
        Ok(self.scaled(z)?.value.norm())
    }

    /// `Re z + (-1)^S k ln|z|`.
    pub fn sigma(&self, family: Family, z: Complex64) -> Result<f64> {
        ensure_finite(z)?;
        if z.re == 0.0 && z.im == 0.0 {
            return Err(Error::ZeroArgument);
        }
        Ok(z.re + family.sign() * self.kf() * z.norm().ln())
    }

    /// `|f(z)| / (|a| |z|^k) = |1 + exp(z - k Log z) / a|`.
    pub fn ratio_alg(&self, z: Complex64) -> Result<Ratio> {
        ensure_finite(z)?;
        if z.re == 0.0 && z.im == 0.0 {
            return Err(Error::ZeroArgument);
        }
        let exponent = z - self.kf() * z.ln() - self.a.ln();
        ratio_form(exponent, z)
    }

    /// `|f(z)| / |exp(z)| = |1 + a exp(k Log z - z)|`.
    pub fn ratio_exp(&self, z: Complex64) -> Result<Ratio> {
        ensure_finite(z)?;
        if z.re == 0.0 && z.im == 0.0 {
            return Ok(Ratio { value: 1.0, saturated: false });
        }
        let exponent = self.kf() * z.ln() - z + self.a.ln();
        ratio_form(exponent, z)
    }
}

fn ratio_form(exponent: Complex64, z: Complex64) -> Result<Ratio> {
    if exponent.re < -SATURATION {
        return Ok(Ratio { value: 1.0, saturated: true });
    }
    if exponent.re > LN_MAX {
        return Err(Error::Overflow(z));
    }
    let value = (Complex64::new(1.0, 0.0) + exponent.exp()).norm();
    if !value.is_finite() {
        return Err(Error::Overflow(z));
    }
    Ok(Ratio { value, saturated: false })
}

fn unscale(value: Complex64, log_scale: f64, z: Complex64) -> Result<Complex64> {
    if log_scale < SATURATION {
        return Ok(value * log_scale.exp());
    }
    let mag = value.norm();
    if mag == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let log_mag = log_scale + mag.ln();
    if log_mag > LN_MAX {
        return Err(Error::Overflow(z));
    }
    Ok(value / mag * log_mag.exp())
}
