//! Precision policy: which arithmetic a solve runs at and when to warn.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Precision;

/// Smallest mantissa length accepted for extended precision.
pub const MIN_EXTENDED_BITS: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionConfig {
    pub precision: Precision,
    /// Condition estimates above this attach a warning to solver results.
    pub condition_warn_threshold: f64,
}

impl PrecisionConfig {
    pub fn machine() -> Self {
        Self::with_precision(Precision::Machine)
    }

    pub fn extended(bits: u32) -> Result<Self> {
        if bits < MIN_EXTENDED_BITS {
            return Err(Error::InvalidArgument(format!(
                "extended precision needs at least {MIN_EXTENDED_BITS} bits, got {bits}"
            )));
        }
        Ok(Self::with_precision(Precision::Extended(bits)))
    }

    /// Default warning threshold is `1/sqrt(u)`: past it, more than half of
    /// the working digits of a solve are at risk.
    fn with_precision(precision: Precision) -> Self {
        PrecisionConfig {
            precision,
            condition_warn_threshold: 1.0 / precision.unit_roundoff().sqrt(),
        }
    }

    pub fn with_warn_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "condition warning threshold must be positive, got {threshold}"
            )));
        }
        self.condition_warn_threshold = threshold;
        Ok(self)
    }

    /// Precision picked automatically for a flat-limit solve with `n` points at
    /// length-scale `length_scale`: `max(64, 64 + ceil(2 n log2 l))` bits.
    pub fn auto(n: usize, length_scale: f64) -> Self {
        Self::with_precision(Precision::Extended(auto_bits(n, length_scale)))
    }

    pub fn unit_roundoff(&self) -> f64 {
        self.precision.unit_roundoff()
    }
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        Self::machine()
    }
}

pub fn auto_bits(n: usize, length_scale: f64) -> u32 {
    let growth = (2.0 * n as f64 * length_scale.log2()).ceil();
    if growth.is_finite() && growth > 0.0 {
        MIN_EXTENDED_BITS + growth as u32
    } else {
        MIN_EXTENDED_BITS
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_rule() {
        assert_eq!(auto_bits(3, 0.5), 64);
        assert_eq!(auto_bits(3, 1.0), 64);
        // 2*3*log2(1000) = 59.79
        assert_eq!(auto_bits(3, 1000.0), 124);
        assert_eq!(auto_bits(2, 100.0), 64 + 27);
    }

    #[test]
    fn extended_needs_64_bits() {
        assert!(PrecisionConfig::extended(63).is_err());
        assert!(PrecisionConfig::extended(64).is_ok());
        assert!(PrecisionConfig::machine().with_warn_threshold(0.0).is_err());
    }

    #[test]
    fn default_threshold_is_root_inverse_roundoff() {
        let m = PrecisionConfig::machine();
        assert!((m.condition_warn_threshold - 2f64.powf(26.5)).abs() < 1.0);
    }
}
