//! Working precision, truncation and tolerance model.

use crate::error::{Error, Result};

pub const DEFAULT_PRECISION_BITS: usize = 256;
pub const DEFAULT_TOLERANCE: f64 = 1e-40;

#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionContext {
    precision_bits: usize,
    /// log2 of the infinite-product cutoff (kept as a logarithm so large
    /// precisions do not underflow f64).
    product_cutoff_log2: f64,
    default_tolerance: f64,
}

impl PrecisionContext {
    pub fn new(precision_bits: usize, default_tolerance: f64) -> Result<Self> {
        if precision_bits < 53 {
            return Err(Error::InvalidConfig(format!(
                "precision_bits must be at least 53, got {precision_bits}"
            )));
        }
        if !(default_tolerance > 0.0 && default_tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {default_tolerance}"
            )));
        }
        let floor_log2 = -0.75 * precision_bits as f64;
        if default_tolerance.log2() < floor_log2 {
            return Err(Error::InvalidConfig(format!(
                "tolerance {default_tolerance:e} is below 2^{floor_log2} for {precision_bits}-bit arithmetic"
            )));
        }
        Ok(PrecisionContext {
            precision_bits,
            product_cutoff_log2: -(precision_bits as f64),
            default_tolerance,
        })
    }

    pub fn with_bits(precision_bits: usize) -> Result<Self> {
        let floor = (-0.75 * precision_bits as f64).exp2();
        Self::new(precision_bits, DEFAULT_TOLERANCE.max(floor * 2.0))
    }

    pub fn precision_bits(&self) -> usize {
        self.precision_bits
    }

    pub fn product_cutoff_log2(&self) -> f64 {
        self.product_cutoff_log2
    }

    /// `2^-precision_bits`; underflows to 0 above roughly 1074 bits.
    pub fn product_cutoff(&self) -> f64 {
        self.product_cutoff_log2.exp2()
    }

    pub fn default_tolerance(&self) -> f64 {
        self.default_tolerance
    }

    /// Values below `2^zero_threshold_log2()` relative to their scale are
    /// treated as exact zeros.
    pub fn zero_threshold_log2(&self) -> f64 {
        -0.3 * self.precision_bits as f64
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext {
            precision_bits: DEFAULT_PRECISION_BITS,
            product_cutoff_log2: -(DEFAULT_PRECISION_BITS as f64),
            default_tolerance: DEFAULT_TOLERANCE,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let d = PrecisionContext::default();
        assert_eq!(PrecisionContext::new(256, 1e-40).unwrap(), d);
        assert!(d.product_cutoff() <= (-256f64).exp2());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(PrecisionContext::new(52, 1e-10).is_err());
        assert!(PrecisionContext::new(64, 1e-40).is_err());
        assert!(PrecisionContext::new(256, 0.0).is_err());
        assert!(PrecisionContext::with_bits(53).is_ok());
    }
}
