use std::fmt;

use serde::Serialize;

/// An exact probability mass `numerator / 2^scale`.
///
/// All masses read from one table share the table's scale `L`, so sums and
/// comparisons are plain integer operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct DyadicMass {
    pub numerator: u64,
    pub scale: u32,
}

impl DyadicMass {
    pub const fn zero(scale: u32) -> Self {
        DyadicMass {
            numerator: 0,
            scale,
        }
    }

    pub const fn new(numerator: u64, scale: u32) -> Self {
        DyadicMass { numerator, scale }
    }

    /// The weight `2^-len` of a single program of `len` bits.
    pub fn of_program(len: u32, scale: u32) -> Self {
        debug_assert!(len <= scale);
        DyadicMass::new(1u64 << (scale - len), scale)
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    /// `numerator ≤ 2^scale`, checked without overflow.
    pub fn within_kraft(&self) -> bool {
        u128::from(self.numerator) <= 1u128 << self.scale
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / (self.scale as f64).exp2()
    }

    /// `log2` of the mass, computed as `log2(numerator) - scale` so the only
    /// rounding is in the logarithm itself. `-inf` for zero mass.
    pub fn log2(&self) -> f64 {
        if self.numerator == 0 {
            f64::NEG_INFINITY
        } else {
            log2_u64(self.numerator) - self.scale as f64
        }
    }
}

/// `log2(n)` for integers, exact for powers of two.
pub fn log2_u64(n: u64) -> f64 {
    if n.is_power_of_two() {
        return n.trailing_zeros() as f64;
    }
    // Shift large values into the exactly-representable range first.
    let shift = 64u32.saturating_sub(n.leading_zeros()).saturating_sub(53);
    ((n >> shift) as f64).log2() + shift as f64
}

impl fmt::Display for DyadicMass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn program_weights() {
        assert_eq!(DyadicMass::of_program(3, 6).numerator, 8);
        assert_eq!(DyadicMass::of_program(6, 6).numerator, 1);
        assert_eq!(DyadicMass::of_program(0, 60).numerator, 1 << 60);
    }

    #[test]
    fn logs() {
        assert_eq!(DyadicMass::new(8, 6).log2(), -3.0);
        assert!((DyadicMass::new(11, 6).log2() - (11f64.log2() - 6.0)).abs() < 1e-15);
        assert_eq!(DyadicMass::zero(6).log2(), f64::NEG_INFINITY);
        assert!((log2_u64((1 << 60) + 1) - 60.0).abs() < 1e-12);
    }

    #[test]
    fn kraft_check_handles_full_scale() {
        assert!(DyadicMass::new(1 << 60, 60).within_kraft());
        assert!(!DyadicMass::new((1 << 60) + 1, 60).within_kraft());
        assert!(!DyadicMass::new(65, 6).within_kraft());
    }

    #[test]
    fn display_as_fraction() {
        assert_eq!(DyadicMass::new(13, 6).to_string(), "13/2^6");
    }
}
