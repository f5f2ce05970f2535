use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Sub};

/// A value in `ℝ ∪ {+∞}`.
///
/// Arithmetic saturates at `+∞`: `x + ∞ = ∞` and `∞ − x = ∞` for finite `x`.
/// There is no `−∞`; subtracting an `ExtReal` from another is not provided.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Maps `f64::INFINITY` to [`ExtReal::PosInf`]. NaN and `−∞` are rejected.
    pub fn from_f64(x: f64) -> Option<Self> {
        if x.is_nan() || x == f64::NEG_INFINITY {
            None
        } else if x == f64::INFINITY {
            Some(ExtReal::PosInf)
        } else {
            Some(ExtReal::Finite(x))
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::PosInf => None,
        }
    }

    /// Lossy view as `f64`, with `+∞` mapped to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// Indicator value: `0` when `inside`, `+∞` otherwise.
    pub fn indicator(inside: bool) -> Self {
        if inside {
            ExtReal::ZERO
        } else {
            ExtReal::PosInf
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::Finite(x)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::PosInf) => Some(Ordering::Less),
            (ExtReal::PosInf, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::PosInf, ExtReal::PosInf) => Some(Ordering::Equal),
        }
    }
}

impl PartialEq<f64> for ExtReal {
    fn eq(&self, other: &f64) -> bool {
        *self == ExtReal::Finite(*other)
    }
}

impl PartialOrd<f64> for ExtReal {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.partial_cmp(&ExtReal::Finite(*other))
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::Finite(rhs)
    }
}

impl Sub<f64> for ExtReal {
    type Output = ExtReal;
    fn sub(self, rhs: f64) -> ExtReal {
        match self {
            ExtReal::Finite(a) => ExtReal::Finite(a - rhs),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => fmt::Display::fmt(x, f),
            ExtReal::PosInf => f.write_str("+inf"),
        }
    }
}
