use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

/// Numeric type the box algebra is written against.
///
/// `f64` is the plain evaluation type; the training tape implements it for
/// recorded variables so the same formulas produce gradients. Comparisons
/// (`value`) are never differentiated.
///
/// Non-smooth points take the following subgradients: `abs` at 0 gives 0,
/// `max`/`min` on a tie pass the gradient to the first argument, `sqrt` at 0
/// gives 0.
pub trait Scalar:
    Copy + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;

    fn max(self, other: Self) -> Self {
        if self.ge(other) {
            self
        } else {
            other
        }
    }

    fn min(self, other: Self) -> Self {
        if other.ge(self) {
            self
        } else {
            other
        }
    }

    /// `self ≥ other` on values. Recording types may log the outcome.
    fn ge(self, other: Self) -> bool {
        self.value() >= other.value()
    }

    fn zero() -> Self {
        Self::constant(0.0)
    }

    fn scale(self, k: f64) -> Self {
        self * Self::constant(k)
    }
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }

    fn value(self) -> f64 {
        self
    }

    fn abs(self) -> Self {
        f64::abs(self)
    }

    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// Vector norm used by every loss term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    #[default]
    L2,
}

impl Norm {
    pub fn apply<S: Scalar>(self, xs: impl IntoIterator<Item = S>) -> S {
        match self {
            Norm::L1 => xs.into_iter().fold(S::zero(), |acc, x| acc + x.abs()),
            Norm::L2 => {
                let mut any = false;
                let sq = xs.into_iter().fold(S::zero(), |acc, x| {
                    any = true;
                    acc + x * x
                });
                if any {
                    sq.sqrt()
                } else {
                    S::zero()
                }
            }
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            other => Err(format!("unknown norm `{other}` (expected l1 or l2)")),
        }
    }
}
