use std::fmt;
use std::ops::{Div, Mul, Neg};

use serde::{Deserialize, Serialize};

/// A unit-coefficient Laurent monomial `±p^pexp q^qexp`.
///
/// Edge weights and per-tiling weights are always of this form, so the
/// weights form a group under multiplication and division is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedMonomial {
    pub negative: bool,
    pub pexp: i64,
    pub qexp: i64,
}

impl SignedMonomial {
    pub const ONE: SignedMonomial = SignedMonomial {
        negative: false,
        pexp: 0,
        qexp: 0,
    };

    pub fn new(sign: i8, pexp: i64, qexp: i64) -> Self {
        assert!(sign == 1 || sign == -1, "sign must be +1 or -1");
        SignedMonomial {
            negative: sign < 0,
            pexp,
            qexp,
        }
    }

    pub fn p() -> Self {
        SignedMonomial::new(1, 1, 0)
    }

    pub fn q() -> Self {
        SignedMonomial::new(1, 0, 1)
    }

    pub fn sign(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn inverse(self) -> Self {
        SignedMonomial {
            negative: self.negative,
            pexp: -self.pexp,
            qexp: -self.qexp,
        }
    }
}

impl Mul for SignedMonomial {
    type Output = SignedMonomial;
    fn mul(self, rhs: Self) -> Self {
        SignedMonomial {
            negative: self.negative != rhs.negative,
            pexp: self.pexp + rhs.pexp,
            qexp: self.qexp + rhs.qexp,
        }
    }
}

impl Div for SignedMonomial {
    type Output = SignedMonomial;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.inverse()
    }
}

impl Neg for SignedMonomial {
    type Output = SignedMonomial;
    fn neg(self) -> Self {
        SignedMonomial {
            negative: !self.negative,
            ..self
        }
    }
}

impl fmt::Display for SignedMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let poly = super::LaurentPoly::from(*self);
        write!(f, "{poly}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_laws() {
        let a = SignedMonomial::new(-1, 2, -3);
        let b = SignedMonomial::new(1, -1, 5);
        assert_eq!(a * b / b, a);
        assert_eq!(a * a.inverse(), SignedMonomial::ONE);
        assert_eq!((-a).sign(), 1);
        assert_eq!((a * b).sign(), -1);
    }

    #[test]
    fn display_uses_poly_rendering() {
        assert_eq!(SignedMonomial::new(-1, 0, 1).to_string(), "-q");
        assert_eq!(SignedMonomial::ONE.to_string(), "1");
    }
}
