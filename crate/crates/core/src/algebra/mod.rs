//! Exact arithmetic: Laurent polynomials in `p, q`, rational univariate
//! polynomials, and the root certificates built on them.

mod cyclotomic;
mod laurent;
mod monomial;
mod roots;
mod sturm;
mod unipoly;

pub use cyclotomic::{cyclotomic, cyclotomic_table, euler_phi, roots_of_unity_certificate};
pub use laurent::{Exp, LaurentPoly, ParsePolyError};
pub use monomial::SignedMonomial;
pub use num_bigint::BigInt;
pub use num_rational::BigRational;
pub use roots::numeric_roots;
pub use sturm::{count_negative_roots, sturm_chain, sturm_negative_real_roots};
pub use unipoly::UniPoly;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("constant polynomial has no roots")]
    ConstantPolynomial,
    #[error("polynomial vanishes at p = 0; strip the p-shift first")]
    ZeroConstantTerm,
    #[error("root iteration did not converge within {0} steps")]
    ConvergenceFailure(usize),
}

/// Parses `"3"`, `"-1/2"` or `"0.5"`-free rational literals.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d == BigInt::from(0) {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}
