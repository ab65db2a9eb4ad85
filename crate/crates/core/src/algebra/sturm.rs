//! Exact real-root counting with Sturm chains over the rationals.

use num_traits::{Signed, Zero};
use serde_json::json;

use super::{AlgebraError, UniPoly};
use crate::cert::Certification;

/// The canonical Sturm chain `g, g', -rem(..), ...`.
pub fn sturm_chain(g: &UniPoly) -> Vec<UniPoly> {
    let mut chain = vec![g.clone()];
    let d = g.derivative();
    if d.is_zero() {
        return chain;
    }
    chain.push(d);
    loop {
        let n = chain.len();
        let r = chain[n - 2].div_rem(&chain[n - 1]).1;
        if r.is_zero() {
            return chain;
        }
        chain.push(-&r);
    }
}

fn variations(signs: impl Iterator<Item = i32>) -> usize {
    let mut last = 0;
    let mut count = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

fn sign_at_zero(p: &UniPoly) -> i32 {
    let c = p.coeff(0);
    if c.is_zero() {
        0
    } else if c.is_positive() {
        1
    } else {
        -1
    }
}

/// Number of distinct real roots in `(-inf, 0)`; requires `g(0) != 0`.
pub fn count_negative_roots(g: &UniPoly) -> usize {
    let chain = sturm_chain(g);
    let at_neg_inf = variations(chain.iter().map(UniPoly::sign_at_neg_infinity));
    let at_zero = variations(chain.iter().map(sign_at_zero));
    at_neg_inf - at_zero
}

/// PASS iff every complex root of `g` is real, strictly negative and simple.
pub fn sturm_negative_real_roots(g: &UniPoly) -> Result<Certification, AlgebraError> {
    let degree = g.degree().ok_or(AlgebraError::ZeroPolynomial)?;
    if g.coeff(0).is_zero() {
        return Err(AlgebraError::ZeroConstantTerm);
    }
    let square_free = g.gcd(&g.derivative()).degree().unwrap_or(0) == 0;
    let negative = count_negative_roots(g);
    let witness = json!({
        "polynomial": g.to_string(),
        "degree": degree,
        "squareFree": square_free,
        "distinctNegativeRoots": negative,
    });
    let name = "negative-simple-roots";
    Ok(if square_free && negative == degree {
        Certification::pass(name, witness)
    } else {
        Certification::fail(name, witness)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cert::Verdict;

    #[test]
    fn paper_q1_specialization_passes() {
        let g = UniPoly::from_ints([1, 91, 541, 91, 1]);
        let c = sturm_negative_real_roots(&g).unwrap();
        assert_eq!(c.verdict, Verdict::Pass);
        assert_eq!(c.witness["distinctNegativeRoots"], 4);
    }

    #[test]
    fn negative_controls_fail() {
        let c = sturm_negative_real_roots(&UniPoly::from_ints([1, 0, 1])).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);
        assert_eq!(c.witness["distinctNegativeRoots"], 0);
        let c = sturm_negative_real_roots(&UniPoly::from_ints([1, 2, 1])).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);
        assert_eq!(c.witness["squareFree"], false);
        // a positive root
        let c = sturm_negative_real_roots(&UniPoly::from_ints([-2, 1, 1])).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);
    }

    #[test]
    fn errors() {
        assert_eq!(
            sturm_negative_real_roots(&UniPoly::zero()),
            Err(AlgebraError::ZeroPolynomial)
        );
        assert_eq!(
            sturm_negative_real_roots(&UniPoly::from_ints([0, 1])),
            Err(AlgebraError::ZeroConstantTerm)
        );
    }

    #[test]
    fn counts_distinct_roots_only() {
        // (p+1)^2 (p+3): two distinct negative roots
        let g = &UniPoly::from_ints([1, 2, 1]) * &UniPoly::from_ints([3, 1]);
        assert_eq!(count_negative_roots(&g), 2);
    }
}
