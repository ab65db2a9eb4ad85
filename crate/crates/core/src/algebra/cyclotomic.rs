//! Cyclotomic polynomials and the roots-of-unity certificate.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::json;

use super::{AlgebraError, UniPoly};
use crate::cert::Certification;

/// Euler's totient, by trial factorization.
pub fn euler_phi(n: u64) -> u64 {
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

/// Exact quotient of integer polynomials (ascending coefficients) by a
/// monic divisor, or `None` when the remainder is nonzero.
fn div_monic(a: &[BigInt], d: &[BigInt]) -> Option<Vec<BigInt>> {
    let dd = d.len() - 1;
    if a.len() < d.len() {
        return a.iter().all(Zero::is_zero).then(Vec::new);
    }
    let mut rem = a.to_vec();
    let mut quot = vec![BigInt::zero(); a.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dc) in d.iter().enumerate() {
            rem[i + j] -= &c * dc;
        }
        quot[i] = c;
    }
    rem[..dd].iter().all(Zero::is_zero).then_some(quot)
}

/// `Φ_1 .. Φ_max` (index 0 unused), from `x^n - 1 = ∏_{d | n} Φ_d(x)`.
pub fn cyclotomic_table(max: usize) -> Vec<Vec<BigInt>> {
    let mut table: Vec<Vec<BigInt>> = vec![Vec::new(); max + 1];
    for n in 1..=max {
        let mut num = vec![BigInt::zero(); n + 1];
        num[0] = -BigInt::one();
        num[n] = BigInt::one();
        for d in (1..n).filter(|d| n % d == 0) {
            num = div_monic(&num, &table[d]).expect("x^n - 1 is divisible by Φ_d for d | n");
        }
        table[n] = num;
    }
    table
}

pub fn cyclotomic(n: usize) -> UniPoly {
    UniPoly::from_bigints(&cyclotomic_table(n)[n])
}

/// Largest index that must be tried so that every `d` with `φ(d) <= degree`
/// is covered; uses `φ(d) >= sqrt(d / 2)`.
pub fn search_bound(degree: usize) -> usize {
    2 * degree * degree + 2
}

/// PASS iff `g` is, up to a constant, a product of cyclotomic polynomials.
///
/// The witness lists each `Φ_d` found with its multiplicity.
pub fn roots_of_unity_certificate(g: &UniPoly) -> Result<Certification, AlgebraError> {
    let degree = g.degree().ok_or(AlgebraError::ZeroPolynomial)?;
    if g.coeff(0).is_zero() {
        return Err(AlgebraError::ZeroConstantTerm);
    }
    let name = "roots-of-unity";
    let (content, prim) = g.primitive_part();
    let lead = prim.last().unwrap().clone();
    if !lead.abs().is_one() || !prim[0].abs().is_one() {
        return Ok(Certification::fail(
            name,
            json!({
                "polynomial": g.to_string(),
                "reason": "primitive part is not monic with unit constant term",
                "leading": lead.to_string(),
                "constant": prim[0].to_string(),
            }),
        ));
    }
    let bound = search_bound(degree);
    let table = cyclotomic_table(bound);
    let mut rest = prim;
    let mut factors = Vec::new();
    for d in 1..=bound {
        if euler_phi(d as u64) as usize > rest.len() - 1 {
            continue;
        }
        let mut mult = 0;
        while let Some(qt) = div_monic(&rest, &table[d]) {
            rest = qt;
            mult += 1;
        }
        if mult > 0 {
            factors.push(json!({ "d": d, "multiplicity": mult }));
        }
        if rest.len() == 1 {
            break;
        }
    }
    let witness = json!({
        "polynomial": g.to_string(),
        "content": content.to_string(),
        "factors": factors,
        "cofactor": UniPoly::from_bigints(&rest).to_string(),
    });
    Ok(if rest.len() == 1 && rest[0].abs().is_one() {
        Certification::pass(name, witness)
    } else {
        Certification::fail(name, witness)
    })
}
