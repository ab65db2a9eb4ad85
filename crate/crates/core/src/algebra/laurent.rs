use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::{SignedMonomial, UniPoly};

/// Exponent pair `(pexp, qexp)`.
pub type Exp = (i64, i64);

/// A Laurent polynomial in `p` and `q` with integer coefficients.
///
/// Stored sparsely; zero coefficients are never kept, so structural
/// equality is polynomial equality.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    terms: BTreeMap<Exp, BigInt>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("cannot parse polynomial at byte {pos}: {msg}")]
pub struct ParsePolyError {
    pub pos: usize,
    pub msg: String,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }

    pub fn one() -> Self {
        LaurentPoly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        LaurentPoly::term(c, 0, 0)
    }

    pub fn term(c: BigInt, pexp: i64, qexp: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((pexp, qexp), c);
        }
        LaurentPoly { terms }
    }

    pub fn p() -> Self {
        LaurentPoly::term(BigInt::one(), 1, 0)
    }

    pub fn q() -> Self {
        LaurentPoly::term(BigInt::one(), 0, 1)
    }

    pub fn from_terms<I: IntoIterator<Item = (Exp, BigInt)>>(it: I) -> Self {
        let mut out = LaurentPoly::zero();
        for (e, c) in it {
            out.add_term(e, &c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending `(pexp, qexp)` order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exp, &BigInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, pexp: i64, qexp: i64) -> BigInt {
        self.terms
            .get(&(pexp, qexp))
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn leading(&self) -> Option<(&Exp, &BigInt)> {
        self.terms.iter().next_back()
    }

    pub fn add_term(&mut self, e: Exp, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `self += sign * m * other`, the inner step of expansion-based determinants.
    pub fn add_scaled(&mut self, m: SignedMonomial, other: &LaurentPoly) {
        for (&(a, b), c) in &other.terms {
            let e = (a + m.pexp, b + m.qexp);
            if m.negative {
                self.add_term(e, &-c);
            } else {
                self.add_term(e, c);
            }
        }
    }

    pub fn mul_monomial(&self, m: SignedMonomial) -> LaurentPoly {
        let terms = self
            .terms
            .iter()
            .map(|(&(a, b), c)| {
                let c = if m.negative { -c } else { c.clone() };
                ((a + m.pexp, b + m.qexp), c)
            })
            .collect();
        LaurentPoly { terms }
    }

    pub fn scale(&self, k: &BigInt) -> LaurentPoly {
        if k.is_zero() {
            return LaurentPoly::zero();
        }
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, c * k)).collect(),
        }
    }

    /// `(min, max)` of the p-exponents, `None` for zero.
    pub fn p_range(&self) -> Option<(i64, i64)> {
        let lo = self.terms.keys().next()?.0;
        let hi = self.terms.keys().next_back()?.0;
        Some((lo, hi))
    }

    pub fn q_range(&self) -> Option<(i64, i64)> {
        let lo = self.terms.keys().map(|e| e.1).min()?;
        let hi = self.terms.keys().map(|e| e.1).max()?;
        Some((lo, hi))
    }

    /// If `self` is `±p^a q^b`, returns it.
    pub fn as_unit_monomial(&self) -> Option<SignedMonomial> {
        if self.terms.len() != 1 {
            return None;
        }
        let (&(a, b), c) = self.terms.iter().next()?;
        if c.is_one() {
            Some(SignedMonomial::new(1, a, b))
        } else if (-c).is_one() {
            Some(SignedMonomial::new(-1, a, b))
        } else {
            None
        }
    }

    /// Coefficient of `p^f` as a Laurent polynomial in `q` alone.
    pub fn p_coefficient(&self, f: i64) -> LaurentPoly {
        LaurentPoly {
            terms: self
                .terms
                .range((f, i64::MIN)..=(f, i64::MAX))
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
        .mul_monomial(SignedMonomial::new(1, -f, 0))
    }

    /// Substitutes `p -> -p`.
    pub fn reflect_p(&self) -> LaurentPoly {
        LaurentPoly {
            terms: self
                .terms
                .iter()
                .map(|(&(a, b), c)| ((a, b), if a.is_odd() { -c } else { c.clone() }))
                .collect(),
        }
    }

    /// Exact quotient `self / d` in the Laurent ring, or `None` if `d` does
    /// not divide `self`.
    pub fn div_exact(&self, d: &LaurentPoly) -> Option<LaurentPoly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(LaurentPoly::zero());
        }
        if let Some(m) = d.as_unit_monomial() {
            return Some(self.mul_monomial(m.inverse()));
        }
        // Exponent ranges are additive under multiplication, which bounds the
        // quotient and makes the lex-leading-term loop terminate.
        let (ap, bp) = (self.p_range()?, d.p_range()?);
        let (aq, bq) = (self.q_range()?, d.q_range()?);
        let prange = (ap.0 - bp.0, ap.1 - bp.1);
        let qrange = (aq.0 - bq.0, aq.1 - bq.1);
        if prange.0 > prange.1 || qrange.0 > qrange.1 {
            return None;
        }
        let (&(dp, dq), dc) = d.leading()?;
        let mut rem = self.clone();
        let mut quot = LaurentPoly::zero();
        while let Some((&(rp, rq), rc)) = rem.leading() {
            let (tp, tq) = (rp - dp, rq - dq);
            if tp < prange.0 || tp > prange.1 || tq < qrange.0 || tq > qrange.1 {
                return None;
            }
            let (c, r) = rc.div_rem(dc);
            if !r.is_zero() {
                return None;
            }
            for (&(a, b), dcoef) in &d.terms {
                rem.add_term((a + tp, b + tq), &-(&c * dcoef));
            }
            quot.add_term((tp, tq), &c);
        }
        Some(quot)
    }

    /// Evaluates at rational `p`, `q`. Panics on a zero base with a negative exponent.
    pub fn eval(&self, p: &BigRational, q: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (&(a, b), c) in &self.terms {
            acc += BigRational::from_integer(c.clone()) * rat_pow(p, a) * rat_pow(q, b);
        }
        acc
    }

    /// Specializes `q = q0` and strips the p-shift: returns `(k, g)` with
    /// `f(p, q0) = p^(-k) g(p)` and `g(0) != 0`, or `(0, 0)` if the
    /// specialization vanishes.
    pub fn specialize_q(&self, q0: &BigRational) -> (i64, UniPoly) {
        let mut by_p: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (&(a, b), c) in &self.terms {
            let v = BigRational::from_integer(c.clone()) * rat_pow(q0, b);
            *by_p.entry(a).or_insert_with(BigRational::zero) += v;
        }
        by_p.retain(|_, v| !v.is_zero());
        let Some((&lo, _)) = by_p.iter().next() else {
            return (0, UniPoly::zero());
        };
        let hi = *by_p.keys().next_back().unwrap();
        let mut coeffs = vec![BigRational::zero(); (hi - lo + 1) as usize];
        for (a, v) in by_p {
            coeffs[(a - lo) as usize] = v;
        }
        (-lo, UniPoly::new(coeffs))
    }

    /// Checks whether `self = m * other` for a unit monomial `m`.
    pub fn unit_multiple_of(&self, other: &LaurentPoly) -> Option<SignedMonomial> {
        if self.is_zero() || other.is_zero() || self.len() != other.len() {
            return None;
        }
        let (&(a0, b0), c0) = self.leading()?;
        let (&(a1, b1), c1) = other.leading()?;
        let sign = if c0 == c1 {
            1
        } else if *c0 == -c1 {
            -1
        } else {
            return None;
        };
        let m = SignedMonomial::new(sign, a0 - a1, b0 - b1);
        (other.mul_monomial(m) == *self).then_some(m)
    }

    fn render_term(out: &mut String, c: &BigInt, a: i64, b: i64) {
        let mag = c.abs();
        let mut factors: Vec<String> = Vec::new();
        if !mag.is_one() || (a == 0 && b == 0) {
            factors.push(mag.to_string());
        }
        for (var, e) in [("p", a), ("q", b)] {
            match e {
                0 => {}
                1 => factors.push(var.to_string()),
                _ => factors.push(format!("{var}^{e}")),
            }
        }
        out.push_str(&factors.join("*"));
    }
}

fn rat_pow(x: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

impl From<SignedMonomial> for LaurentPoly {
    fn from(m: SignedMonomial) -> Self {
        LaurentPoly::term(BigInt::from(m.sign()), m.pexp, m.qexp)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut out = String::new();
        for (i, (&(a, b), c)) in self.terms.iter().rev().enumerate() {
            match (i, c.is_negative()) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            LaurentPoly::render_term(&mut out, c, a, b);
        }
        f.write_str(&out)
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({self})")
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err<T>(&self, msg: &str) -> Result<T, ParsePolyError> {
        Err(ParsePolyError {
            pos: self.pos,
            msg: msg.to_string(),
        })
    }

    fn digits(&mut self) -> Result<&str, ParsePolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    fn exponent(&mut self) -> Result<i64, ParsePolyError> {
        if self.peek() != Some(b'^') {
            return Ok(1);
        }
        self.pos += 1;
        let neg = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let d = self.digits()?;
        let v: i64 = d.parse().map_err(|_| ParsePolyError {
            pos: self.pos,
            msg: "exponent out of range".into(),
        })?;
        Ok(if neg { -v } else { v })
    }

    fn term(&mut self) -> Result<(BigInt, i64, i64), ParsePolyError> {
        let mut c = BigInt::one();
        let (mut a, mut b) = (0i64, 0i64);
        loop {
            match self.peek() {
                Some(ch) if ch.is_ascii_digit() => {
                    let d = self.digits()?;
                    c *= BigInt::from_str(d).unwrap();
                }
                Some(b'p') => {
                    self.pos += 1;
                    a += self.exponent()?;
                }
                Some(b'q') => {
                    self.pos += 1;
                    b += self.exponent()?;
                }
                _ => return self.err("expected coefficient, p or q"),
            }
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                return Ok((c, a, b));
            }
        }
    }

    fn poly(&mut self) -> Result<LaurentPoly, ParsePolyError> {
        let mut out = LaurentPoly::zero();
        let mut first = true;
        loop {
            let neg = match self.peek() {
                None if !first => return Ok(out),
                None => return self.err("empty input"),
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                Some(b'+') => {
                    self.pos += 1;
                    false
                }
                Some(_) if first => false,
                Some(_) => return self.err("expected + or -"),
            };
            first = false;
            let (c, a, b) = self.term()?;
            out.add_term((a, b), &if neg { -c } else { c });
        }
    }
}

impl FromStr for LaurentPoly {
    type Err = ParsePolyError;

    /// Parses the rendering produced by `Display` (and somewhat more: any
    /// `*`-joined product of integers and powers of `p` and `q`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Parser {
            src: s.as_bytes(),
            pos: 0,
        }
        .poly()
    }
}

impl serde::Serialize for LaurentPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

impl AddAssign<&LaurentPoly> for LaurentPoly {
    fn add_assign(&mut self, rhs: &LaurentPoly) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c);
        }
    }
}

impl SubAssign<&LaurentPoly> for LaurentPoly {
    fn sub_assign(&mut self, rhs: &LaurentPoly) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, &-c);
        }
    }
}

impl Add<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let (small, big) = if self.len() <= rhs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = LaurentPoly::zero();
        for (&(a, b), c) in &small.terms {
            for (&(x, y), d) in &big.terms {
                out.add_term((a + x, b + y), &(c * d));
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<LaurentPoly> for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&LaurentPoly> for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, rhs: &LaurentPoly) -> LaurentPoly {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
