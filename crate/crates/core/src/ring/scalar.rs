//! Exact scalars for the loop-homology rings: polynomials in one symbolic
//! integer `k` over the rationals, optionally reduced mod a prime.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Coefficient ring for the symbolic algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientSpec {
    Integers,
    Rationals,
    ModP(u64),
}

impl CoefficientSpec {
    pub fn mod_p(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidArgument(format!("{p} is not prime")));
        }
        Ok(CoefficientSpec::ModP(p))
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            CoefficientSpec::ModP(p) => *p,
            _ => 0,
        }
    }

    pub fn is_field(&self) -> bool {
        !matches!(self, CoefficientSpec::Integers)
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A polynomial in the symbolic integer `k` with rational coefficients.
/// Trailing zeros are trimmed; the empty vector is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KScalar {
    coeffs: Vec<BigRational>,
}

impl KScalar {
    pub fn zero() -> Self {
        KScalar { coeffs: vec![] }
    }

    pub fn one() -> Self {
        KScalar::from_int(1)
    }

    pub fn from_int(v: i64) -> Self {
        if v == 0 {
            return Self::zero();
        }
        KScalar {
            coeffs: vec![BigRational::from_integer(BigInt::from(v))],
        }
    }

    pub fn from_rational(num: i64, den: i64) -> Self {
        let r = BigRational::new(BigInt::from(num), BigInt::from(den));
        if r.is_zero() {
            return Self::zero();
        }
        KScalar { coeffs: vec![r] }
    }

    /// The indeterminate `k`.
    pub fn symbol_k() -> Self {
        KScalar {
            coeffs: vec![BigRational::zero(), BigRational::one()],
        }
    }

    /// `a k + b` with integer coefficients.
    pub fn linear_in_k(a: i64, b: i64) -> Self {
        let mut s = KScalar {
            coeffs: vec![
                BigRational::from_integer(BigInt::from(b)),
                BigRational::from_integer(BigInt::from(a)),
            ],
        };
        s.trim();
        s
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree-zero integer value, if this scalar is one.
    pub fn as_integer(&self) -> Option<BigInt> {
        match self.coeffs.len() {
            0 => Some(BigInt::zero()),
            1 if self.coeffs[0].is_integer() => Some(self.coeffs[0].to_integer()),
            _ => None,
        }
    }

    fn trim(&mut self) {
        while self.coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            self.coeffs.pop();
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(len);
        for i in 0..len {
            let a = self
                .coeffs
                .get(i)
                .cloned()
                .unwrap_or_else(BigRational::zero);
            let b = other
                .coeffs
                .get(i)
                .cloned()
                .unwrap_or_else(BigRational::zero);
            coeffs.push(a + b);
        }
        let mut s = KScalar { coeffs };
        s.trim();
        s
    }

    pub fn neg(&self) -> Self {
        KScalar {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        let mut s = KScalar { coeffs };
        s.trim();
        s
    }

    pub fn mul_int(&self, v: i64) -> Self {
        self.mul(&KScalar::from_int(v))
    }

    /// Canonical form in the given coefficient ring: mod a prime, every
    /// polynomial coefficient is mapped to its residue in `[0, p)`.
    pub fn reduced(&self, spec: &CoefficientSpec) -> Result<Self> {
        match spec {
            CoefficientSpec::Integers | CoefficientSpec::Rationals => Ok(self.clone()),
            CoefficientSpec::ModP(p) => {
                let pb = BigInt::from(*p);
                let mut coeffs = Vec::with_capacity(self.coeffs.len());
                for c in &self.coeffs {
                    let num = c.numer().clone();
                    let den = c.denom().clone();
                    let den_mod = positive_mod(&den, &pb);
                    if den_mod.is_zero() {
                        return Err(Error::InvalidArgument(format!(
                            "denominator divisible by {p} in mod-{p} reduction"
                        )));
                    }
                    let inv = mod_inverse(&den_mod, &pb);
                    let v = positive_mod(&(positive_mod(&num, &pb) * inv), &pb);
                    coeffs.push(BigRational::from_integer(v));
                }
                let mut s = KScalar { coeffs };
                s.trim();
                Ok(s)
            }
        }
    }
}

fn positive_mod(a: &BigInt, p: &BigInt) -> BigInt {
    let m = a % p;
    if m.is_negative() {
        m + p
    } else {
        m
    }
}

fn mod_inverse(a: &BigInt, p: &BigInt) -> BigInt {
    // p prime: a^(p-2) mod p
    let exp = p - BigInt::from(2);
    a.modpow(&exp, p)
}

impl fmt::Display for KScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let coeff = if c.is_integer() {
                c.to_integer().to_string()
            } else {
                format!("{}/{}", c.numer(), c.denom())
            };
            let part = match i {
                0 => coeff,
                1 => {
                    if c.is_one() {
                        "k".to_string()
                    } else if (-c).is_one() {
                        "-k".to_string()
                    } else {
                        format!("{coeff}k")
                    }
                }
                _ => {
                    if c.is_one() {
                        format!("k^{i}")
                    } else {
                        format!("{coeff}k^{i}")
                    }
                }
            };
            parts.push(part);
        }
        let mut out = String::new();
        for (idx, p) in parts.iter().enumerate() {
            if idx == 0 {
                out.push_str(p);
            } else if let Some(rest) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        write!(f, "{out}")
    }
}
