//! Prime-field arithmetic for gadget labels and padding.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("modulus mismatch: F_{0} vs F_{1}")]
    ModulusMismatch(u32, u32),
    #[error("2 is not invertible in F_2 and the operands have odd sum")]
    HalfUndefined,
}

pub fn is_prime(x: u32) -> bool {
    if x < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= x {
        if x.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn smallest_prime_geq(x: u32) -> u32 {
    let mut p = x.max(2);
    while !is_prime(p) {
        p += 1;
    }
    p
}

/// An element of F_p. The modulus travels with the value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    modulus: u32,
}

impl FieldElement {
    pub fn new(value: i64, modulus: u32) -> Result<Self, FieldError> {
        if !is_prime(modulus) {
            return Err(FieldError::NotPrime(modulus));
        }
        Ok(FieldElement { value: value.rem_euclid(modulus as i64) as u32, modulus })
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }

    fn same_field(self, other: Self) -> Result<(), FieldError> {
        if self.modulus == other.modulus {
            Ok(())
        } else {
            Err(FieldError::ModulusMismatch(self.modulus, other.modulus))
        }
    }

    fn raw(self, v: u64) -> Self {
        FieldElement { value: (v % self.modulus as u64) as u32, modulus: self.modulus }
    }

    pub fn checked_add(self, o: Self) -> Result<Self, FieldError> {
        self.same_field(o)?;
        Ok(self.raw(self.value as u64 + o.value as u64))
    }

    pub fn checked_sub(self, o: Self) -> Result<Self, FieldError> {
        self.same_field(o)?;
        Ok(self.raw(self.value as u64 + (self.modulus - o.value) as u64))
    }

    pub fn checked_mul(self, o: Self) -> Result<Self, FieldError> {
        self.same_field(o)?;
        Ok(self.raw(self.value as u64 * o.value as u64))
    }

    pub fn inv(self) -> Result<Self, FieldError> {
        f_inv(self)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

// Operator forms panic on modulus mismatch; use the checked_* methods when the
// operands come from different sources.
impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, o: Self) -> Self {
        self.checked_add(o).expect("field modulus mismatch")
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, o: Self) -> Self {
        self.checked_sub(o).expect("field modulus mismatch")
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, o: Self) -> Self {
        self.checked_mul(o).expect("field modulus mismatch")
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> Self {
        self.raw((self.modulus - self.value) as u64)
    }
}

/// Multiplicative inverse via Fermat: a^(p-2).
pub fn f_inv(a: FieldElement) -> Result<FieldElement, FieldError> {
    if a.value == 0 {
        return Err(FieldError::ZeroInverse);
    }
    let p = a.modulus as u64;
    let mut base = a.value as u64;
    let mut exp = p - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    Ok(a.raw(acc))
}

/// The r completing the progression (p, q, r): r = 2q - p.
pub fn progression_third(first: FieldElement, middle: FieldElement) -> Result<FieldElement, FieldError> {
    first.same_field(middle)?;
    Ok(middle + middle - first)
}

/// The q completing the progression (p, q, r): q = (p + r) / 2.
pub fn progression_center(first: FieldElement, last: FieldElement) -> Result<FieldElement, FieldError> {
    first.same_field(last)?;
    let sum = first + last;
    if first.modulus == 2 {
        // q - p = r - q collapses to p = r in characteristic 2
        return if sum.value == 0 { Ok(first) } else { Err(FieldError::HalfUndefined) };
    }
    let two = first.raw(2);
    Ok(sum * f_inv(two)?)
}
