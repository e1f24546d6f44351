//! Exact field arithmetic over `F_p` (p prime) and the rationals `Q`.
//!
//! Every [`Scalar`] knows which field it belongs to, so mixed-field
//! arithmetic is rejected as an error rather than silently coerced.
//! Scalars are kept in canonical form at all times: residues live in
//! `[0, p)`, rationals are in lowest terms with a positive denominator.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use rand::Rng;
use std::fmt;

/// Which field scalars are drawn from.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum FieldDescriptor {
    /// The prime field `F_p`.
    Prime { p: u64 },
    /// The rational numbers.
    Rationals,
}

/// An exact element of one specific field.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Scalar {
    /// A canonical residue in `[0, p)`.
    Prime { residue: u64, p: u64 },
    /// A rational in lowest terms with positive denominator.
    Rational(BigRational),
}

#[derive(thiserror::Error, Clone, PartialEq, Eq, Debug)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("scalars belong to different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator is not invertible in F_{p}")]
    NonInvertibleDenominator { p: u64 },
    #[error("malformed scalar literal {0:?}")]
    Malformed(String),
}

/// Deterministic Miller-Rabin, exact for all `u64` inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == small {
            return true;
        }
        if n % small == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    // This witness set decides primality for every n < 2^64.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

impl FieldDescriptor {
    /// The field `F_p`; rejects composite and tiny moduli.
    pub fn prime(p: u64) -> Result<Self, FieldError> {
        if is_prime(p) {
            Ok(FieldDescriptor::Prime { p })
        } else {
            Err(FieldError::NotPrime(p))
        }
    }

    pub fn rationals() -> Self {
        FieldDescriptor::Rationals
    }

    pub fn zero(&self) -> Scalar {
        self.from_integer(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_integer(1)
    }

    /// Embeds an integer (reducing mod p for prime fields).
    pub fn from_integer(&self, value: i64) -> Scalar {
        match *self {
            FieldDescriptor::Prime { p } => {
                let r = value.rem_euclid(p as i64) as u64;
                Scalar::Prime { residue: r, p }
            }
            FieldDescriptor::Rationals => Scalar::Rational(BigRational::from(BigInt::from(value))),
        }
    }

    /// Parses the canonical text form: optional sign, decimal digits, and an
    /// optional `/denominator` part.  Fractions over `F_p` are resolved by
    /// modular inversion of the denominator.
    pub fn parse(&self, text: &str) -> Result<Scalar, FieldError> {
        let (num_text, den_text) = match text.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (text, None),
        };
        let numer = parse_bigint(num_text).ok_or_else(|| FieldError::Malformed(text.into()))?;
        let denom = match den_text {
            Some(d) => {
                // A leading sign on the denominator is not part of the grammar.
                if d.starts_with('+') || d.starts_with('-') {
                    return Err(FieldError::Malformed(text.into()));
                }
                let d = parse_bigint(d).ok_or_else(|| FieldError::Malformed(text.into()))?;
                if d.is_zero() {
                    return Err(FieldError::DivisionByZero);
                }
                Some(d)
            }
            None => None,
        };
        match *self {
            FieldDescriptor::Rationals => {
                let den = denom.unwrap_or_else(BigInt::one);
                Ok(Scalar::Rational(BigRational::new(numer, den)))
            }
            FieldDescriptor::Prime { p } => {
                let n = bigint_mod(&numer, p);
                let v = match denom {
                    None => n,
                    Some(d) => {
                        let d = bigint_mod(&d, p);
                        if d == 0 {
                            return Err(FieldError::NonInvertibleDenominator { p });
                        }
                        mul_mod(n, mod_pow(d, p - 2, p), p)
                    }
                };
                Ok(Scalar::Prime { residue: v, p })
            }
        }
    }

    /// True when `s` is an element of this field.
    pub fn contains(&self, s: &Scalar) -> bool {
        *self == s.field()
    }

    /// Uniform residue for `F_p`; small bounded-height rational for `Q`.
    pub fn random<R: Rng>(&self, rng: &mut R) -> Scalar {
        match *self {
            FieldDescriptor::Prime { p } => Scalar::Prime {
                residue: rng.gen_range(0..p),
                p,
            },
            FieldDescriptor::Rationals => {
                let n = rng.gen_range(-20i64..=20);
                let d = rng.gen_range(1i64..=20);
                Scalar::Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
            }
        }
    }

    pub fn random_nonzero<R: Rng>(&self, rng: &mut R) -> Scalar {
        loop {
            let s = self.random(rng);
            if !s.is_zero() {
                return s;
            }
        }
    }

    /// All field elements, ascending by residue.  Prime fields only.
    pub fn elements(&self) -> impl Iterator<Item = Scalar> {
        let p = match *self {
            FieldDescriptor::Prime { p } => p,
            FieldDescriptor::Rationals => panic!("cannot enumerate the rationals"),
        };
        (0..p).map(move |residue| Scalar::Prime { residue, p })
    }
}

fn parse_bigint(text: &str) -> Option<BigInt> {
    let digits = text.strip_prefix('-').or_else(|| text.strip_prefix('+')).unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    text.parse().ok()
}

fn bigint_mod(x: &BigInt, p: u64) -> u64 {
    let p_big = BigInt::from(p);
    let mut r = x % &p_big;
    if r.is_negative() {
        r += &p_big;
    }
    let (_, digits) = r.to_u64_digits();
    digits.first().copied().unwrap_or(0)
}

impl Scalar {
    pub fn field(&self) -> FieldDescriptor {
        match self {
            Scalar::Prime { p, .. } => FieldDescriptor::Prime { p: *p },
            Scalar::Rational(_) => FieldDescriptor::Rationals,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Prime { residue, .. } => *residue == 0,
            Scalar::Rational(r) => r.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Prime { residue, .. } => *residue == 1,
            Scalar::Rational(r) => r.is_one(),
        }
    }

    fn same_field(&self, other: &Scalar) -> Result<(), FieldError> {
        if self.field() == other.field() {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    pub fn checked_add(&self, other: &Scalar) -> Result<Scalar, FieldError> {
        self.same_field(other)?;
        Ok(match (self, other) {
            (Scalar::Prime { residue: a, p }, Scalar::Prime { residue: b, .. }) => Scalar::Prime {
                residue: ((*a as u128 + *b as u128) % *p as u128) as u64,
                p: *p,
            },
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            _ => unreachable!(),
        })
    }

    pub fn checked_sub(&self, other: &Scalar) -> Result<Scalar, FieldError> {
        self.checked_add(&other.negated())
    }

    pub fn checked_mul(&self, other: &Scalar) -> Result<Scalar, FieldError> {
        self.same_field(other)?;
        Ok(match (self, other) {
            (Scalar::Prime { residue: a, p }, Scalar::Prime { residue: b, .. }) => Scalar::Prime {
                residue: mul_mod(*a, *b, *p),
                p: *p,
            },
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            _ => unreachable!(),
        })
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar, FieldError> {
        self.checked_mul(&other.inverted()?)
    }

    /// Multiplicative inverse; errors on zero.
    pub fn inverted(&self) -> Result<Scalar, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(match self {
            Scalar::Prime { residue, p } => Scalar::Prime {
                residue: mod_pow(*residue, *p - 2, *p),
                p: *p,
            },
            Scalar::Rational(r) => Scalar::Rational(r.recip()),
        })
    }

    pub fn negated(&self) -> Scalar {
        match self {
            Scalar::Prime { residue, p } => Scalar::Prime {
                residue: if *residue == 0 { 0 } else { p - residue },
                p: *p,
            },
            Scalar::Rational(r) => Scalar::Rational(-r),
        }
    }
}

/// Canonical text form: `residue` for `F_p`, `n` or `n/d` for `Q`.
impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Prime { residue, .. } => write!(f, "{residue}"),
            Scalar::Rational(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

// Reference-based operator sugar for code paths where both operands are known
// to come from the same field (mixing fields is a programming error there).
macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl std::ops::$trait for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.$checked(rhs).expect("same-field operands required")
            }
        }
    };
}
scalar_binop!(Add, add, checked_add);
scalar_binop!(Sub, sub, checked_sub);
scalar_binop!(Mul, mul, checked_mul);

impl std::ops::Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.negated()
    }
}
