//! Exact rational scalars and Pochhammer-symbol machinery.
//!
//! Every coefficient in the crate is a [`Rat`]. Gamma-function ratios only
//! ever appear normalized at the origin, which turns them into ratios of
//! Pochhammer symbols and keeps everything inside the rational field.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "Rat::new with zero denominator");
        Rat(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Result<Self> {
        if denom.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rat(BigRational::new(numer, denom)))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// The value as an `i64` when it is an integer that fits.
    pub fn to_i64(&self) -> Option<i64> {
        if self.0.is_integer() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }

    pub fn checked_div(&self, rhs: &Rat) -> Result<Rat> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rat(&self.0 / &rhs.0))
    }

    pub fn recip(&self) -> Result<Rat> {
        Rat::one().checked_div(self)
    }

    pub fn pow(&self, exp: u32) -> Rat {
        let mut acc = Rat::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// 1/k! as a rational.
    pub fn inv_factorial(k: u32) -> Rat {
        let mut f = BigInt::one();
        for i in 2..=k {
            f *= i;
        }
        Rat(BigRational::new(BigInt::one(), f))
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_int(n)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseRat(s.to_string());
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let valid = |t: &str| {
            let digits = t.strip_prefix('-').unwrap_or(t);
            !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
        };
        if !valid(num) || !valid(den) {
            return Err(bad());
        }
        let n: BigInt = num.parse().map_err(|_| bad())?;
        let d: BigInt = den.parse().map_err(|_| bad())?;
        Rat::from_big(n, d)
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat(self.0.$method(rhs.0))
            }
        }
        impl $tr<&Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat(self.0.$method(&rhs.0))
            }
        }
        impl $tr<Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        self.0 *= &rhs.0;
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl Product for Rat {
    fn product<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::one(), |acc, x| acc * x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn rat_arith(a: &Rat, b: &Rat, op: ArithOp) -> Result<Rat> {
    match op {
        ArithOp::Add => Ok(a + b),
        ArithOp::Sub => Ok(a - b),
        ArithOp::Mul => Ok(a * b),
        ArithOp::Div => a.checked_div(b),
    }
}

/// Rising factorial `(a)_k = a (a+1) ... (a+k-1)`.
pub fn pochhammer(a: &Rat, k: u32) -> Rat {
    let mut acc = Rat::one();
    let mut term = a.clone();
    let one = Rat::one();
    for _ in 0..k {
        acc *= &term;
        term += &one;
    }
    acc
}

/// `(a)_k / (b)_k`, the eigenvalue of `Γ(E+a)/Γ(E+b)` (normalized at `E = 0`)
/// on an eigenvector of the Euler operator `E` with eigenvalue `k`.
pub fn pochhammer_ratio(a: &Rat, b: &Rat, k: u32) -> Result<Rat> {
    let den = pochhammer(b, k);
    if den.is_zero() {
        return Err(Error::PoleAtParameter {
            base: b.clone(),
            length: i64::from(k),
        });
    }
    Ok(pochhammer(a, k) * den.recip()?)
}

/// Normalized Gamma ratio `Γ(k+a) Γ(b) / (Γ(a) Γ(k+b))` for any integer `k`.
///
/// For `k >= 0` this is [`pochhammer_ratio`]. For `k < 0` it continues to
/// `∏_{j=1}^{|k|} (b-j)/(a-j)`, which is what the diagonal factors have to
/// do on Laurent monomials. With `b = 1` every negative `k` gives zero.
pub fn gamma_ratio(a: &Rat, b: &Rat, k: i64) -> Result<Rat> {
    if k >= 0 {
        let k = u32::try_from(k).map_err(|_| Error::Config(format!("exponent {k} too large")))?;
        return pochhammer_ratio(a, b, k);
    }
    let mut num = Rat::one();
    let mut den = Rat::one();
    for j in 1..=(-k) {
        let j = Rat::from_int(j);
        num *= &(b - &j);
        den *= &(a - &j);
    }
    if den.is_zero() {
        return Err(Error::PoleAtParameter {
            base: a.clone(),
            length: k,
        });
    }
    Ok(num * den.recip()?)
}

/// Binomial coefficient as a rational, `n` nonnegative.
pub fn binomial(n: u32, k: u32) -> Rat {
    if k > n {
        return Rat::zero();
    }
    let mut acc = Rat::one();
    for i in 0..k {
        acc = acc * Rat::from_int(i64::from(n - i));
        acc = acc * Rat::new(1, i64::from(i + 1));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(rat_arith(&r("1/2"), &r("1/3"), ArithOp::Add).unwrap(), r("5/6"));
        let x = r("-7/9");
        assert_eq!(rat_arith(&x, &Rat::one(), ArithOp::Mul).unwrap(), x);
        assert_eq!(rat_arith(&r("2/4"), &Rat::zero(), ArithOp::Add).unwrap(), r("1/2"));
        assert_eq!(r("2/4").to_string(), "1/2");
        assert_eq!(
            rat_arith(&Rat::one(), &Rat::zero(), ArithOp::Div),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn parse_and_print() {
        assert_eq!(r("3").to_string(), "3");
        assert_eq!(r("-6/4").to_string(), "-3/2");
        assert_eq!(r("0/5"), Rat::zero());
        assert_eq!(r("0").to_string(), "0");
        assert!("1/0".parse::<Rat>().is_err());
        assert!("abc".parse::<Rat>().is_err());
        assert!("1.5".parse::<Rat>().is_err());
        assert!("".parse::<Rat>().is_err());
        let json = serde_json::to_string(&r("-2/3")).unwrap();
        assert_eq!(json, "\"-2/3\"");
        let back: Rat = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r("-2/3"));
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(&r("11/7"), 0), Rat::one());
        // (1/2)(3/2)(5/2)
        let oracle = r("1/2") * r("3/2") * r("5/2");
        assert_eq!(pochhammer(&r("1/2"), 3), oracle);
        assert_eq!(oracle, r("15/8"));
        assert_eq!(pochhammer(&r("2"), 2), r("6"));
    }

    #[test]
    fn pochhammer_ratio_examples() {
        assert_eq!(pochhammer_ratio(&r("3"), &r("-5/2"), 0).unwrap(), Rat::one());
        let oracle = (r("3/2") * r("5/2")) * (r("1/2") * r("3/2")).recip().unwrap();
        assert_eq!(pochhammer_ratio(&r("3/2"), &r("1/2"), 2).unwrap(), oracle);
        assert_eq!(oracle, r("5"));
        assert_eq!(pochhammer_ratio(&r("-1"), &r("1/3"), 2).unwrap(), Rat::zero());
        assert!(matches!(
            pochhammer_ratio(&r("1/2"), &r("-2"), 3),
            Err(Error::PoleAtParameter { .. })
        ));
    }

    #[test]
    fn gamma_ratio_negative_exponents() {
        // Γ(E+1) in the denominator kills every negative exponent.
        for k in 1..5 {
            assert_eq!(gamma_ratio(&r("2/7"), &Rat::one(), -k).unwrap(), Rat::zero());
        }
        // Γ(k+a)Γ(b)/(Γ(a)Γ(k+b)) at k=-1 is (b-1)/(a-1).
        assert_eq!(gamma_ratio(&r("1/3"), &r("3/4"), -1).unwrap(), r("3/8"));
        assert!(gamma_ratio(&r("2"), &r("1/3"), -2).is_err());
        // shifting k by one multiplies by (a+k)/(b+k) across zero as well
        let (a, b) = (r("1/3"), r("3/4"));
        for k in -3..3 {
            let lhs = gamma_ratio(&a, &b, k + 1).unwrap();
            let kk = Rat::from_int(k);
            let rhs = gamma_ratio(&a, &b, k).unwrap() * (&a + &kk) * (&b + &kk).recip().unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), r("10"));
        assert_eq!(binomial(3, 4), Rat::zero());
        assert_eq!(binomial(0, 0), Rat::one());
    }

    fn small_rat() -> impl Strategy<Value = Rat> {
        (-60i64..=60, 1i64..=15).prop_map(|(p, q)| Rat::new(p, q))
    }

    proptest! {
        #[test]
        fn pochhammer_recurrence(a in small_rat(), k in 0u32..8) {
            let lhs = pochhammer(&a, k + 1);
            let rhs = pochhammer(&a, k) * (&a + &Rat::from_int(i64::from(k)));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn ratio_inverse(a in small_rat(), b in small_rat(), k in 0u32..6) {
            prop_assume!(!pochhammer(&a, k).is_zero() && !pochhammer(&b, k).is_zero());
            let p = pochhammer_ratio(&a, &b, k).unwrap() * pochhammer_ratio(&b, &a, k).unwrap();
            prop_assert!(p.is_one());
        }

        #[test]
        fn field_cancellation(a in small_rat(), b in small_rat()) {
            prop_assert_eq!((&a + &b) - &b, a.clone());
            if !b.is_zero() {
                prop_assert_eq!((&a * &b).checked_div(&b).unwrap(), a);
            }
        }
    }
}
