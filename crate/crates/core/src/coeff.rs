//! Exact Gaussian rationals `a/b + (c/d)·i`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// A Gaussian rational. `BigRational` keeps both parts reduced with a
/// positive denominator, so structural equality is numeric equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Coeff {
    pub re: BigRational,
    pub im: BigRational,
}

impl Coeff {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Coeff { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Coeff { re, im: BigRational::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Coeff::real(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn frac(p: i64, q: i64) -> Self {
        Coeff::real(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn i() -> Self {
        Coeff { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Coeff { re: self.re.clone(), im: -self.im.clone() }
    }

    /// `|z|²`, always a non-negative rational.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::NotAUnit);
        }
        let n = self.norm_sqr();
        Ok(Coeff { re: &self.re / &n, im: -&self.im / &n })
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Coeff::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Sign of a real coefficient; `None` when the imaginary part is nonzero.
    pub fn real_sign(&self) -> Option<i32> {
        if !self.is_real() {
            return None;
        }
        Some(if self.re.is_zero() {
            0
        } else if self.re.is_positive() {
            1
        } else {
            -1
        })
    }

    /// An exact k-th root inside the Gaussian rationals, when one is found.
    ///
    /// Real inputs: positive rationals give the positive root; negative ones
    /// give the real root for odd k, `i·r` for k ≡ 2 (mod 4) and `(1+i)·r`
    /// for k ≡ 0 (mod 4). Non-real inputs are only handled for k = 2.
    pub fn nth_root(&self, k: u32) -> Result<Self> {
        let fail = || Error::FieldExtension(format!("{} has no exact {}-th root over Q(i)", self, k));
        if k == 0 {
            return Err(fail());
        }
        if k == 1 || self.is_zero() {
            return Ok(self.clone());
        }
        if self.is_real() {
            let r = &self.re;
            if r.is_positive() {
                return rational_root(r, k).map(Coeff::real).ok_or_else(fail);
            }
            let a = -r.clone();
            if k % 2 == 1 {
                return rational_root(&a, k).map(|x| Coeff::real(-x)).ok_or_else(fail);
            }
            if k % 4 == 2 {
                return rational_root(&a, k)
                    .map(|x| Coeff::new(BigRational::zero(), x))
                    .ok_or_else(fail);
            }
            // (1+i)^k = (-4)^(k/4)
            let scale = BigRational::from_integer(BigInt::from(4)).pow((k / 4) as i32);
            let sign_ok = (k / 4) % 2 == 1;
            if !sign_ok {
                return Err(fail());
            }
            return rational_root(&(a / scale), k)
                .map(|x| Coeff::new(x.clone(), x))
                .ok_or_else(fail);
        }
        if k != 2 {
            return Err(fail());
        }
        // x² - y² = re, 2xy = im
        let modulus = rational_root(&self.norm_sqr(), 2).ok_or_else(fail)?;
        let two = BigRational::from_integer(BigInt::from(2));
        let x2 = (&modulus + &self.re) / &two;
        let x = rational_root(&x2, 2).ok_or_else(fail)?;
        if x.is_zero() {
            return Err(fail());
        }
        let y = &self.im / (&two * &x);
        Ok(Coeff::new(x, y))
    }

    /// Canonical `p/q` rendering of the real part.
    pub fn re_string(&self) -> String {
        rat_string(&self.re)
    }

    pub fn im_string(&self) -> String {
        rat_string(&self.im)
    }

    pub fn from_parts(re: &str, im: &str) -> Result<Self> {
        Ok(Coeff::new(parse_rat(re)?, parse_rat(im)?))
    }
}

fn rational_root(r: &BigRational, k: u32) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = integer_root(r.numer(), k)?;
    let d = integer_root(r.denom(), k)?;
    Some(BigRational::new(n, d))
}

fn integer_root(n: &BigInt, k: u32) -> Option<BigInt> {
    let r = n.nth_root(k);
    if num_traits::pow(r.clone(), k as usize) == *n {
        Some(r)
    } else {
        None
    }
}

pub fn rat_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer `p`. Zero denominators are rejected.
pub fn parse_rat(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("malformed rational {:?}", s));
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p = BigInt::from_str(p).map_err(|_| bad())?;
    let q = BigInt::from_str(q).map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(p, q))
}

impl Zero for Coeff {
    fn zero() -> Self {
        Coeff::default()
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for Coeff {
    fn one() -> Self {
        Coeff::real(BigRational::one())
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_real() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else {
            write!(f, "({}{}{}i)", self.re, if self.im.is_negative() { "" } else { "+" }, self.im)
        }
    }
}

impl fmt::Debug for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<'a> Add<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn add(self, o: &Coeff) -> Coeff {
        Coeff { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl<'a> Sub<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn sub(self, o: &Coeff) -> Coeff {
        Coeff { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'a> Mul<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn mul(self, o: &Coeff) -> Coeff {
        if self.im.is_zero() && o.im.is_zero() {
            return Coeff::real(&self.re * &o.re);
        }
        Coeff {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl<'a> Div<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    /// Panics on division by zero; fallible callers use [`Coeff::inv`].
    fn div(self, o: &Coeff) -> Coeff {
        self * &o.inv().expect("division by zero coefficient")
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff { re: -&self.re, im: -&self.im }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Coeff> for Coeff {
            type Output = Coeff;
            fn $m(self, o: Coeff) -> Coeff {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff { re: -self.re, im: -self.im }
    }
}

impl AddAssign<&Coeff> for Coeff {
    fn add_assign(&mut self, o: &Coeff) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&Coeff> for Coeff {
    fn sub_assign(&mut self, o: &Coeff) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

impl MulAssign<&Coeff> for Coeff {
    fn mul_assign(&mut self, o: &Coeff) {
        *self = &*self * o;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_ops_are_exact() {
        let a = Coeff::new(BigRational::new(1.into(), 3.into()), BigRational::new(2.into(), 5.into()));
        let b = a.inv().unwrap();
        assert_eq!(&a * &b, Coeff::one());
        assert_eq!(&(&a + &b) - &b, a);
    }

    #[test]
    fn roots() {
        assert_eq!(Coeff::frac(4, 9).nth_root(2).unwrap(), Coeff::frac(2, 3));
        assert_eq!(Coeff::from_int(-8).nth_root(3).unwrap(), Coeff::from_int(-2));
        assert_eq!(Coeff::from_int(-4).nth_root(2).unwrap(), Coeff::i().pow(1) * Coeff::from_int(2));
        let r = Coeff::from_int(-4).nth_root(4).unwrap();
        assert_eq!(r.pow(4), Coeff::from_int(-4));
        // (2+i)^2 = 3+4i
        let z = Coeff::new(BigRational::from_integer(3.into()), BigRational::from_integer(4.into()));
        assert_eq!(z.nth_root(2).unwrap().pow(2), z);
        assert!(matches!(Coeff::from_int(2).nth_root(2), Err(Error::FieldExtension(_))));
        assert!(matches!(Coeff::from_int(-1).nth_root(8), Err(Error::FieldExtension(_))));
    }

    #[test]
    fn parse_canonical() {
        let c = Coeff::from_parts("6/4", "-0/3").unwrap();
        assert_eq!(c.re_string(), "3/2");
        assert_eq!(c.im_string(), "0/1");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }
}
