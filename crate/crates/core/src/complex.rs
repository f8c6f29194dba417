//! Multiprecision complex numbers on top of `astro_float::BigFloat`.
//!
//! Every value carries its working precision in bits; binary operations use
//! the larger precision of the two operands and round to nearest-even.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign, WORD_BIT_SIZE};

use crate::error::{Error, Result};

pub(crate) const RM: RoundingMode = RoundingMode::ToEven;

/// Multiprecision real scalar used for magnitudes and residuals.
pub type Real = BigFloat;

#[derive(Clone, Debug)]
pub struct Complex {
    re: BigFloat,
    im: BigFloat,
    prec: usize,
}

impl Complex {
    pub fn new(re: BigFloat, im: BigFloat, prec: usize) -> Self {
        Complex { re, im, prec }
    }

    pub fn zero(prec: usize) -> Self {
        Complex::from_i64(0, prec)
    }

    pub fn one(prec: usize) -> Self {
        Complex::from_i64(1, prec)
    }

    pub fn from_i64(v: i64, prec: usize) -> Self {
        Complex {
            re: BigFloat::from_i64(v, prec),
            im: BigFloat::from_i64(0, prec),
            prec,
        }
    }

    pub fn from_f64(re: f64, im: f64, prec: usize) -> Self {
        Complex {
            re: BigFloat::from_f64(re, prec),
            im: BigFloat::from_f64(im, prec),
            prec,
        }
    }

    pub fn from_real(re: BigFloat, prec: usize) -> Self {
        Complex {
            re,
            im: BigFloat::from_i64(0, prec),
            prec,
        }
    }

    /// `mag * exp(i * phase)`, with the cosine and sine rounded to f64.
    pub fn from_polar_f64(mag: f64, phase: f64, prec: usize) -> Self {
        Complex::from_f64(mag * phase.cos(), mag * phase.sin(), prec)
    }

    /// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i` with decimal parts.
    pub fn parse(s: &str, prec: usize) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(Error::Parse(s.to_string()));
        }
        let mut cc = Consts::new().map_err(|_| Error::Parse(s.to_string()))?;
        let bytes = t.as_bytes();
        let (re_part, im_part) = if let Some(body) = t.strip_suffix(['i', 'I']) {
            // split at the last sign that is not an exponent sign
            let split = (1..body.len()).rev().find(|&i| {
                (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E')
            });
            match split {
                Some(i) => (&body[..i], &body[i..]),
                None => ("", body),
            }
        } else {
            (t.as_str(), "")
        };
        let real = |part: &str, cc: &mut Consts| -> Result<BigFloat> {
            let v = BigFloat::parse(part, Radix::Dec, prec, RM, cc);
            if v.is_nan() || v.is_inf() {
                Err(Error::Parse(s.to_string()))
            } else {
                Ok(v)
            }
        };
        let re = if re_part.is_empty() {
            BigFloat::from_i64(0, prec)
        } else {
            real(re_part, &mut cc)?
        };
        let im = match im_part {
            "" if !t.ends_with(['i', 'I']) => BigFloat::from_i64(0, prec),
            "" | "+" => BigFloat::from_i64(1, prec),
            "-" => BigFloat::from_i64(-1, prec),
            part => real(part, &mut cc)?,
        };
        Ok(Complex { re, im, prec })
    }

    pub fn re(&self) -> &BigFloat {
        &self.re
    }

    pub fn im(&self) -> &BigFloat {
        &self.im
    }

    /// Same value carried at `prec` bits; raising precision is exact.
    pub fn with_precision(&self, prec: usize) -> Self {
        Complex {
            re: self.re.clone(),
            im: self.im.clone(),
            prec,
        }
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Complex {
            re: self.re.clone(),
            im: BigFloat::neg(&self.im),
            prec: self.prec,
        }
    }

    pub fn norm_sqr(&self) -> BigFloat {
        let p = self.prec;
        self.re
            .mul(&self.re, p, RM)
            .add(&self.im.mul(&self.im, p, RM), p, RM)
    }

    pub fn abs(&self) -> BigFloat {
        self.norm_sqr().sqrt(self.prec, RM)
    }

    /// `log2 |z|` from the leading mantissa words; `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        let lr = real_log2_abs(&self.re);
        let li = real_log2_abs(&self.im);
        let m = lr.max(li);
        if m == f64::NEG_INFINITY {
            return m;
        }
        let s = (2.0 * (lr - m)).exp2() + (2.0 * (li - m)).exp2();
        m + 0.5 * s.log2()
    }

    /// Nearest f64 pair; magnitudes outside the f64 range saturate.
    pub fn to_f64(&self) -> (f64, f64) {
        (real_to_f64(&self.re), real_to_f64(&self.im))
    }

    pub fn abs_f64(&self) -> f64 {
        self.log2_abs().exp2()
    }

    pub fn recip(&self) -> Self {
        let p = self.prec;
        let d = self.norm_sqr().reciprocal(p, RM);
        Complex {
            re: self.re.mul(&d, p, RM),
            im: BigFloat::neg(&self.im.mul(&d, p, RM)),
            prec: p,
        }
    }

    /// Integer power by repeated squaring; negative exponents invert.
    pub fn powi(&self, n: i64) -> Self {
        if n < 0 {
            return self.powi_unsigned(n.unsigned_abs()).recip();
        }
        self.powi_unsigned(n as u64)
    }

    fn powi_unsigned(&self, mut n: u64) -> Self {
        let mut acc = Complex::one(self.prec);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Principal square root (branch cut on the negative real axis,
    /// `sqrt(-x) = +i sqrt(x)`).
    pub fn sqrt(&self) -> Self {
        let p = self.prec;
        if self.is_zero() {
            return Complex::zero(p);
        }
        let two = BigFloat::from_i64(2, p);
        let r = self.abs();
        if !self.re.is_negative() {
            let t = r.add(&self.re, p, RM).div(&two, p, RM).sqrt(p, RM);
            let im = self.im.div(&t.mul(&two, p, RM), p, RM);
            Complex { re: t, im, prec: p }
        } else {
            let t = r.sub(&self.re, p, RM).div(&two, p, RM).sqrt(p, RM);
            let re = self.im.abs().div(&t.mul(&two, p, RM), p, RM);
            let im = if self.im.is_negative() { t.neg() } else { t };
            Complex { re, im, prec: p }
        }
    }

    pub fn scale(&self, k: i64) -> Self {
        let f = BigFloat::from_i64(k, self.prec);
        Complex {
            re: self.re.mul(&f, self.prec, RM),
            im: self.im.mul(&f, self.prec, RM),
            prec: self.prec,
        }
    }

    /// `self * 2^k`.
    pub fn mul_pow2(&self, k: i64) -> Self {
        let two = BigFloat::from_i64(2, self.prec);
        let mut f = two.powi(k.unsigned_abs() as usize, self.prec, RM);
        if k < 0 {
            f = f.reciprocal(self.prec, RM);
        }
        Complex {
            re: self.re.mul(&f, self.prec, RM),
            im: self.im.mul(&f, self.prec, RM),
            prec: self.prec,
        }
    }

    /// Decimal strings of both parts, rounded to `digits` significant
    /// digits when given, otherwise at full working precision.
    pub fn to_decimal(&self, digits: Option<usize>) -> (String, String) {
        (
            real_to_decimal(&self.re, digits),
            real_to_decimal(&self.im, digits),
        )
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.to_decimal(f.precision());
        if let Some(mag) = im.strip_prefix('-') {
            write!(f, "{re} - {mag}i")
        } else {
            write!(f, "{re} + {im}i")
        }
    }
}

pub fn real_log2_abs(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    match x.as_raw_parts() {
        Some((m, _, _, e, _)) => match m.last() {
            Some(&top) if top != 0 => (top as f64).log2() - WORD_BIT_SIZE as f64 + e as f64,
            _ => f64::NEG_INFINITY,
        },
        None => f64::INFINITY,
    }
}

pub fn real_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let Some((m, _, sign, e, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let top = m.last().copied().unwrap_or(0) as f64;
    let k = e as i64 - WORD_BIT_SIZE as i64;
    let k = k.clamp(-4000, 4000) as i32;
    let v = top * 2f64.powi(k / 2) * 2f64.powi(k - k / 2);
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

pub fn real_to_decimal(x: &BigFloat, digits: Option<usize>) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let Ok(mut cc) = Consts::new() else {
        return "NaN".to_string();
    };
    let s = x
        .format(Radix::Dec, RM, &mut cc)
        .unwrap_or_else(|_| "NaN".to_string());
    match digits {
        Some(d) => round_scientific(&s, d.max(1)),
        // astro-float prints `5.e-1` for short mantissas
        None => s.replacen(".e", "e", 1),
    }
}

/// Rounds a scientific string such as `-1.2345e-7` to `digits`
/// significant digits (half up on the decimal string).
fn round_scientific(s: &str, digits: usize) -> String {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (mant, exp) = match body.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().unwrap_or(0)),
        None => (body, 0),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let mut ds: Vec<u8> = int_part
        .bytes()
        .chain(frac_part.bytes())
        .map(|b| b - b'0')
        .collect();
    // exponent of the first digit
    let mut lead = exp + int_part.len() as i64 - 1;
    while ds.len() > 1 && ds[0] == 0 {
        ds.remove(0);
        lead -= 1;
    }
    if ds.len() > digits {
        let round_up = ds[digits] >= 5;
        ds.truncate(digits);
        if round_up {
            let mut i = digits;
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    ds.truncate(digits);
                    lead += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
    }
    while ds.len() > 1 && ds.last() == Some(&0) {
        ds.pop();
    }
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push((b'0' + ds[0]) as char);
    if ds.len() > 1 {
        out.push('.');
        out.extend(ds[1..].iter().map(|d| (b'0' + d) as char));
    }
    if lead != 0 {
        out.push_str(&format!("e{lead}"));
    }
    out
}

fn add_impl(a: &Complex, b: &Complex) -> Complex {
    let p = a.prec.max(b.prec);
    Complex {
        re: a.re.add(&b.re, p, RM),
        im: a.im.add(&b.im, p, RM),
        prec: p,
    }
}

fn sub_impl(a: &Complex, b: &Complex) -> Complex {
    let p = a.prec.max(b.prec);
    Complex {
        re: a.re.sub(&b.re, p, RM),
        im: a.im.sub(&b.im, p, RM),
        prec: p,
    }
}

fn mul_impl(a: &Complex, b: &Complex) -> Complex {
    let p = a.prec.max(b.prec);
    let ac = a.re.mul(&b.re, p, RM);
    let bd = a.im.mul(&b.im, p, RM);
    let ad = a.re.mul(&b.im, p, RM);
    let bc = a.im.mul(&b.re, p, RM);
    Complex {
        re: ac.sub(&bd, p, RM),
        im: ad.add(&bc, p, RM),
        prec: p,
    }
}

fn div_impl(a: &Complex, b: &Complex) -> Complex {
    mul_impl(a, &b.recip())
}

macro_rules! binop {
    ($tr:ident, $method:ident, $imp:ident) => {
        impl $tr<&Complex> for &Complex {
            type Output = Complex;
            fn $method(self, rhs: &Complex) -> Complex {
                $imp(self, rhs)
            }
        }
        impl $tr<Complex> for &Complex {
            type Output = Complex;
            fn $method(self, rhs: Complex) -> Complex {
                $imp(self, &rhs)
            }
        }
        impl $tr<&Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: &Complex) -> Complex {
                $imp(&self, rhs)
            }
        }
        impl $tr<Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: Complex) -> Complex {
                $imp(&self, &rhs)
            }
        }
    };
}

binop!(Add, add, add_impl);
binop!(Sub, sub, sub_impl);
binop!(Mul, mul, mul_impl);
binop!(Div, div, div_impl);

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex {
            re: BigFloat::neg(&self.re),
            im: BigFloat::neg(&self.im),
            prec: self.prec,
        }
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        -&self
    }
}

impl std::iter::Product for Complex {
    fn product<I: Iterator<Item = Complex>>(iter: I) -> Complex {
        let mut iter = iter.peekable();
        let prec = iter.peek().map_or(64, |c| c.prec);
        iter.fold(Complex::one(prec), |acc, x| acc * x)
    }
}
