//! Modified Jacobi theta function, q,p-shifted factorials and the
//! generalized product convention.
//!
//! `theta(x;p) = (x;p)_inf (p/x;p)_inf`. Values are computed from the
//! triple product series
//!
//! ```text
//! theta(x;p) (p;p)_inf = sum_n (-1)^n p^(n(n-1)/2) x^n
//! ```
//!
//! summed over the window of indices whose terms are within the working
//! precision of the largest one. Arguments far outside the precomputed
//! window fall back to the truncated double product.

use std::sync::Arc;

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::precision::PrecisionContext;

/// Largest |log2 x| covered by the precomputed series coefficients.
const LOG2_ARG_RANGE: f64 = 96.0;
/// Extra bits kept below the working precision when truncating the series.
const GUARD_BITS: f64 = 24.0;
const MAX_SERIES_TERMS: usize = 4096;
/// Guard factors appended to truncated infinite products.
const GUARD_FACTORS: usize = 8;

#[derive(Clone, Debug)]
pub struct Nome {
    p: Complex,
    series: Option<Arc<TripleProduct>>,
}

#[derive(Debug)]
struct TripleProduct {
    /// c_n for n = 0..=N
    pos: Vec<Complex>,
    /// c_{-n} for n = 1..=N, stored at index n-1
    neg: Vec<Complex>,
    inv_euler: Complex,
    log2_inv_euler: f64,
    log2_p: f64,
    bits: usize,
}

impl Nome {
    pub fn new(p: Complex, ctx: &PrecisionContext) -> Result<Self> {
        let lp = p.log2_abs();
        if lp >= 0.0 {
            return Err(Error::Domain(format!(
                "nome must satisfy |p| < 1, got |p| = {}",
                p.abs_f64()
            )));
        }
        if p.is_zero() {
            return Ok(Nome { p, series: None });
        }
        let series = TripleProduct::build(&p, lp, ctx);
        Ok(Nome {
            p,
            series: series.map(Arc::new),
        })
    }

    pub fn zero(ctx: &PrecisionContext) -> Self {
        Nome {
            p: Complex::zero(ctx.precision_bits()),
            series: None,
        }
    }

    pub fn from_f64(re: f64, im: f64, ctx: &PrecisionContext) -> Result<Self> {
        Nome::new(Complex::from_f64(re, im, ctx.precision_bits()), ctx)
    }

    pub fn p(&self) -> &Complex {
        &self.p
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero()
    }
}

impl TripleProduct {
    fn build(p: &Complex, lp: f64, ctx: &PrecisionContext) -> Option<Self> {
        let bits = ctx.precision_bits();
        let width = (2.0 * (bits as f64 + GUARD_BITS) / -lp).sqrt() + 1.0;
        let n = (0.5 + LOG2_ARG_RANGE / -lp + width).ceil() as usize + 2;
        if n > MAX_SERIES_TERMS {
            return None;
        }
        let one = Complex::one(bits);
        let mut pos = Vec::with_capacity(n + 1);
        let mut neg = Vec::with_capacity(n);
        // c_{n+1} = -c_n p^n,  c_{-(n+1)} = -c_{-n} p^(n+1)
        let mut c = one.clone();
        let mut pk = one.clone();
        for _ in 0..=n {
            pos.push(c.clone());
            c = -(&c * &pk);
            pk = &pk * p;
        }
        let mut c = one.clone();
        let mut pk = p.clone();
        for _ in 0..n {
            c = -(&c * &pk);
            neg.push(c.clone());
            pk = &pk * p;
        }
        let euler = infinite_product_raw(p, p, lp, ctx);
        let inv_euler = euler.recip();
        Some(TripleProduct {
            log2_inv_euler: inv_euler.log2_abs(),
            pos,
            neg,
            inv_euler,
            log2_p: lp,
            bits,
        })
    }

    /// log2 |c_n x^n|
    fn term_log2(&self, n: f64, lx: f64) -> f64 {
        0.5 * n * (n - 1.0) * self.log2_p + n * lx
    }

    fn eval(&self, x: &Complex, lx: f64) -> Option<ThetaValue> {
        let lp = self.log2_p;
        let centre = 0.5 - lx / lp;
        let width = (2.0 * (self.bits as f64 + GUARD_BITS) / -lp).sqrt() + 1.0;
        let hi = (centre + width).ceil() as i64;
        let lo = (centre - width).floor() as i64;
        let nmax = self.neg.len() as i64;
        if hi > nmax || -lo > nmax {
            return None;
        }
        let prec = self.bits;
        let mut sum = Complex::zero(prec);
        if hi >= 0 {
            let mut acc = self.pos[hi as usize].clone();
            for k in (0..hi as usize).rev() {
                acc = &(&acc * x) + &self.pos[k];
            }
            sum = acc;
        }
        if lo < 0 {
            let y = x.recip();
            let m = (-lo) as usize;
            let mut acc = self.neg[m - 1].clone();
            for k in (1..m).rev() {
                acc = &(&acc * &y) + &self.neg[k - 1];
            }
            sum = &sum + &(&acc * &y);
        }
        let peak = self
            .term_log2(centre.floor(), lx)
            .max(self.term_log2(centre.ceil(), lx));
        let rel_log2 = sum.log2_abs() - peak;
        Some(ThetaValue {
            value: &sum * &self.inv_euler,
            rel_log2,
            scale_log2: peak + self.log2_inv_euler,
        })
    }
}

/// A theta value together with its size relative to the largest term
/// that went into it; small `rel_log2` means the argument sits near a zero.
#[derive(Clone, Debug)]
pub struct ThetaValue {
    pub value: Complex,
    pub rel_log2: f64,
    pub scale_log2: f64,
}

/// `prod_{k=0}^{K} (1 - x p^k)` with K the first index where
/// `|x||p|^K` drops below the cutoff, plus guard factors.
pub fn infinite_p_pochhammer(x: &Complex, nome: &Nome, ctx: &PrecisionContext) -> Result<Complex> {
    let p = nome.p();
    let lp = p.log2_abs();
    if lp >= 0.0 {
        return Err(Error::Domain("nome must satisfy |p| < 1".into()));
    }
    if p.is_zero() {
        return Ok(&Complex::one(ctx.precision_bits()) - x);
    }
    Ok(infinite_product_raw(x, p, lp, ctx))
}

pub(crate) fn infinite_product_raw(
    x: &Complex,
    p: &Complex,
    lp: f64,
    ctx: &PrecisionContext,
) -> Complex {
    let one = Complex::one(ctx.precision_bits());
    let lx = x.log2_abs();
    if lx == f64::NEG_INFINITY {
        return one;
    }
    let k = ((ctx.product_cutoff_log2() - lx) / lp).ceil().max(0.0) as usize;
    let mut acc = one.clone();
    let mut xp = x.clone();
    for _ in 0..=k + GUARD_FACTORS {
        acc = &acc * &(&one - &xp);
        xp = &xp * p;
    }
    acc
}

/// Theta value with magnitude information, zeros snapped to exact 0.
pub fn theta_eval(x: &Complex, nome: &Nome, ctx: &PrecisionContext) -> Result<ThetaValue> {
    if x.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let prec = ctx.precision_bits();
    let zero_thr = ctx.zero_threshold_log2();
    let lx = x.log2_abs();
    let tv = if nome.is_zero() {
        let v = &Complex::one(prec) - x;
        let scale = lx.max(0.0);
        ThetaValue {
            rel_log2: v.log2_abs() - scale,
            value: v,
            scale_log2: scale,
        }
    } else {
        let fast = nome
            .series
            .as_ref()
            .filter(|_| lx.abs() <= LOG2_ARG_RANGE)
            .and_then(|s| s.eval(x, lx));
        match fast {
            Some(tv) => tv,
            None => theta_by_product(x, nome, ctx),
        }
    };
    if tv.rel_log2 < zero_thr {
        return Ok(ThetaValue {
            value: Complex::zero(prec),
            rel_log2: f64::NEG_INFINITY,
            scale_log2: tv.scale_log2,
        });
    }
    Ok(tv)
}

/// Direct evaluation of both infinite products; each factor is checked
/// against the zero threshold relative to its own size.
fn theta_by_product(x: &Complex, nome: &Nome, ctx: &PrecisionContext) -> ThetaValue {
    let p = nome.p();
    let lp = p.log2_abs();
    let one = Complex::one(ctx.precision_bits());
    let mut rel = 0.0f64;
    let mut scale = 0.0f64;
    let mut value = one.clone();
    for start in [x.clone(), p / x] {
        let ls = start.log2_abs();
        let k = ((ctx.product_cutoff_log2() - ls) / lp).ceil().max(0.0) as usize;
        let mut xp = start;
        for _ in 0..=k + GUARD_FACTORS {
            let f = &one - &xp;
            let s = xp.log2_abs().max(0.0);
            rel = rel.min(f.log2_abs() - s);
            scale += s;
            value = &value * &f;
            xp = &xp * p;
        }
    }
    ThetaValue {
        value,
        rel_log2: rel,
        scale_log2: scale,
    }
}

pub fn theta(x: &Complex, nome: &Nome, ctx: &PrecisionContext) -> Result<Complex> {
    theta_eval(x, nome, ctx).map(|t| t.value)
}

pub fn theta_multi(xs: &[Complex], nome: &Nome, ctx: &PrecisionContext) -> Result<Complex> {
    let mut acc = Complex::one(ctx.precision_bits());
    for x in xs {
        acc = &acc * &theta(x, nome, ctx)?;
    }
    Ok(acc)
}

/// `theta(x;p) / theta(y;p)`, taken as 1 when `x` and `y` coincide to the
/// zero threshold (the removable 0/0 case when both sit on a zero).
pub fn theta_ratio(
    x: &Complex,
    y: &Complex,
    nome: &Nome,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    let diff = (x - y).log2_abs() - y.log2_abs();
    if diff < ctx.zero_threshold_log2() {
        return Ok(Complex::one(ctx.precision_bits()));
    }
    let den = theta(y, nome, ctx)?;
    if den.is_zero() {
        return Err(Error::SingularDenominator {
            what: "theta ratio".into(),
            index: 0,
        });
    }
    Ok(theta(x, nome, ctx)? / den)
}

/// `(a;q,p)_n` for any integer n.
pub fn qp_factorial(
    a: &Complex,
    q: &Complex,
    nome: &Nome,
    n: i64,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    if a.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let prec = ctx.precision_bits();
    if n == 0 {
        return Ok(Complex::one(prec));
    }
    let (mut x, len) = if n > 0 {
        (a.clone(), n)
    } else {
        (a * &q.powi(n), -n)
    };
    let mut acc = Complex::one(prec);
    for k in 0..len {
        let t = theta(&x, nome, ctx)?;
        if n < 0 && t.is_zero() {
            return Err(Error::SingularDenominator {
                what: "negative-index factorial".into(),
                index: n + k,
            });
        }
        acc = &acc * &t;
        x = &x * q;
    }
    Ok(if n > 0 { acc } else { acc.recip() })
}

pub fn qp_factorial_multi(
    xs: &[Complex],
    q: &Complex,
    nome: &Nome,
    n: i64,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    let mut acc = Complex::one(ctx.precision_bits());
    for a in xs {
        acc = &acc * &qp_factorial(a, q, nome, n, ctx)?;
    }
    Ok(acc)
}

/// `prod_{k=m}^{n} f(k)` with the convention that the empty range m = n+1
/// gives 1 and m >= n+2 gives `1 / (f(n+1) ... f(m-1))`.
pub fn generalized_product<F>(mut f: F, m: i64, n: i64, prec: usize) -> Result<Complex>
where
    F: FnMut(i64) -> Complex,
{
    let mut acc = Complex::one(prec);
    if m <= n {
        for k in m..=n {
            acc = &acc * &f(k);
        }
        return Ok(acc);
    }
    for k in n + 1..m {
        let v = f(k);
        if v.is_zero() {
            return Err(Error::DivisionByZero(k));
        }
        acc = &acc * &v;
    }
    Ok(acc.recip())
}
