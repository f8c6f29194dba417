//! Theta-product building blocks with regularity bookkeeping.
//!
//! Every theta value that ends up as a divisor is recorded in a
//! [`Regularity`] so a sampler can reject parameter draws that sit close
//! to a pole.

use std::borrow::Borrow;
use std::cell::Cell;

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::precision::PrecisionContext;
use crate::theta::{theta_eval, Nome};

/// Smallest relative magnitude (log2) seen among divisor thetas.
#[derive(Debug)]
pub struct Regularity {
    worst: Cell<f64>,
}

impl Default for Regularity {
    fn default() -> Self {
        Regularity {
            worst: Cell::new(f64::INFINITY),
        }
    }
}

impl Regularity {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn note(&self, rel_log2: f64) {
        if rel_log2 < self.worst.get() {
            self.worst.set(rel_log2);
        }
    }

    pub fn worst_log2(&self) -> f64 {
        self.worst.get()
    }
}

/// Running sum that also tracks the largest summand magnitude.
#[derive(Clone, Debug)]
pub struct Accum {
    pub total: Complex,
    pub max_log2: f64,
}

impl Accum {
    pub fn new(prec: usize) -> Self {
        Accum {
            total: Complex::zero(prec),
            max_log2: f64::NEG_INFINITY,
        }
    }

    pub fn add(&mut self, t: &Complex) {
        self.max_log2 = self.max_log2.max(t.log2_abs());
        self.total = &self.total + t;
    }
}

/// `prod num / prod den` of plain complex values.
pub fn mono(num: &[&Complex], den: &[&Complex]) -> Complex {
    let prec = num
        .iter()
        .chain(den)
        .map(|x| x.precision())
        .next()
        .unwrap_or(64);
    let mut n = Complex::one(prec);
    for x in num {
        n = &n * *x;
    }
    let mut d = Complex::one(prec);
    for x in den {
        d = &d * *x;
    }
    n / d
}

/// Theta evaluation plus the products built from it. Implemented by the
/// theta machinery ([`Terms`]) and by the plain `1 - x` kernel used as a
/// p = 0 oracle.
pub trait Kernel {
    fn prec(&self) -> usize;

    fn zero_threshold_log2(&self) -> f64;

    fn th(&self, x: &Complex) -> Result<Complex>;

    /// Theta value destined for a denominator; an exact zero is a
    /// singularity.
    fn th_den(&self, x: &Complex, index: i64) -> Result<Complex>;

    fn one(&self) -> Complex {
        Complex::one(self.prec())
    }

    fn num(&self, v: i64) -> Complex {
        Complex::from_i64(v, self.prec())
    }

    fn ths<B: Borrow<Complex>>(&self, xs: impl IntoIterator<Item = B>) -> Result<Complex> {
        let mut acc = self.one();
        for x in xs {
            acc = &acc * &self.th(x.borrow())?;
        }
        Ok(acc)
    }

    /// `1 / prod theta(x)`.
    fn ths_inv<B: Borrow<Complex>>(&self, xs: impl IntoIterator<Item = B>) -> Result<Complex> {
        let mut acc = self.one();
        for x in xs {
            acc = &acc * &self.th_den(x.borrow(), 0)?;
        }
        Ok(acc.recip())
    }

    /// `prod theta(num) / prod theta(den)`.
    fn quot<B: Borrow<Complex>, C: Borrow<Complex>>(
        &self,
        num: impl IntoIterator<Item = B>,
        den: impl IntoIterator<Item = C>,
    ) -> Result<Complex> {
        Ok(self.ths(num)? * self.ths_inv(den)?)
    }

    /// `theta(x)/theta(y)`, equal to 1 when x and y coincide.
    fn th_ratio(&self, x: &Complex, y: &Complex) -> Result<Complex> {
        let diff = (x - y).log2_abs() - y.log2_abs();
        if diff < self.zero_threshold_log2() {
            return Ok(self.one());
        }
        Ok(self.th(x)? / self.th_den(y, 0)?)
    }

    /// The thetas of `(a;q,p)_n`: theta(a q^k) for k in 0..n when n >= 0,
    /// and theta(a q^(n+k)) for k in 0..-n otherwise.
    fn fac_thetas(&self, a: &Complex, q: &Complex, n: i64, divisor: bool) -> Result<Complex> {
        if a.is_zero() {
            return Err(Error::ZeroArgument);
        }
        let (mut x, len, first) = if n >= 0 {
            (a.clone(), n, 0)
        } else {
            (a * &q.powi(n), -n, n)
        };
        let mut acc = self.one();
        for k in 0..len {
            let t = if divisor {
                self.th_den(&x, first + k)?
            } else {
                self.th(&x)?
            };
            acc = &acc * &t;
            x = &x * q;
        }
        Ok(acc)
    }

    /// `(a;q,p)_n` for any integer n.
    fn fac(&self, a: &Complex, q: &Complex, n: i64) -> Result<Complex> {
        if n >= 0 {
            self.fac_thetas(a, q, n, false)
        } else {
            Ok(self.fac_thetas(a, q, n, true)?.recip())
        }
    }

    /// `1 / (a;q,p)_n` for any integer n.
    fn fac_inv(&self, a: &Complex, q: &Complex, n: i64) -> Result<Complex> {
        if n >= 0 {
            Ok(self.fac_thetas(a, q, n, true)?.recip())
        } else {
            self.fac_thetas(a, q, n, false)
        }
    }

    /// `prod_i (a_i;q,p)_n` over a common base.
    fn facs<B: Borrow<Complex>>(
        &self,
        xs: impl IntoIterator<Item = B>,
        q: &Complex,
        n: i64,
    ) -> Result<Complex> {
        let mut acc = self.one();
        for a in xs {
            acc = &acc * &self.fac(a.borrow(), q, n)?;
        }
        Ok(acc)
    }

    /// `1 / prod_i (a_i;q,p)_n` over a common base.
    fn facs_inv<B: Borrow<Complex>>(
        &self,
        xs: impl IntoIterator<Item = B>,
        q: &Complex,
        n: i64,
    ) -> Result<Complex> {
        let mut acc = self.one();
        for a in xs {
            acc = &acc * &self.fac_inv(a.borrow(), q, n)?;
        }
        Ok(acc)
    }

    /// `prod (a_i;q_i,p)_n / prod (b_j;r_j,p)_n` with per-factor bases.
    fn fac_quot<B: Borrow<Complex>, C: Borrow<Complex>>(
        &self,
        num: impl IntoIterator<Item = (B, C)>,
        den: impl IntoIterator<Item = (B, C)>,
        n: i64,
    ) -> Result<Complex> {
        let mut acc = self.one();
        for (a, q) in num {
            acc = &acc * &self.fac(a.borrow(), q.borrow(), n)?;
        }
        for (b, r) in den {
            acc = &acc * &self.fac_inv(b.borrow(), r.borrow(), n)?;
        }
        Ok(acc)
    }
}

#[derive(Clone, Copy)]
pub struct Terms<'a> {
    pub ctx: &'a PrecisionContext,
    pub nome: &'a Nome,
    reg: &'a Regularity,
}

impl<'a> Terms<'a> {
    pub fn new(ctx: &'a PrecisionContext, nome: &'a Nome, reg: &'a Regularity) -> Self {
        Terms { ctx, nome, reg }
    }
}

impl Kernel for Terms<'_> {
    fn prec(&self) -> usize {
        self.ctx.precision_bits()
    }

    fn zero_threshold_log2(&self) -> f64 {
        self.ctx.zero_threshold_log2()
    }

    fn th(&self, x: &Complex) -> Result<Complex> {
        Ok(theta_eval(x, self.nome, self.ctx)?.value)
    }

    fn th_den(&self, x: &Complex, index: i64) -> Result<Complex> {
        let t = theta_eval(x, self.nome, self.ctx)?;
        self.reg.note(t.rel_log2);
        if t.value.is_zero() {
            return Err(Error::SingularDenominator {
                what: "theta factor".into(),
                index,
            });
        }
        Ok(t.value)
    }
}
