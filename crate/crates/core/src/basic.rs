//! Basic (p = 0) hypergeometric sums from plain `1 - a q^k` products.

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::terms::Kernel;

/// Kernel with `theta(x) = 1 - x`, independent of the theta machinery.
/// Differences below the zero threshold of `max(1, |x|)` are snapped to 0.
#[derive(Clone, Copy, Debug)]
pub struct PlainKernel {
    prec: usize,
    zero_threshold_log2: f64,
}

impl PlainKernel {
    pub fn new(ctx: &crate::precision::PrecisionContext) -> Self {
        PlainKernel {
            prec: ctx.precision_bits(),
            zero_threshold_log2: ctx.zero_threshold_log2(),
        }
    }
}

impl Kernel for PlainKernel {
    fn prec(&self) -> usize {
        self.prec
    }

    fn zero_threshold_log2(&self) -> f64 {
        self.zero_threshold_log2
    }

    fn th(&self, x: &Complex) -> Result<Complex> {
        let v = &Complex::one(self.prec) - x;
        if v.log2_abs() - x.log2_abs().max(0.0) < self.zero_threshold_log2 {
            return Ok(Complex::zero(self.prec));
        }
        Ok(v)
    }

    fn th_den(&self, x: &Complex, index: i64) -> Result<Complex> {
        let v = self.th(x)?;
        if v.is_zero() {
            return Err(Error::SingularDenominator {
                what: "1 - x factor".into(),
                index,
            });
        }
        Ok(v)
    }
}

/// `(a;q)_n` for n >= 0.
pub fn q_pochhammer(a: &Complex, q: &Complex, n: u32) -> Complex {
    let one = Complex::one(a.precision());
    let mut acc = one.clone();
    let mut x = a.clone();
    for _ in 0..n {
        acc = &acc * &(&one - &x);
        x = &x * q;
    }
    acc
}

/// `sum_{n=0}^{cutoff} (a_1..;q)_n / (q, b_1..;q)_n z^n`.
pub fn phi_sum(num: &[Complex], den: &[Complex], q: &Complex, z: &Complex, cutoff: u32) -> Complex {
    let prec = q.precision();
    let mut total = Complex::zero(prec);
    for n in 0..=cutoff {
        let mut t = z.powi(n as i64);
        for a in num {
            t = &t * &q_pochhammer(a, q, n);
        }
        t = &t / &q_pochhammer(q, q, n);
        for b in den {
            t = &t / &q_pochhammer(b, q, n);
        }
        total = &total + &t;
    }
    total
}

/// Very-well-poised basic sum with factor `(1 - a q^{2n})/(1 - a)` and
/// argument `(qz)^n`.
pub fn w_sum(a: &Complex, tail: &[Complex], q: &Complex, z: &Complex, cutoff: u32) -> Complex {
    let prec = q.precision();
    let one = Complex::one(prec);
    let aq = a * q;
    let qz = q * z;
    let mut total = Complex::zero(prec);
    for n in 0..=cutoff {
        let k = n as i64;
        let mut t = &(&one - &(a * &q.powi(2 * k))) / &(&one - a) * qz.powi(k);
        t = &t * &q_pochhammer(a, q, n) / &q_pochhammer(q, q, n);
        for x in tail {
            t = &t * &q_pochhammer(x, q, n) / &q_pochhammer(&(&aq / x), q, n);
        }
        total = &total + &t;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_binomial_theorem_terminating() {
        // sum_k (q^{-n};q)_k / (q;q)_k z^k = (z q^{-n};q)_n
        let q = Complex::from_f64(0.6, 0.3, 256);
        let z = Complex::from_f64(0.4, -0.7, 256);
        let n = 5;
        let lhs = phi_sum(&[q.powi(-n)], &[], &q, &z, n as u32);
        let rhs = q_pochhammer(&(&z * &q.powi(-n)), &q, n as u32);
        assert!((&lhs - &rhs).log2_abs() - rhs.log2_abs() < -230.0);
    }
}
