//! E-form and V-form theta hypergeometric series.
//!
//! ```text
//! E:  sum_n (a_1,...,a_{r+1};q,p)_n / (q,b_1,...,b_r;q,p)_n z^n
//! V:  sum_n theta(a1 q^{2n})/theta(a1) (a1,a6,...;q,p)_n / (q,a1q/a6,...;q,p)_n (qz)^n
//! ```

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::precision::PrecisionContext;
use crate::terms::{Accum, Kernel, Regularity, Terms};
use crate::theta::Nome;

#[derive(Clone, Debug)]
pub struct ESeriesSpec {
    pub numerator: Vec<Complex>,
    pub denominator: Vec<Complex>,
    pub q: Complex,
    pub nome: Nome,
    pub z: Complex,
}

impl ESeriesSpec {
    pub fn new(
        numerator: Vec<Complex>,
        denominator: Vec<Complex>,
        q: Complex,
        nome: Nome,
        z: Complex,
    ) -> Result<Self> {
        if numerator.is_empty() || denominator.len() + 1 != numerator.len() {
            return Err(Error::InvalidConfig(format!(
                "E-series needs r+1 numerator and r denominator parameters, got {} and {}",
                numerator.len(),
                denominator.len()
            )));
        }
        Ok(ESeriesSpec {
            numerator,
            denominator,
            q,
            nome,
            z,
        })
    }

    /// r in the r+1 E r notation.
    pub fn r(&self) -> usize {
        self.denominator.len()
    }
}

#[derive(Clone, Debug)]
pub struct VSeriesSpec {
    pub a1: Complex,
    /// a6, a7, ..., a_{r+1}
    pub tail: Vec<Complex>,
    pub q: Complex,
    pub nome: Nome,
    pub z: Complex,
}

impl VSeriesSpec {
    /// Series with the argument z = 1.
    pub fn new(a1: Complex, tail: Vec<Complex>, q: Complex, nome: Nome) -> Self {
        let z = Complex::one(a1.precision());
        VSeriesSpec {
            a1,
            tail,
            q,
            nome,
            z,
        }
    }

    pub fn with_z(mut self, z: Complex) -> Self {
        self.z = z;
        self
    }

    /// r in the r+1 V r notation (tail holds a6..a_{r+1}).
    pub fn r(&self) -> usize {
        self.tail.len() + 4
    }

    fn tail_denominators(&self) -> Vec<Complex> {
        let a1q = &self.a1 * &self.q;
        self.tail.iter().map(|t| &a1q / t).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TerminationInfo {
    pub terminating: bool,
    pub order: u32,
    /// index into the numerator list (for V-series, 0 is a1 and i >= 1 is
    /// tail[i-1])
    pub witness_index: Option<usize>,
}

/// Upper summation limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Upper {
    /// Sum to the order found by termination detection.
    Terminating,
    /// Sum indices 0..=n regardless of termination.
    Cutoff(u32),
}

#[derive(Clone, Debug)]
pub struct SeriesSum {
    pub value: Complex,
    /// log2 of the largest |term|
    pub max_term_log2: f64,
    pub terms: u32,
}

/// Smallest n >= 0 with `a q^n = 1` to the zero threshold, if any.
fn terminating_order(a: &Complex, q: &Complex, ctx: &PrecisionContext) -> Option<u32> {
    let lq = q.log2_abs();
    let la = a.log2_abs();
    let candidates: Vec<i64> = if lq.abs() > 1e-9 {
        let est = -la / lq;
        if !(est > -0.5 && est < 1e6) {
            return None;
        }
        vec![est.round() as i64]
    } else {
        (0..=64).collect()
    };
    let one = Complex::one(ctx.precision_bits());
    candidates.into_iter().find_map(|n| {
        let dev = (&(a * &q.powi(n)) - &one).log2_abs();
        (n >= 0 && dev < ctx.zero_threshold_log2()).then_some(n as u32)
    })
}

fn detect(params: &[&Complex], q: &Complex, ctx: &PrecisionContext) -> TerminationInfo {
    let best = params
        .iter()
        .enumerate()
        .filter_map(|(i, a)| terminating_order(a, q, ctx).map(|n| (n, i)))
        .min();
    match best {
        Some((order, i)) => TerminationInfo {
            terminating: true,
            order,
            witness_index: Some(i),
        },
        None => TerminationInfo {
            terminating: false,
            order: 0,
            witness_index: None,
        },
    }
}

pub fn e_termination(spec: &ESeriesSpec, ctx: &PrecisionContext) -> TerminationInfo {
    let refs: Vec<&Complex> = spec.numerator.iter().collect();
    detect(&refs, &spec.q, ctx)
}

pub fn v_termination(spec: &VSeriesSpec, ctx: &PrecisionContext) -> TerminationInfo {
    let mut refs = vec![&spec.a1];
    refs.extend(spec.tail.iter());
    detect(&refs, &spec.q, ctx)
}

fn resolve_upper(upper: Upper, info: TerminationInfo) -> Result<u32> {
    match upper {
        Upper::Cutoff(n) => Ok(n),
        Upper::Terminating if info.terminating => Ok(info.order),
        Upper::Terminating => Err(Error::NonTerminating),
    }
}

fn singular(e: Error, what: &str, index: i64) -> Error {
    match e {
        Error::SingularDenominator { .. } => Error::SingularDenominator {
            what: what.to_string(),
            index,
        },
        other => other,
    }
}

/// The n-th summand of an E-series.
pub fn e_term(spec: &ESeriesSpec, n: u32, ctx: &PrecisionContext) -> Result<Complex> {
    let reg = Regularity::new();
    e_term_with(&Terms::new(ctx, &spec.nome, &reg), spec, n)
}

pub(crate) fn e_term_with(t: &Terms, spec: &ESeriesSpec, n: u32) -> Result<Complex> {
    let k = n as i64;
    let num = t.facs(&spec.numerator, &spec.q, k)?;
    let mut den = t
        .fac_inv(&spec.q, &spec.q, k)
        .map_err(|e| singular(e, "q", k))?;
    for (i, b) in spec.denominator.iter().enumerate() {
        let f = t
            .fac_inv(b, &spec.q, k)
            .map_err(|e| singular(e, &format!("b{}", i + 1), k))?;
        den = &den * &f;
    }
    Ok(num * den * spec.z.powi(k))
}

pub fn e_sum(spec: &ESeriesSpec, upper: Upper, ctx: &PrecisionContext) -> Result<SeriesSum> {
    let reg = Regularity::new();
    e_sum_with(&Terms::new(ctx, &spec.nome, &reg), spec, upper)
}

/// Sums by updating the term ratio; each step multiplies in
/// theta(a_i q^k) / (theta(q^{k+1}) theta(b_i q^k)) z.
pub(crate) fn e_sum_with(t: &Terms, spec: &ESeriesSpec, upper: Upper) -> Result<SeriesSum> {
    let n = resolve_upper(upper, e_termination(spec, t.ctx))?;
    let mut acc = Accum::new(t.prec());
    let mut term = t.one();
    let mut nums = spec.numerator.clone();
    let mut dens = spec.denominator.clone();
    let mut qk1 = spec.q.clone();
    acc.add(&term);
    for k in 0..n {
        let ratio = t.ths(&nums)?;
        let mut inv = t
            .th_den(&qk1, k as i64)
            .map_err(|e| singular(e, "q", k as i64 + 1))?;
        for (i, b) in dens.iter().enumerate() {
            let d = t
                .th_den(b, k as i64)
                .map_err(|e| singular(e, &format!("b{}", i + 1), k as i64 + 1))?;
            inv = &inv * &d;
        }
        term = &term * &ratio / &inv * &spec.z;
        acc.add(&term);
        for x in nums.iter_mut().chain(dens.iter_mut()) {
            *x = &*x * &spec.q;
        }
        qk1 = &qk1 * &spec.q;
    }
    Ok(SeriesSum {
        value: acc.total,
        max_term_log2: acc.max_log2,
        terms: n + 1,
    })
}

/// The n-th summand of a V-series.
pub fn v_term(spec: &VSeriesSpec, n: u32, ctx: &PrecisionContext) -> Result<Complex> {
    let reg = Regularity::new();
    v_term_with(&Terms::new(ctx, &spec.nome, &reg), spec, n)
}

pub(crate) fn v_term_with(t: &Terms, spec: &VSeriesSpec, n: u32) -> Result<Complex> {
    let k = n as i64;
    let q = &spec.q;
    let vwp = t.th(&(&spec.a1 * &q.powi(2 * k)))? * t.ths_inv([&spec.a1])?;
    let num = t.fac(&spec.a1, q, k)? * t.facs(&spec.tail, q, k)?;
    let den = t.fac_inv(q, q, k)? * t.facs_inv(spec.tail_denominators(), q, k)?;
    Ok(vwp * num * den * (q * &spec.z).powi(k))
}

pub fn v_sum(spec: &VSeriesSpec, upper: Upper, ctx: &PrecisionContext) -> Result<SeriesSum> {
    let reg = Regularity::new();
    v_sum_with(&Terms::new(ctx, &spec.nome, &reg), spec, upper)
}

pub(crate) fn v_sum_with(t: &Terms, spec: &VSeriesSpec, upper: Upper) -> Result<SeriesSum> {
    let n = resolve_upper(upper, v_termination(spec, t.ctx))?;
    let q = &spec.q;
    let qz = q * &spec.z;
    let q2 = q * q;
    let inv_a1 = t.ths_inv([&spec.a1])?;
    let mut nums: Vec<Complex> = std::iter::once(spec.a1.clone())
        .chain(spec.tail.iter().cloned())
        .collect();
    let mut dens = spec.tail_denominators();
    let mut qk1 = q.clone();
    let mut a1q2k = spec.a1.clone();
    // running (a1, tail;q,p)_k / (q, a1q/tail;q,p)_k (qz)^k
    let mut running = t.one();
    let mut acc = Accum::new(t.prec());
    acc.add(&t.one());
    for k in 0..n {
        let ratio = t.ths(&nums)?;
        let mut inv = t.th_den(&qk1, k as i64)?;
        for d in &dens {
            inv = &inv * &t.th_den(d, k as i64)?;
        }
        running = &running * &ratio / &inv * &qz;
        a1q2k = &a1q2k * &q2;
        let term = &running * &t.th(&a1q2k)? * &inv_a1;
        acc.add(&term);
        for x in nums.iter_mut().chain(dens.iter_mut()) {
            *x = &*x * q;
        }
        qk1 = &qk1 * q;
    }
    Ok(SeriesSum {
        value: acc.total,
        max_term_log2: acc.max_log2,
        terms: n + 1,
    })
}

fn close(a: &Complex, b: &Complex, ctx: &PrecisionContext) -> bool {
    let scale = a.log2_abs().max(b.log2_abs());
    (a - b).log2_abs() - scale < ctx.zero_threshold_log2()
}

/// `a_1 ... a_{r+1} = q b_1 ... b_r` within the zero threshold.
pub fn is_e_balanced(spec: &ESeriesSpec, ctx: &PrecisionContext) -> bool {
    let lhs: Complex = spec.numerator.iter().cloned().product();
    let rhs: Complex = spec.denominator.iter().cloned().product::<Complex>() * &spec.q;
    close(&lhs, &rhs, ctx)
}

/// `q a_1 = a_2 b_1 = ... = a_{r+1} b_r`.
pub fn is_well_poised(spec: &ESeriesSpec, ctx: &PrecisionContext) -> bool {
    let qa1 = &spec.q * &spec.numerator[0];
    spec.numerator[1..]
        .iter()
        .zip(&spec.denominator)
        .all(|(a, b)| close(&(a * b), &qa1, ctx))
}

/// Well-poised, r >= 4, and {a2,a3,a4,a5} equal as a multiset to
/// {q a1^{1/2}, -q a1^{1/2}, q a1^{1/2} p^{-1/2}, -q a1^{1/2} p^{1/2}}.
pub fn is_very_well_poised(spec: &ESeriesSpec, ctx: &PrecisionContext) -> bool {
    if spec.r() < 4 || spec.nome.is_zero() || !is_well_poised(spec, ctx) {
        return false;
    }
    let special = vwp_special_parameters(&spec.numerator[0], &spec.q, spec.nome.p());
    let mut unused: Vec<&Complex> = spec.numerator[1..5].iter().collect();
    for s in &special {
        match unused.iter().position(|a| close(a, s, ctx)) {
            Some(i) => {
                unused.swap_remove(i);
            }
            None => return false,
        }
    }
    true
}

/// The four very-well-poised numerator parameters built from principal
/// square roots of a1 and p.
fn vwp_special_parameters(a1: &Complex, q: &Complex, p: &Complex) -> [Complex; 4] {
    let sa = a1.sqrt();
    let sp = p.sqrt();
    let qsa = q * &sa;
    [qsa.clone(), -&qsa, &qsa / &sp, -(&qsa * &sp)]
}

/// The E-series that the V-series equals at argument -z:
/// numerators a1, ±q a1^{1/2}, q a1^{1/2}/p^{1/2}, -q a1^{1/2} p^{1/2}, tail;
/// denominators ±a1^{1/2}, a1^{1/2} p^{1/2}, -a1^{1/2}/p^{1/2}, a1 q / tail.
pub fn vwp_embed(v: &VSeriesSpec) -> Result<ESeriesSpec> {
    if v.nome.is_zero() {
        return Err(Error::Domain(
            "very-well-poised embedding needs p != 0 (p^{-1/2} appears)".into(),
        ));
    }
    let sa = v.a1.sqrt();
    let sp = v.nome.p().sqrt();
    let mut numerator = vec![v.a1.clone()];
    numerator.extend(vwp_special_parameters(&v.a1, &v.q, v.nome.p()));
    numerator.extend(v.tail.iter().cloned());
    let mut denominator = vec![sa.clone(), -&sa, &sa * &sp, -(&sa / &sp)];
    denominator.extend(v.tail_denominators());
    ESeriesSpec::new(numerator, denominator, v.q.clone(), v.nome.clone(), -&v.z)
}

#[derive(Clone, Debug)]
pub struct VwpQuotient {
    /// theta(a q^{2n}) / theta(a)
    pub theta_route: Complex,
    /// eight-factorial ratio times (-q)^{-n}
    pub factorial_route: Complex,
}

/// Both evaluations of theta(a q^{2n};p)/theta(a;p). At p = 0 the
/// factorial route uses the basic form (q a^{1/2}, -q a^{1/2};q)_n /
/// (a^{1/2}, -a^{1/2};q)_n.
pub fn vwp_quotient(
    a: &Complex,
    q: &Complex,
    nome: &Nome,
    n: u32,
    ctx: &PrecisionContext,
) -> Result<VwpQuotient> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, nome, &reg);
    let k = n as i64;
    let theta_route = t.th(&(a * &q.powi(2 * k)))? * t.ths_inv([a])?;
    let sa = a.sqrt();
    let qsa = q * &sa;
    let factorial_route = if nome.is_zero() {
        t.facs([&qsa, &(-&qsa)], q, k)? * t.facs_inv([&sa, &(-&sa)], q, k)?
    } else {
        let [n1, n2, n3, n4] = vwp_special_parameters(a, q, nome.p());
        let sp = nome.p().sqrt();
        let dens = [sa.clone(), -&sa, &sa * &sp, -(&sa / &sp)];
        t.facs([n1, n2, n3, n4], q, k)? * t.facs_inv(dens, q, k)? * (-q).powi(-k)
    };
    Ok(VwpQuotient {
        theta_route,
        factorial_route,
    })
}

/// Series accepted by [`p_to_zero_check`].
#[derive(Clone, Debug)]
pub enum SeriesForm {
    E(ESeriesSpec),
    V(VSeriesSpec),
}

/// Relative residual between the series evaluated at p = 0 through the
/// theta machinery and a direct basic hypergeometric sum built from
/// plain (1 - a q^k) products.
pub fn p_to_zero_check(form: &SeriesForm, cutoff: u32, ctx: &PrecisionContext) -> Result<f64> {
    let zero = Nome::zero(ctx);
    let (series, oracle) = match form {
        SeriesForm::E(spec) => {
            let mut s = spec.clone();
            s.nome = zero;
            let series = e_sum(&s, Upper::Cutoff(cutoff), ctx)?;
            let oracle = crate::basic::phi_sum(&s.numerator, &s.denominator, &s.q, &s.z, cutoff);
            (series, oracle)
        }
        SeriesForm::V(spec) => {
            let mut s = spec.clone();
            s.nome = zero;
            let series = v_sum(&s, Upper::Cutoff(cutoff), ctx)?;
            let oracle = crate::basic::w_sum(&s.a1, &s.tail, &s.q, &s.z, cutoff);
            (series, oracle)
        }
    };
    let scale = series
        .max_term_log2
        .max(series.value.log2_abs())
        .max(oracle.log2_abs())
        .max(0.0);
    Ok(((&series.value - &oracle).log2_abs() - scale).exp2())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn c(re: f64, im: f64) -> Complex {
        Complex::from_f64(re, im, 256)
    }

    fn rel(a: &Complex, b: &Complex) -> f64 {
        (a - b).log2_abs() - a.log2_abs().max(b.log2_abs()).max(0.0)
    }

    fn sample_v(nome: Nome) -> VSeriesSpec {
        VSeriesSpec::new(
            c(0.6, 0.3),
            vec![
                c(1.2, -0.4),
                c(0.5, 0.7),
                c(-0.8, 0.9),
                c(1.1, 0.2),
                c(0.45, -0.6),
            ],
            c(0.9, 0.35),
            nome,
        )
    }

    #[test]
    fn first_terms_are_one() {
        let ctx = ctx();
        let nome = Nome::from_f64(0.2, 0.1, &ctx).unwrap();
        let v = sample_v(nome.clone());
        assert!(rel(&v_term(&v, 0, &ctx).unwrap(), &Complex::one(256)) < -250.0);
        let e = vwp_embed(&v).unwrap();
        assert!(rel(&e_term(&e, 0, &ctx).unwrap(), &Complex::one(256)) < -250.0);
    }

    #[test]
    fn incremental_sum_matches_terms() {
        let ctx = ctx();
        let nome = Nome::from_f64(0.1, -0.3, &ctx).unwrap();
        let v = sample_v(nome);
        let sum = v_sum(&v, Upper::Cutoff(5), &ctx).unwrap();
        let mut direct = Complex::zero(256);
        for n in 0..=5 {
            direct = &direct + &v_term(&v, n, &ctx).unwrap();
        }
        assert!(rel(&sum.value, &direct) < -235.0);
        let e = vwp_embed(&v).unwrap();
        let es = e_sum(&e, Upper::Cutoff(5), &ctx).unwrap();
        let mut direct = Complex::zero(256);
        for n in 0..=5 {
            direct = &direct + &e_term(&e, n, &ctx).unwrap();
        }
        assert!(rel(&es.value, &direct) < -235.0);
    }

    #[test]
    fn v_equals_embedded_e() {
        let ctx = ctx();
        let nome = Nome::from_f64(-0.15, 0.25, &ctx).unwrap();
        let v = sample_v(nome).with_z(c(0.7, -0.2));
        let e = vwp_embed(&v).unwrap();
        assert!(is_very_well_poised(&e, &ctx));
        assert!(is_well_poised(&e, &ctx));
        for n in 0..=4 {
            let a = v_term(&v, n, &ctx).unwrap();
            let b = e_term(&e, n, &ctx).unwrap();
            assert!(rel(&a, &b) < -235.0, "n={n}");
        }
    }

    #[test]
    fn very_well_poised_is_a_multiset_test() {
        let ctx = ctx();
        let nome = Nome::from_f64(0.3, 0.0, &ctx).unwrap();
        let mut e = vwp_embed(&sample_v(nome)).unwrap();
        e.numerator.swap(3, 4);
        e.denominator.swap(2, 3);
        assert!(is_very_well_poised(&e, &ctx));
        e.numerator[1] = &e.numerator[1] * &c(1.01, 0.0);
        assert!(!is_very_well_poised(&e, &ctx));
        let short = ESeriesSpec::new(
            e.numerator[..4].to_vec(),
            e.denominator[..3].to_vec(),
            e.q.clone(),
            e.nome.clone(),
            e.z.clone(),
        )
        .unwrap();
        assert!(!is_very_well_poised(&short, &ctx));
    }

    #[test]
    fn well_poised_single_pair() {
        let ctx = ctx();
        let nome = Nome::zero(&ctx);
        let q = c(0.5, 0.1);
        let a1 = c(0.7, 0.2);
        let a2 = c(1.3, 0.0);
        let b1 = &(&q * &a1) / &a2;
        let e = ESeriesSpec::new(
            vec![a1.clone(), a2.clone()],
            vec![b1.clone()],
            q.clone(),
            nome.clone(),
            c(1.0, 0.0),
        )
        .unwrap();
        assert!(is_well_poised(&e, &ctx));
        let e = ESeriesSpec::new(
            vec![a1, a2],
            vec![&b1 * &c(1.01, 0.0)],
            q,
            nome,
            c(1.0, 0.0),
        )
        .unwrap();
        assert!(!is_well_poised(&e, &ctx));
    }

    #[test]
    fn balancing_criterion_for_vwp() {
        // the embedded E-series is balanced iff (prod tail^2) q^2 = (a1 q)^{r-5}
        let ctx = ctx();
        let nome = Nome::from_f64(0.2, 0.2, &ctx).unwrap();
        let q = c(0.8, 0.3);
        let a1 = c(0.9, -0.4);
        let mut tail = vec![c(1.1, 0.2), c(0.6, 0.5), c(-0.7, 0.4), c(1.3, -0.2)];
        let rest: Complex = tail.iter().cloned().product();
        // choose the last tail entry so that a6 ... a10 = a1^2 q (r = 9)
        tail.push(&(&a1 * &a1) * &q / &rest);
        let v = VSeriesSpec::new(a1.clone(), tail.clone(), q.clone(), nome.clone());
        assert!(is_e_balanced(&vwp_embed(&v).unwrap(), &ctx));
        tail[0] = &tail[0] * &c(1.01, 0.0);
        let v = VSeriesSpec::new(a1, tail, q, nome);
        assert!(!is_e_balanced(&vwp_embed(&v).unwrap(), &ctx));
    }

    #[test]
    fn termination() {
        let ctx = ctx();
        let nome = Nome::from_f64(0.3, -0.1, &ctx).unwrap();
        let q = c(0.9, 0.2);
        let mut v = sample_v(nome);
        v.q = q.clone();
        v.tail[2] = q.powi(-3);
        let info = v_termination(&v, &ctx);
        assert_eq!(
            info,
            TerminationInfo {
                terminating: true,
                order: 3,
                witness_index: Some(3)
            }
        );
        let long = v_sum(&v, Upper::Cutoff(7), &ctx).unwrap();
        let short = v_sum(&v, Upper::Terminating, &ctx).unwrap();
        assert_eq!(short.terms, 4);
        assert!(rel(&long.value, &short.value) < -250.0);
        for n in 4..=7 {
            assert!(v_term(&v, n, &ctx).unwrap().is_zero());
        }
        v.tail[2] = c(0.5, 0.5);
        assert!(matches!(
            v_sum(&v, Upper::Terminating, &ctx),
            Err(Error::NonTerminating)
        ));
    }

    #[test]
    fn q_inverse_numerator_kills_term_two() {
        let ctx = ctx();
        let nome = Nome::from_f64(0.25, 0.0, &ctx).unwrap();
        let q = c(0.7, 0.1);
        let e = ESeriesSpec::new(
            vec![q.recip(), c(0.4, 0.2)],
            vec![c(1.5, 0.3)],
            q,
            nome,
            c(1.0, 0.0),
        )
        .unwrap();
        assert!(e_term(&e, 2, &ctx).unwrap().is_zero());
        assert!(!e_term(&e, 1, &ctx).unwrap().is_zero());
    }

    #[test]
    fn singular_denominator_reports_parameter() {
        let ctx = ctx();
        let nome = Nome::from_f64(0.25, 0.0, &ctx).unwrap();
        let q = c(0.7, 0.1);
        let e = ESeriesSpec::new(
            vec![c(0.3, 0.0), c(0.4, 0.2)],
            vec![q.powi(-1)],
            q,
            nome,
            c(1.0, 0.0),
        )
        .unwrap();
        match e_term(&e, 3, &ctx) {
            Err(Error::SingularDenominator { what, index }) => {
                assert_eq!(what, "b1");
                assert_eq!(index, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quotient_routes_agree() {
        let ctx = ctx();
        let q = c(0.95, -0.3);
        let a = c(0.4, 0.8);
        for nome in [Nome::zero(&ctx), Nome::from_f64(0.3, 0.2, &ctx).unwrap()] {
            for n in 0..=3 {
                let r = vwp_quotient(&a, &q, &nome, n, &ctx).unwrap();
                assert!(rel(&r.theta_route, &r.factorial_route) < -235.0, "n={n}");
            }
        }
        let r = vwp_quotient(&a, &q, &Nome::zero(&ctx), 2, &ctx).unwrap();
        let one = Complex::one(256);
        let expect = &(&one - &(&a * &q.powi(4))) / &(&one - &a);
        assert!(rel(&r.theta_route, &expect) < -245.0);
    }

    #[test]
    fn p_zero_limits() {
        let ctx = ctx();
        let nome = Nome::from_f64(0.3, 0.1, &ctx).unwrap();
        let v = sample_v(nome.clone());
        assert!(p_to_zero_check(&SeriesForm::V(v), 6, &ctx).unwrap() < 1e-70);
        let e = ESeriesSpec::new(
            vec![c(0.3, 0.2), c(1.2, 0.0), c(0.5, -0.5)],
            vec![c(0.9, 0.9), c(-0.4, 0.3)],
            c(0.6, 0.4),
            nome,
            c(0.8, 0.0),
        )
        .unwrap();
        assert!(p_to_zero_check(&SeriesForm::E(e.clone()), 8, &ctx).unwrap() < 1e-70);
        assert!(p_to_zero_check(&SeriesForm::E(e), 0, &ctx).unwrap() < 1e-70);
    }
}
