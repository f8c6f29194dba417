//! Terminating transformations: the two-nome transformation built from the
//! four-parameter sum, its four-base and quadbasic cases, the split-poised
//! 12V11 transformation, and two quadratic transformations.

use crate::basic::{w_sum, PlainKernel};
use crate::complex::Complex;
use crate::error::Result;
use crate::precision::PrecisionContext;
use crate::sampling::Sampler;
use crate::series::{e_sum_with, v_sum_with, ESeriesSpec, Upper, VSeriesSpec};
use crate::terms::{mono, Accum, Kernel, Regularity, Terms};
use crate::theta::Nome;

use super::indefinite::{sumf_factor, sumf_weight};
use super::multibasic::{m00_lead, m00_product, m00_tail, m00_term, M00Params};
use super::{order_u32, IdentityId, Orders, ResidualReport};

/// Row sequences in nome p (lower) and P (upper), n+1 rows each.
#[derive(Clone, Debug)]
pub struct GtfParams {
    pub lower: Vec<[Complex; 4]>,
    pub upper: Vec<[Complex; 4]>,
    pub p: Nome,
    pub big_p: Nome,
}

impl GtfParams {
    pub fn sample(s: &mut Sampler, ctx: &PrecisionContext, n: u32) -> Result<Self> {
        let p = s.nome(ctx)?;
        let big_p = s.nome(ctx)?;
        let lower = (0..=n).map(|_| s.params()).collect();
        let upper = (0..=n).map(|_| s.params()).collect();
        Ok(GtfParams {
            lower,
            upper,
            p,
            big_p,
        })
    }
}

/// Summands `lambda_k` of the four-parameter sum and the partial products
/// `prod_{j<=m}` of its factors.
fn weights_and_products<K: Kernel>(
    t: &K,
    rows: &[[Complex; 4]],
) -> Result<(Vec<Complex>, Vec<Complex>)> {
    let mut lam = Vec::with_capacity(rows.len());
    let mut prods = Vec::with_capacity(rows.len());
    let mut prod = t.one();
    for r in rows {
        lam.push(sumf_weight(t, r)? * &prod);
        prod = prod * sumf_factor(t, r)?;
        prods.push(prod.clone());
    }
    Ok((lam, prods))
}

/// `sum_k lam_k (1 - prods[n-k])`.
fn gtf_side(lam: &[Complex], prods: &[Complex], prec: usize) -> Accum {
    let n = lam.len() - 1;
    let one = Complex::one(prec);
    let mut acc = Accum::new(prec);
    for (k, l) in lam.iter().enumerate() {
        acc.add(&(l * &(&one - &prods[n - k])));
    }
    acc
}

/// `sum_k x_k sum_{j<=n-k} y_j`.
fn interchange_side(x: &[Complex], y: &[Complex], prec: usize) -> Accum {
    let n = x.len() - 1;
    let mut acc = Accum::new(prec);
    for (k, xk) in x.iter().enumerate() {
        let mut inner = Complex::zero(prec);
        for yj in &y[..=n - k] {
            inner = &inner + yj;
        }
        acc.add(&(xk * &inner));
    }
    acc
}

/// `1 - prod_{j<=m}` against the partial sums `sum_{j<=m} lam_j`.
fn telescopes(lam: &[Complex], prods: &[Complex], prec: usize) -> Vec<(Complex, Complex, f64)> {
    let one = Complex::one(prec);
    let mut acc = Accum::new(prec);
    lam.iter()
        .zip(prods)
        .map(|(l, pr)| {
            acc.add(l);
            (
                acc.total.clone(),
                &one - pr,
                acc.max_log2.max(pr.log2_abs()),
            )
        })
        .collect()
}

pub fn verify_gtf(g: &GtfParams, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let prec = ctx.precision_bits();
    let reg = Regularity::new();
    let tl = Terms::new(ctx, &g.p, &reg);
    let tu = Terms::new(ctx, &g.big_p, &reg);
    let (lam, lprod) = weights_and_products(&tl, &g.lower)?;
    let (big_lam, uprod) = weights_and_products(&tu, &g.upper)?;
    let lhs = gtf_side(&lam, &uprod, prec);
    let rhs = gtf_side(&big_lam, &lprod, prec);
    let il = interchange_side(&lam, &big_lam, prec);
    let ir = interchange_side(&big_lam, &lam, prec);
    let mut tel = telescopes(&lam, &lprod, prec);
    tel.extend(telescopes(&big_lam, &uprod, prec));
    Ok(
        ResidualReport::new(lhs.total, rhs.total, lhs.max_log2.max(rhs.max_log2))
            .check(
                "reversing the double sum",
                &il.total,
                &ir.total,
                il.max_log2.max(ir.max_log2),
            )
            .check_all("brackets equal partial sums", tel)
            .with_regularity(reg.worst_log2()),
    )
}

/// Four-base transformation: lower parameters in nome p, upper in P, same n.
#[derive(Clone, Debug)]
pub struct FourBasePair {
    pub lower: M00Params,
    pub upper: M00Params,
}

impl FourBasePair {
    pub fn sample(s: &mut Sampler, ctx: &PrecisionContext, n: u32) -> Result<Self> {
        Ok(FourBasePair {
            lower: M00Params::sample(s, ctx, n)?,
            upper: M00Params::sample(s, ctx, n)?,
        })
    }

    /// The pair with d = D = 1.
    pub fn sample_unit_d(s: &mut Sampler, ctx: &PrecisionContext, n: u32) -> Result<Self> {
        let mut p = Self::sample(s, ctx, n)?;
        p.lower.d = Complex::one(ctx.precision_bits());
        p.upper.d = p.lower.d.clone();
        Ok(p)
    }

    fn swapped(&self) -> Self {
        FourBasePair {
            lower: self.upper.clone(),
            upper: self.lower.clone(),
        }
    }
}

/// The upper-parameter factorials multiplying the k-th lower summand.
fn four_base_factorials<K: Kernel>(t: &K, up: &M00Params, d: &Complex, k: i64) -> Result<Complex> {
    let (a, b, c, q, r, s, tt) = (&up.a, &up.b, &up.c, &up.q, &up.r, &up.s, &up.t);
    let n = up.n as i64;
    let st = mono(&[s, tt], &[q]);
    let rt = mono(&[r, tt], &[q]);
    let rs = mono(&[r, s], &[q]);
    let rst = mono(&[r, s, tt], &[q, q]);
    let ad = a * d;
    t.fac_quot(
        [
            (mono(&[], &[&q.powi(n), d]), q.clone()),
            (mono(&[b], &[&ad, &st.powi(n)]), st.clone()),
            (mono(&[c], &[&ad, &rt.powi(n)]), rt.clone()),
            (mono(&[d], &[b, c, &rs.powi(n)]), rs.clone()),
        ],
        [
            (mono(&[], &[a, &rst.powi(n)]), rst),
            (mono(&[], &[b, &r.powi(n)]), r.clone()),
            (mono(&[], &[c, &s.powi(n)]), s.clone()),
            (mono(&[b, c], &[&ad, d, &tt.powi(n)]), tt.clone()),
        ],
        k,
    )
}

/// The braced factor of the four-base transformation.
fn four_base_bracket<K: Kernel>(t: &K, up: &M00Params, k: i64) -> Result<Complex> {
    let first = m00_lead(t, up)? * four_base_factorials(t, up, &up.d, k)?;
    Ok(first - m00_tail(t, up)? / m00_product(t, up)?)
}

fn four_base_side(tl: &Terms, tu: &Terms, p: &FourBasePair) -> Result<Accum> {
    let mut acc = Accum::new(tl.prec());
    for k in 0..=p.lower.n as i64 {
        acc.add(&(m00_term(tl, &p.lower, k)? * four_base_bracket(tu, &p.upper, k)?));
    }
    Ok(acc)
}

pub fn verify_ex28(p: &FourBasePair, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let tl = Terms::new(ctx, &p.lower.nome, &reg);
    let tu = Terms::new(ctx, &p.upper.nome, &reg);
    let lhs = four_base_side(&tl, &tu, p)?;
    let rhs = four_base_side(&tu, &tl, &p.swapped())?;
    let pre = m00_product(&tl, &p.lower)? / m00_product(&tu, &p.upper)?;
    let scale = lhs.max_log2.max(rhs.max_log2 + pre.log2_abs());
    Ok(ResidualReport::new(lhs.total, pre * rhs.total, scale).with_regularity(reg.worst_log2()))
}

/// Summand of the d = D = 1 transformation, written out directly.
fn unit_d_term<K: Kernel, L: Kernel>(
    tl: &K,
    lo: &M00Params,
    tu: &L,
    up: &M00Params,
    k: i64,
) -> Result<Complex> {
    let (a, b, c, q, r, s, tt) = (&lo.a, &lo.b, &lo.c, &lo.q, &lo.r, &lo.s, &lo.t);
    let qk = q.powi(k);
    let abc = mono(&[a], &[b, c]);
    let theta = tl.quot(
        [
            a * &mono(&[r, s, tt], &[q]).powi(k),
            mono(&[b, &r.powi(k)], &[&qk]),
            mono(&[c, &s.powi(k)], &[&qk]),
            mono(&[&abc, &tt.powi(k)], &[&qk]),
        ],
        [a.clone(), b.clone(), c.clone(), abc.clone()],
    )?;
    let facs = tl.fac_quot(
        [
            (a.clone(), mono(&[r, s, tt], &[q, q])),
            (b.clone(), r.clone()),
            (c.clone(), s.clone()),
            (abc.clone(), tt.clone()),
        ],
        [
            (q.clone(), q.clone()),
            (mono(&[a, s, tt], &[b, q]), mono(&[s, tt], &[q])),
            (mono(&[a, r, tt], &[c, q]), mono(&[r, tt], &[q])),
            (mono(&[b, c, r, s], &[q]), mono(&[r, s], &[q])),
        ],
        k,
    )?;
    Ok(theta * facs * four_base_factorials(tu, up, &tu.one(), k)? * qk)
}

fn unit_d_side(tl: &Terms, tu: &Terms, p: &FourBasePair) -> Result<Accum> {
    let mut acc = Accum::new(tl.prec());
    for k in 0..=p.lower.n as i64 {
        acc.add(&unit_d_term(tl, &p.lower, tu, &p.upper, k)?);
    }
    Ok(acc)
}

/// The d = D = 1 case, checked against the general form at d = D = 1.
pub fn verify_dd1(p: &FourBasePair, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let tl = Terms::new(ctx, &p.lower.nome, &reg);
    let tu = Terms::new(ctx, &p.upper.nome, &reg);
    let lhs = unit_d_side(&tl, &tu, p)?;
    let rhs = unit_d_side(&tu, &tl, &p.swapped())?;
    let pre = m00_product(&tl, &p.lower)? / m00_product(&tu, &p.upper)?;
    let scale = lhs.max_log2.max(rhs.max_log2 + pre.log2_abs());
    let general = four_base_side(&tl, &tu, p)?;
    Ok(
        ResidualReport::new(lhs.total.clone(), pre * rhs.total, scale)
            .check(
                "equals the four-base form at d = D = 1",
                &lhs.total,
                &general.total,
                lhs.max_log2.max(general.max_log2),
            )
            .with_regularity(reg.worst_log2()),
    )
}

/// One side's parameters of the quadbasic transformation: bases q and r.
#[derive(Clone, Debug)]
pub struct QuadbasicSide {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub q: Complex,
    pub r: Complex,
    pub nome: Nome,
}

#[derive(Clone, Debug)]
pub struct QuadbasicParams {
    pub lower: QuadbasicSide,
    pub upper: QuadbasicSide,
    pub n: u32,
}

impl QuadbasicSide {
    fn sample(s: &mut Sampler, ctx: &PrecisionContext) -> Result<Self> {
        let nome = s.nome(ctx)?;
        let [a, b, c, q, r] = s.params();
        Ok(QuadbasicSide {
            a,
            b,
            c,
            q,
            r,
            nome,
        })
    }

    /// `(ar, br; r)_n (cq, aq/bc; q)_n / ((q, aq/b; q)_n (ar/c, bcr; r)_n)`.
    fn product<K: Kernel>(&self, t: &K, n: i64) -> Result<Complex> {
        let (a, b, c, q, r) = (&self.a, &self.b, &self.c, &self.q, &self.r);
        t.fac_quot(
            [
                (a * r, r.clone()),
                (b * r, r.clone()),
                (c * q, q.clone()),
                (mono(&[a, q], &[b, c]), q.clone()),
            ],
            [
                (q.clone(), q.clone()),
                (mono(&[a, q], &[b]), q.clone()),
                (mono(&[a, r], &[c]), r.clone()),
                (mono(&[b, c, r], &[]), r.clone()),
            ],
            n,
        )
    }

    /// The same side as four-base parameters with d = 1, s = t = q.
    fn four_base(&self, n: u32) -> M00Params {
        let one = Complex::one(self.a.precision());
        M00Params {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            d: one,
            q: self.q.clone(),
            r: self.r.clone(),
            s: self.q.clone(),
            t: self.q.clone(),
            n,
            nome: self.nome.clone(),
        }
    }
}

impl QuadbasicParams {
    pub fn sample(s: &mut Sampler, ctx: &PrecisionContext, n: u32) -> Result<Self> {
        Ok(QuadbasicParams {
            lower: QuadbasicSide::sample(s, ctx)?,
            upper: QuadbasicSide::sample(s, ctx)?,
            n,
        })
    }

    fn swapped(&self) -> Self {
        QuadbasicParams {
            lower: self.upper.clone(),
            upper: self.lower.clone(),
            n: self.n,
        }
    }
}

fn quadbasic_term(tl: &Terms, tu: &Terms, p: &QuadbasicParams, k: i64) -> Result<Complex> {
    let QuadbasicSide { a, b, c, q, r, .. } = &p.lower;
    let QuadbasicSide {
        a: ua,
        b: ub,
        c: uc,
        q: uq,
        r: ur,
        ..
    } = &p.upper;
    let n = p.n as i64;
    let (qk, rk) = (q.powi(k), r.powi(k));
    let (uqn, urn) = (uq.powi(n), ur.powi(n));
    let theta = tl.quot([a * &rk * &qk, mono(&[b, &rk], &[&qk])], [a, b])?;
    let lower = tl.fac_quot(
        [
            (a.clone(), r.clone()),
            (b.clone(), r.clone()),
            (c.clone(), q.clone()),
            (mono(&[a], &[b, c]), q.clone()),
        ],
        [
            (q.clone(), q.clone()),
            (mono(&[a, q], &[b]), q.clone()),
            (mono(&[a, r], &[c]), r.clone()),
            (mono(&[b, c, r], &[]), r.clone()),
        ],
        k,
    )?;
    let upper = tu.fac_quot(
        [
            (mono(&[uc], &[ua, &urn]), ur.clone()),
            (mono(&[], &[ub, uc, &urn]), ur.clone()),
            (uqn.recip(), uq.clone()),
            (mono(&[ub], &[ua, &uqn]), uq.clone()),
        ],
        [
            (mono(&[], &[uc, &uqn]), uq.clone()),
            (mono(&[ub, uc], &[ua, &uqn]), uq.clone()),
            (mono(&[], &[ua, &urn]), ur.clone()),
            (mono(&[], &[ub, &urn]), ur.clone()),
        ],
        k,
    )?;
    Ok(theta * lower * upper * qk)
}

fn quadbasic_side(tl: &Terms, tu: &Terms, p: &QuadbasicParams) -> Result<Accum> {
    let mut acc = Accum::new(tl.prec());
    for k in 0..=p.n as i64 {
        acc.add(&quadbasic_term(tl, tu, p, k)?);
    }
    Ok(acc)
}

/// Both sides and the scale.
fn quadbasic_sides(tl: &Terms, tu: &Terms, p: &QuadbasicParams) -> Result<(Complex, Complex, f64)> {
    let n = p.n as i64;
    let lhs = quadbasic_side(tl, tu, p)?;
    let rhs = quadbasic_side(tu, tl, &p.swapped())?;
    let pre = p.lower.product(tl, n)? / p.upper.product(tu, n)?;
    let scale = lhs.max_log2.max(rhs.max_log2 + pre.log2_abs());
    Ok((lhs.total, pre * rhs.total, scale))
}

pub fn verify_quadbasic(p: &QuadbasicParams, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let tl = Terms::new(ctx, &p.lower.nome, &reg);
    let tu = Terms::new(ctx, &p.upper.nome, &reg);
    let (lhs, rhs, scale) = quadbasic_sides(&tl, &tu, p)?;
    let fb = FourBasePair {
        lower: p.lower.four_base(p.n),
        upper: p.upper.four_base(p.n),
    };
    let unit = unit_d_side(&tl, &tu, &fb)?;
    Ok(ResidualReport::new(lhs.clone(), rhs, scale)
        .check(
            "equals the d = D = 1 four-base sum at s = t = q",
            &lhs,
            &unit.total,
            scale.max(unit.max_log2),
        )
        .with_regularity(reg.worst_log2()))
}

/// Split-poised transformation in a single base q and nome p.
#[derive(Clone, Debug)]
pub struct SplitPoisedParams {
    pub abc: [Complex; 3],
    pub upper: [Complex; 3],
    pub q: Complex,
    pub n: u32,
    pub nome: Nome,
}

impl SplitPoisedParams {
    pub fn sample(s: &mut Sampler, ctx: &PrecisionContext, n: u32) -> Result<Self> {
        let nome = s.nome(ctx)?;
        let [a, b, c, ua, ub, uc, q] = s.params();
        Ok(SplitPoisedParams {
            abc: [a, b, c],
            upper: [ua, ub, uc],
            q,
            n,
            nome,
        })
    }

    fn swapped(&self) -> Self {
        SplitPoisedParams {
            abc: self.upper.clone(),
            upper: self.abc.clone(),
            ..self.clone()
        }
    }

    /// Quadbasic parameters with r = q, R = Q = q and both nomes p.
    fn quadbasic(&self) -> QuadbasicParams {
        let side = |[a, b, c]: &[Complex; 3]| QuadbasicSide {
            a: a.clone(),
            b: b.clone(),
            c: c.clone(),
            q: self.q.clone(),
            r: self.q.clone(),
            nome: self.nome.clone(),
        };
        QuadbasicParams {
            lower: side(&self.abc),
            upper: side(&self.upper),
            n: self.n,
        }
    }

    /// The left side as a 12E11 series with argument -1.
    fn recast(&self) -> Result<ESeriesSpec> {
        let [a, b, c] = &self.abc;
        let [ua, ub, uc] = &self.upper;
        let q = &self.q;
        let qn = q.powi(self.n as i64);
        let sa = a.sqrt();
        let sp = self.nome.p().sqrt();
        let qsa = q * &sa;
        let nums = vec![
            a.clone(),
            qsa.clone(),
            -&qsa,
            &qsa / &sp,
            -(&qsa * &sp),
            b.clone(),
            c.clone(),
            mono(&[a], &[b, c]),
            qn.recip(),
            mono(&[ub], &[ua, &qn]),
            mono(&[uc], &[ua, &qn]),
            mono(&[], &[ub, uc, &qn]),
        ];
        let dens = vec![
            sa.clone(),
            -&sa,
            &sa * &sp,
            -(&sa / &sp),
            mono(&[a, q], &[b]),
            mono(&[a, q], &[c]),
            mono(&[b, c, q], &[]),
            mono(&[], &[ua, &qn]),
            mono(&[], &[ub, &qn]),
            mono(&[], &[uc, &qn]),
            mono(&[ub, uc], &[ua, &qn]),
        ];
        let minus_one = -Complex::one(a.precision());
        ESeriesSpec::new(nums, dens, q.clone(), self.nome.clone(), minus_one)
    }
}

fn split_poised_term(t: &Terms, p: &SplitPoisedParams, k: i64) -> Result<Complex> {
    let [a, b, c] = &p.abc;
    let [ua, ub, uc] = &p.upper;
    let q = &p.q;
    let (qk, qn) = (q.powi(k), q.powi(p.n as i64));
    let theta = t.th_ratio(&(a * &qk * &qk), a)?;
    let lower = t.facs([a.clone(), b.clone(), c.clone(), mono(&[a], &[b, c])], q, k)?
        * t.facs_inv(
            [
                q.clone(),
                mono(&[a, q], &[b]),
                mono(&[a, q], &[c]),
                mono(&[b, c, q], &[]),
            ],
            q,
            k,
        )?;
    let upper = t.facs(
        [
            qn.recip(),
            mono(&[ub], &[ua, &qn]),
            mono(&[uc], &[ua, &qn]),
            mono(&[], &[ub, uc, &qn]),
        ],
        q,
        k,
    )? * t.facs_inv(
        [
            mono(&[], &[ua, &qn]),
            mono(&[], &[ub, &qn]),
            mono(&[], &[uc, &qn]),
            mono(&[ub, uc], &[ua, &qn]),
        ],
        q,
        k,
    )?;
    Ok(theta * lower * upper * qk)
}

fn split_poised_side(t: &Terms, p: &SplitPoisedParams) -> Result<Accum> {
    let mut acc = Accum::new(t.prec());
    for k in 0..=p.n as i64 {
        acc.add(&split_poised_term(t, p, k)?);
    }
    Ok(acc)
}

/// `(aq, bq, cq, aq/bc; q)_n / (aq/b, aq/c, bcq; q)_n`.
fn split_poised_product(
    t: &Terms,
    [a, b, c]: &[Complex; 3],
    q: &Complex,
    n: i64,
) -> Result<Complex> {
    Ok(t.facs([a * q, b * q, c * q, mono(&[a, q], &[b, c])], q, n)?
        * t.facs_inv(
            [
                mono(&[a, q], &[b]),
                mono(&[a, q], &[c]),
                mono(&[b, c, q], &[]),
            ],
            q,
            n,
        )?)
}

pub fn verify_split_poised(
    p: &SplitPoisedParams,
    ctx: &PrecisionContext,
) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &p.nome, &reg);
    let n = p.n as i64;
    let lhs = split_poised_side(&t, p)?;
    let rhs = split_poised_side(&t, &p.swapped())?;
    let pre =
        split_poised_product(&t, &p.abc, &p.q, n)? / split_poised_product(&t, &p.upper, &p.q, n)?;
    let scale = lhs.max_log2.max(rhs.max_log2 + pre.log2_abs());
    let qb = quadbasic_side(&t, &t, &p.quadbasic())?;
    let mut rep = ResidualReport::new(lhs.total.clone(), pre * &rhs.total, scale).check(
        "equals the quadbasic sum at r = R = Q = q",
        &lhs.total,
        &qb.total,
        lhs.max_log2.max(qb.max_log2),
    );
    if !p.nome.is_zero() {
        let mut recast = Vec::new();
        for (side, sum) in [(p.clone(), &lhs), (p.swapped(), &rhs)] {
            let e = e_sum_with(&t, &side.recast()?, Upper::Cutoff(p.n))?;
            recast.push((
                sum.total.clone(),
                e.value,
                sum.max_log2.max(e.max_term_log2),
            ));
        }
        rep = rep.check_all("equals the 12E11 series at argument -1", recast);
    }
    Ok(rep.with_regularity(reg.worst_log2()))
}

/// First quadratic transformation, bases q and q^2.
#[derive(Clone, Debug)]
pub struct Quad1Params {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub f: Complex,
    pub q: Complex,
    pub n: u32,
    pub nome: Nome,
}

/// Second quadratic transformation; the left side runs to 2n.
#[derive(Clone, Debug)]
pub struct Quad2Params {
    pub a: Complex,
    pub c: Complex,
    pub d: Complex,
    pub f: Complex,
    pub q: Complex,
    pub n: u32,
    pub nome: Nome,
}

/// Left side, prefactor and V-series data of a quadratic transformation,
/// generic over the kernel so the p = 0 case can use plain products.
trait Quadratic {
    fn nome(&self) -> &Nome;
    fn lhs<K: Kernel>(&self, t: &K) -> Result<Accum>;
    fn prefactor<K: Kernel>(&self, t: &K) -> Result<Complex>;
    /// `(a1, tail, base)` of the right side's V-series; its z is 1.
    fn series(&self) -> (Complex, Vec<Complex>, Complex);
    fn order(&self) -> u32;
}

fn quad_sum<K: Kernel>(t: &K, terms: impl Iterator<Item = Result<Complex>>) -> Result<Accum> {
    let mut acc = Accum::new(t.prec());
    for term in terms {
        acc.add(&term?);
    }
    Ok(acc)
}

impl Quadratic for Quad1Params {
    fn nome(&self) -> &Nome {
        &self.nome
    }

    fn lhs<K: Kernel>(&self, t: &K) -> Result<Accum> {
        let (a, b, c, f, q) = (&self.a, &self.b, &self.c, &self.f, &self.q);
        let n = self.n as i64;
        let q2 = q * q;
        let ac = a * c;
        let q2n = q.powi(2 * n);
        quad_sum(
            t,
            (0..=n).map(|k| {
                let theta = t.th_ratio(&(&ac * &q.powi(3 * k)), &ac)?;
                let single = t.facs([a.clone(), b.clone(), mono(&[c, q], &[b])], q, k)?
                    * t.facs_inv(
                        [
                            mono(&[&ac, q], &[f]),
                            mono(&[f], &[&ac, &q2n]),
                            &ac * &q2n * q,
                        ],
                        q,
                        k,
                    )?;
                let double = t.facs(
                    [f.clone(), mono(&[&ac, &ac, &q2n, q], &[f]), q2n.recip()],
                    &q2,
                    k,
                )? * t.facs_inv(
                    [c * &q2, mono(&[&ac, &q2], &[b]), mono(&[a, b, q], &[])],
                    &q2,
                    k,
                )?;
                Ok(theta * single * double * q.powi(k))
            }),
        )
    }

    fn prefactor<K: Kernel>(&self, t: &K) -> Result<Complex> {
        let (a, b, c, f, q) = (&self.a, &self.b, &self.c, &self.f, &self.q);
        let n = self.n as i64;
        let q2 = q * q;
        let acq = a * c * q;
        Ok(t.fac(&acq, q, 2 * n)?
            * t.facs(
                [mono(&[a, c, c, &q2], &[b, f]), mono(&[a, b, q], &[f])],
                &q2,
                n,
            )?
            * t.fac_inv(&(&acq / f), q, 2 * n)?
            * t.facs_inv([mono(&[a, b, q], &[]), mono(&[a, c, c, &q2], &[b])], &q2, n)?)
    }

    fn series(&self) -> (Complex, Vec<Complex>, Complex) {
        let (a, b, c, f, q) = (&self.a, &self.b, &self.c, &self.f, &self.q);
        let n = self.n as i64;
        let q2 = q * q;
        let tail = vec![
            f.clone(),
            mono(&[a, c], &[b]),
            c.clone(),
            mono(&[c, q], &[b]),
            mono(&[c, &q2], &[b]),
            mono(&[a, a, c, c, &q.powi(2 * n + 1)], &[f]),
            q.powi(-2 * n),
        ];
        (mono(&[a, c, c], &[b]), tail, q2)
    }

    fn order(&self) -> u32 {
        self.n
    }
}

impl Quadratic for Quad2Params {
    fn nome(&self) -> &Nome {
        &self.nome
    }

    fn lhs<K: Kernel>(&self, t: &K) -> Result<Accum> {
        let (a, c, d, f, q) = (&self.a, &self.c, &self.d, &self.f, &self.q);
        let n = self.n as i64;
        let q2 = q * q;
        let ac = a * c;
        let q2n = q.powi(2 * n);
        quad_sum(
            t,
            (0..=2 * n).map(|k| {
                let theta = t.th_ratio(&(&ac * &q.powi(3 * k)), &ac)?;
                let double =
                    t.facs(
                        [d.clone(), f.clone(), mono(&[&ac, &ac, q], &[d, f])],
                        &q2,
                        k,
                    )? * t.facs_inv([c * &q2, mono(&[a, q], &[&q2n]), &ac * &q2n * &q2], &q2, k)?;
                let single = t.facs([a.clone(), c * &q2n * q, q2n.recip()], q, k)?
                    * t.facs_inv(
                        [
                            mono(&[&ac, q], &[d]),
                            mono(&[&ac, q], &[f]),
                            mono(&[d, f], &[&ac]),
                        ],
                        q,
                        k,
                    )?;
                Ok(theta * double * single * q.powi(k))
            }),
        )
    }

    fn prefactor<K: Kernel>(&self, t: &K) -> Result<Complex> {
        let (a, c, d, f, q) = (&self.a, &self.c, &self.d, &self.f, &self.q);
        let n = self.n as i64;
        let q2 = q * q;
        let acq2 = a * c * &q2;
        let acs = a * c * &q.powi(1 - 2 * n);
        Ok(t.facs(
            [acq2.clone(), mono(&[&acq2], &[d, f]), &acs / d, &acs / f],
            &q2,
            n,
        )? * t.facs_inv(
            [&acq2 / d, &acq2 / f, acs.clone(), mono(&[&acs], &[d, f])],
            &q2,
            n,
        )?)
    }

    fn series(&self) -> (Complex, Vec<Complex>, Complex) {
        let (a, c, d, f, q) = (&self.a, &self.c, &self.d, &self.f, &self.q);
        let n = self.n as i64;
        let q2 = q * q;
        let tail = vec![
            c.clone(),
            d.clone(),
            f.clone(),
            mono(&[a, a, c, c, q], &[d, f]),
            a * &q.powi(-2 * n - 1),
            q.powi(1 - 2 * n),
            q.powi(-2 * n),
        ];
        (a * c * &q.powi(-2 * n - 1), tail, q2)
    }

    fn order(&self) -> u32 {
        self.n
    }
}

impl Quad1Params {
    pub fn sample(s: &mut Sampler, ctx: &PrecisionContext, n: u32) -> Result<Self> {
        let nome = s.nome(ctx)?;
        let [a, b, c, f, q] = s.params();
        Ok(Quad1Params {
            a,
            b,
            c,
            f,
            q,
            n,
            nome,
        })
    }
}

impl Quad2Params {
    pub fn sample(s: &mut Sampler, ctx: &PrecisionContext, n: u32) -> Result<Self> {
        let nome = s.nome(ctx)?;
        let [a, c, d, f, q] = s.params();
        Ok(Quad2Params {
            a,
            c,
            d,
            f,
            q,
            n,
            nome,
        })
    }
}

fn verify_quadratic<Q: Quadratic>(p: &Q, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, p.nome(), &reg);
    let lhs = p.lhs(&t)?;
    let pre = p.prefactor(&t)?;
    let (a1, tail, base) = p.series();
    let v = v_sum_with(
        &t,
        &VSeriesSpec::new(a1.clone(), tail.clone(), base.clone(), p.nome().clone()),
        Upper::Terminating,
    )?;
    let scale = lhs.max_log2.max(v.max_term_log2 + pre.log2_abs());

    // p = 0: theta machinery against plain 1 - x products, and the identity
    // against the basic very-well-poised sum
    let plain = PlainKernel::new(ctx);
    let zero = Nome::zero(ctx);
    let t0 = Terms::new(ctx, &zero, &reg);
    let lhs0 = p.lhs(&t0)?;
    let plain_lhs = p.lhs(&plain)?;
    let one = Complex::one(ctx.precision_bits());
    let plain_rhs = p.prefactor(&plain)? * w_sum(&a1, &tail, &base, &one, p.order());
    Ok(ResidualReport::new(lhs.total, pre * v.value, scale)
        .check(
            "theta at p = 0 matches 1 - x",
            &lhs0.total,
            &plain_lhs.total,
            lhs0.max_log2.max(plain_lhs.max_log2),
        )
        .check(
            "holds at p = 0 with the basic sum",
            &plain_lhs.total,
            &plain_rhs,
            plain_lhs.max_log2,
        )
        .with_regularity(reg.worst_log2()))
}

pub fn verify_quad1(p: &Quad1Params, ctx: &PrecisionContext) -> Result<ResidualReport> {
    verify_quadratic(p, ctx)
}

pub fn verify_quad2(p: &Quad2Params, ctx: &PrecisionContext) -> Result<ResidualReport> {
    verify_quadratic(p, ctx)
}

pub(super) fn trial(
    id: IdentityId,
    s: &mut Sampler,
    ctx: &PrecisionContext,
    o: Orders,
) -> Result<ResidualReport> {
    let n = order_u32(o.n, "n")?;
    match id {
        IdentityId::Gtf => verify_gtf(&GtfParams::sample(s, ctx, n)?, ctx),
        IdentityId::Ex28 => verify_ex28(&FourBasePair::sample(s, ctx, n)?, ctx),
        IdentityId::DD1 => verify_dd1(&FourBasePair::sample_unit_d(s, ctx, n)?, ctx),
        IdentityId::Quadbasic => verify_quadbasic(&QuadbasicParams::sample(s, ctx, n)?, ctx),
        IdentityId::SplitPoised => verify_split_poised(&SplitPoisedParams::sample(s, ctx, n)?, ctx),
        IdentityId::Quad1 => verify_quad1(&Quad1Params::sample(s, ctx, n)?, ctx),
        IdentityId::Quad2 => verify_quad2(&Quad2Params::sample(s, ctx, n)?, ctx),
        _ => Err(crate::error::Error::UnknownIdentity(id.key().into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Domain;

    fn run(id: IdentityId, n: i64, stream: u64) -> ResidualReport {
        let ctx = PrecisionContext::default();
        let mut s = Sampler::new(5, stream, 256, Domain::default());
        id.trial(&mut s, &ctx, Orders::n(n)).unwrap()
    }

    #[test]
    fn two_nome_transformations() {
        for id in [
            IdentityId::Gtf,
            IdentityId::Ex28,
            IdentityId::DD1,
            IdentityId::Quadbasic,
        ] {
            for n in [0, 1, 3, 5] {
                let r = run(id, n, 30 + n as u64);
                assert!(
                    r.all_pass(),
                    "{id} n={n}: {} {:?}",
                    r.residual_log2,
                    r.checks
                );
            }
        }
    }

    #[test]
    fn split_poised_transformation() {
        for n in [0, 1, 2, 5] {
            let r = run(IdentityId::SplitPoised, n, 40 + n as u64);
            assert!(r.all_pass(), "n={n}: {} {:?}", r.residual_log2, r.checks);
        }
    }

    #[test]
    fn split_poised_fixed_point() {
        let ctx = PrecisionContext::default();
        let mut s = Sampler::new(5, 49, 256, Domain::default());
        let mut p = SplitPoisedParams::sample(&mut s, &ctx, 3).unwrap();
        p.upper = p.abc.clone();
        let r = verify_split_poised(&p, &ctx).unwrap();
        assert!(r.all_pass());
        assert!((&r.lhs - &r.rhs).is_zero() || r.residual_log2 < -200.0);
    }

    #[test]
    fn quadratic_transformations() {
        for id in [IdentityId::Quad1, IdentityId::Quad2] {
            for n in [0, 1, 2, 3] {
                let r = run(id, n, 50 + n as u64);
                assert!(
                    r.all_pass(),
                    "{id} n={n}: {} {:?}",
                    r.residual_log2,
                    r.checks
                );
            }
        }
    }
}
