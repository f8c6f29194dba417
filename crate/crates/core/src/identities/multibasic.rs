//! Terminating multibasic summations: the six-base closed form, its delta
//! sums, the bibasic delta sum with its 8V7 reduction, and the four-base
//! two-term sum.

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::precision::PrecisionContext;
use crate::sampling::Sampler;
use crate::series::{v_sum_with, Upper, VSeriesSpec};
use crate::terms::{mono, Accum, Kernel, Regularity, Terms};
use crate::theta::Nome;

use super::indefinite::{m0_term, GeomParams};
use super::{order_u32, pairwise_distinct, IdentityId, Orders, ResidualReport};

/// Six bases `q, r, s, t, u, w` with `v = w^3 / qrstu`.
#[derive(Clone, Debug)]
pub struct Bases {
    pub q: Complex,
    pub r: Complex,
    pub s: Complex,
    pub t: Complex,
    pub u: Complex,
    pub w: Complex,
}

impl Bases {
    /// Whether q, r, s, t, u and the derived v are pairwise distinct.
    pub fn distinct(&self) -> bool {
        pairwise_distinct(&[
            self.q.clone(),
            self.r.clone(),
            self.s.clone(),
            self.t.clone(),
            self.u.clone(),
            self.v(),
        ])
    }

    pub fn v(&self) -> Complex {
        mono(
            &[&self.w, &self.w, &self.w],
            &[&self.q, &self.r, &self.s, &self.t, &self.u],
        )
    }

    fn sample(s: &mut Sampler) -> Self {
        let [q, r, s_, t, u, w] = s.params();
        Bases {
            q,
            r,
            s: s_,
            t,
            u,
            w,
        }
    }
}

/// `theta(a(w/rs)^k/cd, a(w/qs)^k/bd, a(w/qr)^k/bc) / theta(a(w/q)^k/b, a(w/r)^k/c, a(w/s)^k/d)`.
fn three_base_ratio<K: Kernel>(t: &K, abcd: [&Complex; 4], bs: &Bases, k: i64) -> Result<Complex> {
    let [a, b, c, d] = abcd;
    let wk = bs.w.powi(k);
    let (wq, wr, ws) = (
        (&bs.w / &bs.q).powi(k),
        (&bs.w / &bs.r).powi(k),
        (&bs.w / &bs.s).powi(k),
    );
    t.quot(
        [
            mono(&[a, &wr, &ws], &[c, d, &wk]),
            mono(&[a, &wq, &ws], &[b, d, &wk]),
            mono(&[a, &wq, &wr], &[b, c, &wk]),
        ],
        [
            mono(&[a, &wq], &[b]),
            mono(&[a, &wr], &[c]),
            mono(&[a, &ws], &[d]),
        ],
    )
}

/// Terminating six-base sum: `a^3 v^n = bcdef` resolves f.
#[derive(Clone, Debug)]
pub struct CsnParams {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
    pub e: Complex,
    pub bases: Bases,
    pub n: u32,
    pub nome: Nome,
}

impl CsnParams {
    pub fn f(&self) -> Complex {
        let vn = self.bases.v().powi(self.n as i64);
        mono(
            &[&self.a, &self.a, &self.a, &vn],
            &[&self.b, &self.c, &self.d, &self.e],
        )
    }

    pub fn sample(s: &mut Sampler, ctx: &PrecisionContext, n: u32) -> Result<Self> {
        let nome = s.nome(ctx)?;
        s.redraw("f and v", |s| {
            let [a, b, c, d, e] = s.params();
            let bases = Bases::sample(s);
            let p = CsnParams {
                a,
                b,
                c,
                d,
                e,
                bases,
                n,
                nome: nome.clone(),
            };
            (s.in_param_range(&p.f()) && s.in_param_range(&p.bases.v())).then_some(p)
        })
    }

    /// The same parameters as a six-base family; its g is `v^-n`.
    pub fn geom(&self) -> GeomParams {
        let b = &self.bases;
        GeomParams {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            d: self.d.clone(),
            e: self.e.clone(),
            f: self.f(),
            q: b.q.clone(),
            r: b.r.clone(),
            s: b.s.clone(),
            t: b.t.clone(),
            u: b.u.clone(),
            w: b.w.clone(),
            nome: self.nome.clone(),
        }
    }
}

pub fn csn_term<K: Kernel>(t: &K, p: &CsnParams, k: i64) -> Result<Complex> {
    csn_term_with_f(t, p, &p.f(), k)
}

fn csn_term_with_f<K: Kernel>(t: &K, p: &CsnParams, f: &Complex, k: i64) -> Result<Complex> {
    let (a, b, c, d, e) = (&p.a, &p.b, &p.c, &p.d, &p.e);
    let bs = &p.bases;
    let (q, r, s, tt, u, w, v) = (&bs.q, &bs.r, &bs.s, &bs.t, &bs.u, &bs.w, &bs.v());
    let n = p.n as i64;
    let vn = v.powi(-n);
    let (wk, tk, uk, vk) = (w.powi(k), tt.powi(k), u.powi(k), v.powi(k));
    let x = mono(&[a, a], &[b, c, d]);
    let weight = t.quot(
        [
            a * &wk,
            mono(&[a, &wk], &[e, f, &tk, &uk]),
            mono(&[&x, &uk, &vk], &[e, &wk]),
            mono(&[&x, &tk, &vk], &[f, &wk]),
            x.clone(),
        ],
        [
            a.clone(),
            mono(&[a], &[e, f]),
            &x / e,
            &x / f,
            mono(&[&x, &tk, &uk, &vk], &[&wk]),
        ],
    )?;
    let facs = t.fac_quot(
        [
            (b.clone(), q.clone()),
            (c.clone(), r.clone()),
            (d.clone(), s.clone()),
            (e.clone(), tt.clone()),
            (f.clone(), u.clone()),
            (vn.clone(), v.clone()),
        ],
        [
            (a / b, w / q),
            (a / c, w / r),
            (a / d, w / s),
            (mono(&[a, w], &[e, tt]), w / tt),
            (mono(&[a, w], &[f, u]), w / u),
            (mono(&[a, w, &v.powi(n - 1)], &[]), w / v),
        ],
        k,
    )?;
    let vkn = &vk * &vn;
    let outer = t.quot(
        [e * &tk, f * &uk, vkn.clone()],
        [
            mono(&[f, &uk, &vkn], &[&wk, a]),
            mono(&[e, &tk, &vkn], &[&wk, a]),
            mono(&[e, f, &tk, &uk], &[&wk, a]),
        ],
    )?;
    let bracket = t.one() - three_base_ratio(t, [a, b, c, d], bs, k)? * outer;
    Ok(weight * facs * (w / v).powi(k) * bracket)
}

/// `theta(a/e, a/f, v^-n/a, ef v^-n/a) / theta(e v^-n/a, f v^-n/a, a, a/ef)`.
pub fn csn_rhs<K: Kernel>(t: &K, p: &CsnParams) -> Result<Complex> {
    let (a, e, f) = (&p.a, &p.e, &p.f());
    let vn = p.bases.v().powi(-(p.n as i64));
    t.quot(
        [a / e, a / f, &vn / a, mono(&[e, f, &vn], &[a])],
        [
            mono(&[e, &vn], &[a]),
            mono(&[f, &vn], &[a]),
            a.clone(),
            mono(&[a], &[e, f]),
        ],
    )
}

pub fn verify_csn(p: &CsnParams, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &p.nome, &reg);
    let gp = p.geom();
    let mut acc = Accum::new(ctx.precision_bits());
    let mut termwise = Vec::new();
    for k in 0..=p.n as i64 {
        let term = csn_term(&t, p, k)?;
        termwise.push((
            term.clone(),
            m0_term(&t, &gp, k)?,
            acc.max_log2.max(term.log2_abs()),
        ));
        acc.add(&term);
    }
    let rhs = csn_rhs(&t, p)?;
    Ok(ResidualReport::new(acc.total, rhs, acc.max_log2)
        .check_all(
            "termwise equal to the patched six-base sum at g = v^-n",
            termwise,
        )
        .check_flag(
            "six bases pairwise distinct",
            gp.bases_distinct(),
            ctx.precision_bits(),
        )
        .with_regularity(reg.worst_log2()))
}

/// Six-base delta sum: `a^2 v^n = bcde` resolves e.
#[derive(Clone, Debug)]
pub struct FtoaParams {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
    pub bases: Bases,
    pub n: u32,
    pub nome: Nome,
}

impl FtoaParams {
    pub fn e(&self) -> Complex {
        let vn = self.bases.v().powi(self.n as i64);
        mono(&[&self.a, &self.a, &vn], &[&self.b, &self.c, &self.d])
    }

    pub fn sample(s: &mut Sampler, ctx: &PrecisionContext, n: u32) -> Result<Self> {
        let nome = s.nome(ctx)?;
        s.redraw("e and v", |s| {
            let [a, b, c, d] = s.params();
            let bases = Bases::sample(s);
            let p = FtoaParams {
                a,
                b,
                c,
                d,
                bases,
                n,
                nome: nome.clone(),
            };
            (s.in_param_range(&p.e()) && s.in_param_range(&p.bases.v())).then_some(p)
        })
    }

    /// The six-base closed-form parameters with e resolved and f left free.
    pub fn csn(&self) -> CsnParams {
        CsnParams {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            d: self.d.clone(),
            e: self.e(),
            bases: self.bases.clone(),
            n: self.n,
            nome: self.nome.clone(),
        }
    }
}

pub fn ftoa_term<K: Kernel>(t: &K, p: &FtoaParams, k: i64) -> Result<Complex> {
    let (a, b, c, d, e) = (&p.a, &p.b, &p.c, &p.d, &p.e());
    let bs = &p.bases;
    let (q, r, s, tt, u, w, v) = (&bs.q, &bs.r, &bs.s, &bs.t, &bs.u, &bs.w, &bs.v());
    let n = p.n as i64;
    let vn = v.powi(-n);
    let (wk, tk, uk, vk) = (w.powi(k), tt.powi(k), u.powi(k), v.powi(k));
    let bcd = b * c * d;
    let x = mono(&[a, a], &[&bcd]);
    // v^-n (uv/w)^k against a^2/bcde = v^-n: 0/0 at n = k = 0
    let weight = t.quot(
        [
            a * &wk,
            mono(&[&wk], &[e, &tk, &uk]),
            mono(&[a, &tk, &vk], &[&bcd, &wk]),
            x.clone(),
        ],
        [
            a.clone(),
            e.recip(),
            a / &bcd,
            mono(&[&x, &tk, &uk, &vk], &[&wk]),
        ],
    )? * t.th_ratio(&mono(&[&vn, &uk, &vk], &[&wk]), &(&x / e))?;
    let facs = t.fac_quot(
        [
            (b.clone(), q.clone()),
            (c.clone(), r.clone()),
            (d.clone(), s.clone()),
            (e.clone(), tt.clone()),
            (a.clone(), u.clone()),
            (vn.clone(), v.clone()),
        ],
        [
            (a / b, w / q),
            (a / c, w / r),
            (a / d, w / s),
            (mono(&[a, w], &[e, tt]), w / tt),
            (w / u, w / u),
            (mono(&[a, w, &v.powi(n - 1)], &[]), w / v),
        ],
        k,
    )?;
    let vkn = &vk * &vn;
    let outer = t.quot(
        [e * &tk, a * &uk],
        [
            mono(&[e, &tk, &vkn], &[&wk, a]),
            mono(&[e, &tk, &uk], &[&wk]),
        ],
    )? * vanishing_ratio(t, &vkn, &mono(&[&uk, &vkn], &[&wk]))?;
    let bracket = t.one() - three_base_ratio(t, [a, b, c, d], bs, k)? * outer;
    Ok(weight * facs * (w / v).powi(k) * bracket)
}

/// `theta(x)/theta(y)` where a vanishing numerator wins: theta(v^(k-n))
/// is 0 at k = n for every f, so the f -> a limit of the ratio is 0 there
/// even when theta(y) vanishes too.
fn vanishing_ratio<K: Kernel>(t: &K, x: &Complex, y: &Complex) -> Result<Complex> {
    let num = t.th(x)?;
    if num.is_zero() {
        return Ok(num);
    }
    Ok(num / t.th_den(y, 0)?)
}

fn delta(n: u32, prec: usize) -> Complex {
    if n == 0 {
        Complex::one(prec)
    } else {
        Complex::zero(prec)
    }
}

/// A delta sum's report: `|sum - delta| / max(1, scale)`, plus
/// `|sum| / max|term|` when n >= 1.
fn delta_report(sum: Complex, n: u32, scale_log2: f64) -> ResidualReport {
    let prec = sum.precision();
    let rep = ResidualReport::new(sum.clone(), delta(n, prec), scale_log2);
    if n >= 1 {
        rep.check_vanishes(
            "sum vanishes relative to its largest term",
            &sum,
            scale_log2,
        )
    } else {
        rep
    }
}

pub fn verify_ftoa(p: &FtoaParams, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &p.nome, &reg);
    let mut acc = Accum::new(ctx.precision_bits());
    let mut terms = Vec::new();
    for k in 0..=p.n as i64 {
        let term = ftoa_term(&t, p, k)?;
        acc.add(&term);
        terms.push(term);
    }
    let mut rep = delta_report(acc.total, p.n, acc.max_log2);
    if p.n >= 1 {
        // f = a in the closed-form summand; theta(a/f) makes its right side 0
        let csn = p.csn();
        let pairs = terms
            .iter()
            .enumerate()
            .map(|(k, x)| {
                Ok((
                    x.clone(),
                    csn_term_with_f(&t, &csn, &p.a, k as i64)?,
                    acc.max_log2,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        rep = rep.check_all("termwise equal to the closed-form sum at f = a", pairs);
    }
    Ok(rep
        .check_flag(
            "six bases pairwise distinct",
            p.bases.distinct(),
            ctx.precision_bits(),
        )
        .with_regularity(reg.worst_log2()))
}

/// Four-base delta sum in `a, b` and bases `q, r, s, t`.
#[derive(Clone, Debug)]
pub struct Dto1Params {
    pub a: Complex,
    pub b: Complex,
    pub q: Complex,
    pub r: Complex,
    pub s: Complex,
    pub t: Complex,
    pub n: u32,
    pub nome: Nome,
}

impl Dto1Params {
    pub fn sample(s: &mut Sampler, ctx: &PrecisionContext, n: u32) -> Result<Self> {
        let nome = s.nome(ctx)?;
        let [a, b, q, r, s_, t] = s.params();
        Ok(Dto1Params {
            a,
            b,
            q,
            r,
            s: s_,
            t,
            n,
            nome,
        })
    }

    /// Six-base delta parameters reproducing this sum term by term:
    /// `d = a/c`, bases `(r, split, rst/(q split), t, rst/q^2, w = rst/q)`.
    pub fn as_ftoa(&self, c: &Complex, split: &Complex) -> FtoaParams {
        let (q, r, s, t) = (&self.q, &self.r, &self.s, &self.t);
        let w = mono(&[r, s, t], &[q]);
        FtoaParams {
            a: self.a.clone(),
            b: self.b.clone(),
            c: c.clone(),
            d: &self.a / c,
            bases: Bases {
                q: r.clone(),
                r: split.clone(),
                s: &w / split,
                t: t.clone(),
                u: &w / q,
                w,
            },
            n: self.n,
            nome: self.nome.clone(),
        }
    }
}

pub fn dto1_term<K: Kernel>(t: &K, p: &Dto1Params, k: i64) -> Result<Complex> {
    let (a, b, q, r, s, tt) = (&p.a, &p.b, &p.q, &p.r, &p.s, &p.t);
    let n = p.n as i64;
    let sn = s.powi(n);
    let qk = q.powi(k);
    let rst_q = mono(&[r, s, tt], &[q]);
    let asn_b = mono(&[a, &sn], &[b]);
    // each argument pairs with its k = 0 value
    let weight = t.th_ratio(&(a * &rst_q.powi(k)), a)?
        * t.th_ratio(&mono(&[b, &r.powi(k)], &[&qk]), b)?
        * t.th_ratio(&(&s.powi(k - n) / &qk), &s.powi(-n))?
        * t.th_ratio(&mono(&[&asn_b, &tt.powi(k)], &[&qk]), &asn_b)?;
    let facs = t.fac_quot(
        [
            (a.clone(), mono(&[r, s, tt], &[q, q])),
            (b.clone(), r.clone()),
            (s.powi(-n), s.clone()),
            (asn_b.clone(), tt.clone()),
        ],
        [
            (q.clone(), q.clone()),
            (mono(&[a, s, tt], &[b, q]), mono(&[s, tt], &[q])),
            (mono(&[a, &sn, r, tt], &[q]), mono(&[r, tt], &[q])),
            (mono(&[b, r, &s.powi(1 - n)], &[q]), mono(&[r, s], &[q])),
        ],
        k,
    )?;
    Ok(weight * facs * qk)
}

pub fn verify_dto1(p: &Dto1Params, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &p.nome, &reg);
    let mut acc = Accum::new(ctx.precision_bits());
    for k in 0..=p.n as i64 {
        acc.add(&dto1_term(&t, p, k)?);
    }
    let distinct = pairwise_distinct(&[p.q.clone(), p.r.clone(), p.s.clone(), p.t.clone()]);
    Ok(delta_report(acc.total, p.n, acc.max_log2)
        .check_flag(
            "four bases pairwise distinct",
            distinct,
            ctx.precision_bits(),
        )
        .with_regularity(reg.worst_log2()))
}

/// Termwise comparison of the four-base delta sum with the six-base one.
pub fn dto1_matches_ftoa(
    p: &Dto1Params,
    c: &Complex,
    split: &Complex,
    ctx: &PrecisionContext,
) -> Result<Vec<(Complex, Complex, f64)>> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &p.nome, &reg);
    let f = p.as_ftoa(c, split);
    let mut out = Vec::new();
    for k in 0..=p.n as i64 {
        let x = dto1_term(&t, p, k)?;
        let scale = x.log2_abs();
        out.push((x, ftoa_term(&t, &f, k)?, scale));
    }
    Ok(out)
}

/// Bibasic delta sum in bases q and r.
#[derive(Clone, Debug)]
pub struct BibasicParams {
    pub a: Complex,
    pub b: Complex,
    pub q: Complex,
    pub r: Complex,
    pub n: u32,
    pub nome: Nome,
}

impl BibasicParams {
    pub fn sample(s: &mut Sampler, ctx: &PrecisionContext, n: u32) -> Result<Self> {
        let nome = s.nome(ctx)?;
        let [a, b, q, r] = s.params();
        Ok(BibasicParams {
            a,
            b,
            q,
            r,
            n,
            nome,
        })
    }
}

/// Sum including the `theta(a/r, b/r)` prefactor, and its largest term.
pub fn bibasic_sum<K: Kernel>(t: &K, p: &BibasicParams) -> Result<(Complex, f64)> {
    let (a, b, q, r) = (&p.a, &p.b, &p.q, &p.r);
    let n = p.n as i64;
    let pre = t.ths([a / r, b / r])?;
    let mut acc = Accum::new(t.prec());
    for k in 0..=n {
        let qk = q.powi(k);
        let sign = if k % 2 == 0 { t.one() } else { -t.one() };
        let term = t.facs([a * &qk, b / &qk], r, n - 1)?
            * t.th(&mono(&[a, &qk, &qk], &[b]))?
            * t.fac_inv(q, q, k)?
            * t.fac_inv(q, q, n - k)?
            * t.fac_inv(&mono(&[a, &qk], &[b]), q, n + 1)?
            * q.powi(k * (k - 1) / 2)
            * sign;
        acc.add(&(&pre * &term));
    }
    Ok((acc.total, acc.max_log2))
}

pub fn verify_bibasic(p: &BibasicParams, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &p.nome, &reg);
    let (sum, scale) = bibasic_sum(&t, p)?;
    Ok(delta_report(sum, p.n, scale).with_regularity(reg.worst_log2()))
}

/// `8V7(a/b; q/b, a q^(n-1), q^-n; q, p)` with z = 1.
pub fn v87_series(a: &Complex, b: &Complex, q: &Complex, n: u32, nome: &Nome) -> VSeriesSpec {
    let tail = vec![q / b, a * &q.powi(n as i64 - 1), q.powi(-(n as i64))];
    VSeriesSpec::new(a / b, tail, q.clone(), nome.clone())
}

/// The 8V7 delta sum, compared with the bibasic sum at r = q.
pub fn verify_v87(p: &BibasicParams, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &p.nome, &reg);
    let sum = v_sum_with(
        &t,
        &v87_series(&p.a, &p.b, &p.q, p.n, &p.nome),
        Upper::Terminating,
    )?;
    let at_q = BibasicParams {
        r: p.q.clone(),
        ..p.clone()
    };
    let (bib, bib_scale) = bibasic_sum(&t, &at_q)?;
    let scale = sum.max_term_log2.max(bib_scale);
    Ok(delta_report(sum.value.clone(), p.n, sum.max_term_log2)
        .check("equals the bibasic sum at r = q", &sum.value, &bib, scale)
        .with_regularity(reg.worst_log2()))
}

/// Four-base sum with a two-term right side.
#[derive(Clone, Debug)]
pub struct M00Params {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
    pub q: Complex,
    pub r: Complex,
    pub s: Complex,
    pub t: Complex,
    pub n: u32,
    pub nome: Nome,
}

impl M00Params {
    pub fn sample(s: &mut Sampler, ctx: &PrecisionContext, n: u32) -> Result<Self> {
        let nome = s.nome(ctx)?;
        let [a, b, c, d, q, r, s_, t] = s.params();
        Ok(M00Params {
            a,
            b,
            c,
            d,
            q,
            r,
            s: s_,
            t,
            n,
            nome,
        })
    }

    /// `(x, base)` pairs of the denominator factorials.
    pub(crate) fn den_pairs(&self) -> [(Complex, Complex); 4] {
        let (a, b, c, d, q, r, s, t) = (
            &self.a, &self.b, &self.c, &self.d, &self.q, &self.r, &self.s, &self.t,
        );
        [
            (d * q, q.clone()),
            (mono(&[a, d, s, t], &[b, q]), mono(&[s, t], &[q])),
            (mono(&[a, d, r, t], &[c, q]), mono(&[r, t], &[q])),
            (mono(&[b, c, r, s], &[d, q]), mono(&[r, s], &[q])),
        ]
    }

    pub(crate) fn den_theta<K: Kernel>(&self, t: &K) -> Result<Complex> {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        t.ths([a * d, b / d, c / d, mono(&[a, d], &[b, c])])
    }
}

pub fn m00_term<K: Kernel>(t: &K, p: &M00Params, k: i64) -> Result<Complex> {
    let (a, b, c, d, q, r, s, tt) = (&p.a, &p.b, &p.c, &p.d, &p.q, &p.r, &p.s, &p.t);
    let qk = q.powi(k);
    let ad = a * d;
    let num = t.ths([
        &ad * &mono(&[r, s, tt], &[q]).powi(k),
        mono(&[b, &r.powi(k)], &[d, &qk]),
        mono(&[c, &s.powi(k)], &[d, &qk]),
        mono(&[&ad, &tt.powi(k)], &[b, c, &qk]),
    ])?;
    let facs = t.fac_quot(
        [
            (a.clone(), mono(&[r, s, tt], &[q, q])),
            (b.clone(), r.clone()),
            (c.clone(), s.clone()),
            (mono(&[&ad, d], &[b, c]), tt.clone()),
        ],
        p.den_pairs(),
        k,
    )?;
    let den = p.den_theta(t)?;
    if den.is_zero() {
        return Err(Error::SingularDenominator {
            what: "theta(ad, b/d, c/d, ad/bc)".into(),
            index: k,
        });
    }
    Ok(num / den * facs * qk)
}

/// `(arst/q^2;rst/q^2)_n (br;r)_n (cs;s)_n (ad^2t/bc;t)_n` over the
/// summand's denominator factorials at n.
pub fn m00_product<K: Kernel>(t: &K, p: &M00Params) -> Result<Complex> {
    let (a, b, c, d, q, r, s, tt) = (&p.a, &p.b, &p.c, &p.d, &p.q, &p.r, &p.s, &p.t);
    let rst = mono(&[r, s, tt], &[q, q]);
    let add_bc = mono(&[a, d, d], &[b, c]);
    t.fac_quot(
        [
            (a * &rst, rst.clone()),
            (b * r, r.clone()),
            (c * s, s.clone()),
            (&add_bc * tt, tt.clone()),
        ],
        p.den_pairs(),
        p.n as i64,
    )
}

/// `theta(d, ad/b, ad/c, bc/d) / (d theta(ad, b/d, c/d, ad/bc))`.
pub fn m00_tail<K: Kernel>(t: &K, p: &M00Params) -> Result<Complex> {
    let (a, b, c, d) = (&p.a, &p.b, &p.c, &p.d);
    let den = m00_den(t, p)?;
    Ok(t.ths([
        d.clone(),
        mono(&[a, d], &[b]),
        mono(&[a, d], &[c]),
        mono(&[b, c], &[d]),
    ])? / den)
}

/// `d theta(ad, b/d, c/d, ad/bc)`, nonzero.
fn m00_den<K: Kernel>(t: &K, p: &M00Params) -> Result<Complex> {
    let den = p.den_theta(t)? * &p.d;
    if den.is_zero() {
        return Err(Error::SingularDenominator {
            what: "theta(ad, b/d, c/d, ad/bc)".into(),
            index: 0,
        });
    }
    Ok(den)
}

/// `theta(a, b, c, ad^2/bc) / (d theta(ad, b/d, c/d, ad/bc))`.
pub fn m00_lead<K: Kernel>(t: &K, p: &M00Params) -> Result<Complex> {
    let (a, b, c, d) = (&p.a, &p.b, &p.c, &p.d);
    Ok(t.ths([a.clone(), b.clone(), c.clone(), mono(&[a, d, d], &[b, c])])? / m00_den(t, p)?)
}

pub fn m00_rhs<K: Kernel>(t: &K, p: &M00Params) -> Result<Complex> {
    Ok(m00_lead(t, p)? * m00_product(t, p)? - m00_tail(t, p)?)
}

pub fn verify_m00(p: &M00Params, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &p.nome, &reg);
    let mut acc = Accum::new(ctx.precision_bits());
    for k in 0..=p.n as i64 {
        acc.add(&m00_term(&t, p, k)?);
    }
    let rhs = m00_rhs(&t, p)?;
    Ok(ResidualReport::new(acc.total, rhs, acc.max_log2).with_regularity(reg.worst_log2()))
}

pub(super) fn trial(
    id: IdentityId,
    s: &mut Sampler,
    ctx: &PrecisionContext,
    o: Orders,
) -> Result<ResidualReport> {
    let n = order_u32(o.n, "n")?;
    match id {
        IdentityId::Csn => verify_csn(&CsnParams::sample(s, ctx, n)?, ctx),
        IdentityId::Ftoa => verify_ftoa(&FtoaParams::sample(s, ctx, n)?, ctx),
        IdentityId::Dto1 => {
            let p = Dto1Params::sample(s, ctx, n)?;
            let [c, split] = s.params();
            let rep = verify_dto1(&p, ctx)?;
            if n == 0 {
                return Ok(rep);
            }
            Ok(rep.check_all(
                "termwise equal to the six-base delta sum",
                dto1_matches_ftoa(&p, &c, &split, ctx)?,
            ))
        }
        IdentityId::BibasicDelta => verify_bibasic(&BibasicParams::sample(s, ctx, n)?, ctx),
        IdentityId::V87Delta => verify_v87(&BibasicParams::sample(s, ctx, n)?, ctx),
        IdentityId::M00 => verify_m00(&M00Params::sample(s, ctx, n)?, ctx),
        _ => Err(Error::UnknownIdentity(id.key().into())),
    }
}
