//! Terminating 10V9 summation, 12V11 transformation and their first-order
//! theta-function forms.

use crate::complex::Complex;
use crate::error::Result;
use crate::precision::PrecisionContext;
use crate::sampling::Sampler;
use crate::series::{is_e_balanced, v_sum_with, v_termination, vwp_embed, Upper, VSeriesSpec};
use crate::terms::{mono, Kernel, Regularity, Terms};
use crate::theta::Nome;

use super::{order_u32, IdentityId, Orders, ResidualReport};

#[derive(Clone, Debug)]
pub struct SumParams {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
    pub q: Complex,
    pub nome: Nome,
    pub n: u32,
}

impl SumParams {
    /// `e = a^2 q^(n+1) / (bcd)`.
    pub fn e(&self) -> Complex {
        let qn1 = self.q.powi(self.n as i64 + 1);
        mono(&[&self.a, &self.a, &qn1], &[&self.b, &self.c, &self.d])
    }

    pub fn series(&self) -> VSeriesSpec {
        let tail = vec![
            self.b.clone(),
            self.c.clone(),
            self.d.clone(),
            self.e(),
            self.q.powi(-(self.n as i64)),
        ];
        VSeriesSpec::new(self.a.clone(), tail, self.q.clone(), self.nome.clone())
    }

    pub fn sample(s: &mut Sampler, ctx: &PrecisionContext, n: u32) -> Result<Self> {
        let nome = s.nome(ctx)?;
        s.redraw("e", |s| {
            let [a, b, c, d, q] = s.params();
            let p = SumParams {
                a,
                b,
                c,
                d,
                q,
                nome: nome.clone(),
                n,
            };
            s.in_param_range(&p.e()).then_some(p)
        })
    }
}

/// Closed form `(aq, aq/bc, aq/bd, aq/cd)_n / (aq/b, aq/c, aq/d, aq/bcd)_n`.
pub fn sum_rhs<K: Kernel>(k: &K, p: &SumParams) -> Result<Complex> {
    let (a, b, c, d, q) = (&p.a, &p.b, &p.c, &p.d, &p.q);
    let aq = a * q;
    let n = p.n as i64;
    let num = k.facs(
        [
            aq.clone(),
            mono(&[&aq], &[b, c]),
            mono(&[&aq], &[b, d]),
            mono(&[&aq], &[c, d]),
        ],
        q,
        n,
    )?;
    let den = k.facs_inv([&aq / b, &aq / c, &aq / d, mono(&[&aq], &[b, c, d])], q, n)?;
    Ok(num * den)
}

pub fn verify_sum(p: &SumParams, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &p.nome, &reg);
    let spec = p.series();
    let info = v_termination(&spec, ctx);
    let lhs = v_sum_with(&t, &spec, Upper::Terminating)?;
    let rhs = sum_rhs(&t, p)?;
    Ok(ResidualReport::new(lhs.value, rhs, lhs.max_term_log2)
        .check_flag(
            "terminates at order n",
            info.order == p.n,
            ctx.precision_bits(),
        )
        .with_regularity(reg.worst_log2()))
}

#[derive(Clone, Debug)]
pub struct TransformParams {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
    pub e: Complex,
    pub f: Complex,
    pub q: Complex,
    pub nome: Nome,
    pub n: u32,
}

impl TransformParams {
    /// `lambda = q a^2 / (bcd)`.
    pub fn lambda(&self) -> Complex {
        mono(&[&self.q, &self.a, &self.a], &[&self.b, &self.c, &self.d])
    }

    /// `lambda a q^(n+1) / (ef)`, the balancing entry shared by both sides.
    fn balancing(&self) -> Complex {
        let qn1 = self.q.powi(self.n as i64 + 1);
        mono(&[&self.lambda(), &self.a, &qn1], &[&self.e, &self.f])
    }

    pub fn lhs_series(&self) -> VSeriesSpec {
        let tail = vec![
            self.b.clone(),
            self.c.clone(),
            self.d.clone(),
            self.e.clone(),
            self.f.clone(),
            self.balancing(),
            self.q.powi(-(self.n as i64)),
        ];
        VSeriesSpec::new(self.a.clone(), tail, self.q.clone(), self.nome.clone())
    }

    pub fn rhs_series(&self) -> VSeriesSpec {
        let l = self.lambda();
        let tail = vec![
            mono(&[&l, &self.b], &[&self.a]),
            mono(&[&l, &self.c], &[&self.a]),
            mono(&[&l, &self.d], &[&self.a]),
            self.e.clone(),
            self.f.clone(),
            self.balancing(),
            self.q.powi(-(self.n as i64)),
        ];
        VSeriesSpec::new(l, tail, self.q.clone(), self.nome.clone())
    }

    pub fn sample(s: &mut Sampler, ctx: &PrecisionContext, n: u32) -> Result<Self> {
        let nome = s.nome(ctx)?;
        let [a, b, c, d, e, f, q] = s.params();
        Ok(TransformParams {
            a,
            b,
            c,
            d,
            e,
            f,
            q,
            nome,
            n,
        })
    }
}

/// `(aq, aq/ef, lambda q/e, lambda q/f)_n / (aq/e, aq/f, lambda q/ef, lambda q)_n`.
pub fn transform_prefactor<K: Kernel>(k: &K, p: &TransformParams) -> Result<Complex> {
    let (a, e, f, q) = (&p.a, &p.e, &p.f, &p.q);
    let l = p.lambda();
    let aq = a * q;
    let lq = &l * q;
    let n = p.n as i64;
    let num = k.facs([aq.clone(), mono(&[&aq], &[e, f]), &lq / e, &lq / f], q, n)?;
    let den = k.facs_inv([&aq / e, &aq / f, mono(&[&lq], &[e, f]), lq.clone()], q, n)?;
    Ok(num * den)
}

pub fn verify_transform(p: &TransformParams, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &p.nome, &reg);
    let (ls, rs) = (p.lhs_series(), p.rhs_series());
    let lhs = v_sum_with(&t, &ls, Upper::Cutoff(p.n))?;
    let inner = v_sum_with(&t, &rs, Upper::Cutoff(p.n))?;
    let pre = transform_prefactor(&t, p)?;
    let scale = lhs.max_term_log2.max(inner.max_term_log2 + pre.log2_abs());
    let prec = ctx.precision_bits();
    let mut rep = ResidualReport::new(lhs.value, pre * inner.value, scale);
    if !p.nome.is_zero() {
        let balanced = is_e_balanced(&vwp_embed(&ls)?, ctx) && is_e_balanced(&vwp_embed(&rs)?, ctx);
        rep = rep.check_flag("both series E-balanced", balanced, prec);
    }
    Ok(rep.with_regularity(reg.worst_log2()))
}

#[derive(Clone, Debug)]
pub struct ThetaParams {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
    pub nome: Nome,
}

/// `1 - theta(b,c,d,a^2/bcd) / theta(a/b,a/c,a/d,bcd/a)` against
/// `theta(a, a/bc, a/bd, a/cd) / theta(a/bcd, a/d, a/c, a/b)`.
pub fn jackson_sides<K: Kernel>(k: &K, p: &ThetaParams) -> Result<(Complex, Complex, f64)> {
    let (a, b, c, d) = (&p.a, &p.b, &p.c, &p.d);
    let bcd = mono(&[b, c, d], &[]);
    let ratio = k.quot(
        [b.clone(), c.clone(), d.clone(), mono(&[a, a], &[&bcd])],
        [a / b, a / c, a / d, &bcd / a],
    )?;
    let lhs = &k.one() - &ratio;
    let rhs = k.quot(
        [
            a.clone(),
            mono(&[a], &[b, c]),
            mono(&[a], &[b, d]),
            mono(&[a], &[c, d]),
        ],
        [a / &bcd, a / d, a / c, a / b],
    )?;
    Ok((lhs, rhs, ratio.log2_abs()))
}

pub fn verify_jackson(p: &ThetaParams, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &p.nome, &reg);
    let (lhs, rhs, scale) = jackson_sides(&t, p)?;
    Ok(ResidualReport::new(lhs, rhs, scale).with_regularity(reg.worst_log2()))
}

#[derive(Clone, Debug)]
pub struct BaileyParams {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
    pub e: Complex,
    pub f: Complex,
    pub nome: Nome,
}

impl BaileyParams {
    /// `g = a^3 / (bcdef)`.
    pub fn g(&self) -> Complex {
        mono(
            &[&self.a, &self.a, &self.a],
            &[&self.b, &self.c, &self.d, &self.e, &self.f],
        )
    }

    pub fn sample(s: &mut Sampler, ctx: &PrecisionContext) -> Result<Self> {
        let nome = s.nome(ctx)?;
        s.redraw("g", |s| {
            let [a, b, c, d, e, f] = s.params();
            let p = BaileyParams {
                a,
                b,
                c,
                d,
                e,
                f,
                nome: nome.clone(),
            };
            s.in_param_range(&p.g()).then_some(p)
        })
    }
}

pub fn bailey_sides<K: Kernel>(k: &K, p: &BaileyParams) -> Result<(Complex, Complex, f64)> {
    let (a, b, c, d, e, f) = (&p.a, &p.b, &p.c, &p.d, &p.e, &p.f);
    let g = p.g();
    let r1 = k.quot(
        [
            b.clone(),
            c.clone(),
            d.clone(),
            e.clone(),
            f.clone(),
            g.clone(),
        ],
        [a / b, a / c, a / d, a / e, a / f, a / &g],
    )?;
    let lhs = &k.one() - &r1;
    let a2 = a * a;
    let bcd = mono(&[b, c, d], &[]);
    let outer = k.quot(
        [
            a.clone(),
            mono(&[a], &[e, f]),
            mono(&[&a2], &[&bcd, e]),
            mono(&[&a2], &[&bcd, f]),
        ],
        [mono(&[&a2], &[&bcd, e, f]), &a2 / &bcd, a / f, a / e],
    )?;
    let r2 = k.quot(
        [
            mono(&[a], &[b, c]),
            mono(&[a], &[b, d]),
            mono(&[a], &[c, d]),
            e.clone(),
            f.clone(),
            g.clone(),
        ],
        [
            a / d,
            a / c,
            a / b,
            mono(&[&a2], &[&bcd, e]),
            mono(&[&a2], &[&bcd, f]),
            mono(&[&a2], &[&bcd, &g]),
        ],
    )?;
    let rhs = &outer * &(&k.one() - &r2);
    let scale = r1.log2_abs().max(outer.log2_abs() + r2.log2_abs().max(0.0));
    Ok((lhs, rhs, scale))
}

pub fn verify_bailey(p: &BaileyParams, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &p.nome, &reg);
    let (lhs, rhs, scale) = bailey_sides(&t, p)?;
    Ok(ResidualReport::new(lhs, rhs, scale).with_regularity(reg.worst_log2()))
}

pub(super) fn trial(
    id: IdentityId,
    s: &mut Sampler,
    ctx: &PrecisionContext,
    o: Orders,
) -> Result<ResidualReport> {
    match id {
        IdentityId::Ft109 => verify_sum(&SumParams::sample(s, ctx, order_u32(o.n, "n")?)?, ctx),
        IdentityId::Ft1211 => {
            verify_transform(&TransformParams::sample(s, ctx, order_u32(o.n, "n")?)?, ctx)
        }
        IdentityId::Ft109n1 => {
            let nome = s.nome(ctx)?;
            let [a, b, c, d] = s.params();
            verify_jackson(&ThetaParams { a, b, c, d, nome }, ctx)
        }
        _ => verify_bailey(&BaileyParams::sample(s, ctx)?, ctx),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basic::PlainKernel;
    use crate::sampling::Domain;

    #[test]
    fn sum_at_order_zero_is_one() {
        let ctx = PrecisionContext::default();
        let mut s = Sampler::new(11, 0, 256, Domain::default());
        let p = SumParams::sample(&mut s, &ctx, 0).unwrap();
        let r = verify_sum(&p, &ctx).unwrap();
        assert!(r.all_pass());
        assert!((&r.rhs - &Complex::one(256)).is_zero());
    }

    #[test]
    fn sum_and_transform_random() {
        let ctx = PrecisionContext::default();
        let mut s = Sampler::new(12, 0, 256, Domain::default());
        for n in [1, 3, 5] {
            let r = verify_sum(&SumParams::sample(&mut s, &ctx, n).unwrap(), &ctx).unwrap();
            assert!(r.all_pass(), "ft109 n={n}: {}", r.residual_log2);
            let r =
                verify_transform(&TransformParams::sample(&mut s, &ctx, n).unwrap(), &ctx).unwrap();
            assert!(r.all_pass(), "ft1211 n={n}: {}", r.residual_log2);
        }
    }

    #[test]
    fn theta_identities_random_and_at_p_zero() {
        let ctx = PrecisionContext::default();
        let mut s = Sampler::new(13, 0, 256, Domain::default());
        for _ in 0..5 {
            let nome = s.nome(&ctx).unwrap();
            let [a, b, c, d] = s.params();
            let p = ThetaParams { a, b, c, d, nome };
            assert!(verify_jackson(&p, &ctx).unwrap().all_pass());
            let z = ThetaParams {
                nome: Nome::zero(&ctx),
                ..p
            };
            let (l, r, _) = jackson_sides(&PlainKernel::new(&ctx), &z).unwrap();
            assert!(ResidualReport::new(l, r, 0.0).pass);
            assert!(
                verify_bailey(&BaileyParams::sample(&mut s, &ctx).unwrap(), &ctx)
                    .unwrap()
                    .all_pass()
            );
        }
    }

    #[test]
    fn transform_at_lambda_a_over_d_is_the_sum() {
        // c = qa/b gives lambda = a/d; the b, c pair cancels in the 12V11
        let ctx = PrecisionContext::default();
        let mut s = Sampler::new(14, 0, 256, Domain::default());
        let nome = s.nome(&ctx).unwrap();
        let [a, b, d, e, f, q] = s.params();
        let c = mono(&[&q, &a], &[&b]);
        let n = 3;
        let tp = TransformParams {
            a: a.clone(),
            b,
            c,
            d: d.clone(),
            e: e.clone(),
            f: f.clone(),
            q: q.clone(),
            nome: nome.clone(),
            n,
        };
        let sp = SumParams {
            a,
            b: d,
            c: e,
            d: f,
            q,
            nome,
            n,
        };
        let reg = Regularity::new();
        let t = Terms::new(&ctx, &sp.nome, &reg);
        let l1 = v_sum_with(&t, &tp.lhs_series(), Upper::Cutoff(n)).unwrap();
        let l2 = v_sum_with(&t, &sp.series(), Upper::Cutoff(n)).unwrap();
        assert!(ResidualReport::new(l1.value, l2.value, l1.max_term_log2).pass);
        let p1 = transform_prefactor(&t, &tp).unwrap();
        let p2 = sum_rhs(&t, &sp).unwrap();
        assert!(ResidualReport::new(p1, p2, 0.0).pass);
    }
}
