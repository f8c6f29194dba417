//! Indefinite summations obtained by telescoping a product `U_n`, their
//! geometric (six-base) specialization and two bilateral limits.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::precision::PrecisionContext;
use crate::sampling::Sampler;
use crate::terms::{mono, Accum, Kernel, Regularity, Terms};
use crate::theta::{infinite_product_raw, Nome};

use super::{pairwise_distinct, scaled_residual, IdentityId, Orders, ResidualReport};

/// `(a, b, c, d, e, f, g)` at one index.
pub type Row = [Complex; 7];

/// Upper bound on terms taken on either side of the bilateral p = 0 sum.
const MAX_BILATERAL_TERMS: usize = 20_000;

/// Consecutive negligible terms that end the bilateral sum on one side.
const TAIL_RUN: usize = 5;

/// Bits above the rounding floor of `1 - quotient` still treated as noise.
const NOISE_MARGIN_BITS: f64 = 8.0;

/// Working precision at which the bilateral sum stops escalating.
const MAX_BILATERAL_BITS: usize = 4096;

/// `sum_{k=from}^{to}` as an index range plus a sign: `from = to + 1` is
/// empty and `from >= to + 2` means `-sum_{k=to+1}^{from-1}`.
pub fn signed_range(from: i64, to: i64) -> (RangeInclusive<i64>, bool) {
    if from <= to {
        (from..=to, false)
    } else {
        (to + 1..=from - 1, true)
    }
}

/// Bilateral sequences `a_k..g_k` on a finite window, with
/// `a_k^3 = b_k c_k d_k e_k f_k g_k` at every index.
#[derive(Clone, Debug)]
pub struct SequenceFamily {
    lo: i64,
    rows: Vec<Row>,
}

impl SequenceFamily {
    pub fn tabulated(lo: i64, rows: Vec<Row>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            let cube = r[0].powi(3);
            let prod = mono(&[&r[1], &r[2], &r[3], &r[4], &r[5], &r[6]], &[]);
            let thr = -0.3 * cube.precision() as f64;
            if (&cube - &prod).log2_abs() - cube.log2_abs() > thr {
                return Err(Error::Constraint(format!(
                    "a^3 = bcdefg fails at index {}",
                    lo + i as i64
                )));
            }
        }
        Ok(SequenceFamily { lo, rows })
    }

    /// Row with `g = a^3 / (bcdef)`.
    pub fn resolve_row(
        a: Complex,
        b: Complex,
        c: Complex,
        d: Complex,
        e: Complex,
        f: Complex,
    ) -> Row {
        let g = mono(&[&a, &a, &a], &[&b, &c, &d, &e, &f]);
        [a, b, c, d, e, f, g]
    }

    /// `a w^k, b q^k, .., g v^k` for k in `lo..=hi`.
    pub fn geometric(p: &GeomParams, lo: i64, hi: i64) -> Self {
        let (g, v) = (p.g(), p.v());
        let bases = [&p.w, &p.q, &p.r, &p.s, &p.t, &p.u, &v];
        let starts = [&p.a, &p.b, &p.c, &p.d, &p.e, &p.f, &g];
        let rows = (lo..=hi)
            .map(|k| std::array::from_fn(|i| starts[i] * &bases[i].powi(k)))
            .collect();
        SequenceFamily { lo, rows }
    }

    /// Random rows on `lo..=hi` with every `g_k` inside the parameter range.
    pub fn sample(s: &mut Sampler, lo: i64, hi: i64) -> Result<Self> {
        let mut rows = Vec::new();
        for _ in lo..=hi {
            rows.push(s.redraw("g_k", |s| {
                let [a, b, c, d, e, f] = s.params();
                let row = Self::resolve_row(a, b, c, d, e, f);
                s.in_param_range(&row[6]).then_some(row)
            })?);
        }
        Ok(SequenceFamily { lo, rows })
    }

    /// Inclusive index window.
    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.lo + self.rows.len() as i64 - 1)
    }

    pub fn at(&self, k: i64) -> Result<&Row> {
        usize::try_from(k - self.lo)
            .ok()
            .and_then(|i| self.rows.get(i))
            .ok_or_else(|| {
                Error::InvalidConfig(format!("sequence family has no entry at index {k}"))
            })
    }

    /// The k-th factor `theta(b..g) / theta(a/b..a/g)` of `U_n`.
    pub fn factor<K: Kernel>(&self, t: &K, k: i64) -> Result<Complex> {
        let r = self.at(k)?;
        let mut z = t.one();
        for x in &r[1..] {
            z = &z * &t.th_ratio(x, &(&r[0] / x))?;
        }
        Ok(z)
    }

    /// `U_j` for every j between `lo` and `hi` (and 0).
    pub fn u_values<K: Kernel>(&self, t: &K, lo: i64, hi: i64) -> Result<BTreeMap<i64, Complex>> {
        let mut out = BTreeMap::new();
        out.insert(0, t.one());
        let mut u = t.one();
        for j in 1..=hi.max(0) {
            u = &u * &self.factor(t, j - 1)?;
            out.insert(j, u.clone());
        }
        let mut u = t.one();
        for j in (lo.min(0)..0).rev() {
            let z = self.factor(t, j)?;
            if z.is_zero() {
                return Err(Error::DivisionByZero(j));
            }
            u = &u / &z;
            out.insert(j, u.clone());
        }
        Ok(out)
    }
}

/// Summand of the telescoping sum at one index, given `U_k`.
pub fn indefsum_term<K: Kernel>(t: &K, r: &Row, u: &Complex) -> Result<Complex> {
    let [a, b, c, d, e, f, g] = r;
    let x = mono(&[a, a], &[b, c, d]);
    let ef = e * f;
    let pre = t.quot(
        [&x / f, &x / e, a.clone(), a / &ef],
        [a / e, a / f, &x / &ef, x.clone()],
    )?;
    let br = t.quot(
        [
            mono(&[a], &[c, d]),
            mono(&[a], &[b, d]),
            mono(&[a], &[b, c]),
            e.clone(),
            f.clone(),
            g.clone(),
        ],
        [a / b, a / c, a / d, &x / e, &x / f, &x / g],
    )?;
    Ok(pre * u * (t.one() - br))
}

/// `sum_{k=-m}^{n}` of the telescoping summands against `U_{-m} - U_{n+1}`;
/// for `-m <= n` every partial sum is checked as well.
pub fn verify_indefinite_sum(
    fam: &SequenceFamily,
    m: i64,
    n: i64,
    nome: &Nome,
    ctx: &PrecisionContext,
) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, nome, &reg);
    let u = fam.u_values(&t, (-m).min(n + 1), (-m).max(n + 1))?;
    let (range, negate) = signed_range(-m, n);
    let mut acc = Accum::new(ctx.precision_bits());
    let mut partial = Vec::new();
    for k in range {
        acc.add(&indefsum_term(&t, fam.at(k)?, &u[&k])?);
        partial.push((k, acc.total.clone()));
    }
    let lhs = if negate { -acc.total } else { acc.total };
    let rhs = &u[&-m] - &u[&(n + 1)];
    let mut rep = ResidualReport::new(lhs, rhs, acc.max_log2);
    if !negate {
        let pairs = partial
            .into_iter()
            .map(|(j, s)| (s, &u[&-m] - &u[&(j + 1)], acc.max_log2));
        rep = rep.check_all("partial sums telescope", pairs);
    }
    Ok(rep.with_regularity(reg.worst_log2()))
}

/// Rows `(a_k, b_k, c_k, d_k)` for k = 0..=n of the four-sequence sum.
#[derive(Clone, Debug)]
pub struct SumfParams {
    pub rows: Vec<[Complex; 4]>,
    pub nome: Nome,
}

impl SumfParams {
    pub fn sample(s: &mut Sampler, ctx: &PrecisionContext, n: u32) -> Result<Self> {
        let nome = s.nome(ctx)?;
        let rows = (0..=n).map(|_| s.params()).collect();
        Ok(SumfParams { rows, nome })
    }

    /// The same sum as a seven-sequence family with `a_k = c_k d_k`:
    /// `(A, B, split, A/split, C, D, A^2/BCD)`.
    pub fn as_family(&self, splits: &[Complex]) -> Result<SequenceFamily> {
        let rows = self
            .rows
            .iter()
            .zip(splits)
            .map(|([a, b, c, d], x)| {
                SequenceFamily::resolve_row(
                    a.clone(),
                    b.clone(),
                    x.clone(),
                    a / x,
                    c.clone(),
                    d.clone(),
                )
            })
            .collect();
        SequenceFamily::tabulated(0, rows)
    }
}

/// `theta(b, c, d, a^2/bcd) / theta(a/b, a/c, a/d, bcd/a)`.
pub fn sumf_factor<K: Kernel>(t: &K, r: &[Complex; 4]) -> Result<Complex> {
    let [a, b, c, d] = r;
    let bcd = b * c * d;
    t.quot(
        [b.clone(), c.clone(), d.clone(), mono(&[a, a], &[&bcd])],
        [a / b, a / c, a / d, &bcd / a],
    )
}

/// `theta(a, a/bc, a/bd, a/cd) / theta(a/bcd, a/d, a/c, a/b)`.
pub fn sumf_weight<K: Kernel>(t: &K, r: &[Complex; 4]) -> Result<Complex> {
    let [a, b, c, d] = r;
    t.quot(
        [
            a.clone(),
            mono(&[a], &[b, c]),
            mono(&[a], &[b, d]),
            mono(&[a], &[c, d]),
        ],
        [mono(&[a], &[b, c, d]), a / d, a / c, a / b],
    )
}

/// Sum, `1 - prod`, and the largest summand (log2).
pub fn sumf_sides<K: Kernel>(t: &K, rows: &[[Complex; 4]]) -> Result<(Complex, Complex, f64)> {
    let mut acc = Accum::new(t.prec());
    let mut prod = t.one();
    for r in rows {
        acc.add(&(sumf_weight(t, r)? * &prod));
        prod = prod * sumf_factor(t, r)?;
    }
    Ok((acc.total, t.one() - prod, acc.max_log2))
}

pub fn verify_sumf(p: &SumfParams, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &p.nome, &reg);
    let (lhs, rhs, scale) = sumf_sides(&t, &p.rows)?;
    Ok(ResidualReport::new(lhs, rhs, scale).with_regularity(reg.worst_log2()))
}

/// Geometric family `a w^k, b q^k, ..` with `g = a^3/bcdef` and
/// `v = w^3/qrstu`.
#[derive(Clone, Debug)]
pub struct GeomParams {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
    pub e: Complex,
    pub f: Complex,
    pub q: Complex,
    pub r: Complex,
    pub s: Complex,
    pub t: Complex,
    pub u: Complex,
    pub w: Complex,
    pub nome: Nome,
}

impl GeomParams {
    pub fn g(&self) -> Complex {
        mono(
            &[&self.a, &self.a, &self.a],
            &[&self.b, &self.c, &self.d, &self.e, &self.f],
        )
    }

    /// The same parameters carried at `ctx`'s precision, with a zero nome.
    pub fn with_precision(&self, ctx: &PrecisionContext) -> Self {
        let b = ctx.precision_bits();
        GeomParams {
            a: self.a.with_precision(b),
            b: self.b.with_precision(b),
            c: self.c.with_precision(b),
            d: self.d.with_precision(b),
            e: self.e.with_precision(b),
            f: self.f.with_precision(b),
            q: self.q.with_precision(b),
            r: self.r.with_precision(b),
            s: self.s.with_precision(b),
            t: self.t.with_precision(b),
            u: self.u.with_precision(b),
            w: self.w.with_precision(b),
            nome: Nome::zero(ctx),
        }
    }

    pub fn v(&self) -> Complex {
        mono(
            &[&self.w, &self.w, &self.w],
            &[&self.q, &self.r, &self.s, &self.t, &self.u],
        )
    }

    /// `(b, q), (c, r), .., (g, v)`.
    pub fn pairs(&self) -> [(Complex, Complex); 6] {
        [
            (self.b.clone(), self.q.clone()),
            (self.c.clone(), self.r.clone()),
            (self.d.clone(), self.s.clone()),
            (self.e.clone(), self.t.clone()),
            (self.f.clone(), self.u.clone()),
            (self.g(), self.v()),
        ]
    }

    /// Whether q, r, s, t, u, v differ pairwise by more than 1e-6 relative.
    pub fn bases_distinct(&self) -> bool {
        pairwise_distinct(&self.pairs().map(|(_, x)| x))
    }

    pub fn sample(s: &mut Sampler, ctx: &PrecisionContext) -> Result<Self> {
        let nome = s.nome(ctx)?;
        s.redraw("g and v", |s| {
            let [a, b, c, d, e, f, q, r, s_, t, u, w] = s.params();
            let gp = GeomParams {
                a,
                b,
                c,
                d,
                e,
                f,
                q,
                r,
                s: s_,
                t,
                u,
                w,
                nome: nome.clone(),
            };
            (s.in_param_range(&gp.g()) && s.in_param_range(&gp.v())).then_some(gp)
        })
    }

    /// p = 0 parameters with all twelve base magnitudes `|x|`, `|w/x|` in
    /// the bilateral range; w is a cube root of `qrstuv`.
    pub fn sample_bilateral(s: &mut Sampler, ctx: &PrecisionContext) -> Result<Self> {
        let (lo, hi) = s.domain().bilateral_base;
        let inside = |x: &Complex| (lo..=hi).contains(&x.abs_f64());
        let [q, r, s_, t, u, w] = s.redraw("the bilateral bases", |s| {
            let bases: [Complex; 6] = std::array::from_fn(|_| s.polar(lo, hi));
            let prod = mono(&bases.iter().collect::<Vec<_>>(), &[]);
            let branch = s.index(3);
            let w = cube_root(&prod, branch);
            if !bases.iter().all(|x| inside(&(&w / x))) {
                return None;
            }
            let [q, r, s_, t, u, _] = bases;
            Some([q, r, s_, t, u, w])
        })?;
        let nome = Nome::zero(ctx);
        s.redraw("g", |s| {
            let [a, b, c, d, e, f] = s.params();
            let gp = GeomParams {
                a,
                b,
                c,
                d,
                e,
                f,
                q: q.clone(),
                r: r.clone(),
                s: s_.clone(),
                t: t.clone(),
                u: u.clone(),
                w: w.clone(),
                nome: nome.clone(),
            };
            s.in_param_range(&gp.g()).then_some(gp)
        })
    }
}

/// Cube root of x on one of its three branches, by Newton iteration from
/// a double-precision start.
fn cube_root(x: &Complex, branch: usize) -> Complex {
    let (re, im) = x.to_f64();
    let mag = re.hypot(im).cbrt();
    let phase = (im.atan2(re) + std::f64::consts::TAU * branch as f64) / 3.0;
    let prec = x.precision();
    let three = Complex::from_i64(3, prec);
    let mut w = Complex::from_polar_f64(mag, phase, prec);
    let steps = (prec as f64 / 50.0).log2().ceil().max(0.0) as usize + 2;
    for _ in 0..steps {
        w = (w.scale(2) + x / &(&w * &w)) / &three;
    }
    w
}

/// `prod (x;B)_k / (a/x; w/B)_k` over the six (x, B) pairs.
pub fn u_tilde<K: Kernel>(t: &K, gp: &GeomParams, k: i64) -> Result<Complex> {
    let pairs = gp.pairs();
    let num: Vec<_> = pairs.iter().map(|(x, b)| (x.clone(), b.clone())).collect();
    let den: Vec<_> = pairs.iter().map(|(x, b)| (&gp.a / x, &gp.w / b)).collect();
    t.fac_quot(num, den, k)
}

/// `U~_{k+1} / U~_k`.
fn u_tilde_step<K: Kernel>(t: &K, gp: &GeomParams, k: i64) -> Result<Complex> {
    let mut num = Vec::new();
    let mut den = Vec::new();
    for (x, b) in gp.pairs() {
        num.push(&x * &b.powi(k));
        den.push(&gp.a / &x * (&gp.w / &b).powi(k));
    }
    t.quot(num, den)
}

/// Geometric powers appearing in the six-base summand at index k.
struct Powers {
    w: Complex,
    t: Complex,
    u: Complex,
    v: Complex,
    w_q: Complex,
    w_r: Complex,
    w_s: Complex,
    w_t: Complex,
    w_u: Complex,
    w_v: Complex,
}

impl Powers {
    fn new(gp: &GeomParams, k: i64) -> Self {
        let w = &gp.w;
        Powers {
            w: w.powi(k),
            t: gp.t.powi(k),
            u: gp.u.powi(k),
            v: gp.v().powi(k),
            w_q: (w / &gp.q).powi(k),
            w_r: (w / &gp.r).powi(k),
            w_s: (w / &gp.s).powi(k),
            w_t: (w / &gp.t).powi(k),
            w_u: (w / &gp.u).powi(k),
            w_v: (w / &gp.v()).powi(k),
        }
    }
}

/// Arguments shared by the six-base weight and bracket.
fn six_base_args(gp: &GeomParams, p: &Powers) -> [Complex; 6] {
    let (a, e, f, g) = (&gp.a, &gp.e, &gp.f, &gp.g());
    // (uv/w)^k = u^k v^k / w^k, etc.
    let fg_a = mono(&[f, g, &p.u, &p.v], &[a, &p.w]);
    let eg_a = mono(&[e, g, &p.t, &p.v], &[a, &p.w]);
    let ef_a = mono(&[e, f, &p.t, &p.u], &[a, &p.w]);
    let a_we = mono(&[a, &p.w_t], &[e]);
    let a_wf = mono(&[a, &p.w_u], &[f]);
    let a_wg = mono(&[a, &p.w_v], &[g]);
    [fg_a, eg_a, ef_a, a_we, a_wf, a_wg]
}

/// `theta(aw^k, a(w/tu)^k/ef, fg(uv/w)^k/a, eg(tv/w)^k/a)` over
/// `theta(g(v/w)^k/a, efg(tuv/w)^k/a, a(w/u)^k/f, a(w/t)^k/e)`.
fn indm_weight<K: Kernel>(t: &K, gp: &GeomParams, p: &Powers) -> Result<Complex> {
    let (a, e, f, g) = (&gp.a, &gp.e, &gp.f, &gp.g());
    let [fg_a, eg_a, _, a_we, a_wf, a_wg] = six_base_args(gp, p);
    let a_wtu = mono(&[a, &p.w_t, &p.w_u], &[e, f, &p.w]);
    let efg_a = mono(&[e, f, g, &p.t, &p.u, &p.v], &[a, &p.w]);
    t.quot(
        [a * &p.w, a_wtu, fg_a, eg_a],
        [a_wg.recip(), efg_a, a_wf, a_we],
    )
}

/// Theta quotient `Q` of the six-base summand's `1 - Q` bracket.
fn indm_quotient<K: Kernel>(t: &K, gp: &GeomParams, p: &Powers) -> Result<Complex> {
    let (a, b, c, d, e, f, g) = (&gp.a, &gp.b, &gp.c, &gp.d, &gp.e, &gp.f, &gp.g());
    let [fg_a, eg_a, ef_a, _, _, _] = six_base_args(gp, p);
    let num = [
        mono(&[a, &p.w_r, &p.w_s], &[c, d, &p.w]),
        mono(&[a, &p.w_q, &p.w_s], &[b, d, &p.w]),
        mono(&[a, &p.w_q, &p.w_r], &[b, c, &p.w]),
        e * &p.t,
        f * &p.u,
        g * &p.v,
    ];
    let den = [
        mono(&[a, &p.w_q], &[b]),
        mono(&[a, &p.w_r], &[c]),
        mono(&[a, &p.w_s], &[d]),
        fg_a,
        eg_a,
        ef_a,
    ];
    t.quot(num, den)
}

/// `1 - theta(..)/theta(..)` bracket of the six-base summand.
fn indm_bracket<K: Kernel>(t: &K, gp: &GeomParams, p: &Powers) -> Result<Complex> {
    Ok(t.one() - indm_quotient(t, gp, p)?)
}

/// Six-base summand at index k.
pub fn indm_term<K: Kernel>(t: &K, gp: &GeomParams, k: i64) -> Result<Complex> {
    let p = Powers::new(gp, k);
    Ok(indm_weight(t, gp, &p)? * u_tilde(t, gp, k)? * indm_bracket(t, gp, &p)?)
}

/// `prod (xw/aB; w/B)_m / (B/x; B)_m`.
pub fn indm_lower_product<K: Kernel>(t: &K, gp: &GeomParams, m: i64) -> Result<Complex> {
    let pairs = gp.pairs();
    let num: Vec<_> = pairs
        .iter()
        .map(|(x, b)| (mono(&[x, &gp.w], &[&gp.a, b]), &gp.w / b))
        .collect();
    let den: Vec<_> = pairs.iter().map(|(x, b)| (b / x, b.clone())).collect();
    t.fac_quot(num, den, m)
}

pub fn verify_indm(
    gp: &GeomParams,
    m: i64,
    n: i64,
    ctx: &PrecisionContext,
) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &gp.nome, &reg);
    let (range, negate) = signed_range(-m, n);
    let mut acc = Accum::new(ctx.precision_bits());
    for k in range {
        acc.add(&indm_term(&t, gp, k)?);
    }
    let lhs = if negate { -acc.total } else { acc.total };
    let lower = indm_lower_product(&t, gp, m)?;
    let rhs = &lower - &u_tilde(&t, gp, n + 1)?;
    let rep = ResidualReport::new(lhs, rhs, acc.max_log2)
        .check(
            "lower product equals U~ at -m",
            &lower,
            &u_tilde(&t, gp, -m)?,
            0.0,
        )
        .check_flag(
            "six bases pairwise distinct",
            gp.bases_distinct(),
            ctx.precision_bits(),
        );
    Ok(rep.with_regularity(reg.worst_log2()))
}

/// `theta(a/e, a/f, g/a, efg/a) / theta(eg/a, fg/a, a, a/ef)`.
fn m0_factor<K: Kernel>(t: &K, gp: &GeomParams) -> Result<Complex> {
    let (a, e, f, g) = (&gp.a, &gp.e, &gp.f, &gp.g());
    t.quot(
        [a / e, a / f, g / a, mono(&[e, f, g], &[a])],
        [
            mono(&[e, g], &[a]),
            mono(&[f, g], &[a]),
            a.clone(),
            mono(&[a], &[e, f]),
        ],
    )
}

/// Both sides of the patching identity at index k.
fn patching_sides<K: Kernel>(t: &K, gp: &GeomParams, k: i64) -> Result<(Complex, Complex)> {
    let (a, e, f, g, w) = (&gp.a, &gp.e, &gp.f, &gp.g(), &gp.w);
    let (tt, u, v) = (&gp.t, &gp.u, &gp.v());
    let (w_t, w_u, w_v) = (w / tt, w / u, w / v);
    let lhs = t.ths([
        a * &w_t.powi(k) / e,
        a * &w_u.powi(k) / f,
        g / a * w_v.powi(-k),
    ])? * t.fac_quot(
        [(a / e, &w_t), (a / f, &w_u), (a / g, &w_v)],
        Vec::<(Complex, &Complex)>::new(),
        k,
    )?;
    let rhs = t.ths([a / e, a / f, g / a])?
        * t.fac_quot(
            [
                (mono(&[a, w], &[e, tt]), &w_t),
                (mono(&[a, w], &[f, u]), &w_u),
                (mono(&[a, w], &[g, v]), &w_v),
            ],
            Vec::<(Complex, &Complex)>::new(),
            k,
        )?
        * w_v.powi(-k);
    Ok((lhs, rhs))
}

/// Summand of the patched m = 0 form.
pub fn m0_term<K: Kernel>(t: &K, gp: &GeomParams, k: i64) -> Result<Complex> {
    let p = Powers::new(gp, k);
    let (a, b, c, d, e, f, g, w) = (&gp.a, &gp.b, &gp.c, &gp.d, &gp.e, &gp.f, &gp.g(), &gp.w);
    let (q, r, s, tt, u, v) = (&gp.q, &gp.r, &gp.s, &gp.t, &gp.u, &gp.v());
    let [fg_a, eg_a, _, _, _, _] = six_base_args(gp, &p);
    let efg = mono(&[e, f, g], &[a]);
    let weight = t.quot(
        [
            a * &p.w,
            mono(&[a, &p.w_t, &p.w_u], &[e, f, &p.w]),
            fg_a,
            eg_a,
            efg.clone(),
        ],
        [
            a.clone(),
            mono(&[a], &[e, f]),
            mono(&[f, g], &[a]),
            mono(&[e, g], &[a]),
            mono(&[&efg, &p.t, &p.u, &p.v], &[&p.w]),
        ],
    )?;
    let facs = t.fac_quot(
        [
            (b.clone(), q.clone()),
            (c.clone(), r.clone()),
            (d.clone(), s.clone()),
            (e.clone(), tt.clone()),
            (f.clone(), u.clone()),
            (g.clone(), v.clone()),
        ],
        [
            (a / b, w / q),
            (a / c, w / r),
            (a / d, w / s),
            (mono(&[a, w], &[e, tt]), w / tt),
            (mono(&[a, w], &[f, u]), w / u),
            (mono(&[a, w], &[g, v]), w / v),
        ],
        k,
    )?;
    Ok(weight * facs * &p.w_v * indm_bracket(t, gp, &p)?)
}

pub fn verify_m0(gp: &GeomParams, n: i64, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &gp.nome, &reg);
    let factor = m0_factor(&t, gp)?;
    let mut acc = Accum::new(ctx.precision_bits());
    let mut termwise = Vec::new();
    let mut patch = Vec::new();
    for k in 0..=n {
        let term = m0_term(&t, gp, k)?;
        acc.add(&term);
        termwise.push((term, &factor * &indm_term(&t, gp, k)?, 0.0));
        let (l, r) = patching_sides(&t, gp, k)?;
        patch.push((l, r, 0.0));
    }
    let rhs = &factor * &(t.one() - u_tilde(&t, gp, n + 1)?);
    let rep = ResidualReport::new(acc.total, rhs, acc.max_log2)
        .check_all("patching identity", patch)
        .check_all("termwise equal to the unpatched summand", termwise)
        .check_flag(
            "six bases pairwise distinct",
            gp.bases_distinct(),
            ctx.precision_bits(),
        );
    Ok(rep.with_regularity(reg.worst_log2()))
}

/// Terms of the bilateral p = 0 sum on each side of k = 0, in order of
/// increasing |k|.
#[derive(Clone, Debug)]
pub struct BilateralTerms {
    pub forward: Vec<Complex>,
    pub backward: Vec<Complex>,
    /// log2 of the largest term
    pub scale: f64,
    /// a side ran into rounding noise while its terms still mattered
    pub noisy: bool,
}

impl BilateralTerms {
    /// Sum of the first `len` terms on each side.
    pub fn partial(&self, len: usize) -> Complex {
        let prec = self.forward[0].precision();
        let mut s = Complex::zero(prec);
        for x in self
            .forward
            .iter()
            .take(len)
            .chain(self.backward.iter().take(len))
        {
            s = &s + x;
        }
        s
    }

    pub fn depth(&self) -> usize {
        self.forward.len().max(self.backward.len())
    }
}

struct Side {
    terms: Vec<Complex>,
    scale: f64,
    noisy: bool,
}

/// One side of the bilateral sum. It ends after `TAIL_RUN` terms that are
/// either below `2^cutoff_log2` times the largest term or lost in the
/// rounding noise of their bracket; noise is only harmless below half the
/// cutoff.
fn bilateral_side<K: Kernel>(
    t: &K,
    gp: &GeomParams,
    forward: bool,
    cutoff_log2: f64,
) -> Result<Side> {
    let mut terms = Vec::new();
    let mut u = t.one();
    let mut scale = f64::NEG_INFINITY;
    let mut small = 0;
    let mut noisy = false;
    for i in 0..MAX_BILATERAL_TERMS as i64 {
        let k = if forward { i } else { -1 - i };
        if !forward {
            let z = u_tilde_step(t, gp, k)?;
            if z.is_zero() {
                return Err(Error::DivisionByZero(k));
            }
            u = &u / &z;
        }
        let p = Powers::new(gp, k);
        let outer = indm_weight(t, gp, &p)? * &u;
        let quot = indm_quotient(t, gp, &p)?;
        let term = &outer * &(t.one() - &quot);
        let lt = term.log2_abs();
        // `1 - quot` cannot resolve anything below |quot| 2^-prec, and the
        // k-th powers inside quot amplify their bases' rounding |k|-fold
        let floor = outer.log2_abs() + quot.log2_abs().max(0.0) - t.prec() as f64
            + ((k.unsigned_abs() + 1) as f64).log2();
        scale = scale.max(lt);
        let negligible = lt < scale + cutoff_log2;
        if negligible || lt < floor + NOISE_MARGIN_BITS {
            if small == 0 {
                noisy = false;
            }
            noisy |= !negligible && lt >= scale + cutoff_log2 / 2.0;
            small += 1;
        } else {
            small = 0;
        }
        terms.push(term);
        if small >= TAIL_RUN {
            return Ok(Side {
                terms,
                scale,
                noisy,
            });
        }
        if forward {
            u = &u * &u_tilde_step(t, gp, k)?;
        }
    }
    Err(Error::Domain(
        "bilateral sum did not reach the truncation cutoff".into(),
    ))
}

/// Terms of the bilateral sum on both sides, truncated relative to the
/// largest term at `2^cutoff_log2`.
pub fn bilateral_terms<K: Kernel>(
    t: &K,
    gp: &GeomParams,
    cutoff_log2: f64,
) -> Result<BilateralTerms> {
    let bases = gp.pairs().map(|(_, b)| b);
    if bases
        .iter()
        .any(|b| b.log2_abs() >= 0.0 || (&gp.w / b).log2_abs() >= 0.0)
    {
        return Err(Error::Domain(
            "bilateral sum needs |B| < 1 and |w/B| < 1 for all six bases".into(),
        ));
    }
    let f = bilateral_side(t, gp, true, cutoff_log2)?;
    let b = bilateral_side(t, gp, false, cutoff_log2)?;
    Ok(BilateralTerms {
        scale: f.scale.max(b.scale),
        noisy: f.noisy || b.noisy,
        forward: f.terms,
        backward: b.terms,
    })
}

/// Closed form: difference of two products of infinite p = 0 factorials.
pub fn bilateral_rhs(gp: &GeomParams, ctx: &PrecisionContext) -> Complex {
    let inf = |x: &Complex, b: &Complex| infinite_product_raw(x, b, b.log2_abs(), ctx);
    let mut first = Complex::one(ctx.precision_bits());
    let mut second = first.clone();
    for (x, b) in gp.pairs() {
        let wb = &gp.w / &b;
        first = first * inf(&mono(&[&x, &gp.w], &[&gp.a, &b]), &wb) / inf(&(&b / &x), &b);
        second = second * inf(&x, &b) / inf(&(&gp.a / &x), &wb);
    }
    first - second
}

pub fn verify_bilateral_p0(gp: &GeomParams, ctx: &PrecisionContext) -> Result<ResidualReport> {
    if !gp.nome.is_zero() {
        return Err(Error::Domain(
            "the bilateral six-base sum is a p = 0 identity".into(),
        ));
    }
    // brackets that cancel below the working precision are redone with
    // doubled precision; the truncation stays relative to `ctx`
    let cut = ctx.product_cutoff_log2();
    let mut bits = ctx.precision_bits();
    let (terms, worst_divisor) = loop {
        let hi = PrecisionContext::with_bits(bits)?;
        let gp_hi = gp.with_precision(&hi);
        let reg = Regularity::new();
        let t = Terms::new(&hi, &gp_hi.nome, &reg);
        let terms = bilateral_terms(&t, &gp_hi, cut)?;
        if !terms.noisy || bits >= MAX_BILATERAL_BITS {
            break (terms, reg.worst_log2());
        }
        bits *= 2;
    };
    let rhs = bilateral_rhs(gp, ctx);
    let full = terms.partial(terms.depth());
    let half = terms.partial(terms.depth() / 2);
    let (_, half_log2) = scaled_residual(&half, &rhs, terms.scale);
    let rep = ResidualReport::new(full, rhs, terms.scale);
    let shrinks = rep.residual_log2 < half_log2;
    Ok(rep
        .check_flag(
            "doubling the truncation depth shrinks the residual",
            shrinks,
            ctx.precision_bits(),
        )
        .check_flag(
            "terms resolved above rounding noise",
            !terms.noisy,
            ctx.precision_bits(),
        )
        .with_regularity(worst_divisor))
}

/// Family deviating from `b_k = .. = f_k = a_k^(1/2)` only for |k| < K,
/// stored on `[-K, K]`; the two outer rows are undeviated.
pub fn sample_compact_family(s: &mut Sampler, window: i64) -> Result<SequenceFamily> {
    let mut rows = Vec::new();
    for k in -window..=window {
        if k.abs() < window {
            rows.extend(SequenceFamily::sample(s, 0, 0)?.rows);
        } else {
            rows.push(undeviated_row(s.param()));
        }
    }
    SequenceFamily::tabulated(-window, rows)
}

/// `(a, a^(1/2), .., a^(1/2), a^3 / a^(5/2))`, principal branch.
pub fn undeviated_row(a: Complex) -> Row {
    let h = a.sqrt();
    SequenceFamily::resolve_row(a, h.clone(), h.clone(), h.clone(), h.clone(), h)
}

/// Bilateral theta sum for a family stored on `[-K, K]` that is undeviated
/// outside `|k| < K`. There `z_k = 1` and `theta(a_k/e_k f_k) = 0`, so the
/// sum over all integers is the sum over `|k| < K` and both infinite
/// products are finite.
pub fn verify_bilateral_theta(
    fam: &SequenceFamily,
    nome: &Nome,
    ctx: &PrecisionContext,
) -> Result<ResidualReport> {
    let (lo, hi) = fam.window();
    if lo != -hi {
        return Err(Error::InvalidConfig(format!(
            "compact family must sit on [-K, K], got [{lo}, {hi}]"
        )));
    }
    let reg = Regularity::new();
    let t = Terms::new(ctx, nome, &reg);
    let u = fam.u_values(&t, lo, hi + 1)?;
    let mut acc = Accum::new(ctx.precision_bits());
    for k in lo + 1..hi {
        acc.add(&indefsum_term(&t, fam.at(k)?, &u[&k])?);
    }
    let rhs = &u[&lo] - &u[&(hi + 1)];
    let mut rep = ResidualReport::new(acc.total, rhs, acc.max_log2);
    let one = t.one();
    let mut z_pairs = Vec::new();
    for k in [lo, hi] {
        let [a, _, _, _, e, f, _] = fam.at(k)?;
        z_pairs.push((fam.factor(&t, k)?, one.clone(), 0.0));
        let vanishes = t.th(&mono(&[a], &[e, f]))?.is_zero();
        rep = rep.check_flag(
            &format!("summand vanishes at k = {k}"),
            vanishes,
            ctx.precision_bits(),
        );
    }
    Ok(rep
        .check_all("z_k = 1 outside the window", z_pairs)
        .with_regularity(reg.worst_log2()))
}

pub(super) fn trial(
    id: IdentityId,
    s: &mut Sampler,
    ctx: &PrecisionContext,
    o: Orders,
) -> Result<ResidualReport> {
    match id {
        IdentityId::Indefsum => {
            let nome = s.nome(ctx)?;
            let (m, n) = (o.m, o.n);
            let fam = SequenceFamily::sample(s, (-m).min(0).min(n + 1), (n + 1).max(0).max(-m))?;
            verify_indefinite_sum(&fam, m, n, &nome, ctx)
        }
        IdentityId::Sumf => {
            let p = SumfParams::sample(s, ctx, super::order_u32(o.n, "n")?)?;
            let splits: Vec<Complex> = (0..p.rows.len()).map(|_| s.param()).collect();
            let rep = verify_sumf(&p, ctx)?;
            let fam = p.as_family(&splits)?;
            let reg = Regularity::new();
            let t = Terms::new(ctx, &p.nome, &reg);
            let u = fam.u_values(&t, 0, o.n)?;
            let mut acc = Accum::new(ctx.precision_bits());
            for k in 0..=o.n {
                acc.add(&indefsum_term(&t, fam.at(k)?, &u[&k])?);
            }
            let scale = rep.scale_log2;
            let lhs = rep.lhs.clone();
            Ok(rep
                .check(
                    "equals the telescoping sum with a_k = c_k d_k",
                    &lhs,
                    &acc.total,
                    scale,
                )
                .with_regularity(reg.worst_log2()))
        }
        IdentityId::Indm => verify_indm(&GeomParams::sample(s, ctx)?, o.m, o.n, ctx),
        IdentityId::M0 => verify_m0(&GeomParams::sample(s, ctx)?, o.n, ctx),
        IdentityId::Indmrat => verify_bilateral_p0(&GeomParams::sample_bilateral(s, ctx)?, ctx),
        IdentityId::BilateralTheta => {
            let nome = s.nome(ctx)?;
            let fam = sample_compact_family(s, o.n)?;
            verify_bilateral_theta(&fam, &nome, ctx)
        }
        _ => Err(Error::UnknownIdentity(id.key().into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Domain;

    fn sampler(stream: u64) -> Sampler {
        Sampler::new(11, stream, 256, Domain::default())
    }

    #[test]
    fn reversed_range_convention() {
        assert_eq!(signed_range(-2, 3), (-2..=3, false));
        assert!(signed_range(2, 1).0.is_empty());
        assert_eq!(signed_range(3, -2), (-1..=2, true));
    }

    #[test]
    fn telescoping_on_random_window() {
        let ctx = PrecisionContext::default();
        let mut s = sampler(1);
        let nome = s.nome(&ctx).unwrap();
        let fam = SequenceFamily::sample(&mut s, -3, 6).unwrap();
        for (m, n) in [(0, 0), (3, 5), (-2, 4), (2, -3)] {
            let r = verify_indefinite_sum(&fam, m, n, &nome, &ctx).unwrap();
            assert!(r.all_pass(), "m={m} n={n}: {}", r.residual_log2);
        }
    }

    #[test]
    fn family_constraint_is_checked() {
        let mut row = SequenceFamily::resolve_row(
            Complex::from_f64(0.9, 0.1, 128),
            Complex::from_f64(1.1, 0.0, 128),
            Complex::from_f64(0.7, 0.3, 128),
            Complex::from_f64(0.8, -0.2, 128),
            Complex::from_f64(1.2, 0.4, 128),
            Complex::from_f64(0.5, 0.5, 128),
        );
        assert!(SequenceFamily::tabulated(0, vec![row.clone()]).is_ok());
        row[6] = Complex::one(128);
        assert!(matches!(
            SequenceFamily::tabulated(0, vec![row]),
            Err(Error::Constraint(_))
        ));
    }

    #[test]
    fn four_sequence_sum_and_its_family_form() {
        let ctx = PrecisionContext::default();
        for n in [0, 4] {
            let r = IdentityId::Sumf
                .trial(&mut sampler(2 + n), &ctx, Orders::n(n as i64))
                .unwrap();
            assert!(r.all_pass(), "{:?}", r.checks);
        }
    }

    #[test]
    fn six_base_sum() {
        let ctx = PrecisionContext::default();
        let gp = GeomParams::sample(&mut sampler(5), &ctx).unwrap();
        // empty sum: both products are 1
        let r = verify_indm(&gp, 0, -1, &ctx).unwrap();
        assert!(r.lhs.is_zero() && r.all_pass());
        for (m, n) in [(0, 0), (2, 4), (-1, 2), (1, -2)] {
            let r = verify_indm(&gp, m, n, &ctx).unwrap();
            assert!(
                r.all_pass(),
                "m={m} n={n}: {} {:?}",
                r.residual_log2,
                r.checks
            );
        }
    }

    #[test]
    fn six_base_sum_matches_general_family() {
        let ctx = PrecisionContext::default();
        let gp = GeomParams::sample(&mut sampler(6), &ctx).unwrap();
        let fam = SequenceFamily::geometric(&gp, -2, 4);
        let reg = Regularity::new();
        let t = Terms::new(&ctx, &gp.nome, &reg);
        let u = fam.u_values(&t, -2, 4).unwrap();
        for k in -2..=3 {
            let a = indefsum_term(&t, fam.at(k).unwrap(), &u[&k]).unwrap();
            let b = indm_term(&t, &gp, k).unwrap();
            assert!((&a - &b).log2_abs() - b.log2_abs() < -200.0, "k={k}");
        }
    }

    #[test]
    fn patched_form() {
        let ctx = PrecisionContext::default();
        for n in 0..4 {
            let gp = GeomParams::sample(&mut sampler(20 + n), &ctx).unwrap();
            let r = verify_m0(&gp, n as i64, &ctx).unwrap();
            assert!(r.all_pass(), "n={n}: {} {:?}", r.residual_log2, r.checks);
        }
    }

    #[test]
    fn bilateral_p0() {
        let ctx = PrecisionContext::default();
        let gp = GeomParams::sample_bilateral(&mut sampler(30), &ctx).unwrap();
        let v = gp.v();
        for b in [&gp.q, &gp.r, &gp.s, &gp.t, &gp.u, &v] {
            for x in [b.clone(), &gp.w / b] {
                assert!((0.2 - 1e-9..=0.85 + 1e-9).contains(&x.abs_f64()));
            }
        }
        let r = verify_bilateral_p0(&gp, &ctx).unwrap();
        assert!(
            r.all_pass() && r.residual_log2 < -200.0,
            "{}",
            r.residual_log2
        );
    }

    #[test]
    fn cube_root_branches() {
        let x = Complex::from_f64(-0.3, 0.7, 256);
        for b in 0..3 {
            let w = cube_root(&x, b);
            assert!((&w.powi(3) - &x).log2_abs() < -250.0);
        }
    }

    #[test]
    fn compact_bilateral_theta() {
        let ctx = PrecisionContext::default();
        let mut s = sampler(40);
        let nome = s.nome(&ctx).unwrap();
        let fam = sample_compact_family(&mut s, 0).unwrap();
        let r = verify_bilateral_theta(&fam, &nome, &ctx).unwrap();
        assert!(r.lhs.is_zero() && r.rhs.is_zero() && r.all_pass());
        for k in 1..=3 {
            let fam = sample_compact_family(&mut s, k).unwrap();
            let r = verify_bilateral_theta(&fam, &nome, &ctx).unwrap();
            assert!(r.all_pass(), "K={k}: {} {:?}", r.residual_log2, r.checks);
        }
    }
}
