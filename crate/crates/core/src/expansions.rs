//! Inverse pair of triangular matrices and the multibasic expansion
//! formulas for finitely supported coefficient sequences.

use crate::basic::PlainKernel;
use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::identities::{order_u32, IdentityId, Orders, ResidualReport};
use crate::precision::PrecisionContext;
use crate::sampling::Sampler;
use crate::terms::{mono, Accum, Kernel, Regularity, Terms};
use crate::theta::Nome;

fn binom2(k: i64) -> i64 {
    k * (k - 1) / 2
}

fn sign(t: &impl Kernel, k: i64) -> Complex {
    if k.rem_euclid(2) == 0 {
        t.one()
    } else {
        -t.one()
    }
}

/// Lower triangular matrices `A = (a_nj)` and `B = (b_jm)`, row n holding
/// columns `0..=n`.
#[derive(Clone, Debug)]
pub struct TriangularPair {
    pub size: usize,
    pub a_rows: Vec<Vec<Complex>>,
    pub b_rows: Vec<Vec<Complex>>,
}

impl TriangularPair {
    /// Entry (n, j), zero above the diagonal.
    pub fn a(&self, n: usize, j: usize) -> Option<&Complex> {
        self.a_rows.get(n).and_then(|r| r.get(j))
    }

    pub fn b(&self, j: usize, m: usize) -> Option<&Complex> {
        self.b_rows.get(j).and_then(|r| r.get(m))
    }
}

#[derive(Clone, Debug)]
pub struct PairParams {
    pub a: Complex,
    pub b: Complex,
    pub r: Complex,
    pub q: Complex,
    pub nome: Nome,
}

impl PairParams {
    pub fn sample(s: &mut Sampler, ctx: &PrecisionContext) -> Result<Self> {
        let nome = s.nome(ctx)?;
        let [a, b, r, q] = s.params();
        Ok(PairParams { a, b, r, q, nome })
    }
}

pub fn pair_a_entry<K: Kernel>(t: &K, p: &PairParams, n: i64, j: i64) -> Result<Complex> {
    let (a, b, r, q) = (&p.a, &p.b, &p.r, &p.q);
    let (qj, qn) = (q.powi(j), q.powi(n));
    let rj = r.powi(j);
    let arq = a * r * &qn;
    let brq = mono(&[b, r], &[&qn]);
    let num = t.ths([a * &rj * &qj, mono(&[b, &rj], &[&qj])])? * t.facs([&arq, &brq], r, n - 1)?;
    let den = t.facs_inv([&arq, &brq], r, j)?
        * t.fac_inv(q, q, n - j)?
        * t.fac_inv(&mono(&[b, q], &[a, &qn, &qn]), q, n - j)?;
    Ok(sign(t, n + j) * num * den)
}

pub fn pair_b_entry<K: Kernel>(t: &K, p: &PairParams, j: i64, m: i64) -> Result<Complex> {
    let (a, b, r, q) = (&p.a, &p.b, &p.r, &p.q);
    let (qm, rm) = (q.powi(m), r.powi(m));
    let d = j - m;
    let q12m = q * &qm * &qm;
    let facs = t.facs([a * &rm * &qm, mono(&[b, &rm], &[&qm])], r, d)?
        * t.facs_inv([q.clone(), mono(&[a, &q12m], &[b])], q, d)?;
    let z = -mono(&[a, &q12m], &[b]);
    Ok(facs * z.powi(d) * q.powi(2 * binom2(d)))
}

pub fn build_pair<K: Kernel>(t: &K, p: &PairParams, size: usize) -> Result<TriangularPair> {
    let mut a_rows = Vec::with_capacity(size + 1);
    let mut b_rows = Vec::with_capacity(size + 1);
    for n in 0..=size as i64 {
        a_rows.push(
            (0..=n)
                .map(|j| pair_a_entry(t, p, n, j))
                .collect::<Result<Vec<_>>>()?,
        );
        b_rows.push(
            (0..=n)
                .map(|m| pair_b_entry(t, p, n, m))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(TriangularPair {
        size,
        a_rows,
        b_rows,
    })
}

/// `(sum_j x_nj y_jm, delta_nm, log2 of the largest product)` over
/// `0 <= m <= n <= size`.
#[allow(clippy::needless_range_loop)]
fn triangular_products(
    x: &[Vec<Complex>],
    y: &[Vec<Complex>],
    prec: usize,
) -> Vec<(Complex, Complex, f64)> {
    let mut out = Vec::new();
    for n in 0..x.len() {
        for m in 0..=n {
            let mut acc = Accum::new(prec);
            for j in m..=n {
                acc.add(&(&x[n][j] * &y[j][m]));
            }
            let delta = Complex::from_i64((n == m) as i64, prec);
            out.push((acc.total, delta, acc.max_log2));
        }
    }
    out
}

/// AB = I as the main comparison, with BA = I and the unit diagonal as
/// checks.
pub fn verify_orthogonality(pair: &TriangularPair, prec: usize) -> Result<ResidualReport> {
    let ab = triangular_products(&pair.a_rows, &pair.b_rows, prec);
    let ba = triangular_products(&pair.b_rows, &pair.a_rows, prec);
    let one = Complex::one(prec);
    let diag = (0..=pair.size).flat_map(|n| {
        [
            (pair.a_rows[n][n].clone(), one.clone(), 0.0),
            (pair.b_rows[n][n].clone(), one.clone(), 0.0),
        ]
    });
    Ok(ResidualReport::worst_of(ab)?
        .check_all("BA = I", ba)
        .check_all("unit diagonal", diag.collect::<Vec<_>>()))
}

pub fn verify_kd(p: &PairParams, size: usize, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &p.nome, &reg);
    let pair = build_pair(&t, p, size)?;
    Ok(verify_orthogonality(&pair, ctx.precision_bits())?.with_regularity(reg.worst_log2()))
}

/// `A_n`, `B_n` supported on `0..=S`, and `C_{j,n}` with `C_{j,0} = 1`.
#[derive(Clone, Debug)]
pub struct ExpansionCoefficients {
    pub a: Vec<Complex>,
    pub b: Vec<Complex>,
    pub c: Vec<Vec<Complex>>,
}

impl ExpansionCoefficients {
    pub fn new(a: Vec<Complex>, b: Vec<Complex>, c: Vec<Vec<Complex>>) -> Result<Self> {
        let s = b.len();
        if s == 0 || a.len() < s || c.len() < s || c.iter().any(|row| row.len() < s) {
            return Err(Error::InvalidConfig(
                "coefficient tables must cover the support of B".into(),
            ));
        }
        let off_one = |x: &Complex| {
            (x - &Complex::one(x.precision())).log2_abs() > -0.9 * x.precision() as f64
        };
        if c.iter().any(|row| off_one(&row[0])) {
            return Err(Error::InvalidConfig("C_{j,0} must be 1".into()));
        }
        Ok(ExpansionCoefficients { a, b, c })
    }

    pub fn sample(s: &mut Sampler, support: usize) -> Self {
        let len = support + 1;
        let a = s.coeffs(len);
        let b = s.coeffs(len);
        let c = (0..len)
            .map(|_| {
                let mut row = s.coeffs(len);
                row[0] = Complex::one(s.precision());
                row
            })
            .collect();
        ExpansionCoefficients { a, b, c }
    }

    /// Largest index with a stored B value.
    pub fn support(&self) -> usize {
        self.b.len() - 1
    }

    pub fn with_unit_c(mut self) -> Self {
        let prec = self.b[0].precision();
        for row in &mut self.c {
            row.iter_mut().for_each(|c| *c = Complex::one(prec));
        }
        self
    }

    /// `sum_n A_n B_n (xw)^n / (q;q,p)_n` times `weight(n)`.
    fn lhs<K: Kernel>(
        &self,
        t: &K,
        xw: &Complex,
        q: &Complex,
        weight: impl Fn(i64) -> Result<Complex>,
    ) -> Result<Accum> {
        let mut acc = Accum::new(t.prec());
        for n in 0..=self.support() as i64 {
            let u = n as usize;
            acc.add(&(&self.a[u] * &self.b[u] * xw.powi(n) * t.fac_inv(q, q, n)? * weight(n)?));
        }
        Ok(acc)
    }
}

/// Parameters of the multibasic expansions; `gamma / sigma` is written g.
#[derive(Clone, Debug)]
pub struct ExpansionParams {
    pub gamma: Complex,
    pub sigma: Complex,
    pub x: Complex,
    pub w: Complex,
    pub r: Complex,
    pub s: Complex,
    pub t: Complex,
    pub q: Complex,
    pub nome: Nome,
}

impl ExpansionParams {
    pub fn sample(s: &mut Sampler, ctx: &PrecisionContext) -> Result<Self> {
        let nome = s.nome(ctx)?;
        let [gamma, sigma, x, w, r, s_, t, q] = s.params();
        Ok(ExpansionParams {
            gamma,
            sigma,
            x,
            w,
            r,
            s: s_,
            t,
            q,
            nome,
        })
    }

    /// The same parameters with `r = s = t = q`.
    pub fn single_base(&self) -> Self {
        ExpansionParams {
            r: self.q.clone(),
            s: self.q.clone(),
            t: self.q.clone(),
            ..self.clone()
        }
    }

    fn g(&self) -> Complex {
        &self.gamma / &self.sigma
    }
}

/// The j-dependent part shared by the single and full expansions: every
/// factor of the (j, n, k) summand except `theta(gamma (rst/q)^n,
/// sigma (r/q)^n, g (st)^(n+k))`, the coefficients, and powers of x, w.
fn inner_factor<K: Kernel>(t: &K, p: &ExpansionParams, j: i64, n: i64, k: i64) -> Result<Complex> {
    let (gamma, sigma, r, s, tt, q) = (&p.gamma, &p.sigma, &p.r, &p.s, &p.t, &p.q);
    let g = p.g();
    let (st, rt, rs) = (
        mono(&[s, tt], &[q]),
        mono(&[r, tt], &[q]),
        mono(&[r, s], &[q]),
    );
    let rst = mono(&[r, s, tt], &[q, q]);
    let snk = s.powi(n + k);
    let theta = t.th(&(&g * &snk * tt.powi(n) * q.powi(j - n)))?
        * t.th_ratio(&(s.powi(-k) * q.powi(j - n)), &s.powi(j - n - k))?;
    let negative = t.fac(
        &(&g * &mono(&[s, tt], &[]).powi(n + 1) * q.powi(j - n - 1)),
        &st,
        k - 1,
    )? * t.fac(&(&g * &snk * tt.powi(j + 1)), tt, n - j - 1)?
        * t.fac(
            &(gamma * &mono(&[r, s, tt], &[]).powi(j + 1) * q.powi(-j - 2)),
            &rst,
            n - j - 1,
        )?
        * t.fac(&(sigma * &r.powi(j + 1) * q.powi(-j)), r, n - j - 1)?;
    let fixed = t.fac(&(gamma * &mono(&[r, &s.powi(j), tt], &[q])), &rt, j)?
        * t.fac(&(sigma * &mono(&[r, &s.powi(1 - j)], &[q])), &rs, j)?
        * t.fac(&q.powi(-n), q, j)?;
    Ok(theta * negative * fixed)
}

/// `theta(g (st)^(n+k)) / ((gamma r s^(n+k) t/q; rt/q)_n (sigma r s^(1-n-k)/q; rs/q)_n)`.
fn middle_factor<K: Kernel>(t: &K, p: &ExpansionParams, n: i64, k: i64) -> Result<Complex> {
    let (gamma, sigma, r, s, tt, q) = (&p.gamma, &p.sigma, &p.r, &p.s, &p.t, &p.q);
    let snk = s.powi(n + k);
    Ok(t.th(&(&p.g() * &mono(&[s, tt], &[]).powi(n + k)))?
        * t.fac_inv(
            &(gamma * &mono(&[r, &snk, tt], &[q])),
            &mono(&[r, tt], &[q]),
            n,
        )?
        * t.fac_inv(
            &(sigma * &mono(&[r, &s.powi(1 - n - k)], &[q])),
            &mono(&[r, s], &[q]),
            n,
        )?)
}

/// `theta(gamma (rst/q)^n, sigma (r/q)^n)`.
fn outer_theta<K: Kernel>(t: &K, p: &ExpansionParams, n: i64) -> Result<Complex> {
    let (r, s, tt, q) = (&p.r, &p.s, &p.t, &p.q);
    t.ths([
        &p.gamma * &mono(&[r, s, tt], &[q]).powi(n),
        &p.sigma * &(r / q).powi(n),
    ])
}

/// Right side of the single-coefficient expansion: a double sum over
/// `n >= j`, `k >= 0` with `n + k <= S`.
pub fn knj_rhs<K: Kernel>(
    t: &K,
    c: &ExpansionCoefficients,
    p: &ExpansionParams,
    j: i64,
) -> Result<Accum> {
    let (s, q, x) = (&p.s, &p.q, &p.x);
    let support = c.support() as i64;
    let mut acc = Accum::new(t.prec());
    for n in j..=support {
        for k in 0..=support - n {
            let e = binom2(n) + n * (1 + j - n - k) - binom2(k + 1);
            let term = outer_theta(t, p, n)?
                * middle_factor(t, p, n, k)?
                * inner_factor(t, p, j, n, k)?
                * t.fac_inv(s, s, k)?
                * t.fac_inv(q, q, n)?
                * sign(t, n)
                * &c.b[(n + k) as usize]
                * &c.c[j as usize][(n + k - j) as usize]
                * x.powi(n + k)
                * s.powi(binom2(k + 1))
                * q.powi(e);
            acc.add(&term);
        }
    }
    Ok(acc)
}

/// The single sum whose only surviving term is n = 0.
fn knj_collapsed<K: Kernel>(
    t: &K,
    c: &ExpansionCoefficients,
    p: &ExpansionParams,
    j: i64,
) -> Result<Complex> {
    let (gamma, sigma, r, s, tt, q) = (&p.gamma, &p.sigma, &p.r, &p.s, &p.t, &p.q);
    let gst = &p.g() * &mono(&[s, tt], &[]).powi(j);
    let x1 = gamma * &mono(&[r, &s.powi(j), tt], &[q]);
    let x2 = sigma * &mono(&[r, &s.powi(1 - j)], &[q]);
    let (rt, rs) = (mono(&[r, tt], &[q]), mono(&[r, s], &[q]));
    let v = t.th_ratio(&gst, &gst)?
        * t.fac(&x1, &rt, j)?
        * t.fac(&x2, &rs, j)?
        * t.fac_inv(&x1, &rt, j)?
        * t.fac_inv(&x2, &rs, j)?;
    Ok(v * &c.b[j as usize] * &c.c[j as usize][0] * p.x.powi(j))
}

pub fn verify_knj(
    j: u32,
    c: &ExpansionCoefficients,
    p: &ExpansionParams,
    ctx: &PrecisionContext,
) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &p.nome, &reg);
    let j = j as i64;
    let lhs = if (j as usize) <= c.support() {
        &c.b[j as usize] * &p.x.powi(j)
    } else {
        Complex::zero(ctx.precision_bits())
    };
    let rhs = knj_rhs(&t, c, p, j)?;
    let mut rep = ResidualReport::new(lhs.clone(), rhs.total, rhs.max_log2);
    if (j as usize) <= c.support() {
        rep = rep.check(
            "collapsed single sum",
            &knj_collapsed(&t, c, p, j)?,
            &lhs,
            0.0,
        );
    }
    Ok(rep.with_regularity(reg.worst_log2()))
}

/// Right side of the full multibasic expansion.
pub fn gs1_rhs<K: Kernel>(t: &K, c: &ExpansionCoefficients, p: &ExpansionParams) -> Result<Accum> {
    let (s, q, x, w) = (&p.s, &p.q, &p.x, &p.w);
    let support = c.support() as i64;
    let mut acc = Accum::new(t.prec());
    for n in 0..=support {
        let outer =
            outer_theta(t, p, n)? * t.fac_inv(q, q, n)? * (-x).powi(n) * q.powi(n + binom2(n));
        for k in 0..=support - n {
            let mid = middle_factor(t, p, n, k)?
                * &c.b[(n + k) as usize]
                * x.powi(k)
                * t.fac_inv(s, s, k)?
                * s.powi(binom2(k + 1))
                * q.powi(-binom2(k + 1));
            let mut inner = Complex::zero(t.prec());
            for j in 0..=n {
                let term = inner_factor(t, p, j, n, k)?
                    * t.fac_inv(q, q, j)?
                    * &c.a[j as usize]
                    * &c.c[j as usize][(n + k - j) as usize]
                    * w.powi(j)
                    * q.powi(n * (j - n - k));
                inner = inner + term;
            }
            acc.add(&(&outer * &mid * inner));
        }
    }
    Ok(acc)
}

fn gs1_sides<K: Kernel>(
    t: &K,
    c: &ExpansionCoefficients,
    p: &ExpansionParams,
) -> Result<(Accum, Accum)> {
    let lhs = c.lhs(t, &(&p.x * &p.w), &p.q, |_| Ok(t.one()))?;
    Ok((lhs, gs1_rhs(t, c, p)?))
}

pub fn verify_gs1(
    c: &ExpansionCoefficients,
    p: &ExpansionParams,
    ctx: &PrecisionContext,
) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &p.nome, &reg);
    let (lhs, rhs) = gs1_sides(&t, c, p)?;
    let scale = lhs.max_log2.max(rhs.max_log2);

    // the right side regrouped as sum_j A_j w^j / (q;q,p)_j times the
    // single-coefficient expansion of B_j x^j
    let mut regrouped = Accum::new(ctx.precision_bits());
    for j in 0..=c.support() as i64 {
        let single = knj_rhs(&t, c, p, j)?;
        regrouped.add(&(&c.a[j as usize] * p.w.powi(j) * t.fac_inv(&p.q, &p.q, j)? * single.total));
    }

    // p = 0 with s = t = q, in plain 1 - x products
    let plain = PlainKernel::new(ctx);
    let basic = ExpansionParams {
        s: p.q.clone(),
        t: p.q.clone(),
        nome: Nome::zero(ctx),
        ..p.clone()
    };
    let (l0, r0) = gs1_sides(&plain, c, &basic)?;
    Ok(ResidualReport::new(lhs.total, rhs.total.clone(), scale)
        .check(
            "regroups into single-coefficient expansions",
            &rhs.total,
            &regrouped.total,
            scale.max(regrouped.max_log2),
        )
        .check(
            "holds at p = 0 with s = t = q",
            &l0.total,
            &r0.total,
            l0.max_log2.max(r0.max_log2),
        )
        .with_regularity(reg.worst_log2()))
}

/// Parameter vectors of the general single-base expansion, each of any
/// length.
#[derive(Clone, Debug, Default)]
pub struct ContractedVectors {
    pub a_r: Vec<Complex>,
    pub b_s: Vec<Complex>,
    pub c_t: Vec<Complex>,
    pub d_u: Vec<Complex>,
    pub e_k: Vec<Complex>,
    pub f_m: Vec<Complex>,
}

impl ContractedVectors {
    pub fn sample(s: &mut Sampler, len: usize) -> Self {
        let mut v = || (0..len).map(|_| s.param()).collect();
        ContractedVectors {
            a_r: v(),
            b_s: v(),
            c_t: v(),
            d_u: v(),
            e_k: v(),
            f_m: v(),
        }
    }

    /// Only `e_K = (alpha, beta)`: the two-parameter expansion.
    pub fn two_parameter(alpha: Complex, beta: Complex) -> Self {
        ContractedVectors {
            e_k: vec![alpha, beta],
            ..Default::default()
        }
    }
}

fn scaled(v: &[Complex], f: &Complex) -> Vec<Complex> {
    v.iter().map(|x| x * f).collect()
}

fn gs3_sides<K: Kernel>(
    t: &K,
    c: &ExpansionCoefficients,
    p: &ExpansionParams,
    v: &ContractedVectors,
) -> Result<(Accum, Accum)> {
    let (gamma, sigma, q, x, w) = (&p.gamma, &p.sigma, &p.q, &p.x, &p.w);
    let support = c.support() as i64;
    let lhs = c.lhs(t, &(x * w), q, |n| {
        Ok(t.facs(v.a_r.iter().chain(&v.c_t), q, n)?
            * t.facs_inv(v.b_s.iter().chain(&v.d_u), q, n)?)
    })?;

    let g = gamma / sigma;
    let x_sigma = x / sigma;
    let wq = w * q;
    let mut rhs = Accum::new(t.prec());
    for n in 0..=support {
        let qn = q.powi(n);
        let gq2n = &g * &qn * &qn;
        let outer = t.facs(
            v.c_t
                .iter()
                .chain(&v.e_k)
                .cloned()
                .chain([sigma.clone(), mono(&[gamma, &qn, q], &[sigma])]),
            q,
            n,
        )? * t.facs_inv(
            v.d_u
                .iter()
                .chain(&v.f_m)
                .cloned()
                .chain([q.clone(), gamma * &qn]),
            q,
            n,
        )? * x_sigma.powi(n);
        let mut mid = Complex::zero(t.prec());
        for k in 0..=support - n {
            let qk = q.powi(k);
            let term = t.th_ratio(&(&gq2n * &qk * &qk), &gq2n)?
                * t.facs(
                    [gq2n.clone(), sigma.recip()]
                        .into_iter()
                        .chain(scaled(&v.c_t, &qn))
                        .chain(scaled(&v.e_k, &qn)),
                    q,
                    k,
                )?
                * t.facs_inv(
                    [q.clone(), &gq2n * sigma * q]
                        .into_iter()
                        .chain(scaled(&v.d_u, &qn))
                        .chain(scaled(&v.f_m, &qn)),
                    q,
                    k,
                )?
                * &c.b[(n + k) as usize]
                * x.powi(k);
            mid = mid + term;
        }
        let mut inner = Complex::zero(t.prec());
        for j in 0..=n {
            let term = t.facs(
                [qn.recip(), gamma * &qn]
                    .into_iter()
                    .chain(v.a_r.iter().cloned())
                    .chain(v.f_m.iter().cloned()),
                q,
                j,
            )? * t.facs_inv(
                [
                    q.clone(),
                    mono(&[gamma, &qn, q], &[sigma]),
                    mono(&[q], &[&qn, sigma]),
                ]
                .into_iter()
                .chain(v.b_s.iter().cloned())
                .chain(v.e_k.iter().cloned()),
                q,
                j,
            )? * &c.a[j as usize]
                * wq.powi(j);
            inner = inner + term;
        }
        rhs.add(&(outer * mid * inner));
    }
    Ok((lhs, rhs))
}

pub fn verify_gs3(
    c: &ExpansionCoefficients,
    p: &ExpansionParams,
    v: &ContractedVectors,
    ctx: &PrecisionContext,
) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &p.nome, &reg);
    let (lhs, rhs) = gs3_sides(&t, c, p, v)?;
    let (l0, r0) = gs3_sides(&t, c, p, &ContractedVectors::default())?;
    Ok(
        ResidualReport::new(lhs.total, rhs.total, lhs.max_log2.max(rhs.max_log2))
            .check(
                "holds with every vector empty",
                &l0.total,
                &r0.total,
                l0.max_log2.max(r0.max_log2),
            )
            .with_regularity(reg.worst_log2()),
    )
}

/// The two-parameter expansion, compared with the multibasic one at
/// `r = s = t = q`, `C = 1`.
pub fn verify_gs2(
    c: &ExpansionCoefficients,
    p: &ExpansionParams,
    alpha: &Complex,
    beta: &Complex,
    ctx: &PrecisionContext,
) -> Result<ResidualReport> {
    let reg = Regularity::new();
    let t = Terms::new(ctx, &p.nome, &reg);
    let v = ContractedVectors::two_parameter(alpha.clone(), beta.clone());
    let (lhs, rhs) = gs3_sides(&t, c, p, &v)?;
    let scale = lhs.max_log2.max(rhs.max_log2);
    let unit = c.clone().with_unit_c();
    let multi = gs1_rhs(&t, &unit, &p.single_base())?;
    Ok(ResidualReport::new(lhs.total, rhs.total.clone(), scale)
        .check(
            "equals the multibasic expansion at r = s = t = q, C = 1",
            &rhs.total,
            &multi.total,
            scale.max(multi.max_log2),
        )
        .with_regularity(reg.worst_log2()))
}

pub(crate) fn trial(
    id: IdentityId,
    s: &mut Sampler,
    ctx: &PrecisionContext,
    o: Orders,
) -> Result<ResidualReport> {
    match id {
        IdentityId::Kd => {
            let size = order_u32(o.n, "N")? as usize;
            verify_kd(&PairParams::sample(s, ctx)?, size, ctx)
        }
        IdentityId::Knj => {
            let j = order_u32(o.n, "j")?;
            let support = order_u32(o.m, "support")? as usize;
            let p = ExpansionParams::sample(s, ctx)?;
            verify_knj(j, &ExpansionCoefficients::sample(s, support), &p, ctx)
        }
        IdentityId::Gs1 => {
            let support = order_u32(o.m, "support")? as usize;
            let p = ExpansionParams::sample(s, ctx)?;
            verify_gs1(&ExpansionCoefficients::sample(s, support), &p, ctx)
        }
        IdentityId::Gs2 => {
            let support = order_u32(o.m, "support")? as usize;
            let p = ExpansionParams::sample(s, ctx)?;
            let [alpha, beta] = s.params();
            verify_gs2(
                &ExpansionCoefficients::sample(s, support),
                &p,
                &alpha,
                &beta,
                ctx,
            )
        }
        IdentityId::Gs3 => {
            let support = order_u32(o.m, "support")? as usize;
            let p = ExpansionParams::sample(s, ctx)?;
            let v = ContractedVectors::sample(s, 1);
            verify_gs3(&ExpansionCoefficients::sample(s, support), &p, &v, ctx)
        }
        _ => Err(Error::UnknownIdentity(id.key().into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basic::q_pochhammer;
    use crate::sampling::Domain;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn sampler(stream: u64) -> Sampler {
        Sampler::new(11, stream, 256, Domain::default())
    }

    fn rel(a: &Complex, b: &Complex) -> f64 {
        (a - b).log2_abs() - b.log2_abs().max(0.0)
    }

    #[test]
    fn inverse_pair_is_two_sided() {
        let ctx = ctx();
        for size in [0, 1, 4, 8, 10] {
            let p = PairParams::sample(&mut sampler(size as u64), &ctx).unwrap();
            let r = verify_kd(&p, size, &ctx).unwrap().with_tolerance(1e-60);
            assert!(r.all_pass(), "N={size}: {} {:?}", r.residual_log2, r.checks);
        }
    }

    #[test]
    fn subdiagonal_pairs_cancel() {
        let ctx = ctx();
        let p = PairParams::sample(&mut sampler(3), &ctx).unwrap();
        let reg = Regularity::new();
        let t = Terms::new(&ctx, &p.nome, &reg);
        for m in 0..4 {
            let a = pair_a_entry(&t, &p, m + 1, m).unwrap();
            let b = pair_b_entry(&t, &p, m + 1, m).unwrap();
            assert!((&a + &b).log2_abs() - a.log2_abs() < -240.0);
        }
    }

    #[test]
    fn pair_at_zero_nome_matches_plain_products() {
        let ctx = ctx();
        let mut p = PairParams::sample(&mut sampler(4), &ctx).unwrap();
        p.nome = Nome::zero(&ctx);
        let reg = Regularity::new();
        let pair = build_pair(&Terms::new(&ctx, &p.nome, &reg), &p, 3).unwrap();
        let (a, b, r, q) = (&p.a, &p.b, &p.r, &p.q);
        let one = Complex::one(256);
        for n in 0..=3i64 {
            for m in 0..=n {
                let (qm, rm) = (q.powi(m), r.powi(m));
                let d = (n - m) as u32;
                let z = -(a * &q.powi(1 + 2 * m) / b);
                let expect = q_pochhammer(&(a * &rm * &qm), r, d)
                    * q_pochhammer(&(b * &rm / &qm), r, d)
                    / (q_pochhammer(q, q, d) * q_pochhammer(&(a * &q.powi(1 + 2 * m) / b), q, d))
                    * z.powi(d as i64)
                    * q.powi(2 * binom2(d as i64));
                assert!(rel(pair.b(n as usize, m as usize).unwrap(), &expect) < -240.0);
            }
            let qn = q.powi(n);
            let arq = a * r * &qn;
            let brq = b * r / &qn;
            // (x;r)_{n-1} / (x;r)_n = 1 / (1 - x r^(n-1))
            let last = |x: &Complex| &one - &(x * &r.powi(n - 1));
            let j = n;
            let expect = (&one - &(a * &r.powi(j) * &q.powi(j)))
                * (&one - &(b * &r.powi(j) / &q.powi(j)))
                / (last(&arq) * last(&brq));
            assert!(rel(pair.a(n as usize, n as usize).unwrap(), &expect) < -240.0);
        }
    }

    #[test]
    fn single_coefficient_expansion() {
        let ctx = ctx();
        for (j, support) in [(0, 0), (1, 4), (2, 3), (3, 5), (4, 2)] {
            let r = IdentityId::Knj
                .trial(
                    &mut sampler(20 + j),
                    &ctx,
                    Orders {
                        n: j as i64,
                        m: support,
                    },
                )
                .unwrap();
            assert!(r.all_pass(), "j={j}: {} {:?}", r.residual_log2, r.checks);
        }
    }

    #[test]
    fn single_support_collapses() {
        let ctx = ctx();
        let mut s = sampler(30);
        let p = ExpansionParams::sample(&mut s, &ctx).unwrap();
        let mut c = ExpansionCoefficients::sample(&mut s, 3);
        for (i, b) in c.b.iter_mut().enumerate() {
            *b = Complex::from_i64((i == 2) as i64, 256);
        }
        let reg = Regularity::new();
        let t = Terms::new(&ctx, &p.nome, &reg);
        let rhs = knj_rhs(&t, &c, &p, 2).unwrap();
        assert!(rel(&rhs.total, &p.x.powi(2)) < -240.0);
    }

    #[test]
    fn expansions_hold() {
        let ctx = ctx();
        for id in [IdentityId::Gs1, IdentityId::Gs2, IdentityId::Gs3] {
            for support in [0, 1, 3, 5] {
                let r = id
                    .trial(
                        &mut sampler(40 + support as u64),
                        &ctx,
                        Orders { n: 0, m: support },
                    )
                    .unwrap();
                assert!(
                    r.all_pass(),
                    "{id} S={support}: {} {:?}",
                    r.residual_log2,
                    r.checks
                );
            }
        }
    }

    #[test]
    fn support_at_zero_gives_first_coefficient() {
        let ctx = ctx();
        let mut s = sampler(50);
        let p = ExpansionParams::sample(&mut s, &ctx).unwrap();
        let c = ExpansionCoefficients::sample(&mut s, 0);
        let r = verify_gs1(&c, &p, &ctx).unwrap();
        assert!(rel(&r.lhs, &(&c.a[0] * &c.b[0])) < -240.0);
        assert!(r.all_pass());
    }

    #[test]
    fn zero_padding_changes_nothing() {
        let ctx = ctx();
        let mut s = sampler(60);
        let p = ExpansionParams::sample(&mut s, &ctx).unwrap();
        let c = ExpansionCoefficients::sample(&mut s, 2);
        let mut padded = ExpansionCoefficients::sample(&mut s, 4);
        for i in 0..=4 {
            if i <= 2 {
                padded.a[i] = c.a[i].clone();
                padded.b[i] = c.b[i].clone();
                for m in 0..=2 {
                    padded.c[i][m] = c.c[i][m].clone();
                }
            } else {
                padded.b[i] = Complex::zero(256);
            }
        }
        let a = verify_gs1(&c, &p, &ctx).unwrap();
        let b = verify_gs1(&padded, &p, &ctx).unwrap();
        assert!((&a.lhs - &b.lhs).is_zero());
        assert!((&a.rhs - &b.rhs).is_zero());
    }
}
