//! Catalog of numerically checkable identities.
//!
//! Every entry samples its free parameters, resolves its constraints,
//! evaluates both sides and reports a scaled residual.

use std::fmt;
use std::str::FromStr;

use astro_float::BigFloat;

use crate::complex::{Complex, Real, RM};
use crate::error::{Error, Result};
use crate::precision::PrecisionContext;
use crate::sampling::Sampler;

pub mod frenkel_turaev;
pub mod indefinite;
pub mod multibasic;
pub mod transforms;

/// Draws whose smallest divisor theta sits below this relative magnitude
/// (log2 of 1e-6) are rejected as near-singular.
pub const REJECT_LOG2: f64 = -19.931568569324174;

/// Looser tolerance of the truncated bilateral sum.
pub const TRUNCATED_TOLERANCE: f64 = 1e-35;

macro_rules! catalog {
    ($( $variant:ident => $key:literal, $n:expr, $m:expr, $anchor:literal, $desc:literal; )*) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum IdentityId {
            $( $variant, )*
        }

        impl IdentityId {
            pub const ALL: &'static [IdentityId] = &[ $( IdentityId::$variant, )* ];

            pub fn key(self) -> &'static str {
                match self { $( IdentityId::$variant => $key, )* }
            }

            /// Short label of the formula this entry checks.
            pub fn anchor(self) -> &'static str {
                match self { $( IdentityId::$variant => $anchor, )* }
            }

            pub fn description(self) -> &'static str {
                match self { $( IdentityId::$variant => $desc, )* }
            }

            /// Default inclusive range of the order n.
            pub fn n_range(self) -> (i64, i64) {
                match self { $( IdentityId::$variant => $n, )* }
            }

            /// Default inclusive range of the second order m.
            pub fn m_range(self) -> (i64, i64) {
                match self { $( IdentityId::$variant => $m, )* }
            }
        }
    };
}

const NONE: (i64, i64) = (0, 0);

catalog! {
    Ft109 => "ft109", (0, 6), NONE,
        "terminating very-well-poised 10V9 summation",
        "10V9(a; b,c,d,e,q^-n) in closed form, bcde = a^2 q^(n+1)";
    Ft1211 => "ft1211", (0, 5), NONE,
        "terminating 12V11 transformation with lambda = qa^2/bcd",
        "balanced 12V11 equals a prefactor times a 12V11 in lambda";
    Ft109n1 => "ft109n1", NONE, NONE,
        "four-term theta identity from the first-order 10V9 sum",
        "1 - theta quotient = theta quotient, four parameters";
    Ft1211n1 => "ft1211n1", NONE, NONE,
        "six-parameter theta identity with a^3 = bcdefg",
        "first-order 12V11 transformation as a theta identity";
    Indefsum => "indefsum", (0, 6), (0, 3),
        "indefinite telescoping sum U_{-m} - U_{n+1}",
        "telescoping sum over a tabulated seven-sequence family";
    Sumf => "sumf", (0, 6), NONE,
        "four-sequence summation 1 - product",
        "m = 0, a_k = c_k d_k case of the telescoping sum";
    Indm => "indm", (0, 4), (0, 2),
        "indefinite six-base theta summation",
        "geometric family with a^3 = bcdefg and w^3 = qrstuv";
    M0 => "m0", (0, 5), NONE,
        "patched m = 0 six-base summation",
        "six-base sum after the patching identity, m = 0";
    Indmrat => "indmrat", NONE, NONE,
        "bilateral six-base sum at p = 0",
        "sum over all integers equals a difference of infinite products";
    BilateralTheta => "bilateral_theta", (0, 3), NONE,
        "bilateral theta sum with a compactly deviating family",
        "families equal to sqrt(a_k) outside |k| < K";
    Csn => "csn", (0, 5), NONE,
        "terminating six-base summation with g = v^-n",
        "a^3 v^n = bcdef, w^3 = qrstuv";
    Ftoa => "ftoa", (0, 5), NONE,
        "six-base delta sum (f -> a limit)",
        "a^2 v^n = bcde, w^3 = qrstuv; equals delta(n,0)";
    Dto1 => "dto1", (0, 5), NONE,
        "four-base delta sum",
        "w = rs, d = a/c specialization; equals delta(n,0)";
    BibasicDelta => "bibasic_delta", (0, 6), NONE,
        "bibasic delta sum in bases q and r",
        "theta(a/r, b/r) times a bibasic sum equals delta(n,0)";
    V87Delta => "v87_delta", (0, 6), NONE,
        "8V7 delta sum",
        "8V7(a/b; q/b, aq^(n-1), q^-n) = delta(n,0)";
    Quad1 => "quad1", (0, 3), NONE,
        "quadratic transformation, upper limit n",
        "mixed base q / q^2 sum equals a prefactor times a 12V11 in base q^2";
    Quad2 => "quad2", (0, 3), NONE,
        "quadratic transformation, upper limit 2n",
        "mixed base sum to 2n equals a prefactor times a 12V11 in base q^2";
    M00 => "m00", (0, 5), NONE,
        "four-base summation with a two-term right side",
        "parameters a,b,c,d and bases q,r,s,t";
    Gtf => "gtf", (0, 5), NONE,
        "two-nome transformation from reversing a double sum",
        "tabulated families (a,b,c,d;p) and (A,B,C,D;P)";
    Ex28 => "ex28", (0, 5), NONE,
        "two-nome four-base transformation",
        "lower (a,b,c,d;q,r,s,t;p) and upper (A,..,T;P) parameter sets";
    DD1 => "dD1", (0, 5), NONE,
        "two-nome transformation at d = D = 1",
        "d, D -> 1 case of the four-base transformation";
    Quadbasic => "quadbasic", (0, 5), NONE,
        "elliptic quadbasic transformation",
        "bases q, r (nome p) and Q, R (nome P)";
    SplitPoised => "split_poised", (0, 5), NONE,
        "split-poised transformation",
        "R = Q = r = q case; cross-checked against its 12E11 form";
    Kd => "kd", (8, 8), NONE,
        "triangular matrix inverse pair",
        "sum_j a_nj b_jm = delta(n,m) for N x N blocks";
    Knj => "knj", (0, 3), (0, 5),
        "coefficient inversion B_j x^j as a double sum",
        "finitely supported B, C_{j,0} = 1; m is the support bound";
    Gs1 => "gs1", NONE, (0, 5),
        "multibasic expansion formula",
        "bases r, s, t, q; m is the support bound of B";
    Gs2 => "gs2", NONE, (0, 5),
        "one-base expansion with sigma, gamma, alpha, beta",
        "r = s = t = q, C = 1; m is the support bound of B";
    Gs3 => "gs3", NONE, (0, 5),
        "expansion with contracted parameter vectors",
        "vectors a_R, b_S, c_T, d_U, e_K, f_M; m is the support bound";
}

impl IdentityId {
    pub fn ordinal(self) -> u32 {
        Self::ALL.iter().position(|&i| i == self).unwrap_or(0) as u32
    }

    /// Tolerance applied to this identity under `ctx`.
    pub fn tolerance(self, ctx: &PrecisionContext) -> f64 {
        match self {
            IdentityId::Indmrat => ctx.default_tolerance().max(TRUNCATED_TOLERANCE),
            _ => ctx.default_tolerance(),
        }
    }

    /// Samples parameters for the given orders and checks the identity.
    pub fn trial(
        self,
        s: &mut Sampler,
        ctx: &PrecisionContext,
        orders: Orders,
    ) -> Result<ResidualReport> {
        use IdentityId::*;
        let tol = self.tolerance(ctx);
        let rep = match self {
            Ft109 | Ft1211 | Ft109n1 | Ft1211n1 => frenkel_turaev::trial(self, s, ctx, orders),
            Indefsum | Sumf | Indm | M0 | Indmrat | BilateralTheta => {
                indefinite::trial(self, s, ctx, orders)
            }
            Csn | Ftoa | Dto1 | BibasicDelta | V87Delta | M00 => {
                multibasic::trial(self, s, ctx, orders)
            }
            Quad1 | Quad2 | Gtf | Ex28 | DD1 | Quadbasic | SplitPoised => {
                transforms::trial(self, s, ctx, orders)
            }
            Kd | Knj | Gs1 | Gs2 | Gs3 => crate::expansions::trial(self, s, ctx, orders),
        }?;
        Ok(rep.with_tolerance(tol))
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|i| i.key() == s)
            .ok_or_else(|| Error::UnknownIdentity(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Orders {
    pub n: i64,
    pub m: i64,
}

impl Orders {
    pub fn n(n: i64) -> Self {
        Orders { n, m: 0 }
    }
}

/// Whether the values differ pairwise by more than 1e-6 relative.
pub fn pairwise_distinct(xs: &[Complex]) -> bool {
    let thr = 1e-6f64.log2();
    (0..xs.len())
        .all(|i| (i + 1..xs.len()).all(|j| (&xs[i] - &xs[j]).log2_abs() - xs[i].log2_abs() > thr))
}

/// `|lhs - rhs| / max(1, |lhs|, |rhs|, 2^scale_log2)` at working precision.
pub fn scaled_residual(lhs: &Complex, rhs: &Complex, scale_log2: f64) -> (Real, f64) {
    let diff = lhs - rhs;
    let denom_log2 = lhs.log2_abs().max(rhs.log2_abs()).max(scale_log2).max(0.0);
    let log2 = diff.log2_abs() - denom_log2;
    if diff.is_zero() {
        return (BigFloat::from_i64(0, lhs.precision()), f64::NEG_INFINITY);
    }
    let prec = lhs.precision();
    let shift = -denom_log2.floor() as i64;
    let scaled = diff.mul_pow2(shift).abs();
    let frac = BigFloat::from_f64((-(denom_log2 - denom_log2.floor())).exp2(), prec);
    (scaled.mul(&frac, prec, RM), log2)
}

#[derive(Clone, Debug)]
pub struct AuxCheck {
    pub name: String,
    pub residual: Real,
    pub residual_log2: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub lhs: Complex,
    pub rhs: Complex,
    /// log2 of the largest summand magnitude
    pub scale_log2: f64,
    pub residual: Real,
    pub residual_log2: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// additional assertions made on the same trial
    pub checks: Vec<AuxCheck>,
    /// smallest relative magnitude (log2) of any divisor theta
    pub worst_divisor_log2: f64,
}

impl ResidualReport {
    pub fn new(lhs: Complex, rhs: Complex, scale_log2: f64) -> Self {
        let (residual, residual_log2) = scaled_residual(&lhs, &rhs, scale_log2);
        ResidualReport {
            lhs,
            rhs,
            scale_log2,
            residual,
            residual_log2,
            tolerance: crate::precision::DEFAULT_TOLERANCE,
            pass: false,
            checks: Vec::new(),
            worst_divisor_log2: f64::INFINITY,
        }
        .with_tolerance(crate::precision::DEFAULT_TOLERANCE)
    }

    /// The worst of several (lhs, rhs, scale) comparisons.
    pub fn worst_of(pairs: impl IntoIterator<Item = (Complex, Complex, f64)>) -> Result<Self> {
        pairs
            .into_iter()
            .map(|(l, r, s)| ResidualReport::new(l, r, s))
            .max_by(|a, b| a.residual_log2.total_cmp(&b.residual_log2))
            .ok_or_else(|| Error::InvalidConfig("no comparisons to report".into()))
    }

    /// Re-evaluates every pass flag against `tol`.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        let lt = tol.log2();
        self.tolerance = tol;
        self.pass = self.residual_log2 < lt;
        for c in &mut self.checks {
            c.pass = c.residual_log2 < lt;
        }
        self
    }

    pub fn with_regularity(mut self, worst_log2: f64) -> Self {
        self.worst_divisor_log2 = self.worst_divisor_log2.min(worst_log2);
        self
    }

    /// Adds a comparison of two values scaled like the main residual.
    pub fn check(mut self, name: &str, a: &Complex, b: &Complex, scale_log2: f64) -> Self {
        let (residual, residual_log2) = scaled_residual(a, b, scale_log2);
        self.checks.push(AuxCheck {
            name: name.to_string(),
            pass: residual_log2 < self.tolerance.log2(),
            residual,
            residual_log2,
        });
        self
    }

    /// Adds the worst of several comparisons under one name.
    pub fn check_all(
        mut self,
        name: &str,
        pairs: impl IntoIterator<Item = (Complex, Complex, f64)>,
    ) -> Self {
        if let Ok(w) = Self::worst_of(pairs) {
            self.checks.push(AuxCheck {
                name: name.to_string(),
                pass: w.residual_log2 < self.tolerance.log2(),
                residual: w.residual,
                residual_log2: w.residual_log2,
            });
        }
        self
    }

    /// Adds a yes/no assertion; a failure carries residual +inf.
    pub fn check_flag(mut self, name: &str, ok: bool, prec: usize) -> Self {
        let (residual, residual_log2) = if ok {
            (BigFloat::from_i64(0, prec), f64::NEG_INFINITY)
        } else {
            (BigFloat::from_i64(1, prec), f64::INFINITY)
        };
        self.checks.push(AuxCheck {
            name: name.to_string(),
            residual,
            residual_log2,
            pass: ok,
        });
        self
    }

    /// `|value| / 2^scale_log2`, for sums that must vanish relative to
    /// their largest term.
    pub fn check_vanishes(self, name: &str, value: &Complex, scale_log2: f64) -> Self {
        let prec = value.precision();
        let zero = Complex::zero(prec);
        // scaled_residual never divides by less than 1; rescale first
        let v = value.mul_pow2(-scale_log2.floor() as i64);
        let frac = Complex::from_f64((-(scale_log2 - scale_log2.floor())).exp2(), 0.0, prec);
        self.check(name, &(v * frac), &zero, f64::NEG_INFINITY)
    }

    pub fn all_pass(&self) -> bool {
        self.pass && self.checks.iter().all(|c| c.pass)
    }

    /// Largest residual over the main comparison and all checks.
    pub fn max_residual(&self) -> (&Real, f64) {
        let mut best = (&self.residual, self.residual_log2);
        for c in &self.checks {
            if c.residual_log2 > best.1 {
                best = (&c.residual, c.residual_log2);
            }
        }
        best
    }
}

pub(crate) fn order_u32(n: i64, what: &str) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::InvalidConfig(format!("{what} must be >= 0, got {n}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_keys_round_trip() {
        assert_eq!(IdentityId::ALL.len(), 28);
        for &id in IdentityId::ALL {
            assert_eq!(id.key().parse::<IdentityId>().unwrap(), id);
            let (lo, hi) = id.n_range();
            assert!(lo <= hi);
        }
        assert!(matches!(
            "nope".parse::<IdentityId>(),
            Err(Error::UnknownIdentity(_))
        ));
    }

    #[test]
    fn residual_scaling() {
        let one = Complex::one(256);
        let tiny = Complex::from_f64(1e-50, 0.0, 256);
        let r = ResidualReport::new(&one + &tiny, one.clone(), 0.0);
        assert!((r.residual_log2 - 1e-50f64.log2()).abs() < 1e-6);
        assert!(r.pass);
        // a large summand scale shrinks the residual
        let r = ResidualReport::new(tiny.clone(), Complex::zero(256), 100.0);
        assert!((r.residual_log2 - (1e-50f64.log2() - 100.0)).abs() < 1e-6);
        let v = crate::complex::real_to_f64(&r.residual);
        assert!((v.log2() - r.residual_log2).abs() < 1e-9);
        let r = ResidualReport::new(one.clone(), one.clone(), 0.0);
        assert!(r.residual.is_zero() && r.pass);
    }

    #[test]
    fn vanishing_check_uses_scale() {
        let v = Complex::from_f64(1e-45, 0.0, 256);
        let r = ResidualReport::new(Complex::one(256), Complex::one(256), 0.0).check_vanishes(
            "small",
            &v,
            (1e-10f64).log2(),
        );
        assert!(!r.all_pass());
        let r = ResidualReport::new(Complex::one(256), Complex::one(256), 0.0)
            .check_vanishes("small", &v, 0.0);
        assert!(r.all_pass());
    }
}
