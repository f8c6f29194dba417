//! Randomized trial runner and its JSON report.

use std::time::Instant;

use serde::Serialize;

use crate::complex::{real_to_decimal, Real};
use crate::error::{Error, Result};
use crate::identities::{IdentityId, Orders, ResidualReport, REJECT_LOG2};
use crate::precision::PrecisionContext;
use crate::sampling::{Domain, Sampler, RNG_ALGORITHM};

/// Draws allowed per requested trial before the trial counts as failed.
pub const RETRY_BUDGET: u32 = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub identities: Vec<IdentityId>,
    pub trials: u32,
    pub seed: u64,
    pub precision_bits: usize,
    pub tolerance: f64,
    /// overrides of the catalog's inclusive order ranges
    pub n_range: Option<(i64, i64)>,
    pub m_range: Option<(i64, i64)>,
    pub domain: Domain,
    /// worker threads; None uses every core
    pub workers: Option<usize>,
}

impl RunConfig {
    /// One identity (or every identity for `"all"`) with default settings.
    pub fn new(selector: &str) -> Result<Self> {
        let identities = if selector == "all" {
            IdentityId::ALL.to_vec()
        } else {
            vec![selector.parse()?]
        };
        Ok(RunConfig {
            identities,
            trials: 10,
            seed: 0,
            precision_bits: crate::precision::DEFAULT_PRECISION_BITS,
            tolerance: crate::precision::DEFAULT_TOLERANCE,
            n_range: None,
            m_range: None,
            domain: Domain::default(),
            workers: None,
        })
    }

    pub fn validate(&self) -> Result<PrecisionContext> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.identities.is_empty() {
            return Err(Error::InvalidConfig("no identities selected".into()));
        }
        for (name, r) in [("n", self.n_range), ("m", self.m_range)] {
            if let Some((lo, hi)) = r {
                if lo > hi {
                    return Err(Error::InvalidConfig(format!(
                        "empty {name} range [{lo}, {hi}]"
                    )));
                }
            }
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        self.domain.validate()?;
        PrecisionContext::new(self.precision_bits, self.tolerance)
    }

    fn ranges(&self, id: IdentityId) -> ((i64, i64), (i64, i64)) {
        // identities without an order keep (0, 0)
        let clamp = |default: (i64, i64), over: Option<(i64, i64)>| match over {
            Some(r) if default != (0, 0) => r,
            _ => default,
        };
        (
            clamp(id.n_range(), self.n_range),
            clamp(id.m_range(), self.m_range),
        )
    }

    /// Orders of trial `i`: n cycles fastest, then m.
    pub fn orders(&self, id: IdentityId, i: u32) -> Orders {
        let ((nlo, nhi), (mlo, mhi)) = self.ranges(id);
        let nc = (nhi - nlo + 1) as u64;
        let mc = (mhi - mlo + 1) as u64;
        let i = i as u64;
        Orders {
            n: nlo + (i % nc) as i64,
            m: mlo + ((i / nc) % mc) as i64,
        }
    }
}

/// Why a draw was discarded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    NearSingular,
    SingularDenominator,
    ZeroArgument,
    DivisionByZero,
    Constraint,
}

impl Rejection {
    fn of(e: &Error) -> Option<Self> {
        match e {
            Error::SingularDenominator { .. } => Some(Rejection::SingularDenominator),
            Error::ZeroArgument => Some(Rejection::ZeroArgument),
            Error::DivisionByZero(_) => Some(Rejection::DivisionByZero),
            Error::Constraint(_) => Some(Rejection::Constraint),
            _ => None,
        }
    }
}

/// Outcome of one requested trial.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub index: u32,
    pub orders: Orders,
    pub rejections: Vec<Rejection>,
    pub result: std::result::Result<ResidualReport, String>,
}

impl TrialOutcome {
    pub fn passed(&self) -> bool {
        matches!(&self.result, Ok(r) if r.all_pass())
    }
}

pub fn run_trial(
    id: IdentityId,
    cfg: &RunConfig,
    ctx: &PrecisionContext,
    index: u32,
) -> TrialOutcome {
    let orders = cfg.orders(id, index);
    let mut s = Sampler::for_trial(
        cfg.seed,
        id.ordinal(),
        index,
        ctx.precision_bits(),
        cfg.domain,
    );
    let mut rejections = Vec::new();
    for _ in 0..RETRY_BUDGET {
        match id.trial(&mut s, ctx, orders) {
            Ok(rep) if rep.worst_divisor_log2 < REJECT_LOG2 => {
                rejections.push(Rejection::NearSingular)
            }
            Ok(rep) => {
                return TrialOutcome {
                    index,
                    orders,
                    rejections,
                    result: Ok(rep),
                }
            }
            Err(e) => match Rejection::of(&e) {
                Some(r) => rejections.push(r),
                None => {
                    return TrialOutcome {
                        index,
                        orders,
                        rejections,
                        result: Err(e.to_string()),
                    }
                }
            },
        }
    }
    let msg = format!("all {RETRY_BUDGET} draws rejected");
    TrialOutcome {
        index,
        orders,
        rejections,
        result: Err(msg),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RejectionCount {
    pub reason: Rejection,
    pub count: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub index: u32,
    pub n: i64,
    pub m: i64,
    /// decimal string; absent when the trial errored
    pub residual: Option<String>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failed_checks: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityRecord {
    pub id: String,
    pub paper_anchor: String,
    pub description: String,
    pub trials: u32,
    /// draws made, accepted or not
    pub attempted: u32,
    pub accepted: u32,
    pub rejected: u32,
    pub rejections: Vec<RejectionCount>,
    pub tolerance: f64,
    pub max_residual: String,
    pub max_residual_log2: Option<f64>,
    pub pass: bool,
    pub results: Vec<TrialRecord>,
}

impl IdentityRecord {
    pub fn from_outcomes(id: IdentityId, tolerance: f64, outcomes: &[TrialOutcome]) -> Self {
        let mut counts = std::collections::BTreeMap::new();
        let mut rejected = 0;
        let mut accepted = 0;
        let mut worst: Option<(&Real, f64)> = None;
        let mut results = Vec::with_capacity(outcomes.len());
        for o in outcomes {
            rejected += o.rejections.len() as u32;
            for r in &o.rejections {
                *counts.entry(*r).or_insert(0u32) += 1;
            }
            let rec = match &o.result {
                Ok(rep) => {
                    accepted += 1;
                    let (res, log2) = rep.max_residual();
                    if worst.map_or(true, |(_, w)| log2 > w) {
                        worst = Some((res, log2));
                    }
                    TrialRecord {
                        index: o.index,
                        n: o.orders.n,
                        m: o.orders.m,
                        residual: Some(real_to_decimal(res, Some(6))),
                        pass: rep.all_pass(),
                        error: None,
                        failed_checks: rep
                            .checks
                            .iter()
                            .filter(|c| !c.pass)
                            .map(|c| c.name.clone())
                            .collect(),
                    }
                }
                Err(e) => {
                    // a draw was accepted unless the retry budget ran out
                    if o.rejections.len() < RETRY_BUDGET as usize {
                        accepted += 1;
                    }
                    TrialRecord {
                        index: o.index,
                        n: o.orders.n,
                        m: o.orders.m,
                        residual: None,
                        pass: false,
                        error: Some(e.clone()),
                        failed_checks: Vec::new(),
                    }
                }
            };
            results.push(rec);
        }
        let (max_residual, max_residual_log2) = match worst {
            Some((r, l)) => (real_to_decimal(r, Some(20)), l.is_finite().then_some(l)),
            None => ("NaN".to_string(), None),
        };
        IdentityRecord {
            id: id.key().to_string(),
            paper_anchor: id.anchor().to_string(),
            description: id.description().to_string(),
            trials: outcomes.len() as u32,
            attempted: accepted + rejected,
            accepted,
            rejected,
            rejections: counts
                .into_iter()
                .map(|(reason, count)| RejectionCount { reason, count })
                .collect(),
            tolerance,
            max_residual,
            max_residual_log2,
            pass: outcomes.iter().all(TrialOutcome::passed),
            results,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub trials: u32,
    pub n_range: Option<(i64, i64)>,
    pub m_range: Option<(i64, i64)>,
    pub param_magnitude: (f64, f64),
    pub nome_magnitude: (f64, f64),
    pub coeff_magnitude: (f64, f64),
    pub bilateral_base_magnitude: (f64, f64),
    pub retry_budget: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub version: String,
    pub seed: u64,
    pub rng: String,
    pub precision_bits: usize,
    pub tolerance: f64,
    pub config: ConfigEcho,
    pub identities: Vec<IdentityRecord>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
}

impl SuiteReport {
    /// Pretty JSON; stable for a given config and seed when timing is off.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_else(|e| format!("{{\"error\": \"{e}\"}}"))
    }

    pub fn without_timing(mut self) -> Self {
        self.wall_seconds = None;
        self
    }

    pub fn record(&self, id: IdentityId) -> Option<&IdentityRecord> {
        self.identities.iter().find(|r| r.id == id.key())
    }
}

fn run_all(cfg: &RunConfig, ctx: &PrecisionContext) -> Vec<IdentityRecord> {
    let jobs: Vec<(IdentityId, u32)> = cfg
        .identities
        .iter()
        .flat_map(|&id| (0..cfg.trials).map(move |i| (id, i)))
        .collect();
    let run = |&(id, i): &(IdentityId, u32)| run_trial(id, cfg, ctx, i);

    #[cfg(feature = "parallel")]
    let outcomes: Vec<TrialOutcome> = {
        use rayon::prelude::*;
        let work = || jobs.par_iter().map(run).collect();
        match cfg
            .workers
            .and_then(|w| rayon::ThreadPoolBuilder::new().num_threads(w).build().ok())
        {
            Some(pool) => pool.install(work),
            None => work(),
        }
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<TrialOutcome> = jobs.iter().map(run).collect();

    outcomes
        .chunks(cfg.trials as usize)
        .zip(&cfg.identities)
        .map(|(chunk, &id)| IdentityRecord::from_outcomes(id, id.tolerance(ctx), chunk))
        .collect()
}

pub fn run_suite(cfg: &RunConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut report = run_suite_untimed(cfg)?;
    report.wall_seconds = Some(start.elapsed().as_secs_f64());
    Ok(report)
}

/// Same as [`run_suite`] without reading the clock, for targets that have
/// none (wasm32-unknown-unknown).
pub fn run_suite_untimed(cfg: &RunConfig) -> Result<SuiteReport> {
    let ctx = cfg.validate()?;
    let identities = run_all(cfg, &ctx);
    let pass = identities.iter().all(|r| r.pass);
    Ok(SuiteReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        rng: RNG_ALGORITHM.to_string(),
        precision_bits: ctx.precision_bits(),
        tolerance: ctx.default_tolerance(),
        config: ConfigEcho {
            trials: cfg.trials,
            n_range: cfg.n_range,
            m_range: cfg.m_range,
            param_magnitude: cfg.domain.param,
            nome_magnitude: cfg.domain.nome,
            coeff_magnitude: cfg.domain.coeff,
            bilateral_base_magnitude: cfg.domain.bilateral_base,
            retry_budget: RETRY_BUDGET,
        },
        identities,
        pass,
        wall_seconds: None,
    })
}
