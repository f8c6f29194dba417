//! Acceptance criteria at their stated trial counts and tolerances.
//!
//! Run with `cargo test -p thetaseries --test acceptance -- --nocapture` to
//! see one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use thetaseries::basic::q_pochhammer;
use thetaseries::identities::indefinite::GeomParams;
use thetaseries::identities::{scaled_residual, IdentityId, ResidualReport};
use thetaseries::sampling::Sampler;
use thetaseries::series::vwp_quotient;
use thetaseries::suite::{run_trial, RunConfig, TrialOutcome};
use thetaseries::theta::{qp_factorial, theta};
use thetaseries::{Complex, Nome, PrecisionContext};

const SEED: u64 = 20_240_611;
const TOL: f64 = 1e-40;

struct Batch {
    id: IdentityId,
    outcomes: Vec<TrialOutcome>,
}

impl Batch {
    fn run(key: &str, trials: u32, n: Option<(i64, i64)>, m: Option<(i64, i64)>) -> Batch {
        let cfg = RunConfig {
            trials,
            seed: SEED,
            n_range: n,
            m_range: m,
            ..RunConfig::new(key).unwrap()
        };
        let ctx = cfg.validate().unwrap();
        let id = cfg.identities[0];
        let outcomes = (0..trials).map(|i| run_trial(id, &cfg, &ctx, i)).collect();
        Batch { id, outcomes }
    }

    fn reports(&self) -> impl Iterator<Item = (&TrialOutcome, Option<&ResidualReport>)> {
        self.outcomes.iter().map(|o| (o, o.result.as_ref().ok()))
    }

    /// Every trial produced a report whose residual and checks sit below `tol`.
    fn holds(&self, tol: f64) -> bool {
        let lt = tol.log2();
        self.reports().all(|(_, r)| {
            r.is_some_and(|r| {
                r.all_pass()
                    && r.residual_log2 < lt
                    && r.checks.iter().all(|c| c.residual_log2 < lt)
            })
        })
    }

    /// The named check ran and passed on every trial.
    fn checked(&self, name: &str) -> bool {
        self.reports()
            .all(|(_, r)| r.is_some_and(|r| r.checks.iter().any(|c| c.name == name && c.pass)))
    }

    fn max_log2(&self) -> f64 {
        self.reports()
            .filter_map(|(_, r)| r.map(|r| r.max_residual().1))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn summary(&self) -> String {
        let rejected: usize = self.outcomes.iter().map(|o| o.rejections.len()).sum();
        format!(
            "{} x{} (rejected {rejected}, max {})",
            self.id.key(),
            self.outcomes.len(),
            fmt_log2(self.max_log2())
        )
    }
}

fn fmt_log2(l: f64) -> String {
    if l == f64::NEG_INFINITY {
        "0".into()
    } else {
        let d = l * std::f64::consts::LOG10_2;
        format!("{:.2}e{}", 10f64.powf(d - d.floor()), d.floor())
    }
}

struct Criteria {
    lines: Vec<(usize, bool, String)>,
}

impl Criteria {
    fn record(&mut self, n: usize, pass: bool, what: String, took: Duration) {
        let line = format!(
            "criterion {n:>2} {}  {what}  [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
        println!("{line}");
        self.lines.push((n, pass, line));
    }
}

fn criterion_1() -> (bool, String) {
    let start = Instant::now();
    let b = Batch::run("ft109", 700, Some((0, 6)), None);
    let secs = start.elapsed().as_secs_f64();
    (
        b.holds(TOL) && secs < 10.0,
        format!("{} in {secs:.1}s (limit 10s)", b.summary()),
    )
}

fn criterion_2() -> (bool, String) {
    let b = Batch::run("ft1211", 300, Some((0, 5)), None);
    let ok = b.holds(TOL) && b.checked("both series E-balanced");
    (ok, b.summary())
}

fn criterion_3() -> (bool, String) {
    let a = Batch::run("ft109n1", 200, None, None);
    let b = Batch::run("ft1211n1", 200, None, None);
    (
        a.holds(TOL) && b.holds(TOL),
        format!("{}; {}", a.summary(), b.summary()),
    )
}

fn criterion_4() -> (bool, String) {
    let a = Batch::run("indefsum", 50, Some((0, 6)), Some((0, 3)));
    let widest = a
        .outcomes
        .iter()
        .any(|o| (o.orders.n, o.orders.m) == (6, 3));
    let a_ok = a.holds(TOL) && widest && a.checked("partial sums telescope");
    let b = Batch::run("sumf", 50, Some((0, 6)), None);
    let b_ok = b.holds(TOL) && b.checked("equals the telescoping sum with a_k = c_k d_k");
    (a_ok && b_ok, format!("{}; {}", a.summary(), b.summary()))
}

fn criterion_5() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (key, n, m, distinct) in [
        ("indm", (0, 4), Some((0, 2)), "six bases pairwise distinct"),
        ("m0", (0, 5), None, "six bases pairwise distinct"),
        ("csn", (0, 5), None, "six bases pairwise distinct"),
        ("ftoa", (1, 5), None, "six bases pairwise distinct"),
        ("dto1", (1, 5), None, "four bases pairwise distinct"),
    ] {
        let b = Batch::run(key, 50, Some(n), m);
        ok &= b.holds(TOL) && b.checked(distinct);
        if key == "ftoa" || key == "dto1" {
            ok &= b.checked("sum vanishes relative to its largest term");
            // n = 0 compares the sum with 1
            let z = Batch::run(key, 10, Some((0, 0)), None);
            ok &= z.holds(TOL);
        }
        parts.push(b.summary());
    }
    (ok, parts.join("; "))
}

fn criterion_6() -> (bool, String) {
    let b = Batch::run("indmrat", 25, None, None);
    let ok = b.holds(1e-35) && b.checked("doubling the truncation depth shrinks the residual");
    // the sampler keeps all twelve base magnitudes in range
    let ctx = PrecisionContext::default();
    let mut in_range = true;
    for i in 0..25 {
        let mut s = Sampler::for_trial(SEED, 1000, i, 256, Default::default());
        let gp = GeomParams::sample_bilateral(&mut s, &ctx).unwrap();
        for (_, base) in gp.pairs() {
            for m in [base.abs_f64(), (&gp.w / &base).abs_f64()] {
                in_range &= (0.2 - 1e-12..=0.85 + 1e-12).contains(&m);
            }
        }
    }
    (
        ok && in_range,
        format!("{}, bases in [0.2, 0.85]: {in_range}", b.summary()),
    )
}

fn criterion_7() -> (bool, String) {
    let b = Batch::run("bilateral_theta", 25, Some((0, 3)), None);
    let k0_exact = b
        .reports()
        .filter(|(o, _)| o.orders.n == 0)
        .all(|(_, r)| r.is_some_and(|r| r.lhs.is_zero() && r.rhs.is_zero()));
    (
        b.holds(TOL) && k0_exact,
        format!("{}, K = 0 exactly 0 = 0: {k0_exact}", b.summary()),
    )
}

fn criterion_8() -> (bool, String) {
    let a = Batch::run("bibasic_delta", 100, Some((0, 6)), None);
    let b = Batch::run("v87_delta", 100, Some((0, 6)), None);
    let ok = a.holds(TOL) && b.holds(TOL) && b.checked("equals the bibasic sum at r = q");
    (ok, format!("{}; {}", a.summary(), b.summary()))
}

fn criterion_9() -> (bool, String) {
    let b = Batch::run("kd", 25, Some((8, 8)), None);
    let ok = b.holds(TOL) && b.checked("BA = I") && b.checked("unit diagonal");
    (ok, format!("{} at N = 8", b.summary()))
}

fn criterion_10() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for key in ["gtf", "ex28", "dD1", "quadbasic", "split_poised"] {
        let b = Batch::run(key, 25, Some((0, 5)), None);
        ok &= b.holds(TOL);
        if key == "split_poised" {
            ok &= b.checked("equals the 12E11 series at argument -1");
        }
        parts.push(b.summary());
    }
    (ok, parts.join("; "))
}

fn criterion_11() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for key in ["quad1", "quad2"] {
        let b = Batch::run(key, 25, Some((0, 3)), None);
        ok &= b.holds(TOL) && b.checked("holds at p = 0 with the basic sum");
        parts.push(b.summary());
    }
    (ok, parts.join("; "))
}

fn criterion_12() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    let knj = Batch::run("knj", 25, Some((0, 3)), Some((0, 5)));
    ok &= knj.holds(TOL);
    parts.push(knj.summary());
    for key in ["gs1", "gs2", "gs3"] {
        let b = Batch::run(key, 25, None, Some((0, 5)));
        ok &= b.holds(TOL);
        ok &= match key {
            "gs2" => b.checked("equals the multibasic expansion at r = s = t = q, C = 1"),
            "gs3" => b.checked("holds with every vector empty"),
            _ => true,
        };
        parts.push(b.summary());
    }
    (ok, parts.join("; "))
}

/// 250 draws each of theta symmetry, the splice law, the p = 0 reductions
/// and the two routes to the very-well-poised quotient.
fn criterion_13() -> (bool, String) {
    let ctx = PrecisionContext::default();
    let prec = ctx.precision_bits();
    let mut s = Sampler::new(SEED, 13, prec, Default::default());
    let mut worst = f64::NEG_INFINITY;
    let mut failures = 0;
    let mut checks = 0;
    let mut record = |a: &Complex, b: &Complex| {
        let (_, l) = scaled_residual(a, b, 0.0);
        worst = worst.max(l);
        checks += 1;
        if l >= TOL.log2() {
            failures += 1;
        }
    };

    for _ in 0..250 {
        let x = s.param();
        let nome = s.nome(&ctx).unwrap();
        let dual = nome.p() / &x;
        record(
            &theta(&x, &nome, &ctx).unwrap(),
            &theta(&dual, &nome, &ctx).unwrap(),
        );
    }

    let mut spliced = 0;
    while spliced < 250 {
        let (a, q) = (s.param(), s.param());
        let nome = s.nome(&ctx).unwrap();
        let n = s.index(13) as i64 - 6;
        let m = s.index(13) as i64 - 6;
        let fac = |x: &Complex, k: i64| qp_factorial(x, &q, &nome, k, &ctx);
        // negative orders can land on a vanishing theta; draw again
        let (Ok(whole), Ok(left), Ok(right)) =
            (fac(&a, n + m), fac(&a, n), fac(&(&a * &q.powi(n)), m))
        else {
            continue;
        };
        record(&whole, &(left * right));
        spliced += 1;
    }

    let zero = Nome::zero(&ctx);
    for i in 0..250 {
        let (a, q) = (s.param(), s.param());
        if i % 2 == 0 {
            record(&theta(&a, &zero, &ctx).unwrap(), &(Complex::one(prec) - &a));
        } else {
            let n = s.index(9) as u32;
            record(
                &qp_factorial(&a, &q, &zero, n as i64, &ctx).unwrap(),
                &q_pochhammer(&a, &q, n),
            );
        }
    }

    for i in 0..250 {
        let (a, q) = (s.param(), s.param());
        let nome = if i % 5 == 0 {
            Nome::zero(&ctx)
        } else {
            s.nome(&ctx).unwrap()
        };
        let n = s.index(7) as u32;
        let v = vwp_quotient(&a, &q, &nome, n, &ctx).unwrap();
        record(&v.theta_route, &v.factorial_route);
    }

    (
        failures == 0 && checks == 1000,
        format!(
            "{checks} property checks, {failures} over tolerance, max {}",
            fmt_log2(worst)
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let suite = Instant::now();
    let mut c = Criteria { lines: Vec::new() };
    let all: [fn() -> (bool, String); 13] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
        criterion_12,
        criterion_13,
    ];
    for (i, f) in all.into_iter().enumerate() {
        let start = Instant::now();
        let (pass, what) = f();
        c.record(i + 1, pass, what, start.elapsed());
    }
    let total = suite.elapsed();
    let in_time = total < Duration::from_secs(300);
    println!(
        "acceptance suite {} in {:.1}s (limit 300s)",
        if in_time { "finished" } else { "overran" },
        total.as_secs_f64()
    );
    let failed: Vec<&str> = c
        .lines
        .iter()
        .filter(|(_, p, _)| !p)
        .map(|(_, _, l)| l.as_str())
        .collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
    assert!(in_time, "acceptance suite took {:.1}s", total.as_secs_f64());
}
