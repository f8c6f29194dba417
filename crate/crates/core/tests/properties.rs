use std::f64::consts::TAU;

use proptest::prelude::*;
use thetaseries::basic::q_pochhammer;
use thetaseries::expansions::{verify_gs1, ExpansionCoefficients, ExpansionParams};
use thetaseries::identities::scaled_residual;
use thetaseries::identities::transforms::{verify_ex28, verify_gtf, FourBasePair, GtfParams};
use thetaseries::sampling::Sampler;
use thetaseries::series::{
    e_term, is_e_balanced, v_sum, vwp_embed, ESeriesSpec, Upper, VSeriesSpec,
};
use thetaseries::suite::{run_trial, RunConfig};
use thetaseries::theta::{generalized_product, qp_factorial, theta};
use thetaseries::{Complex, Nome, PrecisionContext};

const TOL_LOG2: f64 = -132.9; // 1e-40

fn ctx() -> PrecisionContext {
    PrecisionContext::default()
}

fn param() -> impl Strategy<Value = Complex> {
    (0.3f64..1.7, 0.0..TAU).prop_map(|(m, a)| Complex::from_polar_f64(m, a, 256))
}

fn nome_value() -> impl Strategy<Value = Complex> {
    (0.05f64..0.5, 0.0..TAU).prop_map(|(m, a)| Complex::from_polar_f64(m, a, 256))
}

fn close(a: &Complex, b: &Complex) -> bool {
    scaled_residual(a, b, 0.0).1 < TOL_LOG2
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_is_symmetric_under_x_to_p_over_x(x in param(), p in nome_value()) {
        let c = ctx();
        let nome = Nome::new(p.clone(), &c).unwrap();
        let dual = &p / &x;
        prop_assert!(close(&theta(&x, &nome, &c).unwrap(), &theta(&dual, &nome, &c).unwrap()));
    }

    #[test]
    fn theta_vanishes_on_powers_of_the_nome(p in nome_value(), j in -2i64..=2) {
        let c = ctx();
        let nome = Nome::new(p.clone(), &c).unwrap();
        prop_assert!(theta(&p.powi(j), &nome, &c).unwrap().is_zero());
    }

    #[test]
    fn zero_nome_reduces_to_basic_products(a in param(), q in param(), n in 0u32..9) {
        let c = ctx();
        let zero = Nome::zero(&c);
        let one = Complex::one(256);
        prop_assert!((theta(&a, &zero, &c).unwrap() - (&one - &a)).is_zero());
        let f = qp_factorial(&a, &q, &zero, n as i64, &c).unwrap();
        prop_assert!(close(&f, &q_pochhammer(&a, &q, n)));
    }

    #[test]
    fn factorials_splice(
        a in param(),
        q in param(),
        p in nome_value(),
        n in -6i64..=6,
        m in -6i64..=6,
    ) {
        let c = ctx();
        let nome = Nome::new(p, &c).unwrap();
        let fac = |x: &Complex, k| qp_factorial(x, &q, &nome, k, &c);
        let whole = fac(&a, n + m);
        let parts = fac(&a, n).and_then(|l| Ok(l * fac(&(&a * &q.powi(n)), m)?));
        // a negative order can meet a vanishing theta; skip those draws
        if let (Ok(w), Ok(s)) = (whole, parts) {
            prop_assert!(close(&w, &s));
        }
    }

    #[test]
    fn negative_order_factorial_is_one_reciprocal_theta(
        a in param(),
        q in param(),
        p in nome_value(),
    ) {
        let c = ctx();
        let nome = Nome::new(p, &c).unwrap();
        let f = qp_factorial(&a, &q, &nome, -1, &c).unwrap();
        let th = theta(&(&a / &q), &nome, &c).unwrap();
        prop_assert!(close(&(f * th), &Complex::one(256)));
    }

    #[test]
    fn reversed_generalized_products_cancel(
        a in param(),
        q in param(),
        p in nome_value(),
        m in -5i64..=5,
        n in -5i64..=5,
    ) {
        let c = ctx();
        let nome = Nome::new(p, &c).unwrap();
        let f = |k: i64| theta(&(&a * &q.powi(k)), &nome, &c).unwrap();
        let fwd = generalized_product(f, m, n, 256);
        let back = generalized_product(f, n + 1, m - 1, 256);
        if let (Ok(x), Ok(y)) = (fwd, back) {
            prop_assert!(close(&(x * y), &Complex::one(256)));
        }
    }

    #[test]
    fn embedded_vwp_series_is_balanced_exactly_when_its_tail_is(
        a1 in param(),
        q in param(),
        p in nome_value(),
        t1 in param(),
        t2 in param(),
        t3 in param(),
        detune in prop::bool::ANY,
    ) {
        let c = ctx();
        let nome = Nome::new(p, &c).unwrap();
        // (t1 t2 t3 t4)^2 q^2 = (a1 q)^3 fixes t4 up to sign
        let prod = &t1 * &t2 * &t3;
        let t4 = ((&a1 * &q).powi(3) / (&prod * &prod * &q * &q)).sqrt();
        let t4 = if detune { &t4 * &Complex::from_f64(1.01, 0.0, 256) } else { t4 };
        let v = VSeriesSpec::new(a1, vec![t1, t2, t3, t4], q, nome);
        let e = vwp_embed(&v).unwrap();
        prop_assert_eq!(is_e_balanced(&e, &c), !detune);
    }

    #[test]
    fn vwp_sum_is_symmetric_in_its_tail(
        a1 in param(),
        q in param(),
        p in nome_value(),
        tail in prop::collection::vec(param(), 3),
        n in 0u32..5,
    ) {
        let c = ctx();
        let nome = Nome::new(p, &c).unwrap();
        let mut rev = tail.clone();
        rev.reverse();
        let sum = |t: Vec<Complex>| {
            v_sum(&VSeriesSpec::new(a1.clone(), t, q.clone(), nome.clone()), Upper::Cutoff(n), &c)
                .map(|s| s.value)
        };
        if let (Ok(x), Ok(y)) = (sum(tail), sum(rev)) {
            prop_assert!(close(&x, &y));
        }
    }

    #[test]
    fn e_terms_at_zero_nome_are_basic_summands(
        nums in prop::collection::vec(param(), 3),
        dens in prop::collection::vec(param(), 2),
        q in param(),
        z in param(),
        n in 0u32..=8,
    ) {
        let c = ctx();
        let spec = ESeriesSpec::new(nums.clone(), dens.clone(), q.clone(), Nome::zero(&c), z.clone())
            .unwrap();
        if let Ok(term) = e_term(&spec, n, &c) {
            let mut basic = z.powi(n as i64) / q_pochhammer(&q, &q, n);
            for a in &nums {
                basic = basic * q_pochhammer(a, &q, n);
            }
            for b in &dens {
                basic = basic / q_pochhammer(b, &q, n);
            }
            prop_assert!(close(&term, &basic));
        }
    }

    #[test]
    fn terms_past_a_terminating_parameter_vanish(
        a in param(),
        b in param(),
        q in param(),
        p in nome_value(),
        order in 0i64..5,
    ) {
        let c = ctx();
        let nome = Nome::new(p, &c).unwrap();
        let qn = q.powi(-order);
        let one = Complex::one(256);
        let spec = ESeriesSpec::new(vec![a, qn], vec![b], q, nome, one).unwrap();
        for k in order as u32 + 1..order as u32 + 4 {
            if let Ok(t) = e_term(&spec, k, &c) {
                prop_assert!(t.is_zero());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn two_nome_transformations_swap_sides(stream in any::<u64>(), n in 0u32..4) {
        let c = ctx();
        let mut s = Sampler::new(11, stream, 256, Default::default());
        let g = GtfParams::sample(&mut s, &c, n).unwrap();
        let swapped = GtfParams {
            lower: g.upper.clone(),
            upper: g.lower.clone(),
            p: g.big_p.clone(),
            big_p: g.p.clone(),
        };
        let (x, y) = (verify_gtf(&g, &c).unwrap(), verify_gtf(&swapped, &c).unwrap());
        prop_assert!(close(&x.lhs, &y.rhs) && close(&x.rhs, &y.lhs));

        if let Ok(f) = FourBasePair::sample(&mut s, &c, n) {
            let swapped = FourBasePair { lower: f.upper.clone(), upper: f.lower.clone() };
            if let (Ok(x), Ok(y)) = (verify_ex28(&f, &c), verify_ex28(&swapped, &c)) {
                // the prefactor inverts under the swap, so the products of
                // the two reports' sides agree
                prop_assert!(x.all_pass() && y.all_pass());
                prop_assert!(close(&(&x.lhs * &y.lhs), &(&x.rhs * &y.rhs)));
            }
        }
    }

    #[test]
    fn expansions_are_linear_in_the_expanded_sequence(
        stream in any::<u64>(),
        support in 0usize..4,
        scale in param(),
    ) {
        let c = ctx();
        let mut s = Sampler::new(12, stream, 256, Default::default());
        let coeffs = ExpansionCoefficients::sample(&mut s, support);
        let params = ExpansionParams::sample(&mut s, &c).unwrap();
        let scaled = ExpansionCoefficients::new(
            coeffs.a.iter().map(|x| x * &scale).collect(),
            coeffs.b.clone(),
            coeffs.c.clone(),
        )
        .unwrap();
        let x = verify_gs1(&coeffs, &params, &c).unwrap();
        let y = verify_gs1(&scaled, &params, &c).unwrap();
        prop_assert_eq!(x.all_pass(), y.all_pass());
        prop_assert!(close(&(&x.lhs * &scale), &y.lhs));
    }

    #[test]
    fn more_precision_never_loosens_a_residual(trial in 0u32..50, pick in 0usize..6) {
        let key = ["ft109", "ft1211", "indm", "dto1", "kd", "quad1"][pick];
        let report = |bits| {
            let cfg = RunConfig { trials: 1, seed: 3, precision_bits: bits, ..RunConfig::new(key).unwrap() };
            let ctx = cfg.validate().unwrap();
            run_trial(cfg.identities[0], &cfg, &ctx, trial).result.unwrap()
        };
        let (lo, hi) = (report(256), report(384));
        prop_assert!(hi.residual_log2 <= lo.residual_log2 + 1.0);
    }
}
