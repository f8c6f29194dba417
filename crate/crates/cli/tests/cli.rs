use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thetaseries"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Real and imaginary parts printed by `eval`.
fn eval(args: &[&str]) -> (f64, f64) {
    let mut full = vec!["eval"];
    full.extend_from_slice(args);
    let o = run(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let part = |tag: &str| -> f64 {
        out.lines()
            .find_map(|l| l.strip_prefix(tag))
            .unwrap()
            .parse()
            .unwrap()
    };
    (part("re = "), part("im = "))
}

#[test]
fn list_shows_whole_catalog() {
    let o = run(&["list"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let ids: Vec<&str> = out
        .lines()
        .filter(|l| !l.starts_with(' '))
        .filter_map(|l| l.split_whitespace().next())
        .collect();
    assert_eq!(ids.len(), 28);
    assert!(ids.contains(&"ft109"));
    assert!(ids.contains(&"split_poised"));
    assert!(ids.contains(&"kd"));
}

#[test]
fn json_reports_are_byte_identical() {
    let dir = std::env::temp_dir();
    let paths: Vec<_> = (0..2)
        .map(|i| dir.join(format!("thetaseries-cli-{}-{i}.json", std::process::id())))
        .collect();
    for p in &paths {
        let o = run(&[
            "verify",
            "ft109",
            "--trials",
            "1",
            "--seed",
            "7",
            "--no-timing",
            "--json",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    let b = std::fs::read(&paths[1]).unwrap();
    for p in &paths {
        let _ = std::fs::remove_file(p);
    }
    assert_eq!(a, b);

    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    for key in [
        "version",
        "seed",
        "precision_bits",
        "tolerance",
        "identities",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let rec = &v["identities"][0];
    assert_eq!(rec["id"], "ft109");
    assert!(rec["max_residual"].is_string());
    assert_eq!(rec["pass"], true);
    assert!(v.get("wall_seconds").is_none());
}

#[test]
fn timing_is_reported_by_default() {
    let o = run(&["verify", "ft109n1", "--trials", "1", "--json", "-"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["wall_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["verify", "all", "--trials", "0"][..],
        &["verify", "not_an_identity"],
        &["verify", "ft109", "--n-max", "-1"],
        &["verify", "ft109", "--p-max", "1.5"],
        &["verify", "ft109", "--bogus"],
        &["eval", "theta", "x=0.5"],
        &["eval", "gamma", "x=1"],
        &[],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn domain_errors_exit_with_one() {
    assert_eq!(
        run(&["eval", "theta", "x=0.5", "p=1.5"]).status.code(),
        Some(1)
    );
}

#[test]
fn tolerance_below_precision_floor_is_rejected() {
    let o = run(&["verify", "ft109", "--prec-bits", "64", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tolerance"));
}

#[test]
fn eval_examples() {
    assert_eq!(eval(&["theta", "x=0.5", "p=0"]), (0.5, 0.0));
    let (re, im) = eval(&["qpfact", "a=0.3", "q=0.5", "p=0", "n=2"]);
    assert!((re - 0.595).abs() < 1e-15 && im == 0.0);
}

#[test]
fn terminating_vwp_sum_matches_closed_form() {
    // bcde = a^2 q^3 with n = 2
    let (a, b, c, d, e) = ("0.8", "0.5", "1.6", "0.32", "0.3125");
    let (q, p, n) = ("0.5", "0.15", "2");
    let tail = format!("{b},{c},{d},{e},4");
    let (lhs, lhs_im) = eval(&[
        "vseries",
        &format!("a1={a}"),
        &format!("tail={tail}"),
        &format!("q={q}"),
        &format!("p={p}"),
    ]);
    let fac = |x: f64| {
        eval(&[
            "qpfact",
            &format!("a={x}"),
            &format!("q={q}"),
            &format!("p={p}"),
            &format!("n={n}"),
        ])
        .0
    };
    let (af, bf, cf, df) = (0.8, 0.5, 1.6, 0.32);
    let aq = af * 0.5;
    let rhs = fac(aq) * fac(aq / (bf * cf)) * fac(aq / (bf * df)) * fac(aq / (cf * df))
        / (fac(aq / bf) * fac(aq / cf) * fac(aq / df) * fac(aq / (bf * cf * df)));
    assert!(lhs_im.abs() < 1e-14);
    assert!(
        (lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0),
        "{lhs} vs {rhs}"
    );
}
