//! End-to-end CLI tests: argument handling, exit codes, CSV output.

use std::process::{Command, Output};

fn shrinklim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shrinklim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn help_exits_zero_everywhere() {
    for sub in ["rn", "lt", "gn", "fit", "simulate", "limit", "converge"] {
        let out = shrinklim(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub} --help");
        assert!(stdout(&out).contains("--"), "{sub} --help documents flags");
    }
    assert_eq!(shrinklim(&["--help"]).status.code(), Some(0));
}

#[test]
fn rn_exponential_rule_values() {
    let out = shrinklim(&[
        "rn", "--rule", "exp", "--a", "2", "--lambda", "1", "--n", "200",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    let mut cols = row.split(',');
    assert_eq!(cols.next().unwrap(), "200");
    let r: f64 = cols.next().unwrap().parse().unwrap();
    assert!((r - 100.0f64.ln()).abs() < 1e-12, "{r}");
}

#[test]
fn rn_rejects_n_at_or_below_a() {
    let out = shrinklim(&[
        "rn", "--rule", "exp", "--a", "2", "--lambda", "1", "--n", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn rn_half_normal_satisfies_defining_equation() {
    let out = shrinklim(&["rn", "--rule", "halfnormal", "--c", "1", "--n", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let r: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    let k = (2.0 / std::f64::consts::PI).sqrt() * r.powi(-2) * (-0.5 * r * r).exp();
    assert!((100.0 * k - 1.0).abs() <= 1e-8, "r = {r}");
}

#[test]
fn rn_missing_parameter_is_usage_error() {
    let out = shrinklim(&["rn", "--rule", "exp", "--a", "2", "--n", "10"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = shrinklim(&["rn", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn limit_transform_values() {
    let out = shrinklim(&["limit", "--cpe", "--a", "2", "--lambda", "1", "--t", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("0,1"));

    let out = shrinklim(&["limit", "--degenerate", "--c", "1", "--t", "1"]);
    let text = stdout(&out);
    let v: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((v - (-1.0f64).exp()).abs() < 1e-12);

    // large t approaches the atom e^{-2}
    let out = shrinklim(&["limit", "--cpe", "--a", "2", "--lambda", "1", "--t", "1e9"]);
    let text = stdout(&out);
    let v: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((v - 0.135335).abs() < 1e-5, "{v}");
}

#[test]
fn limit_variant_required_and_exclusive() {
    assert_eq!(shrinklim(&["limit", "--t", "1"]).status.code(), Some(1));
    assert_eq!(
        shrinklim(&[
            "limit",
            "--cpe",
            "--degenerate",
            "--a",
            "2",
            "--lambda",
            "1",
            "--c",
            "1"
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn lt_matches_closed_form() {
    let out = shrinklim(&[
        "lt", "--dist", "exp", "--rate", "1", "--rule", "exp", "--a", "2", "--lambda", "1", "--n",
        "100000", "--t", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let v: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    // close to the limit transform e^{-2 t/(1+t)} = e^{-1} at t = 1
    assert!((v - (-1.0f64).exp()).abs() < 5e-5, "{v}");
}

#[test]
fn gn_csv_total_mass() {
    let out = shrinklim(&[
        "gn", "--dist", "exp", "--rate", "1", "--rule", "exp", "--a", "2", "--lambda", "1", "--n",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mass_line = text
        .lines()
        .find(|l| l.starts_with("# total_mass,"))
        .unwrap();
    let mass: f64 = mass_line.rsplit(',').next().unwrap().parse().unwrap();
    assert!((mass - 1.0).abs() < 1e-8, "{mass}");
    assert!(text.contains("x,value"));
}

#[test]
fn fit_roundtrip_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    let mut body = String::from("x,value\n");
    let mut u = 0.05f64;
    while u <= 8.0 {
        body.push_str(&format!(
            "{},{}\n",
            u,
            -2.0 * ((-u).exp() - (-1.0f64).exp())
        ));
        u += 0.05;
    }
    std::fs::write(&path, body).unwrap();
    let out = shrinklim(&["fit", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("family,exp"), "{text}");
    let alpha: f64 = text
        .lines()
        .find(|l| l.starts_with("alpha,"))
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((alpha + 2.0).abs() < 1e-5, "{alpha}");
}

#[test]
fn simulate_is_seed_deterministic() {
    let args = [
        "simulate", "--dist", "exp", "--rate", "1", "--rule", "exp", "--a", "2", "--lambda", "1",
        "--n", "1000", "--m", "200", "--seed", "7",
    ];
    let a = shrinklim(&args);
    let b = shrinklim(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 202); // comment + header + 200 rows
}

#[test]
fn converge_rejects_zero_m() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(
        &config,
        "[distribution]\nkind = \"exponential\"\nrate = 1.0\n\n\
         [norming]\nrule = \"exponential\"\na = 2.0\nlambda = 1.0\n\n\
         [limit]\nkind = \"degenerate\"\nc = 1.0\n\n\
         [run]\nn_list = [100]\nm = 0\nseed = 1\n",
    )
    .unwrap();
    let out = shrinklim(&["converge", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn converge_labels_failed_rows_with_exit_two() {
    // n = 1 violates the exponential rule's n > a precondition; the report
    // is still written with the failure recorded in a comment
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("partial.toml");
    std::fs::write(
        &config,
        "[distribution]\nkind = \"exponential\"\nrate = 1.0\n\n\
         [norming]\nrule = \"exponential\"\na = 2.0\nlambda = 1.0\n\n\
         [limit]\nkind = \"compound_poisson_exp\"\nintensity = 2.0\nrate = 1.0\n\n\
         [run]\nn_list = [1, 100]\nm = 50\nseed = 1\n",
    )
    .unwrap();
    let report = dir.path().join("report.csv");
    let out = shrinklim(&[
        "converge",
        "--config",
        config.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("# error,n=1,"), "{text}");
    assert!(text.contains("n,lt_sup,ks,zero_atom_gap,gn_mass"));
}

#[test]
fn converge_example_configs_run_clean() {
    let root = env!("CARGO_MANIFEST_DIR");
    for (config, check) in [("example1.toml", "monotone"), ("example2.toml", "final")] {
        let path = format!("{root}/../../configs/{config}");
        let out = shrinklim(&["converge", "--config", &path]);
        assert_eq!(out.status.code(), Some(0), "{config}");
        let text = stdout(&out);
        let lts: Vec<f64> = text
            .lines()
            .skip_while(|l| !l.starts_with("n,"))
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(lts.len(), 3, "{config}");
        match check {
            "monotone" => assert!(lts.windows(2).all(|w| w[1] < w[0]), "{config}: {lts:?}"),
            _ => assert!(lts[2] <= 0.05, "{config}: {lts:?}"),
        }
    }
}
