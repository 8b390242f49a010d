use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command as Process;

use dito::{command, keys_for, resolve, Command, RunArgs, RunConfig, KEYS};

fn dito(args: &[&str], out: &Path) -> (i32, String, String) {
    let o = Process::new(env!("CARGO_BIN_EXE_dito")).args(args).arg("--out").arg(out).output().unwrap();
    (o.status.code().unwrap(), String::from_utf8(o.stdout).unwrap(), String::from_utf8(o.stderr).unwrap())
}

fn summary_value(summary: &str, key: &str) -> f64 {
    summary
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in summary"))
        .parse()
        .unwrap()
}

// Keys listed in a subcommand's rendered help.
fn help_keys(cmd: Command) -> BTreeSet<String> {
    let mut c = command();
    let sub = c.find_subcommand_mut(cmd.name()).unwrap();
    let help = sub.render_long_help().to_string();
    let section = help.split("Keys (").nth(1).expect("help lists keys");
    section
        .lines()
        .skip(1)
        .take_while(|l| l.starts_with("  "))
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect()
}

#[test]
fn help_and_parser_agree_on_keys() {
    for cmd in Command::ALL {
        let listed = help_keys(cmd);
        let accepted: BTreeSet<String> = keys_for(cmd).map(|k| k.name.to_string()).collect();
        assert_eq!(listed, accepted, "{}", cmd.name());
        for key in KEYS {
            let mut config = RunConfig::defaults(cmd);
            let result = config.set(key.name, key.default);
            assert_eq!(result.is_ok(), listed.contains(key.name), "{} {}", cmd.name(), key.name);
        }
    }
}

#[test]
fn unknown_keys_exit_2_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = dito(&["estimate", "volatility=0.3"], dir.path());
    assert_eq!(code, 2);
    assert!(err.contains("volatility"));
    let (code, _, err) = dito(&["solve", "samples=10"], dir.path());
    assert_eq!(code, 2);
    assert!(err.contains("samples"));
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "# comment\nsteps=4\nsteps=5\n").unwrap();
    let (code, _, err) = dito(&["solve", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code, 2);
    assert!(err.contains("steps"));
    let (code, _, err) = dito(&["converge", "driver=laplace"], dir.path());
    assert_eq!(code, 2);
    assert!(err.contains("driver"));
}

#[test]
fn numerical_and_budget_failures_have_their_own_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) =
        dito(&["estimate", "field=em-gbm", "sigma=1e200", "x0=1e200", "steps=4", "samples=64"], dir.path());
    assert_eq!(code, 3);
    let (code, _, err) = dito(&["solve", "driver=trinomial", "steps=12", "node_budget=10"], dir.path());
    assert_eq!(code, 4, "{err}");
}

#[test]
fn bernoulli_identity_decomposes_into_one_martingale_term() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = dito(&["decompose", "--preset", "bernoulli-linear"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(summary_value(&out, "martingale_1"), 1.0);
    assert_eq!(summary_value(&out, "corrections"), 0.0);
    let table = std::fs::read_to_string(dir.path().join("decomposition.csv")).unwrap();
    assert!(!table.contains("correction,"));
}

#[test]
fn trinomial_solve_matches_hand_enumeration() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = dito(&["solve", "--preset", "trinomial-solve"], dir.path());
    assert_eq!(code, 0);
    // 27 paths of X_{k+1} = X_k (1 + 0.05 Δt + 0.2 y √Δt), Δt = 1/3.
    let (dt, pts, w) = (1.0f64 / 3.0, [-1.5f64.sqrt(), 0.0, 1.5f64.sqrt()], [1.0 / 3.0; 3]);
    let call = |x: f64| 0.2 * ((x - 1.0) / 0.2).exp().ln_1p();
    let mut oracle = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let x = [a, b, c].iter().fold(1.0, |x, &i| x * (1.0 + 0.05 * dt + 0.2 * pts[i] * dt.sqrt()));
                oracle += w[a] * w[b] * w[c] * call(x);
            }
        }
    }
    assert!((summary_value(&out, "root_value") - oracle).abs() < 1e-12);
}

#[test]
fn audit_file_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(dito(&["simulate", "--preset", "gbm-paths", "--seed", "99", "sampler=sobol"], &a).0, 0);
    let audit = a.join("config.txt");
    assert!(std::fs::read_to_string(&audit).unwrap().contains("seed=99\n"));
    assert_eq!(dito(&["simulate", "--config", audit.to_str().unwrap(), "--threads", "1"], &b).0, 0);
    for f in ["config.txt", "paths.csv", "summary.txt"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn layers_apply_in_order() {
    let args = RunArgs {
        preset: Some("walsh-100d".into()),
        settings: vec!["samples=1024".into()],
        seed: Some(5),
        ..RunArgs::default()
    };
    let c = resolve(Command::Estimate, &args).unwrap();
    assert_eq!((c.get("dimension"), c.get("samples"), c.get("seed")), ("100", "1024", "5"));
    let wrong = RunArgs { preset: Some("walsh-100d".into()), ..RunArgs::default() };
    assert_eq!(resolve(Command::Solve, &wrong).unwrap_err().exit_code(), 2);
}

#[test]
fn catalog_lists_the_documented_ids() {
    let text = dito::catalog_listing();
    for id in [
        "bernoulli",
        "trinomial",
        "trinomial-3pt-120deg",
        "walsh-n",
        "gaussian",
        "em-gbm",
        "em-identity",
        "walk",
        "quad",
        "smooth-call",
        "mean-square-100d",
        "cubic-sum",
        "linear",
    ] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(id)), "{id}");
    }
}
