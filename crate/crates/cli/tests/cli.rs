use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn transonic() -> Command {
    Command::new(env!("CARGO_BIN_EXE_transonic"))
}

/// Fresh scratch directory under the target tree, one per test.
fn outdir(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

const SMALL: [&str; 4] = [
    "--override",
    "grid.n_xi=17",
    "--override",
    "grid.n_eta=17",
];

#[test]
fn jump_prints_shock_state() {
    let out = transonic().arg("jump").output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\"u_plus\": 4.9263873977518180e-1"), "{text}");
    assert!(text.contains("\"mass_flux\": 2.0000000000000000e0"), "{text}");
    assert!(text.contains("\"entropy_satisfied\": true"), "{text}");
}

#[test]
fn solve_flat_duct_reports_converged() {
    let dir = outdir("solve_flat");
    let out = transonic()
        .args(["solve", "--out"])
        .arg(&dir)
        .args(SMALL)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));

    let summary = fs::read_to_string(dir.join("summary.json")).unwrap();
    assert!(summary.contains("\"verdict\": \"converged\""), "{summary}");
    assert!(summary.contains("\"iterations\": 0"), "{summary}");

    let field = fs::read_to_string(dir.join("field.csv")).unwrap();
    let mut lines = field.lines();
    assert_eq!(
        lines.next(),
        Some("x1,x2,phi,dphi_dx1,dphi_dx2,density,mach")
    );
    // 17x17 nodes, one row each
    assert_eq!(lines.count(), 17 * 17);
}

#[test]
fn artifacts_are_deterministic() {
    let args = [
        "--override",
        "front.perturb_amp=0.02",
        "--override",
        "front.perturb_modes=2",
        "--override",
        "seed=3",
        "--override",
        "solver.max_outer=120",
    ];
    let mut copies = Vec::new();
    for name in ["det_a", "det_b"] {
        let dir = outdir(name);
        let out = transonic()
            .args(["solve", "--quiet", "--out"])
            .arg(&dir)
            .args(SMALL)
            .args(args)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        copies.push((
            fs::read(dir.join("field.csv")).unwrap(),
            fs::read(dir.join("summary.json")).unwrap(),
        ));
    }
    assert_eq!(copies[0].0, copies[1].0, "field.csv differs between runs");
    assert_eq!(copies[0].1, copies[1].1, "summary.json differs between runs");
}

#[test]
fn bad_input_is_a_usage_error() {
    let dir = outdir("bad_input");
    let cases: [&[&str]; 4] = [
        &["solve", "--override", "bogus.key=1"],
        &["solve", "--override", "grid.n_xi=three"],
        &["solve", "--override", "no-equals-sign"],
        &["solve", "--config", "/nonexistent/run.conf"],
    ];
    for args in cases {
        let out = transonic().args(args).arg("--out").arg(&dir).output().unwrap();
        assert_eq!(out.status.code(), Some(1), "args {args:?}");
        assert!(!out.stderr.is_empty(), "args {args:?}");
    }
}

#[test]
fn config_file_is_applied() {
    let dir = outdir("config_file");
    let conf = dir.join("run.conf");
    fs::write(
        &conf,
        "# coarse smoke run\ngrid.n_xi = 17\ngrid.n_eta = 17\nfront.t0 = 0.25\n",
    )
    .unwrap();
    let out = transonic()
        .args(["solve", "--quiet", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let summary = fs::read_to_string(dir.join("summary.json")).unwrap();
    assert!(summary.contains("\"front_mean\": 2.5000000000000000e-1"), "{summary}");
}

#[test]
fn expectation_gates_the_exit_code() {
    let dir = outdir("expect");
    let out = transonic()
        .args(["solve", "--quiet", "--override", "expect=nosolution", "--out"])
        .arg(&dir)
        .args(SMALL)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // the reported verdict must round-trip as a satisfied expectation
    let summary = fs::read_to_string(dir.join("summary.json")).unwrap();
    let verdict = summary
        .split("\"verdict\": \"")
        .nth(1)
        .and_then(|s| s.split('"').next())
        .unwrap();
    let out = transonic()
        .args(["solve", "--quiet", "--out"])
        .arg(&dir)
        .args(SMALL)
        .arg("--override")
        .arg(format!("expect={verdict}"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn theorem_sweep_writes_expected_table() {
    let dir = outdir("theorem");
    let out = transonic()
        .args(["verify-theorem", "--quiet", "--out"])
        .arg(&dir)
        .args(SMALL)
        .args([
            "--override",
            "front.perturb_amp=0.02",
            "--override",
            "front.perturb_modes=2",
            "--override",
            "solver.max_outer=120",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));

    let table = fs::read_to_string(dir.join("theorem15.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(
        lines.next(),
        Some("c1,perturb_amp,perturb_modes,verdict,iters,final_flatness,front_mean,mean_residual,osc_residual")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    let converged: Vec<&&str> = rows.iter().filter(|r| r.contains(",converged,")).collect();
    assert_eq!(converged.len(), 1, "{table}");
    // only the matched exit speed admits a shock
    assert!(converged[0].starts_with("4.9263873977518180e-1,"), "{table}");
    assert_eq!(rows.iter().filter(|r| r.contains(",no_solution,")).count(), 4);
}

#[test]
fn long_duct_writes_decay_profile() {
    let dir = outdir("long_duct");
    let out = transonic()
        .args(["long-duct", "--quiet", "--out"])
        .arg(&dir)
        .args([
            "--override",
            "duct.l_list=4",
            "--override",
            "grid.n_xi=33",
            "--override",
            "grid.n_eta=17",
            "--override",
            "front.perturb_amp=0.01",
            "--override",
            "front.perturb_modes=2",
            "--override",
            "solver.max_outer=120",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));

    let table = fs::read_to_string(dir.join("oscillation.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("run_id,x1,osc"));
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.starts_with("L4,")), "{table}");
}

#[test]
fn compare_emits_diagnostics() {
    let args = [
        "--override",
        "front.perturb_amp=0.02",
        "--override",
        "front.perturb_modes=2",
        "--override",
        "solver.max_outer=120",
    ];
    let mut copies = Vec::new();
    for name in ["compare_a", "compare_b"] {
        let dir = outdir(name);
        let out = transonic()
            .args(["compare", "--quiet", "--out"])
            .arg(&dir)
            .args(SMALL)
            .args(args)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));

        let extrema = fs::read_to_string(dir.join("extrema.csv")).unwrap();
        assert!(extrema.starts_with("run_id,kind,tag,i,j,value\n"), "{extrema}");
        let ortho = fs::read_to_string(dir.join("orthogonality.csv")).unwrap();
        assert!(ortho.starts_with("run_id,h,slope_wall0,slope_wall1\n"), "{ortho}");
        assert_eq!(ortho.lines().count(), 2);
        let osc = fs::read_to_string(dir.join("oscillation.csv")).unwrap();
        assert!(osc.starts_with("run_id,x1,osc\n"), "{osc}");
        copies.push((extrema, ortho, osc));
    }
    assert_eq!(copies[0], copies[1], "diagnostics differ between runs");
}

#[test]
fn env_var_sets_output_directory() {
    let env_dir = outdir("env_out");
    let out = transonic()
        .args(["solve", "--quiet"])
        .args(SMALL)
        .env("TRANSONIC_OUT", &env_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(env_dir.join("summary.json").is_file());

    // an explicit --out wins over the environment
    let flag_dir = outdir("flag_out");
    let out = transonic()
        .args(["solve", "--quiet", "--out"])
        .arg(&flag_dir)
        .args(SMALL)
        .env("TRANSONIC_OUT", &env_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(flag_dir.join("field.csv").is_file());
}
