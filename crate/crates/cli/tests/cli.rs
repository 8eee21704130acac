use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

fn mstein(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mstein"));
    cmd.args(args).env_remove("SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn hyperbolic(out: &Path, extra: &str) -> String {
    format!(
        "[run]\nexperiment = couple\nseed = 7\noutput = {}\n\n[manifold]\nkind = hyperbolic\ndim = 2\n\n\
         [potential]\nfamily = sq_dist\nc = 1\nkappa = 0.5\n\n[sde]\nstep = 0.01\nhorizon = 3\n\n\
         [couple]\nruns = 60\nx0 = 1.118033988749895, 0.5, 0\ny0 = 1.118033988749895, -0.5, 0\n{extra}",
        out.display()
    )
}

fn csv_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn selftest_passes_quickly_and_reports_clean() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("st");
    let start = Instant::now();
    let o = mstein(&["selftest", "--output", out.to_str().unwrap()], &[]);
    assert!(start.elapsed().as_secs() < 60);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = mstein(&["report", out.to_str().unwrap()], &[]);
    assert_eq!(code(&r), 0);
    let table = String::from_utf8(r.stdout).unwrap();
    assert_eq!(table.lines().count(), 1 + 11);
    assert!(table.lines().skip(1).all(|l| l.ends_with("PASS")));
}

#[test]
fn selftest_experiment_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = write_config(
        dir.path(),
        "s.ini",
        &format!("[run]\nexperiment = selftest\nseed = 3\noutput = {}\n[checks]\nenabled = w1_metric, haar_constant\n", out.display()),
    );
    assert_eq!(code(&mstein(&["run", &cfg], &[])), 0);
    assert_eq!(csv_rows(&out.join("checks.csv")).len(), 1 + 2);
}

#[test]
fn report_needs_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&mstein(&["report", dir.path().to_str().unwrap()], &[])), 2);
    assert_eq!(code(&mstein(&["report", dir.path().join("missing").to_str().unwrap()], &[])), 2);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let good = hyperbolic(&out, "");
    for (name, body) in [
        ("noseed.ini", good.replace("seed = 7\n", "")),
        ("kind.ini", good.replace("kind = hyperbolic", "kind = torus")),
        ("family.ini", good.replace("family = sq_dist", "family = nope")),
        ("check.ini", hyperbolic(&out, "[checks]\nenabled = no_such_check\n")),
        ("point.ini", good.replace("x0 = 1.118033988749895", "x0 = 3")),
        ("runs.ini", good.replace("runs = 60", "runs = 5")),
    ] {
        let o = mstein(&["run", &write_config(dir.path(), name, &body)], &[]);
        assert_eq!(code(&o), 2, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(code(&mstein(&["run", dir.path().join("absent.ini").to_str().unwrap()], &[])), 2);
    let cfg = write_config(dir.path(), "ok.ini", &good);
    assert_eq!(code(&mstein(&["run", &cfg], &[("SEED", "x")])), 2);
    assert_eq!(code(&mstein(&["frobnicate"], &[])), 2);
}

#[test]
fn hyperbolic_couple_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut decays = Vec::new();
    for (i, threads) in ["1", "4", "4"].iter().enumerate() {
        let out = dir.path().join(format!("o{i}"));
        let cfg = write_config(dir.path(), &format!("h{i}.ini"), &hyperbolic(&out, "[checks]\nenabled = mean_decay, decay_rate\n"));
        let o = mstein(&["run", &cfg], &[("RAYON_NUM_THREADS", threads)]);
        assert!(code(&o) <= 1, "{}", String::from_utf8_lossy(&o.stderr));
        decays.push(fs::read(out.join("decay.csv")).unwrap());
        let rows = csv_rows(&out.join("decay.csv"));
        assert_eq!(rows[0], "t,mean_dist,stderr,mode_fraction");
        assert_eq!(rows.len(), 1 + 301);
        assert_eq!(csv_rows(&out.join("checks.csv")).len(), 1 + 2);
        let svg = fs::read_to_string(out.join("plots/decay.svg")).unwrap();
        assert!(svg.contains("<polyline") && svg.contains("exp(-0.5 t)"));
    }
    assert_eq!(decays[0], decays[1]);
    assert_eq!(decays[1], decays[2]);
}

#[test]
fn failing_check_exits_one_and_is_listed() {
    // The pathwise envelope is violated by the discretised coupling on H².
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = write_config(dir.path(), "h.ini", &hyperbolic(&out, "[checks]\nenabled = pathwise_decay\n"));
    let o = mstein(&["run", &cfg], &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("check failed: pathwise_decay"));
    let r = mstein(&["report", out.to_str().unwrap()], &[]);
    assert_eq!(code(&r), 1);
    assert!(String::from_utf8(r.stdout).unwrap().contains("FAIL"));
}

#[test]
fn seed_override_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: Option<&str>| {
        let out = dir.path().join(name);
        let cfg = write_config(
            dir.path(),
            &format!("{name}.ini"),
            &format!(
                "[run]\nexperiment = compare\nseed = 1\noutput = {}\n[manifold]\nkind = circle\n\
                 [potential]\nfamily = von_mises\nc = 1\nkappa = 0.5\n[compare]\nn = 64\n",
                out.display()
            ),
        );
        let envs: Vec<(&str, &str)> = seed.map(|s| vec![("SEED", s)]).unwrap_or_default();
        let o = mstein(&["run", &cfg], &envs);
        assert!(code(&o) <= 1);
        fs::read(out.join("samples_exact.csv")).unwrap()
    };
    let base = run("a", None);
    assert_eq!(base, run("b", Some("1")));
    assert_ne!(base, run("c", Some("2")));
    let text = String::from_utf8(base).unwrap();
    assert!(text.starts_with("kind=circle,dim=1,provenance=exact_sampler"));
}

#[test]
fn bound_experiment_reproduces_haar_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = write_config(
        dir.path(),
        "b.ini",
        &format!(
            "[run]\nexperiment = bound\nseed = 2\noutput = {}\n[bound]\nkinds = haar, so_uniform\nc = 0.25\nkappa = 0.125\ndraws = 40000\nn = 64\nreps = 4\n",
            out.display()
        ),
    );
    let o = mstein(&["run", &cfg], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("bounds.json")).unwrap()).unwrap();
    let reports = json.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    for r in reports {
        let mut keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort();
        assert_eq!(keys, ["bound", "empirical", "inputs", "name", "pass", "stderr"]);
        assert_eq!(r["pass"], true);
    }
    let haar = &reports[0];
    let (mean, se) = (haar["empirical"].as_f64().unwrap(), haar["stderr"].as_f64().unwrap());
    assert!((mean - 4.0 / std::f64::consts::PI).abs() <= 3.0 * se);
    assert_eq!(csv_rows(&out.join("checks.csv")).len(), 1 + 2);
}

#[test]
fn stein_experiment_on_the_circle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = write_config(
        dir.path(),
        "s.ini",
        &format!(
            "[run]\nexperiment = stein\nseed = 3\noutput = {}\n[manifold]\nkind = circle\n\
             [potential]\nfamily = von_mises\nc = 1\nkappa = 0.5\n\
             [stein]\npoints = -2; 0.5; 2.6\npaths = 200\nstep = 0.02\nhorizon = 12\n",
            out.display()
        ),
    );
    let o = mstein(&["run", &cfg], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("stein.csv"));
    assert_eq!(rows[0], "x,f_h,stderr,residual");
    assert_eq!(rows.len(), 1 + 3);
    assert!(out.join("plots/stein.svg").is_file());
}

#[test]
fn simulate_experiment_writes_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = write_config(
        dir.path(),
        "p.ini",
        &format!(
            "[run]\nexperiment = simulate\nseed = 8\noutput = {}\n[manifold]\nkind = sphere\n\
             [potential]\nfamily = vmf\ncenter = 0, 0, 1\nc = 0.5\n[sde]\nstep = 0.01\nhorizon = 2\n",
            out.display()
        ),
    );
    let o = mstein(&["run", &cfg], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("path.csv"));
    assert_eq!(rows[0], "t,x0,x1,x2");
    assert_eq!(rows.len(), 1 + 201);
}
