use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tailcap-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path
}

fn tailcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tailcap")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const COMPOSITE: &str = "\
# mild stable component on top of unit Gaussian noise
channel.noise = composite alpha=1 gamma=0.1 sigma=1
channel.map = linear
channel.cost = power r=2
channel.budget_db = 0.16
";

#[test]
fn capacity_then_verify_round_trips() {
    let dir = scratch("roundtrip");
    let cfg = config(&dir, COMPOSITE);
    let out = dir.join("out");
    let run = tailcap(&["capacity", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--require-certified"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = fs::read_to_string(out.join("capacity.csv")).unwrap();
    assert_eq!(csv, stdout(&run));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("A,capacity_nats,nu,n_points,grid_min_residual,certified"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 6);
    let cap: f64 = row[1].parse().unwrap();
    assert!((cap - 0.298).abs() < 0.02, "{cap}");
    assert_eq!(row[5], "true");

    let dist = out.join("distribution.txt");
    let check = tailcap(&["verify-kkt", "--config", cfg.to_str().unwrap(), "--dist", dist.to_str().unwrap(), "--require-certified"]);
    assert_eq!(check.status.code(), Some(0), "{}", String::from_utf8_lossy(&check.stderr));
    assert_eq!(stdout(&check), csv);
}

#[test]
fn identical_config_gives_identical_csv() {
    let dir = scratch("determinism");
    let cfg = config(&dir, COMPOSITE);
    let a = tailcap(&["capacity", "--config", cfg.to_str().unwrap()]);
    let b = tailcap(&["capacity", "--config", cfg.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn configuration_errors_exit_with_1() {
    let dir = scratch("config-errors");
    for bad in [
        "channel.noise = gaussian\nchannel.budget = 0\n",
        "channel.noise = gaussian\nchannel.budget = -2\n",
        "channel.noise = gaussian\nchannel.budget = 1\nchannel.colour = blue\n",
        "channel.noise = laplace\nchannel.budget = 1\n",
        "channel.noise = gaussian\nchannel.budget = 1\nchannel.budget = 2\n",
        "channel.budget = 1\n",
        "channel.noise = gaussian\nchannel.budget = 1\nchannel.cost = power r=2 offset=3\n",
    ] {
        let cfg = config(&dir, bad);
        let o = tailcap(&["capacity", "--config", cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1), "{bad}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty());
    }
    assert_eq!(tailcap(&["capacity"]).status.code(), Some(1));
    assert_eq!(tailcap(&["capacity", "--config", "/nonexistent/run.cfg"]).status.code(), Some(1));
    let missing = tailcap(&["verify-kkt", "--config", config(&dir, COMPOSITE).to_str().unwrap(), "--dist", "/nonexistent/d.txt"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn uncertified_result_exits_with_3_only_when_required() {
    // The Gaussian channel with a quadratic cost has a continuous optimal
    // input, so no small support certifies.
    let dir = scratch("uncertified");
    let cfg = config(&dir, "channel.noise = gaussian\nchannel.budget = 1\n");
    let path = cfg.to_str().unwrap();
    let strict = tailcap(&["capacity", "--config", path, "--max-points", "3", "--require-certified"]);
    assert_eq!(strict.status.code(), Some(3));
    assert!(stdout(&strict).lines().nth(1).unwrap().ends_with(",false"));
    let lax = tailcap(&["capacity", "--config", path, "--max-points", "3"]);
    assert_eq!(lax.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&lax.stderr).contains("transitional"));
}

#[test]
fn sweep_writes_curve_distributions_and_plot() {
    let dir = scratch("sweep");
    let cfg = config(
        &dir,
        "channel.noise = composite alpha=1 gamma=0.1 sigma=1\nchannel.budgets = 0.5, 1.0\noutput.plot = true\n",
    );
    let out = dir.join("out");
    let o = tailcap(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let caps: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(caps.len(), 2);
    assert!(caps[1] > caps[0]);
    assert!(out.join("distribution_000.txt").exists() && out.join("distribution_001.txt").exists());
    let svg = fs::read_to_string(out.join("sweep.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn plot_without_output_directory_is_a_config_error() {
    let dir = scratch("plot");
    let cfg = config(&dir, "channel.noise = cauchy\n");
    assert_eq!(tailcap(&["noise-pdf", "--config", cfg.to_str().unwrap(), "--plot"]).status.code(), Some(1));
}

#[test]
fn classify_reports_verdicts() {
    let dir = scratch("classify");
    for (text, kind) in [
        ("channel.noise = gaussian\nchannel.cost = power r=3\n", "compact"),
        ("channel.noise = gaussian\nchannel.cost = power r=1\n", "unbounded"),
        ("channel.noise = gaussian\n", "transitional"),
        ("channel.noise = cauchy\nchannel.map = odd-power n=3\n", "compact"),
        ("channel.noise = cauchy\nchannel.cost = logpoly k=1\n", "indeterminate"),
    ] {
        let cfg = config(&dir, text);
        let o = tailcap(&["classify", "--config", cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let s = stdout(&o);
        assert!(s.contains(&format!("kind={kind}\n")), "{text}: {s}");
        assert!(s.contains("basis=symbolic"));
    }
    let cfg = config(&dir, "channel.noise = gaussian\nchannel.cost = table growth=3 0:0 1:1 2:8 3:27\n");
    let s = stdout(&tailcap(&["classify", "--config", cfg.to_str().unwrap()]));
    assert!(s.contains("basis=numeric"), "{s}");
}

#[test]
fn cauchy_meets_the_regularity_conditions() {
    let dir = scratch("conditions");
    let cfg = config(&dir, "channel.noise = cauchy gamma=1\n");
    let o = tailcap(&["check-conditions", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for c in ["C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8"] {
        assert!(s.contains(&format!("\n{c}=true")), "{c}: {s}");
    }
    assert!(s.contains("all_passed=true"));
}

#[test]
fn noise_pdf_table() {
    let dir = scratch("pdf");
    let cfg = config(&dir, "channel.noise = cauchy\npdf.x_min = -2\npdf.x_max = 2\npdf.points = 5\n");
    let o = tailcap(&["noise-pdf", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let mut lines = s.lines();
    let header = lines.next().unwrap();
    let h: f64 = header.split("entropy_nats=").nth(1).unwrap().parse().unwrap();
    assert!((h - (4.0 * std::f64::consts::PI).ln()).abs() < 1e-6);
    assert_eq!(lines.next(), Some("x,pdf"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (x, p) = l.split_once(',').unwrap();
            (x.parse().unwrap(), p.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 5);
    for (x, p) in rows {
        assert!((p - 1.0 / (std::f64::consts::PI * (1.0 + x * x))).abs() < 1e-10);
    }
}
