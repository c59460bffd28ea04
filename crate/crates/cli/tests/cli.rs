use std::path::Path;
use std::process::{Command, Output};

use engel_cli::manifest::{manifest_path, RunManifest};
use engel_core::io::{read_orbit_csv, read_trajectory_csv};
use engel_core::{ExtremalState, IntegratorConfig};

fn engel(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_engel"))
        .args(args)
        .current_dir(dir)
        .env_remove(engel_cli::OUTPUT_DIR_ENV)
        .output()
        .expect("engel runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_trajectory(path: &Path) -> engel_core::Trajectory {
    read_trajectory_csv(std::fs::File::open(path).unwrap()).unwrap()
}

#[test]
fn integrate_straight_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = engel(
        dir.path(),
        &[
            "integrate",
            "--q0",
            "0,0,0,0",
            "--alpha0",
            "0",
            "--h30",
            "0",
            "--h40",
            "0",
            "--T",
            "5",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    assert!(stdout(&o).contains("max drift: H="));
    let traj = read_trajectory(&dir.path().join("trajectory.csv"));
    assert!((traj.final_state().q.x - 5.0).abs() < 1e-8);
    assert!(manifest_path(&dir.path().join("trajectory.csv")).exists());
}

#[test]
fn integrate_periodic_family_closes_curvature() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "integrate",
        "--q0",
        "0,0,0,0",
        "--alpha0",
        "1.5707963",
        "--h30",
        "1",
        "--h40",
        "0",
        "--T",
        "6.2831853",
    ];
    let o = engel(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0));
    let traj = read_trajectory(&dir.path().join("trajectory.csv"));
    assert!(traj.final_state().q.k.abs() < 1e-6);
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing_t = engel(
        dir.path(),
        &[
            "integrate",
            "--q0",
            "0,0,0,0",
            "--alpha0",
            "0",
            "--h30",
            "0",
            "--h40",
            "0",
        ],
    );
    assert_eq!(missing_t.status.code(), Some(2));
    let zero_iters = engel(
        dir.path(),
        &["poincare", "--alpha0", "1", "--h30", "1", "--h40", "0", "--iters", "0"],
    );
    assert_eq!(zero_iters.status.code(), Some(2));
    let bad_point = engel(dir.path(), &["connect", "--q0", "0,0,0", "--q1", "1,0,0,0"]);
    assert_eq!(bad_point.status.code(), Some(2));
    let bad_config = engel(
        dir.path(),
        &[
            "integrate",
            "--q0",
            "0,0,0,0",
            "--alpha0",
            "0",
            "--h30",
            "0",
            "--h40",
            "0",
            "--T",
            "1",
            "--config",
            "missing.json",
        ],
    );
    assert_eq!(bad_config.status.code(), Some(2));
}

#[test]
fn integration_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tiny.json"), r#"{"max_steps": 3}"#).unwrap();
    let args = [
        "integrate",
        "--q0",
        "0,0,0,0",
        "--alpha0",
        "0",
        "--h30",
        "0",
        "--h40",
        "0",
        "--T",
        "5",
        "--config",
        "tiny.json",
    ];
    let o = engel(dir.path(), &args);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.json"),
        r#"{"rtol": 1e-6, "atol": 1e-8, "max_step": 0.5}"#,
    )
    .unwrap();
    let args = [
        "integrate",
        "--q0",
        "0,0,0,0",
        "--alpha0",
        "0.3",
        "--h30",
        "0.2",
        "--h40",
        "0",
        "--T",
        "2",
        "--config",
        "c.json",
        "--rtol",
        "1e-9",
    ];
    assert_eq!(engel(dir.path(), &args).status.code(), Some(0));
    let m = RunManifest::read(&manifest_path(&dir.path().join("trajectory.csv"))).unwrap();
    let cfg = m.integrator.unwrap();
    assert_eq!((cfg.rtol, cfg.atol, cfg.max_step), (1e-9, 1e-8, 0.5));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("results");
    let o = Command::new(env!("CARGO_BIN_EXE_engel"))
        .args([
            "integrate",
            "--q0",
            "0,0,0,0",
            "--alpha0",
            "0",
            "--h30",
            "0",
            "--h40",
            "0",
            "--T",
            "1",
        ])
        .current_dir(dir.path())
        .env(engel_cli::OUTPUT_DIR_ENV, &target)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(target.join("trajectory.csv").exists());
    assert!(!dir.path().join("trajectory.csv").exists());
}

#[test]
fn poincare_fixed_point_orbit() {
    let dir = tempfile::tempdir().unwrap();
    let o = engel(
        dir.path(),
        &[
            "poincare",
            "--alpha0",
            "1.5707963",
            "--h30",
            "1",
            "--h40",
            "0",
            "--iters",
            "100",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let points = read_orbit_csv(std::fs::File::open(dir.path().join("orbit.csv")).unwrap()).unwrap();
    assert_eq!(points.len(), 100);
    for p in &points {
        let [a, h3, h4] = p.chart();
        assert!((a - 1.5707963).abs() < 1e-5 && (h3 - 1.0).abs() < 1e-5 && h4.abs() < 1e-5);
    }
}

#[test]
fn poincare_seed_orbit_is_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let o = engel(
        dir.path(),
        &[
            "poincare", "--alpha0", "1.56", "--h30", "0.94", "--h40", "0.02", "--iters", "1000",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let points = read_orbit_csv(std::fs::File::open(dir.path().join("orbit.csv")).unwrap()).unwrap();
    assert_eq!(points.len(), 1000);
    assert!(points.iter().all(|p| p.chart().iter().all(|v| v.abs() <= 10.0)));
}

#[test]
fn poincare_without_return_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // h3 = 0 and α = 0 on k = 0 stays put: no crossing ever happens
    let o = engel(
        dir.path(),
        &["poincare", "--alpha0", "0", "--h30", "0", "--h40", "0", "--iters", "5"],
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("iteration 1"));
}

#[test]
fn connect_reports_abnormal_and_straight_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let o = engel(dir.path(), &["connect", "--q0", "0,0,0,0", "--q1", "0,0,0,1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().find(|l| l.contains("abnormal")).expect("abnormal row");
    assert!(row.contains("1.000000000000"));

    let o = engel(
        dir.path(),
        &["connect", "--q0", "0,0,0,0", "--q1", "1,0,0,0", "--out", "line.csv"],
    );
    assert_eq!(o.status.code(), Some(0));
    let best = read_trajectory(&dir.path().join("line.csv"));
    assert!((best.duration() - 1.0).abs() < 1e-9);
    assert!(best.states.iter().all(|s| s.q.y.abs() < 1e-9 && s.q.k.abs() < 1e-9));
}

#[test]
fn connect_recovers_forward_integrated_endpoint() {
    let q0 = engel_core::ConfigurationPoint::new(1.0, 1.0, 0.3, 0.0);
    let s0 = ExtremalState::new(q0, 0.8, 0.4, -0.3);
    let q1 = engel_core::trajectory::integrate_natural(&s0, 1.7, &IntegratorConfig::default())
        .unwrap()
        .final_state()
        .q;
    let dir = tempfile::tempdir().unwrap();
    let target = format!("{:.17e},{:.17e},{:.17e},{:.17e}", q1.x, q1.y, q1.theta, q1.k);
    let o = engel(dir.path(), &["connect", "--q0", "1,1,0.3,0", "--q1", &target]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let best = read_trajectory(&dir.path().join("connect.csv"));
    assert!(best.final_state().q.max_deviation(&q1) < 1e-6);
    assert!(best.duration() <= 1.7 + 1e-6);
}

#[test]
fn connect_without_solution_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"max_newton_iters": 0}"#).unwrap();
    let o = engel(
        dir.path(),
        &[
            "connect",
            "--q0",
            "0,0,0,0",
            "--q1",
            "2,1,0.5,0.3",
            "--config",
            "c.json",
        ],
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("best residual"));
}

fn render(dir: &Path, args: &[&str], name: &str) -> String {
    assert_eq!(engel(dir, args).status.code(), Some(0));
    let o = engel(dir, &["render", "--in", "trajectory.csv", "--out", name]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn render_straight_line() {
    let dir = tempfile::tempdir().unwrap();
    let svg = render(
        dir.path(),
        &[
            "integrate",
            "--q0",
            "0,0,0,0",
            "--alpha0",
            "0",
            "--h30",
            "0",
            "--h40",
            "0",
            "--T",
            "5",
        ],
        "line.svg",
    );
    let doc = roxmltree::Document::parse(&svg).expect("well-formed SVG");
    let poly = doc.descendants().find(|n| n.has_tag_name("polyline")).unwrap();
    let points: Vec<&str> = poly.attribute("points").unwrap().split_whitespace().collect();
    assert_eq!(points.first(), Some(&"0,0"));
    assert_eq!(points.last(), Some(&"5,0"));
    let osc = doc
        .descendants()
        .find(|n| n.attribute("class") == Some("osculating"))
        .unwrap();
    assert_eq!(osc.children().filter(|n| n.has_tag_name("line")).count(), 5);
    assert!(osc
        .children()
        .filter(|n| n.has_tag_name("circle"))
        .all(|c| c.attribute("fill").is_some()));
    assert!(manifest_path(&dir.path().join("line.svg")).exists());
}

#[test]
fn render_periodic_family_is_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let svg = render(
        dir.path(),
        &[
            "integrate",
            "--q0",
            "0,0,0,0",
            "--alpha0",
            "1.5707963",
            "--h30",
            "1",
            "--h40",
            "0",
            "--T",
            "6.2831853",
        ],
        "loop.svg",
    );
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let poly = doc.descendants().find(|n| n.has_tag_name("polyline")).unwrap();
    for pair in poly.attribute("points").unwrap().split_whitespace() {
        let (x, y) = pair.split_once(',').unwrap();
        let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
        assert!(x.abs() <= std::f64::consts::TAU && y.abs() <= std::f64::consts::TAU);
    }
    let circles = doc
        .descendants()
        .filter(|n| n.has_tag_name("circle") && n.attribute("fill").is_none())
        .count();
    assert!(circles >= 1);
}

#[test]
fn render_circle_count_and_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "integrate",
        "--q0",
        "0,0,0,0.5",
        "--alpha0",
        "0.2",
        "--h30",
        "0.3",
        "--h40",
        "0",
        "--T",
        "3",
    ];
    assert_eq!(engel(dir.path(), &args).status.code(), Some(0));
    let o = engel(
        dir.path(),
        &["render", "--in", "trajectory.csv", "--out", "c.svg", "--circles", "2"],
    );
    assert_eq!(o.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.path().join("c.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let osc = doc
        .descendants()
        .find(|n| n.attribute("class") == Some("osculating"))
        .unwrap();
    assert_eq!(
        osc.children()
            .filter(|n| n.is_element() && n.attribute("fill").is_none())
            .count(),
        2
    );

    std::fs::write(dir.path().join("junk.csv"), "not,a,trajectory\n1,2,3\n").unwrap();
    let o = engel(dir.path(), &["render", "--in", "junk.csv", "--out", "j.svg"]);
    assert_eq!(o.status.code(), Some(2));
    let o = engel(dir.path(), &["render", "--in", "absent.csv", "--out", "j.svg"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_default_and_single_sample() {
    let dir = tempfile::tempdir().unwrap();
    let o = engel(dir.path(), &["check"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("samples: 1000"));
    assert!(text.contains("(2,3,4) at 1000/1000"));
    assert!(!text.contains("FAIL"));
    let o = engel(dir.path(), &["check", "--samples", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("samples: 1 "));
}

#[test]
fn manifest_replay_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "poincare", "--alpha0", "1.58", "--h30", "1.24", "--h40", "0.01", "--iters", "50", "--out", "o.csv",
    ];
    assert_eq!(engel(dir.path(), &args).status.code(), Some(0));
    let first = std::fs::read(dir.path().join("o.csv")).unwrap();
    let m = RunManifest::read(&manifest_path(&dir.path().join("o.csv"))).unwrap();
    assert_eq!(m.command, "poincare");
    std::fs::remove_file(dir.path().join("o.csv")).unwrap();
    let replay: Vec<&str> = m.args.iter().map(String::as_str).collect();
    assert_eq!(engel(dir.path(), &replay).status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("o.csv")).unwrap(), first);
}
