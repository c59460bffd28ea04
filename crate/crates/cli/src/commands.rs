//! The five subcommands. Each writes a human-readable report to `out` and
//! returns a structured result for programmatic callers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use engel_core::bvp::{compare_costs, solve, BoundaryValueProblem, BvpSolution, CostReport, InitialMomentum};
use engel_core::extremal::poisson_bracket;
use engel_core::geometry::{frame_determinant, growth_vector_check, lie_bracket, BracketMethod, Frame};
use engel_core::io::{read_trajectory_csv, render_svg, write_orbit_csv, write_trajectory_csv, RenderOptions};
use engel_core::poincare::{orbit, orbit_closedness, Closedness, PoincareOrbit, MIN_CLOSEDNESS_POINTS};
use engel_core::trajectory::{integrate_natural, IntegralSample};
use engel_core::{
    ConfigurationPoint, CrossingDirection, Error, ExtremalState, FirstIntegral, HCoordinates, HState, IntegratorConfig,
    Trajectory,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::FileConfig;
use crate::manifest::RunManifest;
use crate::{output_path, CheckArgs, CliError, ConnectArgs, IntegrateArgs, NumericArgs, PoincareArgs, RenderArgs};

pub const DETERMINANT_TOL: f64 = 1e-12;
pub const BRACKET_TOL: f64 = 1e-6;
pub const POISSON_TOL: f64 = 1e-7;

fn core_error(e: Error) -> CliError {
    match e {
        Error::Domain(m) | Error::Format(m) => CliError::Usage(m),
        Error::Io(m) => CliError::Io(m),
        Error::NoSolution { .. } => CliError::NoSolution(e.to_string()),
        other => CliError::Numeric(other.to_string()),
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn report(out: &mut dyn Write, text: std::fmt::Arguments) -> Result<(), CliError> {
    out.write_fmt(text).map_err(|e| CliError::Io(e.to_string()))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| io_error(path, e))
}

fn numeric_config(n: &NumericArgs) -> Result<FileConfig, CliError> {
    let flags = FileConfig {
        rtol: n.rtol,
        atol: n.atol,
        max_step: n.max_step,
        ..FileConfig::default()
    };
    Ok(FileConfig::load_optional(n.config.as_deref())?.overlay(flags))
}

fn integrator(n: &NumericArgs) -> Result<IntegratorConfig, CliError> {
    let cfg = numeric_config(n)?.integrator(IntegratorConfig::default());
    cfg.validate().map_err(core_error)?;
    Ok(cfg)
}

fn save_trajectory(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let mut w = create(path)?;
    write_trajectory_csv(&mut w, traj).map_err(core_error)?;
    w.flush().map_err(|e| io_error(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateReport {
    pub output: PathBuf,
    pub trajectory: Trajectory,
    pub drift: IntegralSample,
}

pub fn cmd_integrate(a: &IntegrateArgs, argv: &[String], out: &mut dyn Write) -> Result<IntegrateReport, CliError> {
    let started = Instant::now();
    if !(a.duration > 0.0 && a.duration.is_finite()) {
        return Err(CliError::Usage(format!("--T must be positive, got {}", a.duration)));
    }
    let cfg = integrator(&a.numeric)?;
    let s0 = ExtremalState::new(a.q0.0, a.alpha0, a.h30, a.h40);
    let trajectory = integrate_natural(&s0, a.duration, &cfg).map_err(core_error)?;
    let drift = trajectory.max_drift();
    let output = output_path(a.out.as_deref(), "trajectory.csv");
    save_trajectory(&output, &trajectory)?;

    let end = trajectory.final_state();
    report(
        out,
        format_args!("wrote {} ({} rows)\n", output.display(), trajectory.len()),
    )?;
    report(
        out,
        format_args!(
            "final state: x={:.12e} y={:.12e} theta={:.12e} k={:.12e}\n",
            end.q.x, end.q.y, end.q.theta, end.q.k
        ),
    )?;
    report(
        out,
        format_args!("max drift: H={:.3e} a={:.3e} b={:.3e}\n", drift.h, drift.a, drift.b),
    )?;

    let q = a.q0.0;
    let mut m = RunManifest::new(
        "integrate",
        argv,
        json!({
            "q0": [q.x, q.y, q.theta, q.k],
            "alpha0": a.alpha0, "h30": a.h30, "h40": a.h40, "T": a.duration,
            "output": output,
        }),
    );
    m.integrator = Some(cfg);
    m.outputs = vec![output.clone()];
    m.duration_seconds = started.elapsed().as_secs_f64();
    m.write_beside(&output)?;
    Ok(IntegrateReport {
        output,
        trajectory,
        drift,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareReport {
    pub output: PathBuf,
    pub orbit: PoincareOrbit,
    /// Present when the orbit has enough points to judge.
    pub closedness: Option<Closedness>,
    pub max_component: f64,
}

pub fn cmd_poincare(a: &PoincareArgs, argv: &[String], out: &mut dyn Write) -> Result<PoincareReport, CliError> {
    let started = Instant::now();
    let cfg = integrator(&a.numeric)?;
    let orbit = orbit(
        (a.alpha0, a.h30, a.h40),
        a.iters as usize,
        CrossingDirection::Rising,
        &cfg,
    )
    .map_err(core_error)?;
    let output = output_path(a.out.as_deref(), "orbit.csv");
    let mut w = create(&output)?;
    write_orbit_csv(&mut w, &orbit).map_err(core_error)?;
    w.flush().map_err(|e| io_error(&output, e))?;

    let max_component = orbit
        .points
        .iter()
        .flat_map(|p| p.chart())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let closedness = if orbit.points.len() >= MIN_CLOSEDNESS_POINTS {
        Some(orbit_closedness(&orbit).map_err(core_error)?)
    } else {
        None
    };
    report(
        out,
        format_args!("wrote {} ({} rows)\n", output.display(), orbit.points.len()),
    )?;
    report(
        out,
        format_args!("max |component| of (alpha mod 2pi, h3, h4): {max_component:.6}\n"),
    )?;
    if let Some(c) = &closedness {
        report(
            out,
            format_args!("closedness ratio: {:.6} (fixed point: {})\n", c.ratio, c.fixed_point),
        )?;
    }

    let mut m = RunManifest::new(
        "poincare",
        argv,
        json!({
            "alpha0": a.alpha0, "h30": a.h30, "h40": a.h40, "iters": a.iters,
            "crossing": "rising", "output": output,
        }),
    );
    m.integrator = Some(cfg);
    m.outputs = vec![output.clone()];
    m.duration_seconds = started.elapsed().as_secs_f64();
    m.write_beside(&output)?;
    Ok(PoincareReport {
        output,
        orbit,
        closedness,
        max_component,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectReport {
    pub output: PathBuf,
    pub solution: BvpSolution,
    pub costs: CostReport,
}

fn momentum_label(m: &InitialMomentum) -> String {
    match m {
        InitialMomentum::Normal { alpha0, h30, h40 } => format!("alpha0={alpha0:.9} h30={h30:.9} h40={h40:.9}"),
        InitialMomentum::Abnormal { k0, sign } => format!("k0={k0:.9} sign={:+}", sign.value()),
    }
}

pub fn cmd_connect(a: &ConnectArgs, argv: &[String], out: &mut dyn Write) -> Result<ConnectReport, CliError> {
    let started = Instant::now();
    let flags = FileConfig {
        residual_tol: a.residual_tol,
        max_newton_iters: a.max_newton_iters,
        t_max: a.t_max,
        ..FileConfig::default()
    };
    let options = numeric_config(&a.numeric)?.overlay(flags).shooting();
    options.validate().map_err(core_error)?;
    let problem = BoundaryValueProblem::new(a.q0.0, a.q1.0).with_options(options.clone());
    let solution = solve(&problem).map_err(core_error)?;
    let costs = compare_costs(&solution).map_err(core_error)?;
    let output = output_path(a.out.as_deref(), "connect.csv");
    save_trajectory(&output, &solution.best().trajectory)?;

    report(
        out,
        format_args!(
            "{} candidate(s); best written to {}\n",
            solution.candidates.len(),
            output.display()
        ),
    )?;
    report(
        out,
        format_args!(
            "{:>3}  {:<8}  {:>18}  {:>18}  {:>18}  initial momentum\n",
            "#", "class", "length", "action", "T"
        ),
    )?;
    for (i, (c, row)) in solution.candidates.iter().zip(&costs.rows).enumerate() {
        report(
            out,
            format_args!(
                "{:>3}  {:<8}  {:>18.12}  {:>18.12}  {:>18.12}  {}\n",
                i + 1,
                c.class.to_string(),
                row.length,
                row.action,
                c.duration,
                momentum_label(&c.initial_momentum)
            ),
        )?;
    }
    report(
        out,
        format_args!("max |action - length/2|: {:.3e}\n", costs.max_identity_gap()),
    )?;

    let (q0, q1) = (a.q0.0, a.q1.0);
    let mut m = RunManifest::new(
        "connect",
        argv,
        json!({
            "q0": [q0.x, q0.y, q0.theta, q0.k],
            "q1": [q1.x, q1.y, q1.theta, q1.k],
            "output": output,
        }),
    );
    m.integrator = Some(options.integrator);
    m.shooting = Some(options);
    m.outputs = vec![output.clone()];
    m.duration_seconds = started.elapsed().as_secs_f64();
    m.write_beside(&output)?;
    Ok(ConnectReport {
        output,
        solution,
        costs,
    })
}

pub fn cmd_render(a: &RenderArgs, argv: &[String], out: &mut dyn Write) -> Result<String, CliError> {
    let started = Instant::now();
    let file = File::open(&a.input).map_err(|e| CliError::Usage(format!("{}: {e}", a.input.display())))?;
    let traj = read_trajectory_csv(std::io::BufReader::new(file))
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.input.display())))?;
    let svg = render_svg(
        &traj,
        &RenderOptions {
            circles: a.circles,
            ..RenderOptions::default()
        },
    )
    .map_err(core_error)?;
    let mut w = create(&a.out)?;
    w.write_all(svg.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| io_error(&a.out, e))?;
    report(out, format_args!("wrote {}\n", a.out.display()))?;

    let mut m = RunManifest::new(
        "render",
        argv,
        json!({ "input": a.input, "circles": a.circles, "output": a.out }),
    );
    m.outputs = vec![a.out.clone()];
    m.duration_seconds = started.elapsed().as_secs_f64();
    m.write_beside(&a.out)?;
    Ok(svg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub samples: usize,
    pub worst_determinant: f64,
    /// Samples whose growth vector differs from `(2, 3, 4)`.
    pub growth_failures: usize,
    pub worst_bracket: f64,
    pub worst_poisson: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.worst_determinant <= DETERMINANT_TOL
            && self.growth_failures == 0
            && self.worst_bracket <= BRACKET_TOL
            && self.worst_poisson <= POISSON_TOL
    }
}

fn random_point(rng: &mut ChaCha8Rng) -> ConfigurationPoint {
    ConfigurationPoint::new(
        rng.gen_range(-10.0..10.0),
        rng.gen_range(-10.0..10.0),
        rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        rng.gen_range(-5.0..5.0),
    )
}

pub fn cmd_check(a: &CheckArgs, out: &mut dyn Write) -> Result<CheckReport, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut r = CheckReport {
        samples: a.samples as usize,
        worst_determinant: 0.0,
        growth_failures: 0,
        worst_bracket: 0.0,
        worst_poisson: 0.0,
    };
    for _ in 0..a.samples {
        let q = random_point(&mut rng);
        r.worst_determinant = r.worst_determinant.max((frame_determinant(&q) - 1.0).abs());
        if growth_vector_check(&q) != (2, 3, 4) {
            r.growth_failures += 1;
        }
        for f in Frame::ALL {
            for g in Frame::ALL {
                let (f, g) = (f.into(), g.into());
                let exact = lie_bracket(&f, &g, &q, BracketMethod::Symbolic).map_err(core_error)?;
                let fd = lie_bracket(&f, &g, &q, BracketMethod::FiniteDifference).map_err(core_error)?;
                r.worst_bracket = r.worst_bracket.max(exact.max_abs_diff(&fd));
            }
        }
        let alpha: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let h = HCoordinates::new(
            alpha.cos(),
            alpha.sin(),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let s = HState::new(q, h);
        for f in FirstIntegral::ALL {
            for g in FirstIntegral::ALL {
                r.worst_poisson = r.worst_poisson.max(poisson_bracket(f, g, &s).abs());
            }
        }
    }
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    report(out, format_args!("samples: {} (seed {})\n", r.samples, a.seed))?;
    report(
        out,
        format_args!(
            "frame determinant   worst |det - 1| = {:.3e}  (tol {DETERMINANT_TOL:e})  {}\n",
            r.worst_determinant,
            verdict(r.worst_determinant <= DETERMINANT_TOL)
        ),
    )?;
    report(
        out,
        format_args!(
            "growth vector       (2,3,4) at {}/{} samples  {}\n",
            r.samples - r.growth_failures,
            r.samples,
            verdict(r.growth_failures == 0)
        ),
    )?;
    report(
        out,
        format_args!(
            "bracket cross-check worst |symbolic - fd| = {:.3e}  (tol {BRACKET_TOL:e})  {}\n",
            r.worst_bracket,
            verdict(r.worst_bracket <= BRACKET_TOL)
        ),
    )?;
    report(
        out,
        format_args!(
            "involution          worst |{{f, g}}| over H, a, b = {:.3e}  (tol {POISSON_TOL:e})  {}\n",
            r.worst_poisson,
            verdict(r.worst_poisson <= POISSON_TOL)
        ),
    )?;
    if !r.passed() {
        return Err(CliError::Diagnostic("one or more checks exceeded tolerance".into()));
    }
    report(out, format_args!("all checks passed\n"))?;
    Ok(r)
}
