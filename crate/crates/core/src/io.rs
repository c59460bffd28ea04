//! CSV serialization of trajectories and section orbits, and SVG rendering
//! of planar projections with osculating circles.

use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::error::{domain, Error, Result};
use crate::extremal::ExtremalState;
use crate::geometry::ConfigurationPoint;
use crate::poincare::{PoincareOrbit, SectionPoint};
use crate::trajectory::Trajectory;

pub const TRAJECTORY_HEADER: [&str; 11] = ["t", "x", "y", "theta", "k", "alpha", "h3", "h4", "H", "a", "b"];
pub const ORBIT_HEADER: [&str; 6] = ["iter", "t_cross", "alpha", "alpha_mod_2pi", "h3", "h4"];

/// Below this `|k|` an osculating circle is drawn as a tangent segment.
pub const FLAT_CURVATURE: f64 = 1e-3;

/// Bound on the viewport margin, in trajectory diameters.
pub const MAX_MARGIN_DIAMETERS: f64 = 10.0;

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_error(e: csv::Error) -> Error {
    if e.is_io_error() {
        Error::Io(e.to_string())
    } else {
        Error::Format(e.to_string())
    }
}

fn parse_float(field: &str, column: &str, row: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Format(format!("row {row}: column {column}: not a number: {field:?}")))
}

fn check_header(reader: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = reader.headers().map_err(csv_error)?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Format(format!(
            "expected header {:?}, found {:?}",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

/// One row per stored sample; `H`, `a`, `b` are the first integrals there.
pub fn write_trajectory_csv(out: impl Write, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER).map_err(csv_error)?;
    for ((t, s), d) in traj.times.iter().zip(&traj.states).zip(&traj.diagnostics) {
        let row = [*t, s.q.x, s.q.y, s.q.theta, s.q.k, s.alpha, s.h3, s.h4, d.h, d.a, d.b];
        w.write_record(row.iter().map(|v| format_float(*v)))
            .map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

/// Inverse of [`write_trajectory_csv`]; the integral columns are recomputed
/// from the states.
pub fn read_trajectory_csv(input: impl Read) -> Result<Trajectory> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &TRAJECTORY_HEADER)?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let row = i + 1;
        let mut v = [0.0; 8];
        for (j, slot) in v.iter_mut().enumerate() {
            *slot = parse_float(&record[j], TRAJECTORY_HEADER[j], row)?;
        }
        times.push(v[0]);
        states.push(ExtremalState::new(
            ConfigurationPoint::new(v[1], v[2], v[3], v[4]),
            v[5],
            v[6],
            v[7],
        ));
    }
    if times.is_empty() {
        return Err(Error::Format("trajectory file has no rows".into()));
    }
    Trajectory::from_samples(times, states).map_err(|e| match e {
        Error::Domain(msg) => Error::Format(msg),
        other => other,
    })
}

pub fn write_orbit_csv(out: impl Write, orbit: &PoincareOrbit) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ORBIT_HEADER).map_err(csv_error)?;
    for (i, p) in orbit.points.iter().enumerate() {
        let mut row = vec![(i + 1).to_string()];
        row.extend([p.crossing_time, p.alpha, p.alpha_mod_2pi(), p.h3, p.h4].map(format_float));
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

/// Section points of an orbit file, in iteration order.
pub fn read_orbit_csv(input: impl Read) -> Result<Vec<SectionPoint>> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &ORBIT_HEADER)?;
    let mut points = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let row = i + 1;
        let iter: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("row {row}: iter is not an integer")))?;
        if iter != row {
            return Err(Error::Format(format!("row {row}: expected iter {row}, found {iter}")));
        }
        let f = |j: usize| parse_float(&record[j], ORBIT_HEADER[j], row);
        points.push(SectionPoint {
            crossing_time: f(1)?,
            alpha: f(2)?,
            h3: f(4)?,
            h4: f(5)?,
        });
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    /// Number of osculating circles, evenly spaced in `t`.
    pub circles: usize,
    pub width_px: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            circles: 5,
            width_px: 800.0,
        }
    }
}

/// What is drawn at one sampled point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Osculating {
    Circle {
        center: (f64, f64),
        radius: f64,
    },
    /// Segment along the tangent, centered on the point.
    Tangent {
        from: (f64, f64),
        to: (f64, f64),
    },
}

/// Osculating circle (or tangent segment of length `flat_length` when
/// `|k| < FLAT_CURVATURE`) of the planar projection at `q`.
pub fn osculating(q: &ConfigurationPoint, flat_length: f64) -> Osculating {
    let (s, c) = q.theta.sin_cos();
    if q.k.abs() < FLAT_CURVATURE {
        let h = flat_length / 2.0;
        return Osculating::Tangent {
            from: (q.x - h * c, q.y - h * s),
            to: (q.x + h * c, q.y + h * s),
        };
    }
    let r = 1.0 / q.k;
    Osculating::Circle {
        center: (q.x - r * s, q.y + r * c),
        radius: r.abs(),
    }
}

/// Sample times of the osculating circles: the midpoint for one circle,
/// both ends and evenly spaced interior times otherwise.
pub fn circle_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (t0 + t1)],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    t1
                } else {
                    t0 + (t1 - t0) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// `(min_x, min_y, max_x, max_y)` of the planar projection.
pub fn bounding_box(traj: &Trajectory) -> (f64, f64, f64, f64) {
    traj.states.iter().fold(
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), s| (a.min(s.q.x), b.min(s.q.y), c.max(s.q.x), d.max(s.q.y)),
    )
}

/// SVG of the planar projection `(x(t), y(t))` with start and end markers
/// pointing along `θ`, and osculating circles at evenly spaced times.
///
/// The viewport is the bounding box expanded by the largest drawn radius,
/// with the expansion capped at ten trajectory diameters.
pub fn render_svg(traj: &Trajectory, opts: &RenderOptions) -> Result<String> {
    if !(opts.width_px > 0.0) {
        return Err(domain("render width must be positive"));
    }
    let (x0, y0, x1, y1) = bounding_box(traj);
    let diameter = (x1 - x0).hypot(y1 - y0);
    let scale_len = if diameter > 0.0 { diameter } else { 1.0 };

    let marks: Vec<(ConfigurationPoint, Osculating)> = circle_times(traj.t_start(), traj.t_end(), opts.circles)
        .into_iter()
        .filter_map(|t| traj.sample(t))
        .map(|s| (s.q, osculating(&s.q, 0.2 * scale_len)))
        .collect();
    let largest = marks
        .iter()
        .map(|(_, m)| match m {
            Osculating::Circle { radius, .. } => *radius,
            Osculating::Tangent { .. } => 0.0,
        })
        .fold(0.0, f64::max);
    let margin = largest.min(MAX_MARGIN_DIAMETERS * scale_len) + 0.05 * scale_len;
    let (vx, vy) = (x0 - margin, -(y1 + margin));
    let (vw, vh) = (x1 - x0 + 2.0 * margin, y1 - y0 + 2.0 * margin);
    let height_px = opts.width_px * vh / vw;
    let stroke = 0.004 * vw.max(vh);

    // about seven significant digits relative to the picture size
    let decimals = (6.0 - scale_len.log10().floor()).clamp(0.0, 15.0) as usize;
    let fc = |v: f64| fmt_coord(v, decimals);
    // y is flipped so that the picture has the usual orientation
    let p = |x: f64, y: f64| format!("{},{}", fc(x), fc(-y));
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="{} {} {} {}">"#,
        fmt_coord(opts.width_px, 3),
        fmt_coord(height_px, 3),
        fc(vx),
        fc(vy),
        fc(vw),
        fc(vh)
    );
    let _ = writeln!(svg, "<title>planar projection</title>");
    let _ = writeln!(
        svg,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="white"/>"#,
        fc(vx),
        fc(vy),
        fc(vw),
        fc(vh)
    );

    let _ = writeln!(
        svg,
        r##"<g class="osculating" fill="none" stroke="#3a78c2" stroke-width="{}">"##,
        fc(0.6 * stroke)
    );
    for (q, m) in &marks {
        match m {
            Osculating::Circle { center, radius } => {
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{}" cy="{}" r="{}"/>"#,
                    fc(center.0),
                    fc(-center.1),
                    fc(*radius)
                );
            }
            Osculating::Tangent { from, to } => {
                let _ = writeln!(
                    svg,
                    r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                    fc(from.0),
                    fc(-from.1),
                    fc(to.0),
                    fc(-to.1)
                );
            }
        }
        let _ = writeln!(
            svg,
            r##"<circle cx="{}" cy="{}" r="{}" fill="#3a78c2"/>"##,
            fc(q.x),
            fc(-q.y),
            fc(stroke)
        );
    }
    let _ = writeln!(svg, "</g>");

    let points: Vec<String> = traj.states.iter().map(|s| p(s.q.x, s.q.y)).collect();
    let _ = writeln!(
        svg,
        r#"<polyline class="trajectory" fill="none" stroke="black" stroke-width="{}" points="{}"/>"#,
        fc(stroke),
        points.join(" ")
    );

    let arrow = 0.08 * scale_len;
    for (class, q, colour) in [
        ("start", traj.initial_state().q, "#2e9e4f"),
        ("end", traj.final_state().q, "#c23a3a"),
    ] {
        let (s, c) = q.theta.sin_cos();
        let tip = (q.x + arrow * c, q.y + arrow * s);
        let head = 0.35 * arrow;
        let left = (tip.0 - head * c - 0.5 * head * s, tip.1 - head * s + 0.5 * head * c);
        let right = (tip.0 - head * c + 0.5 * head * s, tip.1 - head * s - 0.5 * head * c);
        let _ = writeln!(
            svg,
            r#"<g class="{class}" fill="{colour}" stroke="{colour}" stroke-width="{}">"#,
            fc(stroke)
        );
        let _ = writeln!(
            svg,
            r#"<circle cx="{}" cy="{}" r="{}"/>"#,
            fc(q.x),
            fc(-q.y),
            fc(2.5 * stroke)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            fc(q.x),
            fc(-q.y),
            fc(tip.0),
            fc(-tip.1)
        );
        let _ = writeln!(
            svg,
            r#"<polygon points="{} {} {}"/>"#,
            p(tip.0, tip.1),
            p(left.0, left.1),
            p(right.0, right.1)
        );
        let _ = writeln!(svg, "</g>");
    }
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}

fn fmt_coord(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}
