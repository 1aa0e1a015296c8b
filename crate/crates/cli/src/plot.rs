//! Minimal SVG line charts for trajectories and speed profiles.

use std::fmt::Write;

use echo_core::dataset::{anchored_path, CotRecord};
use echo_core::EmotionLabel;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub dashed: bool,
}

fn emotion_color(e: EmotionLabel) -> &'static str {
    match e {
        EmotionLabel::Normal => "#2a9d3f",
        EmotionLabel::Urgent => "#d62728",
        EmotionLabel::Hesitant => "#1f63b4",
    }
}

/// Round tick spacing covering `span` with about five steps.
fn tick_step(span: f64) -> f64 {
    if !(span > 0.0) {
        return 1.0;
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders `series` on shared axes. With `equal_aspect` one metre has the
/// same length on both axes.
pub fn chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    equal_aspect: bool,
) -> String {
    let all = series.iter().flat_map(|s| s.points.iter().copied());
    let (mut x0, mut x1, mut y0, mut y1) = all.fold(
        (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ),
        |(a, b, c, d), (x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad = |lo: f64, hi: f64| {
        let span = (hi - lo).max(1.0);
        (lo - 0.05 * span, hi + 0.05 * span)
    };
    (x0, x1) = pad(x0, x1);
    (y0, y1) = pad(y0, y1);
    let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    if equal_aspect {
        let scale = ((x1 - x0) / pw).max((y1 - y0) / ph);
        let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
        (x0, x1) = (cx - scale * pw / 2.0, cx + scale * pw / 2.0);
        (y0, y1) = (cy - scale * ph / 2.0, cy + scale * ph / 2.0);
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    let (xs, ys) = (tick_step(x1 - x0), tick_step(y1 - y0));
    let mut t = (x0 / xs).ceil() * xs;
    while t <= x1 {
        let _ = writeln!(
            svg,
            r##"<line x1="{0:.1}" y1="{1:.1}" x2="{0:.1}" y2="{2:.1}" stroke="#e4e4e4"/><text x="{0:.1}" y="{3:.1}" text-anchor="middle">{4}</text>"##,
            sx(t),
            MARGIN,
            HEIGHT - MARGIN,
            HEIGHT - MARGIN + 16.0,
            fmt_tick(t, xs)
        );
        t += xs;
    }
    let mut t = (y0 / ys).ceil() * ys;
    while t <= y1 {
        let _ = writeln!(
            svg,
            r##"<line x1="{0:.1}" y1="{1:.1}" x2="{2:.1}" y2="{1:.1}" stroke="#e4e4e4"/><text x="{3:.1}" y="{4:.1}" text-anchor="end">{5}</text>"##,
            MARGIN,
            sy(t),
            WIDTH - MARGIN,
            MARGIN - 6.0,
            sy(t) + 4.0,
            fmt_tick(t, ys)
        );
        t += ys;
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 18.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        HEIGHT / 2.0,
        escape(y_label)
    );

    for (k, s) in series.iter().enumerate() {
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let dash = if s.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"{dash}/>"#,
            path.join(" "),
            s.color
        );
        for &(x, y) in &s.points {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#,
                sx(x),
                sy(y),
                s.color
            );
        }
        let ly = MARGIN + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="{3}" stroke-width="2"{dash}/><text x="{4}" y="{5}">{6}</text>"#,
            MARGIN + 10.0,
            ly,
            MARGIN + 34.0,
            s.color,
            MARGIN + 40.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn fmt_tick(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 {
        0
    } else {
        (-step.log10()).ceil() as usize
    };
    let v = if v.abs() < step * 1e-9 { 0.0 } else { v };
    format!("{v:.decimals$}")
}

/// Bird's-eye path: lateral offset (left positive) against forward distance.
pub fn trajectory_figure(record: &CotRecord) -> String {
    let to_xy = |p: [f64; 2]| (-p[1], p[0]);
    let truth = anchored_path(&record.ground_truth)
        .into_iter()
        .map(to_xy)
        .collect();
    let answer = std::iter::once((0.0, 0.0))
        .chain(record.answer_trajectory.iter().map(|w| to_xy(w.point())))
        .collect();
    chart(
        &format!("{} ({})", record.record_id, record.emotion),
        "lateral, right positive (m)",
        "forward (m)",
        &[
            Series {
                label: "ground truth".into(),
                points: truth,
                color: "#777777",
                dashed: true,
            },
            Series {
                label: format!("{} answer", record.emotion),
                points: answer,
                color: emotion_color(record.emotion),
                dashed: false,
            },
        ],
        true,
    )
}

/// Waypoint speeds of the answer against the ground truth's step speeds.
pub fn speed_figure(record: &CotRecord) -> String {
    let path = anchored_path(&record.ground_truth);
    let truth = path
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            (
                0.5 * (i + 1) as f64,
                (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]) / 0.5,
            )
        })
        .collect();
    let answer = record
        .answer_trajectory
        .iter()
        .enumerate()
        .map(|(i, w)| (0.5 * (i + 1) as f64, w.speed))
        .collect();
    chart(
        &format!("{} speed profile", record.record_id),
        "time (s)",
        "speed (m/s)",
        &[
            Series {
                label: "ground truth".into(),
                points: truth,
                color: "#777777",
                dashed: true,
            },
            Series {
                label: format!("{} answer", record.emotion),
                points: answer,
                color: emotion_color(record.emotion),
                dashed: false,
            },
        ],
        false,
    )
}
