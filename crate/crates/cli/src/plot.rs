//! Static SVG of a trajectory with its baseline and detection marker.

use std::fmt::Write as _;

use wmfatigue::{DetectionResult, FeatureTrajectory};

const W: f64 = 720.0;
const H: f64 = 360.0;
const PAD: f64 = 48.0;

pub fn trajectory_svg(traj: &FeatureTrajectory, result: &DetectionResult) -> String {
    let pts = traj.points();
    let t_max = pts.last().map_or(1.0, |p| p.t_s).max(1.0);
    let (mut f_lo, mut f_hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.f_hz), hi.max(p.f_hz))
    });
    f_lo = f_lo.min(result.f_int_hz);
    f_hi = f_hi.max(result.f_int_hz);
    if f_hi <= f_lo {
        f_lo -= 1.0;
        f_hi += 1.0;
    }
    let x = |t: f64| PAD + t / t_max * (W - 2.0 * PAD);
    let y = |f: f64| H - PAD - (f - f_lo) / (f_hi - f_lo) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{} H{}" stroke="black" fill="none"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="{}" font-size="11">{f_hi:.2} Hz</text>"#,
        PAD - 6.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{t_max} s</text>"#,
        W - PAD,
        H - PAD + 16.0
    );
    let _ = writeln!(
        s,
        r#"<line x1="{PAD}" x2="{}" y1="{y0:.2}" y2="{y0:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
        W - PAD,
        y0 = y(result.f_int_hz)
    );
    let line: Vec<String> = pts
        .iter()
        .map(|p| format!("{:.2},{:.2}", x(p.t_s), y(p.f_hz)))
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" stroke="steelblue" stroke-width="1.5" fill="none"/>"#,
        line.join(" ")
    );
    for p in pts {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="steelblue"/>"#,
            x(p.t_s),
            y(p.f_hz)
        );
    }
    if let Some(t) = result.time_s {
        let _ = writeln!(
            s,
            r#"<line x1="{xt:.2}" x2="{xt:.2}" y1="{PAD}" y2="{}" stroke="firebrick"/>"#,
            H - PAD,
            xt = x(t)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" font-size="11" fill="firebrick">{} @ {t} s</text>"#,
            x(t) + 4.0,
            PAD + 12.0,
            result.detector
        );
    }
    s.push_str("</svg>\n");
    s
}
