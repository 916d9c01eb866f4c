//! Minimal SVG figures: rank staircases, sector bars, comparison bars.
//! Output is a pure function of the input data.

use std::fmt::Write as _;

use crate::experiments::ComparisonReport;
use crate::rank::{detect_plateaus, RankProfile};
use crate::sectors::SectorWeights;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn header(out: &mut String, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    )
    .unwrap();
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(out: &mut String, x_label: &str, y_label: &str) {
    writeln!(
        out,
        r#"<path d="M{LEFT} {TOP} V{:.2} H{:.2}" stroke="black" fill="none"/>"#,
        H - BOTTOM,
        W - RIGHT
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        H - 15.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (TOP + H - BOTTOM) / 2.0,
        (TOP + H - BOTTOM) / 2.0,
        escape(y_label)
    )
    .unwrap();
}

fn y_ticks(out: &mut String, y_max: f64, to_y: impl Fn(f64) -> f64, fmt: impl Fn(f64) -> String) {
    for k in 0..=4 {
        let v = y_max * k as f64 / 4.0;
        let y = to_y(v);
        writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#,
            LEFT - 5.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            y + 4.0,
            fmt(v)
        )
        .unwrap();
    }
}

/// Rank versus `log10(tau)` step curves, one per profile, with plateau
/// values annotated.
pub fn staircase_svg(profiles: &[&RankProfile], title: &str) -> String {
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, "log10(tolerance)", "numerical rank");
    let logs: Vec<f64> = profiles
        .iter()
        .flat_map(|p| p.grid.values().iter().map(|t| t.log10()))
        .collect();
    let (x_lo, x_hi) = logs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let (x_lo, x_hi) = if x_hi > x_lo {
        (x_lo.floor(), x_hi.ceil())
    } else {
        (x_lo - 1.0, x_hi + 1.0)
    };
    let y_max = profiles
        .iter()
        .map(|p| p.ambient_dim.max(p.max_rank()))
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let to_x = |lx: f64| LEFT + (lx - x_lo) / (x_hi - x_lo) * (W - LEFT - RIGHT);
    let to_y = |r: f64| H - BOTTOM - r / y_max * (H - TOP - BOTTOM);

    let mut e = x_lo as i64;
    while e as f64 <= x_hi {
        let x = to_x(e as f64);
        writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            H - BOTTOM,
            H - BOTTOM + 5.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{e}</text>"#,
            H - BOTTOM + 18.0
        )
        .unwrap();
        e += 2;
    }
    y_ticks(&mut out, y_max, to_y, |v| format!("{v:.0}"));

    for (i, p) in profiles.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for (k, (t, r)) in p.grid.values().iter().zip(&p.ranks).enumerate() {
            let (x, y) = (to_x(t.log10()), to_y(*r as f64));
            if k == 0 {
                write!(d, "M{x:.2} {y:.2}").unwrap();
            } else {
                write!(d, " H{x:.2} V{y:.2}").unwrap();
            }
        }
        writeln!(out, r#"<path d="{d}" stroke="{color}" stroke-width="2" fill="none"/>"#).unwrap();
        for pl in detect_plateaus(p).iter().filter(|pl| pl.len() >= 3) {
            let mid = (p.grid.values()[pl.start_index].log10() + p.grid.values()[pl.end_index].log10()) / 2.0;
            writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" fill="{color}">{}</text>"#,
                to_x(mid),
                to_y(pl.rank_value as f64) - 6.0,
                pl.rank_value
            )
            .unwrap();
        }
        let label = if p.source_label.is_empty() {
            format!("profile {i}")
        } else {
            p.source_label.clone()
        };
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
            LEFT + 10.0,
            TOP + 14.0 * (i as f64 + 1.0),
            escape(&label)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn bars(out: &mut String, items: &[(String, f64, &str)], y_max: f64, fmt: impl Fn(f64) -> String) {
    let to_y = |v: f64| H - BOTTOM - v / y_max * (H - TOP - BOTTOM);
    y_ticks(out, y_max, to_y, &fmt);
    let slot = (W - LEFT - RIGHT) / items.len().max(1) as f64;
    for (k, (name, v, color)) in items.iter().enumerate() {
        let x = LEFT + slot * k as f64 + slot * 0.15;
        let y = to_y(*v);
        writeln!(
            out,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
            slot * 0.7,
            H - BOTTOM - y
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            x + slot * 0.35,
            y - 4.0,
            fmt(*v)
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
            x + slot * 0.35,
            H - BOTTOM + 14.0 + 12.0 * (k % 2) as f64,
            escape(name)
        )
        .unwrap();
    }
}

/// Bar per sector; an empty nullspace renders an "undefined" note.
pub fn sector_bars_svg(weights: &SectorWeights, title: &str) -> String {
    let mut out = String::new();
    header(&mut out, title);
    axes(
        &mut out,
        &format!(
            "sector (tolerance {:e}, nullspace dim {})",
            weights.tolerance, weights.nullspace_dim
        ),
        "nullspace weight",
    );
    match &weights.weights {
        None => {
            writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">undefined (empty nullspace)</text>"#,
                W / 2.0,
                H / 2.0
            )
            .unwrap();
        }
        Some(ws) => {
            let items: Vec<(String, f64, &str)> = ws
                .iter()
                .enumerate()
                .map(|(k, w)| (w.sector.clone(), w.weight, PALETTE[k % PALETTE.len()]))
                .collect();
            bars(&mut out, &items, 1.0, |v| format!("{v:.3}"));
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Rank of the widest plateau for baseline, each refinement and each
/// modification.
pub fn comparison_bars_svg(report: &ComparisonReport, title: &str) -> String {
    fn widest(p: &RankProfile) -> f64 {
        let pls = detect_plateaus(p);
        let best = pls.iter().fold(None::<&crate::rank::Plateau>, |acc, pl| match acc {
            Some(a) if a.len() >= pl.len() => Some(a),
            _ => Some(pl),
        });
        best.map_or(0.0, |pl| pl.rank_value as f64)
    }
    let mut items = vec![("baseline".to_string(), widest(&report.baseline_profile), "#7f7f7f")];
    items.extend(
        report
            .refinement_results
            .iter()
            .map(|r| (r.procedure.to_string(), widest(&r.profile), PALETTE[0])),
    );
    items.extend(
        report
            .modification_results
            .iter()
            .map(|m| (m.procedure.kind.to_string(), widest(&m.profile), PALETTE[1])),
    );
    let y_max = report.baseline_profile.ambient_dim.max(1) as f64;
    let mut out = String::new();
    header(&mut out, title);
    axes(
        &mut out,
        "procedure (blue: refinement, red: modification)",
        "rank of widest plateau",
    );
    bars(&mut out, &items, y_max, |v| format!("{v:.0}"));
    out.push_str("</svg>\n");
    out
}
