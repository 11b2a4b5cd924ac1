use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crestwave::evolution::{EnergyRow, Snapshot};
use crestwave::verify::CrestScan;

pub const ENERGY_HEADER: &str = "t,ea_1,ea_23,ea_4,eb_1,eb_2,eb_3,anchor,total,minA1,holo_drift";

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn energy_csv(rows: &[EnergyRow]) -> String {
    let mut s = String::from(ENERGY_HEADER);
    s.push('\n');
    for r in rows {
        let e = &r.energy;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            e.t, e.ea_1, e.ea_23, e.ea_4, e.eb_1, e.eb_2, e.eb_3, e.anchor, e.total, r.min_a1, r.holo_drift
        );
    }
    s
}

pub fn write_snapshots(dir: &Path, snaps: &[Snapshot]) -> Result<()> {
    let d = dir.join("snapshots");
    fs::create_dir_all(&d)?;
    for s in snaps {
        write_json(&d.join(format!("t={}.json", s.t)), s)?;
    }
    Ok(())
}

pub fn scan_csv(scans: &[CrestScan]) -> String {
    let mut s = String::from("r,n,norm1,norm2,classification\n");
    for sc in scans {
        for row in &sc.rows {
            let _ = writeln!(s, "{},{},{},{},{}", sc.r, row.n, row.norm1, row.norm2, sc.classification.as_str());
        }
    }
    s
}

/// Log-scale line plot of the energy components and the total.
pub fn energy_svg(rows: &[EnergyRow]) -> String {
    const W: f64 = 720.0;
    const H: f64 = 420.0;
    const PAD: f64 = 50.0;
    let names = ["ea_1", "ea_23", "ea_4", "eb_1", "eb_2", "eb_3", "anchor", "total"];
    let colors = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#7f7f7f", "#000000"];
    let series: Vec<Vec<(f64, f64)>> = (0..8)
        .map(|k| {
            rows.iter()
                .map(|r| {
                    let e = &r.energy;
                    let v = if k < 7 { e.components()[k] } else { e.total };
                    (e.t, v.max(1e-16).log10())
                })
                .collect()
        })
        .collect();
    let pts = series.iter().flatten();
    let (t0, t1) = pts.clone().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (y0, y1) = pts.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let tspan = if t1 > t0 { t1 - t0 } else { 1.0 };
    let x = |t: f64| PAD + (t - t0) / tspan * (W - 2.0 * PAD);
    let y = |v: f64| H - PAD - (v - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let mut e = y0;
    while e <= y1 {
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">1e{e}</text>"#, PAD - 4.0, y(e) + 4.0);
        e += ((y1 - y0) / 8.0).ceil().max(1.0);
    }
    let _ = writeln!(s, r#"<text x="{PAD}" y="{}">t = {t0}</text>"#, H - PAD + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">t = {t1}</text>"#, W - PAD, H - PAD + 16.0);
    for (k, ser) in series.iter().enumerate() {
        let path: Vec<String> = ser.iter().map(|&(t, v)| format!("{:.2},{:.2}", x(t), y(v))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{}" points="{}"/>"#, colors[k], path.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{}">{}</text>"#,
            W - PAD + 4.0,
            PAD + 14.0 * k as f64,
            colors[k],
            names[k]
        );
    }
    s.push_str("</svg>\n");
    s
}
