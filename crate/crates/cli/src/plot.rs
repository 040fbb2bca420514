//! Static SVG renderings: the log-scale spectrum with labeled sidebands and
//! the two-manifold dressed-level diagram.

use std::fmt::Write as _;

use fluorspec::{CouplingBlocks64, DressedLevels64, PeakSet64, Spectrum64, TransitionTable64};

const W: f64 = 1100.0;
const H: f64 = 520.0;
const ML: f64 = 70.0;
const MR: f64 = 25.0;
const MT: f64 = 30.0;
const MB: f64 = 55.0;

fn svg_header(out: &mut String) {
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"##
    );
    let _ = writeln!(
        out,
        r##"<rect width="{W}" height="{H}" fill="white"/><g font-family="sans-serif" font-size="12">"##
    );
}

fn svg_footer(out: &mut String) {
    out.push_str("</g></svg>\n");
}

/// Log-scale one-photon spectrum with detected peaks annotated `T_i`
/// (positive side) and `T'_i` (mirror side); the central line is `C`.
pub fn spectrum_svg(spectrum: &Spectrum64, peaks: &PeakSet64) -> String {
    let max_s = spectrum.max_value().max(f64::MIN_POSITIVE);
    let top = max_s.log10().ceil();
    let decades = 8.0;
    let bottom = top - decades;
    let (x0, x1) = (
        spectrum.omega.first().copied().unwrap_or(-1.0),
        spectrum.omega.last().copied().unwrap_or(1.0),
    );
    let px = |om: f64| ML + (om - x0) / (x1 - x0) * (W - ML - MR);
    let py = |logs: f64| MT + (top - logs) / decades * (H - MT - MB);

    let mut out = String::new();
    svg_header(&mut out);

    // axes and decade gridlines
    for k in 0..=decades as i64 {
        let yl = top - k as f64;
        let y = py(yl);
        let _ = writeln!(
            out,
            r##"<line x1="{ML}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##,
            W - MR
        );
        let _ = writeln!(
            out,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{yl:.0}</text>"##,
            ML - 6.0,
            y + 4.0
        );
    }
    let tick = ((x1 - x0) / 10.0).round().max(1.0);
    let mut om_tick = (x0 / tick).ceil() * tick;
    while om_tick <= x1 {
        let x = px(om_tick);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##,
            MT,
            H - MB
        );
        let _ = writeln!(
            out,
            r##"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{om_tick:.0}</text>"##,
            H - MB + 18.0
        );
        om_tick += tick;
    }
    let _ = writeln!(
        out,
        r##"<text x="{:.2}" y="{:.2}" text-anchor="middle">omega - omega_L (units of the decay rate)</text>"##,
        (ML + W - MR) / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        out,
        r##"<text x="16" y="{:.2}" transform="rotate(-90 16 {:.2})" text-anchor="middle">S(omega) (log)</text>"##,
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    );

    // curve
    out.push_str(r##"<polyline fill="none" stroke="#1a55a0" stroke-width="1" points=""##);
    for (om, v) in spectrum.omega.iter().zip(spectrum.values.iter()) {
        let logs = v.max(f64::MIN_POSITIVE).log10().max(bottom);
        let _ = write!(out, "{:.2},{:.2} ", px(*om), py(logs));
    }
    out.push_str("\"/>\n");

    // peak markers and labels
    let mut positive: Vec<&fluorspec::spectrum::Peak<f64>> =
        peaks.peaks.iter().filter(|p| p.center > 1.0).collect();
    positive.sort_by(|a, b| a.center.abs().partial_cmp(&b.center.abs()).unwrap());
    let label_of = |center: f64| -> String {
        if center.abs() <= 1.0 {
            return "C".into();
        }
        let rank = positive
            .iter()
            .position(|p| (p.center - center.abs()).abs() < 1e-9)
            .or_else(|| {
                positive
                    .iter()
                    .position(|p| (p.center + center).abs() < 1.0 || (p.center - center).abs() < 1.0)
            });
        match (rank, center > 0.0) {
            (Some(r), true) => format!("T{}", r + 1),
            (Some(r), false) => format!("T'{}", r + 1),
            (None, _) => String::new(),
        }
    };
    for p in &peaks.peaks {
        let x = px(p.center);
        let y = py(p.height.max(f64::MIN_POSITIVE).log10().max(bottom));
        let _ = writeln!(
            out,
            r##"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="none" stroke="#c03030"/>"##
        );
        let _ = writeln!(
            out,
            r##"<text x="{x:.2}" y="{:.2}" text-anchor="middle" fill="#c03030">{}</text>"##,
            y - 8.0,
            label_of(p.center)
        );
    }

    svg_footer(&mut out);
    out
}

/// Two adjacent dressed manifolds with the emission-allowed transitions
/// drawn between them. Levels are labeled `u0..` bottom-up; line opacity
/// scales with the transition amplitude.
pub fn levels_svg(
    levels: &DressedLevels64,
    table: &TransitionTable64,
    blocks: &CouplingBlocks64,
) -> String {
    let d = levels.dim();
    let e_min = levels.energies.first().copied().unwrap_or(0.0);
    let e_max = levels.energies.last().copied().unwrap_or(1.0);
    let pad = 0.08 * (e_max - e_min).max(1.0);
    let py = |e: f64| MT + (e_max + pad - e) / (e_max - e_min + 2.0 * pad) * (H - MT - MB);
    let (lx0, lx1) = (ML + 40.0, ML + 240.0);
    let (rx0, rx1) = (W - MR - 240.0, W - MR - 40.0);

    let mut out = String::new();
    svg_header(&mut out);
    let _ = writeln!(
        out,
        r##"<text x="{:.2}" y="{MT}" text-anchor="middle">manifold n</text>"##,
        (lx0 + lx1) / 2.0
    );
    let _ = writeln!(
        out,
        r##"<text x="{:.2}" y="{MT}" text-anchor="middle">manifold n-1 (shifted by omega_L)</text>"##,
        (rx0 + rx1) / 2.0
    );

    let max_amp = table.max_amplitude().max(f64::MIN_POSITIVE);
    for i in 0..d {
        for j in 0..d {
            if i == j || table.amplitude[[i, j]].norm() < blocks.threshold {
                continue;
            }
            let opacity = 0.15 + 0.85 * (table.amplitude[[i, j]].norm() / max_amp);
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#b06020" stroke-opacity="{opacity:.3}"/>"##,
                lx1,
                py(levels.energies[i]),
                rx0,
                py(levels.energies[j]),
            );
        }
    }

    let block_color = ["#1a55a0", "#208040", "#a03070", "#705010"];
    for (which, (x0, x1)) in [(0, (lx0, lx1)), (1, (rx0, rx1))] {
        for (k, &e) in levels.energies.iter().enumerate() {
            let y = py(e);
            let color = blocks
                .block_of(k)
                .map(|b| block_color[b % block_color.len()])
                .unwrap_or("#333");
            let _ = writeln!(
                out,
                r##"<line x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2.5"/>"##
            );
            if which == 0 {
                let _ = writeln!(
                    out,
                    r##"<text x="{:.2}" y="{:.2}" text-anchor="end">u{k} ({e:.2})</text>"##,
                    x0 - 6.0,
                    y + 4.0
                );
            } else {
                let _ = writeln!(
                    out,
                    r##"<text x="{:.2}" y="{:.2}">u{k}</text>"##,
                    x1 + 6.0,
                    y + 4.0
                );
            }
        }
    }

    svg_footer(&mut out);
    out
}
