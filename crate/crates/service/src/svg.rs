//! Static SVG rendering of a layout.

use std::f64::consts::PI;
use std::fmt::Write as _;

use aqs_core::layout::{CellMark, GridLayout};

const LEVEL_GAP: f64 = 22.0;
const PAD: f64 = 10.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn pie(out: &mut String, cell: &CellMark, r: f64) {
    let slices = cell.peek.as_deref().unwrap_or_default();
    if let [only] = slices {
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="{r:.2}" fill="{}"/>"#, cell.cx, cell.cy, only.color);
        return;
    }
    let mut angle = -PI / 2.0;
    for s in slices {
        let next = angle + s.fraction * 2.0 * PI;
        let (x0, y0) = (cell.cx + r * angle.cos(), cell.cy + r * angle.sin());
        let (x1, y1) = (cell.cx + r * next.cos(), cell.cy + r * next.sin());
        let large = u8::from(s.fraction > 0.5);
        let _ = writeln!(
            out,
            r#"<path d="M{:.2},{:.2} L{x0:.2},{y0:.2} A{r:.2},{r:.2} 0 {large} 1 {x1:.2},{y1:.2} Z" fill="{}"><title>{}: {}</title></path>"#,
            cell.cx,
            cell.cy,
            s.color,
            esc(&s.category),
            s.count
        );
        angle = next;
    }
}

pub fn render(layout: &GridLayout) -> String {
    let left = PAD + LEVEL_GAP * layout.v_labels.len().max(1) as f64 + 40.0;
    let top = PAD + LEVEL_GAP * layout.h_labels.len() as f64;
    let width = left + layout.surface_width + PAD;
    let height = top + layout.surface_height + PAD;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.2} {height:.2}" font-family="sans-serif" font-size="11">"#
    );
    out.push_str(
        "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" orient=\"auto-start-reverse\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#999\"/></marker></defs>\n",
    );

    for level in &layout.h_labels {
        let y = PAD + LEVEL_GAP * level.level as f64 + 12.0;
        if level.show_name {
            let _ = writeln!(out, r#"<text x="{PAD}" y="{y:.2}" font-weight="bold">{}</text>"#, esc(&level.attribute));
        }
        for span in &level.spans {
            let x = left + (span.start + span.end) / 2.0;
            let _ = writeln!(
                out,
                r#"<text x="{x:.2}" y="{y:.2}" text-anchor="middle"{}>{}</text>"#,
                if span.piled { r#" font-style="italic""# } else { "" },
                esc(&span.category)
            );
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" x2="{:.2}" y1="{:.2}" y2="{:.2}" stroke="#ccc"/>"##,
                left + span.start,
                left + span.end,
                y + 4.0,
                y + 4.0
            );
        }
    }
    for level in &layout.v_labels {
        let x = PAD + LEVEL_GAP * level.level as f64;
        if level.show_name {
            let _ = writeln!(
                out,
                r#"<text x="{x:.2}" y="{top:.2}" font-weight="bold" transform="rotate(-90 {x:.2} {top:.2})" text-anchor="end">{}</text>"#,
                esc(&level.attribute)
            );
        }
        for span in &level.spans {
            let y = top + (span.start + span.end) / 2.0;
            let tx = x + 12.0;
            let _ = writeln!(
                out,
                r#"<text x="{tx:.2}" y="{y:.2}" transform="rotate(-90 {tx:.2} {y:.2})" text-anchor="middle"{}>{}</text>"#,
                if span.piled { r#" font-style="italic""# } else { "" },
                esc(&span.category)
            );
        }
    }

    let _ = writeln!(out, r#"<g transform="translate({left:.2},{top:.2})">"#);
    let _ = writeln!(
        out,
        r##"<rect x="0" y="0" width="{:.2}" height="{:.2}" fill="none" stroke="#eee"/>"##,
        layout.surface_width, layout.surface_height
    );
    let r = layout.node_radius;
    for cell in layout.cells.iter().filter(|c| c.count > 0) {
        if cell.peek.is_some() {
            pie(&mut out, cell, r);
        } else {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{r:.2}" fill="{}"><title>{}</title></circle>"#,
                cell.cx, cell.cy, cell.color, cell.count
            );
        }
        if layout.show_counts {
            let fill = if cell.color_value > 0.5 && cell.peek.is_none() { "#fff" } else { "#000" };
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" dominant-baseline="central" fill="{fill}">{}</text>"#,
                cell.cx, cell.cy, cell.count
            );
        }
    }
    let style = &layout.link_style;
    for link in &layout.links {
        let d = if link.self_loop {
            format!(
                "M{:.2},{:.2} C{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}",
                link.x1,
                link.y1,
                link.x1 - 2.0 * r,
                link.cy,
                link.x1 + 2.0 * r,
                link.cy,
                link.x2,
                link.y2
            )
        } else {
            format!(
                "M{:.2},{:.2} Q{:.2},{:.2} {:.2},{:.2}",
                link.x1, link.y1, link.cx, link.cy, link.x2, link.y2
            )
        };
        let _ = writeln!(
            out,
            r#"<path d="{d}" fill="none" stroke="{}" stroke-opacity="{}" stroke-width="{:.2}"{}/>"#,
            style.color,
            style.opacity,
            link.thickness,
            if link.arrow { r#" marker-end="url(#arrow)""# } else { "" }
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}
