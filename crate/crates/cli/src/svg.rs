//! Deterministic SVG 1.1 chart rendering.
//!
//! One dot per cyclic summand in the window: filled for the λ-free part,
//! hollow with a `λ^k` badge for torsion. Census arrows draw with slope
//! `(-1, +r)`. Output depends only on the document, window, and options.

use std::fmt::Write as _;

use synss_core::degree::Window;
use synss_core::pages::Order;

use crate::format::PagesDoc;

const CELL: i32 = 36;
const MARGIN: i32 = 48;

#[derive(Clone, Copy, Debug, Default)]
pub struct RenderOptions {
    pub arrows: bool,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RenderError {
    WindowOutside { requested: Window, available: Window },
    NoWindow,
}

impl std::fmt::Display for RenderError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RenderError::WindowOutside { requested, available } => write!(
                f,
                "requested window {requested} is not contained in the document window {available}"
            ),
            RenderError::NoWindow => {
                write!(f, "no window requested and the document declares none")
            }
        }
    }
}

impl std::error::Error for RenderError {}

/// Pretty display names for transliterated decorations.
fn display_name(name: &str) -> String {
    name.replace("D-", "Δ").replace("kb-", "κ̄")
}

fn display_support(s: &synss_core::chart::Support) -> String {
    s.names().iter().map(|n| display_name(n)).collect::<Vec<_>>().join("+")
}

/// Render the summands of `doc` inside `window` as an SVG document.
pub fn render_svg(
    doc: &PagesDoc,
    window: Option<Window>,
    options: &RenderOptions,
) -> Result<String, RenderError> {
    let window = match (window, doc.window) {
        (Some(w), Some(avail)) => {
            if !avail.contains_window(&w) {
                return Err(RenderError::WindowOutside { requested: w, available: avail });
            }
            w
        }
        (Some(w), None) => w,
        (None, Some(w)) => w,
        (None, None) => return Err(RenderError::NoWindow),
    };

    let width = MARGIN * 2 + (window.s_max - window.s_min + 1) * CELL;
    let height = MARGIN * 2 + (window.f_max - window.f_min + 1) * CELL;
    let x = |stem: i32| MARGIN + (stem - window.s_min) * CELL + CELL / 2;
    let y = |filt: i32| height - MARGIN - (filt - window.f_min) * CELL - CELL / 2;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(
        svg,
        "<defs><marker id=\"arrow\" markerWidth=\"8\" markerHeight=\"8\" refX=\"6\" refY=\"3\" orient=\"auto\"><path d=\"M0,0 L6,3 L0,6 z\" fill=\"#d33\"/></marker></defs>"
    );
    let _ = writeln!(svg, "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>");

    // grid and axis labels
    for s in window.s_min..=window.s_max {
        let gx = x(s);
        let _ = writeln!(
            svg,
            "<line x1=\"{gx}\" y1=\"{}\" x2=\"{gx}\" y2=\"{}\" stroke=\"#eee\"/>",
            MARGIN,
            height - MARGIN
        );
        let _ = writeln!(
            svg,
            "<text x=\"{gx}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\" fill=\"#555\">{s}</text>",
            height - MARGIN + 16
        );
    }
    for f in window.f_min..=window.f_max {
        let gy = y(f);
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{gy}\" x2=\"{}\" y2=\"{gy}\" stroke=\"#eee\"/>",
            MARGIN,
            width - MARGIN
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\" fill=\"#555\">{f}</text>",
            MARGIN - 8,
            gy + 3
        );
    }

    // summand dots, offset within a bidegree by sorted position
    let mut summands: Vec<_> = doc
        .summands
        .iter()
        .filter(|s| window.contains(s.stem, s.filt))
        .collect();
    summands.sort_by(|a, b| {
        (a.stem, a.filt, &a.support, a.exp).cmp(&(b.stem, b.filt, &b.support, b.exp))
    });
    let mut seen: std::collections::BTreeMap<(i32, i32), i32> = std::collections::BTreeMap::new();
    for s in &summands {
        let slot = seen.entry((s.stem, s.filt)).or_insert(0);
        let count_before = *slot;
        *slot += 1;
        let cx = x(s.stem) + count_before * 9 - 0;
        let cy = y(s.filt);
        let label = display_support(&s.support);
        match s.order {
            Order::Free => {
                let _ = writeln!(
                    svg,
                    "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"3.5\" fill=\"black\"><title>{label}</title></circle>"
                );
            }
            Order::Torsion(k) => {
                let _ = writeln!(
                    svg,
                    "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"3.5\" fill=\"white\" stroke=\"black\"><title>{label}</title></circle>"
                );
                let _ = writeln!(
                    svg,
                    "<text x=\"{}\" y=\"{}\" font-size=\"9\" fill=\"#06c\">λ^{k}</text>",
                    cx + 5,
                    cy - 4
                );
            }
        }
    }

    if options.arrows {
        let mut census = doc.census.clone();
        census.sort_by(|a, b| {
            (a.page, a.source_bidegree, &a.source).cmp(&(b.page, b.source_bidegree, &b.source))
        });
        for c in &census {
            let (ss, sf) = c.source_bidegree;
            let (ts, tf) = (ss - 1, sf + c.page as i32);
            if !window.contains(ss, sf) || !window.contains(ts, tf) {
                continue;
            }
            let _ = writeln!(
                svg,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#d33\" stroke-width=\"1\" marker-end=\"url(#arrow)\"><title>d{}({}) = {}</title></line>",
                x(ss),
                y(sf),
                x(ts),
                y(tf),
                c.page,
                display_support(&c.source),
                display_support(&c.target),
            );
        }
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{CensusLine, PageSummand};
    use synss_core::chart::{Support, Truncation};

    fn toy_doc() -> PagesDoc {
        PagesDoc {
            truncation: Truncation::Infinite,
            window: Some(Window::new(0, 3, 0, 5)),
            r_max: 2,
            summands: vec![
                PageSummand {
                    stem: 0,
                    filt: 3,
                    exp: 0,
                    support: Support::singleton("b"),
                    order: Order::Torsion(1),
                    tag: None,
                },
                PageSummand {
                    stem: 3,
                    filt: 1,
                    exp: 0,
                    support: Support::singleton("h2"),
                    order: Order::Free,
                    tag: None,
                },
            ],
            census: vec![CensusLine {
                page: 2,
                source_bidegree: (1, 1),
                source: Support::singleton("a"),
                target: Support::singleton("b"),
            }],
            links: vec![],
        }
    }

    #[test]
    fn deterministic_and_counted() {
        let doc = toy_doc();
        let opts = RenderOptions { arrows: true };
        let a = render_svg(&doc, None, &opts).unwrap();
        let b = render_svg(&doc, None, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.matches("<circle").count(), 2);
        assert!(a.contains("λ^1"));
        assert!(a.contains("marker-end"));
        assert!(a.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\""));
    }

    #[test]
    fn empty_window_has_axes_only() {
        let mut doc = toy_doc();
        doc.summands.clear();
        doc.census.clear();
        let svg = render_svg(&doc, None, &RenderOptions::default()).unwrap();
        assert_eq!(svg.matches("<circle").count(), 0);
        assert!(svg.contains("<line"));
    }

    #[test]
    fn window_containment_checked() {
        let doc = toy_doc();
        let err = render_svg(&doc, Some(Window::new(0, 10, 0, 5)), &RenderOptions::default());
        assert!(matches!(err, Err(RenderError::WindowOutside { .. })));
    }
}
