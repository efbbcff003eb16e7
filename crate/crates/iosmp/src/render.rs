//! Deterministic SVG rendering of 2D point-robot scenes: unit box, obstacle
//! disks, optional roadmap edges and paths. Equal inputs produce
//! byte-identical documents.

use crate::environment::Scenario;
use crate::error::{Error, Result};
use crate::geometry::ObstaclePrimitive;
use crate::path::Path;
use crate::roadmap::RoadmapDump;
use std::fmt::Write;

const VIEW: f64 = 640.0;
const MARGIN: f64 = 20.0;
const SCALE: f64 = VIEW - 2.0 * MARGIN;

/// Stroke colors cycled across rendered paths.
const PATH_COLORS: [&str; 4] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd"];

fn sx(x: f64) -> f64 {
    MARGIN + SCALE * x
}

/// SVG y grows downward; scene y grows upward.
fn sy(y: f64) -> f64 {
    MARGIN + SCALE * (1.0 - y)
}

/// Render a 2D scenario to an SVG document. Roadmap edges, when provided,
/// are drawn under the paths; path waypoint coordinates map affinely onto
/// the viewport.
pub fn render_scene_2d(
    scenario: &Scenario,
    roadmap: Option<&RoadmapDump>,
    paths: &[&Path],
) -> Result<String> {
    if scenario.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "2D rendering requested for a {}-dimensional scenario",
            scenario.dim()
        )));
    }
    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {VIEW} {VIEW}\">"
    )
    .unwrap();
    writeln!(
        svg,
        "  <rect x=\"{}\" y=\"{}\" width=\"{SCALE}\" height=\"{SCALE}\" fill=\"white\" stroke=\"black\" stroke-width=\"1\"/>",
        MARGIN, MARGIN
    )
    .unwrap();

    writeln!(svg, "  <g id=\"obstacles\" fill=\"#b0b0b0\" fill-opacity=\"0.8\">").unwrap();
    for o in &scenario.obstacles {
        if let ObstaclePrimitive::Hypersphere { center, radius } = o {
            writeln!(
                svg,
                "    <circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>",
                sx(center[0]),
                sy(center[1]),
                SCALE * radius
            )
            .unwrap();
        }
    }
    writeln!(svg, "  </g>").unwrap();

    if let Some(dump) = roadmap {
        writeln!(
            svg,
            "  <g id=\"roadmap\" stroke=\"#7f9fc4\" stroke-width=\"0.4\" stroke-opacity=\"0.7\">"
        )
        .unwrap();
        for e in &dump.edges {
            let a = &dump.vertices[e.u].q;
            let b = &dump.vertices[e.v].q;
            writeln!(
                svg,
                "    <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
                sx(a[0]),
                sy(a[1]),
                sx(b[0]),
                sy(b[1])
            )
            .unwrap();
        }
        writeln!(svg, "  </g>").unwrap();
    }

    for (i, p) in paths.iter().enumerate() {
        let color = PATH_COLORS[i % PATH_COLORS.len()];
        let points: Vec<String> = p
            .waypoints
            .iter()
            .map(|q| format!("{},{}", sx(q[0]), sy(q[1])))
            .collect();
        writeln!(
            svg,
            "  <polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>",
            color,
            points.join(" ")
        )
        .unwrap();
    }

    // start and goal markers
    writeln!(
        svg,
        "  <circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"#e377c2\"/>",
        sx(scenario.start[0]),
        sy(scenario.start[1])
    )
    .unwrap();
    if let crate::environment::GoalSpec::SingleConfig(g) = &scenario.goal {
        writeln!(
            svg,
            "  <circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"#17becf\"/>",
            sx(g[0]),
            sy(g[1])
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
