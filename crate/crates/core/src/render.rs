//! Value heatmaps over grid layouts.
//!
//! Values map linearly onto a single-hue ramp from dark (minimum) to light
//! (maximum). Walls are drawn in a color off the ramp.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gridworld::{Cell, GridLayout};

const DARK: (f64, f64, f64) = (8.0, 29.0, 88.0);
const LIGHT: (f64, f64, f64) = (237.0, 248.0, 255.0);
pub const WALL_COLOR: &str = "#7f7f7f";
/// Gray level used for walls in PGM output; the ramp starts above it.
pub const WALL_GRAY: u8 = 0;
const GRAY_LOW: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Legend {
    pub min: f64,
    pub max: f64,
}

impl Legend {
    pub fn of(values: &[f64]) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { min, max }
    }

    /// Position of `v` on the ramp in `[0, 1]`; a constant map sits at the
    /// middle.
    pub fn position(&self, v: f64) -> f64 {
        if self.max > self.min {
            ((v - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
        } else {
            0.5
        }
    }

    /// Sidecar legend text.
    pub fn to_text(&self) -> String {
        format!("min = {}\nmax = {}\nramp = dark (min) to light (max)\nwalls = {WALL_COLOR}\n", self.min, self.max)
    }

    pub fn from_text(text: &str) -> Option<Self> {
        let mut min = None;
        let mut max = None;
        for line in text.lines() {
            if let Some((k, v)) = line.split_once('=') {
                match k.trim() {
                    "min" => min = v.trim().parse().ok(),
                    "max" => max = v.trim().parse().ok(),
                    _ => {}
                }
            }
        }
        Some(Self { min: min?, max: max? })
    }
}

/// RGB color at ramp position `t`. Every channel increases with `t`, so
/// lightness is monotone.
pub fn ramp(t: f64) -> (u8, u8, u8) {
    let mix = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    (mix(DARK.0, LIGHT.0), mix(DARK.1, LIGHT.1), mix(DARK.2, LIGHT.2))
}

pub fn gray(t: f64) -> u8 {
    (GRAY_LOW + (255.0 - GRAY_LOW) * t).round() as u8
}

fn check(values: &[f64], layout: &GridLayout) -> Result<Legend> {
    if values.len() != layout.n_states() {
        return Err(Error::Shape {
            expected: layout.n_states(),
            actual: values.len(),
        });
    }
    Ok(Legend::of(values))
}

/// SVG with one `cell`-pixel square per grid cell.
pub fn render_svg(values: &[f64], layout: &GridLayout, cell: usize) -> Result<String> {
    let legend = check(values, layout)?;
    let (w, h) = (layout.width() * cell, layout.height() * cell);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    for r in 0..layout.height() {
        for c in 0..layout.width() {
            let fill = match layout.state_at(r, c) {
                Some(s) => {
                    let (red, green, blue) = ramp(legend.position(values[s]));
                    format!("#{red:02x}{green:02x}{blue:02x}")
                }
                None => WALL_COLOR.to_string(),
            };
            let kind = if layout.cell(r, c) == Cell::Goal { " class=\"goal\"" } else { "" };
            writeln!(
                out,
                r#"<rect x="{}" y="{}" width="{cell}" height="{cell}" fill="{fill}"{kind}/>"#,
                c * cell,
                r * cell
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Plain (P2) PGM with one `cell`×`cell` block per grid cell.
pub fn render_pgm(values: &[f64], layout: &GridLayout, cell: usize) -> Result<String> {
    let legend = check(values, layout)?;
    let (w, h) = (layout.width() * cell, layout.height() * cell);
    let mut out = format!("P2\n# min {} max {}\n{w} {h}\n255\n", legend.min, legend.max);
    for r in 0..layout.height() {
        let row: Vec<String> = (0..layout.width())
            .flat_map(|c| {
                let g = match layout.state_at(r, c) {
                    Some(s) => gray(legend.position(values[s])),
                    None => WALL_GRAY,
                };
                std::iter::repeat_n(g.to_string(), cell)
            })
            .collect();
        let line = row.join(" ");
        for _ in 0..cell {
            out.push_str(&line);
            out.push('\n');
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    #[default]
    Svg,
    Pgm,
}

impl ImageFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Svg => "svg",
            ImageFormat::Pgm => "pgm",
        }
    }

    pub fn render(self, values: &[f64], layout: &GridLayout) -> Result<String> {
        match self {
            ImageFormat::Svg => render_svg(values, layout, 20),
            ImageFormat::Pgm => render_pgm(values, layout, 8),
        }
    }
}
