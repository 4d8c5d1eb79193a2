//! Stroke tracing task over a strip of glyph cells.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::infill::infill_points;
use crate::types::{ActionVector, StateVector};

const FIXTURES: [&str; 6] = [
    include_str!("../../fixtures/glyphs/ha.json"),
    include_str!("../../fixtures/glyphs/na.json"),
    include_str!("../../fixtures/glyphs/ca.json"),
    include_str!("../../fixtures/glyphs/ra.json"),
    include_str!("../../fixtures/glyphs/ka.json"),
    include_str!("../../fixtures/glyphs/connector.json"),
];

pub const CONNECTOR: &str = "-";

/// Gold traces are stored on a 1/64 px grid so that replaying their
/// displacements reproduces them exactly.
const GRID: f64 = 64.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlyphFixture {
    pub glyph_id: String,
    pub trace: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WritingParams {
    pub cell_width: f64,
    pub cell_height: f64,
    pub max_glyphs: usize,
    pub brush_radius: f64,
    pub infill_threshold: f64,
    /// Horizon as a multiple of the gold trace length in steps.
    pub horizon_factor: f64,
    pub glyphs: BTreeMap<String, Vec<[f64; 2]>>,
}

impl Default for WritingParams {
    fn default() -> Self {
        let glyphs = FIXTURES
            .iter()
            .map(|src| {
                let f: GlyphFixture = serde_json::from_str(src).expect("bundled glyph fixture");
                (f.glyph_id, f.trace)
            })
            .collect();
        WritingParams {
            cell_width: 105.0,
            cell_height: 105.0,
            max_glyphs: 8,
            brush_radius: 2.0,
            infill_threshold: 1.0,
            horizon_factor: 1.5,
            glyphs,
        }
    }
}

impl WritingParams {
    pub fn width(&self) -> f64 {
        self.cell_width * self.max_glyphs as f64
    }

    pub fn height(&self) -> f64 {
        self.cell_height
    }

    pub fn alphabet(&self) -> Vec<String> {
        self.glyphs.keys().cloned().collect()
    }

    pub fn in_canvas(&self, s: &StateVector) -> bool {
        (0.0..self.width()).contains(&s[0]) && (0.0..self.height()).contains(&s[1])
    }

    /// Gold trace of a glyph sequence: glyph `i` is drawn in cell `i` and the
    /// pieces are joined into one pen-down stroke.
    pub fn gold_trace(&self, glyphs: &[String]) -> Result<Vec<[f64; 2]>> {
        if glyphs.is_empty() || glyphs.len() > self.max_glyphs {
            return Err(CoreError::InvalidParameter(format!(
                "glyph sequence length {} outside 1..={}",
                glyphs.len(),
                self.max_glyphs
            )));
        }
        let mut pts = Vec::new();
        for (i, g) in glyphs.iter().enumerate() {
            let trace = self
                .glyphs
                .get(g)
                .ok_or_else(|| CoreError::InvalidParameter(format!("unknown glyph `{g}`")))?;
            let dx = i as f64 * self.cell_width;
            pts.extend(trace.iter().map(|p| [p[0] + dx, p[1]]));
        }
        // Infill a little below the threshold so the grid snap keeps every gap
        // within it.
        let dense = infill_points(&pts, self.infill_threshold * 0.9);
        let mut out: Vec<[f64; 2]> = Vec::with_capacity(dense.len());
        for p in dense {
            let q = [snap(p[0]), snap(p[1])];
            if out.last() != Some(&q) {
                out.push(q);
            }
        }
        Ok(out)
    }

    pub fn horizon_for(&self, gold_len: usize) -> usize {
        ((gold_len as f64) * self.horizon_factor).ceil() as usize
    }
}

fn snap(v: f64) -> f64 {
    (v * GRID).round() / GRID
}

pub fn step(s: &StateVector, a: &ActionVector, p: &WritingParams) -> StateVector {
    let x = (s[0] + a.0[0]).clamp(0.0, p.width() - 1.0);
    let y = (s[1] + a.0[1]).clamp(0.0, p.height() - 1.0);
    StateVector(vec![x, y])
}

/// Binary raster of a pen trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Mask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn set(&mut self, x: i64, y: i64) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.bits[y as usize * self.width + x as usize] = true;
        }
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Stamps a disc of the given radius centred on the pixel nearest `p`.
    pub fn stamp(&mut self, p: [f64; 2], radius: f64) {
        let cx = (p[0] + 0.5).floor() as i64;
        let cy = (p[1] + 0.5).floor() as i64;
        let r = radius.floor() as i64;
        let r2 = radius * radius;
        for dy in -r..=r {
            for dx in -r..=r {
                if (dx * dx + dy * dy) as f64 <= r2 {
                    self.set(cx + dx, cy + dy);
                }
            }
        }
    }

    pub fn rasterize(points: &[[f64; 2]], radius: f64, width: usize, height: usize) -> Self {
        let mut m = Mask::new(width, height);
        for &p in points {
            m.stamp(p, radius);
        }
        m
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn iou(&self, other: &Mask) -> f64 {
        let (mut inter, mut union) = (0usize, 0usize);
        for (&a, &b) in self.bits.iter().zip(&other.bits) {
            inter += usize::from(a && b);
            union += usize::from(a || b);
        }
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }
}

/// `-(1 - IoU)`, exactly 0 for identical masks.
pub fn mask_reward(student: &Mask, gold: &Mask) -> f64 {
    if student == gold {
        return 0.0;
    }
    -(1.0 - student.iou(gold))
}

pub fn trace_reward(student: &[[f64; 2]], gold: &[[f64; 2]], p: &WritingParams) -> f64 {
    if student.is_empty() {
        return -1.0;
    }
    let (w, h) = (p.width() as usize, p.height() as usize);
    let s = Mask::rasterize(&infill_points(student, p.infill_threshold), p.brush_radius, w, h);
    let g = Mask::rasterize(&infill_points(gold, p.infill_threshold), p.brush_radius, w, h);
    mask_reward(&s, &g)
}

pub fn states_to_points(states: &[StateVector]) -> Vec<[f64; 2]> {
    states.iter().map(|s| [s[0], s[1]]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_has_six_glyphs_inside_a_cell() {
        let p = WritingParams::default();
        assert_eq!(p.glyphs.len(), 6);
        assert!(p.glyphs.contains_key(CONNECTOR));
        for t in p.glyphs.values() {
            assert!(t
                .iter()
                .all(|q| (0.0..p.cell_width).contains(&q[0]) && (0.0..p.cell_height).contains(&q[1])));
        }
    }

    #[test]
    fn gold_trace_is_dense_and_in_canvas() {
        let p = WritingParams::default();
        let seq: Vec<String> = ["ha", "-", "ka", "ra", "na", "ca", "-", "ha"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let g = p.gold_trace(&seq).unwrap();
        for w in g.windows(2) {
            let d = (w[0][0] - w[1][0]).abs().max((w[0][1] - w[1][1]).abs());
            assert!(d <= 1.0, "gap {d}");
        }
        assert!(g.iter().all(|q| q[0] < p.width() && q[1] < p.height()));
    }

    #[test]
    fn identical_traces_score_zero_and_disjoint_minus_one() {
        let p = WritingParams::default();
        let a = vec![[10.0, 10.0], [20.0, 10.0]];
        let b = vec![[10.0, 80.0], [20.0, 80.0]];
        assert_eq!(trace_reward(&a, &a, &p), 0.0);
        assert_eq!(trace_reward(&a, &b, &p), -1.0);
        assert_eq!(trace_reward(&[], &b, &p), -1.0);
    }
}
