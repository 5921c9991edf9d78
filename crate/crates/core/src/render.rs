//! Software rasterizer for cells and problem sheets.
//!
//! Coverage is counted on a 4x4 subsample grid per pixel and blended with
//! integer arithmetic. Rotations use a constant sine/cosine table, so the
//! same cell and style give the same bytes on every platform.

use std::io;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::generator::stream_rng;
use crate::model::{Cell, ObjectSpec, Problem, GIVEN_CELLS, SLOTS};
use crate::vocab::Vocabulary;

pub const CELL_PX: u32 = 250;
const SUB: i64 = 4;
const SUB2: u32 = (SUB * SUB) as u32;

/// `(cos, sin)` of `k * 45` degrees.
const ROT: [(f64, f64); 8] = {
    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;
    [(1.0, 0.0), (H, H), (0.0, 1.0), (-H, H), (-1.0, 0.0), (-H, -H), (0.0, -1.0), (H, -H)]
};

/// Outer and inner star vertices, unit radius, pointing up.
const STAR: [(f64, f64); 10] = [
    (0.0, -1.0),
    (0.235_114_1, -0.323_606_8),
    (0.951_056_5, -0.309_017_0),
    (0.380_422_6, 0.123_606_8),
    (0.587_785_3, 0.809_017_0),
    (0.0, 0.4),
    (-0.587_785_3, 0.809_017_0),
    (-0.380_422_6, 0.123_606_8),
    (-0.951_056_5, -0.309_017_0),
    (-0.235_114_1, -0.323_606_8),
];

const TRIANGLE: [(f64, f64); 3] = [(0.0, -1.0), (0.866_025_4, 0.5), (-0.866_025_4, 0.5)];

/// Glyph outlines. Every glyph fits in the unit disc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Glyph {
    Circle,
    Square,
    Triangle,
    Diamond,
    Star,
    Cross,
}

impl Glyph {
    pub const ALL: [Glyph; 6] = [Glyph::Circle, Glyph::Square, Glyph::Triangle, Glyph::Diamond, Glyph::Star, Glyph::Cross];

    fn from_label(label: &str, code: u8) -> Glyph {
        match label {
            "circle" => Glyph::Circle,
            "square" => Glyph::Square,
            "triangle" => Glyph::Triangle,
            "diamond" => Glyph::Diamond,
            "star" => Glyph::Star,
            "cross" => Glyph::Cross,
            _ => Glyph::ALL[code as usize % 6],
        }
    }

    fn contains(self, x: f64, y: f64) -> bool {
        match self {
            Glyph::Circle => x * x + y * y <= 1.0,
            Glyph::Square => x.abs() <= 0.7 && y.abs() <= 0.7,
            Glyph::Diamond => x.abs() + y.abs() <= 1.0,
            Glyph::Cross => (x.abs() <= 0.3 && y.abs() <= 0.9) || (y.abs() <= 0.3 && x.abs() <= 0.9),
            Glyph::Triangle => in_polygon(&TRIANGLE, x, y),
            Glyph::Star => in_polygon(&STAR, x, y),
        }
    }
}

/// Even-odd crossing test.
fn in_polygon(poly: &[(f64, f64)], x: f64, y: f64) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[j];
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FillStyle {
    Solid,
    Hollow,
    Hatched,
}

impl FillStyle {
    fn from_label(label: &str, code: u8) -> FillStyle {
        match label {
            "solid" => FillStyle::Solid,
            "hollow" => FillStyle::Hollow,
            "hatched" => FillStyle::Hatched,
            _ => [FillStyle::Solid, FillStyle::Hollow, FillStyle::Hatched][code as usize % 3],
        }
    }
}

/// Seed-deterministic per-object color jitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Jitter {
    pub seed: u64,
    /// Maximum absolute offset per channel.
    pub amplitude: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleConfig {
    pub background: [u8; 3],
    /// RGB per color label; unknown labels fall back to `fallback_palette`.
    pub palette: Vec<(String, [u8; 3])>,
    pub fallback_palette: Vec<[u8; 3]>,
    /// Glyph radius in pixels per size code (small, medium, large).
    pub size_radius: Vec<f64>,
    /// Anchor per slot, in pixels from the cell center.
    pub anchors: [(f64, f64); SLOTS as usize],
    /// Outline thickness for hollow and hatched fills, as a fraction of the radius.
    pub outline: f64,
    /// Hatch stripe period in glyph-local units.
    pub hatch_period: f64,
    pub jitter: Option<Jitter>,
}

impl Default for StyleConfig {
    fn default() -> Self {
        // Slot 0 is the center, slots 1..=5 sit on a ring, clockwise from the top.
        const R: f64 = 72.0;
        let ring = |k: usize| {
            let (s, c) = [
                (0.0, 1.0),
                (0.951_056_5, 0.309_017_0),
                (0.587_785_3, -0.809_017_0),
                (-0.587_785_3, -0.809_017_0),
                (-0.951_056_5, 0.309_017_0),
            ][k];
            (R * s, -R * c)
        };
        StyleConfig {
            background: [255, 255, 255],
            palette: [
                ("red", [220, 40, 40]),
                ("green", [40, 160, 60]),
                ("blue", [40, 80, 220]),
                ("yellow", [230, 200, 30]),
                ("gray", [140, 140, 140]),
                ("black", [20, 20, 20]),
            ]
            .into_iter()
            .map(|(n, c)| (n.to_string(), c))
            .collect(),
            fallback_palette: vec![[200, 100, 0], [120, 0, 160], [0, 150, 150], [160, 80, 120]],
            size_radius: vec![20.0, 32.0, 48.0],
            anchors: [(0.0, 0.0), ring(0), ring(1), ring(2), ring(3), ring(4)],
            outline: 0.22,
            hatch_period: 0.35,
            jitter: None,
        }
    }
}

impl StyleConfig {
    fn color(&self, label: &str, code: u8) -> [u8; 3] {
        self.palette
            .iter()
            .find(|(n, _)| n == label)
            .map(|(_, c)| *c)
            .unwrap_or_else(|| self.fallback_palette[code as usize % self.fallback_palette.len()])
    }

    fn radius(&self, size_code: Option<u8>) -> f64 {
        let i = size_code.map_or(self.size_radius.len() / 2, |c| c as usize);
        self.size_radius[i.min(self.size_radius.len() - 1)]
    }

    /// Largest glyph radius in pixels.
    pub fn max_radius(&self) -> f64 {
        self.size_radius.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl RgbImage {
    pub fn filled(width: u32, height: u32, color: [u8; 3]) -> Self {
        let data = color.iter().copied().cycle().take((width * height * 3) as usize).collect();
        RgbImage { width, height, data }
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = ((y * self.width + x) * 3) as usize;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    fn blend(&mut self, x: u32, y: u32, color: [u8; 3], coverage: u32) {
        let i = ((y * self.width + x) * 3) as usize;
        for (old, &new) in self.data[i..i + 3].iter_mut().zip(&color) {
            *old = ((*old as u32 * (SUB2 - coverage) + new as u32 * coverage + SUB2 / 2) / SUB2) as u8;
        }
    }

    fn fill_rect(&mut self, x0: u32, y0: u32, w: u32, h: u32, color: [u8; 3]) {
        for y in y0..(y0 + h).min(self.height) {
            for x in x0..(x0 + w).min(self.width) {
                self.blend(x, y, color, SUB2);
            }
        }
    }

    fn blit(&mut self, src: &RgbImage, x0: u32, y0: u32) {
        for y in 0..src.height {
            let s = (y * src.width * 3) as usize;
            let d = (((y0 + y) * self.width + x0) * 3) as usize;
            self.data[d..d + (src.width * 3) as usize].copy_from_slice(&src.data[s..s + (src.width * 3) as usize]);
        }
    }

    /// PNG bytes with fixed encoder settings.
    pub fn to_png(&self) -> Vec<u8> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width, self.height);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            enc.set_compression(png::Compression::Fast);
            enc.set_filter(png::Filter::Sub);
            let mut w = enc.write_header().expect("in-memory PNG header");
            w.write_image_data(&self.data).expect("in-memory PNG data");
        }
        out
    }

    pub fn write_png(&self, path: &std::path::Path) -> io::Result<()> {
        std::fs::write(path, self.to_png())
    }
}

/// Everything the rasterizer needs about one object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sprite {
    pub glyph: Glyph,
    pub fill: FillStyle,
    pub color: [u8; 3],
    pub rotation: u8,
    pub center: (f64, f64),
    pub radius: f64,
}

impl Sprite {
    pub fn of(o: &ObjectSpec, vocab: &Vocabulary, style: &StyleConfig) -> Sprite {
        let code = |name: &str| vocab.lookup(name).map(|t| (o.value(t), vocab.label(t, o.value(t))));
        let glyph = code("shape").map_or(Glyph::Circle, |(c, l)| Glyph::from_label(l, c));
        let fill = code("fill").map_or(FillStyle::Solid, |(c, l)| FillStyle::from_label(l, c));
        let color = code("color").map_or([0, 0, 0], |(c, l)| style.color(l, c));
        let rotation = code("rotation").map_or(0, |(c, _)| c % 8);
        let radius = style.radius(code("size").map(|(c, _)| c));
        let (ax, ay) = style.anchors[(o.identity.slot % SLOTS) as usize];
        let half = CELL_PX as f64 / 2.0;
        Sprite { glyph, fill, color, rotation, center: (half + ax, half + ay), radius }
    }

    /// Pixel bounding box `(x0, y0, x1, y1)`, inclusive, clipped to the cell.
    pub fn bounds(&self) -> (u32, u32, u32, u32) {
        let lo = |c: f64| (c - self.radius - 1.0).floor().clamp(0.0, (CELL_PX - 1) as f64) as u32;
        let hi = |c: f64| (c + self.radius + 1.0).ceil().clamp(0.0, (CELL_PX - 1) as f64) as u32;
        (lo(self.center.0), lo(self.center.1), hi(self.center.0), hi(self.center.1))
    }

    /// Whether a canvas point is painted.
    fn covers(&self, px: f64, py: f64, style: &StyleConfig) -> bool {
        let (c, s) = ROT[self.rotation as usize];
        let dx = (px - self.center.0) / self.radius;
        let dy = (py - self.center.1) / self.radius;
        // Inverse rotation into glyph space (y points down).
        let x = c * dx + s * dy;
        let y = -s * dx + c * dy;
        if !self.glyph.contains(x, y) {
            return false;
        }
        let shrink = 1.0 - style.outline;
        let on_outline = !self.glyph.contains(x / shrink, y / shrink);
        match self.fill {
            FillStyle::Solid => true,
            FillStyle::Hollow => on_outline,
            FillStyle::Hatched => on_outline || ((x + y) / style.hatch_period).floor().rem_euclid(2.0) == 0.0,
        }
    }
}

fn jittered(color: [u8; 3], jitter: Option<Jitter>, key: u64, object: usize) -> [u8; 3] {
    match jitter {
        Some(j) if j.amplitude > 0 => {
            let mut rng = stream_rng(j.seed, key, 0x6a17 + object as u64);
            let a = j.amplitude as i32;
            color.map(|v| (v as i32 + rng.random_range(-a..=a)).clamp(0, 255) as u8)
        }
        _ => color,
    }
}

fn draw(img: &mut RgbImage, sprite: &Sprite, style: &StyleConfig) {
    let (x0, y0, x1, y1) = sprite.bounds();
    for py in y0..=y1 {
        for px in x0..=x1 {
            let mut n = 0;
            for sy in 0..SUB {
                for sx in 0..SUB {
                    let fx = px as f64 + (2 * sx + 1) as f64 / (2 * SUB) as f64;
                    let fy = py as f64 + (2 * sy + 1) as f64 / (2 * SUB) as f64;
                    n += sprite.covers(fx, fy, style) as u32;
                }
            }
            if n > 0 {
                img.blend(px, py, sprite.color, n);
            }
        }
    }
}

/// Renders one cell with objects drawn in ascending identity order.
pub fn render_cell(cell: &Cell, vocab: &Vocabulary, style: &StyleConfig) -> RgbImage {
    render_cell_keyed(cell, vocab, style, 0)
}

/// As [`render_cell`]; `key` selects the jitter stream for this image.
pub fn render_cell_keyed(cell: &Cell, vocab: &Vocabulary, style: &StyleConfig, key: u64) -> RgbImage {
    let mut img = RgbImage::filled(CELL_PX, CELL_PX, style.background);
    for (i, o) in cell.objects().iter().enumerate() {
        let mut sprite = Sprite::of(o, vocab, style);
        sprite.color = jittered(sprite.color, style.jitter, key, i);
        draw(&mut img, &sprite, style);
    }
    img
}

const GUTTER: u32 = 12;
const FRAME: [u8; 3] = [60, 60, 60];
const HOLE: [u8; 3] = [215, 215, 215];

/// Jitter key of cell `pos` (0..16) of problem `index`.
pub fn image_key(index: u64, pos: usize) -> u64 {
    index * 16 + pos as u64
}

/// The 3x3 query grid with a shaded hole, then the candidates four per row.
pub fn render_problem_sheet(problem: &Problem, style: &StyleConfig) -> RgbImage {
    let step = CELL_PX + GUTTER;
    let cols = 4u32;
    let cand_rows = (problem.candidates.len() as u32).div_ceil(cols);
    let width = GUTTER + cols * step;
    let height = GUTTER + 3 * step + GUTTER + cand_rows * step;
    let mut img = RgbImage::filled(width, height, [250, 250, 250]);
    let grid_x = (width - 3 * step + GUTTER) / 2;
    let place = |img: &mut RgbImage, tile: Option<&RgbImage>, x: u32, y: u32| {
        img.fill_rect(x - 2, y - 2, CELL_PX + 4, CELL_PX + 4, FRAME);
        match tile {
            Some(t) => img.blit(t, x, y),
            None => {
                img.fill_rect(x, y, CELL_PX, CELL_PX, HOLE);
                let m = CELL_PX / 2;
                img.fill_rect(x + m - 20, y + m - 20, 40, 40, FRAME);
            }
        }
    };
    for pos in 0..9 {
        let x = grid_x + (pos as u32 % 3) * step;
        let y = GUTTER + (pos as u32 / 3) * step;
        if pos < GIVEN_CELLS {
            let tile = render_cell(&problem.grid.cells()[pos], &problem.vocab, style);
            place(&mut img, Some(&tile), x, y);
        } else {
            place(&mut img, None, x, y);
        }
    }
    let top = GUTTER + 3 * step + GUTTER;
    for (k, cand) in problem.candidates.iter().enumerate() {
        let x = GUTTER + (k as u32 % cols) * step;
        let y = top + (k as u32 / cols) * step;
        let tile = render_cell(cand, &problem.vocab, style);
        place(&mut img, Some(&tile), x, y);
    }
    img
}
