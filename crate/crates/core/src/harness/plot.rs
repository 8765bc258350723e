//! Bar charts rendered straight to RGB pixels, labelled with a 5×7 font.

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::write_png;

const W: usize = 640;
const H: usize = 400;
const LEFT: usize = 70;
const RIGHT: usize = 20;
const TOP: usize = 40;
const BOTTOM: usize = 90;
const PALETTE: [[u8; 3]; 6] = [
    [52, 101, 164],
    [204, 0, 0],
    [78, 154, 6],
    [196, 160, 0],
    [117, 80, 123],
    [206, 92, 0],
];

/// Rows of a glyph, 5 bits each, most significant bit on the left.
fn glyph(c: char) -> [u8; 7] {
    match c.to_ascii_uppercase() {
        '0' => [0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E],
        '1' => [0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E],
        '2' => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F],
        '3' => [0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E],
        '4' => [0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02],
        '5' => [0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E],
        '6' => [0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E],
        '7' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
        '8' => [0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E],
        '9' => [0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C],
        'A' => [0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'B' => [0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E],
        'C' => [0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E],
        'D' => [0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C],
        'E' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F],
        'F' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10],
        'G' => [0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F],
        'H' => [0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'I' => [0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E],
        'J' => [0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C],
        'K' => [0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11],
        'L' => [0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F],
        'M' => [0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11],
        'N' => [0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11],
        'O' => [0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'P' => [0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10],
        'Q' => [0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D],
        'R' => [0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11],
        'S' => [0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E],
        'T' => [0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04],
        'U' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'V' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04],
        'W' => [0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A],
        'X' => [0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11],
        'Y' => [0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04],
        'Z' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F],
        '.' => [0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C],
        '-' => [0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00],
        '+' => [0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00],
        '_' => [0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F],
        ':' => [0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00],
        '%' => [0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03],
        '(' => [0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02],
        ')' => [0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08],
        '/' => [0x00, 0x01, 0x02, 0x04, 0x08, 0x10, 0x00],
        '@' => [0x0E, 0x11, 0x17, 0x15, 0x17, 0x10, 0x0E],
        _ => [0; 7],
    }
}

struct Canvas {
    rgb: Vec<u8>,
}

impl Canvas {
    fn new() -> Self {
        Canvas { rgb: vec![255; W * H * 3] }
    }

    fn set(&mut self, x: usize, y: usize, c: [u8; 3]) {
        if x < W && y < H {
            let i = 3 * (y * W + x);
            self.rgb[i..i + 3].copy_from_slice(&c);
        }
    }

    fn rect(&mut self, x0: usize, y0: usize, x1: usize, y1: usize, c: [u8; 3]) {
        for y in y0.min(y1)..=y0.max(y1) {
            for x in x0.min(x1)..=x0.max(x1) {
                self.set(x, y, c);
            }
        }
    }

    /// Text with its top-left corner at (x, y); `vertical` writes bottom-up.
    fn text(&mut self, s: &str, x: usize, y: usize, vertical: bool) {
        for (n, ch) in s.chars().enumerate() {
            let g = glyph(ch);
            for (row, bits) in g.iter().enumerate() {
                for col in 0..5 {
                    if bits & (0x10 >> col) != 0 {
                        if vertical {
                            self.set(x + row, (y + 5).saturating_sub(n * 6 + col), [0; 3]);
                        } else {
                            self.set(x + n * 6 + col, y + row, [0; 3]);
                        }
                    }
                }
            }
        }
    }
}

fn format_value(v: f64) -> String {
    if v != 0.0 && (v.abs() < 0.01 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Bars of `(label, mean, stderr)` with a zero-based y axis.
pub fn bar_chart_png(title: &str, bars: &[(String, f64, f64)], path: &Path) -> Result<()> {
    if bars.is_empty() || bars.iter().any(|b| !b.1.is_finite() || !b.2.is_finite()) {
        return Err(Error::Argument(format!("cannot plot {title}: empty or non-finite values")));
    }
    let top = bars.iter().map(|b| b.1 + b.2).fold(0.0f64, f64::max);
    let top = if top > 0.0 { top * 1.1 } else { 1.0 };
    let plot_h = H - TOP - BOTTOM;
    let plot_w = W - LEFT - RIGHT;
    let y_of = |v: f64| H - BOTTOM - ((v.max(0.0) / top) * plot_h as f64).round() as usize;

    let mut c = Canvas::new();
    c.text(title, LEFT, 12, false);
    c.rect(LEFT, TOP, LEFT, H - BOTTOM, [0; 3]);
    c.rect(LEFT, H - BOTTOM, W - RIGHT, H - BOTTOM, [0; 3]);
    for t in 0..=4 {
        let v = top * t as f64 / 4.0;
        let y = y_of(v);
        c.rect(LEFT - 4, y, LEFT, y, [0; 3]);
        let label = format_value(v);
        c.text(&label, (LEFT - 6).saturating_sub(label.len() * 6), y.saturating_sub(3), false);
    }
    let slot = plot_w / bars.len();
    let bar_w = (slot * 2 / 3).max(1);
    for (i, (label, mean, err)) in bars.iter().enumerate() {
        let x0 = LEFT + i * slot + (slot - bar_w) / 2;
        let x1 = x0 + bar_w - 1;
        c.rect(x0, y_of(*mean), x1, H - BOTTOM - 1, PALETTE[i % PALETTE.len()]);
        if *err > 0.0 {
            let mid = (x0 + x1) / 2;
            let (hi, lo) = (y_of(mean + err), y_of(mean - err));
            c.rect(mid, hi, mid, lo, [0; 3]);
            c.rect(mid - 3, hi, mid + 3, hi, [0; 3]);
            c.rect(mid - 3, lo, mid + 3, lo, [0; 3]);
        }
        let value = format_value(*mean);
        c.text(&value, x0, y_of(*mean).saturating_sub(10), false);
        c.text(label, (x0 + x1) / 2 - 3, H - BOTTOM + 6 + label.len() * 6, true);
    }
    write_png(path, W, H, &c.rgb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_is_written_and_rejects_nan() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bars.png");
        let bars = vec![("GM".to_string(), 0.002, 0.0001), ("RS".to_string(), 0.0056, 0.0)];
        bar_chart_png("test chart", &bars, &path).unwrap();
        let (w, h, rgb) = crate::image::read_png(&path).unwrap();
        assert_eq!((w, h), (W, H));
        assert!(rgb.iter().any(|&v| v == 0));
        assert!(bar_chart_png("x", &[("a".into(), f64::NAN, 0.0)], &path).is_err());
    }
}
