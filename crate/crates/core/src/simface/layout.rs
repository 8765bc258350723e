//! The built-in cartoon face: 53 landmarks, ten localized motor fields.

use std::f64::consts::PI;

pub use crate::landmarks::LANDMARKS;
pub const DEFAULT_MOTORS: usize = 10;
pub const DEFAULT_WIDTH: usize = 96;
pub const DEFAULT_HEIGHT: usize = 64;
pub const DEFAULT_SIGMA: f64 = 0.9;

pub const JAW: std::ops::Range<usize> = 0..9;
pub const BROW_L: std::ops::Range<usize> = 9..14;
pub const BROW_R: std::ops::Range<usize> = 14..19;
pub const NOSE: std::ops::Range<usize> = 19..23;
pub const EYE_L: std::ops::Range<usize> = 23..29;
pub const EYE_R: std::ops::Range<usize> = 29..35;
pub const MOUTH_OUTER: std::ops::Range<usize> = 35..47;
pub const MOUTH_INNER: std::ops::Range<usize> = 47..53;

pub const MOTOR_NAMES: [&str; DEFAULT_MOTORS] = [
    "brow_raise_left",
    "brow_raise_right",
    "brow_furrow",
    "eye_close_left",
    "eye_close_right",
    "smile_left",
    "smile_right",
    "jaw_open",
    "pucker",
    "upper_lip_raise",
];

// face frame: u in [-1, 1] left to right, v in [-1, 1] top to bottom
const CX: f64 = 47.5;
const CY: f64 = 29.5;
const SX: f64 = 34.0;
const SY: f64 = 24.0;

const EYE_CENTER: (f64, f64) = (0.45, -0.28);
const EYE_HALF: (f64, f64) = (0.19, 0.16);
const MOUTH_CENTER_V: f64 = 0.55;
const OUTER_HALF: (f64, f64) = (0.42, 0.2);
const INNER_HALF: (f64, f64) = (0.25, 0.08);

fn px(u: f64, v: f64) -> [f64; 2] {
    [CX + SX * u, CY + SY * v]
}

/// Neutral positions for a 96×64 frame.
pub fn neutral() -> Vec<[f64; 2]> {
    let mut p = Vec::with_capacity(LANDMARKS);
    for i in 0..9 {
        let t = PI * i as f64 / 8.0;
        p.push(px(-0.95 * t.cos(), 0.95 * t.sin()));
    }
    for side in [-1.0, 1.0] {
        for i in 0..5 {
            // brows ordered left to right in the image
            let s = i as f64 / 4.0;
            let u = if side < 0.0 { -0.78 + 0.58 * s } else { 0.2 + 0.58 * s };
            let arch = 0.06 * (PI * s).sin();
            p.push(px(u, -0.68 - arch));
        }
    }
    p.push(px(0.0, -0.12));
    p.push(px(0.0, 0.12));
    p.push(px(-0.15, 0.22));
    p.push(px(0.15, 0.22));
    for side in [-1.0, 1.0] {
        // outer corner, upper outer, upper inner, inner corner, lower inner, lower outer
        let cu = side * EYE_CENTER.0;
        for deg in [180.0f64, 120.0, 60.0, 0.0, -60.0, -120.0] {
            let a = deg.to_radians();
            p.push(px(cu - side * EYE_HALF.0 * a.cos(), EYE_CENTER.1 - EYE_HALF.1 * a.sin()));
        }
    }
    // outer lip: left corner, over the top, right corner, back along the bottom
    for i in 0..12 {
        let a = (180.0 - 30.0 * i as f64).to_radians();
        p.push(px(OUTER_HALF.0 * a.cos(), MOUTH_CENTER_V - OUTER_HALF.1 * a.sin()));
    }
    for deg in [180.0f64, 120.0, 60.0, 0.0, -60.0, -120.0] {
        let a = deg.to_radians();
        p.push(px(INNER_HALF.0 * a.cos(), MOUTH_CENTER_V - INNER_HALF.1 * a.sin()));
    }
    debug_assert_eq!(p.len(), LANDMARKS);
    p
}

/// Polylines drawn by the renderer.
pub fn edges() -> Vec<Vec<usize>> {
    let closed = |r: std::ops::Range<usize>| {
        let mut v: Vec<usize> = r.clone().collect();
        v.push(r.start);
        v
    };
    vec![
        JAW.collect(),
        BROW_L.collect(),
        BROW_R.collect(),
        vec![19, 20],
        vec![21, 20, 22],
        closed(EYE_L),
        closed(EYE_R),
        closed(MOUTH_OUTER),
        closed(MOUTH_INNER),
    ]
}

// outer-lip indices by role
const OUTER_CORNER_L: usize = 35;
const OUTER_CORNER_R: usize = 41;
const OUTER_UPPER: [usize; 5] = [36, 37, 38, 39, 40];
const OUTER_LOWER: [usize; 5] = [42, 43, 44, 45, 46];
const INNER_CORNER_L: usize = 47;
const INNER_CORNER_R: usize = 50;
const INNER_UPPER: [usize; 2] = [48, 49];
const INNER_LOWER: [usize; 2] = [51, 52];

/// Motor displacement fields in pixels per unit command, `[motor][landmark]`.
pub fn displacements() -> Vec<Vec<[f64; 2]>> {
    let base = neutral();
    let mut d = vec![vec![[0.0; 2]; LANDMARKS]; DEFAULT_MOTORS];

    for (motor, brow, eye, outward) in [(0, BROW_L, EYE_L, -1.0), (1, BROW_R, EYE_R, 1.0)] {
        for k in brow {
            let outer = ((base[k][0] - CX) * outward / (0.78 * SX)).clamp(0.0, 1.0);
            d[motor][k] = [0.0, -4.0 - outer];
        }
        for k in [eye.start + 1, eye.start + 2] {
            d[motor][k] = [0.0, -0.8];
        }
        // skin stretch: the eye and the nose bridge follow the brow outward a little
        for k in eye {
            d[motor][k][0] = outward * 0.5;
        }
        d[motor][19] = [outward * 0.4, 0.0];
    }
    for k in BROW_L.chain(BROW_R) {
        let outward = if base[k][0] < CX { -1.0 } else { 1.0 };
        let m = if outward < 0.0 { 0 } else { 1 };
        d[m][k][0] = outward * 0.6;
    }

    // furrow pulls the inner brow ends down and towards the midline
    for (k, w) in [(13, 1.0), (12, 0.6), (11, 0.3), (14, 1.0), (15, 0.6), (16, 0.3)] {
        let toward = if base[k][0] < CX { 1.0 } else { -1.0 };
        d[2][k] = [toward * 2.5 * w, 3.0 * w];
    }

    for (motor, eye) in [(3, EYE_L), (4, EYE_R)] {
        let s = eye.start;
        d[motor][s] = [0.0, 0.5];
        d[motor][s + 3] = [0.0, 0.5];
        d[motor][s + 1] = [0.0, 3.0];
        d[motor][s + 2] = [0.0, 3.0];
        d[motor][s + 4] = [0.0, -0.8];
        d[motor][s + 5] = [0.0, -0.8];
    }

    for (motor, sign, outer_c, inner_c, near, eye) in [
        (5, -1.0, OUTER_CORNER_L, INNER_CORNER_L, [36, 46], EYE_L),
        (6, 1.0, OUTER_CORNER_R, INNER_CORNER_R, [40, 42], EYE_R),
    ] {
        d[motor][outer_c] = [sign * 3.0, -2.5];
        d[motor][inner_c] = [sign * 2.2, -2.2];
        for k in near {
            d[motor][k] = [sign * 1.5, -1.5];
        }
        d[motor][eye.start + 4] = [0.0, -0.4];
        d[motor][eye.start + 5] = [0.0, -0.4];
        // the whole mouth, the nose wings and the chin drift towards the pulling side
        for k in MOUTH_OUTER.chain(MOUTH_INNER) {
            if d[motor][k] == [0.0, 0.0] {
                d[motor][k] = [sign * 0.5, 0.0];
            }
        }
        for k in 20..23 {
            d[motor][k][0] = sign * 0.5;
        }
        d[motor][4][0] = sign * 0.5;
    }

    for (i, k) in JAW.enumerate() {
        let t = PI * i as f64 / 8.0;
        d[7][k] = [-0.04 * (base[k][0] - CX), 0.6 + 5.4 * t.sin().powi(2)];
    }
    for k in OUTER_LOWER {
        d[7][k] = [0.0, 5.5];
    }
    for k in INNER_LOWER {
        d[7][k] = [0.0, 5.0];
    }
    for k in [OUTER_CORNER_L, OUTER_CORNER_R, INNER_CORNER_L, INNER_CORNER_R] {
        d[7][k] = [0.0, 2.0];
    }

    let mouth_c = px(0.0, MOUTH_CENTER_V);
    for k in MOUTH_OUTER.chain(MOUTH_INNER) {
        d[8][k] = [-0.25 * (base[k][0] - mouth_c[0]), -0.25 * (base[k][1] - mouth_c[1])];
    }

    for k in OUTER_UPPER {
        d[9][k] = [0.0, -3.0];
    }
    for k in INNER_UPPER {
        d[9][k] = [0.0, -2.5];
    }
    d[9][20] = [0.0, -0.5];
    d[9][21] = [0.0, -1.2];
    d[9][22] = [0.0, -1.2];
    d[2][19] = [0.0, 1.0];
    d
}
