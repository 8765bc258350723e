//! Landmark detection by windowed, intensity-weighted centroids.
//!
//! Each landmark searches a window around its neutral position whose
//! half-width is its maximum displacement plus three blob widths. Neighbouring
//! blobs routinely fall inside a window, so centroids are computed with soft
//! ownership: every pixel's blob intensity is shared between the landmarks
//! whose windows contain it in proportion to a Gaussian of the current
//! estimates. An isolated blob reduces to the plain centroid.
//!
//! Starting points come from a coarse-to-fine least-squares fit of a motor
//! command to the blob image, which keeps landmarks that travel further than
//! their neighbour spacing from locking onto the wrong blob.

use super::render::{background, span, BLOB_AMPLITUDE};
use super::rig::FaceRig;
use crate::error::{Error, Result};
use crate::image::SelfImage;
use crate::landmarks::{Landmark, LandmarkSet, LANDMARKS};

/// Detection threshold as a fraction of the blob amplitude.
pub const DETECT_THRESHOLD: f64 = 0.1;

const ANNEAL: [f64; 8] = [1.3, 1.1, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
/// Blob widths (in units of sigma) for the successive command fits.
const FIT_SCALES: [f64; 3] = [3.0, 1.5, 1.0];
const FIT_ITERS: usize = 4;
/// Weight of the implicit "nobody" owner, the kernel value at 3 widths.
const STRAY: f64 = 0.011_108_996_538_242_306;
/// Residuals this close to the background are treated as noise.
const FLOOR: f64 = 0.01;

struct Window {
    x: std::ops::Range<usize>,
    y: std::ops::Range<usize>,
}

fn windows(rig: &FaceRig) -> Vec<Window> {
    let (w, h) = rig.dims();
    rig.neutral()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let r = rig.max_displacement(k) + 3.0 * rig.blob_sigma();
            Window {
                x: span(p[0] - r, p[0] + r, w),
                y: span(p[1] - r, p[1] + r, h),
            }
        })
        .collect()
}

/// Detects all landmarks of `rig` in `image`. Landmarks whose blob strength
/// falls below the threshold get confidence 0 and their neutral position.
pub fn detect_landmarks(rig: &FaceRig, image: &SelfImage) -> Result<LandmarkSet> {
    let (w, h) = rig.dims();
    if image.dims() != (w, h) {
        return Err(Error::Dimension(format!(
            "rig renders {w}x{h}, image is {}x{}",
            image.width(),
            image.height()
        )));
    }
    let bg = background(rig);
    let signal: Vec<f64> = image
        .plane(0)
        .iter()
        .zip(&bg[0])
        .map(|(&v, &b)| ((v as f64 - b - FLOOR) / BLOB_AMPLITUDE).max(0.0))
        .collect();

    let wins = windows(rig);
    let sigma = rig.blob_sigma();
    let mut est = rig.positions_unchecked(&fit_command(rig, &signal));
    let mut denom = vec![0.0; w * h];

    let kernel_box = |p: [f64; 2], win: &Window, s: f64| {
        let r = 4.0 * s;
        let xs = span(p[0] - r, p[0] + r, w);
        let ys = span(p[1] - r, p[1] + r, h);
        (
            xs.start.max(win.x.start)..xs.end.min(win.x.end),
            ys.start.max(win.y.start)..ys.end.min(win.y.end),
        )
    };

    for &scale in &ANNEAL {
        let s = scale * sigma;
        let k = -0.5 / (s * s);
        denom.fill(STRAY);
        for (p, win) in est.iter().zip(&wins) {
            let (xs, ys) = kernel_box(*p, win, s);
            for y in ys {
                let dy = y as f64 - p[1];
                for x in xs.clone() {
                    let dx = x as f64 - p[0];
                    denom[y * w + x] += (k * (dx * dx + dy * dy)).exp();
                }
            }
        }
        let mut next = est.clone();
        for (i, (p, win)) in est.iter().zip(&wins).enumerate() {
            let (xs, ys) = kernel_box(*p, win, s);
            let (mut m, mut sx, mut sy) = (0.0, 0.0, 0.0);
            for y in ys {
                let dy = y as f64 - p[1];
                for x in xs.clone() {
                    let v = signal[y * w + x];
                    if v == 0.0 {
                        continue;
                    }
                    let dx = x as f64 - p[0];
                    let own = (k * (dx * dx + dy * dy)).exp() / denom[y * w + x];
                    m += v * own;
                    sx += v * own * x as f64;
                    sy += v * own * y as f64;
                }
            }
            if m > 1e-9 {
                next[i] = [
                    (sx / m).clamp(win.x.start as f64, (win.x.end - 1) as f64),
                    (sy / m).clamp(win.y.start as f64, (win.y.end - 1) as f64),
                ];
            }
        }
        est = next;
    }

    // blob strength: least-squares amplitude of the owned signal under a unit blob
    let k = -0.5 / (sigma * sigma);
    denom.fill(STRAY);
    for (p, win) in est.iter().zip(&wins) {
        let (xs, ys) = kernel_box(*p, win, sigma);
        for y in ys {
            for x in xs.clone() {
                let (dx, dy) = (x as f64 - p[0], y as f64 - p[1]);
                denom[y * w + x] += (k * (dx * dx + dy * dy)).exp();
            }
        }
    }
    let mut out = Vec::with_capacity(LANDMARKS);
    for (i, (p, win)) in est.iter().zip(&wins).enumerate() {
        let (xs, ys) = kernel_box(*p, win, sigma);
        let (mut num, mut den) = (0.0, 0.0);
        for y in ys {
            for x in xs.clone() {
                let (dx, dy) = (x as f64 - p[0], y as f64 - p[1]);
                let g = (k * (dx * dx + dy * dy)).exp();
                num += signal[y * w + x] * g * g / denom[y * w + x];
                den += g * g;
            }
        }
        // the floor removed a little of the peak; add it back before judging
        let strength = if den > 0.0 { num / den + FLOOR / BLOB_AMPLITUDE } else { 0.0 };
        out.push(if strength < DETECT_THRESHOLD {
            rig.undetected(i)
        } else {
            Landmark {
                x: p[0],
                y: p[1],
                confidence: strength.min(1.0),
            }
        });
    }
    LandmarkSet::new(out)
}

/// Separable Gaussian blur with standard deviation `tau`.
fn blur(src: &[f64], w: usize, h: usize, tau: f64) -> Vec<f64> {
    if tau <= 0.0 {
        return src.to_vec();
    }
    let r = (3.0 * tau).ceil() as isize;
    let kernel: Vec<f64> = (-r..=r).map(|i| (-0.5 * (i * i) as f64 / (tau * tau)).exp()).collect();
    let norm: f64 = kernel.iter().sum();
    let pass = |src: &[f64], horizontal: bool| {
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (j, kv) in kernel.iter().enumerate() {
                    let o = j as isize - r;
                    let (sx, sy) = if horizontal { (x as isize + o, y as isize) } else { (x as isize, y as isize + o) };
                    if sx >= 0 && sy >= 0 && (sx as usize) < w && (sy as usize) < h {
                        acc += kv * src[sy as usize * w + sx as usize];
                    }
                }
                out[y * w + x] = acc / norm;
            }
        }
        out
    };
    pass(&pass(src, true), false)
}

/// Least-squares motor command whose blob image best explains `signal`,
/// fitted by damped Gauss-Newton on progressively sharper blurs.
fn fit_command(rig: &FaceRig, signal: &[f64]) -> Vec<f64> {
    let (w, h) = rig.dims();
    let n = rig.motors();
    let sigma = rig.blob_sigma();
    let fields = &rig.spec().displacements;
    let movers: Vec<Vec<(usize, [f64; 2])>> = (0..LANDMARKS)
        .map(|kk| {
            (0..n)
                .filter(|&m| fields[m][kk] != [0.0, 0.0])
                .map(|m| (m, fields[m][kk]))
                .collect()
        })
        .collect();
    let mut cmd = vec![0.25; n];
    let mut trial_model = vec![0.0; w * h];
    let mut model = vec![0.0; w * h];
    let mut jac = vec![0.0; w * h * n];

    for &scale in &FIT_SCALES {
        let sf = scale * sigma;
        let target = blur(signal, w, h, (sf * sf - sigma * sigma).max(0.0).sqrt());
        let amp = (sigma * sigma) / (sf * sf);
        let k = -0.5 / (sf * sf);
        let radius = 3.0 * sf;

        // fills model (and the Jacobian when asked) and returns the squared error
        let evaluate = |cmd: &[f64], model: &mut [f64], jac: Option<&mut [f64]>| -> f64 {
            let pts = rig.positions_unchecked(cmd);
            model.fill(0.0);
            let mut jac = jac;
            if let Some(j) = jac.as_deref_mut() {
                j.fill(0.0);
            }
            for (kk, p) in pts.iter().enumerate() {
                for y in span(p[1] - radius, p[1] + radius, h) {
                    let dy = y as f64 - p[1];
                    for x in span(p[0] - radius, p[0] + radius, w) {
                        let dx = x as f64 - p[0];
                        let g = amp * (k * (dx * dx + dy * dy)).exp();
                        let q = y * w + x;
                        model[q] += g;
                        if let Some(j) = jac.as_deref_mut() {
                            let (gx, gy) = (g * dx / (sf * sf), g * dy / (sf * sf));
                            for &(m, d) in &movers[kk] {
                                j[q * n + m] += gx * d[0] + gy * d[1];
                            }
                        }
                    }
                }
            }
            model.iter().zip(&target).map(|(m, t)| (t - m) * (t - m)).sum()
        };

        let mut err = evaluate(&cmd, &mut model, Some(&mut jac));
        let mut lambda = 1e-3;
        for _ in 0..FIT_ITERS {
            let mut jtj = vec![0.0; n * n];
            let mut jtr = vec![0.0; n];
            for q in 0..w * h {
                let row = &jac[q * n..(q + 1) * n];
                if row.iter().all(|&v| v == 0.0) {
                    continue;
                }
                let r = target[q] - model[q];
                for a in 0..n {
                    jtr[a] += row[a] * r;
                    for b in a..n {
                        jtj[a * n + b] += row[a] * row[b];
                    }
                }
            }
            for a in 0..n {
                for b in 0..a {
                    jtj[a * n + b] = jtj[b * n + a];
                }
            }
            let mut improved = false;
            for _ in 0..6 {
                let mut sys = jtj.clone();
                for a in 0..n {
                    sys[a * n + a] += lambda * jtj[a * n + a] + 1e-9;
                }
                let Some(step) = solve(&mut sys, jtr.clone(), n) else {
                    lambda *= 10.0;
                    continue;
                };
                let trial: Vec<f64> = cmd.iter().zip(&step).map(|(c, s)| (c + s).clamp(0.0, 1.0)).collect();
                let e = evaluate(&trial, &mut trial_model, None);
                if e < err {
                    cmd = trial;
                    err = evaluate(&cmd, &mut model, Some(&mut jac));
                    lambda = (lambda * 0.3).max(1e-6);
                    improved = true;
                    break;
                }
                lambda *= 10.0;
            }
            if !improved {
                break;
            }
        }
    }
    cmd
}

/// Solves the symmetric positive system in place by Cholesky; `None` if it is not positive definite.
fn solve(a: &mut [f64], mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d <= 0.0 {
            return None;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    Some(b)
}
