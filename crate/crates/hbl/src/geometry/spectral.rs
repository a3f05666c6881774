//! Pseudo-spectral differentiation on the periodic grid.
//!
//! Derivatives are exact for band-limited fields, which is what every Stokes
//! and integration-by-parts identity in the verification suites relies on.

use super::background::Background;
use super::grid::GridField;
use crate::linalg::C64;
use rayon::prelude::*;

struct SendPtr(*mut C64);
// Lanes write to pairwise-disjoint index sets, so shared mutable access is
// race-free.
unsafe impl Send for SendPtr {}
unsafe impl Sync for SendPtr {}

impl SendPtr {
    fn get(&self) -> *mut C64 {
        self.0
    }
}

/// Applies a per-mode complex multiplier along one real axis:
/// out = IFFT( mult(k) * FFT(f) ) lane by lane.
fn axis_apply(bg: &Background, f: &GridField, axis: usize, mult: &[C64]) -> GridField {
    let n_grid = bg.grid;
    assert_eq!(f.points, bg.points(), "field does not match grid");
    assert_eq!(mult.len(), n_grid);
    let stride = bg.axis_stride(axis);
    let rr = f.r * f.r;
    let blocks = f.points / (n_grid * stride);
    let mut out = GridField::zeros(f.points, f.r);
    let out_ptr = SendPtr(out.data.as_mut_ptr());
    let fwd = bg.fft_fwd().clone();
    let inv = bg.fft_inv().clone();
    let lanes: Vec<(usize, usize, usize)> = (0..rr)
        .flat_map(|e| {
            (0..blocks).flat_map(move |b| (0..stride).map(move |i| (e, b, i)))
        })
        .collect();
    lanes.par_iter().for_each_init(
        || {
            (
                vec![C64::new(0.0, 0.0); n_grid],
                vec![
                    C64::new(0.0, 0.0);
                    fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())
                ],
            )
        },
        |(buf, scratch), &(e, b, i)| {
            let base = b * n_grid * stride + i;
            for k in 0..n_grid {
                buf[k] = f.data[(base + k * stride) * rr + e];
            }
            fwd.process_with_scratch(buf, scratch);
            for k in 0..n_grid {
                buf[k] *= mult[k];
            }
            inv.process_with_scratch(buf, scratch);
            let scale = 1.0 / n_grid as f64;
            let p = out_ptr.get();
            for k in 0..n_grid {
                // disjoint per lane
                unsafe {
                    *p.add((base + k * stride) * rr + e) = buf[k] * scale;
                }
            }
        },
    );
    out
}

/// d/d(axis) by spectral differentiation (2*pi*i*k multipliers, Nyquist zeroed).
pub fn axis_derivative(bg: &Background, f: &GridField, axis: usize) -> GridField {
    let mult: Vec<C64> = (0..bg.grid)
        .map(|k| C64::new(0.0, 2.0 * std::f64::consts::PI * bg.signed_freq(k) as f64))
        .collect();
    axis_apply(bg, f, axis, &mult)
}

/// Holomorphic coordinate derivative d/dz^alpha = (d/dx - i d/dy)/2.
pub fn dz(bg: &Background, f: &GridField, alpha: usize) -> GridField {
    let dx = axis_derivative(bg, f, 2 * alpha);
    let dy = axis_derivative(bg, f, 2 * alpha + 1);
    let mut out = dx;
    out.axpy(C64::new(0.0, -1.0), &dy);
    out.scale(C64::new(0.5, 0.0))
}

/// Anti-holomorphic coordinate derivative d/dzbar^alpha = (d/dx + i d/dy)/2.
pub fn dzbar(bg: &Background, f: &GridField, alpha: usize) -> GridField {
    let dx = axis_derivative(bg, f, 2 * alpha);
    let dy = axis_derivative(bg, f, 2 * alpha + 1);
    let mut out = dx;
    out.axpy(C64::new(0.0, 1.0), &dy);
    out.scale(C64::new(0.5, 0.0))
}

/// Band limits a field: modes with |k| > band on any axis are dropped, and a
/// Gaussian taper exp(-(|k|/sigma)^2) is applied when `taper` is given. The
/// taper keeps edge-of-band mass tiny so that pointwise products alias far
/// below identity tolerances.
pub fn band_limit(bg: &Background, f: &GridField, band: usize, taper: Option<f64>) -> GridField {
    let mut out = f.clone();
    for axis in 0..bg.axes() {
        let mult: Vec<C64> = (0..bg.grid)
            .map(|k| {
                let kk = bg.signed_freq(k).unsigned_abs() as usize;
                if kk > band || 2 * k == bg.grid {
                    C64::new(0.0, 0.0)
                } else {
                    match taper {
                        Some(sigma) => {
                            let t = kk as f64 / sigma;
                            C64::new((-t * t).exp(), 0.0)
                        }
                        None => C64::new(1.0, 0.0),
                    }
                }
            })
            .collect();
        out = axis_apply(bg, &out, axis, &mult);
    }
    out
}

/// Builds a field from a closure over real coordinates in [0,1)^{2n},
/// ordered (x1, y1, ..., xn, yn).
pub fn field_from_fn(
    bg: &Background,
    r: usize,
    f: impl Fn(&[f64], &mut [C64]) + Sync,
) -> GridField {
    let axes = bg.axes();
    let points = bg.points();
    let mut out = GridField::zeros(points, r);
    let rr = r * r;
    out.data
        .par_chunks_mut(rr)
        .enumerate()
        .for_each(|(p, chunk)| {
            let mut coords = vec![0.0f64; axes];
            let mut rem = p;
            for a in (0..axes).rev() {
                coords[a] = (rem % bg.grid) as f64 / bg.grid as f64;
                rem /= bg.grid;
            }
            f(&coords, chunk);
        });
    out
}
