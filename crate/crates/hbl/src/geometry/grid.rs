//! Matrix-valued fields sampled on the periodic grid.

use crate::error::{HblError, Result};
use crate::linalg::{self, C64};
use rayon::prelude::*;

/// A complex r x r matrix per grid point. Point count is carried explicitly
/// so the same algebra also serves single-point (constant) data.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub r: usize,
    pub points: usize,
    pub data: Vec<C64>,
}

impl GridField {
    pub fn zeros(points: usize, r: usize) -> Self {
        GridField {
            r,
            points,
            data: vec![C64::new(0.0, 0.0); points * r * r],
        }
    }

    pub fn constant(points: usize, r: usize, m: &[C64]) -> Self {
        assert_eq!(m.len(), r * r);
        let mut data = Vec::with_capacity(points * r * r);
        for _ in 0..points {
            data.extend_from_slice(m);
        }
        GridField { r, points, data }
    }

    pub fn identity(points: usize, r: usize) -> Self {
        Self::constant(points, r, &linalg::identity(r))
    }

    pub fn scalar_constant(points: usize, c: C64) -> Self {
        Self::constant(points, 1, &[c])
    }

    pub fn at(&self, p: usize) -> &[C64] {
        let rr = self.r * self.r;
        &self.data[p * rr..(p + 1) * rr]
    }

    pub fn at_mut(&mut self, p: usize) -> &mut [C64] {
        let rr = self.r * self.r;
        &mut self.data[p * rr..(p + 1) * rr]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, c: C64) -> GridField {
        GridField {
            r: self.r,
            points: self.points,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add(&self, other: &GridField) -> GridField {
        assert_eq!(self.data.len(), other.data.len());
        GridField {
            r: self.r,
            points: self.points,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &GridField) -> GridField {
        assert_eq!(self.data.len(), other.data.len());
        GridField {
            r: self.r,
            points: self.points,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn axpy(&mut self, c: C64, other: &GridField) {
        assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    /// Pointwise matrix product. A rank-1 factor acts as a scalar multiplier on
    /// the other side, so scalar forms compose with matrix forms transparently.
    pub fn matmul(&self, other: &GridField) -> GridField {
        assert_eq!(self.points, other.points, "grid size mismatch");
        if self.r == 1 && other.r > 1 {
            let r = other.r;
            let mut out = GridField::zeros(self.points, r);
            out.data
                .par_chunks_mut(r * r)
                .zip(other.data.par_chunks(r * r))
                .zip(self.data.par_chunks(1))
                .for_each(|((o, b), s)| {
                    for i in 0..r * r {
                        o[i] = s[0] * b[i];
                    }
                });
            return out;
        }
        if other.r == 1 && self.r > 1 {
            let r = self.r;
            let mut out = GridField::zeros(self.points, r);
            out.data
                .par_chunks_mut(r * r)
                .zip(self.data.par_chunks(r * r))
                .zip(other.data.par_chunks(1))
                .for_each(|((o, a), s)| {
                    for i in 0..r * r {
                        o[i] = a[i] * s[0];
                    }
                });
            return out;
        }
        assert_eq!(self.r, other.r, "rank mismatch");
        let r = self.r;
        let mut out = GridField::zeros(self.points, r);
        out.data
            .par_chunks_mut(r * r)
            .zip(self.data.par_chunks(r * r))
            .zip(other.data.par_chunks(r * r))
            .for_each(|((o, a), b)| {
                linalg::matmul_into(a, b, r, o);
            });
        out
    }

    /// Pointwise conjugate transpose.
    pub fn adjoint(&self) -> GridField {
        let r = self.r;
        let mut out = GridField::zeros(self.points, r);
        out.data
            .par_chunks_mut(r * r)
            .zip(self.data.par_chunks(r * r))
            .for_each(|(o, a)| {
                for i in 0..r {
                    for j in 0..r {
                        o[j * r + i] = a[i * r + j].conj();
                    }
                }
            });
        out
    }

    /// Pointwise matrix trace, returned as a rank-1 field.
    pub fn trace(&self) -> GridField {
        let r = self.r;
        let mut out = GridField::zeros(self.points, 1);
        for p in 0..self.points {
            out.data[p] = linalg::trace(self.at(p), r);
        }
        out
    }

    pub fn hermitize(&mut self) {
        let r = self.r;
        for p in 0..self.points {
            let m = self.at_mut(p);
            for i in 0..r {
                for j in i..r {
                    let avg = 0.5 * (m[i * r + j] + m[j * r + i].conj());
                    m[i * r + j] = avg;
                    m[j * r + i] = avg.conj();
                }
            }
        }
    }

    /// Applies a spectral function pointwise; fails on eigenvalues below
    /// `floor` when `check_floor` is set (metric-cone operations).
    pub fn herm_map(&self, floor: f64, f: impl Fn(f64) -> f64 + Sync) -> Result<GridField> {
        let r = self.r;
        let mut out = GridField::zeros(self.points, r);
        let results: Vec<Result<()>> = out
            .data
            .par_chunks_mut(r * r)
            .zip(self.data.par_chunks(r * r))
            .map(|(o, a)| {
                let (w, v) = linalg::hermitian_eig(a, r);
                if w[0] < floor {
                    return Err(HblError::DegenerateMetric(format!(
                        "pointwise eigenvalue {} below floor {}",
                        w[0], floor
                    )));
                }
                for i in 0..r {
                    for j in 0..r {
                        let mut acc = C64::new(0.0, 0.0);
                        for l in 0..r {
                            acc += v[i * r + l] * f(w[l]) * v[j * r + l].conj();
                        }
                        o[i * r + j] = acc;
                    }
                }
                Ok(())
            })
            .collect();
        for res in results {
            res?;
        }
        Ok(out)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let r = self.r;
        let rr = r * r;
        self.data
            .par_chunks(rr)
            .map(|m| linalg::hermitian_eig(m, r).0[0])
            .reduce(|| f64::INFINITY, f64::min)
    }

    /// Max over points of the Frobenius norm.
    pub fn sup_frobenius(&self) -> f64 {
        let rr = self.r * self.r;
        self.data
            .par_chunks(rr)
            .map(linalg::frobenius)
            .reduce(|| 0.0, f64::max)
    }

    /// Deterministic grid mean of a rank-1 field (pairwise reduction).
    pub fn scalar_mean(&self) -> C64 {
        assert_eq!(self.r, 1);
        linalg::pairwise_sum_c(&self.data) / self.points as f64
    }
}
