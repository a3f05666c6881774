//! The fixed geometric stage: a flat complex torus C^n / (Z + iZ)^n with a
//! constant Kaehler form, sampled on a periodic grid of N points per real
//! dimension.

use crate::error::{HblError, Result};
use crate::linalg::C64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

#[derive(Clone)]
pub struct Background {
    /// complex dimension, 1 <= n <= 3
    pub n: usize,
    /// grid points per real dimension (power of two)
    pub grid: usize,
    /// bundle rank
    pub rank: usize,
    /// integer background Chern level of the central line-bundle factor
    pub level: i64,
    /// constant Hermitian n x n matrix g_{ab} defining
    /// omega = i sum g_{ab} dz^a wedge dzbar^b (row-major)
    pub kaehler: Vec<C64>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Background {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Background")
            .field("n", &self.n)
            .field("grid", &self.grid)
            .field("rank", &self.rank)
            .field("level", &self.level)
            .finish()
    }
}

impl Background {
    pub fn new(n: usize, grid: usize, rank: usize, level: i64) -> Result<Self> {
        let mut kaehler = vec![C64::new(0.0, 0.0); n * n];
        for a in 0..n {
            kaehler[a * n + a] = C64::new(1.0, 0.0);
        }
        Self::with_kaehler(n, grid, rank, level, kaehler)
    }

    pub fn with_kaehler(
        n: usize,
        grid: usize,
        rank: usize,
        level: i64,
        kaehler: Vec<C64>,
    ) -> Result<Self> {
        if n == 0 || n > 3 {
            return Err(HblError::Config(format!(
                "complex dimension must satisfy 1 <= n <= 3, got {n}"
            )));
        }
        if grid < 8 || !grid.is_power_of_two() {
            return Err(HblError::Config(format!(
                "grid must be a power of two >= 8, got {grid}"
            )));
        }
        if rank == 0 {
            return Err(HblError::Config("bundle rank must be >= 1".into()));
        }
        if kaehler.len() != n * n {
            return Err(HblError::Config("kaehler matrix must be n x n".into()));
        }
        for a in 0..n {
            for b in 0..n {
                if (kaehler[a * n + b] - kaehler[b * n + a].conj()).norm() > 1e-14 {
                    return Err(HblError::Config("kaehler matrix must be Hermitian".into()));
                }
            }
        }
        if crate::linalg::min_eigenvalue(&kaehler, n) <= 0.0 {
            return Err(HblError::Config(
                "kaehler matrix must be positive-definite".into(),
            ));
        }
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(grid);
        let fft_inv = planner.plan_fft_inverse(grid);
        Ok(Background {
            n,
            grid,
            rank,
            level,
            kaehler,
            fft_fwd,
            fft_inv,
        })
    }

    /// Total number of grid points, N^{2n}.
    pub fn points(&self) -> usize {
        self.grid.pow(2 * self.n as u32)
    }

    /// Number of real axes (x^1, y^1, ..., x^n, y^n).
    pub fn axes(&self) -> usize {
        2 * self.n
    }

    /// Row-major stride of a real axis: axis 0 (x^1) is slowest.
    pub fn axis_stride(&self, axis: usize) -> usize {
        self.grid.pow((self.axes() - 1 - axis) as u32)
    }

    /// Signed integer frequency of mode index k along one axis, with the
    /// Nyquist mode mapped to zero (it carries no usable derivative phase).
    pub fn signed_freq(&self, k: usize) -> i64 {
        let n = self.grid as i64;
        let k = k as i64;
        if 2 * k < n {
            k
        } else if 2 * k == n {
            0
        } else {
            k - n
        }
    }

    pub(crate) fn fft_fwd(&self) -> &Arc<dyn Fft<f64>> {
        &self.fft_fwd
    }

    pub(crate) fn fft_inv(&self) -> &Arc<dyn Fft<f64>> {
        &self.fft_inv
    }

    /// Real-coordinate density of dz^1..dz^n wedge dzbar^1..dzbar^n relative
    /// to dx^1 dy^1 ... dx^n dy^n using dz wedge dzbar = -2i dx wedge dy.
    pub fn top_density(&self) -> C64 {
        let n = self.n as u32;
        let sign = if (self.n * (self.n - 1) / 2) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        C64::new(sign, 0.0) * C64::new(0.0, -2.0).powu(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_dimensions() {
        assert!(Background::new(0, 16, 2, 1).is_err());
        assert!(Background::new(4, 16, 2, 1).is_err());
        assert!(Background::new(2, 12, 2, 1).is_err());
        assert!(Background::new(2, 16, 0, 1).is_err());
    }

    #[test]
    fn density_matches_convention() {
        // n=2: (-1)^{1} (-2i)^2 = 4
        let bg = Background::new(2, 16, 2, 1).unwrap();
        let d = bg.top_density();
        assert!((d - C64::new(4.0, 0.0)).norm() < 1e-15);
        // n=1: -2i
        let bg = Background::new(1, 16, 1, 0).unwrap();
        assert!((bg.top_density() - C64::new(0.0, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn signed_frequencies() {
        let bg = Background::new(1, 8, 1, 0).unwrap();
        let f: Vec<i64> = (0..8).map(|k| bg.signed_freq(k)).collect();
        assert_eq!(f, vec![0, 1, 2, 3, 0, -3, -2, -1]);
    }
}
