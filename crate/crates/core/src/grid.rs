//! Uniform 1D transverse-momentum grids.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Uniform discretization of a transverse-momentum axis (m⁻¹).
///
/// Grid points are exactly `k_j = k_min + j·spacing` for
/// `j = 0..n_points−1` with `spacing = (k_max − k_min)/(n_points − 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid<T: Real> {
    k_min: T,
    k_max: T,
    n_points: usize,
    spacing: T,
}

impl<T: Real> MomentumGrid<T> {
    /// Builds a grid on `[k_min, k_max]` with `n_points` nodes.
    pub fn new(k_min: T, k_max: T, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::Config(format!(
                "momentum grid needs at least 2 points, got {n_points}"
            )));
        }
        if k_min >= k_max {
            return Err(Error::Config(
                "momentum grid requires k_min < k_max".into(),
            ));
        }
        let spacing = (k_max - k_min) / lit::<T>((n_points - 1) as f64);
        Ok(Self {
            k_min,
            k_max,
            n_points,
            spacing,
        })
    }

    /// Builds a grid symmetric about zero, `[-half_width, +half_width]`.
    pub fn symmetric(half_width: T, n_points: usize) -> Result<Self> {
        if half_width <= T::zero() {
            return Err(Error::Config(
                "symmetric grid requires half_width > 0".into(),
            ));
        }
        Self::new(-half_width, half_width, n_points)
    }

    pub fn k_min(&self) -> T {
        self.k_min
    }

    pub fn k_max(&self) -> T {
        self.k_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    /// The `j`-th grid point.
    pub fn point(&self, j: usize) -> T {
        debug_assert!(j < self.n_points);
        self.k_min + lit::<T>(j as f64) * self.spacing
    }

    /// Iterator over all grid points in ascending order.
    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n_points).map(move |j| self.point(j))
    }

    /// Whether `k` lies within the grid bounds (inclusive).
    pub fn contains(&self, k: T) -> bool {
        k >= self.k_min && k <= self.k_max
    }
}
