//! Joint biphoton amplitudes `f(k_s, k_i)` on transverse-momentum grids.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::MomentumGrid;
use crate::scalar::{lit, Real};

/// Minimum number of grid points per axis accepted by
/// [`BiphotonAmplitude::tabulate`].
pub const MIN_TABULATION_POINTS: usize = 16;

/// Joint amplitude of the signal/idler photon pair.
///
/// The double-Gaussian form is
/// `f(k_s,k_i) = A·exp(−(k_s+k_i)²/(4σ_p²))·exp(−(k_s−k_i)²/(4σ_c²))`
/// with `A = (π σ_p σ_c)^(−1/2)` fixing unit L2 norm; the sum coordinate
/// carries the pump width `σ_p` and the difference coordinate the
/// conditional width `σ_c`. Tabulated amplitudes are L2-normalized on their
/// grid: `Σ|f|²·Δk_s·Δk_i = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum BiphotonAmplitude<T: Real> {
    DoubleGaussian {
        sigma_p: T,
        sigma_c: T,
    },
    Tabulated {
        grid_s: MomentumGrid<T>,
        grid_i: MomentumGrid<T>,
        values: DMatrix<Complex<T>>,
    },
}

impl<T: Real> BiphotonAmplitude<T> {
    /// Double-Gaussian amplitude with pump width `sigma_p` and conditional
    /// width `sigma_c`, both in m⁻¹.
    pub fn double_gaussian(sigma_p: T, sigma_c: T) -> Result<Self> {
        if sigma_p <= T::zero() || sigma_c <= T::zero() {
            return Err(Error::Config(
                "double-Gaussian amplitude requires sigma_p > 0 and sigma_c > 0".into(),
            ));
        }
        Ok(Self::DoubleGaussian { sigma_p, sigma_c })
    }

    /// Wraps an explicit value table, renormalizing to unit L2 norm on the
    /// grid.
    pub fn from_table(
        grid_s: MomentumGrid<T>,
        grid_i: MomentumGrid<T>,
        values: DMatrix<Complex<T>>,
    ) -> Result<Self> {
        if values.nrows() != grid_s.n_points() || values.ncols() != grid_i.n_points() {
            return Err(Error::Config(format!(
                "value table is {}x{} but grids have {}x{} points",
                values.nrows(),
                values.ncols(),
                grid_s.n_points(),
                grid_i.n_points()
            )));
        }
        let weight = grid_s.spacing() * grid_i.spacing();
        let norm_sq: T =
            values.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b) * weight;
        if norm_sq <= T::zero() {
            return Err(Error::Config("value table has zero L2 norm".into()));
        }
        let scale = Complex::new(T::one() / norm_sq.sqrt(), T::zero());
        Ok(Self::Tabulated {
            grid_s,
            grid_i,
            values: values.map(|z| z * scale),
        })
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self, Self::Tabulated { .. })
    }

    /// L2 normalization constant of the double-Gaussian form.
    pub fn normalization(&self) -> Option<T> {
        match self {
            Self::DoubleGaussian { sigma_p, sigma_c } => Some(
                T::one() / (lit::<T>(std::f64::consts::PI) * *sigma_p * *sigma_c).sqrt(),
            ),
            Self::Tabulated { .. } => None,
        }
    }

    /// Evaluates the amplitude at `(k_s, k_i)`.
    ///
    /// Tabulated amplitudes are bilinearly interpolated; querying outside
    /// the grid bounds is a domain error.
    pub fn evaluate(&self, k_s: T, k_i: T) -> Result<Complex<T>> {
        match self {
            Self::DoubleGaussian { sigma_p, sigma_c } => {
                let a = self.normalization().expect("double-Gaussian normalization");
                let four = lit::<T>(4.0);
                let sum = k_s + k_i;
                let diff = k_s - k_i;
                let arg = -sum * sum / (four * *sigma_p * *sigma_p)
                    - diff * diff / (four * *sigma_c * *sigma_c);
                Ok(Complex::new(a * arg.exp(), T::zero()))
            }
            Self::Tabulated {
                grid_s,
                grid_i,
                values,
            } => {
                if !grid_s.contains(k_s) || !grid_i.contains(k_i) {
                    return Err(Error::Domain(format!(
                        "query ({k_s:?}, {k_i:?}) outside tabulation bounds"
                    )));
                }
                Ok(bilinear(grid_s, grid_i, values, k_s, k_i))
            }
        }
    }

    /// Tabulates the amplitude on the given grids, renormalized to unit L2
    /// norm on the grid.
    ///
    /// For a double-Gaussian input the grids must cover `±4·max(σ_p, σ_c)`
    /// and carry at least [`MIN_TABULATION_POINTS`] points per axis.
    pub fn tabulate(
        &self,
        grid_s: MomentumGrid<T>,
        grid_i: MomentumGrid<T>,
    ) -> Result<BiphotonAmplitude<T>> {
        if grid_s.n_points() < MIN_TABULATION_POINTS || grid_i.n_points() < MIN_TABULATION_POINTS {
            return Err(Error::Config(format!(
                "tabulation grids too coarse: need at least {MIN_TABULATION_POINTS} points per axis, got {}x{}",
                grid_s.n_points(),
                grid_i.n_points()
            )));
        }
        if let Self::DoubleGaussian { sigma_p, sigma_c } = self {
            let reach = lit::<T>(4.0) * if *sigma_p > *sigma_c { *sigma_p } else { *sigma_c };
            for g in [&grid_s, &grid_i] {
                if g.k_min() > -reach || g.k_max() < reach {
                    return Err(Error::Config(
                        "tabulation grid must cover ±4·max(sigma_p, sigma_c)".into(),
                    ));
                }
            }
        }
        let values = DMatrix::from_fn(grid_s.n_points(), grid_i.n_points(), |r, c| {
            self.evaluate(grid_s.point(r), grid_i.point(c))
                .expect("grid nodes are inside bounds")
        });
        Self::from_table(grid_s, grid_i, values)
    }

    /// Grids of a tabulated amplitude.
    pub fn grids(&self) -> Option<(&MomentumGrid<T>, &MomentumGrid<T>)> {
        match self {
            Self::Tabulated { grid_s, grid_i, .. } => Some((grid_s, grid_i)),
            Self::DoubleGaussian { .. } => None,
        }
    }

    /// Value table of a tabulated amplitude.
    pub fn values(&self) -> Option<&DMatrix<Complex<T>>> {
        match self {
            Self::Tabulated { values, .. } => Some(values),
            Self::DoubleGaussian { .. } => None,
        }
    }

    /// Grid L2 norm squared `Σ|f|²·Δk_s·Δk_i` of a tabulated amplitude.
    pub fn grid_norm_sq(&self) -> Option<T> {
        match self {
            Self::Tabulated {
                grid_s,
                grid_i,
                values,
            } => {
                let w = grid_s.spacing() * grid_i.spacing();
                Some(values.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b) * w)
            }
            Self::DoubleGaussian { .. } => None,
        }
    }
}

/// Bilinear interpolation on the tabulated grid. Queries that land on a
/// node (within 1e-9 of the fractional index) return the stored value
/// exactly.
fn bilinear<T: Real>(
    grid_s: &MomentumGrid<T>,
    grid_i: &MomentumGrid<T>,
    values: &DMatrix<Complex<T>>,
    k_s: T,
    k_i: T,
) -> Complex<T> {
    let (r0, tr) = cell_coord(grid_s, k_s);
    let (c0, tc) = cell_coord(grid_i, k_i);
    let one = T::one();
    let w00 = (one - tr) * (one - tc);
    let w01 = (one - tr) * tc;
    let w10 = tr * (one - tc);
    let w11 = tr * tc;
    values[(r0, c0)].scale(w00)
        + values[(r0, c0 + 1)].scale(w01)
        + values[(r0 + 1, c0)].scale(w10)
        + values[(r0 + 1, c0 + 1)].scale(w11)
}

/// Lower cell index and fractional offset for an in-bounds query. On-node
/// queries report an exact 0 or 1 offset so stored values pass through
/// untouched.
fn cell_coord<T: Real>(grid: &MomentumGrid<T>, k: T) -> (usize, T) {
    let last = grid.n_points() - 1;
    let frac = (k - grid.k_min()) / grid.spacing();
    let nearest = frac.round();
    if (frac - nearest).abs() < lit::<T>(1e-9) {
        let j = to_index(nearest).min(last);
        return if j == last {
            (last - 1, T::one())
        } else {
            (j, T::zero())
        };
    }
    let j = to_index(frac.floor()).min(last - 1);
    (j, frac - lit::<T>(j as f64))
}

fn to_index<T: Real>(x: T) -> usize {
    let v = x.to_f64().unwrap_or(0.0);
    if v <= 0.0 {
        0
    } else {
        v as usize
    }
}
