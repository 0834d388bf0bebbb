//! Discretized bipartite and reduced density matrices with validity
//! diagnostics.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::MomentumGrid;
use crate::linalg::hermitian_eigenvalues;
use crate::scalar::{cnorm, lit, Real};

/// Largest tolerated deviation from Hermitian symmetry.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Largest tolerated deviation of the trace from 1.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative admissible eigenvalue.
pub const MIN_EIGENVALUE_FLOOR: f64 = -1e-8;

/// The contract tolerances above are stated for f64; narrower scalars
/// cannot meet them, so each is floored at a machine-epsilon multiple.
/// At f64 the pinned value always dominates.
fn scaled_tol<T: Real>(pinned: f64, eps_multiple: f64) -> T {
    let scaled = T::default_epsilon() * lit::<T>(eps_multiple);
    let pinned = lit::<T>(pinned);
    if scaled > pinned {
        scaled
    } else {
        pinned
    }
}

/// Bipartite density matrix on the tensor-product grid.
///
/// Index layout is row-major with the signal index outer:
/// `a = s·n_i + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDensityMatrix<T: Real> {
    grid_s: MomentumGrid<T>,
    grid_i: MomentumGrid<T>,
    values: DMatrix<Complex<T>>,
}

/// Validity diagnostics of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics<T: Real> {
    pub hermiticity_error: T,
    pub trace: T,
    pub min_eigenvalue: T,
    pub max_eigenvalue: T,
}

impl<T: Real> JointDensityMatrix<T> {
    pub fn new(
        grid_s: MomentumGrid<T>,
        grid_i: MomentumGrid<T>,
        values: DMatrix<Complex<T>>,
    ) -> Result<Self> {
        let dim = grid_s.n_points() * grid_i.n_points();
        if values.nrows() != dim || values.ncols() != dim {
            return Err(Error::Config(format!(
                "joint matrix must be {dim}x{dim} for {}x{} grids, got {}x{}",
                grid_s.n_points(),
                grid_i.n_points(),
                values.nrows(),
                values.ncols()
            )));
        }
        Ok(Self {
            grid_s,
            grid_i,
            values,
        })
    }

    pub fn grid_s(&self) -> &MomentumGrid<T> {
        &self.grid_s
    }

    pub fn grid_i(&self) -> &MomentumGrid<T> {
        &self.grid_i
    }

    pub fn values(&self) -> &DMatrix<Complex<T>> {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    /// Flat index of the basis state `(s, i)`.
    pub fn index(&self, s: usize, i: usize) -> usize {
        s * self.grid_i.n_points() + i
    }

    pub fn trace(&self) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for a in 0..self.dim() {
            acc += self.values[(a, a)];
        }
        acc
    }

    /// Largest deviation from Hermitian symmetry, `max |ρ − ρ†|`.
    pub fn hermiticity_error(&self) -> T {
        let d = self.dim();
        let mut worst = T::zero();
        for r in 0..d {
            for c in r..d {
                let e = cnorm(self.values[(r, c)] - self.values[(c, r)].conj());
                if e > worst {
                    worst = e;
                }
            }
        }
        worst
    }

    /// Eigenvalues, ascending. The matrix is treated as Hermitian; gate
    /// through [`validate`](Self::validate) first when provenance is
    /// uncertain.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        hermitian_eigenvalues(&self.values)
    }

    /// Computes validity diagnostics without gating.
    pub fn diagnostics(&self) -> Result<StateDiagnostics<T>> {
        let eig = self.eigenvalues()?;
        Ok(StateDiagnostics {
            hermiticity_error: self.hermiticity_error(),
            trace: self.trace().re,
            min_eigenvalue: eig[0],
            max_eigenvalue: eig[eig.len() - 1],
        })
    }

    /// Validity gate: Hermitian within [`HERMITICITY_TOL`], unit trace
    /// within [`TRACE_TOL`], minimum eigenvalue above
    /// [`MIN_EIGENVALUE_FLOOR`]. Violations are validity errors.
    pub fn validate(&self) -> Result<StateDiagnostics<T>> {
        let diag = self.diagnostics()?;
        if diag.hermiticity_error > scaled_tol::<T>(HERMITICITY_TOL, 16.0) {
            return Err(Error::Validity(format!(
                "density matrix is not Hermitian: deviation {:?}",
                diag.hermiticity_error
            )));
        }
        if (diag.trace - T::one()).abs() > scaled_tol::<T>(TRACE_TOL, 16.0) {
            return Err(Error::Validity(format!(
                "density matrix trace {:?} is not 1",
                diag.trace
            )));
        }
        if diag.min_eigenvalue < -scaled_tol::<T>(-MIN_EIGENVALUE_FLOOR, 256.0) {
            return Err(Error::Validity(format!(
                "density matrix has negative eigenvalue {:?}",
                diag.min_eigenvalue
            )));
        }
        Ok(diag)
    }

    /// Partial transpose on the idler index:
    /// `ρ^(T_i)[(s,i),(s′,i′)] = ρ[(s,i′),(s′,i)]`.
    pub fn partial_transpose_idler(&self) -> DMatrix<Complex<T>> {
        let ni = self.grid_i.n_points();
        DMatrix::from_fn(self.dim(), self.dim(), |a, b| {
            let (s, i) = (a / ni, a % ni);
            let (sp, ip) = (b / ni, b % ni);
            self.values[(s * ni + ip, sp * ni + i)]
        })
    }

    /// Partial trace over the idler: `ρ_s(s,s′) = Σ_i ρ[(s,i),(s′,i)]`.
    pub fn reduced_signal(&self) -> ReducedDensityMatrix<T> {
        let ns = self.grid_s.n_points();
        let ni = self.grid_i.n_points();
        let values = DMatrix::from_fn(ns, ns, |s, sp| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for i in 0..ni {
                acc += self.values[(s * ni + i, sp * ni + i)];
            }
            acc
        });
        ReducedDensityMatrix {
            grid: self.grid_s.clone(),
            values,
        }
    }
}

/// Single-photon density matrix on a momentum grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix<T: Real> {
    grid: MomentumGrid<T>,
    values: DMatrix<Complex<T>>,
}

impl<T: Real> ReducedDensityMatrix<T> {
    pub fn new(grid: MomentumGrid<T>, values: DMatrix<Complex<T>>) -> Result<Self> {
        let n = grid.n_points();
        if values.nrows() != n || values.ncols() != n {
            return Err(Error::Config(format!(
                "reduced matrix must be {n}x{n}, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &MomentumGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<Complex<T>> {
        &self.values
    }

    pub fn trace(&self) -> T {
        let mut acc = T::zero();
        for a in 0..self.grid.n_points() {
            acc += self.values[(a, a)].re;
        }
        acc
    }

    /// Diagonal as per-bin occupation probabilities.
    pub fn diagonal(&self) -> Vec<T> {
        (0..self.grid.n_points())
            .map(|a| self.values[(a, a)].re)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bell_like() -> JointDensityMatrix<f64> {
        // two-point grids; maximally entangled in the grid basis
        let g = MomentumGrid::symmetric(1.0f64, 2).unwrap();
        let mut psi = [Complex::new(0.0, 0.0); 4];
        psi[0] = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0); // (s0,i0)
        psi[3] = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0); // (s1,i1)
        let values = DMatrix::from_fn(4, 4, |a, b| psi[a] * psi[b].conj());
        JointDensityMatrix::new(g.clone(), g, values).unwrap()
    }

    #[test]
    fn bell_state_diagnostics() {
        let rho = bell_like();
        let d = rho.validate().unwrap();
        assert_abs_diff_eq!(d.trace, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.hermiticity_error, 0.0, epsilon = 1e-15);
        assert!(d.min_eigenvalue > -1e-14);
        assert_abs_diff_eq!(d.max_eigenvalue, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bell_partial_transpose_has_negative_eigenvalue() {
        let rho = bell_like();
        let pt = rho.partial_transpose_idler();
        let eig = hermitian_eigenvalues(&pt).unwrap();
        assert_abs_diff_eq!(eig[0], -0.5, epsilon = 1e-12);
    }

    #[test]
    fn reduced_signal_of_bell_is_maximally_mixed() {
        let rho = bell_like();
        let red = rho.reduced_signal();
        assert_abs_diff_eq!(red.trace(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(red.values()[(0, 0)].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(red.values()[(0, 1)].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn validity_gate_catches_violations() {
        let g = MomentumGrid::symmetric(1.0f64, 2).unwrap();

        // non-Hermitian
        let mut v = DMatrix::from_element(4, 4, Complex::new(0.0, 0.0));
        for a in 0..4 {
            v[(a, a)] = Complex::new(0.25, 0.0);
        }
        v[(0, 1)] = Complex::new(0.2, 0.0);
        let bad_herm = JointDensityMatrix::new(g.clone(), g.clone(), v).unwrap();
        assert!(matches!(bad_herm.validate(), Err(Error::Validity(_))));

        // trace off
        let v = DMatrix::from_diagonal_element(4, 4, Complex::new(0.3, 0.0));
        let bad_trace = JointDensityMatrix::new(g.clone(), g.clone(), v).unwrap();
        assert!(matches!(bad_trace.validate(), Err(Error::Validity(_))));

        // negative eigenvalue
        let mut v = DMatrix::from_element(4, 4, Complex::new(0.0, 0.0));
        v[(0, 0)] = Complex::new(1.1, 0.0);
        v[(1, 1)] = Complex::new(-0.1, 0.0);
        let bad_eig = JointDensityMatrix::new(g.clone(), g.clone(), v).unwrap();
        assert!(matches!(bad_eig.validate(), Err(Error::Validity(_))));
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let g = MomentumGrid::symmetric(1.0f64, 3).unwrap();
        let v = DMatrix::from_element(4, 4, Complex::new(0.0f64, 0.0));
        assert!(matches!(
            JointDensityMatrix::new(g.clone(), g, v),
            Err(Error::Config(_))
        ));
    }
}
