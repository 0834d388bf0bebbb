//! Entanglement and state-validity diagnostics.

use crate::amplitude::BiphotonAmplitude;
use crate::density::JointDensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, singular_values};
use crate::scalar::{lit, Real};

/// Schmidt coefficients of a pure bipartite state, descending, with
/// `Σλ_n² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum<T: Real> {
    coefficients: Vec<T>,
}

impl<T: Real> SchmidtSpectrum<T> {
    /// Normalizes and sorts a list of nonnegative coefficients.
    pub fn new(mut coefficients: Vec<T>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Config("Schmidt spectrum cannot be empty".into()));
        }
        if coefficients.iter().any(|c| *c < T::zero() || !c.is_finite()) {
            return Err(Error::Config(
                "Schmidt coefficients must be finite and nonnegative".into(),
            ));
        }
        let norm_sq = coefficients.iter().map(|c| *c * *c).fold(T::zero(), |a, b| a + b);
        if norm_sq <= T::zero() {
            return Err(Error::Config("Schmidt spectrum has zero norm".into()));
        }
        let inv = T::one() / norm_sq.sqrt();
        for c in &mut coefficients {
            *c *= inv;
        }
        coefficients.sort_by(|a, b| b.partial_cmp(a).expect("coefficient ordering"));
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    /// `Σλ_n²`, equal to 1 by construction up to rounding.
    pub fn norm_sq(&self) -> T {
        self.coefficients.iter().map(|c| *c * *c).fold(T::zero(), |a, b| a + b)
    }

    /// Pure-state negativity identity `Σ_{n<m} λ_n λ_m = ((Σλ)² − Σλ²)/2`.
    pub fn pure_state_negativity(&self) -> T {
        let sum = self.coefficients.iter().fold(T::zero(), |a, b| a + *b);
        (sum * sum - self.norm_sq()) / lit::<T>(2.0)
    }
}

/// Schmidt coefficients of a tabulated amplitude: singular values of the
/// value table scaled by `√(Δk_s·Δk_i)`, renormalized.
pub fn schmidt_decompose<T: Real>(f: &BiphotonAmplitude<T>) -> Result<SchmidtSpectrum<T>> {
    let (grid_s, grid_i) = f
        .grids()
        .ok_or_else(|| Error::Config("Schmidt decomposition requires a tabulated amplitude".into()))?;
    let sv = singular_values(f.values().expect("tabulated amplitude has values"))?;
    let scale = (grid_s.spacing() * grid_i.spacing()).sqrt();
    SchmidtSpectrum::new(sv.into_iter().map(|s| s * scale).collect())
}

/// Participation ratio `K = 1/Σλ_n⁴` of a Schmidt spectrum.
pub fn schmidt_number<T: Real>(spectrum: &SchmidtSpectrum<T>) -> T {
    let quartic = spectrum
        .coefficients()
        .iter()
        .map(|c| *c * *c * *c * *c)
        .fold(T::zero(), |a, b| a + b);
    T::one() / quartic
}

/// PPT negativity: magnitude of the negative part of the partial
/// transpose's spectrum, `(‖ρ^(T_i)‖₁ − 1)/2`.
///
/// The input is gated through the density-matrix validity checks first;
/// an invalid state is a validity error, not a number.
pub fn negativity<T: Real>(rho: &JointDensityMatrix<T>) -> Result<T> {
    rho.validate()?;
    let pt = rho.partial_transpose_idler();
    let eig = hermitian_eigenvalues(&pt)?;
    Ok(eig
        .into_iter()
        .filter(|x| *x < T::zero())
        .fold(T::zero(), |acc, x| acc - x))
}

/// Purity `Tr(ρ²)`, computed as the squared Frobenius norm of the
/// Hermitian matrix.
pub fn purity<T: Real>(rho: &JointDensityMatrix<T>) -> T {
    rho.values().iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b)
}

/// Width of the difference coordinate `k_s − k_i` under the joint
/// probability `|f|²`, which equals `σ_c` for the canonical
/// double-Gaussian model.
pub fn conditional_width<T: Real>(f: &BiphotonAmplitude<T>) -> Result<T> {
    let (grid_s, grid_i) = f
        .grids()
        .ok_or_else(|| Error::Config("conditional width requires a tabulated amplitude".into()))?;
    let table = f.values().expect("tabulated amplitude has values");
    let w = grid_s.spacing() * grid_i.spacing();
    let ns = grid_s.n_points();
    let ni = grid_i.n_points();

    let term = |s: usize, i: usize| -> (T, T) {
        let p = table[(s, i)].norm_sqr() * w;
        (p, grid_s.point(s) - grid_i.point(i))
    };
    // Accumulation is grouped over index pairs {a,b} for square tables so
    // that transposing the table (the s↔i exchange) reorders only within
    // commutative additions: the result is bit-identical under exchange.
    let fold = |weigh: &dyn Fn(T, T) -> T| -> T {
        let mut acc = T::zero();
        if ns == ni {
            for a in 0..ns {
                let (p, d) = term(a, a);
                acc += weigh(p, d);
                for b in a + 1..ni {
                    let (p1, d1) = term(a, b);
                    let (p2, d2) = term(b, a);
                    acc += weigh(p1, d1) + weigh(p2, d2);
                }
            }
        } else {
            for s in 0..ns {
                for i in 0..ni {
                    let (p, d) = term(s, i);
                    acc += weigh(p, d);
                }
            }
        }
        acc
    };

    let mass = fold(&|p, _| p);
    let mean = fold(&|p, d| p * d) / mass;
    let var = fold(&|p, d| {
        let c = d - mean;
        p * c * c
    });
    Ok((var / mass).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoherence::{apply_kernel, kernel_gaussian};
    use crate::grid::MomentumGrid;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use nalgebra::DMatrix;
    use num_complex::Complex;

    fn tabulated(sigma_p: f64, sigma_c: f64, half: f64, n: usize) -> BiphotonAmplitude<f64> {
        BiphotonAmplitude::double_gaussian(sigma_p, sigma_c)
            .unwrap()
            .tabulate(
                MomentumGrid::symmetric(half, n).unwrap(),
                MomentumGrid::symmetric(half, n).unwrap(),
            )
            .unwrap()
    }

    /// One-sided Jacobi SVD, written independently of the nalgebra path,
    /// used as a cross-oracle for singular values of real tables.
    fn jacobi_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
        let mut a = m.clone();
        let n = a.ncols();
        for _ in 0..60 {
            let mut off = 0.0f64;
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let col_p = a.column(p).clone_owned();
                    let col_q = a.column(q).clone_owned();
                    let alpha = col_p.dot(&col_p);
                    let beta = col_q.dot(&col_q);
                    let gamma = col_p.dot(&col_q);
                    off = off.max(gamma.abs() / (alpha * beta).sqrt().max(1e-300));
                    if gamma.abs() < 1e-15 * (alpha * beta).sqrt() {
                        continue;
                    }
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for r in 0..a.nrows() {
                        let vp = a[(r, p)];
                        let vq = a[(r, q)];
                        a[(r, p)] = c * vp - s * vq;
                        a[(r, q)] = s * vp + c * vq;
                    }
                }
            }
            if off < 1e-14 {
                break;
            }
        }
        let mut sv: Vec<f64> = (0..n).map(|c| a.column(c).norm()).collect();
        sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
        sv
    }

    #[test]
    fn spectrum_normalizes_and_orders() {
        let s = SchmidtSpectrum::new(vec![0.2f64, 1.4, 0.7]).unwrap();
        assert_abs_diff_eq!(s.norm_sq(), 1.0, epsilon = 1e-14);
        assert!(s.coefficients()[0] >= s.coefficients()[1]);
        assert!(SchmidtSpectrum::new(vec![-0.1f64]).is_err());
        assert!(SchmidtSpectrum::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn schmidt_number_known_spectra() {
        let single = SchmidtSpectrum::new(vec![1.0f64]).unwrap();
        assert_abs_diff_eq!(schmidt_number(&single), 1.0, epsilon = 1e-14);

        let pair = SchmidtSpectrum::new(vec![1.0f64, 1.0]).unwrap();
        assert_abs_diff_eq!(schmidt_number(&pair), 2.0, epsilon = 1e-12);

        let m = 7;
        let uniform = SchmidtSpectrum::new(vec![1.0f64; m]).unwrap();
        assert_abs_diff_eq!(schmidt_number(&uniform), m as f64, epsilon = 1e-12);
    }

    #[test]
    fn separable_state_has_unit_schmidt_number() {
        let f = tabulated(1.0, 1.0, 5.0, 64);
        let s = schmidt_decompose(&f).unwrap();
        assert!(s.coefficients()[0] > 1.0 - 1e-8);
        assert_abs_diff_eq!(s.norm_sq(), 1.0, epsilon = 1e-10);
        assert!(schmidt_number(&s) < 1.0 + 1e-7);
    }

    /// Schmidt number at physical widths, cross-checked against an
    /// independent Jacobi SVD at double resolution and against the
    /// analytic participation ratio (r² + 1)/(2r) for width ratio r.
    #[test]
    fn schmidt_number_cross_oracle_at_physical_widths() {
        let (sp, sc) = (1e8f64, 1e7f64);
        let base = tabulated(sp, sc, 5.0 * sp, 192);
        let k_base = schmidt_number(&schmidt_decompose(&base).unwrap());

        let fine = tabulated(sp, sc, 5.0 * sp, 384);
        let table = fine.values().unwrap().map(|z| z.re);
        let sv = jacobi_singular_values(&table);
        let spectrum = SchmidtSpectrum::new(sv).unwrap();
        let k_fine = schmidt_number(&spectrum);

        assert_relative_eq!(k_base, k_fine, max_relative = 0.01);

        let r: f64 = sp / sc;
        let analytic = (r * r + 1.0) / (2.0 * r);
        assert_relative_eq!(k_base, analytic, max_relative = 0.01);
    }

    #[test]
    fn negativity_of_product_state_vanishes() {
        let f = tabulated(1.0, 1.0, 5.0, 20);
        let grid_i = f.grids().unwrap().1.clone();
        let rho = apply_kernel(&f, &kernel_gaussian(1.0, 0.0, &grid_i).unwrap()).unwrap();
        assert!(negativity(&rho).unwrap() <= 1e-8);
    }

    #[test]
    fn pure_state_negativity_matches_schmidt_identity() {
        let f = tabulated(2.0, 0.5, 8.0, 24);
        let grid_i = f.grids().unwrap().1.clone();
        let rho = apply_kernel(&f, &kernel_gaussian(1.0, 0.0, &grid_i).unwrap()).unwrap();
        let neg = negativity(&rho).unwrap();
        let spectrum = schmidt_decompose(&f).unwrap();
        assert_abs_diff_eq!(neg, spectrum.pure_state_negativity(), epsilon = 1e-4);
        assert!(neg > 0.0);
    }

    #[test]
    fn negativity_is_killed_by_strong_dephasing() {
        let f = tabulated(2.0, 0.5, 8.0, 20);
        let grid_i = f.grids().unwrap().1.clone();
        // N σ_q² = 100 σ_p² with σ_q at the pump scale
        let rho = apply_kernel(&f, &kernel_gaussian(2.0, 400.0, &grid_i).unwrap()).unwrap();
        assert!(negativity(&rho).unwrap() < 1e-6);
    }

    #[test]
    fn negativity_nonincreasing_in_event_number() {
        let f = tabulated(2.0, 0.5, 8.0, 16);
        let grid_i = f.grids().unwrap().1.clone();
        let mut last = f64::MAX;
        for n in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let rho = apply_kernel(&f, &kernel_gaussian(1.0, n, &grid_i).unwrap()).unwrap();
            let neg = negativity(&rho).unwrap();
            assert!(neg <= last + 1e-8, "negativity rose from {last} to {neg} at N={n}");
            last = neg;
        }
    }

    #[test]
    fn negativity_gates_invalid_states() {
        let g = MomentumGrid::symmetric(1.0f64, 2).unwrap();
        let mut v = DMatrix::from_element(4, 4, Complex::new(0.0, 0.0));
        v[(0, 0)] = Complex::new(1.25, 0.0);
        v[(1, 1)] = Complex::new(-0.25, 0.0);
        let rho = JointDensityMatrix::new(g.clone(), g, v).unwrap();
        assert!(matches!(negativity(&rho), Err(Error::Validity(_))));
    }

    #[test]
    fn purity_of_known_states() {
        let f = tabulated(1.0, 0.5, 5.0, 16);
        let grid_i = f.grids().unwrap().1.clone();
        let pure = apply_kernel(&f, &kernel_gaussian(1.0, 0.0, &grid_i).unwrap()).unwrap();
        assert_abs_diff_eq!(purity(&pure), 1.0, epsilon = 1e-8);

        let d = 6;
        let g2 = MomentumGrid::symmetric(1.0f64, 2).unwrap();
        let g3 = MomentumGrid::symmetric(1.0f64, 3).unwrap();
        let mixed = JointDensityMatrix::new(
            g2,
            g3,
            DMatrix::from_diagonal_element(d, d, Complex::new(1.0 / d as f64, 0.0)),
        )
        .unwrap();
        assert_abs_diff_eq!(purity(&mixed), 1.0 / d as f64, epsilon = 1e-8);

        // dephasing strictly lowers purity
        let deco = apply_kernel(&f, &kernel_gaussian(0.5, 1.0, &grid_i).unwrap()).unwrap();
        assert!(purity(&deco) < purity(&pure) - 1e-3);
    }

    #[test]
    fn conditional_width_recovers_sigma_c() {
        // enough points that the σ_c = σ_p/10 feature is resolved
        let (sp, sc) = (1e8f64, 1e7f64);
        let f = tabulated(sp, sc, 5.0 * sp, 512);
        assert_relative_eq!(conditional_width(&f).unwrap(), sc, max_relative = 0.01);

        let s = 3.0e7f64;
        let f = tabulated(s, s, 5.0 * s, 128);
        assert_relative_eq!(conditional_width(&f).unwrap(), s, max_relative = 0.01);
    }

    #[test]
    fn conditional_width_symmetric_under_exchange() {
        let f = tabulated(2.0, 0.7, 10.0, 48);
        let (gs, gi) = f.grids().unwrap();
        let swapped = BiphotonAmplitude::from_table(
            gi.clone(),
            gs.clone(),
            f.values().unwrap().transpose(),
        )
        .unwrap();
        let a = conditional_width(&f).unwrap();
        let b = conditional_width(&swapped).unwrap();
        assert_eq!(a, b);
    }
}
