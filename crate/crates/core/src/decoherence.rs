//! Decoherence kernels for the idler photon and their action on joint
//! states.
//!
//! The single-event kernel is the overlap integral
//! `Λ(k_i,k_i′) = ∫ dp_e M(k_i,p_e) M*(k_i′,p_e)` of ionization transition
//! amplitudes; the library always works with the diagonal-normalized form
//! `Λ̂(k,k′) = Λ(k,k′)/√(Λ(k,k)Λ(k′,k′))`, which carries the full
//! coherence-suppression physics without the unfixed absolute-rate
//! prefactor. The canonical multi-event model is the Gaussian kernel
//! `exp(−N(k−k′)²/(4σ_q²))`.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::amplitude::BiphotonAmplitude;
use crate::bound::BoundState;
use crate::density::{JointDensityMatrix, ReducedDensityMatrix};
use crate::error::{Error, Result};
use crate::grid::MomentumGrid;
use crate::scalar::{cnorm, lit, Real};

/// Default number of trapezoid nodes for the kernel quadrature.
pub const DEFAULT_QUADRATURE_NODES: usize = 1024;
/// Minimum accepted number of quadrature nodes.
pub const MIN_QUADRATURE_NODES: usize = 512;
/// Quadrature range extends this many recoil widths beyond the grid.
pub const QUADRATURE_RANGE_SIGMAS: f64 = 8.0;
/// Largest admissible entry change under node doubling.
pub const QUADRATURE_CONVERGENCE_TOL: f64 = 1e-6;
/// Displacement convolution aborts when more than this fraction of
/// probability mass is clipped at the grid edges.
pub const DISPLACEMENT_CLIP_LIMIT: f64 = 0.01;

/// Parameters of the ionization transition matrix element
/// `M(k_i, p_e) = C·ε·(2k_i − p_e/ħ)·φ̃(k_i − p_e/ħ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixElementParams<T: Real> {
    polarization: T,
    bound: BoundState<T>,
    prefactor: T,
}

impl<T: Real> MatrixElementParams<T> {
    /// Polarization component must be ±1 along the 1D axis; the absolute
    /// prefactor `C` is normalized to 1.
    pub fn new(polarization: T, bound: BoundState<T>) -> Result<Self> {
        if polarization.abs() != T::one() {
            return Err(Error::Config(
                "polarization component must be +1 or -1".into(),
            ));
        }
        Ok(Self {
            polarization,
            bound,
            prefactor: T::one(),
        })
    }

    pub fn bound(&self) -> &BoundState<T> {
        &self.bound
    }

    pub fn polarization(&self) -> T {
        self.polarization
    }

    fn evaluate(&self, k_i: T, p_e_over_hbar: T) -> T {
        let q = k_i - p_e_over_hbar;
        self.prefactor * self.polarization * (lit::<T>(2.0) * k_i - p_e_over_hbar)
            * self.bound.amplitude(q)
    }
}

/// Transition matrix element `ε·(2k_i − p_e/ħ)·φ̃(k_i − p_e/ħ)`.
///
/// Real-valued for the Gaussian bound state; typed complex for the kernel
/// algebra built on it.
pub fn matrix_element<T: Real>(
    params: &MatrixElementParams<T>,
    k_i: T,
    p_e_over_hbar: T,
) -> Complex<T> {
    Complex::new(params.evaluate(k_i, p_e_over_hbar), T::zero())
}

/// Closed-form single-event kernel `K(k_i·k_i′ + σ_q²)` with `K = 1`,
/// kept as a reference approximation for comparison against the
/// quadrature kernel.
pub fn closed_form_single<T: Real>(params: &MatrixElementParams<T>, k_i: T, k_i_prime: T) -> T {
    k_i * k_i_prime + params.bound.recoil_variance()
}

/// Diagonal-normalized coherence-suppression kernel `Λ̂_N(k_i, k_i′)` on a
/// momentum grid.
///
/// Invariants: Hermitian, unit diagonal, `|Λ̂| ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceKernel<T: Real> {
    grid: MomentumGrid<T>,
    values: DMatrix<Complex<T>>,
    event_number: T,
}

impl<T: Real> DecoherenceKernel<T> {
    pub fn grid(&self) -> &MomentumGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<Complex<T>> {
        &self.values
    }

    /// Mean number of interactions this kernel represents.
    pub fn event_number(&self) -> T {
        self.event_number
    }

    /// Largest deviation from Hermitian symmetry.
    pub fn hermiticity_error(&self) -> T {
        let n = self.values.nrows();
        let mut worst = T::zero();
        for r in 0..n {
            for c in r..n {
                let d = cnorm(self.values[(r, c)] - self.values[(c, r)].conj());
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Elementwise power `Λ̂^⊙n` in polar form: magnitudes are raised to
    /// `n`, phases scaled linearly by `n`. This is the multi-event rule for
    /// microscopic kernels; the event number multiplies accordingly.
    pub fn elementwise_power(&self, n: T) -> Result<Self> {
        if n < T::zero() {
            return Err(Error::Config("elementwise power requires n >= 0".into()));
        }
        let values = if n == T::zero() {
            DMatrix::from_element(self.values.nrows(), self.values.ncols(), Complex::new(T::one(), T::zero()))
        } else {
            let mut v = self.values.map(|z| {
                let r = cnorm(z);
                let theta = z.im.atan2(z.re);
                let (s, c) = (theta * n).sin_cos();
                let mag = r.powf(n);
                Complex::new(mag * c, mag * s)
            });
            for j in 0..v.nrows() {
                v[(j, j)] = Complex::new(T::one(), T::zero());
            }
            v
        };
        Ok(Self {
            grid: self.grid.clone(),
            values,
            event_number: self.event_number * n,
        })
    }
}

/// Gaussian multi-event kernel: entry `(j,l)` is
/// `exp(−N·(k_j−k_l)²/(4σ_q²))`.
pub fn kernel_gaussian<T: Real>(
    sigma_q: T,
    n_events: T,
    grid: &MomentumGrid<T>,
) -> Result<DecoherenceKernel<T>> {
    if sigma_q <= T::zero() {
        return Err(Error::Config("Gaussian kernel requires sigma_q > 0".into()));
    }
    if n_events < T::zero() {
        return Err(Error::Config("Gaussian kernel requires N >= 0".into()));
    }
    let four = lit::<T>(4.0);
    let denom = four * sigma_q * sigma_q;
    let n = grid.n_points();
    let values = DMatrix::from_fn(n, n, |r, c| {
        let dk = grid.point(r) - grid.point(c);
        Complex::new((-n_events * dk * dk / denom).exp(), T::zero())
    });
    Ok(DecoherenceKernel {
        grid: grid.clone(),
        values,
        event_number: n_events,
    })
}

/// Single-event kernel from trapezoid quadrature of the transition matrix
/// elements, at an explicit node count.
///
/// The photoelectron-momentum range spans the full grid plus
/// [`QUADRATURE_RANGE_SIGMAS`] recoil widths on both sides, so every pair
/// `(k, k′)` is covered. Entries are diagonal-normalized; the diagonal is
/// exactly 1 and off-diagonal magnitudes obey the Cauchy-Schwarz bound.
pub fn kernel_quadrature_with_nodes<T: Real>(
    params: &MatrixElementParams<T>,
    grid: &MomentumGrid<T>,
    nodes: usize,
) -> Result<DecoherenceKernel<T>> {
    if nodes < MIN_QUADRATURE_NODES {
        return Err(Error::Config(format!(
            "kernel quadrature needs at least {MIN_QUADRATURE_NODES} nodes, got {nodes}"
        )));
    }
    let sigma_q = params.bound.sigma_q();
    let reach = lit::<T>(QUADRATURE_RANGE_SIGMAS) * sigma_q;
    let lo = grid.k_min() - reach;
    let hi = grid.k_max() + reach;
    let h = (hi - lo) / lit::<T>((nodes - 1) as f64);

    let n = grid.n_points();
    // rows of B are matrix elements over the shared p_e grid, scaled by
    // sqrt of the trapezoid weight; the raw kernel is the Gram matrix B·Bᵀ
    let half = lit::<T>(0.5);
    let b = DMatrix::<T>::from_fn(n, nodes, |j, m| {
        let pe = lo + lit::<T>(m as f64) * h;
        let w = if m == 0 || m == nodes - 1 { half * h } else { h };
        params.evaluate(grid.point(j), pe) * w.sqrt()
    });
    let raw = &b * b.transpose();

    let mut diag = Vec::with_capacity(n);
    for j in 0..n {
        let d = raw[(j, j)];
        let positive = d > T::zero();
        if !positive {
            return Err(Error::Numerical(format!(
                "quadrature kernel diagonal not positive at row {j}"
            )));
        }
        diag.push(d.sqrt());
    }
    let mut values = DMatrix::from_fn(n, n, |r, c| raw[(r, c)] / (diag[r] * diag[c]));
    // symmetrize away gemm rounding and pin the diagonal
    for r in 0..n {
        for c in r + 1..n {
            let s = (values[(r, c)] + values[(c, r)]) * half;
            values[(r, c)] = s;
            values[(c, r)] = s;
        }
        values[(r, r)] = T::one();
    }
    Ok(DecoherenceKernel {
        grid: grid.clone(),
        values: values.map(|x| Complex::new(x, T::zero())),
        event_number: T::one(),
    })
}

/// Single-event quadrature kernel at the default resolution, with a
/// node-doubling convergence check.
///
/// Entries are unit-diagonal normalized, so the change under doubling is
/// measured absolutely; exceeding [`QUADRATURE_CONVERGENCE_TOL`] is a
/// numerical error. The doubled (finer) kernel is returned.
pub fn kernel_quadrature<T: Real>(
    params: &MatrixElementParams<T>,
    grid: &MomentumGrid<T>,
) -> Result<DecoherenceKernel<T>> {
    let coarse = kernel_quadrature_with_nodes(params, grid, DEFAULT_QUADRATURE_NODES)?;
    let fine = kernel_quadrature_with_nodes(params, grid, 2 * DEFAULT_QUADRATURE_NODES)?;
    let mut worst = T::zero();
    for (a, b) in coarse.values.iter().zip(fine.values.iter()) {
        let d = cnorm(*a - *b);
        if d > worst {
            worst = d;
        }
    }
    if worst > lit::<T>(QUADRATURE_CONVERGENCE_TOL) {
        return Err(Error::Numerical(format!(
            "kernel quadrature did not converge: node doubling moved an entry by {worst:?}"
        )));
    }
    Ok(fine)
}

/// One row of the diagonal comparison between the quadrature kernel and
/// the closed-form expression.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalComparison<T: Real> {
    pub k: T,
    pub quadrature_ratio: T,
    pub closed_form_ratio: T,
    pub relative_difference: T,
}

/// Compares unnormalized kernel diagonals `Λ(k,k)/Λ(0,0)` from quadrature
/// against the closed form `(k² + σ_q²)/σ_q²` at every grid point.
///
/// Agreement is reported, not asserted; the two routes are documented side
/// by side.
pub fn closed_form_comparison<T: Real>(
    params: &MatrixElementParams<T>,
    grid: &MomentumGrid<T>,
    nodes: usize,
) -> Result<Vec<DiagonalComparison<T>>> {
    if nodes < MIN_QUADRATURE_NODES {
        return Err(Error::Config(format!(
            "diagonal comparison needs at least {MIN_QUADRATURE_NODES} nodes, got {nodes}"
        )));
    }
    let sigma_q = params.bound.sigma_q();
    let reach = lit::<T>(QUADRATURE_RANGE_SIGMAS) * sigma_q;
    // Λ(k,k) = ∫ (k+q)² P(q) dq over the recoil distribution
    let diagonal = |k: T| -> T {
        let h = lit::<T>(2.0) * reach / lit::<T>((nodes - 1) as f64);
        let mut acc = T::zero();
        for m in 0..nodes {
            let q = -reach + lit::<T>(m as f64) * h;
            let v = (k + q) * (k + q) * params.bound.recoil_density(q);
            let w = if m == 0 || m == nodes - 1 {
                lit::<T>(0.5)
            } else {
                T::one()
            };
            acc += w * v;
        }
        acc * h
    };
    let quad_origin = diagonal(T::zero());
    let closed_origin = closed_form_single(params, T::zero(), T::zero());
    let mut rows = Vec::with_capacity(grid.n_points());
    for k in grid.points() {
        let quadrature_ratio = diagonal(k) / quad_origin;
        let closed_form_ratio = closed_form_single(params, k, k) / closed_origin;
        let relative_difference = (quadrature_ratio - closed_form_ratio).abs() / closed_form_ratio;
        rows.push(DiagonalComparison {
            k,
            quadrature_ratio,
            closed_form_ratio,
            relative_difference,
        });
    }
    Ok(rows)
}

/// Applies a decoherence kernel to a tabulated joint amplitude:
/// `ρ[(s,i),(s′,i′)] = f(k_s,k_i)·f*(k_s′,k_i′)·Λ̂(k_i,k_i′)·Δk_s·Δk_i`,
/// renormalized to unit trace.
pub fn apply_kernel<T: Real>(
    f: &BiphotonAmplitude<T>,
    kernel: &DecoherenceKernel<T>,
) -> Result<JointDensityMatrix<T>> {
    let (grid_s, grid_i) = f
        .grids()
        .ok_or_else(|| Error::Config("apply_kernel requires a tabulated amplitude".into()))?;
    if grid_i != kernel.grid() {
        return Err(Error::Config(
            "amplitude idler grid does not match kernel grid".into(),
        ));
    }
    let table = f.values().expect("tabulated amplitude has values");
    let ns = grid_s.n_points();
    let ni = grid_i.n_points();
    let dim = ns * ni;
    let w = (grid_s.spacing() * grid_i.spacing()).sqrt();

    // g is the flattened state vector (s outer, i inner) with grid weights
    let mut g = Vec::with_capacity(dim);
    for s in 0..ns {
        for i in 0..ni {
            g.push(table[(s, i)].scale(w));
        }
    }
    let lam = kernel.values();
    let mut values = DMatrix::from_fn(dim, dim, |a, b| {
        g[a] * g[b].conj() * lam[(a % ni, b % ni)]
    });

    let mut trace = T::zero();
    for a in 0..dim {
        trace += values[(a, a)].re;
    }
    let trace_positive = trace > T::zero();
    if !trace_positive {
        return Err(Error::Numerical("joint density matrix has nonpositive trace".into()));
    }
    let inv = Complex::new(T::one() / trace, T::zero());
    values.iter_mut().for_each(|z| *z *= inv);
    JointDensityMatrix::new(grid_s.clone(), grid_i.clone(), values)
}

/// Convolves a reduced signal matrix with the recoil-momentum
/// distribution along the joint displacement direction:
/// `ρ′(k,k′) = Σ_q ρ(k−q, k′−q)·P(q)·Δq`, trace renormalized.
///
/// Displacements run over grid multiples, so support is clipped at the
/// grid edges; losing more than [`DISPLACEMENT_CLIP_LIMIT`] of the mass is
/// a truncation error.
pub fn displace_signal<T: Real>(
    rho_s: &ReducedDensityMatrix<T>,
    bound: &BoundState<T>,
) -> Result<ReducedDensityMatrix<T>> {
    let grid = rho_s.grid();
    let n = grid.n_points();
    let dk = grid.spacing();
    let rho = rho_s.values();

    let mut out = DMatrix::from_element(n, n, Complex::new(T::zero(), T::zero()));
    let mut weight_total = T::zero();
    for shift in -(n as isize - 1)..=(n as isize - 1) {
        let q = lit::<T>(shift as f64) * dk;
        let w = bound.recoil_density(q) * dk;
        if w == T::zero() {
            continue;
        }
        weight_total += w;
        let wc = Complex::new(w, T::zero());
        let (a_lo, a_hi) = shifted_range(n, shift);
        for a in a_lo..a_hi {
            let src_a = (a as isize - shift) as usize;
            for b in a_lo..a_hi {
                let src_b = (b as isize - shift) as usize;
                out[(a, b)] += wc * rho[(src_a, src_b)];
            }
        }
    }

    let mut kept = T::zero();
    for a in 0..n {
        kept += out[(a, a)].re;
    }
    let input_trace = rho_s.trace();
    let reference = if weight_total > T::one() {
        weight_total * input_trace
    } else {
        input_trace
    };
    let clipped = T::one() - kept / reference;
    if clipped > lit::<T>(DISPLACEMENT_CLIP_LIMIT) {
        return Err(Error::Truncation(format!(
            "displacement clipped {clipped:?} of the probability mass at the grid edges"
        )));
    }
    let kept_positive = kept > T::zero();
    if !kept_positive {
        return Err(Error::Numerical("displaced matrix has nonpositive trace".into()));
    }
    let inv = Complex::new(T::one() / kept, T::zero());
    out.iter_mut().for_each(|z| *z *= inv);
    ReducedDensityMatrix::new(grid.clone(), out)
}

fn shifted_range(n: usize, shift: isize) -> (usize, usize) {
    if shift >= 0 {
        (shift as usize, n)
    } else {
        (0, (n as isize + shift) as usize)
    }
}

/// Mixes the non-interacting and ionizing branches with Beer-Lambert
/// weights: `(1−w)·ρ_coherent + w·ρ_decohered`, `w = 1 − e^(−N)`.
pub fn mix_branches<T: Real>(
    rho_coherent: &JointDensityMatrix<T>,
    rho_decohered: &JointDensityMatrix<T>,
    n_events: T,
) -> Result<JointDensityMatrix<T>> {
    if n_events < T::zero() {
        return Err(Error::Config("branch mixing requires N >= 0".into()));
    }
    if rho_coherent.grid_s() != rho_decohered.grid_s()
        || rho_coherent.grid_i() != rho_decohered.grid_i()
    {
        return Err(Error::Config("branch mixing requires matching grids".into()));
    }
    let w = T::one() - (-n_events).exp();
    let survive = Complex::new(T::one() - w, T::zero());
    let decohere = Complex::new(w, T::zero());
    let values = rho_coherent.values() * survive + rho_decohered.values() * decohere;
    JointDensityMatrix::new(
        rho_coherent.grid_s().clone(),
        rho_coherent.grid_i().clone(),
        values,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(sigma_q: f64) -> MatrixElementParams<f64> {
        MatrixElementParams::new(1.0, BoundState::gaussian(sigma_q).unwrap()).unwrap()
    }

    /// Closed Gaussian-moment oracle for the unnormalized single-event
    /// kernel: Λ(k,k′) = (ab + σ²)·exp(−(k−k′)²/(8σ²)) with
    /// a = (3k−k′)/2, b = (3k′−k)/2. Derived independently of the
    /// quadrature path from the moments of the recoil Gaussian.
    fn kernel_oracle(sigma_q: f64, k: f64, kp: f64) -> f64 {
        let a = (3.0 * k - kp) / 2.0;
        let b = (3.0 * kp - k) / 2.0;
        let s2 = sigma_q * sigma_q;
        (a * b + s2) * (-(k - kp) * (k - kp) / (8.0 * s2)).exp()
    }

    fn normalized_oracle(sigma_q: f64, k: f64, kp: f64) -> f64 {
        kernel_oracle(sigma_q, k, kp)
            / (kernel_oracle(sigma_q, k, k) * kernel_oracle(sigma_q, kp, kp)).sqrt()
    }

    #[test]
    fn matrix_element_zeros() {
        let p = params(1.0);
        assert_eq!(matrix_element(&p, 0.0, 0.0).re, 0.0);
        for k in [0.5, -1.3, 2.0] {
            assert_eq!(matrix_element(&p, k, 2.0 * k).re, 0.0);
        }
    }

    #[test]
    fn matrix_element_value_and_self_consistency() {
        let p = params(1.0);
        // (2·1 − 1)·φ̃(0) = (2π)^(−1/4)
        let expect = (2.0 * std::f64::consts::PI).powf(-0.25);
        assert_relative_eq!(matrix_element(&p, 1.0, 1.0).re, expect, max_relative = 1e-14);

        // ∫|M(k,·)|² equals the analytic diagonal k² + σ_q²
        let k = 1.0;
        let nodes = 4096;
        let (lo, hi) = (k - 10.0, k + 10.0);
        let h = (hi - lo) / (nodes - 1) as f64;
        let mut acc = 0.0;
        for m in 0..nodes {
            let pe = lo + m as f64 * h;
            let v = matrix_element(&p, k, pe).norm_sqr();
            acc += if m == 0 || m == nodes - 1 { 0.5 * v } else { v };
        }
        assert_relative_eq!(acc * h, 2.0, max_relative = 1e-10);
    }

    #[test]
    fn polarization_must_be_unit() {
        let b = BoundState::gaussian(1.0f64).unwrap();
        assert!(MatrixElementParams::new(0.5, b.clone()).is_err());
        assert!(MatrixElementParams::new(-1.0, b).is_ok());
    }

    #[test]
    fn gaussian_kernel_entries() {
        let grid = MomentumGrid::symmetric(2.0f64, 5).unwrap();
        let k0 = kernel_gaussian(1.0, 0.0, &grid).unwrap();
        assert!(k0.values().iter().all(|z| z.re == 1.0 && z.im == 0.0));

        // |k − k′| = 2σ_q at N = 1 gives e^(−1)
        let k1 = kernel_gaussian(1.0, 1.0, &grid).unwrap();
        let (r, c) = (4, 2); // points 2.0 and 0.0
        assert_relative_eq!(k1.values()[(r, c)].re, (-1.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn gaussian_kernel_semigroup() {
        let grid = MomentumGrid::symmetric(3.0f64, 9).unwrap();
        let ka = kernel_gaussian(0.8, 1.6, &grid).unwrap();
        let kb = kernel_gaussian(0.8, 1.6, &grid).unwrap();
        let kc = kernel_gaussian(0.8, 3.2, &grid).unwrap();
        for ((a, b), c) in ka
            .values()
            .iter()
            .zip(kb.values().iter())
            .zip(kc.values().iter())
        {
            assert_relative_eq!((a * b).re, c.re, max_relative = 1e-12);
        }
    }

    #[test]
    fn quadrature_kernel_contract() {
        let grid = MomentumGrid::symmetric(2.0f64, 17).unwrap();
        let p = params(1.0);
        let k = kernel_quadrature(&p, &grid).unwrap();

        assert!(k.hermiticity_error() <= 1e-12);
        for j in 0..17 {
            assert_eq!(k.values()[(j, j)].re, 1.0);
        }
        assert!(k.values().iter().all(|z| z.norm() <= 1.0 + 1e-10));
        assert_eq!(k.event_number(), 1.0);
    }

    #[test]
    fn quadrature_matches_moment_oracle() {
        let grid = MomentumGrid::symmetric(2.0f64, 17).unwrap();
        let p = params(1.0);
        let k = kernel_quadrature(&p, &grid).unwrap();
        for (r, c) in [(10usize, 6usize), (12, 3), (16, 0), (9, 8)] {
            let want = normalized_oracle(1.0, grid.point(r), grid.point(c));
            assert_abs_diff_eq!(k.values()[(r, c)].re, want, epsilon = 1e-9);
        }
        // pinned: σ_q = 1, k = 0.5, k′ = −0.5 sits at the zero of the
        // vector prefactor average, strictly inside the unit bound
        let v = k.values()[(10, 6)].re.abs();
        assert!(v < 1e-9, "expected vanishing entry, got {v}");
    }

    #[test]
    fn quadrature_node_doubling_is_stable() {
        let grid = MomentumGrid::symmetric(2.5f64, 13).unwrap();
        let p = params(0.7);
        let coarse = kernel_quadrature_with_nodes(&p, &grid, 512).unwrap();
        let fine = kernel_quadrature_with_nodes(&p, &grid, 1024).unwrap();
        let worst = coarse
            .values()
            .iter()
            .zip(fine.values().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-6, "doubling moved an entry by {worst}");
    }

    #[test]
    fn quadrature_rejects_too_few_nodes() {
        let grid = MomentumGrid::symmetric(1.0f64, 8).unwrap();
        let p = params(1.0);
        assert!(matches!(
            kernel_quadrature_with_nodes(&p, &grid, 128),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn closed_form_values() {
        let p = params(1.0);
        assert_eq!(closed_form_single(&p, 0.0, 0.0), 1.0);
        assert_eq!(closed_form_single(&p, 2.0, 3.0), 7.0);
    }

    #[test]
    fn diagonal_comparison_agrees_for_aligned_polarization() {
        let grid = MomentumGrid::symmetric(2.0f64, 9).unwrap();
        let p = params(1.0);
        let rows = closed_form_comparison(&p, &grid, 2048).unwrap();
        assert_eq!(rows.len(), 9);
        // the quadrature diagonal is exactly k² + σ_q², so the two routes
        // agree up to quadrature error on this axis-aligned case
        for row in &rows {
            assert!(row.relative_difference < 1e-9, "at k={}: {}", row.k, row.relative_difference);
        }
    }

    #[test]
    fn elementwise_power_scales_event_number() {
        let grid = MomentumGrid::symmetric(2.0f64, 9).unwrap();
        let k1 = kernel_gaussian(1.0, 1.0, &grid).unwrap();
        let k3 = k1.elementwise_power(3.0).unwrap();
        let want = kernel_gaussian(1.0, 3.0, &grid).unwrap();
        assert_eq!(k3.event_number(), 3.0);
        for (a, b) in k3.values().iter().zip(want.values().iter()) {
            assert_relative_eq!(a.re, b.re, max_relative = 1e-12);
        }
        let k0 = k1.elementwise_power(0.0).unwrap();
        assert!(k0.values().iter().all(|z| z.re == 1.0));
        assert!(k1.elementwise_power(-1.0).is_err());
    }

    fn tabulated_state(sigma_p: f64, sigma_c: f64, half: f64, n: usize) -> BiphotonAmplitude<f64> {
        BiphotonAmplitude::double_gaussian(sigma_p, sigma_c)
            .unwrap()
            .tabulate(
                MomentumGrid::symmetric(half, n).unwrap(),
                MomentumGrid::symmetric(half, n).unwrap(),
            )
            .unwrap()
    }

    #[test]
    fn apply_kernel_preserves_purity_at_n_zero() {
        let f = tabulated_state(1.0, 0.5, 5.0, 20);
        let grid_i = f.grids().unwrap().1.clone();
        let k0 = kernel_gaussian(1.0, 0.0, &grid_i).unwrap();
        let rho = apply_kernel(&f, &k0).unwrap();
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(crate::metrics::purity(&rho), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn apply_kernel_unit_trace_any_n() {
        let f = tabulated_state(1.0, 0.5, 5.0, 16);
        let grid_i = f.grids().unwrap().1.clone();
        for n in [0.0, 0.7, 3.0, 42.0] {
            let k = kernel_gaussian(0.8, n, &grid_i).unwrap();
            let rho = apply_kernel(&f, &k).unwrap();
            assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(rho.trace().im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn apply_kernel_large_n_purity_matches_dephased_oracle() {
        let f = tabulated_state(1.0, 0.4, 4.5, 18);
        let (grid_s, grid_i) = f.grids().unwrap();
        let grid_s = grid_s.clone();
        let grid_i = grid_i.clone();
        // N σ_q² far beyond the grid span squared: off-diagonal idler
        // coherences are fully suppressed
        let k = kernel_gaussian(1.0, 1e7, &grid_i).unwrap();
        let rho = apply_kernel(&f, &k).unwrap();

        // dephased-state purity oracle: Σ_i p_i² over idler marginals of
        // the renormalized tabulated state
        let table = f.values().unwrap();
        let w = grid_s.spacing() * grid_i.spacing();
        let mut p = vec![0.0; grid_i.n_points()];
        for s in 0..grid_s.n_points() {
            for i in 0..grid_i.n_points() {
                p[i] += table[(s, i)].norm_sqr() * w;
            }
        }
        let oracle: f64 = p.iter().map(|x| x * x).sum();
        assert_relative_eq!(crate::metrics::purity(&rho), oracle, max_relative = 1e-6);
    }

    #[test]
    fn apply_kernel_rejects_mismatched_grids() {
        let f = tabulated_state(1.0, 0.5, 5.0, 16);
        let other = MomentumGrid::symmetric(5.0f64, 17).unwrap();
        let k = kernel_gaussian(1.0, 1.0, &other).unwrap();
        assert!(matches!(apply_kernel(&f, &k), Err(Error::Config(_))));

        let dg = BiphotonAmplitude::double_gaussian(1.0f64, 0.5).unwrap();
        assert!(matches!(apply_kernel(&dg, &k), Err(Error::Config(_))));
    }

    fn gaussian_reduced(grid: &MomentumGrid<f64>, variance: f64) -> ReducedDensityMatrix<f64> {
        let n = grid.n_points();
        let g: Vec<f64> = grid
            .points()
            .map(|k| (-k * k / (4.0 * variance)).exp())
            .collect();
        let norm: f64 = g.iter().map(|x| x * x).sum();
        let values = DMatrix::from_fn(n, n, |r, c| Complex::new(g[r] * g[c] / norm, 0.0));
        ReducedDensityMatrix::new(grid.clone(), values).unwrap()
    }

    fn diag_variance(rho: &ReducedDensityMatrix<f64>) -> f64 {
        let grid = rho.grid();
        let probs = rho.diagonal();
        let mean: f64 = grid.points().zip(&probs).map(|(k, p)| k * p).sum();
        grid.points()
            .zip(&probs)
            .map(|(k, p)| (k - mean) * (k - mean) * p)
            .sum()
    }

    #[test]
    fn displacement_delta_limit_is_identity() {
        let grid = MomentumGrid::symmetric(6.0f64, 129).unwrap();
        let rho = gaussian_reduced(&grid, 1.0);
        let narrow = BoundState::gaussian(grid.spacing() / 100.0).unwrap();
        let out = displace_signal(&rho, &narrow).unwrap();
        let worst = out
            .values()
            .iter()
            .zip(rho.values().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "delta-limit deviation {worst}");
    }

    #[test]
    fn displacement_adds_variances() {
        let grid = MomentumGrid::symmetric(8.0f64, 257).unwrap();
        let v = 1.0;
        let rho = gaussian_reduced(&grid, v);
        assert_relative_eq!(diag_variance(&rho), v, max_relative = 0.01);
        let sq2 = 0.49f64;
        let out = displace_signal(&rho, &BoundState::gaussian(sq2.sqrt()).unwrap()).unwrap();
        assert_relative_eq!(diag_variance(&out), v + sq2, max_relative = 0.02);
        assert_abs_diff_eq!(out.trace(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn displacement_clipping_is_detected() {
        let grid = MomentumGrid::symmetric(2.0f64, 33).unwrap();
        let rho = gaussian_reduced(&grid, 0.5);
        // recoil much wider than the grid pushes most mass off the edges
        let wide = BoundState::gaussian(20.0).unwrap();
        assert!(matches!(
            displace_signal(&rho, &wide),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn branch_mixing_limits_and_weight() {
        let f = tabulated_state(1.0, 0.5, 5.0, 16);
        let grid_i = f.grids().unwrap().1.clone();
        let pure = apply_kernel(&f, &kernel_gaussian(1.0, 0.0, &grid_i).unwrap()).unwrap();
        let deco = apply_kernel(&f, &kernel_gaussian(1.0, 4.0, &grid_i).unwrap()).unwrap();

        let at0 = mix_branches(&pure, &deco, 0.0).unwrap();
        assert_eq!(at0.values(), pure.values());

        let at_inf = mix_branches(&pure, &deco, 1e3).unwrap();
        let worst = at_inf
            .values()
            .iter()
            .zip(deco.values().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12);

        // w(1.6) = 1 − e^(−1.6)
        let w = 0.7981034820053446;
        let mixed = mix_branches(&pure, &deco, 1.6).unwrap();
        let a = mixed.values()[(1, 2)];
        let want = pure.values()[(1, 2)] * Complex::new(1.0 - w, 0.0)
            + deco.values()[(1, 2)] * Complex::new(w, 0.0);
        assert_abs_diff_eq!((a - want).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mixed.trace().re, 1.0, epsilon = 1e-12);
    }
}
