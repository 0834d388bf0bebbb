//! Bound-state wavefunctions of the target electron in momentum space.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Electron bound state, described by the Fourier-space amplitude of its
/// wavefunction.
///
/// The recoil-momentum density `P(q) = |φ̃(q)|²` is what the decoherence
/// kernel and the signal displacement see; `σ_q²` is its variance.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundState<T: Real> {
    /// Gaussian wavefunction with recoil momentum standard deviation
    /// `sigma_q` (m⁻¹), so that `P(q) ∝ exp(−q²/(2σ_q²))`.
    Gaussian { sigma_q: T },
}

impl<T: Real> BoundState<T> {
    /// Gaussian bound state with recoil std `sigma_q > 0`.
    pub fn gaussian(sigma_q: T) -> Result<Self> {
        if sigma_q <= T::zero() {
            return Err(Error::Config("bound state requires sigma_q > 0".into()));
        }
        Ok(Self::Gaussian { sigma_q })
    }

    pub fn sigma_q(&self) -> T {
        match self {
            Self::Gaussian { sigma_q } => *sigma_q,
        }
    }

    /// Recoil momentum variance `σ_q² = ⟨q²⟩` (m⁻²).
    pub fn recoil_variance(&self) -> T {
        let s = self.sigma_q();
        s * s
    }

    /// Normalized 1D recoil-momentum density
    /// `P(q) = exp(−q²/(2σ_q²)) / (σ_q √(2π))` (units m).
    pub fn recoil_density(&self, q: T) -> T {
        let s = self.sigma_q();
        let norm = T::one() / (s * lit::<T>(2.0 * std::f64::consts::PI).sqrt());
        norm * (-(q * q) / (lit::<T>(2.0) * s * s)).exp()
    }

    /// Momentum-space amplitude `φ̃(q) = (2πσ_q²)^(−1/4) exp(−q²/(4σ_q²))`,
    /// whose squared magnitude is [`recoil_density`](Self::recoil_density).
    pub fn amplitude(&self, q: T) -> T {
        let s = self.sigma_q();
        let norm = (lit::<T>(2.0 * std::f64::consts::PI) * s * s).powf(lit::<T>(-0.25));
        norm * (-(q * q) / (lit::<T>(4.0) * s * s)).exp()
    }
}
