//! Physical-parameter algebra: gas density, interaction number, recoil
//! variance, and the entanglement survival threshold.

use crate::constants::{BOLTZMANN, ELECTRON_MASS, HBAR};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// How the recoil-momentum variance of a scenario is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Recoil<T: Real> {
    /// Ionization mode: photoelectron kinetic energy in joule; the
    /// variance follows from the recoil momentum.
    PhotoelectronEnergy(T),
    /// Direct mode: recoil variance `σ_q²` in m⁻².
    SigmaQ2(T),
}

/// Physical scenario: medium, interaction geometry, recoil model, and the
/// Gaussian widths of the biphoton state.
///
/// The interaction number is `N = ρσL` from the medium parameters, unless
/// `interaction_count` supplies it directly (used for regimes whose `N`
/// is quoted rather than derived).
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T: Real> {
    pub label: String,
    /// Gas pressure (Pa).
    pub pressure: Option<T>,
    /// Gas temperature (K).
    pub temperature: T,
    /// Interaction cross-section (m²).
    pub cross_section: Option<T>,
    /// Propagation length through the medium (m).
    pub path_length: Option<T>,
    /// Direct interaction count, overriding `ρσL`.
    pub interaction_count: Option<T>,
    pub recoil: Recoil<T>,
    /// Pump width σ_p (m⁻¹).
    pub sigma_p: T,
    /// Conditional width σ_c (m⁻¹).
    pub sigma_c: T,
}

/// Outcome of the threshold inequality `N σ_q² < σ_p² − σ_c²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdVerdict<T: Real> {
    /// Mean number of interactions.
    pub n: T,
    /// Recoil variance (m⁻²).
    pub sigma_q2: T,
    /// `N σ_q²` (m⁻²).
    pub lhs: T,
    /// `σ_p² − σ_c²` (m⁻²).
    pub rhs: T,
    pub survives: bool,
    /// `(rhs − lhs)/rhs`; 1 at N = 0, 0 at the boundary.
    pub margin: T,
    /// Set when σ_c ≥ σ_p: the Gaussian model is separable before any
    /// interaction, so nothing can survive.
    pub initially_separable: bool,
}

/// Sweep axes exposed by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Pressure (Pa).
    Pressure,
    /// Path length (m).
    Length,
    /// Photoelectron energy (J); only for ionization-mode scenarios.
    Energy,
    /// Pump width (m⁻¹).
    SigmaP,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Pressure => "pressure",
            SweepAxis::Length => "length",
            SweepAxis::Energy => "energy",
            SweepAxis::SigmaP => "sigma_p",
        }
    }
}

/// Verdicts along a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T: Real> {
    pub axis: SweepAxis,
    pub values: Vec<T>,
    pub verdicts: Vec<ThresholdVerdict<T>>,
    /// Index of the first verdict whose `survives` differs from its
    /// predecessor, if any.
    pub crossing: Option<usize>,
}

impl<T: Real> Scenario<T> {
    /// Ionization-mode scenario: `N` from `ρσL`, recoil from the
    /// photoelectron energy.
    #[allow(clippy::too_many_arguments)]
    pub fn ionization(
        label: impl Into<String>,
        pressure_pa: T,
        temperature_k: T,
        cross_section_m2: T,
        length_m: T,
        photoelectron_j: T,
        sigma_p: T,
        sigma_c: T,
    ) -> Result<Self> {
        let s = Self {
            label: label.into(),
            pressure: Some(pressure_pa),
            temperature: temperature_k,
            cross_section: Some(cross_section_m2),
            path_length: Some(length_m),
            interaction_count: None,
            recoil: Recoil::PhotoelectronEnergy(photoelectron_j),
            sigma_p,
            sigma_c,
        };
        s.validate()?;
        Ok(s)
    }

    /// Direct-mode scenario: `N` and `σ_q²` quoted directly.
    pub fn direct(
        label: impl Into<String>,
        interaction_count: T,
        sigma_q2_m2: T,
        sigma_p: T,
        sigma_c: T,
    ) -> Result<Self> {
        let s = Self {
            label: label.into(),
            pressure: None,
            temperature: lit::<T>(300.0),
            cross_section: None,
            path_length: None,
            interaction_count: Some(interaction_count),
            recoil: Recoil::SigmaQ2(sigma_q2_m2),
            sigma_p,
            sigma_c,
        };
        s.validate()?;
        Ok(s)
    }

    /// Checks positivity of all supplied quantities and that the
    /// interaction number is determined.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: Option<T>| -> Result<()> {
            match v {
                Some(x) if x <= T::zero() => {
                    Err(Error::Config(format!("{name} must be positive")))
                }
                _ => Ok(()),
            }
        };
        positive("pressure", self.pressure)?;
        positive("cross_section", self.cross_section)?;
        positive("path_length", self.path_length)?;
        if self.temperature <= T::zero() {
            return Err(Error::Config("temperature must be positive".into()));
        }
        if let Some(n) = self.interaction_count {
            if n < T::zero() {
                return Err(Error::Config("interaction count must be >= 0".into()));
            }
        }
        match self.recoil {
            Recoil::PhotoelectronEnergy(e) if e < T::zero() => {
                return Err(Error::Config("photoelectron energy must be >= 0".into()));
            }
            Recoil::SigmaQ2(s) if s <= T::zero() => {
                return Err(Error::Config("sigma_q2 must be positive".into()));
            }
            _ => {}
        }
        if self.sigma_p <= T::zero() || self.sigma_c <= T::zero() {
            return Err(Error::Config("sigma_p and sigma_c must be positive".into()));
        }
        if self.interaction_count.is_none()
            && (self.pressure.is_none()
                || self.cross_section.is_none()
                || self.path_length.is_none())
        {
            return Err(Error::Config(
                "need either interaction_count or all of pressure, cross_section, path_length"
                    .into(),
            ));
        }
        Ok(())
    }

    /// σ_c ≥ σ_p: no entanglement in the Gaussian model even before
    /// interactions.
    pub fn is_initially_separable(&self) -> bool {
        self.sigma_c >= self.sigma_p
    }

    /// Mean interaction number: the direct count if given, else `ρσL`.
    pub fn interaction_number(&self) -> Result<T> {
        if let Some(n) = self.interaction_count {
            return Ok(n);
        }
        match (self.pressure, self.cross_section, self.path_length) {
            (Some(p), Some(cs), Some(l)) => {
                Ok(interaction_number(number_density(p, self.temperature), cs, l))
            }
            _ => Err(Error::Config(
                "scenario does not determine an interaction number".into(),
            )),
        }
    }

    /// Recoil variance σ_q² (m⁻²).
    pub fn recoil_variance(&self) -> T {
        match self.recoil {
            Recoil::PhotoelectronEnergy(e) => recoil_variance_from_energy(e),
            Recoil::SigmaQ2(s) => s,
        }
    }
}

/// Ideal-gas number density `P/(k_B T)` (m⁻³).
pub fn number_density<T: Real>(pressure_pa: T, temperature_k: T) -> T {
    pressure_pa / (lit::<T>(BOLTZMANN) * temperature_k)
}

/// Mean interaction number `N = ρσL`.
pub fn interaction_number<T: Real>(density: T, cross_section: T, length: T) -> T {
    density * cross_section * length
}

/// Recoil variance from the photoelectron kinetic energy:
/// `k_e = √(2 m_e E)/ħ`, `σ_q² = k_e²/2` (the transverse-plane share).
pub fn recoil_variance_from_energy<T: Real>(energy_j: T) -> T {
    let ke2 = lit::<T>(2.0 * ELECTRON_MASS / (HBAR * HBAR)) * energy_j;
    ke2 / lit::<T>(2.0)
}

/// Evaluates the survival threshold `N σ_q² < σ_p² − σ_c²`.
///
/// The inequality is strict: the boundary itself is classified as not
/// surviving. A scenario with σ_c ≥ σ_p is flagged initially separable
/// and never survives.
pub fn threshold_check<T: Real>(scenario: &Scenario<T>) -> Result<ThresholdVerdict<T>> {
    scenario.validate()?;
    let n = scenario.interaction_number()?;
    let sigma_q2 = scenario.recoil_variance();
    let lhs = n * sigma_q2;
    let rhs = scenario.sigma_p * scenario.sigma_p - scenario.sigma_c * scenario.sigma_c;
    let initially_separable = scenario.is_initially_separable();
    let survives = !initially_separable && lhs < rhs;
    let margin = if rhs != T::zero() {
        (rhs - lhs) / rhs
    } else {
        -T::one()
    };
    Ok(ThresholdVerdict {
        n,
        sigma_q2,
        lhs,
        rhs,
        survives,
        margin,
        initially_separable,
    })
}

/// Path length at which the threshold is met exactly:
/// `L* = (σ_p² − σ_c²)/(ρ σ σ_q²)`.
pub fn critical_length<T: Real>(scenario: &Scenario<T>) -> Result<T> {
    scenario.validate()?;
    if scenario.is_initially_separable() {
        return Err(Error::Config(
            "critical length requires sigma_c < sigma_p".into(),
        ));
    }
    let (pressure, cross_section) = match (scenario.pressure, scenario.cross_section) {
        (Some(p), Some(cs)) => (p, cs),
        _ => {
            return Err(Error::Config(
                "critical length requires medium parameters (pressure, cross_section)".into(),
            ))
        }
    };
    let density = number_density(pressure, scenario.temperature);
    let sigma_q2 = scenario.recoil_variance();
    if sigma_q2 <= T::zero() {
        return Err(Error::Config("critical length requires sigma_q2 > 0".into()));
    }
    let rhs = scenario.sigma_p * scenario.sigma_p - scenario.sigma_c * scenario.sigma_c;
    Ok(rhs / (density * cross_section * sigma_q2))
}

/// Evaluates the threshold along one axis, reporting the first index at
/// which survival flips. Values must be nonempty and strictly increasing.
pub fn sweep<T: Real>(
    base: &Scenario<T>,
    axis: SweepAxis,
    values: &[T],
) -> Result<SweepResult<T>> {
    if values.is_empty() {
        return Err(Error::Config("sweep requires a nonempty value list".into()));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("sweep values must be strictly increasing".into()));
    }
    let mut verdicts = Vec::with_capacity(values.len());
    for &v in values {
        let mut s = base.clone();
        match axis {
            SweepAxis::Pressure => {
                if s.pressure.is_none() {
                    return Err(Error::Config(
                        "pressure sweep requires a medium-mode scenario".into(),
                    ));
                }
                s.pressure = Some(v);
                // a direct count would mask the axis
                s.interaction_count = None;
                if s.cross_section.is_none() || s.path_length.is_none() {
                    return Err(Error::Config(
                        "pressure sweep requires cross_section and path_length".into(),
                    ));
                }
            }
            SweepAxis::Length => {
                if s.path_length.is_none() {
                    return Err(Error::Config(
                        "length sweep requires a medium-mode scenario".into(),
                    ));
                }
                s.path_length = Some(v);
                s.interaction_count = None;
            }
            SweepAxis::Energy => match s.recoil {
                Recoil::PhotoelectronEnergy(_) => {
                    s.recoil = Recoil::PhotoelectronEnergy(v);
                }
                Recoil::SigmaQ2(_) => {
                    return Err(Error::Config(
                        "energy sweep requires an ionization-mode scenario".into(),
                    ))
                }
            },
            SweepAxis::SigmaP => {
                s.sigma_p = v;
            }
        }
        verdicts.push(threshold_check(&s)?);
    }
    let crossing = verdicts
        .windows(2)
        .position(|w| w[0].survives != w[1].survives)
        .map(|i| i + 1);
    Ok(SweepResult {
        axis,
        values: values.to_vec(),
        verdicts,
        crossing,
    })
}
