//! Physical constants, compiled in for reproducibility.

/// Boltzmann constant (J/K), CODATA exact.
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Electron mass (kg), CODATA.
pub const ELECTRON_MASS: f64 = 9.1093837e-31;

/// Reduced Planck constant (J·s), CODATA exact.
pub const HBAR: f64 = 1.054571817e-34;

/// One torr in pascal.
pub const TORR_PA: f64 = 133.322;

/// One electronvolt in joule, CODATA exact.
pub const EV_J: f64 = 1.602176634e-19;
