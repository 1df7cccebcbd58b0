//! Dynamical backaction of a detuned microwave cavity on a nanomechanical
//! oscillator.
//!
//! The crate evaluates radiation-pressure damping and spring shift, thermal
//! and frequency-noise spectra of the mechanical mode, and runs the
//! estimation and virtual-experiment pipelines built on them: Lorentzian
//! thermometry, coupling calibration, coupled detuning-sweep fits, Kerr
//! cavity sweeps and sideband-cooling curves.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! command-line tool uses.

// NaN-rejecting guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimation;
pub mod experiment;
pub mod numerics;
pub mod physics;
pub mod scalar;
pub mod spectra;

pub use error::{Error, Result};
pub use scalar::{angular, hertz, Real};

/// Scalar used by the concrete aliases below.
pub type Scalar = f64;

pub type PhysicalConstants = physics::PhysicalConstants<f64>;
pub type CavityParams = physics::CavityParams<f64>;
pub type MechanicalParams = physics::MechanicalParams<f64>;
pub type CouplingParams = physics::CouplingParams<f64>;
pub type ThermalEnvironment = physics::ThermalEnvironment<f64>;
pub type SystemParams = physics::SystemParams<f64>;
pub type DriveSettings = physics::DriveSettings<f64>;
pub type PowerSpec = physics::PowerSpec<f64>;
pub type BackactionResult = physics::BackactionResult<f64>;

pub type SpectrumTrace = spectra::SpectrumTrace<f64>;
pub type NoiseModel = spectra::NoiseModel<f64>;
pub type ThermalPeakModel = spectra::ThermalPeakModel<f64>;
pub use spectra::PsdUnit;

pub type FitResult = numerics::FitResult<f64>;
pub type LorentzianModel = estimation::LorentzianModel<f64>;
pub type CalibrationPoint = estimation::CalibrationPoint<f64>;
pub type CouplingCalibration = estimation::CouplingCalibration<f64>;
pub type SweepPoint = estimation::SweepPoint<f64>;
pub type SweepFitOptions = estimation::SweepFitOptions<f64>;

pub type KerrCavity = experiment::KerrCavity<f64>;
pub type HeatingModel = experiment::HeatingModel<f64>;
pub type SweepRow = experiment::SweepRow<f64>;
pub type SweepResult = experiment::SweepResult<f64>;
pub type CoolingRow = experiment::CoolingRow<f64>;
pub type CoolingResult = experiment::CoolingResult<f64>;
pub use experiment::SweepMode;

/// Single-precision variants.
pub mod f32 {
    pub type SystemParams = crate::physics::SystemParams<f32>;
    pub type SpectrumTrace = crate::spectra::SpectrumTrace<f32>;
    pub type FitResult = crate::numerics::FitResult<f32>;
    pub type SweepResult = crate::experiment::SweepResult<f32>;
}
