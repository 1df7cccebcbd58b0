//! Thermal-motion spectra of the mechanical mode and synthetic measured
//! periodograms.
//!
//! PSDs are one-sided and normalised so that `∫ S(ω) dω/2π` is the variance,
//! i.e. they are densities per Hz even though they are evaluated at angular
//! frequency.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{ChiSquared, Distribution};

use crate::error::{domain, Result};
use crate::physics::{MechanicalParams, PhysicalConstants};
use crate::scalar::{angular, Real};

/// Identifier of the generator used by [`synth_spectrum`]; recorded in trace
/// provenance.
pub const RNG_ALGORITHM: &str = "ChaCha20Rng/seed_from_u64";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PsdUnit {
    /// Displacement, m²/Hz.
    Displacement,
    /// Cavity frequency fluctuation, Hz²/Hz.
    CavityFrequency,
}

impl PsdUnit {
    pub fn symbol(self) -> &'static str {
        match self {
            PsdUnit::Displacement => "m^2/Hz",
            PsdUnit::CavityFrequency => "Hz^2/Hz",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            "m^2/Hz" => Some(PsdUnit::Displacement),
            "Hz^2/Hz" => Some(PsdUnit::CavityFrequency),
            _ => None,
        }
    }
}

/// A measured or synthesised spectrum on an ordinary-frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace<T> {
    freq_hz: Vec<T>,
    psd: Vec<T>,
    unit: PsdUnit,
    n_avg: usize,
    seed: Option<u64>,
    pub provenance: String,
}

impl<T: Real> SpectrumTrace<T> {
    pub fn new(freq_hz: Vec<T>, psd: Vec<T>, unit: PsdUnit, n_avg: usize) -> Result<Self> {
        if freq_hz.is_empty() {
            return domain("spectrum grid is empty");
        }
        if freq_hz.len() != psd.len() {
            return domain(format!(
                "grid has {} points but PSD has {}",
                freq_hz.len(),
                psd.len()
            ));
        }
        check_grid(&freq_hz)?;
        if let Some((i, v)) = psd.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= T::zero())) {
            return domain(format!("PSD value {v} at bin {i} is negative or not finite"));
        }
        if n_avg == 0 {
            return domain("averaging count must be at least 1");
        }
        Ok(Self {
            freq_hz,
            psd,
            unit,
            n_avg,
            seed: None,
            provenance: String::new(),
        })
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn freq_hz(&self) -> &[T] {
        &self.freq_hz
    }

    pub fn psd(&self) -> &[T] {
        &self.psd
    }

    pub fn unit(&self) -> PsdUnit {
        self.unit
    }

    pub fn n_avg(&self) -> usize {
        self.n_avg
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.freq_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq_hz.is_empty()
    }
}

fn check_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return domain("spectrum grid is empty");
    }
    if let Some(i) = grid.iter().position(|f| !f.is_finite()) {
        return domain(format!("grid point {i} is not finite"));
    }
    if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
        return domain(format!("grid is not strictly increasing at index {}", i + 1));
    }
    Ok(())
}

/// `points` equally spaced frequencies spanning `span_hz` centred on `centre_hz`.
pub fn centered_grid<T: Real>(centre_hz: T, span_hz: T, points: usize) -> Result<Vec<T>> {
    if points < 2 {
        return domain("a grid needs at least two points");
    }
    if !(span_hz > T::zero()) {
        return domain(format!("span must be positive, got {span_hz}"));
    }
    let start = centre_hz - span_hz / T::lit(2.0);
    let step = span_hz / T::count(points - 1);
    let grid: Vec<T> = (0..points).map(|i| start + step * T::count(i)).collect();
    if !(grid[0] > T::zero()) {
        return domain("grid extends to non-positive frequency");
    }
    Ok(grid)
}

/// Displacement-detection imprecision that scales inversely with probe power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel<T> {
    /// Floor at the reference power, m²/Hz.
    pub imprecision_ref: T,
    /// Reference circulating power, W.
    pub p_ref: T,
}

impl<T: Real> NoiseModel<T> {
    pub fn new(imprecision_ref: T, p_ref: T) -> Result<Self> {
        if !(imprecision_ref > T::zero() && p_ref > T::zero()) {
            return domain("noise model reference floor and power must be positive");
        }
        Ok(Self { imprecision_ref, p_ref })
    }
}

impl<T: Real> Default for NoiseModel<T> {
    /// 1e-27 m²/Hz at 50 nW.
    fn default() -> Self {
        Self {
            imprecision_ref: T::lit(1e-27),
            p_ref: T::lit(50e-9),
        }
    }
}

/// Mechanical compliance `1 / (m (ω_m² − ω² − iγ_m ω))`, m/N.
pub fn mechanical_susceptibility<T: Real>(omega: T, mech: &MechanicalParams<T>, gamma_m: T) -> Complex<T> {
    let re = mech.omega_m * mech.omega_m - omega * omega;
    let im = -gamma_m * omega;
    Complex::new(re, im).scale(mech.mass).inv()
}

/// One-sided thermal displacement PSD, m²/Hz:
/// `(4 k_B T γ_m / m) / ((ω_m² − ω²)² + γ_m² ω²)`.
pub fn displacement_psd<T: Real>(
    omega: T,
    temperature: T,
    gamma_m: T,
    mech: &MechanicalParams<T>,
    c: &PhysicalConstants<T>,
) -> Result<T> {
    if !(gamma_m > T::zero()) {
        return domain(format!("damping must be positive, got {gamma_m}"));
    }
    if !(temperature >= T::zero()) {
        return domain(format!("temperature must be non-negative, got {temperature}"));
    }
    let detune = mech.omega_m * mech.omega_m - omega * omega;
    let denom = detune * detune + gamma_m * gamma_m * omega * omega;
    Ok(T::lit(4.0) * c.k_b() * temperature * gamma_m / mech.mass / denom)
}

/// Cavity frequency-fluctuation PSD, Hz²/Hz: `(g/2π)² S_x(ω)`.
pub fn cavity_frequency_psd<T: Real>(
    omega: T,
    temperature: T,
    gamma_m: T,
    mech: &MechanicalParams<T>,
    g: T,
    c: &PhysicalConstants<T>,
) -> Result<T> {
    let pull = g / T::two_pi();
    Ok(pull * pull * displacement_psd(omega, temperature, gamma_m, mech, c)?)
}

/// Equipartition variance `k_B T / (m ω_m²)`, m².
pub fn mean_square_displacement<T: Real>(temperature: T, mech: &MechanicalParams<T>, c: &PhysicalConstants<T>) -> Result<T> {
    if !(temperature >= T::zero()) {
        return domain(format!("temperature must be non-negative, got {temperature}"));
    }
    Ok(c.k_b() * temperature / (mech.mass * mech.omega_m * mech.omega_m))
}

/// Variance of the cavity resonance frequency, Hz²: `(g/2π)² <x²>`.
pub fn mean_square_frequency<T: Real>(
    temperature: T,
    mech: &MechanicalParams<T>,
    g: T,
    c: &PhysicalConstants<T>,
) -> Result<T> {
    let pull = g / T::two_pi();
    Ok(pull * pull * mean_square_displacement(temperature, mech, c)?)
}

/// Imprecision floor at circulating power `p_c`: `imprecision_ref · P_ref / P_c`.
pub fn imprecision_floor<T: Real>(p_c: T, noise: &NoiseModel<T>) -> Result<T> {
    if !(p_c > T::zero()) {
        return domain(format!("circulating power must be positive, got {p_c}"));
    }
    Ok(noise.imprecision_ref * noise.p_ref / p_c)
}

/// Expected PSD of a thermally driven mode on top of a white floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalPeakModel<T> {
    pub mechanics: MechanicalParams<T>,
    /// Total linewidth, rad/s.
    pub gamma_m: T,
    /// Mode temperature, K.
    pub temperature: T,
    /// White background in the trace's unit.
    pub floor: T,
    pub unit: PsdUnit,
    /// Coupling, rad/s/m; only used for [`PsdUnit::CavityFrequency`].
    pub g: T,
    pub constants: PhysicalConstants<T>,
}

impl<T: Real> ThermalPeakModel<T> {
    pub fn displacement(mechanics: MechanicalParams<T>, gamma_m: T, temperature: T, floor: T) -> Self {
        Self {
            mechanics,
            gamma_m,
            temperature,
            floor,
            unit: PsdUnit::Displacement,
            g: T::zero(),
            constants: PhysicalConstants::si(),
        }
    }

    pub fn psd_at_hz(&self, f_hz: T) -> Result<T> {
        let omega = angular(f_hz);
        let peak = match self.unit {
            PsdUnit::Displacement => {
                displacement_psd(omega, self.temperature, self.gamma_m, &self.mechanics, &self.constants)?
            }
            PsdUnit::CavityFrequency => cavity_frequency_psd(
                omega,
                self.temperature,
                self.gamma_m,
                &self.mechanics,
                self.g,
                &self.constants,
            )?,
        };
        Ok(peak + self.floor)
    }

    /// Noise-free trace on `grid_hz`.
    pub fn expected_trace(&self, grid_hz: &[T], n_avg: usize) -> Result<SpectrumTrace<T>> {
        check_grid(grid_hz)?;
        let psd = grid_hz.iter().map(|&f| self.psd_at_hz(f)).collect::<Result<Vec<_>>>()?;
        SpectrumTrace::new(grid_hz.to_vec(), psd, self.unit, n_avg)
    }
}

/// Synthesises an averaged periodogram: every bin is the expected PSD times
/// an independent `χ²(2·n_avg) / (2·n_avg)` draw, so the mean is unbiased and
/// the relative spread is `1/√n_avg`. Identical inputs give bit-identical
/// traces.
pub fn synth_spectrum<T: Real>(
    model: &ThermalPeakModel<T>,
    grid_hz: &[T],
    n_avg: usize,
    seed: u64,
) -> Result<SpectrumTrace<T>> {
    if n_avg == 0 {
        return domain("averaging count must be at least 1");
    }
    let expected = model.expected_trace(grid_hz, n_avg)?;
    let dof = 2.0 * n_avg as f64;
    let chi = ChiSquared::new(dof).map_err(|e| crate::error::Error::Domain(e.to_string()))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let psd = expected
        .psd()
        .iter()
        .map(|&mean| mean * T::lit(chi.sample(&mut rng) / dof))
        .collect();
    let provenance = format!(
        "rng={RNG_ALGORITHM}; seed={seed}; dist=chi_squared(2*n_avg)/(2*n_avg); T_m={:e} K; gamma_m={:e} rad/s; floor={:e} {}",
        model.temperature.as_f64(),
        model.gamma_m.as_f64(),
        model.floor.as_f64(),
        model.unit.symbol()
    );
    Ok(SpectrumTrace::new(grid_hz.to_vec(), psd, model.unit, n_avg)?
        .with_seed(Some(seed))
        .with_provenance(provenance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::SystemParams;

    fn device() -> SystemParams<f64> {
        SystemParams::paper_device()
    }

    #[test]
    fn susceptibility_identities() {
        let mech = device().mechanics;
        let g = mech.gamma_m0;
        let dc = mechanical_susceptibility(0.0, &mech, g);
        assert!((dc.re - 1.0 / (mech.mass * mech.omega_m.powi(2))).abs() / dc.re < 1e-14);
        assert_eq!(dc.im, 0.0);
        let res = mechanical_susceptibility(mech.omega_m, &mech, g).norm();
        let expect = 1.0 / (mech.mass * mech.omega_m * g);
        assert!((res - expect).abs() / expect < 1e-12);
    }

    #[test]
    fn psd_peak_and_linearity() {
        let p = device();
        let mech = p.mechanics;
        let c = p.constants;
        let g = mech.gamma_m0;
        let peak = displacement_psd(mech.omega_m, 0.05, g, &mech, &c).unwrap();
        let expect = 4.0 * c.k_b() * 0.05 / (mech.mass * g * mech.omega_m.powi(2));
        assert!((peak - expect).abs() / expect < 1e-12);
        for w in [0.3, 0.999, 1.0, 1.001, 2.0].map(|x| x * mech.omega_m) {
            let a = displacement_psd(w, 0.05, g, &mech, &c).unwrap();
            let b = displacement_psd(w, 0.10, g, &mech, &c).unwrap();
            assert!((b - 2.0 * a).abs() <= 1e-15 * b);
        }
        assert!(displacement_psd(mech.omega_m, 0.05, 0.0, &mech, &c).is_err());
    }

    #[test]
    fn cavity_psd_ratio_and_rms() {
        let p = device();
        let (mech, c, g) = (p.mechanics, p.constants, p.coupling.g);
        for w in [0.5, 1.0, 1.5].map(|x| x * mech.omega_m) {
            let sx = displacement_psd(w, 0.05, mech.gamma_m0, &mech, &c).unwrap();
            let sf = cavity_frequency_psd(w, 0.05, mech.gamma_m0, &mech, g, &c).unwrap();
            assert!(((sf / sx) / (g / std::f64::consts::TAU).powi(2) - 1.0).abs() < 1e-15);
            assert_eq!(cavity_frequency_psd(w, 0.05, mech.gamma_m0, &mech, 0.0, &c).unwrap(), 0.0);
        }
        let rms = mean_square_frequency(0.05, &mech, g, &c).unwrap().sqrt();
        assert!((rms - 7.047_921_539_879_799).abs() < 1e-9, "{rms}");
    }

    #[test]
    fn equipartition_variance() {
        let p = device();
        let x2 = mean_square_displacement(0.05, &p.mechanics, &p.constants).unwrap();
        assert!((x2 - 1.212_724_561_335_489e-24).abs() / x2 < 1e-12);
        assert_eq!(mean_square_displacement(0.0, &p.mechanics, &p.constants).unwrap(), 0.0);
    }

    #[test]
    fn floor_scaling() {
        let noise = NoiseModel::<f64>::new(2e-27, 1e-7).unwrap();
        assert_eq!(imprecision_floor(1e-7, &noise).unwrap(), 2e-27);
        assert!((imprecision_floor(1e-6, &noise).unwrap() - 2e-28).abs() < 1e-40);
        assert!(imprecision_floor(0.0, &noise).is_err());
        let powers = [46e-12, 1e-9, 1e-8, 1e-7, 1e-6, 7.3e-6];
        let floors: Vec<f64> = powers.iter().map(|&p| imprecision_floor(p, &noise).unwrap()).collect();
        assert!(floors.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn synthesis_is_deterministic_and_validated() {
        let p = device();
        let model = ThermalPeakModel::displacement(p.mechanics, p.mechanics.gamma_m0, 0.05, 1e-27);
        let grid = centered_grid(1.525e6, 100.0, 201).unwrap();
        let a = synth_spectrum(&model, &grid, 10, 7).unwrap();
        let b = synth_spectrum(&model, &grid, 10, 7).unwrap();
        let c = synth_spectrum(&model, &grid, 10, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.psd(), c.psd());
        assert_eq!(a.seed(), Some(7));
        assert!(a.provenance.contains(RNG_ALGORITHM));
        assert!(synth_spectrum(&model, &[], 10, 7).is_err());
        assert!(synth_spectrum(&model, &grid, 0, 7).is_err());
        assert!(synth_spectrum(&model, &[2.0, 1.0], 1, 7).is_err());
    }

    #[test]
    fn trace_validation() {
        assert!(SpectrumTrace::new(vec![1.0, 2.0], vec![1.0], PsdUnit::Displacement, 1).is_err());
        assert!(SpectrumTrace::new(vec![1.0, 2.0], vec![1.0, -1.0], PsdUnit::Displacement, 1).is_err());
        assert!(SpectrumTrace::new(vec![1.0, 1.0], vec![1.0, 1.0], PsdUnit::Displacement, 1).is_err());
        assert!(SpectrumTrace::<f64>::new(vec![], vec![], PsdUnit::Displacement, 1).is_err());
    }
}
