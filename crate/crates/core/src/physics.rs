//! Closed-form cavity optomechanics: zero-point motion, photon number and
//! power conversions, radiation-pressure damping and spring shift, bath
//! mixing, and thermal occupancy.
//!
//! Every frequency in this module is angular (rad/s). Conversion from Hz
//! happens at the configuration boundary.

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Reduced Planck constant and Boltzmann constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants<T> {
    hbar: T,
    k_b: T,
}

impl<T: Real> PhysicalConstants<T> {
    pub const HBAR_SI: f64 = 1.054571817e-34;
    pub const K_B_SI: f64 = 1.380649e-23;

    /// SI values (CODATA 2018, exact for k_B).
    pub fn si() -> Self {
        Self {
            hbar: T::lit(Self::HBAR_SI),
            k_b: T::lit(Self::K_B_SI),
        }
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn k_b(&self) -> T {
        self.k_b
    }
}

impl<T: Real> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self::si()
    }
}

fn require_positive<T: Real>(name: &str, value: T) -> Result<()> {
    if value.is_finite() && value > T::zero() {
        Ok(())
    } else {
        domain(format!("{name} must be positive and finite, got {value}"))
    }
}

fn require_non_negative<T: Real>(name: &str, value: T) -> Result<()> {
    if value.is_finite() && value >= T::zero() {
        Ok(())
    } else {
        domain(format!("{name} must be non-negative and finite, got {value}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams<T> {
    /// Resonance, rad/s.
    pub omega_c: T,
    /// Energy decay rate (full linewidth), rad/s.
    pub kappa: T,
}

impl<T: Real> CavityParams<T> {
    pub fn new(omega_c: T, kappa: T) -> Result<Self> {
        require_positive("omega_c", omega_c)?;
        require_positive("kappa", kappa)?;
        if kappa >= omega_c {
            return domain(format!("kappa ({kappa}) must be below omega_c ({omega_c})"));
        }
        Ok(Self { omega_c, kappa })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicalParams<T> {
    /// Resonance, rad/s.
    pub omega_m: T,
    /// Intrinsic damping rate, rad/s.
    pub gamma_m0: T,
    /// Effective mass, kg.
    pub mass: T,
}

impl<T: Real> MechanicalParams<T> {
    pub fn new(omega_m: T, gamma_m0: T, mass: T) -> Result<Self> {
        require_positive("omega_m", omega_m)?;
        require_positive("gamma_m0", gamma_m0)?;
        require_positive("mass", mass)?;
        Ok(Self {
            omega_m,
            gamma_m0,
            mass,
        })
    }

    /// Intrinsic quality factor `omega_m / gamma_m0`.
    pub fn quality_factor(&self) -> T {
        self.omega_m / self.gamma_m0
    }
}

/// Cavity frequency pull per unit displacement, `d omega_c / dx` in rad/s/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams<T> {
    pub g: T,
}

impl<T: Real> CouplingParams<T> {
    pub fn new(g: T) -> Result<Self> {
        require_positive("g", g)?;
        Ok(Self { g })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalEnvironment<T> {
    /// Physical bath temperature, K.
    pub t0: T,
    /// Effective temperature of the radiation-pressure bath, K.
    pub tp: T,
}

impl<T: Real> ThermalEnvironment<T> {
    pub const DEFAULT_PHOTON_BATH_K: f64 = 10e-6;

    pub fn new(t0: T, tp: T) -> Result<Self> {
        require_non_negative("T_0", t0)?;
        require_non_negative("T_p", tp)?;
        Ok(Self { t0, tp })
    }

    pub fn with_default_photon_bath(t0: T) -> Result<Self> {
        Self::new(t0, T::lit(Self::DEFAULT_PHOTON_BATH_K))
    }
}

/// Everything needed to evaluate the backaction chain for one device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<T> {
    pub cavity: CavityParams<T>,
    pub mechanics: MechanicalParams<T>,
    pub coupling: CouplingParams<T>,
    pub environment: ThermalEnvironment<T>,
    pub constants: PhysicalConstants<T>,
}

impl<T: Real> SystemParams<T> {
    pub fn new(
        cavity: CavityParams<T>,
        mechanics: MechanicalParams<T>,
        coupling: CouplingParams<T>,
        environment: ThermalEnvironment<T>,
    ) -> Self {
        Self {
            cavity,
            mechanics,
            coupling,
            environment,
            constants: PhysicalConstants::si(),
        }
    }

    /// Device parameters of the aluminium CPW resonator with an embedded
    /// doubly clamped beam: 5.22 GHz cavity, 230 kHz linewidth, 1.525 MHz
    /// beam of 6.2e-15 kg, coupling 6.4 kHz/nm, Q_m = 3e5, 50 mK bath.
    pub fn paper_device() -> Self {
        let tau = T::two_pi();
        let omega_m = tau * T::lit(1.525e6);
        Self::new(
            CavityParams {
                omega_c: tau * T::lit(5.22e9),
                kappa: tau * T::lit(230e3),
            },
            MechanicalParams {
                omega_m,
                gamma_m0: omega_m / T::lit(3e5),
                mass: T::lit(6.2e-15),
            },
            CouplingParams {
                g: tau * T::lit(6.4e12),
            },
            ThermalEnvironment {
                t0: T::lit(0.050),
                tp: T::lit(ThermalEnvironment::<T>::DEFAULT_PHOTON_BATH_K),
            },
        )
    }

    pub fn zero_point_motion(&self) -> Result<T> {
        zero_point_motion(&self.mechanics, &self.constants)
    }

    /// `omega_m / kappa`.
    pub fn sideband_resolution(&self) -> Result<T> {
        sideband_resolution(self.mechanics.omega_m, self.cavity.kappa)
    }

    /// Backaction prefactor `B` at a given intracavity photon number.
    pub fn prefactor(&self, photons: T) -> Result<T> {
        backaction_prefactor(photons, self.coupling.g, self.zero_point_motion()?)
    }

    /// Full backaction evaluation for a drive.
    pub fn backaction(&self, drive: &DriveSettings<T>) -> Result<BackactionResult<T>> {
        let photons = drive.photon_number(&self.cavity, &self.constants)?;
        let b = self.prefactor(photons)?;
        self.backaction_with_prefactor(b, drive.detuning())
    }

    /// Backaction at an explicit prefactor and (effective) detuning.
    pub fn backaction_with_prefactor(&self, b: T, detuning: T) -> Result<BackactionResult<T>> {
        let kappa = self.cavity.kappa;
        let omega_m = self.mechanics.omega_m;
        let gamma = backaction_damping(b, kappa, omega_m, detuning)?;
        let omega = backaction_spring(b, kappa, omega_m, detuning)?;
        Ok(total_damping(&self.mechanics, gamma, omega))
    }
}

/// How the drive strength is specified. Only one representation is stored;
/// the others are derived on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerSpec<T> {
    /// Intracavity (circulating) power, W.
    Circulating(T),
    /// Power incident on the cavity, W.
    Incident(T),
    /// Mean intracavity photon number.
    PhotonNumber(T),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSettings<T> {
    omega_e: T,
    detuning: T,
    power: PowerSpec<T>,
}

impl<T: Real> DriveSettings<T> {
    /// Drive at `detuning = omega_e - omega_c` from the (low-power) cavity
    /// resonance.
    pub fn at_detuning(cavity: &CavityParams<T>, detuning: T, power: PowerSpec<T>) -> Result<Self> {
        let omega_e = cavity.omega_c + detuning;
        require_positive("omega_e", omega_e)?;
        match power {
            PowerSpec::Circulating(p) => require_non_negative("circulating power", p)?,
            PowerSpec::Incident(p) => require_non_negative("incident power", p)?,
            PowerSpec::PhotonNumber(n) => require_non_negative("photon number", n)?,
        }
        Ok(Self {
            omega_e,
            detuning,
            power,
        })
    }

    pub fn omega_e(&self) -> T {
        self.omega_e
    }

    pub fn detuning(&self) -> T {
        self.detuning
    }

    pub fn power_spec(&self) -> PowerSpec<T> {
        self.power
    }

    pub fn photon_number(&self, cavity: &CavityParams<T>, c: &PhysicalConstants<T>) -> Result<T> {
        match self.power {
            PowerSpec::PhotonNumber(n) => Ok(n),
            PowerSpec::Circulating(p) => photon_number_from_circulating(p, self.omega_e, c),
            PowerSpec::Incident(p) => {
                photon_number_from_incident(p, self.omega_e, self.detuning, cavity.kappa, c)
            }
        }
    }

    pub fn circulating_power(&self, cavity: &CavityParams<T>, c: &PhysicalConstants<T>) -> Result<T> {
        match self.power {
            PowerSpec::Circulating(p) => Ok(p),
            _ => circulating_power(self.photon_number(cavity, c)?, self.omega_e, c),
        }
    }

    pub fn incident_power(&self, cavity: &CavityParams<T>, c: &PhysicalConstants<T>) -> Result<T> {
        match self.power {
            PowerSpec::Incident(p) => Ok(p),
            _ => incident_power(
                self.photon_number(cavity, c)?,
                self.omega_e,
                self.detuning,
                cavity.kappa,
                c,
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackactionResult<T> {
    /// Radiation-pressure damping, rad/s.
    pub gamma: T,
    /// Radiation-pressure frequency shift, rad/s.
    pub omega: T,
    /// `gamma_m0 + gamma`, rad/s.
    pub gamma_m_total: T,
    /// Set iff `gamma_m_total < 0`.
    pub regenerative: bool,
}

/// Ground-state displacement scale `sqrt(hbar / (2 m omega_m))`, in m.
pub fn zero_point_motion<T: Real>(mech: &MechanicalParams<T>, c: &PhysicalConstants<T>) -> Result<T> {
    require_positive("mass", mech.mass)?;
    require_positive("omega_m", mech.omega_m)?;
    Ok((c.hbar / (T::lit(2.0) * mech.mass * mech.omega_m)).sqrt())
}

/// `n = P_c / (hbar omega_e^2)`.
pub fn photon_number_from_circulating<T: Real>(
    circulating: T,
    omega_e: T,
    c: &PhysicalConstants<T>,
) -> Result<T> {
    require_non_negative("circulating power", circulating)?;
    require_positive("omega_e", omega_e)?;
    Ok(circulating / (c.hbar * omega_e * omega_e))
}

/// `P_c = hbar omega_e^2 n`.
pub fn circulating_power<T: Real>(photons: T, omega_e: T, c: &PhysicalConstants<T>) -> Result<T> {
    require_non_negative("photon number", photons)?;
    require_positive("omega_e", omega_e)?;
    Ok(c.hbar * omega_e * omega_e * photons)
}

/// Incident power of an overcoupled cavity, `hbar omega_e n (kappa^2 + 4 detuning^2) / kappa`.
pub fn incident_power<T: Real>(
    photons: T,
    omega_e: T,
    detuning: T,
    kappa: T,
    c: &PhysicalConstants<T>,
) -> Result<T> {
    require_non_negative("photon number", photons)?;
    require_positive("kappa", kappa)?;
    require_positive("omega_e", omega_e)?;
    let lorentz = kappa * kappa + T::lit(4.0) * detuning * detuning;
    Ok(c.hbar * omega_e * photons * lorentz / kappa)
}

/// Inverse of [`incident_power`].
pub fn photon_number_from_incident<T: Real>(
    incident: T,
    omega_e: T,
    detuning: T,
    kappa: T,
    c: &PhysicalConstants<T>,
) -> Result<T> {
    require_non_negative("incident power", incident)?;
    require_positive("kappa", kappa)?;
    require_positive("omega_e", omega_e)?;
    let lorentz = kappa * kappa + T::lit(4.0) * detuning * detuning;
    Ok(incident * kappa / (c.hbar * omega_e * lorentz))
}

/// `B = 4 n (g x_zp)^2`, in (rad/s)^2.
pub fn backaction_prefactor<T: Real>(photons: T, g: T, x_zp: T) -> Result<T> {
    require_non_negative("photon number", photons)?;
    require_non_negative("g", g)?;
    require_non_negative("x_zp", x_zp)?;
    let gx = g * x_zp;
    Ok(T::lit(4.0) * photons * gx * gx)
}

fn check_rates<T: Real>(kappa: T, omega_m: T) -> Result<()> {
    require_positive("kappa", kappa)?;
    require_positive("omega_m", omega_m)
}

/// Radiation-pressure damping:
/// `B [kappa/(kappa^2 + 4(D+w_m)^2) - kappa/(kappa^2 + 4(D-w_m)^2)]`.
pub fn backaction_damping<T: Real>(b: T, kappa: T, omega_m: T, detuning: T) -> Result<T> {
    check_rates(kappa, omega_m)?;
    let four = T::lit(4.0);
    let k2 = kappa * kappa;
    let plus = detuning + omega_m;
    let minus = detuning - omega_m;
    Ok(b * (kappa / (k2 + four * plus * plus) - kappa / (k2 + four * minus * minus)))
}

/// Radiation-pressure spring shift:
/// `B [(D+w_m)/(kappa^2 + 4(D+w_m)^2) + (D-w_m)/(kappa^2 + 4(D-w_m)^2)]`.
pub fn backaction_spring<T: Real>(b: T, kappa: T, omega_m: T, detuning: T) -> Result<T> {
    check_rates(kappa, omega_m)?;
    let four = T::lit(4.0);
    let k2 = kappa * kappa;
    let plus = detuning + omega_m;
    let minus = detuning - omega_m;
    Ok(b * (plus / (k2 + four * plus * plus) + minus / (k2 + four * minus * minus)))
}

pub fn total_damping<T: Real>(mech: &MechanicalParams<T>, gamma: T, omega: T) -> BackactionResult<T> {
    let gamma_m_total = mech.gamma_m0 + gamma;
    BackactionResult {
        gamma,
        omega,
        gamma_m_total,
        regenerative: gamma_m_total < T::zero(),
    }
}

/// Mode temperature when coupled to the physical bath (rate `gamma_m0`) and
/// to the radiation bath (rate `gamma`): `(gamma_m0 T_0 + gamma T_p) / (gamma_m0 + gamma)`.
pub fn effective_temperature<T: Real>(gamma_m0: T, t0: T, gamma: T, tp: T) -> Result<T> {
    require_non_negative("T_0", t0)?;
    require_non_negative("T_p", tp)?;
    let total = gamma_m0 + gamma;
    if !(total > T::zero()) {
        return Err(Error::Regenerative {
            gamma_m: total.as_f64(),
        });
    }
    Ok((gamma_m0 * t0 + gamma * tp) / total)
}

/// Bose-Einstein occupancy `1 / (exp(hbar omega_m / k_B T) - 1)`.
pub fn phonon_occupancy<T: Real>(temperature: T, omega_m: T, c: &PhysicalConstants<T>) -> Result<T> {
    require_non_negative("temperature", temperature)?;
    require_positive("omega_m", omega_m)?;
    if temperature == T::zero() {
        return Ok(T::zero());
    }
    let x = c.hbar * omega_m / (c.k_b * temperature);
    Ok(x.exp_m1().recip())
}

/// Inverse of [`phonon_occupancy`].
pub fn occupancy_temperature<T: Real>(occupancy: T, omega_m: T, c: &PhysicalConstants<T>) -> Result<T> {
    require_non_negative("occupancy", occupancy)?;
    require_positive("omega_m", omega_m)?;
    if occupancy == T::zero() {
        return Ok(T::zero());
    }
    Ok(c.hbar * omega_m / (c.k_b * occupancy.recip().ln_1p()))
}

/// `omega_m / kappa`; above one the mechanical sidebands are resolved.
pub fn sideband_resolution<T: Real>(omega_m: T, kappa: T) -> Result<T> {
    require_positive("kappa", kappa)?;
    Ok(omega_m / kappa)
}
