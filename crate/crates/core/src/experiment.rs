//! Virtual experiments: detuning sweeps at constant circulating or incident
//! power, a Kerr-nonlinear cavity, optimal cooling detuning and power-sweep
//! cooling curves with optional parasitic heating.

use crate::error::{domain, Error, Result};
use crate::estimation::SweepPoint;
use crate::numerics::golden::grid_then_golden_max;
use crate::physics::{
    backaction_damping, backaction_prefactor, backaction_spring, effective_temperature,
    phonon_occupancy, photon_number_from_circulating, photon_number_from_incident, total_damping,
    CavityParams, PhysicalConstants, PowerSpec, SystemParams,
};
use crate::scalar::Real;
use crate::spectra::{imprecision_floor, NoiseModel};

/// Minimum number of coarse grid points over `[-3 omega_m, 0)` when searching
/// for the optimal detuning.
pub const OPTIMAL_DETUNING_GRID: usize = 400;

/// Golden-section tolerance, as a fraction of the cavity linewidth.
pub const OPTIMAL_DETUNING_TOL: f64 = 1e-3;

/// Cavity whose resonance is pulled down by `k` per intracavity photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrCavity<T> {
    /// Pull per photon, rad/s.
    pub k: T,
    pub base: CavityParams<T>,
}

impl<T: Real> KerrCavity<T> {
    pub fn new(k: T, base: CavityParams<T>) -> Result<Self> {
        if !(k >= T::zero() && k.is_finite()) {
            return domain(format!("Kerr coefficient must be non-negative, got {k}"));
        }
        Ok(Self { k, base })
    }

    pub fn linear(base: CavityParams<T>) -> Self {
        Self { k: T::zero(), base }
    }

    /// Pull per photon such that 1 µW of circulating power shifts the
    /// resonance by one linewidth.
    pub fn default_for(base: CavityParams<T>, c: &PhysicalConstants<T>) -> Self {
        let n = photon_number_from_circulating(T::lit(1e-6), base.omega_c, c)
            .expect("positive cavity frequency");
        Self { k: base.kappa / n, base }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrSolution<T> {
    pub photons: T,
    /// Three steady states coexist at this drive.
    pub multistable: bool,
}

/// Intracavity photon number of a Kerr cavity driven with incident power
/// `p_i` at `detuning` from the low-power resonance.
///
/// Solves `n (κ² + 4(Δ + K n)²) = P_i κ / (ħ ω_e)`. With three positive roots
/// the smallest is returned, which is the branch reached by ramping the
/// power up from zero.
pub fn solve_kerr_occupation<T: Real>(
    p_i: T,
    detuning: T,
    kerr: &KerrCavity<T>,
    c: &PhysicalConstants<T>,
) -> Result<KerrSolution<T>> {
    let kappa = kerr.base.kappa;
    let omega_e = kerr.base.omega_c + detuning;
    let linear = photon_number_from_incident(p_i, omega_e, detuning, kappa, c)?;
    if kerr.k == T::zero() || p_i == T::zero() {
        return Ok(KerrSolution {
            photons: linear,
            multistable: false,
        });
    }
    let drive = p_i * kappa / (c.hbar() * omega_e);
    let (k, d) = (kerr.k, detuning);
    let four = T::lit(4.0);
    let f = |n: T| {
        let e = d + k * n;
        n * (kappa * kappa + four * e * e) - drive
    };

    // f' = 12 K² n² + 16 K Δ n + κ² + 4Δ² has positive roots only for Δ < 0.
    let qa = T::lit(12.0) * k * k;
    let qb = T::lit(16.0) * k * d;
    let qc = kappa * kappa + four * d * d;
    let disc = qb * qb - four * qa * qc;
    let mut lo = T::zero();
    let mut hi;
    let mut multistable = false;
    if d < T::zero() && disc > T::zero() {
        let sq = disc.sqrt();
        // numerically stable pair of roots
        let q = -(qb - sq) / T::lit(2.0);
        let n_max = qc / q;
        let n_min = q / qa;
        let f_max = f(n_max);
        let f_min = f(n_min);
        multistable = f_max > T::zero() && f_min < T::zero();
        if f_max >= T::zero() {
            hi = n_max;
        } else {
            lo = n_min;
            hi = n_min.max(linear);
        }
    } else {
        hi = linear.max(T::min_positive_value());
    }
    let mut guard = 0;
    while f(hi) < T::zero() {
        lo = hi;
        hi = hi * T::lit(2.0) + T::min_positive_value();
        guard += 1;
        if guard > 2000 {
            return domain("failed to bracket Kerr photon number");
        }
    }
    let photons = bisect(f, lo, hi);
    Ok(KerrSolution { photons, multistable })
}

/// Root of a function with `f(lo) <= 0 <= f(hi)`, to full precision.
fn bisect<T: Real, F: Fn(T) -> T>(f: F, mut lo: T, mut hi: T) -> T {
    for _ in 0..2000 {
        let mid = lo + (hi - lo) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f(hi).abs() < f(lo).abs() {
        hi
    } else {
        lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    ConstCirculating,
    ConstIncident,
}

/// One detuning of a sweep. Frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<T> {
    pub detuning: T,
    pub photons: T,
    pub gamma: T,
    pub omega: T,
    pub gamma_m: T,
    /// Mode temperature; absent for regenerative rows.
    pub t_m: Option<T>,
    /// Phonon occupancy; absent for regenerative rows.
    pub occupancy: Option<T>,
    pub regenerative: bool,
    pub multistable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    pub mode: SweepMode,
    /// Circulating power (W) for [`SweepMode::ConstCirculating`], incident
    /// power otherwise.
    pub power: T,
    /// Kerr pull per photon, rad/s.
    pub kerr: T,
    pub rows: Vec<SweepRow<T>>,
}

impl<T: Real> SweepResult<T> {
    /// Detuning, damping and frequency shift of every row, as fit input.
    pub fn points(&self) -> Vec<SweepPoint<T>> {
        self.rows
            .iter()
            .map(|r| SweepPoint {
                detuning: r.detuning,
                gamma_m: r.gamma_m,
                freq_shift: r.omega,
            })
            .collect()
    }
}

fn check_detuning_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return domain("detuning grid is empty");
    }
    if grid.iter().any(|d| !d.is_finite()) {
        return domain("detuning grid contains non-finite values");
    }
    let increasing = grid.windows(2).all(|w| w[1] > w[0]);
    let decreasing = grid.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return domain("detuning grid must be strictly monotone");
    }
    Ok(())
}

/// Backaction chain at a photon number and effective detuning.
fn row_at<T: Real>(params: &SystemParams<T>, detuning: T, effective: T, photons: T, multistable: bool) -> Result<SweepRow<T>> {
    let b = backaction_prefactor(photons, params.coupling.g, params.zero_point_motion()?)?;
    let (k, wm) = (params.cavity.kappa, params.mechanics.omega_m);
    let gamma = backaction_damping(b, k, wm, effective)?;
    let omega = backaction_spring(b, k, wm, effective)?;
    let total = total_damping(&params.mechanics, gamma, omega);
    let env = params.environment;
    let (t_m, occupancy) = if total.regenerative || total.gamma_m_total == T::zero() {
        (None, None)
    } else {
        let t = effective_temperature(params.mechanics.gamma_m0, env.t0, gamma, env.tp)?;
        (Some(t), Some(phonon_occupancy(t, wm, &params.constants)?))
    };
    Ok(SweepRow {
        detuning,
        photons,
        gamma,
        omega,
        gamma_m: total.gamma_m_total,
        t_m,
        occupancy,
        regenerative: total.regenerative,
        multistable,
    })
}

/// Detuning sweep holding the circulating power fixed.
pub fn sweep_constant_circulating<T: Real>(p_c: T, detunings: &[T], params: &SystemParams<T>) -> Result<SweepResult<T>> {
    if !(p_c > T::zero()) {
        return domain(format!("circulating power must be positive, got {p_c}"));
    }
    check_detuning_grid(detunings)?;
    let rows = detunings
        .iter()
        .map(|&d| {
            let n = photon_number_from_circulating(p_c, params.cavity.omega_c + d, &params.constants)?;
            row_at(params, d, d, n, false)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        mode: SweepMode::ConstCirculating,
        power: p_c,
        kerr: T::zero(),
        rows,
    })
}

/// Detuning sweep holding the incident power fixed. Detunings are measured
/// from the low-power resonance; the backaction sees the Kerr-shifted
/// detuning `Δ + K n`.
pub fn sweep_constant_incident<T: Real>(
    p_i: T,
    detunings: &[T],
    kerr: &KerrCavity<T>,
    params: &SystemParams<T>,
) -> Result<SweepResult<T>> {
    if !(p_i > T::zero()) {
        return domain(format!("incident power must be positive, got {p_i}"));
    }
    check_detuning_grid(detunings)?;
    let rows = detunings
        .iter()
        .map(|&d| {
            let sol = solve_kerr_occupation(p_i, d, kerr, &params.constants)?;
            row_at(params, d, d + kerr.k * sol.photons, sol.photons, sol.multistable)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        mode: SweepMode::ConstIncident,
        power: p_i,
        kerr: kerr.k,
        rows,
    })
}

/// Radiation damping at `detuning` for a power specification, including the
/// Kerr pull when a nonlinear cavity is given.
pub fn damping_at<T: Real>(
    power: PowerSpec<T>,
    detuning: T,
    params: &SystemParams<T>,
    kerr: Option<&KerrCavity<T>>,
) -> Result<T> {
    let c = &params.constants;
    let omega_e = params.cavity.omega_c + detuning;
    let k = kerr.map_or(T::zero(), |k| k.k);
    let photons = match power {
        PowerSpec::Circulating(p) => photon_number_from_circulating(p, omega_e, c)?,
        PowerSpec::PhotonNumber(n) => n,
        PowerSpec::Incident(p) => match kerr {
            Some(kc) => solve_kerr_occupation(p, detuning, kc, c)?.photons,
            None => photon_number_from_incident(p, omega_e, detuning, params.cavity.kappa, c)?,
        },
    };
    let b = backaction_prefactor(photons, params.coupling.g, params.zero_point_motion()?)?;
    backaction_damping(b, params.cavity.kappa, params.mechanics.omega_m, detuning + k * photons)
}

/// Red detuning that maximises the total damping: a coarse scan followed by
/// golden-section refinement to `1e-3 κ`.
///
/// The scan covers `[-3 ω_m, 0)`, extended downward by the largest expected
/// Kerr pull so that the shifted sideband stays inside the window.
pub fn find_optimal_detuning<T: Real>(
    power: PowerSpec<T>,
    params: &SystemParams<T>,
    kerr: Option<&KerrCavity<T>>,
) -> Result<T> {
    let wm = params.mechanics.omega_m;
    let kappa = params.cavity.kappa;
    let c = &params.constants;
    let three = T::lit(3.0);
    let pull = match kerr {
        Some(kc) if kc.k > T::zero() => {
            let omega_e = params.cavity.omega_c - wm;
            let n = match power {
                PowerSpec::Circulating(p) => photon_number_from_circulating(p, omega_e, c)?,
                PowerSpec::PhotonNumber(n) => n,
                PowerSpec::Incident(p) => photon_number_from_incident(p, omega_e, -wm, kappa, c)?,
            };
            kc.k * n
        }
        _ => T::zero(),
    };
    let lo = -(three * wm + pull);
    let points = ((-lo / (three * wm)).as_f64() * OPTIMAL_DETUNING_GRID as f64).ceil() as usize;
    let points = points.max(OPTIMAL_DETUNING_GRID);
    let mut failure = None;
    let objective = |d: T| match damping_at(power, d, params, kerr) {
        Ok(g) => g,
        Err(e) => {
            failure.get_or_insert(e);
            T::neg_infinity()
        }
    };
    let best = grid_then_golden_max(objective, lo, T::zero(), points, T::lit(OPTIMAL_DETUNING_TOL) * kappa);
    match failure {
        Some(e) => Err(e),
        None => Ok(best),
    }
}

/// Phenomenological heating of the mechanical environment by the microwave
/// drive: `T_0' = T_0 + α P^β` and `γ_m0' = γ_m0 (1 + η (T_0' − T_0))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingModel<T> {
    /// K per W^β.
    pub alpha: T,
    pub beta: T,
    /// Fractional increase of intrinsic damping per K of heating.
    pub eta: T,
    pub enabled: bool,
}

impl<T: Real> HeatingModel<T> {
    pub fn disabled() -> Self {
        Self {
            alpha: T::zero(),
            beta: T::one(),
            eta: T::zero(),
            enabled: false,
        }
    }

    pub fn new(alpha: T, beta: T, eta: T, enabled: bool) -> Result<Self> {
        if !(alpha >= T::zero() && beta > T::zero() && eta >= T::zero()) {
            return domain("heating model needs alpha >= 0, beta > 0, eta >= 0");
        }
        Ok(Self {
            alpha,
            beta,
            eta,
            enabled,
        })
    }

    /// Heated bath temperature and intrinsic damping at circulating power `p_c`.
    pub fn apply(&self, p_c: T, t0: T, gamma_m0: T) -> (T, T) {
        if !self.enabled {
            return (t0, gamma_m0);
        }
        let rise = self.alpha * p_c.powf(self.beta);
        (t0 + rise, gamma_m0 * (T::one() + self.eta * rise))
    }
}

impl<T: Real> Default for HeatingModel<T> {
    fn default() -> Self {
        Self::disabled()
    }
}

/// One power of a cooling curve. Frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoolingRow<T> {
    pub p_c: T,
    pub detuning: T,
    pub gamma: T,
    pub gamma_m: T,
    pub gamma_m0: T,
    pub t0: T,
    pub t_m: T,
    pub occupancy: T,
    pub floor: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoolingResult<T> {
    pub rows: Vec<CoolingRow<T>>,
}

/// Cooling at each circulating power with the drive parked at the optimal
/// red detuning.
pub fn cooling_curve<T: Real>(
    powers: &[T],
    params: &SystemParams<T>,
    heating: &HeatingModel<T>,
    noise: &NoiseModel<T>,
) -> Result<CoolingResult<T>> {
    if powers.is_empty() {
        return domain("no powers given");
    }
    if powers.iter().any(|p| !(*p > T::zero() && p.is_finite())) {
        return domain("powers must be positive and finite");
    }
    if !powers.windows(2).all(|w| w[1] > w[0]) {
        return domain("powers must be strictly increasing");
    }
    let env = params.environment;
    let rows = powers
        .iter()
        .map(|&p_c| {
            let spec = PowerSpec::Circulating(p_c);
            let detuning = find_optimal_detuning(spec, params, None)?;
            let gamma = damping_at(spec, detuning, params, None)?;
            let (t0, gamma_m0) = heating.apply(p_c, env.t0, params.mechanics.gamma_m0);
            let gamma_m = gamma_m0 + gamma;
            if !(gamma_m > T::zero()) {
                return Err(Error::Regenerative {
                    gamma_m: gamma_m.as_f64(),
                });
            }
            let t_m = effective_temperature(gamma_m0, t0, gamma, env.tp)?;
            Ok(CoolingRow {
                p_c,
                detuning,
                gamma,
                gamma_m,
                gamma_m0,
                t0,
                t_m,
                occupancy: phonon_occupancy(t_m, params.mechanics.omega_m, &params.constants)?,
                floor: imprecision_floor(p_c, noise)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoolingResult { rows })
}

/// Chooses `α` and `η` (for a given `β`) so that at circulating power
/// `p_top` the total damping is `damping_ratio · γ_m0` and the mode
/// temperature is `T_0 / cooling_ratio`.
///
/// Heating can only raise the mode temperature, so the targets are reachable
/// only when the radiation damping alone already cools below `T_0 /
/// cooling_ratio` but does not exceed the requested total damping.
pub fn fit_heating_to_ratios<T: Real>(
    p_top: T,
    params: &SystemParams<T>,
    damping_ratio: T,
    cooling_ratio: T,
    beta: T,
) -> Result<HeatingModel<T>> {
    if !(p_top > T::zero() && damping_ratio > T::one() && cooling_ratio > T::one() && beta > T::zero()) {
        return domain("need p_top > 0, ratios > 1 and beta > 0");
    }
    let spec = PowerSpec::Circulating(p_top);
    let detuning = find_optimal_detuning(spec, params, None)?;
    let gamma = damping_at(spec, detuning, params, None)?;
    let gm0 = params.mechanics.gamma_m0;
    let env = params.environment;
    let gamma_m = damping_ratio * gm0;
    let heated_gm0 = gamma_m - gamma;
    if !(heated_gm0 >= gm0) {
        return Err(Error::Infeasible(format!(
            "radiation damping {} rad/s already exceeds the target total damping {} rad/s less the intrinsic {}",
            gamma, gamma_m, gm0
        )));
    }
    let heated_t0 = (gamma_m * env.t0 / cooling_ratio - gamma * env.tp) / heated_gm0;
    let rise = heated_t0 - env.t0;
    if !(rise >= T::zero()) {
        return Err(Error::Infeasible(format!(
            "radiation damping {} rad/s is only {}x intrinsic; reaching {}x total damping needs an intrinsic \
             damping of {} rad/s, and with it a mode temperature of T_0/{} needs the bath cooled to {} K",
            gamma,
            gamma / gm0,
            damping_ratio,
            heated_gm0,
            cooling_ratio,
            heated_t0
        )));
    }
    let damping_rise = heated_gm0 / gm0 - T::one();
    if rise == T::zero() {
        if damping_rise == T::zero() {
            return HeatingModel::new(T::zero(), beta, T::zero(), true);
        }
        return Err(Error::Infeasible(
            "damping must rise without any heating".to_string(),
        ));
    }
    HeatingModel::new(rise / p_top.powf(beta), beta, damping_rise / rise, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::SystemParams;

    fn device() -> SystemParams<f64> {
        SystemParams::paper_device()
    }

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn circulating_sweep_shape() {
        let p = device();
        let wm = p.mechanics.omega_m;
        let g0 = p.mechanics.gamma_m0;
        let r = sweep_constant_circulating(900e-9, &[-wm, 0.0, wm], &p).unwrap();
        let red = r.rows[0].gamma_m / g0;
        assert!((1.8..2.2).contains(&red), "{red}");
        assert_eq!(r.rows[1].gamma, 0.0);
        // at Q_m = 3e5 the blue sideband nearly cancels the intrinsic damping
        assert!(r.rows[2].gamma_m < 0.02 * g0 && r.rows[2].gamma_m > 0.0);
    }

    #[test]
    fn circulating_sweep_regenerates_at_higher_q() {
        let mut p = device();
        p.mechanics.gamma_m0 = p.mechanics.omega_m / 3.5e5;
        let wm = p.mechanics.omega_m;
        let r = sweep_constant_circulating(900e-9, &grid(-2.0 * wm, 2.0 * wm, 801), &p).unwrap();
        let regen: Vec<_> = r.rows.iter().filter(|row| row.regenerative).collect();
        assert!(!regen.is_empty());
        assert!(regen.iter().all(|row| row.detuning > 0.0 && row.t_m.is_none() && row.occupancy.is_none()));
        assert!(regen.iter().all(|row| (row.detuning - wm).abs() < p.cavity.kappa));
    }

    #[test]
    fn uncoupled_sweep_is_flat() {
        let mut p = device();
        p.coupling.g = 0.0;
        let wm = p.mechanics.omega_m;
        let r = sweep_constant_circulating(900e-9, &grid(-2.0 * wm, 2.0 * wm, 41), &p).unwrap();
        for row in &r.rows {
            assert_eq!(row.gamma_m, p.mechanics.gamma_m0);
            assert_eq!(row.omega, 0.0);
            assert_eq!(row.t_m, Some(p.environment.t0));
        }
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let p = device();
        assert!(sweep_constant_circulating(1e-7, &[], &p).is_err());
        assert!(sweep_constant_circulating(1e-7, &[0.0, 1.0, 0.5], &p).is_err());
        assert!(sweep_constant_circulating(0.0, &[0.0, 1.0], &p).is_err());
        assert!(sweep_constant_circulating(1e-7, &[1.0, 0.0], &p).is_ok());
    }

    #[test]
    fn linear_kerr_matches_closed_form() {
        let p = device();
        let kerr = KerrCavity::linear(p.cavity);
        let wm = p.mechanics.omega_m;
        let sol = solve_kerr_occupation(1e-7, -wm, &kerr, &p.constants).unwrap();
        let lin = photon_number_from_incident(1e-7, p.cavity.omega_c - wm, -wm, p.cavity.kappa, &p.constants).unwrap();
        assert_eq!(sol.photons, lin);
        assert!(!sol.multistable);
        let kd = KerrCavity::default_for(p.cavity, &p.constants);
        assert_eq!(solve_kerr_occupation(0.0, -wm, &kd, &p.constants).unwrap().photons, 0.0);
    }

    #[test]
    fn kerr_root_satisfies_balance() {
        let p = device();
        let kerr = KerrCavity::default_for(p.cavity, &p.constants);
        let c = p.constants;
        let kappa = p.cavity.kappa;
        for &d in &[-3e7, -1e7, -3e6, -1e6, 0.0, 2e6] {
            for &pi in &[1e-9, 1e-8, 1e-7] {
                let sol = solve_kerr_occupation(pi, d, &kerr, &c).unwrap();
                let we = p.cavity.omega_c + d;
                let e = d + kerr.k * sol.photons;
                let lhs = sol.photons * (kappa * kappa + 4.0 * e * e);
                let rhs = pi * kappa / (c.hbar() * we);
                assert!((lhs / rhs - 1.0).abs() < 1e-10, "d={d} p={pi}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn optimal_detuning_linear_cavity() {
        let p = device();
        let wm = p.mechanics.omega_m;
        let d1 = find_optimal_detuning(PowerSpec::Circulating(1e-6), &p, None).unwrap();
        assert!((d1 + wm).abs() < p.cavity.kappa / 2.0);
        let d2 = find_optimal_detuning(PowerSpec::Circulating(2e-6), &p, None).unwrap();
        assert!((d1 - d2).abs() < 1e-3 * p.cavity.kappa);
    }

    #[test]
    fn heating_disabled_is_identity() {
        let h = HeatingModel::<f64>::disabled();
        assert_eq!(h.apply(1e-6, 0.05, 30.0), (0.05, 30.0));
        let h = HeatingModel::<f64>::new(1e3, 1.0, 2.0, true).unwrap();
        let (t, g) = h.apply(1e-6, 0.05, 30.0);
        assert!((t - 0.051).abs() < 1e-12);
        assert!((g - 30.0 * (1.0 + 2.0 * 1e-3)).abs() < 1e-10);
    }

    #[test]
    fn cooling_curve_validates_powers() {
        let p = device();
        let h = HeatingModel::disabled();
        let n = NoiseModel::default();
        assert!(cooling_curve(&[], &p, &h, &n).is_err());
        assert!(cooling_curve(&[1e-6, 1e-7], &p, &h, &n).is_err());
        assert!(cooling_curve(&[0.0, 1e-7], &p, &h, &n).is_err());
    }

    #[test]
    fn heating_fit_infeasible_when_damping_too_weak() {
        // Radiation damping at 7.3 µW is only ~8x intrinsic here.
        let p = device();
        assert!(matches!(
            fit_heating_to_ratios(7.3e-6, &p, 30.0, 5.0, 1.0),
            Err(Error::Infeasible(_))
        ));
    }
}
