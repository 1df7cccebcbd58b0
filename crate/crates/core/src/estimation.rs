//! Inverse problems: Lorentzian peak fits, equipartition thermometry, linear
//! calibration of the optomechanical coupling, and the joint damping /
//! frequency-shift fit of a detuning sweep.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Error, Result};
use crate::numerics::linalg::Matrix;
use crate::numerics::lsq::{nonlinear_least_squares, FitParam, FitResult, LsqOptions, ResidualModel};
use crate::physics::{
    backaction_damping, backaction_prefactor, backaction_spring, photon_number_from_circulating,
    MechanicalParams, PhysicalConstants, SystemParams,
};
use crate::scalar::Real;
use crate::spectra::{mean_square_frequency, SpectrumTrace};

/// `floor + (area/π)·(fwhm/2) / ((f − center)² + (fwhm/2)²)`, integrating to
/// `area` above the floor. Frequencies in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianModel<T> {
    pub center: T,
    pub fwhm: T,
    pub area: T,
    pub floor: T,
}

impl<T: Real> LorentzianModel<T> {
    pub const PARAM_NAMES: [&'static str; 4] = ["center", "fwhm", "area", "floor"];

    pub fn eval(&self, f: T) -> T {
        let hw = self.fwhm / T::lit(2.0);
        let d = f - self.center;
        self.floor + self.area / T::PI() * hw / (d * d + hw * hw)
    }

    pub fn peak_height(&self) -> T {
        T::lit(2.0) * self.area / (T::PI() * self.fwhm)
    }

    pub fn from_fit(fit: &FitResult<T>) -> Option<Self> {
        Some(Self {
            center: fit.value("center")?,
            fwhm: fit.value("fwhm")?,
            area: fit.value("area")?,
            floor: fit.value("floor")?,
        })
    }

    /// Heuristic starting point: centre at the largest bin, floor at the
    /// median, width from the half-maximum crossings around the peak and
    /// area from the summed excess above the floor.
    pub fn initial_guess(trace: &SpectrumTrace<T>) -> Self {
        let f = trace.freq_hz();
        let y = trace.psd();
        let n = f.len();
        let (imax, &ymax) = y
            .iter()
            .enumerate()
            .fold((0, &y[0]), |best, (i, v)| if *v > *best.1 { (i, v) } else { best });
        let floor = median(y);
        let half = floor + (ymax - floor) / T::lit(2.0);
        let mut lo = imax;
        while lo > 0 && y[lo] > half {
            lo -= 1;
        }
        let mut hi = imax;
        while hi + 1 < n && y[hi] > half {
            hi += 1;
        }
        let spacing = (f[n - 1] - f[0]) / T::count(n.max(2) - 1);
        let fwhm = (f[hi] - f[lo]).max(spacing);
        let mut area = T::zero();
        for i in 1..n {
            let a = y[i - 1] - floor;
            let b = y[i] - floor;
            area = area + (a + b) / T::lit(2.0) * (f[i] - f[i - 1]);
        }
        if !(area > T::zero()) {
            area = (ymax - floor) * fwhm * T::PI() / T::lit(2.0);
        }
        Self {
            center: f[imax],
            fwhm,
            area,
            floor,
        }
    }
}

fn median<T: Real>(v: &[T]) -> T {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite PSD"));
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / T::lit(2.0)
    }
}

/// Residuals of a Lorentzian against a trace in scaled coordinates, with
/// fixed per-bin weights.
struct LorentzianResiduals<'a, T> {
    freq: &'a [T],
    psd: &'a [T],
    inv_sigma: Vec<T>,
    scale: LorentzianModel<T>,
}

impl<T: Real> LorentzianResiduals<'_, T> {
    fn unscale(&self, u: &[T]) -> LorentzianModel<T> {
        LorentzianModel {
            center: self.scale.center + u[0] * self.scale.fwhm,
            fwhm: u[1] * self.scale.fwhm,
            area: u[2] * self.scale.area,
            floor: u[3] * self.scale.floor,
        }
    }

    fn scaled(&self, m: &LorentzianModel<T>) -> Vec<T> {
        vec![
            (m.center - self.scale.center) / self.scale.fwhm,
            m.fwhm / self.scale.fwhm,
            m.area / self.scale.area,
            m.floor / self.scale.floor,
        ]
    }
}

impl<T: Real> ResidualModel<T> for LorentzianResiduals<'_, T> {
    fn residuals(&self, u: &[T]) -> Vec<T> {
        let m = self.unscale(u);
        if !(m.fwhm > T::zero()) {
            return vec![T::nan(); self.freq.len()];
        }
        self.freq
            .iter()
            .zip(self.psd)
            .zip(&self.inv_sigma)
            .map(|((&f, &y), &w)| (m.eval(f) - y) * w)
            .collect()
    }

    fn jacobian(&self, u: &[T]) -> Option<Matrix<T>> {
        let m = self.unscale(u);
        let two = T::lit(2.0);
        let hw = m.fwhm / two;
        let mut jac = Matrix::zeros(self.freq.len(), 4);
        for (i, (&f, &w)) in self.freq.iter().zip(&self.inv_sigma).enumerate() {
            let d = f - m.center;
            let q = d * d + hw * hw;
            let shape = hw / (T::PI() * q);
            let d_center = m.area / T::PI() * hw * two * d / (q * q);
            let d_hw = m.area / T::PI() * (q - two * hw * hw) / (q * q);
            jac.set(i, 0, d_center * self.scale.fwhm * w);
            jac.set(i, 1, d_hw / two * self.scale.fwhm * w);
            jac.set(i, 2, shape * self.scale.area * w);
            jac.set(i, 3, self.scale.floor * w);
        }
        Some(jac)
    }
}

const LORENTZIAN_REWEIGHT_PASSES: usize = 3;

/// Weighted least-squares Lorentzian fit of a peaked spectrum.
///
/// Bin uncertainties are `model / √n_avg`, the spread of an averaged
/// periodogram. The weights are taken from the current model and refreshed
/// over a few passes, which avoids the downward bias of weighting by the
/// noisy data themselves. The returned parameters are named `center`, `fwhm`,
/// `area` and `floor`, in Hz and the trace's units.
pub fn fit_lorentzian<T: Real>(trace: &SpectrumTrace<T>, init: Option<LorentzianModel<T>>) -> Result<FitResult<T>> {
    let n = trace.len();
    if n < 8 {
        return domain(format!("need at least 8 points to fit a peak, got {n}"));
    }
    let y = trace.psd();
    let f = trace.freq_hz();
    let sqrt_navg = T::count(trace.n_avg()).sqrt();

    let floor_est = median(y);
    let ymax = y.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let sigma = floor_est / sqrt_navg;
    if !(ymax > floor_est + T::lit(3.0) * sigma) {
        return Err(Error::NoPeak {
            max: ymax.as_f64(),
            floor: floor_est.as_f64(),
            sigma: sigma.as_f64(),
        });
    }

    let mut model = init.unwrap_or_else(|| LorentzianModel::initial_guess(trace));
    let tiny = ymax * T::lit(1e-12);
    let scale = LorentzianModel {
        center: model.center,
        fwhm: if model.fwhm > T::zero() { model.fwhm } else { f[n - 1] - f[0] },
        area: if model.area > T::zero() { model.area } else { ymax * (f[n - 1] - f[0]) },
        floor: if model.floor > tiny { model.floor } else { ymax * T::lit(1e-3) },
    };
    let opts = LsqOptions::default();
    let mut fit = None;
    for _ in 0..LORENTZIAN_REWEIGHT_PASSES {
        let inv_sigma = f
            .iter()
            .map(|&x| sqrt_navg / model.eval(x).abs().max(tiny))
            .collect();
        let problem = LorentzianResiduals {
            freq: f,
            psd: y,
            inv_sigma,
            scale,
        };
        let start = problem.scaled(&model);
        let result = nonlinear_least_squares(&problem, &start, &opts)?;
        model = problem.unscale(&result.values());
        let sig = result.params.iter().map(|p| p.sigma).collect::<Vec<_>>();
        let scales = [scale.fwhm, scale.fwhm, scale.area, scale.floor];
        let vals = [model.center, model.fwhm, model.area, model.floor];
        fit = Some(FitResult {
            params: LorentzianModel::<T>::PARAM_NAMES
                .iter()
                .zip(vals.iter().zip(sig.iter().zip(scales)))
                .map(|(name, (&value, (&s, k)))| FitParam {
                    name: (*name).to_string(),
                    value,
                    sigma: s * k.abs(),
                })
                .collect(),
            ..result
        });
    }
    let fit = fit.expect("at least one pass");
    if !fit.converged {
        return Err(Error::NotConverged {
            iterations: fit.n_iter,
            cost: fit.residual_norm.as_f64() / 2.0,
            gradient: fit.relative_gradient.as_f64(),
        });
    }
    Ok(fit)
}

/// Inverse equipartition: mode temperature from the integrated displacement
/// PSD, `area · m ω_m² / k_B`.
pub fn temperature_from_area<T: Real>(area: T, mech: &MechanicalParams<T>, c: &PhysicalConstants<T>) -> Result<T> {
    if !(area >= T::zero()) {
        return domain(format!("area must be non-negative, got {area}"));
    }
    Ok(area * mech.mass * mech.omega_m * mech.omega_m / c.k_b())
}

/// One point of the coupling calibration: bath temperature and the variance
/// of the cavity resonance frequency (Hz²), with an optional 1σ error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationPoint<T> {
    pub temperature: T,
    pub mean_square_freq: T,
    pub sigma: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingCalibration<T> {
    /// Coupling, rad/s per m.
    pub g: T,
    pub g_sigma: T,
    /// Hz² per K.
    pub slope: T,
    pub slope_sigma: T,
    /// Temperature-independent offset, Hz².
    pub intercept: T,
    pub intercept_sigma: T,
}

/// Straight-line fit of frequency variance against bath temperature. The
/// slope gives `g/2π = √(slope · m ω_m² / k_B)`; the intercept absorbs any
/// temperature-independent background and is not used for `g`.
///
/// Points without a `sigma` are weighted equally and the parameter errors
/// are scaled by the residual scatter.
pub fn calibrate_coupling<T: Real>(
    points: &[CalibrationPoint<T>],
    mech: &MechanicalParams<T>,
    c: &PhysicalConstants<T>,
) -> Result<CouplingCalibration<T>> {
    if points.len() < 3 {
        return domain(format!("need at least 3 calibration points, got {}", points.len()));
    }
    let weighted = points.iter().all(|p| p.sigma.is_some());
    let mut w = Vec::with_capacity(points.len());
    for p in points {
        if !(p.temperature.is_finite() && p.mean_square_freq.is_finite()) {
            return domain("calibration point is not finite");
        }
        let wi = match p.sigma {
            Some(s) if weighted => {
                if !(s > T::zero()) {
                    return domain(format!("calibration sigma must be positive, got {s}"));
                }
                (s * s).recip()
            }
            _ => T::one(),
        };
        w.push(wi);
    }
    let t0 = points[0].temperature;
    if points.iter().all(|p| p.temperature == t0) {
        return domain("calibration temperatures must not all be equal");
    }

    let (mut sw, mut sx, mut sy) = (T::zero(), T::zero(), T::zero());
    for (p, &wi) in points.iter().zip(&w) {
        sw = sw + wi;
        sx = sx + wi * p.temperature;
        sy = sy + wi * p.mean_square_freq;
    }
    let (xm, ym) = (sx / sw, sy / sw);
    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for (p, &wi) in points.iter().zip(&w) {
        let dx = p.temperature - xm;
        sxx = sxx + wi * dx * dx;
        sxy = sxy + wi * dx * (p.mean_square_freq - ym);
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;

    let dof = T::count(points.len() - 2);
    let scale = if weighted {
        T::one()
    } else {
        let chi2 = points.iter().zip(&w).fold(T::zero(), |s, (p, &wi)| {
            let r = p.mean_square_freq - (intercept + slope * p.temperature);
            s + wi * r * r
        });
        chi2 / dof
    };
    let slope_sigma = (scale / sxx).sqrt();
    let intercept_sigma = (scale * (sw.recip() + xm * xm / sxx)).sqrt();

    if !(slope > T::zero()) {
        return Err(Error::Calibration(format!(
            "fitted slope {slope} Hz^2/K is not positive"
        )));
    }
    let g_hz = (slope * mech.mass * mech.omega_m * mech.omega_m / c.k_b()).sqrt();
    let g = g_hz * T::two_pi();
    Ok(CouplingCalibration {
        g,
        g_sigma: g * slope_sigma / (T::lit(2.0) * slope),
        slope,
        slope_sigma,
        intercept,
        intercept_sigma,
    })
}

/// Seeded synthetic calibration dataset: the equipartition frequency
/// variance at each temperature with independent Gaussian errors of relative
/// size `rel_noise`. Each point carries its nominal 1σ.
pub fn synth_calibration<T: Real>(
    temperatures: &[T],
    mech: &MechanicalParams<T>,
    g: T,
    rel_noise: T,
    seed: u64,
    c: &PhysicalConstants<T>,
) -> Result<Vec<CalibrationPoint<T>>> {
    if !(rel_noise >= T::zero() && rel_noise.is_finite()) {
        return domain(format!("relative noise must be non-negative, got {rel_noise}"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    temperatures
        .iter()
        .map(|&t| {
            let truth = mean_square_frequency(t, mech, g, c)?;
            let z: f64 = StandardNormal.sample(&mut rng);
            let sigma = rel_noise * truth;
            Ok(CalibrationPoint {
                temperature: t,
                mean_square_freq: truth + sigma * T::lit(z),
                sigma: (sigma > T::zero()).then_some(sigma),
            })
        })
        .collect()
}

/// Measured mechanical damping and frequency shift at one detuning, all in
/// rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint<T> {
    pub detuning: T,
    pub gamma_m: T,
    pub freq_shift: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepFitOptions<T> {
    /// Starting circulating power, W. Also sets the parameter scale.
    pub init_power: T,
    /// Fit the intrinsic damping as a second parameter.
    pub free_gamma_m0: bool,
    pub lsq: LsqOptions<T>,
}

impl<T: Real> Default for SweepFitOptions<T> {
    fn default() -> Self {
        Self {
            init_power: T::lit(1e-6),
            free_gamma_m0: false,
            lsq: LsqOptions::default(),
        }
    }
}

/// Damping below this fraction of its red-sideband value at every point
/// means the sweep never touches a mechanical sideband.
const SWEEP_SENSITIVITY_FLOOR: f64 = 1e-3;
const SWEEP_REWEIGHT_PASSES: usize = 10;

struct SweepResiduals<'a, T> {
    points: &'a [SweepPoint<T>],
    params: &'a SystemParams<T>,
    power_scale: T,
    free_gamma_m0: bool,
    inv_sigma_damping: T,
    inv_sigma_shift: T,
    /// Backaction per watt of circulating power at each point.
    unit_response: Vec<(T, T)>,
}

impl<'a, T: Real> SweepResiduals<'a, T> {
    fn new(points: &'a [SweepPoint<T>], params: &'a SystemParams<T>, power_scale: T, free_gamma_m0: bool) -> Result<Self> {
        let unit_response = points
            .iter()
            .map(|p| unit_backaction(params, p.detuning))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            points,
            params,
            power_scale,
            free_gamma_m0,
            inv_sigma_damping: T::one(),
            inv_sigma_shift: T::one(),
            unit_response,
        })
    }

    fn split(&self, u: &[T]) -> (T, T) {
        let gamma_m0 = if self.free_gamma_m0 {
            u[1] * self.params.mechanics.gamma_m0
        } else {
            self.params.mechanics.gamma_m0
        };
        (u[0] * self.power_scale, gamma_m0)
    }

    /// Unweighted (damping, shift) residual blocks.
    fn blocks(&self, u: &[T]) -> (Vec<T>, Vec<T>) {
        let (power, gamma_m0) = self.split(u);
        self.points
            .iter()
            .zip(&self.unit_response)
            .map(|(p, &(g1, o1))| (gamma_m0 + power * g1 - p.gamma_m, power * o1 - p.freq_shift))
            .unzip()
    }
}

impl<T: Real> ResidualModel<T> for SweepResiduals<'_, T> {
    fn residuals(&self, u: &[T]) -> Vec<T> {
        let (d, s) = self.blocks(u);
        d.into_iter()
            .map(|r| r * self.inv_sigma_damping)
            .chain(s.into_iter().map(|r| r * self.inv_sigma_shift))
            .collect()
    }

    fn jacobian(&self, _u: &[T]) -> Option<Matrix<T>> {
        let m = self.points.len();
        let cols = if self.free_gamma_m0 { 2 } else { 1 };
        let mut jac = Matrix::zeros(2 * m, cols);
        for (i, &(g1, o1)) in self.unit_response.iter().enumerate() {
            jac.set(i, 0, g1 * self.power_scale * self.inv_sigma_damping);
            jac.set(m + i, 0, o1 * self.power_scale * self.inv_sigma_shift);
            if self.free_gamma_m0 {
                jac.set(i, 1, self.params.mechanics.gamma_m0 * self.inv_sigma_damping);
            }
        }
        Some(jac)
    }
}

/// Damping and spring shift produced by 1 W of circulating power.
fn unit_backaction<T: Real>(params: &SystemParams<T>, detuning: T) -> Result<(T, T)> {
    let omega_e = params.cavity.omega_c + detuning;
    let n = photon_number_from_circulating(T::one(), omega_e, &params.constants)?;
    let b = backaction_prefactor(n, params.coupling.g, params.zero_point_motion()?)?;
    let (k, wm) = (params.cavity.kappa, params.mechanics.omega_m);
    Ok((backaction_damping(b, k, wm, detuning)?, backaction_spring(b, k, wm, detuning)?))
}

fn rms<T: Real>(v: &[T]) -> T {
    (v.iter().fold(T::zero(), |s, &x| s + x * x) / T::count(v.len())).sqrt()
}

/// Joint fit of damping and frequency shift against detuning with the
/// circulating power as the only free parameter (optionally also the
/// intrinsic damping). Cavity, mechanics and coupling are held at `fixed`.
///
/// The two residual blocks start with equal weight and are then re-weighted
/// by the residual variance of each block until the weights settle. The result carries `power` (W) and, when freed, `gamma_m0` (rad/s).
pub fn fit_detuning_sweep<T: Real>(
    points: &[SweepPoint<T>],
    fixed: &SystemParams<T>,
    options: &SweepFitOptions<T>,
) -> Result<FitResult<T>> {
    let n_params = if options.free_gamma_m0 { 2 } else { 1 };
    if points.len() < n_params + 1 {
        return domain(format!("need more than {n_params} sweep points, got {}", points.len()));
    }
    if !(options.init_power > T::zero()) {
        return domain("initial power must be positive");
    }
    let mut problem = SweepResiduals::new(points, fixed, options.init_power, options.free_gamma_m0)?;

    let (peak, _) = unit_backaction(fixed, -fixed.mechanics.omega_m)?;
    let best = problem
        .unit_response
        .iter()
        .fold(T::zero(), |m, &(g1, _)| m.max(g1.abs()));
    if !(best > T::lit(SWEEP_SENSITIVITY_FLOOR) * peak.abs()) {
        return Err(Error::Insensitive(format!(
            "damping response at the sampled detunings is at most {} of its sideband value",
            (best / peak.abs()).as_f64()
        )));
    }

    // both blocks are in rad/s, so the first pass weights them alike
    let scale = rms(&problem
        .unit_response
        .iter()
        .map(|&(g1, _)| g1 * options.init_power)
        .collect::<Vec<_>>());
    problem.inv_sigma_damping = scale.recip();
    problem.inv_sigma_shift = scale.recip();
    let mut result = nonlinear_least_squares(&problem, &vec![T::one(); n_params], &options.lsq)?;

    let floor = T::lit(1e-9) * scale;
    for _ in 0..SWEEP_REWEIGHT_PASSES {
        let (rd, rs) = problem.blocks(&result.values());
        let (wd, ws) = (rms(&rd).max(floor).recip(), rms(&rs).max(floor).recip());
        let settled = ((wd / ws) / (problem.inv_sigma_damping / problem.inv_sigma_shift) - T::one()).abs() < T::lit(1e-6);
        problem.inv_sigma_damping = wd;
        problem.inv_sigma_shift = ws;
        result = nonlinear_least_squares(&problem, &result.values(), &options.lsq)?;
        if settled {
            break;
        }
    }

    let mut params = vec![FitParam {
        name: "power".to_string(),
        value: result.params[0].value * options.init_power,
        sigma: result.params[0].sigma * options.init_power,
    }];
    if options.free_gamma_m0 {
        params.push(FitParam {
            name: "gamma_m0".to_string(),
            value: result.params[1].value * fixed.mechanics.gamma_m0,
            sigma: result.params[1].sigma * fixed.mechanics.gamma_m0,
        });
    }
    Ok(FitResult { params, ..result })
}
