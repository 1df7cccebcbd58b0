//! Subcommand definitions and their implementations.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use optomech::estimation::{
    calibrate_coupling, fit_detuning_sweep, fit_lorentzian, synth_calibration, temperature_from_area,
};
use optomech::experiment::{
    cooling_curve, damping_at, find_optimal_detuning, fit_heating_to_ratios, sweep_constant_circulating,
    sweep_constant_incident,
};
use optomech::physics::effective_temperature;
use optomech::spectra::{centered_grid, imprecision_floor, synth_spectrum, RNG_ALGORITHM};
use optomech::{angular, hertz, FitResult, LorentzianModel, PowerSpec, PsdUnit, SweepFitOptions, ThermalPeakModel};
use serde::Serialize;

use crate::config::{self, Config};
use crate::csvio::{self, CoolingTable, Document, SweepTable};
use crate::report::RunReport;
use crate::{write_atomic, CliError};

#[derive(Debug, Parser)]
#[command(name = "optomech", version, about = "Dynamical backaction simulator and fitting toolkit")]
pub struct Cli {
    /// Device configuration (TOML). Defaults to $OPTOMECH_CONFIG, then the
    /// bundled paper_device preset.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Backaction, damping and mode temperature across a detuning grid.
    Sweep(SweepArgs),
    /// Sideband cooling at the optimal detuning for a list of powers.
    Cool(CoolArgs),
    /// Synthetic averaged thermal-noise spectrum.
    Synth(SynthArgs),
    /// Lorentzian fit and thermometry of a spectrum file.
    FitSpectrum(FitSpectrumArgs),
    /// Coupling from frequency variance against temperature.
    CalibrateG(CalibrateArgs),
    /// Circulating power from a measured detuning sweep.
    FitSweep(FitSweepArgs),
    /// Synthetic coupling-calibration dataset.
    SynthCalibration(SynthCalibrationArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sweep(_) => "sweep",
            Command::Cool(_) => "cool",
            Command::Synth(_) => "synth",
            Command::FitSpectrum(_) => "fit-spectrum",
            Command::CalibrateG(_) => "calibrate-g",
            Command::FitSweep(_) => "fit-sweep",
            Command::SynthCalibration(_) => "synth-calibration",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    ConstCirculating,
    ConstIncident,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Unit {
    Displacement,
    CavityFrequency,
}

impl From<Unit> for PsdUnit {
    fn from(u: Unit) -> Self {
        match u {
            Unit::Displacement => PsdUnit::Displacement,
            Unit::CavityFrequency => PsdUnit::CavityFrequency,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "const-circulating")]
    pub mode: Mode,
    /// Circulating or incident power, W.
    #[arg(long, default_value_t = 9e-7)]
    pub power: f64,
    /// First detuning, Hz [default: -2 f_m].
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    /// Last detuning, Hz [default: +2 f_m].
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CoolArgs {
    /// Circulating powers, W, comma separated and increasing.
    #[arg(long, value_delimiter = ',', conflicts_with = "decades")]
    pub powers: Option<Vec<f64>>,
    /// Log-spaced powers `first:last:count`, W.
    #[arg(long, default_value = "46e-12:7.3e-6:25")]
    pub decades: String,
    /// Fit the heating model so the top power reaches the target ratios.
    #[arg(long)]
    pub fit_heating: bool,
    /// Heating exponent used with --fit-heating.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Target total damping over intrinsic damping at the top power.
    #[arg(long, default_value_t = 30.0)]
    pub damping_ratio: f64,
    /// Target bath temperature over mode temperature at the top power.
    #[arg(long, default_value_t = 5.0)]
    pub cooling_ratio: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Bath temperature, K [default: T_0 from the configuration].
    #[arg(long)]
    pub temp: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub navg: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Frequency span around f_m, Hz [default: 20 linewidths].
    #[arg(long)]
    pub span: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    pub points: usize,
    /// Circulating power at the optimal red detuning, W. Without it the
    /// mode sits at the bath temperature with its intrinsic linewidth.
    #[arg(long)]
    pub power: Option<f64>,
    #[arg(long, value_enum, default_value = "displacement")]
    pub unit: Unit,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitSpectrumArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Require this PSD unit in the input.
    #[arg(long, value_enum)]
    pub unit: Option<Unit>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitSweepArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Also fit the intrinsic damping.
    #[arg(long)]
    pub free_gamma_m0: bool,
    /// Starting circulating power, W.
    #[arg(long, default_value_t = 1e-6)]
    pub init_power: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthCalibrationArgs {
    /// Bath temperatures, K.
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.15,0.2,0.25")]
    pub temps: Vec<f64>,
    /// Relative 1σ error of each point.
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn execute(cli: &Cli, report: &mut RunReport) -> Result<(), CliError> {
    let (cfg, source) = config::resolve(cli.config.as_deref())?;
    report.config_source = Some(source.to_string());
    report.config_digest = Some(cfg.digest());
    let out = match &cli.command {
        Command::Sweep(a) => sweep(&cfg, a)?,
        Command::Cool(a) => cool(&cfg, a)?,
        Command::Synth(a) => {
            report.seeds.push(a.seed);
            report.rng = Some(RNG_ALGORITHM);
            synth(&cfg, a)?
        }
        Command::FitSpectrum(a) => fit_spectrum(&cfg, a)?,
        Command::CalibrateG(a) => calibrate(&cfg, a)?,
        Command::FitSweep(a) => fit_sweep(&cfg, a)?,
        Command::SynthCalibration(a) => {
            report.seeds.push(a.seed);
            report.rng = Some(RNG_ALGORITHM);
            synth_cal(&cfg, a)?
        }
    };
    report.outputs.push(out.display().to_string());
    Ok(())
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Validation(msg.into()))
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        invalid(format!("--{name} must be finite, got {v}"))
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        invalid(format!("--{name} must be positive, got {v}"))
    }
}

fn stamp(doc: Document, cfg: &Config) -> Document {
    doc.meta("config_sha256", cfg.digest())
        .meta("generator", format!("optomech {}", env!("CARGO_PKG_VERSION")))
}

fn write_doc(path: &Path, doc: &Document) -> Result<PathBuf, CliError> {
    write_atomic(path, doc.render().as_bytes())?;
    Ok(path.to_path_buf())
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<PathBuf, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Other(e.to_string()))?;
    s.push('\n');
    write_atomic(path, s.as_bytes())?;
    Ok(path.to_path_buf())
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

fn sweep(cfg: &Config, a: &SweepArgs) -> Result<PathBuf, CliError> {
    let params = cfg.params();
    let power = positive("power", a.power)?;
    let from = finite("from", a.from.unwrap_or(-2.0 * cfg.system.f_m))?;
    let to = finite("to", a.to.unwrap_or(2.0 * cfg.system.f_m))?;
    if a.points < 2 || from == to {
        return invalid("a sweep needs --points >= 2 and --from != --to");
    }
    let step = (to - from) / (a.points - 1) as f64;
    let grid: Vec<f64> = (0..a.points).map(|i| angular(from + step * i as f64)).collect();
    let result = match a.mode {
        Mode::ConstCirculating => sweep_constant_circulating(power, &grid, &params)?,
        Mode::ConstIncident => sweep_constant_incident(power, &grid, &cfg.kerr(), &params)?,
    };
    let doc = stamp(SweepTable::from_result(&result).document(), cfg);
    write_doc(&a.out, &doc)
}

/// `first:last:count`, log-spaced.
pub fn parse_decades(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Validation(format!("--decades expects first:last:count, got `{spec}`"));
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if !(a > 0.0 && b > a && b.is_finite() && n >= 2) {
        return Err(bad());
    }
    let (la, lb) = (a.log10(), b.log10());
    let mut v: Vec<f64> = (0..n)
        .map(|i| 10f64.powf(la + (lb - la) * i as f64 / (n - 1) as f64))
        .collect();
    // pin the end points to the values as typed
    v[0] = a;
    v[n - 1] = b;
    Ok(v)
}

fn cool(cfg: &Config, a: &CoolArgs) -> Result<PathBuf, CliError> {
    let params = cfg.params();
    let powers = match &a.powers {
        Some(p) => p.clone(),
        None => parse_decades(&a.decades)?,
    };
    if powers.is_empty() {
        return invalid("no powers given");
    }
    let (heating, fitted) = if a.fit_heating {
        let top = *powers.last().expect("non-empty");
        (fit_heating_to_ratios(top, &params, a.damping_ratio, a.cooling_ratio, a.beta)?, true)
    } else {
        (cfg.heating(), false)
    };
    let result = cooling_curve(&powers, &params, &heating, &cfg.noise())?;
    let mut doc = CoolingTable::from_result(&result)
        .document()
        .meta("heating_enabled", heating.enabled)
        .meta("heating_alpha", csvio::num(heating.alpha))
        .meta("heating_beta", csvio::num(heating.beta))
        .meta("heating_eta", csvio::num(heating.eta))
        .meta("heating_fitted", fitted);
    if fitted {
        doc = doc
            .meta("damping_ratio_target", csvio::num(a.damping_ratio))
            .meta("cooling_ratio_target", csvio::num(a.cooling_ratio));
    }
    write_doc(&a.out, &stamp(doc, cfg))
}

fn synth(cfg: &Config, a: &SynthArgs) -> Result<PathBuf, CliError> {
    let params = cfg.params();
    let mech = params.mechanics;
    let temp = a.temp.unwrap_or(cfg.system.t0);
    if !(temp >= 0.0 && temp.is_finite()) {
        return invalid(format!("--temp must be non-negative, got {temp}"));
    }
    if a.navg == 0 {
        return invalid("--navg must be at least 1");
    }
    if a.points < 8 {
        return invalid("--points must be at least 8");
    }
    let (gamma_m, t_m, floor) = match a.power {
        None => (mech.gamma_m0, temp, cfg.noise.imprecision_ref),
        Some(p) => {
            let p = positive("power", p)?;
            let spec = PowerSpec::Circulating(p);
            let d = find_optimal_detuning(spec, &params, None)?;
            let gamma = damping_at(spec, d, &params, None)?;
            let (t0, gm0) = cfg.heating().apply(p, temp, mech.gamma_m0);
            let t_m = effective_temperature(gm0, t0, gamma, params.environment.tp)?;
            (gm0 + gamma, t_m, imprecision_floor(p, &cfg.noise())?)
        }
    };
    let span = positive("span", a.span.unwrap_or(20.0 * hertz(gamma_m)))?;
    let grid = centered_grid(cfg.system.f_m, span, a.points)?;
    let mut model = ThermalPeakModel::displacement(mech, gamma_m, t_m, floor);
    if a.unit == Unit::CavityFrequency {
        let pull = cfg.system.g;
        model.unit = PsdUnit::CavityFrequency;
        model.g = params.coupling.g;
        model.floor = floor * pull * pull;
    }
    let trace = synth_spectrum(&model, &grid, a.navg, a.seed)?;
    write_doc(&a.out, &stamp(csvio::trace_document(&trace), cfg))
}

#[derive(Serialize)]
struct Param {
    value: f64,
    sigma: f64,
    unit: &'static str,
}

#[derive(Serialize)]
struct Solver {
    converged: bool,
    n_iter: usize,
    termination: String,
    residual_norm: f64,
    reduced_chi_square: f64,
    dof: usize,
    relative_gradient: f64,
}

impl Solver {
    fn of(fit: &FitResult) -> Self {
        Self {
            converged: fit.converged,
            n_iter: fit.n_iter,
            termination: format!("{:?}", fit.termination).to_lowercase(),
            residual_norm: fit.residual_norm,
            reduced_chi_square: fit.reduced_chi_square(),
            dof: fit.dof,
            relative_gradient: fit.relative_gradient,
        }
    }
}

#[derive(Serialize)]
struct SpectrumFitReport {
    schema_version: u32,
    kind: &'static str,
    input: String,
    psd_unit: &'static str,
    n_avg: usize,
    center: Param,
    fwhm: Param,
    area: Param,
    floor: Param,
    /// Total linewidth γ_m/2π, equal to the fitted FWHM.
    gamma_m: Param,
    temperature: Param,
    solver: Solver,
}

fn fit_spectrum(cfg: &Config, a: &FitSpectrumArgs) -> Result<PathBuf, CliError> {
    let trace = csvio::read_trace(&read_input(&a.input)?, a.unit.map(Into::into))?;
    let fit = fit_lorentzian(&trace, None)?;
    let m = LorentzianModel::from_fit(&fit).ok_or_else(|| CliError::Fit("fit returned no Lorentzian".into()))?;
    let s = |n: &str| fit.sigma(n).unwrap_or(f64::NAN);
    let params = cfg.params();
    let unit = trace.unit();
    let to_displacement = match unit {
        PsdUnit::Displacement => 1.0,
        PsdUnit::CavityFrequency => (cfg.system.g * cfg.system.g).recip(),
    };
    let t = temperature_from_area(m.area.max(0.0) * to_displacement, &params.mechanics, &params.constants)?;
    let t_sigma = t * s("area") / m.area;
    let area_unit = match unit {
        PsdUnit::Displacement => "m^2",
        PsdUnit::CavityFrequency => "Hz^2",
    };
    let report = SpectrumFitReport {
        schema_version: csvio::SCHEMA_VERSION,
        kind: "lorentzian_fit",
        input: a.input.display().to_string(),
        psd_unit: unit.symbol(),
        n_avg: trace.n_avg(),
        center: Param { value: m.center, sigma: s("center"), unit: "Hz" },
        fwhm: Param { value: m.fwhm, sigma: s("fwhm"), unit: "Hz" },
        area: Param { value: m.area, sigma: s("area"), unit: area_unit },
        floor: Param { value: m.floor, sigma: s("floor"), unit: unit.symbol() },
        gamma_m: Param { value: m.fwhm, sigma: s("fwhm"), unit: "Hz" },
        temperature: Param { value: t, sigma: t_sigma.abs(), unit: "K" },
        solver: Solver::of(&fit),
    };
    write_json(&a.out, &report)
}

#[derive(Serialize)]
struct CalibrationReport {
    schema_version: u32,
    kind: &'static str,
    input: String,
    n_points: usize,
    /// g/2π.
    g: Param,
    g_khz_per_nm: f64,
    slope: Param,
    intercept: Param,
}

fn calibrate(cfg: &Config, a: &CalibrateArgs) -> Result<PathBuf, CliError> {
    let doc = Document::parse(&read_input(&a.input)?)?;
    let points = csvio::read_calibration(&doc)?;
    let params = cfg.params();
    let cal = calibrate_coupling(&points, &params.mechanics, &params.constants)?;
    let g = hertz(cal.g);
    let report = CalibrationReport {
        schema_version: csvio::SCHEMA_VERSION,
        kind: "coupling_calibration",
        input: a.input.display().to_string(),
        n_points: points.len(),
        g: Param { value: g, sigma: hertz(cal.g_sigma), unit: "Hz/m" },
        g_khz_per_nm: g * 1e-12,
        slope: Param { value: cal.slope, sigma: cal.slope_sigma, unit: "Hz^2/K" },
        intercept: Param { value: cal.intercept, sigma: cal.intercept_sigma, unit: "Hz^2" },
    };
    write_json(&a.out, &report)
}

#[derive(Serialize)]
struct SweepFitReport {
    schema_version: u32,
    kind: &'static str,
    input: String,
    n_points: usize,
    /// Power recorded in the input header, W.
    input_power: f64,
    input_mode: String,
    power: Param,
    gamma_m0: Option<Param>,
    weighting: &'static str,
    solver: Solver,
}

fn fit_sweep(cfg: &Config, a: &FitSweepArgs) -> Result<PathBuf, CliError> {
    let doc = Document::parse(&read_input(&a.input)?)?;
    let table = SweepTable::from_document(&doc)?;
    let options = SweepFitOptions {
        init_power: positive("init-power", a.init_power)?,
        free_gamma_m0: a.free_gamma_m0,
        ..Default::default()
    };
    let fit = fit_detuning_sweep(&table.points(), &cfg.params(), &options)?;
    if !fit.converged {
        return Err(CliError::Fit("sweep fit did not converge".into()));
    }
    let p = fit.get("power").expect("power is always fitted");
    let report = SweepFitReport {
        schema_version: csvio::SCHEMA_VERSION,
        kind: "sweep_fit",
        input: a.input.display().to_string(),
        n_points: table.rows.len(),
        input_power: table.power,
        input_mode: doc.get("mode").unwrap_or_default().to_string(),
        power: Param { value: p.value, sigma: p.sigma, unit: "W" },
        gamma_m0: fit.get("gamma_m0").map(|g| Param {
            value: hertz(g.value),
            sigma: hertz(g.sigma),
            unit: "Hz",
        }),
        weighting: "equal, then per-block residual variance",
        solver: Solver::of(&fit),
    };
    write_json(&a.out, &report)
}

fn synth_cal(cfg: &Config, a: &SynthCalibrationArgs) -> Result<PathBuf, CliError> {
    if a.temps.len() < 3 {
        return invalid("--temps needs at least 3 temperatures");
    }
    for &t in &a.temps {
        if !(t >= 0.0 && t.is_finite()) {
            return invalid(format!("temperatures must be non-negative, got {t}"));
        }
    }
    let params = cfg.params();
    let points = synth_calibration(&a.temps, &params.mechanics, params.coupling.g, a.noise, a.seed, &params.constants)?;
    let doc = csvio::calibration_document(&points)
        .meta("seed", a.seed)
        .meta("rng", RNG_ALGORITHM)
        .meta("relative_noise", csvio::num(a.noise));
    write_doc(&a.out, &stamp(doc, cfg))
}
