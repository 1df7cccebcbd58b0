//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test -p optomech-cli --test acceptance`.

use std::f64::consts::TAU;
use std::path::Path;
use std::process::Command;

use optomech::estimation::{
    calibrate_coupling, fit_detuning_sweep, fit_lorentzian, synth_calibration, temperature_from_area,
};
use optomech::experiment::{cooling_curve, sweep_constant_circulating, sweep_constant_incident};
use optomech::physics::{effective_temperature, phonon_occupancy};
use optomech::spectra::{centered_grid, displacement_psd, mean_square_displacement, synth_spectrum};
use optomech::{
    HeatingModel, KerrCavity, LorentzianModel, MechanicalParams, NoiseModel, PhysicalConstants, SweepFitOptions,
    SystemParams, ThermalPeakModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn c1_occupancy() -> Outcome {
    let p = SystemParams::paper_device();
    let wm = p.mechanics.omega_m;
    let n50 = phonon_occupancy(0.050, wm, &p.constants).map_err(|e| e.to_string())?;
    let n10 = phonon_occupancy(0.010, wm, &p.constants).map_err(|e| e.to_string())?;
    let ok = (676.0..=690.0).contains(&n50) && rel(n50, 700.0) <= 0.03 && (133.0..=147.0).contains(&n10);
    check(
        ok,
        format!("m(50 mK) = {n50:.2} ({:.2}% from 700), m(10 mK) = {n10:.2}", 100.0 * rel(n50, 700.0)),
    )
}

fn c2_sideband_resolution() -> Outcome {
    let r = SystemParams::paper_device().sideband_resolution().map_err(|e| e.to_string())?;
    check((r - 6.63).abs() <= 0.01, format!("omega_m/kappa = {r:.5}"))
}

fn c3_backaction_regime() -> Outcome {
    let p = SystemParams::paper_device();
    let wm = p.mechanics.omega_m;
    let gm0 = wm / 3e5;
    let at_red = sweep_constant_circulating(9e-7, &[-wm], &p).map_err(|e| e.to_string())?;
    let ratio = at_red.rows[0].gamma / gm0;
    let n = 20_000;
    let blue: Vec<f64> = (1..n).map(|i| 2.0 * wm * i as f64 / n as f64).collect();
    let sweep = sweep_constant_circulating(9e-7, &blue, &p).map_err(|e| e.to_string())?;
    let lowest = sweep
        .rows
        .iter()
        .min_by(|a, b| a.gamma_m.partial_cmp(&b.gamma_m).unwrap())
        .unwrap();
    let doubled = (0.5..=2.5).contains(&ratio);
    let regenerative = sweep.rows.iter().any(|r| r.gamma_m < 0.0);
    check(
        doubled && regenerative,
        format!(
            "Gamma/gamma_m0 at -omega_m = {ratio:.4} (in [0.5, 2.5]: {doubled}); min gamma_m on (0, 2 omega_m) = \
             {:.4} rad/s at {:.4} omega_m (negative: {regenerative})",
            lowest.gamma_m,
            lowest.detuning / wm
        ),
    )
}

fn c4_symmetry() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut sign_ok = true;
    for _ in 0..1000 {
        let b = 10f64.powf(rng.random_range(-3.0..12.0));
        let kappa = 10f64.powf(rng.random_range(3.0..8.0));
        let wm = 10f64.powf(rng.random_range(3.0..8.0));
        let d = wm * 10f64.powf(rng.random_range(-3.0..1.0));
        let mut p = SystemParams::paper_device();
        p.cavity.kappa = kappa;
        p.mechanics.omega_m = wm;
        let plus = p.backaction_with_prefactor(b, d).map_err(|e| e.to_string())?;
        let minus = p.backaction_with_prefactor(b, -d).map_err(|e| e.to_string())?;
        worst = worst
            .max((plus.gamma + minus.gamma).abs() / plus.gamma.abs())
            .max((plus.omega + minus.omega).abs() / plus.omega.abs());
        sign_ok &= plus.gamma < 0.0 && minus.gamma > 0.0;
    }
    check(
        worst <= 1e-12 && sign_ok,
        format!("1000 draws: worst antisymmetry error {worst:.2e}, Gamma(Delta>0) < 0 always: {sign_ok}"),
    )
}

fn c5_cooling_arithmetic() -> Outcome {
    let gm0 = SystemParams::paper_device().mechanics.gamma_m0;
    let t = effective_temperature(gm0, 0.050, 4.0 * gm0, 10e-6).map_err(|e| e.to_string())?;
    check(
        rel(t, 0.010) <= 1e-3,
        format!("T_m = {:.4} mK ({:.3}% from 10 mK)", t * 1e3, 100.0 * rel(t, 0.010)),
    )
}

fn c6_damping_linearity() -> Outcome {
    let p = SystemParams::paper_device();
    let powers: Vec<f64> = (0..11).map(|i| 0.73e-6 * 10f64.powf(i as f64 / 10.0)).collect();
    let res = cooling_curve(&powers, &p, &HeatingModel::disabled(), &NoiseModel::default())
        .map_err(|e| e.to_string())?;
    let xs: Vec<f64> = res.rows.iter().map(|r| r.p_c.ln()).collect();
    let ys: Vec<f64> = res.rows.iter().map(|r| (r.gamma_m - r.gamma_m0).ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    check((slope - 1.0).abs() <= 1e-3, format!("log-log slope over 0.73-7.3 uW = {slope:.9}"))
}

#[allow(clippy::too_many_arguments)]
fn simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn integrate<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> f64 {
    breaks
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let m = 0.5 * (a + b);
            let (fa, fm, fb) = (f(a), f(m), f(b));
            simpson(&f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 60)
        })
        .sum()
}

fn c7_equipartition() -> Outcome {
    let c = PhysicalConstants::si();
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let wm = TAU * 10f64.powf(rng.random_range(5.0..7.0));
        let q = 10f64.powf(rng.random_range(3.0..6.0));
        let mass = 10f64.powf(rng.random_range(-16.0..-12.0));
        let t = rng.random_range(0.01..1.0);
        let mech = MechanicalParams::new(wm, wm / q, mass).map_err(|e| e.to_string())?;
        let g = mech.gamma_m0;
        let top = 20.0 * wm;
        let mut breaks = vec![0.0, wm, top];
        for k in [1.0, 10.0, 100.0, 1000.0] {
            breaks.extend([wm - k * g, wm + k * g].into_iter().filter(|w| *w > 0.0 && *w < top));
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = mean_square_displacement(t, &mech, &c).map_err(|e| e.to_string())?;
        // analytic tail beyond the last break: S ~ 4 k_B T γ / (m ω⁴)
        let tail = 4.0 * c.k_b() * t * g / mass / (3.0 * top.powi(3)) / TAU;
        let body = integrate(|w| displacement_psd(w, t, g, &mech, &c).unwrap() / TAU, &breaks, 1e-9 * expected);
        worst = worst.max(rel(body + tail, expected));
    }
    check(worst <= 5e-3, format!("20 parameter sets: worst relative error {worst:.2e}"))
}

fn c8_round_trip() -> Outcome {
    let p = SystemParams::paper_device();
    let mech = p.mechanics;
    let model = ThermalPeakModel::displacement(mech, mech.gamma_m0, 0.05, 1e-27);
    let grid = centered_grid(1.525e6, 100.0, 2001).map_err(|e| e.to_string())?;
    let fwhm = mech.gamma_m0 / TAU;
    let area = mean_square_displacement(0.05, &mech, &p.constants).map_err(|e| e.to_string())?;
    let (mut shape_ok, mut temp_ok) = (0, 0);
    for seed in 0..50 {
        let trace = synth_spectrum(&model, &grid, 100, seed).map_err(|e| e.to_string())?;
        let Ok(fit) = fit_lorentzian(&trace, None) else { continue };
        let m = LorentzianModel::from_fit(&fit).unwrap();
        if rel(m.fwhm, fwhm) <= 0.05 && rel(m.area, area) <= 0.05 {
            shape_ok += 1;
        }
        let t = temperature_from_area(m.area, &mech, &p.constants).map_err(|e| e.to_string())?;
        if rel(t, 0.05) <= 0.05 {
            temp_ok += 1;
        }
    }
    check(
        shape_ok >= 48 && temp_ok >= 48,
        format!("fwhm and area within 5%: {shape_ok}/50 seeds; temperature within 5%: {temp_ok}/50"),
    )
}

fn c9_coupling_calibration() -> Outcome {
    let p = SystemParams::paper_device();
    let temps = [0.05, 0.1, 0.15, 0.2, 0.25];
    let mut ratios = Vec::with_capacity(100);
    for seed in 0..100 {
        let pts = synth_calibration(&temps, &p.mechanics, p.coupling.g, 0.05, seed, &p.constants)
            .map_err(|e| e.to_string())?;
        let cal = calibrate_coupling(&pts, &p.mechanics, &p.constants).map_err(|e| e.to_string())?;
        ratios.push(cal.g / p.coupling.g);
    }
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = 0.5 * (ratios[49] + ratios[50]);
    check(
        (median - 1.0).abs() <= 0.03,
        format!("median g over 100 seeds = {:.4} kHz/nm ({:+.2}%)", 6.4 * median, 100.0 * (median - 1.0)),
    )
}

fn c10_sweep_fit() -> Outcome {
    let p = SystemParams::paper_device();
    let wm = p.mechanics.omega_m;
    let grid: Vec<f64> = (0..161).map(|i| -2.0 * wm + 4.0 * wm * i as f64 / 160.0).collect();
    let pts = sweep_constant_circulating(9e-7, &grid, &p).map_err(|e| e.to_string())?.points();
    let fit = fit_detuning_sweep(&pts, &p, &SweepFitOptions::default()).map_err(|e| e.to_string())?;
    let est = fit.value("power").unwrap();
    check(
        rel(est, 9e-7) <= 0.02 && fit.converged,
        format!("fitted P_c = {:.6} nW ({:.2e} relative error)", est * 1e9, rel(est, 9e-7)),
    )
}

fn argmax_detuning(pi: f64, kerr: &KerrCavity, p: &SystemParams, grid: &[f64]) -> Result<f64, String> {
    let s = sweep_constant_incident(pi, grid, kerr, p).map_err(|e| e.to_string())?;
    Ok(s.rows
        .iter()
        .max_by(|a, b| a.gamma_m.partial_cmp(&b.gamma_m).unwrap())
        .unwrap()
        .detuning)
}

fn c11_kerr_drift() -> Outcome {
    let p = SystemParams::paper_device();
    let wm = p.mechanics.omega_m;
    let n = 8000;
    let grid: Vec<f64> = (0..n).map(|i| -4.0 * wm * (1.0 - i as f64 / n as f64)).collect();
    let powers: Vec<f64> = (0..8).map(|k| 16e-9 * 10f64.powf(0.8 * k as f64 / 7.0)).collect();
    let kerr = KerrCavity::default_for(p.cavity, &p.constants);
    let linear = KerrCavity::linear(p.cavity);
    let mut nonlinear = Vec::new();
    let mut control = Vec::new();
    for &pi in &powers {
        nonlinear.push(argmax_detuning(pi, &kerr, &p, &grid)?);
        control.push(argmax_detuning(pi, &linear, &p, &grid)?);
    }
    let monotone = nonlinear.windows(2).all(|w| w[1] <= w[0]);
    let drift = control.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x))
        - control.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    let listing: Vec<String> = nonlinear.iter().map(|d| format!("{:.3}", d / TAU / 1e6)).collect();
    check(
        monotone && drift < 1e-3 * p.cavity.kappa,
        format!(
            "argmax over 16-101 nW (MHz): [{}], non-increasing: {monotone}; K=0 drift {:.3e} kappa",
            listing.join(", "),
            drift / p.cavity.kappa
        ),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_optomech"))
        .args(args)
        .current_dir(dir)
        .env_remove("OPTOMECH_CONFIG")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(())
}

fn c12_determinism() -> Outcome {
    let runs: Vec<&[&str]> = vec![
        &["sweep", "--mode", "const-circulating", "--power", "9e-7", "--out", "sweep_c.csv"],
        &[
            "sweep", "--mode", "const-incident", "--power", "1e-7", "--from", "-6e6", "--to", "0", "--out",
            "sweep_i.csv",
        ],
        &["cool", "--out", "cool.csv"],
        &["cool", "--decades", "1e-6:25e-6:5", "--fit-heating", "--out", "cool_heated.csv"],
        &["synth", "--seed", "7", "--out", "synth.csv"],
        &["synth", "--seed", "7", "--power", "1e-6", "--unit", "cavity-frequency", "--out", "synth_f.csv"],
        &["synth-calibration", "--seed", "3", "--out", "cal.csv"],
        &["fit-spectrum", "--input", "synth.csv", "--out", "fit.json"],
        &["calibrate-g", "--input", "cal.csv", "--out", "g.json"],
        &["fit-sweep", "--input", "sweep_c.csv", "--out", "sweep_fit.json"],
    ];
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    for dir in [a.path(), b.path()] {
        for args in &runs {
            run_cli(dir, args)?;
        }
    }
    let mut names: Vec<String> = std::fs::read_dir(a.path())
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let mut differing = Vec::new();
    for name in &names {
        let x = std::fs::read(a.path().join(name)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.path().join(name)).map_err(|e| e.to_string())?;
        if x != y {
            differing.push(name.clone());
        }
    }
    check(
        differing.is_empty() && names.len() == runs.len(),
        format!("{} products compared byte-for-byte across two runs; differing: {differing:?}", names.len()),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("occupancy thermometry", c1_occupancy),
        ("resolved-sideband ratio", c2_sideband_resolution),
        ("backaction regime at 900 nW", c3_backaction_regime),
        ("backaction symmetry", c4_symmetry),
        ("cooling arithmetic", c5_cooling_arithmetic),
        ("radiation-damping linearity", c6_damping_linearity),
        ("equipartition normalisation", c7_equipartition),
        ("Lorentzian round trip", c8_round_trip),
        ("coupling calibration", c9_coupling_calibration),
        ("coupled sweep fit", c10_sweep_fit),
        ("Kerr drift of optimal detuning", c11_kerr_drift),
        ("CLI determinism", c12_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".to_string()));
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag}: {name}: {detail}", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
