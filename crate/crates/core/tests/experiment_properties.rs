mod common;

use common::{device, poly_roots, rel};
use optomech::experiment::{
    cooling_curve, find_optimal_detuning, fit_heating_to_ratios, solve_kerr_occupation, sweep_constant_circulating,
    sweep_constant_incident,
};
use optomech::physics::photon_number_from_incident;
use optomech::{HeatingModel, KerrCavity, NoiseModel, PowerSpec};
use std::f64::consts::TAU;

/// Positive real steady states of the Kerr cavity from the full cubic.
fn kerr_roots(p_i: f64, detuning: f64, kerr: &KerrCavity) -> Vec<f64> {
    let c = optomech::PhysicalConstants::si();
    let kappa = kerr.base.kappa;
    let drive = p_i * kappa / (c.hbar() * (kerr.base.omega_c + detuning));
    // n = s u keeps the coefficients of order one
    let s = detuning.abs() / kerr.k;
    let k = kerr.k * s;
    let coeffs = [
        4.0 * k * k * s,
        8.0 * k * detuning * s,
        (kappa * kappa + 4.0 * detuning * detuning) * s,
        -drive,
    ];
    let mut roots: Vec<f64> = poly_roots(&coeffs)
        .into_iter()
        .filter(|z| z.im.abs() <= 1e-7 * z.norm() && z.re > 0.0)
        .map(|z| z.re * s)
        .collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

#[test]
fn kerr_branch_and_fold_flag_match_all_roots_oracle() {
    let p = device();
    let kerr = KerrCavity::default_for(p.cavity, &p.constants);
    let detuning = -2.0 * p.cavity.kappa;
    let powers: Vec<f64> = (0..3000).map(|i| 1e-12 * 10f64.powf(3.0 * i as f64 / 2999.0)).collect();
    let mut previous: Option<(f64, bool)> = None;
    let mut flagged = 0;
    for &pi in &powers {
        let sol = solve_kerr_occupation(pi, detuning, &kerr, &p.constants).unwrap();
        let roots = kerr_roots(pi, detuning, &kerr);
        // skip the immediate neighbourhood of a fold, where two roots merge
        let near_fold = roots.windows(2).any(|w| rel(w[0], w[1]) < 1e-3);
        if !near_fold {
            assert_eq!(sol.multistable, roots.len() == 3, "P_i={pi}: roots {roots:?}");
            assert!(rel(sol.photons, roots[0]) < 1e-9, "P_i={pi}: {} vs {:?}", sol.photons, roots);
        }
        if sol.multistable {
            flagged += 1;
        }
        if let Some((n_prev, ms_prev)) = previous {
            if rel(sol.photons, n_prev) > 0.2 {
                assert!(ms_prev, "jump at P_i={pi} without a flagged fold");
            }
        }
        previous = Some((sol.photons, sol.multistable));
    }
    assert!(flagged > 0, "scan never entered the bistable region");
}

fn max_gamma_gap(a: &optomech::SweepResult, b: &optomech::SweepResult) -> f64 {
    // Γ changes sign inside the window, so compare on the sweep's scale
    let scale = b.rows.iter().fold(0.0f64, |m, r| m.max(r.gamma.abs()));
    a.rows
        .iter()
        .zip(&b.rows)
        .fold(0.0f64, |m, (x, y)| m.max((x.gamma - y.gamma).abs() / scale))
}

#[test]
fn kerr_reduces_to_linear_cavity() {
    let p = device();
    let wm = p.mechanics.omega_m;
    let kappa = p.cavity.kappa;
    let grid: Vec<f64> = (0..201).map(|i| -2.0 * wm + 4.0 * wm * i as f64 / 200.0).collect();
    let linear = KerrCavity::linear(p.cavity);
    let pi = 1e-15;
    let b = sweep_constant_incident(pi, &grid, &linear, &p).unwrap();
    for (x, y) in b.rows.iter().zip(&grid) {
        let n = photon_number_from_incident(pi, p.cavity.omega_c + y, *y, kappa, &p.constants).unwrap();
        assert_eq!(x.photons, n);
    }
    let tiny = KerrCavity::new(1e-12 * kappa, p.cavity).unwrap();
    let a = sweep_constant_incident(pi, &grid, &tiny, &p).unwrap();
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert!(rel(x.photons, y.photons) < 1e-9);
        assert!(rel(x.gamma_m, y.gamma_m) < 1e-9);
    }
    assert!(max_gamma_gap(&a, &b) < 1e-9);

    // at higher drive the residual is the physical pull K n̄ and vanishes linearly
    let pi = 1e-9;
    let b = sweep_constant_incident(pi, &grid, &linear, &p).unwrap();
    let gaps: Vec<f64> = [1e-10, 1e-12, 1e-14]
        .iter()
        .map(|&k| {
            let a = sweep_constant_incident(pi, &grid, &KerrCavity::new(k * kappa, p.cavity).unwrap(), &p).unwrap();
            max_gamma_gap(&a, &b)
        })
        .collect();
    assert!(gaps[0] > 0.0);
    for w in gaps.windows(2) {
        assert!(w[1] < w[0] / 50.0, "{gaps:?}");
    }
}

#[test]
fn incident_and_circulating_modes_agree_at_equal_photon_number() {
    let p = device();
    let wm = p.mechanics.omega_m;
    let grid: Vec<f64> = (0..41).map(|i| -2.0 * wm + 4.0 * wm * i as f64 / 40.0).collect();
    let inc = sweep_constant_incident(1e-7, &grid, &KerrCavity::linear(p.cavity), &p).unwrap();
    for row in &inc.rows {
        let omega_e = p.cavity.omega_c + row.detuning;
        let p_c = optomech::physics::circulating_power(row.photons, omega_e, &p.constants).unwrap();
        let circ = sweep_constant_circulating(p_c, &[row.detuning], &p).unwrap();
        let other = circ.rows[0];
        assert!(rel(other.photons, row.photons) < 1e-12);
        assert!(rel(other.gamma_m, row.gamma_m) < 1e-9);
        assert!((other.omega - row.omega).abs() <= 1e-9 * row.omega.abs().max(1e-300));
    }
}

#[test]
fn sweeps_are_order_independent_and_reproducible() {
    let p = device();
    let wm = p.mechanics.omega_m;
    let grid: Vec<f64> = (0..101).map(|i| -2.0 * wm + 4.0 * wm * i as f64 / 100.0).collect();
    let kerr = KerrCavity::default_for(p.cavity, &p.constants);
    let whole = sweep_constant_incident(5e-8, &grid, &kerr, &p).unwrap();
    assert_eq!(whole, sweep_constant_incident(5e-8, &grid, &kerr, &p).unwrap());
    let reversed: Vec<f64> = grid.iter().rev().copied().collect();
    let back = sweep_constant_incident(5e-8, &reversed, &kerr, &p).unwrap();
    for (a, b) in whole.rows.iter().zip(back.rows.iter().rev()) {
        assert_eq!(a, b);
    }
    for (i, &d) in grid.iter().enumerate() {
        let single = sweep_constant_incident(5e-8, &[d], &kerr, &p).unwrap();
        assert_eq!(single.rows[0], whole.rows[i]);
    }
}

#[test]
fn kerr_optimum_moves_down_with_power() {
    let p = device();
    let kerr = KerrCavity::default_for(p.cavity, &p.constants);
    let mut last = f64::INFINITY;
    for k in 0..5 {
        let pc = 2e-7 * 2f64.powi(k);
        let d = find_optimal_detuning(PowerSpec::Circulating(pc), &p, Some(&kerr)).unwrap();
        assert!(d < last, "P_c={pc}: {d} not below {last}");
        last = d;
    }
}

#[test]
fn optimal_detuning_agrees_with_dense_scan() {
    let p = device();
    let spec = PowerSpec::Circulating(1e-6);
    let d = find_optimal_detuning(spec, &p, None).unwrap();
    let wm = p.mechanics.omega_m;
    let n = 300_000;
    let best = (0..n)
        .map(|i| -3.0 * wm * (1.0 - i as f64 / n as f64))
        .map(|x| (x, optomech::experiment::damping_at(spec, x, &p, None).unwrap()))
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap()
        .0;
    assert!((d - best).abs() < 2e-3 * p.cavity.kappa, "{} vs {}", d / TAU, best / TAU);
    assert!((d / TAU + 1.525e6).abs() < 115e3);
}

fn fig4_powers(n: usize) -> Vec<f64> {
    let (a, b) = (46e-12f64.log10(), 7.3e-6f64.log10());
    (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

#[test]
fn cooling_is_monotone_without_heating() {
    let p = device();
    let res = cooling_curve(&fig4_powers(25), &p, &HeatingModel::disabled(), &NoiseModel::default()).unwrap();
    for w in res.rows.windows(2) {
        assert!(w[1].gamma_m > w[0].gamma_m);
        assert!(w[1].t_m < w[0].t_m);
        assert!(w[1].occupancy < w[0].occupancy);
        assert!(w[1].floor < w[0].floor);
    }
    for r in &res.rows {
        let exact = p.environment.t0 * r.gamma_m0 / r.gamma_m + p.environment.tp * r.gamma / r.gamma_m;
        assert!(rel(r.t_m, exact) < 1e-12);
    }
}

#[test]
fn heating_fit_reproduces_both_ratios_where_feasible() {
    let p = device();
    let top = 25e-6;
    let heating = fit_heating_to_ratios(top, &p, 30.0, 5.0, 1.0).unwrap();
    assert!(heating.enabled && heating.alpha >= 0.0 && heating.eta >= 0.0);
    let res = cooling_curve(&[top], &p, &heating, &NoiseModel::default()).unwrap();
    let row = res.rows[0];
    assert!(rel(row.gamma_m / p.mechanics.gamma_m0, 30.0) < 1e-9, "{}", row.gamma_m / p.mechanics.gamma_m0);
    assert!(rel(p.environment.t0 / row.t_m, 5.0) < 1e-9, "{}", p.environment.t0 / row.t_m);
    assert!(fit_heating_to_ratios(7.3e-6, &p, 30.0, 5.0, 1.0).is_err());
}
