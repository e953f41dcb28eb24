//! Cross-checks between the master-equation and weak-drive solutions.

use spinkerr::observables;
use spinkerr::presets::{self, FAST_SPIN};
use spinkerr::steadystate;
use spinkerr::sweep::{self, Axis, Observable, Oracle, Parameter, SweepSpec};
use spinkerr::{analytic, FockSpace, Mode};

fn weak_scan(xi_over_gamma: f64) -> sweep::SweepResult {
    let mut p = presets::paper();
    p.angular_velocity = FAST_SPIN;
    let gamma = p.loss_rate();
    let mut spec = SweepSpec::new("weak", p, vec![Axis::new(Parameter::Detuning, -6e6, 6e6, 121)]);
    spec.overrides.xi = Some(xi_over_gamma * gamma);
    spec.oracle = Oracle::Both;
    sweep::run(&spec, 2).unwrap()
}

fn worst_deviation(r: &sweep::SweepResult) -> f64 {
    let mut worst: f64 = 0.0;
    for rec in &r.records {
        for mode in Mode::BOTH {
            if let (Some(a), Some(n)) = (rec.value(Observable::G2Analytic, mode), rec.value(Observable::G2, mode)) {
                worst = worst.max((a - n).abs() / n);
            }
        }
    }
    worst
}

#[test]
fn weak_drive_limit_matches_master_equation() {
    // The weak-drive result is the ξ → 0 limit; the gap closes as ξ falls.
    let strong = worst_deviation(&weak_scan(0.25));
    let weak = worst_deviation(&weak_scan(0.01));
    assert!(weak < 0.01, "worst deviation {weak}");
    assert!(weak < strong);
}

#[test]
fn point_values_approach_the_analytic_limit() {
    let mut p = presets::paper();
    p.angular_velocity = FAST_SPIN;
    p.detuning = presets::CHIRAL_DETUNING;
    let mut d = p.derive().unwrap();
    d.xi = 0.01 * d.gamma;
    let rho = steadystate::steady_state(&d, FockSpace::symmetric(4).unwrap()).unwrap();
    for mode in Mode::BOTH {
        let n = observables::g2(&rho, mode).unwrap();
        let a = analytic::g2_analytic(&d, mode).unwrap();
        assert!((a - n).abs() < 0.01 * n, "{mode}: analytic {a}, numeric {n}");
    }
}

#[test]
fn static_resonator_modes_agree() {
    // Without rotation the two modes share their statistics in both routes.
    let mut p = presets::paper();
    p.detuning = -2.0e6;
    let d = p.derive().unwrap();
    let a = analytic::AnalyticCorrelations::compute(&d).unwrap();
    let rho = steadystate::steady_state(&d, FockSpace::symmetric(4).unwrap()).unwrap();
    assert!(a.g2_cw.unwrap() > 1.0 && a.g2_ccw.unwrap() > 1.0);
    for mode in Mode::BOTH {
        assert!(observables::g2(&rho, mode).unwrap() > 1.0);
    }
}

#[test]
fn regime_map_contains_the_scan_minimum() {
    // The 1PB region of the 2D map at the fastest spin covers the Δ₀ of the
    // 1D minimum.
    let mut p = presets::paper();
    p.angular_velocity = FAST_SPIN;
    let mut scan = SweepSpec::new("scan", p.clone(), vec![Axis::new(Parameter::Detuning, -6e6, 6e6, 61)]);
    scan.oracle = Oracle::Numeric;
    let r = sweep::run(&scan, 2).unwrap();
    let (k, _) = sweep::find_extremum(&r, Observable::G2, Mode::Cw, sweep::Extremum::Min).unwrap();
    let at = r.records[k].detuning;

    let mut map = SweepSpec::new(
        "map",
        p,
        vec![
            Axis::new(Parameter::Detuning, -6e6, 6e6, 61),
            Axis::new(Parameter::AngularVelocity, 0.0, FAST_SPIN, 4),
        ],
    );
    map.oracle = Oracle::Numeric;
    let m = sweep::run(&map, 2).unwrap();
    let cell = m
        .records
        .iter()
        .find(|r| r.detuning == at && r.angular_velocity == FAST_SPIN)
        .unwrap();
    assert_eq!(cell.stats(Mode::Cw).unwrap().regime, Some(observables::Regime::OnePb));
}
