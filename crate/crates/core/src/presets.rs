//! Reference parameter set and the grids that produce each figure dataset.

use crate::params::PhysicalParams;
use crate::sweep::{Axis, Oracle, Parameter, SweepSpec};
use crate::Mode;

/// Spin rates (rad/s) used for families of curves.
pub const SPIN_RATES: [f64; 4] = [0.0, 10e3, 20e3, 30e3];
/// Fastest preset spin rate.
pub const FAST_SPIN: f64 = 30e3;
/// Detuning where the CW mode is blockaded and the CCW mode shows 2PB.
pub const CHIRAL_DETUNING: f64 = -2.3e6;
/// Detuning where the CW mode is blockaded and the CCW mode shows PIT.
pub const CHIRAL_PIT_DETUNING: f64 = -3.5e6;
/// Off-resonant detuning used for the spin-controlled switch.
///
/// Calibrated: the Δ₀ whose static `(g², g³)` on the driven mode best matches
/// `(21.55, 8.58)`, found with [`crate::sweep::calibrate_detuning`] at cutoff 4.
pub const SWITCH_DETUNING: f64 = -2.103e6;
/// Static `(g², g³)` that defines [`SWITCH_DETUNING`].
pub const SWITCH_TARGET: (f64, f64) = (21.55, 8.58);
/// Detuning range of every Δ₀ scan (rad/s).
pub const DETUNING_RANGE: (f64, f64) = (-6e6, 6e6);
pub const SCAN_POINTS: usize = 241;
pub const MAP_POINTS: usize = 61;

/// Silica microtoroid driven from the CW port at 2 fW, with `J = 2γ`.
pub fn paper() -> PhysicalParams {
    let mut p = PhysicalParams {
        wavelength: 1550e-9,
        quality_factor: 5e9,
        mode_volume: 310e-18,
        refractive_index: 1.4,
        nonlinear_index: 3e-14,
        dispersion: 0.0,
        input_power: 2e-15,
        radius: 30e-6,
        angular_velocity: 0.0,
        detuning: 0.0,
        backscattering: 0.0,
        drive_direction: Mode::Cw,
    };
    p.backscattering = 2.0 * p.loss_rate();
    p
}

/// Names accepted by [`figure`].
pub const FIGURES: [&str; 9] = [
    "fig1b", "fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e",
];

fn detuning_axis(count: usize) -> Axis {
    Axis::new(Parameter::Detuning, DETUNING_RANGE.0, DETUNING_RANGE.1, count)
}

fn spin_axis(count: usize) -> Axis {
    Axis::new(Parameter::AngularVelocity, 0.0, FAST_SPIN, count)
}

fn spec(name: &str, base: PhysicalParams, axes: Vec<Axis>, oracle: Oracle) -> SweepSpec {
    let mut s = SweepSpec::new(name, base, axes);
    s.oracle = oracle;
    s
}

/// Datasets behind a named figure panel; most panels have exactly one.
pub fn figure(name: &str) -> Option<Vec<SweepSpec>> {
    let base = paper();
    let gamma = base.loss_rate();
    let specs = match name {
        "fig1b" => vec![spec(
            name,
            base,
            vec![detuning_axis(SCAN_POINTS), spin_axis(SPIN_RATES.len())],
            Oracle::Numeric,
        )],
        "fig2a" => vec![spec(
            name,
            base,
            vec![detuning_axis(SCAN_POINTS), spin_axis(2)],
            Oracle::Both,
        )],
        "fig2b" => {
            let mut b = base;
            b.angular_velocity = FAST_SPIN;
            vec![spec(name, b, vec![detuning_axis(SCAN_POINTS)], Oracle::Both)]
        }
        "fig2c" => {
            let mut b = base;
            b.angular_velocity = FAST_SPIN;
            let mut s = spec(
                name,
                b,
                vec![Axis::new(Parameter::Detuning, CHIRAL_PIT_DETUNING, CHIRAL_DETUNING, 2)],
                Oracle::Numeric,
            );
            s.histograms = true;
            vec![s]
        }
        "fig3a" => vec![spec(
            name,
            base,
            vec![
                detuning_axis(SCAN_POINTS),
                Axis::new(Parameter::Backscattering, 0.0, 2.0 * gamma, 3),
            ],
            Oracle::Both,
        )],
        "fig3b" => {
            let mut ideal = base.clone();
            ideal.backscattering = 0.0;
            vec![
                spec(
                    "fig3b-j2",
                    base,
                    vec![detuning_axis(SCAN_POINTS), spin_axis(SPIN_RATES.len())],
                    Oracle::Both,
                ),
                spec(
                    "fig3b-j0",
                    ideal,
                    vec![detuning_axis(SCAN_POINTS), spin_axis(SPIN_RATES.len())],
                    Oracle::Both,
                ),
            ]
        }
        "fig3c" => vec![spec(
            name,
            base,
            vec![detuning_axis(MAP_POINTS), spin_axis(MAP_POINTS)],
            Oracle::Numeric,
        )],
        "fig3d" => {
            let mut b = base;
            b.detuning = SWITCH_DETUNING;
            vec![spec(name, b, vec![spin_axis(MAP_POINTS)], Oracle::Both)]
        }
        "fig3e" => {
            let mut b = base;
            b.detuning = SWITCH_DETUNING;
            let mut s = spec(name, b, vec![spin_axis(SPIN_RATES.len())], Oracle::Numeric);
            s.histograms = true;
            vec![s]
        }
        _ => return None,
    };
    Some(specs)
}
