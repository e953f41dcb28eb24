//! Weak-drive steady state from the non-Hermitian effective Hamiltonian.
//!
//! The state is truncated at three total excitations,
//! `|ψ⟩ = Σ_{N≤3} Σ_m C_{m,N−m} |m, N−m⟩` with `C₀₀ = 1`, and every amplitude
//! of order N is sourced only by amplitudes of order N−1. Setting the time
//! derivatives of the amplitude equations to zero gives closed forms for all
//! nine amplitudes, and from them the equal-time correlations in the
//! `ξ → 0` limit. These are independent of the master-equation route and are
//! used to cross-check it.
//!
//! Formulas are written for a CW drive. A CCW drive is handled by relabeling
//! the modes, which flips the sign of the Sagnac shift.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::DerivedParams;
use crate::Mode;

/// Relative size below which a denominator counts as a resonant zero.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;
/// Relative amplitude size below which a mode counts as empty.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticError {
    #[error("resonant degeneracy: denominator `{0}` vanishes")]
    Degenerate(&'static str),
    #[error("g{order}({mode}) undefined: the mode holds no photons at this order")]
    Undefined { mode: Mode, order: u32 },
    #[error("the closed form for g2({0}) requires J > 0")]
    NoBackscattering(Mode),
}

/// Complex level energies and the compound denominators built from them.
///
/// `levels[k]` is the diagonal element of the effective Hamiltonian on the
/// k-th basis state in the order |1,0⟩ |0,1⟩ |2,0⟩ |1,1⟩ |0,2⟩ |3,0⟩ |2,1⟩
/// |1,2⟩ |0,3⟩ (driven mode first).
#[derive(Clone, Debug, PartialEq)]
pub struct DetuningLadder {
    pub levels: [C64; 9],
    /// η₁ = Δ₁Δ₂ − J², η₂ = Δ₃Δ₄ − 2J², η₃ = Δ₄Δ₅ − 2J²,
    /// η₄ = Δ₆Δ₇ − 3J², η₅ = Δ₈Δ₉ − 3J².
    pub eta: [C64; 5],
    /// ς₁ = Δ₅η₂ − 2J²Δ₃, ς₂ = η₄η₅ − 4J²Δ₆Δ₉.
    pub sigma: [C64; 2],
}

impl DetuningLadder {
    /// Level `Δ_k` with the conventional 1-based label.
    pub fn delta(&self, k: usize) -> C64 {
        self.levels[k - 1]
    }
}

/// Ladder for a CW-driven resonator whose CW mode is shifted by `shift`.
fn ladder_with_shift(d: &DerivedParams, shift: f64) -> DetuningLadder {
    let half_loss = C64::new(0.0, -0.5 * d.gamma);
    let chi = C64::new(d.chi, 0.0);
    let j2 = C64::new(d.backscattering * d.backscattering, 0.0);
    let d1 = C64::new(d.detuning + shift, 0.0) + half_loss;
    let d2 = C64::new(d.detuning - shift, 0.0) + half_loss;
    let d3 = 2.0 * (d1 + chi);
    let d4 = d1 + d2 + 2.0 * chi;
    let d5 = 2.0 * (d2 + chi);
    let d6 = 3.0 * (d1 + 2.0 * chi);
    let d7 = 2.0 * d1 + d2 + 6.0 * chi;
    let d8 = d1 + 2.0 * d2 + 6.0 * chi;
    let d9 = 3.0 * (d2 + 2.0 * chi);
    let eta = [
        d1 * d2 - j2,
        d3 * d4 - 2.0 * j2,
        d4 * d5 - 2.0 * j2,
        d6 * d7 - 3.0 * j2,
        d8 * d9 - 3.0 * j2,
    ];
    let sigma = [d5 * eta[1] - 2.0 * j2 * d3, eta[3] * eta[4] - 4.0 * j2 * d6 * d9];
    DetuningLadder {
        levels: [d1, d2, d3, d4, d5, d6, d7, d8, d9],
        eta,
        sigma,
    }
}

fn driven_frame_shift(d: &DerivedParams) -> f64 {
    match d.drive {
        Mode::Cw => d.sagnac,
        Mode::Ccw => -d.sagnac,
    }
}

/// Level ladder in the driven-mode-first frame.
pub fn ladder(d: &DerivedParams) -> DetuningLadder {
    ladder_with_shift(d, driven_frame_shift(d))
}

/// The nine weak-drive amplitudes, indexed by physical photon numbers
/// `(m_cw, n_ccw)`. `C₀₀ = 1` and the set is not renormalized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSet {
    pub c10: C64,
    pub c01: C64,
    pub c20: C64,
    pub c11: C64,
    pub c02: C64,
    pub c30: C64,
    pub c21: C64,
    pub c12: C64,
    pub c03: C64,
}

impl AmplitudeSet {
    fn swapped(self) -> Self {
        AmplitudeSet {
            c10: self.c01,
            c01: self.c10,
            c20: self.c02,
            c11: self.c11,
            c02: self.c20,
            c30: self.c03,
            c21: self.c12,
            c12: self.c21,
            c03: self.c30,
        }
    }

    /// `C_{m,n}`; `C₀₀ = 1`, anything above three excitations is zero.
    pub fn get(&self, m: usize, n: usize) -> C64 {
        match (m, n) {
            (0, 0) => C64::new(1.0, 0.0),
            (1, 0) => self.c10,
            (0, 1) => self.c01,
            (2, 0) => self.c20,
            (1, 1) => self.c11,
            (0, 2) => self.c02,
            (3, 0) => self.c30,
            (2, 1) => self.c21,
            (1, 2) => self.c12,
            (0, 3) => self.c03,
            _ => C64::new(0.0, 0.0),
        }
    }

    /// `P_mn = |C_mn|²`.
    pub fn probability(&self, m: usize, n: usize) -> f64 {
        self.get(m, n).norm_sqr()
    }

    /// Amplitude with `k` photons in `mode` and none in the other one.
    pub fn single_mode(&self, mode: Mode, k: usize) -> C64 {
        match mode {
            Mode::Cw => self.get(k, 0),
            Mode::Ccw => self.get(0, k),
        }
    }
}

fn check_denominator(v: C64, scale: f64, power: i32, name: &'static str) -> Result<(), AnalyticError> {
    if !(v.norm() >= DENOMINATOR_FLOOR * scale.powi(power)) {
        return Err(AnalyticError::Degenerate(name));
    }
    Ok(())
}

fn amplitudes_cw_frame(d: &DerivedParams, l: &DetuningLadder) -> Result<AmplitudeSet, AnalyticError> {
    let scale = [d.gamma, d.detuning.abs(), d.sagnac, d.backscattering, d.chi]
        .into_iter()
        .fold(0.0, f64::max);
    check_denominator(l.eta[0], scale, 2, "eta1")?;
    check_denominator(l.sigma[0], scale, 3, "sigma1")?;
    check_denominator(l.sigma[1], scale, 4, "sigma2")?;

    let xi = C64::new(d.xi, 0.0);
    let j = C64::new(d.backscattering, 0.0);
    let j2 = j * j;
    let r2 = 2f64.sqrt();
    let r3 = 3f64.sqrt();
    let [_, d2, d3, _, d5, d6, d7, _, d9] = l.levels;
    let [eta1, _, eta3, eta4, eta5] = l.eta;
    let [s1, s2] = l.sigma;

    let c10 = -xi * d2 / eta1;
    let c01 = j * xi / eta1;
    let c20 = -r2 * xi * (eta3 * c10 - j * d5 * c01) / s1;
    let c11 = d5 * xi * (2.0 * j * c10 - d3 * c01) / s1;
    let c02 = r2 * j * xi * (d3 * c01 - 2.0 * j * c10) / s1;
    let c30 = r3 * xi * (-(eta5 * d7 - 4.0 * j2 * d9) * c20 + r2 * j * eta5 * c11
        - 2.0 * j2 * d9 * c02)
        / s2;
    let c21 = xi * (3.0 * j * eta5 * c20 - r2 * eta5 * d6 * c11 + 2.0 * j * d6 * d9 * c02) / s2;
    let c12 = xi * d9 * (-6.0 * j2 * c20 + 2.0 * r2 * j * d6 * c11 - eta4 * c02) / s2;
    let c03 = r3 * xi * j * (6.0 * j2 * c20 - 2.0 * r2 * j * d6 * c11 + eta4 * c02) / s2;
    Ok(AmplitudeSet {
        c10,
        c01,
        c20,
        c11,
        c02,
        c30,
        c21,
        c12,
        c03,
    })
}

/// Steady-state amplitudes of the truncated weak-drive expansion.
pub fn steady_amplitudes(d: &DerivedParams) -> Result<AmplitudeSet, AnalyticError> {
    let amps = amplitudes_cw_frame(d, &ladder(d))?;
    Ok(match d.drive {
        Mode::Cw => amps,
        Mode::Ccw => amps.swapped(),
    })
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// `k! P_k / P_1^k` for the single-mode amplitudes of `mode`.
fn correlation(amps: &AmplitudeSet, d: &DerivedParams, mode: Mode, order: u32) -> Result<f64, AnalyticError> {
    let one = amps.single_mode(mode, 1);
    // amplitudes scale as ξ/γ per excitation
    if !(one.norm() > AMPLITUDE_FLOOR * d.xi / d.gamma) {
        return Err(AnalyticError::Undefined { mode, order });
    }
    let p1 = one.norm_sqr();
    let pk = amps.single_mode(mode, order as usize).norm_sqr();
    Ok(factorial(order) * pk / p1.powi(order as i32))
}

/// `g²(0) ≃ 2P₂/P₁²` from the weak-drive amplitudes.
pub fn g2_analytic(d: &DerivedParams, mode: Mode) -> Result<f64, AnalyticError> {
    correlation(&steady_amplitudes(d)?, d, mode, 2)
}

/// `g³(0) ≃ 6P₃/P₁³` from the weak-drive amplitudes.
pub fn g3_analytic(d: &DerivedParams, mode: Mode) -> Result<f64, AnalyticError> {
    correlation(&steady_amplitudes(d)?, d, mode, 3)
}

/// Single-mode Kerr result for the driven mode without backscattering:
/// `((Δ₀+Δ_sag)² + γ²/4) / ((Δ₀+Δ_sag+χ)² + γ²/4)`.
pub fn g2_single_mode(d: &DerivedParams) -> f64 {
    let det = d.mode_detuning(d.drive);
    let q = 0.25 * d.gamma * d.gamma;
    (det * det + q) / ((det + d.chi).powi(2) + q)
}

/// Closed forms of `2P₂/P₁²` written directly in terms of the ladder.
///
/// Driven mode: `4|η₁(Δ₂Δ₄Δ₅ + 2J²χ)/(ς₁Δ₂²)|²`.
/// Undriven mode: `16|η₁(Δ₄ − χ)/ς₁|²`, only meaningful for `J > 0`.
pub fn g2_closed_form(d: &DerivedParams, mode: Mode) -> Result<f64, AnalyticError> {
    let l = ladder(d);
    let chi = C64::new(d.chi, 0.0);
    let j2 = C64::new(d.backscattering * d.backscattering, 0.0);
    let (d2, d4, d5) = (l.delta(2), l.delta(4), l.delta(5));
    let (eta1, s1) = (l.eta[0], l.sigma[0]);
    if mode == d.drive {
        Ok(4.0 * (eta1 * (d2 * d4 * d5 + 2.0 * j2 * chi) / (s1 * d2 * d2)).norm_sqr())
    } else if d.backscattering == 0.0 {
        Err(AnalyticError::NoBackscattering(mode))
    } else {
        Ok(16.0 * (eta1 * j2 * (d4 - chi) / (s1 * j2)).norm_sqr())
    }
}

/// Analytic correlations for both modes; `None` where undefined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticCorrelations {
    pub g2_cw: Option<f64>,
    pub g2_ccw: Option<f64>,
    pub g3_cw: Option<f64>,
    pub g3_ccw: Option<f64>,
}

impl AnalyticCorrelations {
    pub fn compute(d: &DerivedParams) -> Result<Self, AnalyticError> {
        let amps = steady_amplitudes(d)?;
        let get = |mode, order| correlation(&amps, d, mode, order).ok();
        Ok(AnalyticCorrelations {
            g2_cw: get(Mode::Cw, 2),
            g2_ccw: get(Mode::Ccw, 2),
            g3_cw: get(Mode::Cw, 3),
            g3_ccw: get(Mode::Ccw, 3),
        })
    }

    pub fn g2(&self, mode: Mode) -> Option<f64> {
        match mode {
            Mode::Cw => self.g2_cw,
            Mode::Ccw => self.g2_ccw,
        }
    }

    pub fn g3(&self, mode: Mode) -> Option<f64> {
        match mode {
            Mode::Cw => self.g3_cw,
            Mode::Ccw => self.g3_ccw,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use approx::assert_relative_eq;

    fn params(omega: f64, detuning: f64) -> DerivedParams {
        let mut p = presets::paper();
        p.angular_velocity = omega;
        p.detuning = detuning;
        p.derive().unwrap()
    }

    #[test]
    fn ladder_identities() {
        let d = params(30e3, -2.3e6);
        let l = ladder(&d);
        let chi = C64::new(d.chi, 0.0);
        assert_relative_eq!((l.delta(1) - l.delta(2)).re, 2.0 * d.sagnac, max_relative = 1e-14);
        assert_eq!(l.delta(3), 2.0 * (l.delta(1) + chi));
        assert_eq!(l.delta(9), 3.0 * (l.delta(2) + 2.0 * chi));
        assert_eq!(l.delta(1), C64::new(d.detuning + d.sagnac, -0.5 * d.gamma));
        // plug-in value at the chiral blockade point
        assert_relative_eq!(l.delta(1).re, 0.2017e6, max_relative = 1e-3);
        assert_relative_eq!(l.delta(1).im, -0.1215e6, max_relative = 1e-3);
    }

    #[test]
    fn static_ladder_is_degenerate() {
        let mut d = params(0.0, 1.1e6);
        let l = ladder(&d);
        assert_eq!(l.delta(1), l.delta(2));
        d.chi = 0.0;
        let l = ladder(&d);
        assert_eq!(l.delta(3), l.delta(4));
        assert_eq!(l.delta(4), l.delta(5));
    }

    #[test]
    fn no_backscattering_decouples_ccw() {
        let mut d = params(30e3, -2.3e6);
        d.backscattering = 0.0;
        let a = steady_amplitudes(&d).unwrap();
        for v in [a.c01, a.c11, a.c02, a.c21, a.c12, a.c03] {
            assert_eq!(v, C64::new(0.0, 0.0));
        }
        let expected = -C64::new(d.xi, 0.0) / ladder(&d).delta(1);
        assert_relative_eq!(a.c10.re, expected.re, max_relative = 1e-14);
        assert_relative_eq!(a.c10.im, expected.im, max_relative = 1e-14);
        assert_eq!(
            g2_analytic(&d, Mode::Ccw),
            Err(AnalyticError::Undefined { mode: Mode::Ccw, order: 2 })
        );
        assert_eq!(g2_closed_form(&d, Mode::Ccw), Err(AnalyticError::NoBackscattering(Mode::Ccw)));
    }

    #[test]
    fn no_drive_no_amplitudes() {
        let mut d = params(30e3, -2.3e6);
        d.xi = 0.0;
        let a = steady_amplitudes(&d).unwrap();
        for (m, n) in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)] {
            assert_eq!(a.get(m, n), C64::new(0.0, 0.0));
        }
        assert!(g2_analytic(&d, Mode::Cw).is_err());
    }

    #[test]
    fn linear_single_mode_is_coherent() {
        let mut d = params(30e3, -1.0e6);
        d.chi = 0.0;
        d.backscattering = 0.0;
        assert_relative_eq!(g2_analytic(&d, Mode::Cw).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(g2_single_mode(&d), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn single_mode_limit() {
        for det in [-3.5e6, -2.3e6, -0.4e6, 0.0, 1.7e6] {
            let mut d = params(30e3, det);
            d.backscattering = 0.0;
            let a = g2_analytic(&d, Mode::Cw).unwrap();
            assert!((a - g2_single_mode(&d)).abs() <= 1e-10 * a.max(1.0));
        }
    }

    #[test]
    fn closed_forms_match_probability_ratios() {
        for (omega, det) in [(30e3, -2.3e6), (30e3, -3.5e6), (0.0, 0.8e6), (10e3, -2.103e6)] {
            let d = params(omega, det);
            for mode in Mode::BOTH {
                let a = g2_analytic(&d, mode).unwrap();
                let b = g2_closed_form(&d, mode).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-10);
            }
        }
    }

    /// Solve the amplitude equations order by order on the full effective
    /// Hamiltonian: `H₀ C_N = −ξ d† C_{N−1}` within each excitation number.
    fn direct_amplitudes(d: &DerivedParams) -> Vec<((usize, usize), C64)> {
        use crate::fock::FockSpace;
        use nalgebra::{DMatrix, DVector};
        let space = FockSpace::symmetric(3).unwrap();
        let mut undriven = d.clone();
        undriven.xi = 0.0;
        let h0 = crate::model::effective_hamiltonian(&undriven, space);
        let up = space.creation(d.drive).scale(C64::new(d.xi, 0.0));
        let mut known: Vec<((usize, usize), C64)> = vec![((0, 0), C64::new(1.0, 0.0))];
        for order in 1..=3 {
            let states: Vec<(usize, usize)> = (0..=order).rev().map(|m| (m, order - m)).collect();
            let n = states.len();
            let block = DMatrix::from_fn(n, n, |r, c| {
                h0.get(space.index(states[r].0, states[r].1), space.index(states[c].0, states[c].1))
            });
            let rhs = DVector::from_fn(n, |r, _| {
                let row = space.index(states[r].0, states[r].1);
                -known
                    .iter()
                    .filter(|((m, k), _)| m + k == order - 1)
                    .map(|&((m, k), v)| up.get(row, space.index(m, k)) * v)
                    .sum::<C64>()
            });
            let sol = block.lu().solve(&rhs).unwrap();
            known.extend(states.iter().copied().zip(sol.iter().copied()));
        }
        known
    }

    #[test]
    fn closed_forms_solve_the_amplitude_equations() {
        for (omega, det, drive) in [
            (30e3, -2.3e6, Mode::Cw),
            (30e3, -3.5e6, Mode::Cw),
            (10e3, 1.1e6, Mode::Ccw),
            (0.0, -2.103e6, Mode::Cw),
        ] {
            let mut d = params(omega, det);
            d.drive = drive;
            let a = steady_amplitudes(&d).unwrap();
            for ((m, n), v) in direct_amplitudes(&d) {
                let got = a.get(m, n);
                assert!(
                    (got - v).norm() <= 1e-10 * v.norm().max(1e-300),
                    "C{m}{n}: {got} vs {v} at ({omega}, {det}, {drive})"
                );
            }
        }
    }

    #[test]
    fn amplitudes_fall_with_excitation_number() {
        let d = params(30e3, -2.3e6);
        let a = steady_amplitudes(&d).unwrap();
        assert!(a.c20.norm() < a.c10.norm());
        assert!(a.c30.norm() < a.c20.norm());
    }

    #[test]
    fn correlations_do_not_depend_on_drive_strength() {
        let d = params(30e3, -2.3e6);
        let mut half = d.clone();
        half.xi *= 0.5;
        for mode in Mode::BOTH {
            assert_eq!(g2_analytic(&d, mode), g2_analytic(&half, mode));
            assert_eq!(g3_analytic(&d, mode), g3_analytic(&half, mode));
        }
    }

    #[test]
    fn ccw_drive_is_a_relabeling() {
        // Static resonator: driving CCW is the mirror image of driving CW.
        let d = params(0.0, -1.2e6);
        let mut mirrored = d.clone();
        mirrored.drive = Mode::Ccw;
        let a = steady_amplitudes(&d).unwrap();
        let b = steady_amplitudes(&mirrored).unwrap();
        for (m, n) in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)] {
            assert_eq!(a.get(m, n), b.get(n, m));
        }
        // Spinning: CCW drive sees the CCW mode's red-shifted resonance.
        let d = params(30e3, 2.5e6);
        let mut ccw = d.clone();
        ccw.drive = Mode::Ccw;
        let mut flipped = d.clone();
        flipped.sagnac = -d.sagnac;
        let a = steady_amplitudes(&flipped).unwrap();
        let b = steady_amplitudes(&ccw).unwrap();
        assert_eq!(a.c10, b.c01);
        assert_eq!(a.c21, b.c12);
    }
}
