//! Physical parameters of the spinning resonator and their conversion into
//! angular-frequency rates.
//!
//! All derived rates are in rad/s. The resonator spins counter-clockwise with
//! angular velocity `Ω ≥ 0`, which blue-shifts the CW mode by `|Δ_sag|` and
//! red-shifts the CCW mode by the same amount.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::Mode;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("invalid physical parameters: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("derived quantity `{0}` is not finite")]
    NonFinite(&'static str),
}

/// Raw experimental knobs, SI units throughout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// Vacuum wavelength λ (m).
    pub wavelength: f64,
    /// Loaded quality factor Q.
    pub quality_factor: f64,
    /// Effective mode volume V_eff (m³).
    pub mode_volume: f64,
    /// Linear refractive index n₁.
    pub refractive_index: f64,
    /// Nonlinear (Kerr) index n₂ (m²/W).
    pub nonlinear_index: f64,
    /// Material dispersion dn₁/dλ (1/m).
    #[serde(default)]
    pub dispersion: f64,
    /// Drive power P_in (W).
    pub input_power: f64,
    /// Resonator radius R (m).
    pub radius: f64,
    /// Angular velocity Ω of the counter-clockwise rotation (rad/s).
    #[serde(default)]
    pub angular_velocity: f64,
    /// Cavity-drive detuning Δ₀ = ω_c − ω_l (rad/s).
    #[serde(default)]
    pub detuning: f64,
    /// Backscattering coupling J between CW and CCW (rad/s).
    #[serde(default)]
    pub backscattering: f64,
    /// Which mode the external field drives.
    #[serde(default = "default_drive")]
    pub drive_direction: Mode,
}

fn default_drive() -> Mode {
    Mode::Cw
}

impl PhysicalParams {
    /// Check every invariant and report all violations at once.
    pub fn validate(&self) -> Result<(), ParamsError> {
        let mut errs = Vec::new();
        let positive = [
            ("wavelength", self.wavelength),
            ("quality_factor", self.quality_factor),
            ("mode_volume", self.mode_volume),
            ("refractive_index", self.refractive_index),
            ("radius", self.radius),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!("{name} must be finite and > 0 (got {v})"));
            }
        }
        let non_negative = [
            ("input_power", self.input_power),
            ("nonlinear_index", self.nonlinear_index),
            ("backscattering", self.backscattering),
            ("angular_velocity", self.angular_velocity),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                errs.push(format!("{name} must be finite and >= 0 (got {v})"));
            }
        }
        for (name, v) in [("dispersion", self.dispersion), ("detuning", self.detuning)] {
            if !v.is_finite() {
                errs.push(format!("{name} must be finite (got {v})"));
            }
        }
        if self.refractive_index.is_finite() && self.refractive_index <= 1.0 {
            errs.push(format!(
                "refractive_index must exceed 1 (got {})",
                self.refractive_index
            ));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ParamsError::Invalid(errs))
        }
    }

    /// Static resonance frequency ω_c = 2πc/λ.
    pub fn resonance_frequency(&self) -> f64 {
        2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / self.wavelength
    }

    /// Total loss rate γ = ω_c/Q.
    pub fn loss_rate(&self) -> f64 {
        self.resonance_frequency() / self.quality_factor
    }

    /// Magnitude of the Sagnac-Fizeau shift for the current Ω.
    pub fn sagnac_shift(&self) -> f64 {
        let n = self.refractive_index;
        let factor = 1.0 - 1.0 / (n * n) - self.wavelength / n * self.dispersion;
        (n * self.radius * self.angular_velocity * self.resonance_frequency() / SPEED_OF_LIGHT
            * factor)
            .abs()
    }

    pub fn derive(&self) -> Result<DerivedParams, ParamsError> {
        self.validate()?;
        let omega_c = self.resonance_frequency();
        let gamma = omega_c / self.quality_factor;
        let n1 = self.refractive_index;
        let chi = HBAR * omega_c * omega_c * SPEED_OF_LIGHT * self.nonlinear_index
            / (n1 * n1 * self.mode_volume);
        // The drive frequency is taken equal to ω_c; |Δ₀|/ω_c is below 1e-8 here.
        let xi = (gamma * self.input_power / (HBAR * omega_c)).sqrt();
        let d = DerivedParams {
            omega_c,
            gamma,
            chi,
            xi,
            sagnac: self.sagnac_shift(),
            detuning: self.detuning,
            backscattering: self.backscattering,
            drive: self.drive_direction,
        };
        d.check_finite()?;
        Ok(d)
    }
}

/// Model rates in rad/s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub omega_c: f64,
    /// Cavity loss rate γ (shared by both modes).
    pub gamma: f64,
    /// Kerr coefficient χ.
    pub chi: f64,
    /// Drive amplitude ξ.
    pub xi: f64,
    /// Sagnac shift applied to the CW mode; the CCW mode receives `-sagnac`.
    pub sagnac: f64,
    /// Δ₀.
    pub detuning: f64,
    /// J.
    pub backscattering: f64,
    pub drive: Mode,
}

impl DerivedParams {
    fn check_finite(&self) -> Result<(), ParamsError> {
        let fields = [
            ("omega_c", self.omega_c),
            ("gamma", self.gamma),
            ("chi", self.chi),
            ("xi", self.xi),
            ("sagnac", self.sagnac),
            ("detuning", self.detuning),
            ("backscattering", self.backscattering),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(ParamsError::NonFinite(name));
            }
        }
        Ok(())
    }

    /// Signed Sagnac shift seen by `mode`.
    pub fn mode_shift(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Cw => self.sagnac,
            Mode::Ccw => -self.sagnac,
        }
    }

    /// Bare detuning of `mode` including the rotation shift.
    pub fn mode_detuning(&self, mode: Mode) -> f64 {
        self.detuning + self.mode_shift(mode)
    }

    /// Photon-number normalization n₀ = 4ξ²/γ² of the excitation spectra.
    pub fn spectrum_normalization(&self) -> f64 {
        4.0 * self.xi * self.xi / (self.gamma * self.gamma)
    }

    pub fn chi_over_gamma(&self) -> f64 {
        self.chi / self.gamma
    }

    pub fn xi_over_gamma(&self) -> f64 {
        self.xi / self.gamma
    }

    /// Stable short digest of every field, carried by solver outputs so
    /// records can be traced back to their inputs.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for v in [
            self.omega_c,
            self.gamma,
            self.chi,
            self.xi,
            self.sagnac,
            self.detuning,
            self.backscattering,
        ] {
            h.update(v.to_bits().to_le_bytes());
        }
        h.update([match self.drive {
            Mode::Cw => 0u8,
            Mode::Ccw => 1u8,
        }]);
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use approx::assert_relative_eq;

    #[test]
    fn paper_ratios() {
        let d = presets::paper().derive().unwrap();
        assert_relative_eq!(d.chi_over_gamma(), 9.5, max_relative = 0.02);
        assert_relative_eq!(d.xi_over_gamma(), 0.25, max_relative = 0.02);
        // Direct evaluation of the three closed forms.
        assert_relative_eq!(d.gamma, 2.430518e5, max_relative = 1e-5);
        assert_relative_eq!(d.chi, 2.305357e6, max_relative = 1e-5);
    }

    #[test]
    fn static_resonator_has_no_shift() {
        let d = presets::paper().derive().unwrap();
        assert_eq!(d.sagnac, 0.0);
    }

    #[test]
    fn shift_at_thirty_kilohertz() {
        let mut p = presets::paper();
        p.angular_velocity = 30e3;
        // 1.4 * 30e-6 * 3e4 * 2π/1550e-9 * (1 - 1/1.96)
        let expected = 1.4 * 30e-6 * 3e4 * 2.0 * std::f64::consts::PI / 1550e-9
            * (1.0 - 1.0 / 1.96);
        let d = p.derive().unwrap();
        assert_relative_eq!(d.sagnac, expected, max_relative = 1e-12);
        assert_relative_eq!(d.sagnac, 2.50e6, max_relative = 1e-3);
        assert_eq!(d.mode_shift(Mode::Cw), d.sagnac);
        assert_eq!(d.mode_shift(Mode::Ccw), -d.sagnac);
    }

    #[test]
    fn rejects_index_below_one() {
        let mut p = presets::paper();
        p.refractive_index = 1.0;
        assert!(matches!(p.derive(), Err(ParamsError::Invalid(_))));
    }

    #[test]
    fn reports_every_violation() {
        let mut p = presets::paper();
        p.wavelength = -1.0;
        p.quality_factor = 0.0;
        p.input_power = -2.0;
        match p.validate() {
            Err(ParamsError::Invalid(v)) => assert_eq!(v.len(), 3, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hash_tracks_inputs() {
        let a = presets::paper().derive().unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.detuning += 1.0;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn shift_is_linear_in_omega(omega in 0.0f64..1e5, k in 0.0f64..10.0) {
                let mut p = presets::paper();
                p.angular_velocity = omega;
                let base = p.derive().unwrap().sagnac;
                p.angular_velocity = k * omega;
                let scaled = p.derive().unwrap().sagnac;
                prop_assert!((scaled - k * base).abs() <= 1e-12 * (1.0 + scaled.abs()));
            }

            #[test]
            fn drive_scales_as_root_power(power in 1e-18f64..1e-12, omega in 0.0f64..1e5) {
                let mut p = presets::paper();
                p.input_power = power;
                let a = p.derive().unwrap();
                p.input_power = 4.0 * power;
                p.angular_velocity = omega;
                let b = p.derive().unwrap();
                prop_assert!((b.xi / a.xi - 2.0).abs() < 1e-12);
                prop_assert_eq!(a.chi, b.chi);
            }

            #[test]
            fn drive_direction_keeps_magnitudes(omega in 0.0f64..1e5, det in -1e7f64..1e7) {
                let mut p = presets::paper();
                p.angular_velocity = omega;
                p.detuning = det;
                let a = p.derive().unwrap();
                p.drive_direction = Mode::Ccw;
                let b = p.derive().unwrap();
                prop_assert_eq!(a.gamma, b.gamma);
                prop_assert_eq!(a.chi, b.chi);
                prop_assert_eq!(a.xi, b.xi);
                prop_assert_eq!(a.sagnac, b.sagnac);
            }
        }
    }
}
