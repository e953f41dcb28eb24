//! Intracavity observables of a steady state: photon numbers, excitation
//! spectra, equal-time correlations, photon-number distributions and the
//! blockade regime they imply.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::DerivedParams;
use crate::steadystate::DensityMatrix;
use crate::Mode;

/// Mean photon number below which `g⁽ᵏ⁾(0)` is reported as undefined.
pub const PHOTON_FLOOR: f64 = 1e-12;
/// Half-width of the band around 1 inside which no regime is assigned.
pub const REGIME_TIE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum ObservableError {
    #[error("g{order}({mode}) undefined: mean photon number {mean:.3e} below floor")]
    UndefinedCorrelation { mode: Mode, order: u32, mean: f64 },
    #[error("g{order}({mode}) needs a cutoff of at least {order} photons (have {cutoff})")]
    Truncation { mode: Mode, order: u32, cutoff: usize },
    #[error("excitation spectrum undefined without drive (ξ = 0)")]
    NoDrive,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Single-photon blockade, `g² < 1`.
    #[serde(rename = "1PB")]
    OnePb,
    /// Two-photon blockade, `g² > 1` and `g³ < 1`.
    #[serde(rename = "2PB")]
    TwoPb,
    /// Photon-induced tunneling, `g² > 1` and `g³ > 1`.
    #[serde(rename = "PIT")]
    Pit,
    #[serde(rename = "NONE")]
    None,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::OnePb => "1PB",
            Regime::TwoPb => "2PB",
            Regime::Pit => "PIT",
            Regime::None => "NONE",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "1PB" => Ok(Regime::OnePb),
            "2PB" => Ok(Regime::TwoPb),
            "PIT" => Ok(Regime::Pit),
            "NONE" => Ok(Regime::None),
            other => Err(format!("unknown regime `{other}`")),
        }
    }
}

pub fn classify(g2: f64, g3: f64) -> Regime {
    if (g2 - 1.0).abs() < REGIME_TIE_TOLERANCE {
        Regime::None
    } else if g2 < 1.0 {
        Regime::OnePb
    } else if (g3 - 1.0).abs() < REGIME_TIE_TOLERANCE {
        Regime::None
    } else if g3 < 1.0 {
        Regime::TwoPb
    } else {
        Regime::Pit
    }
}

/// `⟨a_j†a_j⟩`.
pub fn mean_photon(rho: &DensityMatrix, mode: Mode) -> f64 {
    rho.expectation(&rho.space().number_op(mode)).re
}

/// `S_j = N_j / n₀` with `n₀ = 4ξ²/γ²`.
pub fn excitation_s(rho: &DensityMatrix, mode: Mode, d: &DerivedParams) -> Result<f64, ObservableError> {
    let n0 = d.spectrum_normalization();
    if n0 == 0.0 {
        return Err(ObservableError::NoDrive);
    }
    Ok(mean_photon(rho, mode) / n0)
}

fn correlation(rho: &DensityMatrix, mode: Mode, order: u32) -> Result<f64, ObservableError> {
    let cutoff = rho.space().cutoff(mode);
    if cutoff < order as usize {
        return Err(ObservableError::Truncation { mode, order, cutoff });
    }
    let mean = mean_photon(rho, mode);
    if !(mean > PHOTON_FLOOR) {
        return Err(ObservableError::UndefinedCorrelation { mode, order, mean });
    }
    let moment = rho
        .expectation(&rho.space().factorial_moment_op(mode, order as usize))
        .re;
    Ok(moment / mean.powi(order as i32))
}

/// `g⁽²⁾(0) = ⟨a†²a²⟩ / ⟨a†a⟩²`.
pub fn g2(rho: &DensityMatrix, mode: Mode) -> Result<f64, ObservableError> {
    correlation(rho, mode, 2)
}

/// `g⁽³⁾(0) = ⟨a†³a³⟩ / ⟨a†a⟩³`.
pub fn g3(rho: &DensityMatrix, mode: Mode) -> Result<f64, ObservableError> {
    correlation(rho, mode, 3)
}

/// Photon-number distribution of one mode (`k = 0..=cutoff`).
pub fn distribution(rho: &DensityMatrix, mode: Mode) -> Vec<f64> {
    let space = rho.space();
    let mut p = vec![0.0; space.cutoff(mode) + 1];
    for i in 0..space.dim() {
        p[space.photons(i, mode)] += rho.get(i, i).re;
    }
    p
}

/// Poisson distribution with mean `mean`, truncated to `len` entries.
pub fn poisson(mean: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut term = (-mean).exp();
    for k in 0..len {
        out.push(term);
        term *= mean / (k + 1) as f64;
    }
    out
}

/// Reduced photon distribution `P_k` and the Poisson reference with the
/// same mean photon number.
pub fn photon_distribution(rho: &DensityMatrix, mode: Mode) -> (Vec<f64>, Vec<f64>) {
    let p = distribution(rho, mode);
    let reference = poisson(mean_photon(rho, mode), p.len());
    (p, reference)
}

/// `Σ k(k−1)…(k−order+1) P_k / N^order`, the correlation rebuilt from the
/// distribution alone.
pub fn correlation_from_distribution(p: &[f64], order: u32) -> Option<f64> {
    let mean: f64 = p.iter().enumerate().map(|(k, pk)| k as f64 * pk).sum();
    if !(mean > PHOTON_FLOOR) {
        return None;
    }
    let moment: f64 = p
        .iter()
        .enumerate()
        .map(|(k, pk)| {
            let falling: f64 = (0..order as usize).map(|j| k as f64 - j as f64).product();
            falling.max(0.0) * pk
        })
        .sum();
    Some(moment / mean.powi(order as i32))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeStatistics {
    pub mode: Mode,
    pub mean_photon: f64,
    pub excitation: Option<f64>,
    pub g2: Option<f64>,
    pub g3: Option<f64>,
    pub distribution: Vec<f64>,
    pub poisson: Vec<f64>,
    pub regime: Option<Regime>,
}

impl ModeStatistics {
    pub fn compute(rho: &DensityMatrix, mode: Mode, d: &DerivedParams) -> Self {
        let g2 = g2(rho, mode).ok();
        let g3 = g3(rho, mode).ok();
        let (distribution, poisson) = photon_distribution(rho, mode);
        ModeStatistics {
            mode,
            mean_photon: mean_photon(rho, mode),
            excitation: excitation_s(rho, mode, d).ok(),
            g2,
            g3,
            distribution,
            poisson,
            regime: match (g2, g3) {
                (Some(a), Some(b)) => Some(classify(a, b)),
                _ => None,
            },
        }
    }
}

/// Every reported quantity for both modes of one steady state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub cw: ModeStatistics,
    pub ccw: ModeStatistics,
    pub params_hash: Option<String>,
}

impl CorrelationResult {
    pub fn compute(rho: &DensityMatrix, d: &DerivedParams) -> Self {
        CorrelationResult {
            cw: ModeStatistics::compute(rho, Mode::Cw, d),
            ccw: ModeStatistics::compute(rho, Mode::Ccw, d),
            params_hash: rho.params_hash.clone(),
        }
    }

    pub fn mode(&self, mode: Mode) -> &ModeStatistics {
        match mode {
            Mode::Cw => &self.cw,
            Mode::Ccw => &self.ccw,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockSpace;
    use crate::presets;
    use crate::steadystate::steady_state;
    use approx::assert_relative_eq;
    use num_complex::Complex64 as C64;

    fn space() -> FockSpace {
        FockSpace::symmetric(4).unwrap()
    }

    #[test]
    fn vacuum_statistics() {
        let rho = DensityMatrix::vacuum(space());
        let d = presets::paper().derive().unwrap();
        assert_eq!(mean_photon(&rho, Mode::Cw), 0.0);
        assert_eq!(excitation_s(&rho, Mode::Cw, &d), Ok(0.0));
        let (p, reference) = photon_distribution(&rho, Mode::Ccw);
        assert_eq!(p, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(reference[0], 1.0);
        assert!(matches!(
            g2(&rho, Mode::Cw),
            Err(ObservableError::UndefinedCorrelation { .. })
        ));
    }

    #[test]
    fn single_photon_is_antibunched() {
        let s = space();
        let rho = DensityMatrix::from_pure(s, &s.basis_vector(1, 0));
        assert_eq!(g2(&rho, Mode::Cw), Ok(0.0));
        assert_eq!(g3(&rho, Mode::Cw), Ok(0.0));
        assert_eq!(mean_photon(&rho, Mode::Cw), 1.0);
    }

    #[test]
    fn fock_two_statistics() {
        let s = space();
        let rho = DensityMatrix::from_pure(s, &s.basis_vector(0, 2));
        assert_relative_eq!(g2(&rho, Mode::Ccw).unwrap(), 0.5, max_relative = 1e-15);
        assert_eq!(g3(&rho, Mode::Ccw), Ok(0.0));
    }

    #[test]
    fn truncation_below_order_is_reported() {
        let s = FockSpace::new(1, 4).unwrap();
        let rho = DensityMatrix::from_pure(s, &s.basis_vector(1, 0));
        assert!(matches!(
            g2(&rho, Mode::Cw),
            Err(ObservableError::Truncation { cutoff: 1, .. })
        ));
    }

    #[test]
    fn undriven_spectrum_is_undefined() {
        let mut d = presets::paper().derive().unwrap();
        d.xi = 0.0;
        let rho = DensityMatrix::vacuum(space());
        assert_eq!(excitation_s(&rho, Mode::Cw, &d), Err(ObservableError::NoDrive));
    }

    #[test]
    fn classification_rules() {
        assert_eq!(classify(0.01, 0.3), Regime::OnePb);
        assert_eq!(classify(1.98, 0.04), Regime::TwoPb);
        assert_eq!(classify(21.55, 8.58), Regime::Pit);
        assert_eq!(classify(1.0 + 1e-7, 5.0), Regime::None);
        assert_eq!(classify(3.0, 1.0 - 1e-7), Regime::None);
        for r in [Regime::OnePb, Regime::TwoPb, Regime::Pit, Regime::None] {
            assert_eq!(r.label().parse::<Regime>(), Ok(r));
        }
    }

    #[test]
    fn poisson_reference() {
        let p = poisson(0.3, 4);
        assert_relative_eq!(p[0], (-0.3f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(p[2], 0.09 / 2.0 * (-0.3f64).exp(), max_relative = 1e-15);
    }

    /// Truncated coherent state |α⟩ on the CW mode.
    fn coherent(alpha: C64) -> DensityMatrix {
        let s = FockSpace::new(30, 1).unwrap();
        let mut psi = vec![C64::new(0.0, 0.0); s.dim()];
        let mut amp = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        for m in 0..=30 {
            psi[s.index(m, 0)] = amp;
            amp *= alpha / ((m + 1) as f64).sqrt();
        }
        DensityMatrix::from_pure(s, &psi)
    }

    #[test]
    fn coherent_state_is_poissonian() {
        let rho = coherent(C64::new(0.4, -0.3));
        assert_relative_eq!(g2(&rho, Mode::Cw).unwrap(), 1.0, epsilon = 1e-10);
        assert_relative_eq!(g3(&rho, Mode::Cw).unwrap(), 1.0, epsilon = 1e-10);
        let (p, reference) = photon_distribution(&rho, Mode::Cw);
        for (a, b) in p.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn distribution_route_matches_operator_route() {
        let mut p = presets::paper();
        p.angular_velocity = 30e3;
        p.detuning = -2.3e6;
        let d = p.derive().unwrap();
        let rho = steady_state(&d, space()).unwrap();
        for mode in Mode::BOTH {
            let dist = distribution(&rho, mode);
            assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-8);
            let n: f64 = dist.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
            assert!((n - mean_photon(&rho, mode)).abs() < 1e-8);
            for order in [2, 3] {
                let from_p = correlation_from_distribution(&dist, order).unwrap();
                let from_op = correlation(&rho, mode, order).unwrap();
                assert!((from_p - from_op).abs() <= 1e-8 * from_op.abs().max(1.0));
            }
        }
    }

    #[test]
    fn blockade_implies_enhanced_single_photon_probability() {
        let mut p = presets::paper();
        p.angular_velocity = 30e3;
        p.detuning = -3.5e6;
        let d = p.derive().unwrap();
        let rho = steady_state(&d, space()).unwrap();
        let stats = ModeStatistics::compute(&rho, Mode::Cw, &d);
        assert_eq!(stats.regime, Some(Regime::OnePb));
        assert!(stats.distribution[1] > stats.poisson[1]);
        assert!(stats.distribution[2] < stats.poisson[2]);
    }
}
