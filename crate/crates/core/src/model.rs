//! Hamiltonian, non-Hermitian effective Hamiltonian, and Lindblad generator
//! of the driven two-mode Kerr resonator.
//!
//! In the frame rotating at the drive frequency (ħ = 1):
//!
//! ```text
//! H = (Δ₀+Δ_sag) a†a + (Δ₀−Δ_sag) b†b + J(a†b + b†a)
//!   + χ(a†²a² + b†²b²) + 2χ a†a b†b + ξ(d† + d)
//! ```
//!
//! with `a` the CW mode, `b` the CCW mode and `d` whichever of the two is
//! driven. Both modes decay at rate γ into a zero-temperature bath.
//!
//! Superoperators use column stacking: `vec(ρ)[i + D·j] = ρ[i][j]`, so that
//! `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

use num_complex::Complex64 as C64;

use crate::fock::{FockError, FockSpace, SparseMatrix};
use crate::params::DerivedParams;
use crate::Mode;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Lindblad generator expressed in units of the loss rate: `dρ/dτ = L ρ`
/// with `τ = γ t`.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    pub matrix: SparseMatrix,
    /// γ in rad/s; the factor that converts `matrix` back to physical units.
    pub rate_unit: f64,
    pub space: FockSpace,
}

#[derive(Clone, Debug)]
pub struct ModelMatrices {
    pub hamiltonian: SparseMatrix,
    pub effective_hamiltonian: SparseMatrix,
    pub liouvillian: Liouvillian,
}

impl ModelMatrices {
    pub fn build(d: &DerivedParams, space: FockSpace) -> Self {
        ModelMatrices {
            hamiltonian: hamiltonian(d, space),
            effective_hamiltonian: effective_hamiltonian(d, space),
            liouvillian: liouvillian(d, space),
        }
    }
}

/// System Hamiltonian in rad/s. Hermitian entry-for-entry.
pub fn hamiltonian(d: &DerivedParams, space: FockSpace) -> SparseMatrix {
    let a = space.annihilation(Mode::Cw);
    let b = space.annihilation(Mode::Ccw);
    let n_a = space.number_op(Mode::Cw);
    let n_b = space.number_op(Mode::Ccw);
    let hop = a.adjoint().compose(&b).expect("same space");
    let hop = hop.add_scaled(ONE, &hop.adjoint()).expect("same space");
    let kerr_a = space.factorial_moment_op(Mode::Cw, 2);
    let kerr_b = space.factorial_moment_op(Mode::Ccw, 2);
    let cross = n_a.compose(&n_b).expect("same space");
    let drive = space.annihilation(d.drive);
    let drive = drive.add_scaled(ONE, &drive.adjoint()).expect("same space");

    let terms = [
        (d.mode_detuning(Mode::Cw), &n_a),
        (d.mode_detuning(Mode::Ccw), &n_b),
        (d.backscattering, &hop),
        (d.chi, &kerr_a),
        (d.chi, &kerr_b),
        (2.0 * d.chi, &cross),
        (d.xi, &drive),
    ];
    terms
        .iter()
        .try_fold(SparseMatrix::zeros(space.dim(), space.dim()), |acc, (c, op)| {
            acc.add_scaled(real(*c), op)
        })
        .expect("all operators share the space")
}

/// `H − i(γ/2)(a†a + b†b)`.
pub fn effective_hamiltonian(d: &DerivedParams, space: FockSpace) -> SparseMatrix {
    let total = space
        .number_op(Mode::Cw)
        .add_scaled(ONE, &space.number_op(Mode::Ccw))
        .expect("same space");
    hamiltonian(d, space)
        .add_scaled(C64::new(0.0, -0.5 * d.gamma), &total)
        .expect("same space")
}

/// Lindblad generator with dissipators `(γ/2)(2aρa† − a†aρ − ρa†a)` for
/// both modes, scaled by `1/γ`. A lossless model (γ = 0) keeps rad/s units.
pub fn liouvillian(d: &DerivedParams, space: FockSpace) -> Liouvillian {
    let unit = if d.gamma > 0.0 { d.gamma } else { 1.0 };
    let h = hamiltonian(d, space).scale(real(1.0 / unit));
    let rate = d.gamma / unit;
    let matrix = lindblad_generator(&h, &[
        (rate, space.annihilation(Mode::Cw)),
        (rate, space.annihilation(Mode::Ccw)),
    ])
    .expect("operators share the space");
    Liouvillian {
        matrix,
        rate_unit: unit,
        space,
    }
}

/// Column-stacked generator `−i[H,·] + Σ κ/2 (2cρc† − c†cρ − ρc†c)`.
pub fn lindblad_generator(
    h: &SparseMatrix,
    channels: &[(f64, SparseMatrix)],
) -> Result<SparseMatrix, FockError> {
    let id = SparseMatrix::identity(h.rows());
    let mut l = id
        .kron(h)
        .scale(C64::new(0.0, -1.0))
        .add_scaled(C64::new(0.0, 1.0), &h.transpose().kron(&id))?;
    for (kappa, c) in channels {
        if *kappa == 0.0 {
            continue;
        }
        let n = c.adjoint().compose(c)?;
        l = l
            .add_scaled(real(*kappa), &c.conj().kron(c))?
            .add_scaled(real(-0.5 * kappa), &id.kron(&n))?
            .add_scaled(real(-0.5 * kappa), &n.transpose().kron(&id))?;
    }
    Ok(l)
}

/// Column-stack a row-major `D×D` matrix.
pub fn vectorize(dense_row_major: &[C64], dim: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            v[i + dim * j] = dense_row_major[i * dim + j];
        }
    }
    v
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &[C64], dim: usize) -> Vec<C64> {
    let mut m = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            m[i * dim + j] = v[i + dim * j];
        }
    }
    m
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

    fn space() -> FockSpace {
        FockSpace::symmetric(4).unwrap()
    }

    #[test]
    fn hamiltonian_is_exactly_hermitian() {
        let h = hamiltonian(&params(30e3, -2.3e6), space());
        assert_eq!(h.adjoint(), h);
        let mut d = params(10e3, 1e6);
        d.drive = Mode::Ccw;
        let h = hamiltonian(&d, FockSpace::new(3, 5).unwrap());
        assert_eq!(h.adjoint(), h);
    }

    /// 2×2 diagonalization of the single-excitation block.
    fn single_excitation_levels(d: &DerivedParams) -> (f64, f64) {
        let s = space();
        let h = hamiltonian(d, s);
        let (i, j) = (s.index(1, 0), s.index(0, 1));
        let (a, b, c) = (h.get(i, i).re, h.get(j, j).re, h.get(i, j).re);
        let mean = 0.5 * (a + b);
        let half = (0.25 * (a - b) * (a - b) + c * c).sqrt();
        (mean - half, mean + half)
    }

    #[test]
    fn single_excitation_splitting() {
        let mut d = params(30e3, 0.7e6);
        d.xi = 0.0;
        let (lo, hi) = single_excitation_levels(&d);
        let split = (d.sagnac * d.sagnac + d.backscattering * d.backscattering).sqrt();
        assert_relative_eq!(lo, d.detuning - split, max_relative = 1e-12);
        assert_relative_eq!(hi, d.detuning + split, max_relative = 1e-12);

        let mut d = params(0.0, 0.7e6);
        d.xi = 0.0;
        let (lo, hi) = single_excitation_levels(&d);
        assert_relative_eq!(hi - lo, 2.0 * d.backscattering, max_relative = 1e-12);
    }

    #[test]
    fn two_photon_diagonal() {
        let d = params(30e3, -2.3e6);
        let s = space();
        let h = hamiltonian(&d, s);
        let i = s.index(2, 0);
        assert_relative_eq!(
            h.get(i, i).re,
            2.0 * (d.detuning + d.sagnac) + 2.0 * d.chi,
            max_relative = 1e-14
        );
        let i = s.index(1, 1);
        assert_relative_eq!(h.get(i, i).re, 2.0 * d.detuning + 2.0 * d.chi, max_relative = 1e-14);
    }

    #[test]
    fn effective_hamiltonian_diagonal() {
        let d = params(30e3, -2.3e6);
        let s = space();
        let heff = effective_hamiltonian(&d, s);
        let i = s.index(1, 0);
        assert_eq!(
            heff.get(i, i),
            C64::new(d.detuning + d.sagnac, -0.5 * d.gamma)
        );
        let i = s.index(2, 1);
        assert_eq!(heff.get(i, i).im, -1.5 * d.gamma);

        let diff = heff.add_scaled(real(-1.0), &hamiltonian(&d, s)).unwrap();
        for (r, c, v) in diff.triplets() {
            assert_eq!(r, c);
            let (m, n) = s.state(r);
            let want = -0.5 * d.gamma * (m + n) as f64;
            assert_eq!(v.re, 0.0);
            assert!((v.im - want).abs() <= 1e-15 * want.abs());
        }

        let mut lossless = d.clone();
        lossless.gamma = 0.0;
        assert_eq!(effective_hamiltonian(&lossless, s), hamiltonian(&lossless, s));
    }

    #[test]
    fn static_undriven_hamiltonian_has_exchange_symmetry() {
        let mut d = params(0.0, -1.3e6);
        d.xi = 0.0;
        let s = space();
        let h = hamiltonian(&d, s);
        let swap: Vec<(usize, usize, C64)> = (0..s.dim())
            .map(|i| {
                let (m, n) = s.state(i);
                (s.index(n, m), i, ONE)
            })
            .collect();
        let p = SparseMatrix::from_triplets(s.dim(), s.dim(), swap).unwrap();
        let swapped = p.compose(&h).unwrap().compose(&p.transpose()).unwrap();
        assert_eq!(swapped, h);
    }

    #[test]
    fn vacuum_is_dark_without_drive() {
        let mut d = params(30e3, -2.3e6);
        d.xi = 0.0;
        let s = space();
        let l = liouvillian(&d, s);
        let mut rho = vec![C64::new(0.0, 0.0); s.dim() * s.dim()];
        rho[0] = ONE;
        let out = l.matrix.mul_vec(&vectorize(&rho, s.dim()));
        assert!(out.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn undriven_generator_conserves_excitation_sectors() {
        let mut d = params(30e3, -2.3e6);
        d.xi = 0.0;
        let s = space();
        let l = liouvillian(&d, s);
        let dim = s.dim();
        let sector = |k: usize| {
            let (i, j) = (k % dim, k / dim);
            let (a, b) = (s.state(i), s.state(j));
            (a.0 + a.1) as i64 - (b.0 + b.1) as i64
        };
        for (r, c, _) in l.matrix.triplets() {
            assert_eq!(sector(r), sector(c));
        }
    }

    #[test]
    fn vectorization_round_trip() {
        let m: Vec<C64> = (0..9).map(|k| C64::new(k as f64, -(k as f64))).collect();
        let v = vectorize(&m, 3);
        assert_eq!(v[1], m[3]); // ρ[1][0]
        assert_eq!(unvectorize(&v, 3), m);
    }
}
