//! Steady states of the Lindblad generator.
//!
//! [`solve_steady`] replaces the vacuum-population row of `Lρ = 0` by the
//! trace condition and solves the result by bordering: the remaining block
//! (`L` without its first row and column) keeps the narrow band structure of
//! the generator and is factored with [`BandedLu`]. [`evolve`] integrates
//! `dρ/dτ = Lρ` with an adaptive Dormand–Prince pair and serves as an
//! independent check on the linear solve.

use std::io::{self, BufRead, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::banded::{BandedError, BandedLu};
use crate::fock::FockSpace;
use crate::model::{self, Liouvillian};
use crate::observables;
use crate::params::DerivedParams;
use crate::Mode;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Relative pivot size below which the reduced system counts as singular.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;
/// Accepted steady-state residual, relative to `‖L‖·‖ρ‖`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SteadyStateError {
    #[error("generator does not preserve the trace (column {column} leaks {leak:.3e})")]
    NotTracePreserving { column: usize, leak: f64 },
    #[error("steady state is not unique: {0}")]
    Degenerate(String),
    #[error("steady-state residual {residual:.3e} exceeds {bound:.3e}")]
    NonConvergence { residual: f64, bound: f64 },
}

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("step size underflow at τ = {time:.6e} (h = {step:.3e})")]
    StepUnderflow { time: f64, step: f64 },
    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),
    #[error("initial state has dimension {0}, generator expects {1}")]
    Dimension(usize, usize),
}

/// Density matrix on a truncated two-mode space, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: FockSpace,
    data: Vec<C64>,
    /// Digest of the parameters that produced this state, when known.
    pub params_hash: Option<String>,
}

impl DensityMatrix {
    pub fn from_row_major(space: FockSpace, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), space.dim() * space.dim());
        DensityMatrix {
            space,
            data,
            params_hash: None,
        }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) state vector.
    pub fn from_pure(space: FockSpace, psi: &[C64]) -> Self {
        let d = space.dim();
        assert_eq!(psi.len(), d);
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        let mut data = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                data[i * d + j] = psi[i] * psi[j].conj() / norm;
            }
        }
        Self::from_row_major(space, data)
    }

    pub fn vacuum(space: FockSpace) -> Self {
        Self::from_pure(space, &space.basis_vector(0, 0))
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim() + j]
    }

    pub fn as_row_major(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// `max |ρ − ρ†|` elementwise.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim();
        let m = DMatrix::from_fn(d, d, |i, j| 0.5 * (self.get(i, j) + self.get(j, i).conj()));
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `Tr(Aρ)` for an operator on the same space.
    pub fn expectation(&self, op: &crate::fock::SparseMatrix) -> C64 {
        assert_eq!(op.rows(), self.dim());
        op.triplets().map(|(r, c, v)| v * self.get(c, r)).sum()
    }

    /// Largest elementwise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn to_vec(&self) -> Vec<C64> {
        model::vectorize(&self.data, self.dim())
    }

    fn from_vec(space: FockSpace, v: &[C64]) -> Self {
        Self::from_row_major(space, model::unvectorize(v, space.dim()))
    }

    /// Text snapshot: a `#`-prefixed header followed by one `re im` line per
    /// entry in row-major order.
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# spinkerr density matrix v1")?;
        writeln!(
            w,
            "# cutoffs {} {}",
            self.space.cutoff(Mode::Cw),
            self.space.cutoff(Mode::Ccw)
        )?;
        writeln!(w, "# params_hash {}", self.params_hash.as_deref().unwrap_or("-"))?;
        for v in &self.data {
            writeln!(w, "{:.17e} {:.17e}", v.re, v.im)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> io::Result<Self> {
        let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
        let mut cutoffs = None;
        let mut hash = None;
        let mut data = Vec::new();
        for line in r.lines() {
            let line = line?;
            if let Some(rest) = line.strip_prefix("# cutoffs ") {
                let v: Vec<usize> = rest
                    .split_whitespace()
                    .map(|s| s.parse().map_err(|_| bad("bad cutoff")))
                    .collect::<Result<_, _>>()?;
                if v.len() != 2 {
                    return Err(bad("expected two cutoffs"));
                }
                cutoffs = Some((v[0], v[1]));
            } else if let Some(rest) = line.strip_prefix("# params_hash ") {
                hash = (rest != "-").then(|| rest.to_string());
            } else if line.starts_with('#') || line.trim().is_empty() {
                continue;
            } else {
                let mut it = line.split_whitespace().map(str::parse::<f64>);
                match (it.next(), it.next()) {
                    (Some(Ok(re)), Some(Ok(im))) => data.push(C64::new(re, im)),
                    _ => return Err(bad("bad matrix entry")),
                }
            }
        }
        let (m, n) = cutoffs.ok_or_else(|| bad("missing cutoffs header"))?;
        let space = FockSpace::new(m, n).map_err(|e| bad(&e.to_string()))?;
        if data.len() != space.dim() * space.dim() {
            return Err(bad("entry count does not match cutoffs"));
        }
        let mut rho = Self::from_row_major(space, data);
        rho.params_hash = hash;
        Ok(rho)
    }

    pub fn dump(&self, path: &Path) -> io::Result<()> {
        self.write_text(io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        Self::read_text(io::BufReader::new(std::fs::File::open(path)?))
    }
}

fn trace_positions(dim: usize) -> impl Iterator<Item = usize> {
    (0..dim).map(move |i| i + dim * i)
}

/// `max_c |Σ_i L[ii, c]|`, the worst trace leak over all columns.
fn trace_leak(l: &Liouvillian) -> (usize, f64) {
    let d = l.space.dim();
    let mut sums = vec![ZERO; d * d];
    for i in trace_positions(d) {
        for (c, v) in l.matrix.row(i) {
            sums[c] += v;
        }
    }
    sums.iter()
        .enumerate()
        .map(|(c, s)| (c, s.norm()))
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a })
}

/// Steady state of `l`, normalized to unit trace.
pub fn solve_steady(l: &Liouvillian) -> Result<DensityMatrix, SteadyStateError> {
    let dim = l.space.dim();
    let n = dim * dim;
    let scale = l.matrix.norm_inf();
    let (column, leak) = trace_leak(l);
    if leak > 1e-12 * scale.max(1.0) {
        return Err(SteadyStateError::NotTracePreserving { column, leak });
    }

    // Unknowns x = (ρ_00, y). Rows 1.. of L read  c·ρ_00 + B·y = 0, the
    // replaced row reads  ρ_00 + tᵀy = 1.
    let mut block = Vec::with_capacity(l.matrix.nnz());
    let mut coupling = vec![ZERO; n - 1];
    for (r, c, v) in l.matrix.triplets().filter(|&(r, _, _)| r > 0) {
        if c == 0 {
            coupling[r - 1] = v;
        } else {
            block.push((r - 1, c - 1, v));
        }
    }
    let block = crate::fock::SparseMatrix::from_triplets(n - 1, n - 1, block)
        .expect("entries come from a valid matrix");
    let lu = BandedLu::factor(&block, DEGENERACY_THRESHOLD).map_err(|e| match e {
        BandedError::Singular { column, pivot, .. } => SteadyStateError::Degenerate(format!(
            "reduced generator singular at column {column} (pivot {pivot:.3e})"
        )),
        other => SteadyStateError::Degenerate(other.to_string()),
    })?;
    let w = lu.solve(&coupling).expect("length matches");
    let t_dot_w: C64 = trace_positions(dim).skip(1).map(|k| w[k - 1]).sum();
    let schur = C64::new(1.0, 0.0) - t_dot_w;
    if schur.norm() < DEGENERACY_THRESHOLD * (1.0 + t_dot_w.norm()) {
        return Err(SteadyStateError::Degenerate(format!(
            "trace condition is dependent on the generator rows (|s| = {:.3e})",
            schur.norm()
        )));
    }
    let rho00 = C64::new(1.0, 0.0) / schur;
    let mut x = Vec::with_capacity(n);
    x.push(rho00);
    x.extend(w.iter().map(|v| -v * rho00));

    let residual = l
        .matrix
        .mul_vec(&x)
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let x_norm = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let bound = RESIDUAL_TOLERANCE * scale * x_norm;
    if !(residual <= bound) {
        return Err(SteadyStateError::NonConvergence { residual, bound });
    }
    Ok(DensityMatrix::from_vec(l.space, &x))
}

/// Build the generator for `d` on `space` and solve for its steady state.
pub fn steady_state(d: &DerivedParams, space: FockSpace) -> Result<DensityMatrix, SteadyStateError> {
    let mut rho = solve_steady(&model::liouvillian(d, space))?;
    rho.params_hash = Some(d.hash());
    Ok(rho)
}

#[derive(Copy, Clone, Debug)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            rtol: 1e-9,
            atol: 1e-20,
            max_steps: 5_000_000,
        }
    }
}

// Dormand–Prince 5(4) tableau. The generator is time independent, so the
// stage nodes are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate `dρ/dτ = Lρ` from `rho0` for `duration` in units of `1/γ`.
pub fn evolve(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    duration: f64,
    opts: EvolveOptions,
) -> Result<DensityMatrix, EvolveError> {
    if rho0.space() != l.space {
        return Err(EvolveError::Dimension(rho0.dim(), l.space.dim()));
    }
    if duration <= 0.0 {
        return Ok(rho0.clone());
    }
    let n = rho0.dim() * rho0.dim();
    let op = &l.matrix;
    let mut y = rho0.to_vec();
    let mut k1 = op.mul_vec(&y);
    let mut k = vec![vec![ZERO; n]; 6];
    let mut tmp = vec![ZERO; n];
    let mut y_new = vec![ZERO; n];

    let mut t = 0.0;
    let mut h = (0.01 / op.norm_inf().max(1e-300)).min(duration);
    let h_min = 1e-14 * duration;
    let mut steps = 0usize;

    let stage = |y: &[C64], coeffs: &[(f64, &[C64])], h: f64, out: &mut [C64]| {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (a, kk) in coeffs {
                acc += kk[i] * *a;
            }
            *o = y[i] + acc * h;
        }
    };

    while t < duration {
        if steps >= opts.max_steps {
            return Err(EvolveError::TooManySteps(opts.max_steps));
        }
        let last = t + h >= duration;
        if last {
            h = duration - t;
        }
        let [k2, k3, k4, k5, k6, k7] = &mut k[..] else {
            unreachable!()
        };
        stage(&y, &[(A21, &k1)], h, &mut tmp);
        op.mul_vec_into(&tmp, k2);
        stage(&y, &[(A31, &k1), (A32, k2)], h, &mut tmp);
        op.mul_vec_into(&tmp, k3);
        stage(&y, &[(A41, &k1), (A42, k2), (A43, k3)], h, &mut tmp);
        op.mul_vec_into(&tmp, k4);
        stage(&y, &[(A51, &k1), (A52, k2), (A53, k3), (A54, k4)], h, &mut tmp);
        op.mul_vec_into(&tmp, k5);
        stage(
            &y,
            &[(A61, &k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
            h,
            &mut tmp,
        );
        op.mul_vec_into(&tmp, k6);
        stage(
            &y,
            &[(B1, &k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)],
            h,
            &mut y_new,
        );
        op.mul_vec_into(&y_new, k7);

        let mut err: f64 = 0.0;
        for i in 0..n {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7)
                * h;
            let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
            err = err.max(e.norm() / sc);
        }
        steps += 1;
        if err <= 1.0 {
            t = if last { duration } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, k7);
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < h_min && t < duration {
            return Err(EvolveError::StepUnderflow { time: t, step: h });
        }
    }
    let mut out = DensityMatrix::from_vec(l.space, &y);
    out.params_hash = rho0.params_hash.clone();
    Ok(out)
}

/// Relative change of one observable between two cutoffs.
#[derive(Clone, Debug, PartialEq)]
pub enum Change {
    Relative(f64),
    /// Defined at one cutoff only.
    Undefined { lower: bool, upper: bool },
}

impl Change {
    fn between(a: Option<f64>, b: Option<f64>) -> Change {
        match (a, b) {
            (Some(x), Some(y)) => {
                let scale = x.abs().max(y.abs());
                Change::Relative(if scale == 0.0 { 0.0 } else { (x - y).abs() / scale })
            }
            // nothing to compare, both sides agree that it does not exist
            (None, None) => Change::Relative(0.0),
            (a, b) => Change::Undefined {
                lower: a.is_none(),
                upper: b.is_none(),
            },
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Change::Relative(v) => *v,
            Change::Undefined { .. } => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceStep {
    pub lower: usize,
    pub upper: usize,
    /// `(name, change)` for N, g², g³ of both modes.
    pub changes: Vec<(String, Change)>,
}

impl ConvergenceStep {
    pub fn max_change(&self) -> f64 {
        self.changes.iter().map(|(_, c)| c.value()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub steps: Vec<ConvergenceStep>,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Error)]
pub enum ConvergenceError {
    #[error("need at least two cutoffs, got {0}")]
    TooFewCutoffs(usize),
    #[error(transparent)]
    Fock(#[from] crate::fock::FockError),
    #[error(transparent)]
    Solve(#[from] SteadyStateError),
}

pub const CONVERGENCE_TOLERANCE: f64 = 1e-3;

fn tracked_observables(rho: &DensityMatrix) -> Vec<(String, Option<f64>)> {
    let mut out = Vec::new();
    for mode in Mode::BOTH {
        out.push((format!("N_{mode}"), Some(observables::mean_photon(rho, mode))));
        let g2 = observables::g2(rho, mode).ok();
        let g3 = observables::g3(rho, mode).ok();
        out.push((format!("g2_{mode}"), g2));
        out.push((format!("g3_{mode}"), g3));
    }
    out
}

/// Re-solve at each symmetric cutoff and compare consecutive results.
pub fn convergence_check(
    d: &DerivedParams,
    cutoffs: &[usize],
) -> Result<ConvergenceReport, ConvergenceError> {
    if cutoffs.len() < 2 {
        return Err(ConvergenceError::TooFewCutoffs(cutoffs.len()));
    }
    let mut values = Vec::with_capacity(cutoffs.len());
    for &c in cutoffs {
        let rho = steady_state(d, FockSpace::symmetric(c)?)?;
        values.push(tracked_observables(&rho));
    }
    let steps: Vec<ConvergenceStep> = cutoffs
        .windows(2)
        .zip(values.windows(2))
        .map(|(c, v)| ConvergenceStep {
            lower: c[0],
            upper: c[1],
            changes: v[0]
                .iter()
                .zip(&v[1])
                .map(|((name, a), (_, b))| (name.clone(), Change::between(*a, *b)))
                .collect(),
        })
        .collect();
    let pass = steps
        .iter()
        .all(|s| s.max_change() < CONVERGENCE_TOLERANCE);
    Ok(ConvergenceReport {
        steps,
        tolerance: CONVERGENCE_TOLERANCE,
        pass,
    })
}
