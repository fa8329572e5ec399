//! Dense complex time evolution for small Hilbert spaces (dimension ≤ 16).
//!
//! Both the Schrödinger and the Lindblad equations are integrated with an
//! adaptive Dormand–Prince 5(4) pair. Alongside the state, the integrator
//! carries one accumulator per basis state holding ∫P_i dt, so exposures
//! are integrated to the same order as the dynamics instead of being
//! reconstructed from the recorded samples.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const MAX_DIM: usize = 16;
/// Tolerance on |ψ|² = 1 and tr ρ = 1.
pub const NORM_TOL: f64 = 1e-9;
/// Tolerance on H = H† for evaluator samples.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted for a density matrix.
pub const EIGEN_TOL: f64 = 1e-8;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::UnsupportedDimension(dim));
    }
    Ok(())
}

fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// A normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amplitudes: CVector,
}

impl QuantumState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let state = Self {
            amplitudes: CVector::from_vec(amplitudes),
        };
        let n = state.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(state)
    }

    /// The computational basis vector |index⟩.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(invalid("index", format!("{index} >= dim {dim}")));
        }
        let mut a = CVector::zeros(dim);
        a[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: a })
    }

    pub(crate) fn from_raw(amplitudes: CVector) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn population(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            elements: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

/// A density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    elements: CMatrix,
}

impl DensityMatrix {
    pub fn new(elements: CMatrix) -> Result<Self> {
        if !elements.is_square() {
            return Err(Error::InvalidDensityMatrix("matrix is not square".into()));
        }
        check_dim(elements.nrows())?;
        let rho = Self { elements };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_raw(elements: CMatrix) -> Self {
        Self { elements }
    }

    /// Checks the density-matrix invariants.
    pub fn validate(&self) -> Result<()> {
        let dev = hermitian_deviation(&self.elements);
        if dev > NORM_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (deviation {dev:e})"
            )));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -EIGEN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn elements(&self) -> &CMatrix {
        &self.elements
    }

    pub fn trace(&self) -> f64 {
        self.elements.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn population(&self, index: usize) -> f64 {
        self.elements[(index, index)].re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        // symmetrize so the Hermitian solver sees an exactly Hermitian input
        let h = (&self.elements + self.elements.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Frobenius distance ‖ρ − σ‖.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        (&self.elements - &other.elements).norm()
    }
}

type Evaluator = dyn Fn(f64) -> CMatrix + Send + Sync;

/// H(t) in rad/ps over a finite support interval [start, end] in ps.
#[derive(Clone)]
pub struct TimeDependentHamiltonian {
    dim: usize,
    start: f64,
    end: f64,
    evaluator: Arc<Evaluator>,
}

impl fmt::Debug for TimeDependentHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeDependentHamiltonian")
            .field("dim", &self.dim)
            .field("start", &self.start)
            .field("end", &self.end)
            .finish_non_exhaustive()
    }
}

impl TimeDependentHamiltonian {
    pub fn new<F>(dim: usize, support: (f64, f64), evaluator: F) -> Result<Self>
    where
        F: Fn(f64) -> CMatrix + Send + Sync + 'static,
    {
        check_dim(dim)?;
        let (start, end) = support;
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(invalid("support", format!("[{start}, {end}] is empty")));
        }
        Ok(Self {
            dim,
            start,
            end,
            evaluator: Arc::new(evaluator),
        })
    }

    pub fn constant(h: CMatrix, support: (f64, f64)) -> Result<Self> {
        let dim = h.nrows();
        Self::new(dim, support, move |_| h.clone())
    }

    pub fn zero(dim: usize, support: (f64, f64)) -> Result<Self> {
        Self::new(dim, support, move |_| CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    /// Samples H(t), checking shape and hermiticity.
    pub fn at(&self, t: f64) -> Result<CMatrix> {
        let h = (self.evaluator)(t);
        if h.nrows() != self.dim || h.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: h.nrows(),
            });
        }
        let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let dev = hermitian_deviation(&h);
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::NonHermitian { t, deviation: dev });
        }
        Ok(h)
    }
}

/// A Lindblad jump operator with its rate in 1/ps.
#[derive(Clone, Debug)]
pub struct JumpOperator {
    pub operator: CMatrix,
    pub rate: f64,
}

impl JumpOperator {
    pub fn new(operator: CMatrix, rate: f64) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(invalid("rate", format!("{rate} must be >= 0")));
        }
        Ok(Self { operator, rate })
    }

    /// |to⟩⟨from| on a space of dimension `dim`.
    pub fn transition(dim: usize, from: usize, to: usize, rate: f64) -> Result<Self> {
        let mut op = CMatrix::zeros(dim, dim);
        op[(to, from)] = C64::new(1.0, 0.0);
        Self::new(op, rate)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    /// Local error bound per accepted step.
    pub tol: f64,
    /// Upper bound on the step size in ps; defaults to 1/50 of the support.
    pub max_step: Option<f64>,
}

impl EvolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            max_step: None,
        }
    }
}

/// Recorded evolution: one entry per accepted step, starting at t₀.
#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    /// Basis-state populations at each recorded time.
    pub populations: Vec<Vec<f64>>,
    /// Cumulative ∫P_i dt (ps) from t₀ to each recorded time.
    pub exposures: Vec<Vec<f64>>,
    /// Largest |‖ψ‖² − 1| (or |tr ρ − 1|) seen over the run. Never corrected.
    pub max_norm_drift: f64,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &S {
        self.states
            .last()
            .expect("trajectory has at least the initial state")
    }

    pub fn final_populations(&self) -> &[f64] {
        self.populations.last().expect("non-empty trajectory")
    }

    /// ∫P_i dt over the full support, per basis state.
    pub fn integrated_populations(&self) -> &[f64] {
        self.exposures.last().expect("non-empty trajectory")
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MAX_STEPS: usize = 5_000_000;

/// Integrates y' = f(t, y) over [t0, t1], calling `observe` at t0 and after
/// every accepted step.
fn integrate<F, O>(
    mut rhs: F,
    mut y: Vec<C64>,
    (t0, t1): (f64, f64),
    opts: &EvolveOptions,
    mut observe: O,
) -> Result<()>
where
    F: FnMut(f64, &[C64], &mut [C64]) -> Result<()>,
    O: FnMut(f64, &[C64]),
{
    let n = y.len();
    let span = t1 - t0;
    let h_max = opts.max_step.unwrap_or(span / 50.0).min(span);
    let h_min = span * 1e-13;
    let mut h = (span / 1000.0).min(h_max);
    let mut t = t0;
    let mut k: Vec<Vec<C64>> = vec![vec![C64::default(); n]; 7];
    let mut stage = vec![C64::default(); n];
    let mut y5 = vec![C64::default(); n];

    observe(t, &y);
    rhs(t, &y, &mut k[0])?;
    let mut steps = 0usize;
    while t < t1 {
        if steps > MAX_STEPS {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += kj[i] * (h * a);
                    }
                }
                stage[i] = acc;
            }
            rhs(t + C[s] * h, &stage, &mut k[s])?;
        }
        let mut err = 0.0f64;
        for i in 0..n {
            let mut d5 = C64::default();
            let mut d4 = C64::default();
            for s in 0..7 {
                d5 += k[s][i] * B5[s];
                d4 += k[s][i] * B4[s];
            }
            y5[i] = y[i] + d5 * h;
            err = err.max(((d5 - d4) * h).norm());
        }
        steps += 1;
        if err <= opts.tol || h <= h_min {
            if h <= h_min && err > opts.tol {
                return Err(Error::StepSizeUnderflow { t, h });
            }
            t = if last { t1 } else { t + h };
            std::mem::swap(&mut y, &mut y5);
            // FSAL: the last stage is f(t + h, y5)
            k.swap(0, 6);
            observe(t, &y);
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * (opts.tol / err).powf(0.2)).clamp(0.2, 5.0)
            };
            h = (h * factor).min(h_max);
        } else {
            h *= (0.9 * (opts.tol / err).powf(0.2)).clamp(0.1, 0.9);
        }
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(invalid("tol", format!("{tol} not in (0, 1e-3]")));
    }
    Ok(())
}

/// Integrates iψ' = Hψ over the support of `h` with default options.
pub fn evolve_schrodinger(
    h: &TimeDependentHamiltonian,
    psi0: &QuantumState,
    tol: f64,
) -> Result<Trajectory<QuantumState>> {
    evolve_schrodinger_with(h, psi0, &EvolveOptions::with_tol(tol))
}

pub fn evolve_schrodinger_with(
    h: &TimeDependentHamiltonian,
    psi0: &QuantumState,
    opts: &EvolveOptions,
) -> Result<Trajectory<QuantumState>> {
    check_tol(opts.tol)?;
    let n = h.dim();
    if psi0.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: psi0.dim(),
        });
    }
    let norm0 = psi0.norm_sqr();
    if (norm0 - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm0));
    }

    let mut y = psi0.amplitudes.iter().copied().collect::<Vec<_>>();
    y.extend(std::iter::repeat_n(C64::default(), n));

    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| -> Result<()> {
        let hm = h.at(t)?;
        for i in 0..n {
            let mut acc = C64::default();
            for j in 0..n {
                acc += hm[(i, j)] * y[j];
            }
            dy[i] = -I * acc;
            dy[n + i] = C64::new(y[i].norm_sqr(), 0.0);
        }
        Ok(())
    };

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        populations: Vec::new(),
        exposures: Vec::new(),
        max_norm_drift: 0.0,
    };
    integrate(rhs, y, h.support(), opts, |t, y| {
        let psi = QuantumState::from_raw(CVector::from_iterator(n, y[..n].iter().copied()));
        let pops: Vec<f64> = y[..n].iter().map(|a| a.norm_sqr()).collect();
        let drift = (pops.iter().sum::<f64>() - 1.0).abs();
        traj.max_norm_drift = traj.max_norm_drift.max(drift);
        traj.times.push(t);
        traj.states.push(psi);
        traj.populations.push(pops);
        traj.exposures.push(y[n..].iter().map(|z| z.re).collect());
    })?;
    Ok(traj)
}

/// Integrates ρ' = −i[H, ρ] + Σ γ (LρL† − ½{L†L, ρ}) over the support of `h`.
pub fn evolve_lindblad(
    h: &TimeDependentHamiltonian,
    jumps: &[JumpOperator],
    rho0: &DensityMatrix,
    tol: f64,
) -> Result<Trajectory<DensityMatrix>> {
    evolve_lindblad_with(h, jumps, rho0, &EvolveOptions::with_tol(tol))
}

pub fn evolve_lindblad_with(
    h: &TimeDependentHamiltonian,
    jumps: &[JumpOperator],
    rho0: &DensityMatrix,
    opts: &EvolveOptions,
) -> Result<Trajectory<DensityMatrix>> {
    check_tol(opts.tol)?;
    let n = h.dim();
    if rho0.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rho0.dim(),
        });
    }
    for j in jumps {
        if j.operator.nrows() != n || j.operator.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: j.operator.nrows(),
            });
        }
        if !(j.rate >= 0.0) {
            return Err(invalid("rate", format!("{} must be >= 0", j.rate)));
        }
    }
    let active: Vec<&JumpOperator> = jumps.iter().filter(|j| j.rate > 0.0).collect();
    let mut damping = CMatrix::zeros(n, n);
    for j in &active {
        damping += j.operator.adjoint() * &j.operator * C64::new(0.5 * j.rate, 0.0);
    }
    let scaled: Vec<(CMatrix, CMatrix)> = active
        .iter()
        .map(|j| {
            let l = &j.operator * C64::new(j.rate.sqrt(), 0.0);
            let ld = l.adjoint();
            (l, ld)
        })
        .collect();

    let mut y: Vec<C64> = Vec::with_capacity(n * n + n);
    for i in 0..n {
        for j in 0..n {
            y.push(rho0.elements[(i, j)]);
        }
    }
    y.extend(std::iter::repeat_n(C64::default(), n));

    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| -> Result<()> {
        let hm = h.at(t)?;
        // K = H − i/2 Σ γ L†L;  ρ' = −i(Kρ − ρK†) + Σ γ LρL†
        let k = hm - &damping * I;
        let rho = CMatrix::from_row_slice(n, n, &y[..n * n]);
        let mut d = (&k * &rho - &rho * k.adjoint()) * (-I);
        for (l, ld) in &scaled {
            d += l * &rho * ld;
        }
        for i in 0..n {
            for j in 0..n {
                dy[i * n + j] = d[(i, j)];
            }
            dy[n * n + i] = C64::new(y[i * n + i].re, 0.0);
        }
        Ok(())
    };

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        populations: Vec::new(),
        exposures: Vec::new(),
        max_norm_drift: 0.0,
    };
    integrate(rhs, y, h.support(), opts, |t, y| {
        let rho = CMatrix::from_row_slice(n, n, &y[..n * n]);
        let pops: Vec<f64> = (0..n).map(|i| rho[(i, i)].re).collect();
        let drift = (pops.iter().sum::<f64>() - 1.0).abs();
        traj.max_norm_drift = traj.max_norm_drift.max(drift);
        traj.times.push(t);
        traj.states.push(DensityMatrix::from_raw(rho));
        traj.populations.push(pops);
        traj.exposures
            .push(y[n * n..].iter().map(|z| z.re).collect());
    })?;
    Ok(traj)
}

/// Minimum modulus of the tracked amplitude at both ends of a phase
/// extraction.
pub const ADIABATIC_RETURN_MODULUS: f64 = 0.5;

/// Unwrapped phase of amplitude `index` at every recorded time, relative to t₀.
pub fn phase_series(traj: &Trajectory<QuantumState>, index: usize) -> Result<Vec<f64>> {
    let first = traj
        .states
        .first()
        .ok_or_else(|| invalid("traj", "empty"))?;
    if index >= first.dim() {
        return Err(invalid(
            "basis_state_index",
            format!("{index} >= {}", first.dim()),
        ));
    }
    for s in [first, traj.final_state()] {
        let m = s.amplitude(index).norm();
        if m <= ADIABATIC_RETURN_MODULUS {
            return Err(Error::AdiabaticityBroken { index, modulus: m });
        }
    }
    let mut out = Vec::with_capacity(traj.len());
    let mut prev = first.amplitude(index).arg();
    let mut acc = 0.0;
    out.push(0.0);
    for s in &traj.states[1..] {
        let a = s.amplitude(index).arg();
        let mut d = a - prev;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d <= -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        acc += d;
        prev = a;
        out.push(acc);
    }
    Ok(out)
}

/// Unwrapped phase (rad) accumulated by amplitude `index` over the trajectory.
pub fn accumulated_phase(traj: &Trajectory<QuantumState>, index: usize) -> Result<f64> {
    Ok(*phase_series(traj, index)?.last().expect("non-empty"))
}
