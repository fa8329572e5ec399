//! Single- and two-qubit gate errors.
//!
//! The controlled-phase gate drives the σ₊ transition |1/2⟩ → |3/2⟩_T of
//! two stacked dots with the same slightly detuned Gaussian pulse. Only
//! |1/2⟩ couples, so each dot is a two-level system {g, T} and |−1/2⟩ is a
//! spectator. When both dots are excited the |TT⟩ level is shifted by the
//! trion dipole-dipole energy, and the adiabatically returning |gg⟩
//! amplitude picks up a phase that differs from the sum of the
//! single-dot light shifts.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    accumulated_phase, evolve_lindblad_with, evolve_schrodinger_with, CMatrix, EvolveOptions,
    JumpOperator, QuantumState, TimeDependentHamiltonian, Trajectory, C64,
};
use crate::error::{invalid, Error, Result};
use crate::units::{mev_to_rad_per_ps, HBAR_MEV_PS};

/// Ω(t) below this fraction of Ω₀ is dropped from the integration window.
pub const PULSE_CUTOFF: f64 = 1e-6;

/// Trion population left at pulse end above which a gate is non-adiabatic.
pub const ADIABATIC_RESIDUAL: f64 = 1e-3;

/// Gaussian Rabi pulse Ω(t) = Ω₀ exp(−t²/τ²) at detuning Δ.
///
/// The trion level sits Δ above the drive resonance, i.e. the rotating-frame
/// single-dot Hamiltonian is [[0, Ω/2], [Ω/2, Δ]].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulsedDrive {
    /// Peak Rabi frequency (rad/ps).
    pub omega0: f64,
    /// Gaussian width (ps).
    pub tau_ps: f64,
    /// Detuning (rad/ps).
    pub delta: f64,
}

impl Default for PulsedDrive {
    fn default() -> Self {
        Self {
            omega0: 1.0,
            tau_ps: 11.0,
            delta: 0.75,
        }
    }
}

impl PulsedDrive {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 >= 0.0) {
            return Err(invalid("drive.omega0", "must be >= 0"));
        }
        if !(self.tau_ps > 0.0) {
            return Err(invalid("drive.tau_ps", "must be > 0"));
        }
        if !self.delta.is_finite() {
            return Err(invalid("drive.delta", "must be finite"));
        }
        Ok(())
    }

    pub fn rabi(&self, t: f64) -> f64 {
        self.omega0 * (-(t / self.tau_ps).powi(2)).exp()
    }

    /// Symmetric window where Ω(t) ≥ 10⁻⁶ Ω₀ (|t| ≤ 3.717 τ).
    pub fn support(&self) -> (f64, f64) {
        let half = self.tau_ps * (1.0 / PULSE_CUTOFF).ln().sqrt();
        (-half, half)
    }

    /// ∫Ω²(t) dt = Ω₀² τ √(π/2) in rad²/ps.
    pub fn rabi_squared_area(&self) -> f64 {
        self.omega0 * self.omega0 * self.tau_ps * (std::f64::consts::PI / 2.0).sqrt()
    }

    /// Adiabatic energy of a ground state coupled with strength √n·Ω/2 to a
    /// level at Δ: (Δ − sgn(Δ)√(Δ² + nΩ²))/2.
    pub fn dressed_ground_energy(&self, t: f64, n_coupled: f64) -> f64 {
        let o = self.rabi(t);
        let root = (self.delta * self.delta + n_coupled * o * o).sqrt();
        0.5 * (self.delta - self.delta.signum() * root)
    }
}

/// Sign of the |TT⟩ shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DipoleShiftSign {
    /// |TT⟩ lowered by E_dd.
    #[default]
    Binding,
    /// |TT⟩ raised by E_dd.
    Repulsive,
}

impl DipoleShiftSign {
    fn factor(self) -> f64 {
        match self {
            DipoleShiftSign::Binding => -1.0,
            DipoleShiftSign::Repulsive => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateOptions {
    pub tol: f64,
    pub sign: DipoleShiftSign,
    /// Largest integration step (ps); keeps phase unwrapping unambiguous.
    pub max_step_ps: f64,
}

impl Default for GateOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            sign: DipoleShiftSign::Binding,
            max_step_ps: 0.5,
        }
    }
}

impl GateOptions {
    fn evolve(&self) -> EvolveOptions {
        EvolveOptions {
            tol: self.tol,
            max_step: Some(self.max_step_ps),
        }
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Single driven dot on {|g⟩, |T⟩}.
pub fn single_dot_hamiltonian(drive: &PulsedDrive) -> Result<TimeDependentHamiltonian> {
    let d = *drive;
    TimeDependentHamiltonian::new(2, d.support(), move |t| {
        let half = real(0.5 * d.rabi(t));
        CMatrix::from_row_slice(2, 2, &[real(0.0), half, half, real(d.delta)])
    })
}

/// Two driven dots on {|gg⟩, |Tg⟩, |gT⟩, |TT⟩} with |TT⟩ shifted by
/// `tt_shift` (rad/ps). An infinite shift removes |TT⟩ (perfect blockade)
/// and yields the three-level space {|gg⟩, |Tg⟩, |gT⟩}.
pub fn pair_hamiltonian(drive: &PulsedDrive, tt_shift: f64) -> Result<TimeDependentHamiltonian> {
    let d = *drive;
    if tt_shift.is_infinite() {
        return TimeDependentHamiltonian::new(3, d.support(), move |t| {
            let h = real(0.5 * d.rabi(t));
            let z = real(0.0);
            let dl = real(d.delta);
            CMatrix::from_row_slice(3, 3, &[z, h, h, h, dl, z, h, z, dl])
        });
    }
    TimeDependentHamiltonian::new(4, d.support(), move |t| {
        let h = real(0.5 * d.rabi(t));
        let z = real(0.0);
        let dl = real(d.delta);
        let tt = real(2.0 * d.delta + tt_shift);
        CMatrix::from_row_slice(4, 4, &[z, h, h, z, h, dl, z, h, h, z, dl, h, z, h, h, tt])
    })
}

/// Two-qubit gate outcome. Phases in rad, exposures in ps.
#[derive(Clone, Debug, Serialize)]
pub struct GateReport {
    pub e_dd_mev: f64,
    /// φ₁₁ − φ₁₀ − φ₀₁ + φ₀₀.
    pub conditional_phase: f64,
    /// Phases of the |gg⟩-type amplitude for inputs 00, 10, 01, 11.
    pub input_phases: [f64; 4],
    /// ∫P_T dt of one driven dot.
    pub single_dot_exposure_ps: f64,
    /// Expected number of trions integrated over time, per input 00, 10, 01, 11.
    pub input_exposures_ps: [f64; 4],
    pub gamma_per_ps: f64,
    /// Γ·(single-dot exposure).
    pub spontaneous_error: f64,
    /// Γ·(exposure averaged over the four inputs).
    pub spontaneous_error_input_average: f64,
    /// Probability of a spontaneous emission from a Lindblad run with a sink level.
    pub spontaneous_error_lindblad: f64,
    /// Largest trion population left at pulse end over all inputs.
    pub residual_trion_population: f64,
    /// False when the trion population fails to return; phases are then unreliable.
    pub adiabatic: bool,
    pub max_norm_drift: f64,
    #[serde(skip)]
    pub single_dot_trajectory: Option<Trajectory<QuantumState>>,
    #[serde(skip)]
    pub pair_trajectory: Option<Trajectory<QuantumState>>,
}

/// Phase, exposure and residual trion population of one driven dot.
#[derive(Clone, Debug)]
pub struct SingleDotRun {
    pub phase: f64,
    pub exposure_ps: f64,
    pub residual: f64,
    pub trajectory: Trajectory<QuantumState>,
}

pub fn simulate_single_dot(drive: &PulsedDrive, opts: &GateOptions) -> Result<SingleDotRun> {
    drive.validate()?;
    let h = single_dot_hamiltonian(drive)?;
    let traj = evolve_schrodinger_with(&h, &QuantumState::basis(2, 0)?, &opts.evolve())?;
    Ok(SingleDotRun {
        phase: accumulated_phase(&traj, 0)?,
        exposure_ps: traj.integrated_populations()[1],
        residual: traj.final_populations()[1],
        trajectory: traj,
    })
}

/// Phase, total trion exposure and residual for the |1/2, 1/2⟩ input.
#[derive(Clone, Debug)]
pub struct PairRun {
    pub phase: f64,
    pub exposure_ps: f64,
    pub residual: f64,
    pub trajectory: Trajectory<QuantumState>,
}

pub fn simulate_pair(drive: &PulsedDrive, e_dd_mev: f64, opts: &GateOptions) -> Result<PairRun> {
    drive.validate()?;
    let shift = if e_dd_mev.is_infinite() {
        f64::INFINITY
    } else {
        opts.sign.factor() * mev_to_rad_per_ps(e_dd_mev)
    };
    let h = pair_hamiltonian(drive, shift)?;
    let dim = h.dim();
    let traj = evolve_schrodinger_with(&h, &QuantumState::basis(dim, 0)?, &opts.evolve())?;
    let ex = traj.integrated_populations();
    let fin = traj.final_populations();
    let (exposure, residual) = if dim == 4 {
        (ex[1] + ex[2] + 2.0 * ex[3], fin[1] + fin[2] + 2.0 * fin[3])
    } else {
        (ex[1] + ex[2], fin[1] + fin[2])
    };
    Ok(PairRun {
        phase: accumulated_phase(&traj, 0)?,
        exposure_ps: exposure,
        residual,
        trajectory: traj,
    })
}

/// Probability of a spontaneous emission during the single-dot pulse,
/// from a Lindblad run where the trion decays into an extra sink level.
pub fn lindblad_emission_probability(
    drive: &PulsedDrive,
    gamma_per_ps: f64,
    opts: &GateOptions,
) -> Result<f64> {
    let d = *drive;
    let h = TimeDependentHamiltonian::new(3, d.support(), move |t| {
        let half = real(0.5 * d.rabi(t));
        let z = real(0.0);
        CMatrix::from_row_slice(3, 3, &[z, half, z, half, real(d.delta), z, z, z, z])
    })?;
    let jump = JumpOperator::transition(3, 1, 2, gamma_per_ps)?;
    let rho0 = QuantumState::basis(3, 0)?.to_density();
    let traj = evolve_lindblad_with(&h, &[jump], &rho0, &opts.evolve())?;
    Ok(traj.final_populations()[2])
}

/// Simulates all four computational inputs of the controlled-phase gate.
///
/// `e_dd_mev` may be `f64::INFINITY` for the perfect-blockade limit.
pub fn simulate_conditional_gate(
    drive: &PulsedDrive,
    e_dd_mev: f64,
    gamma_per_ps: f64,
    opts: &GateOptions,
) -> Result<GateReport> {
    if !(gamma_per_ps >= 0.0) {
        return Err(invalid("gamma", "decay rate must be >= 0"));
    }
    if e_dd_mev.is_nan() || e_dd_mev < 0.0 {
        return Err(invalid("e_dd_mev", "must be >= 0 (sign is set separately)"));
    }
    let single = simulate_single_dot(drive, opts)?;
    let pair = simulate_pair(drive, e_dd_mev, opts)?;

    let phases = [0.0, single.phase, single.phase, pair.phase];
    let exposures = [
        0.0,
        single.exposure_ps,
        single.exposure_ps,
        pair.exposure_ps,
    ];
    let conditional = phases[3] - phases[1] - phases[2] + phases[0];
    let residual = single.residual.max(pair.residual);
    let lindblad = if gamma_per_ps > 0.0 {
        lindblad_emission_probability(drive, gamma_per_ps, opts)?
    } else {
        0.0
    };
    let avg_exposure = exposures.iter().sum::<f64>() / 4.0;
    Ok(GateReport {
        e_dd_mev,
        conditional_phase: conditional,
        input_phases: phases,
        single_dot_exposure_ps: single.exposure_ps,
        input_exposures_ps: exposures,
        gamma_per_ps,
        spontaneous_error: (gamma_per_ps * single.exposure_ps).min(1.0),
        spontaneous_error_input_average: (gamma_per_ps * avg_exposure).min(1.0),
        spontaneous_error_lindblad: lindblad,
        residual_trion_population: residual,
        adiabatic: residual < ADIABATIC_RESIDUAL,
        max_norm_drift: single
            .trajectory
            .max_norm_drift
            .max(pair.trajectory.max_norm_drift),
        single_dot_trajectory: Some(single.trajectory),
        pair_trajectory: Some(pair.trajectory),
    })
}

/// φ_cond as a function of E_dd (meV), reusing one single-dot run.
pub struct PhaseCurve {
    drive: PulsedDrive,
    opts: GateOptions,
    single_phase: f64,
}

impl PhaseCurve {
    pub fn new(drive: &PulsedDrive, opts: &GateOptions) -> Result<Self> {
        let single = simulate_single_dot(drive, opts)?;
        Ok(Self {
            drive: *drive,
            opts: *opts,
            single_phase: single.phase,
        })
    }

    pub fn conditional_phase(&self, e_dd_mev: f64) -> Result<f64> {
        if e_dd_mev == 0.0 {
            return Ok(0.0);
        }
        let pair = simulate_pair(&self.drive, e_dd_mev, &self.opts)?;
        Ok(pair.phase - 2.0 * self.single_phase)
    }
}

/// Grid resolution used to bracket the smallest root (meV).
const CALIBRATION_GRID_MEV: f64 = 0.05;
/// Phase accuracy of the calibrated solution (rad).
pub const CALIBRATION_PHASE_TOL: f64 = 1e-4;

/// Smallest E_dd in `range` (meV) with φ_cond(E_dd) = `target`.
pub fn calibrate_phase(
    drive: &PulsedDrive,
    target: f64,
    range: (f64, f64),
    opts: &GateOptions,
) -> Result<f64> {
    let (lo, hi) = range;
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(invalid(
            "e_dd_range",
            format!("[{lo}, {hi}] is not a valid interval"),
        ));
    }
    let curve = PhaseCurve::new(drive, opts)?;
    let f = |e: f64| curve.conditional_phase(e).map(|p| p - target);

    let n = ((hi - lo) / CALIBRATION_GRID_MEV).ceil().max(1.0) as usize;
    let mut a = lo;
    let mut fa = f(a)?;
    if fa.abs() <= CALIBRATION_PHASE_TOL {
        return Ok(a);
    }
    let (mut min, mut max) = (fa + target, fa + target);
    for i in 1..=n {
        let b = if i == n {
            hi
        } else {
            lo + (hi - lo) * i as f64 / n as f64
        };
        let fb = f(b)?;
        min = min.min(fb + target);
        max = max.max(fb + target);
        if fb.abs() <= CALIBRATION_PHASE_TOL {
            return Ok(b);
        }
        if fa.signum() != fb.signum() {
            return bisect(&f, (a, fa), (b, fb));
        }
        a = b;
        fa = fb;
    }
    Err(Error::PhaseUnattainable { target, min, max })
}

fn bisect<F>(f: &F, (mut a, mut fa): (f64, f64), (mut b, _fb): (f64, f64)) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm.abs() <= CALIBRATION_PHASE_TOL || (b - a) < 1e-12 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Excited-state decoherence and detuning of a two-photon Raman rotation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RamanConfig {
    /// Trion decoherence rate (1/s).
    pub gamma_trion_per_s: f64,
    /// Raman detuning from the trion (meV).
    pub detuning_mev: f64,
}

impl Default for RamanConfig {
    fn default() -> Self {
        Self {
            gamma_trion_per_s: 3e10,
            detuning_mev: 30.0,
        }
    }
}

impl RamanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_trion_per_s >= 0.0 && self.detuning_mev > 0.0) {
            return Err(invalid("raman", "rate must be >= 0 and detuning > 0"));
        }
        Ok(())
    }
}

/// Error of a Raman π rotation, πħγ/(2Δ).
///
/// With the trion eliminated adiabatically the effective coupling is
/// Ω²/(2Δ) and the excited-state population is ~Ω²/(4Δ²). A π rotation
/// lasts t = 2πΔ/Ω², so the scattered probability is
/// γ·t·Ω²/(4Δ²) = πγ/(2Δ) with Δ expressed as an angular frequency.
pub fn raman_gate_error(cfg: &RamanConfig) -> f64 {
    let hbar_mev_s = HBAR_MEV_PS * 1e-12;
    std::f64::consts::PI * hbar_mev_s * cfg.gamma_trion_per_s / (2.0 * cfg.detuning_mev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// ∫ f over the pulse support by composite Simpson with `n` panels.
    fn simpson<F: Fn(f64) -> f64>(f: F, (a, b): (f64, f64), n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn pulse_support_and_area() {
        let d = PulsedDrive::default();
        let (a, b) = d.support();
        assert_abs_diff_eq!(b, 3.7169 * 11.0, epsilon = 1e-3);
        assert_abs_diff_eq!(a, -b);
        assert_abs_diff_eq!(d.rabi(b) / d.omega0, PULSE_CUTOFF, epsilon = 1e-15);
        assert_abs_diff_eq!(d.rabi_squared_area(), 13.786_46, epsilon = 1e-4);
        let num = simpson(|t| d.rabi(t).powi(2), (-60.0, 60.0), 20_000);
        assert_abs_diff_eq!(d.rabi_squared_area(), num, epsilon = 1e-9);
    }

    #[test]
    fn zero_drive_is_trivial() {
        let d = PulsedDrive {
            omega0: 0.0,
            ..Default::default()
        };
        let r = simulate_conditional_gate(&d, 5.0, 1.0 / 300.0, &GateOptions::default()).unwrap();
        assert_eq!(r.conditional_phase, 0.0);
        assert_eq!(r.input_exposures_ps, [0.0; 4]);
        assert_eq!(r.spontaneous_error, 0.0);
        assert!(r.adiabatic);
    }

    #[test]
    fn single_dot_phase_vs_light_shift() {
        // The adiabatic light shift accounts for the phase up to the leading
        // non-adiabatic correction ∫(θ'/2)²/√(Δ²+Ω²) dt with tanθ = Ω/Δ.
        let d = PulsedDrive::default();
        let run = simulate_single_dot(&d, &GateOptions::default()).unwrap();
        let adiabatic = -simpson(|t| d.dressed_ground_energy(t, 1.0), d.support(), 20_000);
        let tau2 = d.tau_ps * d.tau_ps;
        let correction = simpson(
            |t| {
                let o = d.rabi(t);
                let od = -2.0 * t / tau2 * o;
                let gap2 = d.delta * d.delta + o * o;
                let theta_dot = d.delta * od / gap2;
                0.25 * theta_dot * theta_dot / gap2.sqrt()
            },
            d.support(),
            20_000,
        );
        assert_abs_diff_eq!(run.phase, adiabatic + correction, epsilon = 1e-3);
        assert!((run.phase - adiabatic).abs() < 0.03);
    }

    #[test]
    fn exposure_independent_of_dipole_energy() {
        let d = PulsedDrive::default();
        let o = GateOptions::default();
        let a = simulate_conditional_gate(&d, 2.0, 0.0, &o).unwrap();
        let b = simulate_conditional_gate(&d, 7.0, 0.0, &o).unwrap();
        assert_eq!(a.single_dot_exposure_ps, b.single_dot_exposure_ps);
        assert_eq!(a.input_exposures_ps[1], b.input_exposures_ps[1]);
    }

    #[test]
    fn exposure_grows_with_rabi_frequency() {
        let o = GateOptions::default();
        let d1 = PulsedDrive::default();
        let d2 = PulsedDrive { omega0: 2.0, ..d1 };
        let e1 = simulate_single_dot(&d1, &o).unwrap().exposure_ps;
        let e2 = simulate_single_dot(&d2, &o).unwrap().exposure_ps;
        assert!(e2 > e1);
    }

    #[test]
    fn spectral_reflection_flips_phase() {
        let o = GateOptions::default();
        let d = PulsedDrive::default();
        let mirrored = PulsedDrive {
            delta: -d.delta,
            ..d
        };
        let repulsive = GateOptions {
            sign: DipoleShiftSign::Repulsive,
            ..o
        };
        for e_dd in [0.5, 3.0] {
            let a = simulate_conditional_gate(&d, e_dd, 0.0, &o).unwrap();
            let b = simulate_conditional_gate(&mirrored, e_dd, 0.0, &repulsive).unwrap();
            assert_abs_diff_eq!(a.conditional_phase, -b.conditional_phase, epsilon = 1e-3);
        }
    }

    #[test]
    fn lindblad_cross_check() {
        let d = PulsedDrive::default();
        let r = simulate_conditional_gate(&d, 5.0, 1.0 / 300.0, &GateOptions::default()).unwrap();
        let rel = (r.spontaneous_error_lindblad - r.spontaneous_error).abs() / r.spontaneous_error;
        assert!(rel < 0.15, "{rel}");
    }

    #[test]
    fn calibration_target_zero_is_boundary() {
        let e = calibrate_phase(
            &PulsedDrive::default(),
            0.0,
            (0.0, 10.0),
            &GateOptions::default(),
        )
        .unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn unattainable_target_reports_range() {
        let err = calibrate_phase(
            &PulsedDrive::default(),
            100.0,
            (0.1, 0.5),
            &GateOptions::default(),
        )
        .unwrap_err();
        match err {
            Error::PhaseUnattainable { min, max, .. } => assert!(min < max && max < 100.0),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn raman_examples() {
        let cfg = RamanConfig::default();
        assert_abs_diff_eq!(raman_gate_error(&cfg), 1.034e-3, epsilon = 1e-6);
        let off = RamanConfig {
            gamma_trion_per_s: 0.0,
            ..cfg
        };
        assert_eq!(raman_gate_error(&off), 0.0);
        let far = RamanConfig {
            detuning_mev: 60.0,
            ..cfg
        };
        assert_eq!(raman_gate_error(&far) * 2.0, raman_gate_error(&cfg));
    }
}
