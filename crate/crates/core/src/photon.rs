//! Remote spin-spin entanglement through two-photon interference.
//!
//! Each dot emits one photon whose polarization (and energy) is entangled
//! with its spin. The two photons meet on a beam splitter; a coincidence
//! between the output ports heralds the antisymmetric Bell state. Any
//! spectral mismatch between the two sources makes the photons partially
//! distinguishable and degrades the heralded state.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::C64;
use crate::error::{invalid, Error, Result};
use crate::seed;
use crate::units::HBAR_MEV_PS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    SigmaPlus,
    SigmaMinus,
}

/// A spontaneously emitted photon: one-sided exponential in time, hence a
/// Lorentzian line of FWHM `linewidth_mev`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonWavepacket {
    pub polarization: Polarization,
    pub center_mev: f64,
    /// ħ/T_rad.
    pub linewidth_mev: f64,
    /// Start of the emission (ps).
    pub delay_ps: f64,
}

impl PhotonWavepacket {
    pub fn from_lifetime(polarization: Polarization, center_mev: f64, t_rad_ps: f64) -> Self {
        Self {
            polarization,
            center_mev,
            linewidth_mev: HBAR_MEV_PS / t_rad_ps,
            delay_ps: 0.0,
        }
    }

    /// Intensity decay rate in 1/ps.
    pub fn decay_rate(&self) -> f64 {
        self.linewidth_mev / HBAR_MEV_PS
    }

    /// Normalized temporal amplitude ξ(t).
    pub fn amplitude(&self, t_ps: f64) -> C64 {
        if t_ps < self.delay_ps {
            return C64::default();
        }
        let g = self.decay_rate();
        let w = self.center_mev / HBAR_MEV_PS;
        let s = t_ps - self.delay_ps;
        C64::from_polar(g.sqrt() * (-0.5 * g * s).exp(), -w * t_ps)
    }

    /// Spectral-temporal overlap ⟨self|other⟩, ignoring polarization.
    pub fn overlap(&self, other: &PhotonWavepacket) -> C64 {
        let (ga, gb) = (self.decay_rate(), other.decay_rate());
        let dw = (self.center_mev - other.center_mev) / HBAR_MEV_PS;
        let t0 = self.delay_ps.max(other.delay_ps);
        let pre = (ga * gb).sqrt()
            * (-0.5 * ga * (t0 - self.delay_ps) - 0.5 * gb * (t0 - other.delay_ps)).exp();
        // ∫_{t0}^∞ e^{−(γa+γb)(t−t0)/2} e^{iδω t} dt
        C64::from_polar(pre, dw * t0) / C64::new(0.5 * (ga + gb), -dw)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapError {
    /// 1 − |⟨ξ_A|ξ_B⟩|² = δω²/(γ² + δω²) for exponential wavepackets.
    pub exact: f64,
    /// (δE/ħγ)², the small-mismatch expansion.
    pub leading_order: f64,
}

fn check_lifetime(t_rad_ps: f64) -> Result<()> {
    if !(t_rad_ps > 0.0) {
        return Err(invalid("t_rad_ps", "radiative lifetime must be > 0"));
    }
    Ok(())
}

/// Bell-measurement error from a spectral mismatch `delta_e_uev` between
/// otherwise identical sources.
pub fn wavepacket_overlap_error(delta_e_uev: f64, t_rad_ps: f64) -> Result<OverlapError> {
    check_lifetime(t_rad_ps)?;
    let gamma = 1.0 / t_rad_ps;
    let dw = delta_e_uev * 1e-3 / HBAR_MEV_PS;
    let x = (dw / gamma).powi(2);
    Ok(OverlapError {
        exact: x / (1.0 + x),
        leading_order: x,
    })
}

/// Polarization state of the photon pair entering the beam splitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoPhotonInput {
    /// (|σ₊⟩_A|σ₋⟩_B − |σ₋⟩_A|σ₊⟩_B)/√2
    PsiMinus,
    /// (|σ₊⟩_A|σ₋⟩_B + |σ₋⟩_A|σ₊⟩_B)/√2
    PsiPlus,
    /// |σ₊⟩_A|σ₋⟩_B
    Product,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellOutcome {
    /// Probability of one photon in each output port.
    pub coincidence_probability: f64,
    /// Error of the spin state heralded by a coincidence.
    pub heralded_error: f64,
    /// Heralding probability per attempt with lossless optics: two of the
    /// four Bell states are identified.
    pub success_probability: f64,
}

impl BellOutcome {
    pub fn no_coincidence_probability(&self) -> f64 {
        1.0 - self.coincidence_probability
    }
}

/// Linear-optics Bell-state analysis on a 50:50 beam splitter.
///
/// Source B is detuned by `delta_e_uev` on both polarization components.
/// With O_± the overlap of the A and B wavepackets of each polarization,
/// the coincidence probability is ½(1 ∓ Re O₊*O₋) for ψ±; the product input
/// carries no exchange term and always gives ½.
pub fn bsa_coincidence(
    input: TwoPhotonInput,
    delta_e_uev: f64,
    t_rad_ps: f64,
) -> Result<BellOutcome> {
    check_lifetime(t_rad_ps)?;
    let a = PhotonWavepacket::from_lifetime(Polarization::SigmaPlus, 0.0, t_rad_ps);
    let b = PhotonWavepacket {
        center_mev: delta_e_uev * 1e-3,
        ..a
    };
    let o = a.overlap(&b);
    let exchange = (o.conj() * o).re;
    let coincidence = match input {
        TwoPhotonInput::PsiMinus => 0.5 * (1.0 + exchange),
        TwoPhotonInput::PsiPlus => 0.5 * (1.0 - exchange),
        TwoPhotonInput::Product => 0.5,
    };
    Ok(BellOutcome {
        coincidence_probability: coincidence,
        heralded_error: wavepacket_overlap_error(delta_e_uev, t_rad_ps)?.exact,
        success_probability: 0.5,
    })
}

/// Per-photon efficiency chain and link geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkBudget {
    /// Waveguide collection efficiency.
    pub eta_wg: f64,
    /// Start of the detection window after the pump pulse (ps).
    pub t_switch_ps: f64,
    pub eta_det: f64,
    /// Fiber attenuation (dB/km). Zero by default: the combined efficiency
    /// below already includes transmission.
    pub alpha_fiber_db_km: f64,
    /// Node separation (km); detectors sit at the midpoint.
    pub l0_km: f64,
    /// Signal velocity in fiber (km/ms).
    pub c_fiber_km_ms: f64,
    /// Total per-photon efficiency; replaces the chain when set.
    pub eta_override: Option<f64>,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            eta_wg: 0.95,
            t_switch_ps: 100.0,
            eta_det: 0.37,
            alpha_fiber_db_km: 0.0,
            l0_km: 20.0,
            c_fiber_km_ms: 200.0,
            eta_override: Some(0.25),
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(unit(self.eta_wg) && unit(self.eta_det) && self.eta_override.is_none_or(unit)) {
            return Err(invalid("link", "efficiencies must lie in [0, 1]"));
        }
        if !(self.l0_km > 0.0) {
            return Err(invalid("link.l0_km", "must be > 0"));
        }
        if !(self.c_fiber_km_ms > 0.0) {
            return Err(invalid("link.c_fiber_km_ms", "must be > 0"));
        }
        if !(self.t_switch_ps >= 0.0 && self.alpha_fiber_db_km >= 0.0) {
            return Err(invalid("link", "t_switch and attenuation must be >= 0"));
        }
        Ok(())
    }
}

/// Probability that one emitted photon is detected.
pub fn photon_efficiency(budget: &LinkBudget, t_rad_ps: f64) -> f64 {
    if let Some(eta) = budget.eta_override {
        return eta;
    }
    let capture = (-budget.t_switch_ps / t_rad_ps).exp();
    let fiber = 10f64.powf(-budget.alpha_fiber_db_km * 0.5 * budget.l0_km / 10.0);
    budget.eta_wg * capture * fiber * budget.eta_det
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkStats {
    pub p_success: f64,
    pub period_ms: f64,
    pub mean_time_ms: f64,
}

/// Heralded-link statistics for sequential attempts.
pub fn link_attempt_stats(budget: &LinkBudget, t_rad_ps: f64) -> Result<LinkStats> {
    let eta = photon_efficiency(budget, t_rad_ps);
    let p = 0.5 * eta * eta;
    if !(p > 0.0) {
        return Err(Error::ZeroSuccessProbability);
    }
    let period = budget.l0_km / budget.c_fiber_km_ms;
    Ok(LinkStats {
        p_success: p,
        period_ms: period,
        mean_time_ms: period / p,
    })
}

impl LinkStats {
    /// Number of attempts up to and including the first success.
    pub fn sample_attempts<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.p_success >= 1.0 {
            return 1;
        }
        let g = Geometric::new(self.p_success).expect("p in (0, 1)");
        g.sample(rng) + 1
    }

    pub fn sample_time_ms<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_attempts(rng) as f64 * self.period_ms
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkMonteCarlo {
    pub n_trials: usize,
    pub mean_time_ms: f64,
    pub standard_error_ms: f64,
}

/// Monte Carlo estimate of the mean link time.
pub fn link_time_monte_carlo(stats: &LinkStats, n_trials: usize, seed: u64) -> LinkMonteCarlo {
    const CHUNK: usize = 4096;
    let n_chunks = n_trials.div_ceil(CHUNK);
    let sums: Vec<(f64, f64)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed::stream(seed, "link", c as u64);
            let n = CHUNK.min(n_trials - c * CHUNK);
            let mut s = 0.0;
            let mut s2 = 0.0;
            for _ in 0..n {
                let t = stats.sample_time_ms(&mut rng);
                s += t;
                s2 += t * t;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums
        .iter()
        .fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    let n = n_trials.max(1) as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    LinkMonteCarlo {
        n_trials,
        mean_time_ms: mean,
        standard_error_ms: (var / n).sqrt(),
    }
}

/// Error from pure dephasing of the emitting transition, γ_d/(γ + γ_d).
pub fn dephasing_error(t_rad_ps: f64, t_deph_ps: f64) -> Result<f64> {
    check_lifetime(t_rad_ps)?;
    if !(t_deph_ps > 0.0) {
        return Err(invalid("t_deph_ps", "must be > 0"));
    }
    let g = 1.0 / t_rad_ps;
    let gd = 1.0 / t_deph_ps;
    Ok(gd / (g + gd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const HBAR_GAMMA_300_UEV: f64 = HBAR_MEV_PS / 300.0 * 1e3;

    #[test]
    fn overlap_error_examples() {
        assert_eq!(wavepacket_overlap_error(0.0, 300.0).unwrap().exact, 0.0);
        let e = wavepacket_overlap_error(HBAR_GAMMA_300_UEV, 300.0).unwrap();
        assert_abs_diff_eq!(e.exact, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(e.leading_order, 1.0, epsilon = 1e-12);
        let e = wavepacket_overlap_error(0.2, 300.0).unwrap();
        assert_abs_diff_eq!(e.exact, 0.008_24, epsilon = 1e-4);
        assert!(wavepacket_overlap_error(0.2, 0.0).is_err());
    }

    /// Independent route: integrate ξ_A*(t) ξ_B(t) on a fine grid.
    fn numeric_overlap(a: &PhotonWavepacket, b: &PhotonWavepacket) -> C64 {
        let t_end = 40.0 / a.decay_rate().min(b.decay_rate());
        let n = 400_000;
        let dt = t_end / n as f64;
        let mut acc = C64::default();
        for i in 0..=n {
            let t = i as f64 * dt;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += a.amplitude(t).conj() * b.amplitude(t) * w;
        }
        acc * dt
    }

    #[test]
    fn closed_form_overlap_matches_quadrature() {
        let a = PhotonWavepacket::from_lifetime(Polarization::SigmaPlus, 1650.0, 300.0);
        for (de, delay, t_b) in [(0.0, 0.0, 300.0), (0.003, 0.0, 300.0), (0.001, 50.0, 450.0)] {
            let mut b = PhotonWavepacket::from_lifetime(Polarization::SigmaPlus, 1650.0 + de, t_b);
            b.delay_ps = delay;
            let exact = a.overlap(&b);
            let num = numeric_overlap(&a, &b);
            assert!((exact - num).norm() < 1e-4, "{exact} vs {num}");
        }
    }

    #[test]
    fn bell_analysis_examples() {
        let m = bsa_coincidence(TwoPhotonInput::PsiMinus, 0.0, 300.0).unwrap();
        assert_eq!(m.coincidence_probability, 1.0);
        assert_eq!(m.heralded_error, 0.0);
        let p = bsa_coincidence(TwoPhotonInput::PsiPlus, 0.0, 300.0).unwrap();
        assert_eq!(p.coincidence_probability, 0.0);
        let prod =
            bsa_coincidence(TwoPhotonInput::Product, 10.0 * HBAR_GAMMA_300_UEV, 300.0).unwrap();
        assert!((prod.coincidence_probability - 0.5).abs() <= 0.005);
        // distinguishable photons lose the interference
        let far =
            bsa_coincidence(TwoPhotonInput::PsiMinus, 100.0 * HBAR_GAMMA_300_UEV, 300.0).unwrap();
        assert!((far.coincidence_probability - 0.5).abs() < 1e-3);
    }

    #[test]
    fn product_state_oracle_via_amplitudes() {
        // The product input is the equal mixture of ψ+ and ψ- amplitudes:
        // P = ½(P_ψ+ + P_ψ-) built from the numerically integrated overlap.
        let de = 10.0 * HBAR_GAMMA_300_UEV * 1e-3;
        let a = PhotonWavepacket::from_lifetime(Polarization::SigmaPlus, 0.0, 300.0);
        let b = PhotonWavepacket::from_lifetime(Polarization::SigmaPlus, de, 300.0);
        let o = numeric_overlap(&a, &b).norm_sqr();
        let p = 0.5 * (0.5 * (1.0 + o) + 0.5 * (1.0 - o));
        let prod = bsa_coincidence(TwoPhotonInput::Product, de * 1e3, 300.0).unwrap();
        assert!((prod.coincidence_probability - p).abs() < 1e-9);
        assert!((p - 0.5).abs() <= 0.005);
    }

    #[test]
    fn efficiency_examples() {
        let unit = LinkBudget {
            eta_wg: 1.0,
            t_switch_ps: 0.0,
            eta_det: 1.0,
            alpha_fiber_db_km: 0.0,
            eta_override: None,
            ..Default::default()
        };
        assert_eq!(photon_efficiency(&unit, 300.0), 1.0);
        let capture = LinkBudget {
            t_switch_ps: 100.0,
            ..unit.clone()
        };
        assert_abs_diff_eq!(photon_efficiency(&capture, 300.0), 0.7165, epsilon = 1e-4);
        assert_eq!(photon_efficiency(&LinkBudget::default(), 300.0), 0.25);
        let lossy = LinkBudget {
            alpha_fiber_db_km: 0.2,
            ..unit
        };
        // 10 km to the midpoint at 0.2 dB/km is 2 dB
        assert_abs_diff_eq!(
            photon_efficiency(&lossy, 300.0),
            10f64.powf(-0.2),
            epsilon = 1e-12
        );
    }

    #[test]
    fn link_stats_examples() {
        let ideal = LinkBudget {
            eta_override: Some(1.0),
            ..Default::default()
        };
        let s = link_attempt_stats(&ideal, 300.0).unwrap();
        assert_eq!(s.p_success, 0.5);

        let s = link_attempt_stats(&LinkBudget::default(), 300.0).unwrap();
        assert_abs_diff_eq!(s.p_success, 0.03125, epsilon = 1e-15);
        assert_abs_diff_eq!(s.period_ms, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mean_time_ms, 3.2, epsilon = 1e-12);

        let certain = LinkStats {
            p_success: 1.0,
            period_ms: 0.1,
            mean_time_ms: 0.1,
        };
        let mut rng = seed::stream(0, "test", 0);
        assert_eq!(certain.sample_time_ms(&mut rng), 0.1);

        let dark = LinkBudget {
            eta_override: Some(0.0),
            ..Default::default()
        };
        assert_eq!(
            link_attempt_stats(&dark, 300.0),
            Err(Error::ZeroSuccessProbability)
        );
    }

    #[test]
    fn link_monte_carlo_matches_mean() {
        let s = link_attempt_stats(&LinkBudget::default(), 300.0).unwrap();
        let mc = link_time_monte_carlo(&s, 100_000, 11);
        assert!(((mc.mean_time_ms - s.mean_time_ms) / s.mean_time_ms).abs() < 0.02);
        assert_eq!(mc, link_time_monte_carlo(&s, 100_000, 11));
    }

    #[test]
    fn dephasing_examples() {
        assert_abs_diff_eq!(
            dephasing_error(300.0, 30_000.0).unwrap(),
            0.0099,
            epsilon = 1e-4
        );
        assert_abs_diff_eq!(dephasing_error(300.0, 300.0).unwrap(), 0.5, epsilon = 1e-15);
        assert!(dephasing_error(300.0, 1e300).unwrap() < 1e-290);
        assert!(dephasing_error(300.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn overlap_error_shape(de in 0.0f64..50.0) {
            let e = wavepacket_overlap_error(de, 300.0).unwrap();
            let m = wavepacket_overlap_error(-de, 300.0).unwrap();
            prop_assert_eq!(e.exact, m.exact);
            prop_assert!(e.exact <= 1.0);
            let bigger = wavepacket_overlap_error(de + 0.01, 300.0).unwrap();
            prop_assert!(bigger.exact >= e.exact);
            if de <= 0.2 * HBAR_GAMMA_300_UEV && de > 0.0 {
                prop_assert!(((e.leading_order - e.exact) / e.leading_order).abs() < 0.05);
            }
        }

        #[test]
        fn bell_probabilities_sum(de in 0.0f64..20.0) {
            for input in [TwoPhotonInput::PsiMinus, TwoPhotonInput::PsiPlus] {
                let o = bsa_coincidence(input, de, 300.0).unwrap();
                prop_assert!((o.coincidence_probability + o.no_coincidence_probability() - 1.0).abs() < 1e-10);
                prop_assert!((0.0..=1.0).contains(&o.coincidence_probability));
            }
        }
    }
}
