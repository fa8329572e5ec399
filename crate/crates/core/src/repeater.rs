//! Entanglement distribution over a nested repeater chain.
//!
//! Every segment produces a heralded pair after a geometric number of
//! attempts. Neighbouring pairs are joined by deterministic entanglement
//! swapping, level by level, until a single pair spans the chain. Pairs are
//! tracked as Werner states: ρ = w|Φ⟩⟨Φ| + (1 − w)·1/4, fidelity (1 + 3w)/4.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::photon::{link_attempt_stats, wavepacket_overlap_error, LinkBudget, LinkStats};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WernerPair {
    pub w: f64,
    pub left: usize,
    pub right: usize,
    /// Time at which both end nodes know the pair exists (ms).
    pub ready_ms: f64,
}

impl WernerPair {
    pub fn new(w: f64, left: usize, right: usize, ready_ms: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(invalid("w", format!("{w} not in [0, 1]")));
        }
        if left >= right {
            return Err(invalid(
                "pair",
                format!("left {left} must be < right {right}"),
            ));
        }
        Ok(Self {
            w,
            left,
            right,
            ready_ms,
        })
    }

    pub fn fidelity(&self) -> f64 {
        werner_fidelity(self.w)
    }
}

pub fn werner_fidelity(w: f64) -> f64 {
    (1.0 + 3.0 * w) / 4.0
}

pub fn werner_from_fidelity(f: f64) -> f64 {
    (4.0 * f - 1.0) / 3.0
}

/// Local noise of a swap and the classical channel that announces it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapParams {
    /// Two-qubit gate error, modelled as two-qubit depolarization.
    pub eps_gate: f64,
    /// Measurement error, modelled as single-qubit depolarization on each
    /// measured qubit.
    pub eps_meas: f64,
    /// Length of one elementary segment (km).
    pub segment_km: f64,
    /// Classical signal velocity (km/ms).
    pub c_km_ms: f64,
}

impl SwapParams {
    /// Depolarizing weight 1 − (1 − ε_gate)(1 − ε_meas)².
    pub fn depolarization(&self) -> f64 {
        1.0 - (1.0 - self.eps_gate) * (1.0 - self.eps_meas).powi(2)
    }
}

/// Joins two pairs sharing a node. The result is ready once the Bell
/// measurement outcome has crossed the spanned distance.
pub fn swap(a: &WernerPair, b: &WernerPair, params: &SwapParams) -> Result<WernerPair> {
    if a.right != b.left {
        return Err(Error::NonAdjacentPairs {
            a_left: a.left,
            a_right: a.right,
            b_left: b.left,
            b_right: b.right,
        });
    }
    let w = a.w * b.w * (1.0 - params.depolarization());
    let span_km = (b.right - a.left) as f64 * params.segment_km;
    Ok(WernerPair {
        w,
        left: a.left,
        right: b.right,
        ready_ms: a.ready_ms.max(b.ready_ms) + span_km / params.c_km_ms,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainConfig {
    /// Number of elementary segments; a power of two.
    pub n_links: usize,
    pub eps_gate: f64,
    pub eps_meas: f64,
    /// Werner parameter of fresh elementary pairs. When unset it follows
    /// from the Bell-measurement error at `delta_e_uev`.
    pub w0: Option<f64>,
    /// Residual spectral mismatch between neighbouring emitters (μeV).
    pub delta_e_uev: f64,
    /// Classical signal velocity for swap announcements (km/ms).
    pub c_classical_km_ms: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_links: 64,
            eps_gate: 0.005,
            eps_meas: 0.005,
            w0: None,
            delta_e_uev: 0.2,
            c_classical_km_ms: 200.0,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_links == 0 || !self.n_links.is_power_of_two() {
            return Err(invalid("chain.n_links", "must be a power of two >= 1"));
        }
        let err = |x: f64| (0.0..1.0).contains(&x);
        if !(err(self.eps_gate) && err(self.eps_meas)) {
            return Err(invalid("chain", "errors must lie in [0, 1)"));
        }
        if let Some(w) = self.w0 {
            if !(0.0..=1.0).contains(&w) {
                return Err(invalid("chain.w0", "must lie in [0, 1]"));
            }
        }
        if !(self.c_classical_km_ms > 0.0) {
            return Err(invalid("chain.c_classical_km_ms", "must be > 0"));
        }
        Ok(())
    }

    pub fn levels(&self) -> u32 {
        self.n_links.trailing_zeros()
    }

    /// Werner parameter of an elementary pair.
    pub fn elementary_w(&self, t_rad_ps: f64) -> Result<f64> {
        match self.w0 {
            Some(w) => Ok(w),
            None => {
                let e = wavepacket_overlap_error(self.delta_e_uev, t_rad_ps)?.exact;
                Ok(werner_from_fidelity(1.0 - e).clamp(0.0, 1.0))
            }
        }
    }

    fn swap_params(&self, link: &LinkBudget) -> SwapParams {
        SwapParams {
            eps_gate: self.eps_gate,
            eps_meas: self.eps_meas,
            segment_km: link.l0_km,
            c_km_ms: self.c_classical_km_ms,
        }
    }
}

/// One Monte Carlo trial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub total_time_ms: f64,
    /// Latest elementary-link completion in this trial.
    pub max_link_time_ms: f64,
    pub w: f64,
    pub fidelity: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quantiles {
    pub p05: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p95: f64,
}

impl Quantiles {
    /// Nearest-rank quantiles of `values` (sorted in place).
    pub fn of(values: &mut [f64]) -> Self {
        values.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let n = values.len();
            let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
            values[idx]
        };
        Self {
            p05: q(0.05),
            p25: q(0.25),
            p50: q(0.5),
            p75: q(0.75),
            p95: q(0.95),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelStats {
    /// 0 for elementary pairs.
    pub level: u32,
    pub span_links: usize,
    pub mean_ready_ms: f64,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainSummary {
    pub n_links: usize,
    pub n_trials: usize,
    pub total_km: f64,
    pub link: LinkStats,
    pub mean_time_ms: f64,
    pub mean_time_se_ms: f64,
    pub time_ms: Quantiles,
    pub w: Quantiles,
    pub fidelity: Quantiles,
    pub per_level: Vec<LevelStats>,
    pub analytic_mean_time_ms: f64,
}

/// Output of [`simulate_chain`]: summary plus per-trial records.
#[derive(Clone, Debug)]
pub struct ChainRun {
    pub summary: ChainSummary,
    pub trials: Vec<TrialRecord>,
}

struct TrialOutcome {
    record: TrialRecord,
    level_ready_sums: Vec<f64>,
}

fn run_trial(
    cfg: &ChainConfig,
    link: &LinkBudget,
    stats: &LinkStats,
    w0: f64,
    seed: u64,
    trial: u64,
) -> Result<TrialOutcome> {
    let mut rng = seed::stream(seed, "repeater", trial);
    let params = cfg.swap_params(link);
    let mut pairs: Vec<WernerPair> = (0..cfg.n_links)
        .map(|i| WernerPair {
            w: w0,
            left: i,
            right: i + 1,
            ready_ms: stats.sample_time_ms(&mut rng),
        })
        .collect();
    let max_link = pairs.iter().map(|p| p.ready_ms).fold(0.0, f64::max);
    let mut level_ready_sums =
        vec![pairs.iter().map(|p| p.ready_ms).sum::<f64>() / pairs.len() as f64];
    while pairs.len() > 1 {
        pairs = pairs
            .chunks_exact(2)
            .map(|c| swap(&c[0], &c[1], &params))
            .collect::<Result<_>>()?;
        level_ready_sums.push(pairs.iter().map(|p| p.ready_ms).sum::<f64>() / pairs.len() as f64);
    }
    let end = pairs[0];
    Ok(TrialOutcome {
        record: TrialRecord {
            trial,
            total_time_ms: end.ready_ms,
            max_link_time_ms: max_link,
            w: end.w,
            fidelity: end.fidelity(),
        },
        level_ready_sums,
    })
}

/// Monte Carlo of `n_trials` independent end-to-end distributions.
pub fn simulate_chain(
    cfg: &ChainConfig,
    link: &LinkBudget,
    t_rad_ps: f64,
    n_trials: usize,
    seed: u64,
) -> Result<ChainRun> {
    cfg.validate()?;
    link.validate()?;
    if n_trials == 0 {
        return Err(invalid("trials", "must be >= 1"));
    }
    let stats = link_attempt_stats(link, t_rad_ps)?;
    let w0 = cfg.elementary_w(t_rad_ps)?;
    let outcomes = (0..n_trials as u64)
        .into_par_iter()
        .map(|i| run_trial(cfg, link, &stats, w0, seed, i))
        .collect::<Result<Vec<_>>>()?;

    let n = n_trials as f64;
    let levels = cfg.levels() as usize;
    let mut level_means = vec![0.0; levels + 1];
    for o in &outcomes {
        for (m, s) in level_means.iter_mut().zip(&o.level_ready_sums) {
            *m += s / n;
        }
    }
    let params = cfg.swap_params(link);
    let mut w_level = w0;
    let per_level = level_means
        .iter()
        .enumerate()
        .map(|(l, m)| {
            if l > 0 {
                w_level = w_level * w_level * (1.0 - params.depolarization());
            }
            LevelStats {
                level: l as u32,
                span_links: 1 << l,
                mean_ready_ms: *m,
                w: w_level,
            }
        })
        .collect();

    let trials: Vec<TrialRecord> = outcomes.into_iter().map(|o| o.record).collect();
    let mut times: Vec<f64> = trials.iter().map(|t| t.total_time_ms).collect();
    let mean = times.iter().sum::<f64>() / n;
    let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let mut ws: Vec<f64> = trials.iter().map(|t| t.w).collect();
    let mut fs: Vec<f64> = trials.iter().map(|t| t.fidelity).collect();

    let summary = ChainSummary {
        n_links: cfg.n_links,
        n_trials,
        total_km: cfg.n_links as f64 * link.l0_km,
        link: stats,
        mean_time_ms: mean,
        mean_time_se_ms: (var / n).sqrt(),
        time_ms: Quantiles::of(&mut times),
        w: Quantiles::of(&mut ws),
        fidelity: Quantiles::of(&mut fs),
        per_level,
        analytic_mean_time_ms: analytic_mean_time(cfg, link, t_rad_ps)?,
    };
    Ok(ChainRun { summary, trials })
}

/// Doubling estimate (period/P)·(3/2)^levels plus the classical delays of
/// one swap per level.
///
/// The 3/2 factor is exact for two segments (E[max] of two geometric times
/// ≈ 3/2 of one for small P); for deep chains it overestimates the expected
/// maximum of many link times, which grows only logarithmically.
pub fn analytic_mean_time(cfg: &ChainConfig, link: &LinkBudget, t_rad_ps: f64) -> Result<f64> {
    let stats = link_attempt_stats(link, t_rad_ps)?;
    let levels = cfg.levels() as i32;
    let delays: f64 = (1..=levels)
        .map(|l| (1u64 << l) as f64 * link.l0_km / cfg.c_classical_km_ms)
        .sum();
    Ok(stats.mean_time_ms * 1.5f64.powi(levels) + delays)
}
