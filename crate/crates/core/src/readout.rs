//! Spin readout by cycling fluorescence.
//!
//! A σ₊ drive on |1/2⟩ → |3/2⟩_T makes a bright spin scatter photons while
//! a |−1/2⟩ spin stays dark. Each cycle has a small chance of decaying
//! through the forbidden transition, which shelves the spin into the dark
//! state and ends the signal. The spin is declared bright when the
//! detected count reaches a threshold.

use rand_distr::{Binomial, Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReadoutConfig {
    /// Shelving probability per cycle.
    pub p_forbidden: f64,
    /// Probability that the photon of a cycle is detected.
    pub eta_det: f64,
    /// Readout window length in cycles.
    pub n_cycles: u64,
    /// Minimum detected count for a "bright" verdict.
    pub threshold: u64,
    pub n_shots: usize,
}

impl Default for ReadoutConfig {
    fn default() -> Self {
        Self {
            p_forbidden: 1e-3,
            eta_det: 0.1,
            n_cycles: 200,
            threshold: 10,
            n_shots: 100_000,
        }
    }
}

impl ReadoutConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(unit(self.p_forbidden) && unit(self.eta_det)) {
            return Err(invalid("readout", "probabilities must lie in [0, 1]"));
        }
        if self.threshold < 1 {
            return Err(invalid("readout.threshold", "must be >= 1"));
        }
        if self.n_shots == 0 {
            return Err(invalid("readout.n_shots", "must be >= 1"));
        }
        Ok(())
    }

    /// Mean detected count without shelving.
    pub fn ideal_mean_counts(&self) -> f64 {
        self.eta_det * self.n_cycles as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReadoutReport {
    pub n_shots: usize,
    /// P(declared dark | bright).
    pub eps_bright: f64,
    pub eps_bright_se: f64,
    /// P(declared bright | dark).
    pub eps_dark: f64,
    pub eps_dark_se: f64,
    /// Poisson lower tail at the no-shelving mean count.
    pub eps_bright_poisson_limit: f64,
    pub mean_bright_counts: f64,
    /// Mean cycle index of the shelving decay, ignoring the window.
    pub mean_shelving_cycle: Option<f64>,
    pub mean_shelving_cycle_se: Option<f64>,
    /// Normalized count distribution of bright shots, index = count.
    pub bright_histogram: Vec<f64>,
    pub dark_histogram: Vec<f64>,
}

/// P(N ≤ threshold − 1) for N ~ Poisson(mean).
///
/// Terms are accumulated in log space so that large means do not underflow.
pub fn poisson_limit_error(mean: f64, threshold: u64) -> Result<f64> {
    if !(mean > 0.0) {
        return Err(invalid("mean", "must be > 0"));
    }
    if threshold == 0 {
        return Ok(0.0);
    }
    let ln_mean = mean.ln();
    let mut ln_term = -mean;
    let mut ln_terms = Vec::with_capacity(threshold as usize);
    ln_terms.push(ln_term);
    for k in 1..threshold {
        ln_term += ln_mean - (k as f64).ln();
        ln_terms.push(ln_term);
    }
    let max = ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = ln_terms.iter().map(|l| (l - max).exp()).sum();
    Ok((max + sum.ln()).exp().min(1.0))
}

#[derive(Default)]
struct Tally {
    bright_hist: Vec<u64>,
    dark_hist: Vec<u64>,
    bright_fail: u64,
    counts_sum: f64,
    shelve_sum: f64,
    shelve_sq: f64,
}

impl Tally {
    fn new(bins: usize) -> Self {
        Self {
            bright_hist: vec![0; bins],
            dark_hist: vec![0; bins],
            ..Default::default()
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.bright_hist.iter_mut().zip(other.bright_hist) {
            *a += b;
        }
        for (a, b) in self.dark_hist.iter_mut().zip(other.dark_hist) {
            *a += b;
        }
        self.bright_fail += other.bright_fail;
        self.counts_sum += other.counts_sum;
        self.shelve_sum += other.shelve_sum;
        self.shelve_sq += other.shelve_sq;
        self
    }
}

const SHOTS_PER_STREAM: usize = 8192;

/// Monte Carlo of `cfg.n_shots` bright and dark shots.
pub fn simulate_readout(cfg: &ReadoutConfig, seed: u64) -> Result<ReadoutReport> {
    cfg.validate()?;
    let bins = cfg.n_cycles as usize + 1;
    let shelving =
        (cfg.p_forbidden > 0.0).then(|| Geometric::new(cfg.p_forbidden).expect("p in (0, 1]"));
    let n_chunks = cfg.n_shots.div_ceil(SHOTS_PER_STREAM);

    let tallies: Vec<Tally> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed::stream(seed, "readout", c as u64);
            let shots = SHOTS_PER_STREAM.min(cfg.n_shots - c * SHOTS_PER_STREAM);
            let mut t = Tally::new(bins);
            for _ in 0..shots {
                // cycle on which the spin is shelved (1-based); its photon is
                // on the forbidden line and not counted
                let shelved_at = shelving.as_ref().map(|g| g.sample(&mut rng) + 1);
                let signal_cycles = match shelved_at {
                    Some(k) => (k - 1).min(cfg.n_cycles),
                    None => cfg.n_cycles,
                };
                let counts = Binomial::new(signal_cycles, cfg.eta_det)
                    .expect("valid binomial")
                    .sample(&mut rng);
                t.bright_hist[counts as usize] += 1;
                t.counts_sum += counts as f64;
                if counts < cfg.threshold {
                    t.bright_fail += 1;
                }
                if let Some(k) = shelved_at {
                    t.shelve_sum += k as f64;
                    t.shelve_sq += (k as f64) * (k as f64);
                }
                // an ideal dark spin scatters nothing
                t.dark_hist[0] += 1;
            }
            t
        })
        .collect();
    let total = tallies.into_iter().fold(Tally::new(bins), Tally::merge);

    let n = cfg.n_shots as f64;
    let rate = |fails: u64| {
        let p = fails as f64 / n;
        (p, (p * (1.0 - p) / n).sqrt())
    };
    let (eps_bright, eps_bright_se) = rate(total.bright_fail);
    let dark_fail = total.dark_hist[(cfg.threshold as usize).min(bins)..]
        .iter()
        .sum();
    let (eps_dark, eps_dark_se) = rate(dark_fail);
    let (mean_shelve, shelve_se) = if shelving.is_some() {
        let m = total.shelve_sum / n;
        let var = (total.shelve_sq / n - m * m).max(0.0) * n / (n - 1.0).max(1.0);
        (Some(m), Some((var / n).sqrt()))
    } else {
        (None, None)
    };
    let norm = |h: Vec<u64>| h.into_iter().map(|c| c as f64 / n).collect::<Vec<_>>();
    let poisson = if cfg.ideal_mean_counts() > 0.0 {
        poisson_limit_error(cfg.ideal_mean_counts(), cfg.threshold)?
    } else {
        1.0
    };
    Ok(ReadoutReport {
        n_shots: cfg.n_shots,
        eps_bright,
        eps_bright_se,
        eps_dark,
        eps_dark_se,
        eps_bright_poisson_limit: poisson,
        mean_bright_counts: total.counts_sum / n,
        mean_shelving_cycle: mean_shelve,
        mean_shelving_cycle_se: shelve_se,
        bright_histogram: norm(total.bright_hist),
        dark_histogram: norm(total.dark_hist),
    })
}
