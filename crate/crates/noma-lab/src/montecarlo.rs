//! Ergodic-rate estimation by trial averaging.
//!
//! Trials are independent work items keyed by trial index. They may execute
//! in parallel, but per-trial results are always reduced in trial order, so
//! the floating-point sums (and therefore every downstream CSV byte) are
//! identical whether the run was serial or parallel.

use rayon::prelude::*;

use crate::airlink::{instantaneous_sinr, make_beams};
use crate::config::{SeedSpec, SystemConfig};
use crate::estimation::{compute_rho, simulate_estimation};
use crate::rates::{
    eve_rate_closed_form, legit_rate_closed_form, secrecy_rate, RateMode, RateReport, UserRates,
};

/// Per-trial instantaneous rates in flat user order.
#[derive(Debug, Clone)]
pub struct TrialRates {
    pub legit: Vec<f64>,
    pub eve: Vec<f64>,
}

/// Run the full estimation/beamforming/decoding pipeline for one trial.
pub fn run_trial(config: &SystemConfig, seed: SeedSpec) -> TrialRates {
    let realization = simulate_estimation(config, seed);
    let beams = make_beams(&realization);
    let record = instantaneous_sinr(config, &realization, &beams);
    let mut legit = Vec::with_capacity(config.user_count());
    let mut eve = Vec::with_capacity(config.user_count());
    for (m, n) in config.iter_users() {
        legit.push((1.0 + record.legit_sinr[m][n - 1]).log2());
        eve.push((1.0 + record.eve_sinr[m][n - 1]).log2());
    }
    TrialRates { legit, eve }
}

fn collect_trials(config: &SystemConfig, trials: usize, master_seed: u64) -> Vec<TrialRates> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| run_trial(config, SeedSpec::new(master_seed, t)))
        .collect()
}

/// Sample mean and standard error per user.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    /// Mean rate in flat user order.
    pub mean: Vec<f64>,
    /// Standard error of the mean (sample stddev / sqrt(trials)).
    pub std_error: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
}

fn summarize(values: impl Fn(usize) -> f64, trials: usize) -> (f64, f64) {
    let mut sum = 0.0;
    for t in 0..trials {
        sum += values(t);
    }
    let mean = sum / trials as f64;
    let mut sq = 0.0;
    for t in 0..trials {
        let d = values(t) - mean;
        sq += d * d;
    }
    let variance = sq / (trials - 1) as f64;
    (mean, (variance / trials as f64).sqrt())
}

fn estimate_from(trials: &[TrialRates], pick: impl Fn(&TrialRates, usize) -> f64, master_seed: u64) -> McEstimate {
    let k = trials[0].legit.len();
    let mut mean = Vec::with_capacity(k);
    let mut std_error = Vec::with_capacity(k);
    for u in 0..k {
        let (m, se) = summarize(|t| pick(&trials[t], u), trials.len());
        mean.push(m);
        std_error.push(se);
    }
    McEstimate { mean, std_error, trials: trials.len(), master_seed }
}

/// Monte Carlo estimates of the per-user legitimate and eavesdropping
/// ergodic rates. Deterministic in `master_seed`.
pub fn estimate_rates(
    config: &SystemConfig,
    trials: usize,
    master_seed: u64,
) -> (McEstimate, McEstimate) {
    assert!(trials >= 100, "at least 100 trials required");
    let samples = collect_trials(config, trials, master_seed);
    let users = estimate_from(&samples, |t, u| t.legit[u], master_seed);
    let eves = estimate_from(&samples, |t, u| t.eve[u], master_seed);
    (users, eves)
}

/// One row of the simulation-versus-closed-form comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyGapRow {
    /// 0-based cluster index.
    pub cluster: usize,
    /// 1-based user index.
    pub user: usize,
    /// Monte Carlo mean of the per-trial clamped rate difference.
    pub mc_secrecy: f64,
    pub mc_secrecy_se: f64,
    /// Closed-form secrecy bound.
    pub closed_form: f64,
    /// `mc_secrecy - closed_form`.
    pub gap: f64,
    /// Set when the bound exceeds the Monte Carlo mean by more than two
    /// standard errors, i.e. the lower-bound property looks violated.
    pub bound_exceeds: bool,
}

/// Full comparison table plus Monte Carlo rate estimates.
#[derive(Debug, Clone)]
pub struct SecrecyGapReport {
    pub rows: Vec<SecrecyGapRow>,
    pub user_rates: McEstimate,
    pub eve_rates: McEstimate,
    /// Mean and standard error of the per-trial system secrecy sum.
    pub sum_secrecy: f64,
    pub sum_secrecy_se: f64,
}

impl SecrecyGapReport {
    /// The Monte Carlo side of the table as a rate report.
    pub fn mc_report(&self, config: &SystemConfig) -> RateReport {
        let users = config
            .iter_users()
            .enumerate()
            .map(|(k, (m, n))| UserRates {
                cluster: m,
                user: n,
                legit: self.user_rates.mean[k],
                eve: self.eve_rates.mean[k],
                secrecy: self.rows[k].mc_secrecy,
            })
            .collect();
        RateReport::from_rows(RateMode::MonteCarlo, config.n_clusters(), users)
    }
}

/// Compare Monte Carlo secrecy estimates against the closed-form bound.
pub fn secrecy_gap_report(
    config: &SystemConfig,
    trials: usize,
    master_seed: u64,
) -> SecrecyGapReport {
    assert!(trials >= 100, "at least 100 trials required");
    let samples = collect_trials(config, trials, master_seed);
    let model = compute_rho(config);
    let user_rates = estimate_from(&samples, |t, u| t.legit[u], master_seed);
    let eve_rates = estimate_from(&samples, |t, u| t.eve[u], master_seed);

    let rows = config
        .iter_users()
        .enumerate()
        .map(|(k, (m, n))| {
            let (mc_secrecy, mc_secrecy_se) =
                summarize(|t| secrecy_rate(samples[t].legit[k], samples[t].eve[k]), trials);
            let closed_form = secrecy_rate(
                legit_rate_closed_form(config, &model, m, n),
                eve_rate_closed_form(config, &model, m, n),
            );
            SecrecyGapRow {
                cluster: m,
                user: n,
                mc_secrecy,
                mc_secrecy_se,
                closed_form,
                gap: mc_secrecy - closed_form,
                bound_exceeds: closed_form > mc_secrecy + 2.0 * mc_secrecy_se,
            }
        })
        .collect();

    let (sum_secrecy, sum_secrecy_se) = summarize(
        |t| {
            samples[t]
                .legit
                .iter()
                .zip(&samples[t].eve)
                .map(|(&l, &e)| secrecy_rate(l, e))
                .sum()
        },
        trials,
    );

    SecrecyGapReport { rows, user_rates, eve_rates, sum_secrecy, sum_secrecy_se }
}
