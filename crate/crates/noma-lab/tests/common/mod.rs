//! Shared generators and oracles for the integration suites.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use noma_lab::config::{ClusterConfig, SystemConfig, UserConfig};
use noma_lab::estimation::compute_rho;
use noma_lab::rates::{eve_rate_closed_form, legit_rate_closed_form};

/// A random valid scenario with descending path losses and nondecreasing
/// transmit powers inside each cluster. Roughly half the draws carry an
/// imperfect-SIC residual so that code path stays exercised.
pub fn random_config(
    rng: &mut ChaCha8Rng,
    n_clusters: usize,
    users_per_cluster: usize,
) -> SystemConfig {
    let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| -> f64 {
        let (llo, lhi) = (lo.ln(), hi.ln());
        (llo + (lhi - llo) * rng.gen::<f64>()).exp()
    };
    let p_tot = rng.gen_range(1.0..10.0);
    let clusters: Vec<ClusterConfig> = (0..n_clusters)
        .map(|_| {
            let mut alphas: Vec<f64> =
                (0..users_per_cluster).map(|_| log_uniform(rng, 0.05, 1.0)).collect();
            alphas.sort_by(|a, b| b.partial_cmp(a).unwrap());
            // Nondecreasing powers via positive increments.
            let mut powers = Vec::with_capacity(users_per_cluster);
            let mut level = rng.gen_range(0.05..0.3);
            for _ in 0..users_per_cluster {
                powers.push(level);
                level += rng.gen_range(0.0..0.5);
            }
            let scale = p_tot / (n_clusters as f64) / powers.iter().sum::<f64>();
            ClusterConfig {
                eve_path_loss: log_uniform(rng, 0.1, 0.6),
                eve_pilot_power: log_uniform(rng, 0.05, 1.0),
                users: alphas
                    .iter()
                    .zip(&powers)
                    .map(|(&alpha, &p)| UserConfig {
                        path_loss: alpha,
                        pilot_power: log_uniform(rng, 0.1, 2.0),
                        tx_power: p * scale,
                    })
                    .collect(),
            }
        })
        .collect();
    let config = SystemConfig {
        n_antennas: if rng.gen_bool(0.5) { 32 } else { 64 },
        pilot_length: n_clusters + rng.gen_range(0..4),
        sic_residual_coeff: if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.05..0.4) },
        assert_power_ordering: false,
        clusters,
    };
    debug_assert!(config.validate().is_pass());
    config
}

/// Exhaustive refined grid over two pilot powers; feasibility judged only
/// through the closed-form rates, never through the LP rows.
pub fn grid_oracle_q(
    config: &SystemConfig,
    r_e: f64,
    r_o: f64,
    q_max: f64,
    rounds: usize,
    cells: usize,
) -> Option<f64> {
    assert_eq!(config.user_count(), 2);
    let feasible = |q: &[f64; 2]| {
        let solved = config.with_pilot_powers(q.as_slice());
        let model = compute_rho(&solved);
        (1..=2).all(|n| {
            legit_rate_closed_form(&solved, &model, 0, n) >= r_o
                && eve_rate_closed_form(&solved, &model, 0, n) <= r_e
        })
    };
    let mut center = [q_max / 2.0; 2];
    let mut half = q_max / 2.0;
    let mut best: Option<(f64, [f64; 2])> = None;
    for _ in 0..rounds {
        for i in 0..=cells {
            for j in 0..=cells {
                let q = [
                    (center[0] - half + 2.0 * half * i as f64 / cells as f64).clamp(0.0, q_max),
                    (center[1] - half + 2.0 * half * j as f64 / cells as f64).clamp(0.0, q_max),
                ];
                if feasible(&q) {
                    let total = q[0] + q[1];
                    if best.as_ref().is_none_or(|(b, _)| total < *b) {
                        best = Some((total, q));
                    }
                }
            }
        }
        if let Some((_, q)) = &best {
            center = *q;
        }
        half *= 0.5;
    }
    best.map(|(total, _)| total)
}

/// Grid oracle over two transmit powers with the ordering and budget rows
/// enforced directly.
pub fn grid_oracle_p(
    config: &SystemConfig,
    r_e: f64,
    r_o: f64,
    p_tot: f64,
    rounds: usize,
    cells: usize,
) -> Option<f64> {
    assert_eq!(config.user_count(), 2);
    let model = compute_rho(config);
    let feasible = |p: &[f64; 2]| {
        if p[0] > p[1] || p[0] + p[1] > p_tot {
            return false;
        }
        let solved = config.with_tx_powers(p.as_slice());
        (1..=2).all(|n| {
            legit_rate_closed_form(&solved, &model, 0, n) >= r_o
                && eve_rate_closed_form(&solved, &model, 0, n) <= r_e
        })
    };
    let mut center = [p_tot / 4.0; 2];
    let mut half = p_tot / 2.0;
    let mut best: Option<(f64, [f64; 2])> = None;
    for _ in 0..rounds {
        for i in 0..=cells {
            for j in 0..=cells {
                let p = [
                    (center[0] - half + 2.0 * half * i as f64 / cells as f64).max(0.0),
                    (center[1] - half + 2.0 * half * j as f64 / cells as f64).max(0.0),
                ];
                if feasible(&p) {
                    let total = p[0] + p[1];
                    if best.as_ref().is_none_or(|(b, _)| total < *b) {
                        best = Some((total, p));
                    }
                }
            }
        }
        if let Some((_, p)) = &best {
            center = *p;
        }
        half *= 0.5;
    }
    best.map(|(total, _)| total)
}

/// Single-cluster two-user instance with pilot-space targets satisfiable at
/// the power caps, so the LP and the oracle have something to find.
pub fn two_user_q_instance(rng: &mut ChaCha8Rng, q_max: f64) -> (SystemConfig, f64, f64) {
    let config = random_config(rng, 1, 2);
    let at_caps = config.with_pilot_powers(&[q_max, q_max]);
    let model = compute_rho(&at_caps);
    let min_rate = (1..=2)
        .map(|n| legit_rate_closed_form(&at_caps, &model, 0, n))
        .fold(f64::INFINITY, f64::min);
    let max_eve = (1..=2)
        .map(|n| eve_rate_closed_form(&at_caps, &model, 0, n))
        .fold(0.0, f64::max);
    (config, 1.3 * max_eve + 0.02, 0.6 * min_rate)
}

/// Single-cluster two-user instance with transmit-space targets satisfiable
/// inside the budget.
pub fn two_user_p_instance(rng: &mut ChaCha8Rng, p_tot: f64) -> (SystemConfig, f64, f64) {
    let config = random_config(rng, 1, 2);
    let model = compute_rho(&config);
    let probe = config.with_tx_powers(&[p_tot / 3.0, 2.0 * p_tot / 3.0]);
    let min_rate = (1..=2)
        .map(|n| legit_rate_closed_form(&probe, &model, 0, n))
        .fold(f64::INFINITY, f64::min);
    let max_eve = (1..=2)
        .map(|n| eve_rate_closed_form(&probe, &model, 0, n))
        .fold(0.0, f64::max);
    (config, 1.3 * max_eve + 0.02, 0.5 * min_rate)
}
