//! Statistical oracles linking the trial-level simulator to the term-power
//! decomposition and the hardening trends.

use num_complex::Complex64;

use noma_lab::airlink::make_beams;
use noma_lab::config::{ClusterConfig, SeedSpec, SystemConfig, UserConfig};
use noma_lab::estimation::{compute_rho, simulate_estimation};
use noma_lab::montecarlo::secrecy_gap_report;
use noma_lab::rates::term_powers;
use noma_lab::scenario::presets;

/// The desired-signal term of one user, measured over trials: its squared
/// mean must match the exact coherent power and its variance the exact
/// leakage power.
#[test]
fn desired_signal_moments_match_term_powers() {
    let config = SystemConfig {
        n_antennas: 16,
        pilot_length: 2,
        sic_residual_coeff: 0.0,
        assert_power_ordering: false,
        clusters: vec![
            ClusterConfig {
                eve_path_loss: 0.4,
                eve_pilot_power: 0.3,
                users: vec![
                    UserConfig { path_loss: 1.0, pilot_power: 0.9, tx_power: 0.5 },
                    UserConfig { path_loss: 0.3, pilot_power: 0.9, tx_power: 1.5 },
                ],
            },
            ClusterConfig {
                eve_path_loss: 0.5,
                eve_pilot_power: 0.0,
                users: vec![UserConfig { path_loss: 0.8, pilot_power: 0.6, tx_power: 1.0 }],
            },
        ],
    };
    let model = compute_rho(&config);
    let trials = 10_000u64;
    let (m, n) = (0usize, 1usize);
    let user = &config.clusters[m].users[n - 1];
    let weight = (user.path_loss * user.tx_power).sqrt();

    let mut amplitudes = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let realization = simulate_estimation(&config, SeedSpec::new(31, t));
        let beams = make_beams(&realization);
        let inner: Complex64 = realization.true_channels[m][n]
            .iter()
            .zip(&beams.beams[m])
            .map(|(h, w)| h.conj() * w)
            .sum();
        amplitudes.push(weight * inner);
    }
    let mean: Complex64 = amplitudes.iter().sum::<Complex64>() / trials as f64;
    let second: f64 =
        amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() / trials as f64;
    let coherent = mean.norm_sqr();
    let variance = second - coherent;

    let tp = term_powers(&config, &model, m, n);
    // Standard error of the variance estimator from the fourth moment.
    let fourth: f64 = amplitudes
        .iter()
        .map(|a| {
            let d = a.norm_sqr() - second;
            d * d
        })
        .sum::<f64>()
        / trials as f64;
    let se_var = (fourth / trials as f64).sqrt();
    assert!(
        (variance - tp.exact.leakage).abs() < 5.0 * se_var,
        "leakage {variance} vs exact {} (se {se_var})",
        tp.exact.leakage
    );
    // The coherent power estimator has bias variance/trials and noise on
    // the order of sqrt(coherent * variance / trials).
    let se_coherent = (coherent * variance / trials as f64).sqrt() * 2.0 + variance / trials as f64;
    assert!(
        (coherent - tp.exact.desired).abs() < 5.0 * se_coherent,
        "coherent {coherent} vs exact {} (se {se_coherent})",
        tp.exact.desired
    );
}

/// Channel hardening: quadrupling the array shrinks the gap between the
/// Monte Carlo secrecy estimate and the closed-form bound for every user.
/// The rates themselves grow with the array at a fixed power budget, so
/// the trend lives in the gap relative to the bound.
#[test]
fn secrecy_gap_shrinks_with_array_size() {
    let trials = 10_000;
    for base in [
        presets::default_scenario(),
        presets::clustered(
            64,
            12,
            4,
            16,
            presets::DEFAULT_PSNR_DB,
            presets::DEFAULT_QSNR_DB,
            presets::DEFAULT_USNR_DB,
        ),
    ] {
        let at_64 = secrecy_gap_report(&base, trials, 77);
        let mut big = base.clone();
        big.n_antennas = 256;
        let at_256 = secrecy_gap_report(&big, trials, 77);
        for (k, (small, large)) in at_64.rows.iter().zip(&at_256.rows).enumerate() {
            if small.closed_form > 0.0 && large.closed_form > 0.0 {
                let rel_small = small.gap.abs() / small.closed_form;
                let rel_large = large.gap.abs() / large.closed_form;
                assert!(
                    rel_large < rel_small + 1e-9,
                    "user {k}: relative gap grew from {rel_small} to {rel_large}"
                );
            }
        }
    }
}
