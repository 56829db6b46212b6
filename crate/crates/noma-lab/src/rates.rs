//! Closed-form ergodic-rate machinery.
//!
//! Under channel hardening the ergodic rate of a user is approximated by
//! `log2(1 + phi0 / (phi1 + phi2 + phi3 + 1))` where the phi terms are the
//! powers of the desired signal, the signal leakage, the residual
//! intra-cluster interference, and the inter-cluster interference. The
//! desired-signal power carries the mean beamforming gain
//! `Gamma^2(Nt + 1/2) / Gamma^2(Nt)`, which tends to `Nt` for large arrays;
//! the large-array variant substitutes that limit and drops the leakage
//! term, producing the closed forms used throughout:
//!
//! ```text
//! R_user = log2(1 + a P rho Nt / (a rho Nt S< + a I + 1))
//! R_eve  = log2(1 + b P rho0 Nt / (b rho0 Nt S!= + b I + 1))
//! ```
//!
//! with `S<` the stronger-user power sum the SIC leaves behind, `S!=` the
//! whole-cluster power the non-cancelling eavesdropper faces, and `I` the
//! total transmit power of the other clusters. The secrecy rate is the
//! clamped difference. Two asymptotic regimes (antenna count to infinity,
//! total power to infinity) expose what saturates and what cancels.

use crate::config::{SystemConfig, NOISE_POWER};
use crate::estimation::EstimationModel;

/// Squared ratio `Gamma^2(n + 1/2) / Gamma^2(n)`, the mean-gain factor of an
/// `n`-antenna MRT beam. Evaluated in the log domain so large antenna counts
/// never overflow. Lies in `(n - 1/2, n)` and approaches `n - 1/4`.
pub fn gamma_ratio_sq(n_antennas: usize) -> f64 {
    assert!(n_antennas >= 1);
    let n = n_antennas as f64;
    (2.0 * (libm::lgamma(n + 0.5) - libm::lgamma(n))).exp()
}

/// Signal and interference powers for one user, exact and large-array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermPowerSet {
    /// Desired-signal power.
    pub desired: f64,
    /// Signal-leakage power (channel-fading fluctuation around the mean
    /// beamforming gain). Zero in the large-array variant.
    pub leakage: f64,
    /// Residual intra-cluster interference power after SIC.
    pub intra: f64,
    /// Inter-cluster interference power.
    pub inter: f64,
}

impl TermPowerSet {
    /// The effective SINR `phi0 / (phi1 + phi2 + phi3 + 1)`.
    pub fn effective_sinr(&self) -> f64 {
        self.desired / (self.leakage + self.intra + self.inter + NOISE_POWER)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermPowers {
    pub exact: TermPowerSet,
    pub large_nt: TermPowerSet,
}

/// Term powers for user `n` (1-based) of cluster `m`.
pub fn term_powers(config: &SystemConfig, model: &EstimationModel, m: usize, n: usize) -> TermPowers {
    let cluster = &config.clusters[m];
    let user = &cluster.users[n - 1];
    let alpha = user.path_loss;
    let power = user.tx_power;
    let rho = model.rho(m, n);
    let nt = config.n_antennas as f64;
    let gain = gamma_ratio_sq(config.n_antennas);
    let stronger_power: f64 = cluster.users[..n - 1].iter().map(|u| u.tx_power).sum();
    let inter_power: f64 = config
        .clusters
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != m)
        .map(|(_, c)| c.total_tx_power())
        .sum();

    let exact = TermPowerSet {
        desired: alpha * power * rho * gain,
        leakage: alpha * power * (rho * nt + 1.0 - rho - rho * gain),
        intra: alpha * (rho * nt + 1.0 - rho) * stronger_power,
        inter: alpha * inter_power,
    };
    let large_nt = TermPowerSet {
        desired: alpha * power * rho * nt,
        leakage: 0.0,
        intra: alpha * rho * nt * stronger_power,
        inter: alpha * inter_power,
    };
    TermPowers { exact, large_nt }
}

/// Closed-form ergodic rate of the legitimate channel for user `n` of
/// cluster `m`, in bits per channel use.
///
/// A nonzero `sic_residual_coeff` adds the leaked weaker-user power
/// `eps * a rho Nt * sum_{i>n} P_i` to the denominator.
pub fn legit_rate_closed_form(
    config: &SystemConfig,
    model: &EstimationModel,
    m: usize,
    n: usize,
) -> f64 {
    let cluster = &config.clusters[m];
    let user = &cluster.users[n - 1];
    let alpha = user.path_loss;
    let rho = model.rho(m, n);
    let nt = config.n_antennas as f64;
    let stronger_power: f64 = cluster.users[..n - 1].iter().map(|u| u.tx_power).sum();
    let weaker_power: f64 = cluster.users[n..].iter().map(|u| u.tx_power).sum();
    let inter_power: f64 = config
        .clusters
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != m)
        .map(|(_, c)| c.total_tx_power())
        .sum();
    let numerator = alpha * user.tx_power * rho * nt;
    let denominator = alpha * rho * nt * (stronger_power + config.sic_residual_coeff * weaker_power)
        + alpha * inter_power
        + NOISE_POWER;
    (1.0 + numerator / denominator).log2()
}

/// Closed-form ergodic rate of the eavesdropping channel targeting user `n`
/// of cluster `m`, in bits per channel use. The eavesdropper is a
/// non-cancelling receiver, so its intra-cluster sum runs over every other
/// user of the cluster.
pub fn eve_rate_closed_form(
    config: &SystemConfig,
    model: &EstimationModel,
    m: usize,
    n: usize,
) -> f64 {
    let cluster = &config.clusters[m];
    let beta = cluster.eve_path_loss;
    let rho0 = model.rho(m, 0);
    let nt = config.n_antennas as f64;
    let target_power = cluster.users[n - 1].tx_power;
    let other_power = cluster.total_tx_power() - target_power;
    let inter_power: f64 = config
        .clusters
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != m)
        .map(|(_, c)| c.total_tx_power())
        .sum();
    let numerator = beta * target_power * rho0 * nt;
    let denominator = beta * rho0 * nt * other_power + beta * inter_power + NOISE_POWER;
    (1.0 + numerator / denominator).log2()
}

/// Secrecy rate: the positive part of the rate difference.
pub fn secrecy_rate(legit: f64, eve: f64) -> f64 {
    (legit - eve).max(0.0)
}

/// Large-array asymptote of one user's ergodic secrecy rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoticRate {
    Finite(f64),
    /// The strongest user of a cluster keeps an empty stronger-user
    /// interference sum, so its legitimate rate grows without bound with
    /// the array size.
    Divergent,
}

impl AsymptoticRate {
    pub fn finite(&self) -> Option<f64> {
        match self {
            AsymptoticRate::Finite(v) => Some(*v),
            AsymptoticRate::Divergent => None,
        }
    }
}

/// Ergodic secrecy rate in the limit of infinitely many antennas. Only
/// intra-cluster power ratios survive:
///
/// ```text
/// log2(1 + P_n / sum_{i<n} P_i) - log2(1 + P_n / sum_{i!=n} P_i)
/// ```
pub fn asymptotic_large_nt(config: &SystemConfig, m: usize, n: usize) -> AsymptoticRate {
    let cluster = &config.clusters[m];
    let power = cluster.users[n - 1].tx_power;
    let stronger_power: f64 = cluster.users[..n - 1].iter().map(|u| u.tx_power).sum();
    if stronger_power <= 0.0 {
        return AsymptoticRate::Divergent;
    }
    let other_power = cluster.total_tx_power() - power;
    let legit = (1.0 + power / stronger_power).log2();
    let eve = (1.0 + power / other_power).log2();
    AsymptoticRate::Finite(secrecy_rate(legit, eve))
}

/// Per-user fractions of the total transmit power.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerFractions {
    /// `nu[m][n-1]`, nonnegative, summing to one.
    pub nu: Vec<Vec<f64>>,
    pub total_power: f64,
}

impl PowerFractions {
    /// Fractions implied by a config's transmit powers.
    pub fn from_config(config: &SystemConfig) -> PowerFractions {
        let total = config.total_tx_power();
        assert!(total > 0.0, "total transmit power must be positive");
        let nu = config
            .clusters
            .iter()
            .map(|c| c.users.iter().map(|u| u.tx_power / total).collect())
            .collect();
        PowerFractions { nu, total_power: total }
    }

    pub fn sum(&self) -> f64 {
        self.nu.iter().map(|c| c.iter().sum::<f64>()).sum()
    }
}

/// Ergodic secrecy rate in the limit of infinite total transmit power.
/// Noise and every common path-loss factor cancel, leaving only the power
/// fractions, the correlation coefficients, and the antenna count.
pub fn asymptotic_high_power(
    config: &SystemConfig,
    model: &EstimationModel,
    fractions: &PowerFractions,
    m: usize,
    n: usize,
) -> f64 {
    let nt = config.n_antennas as f64;
    let nu = fractions.nu[m][n - 1];
    let cluster_nu: f64 = fractions.nu[m].iter().sum();
    let stronger_nu: f64 = fractions.nu[m][..n - 1].iter().sum();
    let other_nu = cluster_nu - nu;
    let inter_nu: f64 = fractions
        .nu
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != m)
        .map(|(_, c)| c.iter().sum::<f64>())
        .sum();
    let rho = model.rho(m, n);
    let rho0 = model.rho(m, 0);
    let legit = (1.0 + nu * rho * nt / (rho * nt * stronger_nu + inter_nu)).log2();
    let eve = (1.0 + nu * rho0 * nt / (rho0 * nt * other_nu + inter_nu)).log2();
    secrecy_rate(legit, eve)
}

/// Interference-free time-shared comparator: each of the `K` users gets a
/// `1/K` slice with a full-CSI MRT beam, so its rate is
/// `log2(1 + alpha * P_tot * Nt) / K`. This baseline is defined by the
/// artifact (labelled as such in reports), not by the analysis above.
pub fn tdma_baseline_rate(config: &SystemConfig, m: usize, n: usize) -> f64 {
    let k = config.user_count() as f64;
    let alpha = config.clusters[m].users[n - 1].path_loss;
    let p_tot = config.total_tx_power();
    (1.0 + alpha * p_tot * config.n_antennas as f64).log2() / k
}

/// How a [`RateReport`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMode {
    ClosedForm,
    MonteCarlo,
    AsymptoticAntennas,
    AsymptoticPower,
}

impl RateMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RateMode::ClosedForm => "closed-form",
            RateMode::MonteCarlo => "monte-carlo",
            RateMode::AsymptoticAntennas => "asymptotic-nt",
            RateMode::AsymptoticPower => "asymptotic-power",
        }
    }
}

/// Per-user rates for one report row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserRates {
    /// 0-based cluster index.
    pub cluster: usize,
    /// 1-based user index within the cluster.
    pub user: usize,
    pub legit: f64,
    pub eve: f64,
    pub secrecy: f64,
}

/// Rates for every user plus cluster and system totals.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub mode: RateMode,
    pub users: Vec<UserRates>,
    pub cluster_secrecy: Vec<f64>,
    pub sum_legit: f64,
    pub sum_eve: f64,
    pub sum_secrecy: f64,
}

impl RateReport {
    pub fn from_rows(mode: RateMode, n_clusters: usize, users: Vec<UserRates>) -> RateReport {
        let mut cluster_secrecy = vec![0.0; n_clusters];
        let mut sum_legit = 0.0;
        let mut sum_eve = 0.0;
        let mut sum_secrecy = 0.0;
        for row in &users {
            cluster_secrecy[row.cluster] += row.secrecy;
            sum_legit += row.legit;
            sum_eve += row.eve;
            sum_secrecy += row.secrecy;
        }
        RateReport { mode, users, cluster_secrecy, sum_legit, sum_eve, sum_secrecy }
    }
}

/// Closed-form rate report over all users of a validated config.
pub fn closed_form_report(config: &SystemConfig, model: &EstimationModel) -> RateReport {
    let users = config
        .iter_users()
        .map(|(m, n)| {
            let legit = legit_rate_closed_form(config, model, m, n);
            let eve = eve_rate_closed_form(config, model, m, n);
            UserRates { cluster: m, user: n, legit, eve, secrecy: secrecy_rate(legit, eve) }
        })
        .collect();
    RateReport::from_rows(RateMode::ClosedForm, config.n_clusters(), users)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ClusterConfig, UserConfig};
    use crate::estimation::compute_rho;
    use std::f64::consts::PI;

    fn config_with_rho_controls(
        alpha: f64,
        tx: Vec<f64>,
        n_antennas: usize,
    ) -> (SystemConfig, EstimationModel) {
        let users = tx
            .iter()
            .map(|&p| UserConfig { path_loss: alpha, pilot_power: 1.0, tx_power: p })
            .collect();
        let config = SystemConfig {
            n_antennas,
            pilot_length: 1,
            sic_residual_coeff: 0.0,
            assert_power_ordering: false,
            clusters: vec![ClusterConfig { eve_path_loss: alpha, eve_pilot_power: 0.0, users }],
        };
        let model = compute_rho(&config);
        (config, model)
    }

    #[test]
    fn gamma_ratio_at_one_antenna_is_quarter_pi() {
        assert!((gamma_ratio_sq(1) - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_ratio_large_antenna_expansion() {
        let n = 10_000;
        let value = gamma_ratio_sq(n);
        assert!(value > n as f64 - 0.5 && value < n as f64);
        let expansion = n as f64 - 0.25;
        assert!((value - expansion).abs() / expansion < 1e-4);
    }

    #[test]
    fn gamma_ratio_over_n_increases_to_one() {
        let mut previous = 0.0;
        for k in 0..=14 {
            let n = 1usize << k;
            let ratio = gamma_ratio_sq(n) / n as f64;
            assert!(ratio > previous, "ratio must increase at n = {n}");
            assert!(ratio < 1.0);
            assert!(ratio > 1.0 - 1.0 / (2.0 * n as f64));
            previous = ratio;
        }
    }

    #[test]
    fn term_powers_zero_rho() {
        let (config, mut model) = config_with_rho_controls(1.0, vec![0.5, 1.0, 1.5], 8);
        model.rho[0] = vec![0.0; 4];
        let tp = term_powers(&config, &model, 0, 2);
        assert_eq!(tp.exact.desired, 0.0);
        assert!((tp.exact.leakage - 1.0).abs() < 1e-15); // alpha * P * (0 + 1 - 0 - 0)
        assert!((tp.exact.intra - 0.5).abs() < 1e-15); // alpha * 1 * sum_{i<2} P
        assert_eq!(tp.large_nt.desired, 0.0);
        assert_eq!(tp.large_nt.intra, 0.0);
    }

    #[test]
    fn term_powers_saturated_rho_single_antenna() {
        let (config, mut model) = config_with_rho_controls(1.0, vec![1.0], 1);
        model.rho[0] = vec![0.0, 1.0];
        let tp = term_powers(&config, &model, 0, 1);
        assert!((tp.exact.desired - PI / 4.0).abs() < 1e-12);
        assert!((tp.exact.leakage - (1.0 - PI / 4.0)).abs() < 1e-12);
    }

    #[test]
    fn exact_and_large_nt_desired_power_converge() {
        let (mut config, mut model) = config_with_rho_controls(0.7, vec![1.0], 32);
        model.rho[0] = vec![0.0, 0.4];
        for exponent in 5..=12 {
            config.n_antennas = 1usize << exponent;
            let tp = term_powers(&config, &model, 0, 1);
            let relative = (tp.exact.desired - tp.large_nt.desired).abs() / tp.large_nt.desired;
            assert!(relative < 1.0 / (2.0 * config.n_antennas as f64));
        }
    }

    #[test]
    fn legit_rate_hand_value() {
        // alpha = 1, P = 1, rho = 0.5, Nt = 4, single user, single cluster:
        // log2(1 + 0.5*4 / 1) = log2(3).
        let (config, mut model) = config_with_rho_controls(1.0, vec![1.0], 4);
        model.rho[0] = vec![0.0, 0.5];
        let rate = legit_rate_closed_form(&config, &model, 0, 1);
        assert!((rate - 3.0f64.log2()).abs() < 1e-12);
        assert!((rate - 1.584_962_500_721_156).abs() < 1e-12);
    }

    #[test]
    fn legit_rate_zero_when_rho_zero() {
        let (config, mut model) = config_with_rho_controls(1.0, vec![1.0], 4);
        model.rho[0] = vec![0.0, 0.0];
        assert_eq!(legit_rate_closed_form(&config, &model, 0, 1), 0.0);
    }

    #[test]
    fn eve_rate_zero_for_passive_eve() {
        let (config, model) = config_with_rho_controls(1.0, vec![0.5, 1.5], 16);
        assert_eq!(model.rho(0, 0), 0.0);
        for n in 1..=2 {
            assert_eq!(eve_rate_closed_form(&config, &model, 0, n), 0.0);
        }
    }

    #[test]
    fn matched_eve_never_beats_user() {
        // With rho0 = rho_n and beta = alpha the eavesdropper's denominator
        // dominates the user's (its interference set is a superset).
        let (config, mut model) = config_with_rho_controls(0.6, vec![0.5, 1.0, 1.5], 32);
        for n in 1..=3 {
            let rho_n = compute_rho(&config).rho(0, n);
            model.rho[0][0] = rho_n;
            model.rho[0][n] = rho_n;
            let legit = legit_rate_closed_form(&config, &model, 0, n);
            let eve = eve_rate_closed_form(&config, &model, 0, n);
            assert!(eve <= legit + 1e-12, "user {n}: eve {eve} > legit {legit}");
        }
    }

    #[test]
    fn secrecy_rate_clamps() {
        assert_eq!(secrecy_rate(1.5, 0.5), 1.0);
        assert_eq!(secrecy_rate(0.5, 1.5), 0.0);
        assert_eq!(secrecy_rate(0.75, 0.0), 0.75);
    }

    #[test]
    fn asymptotic_large_nt_hand_values() {
        let (config, _) = config_with_rho_controls(1.0, vec![1.0, 2.0, 3.0], 4);
        // n = 2: log2(1 + 2/1) - log2(1 + 2/4) = log2(3) - log2(1.5) = 1.
        let value = asymptotic_large_nt(&config, 0, 2).finite().unwrap();
        assert!((value - 1.0).abs() < 1e-12);
        // strongest user diverges
        assert_eq!(asymptotic_large_nt(&config, 0, 1), AsymptoticRate::Divergent);
        // weakest of a two-user cluster gets zero
        let (pair, _) = config_with_rho_controls(1.0, vec![1.0, 2.0], 4);
        let weakest = asymptotic_large_nt(&pair, 0, 2).finite().unwrap();
        assert_eq!(weakest, 0.0);
    }

    #[test]
    fn high_power_asymptote_ignores_total_power_and_path_loss() {
        let users = |scale: f64, p_scale: f64| SystemConfig {
            n_antennas: 64,
            pilot_length: 2,
            sic_residual_coeff: 0.0,
            assert_power_ordering: false,
            clusters: vec![
                ClusterConfig {
                    eve_path_loss: 0.4 * scale,
                    eve_pilot_power: 0.3,
                    users: vec![
                        UserConfig { path_loss: scale, pilot_power: 1.0, tx_power: p_scale },
                        UserConfig {
                            path_loss: 0.2 * scale,
                            pilot_power: 1.0,
                            tx_power: 3.0 * p_scale,
                        },
                    ],
                },
                ClusterConfig {
                    eve_path_loss: 0.5 * scale,
                    eve_pilot_power: 0.0,
                    users: vec![UserConfig {
                        path_loss: 0.8 * scale,
                        pilot_power: 0.7,
                        tx_power: 2.0 * p_scale,
                    }],
                },
            ],
        };
        let base = users(1.0, 1.0);
        let model = compute_rho(&base);
        let fractions = PowerFractions::from_config(&base);
        let reference = asymptotic_high_power(&base, &model, &fractions, 0, 2);
        // Total power scaling leaves the fractions untouched.
        let boosted = users(1.0, 10.0);
        assert_eq!(PowerFractions::from_config(&boosted).nu, fractions.nu);
        let with_boost =
            asymptotic_high_power(&boosted, &model, &PowerFractions::from_config(&boosted), 0, 2);
        assert_eq!(reference.to_bits(), with_boost.to_bits());
        // Global path-loss scaling with the estimation model held fixed.
        let scaled = users(10.0, 1.0);
        let with_scale = asymptotic_high_power(&scaled, &model, &fractions, 0, 2);
        assert_eq!(reference.to_bits(), with_scale.to_bits());
    }

    #[test]
    fn closed_form_approaches_high_power_asymptote() {
        let base = SystemConfig {
            n_antennas: 64,
            pilot_length: 2,
            sic_residual_coeff: 0.0,
            assert_power_ordering: false,
            clusters: vec![
                ClusterConfig {
                    eve_path_loss: 0.4,
                    eve_pilot_power: 0.3,
                    users: vec![
                        UserConfig { path_loss: 1.0, pilot_power: 1.0, tx_power: 0.25 },
                        UserConfig { path_loss: 0.2, pilot_power: 1.0, tx_power: 0.75 },
                    ],
                },
                ClusterConfig {
                    eve_path_loss: 0.5,
                    eve_pilot_power: 0.1,
                    users: vec![UserConfig { path_loss: 0.8, pilot_power: 0.7, tx_power: 1.0 }],
                },
            ],
        };
        let model = compute_rho(&base);
        let fractions = PowerFractions::from_config(&base);
        let huge = base.with_tx_powers(
            &base
                .iter_users()
                .map(|(m, n)| fractions.nu[m][n - 1] * 1e6)
                .collect::<Vec<_>>(),
        );
        for (m, n) in base.iter_users() {
            let legit = legit_rate_closed_form(&huge, &model, m, n);
            let eve = eve_rate_closed_form(&huge, &model, m, n);
            let asymptote = asymptotic_high_power(&base, &model, &fractions, m, n);
            assert!(
                (secrecy_rate(legit, eve) - asymptote).abs() < 1e-3,
                "cluster {m} user {n}"
            );
        }
    }

    #[test]
    fn legit_rate_monotonicity_under_perturbation() {
        let (config, model) = config_with_rho_controls(0.9, vec![0.4, 1.6], 64);
        let mut two_cluster = config.clone();
        two_cluster.clusters.push(ClusterConfig {
            eve_path_loss: 0.3,
            eve_pilot_power: 0.2,
            users: vec![UserConfig { path_loss: 0.5, pilot_power: 0.6, tx_power: 1.0 }],
        });
        two_cluster.pilot_length = 2;
        let model2 = compute_rho(&two_cluster);
        let reference = legit_rate_closed_form(&two_cluster, &model2, 0, 2);
        // Raising own rho helps.
        let mut raised = model2.clone();
        raised.rho[0][2] += 1e-4;
        assert!(legit_rate_closed_form(&two_cluster, &raised, 0, 2) > reference);
        // Raising another cluster's power hurts.
        let mut louder = two_cluster.clone();
        louder.clusters[1].users[0].tx_power += 0.5;
        assert!(legit_rate_closed_form(&louder, &model2, 0, 2) < reference);
        let _ = (config, model);
    }

    #[test]
    fn closed_form_secrecy_converges_to_large_nt_asymptote() {
        let mut config = SystemConfig {
            n_antennas: 64,
            pilot_length: 2,
            sic_residual_coeff: 0.0,
            assert_power_ordering: false,
            clusters: vec![
                ClusterConfig {
                    eve_path_loss: 0.4,
                    eve_pilot_power: 0.3,
                    users: vec![
                        UserConfig { path_loss: 1.0, pilot_power: 1.0, tx_power: 0.3 },
                        UserConfig { path_loss: 0.3, pilot_power: 1.0, tx_power: 0.7 },
                        UserConfig { path_loss: 0.1, pilot_power: 1.0, tx_power: 1.0 },
                    ],
                },
                ClusterConfig {
                    eve_path_loss: 0.5,
                    eve_pilot_power: 0.1,
                    users: vec![UserConfig { path_loss: 0.8, pilot_power: 0.7, tx_power: 1.5 }],
                },
            ],
        };
        let model = compute_rho(&config);
        for n in 2..=3 {
            let target = asymptotic_large_nt(&config, 0, n).finite().unwrap();
            let mut previous_gap = f64::INFINITY;
            for exponent in 6..=14 {
                config.n_antennas = 1usize << exponent;
                let legit = legit_rate_closed_form(&config, &model, 0, n);
                let eve = eve_rate_closed_form(&config, &model, 0, n);
                let gap = (secrecy_rate(legit, eve) - target).abs();
                assert!(gap <= previous_gap + 1e-12, "user {n}, Nt 2^{exponent}");
                previous_gap = gap;
            }
            assert!(previous_gap < 0.03 * target.max(1e-9), "user {n} final gap {previous_gap}");
        }
    }

    #[test]
    fn full_sic_residual_with_matched_eve_kills_secrecy() {
        let mut config = SystemConfig {
            n_antennas: 32,
            pilot_length: 1,
            sic_residual_coeff: 1.0,
            assert_power_ordering: false,
            clusters: vec![ClusterConfig {
                eve_path_loss: 0.5,
                eve_pilot_power: 0.4,
                users: vec![
                    UserConfig { path_loss: 0.5, pilot_power: 0.4, tx_power: 0.5 },
                    UserConfig { path_loss: 0.9, pilot_power: 0.2, tx_power: 1.5 },
                ],
            }],
        };
        config.clusters.push(ClusterConfig {
            eve_path_loss: 0.3,
            eve_pilot_power: 0.0,
            users: vec![UserConfig { path_loss: 0.6, pilot_power: 0.5, tx_power: 1.0 }],
        });
        config.pilot_length = 2;
        let model = compute_rho(&config);
        // User 1 shares the eavesdropper's path loss and pilot power, so
        // rho_{m,1} = rho_{m,0}; with eps = 1 both denominators match.
        assert!((model.rho(0, 1) - model.rho(0, 0)).abs() < 1e-15);
        let legit = legit_rate_closed_form(&config, &model, 0, 1);
        let eve = eve_rate_closed_form(&config, &model, 0, 1);
        assert!((legit - eve).abs() < 1e-12);
        assert_eq!(secrecy_rate(legit, eve), 0.0);
    }

    #[test]
    fn tdma_baseline_scales_inversely_with_user_count() {
        let (one_user, _) = config_with_rho_controls(0.5, vec![2.0], 16);
        let solo = tdma_baseline_rate(&one_user, 0, 1);
        assert!((solo - (1.0f64 + 0.5 * 2.0 * 16.0).log2()).abs() < 1e-12);
        // Same link budget split across K users: each slot shrinks by 1/K.
        let (four_users, _) = config_with_rho_controls(0.5, vec![0.5; 4], 16);
        let shared = tdma_baseline_rate(&four_users, 0, 1);
        assert!((shared - solo / 4.0).abs() < 1e-12);
    }

    #[test]
    fn report_totals_are_consistent() {
        let (config, model) = config_with_rho_controls(0.8, vec![0.5, 1.0], 32);
        let report = closed_form_report(&config, &model);
        assert_eq!(report.mode, RateMode::ClosedForm);
        assert_eq!(report.users.len(), 2);
        let total: f64 = report.users.iter().map(|u| u.secrecy).sum();
        assert!((report.sum_secrecy - total).abs() < 1e-12);
        assert!((report.cluster_secrecy[0] - total).abs() < 1e-12);
    }
}
