//! Downlink transmission: MRT beams, SIC ordering, per-realization SINRs.
//!
//! Each cluster gets one beam pointed along its estimated effective channel.
//! Users decode with successive interference cancellation ordered by the
//! realized effective gains, so the residual intra-cluster interference at a
//! user comes only from users with stronger gains (plus, under imperfect
//! SIC, a configurable fraction of the weaker users' power). Eavesdroppers
//! never cancel: they face interference from every other signal in their
//! cluster.
//!
//! Signals themselves are never instantiated; with unit-power independent
//! symbols every SINR term reduces to transmit powers times channel/beam
//! inner products.

use num_complex::Complex64;

use crate::config::{SystemConfig, NOISE_POWER};
use crate::estimation::ChannelRealization;
use crate::rng::{dot_conj, norm_sq};

/// Unit-norm transmit beam per cluster.
#[derive(Debug, Clone)]
pub struct BeamSet {
    pub beams: Vec<Vec<Complex64>>,
}

/// Maximum ratio transmission: each beam is the cluster estimate scaled to
/// unit norm. Scale-invariant, so the raw and normalized estimates produce
/// identical beams; the normalized one is used because it stays well-defined
/// for zero-pilot clusters.
pub fn make_beams(realization: &ChannelRealization) -> BeamSet {
    let beams = realization
        .normalized_estimate
        .iter()
        .map(|est| {
            let norm = norm_sq(est).sqrt();
            est.iter().map(|z| z / norm).collect()
        })
        .collect();
    BeamSet { beams }
}

/// Instantaneous per-realization SINRs and the effective gains that drive
/// the decoding order.
#[derive(Debug, Clone)]
pub struct SinrRecord {
    /// `legit_sinr[m][n-1]`: post-SIC SINR of user n in cluster m.
    pub legit_sinr: Vec<Vec<f64>>,
    /// `eve_sinr[m][n-1]`: SINR of cluster m's eavesdropper when targeting
    /// the signal of user n.
    pub eve_sinr: Vec<Vec<f64>>,
    /// `effective_gains[m][n-1]`: `alpha * |h^H w|^2` per user, the ordering
    /// statistic.
    pub effective_gains: Vec<Vec<f64>>,
}

/// Decoding order for cluster `m`: user indices (1-based) sorted by
/// effective gain, strongest first. Ties break toward the lower index.
pub fn sic_order(record: &SinrRecord, m: usize) -> Vec<usize> {
    order_descending(&record.effective_gains[m])
}

fn order_descending(gains: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=gains.len()).collect();
    order.sort_by(|&a, &b| {
        gains[b - 1].partial_cmp(&gains[a - 1]).unwrap().then(a.cmp(&b))
    });
    order
}

/// Compute every user and eavesdropper SINR for one realization.
pub fn instantaneous_sinr(
    config: &SystemConfig,
    realization: &ChannelRealization,
    beams: &BeamSet,
) -> SinrRecord {
    let n_clusters = config.n_clusters();
    let eps = config.sic_residual_coeff;

    // Cross gains |h^H w_j|^2 for every channel in cluster m against every
    // beam. Index 0 of each cluster is the eavesdropper's channel.
    let mut cross: Vec<Vec<Vec<f64>>> = Vec::with_capacity(n_clusters);
    for m in 0..n_clusters {
        let per_channel: Vec<Vec<f64>> = realization.true_channels[m]
            .iter()
            .map(|h| beams.beams.iter().map(|w| dot_conj(h, w).norm_sqr()).collect())
            .collect();
        cross.push(per_channel);
    }

    let cluster_tx: Vec<f64> = config.clusters.iter().map(|c| c.total_tx_power()).collect();

    let mut legit_sinr = Vec::with_capacity(n_clusters);
    let mut eve_sinr = Vec::with_capacity(n_clusters);
    let mut effective_gains = Vec::with_capacity(n_clusters);

    for (m, cluster) in config.clusters.iter().enumerate() {
        let size = cluster.size();
        let gains: Vec<f64> =
            (1..=size).map(|n| cluster.users[n - 1].path_loss * cross[m][n][m]).collect();
        let order = order_descending(&gains);
        // position[n-1]: rank of user n in the decoding order (0 = strongest).
        let mut position = vec![0usize; size];
        for (rank, &user) in order.iter().enumerate() {
            position[user - 1] = rank;
        }

        let mut cluster_legit = vec![0.0; size];
        for n in 1..=size {
            let user = &cluster.users[n - 1];
            let own_gain = cross[m][n][m];
            let rank = position[n - 1];
            let stronger_power: f64 =
                order[..rank].iter().map(|&i| cluster.users[i - 1].tx_power).sum();
            let weaker_power: f64 =
                order[rank + 1..].iter().map(|&i| cluster.users[i - 1].tx_power).sum();
            let intra = own_gain * user.path_loss * (stronger_power + eps * weaker_power);
            let inter: f64 = (0..n_clusters)
                .filter(|&j| j != m)
                .map(|j| cross[m][n][j] * user.path_loss * cluster_tx[j])
                .sum();
            cluster_legit[n - 1] =
                own_gain * user.path_loss * user.tx_power / (intra + inter + NOISE_POWER);
        }

        let eve_own_gain = cross[m][0][m];
        let beta = cluster.eve_path_loss;
        let eve_inter: f64 = (0..n_clusters)
            .filter(|&j| j != m)
            .map(|j| cross[m][0][j] * beta * cluster_tx[j])
            .sum();
        let mut cluster_eve = vec![0.0; size];
        for n in 1..=size {
            let target_power = cluster.users[n - 1].tx_power;
            let intra = eve_own_gain * beta * (cluster_tx[m] - target_power);
            cluster_eve[n - 1] =
                eve_own_gain * beta * target_power / (intra + eve_inter + NOISE_POWER);
        }

        legit_sinr.push(cluster_legit);
        eve_sinr.push(cluster_eve);
        effective_gains.push(gains);
    }

    SinrRecord { legit_sinr, eve_sinr, effective_gains }
}
