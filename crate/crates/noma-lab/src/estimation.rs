//! Non-orthogonal channel estimation.
//!
//! All users of a cluster (and the cluster's attacker) transmit the same
//! pilot, so the base station can only estimate the cluster's *effective*
//! channel: a pilot-power-weighted mix of the individual channels. Pilot
//! sequences are orthogonal across clusters, which makes per-cluster
//! despreading exact; the pilot matrices themselves are therefore never
//! materialized and the despread observation is formed directly as
//!
//! ```text
//! y_m = sum_i sqrt(alpha_i * Q_i * tau) h_i + w,   w ~ CN(0, I)
//! ```
//!
//! with the eavesdropper included as index 0. The MMSE estimate scales the
//! observation by `sqrt(S) / (1 + S)` where `S` is the cluster pilot energy
//! `sum_i alpha_i Q_i tau`; its per-element variance is `S / (1 + S)`.
//!
//! Each individual channel relates to the estimate through a correlation
//! coefficient `rho_{m,n} = alpha Q tau / (1 + S)`:
//!
//! ```text
//! h_{m,n} = sqrt(rho) * h_hat_unit + sqrt(1 - rho) * e
//! ```
//!
//! where `h_hat_unit` is the estimate rescaled to unit element variance and
//! `e` is a unit-variance residual independent of the estimate. The raw
//! `estimate` and the `normalized_estimate` are both kept: beamforming is
//! scale-invariant so either works there, but the decomposition above is
//! exact only for the normalized form.

use num_complex::Complex64;

use crate::config::{SeedSpec, SystemConfig};
use crate::rng::TrialRng;

/// Statistical model of the pilot stage: correlation coefficients and
/// normalization constants per cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationModel {
    /// `rho[m][n]`, n = 0 is the eavesdropper.
    pub rho: Vec<Vec<f64>>,
    /// Cluster pilot energy `S_m`.
    pub cluster_pilot_energy: Vec<f64>,
    /// MMSE scaling `sqrt(S_m) / (1 + S_m)` applied to the despread
    /// observation.
    pub mmse_gain: Vec<f64>,
}

impl EstimationModel {
    /// Correlation coefficient for user `n` of cluster `m` (`n = 0`: Eve).
    pub fn rho(&self, m: usize, n: usize) -> f64 {
        self.rho[m][n]
    }
}

/// Compute correlation coefficients and normalization constants from a
/// validated config.
pub fn compute_rho(config: &SystemConfig) -> EstimationModel {
    let tau = config.pilot_length as f64;
    let mut rho = Vec::with_capacity(config.n_clusters());
    let mut energy = Vec::with_capacity(config.n_clusters());
    let mut gain = Vec::with_capacity(config.n_clusters());
    for cluster in &config.clusters {
        let s: f64 = (0..=cluster.size())
            .map(|n| cluster.path_loss(n) * cluster.pilot_power(n) * tau)
            .sum();
        let cluster_rho: Vec<f64> = (0..=cluster.size())
            .map(|n| cluster.path_loss(n) * cluster.pilot_power(n) * tau / (1.0 + s))
            .collect();
        rho.push(cluster_rho);
        energy.push(s);
        gain.push(s.sqrt() / (1.0 + s));
    }
    EstimationModel { rho, cluster_pilot_energy: energy, mmse_gain: gain }
}

/// One draw of every small-scale channel plus the despread pilot
/// observations and the resulting estimates.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// `true_channels[m][n]`, n = 0 is the eavesdropper's channel.
    pub true_channels: Vec<Vec<Vec<Complex64>>>,
    /// Despread pilot observation per cluster.
    pub despread_obs: Vec<Vec<Complex64>>,
    /// MMSE estimate per cluster (element variance `S / (1 + S)`).
    pub estimate: Vec<Vec<Complex64>>,
    /// Estimate rescaled to unit element variance. For a cluster with zero
    /// pilot energy this is a fresh isotropic draw, so downstream
    /// beamforming still has a (meaningless but well-defined) direction.
    pub normalized_estimate: Vec<Vec<Complex64>>,
}

/// Draw all channels for one trial and run the pilot stage.
pub fn simulate_estimation(config: &SystemConfig, seed: SeedSpec) -> ChannelRealization {
    let mut rng = TrialRng::new(seed);
    let nt = config.n_antennas;
    let tau = config.pilot_length as f64;

    let mut true_channels = Vec::with_capacity(config.n_clusters());
    let mut despread_obs = Vec::with_capacity(config.n_clusters());
    let mut estimate = Vec::with_capacity(config.n_clusters());
    let mut normalized = Vec::with_capacity(config.n_clusters());

    for cluster in &config.clusters {
        let channels: Vec<Vec<Complex64>> =
            (0..=cluster.size()).map(|_| rng.complex_gaussian_vector(nt)).collect();
        let pilot_noise = rng.complex_gaussian_vector(nt);

        let mut obs = pilot_noise;
        let mut s = 0.0;
        for (n, channel) in channels.iter().enumerate() {
            let weight_sq = cluster.path_loss(n) * cluster.pilot_power(n) * tau;
            s += weight_sq;
            let weight = weight_sq.sqrt();
            for (o, h) in obs.iter_mut().zip(channel) {
                *o += weight * h;
            }
        }

        let mmse = s.sqrt() / (1.0 + s);
        let est: Vec<Complex64> = obs.iter().map(|z| mmse * z).collect();
        let norm_est = if s > 0.0 {
            let scale = 1.0 / (1.0 + s).sqrt();
            obs.iter().map(|z| scale * z).collect()
        } else {
            // Zero pilot energy: the estimate is exactly zero and carries no
            // direction, so draw an isotropic unit-variance stand-in.
            rng.complex_gaussian_vector(nt)
        };

        true_channels.push(channels);
        despread_obs.push(obs);
        estimate.push(est);
        normalized.push(norm_est);
    }

    ChannelRealization { true_channels, despread_obs, estimate, normalized_estimate: normalized }
}

/// Decomposition of one true channel against the cluster estimate.
#[derive(Debug, Clone)]
pub struct ChannelDecomposition {
    /// Weight on the normalized estimate, `sqrt(rho)`.
    pub estimate_coeff: f64,
    /// Weight on the residual, `sqrt(1 - rho)`.
    pub error_coeff: f64,
    /// Empirical residual `(h - sqrt(rho) * normalized_estimate) / sqrt(1 - rho)`.
    /// `None` marks the degenerate `rho = 1` case where the residual is
    /// undefined (the channel is fully captured by the estimate).
    pub residual: Option<Vec<Complex64>>,
}

/// Split channel `n` of cluster `m` into its estimate-aligned and
/// estimation-error components. The residual is unit-variance and
/// uncorrelated with the estimate.
pub fn decompose_channel(
    realization: &ChannelRealization,
    model: &EstimationModel,
    m: usize,
    n: usize,
) -> ChannelDecomposition {
    let rho = model.rho[m][n];
    let estimate_coeff = rho.sqrt();
    let error_coeff = (1.0 - rho).max(0.0).sqrt();
    if error_coeff == 0.0 {
        return ChannelDecomposition { estimate_coeff, error_coeff, residual: None };
    }
    let h = &realization.true_channels[m][n];
    let est = &realization.normalized_estimate[m];
    let residual = h
        .iter()
        .zip(est)
        .map(|(hk, ek)| (hk - estimate_coeff * ek) / error_coeff)
        .collect();
    ChannelDecomposition { estimate_coeff, error_coeff, residual: Some(residual) }
}
