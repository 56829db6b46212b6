//! Scenario configuration and the deterministic randomness contract.
//!
//! A [`SystemConfig`] is the ground truth every other module consumes: base
//! station dimensions, per-cluster large-scale gains, pilot powers, and
//! downlink transmit powers. Within each cluster the eavesdropper is stored
//! as entry 0 of the path-loss/pilot-power lists, merging the attacker into
//! the same index space as the users it impersonates.
//!
//! Cluster indices `m` are 0-based. User indices `n` are 1-based within a
//! cluster; `n = 0` addresses the cluster's eavesdropper. Users are expected
//! to be listed strongest-first (nonincreasing path loss), which makes the
//! configured order coincide statistically with the SIC decoding order.

/// Receiver noise power. All powers in a config are ratios against this.
pub const NOISE_POWER: f64 = 1.0;

/// One user of a cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserConfig {
    /// Large-scale channel gain toward the base station.
    pub path_loss: f64,
    /// Uplink pilot power spent during channel estimation.
    pub pilot_power: f64,
    /// Downlink transmit power allocated to this user's signal.
    pub tx_power: f64,
}

/// One cluster: its eavesdropper plus the users sharing the cluster pilot.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterConfig {
    /// Large-scale gain of the eavesdropper's channel.
    pub eve_path_loss: f64,
    /// Pilot power the eavesdropper spends on the contamination attack.
    /// Zero models a passive eavesdropper.
    pub eve_pilot_power: f64,
    /// Users ordered strongest-first.
    pub users: Vec<UserConfig>,
}

impl ClusterConfig {
    pub fn size(&self) -> usize {
        self.users.len()
    }

    /// Path loss with the eavesdropper merged in at index 0.
    pub fn path_loss(&self, n: usize) -> f64 {
        if n == 0 {
            self.eve_path_loss
        } else {
            self.users[n - 1].path_loss
        }
    }

    /// Pilot power with the eavesdropper merged in at index 0.
    pub fn pilot_power(&self, n: usize) -> f64 {
        if n == 0 {
            self.eve_pilot_power
        } else {
            self.users[n - 1].pilot_power
        }
    }

    /// Sum of downlink transmit powers in this cluster.
    pub fn total_tx_power(&self) -> f64 {
        self.users.iter().map(|u| u.tx_power).sum()
    }
}

/// Full scenario description.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Base station antenna count.
    pub n_antennas: usize,
    /// Pilot sequence length in symbols. Must be at least the cluster count
    /// so that cross-cluster pilots can be pairwise orthogonal.
    pub pilot_length: usize,
    /// Residual interference fraction left by imperfect SIC, in [0, 1].
    /// Zero means perfect cancellation of weaker users.
    pub sic_residual_coeff: f64,
    /// When set, validation additionally requires tx powers to be
    /// nondecreasing within each cluster (the SIC-facilitating ordering).
    pub assert_power_ordering: bool,
    pub clusters: Vec<ClusterConfig>,
}

impl SystemConfig {
    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Total number of users across all clusters.
    pub fn user_count(&self) -> usize {
        self.clusters.iter().map(|c| c.size()).sum()
    }

    /// Flat index of user `n` (1-based) of cluster `m` (0-based), used for
    /// per-user vectors and LP variable layouts.
    pub fn flat_index(&self, m: usize, n: usize) -> usize {
        debug_assert!(n >= 1 && n <= self.clusters[m].size());
        self.clusters[..m].iter().map(|c| c.size()).sum::<usize>() + (n - 1)
    }

    /// Iterate `(m, n)` over all users in flat order.
    pub fn iter_users(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.clusters
            .iter()
            .enumerate()
            .flat_map(|(m, c)| (1..=c.size()).map(move |n| (m, n)))
    }

    /// Sum of all downlink transmit powers.
    pub fn total_tx_power(&self) -> f64 {
        self.clusters.iter().map(|c| c.total_tx_power()).sum()
    }

    /// Copy of this config with the per-user transmit powers replaced by
    /// `powers` in flat order.
    pub fn with_tx_powers(&self, powers: &[f64]) -> SystemConfig {
        assert_eq!(powers.len(), self.user_count(), "power vector length");
        let mut out = self.clone();
        for (m, n) in self.iter_users() {
            out.clusters[m].users[n - 1].tx_power = powers[self.flat_index(m, n)];
        }
        out
    }

    /// Copy of this config with the per-user pilot powers replaced by
    /// `powers` in flat order. Eavesdropper pilot powers are untouched.
    pub fn with_pilot_powers(&self, powers: &[f64]) -> SystemConfig {
        assert_eq!(powers.len(), self.user_count(), "power vector length");
        let mut out = self.clone();
        for (m, n) in self.iter_users() {
            out.clusters[m].users[n - 1].pilot_power = powers[self.flat_index(m, n)];
        }
        out
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

/// Outcome of [`validate`]. A passing config is accepted by every other
/// module without re-checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }

    /// First violated invariant, if any.
    pub fn first_violation(&self) -> Option<&str> {
        self.violations.first().map(|s| s.as_str())
    }

    pub fn violations(&self) -> &[String] {
        &self.violations
    }
}

fn check_power(violations: &mut Vec<String>, what: &str, value: f64) {
    if !value.is_finite() {
        violations.push(format!("{what}: non-finite power"));
    } else if value < 0.0 {
        violations.push(format!("{what}: negative power"));
    }
}

/// Check every structural invariant of a scenario and name each violation.
pub fn validate(config: &SystemConfig) -> ValidationReport {
    let mut violations = Vec::new();
    if config.n_antennas == 0 {
        violations.push("n_antennas must be positive".to_string());
    }
    if config.clusters.is_empty() {
        violations.push("n_clusters must be positive".to_string());
    }
    if config.pilot_length < config.n_clusters() {
        violations.push(format!(
            "pilot_length < n_clusters ({} < {})",
            config.pilot_length,
            config.n_clusters()
        ));
    }
    if !(0.0..=1.0).contains(&config.sic_residual_coeff) {
        violations.push(format!(
            "sic_residual_coeff {} outside [0, 1]",
            config.sic_residual_coeff
        ));
    }
    for (m, cluster) in config.clusters.iter().enumerate() {
        let id = m + 1;
        if cluster.users.is_empty() {
            violations.push(format!("cluster {id}: no users"));
        }
        if !cluster.eve_path_loss.is_finite() || cluster.eve_path_loss < 0.0 {
            violations.push(format!("cluster {id} eve: negative or non-finite path loss"));
        }
        check_power(&mut violations, &format!("cluster {id} eve pilot"), cluster.eve_pilot_power);
        for (i, user) in cluster.users.iter().enumerate() {
            let n = i + 1;
            if !user.path_loss.is_finite() || user.path_loss < 0.0 {
                violations.push(format!(
                    "cluster {id} user {n}: negative or non-finite path loss"
                ));
            }
            check_power(&mut violations, &format!("cluster {id} user {n} pilot"), user.pilot_power);
            check_power(&mut violations, &format!("cluster {id} user {n} tx"), user.tx_power);
        }
        if config.assert_power_ordering {
            for w in cluster.users.windows(2) {
                if w[0].tx_power > w[1].tx_power {
                    violations.push(format!(
                        "cluster {id}: tx_power not nondecreasing (SIC ordering asserted)"
                    ));
                    break;
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Addresses one trial's random substream.
///
/// The substream seed is a pure function of `(master_seed, trial_index)`,
/// so trials are order-independent and parallel-safe, and identical inputs
/// reproduce identical draws bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub trial_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        Self { master_seed, trial_index }
    }

    /// Counter-based substream derivation: two splitmix64 rounds give full
    /// avalanche between neighboring trial indices.
    pub fn substream_seed(&self) -> u64 {
        let mixed = splitmix64(self.master_seed ^ splitmix64(self.trial_index));
        splitmix64(mixed)
    }
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
