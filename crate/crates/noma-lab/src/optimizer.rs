//! Power control and power allocation by linear programming.
//!
//! Both rate constraints are ratios of quantities linear in the decision
//! variables, so multiplying through by the (positive) denominators turns
//! them into linear rows:
//!
//! * In pilot-power space the correlation coefficients are ratios with the
//!   common denominator `1 + sum_k alpha_k Q_k tau`; an eavesdropping-rate
//!   cap or a user-rate floor cross-multiplied by it is linear in the `Q`s.
//!   The attacker pilot power is data, never a variable: it only shifts the
//!   constants of each row.
//! * In transmit-power space the correlation coefficients are fixed and the
//!   closed-form rates are ratios linear in the `P`s directly.
//!
//! The max-min problems wrap the feasibility LP in a one-dimensional search
//! on the rate target, starting at the eavesdropper cap: the stepped walk
//! and a bisection accelerator (the default) that exploits the monotonicity
//! of feasibility in the target. Both agree within the step size. Inner
//! feasibility solves minimize total power, so returned vectors are the
//! cheapest points achieving the certified target.

use thiserror::Error;

use crate::config::{SystemConfig, NOISE_POWER};
use crate::estimation::{compute_rho, EstimationModel};
use crate::lp::{solve_lp, LpOutcome, LpProblem};
use crate::rates::{eve_rate_closed_form, legit_rate_closed_form};

/// One inequality `coeffs . x <= bound` over the flat user-power layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRow {
    pub coeffs: Vec<f64>,
    pub bound: f64,
}

/// Slack applied when re-verifying de-linearized constraints; absorbs pivot
/// arithmetic on the LP side.
pub const VERIFY_SLACK: f64 = 1e-8;

fn rate_threshold(rate_target: f64) -> f64 {
    2f64.powf(rate_target) - 1.0
}

/// Eavesdropping-rate cap as a row over the pilot powers of cluster `m`
/// (transmit powers fixed from the config). The row is exact: a pilot
/// vector satisfies it iff the closed-form eavesdropping rate on user `n`
/// stays at or below `r_e`.
pub fn build_c1_in_q(config: &SystemConfig, m: usize, n: usize, r_e: f64) -> ConstraintRow {
    let cluster = &config.clusters[m];
    let t = rate_threshold(r_e);
    let tau = config.pilot_length as f64;
    let nt = config.n_antennas as f64;
    let beta = cluster.eve_path_loss;
    let u = cluster.eve_pilot_power;
    let p_n = cluster.users[n - 1].tx_power;
    let other_power = cluster.total_tx_power() - p_n;
    let inter_power: f64 = config
        .clusters
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != m)
        .map(|(_, c)| c.total_tx_power())
        .sum();
    let constant = beta * inter_power + NOISE_POWER;

    let mut coeffs = vec![0.0; config.user_count()];
    for k in 1..=cluster.size() {
        coeffs[config.flat_index(m, k)] = -t * constant * cluster.users[k - 1].path_loss * tau;
    }
    let bound = t * (beta * beta * nt * tau * u * other_power + constant * (1.0 + beta * u * tau))
        - beta * beta * p_n * nt * tau * u;
    ConstraintRow { coeffs, bound }
}

/// Legitimate-rate floor as a row over the pilot powers of cluster `m`
/// (transmit powers fixed). Exact against the closed-form user rate,
/// including the imperfect-SIC residual term when the config carries one.
pub fn build_c3_in_q(config: &SystemConfig, m: usize, n: usize, r_o: f64) -> ConstraintRow {
    let cluster = &config.clusters[m];
    let t = rate_threshold(r_o);
    let tau = config.pilot_length as f64;
    let nt = config.n_antennas as f64;
    let alpha = cluster.users[n - 1].path_loss;
    let p_n = cluster.users[n - 1].tx_power;
    let stronger_power: f64 = cluster.users[..n - 1].iter().map(|u| u.tx_power).sum();
    let weaker_power: f64 = cluster.users[n..].iter().map(|u| u.tx_power).sum();
    let residual = stronger_power + config.sic_residual_coeff * weaker_power;
    let beta = cluster.eve_path_loss;
    let u = cluster.eve_pilot_power;
    let inter_power: f64 = config
        .clusters
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != m)
        .map(|(_, c)| c.total_tx_power())
        .sum();
    let constant = alpha * inter_power + NOISE_POWER;

    let mut coeffs = vec![0.0; config.user_count()];
    for k in 1..=cluster.size() {
        coeffs[config.flat_index(m, k)] = t * constant * cluster.users[k - 1].path_loss * tau;
    }
    coeffs[config.flat_index(m, n)] +=
        t * alpha * alpha * tau * nt * residual - alpha * alpha * tau * nt * p_n;
    let bound = -t * constant * (1.0 + beta * u * tau);
    ConstraintRow { coeffs, bound }
}

/// Every transmit-power row: the eavesdropping caps, the user-rate floors
/// (correlation coefficients fixed from `model`), the total power budget,
/// and the SIC-facilitating nondecreasing ordering within each cluster.
pub fn build_constraints_in_p(
    config: &SystemConfig,
    model: &EstimationModel,
    r_o: f64,
    r_e: f64,
    p_tot: f64,
) -> Vec<ConstraintRow> {
    let k_total = config.user_count();
    let nt = config.n_antennas as f64;
    let t_e = rate_threshold(r_e);
    let t_o = rate_threshold(r_o);
    let eps = config.sic_residual_coeff;
    let mut rows = Vec::new();

    for (m, cluster) in config.clusters.iter().enumerate() {
        let beta = cluster.eve_path_loss;
        let eve_gain = beta * model.rho(m, 0) * nt;
        for n in 1..=cluster.size() {
            // Eavesdropping cap on the signal of user n.
            let mut coeffs = vec![0.0; k_total];
            for i in 1..=cluster.size() {
                coeffs[config.flat_index(m, i)] = if i == n { eve_gain } else { -t_e * eve_gain };
            }
            for (j, other) in config.clusters.iter().enumerate() {
                if j != m {
                    for i in 1..=other.size() {
                        coeffs[config.flat_index(j, i)] = -t_e * beta;
                    }
                }
            }
            rows.push(ConstraintRow { coeffs, bound: t_e * NOISE_POWER });

            // Rate floor for user n.
            let alpha = cluster.users[n - 1].path_loss;
            let user_gain = alpha * model.rho(m, n) * nt;
            let mut coeffs = vec![0.0; k_total];
            for i in 1..=cluster.size() {
                let idx = config.flat_index(m, i);
                if i == n {
                    coeffs[idx] = -user_gain;
                } else if i < n {
                    coeffs[idx] = t_o * user_gain;
                } else {
                    coeffs[idx] = t_o * user_gain * eps;
                }
            }
            for (j, other) in config.clusters.iter().enumerate() {
                if j != m {
                    for i in 1..=other.size() {
                        coeffs[config.flat_index(j, i)] = t_o * alpha;
                    }
                }
            }
            rows.push(ConstraintRow { coeffs, bound: -t_o * NOISE_POWER });
        }
    }

    // Total power budget.
    rows.push(ConstraintRow { coeffs: vec![1.0; k_total], bound: p_tot });

    // Nondecreasing power within each cluster.
    for (m, cluster) in config.clusters.iter().enumerate() {
        for n in 1..cluster.size() {
            let mut coeffs = vec![0.0; k_total];
            coeffs[config.flat_index(m, n)] = 1.0;
            coeffs[config.flat_index(m, n + 1)] = -1.0;
            rows.push(ConstraintRow { coeffs, bound: 0.0 });
        }
    }

    rows
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OptimizeError {
    /// Even the initial rate target (the eavesdropper cap itself) admits no
    /// feasible power vector; the cap is too strict for the attack power.
    #[error("infeasible at the initial rate target r_o = r_e")]
    InfeasibleAtStart,
    #[error("no feasible power vector for the given targets")]
    Infeasible,
}

/// Outer search flavor for the max-min problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchStrategy {
    /// Walk the target up in `delta_o` steps from the eavesdropper cap and
    /// keep the last feasible solve.
    Stepped,
    /// Bracket the feasibility boundary and bisect it; agrees with the
    /// stepped walk within `delta_o`. Valid because feasibility is monotone
    /// in the target (only the rate floors tighten).
    #[default]
    Bisection,
}

/// A solved power-control problem.
#[derive(Debug, Clone)]
pub struct PowerSolution {
    /// Power vector in flat user order (pilot powers for the `_q` problems,
    /// transmit powers for the `_p` problems).
    pub vars: Vec<f64>,
    /// Certified minimum-user-rate target.
    pub r_o: f64,
    /// Eavesdropping-rate cap the solution honors.
    pub r_e: f64,
    /// Outer objective: the certified target for the max-min problems, the
    /// total power for the minimization problems.
    pub objective: f64,
    /// Minimum closed-form user rate recomputed from the solved powers.
    pub achieved_min_rate: f64,
    /// Maximum closed-form eavesdropping rate recomputed from the solved
    /// powers.
    pub max_eve_rate: f64,
    /// True when the de-linearized rates honor both targets within
    /// [`VERIFY_SLACK`].
    pub constraints_verified: bool,
}

fn q_problem(config: &SystemConfig, r_o: f64, r_e: f64, q_max: f64) -> LpProblem {
    let mut problem = LpProblem::new(config.user_count());
    problem.objective = vec![1.0; config.user_count()];
    problem.upper_bounds = vec![Some(q_max); config.user_count()];
    for (m, n) in config.iter_users() {
        let c1 = build_c1_in_q(config, m, n, r_e);
        problem.push_row(c1.coeffs, c1.bound);
        let c3 = build_c3_in_q(config, m, n, r_o);
        problem.push_row(c3.coeffs, c3.bound);
    }
    problem
}

fn p_problem(
    config: &SystemConfig,
    model: &EstimationModel,
    r_o: f64,
    r_e: f64,
    p_tot: f64,
) -> LpProblem {
    let mut problem = LpProblem::new(config.user_count());
    problem.objective = vec![1.0; config.user_count()];
    for row in build_constraints_in_p(config, model, r_o, r_e, p_tot) {
        problem.push_row(row.coeffs, row.bound);
    }
    problem
}

/// Closed-form rate extremes after substituting solved pilot powers.
fn verify_q(config: &SystemConfig, q: &[f64], r_o: f64, r_e: f64) -> (f64, f64, bool) {
    let solved = config.with_pilot_powers(q);
    let model = compute_rho(&solved);
    verify_rates(&solved, &model, r_o, r_e)
}

/// Closed-form rate extremes after substituting solved transmit powers.
fn verify_p(
    config: &SystemConfig,
    model: &EstimationModel,
    p: &[f64],
    r_o: f64,
    r_e: f64,
) -> (f64, f64, bool) {
    let solved = config.with_tx_powers(p);
    verify_rates(&solved, model, r_o, r_e)
}

fn verify_rates(
    config: &SystemConfig,
    model: &EstimationModel,
    r_o: f64,
    r_e: f64,
) -> (f64, f64, bool) {
    let min_rate = min_user_rate(config, model);
    let max_eve = max_eve_rate(config, model);
    let ok = min_rate >= r_o - VERIFY_SLACK && max_eve <= r_e + VERIFY_SLACK;
    (min_rate, max_eve, ok)
}

/// Rate targets beyond this are treated as saturation; with bounded powers
/// no scenario reaches it.
const SEARCH_CEILING: f64 = 200.0;

fn max_min_search(
    r_start: f64,
    delta_o: f64,
    strategy: SearchStrategy,
    solve_at: impl Fn(f64) -> Option<Vec<f64>>,
) -> Result<(f64, Vec<f64>), OptimizeError> {
    assert!(delta_o > 0.0, "delta_o must be positive");
    let mut best = solve_at(r_start).ok_or(OptimizeError::InfeasibleAtStart)?;
    let mut r = r_start;
    match strategy {
        SearchStrategy::Stepped => loop {
            let next = r + delta_o;
            if next - r_start > SEARCH_CEILING {
                break;
            }
            match solve_at(next) {
                Some(vars) => {
                    best = vars;
                    r = next;
                }
                None => break,
            }
        },
        SearchStrategy::Bisection => {
            // Bracket: grow the upper end until it turns infeasible.
            let mut step = 1.0f64.max(delta_o);
            let mut hi = r + step;
            loop {
                if hi - r_start > SEARCH_CEILING {
                    break;
                }
                match solve_at(hi) {
                    Some(vars) => {
                        best = vars;
                        r = hi;
                        step *= 2.0;
                        hi = r + step;
                    }
                    None => break,
                }
            }
            if hi - r_start <= SEARCH_CEILING {
                while hi - r > delta_o / 4.0 {
                    let mid = 0.5 * (r + hi);
                    match solve_at(mid) {
                        Some(vars) => {
                            best = vars;
                            r = mid;
                        }
                        None => hi = mid,
                    }
                }
            }
        }
    }
    Ok((r, best))
}

/// Maximize the minimum user rate over the pilot powers, holding transmit
/// powers fixed, subject to the eavesdropping cap `r_e` and per-user pilot
/// cap `q_max`.
pub fn op2_maxmin_q(
    config: &SystemConfig,
    r_e: f64,
    q_max: f64,
    delta_o: f64,
    strategy: SearchStrategy,
) -> Result<PowerSolution, OptimizeError> {
    let solve_at = |r_o: f64| {
        solve_lp(&q_problem(config, r_o, r_e, q_max)).optimal().map(|(x, _)| x.to_vec())
    };
    let (r_o, vars) = max_min_search(r_e, delta_o, strategy, solve_at)?;
    let (achieved_min_rate, max_eve_rate, constraints_verified) = verify_q(config, &vars, r_o, r_e);
    Ok(PowerSolution {
        objective: r_o,
        vars,
        r_o,
        r_e,
        achieved_min_rate,
        max_eve_rate,
        constraints_verified,
    })
}

/// Minimize the total pilot power subject to the eavesdropping cap and the
/// user-rate floor, holding transmit powers fixed.
pub fn op3_minpower_q(
    config: &SystemConfig,
    r_e: f64,
    r_o: f64,
    q_max: f64,
) -> Result<PowerSolution, OptimizeError> {
    match solve_lp(&q_problem(config, r_o, r_e, q_max)) {
        LpOutcome::Optimal { x, objective } => {
            let (achieved_min_rate, max_eve_rate, constraints_verified) =
                verify_q(config, &x, r_o, r_e);
            Ok(PowerSolution {
                vars: x,
                r_o,
                r_e,
                objective,
                achieved_min_rate,
                max_eve_rate,
                constraints_verified,
            })
        }
        _ => Err(OptimizeError::Infeasible),
    }
}

/// Maximize the minimum user rate over the transmit powers, holding the
/// pilot stage (and hence the correlation coefficients) fixed, subject to
/// the eavesdropping cap, the total power budget, and the nondecreasing
/// in-cluster ordering.
pub fn op4_maxmin_p(
    config: &SystemConfig,
    model: &EstimationModel,
    r_e: f64,
    p_tot: f64,
    delta_o: f64,
    strategy: SearchStrategy,
) -> Result<PowerSolution, OptimizeError> {
    let solve_at = |r_o: f64| {
        solve_lp(&p_problem(config, model, r_o, r_e, p_tot)).optimal().map(|(x, _)| x.to_vec())
    };
    let (r_o, vars) = max_min_search(r_e, delta_o, strategy, solve_at)?;
    let (achieved_min_rate, max_eve_rate, constraints_verified) =
        verify_p(config, model, &vars, r_o, r_e);
    Ok(PowerSolution {
        objective: r_o,
        vars,
        r_o,
        r_e,
        achieved_min_rate,
        max_eve_rate,
        constraints_verified,
    })
}

/// Minimize the total transmit power subject to the eavesdropping cap, the
/// user-rate floor, the total power budget, and the in-cluster ordering.
pub fn op5_minpower_p(
    config: &SystemConfig,
    model: &EstimationModel,
    r_e: f64,
    r_o: f64,
    p_tot: f64,
) -> Result<PowerSolution, OptimizeError> {
    match solve_lp(&p_problem(config, model, r_o, r_e, p_tot)) {
        LpOutcome::Optimal { x, objective } => {
            let (achieved_min_rate, max_eve_rate, constraints_verified) =
                verify_p(config, model, &x, r_o, r_e);
            Ok(PowerSolution {
                vars: x,
                r_o,
                r_e,
                objective,
                achieved_min_rate,
                max_eve_rate,
                constraints_verified,
            })
        }
        _ => Err(OptimizeError::Infeasible),
    }
}

/// Minimum closed-form user rate of a config under a given model.
pub fn min_user_rate(config: &SystemConfig, model: &EstimationModel) -> f64 {
    config
        .iter_users()
        .map(|(m, n)| legit_rate_closed_form(config, model, m, n))
        .fold(f64::INFINITY, f64::min)
}

/// Maximum closed-form eavesdropping rate of a config under a given model.
pub fn max_eve_rate(config: &SystemConfig, model: &EstimationModel) -> f64 {
    config
        .iter_users()
        .map(|(m, n)| eve_rate_closed_form(config, model, m, n))
        .fold(0.0, f64::max)
}

/// Cheapest common pilot power meeting both rate targets, if any exists
/// below `q_max`. Returns `(q, total)`. Both constraints relax monotonically
/// as the common power grows (every user correlation rises, the attacker's
/// falls), so a bisection on the scalar is exact.
pub fn equal_pilot_baseline(
    config: &SystemConfig,
    r_e: f64,
    r_o: f64,
    q_max: f64,
) -> Option<(f64, f64)> {
    let feasible = |q: f64| {
        let powers = vec![q; config.user_count()];
        let solved = config.with_pilot_powers(&powers);
        let model = compute_rho(&solved);
        min_user_rate(&solved, &model) >= r_o && max_eve_rate(&solved, &model) <= r_e
    };
    if !feasible(q_max) {
        return None;
    }
    if feasible(0.0) {
        return Some((0.0, 0.0));
    }
    let mut lo = 0.0;
    let mut hi = q_max;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some((hi, hi * config.user_count() as f64))
}

/// Every user gets the same share of the budget.
pub fn equal_power_allocation(config: &SystemConfig, p_tot: f64) -> Vec<f64> {
    vec![p_tot / config.user_count() as f64; config.user_count()]
}

/// Within each cluster user `n` gets `n / (1 + ... + N_m)` of the cluster's
/// equal share of the budget; weaker users get more power.
pub fn fixed_proportion_allocation(config: &SystemConfig, p_tot: f64) -> Vec<f64> {
    let per_cluster = p_tot / config.n_clusters() as f64;
    let mut powers = vec![0.0; config.user_count()];
    for (m, cluster) in config.clusters.iter().enumerate() {
        let weight_sum: usize = (1..=cluster.size()).sum();
        for n in 1..=cluster.size() {
            powers[config.flat_index(m, n)] = n as f64 / weight_sum as f64 * per_cluster;
        }
    }
    powers
}
