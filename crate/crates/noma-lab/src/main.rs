//! Command-line front end: scenario ingestion, figure presets, sweeps, and
//! CSV emission.
//!
//! Output is CSV with a mandatory header row, `.` decimals, and `NA` cells
//! for infeasible optimization points. Floats print in Rust's shortest
//! round-trip form, so repeated runs with the same master seed produce
//! byte-identical files, serial or parallel. `NOMA_LAB_THREADS` caps the
//! worker pool.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use noma_lab::config::SystemConfig;
use noma_lab::estimation::compute_rho;
use noma_lab::montecarlo::secrecy_gap_report;
use noma_lab::optimizer::{
    equal_pilot_baseline, equal_power_allocation, fixed_proportion_allocation, max_eve_rate,
    min_user_rate, op2_maxmin_q, op3_minpower_q, op4_maxmin_p, op5_minpower_p, OptimizeError,
    PowerSolution, SearchStrategy,
};
use noma_lab::rates::{closed_form_report, tdma_baseline_rate, PowerFractions};
use noma_lab::scenario::{db_to_linear, linear_to_db, load_scenario, presets, scenario_to_string};

#[derive(Parser)]
#[command(
    name = "noma-lab",
    version,
    about = "Secure massive NOMA downlink: analysis, simulation, and power optimization",
    long_about = None
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Scenario file; the built-in default scenario when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form per-user rates.
    ///
    /// Columns: cluster,user,legit_rate,eve_rate,secrecy_rate
    /// (cluster and user are 1-based).
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monte Carlo rates compared against the closed forms.
    ///
    /// Columns: cluster,user,mc_legit,mc_legit_se,mc_eve,mc_eve_se,
    /// mc_secrecy,mc_secrecy_se,cf_legit,cf_eve,cf_secrecy,bound_exceeds
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Trial count (at least 100).
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Master seed; trials derive independent substreams from it.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Solve one power-control problem.
    ///
    /// Columns: cluster,user,power,r_o,r_e,objective,achieved_min_rate,
    /// max_eve_rate,verified. The power column holds pilot powers for
    /// op2/op3 and transmit powers for op4/op5.
    Optimize {
        #[command(flatten)]
        common: CommonArgs,
        /// Which problem to solve.
        #[arg(long, value_enum)]
        problem: Problem,
        /// Eavesdropping-rate cap in bits per channel use.
        #[arg(long = "re", default_value_t = 0.1)]
        r_e: f64,
        /// Minimum-user-rate floor (op3/op5 only).
        #[arg(long = "ro", default_value_t = 0.3)]
        r_o: f64,
        /// Outer search step for the max-min problems.
        #[arg(long = "delta-o", default_value_t = 0.01)]
        delta_o: f64,
        /// Per-user pilot power cap (op2/op3).
        #[arg(long = "q-max", default_value_t = 1.0)]
        q_max: f64,
        /// Total transmit power budget (op4/op5); defaults to the
        /// scenario's configured total.
        #[arg(long = "p-tot")]
        p_tot: Option<f64>,
        /// Use the stepped outer search instead of bisection.
        #[arg(long)]
        stepped: bool,
    },
    /// Sweep one axis and report closed-form (and optionally Monte Carlo)
    /// secrecy sums.
    ///
    /// Columns: axis,value,cf_sum_secrecy,cf_min_secrecy,mc_sum_secrecy,
    /// mc_sum_secrecy_se (`NA` for mc columns unless --trials is given,
    /// and for points whose configuration is invalid).
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Axis and values, e.g. `psnr=-10,0,10,20` or
        /// `n-antennas=32,64,128`. Axes: n-antennas, psnr, usnr,
        /// cluster-mode. Values must be strictly increasing.
        #[arg(long)]
        sweep: String,
        /// Monte Carlo trials per sweep point (omit for closed-form only).
        #[arg(long)]
        trials: Option<usize>,
        /// Master seed for the Monte Carlo columns.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Reproduce a figure-shaped experiment on the default scenario family.
    Preset {
        /// One of: fig2, fig3, fig4, fig5, fig6, fig7, default-scenario.
        /// `default-scenario` emits the default scenario file itself.
        name: String,
        #[command(flatten)]
        common: CommonArgs,
        /// Monte Carlo trials for presets that carry simulation columns.
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Master seed for simulation columns.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Eavesdropping-rate cap for the optimizer presets (fig6; fig7
        /// derives a per-point cap from its baselines when not given).
        #[arg(long = "re")]
        r_e: Option<f64>,
        /// Outer search step for fig7.
        #[arg(long = "delta-o", default_value_t = 0.01)]
        delta_o: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    /// Max-min user rate over pilot powers.
    Op2,
    /// Min total pilot power at fixed rate targets.
    Op3,
    /// Max-min user rate over transmit powers.
    Op4,
    /// Min total transmit power at fixed rate targets.
    Op5,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("NOMA_LAB_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: NOMA_LAB_THREADS must be a positive integer");
                return ExitCode::FAILURE;
            }
        }
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn load(common: &CommonArgs) -> Result<SystemConfig, String> {
    let config = match &common.scenario {
        Some(path) => load_scenario(path).map_err(|e| format!("{}: {e}", path.display()))?,
        None => presets::default_scenario(),
    };
    let report = config.validate();
    if let Some(first) = report.first_violation() {
        return Err(format!("invalid scenario: {first}"));
    }
    Ok(config)
}

fn emit(common: &CommonArgs, csv: &str) -> Result<(), String> {
    match &common.out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<(), String> {
    match command {
        Command::Analyze { common } => {
            let config = load(&common)?;
            let model = compute_rho(&config);
            let report = closed_form_report(&config, &model);
            let mut csv = String::from("cluster,user,legit_rate,eve_rate,secrecy_rate\n");
            for row in &report.users {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    row.cluster + 1,
                    row.user,
                    row.legit,
                    row.eve,
                    row.secrecy
                ));
            }
            emit(&common, &csv)
        }
        Command::Simulate { common, trials, seed } => {
            if trials < 100 {
                return Err("--trials must be at least 100".into());
            }
            let config = load(&common)?;
            let model = compute_rho(&config);
            let cf = closed_form_report(&config, &model);
            let report = secrecy_gap_report(&config, trials, seed);
            let mut csv = String::from(
                "cluster,user,mc_legit,mc_legit_se,mc_eve,mc_eve_se,mc_secrecy,mc_secrecy_se,cf_legit,cf_eve,cf_secrecy,bound_exceeds\n",
            );
            for (k, row) in report.rows.iter().enumerate() {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    row.cluster + 1,
                    row.user,
                    report.user_rates.mean[k],
                    report.user_rates.std_error[k],
                    report.eve_rates.mean[k],
                    report.eve_rates.std_error[k],
                    row.mc_secrecy,
                    row.mc_secrecy_se,
                    cf.users[k].legit,
                    cf.users[k].eve,
                    row.closed_form,
                    row.bound_exceeds
                ));
            }
            emit(&common, &csv)
        }
        Command::Optimize { common, problem, r_e, r_o, delta_o, q_max, p_tot, stepped } => {
            let config = load(&common)?;
            let model = compute_rho(&config);
            let strategy =
                if stepped { SearchStrategy::Stepped } else { SearchStrategy::Bisection };
            let p_tot = p_tot.unwrap_or_else(|| config.total_tx_power());
            let solution = match problem {
                Problem::Op2 => op2_maxmin_q(&config, r_e, q_max, delta_o, strategy),
                Problem::Op3 => op3_minpower_q(&config, r_e, r_o, q_max),
                Problem::Op4 => op4_maxmin_p(&config, &model, r_e, p_tot, delta_o, strategy),
                Problem::Op5 => op5_minpower_p(&config, &model, r_e, r_o, p_tot),
            }
            .map_err(|e| e.to_string())?;
            emit(&common, &solution_csv(&config, &solution))
        }
        Command::Sweep { common, sweep, trials, seed } => {
            if let Some(t) = trials {
                if t < 100 {
                    return Err("--trials must be at least 100".into());
                }
            }
            let config = load(&common)?;
            let (axis, values) = parse_sweep(&sweep)?;
            let rows: Vec<String> = values
                .par_iter()
                .map(|&value| sweep_row(&config, axis, value, trials, seed))
                .collect();
            let mut csv = String::from(
                "axis,value,cf_sum_secrecy,cf_min_secrecy,mc_sum_secrecy,mc_sum_secrecy_se\n",
            );
            for row in rows {
                csv.push_str(&row);
            }
            emit(&common, &csv)
        }
        Command::Preset { name, common, trials, seed, r_e, delta_o } => {
            let csv = match name.as_str() {
                "default-scenario" => scenario_to_string(&presets::default_scenario()),
                "fig2" => preset_fig2(trials, seed),
                "fig3" => preset_fig3(),
                "fig4" => preset_fig4(),
                "fig5" => preset_fig5(),
                "fig6" => preset_fig6(r_e.unwrap_or(0.1)),
                "fig7" => preset_fig7(r_e, delta_o),
                other => {
                    return Err(format!(
                        "unknown preset `{other}` (expected fig2..fig7 or default-scenario)"
                    ))
                }
            };
            emit(&common, &csv)
        }
    }
}

fn solution_csv(config: &SystemConfig, solution: &PowerSolution) -> String {
    let mut csv = String::from(
        "cluster,user,power,r_o,r_e,objective,achieved_min_rate,max_eve_rate,verified\n",
    );
    for (m, n) in config.iter_users() {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            m + 1,
            n,
            solution.vars[config.flat_index(m, n)],
            solution.r_o,
            solution.r_e,
            solution.objective,
            solution.achieved_min_rate,
            solution.max_eve_rate,
            solution.constraints_verified
        ));
    }
    csv
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SweepAxis {
    Antennas,
    Psnr,
    Usnr,
    ClusterMode,
}

impl SweepAxis {
    fn name(&self) -> &'static str {
        match self {
            SweepAxis::Antennas => "n-antennas",
            SweepAxis::Psnr => "psnr",
            SweepAxis::Usnr => "usnr",
            SweepAxis::ClusterMode => "cluster-mode",
        }
    }
}

fn parse_sweep(spec: &str) -> Result<(SweepAxis, Vec<f64>), String> {
    let (axis, values) = spec
        .split_once('=')
        .ok_or_else(|| "expected --sweep AXIS=v1,v2,...".to_string())?;
    let axis = match axis {
        "n-antennas" | "n_antennas" => SweepAxis::Antennas,
        "psnr" => SweepAxis::Psnr,
        "usnr" => SweepAxis::Usnr,
        "cluster-mode" | "cluster_mode" => SweepAxis::ClusterMode,
        other => return Err(format!("unknown sweep axis `{other}`")),
    };
    let values: Result<Vec<f64>, _> = values.split(',').map(|v| v.trim().parse::<f64>()).collect();
    let values = values.map_err(|e| format!("bad sweep value: {e}"))?;
    if values.is_empty() {
        return Err("sweep needs at least one value".into());
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err("sweep values must be strictly increasing".into());
    }
    Ok((axis, values))
}

/// Apply one sweep point to a copy of the base scenario.
fn apply_sweep_point(
    config: &SystemConfig,
    axis: SweepAxis,
    value: f64,
) -> Result<SystemConfig, String> {
    match axis {
        SweepAxis::Antennas => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err("antenna count must be a positive integer".into());
            }
            let mut out = config.clone();
            out.n_antennas = value as usize;
            Ok(out)
        }
        SweepAxis::Psnr => {
            let fractions = PowerFractions::from_config(config);
            let p_tot = db_to_linear(value);
            let powers: Vec<f64> = config
                .iter_users()
                .map(|(m, n)| fractions.nu[m][n - 1] * p_tot)
                .collect();
            Ok(config.with_tx_powers(&powers))
        }
        SweepAxis::Usnr => {
            let mut out = config.clone();
            let u = db_to_linear(value);
            for cluster in out.clusters.iter_mut() {
                cluster.eve_pilot_power = u;
            }
            Ok(out)
        }
        SweepAxis::ClusterMode => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err("cluster count must be a positive integer".into());
            }
            let m = value as usize;
            let k = config.user_count();
            if !k.is_multiple_of(m) {
                return Err(format!("{k} users do not split evenly into {m} clusters"));
            }
            if config.pilot_length < m {
                return Err(format!("pilot_length {} < {m} clusters", config.pilot_length));
            }
            // Rebuild the preset shape, carrying over the radio knobs of the
            // loaded scenario.
            let q = config
                .clusters
                .iter()
                .flat_map(|c| c.users.iter().map(|u| u.pilot_power))
                .fold(0.0, f64::max);
            let u = config.clusters.iter().map(|c| c.eve_pilot_power).fold(0.0, f64::max);
            Ok(presets::clustered(
                config.n_antennas,
                m,
                k / m,
                config.pilot_length,
                linear_to_db(config.total_tx_power()),
                linear_to_db(q),
                linear_to_db(u),
            ))
        }
    }
}

fn sweep_row(
    config: &SystemConfig,
    axis: SweepAxis,
    value: f64,
    trials: Option<usize>,
    seed: u64,
) -> String {
    let point = match apply_sweep_point(config, axis, value) {
        Ok(point) => point,
        Err(_) => return format!("{},{},NA,NA,NA,NA\n", axis.name(), value),
    };
    let model = compute_rho(&point);
    let report = closed_form_report(&point, &model);
    let min_secrecy = report.users.iter().map(|u| u.secrecy).fold(f64::INFINITY, f64::min);
    match trials {
        Some(t) => {
            let mc = secrecy_gap_report(&point, t, seed);
            format!(
                "{},{},{},{},{},{}\n",
                axis.name(),
                value,
                report.sum_secrecy,
                min_secrecy,
                mc.sum_secrecy,
                mc.sum_secrecy_se
            )
        }
        None => {
            format!("{},{},{},{},NA,NA\n", axis.name(), value, report.sum_secrecy, min_secrecy)
        }
    }
}

const FIG_PSNR_GRID_DB: [f64; 11] =
    [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0];

/// Closed-form vs Monte Carlo sum secrecy over a transmit-power sweep, with
/// the interference-free time-shared comparator.
fn preset_fig2(trials: usize, seed: u64) -> String {
    let rows: Vec<String> = FIG_PSNR_GRID_DB
        .par_iter()
        .map(|&psnr| {
            let config = presets::clustered(
                64,
                12,
                4,
                16,
                psnr,
                presets::DEFAULT_QSNR_DB,
                presets::DEFAULT_USNR_DB,
            );
            let model = compute_rho(&config);
            let report = closed_form_report(&config, &model);
            let mc = secrecy_gap_report(&config, trials, seed);
            let tdma: f64 =
                config.iter_users().map(|(m, n)| tdma_baseline_rate(&config, m, n)).sum();
            format!(
                "{},{},{},{},{}\n",
                psnr, report.sum_secrecy, mc.sum_secrecy, mc.sum_secrecy_se, tdma
            )
        })
        .collect();
    let mut csv =
        String::from("psnr_db,cf_sum_secrecy,mc_sum_secrecy,mc_sum_secrecy_se,tdma_sum_rate\n");
    rows.into_iter().for_each(|r| csv.push_str(&r));
    csv
}

/// Sum secrecy against the antenna count at three transmit-power levels.
fn preset_fig3() -> String {
    let antennas = [16usize, 32, 64, 128, 256, 512];
    let psnrs = [0.0, 10.0, 20.0];
    let mut csv = String::from(
        "n_antennas,cf_sum_secrecy_psnr0db,cf_sum_secrecy_psnr10db,cf_sum_secrecy_psnr20db\n",
    );
    for &nt in &antennas {
        let mut cells = vec![nt.to_string()];
        for &psnr in &psnrs {
            let config = presets::clustered(
                nt,
                12,
                4,
                16,
                psnr,
                presets::DEFAULT_QSNR_DB,
                presets::DEFAULT_USNR_DB,
            );
            let model = compute_rho(&config);
            cells.push(closed_form_report(&config, &model).sum_secrecy.to_string());
        }
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    csv
}

/// Sum secrecy against the attack power at three array sizes, pilot power
/// pinned at QSNR = -5 dB.
fn preset_fig4() -> String {
    let usnrs = [-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0];
    let antennas = [64usize, 128, 256];
    let mut csv =
        String::from("usnr_db,cf_sum_secrecy_nt64,cf_sum_secrecy_nt128,cf_sum_secrecy_nt256\n");
    for &usnr in &usnrs {
        let mut cells = vec![usnr.to_string()];
        for &nt in &antennas {
            let config = presets::clustered(nt, 12, 4, 16, presets::DEFAULT_PSNR_DB, -5.0, usnr);
            let model = compute_rho(&config);
            cells.push(closed_form_report(&config, &model).sum_secrecy.to_string());
        }
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    csv
}

/// Sum secrecy for three clustering modes of 48 users, common pilot length.
fn preset_fig5() -> String {
    let modes = [24usize, 16, 12];
    let mut csv =
        String::from("psnr_db,cf_sum_secrecy_m24,cf_sum_secrecy_m16,cf_sum_secrecy_m12\n");
    for &psnr in &FIG_PSNR_GRID_DB {
        let mut cells = vec![psnr.to_string()];
        for &m in &modes {
            let config = presets::clustered(
                64,
                m,
                48 / m,
                24,
                psnr,
                presets::DEFAULT_QSNR_DB,
                presets::DEFAULT_USNR_DB,
            );
            let model = compute_rho(&config);
            cells.push(closed_form_report(&config, &model).sum_secrecy.to_string());
        }
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    csv
}

/// Minimum total pilot power against the required secrecy margin: the LP
/// optimizer versus the best common pilot power. The user-rate floor is
/// `r_e + target`, so `target` is the guaranteed secrecy gap. Runs under a
/// weak attack (USNR -20 dB) on a 0.4-decade path-loss spread, where the
/// floor stays reachable for the weakest user; the top of the sweep is
/// allowed to go infeasible so the cliff stays visible.
fn preset_fig6(r_e: f64) -> String {
    let q_max = 1.0;
    let targets: Vec<f64> = (1..=10).map(|i| 0.02 * i as f64).collect();
    let config = presets::clustered_with_span(
        64,
        12,
        4,
        16,
        presets::DEFAULT_PSNR_DB,
        presets::DEFAULT_QSNR_DB,
        -20.0,
        0.4,
    );
    let mut csv = String::from("target_secrecy,op3_total_pilot_power,equal_total_pilot_power\n");
    for &target in &targets {
        let r_o = r_e + target;
        let op3 = op3_minpower_q(&config, r_e, r_o, q_max);
        let equal = equal_pilot_baseline(&config, r_e, r_o, q_max);
        let op3_cell = match &op3 {
            Ok(sol) => sol.objective.to_string(),
            Err(_) => "NA".into(),
        };
        let equal_cell = match &equal {
            Some((_, total)) => total.to_string(),
            None => "NA".into(),
        };
        csv.push_str(&format!("{target},{op3_cell},{equal_cell}\n"));
    }
    csv
}

/// Minimum user rate achieved by the max-min allocator versus the equal and
/// fixed-proportion splits. When no cap is supplied, each point uses the
/// smallest cap both baselines honor, so all three columns share a feasible
/// comparison. Runs under a weak attack on a 0.4-decade spread: a per-user
/// rate floor above the eavesdropping cap is only reachable when even the
/// weakest user's statistical channel beats the eavesdropper's.
fn preset_fig7(r_e: Option<f64>, delta_o: f64) -> String {
    let rows: Vec<String> = FIG_PSNR_GRID_DB
        .par_iter()
        .map(|&psnr| {
            let config = presets::clustered_with_span(
                64,
                12,
                4,
                16,
                psnr,
                presets::DEFAULT_QSNR_DB,
                -20.0,
                0.4,
            );
            let model = compute_rho(&config);
            let p_tot = config.total_tx_power();
            let equal = config.with_tx_powers(&equal_power_allocation(&config, p_tot));
            let fixed = config.with_tx_powers(&fixed_proportion_allocation(&config, p_tot));
            let equal_min = min_user_rate(&equal, &model);
            let fixed_min = min_user_rate(&fixed, &model);
            let cap = r_e.unwrap_or_else(|| {
                let worst = max_eve_rate(&equal, &model).max(max_eve_rate(&fixed, &model));
                worst * (1.0 + 1e-9) + 1e-12
            });
            let op4 =
                op4_maxmin_p(&config, &model, cap, p_tot, delta_o, SearchStrategy::Bisection);
            let op4_cell = match &op4 {
                Ok(sol) => sol.r_o.to_string(),
                Err(OptimizeError::InfeasibleAtStart) | Err(OptimizeError::Infeasible) => {
                    "NA".into()
                }
            };
            format!("{psnr},{op4_cell},{equal_min},{fixed_min}\n")
        })
        .collect();
    let mut csv = String::from("psnr_db,op4_min_rate,equal_min_rate,fixed_proportion_min_rate\n");
    rows.into_iter().for_each(|r| csv.push_str(&r));
    csv
}
