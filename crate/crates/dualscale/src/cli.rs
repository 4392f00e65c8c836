//! The four user-facing commands — `optimize`, `sweep`, `validate`,
//! `baselines` — plus argument parsing and exit-code policy.
//!
//! Commands are plain functions over file paths so they can be driven
//! in-process (tests call them directly) or from the binary via [`run`].
//! All outputs are byte-deterministic given the scenario file and seed:
//! results as JSON, sweeps as CSV ordered by axis value.
//!
//! Exit codes: `0` success, `1` usage or input errors, `2` infeasible
//! sensing (no duration inside the subframe meets the accuracy targets),
//! `3` Monte-Carlo validation breach.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::montecarlo::{verify_sinr_formula, McReport, SINR_TOLERANCE};
use crate::numerics::RngStream;
use crate::optimizer::{
    allocate_blocks, baseline_rba_with, baseline_with, optimize_with, BaselineKind, SearchResult,
};
use crate::rate::{FramePlan, SubframeEvaluator, SystemModel};
use crate::scenario::{deg2_to_rad2, load_scenario, Scenario};
use crate::sensing::{min_sensing_time, MinSensingTime, UserLargeScale};
use crate::{Error, Result};

/// Maps an error to the process exit code documented at the module level.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::InfeasibleSensing { .. } => 2,
        _ => 1,
    }
}

/// Axis of a [`cmd_sweep`] run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Sensing-accuracy targets in squared degrees; every row re-optimizes
    /// the schedule and evaluates the three reference policies.
    Gamma,
    /// Update counts at the scenario's optimized sensing duration.
    M,
    /// Whole-block sensing durations at a fixed update count.
    Tl,
}

fn load(scenario: Option<&Path>) -> Result<Scenario> {
    match scenario {
        Some(path) => load_scenario(path),
        None => Ok(Scenario::default()),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::Internal(format!("result serialization failed: {e}")))
}

fn scenario_min_time(system: &SystemModel, gammas: &[f64]) -> Result<MinSensingTime> {
    let larges: Vec<UserLargeScale> = system.users.iter().map(|u| u.large.clone()).collect();
    let budget = system.frame.n_blocks as f64 * system.frame.t_b;
    min_sensing_time(&larges, gammas, budget)
}

#[derive(Serialize)]
struct PlanOut {
    #[serde(rename = "T_l_us")]
    t_l_us: f64,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N_m")]
    n_m: Vec<u32>,
}

impl PlanOut {
    fn from_plan(plan: &FramePlan) -> Self {
        PlanOut {
            t_l_us: plan.t_l,
            m: plan.updates(),
            n_m: plan.n_m.clone(),
        }
    }
}

#[derive(Serialize)]
struct TraceOut {
    h: u32,
    #[serde(rename = "M")]
    m: u32,
    #[serde(rename = "T_r_us")]
    t_r_us: f64,
    #[serde(rename = "rate_bitHz")]
    rate_bit_hz: f64,
}

#[derive(Serialize)]
struct OptimizeOut {
    plan: PlanOut,
    #[serde(rename = "rate_bitHz")]
    rate_bit_hz: f64,
    #[serde(rename = "mean_se_bpsHz")]
    mean_se_bps_hz: f64,
    #[serde(rename = "T_l_min_us")]
    t_l_min_us: f64,
    trace: Vec<TraceOut>,
}

/// Searches the full `(T_l, M, N_m)` schedule space of `scenario` (the
/// built-in default when `None`) and writes the optimum, the per-candidate
/// search trace, and the minimum feasible sensing duration as JSON.
pub fn cmd_optimize(scenario: Option<&Path>, out: &Path, _seed: Option<u64>) -> Result<i32> {
    let scenario = load(scenario)?;
    let system = scenario.system()?;
    let evaluator = SubframeEvaluator::new(system)?;
    let t_min = scenario_min_time(evaluator.system(), &scenario.gammas)?;
    let result = optimize_with(&evaluator, &scenario.gammas)?;
    let report = OptimizeOut {
        plan: PlanOut::from_plan(&result.plan),
        rate_bit_hz: result.rate,
        mean_se_bps_hz: result.rate / (scenario.n_blocks as f64 * scenario.t_b()),
        t_l_min_us: t_min.time,
        trace: result
            .trace
            .iter()
            .map(|p| TraceOut {
                h: p.h,
                m: p.m,
                t_r_us: p.t_r,
                rate_bit_hz: p.rate,
            })
            .collect(),
    };
    write_text(out, &to_json(&report)?)?;
    Ok(0)
}

fn check_values(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Argument(
            "at least one sweep value is required".into(),
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("sweep values must be finite".into()));
    }
    for pair in values.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::Argument(format!(
                "sweep values must be strictly increasing, got {} after {}",
                pair[1], pair[0]
            )));
        }
    }
    Ok(())
}

fn integer_values(values: &[f64], axis: &str) -> Result<Vec<u32>> {
    values
        .iter()
        .map(|&v| {
            if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
                Err(Error::Argument(format!(
                    "{axis} sweep values must be nonnegative integers, got {v}"
                )))
            } else {
                Ok(v as u32)
            }
        })
        .collect()
}

/// Evaluates the schedule along one axis and writes a CSV ordered by axis
/// value.
///
/// * [`SweepAxis::Gamma`] — header `axis_value,proposed,ssu,fsu,rba_mean`;
///   values are shared accuracy targets in squared degrees, each row runs
///   the full optimization plus the three reference policies (the RBA
///   column is the 50-draw mean).
/// * [`SweepAxis::M`] — header `axis_value,rate`; values are update counts
///   evaluated at the scenario's own optimized sensing duration with the
///   near-equal block partition. Counts exceeding the available
///   transmission blocks are skipped.
/// * [`SweepAxis::Tl`] — header `axis_value,rate`; values are whole-block
///   sensing durations (`T_l = b·T_b` exactly) at the fixed update count
///   `fixed_m`, which this axis requires. Infeasible rows — durations below
///   the minimum feasible sensing time, or too few remaining blocks — are
///   skipped.
pub fn cmd_sweep(
    scenario: Option<&Path>,
    out: &Path,
    axis: SweepAxis,
    values: &[f64],
    fixed_m: Option<u32>,
    seed: Option<u64>,
) -> Result<i32> {
    check_values(values)?;
    if axis != SweepAxis::Tl && fixed_m.is_some() {
        return Err(Error::Argument(
            "--fixed-m only applies to the Tl axis".into(),
        ));
    }
    let scenario = load(scenario)?;
    let seed = seed.unwrap_or(scenario.seed);
    let system = scenario.system()?;
    let evaluator = SubframeEvaluator::new(system)?;
    let mut csv = String::new();

    match axis {
        SweepAxis::Gamma => {
            csv.push_str("axis_value,proposed,ssu,fsu,rba_mean\n");
            let mut rng = RngStream::new(seed, 0);
            for &gamma_deg2 in values {
                if !(gamma_deg2 > 0.0) {
                    return Err(Error::Argument(format!(
                        "accuracy targets must be positive, got {gamma_deg2}"
                    )));
                }
                let gammas = vec![deg2_to_rad2(gamma_deg2); scenario.users.len()];
                let proposed = optimize_with(&evaluator, &gammas)?;
                let ssu = baseline_with(&evaluator, &gammas, BaselineKind::Ssu, &mut rng)?;
                let fsu = baseline_with(&evaluator, &gammas, BaselineKind::Fsu, &mut rng)?;
                let rba = baseline_rba_with(&evaluator, &gammas, &mut rng)?;
                writeln!(
                    csv,
                    "{gamma_deg2},{},{},{},{}",
                    proposed.rate, ssu.rate, fsu.rate, rba.mean
                )
                .expect("string writes cannot fail");
            }
        }
        SweepAxis::M => {
            csv.push_str("axis_value,rate\n");
            let counts = integer_values(values, "M")?;
            if counts.contains(&0) {
                return Err(Error::Argument("update counts must be at least 1".into()));
            }
            let star = optimize_with(&evaluator, &scenario.gammas)?;
            let (h, _) = star.plan.sensing_split(scenario.t_b());
            let n_t = scenario.n_blocks - h;
            for &m in &counts {
                if m > n_t {
                    continue;
                }
                let plan = FramePlan {
                    t_l: star.plan.t_l,
                    n_m: allocate_blocks(n_t, m)?,
                };
                let rate = evaluator.evaluate(&plan)?;
                writeln!(csv, "{m},{rate}").expect("string writes cannot fail");
            }
        }
        SweepAxis::Tl => {
            csv.push_str("axis_value,rate\n");
            let blocks = integer_values(values, "Tl")?;
            let m = fixed_m
                .ok_or_else(|| Error::Argument("the Tl axis needs --fixed-m <updates>".into()))?;
            if m == 0 {
                return Err(Error::Argument("--fixed-m must be at least 1".into()));
            }
            let t_min = scenario_min_time(evaluator.system(), &scenario.gammas)?;
            let t_b = scenario.t_b();
            for &b in &blocks {
                if b >= scenario.n_blocks {
                    continue;
                }
                let n_t = scenario.n_blocks - b;
                let t_l = b as f64 * t_b;
                if t_l < t_min.time || m > n_t {
                    continue;
                }
                let plan = FramePlan {
                    t_l,
                    n_m: allocate_blocks(n_t, m)?,
                };
                let rate = evaluator.evaluate(&plan)?;
                writeln!(csv, "{b},{rate}").expect("string writes cannot fail");
            }
        }
    }
    write_text(out, &csv)?;
    Ok(0)
}

#[derive(Serialize)]
struct ComplexOut {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct ReportOut {
    user: usize,
    aging_index: u32,
    samples: usize,
    signal_mean: ComplexOut,
    signal_analytical: f64,
    second_moments: Vec<f64>,
    second_moments_analytical: Vec<f64>,
    beam_gain_variance: f64,
    empirical_sinr: f64,
    analytical_sinr: f64,
    relative_error: f64,
    pass: bool,
}

impl ReportOut {
    fn from_report(r: &McReport) -> Self {
        ReportOut {
            user: r.user,
            aging_index: r.aging_index,
            samples: r.samples,
            signal_mean: ComplexOut {
                re: r.signal_mean.re,
                im: r.signal_mean.im,
            },
            signal_analytical: r.signal_analytical,
            second_moments: r.second_moments.clone(),
            second_moments_analytical: r.second_moments_analytical.clone(),
            beam_gain_variance: r.beam_gain_variance,
            empirical_sinr: r.empirical_sinr,
            analytical_sinr: r.analytical_sinr,
            relative_error: r.relative_error,
            pass: !r.exceeds(SINR_TOLERANCE),
        }
    }
}

#[derive(Serialize)]
struct ValidateOut {
    plan: PlanOut,
    samples: usize,
    tolerance: f64,
    pass: bool,
    reports: Vec<ReportOut>,
}

/// Monte-Carlo check of the closed-form SINR on the scenario's optimized
/// plan: simulates every user at the shallow, middle, and deep aging
/// indices and writes all reports as JSON.
///
/// Returns exit code 0 when every relative error is within 5%, 3 when any
/// `(user, aging index)` pair breaches (the pairs are also listed on
/// stderr). `samples` below 10^4 are refused.
pub fn cmd_validate(
    scenario: Option<&Path>,
    out: &Path,
    samples: usize,
    seed: Option<u64>,
) -> Result<i32> {
    if samples < 10_000 {
        return Err(Error::Argument(format!(
            "at least 10000 samples are required for a meaningful check, got {samples}"
        )));
    }
    let scenario = load(scenario)?;
    let seed = seed.unwrap_or(scenario.seed);
    let system = scenario.system()?;
    let evaluator = SubframeEvaluator::new(system)?;
    let star = optimize_with(&evaluator, &scenario.gammas)?;
    let mut rng = RngStream::new(seed, 0);
    let reports = verify_sinr_formula(evaluator.system(), &star.plan, samples, &mut rng)?;
    let failing: Vec<(usize, u32)> = reports
        .iter()
        .filter(|r| r.exceeds(SINR_TOLERANCE))
        .map(|r| (r.user, r.aging_index))
        .collect();
    let report = ValidateOut {
        plan: PlanOut::from_plan(&star.plan),
        samples,
        tolerance: SINR_TOLERANCE,
        pass: failing.is_empty(),
        reports: reports.iter().map(ReportOut::from_report).collect(),
    };
    write_text(out, &to_json(&report)?)?;
    if failing.is_empty() {
        Ok(0)
    } else {
        let pairs: Vec<String> = failing
            .iter()
            .map(|(k, n)| format!("(user {k}, aging index {n})"))
            .collect();
        eprintln!(
            "relative SINR error above {:.0}% at {}",
            SINR_TOLERANCE * 100.0,
            pairs.join(", ")
        );
        Ok(3)
    }
}

#[derive(Serialize)]
struct PolicyOut {
    plan: PlanOut,
    #[serde(rename = "rate_bitHz")]
    rate_bit_hz: f64,
    /// `(proposed - this) / this`.
    relative_gap: f64,
}

#[derive(Serialize)]
struct RbaOut {
    best_plan: PlanOut,
    #[serde(rename = "mean_rate_bitHz")]
    mean_rate_bit_hz: f64,
    #[serde(rename = "per_seed_rate_bitHz")]
    per_seed_rate_bit_hz: Vec<f64>,
    /// `(proposed - mean) / mean`.
    relative_gap: f64,
}

#[derive(Serialize)]
struct ProposedOut {
    plan: PlanOut,
    #[serde(rename = "rate_bitHz")]
    rate_bit_hz: f64,
}

#[derive(Serialize)]
struct BaselinesOut {
    proposed: ProposedOut,
    ssu: PolicyOut,
    fsu: PolicyOut,
    rba: RbaOut,
}

fn policy_out(result: &SearchResult, proposed_rate: f64) -> PolicyOut {
    PolicyOut {
        plan: PlanOut::from_plan(&result.plan),
        rate_bit_hz: result.rate,
        relative_gap: (proposed_rate - result.rate) / result.rate,
    }
}

/// Runs the proposed optimization and the three reference policies
/// (single-update, every-block-update, and the 50-draw random block
/// allocation) and writes a JSON comparison table with relative gaps.
pub fn cmd_baselines(scenario: Option<&Path>, out: &Path, seed: Option<u64>) -> Result<i32> {
    let scenario = load(scenario)?;
    let seed = seed.unwrap_or(scenario.seed);
    let system = scenario.system()?;
    let evaluator = SubframeEvaluator::new(system)?;
    let mut rng = RngStream::new(seed, 0);
    let proposed = optimize_with(&evaluator, &scenario.gammas)?;
    let ssu = baseline_with(&evaluator, &scenario.gammas, BaselineKind::Ssu, &mut rng)?;
    let fsu = baseline_with(&evaluator, &scenario.gammas, BaselineKind::Fsu, &mut rng)?;
    let rba = baseline_rba_with(&evaluator, &scenario.gammas, &mut rng)?;
    let report = BaselinesOut {
        proposed: ProposedOut {
            plan: PlanOut::from_plan(&proposed.plan),
            rate_bit_hz: proposed.rate,
        },
        ssu: policy_out(&ssu, proposed.rate),
        fsu: policy_out(&fsu, proposed.rate),
        rba: RbaOut {
            best_plan: PlanOut::from_plan(&rba.best.plan),
            mean_rate_bit_hz: rba.mean,
            per_seed_rate_bit_hz: rba.per_seed.clone(),
            relative_gap: (proposed.rate - rba.mean) / rba.mean,
        },
    };
    write_text(out, &to_json(&report)?)?;
    Ok(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AxisArg {
    /// Accuracy-target sweep; values in squared degrees.
    #[value(name = "gamma")]
    Gamma,
    /// Update-count sweep at the optimized sensing duration.
    #[value(name = "M", alias = "m")]
    M,
    /// Whole-block sensing-duration sweep at a fixed update count.
    #[value(name = "Tl", alias = "tl")]
    Tl,
}

impl From<AxisArg> for SweepAxis {
    fn from(axis: AxisArg) -> Self {
        match axis {
            AxisArg::Gamma => SweepAxis::Gamma,
            AxisArg::M => SweepAxis::M,
            AxisArg::Tl => SweepAxis::Tl,
        }
    }
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario JSON file; the built-in default scenario when omitted.
    #[arg(long, value_name = "path")]
    scenario: Option<PathBuf>,
    /// Path the result file is written to.
    #[arg(long, value_name = "path")]
    out: PathBuf,
    /// Override the scenario's base seed.
    #[arg(long, value_name = "u64")]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search the schedule space and write the optimum as JSON.
    Optimize(Common),
    /// Evaluate schedules along an axis and write a CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Sweep axis.
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// Comma-separated, strictly increasing axis values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Fixed number of small-scale updates (Tl axis only).
        #[arg(long = "fixed-m", value_name = "updates")]
        fixed_m: Option<u32>,
    },
    /// Check the closed-form SINR by simulation and write the reports as
    /// JSON.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Monte-Carlo draws per (user, aging-index) pair.
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
    },
    /// Compare the proposal against the reference policies; write JSON.
    Baselines(Common),
}

#[derive(Debug, Parser)]
#[command(
    name = "dualscale",
    version,
    about = "Subframe scheduling for sensing-assisted communication"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Optimize(c) => cmd_optimize(c.scenario.as_deref(), &c.out, c.seed),
        Command::Sweep {
            common,
            axis,
            values,
            fixed_m,
        } => cmd_sweep(
            common.scenario.as_deref(),
            &common.out,
            axis.into(),
            &values,
            fixed_m,
            common.seed,
        ),
        Command::Validate { common, samples } => cmd_validate(
            common.scenario.as_deref(),
            &common.out,
            samples,
            common.seed,
        ),
        Command::Baselines(c) => cmd_baselines(c.scenario.as_deref(), &c.out, c.seed),
    }
}

/// Parses `args` (including the program name) and runs the selected
/// command, returning the process exit code.
pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests print to stdout and succeed; real
            // usage errors are exit code 1.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// [`run_with`] on the process arguments.
pub fn run() -> i32 {
    run_with(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate::frame_rate;
    use serde_json::Value;
    use std::fs;

    fn tmp(name: &str) -> PathBuf {
        std::env::temp_dir().join(format!("dualscale-cli-{}-{name}", std::process::id()))
    }

    fn read(path: &Path) -> String {
        fs::read_to_string(path).unwrap()
    }

    #[test]
    fn optimize_writes_a_valid_deterministic_report() {
        let out = tmp("optimize.json");
        assert_eq!(cmd_optimize(None, &out, None).unwrap(), 0);
        let text = read(&out);
        let v: Value = serde_json::from_str(&text).unwrap();

        let plan_t_l = v["plan"]["T_l_us"].as_f64().unwrap();
        let m = v["plan"]["M"].as_u64().unwrap();
        let n_m: Vec<u32> = v["plan"]["N_m"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_u64().unwrap() as u32)
            .collect();
        assert_eq!(m as usize, n_m.len());
        assert_eq!(m, 11);
        assert!((plan_t_l - 244.995).abs() < 0.05, "T_l {plan_t_l}");

        let rate = v["rate_bitHz"].as_f64().unwrap();
        assert!((rate - 9239.44).abs() < 0.05);
        let mean_se = v["mean_se_bpsHz"].as_f64().unwrap();
        assert!((mean_se - rate / 2450.0).abs() < 1e-12);
        let t_min = v["T_l_min_us"].as_f64().unwrap();
        assert!((t_min - 244.995).abs() < 0.5);
        assert_eq!(v["trace"].as_array().unwrap().len(), 528);

        // The emitted plan re-validates against the frame invariants.
        let scenario = Scenario::default();
        let plan = FramePlan { t_l: plan_t_l, n_m };
        plan.validate(&scenario.system().unwrap().frame).unwrap();

        // Byte-identical on repetition.
        let again = tmp("optimize-again.json");
        assert_eq!(cmd_optimize(None, &again, None).unwrap(), 0);
        assert_eq!(text, read(&again));
    }

    #[test]
    fn optimize_reports_unreachable_accuracy_as_exit_two() {
        let scn = tmp("tight.json");
        fs::write(&scn, r#"{"Gamma_deg2": 1e-12}"#).unwrap();
        let out = tmp("tight-out.json");
        let code = run_with([
            "dualscale",
            "optimize",
            "--scenario",
            scn.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 2);
        assert!(!out.exists());
    }

    #[test]
    fn usage_errors_exit_one() {
        let out = tmp("usage.json");
        let out = out.to_str().unwrap();
        // Unknown subcommand.
        assert_eq!(run_with(["dualscale", "frobnicate"]), 1);
        // Sample floor.
        assert_eq!(
            run_with(["dualscale", "validate", "--out", out, "--samples", "100"]),
            1
        );
        // Decreasing sweep values.
        assert_eq!(
            run_with([
                "dualscale",
                "sweep",
                "--out",
                out,
                "--axis",
                "gamma",
                "--values",
                "0.5,0.1"
            ]),
            1
        );
        // Tl axis without --fixed-m.
        assert_eq!(
            run_with([
                "dualscale",
                "sweep",
                "--out",
                out,
                "--axis",
                "Tl",
                "--values",
                "4,5,6"
            ]),
            1
        );
        // --fixed-m outside the Tl axis.
        assert_eq!(
            run_with([
                "dualscale",
                "sweep",
                "--out",
                out,
                "--axis",
                "gamma",
                "--values",
                "0.5",
                "--fixed-m",
                "7"
            ]),
            1
        );
        // Fractional update counts.
        assert_eq!(
            run_with([
                "dualscale",
                "sweep",
                "--out",
                out,
                "--axis",
                "M",
                "--values",
                "1.5,2.5"
            ]),
            1
        );
        // Help exits 0.
        assert_eq!(run_with(["dualscale", "--help"]), 0);
    }

    #[test]
    fn sweep_m_axis_matches_direct_evaluation_and_is_deterministic() {
        let out = tmp("sweep-m.csv");
        let values: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(
            cmd_sweep(None, &out, SweepAxis::M, &values, None, None).unwrap(),
            0
        );
        let text = read(&out);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "axis_value,rate");
        let rows: Vec<(u32, f64)> = lines
            .map(|l| {
                let (a, b) = l.split_once(',').unwrap();
                (a.parse().unwrap(), b.parse().unwrap())
            })
            .collect();
        assert_eq!(rows.len(), 20);
        assert_eq!(rows[0].0, 1);

        // Row M=7 equals a direct evaluation at the optimized duration.
        let scenario = Scenario::default();
        let system = scenario.system().unwrap();
        let star = crate::optimizer::optimize(&system, &scenario.gammas).unwrap();
        let (h, _) = star.plan.sensing_split(scenario.t_b());
        let plan = FramePlan {
            t_l: star.plan.t_l,
            n_m: allocate_blocks(scenario.n_blocks - h, 7).unwrap(),
        };
        let expected = frame_rate(&plan, &system).unwrap().total_rate;
        let got = rows[6].1;
        assert!(
            (got - expected).abs() <= 1e-9 * expected,
            "row {got} vs direct {expected}"
        );

        let again = tmp("sweep-m-again.csv");
        assert_eq!(
            cmd_sweep(None, &again, SweepAxis::M, &values, None, None).unwrap(),
            0
        );
        assert_eq!(text, read(&again));
    }

    #[test]
    fn sweep_tl_axis_skips_infeasible_rows() {
        let out = tmp("sweep-tl.csv");
        let values: Vec<f64> = (0..=35).map(f64::from).collect();
        assert_eq!(
            cmd_sweep(None, &out, SweepAxis::Tl, &values, Some(7), None).unwrap(),
            0
        );
        let text = read(&out);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "axis_value,rate");
        let rows: Vec<(u32, f64)> = lines
            .map(|l| {
                let (a, b) = l.split_once(',').unwrap();
                (a.parse().unwrap(), b.parse().unwrap())
            })
            .collect();
        // Feasibility starts at four whole blocks and ends when fewer than
        // seven transmission blocks remain: b in 4..=28.
        assert_eq!(rows.first().unwrap().0, 4);
        assert_eq!(rows.last().unwrap().0, 28);
        assert_eq!(rows.len(), 25);

        // The first row is the whole-block plan evaluated directly.
        let scenario = Scenario::default();
        let system = scenario.system().unwrap();
        let plan = FramePlan {
            t_l: 4.0 * scenario.t_b(),
            n_m: allocate_blocks(31, 7).unwrap(),
        };
        let expected = frame_rate(&plan, &system).unwrap().total_rate;
        assert!((rows[0].1 - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn sweep_gamma_axis_dominates_every_reference_policy() {
        let out = tmp("sweep-gamma.csv");
        assert_eq!(
            cmd_sweep(None, &out, SweepAxis::Gamma, &[0.5], None, None).unwrap(),
            0
        );
        let text = read(&out);
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "axis_value,proposed,ssu,fsu,rba_mean"
        );
        let row = lines.next().unwrap();
        let fields: Vec<f64> = row.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 5);
        let (axis, proposed, ssu, fsu, rba) =
            (fields[0], fields[1], fields[2], fields[3], fields[4]);
        assert_eq!(axis, 0.5);
        assert!((proposed - 9239.44).abs() < 0.05);
        assert!(proposed >= ssu && proposed >= fsu && proposed >= rba);
        assert!(lines.next().is_none());
    }

    #[test]
    fn baselines_report_compares_all_policies() {
        let out = tmp("baselines.json");
        assert_eq!(cmd_baselines(None, &out, None).unwrap(), 0);
        let v: Value = serde_json::from_str(&read(&out)).unwrap();
        let proposed = v["proposed"]["rate_bitHz"].as_f64().unwrap();
        let ssu = v["ssu"]["rate_bitHz"].as_f64().unwrap();
        let fsu = v["fsu"]["rate_bitHz"].as_f64().unwrap();
        let rba_mean = v["rba"]["mean_rate_bitHz"].as_f64().unwrap();
        assert!(proposed >= ssu && proposed >= fsu && proposed >= rba_mean);
        assert_eq!(v["ssu"]["plan"]["M"].as_u64().unwrap(), 1);

        let per_seed = v["rba"]["per_seed_rate_bitHz"].as_array().unwrap();
        assert_eq!(per_seed.len(), 50);
        let mean: f64 =
            per_seed.iter().map(|x| x.as_f64().unwrap()).sum::<f64>() / per_seed.len() as f64;
        assert!((mean - rba_mean).abs() <= 1e-9 * rba_mean);

        let gap = v["ssu"]["relative_gap"].as_f64().unwrap();
        assert!((gap - (proposed - ssu) / ssu).abs() < 1e-12);
        assert!(gap > 0.3, "single-update gap {gap}");
    }

    #[test]
    fn validate_passes_on_the_default_scenario() {
        let out = tmp("validate.json");
        let code = cmd_validate(None, &out, 200_000, None).unwrap();
        let v: Value = serde_json::from_str(&read(&out)).unwrap();
        assert_eq!(code, 0, "failing reports: {}", v["reports"]);
        assert!(v["pass"].as_bool().unwrap());
        let reports = v["reports"].as_array().unwrap();
        assert_eq!(reports.len(), 15);
        for r in reports {
            assert!(r["relative_error"].as_f64().unwrap() <= 0.05);
            assert!(r["pass"].as_bool().unwrap());
        }
    }

    #[test]
    fn validate_flags_a_noise_dominated_comparison_as_exit_three() {
        // With aggressive aging the deep-index SINR is orders of magnitude
        // below the Monte-Carlo noise floor at the minimum sample count, so
        // the comparison must report a breach rather than a silent pass.
        let scn = tmp("aged.json");
        fs::write(&scn, r#"{"temporal": {"exponential": {"rho_1": 0.05}}}"#).unwrap();
        let out = tmp("aged-out.json");
        let code = cmd_validate(Some(&scn), &out, 10_000, None).unwrap();
        assert_eq!(code, 3);
        let v: Value = serde_json::from_str(&read(&out)).unwrap();
        assert!(!v["pass"].as_bool().unwrap());
        assert!(v["reports"]
            .as_array()
            .unwrap()
            .iter()
            .any(|r| !r["pass"].as_bool().unwrap()));
    }
}
