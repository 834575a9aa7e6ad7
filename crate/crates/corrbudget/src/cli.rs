//! The `plan | fig2 | fit | verify` batch front end.
//!
//! Exit codes are a stable contract: 0 success, 1 usage/IO/failed checks,
//! 2 vacuous bound (plan still emitted), 3 non-decaying fit.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use corrbudget_core::{
    fit_exponential, plan, BudgetRequest, CorrelationModel, ExponentialModel, FitError,
    PlanMode, SampleSet, TabulatedModel,
};

use crate::io::{self, fmt_real};
use crate::verifier::{
    check_bound, check_chain, cq_trace_distance, dpi_property, gamma_map, ideal_state,
    overlap_by_formula, random_cq_state, random_density, SourceSpec,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VACUOUS: i32 = 2;
pub const EXIT_NON_DECAYING: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "corrbudget",
    about = "Correlation-budget planning and exact verification for QKD sources"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute l_e, the trace-distance budget d, and the adjusted
    /// security parameter for one source.
    Plan(PlanArgs),
    /// Sweep l_e over a grid of N for several decay rates; emits CSV.
    Fig2(Fig2Args),
    /// Fit (epsilon_1, C) to measured correlation data.
    Fit(FitArgs),
    /// Run the randomized exact-verification campaigns.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Default)]
struct PlanArgs {
    /// Flat key=value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of emitted signals.
    #[arg(long)]
    n: Option<f64>,
    /// Security parameter of the bounded-length proof.
    #[arg(long)]
    eps_sec: Option<f64>,
    /// Nearest-neighbour correlation magnitude (exponential model).
    #[arg(long)]
    epsilon1: Option<f64>,
    /// Decay rate C (exponential model).
    #[arg(long)]
    decay_c: Option<f64>,
    /// Tabulated model: CSV with columns l,epsilon_l.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Desired trace-distance budget (solves for l_e; exponential only).
    #[arg(long)]
    target_d: Option<f64>,
    /// Fixed effective correlation length (any model).
    #[arg(long)]
    fixed_le: Option<u64>,
    /// Write the CSV row here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Fig2Args {
    /// Comma-separated decay rates.
    #[arg(long, default_value = "0.1,0.2,0.5,1,2")]
    c_list: String,
    #[arg(long, default_value_t = 1e6)]
    n_min: f64,
    #[arg(long, default_value_t = 1e12)]
    n_max: f64,
    #[arg(long, default_value_t = 2)]
    points_per_decade: u32,
    #[arg(long, default_value_t = 1e-3)]
    epsilon1: f64,
    #[arg(long, default_value_t = 1e-10)]
    target_d: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// CSV with columns l,epsilon_l.
    csv: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Randomized instances per campaign.
    #[arg(long, default_value_t = 100)]
    instances: u64,
    #[arg(long, default_value_t = 6)]
    max_n: u64,
    #[arg(long, default_value_t = 3)]
    max_j: usize,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Harness self-test hook: scales d_bound before the pass check.
    #[arg(long, hide = true, default_value_t = 1.0)]
    corrupt_bound_factor: f64,
}

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Plan(args) => cmd_plan(args),
        Command::Fig2(args) => cmd_fig2(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn fail(message: impl std::fmt::Display) -> i32 {
    eprintln!("error: {message}");
    EXIT_USAGE
}

fn write_or_print(output: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match output {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| format!("writing {}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Resolved plan configuration: config file first, flags win.
struct PlanConfig {
    n: u64,
    eps_sec: f64,
    model: CorrelationModel,
    mode: PlanMode,
    output: Option<PathBuf>,
}

fn resolve_plan_config(mut args: PlanArgs) -> Result<PlanConfig, String> {
    if let Some(path) = &args.config {
        let pairs = io::load_config(path).map_err(|e| e.to_string())?;
        for (key, value) in pairs {
            let parse_f64 = |v: &str| {
                v.parse::<f64>()
                    .map_err(|e| format!("config field `{key}`: {e}"))
            };
            match key.as_str() {
                "N" => {
                    if args.n.is_none() {
                        args.n = Some(parse_f64(&value)?);
                    }
                }
                "eps_sec" => {
                    if args.eps_sec.is_none() {
                        args.eps_sec = Some(parse_f64(&value)?);
                    }
                }
                "epsilon1" => {
                    if args.epsilon1.is_none() {
                        args.epsilon1 = Some(parse_f64(&value)?);
                    }
                }
                "decay_C" => {
                    if args.decay_c.is_none() {
                        args.decay_c = Some(parse_f64(&value)?);
                    }
                }
                "table" => {
                    if args.table.is_none() {
                        args.table = Some(PathBuf::from(value));
                    }
                }
                "target_d" => {
                    if args.target_d.is_none() {
                        args.target_d = Some(parse_f64(&value)?);
                    }
                }
                "fixed_le" => {
                    if args.fixed_le.is_none() {
                        args.fixed_le = Some(
                            value
                                .parse()
                                .map_err(|e| format!("config field `fixed_le`: {e}"))?,
                        );
                    }
                }
                "output" => {
                    if args.output.is_none() {
                        args.output = Some(PathBuf::from(value));
                    }
                }
                other => return Err(format!("unknown config field `{other}`")),
            }
        }
    }

    let n_raw = args.n.ok_or("missing field `N`")?;
    if !(n_raw >= 1.0 && n_raw.fract() == 0.0 && n_raw <= u64::MAX as f64) {
        return Err(format!("field `N` must be a positive integer, got {n_raw}"));
    }
    let eps_sec = args.eps_sec.ok_or("missing field `eps_sec`")?;

    let model = match (&args.epsilon1, &args.decay_c, &args.table) {
        (Some(e1), Some(c), None) => CorrelationModel::Exponential(
            ExponentialModel::new(*e1, *c).map_err(|e| e.to_string())?,
        ),
        (None, None, Some(path)) => CorrelationModel::Tabulated(
            TabulatedModel::new(io::load_epsilon_csv(path).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?,
        ),
        _ => {
            return Err(
                "model must be either inline exponential (`epsilon1` + `decay_C`) \
                 or a `table` CSV, not both or neither"
                    .into(),
            )
        }
    };

    let mode = match (args.target_d, args.fixed_le) {
        (Some(d), None) => PlanMode::TargetD(d),
        (None, Some(l_e)) => PlanMode::FixedLe(l_e),
        _ => return Err("exactly one of `target_d` / `fixed_le` must be given".into()),
    };

    Ok(PlanConfig {
        n: n_raw as u64,
        eps_sec,
        model,
        mode,
        output: args.output,
    })
}

fn cmd_plan(args: PlanArgs) -> i32 {
    let config = match resolve_plan_config(args) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let request = BudgetRequest {
        n: config.n,
        model: config.model,
        mode: config.mode,
        eps_sec: config.eps_sec,
    };
    let result = match plan(&request) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    print!("{}", io::plan_record(&result));
    println!(
        "apply the bounded-length proof with l_c = {} and increase its security \
         parameter {} by 2d = {}: the key is {}-secure",
        result.l_e,
        fmt_real(result.eps_sec),
        fmt_real(2.0 * result.d),
        fmt_real(result.eps_total)
    );
    if let Err(e) = write_or_print(&config.output, &io::plan_csv(&result)) {
        return fail(e);
    }
    if result.vacuous {
        eprintln!(
            "WARNING: the raw bound reached 1; this plan certifies nothing. \
             Increase l_e or reduce N."
        );
        return EXIT_VACUOUS;
    }
    if result.eps_total >= 1.0 {
        eprintln!("WARNING: eps_total >= 1; no security claim survives this budget.");
    }
    EXIT_OK
}

/// Log-spaced integer grid between `n_min` and `n_max` inclusive.
fn log_grid(n_min: f64, n_max: f64, points_per_decade: u32) -> Result<Vec<u64>, String> {
    if !(n_min >= 1.0 && n_max >= n_min && points_per_decade >= 1) {
        return Err("need 1 <= n_min <= n_max and points_per_decade >= 1".into());
    }
    let (lo, hi) = (n_min.log10(), n_max.log10());
    let steps = ((hi - lo) * points_per_decade as f64).ceil() as u64;
    let mut grid = Vec::new();
    for i in 0..=steps {
        let e = (lo + i as f64 / points_per_decade as f64).min(hi);
        let n = 10f64.powf(e).round() as u64;
        if grid.last() != Some(&n) {
            grid.push(n);
        }
    }
    let n_max_int = n_max.round() as u64;
    if grid.last() != Some(&n_max_int) {
        grid.push(n_max_int);
    }
    if grid.is_empty() {
        return Err("empty N grid".into());
    }
    Ok(grid)
}

fn cmd_fig2(args: Fig2Args) -> i32 {
    let c_tokens: Vec<&str> = args
        .c_list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if c_tokens.is_empty() {
        return fail("empty C list");
    }
    let grid = match log_grid(args.n_min, args.n_max, args.points_per_decade) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let mut csv = String::from("C,N,l_e\n");
    for token in c_tokens {
        let c: f64 = match token.parse() {
            Ok(v) => v,
            Err(e) => return fail(format!("bad C value `{token}`: {e}")),
        };
        let model = match ExponentialModel::new(args.epsilon1, c) {
            Ok(m) => m,
            Err(e) => return fail(e),
        };
        let curve = match corrbudget_core::fig2_curve(&model, args.target_d, &grid) {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        for (n, l_e) in curve.points {
            csv.push_str(&format!("{token},{n},{l_e}\n"));
        }
    }
    match write_or_print(&args.output, &csv) {
        Ok(()) => EXIT_OK,
        Err(e) => fail(e),
    }
}

fn cmd_fit(args: FitArgs) -> i32 {
    let eps = match io::load_epsilon_csv(&args.csv) {
        Ok(e) => e,
        Err(e) => return fail(e),
    };
    let samples: Vec<(u64, f64)> = eps
        .iter()
        .enumerate()
        .map(|(i, &v)| ((i + 1) as u64, v))
        .collect();
    let set = match SampleSet::new(samples) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    match fit_exponential(&set) {
        Ok(fit) => {
            let record = io::fit_record(&fit);
            print!("{record}");
            if let Some(path) = &args.output {
                if let Err(e) = std::fs::write(path, &record) {
                    return fail(format!("writing {}: {e}", path.display()));
                }
            }
            EXIT_OK
        }
        Err(FitError::NonDecaying { fitted_c }) => {
            eprintln!(
                "error: fitted C = {} is not positive; the data does not decay. \
                 Use a tabulated model (`plan --table ... --fixed-le ...`) instead.",
                fmt_real(fitted_c)
            );
            EXIT_NON_DECAYING
        }
        Err(e) => fail(e),
    }
}

struct VerifyRow {
    check: &'static str,
    index: u64,
    j: usize,
    n: u64,
    l_e: u64,
    lhs: f64,
    rhs: f64,
    pass: bool,
}

impl VerifyRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}\n",
            self.check,
            self.index,
            self.j,
            self.n,
            self.l_e,
            fmt_real(self.lhs),
            fmt_real(self.rhs),
            fmt_real(self.rhs - self.lhs),
            self.pass
        )
    }
}

fn cmd_verify(args: VerifyArgs) -> i32 {
    if args.instances == 0 {
        return fail("empty campaign: --instances must be >= 1");
    }
    if !(2..=8).contains(&args.max_n) || !(2..=4).contains(&args.max_j) {
        return fail("need 2 <= max_n <= 8 and 2 <= max_j <= 4");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut rows: Vec<VerifyRow> = Vec::new();

    // Bound, chain, and phase-prescription campaign.
    for index in 0..args.instances {
        let (j, n) = loop {
            let j = rng.random_range(2..=args.max_j);
            let n = rng.random_range(2..=args.max_n);
            if (2 * j as u128).pow(n as u32) <= 1 << 21 {
                break (j, n);
            }
        };
        let l_e = rng.random_range(0..n);
        let eps: Vec<f64> = (0..n)
            .map(|l| {
                if l == n - 1 {
                    0.0 // separation N never occurs in a length-N run
                } else {
                    let lo: f64 = 1e-6;
                    let hi: f64 = 0.25;
                    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
                }
            })
            .collect();
        let model = match TabulatedModel::new(eps).map(CorrelationModel::from) {
            Ok(m) => m,
            Err(e) => return fail(e),
        };
        let spec = match SourceSpec::from_model(&model, j, n) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        let spec = if index % 3 == 2 {
            spec.with_phase_kick(0.1 + rng.random::<f64>() * 1.4)
        } else {
            spec
        };

        let bound = match check_bound(&spec, &model, n, l_e) {
            Ok(b) => b,
            Err(e) => return fail(e),
        };
        let d_checked = bound.d_bound * args.corrupt_bound_factor;
        rows.push(VerifyRow {
            check: "bound",
            index,
            j,
            n,
            l_e,
            lhs: bound.t_exact,
            rhs: d_checked,
            pass: bound.t_exact <= d_checked + 1e-10,
        });

        if l_e + 2 <= n {
            let k = rng.random_range(l_e + 2..=n);
            let history: Vec<usize> =
                (0..k - 1).map(|_| rng.random_range(0..j)).collect();
            let j_current = rng.random_range(0..j);
            match check_chain(&spec, n, l_e, k, j_current, &history) {
                Ok(report) => rows.push(VerifyRow {
                    check: "chain",
                    index,
                    j,
                    n,
                    l_e,
                    lhs: report.global_floor_factor_count,
                    rhs: report.global_overlap,
                    pass: report.pass(),
                }),
                Err(e) => return fail(e),
            }
        }

        match (crate::verifier::build_states(&spec, n, l_e), overlap_by_formula(&spec, n, l_e)) {
            (Ok(pair), Ok(formula)) => {
                let dense = pair.overlap();
                rows.push(VerifyRow {
                    check: "phase",
                    index,
                    j,
                    n,
                    l_e,
                    lhs: dense,
                    rhs: formula,
                    pass: (dense - formula).abs() <= 1e-10,
                });
            }
            (Err(e), _) | (_, Err(e)) => return fail(e),
        }
    }

    // Key-swap channel campaign.
    let gamma_instances = args.instances.min(100);
    for index in 0..gamma_instances {
        let eve_dim = rng.random_range(2..=4usize);
        let a = random_cq_state(eve_dim, &mut rng);
        let b = random_cq_state(eve_dim, &mut rng);
        let (ga, gb) = match (gamma_map(&a), gamma_map(&b)) {
            (Ok(x), Ok(y)) => (x, y),
            (Err(e), _) | (_, Err(e)) => return fail(e),
        };
        let checks = (|| -> Result<(f64, f64, f64, f64), crate::verifier::VerifierError> {
            let trace_drift = (ga.total_weight() - 1.0).abs();
            let idem = cq_trace_distance(&ga, &gamma_map(&ga)?)?;
            let direct = cq_trace_distance(&ga, &ideal_state(&a)?)?;
            let contraction =
                cq_trace_distance(&ga, &gb)? - cq_trace_distance(&a, &b)?;
            Ok((trace_drift, idem, direct, contraction))
        })();
        let (trace_drift, idem, direct, contraction) = match checks {
            Ok(v) => v,
            Err(e) => return fail(e),
        };
        let worst = trace_drift.max(idem).max(direct);
        rows.push(VerifyRow {
            check: "gamma",
            index,
            j: 0,
            n: 0,
            l_e: 0,
            lhs: worst,
            rhs: contraction,
            pass: worst <= 1e-12 && contraction <= 1e-10,
        });
    }

    // Data-processing campaign.
    for index in 0..args.instances {
        let dim = rng.random_range(2..=8usize);
        let rho = random_density(dim, &mut rng);
        let sigma = random_density(dim, &mut rng);
        let check = match dpi_property(&rho, &sigma, args.seed.wrapping_add(index)) {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        rows.push(VerifyRow {
            check: "dpi",
            index,
            j: 0,
            n: dim as u64,
            l_e: 0,
            lhs: check.after,
            rhs: check.before,
            pass: check.pass,
        });
    }

    let mut csv = String::from("check,index,J,N,l_e,lhs,rhs,margin,pass\n");
    for row in &rows {
        csv.push_str(&row.csv_line());
    }
    if let Err(e) = write_or_print(&args.output, &csv) {
        return fail(e);
    }
    let failures = rows.iter().filter(|r| !r.pass).count();
    if failures > 0 {
        eprintln!("{failures} of {} checks failed", rows.len());
        return EXIT_USAGE;
    }
    EXIT_OK
}
