use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rucb_core::bounds::{self, BoundParams};
use rucb_core::condorcet::{condorcet_subset_probability, total_ordering_probability_mc};
use rucb_core::posterior::{self, LemmaReport, PosteriorError};
use rucb_core::preference::{generate_cycle, generate_planted};
use rucb_core::{GapVector, PreferenceMatrix};
use rucb_harness::config::{log_spaced, ExperimentConfig};
use rucb_harness::experiment::{output_dir, run_experiment};
use rucb_harness::matrix_io::{self, MatrixFormat};
use rucb_harness::{emit_plot_data, BoundOverlay, HarnessError};

#[derive(Parser)]
#[command(name = "rucb", version, about = "Relative upper confidence bound dueling bandits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch experiment from a JSON config and write plot data.
    Run(RunArgs),
    /// Report Condorcet / Borda / ordering structure and sweep subset sizes.
    Analyze(AnalyzeArgs),
    /// Print theoretical regret bound curves as CSV.
    Bounds(BoundsArgs),
    /// Check the Beta-posterior identities and envelopes on a grid.
    VerifyLemmas(VerifyArgs),
    /// Write a synthetic preference matrix.
    GenMatrix(GenArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Add a high-probability bound column at this δ.
    #[arg(long, value_name = "DELTA")]
    overlay_high_prob: Option<f64>,
    /// Add the expected bound column (needs alpha > 1).
    #[arg(long)]
    overlay_expected: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Monte Carlo samples per subset size for the total-order column.
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the sweep CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Matrix whose Condorcet gaps are used.
    #[arg(long, conflicts_with = "gaps", required_unless_present = "gaps")]
    matrix: Option<PathBuf>,
    /// Gap vector, winner's entry 0, e.g. `0,0.2,0.1`.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    gaps: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1)]
    t_min: u64,
    #[arg(long, default_value_t = 1_000_000)]
    t_max: u64,
    #[arg(long, default_value_t = 50)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Largest n for the identity and sandwich.
    #[arg(long, default_value_t = 50)]
    n_max_estimate: u64,
    /// Largest n for the shrinkage and envelope checks.
    #[arg(long, default_value_t = 200)]
    n_max: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    kind: GenKind,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Defaults to the output file's extension, else CSV.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum GenKind {
    /// Arm 0 beats arm j with probability 1/2 + U[delta_min, delta_max].
    Planted {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        delta_min: f64,
        #[arg(long)]
        delta_max: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Cyclic tournament with no Condorcet winner.
    Cycle {
        #[arg(long)]
        k: usize,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), HarnessError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| HarnessError::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| HarnessError::Io {
                path: PathBuf::from("<stdout>"),
                source: e,
            }),
    }
}

fn cmd_run(a: RunArgs) -> Result<(), HarnessError> {
    let (cfg, base) = ExperimentConfig::load(&a.config)?;
    let mut overlays = Vec::new();
    if a.overlay_high_prob.is_some() || a.overlay_expected {
        let matrix = cfg.matrix.load(&base)?;
        let alpha = cfg
            .alpha
            .ok_or_else(|| HarnessError::Config("bound overlays need alpha".into()))?;
        let gaps = matrix.gaps()?;
        if let Some(d) = a.overlay_high_prob {
            overlays.push(BoundOverlay::HighProbability(BoundParams::new(alpha, d, gaps.clone())?));
        }
        if a.overlay_expected {
            let p = BoundParams::new(alpha, 0.05, gaps)?;
            bounds::expected_constant(&p)?;
            overlays.push(BoundOverlay::Expected(p));
        }
    }
    let result = run_experiment(&cfg, &base)?;
    let dir = output_dir(&cfg, &base);
    emit_plot_data(&result, &overlays, &dir)?;
    let last = result.checkpoints.last().expect("validated nonempty");
    println!(
        "{} runs of {} on K={} -> {}: t={} mean regret {:.3}, accuracy {:.3}",
        result.runs,
        result.algorithm,
        result.k,
        dir.display(),
        last.t,
        last.mean_regret,
        last.accuracy
    );
    Ok(())
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<(), HarnessError> {
    let m = matrix_io::read_matrix(&a.matrix)?;
    let r = m.analyze_assumptions();
    let opt = |v: Option<usize>| v.map_or("none".to_string(), |x| x.to_string());
    let mut report = String::new();
    let _ = writeln!(report, "# k: {}", m.k());
    let _ = writeln!(report, "# condorcet_winner: {}", opt(r.condorcet_winner));
    let _ = writeln!(report, "# borda_winner: {}", r.borda_winner);
    let _ = writeln!(report, "# total_ordering: {}", r.total_ordering_holds);
    if let Some(order) = &r.total_order {
        let o: Vec<String> = order.iter().map(usize::to_string).collect();
        let _ = writeln!(report, "# total_order: {}", o.join(" > "));
    }
    if let Some(g) = r.gamma {
        let _ = writeln!(report, "# relaxed_transitivity_gamma: {g}");
    }
    let _ = writeln!(report, "# strong_transitivity: {}", r.strong_transitivity_holds);

    let beats = m.beats();
    let mut csv = String::from("K,P_K_condorcet,P_K_total_order_mc\n");
    for size in 1..=m.k() {
        let pc = condorcet_subset_probability(&beats, size)?;
        let po = total_ordering_probability_mc(&beats, size, a.samples, a.seed)?;
        let _ = writeln!(csv, "{size},{pc},{po}");
    }
    match &a.out {
        Some(p) => {
            emit(None, &report)?;
            emit(Some(p), &csv)
        }
        None => emit(None, &(report + &csv)),
    }
}

fn gap_vector(gaps: Vec<f64>) -> Result<GapVector, HarnessError> {
    let winner = gaps
        .iter()
        .position(|&g| g == 0.0)
        .ok_or_else(|| HarnessError::Config("gap vector needs a 0 entry for the winner".into()))?;
    let delta_star = gaps.iter().copied().fold(0.0, f64::max);
    Ok(GapVector {
        winner,
        delta: gaps,
        delta_star,
    })
}

fn cmd_bounds(a: BoundsArgs) -> Result<(), HarnessError> {
    let gaps = match (a.matrix, a.gaps) {
        (Some(p), _) => matrix_io::read_matrix(&p)?.gaps()?,
        (None, Some(g)) => gap_vector(g)?,
        (None, None) => unreachable!("clap requires one of them"),
    };
    let params = BoundParams::new(a.alpha, a.delta, gaps)?;
    if a.t_min == 0 || a.t_min > a.t_max || a.points == 0 {
        return Err(HarnessError::Config("need 1 <= t_min <= t_max and points >= 1".into()));
    }
    let with_expected = a.alpha > 1.0;
    let mut csv = String::from("t,high_prob_bound,expected_bound\n");
    for t in log_spaced(a.t_min, a.t_max, a.points) {
        let hp = bounds::high_prob_regret_curve(&params, t)?;
        let ex = if with_expected {
            bounds::expected_regret_bound(&params, t)?.to_string()
        } else {
            String::new()
        };
        let _ = writeln!(csv, "{t},{hp},{ex}");
    }
    emit(a.out.as_deref(), &csv)
}

fn cmd_verify(a: VerifyArgs) -> Result<(), HarnessError> {
    let full = posterior::probability_grid(20, 20);
    let below = posterior::probability_grid(20, 10);
    let rows: [(&str, Result<LemmaReport, PosteriorError>); 3] = [
        (posterior::BETA_ESTIMATE, posterior::verify_beta_estimate(a.n_max_estimate, &full)),
        (posterior::TAIL_SHRINKAGE, posterior::verify_tail_shrinkage(a.n_max, &below)),
        (posterior::ENVELOPE, posterior::verify_envelope(a.n_max, &below)),
    ];
    println!("{:<18} {:<6} {:>6}  {:<30} {:>12}  witness", "lemma", "status", "cases", "metric", "worst");
    let mut first_failure = None;
    for (name, res) in rows {
        match res {
            Ok(r) => {
                let w = r.witness.map_or("-".to_string(), |(n, p)| format!("n={n} p={p}"));
                println!("{:<18} {:<6} {:>6}  {:<30} {:>12.3e}  {w}", r.lemma, "pass", r.cases, r.metric, r.worst);
            }
            Err(e) => {
                println!("{name:<18} {:<6} {e}", "FAIL");
                first_failure.get_or_insert(e);
            }
        }
    }
    match first_failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn cmd_gen(a: GenArgs) -> Result<(), HarnessError> {
    let m: PreferenceMatrix = match a.kind {
        GenKind::Planted {
            k,
            delta_min,
            delta_max,
            seed,
        } => generate_planted(k, delta_min, delta_max, seed)?,
        GenKind::Cycle { k } => generate_cycle(k)?,
    };
    let format = match (a.format, &a.out) {
        (Some(Format::Csv), _) => MatrixFormat::Csv,
        (Some(Format::Json), _) => MatrixFormat::Json,
        (None, Some(p)) => MatrixFormat::from_path(p),
        (None, None) => MatrixFormat::Csv,
    };
    let text = match format {
        MatrixFormat::Csv => matrix_io::to_csv(&m),
        MatrixFormat::Json => matrix_io::to_json(&m),
    };
    emit(a.out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let res = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::VerifyLemmas(a) => cmd_verify(a),
        Command::GenMatrix(a) => cmd_gen(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
