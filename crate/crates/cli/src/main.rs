//! Command-line front end: approximate or compute the minimal lookahead of a
//! delay game, solve individual games, and generate or export instances.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input or I/O failure,
//! 3 resource limit exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use serde::Serialize;

use delaygame::arena::{
    build_abstract_game, build_queue_game, export_pg, GameStats, ParityGame, Player,
    DEFAULT_VERTEX_BUDGET,
};
use delaygame::automaton::{parse_dpa, prediction_family, random_dpa, serialize_dpa, Dpa};
use delaygame::lookahead::{
    approx_min_lookahead, compare, exact_min_lookahead, ApproxOptions, ApproxOutcome, Comparison,
    ExactOutcome, ExactReport, Limits, LookaheadReport, RunMeta, ScanMode, ScannedK,
    DEFAULT_LAYER_CAP,
};
use delaygame::parity_solver::{solve_parity, SolutionSummary};
use delaygame::tracking::{layer_sequence, LayerStats};

#[derive(Debug, Parser)]
#[command(
    name = "delaygame",
    version,
    about = "Minimal lookahead in omega-regular delay games"
)]
struct Cli {
    /// Maximum number of vertices in any constructed game.
    #[arg(long, global = true, default_value_t = DEFAULT_VERTEX_BUDGET)]
    vertex_budget: usize,

    /// Maximum number of distinct behavior layers.
    #[arg(long, global = true, default_value_t = DEFAULT_LAYER_CAP)]
    layer_cap: usize,

    /// Number of abstract games solved concurrently during the scan.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    parallelism: u16,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Approximate the minimal lookahead within a factor of two.
    Approx {
        file: PathBuf,
        /// Bisect over k instead of scanning linearly.
        #[arg(long)]
        binary_search: bool,
        /// Do not scan past this k.
        #[arg(long, value_name = "K")]
        cap: Option<BigUint>,
        #[arg(long)]
        json: bool,
    },
    /// Compute the minimal lookahead exactly, for k up to a bound.
    Exact {
        file: PathBuf,
        #[arg(long, value_name = "K")]
        max_k: u64,
        #[arg(long)]
        json: bool,
    },
    /// Run both and check the approximation bounds.
    Compare {
        file: PathBuf,
        #[arg(long, value_name = "K")]
        max_k: u64,
        #[arg(long)]
        json: bool,
    },
    /// Solve the abstract game for one k (any size; folded into the layer period).
    SolveGk {
        file: PathBuf,
        #[arg(long)]
        k: BigUint,
        #[arg(long)]
        json: bool,
    },
    /// Solve the explicit delay game for one k.
    SolveQueue {
        file: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        json: bool,
    },
    /// Print the behavior-layer sequence statistics as JSON.
    Layers { file: PathBuf },
    /// Generate an automaton and print it as JSON.
    #[command(subcommand)]
    Gen(Generator),
    /// Write a game in PGSolver format.
    ExportPg(ExportArgs),
}

#[derive(Debug, Subcommand)]
enum Generator {
    /// A random complete automaton.
    Random {
        #[arg(long)]
        states: usize,
        #[arg(long)]
        colors: u32,
        #[arg(long = "in", value_name = "SIZE")]
        input: usize,
        #[arg(long = "out", value_name = "SIZE")]
        output: usize,
        #[arg(long)]
        seed: u64,
    },
    /// The prediction automaton whose minimal lookahead is exactly d.
    Prediction {
        #[arg(long)]
        d: usize,
    },
}

#[derive(Debug, Args)]
struct ExportArgs {
    file: PathBuf,
    /// Export the abstract game for this k.
    #[arg(
        long,
        value_name = "K",
        conflicts_with = "queue",
        required_unless_present = "queue"
    )]
    gk: Option<BigUint>,
    /// Export the explicit delay game for this k.
    #[arg(long, value_name = "K")]
    queue: Option<usize>,
    /// Output path; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
    Resource(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Resource(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Resource(m) => m,
        }
    }
}

impl From<delaygame::Error> for Failure {
    fn from(e: delaygame::Error) -> Self {
        if e.is_resource_limit() {
            Failure::Resource(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn load(path: &Path) -> Result<Dpa, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_dpa(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `{"result": ..., "meta": ...}`; only `meta` varies between runs.
fn print_json<R: Serialize, M: Serialize>(result: &R, meta: &M) {
    #[derive(Serialize)]
    struct Envelope<'a, R, M> {
        result: &'a R,
        meta: &'a M,
    }
    let text = serde_json::to_string_pretty(&Envelope { result, meta }).expect("reports serialize");
    println!("{text}");
}

fn player(p: Player) -> &'static str {
    match p {
        Player::I => "I",
        Player::O => "O",
    }
}

fn scanned_line(ks: &[ScannedK]) -> String {
    ks.iter()
        .map(|s| format!("{}:{}", s.k, player(s.winner)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn print_approx(report: &LookaheadReport) {
    match report.outcome {
        ApproxOutcome::Win { k_star, reported } => {
            println!("outcome: win");
            println!("k*: {k_star}");
            println!("reported lookahead: {reported}");
        }
        ApproxOutcome::NoWin => {
            println!("outcome: no win for any k up to {}", report.effective_bound)
        }
    }
    println!("scanned: {}", scanned_line(&report.scanned_ks));
    println!(
        "layers: preperiod {}, period {}",
        report.layer_stats.preperiod, report.layer_stats.period
    );
    println!("effective bound: {}", report.effective_bound);
    println!("k_max: {}", report.k_max);
}

fn print_exact(report: &ExactReport) {
    match report.outcome {
        ExactOutcome::Exact { k_opt } => println!("minimal lookahead: {k_opt}"),
        ExactOutcome::NoWinUpTo { bound } => println!("no win for any lookahead up to {bound}"),
    }
    println!("per k: {}", scanned_line(&report.per_k));
    if !report.monotone {
        println!("warning: winners are not monotone in k");
    }
}

#[derive(Serialize)]
struct GameResult {
    k: String,
    game: GameStats,
    solution: SolutionSummary,
}

fn solve_game(game: &ParityGame, k: String) -> GameResult {
    let solution = solve_parity(game);
    GameResult {
        k,
        game: game.stats(),
        solution: solution.summary(game),
    }
}

fn print_game(result: &GameResult) {
    println!("k: {}", result.k);
    println!(
        "vertices: {} ({} of Player I, {} of Player O), edges: {}",
        result.game.vertices, result.game.vertices_i, result.game.vertices_o, result.game.edges
    );
    println!(
        "winner from the initial vertex: Player {}",
        player(result.solution.initial_winner)
    );
    println!(
        "winning regions: Player O {}, Player I {}",
        result.solution.win_o, result.solution.win_i
    );
}

#[derive(Serialize)]
struct CompareMeta<'a> {
    exact: &'a RunMeta,
    approx: &'a RunMeta,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let limits = Limits {
        vertex_budget: cli.vertex_budget,
        layer_cap: cli.layer_cap,
    };
    let approx_options = |scan, cap| ApproxOptions {
        scan,
        cap,
        limits,
        parallelism: usize::from(cli.parallelism),
    };
    match cli.command {
        Command::Approx {
            file,
            binary_search,
            cap,
            json,
        } => {
            let dpa = load(&file)?;
            if cap.as_ref().is_some_and(|c| c.bits() == 0) {
                return Err(Failure::Usage("--cap must be at least 1".into()));
            }
            let scan = if binary_search {
                ScanMode::Binary
            } else {
                ScanMode::Linear
            };
            let report = approx_min_lookahead(&dpa, &approx_options(scan, cap))?;
            if json {
                print_json(&report, &report.meta);
            } else {
                print_approx(&report);
            }
        }
        Command::Exact { file, max_k, json } => {
            let dpa = load(&file)?;
            let report = exact_min_lookahead(&dpa, max_k, &limits)?;
            if json {
                print_json(&report, &report.meta);
            } else {
                print_exact(&report);
            }
        }
        Command::Compare { file, max_k, json } => {
            let dpa = load(&file)?;
            let cmp: Comparison = compare(&dpa, max_k, &approx_options(ScanMode::Linear, None))?;
            if json {
                let meta = CompareMeta {
                    exact: &cmp.exact.meta,
                    approx: &cmp.approx.meta,
                };
                print_json(&cmp, &meta);
            } else {
                print_exact(&cmp.exact);
                print_approx(&cmp.approx);
                println!(
                    "sandwich: {}",
                    serde_json::to_value(cmp.sandwich_holds)
                        .expect("enum serializes")
                        .as_str()
                        .unwrap_or_default()
                );
            }
        }
        Command::SolveGk { file, k, json } => {
            let dpa = load(&file)?;
            if k.bits() == 0 {
                return Err(Failure::Usage("the abstract game needs --k >= 1".into()));
            }
            let layers = layer_sequence(&dpa, limits.layer_cap)?;
            let game = build_abstract_game(&dpa, layers.layer_at(&k), limits.vertex_budget)?;
            let result = solve_game(&game, k.to_string());
            if json {
                print_json(
                    &result,
                    &serde_json::json!({ "fold_index": layers.fold_index(&k) }),
                );
            } else {
                print_game(&result);
            }
        }
        Command::SolveQueue { file, k, json } => {
            let dpa = load(&file)?;
            let game = build_queue_game(&dpa, k, limits.vertex_budget)?;
            let result = solve_game(&game, k.to_string());
            if json {
                print_json(&result, &serde_json::json!({}));
            } else {
                print_game(&result);
            }
        }
        Command::Layers { file } => {
            let dpa = load(&file)?;
            let stats: LayerStats = layer_sequence(&dpa, limits.layer_cap)?.stats();
            println!(
                "{}",
                serde_json::to_string_pretty(&stats).expect("stats serialize")
            );
        }
        Command::Gen(generator) => {
            let dpa = match generator {
                Generator::Random {
                    states,
                    colors,
                    input,
                    output,
                    seed,
                } => {
                    if states == 0 || colors == 0 || input == 0 || output == 0 {
                        return Err(Failure::Usage(
                            "--states, --colors, --in and --out must be positive".into(),
                        ));
                    }
                    random_dpa(states, colors, input, output, seed)
                }
                Generator::Prediction { d } => {
                    if d == 0 || d > 16 {
                        return Err(Failure::Usage("--d must be between 1 and 16".into()));
                    }
                    prediction_family(d)
                }
            };
            print!("{}", serialize_dpa(&dpa));
        }
        Command::ExportPg(args) => {
            let dpa = load(&args.file)?;
            let game = match (args.gk, args.queue) {
                (Some(k), _) => {
                    if k.bits() == 0 {
                        return Err(Failure::Usage("the abstract game needs --gk >= 1".into()));
                    }
                    let layers = layer_sequence(&dpa, limits.layer_cap)?;
                    build_abstract_game(&dpa, layers.layer_at(&k), limits.vertex_budget)?
                }
                (None, Some(k)) => build_queue_game(&dpa, k, limits.vertex_budget)?,
                (None, None) => unreachable!("clap requires one of --gk and --queue"),
            };
            write_output(args.out.as_deref(), &export_pg(&game))?;
        }
    }
    Ok(())
}

/// Joins clap's message lines up to the usage block.
fn one_line(text: &str) -> String {
    text.lines()
        .take_while(|l| !l.starts_with("Usage:"))
        .map(str::trim)
        .filter(|l| {
            !l.is_empty() && !l.starts_with("tip:") && !l.starts_with("For more information")
        })
        .collect::<Vec<_>>()
        .join(" ")
        .trim_start_matches("error: ")
        .to_owned()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = e.print();
                return ExitCode::from(1);
            }
            eprintln!("delaygame: {}", one_line(&e.to_string()));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("delaygame: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
