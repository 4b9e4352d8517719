//! Subcommands. Each writes its report to `out`, diagnostics to `err`, and
//! returns the process exit code.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use expost_core::compare::{compare_report, GatedValue, Gate};
use expost_core::geometry::{analyze_binary, sample_curves, GeometryError};
use expost_core::greedy::{check_conditions, greedy_scheme, ConditionWitness, GreedyError};
use expost_core::model::Game;
use expost_core::rational::{format_rational, Rational};
use expost_core::solver::{solve_bp, solve_expost, SolveResult};
use expost_core::trading::classify_trading;
use serde_json::{json, Value};

use crate::gamefile::{read_game_file, GameFile, LoadError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_NOT_BINARY: i32 = 4;
pub const EXIT_BUDGET_LEFT: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "expost", version, about = "Exact Bayesian persuasion with and without ex-post IR")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Bp,
    Expost,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the persuasion LP, the ex-post IR LP, or both.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        mode: Mode,
        /// Also write the result document to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide geometrically whether ex-post IR is free in a two-state game.
    AnalyzeBinary {
        file: PathBuf,
        /// Write the sampled curves as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check the trading-game conditions and the greedy conditions.
    Classify { file: PathBuf },
    /// Run the greedy signaling scheme and print every round.
    Greedy { file: PathBuf },
    /// Compare sender values across persuasion models.
    Compare { file: PathBuf },
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let file = match &cli.command {
        Command::Solve { file, .. }
        | Command::AnalyzeBinary { file, .. }
        | Command::Classify { file }
        | Command::Greedy { file }
        | Command::Compare { file } => file,
    };
    let loaded = match read_game_file(file) {
        Ok(loaded) => loaded,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            return match e {
                LoadError::Invariant(_) => EXIT_INVARIANT,
                LoadError::Io { .. } | LoadError::Parse(_) => EXIT_PARSE,
            };
        }
    };
    let result = match &cli.command {
        Command::Solve { mode, out: path, .. } => solve(&loaded, *mode, path.as_deref(), out),
        Command::AnalyzeBinary { csv, .. } => analyze(&loaded, csv.as_deref(), out),
        Command::Classify { .. } => classify(&loaded, out),
        Command::Greedy { .. } => greedy(&loaded, out),
        Command::Compare { .. } => compare(&loaded, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{}", e.message);
            e.code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: format!("write failed: {e}"),
        }
    }
}

type Outcome = Result<i32, Failure>;

fn r(x: &Rational) -> String {
    format_rational(x)
}

fn list(xs: &[Rational]) -> String {
    xs.iter().map(r).collect::<Vec<_>>().join(" ")
}

fn scheme_document(game: &Game, result: &SolveResult) -> Value {
    let signals: Vec<Value> = result
        .scheme
        .signals
        .iter()
        .map(|s| {
            json!({
                "weight": r(&s.weight),
                "action": game.actions()[s.action],
                "posterior": s.posterior.probabilities().iter().map(r).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "value": r(&result.value),
        "ex_post_ir": result.ex_post_ir,
        "scheme": signals,
    })
}

fn solve(file: &GameFile, mode: Mode, path: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let (game, prior) = (&file.game, &file.prior);
    let bp = matches!(mode, Mode::Bp | Mode::Both).then(|| solve_bp(game, prior).expect("prior matches the game"));
    let expost = matches!(mode, Mode::Expost | Mode::Both)
        .then(|| solve_expost(game, prior).expect("prior matches the game"));
    let mut doc = serde_json::Map::new();
    if let Some(bp) = &bp {
        doc.insert("bp".into(), scheme_document(game, bp));
    }
    if let Some(expost) = &expost {
        doc.insert("expost".into(), scheme_document(game, expost));
    }
    if let (Some(bp), Some(expost)) = (&bp, &expost) {
        doc.insert("gap".into(), Value::from(r(&(&bp.value - &expost.value))));
    }
    let text = serde_json::to_string_pretty(&Value::Object(doc)).expect("documents serialize");
    writeln!(out, "{text}")?;
    if let Some(path) = path {
        std::fs::write(path, format!("{text}\n")).map_err(|e| Failure {
            code: 1,
            message: format!("cannot write {}: {e}", path.display()),
        })?;
    }
    Ok(EXIT_OK)
}

fn analyze(file: &GameFile, csv_path: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let game = &file.game;
    let analysis = match analyze_binary(game) {
        Ok(a) => a,
        Err(e @ GeometryError::NotBinary { .. }) => {
            return Err(Failure {
                code: EXIT_NOT_BINARY,
                message: e.to_string(),
            })
        }
    };
    let partition = &analysis.partition;
    writeln!(out, "thresholds: {}", list(&partition.thresholds))?;
    for (i, &a) in partition.interval_actions.iter().enumerate() {
        writeln!(
            out,
            "interval ({}, {}): {}",
            r(&partition.thresholds[i]),
            r(&partition.thresholds[i + 1]),
            game.actions()[a]
        )?;
    }
    let vertices: Vec<String> = analysis
        .quasiconcave
        .chain
        .vertices
        .iter()
        .map(|(x, y)| format!("({}, {})", r(x), r(y)))
        .collect();
    writeln!(out, "gamma vertices: {}", vertices.join(" "))?;
    writeln!(out, "gamma slopes: {}", list(&analysis.gamma.slopes()))?;
    writeln!(out, "operations: {}", analysis.operations)?;
    let verdict = if analysis.expost_ir { "EXPOST_IR" } else { "NOT_EXPOST_IR" };
    writeln!(out, "verdict: {verdict}")?;
    if let Some(path) = csv_path {
        let failure = |e: csv::Error| Failure {
            code: 1,
            message: format!("cannot write {}: {e}", path.display()),
        };
        let mut writer = csv::Writer::from_path(path).map_err(failure)?;
        writer
            .write_record(["x", "vhat", "concave", "quasiconcave", "gamma"])
            .map_err(failure)?;
        for s in sample_curves(&analysis) {
            writer
                .write_record([r(&s.x), r(&s.vhat), r(&s.concave), r(&s.quasiconcave), r(&s.gamma)])
                .map_err(failure)?;
        }
        writer.flush()?;
    }
    Ok(EXIT_OK)
}

fn yes_no(flag: bool, name: &str) -> String {
    if flag {
        name.to_string()
    } else {
        format!("NOT_{name}")
    }
}

fn classify(file: &GameFile, out: &mut dyn Write) -> Outcome {
    let game = &file.game;
    let (n, m) = (game.num_actions(), game.num_states());
    if n != m {
        writeln!(out, "note: both classifications need a square game, this one is {n}x{m}")?;
        return Ok(EXIT_OK);
    }
    let certificate = classify_trading(game).expect("square game");
    writeln!(out, "{}", yes_no(certificate.is_trading, "TRADING"))?;
    for v in &certificate.violations {
        writeln!(out, "  condition {} fails at i={} j={} k={}", v.condition, v.i + 1, v.j + 1, v.k + 1)?;
    }
    if let Some(c) = &certificate.welfare_constants {
        writeln!(out, "  surplus per state: {}", list(c))?;
    }
    let report = check_conditions(game.receiver()).expect("square game");
    writeln!(out, "{}", yes_no(report.cyclically_monotone, "CYCLICAL_MONOTONE"))?;
    let log = if report.log_supermodularity_applicable {
        yes_no(report.weakly_log_supermodular, "WEAK_LOG_SUPERMODULAR")
    } else {
        "WEAK_LOG_SUPERMODULAR_NOT_APPLICABLE".to_string()
    };
    writeln!(out, "{log}")?;
    for w in &report.witnesses {
        match w {
            ConditionWitness::Cyclic { i, j, k } => {
                writeln!(out, "  cyclic order broken in state {}: position {} < position {}", k + 1, i + 1, j + 1)?
            }
            ConditionWitness::LogSupermodular { i, j, k } => writeln!(
                out,
                "  ratio test fails for actions {} < {} at states {}, {}",
                i + 1,
                j + 1,
                k + 1,
                k + 2
            )?,
            ConditionWitness::NonPositive { i, k } => {
                writeln!(out, "  non-positive utility at action {} state {}", i + 1, k + 1)?
            }
        }
    }
    Ok(EXIT_OK)
}

fn greedy(file: &GameFile, out: &mut dyn Write) -> Outcome {
    let game = &file.game;
    let trace = match greedy_scheme(game, &file.prior) {
        Ok(trace) => trace,
        Err(GreedyError::BudgetNotExhausted { residual, .. }) => {
            return Err(Failure {
                code: EXIT_BUDGET_LEFT,
                message: format!("budget not exhausted, residual: {}", list(&residual)),
            })
        }
        Err(e) => {
            return Err(Failure {
                code: EXIT_INVARIANT,
                message: e.to_string(),
            })
        }
    };
    for (i, round) in trace.rounds.iter().enumerate() {
        writeln!(
            out,
            "round {} action {} mass {} residual {}",
            i + 1,
            game.actions()[round.action],
            r(&round.mass()),
            list(&round.residual)
        )?;
    }
    writeln!(out, "value: {}", r(&trace.value))?;
    Ok(EXIT_OK)
}

fn gated(value: &GatedValue) -> String {
    match value {
        GatedValue::Exact { value, gate } => {
            let note = if *gate == Gate::StateIndependentSender { ", external result" } else { "" };
            format!("{} [{}{note}]", r(value), gate.name())
        }
        GatedValue::Unknown { reason } => format!("Unknown ({reason})"),
    }
}

fn compare(file: &GameFile, out: &mut dyn Write) -> Outcome {
    let report = compare_report(&file.game, &file.prior).expect("prior matches the game");
    writeln!(out, "bp: {}", r(&report.v_bp))?;
    writeln!(out, "expost: {}", r(&report.v_expost))?;
    writeln!(out, "credible: {}", gated(&report.v_credible))?;
    writeln!(out, "cheap: {}", gated(&report.v_cheap))?;
    let order = if report.sender_order_holds { "holds" } else { "fails" };
    writeln!(out, "sender order: {order}")?;
    for c in &report.ordering_checks {
        writeln!(out, "check {}: {}", c.inequality, c.status)?;
    }
    writeln!(out, "ordering: {}", report.ordering_line())?;
    Ok(EXIT_OK)
}
