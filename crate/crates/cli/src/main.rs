use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use precsat::pipeline::{
    batch, prove_file, BatchReport, EncodingKind, Outcome, ProveOptions, SolverChoice, Verdict,
};
use precsat::sat::{parse_dimacs, solve_with, SatResult, SolverConfig};
use precsat::OrderVariant;

const EXIT_YES: u8 = 0;
const EXIT_NO: u8 = 1;
const EXIT_ERROR: u8 = 2;

/// LPO termination prover for term rewrite systems.
#[derive(Parser)]
#[command(name = "precsat", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Prove one TPDB `.trs` file. Exit 0 on YES, 1 on NO, 2 on error.
    Prove {
        file: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Prove every `.trs` file in a directory.
    Batch {
        dir: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
        /// Files proved in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Solve a DIMACS CNF file with the embedded solver. Exit 10 on SAT,
    /// 20 on UNSAT.
    Solve {
        file: PathBuf,
        /// Write the result here instead of standard output.
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Strict,
    Quasi,
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoding {
    Symbol,
    Atom,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct CommonOpts {
    #[arg(long, value_enum, default_value = "strict")]
    order: Order,
    #[arg(long, value_enum, default_value = "symbol")]
    encoding: Encoding,
    /// Solve each strongly connected component of the domain graph apart.
    #[arg(long, value_enum, default_value = "off")]
    scc: Toggle,
    /// `internal`, or `external:<command>`; the command may use `{input}`
    /// and `{output}`.
    #[arg(long, default_value = "internal", value_parser = parse_solver)]
    solver: SolverChoice,
    /// Print the precedence on YES.
    #[arg(long)]
    print_model: bool,
    /// Write the CNF instance to this path before solving.
    #[arg(long)]
    dimacs: Option<PathBuf>,
    /// Per-file time limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Print sizes and per-stage timings.
    #[arg(long)]
    stats: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn parse_solver(s: &str) -> Result<SolverChoice, String> {
    match s {
        "internal" => Ok(SolverChoice::Internal),
        _ => match s.strip_prefix("external:") {
            Some(cmd) if !cmd.trim().is_empty() => Ok(SolverChoice::External(cmd.to_string())),
            _ => Err(format!("expected `internal` or `external:<command>`, got `{s}`")),
        },
    }
}

impl CommonOpts {
    fn to_options(&self) -> Result<ProveOptions, String> {
        let timeout = match self.timeout {
            None => None,
            Some(t) if t.is_finite() && t >= 0.0 => Some(Duration::from_secs_f64(t)),
            Some(t) => return Err(format!("invalid timeout {t}")),
        };
        Ok(ProveOptions {
            order: match self.order {
                Order::Strict => OrderVariant::Strict,
                Order::Quasi => OrderVariant::Quasi,
            },
            encoding: match self.encoding {
                Encoding::Symbol => EncodingKind::Symbol,
                Encoding::Atom => EncodingKind::Atom,
            },
            scc: matches!(self.scc, Toggle::On),
            solver: self.solver.clone(),
            dimacs: self.dimacs.clone(),
            timeout,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Cmd::Prove { file, opts } => run_prove(file, &opts),
        Cmd::Batch { dir, opts, jobs } => run_batch(dir, &opts, jobs),
        Cmd::Solve { file, output } => run_solve(file, output),
    };
    ExitCode::from(code)
}

fn run_prove(file: PathBuf, common: &CommonOpts) -> u8 {
    let opts = match common.to_options() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    match prove_file(&file, &opts) {
        Ok(report) => {
            match common.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                ),
                Format::Text => print!("{}", report.to_text(common.print_model, common.stats)),
            }
            match report.verdict {
                Verdict::Yes => EXIT_YES,
                Verdict::No => EXIT_NO,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn run_batch(dir: PathBuf, common: &CommonOpts, jobs: usize) -> u8 {
    let opts = match common.to_options() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    match batch(&dir, &opts, jobs.max(1)) {
        Ok(report) => {
            match common.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                ),
                Format::Text => print_batch(&report, common.print_model),
            }
            EXIT_YES
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn print_batch(report: &BatchReport, print_model: bool) {
    for row in &report.rows {
        let outcome = match &row.outcome {
            Outcome::Yes => "YES".to_string(),
            Outcome::No => "NO".to_string(),
            Outcome::Skipped => "SKIPPED".to_string(),
            Outcome::Error(e) => format!("ERROR {e}"),
        };
        print!("{}\t{}\t{:.3}s", row.path.display(), outcome, row.seconds);
        if print_model {
            if let Some(p) = row.report.as_ref().and_then(|r| r.precedence.as_ref()) {
                print!("\t{p}");
            }
        }
        println!();
    }
    let s = &report.summary;
    println!(
        "files {}  YES {}  NO {}  errors {}  skipped {}",
        s.file_count, s.yes_count, s.no_count, s.error_count, s.skipped_count
    );
    println!(
        "time total {:.3}s  average {:.3}s  max {:.3}s",
        s.total_seconds, s.average_seconds, s.max_seconds
    );
}

fn run_solve(file: PathBuf, output: Option<PathBuf>) -> u8 {
    let text = match std::fs::read_to_string(&file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", file.display());
            return EXIT_ERROR;
        }
    };
    let cnf = match parse_dimacs(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", file.display());
            return EXIT_ERROR;
        }
    };
    let (result, code) = match solve_with(&cnf, &SolverConfig::default()) {
        Ok((SatResult::Sat(m), _)) => {
            let lits: Vec<String> = (1..m.len())
                .map(|v| if m[v] { v.to_string() } else { format!("-{v}") })
                .collect();
            let mut out = String::from("s SATISFIABLE\n");
            if !lits.is_empty() {
                out.push_str(&format!("v {}\n", lits.join(" ")));
            }
            out.push_str("v 0\n");
            (out, 10)
        }
        Ok((SatResult::Unsat, _)) => ("s UNSATISFIABLE\n".to_string(), 20),
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    match output {
        Some(p) => {
            if let Err(e) = std::fs::write(&p, result) {
                eprintln!("error: {}: {e}", p.display());
                return EXIT_ERROR;
            }
        }
        None => print!("{result}"),
    }
    code
}
