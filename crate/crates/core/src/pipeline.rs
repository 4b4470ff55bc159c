//! Parse, unfold, encode, convert, solve, report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::encode::{
    decode_atom_solution, decode_solution, encode_atom_based, encode_symbol_based,
    precedence_of, Precedence,
};
use crate::lpo::{trs_constraint, OrderVariant};
use crate::poc::{combine_scc_solutions, PoRef, PoStore, Solution};
use crate::sat::{
    solve_external, solve_with, tseitin, write_dimacs, CnfInstance, DimacsError, SatResult,
    SolveError, SolverConfig,
};
use crate::trs::{parse_trs, TrsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodingKind {
    #[default]
    Symbol,
    Atom,
}

impl std::fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EncodingKind::Symbol => "symbol",
            EncodingKind::Atom => "atom",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SolverChoice {
    #[default]
    Internal,
    /// Shell command, see [`solve_external`].
    External(String),
}

#[derive(Debug, Clone)]
pub struct ProveOptions {
    pub order: OrderVariant,
    pub encoding: EncodingKind,
    pub scc: bool,
    pub solver: SolverChoice,
    /// Where to write the DIMACS instance before solving. With `scc` each
    /// part goes to `<path>.<i>`.
    pub dimacs: Option<PathBuf>,
    pub timeout: Option<Duration>,
}

impl Default for ProveOptions {
    fn default() -> Self {
        ProveOptions {
            order: OrderVariant::Strict,
            encoding: EncodingKind::Symbol,
            scc: false,
            solver: SolverChoice::Internal,
            dimacs: None,
            timeout: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "YES")]
    Yes,
    #[serde(rename = "NO")]
    No,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "YES",
            Verdict::No => "NO",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Statistics {
    pub symbols_total: usize,
    pub symbols_largest_scc: usize,
    pub cnf_vars: u64,
    pub cnf_clauses: u64,
    pub parse_ms: f64,
    pub unfold_ms: f64,
    pub encode_ms: f64,
    pub solve_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProveReport {
    pub verdict: Verdict,
    pub variant: OrderVariant,
    pub encoding: EncodingKind,
    /// Present iff the verdict is YES. Total under the strict variant.
    pub precedence: Option<Precedence>,
    pub statistics: Statistics,
}

impl ProveReport {
    pub fn to_text(&self, print_model: bool, stats: bool) -> String {
        let mut out = String::new();
        match self.verdict {
            Verdict::Yes => {
                let _ = writeln!(out, "YES ({} LPO termination proof found)", self.variant);
            }
            Verdict::No => {
                let _ = writeln!(
                    out,
                    "NO (no {} LPO proof exists; this does not mean the system is non-terminating)",
                    self.variant
                );
            }
        }
        if print_model {
            if let Some(p) = &self.precedence {
                let text = p.to_string();
                let _ = writeln!(out, "precedence: {}", if text.is_empty() { "(empty)" } else { &text });
            }
        }
        if stats {
            let s = &self.statistics;
            let _ = writeln!(out, "encoding: {}", self.encoding);
            let _ = writeln!(out, "symbols: {} (largest SCC {})", s.symbols_total, s.symbols_largest_scc);
            let _ = writeln!(out, "cnf: {} vars, {} clauses", s.cnf_vars, s.cnf_clauses);
            let _ = writeln!(
                out,
                "time (ms): parse {:.2}, unfold {:.2}, encode {:.2}, solve {:.2}",
                s.parse_ms, s.unfold_ms, s.encode_ms, s.solve_ms
            );
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Parse(#[from] TrsError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    External(#[from] DimacsError),
    #[error("timed out after {0:?}")]
    Timeout(Duration),
}

impl PipelineError {
    pub fn is_unsupported(&self) -> bool {
        matches!(self, PipelineError::Parse(e) if e.is_unsupported())
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

pub fn prove_file(path: &Path, opts: &ProveOptions) -> Result<ProveReport, PipelineError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })?;
    prove_text(&text, opts)
}

pub fn prove_text(text: &str, opts: &ProveOptions) -> Result<ProveReport, PipelineError> {
    let start = Instant::now();
    let deadline = opts.timeout.map(|t| start + t);
    let mut stats = Statistics::default();

    let t = Instant::now();
    let trs = parse_trs(text)?;
    stats.parse_ms = ms(t.elapsed());
    stats.symbols_total = trs.signature().len();

    let t = Instant::now();
    let mut store = PoStore::new();
    let phi = trs_constraint(&mut store, &trs, opts.order);
    stats.unfold_ms = ms(t.elapsed());
    stats.symbols_largest_scc =
        store.domain_graph(phi).sccs().iter().map(Vec::len).max().unwrap_or(0);

    let mut session = Session { store: &mut store, opts, deadline, stats: &mut stats, instances: 0 };
    let theta = if opts.scc {
        let parts = session.store.scc_partition(phi);
        let mut sols = Vec::with_capacity(parts.len());
        let mut unsat = false;
        for part in &parts {
            match session.solve_part(part.formula)? {
                Some(s) => sols.push(s),
                None => {
                    unsat = true;
                    break;
                }
            }
        }
        if unsat {
            None
        } else {
            match combine_scc_solutions(session.store, phi, &parts, &sols) {
                Some(s) => Some(s),
                None => session.solve_part(phi)?,
            }
        }
    } else {
        session.solve_part(phi)?
    };

    let theta = theta.map(|theta| {
        // symbols the constraint never mentions go into a bottom class
        let mut theta: Solution = theta.iter().map(|(f, v)| (f, v + 1)).collect();
        for sym in trs.signature() {
            if theta.get(&sym.name).is_none() {
                theta.insert(sym.name.as_str(), 0);
            }
        }
        if opts.order == OrderVariant::Strict {
            theta = linearize(&theta);
        }
        assert_eq!(store.eval(phi, &theta), Ok(true), "decoded precedence does not satisfy the constraint");
        theta
    });
    Ok(ProveReport {
        verdict: if theta.is_some() { Verdict::Yes } else { Verdict::No },
        variant: opts.order,
        encoding: opts.encoding,
        precedence: theta.as_ref().map(precedence_of),
        statistics: stats,
    })
}

/// Breaks ties by symbol name. A strict constraint has only `>` atoms and no
/// negation, so a solution stays a solution.
fn linearize(theta: &Solution) -> Solution {
    let mut order: Vec<(u64, &str)> = theta.iter().map(|(s, v)| (v, s)).collect();
    order.sort();
    order.into_iter().enumerate().map(|(i, (_, s))| (s, i as u64 + 1)).collect()
}

struct Session<'a> {
    store: &'a mut PoStore,
    opts: &'a ProveOptions,
    deadline: Option<Instant>,
    stats: &'a mut Statistics,
    instances: usize,
}

impl Session<'_> {
    fn remaining(&self) -> Result<Option<Duration>, PipelineError> {
        match self.deadline {
            None => Ok(None),
            Some(d) => {
                let left = d.saturating_duration_since(Instant::now());
                if left.is_zero() {
                    Err(PipelineError::Timeout(self.opts.timeout.unwrap_or_default()))
                } else {
                    Ok(Some(left))
                }
            }
        }
    }

    /// Encodes and solves one constraint; `None` when it is unsatisfiable.
    fn solve_part(&mut self, phi: PoRef) -> Result<Option<Solution>, PipelineError> {
        if phi == PoRef::TRUE {
            return Ok(Some(Solution::new()));
        }
        if phi == PoRef::FALSE {
            return Ok(None);
        }
        let t = Instant::now();
        enum Decoder {
            Symbol(crate::encode::SymbolCoding),
            Atom(crate::encode::AtomTable),
        }
        let (cnf, decoder) = match self.opts.encoding {
            EncodingKind::Symbol => {
                let enc = encode_symbol_based(self.store, phi);
                (tseitin(&enc.props, enc.root), Decoder::Symbol(enc.coding))
            }
            EncodingKind::Atom => {
                let enc = encode_atom_based(self.store, phi);
                (tseitin(&enc.props, enc.root), Decoder::Atom(enc.table))
            }
        };
        self.stats.encode_ms += ms(t.elapsed());
        self.stats.cnf_vars += cnf.num_vars as u64;
        self.stats.cnf_clauses += cnf.num_clauses() as u64;
        self.write_dimacs(&cnf)?;

        let t = Instant::now();
        let result = self.run_solver(&cnf)?;
        self.stats.solve_ms += ms(t.elapsed());
        let Some(model) = result.model() else {
            return Ok(None);
        };
        let theta = match &decoder {
            Decoder::Symbol(c) => decode_solution(model, c),
            Decoder::Atom(t) => decode_atom_solution(model, t),
        }
        .expect("solver models cover every variable");
        assert_eq!(self.store.eval(phi, &theta), Ok(true), "decoded solution violates the constraint");
        Ok(Some(theta))
    }

    fn write_dimacs(&mut self, cnf: &CnfInstance) -> Result<(), PipelineError> {
        let Some(base) = &self.opts.dimacs else {
            return Ok(());
        };
        self.instances += 1;
        let path = if self.opts.scc {
            let mut p = base.clone().into_os_string();
            p.push(format!(".{}", self.instances));
            PathBuf::from(p)
        } else {
            base.clone()
        };
        std::fs::write(&path, write_dimacs(cnf)).map_err(|source| PipelineError::Io { path, source })
    }

    fn run_solver(&self, cnf: &CnfInstance) -> Result<SatResult, PipelineError> {
        let left = self.remaining()?;
        match &self.opts.solver {
            SolverChoice::Internal => {
                let config = SolverConfig { time_limit: left, ..SolverConfig::default() };
                match solve_with(cnf, &config) {
                    Ok((r, _)) => Ok(r),
                    Err(SolveError::TimeLimit(_)) => {
                        Err(PipelineError::Timeout(self.opts.timeout.unwrap_or_default()))
                    }
                    Err(e) => Err(e.into()),
                }
            }
            SolverChoice::External(cmd) => Ok(solve_external(cnf, cmd, left)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Yes,
    No,
    Skipped,
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchRow {
    pub path: PathBuf,
    pub outcome: Outcome,
    pub seconds: f64,
    pub report: Option<ProveReport>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BatchSummary {
    /// Files attempted, excluding skipped ones.
    pub file_count: usize,
    pub yes_count: usize,
    pub no_count: usize,
    pub error_count: usize,
    /// Files declaring a theory or strategy.
    pub skipped_count: usize,
    pub total_seconds: f64,
    pub average_seconds: f64,
    pub max_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchReport {
    pub rows: Vec<BatchRow>,
    pub summary: BatchSummary,
}

/// Proves every `.trs` file directly inside `dir`. Rows come back sorted by
/// path whatever `jobs` is.
pub fn batch(dir: &Path, opts: &ProveOptions, jobs: usize) -> Result<BatchReport, PipelineError> {
    let io = |source| PipelineError::Io { path: dir.to_path_buf(), source };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "trs") {
            files.push(path);
        }
    }
    files.sort();

    let run = |path: &PathBuf| {
        let t = Instant::now();
        let res = prove_file(path, opts);
        let seconds = t.elapsed().as_secs_f64();
        let (outcome, report) = match res {
            Ok(r) if r.verdict == Verdict::Yes => (Outcome::Yes, Some(r)),
            Ok(r) => (Outcome::No, Some(r)),
            Err(e) if e.is_unsupported() => (Outcome::Skipped, None),
            Err(e) => (Outcome::Error(e.to_string()), None),
        };
        BatchRow { path: path.clone(), outcome, seconds, report }
    };
    let rows: Vec<BatchRow> = if jobs <= 1 {
        files.iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool");
        pool.install(|| files.par_iter().map(run).collect())
    };
    Ok(BatchReport { summary: summarize(&rows), rows })
}

pub fn summarize(rows: &[BatchRow]) -> BatchSummary {
    let mut s = BatchSummary::default();
    for r in rows {
        match r.outcome {
            Outcome::Skipped => {
                s.skipped_count += 1;
                continue;
            }
            Outcome::Yes => s.yes_count += 1,
            Outcome::No => s.no_count += 1,
            Outcome::Error(_) => s.error_count += 1,
        }
        s.file_count += 1;
        s.total_seconds += r.seconds;
        s.max_seconds = s.max_seconds.max(r.seconds);
    }
    if s.file_count > 0 {
        s.average_seconds = s.total_seconds / s.file_count as f64;
    }
    s
}
