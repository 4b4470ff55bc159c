//! CNF conversion, a CDCL solver and DIMACS exchange.

use std::collections::HashMap;
use std::fmt;
use std::io::Read as _;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::encode::{PropNode, PropRef, PropStore, VarLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: u32,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: u32) -> Self {
        assert!(var >= 1, "variable ids start at 1");
        Literal { var, positive: true }
    }

    pub fn neg(var: u32) -> Self {
        assert!(var >= 1, "variable ids start at 1");
        Literal { var, positive: false }
    }

    /// From a DIMACS integer.
    pub fn from_dimacs(x: i64) -> Self {
        assert!(x != 0);
        let var = u32::try_from(x.unsigned_abs()).expect("variable id fits in u32");
        Literal { var, positive: x > 0 }
    }

    pub fn to_dimacs(self) -> i64 {
        if self.positive {
            self.var as i64
        } else {
            -(self.var as i64)
        }
    }

    pub fn holds(self, model: &[bool]) -> bool {
        model[self.var as usize] == self.positive
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;
    fn not(self) -> Literal {
        Literal { var: self.var, positive: !self.positive }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CnfInstance {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Literal>>,
    /// Label of variable `i + 1`; empty when unknown.
    pub origins: Vec<VarLabel>,
}

impl CnfInstance {
    pub fn new(num_vars: u32) -> Self {
        CnfInstance { num_vars, clauses: Vec::new(), origins: Vec::new() }
    }

    pub fn add_clause(&mut self, clause: impl IntoIterator<Item = Literal>) {
        let c: Vec<Literal> = clause.into_iter().collect();
        debug_assert!(c.iter().all(|l| l.var >= 1 && l.var <= self.num_vars));
        self.clauses.push(c);
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// `model[v]` is the value of variable `v`; index 0 is unused.
    pub fn satisfied_by(&self, model: &[bool]) -> bool {
        model.len() > self.num_vars as usize
            && self.clauses.iter().all(|c| c.iter().any(|l| l.holds(model)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    /// Indexed by variable id, index 0 unused.
    Sat(Vec<bool>),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn model(&self) -> Option<&[bool]> {
        match self {
            SatResult::Sat(m) => Some(m),
            SatResult::Unsat => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TseitinMode {
    /// Both implications for every node.
    #[default]
    Full,
    /// Only the implications required by the polarity under which a node
    /// occurs.
    Polarity,
}

pub fn tseitin(props: &PropStore, root: PropRef) -> CnfInstance {
    tseitin_with(props, root, TseitinMode::Full)
}

/// Equisatisfiable CNF for `root`. The first `props.num_vars()` variables
/// keep their ids; every distinct `And`/`Or`/`Iff` node gets one auxiliary.
/// Variables and negations are referenced as literals directly.
pub fn tseitin_with(props: &PropStore, root: PropRef, mode: TseitinMode) -> CnfInstance {
    let mut cnf = CnfInstance::new(props.num_vars());
    cnf.origins = props.labels().to_vec();
    match props.node(root) {
        PropNode::True => return cnf,
        PropNode::False => {
            cnf.clauses.push(Vec::new());
            return cnf;
        }
        _ => {}
    }
    let order = props.reachable(root);
    // bit 0: needed positively, bit 1: needed negatively
    let mut polarity: HashMap<PropRef, u8> = HashMap::new();
    polarity.insert(root, 1);
    for &r in order.iter().rev() {
        let p = match mode {
            TseitinMode::Full => 3,
            TseitinMode::Polarity => polarity.get(&r).copied().unwrap_or(0),
        };
        let mut mark = |c: PropRef, bits: u8| *polarity.entry(c).or_default() |= bits;
        match props.node(r) {
            PropNode::Not(x) => mark(*x, (p & 1) << 1 | (p >> 1)),
            PropNode::And(cs) | PropNode::Or(cs) => cs.iter().for_each(|&c| mark(c, p)),
            PropNode::Iff(a, b) if p != 0 => {
                mark(*a, 3);
                mark(*b, 3);
            }
            _ => {}
        }
    }

    let mut lit_of: HashMap<PropRef, Literal> = HashMap::new();
    for r in order {
        let p = match mode {
            TseitinMode::Full => 3,
            TseitinMode::Polarity => polarity.get(&r).copied().unwrap_or(0),
        };
        let lit = match props.node(r) {
            PropNode::True | PropNode::False => {
                unreachable!("constants are simplified away below the root")
            }
            PropNode::Var(v) => Literal::pos(*v),
            PropNode::Not(x) => !lit_of[x],
            PropNode::And(cs) => {
                let a = fresh(&mut cnf);
                let ls: Vec<Literal> = cs.iter().map(|c| lit_of[c]).collect();
                if p & 1 != 0 {
                    for &l in &ls {
                        cnf.add_clause([!a, l]);
                    }
                }
                if p & 2 != 0 {
                    cnf.add_clause(std::iter::once(a).chain(ls.iter().map(|&l| !l)));
                }
                a
            }
            PropNode::Or(cs) => {
                let a = fresh(&mut cnf);
                let ls: Vec<Literal> = cs.iter().map(|c| lit_of[c]).collect();
                if p & 1 != 0 {
                    cnf.add_clause(std::iter::once(!a).chain(ls.iter().copied()));
                }
                if p & 2 != 0 {
                    for &l in &ls {
                        cnf.add_clause([a, !l]);
                    }
                }
                a
            }
            PropNode::Iff(x, y) => {
                let a = fresh(&mut cnf);
                let (x, y) = (lit_of[x], lit_of[y]);
                if p & 1 != 0 {
                    cnf.add_clause([!a, !x, y]);
                    cnf.add_clause([!a, x, !y]);
                }
                if p & 2 != 0 {
                    cnf.add_clause([a, x, y]);
                    cnf.add_clause([a, !x, !y]);
                }
                a
            }
        };
        lit_of.insert(r, lit);
    }
    cnf.add_clause([lit_of[&root]]);
    cnf
}

fn fresh(cnf: &mut CnfInstance) -> Literal {
    cnf.num_vars += 1;
    cnf.origins.push(VarLabel::Aux);
    Literal::pos(cnf.num_vars)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("conflict budget of {0} exhausted")]
    ConflictLimit(u64),
    #[error("time budget of {0:?} exhausted")]
    TimeLimit(Duration),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub conflict_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    pub restarts: bool,
    pub reduce_learnts: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { conflict_limit: None, time_limit: None, restarts: true, reduce_learnts: true }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learnts: u64,
}

pub fn solve(cnf: &CnfInstance) -> Result<SatResult, SolveError> {
    solve_with(cnf, &SolverConfig::default()).map(|(r, _)| r)
}

/// Runs the embedded solver. A satisfying assignment is checked against
/// every clause of `cnf` before it is returned.
pub fn solve_with(
    cnf: &CnfInstance,
    config: &SolverConfig,
) -> Result<(SatResult, SolveStats), SolveError> {
    let mut s = Solver::new(cnf.num_vars as usize);
    let mut ok = true;
    for c in &cnf.clauses {
        if !s.add_clause(c) {
            ok = false;
            break;
        }
    }
    let result = if ok { s.search(config)? } else { SatResult::Unsat };
    if let SatResult::Sat(m) = &result {
        assert!(cnf.satisfied_by(m), "solver produced an assignment that violates the instance");
    }
    Ok((result, s.stats))
}

// Internal literal code: 2 * var + sign, var 0-based, sign 1 = negative.
type Lit = u32;
const UNDEF: u8 = 2;
const NO_REASON: u32 = u32::MAX;

fn lit_code(l: Literal) -> Lit {
    (l.var - 1) * 2 + (!l.positive) as u32
}

fn lvar(l: Lit) -> usize {
    (l >> 1) as usize
}

#[derive(Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: Lit,
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

/// Max-heap on activity, ties broken towards the lower variable id.
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn new(n: usize) -> Self {
        VarHeap { heap: Vec::with_capacity(n), pos: vec![None; n] }
    }

    fn better(act: &[f64], a: u32, b: u32) -> bool {
        let (x, y) = (act[a as usize], act[b as usize]);
        x > y || (x == y && a < b)
    }

    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize].is_some()
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = Some(i);
        self.up(i, act);
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.pos[top as usize] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = Some(0);
            self.down(0, act);
        }
        Some(top)
    }

    fn bumped(&mut self, v: u32, act: &[f64]) {
        if let Some(i) = self.pos[v as usize] {
            self.up(i, act);
        }
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::better(act, v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i] as usize] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        loop {
            let l = 2 * i + 1;
            if l >= self.heap.len() {
                break;
            }
            let r = l + 1;
            let child = if r < self.heap.len() && Self::better(act, self.heap[r], self.heap[l]) {
                r
            } else {
                l
            };
            if !Self::better(act, self.heap[child], v) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.pos[self.heap[i] as usize] = Some(i);
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }
}

struct Solver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watcher>>,
    assign: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    phase: Vec<bool>,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    seen: Vec<bool>,
    learnt_count: usize,
    stats: SolveStats,
}

fn luby(mut i: u64) -> u64 {
    // 1 1 2 1 1 2 4 ...
    let (mut size, mut seq) = (1u64, 0u32);
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

impl Solver {
    fn new(n: usize) -> Self {
        let mut s = Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assign: vec![UNDEF; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            phase: vec![false; n],
            activity: vec![0.0; n],
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::new(n),
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            seen: vec![false; n],
            learnt_count: 0,
            stats: SolveStats::default(),
        };
        for v in 0..n as u32 {
            s.heap.insert(v, &s.activity);
        }
        s
    }

    fn value(&self, l: Lit) -> u8 {
        let a = self.assign[lvar(l)];
        if a == UNDEF {
            UNDEF
        } else {
            a ^ (l & 1) as u8
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: u32) {
        let v = lvar(l);
        self.assign[v] = 1 ^ (l & 1) as u8;
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Adds an original clause at level 0. Returns false on a top-level
    /// conflict.
    fn add_clause(&mut self, clause: &[Literal]) -> bool {
        let mut lits: Vec<Lit> = clause.iter().map(|&l| lit_code(l)).collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] ^ 1 == w[1]) {
            return true;
        }
        lits.retain(|&l| self.value(l) != 0);
        if lits.iter().any(|&l| self.value(l) == 1) {
            return true;
        }
        match lits.len() {
            0 => false,
            1 => {
                self.enqueue(lits[0], NO_REASON);
                self.propagate().is_none()
            }
            _ => {
                self.attach(lits, false);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[lits[0] as usize].push(Watcher { cref, blocker: lits[1] });
        self.watches[lits[1] as usize].push(Watcher { cref, blocker: lits[0] });
        self.clauses.push(Clause { lits, learnt, deleted: false, activity: 0.0 });
        if learnt {
            self.learnt_count += 1;
        }
        cref
    }

    /// Unit propagation with two watched literals. Returns a conflicting
    /// clause.
    fn propagate(&mut self) -> Option<u32> {
        let mut conflict = None;
        while self.qhead < self.trail.len() && conflict.is_none() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = p ^ 1;
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let (mut i, mut j) = (0, 0);
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == 1 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                if self.clauses[cref].deleted {
                    continue;
                }
                let lits = &mut self.clauses[cref].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let watcher = Watcher { cref: w.cref, blocker: first };
                if first != w.blocker && self.value(first) == 1 {
                    ws[j] = watcher;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..self.clauses[cref].lits.len() {
                    let l = self.clauses[cref].lits[k];
                    if self.value(l) != 0 {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[l as usize].push(watcher);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = watcher;
                j += 1;
                if self.value(first) == 0 {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, w.cref);
                }
            }
            ws.truncate(j);
            self.watches[false_lit as usize] = ws;
        }
        conflict
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v as u32, &self.activity);
    }

    fn bump_clause(&mut self, cref: usize) {
        let c = &mut self.clauses[cref];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for c in self.clauses.iter_mut().filter(|c| c.learnt) {
                c.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP learning. Returns the learnt clause, asserting literal
    /// first, and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![0];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level();
        loop {
            self.bump_clause(confl as usize);
            let skip = p.is_some() as usize;
            for k in skip..self.clauses[confl as usize].lits.len() {
                let q = self.clauses[confl as usize].lits[k];
                let v = lvar(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[lvar(self.trail[idx])] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            self.seen[lvar(lit)] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[lvar(lit)];
        }
        learnt[0] = p.expect("conflict at a positive level") ^ 1;

        // drop literals implied by the rest of the clause
        let keep: Vec<bool> = learnt
            .iter()
            .enumerate()
            .map(|(i, &l)| i == 0 || !self.redundant(l))
            .collect();
        let clear: Vec<Lit> = learnt.clone();
        let mut it = keep.iter();
        learnt.retain(|_| *it.next().expect("same length"));
        for l in clear {
            self.seen[lvar(l)] = false;
        }

        let mut back = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[lvar(learnt[i])] > self.level[lvar(learnt[max_i])] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            back = self.level[lvar(learnt[1])];
        }
        (learnt, back)
    }

    /// A literal is redundant when every other literal of its reason is
    /// already in the clause or fixed at level 0.
    fn redundant(&self, l: Lit) -> bool {
        let r = self.reason[lvar(l)];
        if r == NO_REASON {
            return false;
        }
        self.clauses[r as usize].lits[1..]
            .iter()
            .all(|&q| self.seen[lvar(q)] || self.level[lvar(q)] == 0)
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = lvar(l);
            self.phase[v] = l & 1 == 0;
            self.assign[v] = UNDEF;
            self.reason[v] = NO_REASON;
            self.heap.insert(v as u32, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    fn locked(&self, cref: usize) -> bool {
        let l = self.clauses[cref].lits[0];
        self.value(l) == 1 && self.reason[lvar(l)] == cref as u32
    }

    fn reduce_learnts(&mut self) {
        let mut cands: Vec<usize> = (0..self.clauses.len())
            .filter(|&i| {
                let c = &self.clauses[i];
                c.learnt && !c.deleted && c.lits.len() > 2 && !self.locked(i)
            })
            .collect();
        cands.sort_by(|&a, &b| {
            self.clauses[a].activity.total_cmp(&self.clauses[b].activity).then(a.cmp(&b))
        });
        for &i in &cands[..cands.len() / 2] {
            let c = &mut self.clauses[i];
            c.deleted = true;
            c.lits = Vec::new();
            self.learnt_count -= 1;
        }
        for ws in &mut self.watches {
            ws.retain(|w| !self.clauses[w.cref as usize].deleted);
        }
    }

    fn search(&mut self, config: &SolverConfig) -> Result<SatResult, SolveError> {
        let start = Instant::now();
        if self.propagate().is_some() {
            return Ok(SatResult::Unsat);
        }
        let mut restart_round = 0u64;
        let mut budget = 100 * luby(restart_round);
        let mut since_restart = 0u64;
        let mut max_learnts = (self.clauses.len() / 3).max(2000) as f64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                since_restart += 1;
                if self.decision_level() == 0 {
                    return Ok(SatResult::Unsat);
                }
                let (learnt, back) = self.analyze(confl);
                self.cancel_until(back);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let asserting = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.bump_clause(cref as usize);
                    self.enqueue(asserting, cref);
                }
                self.stats.learnts += 1;
                self.var_inc /= 0.95;
                self.cla_inc /= 0.999;

                if let Some(limit) = config.conflict_limit {
                    if self.stats.conflicts >= limit {
                        return Err(SolveError::ConflictLimit(limit));
                    }
                }
                if let Some(limit) = config.time_limit {
                    if self.stats.conflicts.is_multiple_of(64) && start.elapsed() >= limit {
                        return Err(SolveError::TimeLimit(limit));
                    }
                }
                continue;
            }

            if config.restarts && since_restart >= budget {
                self.cancel_until(0);
                self.stats.restarts += 1;
                restart_round += 1;
                budget = 100 * luby(restart_round);
                since_restart = 0;
                continue;
            }
            if config.reduce_learnts && self.learnt_count as f64 >= max_learnts + self.trail.len() as f64 {
                self.reduce_learnts();
                max_learnts *= 1.1;
            }

            let next = loop {
                match self.heap.pop(&self.activity) {
                    None => break None,
                    Some(v) if self.assign[v as usize] == UNDEF => break Some(v),
                    Some(_) => {}
                }
            };
            let Some(v) = next else {
                let mut model = vec![false; self.assign.len() + 1];
                for (i, &a) in self.assign.iter().enumerate() {
                    model[i + 1] = a == 1;
                }
                return Ok(SatResult::Sat(model));
            };
            self.stats.decisions += 1;
            self.trail_lim.push(self.trail.len());
            let lit = 2 * v + (!self.phase[v as usize]) as u32;
            self.enqueue(lit, NO_REASON);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("malformed solver output: {0}")]
    SolverOutput(String),
    #[error("external solver: {0}")]
    External(String),
}

/// `p cnf` header and clauses, preceded by `c` lines labelling the
/// non-auxiliary variables.
pub fn write_dimacs(cnf: &CnfInstance) -> String {
    let mut out = String::new();
    for (i, label) in cnf.origins.iter().enumerate() {
        if *label != VarLabel::Aux {
            out.push_str(&format!("c {} {}\n", i + 1, label));
        }
    }
    out.push_str(&format!("p cnf {} {}\n", cnf.num_vars, cnf.clauses.len()));
    for c in &cnf.clauses {
        for l in c {
            out.push_str(&l.to_dimacs().to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}

pub fn parse_dimacs(text: &str) -> Result<CnfInstance, DimacsError> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    let err = |line: usize, msg: String| DimacsError::Malformed { line, msg };
    for (n, line) in text.lines().enumerate() {
        let n = n + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if header.is_some() || parts.len() != 4 || parts[1] != "cnf" {
                return Err(err(n, format!("bad header `{line}`")));
            }
            let vars = parts[2].parse().map_err(|_| err(n, "bad variable count".into()))?;
            let cls = parts[3].parse().map_err(|_| err(n, "bad clause count".into()))?;
            header = Some((vars, cls));
            continue;
        }
        let (vars, _) = header.ok_or_else(|| err(n, "clause before header".into()))?;
        for tok in line.split_whitespace() {
            let x: i64 = tok.parse().map_err(|_| err(n, format!("bad literal `{tok}`")))?;
            if x == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if x.unsigned_abs() > vars as u64 {
                return Err(err(n, format!("literal {x} exceeds {vars} variables")));
            } else {
                current.push(Literal::from_dimacs(x));
            }
        }
    }
    let (num_vars, count) = header.ok_or_else(|| err(0, "missing header".into()))?;
    if !current.is_empty() {
        return Err(err(0, "last clause is not terminated by 0".into()));
    }
    if clauses.len() != count {
        return Err(err(0, format!("header declares {count} clauses, found {}", clauses.len())));
    }
    Ok(CnfInstance { num_vars, clauses, origins: Vec::new() })
}

/// Reads either the `s SATISFIABLE` / `v ...` convention or the
/// `SAT` / model-line convention. Unmentioned variables default to false.
pub fn read_external_result(text: &str, num_vars: u32) -> Result<SatResult, DimacsError> {
    let bad = |m: &str| DimacsError::SolverOutput(m.to_string());
    let mut verdict: Option<bool> = None;
    let mut model = vec![false; num_vars as usize + 1];
    for line in text.lines() {
        let line = line.trim();
        let (tag, rest) = match line.split_once(char::is_whitespace) {
            Some((t, r)) => (t, r.trim()),
            None => (line, ""),
        };
        let status = match (tag, rest) {
            ("s", r) => Some(r),
            ("SAT" | "SATISFIABLE" | "UNSAT" | "UNSATISFIABLE" | "INDET" | "UNKNOWN", "") => {
                Some(tag)
            }
            _ => None,
        };
        if let Some(st) = status {
            verdict = Some(match st {
                "SAT" | "SATISFIABLE" => true,
                "UNSAT" | "UNSATISFIABLE" => false,
                other => return Err(bad(&format!("solver reported `{other}`"))),
            });
            continue;
        }
        if line.is_empty() || tag == "c" {
            continue;
        }
        let lits = if tag == "v" { rest } else { line };
        if verdict != Some(true) {
            return Err(bad(&format!("unexpected line `{line}`")));
        }
        for tok in lits.split_whitespace() {
            let x: i64 = tok.parse().map_err(|_| bad(&format!("bad literal `{tok}`")))?;
            if x == 0 {
                continue;
            }
            let v = x.unsigned_abs() as usize;
            if v > num_vars as usize {
                return Err(bad(&format!("literal {x} exceeds {num_vars} variables")));
            }
            model[v] = x > 0;
        }
    }
    match verdict {
        Some(true) => Ok(SatResult::Sat(model)),
        Some(false) => Ok(SatResult::Unsat),
        None => Err(bad("no verdict line")),
    }
}

/// Runs an external solver on `cnf`. `command` is a shell command; `{input}`
/// and `{output}` are replaced by file paths. Without `{input}` the DIMACS
/// path is appended. The result is read from `{output}` when present,
/// otherwise from standard output. A returned model is checked against
/// `cnf`.
pub fn solve_external(
    cnf: &CnfInstance,
    command: &str,
    timeout: Option<Duration>,
) -> Result<SatResult, DimacsError> {
    let ext = |m: String| DimacsError::External(m);
    let dir = tempfile::tempdir().map_err(|e| ext(e.to_string()))?;
    let input = dir.path().join("instance.cnf");
    let output = dir.path().join("result.txt");
    std::fs::write(&input, write_dimacs(cnf)).map_err(|e| ext(e.to_string()))?;
    let quote = |p: &Path| format!("'{}'", p.display().to_string().replace('\'', r"'\''"));
    let mut line = command.replace("{input}", &quote(&input)).replace("{output}", &quote(&output));
    if !command.contains("{input}") {
        line = format!("{line} {}", quote(&input));
    }
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&line)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| ext(format!("cannot start `{command}`: {e}")))?;
    let mut stdout = child.stdout.take().expect("piped");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        stdout.read_to_string(&mut s).map(|_| s)
    });
    let start = Instant::now();
    loop {
        if child.try_wait().map_err(|e| ext(e.to_string()))?.is_some() {
            break;
        }
        if timeout.is_some_and(|t| start.elapsed() >= t) {
            let _ = child.kill();
            let _ = child.wait();
            return Err(ext(format!("timed out after {:?}", timeout.unwrap_or_default())));
        }
        std::thread::sleep(Duration::from_millis(5));
    }
    let stdout = reader
        .join()
        .map_err(|_| ext("output reader panicked".into()))?
        .map_err(|e| ext(e.to_string()))?;
    let text = if command.contains("{output}") {
        std::fs::read_to_string(&output).map_err(|e| ext(format!("no result file: {e}")))?
    } else {
        stdout
    };
    let result = read_external_result(&text, cnf.num_vars)?;
    if let SatResult::Sat(m) = &result {
        if !cnf.satisfied_by(m) {
            return Err(ext("reported model violates the instance".into()));
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(xs: &[i64]) -> Vec<Literal> {
        xs.iter().map(|&x| Literal::from_dimacs(x)).collect()
    }

    fn cnf(num_vars: u32, clauses: &[&[i64]]) -> CnfInstance {
        CnfInstance {
            num_vars,
            clauses: clauses.iter().map(|c| lits(c)).collect(),
            origins: Vec::new(),
        }
    }

    #[test]
    fn trivial_instances() {
        assert_eq!(solve(&cnf(1, &[&[1]])).unwrap(), SatResult::Sat(vec![false, true]));
        assert_eq!(solve(&cnf(1, &[&[1], &[-1]])).unwrap(), SatResult::Unsat);
        assert_eq!(solve(&cnf(0, &[])).unwrap(), SatResult::Sat(vec![false]));
        assert_eq!(solve(&cnf(2, &[&[]])).unwrap(), SatResult::Unsat);
        assert!(solve(&cnf(3, &[&[1, -1], &[2, 3]])).unwrap().is_sat());
    }

    fn pigeonhole(holes: u32) -> CnfInstance {
        let pigeons = holes + 1;
        let var = |p: u32, h: u32| (p * holes + h + 1) as i64;
        let mut c = CnfInstance::new(pigeons * holes);
        for p in 0..pigeons {
            c.add_clause((0..holes).map(|h| Literal::from_dimacs(var(p, h))));
        }
        for h in 0..holes {
            for p in 0..pigeons {
                for q in p + 1..pigeons {
                    c.add_clause(lits(&[-var(p, h), -var(q, h)]));
                }
            }
        }
        c
    }

    #[test]
    fn pigeonhole_is_unsat() {
        for holes in 1..=6 {
            assert_eq!(solve(&pigeonhole(holes)).unwrap(), SatResult::Unsat, "{holes} holes");
        }
    }

    #[test]
    fn conflict_budget_is_not_unsat() {
        let cfg = SolverConfig { conflict_limit: Some(3), ..SolverConfig::default() };
        assert_eq!(solve_with(&pigeonhole(7), &cfg).unwrap_err(), SolveError::ConflictLimit(3));
    }

    fn random_3sat(rng: &mut impl rand::Rng, n: u32, m: usize) -> CnfInstance {
        let mut c = CnfInstance::new(n);
        for _ in 0..m {
            let clause: Vec<Literal> = (0..3)
                .map(|_| Literal { var: rng.gen_range(1..=n), positive: rng.gen_bool(0.5) })
                .collect();
            c.add_clause(clause);
        }
        c
    }

    #[test]
    fn random_3sat_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let n = rng.gen_range(4..=14);
            let c = random_3sat(&mut rng, n, (n as f64 * 4.3) as usize);
            let brute = (0u32..1 << n).any(|bits| {
                let m: Vec<bool> = (0..=n).map(|v| v > 0 && bits >> (v - 1) & 1 == 1).collect();
                c.satisfied_by(&m)
            });
            assert_eq!(solve(&c).unwrap().is_sat(), brute);
        }
    }

    #[test]
    fn hard_random_3sat_with_clause_deletion() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut conflicts = 0;
        for _ in 0..4 {
            let c = random_3sat(&mut rng, 200, 852);
            let (r, stats) = solve_with(&c, &SolverConfig::default()).unwrap();
            conflicts += stats.conflicts;
            if let SatResult::Sat(m) = r {
                assert!(c.satisfied_by(&m));
            }
        }
        assert!(conflicts > 2000, "{conflicts} conflicts");
    }

    #[test]
    fn luby_prefix() {
        let got: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(got, [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn tseitin_var_and_and() {
        let mut p = PropStore::new();
        let v1 = p.new_var(VarLabel::Aux);
        let x = p.var(v1);
        let c = tseitin(&p, x);
        assert_eq!(c.num_vars, 1);
        assert_eq!(c.clauses, vec![lits(&[1])]);

        let v2 = p.new_var(VarLabel::Aux);
        let y = p.var(v2);
        let a = p.and([x, y]);
        let c = tseitin(&p, a);
        assert_eq!(c.num_vars, 3);
        assert_eq!(
            c.clauses,
            vec![lits(&[-3, 1]), lits(&[-3, 2]), lits(&[3, -1, -2]), lits(&[3])]
        );
    }

    #[test]
    fn tseitin_constants() {
        let p = PropStore::new();
        assert!(tseitin(&p, PropRef::TRUE).clauses.is_empty());
        assert_eq!(tseitin(&p, PropRef::FALSE).clauses, vec![Vec::<Literal>::new()]);
        assert_eq!(solve(&tseitin(&p, PropRef::FALSE)).unwrap(), SatResult::Unsat);
    }

    #[test]
    fn tseitin_shares_nodes() {
        let mut p = PropStore::new();
        let v: Vec<PropRef> = (0..3)
            .map(|_| {
                let id = p.new_var(VarLabel::Aux);
                p.var(id)
            })
            .collect();
        let shared = p.or([v[0], v[1]]);
        let left = p.and([shared, v[2]]);
        let nv = p.not(v[2]);
        let right = p.and([shared, nv]);
        let root = p.or([left, right]);
        // distinct compound nodes: shared, left, right, root
        assert_eq!(tseitin(&p, root).num_vars, 3 + 4);
    }

    #[test]
    fn polarity_mode_is_smaller_and_equisatisfiable() {
        let mut p = PropStore::new();
        let v: Vec<PropRef> = (0..4)
            .map(|_| {
                let id = p.new_var(VarLabel::Aux);
                p.var(id)
            })
            .collect();
        let a = p.and([v[0], v[1]]);
        let b = p.or([v[2], v[3]]);
        let root = p.iff(a, b);
        let na = p.not(a);
        let root = p.and([root, na, v[2]]);
        let full = tseitin_with(&p, root, TseitinMode::Full);
        let pol = tseitin_with(&p, root, TseitinMode::Polarity);
        assert!(pol.clauses.len() < full.clauses.len());
        assert_eq!(solve(&full).unwrap().is_sat(), solve(&pol).unwrap().is_sat());
    }

    #[test]
    fn dimacs_exact_text() {
        let c = cnf(2, &[&[1, -2]]);
        assert_eq!(write_dimacs(&c), "p cnf 2 1\n1 -2 0\n");
        assert_eq!(parse_dimacs("p cnf 2 1\n1 -2 0\n").unwrap(), c);
    }

    #[test]
    fn dimacs_comments_and_errors() {
        let mut c = cnf(2, &[&[1, -2], &[2]]);
        c.origins = vec![VarLabel::Atom("(f>g)".into()), VarLabel::Aux];
        let text = write_dimacs(&c);
        assert!(text.starts_with("c 1 atom (f>g)\np cnf 2 2\n"));
        let back = parse_dimacs(&text).unwrap();
        assert_eq!((back.num_vars, back.clauses), (c.num_vars, c.clauses));
        assert!(parse_dimacs("1 0\n").is_err());
        assert!(parse_dimacs("p cnf 1 1\n2 0\n").is_err());
        assert!(parse_dimacs("p cnf 1 2\n1 0\n").is_err());
        assert!(parse_dimacs("p cnf 1 1\n1\n").is_err());
        assert_eq!(parse_dimacs("p cnf 2 1\n1\n-2 0\n%\n0\n").unwrap().clauses, vec![lits(&[1, -2])]);
    }

    #[test]
    fn external_result_formats() {
        assert_eq!(read_external_result("s UNSATISFIABLE\n", 2).unwrap(), SatResult::Unsat);
        assert_eq!(
            read_external_result("SAT\n1 -2 0\n", 2).unwrap(),
            SatResult::Sat(vec![false, true, false])
        );
        assert_eq!(
            read_external_result("c hi\ns SATISFIABLE\nv -1 2\nv 3 0\n", 3).unwrap(),
            SatResult::Sat(vec![false, false, true, true])
        );
        assert_eq!(read_external_result("UNSAT\n", 2).unwrap(), SatResult::Unsat);
        assert!(read_external_result("", 2).is_err());
        assert!(read_external_result("s UNKNOWN\n", 2).is_err());
        assert!(read_external_result("SAT\n1 x 0\n", 2).is_err());
        assert!(read_external_result("SAT\n5 0\n", 2).is_err());
    }

    #[test]
    fn external_solver_via_shell() {
        let c = cnf(2, &[&[1, -2], &[2]]);
        let r = solve_external(&c, "printf 'SAT\\n1 2 0\\n' > {output}; true", None).unwrap();
        assert_eq!(r, SatResult::Sat(vec![false, true, true]));
        let r = solve_external(&c, "echo 's UNSATISFIABLE' #", None).unwrap();
        assert_eq!(r, SatResult::Unsat);
        // a model that violates the instance is refused
        assert!(solve_external(&c, "echo SAT; echo '-1 -2 0' #", None).is_err());
        assert!(solve_external(&c, "sleep 5 #", Some(Duration::from_millis(50))).is_err());
    }
}
