//! Partial-order constraints: negation-free propositional formulas over
//! atoms `(f > g)` and `(f = g)`.
//!
//! Formulas live in a [`PoStore`], an arena that hash-conses every node so
//! that equal sub-formulas are shared and identified by a copyable
//! [`PoRef`]. Node construction simplifies on the fly: constants never occur
//! below the root, nested connectives are flattened and `And`/`Or` nodes
//! always have at least two children.
//!
//! The semantics used throughout is the integer one: a [`Solution`] maps
//! every symbol to an integer and `(f > g)` holds iff `θ(f) > θ(g)`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use thiserror::Error;

/// Index of a symbol interned in a [`PoStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Gt,
    Eq,
}

/// A primitive constraint between two distinct symbols. `Eq` atoms are
/// oriented so that `lhs` has the smaller name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub lhs: SymId,
    pub rel: Rel,
    pub rhs: SymId,
}

/// Handle to a formula node in a [`PoStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PoRef(u32);

impl PoRef {
    pub const TRUE: PoRef = PoRef(0);
    pub const FALSE: PoRef = PoRef(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PoNode {
    True,
    False,
    Atom(Atom),
    And(Box<[PoRef]>),
    Or(Box<[PoRef]>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PocError {
    #[error("solution does not assign symbol `{0}`")]
    MissingSymbol(String),
    #[error("brute-force search limited to {limit} symbols, formula has {found}")]
    TooManySymbols { limit: usize, found: usize },
}

/// Integer assignment to symbol names. Only the relative order of values is
/// meaningful.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Solution(BTreeMap<String, u64>);

impl Solution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, sym: impl Into<String>, value: u64) {
        self.0.insert(sym.into(), value);
    }

    pub fn get(&self, sym: &str) -> Option<u64> {
        self.0.get(sym).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<S: Into<String>> FromIterator<(S, u64)> for Solution {
    fn from_iter<I: IntoIterator<Item = (S, u64)>>(iter: I) -> Self {
        Solution(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

/// An atom of a model, written over names and including reflexive `(f=f)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelAtom {
    pub lhs: String,
    pub rel: Rel,
    pub rhs: String,
}

impl ModelAtom {
    pub fn new(lhs: &str, rel: Rel, rhs: &str) -> Self {
        ModelAtom { lhs: lhs.into(), rel, rhs: rhs.into() }
    }
}

/// Directed graph over the symbols of a formula: an edge `f -> g` for every
/// atom `(f>g)`, and edges both ways for `(f=g)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainGraph {
    pub vertices: BTreeSet<SymId>,
    pub edges: BTreeSet<(SymId, SymId)>,
}

impl DomainGraph {
    /// Strongly connected components in reverse topological order: every
    /// edge between two components points from a later one to an earlier one.
    pub fn sccs(&self) -> Vec<Vec<SymId>> {
        let mut g: DiGraph<SymId, ()> = DiGraph::new();
        let mut idx: HashMap<SymId, NodeIndex> = HashMap::new();
        for &v in &self.vertices {
            idx.insert(v, g.add_node(v));
        }
        for &(a, b) in &self.edges {
            g.add_edge(idx[&a], idx[&b], ());
        }
        tarjan_scc(&g)
            .into_iter()
            .map(|comp| {
                let mut c: Vec<SymId> = comp.into_iter().map(|n| g[n]).collect();
                c.sort();
                c
            })
            .collect()
    }
}

/// One member of an SCC-partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccPart {
    pub symbols: Vec<SymId>,
    pub formula: PoRef,
}

#[derive(Debug, Clone)]
pub struct PoStore {
    nodes: Vec<PoNode>,
    index: HashMap<PoNode, PoRef>,
    names: Vec<String>,
    sym_index: HashMap<String, SymId>,
}

impl Default for PoStore {
    fn default() -> Self {
        Self::new()
    }
}

impl PoStore {
    pub fn new() -> Self {
        let mut s = PoStore {
            nodes: Vec::new(),
            index: HashMap::new(),
            names: Vec::new(),
            sym_index: HashMap::new(),
        };
        s.intern(PoNode::True);
        s.intern(PoNode::False);
        s
    }

    fn intern(&mut self, node: PoNode) -> PoRef {
        if let Some(&r) = self.index.get(&node) {
            return r;
        }
        let r = PoRef(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.index.insert(node, r);
        r
    }

    pub fn node(&self, r: PoRef) -> &PoNode {
        &self.nodes[r.index()]
    }

    /// Number of distinct nodes allocated so far.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 2
    }

    pub fn symbol(&mut self, name: &str) -> SymId {
        if let Some(&s) = self.sym_index.get(name) {
            return s;
        }
        let s = SymId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.sym_index.insert(name.to_string(), s);
        s
    }

    pub fn lookup_symbol(&self, name: &str) -> Option<SymId> {
        self.sym_index.get(name).copied()
    }

    pub fn name(&self, s: SymId) -> &str {
        &self.names[s.0 as usize]
    }

    /// `(f rel g)` with the atom invariants applied: reflexive atoms become
    /// constants and equalities are oriented by name.
    pub fn atom(&mut self, f: SymId, rel: Rel, g: SymId) -> PoRef {
        if f == g {
            return match rel {
                Rel::Gt => PoRef::FALSE,
                Rel::Eq => PoRef::TRUE,
            };
        }
        let (lhs, rhs) = match rel {
            Rel::Eq if self.name(g) < self.name(f) => (g, f),
            _ => (f, g),
        };
        self.intern(PoNode::Atom(Atom { lhs, rel, rhs }))
    }

    pub fn gt(&mut self, f: &str, g: &str) -> PoRef {
        let (f, g) = (self.symbol(f), self.symbol(g));
        self.atom(f, Rel::Gt, g)
    }

    pub fn eq(&mut self, f: &str, g: &str) -> PoRef {
        let (f, g) = (self.symbol(f), self.symbol(g));
        self.atom(f, Rel::Eq, g)
    }

    /// `(f>g) ∨ (f=g)`.
    pub fn ge(&mut self, f: &str, g: &str) -> PoRef {
        let a = self.gt(f, g);
        let b = self.eq(f, g);
        self.or([a, b])
    }

    pub fn and(&mut self, parts: impl IntoIterator<Item = PoRef>) -> PoRef {
        self.connective(parts, true)
    }

    pub fn or(&mut self, parts: impl IntoIterator<Item = PoRef>) -> PoRef {
        self.connective(parts, false)
    }

    fn connective(&mut self, parts: impl IntoIterator<Item = PoRef>, is_and: bool) -> PoRef {
        let (unit, zero) = if is_and {
            (PoRef::TRUE, PoRef::FALSE)
        } else {
            (PoRef::FALSE, PoRef::TRUE)
        };
        let mut kids = Vec::new();
        for p in parts {
            if p == zero {
                return zero;
            }
            if p == unit {
                continue;
            }
            match (&self.nodes[p.index()], is_and) {
                (PoNode::And(cs), true) | (PoNode::Or(cs), false) => kids.extend_from_slice(cs),
                _ => kids.push(p),
            }
        }
        kids.sort_unstable();
        kids.dedup();
        match kids.len() {
            0 => unit,
            1 => kids[0],
            _ if is_and => self.intern(PoNode::And(kids.into())),
            _ => self.intern(PoNode::Or(kids.into())),
        }
    }

    /// Pushes a negation down to the atoms, using totality of the order:
    /// `¬(f>g) = (g>f) ∨ (f=g)` and `¬(f=g) = (f>g) ∨ (g>f)`.
    pub fn negate(&mut self, phi: PoRef) -> PoRef {
        let mut memo = HashMap::new();
        self.negate_memo(phi, &mut memo)
    }

    fn negate_memo(&mut self, phi: PoRef, memo: &mut HashMap<PoRef, PoRef>) -> PoRef {
        if let Some(&r) = memo.get(&phi) {
            return r;
        }
        let r = match self.nodes[phi.index()].clone() {
            PoNode::True => PoRef::FALSE,
            PoNode::False => PoRef::TRUE,
            PoNode::Atom(Atom { lhs, rel: Rel::Gt, rhs }) => {
                let a = self.atom(rhs, Rel::Gt, lhs);
                let b = self.atom(lhs, Rel::Eq, rhs);
                self.or([a, b])
            }
            PoNode::Atom(Atom { lhs, rel: Rel::Eq, rhs }) => {
                let a = self.atom(lhs, Rel::Gt, rhs);
                let b = self.atom(rhs, Rel::Gt, lhs);
                self.or([a, b])
            }
            PoNode::And(cs) => {
                let ns: Vec<PoRef> = cs.iter().map(|&c| self.negate_memo(c, memo)).collect();
                self.or(ns)
            }
            PoNode::Or(cs) => {
                let ns: Vec<PoRef> = cs.iter().map(|&c| self.negate_memo(c, memo)).collect();
                self.and(ns)
            }
        };
        memo.insert(phi, r);
        r
    }

    /// Nodes reachable from `phi`, children before parents.
    pub fn reachable(&self, phi: PoRef) -> Vec<PoRef> {
        let mut seen = HashSet::new();
        let mut stack = vec![phi];
        while let Some(r) = stack.pop() {
            if !seen.insert(r) {
                continue;
            }
            if let PoNode::And(cs) | PoNode::Or(cs) = &self.nodes[r.index()] {
                stack.extend(cs.iter().copied());
            }
        }
        let mut out: Vec<PoRef> = seen.into_iter().collect();
        // children are always interned before their parents
        out.sort_unstable();
        out
    }

    pub fn atoms(&self, phi: PoRef) -> Vec<Atom> {
        let mut out: Vec<Atom> = self
            .reachable(phi)
            .into_iter()
            .filter_map(|r| match self.nodes[r.index()] {
                PoNode::Atom(a) => Some(a),
                _ => None,
            })
            .collect();
        out.sort_unstable_by(|a, b| self.atom_key(a).cmp(&self.atom_key(b)));
        out
    }

    fn atom_key<'a>(&'a self, a: &Atom) -> (&'a str, Rel, &'a str) {
        (self.name(a.lhs), a.rel, self.name(a.rhs))
    }

    /// Symbols occurring in `phi`, sorted by name.
    pub fn symbols(&self, phi: PoRef) -> Vec<SymId> {
        let mut set = BTreeSet::new();
        for a in self.atoms(phi) {
            set.insert(a.lhs);
            set.insert(a.rhs);
        }
        let mut out: Vec<SymId> = set.into_iter().collect();
        out.sort_by(|a, b| self.name(*a).cmp(self.name(*b)));
        out
    }

    pub fn symbol_names(&self, phi: PoRef) -> Vec<String> {
        self.symbols(phi).into_iter().map(|s| self.name(s).to_string()).collect()
    }

    /// Number of nodes of `phi` viewed as a DAG.
    pub fn dag_size(&self, phi: PoRef) -> usize {
        self.reachable(phi).len()
    }

    pub fn domain_graph(&self, phi: PoRef) -> DomainGraph {
        let mut vertices = BTreeSet::new();
        let mut edges = BTreeSet::new();
        for a in self.atoms(phi) {
            vertices.insert(a.lhs);
            vertices.insert(a.rhs);
            edges.insert((a.lhs, a.rhs));
            if a.rel == Rel::Eq {
                edges.insert((a.rhs, a.lhs));
            }
        }
        DomainGraph { vertices, edges }
    }

    /// Replaces every atom not entirely within `keep` by `true`.
    pub fn restrict(&mut self, phi: PoRef, keep: &HashSet<SymId>) -> PoRef {
        let mut memo: HashMap<PoRef, PoRef> = HashMap::new();
        for r in self.reachable(phi) {
            let out = match self.nodes[r.index()].clone() {
                PoNode::True | PoNode::False => r,
                PoNode::Atom(a) => {
                    if keep.contains(&a.lhs) && keep.contains(&a.rhs) {
                        r
                    } else {
                        PoRef::TRUE
                    }
                }
                PoNode::And(cs) => {
                    let ns: Vec<PoRef> = cs.iter().map(|c| memo[c]).collect();
                    self.and(ns)
                }
                PoNode::Or(cs) => {
                    let ns: Vec<PoRef> = cs.iter().map(|c| memo[c]).collect();
                    self.or(ns)
                }
            };
            memo.insert(r, out);
        }
        memo[&phi]
    }

    /// Restriction of `phi` to each strongly connected component of its
    /// domain graph, in the order returned by [`DomainGraph::sccs`].
    /// Components whose restriction is `true` are kept so that callers can
    /// see the full decomposition.
    ///
    /// Satisfiability of `phi` implies satisfiability of every part. The
    /// converse needs the parts' solutions to be compatible, which
    /// [`combine_scc_solutions`] establishes or refutes.
    pub fn scc_partition(&mut self, phi: PoRef) -> Vec<SccPart> {
        let graph = self.domain_graph(phi);
        let comps = graph.sccs();
        if comps.len() == 1 {
            return vec![SccPart { symbols: comps[0].clone(), formula: phi }];
        }
        comps
            .into_iter()
            .map(|symbols| {
                let keep: HashSet<SymId> = symbols.iter().copied().collect();
                let formula = self.restrict(phi, &keep);
                SccPart { symbols, formula }
            })
            .collect()
    }

    pub fn eval(&self, phi: PoRef, theta: &Solution) -> Result<bool, PocError> {
        let order = self.reachable(phi);
        let mut val: HashMap<PoRef, bool> = HashMap::with_capacity(order.len());
        for r in order {
            let v = match &self.nodes[r.index()] {
                PoNode::True => true,
                PoNode::False => false,
                PoNode::Atom(a) => {
                    let look = |s: SymId| {
                        theta
                            .get(self.name(s))
                            .ok_or_else(|| PocError::MissingSymbol(self.name(s).to_string()))
                    };
                    let (x, y) = (look(a.lhs)?, look(a.rhs)?);
                    match a.rel {
                        Rel::Gt => x > y,
                        Rel::Eq => x == y,
                    }
                }
                PoNode::And(cs) => cs.iter().all(|c| val[c]),
                PoNode::Or(cs) => cs.iter().any(|c| val[c]),
            };
            val.insert(r, v);
        }
        Ok(val[&phi])
    }

    /// Exhaustive search over all assignments of the formula's `n` symbols
    /// to `{1..n}`, symbols in name order with the last one varying fastest.
    /// Returns the first satisfying assignment.
    pub fn brute_force_sat(
        &self,
        phi: PoRef,
        max_symbols: usize,
    ) -> Result<Option<Solution>, PocError> {
        let syms = self.symbols(phi);
        let n = syms.len();
        if n > max_symbols {
            return Err(PocError::TooManySymbols { limit: max_symbols, found: n });
        }
        let slot: HashMap<SymId, usize> = syms.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let order = self.reachable(phi);
        let pos: HashMap<PoRef, usize> = order.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        // flatten into an index-based program for the inner loop
        enum Op {
            Const(bool),
            Gt(usize, usize),
            Eq(usize, usize),
            And(Vec<usize>),
            Or(Vec<usize>),
        }
        let prog: Vec<Op> = order
            .iter()
            .map(|r| match &self.nodes[r.index()] {
                PoNode::True => Op::Const(true),
                PoNode::False => Op::Const(false),
                PoNode::Atom(a) => match a.rel {
                    Rel::Gt => Op::Gt(slot[&a.lhs], slot[&a.rhs]),
                    Rel::Eq => Op::Eq(slot[&a.lhs], slot[&a.rhs]),
                },
                PoNode::And(cs) => Op::And(cs.iter().map(|c| pos[c]).collect()),
                PoNode::Or(cs) => Op::Or(cs.iter().map(|c| pos[c]).collect()),
            })
            .collect();
        let mut vals = vec![1u64; n];
        let mut buf = vec![false; prog.len()];
        loop {
            for (i, op) in prog.iter().enumerate() {
                buf[i] = match op {
                    Op::Const(b) => *b,
                    Op::Gt(a, b) => vals[*a] > vals[*b],
                    Op::Eq(a, b) => vals[*a] == vals[*b],
                    Op::And(cs) => cs.iter().all(|&c| buf[c]),
                    Op::Or(cs) => cs.iter().any(|&c| buf[c]),
                };
            }
            if buf[prog.len() - 1] {
                return Ok(Some(
                    syms.iter().zip(&vals).map(|(&s, &v)| (self.name(s), v)).collect(),
                ));
            }
            // odometer increment
            let mut i = n;
            loop {
                if i == 0 {
                    return Ok(None);
                }
                i -= 1;
                if vals[i] < n as u64 {
                    vals[i] += 1;
                    break;
                }
                vals[i] = 1;
            }
        }
    }

    pub fn display(&self, phi: PoRef) -> PoDisplay<'_> {
        PoDisplay { store: self, root: phi }
    }

    pub fn display_atom(&self, a: &Atom) -> String {
        let op = match a.rel {
            Rel::Gt => ">",
            Rel::Eq => "=",
        };
        format!("({}{}{})", self.name(a.lhs), op, self.name(a.rhs))
    }
}

/// Infix rendering with `/\` and `\/`.
pub struct PoDisplay<'a> {
    store: &'a PoStore,
    root: PoRef,
}

impl PoDisplay<'_> {
    fn write(&self, f: &mut fmt::Formatter<'_>, r: PoRef, nested: bool) -> fmt::Result {
        match self.store.node(r) {
            PoNode::True => f.write_str("true"),
            PoNode::False => f.write_str("false"),
            PoNode::Atom(a) => f.write_str(&self.store.display_atom(a)),
            PoNode::And(cs) | PoNode::Or(cs) => {
                let sep = if matches!(self.store.node(r), PoNode::And(_)) {
                    " /\\ "
                } else {
                    " \\/ "
                };
                if nested {
                    f.write_str("(")?;
                }
                for (i, &c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    self.write(f, c, true)?;
                }
                if nested {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for PoDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.root, false)
    }
}

/// The set `{(f R g) | θ(f) R θ(g)}` over `symbols`, including reflexive
/// equalities and both orientations of each equality.
pub fn solution_to_model(theta: &Solution, symbols: &[String]) -> BTreeSet<ModelAtom> {
    let mut out = BTreeSet::new();
    for f in symbols {
        for g in symbols {
            let (Some(x), Some(y)) = (theta.get(f), theta.get(g)) else {
                continue;
            };
            if x > y {
                out.insert(ModelAtom::new(f, Rel::Gt, g));
            } else if x == y {
                out.insert(ModelAtom::new(f, Rel::Eq, g));
            }
        }
    }
    out
}

/// Reads a total preorder off a model and numbers its classes `1..`: sort
/// the symbols ascending by the model's order, then walk the chain,
/// incrementing on every strict step. The model must satisfy the partial
/// order axioms together with comparability.
pub fn model_to_solution(model: &BTreeSet<ModelAtom>, symbols: &[String]) -> Solution {
    let holds = |f: &str, rel: Rel, g: &str| model.contains(&ModelAtom::new(f, rel, g));
    let mut chain: Vec<&String> = symbols.iter().collect();
    chain.sort_by(|a, b| {
        if holds(a, Rel::Gt, b) {
            std::cmp::Ordering::Greater
        } else if holds(b, Rel::Gt, a) {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Equal
        }
    });
    let mut theta = Solution::new();
    let mut value = 1;
    for (i, f) in chain.iter().enumerate() {
        if i > 0 && holds(f, Rel::Gt, chain[i - 1]) {
            value += 1;
        }
        theta.insert(f.as_str(), value);
    }
    theta
}

/// Glues solutions of the parts of an SCC-partition into one assignment.
/// Components are stacked in topological order so every atom between two
/// components holds. Returns `None` unless the result satisfies `phi`, which
/// can fail when restrictions discarded atoms of other components that
/// mattered.
pub fn combine_scc_solutions(
    store: &PoStore,
    phi: PoRef,
    parts: &[SccPart],
    solutions: &[Solution],
) -> Option<Solution> {
    let mut combined = Solution::new();
    let mut offset = 0u64;
    for (part, sol) in parts.iter().zip(solutions) {
        let mut top = 0u64;
        for &s in &part.symbols {
            let v = sol.get(store.name(s)).unwrap_or(0);
            top = top.max(v);
            combined.insert(store.name(s), offset + v);
        }
        offset += top + 1;
    }
    match store.eval(phi, &combined) {
        Ok(true) => Some(combined),
        _ => None,
    }
}
