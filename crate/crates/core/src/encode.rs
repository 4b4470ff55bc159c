//! Propositional encodings of partial-order constraints.
//!
//! Two encodings share the skeleton `⟦φ⟧`, the formula with each atom
//! replaced by a propositional variable:
//!
//! * the symbol-based encoding gives every symbol a `k`-bit index,
//!   `k = max(1, ⌈log2 n⌉)`, and ties each atom variable to a bit comparator;
//! * the atom-based encoding instead adds the partial-order axioms over the
//!   atom variables explicitly, which costs `Θ(n²)` variables and `Θ(n³)`
//!   constraints.
//!
//! Values decoded from the symbol-based encoding range over `0..2^k`. No
//! upper bound is imposed: any satisfiable constraint has a solution in
//! `1..=n`, which fits.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poc::{Atom, PoNode, PoRef, PoStore, Rel, Solution, SymId};

/// Propositional variable id, dense from 1.
pub type PropVar = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarLabel {
    /// Bit `index` (1 = least significant) of a symbol's index.
    Bit { symbol: String, index: u32 },
    /// Stands for an atom of the source constraint.
    Atom(String),
    /// Introduced by CNF conversion.
    Aux,
}

impl fmt::Display for VarLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarLabel::Bit { symbol, index } => write!(f, "bit {index} of {symbol}"),
            VarLabel::Atom(a) => write!(f, "atom {a}"),
            VarLabel::Aux => f.write_str("aux"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PropRef(u32);

impl PropRef {
    pub const TRUE: PropRef = PropRef(0);
    pub const FALSE: PropRef = PropRef(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PropNode {
    True,
    False,
    Var(PropVar),
    Not(PropRef),
    And(Box<[PropRef]>),
    Or(Box<[PropRef]>),
    Iff(PropRef, PropRef),
}

/// Hash-consed propositional formulas plus the variable allocator.
#[derive(Debug, Clone)]
pub struct PropStore {
    nodes: Vec<PropNode>,
    index: HashMap<PropNode, PropRef>,
    labels: Vec<VarLabel>,
}

impl Default for PropStore {
    fn default() -> Self {
        Self::new()
    }
}

impl PropStore {
    pub fn new() -> Self {
        let mut s = PropStore {
            nodes: Vec::new(),
            index: HashMap::new(),
            labels: Vec::new(),
        };
        s.intern(PropNode::True);
        s.intern(PropNode::False);
        s
    }

    fn intern(&mut self, node: PropNode) -> PropRef {
        if let Some(&r) = self.index.get(&node) {
            return r;
        }
        let r = PropRef(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.index.insert(node, r);
        r
    }

    pub fn node(&self, r: PropRef) -> &PropNode {
        &self.nodes[r.index()]
    }

    pub fn num_vars(&self) -> u32 {
        self.labels.len() as u32
    }

    /// Label of variable `v` (1-based).
    pub fn label(&self, v: PropVar) -> &VarLabel {
        &self.labels[v as usize - 1]
    }

    pub fn labels(&self) -> &[VarLabel] {
        &self.labels
    }

    pub fn new_var(&mut self, label: VarLabel) -> PropVar {
        self.labels.push(label);
        self.labels.len() as PropVar
    }

    pub fn var(&mut self, v: PropVar) -> PropRef {
        debug_assert!(v >= 1 && v <= self.num_vars());
        self.intern(PropNode::Var(v))
    }

    pub fn constant(&self, b: bool) -> PropRef {
        if b {
            PropRef::TRUE
        } else {
            PropRef::FALSE
        }
    }

    pub fn not(&mut self, a: PropRef) -> PropRef {
        match self.nodes[a.index()] {
            PropNode::True => PropRef::FALSE,
            PropNode::False => PropRef::TRUE,
            PropNode::Not(x) => x,
            _ => self.intern(PropNode::Not(a)),
        }
    }

    pub fn and(&mut self, parts: impl IntoIterator<Item = PropRef>) -> PropRef {
        self.connective(parts, true)
    }

    pub fn or(&mut self, parts: impl IntoIterator<Item = PropRef>) -> PropRef {
        self.connective(parts, false)
    }

    pub fn implies(&mut self, a: PropRef, b: PropRef) -> PropRef {
        let na = self.not(a);
        self.or([na, b])
    }

    fn connective(&mut self, parts: impl IntoIterator<Item = PropRef>, is_and: bool) -> PropRef {
        let (unit, zero) = if is_and {
            (PropRef::TRUE, PropRef::FALSE)
        } else {
            (PropRef::FALSE, PropRef::TRUE)
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
                (PropNode::And(cs), true) | (PropNode::Or(cs), false) => {
                    kids.extend_from_slice(cs)
                }
                _ => kids.push(p),
            }
        }
        kids.sort_unstable();
        kids.dedup();
        let present: HashSet<PropRef> = kids.iter().copied().collect();
        let complementary = kids
            .iter()
            .any(|&k| matches!(self.nodes[k.index()], PropNode::Not(x) if present.contains(&x)));
        if complementary {
            return zero;
        }
        match kids.len() {
            0 => unit,
            1 => kids[0],
            _ if is_and => self.intern(PropNode::And(kids.into())),
            _ => self.intern(PropNode::Or(kids.into())),
        }
    }

    pub fn iff(&mut self, a: PropRef, b: PropRef) -> PropRef {
        if a == b {
            return PropRef::TRUE;
        }
        match (&self.nodes[a.index()], &self.nodes[b.index()]) {
            (PropNode::True, _) => return b,
            (_, PropNode::True) => return a,
            (PropNode::False, _) => return self.not(b),
            (_, PropNode::False) => return self.not(a),
            (PropNode::Not(x), _) if *x == b => return PropRef::FALSE,
            (_, PropNode::Not(y)) if *y == a => return PropRef::FALSE,
            _ => {}
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.intern(PropNode::Iff(a, b))
    }

    /// Nodes reachable from `root`, children first.
    pub fn reachable(&self, root: PropRef) -> Vec<PropRef> {
        let mut seen = HashSet::new();
        let mut stack = vec![root];
        while let Some(r) = stack.pop() {
            if !seen.insert(r) {
                continue;
            }
            match &self.nodes[r.index()] {
                PropNode::Not(x) => stack.push(*x),
                PropNode::And(cs) | PropNode::Or(cs) => stack.extend(cs.iter().copied()),
                PropNode::Iff(a, b) => stack.extend([*a, *b]),
                _ => {}
            }
        }
        let mut out: Vec<PropRef> = seen.into_iter().collect();
        out.sort_unstable();
        out
    }

    /// Evaluates under `model`, indexed by variable id (index 0 unused).
    pub fn eval(&self, root: PropRef, model: &[bool]) -> bool {
        let order = self.reachable(root);
        let mut val: HashMap<PropRef, bool> = HashMap::with_capacity(order.len());
        for r in order {
            let v = match &self.nodes[r.index()] {
                PropNode::True => true,
                PropNode::False => false,
                PropNode::Var(x) => model[*x as usize],
                PropNode::Not(x) => !val[x],
                PropNode::And(cs) => cs.iter().all(|c| val[c]),
                PropNode::Or(cs) => cs.iter().any(|c| val[c]),
                PropNode::Iff(a, b) => val[a] == val[b],
            };
            val.insert(r, v);
        }
        val[&root]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("symbol `{0}` has no bit vector in this coding")]
    UnknownSymbol(String),
    #[error("model does not assign variable {0}")]
    IncompleteModel(PropVar),
}

/// Per-symbol bit vectors. `bits[f][0]` is the least significant bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolCoding {
    pub width: u32,
    pub bits: BTreeMap<String, Vec<PropVar>>,
}

/// `max(1, ⌈log2 n⌉)`.
pub fn bit_width(n: usize) -> u32 {
    if n <= 2 {
        1
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

impl SymbolCoding {
    /// Allocates `width` fresh variables for each symbol, in the given order.
    pub fn allocate(props: &mut PropStore, symbols: &[String]) -> Self {
        let width = bit_width(symbols.len());
        let mut bits = BTreeMap::new();
        for s in symbols {
            let v: Vec<PropVar> = (1..=width)
                .map(|i| props.new_var(VarLabel::Bit { symbol: s.clone(), index: i }))
                .collect();
            bits.insert(s.clone(), v);
        }
        SymbolCoding { width, bits }
    }

    fn vector(&self, f: &str) -> Result<&[PropVar], EncodeError> {
        self.bits
            .get(f)
            .map(Vec::as_slice)
            .ok_or_else(|| EncodeError::UnknownSymbol(f.to_string()))
    }
}

/// `⋀i (fi ↔ gi)`.
pub fn encode_eq_bits(
    props: &mut PropStore,
    coding: &SymbolCoding,
    f: &str,
    g: &str,
) -> Result<PropRef, EncodeError> {
    let (fv, gv) = (coding.vector(f)?.to_vec(), coding.vector(g)?.to_vec());
    let parts: Vec<PropRef> = fv
        .iter()
        .zip(&gv)
        .map(|(&a, &b)| {
            let (a, b) = (props.var(a), props.var(b));
            props.iff(a, b)
        })
        .collect();
    Ok(props.and(parts))
}

/// Unsigned `f > g` on the bit vectors, decided from the most significant
/// bit down.
pub fn encode_gt_bits(
    props: &mut PropStore,
    coding: &SymbolCoding,
    f: &str,
    g: &str,
) -> Result<PropRef, EncodeError> {
    let (fv, gv) = (coding.vector(f)?.to_vec(), coding.vector(g)?.to_vec());
    // width 1 base case, then wrap one more significant bit at a time
    let mut acc = PropRef::FALSE;
    for (i, (&a, &b)) in fv.iter().zip(&gv).enumerate() {
        let (fa, gb) = (props.var(a), props.var(b));
        let ngb = props.not(gb);
        let wins = props.and([fa, ngb]);
        acc = if i == 0 {
            wins
        } else {
            let same = props.iff(fa, gb);
            let rest = props.and([same, acc]);
            props.or([wins, rest])
        };
    }
    Ok(acc)
}

/// Maps `⟦φ⟧` into `props`, each atom becoming the variable chosen by
/// `var_of`.
fn skeleton(
    store: &PoStore,
    phi: PoRef,
    props: &mut PropStore,
    mut var_of: impl FnMut(&mut PropStore, &Atom) -> PropRef,
) -> PropRef {
    let mut memo: HashMap<PoRef, PropRef> = HashMap::new();
    for r in store.reachable(phi) {
        let out = match store.node(r) {
            PoNode::True => PropRef::TRUE,
            PoNode::False => PropRef::FALSE,
            PoNode::Atom(a) => var_of(props, a),
            PoNode::And(cs) => {
                let ns: Vec<PropRef> = cs.iter().map(|c| memo[c]).collect();
                props.and(ns)
            }
            PoNode::Or(cs) => {
                let ns: Vec<PropRef> = cs.iter().map(|c| memo[c]).collect();
                props.or(ns)
            }
        };
        memo.insert(r, out);
    }
    memo[&phi]
}

#[derive(Debug, Clone)]
pub struct SymbolEncoding {
    pub props: PropStore,
    pub root: PropRef,
    pub coding: SymbolCoding,
    pub atom_vars: BTreeMap<Atom, PropVar>,
}

/// `⟦φ⟧ ∧ ⋀a (⟦a⟧ ↔ comparator(a))`.
pub fn encode_symbol_based(store: &PoStore, phi: PoRef) -> SymbolEncoding {
    let mut props = PropStore::new();
    let names = store.symbol_names(phi);
    let coding = SymbolCoding::allocate(&mut props, &names);
    let mut atom_vars = BTreeMap::new();
    for a in store.atoms(phi) {
        let v = props.new_var(VarLabel::Atom(store.display_atom(&a)));
        atom_vars.insert(a, v);
    }
    let body = skeleton(store, phi, &mut props, |p, a| p.var(atom_vars[a]));
    let mut parts = vec![body];
    for (a, &v) in &atom_vars {
        let (f, g) = (store.name(a.lhs), store.name(a.rhs));
        let cmp = match a.rel {
            Rel::Gt => encode_gt_bits(&mut props, &coding, f, g),
            Rel::Eq => encode_eq_bits(&mut props, &coding, f, g),
        }
        .expect("coding covers every symbol of the formula");
        let proxy = props.var(v);
        parts.push(props.iff(proxy, cmp));
    }
    let root = props.and(parts);
    SymbolEncoding { props, root, coding, atom_vars }
}

/// `θ(f)` is the unsigned value of `f`'s bits under `model`.
pub fn decode_solution(model: &[bool], coding: &SymbolCoding) -> Result<Solution, EncodeError> {
    let mut theta = Solution::new();
    for (f, bits) in &coding.bits {
        let mut value = 0u64;
        for (i, &b) in bits.iter().enumerate() {
            let bit = *model.get(b as usize).ok_or(EncodeError::IncompleteModel(b))?;
            if bit {
                value |= 1 << i;
            }
        }
        theta.insert(f.as_str(), value);
    }
    Ok(theta)
}

/// Which axiom families the atom-based encoding emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxiomMode {
    /// All families; required once equalities occur.
    Full,
    /// Transitivity and asymmetry of `>` only; sound for constraints without
    /// equality atoms.
    Reduced,
}

/// Variables of the atom-based encoding, indexed by symbol position.
#[derive(Debug, Clone)]
pub struct AtomTable {
    pub symbols: Vec<String>,
    pub gt: Vec<Vec<PropVar>>,
    pub eq: Option<Vec<Vec<PropVar>>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AxiomCounts {
    pub reflexivity: usize,
    pub symmetry: usize,
    pub asymmetry: usize,
    pub transitivity_gt: usize,
    pub transitivity_eq: usize,
    pub identity_gt_eq: usize,
    pub identity_eq_gt: usize,
    pub comparability: usize,
}

impl AxiomCounts {
    pub fn total(&self) -> usize {
        self.reflexivity
            + self.symmetry
            + self.asymmetry
            + self.transitivity_gt
            + self.transitivity_eq
            + self.identity_gt_eq
            + self.identity_eq_gt
            + self.comparability
    }
}

#[derive(Debug, Clone)]
pub struct AtomEncoding {
    pub props: PropStore,
    pub root: PropRef,
    pub mode: AxiomMode,
    pub table: AtomTable,
    pub atom_vars: BTreeMap<Atom, PropVar>,
    pub axioms: AxiomCounts,
}

impl AtomEncoding {
    /// Number of variables standing for atoms `(f R g)` over the symbols.
    pub fn atom_var_count(&self) -> usize {
        let n = self.table.symbols.len();
        match self.table.eq {
            Some(_) => 2 * n * n,
            None => n * n,
        }
    }
}

/// `⟦φ⟧` conjoined with explicit order axioms over the symbols occurring in
/// `φ`. Constraints without equality atoms get [`AxiomMode::Reduced`].
pub fn encode_atom_based(store: &PoStore, phi: PoRef) -> AtomEncoding {
    let has_eq = store.atoms(phi).iter().any(|a| a.rel == Rel::Eq);
    let mode = if has_eq { AxiomMode::Full } else { AxiomMode::Reduced };
    encode_atom_based_with(store, phi, mode)
}

#[allow(clippy::needless_range_loop)]
pub fn encode_atom_based_with(store: &PoStore, phi: PoRef, mode: AxiomMode) -> AtomEncoding {
    let mut props = PropStore::new();
    let syms = store.symbols(phi);
    let names: Vec<String> = syms.iter().map(|&s| store.name(s).to_string()).collect();
    let n = names.len();
    let pos: HashMap<SymId, usize> = syms.iter().enumerate().map(|(i, &s)| (s, i)).collect();

    let gt: Vec<Vec<PropVar>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| props.new_var(VarLabel::Atom(format!("({}>{})", names[i], names[j]))))
                .collect()
        })
        .collect();
    let eq: Option<Vec<Vec<PropVar>>> = (mode == AxiomMode::Full).then(|| {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        props.new_var(VarLabel::Atom(format!("({}={})", names[i], names[j])))
                    })
                    .collect()
            })
            .collect()
    });

    let mut atom_vars = BTreeMap::new();
    for a in store.atoms(phi) {
        let (i, j) = (pos[&a.lhs], pos[&a.rhs]);
        let v = match a.rel {
            Rel::Gt => gt[i][j],
            Rel::Eq => eq.as_ref().expect("equality atoms need the full axiom set")[i][j],
        };
        atom_vars.insert(a, v);
    }
    let body = skeleton(store, phi, &mut props, |p, a| p.var(atom_vars[a]));

    let mut parts = vec![body];
    let mut counts = AxiomCounts::default();
    let lit = |p: &mut PropStore, v: PropVar, positive: bool| {
        let x = p.var(v);
        if positive {
            x
        } else {
            p.not(x)
        }
    };
    let mut clause = |p: &mut PropStore, lits: &[(PropVar, bool)]| {
        let ls: Vec<PropRef> = lits.iter().map(|&(v, s)| lit(p, v, s)).collect();
        let c = p.or(ls);
        parts.push(c);
    };

    // asymmetry over unordered pairs, including f = g for irreflexivity
    for f in 0..n {
        for g in f..n {
            clause(&mut props, &[(gt[f][g], false), (gt[g][f], false)]);
            counts.asymmetry += 1;
        }
    }
    // transitivity of >
    for f in 0..n {
        for g in 0..n {
            for h in 0..n {
                if f != g && g != h && f != h {
                    clause(&mut props, &[(gt[f][g], false), (gt[g][h], false), (gt[f][h], true)]);
                    counts.transitivity_gt += 1;
                }
            }
        }
    }
    if let Some(eq) = &eq {
        for f in 0..n {
            clause(&mut props, &[(eq[f][f], true)]);
            counts.reflexivity += 1;
        }
        for f in 0..n {
            for g in 0..n {
                if f != g {
                    clause(&mut props, &[(eq[f][g], false), (eq[g][f], true)]);
                    counts.symmetry += 1;
                }
            }
        }
        for f in 0..n {
            for g in 0..n {
                for h in 0..n {
                    if f != g && g != h && f != h {
                        clause(
                            &mut props,
                            &[(eq[f][g], false), (eq[g][h], false), (eq[f][h], true)],
                        );
                        counts.transitivity_eq += 1;
                    }
                    // f = h is allowed here: it makes > and = exclusive
                    if f != g && g != h {
                        clause(
                            &mut props,
                            &[(gt[f][g], false), (eq[g][h], false), (gt[f][h], true)],
                        );
                        counts.identity_gt_eq += 1;
                        clause(
                            &mut props,
                            &[(eq[f][g], false), (gt[g][h], false), (gt[f][h], true)],
                        );
                        counts.identity_eq_gt += 1;
                    }
                }
            }
        }
        for f in 0..n {
            for g in f + 1..n {
                clause(&mut props, &[(gt[f][g], true), (gt[g][f], true), (eq[f][g], true)]);
                counts.comparability += 1;
            }
        }
    }
    let root = props.and(parts);
    AtomEncoding {
        props,
        root,
        mode,
        table: AtomTable { symbols: names, gt, eq },
        atom_vars,
        axioms: counts,
    }
}

/// `θ(f)` is the number of symbols below `f`. In a model of the axioms `>`
/// is transitive and irreflexive, so `f > g` forces `θ(f) > θ(g)`, and
/// equal symbols have the same lower set.
pub fn decode_atom_solution(model: &[bool], table: &AtomTable) -> Result<Solution, EncodeError> {
    let mut theta = Solution::new();
    for (i, f) in table.symbols.iter().enumerate() {
        let mut below = 0u64;
        for &v in &table.gt[i] {
            if *model.get(v as usize).ok_or(EncodeError::IncompleteModel(v))? {
                below += 1;
            }
        }
        theta.insert(f.as_str(), below);
    }
    Ok(theta)
}

/// Symbols grouped into equivalence classes, strictly descending.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Precedence(pub Vec<Vec<String>>);

impl Precedence {
    pub fn classes(&self) -> &[Vec<String>] {
        &self.0
    }

    /// Position of the class containing `sym`, 0 being the top.
    pub fn rank(&self, sym: &str) -> Option<usize> {
        self.0.iter().position(|c| c.iter().any(|s| s == sym))
    }
}

impl fmt::Display for Precedence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, class) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" > ")?;
            }
            f.write_str(&class.join(" = "))?;
        }
        Ok(())
    }
}

pub fn precedence_of(theta: &Solution) -> Precedence {
    let mut groups: BTreeMap<std::cmp::Reverse<u64>, Vec<String>> = BTreeMap::new();
    for (sym, v) in theta.iter() {
        groups.entry(std::cmp::Reverse(v)).or_default().push(sym.to_string());
    }
    Precedence(groups.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coding2(props: &mut PropStore) -> SymbolCoding {
        let mut c = SymbolCoding::allocate(props, &["f".to_string(), "g".to_string()]);
        // force width 2 for the small examples
        if c.width == 1 {
            c = SymbolCoding { width: 2, bits: BTreeMap::new() };
            for s in ["f", "g"] {
                let v = vec![
                    props.new_var(VarLabel::Bit { symbol: s.into(), index: 1 }),
                    props.new_var(VarLabel::Bit { symbol: s.into(), index: 2 }),
                ];
                c.bits.insert(s.into(), v);
            }
        }
        c
    }

    #[test]
    fn widths() {
        let expect = [(0, 1), (1, 1), (2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4), (16, 4), (17, 5), (32, 5)];
        for (n, k) in expect {
            assert_eq!(bit_width(n), k, "n = {n}");
        }
    }

    #[test]
    fn eq_bits_shape() {
        let mut p = PropStore::new();
        let c = coding2(&mut p);
        let e = encode_eq_bits(&mut p, &c, "f", "g").unwrap();
        let (f, g) = (&c.bits["f"], &c.bits["g"]);
        let expect = {
            let parts: Vec<PropRef> = (0..2)
                .map(|i| {
                    let (a, b) = (p.var(f[i]), p.var(g[i]));
                    p.iff(a, b)
                })
                .collect();
            p.and(parts)
        };
        assert_eq!(e, expect);
        assert_eq!(encode_eq_bits(&mut p, &c, "f", "f").unwrap(), PropRef::TRUE);
        // f = <0,1>, g = <1,1> written MSB first
        let mut model = vec![false; p.num_vars() as usize + 1];
        model[f[0] as usize] = true;
        model[g[0] as usize] = true;
        model[g[1] as usize] = true;
        assert!(!p.eval(e, &model));
    }

    #[test]
    fn gt_bits_shape() {
        let mut p = PropStore::new();
        let c = SymbolCoding::allocate(&mut p, &["f".to_string(), "g".to_string()]);
        assert_eq!(c.width, 1);
        let e = encode_gt_bits(&mut p, &c, "f", "g").unwrap();
        let expect = {
            let f1 = p.var(c.bits["f"][0]);
            let g1 = p.var(c.bits["g"][0]);
            let ng1 = p.not(g1);
            p.and([f1, ng1])
        };
        assert_eq!(e, expect);

        let mut p = PropStore::new();
        let c = coding2(&mut p);
        let e = encode_gt_bits(&mut p, &c, "f", "g").unwrap();
        let expect = {
            let (f, g) = (&c.bits["f"], &c.bits["g"]);
            let (f1, f2, g1, g2) = (p.var(f[0]), p.var(f[1]), p.var(g[0]), p.var(g[1]));
            let (ng1, ng2) = (p.not(g1), p.not(g2));
            let hi = p.and([f2, ng2]);
            let lo = p.and([f1, ng1]);
            let same = p.iff(f2, g2);
            let rest = p.and([same, lo]);
            p.or([hi, rest])
        };
        assert_eq!(e, expect);
        assert_eq!(encode_gt_bits(&mut p, &c, "f", "f").unwrap(), PropRef::FALSE);
        assert_eq!(
            encode_gt_bits(&mut p, &c, "f", "h"),
            Err(EncodeError::UnknownSymbol("h".into()))
        );
    }

    #[test]
    fn gt_bits_exhaustive_width_two() {
        let mut p = PropStore::new();
        let c = coding2(&mut p);
        let e = encode_gt_bits(&mut p, &c, "f", "g").unwrap();
        let mut hits = 0;
        for x in 0u32..4 {
            for y in 0u32..4 {
                let mut model = vec![false; p.num_vars() as usize + 1];
                for i in 0..2 {
                    model[c.bits["f"][i] as usize] = x >> i & 1 == 1;
                    model[c.bits["g"][i] as usize] = y >> i & 1 == 1;
                }
                let v = p.eval(e, &model);
                assert_eq!(v, x > y);
                hits += v as u32;
            }
        }
        assert_eq!(hits, 6);
    }

    #[test]
    fn decode_binary_values() {
        let mut p = PropStore::new();
        let c = coding2(&mut p);
        let mut model = vec![false; p.num_vars() as usize + 1];
        model[c.bits["f"][1] as usize] = true; // f = <1,0>
        model[c.bits["g"][0] as usize] = true; // g = <0,1>
        let theta = decode_solution(&model, &c).unwrap();
        assert_eq!(theta.get("f"), Some(2));
        assert_eq!(theta.get("g"), Some(1));
        assert!(matches!(
            decode_solution(&[false], &c),
            Err(EncodeError::IncompleteModel(_))
        ));
    }

    #[test]
    fn symbol_encoding_layout() {
        let mut s = PoStore::new();
        let a = [s.gt("f", "g"), s.eq("g", "h")];
        let phi = s.or(a);
        let enc = encode_symbol_based(&s, phi);
        assert_eq!(enc.coding.width, 2);
        assert_eq!(enc.atom_vars.len(), 2);
        // bits first, then one proxy per atom
        assert_eq!(enc.props.num_vars(), 3 * 2 + 2);
        assert!(matches!(enc.props.label(1), VarLabel::Bit { index: 1, .. }));
        assert!(matches!(enc.props.label(7), VarLabel::Atom(_)));

        let t = encode_symbol_based(&s, PoRef::TRUE);
        assert_eq!(t.root, PropRef::TRUE);
        assert_eq!(t.props.num_vars(), 0);
    }

    #[test]
    fn axiom_counts_full_mode() {
        let mut s = PoStore::new();
        let names = ["a", "b", "c", "d", "e"];
        let mut parts: Vec<PoRef> = names.windows(2).map(|w| s.gt(w[0], w[1])).collect();
        parts.push(s.eq("a", "e"));
        let phi = s.or(parts);
        let enc = encode_atom_based(&s, phi);
        let n = 5;
        assert_eq!(enc.mode, AxiomMode::Full);
        assert_eq!(enc.atom_var_count(), 2 * n * n);
        let c = enc.axioms;
        assert_eq!(c.reflexivity, n);
        assert_eq!(c.symmetry, n * (n - 1));
        assert_eq!(c.asymmetry, n * (n + 1) / 2);
        assert_eq!(c.transitivity_gt, n * (n - 1) * (n - 2));
        assert_eq!(c.transitivity_eq, n * (n - 1) * (n - 2));
        assert_eq!(c.identity_gt_eq, n * (n - 1) * (n - 1));
        assert_eq!(c.identity_eq_gt, n * (n - 1) * (n - 1));
        assert_eq!(c.comparability, n * (n - 1) / 2);
    }

    #[test]
    fn greater_and_equal_are_exclusive() {
        // with only two symbols no transitivity triple exists, so the
        // identity axioms must cover f = h to rule this out
        let mut s = PoStore::new();
        let a = [s.gt("f", "g"), s.eq("f", "g")];
        let phi = s.and(a);
        let enc = encode_atom_based(&s, phi);
        let cnf = crate::sat::tseitin(&enc.props, enc.root);
        assert_eq!(crate::sat::solve(&cnf).unwrap(), crate::sat::SatResult::Unsat);
    }

    #[test]
    fn reduced_mode_without_equalities() {
        let mut s = PoStore::new();
        let fg = s.gt("f", "g");
        let enc = encode_atom_based(&s, fg);
        assert_eq!(enc.mode, AxiomMode::Reduced);
        assert_eq!(enc.axioms.reflexivity + enc.axioms.comparability, 0);
        assert_eq!(enc.atom_var_count(), 4);
    }

    #[test]
    fn precedence_grouping() {
        let theta: Solution = [("div", 1), ("i", 1)].into_iter().collect();
        let p = precedence_of(&theta);
        assert_eq!(p.0, vec![vec!["div".to_string(), "i".to_string()]]);
        assert_eq!(p.to_string(), "div = i");
        let theta: Solution = [("f", 3), ("g", 1), ("h", 2)].into_iter().collect();
        let p = precedence_of(&theta);
        assert_eq!(p.to_string(), "f > h > g");
        assert_eq!(p.rank("g"), Some(2));
        assert_eq!(precedence_of(&Solution::new()), Precedence::default());
    }

    #[test]
    fn iff_and_not_simplify() {
        let mut p = PropStore::new();
        let v = p.new_var(VarLabel::Aux);
        let x = p.var(v);
        let nx = p.not(x);
        assert_eq!(p.not(nx), x);
        assert_eq!(p.iff(x, PropRef::TRUE), x);
        assert_eq!(p.iff(x, PropRef::FALSE), nx);
        assert_eq!(p.iff(x, nx), PropRef::FALSE);
        assert_eq!(p.and([x, nx]), PropRef::FALSE);
        assert_eq!(p.or([x, nx]), PropRef::TRUE);
    }
}
