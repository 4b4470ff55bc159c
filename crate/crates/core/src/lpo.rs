//! Unfolding the lexicographic path ordering into partial-order constraints.
//!
//! `s >lpo t` for `s = f(s1..sn)` holds iff either
//!
//! 1. `t = g(t1..tm)`, `s >lpo tj` for every `j`, and either `f > g` or
//!    `f ≐ g` with `<s1..sn> >lex <t1..tm>`; or
//! 2. `si ≈ t` or `si >lpo t` for some `i`.
//!
//! Under [`OrderVariant::Strict`] `≐` and `≈` are syntactic identity. Under
//! [`OrderVariant::Quasi`] `≐` is the atom `(f=g)` and `≈` is equality of
//! terms up to equivalent heads.
//!
//! Terms are hash-consed inside an [`Unfolder`], and both relations are
//! memoized on pairs of term ids, so shared sub-problems produce shared
//! formula nodes.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::poc::{PoRef, PoStore, Rel, Solution, SymId};
use crate::trs::{Term, Trs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderVariant {
    Strict,
    Quasi,
}

impl std::fmt::Display for OrderVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OrderVariant::Strict => "strict",
            OrderVariant::Quasi => "quasi",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct TermId(u32);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum TermNode {
    Var(String),
    App(SymId, Box<[TermId]>),
}

/// One unfolding session: a term table and the memo tables for `>lpo` and
/// `≈`. Formulas are built in the borrowed store.
pub struct Unfolder<'a> {
    store: &'a mut PoStore,
    variant: OrderVariant,
    terms: Vec<TermNode>,
    term_index: HashMap<TermNode, TermId>,
    gt_memo: HashMap<(TermId, TermId), PoRef>,
    equiv_memo: HashMap<(TermId, TermId), PoRef>,
}

impl<'a> Unfolder<'a> {
    pub fn new(store: &'a mut PoStore, variant: OrderVariant) -> Self {
        Unfolder {
            store,
            variant,
            terms: Vec::new(),
            term_index: HashMap::new(),
            gt_memo: HashMap::new(),
            equiv_memo: HashMap::new(),
        }
    }

    pub fn variant(&self) -> OrderVariant {
        self.variant
    }

    fn intern(&mut self, t: &Term) -> TermId {
        let node = match t {
            Term::Var(x) => TermNode::Var(x.clone()),
            Term::App(f, args) => {
                let ids: Vec<TermId> = args.iter().map(|a| self.intern(a)).collect();
                TermNode::App(self.store.symbol(&f.name), ids.into())
            }
        };
        if let Some(&id) = self.term_index.get(&node) {
            return id;
        }
        let id = TermId(self.terms.len() as u32);
        self.terms.push(node.clone());
        self.term_index.insert(node, id);
        id
    }

    /// Constraint equivalent to `s >lpo t`.
    pub fn gt(&mut self, s: &Term, t: &Term) -> PoRef {
        let (s, t) = (self.intern(s), self.intern(t));
        self.gt_id(s, t)
    }

    /// Constraint equivalent to `s ≈ t`.
    pub fn equiv(&mut self, s: &Term, t: &Term) -> PoRef {
        let (s, t) = (self.intern(s), self.intern(t));
        self.equiv_id(s, t)
    }

    /// Constraint equivalent to `<ss> >lex <ts>`.
    pub fn lex(&mut self, ss: &[Term], ts: &[Term]) -> PoRef {
        let ss: Vec<TermId> = ss.iter().map(|s| self.intern(s)).collect();
        let ts: Vec<TermId> = ts.iter().map(|t| self.intern(t)).collect();
        self.lex_ids(&ss, &ts)
    }

    pub fn rules(&mut self, trs: &Trs) -> PoRef {
        let parts: Vec<PoRef> = trs.rules().iter().map(|r| self.gt(&r.lhs, &r.rhs)).collect();
        self.store.and(parts)
    }

    fn gt_id(&mut self, s: TermId, t: TermId) -> PoRef {
        if let Some(&r) = self.gt_memo.get(&(s, t)) {
            return r;
        }
        let r = self.gt_uncached(s, t);
        self.gt_memo.insert((s, t), r);
        r
    }

    fn gt_uncached(&mut self, s: TermId, t: TermId) -> PoRef {
        let (f, ss) = match &self.terms[s.0 as usize] {
            TermNode::Var(_) => return PoRef::FALSE,
            TermNode::App(f, ss) => (*f, ss.clone()),
        };
        // case 2: some argument of s is equivalent to or above t
        let mut case2 = Vec::with_capacity(ss.len());
        for &si in ss.iter() {
            let e = self.equiv_id(si, t);
            if e == PoRef::TRUE {
                return PoRef::TRUE;
            }
            let g = self.gt_id(si, t);
            case2.push(self.store.or([e, g]));
        }
        let case2 = self.store.or(case2);
        if case2 == PoRef::TRUE {
            return case2;
        }
        let (g, ts) = match &self.terms[t.0 as usize] {
            TermNode::Var(_) => return case2,
            TermNode::App(g, ts) => (*g, ts.clone()),
        };
        // case 1: s dominates every argument of t, and the heads decide
        let mut dominates = Vec::with_capacity(ts.len());
        for &tj in ts.iter() {
            let d = self.gt_id(s, tj);
            if d == PoRef::FALSE {
                return case2;
            }
            dominates.push(d);
        }
        let head_gt = self.store.atom(f, Rel::Gt, g);
        let head_eq = match self.variant {
            OrderVariant::Strict if f == g => PoRef::TRUE,
            OrderVariant::Strict => PoRef::FALSE,
            OrderVariant::Quasi => self.store.atom(f, Rel::Eq, g),
        };
        let lex = if head_eq == PoRef::FALSE {
            PoRef::FALSE
        } else {
            let l = self.lex_ids(&ss, &ts);
            self.store.and([head_eq, l])
        };
        let heads = self.store.or([head_gt, lex]);
        dominates.push(heads);
        let case1 = self.store.and(dominates);
        self.store.or([case1, case2])
    }

    fn equiv_id(&mut self, s: TermId, t: TermId) -> PoRef {
        if s == t {
            return PoRef::TRUE;
        }
        if self.variant == OrderVariant::Strict {
            return PoRef::FALSE;
        }
        if let Some(&r) = self.equiv_memo.get(&(s, t)) {
            return r;
        }
        let r = match (self.terms[s.0 as usize].clone(), self.terms[t.0 as usize].clone()) {
            (TermNode::App(f, ss), TermNode::App(g, ts)) if ss.len() == ts.len() => {
                let mut parts = vec![self.store.atom(f, Rel::Eq, g)];
                for (&a, &b) in ss.iter().zip(ts.iter()) {
                    let e = self.equiv_id(a, b);
                    if e == PoRef::FALSE {
                        parts.clear();
                        parts.push(PoRef::FALSE);
                        break;
                    }
                    parts.push(e);
                }
                self.store.and(parts)
            }
            // distinct variables, variable vs application, or arity mismatch
            _ => PoRef::FALSE,
        };
        self.equiv_memo.insert((s, t), r);
        r
    }

    fn lex_ids(&mut self, ss: &[TermId], ts: &[TermId]) -> PoRef {
        match (ss.split_first(), ts.split_first()) {
            (None, _) => PoRef::FALSE,
            (Some(_), None) => PoRef::TRUE,
            (Some((&s1, s_rest)), Some((&t1, t_rest))) => {
                let first = self.gt_id(s1, t1);
                if first == PoRef::TRUE {
                    return first;
                }
                let same = self.equiv_id(s1, t1);
                let rest = if same == PoRef::FALSE {
                    PoRef::FALSE
                } else {
                    let r = self.lex_ids(s_rest, t_rest);
                    self.store.and([same, r])
                };
                self.store.or([first, rest])
            }
        }
    }
}

pub fn lpo_gt(store: &mut PoStore, s: &Term, t: &Term, v: OrderVariant) -> PoRef {
    Unfolder::new(store, v).gt(s, t)
}

pub fn term_equiv(store: &mut PoStore, s: &Term, t: &Term, v: OrderVariant) -> PoRef {
    Unfolder::new(store, v).equiv(s, t)
}

pub fn lex_gt(store: &mut PoStore, ss: &[Term], ts: &[Term], v: OrderVariant) -> PoRef {
    Unfolder::new(store, v).lex(ss, ts)
}

/// Conjunction of `l >lpo r` over all rules; satisfiable iff the system is
/// LPO terminating for the given variant.
pub fn trs_constraint(store: &mut PoStore, trs: &Trs, v: OrderVariant) -> PoRef {
    Unfolder::new(store, v).rules(trs)
}

/// Decides `s >lpo t` directly for a fixed precedence given as integer
/// indices. Used as a reference for the formula-producing path.
///
/// Panics if `prec` does not cover a symbol that the recursion inspects.
pub fn lpo_check_ground(s: &Term, t: &Term, prec: &Solution, v: OrderVariant) -> bool {
    let Term::App(f, ss) = s else {
        return false;
    };
    if ss.iter().any(|si| check_equiv(si, t, prec, v) || lpo_check_ground(si, t, prec, v)) {
        return true;
    }
    let Term::App(g, ts) = t else {
        return false;
    };
    if !ts.iter().all(|tj| lpo_check_ground(s, tj, prec, v)) {
        return false;
    }
    let (pf, pg) = (index(prec, &f.name), index(prec, &g.name));
    if pf > pg {
        return true;
    }
    let heads_equal = match v {
        OrderVariant::Strict => f.name == g.name,
        OrderVariant::Quasi => pf == pg,
    };
    heads_equal && check_lex(ss, ts, prec, v)
}

fn index(prec: &Solution, name: &str) -> u64 {
    prec.get(name)
        .unwrap_or_else(|| panic!("precedence does not cover `{name}`"))
}

fn check_equiv(s: &Term, t: &Term, prec: &Solution, v: OrderVariant) -> bool {
    match v {
        OrderVariant::Strict => s == t,
        OrderVariant::Quasi => match (s, t) {
            (Term::Var(x), Term::Var(y)) => x == y,
            (Term::App(f, ss), Term::App(g, ts)) => {
                ss.len() == ts.len()
                    && index(prec, &f.name) == index(prec, &g.name)
                    && ss.iter().zip(ts).all(|(a, b)| check_equiv(a, b, prec, v))
            }
            _ => false,
        },
    }
}

fn check_lex(ss: &[Term], ts: &[Term], prec: &Solution, v: OrderVariant) -> bool {
    for (s, t) in ss.iter().zip(ts) {
        if lpo_check_ground(s, t, prec, v) {
            return true;
        }
        if !check_equiv(s, t, prec, v) {
            return false;
        }
    }
    ss.len() > ts.len()
}
