//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use precsat::encode::{PropRef, PropStore, VarLabel};
use precsat::poc::{PoRef, PoStore, Solution};
use precsat::trs::Term;
use precsat::OrderVariant;
use rand::seq::SliceRandom;
use rand::Rng;

pub const SYMBOLS: [&str; 5] = ["a", "b", "c", "d", "e"];

/// Random negation-free constraint over the first `n` of [`SYMBOLS`] with at
/// most `max_atoms` atom leaves.
pub fn constraint(rng: &mut impl Rng, store: &mut PoStore, n: usize, max_atoms: usize) -> PoRef {
    let atoms = rng.gen_range(1..=max_atoms);
    constraint_with(rng, store, &SYMBOLS[..n], atoms)
}

fn constraint_with(rng: &mut impl Rng, store: &mut PoStore, syms: &[&str], atoms: usize) -> PoRef {
    if atoms <= 1 {
        let f = *syms.choose(rng).expect("symbols");
        let g = *syms.choose(rng).expect("symbols");
        return if rng.gen_bool(0.7) { store.gt(f, g) } else { store.eq(f, g) };
    }
    let k = rng.gen_range(2..=3.min(atoms));
    // split the atom budget among k children
    let mut cuts: Vec<usize> = (0..k - 1).map(|_| rng.gen_range(1..atoms)).collect();
    cuts.push(0);
    cuts.push(atoms);
    cuts.sort_unstable();
    let kids: Vec<PoRef> = cuts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| constraint_with(rng, store, syms, w[1] - w[0]))
        .collect();
    if rng.gen_bool(0.5) {
        store.and(kids)
    } else {
        store.or(kids)
    }
}

/// Signature for random terms: three function symbols and two constants.
pub const SIGNATURE: [(&str, usize); 5] = [("f", 2), ("g", 1), ("h", 2), ("a", 0), ("b", 0)];
pub const VARS: [&str; 3] = ["X", "Y", "Z"];

pub fn term(rng: &mut impl Rng, depth: usize, with_vars: bool) -> Term {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        if with_vars && rng.gen_bool(0.5) {
            return Term::var(*VARS.choose(rng).expect("vars"));
        }
        let consts: Vec<&str> = SIGNATURE.iter().filter(|s| s.1 == 0).map(|s| s.0).collect();
        return Term::constant(*consts.choose(rng).expect("constants"));
    }
    let (name, arity) = *SIGNATURE.iter().filter(|s| s.1 > 0).collect::<Vec<_>>().choose(rng).expect("functions");
    Term::app(*name, (0..*arity).map(|_| term(rng, depth - 1, with_vars)).collect())
}

/// Injective for the strict variant, ties allowed for the quasi variant.
pub fn precedence(rng: &mut impl Rng, v: OrderVariant) -> Solution {
    let n = SIGNATURE.len() as u64;
    match v {
        OrderVariant::Strict => {
            let mut vals: Vec<u64> = (1..=n).collect();
            vals.shuffle(rng);
            SIGNATURE.iter().zip(vals).map(|(s, v)| (s.0, v)).collect()
        }
        OrderVariant::Quasi => SIGNATURE.iter().map(|s| (s.0, rng.gen_range(1..=3))).collect(),
    }
}

/// Random propositional formula over variables `1..=vars`, freshly
/// allocated in `props`.
pub fn prop_formula(rng: &mut impl Rng, props: &mut PropStore, vars: u32, depth: usize) -> PropRef {
    while props.num_vars() < vars {
        props.new_var(VarLabel::Aux);
    }
    prop_node(rng, props, vars, depth)
}

fn prop_node(rng: &mut impl Rng, props: &mut PropStore, vars: u32, depth: usize) -> PropRef {
    if depth == 0 || rng.gen_bool(0.2) {
        let v = props.var(rng.gen_range(1..=vars));
        return if rng.gen_bool(0.5) { v } else { props.not(v) };
    }
    match rng.gen_range(0..4) {
        0 => {
            let x = prop_node(rng, props, vars, depth - 1);
            props.not(x)
        }
        1 | 2 => {
            let k = rng.gen_range(2..=3);
            let kids: Vec<PropRef> = (0..k).map(|_| prop_node(rng, props, vars, depth - 1)).collect();
            if rng.gen_bool(0.5) {
                props.and(kids)
            } else {
                props.or(kids)
            }
        }
        _ => {
            let x = prop_node(rng, props, vars, depth - 1);
            let y = prop_node(rng, props, vars, depth - 1);
            props.iff(x, y)
        }
    }
}

/// Truth-table satisfiability over variables `1..=vars`.
pub fn truth_table_sat(props: &PropStore, root: PropRef, vars: u32) -> bool {
    let mut model = vec![false; props.num_vars() as usize + 1];
    (0u64..1 << vars).any(|bits| {
        for v in 1..=vars {
            model[v as usize] = bits >> (v - 1) & 1 == 1;
        }
        props.eval(root, &model)
    })
}

/// `φ ⊕ ψ` is unsatisfiable.
pub fn equivalent(store: &mut PoStore, phi: PoRef, psi: PoRef) -> bool {
    let (nphi, npsi) = (store.negate(phi), store.negate(psi));
    let l = store.and([phi, npsi]);
    let r = store.and([nphi, psi]);
    let xor = store.or([l, r]);
    store.brute_force_sat(xor, 7).expect("small signature").is_none()
}

pub fn chain(store: &mut PoStore, n: usize) -> PoRef {
    let names: Vec<String> = (1..=n).map(|i| format!("f{i}")).collect();
    let atoms: Vec<PoRef> = names.windows(2).map(|w| store.gt(&w[0], &w[1])).collect();
    store.and(atoms)
}

pub fn corpus_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../trs")
}
