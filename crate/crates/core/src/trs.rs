//! First-order terms, rewrite rules and a reader for the TPDB "old" `.trs`
//! format.
//!
//! A file consists of parenthesised sections. `(VAR ...)` declares the
//! variables, `(RULES ...)` lists rules `l -> r`, and `(COMMENT ...)` is
//! skipped. Sections that change the rewrite semantics (`THEORY`,
//! `STRATEGY`) are rejected.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

/// A function symbol together with its arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

impl Symbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        let name = name.into();
        assert!(!name.is_empty(), "symbol names are non-empty");
        Symbol { name, arity }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    /// Builds `f(args)`; the arity is taken from `args`.
    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Self {
        Term::App(Symbol::new(name, args.len()), args)
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::app(name, Vec::new())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    /// Set of variable names occurring in the term.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        if let Term::App(f, args) = self {
            out.insert(f.clone());
            args.iter().for_each(|a| a.collect_symbols(out));
        }
    }

    /// All subterms including the term itself, in pre-order.
    pub fn subterms(&self) -> Vec<&Term> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            if let Term::App(_, args) = out[i] {
                out.extend(args.iter());
            }
            i += 1;
        }
        out
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }
}

/// Free function form of [`Term::vars`].
pub fn term_vars(t: &Term) -> BTreeSet<String> {
    t.vars()
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::App(sym, args) if args.is_empty() => f.write_str(&sym.name),
            Term::App(sym, args) => {
                write!(f, "{}(", sym.name)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub lhs: Term,
    pub rhs: Term,
}

impl Rule {
    /// Fails if `rhs` mentions a variable that `lhs` does not bind.
    pub fn new(lhs: Term, rhs: Term) -> Result<Self, TrsError> {
        let bound = lhs.vars();
        if let Some(x) = rhs.vars().into_iter().find(|x| !bound.contains(x)) {
            return Err(TrsError::UnboundVariable {
                var: x,
                rule: format!("{lhs} -> {rhs}"),
            });
        }
        Ok(Rule { lhs, rhs })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

/// A term rewrite system. The signature is always the set of symbols that
/// occur in the rules.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trs {
    rules: Vec<Rule>,
    signature: BTreeSet<Symbol>,
}

impl Trs {
    /// Checks arity consistency across the rules.
    pub fn new(rules: Vec<Rule>) -> Result<Self, TrsError> {
        let mut signature = BTreeSet::new();
        for r in &rules {
            r.lhs.collect_symbols(&mut signature);
            r.rhs.collect_symbols(&mut signature);
        }
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for s in &signature {
            if let Some(&a) = seen.get(s.name.as_str()) {
                return Err(TrsError::ArityMismatch {
                    symbol: s.name.clone(),
                    expected: a,
                    found: s.arity,
                    line: 0,
                    col: 0,
                });
            }
            seen.insert(&s.name, s.arity);
        }
        Ok(Trs { rules, signature })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn signature(&self) -> &BTreeSet<Symbol> {
        &self.signature
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

/// Prints the system back in TPDB syntax.
impl fmt::Display for Trs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut vars = BTreeSet::new();
        for r in &self.rules {
            r.lhs.collect_vars(&mut vars);
        }
        f.write_str("(VAR")?;
        for v in &vars {
            write!(f, " {v}")?;
        }
        writeln!(f, ")")?;
        writeln!(f, "(RULES")?;
        for r in &self.rules {
            writeln!(f, "  {r}")?;
        }
        writeln!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrsError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("symbol `{symbol}` used with arity {found} at {line}:{col}, first seen with arity {expected}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
        line: usize,
        col: usize,
    },
    #[error("variable `{var}` in right-hand side of `{rule}` does not occur in the left-hand side")]
    UnboundVariable { var: String, rule: String },
    #[error("unsupported section `{section}` at {line}:{col}: only plain rewrite systems are handled")]
    UnsupportedSection {
        section: String,
        line: usize,
        col: usize,
    },
}

impl TrsError {
    /// True for files outside the supported fragment (theories, strategies).
    pub fn is_unsupported(&self) -> bool {
        matches!(self, TrsError::UnsupportedSection { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    Comma,
    Arrow,
    Ident(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric()
        || matches!(
            c,
            '+' | '-' | '*' | '/' | '\'' | '_' | '.' | '!' | '?' | '#' | '@' | '$' | '%' | '&'
                | '^' | '~' | ':' | ';' | '<' | '>' | '=' | '[' | ']' | '{' | '}' | '\\'
        )
}

fn tokenize(text: &str) -> Result<Vec<Spanned>, TrsError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let width = match c {
            '\n' => {
                line += 1;
                col = 0;
                1
            }
            c if c.is_whitespace() => 1,
            '(' => {
                out.push(Spanned { tok: Tok::LParen, line: tl, col: tc });
                1
            }
            ')' => {
                out.push(Spanned { tok: Tok::RParen, line: tl, col: tc });
                1
            }
            ',' => {
                out.push(Spanned { tok: Tok::Comma, line: tl, col: tc });
                1
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push(Spanned { tok: Tok::Arrow, line: tl, col: tc });
                2
            }
            c if is_ident_char(c) => {
                let mut j = i;
                while j < chars.len()
                    && is_ident_char(chars[j])
                    && !(chars[j] == '-' && chars.get(j + 1) == Some(&'>'))
                {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                out.push(Spanned { tok: Tok::Ident(s), line: tl, col: tc });
                j - i
            }
            other => {
                return Err(TrsError::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        i += width;
        col += width;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    vars: HashSet<String>,
    arities: HashMap<String, usize>,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.end, |s| (s.line, s.col))
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, TrsError> {
        let (line, col) = self.here();
        Err(TrsError::Syntax { line, col, msg: msg.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), TrsError> {
        match self.peek() {
            Some(s) if s.tok == tok => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), TrsError> {
        match self.peek().cloned() {
            Some(Spanned { tok: Tok::Ident(s), line, col }) => {
                self.pos += 1;
                Ok((s, line, col))
            }
            _ => self.err("expected identifier"),
        }
    }

    /// Skips a balanced parenthesised block whose opening paren was consumed.
    fn skip_block(&mut self) -> Result<(), TrsError> {
        let mut depth = 1usize;
        while let Some(s) = self.peek() {
            match s.tok {
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        self.pos += 1;
                        return Ok(());
                    }
                }
                _ => {}
            }
            self.pos += 1;
        }
        self.err("unterminated section")
    }

    fn file(&mut self) -> Result<Vec<Rule>, TrsError> {
        let mut rules = Vec::new();
        while self.peek().is_some() {
            self.expect(Tok::LParen, "`(` opening a section")?;
            let (name, line, col) = self.ident()?;
            match name.as_str() {
                "VAR" => {
                    while let Some(Tok::Ident(_)) = self.peek().map(|s| &s.tok) {
                        let (v, _, _) = self.ident()?;
                        self.vars.insert(v);
                    }
                    self.expect(Tok::RParen, "`)` closing VAR")?;
                }
                "RULES" => {
                    while !matches!(self.peek().map(|s| &s.tok), Some(Tok::RParen) | None) {
                        rules.push(self.rule()?);
                        if let Some(Tok::Comma) = self.peek().map(|s| &s.tok) {
                            self.pos += 1;
                        }
                    }
                    self.expect(Tok::RParen, "`)` closing RULES")?;
                }
                "THEORY" | "STRATEGY" => {
                    return Err(TrsError::UnsupportedSection { section: name, line, col })
                }
                _ => self.skip_block()?,
            }
        }
        Ok(rules)
    }

    fn rule(&mut self) -> Result<Rule, TrsError> {
        let lhs = self.term()?;
        self.expect(Tok::Arrow, "`->`")?;
        let rhs = self.term()?;
        Rule::new(lhs, rhs)
    }

    fn term(&mut self) -> Result<Term, TrsError> {
        let (name, line, col) = self.ident()?;
        let args = if let Some(Tok::LParen) = self.peek().map(|s| &s.tok) {
            self.pos += 1;
            let mut args = Vec::new();
            if let Some(Tok::RParen) = self.peek().map(|s| &s.tok) {
                self.pos += 1;
            } else {
                loop {
                    args.push(self.term()?);
                    match self.peek().map(|s| &s.tok) {
                        Some(Tok::Comma) => self.pos += 1,
                        Some(Tok::RParen) => {
                            self.pos += 1;
                            break;
                        }
                        _ => return self.err("expected `,` or `)` in argument list"),
                    }
                }
            }
            Some(args)
        } else {
            None
        };
        if self.vars.contains(&name) {
            return match args {
                None => Ok(Term::Var(name)),
                Some(_) => Err(TrsError::Syntax {
                    line,
                    col,
                    msg: format!("variable `{name}` applied to arguments"),
                }),
            };
        }
        let args = args.unwrap_or_default();
        match self.arities.get(&name) {
            Some(&a) if a != args.len() => {
                return Err(TrsError::ArityMismatch {
                    symbol: name,
                    expected: a,
                    found: args.len(),
                    line,
                    col,
                })
            }
            Some(_) => {}
            None => {
                self.arities.insert(name.clone(), args.len());
            }
        }
        Ok(Term::App(Symbol::new(name, args.len()), args))
    }
}

/// Parses a TPDB old-format rewrite system. Rules keep file order.
pub fn parse_trs(text: &str) -> Result<Trs, TrsError> {
    let toks = tokenize(text)?;
    let lines = text.lines().count().max(1);
    let end = (lines, text.lines().last().map_or(1, |l| l.chars().count() + 1));
    let mut p = Parser {
        toks,
        pos: 0,
        vars: HashSet::new(),
        arities: HashMap::new(),
        end,
    };
    let rules = p.file()?;
    Trs::new(rules)
}

/// Symbol name to arity, for diagnostics.
pub fn arity_table(trs: &Trs) -> BTreeMap<String, usize> {
    trs.signature().iter().map(|s| (s.name.clone(), s.arity)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const NNF: &str = "(VAR A B C)
(RULES
  -(gt(A,B)) -> ge(B,A)
  -(ge(A,B)) -> gt(B,A)
  -(+(A,B)) -> *(-(A),-(B))
  -(*(A,B)) -> +(-(A),-(B))
  *(A,+(B,C)) -> +(*(A,B),*(A,C))
  *(+(B,C),A) -> +(*(B,A),*(C,A))
)
";

    #[test]
    fn parses_connective_system() {
        let trs = parse_trs(NNF).unwrap();
        assert_eq!(trs.rules().len(), 6);
        let table = arity_table(&trs);
        let expected: BTreeMap<String, usize> = [("-", 1), ("gt", 2), ("ge", 2), ("+", 2), ("*", 2)]
            .into_iter()
            .map(|(s, a)| (s.to_string(), a))
            .collect();
        assert_eq!(table, expected);
        assert_eq!(trs.rules()[0].to_string(), "-(gt(A,B)) -> ge(B,A)");
    }

    #[test]
    fn empty_sections() {
        let trs = parse_trs("(VAR)(RULES)").unwrap();
        assert!(trs.is_empty());
        assert!(trs.signature().is_empty());
    }

    #[test]
    fn unbound_rhs_variable() {
        let err = parse_trs("(VAR X Y)(RULES f(X) -> g(X,Y))").unwrap_err();
        assert_eq!(
            err,
            TrsError::UnboundVariable {
                var: "Y".into(),
                rule: "f(X) -> g(X,Y)".into()
            }
        );
    }

    #[test]
    fn undeclared_identifier_is_a_constant() {
        let trs = parse_trs("(VAR X)(RULES f(X) -> g(X,Y))").unwrap();
        assert!(trs.signature().contains(&Symbol::new("Y", 0)));
    }

    #[test]
    fn literal_distribution_rule_with_stray_variable_is_rejected() {
        let err = parse_trs("(VAR A B C)(RULES *(A,+(A,B)) -> +(*(A,B),*(A,C)))").unwrap_err();
        assert!(matches!(err, TrsError::UnboundVariable { ref var, .. } if var == "C"));
    }

    #[test]
    fn arity_mismatch_reports_position() {
        let err = parse_trs("(VAR x)\n(RULES f(x) -> x\n f(x,x) -> x)").unwrap_err();
        assert_eq!(
            err,
            TrsError::ArityMismatch {
                symbol: "f".into(),
                expected: 1,
                found: 2,
                line: 3,
                col: 2
            }
        );
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_trs("(VAR x)\n(RULES f(x -> x)").unwrap_err();
        match err {
            TrsError::Syntax { line, col, .. } => assert_eq!((line, col), (2, 12)),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn theory_and_strategy_are_rejected() {
        let e = parse_trs("(VAR x)(THEORY (AC plus))(RULES plus(x,x) -> x)").unwrap_err();
        assert!(e.is_unsupported());
        let e = parse_trs("(STRATEGY INNERMOST)(VAR x)(RULES f(x) -> x)").unwrap_err();
        assert!(e.is_unsupported());
    }

    #[test]
    fn comments_and_bare_constants() {
        let text = "(COMMENT this (nested) comment is skipped -> )\n(VAR x)\n(RULES f(x, e) -> i(x) g() -> e)";
        let trs = parse_trs(text).unwrap();
        assert_eq!(trs.rules().len(), 2);
        assert_eq!(trs.rules()[1].lhs, Term::constant("g"));
    }

    #[test]
    fn variable_lhs_is_accepted() {
        let trs = parse_trs("(VAR x)(RULES x -> x)").unwrap();
        assert!(trs.rules()[0].lhs.is_var());
    }

    #[test]
    fn hyphenated_identifiers_and_arrows() {
        let trs = parse_trs("(VAR x)(RULES my-f(x)->x)").unwrap();
        assert_eq!(trs.rules()[0].to_string(), "my-f(x) -> x");
    }

    #[test]
    fn term_vars_examples() {
        assert_eq!(term_vars(&Term::var("X")), BTreeSet::from(["X".to_string()]));
        let t = Term::app("-", vec![Term::app("gt", vec![Term::var("A"), Term::var("B")])]);
        assert_eq!(term_vars(&t), BTreeSet::from(["A".to_string(), "B".to_string()]));
        assert!(term_vars(&Term::constant("e")).is_empty());
    }

    #[test]
    fn print_then_parse_is_fixpoint() {
        let trs = parse_trs(NNF).unwrap();
        let printed = trs.to_string();
        let again = parse_trs(&printed).unwrap();
        assert_eq!(trs, again);
        assert_eq!(printed, again.to_string());
    }
}
