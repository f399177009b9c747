//! Boolean events over binary variables and their constituent index sets.
//!
//! A scope of `k` variables has `2^k` constituents (full conjunctions of
//! literals). Constituent `i` makes the variable at position `j` true exactly
//! when bit `j` of `i` is set.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Returns true for names matching `[A-Za-z_][A-Za-z0-9_]*` that are not the
/// reserved literals `true` / `false`.
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && name != "true" && name != "false"
}

/// Ordered list of variable names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scope {
    names: Vec<String>,
}

impl Scope {
    /// # Panics
    /// On duplicate names.
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let unique: BTreeSet<&String> = names.iter().collect();
        assert_eq!(unique.len(), names.len(), "duplicate variable in scope");
        Scope { names }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    /// `2^k`.
    pub fn constituent_count(&self) -> usize {
        1usize << self.names.len()
    }

    pub fn is_subset_of(&self, other: &Scope) -> bool {
        self.names.iter().all(|n| other.contains(n))
    }

    /// Truth value of the variable at `position` under constituent `index`.
    pub fn bit(index: usize, position: usize) -> bool {
        index >> position & 1 == 1
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.names.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EventExpr {
    Var(String),
    Not(Box<EventExpr>),
    And(Box<EventExpr>, Box<EventExpr>),
    Or(Box<EventExpr>, Box<EventExpr>),
    True,
    False,
}

impl EventExpr {
    pub fn var(name: impl Into<String>) -> Self {
        EventExpr::Var(name.into())
    }

    pub fn negate(e: EventExpr) -> Self {
        EventExpr::Not(Box::new(e))
    }

    pub fn and(a: EventExpr, b: EventExpr) -> Self {
        EventExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: EventExpr, b: EventExpr) -> Self {
        EventExpr::Or(Box::new(a), Box::new(b))
    }

    /// Parses the event grammar: identifiers, `true`, `false`, `!`, `&`, `|`
    /// and parentheses, with `!` binding tightest and `|` loosest.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut p = Parser {
            src: text,
            tokens: tokenize(text)?,
            pos: 0,
        };
        let e = p.disjunction()?;
        if let Some(tok) = p.tokens.get(p.pos) {
            return Err(Error::Syntax {
                line: 1,
                column: tok.column,
                message: format!("unexpected `{}`", tok.kind.text()),
            });
        }
        Ok(e)
    }

    /// Names referenced by the event, sorted and deduplicated.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            EventExpr::Var(n) => {
                out.insert(n.clone());
            }
            EventExpr::Not(e) => e.collect_vars(out),
            EventExpr::And(a, b) | EventExpr::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            EventExpr::True | EventExpr::False => {}
        }
    }

    /// Evaluates under a truth assignment given by name lookup.
    pub fn eval(&self, value: &impl Fn(&str) -> bool) -> bool {
        match self {
            EventExpr::Var(n) => value(n),
            EventExpr::Not(e) => !e.eval(value),
            EventExpr::And(a, b) => a.eval(value) && b.eval(value),
            EventExpr::Or(a, b) => a.eval(value) || b.eval(value),
            EventExpr::True => true,
            EventExpr::False => false,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            EventExpr::Or(..) => 1,
            EventExpr::And(..) => 2,
            EventExpr::Not(_) => 3,
            _ => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            write!(f, "(")?;
        }
        match self {
            EventExpr::Var(n) => write!(f, "{n}")?,
            EventExpr::True => write!(f, "true")?,
            EventExpr::False => write!(f, "false")?,
            EventExpr::Not(e) => {
                write!(f, "!")?;
                e.fmt_prec(f, 3)?;
            }
            // Left-associative: the right operand needs one level more.
            EventExpr::And(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " & ")?;
                b.fmt_prec(f, 3)?;
            }
            EventExpr::Or(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " | ")?;
                b.fmt_prec(f, 2)?;
            }
        }
        if paren {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for EventExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl FromStr for EventExpr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        EventExpr::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    LParen,
    RParen,
}

impl TokenKind {
    fn text(&self) -> String {
        match self {
            TokenKind::Ident(s) => s.clone(),
            TokenKind::True => "true".into(),
            TokenKind::False => "false".into(),
            TokenKind::Not => "!".into(),
            TokenKind::And => "&".into(),
            TokenKind::Or => "|".into(),
            TokenKind::LParen => "(".into(),
            TokenKind::RParen => ")".into(),
        }
    }
}

struct Token {
    kind: TokenKind,
    /// 1-based character column.
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, Error> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        let simple = match c {
            '!' => Some(TokenKind::Not),
            '&' => Some(TokenKind::And),
            '|' => Some(TokenKind::Or),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            _ => None,
        };
        if let Some(kind) = simple {
            out.push(Token { kind, column });
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let kind = match word.as_str() {
                "true" => TokenKind::True,
                "false" => TokenKind::False,
                _ => TokenKind::Ident(word),
            };
            out.push(Token { kind, column });
        } else {
            return Err(Error::Syntax {
                line: 1,
                column,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser<'_> {
    fn end_column(&self) -> usize {
        self.src.chars().count() + 1
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn disjunction(&mut self) -> Result<EventExpr, Error> {
        let mut lhs = self.conjunction()?;
        while self.peek() == Some(&TokenKind::Or) {
            self.pos += 1;
            let rhs = self.conjunction()?;
            lhs = EventExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<EventExpr, Error> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&TokenKind::And) {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = EventExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<EventExpr, Error> {
        let Some(tok) = self.tokens.get(self.pos) else {
            // Point at the dangling operator when there is one.
            let (column, message) = match self.pos.checked_sub(1).and_then(|p| self.tokens.get(p)) {
                Some(prev) => (
                    prev.column,
                    format!("dangling `{}` without an operand", prev.kind.text()),
                ),
                None => (self.end_column(), "empty formula".to_string()),
            };
            return Err(Error::Syntax {
                line: 1,
                column,
                message,
            });
        };
        let column = tok.column;
        let kind = tok.kind.clone();
        self.pos += 1;
        match kind {
            TokenKind::Not => Ok(EventExpr::negate(self.unary()?)),
            TokenKind::Ident(n) => Ok(EventExpr::Var(n)),
            TokenKind::True => Ok(EventExpr::True),
            TokenKind::False => Ok(EventExpr::False),
            TokenKind::LParen => {
                let e = self.disjunction()?;
                match self.tokens.get(self.pos) {
                    Some(Token {
                        kind: TokenKind::RParen,
                        ..
                    }) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    Some(t) => Err(Error::Syntax {
                        line: 1,
                        column: t.column,
                        message: format!("expected `)` but found `{}`", t.kind.text()),
                    }),
                    None => Err(Error::Syntax {
                        line: 1,
                        column: self.end_column(),
                        message: format!("unclosed `(` opened at column {column}"),
                    }),
                }
            }
            other => Err(Error::Syntax {
                line: 1,
                column,
                message: format!("expected operand but found `{}`", other.text()),
            }),
        }
    }
}

/// Constituent indices of an event within a scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    scope: Scope,
    members: Vec<usize>,
}

impl IndexSet {
    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    /// Sorted ascending.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }
}

/// Word-packed membership bits over `2^k` constituents.
#[derive(Clone)]
struct Bits(Vec<u64>, usize);

impl Bits {
    fn filled(n: usize, value: bool) -> Self {
        let words = n.div_ceil(64);
        let mut b = Bits(vec![if value { u64::MAX } else { 0 }; words], n);
        b.trim();
        b
    }

    fn trim(&mut self) {
        let rem = self.1 % 64;
        if rem != 0 {
            if let Some(last) = self.0.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    fn literal(n: usize, position: usize) -> Self {
        let mut b = Bits(vec![0; n.div_ceil(64)], n);
        if position < 6 {
            // pattern repeats within each word
            let mut pat = 0u64;
            for i in 0..64 {
                if Scope::bit(i, position) {
                    pat |= 1 << i;
                }
            }
            b.0.iter_mut().for_each(|w| *w = pat);
        } else {
            let period = 1usize << (position - 6); // in words
            for (w, word) in b.0.iter_mut().enumerate() {
                if (w / period) % 2 == 1 {
                    *word = u64::MAX;
                }
            }
        }
        b.trim();
        b
    }

    fn members(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, &word) in self.0.iter().enumerate() {
            let mut word = word;
            while word != 0 {
                let t = word.trailing_zeros() as usize;
                out.push(w * 64 + t);
                word &= word - 1;
            }
        }
        out
    }
}

fn bits_of(event: &EventExpr, scope: &Scope) -> Result<Bits, Error> {
    let n = scope.constituent_count();
    Ok(match event {
        EventExpr::True => Bits::filled(n, true),
        EventExpr::False => Bits::filled(n, false),
        EventExpr::Var(name) => {
            let p = scope
                .position(name)
                .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
            Bits::literal(n, p)
        }
        EventExpr::Not(e) => {
            let mut b = bits_of(e, scope)?;
            b.0.iter_mut().for_each(|w| *w = !*w);
            b.trim();
            b
        }
        EventExpr::And(a, b) => {
            let mut x = bits_of(a, scope)?;
            let y = bits_of(b, scope)?;
            x.0.iter_mut().zip(&y.0).for_each(|(p, q)| *p &= q);
            x
        }
        EventExpr::Or(a, b) => {
            let mut x = bits_of(a, scope)?;
            let y = bits_of(b, scope)?;
            x.0.iter_mut().zip(&y.0).for_each(|(p, q)| *p |= q);
            x
        }
    })
}

/// Constituents of `scope` whose truth assignment satisfies `event`.
pub fn index_set(event: &EventExpr, scope: &Scope) -> Result<IndexSet, Error> {
    Ok(IndexSet {
        scope: scope.clone(),
        members: bits_of(event, scope)?.members(),
    })
}

/// The full conjunction of literals for constituent `i`.
///
/// # Panics
/// If `i ≥ 2^k` or the scope is empty.
pub fn constituent_event(i: usize, scope: &Scope) -> EventExpr {
    assert!(!scope.is_empty(), "constituent of an empty scope");
    assert!(
        i < scope.constituent_count(),
        "constituent index {i} out of range for a scope of {} variables",
        scope.len()
    );
    let literal = |p: usize| {
        let v = EventExpr::var(&scope.names()[p]);
        if Scope::bit(i, p) {
            v
        } else {
            EventExpr::negate(v)
        }
    };
    (1..scope.len()).fold(literal(0), |acc, p| EventExpr::and(acc, literal(p)))
}

/// Marginalization from a scope onto a sub-scope: row `s` lists the big-scope
/// constituents that restrict to small-scope constituent `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalMap {
    rows: Vec<Vec<usize>>,
}

impl MarginalMap {
    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn row(&self, small_index: usize) -> &[usize] {
        &self.rows[small_index]
    }
}

/// Builds the 0/1 marginalization map from `big` onto `small`.
pub fn marginal_map(big: &Scope, small: &Scope) -> Result<MarginalMap, Error> {
    let positions: Vec<usize> = small
        .names()
        .iter()
        .map(|n| {
            big.position(n).ok_or_else(|| {
                Error::Contract(format!("scope {small} is not contained in {big}"))
            })
        })
        .collect::<Result<_, _>>()?;
    let mut rows = vec![Vec::new(); small.constituent_count()];
    for b in 0..big.constituent_count() {
        let s = positions
            .iter()
            .enumerate()
            .filter(|(_, &p)| Scope::bit(b, p))
            .fold(0usize, |acc, (j, _)| acc | 1 << j);
        rows[s].push(b);
    }
    Ok(MarginalMap { rows })
}
