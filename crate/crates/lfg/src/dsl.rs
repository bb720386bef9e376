//! The grammar DSL: a line-friendly textual format for rules and lexical
//! entries, with `#` comments.
//!
//! ```text
//! gf SUBJ OBJ
//! start S
//! depth 3
//! rule S -> NP { (^ SUBJ)=! } VP { ^=! }
//! lex wird AUX { (%^ AUX)=+ { (%^ DEP VFORM)=c BASE ... | ... } }
//! ```
//!
//! `^`/`!` are the f-projection up/down anchors, `%^`/`%!` the m-projection
//! ones. Operators: `=`, `=c`, `~=`. Optionality: `NP? { ... }`. Alternation:
//! `( DET { ... } | NP { ... } )?`. PRED values: `(^ PRED)='drehen<SUBJ,OBJ>'`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::grammar::{
    Anchor, Constraint, ConstraintKind, Grammar, LexEntry, PathExpr, PathStep, Projection, Rhs,
    Rule, RuleElement, RhsItem, SemTemplate, DEFAULT_DEPTH, DEFAULT_GF_SET,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DslError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unknown category: {name}")]
    UnknownCategory { name: String },
    #[error("bad path: {text}")]
    BadPath { text: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Arrow,     // ->
    LParen,
    RParen,
    LBrace,
    RBrace,
    Pipe,
    Question,
    Eq,        // =
    EqC,       // =c
    Neq,       // ~=
    Plus,
    Minus,
    UpF,       // ^
    DownF,     // !
    UpM,       // %^
    DownM,     // %!
    Quoted(String),
    Int(usize),
}

#[derive(Debug, Clone)]
struct Sp {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err_at(line: usize, col: usize, message: impl Into<String>) -> DslError {
    DslError::Syntax {
        line,
        col,
        message: message.into(),
    }
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

fn tokenize(text: &str) -> Result<Vec<Sp>, DslError> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();

    macro_rules! push {
        ($t:expr) => {
            toks.push(Sp {
                tok: $t,
                line,
                col,
            })
        };
    }

    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                push!(Tok::LParen);
                chars.next();
                col += 1;
            }
            ')' => {
                push!(Tok::RParen);
                chars.next();
                col += 1;
            }
            '{' => {
                push!(Tok::LBrace);
                chars.next();
                col += 1;
            }
            '}' => {
                push!(Tok::RBrace);
                chars.next();
                col += 1;
            }
            '|' => {
                push!(Tok::Pipe);
                chars.next();
                col += 1;
            }
            '?' => {
                push!(Tok::Question);
                chars.next();
                col += 1;
            }
            '+' => {
                push!(Tok::Plus);
                chars.next();
                col += 1;
            }
            '^' => {
                push!(Tok::UpF);
                chars.next();
                col += 1;
            }
            '!' => {
                push!(Tok::DownF);
                chars.next();
                col += 1;
            }
            '%' => {
                chars.next();
                col += 1;
                match chars.peek() {
                    Some('^') => {
                        push!(Tok::UpM);
                        chars.next();
                        col += 1;
                    }
                    Some('!') => {
                        push!(Tok::DownM);
                        chars.next();
                        col += 1;
                    }
                    _ => return Err(err_at(line, col, "expected ^ or ! after %")),
                }
            }
            '~' => {
                chars.next();
                col += 1;
                match chars.peek() {
                    Some('=') => {
                        push!(Tok::Neq);
                        chars.next();
                        col += 1;
                    }
                    _ => return Err(err_at(line, col, "expected = after ~")),
                }
            }
            '=' => {
                chars.next();
                col += 1;
                // `=c` only when the c cannot start a longer name, so plain
                // atoms beginning with c still work.
                let mut look = chars.clone();
                if look.next() == Some('c') {
                    let boundary = match look.next() {
                        None => true,
                        Some(n) => !is_name_char(n),
                    };
                    if boundary {
                        push!(Tok::EqC);
                        chars.next();
                        col += 1;
                        continue;
                    }
                }
                push!(Tok::Eq);
            }
            '-' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'>') {
                    push!(Tok::Arrow);
                    chars.next();
                    col += 1;
                } else {
                    push!(Tok::Minus);
                }
            }
            '\'' => {
                let start_col = col;
                chars.next();
                col += 1;
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('\'') => {
                            col += 1;
                            break;
                        }
                        Some('\n') | None => {
                            return Err(err_at(line, start_col, "unterminated quoted form"))
                        }
                        Some(ch) => {
                            s.push(ch);
                            col += 1;
                        }
                    }
                }
                toks.push(Sp {
                    tok: Tok::Quoted(s),
                    line,
                    col: start_col,
                });
            }
            c if c.is_ascii_digit() => {
                let start_col = col;
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                toks.push(Sp {
                    tok: Tok::Int(s.parse().unwrap()),
                    line,
                    col: start_col,
                });
            }
            c if c.is_alphabetic() => {
                let start_col = col;
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if is_name_char(c) {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                // A trailing `*` marks a starred path segment; keep it glued
                // to the name so the parser sees one unit.
                if chars.peek() == Some(&'*') {
                    s.push('*');
                    chars.next();
                    col += 1;
                }
                toks.push(Sp {
                    tok: Tok::Name(s),
                    line,
                    col: start_col,
                });
            }
            other => return Err(err_at(line, col, format!("unexpected character {other:?}"))),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Sp>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1))
    }

    fn next(&mut self) -> Option<Sp> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), DslError> {
        let (line, col) = self.here();
        match self.next() {
            Some(sp) if sp.tok == *want => Ok(()),
            Some(sp) => Err(err_at(sp.line, sp.col, format!("expected {what}"))),
            None => Err(err_at(line, col, format!("expected {what}, found end of input"))),
        }
    }

    fn expect_name(&mut self, what: &str) -> Result<String, DslError> {
        let (line, col) = self.here();
        match self.next() {
            Some(Sp {
                tok: Tok::Name(n), ..
            }) => Ok(n),
            Some(sp) => Err(err_at(sp.line, sp.col, format!("expected {what}"))),
            None => Err(err_at(line, col, format!("expected {what}, found end of input"))),
        }
    }

    fn anchor(&mut self) -> Option<(Projection, Anchor)> {
        let out = match self.peek()? {
            Tok::UpF => (Projection::F, Anchor::Up),
            Tok::DownF => (Projection::F, Anchor::Down),
            Tok::UpM => (Projection::M, Anchor::Up),
            Tok::DownM => (Projection::M, Anchor::Down),
            _ => return None,
        };
        self.next();
        Some(out)
    }

    /// A path: either a bare anchor (`^`, `%!`) or `(anchor STEP...)`.
    fn path(&mut self) -> Result<PathExpr, DslError> {
        if let Some((projection, anchor)) = self.anchor() {
            return Ok(PathExpr::new(projection, anchor, vec![]));
        }
        let (line, col) = self.here();
        match self.next() {
            Some(Sp { tok: Tok::LParen, .. }) => {}
            Some(sp) => return Err(err_at(sp.line, sp.col, "expected a path")),
            None => return Err(err_at(line, col, "expected a path, found end of input")),
        }
        let (projection, anchor) = self
            .anchor()
            .ok_or_else(|| {
                let (l, c) = self.here();
                err_at(l, c, "expected ^ ! %^ or %! inside path")
            })?;
        let mut steps = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::RParen) => {
                    self.next();
                    break;
                }
                Some(Tok::Name(n)) => {
                    let n = n.clone();
                    self.next();
                    if n == "GF" {
                        steps.push(PathStep::GfVar);
                    } else if let Some(stripped) = n.strip_suffix('*') {
                        steps.push(PathStep::Star(stripped.to_string()));
                    } else {
                        steps.push(PathStep::Attr(n));
                    }
                }
                _ => {
                    let (l, c) = self.here();
                    return Err(err_at(l, c, "expected attribute name or ) in path"));
                }
            }
        }
        if steps.is_empty() {
            return Err(err_at(line, col, "empty parenthesized path"));
        }
        let p = PathExpr::new(projection, anchor, steps);
        if p.star_count() > 1 || p.gf_var_count() > 1 {
            return Err(DslError::BadPath { text: p.to_string() });
        }
        Ok(p)
    }

    fn quoted_to_template(&self, text: &str, line: usize, col: usize) -> Result<SemTemplate, DslError> {
        // 'lemma<F1,F2>NT1,NT2' with both parts optional.
        let (lemma, rest) = match text.find('<') {
            Some(i) => (&text[..i], &text[i..]),
            None => (text, ""),
        };
        if lemma.is_empty() {
            return Err(err_at(line, col, "semantic form with empty lemma"));
        }
        let mut subcat = Vec::new();
        let mut nonthematic = Vec::new();
        if !rest.is_empty() {
            let close = rest
                .find('>')
                .ok_or_else(|| err_at(line, col, "unclosed < in semantic form"))?;
            let inner = &rest[1..close];
            if !inner.is_empty() {
                subcat = inner.split(',').map(|s| s.trim().to_string()).collect();
            }
            let after = &rest[close + 1..];
            if !after.is_empty() {
                nonthematic = after.split(',').map(|s| s.trim().to_string()).collect();
            }
        }
        Ok(SemTemplate {
            lemma: lemma.to_string(),
            subcat,
            nonthematic,
        })
    }

    fn rhs(&mut self) -> Result<Rhs, DslError> {
        match self.peek() {
            Some(Tok::Plus) => {
                self.next();
                Ok(Rhs::Atom("+".to_string()))
            }
            Some(Tok::Minus) => {
                self.next();
                Ok(Rhs::Atom("-".to_string()))
            }
            Some(Tok::Quoted(_)) => {
                let sp = self.next().unwrap();
                let text = match sp.tok {
                    Tok::Quoted(t) => t,
                    _ => unreachable!(),
                };
                Ok(Rhs::Sem(self.quoted_to_template(&text, sp.line, sp.col)?))
            }
            Some(Tok::Name(_)) => {
                let n = self.expect_name("atom")?;
                if n.ends_with('*') {
                    return Err(DslError::BadPath { text: n });
                }
                Ok(Rhs::Atom(n))
            }
            Some(Tok::LParen) | Some(Tok::UpF) | Some(Tok::DownF) | Some(Tok::UpM)
            | Some(Tok::DownM) => Ok(Rhs::Path(self.path()?)),
            _ => {
                let (l, c) = self.here();
                Err(err_at(l, c, "expected a value or path on the right-hand side"))
            }
        }
    }

    /// One constraint: an equation or a `{ ... | ... }` disjunction.
    fn constraint(&mut self) -> Result<Constraint, DslError> {
        if self.peek() == Some(&Tok::LBrace) {
            self.next();
            let mut branches = Vec::new();
            let mut current = Vec::new();
            loop {
                match self.peek() {
                    Some(Tok::Pipe) => {
                        self.next();
                        if current.is_empty() {
                            let (l, c) = self.here();
                            return Err(err_at(l, c, "empty disjunct"));
                        }
                        branches.push(std::mem::take(&mut current));
                    }
                    Some(Tok::RBrace) => {
                        self.next();
                        if current.is_empty() {
                            let (l, c) = self.here();
                            return Err(err_at(l, c, "empty disjunct"));
                        }
                        branches.push(current);
                        break;
                    }
                    Some(_) => current.push(self.constraint()?),
                    None => {
                        let (l, c) = self.here();
                        return Err(err_at(l, c, "unterminated disjunction"));
                    }
                }
            }
            if branches.len() < 2 {
                let (l, c) = self.here();
                return Err(err_at(l, c, "disjunction needs at least two branches"));
            }
            return Ok(Constraint::Disjunction(branches));
        }

        let lhs = self.path()?;
        let kind = match self.next() {
            Some(Sp { tok: Tok::Eq, .. }) => ConstraintKind::Define,
            Some(Sp { tok: Tok::EqC, .. }) => ConstraintKind::Constrain,
            Some(Sp { tok: Tok::Neq, .. }) => ConstraintKind::Negate,
            Some(sp) => return Err(err_at(sp.line, sp.col, "expected = =c or ~=")),
            None => {
                let (l, c) = self.here();
                return Err(err_at(l, c, "expected = =c or ~=, found end of input"));
            }
        };
        let rhs = self.rhs()?;
        Ok(Constraint::Eq { kind, lhs, rhs })
    }

    /// `{ constraint* }` annotation block.
    fn annotation_block(&mut self) -> Result<Vec<Constraint>, DslError> {
        self.expect(&Tok::LBrace, "{")?;
        let mut out = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::RBrace) => {
                    self.next();
                    return Ok(out);
                }
                Some(_) => out.push(self.constraint()?),
                None => {
                    let (l, c) = self.here();
                    return Err(err_at(l, c, "unterminated annotation block"));
                }
            }
        }
    }

    fn rule_element(&mut self) -> Result<RuleElement, DslError> {
        let category = self.expect_name("category")?;
        let annotations = if self.peek() == Some(&Tok::LBrace) {
            self.annotation_block()?
        } else {
            Vec::new()
        };
        Ok(RuleElement {
            category,
            annotations,
        })
    }

    fn rhs_item(&mut self) -> Result<RhsItem, DslError> {
        if self.peek() == Some(&Tok::LParen) {
            self.next();
            let mut options = vec![self.rule_element()?];
            loop {
                match self.peek() {
                    Some(Tok::Pipe) => {
                        self.next();
                        options.push(self.rule_element()?);
                    }
                    Some(Tok::RParen) => {
                        self.next();
                        break;
                    }
                    _ => {
                        let (l, c) = self.here();
                        return Err(err_at(l, c, "expected | or ) in alternation"));
                    }
                }
            }
            let optional = if self.peek() == Some(&Tok::Question) {
                self.next();
                true
            } else {
                false
            };
            return Ok(RhsItem::Choice { options, optional });
        }
        let category = self.expect_name("category")?;
        let optional = if self.peek() == Some(&Tok::Question) {
            self.next();
            true
        } else {
            false
        };
        let annotations = if self.peek() == Some(&Tok::LBrace) {
            self.annotation_block()?
        } else {
            Vec::new()
        };
        Ok(RhsItem::Element {
            element: RuleElement {
                category,
                annotations,
            },
            optional,
        })
    }

    fn at_item_start(&self) -> bool {
        matches!(self.peek(), Some(Tok::Name(_)) | Some(Tok::LParen))
    }
}

/// Unannotated elements default to `^=!` and `%^=%!`; an element annotated
/// only on the m-projection still gets `^=!`.
fn apply_annotation_defaults(el: &mut RuleElement) {
    let up_down = |p: Projection| Constraint::Eq {
        kind: ConstraintKind::Define,
        lhs: PathExpr::new(p, Anchor::Up, vec![]),
        rhs: Rhs::Path(PathExpr::new(p, Anchor::Down, vec![])),
    };
    if el.annotations.is_empty() {
        el.annotations.push(up_down(Projection::F));
        el.annotations.push(up_down(Projection::M));
        return;
    }
    if !el
        .annotations
        .iter()
        .any(|c| c.mentions_projection(Projection::F))
    {
        el.annotations.insert(0, up_down(Projection::F));
    }
}

pub fn load_grammar(text: &str) -> Result<Grammar, DslError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0 };

    let mut rules: Vec<Rule> = Vec::new();
    let mut lexicon: BTreeMap<String, Vec<LexEntry>> = BTreeMap::new();
    let mut start: Option<String> = None;
    let mut gf_set: Option<Vec<String>> = None;
    let mut depth: Option<usize> = None;

    while let Some(tok) = p.peek() {
        let (line, col) = p.here();
        match tok {
            Tok::Name(n) if n == "gf" => {
                p.next();
                let mut names = Vec::new();
                while let Some(Tok::Name(_)) = p.peek() {
                    // Directives are driven by keywords, so stop at the next one.
                    if matches!(p.peek(), Some(Tok::Name(n)) if n == "gf" || n == "start" || n == "depth" || n == "rule" || n == "lex") {
                        break;
                    }
                    names.push(p.expect_name("function name")?);
                }
                if names.is_empty() {
                    return Err(err_at(line, col, "gf needs at least one function name"));
                }
                gf_set = Some(names);
            }
            Tok::Name(n) if n == "start" => {
                p.next();
                start = Some(p.expect_name("start symbol")?);
            }
            Tok::Name(n) if n == "depth" => {
                p.next();
                match p.next() {
                    Some(Sp { tok: Tok::Int(k), .. }) => depth = Some(k),
                    Some(sp) => return Err(err_at(sp.line, sp.col, "expected a number after depth")),
                    None => return Err(err_at(line, col, "expected a number after depth")),
                }
            }
            Tok::Name(n) if n == "rule" => {
                p.next();
                let lhs = p.expect_name("rule left-hand side")?;
                p.expect(&Tok::Arrow, "->")?;
                let mut items = Vec::new();
                while p.at_item_start() {
                    // The next directive keyword ends this rule.
                    if matches!(p.peek(), Some(Tok::Name(n)) if n == "rule" || n == "lex" || n == "gf" || n == "start" || n == "depth") {
                        break;
                    }
                    items.push(p.rhs_item()?);
                }
                if items.is_empty() {
                    return Err(err_at(line, col, format!("rule {lhs} has an empty body")));
                }
                rules.push(Rule { lhs, items });
            }
            Tok::Name(n) if n == "lex" => {
                p.next();
                let form = p.expect_name("surface form")?;
                let category = p.expect_name("category")?;
                let constraints = p.annotation_block()?;
                lexicon
                    .entry(form.clone())
                    .or_default()
                    .push(LexEntry {
                        form,
                        category,
                        constraints,
                    });
            }
            _ => return Err(err_at(line, col, "expected gf, start, depth, rule, or lex")),
        }
    }

    let start = start.ok_or_else(|| err_at(1, 1, "missing start directive"))?;
    let gf_set =
        gf_set.unwrap_or_else(|| DEFAULT_GF_SET.iter().map(|s| s.to_string()).collect());
    let depth = depth.unwrap_or(DEFAULT_DEPTH);

    let mut g = Grammar {
        rules,
        lexicon,
        start,
        gf_set,
        depth,
    };

    // Annotation defaults, then well-formedness of every path.
    for rule in &mut g.rules {
        for item in &mut rule.items {
            match item {
                RhsItem::Element { element, .. } => apply_annotation_defaults(element),
                RhsItem::Choice { options, .. } => {
                    for el in options {
                        apply_annotation_defaults(el);
                    }
                }
            }
        }
        if rule.expansions().is_empty() {
            return Err(err_at(1, 1, format!("rule {} licenses the empty string", rule.lhs)));
        }
    }

    let mut check_paths = |constraints: &[Constraint]| -> Result<(), DslError> {
        for c in constraints {
            for path in c.paths() {
                if path.star_count() > 1 || path.gf_var_count() > 1 {
                    return Err(DslError::BadPath {
                        text: path.to_string(),
                    });
                }
            }
        }
        Ok(())
    };
    for rule in &g.rules {
        for item in &rule.items {
            match item {
                RhsItem::Element { element, .. } => check_paths(&element.annotations)?,
                RhsItem::Choice { options, .. } => {
                    for el in options {
                        check_paths(&el.annotations)?;
                    }
                }
            }
        }
    }
    for entries in g.lexicon.values() {
        for e in entries {
            check_paths(&e.constraints)?;
        }
    }

    // Every rhs category must be a lexical category or some rule's lhs; the
    // start symbol must be known too.
    let lhs_cats: Vec<&str> = g.rules.iter().map(|r| r.lhs.as_str()).collect();
    let lex_cats = g.lexical_categories();
    let known = |cat: &str| lhs_cats.contains(&cat) || lex_cats.iter().any(|c| c == cat);
    for rule in &g.rules {
        for exp in rule.expansions() {
            for el in exp {
                if !known(&el.category) {
                    return Err(DslError::UnknownCategory {
                        name: el.category.clone(),
                    });
                }
            }
        }
    }
    if !known(&g.start) {
        return Err(DslError::UnknownCategory {
            name: g.start.clone(),
        });
    }

    Ok(g)
}

/// Renders a grammar back to DSL text. `load_grammar(to_dsl(g))` yields a
/// grammar with identical structure.
pub fn to_dsl(g: &Grammar) -> String {
    let mut out = String::new();
    if !g.gf_set.is_empty() {
        let _ = writeln!(out, "gf {}", g.gf_set.join(" "));
    }
    let _ = writeln!(out, "start {}", g.start);
    let _ = writeln!(out, "depth {}", g.depth);
    out.push('\n');

    let element_text = |el: &RuleElement| -> String {
        let anns: Vec<String> = el.annotations.iter().map(|c| c.to_string()).collect();
        format!("{} {{ {} }}", el.category, anns.join(" "))
    };

    for rule in &g.rules {
        let _ = write!(out, "rule {} ->", rule.lhs);
        for item in &rule.items {
            match item {
                RhsItem::Element { element, optional } => {
                    if *optional {
                        // `NP? { ... }`
                        let anns: Vec<String> =
                            element.annotations.iter().map(|c| c.to_string()).collect();
                        let _ = write!(out, " {}? {{ {} }}", element.category, anns.join(" "));
                    } else {
                        let _ = write!(out, " {}", element_text(element));
                    }
                }
                RhsItem::Choice { options, optional } => {
                    let opts: Vec<String> = options.iter().map(element_text).collect();
                    let _ = write!(out, " ( {} )", opts.join(" | "));
                    if *optional {
                        let _ = write!(out, "?");
                    }
                }
            }
        }
        out.push('\n');
    }
    out.push('\n');

    for entries in g.lexicon.values() {
        for e in entries {
            let anns: Vec<String> = e.constraints.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(out, "lex {} {} {{ {} }}", e.form, e.category, anns.join(" "));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_a_small_grammar() {
        let g = load_grammar(
            "start S\ngf SUBJ OBJ\nrule S -> NP { (^ SUBJ)=! } VP { ^=! }\nrule VP -> V { ^=! }\nlex hund NP { (^ PRED)='Hund' }\nlex bellt V { (^ PRED)='bellen<SUBJ>' (^ TENSE)=PRES }",
        )
        .unwrap();
        assert_eq!(g.start, "S");
        assert_eq!(g.rules.len(), 2);
        assert_eq!(g.lexicon.len(), 2);
        assert_eq!(g.depth, DEFAULT_DEPTH);
    }

    #[test]
    fn empty_rule_body_is_a_syntax_error() {
        let err = load_grammar("start S\nrule S ->\nlex a S { (^ X)=Y }").unwrap_err();
        assert!(matches!(err, DslError::Syntax { .. }), "{err:?}");
    }

    #[test]
    fn unknown_category_is_reported() {
        let err = load_grammar("start S\nrule S -> NP { ^=! }\nlex a X { (^ P)=Q }").unwrap_err();
        assert_eq!(
            err,
            DslError::UnknownCategory {
                name: "NP".to_string()
            }
        );
    }

    #[test]
    fn double_star_path_is_rejected() {
        let err = load_grammar(
            "start S\nrule S -> NP { (^ XCOMP* DEP* SUBJ)=! }\nlex a NP { (^ P)=Q }",
        )
        .unwrap_err();
        assert!(matches!(err, DslError::BadPath { .. }), "{err:?}");
    }

    #[test]
    fn unannotated_element_gets_both_defaults() {
        let g = load_grammar("start S\nrule S -> V\nlex schlaeft V { (^ TENSE)=PRES }").unwrap();
        let el = match &g.rules[0].items[0] {
            RhsItem::Element { element, .. } => element,
            _ => panic!("expected element"),
        };
        assert_eq!(el.annotations.len(), 2);
        assert_eq!(el.annotations[0].to_string(), "^=!");
        assert_eq!(el.annotations[1].to_string(), "%^=%!");
    }

    #[test]
    fn m_only_element_gets_f_default() {
        let g = load_grammar(
            "start S\nrule S -> V { (%^ FIN)=c + }\nlex schlaeft V { (^ TENSE)=PRES }",
        )
        .unwrap();
        let el = match &g.rules[0].items[0] {
            RhsItem::Element { element, .. } => element,
            _ => panic!("expected element"),
        };
        assert_eq!(el.annotations[0].to_string(), "^=!");
    }

    #[test]
    fn eqc_and_atoms_starting_with_c() {
        let g = load_grammar(
            "start S\nrule S -> V { ^=! }\nlex a V { (^ KIND)=casual (^ VFORM)=c BASE }",
        )
        .unwrap();
        let e = &g.lexicon["a"][0];
        assert_eq!(e.constraints[0].to_string(), "(^ KIND) = casual");
        assert_eq!(e.constraints[1].to_string(), "(^ VFORM) =c BASE");
    }

    #[test]
    fn roundtrip_through_to_dsl() {
        let text = "gf SUBJ OBJ\nstart S\ndepth 2\nrule S -> NP { (^ XCOMP* GF)=! } VP { ^=! %^=%! (%! FIN)=c + }\nrule NP -> ( DET { ^=! } | NP { (^ GEN1)=! } )? N { ^=! } NP? { (^ GEN2)=! }\nlex wird AUX { (%^ AUX)=+ { (%^ DEP VFORM)=c BASE (^ TENSE)=FUT | (^ TENSE)=FUTPERF (^ PASSIVE) ~= + } }\nlex Hund N { (^ PRED)='Hund' }\nrule VP -> AUX { ^=! }\n";
        let g1 = load_grammar(text).unwrap();
        let g2 = load_grammar(&to_dsl(&g1)).unwrap();
        assert_eq!(g1, g2);
    }
}
