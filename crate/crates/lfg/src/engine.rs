//! Chart parsing over the context-free backbone and simultaneous solving of
//! f- and m-projection constraints.
//!
//! Solving is two-phase: all defining equations are solved by unification
//! over fully expanded disjunct combinations, then constraining equations,
//! inequations, completeness, and coherence are checked against the finished
//! minimal model. Uncertainty instantiations are treated as further disjuncts
//! at the annotated node.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::avm::{is_governable, AvmError, FeatureStructure, NodeRef, SemanticForm, Value};
use crate::grammar::{
    expand_disjunctions, instantiate_uncertainty, Anchor, Constraint, ConstraintKind, Grammar,
    LexEntry, PathExpr, Projection, Rhs, RuleElement, SemTemplate,
};

/// Guard against pathological grammars when enumerating parse trees.
pub const DEFAULT_TREE_CAP: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unknown token: {form}")]
    UnknownToken { form: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Wellformedness {
    #[error("incomplete at {path}: missing {function}")]
    Incomplete { path: String, function: String },
    #[error("incoherent at {path}: ungoverned {function}")]
    Incoherent { path: String, function: String },
}

/// A c-structure node: a phrase licensed by a rule, or a lexical leaf.
/// Each node carries the annotations of the rule element that licensed it
/// (empty at the root).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CTree {
    pub category: String,
    pub annotations: Vec<Constraint>,
    pub kind: CTreeKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CTreeKind {
    Phrase { children: Vec<CTree> },
    Leaf { form: String, entry: LexEntry },
}

impl CTree {
    pub fn bracketed(&self) -> String {
        match &self.kind {
            CTreeKind::Leaf { form, .. } => format!("({} {})", self.category, form),
            CTreeKind::Phrase { children } => {
                let inner: Vec<String> = children.iter().map(|c| c.bracketed()).collect();
                format!("({} {})", self.category, inner.join(" "))
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match &self.kind {
            CTreeKind::Leaf { .. } => 1,
            CTreeKind::Phrase { children } => children.iter().map(|c| c.leaf_count()).sum(),
        }
    }

    fn leaves(&self) -> Vec<&CTree> {
        match &self.kind {
            CTreeKind::Leaf { .. } => vec![self],
            CTreeKind::Phrase { children } => {
                children.iter().flat_map(|c| c.leaves()).collect()
            }
        }
    }
}

impl fmt::Display for CTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bracketed())
    }
}

// ---------------------------------------------------------------------------
// Chart parser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Deriv {
    Lex {
        entry_idx: usize,
    },
    Rule {
        rule_idx: usize,
        exp_idx: usize,
        children: Vec<(String, usize, usize)>,
    },
}

type Cell = BTreeMap<String, Vec<Deriv>>;

struct Chart {
    cells: HashMap<(usize, usize), Cell>,
    n: usize,
}

impl Chart {
    fn cell(&self, start: usize, end: usize) -> Option<&Cell> {
        self.cells.get(&(start, end))
    }

    fn has(&self, cat: &str, start: usize, end: usize) -> bool {
        self.cell(start, end)
            .map(|c| c.contains_key(cat))
            .unwrap_or(false)
    }

    fn add(&mut self, cat: &str, start: usize, end: usize, d: Deriv) -> bool {
        let cell = self.cells.entry((start, end)).or_default();
        let derivs = cell.entry(cat.to_string()).or_default();
        if derivs.contains(&d) {
            false
        } else {
            derivs.push(d);
            true
        }
    }

    /// Longest span covered by any edge, for no-parse diagnostics.
    fn best_partial_span(&self) -> Option<(usize, usize, String)> {
        let mut best: Option<(usize, usize, String)> = None;
        for ((s, e), cell) in &self.cells {
            for cat in cell.keys() {
                let better = match &best {
                    None => true,
                    Some((bs, be, _)) => (e - s، ) > (be - bs),
                };
                if better {
                    best = Some((*s, *e, cat.clone()));
                }
            }
        }
        best
    }
}

/// Enumerates the ways `elements` can cover `[start, end)`, as child
/// (category, start, end) triples. Leftmost element takes the shortest
/// span first.
fn segmentations(
    chart: &Chart,
    elements: &[RuleElement],
    start: usize,
    end: usize,
) -> Vec<Vec<(String, usize, usize)>> {
    if elements.is_empty() {
        return if start == end { vec![vec![]] } else { vec![] };
    }
    let first = &elements[0];
    let rest = &elements[1..];
    let mut out = Vec::new();
    // Each remaining element needs at least one token.
    let max_end = end - rest.len();
    for split in (start + 1)..=max_end {
        if !chart.has(&first.category, start, split) {
            continue;
        }
        for mut tail in segmentations(chart, rest, split, end) {
            let mut v = vec![(first.category.clone(), start, split)];
            v.append(&mut tail);
            out.push(v);
        }
    }
    out
}

struct ParseOutcome {
    trees: Vec<CTree>,
    /// Longest chart edge; useful when `trees` is empty.
    best_partial: Option<(usize, usize, String)>,
    capped: bool,
}

fn parse_internal(
    tokens: &[&str],
    g: &Grammar,
    cap: usize,
) -> Result<ParseOutcome, ParseError> {
    let n = tokens.len();
    let mut chart = Chart {
        cells: HashMap::new(),
        n,
    };
    if n == 0 {
        return Ok(ParseOutcome {
            trees: vec![],
            best_partial: None,
            capped: false,
        });
    }

    // Expansions are referenced by index from derivations.
    let rule_exps: Vec<Vec<Vec<RuleElement>>> = g
        .rules
        .iter()
        .map(|r| {
            r.expansions()
                .into_iter()
                .map(|exp| exp.into_iter().cloned().collect())
                .collect()
        })
        .collect();

    for (i, tok) in tokens.iter().enumerate() {
        let entries = g
            .entries_for(tok)
            .ok_or_else(|| ParseError::UnknownToken {
                form: tok.to_string(),
            })?;
        for (entry_idx, e) in entries.iter().enumerate() {
            chart.add(&e.category, i, i + 1, Deriv::Lex { entry_idx });
        }
    }

    for len in 1..=n {
        for start in 0..=(n - len) {
            let end = start + len;
            // Multi-element expansions first: all their children are strictly
            // shorter spans, already final.
            for (rule_idx, rule) in g.rules.iter().enumerate() {
                for (exp_idx, exp) in rule_exps[rule_idx].iter().enumerate() {
                    if exp.len() < 2 || exp.len() > len {
                        continue;
                    }
                    let _ = rule;
                    for children in segmentations(&chart, exp, start, end) {
                        chart.add(
                            &g.rules[rule_idx].lhs,
                            start,
                            end,
                            Deriv::Rule {
                                rule_idx,
                                exp_idx,
                                children,
                            },
                        );
                    }
                }
            }
            // Unary expansions consume full-span categories; iterate to a
            // fixpoint to cover unary chains.
            loop {
                let mut changed = false;
                for (rule_idx, _) in g.rules.iter().enumerate() {
                    for (exp_idx, exp) in rule_exps[rule_idx].iter().enumerate() {
                        if exp.len() != 1 {
                            continue;
                        }
                        if chart.has(&exp[0].category, start, end) {
                            let added = chart.add(
                                &g.rules[rule_idx].lhs,
                                start,
                                end,
                                Deriv::Rule {
                                    rule_idx,
                                    exp_idx,
                                    children: vec![(exp[0].category.clone(), start, end)],
                                },
                            );
                            changed = changed || added;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
        }
    }

    // Tree extraction in leftmost-derivation order, capped.
    let mut budget = cap;
    let mut capped = false;
    fn build(
        chart: &Chart,
        g: &Grammar,
        rule_exps: &[Vec<Vec<RuleElement>>],
        tokens: &[&str],
        cat: &str,
        start: usize,
        end: usize,
        annotations: Vec<Constraint>,
        on_stack: &mut HashSet<(String, usize, usize)>,
        budget: &mut usize,
        capped: &mut bool,
    ) -> Vec<CTree> {
        if *budget == 0 {
            *capped = true;
            return vec![];
        }
        let key = (cat.to_string(), start, end);
        if on_stack.contains(&key) {
            return vec![];
        }
        on_stack.insert(key.clone());
        let mut out = Vec::new();
        let derivs = match chart.cell(start, end).and_then(|c| c.get(cat)) {
            Some(d) => d.clone(),
            None => {
                on_stack.remove(&key);
                return vec![];
            }
        };
        'derivs: for d in &derivs {
            if *budget == 0 {
                *capped = true;
                break;
            }
            match d {
                Deriv::Lex { entry_idx } => {
                    let form = tokens[start];
                    let entry = &g.entries_for(form).unwrap()[*entry_idx];
                    if entry.category != cat {
                        continue;
                    }
                    out.push(CTree {
                        category: cat.to_string(),
                        annotations: annotations.clone(),
                        kind: CTreeKind::Leaf {
                            form: form.to_string(),
                            entry: entry.clone(),
                        },
                    });
                    *budget -= 1;
                }
                Deriv::Rule {
                    rule_idx,
                    exp_idx,
                    children,
                } => {
                    let exp = &rule_exps[*rule_idx][*exp_idx];
                    let mut child_alternatives: Vec<Vec<CTree>> = Vec::new();
                    for (el, (ccat, cs, ce)) in exp.iter().zip(children) {
                        let subtrees = build(
                            chart,
                            g,
                            rule_exps,
                            tokens,
                            ccat,
                            *cs,
                            *ce,
                            el.annotations.clone(),
                            on_stack,
                            budget,
                            capped,
                        );
                        if subtrees.is_empty() {
                            continue 'derivs;
                        }
                        child_alternatives.push(subtrees);
                    }
                    // Left-major product over child alternatives.
                    let mut combos: Vec<Vec<CTree>> = vec![vec![]];
                    for alts in &child_alternatives {
                        let mut next = Vec::new();
                        for prefix in &combos {
                            for alt in alts {
                                let mut v = prefix.clone();
                                v.push(alt.clone());
                                next.push(v);
                            }
                        }
                        combos = next;
                    }
                    for children in combos {
                        if *budget == 0 {
                            *capped = true;
                            break;
                        }
                        out.push(CTree {
                            category: cat.to_string(),
                            annotations: annotations.clone(),
                            kind: CTreeKind::Phrase { children },
                        });
                        *budget -= 1;
                    }
                }
            }
        }
        on_stack.remove(&key);
        out
    }

    let trees = build(
        &chart,
        g,
        &rule_exps,
        tokens,
        &g.start,
        0,
        n,
        Vec::new(),
        &mut HashSet::new(),
        &mut budget,
        &mut capped,
    );

    Ok(ParseOutcome {
        trees,
        best_partial: chart.best_partial_span(),
        capped,
    })
}

/// All complete c-structure trees over the tokens, rooted in the start
/// symbol, in deterministic order. Lexical ambiguity multiplies trees.
/// An empty result means no parse.
pub fn parse_cstructure(tokens: &[&str], g: &Grammar) -> Result<Vec<CTree>, ParseError> {
    parse_internal(tokens, g, DEFAULT_TREE_CAP).map(|o| o.trees)
}

/// Like [`parse_cstructure`], also reporting the longest chart edge for
/// no-parse diagnostics.
pub fn parse_cstructure_diag(
    tokens: &[&str],
    g: &Grammar,
) -> Result<(Vec<CTree>, Option<(usize, usize, String)>), ParseError> {
    parse_internal(tokens, g, DEFAULT_TREE_CAP).map(|o| (o.trees, o.best_partial))
}

// ---------------------------------------------------------------------------
// Constraint solving
// ---------------------------------------------------------------------------

/// One solution of a parse.
#[derive(Clone)]
pub struct Analysis {
    pub ctree: CTree,
    pub fstruct: FeatureStructure,
    pub mstruct: FeatureStructure,
    /// For each lexical leaf, left to right: (surface form, index of the
    /// entry disjunct that fired).
    pub disjunct_trace: Vec<(String, usize)>,
}

/// Why a candidate disjunct/instantiation combination was discarded.
#[derive(Debug, Clone)]
pub struct CandidateFailure {
    pub candidate: usize,
    pub node: String,
    pub constraint: String,
    pub reason: String,
}

#[derive(Clone)]
struct GroundPath {
    projection: Projection,
    anchor: Anchor,
    attrs: Vec<String>,
}

impl GroundPath {
    fn from_expr(p: &PathExpr) -> GroundPath {
        GroundPath {
            projection: p.projection,
            anchor: p.anchor,
            attrs: p
                .steps
                .iter()
                .map(|s| match s {
                    crate::grammar::PathStep::Attr(a) => a.clone(),
                    _ => unreachable!("instantiated path"),
                })
                .collect(),
        }
    }
}

#[derive(Clone)]
enum GroundRhs {
    Path(GroundPath),
    Atom(String),
    Sem(SemTemplate),
}

#[derive(Clone)]
struct GroundEq {
    kind: ConstraintKind,
    lhs: GroundPath,
    rhs: GroundRhs,
    display: String,
}

/// Expands a constraint list into fully ground variants:
/// DNF over disjunctions, then the product of uncertainty instantiations.
/// Returns (dnf index, ground list) pairs in deterministic order.
fn ground_variants(
    constraints: &[Constraint],
    g: &Grammar,
) -> Vec<(usize, Vec<GroundEq>)> {
    let dnf = expand_disjunctions(constraints);
    let mut out = Vec::new();
    for (dnf_idx, list) in dnf.iter().enumerate() {
        // Per-constraint instantiation alternatives.
        let mut per: Vec<Vec<GroundEq>> = Vec::new();
        for c in list {
            let (kind, lhs, rhs) = match c {
                Constraint::Eq { kind, lhs, rhs } => (kind, lhs, rhs),
                Constraint::Disjunction(_) => unreachable!("DNF is disjunction-free"),
            };
            let lhs_insts = instantiate_uncertainty(lhs, &g.gf_set, g.depth);
            let rhs_insts: Vec<Option<PathExpr>> = match rhs {
                Rhs::Path(p) => instantiate_uncertainty(p, &g.gf_set, g.depth)
                    .into_iter()
                    .map(Some)
                    .collect(),
                _ => vec![None],
            };
            let mut variants = Vec::new();
            for li in &lhs_insts {
                for ri in &rhs_insts {
                    let grhs = match (rhs, ri) {
                        (Rhs::Path(_), Some(p)) => GroundRhs::Path(GroundPath::from_expr(p)),
                        (Rhs::Atom(a), _) => GroundRhs::Atom(a.clone()),
                        (Rhs::Sem(t), _) => GroundRhs::Sem(t.clone()),
                        _ => unreachable!(),
                    };
                    let display = match ri {
                        Some(p) => format!("{} {} {}", li, op_text(*kind), p),
                        None => format!(
                            "{} {} {}",
                            li,
                            op_text(*kind),
                            match rhs {
                                Rhs::Atom(a) => a.clone(),
                                Rhs::Sem(t) => t.to_string(),
                                Rhs::Path(_) => unreachable!(),
                            }
                        ),
                    };
                    variants.push(GroundEq {
                        kind: *kind,
                        lhs: GroundPath::from_expr(li),
                        rhs: grhs,
                        display,
                    });
                }
            }
            per.push(variants);
        }
        // Product, first constraint varying slowest.
        let mut combos: Vec<Vec<GroundEq>> = vec![vec![]];
        for variants in &per {
            let mut next = Vec::new();
            for prefix in &combos {
                for v in variants {
                    let mut nv = prefix.clone();
                    nv.push(v.clone());
                    next.push(nv);
                }
            }
            combos = next;
        }
        for combo in combos {
            out.push((dnf_idx, combo));
        }
    }
    out
}

fn op_text(kind: ConstraintKind) -> &'static str {
    match kind {
        ConstraintKind::Define => "=",
        ConstraintKind::Constrain => "=c",
        ConstraintKind::Negate => "~=",
    }
}

/// The f/m node pair belonging to one c-structure node.
#[derive(Clone)]
struct Projections {
    f: NodeRef,
    m: NodeRef,
}

impl Projections {
    fn fresh() -> Projections {
        Projections {
            f: NodeRef::top(),
            m: NodeRef::top(),
        }
    }

    fn by(&self, p: Projection) -> &NodeRef {
        match p {
            Projection::F => &self.f,
            Projection::M => &self.m,
        }
    }
}

/// Frame for resolving a ground path: where Up and Down point.
struct Frame<'a> {
    up: Option<&'a Projections>,
    down: &'a Projections,
}

impl<'a> Frame<'a> {
    fn base(&self, path: &GroundPath) -> Option<NodeRef> {
        let projs = match path.anchor {
            Anchor::Up => self.up?,
            Anchor::Down => self.down,
        };
        Some(projs.by(path.projection).clone())
    }

    fn resolve_create(&self, path: &GroundPath) -> Result<NodeRef, String> {
        let mut cur = self
            .base(path)
            .ok_or_else(|| "no mother structure at the root".to_string())?;
        let mut prefix: Vec<String> = Vec::new();
        for attr in &path.attrs {
            cur = cur
                .child_or_create(attr, &prefix)
                .map_err(|e| e.to_string())?;
            prefix.push(attr.clone());
        }
        Ok(cur)
    }

    /// Resolution without creating structure; `None` when any step is
    /// missing or passes through a non-structure.
    fn resolve_peek(&self, path: &GroundPath) -> Option<NodeRef> {
        let mut cur = self.base(path)?;
        for attr in &path.attrs {
            cur = cur.child(attr)?;
        }
        Some(cur)
    }
}

struct NodePlan {
    /// Tree-node category, for diagnostics.
    category: String,
    /// Leaf surface form, if any.
    form: Option<String>,
    /// Index of this node's mother in preorder (None at the root).
    mother: Option<usize>,
    /// Ground variants of the licensing rule element's annotations.
    slot_variants: Vec<(usize, Vec<GroundEq>)>,
    /// Ground variants of the lexical entry (one empty variant for phrases).
    entry_variants: Vec<(usize, Vec<GroundEq>)>,
}

fn collect_plan(
    tree: &CTree,
    g: &Grammar,
    mother: Option<usize>,
    plans: &mut Vec<NodePlan>,
) {
    let idx = plans.len();
    let (form, entry_variants) = match &tree.kind {
        CTreeKind::Leaf { form, entry } => (
            Some(form.clone()),
            ground_variants(&entry.constraints, g),
        ),
        CTreeKind::Phrase { .. } => (None, vec![(0, Vec::new())]),
    };
    plans.push(NodePlan {
        category: tree.category.clone(),
        form,
        mother,
        slot_variants: ground_variants(&tree.annotations, g),
        entry_variants,
    });
    if let CTreeKind::Phrase { children } = &tree.kind {
        for c in children {
            collect_plan(c, g, Some(idx), plans);
        }
    }
}

/// A variant is locally hopeless when its defining equations already clash
/// on fresh structures; no global candidate containing it can succeed.
fn locally_consistent(eqs: &[GroundEq], has_mother: bool) -> bool {
    let mother = Projections::fresh();
    let own = Projections::fresh();
    let frame = Frame {
        up: if has_mother { Some(&mother) } else { None },
        down: &own,
    };
    let mut counter = 0u64;
    for eq in eqs {
        if eq.kind != ConstraintKind::Define {
            continue;
        }
        if exec_define(&frame, eq, &mut counter).is_err() {
            return false;
        }
    }
    true
}

fn exec_define(frame: &Frame, eq: &GroundEq, instance_counter: &mut u64) -> Result<(), String> {
    let lhs = frame.resolve_create(&eq.lhs)?;
    let rhs_node = match &eq.rhs {
        GroundRhs::Atom(a) => NodeRef::atom(a.clone()),
        GroundRhs::Sem(t) => {
            let id = *instance_counter;
            *instance_counter += 1;
            NodeRef::sem(
                SemanticForm::new(t.lemma.clone(), t.subcat.clone(), id)
                    .with_nonthematic(t.nonthematic.clone()),
            )
        }
        GroundRhs::Path(p) => frame.resolve_create(p)?,
    };
    let mut path = eq.lhs.attrs.clone();
    NodeRef::unify(&lhs, &rhs_node, &mut path).map_err(|e| e.to_string())
}

fn values_equal(a: &NodeRef, b: &NodeRef) -> bool {
    if a.same_node(b) {
        return true;
    }
    match (
        FeatureStructure::from_node(a.clone()).root_value(),
        FeatureStructure::from_node(b.clone()).root_value(),
    ) {
        (Some(Value::Atom(x)), Some(Value::Atom(y))) => x == y,
        (Some(Value::Sem(x)), Some(Value::Sem(y))) => x.instance() == y.instance(),
        _ => false,
    }
}

fn check_one(frame: &Frame, eq: &GroundEq) -> Result<(), String> {
    let lhs = frame.resolve_peek(&eq.lhs);
    match eq.kind {
        ConstraintKind::Constrain => {
            let lhs = match lhs {
                Some(n) => n,
                None => return Err(format!("unsatisfied {}", eq.display)),
            };
            let ok = match &eq.rhs {
                GroundRhs::Atom(a) => matches!(
                    FeatureStructure::from_node(lhs.clone()).root_value(),
                    Some(Value::Atom(x)) if &x == a
                ),
                GroundRhs::Sem(t) => matches!(
                    FeatureStructure::from_node(lhs.clone()).root_value(),
                    Some(Value::Sem(s)) if s.lemma() == t.lemma && s.subcat() == t.subcat.as_slice()
                ),
                GroundRhs::Path(p) => match frame.resolve_peek(p) {
                    Some(r) => values_equal(&lhs, &r),
                    None => false,
                },
            };
            if ok {
                Ok(())
            } else {
                Err(format!("unsatisfied {}", eq.display))
            }
        }
        ConstraintKind::Negate => {
            let lhs = match lhs {
                Some(n) => n,
                // Absent paths satisfy inequations.
                None => return Ok(()),
            };
            let equal = match &eq.rhs {
                GroundRhs::Atom(a) => matches!(
                    FeatureStructure::from_node(lhs.clone()).root_value(),
                    Some(Value::Atom(x)) if &x == a
                ),
                GroundRhs::Sem(t) => matches!(
                    FeatureStructure::from_node(lhs.clone()).root_value(),
                    Some(Value::Sem(s)) if s.lemma() == t.lemma && s.subcat() == t.subcat.as_slice()
                ),
                GroundRhs::Path(p) => match frame.resolve_peek(p) {
                    Some(r) => values_equal(&lhs, &r),
                    None => false,
                },
            };
            if equal {
                Err(format!("violated {}", eq.display))
            } else {
                Ok(())
            }
        }
        ConstraintKind::Define => Ok(()),
    }
}

/// Completeness: every function in a local PRED's subcat list is present
/// locally with a PRED of its own; non-thematic functions need only be
/// present. Coherence: every governable function present locally is governed
/// by the local PRED. GEN1/GEN2 are semantic functions and exempt.
pub fn check_completeness_coherence(fs: &FeatureStructure) -> Result<(), Wellformedness> {
    fn path_text(path: &[String]) -> String {
        if path.is_empty() {
            "root".to_string()
        } else {
            path.join(" ")
        }
    }

    fn walk(fs: &FeatureStructure, path: &mut Vec<String>) -> Result<(), Wellformedness> {
        let entries = fs.entries();
        let pred = entries.iter().find_map(|(k, v)| match (k.as_str(), v) {
            ("PRED", Value::Sem(s)) => Some(s.clone()),
            _ => None,
        });
        match &pred {
            Some(p) => {
                for f in p.subcat() {
                    let sub = entries.iter().find(|(k, _)| k == f);
                    let has_own_pred = match sub {
                        Some((_, Value::Fs(inner))) => inner
                            .entries()
                            .iter()
                            .any(|(k, v)| k == "PRED" && matches!(v, Value::Sem(_))),
                        _ => false,
                    };
                    if !has_own_pred {
                        return Err(Wellformedness::Incomplete {
                            path: path_text(path),
                            function: f.clone(),
                        });
                    }
                }
                for f in p.nonthematic() {
                    if !entries.iter().any(|(k, _)| k == f) {
                        return Err(Wellformedness::Incomplete {
                            path: path_text(path),
                            function: f.clone(),
                        });
                    }
                }
                for (attr, _) in &entries {
                    if is_governable(attr)
                        && !p.subcat().contains(attr)
                        && !p.nonthematic().contains(attr)
                    {
                        return Err(Wellformedness::Incoherent {
                            path: path_text(path),
                            function: attr.clone(),
                        });
                    }
                }
            }
            None => {
                for (attr, _) in &entries {
                    if is_governable(attr) {
                        return Err(Wellformedness::Incoherent {
                            path: path_text(path),
                            function: attr.clone(),
                        });
                    }
                }
            }
        }
        for (attr, v) in &entries {
            if let Value::Fs(inner) = v {
                path.push(attr.clone());
                walk(inner, path)?;
                path.pop();
            }
        }
        Ok(())
    }

    walk(fs, &mut Vec::new())
}

/// What `solve` found, including why candidates were discarded.
pub struct SolveReport {
    pub analyses: Vec<Analysis>,
    pub failures: Vec<CandidateFailure>,
    pub candidates: usize,
}

enum Forcing<'a> {
    None,
    /// Lexeme form -> required entry-disjunct index. Forced lexemes bypass
    /// the local consistency prefilter.
    Entries(&'a BTreeMap<String, usize>),
}

fn solve_impl(tree: &CTree, g: &Grammar, forcing: &Forcing) -> SolveReport {
    let mut plans = Vec::new();
    collect_plan(tree, g, None, &mut plans);

    // Per-node admissible (slot, entry) variant pairs.
    struct NodeChoices {
        pairs: Vec<(usize, usize)>, // indices into slot_variants / entry_variants
    }
    let mut choices: Vec<NodeChoices> = Vec::new();
    for plan in &plans {
        let has_mother = plan.mother.is_some();
        let forced_entry: Option<usize> = match forcing {
            Forcing::Entries(map) => plan.form.as_ref().and_then(|f| map.get(f).copied()),
            Forcing::None => None,
        };
        let mut slot_ok: Vec<usize> = Vec::new();
        for (i, (_, eqs)) in plan.slot_variants.iter().enumerate() {
            if locally_consistent(eqs, has_mother) {
                slot_ok.push(i);
            }
        }
        let mut entry_ok: Vec<usize> = Vec::new();
        for (i, (dnf_idx, eqs)) in plan.entry_variants.iter().enumerate() {
            match forced_entry {
                Some(want) => {
                    if *dnf_idx == want {
                        entry_ok.push(i);
                    }
                }
                None => {
                    if locally_consistent(eqs, true) {
                        entry_ok.push(i);
                    }
                }
            }
        }
        let mut pairs = Vec::new();
        for s in &slot_ok {
            for e in &entry_ok {
                pairs.push((*s, *e));
            }
        }
        choices.push(NodeChoices { pairs });
    }

    let mut report = SolveReport {
        analyses: Vec::new(),
        failures: Vec::new(),
        candidates: 0,
    };
    if choices.iter().any(|c| c.pairs.is_empty()) {
        return report;
    }

    let leaf_order: Vec<usize> = plans
        .iter()
        .enumerate()
        .filter(|(_, p)| p.form.is_some())
        .map(|(i, _)| i)
        .collect();

    let mut seen: HashSet<(String, String, String)> = HashSet::new();
    let ctree_text = tree.bracketed();

    // Odometer over per-node choice pairs; the root varies slowest.
    let mut idx = vec![0usize; plans.len()];
    'candidates: loop {
        report.candidates += 1;
        let candidate_no = report.candidates;

        let nodes: Vec<Projections> = plans.iter().map(|_| Projections::fresh()).collect();
        let mut counter = 0u64;
        let mut failed: Option<CandidateFailure> = None;

        // Phase 1: defining equations, preorder, slot then entry.
        'phase1: for (ni, plan) in plans.iter().enumerate() {
            let (si, ei) = choices[ni].pairs[idx[ni]];
            let mother = plan.mother.map(|mi| &nodes[mi]);
            let slot_frame = Frame {
                up: mother,
                down: &nodes[ni],
            };
            for eq in &plan.slot_variants[si].1 {
                if eq.kind == ConstraintKind::Define {
                    if let Err(reason) = exec_define(&slot_frame, eq, &mut counter) {
                        failed = Some(CandidateFailure {
                            candidate: candidate_no,
                            node: plan.category.clone(),
                            constraint: eq.display.clone(),
                            reason,
                        });
                        break 'phase1;
                    }
                }
            }
            // In a lexical entry both anchors refer to the preterminal itself.
            let entry_frame = Frame {
                up: Some(&nodes[ni]),
                down: &nodes[ni],
            };
            for eq in &plan.entry_variants[ei].1 {
                if eq.kind == ConstraintKind::Define {
                    if let Err(reason) = exec_define(&entry_frame, eq, &mut counter) {
                        failed = Some(CandidateFailure {
                            candidate: candidate_no,
                            node: plan.category.clone(),
                            constraint: eq.display.clone(),
                            reason,
                        });
                        break 'phase1;
                    }
                }
            }
        }

        // Phase 2: constraining equations, inequations, acyclicity,
        // completeness and coherence against the finished model.
        if failed.is_none() {
            let root = &nodes[0];
            if !root.f.is_acyclic() || !root.m.is_acyclic() {
                failed = Some(CandidateFailure {
                    candidate: candidate_no,
                    node: plans[0].category.clone(),
                    constraint: "(acyclicity)".to_string(),
                    reason: "cyclic structure".to_string(),
                });
            }
        }
        if failed.is_none() {
            'phase2: for (ni, plan) in plans.iter().enumerate() {
                let (si, ei) = choices[ni].pairs[idx[ni]];
                let mother = plan.mother.map(|mi| &nodes[mi]);
                let slot_frame = Frame {
                    up: mother,
                    down: &nodes[ni],
                };
                for eq in &plan.slot_variants[si].1 {
                    if let Err(reason) = check_one(&slot_frame, eq) {
                        failed = Some(CandidateFailure {
                            candidate: candidate_no,
                            node: plan.category.clone(),
                            constraint: eq.display.clone(),
                            reason,
                        });
                        break 'phase2;
                    }
                }
                let entry_frame = Frame {
                    up: Some(&nodes[ni]),
                    down: &nodes[ni],
                };
                for eq in &plan.entry_variants[ei].1 {
                    if let Err(reason) = check_one(&entry_frame, eq) {
                        failed = Some(CandidateFailure {
                            candidate: candidate_no,
                            node: plan.category.clone(),
                            constraint: eq.display.clone(),
                            reason,
                        });
                        break 'phase2;
                    }
                }
            }
        }
        if failed.is_none() {
            let fs = FeatureStructure::from_node(nodes[0].f.clone());
            if let Err(e) = check_completeness_coherence(&fs) {
                failed = Some(CandidateFailure {
                    candidate: candidate_no,
                    node: plans[0].category.clone(),
                    constraint: "(wellformedness)".to_string(),
                    reason: e.to_string(),
                });
            }
        }

        match failed {
            Some(f) => report.failures.push(f),
            None => {
                let fstruct = FeatureStructure::from_node(nodes[0].f.clone());
                let mstruct = FeatureStructure::from_node(nodes[0].m.clone());
                let fkey = fstruct.canonical_form().unwrap_or_default();
                let mkey = mstruct.canonical_form().unwrap_or_default();
                if seen.insert((fkey, mkey, ctree_text.clone())) {
                    let disjunct_trace = leaf_order
                        .iter()
                        .map(|&ni| {
                            let (_, ei) = choices[ni].pairs[idx[ni]];
                            (
                                plans[ni].form.clone().unwrap(),
                                plans[ni].entry_variants[ei].0,
                            )
                        })
                        .collect();
                    report.analyses.push(Analysis {
                        ctree: tree.clone(),
                        fstruct,
                        mstruct,
                        disjunct_trace,
                    });
                }
            }
        }

        // Advance the odometer, last node fastest.
        let mut pos = plans.len();
        loop {
            if pos == 0 {
                break 'candidates;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < choices[pos].pairs.len() {
                break;
            }
            idx[pos] = 0;
        }
    }

    report
}

/// Solves a licensed c-structure tree against the grammar, returning all
/// surviving, deduplicated analyses in deterministic order.
pub fn solve(tree: &CTree, g: &Grammar) -> Vec<Analysis> {
    solve_impl(tree, g, &Forcing::None).analyses
}

/// `solve` with per-candidate failure diagnostics.
pub fn solve_with_diagnostics(tree: &CTree, g: &Grammar) -> SolveReport {
    solve_impl(tree, g, &Forcing::None)
}

/// Restricts named lexemes to one entry disjunct (bypassing local pruning);
/// exhaustive enumeration over all disjunct combinations goes through here.
pub fn solve_forced(
    tree: &CTree,
    g: &Grammar,
    forced: &BTreeMap<String, usize>,
) -> Vec<Analysis> {
    solve_impl(tree, g, &Forcing::Entries(forced)).analyses
}

/// The number of entry disjuncts per lexical leaf, left to right. Useful for
/// exhaustive enumeration.
pub fn leaf_disjunct_counts(tree: &CTree) -> Vec<(String, usize)> {
    tree.leaves()
        .iter()
        .map(|l| match &l.kind {
            CTreeKind::Leaf { form, entry } => (form.clone(), entry.disjuncts().len()),
            _ => unreachable!(),
        })
        .collect()
}

/// Tokenize on whitespace, parse, and solve every tree in order.
pub fn analyze(sentence: &str, g: &Grammar) -> Result<Vec<Analysis>, ParseError> {
    let tokens: Vec<&str> = sentence.split_whitespace().collect();
    let trees = parse_cstructure(&tokens, g)?;
    Ok(trees.iter().flat_map(|t| solve(t, g)).collect())
}

impl fmt::Debug for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Analysis")
            .field("ctree", &self.ctree.bracketed())
            .field("fstruct", &self.fstruct)
            .field("mstruct", &self.mstruct)
            .field("disjunct_trace", &self.disjunct_trace)
            .finish()
    }
}

// Unused-field escape hatch: `capped` is reported through analyze later if
// needed.
impl ParseOutcome {
    fn _reserved(&self) -> bool {
        self.capped
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::load_grammar;

    const TOY: &str = "\
gf SUBJ OBJ
start S
depth 1
rule S -> NP { (^ SUBJ)=! } V { ^=! }
rule NP -> N { ^=! }
lex hund N { (^ PRED)='Hund' (^ CASE)=NOM }
lex bellt V { (^ PRED)='bellen<SUBJ>' (^ TENSE)=PRES }
";

    #[test]
    fn parses_and_solves_a_toy_sentence() {
        let g = load_grammar(TOY).unwrap();
        let trees = parse_cstructure(&["hund", "bellt"], &g).unwrap();
        assert_eq!(trees.len(), 1);
        assert_eq!(trees[0].bracketed(), "(S (NP (N hund)) (V bellt))");
        let analyses = solve(&trees[0], &g);
        assert_eq!(analyses.len(), 1);
        assert_eq!(
            analyses[0].fstruct.canonical_form().unwrap(),
            "[ PRED 'bellen<SUBJ>' SUBJ [ CASE NOM PRED 'Hund' ] TENSE PRES ]"
        );
    }

    #[test]
    fn unknown_token_is_an_error() {
        let g = load_grammar(TOY).unwrap();
        assert_eq!(
            parse_cstructure(&["katze"], &g).unwrap_err(),
            ParseError::UnknownToken {
                form: "katze".to_string()
            }
        );
    }

    #[test]
    fn no_parse_returns_empty_list() {
        let g = load_grammar(TOY).unwrap();
        assert!(parse_cstructure(&["hund"], &g).unwrap().is_empty());
        let (trees, best) = parse_cstructure_diag(&["hund"], &g).unwrap();
        assert!(trees.is_empty());
        assert!(best.is_some());
    }

    #[test]
    fn completeness_rejects_missing_argument() {
        let g = load_grammar(
            "gf SUBJ OBJ\nstart S\nrule S -> V { ^=! }\nlex schlaeft V { (^ PRED)='schlafen<SUBJ>' }",
        )
        .unwrap();
        let trees = parse_cstructure(&["schlaeft"], &g).unwrap();
        assert_eq!(trees.len(), 1);
        let report = solve_with_diagnostics(&trees[0], &g);
        assert!(report.analyses.is_empty());
        assert!(report
            .failures
            .iter()
            .any(|f| f.reason.contains("incomplete")));
    }

    #[test]
    fn coherence_rejects_unsubcategorized_function() {
        let g = load_grammar(
            "gf SUBJ OBJ\nstart S\nrule S -> NP { (^ OBJ)=! } V { ^=! }\nrule NP -> N { ^=! }\nlex hund N { (^ PRED)='Hund' }\nlex schlaeft V { (^ PRED)='schlafen<SUBJ>' (^ SUBJ PRED)='pro' }",
        )
        .unwrap();
        let trees = parse_cstructure(&["hund", "schlaeft"], &g).unwrap();
        let report = solve_with_diagnostics(&trees[0], &g);
        assert!(report.analyses.is_empty());
        assert!(report
            .failures
            .iter()
            .any(|f| f.reason.contains("incoherent")));
    }
}
