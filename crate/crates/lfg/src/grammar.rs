//! Annotated phrase-structure rules and disjunctive lexical entries, with the
//! two-projection annotation language and functional-uncertainty paths.

use std::collections::BTreeMap;
use std::fmt;

/// Which projection a path talks about: the functional structure (φ) or the
/// morphology projection (μ).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    F,
    M,
}

/// `Up` is the mother node's structure (`^` / `%^`), `Down` this node's own
/// (`!` / `%!`). In a lexical entry both anchors refer to the preterminal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathStep {
    Attr(String),
    /// Kleene-starred attribute, e.g. `XCOMP*` or `DEP*`.
    Star(String),
    /// A function variable ranging over the grammar's declared GF set.
    GfVar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathExpr {
    pub projection: Projection,
    pub anchor: Anchor,
    pub steps: Vec<PathStep>,
}

impl PathExpr {
    pub fn new(projection: Projection, anchor: Anchor, steps: Vec<PathStep>) -> Self {
        PathExpr {
            projection,
            anchor,
            steps,
        }
    }

    pub fn ground(projection: Projection, anchor: Anchor, attrs: &[&str]) -> Self {
        PathExpr {
            projection,
            anchor,
            steps: attrs.iter().map(|a| PathStep::Attr(a.to_string())).collect(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.steps
            .iter()
            .all(|s| matches!(s, PathStep::Attr(_)))
    }

    pub fn star_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, PathStep::Star(_)))
            .count()
    }

    pub fn gf_var_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, PathStep::GfVar))
            .count()
    }

    fn anchor_text(&self) -> &'static str {
        match (self.projection, self.anchor) {
            (Projection::F, Anchor::Up) => "^",
            (Projection::F, Anchor::Down) => "!",
            (Projection::M, Anchor::Up) => "%^",
            (Projection::M, Anchor::Down) => "%!",
        }
    }
}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return write!(f, "{}", self.anchor_text());
        }
        write!(f, "({}", self.anchor_text())?;
        for s in &self.steps {
            match s {
                PathStep::Attr(a) => write!(f, " {}", a)?,
                PathStep::Star(a) => write!(f, " {}*", a)?,
                PathStep::GfVar => write!(f, " GF")?,
            }
        }
        write!(f, ")")
    }
}

/// All expansions of a (possibly uncertain) path: the starred segment is
/// repeated 0..=k times and a GF variable is replaced by each member of the
/// declared set. Order is depth-major, then GF declaration order.
pub fn instantiate_uncertainty(path: &PathExpr, gf_set: &[String], k: usize) -> Vec<PathExpr> {
    let mut out = vec![vec![]];
    let mut push_all = |variants: &mut Vec<Vec<PathStep>>, step: &PathStep| {
        for v in variants.iter_mut() {
            v.push(step.clone());
        }
    };
    for step in &path.steps {
        match step {
            PathStep::Attr(_) => push_all(&mut out, step),
            PathStep::Star(attr) => {
                let mut next = Vec::new();
                for depth in 0..=k {
                    for v in &out {
                        let mut nv = v.clone();
                        for _ in 0..depth {
                            nv.push(PathStep::Attr(attr.clone()));
                        }
                        next.push(nv);
                    }
                }
                out = next;
            }
            PathStep::GfVar => {
                let mut next = Vec::new();
                for v in &out {
                    for gf in gf_set {
                        let mut nv = v.clone();
                        nv.push(PathStep::Attr(gf.clone()));
                        next.push(nv);
                    }
                }
                out = next;
            }
        }
    }
    out.into_iter()
        .map(|steps| PathExpr {
            projection: path.projection,
            anchor: path.anchor,
            steps,
        })
        .collect()
}

/// A semantic-form template in a lexical entry. The instance id is assigned
/// when the entry is used in an analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemTemplate {
    pub lemma: String,
    pub subcat: Vec<String>,
    pub nonthematic: Vec<String>,
}

impl fmt::Display for SemTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "'{}", self.lemma)?;
        if !self.subcat.is_empty() {
            write!(f, "<{}>", self.subcat.join(","))?;
        } else if !self.nonthematic.is_empty() {
            write!(f, "<>")?;
        }
        if !self.nonthematic.is_empty() {
            write!(f, "{}", self.nonthematic.join(","))?;
        }
        write!(f, "'")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `=` — builds structure by unification.
    Define,
    /// `=c` — satisfied only if the value is already independently there.
    Constrain,
    /// `~=` — satisfied when the path is absent or holds a different value.
    Negate,
}

impl ConstraintKind {
    fn op_text(&self) -> &'static str {
        match self {
            ConstraintKind::Define => "=",
            ConstraintKind::Constrain => "=c",
            ConstraintKind::Negate => "~=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rhs {
    Path(PathExpr),
    Atom(String),
    Sem(SemTemplate),
}

impl fmt::Display for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rhs::Path(p) => write!(f, "{}", p),
            Rhs::Atom(a) => write!(f, "{}", a),
            Rhs::Sem(s) => write!(f, "{}", s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    Eq {
        kind: ConstraintKind,
        lhs: PathExpr,
        rhs: Rhs,
    },
    /// `{ c1 c2 | c3 }` — alternative constraint sets.
    Disjunction(Vec<Vec<Constraint>>),
}

impl Constraint {
    pub fn define(lhs: PathExpr, rhs: Rhs) -> Self {
        Constraint::Eq {
            kind: ConstraintKind::Define,
            lhs,
            rhs,
        }
    }

    /// Does this constraint (or any nested one) mention the given projection?
    pub fn mentions_projection(&self, p: Projection) -> bool {
        match self {
            Constraint::Eq { lhs, rhs, .. } => {
                lhs.projection == p
                    || matches!(rhs, Rhs::Path(rp) if rp.projection == p)
            }
            Constraint::Disjunction(alts) => alts
                .iter()
                .any(|cs| cs.iter().any(|c| c.mentions_projection(p))),
        }
    }

    pub fn paths(&self) -> Vec<&PathExpr> {
        match self {
            Constraint::Eq { lhs, rhs, .. } => {
                let mut v = vec![lhs];
                if let Rhs::Path(p) = rhs {
                    v.push(p);
                }
                v
            }
            Constraint::Disjunction(alts) => alts
                .iter()
                .flat_map(|cs| cs.iter().flat_map(|c| c.paths()))
                .collect(),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Eq { kind, lhs, rhs } => {
                if lhs.steps.is_empty() && matches!(rhs, Rhs::Path(p) if p.steps.is_empty()) {
                    // ^=! style
                    write!(f, "{}{}{}", lhs, kind.op_text(), rhs)
                } else {
                    write!(f, "{} {} {}", lhs, kind.op_text(), rhs)
                }
            }
            Constraint::Disjunction(alts) => {
                write!(f, "{{ ")?;
                for (i, cs) in alts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " | ")?;
                    }
                    for (j, c) in cs.iter().enumerate() {
                        if j > 0 {
                            write!(f, " ")?;
                        }
                        write!(f, "{}", c)?;
                    }
                }
                write!(f, " }}")
            }
        }
    }
}

/// Full disjunctive normal form of a constraint list: every returned list is
/// disjunction-free. Disjunct order follows textual order.
pub fn expand_disjunctions(constraints: &[Constraint]) -> Vec<Vec<Constraint>> {
    let mut acc: Vec<Vec<Constraint>> = vec![Vec::new()];
    for c in constraints {
        match c {
            Constraint::Eq { .. } => {
                for alt in acc.iter_mut() {
                    alt.push(c.clone());
                }
            }
            Constraint::Disjunction(branches) => {
                let mut next = Vec::new();
                for prefix in &acc {
                    for branch in branches {
                        let expanded_branch = expand_disjunctions(branch);
                        for tail in expanded_branch {
                            let mut nv = prefix.clone();
                            nv.extend(tail);
                            next.push(nv);
                        }
                    }
                }
                acc = next;
            }
        }
    }
    acc
}

/// One position on a rule's right-hand side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleElement {
    pub category: String,
    pub annotations: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RhsItem {
    Element {
        element: RuleElement,
        optional: bool,
    },
    /// `( DET {..} | NP {..} )?` — alternation of elements.
    Choice {
        options: Vec<RuleElement>,
        optional: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub lhs: String,
    pub items: Vec<RhsItem>,
}

impl Rule {
    /// All plain category sequences this rule licenses, in deterministic
    /// order (per item: the element, choices in textual order, then absence).
    pub fn expansions(&self) -> Vec<Vec<&RuleElement>> {
        let mut acc: Vec<Vec<&RuleElement>> = vec![Vec::new()];
        for item in &self.items {
            let mut options: Vec<Option<&RuleElement>> = Vec::new();
            match item {
                RhsItem::Element { element, optional } => {
                    options.push(Some(element));
                    if *optional {
                        options.push(None);
                    }
                }
                RhsItem::Choice { options: os, optional } => {
                    for o in os {
                        options.push(Some(o));
                    }
                    if *optional {
                        options.push(None);
                    }
                }
            }
            let mut next = Vec::new();
            for prefix in &acc {
                for opt in &options {
                    let mut nv = prefix.clone();
                    if let Some(el) = opt {
                        nv.push(*el);
                    }
                    next.push(nv);
                }
            }
            acc = next;
        }
        // A fully optional rhs could license the empty string; the loader
        // rejects such rules, but guard here as well.
        acc.retain(|v| !v.is_empty());
        acc
    }
}

/// A lexical entry: fully inflected surface form, category, and a constraint
/// list that may contain disjunctions. Each use introduces its PRED (if any)
/// as a fresh instantiation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexEntry {
    pub form: String,
    pub category: String,
    pub constraints: Vec<Constraint>,
}

impl LexEntry {
    pub fn disjuncts(&self) -> Vec<Vec<Constraint>> {
        expand_disjunctions(&self.constraints)
    }
}

pub const DEFAULT_GF_SET: &[&str] = &["SUBJ", "OBJ", "GEN1", "GEN2"];
pub const DEFAULT_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    pub rules: Vec<Rule>,
    pub lexicon: BTreeMap<String, Vec<LexEntry>>,
    pub start: String,
    pub gf_set: Vec<String>,
    /// Uncertainty depth bound K.
    pub depth: usize,
}

impl Grammar {
    pub fn entries_for(&self, form: &str) -> Option<&[LexEntry]> {
        self.lexicon.get(form).map(|v| v.as_slice())
    }

    pub fn lexical_categories(&self) -> Vec<String> {
        let mut cats: Vec<String> = self
            .lexicon
            .values()
            .flatten()
            .map(|e| e.category.clone())
            .collect();
        cats.sort();
        cats.dedup();
        cats
    }

    pub fn rules_for(&self, lhs: &str) -> impl Iterator<Item = (usize, &Rule)> {
        self.rules
            .iter()
            .enumerate()
            .filter(move |(_, r)| r.lhs == lhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fpath(attrs: &[&str]) -> PathExpr {
        PathExpr::ground(Projection::F, Anchor::Up, attrs)
    }

    fn gfs(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn instantiation_enumerates_depth_major_then_gf_order() {
        let path = PathExpr::new(
            Projection::F,
            Anchor::Up,
            vec![PathStep::Star("XCOMP".into()), PathStep::GfVar],
        );
        let insts = instantiate_uncertainty(&path, &gfs(&["SUBJ", "OBJ"]), 1);
        let texts: Vec<String> = insts.iter().map(|p| p.to_string()).collect();
        assert_eq!(
            texts,
            vec!["(^ SUBJ)", "(^ OBJ)", "(^ XCOMP SUBJ)", "(^ XCOMP OBJ)"]
        );
    }

    #[test]
    fn instantiation_of_m_dep_star() {
        let path = PathExpr::new(Projection::M, Anchor::Up, vec![PathStep::Star("DEP".into())]);
        let insts = instantiate_uncertainty(&path, &gfs(&["SUBJ", "OBJ"]), 2);
        let texts: Vec<String> = insts.iter().map(|p| p.to_string()).collect();
        assert_eq!(texts, vec!["%^", "(%^ DEP)", "(%^ DEP DEP)"]);
    }

    #[test]
    fn ground_path_instantiates_to_itself() {
        let path = fpath(&["TENSE"]);
        let insts = instantiate_uncertainty(&path, &gfs(&["SUBJ", "OBJ"]), 3);
        assert_eq!(insts, vec![path]);
    }

    #[test]
    fn instantiation_count_matches_formula() {
        // (K+1) * |GF|^(gf vars) for starred paths.
        for k in 0..4 {
            for gf_n in 1..4 {
                let gf: Vec<String> = (0..gf_n).map(|i| format!("F{i}")).collect();
                let starred = PathExpr::new(
                    Projection::F,
                    Anchor::Up,
                    vec![PathStep::Star("XCOMP".into())],
                );
                assert_eq!(instantiate_uncertainty(&starred, &gf, k).len(), k + 1);
                let starred_gf = PathExpr::new(
                    Projection::F,
                    Anchor::Up,
                    vec![PathStep::Star("XCOMP".into()), PathStep::GfVar],
                );
                assert_eq!(
                    instantiate_uncertainty(&starred_gf, &gf, k).len(),
                    (k + 1) * gf_n
                );
            }
        }
    }

    #[test]
    fn dnf_of_nested_disjunction() {
        // {A, {B | C}} | D  =>  A∧B, A∧C, D
        let mk = |attr: &str| Constraint::define(fpath(&[attr]), Rhs::Atom("X".into()));
        let nested = Constraint::Disjunction(vec![
            vec![mk("A"), Constraint::Disjunction(vec![vec![mk("B")], vec![mk("C")]])],
            vec![mk("D")],
        ]);
        let dnf = expand_disjunctions(&[nested]);
        assert_eq!(dnf.len(), 3);
        assert_eq!(dnf[0], vec![mk("A"), mk("B")]);
        assert_eq!(dnf[1], vec![mk("A"), mk("C")]);
        assert_eq!(dnf[2], vec![mk("D")]);
    }

    #[test]
    fn dnf_of_plain_list_is_singleton() {
        let mk = |attr: &str| Constraint::define(fpath(&[attr]), Rhs::Atom("X".into()));
        let dnf = expand_disjunctions(&[mk("A"), mk("B")]);
        assert_eq!(dnf, vec![vec![mk("A"), mk("B")]]);
    }

    #[test]
    fn dnf_size_is_product_of_disjunct_counts() {
        let mk = |attr: &str| Constraint::define(fpath(&[attr]), Rhs::Atom("X".into()));
        let two = Constraint::Disjunction(vec![vec![mk("A")], vec![mk("B")]]);
        let three = Constraint::Disjunction(vec![vec![mk("C")], vec![mk("D")], vec![mk("E")]]);
        let dnf = expand_disjunctions(&[two, three]);
        assert_eq!(dnf.len(), 6);
    }

    #[test]
    fn rule_expansion_order() {
        let el = |cat: &str| RuleElement {
            category: cat.into(),
            annotations: vec![],
        };
        // ( DET | NP )? N NP?
        let rule = Rule {
            lhs: "NP".into(),
            items: vec![
                RhsItem::Choice {
                    options: vec![el("DET"), el("NP")],
                    optional: true,
                },
                RhsItem::Element {
                    element: el("N"),
                    optional: false,
                },
                RhsItem::Element {
                    element: el("NP"),
                    optional: true,
                },
            ],
        };
        let exps: Vec<Vec<&str>> = rule
            .expansions()
            .iter()
            .map(|e| e.iter().map(|el| el.category.as_str()).collect())
            .collect();
        assert_eq!(
            exps,
            vec![
                vec!["DET", "N", "NP"],
                vec!["DET", "N"],
                vec!["NP", "N", "NP"],
                vec!["NP", "N"],
                vec!["N", "NP"],
                vec!["N"],
            ]
        );
    }
}
