//! Attribute-value matrices: the substrate both f-structures and m-structures
//! are built on.
//!
//! A [`FeatureStructure`] is a handle to a node graph. Unification merges
//! nodes destructively behind the scenes, but the public operations
//! ([`FeatureStructure::unify`], [`FeatureStructure::put_path`]) clone their
//! inputs first, so callers see value semantics. Reentrancy (two paths
//! leading to one node) is preserved by both cloning and unification.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

/// Governable grammatical functions. Anything else found in a structure is a
/// feature or a semantic function and is ignored by coherence checking.
pub const GOVERNABLE_FUNCTIONS: &[&str] = &["SUBJ", "OBJ", "OBJ2", "OBL", "XCOMP", "COMP"];

pub fn is_governable(name: &str) -> bool {
    GOVERNABLE_FUNCTIONS.contains(&name)
}

/// A semantic form: a predicate with a subcategorization frame, instantiated
/// uniquely per lexical insertion. Two instantiations never unify, even with
/// identical lemma and frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticForm {
    lemma: String,
    subcat: Vec<String>,
    /// Governed but non-thematic functions, written outside the angle
    /// brackets: `'wird<XCOMP>SUBJ'`. They must be present for completeness
    /// but need not contain a PRED of their own.
    nonthematic: Vec<String>,
    instance: u64,
}

impl SemanticForm {
    pub fn new(lemma: impl Into<String>, subcat: Vec<String>, instance: u64) -> Self {
        SemanticForm {
            lemma: lemma.into(),
            subcat,
            nonthematic: Vec::new(),
            instance,
        }
    }

    pub fn with_nonthematic(mut self, nonthematic: Vec<String>) -> Self {
        self.nonthematic = nonthematic;
        self
    }

    pub fn lemma(&self) -> &str {
        &self.lemma
    }

    pub fn subcat(&self) -> &[String] {
        &self.subcat
    }

    pub fn nonthematic(&self) -> &[String] {
        &self.nonthematic
    }

    pub fn instance(&self) -> u64 {
        self.instance
    }

    /// Rendering without the instance id: `'drehen<SUBJ,OBJ>'`, `'Fahrer'`,
    /// `'wird<XCOMP>SUBJ'`.
    pub fn display_form(&self) -> String {
        let mut s = String::from("'");
        s.push_str(&self.lemma);
        if !self.subcat.is_empty() {
            s.push('<');
            s.push_str(&self.subcat.join(","));
            s.push('>');
        } else if !self.nonthematic.is_empty() {
            s.push_str("<>");
        }
        if !self.nonthematic.is_empty() {
            s.push_str(&self.nonthematic.join(","));
        }
        s.push('\'');
        s
    }
}

impl fmt::Display for SemanticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_form())
    }
}

/// A value at some path: an atomic symbol, a semantic form, or a nested
/// structure.
#[derive(Debug, Clone)]
pub enum Value {
    Atom(String),
    Sem(SemanticForm),
    Fs(FeatureStructure),
}

impl Value {
    pub fn atom(sym: impl Into<String>) -> Value {
        Value::Atom(sym.into())
    }

    fn describe(&self) -> String {
        match self {
            Value::Atom(a) => a.clone(),
            Value::Sem(s) => s.display_form(),
            Value::Fs(_) => "[structure]".to_string(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AvmError {
    /// First conflicting path, deterministic under canonical attribute order.
    #[error("clash at {path}: {left} vs {right}")]
    Clash {
        path: String,
        left: String,
        right: String,
    },
    /// A strict path prefix resolves to an atom or semantic form.
    #[error("not a structure at {prefix}")]
    NotAStructure { prefix: String },
    #[error("cyclic structure")]
    Cyclic,
}

enum NodeKind {
    /// Unconstrained / empty structure; unifies with anything.
    Top,
    Atom(String),
    Sem(SemanticForm),
    Avm(BTreeMap<String, NodeRef>),
}

enum Slot {
    Val(NodeKind),
    /// Union-find forwarding pointer installed by unification.
    Link(NodeRef),
}

#[derive(Clone)]
pub(crate) struct NodeRef(Rc<RefCell<Slot>>);

impl NodeRef {
    pub(crate) fn top() -> NodeRef {
        NodeRef(Rc::new(RefCell::new(Slot::Val(NodeKind::Top))))
    }

    pub(crate) fn atom(sym: String) -> NodeRef {
        NodeRef(Rc::new(RefCell::new(Slot::Val(NodeKind::Atom(sym)))))
    }

    pub(crate) fn sem(s: SemanticForm) -> NodeRef {
        NodeRef(Rc::new(RefCell::new(Slot::Val(NodeKind::Sem(s)))))
    }

    pub(crate) fn resolve(&self) -> NodeRef {
        let mut cur = self.clone();
        loop {
            let next = match &*cur.0.borrow() {
                Slot::Link(n) => n.clone(),
                Slot::Val(_) => return cur,
            };
            cur = next;
        }
    }

    fn ptr(&self) -> *const RefCell<Slot> {
        Rc::as_ptr(&self.resolve().0)
    }

    pub(crate) fn same_node(&self, other: &NodeRef) -> bool {
        self.ptr() == other.ptr()
    }

    fn describe(&self) -> String {
        let n = self.resolve();
        let out = match &*n.0.borrow() {
            Slot::Link(_) => unreachable!("resolved"),
            Slot::Val(NodeKind::Top) => "[]".to_string(),
            Slot::Val(NodeKind::Atom(a)) => a.clone(),
            Slot::Val(NodeKind::Sem(s)) => s.display_form(),
            Slot::Val(NodeKind::Avm(_)) => "[structure]".to_string(),
        };
        out
    }

    /// Destructive unification. `path` names the position of `self`/`other`
    /// for error reporting.
    pub(crate) fn unify(a: &NodeRef, b: &NodeRef, path: &mut Vec<String>) -> Result<(), AvmError> {
        let a = a.resolve();
        let b = b.resolve();
        if Rc::ptr_eq(&a.0, &b.0) {
            return Ok(());
        }

        // Peek at both kinds to pick a merge strategy without holding borrows
        // across recursion.
        enum Plan {
            ForwardAToB,
            ForwardBToA,
            Clash(String, String),
            MergeAvms,
        }

        let plan = {
            let ka = a.0.borrow();
            let kb = b.0.borrow();
            let (ka, kb) = match (&*ka, &*kb) {
                (Slot::Val(x), Slot::Val(y)) => (x, y),
                _ => unreachable!("resolved nodes hold values"),
            };
            match (ka, kb) {
                (NodeKind::Top, _) => Plan::ForwardAToB,
                (_, NodeKind::Top) => Plan::ForwardBToA,
                (NodeKind::Atom(x), NodeKind::Atom(y)) => {
                    if x == y {
                        Plan::ForwardAToB
                    } else {
                        Plan::Clash(x.clone(), y.clone())
                    }
                }
                (NodeKind::Sem(x), NodeKind::Sem(y)) => {
                    if x.instance == y.instance {
                        Plan::ForwardAToB
                    } else {
                        Plan::Clash(x.display_form(), y.display_form())
                    }
                }
                (NodeKind::Avm(_), NodeKind::Avm(_)) => Plan::MergeAvms,
                (x, y) => Plan::Clash(kind_summary(x), kind_summary(y)),
            }
        };

        match plan {
            Plan::ForwardAToB => {
                *a.0.borrow_mut() = Slot::Link(b.clone());
                Ok(())
            }
            Plan::ForwardBToA => {
                *b.0.borrow_mut() = Slot::Link(a.clone());
                Ok(())
            }
            Plan::Clash(left, right) => Err(AvmError::Clash {
                path: path.join(" "),
                left,
                right,
            }),
            Plan::MergeAvms => {
                let taken = {
                    let mut slot = a.0.borrow_mut();
                    let map = match &mut *slot {
                        Slot::Val(NodeKind::Avm(m)) => std::mem::take(m),
                        _ => unreachable!(),
                    };
                    *slot = Slot::Link(b.clone());
                    map
                };
                // Sorted iteration makes the first conflicting path
                // deterministic.
                for (attr, child) in taken {
                    let existing = {
                        let slot = b.0.borrow();
                        match &*slot {
                            Slot::Val(NodeKind::Avm(m)) => m.get(&attr).cloned(),
                            _ => unreachable!(),
                        }
                    };
                    match existing {
                        Some(present) => {
                            path.push(attr);
                            NodeRef::unify(&present, &child, path)?;
                            path.pop();
                        }
                        None => {
                            let mut slot = b.0.borrow_mut();
                            match &mut *slot {
                                Slot::Val(NodeKind::Avm(m)) => {
                                    m.insert(attr, child);
                                }
                                _ => unreachable!(),
                            }
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Child lookup; `None` when the attribute is missing or the node is not
    /// (yet) a structure.
    pub(crate) fn child(&self, attr: &str) -> Option<NodeRef> {
        let n = self.resolve();
        let slot = n.0.borrow();
        match &*slot {
            Slot::Val(NodeKind::Avm(m)) => m.get(attr).cloned(),
            _ => None,
        }
    }

    /// Descends one step, creating the attribute (and turning Top into an
    /// Avm) if needed. Errors if the node is an atom or semantic form.
    pub(crate) fn child_or_create(&self, attr: &str, prefix: &[String]) -> Result<NodeRef, AvmError> {
        let n = self.resolve();
        let mut slot = n.0.borrow_mut();
        match &mut *slot {
            Slot::Val(NodeKind::Top) => {
                let child = NodeRef::top();
                let mut m = BTreeMap::new();
                m.insert(attr.to_string(), child.clone());
                *slot = Slot::Val(NodeKind::Avm(m));
                Ok(child)
            }
            Slot::Val(NodeKind::Avm(m)) => Ok(m
                .entry(attr.to_string())
                .or_insert_with(NodeRef::top)
                .clone()),
            Slot::Val(_) => Err(AvmError::NotAStructure {
                prefix: prefix.join(" "),
            }),
            Slot::Link(_) => unreachable!("resolved"),
        }
    }

    pub(crate) fn deep_clone(&self, memo: &mut HashMap<*const RefCell<Slot>, NodeRef>) -> NodeRef {
        let n = self.resolve();
        let key = Rc::as_ptr(&n.0);
        if let Some(done) = memo.get(&key) {
            return done.clone();
        }
        let fresh = NodeRef::top();
        memo.insert(key, fresh.clone());
        let kind = {
            let slot = n.0.borrow();
            match &*slot {
                Slot::Val(NodeKind::Top) => NodeKind::Top,
                Slot::Val(NodeKind::Atom(a)) => NodeKind::Atom(a.clone()),
                Slot::Val(NodeKind::Sem(s)) => NodeKind::Sem(s.clone()),
                Slot::Val(NodeKind::Avm(m)) => {
                    let mut out = BTreeMap::new();
                    for (k, v) in m {
                        out.insert(k.clone(), v.deep_clone(memo));
                    }
                    NodeKind::Avm(out)
                }
                Slot::Link(_) => unreachable!("resolved"),
            }
        };
        *fresh.0.borrow_mut() = Slot::Val(kind);
        fresh
    }

    fn from_value(v: &Value) -> NodeRef {
        match v {
            Value::Atom(a) => NodeRef::atom(a.clone()),
            Value::Sem(s) => NodeRef::sem(s.clone()),
            Value::Fs(fs) => fs.root.deep_clone(&mut HashMap::new()),
        }
    }

    fn to_value(&self) -> Value {
        let n = self.resolve();
        let slot = n.0.borrow();
        match &*slot {
            Slot::Val(NodeKind::Atom(a)) => Value::Atom(a.clone()),
            Slot::Val(NodeKind::Sem(s)) => Value::Sem(s.clone()),
            Slot::Val(NodeKind::Top) | Slot::Val(NodeKind::Avm(_)) => {
                drop(slot);
                Value::Fs(FeatureStructure { root: n })
            }
            Slot::Link(_) => unreachable!("resolved"),
        }
    }

    pub(crate) fn is_acyclic(&self) -> bool {
        fn walk(n: &NodeRef, stack: &mut HashSet<*const RefCell<Slot>>) -> bool {
            let n = n.resolve();
            let key = Rc::as_ptr(&n.0);
            if stack.contains(&key) {
                return false;
            }
            let children: Vec<NodeRef> = {
                let slot = n.0.borrow();
                match &*slot {
                    Slot::Val(NodeKind::Avm(m)) => m.values().cloned().collect(),
                    _ => return true,
                }
            };
            stack.insert(key);
            for c in &children {
                if !walk(c, stack) {
                    return false;
                }
            }
            stack.remove(&key);
            true
        }
        walk(self, &mut HashSet::new())
    }
}

fn kind_summary(k: &NodeKind) -> String {
    match k {
        NodeKind::Top => "[]".to_string(),
        NodeKind::Atom(a) => a.clone(),
        NodeKind::Sem(s) => s.display_form(),
        NodeKind::Avm(_) => "[structure]".to_string(),
    }
}

/// An attribute-value matrix with reentrancy. Cloning the handle is shallow;
/// the public operations that modify clone the underlying graph first.
#[derive(Clone)]
pub struct FeatureStructure {
    pub(crate) root: NodeRef,
}

impl Default for FeatureStructure {
    fn default() -> Self {
        Self::new()
    }
}

impl FeatureStructure {
    /// The empty structure (unifies with anything).
    pub fn new() -> Self {
        FeatureStructure {
            root: NodeRef::top(),
        }
    }

    pub(crate) fn from_node(root: NodeRef) -> Self {
        FeatureStructure { root }
    }

    pub fn from_entries(entries: Vec<(&str, Value)>) -> Self {
        let mut fs = FeatureStructure::new();
        for (attr, v) in entries {
            fs = fs
                .put_path(&[attr], v)
                .expect("from_entries: conflicting attribute");
        }
        fs
    }

    /// Fully independent copy, preserving internal sharing.
    pub fn duplicate(&self) -> Self {
        FeatureStructure {
            root: self.root.deep_clone(&mut HashMap::new()),
        }
    }

    /// Least structure subsuming both inputs; the inputs are untouched.
    /// Fails on the first conflicting path (canonical attribute order).
    pub fn unify(&self, other: &FeatureStructure) -> Result<FeatureStructure, AvmError> {
        let a = self.root.deep_clone(&mut HashMap::new());
        let b = other.root.deep_clone(&mut HashMap::new());
        NodeRef::unify(&a, &b, &mut Vec::new())?;
        Ok(FeatureStructure { root: a })
    }

    /// Value at `path`, or `None` if any step is missing. Never creates
    /// structure.
    pub fn get_path(&self, path: &[&str]) -> Result<Option<Value>, AvmError> {
        assert!(!path.is_empty(), "get_path: empty path");
        let mut cur = self.root.clone();
        let mut prefix: Vec<String> = Vec::new();
        for (i, attr) in path.iter().enumerate() {
            let n = cur.resolve();
            let is_struct = matches!(
                &*n.0.borrow(),
                Slot::Val(NodeKind::Avm(_)) | Slot::Val(NodeKind::Top)
            );
            if !is_struct {
                return Err(AvmError::NotAStructure {
                    prefix: prefix.join(" "),
                });
            }
            match n.child(attr) {
                Some(c) => {
                    prefix.push(attr.to_string());
                    cur = c;
                    if i == path.len() - 1 {
                        return Ok(Some(cur.to_value()));
                    }
                }
                None => return Ok(None),
            }
        }
        unreachable!()
    }

    /// Minimal extension of `self` carrying `value` at `path`; unifies with
    /// anything already there. The input is untouched.
    pub fn put_path(&self, path: &[&str], value: Value) -> Result<FeatureStructure, AvmError> {
        assert!(!path.is_empty(), "put_path: empty path");
        let root = self.root.deep_clone(&mut HashMap::new());
        let mut cur = root.clone();
        let mut prefix: Vec<String> = Vec::new();
        for attr in path {
            cur = cur.child_or_create(attr, &prefix)?;
            prefix.push(attr.to_string());
        }
        let vnode = NodeRef::from_value(&value);
        NodeRef::unify(&cur, &vnode, &mut prefix)?;
        Ok(FeatureStructure { root })
    }

    /// Unifies the values at two paths, creating both. This is how defining
    /// equations between paths (raising equations) introduce reentrancy.
    pub fn equate_paths(&self, p1: &[&str], p2: &[&str]) -> Result<FeatureStructure, AvmError> {
        assert!(!p1.is_empty() && !p2.is_empty(), "equate_paths: empty path");
        let root = self.root.deep_clone(&mut HashMap::new());
        let out = FeatureStructure { root };
        let mut a = out.root.clone();
        let mut prefix: Vec<String> = Vec::new();
        for attr in p1 {
            a = a.child_or_create(attr, &prefix)?;
            prefix.push(attr.to_string());
        }
        let mut b = out.root.clone();
        let mut prefix2: Vec<String> = Vec::new();
        for attr in p2 {
            b = b.child_or_create(attr, &prefix2)?;
            prefix2.push(attr.to_string());
        }
        NodeRef::unify(&a, &b, &mut prefix)?;
        Ok(out)
    }

    /// Attribute names at the top level, sorted.
    pub fn attributes(&self) -> Vec<String> {
        let n = self.root.resolve();
        let slot = n.0.borrow();
        match &*slot {
            Slot::Val(NodeKind::Avm(m)) => m.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }

    /// Top-level (attribute, value) pairs in canonical order.
    pub fn entries(&self) -> Vec<(String, Value)> {
        let n = self.root.resolve();
        let slot = n.0.borrow();
        match &*slot {
            Slot::Val(NodeKind::Avm(m)) => m
                .iter()
                .map(|(k, v)| (k.clone(), v.to_value()))
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.attributes().is_empty()
    }

    pub fn is_acyclic(&self) -> bool {
        self.root.is_acyclic()
    }

    /// True if the same substructure sits at both paths (reentrancy, not
    /// mere equality).
    pub fn paths_shared(&self, p1: &[&str], p2: &[&str]) -> bool {
        let resolve = |path: &[&str]| -> Option<NodeRef> {
            let mut cur = self.root.clone();
            for attr in path {
                cur = cur.child(attr)?;
            }
            Some(cur)
        };
        match (resolve(p1), resolve(p2)) {
            (Some(a), Some(b)) => a.same_node(&b),
            _ => false,
        }
    }

    /// Deterministic serialization: attributes sorted, semantic forms
    /// without instance ids, shared substructures tagged `#n=` / `#n`.
    /// Two solved structures are equivalent iff their canonical forms are
    /// byte-equal.
    pub fn canonical_form(&self) -> Result<String, AvmError> {
        if !self.is_acyclic() {
            return Err(AvmError::Cyclic);
        }

        // First pass: count how often each non-atom node is reached.
        let mut counts: HashMap<*const RefCell<Slot>, usize> = HashMap::new();
        fn count(n: &NodeRef, counts: &mut HashMap<*const RefCell<Slot>, usize>) {
            let n = n.resolve();
            let key = Rc::as_ptr(&n.0);
            let track = !matches!(&*n.0.borrow(), Slot::Val(NodeKind::Atom(_)));
            if track {
                let c = counts.entry(key).or_insert(0);
                *c += 1;
                if *c > 1 {
                    return;
                }
            }
            let children: Vec<NodeRef> = {
                let slot = n.0.borrow();
                match &*slot {
                    Slot::Val(NodeKind::Avm(m)) => m.values().cloned().collect(),
                    _ => Vec::new(),
                }
            };
            for c in &children {
                count(c, counts);
            }
        }
        count(&self.root, &mut counts);

        let mut tags: HashMap<*const RefCell<Slot>, usize> = HashMap::new();
        let mut rendered: HashSet<*const RefCell<Slot>> = HashSet::new();
        let mut next_tag = 0usize;

        fn render(
            n: &NodeRef,
            counts: &HashMap<*const RefCell<Slot>, usize>,
            tags: &mut HashMap<*const RefCell<Slot>, usize>,
            rendered: &mut HashSet<*const RefCell<Slot>>,
            next_tag: &mut usize,
            out: &mut String,
        ) {
            let n = n.resolve();
            let key = Rc::as_ptr(&n.0);
            let shared = counts.get(&key).copied().unwrap_or(0) > 1;
            if shared {
                if rendered.contains(&key) {
                    out.push_str(&format!("#{}", tags[&key]));
                    return;
                }
                let tag = *next_tag;
                *next_tag += 1;
                tags.insert(key, tag);
                rendered.insert(key);
                out.push_str(&format!("#{}=", tag));
            }
            let slot = n.0.borrow();
            match &*slot {
                Slot::Val(NodeKind::Top) => out.push_str("[]"),
                Slot::Val(NodeKind::Atom(a)) => out.push_str(a),
                Slot::Val(NodeKind::Sem(s)) => out.push_str(&s.display_form()),
                Slot::Val(NodeKind::Avm(m)) => {
                    if m.is_empty() {
                        out.push_str("[]");
                    } else {
                        out.push('[');
                        for (k, v) in m {
                            out.push(' ');
                            out.push_str(k);
                            out.push(' ');
                            render(v, counts, tags, rendered, next_tag, out);
                        }
                        out.push_str(" ]");
                    }
                }
                Slot::Link(_) => unreachable!("resolved"),
            }
        }

        let mut out = String::new();
        render(
            &self.root,
            &counts,
            &mut tags,
            &mut rendered,
            &mut next_tag,
            &mut out,
        );
        Ok(out)
    }
}

impl fmt::Debug for FeatureStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.canonical_form() {
            Ok(s) => write!(f, "{}", s),
            Err(_) => write!(f, "<cyclic>"),
        }
    }
}

impl fmt::Display for FeatureStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.canonical_form() {
            Ok(s) => write!(f, "{}", s),
            Err(_) => write!(f, "<cyclic>"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(s: &str) -> Value {
        Value::atom(s)
    }

    #[test]
    fn empty_structure_is_identity() {
        let empty = FeatureStructure::new();
        let fs = FeatureStructure::from_entries(vec![("CASE", atom("NOM"))]);
        let u = empty.unify(&fs).unwrap();
        assert_eq!(u.canonical_form().unwrap(), "[ CASE NOM ]");
        let u2 = fs.unify(&empty).unwrap();
        assert_eq!(u2.canonical_form().unwrap(), "[ CASE NOM ]");
    }

    #[test]
    fn atomic_clash() {
        let a = FeatureStructure::from_entries(vec![("CASE", atom("NOM"))]);
        let b = FeatureStructure::from_entries(vec![("CASE", atom("ACC"))]);
        let err = a.unify(&b).unwrap_err();
        assert_eq!(
            err,
            AvmError::Clash {
                path: "CASE".to_string(),
                left: "NOM".to_string(),
                right: "ACC".to_string(),
            }
        );
    }

    #[test]
    fn distinct_pred_instantiations_never_merge() {
        let a = FeatureStructure::from_entries(vec![(
            "PRED",
            Value::Sem(SemanticForm::new("Fahrer", vec![], 1)),
        )]);
        let b = FeatureStructure::from_entries(vec![(
            "PRED",
            Value::Sem(SemanticForm::new("Fahrer", vec![], 2)),
        )]);
        let err = a.unify(&b).unwrap_err();
        match err {
            AvmError::Clash { path, .. } => assert_eq!(path, "PRED"),
            other => panic!("expected clash, got {other:?}"),
        }
        // Same instantiation unifies fine.
        let c = FeatureStructure::from_entries(vec![(
            "PRED",
            Value::Sem(SemanticForm::new("Fahrer", vec![], 1)),
        )]);
        assert!(a.unify(&c).is_ok());
    }

    #[test]
    fn get_path_descends_nested_structures() {
        let inner = FeatureStructure::from_entries(vec![("VFORM", atom("BASE"))]);
        let fs = FeatureStructure::from_entries(vec![("DEP", Value::Fs(inner))]);
        match fs.get_path(&["DEP", "VFORM"]).unwrap() {
            Some(Value::Atom(a)) => assert_eq!(a, "BASE"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn get_path_absent_and_not_a_structure() {
        let fs = FeatureStructure::from_entries(vec![("CASE", atom("NOM"))]);
        assert!(fs.get_path(&["NUM"]).unwrap().is_none());
        let err = fs.get_path(&["CASE", "NUM"]).unwrap_err();
        assert_eq!(
            err,
            AvmError::NotAStructure {
                prefix: "CASE".to_string()
            }
        );
    }

    #[test]
    fn put_path_builds_and_is_idempotent() {
        let fs = FeatureStructure::new()
            .put_path(&["SUBJ", "CASE"], atom("NOM"))
            .unwrap();
        assert_eq!(fs.canonical_form().unwrap(), "[ SUBJ [ CASE NOM ] ]");

        let t = FeatureStructure::from_entries(vec![("TENSE", atom("FUT"))]);
        let same = t.put_path(&["TENSE"], atom("FUT")).unwrap();
        assert_eq!(same.canonical_form().unwrap(), "[ TENSE FUT ]");

        let err = t.put_path(&["TENSE"], atom("FUTPERF")).unwrap_err();
        match err {
            AvmError::Clash { path, .. } => assert_eq!(path, "TENSE"),
            other => panic!("expected clash, got {other:?}"),
        }
    }

    #[test]
    fn canonical_form_is_order_independent() {
        let a = FeatureStructure::from_entries(vec![("CASE", atom("NOM")), ("NUM", atom("SG"))]);
        let b = FeatureStructure::from_entries(vec![("NUM", atom("SG")), ("CASE", atom("NOM"))]);
        assert_eq!(a.canonical_form().unwrap(), b.canonical_form().unwrap());
        assert_eq!(a.canonical_form().unwrap(), "[ CASE NOM NUM SG ]");
    }

    #[test]
    fn canonical_form_tags_reentrant_structures() {
        let fs = FeatureStructure::new()
            .put_path(&["SUBJ", "CASE"], atom("NOM"))
            .unwrap()
            .equate_paths(&["SUBJ"], &["XCOMP", "SUBJ"])
            .unwrap();
        assert_eq!(
            fs.canonical_form().unwrap(),
            "[ SUBJ #0=[ CASE NOM ] XCOMP [ SUBJ #0 ] ]"
        );
        assert!(fs.paths_shared(&["SUBJ"], &["XCOMP", "SUBJ"]));
    }

    #[test]
    fn reentrant_paths_grow_together() {
        let fs = FeatureStructure::new()
            .equate_paths(&["SUBJ"], &["XCOMP", "SUBJ"])
            .unwrap()
            .put_path(&["SUBJ", "CASE"], atom("NOM"))
            .unwrap();
        match fs.get_path(&["XCOMP", "SUBJ", "CASE"]).unwrap() {
            Some(Value::Atom(a)) => assert_eq!(a, "NOM"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unify_preserves_shared_paths() {
        let shared = FeatureStructure::new()
            .equate_paths(&["SUBJ"], &["XCOMP", "SUBJ"])
            .unwrap();
        let other = FeatureStructure::new()
            .put_path(&["SUBJ", "NUM"], atom("SG"))
            .unwrap();
        let u = shared.unify(&other).unwrap();
        assert!(u.paths_shared(&["SUBJ"], &["XCOMP", "SUBJ"]));
        match u.get_path(&["XCOMP", "SUBJ", "NUM"]).unwrap() {
            Some(Value::Atom(a)) => assert_eq!(a, "SG"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn semantic_form_rendering() {
        assert_eq!(
            SemanticForm::new("drehen", vec!["SUBJ".into(), "OBJ".into()], 0).display_form(),
            "'drehen<SUBJ,OBJ>'"
        );
        assert_eq!(SemanticForm::new("Fahrer", vec![], 0).display_form(), "'Fahrer'");
        assert_eq!(
            SemanticForm::new("wird", vec!["XCOMP".into()], 0)
                .with_nonthematic(vec!["SUBJ".into()])
                .display_form(),
            "'wird<XCOMP>SUBJ'"
        );
    }
}
