//! Interned, indexed representation of a directed labeled multigraph.
//!
//! Nodes and predicates are IRIs interned to dense integer ids in first-seen
//! order; all downstream matrices index by these ids. Triples form a set (no
//! duplicate edges), with forward and reverse adjacency indexes that are exact
//! transposes of each other. Literals are dropped at parse time and never
//! represented.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node id, assigned in first-seen order within one graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

/// Dense predicate id, assigned in first-seen order within one graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PredId(pub u32);

impl NodeId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl PredId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

/// A single edge. All three ids resolve in the owning graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: NodeId,
    pub predicate: PredId,
    pub object: NodeId,
}

impl Triple {
    pub fn new(subject: NodeId, predicate: PredId, object: NodeId) -> Self {
        Triple {
            subject,
            predicate,
            object,
        }
    }
}

/// Counts over the deduplicated triple set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub predicate_count: usize,
}

static EMPTY_NODE_SET: BTreeSet<NodeId> = BTreeSet::new();

/// Interned directed labeled multigraph with per-(node, predicate) adjacency.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    node_iris: Vec<String>,
    node_ids: HashMap<String, NodeId>,
    pred_iris: Vec<String>,
    pred_ids: HashMap<String, PredId>,
    triples: BTreeSet<Triple>,
    fwd: HashMap<(NodeId, PredId), BTreeSet<NodeId>>,
    rev: HashMap<(NodeId, PredId), BTreeSet<NodeId>>,
    /// Predicates created as abstract inverses, mapped to the predicate they
    /// invert. Never serialized; a second saturation pass must not invert an
    /// inverse.
    abstract_inverses: BTreeMap<PredId, PredId>,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns an IRI as a node; the same string always maps to the same id.
    pub fn intern_node(&mut self, iri: &str) -> NodeId {
        if let Some(&id) = self.node_ids.get(iri) {
            return id;
        }
        let id = NodeId(self.node_iris.len() as u32);
        self.node_iris.push(iri.to_string());
        self.node_ids.insert(iri.to_string(), id);
        id
    }

    pub fn intern_pred(&mut self, iri: &str) -> PredId {
        if let Some(&id) = self.pred_ids.get(iri) {
            return id;
        }
        let id = PredId(self.pred_iris.len() as u32);
        self.pred_iris.push(iri.to_string());
        self.pred_ids.insert(iri.to_string(), id);
        id
    }

    /// Inserts a triple; returns false if it was already present.
    pub fn insert(&mut self, t: Triple) -> bool {
        debug_assert!(t.subject.idx() < self.node_iris.len());
        debug_assert!(t.object.idx() < self.node_iris.len());
        debug_assert!(t.predicate.idx() < self.pred_iris.len());
        if !self.triples.insert(t) {
            return false;
        }
        self.fwd
            .entry((t.subject, t.predicate))
            .or_default()
            .insert(t.object);
        self.rev
            .entry((t.object, t.predicate))
            .or_default()
            .insert(t.subject);
        true
    }

    /// Removes a triple; returns false if it was absent.
    pub fn remove(&mut self, t: &Triple) -> bool {
        if !self.triples.remove(t) {
            return false;
        }
        if let Some(set) = self.fwd.get_mut(&(t.subject, t.predicate)) {
            set.remove(&t.object);
            if set.is_empty() {
                self.fwd.remove(&(t.subject, t.predicate));
            }
        }
        if let Some(set) = self.rev.get_mut(&(t.object, t.predicate)) {
            set.remove(&t.subject);
            if set.is_empty() {
                self.rev.remove(&(t.object, t.predicate));
            }
        }
        true
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }

    pub fn node_count(&self) -> usize {
        self.node_iris.len()
    }

    pub fn predicate_count(&self) -> usize {
        self.pred_iris.len()
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn node_iri(&self, id: NodeId) -> Result<&str> {
        self.node_iris
            .get(id.idx())
            .map(String::as_str)
            .ok_or(Error::UnknownId {
                kind: "node",
                id: id.0,
            })
    }

    pub fn pred_iri(&self, id: PredId) -> Result<&str> {
        self.pred_iris
            .get(id.idx())
            .map(String::as_str)
            .ok_or(Error::UnknownId {
                kind: "predicate",
                id: id.0,
            })
    }

    pub fn node_id(&self, iri: &str) -> Option<NodeId> {
        self.node_ids.get(iri).copied()
    }

    pub fn pred_id(&self, iri: &str) -> Option<PredId> {
        self.pred_ids.get(iri).copied()
    }

    pub fn node_ids_iter(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_iris.len() as u32).map(NodeId)
    }

    pub fn pred_ids_iter(&self) -> impl Iterator<Item = PredId> {
        (0..self.pred_iris.len() as u32).map(PredId)
    }

    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    /// The set of nodes reachable from `i` by an edge labeled `r`.
    /// O(1) index lookup; empty set when no edge.
    pub fn neighbors(&self, i: NodeId, r: PredId) -> Result<&BTreeSet<NodeId>> {
        self.check_node(i)?;
        self.check_pred(r)?;
        Ok(self.fwd.get(&(i, r)).unwrap_or(&EMPTY_NODE_SET))
    }

    /// The set of nodes with an `r`-labeled edge into `i`.
    pub fn reverse_neighbors(&self, i: NodeId, r: PredId) -> Result<&BTreeSet<NodeId>> {
        self.check_node(i)?;
        self.check_pred(r)?;
        Ok(self.rev.get(&(i, r)).unwrap_or(&EMPTY_NODE_SET))
    }

    fn check_node(&self, i: NodeId) -> Result<()> {
        if i.idx() < self.node_iris.len() {
            Ok(())
        } else {
            Err(Error::UnknownId {
                kind: "node",
                id: i.0,
            })
        }
    }

    fn check_pred(&self, r: PredId) -> Result<()> {
        if r.idx() < self.pred_iris.len() {
            Ok(())
        } else {
            Err(Error::UnknownId {
                kind: "predicate",
                id: r.0,
            })
        }
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            node_count: self.node_iris.len(),
            edge_count: self.triples.len(),
            predicate_count: self.pred_iris.len(),
        }
    }

    /// Marks `inv` as the abstract inverse of `base`.
    pub fn tag_abstract_inverse(&mut self, inv: PredId, base: PredId) {
        self.abstract_inverses.insert(inv, base);
    }

    pub fn is_abstract_inverse(&self, p: PredId) -> bool {
        self.abstract_inverses.contains_key(&p)
    }

    pub fn has_abstract_inverses(&self) -> bool {
        !self.abstract_inverses.is_empty()
    }

    pub fn abstract_inverse_count(&self) -> usize {
        self.abstract_inverses.len()
    }

    /// Convenience: interns all three IRIs and inserts the triple.
    pub fn add(&mut self, s: &str, p: &str, o: &str) -> bool {
        let s = self.intern_node(s);
        let p = self.intern_pred(p);
        let o = self.intern_node(o);
        self.insert(Triple::new(s, p, o))
    }

    /// Checks fwd/rev index transposition and triple-count bookkeeping.
    /// Used by tests; cheap enough to call on desk-scale graphs.
    pub fn check_invariants(&self) -> bool {
        let fwd_total: usize = self.fwd.values().map(BTreeSet::len).sum();
        let rev_total: usize = self.rev.values().map(BTreeSet::len).sum();
        if fwd_total != self.triples.len() || rev_total != self.triples.len() {
            return false;
        }
        self.triples.iter().all(|t| {
            self.fwd
                .get(&(t.subject, t.predicate))
                .is_some_and(|s| s.contains(&t.object))
                && self
                    .rev
                    .get(&(t.object, t.predicate))
                    .is_some_and(|s| s.contains(&t.subject))
        })
    }
}

/// Well-known vocabulary used for schema-axiom extraction. The axiom kinds
/// are fixed, the IRIs encoding them are configurable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WellKnownIris {
    pub rdf_type: String,
    pub subclass_of: String,
    pub subproperty_of: String,
    pub inverse_of: String,
    pub symmetric_class: String,
    pub same_as: String,
}

impl Default for WellKnownIris {
    fn default() -> Self {
        WellKnownIris {
            rdf_type: "http://www.w3.org/1999/02/22-rdf-syntax-ns#type".into(),
            subclass_of: "http://www.w3.org/2000/01/rdf-schema#subClassOf".into(),
            subproperty_of: "http://www.w3.org/2000/01/rdf-schema#subPropertyOf".into(),
            inverse_of: "http://www.w3.org/2002/07/owl#inverseOf".into(),
            symmetric_class: "http://www.w3.org/2002/07/owl#SymmetricProperty".into(),
            same_as: "http://www.w3.org/2002/07/owl#sameAs".into(),
        }
    }
}

/// Schema axioms found in a graph. Axiom operands are stored as node ids
/// (axiom triples make both sides nodes); they are resolved to predicate ids
/// by IRI at materialization time.
#[derive(Debug, Clone, Default)]
pub struct SchemaInfo {
    /// (subclass, superclass) node pairs.
    pub subclass_edges: BTreeSet<(NodeId, NodeId)>,
    /// (subproperty, superproperty) node pairs.
    pub subproperty_edges: BTreeSet<(NodeId, NodeId)>,
    /// Declared inverse pairs, unordered-unique (stored with min id first).
    pub inverse_pairs: BTreeSet<(NodeId, NodeId)>,
    /// Nodes typed as symmetric predicates.
    pub symmetric_predicates: BTreeSet<NodeId>,
    /// Resolved well-known predicate ids, when present in the graph.
    pub type_pred: Option<PredId>,
    pub subclass_pred: Option<PredId>,
    pub subproperty_pred: Option<PredId>,
    pub inverse_pred: Option<PredId>,
    pub sameas_pred: Option<PredId>,
}

/// Scans a graph for the schema axioms encoded by the given vocabulary.
pub fn extract_schema(g: &KnowledgeGraph, wk: &WellKnownIris) -> SchemaInfo {
    let mut schema = SchemaInfo {
        type_pred: g.pred_id(&wk.rdf_type),
        subclass_pred: g.pred_id(&wk.subclass_of),
        subproperty_pred: g.pred_id(&wk.subproperty_of),
        inverse_pred: g.pred_id(&wk.inverse_of),
        sameas_pred: g.pred_id(&wk.same_as),
        ..SchemaInfo::default()
    };
    let symmetric_class = g.node_id(&wk.symmetric_class);
    for t in g.triples() {
        if Some(t.predicate) == schema.subclass_pred {
            schema.subclass_edges.insert((t.subject, t.object));
        }
        if Some(t.predicate) == schema.subproperty_pred {
            schema.subproperty_edges.insert((t.subject, t.object));
        }
        if Some(t.predicate) == schema.inverse_pred {
            let (a, b) = if t.subject <= t.object {
                (t.subject, t.object)
            } else {
                (t.object, t.subject)
            };
            schema.inverse_pairs.insert((a, b));
        }
        if Some(t.predicate) == schema.type_pred && Some(t.object) == symmetric_class {
            schema.symmetric_predicates.insert(t.subject);
        }
    }
    schema
}

/// Outcome of parsing an N-Triples source.
#[derive(Debug)]
pub struct ParseOutcome {
    pub graph: KnowledgeGraph,
    /// Lines whose object was a literal, counted and discarded.
    pub discarded_literals: usize,
}

/// Parses the N-Triples subset: one `<iri> <iri> (<iri>|literal) .` per line,
/// `#` comments, blank lines. Literal objects are counted and dropped.
/// Blank nodes and relative IRIs are rejected.
pub fn parse_ntriples<R: BufRead>(reader: R) -> Result<ParseOutcome> {
    let mut graph = KnowledgeGraph::new();
    let mut discarded_literals = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: format!("read failure: {e}"),
        })?;
        match parse_line(&line, line_no)? {
            ParsedLine::Empty => {}
            ParsedLine::LiteralObject => discarded_literals += 1,
            ParsedLine::Triple { s, p, o } => {
                graph.add(s, p, o);
            }
        }
    }
    Ok(ParseOutcome {
        graph,
        discarded_literals,
    })
}

enum ParsedLine<'a> {
    Empty,
    LiteralObject,
    Triple { s: &'a str, p: &'a str, o: &'a str },
}

fn parse_line(line: &str, line_no: usize) -> Result<ParsedLine<'_>> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(ParsedLine::Empty);
    }
    let err = |message: String| Error::Parse {
        line: line_no,
        message,
    };
    let mut rest = trimmed;
    let s = take_iri(&mut rest).map_err(|m| err(format!("subject: {m}")))?;
    let p = take_iri(&mut rest).map_err(|m| err(format!("predicate: {m}")))?;
    rest = rest.trim_start();
    let literal_object = if rest.starts_with('"') {
        skip_literal(&mut rest).map_err(|m| err(format!("object: {m}")))?;
        true
    } else {
        false
    };
    let o = if literal_object {
        ""
    } else {
        take_iri(&mut rest).map_err(|m| err(format!("object: {m}")))?
    };
    let rest = rest.trim_start();
    if !rest.starts_with('.') {
        return Err(err("expected terminating `.`".into()));
    }
    let tail = rest[1..].trim_start();
    if !tail.is_empty() && !tail.starts_with('#') {
        return Err(err(format!("unexpected trailing content `{tail}`")));
    }
    if literal_object {
        Ok(ParsedLine::LiteralObject)
    } else {
        Ok(ParsedLine::Triple { s, p, o })
    }
}

/// Consumes `<iri>` from the front of `rest`, validating absoluteness.
fn take_iri<'a>(rest: &mut &'a str) -> std::result::Result<&'a str, String> {
    *rest = rest.trim_start();
    if rest.starts_with("_:") {
        return Err("blank nodes are not supported".into());
    }
    if !rest.starts_with('<') {
        return Err(format!("expected `<`, found `{}`", head(rest)));
    }
    let body = &rest[1..];
    let end = body
        .find('>')
        .ok_or_else(|| "unterminated IRI".to_string())?;
    let iri = &body[..end];
    if iri.is_empty() {
        return Err("empty IRI".into());
    }
    if iri.chars().any(|c| c.is_whitespace() || c == '<' || c == '"') {
        return Err(format!("invalid character in IRI `{iri}`"));
    }
    if !is_absolute_iri(iri) {
        return Err(format!("relative IRI `{iri}`"));
    }
    *rest = &body[end + 1..];
    Ok(iri)
}

/// Consumes a literal (`"..."` with optional `^^<dt>` or `@lang`) from `rest`.
fn skip_literal(rest: &mut &str) -> std::result::Result<(), String> {
    let body = &rest[1..];
    let mut escaped = false;
    let mut end = None;
    for (i, c) in body.char_indices() {
        if escaped {
            escaped = false;
        } else if c == '\\' {
            escaped = true;
        } else if c == '"' {
            end = Some(i);
            break;
        }
    }
    let end = end.ok_or_else(|| "unterminated literal".to_string())?;
    let mut after = &body[end + 1..];
    if let Some(stripped) = after.strip_prefix("^^") {
        let mut tail = stripped;
        take_iri(&mut tail)?;
        after = tail;
    } else if after.starts_with('@') {
        let lang_end = after
            .char_indices()
            .skip(1)
            .find(|(_, c)| c.is_whitespace())
            .map(|(i, _)| i)
            .unwrap_or(after.len());
        after = &after[lang_end..];
    }
    *rest = after;
    Ok(())
}

fn head(s: &str) -> &str {
    &s[..s.len().min(12)]
}

/// Absolute IRIs start with `scheme:` per RFC 3987.
fn is_absolute_iri(iri: &str) -> bool {
    let Some(colon) = iri.find(':') else {
        return false;
    };
    let scheme = &iri[..colon];
    let mut chars = scheme.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '+' || c == '-' || c == '.')
}

/// Writes one triple per line in triple-id order. The output parses back to
/// an equal triple set.
pub fn write_ntriples<W: Write>(g: &KnowledgeGraph, mut w: W) -> Result<()> {
    for t in g.triples() {
        writeln!(
            w,
            "<{}> <{}> <{}> .",
            g.node_iri(t.subject)?,
            g.pred_iri(t.predicate)?,
            g.node_iri(t.object)?
        )
        .map_err(|e| Error::io("<writer>", e))?;
    }
    Ok(())
}

/// Serializes a graph to an N-Triples string.
pub fn to_ntriples_string(g: &KnowledgeGraph) -> String {
    let mut buf = Vec::new();
    write_ntriples(g, &mut buf).expect("writing to Vec cannot fail");
    String::from_utf8(buf).expect("IRIs are valid UTF-8")
}
