//! Graphs of groups with free vertex groups and trivial-or-cyclic edge groups, and the
//! path group Π(G) of words mixing vertex-group elements and stable letters.
//!
//! A word is an alternating sequence `r₀ t₁ r₁ … t_q r_q` of vertex-group elements and
//! stable letters. Every syllable carries its vertex tag, so the trivial element at a
//! vertex `v` (written `1@v`) is distinguished from trivial elements elsewhere; this is
//! the pointed variant Π*(G) needed for twisted conjugacy.
//!
//! Text form: syllables separated by `·`, stable letters `t[e]` / `T[e]` for the two
//! orientations of the edge named `e`, trivial vertex elements `1@v`.

use std::fmt;

use thiserror::Error;

use crate::words::{cyclic_subgroup_member, Basis, FreeWord, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GogError {
    #[error("graph must be finite, non-empty and connected")]
    BadGraph,
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("unknown edge {0:?}")]
    UnknownEdge(String),
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
    #[error("edge image required for cyclic edge group on edge {0:?}")]
    MissingEdgeImage(String),
    #[error("edge image must be non-trivial (injective edge homomorphism) on edge {0:?}")]
    TrivialEdgeImage(String),
    #[error("generator names must be unique across the vertex groups and edge letters")]
    NameClash,
    #[error("word error: {0}")]
    Word(#[from] WordError),
    #[error("word is not connected: {0}")]
    Disconnected(String),
    #[error("word is not closed")]
    NotClosed,
    #[error("syllable at vertex {got:?} where {want:?} expected")]
    VertexMismatch { got: String, want: String },
    #[error("parse error in path word: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct VertexId(pub usize);

/// Oriented edge. Edges come in pairs `{e, ē}` allocated adjacently, so the reversal
/// is an index xor.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct EdgeId(pub usize);

impl EdgeId {
    pub fn bar(self) -> EdgeId {
        EdgeId(self.0 ^ 1)
    }

    pub fn pair(self) -> usize {
        self.0 >> 1
    }

    /// True on the forward orientation chosen at construction.
    pub fn is_forward(self) -> bool {
        self.0 & 1 == 0
    }
}

/// Finite connected graph with a fixed-point-free edge reversal and terminal map τ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertex_names: Vec<String>,
    edge_names: Vec<String>,       // per pair, the forward orientation's name
    edge_letters: Vec<Option<char>>, // per pair, marking letter for non-tree edges
    terminal: Vec<VertexId>,       // per oriented edge
}

impl Graph {
    pub fn new(vertex_names: &[&str]) -> Result<Graph, GogError> {
        if vertex_names.is_empty() {
            return Err(GogError::BadGraph);
        }
        let mut names = Vec::new();
        for n in vertex_names {
            if names.contains(&n.to_string()) {
                return Err(GogError::DuplicateName(n.to_string()));
            }
            names.push(n.to_string());
        }
        Ok(Graph {
            vertex_names: names,
            edge_names: Vec::new(),
            edge_letters: Vec::new(),
            terminal: Vec::new(),
        })
    }

    /// Adds an edge pair; returns the forward orientation, with `τ(e) = to`.
    pub fn add_edge(
        &mut self,
        name: &str,
        from: &str,
        to: &str,
        letter: Option<char>,
    ) -> Result<EdgeId, GogError> {
        if self.edge_names.iter().any(|n| n == name) {
            return Err(GogError::DuplicateName(name.to_string()));
        }
        let from = self.vertex(from)?;
        let to = self.vertex(to)?;
        self.edge_names.push(name.to_string());
        self.edge_letters.push(letter);
        let e = EdgeId(self.terminal.len());
        self.terminal.push(to); // τ(e)
        self.terminal.push(from); // τ(ē)
        Ok(e)
    }

    pub fn vertex(&self, name: &str) -> Result<VertexId, GogError> {
        self.vertex_names
            .iter()
            .position(|n| n == name)
            .map(VertexId)
            .ok_or_else(|| GogError::UnknownVertex(name.to_string()))
    }

    pub fn edge(&self, name: &str) -> Result<EdgeId, GogError> {
        self.edge_names
            .iter()
            .position(|n| n == name)
            .map(|p| EdgeId(2 * p))
            .ok_or_else(|| GogError::UnknownEdge(name.to_string()))
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_names[v.0]
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edge_names[e.pair()]
    }

    pub fn edge_letter(&self, e: EdgeId) -> Option<char> {
        self.edge_letters[e.pair()]
    }

    pub fn terminal(&self, e: EdgeId) -> VertexId {
        self.terminal[e.0]
    }

    pub fn initial(&self, e: EdgeId) -> VertexId {
        self.terminal[e.0 ^ 1]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn edge_pair_count(&self) -> usize {
        self.edge_names.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertex_names.len()).map(VertexId)
    }

    /// All oriented edges.
    pub fn oriented_edges(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.terminal.len()).map(EdgeId)
    }

    /// Forward orientations only.
    pub fn edge_pairs(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edge_names.len()).map(|p| EdgeId(2 * p))
    }

    /// Oriented edges terminating at `v` (the valence counts these).
    pub fn edges_into(&self, v: VertexId) -> Vec<EdgeId> {
        self.oriented_edges().filter(|e| self.terminal(*e) == v).collect()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut stack = vec![VertexId(0)];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in self.oriented_edges() {
                if self.initial(e) == v && !seen[self.terminal(e).0] {
                    seen[self.terminal(e).0] = true;
                    stack.push(self.terminal(e));
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeGroup {
    Trivial,
    Cyclic,
}

/// A graph of groups: free vertex groups, trivial or infinite-cyclic edge groups, and
/// for each oriented edge with cyclic group the image `u_e = f_e(z)` of the fixed edge
/// group generator in the terminal vertex group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphOfGroups {
    graph: Graph,
    vertex_basis: Vec<Basis>,
    edge_group: Vec<EdgeGroup>,          // per pair
    edge_image: Vec<Option<FreeWord>>,   // per oriented edge
}

impl GraphOfGroups {
    pub fn builder(graph: Graph) -> GogBuilder {
        let nv = graph.vertex_count();
        let np = graph.edge_pair_count();
        GogBuilder {
            graph,
            vertex_basis: vec![Basis::empty(); nv],
            edge_group: vec![EdgeGroup::Trivial; np],
            edge_image: vec![None; np * 2],
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn vertex_basis(&self, v: VertexId) -> &Basis {
        &self.vertex_basis[v.0]
    }

    pub fn edge_group(&self, e: EdgeId) -> EdgeGroup {
        self.edge_group[e.pair()]
    }

    /// `u_e = f_e(z)` for cyclic edge groups.
    pub fn edge_image(&self, e: EdgeId) -> Option<&FreeWord> {
        self.edge_image[e.0].as_ref()
    }

    /// Copy with the edge image of `e` replaced (the reversed orientation keeps its
    /// image). Used by the edge-monomorphism equivalence move.
    pub(crate) fn with_edge_image(&self, e: EdgeId, u: FreeWord) -> GraphOfGroups {
        let mut out = self.clone();
        out.edge_image[e.0] = Some(u);
        out
    }

    /// Formal marking rank `1 − |V| + |E⁺| + Σ rank(G_v)`.
    pub fn formal_rank(&self) -> usize {
        1 + self.graph.edge_pair_count() + self.vertex_basis.iter().map(|b| b.rank()).sum::<usize>()
            - self.graph.vertex_count()
    }

    /// Is `r` in the image `f_e(G_e)`? Returns the exponent when it is.
    pub fn in_edge_image(&self, e: EdgeId, r: &FreeWord) -> Option<i64> {
        match self.edge_group(e) {
            EdgeGroup::Trivial => r.is_identity().then_some(0),
            EdgeGroup::Cyclic => {
                let u = self.edge_image(e).expect("cyclic edge has image");
                cyclic_subgroup_member(r, u)
            }
        }
    }

    /// Image power `u_e^k`, trivially 1 for trivial edge groups.
    pub fn edge_image_pow(&self, e: EdgeId, k: i64) -> FreeWord {
        match self.edge_group(e) {
            EdgeGroup::Trivial => FreeWord::identity(),
            EdgeGroup::Cyclic => self.edge_image(e).expect("cyclic edge has image").pow(k),
        }
    }

    pub fn identity_word(&self, v: VertexId) -> PathWord {
        PathWord::vertex_element(v, FreeWord::identity())
    }

    /// Verifies the word alternation, path connectivity and vertex tags.
    pub fn check_connected(&self, w: &PathWord) -> Result<(), GogError> {
        let mut at = w.head.vertex;
        if at.0 >= self.graph.vertex_count() {
            return Err(GogError::Disconnected("bad vertex id".into()));
        }
        for (e, s) in &w.tail {
            if e.0 >= self.graph.terminal.len() {
                return Err(GogError::Disconnected("bad edge id".into()));
            }
            if self.graph.initial(*e) != at {
                return Err(GogError::Disconnected(format!(
                    "edge {} does not start at {}",
                    self.graph.edge_name(*e),
                    self.graph.vertex_name(at)
                )));
            }
            at = self.graph.terminal(*e);
            if s.vertex != at {
                return Err(GogError::VertexMismatch {
                    got: self.graph.vertex_name(s.vertex).to_string(),
                    want: self.graph.vertex_name(at).to_string(),
                });
            }
        }
        for s in w.syllables() {
            if let Some(g) = s.word.max_gen() {
                if g >= self.vertex_basis[s.vertex.0].rank() {
                    return Err(GogError::Word(WordError::LetterRange(
                        g,
                        self.vertex_basis[s.vertex.0].rank(),
                    )));
                }
            }
        }
        Ok(())
    }

    /// Britton reduction: repeatedly replaces `t_e f_e(z)^k t_ē` by `f_ē(z)^k`.
    /// The result is reduced in the sense that no such pinch applies.
    pub fn reduce(&self, w: &PathWord) -> Result<PathWord, GogError> {
        self.check_connected(w)?;
        let mut head = w.head.clone();
        let mut tail: Vec<(EdgeId, Syllable)> = Vec::with_capacity(w.tail.len());
        for (e, s) in &w.tail {
            tail.push((*e, s.clone()));
            // try to pinch at the new top
            loop {
                let n = tail.len();
                if n < 2 {
                    break;
                }
                let (e2, s2) = tail[n - 1].clone();
                let (e1, s1) = tail[n - 2].clone();
                if e2 != e1.bar() {
                    break;
                }
                // middle element is s1 (at τ(e1)); pinch when it lies in f_{e1}(G_{e1})
                let Some(k) = self.in_edge_image(e1, &s1.word) else {
                    break;
                };
                let replacement = self.edge_image_pow(e1.bar(), k);
                tail.pop();
                tail.pop();
                let merged_word = match tail.last_mut() {
                    Some((_, prev)) => {
                        prev.word = prev.word.concat(&replacement).concat(&s2.word);
                        None
                    }
                    None => Some(head.word.concat(&replacement).concat(&s2.word)),
                };
                if let Some(word) = merged_word {
                    head = Syllable {
                        vertex: head.vertex,
                        word,
                    };
                }
            }
        }
        Ok(PathWord { head, tail })
    }

    /// Deterministic normal form: Britton-reduce, then sweep left to right replacing
    /// each `r_i` (i < q) by the minimal representative of its coset
    /// `r_i·f_{ē_{i+1}}(G_{e_{i+1}})`, transferring the factor across the stable letter.
    /// Two connected words are equal in Π(G) iff their canonical forms are identical.
    pub fn canonical_form(&self, w: &PathWord) -> Result<PathWord, GogError> {
        let mut w = self.reduce(w)?;
        for i in 0..w.tail.len() {
            let e_next = w.tail[i].0;
            if self.edge_group(e_next) == EdgeGroup::Trivial {
                continue;
            }
            let r = if i == 0 {
                w.head.word.clone()
            } else {
                w.tail[i - 1].1.word.clone()
            };
            let u_rev = self
                .edge_image(e_next.bar())
                .expect("cyclic edge has image")
                .clone();
            let core_len = crate::words::cyclic_length(&u_rev).max(1);
            let bound = (r.len() / core_len + 2) as i64;
            let mut best_k = 0i64;
            let mut best = r.clone();
            for k in -bound..=bound {
                let cand = r.concat(&u_rev.pow(k));
                if crate::words::cmp_words(&cand, &best) == std::cmp::Ordering::Less {
                    best = cand;
                    best_k = k;
                }
            }
            if best_k != 0 {
                let comp = self.edge_image_pow(e_next, best_k).inverse();
                if i == 0 {
                    w.head.word = best;
                } else {
                    w.tail[i - 1].1.word = best;
                }
                let next = &mut w.tail[i].1;
                next.word = comp.concat(&next.word);
            }
        }
        Ok(w)
    }

    /// Path length `q` of the reduced form.
    pub fn path_length(&self, w: &PathWord) -> Result<usize, GogError> {
        Ok(self.reduce(w)?.path_length())
    }

    /// Equality in Π(G). Vertex tags of trivial words are ignored here: both represent
    /// the identity of the path group. (Π*(G) distinctions live in the twisted module.)
    pub fn equal_in_path_group(&self, a: &PathWord, b: &PathWord) -> Result<bool, GogError> {
        let ca = self.canonical_form(a)?;
        let cb = self.canonical_form(b)?;
        if ca.path_length() == 0 && cb.path_length() == 0 {
            if ca.head.word.is_identity() && cb.head.word.is_identity() {
                return Ok(true);
            }
            return Ok(ca == cb);
        }
        Ok(ca == cb)
    }

    /// Composition `a·b` (terminal vertex of `a` must be the initial vertex of `b`),
    /// Britton-reduced.
    pub fn compose(&self, a: &PathWord, b: &PathWord) -> Result<PathWord, GogError> {
        if a.terminal_vertex() != b.issue_vertex() {
            return Err(GogError::Disconnected(
                "composition endpoints do not match".into(),
            ));
        }
        let mut head = a.head.clone();
        let mut tail = a.tail.clone();
        match tail.last_mut() {
            Some((_, last)) => last.word = last.word.concat(&b.head.word),
            None => head.word = head.word.concat(&b.head.word),
        }
        tail.extend(b.tail.iter().cloned());
        self.reduce(&PathWord { head, tail })
    }

    /// Cyclic reduction of a closed connected word: returns `(core, conjugator)` with
    /// `w = conjugator · core · conjugator⁻¹` in Π(G) and the core cyclically reduced.
    pub fn cyclically_reduce(
        &self,
        w: &PathWord,
    ) -> Result<(PathWord, PathWord), GogError> {
        self.check_connected(w)?;
        if !w.is_closed() {
            return Err(GogError::NotClosed);
        }
        let mut core = self.reduce(w)?;
        let mut conj = self.identity_word(w.issue_vertex());
        loop {
            let q = core.path_length();
            if q < 2 {
                break;
            }
            let e_first = core.tail[0].0;
            let e_last = core.tail[q - 1].0;
            if e_first != e_last.bar() {
                break;
            }
            let wrap = core.tail[q - 1].1.word.concat(&core.head.word);
            if self.in_edge_image(e_last, &wrap).is_none() {
                break;
            }
            // rotate past the first stable letter; the reduction pinches the wrap
            let prefix = PathWord {
                head: core.head.clone(),
                tail: vec![(e_first, Syllable {
                    vertex: self.graph.terminal(e_first),
                    word: FreeWord::identity(),
                })],
            };
            let rotated = self.compose(&self.compose(&prefix.inverse(), &core)?, &prefix)?;
            conj = self.compose(&conj, &prefix)?;
            core = rotated;
        }
        Ok((core, conj))
    }
}

pub struct GogBuilder {
    graph: Graph,
    vertex_basis: Vec<Basis>,
    edge_group: Vec<EdgeGroup>,
    edge_image: Vec<Option<FreeWord>>,
}

impl GogBuilder {
    pub fn vertex_group(mut self, v: &str, basis: Basis) -> Result<GogBuilder, GogError> {
        let v = self.graph.vertex(v)?;
        self.vertex_basis[v.0] = basis;
        Ok(self)
    }

    /// Declares a cyclic edge group with images `u_e` (at `to`) and `u_ē` (at `from`),
    /// given in the text form of the respective vertex bases.
    pub fn cyclic_edge(
        mut self,
        edge: &str,
        image: &str,
        image_rev: &str,
    ) -> Result<GogBuilder, GogError> {
        let e = self.graph.edge(edge)?;
        self.edge_group[e.pair()] = EdgeGroup::Cyclic;
        let tv = self.graph.terminal(e);
        let iv = self.graph.initial(e);
        let u = self.vertex_basis[tv.0].parse_word(image)?;
        let u_rev = self.vertex_basis[iv.0].parse_word(image_rev)?;
        if u.is_identity() || u_rev.is_identity() {
            return Err(GogError::TrivialEdgeImage(edge.to_string()));
        }
        self.edge_image[e.0] = Some(u);
        self.edge_image[e.bar().0] = Some(u_rev);
        Ok(self)
    }

    pub fn build(self) -> Result<GraphOfGroups, GogError> {
        if !self.graph.is_connected() {
            return Err(GogError::BadGraph);
        }
        // generator names and edge letters must be globally unique so words parse
        let mut names: Vec<char> = Vec::new();
        for b in &self.vertex_basis {
            names.extend_from_slice(b.names());
        }
        for p in 0..self.graph.edge_pair_count() {
            if let Some(c) = self.graph.edge_letters[p] {
                names.push(c);
            }
        }
        for (i, c) in names.iter().enumerate() {
            if names[..i].contains(c) {
                return Err(GogError::NameClash);
            }
        }
        for e in self.graph.oriented_edges() {
            match self.edge_group[e.pair()] {
                EdgeGroup::Cyclic => {
                    if self.edge_image[e.0].is_none() {
                        return Err(GogError::MissingEdgeImage(
                            self.graph.edge_name(e).to_string(),
                        ));
                    }
                }
                EdgeGroup::Trivial => {
                    debug_assert!(self.edge_image[e.0].is_none());
                }
            }
        }
        Ok(GraphOfGroups {
            graph: self.graph,
            vertex_basis: self.vertex_basis,
            edge_group: self.edge_group,
            edge_image: self.edge_image,
        })
    }
}

/// A vertex-group element tagged with its vertex.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Syllable {
    pub vertex: VertexId,
    pub word: FreeWord,
}

/// Element of Π*(G): alternating vertex-group elements and stable letters, every
/// syllable tagged with its vertex.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PathWord {
    head: Syllable,
    tail: Vec<(EdgeId, Syllable)>,
}

impl fmt::Debug for PathWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PathWord(q={}, at v{})", self.tail.len(), self.head.vertex.0)
    }
}

impl PathWord {
    pub fn vertex_element(v: VertexId, word: FreeWord) -> PathWord {
        PathWord {
            head: Syllable { vertex: v, word },
            tail: Vec::new(),
        }
    }

    /// The bare stable letter `1 t_e 1`.
    pub fn stable_letter(graph: &Graph, e: EdgeId) -> PathWord {
        PathWord {
            head: Syllable {
                vertex: graph.initial(e),
                word: FreeWord::identity(),
            },
            tail: vec![(e, Syllable {
                vertex: graph.terminal(e),
                word: FreeWord::identity(),
            })],
        }
    }

    pub fn from_parts(head: Syllable, tail: Vec<(EdgeId, Syllable)>) -> PathWord {
        PathWord { head, tail }
    }

    pub fn head(&self) -> &Syllable {
        &self.head
    }

    pub fn tail(&self) -> &[(EdgeId, Syllable)] {
        &self.tail
    }

    pub fn syllables(&self) -> impl Iterator<Item = &Syllable> {
        std::iter::once(&self.head).chain(self.tail.iter().map(|(_, s)| s))
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.tail.iter().map(|(e, _)| *e)
    }

    /// Number of stable letters in this representation (not the reduced length).
    pub fn path_length(&self) -> usize {
        self.tail.len()
    }

    pub fn issue_vertex(&self) -> VertexId {
        self.head.vertex
    }

    pub fn terminal_vertex(&self) -> VertexId {
        self.tail.last().map(|(_, s)| s.vertex).unwrap_or(self.head.vertex)
    }

    pub fn is_closed(&self) -> bool {
        self.issue_vertex() == self.terminal_vertex()
    }

    pub fn is_identity(&self) -> bool {
        self.tail.is_empty() && self.head.word.is_identity()
    }

    pub fn inverse(&self) -> PathWord {
        let head = Syllable {
            vertex: self.terminal_vertex(),
            word: self
                .tail
                .last()
                .map(|(_, s)| s.word.inverse())
                .unwrap_or_else(|| self.head.word.inverse()),
        };
        let mut tail = Vec::with_capacity(self.tail.len());
        for i in (0..self.tail.len()).rev() {
            let e = self.tail[i].0.bar();
            let prev = if i == 0 { &self.head } else { &self.tail[i - 1].1 };
            tail.push((e, Syllable {
                vertex: prev.vertex,
                word: prev.word.inverse(),
            }));
        }
        PathWord { head, tail }
    }

    /// Text form against a graph of groups (for vertex bases and edge names).
    pub fn to_text(&self, gog: &GraphOfGroups) -> String {
        let mut parts: Vec<String> = Vec::new();
        let render = |s: &Syllable| -> Option<String> {
            if s.word.is_identity() {
                None
            } else {
                Some(gog.vertex_basis(s.vertex).render_word(&s.word))
            }
        };
        if self.tail.is_empty() {
            return if self.head.word.is_identity() {
                format!("1@{}", gog.graph().vertex_name(self.head.vertex))
            } else {
                render(&self.head).unwrap()
            };
        }
        if let Some(h) = render(&self.head) {
            parts.push(h);
        }
        for (e, s) in &self.tail {
            let name = gog.graph().edge_name(*e);
            parts.push(if e.is_forward() {
                format!("t[{name}]")
            } else {
                format!("T[{name}]")
            });
            if let Some(r) = render(s) {
                parts.push(r);
            }
        }
        parts.join("·")
    }

    /// Parses the text form. Trivial interior syllables may be suppressed; a pure
    /// vertex word needs either a unique owning vertex for its letters or a `@v` tag.
    pub fn parse(gog: &GraphOfGroups, text: &str) -> Result<PathWord, GogError> {
        let text = text.trim();
        let parts: Vec<&str> = if text.contains('·') {
            text.split('·').map(str::trim).collect()
        } else if text.contains('*') {
            text.split('*').map(str::trim).collect()
        } else {
            vec![text]
        };

        enum Piece {
            Stable(EdgeId),
            Element(Option<VertexId>, String),
        }
        let mut pieces = Vec::new();
        for p in parts {
            if p.is_empty() {
                continue;
            }
            if (p.starts_with("t[") || p.starts_with("T[")) && p.ends_with(']') {
                let name = &p[2..p.len() - 1];
                let e = gog.graph().edge(name)?;
                pieces.push(Piece::Stable(if p.starts_with('T') { e.bar() } else { e }));
            } else if let Some((w, v)) = p.split_once('@') {
                let v = gog.graph().vertex(v)?;
                pieces.push(Piece::Element(Some(v), w.to_string()));
            } else {
                pieces.push(Piece::Element(None, p.to_string()));
            }
        }

        // resolve vertices: before a stable letter t_e an element sits at initial(e),
        // after it at terminal(e)
        let mut head: Option<Syllable> = None;
        let mut tail: Vec<(EdgeId, Syllable)> = Vec::new();
        let mut pending: Option<(Option<VertexId>, String)> = None;
        let place =
            |head: &mut Option<Syllable>,
             tail: &mut Vec<(EdgeId, Syllable)>,
             vertex: VertexId,
             text: &str|
             -> Result<(), GogError> {
                let word = gog.vertex_basis(vertex).parse_word(text)?;
                let s = Syllable { vertex, word };
                match tail.last_mut() {
                    Some((_, slot)) => *slot = s,
                    None => *head = Some(s),
                }
                Ok(())
            };
        for piece in pieces {
            match piece {
                Piece::Element(v, w) => {
                    if pending.is_some() {
                        return Err(GogError::Parse(
                            "two vertex elements without a stable letter between them".into(),
                        ));
                    }
                    pending = Some((v, w));
                }
                Piece::Stable(e) => {
                    let iv = gog.graph().initial(e);
                    if let Some((v, w)) = pending.take() {
                        if let Some(v) = v {
                            if v != iv {
                                return Err(GogError::VertexMismatch {
                                    got: gog.graph().vertex_name(v).to_string(),
                                    want: gog.graph().vertex_name(iv).to_string(),
                                });
                            }
                        }
                        if head.is_none() && tail.is_empty() {
                            let word = gog.vertex_basis(iv).parse_word(&w)?;
                            head = Some(Syllable { vertex: iv, word });
                        } else {
                            place(&mut head, &mut tail, iv, &w)?;
                        }
                    } else if head.is_none() && tail.is_empty() {
                        head = Some(Syllable {
                            vertex: iv,
                            word: FreeWord::identity(),
                        });
                    }
                    // check continuity against what we have so far
                    let current_terminal = tail
                        .last()
                        .map(|(_, s)| s.vertex)
                        .or(head.as_ref().map(|s| s.vertex));
                    if let Some(cur) = current_terminal {
                        if cur != iv {
                            return Err(GogError::Disconnected(format!(
                                "stable letter of {} does not continue the path",
                                gog.graph().edge_name(e)
                            )));
                        }
                    }
                    tail.push((e, Syllable {
                        vertex: gog.graph().terminal(e),
                        word: FreeWord::identity(),
                    }));
                }
            }
        }
        if let Some((v, w)) = pending.take() {
            match (head.is_none() && tail.is_empty(), v) {
                (true, Some(v)) => {
                    let word = gog.vertex_basis(v).parse_word(&w)?;
                    head = Some(Syllable { vertex: v, word });
                }
                (true, None) => {
                    // pure vertex word: find the unique vertex owning the letters
                    let mut owner = None;
                    if w == "1" {
                        return Err(GogError::Parse(
                            "trivial word needs a vertex tag 1@v".into(),
                        ));
                    }
                    for vid in gog.graph().vertices() {
                        if gog.vertex_basis(vid).parse_word(&w).is_ok() {
                            if owner.replace(vid).is_some() {
                                return Err(GogError::Parse(format!(
                                    "ambiguous vertex for element {w:?}; tag it with @v"
                                )));
                            }
                        }
                    }
                    let vid = owner.ok_or_else(|| {
                        GogError::Parse(format!("no vertex group contains {w:?}"))
                    })?;
                    let word = gog.vertex_basis(vid).parse_word(&w)?;
                    head = Some(Syllable { vertex: vid, word });
                }
                (false, v) => {
                    let want = tail.last().map(|(_, s)| s.vertex).unwrap();
                    if let Some(v) = v {
                        if v != want {
                            return Err(GogError::VertexMismatch {
                                got: gog.graph().vertex_name(v).to_string(),
                                want: gog.graph().vertex_name(want).to_string(),
                            });
                        }
                    }
                    place(&mut head, &mut tail, want, &w)?;
                }
            }
        }
        let head = head.ok_or_else(|| GogError::Parse("empty word".into()))?;
        let word = PathWord { head, tail };
        gog.check_connected(&word)?;
        Ok(word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn edge_ids_pair_up() {
        let mut g = Graph::new(&["v", "w"]).unwrap();
        let e = g.add_edge("e", "v", "w", None).unwrap();
        assert_eq!(g.terminal(e), g.vertex("w").unwrap());
        assert_eq!(g.terminal(e.bar()), g.vertex("v").unwrap());
        assert_eq!(e.bar().bar(), e);
        assert_ne!(e.bar(), e);
    }

    #[test]
    fn trivial_edge_pinch() {
        let b = fixtures::fixture_b();
        let gog = b.top_gog();
        // t_E · 1 · t_Ē reduces to the trivial word at the initial vertex
        let e = gog.graph().edge("E").unwrap();
        let t = PathWord::stable_letter(gog.graph(), e);
        let w = gog.compose(&t, &t.inverse()).unwrap();
        assert_eq!(w.path_length(), 0);
        assert!(w.head().word.is_identity());
    }

    #[test]
    fn cyclic_edge_pinch() {
        let a = fixtures::fixture_a();
        let gog = a.gog();
        let e = gog.graph().edge("e").unwrap();
        // t_e · u_e · t_ē  =  u_ē
        let te = PathWord::stable_letter(gog.graph(), e);
        let u_e = PathWord::vertex_element(
            gog.graph().terminal(e),
            gog.edge_image(e).unwrap().clone(),
        );
        let w = gog
            .compose(&gog.compose(&te, &u_e).unwrap(), &te.inverse())
            .unwrap();
        assert_eq!(w.path_length(), 0);
        assert_eq!(&w.head().word, gog.edge_image(e.bar()).unwrap());
    }

    #[test]
    fn canonical_form_idempotent_and_invariant() {
        let a = fixtures::fixture_a();
        let gog = a.gog();
        let w = PathWord::parse(gog, "a·t[e]·a·T[e]·a·t[e]").unwrap();
        let c1 = gog.canonical_form(&w).unwrap();
        let c2 = gog.canonical_form(&c1).unwrap();
        assert_eq!(c1, c2);
    }

    #[test]
    fn parse_round_trip() {
        let b = fixtures::fixture_b();
        let gog = b.top_gog();
        for text in ["1@V", "a", "ab", "t[E]", "a·t[E]·b", "T[E]·ba·t[E]"] {
            let w = PathWord::parse(gog, text).unwrap();
            let again = PathWord::parse(gog, &w.to_text(gog)).unwrap();
            assert_eq!(w, again, "round trip of {text}");
        }
    }

    #[test]
    fn cyclically_reduce_pinchable_ends() {
        let a = fixtures::fixture_a();
        let gog = a.gog();
        let e = gog.graph().edge("e").unwrap();
        // t_e · b-core · t_ē with a pinchable wrap: w = t a t̄ conjugate of a-core
        let te = PathWord::stable_letter(gog.graph(), e);
        let mid = PathWord::vertex_element(gog.graph().terminal(e), gog.edge_image(e).unwrap().clone());
        let w = gog
            .compose(&gog.compose(&te, &mid).unwrap(), &te.inverse())
            .unwrap();
        // already length 0 after reduce; a genuinely wrapped example:
        let w2 = PathWord::parse(gog, "T[e]·a·t[e]·a").unwrap();
        let (core, conj) = gog.cyclically_reduce(&w2).unwrap();
        assert!(core.path_length() <= w2.path_length());
        let back = gog
            .compose(&gog.compose(&conj, &core).unwrap(), &conj.inverse())
            .unwrap();
        assert!(gog.equal_in_path_group(&back, &w2).unwrap());
        let _ = w;
    }
}
