//! 2-level graphs of groups and 2-level Dehn twists.
//!
//! The top graph has trivial edge groups; every top vertex group is the fundamental
//! group of a local graph of groups, identified through a local base point, and the
//! correction data is a closed connected word `δ*(E)` in the local path group of the
//! terminal vertex plus a connecting word `U_E` from the endpoint of `δ*(E)` to the
//! local base point. Assembling sets `δ(E) = (H_V)_*(U_E⁻¹)·δ*(E)·U_E`.
//!
//! An edge is locally zero when `δ*(E)` is zero for the inverse of the local twist.
//! Efficiency requires (1) exactly one orientation of every edge to be locally zero
//! (the non-zero ones form the forward orientation) and (2) corrections of distinct
//! co-terminal forward edges to lie in distinct twisted-conjugacy classes. The four
//! normalization moves (subdivide, contract, align, fold) rewrite a twist towards an
//! efficient one while preserving the induced outer automorphism class.

use serde::Serialize;
use thiserror::Error;

use crate::dehn::{DehnTwist, EfficiencyReport};
use crate::gog::{EdgeId, GogError, Graph, GraphOfGroups, PathWord, Syllable, VertexId};
use crate::marking::{Marking, MarkingError};
use crate::morphism::{GogMorphism, GraphMap, MorphismError};
use crate::twisted::{
    h_conjugate, h_reduce, is_h_zero, phi_conjugate_witness, twisted_path_witness, TwistedError,
};
use crate::words::FreeWord;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwoLevelError {
    #[error("delta_star word for edge {0:?} is not closed connected in the local gog")]
    BadDeltaStar(String),
    #[error("connecting word for edge {0:?} does not join the correction endpoint to the base point")]
    BadConnecting(String),
    #[error("top edge {0:?} has no marking letter")]
    MissingLetter(String),
    #[error("orientation violation at edge pair {0:?}: {1}")]
    Orientation(String, String),
    #[error("move precondition failed: {0}")]
    MovePrecondition(String),
    #[error("general blow-up not implemented (out of scope): contraction blocked at edge {0:?}")]
    BlockedContraction(String),
    #[error("invalid witness for align move")]
    InvalidWitness,
    #[error("gog error: {0}")]
    Gog(#[from] GogError),
    #[error("marking error: {0}")]
    Marking(#[from] MarkingError),
    #[error("morphism error: {0}")]
    Morphism(#[from] MorphismError),
    #[error("twisted error: {0}")]
    Twisted(#[from] TwistedError),
}

/// Per-vertex local data: a Dehn twist on the local graph of groups and the chosen
/// base point, with the canonical marking identifying the vertex group.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalData {
    pub twist: DehnTwist,
    pub base_point: VertexId,
    marking: Marking,
}

impl LocalData {
    pub fn new(twist: DehnTwist, base_point: VertexId) -> Result<LocalData, TwoLevelError> {
        let marking = Marking::canonical(twist.gog(), base_point)?;
        Ok(LocalData {
            twist,
            base_point,
            marking,
        })
    }

    pub fn marking(&self) -> &Marking {
        &self.marking
    }

    /// Trivial local data: a single local vertex with the given (possibly empty)
    /// free group, identity twist.
    pub fn trivial(
        vertex_name: &str,
        basis: crate::words::Basis,
    ) -> Result<LocalData, TwoLevelError> {
        let g = Graph::new(&[vertex_name])?;
        let gog = GraphOfGroups::builder(g)
            .vertex_group(vertex_name, basis)?
            .build()?;
        LocalData::new(DehnTwist::identity(gog), VertexId(0))
    }
}

/// A 2-level Dehn twist.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoLevelTwist {
    top_graph: Graph,
    locals: Vec<LocalData>,      // per top vertex
    connecting: Vec<PathWord>,   // per oriented top edge
    delta_star: Vec<PathWord>,   // per oriented top edge
    top: GraphOfGroups,          // assembled top graph of groups
}

impl TwoLevelTwist {
    pub fn new(
        top_graph: Graph,
        locals: Vec<LocalData>,
        connecting: Vec<PathWord>,
        delta_star: Vec<PathWord>,
    ) -> Result<TwoLevelTwist, TwoLevelError> {
        assert_eq!(locals.len(), top_graph.vertex_count());
        let ne = top_graph.edge_pair_count() * 2;
        assert_eq!(connecting.len(), ne);
        assert_eq!(delta_star.len(), ne);
        for p in 0..top_graph.edge_pair_count() {
            let e = EdgeId(2 * p);
            if top_graph.edge_letter(e).is_none() {
                return Err(TwoLevelError::MissingLetter(
                    top_graph.edge_name(e).to_string(),
                ));
            }
        }
        // validate correction and connecting words edge by edge
        for e in (0..ne).map(EdgeId) {
            let v = top_graph.terminal(e);
            let local = &locals[v.0];
            let gog = local.twist.gog();
            let d = &delta_star[e.0];
            gog.check_connected(d)
                .map_err(|_| TwoLevelError::BadDeltaStar(top_graph.edge_name(e).to_string()))?;
            if !d.is_closed() {
                return Err(TwoLevelError::BadDeltaStar(
                    top_graph.edge_name(e).to_string(),
                ));
            }
            let u = &connecting[e.0];
            gog.check_connected(u)
                .map_err(|_| TwoLevelError::BadConnecting(top_graph.edge_name(e).to_string()))?;
            if u.issue_vertex() != d.terminal_vertex() || u.terminal_vertex() != local.base_point {
                return Err(TwoLevelError::BadConnecting(
                    top_graph.edge_name(e).to_string(),
                ));
            }
        }
        // assemble the top graph of groups: vertex bases are the local marking bases
        let mut builder = GraphOfGroups::builder(top_graph.clone());
        for v in top_graph.vertices() {
            builder = builder.vertex_group(
                top_graph.vertex_name(VertexId(v.0)),
                locals[v.0].marking.basis().clone(),
            )?;
        }
        let top = builder.build()?;
        Ok(TwoLevelTwist {
            top_graph,
            locals,
            connecting,
            delta_star,
            top,
        })
    }

    pub fn top_gog(&self) -> &GraphOfGroups {
        &self.top
    }

    pub fn top_graph(&self) -> &Graph {
        &self.top_graph
    }

    pub fn local(&self, v: VertexId) -> &LocalData {
        &self.locals[v.0]
    }

    pub fn local_twist(&self, v: usize) -> &DehnTwist {
        &self.locals[v].twist
    }

    pub fn delta_star(&self, e: EdgeId) -> &PathWord {
        &self.delta_star[e.0]
    }

    pub fn connecting(&self, e: EdgeId) -> &PathWord {
        &self.connecting[e.0]
    }

    /// Local induced automorphism at the base point of `v`.
    pub fn local_automorphism(&self, v: VertexId) -> Result<crate::words::BasisMap, TwoLevelError> {
        let l = &self.locals[v.0];
        Ok(l.marking.induced_automorphism(l.twist.gog(), &l.twist.as_morphism())?)
    }

    /// The assembled correction term `δ(E) = (H_V)_*(U_E⁻¹)·δ*(E)·U_E`, expressed in
    /// the vertex basis of `τ(E)`.
    pub fn assembled_correction(&self, e: EdgeId) -> Result<FreeWord, TwoLevelError> {
        let v = self.top_graph.terminal(e);
        let l = &self.locals[v.0];
        let gog = l.twist.gog();
        let h = l.twist.as_morphism();
        let u = &self.connecting[e.0];
        let hu_inv = h.apply(&u.inverse())?;
        let w = gog.compose(&gog.compose(&hu_inv, &self.delta_star[e.0])?, u)?;
        Ok(l.marking.to_basis(gog, &w)?)
    }

    /// The top-level automorphism: identity graph map, local automorphisms on the
    /// vertex groups, assembled corrections.
    pub fn assemble(&self) -> Result<GogMorphism, TwoLevelError> {
        let vertex_map = self
            .top_graph
            .vertices()
            .map(|v| self.local_automorphism(v))
            .collect::<Result<Vec<_>, _>>()?;
        let correction = self
            .top_graph
            .oriented_edges()
            .map(|e| self.assembled_correction(e))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GogMorphism::new(
            self.top.clone(),
            self.top.clone(),
            GraphMap::identity(&self.top),
            vertex_map,
            vec![1; self.top_graph.edge_pair_count()],
            correction,
        )?)
    }

    /// The top marking automorphism of `F_N` induced at the canonical marking based
    /// at vertex 0.
    pub fn marking_automorphism(&self) -> Result<crate::words::BasisMap, TwoLevelError> {
        let m = Marking::canonical(&self.top, VertexId(0))?;
        Ok(m.induced_automorphism(&self.top, &self.assemble()?)?)
    }

    /// Number of oriented edges that are not locally zero.
    fn non_zero_count(&self, radius: usize) -> Result<usize, TwoLevelError> {
        let mut n = 0;
        for e in self.top_graph.oriented_edges() {
            if !self.is_locally_zero(e, radius)?.zero {
                n += 1;
            }
        }
        Ok(n)
    }

    /// Runs the zero test of `δ*(E)` under the inverse of the local twist at `τ(E)`.
    pub fn is_locally_zero(&self, e: EdgeId, radius: usize) -> Result<LocalZero, TwoLevelError> {
        let v = self.top_graph.terminal(e);
        let l = &self.locals[v.0];
        let h_inv = l.twist.inverse().as_morphism();
        let rep = h_reduce(&self.delta_star[e.0], &h_inv, radius)?;
        let vertex = is_h_zero(&self.delta_star[e.0], &h_inv, radius)?;
        Ok(LocalZero {
            zero: vertex.is_some(),
            certified: rep.certified,
            vertex,
        })
    }

    /// The forward orientation `E⁺`: edges that are not locally zero. Errors when some
    /// pair has both or neither side locally zero.
    pub fn forward_orientation(&self, radius: usize) -> Result<Vec<EdgeId>, TwoLevelError> {
        let mut out = Vec::new();
        for p in self.top_graph.edge_pairs() {
            let fwd = self.is_locally_zero(p, radius)?;
            let rev = self.is_locally_zero(p.bar(), radius)?;
            match (fwd.zero, rev.zero) {
                (false, true) => out.push(p),
                (true, false) => out.push(p.bar()),
                (true, true) => {
                    return Err(TwoLevelError::Orientation(
                        self.top_graph.edge_name(p).to_string(),
                        "both orientations are locally zero".into(),
                    ))
                }
                (false, false) => {
                    return Err(TwoLevelError::Orientation(
                        self.top_graph.edge_name(p).to_string(),
                        "neither orientation is locally zero".into(),
                    ))
                }
            }
        }
        Ok(out)
    }

    pub fn check_efficient(&self, radius: usize) -> TwoLevelReport {
        check_efficient_2level(self, radius)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalZero {
    pub zero: bool,
    pub certified: bool,
    pub vertex: Option<VertexId>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TwoLevelReport {
    pub formal_rank: usize,
    pub rank_precondition: bool,
    /// Condition (1): per pair, precisely one orientation locally zero.
    pub orientation_ok: bool,
    pub orientation_witness: Option<String>,
    pub forward_edges: Vec<String>,
    /// Condition (2): distinct co-terminal forward edges in distinct twisted classes.
    pub distinct_corrections_ok: bool,
    pub conjugate_pairs: Vec<String>,
    /// Certificate status of the searches backing conditions (1) and (2).
    pub certified: bool,
    /// Efficiency of each non-trivial local twist; trivial locals are exempt.
    pub local_reports: Vec<(String, Option<EfficiencyReport>)>,
}

impl TwoLevelReport {
    pub fn passed(&self) -> bool {
        self.rank_precondition
            && self.orientation_ok
            && self.distinct_corrections_ok
            && self
                .local_reports
                .iter()
                .all(|(_, r)| r.as_ref().map(|r| r.passed()).unwrap_or(true))
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "rank_precondition = {} (formal rank {})\n",
            self.rank_precondition, self.formal_rank
        ));
        out.push_str(&format!(
            "one_side_locally_zero = {}{}\n",
            if self.orientation_ok { "pass" } else { "fail" },
            self.orientation_witness
                .as_ref()
                .map(|w| format!(" [{w}]"))
                .unwrap_or_default()
        ));
        out.push_str(&format!("forward_edges = [{}]\n", self.forward_edges.join(", ")));
        out.push_str(&format!(
            "distinct_corrections = {}{}\n",
            if self.distinct_corrections_ok {
                "pass"
            } else {
                "fail"
            },
            if self.conjugate_pairs.is_empty() {
                String::new()
            } else {
                format!(" [{}]", self.conjugate_pairs.join("; "))
            }
        ));
        out.push_str(&format!("certified = {}\n", self.certified));
        for (v, r) in &self.local_reports {
            match r {
                Some(r) => out.push_str(&format!(
                    "local[{v}] efficient = {}\n",
                    if r.passed() { "yes" } else { "no" }
                )),
                None => out.push_str(&format!("local[{v}] trivial (exempt)\n")),
            }
        }
        out.push_str(&format!(
            "efficient = {}\n",
            if self.passed() { "yes" } else { "no" }
        ));
        out
    }
}

pub fn check_efficient_2level(t: &TwoLevelTwist, radius: usize) -> TwoLevelReport {
    let g = t.top_graph();
    let formal_rank = t.top_gog().formal_rank();
    let mut certified = true;
    let (orientation_ok, orientation_witness, forward) = match t.forward_orientation(radius) {
        Ok(f) => (true, None, f),
        Err(e) => (false, Some(e.to_string()), Vec::new()),
    };
    for e in g.oriented_edges() {
        if let Ok(z) = t.is_locally_zero(e, radius) {
            certified &= z.certified;
        }
    }
    let mut conjugate_pairs = Vec::new();
    if orientation_ok {
        for (i, &e1) in forward.iter().enumerate() {
            for &e2 in &forward[i + 1..] {
                if g.terminal(e1) != g.terminal(e2) {
                    continue;
                }
                let v = g.terminal(e1);
                let h_inv = t.local(v).twist.inverse().as_morphism();
                match twisted_path_witness(t.delta_star(e1), t.delta_star(e2), &h_inv, radius) {
                    Ok(Some(_)) => conjugate_pairs.push(format!(
                        "{} and {} at {}",
                        g.edge_name(e1),
                        g.edge_name(e2),
                        g.vertex_name(v)
                    )),
                    Ok(None) => {}
                    Err(_) => certified = false,
                }
            }
        }
    }
    let local_reports = g
        .vertices()
        .map(|v| {
            let name = g.vertex_name(v).to_string();
            let l = t.local(v);
            if l.twist.gog().graph().edge_pair_count() == 0 {
                (name, None)
            } else {
                (name, Some(l.twist.check_efficient()))
            }
        })
        .collect();
    TwoLevelReport {
        formal_rank,
        rank_precondition: formal_rank >= 2,
        orientation_ok,
        orientation_witness,
        forward_edges: forward
            .iter()
            .map(|e| {
                if e.is_forward() {
                    g.edge_name(*e).to_string()
                } else {
                    format!("~{}", g.edge_name(*e))
                }
            })
            .collect(),
        distinct_corrections_ok: conjugate_pairs.is_empty(),
        conjugate_pairs,
        certified,
        local_reports,
    }
}

/// Record of one normalization move, serializable for replay.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct MoveRecord {
    pub name: &'static str,
    pub args: Vec<String>,
}

/// Maps path words over the pre-move top gog to the post-move one: each old vertex
/// goes to a new vertex with the same vertex group, each old oriented edge to a
/// sequence of new oriented edges.
#[derive(Clone, Debug)]
pub struct WordTranslator {
    pub vertex_map: Vec<VertexId>,
    pub edge_map: Vec<Vec<EdgeId>>,
}

impl WordTranslator {
    pub fn translate(
        &self,
        new_top: &GraphOfGroups,
        w: &PathWord,
    ) -> Result<PathWord, GogError> {
        let head = Syllable {
            vertex: self.vertex_map[w.head().vertex.0],
            word: w.head().word.clone(),
        };
        let mut tail = Vec::new();
        for (e, s) in w.tail() {
            let seq = &self.edge_map[e.0];
            for (i, ne) in seq.iter().enumerate() {
                let vertex = new_top.graph().terminal(*ne);
                let word = if i + 1 == seq.len() {
                    s.word.clone()
                } else {
                    FreeWord::identity()
                };
                tail.push((*ne, Syllable { vertex, word }));
            }
            if seq.is_empty() {
                // dropped edge: merge the syllable into the previous one
                match tail.last_mut() {
                    Some((_, prev)) => prev.word = prev.word.concat(&s.word),
                    None => {
                        // falls into the head
                        let merged = head.word.concat(&s.word);
                        return self.translate_with_head(new_top, w, merged);
                    }
                }
            }
        }
        new_top.reduce(&PathWord::from_parts(head, tail))
    }

    fn translate_with_head(
        &self,
        new_top: &GraphOfGroups,
        w: &PathWord,
        _merged: FreeWord,
    ) -> Result<PathWord, GogError> {
        // rare path: leading dropped edge; rebuild step by step
        let mut out = PathWord::vertex_element(
            self.vertex_map[w.head().vertex.0],
            w.head().word.clone(),
        );
        for (e, s) in w.tail() {
            let seq = &self.edge_map[e.0];
            let mut piece_tail = Vec::new();
            for (i, ne) in seq.iter().enumerate() {
                let vertex = new_top.graph().terminal(*ne);
                let word = if i + 1 == seq.len() {
                    s.word.clone()
                } else {
                    FreeWord::identity()
                };
                piece_tail.push((*ne, Syllable { vertex, word }));
            }
            let piece = if piece_tail.is_empty() {
                PathWord::vertex_element(self.vertex_map[s.vertex.0], s.word.clone())
            } else {
                PathWord::from_parts(
                    Syllable {
                        vertex: out.terminal_vertex(),
                        word: FreeWord::identity(),
                    },
                    piece_tail,
                )
            };
            out = new_top.compose(&out, &piece)?;
        }
        Ok(out)
    }
}

pub struct MoveOutcome {
    pub twist: TwoLevelTwist,
    pub record: MoveRecord,
    pub translator: WordTranslator,
}

// Internal edit-friendly representation of a 2-level twist.
#[derive(Clone)]
struct Data {
    vertices: Vec<(String, LocalData)>,
    edges: Vec<EdgeData>,
}

#[derive(Clone)]
struct EdgeData {
    name: String,
    from: usize,
    to: usize,
    letter: Option<char>,
    u_fwd: PathWord,
    u_rev: PathWord,
    d_fwd: PathWord,
    d_rev: PathWord,
}

impl Data {
    fn of(t: &TwoLevelTwist) -> Data {
        let g = t.top_graph();
        let vertices = g
            .vertices()
            .map(|v| (g.vertex_name(v).to_string(), t.local(v).clone()))
            .collect();
        let edges = g
            .edge_pairs()
            .map(|e| EdgeData {
                name: g.edge_name(e).to_string(),
                from: g.initial(e).0,
                to: g.terminal(e).0,
                letter: g.edge_letter(e),
                u_fwd: t.connecting(e).clone(),
                u_rev: t.connecting(e.bar()).clone(),
                d_fwd: t.delta_star(e).clone(),
                d_rev: t.delta_star(e.bar()).clone(),
            })
            .collect();
        Data { vertices, edges }
    }

    fn build(&self) -> Result<TwoLevelTwist, TwoLevelError> {
        let names: Vec<&str> = self.vertices.iter().map(|(n, _)| n.as_str()).collect();
        let mut graph = Graph::new(&names)?;
        for e in &self.edges {
            graph.add_edge(
                &e.name,
                &self.vertices[e.from].0,
                &self.vertices[e.to].0,
                e.letter,
            )?;
        }
        let locals = self.vertices.iter().map(|(_, l)| l.clone()).collect();
        let mut connecting = Vec::new();
        let mut delta = Vec::new();
        for e in &self.edges {
            connecting.push(e.u_fwd.clone());
            connecting.push(e.u_rev.clone());
            delta.push(e.d_fwd.clone());
            delta.push(e.d_rev.clone());
        }
        TwoLevelTwist::new(graph, locals, connecting, delta)
    }
}

fn fresh_name(base: &str, taken: &[String]) -> String {
    let mut i = 1;
    loop {
        let cand = format!("{base}{i}");
        if !taken.iter().any(|t| *t == cand) {
            return cand;
        }
        i += 1;
    }
}

/// An unused single lowercase letter for a freshly created top edge.
fn fresh_letter(data: &Data) -> char {
    let mut used: Vec<char> = Vec::new();
    for (_, l) in &data.vertices {
        used.extend_from_slice(l.marking.basis().names());
    }
    for e in &data.edges {
        if let Some(c) = e.letter {
            used.push(c);
        }
    }
    ('a'..='z')
        .find(|c| !used.contains(c))
        .expect("an unused marking letter remains")
}

/// Subdivides the edge `E` by a new vertex with trivial vertex group. The halves keep
/// the original corrections on the outer sides and carry trivial corrections at the
/// new vertex.
pub fn move_subdivide(t: &TwoLevelTwist, e: EdgeId) -> Result<MoveOutcome, TwoLevelError> {
    let g = t.top_graph();
    let mut data = Data::of(t);
    let pair = e.pair();
    let fwd = EdgeId(2 * pair); // normalize to the forward orientation
    let name = g.edge_name(fwd).to_string();
    let vnames: Vec<String> = data.vertices.iter().map(|(n, _)| n.clone()).collect();
    let enames: Vec<String> = data.edges.iter().map(|e| e.name.clone()).collect();
    let nv = fresh_name(&format!("{name}."), &vnames);
    let n1 = fresh_name(&format!("{name}#"), &enames);
    let old = data.edges[pair].clone();
    let half_letter = fresh_letter(&data);
    let trivial_local = LocalData::trivial(&format!("{nv}.loc"), crate::words::Basis::empty())?;
    let new_vertex_idx = data.vertices.len();
    let one_n = trivial_local.twist.gog().identity_word(VertexId(0));
    data.vertices.push((nv, trivial_local));
    // first half: from → N carries the reverse data on its outer side
    let first = EdgeData {
        name: n1,
        from: old.from,
        to: new_vertex_idx,
        letter: Some(half_letter),
        u_fwd: one_n.clone(),
        u_rev: old.u_rev.clone(),
        d_fwd: one_n.clone(),
        d_rev: old.d_rev.clone(),
    };
    // second half: N → to keeps the forward data and the marking letter
    let second = EdgeData {
        name: old.name.clone(),
        from: new_vertex_idx,
        to: old.to,
        letter: old.letter,
        u_fwd: old.u_fwd.clone(),
        u_rev: one_n.clone(),
        d_fwd: old.d_fwd.clone(),
        d_rev: one_n,
    };
    data.edges.remove(pair);
    let first_pair = data.edges.len();
    data.edges.push(first);
    let second_pair = data.edges.len();
    data.edges.push(second);
    let twist = data.build()?;

    // translator: vertices keep their ids (the new one is appended); E ↦ E₁·E₂
    let vertex_map = (0..g.vertex_count()).map(VertexId).collect();
    let mut edge_map = vec![Vec::new(); g.edge_pair_count() * 2];
    for old_pair in 0..g.edge_pair_count() {
        let old_e = EdgeId(2 * old_pair);
        if old_pair == pair {
            edge_map[old_e.0] = vec![EdgeId(2 * first_pair), EdgeId(2 * second_pair)];
            edge_map[old_e.bar().0] = vec![EdgeId(2 * second_pair + 1), EdgeId(2 * first_pair + 1)];
        } else {
            let new_pair = if old_pair < pair { old_pair } else { old_pair - 1 };
            edge_map[old_e.0] = vec![EdgeId(2 * new_pair)];
            edge_map[old_e.bar().0] = vec![EdgeId(2 * new_pair + 1)];
        }
    }
    Ok(MoveOutcome {
        twist,
        record: MoveRecord {
            name: "subdivide",
            args: vec![name],
        },
        translator: WordTranslator {
            vertex_map,
            edge_map,
        },
    })
}

/// Contracts the edge `E` when both orientations are locally zero with literal
/// trivial representatives and at least one endpoint carries a trivial local graph of
/// groups (that endpoint is absorbed). The class-determined local vertex of the
/// surviving side's zero representative receives the re-attached corrections.
pub fn move_contract(
    t: &TwoLevelTwist,
    e: EdgeId,
    radius: usize,
) -> Result<MoveOutcome, TwoLevelError> {
    let g = t.top_graph();
    let name = g.edge_name(e).to_string();
    if g.terminal(e) == g.initial(e) {
        return Err(TwoLevelError::MovePrecondition(format!(
            "edge {name} is a loop"
        )));
    }
    // both sides must be locally zero
    for side in [e, e.bar()] {
        let z = t.is_locally_zero(side, radius)?;
        if !z.zero {
            return Err(TwoLevelError::MovePrecondition(format!(
                "edge {name}: orientation into {} is not locally zero",
                g.vertex_name(g.terminal(side)).to_string()
            )));
        }
    }
    // absorb a trivial endpoint into the other
    let (absorbed, survivor_side) = {
        let tv = g.terminal(e);
        let iv = g.initial(e);
        if t.local(iv).twist.gog().graph().edge_pair_count() == 0
            && t.local(iv).twist.gog().formal_rank() == 0
        {
            (iv, e) // survivor is τ(e); the correction δ*(e) sits there
        } else if t.local(tv).twist.gog().graph().edge_pair_count() == 0
            && t.local(tv).twist.gog().formal_rank() == 0
        {
            (tv, e.bar())
        } else {
            return Err(TwoLevelError::BlockedContraction(name));
        }
    };
    let survivor = g.terminal(survivor_side);
    // the surviving side's correction must reduce to a literal 1 at some local vertex
    let l = t.local(survivor);
    let h_inv = l.twist.inverse().as_morphism();
    let rep = h_reduce(t.delta_star(survivor_side), &h_inv, radius)?;
    if rep.word.path_length() != 0 {
        return Err(TwoLevelError::BlockedContraction(name));
    }
    let anchor = if rep.word.head().word.is_identity() {
        rep.base_vertex
    } else {
        // vertex-level twisted triviality search
        let phi_inv = h_inv.vertex_map(rep.base_vertex);
        match phi_conjugate_witness(phi_inv, &rep.word.head().word, &FreeWord::identity(), radius)
        {
            Some(_) => rep.base_vertex,
            None => return Err(TwoLevelError::BlockedContraction(name)),
        }
    };
    let anchor_word = l.twist.gog().identity_word(anchor);
    let anchor_connect = {
        // connect anchor to the base point through the local marking tree
        let m = &l.marking;
        tree_connect(l.twist.gog(), m, anchor)
    };

    let mut data = Data::of(t);
    let pair = e.pair();
    data.edges.remove(pair);
    // re-attach edges at the absorbed vertex
    for ed in &mut data.edges {
        if ed.from == absorbed.0 {
            ed.from = survivor.0;
            ed.u_rev = anchor_connect.clone();
            ed.d_rev = anchor_word.clone();
        }
        if ed.to == absorbed.0 {
            ed.to = survivor.0;
            ed.u_fwd = anchor_connect.clone();
            ed.d_fwd = anchor_word.clone();
        }
    }
    // drop the absorbed vertex, shifting indices
    data.vertices.remove(absorbed.0);
    for ed in &mut data.edges {
        if ed.from > absorbed.0 {
            ed.from -= 1;
        }
        if ed.to > absorbed.0 {
            ed.to -= 1;
        }
    }
    let twist = data.build()?;

    let vertex_map = g
        .vertices()
        .map(|v| {
            if v == absorbed {
                VertexId(if survivor.0 > absorbed.0 {
                    survivor.0 - 1
                } else {
                    survivor.0
                })
            } else {
                VertexId(if v.0 > absorbed.0 { v.0 - 1 } else { v.0 })
            }
        })
        .collect();
    let mut edge_map = vec![Vec::new(); g.edge_pair_count() * 2];
    for old_pair in 0..g.edge_pair_count() {
        let old_e = EdgeId(2 * old_pair);
        if old_pair == pair {
            // dropped
        } else {
            let new_pair = if old_pair < pair { old_pair } else { old_pair - 1 };
            edge_map[old_e.0] = vec![EdgeId(2 * new_pair)];
            edge_map[old_e.bar().0] = vec![EdgeId(2 * new_pair + 1)];
        }
    }
    Ok(MoveOutcome {
        twist,
        record: MoveRecord {
            name: "contract",
            args: vec![name],
        },
        translator: WordTranslator {
            vertex_map,
            edge_map,
        },
    })
}

fn tree_connect(gog: &GraphOfGroups, marking: &Marking, from: VertexId) -> PathWord {
    // path word from `from` to the marking base along the tree
    marking.tree_path_to(gog, from).inverse()
}

/// Replaces `δ*(E)` by `δ*(E′)` after checking the witness transports one to the
/// other under the inverse local twist.
pub fn move_align(
    t: &TwoLevelTwist,
    e: EdgeId,
    e_prime: EdgeId,
    witness: &PathWord,
) -> Result<MoveOutcome, TwoLevelError> {
    let g = t.top_graph();
    if e == e_prime {
        return Ok(MoveOutcome {
            twist: t.clone(),
            record: MoveRecord {
                name: "align",
                args: vec![g.edge_name(e).to_string(), g.edge_name(e_prime).to_string()],
            },
            translator: identity_translator(g),
        });
    }
    if g.terminal(e) != g.terminal(e_prime) {
        return Err(TwoLevelError::MovePrecondition(
            "align requires a common terminal vertex".into(),
        ));
    }
    let v = g.terminal(e);
    let local = t.local(v);
    let h_inv = local.twist.inverse().as_morphism();
    let moved = h_conjugate(t.delta_star(e), witness, &h_inv)?;
    let target = t.delta_star(e_prime);
    let gog = local.twist.gog();
    let same = if moved.path_length() == 0 && target.path_length() == 0 {
        moved == gog.reduce(target)?
    } else {
        gog.equal_in_path_group(&moved, target)?
    };
    if !same {
        return Err(TwoLevelError::InvalidWitness);
    }
    let mut data = Data::of(t);
    let pair = e.pair();
    if e.is_forward() {
        data.edges[pair].d_fwd = target.clone();
        data.edges[pair].u_fwd = t.connecting(e_prime).clone();
    } else {
        data.edges[pair].d_rev = target.clone();
        data.edges[pair].u_rev = t.connecting(e_prime).clone();
    }
    let twist = data.build()?;
    Ok(MoveOutcome {
        twist,
        record: MoveRecord {
            name: "align",
            args: vec![g.edge_name(e).to_string(), g.edge_name(e_prime).to_string()],
        },
        translator: identity_translator(g),
    })
}

fn identity_translator(g: &Graph) -> WordTranslator {
    WordTranslator {
        vertex_map: g.vertices().collect(),
        edge_map: g.oriented_edges().map(|e| vec![e]).collect(),
    }
}

/// Folds `E` onto `E′`: equal non-zero corrections at a common terminal vertex, with
/// distinct trivial initial vertices carrying trivial reverse corrections (subdividing
/// first when necessary). The initial vertices are identified.
pub fn move_fold(
    t: &TwoLevelTwist,
    e: EdgeId,
    e_prime: EdgeId,
    radius: usize,
) -> Result<Vec<MoveOutcome>, TwoLevelError> {
    let g = t.top_graph();
    if e.pair() == e_prime.pair() {
        return Err(TwoLevelError::MovePrecondition(
            "fold requires distinct edges".into(),
        ));
    }
    if g.terminal(e) != g.terminal(e_prime) {
        return Err(TwoLevelError::MovePrecondition(
            "fold requires a common terminal vertex".into(),
        ));
    }
    for side in [e, e_prime] {
        if t.is_locally_zero(side, radius)?.zero {
            return Err(TwoLevelError::MovePrecondition(format!(
                "fold requires non-zero corrections; {} is locally zero",
                g.edge_name(side)
            )));
        }
    }
    if t.assembled_correction(e)? != t.assembled_correction(e_prime)? {
        return Err(TwoLevelError::MovePrecondition(
            "fold requires equal correction terms".into(),
        ));
    }

    let mut outcomes: Vec<MoveOutcome> = Vec::new();
    let mut current = t.clone();
    let mut e_cur = e;
    let mut ep_cur = e_prime;

    // subdivide until the initial vertices are distinct trivial vertices with
    // literally trivial reverse corrections
    let needs_split = |t: &TwoLevelTwist, x: EdgeId, other_init: VertexId| -> bool {
        let g = t.top_graph();
        let iv = g.initial(x);
        let trivial = t.local(iv).twist.gog().graph().edge_pair_count() == 0
            && t.local(iv).twist.gog().formal_rank() == 0;
        let rev_trivial = t.delta_star(x.bar()).is_identity();
        !(trivial && rev_trivial && iv != other_init)
    };
    for which in [0, 1] {
        let (x, other) = if which == 0 {
            (e_cur, current.top_graph().initial(ep_cur))
        } else {
            (ep_cur, current.top_graph().initial(e_cur))
        };
        if needs_split(&current, x, other) {
            let out = move_subdivide(&current, x)?;
            // track both edges through the translation
            let map_edge = |tr: &WordTranslator, old: EdgeId| -> EdgeId {
                *tr.edge_map[old.0].last().expect("edge survives subdivision")
            };
            e_cur = map_edge(&out.translator, e_cur);
            ep_cur = map_edge(&out.translator, ep_cur);
            current = out.twist.clone();
            outcomes.push(out);
        }
    }

    // now drop the pair of e_cur and merge its initial vertex into that of ep_cur
    let g = current.top_graph().clone();
    let v1 = g.initial(e_cur);
    let v2 = g.initial(ep_cur);
    debug_assert_ne!(v1, v2);
    let mut data = Data::of(&current);
    let dropped_pair = e_cur.pair();
    data.edges.remove(dropped_pair);
    for ed in &mut data.edges {
        if ed.from == v1.0 {
            ed.from = v2.0;
        }
        if ed.to == v1.0 {
            ed.to = v2.0;
        }
    }
    data.vertices.remove(v1.0);
    for ed in &mut data.edges {
        if ed.from > v1.0 {
            ed.from -= 1;
        }
        if ed.to > v1.0 {
            ed.to -= 1;
        }
    }
    let folded = data.build()?;

    let shift = |v: VertexId| VertexId(if v.0 > v1.0 { v.0 - 1 } else { v.0 });
    let vertex_map = g
        .vertices()
        .map(|v| if v == v1 { shift(v2) } else { shift(v) })
        .collect();
    let mut edge_map = vec![Vec::new(); g.edge_pair_count() * 2];
    let target_pair = if ep_cur.pair() < dropped_pair {
        ep_cur.pair()
    } else {
        ep_cur.pair() - 1
    };
    for old_pair in 0..g.edge_pair_count() {
        let old_e = EdgeId(2 * old_pair);
        if old_pair == dropped_pair {
            // E folds onto E′, matching orientations by terminal vertex
            let fwd_like = if g.terminal(old_e) == g.terminal(ep_cur) {
                // old forward orientation plays the role of ep_cur
                true
            } else {
                false
            };
            let (a, b) = if fwd_like == ep_cur.is_forward() {
                (EdgeId(2 * target_pair), EdgeId(2 * target_pair + 1))
            } else {
                (EdgeId(2 * target_pair + 1), EdgeId(2 * target_pair))
            };
            edge_map[old_e.0] = vec![a];
            edge_map[old_e.bar().0] = vec![b];
        } else {
            let new_pair = if old_pair < dropped_pair {
                old_pair
            } else {
                old_pair - 1
            };
            edge_map[old_e.0] = vec![EdgeId(2 * new_pair)];
            edge_map[old_e.bar().0] = vec![EdgeId(2 * new_pair + 1)];
        }
    }
    outcomes.push(MoveOutcome {
        twist: folded,
        record: MoveRecord {
            name: "fold",
            args: vec![
                g.edge_name(e_cur).to_string(),
                g.edge_name(ep_cur).to_string(),
            ],
        },
        translator: WordTranslator {
            vertex_map,
            edge_map,
        },
    });
    Ok(outcomes)
}

/// Result of [`make_efficient`].
pub enum Normalization {
    Efficient {
        twist: TwoLevelTwist,
        trace: Vec<MoveRecord>,
    },
    Blocked {
        twist: TwoLevelTwist,
        trace: Vec<MoveRecord>,
        blocking_edge: String,
        reason: String,
    },
}

/// Applies subdivide, align, fold and the restricted contraction until the twist is
/// efficient or an out-of-scope contraction blocks the procedure.
pub fn make_efficient(t: &TwoLevelTwist, radius: usize) -> Result<Normalization, TwoLevelError> {
    let mut current = t.clone();
    let mut trace = Vec::new();
    let budget = 8 + 4 * t.top_graph().edge_pair_count();
    for _ in 0..budget {
        let before_nonzero = current.non_zero_count(radius)?;
        // (1) subdivide doubly-non-zero edges
        let mut acted = false;
        for p in current.top_graph().edge_pairs() {
            let fwd = current.is_locally_zero(p, radius)?;
            let rev = current.is_locally_zero(p.bar(), radius)?;
            if !fwd.zero && !rev.zero {
                let out = move_subdivide(&current, p)?;
                trace.push(out.record.clone());
                assert_move_monotone(&out.twist, before_nonzero, radius)?;
                current = out.twist;
                acted = true;
                break;
            }
        }
        if acted {
            continue;
        }
        // (3)+(4): align then fold co-terminal twisted-conjugate forward corrections
        if let Ok(forward) = current.forward_orientation(radius) {
            'pairs: for (i, &e1) in forward.iter().enumerate() {
                for &e2 in &forward[i + 1..] {
                    let g = current.top_graph();
                    if g.terminal(e1) != g.terminal(e2) {
                        continue;
                    }
                    let v = g.terminal(e1);
                    let h_inv = current.local(v).twist.inverse().as_morphism();
                    let witness = twisted_path_witness(
                        current.delta_star(e1),
                        current.delta_star(e2),
                        &h_inv,
                        radius,
                    )?;
                    if let Some(u) = witness {
                        let aligned = move_align(&current, e1, e2, &u)?;
                        trace.push(aligned.record.clone());
                        let folded = move_fold(&aligned.twist, e1, e2, radius)?;
                        for o in folded {
                            trace.push(o.record.clone());
                            current = o.twist;
                        }
                        assert_move_monotone(&current, before_nonzero, radius)?;
                        acted = true;
                        break 'pairs;
                    }
                }
            }
        }
        if acted {
            continue;
        }
        // (2) contract both-zero edges
        for p in current.top_graph().edge_pairs() {
            let fwd = current.is_locally_zero(p, radius)?;
            let rev = current.is_locally_zero(p.bar(), radius)?;
            if fwd.zero && rev.zero {
                match move_contract(&current, p, radius) {
                    Ok(out) => {
                        trace.push(out.record.clone());
                        assert_move_monotone(&out.twist, before_nonzero, radius)?;
                        current = out.twist;
                        acted = true;
                        break;
                    }
                    Err(
                        TwoLevelError::BlockedContraction(edge)
                        | TwoLevelError::MovePrecondition(edge),
                    ) => {
                        return Ok(Normalization::Blocked {
                            twist: current,
                            trace,
                            blocking_edge: edge.clone(),
                            reason: "general blow-up contraction is out of scope".into(),
                        })
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        if acted {
            continue;
        }
        break;
    }
    if current.check_efficient(radius).passed() {
        Ok(Normalization::Efficient {
            twist: current,
            trace,
        })
    } else {
        let report = current.check_efficient(radius);
        Ok(Normalization::Blocked {
            twist: current,
            trace,
            blocking_edge: report
                .orientation_witness
                .unwrap_or_else(|| "(see report)".into()),
            reason: "no applicable move remains".into(),
        })
    }
}

fn assert_move_monotone(
    t: &TwoLevelTwist,
    before_nonzero: usize,
    radius: usize,
) -> Result<(), TwoLevelError> {
    let after = t.non_zero_count(radius)?;
    debug_assert!(
        after <= before_nonzero,
        "move increased the non-zero edge count: {before_nonzero} -> {after}"
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const R: usize = 24;

    #[test]
    fn fixture_b_assembles_and_is_efficient() {
        let b = fixtures::fixture_b();
        let h = b.assemble().unwrap();
        assert!(h.validate().is_empty());
        let gog = b.top_gog();
        let e = gog.graph().edge("E").unwrap();
        assert_eq!(
            gog.vertex_basis(gog.graph().terminal(e))
                .render_word(&b.assembled_correction(e).unwrap()),
            "b"
        );
        let fwd = b.forward_orientation(R).unwrap();
        assert_eq!(fwd, vec![e]);
        let report = b.check_efficient(R);
        assert!(report.passed(), "{}", report.render_text());
        assert!(report.certified);
    }

    #[test]
    fn locally_zero_cases() {
        let b = fixtures::fixture_b();
        let gog = b.top_gog();
        let e = gog.graph().edge("E").unwrap();
        let z = b.is_locally_zero(e, R).unwrap();
        assert!(!z.zero && z.certified);
        let z = b.is_locally_zero(e.bar(), R).unwrap();
        assert!(z.zero && z.certified);
    }

    #[test]
    fn subdivide_then_contract_round_trip() {
        let b = fixtures::fixture_b();
        let e = b.top_gog().graph().edge("E").unwrap();
        let sub = move_subdivide(&b, e).unwrap();
        // splitting an edge with a zero side leaves a both-zero half, so the
        // orientation condition fails until that half is contracted away
        assert!(matches!(
            sub.twist.forward_orientation(R),
            Err(TwoLevelError::Orientation(_, _))
        ));
        // contracting the both-zero half restores an efficient twist
        let both_zero = sub
            .twist
            .top_graph()
            .edge_pairs()
            .find(|&p| {
                sub.twist.is_locally_zero(p, R).unwrap().zero
                    && sub.twist.is_locally_zero(p.bar(), R).unwrap().zero
            })
            .expect("subdivision creates a both-zero half");
        let back = move_contract(&sub.twist, both_zero, R).unwrap();
        assert!(back.twist.check_efficient(R).passed());
        assert_eq!(
            back.twist.top_graph().edge_pair_count(),
            b.top_graph().edge_pair_count()
        );
    }

    #[test]
    fn contract_rejects_loops_and_nontrivial_locals() {
        let b = fixtures::fixture_b();
        let e = b.top_gog().graph().edge("E").unwrap();
        // loop edge
        assert!(matches!(
            move_contract(&b, e, R),
            Err(TwoLevelError::MovePrecondition(_))
        ));
        // both-zero edge between two non-trivial locals blocks
        let blocked = fixtures::mutant_blocked_contraction();
        let be = blocked.top_gog().graph().edge("E").unwrap();
        assert!(matches!(
            move_contract(&blocked, be, R),
            Err(TwoLevelError::BlockedContraction(_))
        ));
    }

    #[test]
    fn align_and_fold_duplicate_corrections() {
        let m = fixtures::mutant_conjugate_duplicates();
        let report = m.check_efficient(R);
        assert!(!report.distinct_corrections_ok, "{}", report.render_text());
        match make_efficient(&m, R).unwrap() {
            Normalization::Efficient { twist, trace } => {
                assert!(twist.check_efficient(R).passed());
                assert!(trace.iter().any(|r| r.name == "align"));
                assert!(trace.iter().any(|r| r.name == "fold"));
            }
            Normalization::Blocked { trace, reason, .. } => {
                panic!("expected normalization, got blocked: {reason}; trace {trace:?}")
            }
        }
    }

    #[test]
    fn doubly_nonzero_edge_is_subdivided() {
        let m = fixtures::mutant_double_nonzero();
        assert!(m.forward_orientation(R).is_err());
        match make_efficient(&m, R).unwrap() {
            Normalization::Efficient { twist, trace } => {
                assert!(twist.check_efficient(R).passed());
                assert!(trace.iter().any(|r| r.name == "subdivide"));
            }
            Normalization::Blocked { reason, .. } => panic!("blocked: {reason}"),
        }
    }

    #[test]
    fn blocked_contraction_reports() {
        let m = fixtures::mutant_blocked_contraction();
        match make_efficient(&m, R).unwrap() {
            Normalization::Blocked { blocking_edge, .. } => {
                assert!(blocking_edge.contains('E'));
            }
            Normalization::Efficient { .. } => panic!("expected a blocked normalization"),
        }
    }
}
