//! Graph-of-groups isomorphisms and automorphisms with correction terms.
//!
//! A morphism `H: G → G′` carries a graph bijection, a free-group isomorphism per
//! vertex, a sign per cyclic edge group, and a correction term `δ(e)` per oriented
//! edge, subject to `H_{τ(e)} ∘ f_e = ad_{δ(e)} ∘ f_{ρ(e)} ∘ H_e` on edge groups.
//! The induced map on the path group sends vertex elements through the vertex
//! isomorphisms and `t_e ↦ δ(ē) · t_{ρ(e)} · δ(e)⁻¹`.

use thiserror::Error;

use crate::gog::{EdgeGroup, EdgeId, GogError, GraphOfGroups, PathWord, Syllable, VertexId};
use crate::words::{BasisMap, FreeWord, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorphismError {
    #[error("graph map is not a bijection commuting with reversal and terminal maps")]
    BadGraphMap,
    #[error("vertex map arity/basis mismatch at vertex {0}")]
    BadVertexMap(usize),
    #[error("correction term for edge {0} lies in the wrong vertex group")]
    BadCorrection(String),
    #[error("morphisms are not composable: target and source differ")]
    NotComposable,
    #[error("element {0:?} lies in the wrong vertex group")]
    WrongVertexGroup(String),
    #[error("gog error: {0}")]
    Gog(#[from] GogError),
    #[error("word error: {0}")]
    Word(#[from] WordError),
    #[error("validation failed: {0:?}")]
    Invalid(Vec<String>),
}

/// Vertex and edge bijections commuting with reversal and terminal maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphMap {
    vertex: Vec<VertexId>,
    edge: Vec<EdgeId>, // per oriented edge
}

impl GraphMap {
    pub fn identity(gog: &GraphOfGroups) -> GraphMap {
        GraphMap {
            vertex: gog.graph().vertices().collect(),
            edge: gog.graph().oriented_edges().collect(),
        }
    }

    pub fn new(vertex: Vec<VertexId>, edge: Vec<EdgeId>) -> GraphMap {
        GraphMap { vertex, edge }
    }

    pub fn vertex(&self, v: VertexId) -> VertexId {
        self.vertex[v.0]
    }

    pub fn edge(&self, e: EdgeId) -> EdgeId {
        self.edge[e.0]
    }

    pub fn is_identity(&self) -> bool {
        self.vertex.iter().enumerate().all(|(i, v)| v.0 == i)
            && self.edge.iter().enumerate().all(|(i, e)| e.0 == i)
    }

    fn check(
        &self,
        source: &GraphOfGroups,
        target: &GraphOfGroups,
    ) -> Result<(), MorphismError> {
        let g = source.graph();
        let h = target.graph();
        if self.vertex.len() != g.vertex_count() || self.edge.len() != g.edge_pair_count() * 2 {
            return Err(MorphismError::BadGraphMap);
        }
        let mut vseen = vec![false; h.vertex_count()];
        for &v in &self.vertex {
            if v.0 >= h.vertex_count() || std::mem::replace(&mut vseen[v.0], true) {
                return Err(MorphismError::BadGraphMap);
            }
        }
        let mut eseen = vec![false; h.edge_pair_count() * 2];
        for e in g.oriented_edges() {
            let ie = self.edge(e);
            if ie.0 >= h.edge_pair_count() * 2 || std::mem::replace(&mut eseen[ie.0], true) {
                return Err(MorphismError::BadGraphMap);
            }
            if self.edge(e.bar()) != ie.bar() {
                return Err(MorphismError::BadGraphMap);
            }
            if self.vertex(g.terminal(e)) != h.terminal(ie) {
                return Err(MorphismError::BadGraphMap);
            }
        }
        Ok(())
    }

    fn inverse(&self) -> GraphMap {
        let mut vertex = vec![VertexId(0); self.vertex.len()];
        for (i, v) in self.vertex.iter().enumerate() {
            vertex[v.0] = VertexId(i);
        }
        let mut edge = vec![EdgeId(0); self.edge.len()];
        for (i, e) in self.edge.iter().enumerate() {
            edge[e.0] = EdgeId(i);
        }
        GraphMap { vertex, edge }
    }
}

/// A graph-of-groups isomorphism.
#[derive(Clone, Debug, PartialEq)]
pub struct GogMorphism {
    source: GraphOfGroups,
    target: GraphOfGroups,
    graph_map: GraphMap,
    vertex_map: Vec<BasisMap>,
    edge_sign: Vec<i8>,        // per source edge pair; the edge-group isomorphism z ↦ z^±1
    correction: Vec<FreeWord>, // per source oriented edge, δ(e) ∈ G_{τ(ρ(e))}
}

impl GogMorphism {
    pub fn new(
        source: GraphOfGroups,
        target: GraphOfGroups,
        graph_map: GraphMap,
        vertex_map: Vec<BasisMap>,
        edge_sign: Vec<i8>,
        correction: Vec<FreeWord>,
    ) -> Result<GogMorphism, MorphismError> {
        graph_map.check(&source, &target)?;
        if vertex_map.len() != source.graph().vertex_count() {
            return Err(MorphismError::BadVertexMap(vertex_map.len()));
        }
        for v in source.graph().vertices() {
            let m = &vertex_map[v.0];
            if m.source() != source.vertex_basis(v)
                || m.target() != target.vertex_basis(graph_map.vertex(v))
            {
                return Err(MorphismError::BadVertexMap(v.0));
            }
        }
        if edge_sign.len() != source.graph().edge_pair_count()
            || correction.len() != source.graph().edge_pair_count() * 2
        {
            return Err(MorphismError::BadGraphMap);
        }
        for e in source.graph().oriented_edges() {
            let basis = target.vertex_basis(target.graph().terminal(graph_map.edge(e)));
            if let Some(g) = correction[e.0].max_gen() {
                if g >= basis.rank() {
                    return Err(MorphismError::BadCorrection(
                        source.graph().edge_name(e).to_string(),
                    ));
                }
            }
        }
        Ok(GogMorphism {
            source,
            target,
            graph_map,
            vertex_map,
            edge_sign,
            correction,
        })
    }

    pub fn identity(gog: &GraphOfGroups) -> GogMorphism {
        GogMorphism {
            source: gog.clone(),
            target: gog.clone(),
            graph_map: GraphMap::identity(gog),
            vertex_map: gog
                .graph()
                .vertices()
                .map(|v| gog.vertex_basis(v).identity_map())
                .collect(),
            edge_sign: vec![1; gog.graph().edge_pair_count()],
            correction: vec![FreeWord::identity(); gog.graph().edge_pair_count() * 2],
        }
    }

    pub fn source(&self) -> &GraphOfGroups {
        &self.source
    }

    pub fn target(&self) -> &GraphOfGroups {
        &self.target
    }

    pub fn graph_map(&self) -> &GraphMap {
        &self.graph_map
    }

    pub fn vertex_map(&self, v: VertexId) -> &BasisMap {
        &self.vertex_map[v.0]
    }

    pub fn edge_sign(&self, e: EdgeId) -> i8 {
        self.edge_sign[e.pair()]
    }

    pub fn correction(&self, e: EdgeId) -> &FreeWord {
        &self.correction[e.0]
    }

    pub fn is_automorphism(&self) -> bool {
        self.source == self.target
    }

    /// Checks the commutation equation `H_{τ(e)}(u_e) = δ(e)·u_{ρ(e)}^{±1}·δ(e)⁻¹`
    /// on the edge-group generator of every cyclic edge, plus type preservation.
    /// Returns the list of violations (empty when valid).
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for e in self.source.graph().oriented_edges() {
            let ie = self.graph_map.edge(e);
            match (self.source.edge_group(e), self.target.edge_group(ie)) {
                (EdgeGroup::Cyclic, EdgeGroup::Cyclic) => {
                    let u = self.source.edge_image(e).unwrap();
                    let v = self.source.graph().terminal(e);
                    let lhs = self.vertex_map[v.0].apply(u);
                    let target_u = self.target.edge_image(ie).unwrap();
                    let rhs = target_u
                        .pow(self.edge_sign(e) as i64)
                        .conjugated_by(&self.correction[e.0]);
                    if lhs != rhs {
                        out.push(format!(
                            "edge {}: H(u_e) ≠ δ(e)·u'^{:+}·δ(e)⁻¹",
                            self.source.graph().edge_name(e),
                            self.edge_sign(e)
                        ));
                    }
                }
                (EdgeGroup::Trivial, EdgeGroup::Trivial) => {}
                _ => out.push(format!(
                    "edge {}: edge group type not preserved",
                    self.source.graph().edge_name(e)
                )),
            }
        }
        out
    }

    pub fn validated(self) -> Result<GogMorphism, MorphismError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(MorphismError::Invalid(v))
        }
    }

    /// Image of a stable letter: `δ(ē) · t_{ρ(e)} · δ(e)⁻¹`.
    pub fn stable_letter_image(&self, e: EdgeId) -> PathWord {
        let ie = self.graph_map.edge(e);
        let h = self.target.graph();
        PathWord::from_parts(
            Syllable {
                vertex: h.initial(ie),
                word: self.correction[e.bar().0].clone(),
            },
            vec![(ie, Syllable {
                vertex: h.terminal(ie),
                word: self.correction[e.0].inverse(),
            })],
        )
    }

    /// Induced map on the path group; the image is Britton-reduced.
    pub fn apply(&self, w: &PathWord) -> Result<PathWord, MorphismError> {
        self.source.check_connected(w)?;
        let mut head = Syllable {
            vertex: self.graph_map.vertex(w.head().vertex),
            word: self.vertex_map[w.head().vertex.0].apply(&w.head().word),
        };
        let mut tail: Vec<(EdgeId, Syllable)> = Vec::with_capacity(w.tail().len());
        for (e, s) in w.tail() {
            let ie = self.graph_map.edge(*e);
            // δ(ē) attaches before the stable letter, δ(e)⁻¹ after
            let before = &self.correction[e.bar().0];
            match tail.last_mut() {
                Some((_, prev)) => prev.word = prev.word.concat(before),
                None => head.word = head.word.concat(before),
            }
            let img = self.vertex_map[s.vertex.0].apply(&s.word);
            tail.push((ie, Syllable {
                vertex: self.graph_map.vertex(s.vertex),
                word: self.correction[e.0].inverse().concat(&img),
            }));
        }
        Ok(self.target.reduce(&PathWord::from_parts(head, tail))?)
    }

    /// Applies the vertex map at `v` to a vertex-group element.
    pub fn apply_vertex(&self, v: VertexId, w: &FreeWord) -> FreeWord {
        self.vertex_map[v.0].apply(w)
    }

    /// `other ∘ self` (apply `self` first).
    pub fn then(&self, other: &GogMorphism) -> Result<GogMorphism, MorphismError> {
        if self.target != other.source {
            return Err(MorphismError::NotComposable);
        }
        let g = self.source.graph();
        let graph_map = GraphMap {
            vertex: g
                .vertices()
                .map(|v| other.graph_map.vertex(self.graph_map.vertex(v)))
                .collect(),
            edge: g
                .oriented_edges()
                .map(|e| other.graph_map.edge(self.graph_map.edge(e)))
                .collect(),
        };
        let vertex_map = g
            .vertices()
            .map(|v| {
                self.vertex_map[v.0].then(&other.vertex_map[self.graph_map.vertex(v).0])
            })
            .collect::<Result<Vec<_>, _>>()?;
        let edge_sign = (0..g.edge_pair_count())
            .map(|p| {
                let e = EdgeId(2 * p);
                self.edge_sign(e) * other.edge_sign(self.graph_map.edge(e))
            })
            .collect();
        // δ(e) = H₂(δ₁(e)) · δ₂(ρ₁(e))
        let correction = g
            .oriented_edges()
            .map(|e| {
                let mid = self.graph_map.edge(e);
                let v_mid = self.target.graph().terminal(mid);
                other.vertex_map[v_mid.0]
                    .apply(&self.correction[e.0])
                    .concat(&other.correction[mid.0])
            })
            .collect();
        GogMorphism::new(
            self.source.clone(),
            other.target.clone(),
            graph_map,
            vertex_map,
            edge_sign,
            correction,
        )
    }

    pub fn invert(&self) -> Result<GogMorphism, MorphismError> {
        let graph_map = self.graph_map.inverse();
        let h = self.target.graph();
        let vertex_map = h
            .vertices()
            .map(|v| self.vertex_map[graph_map.vertex(v).0].inverse())
            .collect::<Result<Vec<_>, _>>()?;
        let edge_sign = (0..h.edge_pair_count())
            .map(|p| self.edge_sign(graph_map.edge(EdgeId(2 * p))))
            .collect();
        // δ_{H⁻¹}(e′) = H⁻¹(δ_H(e))⁻¹ for e = ρ⁻¹(e′)
        let correction = h
            .oriented_edges()
            .map(|ep| {
                let e = graph_map.edge(ep);
                let v = self.source.graph().terminal(e);
                vertex_map[self.graph_map.vertex(v).0]
                    .apply(&self.correction[e.0])
                    .inverse()
            })
            .collect::<Vec<_>>();
        GogMorphism::new(
            self.target.clone(),
            self.source.clone(),
            graph_map,
            vertex_map,
            edge_sign,
            correction,
        )
    }

    /// `H_*^t(W)`; negative exponents go through the inverse.
    pub fn iterate(&self, t: i64, w: &PathWord) -> Result<PathWord, MorphismError> {
        if t < 0 {
            return self.invert()?.iterate(-t, w);
        }
        let mut out = self.source.reduce(w)?;
        for _ in 0..t {
            out = self.apply(&out)?;
        }
        Ok(out)
    }
}

pub use crate::marking::change_base_point;

/// Iterated product `φ^{(s,t)}(g) = φ^s(g)·φ^{s+1}(g)·…·φ^{t−1}(g)`; `φ^{(t)}` is the
/// case `s = 0`.
pub fn iterated_product(
    phi: &BasisMap,
    g: &FreeWord,
    s: i64,
    t: i64,
) -> Result<FreeWord, WordError> {
    assert!(s < t, "iterated_product requires s < t");
    let mut cur = apply_power(phi, g, s)?;
    let mut out = cur.clone();
    for _ in s + 1..t {
        cur = phi.apply(&cur);
        out = out.concat(&cur);
    }
    Ok(out)
}

/// `φ^k(g)` for any integer `k`.
pub fn apply_power(phi: &BasisMap, g: &FreeWord, k: i64) -> Result<FreeWord, WordError> {
    let map = if k < 0 { phi.inverse()? } else { phi.clone() };
    let mut out = g.clone();
    for _ in 0..k.unsigned_abs() {
        out = map.apply(&out);
    }
    Ok(out)
}

/// Changes the edge monomorphism of `e` to `ad_g ∘ f_e` and returns the new graph of
/// groups with the canonical isomorphism onto it (identity everywhere, `δ(e) = g⁻¹`).
pub fn move_edge_monomorphism(
    gog: &GraphOfGroups,
    e: EdgeId,
    g: &FreeWord,
) -> Result<(GraphOfGroups, GogMorphism), MorphismError> {
    let v = gog.graph().terminal(e);
    if let Some(top) = g.max_gen() {
        if top >= gog.vertex_basis(v).rank() {
            return Err(MorphismError::WrongVertexGroup(format!(
                "correction for edge {}",
                gog.graph().edge_name(e)
            )));
        }
    }
    let mut target = gog.clone();
    if gog.edge_group(e) == EdgeGroup::Cyclic {
        let u = gog.edge_image(e).unwrap().conjugated_by(g);
        target = gog.with_edge_image(e, u);
    }
    let mut h = GogMorphism::identity(gog);
    h.target = target.clone();
    h.correction[e.0] = g.inverse();
    debug_assert!(h.validate().is_empty());
    Ok((target, h))
}

/// Conjugates `H` through the canonical isomorphism of [`move_edge_monomorphism`]:
/// only `δ(e)` changes, to `H_{τ(e)}(g)·δ_H(e)·g⁻¹`. Source and target become the
/// modified graph of groups.
pub fn conjugate_by_move(
    h: &GogMorphism,
    e: EdgeId,
    g: &FreeWord,
) -> Result<GogMorphism, MorphismError> {
    let (target, _) = move_edge_monomorphism(&h.source, e, g)?;
    let v = h.source.graph().terminal(e);
    let mut out = h.clone();
    out.source = target.clone();
    out.target = target;
    out.correction[e.0] = h.vertex_map[v.0]
        .apply(g)
        .concat(&h.correction[e.0])
        .concat(&g.inverse());
    Ok(out)
}

/// Replaces `H_v` by `ad_g ∘ H_v` and each `δ(e)` with `τ(e) = v` by `g·δ(e)`; the
/// induced outer automorphism is unchanged.
pub fn slide_inner_at_vertex(
    h: &GogMorphism,
    v: VertexId,
    g: &FreeWord,
) -> Result<GogMorphism, MorphismError> {
    let iv = h.graph_map.vertex(v);
    if let Some(top) = g.max_gen() {
        if top >= h.target.vertex_basis(iv).rank() {
            return Err(MorphismError::WrongVertexGroup("inner slide".into()));
        }
    }
    let mut out = h.clone();
    let basis = h.target.vertex_basis(iv).clone();
    let ad_g = BasisMap::new(
        basis.clone(),
        basis,
        (0..h.target.vertex_basis(iv).rank())
            .map(|k| FreeWord::generator(k).conjugated_by(g))
            .collect(),
    )?;
    out.vertex_map[v.0] = h.vertex_map[v.0].then(&ad_g)?;
    for e in h.source.graph().oriented_edges() {
        if h.target.graph().terminal(h.graph_map.edge(e)) == iv {
            out.correction[e.0] = g.concat(&out.correction[e.0]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::gog::PathWord;

    #[test]
    fn identity_morphism_is_valid() {
        let a = fixtures::fixture_a();
        let h = GogMorphism::identity(a.gog());
        assert!(h.validate().is_empty());
    }

    #[test]
    fn fixture_a_twist_validates_and_perturbation_fails() {
        let a = fixtures::fixture_a();
        let h = a.as_morphism();
        assert!(h.validate().is_empty());

        // on the free-loop fixture a perturbed correction term is a real violation
        let p = fixtures::fixture_free_loop();
        let gog = p.gog();
        let e = gog.graph().edge("e").unwrap();
        let mut bad = p.as_morphism();
        assert!(bad.validate().is_empty());
        bad.correction[e.0] = gog
            .vertex_basis(gog.graph().terminal(e))
            .parse_word("y")
            .unwrap();
        assert_eq!(bad.validate().len(), 1);
    }

    #[test]
    fn fixture_b_stable_letter_image() {
        let b = fixtures::fixture_b();
        let h = b.assemble().unwrap();
        let gog = b.top_gog();
        let e = gog.graph().edge("E").unwrap();
        let img = h.apply(&PathWord::stable_letter(gog.graph(), e)).unwrap();
        assert_eq!(img.to_text(gog), "t[E]·B");
    }

    #[test]
    fn compose_invert_iterate() {
        let b = fixtures::fixture_b();
        let h = b.assemble().unwrap();
        let gog = b.top_gog();
        let hh = h.then(&h).unwrap();
        let words = ["t[E]", "a·t[E]·b", "T[E]·ba·t[E]·ab"];
        for text in words {
            let w = PathWord::parse(gog, text).unwrap();
            let via_compose = hh.apply(&w).unwrap();
            let via_iterate = h.iterate(2, &w).unwrap();
            assert!(gog.equal_in_path_group(&via_compose, &via_iterate).unwrap());
        }
        let inv = h.invert().unwrap();
        for text in words {
            let w = PathWord::parse(gog, text).unwrap();
            let back = inv.apply(&h.apply(&w).unwrap()).unwrap();
            assert!(gog.equal_in_path_group(&back, &w).unwrap());
        }
    }

    #[test]
    fn iterated_product_example() {
        let a = fixtures::fixture_a();
        let phi = a.marking_automorphism().unwrap();
        let basis = phi.source().clone();
        let b = basis.parse_word("b").unwrap();
        let p = iterated_product(&phi, &b, 0, 3).unwrap();
        assert_eq!(basis.render_word(&p), "bbabaa");
        // cocycle φ^{(s,t)} = φ^{(s,r)}·φ^{(r,t)}
        let left = iterated_product(&phi, &b, 0, 5).unwrap();
        let right = iterated_product(&phi, &b, 0, 2)
            .unwrap()
            .concat(&iterated_product(&phi, &b, 2, 5).unwrap());
        assert_eq!(left, right);
        // t = s+1 gives φ^s(g)
        assert_eq!(
            iterated_product(&phi, &b, 3, 4).unwrap(),
            apply_power(&phi, &b, 3).unwrap()
        );
        // identity map gives g^{t−s}
        let id = basis.identity_map();
        assert_eq!(iterated_product(&id, &b, 1, 4).unwrap(), b.pow(3));
    }
}
