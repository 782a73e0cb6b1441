//! Identification of the fundamental group of a graph of groups with a standard free
//! group, through a spanning tree and a base vertex.
//!
//! The marking basis consists of every vertex-group generator plus one letter per
//! non-tree edge pair (the edge's marking letter). Stable letters of tree edges are
//! sent to 1; the conversion is exact on words built from basis letters, and the rank
//! is `1 − |V| + |E⁺| + Σ rank(G_v)`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::gog::{EdgeId, GogError, GraphOfGroups, PathWord, VertexId};
use crate::morphism::{GogMorphism, MorphismError};
use crate::words::{Basis, BasisMap, FreeWord, Letter, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MarkingError {
    #[error("edge set is not a spanning tree")]
    NotSpanning,
    #[error("non-tree edge {0:?} has no marking letter")]
    MissingLetter(String),
    #[error("word is not closed at the base vertex")]
    NotBased,
    #[error("gog error: {0}")]
    Gog(#[from] GogError),
    #[error("word error: {0}")]
    Word(#[from] WordError),
    #[error("morphism error: {0}")]
    Morphism(#[from] MorphismError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum MarkLetter {
    VertexGen { vertex: VertexId, gen: usize },
    EdgeLetter { edge: EdgeId },
}

/// A marking `π₁(G, base) ≅ F_N` (formal: relations of cyclic edge groups along the
/// tree are not imposed; lengths measured here live in a free group containing the
/// fundamental group's image, which is all the growth computations need).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marking {
    base: VertexId,
    tree: Vec<bool>, // per edge pair
    basis: Basis,
    letters: Vec<MarkLetter>,
    gen_index: BTreeMap<(usize, usize), usize>, // (vertex, gen) -> basis index
    edge_index: BTreeMap<usize, usize>,         // edge pair -> basis index
    tree_path: Vec<Vec<EdgeId>>,                // base → v through the tree
}

impl Marking {
    /// Marking along the given spanning tree (edge pair indices).
    pub fn new(
        gog: &GraphOfGroups,
        base: VertexId,
        tree_pairs: &[usize],
    ) -> Result<Marking, MarkingError> {
        let g = gog.graph();
        let np = g.edge_pair_count();
        let mut tree = vec![false; np];
        for &p in tree_pairs {
            if p >= np {
                return Err(MarkingError::NotSpanning);
            }
            tree[p] = true;
        }
        // build tree paths by BFS over tree edges
        let mut tree_path: Vec<Option<Vec<EdgeId>>> = vec![None; g.vertex_count()];
        tree_path[base.0] = Some(Vec::new());
        let mut queue = std::collections::VecDeque::from([base]);
        while let Some(v) = queue.pop_front() {
            for e in g.oriented_edges() {
                if tree[e.pair()] && g.initial(e) == v && tree_path[g.terminal(e).0].is_none() {
                    let mut p = tree_path[v.0].clone().unwrap();
                    p.push(e);
                    tree_path[g.terminal(e).0] = Some(p);
                    queue.push_back(g.terminal(e));
                }
            }
        }
        if tree_path.iter().any(|p| p.is_none()) || tree_pairs.len() != g.vertex_count() - 1 {
            return Err(MarkingError::NotSpanning);
        }
        let tree_path: Vec<Vec<EdgeId>> = tree_path.into_iter().map(|p| p.unwrap()).collect();

        let mut names: Vec<char> = Vec::new();
        let mut weights = Vec::new();
        let mut letters = Vec::new();
        let mut gen_index = BTreeMap::new();
        let mut edge_index = BTreeMap::new();
        for v in g.vertices() {
            let b = gog.vertex_basis(v);
            for k in 0..b.rank() {
                gen_index.insert((v.0, k), names.len());
                names.push(b.name(k));
                weights.push(b.weight(k));
                letters.push(MarkLetter::VertexGen { vertex: v, gen: k });
            }
        }
        for p in 0..np {
            if tree[p] {
                continue;
            }
            let e = EdgeId(2 * p);
            let c = g
                .edge_letter(e)
                .ok_or_else(|| MarkingError::MissingLetter(g.edge_name(e).to_string()))?;
            edge_index.insert(p, names.len());
            names.push(c);
            weights.push(crate::words::Rational::from_integer(1));
            letters.push(MarkLetter::EdgeLetter { edge: e });
        }
        let basis = Basis::from_parts(&names, &weights).map_err(MarkingError::Word)?;
        Ok(Marking {
            base,
            tree,
            basis,
            letters,
            gen_index,
            edge_index,
            tree_path,
        })
    }

    /// Canonical marking: BFS spanning tree over edge pairs in id order.
    pub fn canonical(gog: &GraphOfGroups, base: VertexId) -> Result<Marking, MarkingError> {
        let g = gog.graph();
        let mut in_tree = Vec::new();
        let mut seen = vec![false; g.vertex_count()];
        seen[base.0] = true;
        let mut queue = std::collections::VecDeque::from([base]);
        while let Some(v) = queue.pop_front() {
            for e in g.oriented_edges() {
                if g.initial(e) == v && !seen[g.terminal(e).0] {
                    seen[g.terminal(e).0] = true;
                    in_tree.push(e.pair());
                    queue.push_back(g.terminal(e));
                }
            }
        }
        Marking::new(gog, base, &in_tree)
    }

    pub fn base(&self) -> VertexId {
        self.base
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    pub fn is_tree_edge(&self, e: EdgeId) -> bool {
        self.tree[e.pair()]
    }

    fn vertex_letter(&self, v: VertexId, l: Letter) -> Letter {
        let idx = self.gen_index[&(v.0, l.gen())];
        Letter::new(idx, l.is_inverse())
    }

    /// Converts a closed connected word at the base vertex to a free word: vertex-group
    /// letters map to their basis letters, non-tree stable letters to edge letters,
    /// tree stable letters to 1.
    pub fn to_basis(&self, gog: &GraphOfGroups, w: &PathWord) -> Result<FreeWord, MarkingError> {
        gog.check_connected(w)?;
        if !w.is_closed() || w.issue_vertex() != self.base {
            return Err(MarkingError::NotBased);
        }
        let mut letters = Vec::new();
        for &l in w.head().word.letters() {
            letters.push(self.vertex_letter(w.head().vertex, l));
        }
        for (e, s) in w.tail() {
            if !self.tree[e.pair()] {
                let idx = self.edge_index[&e.pair()];
                letters.push(Letter::new(idx, !e.is_forward()));
            }
            for &l in s.word.letters() {
                letters.push(self.vertex_letter(s.vertex, l));
            }
        }
        Ok(FreeWord::from_letters(letters))
    }

    /// Converts a free word over the marking basis to a closed connected word at the
    /// base vertex (reduced). Inverse to [`Marking::to_basis`] on basis words.
    pub fn from_basis(&self, gog: &GraphOfGroups, w: &FreeWord) -> Result<PathWord, MarkingError> {
        let mut out = gog.identity_word(self.base);
        for &l in w.letters() {
            let piece = match &self.letters[l.gen()] {
                MarkLetter::VertexGen { vertex, gen } => {
                    let g = FreeWord::from_letters([Letter::new(*gen, l.is_inverse())]);
                    let elem = PathWord::vertex_element(*vertex, g);
                    let p = self.tree_path_word(gog, *vertex);
                    gog.compose(&gog.compose(&p, &elem)?, &p.inverse())?
                }
                MarkLetter::EdgeLetter { edge } => {
                    let e = if l.is_inverse() { edge.bar() } else { *edge };
                    let t = PathWord::stable_letter(gog.graph(), e);
                    let pin = self.tree_path_word(gog, gog.graph().initial(e));
                    let pout = self.tree_path_word(gog, gog.graph().terminal(e));
                    gog.compose(&gog.compose(&pin, &t)?, &pout.inverse())?
                }
            };
            out = gog.compose(&out, &piece)?;
        }
        Ok(out)
    }

    fn tree_path_word(&self, gog: &GraphOfGroups, v: VertexId) -> PathWord {
        let mut w = gog.identity_word(self.base);
        for &e in &self.tree_path[v.0] {
            let t = PathWord::stable_letter(gog.graph(), e);
            w = gog.compose(&w, &t).expect("tree path is connected");
        }
        w
    }

    /// Path word from the base vertex to `v` through the spanning tree.
    pub fn tree_path_to(&self, gog: &GraphOfGroups, v: VertexId) -> PathWord {
        self.tree_path_word(gog, v)
    }

    /// The automorphism of the marking basis induced by a morphism whose graph map
    /// fixes the base vertex. Images are read off the canonical form, so the result
    /// is independent of the representative produced by `apply`.
    pub fn induced_automorphism(
        &self,
        gog: &GraphOfGroups,
        h: &GogMorphism,
    ) -> Result<BasisMap, MarkingError> {
        let mut images = Vec::with_capacity(self.rank());
        for i in 0..self.rank() {
            let gen = FreeWord::from_letters([Letter::new(i, false)]);
            let w = self.from_basis(gog, &gen)?;
            let img = gog.canonical_form(&h.apply(&w)?)?;
            images.push(self.to_basis(gog, &img)?);
        }
        Ok(BasisMap::automorphism(self.basis.clone(), images)?)
    }
}

/// Base-point change for an automorphism fixing `v` and `v′`: returns
/// `H_{*v′,U} = ad_{U⁻¹·H_*(U)} ∘ H_{*v′}` expressed on the canonical marking at `v′`,
/// which satisfies `H_{*v′,U} = θ_U⁻¹ ∘ H_{*v} ∘ θ_U` for `θ_U(W) = U·W·U⁻¹`.
pub fn change_base_point(
    h: &GogMorphism,
    v: VertexId,
    v_prime: VertexId,
    u: &PathWord,
) -> Result<BasisMap, MarkingError> {
    let gog = h.source();
    gog.check_connected(u)?;
    if u.issue_vertex() != v || u.terminal_vertex() != v_prime {
        return Err(MarkingError::Gog(GogError::Disconnected(
            "base-point change word must run from v to v'".into(),
        )));
    }
    let m = Marking::canonical(gog, v_prime)?;
    let hu = h.apply(u)?;
    let c = gog.compose(&u.inverse(), &hu)?; // U⁻¹·H_*(U), closed at v′
    let mut images = Vec::with_capacity(m.rank());
    for i in 0..m.rank() {
        let gen = FreeWord::from_letters([Letter::new(i, false)]);
        let w = m.from_basis(gog, &gen)?;
        let img = h.apply(&w)?;
        let conj = gog.compose(&gog.compose(&c, &img)?, &c.inverse())?;
        images.push(m.to_basis(gog, &gog.canonical_form(&conj)?)?);
    }
    Ok(BasisMap::automorphism(m.basis().clone(), images)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fixture_b_marking_rank_and_basis() {
        let b = fixtures::fixture_b();
        let gog = b.top_gog();
        let m = Marking::canonical(gog, gog.graph().vertex("V").unwrap()).unwrap();
        assert_eq!(m.rank(), 3);
        assert_eq!(m.basis().names(), &['a', 'b', 'c']);
    }

    #[test]
    fn round_trip_on_random_words() {
        use rand::{Rng, SeedableRng};
        let b = fixtures::fixture_b();
        let gog = b.top_gog();
        let m = Marking::canonical(gog, gog.graph().vertex("V").unwrap()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let len = rng.gen_range(0..12);
            let letters: Vec<Letter> = (0..len)
                .map(|_| Letter::new(rng.gen_range(0..3), rng.gen_bool(0.5)))
                .collect();
            let w = FreeWord::from_letters(letters);
            let back = m.to_basis(gog, &m.from_basis(gog, &w).unwrap()).unwrap();
            assert_eq!(back, w);
        }
    }

    #[test]
    fn tree_edge_maps_through_basis() {
        // two-vertex fixture: the tree stable letter disappears, conjugation survives
        let d = fixtures::fixture_two_vertex();
        let gog = d.gog();
        let m = Marking::canonical(gog, gog.graph().vertex("v").unwrap()).unwrap();
        assert_eq!(m.rank(), 2);
        let e = gog.graph().edge("d").unwrap();
        assert!(m.is_tree_edge(e));
        // x conjugated through the tree into the base: t_d·x·t_d⁻¹ ↦ letter of x
        let w = PathWord::parse(gog, "t[d]·x·T[d]").unwrap();
        let img = m.to_basis(gog, &w).unwrap();
        assert_eq!(m.basis().render_word(&img), "x");
    }

    #[test]
    fn fixture_a_induced_automorphism() {
        let a = fixtures::fixture_a();
        let phi = a.marking_automorphism().unwrap();
        let basis = phi.source();
        assert_eq!(basis.render_word(&phi.images()[0]), "a");
        assert_eq!(basis.render_word(&phi.images()[1]), "ba");
    }

    #[test]
    fn change_base_point_identities() {
        use crate::gog::PathWord;
        let d = fixtures::fixture_two_vertex();
        let gog = d.gog();
        let h = d.as_morphism();
        let v = gog.graph().vertex("v").unwrap();
        let w = gog.graph().vertex("w").unwrap();

        // v = v′ with U = 1_v reproduces the marking automorphism at v
        let one = gog.identity_word(v);
        let same = change_base_point(&h, v, v, &one).unwrap();
        let direct = Marking::canonical(gog, v)
            .unwrap()
            .induced_automorphism(gog, &h)
            .unwrap();
        assert_eq!(same.images(), direct.images());

        // U a single stable letter: the defining identity θ_U⁻¹ H_{*v} θ_U holds on
        // every generator of the marking at w
        let u = PathWord::parse(gog, "t[d]").unwrap();
        let moved = change_base_point(&h, v, w, &u).unwrap();
        let m_w = Marking::canonical(gog, w).unwrap();
        for i in 0..m_w.rank() {
            let gen = FreeWord::from_letters([Letter::new(i, false)]);
            let word = m_w.from_basis(gog, &gen).unwrap();
            // θ_U(word) = U·word·U⁻¹, apply H at v, conjugate back
            let theta = gog.compose(&gog.compose(&u, &word).unwrap(), &u.inverse()).unwrap();
            let h_theta = h.apply(&theta).unwrap();
            let back = gog
                .compose(&gog.compose(&u.inverse(), &h_theta).unwrap(), &u)
                .unwrap();
            let expect = m_w.to_basis(gog, &gog.canonical_form(&back).unwrap()).unwrap();
            assert_eq!(moved.images()[i], expect, "generator {i}");
        }

        // round trip with U then U⁻¹ lands back at the original automorphism
        let back = change_base_point(&h, w, v, &u.inverse()).unwrap();
        let id_v = change_base_point(&h, v, v, &one).unwrap();
        // both express automorphisms at v; transporting twice is inner-trivial here
        assert_eq!(back.images(), id_v.images());
    }
}
