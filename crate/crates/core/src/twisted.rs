//! Twisted conjugacy: `g ≃_Φ g′` when `g′ = h⁻¹·g·Φ(h)` in a free group, and its
//! base-point-free form for closed connected words, `W′ = U⁻¹·W·H_*(U)`.
//!
//! Reduction of a closed word under this equivalence works by rotation: conjugating
//! `W = w₀ t₁ w₁ … t_q w_q` by its own prefix `U = w₀t₁` gives
//!
//! ```text
//! U⁻¹·W·H_*(U)  =  w₁ t₂ … t_q [w_q · H(w₀) · δ(ē₁)] t₁ [δ(e₁)⁻¹]
//! ```
//!
//! so the wrap element at the far end is `w_q·H(w₀)·δ(ē₁)`; when `e_q = ē₁` and the
//! wrap lies in the edge image, the pinch removes two stable letters. Since the
//! conjugating word contributes a path and its reverse, and pinches only ever delete
//! backtracks, the cyclically reduced edge loop underlying `W` is an invariant of the
//! class: a representative whose loop is already cyclically reduced is provably
//! reduced, which is what the `certified` flag records. Pinch eligibility at a given
//! junction is itself invariant under vertex-group conjugators (they cancel out of the
//! wrap), so the rotation scan below is exhaustive for the twist morphisms used here.

use thiserror::Error;

use crate::dehn::DehnTwist;
use crate::gog::{GogError, GraphOfGroups, PathWord, VertexId};
use crate::morphism::{GogMorphism, MorphismError};
use crate::words::{weighted_length, Basis, BasisMap, FreeWord, Letter, Rational, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TwistedError {
    #[error("word must be closed and connected")]
    NotClosedConnected,
    #[error("word is issued at {got:?} but the conjugator starts at {want:?}")]
    VertexMismatch { got: String, want: String },
    #[error("morphism must fix the underlying graph pointwise")]
    MovingGraph,
    #[error("gog error: {0}")]
    Gog(#[from] GogError),
    #[error("morphism error: {0}")]
    Morphism(#[from] MorphismError),
    #[error("word error: {0}")]
    Word(#[from] WordError),
}

/// A twisted-conjugacy class representative produced by [`h_reduce`].
#[derive(Clone, Debug)]
pub struct TwistedClassRep {
    /// The reduced representative.
    pub word: PathWord,
    /// Witness with `word = conjugator⁻¹ · input · H_*(conjugator)`.
    pub conjugator: PathWord,
    /// Vertex at which the representative is issued.
    pub base_vertex: VertexId,
    /// True when the representative is provably reduced (its underlying loop is
    /// cyclically reduced as an edge path). Otherwise the result is best-found.
    pub certified: bool,
}

/// Searches for `h` with `g′ = h⁻¹·g·φ(h)` over all words of length ≤ `radius`.
/// `None` means no witness within the radius, not a proof of non-conjugacy.
pub fn phi_conjugate_witness(
    phi: &BasisMap,
    g: &FreeWord,
    g_prime: &FreeWord,
    radius: usize,
) -> Option<FreeWord> {
    let rank = phi.source().rank();
    let mut frontier = vec![FreeWord::identity()];
    for _ in 0..=radius {
        for h in &frontier {
            let cand = h.inverse().concat(g).concat(&phi.apply(h));
            if cand == *g_prime {
                return Some(h.clone());
            }
        }
        let mut next = Vec::new();
        for h in &frontier {
            for gen in 0..rank {
                for inv in [false, true] {
                    let l = FreeWord::from_letters([Letter::new(gen, inv)]);
                    let ext = h.concat(&l);
                    if ext.len() > h.len() {
                        next.push(ext);
                    }
                }
            }
        }
        frontier = next;
    }
    None
}

/// `U⁻¹ · W · H_*(U)`, reduced; `W` closed at the initial vertex of `U`, the result is
/// issued at the terminal vertex of `U`.
pub fn h_conjugate(
    w: &PathWord,
    u: &PathWord,
    h: &GogMorphism,
) -> Result<PathWord, TwistedError> {
    let gog = h.source();
    gog.check_connected(w)?;
    gog.check_connected(u)?;
    if !w.is_closed() {
        return Err(TwistedError::NotClosedConnected);
    }
    if w.issue_vertex() != u.issue_vertex() {
        return Err(TwistedError::VertexMismatch {
            got: gog.graph().vertex_name(w.issue_vertex()).to_string(),
            want: gog.graph().vertex_name(u.issue_vertex()).to_string(),
        });
    }
    let hu = h.apply(u)?;
    Ok(gog.compose(&gog.compose(&u.inverse(), w)?, &hu)?)
}

fn require_graph_fixed(h: &GogMorphism) -> Result<(), TwistedError> {
    if h.graph_map().is_identity() {
        Ok(())
    } else {
        Err(TwistedError::MovingGraph)
    }
}

/// Is the underlying edge loop cyclically reduced (no backtrack, including the wrap)?
fn loop_cyclically_reduced(w: &PathWord) -> bool {
    let edges: Vec<_> = w.edges().collect();
    let q = edges.len();
    if q == 0 {
        return true;
    }
    for i in 0..q {
        if edges[(i + 1) % q] == edges[i].bar() {
            return false;
        }
    }
    true
}

/// One rotation step: conjugate by the prefix `w₀t₁`. Returns the rotated word and
/// the prefix used.
fn rotate_once(
    gog: &GraphOfGroups,
    h: &GogMorphism,
    w: &PathWord,
) -> Result<(PathWord, PathWord), TwistedError> {
    debug_assert!(w.path_length() >= 1);
    let (e1, _) = w.tail()[0];
    let prefix = gog.compose(
        &PathWord::vertex_element(w.issue_vertex(), w.head().word.clone()),
        &PathWord::stable_letter(gog.graph(), e1),
    )?;
    let rotated = h_conjugate(w, &prefix, h)?;
    Ok((rotated, prefix))
}

/// Reduces a closed connected word under H-conjugation by iterated rotations and
/// pinches. `step_budget` bounds the total number of rotation steps.
pub fn h_reduce_with_budget(
    w: &PathWord,
    h: &GogMorphism,
    step_budget: usize,
) -> Result<TwistedClassRep, TwistedError> {
    require_graph_fixed(h)?;
    let gog = h.source();
    gog.check_connected(w)?;
    if !w.is_closed() {
        return Err(TwistedError::NotClosedConnected);
    }
    let mut current = gog.reduce(w)?;
    let mut conj = gog.identity_word(w.issue_vertex());
    let mut steps = 0usize;
    'outer: loop {
        let q = current.path_length();
        if q == 0 {
            break;
        }
        // scan one full cycle of rotations for a length drop
        let mut probe = current.clone();
        let mut probe_conj = gog.identity_word(current.issue_vertex());
        for _ in 0..q {
            if steps >= step_budget {
                break 'outer;
            }
            steps += 1;
            let (rotated, prefix) = rotate_once(gog, h, &probe)?;
            probe_conj = gog.compose(&probe_conj, &prefix)?;
            if rotated.path_length() < q {
                current = rotated;
                conj = gog.compose(&conj, &probe_conj)?;
                continue 'outer;
            }
            probe = rotated;
        }
        // no pinch anywhere around the cycle
        break;
    }
    let base_vertex = current.issue_vertex();
    let certified = loop_cyclically_reduced(&current);
    Ok(TwistedClassRep {
        word: current,
        conjugator: conj,
        base_vertex,
        certified,
    })
}

/// Default step budget: `2·(path length + total syllable length) + 8`.
pub fn default_radius(w: &PathWord) -> usize {
    let syl: usize = w.syllables().map(|s| s.word.len()).sum();
    2 * (w.path_length() + syl) + 8
}

pub fn h_reduce(
    w: &PathWord,
    h: &GogMorphism,
    search_radius: usize,
) -> Result<TwistedClassRep, TwistedError> {
    h_reduce_with_budget(w, h, search_radius.max(default_radius(w)))
}

/// If the class of `w` contains a word of path length 0, returns the vertex at which
/// that representative is issued. The vertex belongs to the class, not to `w` alone;
/// distinct classes can reach length 0 at distinct vertices, and trivial-loop
/// representatives at distinct vertices may still be conjugate at the Π(G) level, so
/// the returned vertex is the one found by the search.
pub fn is_h_zero(
    w: &PathWord,
    h: &GogMorphism,
    search_radius: usize,
) -> Result<Option<VertexId>, TwistedError> {
    let rep = h_reduce(w, h, search_radius)?;
    Ok((rep.word.path_length() == 0).then_some(rep.base_vertex))
}

/// Bounded search for a twisted-conjugacy witness between two closed connected words:
/// returns `U` with `w2 = U⁻¹·w1·H_*(U)`, searching rotations of the reduced
/// representative and vertex-group conjugators. A `None` is conclusive only when both
/// representatives are certified and their loops differ up to rotation.
pub fn twisted_path_witness(
    w1: &PathWord,
    w2: &PathWord,
    h: &GogMorphism,
    radius: usize,
) -> Result<Option<PathWord>, TwistedError> {
    let gog = h.source();
    let r1 = h_reduce(w1, h, radius)?;
    let r2 = h_reduce(w2, h, radius)?;
    if r1.word.path_length() != r2.word.path_length() {
        return Ok(None);
    }
    let target = &r2.word;
    if r1.word.path_length() == 0 {
        // vertex-group level: twisted conjugacy via the vertex automorphism
        if r1.base_vertex != r2.base_vertex {
            return Ok(None);
        }
        let v = r1.base_vertex;
        let phi = h.vertex_map(v);
        if let Some(u) = phi_conjugate_witness(phi, &r1.word.head().word, &target.head().word, radius)
        {
            let u = PathWord::vertex_element(v, u);
            let total = gog.compose(&gog.compose(&r1.conjugator, &u)?, &r2.conjugator.inverse())?;
            debug_assert!(gog.equal_in_path_group(&h_conjugate(w1, &total, h)?, w2)?);
            return Ok(Some(total));
        }
        return Ok(None);
    }
    // positive path length: try rotations of r1 and solve for a vertex conjugator
    let mut probe = r1.word.clone();
    let mut probe_conj = gog.identity_word(r1.word.issue_vertex());
    let q = r1.word.path_length();
    let cycles = radius.max(1);
    for _ in 0..q * cycles {
        if probe.edges().collect::<Vec<_>>() == target.edges().collect::<Vec<_>>() {
            // W2 = u⁻¹·probe·H(u) with u ∈ G_v pinned by the heads up to the coset of
            // the first edge image: u ∈ w₀(probe)·f_{ē₁}(G)·w₀(target)⁻¹
            let e1 = target.tail()[0].0;
            let k_range = match gog.edge_group(e1) {
                crate::gog::EdgeGroup::Trivial => 0i64,
                crate::gog::EdgeGroup::Cyclic => radius as i64,
            };
            for k in -k_range..=k_range {
                let u_word = probe
                    .head()
                    .word
                    .concat(&gog.edge_image_pow(e1.bar(), k))
                    .concat(&target.head().word.inverse());
                let u = PathWord::vertex_element(probe.issue_vertex(), u_word);
                let cand = h_conjugate(&probe, &u, h)?;
                if gog.equal_in_path_group(&cand, target)? {
                    let total = gog.compose(
                        &gog.compose(&r1.conjugator, &gog.compose(&probe_conj, &u)?)?,
                        &r2.conjugator.inverse(),
                    )?;
                    debug_assert!(gog.equal_in_path_group(&h_conjugate(w1, &total, h)?, w2)?);
                    return Ok(Some(total));
                }
            }
        }
        let (rotated, prefix) = rotate_once(gog, h, &probe)?;
        probe_conj = gog.compose(&probe_conj, &prefix)?;
        probe = rotated;
    }
    Ok(None)
}

/// The D-length of the twisted conjugacy class of `w`: half the sum, over the loop of
/// the reduced representative, of the weighted cyclic lengths of the twistors.
pub fn d_length(
    w: &PathWord,
    twist: &DehnTwist,
    weights: &Basis,
) -> Result<Rational, TwistedError> {
    let h = twist.as_morphism();
    let rep = h_reduce(w, &h, default_radius(w))?;
    let mut sum = Rational::from_integer(0);
    for e in rep.word.edges() {
        let z = twist.twistor_image(e);
        let (core, _) = crate::words::cyclic_reduce(&resolve_in(&z, twist.gog(), e, weights)?);
        sum += weighted_length(&core, weights);
    }
    Ok(sum / Rational::from_integer(2))
}

/// Re-expresses a vertex-group element in a weight basis by letter names.
fn resolve_in(
    w: &FreeWord,
    gog: &GraphOfGroups,
    e: crate::gog::EdgeId,
    weights: &Basis,
) -> Result<FreeWord, TwistedError> {
    let vb = gog.vertex_basis(gog.graph().terminal(e));
    let letters = w
        .letters()
        .iter()
        .map(|l| {
            weights
                .index_of(vb.name(l.gen()))
                .map(|idx| Letter::new(idx, l.is_inverse()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FreeWord::from_letters(letters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::words::Basis;

    #[test]
    fn phi_conjugacy_examples() {
        let basis = Basis::new(&['a', 'b']).unwrap();
        let phi = BasisMap::automorphism(
            basis.clone(),
            vec![basis.parse_word("a").unwrap(), basis.parse_word("ba").unwrap()],
        )
        .unwrap();
        let g = basis.parse_word("b").unwrap();
        // g′ = g has the trivial witness
        assert_eq!(
            phi_conjugate_witness(&phi, &g, &g, 2),
            Some(FreeWord::identity())
        );
        // b ≃_φ ba via h = b: B·b·φ(b) = ba
        let ba = basis.parse_word("ba").unwrap();
        let h = phi_conjugate_witness(&phi, &g, &ba, 2).unwrap();
        assert_eq!(h.inverse().concat(&g).concat(&phi.apply(&h)), ba);
        // identity twist reduces to ordinary conjugacy
        let id = basis.identity_map();
        let u = basis.parse_word("ab").unwrap();
        let w = basis.parse_word("ba").unwrap();
        let h = phi_conjugate_witness(&id, &u, &w, 2).unwrap();
        assert_eq!(h.inverse().concat(&u).concat(&h), w);
    }

    #[test]
    fn twisted_equivalence_and_inverse_relation() {
        use rand::{Rng, SeedableRng};
        let basis = Basis::new(&['a', 'b']).unwrap();
        let phi = BasisMap::automorphism(
            basis.clone(),
            vec![basis.parse_word("a").unwrap(), basis.parse_word("ba").unwrap()],
        )
        .unwrap();
        let phi_inv = phi.inverse().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let len = rng.gen_range(0..4);
            let g = FreeWord::from_letters(
                (0..len).map(|_| Letter::new(rng.gen_range(0..2), rng.gen_bool(0.5))),
            );
            let h1 = FreeWord::from_letters(
                (0..rng.gen_range(0..3)).map(|_| Letter::new(rng.gen_range(0..2), rng.gen_bool(0.5))),
            );
            let h2 = FreeWord::from_letters(
                (0..rng.gen_range(0..3)).map(|_| Letter::new(rng.gen_range(0..2), rng.gen_bool(0.5))),
            );
            // transitivity of witnesses
            let g1 = h1.inverse().concat(&g).concat(&phi.apply(&h1));
            let g2 = h2.inverse().concat(&g1).concat(&phi.apply(&h2));
            let h12 = h1.concat(&h2);
            assert_eq!(h12.inverse().concat(&g).concat(&phi.apply(&h12)), g2);
            // g ≃_Φ g1 iff g⁻¹ ≃_{Φ⁻¹} g1⁻¹, witness φ(h)
            let witness = phi.apply(&h1);
            assert_eq!(
                witness
                    .inverse()
                    .concat(&g.inverse())
                    .concat(&phi_inv.apply(&witness)),
                g1.inverse()
            );
        }
    }

    #[test]
    fn h_reduce_round_trip() {
        let a = fixtures::fixture_a();
        let gog = a.gog();
        let h = a.as_morphism();
        // the stable letter is reduced at length 1, certified
        let e = gog.graph().edge("e").unwrap();
        let tb = PathWord::stable_letter(gog.graph(), e);
        let rep = h_reduce(&tb, &h, 8).unwrap();
        assert_eq!(rep.word.path_length(), 1);
        assert!(rep.certified);

        // plant: conjugate and reduce back to a rotation
        let u = PathWord::parse(gog, "a·t[e]·a").unwrap();
        let moved = h_conjugate(&tb, &u, &h).unwrap();
        let rep = h_reduce(&moved, &h, 16).unwrap();
        assert_eq!(rep.word.path_length(), 1);
        assert!(rep.certified);
        let transported = h_conjugate(&moved, &rep.conjugator, &h).unwrap();
        assert!(gog.equal_in_path_group(&transported, &rep.word).unwrap());
    }

    #[test]
    fn d_length_examples() {
        let a = fixtures::fixture_a();
        let gog = a.gog();
        let e = gog.graph().edge("e").unwrap();
        let weights = Basis::new(&['a', 'b']).unwrap();
        let tb = PathWord::stable_letter(gog.graph(), e);
        assert_eq!(
            d_length(&tb, &a, &weights).unwrap(),
            Rational::new(1, 2)
        );
        // length-0 word: empty sum
        let one = gog.identity_word(gog.graph().vertex("v").unwrap());
        assert_eq!(d_length(&one, &a, &weights).unwrap(), Rational::from_integer(0));
        // inversion symmetry
        let inv = a.inverse();
        assert_eq!(
            d_length(&tb.inverse(), &inv, &weights).unwrap(),
            d_length(&tb, &a, &weights).unwrap()
        );
    }

    #[test]
    fn is_h_zero_examples() {
        let b = fixtures::fixture_b();
        let local = b.local_twist(0);
        let d_inv = local.inverse().as_morphism();
        let gog = local.gog();
        let v = gog.graph().vertex("v").unwrap();
        // 1_v is zero at v
        let one = gog.identity_word(v);
        assert_eq!(is_h_zero(&one, &d_inv, 8).unwrap(), Some(v));
        // the local loop b is not zero within the radius
        let e = gog.graph().edge("e").unwrap();
        let bword = PathWord::stable_letter(gog.graph(), e);
        assert_eq!(is_h_zero(&bword, &d_inv, 8).unwrap(), None);
    }
}
