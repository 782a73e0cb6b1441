//! Named fixtures used throughout the test suites and shipped as documents by the
//! command-line tool.
//!
//! * `fixture_a` — one vertex with group ⟨a⟩, one loop edge with cyclic edge group and
//!   images `u_e = u_ē = a`, exponents `γ(e) = 0, γ(ē) = 1`. Marking basis (a, b); the
//!   induced automorphism is `a ↦ a, b ↦ ba`.
//! * `fixture_b` — one top vertex whose local data is `fixture_a`, one top loop edge
//!   with trivial edge group and stable letter c, corrections `δ*(E) = b`,
//!   `δ*(Ē) = 1_v`. Marking basis (a, b, c); the induced automorphism is
//!   `a ↦ a, b ↦ ba, c ↦ cB`.
//! * `fixture_free_loop` — one vertex with group ⟨x, y⟩, one loop with images
//!   `u_e = x, u_ē = y`: an efficient twist whose path group is genuinely free, used
//!   by the cancellation lemmas.
//! * `fixture_two_vertex` — a two-vertex twist for base-point-change tests.

use crate::dehn::DehnTwist;
use crate::gog::{Graph, GraphOfGroups, PathWord, VertexId};
use crate::two_level::{LocalData, TwoLevelTwist};
use crate::words::Basis;

pub fn fixture_a() -> DehnTwist {
    let mut g = Graph::new(&["v"]).unwrap();
    g.add_edge("e", "v", "v", Some('b')).unwrap();
    let gog = GraphOfGroups::builder(g)
        .vertex_group("v", Basis::new(&['a']).unwrap())
        .unwrap()
        .cyclic_edge("e", "a", "a")
        .unwrap()
        .build()
        .unwrap();
    // gamma(e) = 0, gamma(ē) = 1: twistor exponent ζ(e) = 1
    DehnTwist::new(gog, vec![0, 1]).unwrap()
}

pub fn fixture_b() -> TwoLevelTwist {
    let mut g = Graph::new(&["V"]).unwrap();
    g.add_edge("E", "V", "V", Some('c')).unwrap();
    let local = LocalData::new(fixture_a(), VertexId(0)).unwrap();
    let lgog = local.twist.gog().clone();
    let e_loc = lgog.graph().edge("e").unwrap();
    let one_v = lgog.identity_word(VertexId(0));
    let delta_fwd = PathWord::stable_letter(lgog.graph(), e_loc); // the element b
    TwoLevelTwist::new(
        g,
        vec![local],
        vec![one_v.clone(), one_v.clone()],
        vec![delta_fwd, one_v],
    )
    .unwrap()
}

/// One vertex ⟨x, y⟩, one loop with `f_e(z) = x`, `f_ē(z) = y`, `ζ(e) = 1`. The path
/// group is free (the loop identifies x with a conjugate of y); the formal marking
/// basis is (x, y, s).
pub fn fixture_free_loop() -> DehnTwist {
    let mut g = Graph::new(&["v"]).unwrap();
    g.add_edge("e", "v", "v", Some('s')).unwrap();
    let gog = GraphOfGroups::builder(g)
        .vertex_group("v", Basis::new(&['x', 'y']).unwrap())
        .unwrap()
        .cyclic_edge("e", "x", "y")
        .unwrap()
        .build()
        .unwrap();
    DehnTwist::new(gog, vec![0, 1]).unwrap()
}

/// Vertices v (trivial group) and w (group ⟨x⟩), a tree edge d from v to w, and a
/// cyclic loop e at w with image x and `ζ(e) = 1`; letter y. Marking at v has basis
/// (x, y).
pub fn fixture_two_vertex() -> DehnTwist {
    let mut g = Graph::new(&["v", "w"]).unwrap();
    g.add_edge("d", "v", "w", None).unwrap();
    g.add_edge("e", "w", "w", Some('y')).unwrap();
    let gog = GraphOfGroups::builder(g)
        .vertex_group("w", Basis::new(&['x']).unwrap())
        .unwrap()
        .cyclic_edge("e", "x", "x")
        .unwrap()
        .build()
        .unwrap();
    DehnTwist::new(gog, vec![0, 0, 0, 1]).unwrap()
}

/// Two-level twist whose local graph of groups has two vertices, so re-assembly can
/// genuinely change the local base point.
pub fn fixture_b2(base_at_w: bool) -> TwoLevelTwist {
    let mut g = Graph::new(&["V"]).unwrap();
    g.add_edge("E", "V", "V", Some('c')).unwrap();
    let local_twist = fixture_two_vertex();
    let lgog = local_twist.gog().clone();
    let v = lgog.graph().vertex("v").unwrap();
    let w = lgog.graph().vertex("w").unwrap();
    let base = if base_at_w { w } else { v };
    let local = LocalData::new(local_twist, base).unwrap();
    // δ*(E) = the local loop y issued at w; δ*(Ē) = 1 at w
    let e_loc = lgog.graph().edge("e").unwrap();
    let delta_fwd = PathWord::stable_letter(lgog.graph(), e_loc);
    let one_w = lgog.identity_word(w);
    // connecting words join w to the base point
    let t_d = PathWord::stable_letter(lgog.graph(), lgog.graph().edge("d").unwrap());
    let connect = if base_at_w {
        one_w.clone()
    } else {
        t_d.inverse()
    };
    TwoLevelTwist::new(
        g,
        vec![local],
        vec![connect.clone(), connect],
        vec![delta_fwd, one_w],
    )
    .unwrap()
}

/// `fixture_b` with custom connecting words and corrections (same graph and local
/// data); words live in the local path group of `fixture_a`.
pub fn fixture_b_custom(
    u_fwd: PathWord,
    u_rev: PathWord,
    d_fwd: PathWord,
    d_rev: PathWord,
) -> Result<TwoLevelTwist, crate::two_level::TwoLevelError> {
    let mut g = Graph::new(&["V"]).unwrap();
    g.add_edge("E", "V", "V", Some('c')).unwrap();
    let local = LocalData::new(fixture_a(), VertexId(0)).unwrap();
    TwoLevelTwist::new(g, vec![local], vec![u_fwd, u_rev], vec![d_fwd, d_rev])
}

/// `fixture_b2` with custom base point and connecting words.
pub fn fixture_b2_custom(
    base_at_w: bool,
    u_fwd: PathWord,
    u_rev: PathWord,
) -> Result<TwoLevelTwist, crate::two_level::TwoLevelError> {
    let mut g = Graph::new(&["V"]).unwrap();
    g.add_edge("E", "V", "V", Some('c')).unwrap();
    let local_twist = fixture_two_vertex();
    let lgog = local_twist.gog().clone();
    let w = lgog.graph().vertex("w").unwrap();
    let v = lgog.graph().vertex("v").unwrap();
    let base = if base_at_w { w } else { v };
    let local = LocalData::new(local_twist, base).unwrap();
    let e_loc = lgog.graph().edge("e").unwrap();
    let delta_fwd = PathWord::stable_letter(lgog.graph(), e_loc);
    let one_w = lgog.identity_word(w);
    TwoLevelTwist::new(g, vec![local], vec![u_fwd, u_rev], vec![delta_fwd, one_w])
}

/// Classical twist with two co-terminal loops whose twistor images `a` and `b·a·B`
/// are positively bonded: fails efficiency condition (4).
pub fn mutant_positively_bonded() -> DehnTwist {
    let mut g = Graph::new(&["v"]).unwrap();
    g.add_edge("e", "v", "v", Some('c')).unwrap();
    g.add_edge("f", "v", "v", Some('d')).unwrap();
    let gog = GraphOfGroups::builder(g)
        .vertex_group("v", Basis::new(&['a', 'b']).unwrap())
        .unwrap()
        .cyclic_edge("e", "a", "a")
        .unwrap()
        .cyclic_edge("f", "baB", "baB")
        .unwrap()
        .build()
        .unwrap();
    DehnTwist::new(gog, vec![0, 1, 0, 1]).unwrap()
}

/// Two-level twist with a doubly-non-zero non-loop edge between two non-trivial
/// locals (plus an independent loop): repaired by one subdivision.
pub fn mutant_double_nonzero() -> TwoLevelTwist {
    let mut g = Graph::new(&["V", "W"]).unwrap();
    g.add_edge("E", "W", "V", Some('c')).unwrap();
    g.add_edge("L", "V", "V", Some('d')).unwrap();
    // local at V: fixture_a on letters (a, b); local at W: a copy on letters (p, q)
    let local_v = LocalData::new(fixture_a(), VertexId(0)).unwrap();
    let mut gw = Graph::new(&["w"]).unwrap();
    gw.add_edge("k", "w", "w", Some('q')).unwrap();
    let gog_w = GraphOfGroups::builder(gw)
        .vertex_group("w", Basis::new(&['p']).unwrap())
        .unwrap()
        .cyclic_edge("k", "p", "p")
        .unwrap()
        .build()
        .unwrap();
    let local_w = LocalData::new(DehnTwist::new(gog_w, vec![0, 1]).unwrap(), VertexId(0)).unwrap();

    let lv = local_v.twist.gog().clone();
    let lw = local_w.twist.gog().clone();
    let b_loop = PathWord::stable_letter(lv.graph(), lv.graph().edge("e").unwrap());
    let q_loop = PathWord::stable_letter(lw.graph(), lw.graph().edge("k").unwrap());
    let one_v = lv.identity_word(VertexId(0));
    let one_w = lw.identity_word(VertexId(0));
    // E: δ*(E) = b at V, δ*(Ē) = q at W — both non-zero
    // L: δ*(L) = b·b at V, δ*(Ē_L) = 1 — independent forward loop, not conjugate to b
    let bb = lv
        .compose(&b_loop, &b_loop)
        .expect("loop composes with itself");
    TwoLevelTwist::new(
        g,
        vec![local_v, local_w],
        vec![
            one_v.clone(),
            one_w.clone(),
            one_v.clone(),
            one_v.clone(),
        ],
        vec![b_loop, q_loop, bb, one_v],
    )
    .unwrap()
}

/// Two-level twist with two non-parallel forward edges into V whose corrections are
/// twisted-conjugate: fails condition (2), repaired by align + fold.
pub fn mutant_conjugate_duplicates() -> TwoLevelTwist {
    let mut g = Graph::new(&["V", "P", "Q"]).unwrap();
    g.add_edge("E", "P", "V", Some('c')).unwrap();
    g.add_edge("F", "Q", "V", Some('d')).unwrap();
    g.add_edge("L", "V", "V", Some('f')).unwrap();
    let local_v = LocalData::new(fixture_a(), VertexId(0)).unwrap();
    let local_p = LocalData::trivial("p", Basis::empty()).unwrap();
    let local_q = LocalData::trivial("q", Basis::empty()).unwrap();
    let lv = local_v.twist.gog().clone();
    let b_loop = PathWord::stable_letter(lv.graph(), lv.graph().edge("e").unwrap());
    let one_v = lv.identity_word(VertexId(0));
    let one_p = local_p.twist.gog().identity_word(VertexId(0));
    let one_q = local_q.twist.gog().identity_word(VertexId(0));
    // δ*(F) is the twisted conjugate A·b·a of b under the inverse twist
    let a_word = PathWord::vertex_element(VertexId(0), lv.vertex_basis(VertexId(0)).parse_word("a").unwrap());
    let h_inv = local_v.twist.inverse().as_morphism();
    let moved = crate::twisted::h_conjugate(&b_loop, &a_word, &h_inv).unwrap();
    let bb = lv.compose(&b_loop, &b_loop).unwrap();
    TwoLevelTwist::new(
        g,
        vec![local_v, local_p, local_q],
        vec![
            one_v.clone(), // U_E
            one_p.clone(), // U_Ē
            one_v.clone(), // U_F
            one_q.clone(), // U_F̄
            one_v.clone(), // U_L
            one_v.clone(), // U_L̄
        ],
        vec![b_loop, one_p, moved, one_q, bb, one_v],
    )
    .unwrap()
}

/// Two-level twist with a both-zero edge whose non-trivial endpoint blocks the
/// restricted contraction.
pub fn mutant_blocked_contraction() -> TwoLevelTwist {
    let mut g = Graph::new(&["V", "W"]).unwrap();
    g.add_edge("E", "W", "V", Some('c')).unwrap();
    g.add_edge("L", "V", "V", Some('d')).unwrap();
    let local_v = LocalData::new(fixture_a(), VertexId(0)).unwrap();
    // W carries a non-trivial (rank-one) local group, so it cannot be absorbed
    let local_w = LocalData::trivial("w", Basis::new(&['p']).unwrap()).unwrap();
    let lv = local_v.twist.gog().clone();
    let lw = local_w.twist.gog().clone();
    let b_loop = PathWord::stable_letter(lv.graph(), lv.graph().edge("e").unwrap());
    let one_v = lv.identity_word(VertexId(0));
    let one_w = lw.identity_word(VertexId(0));
    TwoLevelTwist::new(
        g,
        vec![local_v, local_w],
        vec![one_v.clone(), one_w.clone(), one_v.clone(), one_v.clone()],
        vec![one_v.clone(), one_w, b_loop, one_v],
    )
    .unwrap()
}
