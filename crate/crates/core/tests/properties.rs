//! Property tests for the word, path-group, morphism and twisted-conjugacy layers.

use gogtwist::fixtures;
use gogtwist::gog::{EdgeId, PathWord, Syllable, VertexId};
use gogtwist::morphism::iterated_product;
use gogtwist::oracle;
use gogtwist::twisted::{h_conjugate, h_reduce};
use gogtwist::words::{
    conjugacy_witness, cyclic_reduce, primitive_root, Basis, BasisMap, FreeWord, Letter,
};
use proptest::prelude::*;

fn letters(rank: usize, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec(
        (0..rank, any::<bool>()).prop_map(|(g, inv)| Letter::new(g, inv)),
        0..=max_len,
    )
}

fn word(rank: usize, max_len: usize) -> impl Strategy<Value = FreeWord> {
    letters(rank, max_len).prop_map(FreeWord::from_letters)
}

proptest! {
    // free reduction is confluent: association order does not matter
    #[test]
    fn reduction_confluent(ls in letters(3, 24), split in 0usize..25) {
        let whole = FreeWord::from_letters(ls.clone());
        let cut = split.min(ls.len());
        let left = FreeWord::from_letters(ls[..cut].to_vec());
        let right = FreeWord::from_letters(ls[cut..].to_vec());
        prop_assert_eq!(left.concat(&right), whole);
    }

    #[test]
    fn cyclic_reduce_round_trip(w in word(3, 16)) {
        let (core, conj) = cyclic_reduce(&w);
        let back = conj.concat(&core.to_free()).concat(&conj.inverse());
        prop_assert_eq!(back, w);
    }

    #[test]
    fn primitive_root_reconstructs(w in word(2, 10), p in 1u32..4) {
        if w.is_identity() { return Ok(()); }
        let mut powered_letters = Vec::new();
        for _ in 0..p {
            powered_letters.extend_from_slice(w.letters());
        }
        let powered = FreeWord::from_letters(powered_letters);
        if powered.len() != w.len() * p as usize {
            // power collapsed; skip
            return Ok(());
        }
        let (root, exp) = primitive_root(&powered).unwrap();
        prop_assert_eq!(root.pow(exp as i64), powered);
        // the root is not a proper power
        let (_, inner) = primitive_root(&root).unwrap();
        prop_assert_eq!(inner, 1);
    }

    #[test]
    fn conjugacy_witness_sound(u in word(2, 8), g in word(2, 5)) {
        let w = u.conjugated_by(&g);
        match conjugacy_witness(&u, &w) {
            Some(found) => prop_assert_eq!(u.conjugated_by(&found), w),
            None => prop_assert!(false, "conjugate pair must have a witness"),
        }
    }

    // iterated products satisfy the cocycle relation
    #[test]
    fn iterated_product_cocycle(g in word(2, 5), r in 1i64..4, t in 4i64..7) {
        let basis = Basis::new(&['a', 'b']).unwrap();
        let phi = BasisMap::automorphism(
            basis.clone(),
            vec![basis.parse_word("a").unwrap(), basis.parse_word("ba").unwrap()],
        ).unwrap();
        let whole = iterated_product(&phi, &g, 0, t).unwrap();
        let left = iterated_product(&phi, &g, 0, r).unwrap();
        let right = iterated_product(&phi, &g, r, t).unwrap();
        prop_assert_eq!(whole, left.concat(&right));
    }
}

// --- path-group properties on FIXTURE-A (cyclic edge group) ---

fn random_elem<R: rand::Rng>(rng: &mut R, rank: usize) -> FreeWord {
    let len = rng.gen_range(0..4);
    FreeWord::from_letters(
        (0..len)
            .map(|_| Letter::new(rng.gen_range(0..rank), rng.gen_bool(0.5)))
            .collect::<Vec<_>>(),
    )
}

fn random_path_word<R: rand::Rng>(
    gog: &gogtwist::gog::GraphOfGroups,
    rng: &mut R,
    q: usize,
) -> PathWord {
    // words over the single-vertex loop gog: any edge sequence is connected
    let v = VertexId(0);
    let rank = gog.vertex_basis(v).rank();
    let head = Syllable {
        vertex: v,
        word: random_elem(rng, rank),
    };
    let tail = (0..q)
        .map(|_| {
            let e = EdgeId(if rng.gen_bool(0.5) { 0 } else { 1 });
            let word = random_elem(rng, rank);
            (e, Syllable { vertex: v, word })
        })
        .collect();
    PathWord::from_parts(head, tail)
}

/// Applies a random normal-form move with the given edge-group exponents.
fn apply_move(
    gog: &gogtwist::gog::GraphOfGroups,
    w: &PathWord,
    exps: &[i64],
) -> PathWord {
    let mut head = w.head().clone();
    let mut tail: Vec<(EdgeId, Syllable)> = w.tail().to_vec();
    for (i, k) in exps.iter().enumerate().take(tail.len()) {
        let e = tail[i].0;
        // r_{i-1} ← r_{i-1}·f_{ē}(z^k), r_i ← f_e(z^{-k})·r_i
        let left = gog.edge_image_pow(e.bar(), *k);
        if i == 0 {
            head.word = head.word.concat(&left);
        } else {
            tail[i - 1].1.word = tail[i - 1].1.word.concat(&left);
        }
        tail[i].1.word = gog.edge_image_pow(e, -k).concat(&tail[i].1.word);
    }
    PathWord::from_parts(head, tail)
}

#[test]
fn canonical_form_invariant_under_moves() {
    use rand::{Rng, SeedableRng};
    let a = fixtures::fixture_a();
    let gog = a.gog();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(101);
    for _ in 0..300 {
        let q = rng.gen_range(0..4);
        let w = random_path_word(gog, &mut rng, q);
        let exps: Vec<i64> = (0..q).map(|_| rng.gen_range(-2..=2)).collect();
        let moved = apply_move(gog, &w, &exps);
        let c1 = gog.canonical_form(&w).unwrap();
        let c2 = gog.canonical_form(&moved).unwrap();
        assert_eq!(c1, c2, "canonical forms differ after a normal-form move");
        // idempotence and path-length invariance
        assert_eq!(gog.canonical_form(&c1).unwrap(), c1);
        assert_eq!(
            gog.path_length(&w).unwrap(),
            gog.path_length(&moved).unwrap()
        );
        // the chain-criterion equality oracle agrees
        assert!(oracle::equal_words(gog, &w, &moved).unwrap());
    }
}

#[test]
fn equality_matches_oracles_on_random_pairs() {
    use rand::{Rng, SeedableRng};
    let a = fixtures::fixture_a();
    let gog = a.gog();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(202);
    let mut equal_seen = 0;
    for _ in 0..300 {
        let q1 = rng.gen_range(0..4);
        let w1 = random_path_word(gog, &mut rng, q1);
        let q2 = rng.gen_range(0..4);
        let w2 = random_path_word(gog, &mut rng, q2);
        let by_canonical = gog.equal_in_path_group(&w1, &w2).unwrap();
        let by_chain = oracle::equal_words(gog, &w1, &w2).unwrap();
        assert_eq!(by_canonical, by_chain);
        if gog.reduce(&w1).unwrap().path_length() <= 3 {
            let by_rewriting = oracle::equal_by_exhaustive_rewriting(gog, &w1, &w2, 3).unwrap();
            assert_eq!(by_canonical, by_rewriting);
        }
        if by_canonical {
            equal_seen += 1;
        }
    }
    let _ = equal_seen;
}

#[test]
fn trivial_edge_groups_match_free_product_equality() {
    use rand::{Rng, SeedableRng};
    // on the top gog of FIXTURE-B (trivial edge groups) path-group equality
    // coincides with equality of the flattened free words
    let b = fixtures::fixture_b();
    let gog = b.top_gog();
    let m = gogtwist::marking::Marking::canonical(gog, VertexId(0)).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(303);
    for _ in 0..200 {
        let len = rng.gen_range(0..10);
        let w1 = FreeWord::from_letters(
            (0..len).map(|_| Letter::new(rng.gen_range(0..3), rng.gen_bool(0.5))),
        );
        let len = rng.gen_range(0..10);
        let w2 = FreeWord::from_letters(
            (0..len).map(|_| Letter::new(rng.gen_range(0..3), rng.gen_bool(0.5))),
        );
        let p1 = m.from_basis(gog, &w1).unwrap();
        let p2 = m.from_basis(gog, &w2).unwrap();
        assert_eq!(
            gog.equal_in_path_group(&p1, &p2).unwrap(),
            w1 == w2,
            "free-product equality mismatch"
        );
    }
}

#[test]
fn apply_respects_path_group_equality() {
    use rand::{Rng, SeedableRng};
    let a = fixtures::fixture_a();
    let gog = a.gog();
    let h = a.as_morphism();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(404);
    for _ in 0..150 {
        let q = rng.gen_range(1..4);
        let w = random_path_word(gog, &mut rng, q);
        let exps: Vec<i64> = (0..q).map(|_| rng.gen_range(-2..=2)).collect();
        let moved = apply_move(gog, &w, &exps);
        let iw = h.apply(&w).unwrap();
        let imoved = h.apply(&moved).unwrap();
        assert!(gog.equal_in_path_group(&iw, &imoved).unwrap());
    }
}

#[test]
fn h_reduce_monotone_and_stable() {
    use rand::{Rng, SeedableRng};
    let a = fixtures::fixture_a();
    let gog = a.gog();
    let h = a.as_morphism();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(505);
    for _ in 0..100 {
        let q = rng.gen_range(0..4);
        let mut w = random_path_word(gog, &mut rng, q);
        if !w.is_closed() {
            continue;
        }
        w = gog.reduce(&w).unwrap();
        let rep = h_reduce(&w, &h, 20).unwrap();
        assert!(rep.word.path_length() <= w.path_length());
        let again = h_reduce(&rep.word, &h, 20).unwrap();
        assert_eq!(again.word, rep.word, "h_reduce output must be a fixed point");
        // the conjugator transports the input to the representative
        let moved = h_conjugate(&w, &rep.conjugator, &h).unwrap();
        assert!(gog.equal_in_path_group(&moved, &rep.word).unwrap());
    }
}

#[test]
fn certified_reduced_words_share_loops_up_to_rotation() {
    use rand::{Rng, SeedableRng};
    let a = fixtures::fixture_a();
    let gog = a.gog();
    let h = a.as_morphism();
    let e = gog.graph().edge("e").unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(606);
    // plant: a fixed reduced word with non-trivial loop, conjugated randomly
    let base = PathWord::parse(gog, "t[e]·a·t[e]").unwrap();
    for _ in 0..50 {
        let qu = rng.gen_range(0..3);
        let u = random_path_word(gog, &mut rng, qu);
        let u = gog.reduce(&u).unwrap();
        if !u.is_closed() {
            continue;
        }
        let moved = h_conjugate(&base, &u, &h).unwrap();
        let rep = h_reduce(&moved, &h, 40).unwrap();
        if !rep.certified {
            continue;
        }
        let base_loop: Vec<EdgeId> = base.edges().collect();
        let rep_loop: Vec<EdgeId> = rep.word.edges().collect();
        assert_eq!(rep_loop.len(), base_loop.len());
        let n = base_loop.len();
        let is_rotation = (0..n).any(|r| (0..n).all(|k| rep_loop[(r + k) % n] == base_loop[k]));
        assert!(is_rotation, "loops must agree up to cyclic permutation");
    }
    let _ = e;
}

#[test]
fn d_length_is_class_invariant() {
    use gogtwist::twisted::d_length;
    use rand::{Rng, SeedableRng};
    let a = fixtures::fixture_a();
    let gog = a.gog();
    let h = a.as_morphism();
    let weights = Basis::new(&['a', 'b']).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(707);
    let base = PathWord::parse(gog, "t[e]·a·t[e]").unwrap();
    let reference = d_length(&base, &a, &weights).unwrap();
    for _ in 0..40 {
        let qu = rng.gen_range(0..3);
        let u = gog.reduce(&random_path_word(gog, &mut rng, qu)).unwrap();
        if !u.is_closed() {
            continue;
        }
        let moved = h_conjugate(&base, &u, &h).unwrap();
        assert_eq!(d_length(&moved, &a, &weights).unwrap(), reference);
    }
}

// --- cancellation lemmas on the free-loop fixture ---

#[test]
fn unique_cancellation_on_non_bonded_paths() {
    use gogtwist::dehn::cancellation_defect;
    let p = fixtures::fixture_free_loop();
    let gog = p.gog();
    // V on the (non-bonded) path e·e, W = u′·V; V cancels against W⁻¹
    let v_word = PathWord::parse(gog, "x·t[e]·y·t[e]·xy").unwrap();
    let u_prime = PathWord::parse(gog, "yx").unwrap();
    let w_word = gog.compose(&u_prime, &v_word).unwrap();
    let product = gog.compose(&v_word, &w_word.inverse()).unwrap();
    assert_eq!(product.path_length(), 0);
    // for u ≠ 1 the element V·u does not cancel against W⁻¹
    for u_text in ["x", "y", "X", "Y", "xy", "yX"] {
        let u = PathWord::parse(gog, u_text).unwrap();
        let vu = gog.compose(&v_word, &u).unwrap();
        let defect_word = gog.compose(&vu, &w_word.inverse()).unwrap();
        assert!(
            defect_word.path_length() > 0,
            "V·{u_text} must not cancel fully"
        );
    }
    let _ = cancellation_defect(gog, &[v_word, w_word.inverse()]).unwrap();
}

#[test]
fn twist_image_cancellation_needs_t_zero() {
    // V, W on the proper-power loop e·e: V cancels W⁻¹ but not D^t(W⁻¹) for t ≠ 0
    let p = fixtures::fixture_free_loop();
    let gog = p.gog();
    let d = p.as_morphism();
    let v_word = PathWord::parse(gog, "x·t[e]·y·t[e]·xy").unwrap();
    let u_prime = PathWord::parse(gog, "Xy").unwrap();
    let w_word = gog.compose(&u_prime, &v_word).unwrap();
    assert_eq!(
        gog.compose(&v_word, &w_word.inverse()).unwrap().path_length(),
        0
    );
    for t in [-6i64, -3, -1, 1, 2, 4, 6] {
        let dtw = d.iterate(t, &w_word.inverse()).unwrap();
        let prod = gog.compose(&v_word, &dtw).unwrap();
        assert!(
            prod.path_length() > 0,
            "V must not cancel against D^{t}(W⁻¹)"
        );
    }
}

#[test]
fn closed_form_iteration_identity() {
    // H_*^t(t_e) = H_*^{(t)}(δ(ē)⁻¹)⁻¹ · t_e · H_*^{(t)}(δ(e)⁻¹) for 0 ≤ t ≤ 8
    for (gog, h) in [
        {
            let a = fixtures::fixture_a();
            (a.gog().clone(), a.as_morphism())
        },
        {
            let b = fixtures::fixture_b();
            (b.top_gog().clone(), b.assemble().unwrap())
        },
        {
            let p = fixtures::fixture_free_loop();
            (p.gog().clone(), p.as_morphism())
        },
    ] {
        for e in gog.graph().oriented_edges() {
            let te = PathWord::stable_letter(gog.graph(), e);
            for t in 0..=8i64 {
                let lhs = h.iterate(t, &te).unwrap();
                let rhs = if t == 0 {
                    te.clone()
                } else {
                    let v_out = gog.graph().initial(e);
                    let v_in = gog.graph().terminal(e);
                    let phi_out = h.vertex_map(v_out);
                    let phi_in = h.vertex_map(v_in);
                    let left =
                        iterated_product(phi_out, &h.correction(e.bar()).inverse(), 0, t)
                            .unwrap()
                            .inverse();
                    let right =
                        iterated_product(phi_in, &h.correction(e).inverse(), 0, t).unwrap();
                    let lw = PathWord::vertex_element(v_out, left);
                    let rw = PathWord::vertex_element(v_in, right);
                    gog.compose(&gog.compose(&lw, &te).unwrap(), &rw).unwrap()
                };
                assert!(
                    gog.equal_in_path_group(&lhs, &rhs).unwrap(),
                    "closed form fails at t = {t} on edge {}",
                    gog.graph().edge_name(e)
                );
            }
        }
    }
}
