//! Independent reference implementations used by the test suites.
//!
//! Everything here decides or computes by a different route than the main code paths:
//! equality of reduced path-group words through the coset chain of the normal-form
//! criterion (solving for the edge-group elements one stable letter at a time), and
//! growth tables by direct free-word iteration. Tests compare the main implementations
//! against these.

use crate::gog::{EdgeGroup, GogError, GraphOfGroups, PathWord};
use crate::words::{BasisMap, CyclicWord, FreeWord};

/// Decides equality in the path group by the direct criterion: after Britton
/// reduction both words must have the same stable-letter sequence, and the chain
/// `r′_0 = r_0·f_{ē₁}(g₁)`, `r′_k = f_{e_k}(g_k)·r_k·f_{ē_{k+1}}(g_{k+1})`,
/// `r′_q = f_{e_q}(g_q)·r_q` must be solvable for edge-group elements `g_k`. Each
/// `g_k` is determined exactly by membership of a computed element in the cyclic
/// edge-group image, so no search is involved.
pub fn equal_words(
    gog: &GraphOfGroups,
    a: &PathWord,
    b: &PathWord,
) -> Result<bool, GogError> {
    let a = gog.reduce(a)?;
    let b = gog.reduce(b)?;
    let q = a.path_length();
    if q != b.path_length() {
        return Ok(false);
    }
    if q == 0 {
        return Ok(a.head().word == b.head().word);
    }
    if a.edges().collect::<Vec<_>>() != b.edges().collect::<Vec<_>>() {
        return Ok(false);
    }
    if a.issue_vertex() != b.issue_vertex() {
        return Ok(false);
    }
    // r′_0 = r_0 · f_{ē₁}(g₁) pins g₁
    let e1 = a.tail()[0].0;
    let need = a.head().word.inverse().concat(&b.head().word);
    let mut k = match gog.edge_group(e1) {
        EdgeGroup::Trivial => {
            if !need.is_identity() {
                return Ok(false);
            }
            0
        }
        EdgeGroup::Cyclic => match crate::words::cyclic_subgroup_member(
            &need,
            gog.edge_image(e1.bar()).unwrap(),
        ) {
            Some(k) => k,
            None => return Ok(false),
        },
    };
    // interior: r′_i = f_{e_i}(g_i) · r_i · f_{ē_{i+1}}(g_{i+1}) pins g_{i+1}
    for i in 0..q - 1 {
        let e_i = a.tail()[i].0;
        let e_next = a.tail()[i + 1].0;
        let r = &a.tail()[i].1.word;
        let r_p = &b.tail()[i].1.word;
        let lhs = gog.edge_image_pow(e_i, k).concat(r);
        let need = lhs.inverse().concat(r_p);
        k = match gog.edge_group(e_next) {
            EdgeGroup::Trivial => {
                if !need.is_identity() {
                    return Ok(false);
                }
                0
            }
            EdgeGroup::Cyclic => match crate::words::cyclic_subgroup_member(
                &need,
                gog.edge_image(e_next.bar()).unwrap(),
            ) {
                Some(k) => k,
                None => return Ok(false),
            },
        };
    }
    // final: r′_q = f_{e_q}(g_q) · r_q
    let e_q = a.tail()[q - 1].0;
    let lhs = gog.edge_image_pow(e_q, k).concat(&a.tail()[q - 1].1.word);
    Ok(lhs == b.tail()[q - 1].1.word)
}

/// Exhaustive rewriting oracle for small words: explores every sequence of pinches
/// and coset shifts with exponents bounded by `exp_bound`, collecting all words
/// reachable from `a`; `b` is equal to `a` iff some reachable word matches `b`
/// syllable for syllable. Exponential; only for path length ≤ 4 and small elements.
pub fn equal_by_exhaustive_rewriting(
    gog: &GraphOfGroups,
    a: &PathWord,
    b: &PathWord,
    exp_bound: i64,
) -> Result<bool, GogError> {
    let a = gog.reduce(a)?;
    let b = gog.reduce(b)?;
    if a.path_length() != b.path_length() {
        return Ok(false);
    }
    let mut seen: Vec<PathWord> = vec![a.clone()];
    let mut frontier = vec![a];
    while let Some(w) = frontier.pop() {
        if w == b {
            return Ok(true);
        }
        let q = w.path_length();
        for i in 0..q {
            let e = w.tail()[i].0;
            if gog.edge_group(e) != EdgeGroup::Cyclic {
                continue;
            }
            for k in -exp_bound..=exp_bound {
                if k == 0 {
                    continue;
                }
                // shift f_{ē}(z^k) across t_e: multiply the left neighbour on the
                // right by u_ē^k and the right neighbour on the left by u_e^{-k}
                let mut head = w.head().clone();
                let mut tail: Vec<_> = w.tail().to_vec();
                let left_factor = gog.edge_image_pow(e.bar(), k);
                if i == 0 {
                    head.word = head.word.concat(&left_factor);
                } else {
                    tail[i - 1].1.word = tail[i - 1].1.word.concat(&left_factor);
                }
                tail[i].1.word = gog.edge_image_pow(e, -k).concat(&tail[i].1.word);
                let cand = PathWord::from_parts(head, tail);
                if !seen.contains(&cand) {
                    seen.push(cand.clone());
                    frontier.push(cand);
                    if seen.len() > 20_000 {
                        // safety valve; callers keep instances tiny
                        return equal_words(gog, &seen[0], &b);
                    }
                }
            }
        }
    }
    Ok(false)
}

/// Direct-iteration growth oracle: cyclic lengths of `φ^t(g)` for `0 ≤ t ≤ t_max`,
/// unit weights.
pub fn growth_by_iteration(phi: &BasisMap, g: &FreeWord, t_max: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(t_max + 1);
    let mut w = g.clone();
    for t in 0..=t_max {
        let (core, _): (CyclicWord, _) = crate::words::cyclic_reduce(&w);
        out.push(core.len());
        if t < t_max {
            w = phi.apply(&w);
        }
    }
    out
}
