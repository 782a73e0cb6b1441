//! Dehn twists on graphs of groups: correction terms `δ(e) = u_e^{γ(e)}`, twistors
//! `z_e` with exponent `ζ(e) = γ(ē) − γ(e)`, bondedness, and the five-condition
//! efficiency checker.

use serde::Serialize;
use thiserror::Error;

use crate::gog::{EdgeGroup, EdgeId, GogError, GraphOfGroups, PathWord, VertexId};
use crate::morphism::{GogMorphism, GraphMap, MorphismError};
use crate::words::{cyclic_reduce, CyclicWord, FreeWord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DehnError {
    #[error("gamma exponent on edge {0:?} with trivial edge group")]
    GammaOnTrivial(String),
    #[error("edges do not share a terminal vertex")]
    VertexMismatch,
    #[error("edge group must be cyclic on edge {0:?}")]
    NotCyclic(String),
    #[error("edge sequence is not a path")]
    NotAPath,
    #[error("product of words is not connected")]
    Disconnected,
    #[error("gog error: {0}")]
    Gog(#[from] GogError),
    #[error("morphism error: {0}")]
    Morphism(#[from] MorphismError),
}

/// A Dehn twist: the identity on the graph and on all vertex and edge groups, with
/// corrections `δ(e) = f_e(γ_e) = u_e^{γ(e)}` over cyclic edge groups.
#[derive(Clone, Debug, PartialEq)]
pub struct DehnTwist {
    gog: GraphOfGroups,
    gamma: Vec<i64>, // per oriented edge; must be 0 on trivial pairs
}

impl DehnTwist {
    pub fn new(gog: GraphOfGroups, gamma: Vec<i64>) -> Result<DehnTwist, DehnError> {
        assert_eq!(gamma.len(), gog.graph().edge_pair_count() * 2);
        for e in gog.graph().oriented_edges() {
            if gog.edge_group(e) == EdgeGroup::Trivial && gamma[e.0] != 0 {
                return Err(DehnError::GammaOnTrivial(
                    gog.graph().edge_name(e).to_string(),
                ));
            }
        }
        Ok(DehnTwist { gog, gamma })
    }

    pub fn identity(gog: GraphOfGroups) -> DehnTwist {
        let n = gog.graph().edge_pair_count() * 2;
        DehnTwist {
            gog,
            gamma: vec![0; n],
        }
    }

    pub fn gog(&self) -> &GraphOfGroups {
        &self.gog
    }

    pub fn gamma(&self, e: EdgeId) -> i64 {
        self.gamma[e.0]
    }

    /// Twistor exponent `ζ(e) = γ(ē) − γ(e)`; antisymmetric by construction.
    pub fn twistor_exponent(&self, e: EdgeId) -> i64 {
        self.gamma[e.bar().0] - self.gamma[e.0]
    }

    /// `f_e(z_e) = u_e^{ζ(e)}` in the terminal vertex group (1 on trivial pairs).
    pub fn twistor_image(&self, e: EdgeId) -> FreeWord {
        self.gog.edge_image_pow(e, self.twistor_exponent(e))
    }

    pub fn correction(&self, e: EdgeId) -> FreeWord {
        self.gog.edge_image_pow(e, self.gamma[e.0])
    }

    pub fn inverse(&self) -> DehnTwist {
        DehnTwist {
            gog: self.gog.clone(),
            gamma: self.gamma.iter().map(|g| -g).collect(),
        }
    }

    /// The twist as a graph-of-groups automorphism: identity graph map, identity
    /// vertex and edge maps, corrections `u_e^{γ(e)}`.
    pub fn as_morphism(&self) -> GogMorphism {
        let gog = &self.gog;
        let correction = gog
            .graph()
            .oriented_edges()
            .map(|e| self.correction(e))
            .collect();
        GogMorphism::new(
            gog.clone(),
            gog.clone(),
            GraphMap::identity(gog),
            gog.graph()
                .vertices()
                .map(|v| gog.vertex_basis(v).identity_map())
                .collect(),
            vec![1; gog.graph().edge_pair_count()],
            correction,
        )
        .expect("twist data is well-formed")
    }

    /// Induced automorphism on the canonical marking at `base`.
    pub fn marking_automorphism_at(
        &self,
        base: VertexId,
    ) -> Result<crate::words::BasisMap, crate::marking::MarkingError> {
        let m = crate::marking::Marking::canonical(&self.gog, base)?;
        m.induced_automorphism(&self.gog, &self.as_morphism())
    }

    /// Induced automorphism at vertex 0 (single-vertex fixtures).
    pub fn marking_automorphism(
        &self,
    ) -> Result<crate::words::BasisMap, crate::marking::MarkingError> {
        self.marking_automorphism_at(VertexId(0))
    }

    pub fn check_efficient(&self) -> EfficiencyReport {
        check_efficient(self)
    }
}

/// Primitive cyclic root data of a vertex-group element: the conjugacy-level root and
/// its multiplicity, `u ~ root^mult`.
fn cyclic_root(u: &FreeWord) -> (CyclicWord, u32, FreeWord) {
    let (core, conj) = cyclic_reduce(u);
    match core.primitive_root() {
        Some((root, mult)) => (root, mult, conj),
        None => (core, 1, conj),
    }
}

/// A bond between co-terminal edges: minimal non-zero exponents and a conjugator with
/// `u_e^{n_e} = h · u_{e′}^{n_eprime} · h⁻¹`.
pub fn bonded_witness(
    gog: &GraphOfGroups,
    e: EdgeId,
    e_prime: EdgeId,
) -> Result<Option<(i64, i64, FreeWord)>, DehnError> {
    if gog.graph().terminal(e) != gog.graph().terminal(e_prime) {
        return Err(DehnError::VertexMismatch);
    }
    for x in [e, e_prime] {
        if gog.edge_group(x) != EdgeGroup::Cyclic {
            return Err(DehnError::NotCyclic(gog.graph().edge_name(x).to_string()));
        }
    }
    let u = gog.edge_image(e).unwrap();
    let w = gog.edge_image(e_prime).unwrap();
    Ok(power_conjugacy(u, w))
}

/// Minimal non-zero `(n, m, h)` with `u^n = h·w^m·h⁻¹`, or `None`. The returned `n`
/// is positive; the sign of `m` records orientation.
pub fn power_conjugacy(u: &FreeWord, w: &FreeWord) -> Option<(i64, i64, FreeWord)> {
    if u.is_identity() || w.is_identity() {
        return None;
    }
    // u = pu·X^{su}·pu⁻¹ and w = pw·Y^{sw}·pw⁻¹ with X, Y primitive
    let (ru, su, pu) = cyclic_root(u);
    let (rw, sw, pw) = cyclic_root(w);
    let x = ru.to_free();
    let (sign, y_eff) = if ru == rw {
        (1i64, rw.to_free())
    } else if ru == rw.inverse() {
        (-1, rw.to_free().inverse())
    } else {
        return None;
    };
    // y_eff is a rotation of x: y_eff = A⁻¹·x·A for the split x = A·B, y_eff = B·A
    let rot = split_rotation(&x, &y_eff)?;
    let g = gcd(su as i64, sw as i64);
    let n = sw as i64 / g;
    let m = sign * (su as i64 / g);
    let h = pu.concat(&rot).concat(&pw.inverse());
    let lhs = u.pow(n);
    let rhs = w.pow(m).conjugated_by(&h);
    debug_assert_eq!(lhs, rhs);
    if lhs != rhs {
        return None;
    }
    Some((n, m, h))
}

/// For rotations of one another returns `A` with `x = A·B` and `y = B·A`.
fn split_rotation(x: &FreeWord, y: &FreeWord) -> Option<FreeWord> {
    let n = x.len();
    if n != y.len() {
        return None;
    }
    for cut in 0..n {
        let rotated: Vec<_> = x.letters()[cut..]
            .iter()
            .chain(x.letters()[..cut].iter())
            .copied()
            .collect();
        if rotated == y.letters() {
            return Some(FreeWord::from_letters(x.letters()[..cut].to_vec()));
        }
    }
    None
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Positively bonded: twistor images `f_e(z_e^{n₁})` and `f_{e′}(z_{e′}^{n₂})` are
/// conjugate for some `n₁, n₂ ≥ 1`.
pub fn positively_bonded(
    twist: &DehnTwist,
    e: EdgeId,
    e_prime: EdgeId,
) -> Result<bool, DehnError> {
    bonded_sign(twist, e, e_prime, 1)
}

/// Negatively bonded: conjugate with `n₁ ≥ 1`, `n₂ ≤ −1`.
pub fn negatively_bonded(
    twist: &DehnTwist,
    e: EdgeId,
    e_prime: EdgeId,
) -> Result<bool, DehnError> {
    bonded_sign(twist, e, e_prime, -1)
}

fn bonded_sign(
    twist: &DehnTwist,
    e: EdgeId,
    e_prime: EdgeId,
    want: i64,
) -> Result<bool, DehnError> {
    let gog = twist.gog();
    if gog.graph().terminal(e) != gog.graph().terminal(e_prime) {
        return Err(DehnError::VertexMismatch);
    }
    let x = twist.twistor_image(e);
    let y = twist.twistor_image(e_prime);
    if x.is_identity() && y.is_identity() {
        // degenerate: trivial twistors are conjugate at any exponents
        return Ok(true);
    }
    if x.is_identity() || y.is_identity() {
        return Ok(false);
    }
    Ok(power_conjugacy(&x, &y)
        .map(|(_, m, _)| m.signum() == want)
        .unwrap_or(false))
}

/// Edge bonders along a path or loop satisfy, per consecutive pair `(e_i, ē_{i+1})`, a
/// power-conjugacy `u_{e_i}^{k} ~ u_{ē_{i+1}}^{m}` with the ray of solutions
/// `(k, m) = j·(α_i, β_i)`; interior compatibility chains the rays linearly, so a path
/// is bonded iff each pair is, and a loop additionally needs the product of ratios to
/// close up (`∏β_i = ∏α_i` with matching sign).
pub fn is_bonded_path(gog: &GraphOfGroups, edges: &[EdgeId]) -> Result<bool, DehnError> {
    bonded_chain(gog, edges, false)
}

pub fn is_bonded_loop(gog: &GraphOfGroups, edges: &[EdgeId]) -> Result<bool, DehnError> {
    bonded_chain(gog, edges, true)
}

fn bonded_chain(gog: &GraphOfGroups, edges: &[EdgeId], cyclic: bool) -> Result<bool, DehnError> {
    let r = edges.len();
    // trivial path or loop is bonded by definition
    if r == 0 {
        return Ok(true);
    }
    for i in 0..r.saturating_sub(1) {
        if gog.graph().terminal(edges[i]) != gog.graph().initial(edges[i + 1]) {
            return Err(DehnError::NotAPath);
        }
    }
    if cyclic && gog.graph().terminal(edges[r - 1]) != gog.graph().initial(edges[0]) {
        return Err(DehnError::NotAPath);
    }
    let pairs = if cyclic { r } else { r - 1 };
    let mut rays = Vec::with_capacity(pairs);
    for i in 0..pairs {
        let a = edges[i];
        let b = edges[(i + 1) % r].bar();
        if gog.edge_group(a) != EdgeGroup::Cyclic || gog.edge_group(b) != EdgeGroup::Cyclic {
            return Ok(false);
        }
        match bonded_witness(gog, a, b)? {
            Some((n, m, _)) => rays.push((n, m)),
            None => return Ok(false),
        }
    }
    if !cyclic {
        return Ok(true);
    }
    // closing condition: ∏ m_i / ∏ n_i = 1 over the cyclic chain
    let mut num = 1i128;
    let mut den = 1i128;
    for (n, m) in rays {
        num *= m as i128;
        den *= n as i128;
    }
    Ok(num == den)
}

/// Path-length cancellation defect `Σ|W_i| − |ΠW_i|` of a family of composable words.
pub fn cancellation_defect(
    gog: &GraphOfGroups,
    words: &[PathWord],
) -> Result<usize, DehnError> {
    assert!(!words.is_empty());
    let mut sum = 0usize;
    let mut product = gog.reduce(&words[0])?;
    sum += product.path_length();
    for w in &words[1..] {
        let w = gog.reduce(w)?;
        sum += w.path_length();
        product = gog
            .compose(&product, &w)
            .map_err(|_| DehnError::Disconnected)?;
    }
    Ok(sum - product.path_length())
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ConditionReport {
    pub id: &'static str,
    pub passed: bool,
    pub witnesses: Vec<String>,
}

/// Per-condition efficiency report for a classical Dehn twist.
#[derive(Clone, Debug, Serialize)]
pub struct EfficiencyReport {
    pub formal_rank: usize,
    pub rank_precondition: bool,
    pub classical: bool,
    pub conditions: Vec<ConditionReport>,
    /// Valence-two vertices carried by a single loop edge pair; reported separately,
    /// not a failure of the invisible-vertex condition.
    pub loop_invisible: Vec<String>,
}

impl EfficiencyReport {
    pub fn passed(&self) -> bool {
        self.rank_precondition && self.classical && self.conditions.iter().all(|c| c.passed)
    }

    pub fn condition(&self, id: &str) -> Option<&ConditionReport> {
        self.conditions.iter().find(|c| c.id == id)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "rank_precondition = {} (formal rank {})\n",
            self.rank_precondition, self.formal_rank
        ));
        out.push_str(&format!("classical = {}\n", self.classical));
        for c in &self.conditions {
            out.push_str(&format!(
                "{} = {}{}\n",
                c.id,
                if c.passed { "pass" } else { "fail" },
                if c.witnesses.is_empty() {
                    String::new()
                } else {
                    format!(" [{}]", c.witnesses.join("; "))
                }
            ));
        }
        if !self.loop_invisible.is_empty() {
            out.push_str(&format!(
                "loop_invisible = [{}]\n",
                self.loop_invisible.join("; ")
            ));
        }
        out.push_str(&format!(
            "efficient = {}\n",
            if self.passed() { "yes" } else { "no" }
        ));
        out
    }
}

/// Is `⟨u⟩` the whole vertex group? (Surjectivity of a cyclic edge map onto a free
/// vertex group: rank one generated by a single letter.)
fn cyclic_image_surjective(gog: &GraphOfGroups, e: EdgeId) -> bool {
    match gog.edge_group(e) {
        EdgeGroup::Trivial => gog.vertex_basis(gog.graph().terminal(e)).is_trivial(),
        EdgeGroup::Cyclic => {
            let u = gog.edge_image(e).unwrap();
            gog.vertex_basis(gog.graph().terminal(e)).rank() == 1 && u.len() == 1
        }
    }
}

pub fn check_efficient(twist: &DehnTwist) -> EfficiencyReport {
    let gog = twist.gog();
    let g = gog.graph();
    let formal_rank = gog.formal_rank();
    let classical = g
        .oriented_edges()
        .all(|e| gog.edge_group(e) == EdgeGroup::Cyclic);
    let mut conditions = Vec::new();
    let mut loop_invisible = Vec::new();

    // (1) minimality: no valence-one vertex with surjective edge map
    let mut w1 = Vec::new();
    for v in g.vertices() {
        let into = g.edges_into(v);
        if into.len() == 1 && cyclic_image_surjective(gog, into[0]) {
            w1.push(format!(
                "vertex {} with edge {}",
                g.vertex_name(v),
                g.edge_name(into[0])
            ));
        }
    }
    conditions.push(ConditionReport {
        id: "minimal",
        passed: w1.is_empty(),
        witnesses: w1,
    });

    // (2) no invisible vertex: valence two with both edge maps surjective; the pair
    // (e, ē) of a single loop edge is flagged separately
    let mut w2 = Vec::new();
    for v in g.vertices() {
        let into = g.edges_into(v);
        if into.len() != 2 {
            continue;
        }
        let (e1, e2) = (into[0], into[1]);
        if !(cyclic_image_surjective(gog, e1) && cyclic_image_surjective(gog, e2)) {
            continue;
        }
        if e2 == e1.bar() {
            loop_invisible.push(format!("vertex {}", g.vertex_name(v)));
        } else {
            w2.push(format!("vertex {}", g.vertex_name(v)));
        }
    }
    conditions.push(ConditionReport {
        id: "no_invisible_vertex",
        passed: w2.is_empty(),
        witnesses: w2,
    });

    // (3) no proper power: u_e primitive at the conjugacy level
    let mut w3 = Vec::new();
    for e in g.oriented_edges() {
        if let Some(u) = gog.edge_image(e) {
            let (_, mult, _) = cyclic_root(u);
            if mult > 1 {
                w3.push(format!(
                    "edge {} image is a proper power (multiplicity {mult})",
                    g.edge_name(e)
                ));
            }
        }
    }
    conditions.push(ConditionReport {
        id: "no_proper_power",
        passed: w3.is_empty(),
        witnesses: w3,
    });

    // (4) no positively bonded co-terminal pair
    let mut w4 = Vec::new();
    if classical {
        let all: Vec<EdgeId> = g.oriented_edges().collect();
        for (i, &e1) in all.iter().enumerate() {
            for &e2 in &all[i + 1..] {
                if g.terminal(e1) != g.terminal(e2) {
                    continue;
                }
                if positively_bonded(twist, e1, e2).unwrap_or(false) {
                    w4.push(format!(
                        "edges {} and {} at {}",
                        g.edge_name(e1),
                        g.edge_name(e2),
                        g.vertex_name(g.terminal(e1))
                    ));
                }
            }
        }
    }
    conditions.push(ConditionReport {
        id: "not_positively_bonded",
        passed: w4.is_empty(),
        witnesses: w4,
    });

    // (5) no unused edge: ζ(e) ≠ 0
    let mut w5 = Vec::new();
    for p in g.edge_pairs() {
        if twist.twistor_exponent(p) == 0 {
            w5.push(format!("edge {}", g.edge_name(p)));
        }
    }
    conditions.push(ConditionReport {
        id: "no_unused_edge",
        passed: w5.is_empty(),
        witnesses: w5,
    });

    EfficiencyReport {
        formal_rank,
        rank_precondition: formal_rank >= 2,
        classical,
        conditions,
        loop_invisible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::words::Basis;

    #[test]
    fn fixture_a_morphism_and_twistors() {
        let a = fixtures::fixture_a();
        let gog = a.gog();
        let e = gog.graph().edge("e").unwrap();
        assert_eq!(a.twistor_exponent(e), 1);
        assert_eq!(a.twistor_exponent(e.bar()), -1);
        let h = a.as_morphism();
        assert!(h.validate().is_empty());
        // D_*(t_b) = t_b · a in canonical form
        let img = h
            .apply(&PathWord::stable_letter(gog.graph(), e))
            .unwrap();
        let canon = gog.canonical_form(&img).unwrap();
        assert_eq!(canon.to_text(gog), "t[e]·a");
        // inverse twist negates the twistor
        assert_eq!(a.inverse().twistor_exponent(e), -1);
        // all-zero gamma is the identity morphism
        let id = DehnTwist::identity(gog.clone());
        assert!(id.as_morphism().validate().is_empty());
        assert!(id
            .as_morphism()
            .apply(&PathWord::stable_letter(gog.graph(), e))
            .unwrap()
            .to_text(gog)
            .starts_with("t[e]"));
    }

    #[test]
    fn bonded_witness_examples() {
        let b = Basis::new(&['a', 'b']).unwrap();
        // identical words bond with exponents (1, 1) and trivial conjugator
        let u = b.parse_word("a").unwrap();
        let (n, m, h) = power_conjugacy(&u, &u).unwrap();
        assert_eq!((n, m), (1, 1));
        assert!(h.is_identity());
        // a² against b·a³·B bonds with (3, 2, b)
        let x = b.parse_word("aa").unwrap();
        let y = b.parse_word("baaaB").unwrap();
        let (n, m, h) = power_conjugacy(&x, &y).unwrap();
        assert_eq!((n, m), (3, 2));
        assert_eq!(x.pow(n), y.pow(m).conjugated_by(&h));
        // a against b: no bond
        assert!(power_conjugacy(
            &b.parse_word("a").unwrap(),
            &b.parse_word("b").unwrap()
        )
        .is_none());
        // opposite orientation
        let (n, m, _) = power_conjugacy(
            &b.parse_word("a").unwrap(),
            &b.parse_word("A").unwrap(),
        )
        .unwrap();
        assert_eq!((n, m), (1, -1));
    }

    #[test]
    fn bonding_signs() {
        let a = fixtures::fixture_a();
        let gog = a.gog();
        let e = gog.graph().edge("e").unwrap();
        // twistor images a and a⁻¹: negatively bonded, not positively
        assert!(!positively_bonded(&a, e, e.bar()).unwrap());
        assert!(negatively_bonded(&a, e, e.bar()).unwrap());

        let p = fixtures::fixture_free_loop();
        let pg = p.gog();
        let pe = pg.graph().edge("e").unwrap();
        // images x and y⁻¹: neither
        assert!(!positively_bonded(&p, pe, pe.bar()).unwrap());
        assert!(!negatively_bonded(&p, pe, pe.bar()).unwrap());
    }

    #[test]
    fn bonded_paths_and_loops() {
        let a = fixtures::fixture_a();
        let gog = a.gog();
        let e = gog.graph().edge("e").unwrap();
        // trivial path bonded by definition
        assert!(is_bonded_path(gog, &[]).unwrap());
        // single-edge path has no interior pair
        assert!(is_bonded_path(gog, &[e]).unwrap());
        // the single-loop fixture's loop is bonded (u_e = u_ē, conjugator 1)
        assert!(is_bonded_loop(gog, &[e]).unwrap());

        // the free-loop twist has no bonded non-trivial loop
        let p = fixtures::fixture_free_loop();
        let pg = p.gog();
        let pe = pg.graph().edge("e").unwrap();
        for edges in [vec![pe], vec![pe, pe], vec![pe, pe, pe], vec![pe.bar()]] {
            assert!(!is_bonded_loop(pg, &edges).unwrap(), "loop {edges:?}");
        }
    }

    #[test]
    fn cancellation_defect_examples() {
        let a = fixtures::fixture_a();
        let gog = a.gog();
        let w = PathWord::parse(gog, "t[e]·a·t[e]").unwrap();
        assert_eq!(cancellation_defect(gog, &[w.clone()]).unwrap(), 0);
        assert_eq!(
            cancellation_defect(gog, &[w.clone(), w.inverse()]).unwrap(),
            2 * w.path_length()
        );
    }

    #[test]
    fn efficiency_fixture_and_mutants() {
        let a = fixtures::fixture_a();
        let rep = a.check_efficient();
        assert!(rep.passed(), "{}", rep.render_text());
        assert_eq!(rep.loop_invisible.len(), 1);

        let p = fixtures::fixture_free_loop();
        assert!(p.check_efficient().passed());

        // zero twistor fails (5)
        let gog = a.gog().clone();
        let zero = DehnTwist::new(gog.clone(), vec![0, 0]).unwrap();
        let rep = zero.check_efficient();
        assert!(!rep.condition("no_unused_edge").unwrap().passed);

        // proper-power edge image fails (3)
        let mut g = crate::gog::Graph::new(&["v"]).unwrap();
        g.add_edge("e", "v", "v", Some('b')).unwrap();
        let gog2 = GraphOfGroups::builder(g)
            .vertex_group("v", Basis::new(&['a']).unwrap())
            .unwrap()
            .cyclic_edge("e", "aa", "aa")
            .unwrap()
            .build()
            .unwrap();
        let t = DehnTwist::new(gog2, vec![0, 1]).unwrap();
        assert!(!t.check_efficient().condition("no_proper_power").unwrap().passed);

        // positively bonded pair fails (4)
        let bonded = fixtures::mutant_positively_bonded();
        let rep = bonded.check_efficient();
        assert!(!rep.condition("not_positively_bonded").unwrap().passed);
    }
}
