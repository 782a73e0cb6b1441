//! Exact arithmetic on free-group words and cyclic words over a finite ordered basis.
//!
//! Letters are signed indices into a [`Basis`]: index `k` with positive sign is the
//! generator `names[k]`, negative sign its inverse. In text form inverses are written
//! uppercase (`A` = `a⁻¹`) and the trivial word is `1`. Every [`FreeWord`] is kept
//! freely reduced; every [`CyclicWord`] is cyclically reduced and stored at its least
//! rotation, so conjugacy of cyclic words is plain equality.

use std::fmt;

use num::rational::Ratio;
use thiserror::Error;

/// Exact rational used for all lengths and weights.
pub type Rational = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("trivial word has no root")]
    TrivialRoot,
    #[error("basis must be non-empty with unique single lowercase ASCII names")]
    BadBasis,
    #[error("weights must be positive")]
    BadWeight,
    #[error("unknown letter {0:?}")]
    UnknownLetter(char),
    #[error("letter index {0} out of range for basis of rank {1}")]
    LetterRange(usize, usize),
    #[error("basis map arity mismatch: {images} images for rank {rank}")]
    Arity { images: usize, rank: usize },
    #[error("not an automorphism: {0}")]
    NotAutomorphism(String),
    #[error("basis mismatch between maps")]
    BasisMismatch,
}

/// One letter of a free word: a generator index and a sign.
///
/// Encoded as a non-zero `i32`: `k+1` for generator `k`, `-(k+1)` for its inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(i32);

impl Letter {
    pub fn new(gen: usize, inverse: bool) -> Letter {
        let v = (gen as i32) + 1;
        Letter(if inverse { -v } else { v })
    }

    pub fn gen(self) -> usize {
        (self.0.unsigned_abs() as usize) - 1
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    /// Total order used for canonical rotations and lexicographic tie-breaks:
    /// all positive letters in basis order, then all inverse letters in basis order.
    fn key(self) -> (bool, usize) {
        (self.is_inverse(), self.gen())
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Letter({})", self.0)
    }
}

fn cmp_letters(a: &[Letter], b: &[Letter]) -> std::cmp::Ordering {
    let n = a.len().min(b.len());
    for i in 0..n {
        let c = a[i].key().cmp(&b[i].key());
        if c != std::cmp::Ordering::Equal {
            return c;
        }
    }
    a.len().cmp(&b.len())
}

/// Length-then-lex comparison on freely reduced words.
pub fn cmp_words(a: &FreeWord, b: &FreeWord) -> std::cmp::Ordering {
    a.len()
        .cmp(&b.len())
        .then_with(|| cmp_letters(a.letters(), b.letters()))
}

/// An ordered free basis with positive rational weights (default 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    names: Vec<char>,
    weights: Vec<Rational>,
}

impl Basis {
    /// Non-empty basis with unit weights. Names must be distinct lowercase ASCII letters.
    pub fn new(names: &[char]) -> Result<Basis, WordError> {
        if names.is_empty() {
            return Err(WordError::BadBasis);
        }
        Basis::from_names(names)
    }

    /// The basis of the trivial group. Permitted for vertex groups only.
    pub fn empty() -> Basis {
        Basis {
            names: Vec::new(),
            weights: Vec::new(),
        }
    }

    fn from_names(names: &[char]) -> Result<Basis, WordError> {
        for (i, &c) in names.iter().enumerate() {
            if !c.is_ascii_lowercase() || names[..i].contains(&c) {
                return Err(WordError::BadBasis);
            }
        }
        Ok(Basis {
            names: names.to_vec(),
            weights: vec![Rational::from_integer(1); names.len()],
        })
    }

    pub fn with_weights(names: &[char], weights: &[Rational]) -> Result<Basis, WordError> {
        let mut b = Basis::new(names)?;
        if weights.len() != names.len() {
            return Err(WordError::BadBasis);
        }
        if weights.iter().any(|w| *w <= Rational::from_integer(0)) {
            return Err(WordError::BadWeight);
        }
        b.weights = weights.to_vec();
        Ok(b)
    }

    /// Possibly-empty basis; markings of trivial groups need rank zero.
    pub(crate) fn from_parts(names: &[char], weights: &[Rational]) -> Result<Basis, WordError> {
        if names.is_empty() {
            return Ok(Basis::empty());
        }
        Basis::with_weights(names, weights)
    }

    pub fn set_weight(&mut self, name: char, w: Rational) -> Result<(), WordError> {
        if w <= Rational::from_integer(0) {
            return Err(WordError::BadWeight);
        }
        let i = self.index_of(name)?;
        self.weights[i] = w;
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[char] {
        &self.names
    }

    pub fn name(&self, gen: usize) -> char {
        self.names[gen]
    }

    pub fn weight(&self, gen: usize) -> Rational {
        self.weights[gen]
    }

    pub fn index_of(&self, name: char) -> Result<usize, WordError> {
        self.names
            .iter()
            .position(|&c| c == name)
            .ok_or(WordError::UnknownLetter(name))
    }

    pub fn contains(&self, name: char) -> bool {
        self.names.contains(&name)
    }

    /// Parse the text form: concatenated letter names, uppercase for inverses, `1` for
    /// the trivial word.
    pub fn parse_word(&self, text: &str) -> Result<FreeWord, WordError> {
        let t = text.trim();
        if t == "1" || t.is_empty() {
            return Ok(FreeWord::identity());
        }
        let mut letters = Vec::with_capacity(t.len());
        for c in t.chars() {
            let lower = c.to_ascii_lowercase();
            let gen = self.index_of(lower)?;
            letters.push(Letter::new(gen, c.is_ascii_uppercase()));
        }
        Ok(FreeWord::from_letters(letters))
    }

    pub fn render_word(&self, w: &FreeWord) -> String {
        if w.is_identity() {
            return "1".to_string();
        }
        w.letters()
            .iter()
            .map(|l| {
                let c = self.names[l.gen()];
                if l.is_inverse() {
                    c.to_ascii_uppercase()
                } else {
                    c
                }
            })
            .collect()
    }

    pub fn render_cyclic(&self, w: &CyclicWord) -> String {
        self.render_word(&FreeWord {
            letters: w.letters.clone(),
        })
    }

    /// Identity automorphism of this basis.
    pub fn identity_map(&self) -> BasisMap {
        let images = (0..self.rank())
            .map(|g| FreeWord::generator(g))
            .collect();
        BasisMap {
            source: self.clone(),
            target: self.clone(),
            images,
        }
    }
}

/// A freely reduced word in a free group.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FreeWord {
    letters: Vec<Letter>,
}

impl fmt::Debug for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FreeWord[")?;
        for l in &self.letters {
            let c = (b'a' + (l.gen() % 26) as u8) as char;
            write!(f, "{}", if l.is_inverse() { c.to_ascii_uppercase() } else { c })?;
        }
        write!(f, "]")
    }
}

impl FreeWord {
    pub fn identity() -> FreeWord {
        FreeWord { letters: Vec::new() }
    }

    pub fn generator(gen: usize) -> FreeWord {
        FreeWord {
            letters: vec![Letter::new(gen, false)],
        }
    }

    /// Builds a word from arbitrary letters, freely reducing.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> FreeWord {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        FreeWord { letters: out }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn concat(&self, other: &FreeWord) -> FreeWord {
        concat_reduce(self, other)
    }

    pub fn pow(&self, k: i64) -> FreeWord {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = FreeWord::identity();
        for _ in 0..k.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    /// `g·w·g⁻¹`.
    pub fn conjugated_by(&self, g: &FreeWord) -> FreeWord {
        g.concat(self).concat(&g.inverse())
    }

    pub fn max_gen(&self) -> Option<usize> {
        self.letters.iter().map(|l| l.gen()).max()
    }
}

/// Freely reduced concatenation.
pub fn concat_reduce(u: &FreeWord, v: &FreeWord) -> FreeWord {
    let mut out = u.letters.clone();
    for &l in &v.letters {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    FreeWord { letters: out }
}

/// A cyclically reduced word stored at its least rotation, representing a conjugacy class.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CyclicWord {
    letters: Vec<Letter>,
}

impl CyclicWord {
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Any representative free word (the stored rotation).
    pub fn to_free(&self) -> FreeWord {
        FreeWord {
            letters: self.letters.clone(),
        }
    }

    pub fn inverse(&self) -> CyclicWord {
        let inv: Vec<Letter> = self.letters.iter().rev().map(|l| l.inverse()).collect();
        CyclicWord {
            letters: least_rotation(&inv),
        }
    }

    /// Smallest period `d` dividing the length such that the word is a `d`-periodic
    /// cyclic word, together with the multiplicity `len/d`.
    pub fn primitive_root(&self) -> Option<(CyclicWord, u32)> {
        let n = self.letters.len();
        if n == 0 {
            return None;
        }
        for d in 1..=n {
            if n % d != 0 {
                continue;
            }
            if (d..n).all(|i| self.letters[i] == self.letters[i - d]) {
                let root = CyclicWord {
                    letters: least_rotation(&self.letters[..d]),
                };
                return Some((root, (n / d) as u32));
            }
        }
        unreachable!("period n always matches")
    }

    /// Cyclic power; exponent sign inverts.
    pub fn pow(&self, k: i64) -> CyclicWord {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut letters = Vec::with_capacity(base.len() * k.unsigned_abs() as usize);
        for _ in 0..k.unsigned_abs() {
            letters.extend_from_slice(&base.letters);
        }
        CyclicWord {
            letters: least_rotation(&letters),
        }
    }
}

/// Booth-style least rotation under the letter order of [`Letter::key`].
fn least_rotation(letters: &[Letter]) -> Vec<Letter> {
    let n = letters.len();
    if n == 0 {
        return Vec::new();
    }
    let mut best = 0usize;
    for cand in 1..n {
        for k in 0..n {
            let a = letters[(best + k) % n].key();
            let b = letters[(cand + k) % n].key();
            match b.cmp(&a) {
                std::cmp::Ordering::Less => {
                    best = cand;
                    break;
                }
                std::cmp::Ordering::Greater => break,
                std::cmp::Ordering::Equal => {}
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&letters[best..]);
    out.extend_from_slice(&letters[..best]);
    out
}

/// Cyclic reduction: returns the cyclically reduced core (canonical rotation) and a
/// conjugator with `w = conjugator · core · conjugator⁻¹`.
pub fn cyclic_reduce(w: &FreeWord) -> (CyclicWord, FreeWord) {
    let letters = &w.letters;
    let mut lo = 0usize;
    let mut hi = letters.len();
    while hi - lo >= 2 && letters[lo] == letters[hi - 1].inverse() {
        lo += 1;
        hi -= 1;
    }
    let core = &letters[lo..hi];
    // account for the rotation to the canonical representative
    let n = core.len();
    let canonical = least_rotation(core);
    let mut offset = 0usize;
    if n > 0 {
        for r in 0..n {
            if (0..n).all(|k| core[(r + k) % n] == canonical[k]) {
                offset = r;
                break;
            }
        }
    }
    let mut conj = letters[..lo].to_vec();
    conj.extend_from_slice(&core[..offset]);
    (
        CyclicWord { letters: canonical },
        FreeWord { letters: conj },
    )
}

/// Weighted length of a cyclic word: the sum of the weights of its letters.
pub fn weighted_length(w: &CyclicWord, basis: &Basis) -> Rational {
    w.letters
        .iter()
        .map(|l| basis.weight(l.gen()))
        .sum()
}

/// Unit-weight cyclic length of an arbitrary word.
pub fn cyclic_length(w: &FreeWord) -> usize {
    let (core, _) = cyclic_reduce(w);
    core.len()
}

/// Word-level primitive root: the shortest prefix `r` with `w = r^p`, found by trying
/// all divisor period lengths.
pub fn primitive_root(w: &FreeWord) -> Result<(FreeWord, u32), WordError> {
    let n = w.len();
    if n == 0 {
        return Err(WordError::TrivialRoot);
    }
    for d in 1..=n {
        if n % d != 0 {
            continue;
        }
        if (d..n).all(|i| w.letters[i] == w.letters[i - d]) {
            return Ok((
                FreeWord {
                    letters: w.letters[..d].to_vec(),
                },
                (n / d) as u32,
            ));
        }
    }
    unreachable!()
}

/// Returns `g` with `w = g·u·g⁻¹` iff the cyclic cores of `u` and `w` are rotations of
/// each other.
pub fn conjugacy_witness(u: &FreeWord, w: &FreeWord) -> Option<FreeWord> {
    let (cu, pu) = cyclic_reduce(u);
    let (cw, pw) = cyclic_reduce(w);
    if cu != cw {
        return None;
    }
    // u = pu·C·pu⁻¹ and w = pw·C·pw⁻¹ for the common canonical core C
    let g = pw.concat(&pu.inverse());
    debug_assert_eq!(u.conjugated_by(&g), *w);
    Some(g)
}

/// Returns `k` with `w = u^k` (0 allowed for trivial `w`, negative allowed), or `None`.
/// Requires `u` non-trivial.
pub fn cyclic_subgroup_member(w: &FreeWord, u: &FreeWord) -> Option<i64> {
    assert!(!u.is_identity(), "cyclic_subgroup_member: trivial generator");
    if w.is_identity() {
        return Some(0);
    }
    for sign in [1i64, -1] {
        let step = if sign > 0 { u.clone() } else { u.inverse() };
        let mut p = FreeWord::identity();
        let mut k = 0i64;
        loop {
            p = p.concat(&step);
            k += 1;
            if p == *w {
                return Some(sign * k);
            }
            if p.len() >= w.len() && p != *w {
                // powers of a non-trivial word grow monotonically past |w|
                if p.len() > w.len() {
                    break;
                }
            }
        }
    }
    None
}

/// A homomorphism between free groups given by the images of every source generator.
///
/// For automorphisms the inverse is constructed by Nielsen reduction and verified by
/// composition; construction fails otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisMap {
    source: Basis,
    target: Basis,
    images: Vec<FreeWord>,
}

impl BasisMap {
    pub fn new(source: Basis, target: Basis, images: Vec<FreeWord>) -> Result<BasisMap, WordError> {
        if images.len() != source.rank() {
            return Err(WordError::Arity {
                images: images.len(),
                rank: source.rank(),
            });
        }
        for im in &images {
            if let Some(g) = im.max_gen() {
                if g >= target.rank() {
                    return Err(WordError::LetterRange(g, target.rank()));
                }
            }
        }
        Ok(BasisMap {
            source,
            target,
            images,
        })
    }

    /// An automorphism of `basis`; fails unless the images form a basis (checked by
    /// constructing and verifying the inverse).
    pub fn automorphism(basis: Basis, images: Vec<FreeWord>) -> Result<BasisMap, WordError> {
        let map = BasisMap::new(basis.clone(), basis, images)?;
        map.inverse()?;
        Ok(map)
    }

    pub fn source(&self) -> &Basis {
        &self.source
    }

    pub fn target(&self) -> &Basis {
        &self.target
    }

    pub fn images(&self) -> &[FreeWord] {
        &self.images
    }

    pub fn image_of(&self, gen: usize) -> &FreeWord {
        &self.images[gen]
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target
            && self
                .images
                .iter()
                .enumerate()
                .all(|(g, im)| *im == FreeWord::generator(g))
    }

    pub fn apply(&self, w: &FreeWord) -> FreeWord {
        let mut out = FreeWord::identity();
        for l in w.letters() {
            let im = &self.images[l.gen()];
            if l.is_inverse() {
                out = out.concat(&im.inverse());
            } else {
                out = out.concat(im);
            }
        }
        out
    }

    /// `other ∘ self` (apply `self` first).
    pub fn then(&self, other: &BasisMap) -> Result<BasisMap, WordError> {
        if self.target != other.source {
            return Err(WordError::BasisMismatch);
        }
        let images = self.images.iter().map(|im| other.apply(im)).collect();
        BasisMap::new(self.source.clone(), other.target.clone(), images)
    }

    /// Inverse isomorphism, via Nielsen reduction of the image tuple. Errors when the
    /// images do not form a basis of the target.
    pub fn inverse(&self) -> Result<BasisMap, WordError> {
        if self.source.rank() != self.target.rank() {
            return Err(WordError::NotAutomorphism(
                "rank mismatch between source and target".into(),
            ));
        }
        let n = self.source.rank();
        if n == 0 {
            return BasisMap::new(self.target.clone(), self.source.clone(), Vec::new());
        }
        // state: u[i] ∈ target expressed, v[i] ∈ source with u[i] = self(v[i])
        let mut u: Vec<FreeWord> = self.images.clone();
        let mut v: Vec<FreeWord> = (0..n).map(FreeWord::generator).collect();
        if u.iter().any(|w| w.is_identity()) {
            return Err(WordError::NotAutomorphism("a generator maps to 1".into()));
        }

        let tuple_key = |u: &[FreeWord]| -> (usize, Vec<Letter>) {
            let total = u.iter().map(|w| w.len()).sum();
            let mut flat = Vec::new();
            for w in u {
                flat.extend_from_slice(w.letters());
            }
            (total, flat)
        };

        loop {
            let current = tuple_key(&u);
            let mut improved = false;
            'search: for i in 0..n {
                // candidate replacements for u[i]
                let mut cands: Vec<(FreeWord, FreeWord)> =
                    vec![(u[i].inverse(), v[i].inverse())];
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    for inv in [false, true] {
                        let (uj, vj) = if inv {
                            (u[j].inverse(), v[j].inverse())
                        } else {
                            (u[j].clone(), v[j].clone())
                        };
                        cands.push((uj.concat(&u[i]), vj.concat(&v[i])));
                        cands.push((u[i].concat(&uj), v[i].concat(&vj)));
                    }
                }
                for (cu, cv) in cands {
                    if cu.is_identity() {
                        return Err(WordError::NotAutomorphism(
                            "images satisfy a relation".into(),
                        ));
                    }
                    let mut trial = u.clone();
                    trial[i] = cu.clone();
                    let key = tuple_key(&trial);
                    if key.0 < current.0
                        || (key.0 == current.0
                            && cmp_letters(&key.1, &current.1) == std::cmp::Ordering::Less)
                    {
                        u[i] = cu;
                        v[i] = cv;
                        improved = true;
                        break 'search;
                    }
                }
            }
            if !improved {
                break;
            }
        }

        // success iff the tuple is a permuted, possibly inverted, standard basis
        let mut inverse_images: Vec<Option<FreeWord>> = vec![None; n];
        for i in 0..n {
            if u[i].len() != 1 {
                return Err(WordError::NotAutomorphism(format!(
                    "Nielsen reduction stalled with total length {}",
                    u.iter().map(|w| w.len()).sum::<usize>()
                )));
            }
            let l = u[i].letters()[0];
            let img = if l.is_inverse() {
                v[i].inverse()
            } else {
                v[i].clone()
            };
            if inverse_images[l.gen()].replace(img).is_some() {
                return Err(WordError::NotAutomorphism(
                    "two generators reduce to the same letter".into(),
                ));
            }
        }
        let inv = BasisMap::new(
            self.target.clone(),
            self.source.clone(),
            inverse_images.into_iter().map(|o| o.unwrap()).collect(),
        )?;
        // verify composition = identity on generators
        for g in 0..n {
            if inv.apply(&self.images[g]) != FreeWord::generator(g) {
                return Err(WordError::NotAutomorphism(
                    "inverse verification failed".into(),
                ));
            }
        }
        Ok(inv)
    }
}

/// Searches for `g` with `psi(x) = g·phi(x)·g⁻¹` for every generator `x`.
///
/// A candidate conjugator must conjugate `phi(a₁)` to `psi(a₁)`, so it lies in
/// `g₀·⟨root(phi(a₁))⟩`; the exponent is bounded by the word lengths of the remaining
/// generator images.
pub fn inner_difference(phi: &BasisMap, psi: &BasisMap) -> Result<Option<FreeWord>, WordError> {
    if phi.source != psi.source || phi.target != psi.target || phi.source != phi.target {
        return Err(WordError::BasisMismatch);
    }
    // automorphism check (errors on non-bijective input)
    phi.inverse()?;
    psi.inverse()?;
    let n = phi.source.rank();
    if n == 0 {
        return Ok(Some(FreeWord::identity()));
    }
    if n == 1 {
        // conjugation is trivial in rank one
        return Ok((phi.images == psi.images).then(FreeWord::identity));
    }
    let g0 = match conjugacy_witness(&phi.images[0], &psi.images[0]) {
        Some(g) => g,
        None => return Ok(None),
    };
    let (root, _) = primitive_root(&phi.images[0])?;
    let check = |g: &FreeWord| {
        (0..n).all(|i| phi.images[i].conjugated_by(g) == psi.images[i])
    };
    let bound = (1..n)
        .map(|j| (g0.len() + psi.images[j].len() + phi.images[j].len() + 4) as i64)
        .min()
        .unwrap_or(4);
    for k in 0..=bound {
        for s in [1i64, -1] {
            if k == 0 && s < 0 {
                continue;
            }
            let g = g0.concat(&root.pow(s * k));
            if check(&g) {
                return Ok(Some(g));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b2() -> Basis {
        Basis::new(&['a', 'b']).unwrap()
    }

    fn w(basis: &Basis, t: &str) -> FreeWord {
        basis.parse_word(t).unwrap()
    }

    #[test]
    fn concat_reduce_examples() {
        let b = b2();
        assert_eq!(w(&b, "ab").concat(&w(&b, "BA")), FreeWord::identity());
        assert_eq!(b.render_word(&w(&b, "ab").concat(&w(&b, "ba"))), "abba");
        let b3 = Basis::new(&['a', 'b', 'c']).unwrap();
        assert_eq!(
            b3.render_word(&w(&b3, "abB").concat(&w(&b3, "Ac"))),
            "c"
        );
    }

    #[test]
    fn concat_matches_stack_oracle() {
        // independent stack-based reduction over raw letter streams
        let b = Basis::new(&['a', 'b', 'c']).unwrap();
        let cases = [("abB", "Ac"), ("aBc", "Cba"), ("", "a"), ("abc", "CBA")];
        for (s, t) in cases {
            let mut stack: Vec<Letter> = Vec::new();
            for src in [s, t] {
                for ch in src.chars() {
                    let l = Letter::new(
                        b.index_of(ch.to_ascii_lowercase()).unwrap(),
                        ch.is_ascii_uppercase(),
                    );
                    if stack.last() == Some(&l.inverse()) {
                        stack.pop();
                    } else {
                        stack.push(l);
                    }
                }
            }
            let expect = FreeWord::from_letters(stack);
            assert_eq!(w(&b, s).concat(&w(&b, t)), expect, "case {s}·{t}");
        }
    }

    #[test]
    fn cyclic_reduce_examples() {
        let b = b2();
        let (core, conj) = cyclic_reduce(&w(&b, "Bab"));
        assert_eq!(b.render_cyclic(&core), "a");
        assert_eq!(b.render_word(&conj), "B");

        let (core, conj) = cyclic_reduce(&w(&b, "ab"));
        assert_eq!(core.len(), 2);
        assert!(conj.is_identity());

        // round trip on a messier input
        let input = w(&b, "ABabba");
        let (core, conj) = cyclic_reduce(&input);
        let back = conj.concat(&core.to_free()).concat(&conj.inverse());
        assert_eq!(back, input);
        // brute force: minimal cyclic length over all prefix conjugations
        let mut min_len = input.len();
        for cut in 0..=input.len() {
            let p = FreeWord::from_letters(input.letters()[..cut].to_vec());
            let c = p.inverse().concat(&input).concat(&p);
            min_len = min_len.min(cyclic_length(&c));
        }
        assert_eq!(core.len(), min_len);
    }

    #[test]
    fn weighted_length_examples() {
        let mut b = b2();
        let (core, _) = cyclic_reduce(&w(&b, "ab"));
        assert_eq!(weighted_length(&core, &b), Rational::from_integer(2));
        let (empty, _) = cyclic_reduce(&FreeWord::identity());
        assert_eq!(weighted_length(&empty, &b), Rational::from_integer(0));

        b.set_weight('a', Rational::new(1, 2)).unwrap();
        b.set_weight('b', Rational::from_integer(3)).unwrap();
        let (core, _) = cyclic_reduce(&w(&b, "aab"));
        assert_eq!(weighted_length(&core, &b), Rational::from_integer(4));
    }

    #[test]
    fn primitive_root_examples() {
        let b = b2();
        let (r, p) = primitive_root(&w(&b, "abab")).unwrap();
        assert_eq!((b.render_word(&r), p), ("ab".into(), 2));
        let (r, p) = primitive_root(&w(&b, "a")).unwrap();
        assert_eq!((b.render_word(&r), p), ("a".into(), 1));
        let (r, p) = primitive_root(&w(&b, "abaaba")).unwrap();
        assert_eq!((b.render_word(&r), p), ("aba".into(), 2));
        assert!(primitive_root(&FreeWord::identity()).is_err());
    }

    #[test]
    fn conjugacy_witness_examples() {
        let b = b2();
        let u = w(&b, "ab");
        let v = w(&b, "ba");
        let g = conjugacy_witness(&u, &v).unwrap();
        assert_eq!(u.conjugated_by(&g), v);
        assert!(conjugacy_witness(&w(&b, "a"), &w(&b, "b")).is_none());

        let u = w(&b, "aab");
        let v = u.conjugated_by(&w(&b, "B"));
        let g = conjugacy_witness(&u, &v).unwrap();
        assert_eq!(u.conjugated_by(&g), v);
    }

    #[test]
    fn cyclic_subgroup_member_examples() {
        let b = b2();
        assert_eq!(cyclic_subgroup_member(&w(&b, "aa"), &w(&b, "a")), Some(2));
        assert_eq!(
            cyclic_subgroup_member(&FreeWord::identity(), &w(&b, "ab")),
            Some(0)
        );
        assert_eq!(
            cyclic_subgroup_member(&w(&b, "BABA"), &w(&b, "ab")),
            Some(-2)
        );
        assert_eq!(cyclic_subgroup_member(&w(&b, "aab"), &w(&b, "ab")), None);
        // non-cyclically-reduced generator
        let u = w(&b, "baB");
        assert_eq!(cyclic_subgroup_member(&u.pow(3), &u), Some(3));
    }

    #[test]
    fn automorphism_inverse() {
        let b = b2();
        let phi = BasisMap::automorphism(b.clone(), vec![w(&b, "a"), w(&b, "ba")]).unwrap();
        let inv = phi.inverse().unwrap();
        assert_eq!(inv.apply(&w(&b, "ba")), w(&b, "b"));
        for g in 0..2 {
            assert_eq!(inv.apply(&phi.apply(&FreeWord::generator(g))), FreeWord::generator(g));
        }
        // not an automorphism: images generate a proper subgroup
        assert!(BasisMap::automorphism(b.clone(), vec![w(&b, "ab"), w(&b, "ba")]).is_err());
    }

    #[test]
    fn inner_difference_examples() {
        let b = b2();
        let id = b.identity_map();
        assert_eq!(inner_difference(&id, &id).unwrap(), Some(FreeWord::identity()));

        let ad_a = BasisMap::automorphism(
            b.clone(),
            vec![w(&b, "a"), w(&b, "abA")],
        )
        .unwrap();
        let g = inner_difference(&id, &ad_a).unwrap().unwrap();
        assert_eq!(w(&b, "b").conjugated_by(&g), w(&b, "abA"));

        let phi = BasisMap::automorphism(b.clone(), vec![w(&b, "a"), w(&b, "ba")]).unwrap();
        let psi = BasisMap::automorphism(b.clone(), vec![w(&b, "a"), w(&b, "abaA")]).unwrap();
        let g = inner_difference(&phi, &psi).unwrap().unwrap();
        for i in 0..2 {
            assert_eq!(phi.images()[i].conjugated_by(&g), psi.images()[i]);
        }

        // brute-force cross-check over all conjugators of length ≤ 3
        let mut found = None;
        let letters: Vec<FreeWord> = vec![w(&b, "a"), w(&b, "A"), w(&b, "b"), w(&b, "B")];
        let mut frontier = vec![FreeWord::identity()];
        'outer: for _ in 0..=3 {
            for cand in &frontier {
                if (0..2).all(|i| phi.images()[i].conjugated_by(cand) == psi.images()[i]) {
                    found = Some(cand.clone());
                    break 'outer;
                }
            }
            let mut next = Vec::new();
            for f in &frontier {
                for l in &letters {
                    let g = f.concat(l);
                    if g.len() > f.len() {
                        next.push(g);
                    }
                }
            }
            frontier = next;
        }
        let brute = found.expect("brute force finds a witness");
        assert_eq!(phi.images()[0].conjugated_by(&brute), psi.images()[0]);
    }
}
