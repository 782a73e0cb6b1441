//! Growth analysis: iterated conjugacy-length tables, the quadratic-coefficient
//! prediction for cyclically reduced words under a 2-level twist, the boundary simplex
//! limit point, and cancellation probes for iterated twist products.
//!
//! Everything is exact rational; reports carry both the raw ratio at `t_max` and a
//! Richardson extrapolation over the last three octaves `(t, t/2, t/4)`, which removes
//! the linear and constant parts of a quadratic-plus-lower-order sequence:
//! `C = 8·(f(t) − 3·f(t/2) + 2·f(t/4)) / (3t²)`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dehn::DehnTwist;
use crate::gog::{EdgeId, GogError, PathWord};
use crate::marking::MarkingError;
use crate::morphism::MorphismError;
use crate::twisted::{d_length, TwistedError};
use crate::two_level::{TwoLevelError, TwoLevelTwist};
use crate::words::{cyclic_reduce, weighted_length, Basis, BasisMap, FreeWord, Rational, WordError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrowthError {
    #[error("class word uses letters outside the marking basis")]
    BadClass,
    #[error("t_max must be at least 4 for extrapolation")]
    TooShort,
    #[error("word error: {0}")]
    Word(#[from] WordError),
    #[error("gog error: {0}")]
    Gog(#[from] GogError),
    #[error("marking error: {0}")]
    Marking(#[from] MarkingError),
    #[error("morphism error: {0}")]
    Morphism(#[from] MorphismError),
    #[error("twisted error: {0}")]
    Twisted(#[from] TwistedError),
    #[error("two-level error: {0}")]
    TwoLevel(#[from] TwoLevelError),
}

/// Weighted cyclic lengths `t ↦ ‖φ^t([g])‖` for `0 ≤ t ≤ t_max`.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthTable {
    pub class: String,
    pub lengths: Vec<Rational>,
    pub length_function: String,
}

impl GrowthTable {
    pub fn ratio(&self, t: usize) -> Rational {
        assert!(t >= 1);
        self.lengths[t] / Rational::from_integer((t * t) as i64)
    }

    /// Richardson extrapolation on the last three octaves.
    pub fn extrapolated_coefficient(&self) -> Option<Rational> {
        let t = self.lengths.len() - 1;
        if t < 4 || t % 4 != 0 {
            return None;
        }
        let f = |k: usize| self.lengths[k];
        let num = f(t) - Rational::from_integer(3) * f(t / 2)
            + Rational::from_integer(2) * f(t / 4);
        Some(Rational::from_integer(8) * num / (Rational::from_integer(3 * (t * t) as i64)))
    }

    /// CSV: header, then `t,length,ratio` rows with exact rationals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,length,ratio\n");
        for (t, len) in self.lengths.iter().enumerate() {
            let ratio = if t == 0 {
                String::new()
            } else {
                format_rational(&self.ratio(t))
            };
            out.push_str(&format!("{t},{},{ratio}\n", format_rational(len)));
        }
        out
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with fixed precision, exact-rational input (reports only).
pub fn rational_to_decimal(r: &Rational, digits: u32) -> String {
    let scale = 10i64.pow(digits);
    let scaled = (*r * Rational::from_integer(scale)).round();
    let v = scaled.to_integer();
    let sign = if v < 0 { "-" } else { "" };
    let v = v.abs();
    format!("{sign}{}.{:0width$}", v / scale, v % scale, width = digits as usize)
}

/// Exact weighted cyclic lengths of `φ^t(g)` for `0 ≤ t ≤ t_max`.
pub fn growth_table(
    phi: &BasisMap,
    g: &FreeWord,
    t_max: usize,
    basis: &Basis,
    class_name: &str,
) -> Result<GrowthTable, GrowthError> {
    if let Some(top) = g.max_gen() {
        if top >= basis.rank() || basis.rank() != phi.source().rank() {
            return Err(GrowthError::BadClass);
        }
    }
    let mut lengths = Vec::with_capacity(t_max + 1);
    let mut w = g.clone();
    for t in 0..=t_max {
        let (core, _) = cyclic_reduce(&w);
        lengths.push(weighted_length(&core, basis));
        if t < t_max {
            w = phi.apply(&w);
        }
    }
    Ok(GrowthTable {
        class: class_name.to_string(),
        lengths,
        length_function: "weighted cyclic length".into(),
    })
}

/// Sum over the stable letters of a cyclically reduced closed word of the d-lengths
/// of both orientations' corrections; on an efficient twist the locally zero side
/// contributes 0, so this is the d-length of the non-zero side per stable letter.
pub fn predicted_quadratic_coefficient(
    t: &TwoLevelTwist,
    w: &PathWord,
    weights: &Basis,
) -> Result<(Rational, Option<String>), GrowthError> {
    let gog = t.top_gog();
    let (core, _) = gog.cyclically_reduce(w)?;
    let mut sum = Rational::from_integer(0);
    for e in core.edges() {
        for side in [e, e.bar()] {
            let v = t.top_graph().terminal(side);
            let local = t.local(v);
            sum += d_length_in_rose(t, side, local, weights)?;
        }
    }
    let warning = if t.check_efficient(16).passed() {
        None
    } else {
        Some("efficiency precondition unverified; prediction assumes it".to_string())
    };
    Ok((sum, warning))
}

/// The d-length of `δ*(E)` under the local twist of `τ(E)`, with twistor lengths
/// measured in the given rose weights.
fn d_length_in_rose(
    t: &TwoLevelTwist,
    e: EdgeId,
    local: &crate::two_level::LocalData,
    weights: &Basis,
) -> Result<Rational, GrowthError> {
    // weights resolve by letter name; local vertex letters are top letters
    Ok(d_length(t.delta_star(e), &local.twist, weights)?)
}

/// The limit of `|𝒟^{(t)}(g)|/t²`: half the twistor-length sum along the loop of the
/// reduced representative; equals the d-length of the class.
pub fn local_quadratic_limit(
    d: &DehnTwist,
    w: &PathWord,
    weights: &Basis,
) -> Result<Rational, GrowthError> {
    Ok(d_length(w, d, weights)?)
}

/// Projectivized edge-length vector in the boundary simplex: one positive coordinate
/// per forward edge.
#[derive(Clone, Debug, Serialize)]
pub struct SimplexPoint {
    /// Edge name → raw coordinate (d-length of the forward correction).
    pub raw: Vec<(String, Rational)>,
    /// Same coordinates normalized to sum 1.
    pub projective: Vec<(String, Rational)>,
}

/// The limit point of the twist orbit on the boundary simplex: coordinate at each
/// forward edge `E` is the d-length of `δ*(E)` in the rose metric. All coordinates
/// are strictly positive for efficient input.
pub fn limit_point(
    t: &TwoLevelTwist,
    rose: &Basis,
    radius: usize,
) -> Result<(SimplexPoint, Option<String>), GrowthError> {
    let forward = t.forward_orientation(radius)?;
    let g = t.top_graph();
    let mut raw = Vec::new();
    let mut total = Rational::from_integer(0);
    for e in &forward {
        let v = g.terminal(*e);
        let coord = d_length_in_rose(t, *e, t.local(v), rose)?;
        total += coord;
        raw.push((g.edge_name(*e).to_string(), coord));
    }
    let projective = raw
        .iter()
        .map(|(n, c)| (n.clone(), *c / total))
        .collect();
    let report = t.check_efficient(radius);
    let warning = if report.passed() {
        None
    } else {
        Some(report.render_text())
    };
    Ok((SimplexPoint { raw, projective }, warning))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergeRow {
    pub class: String,
    pub predicted: Rational,
    pub ratio_at_tmax: Rational,
    pub extrapolated: Option<Rational>,
    /// |ratio − predicted| / predicted, as a rational (0 when predicted = 0).
    pub relative_deviation: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergeReport {
    pub t_max: usize,
    pub rows: Vec<ConvergeRow>,
    pub max_relative_deviation: Rational,
    /// Measured length vector at t_max, projectivized over the classes, against the
    /// projectivized prediction.
    pub projective_measured: Vec<Rational>,
    pub projective_predicted: Vec<Rational>,
    pub max_projective_deviation: Rational,
}

/// For each class, the growth sequence against the predicted coefficient. Tables for
/// distinct classes are computed in parallel; results are deterministic.
pub fn converge_probe(
    t: &TwoLevelTwist,
    rose: &Basis,
    classes: &[FreeWord],
    t_max: usize,
) -> Result<ConvergeReport, GrowthError> {
    if t_max < 4 {
        return Err(GrowthError::TooShort);
    }
    let phi = t.marking_automorphism()?;
    let marking = crate::marking::Marking::canonical(t.top_gog(), crate::gog::VertexId(0))?;
    let rows: Vec<ConvergeRow> = classes
        .par_iter()
        .map(|g| -> Result<ConvergeRow, GrowthError> {
            let name = rose.render_word(g);
            let table = growth_table(&phi, g, t_max, rose, &name)?;
            let path = marking.from_basis(t.top_gog(), g)?;
            let (predicted, _) = predicted_quadratic_coefficient(t, &path, rose)?;
            let ratio = table.ratio(t_max);
            let dev = if predicted == Rational::from_integer(0) {
                ratio
            } else {
                let d = ratio - predicted;
                let d = if d < Rational::from_integer(0) { -d } else { d };
                d / predicted
            };
            Ok(ConvergeRow {
                class: name,
                predicted,
                ratio_at_tmax: ratio,
                extrapolated: table.extrapolated_coefficient(),
                relative_deviation: dev,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let max_relative_deviation = rows
        .iter()
        .map(|r| r.relative_deviation)
        .max()
        .unwrap_or_else(|| Rational::from_integer(0));
    // projective comparison of the measured and predicted vectors
    let measured: Vec<Rational> = rows.iter().map(|r| r.ratio_at_tmax).collect();
    let predicted: Vec<Rational> = rows.iter().map(|r| r.predicted).collect();
    let normalize = |v: &[Rational]| -> Vec<Rational> {
        let s: Rational = v.iter().cloned().sum();
        if s == Rational::from_integer(0) {
            v.to_vec()
        } else {
            v.iter().map(|x| *x / s).collect()
        }
    };
    let pm = normalize(&measured);
    let pp = normalize(&predicted);
    let max_projective_deviation = pm
        .iter()
        .zip(&pp)
        .map(|(a, b)| {
            let d = *a - *b;
            if d < Rational::from_integer(0) {
                -d
            } else {
                d
            }
        })
        .max()
        .unwrap_or_else(|| Rational::from_integer(0));
    Ok(ConvergeReport {
        t_max,
        rows,
        max_relative_deviation,
        projective_measured: pm,
        projective_predicted: pp,
        max_projective_deviation,
    })
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub enum CancellationClass {
    Bounded,
    Unbounded,
}

#[derive(Clone, Debug, Serialize)]
pub struct CancellationReport {
    pub defects: Vec<usize>, // index t, 1 ≤ t ≤ t_max
    pub classification: CancellationClass,
    pub tail_constant: Option<usize>,
}

/// Path-length cancellation defect of `D^{(t)}(W₁) · D^t(U) · (D^{(t)}(W₂))⁻¹` for
/// `1 ≤ t ≤ t_max`; bounded iff twisted-conjugacy of `W₁` and `W₂` fails, and then
/// the tail is constant.
pub fn cancellation_probe(
    d: &DehnTwist,
    w1: &PathWord,
    w2: &PathWord,
    u: &PathWord,
    t_max: usize,
) -> Result<CancellationReport, GrowthError> {
    let gog = d.gog();
    let h = d.as_morphism();
    let mut defects = Vec::with_capacity(t_max);
    // running values: X_t = D^t(W_i), P_t = D^{(t)}(W_i) = P_{t-1} · X_{t-1}
    let mut x1 = gog.reduce(w1)?;
    let mut x2 = gog.reduce(w2)?;
    let mut u_t = gog.reduce(u)?;
    let mut p1 = x1.clone();
    let mut p2 = x2.clone();
    for t in 1..=t_max {
        u_t = if t == 1 { u_t } else { h.apply(&u_t)? };
        let total = p1.path_length() + u_t.path_length() + p2.path_length();
        let prod = gog.compose(&gog.compose(&p1, &u_t)?, &p2.inverse())?;
        defects.push(total - prod.path_length());
        if t < t_max {
            x1 = h.apply(&x1)?;
            x2 = h.apply(&x2)?;
            p1 = gog.compose(&p1, &x1)?;
            p2 = gog.compose(&p2, &x2)?;
        }
    }
    // bounded iff the defect is constant over the last half of the range
    let half = t_max / 2;
    let tail = &defects[half.saturating_sub(1)..];
    let constant = tail.windows(2).all(|w| w[0] == w[1]);
    Ok(CancellationReport {
        classification: if constant {
            CancellationClass::Bounded
        } else {
            CancellationClass::Unbounded
        },
        tail_constant: constant.then(|| *tail.last().unwrap()),
        defects,
    })
}

/// Three-factor growth limit `|𝒟^{(t)}(g₁)·𝒟^t(h)·𝒟^{(t)}(g₂)⁻¹|/t²` measured at a
/// single `t` (free-word level, weighted non-cyclic length).
pub fn three_factor_ratio(
    phi: &BasisMap,
    g1: &FreeWord,
    g2: &FreeWord,
    h: &FreeWord,
    t: usize,
    basis: &Basis,
) -> Result<Rational, GrowthError> {
    let p1 = crate::morphism::iterated_product(phi, g1, 0, t as i64)?;
    let p2 = crate::morphism::iterated_product(phi, g2, 0, t as i64)?;
    let ht = crate::morphism::apply_power(phi, h, t as i64)?;
    let w = p1.concat(&ht).concat(&p2.inverse());
    let len: Rational = w
        .letters()
        .iter()
        .map(|l| basis.weight(l.gen()))
        .sum();
    Ok(len / Rational::from_integer((t * t) as i64))
}
