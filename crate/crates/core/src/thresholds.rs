//! Closed-form sample-probability thresholds.
//!
//! All threshold terms share the shape `(c − I)·log(size)/(w·other_size)`.
//! Negative terms mean the corresponding task needs no rating samples and are
//! clamped to zero before taking the maximum; values above one are reported
//! as-is with a flag.

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative tolerance for deciding that two threshold terms tie.
pub const TIE_TOLERANCE: f64 = 1e-9;

fn check_probability(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParams(format!("{name} = {x} must lie in [0, 1]")));
    }
    Ok(())
}

fn check_personalization(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 0.5) {
        return Err(Error::InvalidParams(format!("{name} = {x} must lie in (0, 1/2)")));
    }
    Ok(())
}

/// `h(x) = (√(1 − x) − √x)²`.
pub fn h(x: f64) -> Result<f64> {
    check_probability("x", x)?;
    Ok(((1.0 - x).sqrt() - x.sqrt()).powi(2))
}

/// `τ_uv = 1 − √(θ_u θ_v) − √((1 − θ_u)(1 − θ_v))`.
pub fn tau(theta_u: f64, theta_v: f64) -> Result<f64> {
    check_personalization("theta_u", theta_u)?;
    check_personalization("theta_v", theta_v)?;
    Ok(1.0 - (theta_u * theta_v).sqrt() - ((1.0 - theta_u) * (1.0 - theta_v)).sqrt())
}

/// `ν_uv = 1 − √(θ_u (1 − θ_v)) − √(θ_v (1 − θ_u))`.
pub fn nu(theta_u: f64, theta_v: f64) -> Result<f64> {
    check_personalization("theta_u", theta_u)?;
    check_personalization("theta_v", theta_v)?;
    Ok(1.0 - (theta_u * (1.0 - theta_v)).sqrt() - (theta_v * (1.0 - theta_u)).sqrt())
}

/// Graph quality `I = size·(√α − √β)²/log(size)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct GraphQuality(pub f64);

impl GraphQuality {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn graph_quality(alpha: f64, beta: f64, size: usize) -> Result<GraphQuality> {
    if size < 2 {
        return Err(Error::InvalidParams(format!("graph size {size} must be at least 2")));
    }
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidParams(format!("{name} = {v} must lie in (0, 1)")));
        }
    }
    let s = size as f64;
    Ok(GraphQuality(s * (alpha.sqrt() - beta.sqrt()).powi(2) / s.ln()))
}

/// Recovery task behind a threshold term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdTerm {
    UserClusters,
    AtypicalMovies,
    MovieClusters,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    SocialSensitive,
    MovieSensitive,
    AtypicalitySensitive,
    Boundary,
}

impl Regime {
    fn of(term: ThresholdTerm) -> Regime {
        match term {
            ThresholdTerm::UserClusters => Regime::SocialSensitive,
            ThresholdTerm::AtypicalMovies => Regime::AtypicalitySensitive,
            ThresholdTerm::MovieClusters => Regime::MovieSensitive,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::SocialSensitive => "SocialSensitive",
            Regime::MovieSensitive => "MovieSensitive",
            Regime::AtypicalitySensitive => "AtypicalitySensitive",
            Regime::Boundary => "Boundary",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    /// Required sample probability; `None` when no sample probability suffices
    /// (or, for a converse report, when recovery is impossible regardless of `p`).
    pub p_value: Option<f64>,
    /// Unclamped terms in formula order.
    pub terms: Vec<(ThresholdTerm, f64)>,
    /// Largest term, or `None` when the top two tie.
    pub dominant_term: Option<ThresholdTerm>,
    pub regime: Regime,
    pub feasible: bool,
    /// `p_value > 1`: the formula is being evaluated outside its asymptotic regime.
    pub exceeds_one: bool,
}

impl ThresholdReport {
    fn from_terms(terms: Vec<(ThresholdTerm, f64)>, feasible: bool, tolerance: f64) -> Self {
        let p = terms.iter().map(|&(_, v)| v.max(0.0)).fold(0.0, f64::max);
        let dominant_term = dominant(&terms, tolerance);
        let regime = dominant_term.map_or(Regime::Boundary, Regime::of);
        ThresholdReport {
            p_value: feasible.then_some(p),
            terms,
            dominant_term,
            regime,
            feasible,
            exceeds_one: feasible && p > 1.0,
        }
    }

    pub fn term(&self, which: ThresholdTerm) -> Option<f64> {
        self.terms.iter().find(|(t, _)| *t == which).map(|&(_, v)| v)
    }
}

fn ties(a: f64, b: f64, tolerance: f64) -> bool {
    a == b || (a - b).abs() <= tolerance * a.abs().max(b.abs())
}

fn dominant(terms: &[(ThresholdTerm, f64)], tolerance: f64) -> Option<ThresholdTerm> {
    let mut sorted: Vec<(ThresholdTerm, f64)> = terms.to_vec();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1));
    match sorted.as_slice() {
        [] => None,
        [(t, _)] => Some(*t),
        [(t, a), (_, b), ..] => (!ties(*a, *b, tolerance)).then_some(*t),
    }
}

fn check_sizes(n: usize, m: usize) -> Result<()> {
    if n < 2 || m < 2 {
        return Err(Error::InvalidParams(format!("n = {n} and m = {m} must be at least 2")));
    }
    Ok(())
}

/// Basic-model threshold
/// `max{(2(1+ε) − I₁)log n/(2h(θ)m), (2(1+ε) − I₂)log m/(2h(θ)n)}`.
///
/// `epsilon` is signed: positive for the achievability form, negative for
/// the converse form, zero for the sharp threshold `p*`.
pub fn msp_model1(n: usize, m: usize, i1: f64, i2: f64, theta: f64, epsilon: f64) -> Result<ThresholdReport> {
    check_sizes(n, m)?;
    check_personalization("theta", theta)?;
    let ht = h(theta)?;
    let (nf, mf) = (n as f64, m as f64);
    let c = 2.0 * (1.0 + epsilon);
    let users = (c - i1) * nf.ln() / (2.0 * ht * mf);
    let movies = (c - i2) * mf.ln() / (2.0 * ht * nf);
    Ok(ThresholdReport::from_terms(
        vec![(ThresholdTerm::UserClusters, users), (ThresholdTerm::MovieClusters, movies)],
        true,
        TIE_TOLERANCE,
    ))
}

/// Social-graph quality at which the two basic-model terms meet, for a fixed
/// movie-graph quality. Above it the threshold no longer decreases in `I₁`.
pub fn msp_model1_kink(n: usize, m: usize, i2: f64) -> Result<f64> {
    check_sizes(n, m)?;
    let (nf, mf) = (n as f64, m as f64);
    Ok(2.0 - (2.0 - i2) * mf * mf.ln() / (nf * nf.ln()))
}

struct Model2Terms {
    nu_aa: f64,
    nu_rr: f64,
    tau_ar: f64,
}

fn model2_terms(theta_a: f64, theta_r: f64) -> Result<Model2Terms> {
    Ok(Model2Terms {
        nu_aa: nu(theta_a, theta_a)?,
        nu_rr: nu(theta_r, theta_r)?,
        tau_ar: tau(theta_a, theta_r)?,
    })
}

#[allow(clippy::too_many_arguments)]
fn model2_report(
    n: usize,
    m: usize,
    i1: f64,
    i2: f64,
    theta_a: f64,
    theta_r: f64,
    scale: f64,
    movie_constant: f64,
    feasible: bool,
) -> Result<ThresholdReport> {
    check_sizes(n, m)?;
    let t = model2_terms(theta_a, theta_r)?;
    let (nf, mf) = (n as f64, m as f64);
    let users = (2.0 * scale - i1) * nf.ln() / ((t.nu_aa + t.nu_rr) * mf);
    let atypical = scale * mf.ln() / (t.nu_aa.min(t.nu_rr) * nf);
    let mut terms = vec![(ThresholdTerm::UserClusters, users), (ThresholdTerm::AtypicalMovies, atypical)];
    if theta_a != theta_r {
        let movies = (movie_constant - i2) * mf.ln() / (2.0 * t.tau_ar * nf);
        terms.push((ThresholdTerm::MovieClusters, movies));
    }
    Ok(ThresholdReport::from_terms(terms, feasible, TIE_TOLERANCE))
}

/// Atypical-model achievability bound.
///
/// With `θ_a ≠ θ_r` the three terms cover user clusters, atypical movies and
/// movie clusters. With `θ_a = θ_r` movie clusters can only come from the
/// movie graph: the report has two terms and is feasible only when
/// `I₂ ≥ 2(1+ε)`.
pub fn model2_achievable_p(
    n: usize,
    m: usize,
    i1: f64,
    i2: f64,
    theta_a: f64,
    theta_r: f64,
    epsilon: f64,
) -> Result<ThresholdReport> {
    check_epsilon(epsilon)?;
    let scale = 1.0 + epsilon;
    let feasible = theta_a != theta_r || i2 >= 2.0 * scale;
    model2_report(n, m, i1, i2, theta_a, theta_r, scale, 2.0 * scale, feasible)
}

/// Atypical-model converse bound: below it every estimator fails. With
/// `θ_a = θ_r` the report is infeasible (recovery impossible at any `p`)
/// when `I₂ < 2(1−ε)`.
pub fn model2_converse_p(
    n: usize,
    m: usize,
    i1: f64,
    i2: f64,
    theta_a: f64,
    theta_r: f64,
    epsilon: f64,
) -> Result<ThresholdReport> {
    check_epsilon(epsilon)?;
    let scale = 1.0 - epsilon;
    let feasible = theta_a != theta_r || i2 >= 2.0 * scale;
    model2_report(n, m, i1, i2, theta_a, theta_r, scale, scale, feasible)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParams(format!("epsilon = {epsilon} must be finite and non-negative")));
    }
    Ok(())
}

/// Regime of `(θ_a, θ_r)` from the graph-free achievability terms.
pub fn classify_regime(n: usize, m: usize, theta_a: f64, theta_r: f64) -> Result<Regime> {
    classify_regime_with_tolerance(n, m, theta_a, theta_r, TIE_TOLERANCE)
}

pub fn classify_regime_with_tolerance(
    n: usize,
    m: usize,
    theta_a: f64,
    theta_r: f64,
    tolerance: f64,
) -> Result<Regime> {
    let report = model2_achievable_p(n, m, 0.0, 0.0, theta_a, theta_r, 0.0)?;
    Ok(dominant(&report.terms, tolerance).map_or(Regime::Boundary, Regime::of))
}
