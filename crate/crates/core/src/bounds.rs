//! Chernoff bounds on pairwise ML errors, type-class sizes and the finite-n
//! union bound on the ML failure probability.
//!
//! A type class collects the alternatives ξ′ at a fixed overlap with ξ:
//! `k1` men of ξ are women in ξ′ (and as many women become men), `k2` action
//! movies become romance (and vice versa). In the atypical model `t_uv`
//! counts the movies that are `u` in ξ and `v` in ξ′ whose polarity (the
//! nominal rating of an unmoved man) changes.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::likelihood::likelihood_difference;
use crate::model::{observe, GroundTruth, ModelKind, ModelParams};
use crate::seed::Seed;
use crate::stats::Proportion;
use crate::thresholds::{h, nu, tau};

/// Exponents below this are reported as an exact zero.
pub const UNDERFLOW_EXPONENT: f64 = -745.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub struct TypeClassOverlap {
    pub k1: usize,
    pub k2: usize,
    pub t_aa: usize,
    pub t_rr: usize,
    pub t_ar: usize,
    pub t_ra: usize,
}

impl TypeClassOverlap {
    pub fn new(k1: usize, k2: usize) -> Self {
        TypeClassOverlap { k1, k2, ..Default::default() }
    }

    pub fn with_atypical(k1: usize, k2: usize, t_aa: usize, t_rr: usize) -> Self {
        TypeClassOverlap { k1, k2, t_aa, t_rr, ..Default::default() }
    }

    /// Overlap of `xi2` relative to `xi`.
    pub fn between(xi: &GroundTruth, xi2: &GroundTruth) -> Result<Self> {
        xi2.check_shape(xi.n(), xi.m())?;
        let k1 = (0..xi.n()).filter(|&i| xi.is_man(i) && !xi2.is_man(i)).count();
        let k2 = (0..xi.m()).filter(|&j| xi.is_action(j) && !xi2.is_action(j)).count();
        let mut o = TypeClassOverlap::new(k1, k2);
        for j in (0..xi.m()).filter(|&j| xi.polarity(j) != xi2.polarity(j)) {
            match (xi.is_action(j), xi2.is_action(j)) {
                (true, true) => o.t_aa += 1,
                (false, false) => o.t_rr += 1,
                (true, false) => o.t_ar += 1,
                (false, true) => o.t_ra += 1,
            }
        }
        Ok(o)
    }

    pub fn g1(&self, n: usize) -> f64 {
        let k = self.k1 as f64;
        n as f64 * k - 2.0 * k * k
    }

    pub fn g2(&self, m: usize) -> f64 {
        let k = self.k2 as f64;
        m as f64 * k - 2.0 * k * k
    }

    /// Entries whose nominal rating differs in the basic model.
    pub fn g3(&self, n: usize, m: usize) -> f64 {
        let (k1, k2) = (self.k1 as f64, self.k2 as f64);
        2.0 * m as f64 * k1 + 2.0 * n as f64 * k2 - 8.0 * k1 * k2
    }

    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        let (hn, hm) = (n / 2, m / 2);
        let ok = self.k1 <= hn
            && self.k2 <= hm
            && self.t_aa <= hm - self.k2.min(hm)
            && self.t_rr <= hm - self.k2.min(hm)
            && self.t_ar <= self.k2
            && self.t_ra <= self.k2;
        if !ok {
            return Err(Error::InvalidParams(format!("overlap {self:?} out of range for n = {n}, m = {m}")));
        }
        Ok(())
    }

    /// Overlap of the user-swapped alternative (men and women exchanged,
    /// every atypical flag toggled), which has the same pairwise error in the
    /// atypical model.
    pub fn user_swapped(&self, n: usize, m: usize) -> Self {
        let same = m / 2 - self.k2;
        TypeClassOverlap {
            k1: n / 2 - self.k1,
            k2: self.k2,
            t_aa: same - self.t_aa,
            t_rr: same - self.t_rr,
            t_ar: self.k2 - self.t_ar,
            t_ra: self.k2 - self.t_ra,
        }
    }

    /// Drops the polarity counts, which are implied by the genres when no
    /// movie is atypical.
    pub fn genres_only(&self) -> Self {
        TypeClassOverlap::new(self.k1, self.k2)
    }

    fn is_identity(&self) -> bool {
        *self == TypeClassOverlap::default()
    }
}

/// A probability bound carried in the log domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bound {
    pub exponent: f64,
    pub value: f64,
    /// The exponent is below [`UNDERFLOW_EXPONENT`] and `value` is an exact zero.
    pub underflow: bool,
}

impl Bound {
    pub fn from_exponent(exponent: f64) -> Self {
        if exponent < UNDERFLOW_EXPONENT {
            Bound { exponent, value: 0.0, underflow: true }
        } else {
            Bound { exponent, value: exponent.exp(), underflow: false }
        }
    }
}

fn graph_exponent(o: &TypeClassOverlap, n: usize, m: usize, i1: f64, i2: f64) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    o.g1(n) * i1 * nf.ln() / nf + o.g2(m) * i2 * mf.ln() / mf
}

fn require(params: &ModelParams, kind: ModelKind) -> Result<()> {
    params.validate()?;
    if params.kind != kind {
        return Err(Error::KindMismatch(format!("bound is for the {kind} model, params are {}", params.kind)));
    }
    Ok(())
}

/// `exp(−g₁I₁ log n/n − g₂I₂ log m/m − g₃ p h(θ))`.
pub fn pairwise_error_bound_model1(overlap: &TypeClassOverlap, params: &ModelParams, i1: f64, i2: f64) -> Result<Bound> {
    require(params, ModelKind::Basic)?;
    overlap.validate(params.n, params.m)?;
    let (n, m) = (params.n, params.m);
    let rating = overlap.g3(n, m) * params.p * h(params.theta_action)?;
    Ok(Bound::from_exponent(-(graph_exponent(overlap, n, m, i1, i2) + rating)))
}

struct Weights {
    tau_ar: f64,
    nu_aa: f64,
    nu_rr: f64,
    nu_ar: f64,
}

fn weights(params: &ModelParams) -> Result<Weights> {
    let (a, r) = (params.theta_action, params.theta_romance);
    Ok(Weights {
        tau_ar: tau(a, r)?,
        nu_aa: nu(a, a)?,
        nu_rr: nu(r, r)?,
        nu_ar: nu(a, r)?,
    })
}

/// `Φ(k₁, k₂, t_aa, t_rr) = 2τ_ar n k₂ + k₁(m − 2k₂)(ν_aa + ν_rr) + (t_aa + t_rr)(n − 4k₁) min{ν_aa, ν_rr}`.
///
/// Requires `4k₁ ≤ n`.
pub fn phi(overlap: &TypeClassOverlap, params: &ModelParams) -> Result<f64> {
    let w = weights(params)?;
    Ok(phi_with(overlap, params.n, params.m, &w))
}

fn phi_with(o: &TypeClassOverlap, n: usize, m: usize, w: &Weights) -> f64 {
    let (nf, mf, k1, k2) = (n as f64, m as f64, o.k1 as f64, o.k2 as f64);
    2.0 * w.tau_ar * nf * k2
        + k1 * (mf - 2.0 * k2) * (w.nu_aa + w.nu_rr)
        + (o.t_aa + o.t_rr) as f64 * (nf - 4.0 * k1) * w.nu_aa.min(w.nu_rr)
}

/// Relaxed atypical-model bound `exp(−g₁I₁ log n/n − g₂I₂ log m/m − pΦ)`.
///
/// Overlaps with `4k₁ > n` are first replaced by their user-swapped
/// counterpart, which has the same pairwise error.
pub fn pairwise_error_bound_model2(overlap: &TypeClassOverlap, params: &ModelParams, i1: f64, i2: f64) -> Result<Bound> {
    require(params, ModelKind::Atypical)?;
    overlap.validate(params.n, params.m)?;
    let (n, m) = (params.n, params.m);
    let o = if 4 * overlap.k1 > n { overlap.user_swapped(n, m) } else { *overlap };
    let w = weights(params)?;
    Ok(Bound::from_exponent(-(graph_exponent(&o, n, m, i1, i2) + params.p * phi_with(&o, n, m, &w))))
}

/// Rating exponent before relaxation: entries whose nominal rating agrees
/// contribute `τ_uv`, entries whose nominal rating differs contribute `ν_uv`,
/// where `u`, `v` are the movie's genres under ξ and ξ′.
pub fn exact_rating_exponent(overlap: &TypeClassOverlap, params: &ModelParams) -> Result<f64> {
    let w = weights(params)?;
    let (n, m) = (params.n, params.m);
    let o = overlap;
    let same = m / 2 - o.k2;
    let moved = 2 * o.k1;
    let kept = n - moved;
    // (columns, columns with changed polarity, τ_uv, ν_uv)
    let groups = [
        (same, o.t_aa, 0.0, w.nu_aa),
        (same, o.t_rr, 0.0, w.nu_rr),
        (o.k2, o.t_ar, w.tau_ar, w.nu_ar),
        (o.k2, o.t_ra, w.tau_ar, w.nu_ar),
    ];
    let mut total = 0.0;
    for (cols, t, tau_uv, nu_uv) in groups {
        let differ = kept * t + moved * (cols - t);
        let agree = kept * (cols - t) + moved * t;
        total += agree as f64 * tau_uv + differ as f64 * nu_uv;
    }
    Ok(total)
}

/// Unrelaxed atypical-model bound using the exact entry counts.
pub fn pairwise_error_bound_model2_exact(overlap: &TypeClassOverlap, params: &ModelParams, i1: f64, i2: f64) -> Result<Bound> {
    require(params, ModelKind::Atypical)?;
    overlap.validate(params.n, params.m)?;
    let (n, m) = (params.n, params.m);
    let rating = params.p * exact_rating_exponent(overlap, params)?;
    Ok(Bound::from_exponent(-(graph_exponent(overlap, n, m, i1, i2) + rating)))
}

/// Pairwise bound for the model in `params`: the basic-model bound, or the
/// unrelaxed atypical-model bound.
pub fn pairwise_error_bound(overlap: &TypeClassOverlap, params: &ModelParams, i1: f64, i2: f64) -> Result<Bound> {
    match params.kind {
        ModelKind::Basic => pairwise_error_bound_model1(overlap, params, i1, i2),
        ModelKind::Atypical => pairwise_error_bound_model2_exact(overlap, params, i1, i2),
    }
}

fn binomial_exact(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1)
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

fn class_factors(o: &TypeClassOverlap, params: &ModelParams) -> Vec<(usize, usize)> {
    let (hn, hm) = (params.n / 2, params.m / 2);
    let mut f = vec![(hn, o.k1), (hn, o.k1), (hm, o.k2), (hm, o.k2)];
    if params.kind == ModelKind::Atypical {
        f.extend([(hm - o.k2, o.t_aa), (hm - o.k2, o.t_rr), (o.k2, o.t_ar), (o.k2, o.t_ra)]);
    }
    f
}

/// Number of alternatives ξ′ with exactly this overlap with a fixed ξ;
/// `None` on `u128` overflow (see [`ln_type_class_count`]).
pub fn type_class_count(overlap: &TypeClassOverlap, params: &ModelParams) -> Result<Option<u128>> {
    overlap.validate(params.n, params.m)?;
    if params.kind == ModelKind::Basic && (overlap.t_aa, overlap.t_rr, overlap.t_ar, overlap.t_ra) != (0, 0, 0, 0) {
        return Err(Error::KindMismatch("basic model has no polarity changes".into()));
    }
    let mut acc: u128 = 1;
    for (a, b) in class_factors(overlap, params) {
        match binomial_exact(a, b).and_then(|c| acc.checked_mul(c)) {
            Some(v) => acc = v,
            None => return Ok(None),
        }
    }
    Ok(Some(acc))
}

pub fn ln_type_class_count(overlap: &TypeClassOverlap, params: &ModelParams) -> Result<f64> {
    overlap.validate(params.n, params.m)?;
    Ok(class_factors(overlap, params).into_iter().map(|(a, b)| ln_binomial(a as u64, b as u64)).sum())
}

/// Atypical-model class size summed over `t_ar` and `t_ra`:
/// `C(n/2,k₁)² C(m/2,k₂)² C(m/2−k₂,t_aa) C(m/2−k₂,t_rr) 4^k₂`.
pub fn ln_type_class_count_summed(overlap: &TypeClassOverlap, params: &ModelParams) -> Result<f64> {
    let base = TypeClassOverlap { t_ar: 0, t_ra: 0, ..*overlap };
    Ok(ln_type_class_count(&base, params)? + overlap.k2 as f64 * 4f64.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnionBound {
    pub ln_total: f64,
    pub total: f64,
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Finite-n union bound on the ML failure probability: the sum over every
/// alternative type class of class size times pairwise bound.
///
/// Alternatives are taken up to the model's relabeling symmetry (the flip in
/// the basic model, the user swap in the atypical model), so `k1` runs over
/// `0..=n/4` with half weight at `4k1 = n`, where a class and its image have
/// the same `k1`. The atypical model uses the relaxed bound, whose sum over
/// `t_aa` and `t_rr` is a binomial expansion evaluated in closed form.
pub fn union_bound_total(params: &ModelParams, i1: f64, i2: f64) -> Result<UnionBound> {
    params.validate()?;
    let (n, m) = (params.n, params.m);
    let mut ln_total = f64::NEG_INFINITY;
    let half = 0.5f64.ln();
    match params.kind {
        ModelKind::Basic => {
            let ht = h(params.theta_action)?;
            for k1 in 0..=n / 4 {
                for k2 in 0..=m / 2 {
                    let o = TypeClassOverlap::new(k1, k2);
                    if o.is_identity() {
                        continue;
                    }
                    let exponent = -(graph_exponent(&o, n, m, i1, i2) + o.g3(n, m) * params.p * ht);
                    let weight = if 4 * k1 == n { half } else { 0.0 };
                    ln_total = log_add(ln_total, ln_type_class_count(&o, params)? + exponent + weight);
                }
            }
        }
        ModelKind::Atypical => {
            let w = weights(params)?;
            let (nf, mf) = (n as f64, m as f64);
            for k1 in 0..=n / 4 {
                for k2 in 0..=m / 2 {
                    let o = TypeClassOverlap::new(k1, k2);
                    let same = (m / 2 - k2) as f64;
                    let (k1f, k2f) = (k1 as f64, k2 as f64);
                    let fixed = graph_exponent(&o, n, m, i1, i2)
                        + params.p * (2.0 * w.tau_ar * nf * k2f + k1f * (mf - 2.0 * k2f) * (w.nu_aa + w.nu_rr));
                    let per_t = params.p * (nf - 4.0 * k1f) * w.nu_aa.min(w.nu_rr);
                    // Σ_{t_aa,t_rr} C(s,t_aa) C(s,t_rr) e^{−per_t (t_aa+t_rr)} = (1 + e^{−per_t})^{2s}
                    let ln_t_sum = 2.0 * same * (-per_t).exp().ln_1p();
                    let ln_t_sum = if o.is_identity() {
                        // drop ξ itself (t_aa = t_rr = 0)
                        let x = ln_t_sum.exp_m1();
                        if x <= 0.0 {
                            continue;
                        }
                        x.ln()
                    } else {
                        ln_t_sum
                    };
                    let weight = if 4 * k1 == n { half } else { 0.0 };
                    let ln_count = ln_type_class_count(&o, params)? + k2f * 4f64.ln();
                    ln_total = log_add(ln_total, ln_count + ln_t_sum - fixed + weight);
                }
            }
        }
    }
    Ok(UnionBound { ln_total, total: ln_total.exp() })
}

/// Monte Carlo estimate of `P_ξ(L(ξ′) ≤ L(ξ))`; ties count as errors.
pub fn empirical_pairwise_error(
    xi: &GroundTruth,
    xi2: &GroundTruth,
    params: &ModelParams,
    trials: usize,
    seed: Seed,
) -> Result<Proportion> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be positive".into()));
    }
    params.validate()?;
    xi.check_kind(params.kind)?;
    xi2.check_kind(params.kind)?;
    xi.check_shape(params.n, params.m)?;
    xi2.check_shape(params.n, params.m)?;
    let errors: Result<Vec<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let obs = observe(xi, params, seed.derive_indexed("trial", t as u64))?;
            Ok(likelihood_difference(xi, xi2, &obs, params)? >= 0.0)
        })
        .collect();
    let errors = errors?.into_iter().filter(|&e| e).count();
    Ok(Proportion::new(errors, trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::{flip, swap_users};
    use crate::model::{sample_ground_truth, AtypicalCounts, SbmParams};
    use rand::Rng;

    fn basic(n: usize, m: usize, theta: f64, p: f64) -> ModelParams {
        let g = SbmParams::uninformative(0.5);
        ModelParams::basic(n, m, theta, g, g, p).unwrap()
    }

    fn atypical(n: usize, m: usize, a: f64, r: f64, p: f64) -> ModelParams {
        let g = SbmParams::uninformative(0.5);
        ModelParams::atypical(n, m, a, r, g, g, p).unwrap()
    }

    #[test]
    fn improper_class_has_unit_bound() {
        let b = pairwise_error_bound_model1(&TypeClassOverlap::new(0, 0), &basic(100, 100, 0.2, 0.3), 1.0, 1.0).unwrap();
        assert_eq!(b.value, 1.0);
    }

    #[test]
    fn single_user_swap_arithmetic() {
        // p·h(θ) = 0.05 with θ = 0.2: p = 0.25
        let params = basic(100, 100, 0.2, 0.25);
        let o = TypeClassOverlap::new(1, 0);
        assert_eq!(o.g3(100, 100), 200.0);
        let b = pairwise_error_bound_model1(&o, &params, 0.0, 0.0).unwrap();
        assert!((b.exponent + 10.0).abs() < 1e-12);
        assert!((b.value - (-10f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn bound_monotone_in_inputs() {
        let o = TypeClassOverlap::new(3, 2);
        let b = |i1, i2, p| pairwise_error_bound_model1(&o, &basic(40, 30, 0.2, p), i1, i2).unwrap().value;
        assert!(b(1.0, 0.0, 0.1) <= b(0.5, 0.0, 0.1));
        assert!(b(0.0, 1.0, 0.1) <= b(0.0, 0.5, 0.1));
        assert!(b(0.0, 0.0, 0.2) <= b(0.0, 0.0, 0.1));
    }

    #[test]
    fn underflow_is_flagged() {
        let b = pairwise_error_bound_model1(&TypeClassOverlap::new(10, 10), &basic(100, 100, 0.01, 1.0), 3.0, 3.0).unwrap();
        assert!(b.underflow);
        assert_eq!(b.value, 0.0);
    }

    #[test]
    fn flip_invariant_exponents() {
        let (n, m) = (40, 30);
        for k1 in 0..=n / 2 {
            for k2 in 0..=m / 2 {
                let a = TypeClassOverlap::new(k1, k2);
                let b = TypeClassOverlap::new(n / 2 - k1, m / 2 - k2);
                assert_eq!(a.g1(n), b.g1(n));
                assert_eq!(a.g2(m), b.g2(m));
                assert_eq!(a.g3(n, m), b.g3(n, m));
            }
        }
    }

    #[test]
    fn model2_equal_personalization_movie_swap_is_free() {
        let params = atypical(20, 20, 0.2, 0.2, 0.5);
        let b = pairwise_error_bound_model2(&TypeClassOverlap::new(0, 1), &params, 0.0, 0.0).unwrap();
        assert_eq!(b.value, 1.0);
    }

    #[test]
    fn model2_single_polarity_change() {
        let params = atypical(20, 16, 0.1, 0.3, 0.4);
        let o = TypeClassOverlap::with_atypical(0, 0, 1, 0);
        let exact = pairwise_error_bound_model2_exact(&o, &params, 0.0, 0.0).unwrap();
        assert!((exact.exponent + 0.4 * 20.0 * nu(0.1, 0.1).unwrap()).abs() < 1e-12);
        let relaxed = pairwise_error_bound_model2(&o, &params, 0.0, 0.0).unwrap();
        assert!((relaxed.exponent + 0.4 * 20.0 * nu(0.3, 0.3).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn relaxed_bound_dominates_exact_bound() {
        let mut rng = Seed(3).rng();
        for _ in 0..10_000 {
            let n = 2 * rng.random_range(2..40);
            let m = 2 * rng.random_range(2..40);
            let params = atypical(n, m, rng.random_range(0.01..0.49), rng.random_range(0.01..0.49), rng.random_range(0.0..1.0));
            let k1 = rng.random_range(0..=n / 4);
            let k2 = rng.random_range(0..=m / 2);
            let s = m / 2 - k2;
            let o = TypeClassOverlap {
                k1,
                k2,
                t_aa: rng.random_range(0..=s),
                t_rr: rng.random_range(0..=s),
                t_ar: rng.random_range(0..=k2),
                t_ra: rng.random_range(0..=k2),
            };
            let relaxed = pairwise_error_bound_model2(&o, &params, 0.3, 0.7).unwrap();
            let exact = pairwise_error_bound_model2_exact(&o, &params, 0.3, 0.7).unwrap();
            assert!(relaxed.exponent >= exact.exponent - 1e-9 * exact.exponent.abs().max(1.0));
        }
    }

    #[test]
    fn exact_exponent_is_user_swap_invariant() {
        let params = atypical(12, 10, 0.1, 0.35, 0.5);
        let o = TypeClassOverlap { k1: 2, k2: 2, t_aa: 1, t_rr: 3, t_ar: 1, t_ra: 0 };
        let a = exact_rating_exponent(&o, &params).unwrap();
        let b = exact_rating_exponent(&o.user_swapped(12, 10), &params).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn counts() {
        let params = basic(8, 8, 0.2, 0.5);
        assert_eq!(type_class_count(&TypeClassOverlap::new(1, 0), &params).unwrap(), Some(16));
        assert_eq!(type_class_count(&TypeClassOverlap::new(0, 0), &params).unwrap(), Some(1));
        let params = atypical(8, 8, 0.2, 0.3, 0.5);
        assert_eq!(type_class_count(&TypeClassOverlap::default(), &params).unwrap(), Some(1));
        let o = TypeClassOverlap { k1: 1, k2: 1, t_aa: 2, t_rr: 0, t_ar: 1, t_ra: 0 };
        // 4·4·4·4·C(3,2)·C(3,0)·C(1,1)·C(1,0)
        assert_eq!(type_class_count(&o, &params).unwrap(), Some(256 * 3));
        let big = basic(400, 400, 0.2, 0.5);
        let o = TypeClassOverlap::new(100, 100);
        assert_eq!(type_class_count(&o, &big).unwrap(), None);
        assert!(ln_type_class_count(&o, &big).unwrap() > 128.0 * 2f64.ln());
    }

    fn balanced(size: usize, bits: u32) -> Option<Vec<bool>> {
        (bits.count_ones() as usize == size / 2).then(|| (0..size).map(|i| bits >> i & 1 == 1).collect())
    }

    #[test]
    fn counts_match_enumeration() {
        use std::collections::HashMap;
        for (n, m, kind) in [(4, 4, ModelKind::Basic), (6, 4, ModelKind::Basic), (8, 6, ModelKind::Basic), (4, 4, ModelKind::Atypical), (4, 6, ModelKind::Atypical)] {
            let params = match kind {
                ModelKind::Basic => basic(n, m, 0.2, 0.5),
                ModelKind::Atypical => atypical(n, m, 0.2, 0.3, 0.5),
            };
            let xi = sample_ground_truth(&params, AtypicalCounts::UniformRandom, Seed(n as u64 * 7 + m as u64)).unwrap();
            let mut seen: HashMap<TypeClassOverlap, u128> = HashMap::new();
            let atyp_range = if kind == ModelKind::Atypical { 1u32 << m } else { 1 };
            for ub in 0..1u32 << n {
                let Some(man) = balanced(n, ub) else { continue };
                for mb in 0..1u32 << m {
                    let Some(action) = balanced(m, mb) else { continue };
                    for ab in 0..atyp_range {
                        let atyp: Vec<bool> = (0..m).map(|j| ab >> j & 1 == 1).collect();
                        let alt = GroundTruth::from_labels(man.clone(), action.clone(), atyp).unwrap();
                        let mut o = TypeClassOverlap::between(&xi, &alt).unwrap();
                        if kind == ModelKind::Basic {
                            o = o.genres_only();
                        }
                        *seen.entry(o).or_default() += 1;
                    }
                }
            }
            for (o, count) in seen {
                assert_eq!(type_class_count(&o, &params).unwrap(), Some(count), "{o:?}");
            }
        }
    }

    #[test]
    fn union_bound_far_above_threshold() {
        let p_star = crate::thresholds::msp_model1(100, 100, 0.0, 0.0, 0.2, 0.0).unwrap().p_value.unwrap();
        let u = union_bound_total(&basic(100, 100, 0.2, 3.0 * p_star), 0.0, 0.0).unwrap();
        assert!(u.total < 0.1, "{}", u.total);
    }

    #[test]
    fn union_bound_vacuous_without_information() {
        for params in [basic(20, 20, 0.2, 0.0), atypical(20, 20, 0.2, 0.3, 0.0)] {
            assert!(union_bound_total(&params, 0.0, 0.0).unwrap().total >= 1.0);
        }
    }

    #[test]
    fn union_bound_monotone_in_p() {
        for make in [|p| basic(30, 30, 0.2, p), |p| atypical(30, 30, 0.15, 0.3, p)] {
            let mut prev = f64::INFINITY;
            for k in 0..=20 {
                let t = union_bound_total(&make(k as f64 / 20.0), 0.5, 0.5).unwrap().total;
                assert!(t <= prev * (1.0 + 1e-12));
                prev = t;
            }
        }
    }

    #[test]
    fn atypical_union_bound_matches_direct_sum() {
        let params = atypical(12, 10, 0.15, 0.3, 0.4);
        let (n, m) = (12, 10);
        let mut direct = 0.0;
        for k1 in 0..=n / 4 {
            for k2 in 0..=m / 2 {
                for t_aa in 0..=m / 2 - k2 {
                    for t_rr in 0..=m / 2 - k2 {
                        let o = TypeClassOverlap::with_atypical(k1, k2, t_aa, t_rr);
                        if o.is_identity() {
                            continue;
                        }
                        let w = if 4 * k1 == n { 0.5 } else { 1.0 };
                        let count = ln_type_class_count_summed(&o, &params).unwrap().exp();
                        direct += w * count * pairwise_error_bound_model2(&o, &params, 0.4, 0.2).unwrap().value;
                    }
                }
            }
        }
        let u = union_bound_total(&params, 0.4, 0.2).unwrap().total;
        assert!((u - direct).abs() <= 1e-10 * direct, "{u} vs {direct}");
    }

    #[test]
    fn empirical_error_of_flip_is_one() {
        let params = basic(10, 10, 0.2, 0.5);
        let xi = sample_ground_truth(&params, AtypicalCounts::none(), Seed(1)).unwrap();
        let r = empirical_pairwise_error(&xi, &flip(&xi), &params, 50, Seed(2)).unwrap();
        assert_eq!(r.rate, 1.0);
        let params = atypical(10, 10, 0.2, 0.3, 0.5);
        let xi = sample_ground_truth(&params, AtypicalCounts::UniformRandom, Seed(1)).unwrap();
        let r = empirical_pairwise_error(&xi, &swap_users(&xi), &params, 50, Seed(2)).unwrap();
        assert_eq!(r.rate, 1.0);
        assert!(empirical_pairwise_error(&xi, &xi, &params, 0, Seed(2)).is_err());
    }

    #[test]
    fn empirical_error_respects_bound() {
        let g = SbmParams::new(0.4, 0.2);
        let params = ModelParams::basic(20, 20, 0.2, g, g, 0.1).unwrap();
        let i1 = crate::thresholds::graph_quality(0.4, 0.2, 20).unwrap().value();
        let xi = sample_ground_truth(&params, AtypicalCounts::none(), Seed(4)).unwrap();
        let (mut man, action, atyp) = xi.clone().into_labels();
        let a = man.iter().position(|&x| x).unwrap();
        let b = man.iter().position(|&x| !x).unwrap();
        man.swap(a, b);
        let alt = GroundTruth::from_labels(man, action, atyp).unwrap();
        let o = TypeClassOverlap::between(&xi, &alt).unwrap();
        let bound = pairwise_error_bound_model1(&o, &params, i1, i1).unwrap();
        let r = empirical_pairwise_error(&xi, &alt, &params, 2000, Seed(5)).unwrap();
        assert!(r.rate <= bound.value + 3.0 * r.std_error().max(1.0 / 2000.0), "{} vs {}", r.rate, bound.value);
    }
}
