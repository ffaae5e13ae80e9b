//! Negative log-likelihood of a candidate ground truth, its decomposed
//! difference form, and the relabelings under which it is invariant.
//!
//! `L(ξ) = −log P_ξ(U, G₁, G₂)` is computed exactly, constants included, from
//! integer sufficient statistics, so two candidates with the same statistics
//! get bit-identical values.

use crate::error::{Error, Result};
use crate::model::{GroundTruth, ModelKind, ModelParams, Observation};

/// Rating log-odds `f(x) = log((1 − x)/x)`.
pub fn f(x: f64) -> f64 {
    ((1.0 - x) / x).ln()
}

/// Graph log-odds `log(α(1 − β)/(β(1 − α)))`; zero when `α = β`.
pub fn graph_log_odds(alpha: f64, beta: f64) -> f64 {
    if alpha == beta {
        return 0.0;
    }
    (alpha * (1.0 - beta) / (beta * (1.0 - alpha))).ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodConstants {
    pub d1: f64,
    pub d2: f64,
    pub f_action: f64,
    pub f_romance: f64,
}

impl LikelihoodConstants {
    pub fn new(params: &ModelParams) -> Self {
        LikelihoodConstants {
            d1: graph_log_odds(params.social.alpha, params.social.beta),
            d2: graph_log_odds(params.movie.alpha, params.movie.beta),
            f_action: f(params.theta_action),
            f_romance: f(params.theta_romance),
        }
    }

    /// Single rating weight of the basic model.
    pub fn f_theta(&self) -> f64 {
        self.f_action
    }
}

/// Counts that determine `L(ξ)` for a fixed observation.
///
/// Genre-indexed arrays hold `[action, romance]` with genres taken from the
/// candidate ξ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SufficientStats {
    pub revealed: usize,
    pub revealed_by_genre: [usize; 2],
    pub matches_by_genre: [usize; 2],
    pub social_edges: usize,
    pub cross_edges_social: usize,
    pub movie_edges: usize,
    pub cross_edges_movie: usize,
}

impl SufficientStats {
    /// Revealed entries equal to the nominal rating.
    pub fn pi_size(&self) -> usize {
        self.matches_by_genre[0] + self.matches_by_genre[1]
    }
}

fn genre(action: bool) -> usize {
    usize::from(!action)
}

fn check(xi: &GroundTruth, obs: &Observation, params: &ModelParams) -> Result<()> {
    xi.check_kind(params.kind)?;
    xi.check_shape(params.n, params.m)?;
    if obs.n() != params.n || obs.m() != params.m {
        return Err(Error::Shape(format!(
            "observation is {}x{}, params say {}x{}",
            obs.n(),
            obs.m(),
            params.n,
            params.m
        )));
    }
    obs.check_shape()
}

pub fn sufficient_stats(xi: &GroundTruth, obs: &Observation) -> SufficientStats {
    let mut s = SufficientStats::default();
    for j in 0..xi.m() {
        let g = genre(xi.is_action(j));
        let q = xi.polarity(j);
        for (i, v) in obs.ratings.col_entries(j) {
            s.revealed_by_genre[g] += 1;
            if v == (xi.is_man(i) == q) {
                s.matches_by_genre[g] += 1;
            }
        }
    }
    s.revealed = s.revealed_by_genre[0] + s.revealed_by_genre[1];
    s.social_edges = obs.social.edge_count();
    s.cross_edges_social = obs.social.cut_size(xi.man_labels());
    s.movie_edges = obs.movie.edge_count();
    s.cross_edges_movie = obs.movie.cut_size(xi.action_labels());
    s
}

/// `k · log x` with `0 · log 0 = 0`.
fn xlogx(k: usize, x: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * x.ln()
    }
}

fn graph_nll(edges: usize, cross: usize, size: usize, alpha: f64, beta: f64) -> f64 {
    let half = size / 2;
    let cross_pairs = half * half;
    let same_pairs = size * (size - 2) / 4;
    let same = edges - cross;
    if alpha == beta {
        // keeps values independent of the partition when the graph is uninformative
        return -(xlogx(edges, alpha) + xlogx(same_pairs + cross_pairs - edges, 1.0 - alpha));
    }
    -(xlogx(same, alpha) + xlogx(same_pairs - same, 1.0 - alpha) + xlogx(cross, beta) + xlogx(cross_pairs - cross, 1.0 - beta))
}

fn rating_nll(revealed: usize, matches: usize, theta: f64) -> f64 {
    -(xlogx(matches, 1.0 - theta) + xlogx(revealed - matches, theta))
}

/// `L` evaluated from sufficient statistics.
pub fn neg_log_likelihood_from_stats(s: &SufficientStats, params: &ModelParams) -> f64 {
    let cells = params.n * params.m;
    let sampling = -(xlogx(s.revealed, params.p) + xlogx(cells - s.revealed, 1.0 - params.p));
    let ratings = if params.theta_action == params.theta_romance {
        rating_nll(s.revealed, s.pi_size(), params.theta_action)
    } else {
        rating_nll(s.revealed_by_genre[0], s.matches_by_genre[0], params.theta_action)
            + rating_nll(s.revealed_by_genre[1], s.matches_by_genre[1], params.theta_romance)
    };
    let social = graph_nll(
        s.social_edges,
        s.cross_edges_social,
        params.n,
        params.social.alpha,
        params.social.beta,
    );
    let movie = graph_nll(
        s.movie_edges,
        s.cross_edges_movie,
        params.m,
        params.movie.alpha,
        params.movie.beta,
    );
    sampling + ratings + social + movie
}

/// Exact `−log P_ξ(U, G₁, G₂)`. Infinite when the observation is impossible
/// under ξ (for example revealed entries with `p = 0`).
pub fn neg_log_likelihood(xi: &GroundTruth, obs: &Observation, params: &ModelParams) -> Result<f64> {
    check(xi, obs, params)?;
    Ok(neg_log_likelihood_from_stats(&sufficient_stats(xi, obs), params))
}

/// `L(ξ) − L(ξ′)` from the decomposition over changed nodes.
///
/// Graph terms only visit edges incident to nodes whose cluster differs
/// between the candidates; rating terms only visit entries whose nominal
/// value or personalization probability differs.
pub fn likelihood_difference(
    xi: &GroundTruth,
    xi2: &GroundTruth,
    obs: &Observation,
    params: &ModelParams,
) -> Result<f64> {
    check(xi, obs, params)?;
    check(xi2, obs, params)?;
    let c = LikelihoodConstants::new(params);

    let moved_users: Vec<bool> = (0..params.n).map(|i| xi.is_man(i) != xi2.is_man(i)).collect();
    let moved_movies: Vec<bool> = (0..params.m).map(|j| xi.is_action(j) != xi2.is_action(j)).collect();

    let gamma1 = cross_edge_change(&obs.social, xi.man_labels(), &moved_users);
    let gamma2 = cross_edge_change(&obs.movie, xi.action_labels(), &moved_movies);

    let cost = |action: bool, matched: bool| {
        let theta = params.theta(action);
        if matched {
            -(1.0 - theta).ln()
        } else {
            -theta.ln()
        }
    };
    let theta_differs = params.theta_action != params.theta_romance;
    let any_moved_user = moved_users.iter().any(|&x| x);
    let mut ratings = 0.0;
    for j in 0..params.m {
        let genre_changed = moved_movies[j] && theta_differs;
        let polarity_changed = xi.polarity(j) != xi2.polarity(j);
        if !genre_changed && !polarity_changed && !any_moved_user {
            continue;
        }
        for (i, v) in obs.ratings.col_entries(j) {
            // nominal values differ on exactly these rows
            let differs = moved_users[i] != polarity_changed;
            if !differs && !genre_changed {
                continue;
            }
            let a = cost(xi.is_action(j), v == xi.nominal(i, j));
            let b = cost(xi2.is_action(j), v == xi2.nominal(i, j));
            ratings += a - b;
        }
    }
    Ok(c.d1 * gamma1 as f64 + c.d2 * gamma2 as f64 + ratings)
}

/// `e(ξ) − e(ξ′)` where `e` counts edges crossing clusters. Edges between two
/// moved nodes keep their status and are skipped.
fn cross_edge_change(graph: &crate::Adjacency, label: &[bool], moved: &[bool]) -> i64 {
    let mut change = 0i64;
    for a in (0..label.len()).filter(|&a| moved[a]) {
        for b in graph.neighbors(a) {
            if moved[b] {
                continue;
            }
            change += if label[a] != label[b] { 1 } else { -1 };
        }
    }
    change
}

/// Simultaneous swap of men with women and action with romance; atypical
/// flags stay with their movies. The nominal matrix is unchanged.
pub fn flip(xi: &GroundTruth) -> GroundTruth {
    let (man, action, atypical) = xi.clone().into_labels();
    GroundTruth::from_labels_unchecked(
        man.into_iter().map(|x| !x).collect(),
        action.into_iter().map(|x| !x).collect(),
        atypical,
    )
}

/// Swap of men with women together with toggling every atypical flag.
///
/// The nominal matrix and both graph partitions are unchanged, so this is a
/// symmetry of the atypical model for any personalization probabilities.
pub fn swap_users(xi: &GroundTruth) -> GroundTruth {
    let (man, action, atypical) = xi.clone().into_labels();
    GroundTruth::from_labels_unchecked(
        man.into_iter().map(|x| !x).collect(),
        action,
        atypical.into_iter().map(|x| !x).collect(),
    )
}

/// Swap of action with romance together with toggling every atypical flag.
/// A symmetry only when both genres share one personalization probability.
pub fn swap_genres(xi: &GroundTruth) -> GroundTruth {
    let (man, action, atypical) = xi.clone().into_labels();
    GroundTruth::from_labels_unchecked(
        man,
        action.into_iter().map(|x| !x).collect(),
        atypical.into_iter().map(|x| !x).collect(),
    )
}

/// Representative of the flip class of ξ: flipped when the users are not
/// oriented (men hold the majority of the first `n/2` users, user 0 a man on
/// ties). Canonical inputs are returned unchanged.
pub fn canonicalize(xi: &GroundTruth) -> GroundTruth {
    if xi.users_oriented() {
        xi.clone()
    } else {
        flip(xi)
    }
}

/// Representative of ξ under every relabeling that leaves the distribution of
/// the observation unchanged for these parameters.
///
/// Basic model: the flip class, as in [`canonicalize`]. Atypical model: users
/// are oriented with [`swap_users`], and when both genres share one
/// personalization probability movies are oriented with [`swap_genres`].
pub fn orient(xi: &GroundTruth, params: &ModelParams) -> GroundTruth {
    match params.kind {
        ModelKind::Basic => canonicalize(xi),
        ModelKind::Atypical => {
            let mut out = if xi.users_oriented() { xi.clone() } else { swap_users(xi) };
            if params.theta_action == params.theta_romance && !out.movies_oriented() {
                out = swap_genres(&out);
            }
            out
        }
    }
}
