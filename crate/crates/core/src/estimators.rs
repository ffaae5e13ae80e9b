//! Recovery of the hidden clustering from an observation.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{canonicalize, neg_log_likelihood, neg_log_likelihood_from_stats, orient, LikelihoodConstants, SufficientStats};
use crate::model::{labels_oriented, GroundTruth, ModelKind, ModelParams, Observation};
use crate::seed::Seed;

/// Largest `n` and `m` accepted by [`ml_exhaustive`].
pub const EXHAUSTIVE_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Exhaustive,
    LocalSearch { restarts: usize },
}

impl Estimator {
    pub fn estimate(&self, obs: &Observation, params: &ModelParams, seed: Seed) -> Result<GroundTruth> {
        match *self {
            Estimator::Exhaustive => ml_exhaustive(obs, params),
            Estimator::LocalSearch { restarts } => ml_local_search(obs, params, restarts, seed),
        }
    }
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Estimator::Exhaustive => f.write_str("exhaustive"),
            Estimator::LocalSearch { restarts } => write!(f, "local_search({restarts})"),
        }
    }
}

fn check_observation(obs: &Observation, params: &ModelParams) -> Result<()> {
    params.validate()?;
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

/// Calls `visit` with every `k`-subset of `0..n` as a sorted index list, in
/// lexicographic order.
fn for_each_combination(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for t in i + 1..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

fn all_halves(size: usize) -> Vec<Vec<bool>> {
    let mut out = Vec::new();
    for_each_combination(size, size / 2, |set| {
        let mut labels = vec![false; size];
        for &i in set {
            labels[i] = true;
        }
        out.push(labels);
    });
    out
}

/// Balanced labelings of `size` nodes whose first half is majority-labeled
/// (node 0 labeled on ties), in lexicographic order of the labeled set.
fn oriented_halves(size: usize) -> Vec<Vec<bool>> {
    let mut out = Vec::new();
    for_each_combination(size, size / 2, |set| {
        let mut labels = vec![false; size];
        for &i in set {
            labels[i] = true;
        }
        if labels_oriented(&labels) {
            out.push(labels);
        }
    });
    out
}

/// Maximum-likelihood estimate over all ground truths up to the model's
/// relabeling symmetries: users are oriented, and movies too when both genres
/// share one personalization probability in the atypical model.
///
/// Candidates are visited in lexicographic order of (men, action movies) and
/// a later candidate replaces the incumbent only when its likelihood is
/// strictly better, so ties resolve to the lexicographically smallest
/// encoding. In the atypical model the atypical flags are optimized column by
/// column in closed form: each column takes the polarity matching more of its
/// revealed ratings, and tied columns are marked atypical exactly when that
/// yields the smaller sorted index list.
pub fn ml_exhaustive(obs: &Observation, params: &ModelParams) -> Result<GroundTruth> {
    check_observation(obs, params)?;
    let (n, m) = (params.n, params.m);
    if n > EXHAUSTIVE_LIMIT || m > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge { n, m, limit: EXHAUSTIVE_LIMIT });
    }
    let users = oriented_halves(n);
    // the genre swap is a symmetry only when both genres share θ
    let movies = if params.kind == ModelKind::Atypical && params.theta_action == params.theta_romance {
        oriented_halves(m)
    } else {
        all_halves(m)
    };

    let cols: Vec<Vec<(usize, bool)>> = (0..m).map(|j| obs.ratings.col_entries(j)).collect();
    let revealed: usize = cols.iter().map(Vec::len).sum();
    let movie_cuts: Vec<usize> = movies.iter().map(|a| obs.movie.cut_size(a)).collect();
    let social_edges = obs.social.edge_count();
    let movie_edges = obs.movie.edge_count();

    let mut best: Option<(f64, GroundTruth)> = None;
    let mut matches_if_men_like = vec![0usize; m];
    for man in &users {
        // matches of column j when men nominally rate it 1
        for (j, col) in cols.iter().enumerate() {
            matches_if_men_like[j] = col.iter().filter(|&&(i, v)| v == man[i]).count();
        }
        let social_cross = obs.social.cut_size(man);
        for (action, &movie_cross) in movies.iter().zip(&movie_cuts) {
            let mut stats = SufficientStats {
                revealed,
                social_edges,
                cross_edges_social: social_cross,
                movie_edges,
                cross_edges_movie: movie_cross,
                ..Default::default()
            };
            let atypical = choose_atypical(params.kind, action, &cols, &matches_if_men_like, &mut stats);
            let nll = neg_log_likelihood_from_stats(&stats, params);
            if best.as_ref().is_none_or(|(b, _)| strictly_less(nll, *b)) {
                let xi = GroundTruth::from_labels_unchecked(man.clone(), action.clone(), atypical);
                best = Some((nll, xi));
            }
        }
    }
    Ok(best.expect("at least one candidate").1)
}

fn strictly_less(a: f64, b: f64) -> bool {
    a < b - 1e-12 * b.abs().max(1.0)
}

fn choose_atypical(
    kind: ModelKind,
    action: &[bool],
    cols: &[Vec<(usize, bool)>],
    matches_if_men_like: &[usize],
    stats: &mut SufficientStats,
) -> Vec<bool> {
    let m = action.len();
    let mut atypical = vec![false; m];
    let mut tied: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    let mut last_forced = [None::<usize>; 2];
    for j in 0..m {
        let g = usize::from(!action[j]);
        let r = cols[j].len();
        let typical = if action[j] { matches_if_men_like[j] } else { r - matches_if_men_like[j] };
        let mut matches = typical;
        if kind == ModelKind::Atypical {
            if 2 * typical < r {
                atypical[j] = true;
                last_forced[g] = Some(j);
                matches = r - typical;
            } else if 2 * typical == r {
                tied[g].push(j);
            }
        }
        stats.revealed_by_genre[g] += r;
        stats.matches_by_genre[g] += matches;
    }
    for g in 0..2 {
        if let Some(last) = last_forced[g] {
            for &j in tied[g].iter().filter(|&&j| j < last) {
                atypical[j] = true;
            }
        }
    }
    atypical
}

/// Per-restart record of a local search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartTrace {
    pub initial_nll: f64,
    pub final_nll: f64,
    pub moves: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub estimate: GroundTruth,
    pub nll: f64,
    pub restarts: Vec<RestartTrace>,
}

/// Randomized steepest-descent approximation of the ML estimate.
pub fn ml_local_search(obs: &Observation, params: &ModelParams, restarts: usize, seed: Seed) -> Result<GroundTruth> {
    Ok(local_search(obs, params, restarts, seed)?.estimate)
}

/// [`ml_local_search`] with the per-restart trace.
///
/// Every restart starts from a uniformly random balanced ground truth and
/// repeatedly applies the best likelihood-decreasing move among: swapping a
/// man with a woman, swapping an action movie with a romance movie, and (in
/// the atypical model) toggling one movie's atypical flag. Restarts run in
/// parallel with seeds derived from `seed` and are merged by likelihood, then
/// by encoding, so the result does not depend on scheduling.
pub fn local_search(obs: &Observation, params: &ModelParams, restarts: usize, seed: Seed) -> Result<SearchOutcome> {
    check_observation(obs, params)?;
    if restarts == 0 {
        return Err(Error::InvalidParams("local search needs at least one restart".into()));
    }
    let runs: Vec<(GroundTruth, RestartTrace)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed.derive_indexed("restart", r as u64).rng();
            let start = random_truth(params, &mut rng);
            let initial_nll = neg_log_likelihood(&start, obs, params).expect("checked shapes");
            let mut state = SearchState::new(obs, params, start);
            let moves = state.descend();
            let xi = orient(&state.truth(), params);
            let final_nll = neg_log_likelihood(&xi, obs, params).expect("checked shapes");
            (xi, RestartTrace { initial_nll, final_nll, moves })
        })
        .collect();
    let (estimate, nll) = runs
        .iter()
        .map(|(xi, t)| (xi, t.final_nll))
        .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.encoding().cmp(&b.0.encoding())))
        .map(|(xi, l)| (xi.clone(), l))
        .expect("at least one restart");
    Ok(SearchOutcome {
        estimate,
        nll,
        restarts: runs.into_iter().map(|(_, t)| t).collect(),
    })
}

fn random_truth(params: &ModelParams, rng: &mut impl Rng) -> GroundTruth {
    let half = |size: usize, rng: &mut dyn rand::RngCore| {
        let mut idx: Vec<usize> = (0..size).collect();
        idx.shuffle(rng);
        let mut labels = vec![false; size];
        for &i in &idx[..size / 2] {
            labels[i] = true;
        }
        labels
    };
    let man = half(params.n, rng);
    let action = half(params.m, rng);
    let atypical = (0..params.m)
        .map(|_| params.kind == ModelKind::Atypical && rng.random::<bool>())
        .collect();
    GroundTruth::from_labels_unchecked(man, action, atypical)
}

/// True iff the estimate equals the truth up to the simultaneous flip.
pub fn exact_recovery(xi_hat: &GroundTruth, xi_true: &GroundTruth) -> Result<bool> {
    xi_hat.check_shape(xi_true.n(), xi_true.m())?;
    Ok(canonicalize(xi_hat) == canonicalize(xi_true))
}

/// Incremental state for local search.
///
/// All per-node aggregates are integer counts, so move costs are exact
/// functions of the current labels and do not drift as moves are applied.
pub(crate) struct SearchState<'a> {
    obs: &'a Observation,
    kind: ModelKind,
    c: LikelihoodConstants,
    /// Per-genre entry costs: `[match, mismatch]`.
    cost: [[f64; 2]; 2],
    rows: Vec<Vec<(usize, bool)>>,
    cols: Vec<Vec<(usize, bool)>>,
    social: Vec<Vec<usize>>,
    movie: Vec<Vec<usize>>,
    man: Vec<bool>,
    action: Vec<bool>,
    atypical: Vec<bool>,
    /// Per user and genre: matching entries and revealed entries.
    user_match: Vec<[i64; 2]>,
    user_revealed: Vec<[i64; 2]>,
    col_match: Vec<i64>,
    social_same: Vec<i64>,
    movie_same: Vec<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Move {
    Users(usize, usize),
    Movies(usize, usize),
    Toggle(usize),
}

impl<'a> SearchState<'a> {
    pub(crate) fn new(obs: &'a Observation, params: &ModelParams, xi: GroundTruth) -> Self {
        let (man, action, atypical) = xi.into_labels();
        let cost = [params.theta_action, params.theta_romance].map(|t| [-(1.0 - t).ln(), -t.ln()]);
        let rows: Vec<_> = (0..params.n).map(|i| obs.ratings.row_entries(i)).collect();
        let cols: Vec<_> = (0..params.m).map(|j| obs.ratings.col_entries(j)).collect();
        let mut s = SearchState {
            obs,
            kind: params.kind,
            c: LikelihoodConstants::new(params),
            cost,
            rows,
            cols,
            social: obs.social.neighbor_lists(),
            movie: obs.movie.neighbor_lists(),
            man,
            action,
            atypical,
            user_match: vec![[0; 2]; params.n],
            user_revealed: vec![[0; 2]; params.n],
            col_match: vec![0; params.m],
            social_same: vec![0; params.n],
            movie_same: vec![0; params.m],
        };
        s.recompute();
        s
    }

    fn recompute(&mut self) {
        for i in 0..self.man.len() {
            self.user_match[i] = [0; 2];
            self.user_revealed[i] = [0; 2];
            self.social_same[i] = self.social[i].iter().filter(|&&k| self.man[k] == self.man[i]).count() as i64;
        }
        for j in 0..self.action.len() {
            let g = self.genre(j);
            let mut matches = 0;
            for &(i, v) in &self.cols[j] {
                let hit = self.matches(i, j, v);
                matches += i64::from(hit);
                self.user_match[i][g] += i64::from(hit);
                self.user_revealed[i][g] += 1;
            }
            self.col_match[j] = matches;
            self.movie_same[j] = self.movie[j].iter().filter(|&&k| self.action[k] == self.action[j]).count() as i64;
        }
    }

    fn genre(&self, j: usize) -> usize {
        usize::from(!self.action[j])
    }

    fn matches(&self, i: usize, j: usize, v: bool) -> bool {
        v == (self.man[i] == (self.action[j] ^ self.atypical[j]))
    }

    pub(crate) fn truth(&self) -> GroundTruth {
        GroundTruth::from_labels_unchecked(self.man.clone(), self.action.clone(), self.atypical.clone())
    }

    /// Change in `L` from flipping user `i` alone, ignoring its edge to a
    /// simultaneously flipped partner.
    fn user_gain(&self, i: usize) -> f64 {
        let mut rating = 0.0;
        for g in 0..2 {
            let (mt, r) = (self.user_match[i][g], self.user_revealed[i][g]);
            // matching entries become mismatches and vice versa
            rating += (mt - (r - mt)) as f64 * (self.cost[g][1] - self.cost[g][0]);
        }
        let same = self.social_same[i];
        let cross = self.social[i].len() as i64 - same;
        rating + self.c.d1 * (same - cross) as f64
    }

    fn column_cost(&self, matches: i64, j: usize, g: usize) -> f64 {
        let r = self.cols[j].len() as i64;
        matches as f64 * self.cost[g][0] + (r - matches) as f64 * self.cost[g][1]
    }

    fn movie_gain(&self, j: usize) -> f64 {
        let g = self.genre(j);
        let r = self.cols[j].len() as i64;
        let m = self.col_match[j];
        let rating = self.column_cost(r - m, j, 1 - g) - self.column_cost(m, j, g);
        let same = self.movie_same[j];
        let cross = self.movie[j].len() as i64 - same;
        rating + self.c.d2 * (same - cross) as f64
    }

    fn toggle_gain(&self, j: usize) -> f64 {
        let g = self.genre(j);
        let r = self.cols[j].len() as i64;
        let m = self.col_match[j];
        self.column_cost(r - m, j, g) - self.column_cost(m, j, g)
    }

    #[cfg(test)]
    pub(crate) fn move_delta(&self, mv: Move) -> f64 {
        match mv {
            Move::Users(a, b) => {
                let edge = f64::from(u8::from(self.obs.social.has_edge(a, b)));
                self.user_gain(a) + self.user_gain(b) + 2.0 * self.c.d1 * edge
            }
            Move::Movies(a, b) => {
                let edge = f64::from(u8::from(self.obs.movie.has_edge(a, b)));
                self.movie_gain(a) + self.movie_gain(b) + 2.0 * self.c.d2 * edge
            }
            Move::Toggle(j) => self.toggle_gain(j),
        }
    }

    /// Best pair `(a, b)` with `a` labeled and `b` unlabeled minimizing
    /// `gain(a) + gain(b) + 2d·A[a][b]`.
    fn best_pair(
        labels: &[bool],
        gains: &[f64],
        d: f64,
        adjacent: impl Fn(usize, usize) -> bool,
    ) -> Option<(f64, usize, usize)> {
        let mut left: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
        let mut right: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
        let by_gain = |a: &usize, b: &usize| gains[*a].total_cmp(&gains[*b]).then(a.cmp(b));
        left.sort_by(by_gain);
        right.sort_by(by_gain);
        let floor = (2.0 * d).min(0.0);
        let mut best: Option<(f64, usize, usize)> = None;
        let first_right = gains[*right.first()?];
        for &a in &left {
            if best.is_some_and(|(v, _, _)| gains[a] + first_right + floor >= v) {
                break;
            }
            for &b in &right {
                let base = gains[a] + gains[b];
                if best.is_some_and(|(v, _, _)| base + floor >= v) {
                    break;
                }
                let value = if d != 0.0 && adjacent(a, b) { base + 2.0 * d } else { base };
                if best.is_none_or(|(v, _, _)| value < v) {
                    best = Some((value, a, b));
                }
            }
        }
        best
    }

    fn best_move(&self) -> Option<(f64, Move)> {
        let mut best: Option<(f64, Move)> = None;
        let mut consider = |value: f64, mv: Move| {
            if best.is_none_or(|(v, _)| value < v) {
                best = Some((value, mv));
            }
        };
        let ug: Vec<f64> = (0..self.man.len()).map(|i| self.user_gain(i)).collect();
        if let Some((v, a, b)) = Self::best_pair(&self.man, &ug, self.c.d1, |a, b| self.obs.social.has_edge(a, b)) {
            consider(v, Move::Users(a, b));
        }
        let mg: Vec<f64> = (0..self.action.len()).map(|j| self.movie_gain(j)).collect();
        if let Some((v, a, b)) = Self::best_pair(&self.action, &mg, self.c.d2, |a, b| self.obs.movie.has_edge(a, b)) {
            consider(v, Move::Movies(a, b));
        }
        if self.kind == ModelKind::Atypical {
            for j in 0..self.action.len() {
                consider(self.toggle_gain(j), Move::Toggle(j));
            }
        }
        best
    }

    fn flip_user(&mut self, i: usize) {
        for &(j, v) in &self.rows[i] {
            let was = v == (self.man[i] == (self.action[j] ^ self.atypical[j]));
            self.col_match[j] += if was { -1 } else { 1 };
        }
        for g in 0..2 {
            self.user_match[i][g] = self.user_revealed[i][g] - self.user_match[i][g];
        }
        let now = !self.man[i];
        self.man[i] = now;
        for idx in 0..self.social[i].len() {
            let k = self.social[i][idx];
            self.social_same[k] += if self.man[k] == now { 1 } else { -1 };
        }
        self.social_same[i] = self.social[i].len() as i64 - self.social_same[i];
    }

    fn flip_movie(&mut self, j: usize) {
        let old = self.genre(j);
        for idx in 0..self.cols[j].len() {
            let (i, v) = self.cols[j][idx];
            let was = self.matches(i, j, v);
            self.user_match[i][old] -= i64::from(was);
            self.user_revealed[i][old] -= 1;
            self.user_match[i][1 - old] += i64::from(!was);
            self.user_revealed[i][1 - old] += 1;
        }
        self.col_match[j] = self.cols[j].len() as i64 - self.col_match[j];
        let now = !self.action[j];
        self.action[j] = now;
        for idx in 0..self.movie[j].len() {
            let k = self.movie[j][idx];
            self.movie_same[k] += if self.action[k] == now { 1 } else { -1 };
        }
        self.movie_same[j] = self.movie[j].len() as i64 - self.movie_same[j];
    }

    fn toggle(&mut self, j: usize) {
        let g = self.genre(j);
        for idx in 0..self.cols[j].len() {
            let (i, v) = self.cols[j][idx];
            self.user_match[i][g] += if self.matches(i, j, v) { -1 } else { 1 };
        }
        self.col_match[j] = self.cols[j].len() as i64 - self.col_match[j];
        self.atypical[j] = !self.atypical[j];
    }

    pub(crate) fn apply(&mut self, mv: Move) {
        match mv {
            Move::Users(a, b) => {
                self.flip_user(a);
                self.flip_user(b);
            }
            Move::Movies(a, b) => {
                self.flip_movie(a);
                self.flip_movie(b);
            }
            Move::Toggle(j) => self.toggle(j),
        }
    }

    /// Applies best moves until none decreases `L`; returns the move count.
    pub(crate) fn descend(&mut self) -> usize {
        let mut moves = 0;
        while let Some((delta, mv)) = self.best_move() {
            if delta >= -1e-9 {
                break;
            }
            self.apply(mv);
            moves += 1;
        }
        moves
    }
}
