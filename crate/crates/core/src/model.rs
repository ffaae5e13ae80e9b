//! Generative model: ground truth, nominal and personalized ratings, and the
//! two stochastic-block-model side graphs.
//!
//! Users are split into men and women, movies into action and romance, each
//! into equal halves. In the atypical model a subset of each genre is
//! atypical: its nominal column is the complement of the genre's usual
//! pattern. Nominal rating of user `i` for movie `j` is
//!
//! ```text
//! B[i][j] = (i is a man) == (j is action) XOR (j is atypical)
//! ```
//!
//! Each entry is flipped with the personalization probability of the movie's
//! genre, then revealed with probability `p`.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adjacency::Adjacency;
use crate::error::{Error, Result};
use crate::seed::Seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Every movie is typical for its genre; one personalization probability.
    Basic,
    /// Atypical movies allowed; per-genre personalization probabilities.
    Atypical,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::Basic => f.write_str("basic"),
            ModelKind::Atypical => f.write_str("atypical"),
        }
    }
}

/// Intra-/inter-cluster edge probabilities of a two-block SBM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub alpha: f64,
    pub beta: f64,
}

impl SbmParams {
    pub fn new(alpha: f64, beta: f64) -> Self {
        SbmParams { alpha, beta }
    }

    /// Erdős–Rényi graph carrying no cluster information.
    pub fn uninformative(prob: f64) -> Self {
        SbmParams {
            alpha: prob,
            beta: prob,
        }
    }

    fn validate(&self, which: &str) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParams(format!(
                    "{which} {name} = {v} must lie in (0, 1)"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    pub kind: ModelKind,
    pub n: usize,
    pub m: usize,
    /// Personalization probability of action movies (equal to `theta_romance` in the basic model).
    pub theta_action: f64,
    pub theta_romance: f64,
    pub social: SbmParams,
    pub movie: SbmParams,
    pub p: f64,
}

impl ModelParams {
    pub fn basic(n: usize, m: usize, theta: f64, social: SbmParams, movie: SbmParams, p: f64) -> Result<Self> {
        let params = ModelParams {
            kind: ModelKind::Basic,
            n,
            m,
            theta_action: theta,
            theta_romance: theta,
            social,
            movie,
            p,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn atypical(
        n: usize,
        m: usize,
        theta_action: f64,
        theta_romance: f64,
        social: SbmParams,
        movie: SbmParams,
        p: f64,
    ) -> Result<Self> {
        let params = ModelParams {
            kind: ModelKind::Atypical,
            n,
            m,
            theta_action,
            theta_romance,
            social,
            movie,
            p,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("n", self.n), ("m", self.m)] {
            if v < 2 || !v.is_multiple_of(2) {
                return Err(Error::InvalidParams(format!("{name} = {v} must be even and at least 2")));
            }
        }
        for (name, v) in [("theta_a", self.theta_action), ("theta_r", self.theta_romance)] {
            if !(v > 0.0 && v < 0.5) {
                return Err(Error::InvalidParams(format!("{name} = {v} must lie in (0, 1/2)")));
            }
        }
        if self.kind == ModelKind::Basic && self.theta_action != self.theta_romance {
            return Err(Error::InvalidParams(
                "basic model uses a single personalization probability".into(),
            ));
        }
        self.social.validate("social graph")?;
        self.movie.validate("movie graph")?;
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParams(format!("p = {} must lie in [0, 1]", self.p)));
        }
        Ok(())
    }

    /// Personalization probability for a movie of the given genre.
    pub fn theta(&self, action: bool) -> f64 {
        if action {
            self.theta_action
        } else {
            self.theta_romance
        }
    }

    pub fn with_p(&self, p: f64) -> Self {
        ModelParams { p, ..self.clone() }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    kind: ModelKind,
    n: usize,
    m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta_r: Option<f64>,
    alpha1: f64,
    beta1: f64,
    alpha2: f64,
    beta2: f64,
    p: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        let social = SbmParams::new(raw.alpha1, raw.beta1);
        let movie = SbmParams::new(raw.alpha2, raw.beta2);
        match raw.kind {
            ModelKind::Basic => {
                if raw.theta_a.is_some() || raw.theta_r.is_some() {
                    return Err(Error::InvalidParams("basic model takes `theta`, not `theta_a`/`theta_r`".into()));
                }
                let theta = raw
                    .theta
                    .ok_or_else(|| Error::InvalidParams("basic model requires `theta`".into()))?;
                ModelParams::basic(raw.n, raw.m, theta, social, movie, raw.p)
            }
            ModelKind::Atypical => {
                if raw.theta.is_some() {
                    return Err(Error::InvalidParams("atypical model takes `theta_a` and `theta_r`, not `theta`".into()));
                }
                match (raw.theta_a, raw.theta_r) {
                    (Some(a), Some(r)) => ModelParams::atypical(raw.n, raw.m, a, r, social, movie, raw.p),
                    _ => Err(Error::InvalidParams("atypical model requires `theta_a` and `theta_r`".into())),
                }
            }
        }
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        let (theta, theta_a, theta_r) = match p.kind {
            ModelKind::Basic => (Some(p.theta_action), None, None),
            ModelKind::Atypical => (None, Some(p.theta_action), Some(p.theta_romance)),
        };
        RawParams {
            kind: p.kind,
            n: p.n,
            m: p.m,
            theta,
            theta_a,
            theta_r,
            alpha1: p.social.alpha,
            beta1: p.social.beta,
            alpha2: p.movie.alpha,
            beta2: p.movie.beta,
            p: p.p,
        }
    }
}

/// Hidden clustering of users and movies.
///
/// Stored as per-node indicator vectors; the set views (`men()`,
/// `typical_action()`, ...) are derived on demand as sorted index lists.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundTruth {
    man: Vec<bool>,
    action: Vec<bool>,
    atypical: Vec<bool>,
}

impl GroundTruth {
    /// Builds and validates a ground truth from indicator vectors.
    pub fn from_labels(man: Vec<bool>, action: Vec<bool>, atypical: Vec<bool>) -> Result<Self> {
        let n = man.len();
        let m = action.len();
        if n < 2 || !n.is_multiple_of(2) || m < 2 || !m.is_multiple_of(2) {
            return Err(Error::Shape(format!("n = {n} and m = {m} must be even and at least 2")));
        }
        if atypical.len() != m {
            return Err(Error::Shape("atypical flags must cover every movie".into()));
        }
        let men = man.iter().filter(|&&x| x).count();
        let act = action.iter().filter(|&&x| x).count();
        if men != n / 2 {
            return Err(Error::Shape(format!("{men} men among {n} users; need exactly {}", n / 2)));
        }
        if act != m / 2 {
            return Err(Error::Shape(format!("{act} action movies among {m}; need exactly {}", m / 2)));
        }
        Ok(GroundTruth { man, action, atypical })
    }

    /// Basic-model ground truth from the men and action index sets.
    pub fn basic(n: usize, m: usize, men: &[usize], action: &[usize]) -> Result<Self> {
        GroundTruth::from_labels(indicator(n, men)?, indicator(m, action)?, vec![false; m])
    }

    /// Ground truth from all six sets. Women are the complement of `men`.
    pub fn from_sets(
        n: usize,
        m: usize,
        men: &[usize],
        typical_action: &[usize],
        atypical_action: &[usize],
        typical_romance: &[usize],
        atypical_romance: &[usize],
    ) -> Result<Self> {
        let mut seen = vec![false; m];
        let mut action = vec![false; m];
        let mut atypical = vec![false; m];
        let groups: [(&[usize], bool, bool); 4] = [
            (typical_action, true, false),
            (atypical_action, true, true),
            (typical_romance, false, false),
            (atypical_romance, false, true),
        ];
        for (set, is_action, is_atypical) in groups {
            for &j in set {
                if j >= m || seen[j] {
                    return Err(Error::Shape(format!("movie {j} out of range or listed twice")));
                }
                seen[j] = true;
                action[j] = is_action;
                atypical[j] = is_atypical;
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::Shape("movie sets must cover every movie".into()));
        }
        GroundTruth::from_labels(indicator(n, men)?, action, atypical)
    }

    pub fn n(&self) -> usize {
        self.man.len()
    }

    pub fn m(&self) -> usize {
        self.action.len()
    }

    pub fn is_man(&self, i: usize) -> bool {
        self.man[i]
    }

    pub fn is_action(&self, j: usize) -> bool {
        self.action[j]
    }

    pub fn is_atypical(&self, j: usize) -> bool {
        self.atypical[j]
    }

    /// True when men nominally rate movie `j` with 1.
    pub fn polarity(&self, j: usize) -> bool {
        self.action[j] ^ self.atypical[j]
    }

    pub fn nominal(&self, i: usize, j: usize) -> bool {
        self.man[i] == self.polarity(j)
    }

    pub fn man_labels(&self) -> &[bool] {
        &self.man
    }

    pub fn action_labels(&self) -> &[bool] {
        &self.action
    }

    pub fn atypical_labels(&self) -> &[bool] {
        &self.atypical
    }

    pub fn has_atypical(&self) -> bool {
        self.atypical.iter().any(|&a| a)
    }

    pub fn men(&self) -> Vec<usize> {
        select(&self.man, |x| x)
    }

    pub fn women(&self) -> Vec<usize> {
        select(&self.man, |x| !x)
    }

    pub fn action(&self) -> Vec<usize> {
        select(&self.action, |x| x)
    }

    pub fn romance(&self) -> Vec<usize> {
        select(&self.action, |x| !x)
    }

    pub fn typical_action(&self) -> Vec<usize> {
        (0..self.m()).filter(|&j| self.action[j] && !self.atypical[j]).collect()
    }

    pub fn atypical_action(&self) -> Vec<usize> {
        (0..self.m()).filter(|&j| self.action[j] && self.atypical[j]).collect()
    }

    pub fn typical_romance(&self) -> Vec<usize> {
        (0..self.m()).filter(|&j| !self.action[j] && !self.atypical[j]).collect()
    }

    pub fn atypical_romance(&self) -> Vec<usize> {
        (0..self.m()).filter(|&j| !self.action[j] && self.atypical[j]).collect()
    }

    pub fn check_kind(&self, kind: ModelKind) -> Result<()> {
        if kind == ModelKind::Basic && self.has_atypical() {
            return Err(Error::KindMismatch("basic model has no atypical movies".into()));
        }
        Ok(())
    }

    pub fn check_shape(&self, n: usize, m: usize) -> Result<()> {
        if self.n() != n || self.m() != m {
            return Err(Error::Shape(format!(
                "ground truth is {}x{}, expected {n}x{m}",
                self.n(),
                self.m()
            )));
        }
        Ok(())
    }

    /// Users are oriented when men hold a majority of the first `n/2` users;
    /// on an exact tie user 0 must be a man.
    pub fn users_oriented(&self) -> bool {
        labels_oriented(&self.man)
    }

    /// Movies are oriented when action movies hold a majority of the first
    /// `m/2` movies; on an exact tie movie 0 must be action.
    pub fn movies_oriented(&self) -> bool {
        labels_oriented(&self.action)
    }

    /// Canonical orientation: both users and movies oriented.
    pub fn is_canonical(&self) -> bool {
        self.users_oriented() && self.movies_oriented()
    }

    /// Lexicographic encoding used for tie-breaking: men, action movies, then
    /// atypical action and atypical romance movies, each as a sorted list.
    pub fn encoding(&self) -> (Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>) {
        (self.men(), self.action(), self.atypical_action(), self.atypical_romance())
    }

    pub(crate) fn into_labels(self) -> (Vec<bool>, Vec<bool>, Vec<bool>) {
        (self.man, self.action, self.atypical)
    }

    pub(crate) fn from_labels_unchecked(man: Vec<bool>, action: Vec<bool>, atypical: Vec<bool>) -> Self {
        GroundTruth { man, action, atypical }
    }

    /// Same ground truth after relabeling users by `user_perm` and movies by
    /// `movie_perm` (old index `v` becomes `perm[v]`).
    pub fn permuted(&self, user_perm: &[usize], movie_perm: &[usize]) -> GroundTruth {
        let mut man = vec![false; self.n()];
        for (i, &to) in user_perm.iter().enumerate() {
            man[to] = self.man[i];
        }
        let mut action = vec![false; self.m()];
        let mut atypical = vec![false; self.m()];
        for (j, &to) in movie_perm.iter().enumerate() {
            action[to] = self.action[j];
            atypical[to] = self.atypical[j];
        }
        GroundTruth { man, action, atypical }
    }
}

/// Majority of the first half labeled, with index 0 deciding exact ties.
pub fn labels_oriented(labels: &[bool]) -> bool {
    let half = labels.len() / 2;
    let count = labels[..half].iter().filter(|&&x| x).count();
    // compare count with half / 2 without rounding
    match (2 * count).cmp(&half) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => labels[0],
    }
}

fn indicator(len: usize, members: &[usize]) -> Result<Vec<bool>> {
    let mut out = vec![false; len];
    for &i in members {
        if i >= len || out[i] {
            return Err(Error::Shape(format!("index {i} out of range or repeated")));
        }
        out[i] = true;
    }
    Ok(out)
}

fn select(labels: &[bool], keep: impl Fn(bool) -> bool) -> Vec<usize> {
    labels
        .iter()
        .enumerate()
        .filter(|(_, &x)| keep(x))
        .map(|(i, _)| i)
        .collect()
}

/// Dense 0/1 matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    data: Vec<bool>,
}

impl BinaryMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| u8::from(self.get(i, j))).collect())
            .collect()
    }
}

/// Observed rating matrix: each entry is 0, 1 or erased.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

const ERASED: u8 = 2;

impl RatingMatrix {
    pub fn erased(rows: usize, cols: usize) -> Self {
        RatingMatrix {
            rows,
            cols,
            data: vec![ERASED; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Option<bool> {
        match self.data[i * self.cols + j] {
            ERASED => None,
            v => Some(v == 1),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: Option<bool>) {
        self.data[i * self.cols + j] = match value {
            None => ERASED,
            Some(v) => u8::from(v),
        };
    }

    pub fn revealed_count(&self) -> usize {
        self.data.iter().filter(|&&v| v != ERASED).count()
    }

    /// Revealed entries of row `i` as `(column, value)`.
    pub fn row_entries(&self, i: usize) -> Vec<(usize, bool)> {
        (0..self.cols)
            .filter_map(|j| self.get(i, j).map(|v| (j, v)))
            .collect()
    }

    /// Revealed entries of column `j` as `(row, value)`.
    pub fn col_entries(&self, j: usize) -> Vec<(usize, bool)> {
        (0..self.rows)
            .filter_map(|i| self.get(i, j).map(|v| (i, v)))
            .collect()
    }

    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> RatingMatrix {
        let mut out = RatingMatrix::erased(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(row_perm[i], col_perm[j], self.get(i, j));
            }
        }
        out
    }
}

/// Ratings plus the social (user) and movie graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub ratings: RatingMatrix,
    pub social: Adjacency,
    pub movie: Adjacency,
}

impl Observation {
    pub fn n(&self) -> usize {
        self.ratings.rows()
    }

    pub fn m(&self) -> usize {
        self.ratings.cols()
    }

    pub fn check_shape(&self) -> Result<()> {
        if self.social.size() != self.n() || self.movie.size() != self.m() {
            return Err(Error::Shape(format!(
                "ratings are {}x{} but graphs have {} and {} nodes",
                self.n(),
                self.m(),
                self.social.size(),
                self.movie.size()
            )));
        }
        Ok(())
    }

    pub fn permuted(&self, user_perm: &[usize], movie_perm: &[usize]) -> Observation {
        Observation {
            ratings: self.ratings.permuted(user_perm, movie_perm),
            social: self.social.permuted(user_perm),
            movie: self.movie.permuted(movie_perm),
        }
    }
}

/// How many atypical movies each genre gets when sampling a ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtypicalCounts {
    Fixed { action: usize, romance: usize },
    /// Each genre's count drawn uniformly from `0..=m/2`.
    UniformRandom,
}

impl AtypicalCounts {
    pub fn none() -> Self {
        AtypicalCounts::Fixed { action: 0, romance: 0 }
    }
}

/// Nominal rating matrix of a ground truth.
pub fn build_nominal_matrix(xi: &GroundTruth, kind: ModelKind) -> Result<BinaryMatrix> {
    xi.check_kind(kind)?;
    let (rows, cols) = (xi.n(), xi.m());
    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            data.push(xi.nominal(i, j));
        }
    }
    Ok(BinaryMatrix { rows, cols, data })
}

/// Uniformly random canonical ground truth.
///
/// The user and movie partitions are drawn uniformly and each is replaced by
/// its complement when it is not oriented, which maps the non-oriented half
/// bijectively onto the oriented half. Atypical subsets are then drawn
/// uniformly within each genre from an independent stream.
pub fn sample_ground_truth(params: &ModelParams, counts: AtypicalCounts, seed: Seed) -> Result<GroundTruth> {
    params.validate()?;
    let (n, m) = (params.n, params.m);
    let (count_a, count_r) = match (params.kind, counts) {
        (ModelKind::Basic, AtypicalCounts::Fixed { action: 0, romance: 0 }) => (0, 0),
        (ModelKind::Basic, AtypicalCounts::UniformRandom) => (0, 0),
        (ModelKind::Basic, AtypicalCounts::Fixed { .. }) => {
            return Err(Error::KindMismatch("basic model cannot have atypical movies".into()))
        }
        (ModelKind::Atypical, AtypicalCounts::Fixed { action, romance }) => {
            if action > m / 2 || romance > m / 2 {
                return Err(Error::InvalidParams(format!(
                    "atypical counts ({action}, {romance}) exceed m/2 = {}",
                    m / 2
                )));
            }
            (action, romance)
        }
        (ModelKind::Atypical, AtypicalCounts::UniformRandom) => {
            let mut rng = seed.derive("atypical-count").rng();
            (rng.random_range(0..=m / 2), rng.random_range(0..=m / 2))
        }
    };

    let mut rng = seed.derive("partition").rng();
    let man = oriented_half(n, &mut rng);
    let action = oriented_half(m, &mut rng);

    let mut rng = seed.derive("atypical").rng();
    let mut atypical = vec![false; m];
    for (genre, count) in [(true, count_a), (false, count_r)] {
        let members: Vec<usize> = (0..m).filter(|&j| action[j] == genre).collect();
        for &j in members.choose_multiple(&mut rng, count) {
            atypical[j] = true;
        }
    }
    Ok(GroundTruth { man, action, atypical })
}

fn oriented_half<R: Rng>(len: usize, rng: &mut R) -> Vec<bool> {
    let mut idx: Vec<usize> = (0..len).collect();
    idx.shuffle(rng);
    let mut labels = vec![false; len];
    for &i in &idx[..len / 2] {
        labels[i] = true;
    }
    if !labels_oriented(&labels) {
        labels.iter_mut().for_each(|x| *x = !*x);
    }
    labels
}

/// Personalizes the nominal matrix and erases entries.
///
/// Flip and reveal decisions come from separate streams derived from `seed`,
/// and each stream is consumed once per entry in row-major order, so the flip
/// pattern does not depend on `p` and the reveal pattern does not depend on
/// the personalization probabilities.
pub fn personalize_and_sample(
    nominal: &BinaryMatrix,
    params: &ModelParams,
    xi: &GroundTruth,
    seed: Seed,
) -> Result<RatingMatrix> {
    if nominal.rows() != params.n || nominal.cols() != params.m {
        return Err(Error::Shape(format!(
            "nominal matrix is {}x{}, params say {}x{}",
            nominal.rows(),
            nominal.cols(),
            params.n,
            params.m
        )));
    }
    xi.check_shape(params.n, params.m)?;
    let mut flips = seed.derive("flips").rng();
    let mut reveals = seed.derive("reveals").rng();
    let mut out = RatingMatrix::erased(params.n, params.m);
    for i in 0..params.n {
        for j in 0..params.m {
            let theta = params.theta(xi.is_action(j));
            let flipped = flips.random::<f64>() < theta;
            let revealed = reveals.random::<f64>() < params.p;
            if revealed {
                out.set(i, j, Some(nominal.get(i, j) ^ flipped));
            }
        }
    }
    Ok(out)
}

/// Two-block SBM: each unordered pair is joined with `alpha` when both
/// endpoints share a cluster and with `beta` otherwise.
pub fn sample_sbm(cluster_of: &[bool], alpha: f64, beta: f64, seed: Seed) -> Result<Adjacency> {
    SbmParams::new(alpha, beta).validate("graph")?;
    let size = cluster_of.len();
    let mut rng = seed.rng();
    let mut adj = Adjacency::empty(size);
    for a in 0..size {
        for b in a + 1..size {
            let prob = if cluster_of[a] == cluster_of[b] { alpha } else { beta };
            if rng.random::<f64>() < prob {
                adj.insert(a, b);
            }
        }
    }
    adj.finish();
    Ok(adj)
}

/// Ground truth and observation for one instance.
///
/// The movie graph is clustered by genre only; atypicality never affects it.
pub fn generate_instance(
    params: &ModelParams,
    counts: AtypicalCounts,
    seed: Seed,
) -> Result<(GroundTruth, Observation)> {
    let xi = sample_ground_truth(params, counts, seed.derive("truth"))?;
    let obs = observe(&xi, params, seed)?;
    Ok((xi, obs))
}

/// Fresh observation of a fixed ground truth.
pub fn observe(xi: &GroundTruth, params: &ModelParams, seed: Seed) -> Result<Observation> {
    params.validate()?;
    xi.check_shape(params.n, params.m)?;
    let nominal = build_nominal_matrix(xi, params.kind)?;
    let ratings = personalize_and_sample(&nominal, params, xi, seed.derive("ratings"))?;
    let social = sample_sbm(xi.man_labels(), params.social.alpha, params.social.beta, seed.derive("social"))?;
    let movie = sample_sbm(xi.action_labels(), params.movie.alpha, params.movie.beta, seed.derive("movie"))?;
    Ok(Observation { ratings, social, movie })
}
