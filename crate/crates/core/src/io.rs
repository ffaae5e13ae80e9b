//! Instance files: model parameters, an optional ground truth and an
//! observation, stored as TOML.
//!
//! ```toml
//! [params]
//! kind = "basic"
//! n = 4
//! m = 4
//! theta = 0.2
//! alpha1 = 0.5
//! beta1 = 0.5
//! alpha2 = 0.5
//! beta2 = 0.5
//! p = 0.5
//!
//! [truth]
//! men = "1100"
//! action = "1010"
//! atypical = "0000"
//!
//! [observation]
//! ratings = ["1-1-", "--10", "0101", "----"]
//! social = [[0, 1], [2, 3]]
//! movie = [[0, 2]]
//! ```
//!
//! Ratings use `1`, `0`, and `-` for an erased entry.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adjacency::Adjacency;
use crate::error::{Error, Result};
use crate::model::{GroundTruth, ModelParams, Observation, RatingMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub params: ModelParams,
    pub truth: Option<GroundTruth>,
    pub observation: Observation,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    params: ModelParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truth: Option<RawTruth>,
    observation: RawObservation,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTruth {
    men: String,
    action: String,
    atypical: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObservation {
    ratings: Vec<String>,
    social: Vec<(usize, usize)>,
    movie: Vec<(usize, usize)>,
}

fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn parse_bits(field: &str, s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '1' => Ok(true),
            '0' => Ok(false),
            _ => Err(Error::Format(format!("{field}: unexpected character {c:?}"))),
        })
        .collect()
}

fn parse_ratings(rows: &[String], n: usize, m: usize) -> Result<RatingMatrix> {
    if rows.len() != n {
        return Err(Error::Format(format!("ratings: expected {n} rows, found {}", rows.len())));
    }
    let mut ratings = RatingMatrix::erased(n, m);
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<char> = row.chars().collect();
        if cells.len() != m {
            return Err(Error::Format(format!("ratings row {i}: expected {m} entries, found {}", cells.len())));
        }
        for (j, c) in cells.into_iter().enumerate() {
            let value = match c {
                '1' => Some(true),
                '0' => Some(false),
                '-' => None,
                _ => return Err(Error::Format(format!("ratings row {i}: unexpected character {c:?}"))),
            };
            ratings.set(i, j, value);
        }
    }
    Ok(ratings)
}

fn ratings_to_rows(ratings: &RatingMatrix) -> Vec<String> {
    (0..ratings.rows())
        .map(|i| {
            (0..ratings.cols())
                .map(|j| match ratings.get(i, j) {
                    Some(true) => '1',
                    Some(false) => '0',
                    None => '-',
                })
                .collect()
        })
        .collect()
}

impl Instance {
    pub fn new(params: ModelParams, truth: Option<GroundTruth>, observation: Observation) -> Result<Self> {
        params.validate()?;
        observation.check_shape()?;
        if observation.n() != params.n || observation.m() != params.m {
            return Err(Error::Shape(format!(
                "observation is {}x{} but params say {}x{}",
                observation.n(),
                observation.m(),
                params.n,
                params.m
            )));
        }
        if let Some(xi) = &truth {
            xi.check_shape(params.n, params.m)?;
            xi.check_kind(params.kind)?;
        }
        Ok(Instance { params, truth, observation })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        let raw = RawInstance {
            params: self.params.clone(),
            truth: self.truth.as_ref().map(|xi| RawTruth {
                men: bits_to_string(xi.man_labels()),
                action: bits_to_string(xi.action_labels()),
                atypical: bits_to_string(xi.atypical_labels()),
            }),
            observation: RawObservation {
                ratings: ratings_to_rows(&self.observation.ratings),
                social: self.observation.social.edges(),
                movie: self.observation.movie.edges(),
            },
        };
        toml::to_string(&raw).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawInstance = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let (n, m) = (raw.params.n, raw.params.m);
        let truth = match raw.truth {
            Some(t) => Some(GroundTruth::from_labels(
                parse_bits("truth.men", &t.men)?,
                parse_bits("truth.action", &t.action)?,
                parse_bits("truth.atypical", &t.atypical)?,
            )?),
            None => None,
        };
        let observation = Observation {
            ratings: parse_ratings(&raw.observation.ratings, n, m)?,
            social: Adjacency::from_edges(n, &raw.observation.social)?,
            movie: Adjacency::from_edges(m, &raw.observation.movie)?,
        };
        Instance::new(raw.params, truth, observation)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Instance::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_toml_string()?.as_bytes())
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}
