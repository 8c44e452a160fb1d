//! Seeded synthetic datasets with the statistics of learned sparse
//! embeddings: skewed component frequencies and lognormal weights.

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SparseDataset, SparseVector, MAX_DIM};

pub const DEFAULT_ZIPF_EXPONENT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NnzDist {
    Constant,
    Poisson,
    LogNormal { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IdDist {
    Uniform,
    /// Component frequency follows rank⁻ˢ; ranks are scattered over the ID
    /// space by a seeded shuffle, as vocabulary IDs carry no frequency order.
    Zipf { s: f64 },
    /// Each document draws only even or only odd IDs.
    TwoCluster,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub docs: usize,
    pub dim: u32,
    pub nnz_mean: f64,
    pub nnz_dist: NnzDist,
    pub id_dist: IdDist,
    /// Parameters of the lognormal value distribution.
    pub value_mu: f64,
    pub value_sigma: f64,
    pub seed: u64,
    /// Random stream for the vectors. Specs that differ only in `stream`
    /// share their component frequency ranking but draw independent vectors.
    #[serde(default)]
    pub stream: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    SpladeLike,
    LilsrLike,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::SpladeLike => "splade-like",
            Preset::LilsrLike => "lilsr-like",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "splade-like" => Some(Preset::SpladeLike),
            "lilsr-like" => Some(Preset::LilsrLike),
            _ => None,
        }
    }

    /// Mean nonzeros of (documents, queries).
    pub fn nnz_means(self) -> (f64, f64) {
        match self {
            Preset::SpladeLike => (119.0, 43.0),
            Preset::LilsrLike => (387.0, 6.0),
        }
    }

    pub fn docs(self, docs: usize, seed: u64) -> GenSpec {
        GenSpec {
            docs,
            dim: 30522,
            nnz_mean: self.nnz_means().0,
            nnz_dist: NnzDist::LogNormal { sigma: 0.4 },
            id_dist: IdDist::Zipf {
                s: DEFAULT_ZIPF_EXPONENT,
            },
            value_mu: -0.5,
            value_sigma: 0.6,
            seed,
            stream: 0,
        }
    }

    /// Queries drawn over the same vocabulary as [`Preset::docs`] with the
    /// same seed, so frequent components coincide.
    pub fn queries(self, queries: usize, seed: u64) -> GenSpec {
        GenSpec {
            docs: queries,
            nnz_mean: self.nnz_means().1,
            stream: 1,
            ..self.docs(queries, seed)
        }
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::validation(format!("dimension {} outside [1, {MAX_DIM}]", self.dim)));
        }
        if !positive(self.nnz_mean) || self.nnz_mean >= self.dim as f64 {
            return Err(Error::validation(format!(
                "mean nonzeros {} must be positive and below the dimension {}",
                self.nnz_mean, self.dim
            )));
        }
        if self.docs == 0 || !positive(self.value_sigma) || !self.value_mu.is_finite() {
            return Err(Error::validation("document count and value sigma must be positive"));
        }
        match self.nnz_dist {
            NnzDist::LogNormal { sigma } if !positive(sigma) => {
                return Err(Error::validation("nnz sigma must be positive"))
            }
            _ => {}
        }
        match self.id_dist {
            IdDist::Zipf { s } if !positive(s) => Err(Error::validation("zipf exponent must be positive")),
            IdDist::TwoCluster if self.nnz_mean >= (self.dim / 2) as f64 => Err(Error::validation(
                "two-cluster mean nonzeros must be below half the dimension",
            )),
            _ => Ok(()),
        }
    }
}

/// Generates `spec.docs` vectors; identical specs give identical datasets.
pub fn generate(spec: &GenSpec) -> Result<SparseDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(spec.stream);
    let dim = spec.dim as usize;
    let values = LogNormal::new(spec.value_mu, spec.value_sigma).map_err(|e| Error::validation(e.to_string()))?;

    // the rank permutation is drawn from its own stream so document and query
    // specs sharing a seed share their frequent components
    let rank_to_id: Vec<u32> = match spec.id_dist {
        IdDist::Zipf { .. } => {
            let mut ids: Vec<u32> = (0..spec.dim).collect();
            ids.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15));
            ids
        }
        _ => Vec::new(),
    };
    let zipf = match spec.id_dist {
        IdDist::Zipf { s } => Some(Zipf::new(dim as f64, s).map_err(|e| Error::validation(e.to_string()))?),
        _ => None,
    };
    let cap = match spec.id_dist {
        IdDist::TwoCluster => dim / 2,
        _ => dim,
    };

    let mut ds = SparseDataset::new(spec.dim);
    let mut seen = vec![false; dim];
    for _ in 0..spec.docs {
        let nnz = sample_nnz(spec, &mut rng).clamp(1, cap);
        let mut components: Vec<u32> = match spec.id_dist {
            IdDist::Uniform => index::sample(&mut rng, dim, nnz).into_iter().map(|i| i as u32).collect(),
            IdDist::TwoCluster => {
                let parity = rng.random_range(0..2u32);
                index::sample(&mut rng, dim / 2, nnz)
                    .into_iter()
                    .map(|i| 2 * i as u32 + parity)
                    .collect()
            }
            IdDist::Zipf { .. } => {
                let zipf = zipf.as_ref().unwrap();
                let mut out = Vec::with_capacity(nnz);
                let mut attempts = 0;
                while out.len() < nnz && attempts < 50 * nnz {
                    let id = rank_to_id[zipf.sample(&mut rng) as usize - 1];
                    if !std::mem::replace(&mut seen[id as usize], true) {
                        out.push(id);
                    }
                    attempts += 1;
                }
                while out.len() < nnz {
                    let id = rng.random_range(0..spec.dim);
                    if !std::mem::replace(&mut seen[id as usize], true) {
                        out.push(id);
                    }
                }
                for &id in &out {
                    seen[id as usize] = false;
                }
                out
            }
        };
        components.sort_unstable();
        let vals = (0..components.len()).map(|_| values.sample(&mut rng) as f32).collect();
        ds.push(SparseVector::new(components, vals)?)?;
    }
    Ok(ds)
}

fn sample_nnz(spec: &GenSpec, rng: &mut ChaCha8Rng) -> usize {
    let m = spec.nnz_mean;
    match spec.nnz_dist {
        NnzDist::Constant => m.round() as usize,
        NnzDist::Poisson => Poisson::new(m).unwrap().sample(rng) as usize,
        NnzDist::LogNormal { sigma } => {
            let mu = m.ln() - sigma * sigma / 2.0;
            LogNormal::new(mu, sigma).unwrap().sample(rng).round() as usize
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_nnz(ds: &SparseDataset) -> f64 {
        ds.total_nnz() as f64 / ds.len() as f64
    }

    #[test]
    fn deterministic() {
        let spec = Preset::SpladeLike.docs(200, 42);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = GenSpec { seed: 43, ..spec.clone() };
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn nnz_means_follow_spec() {
        for dist in [NnzDist::Constant, NnzDist::Poisson, NnzDist::LogNormal { sigma: 0.5 }] {
            for id_dist in [IdDist::Uniform, IdDist::Zipf { s: 1.0 }, IdDist::TwoCluster] {
                let spec = GenSpec {
                    docs: 2000,
                    nnz_dist: dist,
                    id_dist,
                    ..Preset::SpladeLike.docs(0, 1)
                };
                let m = mean_nnz(&generate(&spec).unwrap());
                assert!((m - 119.0).abs() < 0.05 * 119.0, "{dist:?} {id_dist:?} {m}");
            }
        }
    }

    #[test]
    fn two_cluster_documents_have_one_parity() {
        let spec = GenSpec {
            id_dist: IdDist::TwoCluster,
            ..Preset::SpladeLike.docs(100, 3)
        };
        for d in generate(&spec).unwrap().docs() {
            let p = d.components()[0] % 2;
            assert!(d.components().iter().all(|c| c % 2 == p));
        }
    }

    #[test]
    fn query_stream_is_independent() {
        for seed in 0..5 {
            let d = &generate(&Preset::SpladeLike.docs(1, seed)).unwrap()[0];
            let q = &generate(&Preset::SpladeLike.queries(1, seed)).unwrap()[0];
            let shared = q.components().iter().filter(|c| d.components().binary_search(c).is_ok()).count();
            assert!(shared < q.nnz(), "query of seed {seed} is a subset of the first document");
        }
    }

    #[test]
    fn zipf_is_skewed() {
        let ds = generate(&Preset::SpladeLike.docs(500, 5)).unwrap();
        let mut freq = vec![0u32; 30522];
        for d in ds.docs() {
            for &c in d.components() {
                freq[c as usize] += 1;
            }
        }
        freq.sort_unstable_by(|a, b| b.cmp(a));
        assert!(freq[0] > 250);
        assert!(freq.iter().filter(|&&f| f == 0).count() > 10_000);
    }

    #[test]
    fn infeasible_specs() {
        let base = Preset::SpladeLike.docs(10, 0);
        assert!(generate(&GenSpec { nnz_mean: 30522.0, ..base.clone() }).is_err());
        assert!(generate(&GenSpec { docs: 0, ..base.clone() }).is_err());
        assert!(generate(&GenSpec { dim: 70000, ..base.clone() }).is_err());
        assert!(generate(&GenSpec {
            nnz_dist: NnzDist::LogNormal { sigma: -1.0 },
            ..base
        })
        .is_err());
    }
}
