//! Seeded synthetic multi-profile networks for tests and desk-scale runs.
//!
//! Household sizes come from a discrete power law (minimum 1), friendships
//! from a preferential-attachment process over a shuffled profile arrival
//! order, and metadata from per-attribute mixtures of a household value and a
//! global base distribution. Generation is single-threaded with one seeded
//! generator and a fixed draw order, so a given config is byte-reproducible.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashSet;

use super::date;
use crate::error::{Error, Result};
use crate::graph::{MultiProfileNetwork, NetworkBuilder, ProfileId, ProfileMeta};

/// Household-correlation strength per attribute, each in `[0, 1]`.
///
/// For a categorical attribute with strength `c`, a profile copies its
/// household's value with probability `c` and otherwise draws fresh from the
/// global base distribution, so the within-household agreement probability is
/// `c² + (1 − c²)·Σᵢ pᵢ²` — the configured correlation mixed with the base
/// distribution's collision mass.
#[derive(Debug, Clone, Serialize)]
pub struct MetadataModel {
    pub race: f64,
    pub sex: f64,
    pub coloration: f64,
    pub weight: f64,
    pub birth_date: f64,
    /// 0 = every profile joins independently; 1 = each household's profiles
    /// join in a burst, with gaps drawn at the configured scale.
    pub join_date: f64,
    /// Fraction of households that carry a location. Located households put
    /// all their profiles on one city point.
    pub location_coverage: f64,
}

impl MetadataModel {
    /// No household signal at all (and no locations).
    pub fn uncorrelated() -> Self {
        MetadataModel {
            race: 0.0,
            sex: 0.0,
            coloration: 0.0,
            weight: 0.0,
            birth_date: 0.0,
            join_date: 0.0,
            location_coverage: 0.0,
        }
    }

    /// The same strength for every attribute, with full location coverage.
    pub fn uniform(strength: f64) -> Self {
        MetadataModel {
            race: strength,
            sex: strength,
            coloration: strength,
            weight: strength,
            birth_date: strength,
            join_date: strength,
            location_coverage: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("race", self.race),
            ("sex", self.sex),
            ("coloration", self.coloration),
            ("weight", self.weight),
            ("birth_date", self.birth_date),
            ("join_date", self.join_date),
            ("location_coverage", self.location_coverage),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "metadata_model.{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Configuration for [`generate_synthetic`].
#[derive(Debug, Clone, Serialize)]
pub struct SynthConfig {
    pub n_accounts: usize,
    /// Power-law exponent for household sizes (> 1, minimum size 1).
    pub household_exponent: f64,
    /// Target degree-distribution exponent (> 1). Values at or below 3
    /// saturate to pure preferential attachment; above 3 a uniform-attachment
    /// admixture flattens the tail accordingly.
    pub degree_exponent: f64,
    /// Target mean degree 2|E|/|V| (> 0).
    pub mean_degree: f64,
    /// Probability that a candidate friendship inside one household is kept.
    /// 0 forbids intra-household edges entirely.
    pub intra_household_edge_prob: f64,
    pub metadata_model: MetadataModel,
    /// Scale in days of within-household join-date gaps (used when
    /// `metadata_model.join_date > 0`).
    pub join_date_burst_days: f64,
    pub seed: u64,
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.n_accounts == 0 {
            return Err(Error::InvalidConfig("n_accounts must be positive".into()));
        }
        if !(self.household_exponent > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "household_exponent must exceed 1, got {}",
                self.household_exponent
            )));
        }
        if !(self.degree_exponent > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "degree_exponent must exceed 1, got {}",
                self.degree_exponent
            )));
        }
        if !(self.mean_degree > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "mean_degree must be positive, got {}",
                self.mean_degree
            )));
        }
        if !(0.0..=1.0).contains(&self.intra_household_edge_prob) {
            return Err(Error::InvalidConfig(format!(
                "intra_household_edge_prob must lie in [0, 1], got {}",
                self.intra_household_edge_prob
            )));
        }
        if !(self.join_date_burst_days >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "join_date_burst_days must be non-negative, got {}",
                self.join_date_burst_days
            )));
        }
        self.metadata_model.validate()
    }
}

/// Exact inverse-CDF sampler for the discrete power law
/// `P(X = k) ∝ k^(-exponent)` on `x_min ..= cap`, where the cap is chosen so
/// the truncated tail mass is negligible for exponents > 1.
pub struct ZetaSampler {
    x_min: u64,
    cdf: Vec<f64>,
}

impl ZetaSampler {
    pub fn new(exponent: f64, x_min: u64) -> ZetaSampler {
        assert!(exponent > 1.0 && x_min >= 1);
        let cap = (x_min * 1000).max(100_000);
        let mut cdf = Vec::with_capacity((cap - x_min + 1) as usize);
        let mut acc = 0.0f64;
        for k in x_min..=cap {
            acc += (k as f64).powf(-exponent);
            cdf.push(acc);
        }
        let total = acc;
        for c in &mut cdf {
            *c /= total;
        }
        ZetaSampler { x_min, cdf }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> u64 {
        let u: f64 = rng.gen();
        let idx = self.cdf.partition_point(|&c| c < u);
        self.x_min + idx.min(self.cdf.len() - 1) as u64
    }
}

/// Global base distributions for the categorical attributes. Probabilities
/// are harmonic-decay weights, so a few tokens dominate the mass.
struct Categorical {
    tokens: Vec<String>,
    cdf: Vec<f64>,
}

impl Categorical {
    fn harmonic(prefix: &str, n: usize) -> Categorical {
        let weights: Vec<f64> = (0..n).map(|i| 1.0 / (i + 1) as f64).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        Categorical {
            tokens: (0..n).map(|i| format!("{prefix}{i:02}")).collect(),
            cdf,
        }
    }

    fn draw(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen();
        self.cdf.partition_point(|&c| c < u).min(self.tokens.len() - 1)
    }
}

fn weight_range_token(weight: f64) -> &'static str {
    match weight {
        w if w <= 10.0 => "1-10",
        w if w <= 25.0 => "11-25",
        w if w <= 50.0 => "26-50",
        w if w <= 100.0 => "51-100",
        _ => "100+",
    }
}

fn edge_key(u: u32, v: u32) -> u64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    ((a as u64) << 32) | b as u64
}

/// Generate a network from `cfg`. Deterministic for a fixed seed.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<MultiProfileNetwork> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // Household sizes, then the profile → account layout.
    let size_sampler = ZetaSampler::new(cfg.household_exponent, 1);
    let sizes: Vec<u64> = (0..cfg.n_accounts).map(|_| size_sampler.sample(&mut rng)).collect();
    let n_profiles: usize = sizes.iter().map(|&s| s as usize).sum();
    let mut account_of: Vec<u32> = Vec::with_capacity(n_profiles);
    for (a, &s) in sizes.iter().enumerate() {
        for _ in 0..s {
            account_of.push(a as u32);
        }
    }

    // Metadata. Households are visited in order, members in order, so the
    // draw sequence is fixed.
    let races = Categorical::harmonic("race", 12);
    let sexes = Categorical::harmonic("sex", 2);
    let colorations = Categorical::harmonic("color", 8);

    let join_lo = date::from_ymd(2003, 1, 1);
    let join_hi = date::from_ymd(2012, 3, 1);
    let window = (join_hi - join_lo) as i64;

    // City-level coordinates: whole degrees, like geocoded city centroids, so
    // distinct households can land on the exact same point.
    let n_cities = 500usize;
    let cities: Vec<(f64, f64)> = (0..n_cities)
        .map(|_| {
            (
                rng.gen_range(-60.0f64..72.0).round(),
                rng.gen_range(-180.0f64..180.0).round(),
            )
        })
        .collect();
    let city_picker = Categorical::harmonic("city", n_cities);

    let m = &cfg.metadata_model;
    let mut metas: Vec<ProfileMeta> = Vec::with_capacity(n_profiles);
    let mut profile = 0usize;
    for &s in &sizes {
        let hh_race = races.draw(&mut rng);
        let hh_sex = sexes.draw(&mut rng);
        let hh_color = colorations.draw(&mut rng);
        let hh_weight = 4.0 + 46.0 * rng.gen::<f64>();
        let hh_birth = join_lo - rng.gen_range(0..8 * 365) + rng.gen_range(0..window) as i32;
        let hh_location = if rng.gen::<f64>() < m.location_coverage {
            Some(cities[city_picker.draw(&mut rng)])
        } else {
            None
        };
        let hh_join_base = join_lo + rng.gen_range(0..window) as i32;

        let mut prev_join = hh_join_base;
        for k in 0..s {
            let race = if rng.gen::<f64>() < m.race {
                hh_race
            } else {
                races.draw(&mut rng)
            };
            let sex = if rng.gen::<f64>() < m.sex {
                hh_sex
            } else {
                sexes.draw(&mut rng)
            };
            let color = if rng.gen::<f64>() < m.coloration {
                hh_color
            } else {
                colorations.draw(&mut rng)
            };
            let weight = if rng.gen::<f64>() < m.weight {
                (hh_weight * (1.0 + 0.02 * (rng.gen::<f64>() - 0.5))).max(0.1)
            } else {
                4.0 + 46.0 * rng.gen::<f64>()
            };
            let join_date = if k == 0 {
                hh_join_base
            } else if rng.gen::<f64>() < m.join_date {
                let gap: f64 = -cfg.join_date_burst_days * (1.0 - rng.gen::<f64>()).ln();
                (prev_join as i64 + gap.round() as i64).min((join_hi - 1) as i64) as i32
            } else {
                join_lo + rng.gen_range(0..window) as i32
            };
            prev_join = join_date;
            let birth_date = if rng.gen::<f64>() < m.birth_date {
                hh_birth + rng.gen_range(-30..=30)
            } else {
                join_date - rng.gen_range(0..8 * 365)
            };
            metas.push(ProfileMeta {
                race: Some(races.tokens[race].clone()),
                sex: Some(sexes.tokens[sex].clone()),
                coloration: Some(colorations.tokens[color].clone()),
                weight: Some(weight),
                weight_range: Some(weight_range_token(weight).to_owned()),
                birth_date: Some(birth_date),
                join_date,
                location: hh_location,
            });
            profile += 1;
        }
    }
    debug_assert_eq!(profile, n_profiles);

    // Friendships: preferential attachment over a shuffled arrival order, so
    // household membership is independent of arrival time.
    let mut arrival: Vec<u32> = (0..n_profiles as u32).collect();
    arrival.shuffle(&mut rng);

    let m_edges = cfg.mean_degree / 2.0;
    let m_floor = m_edges.floor() as usize;
    let m_frac = m_edges - m_edges.floor();
    // Uniform/preferential mixture: attaching uniformly with probability
    // 1 − p is equivalent to a `degree + a` kernel, which steepens the tail
    // exponent above the pure-PA value of 3.
    let p_pref = if cfg.degree_exponent <= 3.0 {
        1.0
    } else {
        (2.0 / (cfg.degree_exponent - 1.0)).clamp(0.0, 1.0)
    };

    let mut endpoints: Vec<u32> = Vec::with_capacity(2 * (n_profiles * (m_floor + 1)));
    let mut existing: HashSet<u64> = HashSet::new();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for t in 1..n_profiles {
        let node = arrival[t];
        let mut quota = m_floor + usize::from(rng.gen::<f64>() < m_frac);
        quota = quota.min(t);
        for _ in 0..quota {
            let mut chosen = None;
            for _attempt in 0..200 {
                let target = if !endpoints.is_empty() && rng.gen::<f64>() < p_pref {
                    endpoints[rng.gen_range(0..endpoints.len())]
                } else {
                    arrival[rng.gen_range(0..t)]
                };
                if target == node || existing.contains(&edge_key(node, target)) {
                    continue;
                }
                if account_of[node as usize] == account_of[target as usize] {
                    if cfg.intra_household_edge_prob == 0.0
                        || rng.gen::<f64>() >= cfg.intra_household_edge_prob
                    {
                        continue;
                    }
                }
                chosen = Some(target);
                break;
            }
            if let Some(target) = chosen {
                existing.insert(edge_key(node, target));
                edges.push((node, target));
                endpoints.push(node);
                endpoints.push(target);
            }
        }
    }

    let allows_intra = cfg.intra_household_edge_prob > 0.0;
    let mut builder = NetworkBuilder::new(allows_intra);
    let id_width = n_profiles.max(cfg.n_accounts).to_string().len().max(6);
    for (i, meta) in metas.into_iter().enumerate() {
        builder.add_profile(
            &format!("p{i:0id_width$}"),
            &format!("h{:0id_width$}", account_of[i]),
            meta,
        );
    }
    for &(u, v) in &edges {
        builder.add_edge(
            ProfileId::from_index(u as usize),
            ProfileId::from_index(v as usize),
        );
    }
    Ok(builder.finish()?.0)
}
