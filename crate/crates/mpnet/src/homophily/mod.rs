//! Assortativity (homophily) of profile attributes at two levels: across
//! friendship edges and within households, plus the ratio comparing them.
//!
//! Categorical attributes use the mixing-matrix assortativity coefficient
//! with its analytic standard error; numeric attributes use the symmetrized
//! pair correlation with a seeded permutation p-value; locations use the
//! distance correlation over great-circle distances on a seeded subsample.

mod dcor;

pub use dcor::{distance_correlation, great_circle_km, EARTH_RADIUS_KM};

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::graph::{MultiProfileNetwork, ProfileId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairLevel {
    Friendship,
    Household,
}

impl PairLevel {
    pub fn subscript(self) -> &'static str {
        match self {
            PairLevel::Friendship => "p",
            PairLevel::Household => "a",
        }
    }
}

/// The connected-pair population at one level: friendship edges, or all
/// same-household pairs. Pairs are unordered and deduplicated.
pub struct PairPopulation<'a> {
    net: &'a MultiProfileNetwork,
    level: PairLevel,
}

impl<'a> PairPopulation<'a> {
    pub fn new(net: &'a MultiProfileNetwork, level: PairLevel) -> Self {
        PairPopulation { net, level }
    }

    pub fn level(&self) -> PairLevel {
        self.level
    }

    pub fn net(&self) -> &'a MultiProfileNetwork {
        self.net
    }

    pub fn count(&self) -> u64 {
        match self.level {
            PairLevel::Friendship => self.net.edge_count() as u64,
            PairLevel::Household => self.net.family_pair_count(),
        }
    }

    pub fn pairs(&self) -> Box<dyn Iterator<Item = (ProfileId, ProfileId)> + 'a> {
        match self.level {
            PairLevel::Friendship => Box::new(self.net.graph().edges().map(|(u, v)| {
                (
                    ProfileId::from_index(u as usize),
                    ProfileId::from_index(v as usize),
                )
            })),
            PairLevel::Household => Box::new(self.net.family_pairs()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoricalAttr {
    Race,
    Sex,
    Coloration,
    WeightRange,
}

impl CategoricalAttr {
    pub fn name(self) -> &'static str {
        match self {
            CategoricalAttr::Race => "race",
            CategoricalAttr::Sex => "sex",
            CategoricalAttr::Coloration => "coloration",
            CategoricalAttr::WeightRange => "weight_range",
        }
    }

    fn value(self, net: &MultiProfileNetwork, p: ProfileId) -> Option<&str> {
        let m = net.meta(p);
        match self {
            CategoricalAttr::Race => m.race.as_deref(),
            CategoricalAttr::Sex => m.sex.as_deref(),
            CategoricalAttr::Coloration => m.coloration.as_deref(),
            CategoricalAttr::WeightRange => m.weight_range.as_deref(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericAttr {
    /// Friendship degree in the profile graph, used for both levels.
    FriendCount,
    BirthDate,
    JoinDate,
    /// Age at profile creation in days; negative join ages are excluded.
    JoinAge,
    Weight,
}

impl NumericAttr {
    pub fn name(self) -> &'static str {
        match self {
            NumericAttr::FriendCount => "friend_count",
            NumericAttr::BirthDate => "birth_date",
            NumericAttr::JoinDate => "join_date",
            NumericAttr::JoinAge => "join_age",
            NumericAttr::Weight => "weight",
        }
    }

    fn value(self, net: &MultiProfileNetwork, p: ProfileId) -> Option<f64> {
        let m = net.meta(p);
        match self {
            NumericAttr::FriendCount => Some(net.graph().degree(p.index()) as f64),
            NumericAttr::BirthDate => m.birth_date.map(|d| d as f64),
            NumericAttr::JoinDate => Some(m.join_date as f64),
            NumericAttr::JoinAge => m.join_age_days().filter(|&a| a >= 0).map(|a| a as f64),
            NumericAttr::Weight => m.weight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Categorical,
    Pearson,
    DistanceCorrelation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Uncertainty {
    StdError(f64),
    PValue(f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct AssortativityResult {
    pub attribute: String,
    pub level: PairLevel,
    pub method: Method,
    pub r: f64,
    pub uncertainty: Uncertainty,
    pub n_pairs: usize,
    /// Fraction of the level's pairs where the attribute was usable.
    pub coverage: f64,
}

impl AssortativityResult {
    /// Significance marker using the reporting thresholds: `++`/`+` for
    /// standard errors below 0.1% / 1%, `**`/`*` for p-values below
    /// 0.001 / 0.01.
    pub fn significance(&self) -> &'static str {
        match self.uncertainty {
            Uncertainty::StdError(e) => {
                if e < 0.001 {
                    "++"
                } else if e < 0.01 {
                    "+"
                } else {
                    ""
                }
            }
            Uncertainty::PValue(p) => {
                if p < 0.001 {
                    "**"
                } else if p < 0.01 {
                    "*"
                } else {
                    ""
                }
            }
        }
    }
}

/// Assortativity of a categorical attribute over a pair population.
///
/// Builds the symmetric mixing distribution (each unordered pair contributes
/// half a count in each direction) and applies
/// `r = (Σ eᵢᵢ − Σ aᵢ²) / (1 − Σ aᵢ²)` with the analytic standard error.
pub fn categorical_assortativity(
    pop: &PairPopulation,
    attr: CategoricalAttr,
) -> Result<AssortativityResult> {
    let net = pop.net();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut counts: Vec<Vec<u64>> = Vec::new();
    let mut used = 0usize;
    let mut total = 0u64;
    for (u, v) in pop.pairs() {
        total += 1;
        let (Some(cu), Some(cv)) = (attr.value(net, u), attr.value(net, v)) else {
            continue;
        };
        let iu = intern(&mut index, &mut counts, cu);
        let iv = intern(&mut index, &mut counts, cv);
        counts[iu][iv] += 1;
        counts[iv][iu] += 1;
        used += 1;
    }
    if used < 2 {
        return Err(Error::InsufficientPairs {
            needed: 2,
            available: used,
        });
    }
    let k = counts.len();
    if k < 2 {
        return Err(Error::ConstantAttribute);
    }

    let mass = (2 * used) as f64;
    let mut diag = 0.0f64;
    let mut margin_sq = 0.0f64;
    let mut margin_cu = 0.0f64;
    for i in 0..k {
        diag += counts[i][i] as f64 / mass;
        let a_i: f64 = counts[i].iter().sum::<u64>() as f64 / mass;
        margin_sq += a_i * a_i;
        margin_cu += a_i * a_i * a_i;
    }
    let denom = 1.0 - margin_sq;
    if denom <= f64::EPSILON {
        return Err(Error::ConstantAttribute);
    }
    let r = (diag - margin_sq) / denom;
    let var = (diag + margin_sq * margin_sq - 2.0 * margin_cu) / (used as f64 * denom * denom);
    let std_error = var.max(0.0).sqrt();

    Ok(AssortativityResult {
        attribute: attr.name().to_string(),
        level: pop.level(),
        method: Method::Categorical,
        r,
        uncertainty: Uncertainty::StdError(std_error),
        n_pairs: used,
        coverage: used as f64 / total.max(1) as f64,
    })
}

fn intern(index: &mut HashMap<String, usize>, counts: &mut Vec<Vec<u64>>, token: &str) -> usize {
    if let Some(&i) = index.get(token) {
        return i;
    }
    let i = counts.len();
    index.insert(token.to_owned(), i);
    for row in counts.iter_mut() {
        row.push(0);
    }
    counts.push(vec![0; i + 1]);
    i
}

fn symmetrized_correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mean = (exec::stable_sum(xs) + exec::stable_sum(ys)) / (2.0 * n);
    let mut var = 0.0;
    let mut cov = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean;
        let dy = y - mean;
        var += dx * dx + dy * dy;
        cov += 2.0 * dx * dy;
    }
    let scale: f64 = xs.iter().chain(ys).map(|v| v * v).sum::<f64>() / (2.0 * n);
    if var <= 2.0 * n * f64::EPSILON * scale.max(1e-300) {
        return Err(Error::ZeroVariance);
    }
    Ok(cov / var)
}

/// How many permutations the numeric and distance tests run.
#[derive(Debug, Clone, Serialize)]
pub struct HomophilyOptions {
    pub seed: u64,
    pub numeric_permutations: usize,
    /// Pair subsample for the distance-correlation estimate.
    pub dcor_sample: usize,
    pub dcor_permutations: usize,
    /// Pair subsample for the distance-correlation permutation p-value
    /// (the test is quadratic per permutation).
    pub dcor_pvalue_sample: usize,
}

impl Default for HomophilyOptions {
    fn default() -> Self {
        HomophilyOptions {
            seed: 0,
            numeric_permutations: 1_000,
            dcor_sample: 10_000,
            dcor_permutations: 200,
            dcor_pvalue_sample: 2_000,
        }
    }
}

/// Assortativity of a numeric attribute: the pair correlation over the
/// symmetrized pair list, `r = cov(X, Y) / var(X)`, with a seeded two-sided
/// permutation p-value (endpoint values shuffled across pair slots).
pub fn numeric_assortativity(
    pop: &PairPopulation,
    attr: NumericAttr,
    opts: &HomophilyOptions,
) -> Result<AssortativityResult> {
    let net = pop.net();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut total = 0u64;
    for (u, v) in pop.pairs() {
        total += 1;
        if let (Some(x), Some(y)) = (attr.value(net, u), attr.value(net, v)) {
            xs.push(x);
            ys.push(y);
        }
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::InsufficientPairs {
            needed: 2,
            available: n,
        });
    }
    let r = symmetrized_correlation(&xs, &ys)?;

    // Permutation null: reshuffle the pooled endpoint values over the pair
    // slots. The pooled mean and variance are permutation-invariant, so only
    // the covariance is recomputed.
    let mut pool = xs.clone();
    pool.extend_from_slice(&ys);
    let exceed = exec::map_reduce(
        opts.numeric_permutations,
        0usize,
        |i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i as u64 + 1);
            let mut shuffled = pool.clone();
            shuffled.shuffle(&mut rng);
            let (px, py) = shuffled.split_at(n);
            let r_perm = symmetrized_correlation(px, py).unwrap_or(0.0);
            usize::from(r_perm.abs() >= r.abs() - 1e-12)
        },
        |a, b| a + b,
    );
    let p = (exceed + 1) as f64 / (opts.numeric_permutations + 1) as f64;

    Ok(AssortativityResult {
        attribute: attr.name().to_string(),
        level: pop.level(),
        method: Method::Pearson,
        r,
        uncertainty: Uncertainty::PValue(p),
        n_pairs: n,
        coverage: n as f64 / total.max(1) as f64,
    })
}

/// Location assortativity: distance correlation between the endpoint
/// coordinate samples of up to `sample_size` seeded pairs.
pub fn distance_assortativity(
    pop: &PairPopulation,
    sample_size: usize,
    seed: u64,
    opts: &HomophilyOptions,
) -> Result<AssortativityResult> {
    let net = pop.net();
    let mut pairs: Vec<((f64, f64), (f64, f64))> = Vec::new();
    let mut total = 0u64;
    for (u, v) in pop.pairs() {
        total += 1;
        if let (Some(a), Some(b)) = (net.meta(u).location, net.meta(v).location) {
            pairs.push((a, b));
        }
    }
    if pairs.len() < 10 {
        return Err(Error::InsufficientPairs {
            needed: 10,
            available: pairs.len(),
        });
    }
    let coverage = pairs.len() as f64 / total.max(1) as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if pairs.len() > sample_size.max(10) {
        pairs.shuffle(&mut rng);
        pairs.truncate(sample_size.max(10));
    }
    let xs: Vec<(f64, f64)> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<(f64, f64)> = pairs.iter().map(|p| p.1).collect();
    let r = distance_correlation(&xs, &ys)?;

    // Permutation p-value on a capped subsample with cached centered
    // matrices; each permutation then costs one lookup pass.
    let m = pairs.len().min(opts.dcor_pvalue_sample.max(10));
    let a = dcor::centered_distance_matrix(&xs[..m]);
    let b = dcor::centered_distance_matrix(&ys[..m]);
    let observed = dcor::dcor_from_centered(&a, &b, m, None);
    let exceed = exec::map_reduce(
        opts.dcor_permutations,
        0usize,
        |i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            let mut perm: Vec<usize> = (0..m).collect();
            perm.shuffle(&mut rng);
            usize::from(dcor::dcor_from_centered(&a, &b, m, Some(&perm)) >= observed - 1e-12)
        },
        |x, y| x + y,
    );
    let p = (exceed + 1) as f64 / (opts.dcor_permutations + 1) as f64;

    Ok(AssortativityResult {
        attribute: "location".to_string(),
        level: pop.level(),
        method: Method::DistanceCorrelation,
        r,
        uncertainty: Uncertainty::PValue(p),
        n_pairs: xs.len(),
        coverage,
    })
}

/// `|r_a / r_p|`; `None` when `r_p` is zero or either input is not finite.
pub fn assortativity_ratio(r_a: f64, r_p: f64) -> Option<f64> {
    (r_a.is_finite() && r_p.is_finite() && r_p != 0.0).then(|| (r_a / r_p).abs())
}

/// One table cell: a computed coefficient or the reason it is absent.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    Value(AssortativityResult),
    Absent { reason: String },
}

impl Cell {
    pub fn value(&self) -> Option<&AssortativityResult> {
        match self {
            Cell::Value(v) => Some(v),
            Cell::Absent { .. } => None,
        }
    }

    fn from_result(r: Result<AssortativityResult>) -> Cell {
        match r {
            Ok(v) => Cell::Value(v),
            Err(e) => Cell::Absent {
                reason: e.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HomophilyRow {
    pub attribute: String,
    pub method: Method,
    pub friendship: Cell,
    pub household: Cell,
    pub r_rel: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HomophilyReport {
    pub rows: Vec<HomophilyRow>,
    pub options: HomophilyOptions,
    pub notes: Vec<String>,
}

/// One row per attribute: r_p, r_a and their ratio. Attributes that cannot
/// be computed (missing everywhere, constant, ...) appear as absent cells
/// with reasons rather than failing the report.
pub fn homophily_report(net: &MultiProfileNetwork, opts: &HomophilyOptions) -> HomophilyReport {
    let friendship = PairPopulation::new(net, PairLevel::Friendship);
    let household = PairPopulation::new(net, PairLevel::Household);

    let mut rows = Vec::new();
    for attr in [
        CategoricalAttr::Race,
        CategoricalAttr::Sex,
        CategoricalAttr::Coloration,
        CategoricalAttr::WeightRange,
    ] {
        let fr = Cell::from_result(categorical_assortativity(&friendship, attr));
        let hh = Cell::from_result(categorical_assortativity(&household, attr));
        rows.push(make_row(attr.name(), Method::Categorical, fr, hh));
    }
    for attr in [
        NumericAttr::FriendCount,
        NumericAttr::BirthDate,
        NumericAttr::JoinDate,
        NumericAttr::JoinAge,
        NumericAttr::Weight,
    ] {
        let fr = Cell::from_result(numeric_assortativity(&friendship, attr, opts));
        let hh = Cell::from_result(numeric_assortativity(&household, attr, opts));
        rows.push(make_row(attr.name(), Method::Pearson, fr, hh));
    }
    // Location: household-level distance correlation is trivially one because
    // households share a location, so only the friendship level is computed.
    let fr = Cell::from_result(distance_assortativity(
        &friendship,
        opts.dcor_sample,
        opts.seed,
        opts,
    ));
    rows.push(HomophilyRow {
        attribute: "location".to_string(),
        method: Method::DistanceCorrelation,
        friendship: fr,
        household: Cell::Absent {
            reason: "profiles of one household share their location".to_string(),
        },
        r_rel: None,
    });

    HomophilyReport {
        rows,
        options: opts.clone(),
        notes: vec![
            "pairs with a missing value on either endpoint are excluded per attribute".into(),
            "friend_count uses the profile-graph degree at both levels".into(),
            "join_age excludes profiles with birth date after join date".into(),
        ],
    }
}

fn make_row(attribute: &str, method: Method, friendship: Cell, household: Cell) -> HomophilyRow {
    let r_rel = match (friendship.value(), household.value()) {
        (Some(f), Some(h)) => assortativity_ratio(h.r, f.r),
        _ => None,
    };
    HomophilyRow {
        attribute: attribute.to_string(),
        method,
        friendship,
        household,
        r_rel,
    }
}

impl HomophilyReport {
    /// TSV table mirroring the report: one attribute per row with r_p, r_a,
    /// their significance markers, and r_rel. Absent cells print `---`.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(
            w,
            "attribute\tmethod\tr_p\tsig_p\tr_a\tsig_a\tr_rel\tcoverage_p\tcoverage_a"
        )?;
        for row in &self.rows {
            let (rp, sp, cp) = cell_columns(&row.friendship);
            let (ra, sa, ca) = cell_columns(&row.household);
            let rrel = row
                .r_rel
                .map(|v| format!("{v:.4}"))
                .unwrap_or_else(|| "---".to_string());
            writeln!(
                w,
                "{}\t{:?}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                row.attribute, row.method, rp, sp, ra, sa, rrel, cp, ca
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

fn cell_columns(cell: &Cell) -> (String, String, String) {
    match cell {
        Cell::Value(v) => (
            format!("{:.4}", v.r),
            v.significance().to_string(),
            format!("{:.4}", v.coverage),
        ),
        Cell::Absent { .. } => ("---".to_string(), String::new(), "---".to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{NetworkBuilder, ProfileMeta};

    fn net_with(
        accounts: &[u32],
        edges: &[(u32, u32)],
        metas: Vec<ProfileMeta>,
    ) -> MultiProfileNetwork {
        let mut b = NetworkBuilder::new(true);
        for (i, (&a, meta)) in accounts.iter().zip(metas).enumerate() {
            b.add_profile(&format!("p{i}"), &format!("a{a}"), meta);
        }
        for &(u, v) in edges {
            b.add_edge(ProfileId::from_index(u as usize), ProfileId::from_index(v as usize));
        }
        b.finish().unwrap().0
    }

    fn meta_race(r: &str) -> ProfileMeta {
        ProfileMeta {
            race: Some(r.into()),
            ..ProfileMeta::default()
        }
    }

    #[test]
    fn perfect_categorical_homophily_is_one() {
        // Every edge same-category, two categories present.
        let metas = vec![meta_race("a"), meta_race("a"), meta_race("b"), meta_race("b")];
        let net = net_with(&[0, 1, 2, 3], &[(0, 1), (2, 3)], metas);
        let pop = PairPopulation::new(&net, PairLevel::Friendship);
        let r = categorical_assortativity(&pop, CategoricalAttr::Race).unwrap();
        assert!((r.r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn balanced_mixing_is_zero() {
        // e = [[.25, .25], [.25, .25]] over four edges.
        let metas = vec![
            meta_race("a"),
            meta_race("a"),
            meta_race("b"),
            meta_race("b"),
            meta_race("a"),
            meta_race("b"),
        ];
        let net = net_with(&[0, 1, 2, 3, 4, 5], &[(0, 1), (2, 3), (0, 3), (2, 4)], metas);
        // Edges: aa, bb, ab, ba — mixing matrix is uniform.
        let pop = PairPopulation::new(&net, PairLevel::Friendship);
        let r = categorical_assortativity(&pop, CategoricalAttr::Race).unwrap();
        assert!(r.r.abs() < 1e-12, "{}", r.r);
    }

    #[test]
    fn constant_category_is_an_error() {
        let metas = vec![meta_race("a"), meta_race("a"), meta_race("a")];
        let net = net_with(&[0, 1, 2], &[(0, 1), (1, 2)], metas);
        let pop = PairPopulation::new(&net, PairLevel::Friendship);
        assert!(matches!(
            categorical_assortativity(&pop, CategoricalAttr::Race),
            Err(Error::ConstantAttribute)
        ));
    }

    #[test]
    fn categorical_invariant_under_relabeling() {
        let tokens = ["x", "y", "z"];
        let relabeled = ["z", "x", "y"];
        let assign = [0usize, 1, 2, 0, 1, 2, 0, 0];
        let edges = [(0u32, 1u32), (1, 2), (3, 4), (5, 6), (0, 3), (2, 5), (6, 7)];
        let metas_a: Vec<_> = assign.iter().map(|&c| meta_race(tokens[c])).collect();
        let metas_b: Vec<_> = assign.iter().map(|&c| meta_race(relabeled[c])).collect();
        let accounts: Vec<u32> = (0..8).collect();
        let net_a = net_with(&accounts, &edges, metas_a);
        let net_b = net_with(&accounts, &edges, metas_b);
        let ra = categorical_assortativity(
            &PairPopulation::new(&net_a, PairLevel::Friendship),
            CategoricalAttr::Race,
        )
        .unwrap();
        let rb = categorical_assortativity(
            &PairPopulation::new(&net_b, PairLevel::Friendship),
            CategoricalAttr::Race,
        )
        .unwrap();
        assert!((ra.r - rb.r).abs() < 1e-14);
    }

    fn meta_weight(w: f64) -> ProfileMeta {
        ProfileMeta {
            weight: Some(w),
            ..ProfileMeta::default()
        }
    }

    #[test]
    fn equal_endpoint_values_give_r_one() {
        let metas = vec![meta_weight(1.0), meta_weight(1.0), meta_weight(5.0), meta_weight(5.0)];
        let net = net_with(&[0, 1, 2, 3], &[(0, 1), (2, 3)], metas);
        let pop = PairPopulation::new(&net, PairLevel::Friendship);
        let opts = HomophilyOptions {
            numeric_permutations: 50,
            ..HomophilyOptions::default()
        };
        let r = numeric_assortativity(&pop, NumericAttr::Weight, &opts).unwrap();
        assert!((r.r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_numeric_attribute_is_zero_variance() {
        let metas = vec![meta_weight(2.0); 4];
        let net = net_with(&[0, 1, 2, 3], &[(0, 1), (2, 3)], metas);
        let pop = PairPopulation::new(&net, PairLevel::Friendship);
        assert!(matches!(
            numeric_assortativity(&pop, NumericAttr::Weight, &HomophilyOptions::default()),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn numeric_r_is_affine_invariant() {
        let weights = [3.0, 7.0, 2.0, 9.0, 4.0, 6.0];
        let edges = [(0u32, 1u32), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)];
        let accounts: Vec<u32> = (0..6).collect();
        let metas_a: Vec<_> = weights.iter().map(|&w| meta_weight(w)).collect();
        let metas_b: Vec<_> = weights.iter().map(|&w| meta_weight(3.5 * w - 11.0)).collect();
        let net_a = net_with(&accounts, &edges, metas_a);
        let net_b = net_with(&accounts, &edges, metas_b);
        let opts = HomophilyOptions {
            numeric_permutations: 10,
            ..HomophilyOptions::default()
        };
        let ra = numeric_assortativity(
            &PairPopulation::new(&net_a, PairLevel::Friendship),
            NumericAttr::Weight,
            &opts,
        )
        .unwrap();
        let rb = numeric_assortativity(
            &PairPopulation::new(&net_b, PairLevel::Friendship),
            NumericAttr::Weight,
            &opts,
        )
        .unwrap();
        assert!((ra.r - rb.r).abs() < 1e-10);
    }

    #[test]
    fn ratio_handles_edge_cases() {
        assert_eq!(assortativity_ratio(0.5, 0.5), Some(1.0));
        assert_eq!(assortativity_ratio(0.3, 0.0), None);
        let r = assortativity_ratio(0.3137, 0.0138).unwrap();
        assert!((r - 22.73).abs() < 0.2, "{r}");
    }

    #[test]
    fn report_survives_missing_metadata() {
        let metas = vec![ProfileMeta::default(); 4];
        let net = net_with(&[0, 0, 1, 1], &[(0, 2), (1, 3)], metas);
        let report = homophily_report(&net, &HomophilyOptions::default());
        assert_eq!(report.rows.len(), 10);
        for row in &report.rows {
            if row.attribute == "friend_count" || row.attribute == "join_date" {
                continue; // always-present attributes may compute
            }
            assert!(row.friendship.value().is_none(), "{}", row.attribute);
        }
    }

    #[test]
    fn distance_identical_locations_error() {
        let metas: Vec<ProfileMeta> = (0..12)
            .map(|_| ProfileMeta {
                location: Some((10.0, 20.0)),
                ..ProfileMeta::default()
            })
            .collect();
        let accounts: Vec<u32> = (0..12).collect();
        let edges: Vec<(u32, u32)> = (0..11u32).map(|i| (i, i + 1)).collect();
        let net = net_with(&accounts, &edges, metas);
        let pop = PairPopulation::new(&net, PairLevel::Friendship);
        assert!(matches!(
            distance_assortativity(&pop, 100, 1, &HomophilyOptions::default()),
            Err(Error::DegenerateMetric)
        ));
    }

    #[test]
    fn distance_perfect_correlation() {
        // Endpoint B's location equals endpoint A's per pair, varying across pairs.
        let metas: Vec<ProfileMeta> = (0..24)
            .map(|i| ProfileMeta {
                location: Some(((i / 2) as f64, ((i / 2) * 3) as f64)),
                ..ProfileMeta::default()
            })
            .collect();
        let accounts: Vec<u32> = (0..24).collect();
        let edges: Vec<(u32, u32)> = (0..12u32).map(|i| (2 * i, 2 * i + 1)).collect();
        let net = net_with(&accounts, &edges, metas);
        let pop = PairPopulation::new(&net, PairLevel::Friendship);
        let r = distance_assortativity(&pop, 100, 1, &HomophilyOptions::default()).unwrap();
        assert!((r.r - 1.0).abs() < 1e-10, "{}", r.r);
    }
}
