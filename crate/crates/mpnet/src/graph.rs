//! In-memory representation of a multi-profile network and its structural
//! projections.
//!
//! A network holds a profile set, an account set, undirected friendship edges
//! between profiles, and a total map from profiles to accounts. Profiles that
//! share an account form a *household*. Everything here is immutable after
//! construction; all operations are read-only and safe to call from multiple
//! threads.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::exec;

/// Dense handle for a profile, contiguous in `0..profile_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProfileId(u32);

impl ProfileId {
    pub fn from_index(index: usize) -> Self {
        ProfileId(index as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Dense handle for an account, contiguous in `0..account_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AccountId(u32);

impl AccountId {
    pub fn from_index(index: usize) -> Self {
        AccountId(index as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Per-profile metadata. `join_date` is required; everything else may be
/// missing. Dates are integer day numbers (see [`crate::ingest::date`]).
///
/// `birth_date <= join_date` is deliberately not enforced: real data violates
/// it, so violations are counted at build time and reported, not rejected.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProfileMeta {
    pub race: Option<String>,
    pub sex: Option<String>,
    pub coloration: Option<String>,
    /// Exact weight in the site-native unit.
    pub weight: Option<f64>,
    /// Site-native weight-range token, stored verbatim.
    pub weight_range: Option<String>,
    pub birth_date: Option<i32>,
    pub join_date: i32,
    /// (latitude, longitude) in degrees.
    pub location: Option<(f64, f64)>,
}

impl ProfileMeta {
    /// Age at profile creation, in days. `None` if the birth date is missing.
    pub fn join_age_days(&self) -> Option<i32> {
        self.birth_date.map(|b| self.join_date - b)
    }
}

/// Undirected simple graph in compressed sparse row form.
///
/// Neighbor lists are sorted, symmetric, loop-free and duplicate-free.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleGraph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl SimpleGraph {
    /// Build from deduplicated, loop-free undirected edges over `0..n`.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> SimpleGraph {
        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            debug_assert_ne!(u, v);
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0usize;
        offsets.push(0);
        for d in &degree {
            acc += d;
            offsets.push(acc);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; acc];
        for &(u, v) in edges {
            neighbors[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        for v in 0..n {
            neighbors[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        SimpleGraph { offsets, neighbors }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    pub fn degrees(&self) -> Vec<u64> {
        (0..self.node_count()).map(|v| self.degree(v) as u64).collect()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| (u as u32) < v)
                .map(move |&v| (u as u32, v))
        })
    }
}

/// Household membership: account → sorted member profiles, in CSR form.
#[derive(Debug, Clone, PartialEq)]
struct Households {
    offsets: Vec<usize>,
    members: Vec<u32>,
}

impl Households {
    fn build(n_accounts: usize, account_of: &[u32]) -> Households {
        let mut size = vec![0usize; n_accounts];
        for &a in account_of {
            size[a as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n_accounts + 1);
        let mut acc = 0usize;
        offsets.push(0);
        for s in &size {
            acc += s;
            offsets.push(acc);
        }
        let mut cursor = offsets[..n_accounts].to_vec();
        let mut members = vec![0u32; account_of.len()];
        // Profiles visited in id order, so member lists come out sorted.
        for (p, &a) in account_of.iter().enumerate() {
            members[cursor[a as usize]] = p as u32;
            cursor[a as usize] += 1;
        }
        Households { offsets, members }
    }

    fn members(&self, account: usize) -> &[u32] {
        &self.members[self.offsets[account]..self.offsets[account + 1]]
    }
}

/// Counters produced while validating and deduplicating raw input.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct BuildReport {
    pub profiles: usize,
    pub accounts: usize,
    pub edges_input: usize,
    pub edges_kept: usize,
    pub duplicate_edges_dropped: usize,
    pub self_loops_dropped: usize,
    /// Edges joining two profiles of the same account (only when allowed).
    pub intra_household_edges: usize,
    /// Profiles whose birth date lies after their join date.
    pub birth_after_join: usize,
}

/// Incremental constructor for [`MultiProfileNetwork`].
///
/// Profiles receive dense ids in insertion order; accounts in order of first
/// appearance. `finish` deduplicates edges, drops self-loops, and validates
/// the intra-household rule.
pub struct NetworkBuilder {
    allows_intra_household_edges: bool,
    profile_names: Vec<String>,
    account_names: Vec<String>,
    account_index: HashMap<String, u32>,
    account_of: Vec<u32>,
    metas: Vec<ProfileMeta>,
    edges: Vec<(u32, u32)>,
}

impl NetworkBuilder {
    pub fn new(allows_intra_household_edges: bool) -> Self {
        NetworkBuilder {
            allows_intra_household_edges,
            profile_names: Vec::new(),
            account_names: Vec::new(),
            account_index: HashMap::new(),
            account_of: Vec::new(),
            metas: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn add_profile(&mut self, name: &str, account: &str, meta: ProfileMeta) -> ProfileId {
        let account_id = match self.account_index.get(account) {
            Some(&a) => a,
            None => {
                let a = self.account_names.len() as u32;
                self.account_names.push(account.to_owned());
                self.account_index.insert(account.to_owned(), a);
                a
            }
        };
        let id = ProfileId::from_index(self.profile_names.len());
        self.profile_names.push(name.to_owned());
        self.account_of.push(account_id);
        self.metas.push(meta);
        id
    }

    pub fn profile_count(&self) -> usize {
        self.profile_names.len()
    }

    pub fn account_of(&self, p: ProfileId) -> AccountId {
        AccountId(self.account_of[p.index()])
    }

    pub fn add_edge(&mut self, u: ProfileId, v: ProfileId) {
        self.edges.push((u.0, v.0));
    }

    pub fn finish(self) -> Result<(MultiProfileNetwork, BuildReport)> {
        let n = self.profile_names.len();
        let mut report = BuildReport {
            profiles: n,
            accounts: self.account_names.len(),
            edges_input: self.edges.len(),
            ..BuildReport::default()
        };

        let mut edges: Vec<(u32, u32)> = Vec::with_capacity(self.edges.len());
        for &(u, v) in &self.edges {
            if u == v {
                report.self_loops_dropped += 1;
                continue;
            }
            edges.push((u.min(v), u.max(v)));
        }
        edges.sort_unstable();
        let before = edges.len();
        edges.dedup();
        report.duplicate_edges_dropped = before - edges.len();

        for &(u, v) in &edges {
            if self.account_of[u as usize] == self.account_of[v as usize] {
                if self.allows_intra_household_edges {
                    report.intra_household_edges += 1;
                } else {
                    return Err(Error::IntraHouseholdEdge {
                        u: self.profile_names[u as usize].clone(),
                        v: self.profile_names[v as usize].clone(),
                        context: None,
                    });
                }
            }
        }
        report.edges_kept = edges.len();
        report.birth_after_join = self
            .metas
            .iter()
            .filter(|m| m.birth_date.is_some_and(|b| b > m.join_date))
            .count();

        let households = Households::build(self.account_names.len(), &self.account_of);
        let net = MultiProfileNetwork {
            graph: SimpleGraph::from_edges(n, &edges),
            metas: self.metas,
            account_of: self.account_of,
            households,
            profile_names: self.profile_names,
            account_names: self.account_names,
            allows_intra_household_edges: self.allows_intra_household_edges,
        };
        Ok((net, report))
    }
}

/// A multi-profile social network: profiles, accounts, friendship edges, and
/// the total profile→account map, plus per-profile metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiProfileNetwork {
    graph: SimpleGraph,
    metas: Vec<ProfileMeta>,
    account_of: Vec<u32>,
    households: Households,
    profile_names: Vec<String>,
    account_names: Vec<String>,
    allows_intra_household_edges: bool,
}

impl MultiProfileNetwork {
    pub fn profile_count(&self) -> usize {
        self.metas.len()
    }

    pub fn account_count(&self) -> usize {
        self.account_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// The profile-level friendship graph.
    pub fn graph(&self) -> &SimpleGraph {
        &self.graph
    }

    pub fn meta(&self, p: ProfileId) -> &ProfileMeta {
        &self.metas[p.index()]
    }

    pub fn metas(&self) -> &[ProfileMeta] {
        &self.metas
    }

    pub fn account_of(&self, p: ProfileId) -> AccountId {
        AccountId(self.account_of[p.index()])
    }

    pub fn profile_name(&self, p: ProfileId) -> &str {
        &self.profile_names[p.index()]
    }

    pub fn account_name(&self, a: AccountId) -> &str {
        &self.account_names[a.index()]
    }

    pub fn allows_intra_household_edges(&self) -> bool {
        self.allows_intra_household_edges
    }

    pub fn household_members(&self, a: AccountId) -> &[u32] {
        self.households.members(a.index())
    }

    pub fn household_sizes(&self) -> Vec<u64> {
        (0..self.account_count())
            .map(|a| self.households.members(a).len() as u64)
            .collect()
    }

    /// Replace the location table wholesale, e.g. after geocoding.
    pub fn with_locations(mut self, locations: Vec<Option<(f64, f64)>>) -> Result<Self> {
        if locations.len() != self.profile_count() {
            return Err(Error::DimensionMismatch {
                expected: self.profile_count(),
                got: locations.len(),
            });
        }
        for loc in locations.iter().flatten() {
            if !(-90.0..=90.0).contains(&loc.0) || !(-180.0..=180.0).contains(&loc.1) {
                return Err(Error::InvalidConfig(format!(
                    "coordinates out of range: ({}, {})",
                    loc.0, loc.1
                )));
            }
        }
        for (meta, loc) in self.metas.iter_mut().zip(locations) {
            meta.location = loc;
        }
        Ok(self)
    }

    /// Project to the account level: identify same-account profiles, drop the
    /// loops that arise, and collapse multi-edges. Accounts that end up with
    /// no surviving edges are kept as isolated nodes.
    pub fn project_to_accounts(&self) -> AccountGraph {
        let mut edges: Vec<(u32, u32)> = self
            .graph
            .edges()
            .filter_map(|(u, v)| {
                let a = self.account_of[u as usize];
                let b = self.account_of[v as usize];
                (a != b).then(|| (a.min(b), a.max(b)))
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        AccountGraph {
            graph: SimpleGraph::from_edges(self.account_count(), &edges),
        }
    }

    /// All unordered same-household profile pairs, each exactly once.
    pub fn family_pairs(&self) -> impl Iterator<Item = (ProfileId, ProfileId)> + '_ {
        (0..self.account_count()).flat_map(move |a| {
            let members = self.households.members(a);
            members.iter().enumerate().flat_map(move |(i, &u)| {
                members[i + 1..]
                    .iter()
                    .map(move |&v| (ProfileId(u), ProfileId(v)))
            })
        })
    }

    /// Number of same-household pairs, `Σ s·(s−1)/2` over household sizes.
    pub fn family_pair_count(&self) -> u64 {
        self.household_sizes()
            .iter()
            .map(|&s| s * s.saturating_sub(1) / 2)
            .sum()
    }

    /// Apply the family operator: `y[u] = Σ x[v]` over all `v` in `u`'s
    /// household, including `v = u` (the operator has a unit diagonal).
    ///
    /// The operator is never materialised: per-account sums are computed
    /// first and then broadcast back to the profiles.
    pub fn family_operator_apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.profile_count() {
            return Err(Error::DimensionMismatch {
                expected: self.profile_count(),
                got: x.len(),
            });
        }
        let sums = exec::map_collect(self.account_count(), |a| {
            self.households
                .members(a)
                .iter()
                .map(|&p| x[p as usize])
                .sum::<f64>()
        });
        Ok(exec::map_collect(self.profile_count(), |p| {
            sums[self.account_of[p] as usize]
        }))
    }
}

/// The account-level projection of a multi-profile network.
#[derive(Debug, Clone, PartialEq)]
pub struct AccountGraph {
    graph: SimpleGraph,
}

impl AccountGraph {
    pub fn account_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn graph(&self) -> &SimpleGraph {
        &self.graph
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Network with explicit household layout; profile p_i joins household
    /// `accounts[i]`, edges by profile index.
    pub(crate) fn fixture(
        accounts: &[u32],
        edges: &[(u32, u32)],
        allow_intra: bool,
    ) -> MultiProfileNetwork {
        let mut b = NetworkBuilder::new(allow_intra);
        for (i, &a) in accounts.iter().enumerate() {
            b.add_profile(&format!("p{i}"), &format!("a{a}"), ProfileMeta::default());
        }
        for &(u, v) in edges {
            b.add_edge(ProfileId(u), ProfileId(v));
        }
        b.finish().expect("fixture must build").0
    }

    #[test]
    fn builder_dedups_and_counts() {
        let mut b = NetworkBuilder::new(true);
        for i in 0..3 {
            b.add_profile(&format!("p{i}"), &format!("a{i}"), ProfileMeta::default());
        }
        b.add_edge(ProfileId(0), ProfileId(1));
        b.add_edge(ProfileId(1), ProfileId(0));
        b.add_edge(ProfileId(2), ProfileId(2));
        let (net, report) = b.finish().unwrap();
        assert_eq!(net.edge_count(), 1);
        assert_eq!(report.duplicate_edges_dropped, 1);
        assert_eq!(report.self_loops_dropped, 1);
    }

    #[test]
    fn intra_household_edge_is_hard_error_when_forbidden() {
        let mut b = NetworkBuilder::new(false);
        b.add_profile("x", "h", ProfileMeta::default());
        b.add_profile("y", "h", ProfileMeta::default());
        b.add_edge(ProfileId(0), ProfileId(1));
        let err = b.finish().unwrap_err();
        assert!(matches!(err, Error::IntraHouseholdEdge { .. }));
    }

    #[test]
    fn projection_is_isomorphic_when_map_is_bijective() {
        let net = fixture(&[0, 1, 2, 3], &[(0, 1), (1, 2), (2, 3)], true);
        let acc = net.project_to_accounts();
        assert_eq!(acc.account_count(), 4);
        assert_eq!(acc.edge_count(), 3);
        assert_eq!(acc.graph(), net.graph());
    }

    #[test]
    fn projection_drops_intra_household_edge() {
        // Two profiles in one account joined by the only edge.
        let net = fixture(&[0, 0], &[(0, 1)], true);
        let acc = net.project_to_accounts();
        assert_eq!(acc.account_count(), 1);
        assert_eq!(acc.edge_count(), 0);
    }

    #[test]
    fn projection_collapses_multi_edges() {
        // Both cross edges map to the same account pair.
        let net = fixture(&[0, 0, 1, 1], &[(0, 2), (1, 3)], true);
        let acc = net.project_to_accounts();
        assert_eq!(acc.account_count(), 2);
        assert_eq!(acc.edge_count(), 1);
    }

    #[test]
    fn family_pairs_complete_within_household() {
        let net = fixture(&[0, 0, 0], &[], true);
        let pairs: Vec<_> = net
            .family_pairs()
            .map(|(u, v)| (u.index(), v.index()))
            .collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn family_pairs_empty_for_singletons() {
        let net = fixture(&[0, 1, 2], &[], true);
        assert_eq!(net.family_pairs().count(), 0);
        assert_eq!(net.family_pair_count(), 0);
    }

    #[test]
    fn family_pair_count_by_household_sizes() {
        // Households of sizes [3, 2]: 3 + 1 = 4 pairs.
        let net = fixture(&[0, 0, 0, 1, 1], &[], true);
        assert_eq!(net.family_pair_count(), 4);
        assert_eq!(net.family_pairs().count(), 4);
    }

    #[test]
    fn family_operator_identity_on_singletons() {
        let net = fixture(&[0, 1, 2], &[], true);
        let x = vec![1.5, -2.0, 0.25];
        assert_eq!(net.family_operator_apply(&x).unwrap(), x);
    }

    #[test]
    fn family_operator_broadcasts_household_sum() {
        let net = fixture(&[0, 0], &[], true);
        let y = net.family_operator_apply(&[1.0, 0.0]).unwrap();
        assert_eq!(y, vec![1.0, 1.0]);

        let net = fixture(&[0, 0, 0], &[], true);
        let y = net.family_operator_apply(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(y, vec![6.0, 6.0, 6.0]);
    }

    #[test]
    fn family_operator_dimension_mismatch() {
        let net = fixture(&[0, 1], &[], true);
        assert!(matches!(
            net.family_operator_apply(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn projection_edge_bound() {
        let net = fixture(&[0, 0, 1, 2], &[(0, 1), (0, 2), (1, 2), (2, 3)], true);
        let acc = net.project_to_accounts();
        assert!(acc.edge_count() <= net.edge_count());
    }

    #[test]
    fn simple_graph_lookups() {
        let g = SimpleGraph::from_edges(4, &[(0, 1), (1, 2)]);
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert!(g.has_edge(2, 1));
        assert!(!g.has_edge(0, 3));
        assert_eq!(g.degree(3), 0);
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![(0, 1), (1, 2)]);
    }
}
