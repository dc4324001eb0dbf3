//! Pluggable geocoding: resolve location strings to coordinates.
//!
//! The toolkit ingests pre-geocoded coordinates; this interface exists for
//! workflows that still hold raw location strings. No live client ships —
//! [`TableGeocoder`] is a lookup-table provider suitable for tests and for
//! cached offline resolution.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{MultiProfileNetwork, ProfileId};

/// A provider that turns a location string into coordinates.
///
/// `Ok(None)` means the provider could not resolve the string; `Err` carries
/// a provider-side failure message. Both are recorded per string, never fatal.
pub trait Geocoder {
    fn geocode(&mut self, query: &str) -> std::result::Result<Option<(f64, f64)>, String>;
}

/// Lookup-table provider. Counts lookups so cache behaviour is observable.
#[derive(Debug, Default)]
pub struct TableGeocoder {
    table: HashMap<String, (f64, f64)>,
    pub lookups: usize,
}

impl TableGeocoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, query: impl Into<String>, lat: f64, lon: f64) -> &mut Self {
        self.table.insert(query.into(), (lat, lon));
        self
    }
}

impl Geocoder for TableGeocoder {
    fn geocode(&mut self, query: &str) -> std::result::Result<Option<(f64, f64)>, String> {
        self.lookups += 1;
        Ok(self.table.get(query).copied())
    }
}

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct GeocodeReport {
    /// Profiles that gained coordinates.
    pub resolved: usize,
    /// Profiles that already had coordinates and were left untouched.
    pub already_located: usize,
    /// Queries answered from the per-run cache instead of the provider.
    pub cache_hits: usize,
    /// Profiles whose string was empty/missing or unresolvable.
    pub left_missing: usize,
    /// Provider failures, as (query, message).
    pub failures: Vec<(String, String)>,
}

/// Resolve coordinates for profiles that have a location string but no
/// coordinates yet. `strings` is indexed by profile id. Returns the updated
/// location table (apply with [`MultiProfileNetwork::with_locations`]).
pub fn geocode_locations(
    net: &MultiProfileNetwork,
    strings: &[Option<String>],
    provider: &mut dyn Geocoder,
) -> Result<(Vec<Option<(f64, f64)>>, GeocodeReport)> {
    if strings.len() != net.profile_count() {
        return Err(Error::DimensionMismatch {
            expected: net.profile_count(),
            got: strings.len(),
        });
    }
    let mut cache: HashMap<&str, Option<(f64, f64)>> = HashMap::new();
    let mut report = GeocodeReport::default();
    let mut out = Vec::with_capacity(strings.len());
    for (i, s) in strings.iter().enumerate() {
        let existing = net.meta(ProfileId::from_index(i)).location;
        if existing.is_some() {
            report.already_located += 1;
            out.push(existing);
            continue;
        }
        let query = match s.as_deref() {
            Some(q) if !q.is_empty() => q,
            _ => {
                report.left_missing += 1;
                out.push(None);
                continue;
            }
        };
        let coords = match cache.get(query) {
            Some(&c) => {
                report.cache_hits += 1;
                c
            }
            None => {
                let c = match provider.geocode(query) {
                    Ok(c) => c,
                    Err(msg) => {
                        report.failures.push((query.to_owned(), msg));
                        None
                    }
                };
                cache.insert(query, c);
                c
            }
        };
        match coords {
            Some(c) => {
                report.resolved += 1;
                out.push(Some(c));
            }
            None => {
                report.left_missing += 1;
                out.push(None);
            }
        }
    }
    Ok((out, report))
}
