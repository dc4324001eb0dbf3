//! Loading, validation and writing of networks, plus the synthetic generator.
//!
//! On-disk layout is a TSV pair:
//!
//! - `profiles.tsv` — header row, then one profile per line with columns
//!   `id account race sex coloration weight weight_range birth_date
//!   join_date lat lon`, tab-separated, empty field = missing, UTF-8.
//! - `edges.tsv` — two profile ids per line, whitespace-separated; lines
//!   starting with `%` or `#` are ignored.
//!
//! [`write_network`] emits the same formats bit-reproducibly (profiles and
//! edges sorted by string id). Dates are ISO-8601 calendar dates on disk and
//! integer day numbers in memory.

mod geocode;
mod synth;

pub use geocode::{geocode_locations, GeocodeReport, Geocoder, TableGeocoder};
pub use synth::{generate_synthetic, MetadataModel, SynthConfig, ZetaSampler};

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{MultiProfileNetwork, NetworkBuilder, ProfileId, ProfileMeta};

/// Calendar-date helpers. Internally dates are day numbers from the Common
/// Era, so day differences are plain integer subtraction.
pub mod date {
    use chrono::{Datelike, NaiveDate};

    pub fn parse(s: &str) -> Option<i32> {
        NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .ok()
            .map(|d| d.num_days_from_ce())
    }

    pub fn format(days: i32) -> String {
        match NaiveDate::from_num_days_from_ce_opt(days) {
            Some(d) => d.format("%Y-%m-%d").to_string(),
            None => format!("#{days}"),
        }
    }

    /// `YYYY-MM` token, used for join-date histograms.
    pub fn year_month(days: i32) -> String {
        match NaiveDate::from_num_days_from_ce_opt(days) {
            Some(d) => d.format("%Y-%m").to_string(),
            None => format!("#{days}"),
        }
    }

    pub fn from_ymd(year: i32, month: u32, day: u32) -> i32 {
        NaiveDate::from_ymd_opt(year, month, day)
            .expect("valid calendar date")
            .num_days_from_ce()
    }
}

const PROFILES_HEADER: &str =
    "id\taccount\trace\tsex\tcoloration\tweight\tweight_range\tbirth_date\tjoin_date\tlat\tlon";

/// Where a dataset lives on disk and how to validate it.
#[derive(Debug, Clone)]
pub struct DatasetBundle {
    pub profiles_path: PathBuf,
    pub edges_path: PathBuf,
    pub dataset_name: String,
    pub allows_intra_household_edges: bool,
}

/// Per-attribute missing-field counters from a load.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MissingCounts {
    pub race: usize,
    pub sex: usize,
    pub coloration: usize,
    pub weight: usize,
    pub weight_range: usize,
    pub birth_date: usize,
    pub location: usize,
}

/// What happened while loading a dataset.
#[derive(Debug, Clone, Serialize)]
pub struct LoadReport {
    pub dataset_name: String,
    pub profiles_read: usize,
    pub accounts: usize,
    pub edge_lines_read: usize,
    pub edges_kept: usize,
    pub duplicate_edges_dropped: usize,
    pub self_loops_dropped: usize,
    pub intra_household_edges: usize,
    pub birth_after_join: usize,
    pub missing: MissingCounts,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn opt_field(s: &str) -> Option<&str> {
    if s.is_empty() {
        None
    } else {
        Some(s)
    }
}

/// Load a network from a [`DatasetBundle`], validating as it goes.
pub fn load_network(bundle: &DatasetBundle) -> Result<(MultiProfileNetwork, LoadReport)> {
    let mut missing = MissingCounts::default();
    let mut builder = NetworkBuilder::new(bundle.allows_intra_household_edges);
    let mut index: std::collections::HashMap<String, ProfileId> = std::collections::HashMap::new();

    let ppath = &bundle.profiles_path;
    let reader = BufReader::new(File::open(ppath)?);
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, line)) => {
            let line = line?;
            if line.trim_end() != PROFILES_HEADER {
                return Err(parse_err(ppath, 1, format!("bad header, expected {PROFILES_HEADER:?}")));
            }
        }
        None => return Err(parse_err(ppath, 1, "empty profiles file")),
    }
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 11 {
            return Err(parse_err(
                ppath,
                lineno,
                format!("expected 11 tab-separated fields, got {}", fields.len()),
            ));
        }
        let id = fields[0];
        let account = fields[1];
        if id.is_empty() || account.is_empty() {
            return Err(parse_err(ppath, lineno, "id and account must be non-empty"));
        }
        if index.contains_key(id) {
            return Err(parse_err(ppath, lineno, format!("duplicate profile id {id:?}")));
        }

        let weight = match opt_field(fields[5]) {
            None => {
                missing.weight += 1;
                None
            }
            Some(s) => {
                let w: f64 = s
                    .parse()
                    .map_err(|_| parse_err(ppath, lineno, format!("bad weight {s:?}")))?;
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(parse_err(ppath, lineno, format!("weight must be non-negative, got {s}")));
                }
                Some(w)
            }
        };
        let weight_range = opt_field(fields[6]).map(str::to_owned);
        if weight_range.is_none() {
            missing.weight_range += 1;
        }
        let birth_date = match opt_field(fields[7]) {
            None => {
                missing.birth_date += 1;
                None
            }
            Some(s) => Some(
                date::parse(s).ok_or_else(|| parse_err(ppath, lineno, format!("bad birth_date {s:?}")))?,
            ),
        };
        let join_date = match opt_field(fields[8]) {
            None => return Err(parse_err(ppath, lineno, "join_date is required")),
            Some(s) => {
                date::parse(s).ok_or_else(|| parse_err(ppath, lineno, format!("bad join_date {s:?}")))?
            }
        };
        let location = match (opt_field(fields[9]), opt_field(fields[10])) {
            (None, None) => {
                missing.location += 1;
                None
            }
            (Some(la), Some(lo)) => {
                let lat: f64 = la
                    .parse()
                    .map_err(|_| parse_err(ppath, lineno, format!("bad lat {la:?}")))?;
                let lon: f64 = lo
                    .parse()
                    .map_err(|_| parse_err(ppath, lineno, format!("bad lon {lo:?}")))?;
                if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
                    return Err(parse_err(ppath, lineno, format!("coordinates out of range ({la}, {lo})")));
                }
                Some((lat, lon))
            }
            _ => return Err(parse_err(ppath, lineno, "lat and lon must both be present or both empty")),
        };

        let race = opt_field(fields[2]).map(str::to_owned);
        if race.is_none() {
            missing.race += 1;
        }
        let sex = opt_field(fields[3]).map(str::to_owned);
        if sex.is_none() {
            missing.sex += 1;
        }
        let coloration = opt_field(fields[4]).map(str::to_owned);
        if coloration.is_none() {
            missing.coloration += 1;
        }

        let meta = ProfileMeta {
            race,
            sex,
            coloration,
            weight,
            weight_range,
            birth_date,
            join_date,
            location,
        };
        let pid = builder.add_profile(id, account, meta);
        index.insert(id.to_owned(), pid);
    }

    let epath = &bundle.edges_path;
    let reader = BufReader::new(File::open(epath)?);
    let mut edge_lines_read = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(parse_err(epath, lineno, "expected exactly two profile ids")),
        };
        let ua = *index.get(a).ok_or_else(|| Error::UnknownId {
            path: epath.display().to_string(),
            line: lineno,
            id: a.to_owned(),
        })?;
        let ub = *index.get(b).ok_or_else(|| Error::UnknownId {
            path: epath.display().to_string(),
            line: lineno,
            id: b.to_owned(),
        })?;
        if !bundle.allows_intra_household_edges
            && ua != ub
            && builder.account_of(ua) == builder.account_of(ub)
        {
            return Err(Error::IntraHouseholdEdge {
                u: a.to_owned(),
                v: b.to_owned(),
                context: Some(format!("{}:{}", epath.display(), lineno)),
            });
        }
        builder.add_edge(ua, ub);
        edge_lines_read += 1;
    }

    let (net, build) = builder.finish()?;
    let report = LoadReport {
        dataset_name: bundle.dataset_name.clone(),
        profiles_read: build.profiles,
        accounts: build.accounts,
        edge_lines_read,
        edges_kept: build.edges_kept,
        duplicate_edges_dropped: build.duplicate_edges_dropped,
        self_loops_dropped: build.self_loops_dropped,
        intra_household_edges: build.intra_household_edges,
        birth_after_join: build.birth_after_join,
        missing,
    };
    Ok((net, report))
}

fn fmt_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    match v {
        Some(x) => x.to_string(),
        None => String::new(),
    }
}

/// Write a network back to disk in the canonical sorted form: profiles by
/// string id, edges by the lexicographically ordered id pair.
pub fn write_network(
    net: &MultiProfileNetwork,
    profiles_path: &Path,
    edges_path: &Path,
) -> Result<()> {
    let mut order: Vec<usize> = (0..net.profile_count()).collect();
    order.sort_by(|&a, &b| {
        net.profile_name(ProfileId::from_index(a))
            .cmp(net.profile_name(ProfileId::from_index(b)))
    });

    let mut w = BufWriter::new(File::create(profiles_path)?);
    writeln!(w, "{PROFILES_HEADER}")?;
    for &i in &order {
        let p = ProfileId::from_index(i);
        let m = net.meta(p);
        let (lat, lon) = match m.location {
            Some((la, lo)) => (la.to_string(), lo.to_string()),
            None => (String::new(), String::new()),
        };
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            net.profile_name(p),
            net.account_name(net.account_of(p)),
            fmt_opt(&m.race),
            fmt_opt(&m.sex),
            fmt_opt(&m.coloration),
            fmt_opt(&m.weight),
            fmt_opt(&m.weight_range),
            m.birth_date.map(date::format).unwrap_or_default(),
            date::format(m.join_date),
            lat,
            lon,
        )?;
    }
    w.flush()?;

    let mut lines: Vec<(String, String)> = net
        .graph()
        .edges()
        .map(|(u, v)| {
            let a = net.profile_name(ProfileId::from_index(u as usize));
            let b = net.profile_name(ProfileId::from_index(v as usize));
            if a <= b {
                (a.to_owned(), b.to_owned())
            } else {
                (b.to_owned(), a.to_owned())
            }
        })
        .collect();
    lines.sort();
    let mut w = BufWriter::new(File::create(edges_path)?);
    for (a, b) in lines {
        writeln!(w, "{a}\t{b}")?;
    }
    w.flush()?;
    Ok(())
}
