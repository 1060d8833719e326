//! Forward and reverse geocoding over the store's address tags.
//!
//! Forward matching scores each addressed object by the Jaccard overlap of
//! its address tokens with the query tokens. Reverse geocoding picks the
//! nearest object and renders a fixed-format description from its tags.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::geo_model::{haversine_distance, ObjectId, ObjectType, ScaledCoord, TagMap};
use crate::spatial_index::SpatialIndex;

/// Tags whose values contribute address tokens.
pub const ADDRESS_KEYS: [&str; 5] = ["addr:housenumber", "addr:street", "addr:city", "addr:postcode", "name"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeocodeResult {
    pub object_type: ObjectType,
    pub id: ObjectId,
    pub coord: ScaledCoord,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReverseGeocodeResult {
    pub object_type: ObjectType,
    pub id: ObjectId,
    pub description: String,
}

/// Lowercases, turns every non-alphanumeric character into a separator and
/// splits on whitespace.
pub fn normalize_address(text: &str) -> Vec<String> {
    let cleaned: String = text
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect::<String>()
        .to_lowercase();
    cleaned.split_whitespace().map(str::to_owned).collect()
}

#[derive(Debug, Clone)]
struct Candidate {
    object_type: ObjectType,
    id: ObjectId,
    coord: ScaledCoord,
    tokens: BTreeSet<String>,
}

/// Token index over every node and way carrying at least one address tag.
#[derive(Debug, Clone, Default)]
pub struct Geocoder {
    candidates: Vec<Candidate>,
    postings: BTreeMap<String, Vec<usize>>,
}

fn address_tokens(tags: &TagMap) -> BTreeSet<String> {
    ADDRESS_KEYS
        .iter()
        .filter_map(|k| tags.get(k))
        .flat_map(normalize_address)
        .collect()
}

/// The member coordinate with the smallest summed haversine distance to the
/// other distinct members; earliest in way order on ties.
pub fn way_representative_point(coords: &[ScaledCoord]) -> Option<ScaledCoord> {
    let mut distinct: Vec<ScaledCoord> = Vec::with_capacity(coords.len());
    for c in coords {
        if !distinct.contains(c) {
            distinct.push(*c);
        }
    }
    let mut best: Option<(f64, ScaledCoord)> = None;
    for &c in &distinct {
        let total: f64 = distinct.iter().map(|&o| haversine_distance(c, o)).sum();
        if best.is_none_or(|(b, _)| total < b) {
            best = Some((total, c));
        }
    }
    best.map(|(_, c)| c)
}

impl Geocoder {
    pub fn new(index: &SpatialIndex) -> Self {
        let store = index.store();
        let mut candidates = Vec::new();
        for n in store.nodes() {
            let tokens = address_tokens(&n.tags);
            if !tokens.is_empty() {
                candidates.push(Candidate { object_type: ObjectType::Node, id: n.id, coord: n.coord, tokens });
            }
        }
        for w in store.ways() {
            let tokens = address_tokens(&w.tags);
            if tokens.is_empty() {
                continue;
            }
            let coords = store.way_coords(w).expect("validated store");
            let coord = way_representative_point(&coords).expect("way has members");
            candidates.push(Candidate { object_type: ObjectType::Way, id: w.id, coord, tokens });
        }
        let mut postings: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, c) in candidates.iter().enumerate() {
            for t in &c.tokens {
                postings.entry(t.clone()).or_default().push(i);
            }
        }
        Geocoder { candidates, postings }
    }

    /// Best-matching addressed object for `address`.
    ///
    /// Ranking: highest Jaccard overlap, then more matched tokens, then
    /// nodes before ways, then smaller id.
    pub fn geocode(&self, address: &str) -> Result<GeocodeResult> {
        let query: BTreeSet<String> = normalize_address(address).into_iter().collect();
        let mut matched: BTreeMap<usize, u64> = BTreeMap::new();
        for t in &query {
            for &i in self.postings.get(t).into_iter().flatten() {
                *matched.entry(i).or_default() += 1;
            }
        }
        let q = query.len() as u64;
        let best = matched
            .into_iter()
            .map(|(i, m)| {
                let c = &self.candidates[i];
                let union = q + c.tokens.len() as u64 - m;
                (c, m, union)
            })
            .max_by(|(a, am, au), (b, bm, bu)| {
                // am/au vs bm/bu without division.
                (u128::from(*am) * u128::from(*bu))
                    .cmp(&(u128::from(*bm) * u128::from(*au)))
                    .then(am.cmp(bm))
                    .then(b.object_type.cmp(&a.object_type))
                    .then(b.id.cmp(&a.id))
            })
            .ok_or_else(|| Error::NoMatch(address.to_owned()))?;
        let c = best.0;
        Ok(GeocodeResult { object_type: c.object_type, id: c.id, coord: c.coord })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// `name, housenumber street, city, postcode` with absent parts skipped, or
/// `"<type> <id>"` when none are present.
pub fn describe(object_type: ObjectType, id: ObjectId, tags: &TagMap) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut push = |v: Option<&str>| {
        if let Some(v) = v.filter(|v| !v.is_empty()) {
            parts.push(v.to_owned());
        }
    };
    push(tags.get("name"));
    let street: Vec<&str> = [tags.get("addr:housenumber"), tags.get("addr:street")]
        .into_iter()
        .flatten()
        .filter(|v| !v.is_empty())
        .collect();
    push(Some(&street.join(" ")));
    push(tags.get("addr:city"));
    push(tags.get("addr:postcode"));
    if parts.is_empty() {
        format!("{object_type} {id}")
    } else {
        parts.join(", ")
    }
}

/// Describes the object nearest to `(lat, lon)`.
pub fn reverse_geocode(index: &SpatialIndex, lat: i64, lon: i64) -> Result<ReverseGeocodeResult> {
    let p = ScaledCoord::new(lat, lon)?;
    let (object_type, id, _) = index.nearest_object(p)?;
    let store = index.store();
    let tags = match object_type {
        ObjectType::Node => &store.node(id).expect("nearest node").tags,
        ObjectType::Way => &store.way(id).expect("nearest way").tags,
    };
    Ok(ReverseGeocodeResult { object_type, id, description: describe(object_type, id, tags) })
}
