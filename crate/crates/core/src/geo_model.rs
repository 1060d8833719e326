//! Domain types shared by every other module, plus the exact ×10⁸
//! fixed-point conversion between decimal degrees and `i64`.
//!
//! Coordinates never pass through binary floating point on their way into
//! the store; `f64` is only used for distances.

use std::collections::BTreeMap;
use std::fmt;
use std::num::NonZeroU64;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of scaled units per degree.
pub const SCALE: i64 = 100_000_000;
/// Maximum number of fractional digits accepted by [`scale_decimal_degrees`].
pub const SCALE_DIGITS: usize = 8;

pub const MAX_LAT: i64 = 90 * SCALE;
pub const MAX_LON: i64 = 180 * SCALE;

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// A positive OSM identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct ObjectId(NonZeroU64);

impl ObjectId {
    pub fn new(value: u64) -> Option<Self> {
        NonZeroU64::new(value).map(ObjectId)
    }

    pub fn get(self) -> u64 {
        self.0.get()
    }
}

impl TryFrom<u64> for ObjectId {
    type Error = Error;

    fn try_from(value: u64) -> Result<Self> {
        ObjectId::new(value).ok_or_else(|| Error::parse(None, "object id must be positive"))
    }
}

impl From<ObjectId> for u64 {
    fn from(id: ObjectId) -> u64 {
        id.get()
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectType {
    Node = 0,
    Way = 1,
}

impl ObjectType {
    /// Wire flag: 0 for nodes, 1 for ways.
    pub fn code(self) -> i64 {
        self as i64
    }

    pub fn from_code(code: i64) -> Option<Self> {
        match code {
            0 => Some(ObjectType::Node),
            1 => Some(ObjectType::Way),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectType::Node => "node",
            ObjectType::Way => "way",
        }
    }
}

impl fmt::Display for ObjectType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Latitude/longitude in degrees × 10⁸.
///
/// Fields are public so that hand-built (possibly invalid) stores can be
/// constructed for validation; use [`ScaledCoord::new`] for checked values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ScaledCoord {
    pub lat: i64,
    pub lon: i64,
}

impl ScaledCoord {
    pub fn new(lat: i64, lon: i64) -> Result<Self> {
        let c = ScaledCoord { lat, lon };
        if c.is_valid() {
            Ok(c)
        } else {
            Err(Error::InvalidCoordinate(format!("({lat}, {lon}) outside ±90°/±180°")))
        }
    }

    pub fn from_degrees(lat: &str, lon: &str) -> Result<Self> {
        Self::new(scale_decimal_degrees(lat)?, scale_decimal_degrees(lon)?)
    }

    pub fn is_valid(&self) -> bool {
        (-MAX_LAT..=MAX_LAT).contains(&self.lat) && (-MAX_LON..=MAX_LON).contains(&self.lon)
    }

    fn radians(&self) -> (f64, f64) {
        let k = std::f64::consts::PI / (180.0 * SCALE as f64);
        (self.lat as f64 * k, self.lon as f64 * k)
    }
}

impl fmt::Display for ScaledCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", format_scaled(self.lat), format_scaled(self.lon))
    }
}

/// Key/value tags. Keys are unique, non-empty and case-sensitive.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagMap(BTreeMap<String, String>);

impl TagMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a tag, rejecting empty or repeated keys.
    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) -> Result<()> {
        let key = key.into();
        if key.is_empty() {
            return Err(Error::parse(None, "empty tag key"));
        }
        if self.0.contains_key(&key) {
            return Err(Error::parse(None, format!("duplicate tag key {key:?}")));
        }
        self.0.insert(key, value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    /// Exact, case-sensitive match of `key = value`.
    pub fn matches(&self, key: &str, value: &str) -> bool {
        self.get(key) == Some(value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for TagMap {
    /// Collects pairs; later duplicates overwrite earlier ones and empty keys
    /// are dropped.
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        TagMap(
            iter.into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .filter(|(k, _)| !k.is_empty())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: ObjectId,
    pub coord: ScaledCoord,
    pub tags: TagMap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Way {
    pub id: ObjectId,
    pub node_refs: Vec<ObjectId>,
    pub tags: TagMap,
}

impl Way {
    /// A closed way starts and ends at the same node and has at least three
    /// distinct vertices plus the closing reference.
    pub fn is_closed(&self) -> bool {
        is_closed_way(self)
    }
}

pub fn is_closed_way(w: &Way) -> bool {
    w.node_refs.len() >= 4 && w.node_refs.first() == w.node_refs.last()
}

/// Axis-aligned box in scaled degrees, inclusive on all four edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    pub south: i64,
    pub west: i64,
    pub north: i64,
    pub east: i64,
}

impl BoundingBox {
    /// Checked constructor. Boxes never wrap the antimeridian, so
    /// `west <= east` is required along with `south <= north`.
    pub fn new(south: i64, west: i64, north: i64, east: i64) -> Result<Self> {
        let bb = BoundingBox { south, west, north, east };
        bb.validate()?;
        Ok(bb)
    }

    pub fn validate(&self) -> Result<()> {
        let in_range = |v: i64, max: i64| (-max..=max).contains(&v);
        if !(in_range(self.south, MAX_LAT) && in_range(self.north, MAX_LAT)) {
            return Err(Error::InvalidBoundingBox("latitude outside ±90°".into()));
        }
        if !(in_range(self.west, MAX_LON) && in_range(self.east, MAX_LON)) {
            return Err(Error::InvalidBoundingBox("longitude outside ±180°".into()));
        }
        if self.south > self.north {
            return Err(Error::InvalidBoundingBox(format!(
                "south {} is greater than north {}",
                self.south, self.north
            )));
        }
        if self.west > self.east {
            return Err(Error::InvalidBoundingBox(format!(
                "west {} is greater than east {} (antimeridian-wrapping boxes must be split)",
                self.west, self.east
            )));
        }
        Ok(())
    }

    pub fn world() -> Self {
        BoundingBox { south: -MAX_LAT, west: -MAX_LON, north: MAX_LAT, east: MAX_LON }
    }

    pub fn contains(&self, c: ScaledCoord) -> bool {
        self.south <= c.lat && c.lat <= self.north && self.west <= c.lon && c.lon <= self.east
    }

    pub fn intersects(&self, other: &BoundingBox) -> bool {
        self.south <= other.north
            && other.south <= self.north
            && self.west <= other.east
            && other.west <= self.east
    }

    /// Smallest box covering all coordinates, or `None` for an empty input.
    pub fn enclosing<I: IntoIterator<Item = ScaledCoord>>(coords: I) -> Option<Self> {
        let mut it = coords.into_iter();
        let first = it.next()?;
        let mut bb = BoundingBox { south: first.lat, west: first.lon, north: first.lat, east: first.lon };
        for c in it {
            bb.south = bb.south.min(c.lat);
            bb.north = bb.north.max(c.lat);
            bb.west = bb.west.min(c.lon);
            bb.east = bb.east.max(c.lon);
        }
        Some(bb)
    }
}

/// Parses a decimal-degree string into degrees × 10⁸ using integer arithmetic
/// only. Accepts an optional sign, digits, and at most eight fractional digits.
pub fn scale_decimal_degrees(text: &str) -> Result<i64> {
    let bad = |why: &str| Error::InvalidCoordinate(format!("{text:?}: {why}"));
    let (negative, body) = match text.as_bytes().first() {
        Some(b'-') => (true, &text[1..]),
        Some(b'+') => (false, &text[1..]),
        _ => (false, text),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad("no digits"));
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad("not a decimal number"));
    }
    if frac_part.len() > SCALE_DIGITS {
        return Err(bad("more than 8 fractional digits"));
    }

    let mut acc: i128 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        acc = acc * 10 + i128::from(b - b'0');
        // Anything this large is out of range whatever digits follow.
        if acc > i128::from(u64::MAX) * 10_i128.pow(SCALE_DIGITS as u32) {
            return Err(bad("out of 64-bit range"));
        }
    }
    acc *= 10_i128.pow((SCALE_DIGITS - frac_part.len()) as u32);
    if negative {
        acc = -acc;
    }
    i64::try_from(acc).map_err(|_| bad("out of 64-bit range"))
}

/// Renders a scaled value as decimal degrees with trailing zeros removed.
/// Inverse of [`scale_decimal_degrees`] on the ±180° range.
pub fn unscale_to_decimal(v: i64) -> Result<String> {
    if !(-MAX_LON..=MAX_LON).contains(&v) {
        return Err(Error::InvalidCoordinate(format!("{v} outside ±180°")));
    }
    Ok(format_scaled(v))
}

fn format_scaled(v: i64) -> String {
    let sign = if v < 0 { "-" } else { "" };
    let abs = v.unsigned_abs();
    let int = abs / SCALE as u64;
    let frac = abs % SCALE as u64;
    if frac == 0 {
        return format!("{sign}{int}");
    }
    let digits = format!("{frac:08}");
    format!("{sign}{int}.{}", digits.trim_end_matches('0'))
}

/// Great-circle distance in meters on a sphere of radius [`EARTH_RADIUS_M`].
pub fn haversine_distance(a: ScaledCoord, b: ScaledCoord) -> f64 {
    let (lat1, lon1) = a.radians();
    let (lat2, lon2) = b.radians();
    let dlat = (lat2 - lat1).abs();
    let dlon = (lon2 - lon1).abs();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.min(1.0).sqrt().asin()
}
