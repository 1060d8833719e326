//! Versioned binary store snapshots and input-format detection.
//!
//! Layout (all integers little-endian; strings are a `u32` byte length
//! followed by UTF-8 bytes):
//!
//! ```text
//! magic    8 bytes  "GEOSNAP\0"
//! version  u32      1
//! nodes    u64 count, then per node: u64 id, i64 lat, i64 lon, tags
//! ways     u64 count, then per way:  u64 id, u32 ref count, u64 refs..., tags
//! areas    u64 count, then per area: string name, u64 way id
//! tags     u32 count, then per tag:  string key, string value
//! ```
//!
//! Objects are written in ascending id order and areas in ascending
//! (name, way) order, so equal stores produce identical bytes.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geo_model::{Node, ObjectId, ScaledCoord, TagMap, Way};
use crate::osm_ingest::{ensure_valid, parse_fixture, parse_osm_xml, ObjectStore};

pub const MAGIC: &[u8; 8] = b"GEOSNAP\0";
pub const VERSION: u32 = 1;

pub fn write_snapshot(store: &ObjectStore) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(store.node_count() as u64).to_le_bytes());
    for n in store.nodes() {
        out.extend_from_slice(&n.id.get().to_le_bytes());
        out.extend_from_slice(&n.coord.lat.to_le_bytes());
        out.extend_from_slice(&n.coord.lon.to_le_bytes());
        put_tags(&mut out, &n.tags);
    }
    out.extend_from_slice(&(store.way_count() as u64).to_le_bytes());
    for w in store.ways() {
        out.extend_from_slice(&w.id.get().to_le_bytes());
        out.extend_from_slice(&(w.node_refs.len() as u32).to_le_bytes());
        for r in &w.node_refs {
            out.extend_from_slice(&r.get().to_le_bytes());
        }
        put_tags(&mut out, &w.tags);
    }
    let areas: Vec<(&str, ObjectId)> =
        store.areas().flat_map(|(name, ways)| ways.iter().map(move |w| (name, *w))).collect();
    out.extend_from_slice(&(areas.len() as u64).to_le_bytes());
    for (name, way) in areas {
        put_str(&mut out, name);
        out.extend_from_slice(&way.get().to_le_bytes());
    }
    out
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

fn put_tags(out: &mut Vec<u8>, tags: &TagMap) {
    out.extend_from_slice(&(tags.len() as u32).to_le_bytes());
    for (k, v) in tags.iter() {
        put_str(out, k);
        put_str(out, v);
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::Snapshot(format!("truncated at byte {}", self.pos))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn id(&mut self) -> Result<ObjectId> {
        let at = self.pos;
        ObjectId::new(self.u64()?).ok_or_else(|| Error::Snapshot(format!("zero object id at byte {at}")))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let at = self.pos;
        String::from_utf8(self.take(len)?.to_vec())
            .map_err(|_| Error::Snapshot(format!("invalid UTF-8 at byte {at}")))
    }

    fn tags(&mut self) -> Result<TagMap> {
        let n = self.u32()?;
        let mut tags = TagMap::new();
        for _ in 0..n {
            let k = self.string()?;
            let v = self.string()?;
            tags.insert(k, v).map_err(|e| Error::Snapshot(e.to_string()))?;
        }
        Ok(tags)
    }
}

/// Reads a snapshot and validates the resulting store.
pub fn read_snapshot(bytes: &[u8]) -> Result<ObjectStore> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(MAGIC.len()).ok() != Some(&MAGIC[..]) {
        return Err(Error::Snapshot("not a store snapshot (bad magic)".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported snapshot version {version}")));
    }
    let mut store = ObjectStore::new();
    for _ in 0..c.u64()? {
        let id = c.id()?;
        let coord = ScaledCoord { lat: c.i64()?, lon: c.i64()? };
        let tags = c.tags()?;
        store.insert_node(Node { id, coord, tags })?;
    }
    for _ in 0..c.u64()? {
        let id = c.id()?;
        let n = c.u32()?;
        let node_refs = (0..n).map(|_| c.id()).collect::<Result<Vec<_>>>()?;
        let tags = c.tags()?;
        store.insert_way(Way { id, node_refs, tags })?;
    }
    for _ in 0..c.u64()? {
        let name = c.string()?;
        let way = c.id()?;
        store.add_area(&name, way);
    }
    if c.pos != bytes.len() {
        return Err(Error::Snapshot(format!("{} trailing bytes", bytes.len() - c.pos)));
    }
    ensure_valid(store)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Snapshot,
    OsmXml,
    Fixture,
}

/// Guesses the format from content: snapshot magic, a leading `<`, or
/// otherwise fixture text.
pub fn detect_format(bytes: &[u8]) -> InputFormat {
    if bytes.starts_with(MAGIC) {
        return InputFormat::Snapshot;
    }
    let body = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    match body.iter().find(|b| !b.is_ascii_whitespace()) {
        Some(b'<') => InputFormat::OsmXml,
        _ => InputFormat::Fixture,
    }
}

pub fn load_bytes(bytes: &[u8]) -> Result<ObjectStore> {
    match detect_format(bytes) {
        InputFormat::Snapshot => read_snapshot(bytes),
        InputFormat::OsmXml => parse_osm_xml(bytes),
        InputFormat::Fixture => {
            let text = std::str::from_utf8(bytes).map_err(|_| Error::parse(None, "fixture is not UTF-8"))?;
            parse_fixture(text)
        }
    }
}

/// Loads a store from a snapshot, OSM XML or fixture file.
pub fn load_store(path: impl AsRef<Path>) -> Result<ObjectStore> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    load_bytes(&bytes)
}
