//! Loading OSM-model data into an [`ObjectStore`].
//!
//! Two input formats are supported: standard OSM XML (`<osm>` documents with
//! `<node>`, `<way>`, `<nd>` and `<tag>` elements) and a line-oriented
//! fixture format used for hand-authored test data.
//!
//! # Fixture format
//!
//! UTF-8 text, one object per line. Blank lines and lines whose first
//! non-blank character is `#` are ignored. Tokens are separated by
//! whitespace; a double-quoted span inside a token keeps its whitespace and
//! understands the escapes `\"`, `\\`, `\n`, `\r` and `\t`.
//!
//! ```text
//! node <id> <lat> <lon> [key=value ...]
//! way  <id> <ref>,<ref>,... [key=value ...]
//! area <name> <way-id>
//! ```
//!
//! Coordinates are decimal degrees with at most eight fractional digits. A
//! tag token splits at its first unquoted `=`, so `name="Baker Street"` and
//! `"odd key"=x` are both valid. Area names are normalized (see
//! [`normalize_area_name`]); quote names containing spaces.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use crate::error::{Error, Result};
use crate::geo_model::{
    is_closed_way, unscale_to_decimal, Node, ObjectId, ObjectType,
    ScaledCoord, TagMap, Way,
};
use crate::spatial_index::ring_is_simple;

/// All nodes, ways and named-area registrations of an extract.
///
/// Areas map a normalized name to the closed ways that define it. More than
/// one way under a name is allowed in the store and reported as ambiguous at
/// query time.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObjectStore {
    nodes: BTreeMap<ObjectId, Node>,
    ways: BTreeMap<ObjectId, Way>,
    areas: BTreeMap<String, BTreeSet<ObjectId>>,
}

impl ObjectStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a node without validating it.
    pub fn insert_node(&mut self, node: Node) -> Result<()> {
        if self.nodes.contains_key(&node.id) {
            return Err(Error::DuplicateObject { kind: ObjectType::Node, id: node.id });
        }
        self.nodes.insert(node.id, node);
        Ok(())
    }

    /// Inserts a way without checking its references.
    pub fn insert_way(&mut self, way: Way) -> Result<()> {
        if self.ways.contains_key(&way.id) {
            return Err(Error::DuplicateObject { kind: ObjectType::Way, id: way.id });
        }
        self.ways.insert(way.id, way);
        Ok(())
    }

    /// Registers `way` as the polygon for the area called `name`.
    pub fn add_area(&mut self, name: &str, way: ObjectId) {
        self.areas.entry(normalize_area_name(name)).or_default().insert(way);
    }

    pub fn node(&self, id: ObjectId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    pub fn way(&self, id: ObjectId) -> Option<&Way> {
        self.ways.get(&id)
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &Node> + Clone {
        self.nodes.values()
    }

    /// Ways in ascending id order.
    pub fn ways(&self) -> impl ExactSizeIterator<Item = &Way> + Clone {
        self.ways.values()
    }

    /// Area registrations as (normalized name, defining ways).
    pub fn areas(&self) -> impl Iterator<Item = (&str, &BTreeSet<ObjectId>)> {
        self.areas.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn area_ways(&self, normalized_name: &str) -> Option<&BTreeSet<ObjectId>> {
        self.areas.get(normalized_name)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn way_count(&self) -> usize {
        self.ways.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.ways.is_empty()
    }

    /// Member coordinates of a way in way order; `None` if any reference is
    /// unresolved.
    pub fn way_coords(&self, way: &Way) -> Option<Vec<ScaledCoord>> {
        way.node_refs.iter().map(|r| self.nodes.get(r).map(|n| n.coord)).collect()
    }
}

/// Case-folds, trims and collapses internal whitespace.
pub fn normalize_area_name(name: &str) -> String {
    name.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    DanglingReference,
    InvalidCoordinate,
    ShortWay,
    InvalidArea,
}

/// A broken store invariant together with the offending object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub kind: ObjectType,
    pub id: ObjectId,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} on {} {}: {}", self.rule, self.kind, self.id, self.detail)
    }
}

/// Checks every store invariant and returns all violations found, ordered
/// by object.
pub fn validate_store(s: &ObjectStore) -> Vec<Violation> {
    let mut out = Vec::new();
    for n in s.nodes() {
        if !n.coord.is_valid() {
            out.push(Violation {
                rule: Rule::InvalidCoordinate,
                kind: ObjectType::Node,
                id: n.id,
                detail: format!("coordinate ({}, {}) out of bounds", n.coord.lat, n.coord.lon),
            });
        }
    }
    for w in s.ways() {
        if w.node_refs.len() < 2 {
            out.push(Violation {
                rule: Rule::ShortWay,
                kind: ObjectType::Way,
                id: w.id,
                detail: format!("{} node refs, need at least 2", w.node_refs.len()),
            });
        }
        let missing = missing_refs(s, w);
        if !missing.is_empty() {
            out.push(Violation {
                rule: Rule::DanglingReference,
                kind: ObjectType::Way,
                id: w.id,
                detail: format!("missing nodes {missing:?}"),
            });
        }
    }
    for (name, ways) in s.areas() {
        for &way_id in ways {
            if let Some(detail) = area_problem(s, way_id) {
                out.push(Violation {
                    rule: Rule::InvalidArea,
                    kind: ObjectType::Way,
                    id: way_id,
                    detail: format!("area {name:?}: {detail}"),
                });
            }
        }
    }
    out
}

fn missing_refs(s: &ObjectStore, w: &Way) -> Vec<ObjectId> {
    let mut missing: Vec<ObjectId> =
        w.node_refs.iter().copied().filter(|r| s.node(*r).is_none()).collect();
    missing.sort();
    missing.dedup();
    missing
}

fn area_problem(s: &ObjectStore, way_id: ObjectId) -> Option<String> {
    let Some(way) = s.way(way_id) else {
        return Some("defining way does not exist".into());
    };
    if !is_closed_way(way) {
        return Some("defining way is not closed".into());
    }
    let ring = s.way_coords(way)?;
    if !ring_is_simple(&ring) {
        return Some("ring is degenerate or self-intersecting".into());
    }
    None
}

/// Turns the first violation into the matching hard error.
pub(crate) fn ensure_valid(s: ObjectStore) -> Result<ObjectStore> {
    let violations = validate_store(&s);
    let Some(first) = violations.first() else {
        return Ok(s);
    };
    Err(match first.rule {
        Rule::DanglingReference => {
            let way = s.way(first.id).expect("violation names a stored way");
            Error::DanglingReference { way: first.id, missing: missing_refs(&s, way) }
        }
        Rule::InvalidCoordinate => Error::InvalidCoordinate(first.to_string()),
        Rule::ShortWay | Rule::InvalidArea => Error::BuildRejected(violations),
    })
}

// ---------------------------------------------------------------------------
// OSM XML

/// Parses an OSM XML document. Closed ways carrying a `name` tag together
/// with a `boundary` or `place` tag are registered as named areas.
pub fn parse_osm_xml<R: BufRead>(input: R) -> Result<ObjectStore> {
    let mut reader = Reader::from_reader(input);
    let mut buf = Vec::new();
    let mut store = ObjectStore::new();
    let mut depth = 0usize;
    let mut saw_root = false;
    let mut current: Option<Pending> = None;
    // Depth at which the current node/way was opened.
    let mut current_depth = 0usize;

    let err_at = |reader: &Reader<R>, msg: String| {
        Error::parse(None, format!("{msg} (byte {})", reader.buffer_position()))
    };

    loop {
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| err_at(&reader, e.to_string()))?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(event, Event::Empty(_));
                let name = e.name();
                let name = name.as_ref();
                if depth == 0 {
                    if saw_root {
                        return Err(err_at(&reader, "multiple root elements".into()));
                    }
                    if name != b"osm" {
                        return Err(err_at(&reader, "root element must be <osm>".into()));
                    }
                    saw_root = true;
                } else if depth == 1 {
                    match name {
                        b"node" => current = Some(Pending::Node(start_node(e)?)),
                        b"way" => current = Some(Pending::Way(start_way(e)?)),
                        _ => {}
                    }
                    current_depth = 1;
                } else if depth == current_depth + 1 {
                    match (name, current.as_mut()) {
                        (b"tag", Some(p)) => {
                            let k = attr(e, b"k")?.ok_or_else(|| Error::parse(None, "<tag> without k"))?;
                            let v = attr(e, b"v")?.ok_or_else(|| Error::parse(None, "<tag> without v"))?;
                            p.tags_mut().insert(k, v).map_err(|e| err_at(&reader, e.to_string()))?;
                        }
                        (b"nd", Some(Pending::Way(w))) => {
                            let r = attr(e, b"ref")?.ok_or_else(|| Error::parse(None, "<nd> without ref"))?;
                            w.node_refs.push(parse_id(&r)?);
                        }
                        _ => {}
                    }
                }
                if is_empty {
                    if depth == 1 {
                        if let Some(p) = current.take() {
                            p.commit(&mut store)?;
                        }
                    }
                } else {
                    depth += 1;
                }
            }
            Event::End(_) => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| err_at(&reader, "unbalanced end tag".into()))?;
                if depth == 1 {
                    if let Some(p) = current.take() {
                        p.commit(&mut store)?;
                    }
                }
            }
            Event::Text(ref t) => {
                if depth == 0 && !t.iter().all(u8::is_ascii_whitespace) {
                    return Err(err_at(&reader, "text outside root element".into()));
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !saw_root {
        return Err(Error::parse(None, "document has no <osm> root element"));
    }
    if depth != 0 {
        return Err(Error::parse(None, "unexpected end of document"));
    }

    let named: Vec<(String, ObjectId)> = store
        .ways()
        .filter(|w| {
            is_closed_way(w)
                && (w.tags.get("boundary").is_some() || w.tags.get("place").is_some())
        })
        .filter_map(|w| w.tags.get("name").map(|n| (n.to_owned(), w.id)))
        .collect();
    for (name, id) in named {
        store.add_area(&name, id);
    }
    ensure_valid(store)
}

pub fn parse_osm_xml_bytes(bytes: &[u8]) -> Result<ObjectStore> {
    parse_osm_xml(bytes)
}

enum Pending {
    Node(Node),
    Way(Way),
}

impl Pending {
    fn tags_mut(&mut self) -> &mut TagMap {
        match self {
            Pending::Node(n) => &mut n.tags,
            Pending::Way(w) => &mut w.tags,
        }
    }

    fn commit(self, store: &mut ObjectStore) -> Result<()> {
        match self {
            Pending::Node(n) => store.insert_node(n),
            Pending::Way(w) => store.insert_way(w),
        }
    }
}

fn attr(e: &BytesStart<'_>, key: &[u8]) -> Result<Option<String>> {
    for a in e.attributes() {
        let a = a.map_err(|err| Error::parse(None, err.to_string()))?;
        if a.key.as_ref() == key {
            let v = a.unescape_value().map_err(|err| Error::parse(None, err.to_string()))?;
            return Ok(Some(v.into_owned()));
        }
    }
    Ok(None)
}

fn required_attr(e: &BytesStart<'_>, key: &str) -> Result<String> {
    attr(e, key.as_bytes())?.ok_or_else(|| {
        Error::parse(
            None,
            format!("<{}> missing attribute {key:?}", String::from_utf8_lossy(e.name().as_ref())),
        )
    })
}

fn parse_id(s: &str) -> Result<ObjectId> {
    s.parse::<u64>()
        .ok()
        .and_then(ObjectId::new)
        .ok_or_else(|| Error::parse(None, format!("invalid object id {s:?}")))
}

fn start_node(e: &BytesStart<'_>) -> Result<Node> {
    let id = parse_id(&required_attr(e, "id")?)?;
    let coord = ScaledCoord::from_degrees(&required_attr(e, "lat")?, &required_attr(e, "lon")?)?;
    Ok(Node { id, coord, tags: TagMap::new() })
}

fn start_way(e: &BytesStart<'_>) -> Result<Way> {
    let id = parse_id(&required_attr(e, "id")?)?;
    Ok(Way { id, node_refs: Vec::new(), tags: TagMap::new() })
}

// ---------------------------------------------------------------------------
// Fixture format

pub fn load_fixture(path: impl AsRef<Path>) -> Result<ObjectStore> {
    let text = std::fs::read_to_string(path)?;
    parse_fixture(&text)
}

pub fn parse_fixture(text: &str) -> Result<ObjectStore> {
    let mut store = ObjectStore::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |e: Error| match e {
            Error::ParseError { line: None, message } => Error::ParseError { line: Some(line_no), message },
            Error::InvalidCoordinate(m) => Error::parse(Some(line_no), m),
            Error::DuplicateObject { kind, id } => {
                Error::parse(Some(line_no), format!("duplicate {kind} {id}"))
            }
            other => other,
        };
        let parts = split_tokens(line).map_err(at)?;
        let tokens: Vec<&str> = parts.iter().map(|t| t.text.as_str()).collect();
        match tokens[0] {
            "node" => {
                if tokens.len() < 4 {
                    return Err(Error::parse(Some(line_no), "expected: node <id> <lat> <lon> [k=v ...]"));
                }
                let id = parse_id(tokens[1]).map_err(at)?;
                let coord = ScaledCoord::from_degrees(tokens[2], tokens[3]).map_err(at)?;
                let tags = parse_tags(&parts[4..]).map_err(at)?;
                store.insert_node(Node { id, coord, tags }).map_err(at)?;
            }
            "way" => {
                if tokens.len() < 3 {
                    return Err(Error::parse(Some(line_no), "expected: way <id> <ref,ref,...> [k=v ...]"));
                }
                let id = parse_id(tokens[1]).map_err(at)?;
                let node_refs = tokens[2].split(',').map(parse_id).collect::<Result<Vec<_>>>().map_err(at)?;
                let tags = parse_tags(&parts[3..]).map_err(at)?;
                store.insert_way(Way { id, node_refs, tags }).map_err(at)?;
            }
            "area" => {
                if tokens.len() != 3 {
                    return Err(Error::parse(Some(line_no), "expected: area <name> <way-id>"));
                }
                if normalize_area_name(tokens[1]).is_empty() {
                    return Err(Error::parse(Some(line_no), "empty area name"));
                }
                let way = parse_id(tokens[2]).map_err(at)?;
                store.add_area(tokens[1], way);
            }
            other => {
                return Err(Error::parse(Some(line_no), format!("unknown record type {other:?}")));
            }
        }
    }
    ensure_valid(store)
}

struct Token {
    text: String,
    /// Byte index in `text` of the first `=` that appeared outside quotes.
    split: Option<usize>,
}

fn split_tokens(line: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while chars.next_if(|c| c.is_whitespace()).is_some() {}
        if chars.peek().is_none() {
            break;
        }
        let mut text = String::new();
        let mut split = None;
        while let Some(c) = chars.next_if(|c| !c.is_whitespace()) {
            match c {
                '"' => loop {
                    match chars.next() {
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some(e @ ('"' | '\\')) => text.push(e),
                            Some('n') => text.push('\n'),
                            Some('r') => text.push('\r'),
                            Some('t') => text.push('\t'),
                            _ => return Err(Error::parse(None, "bad escape in quoted text")),
                        },
                        Some(c) => text.push(c),
                        None => return Err(Error::parse(None, "unterminated quote")),
                    }
                },
                '=' if split.is_none() => {
                    split = Some(text.len());
                    text.push('=');
                }
                c => text.push(c),
            }
        }
        out.push(Token { text, split });
    }
    Ok(out)
}

fn parse_tags(tokens: &[Token]) -> Result<TagMap> {
    let mut tags = TagMap::new();
    for t in tokens {
        let at = t
            .split
            .ok_or_else(|| Error::parse(None, format!("tag {:?} is not key=value", t.text)))?;
        tags.insert(&t.text[..at], &t.text[at + 1..])?;
    }
    Ok(tags)
}

/// Renders a store in the fixture format. Output is deterministic: nodes,
/// then ways, then areas, each in ascending order.
pub fn write_fixture(store: &ObjectStore) -> String {
    let mut out = String::new();
    for n in store.nodes() {
        out.push_str(&format!(
            "node {} {} {}",
            n.id,
            unscale_to_decimal(n.coord.lat).unwrap_or_else(|_| n.coord.lat.to_string()),
            unscale_to_decimal(n.coord.lon).unwrap_or_else(|_| n.coord.lon.to_string()),
        ));
        push_tags(&mut out, &n.tags);
        out.push('\n');
    }
    for w in store.ways() {
        let refs: Vec<String> = w.node_refs.iter().map(ObjectId::to_string).collect();
        out.push_str(&format!("way {} {}", w.id, refs.join(",")));
        push_tags(&mut out, &w.tags);
        out.push('\n');
    }
    for (name, ways) in store.areas() {
        for w in ways {
            out.push_str(&format!("area {} {}\n", quote(name, false), w));
        }
    }
    out
}

fn push_tags(out: &mut String, tags: &TagMap) {
    for (k, v) in tags.iter() {
        out.push(' ');
        out.push_str(&quote(k, true));
        out.push('=');
        out.push_str(&quote(v, false));
    }
}

fn quote(s: &str, is_key: bool) -> String {
    let needs = s.is_empty() && !is_key
        || s.chars().any(|c| c.is_whitespace() || c == '"' || c == '\\' || (is_key && c == '='));
    if !needs {
        return s.to_owned();
    }
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                q.push('\\');
                q.push(c);
            }
            '\n' => q.push_str("\\n"),
            '\r' => q.push_str("\\r"),
            '\t' => q.push_str("\\t"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(v: u64) -> ObjectId {
        ObjectId::new(v).unwrap()
    }

    #[test]
    fn xml_single_node() {
        let xml = br#"<?xml version="1.0"?>
<osm version="0.6">
  <node id="1" lat="40.7719" lon="-73.9746"/>
</osm>"#;
        let s = parse_osm_xml_bytes(xml).unwrap();
        assert_eq!(s.node(id(1)).unwrap().coord, ScaledCoord { lat: 4_077_190_000, lon: -7_397_460_000 });
    }

    #[test]
    fn xml_empty_document() {
        let s = parse_osm_xml_bytes(b"<osm/>").unwrap();
        assert!(s.is_empty());
        let s = parse_osm_xml_bytes(b"<?xml version='1.0'?><osm></osm>").unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn xml_dangling_reference() {
        let xml = br#"<osm><node id="1" lat="0" lon="0"/><way id="7"><nd ref="1"/><nd ref="99"/></way></osm>"#;
        match parse_osm_xml_bytes(xml) {
            Err(Error::DanglingReference { way, missing }) => {
                assert_eq!(way, id(7));
                assert_eq!(missing, vec![id(99)]);
            }
            other => panic!("expected DanglingReference, got {other:?}"),
        }
    }

    #[test]
    fn xml_duplicates_and_malformed_input() {
        let dup = br#"<osm><node id="1" lat="0" lon="0"/><node id="1" lat="1" lon="1"/></osm>"#;
        assert!(matches!(parse_osm_xml_bytes(dup), Err(Error::DuplicateObject { .. })));
        for bad in [
            &b"<osm><node id=\"1\" lat=\"0\" lon=\"0\"></osm>"[..],
            b"<osm>",
            b"",
            b"<notosm/>",
            b"<osm><node id=\"x\" lat=\"0\" lon=\"0\"/></osm>",
            b"<osm><node id=\"1\" lat=\"0\"/></osm>",
            b"<osm><node id=\"1\" lat=\"0\" lon=\"0\"><tag k=\"a\" v=\"1\"/><tag k=\"a\" v=\"2\"/></node></osm>",
        ] {
            let r = parse_osm_xml_bytes(bad);
            assert!(matches!(r, Err(Error::ParseError { .. })), "{:?} -> {r:?}", String::from_utf8_lossy(bad));
        }
        let out_of_range = br#"<osm><node id="1" lat="91" lon="0"/></osm>"#;
        assert!(matches!(parse_osm_xml_bytes(out_of_range), Err(Error::InvalidCoordinate(_))));
    }

    #[test]
    fn xml_tags_refs_and_relations() {
        let xml = br#"<osm version="0.6">
  <bounds minlat="0" minlon="0" maxlat="1" maxlon="1"/>
  <node id="1" lat="0" lon="0"><tag k="amenity" v="cafe"/><tag k="name" v="Caf&amp;e"/></node>
  <node id="2" lat="0" lon="0.001"/>
  <node id="3" lat="0.001" lon="0.001"/>
  <way id="10"><nd ref="1"/><nd ref="2"/><nd ref="3"/><nd ref="1"/>
    <tag k="boundary" v="administrative"/><tag k="name" v="Tiny Town"/></way>
  <relation id="5"><member type="way" ref="10" role="outer"/><tag k="type" v="multipolygon"/></relation>
</osm>"#;
        let s = parse_osm_xml_bytes(xml).unwrap();
        assert_eq!(s.node(id(1)).unwrap().tags.get("name"), Some("Caf&e"));
        assert_eq!(s.way(id(10)).unwrap().node_refs, vec![id(1), id(2), id(3), id(1)]);
        assert_eq!(s.way(id(10)).unwrap().tags.len(), 2);
        assert_eq!(s.area_ways("tiny town").unwrap().iter().copied().collect::<Vec<_>>(), vec![id(10)]);
        assert_eq!(s.node_count(), 3);
        assert_eq!(s.way_count(), 1);
    }

    #[test]
    fn fixture_lines() {
        let s = parse_fixture(
            "# comment\n\nnode 2700809522 42.36000000 -71.06000000 amenity=cafe\n",
        )
        .unwrap();
        let n = s.node(id(2_700_809_522)).unwrap();
        assert_eq!(n.coord, ScaledCoord { lat: 4_236_000_000, lon: -7_106_000_000 });
        assert_eq!(n.tags.get("amenity"), Some("cafe"));
        assert!(parse_fixture("").unwrap().is_empty());
    }

    #[test]
    fn fixture_quoting() {
        let s = parse_fixture(
            r#"node 1 0 0 addr:street="Avenue Anatole France" "odd key"=x empty= fee=10-25€ q="say \"hi\" \\"
node 2 1 1
way 3 1,2 name=a=b
node 4 0 1
node 5 1 0
way 6 1,4,2,5,1
area "New  York" 6"#,
        )
        .unwrap();
        let t = &s.node(id(1)).unwrap().tags;
        assert_eq!(t.get("addr:street"), Some("Avenue Anatole France"));
        assert_eq!(t.get("odd key"), Some("x"));
        assert_eq!(t.get("empty"), Some(""));
        assert_eq!(t.get("fee"), Some("10-25€"));
        assert_eq!(t.get("q"), Some(r#"say "hi" \"#));
        assert_eq!(s.way(id(3)).unwrap().tags.get("name"), Some("a=b"));
        assert!(s.area_ways("new york").is_some());
    }

    #[test]
    fn fixture_errors_carry_line_numbers() {
        let cases = [
            ("node 1 0\n", 1),
            ("node 1 0 0\nnode 1 1 1\n", 2),
            ("\n\nbogus 1\n", 3),
            ("node 1 0 0 novalue\n", 1),
            ("node 1 0 0 a=\"unterminated\n", 1),
            ("node 1 91 0\n", 1),
            ("node 0 1 0\n", 1),
            ("way 2 1,x\n", 1),
            ("area 5\n", 1),
        ];
        for (text, line) in cases {
            match parse_fixture(text) {
                Err(Error::ParseError { line: Some(l), .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: expected ParseError, got {other:?}"),
            }
        }
        assert!(matches!(
            parse_fixture("node 1 0 0\nway 2 1,99\n"),
            Err(Error::DanglingReference { .. })
        ));
    }

    #[test]
    fn validate_reports_each_violation() {
        let mut s = ObjectStore::new();
        s.insert_node(Node { id: id(1), coord: ScaledCoord { lat: 0, lon: 0 }, tags: TagMap::new() }).unwrap();
        s.insert_way(Way { id: id(2), node_refs: vec![id(1), id(9)], tags: TagMap::new() }).unwrap();
        let v = validate_store(&s);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].rule, v[0].id), (Rule::DanglingReference, id(2)));

        let mut s = ObjectStore::new();
        s.insert_node(Node { id: id(1), coord: ScaledCoord { lat: 91 * 100_000_000, lon: 0 }, tags: TagMap::new() })
            .unwrap();
        let v = validate_store(&s);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].rule, v[0].id), (Rule::InvalidCoordinate, id(1)));

        let mut s = ObjectStore::new();
        s.insert_node(Node { id: id(1), coord: ScaledCoord { lat: 0, lon: 0 }, tags: TagMap::new() }).unwrap();
        s.insert_way(Way { id: id(2), node_refs: vec![id(1)], tags: TagMap::new() }).unwrap();
        s.add_area("Nowhere", id(2));
        s.add_area("Ghost", id(77));
        let rules: Vec<Rule> = validate_store(&s).iter().map(|v| v.rule).collect();
        assert_eq!(rules, vec![Rule::ShortWay, Rule::InvalidArea, Rule::InvalidArea]);
    }

    #[test]
    fn parsed_store_is_valid() {
        let s = parse_fixture("node 1 0 0\nnode 2 1 1\nway 3 1,2\n").unwrap();
        assert!(validate_store(&s).is_empty());
    }

    #[test]
    fn self_intersecting_area_rejected() {
        // Bow-tie ring.
        let text = "node 1 0 0\nnode 2 1 1\nnode 3 0 1\nnode 4 1 0\nway 5 1,2,3,4,1\narea bowtie 5\n";
        assert!(matches!(parse_fixture(text), Err(Error::BuildRejected(_))));
    }

    #[test]
    fn area_name_normalization() {
        assert_eq!(normalize_area_name("  New\tYork  City "), "new york city");
        assert_eq!(normalize_area_name("Boston"), "boston");
    }
}
