#![allow(dead_code)]

pub mod abi;

use std::collections::BTreeSet;
use std::path::PathBuf;

use geo_oracle_core::geo_model::{BoundingBox, Node, ObjectId, ObjectType, ScaledCoord, TagMap, Way};
use geo_oracle_core::osm_ingest::ObjectStore;
use geo_oracle_core::spatial_index::ring_is_simple;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub const TAG_KEYS: [&str; 3] = ["amenity", "shop", "highway"];
pub const TAG_VALUES: [&str; 4] = ["cafe", "pub", "bakery", "residential"];

fn random_tags<R: Rng>(rng: &mut R) -> TagMap {
    let mut tags = TagMap::new();
    for key in TAG_KEYS {
        if rng.gen_bool(0.4) {
            tags.insert(key, *TAG_VALUES.choose(rng).unwrap()).unwrap();
        }
    }
    tags
}

pub struct World {
    pub store: ObjectStore,
    /// Window the objects were scattered over.
    pub window: BoundingBox,
    pub area_names: Vec<String>,
}

/// Random store: `nodes` nodes scattered over a window (with some repeated
/// coordinates), `ways` ways over them, and up to `areas` star-shaped
/// named area polygons tagged as boundaries.
pub fn random_world<R: Rng>(rng: &mut R, nodes: usize, ways: usize, areas: usize) -> World {
    let span: i64 = *[1_000_i64, 100_000, 10_000_000, 1_000_000_000].choose(rng).unwrap();
    random_world_spanning(rng, nodes, ways, areas, span)
}

/// [`random_world`] over a square window `span` scaled units wide.
pub fn random_world_spanning<R: Rng>(rng: &mut R, nodes: usize, ways: usize, areas: usize, span: i64) -> World {
    let lat0 = rng.gen_range(-8_000_000_000..=8_000_000_000 - span);
    let lon0 = rng.gen_range(-17_000_000_000..=17_000_000_000 - span);
    let window = BoundingBox { south: lat0, west: lon0, north: lat0 + span, east: lon0 + span };

    let mut ids = BTreeSet::new();
    while ids.len() < nodes + ways {
        let id = if rng.gen_bool(0.1) { rng.gen_range(1..=i64::MAX as u64) } else { rng.gen_range(1..=(nodes as u64 * 4 + 16)) };
        ids.insert(id);
    }
    let mut ids: Vec<u64> = ids.into_iter().collect();
    ids.shuffle(rng);

    let mut store = ObjectStore::new();
    let mut coords: Vec<ScaledCoord> = Vec::new();
    let mut node_ids = Vec::new();
    for &id in &ids[..nodes] {
        let coord = if !coords.is_empty() && rng.gen_bool(0.05) {
            *coords.choose(rng).unwrap()
        } else {
            ScaledCoord { lat: rng.gen_range(lat0..=lat0 + span), lon: rng.gen_range(lon0..=lon0 + span) }
        };
        coords.push(coord);
        let id = ObjectId::new(id).unwrap();
        node_ids.push(id);
        store.insert_node(Node { id, coord, tags: random_tags(rng) }).unwrap();
    }
    // Most ways stay within one cell of a 32x32 grid, like real streets and
    // buildings; the rest connect arbitrary nodes.
    let cell = |c: ScaledCoord| ((c.lat - lat0) * 32 / (span + 1), (c.lon - lon0) * 32 / (span + 1));
    let mut cells: std::collections::HashMap<(i64, i64), Vec<ObjectId>> = Default::default();
    for (id, c) in node_ids.iter().zip(&coords) {
        cells.entry(cell(*c)).or_default().push(*id);
    }
    for &id in &ids[nodes..] {
        let n = rng.gen_range(2..=8);
        let pool = if rng.gen_bool(0.98) { &cells[&cell(*coords.choose(rng).unwrap())] } else { &node_ids };
        let mut refs: Vec<ObjectId> = (0..n).map(|_| *pool.choose(rng).unwrap()).collect();
        if rng.gen_bool(0.3) {
            refs.push(refs[0]);
        }
        store
            .insert_way(Way { id: ObjectId::new(id).unwrap(), node_refs: refs, tags: random_tags(rng) })
            .unwrap();
    }

    let mut area_names = Vec::new();
    let mut next_id = u64::MAX / 2;
    for a in 0..areas {
        let cx = rng.gen_range(lat0..=lat0 + span);
        let cy = rng.gen_range(lon0..=lon0 + span);
        let k = rng.gen_range(3..=9);
        let mut angles: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let ring: Vec<ScaledCoord> = angles
            .iter()
            .map(|t| {
                let r = rng.gen_range(0.1..0.7) * span as f64;
                ScaledCoord {
                    lat: (cx as f64 + r * t.sin()).round().clamp(-9e9, 9e9) as i64,
                    lon: (cy as f64 + r * t.cos()).round().clamp(-18e9, 18e9) as i64,
                }
            })
            .collect();
        let mut closed = ring.clone();
        closed.push(ring[0]);
        if !ring_is_simple(&closed) {
            continue;
        }
        let mut refs = Vec::new();
        for c in &ring {
            next_id += 1;
            let id = ObjectId::new(next_id).unwrap();
            store.insert_node(Node { id, coord: *c, tags: random_tags(rng) }).unwrap();
            refs.push(id);
        }
        refs.push(refs[0]);
        next_id += 1;
        let way_id = ObjectId::new(next_id).unwrap();
        let name = format!("Area {a}");
        let tags: TagMap = [("boundary", "administrative"), ("name", name.as_str())].into_iter().collect();
        store.insert_way(Way { id: way_id, node_refs: refs, tags }).unwrap();
        store.add_area(&name, way_id);
        area_names.push(name);
    }
    World { store, window, area_names }
}

/// A random box overlapping the window, sometimes degenerate, sometimes
/// snapped to an existing coordinate so boundaries get exercised.
pub fn random_bbox<R: Rng>(rng: &mut R, w: &World) -> BoundingBox {
    let BoundingBox { south, west, north, east } = w.window;
    let pick = |rng: &mut R, lo: i64, hi: i64| rng.gen_range(lo..=hi);
    let (mut s, mut n) = (pick(rng, south, north), pick(rng, south, north));
    let (mut we, mut e) = (pick(rng, west, east), pick(rng, west, east));
    if rng.gen_bool(0.3) && w.store.node_count() > 0 {
        let nodes: Vec<_> = w.store.nodes().collect();
        let c = nodes.choose(rng).unwrap().coord;
        s = c.lat;
        we = c.lon;
    }
    if s > n {
        std::mem::swap(&mut s, &mut n);
    }
    if we > e {
        std::mem::swap(&mut we, &mut e);
    }
    BoundingBox { south: s, west: we, north: n, east: e }
}

// ---------------------------------------------------------------------------
// Linear-scan reference, written independently of the library's geometry.

fn on_segment(p: ScaledCoord, a: ScaledCoord, b: ScaledCoord) -> bool {
    let cross = i128::from(b.lon - a.lon) * i128::from(p.lat - a.lat)
        - i128::from(b.lat - a.lat) * i128::from(p.lon - a.lon);
    cross == 0
        && p.lat >= a.lat.min(b.lat)
        && p.lat <= a.lat.max(b.lat)
        && p.lon >= a.lon.min(b.lon)
        && p.lon <= a.lon.max(b.lon)
}

/// Crossing-number test with the boundary counted as inside.
pub fn ref_inside(p: ScaledCoord, ring: &[ScaledCoord]) -> bool {
    let n = ring.len();
    if ring.windows(2).any(|e| on_segment(p, e[0], e[1])) || on_segment(p, ring[n - 1], ring[0]) {
        return true;
    }
    let mut inside = false;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        if (a.lat > p.lat) != (b.lat > p.lat) {
            // x-coordinate of the crossing compared with p.lon, exactly:
            // p.lon < a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat)
            let dy = i128::from(b.lat - a.lat);
            let lhs = i128::from(p.lon - a.lon) * dy;
            let rhs = i128::from(p.lat - a.lat) * i128::from(b.lon - a.lon);
            if (dy > 0 && lhs < rhs) || (dy < 0 && lhs > rhs) {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn ref_in_bbox(p: ScaledCoord, bb: &BoundingBox) -> bool {
    bb.south <= p.lat && p.lat <= bb.north && bb.west <= p.lon && p.lon <= bb.east
}

/// Ascending ids of objects of type `t` tagged `key=value` with a location
/// satisfying `inside` (any member node, for ways).
pub fn ref_scan(
    store: &ObjectStore,
    t: ObjectType,
    key: &str,
    value: &str,
    inside: impl Fn(ScaledCoord) -> bool,
) -> Vec<ObjectId> {
    let mut out = Vec::new();
    match t {
        ObjectType::Node => {
            for n in store.nodes() {
                if n.tags.get(key) == Some(value) && inside(n.coord) {
                    out.push(n.id);
                }
            }
        }
        ObjectType::Way => {
            for w in store.ways() {
                if w.tags.get(key) == Some(value) && w.node_refs.iter().any(|r| inside(store.node(*r).unwrap().coord)) {
                    out.push(w.id);
                }
            }
        }
    }
    out.sort();
    out
}

pub fn area_ring(store: &ObjectStore, name: &str) -> Vec<ScaledCoord> {
    let key = geo_oracle_core::osm_ingest::normalize_area_name(name);
    let way = store.way(*store.area_ways(&key).unwrap().iter().next().unwrap()).unwrap();
    way.node_refs.iter().map(|r| store.node(*r).unwrap().coord).collect()
}
