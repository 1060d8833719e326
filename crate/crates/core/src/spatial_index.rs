//! Spatial retrieval over an immutable [`ObjectStore`].
//!
//! Nodes and way envelopes live in two bulk-loaded (sort-tile-recursive)
//! R-trees. Polygon tests run in exact integer arithmetic on scaled
//! coordinates, treating latitude/longitude as a plane.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geo_model::{
    haversine_distance, BoundingBox, ObjectId, ObjectType, ScaledCoord, EARTH_RADIUS_M, SCALE,
};
use crate::osm_ingest::{normalize_area_name, validate_store, ObjectStore};

const NODE_CAPACITY: usize = 16;

/// A named polygon resolved from the store's area registry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AreaDefinition {
    pub name: String,
    /// Closed ring: first point equals last point.
    pub ring: Vec<ScaledCoord>,
    pub source_way: ObjectId,
}

impl AreaDefinition {
    pub fn contains(&self, p: ScaledCoord) -> bool {
        point_in_polygon(p, &self.ring)
    }

    pub fn envelope(&self) -> BoundingBox {
        BoundingBox::enclosing(self.ring.iter().copied()).expect("ring is non-empty")
    }
}

#[derive(Debug, Clone)]
struct Entry<T> {
    rect: BoundingBox,
    item: T,
}

#[derive(Debug, Clone)]
enum Children {
    Leaves(std::ops::Range<usize>),
    Nodes(std::ops::Range<usize>),
}

#[derive(Debug, Clone)]
struct TreeNode {
    rect: BoundingBox,
    children: Children,
}

/// Static R-tree packed with the sort-tile-recursive method.
#[derive(Debug, Clone)]
pub struct RTree<T> {
    entries: Vec<Entry<T>>,
    nodes: Vec<TreeNode>,
    root: Option<usize>,
}

impl<T: Copy> RTree<T> {
    pub fn bulk_load(items: Vec<(BoundingBox, T)>) -> Self {
        let mut entries: Vec<Entry<T>> =
            items.into_iter().map(|(rect, item)| Entry { rect, item }).collect();
        let mut nodes = Vec::new();
        if entries.is_empty() {
            return RTree { entries, nodes, root: None };
        }

        str_sort(&mut entries, |e| e.rect);
        let mut level: Vec<usize> = entries
            .chunks(NODE_CAPACITY)
            .enumerate()
            .map(|(i, chunk)| {
                let start = i * NODE_CAPACITY;
                nodes.push(TreeNode {
                    rect: union(chunk.iter().map(|e| e.rect)),
                    children: Children::Leaves(start..start + chunk.len()),
                });
                nodes.len() - 1
            })
            .collect();

        while level.len() > 1 {
            // Re-pack the current level so that siblings are contiguous.
            let mut packed: Vec<TreeNode> = level.iter().map(|&i| nodes[i].clone()).collect();
            str_sort(&mut packed, |n| n.rect);
            let base = nodes.len();
            nodes.extend(packed);
            let count = level.len();
            level = (0..count)
                .step_by(NODE_CAPACITY)
                .map(|start| {
                    let end = (start + NODE_CAPACITY).min(count);
                    let range = base + start..base + end;
                    nodes.push(TreeNode {
                        rect: union(nodes[range.clone()].iter().map(|n| n.rect)),
                        children: Children::Nodes(range),
                    });
                    nodes.len() - 1
                })
                .collect();
        }
        RTree { entries, nodes, root: level.first().copied() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BoundingBox, &T)> {
        self.entries.iter().map(|e| (&e.rect, &e.item))
    }

    /// Items whose rectangle intersects `query` (edges inclusive).
    pub fn query_intersecting(&self, query: &BoundingBox) -> Vec<T> {
        let mut out = Vec::new();
        let Some(root) = self.root else {
            return out;
        };
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            if !node.rect.intersects(query) {
                continue;
            }
            match &node.children {
                Children::Leaves(r) => out.extend(
                    self.entries[r.clone()].iter().filter(|e| e.rect.intersects(query)).map(|e| e.item),
                ),
                Children::Nodes(r) => stack.extend(r.clone()),
            }
        }
        out
    }

    /// Best-first traversal yielding items in ascending order of
    /// `distance(item)`, pruned with `lower_bound(rect)`. Stops once
    /// `visit` returns `false`.
    fn best_first(
        &self,
        lower_bound: impl Fn(&BoundingBox) -> f64,
        distance: impl Fn(&BoundingBox, T) -> f64,
        mut visit: impl FnMut(f64, T) -> bool,
    ) {
        let Some(root) = self.root else {
            return;
        };
        let mut heap = BinaryHeap::new();
        heap.push(Candidate { key: lower_bound(&self.nodes[root].rect), slot: Slot::Node(root) });
        while let Some(Candidate { key, slot }) = heap.pop() {
            match slot {
                Slot::Item(i) => {
                    if !visit(key, self.entries[i].item) {
                        return;
                    }
                }
                Slot::Node(n) => match &self.nodes[n].children {
                    Children::Leaves(r) => {
                        for i in r.clone() {
                            let e = &self.entries[i];
                            heap.push(Candidate { key: distance(&e.rect, e.item), slot: Slot::Item(i) });
                        }
                    }
                    Children::Nodes(r) => {
                        for c in r.clone() {
                            heap.push(Candidate { key: lower_bound(&self.nodes[c].rect), slot: Slot::Node(c) });
                        }
                    }
                },
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Node(usize),
    Item(usize),
}

#[derive(Debug)]
struct Candidate {
    key: f64,
    slot: Slot,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    // Reversed for a min-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.total_cmp(&self.key)
    }
}

fn union(rects: impl Iterator<Item = BoundingBox>) -> BoundingBox {
    rects
        .reduce(|a, b| BoundingBox {
            south: a.south.min(b.south),
            west: a.west.min(b.west),
            north: a.north.max(b.north),
            east: a.east.max(b.east),
        })
        .expect("non-empty group")
}

fn str_sort<E>(items: &mut [E], rect: impl Fn(&E) -> BoundingBox) {
    let center_lon = |r: BoundingBox| r.west / 2 + r.east / 2;
    let center_lat = |r: BoundingBox| r.south / 2 + r.north / 2;
    let leaves = items.len().div_ceil(NODE_CAPACITY);
    let slices = (leaves as f64).sqrt().ceil().max(1.0) as usize;
    let per_slice = slices * NODE_CAPACITY;
    items.sort_by_key(|e| center_lon(rect(e)));
    for slice in items.chunks_mut(per_slice) {
        slice.sort_by_key(|e| center_lat(rect(e)));
    }
}

/// Immutable index over a validated store.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    store: ObjectStore,
    node_tree: RTree<ObjectId>,
    way_tree: RTree<ObjectId>,
}

/// Builds the node and way trees. Rejects stores with any validation
/// violation.
pub fn build_index(store: ObjectStore) -> Result<SpatialIndex> {
    let violations = validate_store(&store);
    if !violations.is_empty() {
        return Err(Error::BuildRejected(violations));
    }
    let node_tree = RTree::bulk_load(
        store.nodes().map(|n| (point_rect(n.coord), n.id)).collect(),
    );
    let way_tree = RTree::bulk_load(
        store
            .ways()
            .map(|w| {
                let coords = store.way_coords(w).expect("validated store");
                (BoundingBox::enclosing(coords).expect("way has nodes"), w.id)
            })
            .collect(),
    );
    Ok(SpatialIndex { store, node_tree, way_tree })
}

fn point_rect(c: ScaledCoord) -> BoundingBox {
    BoundingBox { south: c.lat, west: c.lon, north: c.lat, east: c.lon }
}

impl SpatialIndex {
    pub fn store(&self) -> &ObjectStore {
        &self.store
    }

    pub fn node_tree(&self) -> &RTree<ObjectId> {
        &self.node_tree
    }

    pub fn way_tree(&self) -> &RTree<ObjectId> {
        &self.way_tree
    }

    /// Node ids inside `bb`, ascending.
    pub fn query_nodes_in_bbox(&self, bb: &BoundingBox) -> Vec<ObjectId> {
        let mut ids = self.node_tree.query_intersecting(bb);
        ids.sort_unstable();
        ids
    }

    /// Way ids with at least one member node inside `bb`, ascending.
    pub fn query_ways_in_bbox(&self, bb: &BoundingBox) -> Vec<ObjectId> {
        let mut ids: Vec<ObjectId> = self
            .way_tree
            .query_intersecting(bb)
            .into_iter()
            .filter(|&id| self.way_has_node_where(id, |c| bb.contains(c)))
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Node ids inside the area polygon (boundary inclusive), ascending.
    pub fn query_nodes_in_area(&self, area: &AreaDefinition) -> Vec<ObjectId> {
        let mut ids: Vec<ObjectId> = self
            .node_tree
            .query_intersecting(&area.envelope())
            .into_iter()
            .filter(|&id| area.contains(self.store.node(id).expect("indexed node").coord))
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Way ids with at least one member node inside the area, ascending.
    pub fn query_ways_in_area(&self, area: &AreaDefinition) -> Vec<ObjectId> {
        let env = area.envelope();
        let mut ids: Vec<ObjectId> = self
            .way_tree
            .query_intersecting(&env)
            .into_iter()
            .filter(|&id| self.way_has_node_where(id, |c| env.contains(c) && area.contains(c)))
            .collect();
        ids.sort_unstable();
        ids
    }

    fn way_has_node_where(&self, id: ObjectId, pred: impl Fn(ScaledCoord) -> bool) -> bool {
        let way = self.store.way(id).expect("indexed way");
        way.node_refs.iter().any(|r| pred(self.store.node(*r).expect("validated ref").coord))
    }

    /// Looks up a named area. Names are compared after normalization.
    pub fn resolve_named_area(&self, name: &str) -> Result<AreaDefinition> {
        let key = normalize_area_name(name);
        let ways = self
            .store
            .area_ways(&key)
            .filter(|w| !w.is_empty())
            .ok_or_else(|| Error::AreaNotFound(name.to_owned()))?;
        if ways.len() > 1 {
            return Err(Error::AmbiguousArea { name: key, candidates: ways.iter().copied().collect() });
        }
        let way_id = *ways.first().expect("non-empty");
        let way = self.store.way(way_id).expect("validated area way");
        Ok(AreaDefinition {
            name: key,
            ring: self.store.way_coords(way).expect("validated area refs"),
            source_way: way_id,
        })
    }

    /// Object closest to `p` by haversine distance; ways measure to their
    /// nearest member node. Ties go to the smaller (type code, id).
    ///
    /// Every way's distance is that of one of its member nodes, and nodes
    /// have the smaller type code, so the winner is always the nearest node.
    pub fn nearest_object(&self, p: ScaledCoord) -> Result<(ObjectType, ObjectId, f64)> {
        let mut best: Option<(f64, ObjectId)> = None;
        self.node_tree.best_first(
            |rect| rect_lower_bound(p, rect),
            |rect, _| haversine_distance(p, ScaledCoord { lat: rect.south, lon: rect.west }),
            |d, id| match best {
                None => {
                    best = Some((d, id));
                    true
                }
                Some((bd, bid)) => {
                    if d == bd && id < bid {
                        best = Some((d, id));
                    }
                    // Items arrive in ascending distance; keep draining exact ties.
                    d <= bd
                }
            },
        );
        let (d, id) = best.ok_or(Error::NoObjects)?;
        Ok((ObjectType::Node, id, d))
    }
}

/// Lower bound on the haversine distance from `p` to any point of `rect`.
///
/// The haversine term sin²(Δφ/2) + cos φ₁ cos φ₂ sin²(Δλ/2) is bounded below
/// by minimizing each summand independently over the rectangle.
fn rect_lower_bound(p: ScaledCoord, rect: &BoundingBox) -> f64 {
    let to_rad = std::f64::consts::PI / (180.0 * SCALE as f64);
    let dlat_units = if p.lat < rect.south {
        rect.south - p.lat
    } else if p.lat > rect.north {
        p.lat - rect.north
    } else {
        0
    };
    let circular = |a: i64, b: i64| {
        let d = (a - b).abs();
        d.min(360 * SCALE - d)
    };
    let dlon_units = if rect.west <= p.lon && p.lon <= rect.east {
        0
    } else {
        circular(p.lon, rect.west).min(circular(p.lon, rect.east))
    };
    let lat1 = p.lat as f64 * to_rad;
    let cos_min = (rect.south as f64 * to_rad).cos().min((rect.north as f64 * to_rad).cos()).max(0.0);
    let dlat = dlat_units as f64 * to_rad;
    let dlon = dlon_units as f64 * to_rad;
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * cos_min * (dlon / 2.0).sin().powi(2);
    let bound = 2.0 * EARTH_RADIUS_M * h.min(1.0).sqrt().asin();
    // Slack for rounding so exact ties are never pruned.
    (bound * (1.0 - 1e-9) - 1e-6).max(0.0)
}

fn orient(a: ScaledCoord, b: ScaledCoord, c: ScaledCoord) -> i128 {
    let (ax, ay) = (i128::from(a.lon), i128::from(a.lat));
    let (bx, by) = (i128::from(b.lon), i128::from(b.lat));
    let (cx, cy) = (i128::from(c.lon), i128::from(c.lat));
    (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
}

fn on_segment(p: ScaledCoord, a: ScaledCoord, b: ScaledCoord) -> bool {
    orient(a, b, p) == 0
        && a.lat.min(b.lat) <= p.lat
        && p.lat <= a.lat.max(b.lat)
        && a.lon.min(b.lon) <= p.lon
        && p.lon <= a.lon.max(b.lon)
}

/// Even-odd point-in-polygon test on a closed ring; points on the boundary
/// count as inside.
pub fn point_in_polygon(p: ScaledCoord, ring: &[ScaledCoord]) -> bool {
    let mut inside = false;
    for edge in ring.windows(2) {
        let (a, b) = (edge[0], edge[1]);
        if on_segment(p, a, b) {
            return true;
        }
        // Half-open rule on latitude so each crossing is counted once.
        if (a.lat > p.lat) != (b.lat > p.lat) {
            let o = orient(a, b, p);
            // Crossing is east of p iff p lies left of an upward edge (or
            // right of a downward one).
            if (o > 0) == (b.lat > a.lat) {
                inside = !inside;
            }
        }
    }
    inside
}

fn segments_intersect(a: ScaledCoord, b: ScaledCoord, c: ScaledCoord, d: ScaledCoord) -> bool {
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    if o1.signum() * o2.signum() < 0 && o3.signum() * o4.signum() < 0 {
        return true;
    }
    on_segment(c, a, b) || on_segment(d, a, b) || on_segment(a, c, d) || on_segment(b, c, d)
}

/// True iff `ring` is closed, has at least three distinct vertices, has no
/// zero-length edges, and no two edges meet except adjacent edges at their
/// shared vertex.
pub fn ring_is_simple(ring: &[ScaledCoord]) -> bool {
    if ring.len() < 4 || ring.first() != ring.last() {
        return false;
    }
    let edges: Vec<(ScaledCoord, ScaledCoord)> = ring.windows(2).map(|w| (w[0], w[1])).collect();
    if edges.iter().any(|(a, b)| a == b) {
        return false;
    }
    let n = edges.len();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = edges[i];
            let (c, d) = edges[j];
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Shared vertex is b == c (or d == a for the wrap pair). They
                // may touch only there: reject a fold-back along one line.
                let (shared, p, q) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                if orient(p, shared, q) == 0 && on_segment(q, p, shared) || on_segment(p, shared, q) {
                    return false;
                }
            } else if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}
