//! The location query functions: tag-filtered search and counts over named
//! areas and bounding boxes, tag lookup, and way geometry.
//!
//! Results are always ascending object ids; a `limit` keeps the smallest
//! `limit` ids of the full match set.

use crate::error::{Error, Result};
use crate::geo_model::{BoundingBox, ObjectId, ObjectType, ScaledCoord, TagMap};
use crate::spatial_index::{AreaDefinition, SpatialIndex};

/// Exact `key = value` tag predicate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TagFilter {
    key: String,
    value: String,
}

impl TagFilter {
    pub fn new(key: impl Into<String>, value: impl Into<String>) -> Result<Self> {
        let key = key.into();
        if key.is_empty() {
            return Err(Error::bad_request("key", "tag key must not be empty"));
        }
        Ok(TagFilter { key, value: value.into() })
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn value(&self) -> &str {
        &self.value
    }

    pub fn matches(&self, tags: &TagMap) -> bool {
        tags.matches(&self.key, &self.value)
    }
}

/// Ascending, duplicate-free object ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryResult {
    pub ids: Vec<ObjectId>,
}

impl QueryResult {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn as_i64(&self) -> Vec<i64> {
        self.ids.iter().map(|id| id.get() as i64).collect()
    }
}

/// How spatial candidates are gathered.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Strategy {
    #[default]
    Indexed,
    /// Linear scan over the whole store; kept for comparison runs.
    BruteForce,
}

#[derive(Debug, Clone)]
pub struct QueryEngine {
    index: SpatialIndex,
    strategy: Strategy,
}

fn check_limit(limit: u64) -> Result<usize> {
    if limit < 1 {
        return Err(Error::InvalidLimit("limit must be at least 1".into()));
    }
    Ok(usize::try_from(limit).unwrap_or(usize::MAX))
}

impl QueryEngine {
    pub fn new(index: SpatialIndex) -> Self {
        QueryEngine { index, strategy: Strategy::Indexed }
    }

    pub fn with_strategy(index: SpatialIndex, strategy: Strategy) -> Self {
        QueryEngine { index, strategy }
    }

    pub fn index(&self) -> &SpatialIndex {
        &self.index
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    fn tags_of(&self, t: ObjectType, id: ObjectId) -> &TagMap {
        let store = self.index.store();
        match t {
            ObjectType::Node => &store.node(id).expect("candidate node").tags,
            ObjectType::Way => &store.way(id).expect("candidate way").tags,
        }
    }

    fn filter_tags(&self, t: ObjectType, f: &TagFilter, ids: Vec<ObjectId>) -> Vec<ObjectId> {
        ids.into_iter().filter(|&id| f.matches(self.tags_of(t, id))).collect()
    }

    /// Every object of type `t` inside `region` whose tags match `f`,
    /// ascending.
    fn scan(&self, t: ObjectType, f: &TagFilter, inside: impl Fn(ScaledCoord) -> bool) -> Vec<ObjectId> {
        let store = self.index.store();
        match t {
            ObjectType::Node => store
                .nodes()
                .filter(|n| f.matches(&n.tags) && inside(n.coord))
                .map(|n| n.id)
                .collect(),
            ObjectType::Way => store
                .ways()
                .filter(|w| {
                    f.matches(&w.tags)
                        && w.node_refs.iter().any(|r| inside(store.node(*r).expect("validated").coord))
                })
                .map(|w| w.id)
                .collect(),
        }
    }

    /// Full match set for an area query.
    pub fn matches_in_area(&self, t: ObjectType, f: &TagFilter, area: &str) -> Result<Vec<ObjectId>> {
        let area = self.index.resolve_named_area(area)?;
        Ok(self.matches_in_polygon(t, f, &area))
    }

    fn matches_in_polygon(&self, t: ObjectType, f: &TagFilter, area: &AreaDefinition) -> Vec<ObjectId> {
        match self.strategy {
            Strategy::BruteForce => self.scan(t, f, |c| area.contains(c)),
            Strategy::Indexed => {
                let spatial = match t {
                    ObjectType::Node => self.index.query_nodes_in_area(area),
                    ObjectType::Way => self.index.query_ways_in_area(area),
                };
                self.filter_tags(t, f, spatial)
            }
        }
    }

    /// Full match set for a bounding-box query.
    pub fn matches_in_bbox(&self, t: ObjectType, f: &TagFilter, bb: &BoundingBox) -> Result<Vec<ObjectId>> {
        bb.validate()?;
        Ok(match self.strategy {
            Strategy::BruteForce => self.scan(t, f, |c| bb.contains(c)),
            Strategy::Indexed => {
                let spatial = match t {
                    ObjectType::Node => self.index.query_nodes_in_bbox(bb),
                    ObjectType::Way => self.index.query_ways_in_bbox(bb),
                };
                self.filter_tags(t, f, spatial)
            }
        })
    }

    pub fn objects_in_area(&self, t: ObjectType, f: &TagFilter, area: &str, limit: u64) -> Result<QueryResult> {
        let limit = check_limit(limit)?;
        let mut ids = self.matches_in_area(t, f, area)?;
        ids.truncate(limit);
        Ok(QueryResult { ids })
    }

    pub fn object_count_in_area(&self, t: ObjectType, f: &TagFilter, area: &str) -> Result<u64> {
        Ok(self.matches_in_area(t, f, area)?.len() as u64)
    }

    pub fn objects_in_bbox(&self, t: ObjectType, f: &TagFilter, bb: &BoundingBox, limit: u64) -> Result<QueryResult> {
        // Box errors take precedence over limit errors.
        bb.validate()?;
        let limit = check_limit(limit)?;
        let mut ids = self.matches_in_bbox(t, f, bb)?;
        ids.truncate(limit);
        Ok(QueryResult { ids })
    }

    pub fn object_count_in_bbox(&self, t: ObjectType, f: &TagFilter, bb: &BoundingBox) -> Result<u64> {
        Ok(self.matches_in_bbox(t, f, bb)?.len() as u64)
    }

    /// Tag values for `keys` in order; absent keys yield `""`.
    pub fn object_tag_query(&self, t: ObjectType, id: u64, keys: &[String]) -> Result<Vec<String>> {
        let not_found = || Error::ObjectNotFound { kind: t, id };
        let oid = ObjectId::new(id).ok_or_else(not_found)?;
        let store = self.index.store();
        let tags = match t {
            ObjectType::Node => store.node(oid).map(|n| &n.tags),
            ObjectType::Way => store.way(oid).map(|w| &w.tags),
        }
        .ok_or_else(not_found)?;
        Ok(keys.iter().map(|k| tags.get(k).unwrap_or("").to_owned()).collect())
    }

    /// Member coordinates in way order, closing node included.
    pub fn way_geometry(&self, id: u64) -> Result<Vec<ScaledCoord>> {
        let store = self.index.store();
        let way = ObjectId::new(id)
            .and_then(|oid| store.way(oid))
            .ok_or(Error::ObjectNotFound { kind: ObjectType::Way, id })?;
        Ok(store.way_coords(way).expect("validated store"))
    }

    pub fn way_node_count(&self, id: u64) -> Result<u64> {
        let store = self.index.store();
        let way = ObjectId::new(id)
            .and_then(|oid| store.way(oid))
            .ok_or(Error::ObjectNotFound { kind: ObjectType::Way, id })?;
        Ok(way.node_refs.len() as u64)
    }
}
