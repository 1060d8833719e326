//! Oracle adapter: request documents in, ABI payloads out.
//!
//! A request is a flat JSON object whose `function` field names one of the
//! fourteen query functions; the remaining fields are exactly that
//! function's parameters. Integer parameters accept JSON integers or
//! decimal strings; floats are rejected. Responses are JSON objects
//! `{"payload_hex", "estimated_gas", "match_count"?}` or
//! `{"error": {"code", "message"}}`.

use std::fmt;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::abi_codec::{
    encode_coord_pairs, encode_geocode, encode_int64, encode_int64_array, encode_reverse,
    encode_string_array, AbiPayload, Layout,
};
use crate::error::{Error, Result};
use crate::geo_model::{BoundingBox, ObjectType};
use crate::geocoder::{reverse_geocode, Geocoder};
use crate::query_engine::{QueryEngine, TagFilter};
use crate::spatial_index::SpatialIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Function {
    NodesInArea,
    WaysInArea,
    NodeCountInArea,
    WayCountInArea,
    NodesInBB,
    WaysInBB,
    NodeCountInBB,
    WayCountInBB,
    NodeTagQuery,
    WayTagQuery,
    WayGeometry,
    WayCount,
    Geocode,
    ReverseGeocode,
}

const AREA_SEARCH: &[&str] = &["key", "value", "area", "limit"];
const AREA_COUNT: &[&str] = &["key", "value", "area"];
const BB_SEARCH: &[&str] = &["key", "value", "south", "west", "north", "east", "limit"];
const BB_COUNT: &[&str] = &["key", "value", "south", "west", "north", "east"];

impl Function {
    pub const ALL: [Function; 14] = [
        Function::NodesInArea,
        Function::WaysInArea,
        Function::NodeCountInArea,
        Function::WayCountInArea,
        Function::NodesInBB,
        Function::WaysInBB,
        Function::NodeCountInBB,
        Function::WayCountInBB,
        Function::NodeTagQuery,
        Function::WayTagQuery,
        Function::WayGeometry,
        Function::WayCount,
        Function::Geocode,
        Function::ReverseGeocode,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::NodesInArea => "nodesInArea",
            Function::WaysInArea => "waysInArea",
            Function::NodeCountInArea => "nodeCountInArea",
            Function::WayCountInArea => "wayCountInArea",
            Function::NodesInBB => "nodesInBB",
            Function::WaysInBB => "waysInBB",
            Function::NodeCountInBB => "nodeCountInBB",
            Function::WayCountInBB => "wayCountInBB",
            Function::NodeTagQuery => "nodeTagQuery",
            Function::WayTagQuery => "wayTagQuery",
            Function::WayGeometry => "wayGeometry",
            Function::WayCount => "wayCount",
            Function::Geocode => "geocode",
            Function::ReverseGeocode => "reverseGeocode",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Parameter names, excluding `function`.
    pub fn fields(self) -> &'static [&'static str] {
        use Function::*;
        match self {
            NodesInArea | WaysInArea => AREA_SEARCH,
            NodeCountInArea | WayCountInArea => AREA_COUNT,
            NodesInBB | WaysInBB => BB_SEARCH,
            NodeCountInBB | WayCountInBB => BB_COUNT,
            NodeTagQuery | WayTagQuery => &["ID", "tags"],
            WayGeometry | WayCount => &["ID"],
            Geocode => &["address"],
            ReverseGeocode => &["lat", "lon"],
        }
    }

    /// Layout of the success payload.
    pub fn layout(self) -> Layout {
        use Function::*;
        match self {
            NodesInArea | WaysInArea | NodesInBB | WaysInBB => Layout::Int64Array,
            NodeCountInArea | WayCountInArea | NodeCountInBB | WayCountInBB | WayCount => Layout::Int64Scalar,
            NodeTagQuery | WayTagQuery => Layout::StringArray,
            WayGeometry => Layout::CoordPairList,
            Geocode => Layout::GeocodeTuple,
            ReverseGeocode => Layout::ReverseTuple,
        }
    }

    fn object_type(self) -> ObjectType {
        use Function::*;
        match self {
            NodesInArea | NodeCountInArea | NodesInBB | NodeCountInBB | NodeTagQuery => ObjectType::Node,
            _ => ObjectType::Way,
        }
    }
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Spatial scope of a search or count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Region {
    Area(String),
    /// Unvalidated; checked at dispatch.
    BBox(BoundingBox),
}

/// A parsed, field-checked request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleRequest {
    Search { object_type: ObjectType, filter: TagFilter, region: Region, limit: i64 },
    Count { object_type: ObjectType, filter: TagFilter, region: Region },
    TagQuery { object_type: ObjectType, id: u64, keys: Vec<String> },
    WayGeometry { id: u64 },
    WayCount { id: u64 },
    Geocode { address: String },
    ReverseGeocode { lat: i64, lon: i64 },
}

impl OracleRequest {
    pub fn function(&self) -> Function {
        use Function::*;
        match self {
            OracleRequest::Search { object_type, region, .. } => match (object_type, region) {
                (ObjectType::Node, Region::Area(_)) => NodesInArea,
                (ObjectType::Way, Region::Area(_)) => WaysInArea,
                (ObjectType::Node, Region::BBox(_)) => NodesInBB,
                (ObjectType::Way, Region::BBox(_)) => WaysInBB,
            },
            OracleRequest::Count { object_type, region, .. } => match (object_type, region) {
                (ObjectType::Node, Region::Area(_)) => NodeCountInArea,
                (ObjectType::Way, Region::Area(_)) => WayCountInArea,
                (ObjectType::Node, Region::BBox(_)) => NodeCountInBB,
                (ObjectType::Way, Region::BBox(_)) => WayCountInBB,
            },
            OracleRequest::TagQuery { object_type: ObjectType::Node, .. } => NodeTagQuery,
            OracleRequest::TagQuery { object_type: ObjectType::Way, .. } => WayTagQuery,
            OracleRequest::WayGeometry { .. } => WayGeometry,
            OracleRequest::WayCount { .. } => WayCount,
            OracleRequest::Geocode { .. } => Geocode,
            OracleRequest::ReverseGeocode { .. } => ReverseGeocode,
        }
    }
}

fn int_field(obj: &Map<String, Value>, field: &str) -> Result<i64> {
    let bad = || Error::bad_request(field, "expected an integer (number or decimal string)");
    match &obj[field] {
        Value::Number(n) => n.as_i64().ok_or_else(bad),
        Value::String(s) => {
            let digits = s.strip_prefix('-').unwrap_or(s);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            s.parse().map_err(|_| bad())
        }
        _ => Err(bad()),
    }
}

fn id_field(obj: &Map<String, Value>, field: &str) -> Result<u64> {
    let bad = || Error::bad_request(field, "expected a non-negative integer id");
    match &obj[field] {
        Value::Number(n) => n.as_u64().ok_or_else(bad),
        Value::String(s) if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) => s.parse().map_err(|_| bad()),
        _ => Err(bad()),
    }
}

fn str_field(obj: &Map<String, Value>, field: &str) -> Result<String> {
    obj[field].as_str().map(str::to_owned).ok_or_else(|| Error::bad_request(field, "expected a string"))
}

/// Parses and field-checks a request document.
pub fn parse_request(document: &[u8]) -> Result<OracleRequest> {
    let value: Value = serde_json::from_slice(document)
        .map_err(|e| Error::bad_request("", format!("invalid JSON: {e}")))?;
    let Value::Object(obj) = value else {
        return Err(Error::bad_request("", "request must be a JSON object"));
    };
    let name = match obj.get("function") {
        None => return Err(Error::bad_request("function", "missing field")),
        Some(Value::String(s)) => s.as_str(),
        Some(_) => return Err(Error::bad_request("function", "expected a string")),
    };
    let function = Function::from_name(name).ok_or_else(|| Error::UnknownFunction(name.to_owned()))?;
    let fields = function.fields();
    if let Some(missing) = fields.iter().find(|f| !obj.contains_key(**f)) {
        return Err(Error::bad_request(missing, "missing field"));
    }
    if let Some(extra) = obj.keys().find(|k| *k != "function" && !fields.contains(&k.as_str())) {
        return Err(Error::bad_request(extra, "unexpected field"));
    }

    let object_type = function.object_type();
    let filter = || -> Result<TagFilter> { TagFilter::new(str_field(&obj, "key")?, str_field(&obj, "value")?) };
    let bbox = || -> Result<Region> {
        Ok(Region::BBox(BoundingBox {
            south: int_field(&obj, "south")?,
            west: int_field(&obj, "west")?,
            north: int_field(&obj, "north")?,
            east: int_field(&obj, "east")?,
        }))
    };
    use Function::*;
    Ok(match function {
        NodesInArea | WaysInArea => OracleRequest::Search {
            object_type,
            filter: filter()?,
            region: Region::Area(str_field(&obj, "area")?),
            limit: int_field(&obj, "limit")?,
        },
        NodeCountInArea | WayCountInArea => OracleRequest::Count {
            object_type,
            filter: filter()?,
            region: Region::Area(str_field(&obj, "area")?),
        },
        NodesInBB | WaysInBB => OracleRequest::Search {
            object_type,
            filter: filter()?,
            region: bbox()?,
            limit: int_field(&obj, "limit")?,
        },
        NodeCountInBB | WayCountInBB => OracleRequest::Count { object_type, filter: filter()?, region: bbox()? },
        NodeTagQuery | WayTagQuery => {
            let keys = obj["tags"]
                .as_array()
                .and_then(|a| a.iter().map(|v| v.as_str().map(str::to_owned)).collect::<Option<Vec<_>>>())
                .ok_or_else(|| Error::bad_request("tags", "expected an array of strings"))?;
            if keys.is_empty() {
                return Err(Error::bad_request("tags", "at least one key is required"));
            }
            OracleRequest::TagQuery { object_type, id: id_field(&obj, "ID")?, keys }
        }
        WayGeometry => OracleRequest::WayGeometry { id: id_field(&obj, "ID")? },
        WayCount => OracleRequest::WayCount { id: id_field(&obj, "ID")? },
        Geocode => OracleRequest::Geocode { address: str_field(&obj, "address")? },
        ReverseGeocode => OracleRequest::ReverseGeocode { lat: int_field(&obj, "lat")?, lon: int_field(&obj, "lon")? },
    })
}

/// Calldata pricing per byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GasParams {
    pub cost_per_zero_byte: u64,
    pub cost_per_nonzero_byte: u64,
}

impl Default for GasParams {
    fn default() -> Self {
        GasParams { cost_per_zero_byte: 4, cost_per_nonzero_byte: 16 }
    }
}

impl GasParams {
    pub fn new(cost_per_zero_byte: u64, cost_per_nonzero_byte: u64) -> Result<Self> {
        if cost_per_zero_byte == 0 || cost_per_nonzero_byte == 0 {
            return Err(Error::bad_request("gas", "byte costs must be positive"));
        }
        Ok(GasParams { cost_per_zero_byte, cost_per_nonzero_byte })
    }
}

pub fn estimate_gas(payload: &[u8], g: &GasParams) -> u64 {
    payload
        .iter()
        .map(|&b| if b == 0 { g.cost_per_zero_byte } else { g.cost_per_nonzero_byte })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResponse {
    pub payload: AbiPayload,
    pub estimated_gas: u64,
    /// Untruncated match count, for searches and counts.
    pub match_count: Option<u64>,
}

#[derive(Serialize)]
struct SuccessBody<'a> {
    payload_hex: &'a str,
    estimated_gas: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    match_count: Option<u64>,
}

#[derive(Serialize)]
struct ErrorDetail<'a> {
    code: &'a str,
    message: String,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: ErrorDetail<'a>,
}

impl OracleResponse {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&SuccessBody {
            payload_hex: &self.payload.to_hex(),
            estimated_gas: self.estimated_gas,
            match_count: self.match_count,
        })
        .expect("serializable")
    }
}

pub fn error_json(e: &Error) -> String {
    serde_json::to_string(&ErrorBody { error: ErrorDetail { code: e.code(), message: e.to_string() } })
        .expect("serializable")
}

/// Canonical response body for either outcome.
pub fn response_json(r: &Result<OracleResponse>) -> String {
    match r {
        Ok(resp) => resp.to_json(),
        Err(e) => error_json(e),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleConfig {
    pub gas: GasParams,
    /// Largest accepted search `limit`.
    pub max_results: Option<u64>,
}

/// Result of the count-first gas simulation for one request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GasReport {
    pub function: Function,
    /// Total matches (searches/counts) or geometry size (way functions).
    pub count: Option<u64>,
    /// Gas of the count-variant payload.
    pub count_gas: Option<u64>,
    /// Gas of the complete, untruncated result.
    pub full_gas: u64,
    /// `(limit, gas)` for limits 1, 2, 4, ... up to the match count.
    pub by_limit: Vec<(u64, u64)>,
}

/// Immutable query service over a built index.
#[derive(Debug, Clone)]
pub struct Oracle {
    engine: QueryEngine,
    geocoder: Geocoder,
    config: OracleConfig,
}

impl Oracle {
    pub fn new(index: SpatialIndex, config: OracleConfig) -> Self {
        Self::from_engine(QueryEngine::new(index), config)
    }

    pub fn from_engine(engine: QueryEngine, config: OracleConfig) -> Self {
        let geocoder = Geocoder::new(engine.index());
        Oracle { engine, geocoder, config }
    }

    pub fn engine(&self) -> &QueryEngine {
        &self.engine
    }

    pub fn geocoder(&self) -> &Geocoder {
        &self.geocoder
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    fn respond(&self, payload: AbiPayload, match_count: Option<u64>) -> OracleResponse {
        let estimated_gas = estimate_gas(payload.bytes(), &self.config.gas);
        OracleResponse { payload, estimated_gas, match_count }
    }

    fn matches(&self, t: ObjectType, f: &TagFilter, region: &Region) -> Result<Vec<i64>> {
        let ids = match region {
            Region::Area(name) => self.engine.matches_in_area(t, f, name)?,
            Region::BBox(bb) => self.engine.matches_in_bbox(t, f, bb)?,
        };
        Ok(ids.into_iter().map(|id| id.get() as i64).collect())
    }

    fn check_limit(&self, limit: i64, region: &Region) -> Result<usize> {
        if let Region::BBox(bb) = region {
            bb.validate()?;
        }
        if limit < 1 {
            return Err(Error::InvalidLimit(format!("limit {limit} must be at least 1")));
        }
        if let Some(cap) = self.config.max_results {
            if limit as u64 > cap {
                return Err(Error::InvalidLimit(format!("limit {limit} exceeds the server cap of {cap}")));
            }
        }
        Ok(usize::try_from(limit).unwrap_or(usize::MAX))
    }

    pub fn dispatch(&self, req: &OracleRequest) -> Result<OracleResponse> {
        match req {
            OracleRequest::Search { object_type, filter, region, limit } => {
                let limit = self.check_limit(*limit, region)?;
                let all = self.matches(*object_type, filter, region)?;
                let total = all.len() as u64;
                Ok(self.respond(encode_int64_array(&all[..all.len().min(limit)]), Some(total)))
            }
            OracleRequest::Count { object_type, filter, region } => {
                let total = self.matches(*object_type, filter, region)?.len() as u64;
                Ok(self.respond(encode_int64(total as i64), Some(total)))
            }
            OracleRequest::TagQuery { object_type, id, keys } => {
                let values = self.engine.object_tag_query(*object_type, *id, keys)?;
                Ok(self.respond(encode_string_array(&values), None))
            }
            OracleRequest::WayGeometry { id } => {
                let coords = self.engine.way_geometry(*id)?;
                Ok(self.respond(encode_coord_pairs(&coords), None))
            }
            OracleRequest::WayCount { id } => {
                let n = self.engine.way_node_count(*id)?;
                Ok(self.respond(encode_int64(n as i64), None))
            }
            OracleRequest::Geocode { address } => {
                let r = self.geocoder.geocode(address)?;
                Ok(self.respond(encode_geocode(&r)?, None))
            }
            OracleRequest::ReverseGeocode { lat, lon } => {
                let r = reverse_geocode(self.engine.index(), *lat, *lon)?;
                Ok(self.respond(encode_reverse(&r)?, None))
            }
        }
    }

    /// Parses and dispatches a request document.
    pub fn handle(&self, document: &[u8]) -> Result<OracleResponse> {
        self.dispatch(&parse_request(document)?)
    }

    /// Response body bytes for a request document.
    pub fn handle_json(&self, document: &[u8]) -> String {
        response_json(&self.handle(document))
    }

    /// Off-chain gas simulation. Searches and counts report the match count,
    /// the count payload's gas, the full result's gas and the gas at every
    /// power-of-two limit up to the count. Way geometry reports the
    /// `wayCount` payload as its count variant; other functions report just
    /// their own payload.
    pub fn simulate_gas(&self, req: &OracleRequest) -> Result<GasReport> {
        let gas = |p: &AbiPayload| estimate_gas(p.bytes(), &self.config.gas);
        let function = req.function();
        match req {
            OracleRequest::Search { object_type, filter, region, .. }
            | OracleRequest::Count { object_type, filter, region } => {
                let all = self.matches(*object_type, filter, region)?;
                let count = all.len() as u64;
                let by_limit = std::iter::successors(Some(1usize), |l| l.checked_mul(2))
                    .take_while(|&l| l <= all.len())
                    .map(|l| (l as u64, gas(&encode_int64_array(&all[..l]))))
                    .collect();
                Ok(GasReport {
                    function,
                    count: Some(count),
                    count_gas: Some(gas(&encode_int64(count as i64))),
                    full_gas: gas(&encode_int64_array(&all)),
                    by_limit,
                })
            }
            OracleRequest::WayGeometry { id } | OracleRequest::WayCount { id } => {
                let coords = self.engine.way_geometry(*id)?;
                let count = coords.len() as u64;
                Ok(GasReport {
                    function,
                    count: Some(count),
                    count_gas: Some(gas(&encode_int64(count as i64))),
                    full_gas: gas(&encode_coord_pairs(&coords)),
                    by_limit: Vec::new(),
                })
            }
            _ => {
                let resp = self.dispatch(req)?;
                Ok(GasReport { function, count: None, count_gas: None, full_gas: resp.estimated_gas, by_limit: Vec::new() })
            }
        }
    }
}
