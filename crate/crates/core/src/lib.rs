//! Geospatial oracle engine: OpenStreetMap-model storage and indexing,
//! location queries, geocoding, and EVM ABI response encoding.

pub mod abi_codec;
pub mod error;
pub mod geo_model;
pub mod geocoder;
pub mod oracle;
pub mod osm_ingest;
pub mod query_engine;
pub mod snapshot;
pub mod spatial_index;

pub use error::{Error, Result};
