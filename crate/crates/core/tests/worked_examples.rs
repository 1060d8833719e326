//! The worked examples, run against the hand-authored fixtures.

mod common;

use common::*;
use geo_oracle_core::abi_codec::{decode, encode_int64, encode_int64_array, AbiValue};
use geo_oracle_core::geo_model::{scale_decimal_degrees, unscale_to_decimal, ObjectType, ScaledCoord};
use geo_oracle_core::oracle::{Oracle, OracleConfig};
use geo_oracle_core::snapshot::load_store;
use geo_oracle_core::spatial_index::build_index;

fn oracle(name: &str) -> Oracle {
    Oracle::new(build_index(load_store(fixture(name)).unwrap()).unwrap(), OracleConfig::default())
}

#[test]
fn pyramid_way_has_ten_nodes() {
    let o = oracle("landmarks.fixture");
    let r = o.handle(br#"{"function":"wayCount","ID":4420397}"#).unwrap();
    assert_eq!(r.payload, encode_int64(10));

    let r = o.handle(br#"{"function":"wayGeometry","ID":4420397}"#).unwrap();
    let AbiValue::CoordPairs(coords) = decode(&r.payload).unwrap() else { panic!() };
    assert_eq!(coords.len(), 10);
    assert_eq!(coords.first(), coords.last());
    // Byte-count of the eth_abi encoding of the same ten pairs.
    assert_eq!(r.estimated_gas, 3800);
}

#[test]
fn eiffel_tower_tags() {
    let rows = [
        ("addr:city", "Paris"),
        ("addr:housenumber", "5"),
        ("addr:postcode", "75007"),
        ("addr:street", "Avenue Anatole France"),
        ("architect", "Stephen Sauvestre"),
        ("building", "attraction"),
        ("building:colour", "#706550"),
        ("building:material", "iron"),
        ("building:shape", "pyramidal"),
        ("fee", "10-25€"),
        ("height", "324"),
    ];
    let keys: Vec<&str> = rows.iter().map(|r| r.0).collect();
    let doc = serde_json::json!({"function": "wayTagQuery", "ID": 5013364, "tags": keys}).to_string();
    let r = oracle("landmarks.fixture").handle(doc.as_bytes()).unwrap();
    let expected: Vec<String> = rows.iter().map(|r| r.1.to_owned()).collect();
    assert_eq!(decode(&r.payload).unwrap(), AbiValue::StringArray(expected));
}

#[test]
fn manhattan_bbox_scaling_is_lossless() {
    for (text, scaled) in [
        ("40.7719", 4_077_190_000),
        ("-73.9746", -7_397_460_000),
        ("40.7975", 4_079_750_000),
        ("-73.9469", -7_394_690_000),
    ] {
        assert_eq!(scale_decimal_degrees(text).unwrap(), scaled);
        assert_eq!(unscale_to_decimal(scaled).unwrap(), text);
    }
}

#[test]
fn manhattan_station_count() {
    let o = oracle("manhattan_mini.fixture");
    let store = o.engine().index().store();
    let bb = geo_oracle_core::geo_model::BoundingBox::new(4_077_190_000, -7_397_460_000, 4_079_750_000, -7_394_690_000).unwrap();
    let expected = ref_scan(store, ObjectType::Node, "public_transport", "station", |c| ref_in_bbox(c, &bb));
    let count = br#"{"function":"nodeCountInBB","key":"public_transport","value":"station","south":4077190000,"west":-7397460000,"north":4079750000,"east":-7394690000}"#;
    let r = o.handle(count).unwrap();
    assert_eq!(r.payload, encode_int64(expected.len() as i64));
    let search = br#"{"function":"nodesInBB","key":"public_transport","value":"station","south":4077190000,"west":-7397460000,"north":4079750000,"east":-7394690000,"limit":4}"#;
    let r = o.handle(search).unwrap();
    let ids: Vec<i64> = expected.iter().take(4).map(|id| id.get() as i64).collect();
    assert_eq!(r.payload, encode_int64_array(&ids));
    assert_eq!(r.match_count, Some(expected.len() as u64));
}

#[test]
fn boston_cafes() {
    let o = oracle("boston_mini.fixture");
    let store = o.engine().index().store();
    let ring = area_ring(store, "Boston");
    let expected = ref_scan(store, ObjectType::Node, "amenity", "cafe", |c| ref_inside(c, &ring));
    assert!(expected.len() >= 8);

    let r = o.handle(br#"{"function":"nodeCountInArea","key":"amenity","value":"cafe","area":"Boston"}"#).unwrap();
    assert_eq!(r.payload, encode_int64(expected.len() as i64));

    let r = o.handle(br#"{"function":"nodesInArea","key":"amenity","value":"cafe","area":"Boston","limit":5}"#).unwrap();
    let first5: Vec<i64> = expected.iter().take(5).map(|id| id.get() as i64).collect();
    assert_eq!(r.payload, encode_int64_array(&first5));
    // Byte-count of the eth_abi encoding of the same five ids.
    assert_eq!(r.estimated_gas, 1160);
}

#[test]
fn coffee_shop_tags() {
    let doc = br#"{"function":"nodeTagQuery","ID":2700809522,"tags":["name","addr:housenumber","addr:street","addr:city","addr:postcode","opening_hours"]}"#;
    let r = oracle("boston_mini.fixture").handle(doc).unwrap();
    let expected = ["Thinking Cup", "165", "Tremont Street", "Boston", "02111", "Mo-Su 07:00-22:00"];
    assert_eq!(decode(&r.payload).unwrap(), AbiValue::StringArray(expected.map(String::from).to_vec()));
}

#[test]
fn baker_street_geocode_and_reverse_agree() {
    let o = oracle("london_mini.fixture");
    let fwd = o.handle(br#"{"function":"geocode","address":"221B Baker St, London NW1 6XE, UK"}"#).unwrap();
    let AbiValue::Geocode(g) = decode(&fwd.payload).unwrap() else { panic!() };
    assert_eq!(g.object_type, ObjectType::Node);
    assert_eq!(g.coord, ScaledCoord { lat: 5_152_338_790, lon: -15_823_670 });

    let rev = o.handle(br#"{"function":"reverseGeocode","lat":5152338790,"lon":-15823670}"#).unwrap();
    let AbiValue::Reverse(r) = decode(&rev.payload).unwrap() else { panic!() };
    assert_eq!((r.object_type, r.id), (g.object_type, g.id));
    assert_eq!(r.description, "Sherlock Holmes Museum, 221b Baker Street, London, NW1 6XE");
}

#[test]
fn empty_matches_and_missing_areas_differ() {
    let o = oracle("boston_mini.fixture");
    let r = o.handle(br#"{"function":"nodesInArea","key":"amenity","value":"casino","area":"Boston","limit":3}"#).unwrap();
    assert_eq!(r.payload, encode_int64_array(&[]));
    assert_eq!(r.match_count, Some(0));
    let e = o.handle(br#"{"function":"nodesInArea","key":"amenity","value":"cafe","area":"Gotham","limit":3}"#).unwrap_err();
    assert_eq!(e.code(), "AreaNotFound");
}
