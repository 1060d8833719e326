//! Golden-vector loading and random payload values.

use std::path::PathBuf;

use geo_oracle_core::abi_codec::{AbiValue, Layout};
use geo_oracle_core::geo_model::{ObjectId, ObjectType, ScaledCoord, MAX_LAT, MAX_LON};
use geo_oracle_core::geocoder::{GeocodeResult, ReverseGeocodeResult};
use rand::Rng;
use serde_json::Value;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden")
}

fn coord(v: &Value) -> ScaledCoord {
    ScaledCoord { lat: v[0].as_i64().unwrap(), lon: v[1].as_i64().unwrap() }
}

fn value_from_json(layout: Layout, v: &Value) -> AbiValue {
    let ints = |v: &Value| v.as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect::<Vec<_>>();
    match layout {
        Layout::Int64Scalar => AbiValue::Int64(v.as_i64().unwrap()),
        Layout::Int64Array => AbiValue::Int64Array(ints(v)),
        Layout::StringArray => {
            AbiValue::StringArray(v.as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_owned()).collect())
        }
        Layout::CoordPairList => AbiValue::CoordPairs(v.as_array().unwrap().iter().map(coord).collect()),
        Layout::GeocodeTuple => {
            let xs = ints(v);
            AbiValue::Geocode(GeocodeResult {
                object_type: ObjectType::from_code(xs[0]).unwrap(),
                id: ObjectId::new(xs[1] as u64).unwrap(),
                coord: ScaledCoord { lat: xs[2], lon: xs[3] },
            })
        }
        Layout::ReverseTuple => AbiValue::Reverse(ReverseGeocodeResult {
            object_type: ObjectType::from_code(v[0].as_i64().unwrap()).unwrap(),
            id: ObjectId::new(v[1].as_u64().unwrap()).unwrap(),
            description: v[2].as_str().unwrap().to_owned(),
        }),
    }
}

/// `(input, expected hex)` pairs for one layout.
pub fn golden(layout: Layout) -> Vec<(AbiValue, String)> {
    let dir = golden_dir();
    let inputs = std::fs::read_to_string(dir.join(format!("{}.inputs.jsonl", layout.name()))).unwrap();
    let hexes = std::fs::read_to_string(dir.join(format!("{}.hex", layout.name()))).unwrap();
    let inputs: Vec<&str> = inputs.lines().collect();
    let hexes: Vec<&str> = hexes.lines().collect();
    assert_eq!(inputs.len(), hexes.len());
    inputs
        .iter()
        .zip(hexes)
        .map(|(i, h)| (value_from_json(layout, &serde_json::from_str(i).unwrap()), h.to_owned()))
        .collect()
}

fn random_string<R: Rng>(rng: &mut R) -> String {
    const CHARS: &[char] = &['a', 'Z', '0', ' ', ',', 'é', '€', '中', '\u{1F30D}', '\0'];
    let n = rng.gen_range(0..80);
    (0..n).map(|_| CHARS[rng.gen_range(0..CHARS.len())]).collect()
}

fn random_i64<R: Rng>(rng: &mut R) -> i64 {
    match rng.gen_range(0..4) {
        0 => [0, 1, -1, i64::MIN, i64::MAX][rng.gen_range(0..5)],
        1 => rng.gen_range(-1000..1000),
        _ => rng.gen(),
    }
}

fn random_coord<R: Rng>(rng: &mut R) -> ScaledCoord {
    ScaledCoord { lat: rng.gen_range(-MAX_LAT..=MAX_LAT), lon: rng.gen_range(-MAX_LON..=MAX_LON) }
}

pub fn random_value<R: Rng>(rng: &mut R, layout: Layout) -> AbiValue {
    let n = rng.gen_range(0..24);
    let object_type = if rng.gen() { ObjectType::Node } else { ObjectType::Way };
    let id = ObjectId::new(rng.gen_range(1..=i64::MAX as u64)).unwrap();
    match layout {
        Layout::Int64Scalar => AbiValue::Int64(random_i64(rng)),
        Layout::Int64Array => AbiValue::Int64Array((0..n).map(|_| random_i64(rng)).collect()),
        Layout::StringArray => AbiValue::StringArray((0..n / 3).map(|_| random_string(rng)).collect()),
        Layout::CoordPairList => AbiValue::CoordPairs((0..n).map(|_| random_coord(rng)).collect()),
        Layout::GeocodeTuple => AbiValue::Geocode(GeocodeResult { object_type, id, coord: random_coord(rng) }),
        Layout::ReverseTuple => {
            let mut description = random_string(rng);
            if description.is_empty() {
                description.push('x');
            }
            AbiValue::Reverse(ReverseGeocodeResult { object_type, id, description })
        }
    }
}
