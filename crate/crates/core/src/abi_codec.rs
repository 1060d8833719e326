//! EVM ABI encoding of oracle responses.
//!
//! Payloads are return-data encodings (no function selector). Every value
//! occupies whole 32-byte words; `int64` is sign-extended to 256 bits.
//!
//! | layout          | solidity return type         |
//! |-----------------|------------------------------|
//! | `Int64Scalar`   | `int64`                      |
//! | `Int64Array`    | `int64[]`                    |
//! | `StringArray`   | `string[]`                   |
//! | `CoordPairList` | `int64[2][]` (lat, lon)      |
//! | `GeocodeTuple`  | `(int64, int64, int64, int64)` |
//! | `ReverseTuple`  | `(int64, int64, string)`     |

use std::fmt;

use crate::error::{Error, Result};
use crate::geo_model::{ObjectId, ObjectType, ScaledCoord};
use crate::geocoder::{GeocodeResult, ReverseGeocodeResult};

pub const WORD: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layout {
    Int64Scalar,
    Int64Array,
    StringArray,
    CoordPairList,
    GeocodeTuple,
    ReverseTuple,
}

impl Layout {
    pub const ALL: [Layout; 6] = [
        Layout::Int64Scalar,
        Layout::Int64Array,
        Layout::StringArray,
        Layout::CoordPairList,
        Layout::GeocodeTuple,
        Layout::ReverseTuple,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Layout::Int64Scalar => "int64",
            Layout::Int64Array => "int64_array",
            Layout::StringArray => "string_array",
            Layout::CoordPairList => "coord_pairs",
            Layout::GeocodeTuple => "geocode",
            Layout::ReverseTuple => "reverse",
        }
    }
}

/// ABI-encoded bytes tagged with the layout they were produced under.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AbiPayload {
    bytes: Vec<u8>,
    layout: Layout,
}

impl AbiPayload {
    /// Wraps raw bytes, checking only word alignment.
    pub fn from_bytes(bytes: Vec<u8>, layout: Layout) -> Result<Self> {
        if !bytes.len().is_multiple_of(WORD) {
            return Err(Error::MalformedPayload(format!("length {} is not a multiple of 32", bytes.len())));
        }
        Ok(AbiPayload { bytes, layout })
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    /// Lowercase hex with a `0x` prefix.
    pub fn to_hex(&self) -> String {
        to_hex(&self.bytes)
    }

    pub fn from_hex(hex: &str, layout: Layout) -> Result<Self> {
        Self::from_bytes(parse_hex(hex)?, layout)
    }
}

impl fmt::Display for AbiPayload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

pub fn to_hex(bytes: &[u8]) -> String {
    const DIGITS: &[u8; 16] = b"0123456789abcdef";
    let mut s = String::with_capacity(2 + bytes.len() * 2);
    s.push_str("0x");
    for b in bytes {
        s.push(DIGITS[usize::from(b >> 4)] as char);
        s.push(DIGITS[usize::from(b & 0xf)] as char);
    }
    s
}

pub fn parse_hex(hex: &str) -> Result<Vec<u8>> {
    let body = hex.strip_prefix("0x").unwrap_or(hex);
    if !body.len().is_multiple_of(2) {
        return Err(Error::MalformedPayload("odd number of hex digits".into()));
    }
    body.as_bytes()
        .chunks(2)
        .map(|pair| {
            std::str::from_utf8(pair)
                .ok()
                .and_then(|s| u8::from_str_radix(s, 16).ok())
                .ok_or_else(|| Error::MalformedPayload(format!("invalid hex digits {:?}", String::from_utf8_lossy(pair))))
        })
        .collect()
}

/// A decoded payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AbiValue {
    Int64(i64),
    Int64Array(Vec<i64>),
    StringArray(Vec<String>),
    CoordPairs(Vec<ScaledCoord>),
    Geocode(GeocodeResult),
    Reverse(ReverseGeocodeResult),
}

fn int_word(v: i64) -> [u8; WORD] {
    let mut w = if v < 0 { [0xff; WORD] } else { [0; WORD] };
    w[WORD - 8..].copy_from_slice(&v.to_be_bytes());
    w
}

fn usize_word(v: usize) -> [u8; WORD] {
    let mut w = [0; WORD];
    w[WORD - 8..].copy_from_slice(&(v as u64).to_be_bytes());
    w
}

fn id_to_i64(id: ObjectId) -> Result<i64> {
    i64::try_from(id.get()).map_err(|_| Error::IdOverflow(id.get()))
}

fn padded_len(n: usize) -> usize {
    n.div_ceil(WORD) * WORD
}

fn push_string(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&usize_word(s.len()));
    out.extend_from_slice(s.as_bytes());
    out.resize(out.len() + padded_len(s.len()) - s.len(), 0);
}

pub fn encode_int64(v: i64) -> AbiPayload {
    AbiPayload { bytes: int_word(v).to_vec(), layout: Layout::Int64Scalar }
}

pub fn encode_int64_array(vs: &[i64]) -> AbiPayload {
    let mut bytes = Vec::with_capacity(WORD * (2 + vs.len()));
    bytes.extend_from_slice(&usize_word(WORD));
    bytes.extend_from_slice(&usize_word(vs.len()));
    for &v in vs {
        bytes.extend_from_slice(&int_word(v));
    }
    AbiPayload { bytes, layout: Layout::Int64Array }
}

pub fn encode_string_array<S: AsRef<str>>(ss: &[S]) -> AbiPayload {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(&usize_word(WORD));
    bytes.extend_from_slice(&usize_word(ss.len()));
    // Offsets are relative to the first word after the length.
    let mut offset = WORD * ss.len();
    for s in ss {
        bytes.extend_from_slice(&usize_word(offset));
        offset += WORD + padded_len(s.as_ref().len());
    }
    for s in ss {
        push_string(&mut bytes, s.as_ref());
    }
    AbiPayload { bytes, layout: Layout::StringArray }
}

pub fn encode_coord_pairs(cs: &[ScaledCoord]) -> AbiPayload {
    let mut bytes = Vec::with_capacity(WORD * (2 + 2 * cs.len()));
    bytes.extend_from_slice(&usize_word(WORD));
    bytes.extend_from_slice(&usize_word(cs.len()));
    for c in cs {
        bytes.extend_from_slice(&int_word(c.lat));
        bytes.extend_from_slice(&int_word(c.lon));
    }
    AbiPayload { bytes, layout: Layout::CoordPairList }
}

pub fn encode_geocode(r: &GeocodeResult) -> Result<AbiPayload> {
    let mut bytes = Vec::with_capacity(4 * WORD);
    for v in [r.object_type.code(), id_to_i64(r.id)?, r.coord.lat, r.coord.lon] {
        bytes.extend_from_slice(&int_word(v));
    }
    Ok(AbiPayload { bytes, layout: Layout::GeocodeTuple })
}

pub fn encode_reverse(r: &ReverseGeocodeResult) -> Result<AbiPayload> {
    if r.description.is_empty() {
        return Err(Error::EmptyDescription);
    }
    let mut bytes = Vec::new();
    bytes.extend_from_slice(&int_word(r.object_type.code()));
    bytes.extend_from_slice(&int_word(id_to_i64(r.id)?));
    bytes.extend_from_slice(&usize_word(3 * WORD));
    push_string(&mut bytes, &r.description);
    Ok(AbiPayload { bytes, layout: Layout::ReverseTuple })
}

/// Strict reader: every word must be in bounds, integers must be canonical
/// sign extensions, and the payload must contain nothing beyond the value.
struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn word(&self, at: usize) -> Result<&'a [u8]> {
        at.checked_add(WORD)
            .and_then(|end| self.bytes.get(at..end))
            .ok_or_else(|| Error::MalformedPayload(format!("word at byte {at} is past the end")))
    }

    fn int64(&self, at: usize) -> Result<i64> {
        let w = self.word(at)?;
        let v = i64::from_be_bytes(w[WORD - 8..].try_into().expect("8 bytes"));
        let fill = if v < 0 { 0xff } else { 0 };
        if w[..WORD - 8].iter().any(|&b| b != fill) {
            return Err(Error::MalformedPayload(format!("word at byte {at} is not a sign-extended int64")));
        }
        Ok(v)
    }

    fn usize(&self, at: usize) -> Result<usize> {
        let w = self.word(at)?;
        if w[..WORD - 8].iter().any(|&b| b != 0) {
            return Err(Error::MalformedPayload(format!("offset/length at byte {at} out of range")));
        }
        let v = u64::from_be_bytes(w[WORD - 8..].try_into().expect("8 bytes"));
        usize::try_from(v)
            .ok()
            .filter(|&v| v <= self.bytes.len())
            .ok_or_else(|| Error::MalformedPayload(format!("offset/length {v} at byte {at} exceeds payload")))
    }

    fn string(&self, at: usize) -> Result<(String, usize)> {
        let len = self.usize(at)?;
        let start = at + WORD;
        let end = start + padded_len(len);
        let data = self
            .bytes
            .get(start..end)
            .ok_or_else(|| Error::MalformedPayload(format!("string at byte {at} runs past the end")))?;
        if data[len..].iter().any(|&b| b != 0) {
            return Err(Error::MalformedPayload("non-zero string padding".into()));
        }
        let s = String::from_utf8(data[..len].to_vec())
            .map_err(|_| Error::MalformedPayload("string is not UTF-8".into()))?;
        Ok((s, end))
    }

    /// Head offset of a single dynamic return value; must be 0x20.
    fn dynamic_head(&self) -> Result<usize> {
        let off = self.usize(0)?;
        if off != WORD {
            return Err(Error::MalformedPayload(format!("head offset {off:#x}, expected 0x20")));
        }
        Ok(off)
    }

    fn expect_end(&self, end: usize) -> Result<()> {
        if end != self.bytes.len() {
            return Err(Error::MalformedPayload(format!(
                "{} trailing bytes after value",
                self.bytes.len() as i64 - end as i64
            )));
        }
        Ok(())
    }
}

fn object_type(code: i64) -> Result<ObjectType> {
    ObjectType::from_code(code).ok_or_else(|| Error::MalformedPayload(format!("object type flag {code}")))
}

fn object_id(v: i64) -> Result<ObjectId> {
    u64::try_from(v)
        .ok()
        .and_then(ObjectId::new)
        .ok_or_else(|| Error::MalformedPayload(format!("object id {v} is not positive")))
}

/// Decodes a payload according to its layout; the exact inverse of the
/// matching encoder.
pub fn decode(p: &AbiPayload) -> Result<AbiValue> {
    let r = Reader { bytes: &p.bytes };
    if !p.bytes.len().is_multiple_of(WORD) {
        return Err(Error::MalformedPayload("length is not a multiple of 32".into()));
    }
    match p.layout {
        Layout::Int64Scalar => {
            let v = r.int64(0)?;
            r.expect_end(WORD)?;
            Ok(AbiValue::Int64(v))
        }
        Layout::Int64Array => {
            let base = r.dynamic_head()?;
            let n = r.usize(base)?;
            let vs = (0..n).map(|i| r.int64(base + WORD * (1 + i))).collect::<Result<Vec<_>>>()?;
            r.expect_end(base + WORD * (1 + n))?;
            Ok(AbiValue::Int64Array(vs))
        }
        Layout::CoordPairList => {
            let base = r.dynamic_head()?;
            let n = r.usize(base)?;
            let cs = (0..n)
                .map(|i| {
                    let at = base + WORD * (1 + 2 * i);
                    Ok(ScaledCoord { lat: r.int64(at)?, lon: r.int64(at + WORD)? })
                })
                .collect::<Result<Vec<_>>>()?;
            r.expect_end(base + WORD * (1 + 2 * n))?;
            Ok(AbiValue::CoordPairs(cs))
        }
        Layout::StringArray => {
            let base = r.dynamic_head()?;
            let n = r.usize(base)?;
            let content = base + WORD;
            let mut expected = content + WORD * n;
            let mut out = Vec::with_capacity(n);
            for i in 0..n {
                let at = content + r.usize(content + WORD * i)?;
                if at != expected {
                    return Err(Error::MalformedPayload(format!("string {i} at non-canonical offset")));
                }
                let (s, end) = r.string(at)?;
                out.push(s);
                expected = end;
            }
            r.expect_end(expected)?;
            Ok(AbiValue::StringArray(out))
        }
        Layout::GeocodeTuple => {
            let object_type = object_type(r.int64(0)?)?;
            let id = object_id(r.int64(WORD)?)?;
            let coord = ScaledCoord { lat: r.int64(2 * WORD)?, lon: r.int64(3 * WORD)? };
            r.expect_end(4 * WORD)?;
            Ok(AbiValue::Geocode(GeocodeResult { object_type, id, coord }))
        }
        Layout::ReverseTuple => {
            let object_type = object_type(r.int64(0)?)?;
            let id = object_id(r.int64(WORD)?)?;
            let off = r.usize(2 * WORD)?;
            if off != 3 * WORD {
                return Err(Error::MalformedPayload(format!("string offset {off:#x}, expected 0x60")));
            }
            let (description, end) = r.string(off)?;
            if description.is_empty() {
                return Err(Error::EmptyDescription);
            }
            r.expect_end(end)?;
            Ok(AbiValue::Reverse(ReverseGeocodeResult { object_type, id, description }))
        }
    }
}

/// Re-encodes a decoded value.
pub fn encode(value: &AbiValue) -> Result<AbiPayload> {
    Ok(match value {
        AbiValue::Int64(v) => encode_int64(*v),
        AbiValue::Int64Array(vs) => encode_int64_array(vs),
        AbiValue::StringArray(ss) => encode_string_array(ss),
        AbiValue::CoordPairs(cs) => encode_coord_pairs(cs),
        AbiValue::Geocode(g) => encode_geocode(g)?,
        AbiValue::Reverse(r) => encode_reverse(r)?,
    })
}
