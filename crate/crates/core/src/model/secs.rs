//! Durations as integer seconds.
//!
//! Scenario files may write a duration either as a plain integer number of
//! seconds or as a human string such as `"4h"` or `"7d"`; output is always
//! the integer form so traces stay byte-stable.

use serde::{Deserialize, Deserializer, Serializer};

pub type Seconds = u64;

pub const MINUTE: Seconds = 60;
pub const HOUR: Seconds = 3_600;
pub const DAY: Seconds = 86_400;

pub fn parse(raw: &str) -> Result<Seconds, humantime::DurationError> {
    humantime::parse_duration(raw.trim()).map(|d| d.as_secs())
}

pub fn serialize<S: Serializer>(v: &Seconds, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(*v)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Raw {
    Int(u64),
    Text(String),
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Seconds, D::Error> {
    match Raw::deserialize(d)? {
        Raw::Int(v) => Ok(v),
        Raw::Text(t) => parse(&t).map_err(|e| serde::de::Error::custom(format!("duration `{t}`: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Deserialize, serde::Serialize)]
    struct W {
        #[serde(with = "super")]
        d: Seconds,
    }

    #[test]
    fn accepts_int_and_text() {
        let a: W = serde_json::from_str(r#"{"d": 90}"#).unwrap();
        assert_eq!(a.d, 90);
        let b: W = serde_json::from_str(r#"{"d": "4h"}"#).unwrap();
        assert_eq!(b.d, 4 * HOUR);
        let c: W = serde_json::from_str(r#"{"d": "7days"}"#).unwrap();
        assert_eq!(c.d, 7 * DAY);
        assert_eq!(serde_json::to_string(&c).unwrap(), r#"{"d":604800}"#);
        assert!(serde_json::from_str::<W>(r#"{"d": "soon"}"#).is_err());
    }
}
