use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A percentage held in tenths of a percentage point, so `86.0%` is `860`.
///
/// Keeping the rounded value integral means renderings never re-round and
/// tolerance checks compare exact integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Share(u16);

impl Share {
    pub const FULL: Share = Share(1000);

    /// `100 * count / total`, rounded half-up to one decimal.
    ///
    /// Returns `None` when `total` is zero: the share is undefined rather
    /// than `0.0`.
    pub fn round_half_up(count: u64, total: u64) -> Option<Share> {
        if total == 0 {
            return None;
        }
        // floor((1000 * count) / total + 1/2)
        let tenths = (2000 * u128::from(count) + u128::from(total)) / (2 * u128::from(total));
        Some(Share(u16::try_from(tenths).unwrap_or(u16::MAX)))
    }

    pub fn from_tenths(tenths: u16) -> Share {
        Share(tenths)
    }

    pub fn tenths(self) -> u16 {
        self.0
    }

    pub fn as_percent(self) -> f64 {
        f64::from(self.0) / 10.0
    }

    /// Absolute distance in tenths of a percentage point.
    pub fn distance(self, other: Share) -> u16 {
        self.0.abs_diff(other.0)
    }
}

impl fmt::Display for Share {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.0 / 10, self.0 % 10)
    }
}

impl Serialize for Share {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_percent())
    }
}

impl<'de> Deserialize<'de> for Share {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        if !(0.0..=1000.0).contains(&v) {
            return Err(serde::de::Error::custom(format!("share {v} out of range")));
        }
        Ok(Share((v * 10.0).round() as u16))
    }
}
