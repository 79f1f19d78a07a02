use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Three-letter uppercase country code (ISO-3166 alpha-3 style).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountryId([u8; 3]);

impl CountryId {
    pub fn new(code: &str) -> Result<Self> {
        let bytes = code.as_bytes();
        if bytes.len() != 3 || !bytes.iter().all(u8::is_ascii_uppercase) {
            return Err(Error::InvalidIdentifier(code.to_string()));
        }
        Ok(CountryId([bytes[0], bytes[1], bytes[2]]))
    }

    /// Synthetic code for the `index`-th generated country: AAA, AAB, ..., ZZZ.
    pub fn synthetic(index: usize) -> Self {
        let i = index % (26 * 26 * 26);
        let letter = |v: usize| b'A' + v as u8;
        CountryId([letter(i / 676), letter((i / 26) % 26), letter(i % 26)])
    }

    pub fn as_str(&self) -> &str {
        // Only ASCII uppercase bytes are ever stored.
        std::str::from_utf8(&self.0).expect("country code is ASCII")
    }
}

impl fmt::Display for CountryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CountryId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CountryId::new(s)
    }
}

impl Serialize for CountryId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CountryId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        CountryId::new(&s).map_err(serde::de::Error::custom)
    }
}

/// Economic sector. Ordering follows declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SectorId {
    Agriculture,
    Industry,
    Services,
}

impl SectorId {
    pub const ALL: [SectorId; 3] = [SectorId::Agriculture, SectorId::Industry, SectorId::Services];

    pub fn as_str(&self) -> &'static str {
        match self {
            SectorId::Agriculture => "agriculture",
            SectorId::Industry => "industry",
            SectorId::Services => "services",
        }
    }
}

impl fmt::Display for SectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SectorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "agriculture" => Ok(SectorId::Agriculture),
            "industry" => Ok(SectorId::Industry),
            "services" => Ok(SectorId::Services),
            _ => Err(Error::InvalidIdentifier(s.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn country_codes_are_three_uppercase_letters() {
        assert!(CountryId::new("UGA").is_ok());
        assert!(CountryId::new("uga").is_err());
        assert!(CountryId::new("UG").is_err());
        assert!(CountryId::new("UGAN").is_err());
        assert!(CountryId::new("U1A").is_err());
    }

    #[test]
    fn synthetic_codes_are_valid_and_ordered() {
        assert_eq!(CountryId::synthetic(0).as_str(), "AAA");
        assert_eq!(CountryId::synthetic(27).as_str(), "ABB");
        assert!(CountryId::synthetic(3) < CountryId::synthetic(4));
    }

    #[test]
    fn sector_parsing_is_case_insensitive() {
        assert_eq!("Industry".parse::<SectorId>().unwrap(), SectorId::Industry);
        assert!("mining".parse::<SectorId>().is_err());
    }
}
