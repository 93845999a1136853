//! Persistent identifiers: authority sources, canonical IRI shapes and the
//! ORCID check character.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// External authority registries a field can be bound to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuthoritySource {
    Orcid,
    Ror,
    Comptox,
}

impl AuthoritySource {
    pub const ALL: [AuthoritySource; 3] = [Self::Orcid, Self::Ror, Self::Comptox];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Orcid => "orcid",
            Self::Ror => "ror",
            Self::Comptox => "comptox",
        }
    }

    /// Whether `iri` has this source's canonical identifier shape. ORCID
    /// identifiers must also carry a valid check character.
    pub fn is_canonical_iri(self, iri: &str) -> bool {
        match self {
            Self::Orcid => {
                ORCID_IRI.is_match(iri)
                    && validate_orcid_checksum(&iri[ORCID_PREFIX.len()..]).unwrap_or(false)
            }
            Self::Ror => ROR_IRI.is_match(iri),
            Self::Comptox => COMPTOX_IRI.is_match(iri),
        }
    }

    /// Canonicalize a user-supplied identifier (bare or IRI form) to the
    /// source's IRI form, checking syntax and, for ORCID, the checksum.
    pub fn canonicalize(self, raw: &str) -> Result<String, IdentifierError> {
        let raw = raw.trim();
        if raw.is_empty() {
            return Err(IdentifierError::Malformed(raw.to_owned()));
        }
        let iri = match self {
            Self::Orcid => {
                let bare = strip_any_prefix(raw, &[ORCID_PREFIX, "http://orcid.org/", "orcid.org/"]);
                let compact: String = bare.chars().filter(|c| *c != '-').collect();
                if !ORCID_BARE.is_match(&compact) {
                    return Err(IdentifierError::Malformed(raw.to_owned()));
                }
                format!(
                    "{ORCID_PREFIX}{}-{}-{}-{}",
                    &compact[0..4],
                    &compact[4..8],
                    &compact[8..12],
                    &compact[12..16]
                )
            }
            Self::Ror => {
                let bare = strip_any_prefix(raw, &[ROR_PREFIX, "http://ror.org/", "ror.org/"]);
                format!("{ROR_PREFIX}{}", bare.to_ascii_lowercase())
            }
            Self::Comptox => {
                let bare = strip_any_prefix(raw, &[COMPTOX_PREFIX]);
                format!("{COMPTOX_PREFIX}{}", bare.to_ascii_uppercase())
            }
        };
        if self.is_canonical_iri(&iri) {
            Ok(iri)
        } else if self == Self::Orcid && ORCID_IRI.is_match(&iri) {
            Err(IdentifierError::Checksum(raw.to_owned()))
        } else {
            Err(IdentifierError::Malformed(raw.to_owned()))
        }
    }

    /// The registry-local part of a canonical IRI (ORCID digits, ROR id, DTXSID).
    pub fn local_id(self, iri: &str) -> &str {
        let prefix = match self {
            Self::Orcid => ORCID_PREFIX,
            Self::Ror => ROR_PREFIX,
            Self::Comptox => COMPTOX_PREFIX,
        };
        iri.strip_prefix(prefix).unwrap_or(iri)
    }
}

impl fmt::Display for AuthoritySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown authority source `{0}`")]
pub struct UnknownSource(pub String);

impl FromStr for AuthoritySource {
    type Err = UnknownSource;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "orcid" => Ok(Self::Orcid),
            "ror" => Ok(Self::Ror),
            "comptox" => Ok(Self::Comptox),
            _ => Err(UnknownSource(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdentifierError {
    #[error("malformed identifier `{0}`")]
    Malformed(String),
    #[error("identifier `{0}` fails its checksum")]
    Checksum(String),
}

pub const ORCID_PREFIX: &str = "https://orcid.org/";
pub const ROR_PREFIX: &str = "https://ror.org/";
pub const COMPTOX_PREFIX: &str = "https://comptox.epa.gov/dashboard/chemical/details/";

static ORCID_IRI: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^https://orcid\.org/\d{4}-\d{4}-\d{4}-\d{3}[\dX]$").unwrap());
static ORCID_BARE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\d{15}[\dX]$").unwrap());
static ROR_IRI: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^https://ror\.org/0[a-hj-km-np-tv-z0-9]{6}\d{2}$").unwrap());
static COMPTOX_IRI: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^https://comptox\.epa\.gov/dashboard/chemical/details/DTXSID\d+$").unwrap()
});

fn strip_any_prefix<'a>(raw: &'a str, prefixes: &[&str]) -> &'a str {
    prefixes
        .iter()
        .find_map(|p| raw.strip_prefix(p))
        .unwrap_or(raw)
}

/// Returns the ISO 7064 MOD 11-2 check character for a run of decimal digits.
pub fn mod11_2_check_char(digits: &str) -> Option<char> {
    let mut total: u32 = 0;
    for c in digits.chars() {
        let d = c.to_digit(10)?;
        total = (total + d) * 2 % 11;
    }
    let result = (12 - total % 11) % 11;
    Some(if result == 10 {
        'X'
    } else {
        char::from_digit(result, 10).unwrap()
    })
}

/// Checks the final character of a 16-character ORCID (hyphens allowed)
/// against the MOD 11-2 check character of the first 15 digits.
pub fn validate_orcid_checksum(id: &str) -> Result<bool, IdentifierError> {
    let compact: String = id.chars().filter(|c| *c != '-').collect();
    if !ORCID_BARE.is_match(&compact) {
        return Err(IdentifierError::Malformed(id.to_owned()));
    }
    let (body, check) = compact.split_at(15);
    Ok(mod11_2_check_char(body) == check.chars().next())
}

static IRI_SHAPE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"^[A-Za-z][A-Za-z0-9+.\-]*:[^\s<>"{}|\\^`]+$"#).unwrap()
});

/// Syntactic check for an absolute IRI: a scheme followed by a non-empty
/// body free of whitespace and the characters IRIs exclude.
pub fn is_absolute_iri(s: &str) -> bool {
    IRI_SHAPE.is_match(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orcid_from_investigator_field_is_valid() {
        assert_eq!(validate_orcid_checksum("0000000222562421"), Ok(true));
        assert_eq!(validate_orcid_checksum("0000-0002-2256-2421"), Ok(true));
        assert_eq!(validate_orcid_checksum("0000-0002-2256-2420"), Ok(false));
    }

    #[test]
    fn all_zero_orcid_has_check_one() {
        // Frozen from the weighted-sum oracle in tests/identifier_oracle.rs.
        assert_eq!(mod11_2_check_char("000000000000000"), Some('1'));
        assert_eq!(validate_orcid_checksum("0000000000000000"), Ok(false));
    }

    #[test]
    fn wrong_length_is_malformed() {
        assert!(matches!(
            validate_orcid_checksum("12345"),
            Err(IdentifierError::Malformed(_))
        ));
    }

    #[test]
    fn canonicalize_bare_orcid() {
        assert_eq!(
            AuthoritySource::Orcid.canonicalize("0000-0002-2256-2421").unwrap(),
            "https://orcid.org/0000-0002-2256-2421"
        );
        assert_eq!(
            AuthoritySource::Orcid.canonicalize("0000000222562421").unwrap(),
            "https://orcid.org/0000-0002-2256-2421"
        );
        assert!(matches!(
            AuthoritySource::Orcid.canonicalize("0000-0002-2256-2420"),
            Err(IdentifierError::Checksum(_))
        ));
    }

    #[test]
    fn ror_and_comptox_shapes() {
        assert_eq!(
            AuthoritySource::Ror.canonicalize("00f54p054").unwrap(),
            "https://ror.org/00f54p054"
        );
        assert!(AuthoritySource::Ror.canonicalize("https://ror.org/00f54p0u4").is_err());
        assert_eq!(
            AuthoritySource::Comptox.canonicalize("DTXSID3031864").unwrap(),
            "https://comptox.epa.gov/dashboard/chemical/details/DTXSID3031864"
        );
        assert!(AuthoritySource::Comptox.canonicalize("CAS-335-67-1").is_err());
    }

    #[test]
    fn iri_syntax() {
        assert!(is_absolute_iri("https://ex.org/t/empty"));
        assert!(is_absolute_iri("urn:uuid:1234"));
        assert!(!is_absolute_iri("ex.org/t"));
        assert!(!is_absolute_iri("https://ex.org/a b"));
        assert!(!is_absolute_iri(""));
    }
}
