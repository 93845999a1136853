//! Addresses into templates (`NodePath`, keys only) and instances
//! (`ValuePath`, keys with optional repetition indices).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid path `{0}`")]
pub struct PathSyntaxError(pub String);

fn is_key(s: &str) -> bool {
    let mut bytes = s.bytes();
    matches!(bytes.next(), Some(b'a'..=b'z'))
        && bytes.all(|b| matches!(b, b'a'..=b'z' | b'0'..=b'9' | b'_'))
}

/// One segment of a [`ValuePath`]: a key with an optional zero-based index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segment {
    pub key: String,
    pub index: Option<usize>,
}

impl Segment {
    pub fn new(key: impl Into<String>, index: Option<usize>) -> Self {
        Self { key: key.into(), index }
    }
}

/// Slash-separated instance address such as `authors[1]/name`.
///
/// The empty path denotes the instance root.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValuePath(Vec<Segment>);

impl ValuePath {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn segments(&self) -> &[Segment] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, key: &str, index: Option<usize>) -> Self {
        let mut segs = self.0.clone();
        segs.push(Segment::new(key, index));
        Self(segs)
    }

    /// The same path with the last segment's index removed.
    pub fn without_last_index(&self) -> Self {
        let mut segs = self.0.clone();
        if let Some(last) = segs.last_mut() {
            last.index = None;
        }
        Self(segs)
    }

    /// Whether `self` equals `other` or lies beneath it.
    pub fn starts_with(&self, other: &ValuePath) -> bool {
        let n = other.0.len();
        n <= self.0.len()
            && self.0.iter().zip(&other.0).enumerate().all(|(i, (a, b))| {
                a.key == b.key && (a.index == b.index || (i + 1 == n && b.index.is_none()))
            })
    }

    /// Keys only, dropping all indices.
    pub fn node_path(&self) -> NodePath {
        NodePath(self.0.iter().map(|s| s.key.clone()).collect())
    }
}

impl FromStr for ValuePath {
    type Err = PathSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Ok(Self::root());
        }
        let err = || PathSyntaxError(s.to_owned());
        let segs = s
            .split('/')
            .map(|part| {
                let (key, index) = match part.split_once('[') {
                    Some((k, rest)) => {
                        let digits = rest.strip_suffix(']').ok_or_else(err)?;
                        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                            return Err(err());
                        }
                        (k, Some(digits.parse().map_err(|_| err())?))
                    }
                    None => (part, None),
                };
                if !is_key(key) {
                    return Err(err());
                }
                Ok(Segment::new(key, index))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self(segs))
    }
}

impl fmt::Display for ValuePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            f.write_str(&seg.key)?;
            if let Some(idx) = seg.index {
                write!(f, "[{idx}]")?;
            }
        }
        Ok(())
    }
}

impl Serialize for ValuePath {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ValuePath {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Template address: keys only, e.g. `authors/name`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodePath(Vec<String>);

impl NodePath {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn keys(&self) -> &[String] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, key: &str) -> Self {
        let mut keys = self.0.clone();
        keys.push(key.to_owned());
        Self(keys)
    }
}

impl FromStr for NodePath {
    type Err = PathSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Ok(Self::root());
        }
        let keys: Vec<String> = s.split('/').map(str::to_owned).collect();
        if keys.iter().all(|k| is_key(k)) {
            Ok(Self(keys))
        } else {
            Err(PathSyntaxError(s.to_owned()))
        }
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("/"))
    }
}

impl Serialize for NodePath {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub(crate) fn valid_key(s: &str) -> bool {
    is_key(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_indexed_segments() {
        let p: ValuePath = "authors[1]/name".parse().unwrap();
        assert_eq!(
            p.segments(),
            &[Segment::new("authors", Some(1)), Segment::new("name", None)]
        );
        assert_eq!(p.to_string(), "authors[1]/name");
        assert_eq!(p.node_path().to_string(), "authors/name");
    }

    #[test]
    fn rejects_bad_grammar() {
        for bad in ["Authors", "a//b", "a[]", "a[x]", "a[1", "a/", "1a", "a[1]b"] {
            assert!(bad.parse::<ValuePath>().is_err(), "{bad}");
        }
    }

    #[test]
    fn prefix_matching() {
        let p: ValuePath = "authors[1]/name".parse().unwrap();
        assert!(p.starts_with(&"authors[1]".parse().unwrap()));
        assert!(p.starts_with(&"authors".parse().unwrap()));
        assert!(!p.starts_with(&"authors[0]".parse().unwrap()));
        assert!(p.starts_with(&ValuePath::root()));
        assert!(!"author".parse::<ValuePath>().unwrap().starts_with(&p));
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(p in r"[a-z][a-z0-9_]{0,5}(\[[0-9]{1,3}\])?(/[a-z][a-z0-9_]{0,5}(\[[0-9]{1,3}\])?){0,3}") {
            let parsed: ValuePath = p.parse().unwrap();
            // Leading zeros in indices normalize away.
            let again: ValuePath = parsed.to_string().parse().unwrap();
            prop_assert_eq!(parsed, again);
        }
    }
}
