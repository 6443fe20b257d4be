//! Canonical file formats.
//!
//! Structures travel as UTF-8 JSON documents with top-level fields
//! `relations`, `sigma`, `universe` (emitted in that order, which is
//! lexicographic), sorted map keys, tuples in universe order, LF line
//! endings, and a trailing newline. The writer is bit-exact: writing,
//! parsing, and re-writing reproduces the same bytes. Unknown fields are
//! rejected.
//!
//! Decompositions, covers, and coalgebras travel as line-oriented text
//! mirroring their fields. Those formats separate element names with
//! whitespace, so they require names free of whitespace; structure files
//! quote names and carry arbitrary ones (in particular the play encodings
//! produced when a lifted structure is written out).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::comonad::{encode_play, parse_play};
use crate::decomposition::{Coalgebra, LinearForestCover, PathDecomposition};
use crate::error::{Error, Result};
use crate::structure::{Element, Signature, Structure};

/// Characters that element names must avoid to take part in play
/// encodings: the encoding separators plus whitespace.
pub const RESERVED_NAME_CHARS: [char; 3] = [':', ';', '@'];

/// Checks that every element name is free of whitespace (required by the
/// line-oriented formats).
pub fn names_are_plain(a: &Structure) -> Result<()> {
    for e in 0..a.size() {
        let name = a.element_name(e);
        if name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidStructure(format!(
                "element name {name:?} contains whitespace, which the text formats cannot carry"
            )));
        }
    }
    Ok(())
}

/// Checks that every element name can appear inside a play encoding:
/// plain, and free of the separators `:`, `;`, `@`.
pub fn names_are_encodable(a: &Structure) -> Result<()> {
    names_are_plain(a)?;
    for e in 0..a.size() {
        let name = a.element_name(e);
        if name.chars().any(|c| RESERVED_NAME_CHARS.contains(&c)) {
            return Err(Error::InvalidStructure(format!(
                "element name {name:?} contains a play-encoding separator (one of ':', ';', '@')"
            )));
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStructure {
    relations: BTreeMap<String, Vec<Vec<String>>>,
    sigma: BTreeMap<String, usize>,
    universe: Vec<String>,
}

/// Serializes a structure to its canonical document.
pub fn structure_to_string(a: &Structure) -> String {
    let mut relations: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    for (name, _arity) in a.signature().entries() {
        let tuples: Vec<Vec<String>> = a
            .tuples(name)
            .iter()
            .map(|t| t.iter().map(|&e| a.element_name(e).to_string()).collect())
            .collect();
        relations.insert(name.to_string(), tuples);
    }
    let raw = RawStructure {
        relations,
        sigma: a
            .signature()
            .entries()
            .map(|(n, r)| (n.to_string(), r))
            .collect(),
        universe: (0..a.size()).map(|e| a.element_name(e).to_string()).collect(),
    };
    let mut text = serde_json::to_string_pretty(&raw).expect("structure serialization");
    text.push('\n');
    text
}

/// Parses a canonical structure document, resolving element names to dense
/// indices in universe order.
pub fn structure_from_str(text: &str) -> Result<Structure> {
    let raw: RawStructure = serde_json::from_str(text)
        .map_err(|e| Error::ParseError(format!("structure document: {e}")))?;
    let signature = Signature::new(raw.sigma.iter().map(|(n, &r)| (n.as_str(), r)))?;
    let index: BTreeMap<&str, Element> = raw
        .universe
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    if index.len() != raw.universe.len() {
        return Err(Error::ParseError("duplicate element name".into()));
    }
    let mut relations: BTreeMap<String, Vec<Vec<Element>>> = BTreeMap::new();
    for (name, tuples) in &raw.relations {
        let resolved: Vec<Vec<Element>> = tuples
            .iter()
            .map(|t| {
                t.iter()
                    .map(|n| {
                        index.get(n.as_str()).copied().ok_or_else(|| {
                            Error::ParseError(format!(
                                "relation {name} references unknown element {n:?}"
                            ))
                        })
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        relations.insert(name.clone(), resolved);
    }
    Structure::new(signature, raw.universe, relations)
}

/// Resolves one element name against a structure.
fn resolve(a: &Structure, name: &str) -> Result<Element> {
    (0..a.size())
        .find(|&e| a.element_name(e) == name)
        .ok_or_else(|| Error::ParseError(format!("unknown element {name:?}")))
}

/// Serializes a path decomposition: one `bag` line per bag, elements by
/// name in index order.
pub fn pd_to_string(a: &Structure, pd: &PathDecomposition) -> Result<String> {
    names_are_plain(a)?;
    let mut out = String::new();
    for bag in &pd.bags {
        out.push_str("bag");
        for &e in bag {
            out.push(' ');
            out.push_str(a.element_name(e));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parses the path-decomposition text format.
pub fn pd_from_str(text: &str, a: &Structure) -> Result<PathDecomposition> {
    let mut bags = Vec::new();
    for line in nonempty_lines(text) {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("bag") => {
                let bag = parts.map(|n| resolve(a, n)).collect::<Result<_>>()?;
                bags.push(bag);
            }
            other => {
                return Err(Error::ParseError(format!(
                    "expected a 'bag' line, found {other:?}"
                )))
            }
        }
    }
    Ok(PathDecomposition::new(bags))
}

/// Serializes a cover: a `k` line, one `chain` line per chain, and one
/// `pebble` line per element in index order.
pub fn cover_to_string(a: &Structure, cover: &LinearForestCover) -> Result<String> {
    names_are_plain(a)?;
    let mut out = format!("k {}\n", cover.k);
    for chain in &cover.chains {
        out.push_str("chain");
        for &e in chain {
            out.push(' ');
            out.push_str(a.element_name(e));
        }
        out.push('\n');
    }
    for (e, &p) in cover.pebbling.iter().enumerate() {
        out.push_str(&format!("pebble {} {p}\n", a.element_name(e)));
    }
    Ok(out)
}

/// Parses the cover text format.
pub fn cover_from_str(text: &str, a: &Structure) -> Result<LinearForestCover> {
    let mut k = None;
    let mut chains = Vec::new();
    let mut pebbling = vec![0usize; a.size()];
    let mut pebbled = vec![false; a.size()];
    for line in nonempty_lines(text) {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("k") => {
                let value = parts
                    .next()
                    .ok_or_else(|| Error::ParseError("k line without a value".into()))?;
                k = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| Error::ParseError(format!("bad pebble count {value:?}")))?,
                );
            }
            Some("chain") => {
                let chain = parts.map(|n| resolve(a, n)).collect::<Result<_>>()?;
                chains.push(chain);
            }
            Some("pebble") => {
                let name = parts
                    .next()
                    .ok_or_else(|| Error::ParseError("pebble line without an element".into()))?;
                let value = parts
                    .next()
                    .ok_or_else(|| Error::ParseError("pebble line without a pebble".into()))?;
                let e = resolve(a, name)?;
                pebbling[e] = value
                    .parse::<usize>()
                    .map_err(|_| Error::ParseError(format!("bad pebble {value:?}")))?;
                pebbled[e] = true;
            }
            other => {
                return Err(Error::ParseError(format!(
                    "expected a 'k', 'chain', or 'pebble' line, found {other:?}"
                )))
            }
        }
    }
    let k = k.ok_or_else(|| Error::ParseError("cover without a k line".into()))?;
    if let Some(e) = pebbled.iter().position(|&b| !b) {
        return Err(Error::ParseError(format!(
            "element {} has no pebble line",
            a.element_name(e)
        )));
    }
    Ok(LinearForestCover { k, chains, pebbling })
}

/// Serializes a coalgebra: a `k` line plus one `name -> play` line per
/// element in index order, using the play encoding.
pub fn coalgebra_to_string(a: &Structure, coalg: &Coalgebra) -> Result<String> {
    names_are_encodable(a)?;
    let mut out = format!("k {}\n", coalg.k);
    for (e, play) in coalg.alpha.iter().enumerate() {
        out.push_str(&format!("{} -> {}\n", a.element_name(e), encode_play(play, a)));
    }
    Ok(out)
}

/// Parses the coalgebra text format.
pub fn coalgebra_from_str(text: &str, a: &Structure) -> Result<Coalgebra> {
    let mut lines = nonempty_lines(text);
    let header = lines
        .next()
        .ok_or_else(|| Error::ParseError("empty coalgebra document".into()))?;
    let k = header
        .strip_prefix("k ")
        .and_then(|v| v.trim().parse::<usize>().ok())
        .ok_or_else(|| Error::ParseError(format!("expected a 'k' header, found {header:?}")))?;
    let mut alpha: Vec<Option<crate::comonad::IndexedPlay<Element>>> = vec![None; a.size()];
    for line in lines {
        let (name, play_text) = line
            .split_once(" -> ")
            .ok_or_else(|| Error::ParseError(format!("expected 'name -> play', found {line:?}")))?;
        let e = resolve(a, name.trim())?;
        if alpha[e].is_some() {
            return Err(Error::ParseError(format!(
                "element {name:?} is mapped twice"
            )));
        }
        alpha[e] = Some(parse_play(play_text.trim(), a, k)?);
    }
    let alpha = alpha
        .into_iter()
        .enumerate()
        .map(|(e, p)| {
            p.ok_or_else(|| {
                Error::ParseError(format!("element {} is not mapped", a.element_name(e)))
            })
        })
        .collect::<Result<_>>()?;
    Ok(Coalgebra { k, alpha })
}

fn nonempty_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{from_directed_edges, path};
    use crate::decomposition::{cover_to_coalgebra, pathwidth_exact, pd_to_cover};

    #[test]
    fn structure_document_round_trip_is_bit_exact() {
        let a = from_directed_edges(3, &[(0, 1), (1, 2), (2, 0)]);
        let text = structure_to_string(&a);
        let parsed = structure_from_str(&text).unwrap();
        assert_eq!(parsed, a);
        assert_eq!(structure_to_string(&parsed), text);
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn structure_document_golden() {
        let a = from_directed_edges(2, &[(0, 1)]);
        let expected = "{\n  \"relations\": {\n    \"E\": [\n      [\n        \"0\",\n        \"1\"\n      ]\n    ]\n  },\n  \"sigma\": {\n    \"E\": 2\n  },\n  \"universe\": [\n    \"0\",\n    \"1\"\n  ]\n}\n";
        assert_eq!(structure_to_string(&a), expected);
    }

    #[test]
    fn structure_document_rejections() {
        // Unknown top-level field.
        let bad = r#"{"relations": {}, "sigma": {}, "universe": [], "extra": 1}"#;
        assert!(structure_from_str(bad).is_err());
        // Unknown element in a tuple.
        let bad = r#"{"relations": {"E": [["a", "zzz"]]}, "sigma": {"E": 2}, "universe": ["a", "b"]}"#;
        assert!(structure_from_str(bad).is_err());
        // Relation missing from sigma.
        let bad = r#"{"relations": {"E": []}, "sigma": {}, "universe": []}"#;
        assert!(structure_from_str(bad).is_err());
        // Duplicate element name.
        let bad = r#"{"relations": {}, "sigma": {}, "universe": ["a", "a"]}"#;
        assert!(structure_from_str(bad).is_err());
    }

    #[test]
    fn structure_document_carries_encoded_names() {
        // Names with the play-encoding separators survive the JSON format.
        let a = Structure::new(
            Signature::new([("E", 2)]).unwrap(),
            vec!["1:0;2:1@2".into(), "1:0@1".into()],
            BTreeMap::from([("E".to_string(), vec![vec![0, 1]])]),
        )
        .unwrap();
        let text = structure_to_string(&a);
        assert_eq!(structure_from_str(&text).unwrap(), a);
        // But such names are refused by the line formats.
        assert!(names_are_encodable(&a).is_err());
    }

    #[test]
    fn pd_cover_coalgebra_text_round_trips() {
        let a = path(3);
        let (_, pd) = pathwidth_exact(&a).unwrap();
        let text = pd_to_string(&a, &pd).unwrap();
        assert_eq!(pd_from_str(&text, &a).unwrap(), pd);

        let cover = pd_to_cover(&a, &pd).unwrap();
        let text = cover_to_string(&a, &cover).unwrap();
        assert_eq!(cover_from_str(&text, &a).unwrap(), cover);

        let coalg = cover_to_coalgebra(&a, &cover).unwrap();
        let text = coalgebra_to_string(&a, &coalg).unwrap();
        let parsed = coalgebra_from_str(&text, &a).unwrap();
        assert_eq!(parsed, coalg);
    }

    #[test]
    fn cover_text_golden() {
        let a = path(3);
        let cover = LinearForestCover {
            k: 2,
            chains: vec![vec![0, 1, 2]],
            pebbling: vec![1, 2, 1],
        };
        let text = cover_to_string(&a, &cover).unwrap();
        assert_eq!(text, "k 2\nchain 0 1 2\npebble 0 1\npebble 1 2\npebble 2 1\n");
        let coalg = cover_to_coalgebra(&a, &cover).unwrap();
        let text = coalgebra_to_string(&a, &coalg).unwrap();
        assert_eq!(
            text,
            "k 2\n0 -> 1:0;2:1;1:2@1\n1 -> 1:0;2:1;1:2@2\n2 -> 1:0;2:1;1:2@3\n"
        );
    }

    #[test]
    fn text_format_parse_errors() {
        let a = path(3);
        assert!(pd_from_str("sack 0 1\n", &a).is_err());
        assert!(cover_from_str("chain 0 1 2\n", &a).is_err());
        assert!(cover_from_str("k 2\nchain 0 1 2\npebble 0 1\n", &a).is_err());
        assert!(coalgebra_from_str("", &a).is_err());
        assert!(coalgebra_from_str("k 1\n0 -> 1:0@1\n", &a).is_err());
    }
}
