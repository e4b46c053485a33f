//! Nested key-value trees and their JSON / XML renderings.

use std::fmt::Write as _;

use super::{Chooser, Generator};

/// A generated document: maps with string keys, scalar leaves.
#[derive(Debug, Clone, PartialEq)]
pub enum Tree {
    Map(Vec<(String, Tree)>),
    Str(String),
    Int(i64),
    Real(f64),
    Bool(bool),
}

impl Tree {
    /// Number of map levels; a leaf has depth 0, a flat map depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Tree::Map(entries) => 1 + entries.iter().map(|(_, v)| v.depth()).max().unwrap_or(0),
            _ => 0,
        }
    }

    /// Text a leaf carries in the XML rendering.
    pub fn leaf_text(&self) -> Option<String> {
        match self {
            Tree::Map(_) => None,
            Tree::Str(s) => Some(s.clone()),
            Tree::Int(i) => Some(i.to_string()),
            Tree::Real(r) => Some(json_real(*r)),
            Tree::Bool(b) => Some(b.to_string()),
        }
    }
}

const KEYS: [&str; 12] = [
    "id", "name", "value", "item", "data", "kind", "count", "flag", "note", "list", "meta", "x",
];

const STRING_ALPHABET: &[u8] =
    b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 <>&\"'";
const MAX_STRING_LEN: usize = 8;
const INT_RANGE: i64 = 1000;
const REAL_HUNDREDTHS: i64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureSyntax {
    Json,
    Xml,
}

/// Generates a [`Tree`] and serialises it.
#[derive(Debug, Clone)]
pub struct StructureGenerator {
    syntax: StructureSyntax,
    max_depth: usize,
    fan_out: usize,
}

impl StructureGenerator {
    pub fn new(syntax: StructureSyntax, max_depth: usize, fan_out: usize) -> Self {
        StructureGenerator {
            syntax,
            max_depth: max_depth.max(1),
            fan_out,
        }
    }

    /// Root map at depth 1; nested maps only while depth stays within
    /// `max_depth`; at most `fan_out` entries per map.
    pub fn generate_tree(&self, chooser: &mut dyn Chooser) -> Tree {
        self.map(chooser, 1)
    }

    fn map(&self, chooser: &mut dyn Chooser, depth: usize) -> Tree {
        let len = chooser.choose("struct.fan_out", self.fan_out + 1);
        let mut entries: Vec<(String, Tree)> = Vec::with_capacity(len);
        for _ in 0..len {
            let mut key = KEYS[chooser.choose("struct.key", KEYS.len())].to_owned();
            if entries.iter().any(|(k, _)| *k == key) {
                key = format!("{key}_{}", entries.len());
            }
            let nested = depth < self.max_depth;
            let kinds = if nested { 5 } else { 4 };
            let value = match chooser.choose("struct.kind", kinds) {
                0 => Tree::Str(string(chooser)),
                1 => Tree::Int(
                    chooser.choose("struct.int", 2 * INT_RANGE as usize + 1) as i64 - INT_RANGE,
                ),
                2 => {
                    let hundredths = chooser.choose("struct.real", 2 * REAL_HUNDREDTHS as usize + 1)
                        as i64
                        - REAL_HUNDREDTHS;
                    Tree::Real(hundredths as f64 / 100.0)
                }
                3 => Tree::Bool(chooser.choose("struct.bool", 2) == 1),
                _ => self.map(chooser, depth + 1),
            };
            entries.push((key, value));
        }
        Tree::Map(entries)
    }
}

fn string(chooser: &mut dyn Chooser) -> String {
    let len = chooser.choose("struct.str_len", MAX_STRING_LEN + 1);
    (0..len)
        .map(|_| STRING_ALPHABET[chooser.choose("struct.char", STRING_ALPHABET.len())] as char)
        .collect()
}

impl Generator for StructureGenerator {
    fn name(&self) -> &'static str {
        match self.syntax {
            StructureSyntax::Json => "json",
            StructureSyntax::Xml => "xml",
        }
    }

    fn generate(&self, chooser: &mut dyn Chooser) -> String {
        let tree = self.generate_tree(chooser);
        let out = match self.syntax {
            StructureSyntax::Json => serialize_json(&tree),
            StructureSyntax::Xml => serialize_xml(&tree),
        };
        out.expect("generated trees are always representable")
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SerializationError {
    #[error("`{0}` is not a valid XML element name")]
    ElementName(String),
    #[error("non-finite real {0}")]
    NonFinite(f64),
    #[error("XML documents need a map at the root")]
    LeafRoot,
}

fn json_real(r: f64) -> String {
    serde_json::to_string(&r).unwrap_or_else(|_| r.to_string())
}

/// Compact JSON, keys in tree order.
pub fn serialize_json(tree: &Tree) -> Result<String, SerializationError> {
    let mut out = String::new();
    write_json(tree, &mut out)?;
    Ok(out)
}

fn write_json(tree: &Tree, out: &mut String) -> Result<(), SerializationError> {
    match tree {
        Tree::Map(entries) => {
            out.push('{');
            for (i, (k, v)) in entries.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("strings serialise"));
                out.push(':');
                write_json(v, out)?;
            }
            out.push('}');
        }
        Tree::Str(s) => out.push_str(&serde_json::to_string(s).expect("strings serialise")),
        Tree::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Tree::Real(r) if !r.is_finite() => return Err(SerializationError::NonFinite(*r)),
        Tree::Real(r) => out.push_str(&json_real(*r)),
        Tree::Bool(b) => {
            let _ = write!(out, "{b}");
        }
    }
    Ok(())
}

/// One `<root>` element, keys as element names, leaves as text content.
pub fn serialize_xml(tree: &Tree) -> Result<String, SerializationError> {
    let Tree::Map(entries) = tree else {
        return Err(SerializationError::LeafRoot);
    };
    let mut out = String::from("<root>");
    write_xml_children(entries, &mut out)?;
    out.push_str("</root>");
    Ok(out)
}

fn write_xml_children(
    entries: &[(String, Tree)],
    out: &mut String,
) -> Result<(), SerializationError> {
    for (key, value) in entries {
        if !is_element_name(key) {
            return Err(SerializationError::ElementName(key.clone()));
        }
        let _ = write!(out, "<{key}>");
        match value {
            Tree::Map(children) => write_xml_children(children, out)?,
            Tree::Real(r) if !r.is_finite() => return Err(SerializationError::NonFinite(*r)),
            leaf => escape_xml(&leaf.leaf_text().expect("leaf"), out),
        }
        let _ = write!(out, "</{key}>");
    }
    Ok(())
}

fn is_element_name(key: &str) -> bool {
    let mut chars = key.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
        && !key.to_ascii_lowercase().starts_with("xml")
}

fn escape_xml(text: &str, out: &mut String) {
    for c in text.chars() {
        match c {
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::RandomChooser;
    use crate::rng::{derive, Stream};

    fn sample_tree(g: &StructureGenerator, seed: u64) -> Tree {
        let mut rng = derive(seed, Stream::Custom(0), 0);
        g.generate_tree(&mut RandomChooser::new(&mut rng, seed))
    }

    #[test]
    fn empty_and_tiny_maps() {
        assert_eq!(serialize_json(&Tree::Map(vec![])).unwrap(), "{}");
        assert_eq!(serialize_xml(&Tree::Map(vec![])).unwrap(), "<root></root>");
        let t = Tree::Map(vec![("a".into(), Tree::Int(1))]);
        assert_eq!(serialize_json(&t).unwrap(), r#"{"a":1}"#);
        assert_eq!(serialize_xml(&t).unwrap(), "<root><a>1</a></root>");
    }

    #[test]
    fn escaping() {
        let t = Tree::Map(vec![("s".into(), Tree::Str("<a&\"b'>".into()))]);
        assert_eq!(serialize_json(&t).unwrap(), r#"{"s":"<a&\"b'>"}"#);
        assert_eq!(
            serialize_xml(&t).unwrap(),
            "<root><s>&lt;a&amp;&quot;b&apos;&gt;</s></root>"
        );
    }

    #[test]
    fn bad_keys_and_reals_are_rejected() {
        let t = Tree::Map(vec![("1a".into(), Tree::Bool(true))]);
        assert_eq!(
            serialize_xml(&t),
            Err(SerializationError::ElementName("1a".into()))
        );
        let t = Tree::Map(vec![("a".into(), Tree::Real(f64::NAN))]);
        assert!(serialize_json(&t).is_err());
        assert!(serialize_xml(&t).is_err());
        assert_eq!(
            serialize_xml(&Tree::Int(1)),
            Err(SerializationError::LeafRoot)
        );
    }

    #[test]
    fn depth_bound_one_is_flat() {
        let g = StructureGenerator::new(StructureSyntax::Json, 1, 5);
        for seed in 0..500 {
            assert!(sample_tree(&g, seed).depth() <= 1);
        }
    }

    #[test]
    fn depth_and_fan_out_bounds_hold() {
        let g = StructureGenerator::new(StructureSyntax::Json, 3, 4);
        fn max_fan_out(t: &Tree) -> usize {
            match t {
                Tree::Map(e) => e
                    .iter()
                    .map(|(_, v)| max_fan_out(v))
                    .max()
                    .unwrap_or(0)
                    .max(e.len()),
                _ => 0,
            }
        }
        for seed in 0..500 {
            let t = sample_tree(&g, seed);
            assert!(t.depth() <= 3);
            assert!(max_fan_out(&t) <= 4);
        }
    }

    #[test]
    fn seed_snapshot() {
        let g = StructureGenerator::new(StructureSyntax::Json, 6, 5);
        let t = sample_tree(&g, 7);
        assert_eq!(
            serialize_json(&t).unwrap(),
            r#"{"note":"F&VQ4F<","note_1":true,"name":false,"data":false}"#
        );
    }
}
