//! Text formats: gems, catalogue files, facet lists and JSON-lines records.
//!
//! Gem text: a header line `colours order`, then one line per colour with
//! the 1-based partner of each vertex. Catalogue file: a header line
//! `# gemcat catalogue n=4 order=<2p> kind=<s3|bipartite|nonbipartite>`,
//! then one code per line, sorted. Facet file: `n vertex_count facet_count`,
//! then one facet per line. Blank lines and lines starting with `#` (other
//! than a catalogue header) are ignored.

use std::fmt;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::code::Code;
use crate::graph::{ColouredGraph, GraphError};
use crate::ingest::FacetComplex;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl FormatError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        FormatError {
            line,
            message: message.into(),
        }
    }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_numbers(line: usize, s: &str) -> Result<Vec<usize>, FormatError> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| FormatError::new(line, format!("expected a non-negative integer, found {t:?}")))
        })
        .collect()
}

/// Parses a gem in text format. The graph must be connected.
pub fn parse_gem(text: &str) -> Result<ColouredGraph, FormatError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| FormatError::new(1, "empty input"))?;
    let h = parse_numbers(hline, header)?;
    let [colours, order] = h[..] else {
        return Err(FormatError::new(hline, "header must be `colours order`"));
    };
    if colours == 0 || colours > crate::graph::MAX_COLOURS {
        return Err(FormatError::new(hline, format!("unsupported number of colours {colours}")));
    }
    let mut matchings = Vec::with_capacity(colours);
    let mut row_lines = Vec::with_capacity(colours);
    for c in 0..colours {
        let (ln, row) = lines
            .next()
            .ok_or_else(|| FormatError::new(hline, format!("missing row for colour {c}")))?;
        let vals = parse_numbers(ln, row)?;
        if vals.len() != order {
            return Err(FormatError::new(
                ln,
                format!("colour {c}: expected {order} partners, found {}", vals.len()),
            ));
        }
        if let Some(&bad) = vals.iter().find(|&&v| v == 0 || v > order) {
            return Err(FormatError::new(ln, format!("vertex {bad} outside 1..={order}")));
        }
        matchings.push(vals.iter().map(|&v| v - 1).collect::<Vec<_>>());
        row_lines.push(ln);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(FormatError::new(ln, "unexpected extra line"));
    }
    ColouredGraph::build(order, &matchings, true).map_err(|e| {
        let line = match e {
            GraphError::FixedPoint { colour, .. } | GraphError::NotInvolution { colour, .. } => {
                row_lines[colour]
            }
            _ => hline,
        };
        FormatError::new(line, e.to_string())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CatalogueKind {
    S3,
    Bipartite,
    Nonbipartite,
}

impl fmt::Display for CatalogueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CatalogueKind::S3 => "s3",
            CatalogueKind::Bipartite => "bipartite",
            CatalogueKind::Nonbipartite => "nonbipartite",
        })
    }
}

impl FromStr for CatalogueKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "s3" => Ok(CatalogueKind::S3),
            "bipartite" => Ok(CatalogueKind::Bipartite),
            "nonbipartite" => Ok(CatalogueKind::Nonbipartite),
            other => Err(format!("unknown catalogue kind {other:?}")),
        }
    }
}

/// Contents of a catalogue file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogueFile {
    pub dimension: usize,
    pub order: usize,
    pub kind: CatalogueKind,
    pub codes: Vec<Code>,
}

impl CatalogueFile {
    pub fn new(order: usize, kind: CatalogueKind, mut codes: Vec<Code>) -> Self {
        codes.sort_by_cached_key(|c| c.to_string());
        codes.dedup();
        CatalogueFile {
            dimension: 4,
            order,
            kind,
            codes,
        }
    }

    /// Serialized file; codes sorted lexicographically as strings.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# gemcat catalogue n={} order={} kind={}\n",
            self.dimension, self.order, self.kind
        );
        let mut lines: Vec<String> = self.codes.iter().map(|c| c.to_string()).collect();
        lines.sort();
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
        out
    }
}

pub fn parse_catalogue(text: &str) -> Result<CatalogueFile, FormatError> {
    let mut all = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (hline, header) = all
        .find(|(_, l)| !l.is_empty())
        .ok_or_else(|| FormatError::new(1, "empty catalogue"))?;
    let rest = header
        .strip_prefix("# gemcat catalogue")
        .ok_or_else(|| FormatError::new(hline, "missing `# gemcat catalogue` header"))?;
    let mut dimension = None;
    let mut order = None;
    let mut kind = None;
    for field in rest.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| FormatError::new(hline, format!("malformed header field {field:?}")))?;
        let num = || {
            value
                .parse::<usize>()
                .map_err(|_| FormatError::new(hline, format!("bad value in {field:?}")))
        };
        match key {
            "n" => dimension = Some(num()?),
            "order" => order = Some(num()?),
            "kind" => kind = Some(value.parse().map_err(|e: String| FormatError::new(hline, e))?),
            _ => return Err(FormatError::new(hline, format!("unknown header field {key:?}"))),
        }
    }
    let (Some(dimension), Some(order), Some(kind)) = (dimension, order, kind) else {
        return Err(FormatError::new(hline, "header needs n=, order= and kind="));
    };
    let mut codes = Vec::new();
    for (ln, l) in all {
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let c: Code = l.parse().map_err(|e: crate::code::CodeError| FormatError::new(ln, e.to_string()))?;
        if c.order() != order || c.colours() != dimension + if kind == CatalogueKind::S3 { 0 } else { 1 } {
            return Err(FormatError::new(ln, "code does not match the header"));
        }
        codes.push(c);
    }
    Ok(CatalogueFile {
        dimension,
        order,
        kind,
        codes,
    })
}

/// Parses a facet list: `n vertex_count facet_count`, then `facet_count`
/// lines of `n + 1` vertex identifiers in `1..=vertex_count`.
pub fn parse_facets(text: &str) -> Result<FacetComplex, FormatError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| FormatError::new(1, "empty input"))?;
    let h = parse_numbers(hline, header)?;
    let [n, vertices, count] = h[..] else {
        return Err(FormatError::new(hline, "header must be `n vertex_count facet_count`"));
    };
    let mut facets = Vec::with_capacity(count);
    let mut last_line = hline;
    for _ in 0..count {
        let (ln, row) = lines
            .next()
            .ok_or_else(|| FormatError::new(last_line, format!("expected {count} facets")))?;
        let f = parse_numbers(ln, row)?;
        if f.len() != n + 1 {
            return Err(FormatError::new(ln, format!("facet must have {} vertices", n + 1)));
        }
        if let Some(&bad) = f.iter().find(|&&v| v == 0 || v > vertices) {
            return Err(FormatError::new(ln, format!("vertex {bad} outside 1..={vertices}")));
        }
        facets.push(f.iter().map(|&v| v - 1).collect());
        last_line = ln;
    }
    if let Some((ln, _)) = lines.next() {
        return Err(FormatError::new(ln, "unexpected extra line"));
    }
    FacetComplex::new(n, vertices, facets).map_err(|e| FormatError::new(hline, e.to_string()))
}

/// One JSON object per line.
pub fn to_json_lines<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for it in items {
        out.push_str(&serde_json::to_string(it).expect("serializable"));
        out.push('\n');
    }
    out
}

pub fn parse_json_lines<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, FormatError> {
    content_lines(text)
        .map(|(ln, l)| serde_json::from_str(l).map_err(|e| FormatError::new(ln, e.to_string())))
        .collect()
}
