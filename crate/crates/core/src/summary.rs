//! Aggregate reporting: counts per order and a per-class table with
//! gem-complexity (minimum order / 2 − 1).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classification::{ClassRecord, LABEL_S4};
use crate::io::{CatalogueFile, CatalogueKind};

/// Catalogue sizes at one order; `None` means no file was supplied.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderCounts {
    pub s3: Option<usize>,
    pub bipartite: Option<usize>,
    pub nonbipartite: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRow {
    pub class_id: usize,
    pub label: Option<String>,
    pub size: usize,
    pub sizes_by_order: BTreeMap<usize, usize>,
    pub min_order: usize,
    /// Gem-complexity witnessed by the smallest member.
    pub complexity: usize,
}

/// A manifold with handles whose complexity bound is computed from a
/// labelled handle-free class rather than catalogued: k = p − 1 + 4h.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedRow {
    pub manifold: String,
    pub from: String,
    pub handles: usize,
    pub orientable: bool,
    pub complexity: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogueSummary {
    pub orders: BTreeMap<usize, OrderCounts>,
    pub classes: Vec<ClassRow>,
    pub derived: Vec<DerivedRow>,
}

/// Handles considered for derived rows.
pub const DERIVED_HANDLES: usize = 2;

impl CatalogueSummary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_catalogue(&mut self, file: &CatalogueFile) {
        let entry = self.orders.entry(file.order).or_default();
        let slot = match file.kind {
            CatalogueKind::S3 => &mut entry.s3,
            CatalogueKind::Bipartite => &mut entry.bipartite,
            CatalogueKind::Nonbipartite => &mut entry.nonbipartite,
        };
        *slot = Some(slot.unwrap_or(0) + file.codes.len());
    }

    /// Adds the class table of a partition report and recomputes derived rows.
    pub fn add_classes(&mut self, report: &[ClassRecord]) {
        for r in report {
            let Some(&min_order) = r.sizes_by_order.keys().next() else {
                continue;
            };
            self.classes.push(ClassRow {
                class_id: r.class_id,
                label: r.label.clone(),
                size: r.size,
                sizes_by_order: r.sizes_by_order.clone(),
                min_order,
                complexity: (min_order / 2).saturating_sub(1),
            });
        }
        self.classes.sort_by_key(|c| (c.min_order, c.class_id));
        self.derived = derived_rows(&self.classes);
    }

    /// Complexity of the class carrying `label`, if any.
    pub fn complexity_of(&self, label: &str) -> Option<usize> {
        self.classes
            .iter()
            .find(|c| c.label.as_deref() == Some(label))
            .map(|c| c.complexity)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if !self.orders.is_empty() {
            writeln!(out, "{:>6} {:>10} {:>10} {:>10}", "order", "S3", "C", "C~").unwrap();
            let cell = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |n| n.to_string());
            for (order, c) in &self.orders {
                writeln!(
                    out,
                    "{:>6} {:>10} {:>10} {:>10}",
                    order,
                    cell(c.s3),
                    cell(c.bipartite),
                    cell(c.nonbipartite)
                )
                .unwrap();
            }
        }
        if !self.classes.is_empty() {
            if !out.is_empty() {
                out.push('\n');
            }
            writeln!(out, "{:>5} {:<12} {:>6} {:>9} {:>3}  sizes", "class", "label", "size", "min-order", "k")
                .unwrap();
            for c in &self.classes {
                let sizes: Vec<String> = c.sizes_by_order.iter().map(|(o, n)| format!("{o}:{n}")).collect();
                writeln!(
                    out,
                    "{:>5} {:<12} {:>6} {:>9} {:>3}  {}",
                    c.class_id,
                    c.label.as_deref().unwrap_or("-"),
                    c.size,
                    c.min_order,
                    c.complexity,
                    sizes.join(" ")
                )
                .unwrap();
            }
        }
        if !self.derived.is_empty() {
            out.push('\n');
            writeln!(out, "{:<24} {:>3}  from", "derived", "k").unwrap();
            for d in &self.derived {
                writeln!(out, "{:<24} {:>3}  {} + {} handle(s)", d.manifold, d.complexity, d.from, d.handles).unwrap();
            }
        }
        out
    }
}

fn handle_name(h: usize, orientable: bool) -> String {
    let base = if orientable { "S1xS3" } else { "S1x~S3" };
    if h == 1 {
        base.to_string()
    } else {
        format!("#{h}({base})")
    }
}

fn derived_rows(classes: &[ClassRow]) -> Vec<DerivedRow> {
    let mut out = Vec::new();
    for c in classes {
        let Some(label) = c.label.as_deref() else {
            continue;
        };
        for h in 1..=DERIVED_HANDLES {
            for orientable in [true, false] {
                let handles = handle_name(h, orientable);
                let manifold = if label == LABEL_S4 {
                    handles
                } else {
                    format!("{label}#({handles})")
                };
                out.push(DerivedRow {
                    manifold,
                    from: label.to_string(),
                    handles: h,
                    orientable,
                    complexity: c.complexity + 4 * h,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: usize, label: Option<&str>, sizes: &[(usize, usize)]) -> ClassRecord {
        ClassRecord {
            class_id: id,
            label: label.map(str::to_string),
            size: sizes.iter().map(|s| s.1).sum(),
            sizes_by_order: sizes.iter().copied().collect(),
            members: Vec::new(),
            merged_by: Vec::new(),
        }
    }

    #[test]
    fn complexities_and_derived_rows() {
        let mut s = CatalogueSummary::new();
        s.add_classes(&[
            record(0, Some("S4"), &[(2, 1)]),
            record(1, Some("CP2"), &[(8, 1), (14, 1)]),
        ]);
        assert_eq!(s.complexity_of("S4"), Some(0));
        assert_eq!(s.complexity_of("CP2"), Some(3));
        let k = |name: &str| s.derived.iter().find(|d| d.manifold == name).unwrap().complexity;
        assert_eq!(k("S1xS3"), 4);
        assert_eq!(k("S1x~S3"), 4);
        assert_eq!(k("#2(S1xS3)"), 8);
        assert_eq!(k("CP2#(S1xS3)"), 7);
        assert_eq!(k("CP2#(S1x~S3)"), 7);
    }

    #[test]
    fn counts_accumulate() {
        let mut s = CatalogueSummary::new();
        s.add_catalogue(&CatalogueFile::new(4, CatalogueKind::Bipartite, Vec::new()));
        assert_eq!(s.orders[&4].bipartite, Some(0));
        assert_eq!(s.orders[&4].s3, None);
        assert!(s.render().contains("     4          -          0          -"));
    }
}
