//! Ownership registry: per-outlet owner shares, the owner-owns-owner graph,
//! and the ground-truth partition induced by resolved owners.
//!
//! An outlet's owner is the major partner (largest share), lifted to its
//! topmost ancestor in the owner graph.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;

/// Sentinel owner name for outlets without ownership information.
pub const UNKNOWN_OWNER: &str = "UNKNOWN";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OwnershipRecord {
    pub outlet: String,
    /// (owner name, share fraction). Shares sum to at most 1.
    pub owners: Vec<(String, f64)>,
    pub resolved_owner: String,
}

/// Owner-owns-owner relationships. Acyclic, at most one parent per owner.
#[derive(Debug, Clone, Default)]
pub struct OwnerGraph {
    parent: BTreeMap<String, String>,
}

impl OwnerGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_edge(&mut self, parent: &str, child: &str) -> Result<()> {
        if let Some(existing) = self.parent.get(child) {
            if existing != parent {
                return Err(Error::MultipleParents(child.to_string()));
            }
            return Ok(());
        }
        self.parent.insert(child.to_string(), parent.to_string());
        // Walk up from the new child; revisiting it means a cycle.
        let mut cur = parent;
        while let Some(next) = self.parent.get(cur) {
            if next == child || cur == child {
                self.parent.remove(child);
                return Err(Error::OwnerCycle(child.to_string()));
            }
            cur = next;
        }
        if cur == child {
            self.parent.remove(child);
            return Err(Error::OwnerCycle(child.to_string()));
        }
        Ok(())
    }

    /// Topmost ancestor of `owner` (itself if it has no parent).
    pub fn subsuming_owner<'a>(&'a self, owner: &'a str) -> &'a str {
        let mut cur = owner;
        while let Some(parent) = self.parent.get(cur) {
            cur = parent;
        }
        cur
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.parent.iter().map(|(c, p)| (p.as_str(), c.as_str()))
    }
}

/// Pick the single owner for a record: major partner, then subsumption.
/// Equal top shares are broken lexicographically, with a warning.
pub fn resolve_owner(record: &OwnershipRecord, graph: &OwnerGraph) -> String {
    let named: Vec<&(String, f64)> = record
        .owners
        .iter()
        .filter(|(name, _)| !name.is_empty() && name != UNKNOWN_OWNER)
        .collect();
    if named.is_empty() {
        return UNKNOWN_OWNER.to_string();
    }
    let top_share = named
        .iter()
        .map(|(_, s)| *s)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut top: Vec<&str> = named
        .iter()
        .filter(|(_, s)| *s == top_share)
        .map(|(n, _)| n.as_str())
        .collect();
    top.sort_unstable();
    top.dedup();
    if top.len() > 1 {
        log::warn!(
            "outlet {}: owners {:?} tie at share {}; picking {} lexicographically",
            record.outlet,
            top,
            top_share,
            top[0]
        );
    }
    graph.subsuming_owner(top[0]).to_string()
}

/// The loaded ownership registry.
#[derive(Debug, Clone)]
pub struct Registry {
    records: BTreeMap<String, OwnershipRecord>,
    graph: OwnerGraph,
}

impl Registry {
    pub fn from_parts(records: Vec<OwnershipRecord>, graph: OwnerGraph) -> Self {
        Registry {
            records: records.into_iter().map(|r| (r.outlet.clone(), r)).collect(),
            graph,
        }
    }

    /// Parse the registry CSV (`outlet,owner,share`, repeated rows per outlet)
    /// and the owner-graph CSV (`parent_owner,child_owner`). Header rows are
    /// recognized and skipped. Resolves every record's owner.
    pub fn load<R1: Read, R2: Read>(registry: R1, owner_graph: R2) -> Result<Self> {
        let graph = read_owner_graph(owner_graph)?;
        let mut owners: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();

        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(registry);
        for (idx, row) in rdr.records().enumerate() {
            let row = row?;
            let line = idx + 1;
            if row.iter().all(|f| f.trim().is_empty()) {
                continue;
            }
            let outlet = row
                .get(0)
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Error::MalformedRow {
                    line,
                    reason: "outlet missing".into(),
                })?;
            if line == 1 && outlet.eq_ignore_ascii_case("outlet") {
                continue;
            }
            let owner = row.get(1).map(str::trim).unwrap_or_default();
            let share_field = row.get(2).map(str::trim).unwrap_or_default();
            let entry = owners.entry(outlet.to_string()).or_default();
            if owner.is_empty() {
                // Row declares the outlet with unknown ownership.
                continue;
            }
            let share: f64 = if share_field.is_empty() {
                0.0
            } else {
                share_field.parse().map_err(|_| Error::MalformedRow {
                    line,
                    reason: format!("bad share {share_field:?}"),
                })?
            };
            if !(0.0..=1.0 + 1e-9).contains(&share) {
                return Err(Error::MalformedRow {
                    line,
                    reason: format!("share {share} outside [0, 1]"),
                });
            }
            entry.push((owner.to_string(), share));
        }

        let mut records = Vec::new();
        for (outlet, owner_list) in owners {
            let total: f64 = owner_list.iter().map(|(_, s)| s).sum();
            if total > 1.0 + 1e-9 {
                return Err(Error::MalformedRow {
                    line: 0,
                    reason: format!("outlet {outlet}: shares sum to {total}"),
                });
            }
            let mut record = OwnershipRecord {
                outlet,
                owners: owner_list,
                resolved_owner: UNKNOWN_OWNER.to_string(),
            };
            record.resolved_owner = resolve_owner(&record, &graph);
            records.push(record);
        }
        Ok(Registry::from_parts(records, graph))
    }

    pub fn load_files(registry: &Path, owner_graph: &Path) -> Result<Self> {
        let r = std::fs::File::open(registry)?;
        let g = std::fs::File::open(owner_graph)?;
        Self::load(std::io::BufReader::new(r), std::io::BufReader::new(g))
    }

    pub fn records(&self) -> impl Iterator<Item = &OwnershipRecord> {
        self.records.values()
    }

    pub fn graph(&self) -> &OwnerGraph {
        &self.graph
    }

    /// Resolved owner for an outlet; outlets without a record are UNKNOWN.
    pub fn resolved_owner(&self, outlet: &str) -> &str {
        self.records
            .get(outlet)
            .map(|r| r.resolved_owner.as_str())
            .unwrap_or(UNKNOWN_OWNER)
    }

    /// Outlets with equal resolved owners share a community; every
    /// UNKNOWN-owner outlet becomes its own singleton.
    pub fn ground_truth_partition(&self, outlets: &BTreeSet<String>) -> Partition {
        let mut by_owner: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        let mut unknown: Vec<&str> = Vec::new();
        for outlet in outlets {
            let owner = self.resolved_owner(outlet);
            if owner == UNKNOWN_OWNER {
                unknown.push(outlet);
            } else {
                by_owner.entry(owner).or_default().push(outlet);
            }
        }
        let mut labels = BTreeMap::new();
        let mut next = 1u32;
        for members in by_owner.values() {
            for o in members {
                labels.insert((*o).to_string(), next);
            }
            next += 1;
        }
        for o in unknown {
            labels.insert(o.to_string(), next);
            next += 1;
        }
        Partition::new(labels).expect("ids assigned contiguously")
    }
}

fn read_owner_graph<R: Read>(reader: R) -> Result<OwnerGraph> {
    let mut graph = OwnerGraph::new();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    for (idx, row) in rdr.records().enumerate() {
        let row = row?;
        let line = idx + 1;
        if row.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let parent = row.get(0).map(str::trim).unwrap_or_default();
        let child = row.get(1).map(str::trim).unwrap_or_default();
        if line == 1 && parent.eq_ignore_ascii_case("parent_owner") {
            continue;
        }
        if parent.is_empty() || child.is_empty() {
            return Err(Error::MalformedRow {
                line,
                reason: "expected parent_owner,child_owner".into(),
            });
        }
        graph.add_edge(parent, child)?;
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(outlet: &str, owners: &[(&str, f64)]) -> OwnershipRecord {
        OwnershipRecord {
            outlet: outlet.into(),
            owners: owners.iter().map(|(n, s)| (n.to_string(), *s)).collect(),
            resolved_owner: UNKNOWN_OWNER.into(),
        }
    }

    #[test]
    fn major_partner_wins() {
        let r = record("x", &[("A", 0.6), ("B", 0.4)]);
        assert_eq!(resolve_owner(&r, &OwnerGraph::new()), "A");
    }

    #[test]
    fn subsumption_lifts_to_top_ancestor() {
        let mut g = OwnerGraph::new();
        g.add_edge("H", "A").unwrap();
        let r = record("x", &[("A", 1.0)]);
        assert_eq!(resolve_owner(&r, &g), "H");

        g.add_edge("Top", "H").unwrap();
        assert_eq!(resolve_owner(&r, &g), "Top");
    }

    #[test]
    fn equal_shares_break_lexicographically() {
        let r = record("x", &[("B", 0.5), ("A", 0.5)]);
        assert_eq!(resolve_owner(&r, &OwnerGraph::new()), "A");
        // Invariant under reordering of the owners list.
        let r2 = record("x", &[("A", 0.5), ("B", 0.5)]);
        assert_eq!(resolve_owner(&r2, &OwnerGraph::new()), "A");
    }

    #[test]
    fn cycle_detected() {
        let mut g = OwnerGraph::new();
        g.add_edge("A", "B").unwrap();
        let err = g.add_edge("B", "A").unwrap_err();
        assert!(matches!(err, Error::OwnerCycle(_)));
    }

    #[test]
    fn two_parents_rejected() {
        let mut g = OwnerGraph::new();
        g.add_edge("P1", "C").unwrap();
        let err = g.add_edge("P2", "C").unwrap_err();
        assert!(matches!(err, Error::MultipleParents(_)));
    }

    #[test]
    fn load_registry_rows() {
        let registry = "emol,El Mercurio,1.0\nx,,\n";
        let graph = "";
        let reg = Registry::load(registry.as_bytes(), graph.as_bytes()).unwrap();
        assert_eq!(reg.resolved_owner("emol"), "El Mercurio");
        assert_eq!(reg.resolved_owner("x"), UNKNOWN_OWNER);
        assert_eq!(reg.resolved_owner("missing"), UNKNOWN_OWNER);
    }

    #[test]
    fn load_rejects_owner_cycle() {
        let registry = "emol,A,1.0\n";
        let graph = "A,B\nB,A\n";
        let err = Registry::load(registry.as_bytes(), graph.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::OwnerCycle(_)));
    }

    #[test]
    fn ground_truth_groups_by_owner() {
        let registry = "a,O1,1.0\nb,O1,1.0\nc,O2,1.0\n";
        let reg = Registry::load(registry.as_bytes(), "".as_bytes()).unwrap();
        let outlets: BTreeSet<String> =
            ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let p = reg.ground_truth_partition(&outlets);
        assert_eq!(p.label_of("a"), p.label_of("b"));
        assert_ne!(p.label_of("a"), p.label_of("c"));
    }

    #[test]
    fn unknown_outlets_stay_singletons() {
        let reg = Registry::load("".as_bytes(), "".as_bytes()).unwrap();
        let outlets: BTreeSet<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let p = reg.ground_truth_partition(&outlets);
        assert_ne!(p.label_of("a"), p.label_of("b"));
        assert_eq!(p.len(), 2);

        let empty = reg.ground_truth_partition(&BTreeSet::new());
        assert!(empty.is_empty());
    }
}
