//! Community labelings over a set of outlets.
//!
//! Community id 0 is reserved for un-grouped outlets (nodes the partitioner
//! left as singletons, or the catch-all cluster of the normalized cut).

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Reserved community id for un-grouped outlets.
pub const UNGROUPED: u32 = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: BTreeMap<String, u32>,
}

impl Partition {
    /// Build from explicit labels. Ids above 0 must be contiguous; id 0 may
    /// be absent (empty un-grouped set).
    pub fn new(labels: BTreeMap<String, u32>) -> Result<Self> {
        let ids: BTreeSet<u32> = labels.values().copied().collect();
        if let Some(&max) = ids.iter().max() {
            for id in 1..=max {
                if !ids.contains(&id) {
                    return Err(Error::InvalidArgument(format!(
                        "community ids not contiguous: {id} missing (max {max})"
                    )));
                }
            }
        }
        Ok(Partition { labels })
    }

    /// Build from member groups: `groups[i]` becomes community i+1 and every
    /// outlet of `ungrouped` gets id 0.
    pub fn from_groups<S: Into<String>>(
        groups: Vec<Vec<S>>,
        ungrouped: Vec<S>,
    ) -> Result<Self> {
        let mut labels = BTreeMap::new();
        for o in ungrouped {
            labels.insert(o.into(), UNGROUPED);
        }
        for (i, group) in groups.into_iter().enumerate() {
            for o in group {
                labels.insert(o.into(), (i + 1) as u32);
            }
        }
        Self::new(labels)
    }

    pub fn labels(&self) -> &BTreeMap<String, u32> {
        &self.labels
    }

    pub fn outlets(&self) -> impl Iterator<Item = &str> {
        self.labels.keys().map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label_of(&self, outlet: &str) -> Option<u32> {
        self.labels.get(outlet).copied()
    }

    /// Members of one community, in lexicographic order.
    pub fn members(&self, id: u32) -> Vec<&str> {
        self.labels
            .iter()
            .filter(|(_, &l)| l == id)
            .map(|(o, _)| o.as_str())
            .collect()
    }

    /// Community ids present, including 0 if any outlet is un-grouped.
    pub fn community_ids(&self) -> BTreeSet<u32> {
        self.labels.values().copied().collect()
    }

    /// Number of communities with id != 0.
    pub fn community_count(&self) -> usize {
        self.community_ids().iter().filter(|&&id| id != UNGROUPED).count()
    }

    /// Number of outlets with community id != 0.
    pub fn grouped_count(&self) -> usize {
        self.labels.values().filter(|&&l| l != UNGROUPED).count()
    }

    /// CSV export: `outlet,community_id`, outlets in lexicographic order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "outlet,community_id")?;
        for (outlet, id) in &self.labels {
            writeln!(w, "{outlet},{id}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut labels = BTreeMap::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || (lineno == 0 && trimmed == "outlet,community_id") {
                continue;
            }
            let (outlet, id) = trimmed.rsplit_once(',').ok_or_else(|| Error::MalformedRow {
                line: lineno + 1,
                reason: "expected outlet,community_id".into(),
            })?;
            let id: u32 = id.trim().parse().map_err(|_| Error::MalformedRow {
                line: lineno + 1,
                reason: format!("bad community id {id:?}"),
            })?;
            labels.insert(outlet.to_string(), id);
        }
        Self::new(labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_get_contiguous_ids() {
        let p = Partition::from_groups(
            vec![vec!["a", "b"], vec!["c"]],
            vec!["d"],
        )
        .unwrap();
        assert_eq!(p.label_of("a"), Some(1));
        assert_eq!(p.label_of("b"), Some(1));
        assert_eq!(p.label_of("c"), Some(2));
        assert_eq!(p.label_of("d"), Some(0));
        assert_eq!(p.community_count(), 2);
        assert_eq!(p.grouped_count(), 3);
    }

    #[test]
    fn gap_in_ids_rejected() {
        let mut labels = BTreeMap::new();
        labels.insert("a".to_string(), 1);
        labels.insert("b".to_string(), 3);
        assert!(Partition::new(labels).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let p = Partition::from_groups(vec![vec!["x", "y"]], vec!["z"]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let back = Partition::read_csv(buf.as_slice()).unwrap();
        assert_eq!(p, back);
    }
}
