use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use serde::Serialize;
use thiserror::Error;

use crate::context::{DimensionName, SimpleContext, TagValue};
use crate::types::CoreValue;

/// What a demand is for: a variable of one where-clause instance.
///
/// `program` tells programs sharing a warehouse apart, `scope` numbers the
/// where-clause inside the program and `frame` is the function call the
/// clause belongs to (0 outside any call).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subject {
    pub name: Arc<str>,
    pub program: u64,
    pub scope: u32,
    pub frame: u64,
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if self.frame != 0 {
            write!(f, "/{}", self.frame)?;
        }
        Ok(())
    }
}

/// A warehouse key. `projection` holds exactly the dimensions the subject
/// queried; `None` records that the dimension was unbound.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Demand {
    pub subject: Subject,
    pub projection: BTreeMap<DimensionName, Option<TagValue>>,
}

impl Demand {
    pub fn new(subject: Subject, ctx: &SimpleContext, dims: &BTreeSet<DimensionName>) -> Self {
        Demand {
            subject,
            projection: dims
                .iter()
                .map(|d| (d.clone(), ctx.get(d).cloned()))
                .collect(),
        }
    }

    pub fn dimensions(&self) -> impl Iterator<Item = &DimensionName> {
        self.projection.keys()
    }
}

impl fmt::Display for Demand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {{", self.subject)?;
        for (i, (d, t)) in self.projection.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match t {
                Some(t) => write!(f, "{d}:{t}")?,
                None => write!(f, "{d}:_")?,
            }
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("warehouse entry {key} already holds {existing}, refusing {offered}")]
pub struct WarehouseConflict {
    pub key: String,
    pub existing: CoreValue,
    pub offered: CoreValue,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct WarehouseStats {
    pub demands: u64,
    pub hits: u64,
    pub misses: u64,
    pub entries: u64,
}

#[derive(Default)]
struct Store {
    entries: HashMap<Demand, CoreValue>,
    // every dimension set seen for a subject, in discovery order
    ranks: HashMap<Subject, Vec<BTreeSet<DimensionName>>>,
}

/// Write-once memo table shared by evaluations. Reads take a shared lock;
/// a second store under an existing key must carry the same value.
#[derive(Default)]
pub struct Warehouse {
    store: RwLock<Store>,
    demands: AtomicU64,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl fmt::Debug for Warehouse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Warehouse")
            .field("stats", &self.stats())
            .finish()
    }
}

impl Warehouse {
    pub fn new() -> Self {
        Self::default()
    }

    /// Finds a stored value for `subject` at `ctx` under any dimension set
    /// recorded for it.
    pub fn find(&self, subject: &Subject, ctx: &SimpleContext) -> Option<(Demand, CoreValue)> {
        self.find_where(subject, ctx, |_| true)
    }

    /// As [`Warehouse::find`], trying only the dimension sets `usable`
    /// accepts.
    pub fn find_where(
        &self,
        subject: &Subject,
        ctx: &SimpleContext,
        usable: impl Fn(&BTreeSet<DimensionName>) -> bool,
    ) -> Option<(Demand, CoreValue)> {
        let store = self.store.read().unwrap_or_else(|e| e.into_inner());
        for dims in store.ranks.get(subject)?.iter().filter(|d| usable(d)) {
            let key = Demand::new(subject.clone(), ctx, dims);
            if let Some(v) = store.entries.get(&key) {
                return Some((key, v.clone()));
            }
        }
        None
    }

    pub fn get(&self, key: &Demand) -> Option<CoreValue> {
        let store = self.store.read().unwrap_or_else(|e| e.into_inner());
        store.entries.get(key).cloned()
    }

    /// Stores `value` under `key`. Storing an equal value again is a no-op.
    pub fn store(&self, key: Demand, value: CoreValue) -> Result<bool, Box<WarehouseConflict>> {
        let mut store = self.store.write().unwrap_or_else(|e| e.into_inner());
        if let Some(existing) = store.entries.get(&key) {
            if *existing == value {
                return Ok(false);
            }
            return Err(Box::new(WarehouseConflict {
                key: key.to_string(),
                existing: existing.clone(),
                offered: value,
            }));
        }
        let dims: BTreeSet<DimensionName> = key.dimensions().cloned().collect();
        let ranks = store.ranks.entry(key.subject.clone()).or_default();
        if !ranks.contains(&dims) {
            ranks.push(dims);
        }
        store.entries.insert(key, value);
        Ok(true)
    }

    pub fn len(&self) -> usize {
        self.store
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .entries
            .len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All keys, in no particular order.
    pub fn keys(&self) -> Vec<Demand> {
        let store = self.store.read().unwrap_or_else(|e| e.into_inner());
        store.entries.keys().cloned().collect()
    }

    pub fn clear(&self) {
        let mut store = self.store.write().unwrap_or_else(|e| e.into_inner());
        *store = Store::default();
    }

    pub fn stats(&self) -> WarehouseStats {
        WarehouseStats {
            demands: self.demands.load(Ordering::Relaxed),
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            entries: self.len() as u64,
        }
    }

    pub(crate) fn count_demand(&self) {
        self.demands.fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn count_hit(&self) {
        self.hits.fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn count_miss(&self) {
        self.misses.fetch_add(1, Ordering::Relaxed);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::dim;

    fn subject(name: &str) -> Subject {
        Subject {
            name: name.into(),
            program: 1,
            scope: 0,
            frame: 0,
        }
    }

    #[test]
    fn lookup_projects_onto_recorded_dimensions() {
        let w = Warehouse::new();
        let dims: BTreeSet<_> = [dim("t")].into_iter().collect();
        let at = SimpleContext::new().with("t", 3).with("u", 1);
        w.store(Demand::new(subject("x"), &at, &dims), CoreValue::Integer(9))
            .unwrap();
        let other = SimpleContext::new().with("t", 3).with("u", 50);
        assert_eq!(
            w.find(&subject("x"), &other).map(|(_, v)| v),
            Some(CoreValue::Integer(9))
        );
        assert!(w.find(&subject("x"), &SimpleContext::new()).is_none());
        assert!(w.find(&subject("y"), &at).is_none());
    }

    #[test]
    fn unbound_differs_from_bound() {
        let w = Warehouse::new();
        let dims: BTreeSet<_> = [dim("t")].into_iter().collect();
        w.store(
            Demand::new(subject("x"), &SimpleContext::new(), &dims),
            CoreValue::Integer(0),
        )
        .unwrap();
        let bound = SimpleContext::new().with("t", 0);
        assert!(w.find(&subject("x"), &bound).is_none());
    }

    #[test]
    fn write_once() {
        let w = Warehouse::new();
        let key = Demand::new(subject("x"), &SimpleContext::new(), &BTreeSet::new());
        assert_eq!(w.store(key.clone(), CoreValue::Integer(1)), Ok(true));
        assert_eq!(w.store(key.clone(), CoreValue::Integer(1)), Ok(false));
        assert!(w.store(key.clone(), CoreValue::Integer(2)).is_err());
        assert_eq!(w.get(&key), Some(CoreValue::Integer(1)));
        assert_eq!(key.to_string(), "x {}");
    }
}
