use super::{check_k, check_radius, neighbor_order, DistanceIndex, IndexedWindow, Neighbor, WindowStore};
use crate::distance::DistanceSpec;
use crate::error::Result;

/// Exhaustive scan over every stored vector.
#[derive(Debug)]
pub struct LinearScanIndex {
    store: WindowStore,
}

impl Default for LinearScanIndex {
    fn default() -> Self {
        Self::with_distance(DistanceSpec::L2)
    }
}

impl LinearScanIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_distance(distance: DistanceSpec) -> Self {
        LinearScanIndex { store: WindowStore::new(distance) }
    }

    fn scan(&self, query: &[f64]) -> Result<Vec<Neighbor<'_>>> {
        self.store.check_dim(query.len())?;
        self.store
            .items()
            .iter()
            .map(|item| Ok(Neighbor { item, distance: self.store.query_distance(query, &item.vector)? }))
            .collect()
    }
}

impl DistanceIndex for LinearScanIndex {
    fn insert(&mut self, item: IndexedWindow) -> Result<()> {
        self.store.insert(item).map(|_| ())
    }

    fn len(&self) -> usize {
        self.store.items().len()
    }

    fn dim(&self) -> Option<usize> {
        self.store.dim()
    }

    fn distance(&self) -> &DistanceSpec {
        self.store.distance()
    }

    fn range_query(&self, query: &[f64], radius: f64) -> Result<Vec<Neighbor<'_>>> {
        check_radius(radius)?;
        let mut hits = self.scan(query)?;
        hits.retain(|n| n.distance <= radius);
        hits.sort_by(neighbor_order);
        Ok(hits)
    }

    fn knn_query(&self, query: &[f64], k: usize) -> Result<Vec<Neighbor<'_>>> {
        check_k(k)?;
        let mut hits = self.scan(query)?;
        hits.sort_by(neighbor_order);
        hits.truncate(k);
        Ok(hits)
    }

    fn items(&self) -> Box<dyn Iterator<Item = &IndexedWindow> + '_> {
        Box::new(self.store.items().iter())
    }

    fn distance_computations(&self) -> u64 {
        self.store.computations()
    }

    fn reset_counters(&self) {
        self.store.reset()
    }
}
