//! Pivot table (LAESA-style) metric index.
//!
//! Pivots are chosen farthest-first over the inserted items when
//! [`DistanceIndex::build`] runs; the number of pivots is
//! `max(1, ceil(log2(size)))`. Every item has a row of distances to the
//! pivots. An item whose lower bound `max_p |D(q, p) - D(x, p)|` exceeds the
//! radius cannot be an answer and is skipped without computing `D(q, x)`.
//!
//! Items inserted or replaced after the last build have no row and are
//! always compared directly. Pruning is disabled entirely when the index
//! distance is not a metric.

use super::{check_k, check_radius, neighbor_order, DistanceIndex, IndexedWindow, Neighbor, WindowStore};
use crate::distance::DistanceSpec;
use crate::error::Result;

// absorbs rounding so that a bound computed in floating point never prunes
// an item sitting exactly on the radius
fn slack(r: f64) -> f64 {
    1e-9 * (1.0 + r.abs())
}

#[derive(Debug)]
pub struct PivotTableIndex {
    store: WindowStore,
    pivots: Vec<Vec<f64>>,
    /// `rows[i][p]` = distance of item `i` to pivot `p`; `None` for items
    /// changed since the last build.
    rows: Vec<Option<Vec<f64>>>,
}

impl Default for PivotTableIndex {
    fn default() -> Self {
        Self::with_distance(DistanceSpec::L2)
    }
}

impl PivotTableIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_distance(distance: DistanceSpec) -> Self {
        PivotTableIndex { store: WindowStore::new(distance), pivots: Vec::new(), rows: Vec::new() }
    }

    pub fn pivots(&self) -> &[Vec<f64>] {
        &self.pivots
    }

    /// Precomputed pivot distances of item `i` (insertion order), if it is
    /// covered by the table.
    pub fn row(&self, i: usize) -> Option<&[f64]> {
        self.rows.get(i).and_then(|r| r.as_deref())
    }

    /// Number of items not covered by the table.
    pub fn overflow_len(&self) -> usize {
        self.rows.iter().filter(|r| r.is_none()).count()
    }

    pub fn pivot_count_for(size: usize) -> usize {
        if size <= 1 {
            1
        } else {
            (usize::BITS - (size - 1).leading_zeros()) as usize
        }
    }

    fn lower_bound(query_to_pivots: &[f64], row: Option<&Vec<f64>>) -> f64 {
        match row {
            Some(row) => query_to_pivots.iter().zip(row).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
            None => 0.0,
        }
    }

    fn query_to_pivots(&self, query: &[f64]) -> Result<Vec<f64>> {
        self.pivots.iter().map(|p| self.store.query_distance(query, p)).collect()
    }
}

impl DistanceIndex for PivotTableIndex {
    fn insert(&mut self, item: IndexedWindow) -> Result<()> {
        let (pos, replaced) = self.store.insert(item)?;
        if replaced {
            self.rows[pos] = None;
        } else {
            self.rows.push(None);
        }
        Ok(())
    }

    fn build(&mut self) {
        let items = self.store.items();
        self.pivots.clear();
        self.rows = vec![None; items.len()];
        if items.is_empty() || !self.store.distance().is_metric() {
            return;
        }
        let count = Self::pivot_count_for(items.len()).min(items.len());
        let mut columns: Vec<Vec<f64>> = Vec::with_capacity(count);
        let mut nearest = vec![f64::INFINITY; items.len()];
        let mut next = 0;
        for _ in 0..count {
            let pivot = items[next].vector.clone();
            let column: Vec<f64> = items
                .iter()
                .map(|it| self.store.raw_distance(&it.vector, &pivot).unwrap_or(f64::NAN))
                .collect();
            for (n, d) in nearest.iter_mut().zip(&column) {
                *n = n.min(*d);
            }
            self.pivots.push(pivot);
            columns.push(column);
            // farthest-first; first index wins ties
            next = nearest
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &d)| if d > best.1 { (i, d) } else { best })
                .0;
        }
        if columns.iter().flatten().any(|d| d.is_nan()) {
            self.pivots.clear();
            return;
        }
        self.rows = (0..items.len()).map(|i| Some(columns.iter().map(|c| c[i]).collect())).collect();
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
        self.store.check_dim(query.len())?;
        let qp = self.query_to_pivots(query)?;
        let limit = radius + slack(radius);
        let mut hits = Vec::new();
        for (item, row) in self.store.items().iter().zip(&self.rows) {
            if Self::lower_bound(&qp, row.as_ref()) > limit {
                continue;
            }
            let distance = self.store.query_distance(query, &item.vector)?;
            if distance <= radius {
                hits.push(Neighbor { item, distance });
            }
        }
        hits.sort_by(neighbor_order);
        Ok(hits)
    }

    fn knn_query(&self, query: &[f64], k: usize) -> Result<Vec<Neighbor<'_>>> {
        check_k(k)?;
        self.store.check_dim(query.len())?;
        let qp = self.query_to_pivots(query)?;
        let items = self.store.items();
        let mut order: Vec<(f64, usize)> =
            self.rows.iter().enumerate().map(|(i, row)| (Self::lower_bound(&qp, row.as_ref()), i)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut best: Vec<Neighbor<'_>> = Vec::with_capacity(k + 1);
        for (bound, i) in order {
            if best.len() == k {
                let worst = best[k - 1].distance;
                if bound > worst + slack(worst) {
                    break;
                }
            }
            let item = &items[i];
            let cand = Neighbor { item, distance: self.store.query_distance(query, &item.vector)? };
            let pos = best.partition_point(|n| neighbor_order(n, &cand).is_lt());
            if pos < k {
                best.insert(pos, cand);
                best.truncate(k);
            }
        }
        Ok(best)
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
