//! Logical operation counters for split search.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

/// Thread-safe counters incremented by the split searches.
#[derive(Debug, Default)]
pub struct OpCounters {
    threshold_evals: AtomicU64,
    gt_calls: AtomicU64,
    samples_touched: AtomicU64,
}

/// Plain snapshot of [`OpCounters`].
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CounterSnapshot {
    /// Candidate thresholds scored, summed over every scanned column or pseudo-feature.
    pub threshold_evals: u64,
    /// Group-test evaluations.
    pub gt_calls: u64,
    /// Samples read while scanning columns or pseudo-features.
    pub samples_touched: u64,
}

impl OpCounters {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub(crate) fn add_scan(&self, thresholds: u64, samples: u64) {
        self.threshold_evals.fetch_add(thresholds, Ordering::Relaxed);
        self.samples_touched.fetch_add(samples, Ordering::Relaxed);
    }

    #[inline]
    pub(crate) fn add_gt_call(&self) {
        self.gt_calls.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> CounterSnapshot {
        CounterSnapshot {
            threshold_evals: self.threshold_evals.load(Ordering::Relaxed),
            gt_calls: self.gt_calls.load(Ordering::Relaxed),
            samples_touched: self.samples_touched.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.threshold_evals.store(0, Ordering::Relaxed);
        self.gt_calls.store(0, Ordering::Relaxed);
        self.samples_touched.store(0, Ordering::Relaxed);
    }
}

impl std::ops::Sub for CounterSnapshot {
    type Output = CounterSnapshot;

    fn sub(self, rhs: Self) -> Self {
        CounterSnapshot {
            threshold_evals: self.threshold_evals - rhs.threshold_evals,
            gt_calls: self.gt_calls - rhs.gt_calls,
            samples_touched: self.samples_touched - rhs.samples_touched,
        }
    }
}
