//! Occupation measures and the target sets they are evaluated on.

use serde::{Deserialize, Serialize};

/// A measurable set of traits that statistics are evaluated on. Finite
/// alphabets use symbol sets; numeric traits use half-lines and intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TargetSet {
    Symbols { set: Vec<usize> },
    HalfLine { upper: f64 },
    Interval { lower: f64, upper: f64 },
}

impl TargetSet {
    pub fn contains_symbol(&self, sym: usize) -> bool {
        match self {
            TargetSet::Symbols { set } => set.contains(&sym),
            _ => false,
        }
    }

    pub fn contains_point(&self, x: f64) -> bool {
        match self {
            TargetSet::Symbols { .. } => false,
            TargetSet::HalfLine { upper } => x <= *upper,
            TargetSet::Interval { lower, upper } => *lower < x && x <= *upper,
        }
    }

    pub fn label(&self) -> String {
        match self {
            TargetSet::Symbols { set } => {
                let parts: Vec<String> = set.iter().map(|s| format!("s{s}")).collect();
                format!("A[{}]", parts.join(","))
            }
            TargetSet::HalfLine { upper } => format!("A(<={upper})"),
            TargetSet::Interval { lower, upper } => format!("A({lower},{upper}]"),
        }
    }
}

/// The occupation measure of one generation: counts per trait bin. Finite
/// alphabets store one count per symbol; numeric models keep the exact
/// particle positions (each position carries count one), so set counts are
/// evaluated without binning error.
#[derive(Debug, Clone, PartialEq)]
pub enum CountingMeasure {
    Finite { counts: Vec<u64> },
    Numeric { positions: Vec<f64> },
}

impl CountingMeasure {
    pub fn empty_finite(dim: usize) -> Self {
        CountingMeasure::Finite {
            counts: vec![0; dim],
        }
    }

    pub fn empty_numeric() -> Self {
        CountingMeasure::Numeric {
            positions: Vec::new(),
        }
    }

    /// Total population `N = Z(X)`.
    pub fn total(&self) -> u64 {
        match self {
            CountingMeasure::Finite { counts } => counts.iter().sum(),
            CountingMeasure::Numeric { positions } => positions.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// `Z(A)` for a target set.
    pub fn count_in(&self, set: &TargetSet) -> u64 {
        match self {
            CountingMeasure::Finite { counts } => counts
                .iter()
                .enumerate()
                .filter(|(sym, _)| set.contains_symbol(*sym))
                .map(|(_, &c)| c)
                .sum(),
            CountingMeasure::Numeric { positions } => positions
                .iter()
                .filter(|&&x| set.contains_point(x))
                .count() as u64,
        }
    }

    /// Histogram over fixed-width bins (`floor(x / width)`), for exporting
    /// numeric occupation measures in bounded space.
    pub fn binned(&self, width: f64) -> Vec<(i64, u64)> {
        match self {
            CountingMeasure::Finite { counts } => counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(sym, &c)| (sym as i64, c))
                .collect(),
            CountingMeasure::Numeric { positions } => {
                let mut map = std::collections::BTreeMap::new();
                for &x in positions {
                    *map.entry((x / width).floor() as i64).or_insert(0u64) += 1;
                }
                map.into_iter().collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_totals() {
        let z = CountingMeasure::Finite {
            counts: vec![3, 0, 5],
        };
        assert_eq!(z.total(), 8);
        assert_eq!(z.count_in(&TargetSet::Symbols { set: vec![0] }), 3);
        assert_eq!(z.count_in(&TargetSet::Symbols { set: vec![0, 2] }), 8);

        let z = CountingMeasure::Numeric {
            positions: vec![-1.5, 0.0, 2.25],
        };
        assert_eq!(z.total(), 3);
        assert_eq!(z.count_in(&TargetSet::HalfLine { upper: 0.0 }), 2);
        assert_eq!(
            z.count_in(&TargetSet::Interval {
                lower: 0.0,
                upper: 3.0
            }),
            1
        );
    }

    #[test]
    fn empty_iff_zero_total() {
        assert!(CountingMeasure::empty_finite(4).is_empty());
        assert!(CountingMeasure::empty_numeric().is_empty());
    }

    #[test]
    fn binning_is_floor_based() {
        let z = CountingMeasure::Numeric {
            positions: vec![0.05, 0.15, -0.05],
        };
        let bins = z.binned(0.1);
        assert_eq!(bins, vec![(-1, 1), (0, 1), (1, 1)]);
    }
}
