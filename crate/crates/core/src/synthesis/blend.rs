use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::spectra::{Label, Source, SpectraSet, Spectrum};

/// Convex combination `a·x + (1 − a)·y` of two same-class spectra.
pub fn blend(x: &Spectrum, y: &Spectrum, weight: f64) -> Result<Spectrum> {
    if !(weight > 0.0 && weight < 1.0) {
        return Err(Error::Argument(format!("blend weight {weight} outside (0, 1)")));
    }
    if x.grid() != y.grid() && **x.grid() != **y.grid() {
        return Err(Error::Shape("blended spectra must share a grid".into()));
    }
    if x.label != y.label {
        return Err(Error::Label(format!(
            "cannot blend a {} spectrum with a {} spectrum",
            x.label, y.label
        )));
    }
    let v = x
        .intensities()
        .iter()
        .zip(y.intensities())
        .map(|(a, b)| weight * a + (1.0 - weight) * b)
        .collect();
    let mut out = x.with_intensities(v)?;
    out.source = Source::Blended;
    Ok(out)
}

/// Ordered weight pairs applied to every unordered parent pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlendSchedule(Vec<(f64, f64)>);

impl Default for BlendSchedule {
    fn default() -> Self {
        Self(vec![(0.1, 0.9), (0.3, 0.7), (0.5, 0.5), (0.7, 0.3), (0.9, 0.1)])
    }
}

impl BlendSchedule {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Argument("blend schedule is empty".into()));
        }
        for &(a, b) in &pairs {
            if !(a > 0.0 && b > 0.0) || (a + b - 1.0).abs() > 1e-12 {
                return Err(Error::Argument(format!(
                    "blend weights ({a}, {b}) must lie in (0, 1) and sum to 1"
                )));
            }
        }
        Ok(Self(pairs))
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `|schedule| · n(n − 1)/2`.
pub fn pool_size(n_parents: usize, schedule: &BlendSchedule) -> usize {
    schedule.len() * (n_parents * n_parents.saturating_sub(1) / 2)
}

fn label_of(parents: &SpectraSet) -> Result<Label> {
    let first = parents
        .spectra()
        .first()
        .ok_or_else(|| Error::Argument("no parents to blend".into()))?
        .label;
    if parents.iter().any(|s| s.label != first) {
        return Err(Error::Label("blend parents must all share one class".into()));
    }
    Ok(first)
}

/// Every pair `i < j` blended with every schedule entry, in order (pair
/// major, schedule minor). With `limit` below the pool size, a seeded
/// sample without replacement is drawn instead, kept in pool order.
pub fn blend_pool(
    parents: &SpectraSet,
    schedule: &BlendSchedule,
    limit: Option<usize>,
    seed: u64,
) -> Result<SpectraSet> {
    label_of(parents)?;
    let n = parents.len();
    if n < 2 {
        return Err(Error::Argument(format!("blending needs at least two parents, got {n}")));
    }
    let total = pool_size(n, schedule);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let picks: Vec<usize> = match limit {
        Some(k) if k < total => {
            let mut v = index::sample(&mut rng::stream(seed, &[0xb1e4d]), total, k).into_vec();
            v.sort_unstable();
            v
        }
        _ => (0..total).collect(),
    };
    let s = schedule.len();
    let mut out = SpectraSet::empty(parents.grid().clone());
    for p in picks {
        let (i, j) = pairs[p / s];
        let (wa, _) = schedule.pairs()[p % s];
        out.push(blend(&parents.spectra()[i], &parents.spectra()[j], wa)?)?;
    }
    Ok(out)
}

/// Blends within each class separately. `per_class` caps each class pool.
pub fn blend_classes(
    set: &SpectraSet,
    schedule: &BlendSchedule,
    per_class: &[(Label, Option<usize>)],
    seed: u64,
) -> Result<SpectraSet> {
    let mut out = SpectraSet::empty(set.grid().clone());
    for (k, &(label, limit)) in per_class.iter().enumerate() {
        if limit == Some(0) {
            continue;
        }
        let parents = set.with_label(label);
        out.extend(&blend_pool(&parents, schedule, limit, rng::derive_seed(seed, &[k as u64]))?)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::WavenumberGrid;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn parents(n: usize, width: usize, label: Label) -> SpectraSet {
        let grid = Arc::new(WavenumberGrid::linspace(0.0, 1.0, width).unwrap());
        let spectra = (0..n)
            .map(|i| {
                let v = (0..width).map(|j| ((i * 31 + j * 17) % 23) as f64 / 22.0).collect();
                Spectrum::new(grid.clone(), v, label, Source::Real).unwrap()
            })
            .collect();
        SpectraSet::new(grid, spectra).unwrap()
    }

    #[test]
    fn midpoint_and_endpoints() {
        let p = parents(2, 4, Label::Positive);
        let (x, y) = (&p.spectra()[0], &p.spectra()[1]);
        let m = blend(x, y, 0.5).unwrap();
        for k in 0..4 {
            let want = 0.5 * (x.intensities()[k] + y.intensities()[k]);
            assert!((m.intensities()[k] - want).abs() < 1e-15);
        }
        assert_eq!(m.source, Source::Blended);
        for w in [0.1, 0.3, 0.77] {
            let same = blend(x, x, w).unwrap();
            for (a, b) in same.intensities().iter().zip(x.intensities()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
        assert!(blend(x, y, 1.0).is_err());
        assert!(blend(x, y, 0.0).is_err());
    }

    #[test]
    fn rejects_mixed_labels_and_bad_weight() {
        let a = parents(1, 3, Label::Positive);
        let b = parents(1, 3, Label::Negative);
        let b = SpectraSet::new(a.grid().clone(), b.spectra().to_vec()).unwrap();
        assert!(matches!(blend(&a.spectra()[0], &b.spectra()[0], 0.5), Err(Error::Label(_))));
        assert!(blend(&a.spectra()[0], &a.spectra()[0], 1.5).is_err());
        assert!(BlendSchedule::new(vec![(0.2, 0.7)]).is_err());
    }

    #[test]
    fn pool_sizes() {
        let sched = BlendSchedule::default();
        for n in [3, 10, 45] {
            let pool = blend_pool(&parents(n, 5, Label::Negative), &sched, None, 0).unwrap();
            assert_eq!(pool.len(), 5 * n * (n - 1) / 2);
            assert_eq!(pool.len(), pool_size(n, &sched));
            assert!(pool.iter().all(|s| s.label == Label::Negative && s.source == Source::Blended));
        }
        assert!(blend_pool(&parents(1, 5, Label::Positive), &sched, None, 0).is_err());
    }

    #[test]
    fn limited_pool_is_a_seeded_subset() {
        let p = parents(10, 5, Label::Positive);
        let sched = BlendSchedule::default();
        let full = blend_pool(&p, &sched, None, 0).unwrap();
        let a = blend_pool(&p, &sched, Some(40), 7).unwrap();
        let b = blend_pool(&p, &sched, Some(40), 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 40);
        assert!(a.iter().all(|s| full.spectra().contains(s)));
        assert_eq!(blend_pool(&p, &sched, Some(10_000), 7).unwrap(), full);
    }

    proptest! {
        #[test]
        fn blend_stays_between_parents(
            x in prop::collection::vec(0.0f64..1.0, 6),
            y in prop::collection::vec(0.0f64..1.0, 6),
            w in 0.001f64..0.999,
        ) {
            let grid = Arc::new(WavenumberGrid::linspace(0.0, 1.0, 6).unwrap());
            let sx = Spectrum::new(grid.clone(), x.clone(), Label::Positive, Source::Real).unwrap();
            let sy = Spectrum::new(grid, y.clone(), Label::Positive, Source::Real).unwrap();
            let b = blend(&sx, &sy, w).unwrap();
            for k in 0..6 {
                let lo = x[k].min(y[k]) - 1e-12;
                let hi = x[k].max(y[k]) + 1e-12;
                prop_assert!(b.intensities()[k] >= lo && b.intensities()[k] <= hi);
            }
        }
    }
}
