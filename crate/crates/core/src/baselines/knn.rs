use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    Manhattan,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    features: Vec<Vec<f64>>,
    labels: Vec<Label>,
    k: usize,
    metric: Metric,
}

impl KnnModel {
    pub fn fit(x: &[&[f64]], y: &[Label], k: usize, metric: Metric) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Shape(format!("{} spectra but {} labels", x.len(), y.len())));
        }
        if k == 0 || (!x.is_empty() && k > x.len()) {
            return Err(Error::Argument(format!(
                "k = {k} must lie in 1..={} (training size)",
                x.len()
            )));
        }
        Ok(Self {
            features: x.iter().map(|v| v.to_vec()).collect(),
            labels: y.to_vec(),
            k,
            metric,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Majority label of the `k` nearest stored spectra. A tied vote goes to
    /// the label of the single nearest neighbour.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        if self.features.is_empty() {
            return Err(Error::State("kNN model holds no training spectra".into()));
        }
        let width = self.features[0].len();
        if x.len() != width {
            return Err(Error::Shape(format!("input width {} vs model width {width}", x.len())));
        }
        let mut d: Vec<(f64, usize)> = self
            .features
            .iter()
            .enumerate()
            .map(|(i, f)| (self.metric.distance(f, x), i))
            .collect();
        let k = self.k.min(d.len());
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, by_distance);
        }
        let nearest = &mut d[..k];
        nearest.sort_unstable_by(by_distance);
        let pos = nearest
            .iter()
            .filter(|(_, i)| self.labels[*i] == Label::Positive)
            .count();
        let neg = k - pos;
        Ok(match pos.cmp(&neg) {
            std::cmp::Ordering::Greater => Label::Positive,
            std::cmp::Ordering::Less => Label::Negative,
            std::cmp::Ordering::Equal => self.labels[nearest[0].1],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manhattan_closed_form() {
        assert_eq!(Metric::Manhattan.distance(&[0.0, 0.0], &[1.0, 2.0]), 3.0);
        assert_eq!(Metric::Euclidean.distance(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
    }

    #[test]
    fn exact_match_with_k1() {
        let xs: Vec<&[f64]> = vec![&[0.0, 1.0], &[5.0, 5.0]];
        let m = KnnModel::fit(&xs, &[Label::Negative, Label::Positive], 1, Metric::Euclidean).unwrap();
        assert_eq!(m.predict(&[5.0, 5.0]).unwrap(), Label::Positive);
        assert_eq!(m.predict(&[0.0, 1.0]).unwrap(), Label::Negative);
    }

    #[test]
    fn majority_of_three() {
        let xs: Vec<&[f64]> = vec![&[0.0], &[1.0], &[2.0]];
        let ys = [Label::Positive, Label::Positive, Label::Negative];
        let m = KnnModel::fit(&xs, &ys, 3, Metric::Manhattan).unwrap();
        assert_eq!(m.predict(&[2.0]).unwrap(), Label::Positive);
    }

    #[test]
    fn even_tie_goes_to_nearest() {
        let xs: Vec<&[f64]> = vec![&[0.0], &[1.0]];
        let ys = [Label::Negative, Label::Positive];
        let m = KnnModel::fit(&xs, &ys, 2, Metric::Euclidean).unwrap();
        assert_eq!(m.predict(&[0.9]).unwrap(), Label::Positive);
        assert_eq!(m.predict(&[0.1]).unwrap(), Label::Negative);
    }

    #[test]
    fn empty_model_is_state_error() {
        let m = KnnModel::fit(&[], &[], 1, Metric::Euclidean).unwrap();
        assert!(matches!(m.predict(&[1.0]), Err(Error::State(_))));
    }

    #[test]
    fn k_larger_than_training_rejected() {
        let xs: Vec<&[f64]> = vec![&[0.0]];
        assert!(KnnModel::fit(&xs, &[Label::Positive], 2, Metric::Euclidean).is_err());
    }
}
