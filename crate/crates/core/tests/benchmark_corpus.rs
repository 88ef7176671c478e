use raman_core::baselines::{KnnModel, Metric};
use raman_core::experiment::{gen_benchmark, BenchmarkParams};
use raman_core::splits::make_fold_plan;
use raman_core::{Label, SpectraSet};

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_separation(params: &BenchmarkParams) {
    let b = gen_benchmark(params, 3).unwrap();
    let mut intra: f64 = 0.0;
    for label in [Label::Positive, Label::Negative] {
        let class = b.spectra.with_label(label);
        for (i, x) in class.iter().enumerate() {
            for y in class.spectra()[i + 1..].iter() {
                intra = intra.max(euclid(x.intensities(), y.intensities()));
            }
        }
    }
    let mut cross = f64::INFINITY;
    for o in b.outliers.iter() {
        for s in b.spectra.iter() {
            cross = cross.min(euclid(o.intensities(), s.intensities()));
        }
    }
    assert!(cross > intra, "outlier min distance {cross} vs inlier max intra-class {intra}");
}

fn nn_accuracy(set: &SpectraSet) -> f64 {
    let plan = make_fold_plan(set, 0).unwrap();
    let mut correct = 0;
    let mut total = 0;
    for fold in &plan.folds {
        let train = set.subset(&fold.train).unwrap();
        let test = set.subset(&fold.test).unwrap();
        let m = KnnModel::fit(&train.features(), &train.labels(), 1, Metric::Euclidean).unwrap();
        for s in test.iter() {
            correct += usize::from(m.predict(s.intensities()).unwrap() == s.label);
            total += 1;
        }
    }
    correct as f64 / total as f64
}

#[test]
fn outlier_family_is_farther_than_any_inlier_pair() {
    check_separation(&BenchmarkParams::small());
    check_separation(&BenchmarkParams::default());
}

#[test]
fn nearest_neighbour_separates_the_classes() {
    for params in [BenchmarkParams::small(), BenchmarkParams::default()] {
        let b = gen_benchmark(&params, 4).unwrap();
        let acc = nn_accuracy(&b.spectra);
        assert!(acc >= 0.95, "{} features: 1-NN accuracy {acc}", params.features);
    }
}
