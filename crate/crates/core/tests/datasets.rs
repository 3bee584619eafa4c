mod common;

use lxdr_core::data::{
    load_bundled, load_csv, parse_csv, standardize, subsample, train_test_split, write_csv,
    BundledDataset, Dataset, SplitSpec, TargetColumn,
};
use lxdr_core::dr::{pca_fit, PcaSpectrum};
use lxdr_core::{DataMatrix, DrKind, Error, FitParams, FittedDR, Reducer};
use rand::Rng;

use common::*;

#[test]
fn bundled_shapes() {
    for (which, rows, cols, classes) in [
        (BundledDataset::Iris, 150, 4, Some(3)),
        (BundledDataset::Diabetes, 442, 10, None),
        (BundledDataset::Digits, 1797, 64, Some(10)),
    ] {
        let d = load_bundled(which).unwrap();
        assert_eq!((d.rows(), d.cols()), (rows, cols), "{which}");
        assert_eq!(d.feature_names.len(), cols);
        let target = d.target.as_ref().unwrap();
        assert_eq!(target.len(), rows);
        if let Some(k) = classes {
            let mut labels: Vec<i64> = target.iter().map(|t| *t as i64).collect();
            labels.sort_unstable();
            labels.dedup();
            assert_eq!(labels.len(), k);
        }
    }
}

#[test]
fn loading_is_deterministic() {
    assert_eq!(
        load_bundled(BundledDataset::Iris).unwrap(),
        load_bundled(BundledDataset::Iris).unwrap()
    );
}

#[test]
fn iris_components_match_published_table() {
    let iris = load_bundled(BundledDataset::Iris).unwrap();
    let model = pca_fit(&iris.features, 3).unwrap();
    let published = [
        [0.361, -0.084, 0.856, 0.358],
        [0.656, 0.73, -0.173, -0.075],
        [-0.582, 0.597, 0.076, 0.545],
    ];
    for (k, row) in published.iter().enumerate() {
        let c = model.components.row(k);
        // published rows are only defined up to sign
        let sign = if c.iter().zip(row).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
            -1.0
        } else {
            1.0
        };
        for (a, b) in c.iter().zip(row) {
            assert!(
                (sign * a - b).abs() < 1.5e-3,
                "component {k}: {c:?} vs {row:?}"
            );
        }
    }
}

#[test]
fn iris_and_diabetes_retention_at_table_dims() {
    // Digits at 25 dims falls short of 0.95; the acceptance target reports it
    for (which, n_r) in [(BundledDataset::Iris, 3), (BundledDataset::Diabetes, 8)] {
        let d = load_bundled(which).unwrap();
        let model = PcaSpectrum::compute(&d.features)
            .unwrap()
            .into_model(n_r)
            .unwrap();
        assert!(model.cumulative_variance() >= 0.95, "{which}");
    }
}

#[test]
fn digits_subset_through_pca() {
    let digits = load_bundled(BundledDataset::Digits).unwrap();
    let subset = subsample(&digits, 0.25, 42).unwrap();
    assert_eq!(subset.rows(), 449);
    assert_eq!(subset, subsample(&digits, 0.25, 42).unwrap());
    let dr = FittedDR::fit(&subset.features, &FitParams::new(DrKind::Pca, 25, 0)).unwrap();
    let reduced = dr.transform_batch(&subset.features).unwrap();
    assert_eq!((reduced.rows(), reduced.cols()), (449, 25));
}

#[test]
fn diabetes_split_sizes() {
    let d = load_bundled(BundledDataset::Diabetes).unwrap();
    let (train, test) = train_test_split(&d, SplitSpec::default()).unwrap();
    assert_eq!((train.rows(), test.rows()), (354, 88));
    let mut all: Vec<Vec<u64>> = train
        .features
        .iter_rows()
        .chain(test.features.iter_rows())
        .map(|r| r.iter().map(|v| v.to_bits()).collect())
        .collect();
    let mut original: Vec<Vec<u64>> = d
        .features
        .iter_rows()
        .map(|r| r.iter().map(|v| v.to_bits()).collect())
        .collect();
    all.sort();
    original.sort();
    assert_eq!(all, original);
}

#[test]
fn csv_round_trip_is_exact() {
    let mut r = rng(17);
    let rows: Vec<Vec<f64>> = (0..25)
        .map(|_| {
            (0..5)
                .map(|_| r.random_range(-1e3..1e3) * r.random_range(1e-9..1.0))
                .collect()
        })
        .collect();
    let target: Vec<f64> = (0..25).map(|_| r.random::<f64>()).collect();
    let d = Dataset::new(
        "seeded",
        DataMatrix::from_rows(&rows).unwrap(),
        Some(target),
        (1..=5).map(|j| format!("f{j}")).collect(),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("seeded.csv");
    write_csv(&path, &d).unwrap();
    let back = load_csv(&path, true, Some(TargetColumn::Last)).unwrap();
    assert_eq!(back, d);
}

#[test]
fn csv_errors_carry_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "a,b\n1,2\n3,x\n").unwrap();
    let err = load_csv(&path, true, None).unwrap_err();
    let text = err.to_string();
    assert!(
        text.contains("bad.csv") && text.contains("row 3") && text.contains("column 2"),
        "{text}"
    );
    assert!(matches!(
        parse_csv("t", "a,b\n1,2\n3,x\n", true, None),
        Err(Error::Parse { row: 3, col: 2, .. })
    ));

    let missing = dir.path().join("missing.csv");
    let err = load_csv(&missing, true, None).unwrap_err();
    assert!(matches!(&err, Error::Load { path, .. } if path == &missing));
}

#[test]
fn standardize_bundled_diabetes() {
    let d = load_bundled(BundledDataset::Diabetes).unwrap();
    let (s, record) = standardize(&d).unwrap();
    assert!(record.constant.iter().all(|c| !c));
    for j in 0..s.cols() {
        let col = s.features.column(j);
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let std = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col.len() as f64).sqrt();
        assert!(mean.abs() < 1e-10 && (std - 1.0).abs() < 1e-10);
    }
    for (orig, z) in d.features.iter_rows().zip(s.features.iter_rows()) {
        assert!(max_abs_diff(&record.invert(z), orig) < 1e-10);
    }
}
