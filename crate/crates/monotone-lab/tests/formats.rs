//! File-format contracts: bit-exact round trips and loud failures on
//! malformed input.

use std::fs;

use monotone_core::datagen::{generate_balanced, DEFAULT_ATTEMPT_CAP};
use monotone_core::features::featurize_dataset;
use monotone_core::nn::{MlpModel, MlpSpec, TrainMeta};
use monotone_lab::checkpoint::{load_model, save_model, schema_hash, CheckpointHeader};
use monotone_lab::dataset_io::{export_csv, load_dataset, save_dataset};
use monotone_lab::feature_io::{read_feature_csv, write_feature_csv, write_schema_sidecar};
use monotone_lab::LabError;

#[test]
fn dataset_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.mono");
    let d = generate_balanced(3, 50, 9, 1, DEFAULT_ATTEMPT_CAP).unwrap();
    save_dataset(&d, &path).unwrap();
    let loaded = load_dataset(&path).unwrap();

    assert_eq!(loaded.n, d.n);
    assert_eq!(loaded.meta.seed, d.meta.seed);
    assert_eq!(loaded.meta.attempts, d.meta.attempts);
    assert_eq!(loaded.len(), d.len());
    for (a, b) in d.samples.iter().zip(&loaded.samples) {
        assert_eq!(a.monotone, b.monotone);
        // Bit-exact entries.
        for (x, y) in a.matrix.entries().iter().zip(b.matrix.entries()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    // Feature extraction commutes with persistence.
    let before = featurize_dataset(&d);
    let after = featurize_dataset(&loaded);
    assert_eq!(before.values(), after.values());
    assert_eq!(before.labels, after.labels);
}

#[test]
fn malformed_dataset_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.mono");
    let d = generate_balanced(2, 5, 1, 1, DEFAULT_ATTEMPT_CAP).unwrap();
    save_dataset(&d, &path).unwrap();
    let bytes = fs::read(&path).unwrap();

    // Truncation.
    let trunc = dir.path().join("trunc.mono");
    fs::write(&trunc, &bytes[..bytes.len() - 7]).unwrap();
    match load_dataset(&trunc) {
        Err(LabError::Format(msg)) => assert!(msg.contains("truncated"), "{msg}"),
        other => panic!("expected format error, got {other:?}"),
    }

    // Wrong magic.
    let mut bad = bytes.clone();
    bad[0] = b'X';
    let badfile = dir.path().join("bad.mono");
    fs::write(&badfile, &bad).unwrap();
    assert!(matches!(load_dataset(&badfile), Err(LabError::Format(_))));

    // Wrong version byte.
    let mut badv = bytes.clone();
    badv[4] = 0x7f;
    fs::write(&badfile, &badv).unwrap();
    assert!(matches!(load_dataset(&badfile), Err(LabError::Format(_))));

    // Label byte outside {0, 1}. Header is 4+1+4+8+8+8+8 = 41 bytes.
    let mut badl = bytes.clone();
    badl[41] = 9;
    fs::write(&badfile, &badl).unwrap();
    assert!(matches!(load_dataset(&badfile), Err(LabError::Format(_))));

    // Trailing bytes contradict the declared count.
    let mut long = bytes.clone();
    long.push(0);
    fs::write(&badfile, &long).unwrap();
    assert!(matches!(
        load_dataset(&badfile),
        Err(LabError::DimensionMismatch(_))
    ));
}

#[test]
fn dataset_csv_export_shape() {
    let dir = tempfile::tempdir().unwrap();
    let d = generate_balanced(3, 4, 2, 1, DEFAULT_ATTEMPT_CAP).unwrap();
    let path = dir.path().join("d.csv");
    export_csv(&d, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "id,label,a_1_1,a_1_2,a_1_3,a_2_1,a_2_2,a_2_3,a_3_1,a_3_2,a_3_3"
    );
    assert_eq!(lines.count(), 8);
}

#[test]
fn feature_csv_round_trip_preserves_values_and_undefined_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let d = generate_balanced(3, 30, 4, 1, DEFAULT_ATTEMPT_CAP).unwrap();
    let table = featurize_dataset(&d);
    let path = dir.path().join("f.csv");
    write_feature_csv(&table, &path).unwrap();
    write_schema_sidecar(&path, &table, None).unwrap();

    let loaded = read_feature_csv(&path).unwrap();
    assert_eq!(loaded.dim, table.width());
    assert_eq!(loaded.labels, table.labels);
    assert_eq!(loaded.values.len(), table.values().len());
    for (a, b) in loaded.values.iter().zip(table.values()) {
        assert_eq!(a.to_bits(), b.to_bits(), "shortest round-trip formatting");
    }
    for (a, b) in loaded.ratios.iter().zip(&table.ratios) {
        assert_eq!(a.r01, b.r01);
        assert_eq!(a.r012, b.r012);
    }
    let sidecar = loaded.sidecar.expect("sidecar written");
    assert_eq!(sidecar.n, 3);
    assert!(!sidecar.standardized);
    assert_eq!(sidecar.index["abs_c_0"], table.schema.abs_coeff_index(0));
}

#[test]
fn n7_feature_csv_has_73_feature_columns() {
    use monotone_core::datagen::{Dataset, DatasetMeta, LabeledSample};
    use monotone_core::linalg::SquareMatrix;
    // Hand-built two-sample n=7 dataset; no generation needed.
    let identity = SquareMatrix::identity(7);
    let mut non_mono = SquareMatrix::identity(7);
    non_mono.set(0, 0, -1.0);
    let d = Dataset {
        n: 7,
        samples: vec![
            LabeledSample {
                matrix: identity,
                monotone: true,
                sample_id: 0,
            },
            LabeledSample {
                matrix: non_mono,
                monotone: false,
                sample_id: 1,
            },
        ],
        meta: DatasetMeta {
            seed: 0,
            attempts: 2,
            neg_tol: 0.0,
            monotone_count: 1,
            non_monotone_count: 1,
            generator_version: 1,
        },
    };
    let table = featurize_dataset(&d);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f7.csv");
    write_feature_csv(&table, &path).unwrap();
    let header = fs::read_to_string(&path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    let cols: Vec<&str> = header.split(',').collect();
    assert_eq!(cols.len(), 73 + 3);
    assert_eq!(&cols[73..], ["label", "r01", "r012"]);
}

#[test]
fn checkpoint_round_trip_preserves_model_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let spec = MlpSpec::new(4, vec![8, 4], 0.1, 1e-4);
    let model = MlpModel::build(spec, 77).unwrap();
    let columns = vec![
        "a".to_string(),
        "b".to_string(),
        "c".to_string(),
        "d".to_string(),
    ];
    let header = CheckpointHeader {
        spec: model.spec.clone(),
        train_meta: TrainMeta {
            seed: 77,
            epochs_run: 3,
            best_epoch: 2,
        },
        seed: 77,
        preset: None,
        columns: columns.clone(),
        schema_hash: schema_hash(&columns),
        standardizer: None,
    };
    let path = dir.path().join("m.ckpt");
    save_model(&path, &model, &header).unwrap();
    let (loaded, h) = load_model(&path).unwrap();
    assert_eq!(loaded.flat_params(), model.flat_params());
    assert_eq!(h.columns, columns);
    assert_eq!(h.train_meta.best_epoch, 2);
    let x = [0.1, -0.4, 0.9, 0.3];
    assert_eq!(loaded.predict(&x).unwrap(), model.predict(&x).unwrap());

    // Corrupt checkpoints are rejected.
    let mut bytes = fs::read(&path).unwrap();
    bytes.truncate(bytes.len() - 3);
    fs::write(&path, &bytes).unwrap();
    assert!(load_model(&path).is_err());
}
