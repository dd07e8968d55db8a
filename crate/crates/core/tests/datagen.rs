use std::path::Path;
use std::time::Instant;

use ctf_core::datagen::{build_pack, read_pack, write_pack, DatasetPack, PackDir, PackOverrides, System};
use ctf_core::{Error, TimeMatrix};

/// Independent copy of the layout: (name, rows, start, end).
const EXPECTED: [(&str, usize, usize, usize); 19] = [
    ("X1train", 10000, 0, 10000),
    ("X2train", 10000, 0, 10000),
    ("X3train", 10000, 0, 10000),
    ("X4train", 100, 0, 100),
    ("X5train", 100, 0, 100),
    ("X6train", 10000, 0, 10000),
    ("X7train", 10000, 0, 10000),
    ("X8train", 10000, 0, 10000),
    ("X9train", 100, 9900, 10000),
    ("X10train", 100, 9900, 10000),
    ("X1test", 1000, 10000, 11000),
    ("X2test", 10000, 0, 10000),
    ("X3test", 1000, 10000, 11000),
    ("X4test", 10000, 0, 10000),
    ("X5test", 1000, 10000, 11000),
    ("X6test", 1000, 100, 1100),
    ("X7test", 1000, 100, 1100),
    ("X8test", 1000, 10000, 11000),
    ("X9test", 1000, 10000, 11000),
];

fn lorenz() -> DatasetPack {
    build_pack(System::Lorenz, 2024, &PackOverrides::default()).unwrap()
}

fn check_layout(pack: &DatasetPack, cols: usize) {
    assert_eq!(pack.train.len() + pack.test.len(), EXPECTED.len());
    for (name, rows, start, end) in EXPECTED {
        let m = pack.get(name).unwrap_or_else(|| panic!("missing {name}"));
        assert_eq!(m.shape(), (rows, cols), "{name}");
        let entry = pack.manifest.entry(name).unwrap();
        assert_eq!((entry.rows, entry.cols, entry.start, entry.end), (rows, cols, start, end), "{name}");
    }
}

fn noise_ratio(noisy: &TimeMatrix, clean: &TimeMatrix) -> Vec<f64> {
    let diff: Vec<f64> = noisy.as_slice().iter().zip(clean.as_slice()).map(|(a, b)| a - b).collect();
    let diff = TimeMatrix::new(clean.rows(), clean.cols(), diff).unwrap();
    diff.column_stds()
        .iter()
        .zip(clean.column_stds())
        .map(|(d, c)| d / c)
        .collect()
}

#[test]
fn lorenz_pack_matches_layout() {
    let pack = lorenz();
    check_layout(&pack, 3);
    assert_eq!(pack.dataset_id(), "ODE_Lorenz");
}

#[test]
fn windows_are_cut_from_the_same_trajectory() {
    let pack = lorenz();
    let g = |n: &str| pack.get(n).unwrap();
    assert_eq!(g("X2test"), g("X1train"));
    assert_eq!(g("X4test"), g("X1train"));
    assert_eq!(g("X3test"), g("X1test"));
    assert_eq!(g("X5test"), g("X1test"));
    assert_eq!(g("X6test"), g("X7test"));
    assert_eq!(g("X4train"), &g("X1train").slice_rows(0, 100).unwrap());
    assert_eq!(g("X6test"), &g("X1train").slice_rows(100, 1100).unwrap());
    assert_ne!(g("X8test"), g("X9test"));
    assert_ne!(g("X6train"), g("X7train"));
}

#[test]
fn noise_matches_configured_fractions() {
    let pack = lorenz();
    let clean = pack.get("X1train").unwrap();
    for (name, frac) in [("X2train", 0.05), ("X3train", 0.25)] {
        for r in noise_ratio(pack.get(name).unwrap(), clean) {
            assert!((r / frac - 1.0).abs() < 0.05, "{name}: ratio {r}");
        }
    }
    // only 100 rows: looser statistical band
    for r in noise_ratio(pack.get("X5train").unwrap(), pack.get("X4train").unwrap()) {
        assert!((r / 0.05 - 1.0).abs() < 0.25, "X5train ratio {r}");
    }
}

#[test]
fn parametric_trajectories_use_configured_values() {
    let pack = lorenz();
    let p = &pack.manifest.parametric;
    assert_eq!(p.training, [26.0, 28.0, 30.0]);
    assert_eq!((p.interpolation, p.extrapolation), (27.0, 33.0));
    let rhos: Vec<f64> = pack.manifest.trajectories.iter().map(|t| t.params.varied_value()).collect();
    assert_eq!(rhos, vec![28.0, 26.0, 28.0, 30.0, 27.0, 33.0]);
}

#[test]
fn build_is_deterministic_and_seed_sensitive() {
    assert_eq!(lorenz(), lorenz());
    let other = build_pack(System::Lorenz, 2025, &PackOverrides::default()).unwrap();
    assert_ne!(other.get("X1train"), lorenz().get("X1train"));
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn write_read_round_trip_is_exact() {
    let pack = lorenz();
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    write_pack(&pack, &a).unwrap();
    write_pack(&lorenz(), &b).unwrap();
    let files = dir_bytes(&a);
    assert_eq!(files.len(), 20, "19 matrices and a manifest");
    assert_eq!(files, dir_bytes(&b));
    assert_eq!(read_pack(&a).unwrap(), pack);
}

#[test]
fn truncated_matrix_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    write_pack(&lorenz(), tmp.path()).unwrap();
    let path = tmp.path().join("X3test.mat");
    let mut bytes = std::fs::read(&path).unwrap();
    bytes.truncate(bytes.len() - 24);
    std::fs::write(&path, bytes).unwrap();
    let err = read_pack(tmp.path()).unwrap_err();
    assert!(matches!(err, Error::MalformedMatrix { .. }), "{err}");

    // a well-formed file with the wrong shape is a shape mismatch
    TimeMatrix::zeros(999, 3).unwrap().write_mat(&path).unwrap();
    let err = read_pack(tmp.path()).unwrap_err();
    assert!(matches!(err, Error::ShapeMismatch { ref name, .. } if name == "X3test"), "{err}");
}

fn edit_manifest(dir: &Path, edit: impl FnOnce(&mut serde_json::Value)) {
    let path = dir.join("manifest.json");
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    edit(&mut v);
    std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
}

#[test]
fn manifest_invariants_enforced_on_read() {
    let tmp = tempfile::tempdir().unwrap();
    write_pack(&lorenz(), tmp.path()).unwrap();
    edit_manifest(tmp.path(), |v| v["parametric"]["interpolation"] = 35.0.into());
    assert!(matches!(PackDir::open(tmp.path()), Err(Error::InvalidManifest(_))));

    write_pack(&lorenz(), tmp.path()).unwrap();
    edit_manifest(tmp.path(), |v| v["format_version"] = 7.into());
    assert!(matches!(
        PackDir::open(tmp.path()),
        Err(Error::VersionMismatch { expected: 1, found: 7 })
    ));

    write_pack(&lorenz(), tmp.path()).unwrap();
    edit_manifest(tmp.path(), |v| v["matrices"][3]["rows"] = 99.into());
    assert!(PackDir::open(tmp.path()).is_err());

    write_pack(&lorenz(), tmp.path()).unwrap();
    std::fs::remove_file(tmp.path().join("X9train.mat")).unwrap();
    assert!(matches!(read_pack(tmp.path()), Err(Error::MissingFile(_))));
}

#[test]
fn ks_pack_matches_layout() {
    let started = Instant::now();
    let pack = build_pack(System::Ks, 7, &PackOverrides::default()).unwrap();
    println!("ks pack built in {:.1?}", started.elapsed());
    check_layout(&pack, 1024);
    let x4 = pack.manifest.entry("X4train").unwrap();
    assert_eq!((x4.rows, x4.cols, x4.start, x4.end), (100, 1024, 0, 100));
    let mean_drift = pack
        .get("X1train")
        .unwrap()
        .iter_rows()
        .map(|r| r.iter().sum::<f64>() / r.len() as f64)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(mean_drift < 1e-8, "spatial mean drift {mean_drift}");
}
