use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use leafwood::features::compute_features;
use leafwood::spatial::SpatialIndex;
use leafwood::synthgen::{generate_tree, TreeSpec};
use leafwood_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(lw_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn tree(points: usize) -> (Vec<f64>, Vec<u8>) {
    let spec = TreeSpec {
        total_points: Some(points),
        leaf_fraction: 0.5,
        seed: 7,
        ..TreeSpec::default()
    };
    let (cloud, labels) = generate_tree(&spec).unwrap();
    let xyz = cloud.iter().flat_map(|p| p.to_array()).collect();
    let codes = labels.iter().map(|c| c.code()).collect();
    (xyz, codes)
}

fn cloud_from(xyz: &[f64]) -> *mut LwCloud {
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { lw_cloud_from_xyz(xyz.as_ptr(), xyz.len() / 3, &mut c) }, LwStatus::Ok);
    c
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(lw_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn null_arguments_are_rejected() {
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { lw_cloud_from_xyz(ptr::null(), 3, &mut c) }, LwStatus::NullPointer);
    assert!(c.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { lw_cloud_len(ptr::null()) }, 0);
    assert_eq!(
        unsafe { lw_compute_features(ptr::null_mut(), 10, ptr::null_mut(), 0) },
        LwStatus::NullPointer
    );
    unsafe {
        lw_cloud_free(ptr::null_mut());
        lw_model_free(ptr::null_mut());
    }
}

#[test]
fn bad_input_maps_to_status_classes() {
    let mut c = ptr::null_mut();
    let nan = [0.0, f64::NAN, 1.0];
    assert_eq!(unsafe { lw_cloud_from_xyz(nan.as_ptr(), 1, &mut c) }, LwStatus::Config);

    let missing = CString::new("/nonexistent/cloud.xyz").unwrap();
    assert_eq!(unsafe { lw_cloud_read(missing.as_ptr(), &mut c) }, LwStatus::Io);
    assert!(last_error().contains("/nonexistent/cloud.xyz"));

    let xyz: Vec<f64> = (0..30).map(|i| i as f64).collect();
    let cloud = cloud_from(&xyz);
    // k must stay below the point count.
    assert_eq!(
        unsafe { lw_compute_features(cloud, 10, ptr::null_mut(), 0) },
        LwStatus::Config
    );
    let mut buf = [0.0; 4];
    assert_eq!(
        unsafe { lw_compute_features(cloud, 3, buf.as_mut_ptr(), buf.len()) },
        LwStatus::InvalidArgument
    );
    unsafe { lw_cloud_free(cloud) };
}

#[test]
fn features_match_the_library() {
    let (xyz, _) = tree(3000);
    let cloud = cloud_from(&xyz);
    let n = unsafe { lw_cloud_len(cloud) };
    assert_eq!(n, 3000);
    let mut out = vec![0.0; n * 5];
    assert_eq!(
        unsafe { lw_compute_features(cloud, 20, out.as_mut_ptr(), out.len()) },
        LwStatus::Ok
    );
    let pc = leafwood::PointCloud::new(
        xyz.chunks(3).map(|c| leafwood::Point3::new(c[0], c[1], c[2])).collect(),
    )
    .unwrap();
    let want = compute_features(&pc, &SpatialIndex::build(&pc).unwrap(), 20).unwrap();
    let flat: Vec<f64> = want.iter().flat_map(|f| f.to_array()).collect();
    assert_eq!(out, flat);
    unsafe { lw_cloud_free(cloud) };
}

#[test]
fn train_classify_evaluate_and_reload() {
    let (xyz, truth) = tree(20_000);
    let cloud = cloud_from(&xyz);
    let mut opts = unsafe { std::mem::zeroed() };
    assert_eq!(unsafe { lw_train_options_default(&mut opts) }, LwStatus::Ok);
    assert_eq!(opts.k, 100);
    opts.k = 50;
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { lw_auto_train(cloud, &opts, &mut model) }, LwStatus::Ok);

    let n = truth.len();
    let mut pred = vec![9u8; n];
    assert_eq!(
        unsafe { lw_classify(model, cloud, opts.k, pred.as_mut_ptr(), n) },
        LwStatus::Ok
    );
    assert!(pred.iter().all(|&b| b <= 1));
    let mut m = LwMetrics::default();
    assert_eq!(
        unsafe { lw_evaluate(pred.as_ptr(), truth.as_ptr(), n, &mut m) },
        LwStatus::Ok
    );
    assert_eq!(m.tp + m.tn + m.fp + m.fn_, n as u64);
    assert!(m.p_o > 0.5, "p_o {}", m.p_o);

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("m.svm").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { lw_model_save(model, path.as_ptr()) }, LwStatus::Ok);
    let mut loaded = ptr::null_mut();
    assert_eq!(unsafe { lw_model_load(path.as_ptr(), &mut loaded) }, LwStatus::Ok);
    let mut again = vec![9u8; n];
    assert_eq!(
        unsafe { lw_classify(loaded, cloud, opts.k, again.as_mut_ptr(), n) },
        LwStatus::Ok
    );
    assert_eq!(pred, again);

    let f = [0.0, 0.0, 1.0, 0.1, 0.02];
    let (mut a, mut b) = (0.0, 1.0);
    unsafe {
        assert_eq!(lw_decision_value(model, f.as_ptr(), &mut a), LwStatus::Ok);
        assert_eq!(lw_decision_value(loaded, f.as_ptr(), &mut b), LwStatus::Ok);
    }
    assert_eq!(a, b);

    let mut short = vec![0u8; n - 1];
    assert_eq!(
        unsafe { lw_classify(model, cloud, opts.k, short.as_mut_ptr(), n - 1) },
        LwStatus::InvalidArgument
    );
    unsafe {
        lw_model_free(model);
        lw_model_free(loaded);
        lw_cloud_free(cloud);
    }
}

#[test]
fn evaluate_checks_label_values() {
    let pred = [1u8, 0, 2];
    let truth = [1u8, 0, 1];
    let mut m = LwMetrics::default();
    assert_eq!(
        unsafe { lw_evaluate(pred.as_ptr(), truth.as_ptr(), 3, &mut m) },
        LwStatus::InvalidArgument
    );
    let pred = [1u8, 0, 1, 0];
    let truth = [1u8, 0, 1, 0];
    assert_eq!(
        unsafe { lw_evaluate(pred.as_ptr(), truth.as_ptr(), 4, &mut m) },
        LwStatus::Ok
    );
    assert_eq!((m.p_o, m.kappa_paper, m.kappa_standard), (1.0, 1.0, 1.0));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/leafwood.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in [
        "lw_cloud_from_xyz",
        "lw_cloud_read",
        "lw_compute_features",
        "lw_auto_train",
        "lw_model_load",
        "lw_model_save",
        "lw_classify",
        "lw_evaluate",
        "lw_last_error_message",
        "LW_STATUS_NUMERIC = 4",
    ] {
        assert!(text.contains(sym), "header lacks {sym}");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"leafwood.h\"\nint main(void) { LwCloud *c = 0; (void)lw_cloud_len(c); return 0; }\n",
    )
    .unwrap();
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(status) = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, "-I"])
            .arg(header.parent().unwrap())
            .arg(&src)
            .status()
        else {
            eprintln!("{compiler} not available, skipping");
            continue;
        };
        assert!(status.success(), "{compiler} rejected the header");
    }
}
