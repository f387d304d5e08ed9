use std::ffi::{CStr, CString};
use std::ptr;

use f2b_core::synthetic::{generate, SynthConfig};
use f2b_ffi::*;

fn last_error() -> String {
    let p = f2b_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_functions() {
    let mut bmi = 0.0;
    assert_eq!(
        unsafe { f2b_compute_bmi(80.0, 2.0, &mut bmi) },
        F2bStatus::Ok
    );
    assert_eq!(bmi, 20.0);
    assert!(f2b_last_error_message().is_null());
    assert_eq!(
        unsafe { f2b_compute_bmi(-1.0, 2.0, &mut bmi) },
        F2bStatus::Domain
    );
    assert!(last_error().contains("weight"));

    let mut cat = F2bBmiCategory::Normal;
    assert_eq!(unsafe { f2b_categorize(18.5, &mut cat) }, F2bStatus::Ok);
    assert_eq!(cat, F2bBmiCategory::Underweight);
    assert_eq!(unsafe { f2b_categorize(40.0001, &mut cat) }, F2bStatus::Ok);
    assert_eq!(cat, F2bBmiCategory::VerySeverelyObese);
    assert_eq!(unsafe { f2b_categorize(9.0, &mut cat) }, F2bStatus::Domain);

    let (mut one, mut two) = (0.0, 0.0);
    assert_eq!(
        unsafe { f2b_binomial_test(4, 4, 0.5, &mut one, &mut two) },
        F2bStatus::Ok
    );
    assert!((one - 0.0625).abs() < 1e-15);
    assert!((two - 0.125).abs() < 1e-15);
    assert_eq!(
        unsafe { f2b_binomial_test(5, 4, 0.5, &mut one, &mut two) },
        F2bStatus::Validation
    );

    let (xs, ys) = ([1.0, 2.0, 3.0], [2.0, 4.0, 6.0]);
    let mut r = 0.0;
    assert_eq!(
        unsafe { f2b_pearson(xs.as_ptr(), ys.as_ptr(), 3, &mut r) },
        F2bStatus::Ok
    );
    assert_eq!(r, 1.0);
    let flat = [1.0, 1.0, 1.0];
    assert_eq!(
        unsafe { f2b_pearson(flat.as_ptr(), ys.as_ptr(), 3, &mut r) },
        F2bStatus::UndefinedCorrelation
    );
}

#[test]
fn null_pointers_are_rejected() {
    assert_eq!(
        unsafe { f2b_compute_bmi(80.0, 2.0, ptr::null_mut()) },
        F2bStatus::InvalidArgument
    );
    let mut ds = ptr::null_mut();
    assert_eq!(
        unsafe { f2b_dataset_load(ptr::null(), ptr::null(), true, &mut ds) },
        F2bStatus::InvalidArgument
    );
    assert!(ds.is_null());
    let mut out = 0.0;
    assert_eq!(
        unsafe { f2b_model_predict(ptr::null(), ptr::null(), 0, &mut out) },
        F2bStatus::InvalidArgument
    );
    unsafe {
        f2b_dataset_free(ptr::null_mut());
        f2b_model_free(ptr::null_mut());
        assert_eq!(f2b_dataset_len(ptr::null()), 0);
    }
}

#[test]
fn load_train_predict_save() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(&SynthConfig {
        persons: 60,
        dim: 8,
        ..SynthConfig::default()
    })
    .unwrap();
    data.write(dir.path()).unwrap();
    let meta = CString::new(dir.path().join("metadata.csv").to_str().unwrap()).unwrap();
    let emb = CString::new(dir.path().join("embeddings.f2be").to_str().unwrap()).unwrap();
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(
            f2b_dataset_load(meta.as_ptr(), emb.as_ptr(), false, &mut ds),
            F2bStatus::Ok
        );
        assert_eq!(f2b_dataset_len(ds), 120);
        assert_eq!(f2b_dataset_dim(ds), 8);

        let mut model = ptr::null_mut();
        let st = f2b_model_train(
            ds,
            ptr::null(),
            0,
            F2bKernel::Linear,
            0.0,
            10.0,
            1.0,
            1e-3,
            &mut model,
        );
        assert_eq!(st, F2bStatus::Ok);
        assert!(f2b_model_support_len(model) > 0);

        let rec = &data.records[0];
        let raw = &data.embeddings[&rec.record_id].values;
        let mut y = 0.0;
        assert_eq!(
            f2b_model_predict_raw(model, raw.as_ptr(), raw.len(), &mut y),
            F2bStatus::Ok
        );
        assert!((y - rec.bmi).abs() < 2.0, "{y} vs {}", rec.bmi);
        assert_eq!(
            f2b_model_predict_raw(model, raw.as_ptr(), 3, &mut y),
            F2bStatus::Validation
        );

        let path = CString::new(dir.path().join("m.json").to_str().unwrap()).unwrap();
        assert_eq!(f2b_model_save(model, path.as_ptr()), F2bStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(f2b_model_load(path.as_ptr(), &mut back), F2bStatus::Ok);
        let mut y2 = 0.0;
        assert_eq!(
            f2b_model_predict_raw(back, raw.as_ptr(), raw.len(), &mut y2),
            F2bStatus::Ok
        );
        assert_eq!(y, y2);

        let ids = [CString::new("p00000_b").unwrap()];
        let ptrs: Vec<_> = ids.iter().map(|s| s.as_ptr()).collect();
        let mut tiny = ptr::null_mut();
        let st = f2b_model_train(
            ds,
            ptrs.as_ptr(),
            1,
            F2bKernel::Rbf,
            0.0,
            1.0,
            1.0,
            1e-3,
            &mut tiny,
        );
        assert_eq!(st, F2bStatus::Validation);
        assert!(tiny.is_null());

        let missing = CString::new("/nonexistent/m.json").unwrap();
        assert_eq!(f2b_model_load(missing.as_ptr(), &mut tiny), F2bStatus::Io);

        f2b_model_free(back);
        f2b_model_free(model);
        f2b_dataset_free(ds);
    }
}

#[test]
fn errors_are_per_thread() {
    let mut bmi = 0.0;
    assert_eq!(
        unsafe { f2b_compute_bmi(-1.0, 2.0, &mut bmi) },
        F2bStatus::Domain
    );
    std::thread::spawn(|| assert!(f2b_last_error_message().is_null()))
        .join()
        .unwrap();
    assert!(!f2b_last_error_message().is_null());
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(f2b_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
