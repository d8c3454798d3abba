use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use robust_ssalt::dpd::{fit, FitConfig};
use robust_ssalt::{IntervalData, StressPlan};
use robust_ssalt_ffi::*;

const LEVELS: [f64; 2] = [0.0, 1.0];
const CHANGES: [f64; 2] = [5.0, 6.0];
const TIMES: [f64; 6] = [1.5, 3.0, 5.0, 5.2, 5.4, 6.0];
const COUNTS: [u64; 7] = [3, 8, 5, 5, 5, 5, 0];

fn solar_plan() -> *mut RssaltPlan {
    let mut p = ptr::null_mut();
    let s = unsafe { rssalt_plan_new(LEVELS.as_ptr(), 2, CHANGES.as_ptr(), 2, TIMES.as_ptr(), TIMES.len(), &mut p) };
    assert_eq!(s, RssaltStatus::Ok);
    assert!(!p.is_null());
    p
}

fn last_error() -> String {
    let p = rssalt_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn fit_matches_library() {
    let plan = solar_plan();
    assert_eq!(unsafe { rssalt_plan_n_cells(plan) }, 7);
    let mut f = ptr::null_mut();
    let s = unsafe { rssalt_fit(plan, COUNTS.as_ptr(), COUNTS.len(), 0.0, &mut f) };
    assert_eq!(s, RssaltStatus::Ok);
    assert_eq!(unsafe { rssalt_fit_converged(f) }, 1);

    let mut th = [0.0; 3];
    assert_eq!(unsafe { rssalt_fit_params(f, th.as_mut_ptr()) }, RssaltStatus::Ok);
    let rust_plan = StressPlan::new(LEVELS.to_vec(), CHANGES.to_vec(), TIMES.to_vec()).unwrap();
    let direct = fit(&rust_plan, &IntervalData::new(COUNTS.to_vec()).unwrap(), &FitConfig::default()).unwrap();
    assert_eq!(th, direct.params.to_array());

    let mut cov = [0.0; 9];
    assert_eq!(unsafe { rssalt_fit_covariance(f, cov.as_mut_ptr()) }, RssaltStatus::Ok);
    assert!((cov[0].sqrt() - direct.std_errors()[0]).abs() < 1e-15);
    assert_eq!(cov[1], cov[3]);

    let mut r = RssaltInterval::default();
    assert_eq!(unsafe { rssalt_reliability(f, 0.0, 4.0, 0.95, &mut r) }, RssaltStatus::Ok);
    assert!((r.value - 0.591).abs() < 5e-4);
    assert!(r.transformed_lo < r.value && r.value < r.transformed_hi);
    let mut m = RssaltInterval::default();
    let s = unsafe { rssalt_characteristic(f, RssaltCharacteristic::Mean, 0.0, 0.0, 0.95, &mut m) };
    assert_eq!(s, RssaltStatus::Ok);
    assert!((m.value - 5.468).abs() < 2e-3);

    // exponentiality is not rejected, a1 = 0 is
    let (mut stat, mut p) = (0.0, 0.0);
    let eta_one = [0.0, 0.0, 1.0, 1.0];
    assert_eq!(unsafe { rssalt_wald_linear(f, eta_one.as_ptr(), 1, &mut stat, &mut p) }, RssaltStatus::Ok);
    assert!(p > 0.05);
    let a1_zero = [0.0, 1.0, 0.0, 0.0];
    assert_eq!(unsafe { rssalt_wald_linear(f, a1_zero.as_ptr(), 1, &mut stat, &mut p) }, RssaltStatus::Ok);
    assert!(p < 0.05);

    unsafe {
        rssalt_fit_free(f);
        rssalt_plan_free(plan);
    }
}

#[test]
fn cell_probabilities_sum_to_one() {
    let plan = solar_plan();
    let mut pi = [0.0; 7];
    let s = unsafe { rssalt_cell_probabilities(plan, 1.8, -2.4, 1.5, pi.as_mut_ptr(), 7) };
    assert_eq!(s, RssaltStatus::Ok);
    assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let s = unsafe { rssalt_cell_probabilities(plan, 1.8, -2.4, 1.5, pi.as_mut_ptr(), 6) };
    assert_eq!(s, RssaltStatus::InvalidInput);
    let s = unsafe { rssalt_cell_probabilities(plan, 1.8, -2.4, -1.0, pi.as_mut_ptr(), 7) };
    assert_eq!(s, RssaltStatus::InvalidInput);
    assert!(last_error().contains("shape"));
    unsafe { rssalt_plan_free(plan) };
}

#[test]
fn errors_are_reported() {
    let mut p = ptr::null_mut();
    let bad = [3.0, 1.0];
    let s = unsafe { rssalt_plan_new(bad.as_ptr(), 2, CHANGES.as_ptr(), 2, TIMES.as_ptr(), 6, &mut p) };
    assert_eq!(s, RssaltStatus::InvalidInput);
    assert!(p.is_null());
    assert!(!last_error().is_empty());

    let s = unsafe { rssalt_plan_new(ptr::null(), 2, CHANGES.as_ptr(), 2, TIMES.as_ptr(), 6, &mut p) };
    assert_eq!(s, RssaltStatus::NullPointer);

    let plan = solar_plan();
    let mut f = ptr::null_mut();
    let short = [1u64, 2, 3];
    assert_eq!(unsafe { rssalt_fit(plan, short.as_ptr(), 3, 0.0, &mut f) }, RssaltStatus::Data);
    let single = [0u64, 0, 9, 0, 0, 0, 0];
    assert_eq!(unsafe { rssalt_fit(plan, single.as_ptr(), 7, 0.0, &mut f) }, RssaltStatus::Estimation);
    assert_eq!(unsafe { rssalt_fit(plan, COUNTS.as_ptr(), 7, -1.0, &mut f) }, RssaltStatus::InvalidInput);
    assert!(f.is_null());

    let mut th = [0.0; 3];
    assert_eq!(unsafe { rssalt_fit_params(ptr::null(), th.as_mut_ptr()) }, RssaltStatus::NullPointer);
    assert_eq!(unsafe { rssalt_fit_converged(ptr::null()) }, 0);
    assert_eq!(unsafe { rssalt_plan_n_cells(ptr::null()) }, 0);
    unsafe {
        rssalt_plan_free(plan);
        rssalt_plan_free(ptr::null_mut());
        rssalt_fit_free(ptr::null_mut());
    }
}

#[test]
fn header_is_current_and_compiles() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/robust_ssalt.h")).unwrap();
    for name in [
        "rssalt_plan_new",
        "rssalt_plan_free",
        "rssalt_fit",
        "rssalt_fit_free",
        "rssalt_fit_params",
        "rssalt_fit_covariance",
        "rssalt_cell_probabilities",
        "rssalt_reliability",
        "rssalt_characteristic",
        "rssalt_wald_linear",
        "rssalt_last_error",
        "RSSALT_STATUS_OK",
        "typedef struct RssaltPlan RssaltPlan",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
    let Ok(out) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler on PATH; syntax check not run");
        return;
    };
    assert!(out.status.success());
    let src = std::env::temp_dir().join(format!("rssalt_header_check_{}.c", std::process::id()));
    std::fs::write(
        &src,
        "#include \"robust_ssalt.h\"\nint main(void) { RssaltPlan *p = 0; (void)rssalt_plan_n_cells(p); return RSSALT_STATUS_OK; }\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&src)
        .status()
        .unwrap();
    let _ = std::fs::remove_file(&src);
    assert!(status.success());
}
