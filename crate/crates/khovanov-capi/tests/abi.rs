//! Exercise the C ABI through the exported symbols, the way a foreign
//! binding would.

use khovanov_capi::*;
use std::ffi::{CStr, CString};

#[test]
fn compute_trefoil_through_abi() {
    let expr = CString::new("T(2,3)").unwrap();
    let ring = CString::new("Z").unwrap();
    let mut table: *mut KhTable = std::ptr::null_mut();
    let code = unsafe { kh_compute(expr.as_ptr(), ring.as_ptr(), std::ptr::null(), 0, &mut table) };
    assert_eq!(code, KH_OK);
    assert!(!table.is_null());
    unsafe {
        assert_eq!(kh_table_free_rank(table, 0, 1), 1);
        assert_eq!(kh_table_free_rank(table, 0, 3), 1);
        assert_eq!(kh_table_free_rank(table, 3, 7), 0);
        assert_eq!(kh_table_summand_count(table, 3, 7, 2), 1);
        let json = kh_table_json(table);
        assert!(!json.is_null());
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        assert!(text.contains("\"ring\":\"Z\"") || text.contains("\"ring\": \"Z\""));
        kh_string_free(json);
        let csv = kh_table_csv(table);
        let text = CStr::from_ptr(csv).to_str().unwrap().to_owned();
        assert!(text.starts_with("h,q,free,torsion"));
        kh_string_free(csv);
        kh_table_free(table);
    }
}

#[test]
fn tensor_sums_and_errors_through_abi() {
    let expr = CString::new("L3 # T(2,3)").unwrap();
    let ring = CString::new("Z").unwrap();
    let mut table: *mut KhTable = std::ptr::null_mut();
    let code = unsafe { kh_compute(expr.as_ptr(), ring.as_ptr(), std::ptr::null(), 1, &mut table) };
    assert_eq!(code, KH_OK);
    unsafe {
        assert_eq!(kh_table_summand_count(table, 11, 30, 3), 1);
        assert_eq!(kh_table_summand_count(table, 12, 34, 3), 1);
        kh_table_free(table);
    }
    // parse failure surfaces as a code plus message
    let bad = CString::new("wat").unwrap();
    let mut table: *mut KhTable = std::ptr::null_mut();
    let code = unsafe { kh_compute(bad.as_ptr(), ring.as_ptr(), std::ptr::null(), 0, &mut table) };
    assert_eq!(code, KH_ERR_PARSE);
    let msg = unsafe { CStr::from_ptr(kh_last_error()) }.to_str().unwrap();
    assert!(!msg.is_empty());
    // null handling
    let code = unsafe {
        kh_compute(
            std::ptr::null(),
            ring.as_ptr(),
            std::ptr::null(),
            0,
            &mut table,
        )
    };
    assert_eq!(code, KH_ERR_NULL);
}

#[test]
fn predictions_through_abi() {
    let (mut h, mut q, mut mult) = (0i32, 0i32, 0u64);
    let code = unsafe { kh_predict(3, 1, 1, 0, &mut h, &mut q, &mut mult) };
    assert_eq!(code, KH_OK);
    assert_eq!((h, q, mult), (11, 30, 1));
    let code = unsafe { kh_predict(5, 1, 1, 0, &mut h, &mut q, &mut mult) };
    assert_eq!(code, KH_ERR_PARSE);
    let version = unsafe { CStr::from_ptr(kh_version()) }.to_str().unwrap();
    assert!(version.starts_with("khv-"));
}
