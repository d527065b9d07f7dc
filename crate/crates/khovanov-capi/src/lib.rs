//! C ABI over the khovanov engine: opaque table handles, integer error
//! codes, and JSON/CSV accessors, so other languages can bind without
//! understanding the internals.
//!
//! Every function returning `int32_t` uses the `KH_*` codes; on failure the
//! thread-local message from [`kh_last_error`] describes what went wrong.
//! Strings returned as `char*` are owned by the caller and must be released
//! with [`kh_string_free`]; tables with [`kh_table_free`].

use khovanov::braid::{self, compile_with_factors, ClosurePlan};
use khovanov::cli::tensor_path_table;
use khovanov::homology::{bigraded_homology, predict_torsion, HomologyTable};
use khovanov::ring::Ring;
use khovanov::scan::{close_with_basepoints, scan_diagram};
use num_bigint::BigUint;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

pub const KH_OK: i32 = 0;
pub const KH_ERR_PARSE: i32 = 1;
pub const KH_ERR_COMPUTE: i32 = 2;
pub const KH_ERR_NULL: i32 = 3;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into();
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(msg.replace('\0', "?")).unwrap();
    });
}

/// Opaque homology table handle.
pub struct KhTable {
    table: HomologyTable,
}

/// The most recent error message on this thread. Borrowed; valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Engine version string. Static; do not free.
#[no_mangle]
pub extern "C" fn kh_version() -> *const c_char {
    static VERSION: &str = concat!("khv-", env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

unsafe fn cstr<'a>(p: *const c_char, what: &str) -> Result<&'a str, i32> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        return Err(KH_ERR_NULL);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        KH_ERR_PARSE
    })
}

/// Compute the bigraded homology table of a link expression over a ring
/// (`"Z"`, `"Q"`, or `"Zp:<p>"`). `basepoints` is an optional comma list of
/// 1-based strands, or `"auto"`, or null. `tensor_sums` nonzero reduces the
/// connected-sum factors individually and tensors them over R.
///
/// # Safety
/// `expr` and `ring` must be valid NUL-terminated strings; `out` must point
/// to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn kh_compute(
    expr: *const c_char,
    ring: *const c_char,
    basepoints: *const c_char,
    tensor_sums: i32,
    out: *mut *mut KhTable,
) -> i32 {
    if out.is_null() {
        set_error("out is null");
        return KH_ERR_NULL;
    }
    let expr_text = match cstr(expr, "expr") {
        Ok(s) => s,
        Err(code) => return code,
    };
    let ring_text = match cstr(ring, "ring") {
        Ok(s) => s,
        Err(code) => return code,
    };
    let ring: Ring = match ring_text.parse() {
        Ok(r) => r,
        Err(e) => {
            set_error(format!("{e}"));
            return KH_ERR_PARSE;
        }
    };
    let parsed = match braid::parse_expression(expr_text) {
        Ok(e) => e,
        Err(e) => {
            set_error(format!("{e}"));
            return KH_ERR_PARSE;
        }
    };
    let (mut plan, factors) = match compile_with_factors(&parsed) {
        Ok(v) => v,
        Err(e) => {
            set_error(format!("{e}"));
            return KH_ERR_PARSE;
        }
    };
    if !basepoints.is_null() {
        let spec = match cstr(basepoints, "basepoints") {
            Ok(s) => s,
            Err(code) => return code,
        };
        if let Err(e) = apply_basepoints(spec, &mut plan) {
            set_error(e);
            return KH_ERR_PARSE;
        }
    }
    let table = if tensor_sums != 0 && factors.len() > 1 {
        match tensor_path_table(&factors, ring, None) {
            Ok(t) => t,
            Err(e) => {
                set_error(e);
                return KH_ERR_COMPUTE;
            }
        }
    } else {
        bigraded_homology(&close_with_basepoints(scan_diagram(&plan, ring)))
    };
    *out = Box::into_raw(Box::new(KhTable { table }));
    KH_OK
}

fn apply_basepoints(spec: &str, plan: &mut ClosurePlan) -> Result<(), String> {
    if spec == "auto" {
        for comp in plan.components.clone().iter().take(2) {
            plan.add_basepoint(*comp.last().unwrap())
                .map_err(|e| e.to_string())?;
        }
        return Ok(());
    }
    for tok in spec.split(',') {
        let strand: usize = tok
            .trim()
            .parse()
            .map_err(|_| format!("bad basepoint strand `{tok}`"))?;
        if strand == 0 {
            return Err("basepoint strands are 1-based".into());
        }
        plan.add_basepoint(strand - 1).map_err(|e| e.to_string())?;
    }
    Ok(())
}

/// The table as JSON in the fixed schema
/// `{"ring": …, "groups": [{"h","q","free","torsion"}...]}`.
/// Returns null on null input. Free with [`kh_string_free`].
///
/// # Safety
/// `table` must be a live handle from [`kh_compute`].
#[no_mangle]
pub unsafe extern "C" fn kh_table_json(table: *const KhTable) -> *mut c_char {
    let Some(t) = table.as_ref() else {
        set_error("table is null");
        return std::ptr::null_mut();
    };
    let json = serde_json::to_string(&t.table.to_json()).expect("table serializes");
    CString::new(json).unwrap().into_raw()
}

/// The table as CSV (`h,q,free,torsion`). Free with [`kh_string_free`].
///
/// # Safety
/// `table` must be a live handle from [`kh_compute`].
#[no_mangle]
pub unsafe extern "C" fn kh_table_csv(table: *const KhTable) -> *mut c_char {
    let Some(t) = table.as_ref() else {
        set_error("table is null");
        return std::ptr::null_mut();
    };
    CString::new(t.table.to_csv()).unwrap().into_raw()
}

/// Free rank at (h, q); 0 when the group is trivial, −1 on null input.
///
/// # Safety
/// `table` must be a live handle from [`kh_compute`].
#[no_mangle]
pub unsafe extern "C" fn kh_table_free_rank(table: *const KhTable, h: i32, q: i32) -> i64 {
    let Some(t) = table.as_ref() else {
        set_error("table is null");
        return -1;
    };
    t.table.group(h, q).map_or(0, |g| g.free as i64)
}

/// Number of direct summands of exactly order `order` at (h, q) (prime-power
/// orders count elementary divisors by their p-part). −1 on null input.
///
/// # Safety
/// `table` must be a live handle from [`kh_compute`].
#[no_mangle]
pub unsafe extern "C" fn kh_table_summand_count(
    table: *const KhTable,
    h: i32,
    q: i32,
    order: u64,
) -> i64 {
    let Some(t) = table.as_ref() else {
        set_error("table is null");
        return -1;
    };
    t.table.summand_count(h, q, &BigUint::from(order)) as i64
}

/// Predicted torsion bidegree of Kh(L3^k): writes (h, q, min multiplicity)
/// for the ℤ/3ˡ family at index m. p must be 3.
///
/// # Safety
/// The three out-pointers must be valid or null (null skips that output).
#[no_mangle]
pub unsafe extern "C" fn kh_predict(
    p: u32,
    k: u32,
    l: u32,
    m: u32,
    out_h: *mut i32,
    out_q: *mut i32,
    out_min_multiplicity: *mut u64,
) -> i32 {
    match predict_torsion(p, k, l, m) {
        Ok(pred) => {
            if !out_h.is_null() {
                *out_h = pred.h;
            }
            if !out_q.is_null() {
                *out_q = pred.q;
            }
            if !out_min_multiplicity.is_null() {
                *out_min_multiplicity =
                    u64::try_from(pred.min_multiplicity).unwrap_or(u64::MAX);
            }
            KH_OK
        }
        Err(e) => {
            set_error(format!("{e}"));
            KH_ERR_PARSE
        }
    }
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn kh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Release a table handle.
///
/// # Safety
/// `table` must come from [`kh_compute`] and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn kh_table_free(table: *mut KhTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}
