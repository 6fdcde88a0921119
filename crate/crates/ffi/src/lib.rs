//! C ABI over the lowering pipeline.
//!
//! Conventions: every function returns a [`TmfStatus`]; results come back
//! through out-pointers. Handles are opaque and freed by their matching
//! `_free` function. Strings returned by the library are NUL-terminated
//! and released with [`tmf_string_free`]. On any non-Ok status the
//! thread-local message inspected by [`tmf_last_error_message`] is set.

use num_rational::BigRational;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;
use tmflow::beltrami::{self, CauchyDatum, VectorSeries};
use tmflow::cantor::{check_disjoint_images, compile_machine, CompiledMachine};
use tmflow::dynamics::{reach, HaltingSet, Reach};
use tmflow::machine::{parse_machine, parse_tape_spec, RunStatus, TuringMachine};
use tmflow::planar;

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

/// Status code of every API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmfStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Parsing a machine, tape or polynomial failed.
    ParseError = 3,
    /// Arguments were structurally valid but outside the supported range.
    InvalidInput = 4,
}

/// Opaque machine handle.
pub struct TmfMachine {
    inner: TuringMachine,
}

/// Opaque handle to a fully lowered machine (shift, bit shift, block map).
pub struct TmfCompiled {
    machine: TuringMachine,
    inner: CompiledMachine,
}

/// Opaque truncated vector-series handle.
pub struct TmfSeries {
    inner: VectorSeries,
    datum: CauchyDatum,
}

/// Copies the last error message into `buf` (NUL-terminated, truncated to
/// `cap`); returns the full message length in bytes.
///
/// # Safety
/// `buf` must point to `cap` writable bytes, or be NULL with `cap` 0.
#[no_mangle]
pub unsafe extern "C" fn tmf_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast(), n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must have been returned by a tmflow function and not freed before.
#[no_mangle]
pub unsafe extern "C" fn tmf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, TmfStatus> {
    if ptr.is_null() {
        set_error("string argument is NULL");
        return Err(TmfStatus::NullArgument);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        TmfStatus::InvalidUtf8
    })
}

unsafe fn write_out<T>(out: *mut T, value: T) -> TmfStatus {
    if out.is_null() {
        set_error("output pointer is NULL");
        return TmfStatus::NullArgument;
    }
    unsafe { out.write(value) };
    TmfStatus::Ok
}

macro_rules! deref_handle {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(h) => h,
            None => {
                set_error("handle is NULL");
                return TmfStatus::NullArgument;
            }
        }
    };
}

/// Parses a machine description document.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tmf_machine_parse(
    text: *const c_char,
    out: *mut *mut TmfMachine,
) -> TmfStatus {
    let text = match unsafe { read_str(text) } {
        Ok(t) => t,
        Err(s) => return s,
    };
    match parse_machine(text) {
        Ok(inner) => unsafe {
            write_out(out, Box::into_raw(Box::new(TmfMachine { inner })))
        },
        Err(e) => {
            set_error(e.to_string());
            TmfStatus::ParseError
        }
    }
}

/// # Safety
/// `m` must come from [`tmf_machine_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tmf_machine_free(m: *mut TmfMachine) {
    if !m.is_null() {
        drop(unsafe { Box::from_raw(m) });
    }
}

/// # Safety
/// `m` must be a live machine handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tmf_machine_state_count(
    m: *const TmfMachine,
    out: *mut u32,
) -> TmfStatus {
    let m = deref_handle!(m);
    unsafe { write_out(out, m.inner.state_count()) }
}

/// Operational reversibility via disjointness of reachable image blocks.
///
/// # Safety
/// `m` must be a live machine handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tmf_machine_is_reversible(
    m: *const TmfMachine,
    out: *mut bool,
) -> TmfStatus {
    let m = deref_handle!(m);
    unsafe { write_out(out, m.inner.is_reversible()) }
}

/// Runs the machine from a `position:bit` tape spec. `*out_halted` reports
/// whether the halt state was reached within `max_steps` and `*out_steps`
/// the halting step (unchanged when still running).
///
/// # Safety
/// Pointer arguments must be valid as described above.
#[no_mangle]
pub unsafe extern "C" fn tmf_machine_run(
    m: *const TmfMachine,
    tape_spec: *const c_char,
    max_steps: u64,
    out_halted: *mut bool,
    out_steps: *mut u64,
) -> TmfStatus {
    let m = deref_handle!(m);
    let spec = match unsafe { read_str(tape_spec) } {
        Ok(t) => t,
        Err(s) => return s,
    };
    let tape = match parse_tape_spec(spec) {
        Ok(t) => t,
        Err(e) => {
            set_error(e.to_string());
            return TmfStatus::ParseError;
        }
    };
    let outcome = m
        .inner
        .run(&m.inner.start_configuration(tape), max_steps as usize);
    match outcome.status {
        RunStatus::Halted { step, .. } => {
            if let s @ (TmfStatus::NullArgument | TmfStatus::InvalidUtf8) =
                unsafe { write_out(out_steps, step as u64) }
            {
                return s;
            }
            unsafe { write_out(out_halted, true) }
        }
        RunStatus::Running => unsafe { write_out(out_halted, false) },
    }
}

/// Lowers a machine through shift, bit recoding and block map.
///
/// # Safety
/// `m` must be a live machine handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tmf_machine_compile(
    m: *const TmfMachine,
    out: *mut *mut TmfCompiled,
) -> TmfStatus {
    let m = deref_handle!(m);
    match compile_machine(&m.inner) {
        Ok(inner) => unsafe {
            write_out(
                out,
                Box::into_raw(Box::new(TmfCompiled {
                    machine: m.inner.clone(),
                    inner,
                })),
            )
        },
        Err(e) => {
            set_error(e.to_string());
            TmfStatus::InvalidInput
        }
    }
}

/// # Safety
/// `c` must come from [`tmf_machine_compile`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tmf_compiled_free(c: *mut TmfCompiled) {
    if !c.is_null() {
        drop(unsafe { Box::from_raw(c) });
    }
}

/// Number of affine pieces in the full block map.
///
/// # Safety
/// `c` must be a live compiled handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tmf_compiled_component_count(
    c: *const TmfCompiled,
    out: *mut usize,
) -> TmfStatus {
    let c = deref_handle!(c);
    unsafe { write_out(out, c.inner.block_map.components().len()) }
}

/// Pairwise disjointness of image blocks, over all windows or only the
/// machine-reachable ones.
///
/// # Safety
/// `c` must be a live compiled handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tmf_compiled_images_disjoint(
    c: *const TmfCompiled,
    reachable_only: bool,
    out: *mut bool,
) -> TmfStatus {
    let c = deref_handle!(c);
    let result = if reachable_only {
        check_disjoint_images(&c.inner.encodable_block_map())
    } else {
        check_disjoint_images(&c.inner.block_map)
    };
    unsafe { write_out(out, result.disjoint) }
}

/// Bounded reachability of the halt coding set from an encoded start tape.
/// `*out_reached` says whether it was reached within `bound`; on success
/// `*out_step` carries the first hitting step.
///
/// # Safety
/// Pointer arguments must be valid as described above.
#[no_mangle]
pub unsafe extern "C" fn tmf_compiled_reach_halt(
    c: *const TmfCompiled,
    tape_spec: *const c_char,
    bound: u64,
    out_reached: *mut bool,
    out_step: *mut u64,
) -> TmfStatus {
    let c = deref_handle!(c);
    let spec = match unsafe { read_str(tape_spec) } {
        Ok(t) => t,
        Err(s) => return s,
    };
    let tape = match parse_tape_spec(spec) {
        Ok(t) => t,
        Err(e) => {
            set_error(e.to_string());
            return TmfStatus::ParseError;
        }
    };
    let start = c
        .inner
        .encode_configuration(&c.machine.start_configuration(tape));
    let target = HaltingSet::for_machine(&c.machine, &c.inner.bit_coding);
    match reach(&c.inner.block_map, &start, &target, bound as usize) {
        Ok(Reach::Reached(n)) => {
            if let s @ (TmfStatus::NullArgument | TmfStatus::InvalidUtf8) =
                unsafe { write_out(out_step, n as u64) }
            {
                return s;
            }
            unsafe { write_out(out_reached, true) }
        }
        Ok(Reach::NotWithin(_)) => unsafe { write_out(out_reached, false) },
        Err(e) => {
            set_error(e.to_string());
            TmfStatus::InvalidInput
        }
    }
}

/// Renders the block-map table; free the result with [`tmf_string_free`].
///
/// # Safety
/// `c` must be a live compiled handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tmf_compiled_blockmap_report(
    c: *const TmfCompiled,
    out: *mut *mut c_char,
) -> TmfStatus {
    let c = deref_handle!(c);
    let report = c.inner.block_map.render_report();
    let cstr = CString::new(report).expect("report has no interior NUL");
    unsafe { write_out(out, cstr.into_raw()) }
}

/// The configuration encoding 1/(2^q 3^r 5^s) as a decimal string "p/q";
/// free with [`tmf_string_free`].
///
/// # Safety
/// Pointer arguments must be valid as described above.
#[no_mangle]
pub unsafe extern "C" fn tmf_phi_encode(
    state: u32,
    tape_spec: *const c_char,
    out: *mut *mut c_char,
) -> TmfStatus {
    if state == 0 {
        set_error("states are numbered from 1");
        return TmfStatus::InvalidInput;
    }
    let spec = match unsafe { read_str(tape_spec) } {
        Ok(t) => t,
        Err(s) => return s,
    };
    let tape = match parse_tape_spec(spec) {
        Ok(t) => t,
        Err(e) => {
            set_error(e.to_string());
            return TmfStatus::ParseError;
        }
    };
    let phi = planar::phi_encode(state, &tape);
    let cstr = CString::new(phi.to_string()).expect("rational has no interior NUL");
    unsafe { write_out(out, cstr.into_raw()) }
}

/// Extends the gradient of `potential` (a polynomial in x and y) to a
/// truncated field with curl u = lambda u.
///
/// # Safety
/// Pointer arguments must be valid as described above.
#[no_mangle]
pub unsafe extern "C" fn tmf_beltrami_extend(
    potential: *const c_char,
    lambda: *const c_char,
    order: u32,
    out: *mut *mut TmfSeries,
) -> TmfStatus {
    let potential = match unsafe { read_str(potential) } {
        Ok(t) => t,
        Err(s) => return s,
    };
    let lambda = match unsafe { read_str(lambda) } {
        Ok(t) => t,
        Err(s) => return s,
    };
    let f = match beltrami::parse_poly(potential) {
        Ok(f) => f,
        Err(e) => {
            set_error(e.to_string());
            return TmfStatus::ParseError;
        }
    };
    let lambda: BigRational = match beltrami::parse_rational(lambda) {
        Ok(l) => l,
        Err(e) => {
            set_error(e.to_string());
            return TmfStatus::ParseError;
        }
    };
    let datum = match CauchyDatum::new(f, lambda) {
        Ok(d) => d,
        Err(e) => {
            set_error(e.to_string());
            return TmfStatus::InvalidInput;
        }
    };
    match beltrami::extend(&datum, order as usize) {
        Ok(series) => unsafe {
            write_out(out, Box::into_raw(Box::new(TmfSeries { inner: series, datum })))
        },
        Err(e) => {
            set_error(e.to_string());
            TmfStatus::InvalidInput
        }
    }
}

/// # Safety
/// `s` must come from [`tmf_beltrami_extend`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tmf_series_free(s: *mut TmfSeries) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Largest z-order through which the curl and divergence residual
/// identities hold exactly; -1 if they fail at order 0.
///
/// # Safety
/// `s` must be a live series handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tmf_series_residual_order(
    s: *const TmfSeries,
    out: *mut i64,
) -> TmfStatus {
    let s = deref_handle!(s);
    let report = beltrami::residual(&s.inner, &s.datum);
    let through = report
        .identities_hold_through()
        .map(|k| k as i64)
        .unwrap_or(-1);
    unsafe { write_out(out, through) }
}

/// Evaluates the truncated field; `out` receives the three components.
///
/// # Safety
/// `s` must be a live series handle; `out` must point to three doubles.
#[no_mangle]
pub unsafe extern "C" fn tmf_series_evaluate(
    s: *const TmfSeries,
    x: f64,
    y: f64,
    z: f64,
    out: *mut f64,
) -> TmfStatus {
    let s = deref_handle!(s);
    if out.is_null() {
        set_error("output pointer is NULL");
        return TmfStatus::NullArgument;
    }
    let u = s.inner.evaluate(x, y, z);
    unsafe {
        ptr::copy_nonoverlapping(u.as_ptr(), out, 3);
    }
    TmfStatus::Ok
}

/// Whether the disk return map with parameters l, k (rationals in turns)
/// degenerates to the identity.
///
/// # Safety
/// Pointer arguments must be valid as described above.
#[no_mangle]
pub unsafe extern "C" fn tmf_rotation_is_identity(
    l: *const c_char,
    k: *const c_char,
    out: *mut bool,
) -> TmfStatus {
    let (l, k) = match (unsafe { read_str(l) }, unsafe { read_str(k) }) {
        (Ok(l), Ok(k)) => (l, k),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    let parse = |t: &str| beltrami::parse_rational(t);
    let (l, k) = match (parse(l), parse(k)) {
        (Ok(l), Ok(k)) => (l, k),
        (Err(e), _) | (_, Err(e)) => {
            set_error(e.to_string());
            return TmfStatus::ParseError;
        }
    };
    match tmflow::dynamics::rotation_return(&l, &k) {
        Ok(rot) => unsafe { write_out(out, rot.is_identity()) },
        Err(e) => {
            set_error(e.to_string());
            TmfStatus::InvalidInput
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_codes_are_stable() {
        assert_eq!(TmfStatus::Ok as i32, 0);
        assert_eq!(TmfStatus::ParseError as i32, 3);
    }
}
