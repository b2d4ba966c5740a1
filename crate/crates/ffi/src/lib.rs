//! C interface to the protocol engine. The matching header is
//! `include/xdialog.h`.
//!
//! Strings cross the boundary as NUL-terminated UTF-8. Strings returned by
//! this library are owned by the caller and released with
//! [`xd_string_free`]. A failing call returns a non-zero [`XdStatus`] (or
//! NULL) and records a code and message readable through
//! [`xd_last_error_code`] and [`xd_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use xdialog_core::protocol::{
    apply_move, default_protocol, legal_moves, load_protocol, validate_trace, Move, MoveKind, ProtocolDefinition, Role,
    SessionState, Trace,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XdStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    IllegalMove = 4,
    Terminated = 5,
    Error = 6,
}

/// A loaded protocol.
pub struct XdProtocol(ProtocolDefinition);

/// A live dialog on one protocol.
pub struct XdSession {
    protocol: ProtocolDefinition,
    state: SessionState,
}

struct LastError {
    code: CString,
    message: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<LastError>> = const { RefCell::new(None) };
}

fn to_cstring(s: impl Into<Vec<u8>>) -> CString {
    CString::new(s).unwrap_or_else(|e| {
        let mut bytes = e.into_vec();
        bytes.retain(|&b| b != 0);
        CString::new(bytes).expect("NUL bytes removed")
    })
}

fn fail(status: XdStatus, code: &str, message: impl Into<String>) -> XdStatus {
    let err = LastError { code: to_cstring(code), message: to_cstring(message.into()) };
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(err));
    status
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// # Safety
/// `s` is NULL or points to a NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, XdStatus> {
    if s.is_null() {
        return Err(fail(XdStatus::NullArgument, "NULL_ARGUMENT", "a required argument was NULL"));
    }
    CStr::from_ptr(s).to_str().map_err(|e| fail(XdStatus::InvalidUtf8, "INVALID_UTF8", e.to_string()))
}

fn give(s: String) -> *mut c_char {
    to_cstring(s).into_raw()
}

/// # Safety
/// `out` is NULL or writable.
unsafe fn write_out(out: *mut *mut c_char, s: String) -> XdStatus {
    if out.is_null() {
        return fail(XdStatus::NullArgument, "NULL_ARGUMENT", "output pointer was NULL");
    }
    *out = give(s);
    XdStatus::Ok
}

/// The bundled default protocol. Never NULL.
#[no_mangle]
pub extern "C" fn xd_protocol_default() -> *mut XdProtocol {
    clear_error();
    Box::into_raw(Box::new(XdProtocol(default_protocol())))
}

/// Loads a protocol from its JSON text. NULL on failure.
///
/// # Safety
/// `json` is NULL or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn xd_protocol_load(json: *const c_char) -> *mut XdProtocol {
    clear_error();
    let Ok(text) = read_str(json) else { return ptr::null_mut() };
    match load_protocol(text) {
        Ok(p) => Box::into_raw(Box::new(XdProtocol(p))),
        Err(e) => {
            fail(XdStatus::ParseError, e.code(), e.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `protocol` is NULL or came from `xd_protocol_default`/`xd_protocol_load`
/// and has not been freed.
#[no_mangle]
pub unsafe extern "C" fn xd_protocol_free(protocol: *mut XdProtocol) {
    if !protocol.is_null() {
        drop(Box::from_raw(protocol));
    }
}

/// Replays a JSONL trace and writes the verdict as JSON to `out_verdict`.
/// A rejected or incomplete trace is still `XD_OK`; only unusable input
/// fails.
///
/// # Safety
/// `protocol` is a live protocol, `trace_jsonl` a NUL-terminated string and
/// `out_verdict` writable.
#[no_mangle]
pub unsafe extern "C" fn xd_validate_trace(
    protocol: *const XdProtocol,
    trace_jsonl: *const c_char,
    out_verdict: *mut *mut c_char,
) -> XdStatus {
    clear_error();
    let Some(p) = protocol.as_ref() else {
        return fail(XdStatus::NullArgument, "NULL_ARGUMENT", "protocol was NULL");
    };
    let text = match read_str(trace_jsonl) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let trace = match Trace::from_jsonl(text) {
        Ok(t) => t,
        Err(e) => return fail(XdStatus::ParseError, "BAD_TRACE", e.to_string()),
    };
    let verdict = validate_trace(&p.0, &trace);
    write_out(out_verdict, serde_json::to_string(&verdict).expect("verdicts serialize"))
}

/// Starts a session at the protocol's initial state. NULL only if
/// `protocol` is NULL.
///
/// # Safety
/// `protocol` is NULL or a live protocol.
#[no_mangle]
pub unsafe extern "C" fn xd_session_new(protocol: *const XdProtocol) -> *mut XdSession {
    clear_error();
    let Some(p) = protocol.as_ref() else {
        fail(XdStatus::NullArgument, "NULL_ARGUMENT", "protocol was NULL");
        return ptr::null_mut();
    };
    let state = SessionState::new(&p.0);
    Box::into_raw(Box::new(XdSession { protocol: p.0.clone(), state }))
}

/// # Safety
/// `session` is NULL or came from `xd_session_new` and has not been freed.
#[no_mangle]
pub unsafe extern "C" fn xd_session_free(session: *mut XdSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Applies one move, given by its kind and actor names (`"QUESTION_WHAT"`,
/// `"Q"`). On failure the session is unchanged.
///
/// # Safety
/// `session` is a live session; `kind` and `actor` are NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn xd_session_apply(
    session: *mut XdSession,
    kind: *const c_char,
    actor: *const c_char,
) -> XdStatus {
    clear_error();
    let Some(s) = session.as_mut() else {
        return fail(XdStatus::NullArgument, "NULL_ARGUMENT", "session was NULL");
    };
    let (kind, actor) = match (read_str(kind), read_str(actor)) {
        (Ok(k), Ok(a)) => (k, a),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    let kind: MoveKind = match kind.parse() {
        Ok(k) => k,
        Err(e) => return fail(XdStatus::ParseError, "UNKNOWN_SYMBOL", format!("{e}")),
    };
    let actor: Role = match actor.parse() {
        Ok(a) => a,
        Err(e) => return fail(XdStatus::ParseError, "UNKNOWN_SYMBOL", format!("{e}")),
    };
    match apply_move(&s.protocol, &s.state, Move::new(kind, actor)) {
        Ok(next) => {
            s.state = next;
            XdStatus::Ok
        }
        Err(e) => {
            let status = if e.code() == "TERMINATED" { XdStatus::Terminated } else { XdStatus::IllegalMove };
            fail(status, e.code(), e.to_string())
        }
    }
}

/// Name of the current state, e.g. `"EXPLANATION_PRESENTED"`.
///
/// # Safety
/// `session` is NULL or a live session.
#[no_mangle]
pub unsafe extern "C" fn xd_session_state(session: *const XdSession) -> *mut c_char {
    clear_error();
    match session.as_ref() {
        Some(s) => give(s.state.current.to_string()),
        None => {
            fail(XdStatus::NullArgument, "NULL_ARGUMENT", "session was NULL");
            ptr::null_mut()
        }
    }
}

/// Non-zero once the session has reached a terminal state.
///
/// # Safety
/// `session` is NULL or a live session.
#[no_mangle]
pub unsafe extern "C" fn xd_session_is_finished(session: *const XdSession) -> i32 {
    session.as_ref().map_or(0, |s| i32::from(s.state.is_finished(&s.protocol)))
}

/// Legal `(kind, actor)` pairs as a JSON array of two-element arrays.
///
/// # Safety
/// `session` is a live session and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn xd_session_legal_moves(session: *const XdSession, out_json: *mut *mut c_char) -> XdStatus {
    clear_error();
    let Some(s) = session.as_ref() else {
        return fail(XdStatus::NullArgument, "NULL_ARGUMENT", "session was NULL");
    };
    match legal_moves(&s.protocol, s.state.current) {
        Ok(steps) => write_out(out_json, serde_json::to_string(&steps).expect("steps serialize")),
        Err(e) => fail(XdStatus::Error, e.code(), e.to_string()),
    }
}

/// The moves applied so far, one JSON object per line.
///
/// # Safety
/// `session` is NULL or a live session.
#[no_mangle]
pub unsafe extern "C" fn xd_session_trace(session: *const XdSession) -> *mut c_char {
    clear_error();
    match session.as_ref() {
        Some(s) => give(s.state.history.to_jsonl()),
        None => {
            fail(XdStatus::NullArgument, "NULL_ARGUMENT", "session was NULL");
            ptr::null_mut()
        }
    }
}

/// Code of the last failure on this thread, or NULL. The pointer stays
/// valid until the next call into this library on the same thread and must
/// not be freed.
#[no_mangle]
pub extern "C" fn xd_last_error_code() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |e| e.code.as_ptr()))
}

/// Message of the last failure on this thread as an owned string, or NULL.
#[no_mangle]
pub extern "C" fn xd_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null_mut(), |e| e.message.clone().into_raw()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` is NULL or was returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
