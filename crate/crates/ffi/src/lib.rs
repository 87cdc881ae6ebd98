//! C ABI over the enclosure library.
//!
//! Every entry point returns an [`EnclosureStatus`]; on failure the message
//! is kept per thread and can be copied out with [`enclosure_last_error`].
//! Sessions are opaque handles owned by the caller and released with
//! [`enclosure_session_free`]. Strings returned through `char **` must be
//! released with [`enclosure_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use enclosure::config::{RunConfig, Session};
use enclosure::geom::Vec3;
use enclosure::obstacle::{first_reflector, Ball};
use enclosure::potentials::YukawaBallField;
use enclosure::probe::{curvature_extract, principal_directions, reconstruct_ball, scan_reflector, ProbeMode};
use enclosure::wavesim::read_archive;
use enclosure::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnclosureStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    HypothesisViolated = 4,
    NumericalFailure = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnclosureMode {
    Geometry = 0,
    SemiAnalytic = 1,
    Fdtd = 2,
}

/// Reports available through [`enclosure_report_json`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnclosureReport {
    Scan = 0,
    Curvature = 1,
    ReconstructBall = 2,
    Principal = 3,
}

/// Opaque run handle.
pub struct EnclosureSession {
    session: Session,
    base: PathBuf,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> EnclosureStatus {
    match e {
        Error::Hypothesis(_)
        | Error::Shadow
        | Error::DegenerateReflector(_)
        | Error::DegenerateDeterminant(_)
        | Error::ShiftOutOfRange { .. } => EnclosureStatus::HypothesisViolated,
        Error::InvalidParameter(_) | Error::Parse(_) | Error::Json(_) | Error::InvalidSpheroid { .. } => {
            EnclosureStatus::InvalidConfig
        }
        Error::Io(_) => EnclosureStatus::Io,
        _ => EnclosureStatus::NumericalFailure,
    }
}

struct Fail(EnclosureStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(EnclosureStatus::NullArgument, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EnclosureStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            EnclosureStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EnclosureStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(EnclosureStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn session<'a>(s: *const EnclosureSession) -> Result<&'a EnclosureSession, Fail> {
    s.as_ref().ok_or_else(|| null("session"))
}

unsafe fn session_mut<'a>(s: *mut EnclosureSession) -> Result<&'a mut EnclosureSession, Fail> {
    s.as_mut().ok_or_else(|| null("session"))
}

unsafe fn vec3_arg(p: *const f64, what: &str) -> Result<Vec3, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = std::slice::from_raw_parts(p, 3);
    Ok(Vec3::new(s[0], s[1], s[2]))
}

unsafe fn write_vec3(p: *mut f64, v: &Vec3) {
    if !p.is_null() {
        std::slice::from_raw_parts_mut(p, 3).copy_from_slice(v.as_slice());
    }
}

unsafe fn write_f64(p: *mut f64, v: f64) {
    if !p.is_null() {
        *p = v;
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn enclosure_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (truncated to
/// `len` bytes including the terminator) and returns the full length
/// including the terminator. `buf` may be null to query the length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn enclosure_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

fn new_session(config: RunConfig, base: PathBuf, out: *mut *mut EnclosureSession) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    let session = Session::new(config, &base)?;
    let handle = Box::new(EnclosureSession { session, base });
    // SAFETY: checked non-null above; the caller provides writable storage.
    unsafe { *out = Box::into_raw(handle) };
    Ok(())
}

/// Parses and validates a JSON run configuration. Relative mesh paths are
/// resolved against `base_dir`, which may be null for the working directory.
///
/// # Safety
/// `json` and a non-null `base_dir` must be NUL-terminated strings; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn enclosure_session_from_json(
    json: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut EnclosureSession,
) -> EnclosureStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let base = if base_dir.is_null() {
            PathBuf::new()
        } else {
            PathBuf::from(str_arg(base_dir, "base_dir")?)
        };
        new_session(RunConfig::from_json(text)?, base, out)
    })
}

/// The unit sphere with source and receiver balls of radius 0.5 at
/// `(4, 0, 0)` and `(0, 4, 0)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn enclosure_session_s1(out: *mut *mut EnclosureSession) -> EnclosureStatus {
    guard(|| new_session(RunConfig::s1(), PathBuf::new(), out))
}

/// # Safety
/// `s` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn enclosure_session_free(s: *mut EnclosureSession) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Switches the data source, revalidating the configuration. Stored traces
/// are kept.
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn enclosure_session_set_mode(s: *mut EnclosureSession, mode: EnclosureMode) -> EnclosureStatus {
    guard(|| {
        let h = session_mut(s)?;
        let mut config = h.session.config.clone();
        config.mode = match mode {
            EnclosureMode::Geometry => ProbeMode::Geometry,
            EnclosureMode::SemiAnalytic => ProbeMode::SemiAnalytic,
            EnclosureMode::Fdtd => ProbeMode::Fdtd,
        };
        let mut next = Session::new(config, &h.base)?;
        next.trace = h.session.trace.take();
        next.companion = h.session.companion.take();
        next.tau_cap = h.session.tau_cap;
        h.session = next;
        Ok(())
    })
}

/// Runs the wave solver (and its companion, if configured) and keeps the
/// traces in the session.
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn enclosure_session_simulate(s: *mut EnclosureSession) -> EnclosureStatus {
    guard(|| Ok(session_mut(s)?.session.simulate()?))
}

/// Loads trace archives written by the command-line tool; `companion_path`
/// may be null.
///
/// # Safety
/// `s` must be a live handle; paths must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn enclosure_session_load_traces(
    s: *mut EnclosureSession,
    trace_path: *const c_char,
    companion_path: *const c_char,
) -> EnclosureStatus {
    guard(|| {
        let h = session_mut(s)?;
        let fine = read_archive(str_arg(trace_path, "trace_path")?.as_ref())?;
        let coarse = if companion_path.is_null() {
            None
        } else {
            Some(read_archive(str_arg(companion_path, "companion_path")?.as_ref())?)
        };
        Ok(h.session.attach(fine, coarse)?)
    })
}

/// Exact `min φ - η - η'` from the configured geometry.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn enclosure_decay_threshold(s: *const EnclosureSession, out: *mut f64) -> EnclosureStatus {
    guard(|| {
        let h = session(s)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = h.session.prepared.decay_threshold;
        Ok(())
    })
}

/// Decay-rate estimate of `min φ - η - η'` from the session's data source.
///
/// # Safety
/// `s` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn enclosure_enclose(
    s: *const EnclosureSession,
    rate: *mut f64,
    uncertainty: *mut f64,
) -> EnclosureStatus {
    guard(|| {
        let h = session(s)?;
        let (b, bp) = h.session.balls()?;
        let r = h.session.source()?.rate(&b, &bp)?;
        write_f64(rate, r.rate);
        write_f64(uncertainty, r.uncertainty);
        Ok(())
    })
}

/// First reflection point and outward normal of the configured obstacle.
///
/// # Safety
/// `s` must be a live handle; non-null outputs must hold 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn enclosure_first_reflector(
    s: *const EnclosureSession,
    q: *mut f64,
    normal: *mut f64,
) -> EnclosureStatus {
    guard(|| {
        let h = session(s)?;
        let (b, bp) = h.session.balls()?;
        let set = first_reflector(&h.session.prepared.obstacle, &b.center, &bp.center, 0.0)?;
        let r = set.single()?;
        write_vec3(q, &r.q);
        write_vec3(normal, &r.normal);
        Ok(())
    })
}

/// Center and radius of a ball obstacle recovered from the data source.
///
/// # Safety
/// `s` must be a live handle; `center` must hold 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn enclosure_reconstruct_ball(
    s: *const EnclosureSession,
    center: *mut f64,
    radius: *mut f64,
) -> EnclosureStatus {
    guard(|| {
        let h = session(s)?;
        let (b, bp) = h.session.balls()?;
        let r = reconstruct_ball(
            &h.session.source()?,
            &b,
            &bp,
            &h.session.config.probe.reconstruct_options(),
        )?;
        write_vec3(center, &r.center);
        write_f64(radius, r.radius);
        Ok(())
    })
}

/// Full report as a JSON string. `q` (3 doubles) selects the reflector for
/// curvature and principal reports; when null the geometric first
/// reflector is used.
///
/// # Safety
/// `s` must be a live handle; `q` null or 3 doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn enclosure_report_json(
    s: *const EnclosureSession,
    report: EnclosureReport,
    q: *const f64,
    out: *mut *mut c_char,
) -> EnclosureStatus {
    guard(|| {
        let h = session(s)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (b, bp) = h.session.balls()?;
        let src = h.session.source()?;
        let probe = &h.session.config.probe;
        let point = || -> Result<Vec3, Fail> {
            if q.is_null() {
                let set = first_reflector(&h.session.prepared.obstacle, &b.center, &bp.center, 0.0)?;
                Ok(set.single()?.q)
            } else {
                vec3_arg(q, "q")
            }
        };
        let json = match report {
            EnclosureReport::Scan => {
                let r = src.rate(&b, &bp)?;
                let c = r.rate + b.radius + bp.radius;
                serde_json::to_string(&scan_reflector(&src, &b, &bp, c, r.uncertainty, &probe.scan_options())?)
            }
            EnclosureReport::Curvature => {
                serde_json::to_string(&curvature_extract(&src, &point()?, &b, &bp, probe.s1, probe.s2)?)
            }
            EnclosureReport::ReconstructBall => {
                serde_json::to_string(&reconstruct_ball(&src, &b, &bp, &probe.reconstruct_options())?)
            }
            EnclosureReport::Principal => serde_json::to_string(&principal_directions(
                &src,
                &point()?,
                &b,
                &bp,
                &probe.thetas(),
                probe.s1,
                probe.s2,
                probe.isotropic_tol,
            )?),
        }
        .map_err(Error::from)?;
        *out = CString::new(json).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn enclosure_string_free(p: *mut c_char) {
    if !p.is_null() {
        drop(CString::from_raw(p));
    }
}

/// `(1/4π) ∫_B e^{-τ|x-y|}/|x-y| dy` for the ball `B` in closed form.
///
/// # Safety
/// `center` and `x` must hold 3 doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn enclosure_yukawa_ball(
    center: *const f64,
    radius: f64,
    tau: f64,
    x: *const f64,
    out: *mut f64,
) -> EnclosureStatus {
    guard(|| {
        let ball = Ball::new(vec3_arg(center, "center")?, radius)?;
        let field = YukawaBallField::new(ball, tau)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = field.value(&vec3_arg(x, "x")?);
        Ok(())
    })
}
