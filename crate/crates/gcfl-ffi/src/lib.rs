//! C ABI over the core library: opaque surface handles, status codes, and a
//! thread-local last-error message. The header `include/gcfl.h` is generated
//! at build time by cbindgen.
//!
//! Conventions: every function returns a [`GcflStatus`]; output parameters
//! are written only on `Ok`; handles from `gcfl_surface_parse` must be
//! released with `gcfl_surface_free`.

use gcfl::dynamics::{gcfl_generic, project_tangent, ClassicalState};
use gcfl::math::Vec3;
use gcfl::qfactor::{closed_form_q, rhs_torus, ClosedFormCase, Component};
use gcfl::surface::{curvature_fd_oracle, parse_surface, SurfaceSpec};
use gcfl::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcflStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidSpec = 4,
    OffSurface = 5,
    SingularGradient = 6,
    SingularEquation = 7,
    DomainError = 8,
    EvalError = 9,
}

/// Cartesian component selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcflComponent {
    X = 0,
    Y = 1,
    Z = 2,
}

impl From<GcflComponent> for Component {
    fn from(c: GcflComponent) -> Component {
        match c {
            GcflComponent::X => Component::X,
            GcflComponent::Y => Component::Y,
            GcflComponent::Z => Component::Z,
        }
    }
}

/// Cross-section cases with listed closed-form dummy factors.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcflClosedFormCase {
    Plane = 0,
    Circle = 1,
    Parabola = 2,
    Hyperbola = 3,
    Sine = 4,
}

impl From<GcflClosedFormCase> for ClosedFormCase {
    fn from(c: GcflClosedFormCase) -> ClosedFormCase {
        match c {
            GcflClosedFormCase::Plane => ClosedFormCase::Plane,
            GcflClosedFormCase::Circle => ClosedFormCase::Circle,
            GcflClosedFormCase::Parabola => ClosedFormCase::Parabola,
            GcflClosedFormCase::Hyperbola => ClosedFormCase::Hyperbola,
            GcflClosedFormCase::Sine => ClosedFormCase::Sine,
        }
    }
}

/// Normal, curvatures and geometric potential at a surface point.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GcflCurvature {
    pub normal: [f64; 3],
    pub mean: f64,
    pub gauss: f64,
    pub geometric_potential: f64,
}

/// Opaque handle to a parsed surface spec.
pub struct GcflSurface {
    inner: SurfaceSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(e: &Error) -> GcflStatus {
    let msg = CString::new(e.to_string()).unwrap_or_else(|_| CString::new("error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
    match e {
        Error::Parse { .. } => GcflStatus::ParseError,
        Error::InvalidSpec(_) => GcflStatus::InvalidSpec,
        Error::OffSurface { .. } => GcflStatus::OffSurface,
        Error::SingularGradient(..) => GcflStatus::SingularGradient,
        Error::SingularEquation { .. } => GcflStatus::SingularEquation,
        Error::Domain(_) | Error::StepSizeCollapse { .. } => GcflStatus::DomainError,
        _ => GcflStatus::EvalError,
    }
}

/// Copy the most recent error message of this thread into `buf`, always
/// NUL-terminated. Returns the full message length in bytes.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null (query mode).
#[no_mangle]
pub unsafe extern "C" fn gcfl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let copy = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, copy);
            *buf.add(copy) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gcfl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parse a surface-spec document. On success writes a heap handle into
/// `out`; release it with [`gcfl_surface_free`].
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gcfl_surface_parse(text: *const c_char, out: *mut *mut GcflSurface) -> GcflStatus {
    if text.is_null() || out.is_null() {
        return GcflStatus::NullPointer;
    }
    let Ok(text) = CStr::from_ptr(text).to_str() else {
        return GcflStatus::InvalidUtf8;
    };
    match parse_surface(text) {
        Ok(spec) => {
            *out = Box::into_raw(Box::new(GcflSurface { inner: spec }));
            GcflStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Release a handle from [`gcfl_surface_parse`]. Null is a no-op.
///
/// # Safety
/// `surface` must be a pointer previously returned by `gcfl_surface_parse`
/// and not freed yet.
#[no_mangle]
pub unsafe extern "C" fn gcfl_surface_free(surface: *mut GcflSurface) {
    if !surface.is_null() {
        drop(Box::from_raw(surface));
    }
}

unsafe fn surface_ref<'a>(ptr: *const GcflSurface) -> Option<&'a SurfaceSpec> {
    ptr.as_ref().map(|s| &s.inner)
}

/// Unit normal at an on-surface point; writes three components.
///
/// # Safety
/// `surface` must be a live handle, `out_normal` must point to 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn gcfl_surface_unit_normal(
    surface: *const GcflSurface,
    x: f64,
    y: f64,
    z: f64,
    out_normal: *mut f64,
) -> GcflStatus {
    let (Some(spec), false) = (surface_ref(surface), out_normal.is_null()) else {
        return GcflStatus::NullPointer;
    };
    match spec.unit_normal(Vec3::new(x, y, z)) {
        Ok(n) => {
            std::ptr::copy_nonoverlapping(n.as_array().as_ptr(), out_normal, 3);
            GcflStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Curvature bundle (normal, M, K, V_g) at an on-surface point.
///
/// # Safety
/// `surface` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gcfl_surface_curvatures(
    surface: *const GcflSurface,
    x: f64,
    y: f64,
    z: f64,
    out: *mut GcflCurvature,
) -> GcflStatus {
    let (Some(spec), false) = (surface_ref(surface), out.is_null()) else {
        return GcflStatus::NullPointer;
    };
    match spec.curvature_bundle(Vec3::new(x, y, z)) {
        Ok(b) => {
            *out = GcflCurvature {
                normal: b.normal.as_array(),
                mean: b.mean,
                gauss: b.gauss,
                geometric_potential: b.geometric_potential,
            };
            GcflStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Finite-difference curvature oracle; writes (M, K) estimates.
///
/// # Safety
/// `surface` must be a live handle; `out_mean` and `out_gauss` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gcfl_surface_curvature_oracle(
    surface: *const GcflSurface,
    x: f64,
    y: f64,
    z: f64,
    step: f64,
    out_mean: *mut f64,
    out_gauss: *mut f64,
) -> GcflStatus {
    let (Some(spec), false) = (surface_ref(surface), out_mean.is_null() || out_gauss.is_null()) else {
        return GcflStatus::NullPointer;
    };
    match curvature_fd_oracle(spec, Vec3::new(x, y, z), step) {
        Ok((m, k)) => {
            *out_mean = m;
            *out_gauss = k;
            GcflStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Project a momentum onto the tangent plane at `position`.
///
/// # Safety
/// Pointers must reference 3 doubles each; `surface` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gcfl_surface_project_tangent(
    surface: *const GcflSurface,
    position: *const f64,
    momentum: *const f64,
    out_tangent: *mut f64,
) -> GcflStatus {
    let (Some(spec), false) = (
        surface_ref(surface),
        position.is_null() || momentum.is_null() || out_tangent.is_null(),
    ) else {
        return GcflStatus::NullPointer;
    };
    let x = Vec3::new(*position, *position.add(1), *position.add(2));
    let p = Vec3::new(*momentum, *momentum.add(1), *momentum.add(2));
    match project_tangent(spec, x, p) {
        Ok(t) => {
            std::ptr::copy_nonoverlapping(t.as_array().as_ptr(), out_tangent, 3);
            GcflStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Force law dp/dt = -n (p . grad n . p)/mu for a tangent state, using the
/// spec's configured mass.
///
/// # Safety
/// Pointers must reference 3 doubles each; `surface` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gcfl_surface_force(
    surface: *const GcflSurface,
    position: *const f64,
    momentum: *const f64,
    out_force: *mut f64,
) -> GcflStatus {
    let (Some(spec), false) = (
        surface_ref(surface),
        position.is_null() || momentum.is_null() || out_force.is_null(),
    ) else {
        return GcflStatus::NullPointer;
    };
    let x = Vec3::new(*position, *position.add(1), *position.add(2));
    let p = Vec3::new(*momentum, *momentum.add(1), *momentum.add(2));
    let state = ClassicalState::new(x, p, spec.mu);
    match gcfl_generic(spec, &state) {
        Ok(f) => {
            std::ptr::copy_nonoverlapping(f.force.as_array().as_ptr(), out_force, 3);
            GcflStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// dq_i/dtheta of the torus dummy-factor equations.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gcfl_torus_q_rhs(
    a: f64,
    b: f64,
    theta: f64,
    component: GcflComponent,
    out: *mut f64,
) -> GcflStatus {
    if out.is_null() {
        return GcflStatus::NullPointer;
    }
    match rhs_torus(a, b, theta, component.into()) {
        Ok(v) => {
            *out = v;
            GcflStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// The listed closed-form dummy factor q_i(x) for a named cross-section.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gcfl_closed_form_q(
    case: GcflClosedFormCase,
    component: GcflComponent,
    x: f64,
    out: *mut f64,
) -> GcflStatus {
    if out.is_null() {
        return GcflStatus::NullPointer;
    }
    match closed_form_q(case.into(), component.into(), x) {
        Ok(v) => {
            *out = v;
            GcflStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}
