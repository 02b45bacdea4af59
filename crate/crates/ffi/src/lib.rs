//! C ABI over `permstab`.
//!
//! Every object crosses the boundary as an opaque pointer owned by the
//! caller and released with its `*_free` function. Every fallible call
//! returns a [`PsStatus`]; on failure `ps_last_error` describes the most
//! recent error on the calling thread. Rationals come back as `i64`
//! numerator/denominator pairs in lowest terms.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use permstab::map::{defects, is_homomorphism, symmetrize};
use permstab::perm::hamming;
use permstab::{correct, CorrectionResult, Error, FiniteGroup, GroupMap, Permutation, Rational};

/// A finite group given by its multiplication table.
pub struct PsGroup(Arc<FiniteGroup>);

/// A map from a group into `Sym(n)`.
pub struct PsMap(GroupMap);

/// The outcome of a repair.
pub struct PsCorrection(CorrectionResult);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A guaranteed bound failed inside the library.
    InvariantViolation = 3,
    /// A rational did not fit in 64 bits.
    Overflow = 4,
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: PsStatus, message: impl Into<String>) -> PsStatus {
    set_error(message);
    status
}

fn from_error(e: Error) -> PsStatus {
    let status = if e.is_invariant_failure() {
        PsStatus::InvariantViolation
    } else {
        PsStatus::InvalidArgument
    };
    fail(status, e.to_string())
}

fn guard(body: impl FnOnce() -> PsStatus) -> PsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(PsStatus::Panic, msg)
        }
    }
}

fn boxed<T>(out: *mut *mut T, value: T) -> PsStatus {
    // SAFETY: callers check `out` for null before building `value`.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    PsStatus::Ok
}

fn write_rational(r: Rational, num: *mut i64, den: *mut i64) -> PsStatus {
    let (Ok(n), Ok(d)) = (i64::try_from(*r.numer()), i64::try_from(*r.denom())) else {
        return fail(PsStatus::Overflow, format!("{r} does not fit in 64 bits"));
    };
    // SAFETY: callers check both pointers for null.
    unsafe {
        *num = n;
        *den = d;
    }
    PsStatus::Ok
}

macro_rules! non_null {
    ($($p:expr),+) => {
        if $($p.is_null())||+ {
            return fail(PsStatus::NullPointer, "null pointer argument");
        }
    };
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ps_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ps_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `ℤ/m`.
#[no_mangle]
pub extern "C" fn ps_group_cyclic(m: usize, out: *mut *mut PsGroup) -> PsStatus {
    guard(|| {
        non_null!(out);
        if m == 0 {
            return fail(
                PsStatus::InvalidArgument,
                "cyclic group order must be positive",
            );
        }
        boxed(out, PsGroup(Arc::new(FiniteGroup::cyclic(m))))
    })
}

/// `Sym(k)` for `k ≤ 6`, elements in lexicographic order of their images.
#[no_mangle]
pub extern "C" fn ps_group_symmetric(k: usize, out: *mut *mut PsGroup) -> PsStatus {
    guard(|| {
        non_null!(out);
        if k > 6 {
            return fail(
                PsStatus::InvalidArgument,
                "symmetric groups are tabulated up to degree 6",
            );
        }
        boxed(out, PsGroup(Arc::new(FiniteGroup::symmetric(k))))
    })
}

/// A group from a row-major `order × order` table, `table[a*order + b] = a*b`.
///
/// # Safety
/// `table` must point to `order * order` readable values.
#[no_mangle]
pub unsafe extern "C" fn ps_group_from_table(
    order: usize,
    table: *const usize,
    out: *mut *mut PsGroup,
) -> PsStatus {
    guard(|| {
        non_null!(table, out);
        let Some(len) = order.checked_mul(order) else {
            return fail(PsStatus::InvalidArgument, "order too large");
        };
        let flat = std::slice::from_raw_parts(table, len);
        let rows = flat.chunks(order.max(1)).map(<[usize]>::to_vec).collect();
        match FiniteGroup::from_mul_table(rows) {
            Ok(g) => boxed(out, PsGroup(Arc::new(g))),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `group` must come from a `ps_group_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn ps_group_order(group: *const PsGroup) -> usize {
    group.as_ref().map_or(0, |g| g.0.order())
}

/// # Safety
/// `group` must come from a `ps_group_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ps_group_free(group: *mut PsGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// A map from `|Γ| · degree` images, row `g` holding `f(g)(0..degree)`.
///
/// # Safety
/// `group` must be live and `images` must point to `order * degree` values.
#[no_mangle]
pub unsafe extern "C" fn ps_map_new(
    group: *const PsGroup,
    degree: usize,
    images: *const usize,
    out: *mut *mut PsMap,
) -> PsStatus {
    guard(|| {
        non_null!(group, images, out);
        let g = Arc::clone(&(*group).0);
        if degree == 0 {
            return fail(PsStatus::InvalidArgument, "degree must be positive");
        }
        let Some(len) = g.order().checked_mul(degree) else {
            return fail(PsStatus::InvalidArgument, "map too large");
        };
        let flat = std::slice::from_raw_parts(images, len);
        let table: Result<Vec<Permutation>, Error> = flat
            .chunks(degree)
            .map(|row| Permutation::from_images(row.to_vec()))
            .collect();
        match table.and_then(|t| GroupMap::new(g, t)) {
            Ok(f) => boxed(out, PsMap(f)),
            Err(e) => from_error(e),
        }
    })
}

/// Left multiplication of the group on itself.
///
/// # Safety
/// `group` must be live.
#[no_mangle]
pub unsafe extern "C" fn ps_map_regular(group: *const PsGroup, out: *mut *mut PsMap) -> PsStatus {
    guard(|| {
        non_null!(group, out);
        boxed(out, PsMap(GroupMap::regular(Arc::clone(&(*group).0))))
    })
}

/// # Safety
/// `map` must be live.
#[no_mangle]
pub unsafe extern "C" fn ps_map_degree(map: *const PsMap) -> usize {
    map.as_ref().map_or(0, |m| m.0.degree())
}

/// Copies `f(g)` into `buf`, which holds `len` values; `len` must equal the degree.
///
/// # Safety
/// `map` must be live and `buf` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn ps_map_image(
    map: *const PsMap,
    g: usize,
    buf: *mut usize,
    len: usize,
) -> PsStatus {
    guard(|| {
        non_null!(map, buf);
        let f = &(*map).0;
        if g >= f.group().order() {
            return fail(
                PsStatus::InvalidArgument,
                format!("element {g} out of range"),
            );
        }
        if len != f.degree() {
            return fail(
                PsStatus::InvalidArgument,
                format!("buffer holds {len}, degree is {}", f.degree()),
            );
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(f.image(g).images());
        PsStatus::Ok
    })
}

/// Uniform and mean local defect.
///
/// # Safety
/// `map` must be live and all four outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ps_map_defects(
    map: *const PsMap,
    inf_num: *mut i64,
    inf_den: *mut i64,
    mean_num: *mut i64,
    mean_den: *mut i64,
) -> PsStatus {
    guard(|| {
        non_null!(map, inf_num, inf_den, mean_num, mean_den);
        let d = defects(&(*map).0);
        match write_rational(d.defect_inf, inf_num, inf_den) {
            PsStatus::Ok => write_rational(d.defect_mean, mean_num, mean_den),
            s => s,
        }
    })
}

/// # Safety
/// `map` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ps_map_is_homomorphism(map: *const PsMap, out: *mut bool) -> PsStatus {
    guard(|| {
        non_null!(map, out);
        *out = is_homomorphism(&(*map).0);
        PsStatus::Ok
    })
}

/// # Safety
/// `map` must be live.
#[no_mangle]
pub unsafe extern "C" fn ps_symmetrize(map: *const PsMap, out: *mut *mut PsMap) -> PsStatus {
    guard(|| {
        non_null!(map, out);
        match symmetrize(&(*map).0) {
            Ok(g) => boxed(out, PsMap(g)),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `map` must come from a `ps_map_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ps_map_free(map: *mut PsMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Symmetrizes and repairs `map` into an exact action.
///
/// # Safety
/// `map` must be live.
#[no_mangle]
pub unsafe extern "C" fn ps_correct(map: *const PsMap, out: *mut *mut PsCorrection) -> PsStatus {
    guard(|| {
        non_null!(map, out);
        match correct(&(*map).0) {
            Ok(r) => boxed(out, PsCorrection(r)),
            Err(e) => from_error(e),
        }
    })
}

/// A new handle to the repaired action.
///
/// # Safety
/// `c` must be live.
#[no_mangle]
pub unsafe extern "C" fn ps_correction_map(
    c: *const PsCorrection,
    out: *mut *mut PsMap,
) -> PsStatus {
    guard(|| {
        non_null!(c, out);
        boxed(out, PsMap((*c).0.h.clone()))
    })
}

/// Degree `N` of the repaired action.
///
/// # Safety
/// `c` must be live.
#[no_mangle]
pub unsafe extern "C" fn ps_correction_degree(c: *const PsCorrection) -> usize {
    c.as_ref().map_or(0, |c| c.0.h.degree())
}

/// Whether the repair fell back to the trivial action.
///
/// # Safety
/// `c` must be live.
#[no_mangle]
pub unsafe extern "C" fn ps_correction_used_fallback(c: *const PsCorrection) -> bool {
    c.as_ref().is_some_and(|c| c.0.used_trivial_fallback())
}

/// `d_∞` and `d₁` between the input map and the repaired action.
///
/// # Safety
/// `c` must be live and all four outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ps_correction_distance(
    c: *const PsCorrection,
    inf_num: *mut i64,
    inf_den: *mut i64,
    mean_num: *mut i64,
    mean_den: *mut i64,
) -> PsStatus {
    guard(|| {
        non_null!(c, inf_num, inf_den, mean_num, mean_den);
        let r = &(*c).0.report;
        match write_rational(r.dist_inf, inf_num, inf_den) {
            PsStatus::Ok => write_rational(r.dist_mean, mean_num, mean_den),
            s => s,
        }
    })
}

/// # Safety
/// `c` must come from `ps_correct` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ps_correction_free(c: *mut PsCorrection) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Normalized Hamming distance between permutations of possibly different degrees.
///
/// # Safety
/// `a` and `b` must point to `na` and `nb` values.
#[no_mangle]
pub unsafe extern "C" fn ps_hamming(
    a: *const usize,
    na: usize,
    b: *const usize,
    nb: usize,
    num: *mut i64,
    den: *mut i64,
) -> PsStatus {
    guard(|| {
        non_null!(a, b, num, den);
        if na == 0 || nb == 0 {
            return fail(
                PsStatus::InvalidArgument,
                "permutations need at least one point",
            );
        }
        let pa = Permutation::from_images(std::slice::from_raw_parts(a, na).to_vec());
        let pb = Permutation::from_images(std::slice::from_raw_parts(b, nb).to_vec());
        match (pa, pb) {
            (Ok(pa), Ok(pb)) => write_rational(hamming(&pa, &pb), num, den),
            (Err(e), _) | (_, Err(e)) => from_error(e),
        }
    })
}
