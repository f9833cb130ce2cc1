//! C ABI for the `gaopt` engine.
//!
//! Every fallible function returns a [`GaStatus`]; on failure the message is
//! available from [`ga_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use gaopt::cli::{fitness_csv, ProblemKind};
use gaopt::{
    engine, Control, EngineError, FitnessFunction, GaConfig, LifecycleHooks, RunResult, StopReason,
};

/// Status codes shared by all functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    InvalidConfig = 4,
    FitnessFailed = 5,
    Runtime = 6,
    OutOfRange = 7,
    BufferTooSmall = 8,
    Io = 9,
    Panic = 10,
}

/// Scores `genes[0..len)`. Write the score to `*out` and return 0, or return
/// non-zero to abort the run.
pub type GaFitnessFn = Option<
    unsafe extern "C" fn(
        genes: *const f64,
        len: usize,
        index: usize,
        user_data: *mut c_void,
        out: *mut f64,
    ) -> c_int,
>;

/// Called after each generation with its zero-based index. Return non-zero
/// to stop the run.
pub type GaGenerationFn = Option<
    unsafe extern "C" fn(generation: usize, best_fitness: f64, user_data: *mut c_void) -> c_int,
>;

/// Opaque configuration handle.
pub struct GaConfigHandle {
    cfg: GaConfig,
}

/// Opaque run result handle.
pub struct GaResultHandle {
    result: RunResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: GaStatus, msg: impl Into<String>) -> GaStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> GaStatus) -> GaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == GaStatus::Ok {
                set_error("");
            }
            status
        }
        Err(_) => fail(GaStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, GaStatus> {
    if p.is_null() {
        return Err(fail(GaStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(GaStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn engine_status(e: &EngineError) -> GaStatus {
    match e {
        EngineError::Config(_) => GaStatus::InvalidConfig,
        EngineError::Fitness(_) => GaStatus::FitnessFailed,
        _ => GaStatus::Runtime,
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ga_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a configuration with default operators.
#[no_mangle]
pub extern "C" fn ga_config_new(
    num_generations: usize,
    sol_per_pop: usize,
    num_parents_mating: usize,
    num_genes: usize,
) -> *mut GaConfigHandle {
    let cfg = GaConfig::new(num_generations, sol_per_pop, num_parents_mating, num_genes);
    Box::into_raw(Box::new(GaConfigHandle { cfg }))
}

/// Creates the preset configuration of a built-in problem
/// (`linear`, `onemax` or `xor`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ga_config_for_problem(
    name: *const c_char,
    out: *mut *mut GaConfigHandle,
) -> GaStatus {
    guard(|| {
        if out.is_null() {
            return fail(GaStatus::NullPointer, "out is null");
        }
        let name = match str_arg(name, "name") {
            Ok(s) => s,
            Err(s) => return s,
        };
        match name.parse::<ProblemKind>() {
            Ok(kind) => {
                *out = Box::into_raw(Box::new(GaConfigHandle { cfg: kind.preset() }));
                GaStatus::Ok
            }
            Err(e) => fail(GaStatus::InvalidArgument, e),
        }
    })
}

/// # Safety
/// `handle` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ga_config_free(handle: *mut GaConfigHandle) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Sets one field using the configuration-file syntax, e.g.
/// `("parent_selection", "tournament:3")`.
///
/// # Safety
/// `handle` must be live; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn ga_config_set(
    handle: *mut GaConfigHandle,
    key: *const c_char,
    value: *const c_char,
) -> GaStatus {
    guard(|| {
        let Some(h) = handle.as_mut() else {
            return fail(GaStatus::NullPointer, "handle is null");
        };
        let (key, value) = match (str_arg(key, "key"), str_arg(value, "value")) {
            (Ok(k), Ok(v)) => (k, v),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match h.cfg.set(key, value) {
            Ok(()) => GaStatus::Ok,
            Err(e) => fail(GaStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Checks the configuration without running it.
///
/// # Safety
/// `handle` must be live.
#[no_mangle]
pub unsafe extern "C" fn ga_config_validate(handle: *const GaConfigHandle) -> GaStatus {
    guard(|| {
        let Some(h) = handle.as_ref() else {
            return fail(GaStatus::NullPointer, "handle is null");
        };
        match h.cfg.validate() {
            Ok(_) => GaStatus::Ok,
            Err(e) => fail(GaStatus::InvalidConfig, e.to_string()),
        }
    })
}

struct CFitness {
    f: unsafe extern "C" fn(*const f64, usize, usize, *mut c_void, *mut f64) -> c_int,
    user_data: *mut c_void,
}

// The caller guarantees thread safety of the callback when it enables
// `parallel_fitness`; otherwise calls happen on the running thread only.
unsafe impl Sync for CFitness {}

impl FitnessFunction for CFitness {
    fn fitness(&self, solution: &[f64], solution_idx: usize) -> Result<f64, String> {
        let mut out = f64::NAN;
        let rc = unsafe {
            (self.f)(
                solution.as_ptr(),
                solution.len(),
                solution_idx,
                self.user_data,
                &mut out,
            )
        };
        if rc == 0 {
            Ok(out)
        } else {
            Err(format!("callback returned {rc}"))
        }
    }
}

unsafe fn run_with(
    cfg: &GaConfig,
    fitness: &dyn FitnessFunction,
    on_generation: GaGenerationFn,
    user_data: *mut c_void,
    out: *mut *mut GaResultHandle,
) -> GaStatus {
    let hooks = match on_generation {
        Some(cb) => LifecycleHooks::new().on_generation(move |state| {
            let best = state.record().best_fitness;
            if cb(state.generation(), best, user_data) == 0 {
                Control::Continue
            } else {
                Control::Stop
            }
        }),
        None => LifecycleHooks::new(),
    };
    match engine::run(cfg, fitness, hooks) {
        Ok(result) => {
            *out = Box::into_raw(Box::new(GaResultHandle { result }));
            GaStatus::Ok
        }
        Err(e) => fail(engine_status(&e), e.to_string()),
    }
}

/// Runs the engine with a user fitness callback. `on_generation` may be null.
///
/// # Safety
/// `config` must be live, `out` valid, and the callbacks must be safe to
/// call with `user_data`.
#[no_mangle]
pub unsafe extern "C" fn ga_run(
    config: *const GaConfigHandle,
    fitness: GaFitnessFn,
    on_generation: GaGenerationFn,
    user_data: *mut c_void,
    out: *mut *mut GaResultHandle,
) -> GaStatus {
    guard(|| {
        let (Some(h), Some(f), false) = (config.as_ref(), fitness, out.is_null()) else {
            return fail(
                GaStatus::NullPointer,
                "config, fitness and out must be non-null",
            );
        };
        let fitness = CFitness { f, user_data };
        run_with(&h.cfg, &fitness, on_generation, user_data, out)
    })
}

/// Runs a built-in problem. A null `config` uses the problem preset.
///
/// # Safety
/// `name` must be NUL-terminated, `config` null or live, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ga_run_problem(
    name: *const c_char,
    config: *const GaConfigHandle,
    on_generation: GaGenerationFn,
    user_data: *mut c_void,
    out: *mut *mut GaResultHandle,
) -> GaStatus {
    guard(|| {
        if out.is_null() {
            return fail(GaStatus::NullPointer, "out is null");
        }
        let kind = match str_arg(name, "name").map(str::parse::<ProblemKind>) {
            Ok(Ok(k)) => k,
            Ok(Err(e)) => return fail(GaStatus::InvalidArgument, e),
            Err(s) => return s,
        };
        let cfg = match config.as_ref() {
            Some(h) => h.cfg.clone(),
            None => kind.preset(),
        };
        let fitness = kind.fitness(cfg.num_genes);
        run_with(&cfg, fitness.as_ref(), on_generation, user_data, out)
    })
}

/// # Safety
/// `handle` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ga_result_free(handle: *mut GaResultHandle) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Completed generations; 0 for a null handle.
///
/// # Safety
/// `handle` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn ga_result_completed_generations(handle: *const GaResultHandle) -> usize {
    handle
        .as_ref()
        .map_or(0, |h| h.result.completed_generations)
}

/// Number of history entries (completed generations plus one).
///
/// # Safety
/// `handle` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn ga_result_history_len(handle: *const GaResultHandle) -> usize {
    handle
        .as_ref()
        .map_or(0, |h| h.result.best_solutions_fitness.len())
}

/// 1 if an `on_generation` callback stopped the run, else 0.
///
/// # Safety
/// `handle` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn ga_result_stopped_early(handle: *const GaResultHandle) -> c_int {
    handle.as_ref().map_or(0, |h| {
        c_int::from(h.result.stop_reason == StopReason::CallbackStop)
    })
}

unsafe fn history_value(
    handle: *const GaResultHandle,
    generation: usize,
    out: *mut f64,
    pick: fn(&RunResult) -> &[f64],
) -> GaStatus {
    guard(|| {
        let (Some(h), false) = (handle.as_ref(), out.is_null()) else {
            return fail(GaStatus::NullPointer, "handle and out must be non-null");
        };
        match pick(&h.result).get(generation) {
            Some(&v) => {
                *out = v;
                GaStatus::Ok
            }
            None => fail(
                GaStatus::OutOfRange,
                format!("generation {generation} out of range"),
            ),
        }
    })
}

/// Best fitness of history entry `generation`.
///
/// # Safety
/// `handle` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ga_result_best_fitness(
    handle: *const GaResultHandle,
    generation: usize,
    out: *mut f64,
) -> GaStatus {
    history_value(handle, generation, out, |r| &r.best_solutions_fitness)
}

/// Mean fitness of history entry `generation`.
///
/// # Safety
/// `handle` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ga_result_mean_fitness(
    handle: *const GaResultHandle,
    generation: usize,
    out: *mut f64,
) -> GaStatus {
    history_value(handle, generation, out, |r| &r.mean_fitness)
}

/// Copies the best solution over the run into `genes[0..capacity)`.
/// `len_out` always receives the chromosome length; `fitness_out` and
/// `index_out` may be null.
///
/// # Safety
/// `genes` must hold `capacity` doubles; other pointers null or valid.
#[no_mangle]
pub unsafe extern "C" fn ga_result_best_solution(
    handle: *const GaResultHandle,
    genes: *mut f64,
    capacity: usize,
    len_out: *mut usize,
    fitness_out: *mut f64,
    index_out: *mut usize,
) -> GaStatus {
    guard(|| {
        let (Some(h), false) = (handle.as_ref(), len_out.is_null()) else {
            return fail(GaStatus::NullPointer, "handle and len_out must be non-null");
        };
        let (solution, fitness, index) = h.result.best_solution();
        *len_out = solution.len();
        if capacity < solution.len() || genes.is_null() {
            return fail(
                GaStatus::BufferTooSmall,
                format!("need {} doubles", solution.len()),
            );
        }
        std::ptr::copy_nonoverlapping(solution.as_ptr(), genes, solution.len());
        if let Some(f) = fitness_out.as_mut() {
            *f = fitness;
        }
        if let Some(i) = index_out.as_mut() {
            *i = index;
        }
        GaStatus::Ok
    })
}

/// Writes the fitness history CSV to `path`.
///
/// # Safety
/// `handle` must be live and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ga_result_write_csv(
    handle: *const GaResultHandle,
    path: *const c_char,
) -> GaStatus {
    guard(|| {
        let Some(h) = handle.as_ref() else {
            return fail(GaStatus::NullPointer, "handle is null");
        };
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match std::fs::write(Path::new(path), fitness_csv(&h.result.fitness_history())) {
            Ok(()) => GaStatus::Ok,
            Err(e) => fail(GaStatus::Io, format!("{path}: {e}")),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_error_is_cleared_by_success() {
        let cfg = ga_config_new(1, 4, 2, 2);
        unsafe {
            let bad = ga_config_set(cfg, c"nosuch".as_ptr(), c"1".as_ptr());
            assert_eq!(bad, GaStatus::InvalidArgument);
            assert!(!CStr::from_ptr(ga_last_error_message())
                .to_bytes()
                .is_empty());
            assert_eq!(
                ga_config_set(cfg, c"seed".as_ptr(), c"3".as_ptr()),
                GaStatus::Ok
            );
            assert!(CStr::from_ptr(ga_last_error_message())
                .to_bytes()
                .is_empty());
            ga_config_free(cfg);
        }
    }

    #[test]
    fn null_handles_are_reported() {
        unsafe {
            assert_eq!(ga_config_validate(std::ptr::null()), GaStatus::NullPointer);
            assert_eq!(ga_result_history_len(std::ptr::null()), 0);
            ga_config_free(std::ptr::null_mut());
            ga_result_free(std::ptr::null_mut());
        }
    }
}
