//! C ABI over `assess-core`.
//!
//! Every fallible call returns an [`AssessStatus`]. On failure a message is
//! kept per thread and read back with [`assess_last_error`]. Handles are
//! opaque; each `*_new`/`*_load*` has a matching `*_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use assess_core::game::graph::GraphState;
use assess_core::game::groupswap::{GroupSwapState, MoveOutcome, SwapMove};
use assess_core::game::{Direction, GameError, GridPos, StageStatus};
use assess_core::levels::{LevelError, LevelPack};
use assess_core::solvers::graph::solve_graph;
use assess_core::solvers::groupswap::solve_groupswap;
use assess_core::solvers::validate::validate_level_pack;
use assess_core::solvers::SolveError;
use assess_core::telemetry::canonical::tracking_code;
use assess_core::telemetry::event::{GameEvent, GameId};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssessStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    NotFound = 3,
    Parse = 4,
    Io = 5,
    NotPlaying = 6,
    Solver = 7,
    Validation = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssessGame {
    GroupSwap = 0,
    SlidingPath = 1,
    Memory = 2,
    Shooter = 3,
    Graph = 4,
    Meta = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssessStageStatus {
    Playing = 0,
    Won = 1,
    TimeExpired = 2,
    OutOfMoves = 3,
    Stuck = 4,
    Dead = 5,
    Surrendered = 6,
    Skipped = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssessDirection {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
}

/// Buffer size for a tracking code: five digits and a terminating NUL.
pub const ASSESS_TRACKING_CODE_LEN: usize = 6;

/// Opaque level pack.
pub struct AssessLevels(LevelPack);

/// Opaque group-swap stage in progress.
pub struct AssessGroupSwap(GroupSwapState);

/// Opaque graph-traversal stage in progress.
pub struct AssessGraph(GraphState);

struct Failure(AssessStatus, String);

impl From<LevelError> for Failure {
    fn from(e: LevelError) -> Self {
        let status = if matches!(e, LevelError::Io { .. }) { AssessStatus::Io } else { AssessStatus::Parse };
        Failure(status, e.to_string())
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        Failure(AssessStatus::NotPlaying, e.to_string())
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        Failure(AssessStatus::Solver, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AssessStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AssessStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AssessStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(AssessStatus::NullPointer, format!("{what} is null")))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure(AssessStatus::NullPointer, format!("{what} is null")))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(AssessStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(AssessStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    deref_mut(out, "output pointer")?;
    out.write(value);
    Ok(())
}

fn game_id(g: AssessGame) -> GameId {
    match g {
        AssessGame::GroupSwap => GameId::GroupSwap,
        AssessGame::SlidingPath => GameId::SlidingPath,
        AssessGame::Memory => GameId::Memory,
        AssessGame::Shooter => GameId::Shooter,
        AssessGame::Graph => GameId::Graph,
        AssessGame::Meta => GameId::Meta,
    }
}

fn stage_status(s: StageStatus) -> AssessStageStatus {
    match s {
        StageStatus::Playing => AssessStageStatus::Playing,
        StageStatus::Won => AssessStageStatus::Won,
        StageStatus::TimeExpired => AssessStageStatus::TimeExpired,
        StageStatus::OutOfMoves => AssessStageStatus::OutOfMoves,
        StageStatus::Stuck => AssessStageStatus::Stuck,
        StageStatus::Dead => AssessStageStatus::Dead,
        StageStatus::Surrendered => AssessStageStatus::Surrendered,
        StageStatus::Skipped => AssessStageStatus::Skipped,
    }
}

fn direction(d: AssessDirection) -> Direction {
    match d {
        AssessDirection::Up => Direction::Up,
        AssessDirection::Down => Direction::Down,
        AssessDirection::Left => Direction::Left,
        AssessDirection::Right => Direction::Right,
    }
}

fn pick<T: Clone>(levels: &[T], index: usize, game: &str) -> Result<T, Failure> {
    levels
        .get(index)
        .cloned()
        .ok_or_else(|| Failure(AssessStatus::NotFound, format!("{game} has {} levels, index {index} requested", levels.len())))
}

/// Boxes `value` only once `out` is known to be writable, so a NULL output
/// does not leak.
unsafe fn put_boxed<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    deref_mut(out, "output pointer")?;
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn assess_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn assess_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn assess_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The level pack shipped with the library.
#[no_mangle]
pub unsafe extern "C" fn assess_levels_default(out: *mut *mut AssessLevels) -> AssessStatus {
    guard(|| put_boxed(out, AssessLevels(LevelPack::default_pack())))
}

/// Loads a pack from a directory of level documents.
#[no_mangle]
pub unsafe extern "C" fn assess_levels_load_dir(path: *const c_char, out: *mut *mut AssessLevels) -> AssessStatus {
    guard(|| {
        let dir = text(path, "path")?;
        deref_mut(out, "output pointer")?;
        let pack = LevelPack::load_dir(Path::new(dir))?;
        put_boxed(out, AssessLevels(pack))
    })
}

#[no_mangle]
pub unsafe extern "C" fn assess_levels_free(levels: *mut AssessLevels) {
    free(levels);
}

/// Number of levels for `game`.
#[no_mangle]
pub unsafe extern "C" fn assess_levels_count(levels: *const AssessLevels, game: AssessGame, out: *mut usize) -> AssessStatus {
    guard(|| {
        let p = &deref(levels, "levels")?.0;
        let n = match game {
            AssessGame::GroupSwap => p.group_swap.len(),
            AssessGame::SlidingPath => p.sliding_path.len(),
            AssessGame::Memory => p.memory.len(),
            AssessGame::Shooter => p.shooter.len(),
            AssessGame::Graph => p.graph.len(),
            AssessGame::Meta => p.side_challenges.len(),
        };
        put(out, n)
    })
}

/// JSON slice of the pack for one game, as served to clients. Free the
/// result with `assess_string_free`.
#[no_mangle]
pub unsafe extern "C" fn assess_levels_slice_json(levels: *const AssessLevels, game: AssessGame, out: *mut *mut c_char) -> AssessStatus {
    guard(|| {
        let p = &deref(levels, "levels")?.0;
        deref_mut(out, "output pointer")?;
        let json = CString::new(p.slice_json(game_id(game)).to_string()).expect("JSON has no NUL");
        put(out, json.into_raw())
    })
}

/// Solves every puzzle level and checks move limits. Writes the number of
/// failing levels; returns `Validation` naming the first when any fail.
#[no_mangle]
pub unsafe extern "C" fn assess_levels_validate(levels: *const AssessLevels, state_cap: usize, failed: *mut usize) -> AssessStatus {
    guard(|| {
        let p = &deref(levels, "levels")?.0;
        deref_mut(failed, "output pointer")?;
        let report = validate_level_pack(p, state_cap);
        put(failed, report.levels.iter().filter(|l| !l.passed).count())?;
        report.check().map_err(|e| Failure(AssessStatus::Validation, e.to_string()))
    })
}

/// Starts group-swap level `index`.
#[no_mangle]
pub unsafe extern "C" fn assess_groupswap_new(levels: *const AssessLevels, index: usize, out: *mut *mut AssessGroupSwap) -> AssessStatus {
    guard(|| {
        let level = pick(&deref(levels, "levels")?.0.group_swap, index, "group_swap")?;
        put_boxed(out, AssessGroupSwap(GroupSwapState::new(level)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn assess_groupswap_free(game: *mut AssessGroupSwap) {
    free(game);
}

/// Moves `piece` one cell to (`row`, `col`). A rule violation is not an
/// error: `accepted` is set to false and the state is unchanged.
#[no_mangle]
pub unsafe extern "C" fn assess_groupswap_move(game: *mut AssessGroupSwap, piece: u8, row: u8, col: u8, accepted: *mut bool) -> AssessStatus {
    guard(|| {
        let g = &mut deref_mut(game, "game")?.0;
        deref_mut(accepted, "output pointer")?;
        let outcome = g.apply(SwapMove { piece, target: GridPos::new(row, col) })?;
        put(accepted, matches!(outcome, MoveOutcome::Accepted(_)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn assess_groupswap_status(game: *const AssessGroupSwap, out: *mut AssessStageStatus) -> AssessStatus {
    guard(|| put(out, stage_status(deref(game, "game")?.0.status())))
}

#[no_mangle]
pub unsafe extern "C" fn assess_groupswap_moves_used(game: *const AssessGroupSwap, out: *mut u32) -> AssessStatus {
    guard(|| put(out, deref(game, "game")?.0.moves_used()))
}

/// Resets pieces and the move count. Fails once the stage is won or
/// abandoned.
#[no_mangle]
pub unsafe extern "C" fn assess_groupswap_restart(game: *mut AssessGroupSwap) -> AssessStatus {
    guard(|| Ok(deref_mut(game, "game")?.0.restart()?))
}

/// Optimal move count for group-swap level `index`, or -1 if unsolvable.
#[no_mangle]
pub unsafe extern "C" fn assess_groupswap_solve(levels: *const AssessLevels, index: usize, state_cap: usize, out: *mut i64) -> AssessStatus {
    guard(|| {
        let level = pick(&deref(levels, "levels")?.0.group_swap, index, "group_swap")?;
        deref_mut(out, "output pointer")?;
        let r = solve_groupswap(&level, state_cap)?;
        put(out, r.optimal_moves.map_or(-1, i64::from))
    })
}

/// Starts graph-traversal level `index`.
#[no_mangle]
pub unsafe extern "C" fn assess_graph_new(levels: *const AssessLevels, index: usize, out: *mut *mut AssessGraph) -> AssessStatus {
    guard(|| {
        let level = pick(&deref(levels, "levels")?.0.graph, index, "graph")?;
        put_boxed(out, AssessGraph(GraphState::new(level)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn assess_graph_free(game: *mut AssessGraph) {
    free(game);
}

/// Slides in `dir`. `accepted` is false when no new node would be reached.
#[no_mangle]
pub unsafe extern "C" fn assess_graph_step(game: *mut AssessGraph, dir: AssessDirection, accepted: *mut bool) -> AssessStatus {
    guard(|| {
        let g = &mut deref_mut(game, "game")?.0;
        deref_mut(accepted, "output pointer")?;
        let outcome = g.apply(direction(dir))?;
        put(accepted, outcome.is_ok())
    })
}

#[no_mangle]
pub unsafe extern "C" fn assess_graph_status(game: *const AssessGraph, out: *mut AssessStageStatus) -> AssessStatus {
    guard(|| put(out, stage_status(deref(game, "game")?.0.status())))
}

#[no_mangle]
pub unsafe extern "C" fn assess_graph_moves_used(game: *const AssessGraph, out: *mut u32) -> AssessStatus {
    guard(|| put(out, deref(game, "game")?.0.attempt.moves_used))
}

#[no_mangle]
pub unsafe extern "C" fn assess_graph_restart(game: *mut AssessGraph) -> AssessStatus {
    guard(|| Ok(deref_mut(game, "game")?.0.restart()?))
}

/// Fewest slides visiting every node of graph level `index`, or -1.
#[no_mangle]
pub unsafe extern "C" fn assess_graph_solve(levels: *const AssessLevels, index: usize, state_cap: usize, out: *mut i64) -> AssessStatus {
    guard(|| {
        let level = pick(&deref(levels, "levels")?.0.graph, index, "graph")?;
        deref_mut(out, "output pointer")?;
        let r = solve_graph(&level, state_cap)?;
        put(out, r.optimal_moves.map_or(-1, i64::from))
    })
}

/// Tracking code for a JSON array of events. `out` must hold at least
/// `ASSESS_TRACKING_CODE_LEN` bytes and receives a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn assess_tracking_code(events_json: *const c_char, out: *mut c_char, out_len: usize) -> AssessStatus {
    guard(|| {
        let json = text(events_json, "events_json")?;
        deref_mut(out, "output buffer")?;
        if out_len < ASSESS_TRACKING_CODE_LEN {
            return Err(Failure(AssessStatus::BufferTooSmall, format!("need {ASSESS_TRACKING_CODE_LEN} bytes, got {out_len}")));
        }
        let events: Vec<GameEvent> = serde_json::from_str(json).map_err(|e| Failure(AssessStatus::Parse, e.to_string()))?;
        let code = CString::new(tracking_code(&events)).expect("digits");
        let bytes = code.as_bytes_with_nul();
        ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), out, bytes.len());
        Ok(())
    })
}
