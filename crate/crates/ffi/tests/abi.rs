use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use assess_core::levels::LevelPack;
use assess_core::solvers::graph::solve_graph;
use assess_core::solvers::groupswap::solve_groupswap;
use assess_core::solvers::DEFAULT_STATE_CAP;
use assess_core::telemetry::canonical::tracking_code;
use assess_core::telemetry::event::{EventType, GameEvent, GameId, Payload};
use assess_ffi::*;

fn last_error() -> String {
    let p = assess_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn default_levels() -> *mut AssessLevels {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { assess_levels_default(&mut h) }, AssessStatus::Ok);
    h
}

#[test]
fn level_pack_handle() {
    let h = default_levels();
    let pack = LevelPack::default_pack();
    let mut n = 0usize;
    unsafe {
        assert_eq!(assess_levels_count(h, AssessGame::GroupSwap, &mut n), AssessStatus::Ok);
        assert_eq!(n, pack.group_swap.len());
        assert_eq!(assess_levels_count(h, AssessGame::Graph, &mut n), AssessStatus::Ok);
        assert_eq!(n, pack.graph.len());

        let mut json = ptr::null_mut();
        assert_eq!(assess_levels_slice_json(h, AssessGame::Graph, &mut json), AssessStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        assess_string_free(json);
        assert_eq!(text, pack.slice_json(GameId::Graph).to_string());

        let mut failed = 99usize;
        assert_eq!(assess_levels_validate(h, DEFAULT_STATE_CAP, &mut failed), AssessStatus::Ok);
        assert_eq!(failed, 0);
        assess_levels_free(h);
    }
}

#[test]
fn group_swap_plays_to_a_win_in_the_optimal_count() {
    let h = default_levels();
    let level = LevelPack::default_pack().group_swap[0].clone();
    let solved = solve_groupswap(&level, DEFAULT_STATE_CAP).unwrap();
    unsafe {
        let mut optimum = 0i64;
        assert_eq!(assess_groupswap_solve(h, 0, DEFAULT_STATE_CAP, &mut optimum), AssessStatus::Ok);
        assert_eq!(optimum, i64::from(solved.optimal_moves.unwrap()));

        let mut g = ptr::null_mut();
        assert_eq!(assess_groupswap_new(h, 0, &mut g), AssessStatus::Ok);
        let mut accepted = false;
        // Off the board: rejected, not an error.
        assert_eq!(assess_groupswap_move(g, 0, 200, 200, &mut accepted), AssessStatus::Ok);
        assert!(!accepted);
        for mv in &solved.witness {
            assert_eq!(assess_groupswap_move(g, mv.piece, mv.target.row, mv.target.col, &mut accepted), AssessStatus::Ok);
            assert!(accepted);
        }
        let mut status = AssessStageStatus::Playing;
        let mut used = 0u32;
        assert_eq!(assess_groupswap_status(g, &mut status), AssessStatus::Ok);
        assert_eq!(assess_groupswap_moves_used(g, &mut used), AssessStatus::Ok);
        assert_eq!((status, i64::from(used)), (AssessStageStatus::Won, optimum));

        let mv = solved.witness[0];
        assert_eq!(assess_groupswap_move(g, mv.piece, mv.target.row, mv.target.col, &mut accepted), AssessStatus::NotPlaying);
        assert!(last_error().contains("won"), "{}", last_error());
        assess_groupswap_free(g);
        assess_levels_free(h);
    }
}

#[test]
fn graph_plays_to_a_win() {
    let h = default_levels();
    let level = LevelPack::default_pack().graph[0].clone();
    let solved = solve_graph(&level, DEFAULT_STATE_CAP).unwrap();
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(assess_graph_new(h, 0, &mut g), AssessStatus::Ok);
        let mut accepted = false;
        for d in &solved.witness {
            let dir = match d {
                assess_core::game::Direction::Up => AssessDirection::Up,
                assess_core::game::Direction::Down => AssessDirection::Down,
                assess_core::game::Direction::Left => AssessDirection::Left,
                assess_core::game::Direction::Right => AssessDirection::Right,
            };
            assert_eq!(assess_graph_step(g, dir, &mut accepted), AssessStatus::Ok);
            assert!(accepted);
        }
        let mut status = AssessStageStatus::Playing;
        assert_eq!(assess_graph_status(g, &mut status), AssessStatus::Ok);
        assert_eq!(status, AssessStageStatus::Won);
        let mut optimum = 0i64;
        assert_eq!(assess_graph_solve(h, 0, DEFAULT_STATE_CAP, &mut optimum), AssessStatus::Ok);
        let mut used = 0u32;
        assert_eq!(assess_graph_moves_used(g, &mut used), AssessStatus::Ok);
        assert_eq!(i64::from(used), optimum);
        assert_eq!(assess_graph_restart(g), AssessStatus::NotPlaying);
        assess_graph_free(g);

        assert_eq!(assess_graph_new(h, 0, &mut g), AssessStatus::Ok);
        let first = [AssessDirection::Up, AssessDirection::Down, AssessDirection::Left, AssessDirection::Right]
            .into_iter()
            .find(|&d| assess_graph_step(g, d, &mut accepted) == AssessStatus::Ok && accepted);
        assert!(first.is_some());
        assert_eq!(assess_graph_restart(g), AssessStatus::Ok);
        assert_eq!(assess_graph_moves_used(g, &mut used), AssessStatus::Ok);
        assert_eq!(used, 0);
        assess_graph_free(g);
        assess_levels_free(h);
    }
}

#[test]
fn tracking_code_matches_the_library() {
    let events: Vec<GameEvent> = (0..3)
        .map(|seq| GameEvent {
            session_id: "s".into(),
            seq,
            timestamp_ms: seq * 100,
            game_id: GameId::Meta,
            stage_id: 0,
            event_type: EventType::MenuNav,
            payload: Payload::new(),
        })
        .collect();
    let json = CString::new(serde_json::to_string(&events).unwrap()).unwrap();
    let mut buf = [0 as std::ffi::c_char; ASSESS_TRACKING_CODE_LEN];
    unsafe {
        assert_eq!(assess_tracking_code(json.as_ptr(), buf.as_mut_ptr(), buf.len()), AssessStatus::Ok);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), tracking_code(&events));
        assert_eq!(assess_tracking_code(json.as_ptr(), buf.as_mut_ptr(), 5), AssessStatus::BufferTooSmall);
        let bad = CString::new("[{\"seq\": 1}]").unwrap();
        assert_eq!(assess_tracking_code(bad.as_ptr(), buf.as_mut_ptr(), buf.len()), AssessStatus::Parse);
    }
}

#[test]
fn errors_are_status_codes_with_messages() {
    unsafe {
        assert_eq!(assess_levels_default(ptr::null_mut()), AssessStatus::NullPointer);
        assert!(last_error().contains("null"));
        let mut n = 0usize;
        assert_eq!(assess_levels_count(ptr::null(), AssessGame::Memory, &mut n), AssessStatus::NullPointer);

        let missing = CString::new("/definitely/not/here").unwrap();
        let mut h = ptr::null_mut();
        assert_eq!(assess_levels_load_dir(missing.as_ptr(), &mut h), AssessStatus::Io);
        assert!(h.is_null());

        let bad_utf8 = [0xffu8, 0xfe, 0];
        assert_eq!(assess_levels_load_dir(bad_utf8.as_ptr().cast(), &mut h), AssessStatus::InvalidUtf8);

        let levels = default_levels();
        let mut g = ptr::null_mut();
        assert_eq!(assess_groupswap_new(levels, 999, &mut g), AssessStatus::NotFound);
        assert!(last_error().contains("999"));
        assess_levels_free(levels);
        // Freeing NULL is a no-op.
        assess_levels_free(ptr::null_mut());
        assess_groupswap_free(ptr::null_mut());
        assess_graph_free(ptr::null_mut());
        assess_string_free(ptr::null_mut());
        assert_eq!(CStr::from_ptr(assess_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn load_dir_round_trips_a_written_pack() {
    let dir = tempfile::tempdir().unwrap();
    LevelPack::default_pack().write_dir(dir.path()).unwrap();
    let path = CString::new(dir.path().to_str().unwrap()).unwrap();
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(assess_levels_load_dir(path.as_ptr(), &mut h), AssessStatus::Ok);
        let mut n = 0usize;
        assert_eq!(assess_levels_count(h, AssessGame::SlidingPath, &mut n), AssessStatus::Ok);
        assert_eq!(n, LevelPack::default_pack().sliding_path.len());
        assess_levels_free(h);
    }
}

#[test]
fn header_declares_every_export_and_compiles_as_c() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = std::fs::read_to_string(include.join("assess.h")).unwrap();
    let source = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 20, "{exports:?}");
    for name in &exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }

    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("use.c");
    std::fs::write(
        &c,
        "#include \"assess.h\"\n\
         int run(void) {\n\
           AssessLevels *levels = NULL;\n\
           if (assess_levels_default(&levels) != ASSESS_STATUS_OK) return 1;\n\
           AssessGroupSwap *game = NULL;\n\
           AssessStatus s = assess_groupswap_new(levels, 0, &game);\n\
           bool ok = false;\n\
           assess_groupswap_move(game, 0, 0, 1, &ok);\n\
           char code[ASSESS_TRACKING_CODE_LEN];\n\
           assess_tracking_code(\"[]\", code, sizeof code);\n\
           assess_groupswap_free(game);\n\
           assess_levels_free(levels);\n\
           return s == ASSESS_STATUS_OK ? 0 : (int)s;\n\
         }\n",
    )
    .unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    match Command::new(&cc).args(["-std=c11", "-Wall", "-Werror", "-fsyntax-only", "-I"]).arg(&include).arg(&c).output() {
        Ok(o) => assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr)),
        Err(e) => eprintln!("skipping C compile: {cc} unavailable ({e})"),
    }
}
