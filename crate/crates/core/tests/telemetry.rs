use std::path::Path;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value as Json};
use tower::ServiceExt;

use assess_core::levels::LevelPack;
use assess_core::telemetry::canonical::{canonical_bytes, code_for_bytes, tracking_code};
use assess_core::telemetry::event::{EventType, GameEvent, GameId, Payload, Value};
use assess_core::telemetry::export::{session_from_ndjson, session_to_ndjson, EXPORT_SCHEMA};
use assess_core::telemetry::http::router;
use assess_core::telemetry::service::Service;
use assess_core::telemetry::session::{Consent, Difficulty};
use assess_core::telemetry::store::{FileStore, Finalized, MemoryStore, Store};

fn events(id: &str) -> Vec<GameEvent> {
    let mut p = Payload::new();
    p.insert("piece".into(), Value::Int(2));
    p.insert("to".into(), Value::Text("(1,2)".into()));
    let mk = |seq: u64, game_id, stage_id, event_type, payload: Payload| GameEvent {
        session_id: id.into(),
        seq,
        timestamp_ms: 1000 + seq * 250,
        game_id,
        stage_id,
        event_type,
        payload,
    };
    vec![
        mk(0, GameId::Meta, 0, EventType::MenuNav, Payload::new()),
        mk(1, GameId::GroupSwap, 1, EventType::StageStart, Payload::new()),
        mk(2, GameId::GroupSwap, 1, EventType::MoveAccepted, p),
        mk(3, GameId::GroupSwap, 1, EventType::Pause, Payload::new()),
    ]
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Json>) -> (StatusCode, Json) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string()))).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Json::Null))
}

#[tokio::test]
async fn http_session_lifecycle() {
    let svc = Service::new(Box::new(MemoryStore::new()), LevelPack::default_pack()).shared();
    let app = router(svc.clone());

    let (status, created) = call(&app, "POST", "/v1/sessions", Some(json!({"difficulty": "normal"}))).await;
    assert_eq!(status, StatusCode::CREATED);
    let id = created["session_id"].as_str().unwrap().to_owned();

    let batch: Vec<Json> = events(&id).iter().map(|e| serde_json::to_value(e).unwrap()).collect();
    let (status, ack) = call(&app, "POST", &format!("/v1/sessions/{id}/events"), Some(json!({ "events": batch }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!((ack["appended"].as_u64(), ack["last_accepted_seq"].as_u64()), (Some(4), Some(3)));

    // Redelivery is idempotent; a gap is rejected per item.
    let mut gap = batch[3].clone();
    gap["seq"] = json!(9);
    let (_, ack) = call(&app, "POST", &format!("/v1/sessions/{id}/events"), Some(json!({ "events": [batch[3], gap] }))).await;
    assert_eq!((ack["duplicates"].as_u64(), ack["rejections"].as_array().unwrap().len()), (Some(1), 1));

    let (status, fin) = call(&app, "POST", &format!("/v1/sessions/{id}/finalize"), Some(json!({"consent": "send"}))).await;
    assert_eq!(status, StatusCode::OK);
    let code = fin["tracking_code"].as_str().unwrap();
    assert_eq!(fin["status"], "sent");
    assert!(code.len() == 5 && code.bytes().all(|b| b.is_ascii_digit()), "{code}");
    assert_eq!(code, tracking_code(&events(&id)));

    let (status, _) = call(&app, "POST", &format!("/v1/sessions/{id}/events"), Some(json!({ "events": [] }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, err) = call(&app, "POST", "/v1/sessions/nope/finalize", Some(json!({"consent": "send"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(err["error"].is_string());
    let (status, _) = call(&app, "POST", "/v1/sessions", Some(json!({"difficulty": "brutal"}))).await;
    assert!(status.is_client_error());

    let (status, slice) = call(&app, "GET", "/v1/levels/group_swap", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(slice["game"], "group_swap");
    assert_eq!(slice["levels"].as_array().unwrap().len(), LevelPack::default_pack().group_swap.len());
    let (status, _) = call(&app, "GET", "/v1/levels/chess", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

fn finalize_in(store: &mut dyn Store, consent: Consent) -> (String, Finalized) {
    let id = store.create_session(Difficulty::Hard, 7).unwrap();
    for e in events(&id) {
        store.record_event(e).unwrap();
    }
    let f = store.finalize(&id, consent).unwrap();
    (id, f)
}

#[test]
fn tracking_code_is_the_same_in_every_store() {
    let dir = tempfile::tempdir().unwrap();
    let mut file = FileStore::open(dir.path()).unwrap();
    // Offset the file store's ids so the two sessions differ in name.
    file.create_session(Difficulty::Easy, 0).unwrap();
    let (a_id, a) = finalize_in(&mut MemoryStore::new(), Consent::Send);
    let (b_id, b) = finalize_in(&mut file, Consent::Send);
    assert_ne!(a_id, b_id);
    assert_eq!(a, b);
}

#[test]
fn every_byte_of_the_event_stream_feeds_the_code() {
    let bytes = canonical_bytes(&events("s1"));
    let base = code_for_bytes(&bytes);
    for i in 0..bytes.len() {
        for flip in [0x01u8, 0x80] {
            let mut b = bytes.clone();
            b[i] ^= flip;
            assert_ne!(code_for_bytes(&b), base, "byte {i} flip {flip:#x}");
        }
    }
    let mut e = events("s1");
    e[2].timestamp_ms += 1;
    assert_ne!(tracking_code(&e), base);
    let mut e = events("s1");
    e[2].payload.insert("piece".into(), Value::Int(3));
    assert_ne!(tracking_code(&e), base);
}

#[test]
fn withheld_sessions_leave_nothing_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let id = {
        let mut store = FileStore::open(dir.path()).unwrap();
        let (id, f) = finalize_in(&mut store, Consent::Withhold);
        assert_eq!(f, Finalized::Withheld);
        assert!(store.session(&id).is_err());
        id
    };
    let sessions: Vec<_> = std::fs::read_dir(dir.path().join("sessions")).unwrap().collect();
    assert!(sessions.is_empty(), "{sessions:?}");
    let index = std::fs::read_to_string(dir.path().join("index.json")).unwrap();
    assert!(!index.contains(&id), "{index}");
    assert!(FileStore::open(dir.path()).unwrap().session_ids().is_empty());
}

#[test]
fn export_round_trips() {
    let mut store = MemoryStore::new();
    let (id, _) = finalize_in(&mut store, Consent::Send);
    let log = store.session(&id).unwrap().clone();
    let text = session_to_ndjson(&log);
    let header: Json = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(header["schema"], EXPORT_SCHEMA);
    assert_eq!(header["event_count"], 4);
    assert_eq!(text.lines().count(), 5);
    assert_eq!(session_from_ndjson(&text).unwrap(), log);
    // Event lines hold gameplay fields only.
    let keys: Vec<String> =
        serde_json::from_str::<serde_json::Map<String, Json>>(text.lines().nth(1).unwrap()).unwrap().keys().cloned().collect();
    let mut expected = ["session_id", "seq", "timestamp_ms", "game_id", "stage_id", "event_type", "payload"].map(String::from).to_vec();
    expected.sort();
    let mut keys = keys;
    keys.sort();
    assert_eq!(keys, expected);
}

#[test]
fn level_documents_round_trip() {
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("levels");
    let pack = LevelPack::load_dir(&shipped).unwrap();
    assert_eq!(pack, LevelPack::default_pack());
    let dir = tempfile::tempdir().unwrap();
    pack.write_dir(dir.path()).unwrap();
    assert_eq!(LevelPack::load_dir(dir.path()).unwrap(), pack);
    for game in GameId::ALL {
        let mut one = LevelPack::default();
        one.load_doc(game, &pack.document(game)).unwrap();
        assert_eq!(one.document(game), pack.document(game));
    }
    let wrong = pack.document(GameId::Graph);
    assert!(LevelPack::default().load_doc(GameId::Memory, &wrong).is_err());
}
