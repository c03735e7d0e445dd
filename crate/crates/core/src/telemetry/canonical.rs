//! Canonical byte form of an event list and the tracking code derived from
//! it.
//!
//! Each event becomes one line terminated by `\n`, with six tab-separated
//! fields in this order:
//!
//! ```text
//! seq  timestamp_ms  game_id  stage_id  event_type  payload
//! ```
//!
//! Integers are written in decimal without sign or padding; `game_id` and
//! `event_type` use their snake_case names. The payload is a `;`-separated
//! list of `key=tag:value` entries in ascending byte order of key, where the
//! tag is `i` (integer, decimal with optional leading `-`), `f` (float,
//! shortest round-trip decimal), `b` (`true`/`false`) or `t` (text). In keys
//! and text, the bytes `\`, tab, newline, `;` and `=` are escaped as `\\`,
//! `\t`, `\n`, `\;` and `\=`. An empty payload is an empty field.
//!
//! The session id is not part of the canonical form, so the same gameplay
//! produces the same code regardless of which store issued the session.
//!
//! The tracking code is the SHA-256 digest of these bytes, read as a
//! big-endian 256-bit integer, reduced modulo 100000 and zero-padded to five
//! digits.

use sha2::{Digest, Sha256};

use super::event::{GameEvent, Value};

pub const CANONICAL_VERSION: u32 = 1;

fn escape_into(out: &mut String, s: &str) {
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            ';' => out.push_str("\\;"),
            '=' => out.push_str("\\="),
            c => out.push(c),
        }
    }
}

fn write_event(out: &mut String, e: &GameEvent) {
    use std::fmt::Write;
    let _ = write!(out, "{}\t{}\t{}\t{}\t{}\t", e.seq, e.timestamp_ms, e.game_id, e.stage_id, e.event_type);
    for (i, (k, v)) in e.payload.iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        escape_into(out, k);
        out.push('=');
        match v {
            Value::Int(n) => {
                let _ = write!(out, "i:{n}");
            }
            Value::Float(x) => {
                let _ = write!(out, "f:{x:?}");
            }
            Value::Bool(b) => {
                let _ = write!(out, "b:{b}");
            }
            Value::Text(s) => {
                out.push_str("t:");
                escape_into(out, s);
            }
        }
    }
    out.push('\n');
}

pub fn canonical_bytes(events: &[GameEvent]) -> Vec<u8> {
    let mut out = String::new();
    for e in events {
        write_event(&mut out, e);
    }
    out.into_bytes()
}

/// Five-digit code: SHA-256 of `bytes` modulo 100000.
pub fn code_for_bytes(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    // Horner's rule over the big-endian digest keeps the remainder small.
    let rem = digest.iter().fold(0u64, |acc, &b| (acc * 256 + u64::from(b)) % 100_000);
    format!("{rem:05}")
}

pub fn tracking_code(events: &[GameEvent]) -> String {
    code_for_bytes(&canonical_bytes(events))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::telemetry::event::{EventType, GameId, Payload};

    fn ev(seq: u64, payload: Payload) -> GameEvent {
        GameEvent {
            session_id: "x".into(),
            seq,
            timestamp_ms: 1500,
            game_id: GameId::Graph,
            stage_id: 2,
            event_type: EventType::MoveAccepted,
            payload,
        }
    }

    #[test]
    fn documented_bytes() {
        let mut p = Payload::new();
        p.insert("dir".into(), Value::from("left"));
        p.insert("a;b".into(), Value::Int(-3));
        p.insert("ok".into(), Value::Bool(true));
        p.insert("r".into(), Value::Float(0.5));
        let bytes = canonical_bytes(&[ev(0, p)]);
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "0\t1500\tgraph\t2\tmove_accepted\ta\\;b=i:-3;dir=t:left;ok=b:true;r=f:0.5\n"
        );
    }

    #[test]
    fn session_id_does_not_matter() {
        let a = ev(0, Payload::new());
        let mut b = a.clone();
        b.session_id = "other".into();
        assert_eq!(tracking_code(&[a]), tracking_code(&[b]));
    }

    // Reference values computed with Python's hashlib over the documented
    // bytes: int.from_bytes(sha256(b).digest(), "big") % 100000.
    #[test]
    fn code_matches_reference_digest() {
        assert_eq!(code_for_bytes(b""), "86549");
        assert_eq!(code_for_bytes(b"0\t0\tmeta\t0\tconsent_choice\tconsent=t:send\n"), "15265");
        assert_eq!(code_for_bytes(b"0\t1500\tgraph\t2\tmove_accepted\t\n"), "76601");
    }
}
