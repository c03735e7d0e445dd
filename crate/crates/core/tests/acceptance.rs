//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p assess-core --test acceptance -- --nocapture`.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::Rng as _;

use assess_core::ml::metrics::Metrics;
use assess_core::ml::mlp::MlpNet;
use assess_core::ml::reduce::{Lda, Pca};
use assess_core::rng;
use assess_core::run::{self, E2eOutcome, RunConfig};
use assess_core::telemetry::canonical::{canonical_bytes, code_for_bytes, tracking_code};
use assess_core::telemetry::event::{EventType, GameEvent, GameId, Payload, Value};
use assess_core::telemetry::session::{Consent, Difficulty};
use assess_core::telemetry::store::{FileStore, Finalized, MemoryStore, Store};
use common::oracle;

const SOLVER_BUDGET: Duration = Duration::from_secs(60);
const E2E_BUDGET: Duration = Duration::from_secs(300);
const METRIC_PAIRS: usize = 1000;
const GRADIENT_NETS: usize = 20;
const GRADIENT_TOL: f64 = 1e-4;
const LDA_ANGLE_TOL: f64 = 1e-6;
const PCA_TOL: f64 = 1e-8;
const PHASE1_MIN_ACCURACY: f64 = 0.75;
const LDA_MIN_ACCURACY: f64 = 0.85;
const LDA_MIN_PRECISION: f64 = 0.90;
const CORRELATION_MIN: f64 = 0.25;

struct Ledger {
    lines: Vec<(bool, String, String)>,
}

impl Ledger {
    fn record(&mut self, name: &str, pass: bool, detail: String) {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.lines.push((pass, name.into(), detail));
    }
}

fn solver_equivalence(l: &mut Ledger) {
    let t = Instant::now();
    let s = common::solver_sweep(200, 0x5eed);
    let took = t.elapsed();
    let pass = s.failures.is_empty() && took < SOLVER_BUDGET;
    let first = s.failures.first().cloned().unwrap_or_default();
    l.record(
        "solver oracle equivalence",
        pass,
        format!("{} levels, {} solvable, {} mismatches, {:.1}s {first}", s.checked, s.solvable, s.failures.len(), took.as_secs_f64()),
    );
}

fn level_validation(l: &mut Ledger) {
    let out = tempfile::tempdir().unwrap();
    let cfg = RunConfig::default();
    match run::validate_levels(&cfg, out.path()) {
        Ok(report) => {
            let over = report
                .levels
                .iter()
                .filter(|r| matches!((r.move_limit, r.optimal_moves), (Some(lim), Some(opt)) if lim < opt))
                .count();
            let all = report.levels.iter().all(|r| r.passed);
            l.record("level validation", all && over == 0, format!("{} levels, {over} with limit below optimum", report.levels.len()));
        }
        Err(e) => l.record("level validation", false, e.line()),
    }
}

fn metric_oracle(l: &mut Ledger) {
    let mut r = rng::seeded(1000);
    let mut mismatches = 0;
    for _ in 0..METRIC_PAIRS {
        let n = r.gen_range(0..120);
        let bias = r.gen_range(0.0..1.0);
        let truth: Vec<bool> = (0..n).map(|_| r.gen_bool(bias)).collect();
        let pred: Vec<bool> = (0..n).map(|_| r.gen_bool(0.5)).collect();
        let m = Metrics::score(&truth, &pred);
        if [m.accuracy, m.precision, m.recall, m.f1] != oracle::brute_metrics(&truth, &pred) {
            mismatches += 1;
        }
    }
    l.record("metric oracle", mismatches == 0, format!("{METRIC_PAIRS} pairs, {mismatches} mismatches, tolerance 0"));
}

fn gradient_check(l: &mut Ledger) {
    let mut r = rng::seeded(2024);
    let mut worst: f64 = 0.0;
    for i in 0..GRADIENT_NETS {
        let input = r.gen_range(2..6);
        let hidden: Vec<usize> = (0..r.gen_range(1..3)).map(|_| r.gen_range(2..7)).collect();
        let net = MlpNet::init(input, &hidden, [0.0, 1e-3, 1e-1][i % 3], r.gen());
        let x: Vec<Vec<f64>> = (0..8).map(|_| (0..input).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = (0..8).map(|k| (k % 2) as f64).collect();
        worst = worst.max(oracle::gradient_rel_error(&net, &x, &y, 1e-5));
    }
    l.record("gradient check", worst < GRADIENT_TOL, format!("{GRADIENT_NETS} nets, worst relative error {worst:.2e} < {GRADIENT_TOL:e}"));
}

fn lda_direction(l: &mut Ledger) {
    let x: Vec<Vec<f64>> =
        oracle::LDA_CLASS0.iter().chain(&oracle::LDA_CLASS1).map(|p| vec![p[0] as f64, p[1] as f64]).collect();
    let y: Vec<bool> = (0..8).map(|i| i >= 4).collect();
    let exact = oracle::lda_closed_form().map(|q| q.f());
    match Lda::fit(&x, &y) {
        Ok(fit) => {
            let w = &fit.direction;
            let cross = w[0] * exact[1] - w[1] * exact[0];
            let dot = w[0] * exact[0] + w[1] * exact[1];
            let angle = cross.abs().atan2(dot.abs());
            l.record("LDA direction", angle < LDA_ANGLE_TOL, format!("angle {angle:.2e} rad < {LDA_ANGLE_TOL:e}"));
        }
        Err(e) => l.record("LDA direction", false, e.to_string()),
    }
}

fn pca_properties(l: &mut Ledger) {
    let mut r = rng::seeded(3);
    let mut ortho: f64 = 0.0;
    let mut sorted = true;
    for d in 2..8 {
        let x: Vec<Vec<f64>> = (0..30).map(|_| (0..d).map(|j| r.gen_range(-1.0..1.0) * (j + 1) as f64).collect()).collect();
        let p = Pca::fit(&x, d).unwrap();
        for a in 0..d {
            for b in 0..d {
                let dot: f64 = p.components[a].iter().zip(&p.components[b]).map(|(u, v)| u * v).sum();
                ortho = ortho.max((dot - f64::from(u8::from(a == b))).abs());
            }
        }
        sorted &= p.eigenvalues.windows(2).all(|w| w[0] >= w[1]);
    }
    let x: Vec<Vec<f64>> = oracle::PCA_POINTS.iter().map(|p| p.iter().map(|&v| v as f64).collect()).collect();
    let roots = oracle::characteristic_roots(&oracle::pca_covariance());
    let p = Pca::fit(&x, 3).unwrap();
    let root_err = (0..3).map(|k| (p.eigenvalues[k] - roots[k]).abs()).fold(0.0, f64::max);
    l.record(
        "PCA",
        ortho < PCA_TOL && sorted && root_err < PCA_TOL,
        format!("orthonormality error {ortho:.1e}, variances non-increasing {sorted}, 3x3 root error {root_err:.1e}, tolerance {PCA_TOL:e}"),
    );
}

fn no_leakage(l: &mut Ledger, e: &E2eOutcome) {
    let audit = &e.phase2.audit;
    let mut problems = Vec::new();
    if let Err(err) = audit.check() {
        problems.push(err.to_string());
    }
    if let Err(err) = e.phase1.audit.check() {
        problems.push(err.to_string());
    }
    let mut roles: BTreeMap<&str, usize> = BTreeMap::new();
    for entry in &audit.entries {
        *roles.entry(entry.component.split(' ').next().unwrap_or("")).or_default() += 1;
        if entry.component.starts_with("oversampler") {
            let train = &audit.folds[entry.fold].0;
            if entry.fit_rows.iter().any(|i| train.binary_search(i).is_err()) || entry.fit_rows.len() < train.len() {
                problems.push(format!("{} in fold {} reaches outside the training fold", entry.component, entry.fold));
            }
        }
    }
    for role in ["scaler", "imputer", "selector", "reducer", "oversampler", "model"] {
        if !roles.contains_key(role) {
            problems.push(format!("no {role} entries audited"));
        }
    }
    let covered: Vec<String> = roles.iter().map(|(k, v)| format!("{k} {v}")).collect();
    l.record(
        "no leakage",
        problems.is_empty(),
        format!("{} cells audited ({}) {}", e.phase2.results.len(), covered.join(", "), problems.first().cloned().unwrap_or_default()),
    );
}

fn synthetic_e2e(l: &mut Ledger, e: &E2eOutcome, took: Duration) {
    let labeled = e.dataset.labeled_rows().len();
    let p1 = e.phase1_best();
    let lda = e.best_with_transform("LDA");
    let (acc, prec) = lda.map_or((0.0, 0.0), |r| (r.metrics.accuracy, r.metrics.precision));
    let pass = e.dataset.rows.len() == 132
        && labeled == 39
        && p1.metrics.accuracy >= PHASE1_MIN_ACCURACY
        && acc >= LDA_MIN_ACCURACY
        && prec >= LDA_MIN_PRECISION
        && took < E2E_BUDGET;
    l.record(
        "synthetic end to end",
        pass,
        format!(
            "n={} labeled={labeled}; phase 1 best {} cv accuracy {:.3} >= {PHASE1_MIN_ACCURACY} (inferred vs truth {:.3}); \
             best LDA {} accuracy {acc:.3} >= {LDA_MIN_ACCURACY}, precision {prec:.3} >= {LDA_MIN_PRECISION}; {:.1}s",
            e.dataset.rows.len(),
            p1.algorithm,
            p1.metrics.accuracy,
            e.inferred_truth_accuracy,
            lda.map_or("none", |r| r.algorithm.as_str()),
            took.as_secs_f64(),
        ),
    );
}

fn correlation_signs(l: &mut Ledger, e: &E2eOutcome) {
    let want = [
        ("Puzzle Games: Total Win Count", 1.0),
        ("Side Challenges: Completed Count", 1.0),
        ("Menu Navigation Interaction Count", 1.0),
        ("Total Gameplay Pause Count", -1.0),
        ("Total Game Restart Count", -1.0),
        ("Total Surrender Action Count", -1.0),
    ];
    let mut bad = Vec::new();
    let mut seen = Vec::new();
    for (name, sign) in want {
        match e.correlations.iter().find(|c| c.feature == name) {
            Some(c) if c.r * sign > CORRELATION_MIN => seen.push(format!("{name} {:+.2}", c.r)),
            Some(c) => bad.push(format!("{name} {:+.2}", c.r)),
            None => bad.push(format!("{name} not retained")),
        }
    }
    let detail = if bad.is_empty() { seen.join(", ") } else { bad.join(", ") };
    l.record("correlation signs", bad.is_empty(), format!("|r| > {CORRELATION_MIN}: {detail}"));
}

fn csv_files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism(l: &mut Ledger, a: &Path, b: &Path) {
    let (fa, fb) = (csv_files(a), csv_files(b));
    let differing: Vec<String> = fa
        .iter()
        .filter(|(k, v)| fb.get(*k) != Some(*v))
        .map(|(k, _)| k.display().to_string())
        .chain(fb.keys().filter(|k| !fa.contains_key(*k)).map(|k| k.display().to_string()))
        .collect();
    l.record(
        "determinism",
        !fa.is_empty() && differing.is_empty(),
        format!("{} csv files compared across two runs, {} differ {}", fa.len(), differing.len(), differing.join(" ")),
    );
}

fn session_events(id: &str) -> Vec<GameEvent> {
    let mut moved = Payload::new();
    moved.insert("piece".into(), Value::Int(1));
    let mk = |seq: u64, game_id, event_type, payload: Payload| GameEvent {
        session_id: id.into(),
        seq,
        timestamp_ms: 500 * seq,
        game_id,
        stage_id: 1,
        event_type,
        payload,
    };
    vec![
        mk(0, GameId::Meta, EventType::MenuNav, Payload::new()),
        mk(1, GameId::GroupSwap, EventType::StageStart, Payload::new()),
        mk(2, GameId::GroupSwap, EventType::MoveAccepted, moved),
        mk(3, GameId::GroupSwap, EventType::Surrender, Payload::new()),
    ]
}

fn finalize(store: &mut dyn Store, consent: Consent) -> Result<(String, Finalized), String> {
    let id = store.create_session(Difficulty::Normal, 1).map_err(|e| e.to_string())?;
    for e in session_events(&id) {
        store.record_event(e).map_err(|e| e.to_string())?;
    }
    Ok((id.clone(), store.finalize(&id, consent).map_err(|e| e.to_string())?))
}

fn telemetry(l: &mut Ledger) {
    let mut problems = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    let mut file = FileStore::open(dir.path()).unwrap();
    file.create_session(Difficulty::Easy, 0).unwrap();
    let mem = finalize(&mut MemoryStore::new(), Consent::Send);
    let disk = finalize(&mut file, Consent::Send);
    let code = match (&mem, &disk) {
        (Ok((_, Finalized::Sent { tracking_code: a })), Ok((_, Finalized::Sent { tracking_code: b }))) => {
            if a != b {
                problems.push(format!("stores disagree {a} vs {b}"));
            }
            if a.len() != 5 || !a.bytes().all(|c| c.is_ascii_digit()) {
                problems.push(format!("code {a} is not five digits"));
            }
            if *a != tracking_code(&session_events("any")) {
                problems.push("code depends on more than the event stream".into());
            }
            a.clone()
        }
        other => {
            problems.push(format!("finalize failed: {other:?}"));
            String::new()
        }
    };
    let bytes = canonical_bytes(&session_events("x"));
    let base = code_for_bytes(&bytes);
    let mut unchanged = 0;
    for i in 0..bytes.len() {
        for bit in 0..8 {
            let mut b = bytes.clone();
            b[i] ^= 1 << bit;
            unchanged += usize::from(code_for_bytes(&b) == base);
        }
    }
    if unchanged > 0 {
        problems.push(format!("{unchanged} single-bit edits kept the code"));
    }
    let withheld_dir = tempfile::tempdir().unwrap();
    {
        let mut store = FileStore::open(withheld_dir.path()).unwrap();
        match finalize(&mut store, Consent::Withhold) {
            Ok((_, Finalized::Withheld)) => {}
            other => problems.push(format!("withhold returned {other:?}")),
        }
    }
    let left = fs::read_dir(withheld_dir.path().join("sessions")).map_or(0, |d| d.count());
    let reopened = FileStore::open(withheld_dir.path()).unwrap().session_ids().len();
    if left + reopened > 0 {
        problems.push(format!("withheld session left {left} files, {reopened} indexed sessions"));
    }
    l.record(
        "telemetry",
        problems.is_empty(),
        format!("code {code}, {} bit flips over {} bytes; {}", bytes.len() * 8, bytes.len(), problems.join("; ")),
    );
}

#[test]
fn acceptance() {
    let mut l = Ledger { lines: Vec::new() };
    solver_equivalence(&mut l);
    level_validation(&mut l);
    metric_oracle(&mut l);
    gradient_check(&mut l);
    lda_direction(&mut l);
    pca_properties(&mut l);

    let cfg = RunConfig::default();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let t = Instant::now();
    let first = run::e2e(&cfg, a.path());
    let took = t.elapsed();
    match &first {
        Ok(e) => {
            no_leakage(&mut l, e);
            synthetic_e2e(&mut l, e, took);
            correlation_signs(&mut l, e);
        }
        Err(err) => {
            for name in ["no leakage", "synthetic end to end", "correlation signs"] {
                l.record(name, false, err.line());
            }
        }
    }
    match run::e2e(&cfg, b.path()) {
        Ok(_) => determinism(&mut l, a.path(), b.path()),
        Err(err) => l.record("determinism", false, err.line()),
    }
    telemetry(&mut l);

    let failed: Vec<&str> = l.lines.iter().filter(|(p, _, _)| !p).map(|(_, n, _)| n.as_str()).collect();
    println!("{} of {} criteria pass", l.lines.len() - failed.len(), l.lines.len());
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
