//! Result tables as aligned text and CSV.

use serde::{Deserialize, Serialize};

use super::pipeline::{CellResult, Transform};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn num(v: f64) -> String {
    format!("{v:.2}")
}

impl Table {
    fn new(headers: &[&str]) -> Table {
        Table { headers: headers.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    /// Rows joined with `" | "`, without padding.
    pub fn plain_lines(&self) -> Vec<String> {
        std::iter::once(&self.headers).chain(&self.rows).map(|r| r.join(" | ")).collect()
    }

    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.headers.iter().map(String::len).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let line = |r: &[String]| {
            r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join(" | ").trim_end().to_owned()
        };
        let mut out = line(&self.headers);
        out.push('\n');
        out.push_str(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-|-"));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Questionnaire-model comparison.
pub fn phase1_table(results: &[CellResult]) -> Table {
    let mut t = Table::new(&["Algorithm", "F1 Score", "Accuracy", "Precision", "Recall"]);
    for r in results {
        let m = &r.metrics;
        t.rows.push(vec![r.algorithm.clone(), num(m.f1), num(m.accuracy), num(m.precision), num(m.recall)]);
    }
    t
}

pub fn selection_table(results: &[CellResult]) -> Table {
    let mut t = Table::new(&["Algorithm", "Feature Selection", "#Features", "Precision", "Accuracy", "Recall", "F1 Score"]);
    for r in results.iter().filter(|r| matches!(r.cell.transform, Transform::Select(_))) {
        let m = &r.metrics;
        let k = r.n_features.map_or_else(|| "--".to_owned(), |k| k.to_string());
        t.rows.push(vec![
            r.algorithm.clone(),
            r.transform.clone(),
            k,
            num(m.precision),
            num(m.accuracy),
            num(m.recall),
            num(m.f1),
        ]);
    }
    t
}

pub fn reduction_table(results: &[CellResult]) -> Table {
    let mut t = Table::new(&["Algorithm", "Feature Reduction", "Precision", "Accuracy", "Recall", "F1 Score"]);
    for r in results.iter().filter(|r| matches!(r.cell.transform, Transform::Reduce(_))) {
        let m = &r.metrics;
        t.rows.push(vec![r.algorithm.clone(), r.transform.clone(), num(m.precision), num(m.accuracy), num(m.recall), num(m.f1)]);
    }
    t
}
