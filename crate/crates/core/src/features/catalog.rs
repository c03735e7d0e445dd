//! The checked-in variable catalog.

use std::sync::OnceLock;

const CATALOG_CSV: &str = include_str!("../../catalog/variables.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarType {
    Number,
    Bool,
    Enum,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Identity,
    Questionnaire,
    Gameplay,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub var_type: VarType,
    pub source: Source,
    /// `false` for variables added on top of the published list.
    pub published: bool,
}

pub fn catalog() -> &'static [Variable] {
    static CATALOG: OnceLock<Vec<Variable>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let mut r = csv::Reader::from_reader(CATALOG_CSV.as_bytes());
        r.records()
            .map(|rec| {
                let rec = rec.expect("catalog is valid csv");
                Variable {
                    name: rec[0].to_owned(),
                    var_type: match &rec[1] {
                        "number" => VarType::Number,
                        "bool" => VarType::Bool,
                        "enum" => VarType::Enum,
                        "string" => VarType::Text,
                        t => panic!("catalog: unknown type {t}"),
                    },
                    source: match &rec[2] {
                        "identity" => Source::Identity,
                        "questionnaire" => Source::Questionnaire,
                        "gameplay" => Source::Gameplay,
                        s => panic!("catalog: unknown source {s}"),
                    },
                    published: &rec[3] == "published",
                }
            })
            .collect()
    })
}

pub fn lookup(name: &str) -> Option<&'static Variable> {
    catalog().iter().find(|v| v.name == name)
}

/// Position in catalog order; unknown names sort after every catalog entry.
pub fn rank(name: &str) -> usize {
    catalog().iter().position(|v| v.name == name).unwrap_or(usize::MAX)
}

/// Name prefixes that mark questionnaire-derived columns. Anything starting
/// with one of these must stay out of behaviour-only models.
pub const QUESTIONNAIRE_PREFIXES: [&str; 13] = [
    "Participant ",
    "Gender Flag",
    "Computer Engineering",
    "MBTI ",
    "Confirmed Programming",
    "Predicted Programming",
    "Help-Seeking",
    "Problem-Solving via",
    "Time Management Ability",
    "Competitive Motivation",
    "Behavioral Flexibility",
    "Primary Gaming Platform",
    "Average Weekly Gameplay",
];

pub fn is_questionnaire(name: &str) -> bool {
    QUESTIONNAIRE_PREFIXES.iter().any(|p| name.starts_with(p))
}

/// Companion flag column for a ratio whose denominator was zero.
pub fn zero_flag_name(ratio: &str) -> String {
    format!("{ratio} [0/0]")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn catalog_has_132_unique_names() {
        let names: HashSet<_> = catalog().iter().map(|v| v.name.as_str()).collect();
        assert_eq!(catalog().len(), 132);
        assert_eq!(names.len(), 132);
    }

    #[test]
    fn prefix_filter_matches_questionnaire_source_exactly() {
        for v in catalog() {
            assert_eq!(is_questionnaire(&v.name), v.source == Source::Questionnaire, "{}", v.name);
        }
    }
}
