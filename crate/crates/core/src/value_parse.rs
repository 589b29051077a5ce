//! Rule-based extraction of dates, years and numbers with units from
//! question text. Spans are byte offsets into the question.

use std::collections::BTreeMap;
use std::ops::Range;
use std::sync::OnceLock;

use chrono::NaiveDate;
use regex::Regex;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::kb::parse_decimal;
use crate::program::CompareOp;

pub const DEFAULT_RULES: &str = include_str!("../config/value_rules.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleTable {
    pub version: u32,
    /// Number of tokens before a mention searched for cue words.
    pub window: usize,
    pub year_range: (i32, i32),
    pub time_cues: BTreeMap<String, CompareOp>,
    pub number_cues: BTreeMap<String, CompareOp>,
    pub units: Vec<String>,
}

impl Default for RuleTable {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_RULES).expect("bundled rule table is valid")
    }
}

impl RuleTable {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum TimeValue {
    Date(NaiveDate),
    Year(i32),
}

impl TimeValue {
    /// Literal form used as a program input.
    pub fn literal(&self) -> String {
        match self {
            TimeValue::Date(d) => d.format("%Y-%m-%d").to_string(),
            TimeValue::Year(y) => y.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimeMention {
    pub span: Range<usize>,
    pub value: TimeValue,
    pub op_hint: CompareOp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NumberMention {
    pub span: Range<usize>,
    pub value: Decimal,
    pub unit: Option<String>,
    pub op_hint: CompareOp,
}

impl NumberMention {
    pub fn literal(&self) -> String {
        match &self.unit {
            Some(u) => format!("{} {u}", self.value),
            None => self.value.to_string(),
        }
    }
}

pub struct ValueParser {
    rules: RuleTable,
    iso: Regex,
    day_month: Regex,
    month_day: Regex,
    year: Regex,
    number: Regex,
}

const MONTHS: &str = "january|february|march|april|may|june|july|august|september|october|november|december|sept|jan|feb|mar|apr|jun|jul|aug|sep|oct|nov|dec";

fn month_number(name: &str) -> Option<u32> {
    let n = name.to_lowercase();
    let key = n.get(..3)?;
    let i = ["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"]
        .iter()
        .position(|m| *m == key)?;
    Some(i as u32 + 1)
}

impl Default for ValueParser {
    fn default() -> Self {
        Self::new(RuleTable::default())
    }
}

impl ValueParser {
    pub fn new(rules: RuleTable) -> Self {
        let re = |s: &str| Regex::new(s).expect("static pattern");
        ValueParser {
            rules,
            iso: re(r"\b(\d{4})-(\d{2})-(\d{2})\b"),
            day_month: re(&format!(
                r"(?i)\b(\d{{1,2}})(?:st|nd|rd|th)?\s+(?:of\s+)?({MONTHS})\.?,?\s+(\d{{4}})\b"
            )),
            month_day: re(&format!(
                r"(?i)\b({MONTHS})\.?\s+(\d{{1,2}})(?:st|nd|rd|th)?,?\s+(\d{{4}})\b"
            )),
            year: re(r"\b\d{4}\b"),
            number: re(r"\d+(?:,\d{3})*(?:\.\d+)?"),
        }
    }

    pub fn rules(&self) -> &RuleTable {
        &self.rules
    }

    pub fn extract_times(&self, q: &str) -> Vec<TimeMention> {
        let mut found: Vec<(Range<usize>, TimeValue)> = Vec::new();
        for c in self.iso.captures_iter(q) {
            let m = c.get(0).expect("whole match");
            let date = ymd(&c[1], &c[2], &c[3]);
            if let Some(d) = date {
                found.push((m.range(), TimeValue::Date(d)));
            }
        }
        for c in self.day_month.captures_iter(q) {
            let m = c.get(0).expect("whole match");
            if let Some(d) = month_number(&c[2]).and_then(|mo| ymd_n(&c[3], mo, &c[1])) {
                found.push((m.range(), TimeValue::Date(d)));
            }
        }
        for c in self.month_day.captures_iter(q) {
            let m = c.get(0).expect("whole match");
            if let Some(d) = month_number(&c[1]).and_then(|mo| ymd_n(&c[3], mo, &c[2])) {
                found.push((m.range(), TimeValue::Date(d)));
            }
        }
        let (lo, hi) = self.rules.year_range;
        for m in self.year.find_iter(q) {
            let y: i32 = m.as_str().parse().expect("four digits");
            if y < lo || y > hi || !self.standalone(q, m.range()) {
                continue;
            }
            if self.unit_after(q, m.end()).is_some() {
                continue;
            }
            found.push((m.range(), TimeValue::Year(y)));
        }
        earliest_longest(found)
            .into_iter()
            .map(|(span, value)| TimeMention {
                op_hint: self.cue(q, span.start, &self.rules.time_cues),
                span,
                value,
            })
            .collect()
    }

    pub fn extract_numbers(&self, q: &str) -> Vec<NumberMention> {
        let times = self.extract_times(q);
        let mut out = Vec::new();
        for m in self.number.find_iter(q) {
            let span = m.range();
            if times.iter().any(|t| t.span.start < span.end && span.start < t.span.end) {
                continue;
            }
            let before = q[..span.start].chars().next_back();
            match before {
                Some(c) if c.is_alphanumeric() || c == '.' || c == '_' => continue,
                // designations such as "Ax-1" or "STS-31"
                Some('-') if q[..span.start - 1].chars().next_back().is_some_and(char::is_alphanumeric) => continue,
                _ => {}
            }
            let Some(value) = parse_decimal(&m.as_str().replace(',', "")) else {
                continue;
            };
            let after = &q[span.end..];
            let attached = token_at(after);
            let (unit, end) = if !attached.is_empty() {
                match self.unit(attached) {
                    Some(u) => (Some(u), span.end + attached.len()),
                    // "2F", "3M", "9-1": part of a name
                    None if attached.chars().next().is_some_and(|c| c.is_alphanumeric() || c == '-') => continue,
                    None => (None, span.end),
                }
            } else {
                match self.unit_after(q, span.end) {
                    Some((u, end)) => (Some(u), end),
                    None => (None, span.end),
                }
            };
            let op_hint = self.cue(q, span.start, &self.rules.number_cues);
            if unit.is_none() && op_hint == CompareOp::Eq && self.follows_name(q, span.start) {
                continue;
            }
            out.push(NumberMention {
                span: span.start..end,
                value,
                unit,
                op_hint,
            });
        }
        out
    }

    fn unit(&self, token: &str) -> Option<String> {
        let units = &self.rules.units;
        units
            .iter()
            .find(|u| u.as_str() == token)
            .or_else(|| units.iter().find(|u| u.eq_ignore_ascii_case(token)))
            .cloned()
    }

    /// A unit token separated from position `end` by whitespace.
    fn unit_after(&self, q: &str, end: usize) -> Option<(String, usize)> {
        let rest = &q[end..];
        let trimmed = rest.trim_start();
        if trimmed.len() == rest.len() {
            return None;
        }
        let tok = token_at(trimmed);
        if tok.is_empty() {
            return None;
        }
        let start = end + (rest.len() - trimmed.len());
        self.unit(tok).map(|u| (u, start + tok.len()))
    }

    fn standalone(&self, q: &str, span: Range<usize>) -> bool {
        let prev = q[..span.start].chars().next_back();
        if prev.is_some_and(|c| c.is_alphanumeric() || matches!(c, '-' | '.' | '/' | '_')) {
            return false;
        }
        let mut next = q[span.end..].chars();
        match next.next() {
            None => true,
            Some(c) if c.is_alphanumeric() || c == '_' => false,
            Some('-' | '.' | '/' | ',') => !next.next().is_some_and(|c| c.is_ascii_digit()),
            Some(_) => true,
        }
    }

    /// Bare number directly after a capitalized word, as in "Falcon 9".
    fn follows_name(&self, q: &str, start: usize) -> bool {
        let before = &q[..start];
        if !before.ends_with(' ') {
            return false;
        }
        before
            .trim_end()
            .rsplit(|c: char| !c.is_alphanumeric())
            .next()
            .and_then(|w| w.chars().next())
            .is_some_and(char::is_uppercase)
    }

    fn cue(&self, q: &str, start: usize, cues: &BTreeMap<String, CompareOp>) -> CompareOp {
        q[..start]
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .rev()
            .take(self.rules.window)
            .find_map(|t| cues.get(&t.to_lowercase()).copied())
            .unwrap_or(CompareOp::Eq)
    }
}

/// Token starting at the beginning of `s`, without trailing sentence punctuation.
fn token_at(s: &str) -> &str {
    let end = s.find(char::is_whitespace).unwrap_or(s.len());
    s[..end].trim_end_matches(['?', '.', ',', '!', ';', ':', ')', '"', '\''])
}

fn ymd(y: &str, m: &str, d: &str) -> Option<NaiveDate> {
    NaiveDate::from_ymd_opt(y.parse().ok()?, m.parse().ok()?, d.parse().ok()?)
}

fn ymd_n(y: &str, m: u32, d: &str) -> Option<NaiveDate> {
    NaiveDate::from_ymd_opt(y.parse().ok()?, m, d.parse().ok()?)
}

/// Keeps non-overlapping candidates, preferring the earliest start and then the longest.
fn earliest_longest<T>(mut found: Vec<(Range<usize>, T)>) -> Vec<(Range<usize>, T)> {
    found.sort_by(|a, b| a.0.start.cmp(&b.0.start).then(b.0.end.cmp(&a.0.end)));
    let mut out: Vec<(Range<usize>, T)> = Vec::new();
    for (span, v) in found {
        if out.last().is_some_and(|(s, _)| span.start < s.end) {
            continue;
        }
        out.push((span, v));
    }
    out
}

fn default_parser() -> &'static ValueParser {
    static P: OnceLock<ValueParser> = OnceLock::new();
    P.get_or_init(ValueParser::default)
}

pub fn extract_times(question: &str) -> Vec<TimeMention> {
    default_parser().extract_times(question)
}

pub fn extract_numbers(question: &str) -> Vec<NumberMention> {
    default_parser().extract_numbers(question)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn date(y: i32, m: u32, d: u32) -> TimeValue {
        TimeValue::Date(NaiveDate::from_ymd_opt(y, m, d).unwrap())
    }

    #[test]
    fn year_with_cue() {
        let q = "How many rocket debris objects have re-entered Earth's atmosphere before 2019?";
        let t = extract_times(q);
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].value, TimeValue::Year(2019));
        assert_eq!(t[0].op_hint, CompareOp::Lt);
        assert_eq!(&q[t[0].span.clone()], "2019");
        assert!(extract_numbers(q).is_empty());
    }

    #[test]
    fn date_forms() {
        let t = extract_times("How many launches are planned for 8th of April 2022?");
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].value, date(2022, 4, 8));
        assert_eq!(t[0].op_hint, CompareOp::Eq);
        assert_eq!(extract_times("launched after March 3, 1999")[0].value, date(1999, 3, 3));
        let t = extract_times("launched after March 3, 1999");
        assert_eq!(t[0].op_hint, CompareOp::Gt);
        assert_eq!(extract_times("epoch 2021-06-30 exactly")[0].value, date(2021, 6, 30));
        assert_eq!(extract_times("on 1 Jan 2000")[0].value, date(2000, 1, 1));
        assert!(extract_times("2021-02-30").is_empty());
        assert!(extract_times("").is_empty());
    }

    #[test]
    fn years_need_range_and_boundaries() {
        assert!(extract_times("object 1850 and 2150").is_empty());
        assert!(extract_times("COSPAR 1990-037B").is_empty());
        assert!(extract_times("mass above 2000 kg").is_empty());
        let since = extract_times("in orbit since 1998");
        assert_eq!(since[0].op_hint, CompareOp::Gt);
    }

    #[test]
    fn numbers_and_units() {
        let q = "How many objects have a depth of 0.3 m?";
        let n = extract_numbers(q);
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].value, Decimal::new(3, 1));
        assert_eq!(n[0].unit.as_deref(), Some("m"));
        assert_eq!(n[0].op_hint, CompareOp::Eq);
        assert_eq!(&q[n[0].span.clone()], "0.3 m");

        let n = extract_numbers("more than 500 kg");
        assert_eq!((n[0].value, n[0].unit.as_deref(), n[0].op_hint), (Decimal::new(500, 0), Some("kg"), CompareOp::Gt));
        let n = extract_numbers("lighter than 1,200kg?");
        assert_eq!((n[0].value, n[0].unit.as_deref(), n[0].op_hint), (Decimal::new(1200, 0), Some("kg"), CompareOp::Lt));
        assert_eq!(n[0].literal(), "1200 kg");
        assert!(extract_numbers("before 2019").is_empty());
    }

    #[test]
    fn designations_are_not_numbers() {
        for q in ["the Ax-1 mission", "STS-31 crew", "Long March 2F", "Kosmos-3M DEB", "Falcon 9 rockets"] {
            assert!(extract_numbers(q).is_empty(), "{q}");
        }
        assert_eq!(extract_numbers("Falcon 9 heavier than 5 t").len(), 1);
    }

    #[test]
    fn custom_rule_table() {
        let mut rules = RuleTable::default();
        rules.number_cues.insert("beyond".into(), CompareOp::Gt);
        let p = ValueParser::new(rules);
        assert_eq!(p.extract_numbers("beyond 7 km")[0].op_hint, CompareOp::Gt);
        assert_eq!(p.rules().version, 1);
    }

    proptest! {
        #[test]
        fn mentions_never_overlap_and_are_stable(q in "[a-zA-Z0-9 .,:?-]{0,60}( (before|after|in|more than|under) ([0-9]{1,4}|19[0-9]{2}|20[0-9]{2}-0[1-9]-1[0-9]) ?(kg|m|cm)?){0,3}") {
            let t = extract_times(&q);
            let n = extract_numbers(&q);
            prop_assert_eq!(&t, &extract_times(&q));
            prop_assert_eq!(&n, &extract_numbers(&q));
            let mut spans: Vec<Range<usize>> = t.iter().map(|m| m.span.clone()).chain(n.iter().map(|m| m.span.clone())).collect();
            spans.sort_by_key(|s| s.start);
            for w in spans.windows(2) {
                prop_assert!(w[0].end <= w[1].start, "{:?}", spans);
            }
            for m in &t {
                prop_assert!(m.span.end <= q.len());
                if let TimeValue::Date(d) = m.value {
                    let iso = d.format("%Y-%m-%d").to_string();
                    prop_assert_eq!(NaiveDate::parse_from_str(&iso, "%Y-%m-%d").unwrap(), d);
                }
            }
        }
    }
}
