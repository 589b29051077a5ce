//! Text normalization, character-trigram profiles and phrase matching.

use std::ops::Range;

/// Lowercase ASCII alphanumeric tokens with their byte spans in the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub span: Range<usize>,
}

pub fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if c.is_ascii_alphanumeric() {
            start.get_or_insert(i);
        } else if let Some(s) = start.take() {
            out.push(Token {
                text: text[s..i].to_ascii_lowercase(),
                span: s..i,
            });
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: text[s..].to_ascii_lowercase(),
            span: s..text.len(),
        });
    }
    out
}

/// Lowercase, every non-alphanumeric run becomes one space, trimmed.
pub fn normalize(text: &str) -> String {
    let toks = tokenize(text);
    let mut out = String::with_capacity(text.len());
    for (i, t) in toks.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&t.text);
    }
    out
}

/// Splits camelCase and snake_case labels into words: "RocketDebris" ->
/// "Rocket Debris", "host_country" -> "host country", "LMO" stays "LMO".
pub fn humanize(label: &str) -> String {
    let chars: Vec<char> = label.chars().collect();
    let mut out = String::with_capacity(label.len() + 4);
    for (i, &c) in chars.iter().enumerate() {
        if c == '_' {
            out.push(' ');
            continue;
        }
        if c.is_uppercase() && i > 0 {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            if prev.is_lowercase() || prev.is_ascii_digit() || (prev.is_uppercase() && next_lower) {
                out.push(' ');
            }
        }
        out.push(c);
    }
    out
}

/// Sparse trigram count vector over a normalized string padded with one
/// space on each side.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Profile {
    grams: Vec<([u8; 3], u32)>,
    norm: f64,
}

impl Profile {
    pub fn of(text: &str) -> Self {
        Self::of_normalized(&normalize(text))
    }

    pub fn of_normalized(norm: &str) -> Self {
        let padded = format!(" {norm} ");
        let b = padded.as_bytes();
        let mut grams: Vec<[u8; 3]> = b.windows(3).map(|w| [w[0], w[1], w[2]]).collect();
        grams.sort_unstable();
        let mut counted: Vec<([u8; 3], u32)> = Vec::with_capacity(grams.len());
        for g in grams {
            match counted.last_mut() {
                Some((last, n)) if *last == g => *n += 1,
                _ => counted.push((g, 1)),
            }
        }
        let norm = counted.iter().map(|(_, n)| f64::from(*n).powi(2)).sum::<f64>().sqrt();
        Profile { grams: counted, norm }
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    pub fn grams(&self) -> impl Iterator<Item = (&[u8; 3], u32)> {
        self.grams.iter().map(|(g, n)| (g, *n))
    }

    pub fn cosine(&self, other: &Profile) -> f64 {
        if self.norm == 0.0 || other.norm == 0.0 {
            return 0.0;
        }
        let (a, b) = (&self.grams, &other.grams);
        let (mut i, mut j, mut dot) = (0, 0, 0u64);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    dot += u64::from(a[i].1) * u64::from(b[j].1);
                    i += 1;
                    j += 1;
                }
            }
        }
        dot as f64 / (self.norm * other.norm)
    }
}

/// Trigram cosine of two raw strings.
pub fn similarity(a: &str, b: &str) -> f64 {
    Profile::of(a).cosine(&Profile::of(b))
}

/// Byte offset in `padded` (a normalized string with one leading and one
/// trailing space) where `phrase` occurs as whole words. The last word may
/// carry a plural "s" or "es".
pub fn phrase_in(padded: &str, phrase: &str) -> Option<usize> {
    if phrase.is_empty() {
        return None;
    }
    for (pos, _) in padded.match_indices(phrase) {
        if pos == 0 || padded.as_bytes()[pos - 1] != b' ' {
            continue;
        }
        let rest = &padded[pos + phrase.len()..];
        if rest.starts_with(' ') || rest.starts_with("s ") || rest.starts_with("es ") {
            return Some(pos);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        assert_eq!(normalize("  Earth's  atmosphere, LEO-MEO!"), "earth s atmosphere leo meo");
        assert_eq!(normalize(""), "");
        let t = tokenize("Ax-1 é b");
        assert_eq!(t.iter().map(|t| t.text.as_str()).collect::<Vec<_>>(), ["ax", "1", "b"]);
        assert_eq!(t[2].span, 8..9);
    }

    #[test]
    fn humanizing_labels() {
        assert_eq!(humanize("RocketDebris"), "Rocket Debris");
        assert_eq!(humanize("host_country"), "host country");
        assert_eq!(humanize("LMO"), "LMO");
        assert_eq!(humanize("UnknownObjClass"), "Unknown Obj Class");
        assert_eq!(humanize("HSTOrbit"), "HST Orbit");
    }

    #[test]
    fn cosine_basics() {
        assert!((similarity("Hubble", "hubble!") - 1.0).abs() < 1e-12);
        assert_eq!(similarity("", "abc"), 0.0);
        assert_eq!(similarity("abc", "xyz"), 0.0);
        let s = similarity("How many rocket bodies re-entered before 2010?", "How many rocket debris objects have re-entered Earth's atmosphere before 2019?");
        assert!((s - 0.6170299080143768).abs() < 1e-12, "{s}");
    }

    #[test]
    fn phrases_respect_word_boundaries() {
        let ctx = " how many launches happened in leo meo crossing orbits ";
        assert!(phrase_in(ctx, "launch").is_some());
        assert!(phrase_in(ctx, "leo meo crossing orbit").is_some());
        assert!(phrase_in(ctx, "aunch").is_none());
        assert!(phrase_in(ctx, "launc").is_none());
        assert!(phrase_in(ctx, "many launch").is_some());
        assert_eq!(phrase_in(ctx, ""), None);
    }
}
