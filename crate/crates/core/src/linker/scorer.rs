use serde::Serialize;

use super::text::{humanize, normalize, phrase_in, Profile};
use super::LinkError;
use crate::kb::Candidate;

/// One candidate with its precomputed surface forms.
#[derive(Debug, Clone)]
pub struct PoolEntry {
    pub candidate: Candidate,
    /// Normalized surface forms: label, humanized label, aliases, expansions.
    pub phrases: Vec<String>,
    pub profiles: Vec<Profile>,
}

impl PoolEntry {
    pub fn new(candidate: Candidate, extra: &[String]) -> Self {
        let mut phrases: Vec<String> = Vec::new();
        let forms = std::iter::once(candidate.label.clone())
            .chain(std::iter::once(humanize(&candidate.label)))
            .chain(candidate.aliases.iter().cloned())
            .chain(extra.iter().cloned());
        for f in forms {
            let n = normalize(&f);
            if !n.is_empty() && !phrases.contains(&n) {
                phrases.push(n);
            }
        }
        let profiles = phrases.iter().map(|p| Profile::of_normalized(p)).collect();
        PoolEntry {
            candidate,
            phrases,
            profiles,
        }
    }

    /// Position of the first surface form found verbatim in the padded context.
    pub fn find_in(&self, padded: &str) -> Option<(usize, usize)> {
        self.phrases
            .iter()
            .filter_map(|p| phrase_in(padded, p).map(|pos| (pos, p.len())))
            .min()
    }
}

/// Slot context handed to a scoring provider. `text` is the normalized
/// question with consumed spans removed; `vector` is whatever the provider's
/// `encode_context` produced for it.
#[derive(Debug, Clone)]
pub struct QueryContext {
    pub question: String,
    pub text: String,
    pub vector: Vec<f64>,
    pub slot: usize,
    padded: String,
    profile: Profile,
}

impl QueryContext {
    pub fn new(question: &str, text: &str, slot: usize) -> Self {
        let text = normalize(text);
        QueryContext {
            question: question.to_owned(),
            padded: format!(" {text} "),
            profile: Profile::of_normalized(&text),
            text,
            vector: Vec::new(),
            slot,
        }
    }

    pub fn padded(&self) -> &str {
        &self.padded
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }
}

pub trait ScoringProvider: Send + Sync {
    fn name(&self) -> &str;

    /// Context representation stored in [`QueryContext::vector`].
    fn encode_context(&self, _text: &str) -> Vec<f64> {
        Vec::new()
    }

    fn score(&self, ctx: &QueryContext, candidate: &PoolEntry) -> f64;

    fn score_batch(&self, ctx: &QueryContext, candidates: &[PoolEntry]) -> Vec<f64> {
        candidates.iter().map(|c| self.score(ctx, c)).collect()
    }

    /// Providers returning `false` are called under a lock by the pipeline.
    fn is_concurrent(&self) -> bool {
        true
    }
}

/// Trigram cosine between context and the closest surface form, plus a
/// fixed bonus when a surface form occurs verbatim as whole words.
#[derive(Debug, Clone)]
pub struct LexicalScorer {
    pub bonus: f64,
}

impl Default for LexicalScorer {
    fn default() -> Self {
        LexicalScorer { bonus: 0.5 }
    }
}

impl ScoringProvider for LexicalScorer {
    fn name(&self) -> &str {
        "lexical"
    }

    fn score(&self, ctx: &QueryContext, c: &PoolEntry) -> f64 {
        let cos = c
            .profiles
            .iter()
            .map(|p| ctx.profile.cosine(p))
            .fold(0.0, f64::max);
        let hit = c.phrases.iter().any(|p| phrase_in(&ctx.padded, p).is_some());
        cos + if hit { self.bonus } else { 0.0 }
    }
}

/// Feature hashing of character trigrams into a fixed-size unit vector.
#[derive(Debug, Clone)]
pub struct HashedTrigramEncoder {
    pub dim: usize,
}

impl HashedTrigramEncoder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        HashedTrigramEncoder { dim }
    }

    pub fn encode(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for (g, n) in Profile::of(text).grams() {
            // FNV-1a
            let mut h: u64 = 0xcbf2_9ce4_8422_2325;
            for &b in g {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
            v[(h % self.dim as u64) as usize] += f64::from(n);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

/// Inner product of unit-normalized context and candidate vectors.
#[derive(Debug, Clone)]
pub struct VectorScorer {
    encoder: HashedTrigramEncoder,
}

impl VectorScorer {
    pub fn new(dim: usize) -> Self {
        VectorScorer {
            encoder: HashedTrigramEncoder::new(dim),
        }
    }
}

impl ScoringProvider for VectorScorer {
    fn name(&self) -> &str {
        "vector"
    }

    fn encode_context(&self, text: &str) -> Vec<f64> {
        self.encoder.encode(text)
    }

    fn score(&self, ctx: &QueryContext, c: &PoolEntry) -> f64 {
        c.phrases
            .iter()
            .map(|p| {
                let v = self.encoder.encode(p);
                v.iter().zip(&ctx.vector).map(|(a, b)| a * b).sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CandidateScore {
    /// Index into the scored pool.
    pub index: usize,
    pub raw: f64,
    pub probability: f64,
}

/// Softmax with max subtraction. `-inf` entries get probability 0.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        let n = scores.len() as f64;
        return scores.iter().map(|_| 1.0 / n).collect();
    }
    let ex: Vec<f64> = scores.iter().map(|&x| (x - m).exp()).collect();
    let sum: f64 = ex.iter().sum();
    ex.into_iter().map(|e| e / sum).collect()
}

pub fn score_slot(
    ctx: &QueryContext,
    pool: &[PoolEntry],
    scorer: &dyn ScoringProvider,
) -> Result<Vec<CandidateScore>, LinkError> {
    if pool.is_empty() {
        return Err(LinkError::EmptyPool);
    }
    Ok(scores_to_candidates(scorer.score_batch(ctx, pool)))
}

pub fn scores_to_candidates(raw: Vec<f64>) -> Vec<CandidateScore> {
    let probs = softmax(&raw);
    raw.into_iter()
        .zip(probs)
        .enumerate()
        .map(|(index, (raw, probability))| CandidateScore {
            index,
            raw,
            probability,
        })
        .collect()
}

/// Index of the highest probability (lowest index on ties) and the margin to
/// the runner-up.
pub fn argmax(scores: &[CandidateScore]) -> Option<(usize, f64)> {
    let mut best: Option<usize> = None;
    let mut second = 0.0f64;
    for (i, s) in scores.iter().enumerate() {
        match best {
            None => best = Some(i),
            Some(b) if s.probability > scores[b].probability => {
                second = scores[b].probability;
                best = Some(i);
            }
            Some(_) => second = second.max(s.probability),
        }
    }
    best.map(|b| (b, scores[b].probability - second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::CandidateKind;

    fn entry(label: &str) -> PoolEntry {
        PoolEntry::new(
            Candidate {
                kind: CandidateKind::Concept,
                id: label.into(),
                label: label.into(),
                aliases: vec![],
            },
            &[],
        )
    }

    #[test]
    fn softmax_values() {
        let p = softmax(&[2.0, 1.0, 0.0]);
        let want = [0.6652409557748218, 0.24472847105479764, 0.09003057317038046];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(softmax(&[7.5]), vec![1.0]);
        let u = softmax(&[3.0; 4]);
        assert!(u.iter().all(|x| (x - 0.25).abs() < 1e-15));
        let big = softmax(&[1000.0, 999.0, -1000.0]);
        assert!((big.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let masked = softmax(&[f64::NEG_INFINITY, 0.0]);
        assert_eq!(masked, vec![0.0, 1.0]);
    }

    #[test]
    fn verbatim_label_gets_bonus() {
        let s = LexicalScorer::default();
        let ctx = QueryContext::new("q", "How many rocket debris objects are there?", 0);
        let a = s.score(&ctx, &entry("RocketDebris"));
        let b = s.score(&ctx, &entry("RocketBody"));
        assert!(a > 0.5 && a > b + 0.5, "{a} {b}");
    }

    #[test]
    fn empty_pool_is_an_error() {
        let ctx = QueryContext::new("q", "q", 0);
        assert!(matches!(score_slot(&ctx, &[], &LexicalScorer::default()), Err(LinkError::EmptyPool)));
    }

    #[test]
    fn vector_scorer_is_cosine_like() {
        let s = VectorScorer::new(512);
        let mut ctx = QueryContext::new("q", "launch vehicle", 0);
        ctx.vector = s.encode_context(&ctx.text);
        let a = s.score(&ctx, &entry("LaunchVehicle"));
        let b = s.score(&ctx, &entry("Country"));
        assert!((a - 1.0).abs() < 1e-9 && b < a, "{a} {b}");
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        let c = scores_to_candidates(vec![1.0, 3.0, 3.0, 0.0]);
        let (i, margin) = argmax(&c).unwrap();
        assert_eq!(i, 1);
        assert_eq!(margin, 0.0);
        let c = scores_to_candidates(vec![0.0, 2.0]);
        assert!(argmax(&c).unwrap().1 > 0.0);
    }
}
