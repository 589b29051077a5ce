use std::collections::{BTreeSet, HashSet};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AugmentError;
use crate::program::Program;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    #[default]
    Manual,
    Augmented,
}

/// One line of a dataset JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub question: Option<String>,
    #[serde(with = "crate::program::json")]
    pub program: Program,
    #[serde(default)]
    pub source: Origin,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub meta: serde_json::Value,
}

pub fn read_dataset(text: &str) -> Result<Vec<DatasetRecord>, AugmentError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| AugmentError::Dataset {
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

pub fn write_dataset(records: &[DatasetRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("dataset records serialize") + "\n")
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct Split {
    pub train: Vec<DatasetRecord>,
    pub validation: Vec<DatasetRecord>,
}

/// Validation = every manual record plus `round(val_fraction * augmented)`
/// augmented records sampled uniformly; training = the remaining augmented
/// records whose canonical program does not occur in validation.
pub fn split_dataset(
    manual: &[DatasetRecord],
    augmented: &[DatasetRecord],
    val_fraction: f64,
    seed: u64,
) -> Result<Split, AugmentError> {
    if !(0.0..1.0).contains(&val_fraction) {
        return Err(AugmentError::Fraction(val_fraction));
    }
    let k = ((val_fraction * augmented.len() as f64).round() as usize).min(augmented.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked: BTreeSet<usize> = sample(&mut rng, augmented.len(), k).into_iter().collect();

    let mut validation: Vec<DatasetRecord> = manual.to_vec();
    validation.extend(picked.iter().map(|&i| augmented[i].clone()));
    let keys: HashSet<String> = validation.iter().map(|r| r.program.canonical()).collect();
    let train = augmented
        .iter()
        .enumerate()
        .filter(|(i, r)| !picked.contains(i) && !keys.contains(&r.program.canonical()))
        .map(|(_, r)| r.clone())
        .collect();
    Ok(Split { train, validation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{FunctionCall, FunctionKind};

    fn rec(name: &str, origin: Origin) -> DatasetRecord {
        let p = Program::new(vec![
            FunctionCall::new(FunctionKind::Find, &[name], &[]),
            FunctionCall::new(FunctionKind::What, &[], &[0]),
        ])
        .unwrap();
        DatasetRecord {
            question: Some(format!("What is {name}?")),
            program: p,
            source: origin,
            meta: serde_json::Value::Null,
        }
    }

    #[test]
    fn zero_fraction_keeps_manual_only() {
        let manual = vec![rec("A", Origin::Manual)];
        let aug: Vec<_> = ["B", "C", "A"].iter().map(|n| rec(n, Origin::Augmented)).collect();
        let s = split_dataset(&manual, &aug, 0.0, 1).unwrap();
        assert_eq!(s.validation, manual);
        // the augmented copy of A is filtered out of training
        assert_eq!(s.train.len(), 2);
    }

    #[test]
    fn partitions_are_disjoint_by_program() {
        let manual: Vec<_> = (0..5).map(|i| rec(&format!("m{i}"), Origin::Manual)).collect();
        let aug: Vec<_> = (0..200).map(|i| rec(&format!("x{}", i % 150), Origin::Augmented)).collect();
        for seed in 0..20 {
            let s = split_dataset(&manual, &aug, 0.05, seed).unwrap();
            assert_eq!(s.validation.len(), 15);
            let v: HashSet<String> = s.validation.iter().map(|r| r.program.canonical()).collect();
            assert!(s.train.iter().all(|r| !v.contains(&r.program.canonical())));
        }
        assert!(split_dataset(&manual, &aug, 1.0, 0).is_err());
    }

    #[test]
    fn jsonl_round_trip() {
        let rs = vec![rec("Hubble", Origin::Manual), rec("Skylab", Origin::Augmented)];
        let text = write_dataset(&rs);
        assert!(text.starts_with(r#"{"question":"What is Hubble?","program":[{"function":"Find""#));
        assert_eq!(read_dataset(&text).unwrap(), rs);
        assert!(matches!(read_dataset("\n{}"), Err(AugmentError::Dataset { line: 2, .. })));
    }
}
