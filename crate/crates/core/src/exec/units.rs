use std::collections::BTreeMap;

use rust_decimal::Decimal;

/// Unit conversion factors. The default table is empty: only identical units
/// compare.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnitTable {
    factors: BTreeMap<(String, String), Decimal>,
}

impl UnitTable {
    pub fn strict() -> Self {
        Self::default()
    }

    /// Adds `1 from = factor to` and its inverse.
    pub fn with_factor(mut self, from: &str, to: &str, factor: Decimal) -> Self {
        self.factors.insert((from.to_owned(), to.to_owned()), factor);
        if !factor.is_zero() {
            self.factors.insert((to.to_owned(), from.to_owned()), Decimal::ONE / factor);
        }
        self
    }

    pub fn convert(&self, value: Decimal, from: &str, to: &str) -> Option<Decimal> {
        if from == to {
            return Some(value);
        }
        self.factors
            .get(&(from.to_owned(), to.to_owned()))
            .map(|f| (value * f).normalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_and_table() {
        let t = UnitTable::strict();
        assert_eq!(t.convert(Decimal::ONE, "kg", "kg"), Some(Decimal::ONE));
        assert_eq!(t.convert(Decimal::ONE, "kg", "t"), None);
        let t = t.with_factor("cm", "m", Decimal::new(1, 2));
        assert_eq!(t.convert(Decimal::new(30, 0), "cm", "m"), Some(Decimal::new(3, 1)));
        assert_eq!(t.convert(Decimal::new(3, 1), "m", "cm"), Some(Decimal::new(30, 0)));
    }
}
