use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

/// Value kind of an attribute key. Each key has exactly one kind across the KB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    String,
    Quantity,
    Date,
    Year,
}

impl ValueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueKind::String => "string",
            ValueKind::Quantity => "quantity",
            ValueKind::Date => "date",
            ValueKind::Year => "year",
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An attribute value. Quantities keep their exact decimal representation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "WireValue", into = "WireValue")]
pub enum TypedValue {
    String(String),
    Quantity { value: Decimal, unit: Option<String> },
    Date(NaiveDate),
    Year(i32),
}

impl TypedValue {
    pub fn kind(&self) -> ValueKind {
        match self {
            TypedValue::String(_) => ValueKind::String,
            TypedValue::Quantity { .. } => ValueKind::Quantity,
            TypedValue::Date(_) => ValueKind::Date,
            TypedValue::Year(_) => ValueKind::Year,
        }
    }

    pub fn quantity(value: Decimal, unit: Option<&str>) -> Self {
        TypedValue::Quantity {
            value,
            unit: unit.map(str::to_owned),
        }
    }

    /// Year component for dates, the value itself for years.
    pub fn year(&self) -> Option<i32> {
        match self {
            TypedValue::Date(d) => Some(d.year()),
            TypedValue::Year(y) => Some(*y),
            _ => None,
        }
    }

    /// Orders two values of the same kind. Quantities compare by magnitude only;
    /// callers are responsible for unit agreement.
    pub fn cmp_same_kind(&self, other: &TypedValue) -> Option<Ordering> {
        match (self, other) {
            (TypedValue::String(a), TypedValue::String(b)) => Some(a.cmp(b)),
            (TypedValue::Quantity { value: a, .. }, TypedValue::Quantity { value: b, .. }) => {
                Some(a.cmp(b))
            }
            (TypedValue::Date(a), TypedValue::Date(b)) => Some(a.cmp(b)),
            (TypedValue::Year(a), TypedValue::Year(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }

    /// Literal text of the value as it would appear in a program input.
    pub fn literal(&self) -> String {
        match self {
            TypedValue::String(s) => s.clone(),
            TypedValue::Quantity { value, .. } => value.to_string(),
            TypedValue::Date(d) => d.format("%Y-%m-%d").to_string(),
            TypedValue::Year(y) => y.to_string(),
        }
    }
}

impl fmt::Display for TypedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypedValue::Quantity {
                value,
                unit: Some(unit),
            } => write!(f, "{value} {unit}"),
            other => f.write_str(&other.literal()),
        }
    }
}

/// JSON form: `{"type": ..., "value": ..., "unit": ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct WireValue {
    #[serde(rename = "type")]
    kind: ValueKind,
    value: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    unit: Option<String>,
}

impl TryFrom<WireValue> for TypedValue {
    type Error = String;

    fn try_from(w: WireValue) -> Result<Self, Self::Error> {
        if w.unit.is_some() && w.kind != ValueKind::Quantity {
            return Err(format!("unit is only allowed on quantity values, found on {}", w.kind));
        }
        let text = match &w.value {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(format!("value must be a string or number, got {other}")),
        };
        match w.kind {
            ValueKind::String => match w.value {
                serde_json::Value::String(s) => Ok(TypedValue::String(s)),
                _ => Err("string value must be a JSON string".into()),
            },
            ValueKind::Quantity => {
                let value = parse_decimal(&text)
                    .ok_or_else(|| format!("'{text}' is not a decimal number"))?;
                Ok(TypedValue::Quantity {
                    value,
                    unit: w.unit,
                })
            }
            ValueKind::Date => NaiveDate::parse_from_str(&text, "%Y-%m-%d")
                .map(TypedValue::Date)
                .map_err(|_| format!("'{text}' is not a YYYY-MM-DD calendar date")),
            ValueKind::Year => text
                .parse::<i32>()
                .map(TypedValue::Year)
                .map_err(|_| format!("'{text}' is not an integer year")),
        }
    }
}

impl From<TypedValue> for WireValue {
    fn from(v: TypedValue) -> Self {
        let kind = v.kind();
        match v {
            TypedValue::String(s) => WireValue {
                kind,
                value: s.into(),
                unit: None,
            },
            // Strings keep the decimal scale exactly ("0.30" stays "0.30").
            TypedValue::Quantity { value, unit } => WireValue {
                kind,
                value: value.to_string().into(),
                unit,
            },
            TypedValue::Date(d) => WireValue {
                kind,
                value: d.format("%Y-%m-%d").to_string().into(),
                unit: None,
            },
            TypedValue::Year(y) => WireValue {
                kind,
                value: y.into(),
                unit: None,
            },
        }
    }
}

/// Parses plain or exponent-form decimal text.
pub fn parse_decimal(text: &str) -> Option<Decimal> {
    let text = text.trim();
    Decimal::from_str(text)
        .or_else(|_| Decimal::from_scientific(text))
        .ok()
}
