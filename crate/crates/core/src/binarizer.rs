//! Binarization of raw tabular features.
//!
//! Continuous features use threshold ("thermometer") encoding: every unique
//! value `v_w` seen during fitting becomes one bit meaning `value <= v_w`.
//! Categorical features are one-hot encoded over their ordered vocabulary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous,
    Categorical,
}

/// Sorted unique values of a column. Values are kept verbatim, so every
/// fitted value hits its own threshold exactly.
pub fn fit_thresholds(name: &str, column: &[f64]) -> Result<Vec<f64>> {
    let mut values = column.to_vec();
    if values.is_empty() {
        return Err(Error::EmptyFeature(name.to_string()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Data(format!("feature `{name}` contains NaN")));
    }
    values.sort_by(f64::total_cmp);
    values.dedup_by(|a, b| a == b);
    Ok(values)
}

/// Keep `k` thresholds at evenly spaced ranks of the unique list. The largest
/// value is always kept so every training value sets at least one bit.
pub fn cap_thresholds(thresholds: &[f64], k: usize) -> Vec<f64> {
    let u = thresholds.len();
    if k == 0 || u <= k {
        return thresholds.to_vec();
    }
    if k == 1 {
        return vec![thresholds[u - 1]];
    }
    let mut out: Vec<f64> = (0..k).map(|i| thresholds[(i * (u - 1) + (k - 1) / 2) / (k - 1)]).collect();
    out.dedup();
    out
}

/// Bit `w` is 1 iff `value <= thresholds[w]`.
#[inline]
pub fn encode_continuous(value: f64, thresholds: &[f64], out: &mut Vec<u8>) {
    out.extend(thresholds.iter().map(|&t| u8::from(value <= t)));
}

pub fn encode_categorical(feature: &str, value: f64, categories: &[f64], out: &mut Vec<u8>) -> Result<()> {
    let idx = categories
        .iter()
        .position(|&c| c == value)
        .ok_or_else(|| Error::UnseenCategory { feature: feature.to_string(), value })?;
    out.extend((0..categories.len()).map(|i| u8::from(i == idx)));
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEncoder {
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneHotEncoder {
    pub categories: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureEncoder {
    Thresholds(ThresholdEncoder),
    OneHot(OneHotEncoder),
}

impl FeatureEncoder {
    pub fn width(&self) -> usize {
        match self {
            FeatureEncoder::Thresholds(e) => e.thresholds.len(),
            FeatureEncoder::OneHot(e) => e.categories.len(),
        }
    }

    pub fn kind(&self) -> FeatureKind {
        match self {
            FeatureEncoder::Thresholds(_) => FeatureKind::Continuous,
            FeatureEncoder::OneHot(_) => FeatureKind::Categorical,
        }
    }
}

/// What a single input bit asserts about its raw feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BitMeaning {
    /// `feature <= threshold`
    AtMost(f64),
    /// `feature == category`
    Equals(f64),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitOptions {
    /// Cap on thresholds per continuous feature. `None` keeps one threshold
    /// per unique value.
    pub max_thresholds: Option<usize>,
}

/// Declared feature layout used to fit a [`Binarizer`].
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub names: Vec<String>,
    pub kinds: Vec<FeatureKind>,
}

impl Schema {
    pub fn continuous(names: Vec<String>) -> Self {
        let kinds = vec![FeatureKind::Continuous; names.len()];
        Self { names, kinds }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Row encoder: concatenates per-feature encodings in declared order.
/// Immutable once fitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binarizer {
    names: Vec<String>,
    encoders: Vec<FeatureEncoder>,
}

impl Binarizer {
    pub fn new(names: Vec<String>, encoders: Vec<FeatureEncoder>) -> Result<Self> {
        if names.len() != encoders.len() {
            return Err(Error::Arity { expected: names.len(), actual: encoders.len() });
        }
        for (name, enc) in names.iter().zip(&encoders) {
            let list = match enc {
                FeatureEncoder::Thresholds(e) => &e.thresholds,
                FeatureEncoder::OneHot(e) => &e.categories,
            };
            if list.is_empty() {
                return Err(Error::EmptyFeature(name.clone()));
            }
            if let FeatureEncoder::Thresholds(e) = enc {
                if e.thresholds.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
                    return Err(Error::Config(format!("thresholds of `{name}` are not strictly ascending")));
                }
            }
        }
        Ok(Self { names, encoders })
    }

    pub fn fit(schema: &Schema, rows: &[Vec<f64>], options: &FitOptions) -> Result<Self> {
        Self::fit_with_vocabulary(schema, rows, rows, options)
    }

    /// Fit thresholds on `rows` but take categorical vocabularies from
    /// `vocabulary_rows`. Cross-validation uses this so a test fold never
    /// holds a category the training fold happened to miss.
    pub fn fit_with_vocabulary(
        schema: &Schema,
        rows: &[Vec<f64>],
        vocabulary_rows: &[Vec<f64>],
        options: &FitOptions,
    ) -> Result<Self> {
        for row in rows.iter().chain(vocabulary_rows) {
            if row.len() != schema.len() {
                return Err(Error::Arity { expected: schema.len(), actual: row.len() });
            }
        }
        let mut encoders = Vec::with_capacity(schema.len());
        for (f, (name, kind)) in schema.names.iter().zip(&schema.kinds).enumerate() {
            let enc = match kind {
                FeatureKind::Continuous => {
                    let column: Vec<f64> = rows.iter().map(|r| r[f]).collect();
                    let mut thresholds = fit_thresholds(name, &column)?;
                    if let Some(k) = options.max_thresholds {
                        thresholds = cap_thresholds(&thresholds, k);
                    }
                    FeatureEncoder::Thresholds(ThresholdEncoder { thresholds })
                }
                FeatureKind::Categorical => {
                    let column: Vec<f64> = vocabulary_rows.iter().map(|r| r[f]).collect();
                    let categories = fit_thresholds(name, &column)?;
                    FeatureEncoder::OneHot(OneHotEncoder { categories })
                }
            };
            encoders.push(enc);
        }
        Self::new(schema.names.clone(), encoders)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn encoders(&self) -> &[FeatureEncoder] {
        &self.encoders
    }

    pub fn arity(&self) -> usize {
        self.encoders.len()
    }

    /// Total number of output bits `n`.
    pub fn width(&self) -> usize {
        self.encoders.iter().map(FeatureEncoder::width).sum()
    }

    /// Bit offset of each feature block.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.encoders
            .iter()
            .map(|e| {
                let start = acc;
                acc += e.width();
                start
            })
            .collect()
    }

    /// Feature index and meaning of input bit `bit`.
    pub fn bit_meaning(&self, bit: usize) -> Option<(usize, BitMeaning)> {
        let mut start = 0;
        for (f, enc) in self.encoders.iter().enumerate() {
            let w = enc.width();
            if bit < start + w {
                let local = bit - start;
                let meaning = match enc {
                    FeatureEncoder::Thresholds(e) => BitMeaning::AtMost(e.thresholds[local]),
                    FeatureEncoder::OneHot(e) => BitMeaning::Equals(e.categories[local]),
                };
                return Some((f, meaning));
            }
            start += w;
        }
        None
    }

    pub fn encode_row(&self, row: &[f64]) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(self.width());
        self.encode_row_into(row, &mut out)?;
        Ok(out)
    }

    pub fn encode_row_into(&self, row: &[f64], out: &mut Vec<u8>) -> Result<()> {
        if row.len() != self.arity() {
            return Err(Error::Arity { expected: self.arity(), actual: row.len() });
        }
        for ((name, enc), &value) in self.names.iter().zip(&self.encoders).zip(row) {
            match enc {
                FeatureEncoder::Thresholds(e) => encode_continuous(value, &e.thresholds, out),
                FeatureEncoder::OneHot(e) => encode_categorical(name, value, &e.categories, out)?,
            }
        }
        Ok(())
    }

    pub fn encode_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<u8>>> {
        rows.iter().map(|r| self.encode_row(r)).collect()
    }
}
