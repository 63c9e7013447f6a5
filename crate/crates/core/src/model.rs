//! A fitted binarizer plus a trained machine, and its text document format.
//!
//! The document is line oriented and round-trips bit-exactly: reals are
//! written in shortest round-trip form and automaton states as integers.
//!
//! ```text
//! tsetlin-model 1
//! inputs 11
//! classes 2
//! clauses 2
//! states 100
//! threshold 1
//! precision 8
//! seed 42
//! init-state 100
//! negative-sampling single
//! training sequential
//! features 2
//! feature categorical x1 5 0 1 2 3 4
//! feature categorical x2 6 0 1 2 3 4 5
//! bank 0
//! clause + 100 99 ... (2n states)
//! clause - ...
//! bank 1
//! ...
//! end
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::binarizer::{Binarizer, FeatureEncoder, FitOptions, OneHotEncoder, ThresholdEncoder};
use crate::clause::{Clause, Polarity};
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::machine::{ClauseBank, MachineConfig, NegativeSampling, StateTrace, TrainingMode, TsetlinMachine};

const MAGIC: &str = "tsetlin-model";
const VERSION: u32 = 1;

/// Hyperparameters for training a model from raw rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSettings {
    pub classes: usize,
    pub clauses_per_class: usize,
    pub states_per_action: u32,
    pub threshold: u32,
    pub precision: f64,
    pub epochs: usize,
    pub init_state: Option<u32>,
    pub negative_sampling: NegativeSampling,
    pub mode: TrainingMode,
    pub fit_options: FitOptions,
    /// Class treated as positive by the metrics.
    pub positive_class: usize,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            classes: 2,
            clauses_per_class: 2,
            states_per_action: 100,
            threshold: 1,
            precision: 8.0,
            epochs: 50,
            init_state: None,
            negative_sampling: NegativeSampling::SingleRandom,
            mode: TrainingMode::Sequential,
            fit_options: FitOptions::default(),
            positive_class: 1,
        }
    }
}

impl TrainSettings {
    pub fn machine_config(&self, inputs: usize, seed: u64) -> MachineConfig {
        MachineConfig {
            inputs,
            classes: self.classes,
            clauses_per_class: self.clauses_per_class,
            states_per_action: self.states_per_action,
            threshold: self.threshold,
            precision: self.precision,
            seed,
            init_state: self.init_state,
            negative_sampling: self.negative_sampling,
            mode: self.mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub binarizer: Binarizer,
    pub machine: TsetlinMachine,
}

impl Model {
    pub fn new(binarizer: Binarizer, machine: TsetlinMachine) -> Result<Self> {
        if binarizer.width() != machine.config().inputs {
            return Err(Error::Arity { expected: machine.config().inputs, actual: binarizer.width() });
        }
        Ok(Self { binarizer, machine })
    }

    /// Fit a binarizer on `data` and train a fresh machine seeded by `seed`.
    pub fn train(
        data: &LabeledDataset,
        settings: &TrainSettings,
        seed: u64,
        trace: Option<&mut StateTrace>,
    ) -> Result<Self> {
        Self::train_with_vocabulary(data, &data.rows, settings, seed, trace)
    }

    /// As [`Model::train`], with categorical vocabularies taken from
    /// `vocabulary_rows`.
    pub fn train_with_vocabulary(
        data: &LabeledDataset,
        vocabulary_rows: &[Vec<f64>],
        settings: &TrainSettings,
        seed: u64,
        trace: Option<&mut StateTrace>,
    ) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        settings.machine_config(1, seed).validate()?;
        let binarizer =
            Binarizer::fit_with_vocabulary(&data.schema(), &data.rows, vocabulary_rows, &settings.fit_options)?;
        let xs = binarizer.encode_rows(&data.rows)?;
        let mut machine = TsetlinMachine::new(settings.machine_config(binarizer.width(), seed))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        machine.fit(&xs, &data.labels, settings.epochs, &mut rng, trace)?;
        Ok(Self { binarizer, machine })
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<usize> {
        self.machine.predict(&self.binarizer.encode_row(row)?)
    }

    pub fn predict_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<usize>> {
        rows.iter().map(|r| self.predict_row(r)).collect()
    }

    pub fn to_document(&self) -> String {
        let cfg = self.machine.config();
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC} {VERSION}");
        let _ = writeln!(out, "inputs {}", cfg.inputs);
        let _ = writeln!(out, "classes {}", cfg.classes);
        let _ = writeln!(out, "clauses {}", cfg.clauses_per_class);
        let _ = writeln!(out, "states {}", cfg.states_per_action);
        let _ = writeln!(out, "threshold {}", cfg.threshold);
        let _ = writeln!(out, "precision {}", cfg.precision);
        let _ = writeln!(out, "seed {}", cfg.seed);
        let _ = writeln!(out, "init-state {}", cfg.initial_state());
        let sampling = match cfg.negative_sampling {
            NegativeSampling::SingleRandom => "single",
            NegativeSampling::AllOthers => "all",
        };
        let _ = writeln!(out, "negative-sampling {sampling}");
        let mode = match cfg.mode {
            TrainingMode::Sequential => "sequential",
            TrainingMode::Parallel => "parallel",
        };
        let _ = writeln!(out, "training {mode}");
        let _ = writeln!(out, "features {}", self.binarizer.arity());
        for (name, enc) in self.binarizer.names().iter().zip(self.binarizer.encoders()) {
            let (kind, values) = match enc {
                FeatureEncoder::Thresholds(e) => ("continuous", &e.thresholds),
                FeatureEncoder::OneHot(e) => ("categorical", &e.categories),
            };
            let _ = write!(out, "feature {kind} {} {}", escape(name), values.len());
            for v in values {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        for (b, bank) in self.machine.banks().iter().enumerate() {
            let _ = writeln!(out, "bank {b}");
            for clause in bank.clauses() {
                let _ = write!(out, "clause {}", clause.polarity().symbol());
                for s in clause.states() {
                    let _ = write!(out, " {s}");
                }
                out.push('\n');
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_document(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);

        let (n, magic) = lines.next_line()?;
        let version: u32 = match magic.as_slice() {
            [m, v] if *m == MAGIC => parse(n, v)?,
            _ => return Err(bad(n, "not a tsetlin-model document")),
        };
        if version != VERSION {
            return Err(bad(n, format!("unsupported version {version}")));
        }
        let inputs: usize = lines.keyed("inputs")?;
        let classes: usize = lines.keyed("classes")?;
        let clauses: usize = lines.keyed("clauses")?;
        let states: u32 = lines.keyed("states")?;
        let threshold: u32 = lines.keyed("threshold")?;
        let precision: f64 = lines.keyed("precision")?;
        let seed: u64 = lines.keyed("seed")?;
        let init_state: u32 = lines.keyed("init-state")?;
        let (n, sampling) = lines.keyed_word("negative-sampling")?;
        let negative_sampling = match sampling.as_str() {
            "single" => NegativeSampling::SingleRandom,
            "all" => NegativeSampling::AllOthers,
            other => return Err(bad(n, format!("unknown negative sampling `{other}`"))),
        };
        let (n, training) = lines.keyed_word("training")?;
        let mode = match training.as_str() {
            "sequential" => TrainingMode::Sequential,
            "parallel" => TrainingMode::Parallel,
            other => return Err(bad(n, format!("unknown training mode `{other}`"))),
        };
        let config = MachineConfig {
            inputs,
            classes,
            clauses_per_class: clauses,
            states_per_action: states,
            threshold,
            precision,
            seed,
            init_state: (init_state != states).then_some(init_state),
            negative_sampling,
            mode,
        };
        config.validate().map_err(|e| bad(n, e.to_string()))?;

        let feature_count: usize = lines.keyed("features")?;
        let mut names = Vec::with_capacity(feature_count);
        let mut encoders = Vec::with_capacity(feature_count);
        for _ in 0..feature_count {
            let (n, tokens) = lines.next_line()?;
            let [tag, kind, name, count, values @ ..] = tokens.as_slice() else {
                return Err(bad(n, "malformed feature line"));
            };
            if tag != "feature" {
                return Err(bad(n, format!("expected `feature`, found `{tag}`")));
            }
            let count: usize = parse(n, count)?;
            if values.len() != count {
                return Err(bad(n, format!("expected {count} values, found {}", values.len())));
            }
            let values = values.iter().map(|v| parse(n, v)).collect::<Result<Vec<f64>>>()?;
            let enc = match kind.as_str() {
                "continuous" => FeatureEncoder::Thresholds(ThresholdEncoder { thresholds: values }),
                "categorical" => FeatureEncoder::OneHot(OneHotEncoder { categories: values }),
                other => return Err(bad(n, format!("unknown feature kind `{other}`"))),
            };
            names.push(unescape(name));
            encoders.push(enc);
        }
        let binarizer = Binarizer::new(names, encoders).map_err(|e| bad(lines.line, e.to_string()))?;

        let mut banks = Vec::with_capacity(classes);
        for b in 0..classes {
            let idx: usize = lines.keyed("bank")?;
            if idx != b {
                return Err(bad(lines.line, format!("expected bank {b}, found {idx}")));
            }
            let mut bank = Vec::with_capacity(clauses);
            for j in 0..clauses {
                let (n, tokens) = lines.next_line()?;
                let [tag, sign, states_tokens @ ..] = tokens.as_slice() else {
                    return Err(bad(n, "malformed clause line"));
                };
                if tag != "clause" {
                    return Err(bad(n, format!("expected `clause`, found `{tag}`")));
                }
                let polarity = match sign.as_str() {
                    "+" => Polarity::Positive,
                    "-" => Polarity::Negative,
                    other => return Err(bad(n, format!("unknown polarity `{other}`"))),
                };
                if polarity != Polarity::for_index(j) {
                    return Err(bad(n, format!("clause {j} must have polarity {}", Polarity::for_index(j).symbol())));
                }
                if states_tokens.len() != 2 * inputs {
                    return Err(bad(n, format!("expected {} states, found {}", 2 * inputs, states_tokens.len())));
                }
                let values = states_tokens.iter().map(|t| parse(n, t)).collect::<Result<Vec<u32>>>()?;
                bank.push(Clause::from_states(&values, states, polarity).map_err(|e| bad(n, e.to_string()))?);
            }
            banks.push(ClauseBank::new(bank));
        }
        let (n, end) = lines.next_line()?;
        if end.as_slice() != ["end"] {
            return Err(bad(n, "expected `end`"));
        }

        let machine = TsetlinMachine::from_banks(config, banks).map_err(|e| bad(n, e.to_string()))?;
        Model::new(binarizer, machine).map_err(|e| bad(n, e.to_string()))
    }
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::Model { line, message: message.into() }
}

fn parse<T: FromStr>(line: usize, token: &str) -> Result<T> {
    token.parse().map_err(|_| bad(line, format!("cannot parse `{token}`")))
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { iter: text.lines().enumerate(), line: 0 }
    }

    /// Next non-blank line as whitespace-separated tokens.
    fn next_line(&mut self) -> Result<(usize, Vec<String>)> {
        for (i, raw) in self.iter.by_ref() {
            self.line = i + 1;
            let tokens: Vec<String> = raw.split_whitespace().map(str::to_string).collect();
            if !tokens.is_empty() {
                return Ok((self.line, tokens));
            }
        }
        Err(bad(self.line + 1, "unexpected end of document"))
    }

    fn keyed_word(&mut self, key: &str) -> Result<(usize, String)> {
        let (n, tokens) = self.next_line()?;
        match tokens.as_slice() {
            [k, v] if k == key => Ok((n, v.clone())),
            _ => Err(bad(n, format!("expected `{key} <value>`"))),
        }
    }

    fn keyed<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let (n, v) = self.keyed_word(key)?;
        parse(n, &v)
    }
}

/// Percent-escape whitespace so names stay single tokens.
fn escape(name: &str) -> String {
    if name.is_empty() {
        return "%".into();
    }
    let mut out = String::with_capacity(name.len());
    for ch in name.chars() {
        if ch == '%' || ch.is_whitespace() {
            let mut buf = [0u8; 4];
            for b in ch.encode_utf8(&mut buf).bytes() {
                let _ = write!(out, "%{b:02X}");
            }
        } else {
            out.push(ch);
        }
    }
    out
}

fn unescape(token: &str) -> String {
    if token == "%" {
        return String::new();
    }
    let bytes = token.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%'
            && i + 2 < bytes.len()
            && bytes[i + 1].is_ascii_hexdigit()
            && bytes[i + 2].is_ascii_hexdigit()
        {
            let hex = std::str::from_utf8(&bytes[i + 1..i + 3]).expect("ascii");
            out.push(u8::from_str_radix(hex, 16).expect("hex digits"));
            i += 3;
            continue;
        }
        out.push(bytes[i]);
        i += 1;
    }
    String::from_utf8_lossy(&out).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_artificial;
    use proptest::prelude::*;

    fn trained() -> Model {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data = generate_artificial(&mut rng, 300, Some(1.0 / 9.0));
        let settings = TrainSettings { epochs: 5, ..TrainSettings::default() };
        Model::train(&data, &settings, 17, None).unwrap()
    }

    #[test]
    fn document_round_trip() {
        let model = trained();
        let doc = model.to_document();
        let back = Model::from_document(&doc).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_document(), doc);
        assert!(doc.starts_with("tsetlin-model 1\ninputs 11\nclasses 2\nclauses 2\n"));
    }

    #[test]
    fn corrupt_documents() {
        let doc = trained().to_document();
        assert!(Model::from_document("hello").is_err());
        let truncated: String = doc.lines().take(20).collect::<Vec<_>>().join("\n");
        assert!(matches!(Model::from_document(&truncated), Err(Error::Model { .. })));
        let bad_state = doc.replacen("clause + ", "clause + 999 ", 1);
        assert!(Model::from_document(&bad_state).is_err());
        let swapped = doc.replacen("clause +", "clause -", 1);
        assert!(Model::from_document(&swapped).is_err());
        let odd = doc.replacen("clauses 2", "clauses 3", 1);
        assert!(Model::from_document(&odd).unwrap_err().to_string().contains("even"));
    }

    #[test]
    fn escaping() {
        for name in ["plain", "two words", "tab\there", "100%", "", "é x"] {
            assert_eq!(unescape(&escape(name)), name);
            assert!(!escape(name).contains(char::is_whitespace));
        }
    }

    proptest! {
        #[test]
        fn thresholds_survive_text(values in proptest::collection::btree_set(any::<i64>(), 1..20), exp in -300i32..280, mantissa in 1f64..10.0) {
            let scale = mantissa * 10f64.powi(exp);
            let thresholds: Vec<f64> = {
                let mut v: Vec<f64> = values.iter().map(|&i| i as f64 * scale).filter(|v| v.is_finite()).collect();
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            };
            prop_assume!(!thresholds.is_empty());
            let binarizer = Binarizer::new(
                vec!["f".into()],
                vec![FeatureEncoder::Thresholds(ThresholdEncoder { thresholds: thresholds.clone() })],
            ).unwrap();
            let machine = TsetlinMachine::new(MachineConfig::new(thresholds.len(), 2, 2)).unwrap();
            let model = Model::new(binarizer, machine).unwrap();
            let back = Model::from_document(&model.to_document()).unwrap();
            prop_assert_eq!(back, model);
        }
    }
}
