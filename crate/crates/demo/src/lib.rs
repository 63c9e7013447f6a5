//! Browser bindings for the interactive demo page in `www/`.
//!
//! Every export returns a JSON string; failures come back as
//! `{"error": "..."}` so the page has a single decoding path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

use tsetlin_core::binarizer::{fit_thresholds, Binarizer, FeatureEncoder, ThresholdEncoder};
use tsetlin_core::data::generate_artificial;
use tsetlin_core::explain::explain_model;
use tsetlin_core::model::TrainSettings;
use tsetlin_core::{Model, StateTrace, TsetlinAutomaton};

fn respond<T: Serialize>(result: Result<T, String>) -> String {
    match result {
        Ok(v) => serde_json::to_string(&v).expect("plain data serializes"),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

#[derive(Serialize)]
struct Encoding {
    thresholds: Vec<f64>,
    rows: Vec<EncodedValue>,
    probe: Option<EncodedValue>,
}

#[derive(Serialize)]
struct EncodedValue {
    value: f64,
    bits: String,
}

fn parse_values(text: &str) -> Result<Vec<f64>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
        .collect()
}

/// Fit thresholds on a comma or whitespace separated list of values and
/// encode each value, plus an optional probe value.
#[wasm_bindgen]
pub fn encode_thresholds(values: &str, probe: Option<f64>) -> String {
    respond((|| {
        let column = parse_values(values)?;
        let thresholds = fit_thresholds("value", &column).map_err(|e| e.to_string())?;
        let encoder = FeatureEncoder::Thresholds(ThresholdEncoder { thresholds: thresholds.clone() });
        let b = Binarizer::new(vec!["value".into()], vec![encoder]).map_err(|e| e.to_string())?;
        let encode = |value: f64| -> Result<EncodedValue, String> {
            let bits = b.encode_row(&[value]).map_err(|e| e.to_string())?;
            Ok(EncodedValue { value, bits: bits.iter().map(|b| char::from(b'0' + b)).collect() })
        };
        Ok(Encoding {
            rows: column.iter().map(|&v| encode(v)).collect::<Result<_, _>>()?,
            probe: probe.filter(|p| p.is_finite()).map(encode).transpose()?,
            thresholds,
        })
    })())
}

#[derive(Serialize)]
struct Training {
    accuracy: f64,
    literals: Vec<String>,
    states_per_action: u32,
    /// `frames[epoch][clause][automaton]`, clauses numbered across classes.
    frames: Vec<Vec<Vec<u32>>>,
    clauses: Vec<ClauseView>,
    grid: Vec<Vec<usize>>,
}

#[derive(Serialize)]
struct ClauseView {
    class: usize,
    clause: usize,
    polarity: char,
    rule: String,
}

/// Train the two-integer task (class 1 iff `x1 + x2 == 9`) with 4 clauses,
/// returning the per-epoch automaton states, the learned rules and the
/// predicted class of every input cell.
#[wasm_bindgen]
pub fn train_artificial(seed: u64, samples: usize, epochs: usize, positive_fraction: f64) -> String {
    respond((|| {
        if !(0.0..=1.0).contains(&positive_fraction) {
            return Err(format!("positive fraction {positive_fraction} outside [0, 1]"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let train = generate_artificial(&mut rng, samples, Some(positive_fraction));
        let test = generate_artificial(&mut rng, 200, Some(positive_fraction));
        let settings = TrainSettings { epochs, ..TrainSettings::default() };
        let mut trace = StateTrace::new();
        let model = Model::train(&train, &settings, seed, Some(&mut trace)).map_err(|e| e.to_string())?;
        let predicted = model.predict_rows(&test.rows).map_err(|e| e.to_string())?;
        let correct = predicted.iter().zip(&test.labels).filter(|(p, y)| p == y).count();

        let (classes, per_class, automata) = trace.shape();
        let frames = trace
            .frames()
            .iter()
            .enumerate()
            .map(|(f, _)| {
                (0..classes * per_class)
                    .map(|j| (0..automata).map(|a| trace.state(f, j / per_class, j % per_class, a)).collect())
                    .collect()
            })
            .collect();
        let literals = (0..automata)
            .map(|a| {
                let (value, negated) = (a / 2, a % 2 == 1);
                let (name, v) = if value < 5 { ("x1", value) } else { ("x2", value - 5) };
                format!("{}{name}={v}", if negated { "¬" } else { "" })
            })
            .collect();
        let clauses = explain_model(&model)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|r| ClauseView { class: r.class, clause: r.clause, polarity: r.polarity, rule: r.text })
            .collect();
        let grid = (0..=4)
            .map(|x1| (0..=5).map(|x2| model.predict_row(&[f64::from(x1), f64::from(x2)]).unwrap_or(0)).collect())
            .collect();
        Ok(Training {
            accuracy: correct as f64 / test.len() as f64,
            literals,
            states_per_action: settings.states_per_action,
            frames,
            clauses,
            grid,
        })
    })())
}

/// Single automaton in a two-armed Bernoulli environment: each step the
/// chosen action is rewarded with its probability, penalized otherwise.
/// Returns the state after every step.
#[wasm_bindgen]
pub fn automaton_walk(states_per_action: u32, p_include: f64, p_exclude: f64, steps: usize, seed: u64) -> String {
    respond((|| {
        if states_per_action < 1 {
            return Err("states per action must be ≥ 1".into());
        }
        for p in [p_include, p_exclude] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("reward probability {p} outside [0, 1]"));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ta = TsetlinAutomaton::new(states_per_action);
        let mut path = Vec::with_capacity(steps + 1);
        path.push(ta.state());
        for _ in 0..steps {
            let p = if ta.is_included() { p_include } else { p_exclude };
            if rng.gen::<f64>() < p {
                ta.reward();
            } else {
                ta.penalize();
            }
            path.push(ta.state());
        }
        Ok(json!({ "states_per_action": states_per_action, "path": path }))
    })())
}
