//! Render trained clauses as readable propositional rules.
//!
//! Threshold literals become interval bounds on the raw feature (`x_w`
//! means `f <= t_w`, its negation `f > t_w`); the bounds of one feature are
//! merged into a single interval. One-hot literals become `f = c` or
//! `f ≠ c`.

use std::fmt;

use serde::Serialize;

use crate::binarizer::{Binarizer, BitMeaning};
use crate::clause::{Clause, Mode};
use crate::error::{Error, Result};
use crate::model::Model;

/// Constraint on one raw feature.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Condition {
    /// `lower < f <= upper`, either side optional.
    Interval {
        lower: Option<f64>,
        upper: Option<f64>,
    },
    Equals {
        value: f64,
    },
    NotIn {
        values: Vec<f64>,
    },
}

impl Condition {
    pub fn holds(&self, v: f64) -> bool {
        match self {
            Condition::Interval { lower, upper } => lower.is_none_or(|l| v > l) && upper.is_none_or(|u| v <= u),
            Condition::Equals { value } => v == *value,
            Condition::NotIn { values } => values.iter().all(|&c| v != c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureCondition {
    pub feature: usize,
    pub name: String,
    pub condition: Condition,
    /// The included literals of this feature admit no value.
    pub unsatisfiable: bool,
    /// Raw literal renderings, kept for contradiction reports.
    pub literals: Vec<String>,
}

impl fmt::Display for FeatureCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.unsatisfiable {
            return write!(f, "{}", self.literals.join(" ∧ "));
        }
        let name = &self.name;
        match &self.condition {
            Condition::Interval { lower: Some(l), upper: Some(u) } => write!(f, "{l} < {name} ≤ {u}"),
            Condition::Interval { lower: None, upper: Some(u) } => write!(f, "{name} ≤ {u}"),
            Condition::Interval { lower: Some(l), upper: None } => write!(f, "{name} > {l}"),
            Condition::Interval { lower: None, upper: None } => write!(f, "⊤"),
            Condition::Equals { value } => write!(f, "{name} = {value}"),
            Condition::NotIn { values } => {
                let parts: Vec<String> = values.iter().map(|v| format!("{name} ≠ {v}")).collect();
                write!(f, "{}", parts.join(" ∧ "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rule {
    /// No literal included: true while learning, false when classifying.
    Empty,
    Conjunction {
        conditions: Vec<FeatureCondition>,
    },
}

impl Rule {
    pub fn is_unsatisfiable(&self) -> bool {
        match self {
            Rule::Empty => false,
            Rule::Conjunction { conditions } => conditions.iter().any(|c| c.unsatisfiable),
        }
    }

    /// Truth value on a raw row with classification semantics.
    pub fn holds(&self, row: &[f64]) -> bool {
        match self {
            Rule::Empty => false,
            Rule::Conjunction { conditions } => {
                conditions.iter().all(|c| !c.unsatisfiable && c.condition.holds(row[c.feature]))
            }
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Empty => write!(f, "always-true (learning) / always-false (classification)"),
            Rule::Conjunction { conditions } => {
                let body: Vec<String> = conditions.iter().map(ToString::to_string).collect();
                if self.is_unsatisfiable() {
                    write!(f, "UNSATISFIABLE: {}", body.join(" ∧ "))
                } else {
                    write!(f, "{}", body.join(" ∧ "))
                }
            }
        }
    }
}

pub fn clause_to_rule(clause: &Clause, binarizer: &Binarizer) -> Result<Rule> {
    if clause.inputs() != binarizer.width() {
        return Err(Error::Arity { expected: binarizer.width(), actual: clause.inputs() });
    }
    // per feature: (upper bounds, lower bounds, equals, not-equals, literal text)
    #[derive(Default)]
    struct Acc {
        upper: Vec<f64>,
        lower: Vec<f64>,
        equals: Vec<f64>,
        not_equals: Vec<f64>,
        literals: Vec<String>,
        categorical: bool,
    }
    let mut acc: Vec<Acc> = (0..binarizer.arity()).map(|_| Acc::default()).collect();
    let mut any = false;
    for literal in clause.included() {
        any = true;
        let negated = literal % 2 == 1;
        let (f, meaning) = binarizer.bit_meaning(literal / 2).expect("width checked");
        let name = &binarizer.names()[f];
        let a = &mut acc[f];
        match (meaning, negated) {
            (BitMeaning::AtMost(t), false) => {
                a.upper.push(t);
                a.literals.push(format!("{name} ≤ {t}"));
            }
            (BitMeaning::AtMost(t), true) => {
                a.lower.push(t);
                a.literals.push(format!("{name} > {t}"));
            }
            (BitMeaning::Equals(c), false) => {
                a.categorical = true;
                a.equals.push(c);
                a.literals.push(format!("{name} = {c}"));
            }
            (BitMeaning::Equals(c), true) => {
                a.categorical = true;
                a.not_equals.push(c);
                a.literals.push(format!("{name} ≠ {c}"));
            }
        }
    }
    if !any {
        return Ok(Rule::Empty);
    }

    let mut conditions = Vec::new();
    for (f, a) in acc.into_iter().enumerate() {
        if a.literals.is_empty() {
            continue;
        }
        let name = binarizer.names()[f].clone();
        let (condition, unsatisfiable) = if a.categorical {
            match a.equals.as_slice() {
                [] => (Condition::NotIn { values: a.not_equals }, false),
                [c, rest @ ..] => {
                    let conflict = rest.iter().any(|r| r != c) || a.not_equals.contains(c);
                    (Condition::Equals { value: *c }, conflict)
                }
            }
        } else {
            let upper = a.upper.iter().copied().reduce(f64::min);
            let lower = a.lower.iter().copied().reduce(f64::max);
            let empty = matches!((lower, upper), (Some(l), Some(u)) if l >= u);
            (Condition::Interval { lower, upper }, empty)
        };
        conditions.push(FeatureCondition { feature: f, name, condition, unsatisfiable, literals: a.literals });
    }
    Ok(Rule::Conjunction { conditions })
}

/// Rule for one clause of a trained model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClauseRule {
    pub class: usize,
    pub clause: usize,
    pub polarity: char,
    pub rule: Rule,
    pub text: String,
}

pub fn explain_model(model: &Model) -> Result<Vec<ClauseRule>> {
    let mut out = Vec::new();
    for (class, bank) in model.machine.banks().iter().enumerate() {
        for (j, clause) in bank.clauses().iter().enumerate() {
            let rule = clause_to_rule(clause, &model.binarizer)?;
            out.push(ClauseRule {
                class,
                clause: j,
                polarity: clause.polarity().symbol(),
                text: rule.to_string(),
                rule,
            });
        }
    }
    Ok(out)
}

/// One line per clause: `class <c> clause <j> (<±>): <rule>`.
pub fn render_text(rules: &[ClauseRule]) -> String {
    rules.iter().map(|r| format!("class {} clause {} ({}): {}\n", r.class, r.clause, r.polarity, r.text)).collect()
}

pub fn render_json(rules: &[ClauseRule]) -> String {
    serde_json::to_string_pretty(rules).expect("rules serialize")
}

/// Does the rule agree with the clause's classification output on `row`?
pub fn agrees(rule: &Rule, clause: &Clause, binarizer: &Binarizer, row: &[f64]) -> Result<bool> {
    let x = binarizer.encode_row(row)?;
    Ok(rule.holds(row) == (clause.evaluate(&x, Mode::Classify)? == 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::TsetlinAutomaton;
    use crate::binarizer::{FeatureKind, FitOptions, Schema};
    use crate::clause::Polarity;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn include(c: &mut Clause, literals: &[usize]) {
        for &l in literals {
            c.automata_mut()[l] = TsetlinAutomaton::with_state(100, 101);
        }
    }

    fn table2() -> Binarizer {
        let rows: Vec<Vec<f64>> = [5.779, 10.008, 5.779, 3.834].iter().map(|&v| vec![v]).collect();
        Binarizer::fit(&Schema::continuous(vec!["f".into()]), &rows, &FitOptions::default()).unwrap()
    }

    fn table3() -> Binarizer {
        let schema = Schema { names: vec!["x1".into(), "x2".into()], kinds: vec![FeatureKind::Categorical; 2] };
        let rows: Vec<Vec<f64>> = (0..5).flat_map(|a| (0..6).map(move |b| vec![a as f64, b as f64])).collect();
        Binarizer::fit(&schema, &rows, &FitOptions::default()).unwrap()
    }

    #[test]
    fn interval_from_two_thresholds() {
        let enc = table2();
        let mut c = Clause::new(3, 100, 100, Polarity::Positive);
        // bit 1 is "≤ 5.779" (literal 2), ¬bit 0 is "> 3.834" (literal 1)
        include(&mut c, &[2, 1]);
        let rule = clause_to_rule(&c, &enc).unwrap();
        assert_eq!(rule.to_string(), "3.834 < f ≤ 5.779");
        assert!(rule.holds(&[5.0]));
        assert!(!rule.holds(&[3.834]));
    }

    #[test]
    fn one_hot_equality() {
        let enc = table3();
        let mut c = Clause::new(11, 100, 100, Polarity::Positive);
        include(&mut c, &[6]); // bit 3 = x1 is 3
        assert_eq!(clause_to_rule(&c, &enc).unwrap().to_string(), "x1 = 3");
        include(&mut c, &[2 * 10 + 1]); // ¬(x2 = 5)
        assert_eq!(clause_to_rule(&c, &enc).unwrap().to_string(), "x1 = 3 ∧ x2 ≠ 5");
    }

    #[test]
    fn empty_rule() {
        let c = Clause::new(3, 100, 100, Polarity::Positive);
        let rule = clause_to_rule(&c, &table2()).unwrap();
        assert_eq!(rule, Rule::Empty);
        assert_eq!(rule.to_string(), "always-true (learning) / always-false (classification)");
    }

    #[test]
    fn contradictions_are_flagged() {
        let enc = table2();
        let mut c = Clause::new(3, 100, 100, Polarity::Positive);
        include(&mut c, &[0, 5]); // f ≤ 3.834 ∧ f > 10.008
        let rule = clause_to_rule(&c, &enc).unwrap();
        assert!(rule.is_unsatisfiable());
        assert_eq!(rule.to_string(), "UNSATISFIABLE: f ≤ 3.834 ∧ f > 10.008");

        let enc = table3();
        let mut c = Clause::new(11, 100, 100, Polarity::Positive);
        include(&mut c, &[0, 2]); // x1 = 0 ∧ x1 = 1
        assert!(clause_to_rule(&c, &enc).unwrap().is_unsatisfiable());
        let mut c = Clause::new(11, 100, 100, Polarity::Positive);
        include(&mut c, &[0, 1]); // x1 = 0 ∧ x1 ≠ 0
        assert!(clause_to_rule(&c, &enc).unwrap().is_unsatisfiable());
    }

    #[test]
    fn width_mismatch() {
        let c = Clause::new(4, 100, 100, Polarity::Positive);
        assert!(clause_to_rule(&c, &table2()).is_err());
    }

    #[test]
    fn one_hot_rules_agree_on_every_cell() {
        let enc = table3();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let states: Vec<u32> = (0..22).map(|_| if rng.gen::<f64>() < 0.12 { 101 } else { 100 }).collect();
            let c = Clause::from_states(&states, 100, Polarity::Positive).unwrap();
            let rule = clause_to_rule(&c, &enc).unwrap();
            for a in 0..5 {
                for b in 0..6 {
                    assert!(agrees(&rule, &c, &enc, &[a as f64, b as f64]).unwrap(), "{rule}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn interval_simplification_is_sound(
            column in proptest::collection::vec(-100f64..100.0, 1..25),
            mask in proptest::collection::vec(0u8..6, 50),
            seed in any::<u64>(),
        ) {
            let rows: Vec<Vec<f64>> = column.iter().map(|&v| vec![v]).collect();
            let enc = Binarizer::fit(&Schema::continuous(vec!["f".into()]), &rows, &FitOptions::default()).unwrap();
            let n = enc.width();
            let states: Vec<u32> = (0..2 * n).map(|i| if mask[i % mask.len()] == 0 { 101 } else { 100 }).collect();
            let c = Clause::from_states(&states, 100, Polarity::Positive).unwrap();
            let rule = clause_to_rule(&c, &enc).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in 0..1000 {
                // mix exact thresholds with arbitrary probes
                let v = if i % 4 == 0 { column[i % column.len()] } else { rng.gen_range(-120.0..120.0) };
                prop_assert!(agrees(&rule, &c, &enc, &[v]).unwrap());
            }
        }
    }
}
