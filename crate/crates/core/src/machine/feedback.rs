//! Type I / Type II feedback and the clause activation functions.

use rand::Rng;

use crate::automaton::Action;
use crate::clause::{literal_value, Clause, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeedbackType {
    /// Combats false negatives.
    TypeI,
    /// Combats false positives.
    TypeII,
}

/// Reward / inaction / penalty probabilities of one feedback-table cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellProbabilities {
    pub reward: f64,
    pub inaction: f64,
    pub penalty: f64,
}

impl CellProbabilities {
    const fn new(reward: f64, inaction: f64, penalty: f64) -> Self {
        Self { reward, inaction, penalty }
    }
}

/// Feedback table keyed on (feedback type, clause output, literal value,
/// current action). Returns `None` for the cells that cannot occur: an
/// included literal of value 0 inside a clause that outputs 1.
pub fn feedback_probabilities(
    kind: FeedbackType,
    clause_output: u8,
    literal: u8,
    action: Action,
    s: f64,
) -> Option<CellProbabilities> {
    let high = (s - 1.0) / s;
    let low = 1.0 / s;
    let cell = match (kind, clause_output, literal, action) {
        (_, 1, 0, Action::Include) => return None,
        (FeedbackType::TypeI, 1, 1, Action::Include) => CellProbabilities::new(high, low, 0.0),
        (FeedbackType::TypeI, 1, 1, Action::Exclude) => CellProbabilities::new(0.0, low, high),
        (FeedbackType::TypeI, 1, _, Action::Exclude) => CellProbabilities::new(low, high, 0.0),
        (FeedbackType::TypeI, _, _, Action::Include) => CellProbabilities::new(0.0, high, low),
        (FeedbackType::TypeI, _, _, Action::Exclude) => CellProbabilities::new(low, high, 0.0),
        (FeedbackType::TypeII, 1, 0, Action::Exclude) => CellProbabilities::new(0.0, 0.0, 1.0),
        (FeedbackType::TypeII, _, _, _) => CellProbabilities::new(0.0, 1.0, 0.0),
    };
    Some(cell)
}

#[inline]
pub fn clamp_sum(sum: i32, threshold: u32) -> i32 {
    let t = threshold as i32;
    sum.clamp(-t, t)
}

/// `(T - clamp(sum)) / 2T`
#[inline]
pub fn type_i_activation_prob(sum: i32, threshold: u32) -> f64 {
    let t = threshold as i32;
    f64::from(t - clamp_sum(sum, threshold)) / f64::from(2 * t)
}

/// `(T + clamp(sum)) / 2T`
#[inline]
pub fn type_ii_activation_prob(sum: i32, threshold: u32) -> f64 {
    let t = threshold as i32;
    f64::from(t + clamp_sum(sum, threshold)) / f64::from(2 * t)
}

pub fn activation_prob(kind: FeedbackType, sum: i32, threshold: u32) -> f64 {
    match kind {
        FeedbackType::TypeI => type_i_activation_prob(sum, threshold),
        FeedbackType::TypeII => type_ii_activation_prob(sum, threshold),
    }
}

/// Feedback type a clause receives given the bank's target output `y_hat`
/// and the clause polarity. Negative clauses vote for the other classes, so
/// the types swap with polarity.
pub fn dispatch(y_hat: bool, positive: bool) -> FeedbackType {
    if y_hat == positive {
        FeedbackType::TypeI
    } else {
        FeedbackType::TypeII
    }
}

/// Type I feedback: one uniform draw per automaton, compared against the
/// table cell for its (clause output, literal, action).
pub fn type_i_feedback<R: Rng + ?Sized>(clause: &mut Clause, x: &[u8], s: f64, rng: &mut R) {
    let output = clause.evaluate_unchecked(x, Mode::Learn);
    for (literal, ta) in clause.automata_mut().iter_mut().enumerate() {
        let u: f64 = rng.gen();
        let value = literal_value(x, literal);
        let Some(p) = feedback_probabilities(FeedbackType::TypeI, output, value, ta.action(), s) else {
            continue;
        };
        if u < p.reward {
            ta.reward();
        } else if u < p.reward + p.penalty {
            ta.penalize();
        }
    }
}

/// Type II feedback: when the clause outputs 1, every excluded literal of
/// value 0 is penalized toward inclusion. Deterministic.
pub fn type_ii_feedback(clause: &mut Clause, x: &[u8]) {
    if clause.evaluate_unchecked(x, Mode::Learn) == 0 {
        return;
    }
    for (literal, ta) in clause.automata_mut().iter_mut().enumerate() {
        if literal_value(x, literal) == 0 && ta.action() == Action::Exclude {
            ta.penalize();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::TsetlinAutomaton;
    use crate::clause::Polarity;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const S: f64 = 8.0;

    #[test]
    fn table_cells_sum_to_one() {
        for kind in [FeedbackType::TypeI, FeedbackType::TypeII] {
            for out in [0, 1] {
                for lit in [0, 1] {
                    for action in [Action::Include, Action::Exclude] {
                        if let Some(p) = feedback_probabilities(kind, out, lit, action, S) {
                            assert!((p.reward + p.inaction + p.penalty - 1.0).abs() < 1e-15);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn selected_table_cells() {
        let p = feedback_probabilities(FeedbackType::TypeI, 1, 1, Action::Include, S).unwrap();
        assert_eq!(p.reward, 7.0 / 8.0);
        let p = feedback_probabilities(FeedbackType::TypeI, 0, 1, Action::Include, S).unwrap();
        assert_eq!(p.penalty, 1.0 / 8.0);
        assert_eq!(p.reward, 0.0);
        let p = feedback_probabilities(FeedbackType::TypeII, 1, 0, Action::Exclude, S).unwrap();
        assert_eq!(p.penalty, 1.0);
        assert!(feedback_probabilities(FeedbackType::TypeI, 1, 0, Action::Include, S).is_none());
    }

    #[test]
    fn clamp_examples() {
        assert_eq!(clamp_sum(5, 1), 1);
        assert_eq!(clamp_sum(-9, 15), -9);
        assert_eq!(clamp_sum(-20, 15), -15);
    }

    #[test]
    fn activation_endpoints() {
        assert_eq!(type_i_activation_prob(15, 15), 0.0);
        assert_eq!(type_i_activation_prob(-15, 15), 1.0);
        assert_eq!(type_i_activation_prob(0, 15), 0.5);
        assert_eq!(type_ii_activation_prob(-15, 15), 0.0);
        assert_eq!(type_ii_activation_prob(15, 15), 1.0);
        assert_eq!(type_ii_activation_prob(0, 15), 0.5);
    }

    #[test]
    fn dispatch_swaps_with_polarity() {
        assert_eq!(dispatch(true, true), FeedbackType::TypeI);
        assert_eq!(dispatch(true, false), FeedbackType::TypeII);
        assert_eq!(dispatch(false, true), FeedbackType::TypeII);
        assert_eq!(dispatch(false, false), FeedbackType::TypeI);
    }

    #[test]
    fn type_ii_leaves_unit_literals_and_zero_outputs_alone() {
        // x_1 included, x = [1, 0]: clause = 1. Only ¬x_1 (value 0) and
        // x_2 (value 0) are penalized.
        let mut c = Clause::new(2, 100, 100, Polarity::Positive);
        c.automata_mut()[0] = TsetlinAutomaton::with_state(100, 150);
        let x = [1, 0];
        type_ii_feedback(&mut c, &x);
        let states: Vec<u32> = c.states().collect();
        assert_eq!(states, vec![150, 101, 101, 100]);

        // now x_2 is included and the clause outputs 0 on x: no change
        let before = c.clone();
        type_ii_feedback(&mut c, &x);
        assert_eq!(c, before);
    }

    #[test]
    fn type_i_on_false_negative_never_rewards_include() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut c = Clause::new(2, 100, 100, Polarity::Positive);
        c.automata_mut()[2] = TsetlinAutomaton::with_state(100, 150); // x_2
        let x = [1, 0]; // clause = 0
        for _ in 0..200 {
            let before = c.automata()[2].state();
            type_i_feedback(&mut c, &x, S, &mut rng);
            assert!(c.automata()[2].state() <= before);
            if !c.automata()[2].is_included() {
                break;
            }
        }
    }
}
