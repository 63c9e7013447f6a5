//! Conjunctive clauses built from a team of Tsetlin Automata.
//!
//! A clause over `n` input bits owns `2n` automata. Automaton `2k` decides
//! on literal `x_k`, automaton `2k + 1` on `¬x_k`. The clause is the
//! conjunction of every literal whose automaton currently includes it.

use serde::{Deserialize, Serialize};

use crate::automaton::TsetlinAutomaton;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    /// Polarity of the clause at 0-based position `index` in its bank.
    /// Odd 1-based positions (first, third, ...) are positive.
    pub fn for_index(index: usize) -> Self {
        if index.is_multiple_of(2) {
            Polarity::Positive
        } else {
            Polarity::Negative
        }
    }

    #[inline]
    pub fn sign(self) -> i32 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Polarity::Positive => '+',
            Polarity::Negative => '-',
        }
    }
}

/// Evaluation mode. Only matters for clauses that include no literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Empty clause outputs 1.
    Learn,
    /// Empty clause outputs 0.
    Classify,
}

/// Output of a clause with no included literal, by mode.
pub const fn empty_clause_output(mode: Mode) -> u8 {
    match mode {
        Mode::Learn => 1,
        Mode::Classify => 0,
    }
}

/// Value of literal `literal` on input `x`: `x_k` for even slots, `1 - x_k`
/// for odd ones.
#[inline]
pub fn literal_value(x: &[u8], literal: usize) -> u8 {
    let bit = x[literal / 2];
    if literal.is_multiple_of(2) {
        bit
    } else {
        1 - bit
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    tas: Vec<TsetlinAutomaton>,
    polarity: Polarity,
}

impl Clause {
    pub fn new(inputs: usize, states_per_action: u32, init_state: u32, polarity: Polarity) -> Self {
        let ta = TsetlinAutomaton::with_state(states_per_action, init_state);
        Self { tas: vec![ta; 2 * inputs], polarity }
    }

    /// Rebuild a clause from raw automaton states.
    pub fn from_states(states: &[u32], states_per_action: u32, polarity: Polarity) -> Result<Self> {
        if !states.len().is_multiple_of(2) {
            return Err(Error::Config(format!("clause needs an even number of automata, got {}", states.len())));
        }
        if let Some(&bad) = states.iter().find(|&&s| s < 1 || s > 2 * states_per_action) {
            return Err(Error::Config(format!("automaton state {bad} outside [1, {}]", 2 * states_per_action)));
        }
        let tas = states.iter().map(|&s| TsetlinAutomaton::with_state(states_per_action, s)).collect();
        Ok(Self { tas, polarity })
    }

    pub fn inputs(&self) -> usize {
        self.tas.len() / 2
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn automata(&self) -> &[TsetlinAutomaton] {
        &self.tas
    }

    pub fn automata_mut(&mut self) -> &mut [TsetlinAutomaton] {
        &mut self.tas
    }

    pub fn states(&self) -> impl Iterator<Item = u32> + '_ {
        self.tas.iter().map(TsetlinAutomaton::state)
    }

    /// Indices of included literals (`2k` for `x_k`, `2k + 1` for `¬x_k`).
    pub fn included(&self) -> impl Iterator<Item = usize> + '_ {
        self.tas.iter().enumerate().filter(|(_, ta)| ta.is_included()).map(|(i, _)| i)
    }

    pub fn is_empty(&self) -> bool {
        !self.tas.iter().any(TsetlinAutomaton::is_included)
    }

    pub fn evaluate(&self, x: &[u8], mode: Mode) -> Result<u8> {
        if x.len() != self.inputs() {
            return Err(Error::Arity { expected: self.inputs(), actual: x.len() });
        }
        Ok(self.evaluate_unchecked(x, mode))
    }

    /// [`Clause::evaluate`] without the length check.
    #[inline]
    pub fn evaluate_unchecked(&self, x: &[u8], mode: Mode) -> u8 {
        let mut any = false;
        for (k, pair) in self.tas.chunks_exact(2).enumerate() {
            let bit = x[k];
            if pair[0].is_included() {
                if bit == 0 {
                    return 0;
                }
                any = true;
            }
            if pair[1].is_included() {
                if bit == 1 {
                    return 0;
                }
                any = true;
            }
        }
        if any {
            1
        } else {
            empty_clause_output(mode)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Clause over 2 inputs including exactly `lits`.
    fn clause_with(inputs: usize, lits: &[usize]) -> Clause {
        let mut c = Clause::new(inputs, 100, 100, Polarity::Positive);
        for &l in lits {
            c.automata_mut()[l] = TsetlinAutomaton::with_state(100, 150);
        }
        c
    }

    #[test]
    fn literal_values() {
        let x = [1, 0];
        assert_eq!(literal_value(&x, 0), 1); // x_1
        assert_eq!(literal_value(&x, 1), 0); // ¬x_1
        assert_eq!(literal_value(&x, 3), 1); // ¬x_2
    }

    #[test]
    fn conjunction_of_included_literals() {
        let c = clause_with(2, &[0, 3]); // x_1 ∧ ¬x_2
        assert_eq!(c.evaluate(&[1, 0], Mode::Classify).unwrap(), 1);
        assert_eq!(c.evaluate(&[1, 1], Mode::Classify).unwrap(), 0);
        assert_eq!(c.evaluate(&[1, 1], Mode::Learn).unwrap(), 0);
    }

    #[test]
    fn empty_clause_depends_on_mode() {
        let c = clause_with(2, &[]);
        assert!(c.is_empty());
        for x in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert_eq!(c.evaluate(&x, Mode::Learn).unwrap(), 1);
            assert_eq!(c.evaluate(&x, Mode::Classify).unwrap(), 0);
        }
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let c = clause_with(2, &[0]);
        assert!(matches!(c.evaluate(&[1], Mode::Learn), Err(Error::Arity { expected: 2, actual: 1 })));
    }

    #[test]
    fn polarity_by_index() {
        assert_eq!(Polarity::for_index(0), Polarity::Positive);
        assert_eq!(Polarity::for_index(1), Polarity::Negative);
        assert_eq!(Polarity::for_index(2), Polarity::Positive);
    }

    #[test]
    fn from_states_validates() {
        assert!(Clause::from_states(&[1, 200], 100, Polarity::Negative).is_ok());
        assert!(Clause::from_states(&[0, 5], 100, Polarity::Negative).is_err());
        assert!(Clause::from_states(&[201, 5], 100, Polarity::Negative).is_err());
        assert!(Clause::from_states(&[5], 100, Polarity::Negative).is_err());
    }

    #[test]
    fn adding_a_literal_never_turns_output_on() {
        let base = clause_with(3, &[0]);
        for extra in 1..6 {
            let more = clause_with(3, &[0, extra]);
            for bits in 0..8u8 {
                let x = [bits & 1, (bits >> 1) & 1, (bits >> 2) & 1];
                let before = base.evaluate(&x, Mode::Classify).unwrap();
                let after = more.evaluate(&x, Mode::Classify).unwrap();
                assert!(after <= before);
            }
        }
    }
}
