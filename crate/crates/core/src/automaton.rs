//! Two-action Tsetlin Automaton.
//!
//! States `1..=N` select [`Action::Exclude`], states `N+1..=2N` select
//! [`Action::Include`]. Rewards push the state deeper into the current half,
//! penalties push it toward the centre and across into the other half.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Exclude,
    Include,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TsetlinAutomaton {
    state: u32,
    states_per_action: u32,
}

impl TsetlinAutomaton {
    /// Automaton at the shallowest exclude state `N`.
    pub fn new(states_per_action: u32) -> Self {
        Self::with_state(states_per_action, states_per_action)
    }

    /// Automaton at an explicit state. `state` is clamped into `[1, 2N]`.
    pub fn with_state(states_per_action: u32, state: u32) -> Self {
        assert!(states_per_action >= 1, "states per action must be >= 1");
        let state = state.clamp(1, 2 * states_per_action);
        Self { state, states_per_action }
    }

    #[inline]
    pub fn state(&self) -> u32 {
        self.state
    }

    #[inline]
    pub fn states_per_action(&self) -> u32 {
        self.states_per_action
    }

    #[inline]
    pub fn action(&self) -> Action {
        if self.state <= self.states_per_action {
            Action::Exclude
        } else {
            Action::Include
        }
    }

    #[inline]
    pub fn is_included(&self) -> bool {
        self.action() == Action::Include
    }

    /// Reinforce the current action; saturates at `1` and `2N`.
    #[inline]
    pub fn reward(&mut self) {
        match self.action() {
            Action::Exclude => self.state = self.state.saturating_sub(1).max(1),
            Action::Include => self.state = (self.state + 1).min(2 * self.states_per_action),
        }
    }

    /// Weaken the current action by one step toward the other half.
    #[inline]
    pub fn penalize(&mut self) {
        match self.action() {
            Action::Exclude => self.state += 1,
            Action::Include => self.state -= 1,
        }
    }
}
