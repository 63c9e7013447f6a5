use std::io::Write;

use super::TsetlinMachine;
use crate::automaton::Action;

/// Automaton states of a whole machine at the end of one epoch, laid out
/// class-major, then clause, then automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceFrame {
    pub epoch: usize,
    pub states: Vec<u32>,
}

/// Per-epoch record of every automaton state, the data behind
/// state-versus-epoch plots.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StateTrace {
    classes: usize,
    clauses_per_class: usize,
    automata_per_clause: usize,
    states_per_action: u32,
    frames: Vec<TraceFrame>,
}

impl StateTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[TraceFrame] {
        &self.frames
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.classes, self.clauses_per_class, self.automata_per_clause)
    }

    pub(crate) fn record(&mut self, epoch: usize, machine: &TsetlinMachine) {
        let cfg = machine.config();
        self.classes = cfg.classes;
        self.clauses_per_class = cfg.clauses_per_class;
        self.automata_per_clause = 2 * cfg.inputs;
        self.states_per_action = cfg.states_per_action;
        let states = machine.banks().iter().flat_map(|b| b.clauses()).flat_map(|c| c.states()).collect();
        self.frames.push(TraceFrame { epoch, states });
    }

    /// State of one automaton in one frame.
    pub fn state(&self, frame: usize, class: usize, clause: usize, automaton: usize) -> u32 {
        let idx = (class * self.clauses_per_class + clause) * self.automata_per_clause + automaton;
        self.frames[frame].states[idx]
    }

    /// Long-format table: `epoch,class,clause,automaton,literal,state,action`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "epoch,class,clause,automaton,literal,state,action")?;
        for (f, frame) in self.frames.iter().enumerate() {
            for class in 0..self.classes {
                for clause in 0..self.clauses_per_class {
                    for ta in 0..self.automata_per_clause {
                        let k = ta / 2 + 1;
                        let literal = if ta % 2 == 0 { format!("x{k}") } else { format!("!x{k}") };
                        let state = self.state(f, class, clause, ta);
                        let action = if state <= self.states_per_action { Action::Exclude } else { Action::Include };
                        let action = match action {
                            Action::Exclude => "exclude",
                            Action::Include => "include",
                        };
                        writeln!(out, "{},{},{},{},{},{},{}", frame.epoch, class, clause, ta, literal, state, action)?;
                    }
                }
            }
        }
        Ok(())
    }
}
