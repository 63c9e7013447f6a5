//! The multiclass Tsetlin Machine.
//!
//! One clause bank per class. A bank's vote sum is the number of firing
//! positive clauses minus the number of firing negative clauses; prediction
//! is the argmax over banks. Training plays the Type I / Type II feedback
//! game on the target bank (`ŷ = 1`) and on one or all non-target banks
//! (`ŷ = 0`).

pub mod feedback;
mod trace;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clause::{Clause, Mode, Polarity};
use crate::error::{Error, Result};

pub use feedback::{
    activation_prob, clamp_sum, dispatch, feedback_probabilities, type_i_activation_prob, type_i_feedback,
    type_ii_activation_prob, type_ii_feedback, CellProbabilities, FeedbackType,
};
pub use trace::{StateTrace, TraceFrame};

/// Which non-target banks receive `ŷ = 0` feedback for a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativeSampling {
    /// One uniformly random non-target bank.
    #[default]
    SingleRandom,
    /// Every non-target bank.
    AllOthers,
}

/// How clause updates inside a bank are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrainingMode {
    /// Clauses updated in order from the single run generator.
    #[default]
    Sequential,
    /// Clauses updated independently from per-clause generator streams
    /// derived from one draw of the run generator. Results differ from
    /// [`TrainingMode::Sequential`] but do not depend on the thread count.
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MachineConfig {
    /// Input bit width `n`.
    pub inputs: usize,
    /// Number of clause banks `q`. `1` gives a binary machine whose output
    /// is 1 iff its vote sum is positive.
    pub classes: usize,
    /// Clauses per bank `m`; even, half positive and half negative.
    pub clauses_per_class: usize,
    /// `N`, states per automaton action.
    pub states_per_action: u32,
    /// `T`, the vote target gating feedback activation.
    pub threshold: u32,
    /// `s`, precision of Type I feedback.
    pub precision: f64,
    pub seed: u64,
    /// Starting automaton state; `None` means `N`.
    pub init_state: Option<u32>,
    pub negative_sampling: NegativeSampling,
    pub mode: TrainingMode,
}

impl MachineConfig {
    pub fn new(inputs: usize, classes: usize, clauses_per_class: usize) -> Self {
        Self {
            inputs,
            classes,
            clauses_per_class,
            states_per_action: 100,
            threshold: 1,
            precision: 8.0,
            seed: 0,
            init_state: None,
            negative_sampling: NegativeSampling::SingleRandom,
            mode: TrainingMode::Sequential,
        }
    }

    pub fn states(mut self, n: u32) -> Self {
        self.states_per_action = n;
        self
    }

    pub fn threshold(mut self, t: u32) -> Self {
        self.threshold = t;
        self
    }

    pub fn precision(mut self, s: f64) -> Self {
        self.precision = s;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.clauses_per_class < 2 || !self.clauses_per_class.is_multiple_of(2) {
            return fail("clause count must be even and ≥ 2".into());
        }
        if self.classes < 1 {
            return fail("at least one class is required".into());
        }
        if self.inputs < 1 {
            return fail("at least one input bit is required".into());
        }
        if self.states_per_action < 1 {
            return fail("states per action must be ≥ 1".into());
        }
        if self.threshold < 1 {
            return fail("threshold T must be ≥ 1".into());
        }
        if self.precision.is_nan() || self.precision <= 1.0 || self.precision.is_infinite() {
            return fail(format!("precision s must be > 1, got {}", self.precision));
        }
        if let Some(init) = self.init_state {
            if init < 1 || init > 2 * self.states_per_action {
                return fail(format!("initial state {init} outside [1, {}]", 2 * self.states_per_action));
            }
        }
        Ok(())
    }

    pub fn initial_state(&self) -> u32 {
        self.init_state.unwrap_or(self.states_per_action)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseBank {
    clauses: Vec<Clause>,
}

impl ClauseBank {
    pub fn new(clauses: Vec<Clause>) -> Self {
        Self { clauses }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clauses_mut(&mut self) -> &mut [Clause] {
        &mut self.clauses
    }

    /// Positive votes minus negative votes.
    pub fn vote_sum(&self, x: &[u8], mode: Mode) -> i32 {
        self.clauses.iter().map(|c| c.polarity().sign() * i32::from(c.evaluate_unchecked(x, mode))).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsetlinMachine {
    config: MachineConfig,
    banks: Vec<ClauseBank>,
}

impl TsetlinMachine {
    pub fn new(config: MachineConfig) -> Result<Self> {
        config.validate()?;
        let init = config.initial_state();
        let banks = (0..config.classes)
            .map(|_| {
                ClauseBank::new(
                    (0..config.clauses_per_class)
                        .map(|j| Clause::new(config.inputs, config.states_per_action, init, Polarity::for_index(j)))
                        .collect(),
                )
            })
            .collect();
        Ok(Self { config, banks })
    }

    /// Assemble a machine from already-trained banks.
    pub fn from_banks(config: MachineConfig, banks: Vec<ClauseBank>) -> Result<Self> {
        config.validate()?;
        if banks.len() != config.classes {
            return Err(Error::Config(format!("expected {} clause banks, got {}", config.classes, banks.len())));
        }
        for bank in &banks {
            if bank.clauses.len() != config.clauses_per_class {
                return Err(Error::Config(format!(
                    "expected {} clauses per bank, got {}",
                    config.clauses_per_class,
                    bank.clauses.len()
                )));
            }
            for (j, c) in bank.clauses.iter().enumerate() {
                if c.inputs() != config.inputs {
                    return Err(Error::Arity { expected: config.inputs, actual: c.inputs() });
                }
                if c.polarity() != Polarity::for_index(j) {
                    return Err(Error::Config(format!("clause {j} has the wrong polarity")));
                }
                if c.automata().iter().any(|ta| ta.states_per_action() != config.states_per_action) {
                    return Err(Error::Config("automaton depth differs from the config".into()));
                }
            }
        }
        Ok(Self { config, banks })
    }

    pub fn config(&self) -> &MachineConfig {
        &self.config
    }

    pub fn banks(&self) -> &[ClauseBank] {
        &self.banks
    }

    pub fn banks_mut(&mut self) -> &mut [ClauseBank] {
        &mut self.banks
    }

    /// A generator seeded from the configured seed.
    pub fn seeded_rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.config.seed)
    }

    fn check_input(&self, x: &[u8]) -> Result<()> {
        if x.len() != self.config.inputs {
            return Err(Error::Arity { expected: self.config.inputs, actual: x.len() });
        }
        Ok(())
    }

    /// Classification-mode vote sum of every bank.
    pub fn votes(&self, x: &[u8]) -> Result<Vec<i32>> {
        self.check_input(x)?;
        Ok(self.banks.iter().map(|b| b.vote_sum(x, Mode::Classify)).collect())
    }

    /// Class index; ties go to the lowest index.
    pub fn predict(&self, x: &[u8]) -> Result<usize> {
        let votes = self.votes(x)?;
        if self.config.classes == 1 {
            return Ok(usize::from(votes[0] > 0));
        }
        Ok(argmax(&votes))
    }

    pub fn predict_batch(&self, xs: &[Vec<u8>]) -> Result<Vec<usize>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }

    pub fn accuracy(&self, xs: &[Vec<u8>], ys: &[usize]) -> Result<f64> {
        if xs.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let preds = self.predict_batch(xs)?;
        let hits = preds.iter().zip(ys).filter(|(p, y)| p == y).count();
        Ok(hits as f64 / xs.len() as f64)
    }

    fn label_limit(&self) -> usize {
        if self.config.classes == 1 {
            2
        } else {
            self.config.classes
        }
    }

    /// One feedback round for a single sample.
    pub fn train_sample<R: Rng + ?Sized>(&mut self, x: &[u8], label: usize, rng: &mut R) -> Result<()> {
        self.check_input(x)?;
        let q = self.config.classes;
        if label >= self.label_limit() {
            return Err(Error::LabelOutOfRange { label, classes: self.label_limit() });
        }
        if q == 1 {
            self.train_bank(0, x, label == 1, rng);
            return Ok(());
        }
        self.train_bank(label, x, true, rng);
        match self.config.negative_sampling {
            NegativeSampling::SingleRandom => {
                let mut other = rng.gen_range(0..q - 1);
                if other >= label {
                    other += 1;
                }
                self.train_bank(other, x, false, rng);
            }
            NegativeSampling::AllOthers => {
                for other in (0..q).filter(|&c| c != label) {
                    self.train_bank(other, x, false, rng);
                }
            }
        }
        Ok(())
    }

    /// Feedback to one bank. The clamped learn-mode vote sum is taken once,
    /// before any clause changes.
    fn train_bank<R: Rng + ?Sized>(&mut self, class: usize, x: &[u8], y_hat: bool, rng: &mut R) {
        let t = self.config.threshold;
        let s = self.config.precision;
        let bank = &mut self.banks[class];
        let sum = clamp_sum(bank.vote_sum(x, Mode::Learn), t);
        let p_type_i = type_i_activation_prob(sum, t);
        let p_type_ii = type_ii_activation_prob(sum, t);

        match self.config.mode {
            TrainingMode::Sequential => {
                for clause in &mut bank.clauses {
                    update_clause(clause, x, y_hat, p_type_i, p_type_ii, s, rng);
                }
            }
            TrainingMode::Parallel => {
                let base = rng.next_u64();
                let run = |(j, clause): (usize, &mut Clause)| {
                    let mut stream = ChaCha8Rng::seed_from_u64(base);
                    stream.set_stream(j as u64);
                    update_clause(clause, x, y_hat, p_type_i, p_type_ii, s, &mut stream);
                };
                #[cfg(feature = "parallel")]
                {
                    use rayon::prelude::*;
                    bank.clauses.par_iter_mut().enumerate().for_each(run);
                }
                #[cfg(not(feature = "parallel"))]
                bank.clauses.iter_mut().enumerate().for_each(run);
            }
        }
    }

    /// Train for `epochs` passes over `(xs, ys)`, shuffling sample order each
    /// epoch. With `trace`, every automaton state is recorded after each
    /// epoch.
    pub fn fit<R: Rng + ?Sized>(
        &mut self,
        xs: &[Vec<u8>],
        ys: &[usize],
        epochs: usize,
        rng: &mut R,
        mut trace: Option<&mut StateTrace>,
    ) -> Result<()> {
        if xs.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if epochs == 0 {
            return Err(Error::Config("epochs must be ≥ 1".into()));
        }
        if xs.len() != ys.len() {
            return Err(Error::Arity { expected: xs.len(), actual: ys.len() });
        }
        for (x, &y) in xs.iter().zip(ys) {
            self.check_input(x)?;
            if y >= self.label_limit() {
                return Err(Error::LabelOutOfRange { label: y, classes: self.label_limit() });
            }
        }
        if let Some(trace) = trace.as_deref_mut() {
            if trace.is_empty() {
                trace.record(0, self);
            }
        }
        let mut order: Vec<usize> = (0..xs.len()).collect();
        for epoch in 1..=epochs {
            order.shuffle(rng);
            for &i in &order {
                self.train_sample(&xs[i], ys[i], rng)?;
            }
            if let Some(trace) = trace.as_deref_mut() {
                trace.record(epoch, self);
            }
        }
        Ok(())
    }

    /// [`TsetlinMachine::fit`] driven by the configured seed.
    pub fn fit_seeded(&mut self, xs: &[Vec<u8>], ys: &[usize], epochs: usize) -> Result<()> {
        let mut rng = self.seeded_rng();
        self.fit(xs, ys, epochs, &mut rng, None)
    }
}

/// Gate then apply the feedback type dictated by `y_hat` and polarity.
#[inline]
fn update_clause<R: Rng + ?Sized>(
    clause: &mut Clause,
    x: &[u8],
    y_hat: bool,
    p_type_i: f64,
    p_type_ii: f64,
    s: f64,
    rng: &mut R,
) {
    let kind = dispatch(y_hat, clause.polarity() == Polarity::Positive);
    let p = match kind {
        FeedbackType::TypeI => p_type_i,
        FeedbackType::TypeII => p_type_ii,
    };
    if rng.gen::<f64>() < p {
        match kind {
            FeedbackType::TypeI => type_i_feedback(clause, x, s, rng),
            FeedbackType::TypeII => type_ii_feedback(clause, x),
        }
    }
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(values: &[i32]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::TsetlinAutomaton;

    fn include(c: &mut Clause, literal: usize) {
        let n = c.automata()[literal].states_per_action();
        c.automata_mut()[literal] = TsetlinAutomaton::with_state(n, n + 50);
    }

    fn small(classes: usize, m: usize) -> TsetlinMachine {
        TsetlinMachine::new(MachineConfig::new(2, classes, m)).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(MachineConfig::new(2, 2, 3).validate().is_err());
        assert!(MachineConfig::new(2, 2, 0).validate().is_err());
        let err = MachineConfig::new(2, 2, 3).validate().unwrap_err();
        assert_eq!(err.to_string(), "invalid configuration: clause count must be even and ≥ 2");
        assert!(MachineConfig::new(2, 2, 4).threshold(0).validate().is_err());
        assert!(MachineConfig::new(2, 2, 4).precision(1.0).validate().is_err());
        assert!(MachineConfig::new(2, 2, 4).states(0).validate().is_err());
        assert!(MachineConfig::new(2, 2, 4).validate().is_ok());
    }

    #[test]
    fn vote_sum_polarity_symmetry() {
        let mut tm = small(1, 4);
        let bank = &mut tm.banks_mut()[0];
        // every clause includes x_1; x = [1, 0] fires them all
        for c in bank.clauses_mut() {
            include(c, 0);
        }
        assert_eq!(bank.vote_sum(&[1, 0], Mode::Classify), 0);

        // only positive clauses fire
        for (j, c) in bank.clauses_mut().iter_mut().enumerate() {
            if j % 2 == 1 {
                include(c, 1);
            }
        }
        assert_eq!(bank.vote_sum(&[1, 0], Mode::Classify), 2);
    }

    #[test]
    fn empty_machine_votes_zero() {
        let tm = small(2, 4);
        assert_eq!(tm.votes(&[0, 1]).unwrap(), vec![0, 0]);
        assert_eq!(tm.predict(&[0, 1]).unwrap(), 0);
    }

    #[test]
    fn argmax_ties_to_lowest() {
        assert_eq!(argmax(&[3, -1]), 0);
        assert_eq!(argmax(&[0, 0]), 0);
        assert_eq!(argmax(&[-2, 5, 5]), 1);
    }

    #[test]
    fn frozen_positive_clauses_at_target() {
        // T = 1 and one positive clause firing: the clamped sum is +1 and the
        // Type I activation for ŷ = 1 is 0, so positive clauses never move.
        let mut tm = small(1, 2);
        include(&mut tm.banks_mut()[0].clauses_mut()[0], 0);
        // keep the negative clause off on x (an empty clause fires while learning)
        include(&mut tm.banks_mut()[0].clauses_mut()[1], 1);
        let positive_before = tm.banks()[0].clauses()[0].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            tm.train_sample(&[1, 0], 1, &mut rng).unwrap();
            assert_eq!(tm.banks()[0].clauses()[0], positive_before);
        }
    }

    #[test]
    fn full_activation_below_target() {
        // Negative clause fires (sum = -1): every positive clause receives
        // Type I, which eventually moves some automaton.
        let mut tm = small(1, 2);
        include(&mut tm.banks_mut()[0].clauses_mut()[1], 0);
        assert_eq!(type_i_activation_prob(-1, 1), 1.0);
        let before = tm.banks()[0].clauses()[0].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        tm.train_sample(&[1, 0], 1, &mut rng).unwrap();
        assert_ne!(tm.banks()[0].clauses()[0], before);
    }

    #[test]
    fn two_class_label_trains_both_banks() {
        let mut tm = small(2, 2);
        // make bank 0's negative clause fire on x so Type I on it (ŷ = 0) is
        // observable, and bank 1's positive clause Type I (ŷ = 1).
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let before = tm.clone();
        for _ in 0..50 {
            tm.train_sample(&[1, 0], 1, &mut rng).unwrap();
        }
        assert_ne!(tm.banks()[0], before.banks()[0]);
        assert_ne!(tm.banks()[1], before.banks()[1]);
    }

    #[test]
    fn label_out_of_range() {
        let mut tm = small(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(tm.train_sample(&[1, 0], 2, &mut rng), Err(Error::LabelOutOfRange { label: 2, classes: 2 })));
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        let mut tm = small(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(tm.fit(&[], &[], 1, &mut rng, None), Err(Error::EmptyDataset)));
        assert!(tm.fit(&[vec![1, 0]], &[0], 0, &mut rng, None).is_err());
    }

    fn xor_data() -> (Vec<Vec<u8>>, Vec<usize>) {
        let xs = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        let ys = vec![0, 1, 1, 0];
        (xs, ys)
    }

    #[test]
    fn learns_xor() {
        let (xs, ys) = xor_data();
        let cfg = MachineConfig::new(2, 2, 10).states(100).threshold(5).precision(3.9).seed(11);
        let mut tm = TsetlinMachine::new(cfg).unwrap();
        tm.fit_seeded(&xs, &ys, 200).unwrap();
        assert_eq!(tm.accuracy(&xs, &ys).unwrap(), 1.0);
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let (xs, ys) = xor_data();
        let cfg = MachineConfig::new(2, 2, 6).threshold(3).seed(5);
        let mut a = TsetlinMachine::new(cfg.clone()).unwrap();
        let mut b = TsetlinMachine::new(cfg).unwrap();
        a.fit_seeded(&xs, &ys, 30).unwrap();
        b.fit_seeded(&xs, &ys, 30).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parallel_mode_is_thread_count_independent() {
        let (xs, ys) = xor_data();
        let mut cfg = MachineConfig::new(2, 2, 8).threshold(3).seed(5);
        cfg.mode = TrainingMode::Parallel;
        let mut a = TsetlinMachine::new(cfg.clone()).unwrap();
        a.fit_seeded(&xs, &ys, 20).unwrap();
        let mut b = TsetlinMachine::new(cfg).unwrap();
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| b.fit_seeded(&xs, &ys, 20).unwrap());
        #[cfg(not(feature = "parallel"))]
        b.fit_seeded(&xs, &ys, 20).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn binary_machine_thresholds_at_positive_sum() {
        let mut tm = small(1, 2);
        assert_eq!(tm.predict(&[1, 1]).unwrap(), 0);
        include(&mut tm.banks_mut()[0].clauses_mut()[0], 0);
        assert_eq!(tm.predict(&[1, 1]).unwrap(), 1);
        assert_eq!(tm.predict(&[0, 1]).unwrap(), 0);
    }
}
