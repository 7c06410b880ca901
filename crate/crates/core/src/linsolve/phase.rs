//! Iterative → direct switching and the drop-tolerance schedule.

use std::collections::VecDeque;

/// Window of past support sizes the switching statistic looks back over.
pub const SWITCH_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Iterative,
    Direct,
}

/// `(ψ_{t−5} − ψ_t)/ψ_{t−5} ≥ threshold`, where `history` holds the previous
/// sizes (most recent last). Fewer than five past sizes never trigger.
pub fn should_switch(history: &[usize], current: usize, threshold: f64) -> bool {
    if history.len() < SWITCH_WINDOW {
        return false;
    }
    let past = history[history.len() - SWITCH_WINDOW] as f64;
    past > 0.0 && (past - current as f64) / past >= threshold
}

#[derive(Debug, Clone)]
pub struct SolverPhase {
    mode: Mode,
    ic_drop_tol: f64,
    min_drop_tol: f64,
    slow_iters: usize,
    history: VecDeque<usize>,
    switch_threshold: f64,
    allow_fallback: bool,
    switches: usize,
    fallbacks: usize,
    refactor: bool,
}

impl SolverPhase {
    pub fn new(switch_threshold: f64, initial_drop_tol: f64) -> Self {
        SolverPhase {
            mode: Mode::Iterative,
            ic_drop_tol: initial_drop_tol,
            min_drop_tol: 1e-6,
            slow_iters: 200,
            history: VecDeque::with_capacity(SWITCH_WINDOW + 1),
            switch_threshold,
            allow_fallback: false,
            switches: 0,
            fallbacks: 0,
            refactor: false,
        }
    }

    /// Allow returning to the iterative phase when the support grows after
    /// the switch.
    pub fn with_fallback(mut self, allow: bool) -> Self {
        self.allow_fallback = allow;
        self
    }

    pub fn with_drop_schedule(mut self, min_drop_tol: f64, slow_iters: usize) -> Self {
        self.min_drop_tol = min_drop_tol;
        self.slow_iters = slow_iters;
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn ic_drop_tol(&self) -> f64 {
        self.ic_drop_tol
    }

    pub fn switch_threshold(&self) -> f64 {
        self.switch_threshold
    }

    pub fn switches(&self) -> usize {
        self.switches
    }

    pub fn fallbacks(&self) -> usize {
        self.fallbacks
    }

    pub fn history(&self) -> impl Iterator<Item = usize> + '_ {
        self.history.iter().cloned()
    }

    /// Feed the support size of the current iteration; returns the mode to
    /// use for it.
    pub fn observe_support(&mut self, size: usize) -> Mode {
        let hist: Vec<usize> = self.history.iter().cloned().collect();
        match self.mode {
            Mode::Iterative => {
                if self.switches == 0 && should_switch(&hist, size, self.switch_threshold) {
                    self.force_direct();
                }
            }
            Mode::Direct => {
                if self.allow_fallback && hist.last().is_some_and(|&prev| size > prev) {
                    log::info!("support grew from {} to {size}; back to the iterative phase", hist.last().unwrap());
                    self.mode = Mode::Iterative;
                    self.fallbacks += 1;
                }
            }
        }
        self.history.push_back(size);
        if self.history.len() > SWITCH_WINDOW {
            self.history.pop_front();
        }
        self.mode
    }

    /// Switch regardless of the support statistic (used when the solver
    /// decides on other grounds that the iterative phase is exhausted).
    pub fn force_direct(&mut self) {
        if self.mode == Mode::Iterative {
            self.mode = Mode::Direct;
            self.switches += 1;
        }
    }

    /// Record the iteration count of a PCG call in the iterative phase; a
    /// slow call lowers the drop tolerance for the next factorization.
    pub fn record_pcg(&mut self, iters: usize) {
        if self.mode == Mode::Iterative && iters > self.slow_iters && self.ic_drop_tol > self.min_drop_tol {
            self.ic_drop_tol = (self.ic_drop_tol / 10.0).max(self.min_drop_tol);
            self.refactor = true;
            log::debug!("PCG took {iters} iterations; drop tolerance lowered to {:e}", self.ic_drop_tol);
        }
    }

    /// Whether the drop tolerance changed since the last call.
    pub fn take_refactor(&mut self) -> bool {
        std::mem::take(&mut self.refactor)
    }
}
