//! Weighted finite-state acceptors over the tropical semiring.
//!
//! A [`Wfsa`] is immutable once built. Construction goes through
//! [`WfsaBuilder`], which validates state ids, labels and weights and leaves
//! every state's arcs sorted by label so that intersection can look arcs up
//! by binary search.
//!
//! ```
//! use std::sync::Arc;
//! use elicit_core::wfsa::{SymbolTable, Weight, WfsaBuilder};
//!
//! let symbols = Arc::new(SymbolTable::from_tokens(["a", "b"]));
//! let mut b = WfsaBuilder::new(symbols.clone());
//! let s0 = b.add_state();
//! let s1 = b.add_state();
//! let s2 = b.add_state();
//! b.set_start(s0);
//! b.add_arc(s0, symbols.id("a").unwrap(), Weight::new(0.5), s1).unwrap();
//! b.add_arc(s1, symbols.id("b").unwrap(), Weight::new(0.5), s2).unwrap();
//! b.set_final(s2, Weight::ONE).unwrap();
//! let chain = b.build().unwrap();
//!
//! assert_eq!(chain.accept(&["a", "b"]), Some(Weight::new(1.0)));
//! assert_eq!(chain.accept(&["b"]), None);
//! ```

mod epsilon;
mod intersect;
mod paths;
mod symbols;
mod text;
mod trim;
mod weight;

use std::sync::Arc;

use thiserror::Error;

pub use intersect::intersect;
pub use symbols::{Label, SymbolTable, EPSILON};
pub use weight::Weight;

pub type StateId = u32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WfsaError {
    #[error("state {state} out of range (automaton has {num_states} states)")]
    InvalidState { state: StateId, num_states: usize },
    #[error("weight {0} is not a finite non-negative value")]
    InvalidWeight(f64),
    #[error("label {0} is not in the symbol table")]
    UnknownLabel(Label),
    #[error("no start state set")]
    NoStart,
    #[error("{0} automaton has epsilon arcs; remove them before intersecting")]
    EpsilonArcs(&'static str),
    #[error("automata use different symbol tables")]
    SymbolTableMismatch,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// An outgoing arc. The source state is implied by the state that owns it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub label: Label,
    pub weight: Weight,
    pub target: StateId,
}

impl Transition {
    pub fn is_epsilon(&self) -> bool {
        self.label == EPSILON
    }
}

#[derive(Clone, Debug, PartialEq)]
struct State {
    arcs: Vec<Transition>,
    final_weight: Weight,
}

impl State {
    fn new() -> Self {
        State {
            arcs: Vec::new(),
            final_weight: Weight::ZERO,
        }
    }
}

/// A weighted finite-state acceptor.
#[derive(Clone, Debug)]
pub struct Wfsa {
    states: Vec<State>,
    start: StateId,
    symbols: Arc<SymbolTable>,
    epsilon_free: bool,
}

impl PartialEq for Wfsa {
    fn eq(&self, other: &Self) -> bool {
        self.start == other.start
            && self.states == other.states
            && (Arc::ptr_eq(&self.symbols, &other.symbols) || self.symbols == other.symbols)
    }
}

impl Wfsa {
    /// The one-state automaton with an empty language.
    pub fn empty(symbols: Arc<SymbolTable>) -> Wfsa {
        Wfsa {
            states: vec![State::new()],
            start: 0,
            symbols,
            epsilon_free: true,
        }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.states.iter().map(|s| s.arcs.len()).sum()
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn symbols(&self) -> &Arc<SymbolTable> {
        &self.symbols
    }

    /// Arcs leaving `state`, sorted by label. Panics on an invalid id.
    pub fn arcs(&self, state: StateId) -> &[Transition] {
        &self.states[state as usize].arcs
    }

    /// `Weight::ZERO` for non-final states.
    pub fn final_weight(&self, state: StateId) -> Weight {
        self.states[state as usize].final_weight
    }

    pub fn is_final(&self, state: StateId) -> bool {
        !self.final_weight(state).is_zero()
    }

    pub fn is_epsilon_free(&self) -> bool {
        self.epsilon_free
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        0..self.states.len() as StateId
    }

    /// Arcs leaving `state` with the given label.
    pub(crate) fn arcs_with_label(&self, state: StateId, label: Label) -> &[Transition] {
        label_range(self.arcs(state), label)
    }

    /// Whether the language is empty.
    pub fn is_empty_language(&self) -> bool {
        self.shortest_distance().is_none()
    }
}

/// The contiguous run of arcs carrying `label` in a label-sorted slice.
fn label_range(arcs: &[Transition], label: Label) -> &[Transition] {
    let lo = arcs.partition_point(|a| a.label < label);
    let hi = lo + arcs[lo..].partition_point(|a| a.label == label);
    &arcs[lo..hi]
}

fn sort_arcs(arcs: &mut [Transition]) {
    arcs.sort_by(|x, y| {
        x.label
            .cmp(&y.label)
            .then(x.target.cmp(&y.target))
            .then(x.weight.cmp(&y.weight))
    });
}

/// Mutable construction interface for [`Wfsa`].
#[derive(Clone, Debug)]
pub struct WfsaBuilder {
    states: Vec<State>,
    start: Option<StateId>,
    symbols: Arc<SymbolTable>,
}

impl WfsaBuilder {
    pub fn new(symbols: Arc<SymbolTable>) -> Self {
        WfsaBuilder {
            states: Vec::new(),
            start: None,
            symbols,
        }
    }

    pub fn with_states(symbols: Arc<SymbolTable>, n: usize) -> Self {
        let mut b = WfsaBuilder::new(symbols);
        b.states.resize_with(n, State::new);
        b
    }

    pub fn add_state(&mut self) -> StateId {
        self.states.push(State::new());
        (self.states.len() - 1) as StateId
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn symbols(&self) -> &Arc<SymbolTable> {
        &self.symbols
    }

    fn check_state(&self, state: StateId) -> Result<(), WfsaError> {
        if (state as usize) < self.states.len() {
            Ok(())
        } else {
            Err(WfsaError::InvalidState {
                state,
                num_states: self.states.len(),
            })
        }
    }

    pub fn set_start(&mut self, state: StateId) {
        self.start = Some(state);
    }

    /// Sets the final weight; `Weight::ZERO` makes the state non-final.
    pub fn set_final(&mut self, state: StateId, weight: Weight) -> Result<(), WfsaError> {
        self.check_state(state)?;
        if !weight.is_zero() && !weight.is_valid_arc_weight() {
            return Err(WfsaError::InvalidWeight(weight.value()));
        }
        self.states[state as usize].final_weight = weight;
        Ok(())
    }

    /// Adds a labeled arc. `label` must be a symbol of the table, never
    /// epsilon; use [`add_epsilon`](Self::add_epsilon) for those.
    pub fn add_arc(
        &mut self,
        source: StateId,
        label: Label,
        weight: Weight,
        target: StateId,
    ) -> Result<(), WfsaError> {
        if label == EPSILON || self.symbols.symbol(label).is_none() {
            return Err(WfsaError::UnknownLabel(label));
        }
        self.push_arc(source, label, weight, target)
    }

    pub fn add_epsilon(
        &mut self,
        source: StateId,
        weight: Weight,
        target: StateId,
    ) -> Result<(), WfsaError> {
        self.push_arc(source, EPSILON, weight, target)
    }

    fn push_arc(
        &mut self,
        source: StateId,
        label: Label,
        weight: Weight,
        target: StateId,
    ) -> Result<(), WfsaError> {
        self.check_state(source)?;
        self.check_state(target)?;
        if !weight.is_valid_arc_weight() {
            return Err(WfsaError::InvalidWeight(weight.value()));
        }
        self.states[source as usize].arcs.push(Transition {
            label,
            weight,
            target,
        });
        Ok(())
    }

    pub fn build(mut self) -> Result<Wfsa, WfsaError> {
        let start = self.start.ok_or(WfsaError::NoStart)?;
        self.check_state(start)?;
        let mut epsilon_free = true;
        for state in &mut self.states {
            sort_arcs(&mut state.arcs);
            epsilon_free &= !state.arcs.iter().any(Transition::is_epsilon);
        }
        Ok(Wfsa {
            states: self.states,
            start,
            symbols: self.symbols,
            epsilon_free,
        })
    }
}
