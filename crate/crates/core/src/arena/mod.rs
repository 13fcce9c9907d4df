//! Immutable parity game arenas, subgame views and the pgsolver text format.

mod pgsolver;
mod view;

use std::fmt;

use thiserror::Error;

pub use pgsolver::{parse_pgsolver, write_pgsolver};
pub use view::{SubgameView, ViewError};

/// One of the two players. Player 0 (`Even`) wins plays whose highest
/// priority seen infinitely often is even.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Even,
    Odd,
}

impl Player {
    /// The player that wins cycles whose maximal priority has this parity.
    pub fn of_parity(p: Priority) -> Player {
        if p.0.is_multiple_of(2) {
            Player::Even
        } else {
            Player::Odd
        }
    }

    pub fn from_index(i: u8) -> Option<Player> {
        match i {
            0 => Some(Player::Even),
            1 => Some(Player::Odd),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Player::Even => 0,
            Player::Odd => 1,
        }
    }

    pub fn dual(self) -> Player {
        match self {
            Player::Even => Player::Odd,
            Player::Odd => Player::Even,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// A position priority, also used as the measure of a region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Priority(pub u32);

impl Priority {
    pub fn parity(self) -> u32 {
        self.0 % 2
    }

    pub fn same_parity(self, other: Priority) -> bool {
        self.parity() == other.parity()
    }

    pub fn player(self) -> Player {
        Player::of_parity(self)
    }
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Input record for [`Game::build`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionSpec {
    pub priority: Priority,
    pub owner: Player,
    pub successors: Vec<usize>,
    pub name: Option<String>,
}

impl PositionSpec {
    pub fn new(priority: u32, owner: Player, successors: Vec<usize>) -> Self {
        Self {
            priority: Priority(priority),
            owner,
            successors,
            name: None,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("position {0} has no successors")]
    EmptySuccessors(usize),
    #[error("position {0} has successor {1} which is out of range")]
    IndexOutOfRange(usize, usize),
    #[error("syntax error on line {line}: {message}")]
    SyntaxError { line: usize, message: String },
    #[error("position {0} refers to an undefined successor")]
    DanglingSuccessor(u64),
    #[error("position id {0} is defined twice")]
    DuplicateId(u64),
    #[error("position id {id} exceeds the declared maximum id {max}")]
    HeaderBound { id: u64, max: u64 },
    #[error("the game has no positions")]
    Empty,
}

/// An explicit max-parity game. Positions are dense indices in `0..n`.
///
/// Successors are stored in input order; predecessors are the exact
/// transpose, listed in ascending order of the source position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Game {
    owner: Vec<Player>,
    priority: Vec<Priority>,
    succ_offsets: Vec<usize>,
    succ: Vec<usize>,
    pred_offsets: Vec<usize>,
    pred: Vec<usize>,
    names: Vec<Option<String>>,
}

impl Game {
    /// Builds a game, checking that every position has at least one move and
    /// every successor index is in range.
    pub fn build(spec: Vec<PositionSpec>) -> Result<Game, GameError> {
        let n = spec.len();
        if n == 0 {
            return Err(GameError::Empty);
        }
        let mut owner = Vec::with_capacity(n);
        let mut priority = Vec::with_capacity(n);
        let mut names = Vec::with_capacity(n);
        let mut succ_offsets = Vec::with_capacity(n + 1);
        let mut succ = Vec::new();
        let mut in_degree = vec![0usize; n];

        succ_offsets.push(0);
        for (v, pos) in spec.into_iter().enumerate() {
            if pos.successors.is_empty() {
                return Err(GameError::EmptySuccessors(v));
            }
            for &u in &pos.successors {
                if u >= n {
                    return Err(GameError::IndexOutOfRange(v, u));
                }
                in_degree[u] += 1;
            }
            succ.extend_from_slice(&pos.successors);
            succ_offsets.push(succ.len());
            owner.push(pos.owner);
            priority.push(pos.priority);
            names.push(pos.name);
        }

        let mut pred_offsets = Vec::with_capacity(n + 1);
        pred_offsets.push(0);
        for d in &in_degree {
            pred_offsets.push(pred_offsets.last().unwrap() + d);
        }
        let mut fill = pred_offsets[..n].to_vec();
        let mut pred = vec![0; succ.len()];
        for v in 0..n {
            for &u in &succ[succ_offsets[v]..succ_offsets[v + 1]] {
                pred[fill[u]] = v;
                fill[u] += 1;
            }
        }

        Ok(Game {
            owner,
            priority,
            succ_offsets,
            succ,
            pred_offsets,
            pred,
            names,
        })
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn num_moves(&self) -> usize {
        self.succ.len()
    }

    pub fn positions(&self) -> std::ops::Range<usize> {
        0..self.len()
    }

    pub fn owner(&self, v: usize) -> Player {
        self.owner[v]
    }

    pub fn priority(&self, v: usize) -> Priority {
        self.priority[v]
    }

    pub fn priorities(&self) -> &[Priority] {
        &self.priority
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[self.succ_offsets[v]..self.succ_offsets[v + 1]]
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.pred[self.pred_offsets[v]..self.pred_offsets[v + 1]]
    }

    pub fn name(&self, v: usize) -> Option<&str> {
        self.names[v].as_deref()
    }

    pub fn max_priority(&self) -> Priority {
        self.priority.iter().copied().max().unwrap_or_default()
    }

    /// The view containing every position of the game.
    pub fn full_view(&self) -> SubgameView<'_> {
        SubgameView::full(self)
    }

    /// Rebuilds the construction records, e.g. to derive a modified game.
    pub fn to_spec(&self) -> Vec<PositionSpec> {
        self.positions()
            .map(|v| PositionSpec {
                priority: self.priority[v],
                owner: self.owner[v],
                successors: self.successors(v).to_vec(),
                name: self.names[v].clone(),
            })
            .collect()
    }
}
