use thiserror::Error;

use super::{Game, Priority};
use crate::setops::PositionSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ViewError {
    #[error("position {0} is not in the view")]
    NotInView(usize),
    #[error("the view is empty")]
    EmptyView,
}

/// The subgame of a base game restricted to a set of alive positions.
///
/// Only moves between alive positions are visible. A view is well-formed
/// when every alive position keeps at least one alive successor.
#[derive(Clone, Debug)]
pub struct SubgameView<'g> {
    game: &'g Game,
    alive: PositionSet,
}

impl<'g> SubgameView<'g> {
    pub fn full(game: &'g Game) -> Self {
        Self {
            game,
            alive: PositionSet::full(game.len()),
        }
    }

    /// Builds a view over an explicit position set. The set must be sized
    /// to the base game.
    pub fn with_alive(game: &'g Game, alive: PositionSet) -> Self {
        assert_eq!(alive.capacity(), game.len(), "position set sized for another game");
        Self { game, alive }
    }

    pub fn game(&self) -> &'g Game {
        self.game
    }

    pub fn alive(&self) -> &PositionSet {
        &self.alive
    }

    pub fn contains(&self, v: usize) -> bool {
        self.alive.contains(v)
    }

    pub fn len(&self) -> usize {
        self.alive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alive.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.alive.iter()
    }

    /// Alive successors of an alive position, in stored order.
    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.game.successors(v).iter().copied().filter(|&u| self.alive.contains(u))
    }

    pub fn predecessors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.game.predecessors(v).iter().copied().filter(|&u| self.alive.contains(u))
    }

    /// The view `self \ removed`. Fails if `removed` is not inside the view;
    /// dead ends in the result are reported by [`Self::is_well_formed`].
    pub fn subgame(&self, removed: &PositionSet) -> Result<SubgameView<'g>, ViewError> {
        if let Some(u) = removed.iter().find(|&u| !self.alive.contains(u)) {
            return Err(ViewError::NotInView(u));
        }
        let mut alive = self.alive.clone();
        alive.difference_with(removed);
        Ok(SubgameView { game: self.game, alive })
    }

    /// The view restricted to `keep`, intersected with the alive set.
    pub fn restrict_to(&self, keep: &PositionSet) -> SubgameView<'g> {
        let mut alive = self.alive.clone();
        alive.intersect_with(keep);
        SubgameView { game: self.game, alive }
    }

    pub fn is_well_formed(&self) -> bool {
        self.first_dead_end().is_none()
    }

    pub fn first_dead_end(&self) -> Option<usize> {
        self.positions().find(|&v| self.successors(v).next().is_none())
    }

    pub fn max_priority(&self) -> Result<Priority, ViewError> {
        self.positions()
            .map(|v| self.game.priority(v))
            .max()
            .ok_or(ViewError::EmptyView)
    }
}
