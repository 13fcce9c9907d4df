//! Independent reference solvers: Zielonka's recursive algorithm and
//! exhaustive enumeration of positional strategies.

use std::time::Instant;

use thiserror::Error;

use crate::arena::{Player, SubgameView};
use crate::setops::{Attractor, PositionSet};

/// Upper bound on the number of positional strategy profiles enumerated by
/// [`brute_force`].
pub const BRUTE_FORCE_PROFILE_LIMIT: u128 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("deadline reached")]
    Timeout,
}

/// Winning regions `[W0, W1]`.
pub type Partition = [PositionSet; 2];

/// Zielonka's recursive algorithm on a well-formed view.
pub fn zielonka(view: &SubgameView<'_>) -> Partition {
    zielonka_until(view, None).expect("no deadline")
}

pub fn zielonka_until(view: &SubgameView<'_>, deadline: Option<Instant>) -> Result<Partition, OracleError> {
    let mut solver = Zielonka {
        attractor: Attractor::new(view.game().len()),
        deadline,
    };
    solver.solve(view)
}

struct Zielonka {
    attractor: Attractor,
    deadline: Option<Instant>,
}

impl Zielonka {
    fn solve(&mut self, view: &SubgameView<'_>) -> Result<Partition, OracleError> {
        let game = view.game();
        let n = game.len();
        if view.is_empty() {
            return Ok([PositionSet::empty(n), PositionSet::empty(n)]);
        }
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(OracleError::Timeout);
        }
        let top = view.max_priority().expect("non-empty view");
        let alpha = top.player();
        let heads = PositionSet::from_positions(n, view.positions().filter(|&v| game.priority(v) == top));
        let a = self.attractor.compute(game, view.alive(), alpha, &heads);
        let sub = view.subgame(&a).expect("attractor lies inside the view");
        let w = self.solve(&sub)?;
        if w[alpha.dual().index()].is_empty() {
            let mut out = [PositionSet::empty(n), PositionSet::empty(n)];
            out[alpha.index()] = view.alive().clone();
            return Ok(out);
        }
        let b = self
            .attractor
            .compute(game, view.alive(), alpha.dual(), &w[alpha.dual().index()]);
        let sub = view.subgame(&b).expect("attractor lies inside the view");
        let mut w = self.solve(&sub)?;
        w[alpha.dual().index()].union_with(&b);
        Ok(w)
    }
}

/// Solves a view by enumerating every pair of positional strategies.
///
/// A position is won by player 0 iff some player-0 strategy makes the
/// induced lasso from it end in a cycle with even maximal priority against
/// every player-1 strategy. Fails if the number of strategy profiles exceeds
/// [`BRUTE_FORCE_PROFILE_LIMIT`].
pub fn brute_force(view: &SubgameView<'_>) -> Result<Partition, OracleError> {
    let game = view.game();
    let n = game.len();
    let local: Vec<usize> = view.positions().collect();
    let m = local.len();
    let mut dense = vec![usize::MAX; n];
    for (i, &v) in local.iter().enumerate() {
        dense[v] = i;
    }
    let moves: Vec<Vec<usize>> = local
        .iter()
        .map(|&v| view.successors(v).map(|u| dense[u]).collect())
        .collect();
    if let Some(i) = moves.iter().position(|m| m.is_empty()) {
        return Err(OracleError::GuardExceeded(format!("position {} is a dead end", local[i])));
    }

    let mut profiles: u128 = 1;
    for mv in &moves {
        profiles = profiles.saturating_mul(mv.len() as u128);
    }
    if profiles > BRUTE_FORCE_PROFILE_LIMIT {
        return Err(OracleError::GuardExceeded(format!(
            "{profiles} strategy profiles exceed the limit of {BRUTE_FORCE_PROFILE_LIMIT}"
        )));
    }

    let owned: [Vec<usize>; 2] = [
        (0..m).filter(|&i| game.owner(local[i]) == Player::Even).collect(),
        (0..m).filter(|&i| game.owner(local[i]) == Player::Odd).collect(),
    ];
    let priority: Vec<u32> = local.iter().map(|&v| game.priority(v).0).collect();

    let mut choice = vec![0usize; m];
    let mut won_by_even = vec![false; m];
    let mut lasso = LassoScratch::new(m);
    let mut holds = vec![true; m];

    loop {
        // fixed player-0 strategy; check all replies of player 1
        holds.fill(true);
        for &i in &owned[1] {
            choice[i] = 0;
        }
        loop {
            lasso.evaluate(&moves, &choice, &priority);
            for (h, &even) in holds.iter_mut().zip(&lasso.even) {
                *h &= even;
            }
            if !holds.iter().any(|&h| h) || !advance(&mut choice, &owned[1], &moves) {
                break;
            }
        }
        for i in 0..m {
            won_by_even[i] |= holds[i];
        }
        if !advance(&mut choice, &owned[0], &moves) {
            break;
        }
    }

    let mut w0 = PositionSet::empty(n);
    let mut w1 = PositionSet::empty(n);
    for (i, &v) in local.iter().enumerate() {
        if won_by_even[i] {
            w0.insert(v);
        } else {
            w1.insert(v);
        }
    }
    Ok([w0, w1])
}

/// Mixed-radix increment of the choices at `positions`. Returns false on
/// wrap-around.
fn advance(choice: &mut [usize], positions: &[usize], moves: &[Vec<usize>]) -> bool {
    for &i in positions {
        choice[i] += 1;
        if choice[i] < moves[i].len() {
            return true;
        }
        choice[i] = 0;
    }
    false
}

/// Winner of every start position in a functional graph.
struct LassoScratch {
    state: Vec<u8>,
    even: Vec<bool>,
    path: Vec<usize>,
}

impl LassoScratch {
    fn new(m: usize) -> Self {
        Self {
            state: vec![0; m],
            even: vec![false; m],
            path: Vec::with_capacity(m),
        }
    }

    fn evaluate(&mut self, moves: &[Vec<usize>], choice: &[usize], priority: &[u32]) {
        const NEW: u8 = 0;
        const ON_PATH: u8 = 1;
        const DONE: u8 = 2;
        self.state.fill(NEW);
        for start in 0..moves.len() {
            if self.state[start] != NEW {
                continue;
            }
            self.path.clear();
            let mut v = start;
            while self.state[v] == NEW {
                self.state[v] = ON_PATH;
                self.path.push(v);
                v = moves[v][choice[v]];
            }
            let result = if self.state[v] == ON_PATH {
                let at = self.path.iter().position(|&x| x == v).unwrap();
                let top = self.path[at..].iter().map(|&x| priority[x]).max().unwrap();
                top % 2 == 0
            } else {
                self.even[v]
            };
            for &x in &self.path {
                self.state[x] = DONE;
                self.even[x] = result;
            }
        }
    }
}
