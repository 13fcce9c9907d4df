//! The generic dominion search over a dominion space and the outer loop that
//! peels dominions (and their attractors) off the game.

use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::arena::{Game, Player, Priority, SubgameView};
use crate::baseline::{brute_force, zielonka_until, OracleError, Partition};
use crate::pp_family::{DelayedSpace, PromotionSpace, ResetRule};
use crate::regions::{is_quasi_dominion, RegionError, REGION_ORACLE_LIMIT};
use crate::setops::{is_closed_within, Attractor, PositionSet};

/// A region paired with the player it favours.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub set: PositionSet,
    pub player: Player,
}

/// Work counters of one or more searches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub queries: u64,
    pub promotions: u64,
    pub delayed: u64,
    pub flushes: u64,
    /// Positions returned to their original priority, cumulative.
    pub resets: u64,
    pub wall_time: Duration,
}

impl AddAssign for SearchStats {
    fn add_assign(&mut self, o: SearchStats) {
        self.queries += o.queries;
        self.promotions += o.promotions;
        self.delayed += o.delayed;
        self.flushes += o.flushes;
        self.resets += o.resets;
        self.wall_time += o.wall_time;
    }
}

/// Events emitted by the successor operators when tracing is enabled.
/// Position lists are ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    /// A region closed in its subgame was merged into the region at `to`.
    Promotion { region: Vec<usize>, from: Priority, to: Priority },
    /// The region recorded at `level` was returned to original priorities.
    Reset { level: Priority, region: Vec<usize> },
    /// A locked promotion was recorded instead of performed.
    Delay { region: Vec<usize>, from: Priority, to: Priority },
    /// Delayed promotions were applied at once, resuming at `to`.
    Flush { to: Priority, promoted: Vec<usize> },
    /// The search returned a closed region.
    Dominion { region: Vec<usize>, player: Player },
}

/// Collects counters and, optionally, trace events.
#[derive(Debug, Default)]
pub struct Recorder {
    pub stats: SearchStats,
    pub trace: Option<Vec<TraceEvent>>,
}

impl Recorder {
    pub fn new(trace: bool) -> Self {
        Self {
            stats: SearchStats::default(),
            trace: trace.then(Vec::new),
        }
    }

    pub fn tracing(&self) -> bool {
        self.trace.is_some()
    }

    pub fn emit(&mut self, event: impl FnOnce() -> TraceEvent) {
        if let Some(t) = self.trace.as_mut() {
            t.push(event());
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("search exceeded {0} iterations")]
    NonTermination(u64),
    #[error("deadline reached")]
    Timeout,
    #[error("input view is not well-formed: position {0} has no move")]
    IllFormed(usize),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

impl From<OracleError> for SolveError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Timeout => SolveError::Timeout,
            e => SolveError::Region(RegionError::Oracle(e)),
        }
    }
}

impl SolveError {
    pub fn is_guard(&self) -> bool {
        matches!(self, SolveError::Region(RegionError::Oracle(OracleError::GuardExceeded(_))))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Hard cap on query/successor rounds per search.
    pub max_iterations: u64,
    pub deadline: Option<Instant>,
    /// The deadline is polled every this many queries.
    pub deadline_poll: u64,
    /// Check state order, compatibility, alignment and region validity at
    /// every step. Oracle-backed checks only run on regions small enough
    /// for brute force.
    pub debug_checks: bool,
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iterations: 1 << 40,
            deadline: None,
            deadline_poll: 1 << 14,
            debug_checks: false,
            trace: false,
        }
    }
}

impl SolveOptions {
    pub fn with_timeout(mut self, timeout: Option<Duration>) -> Self {
        self.deadline = timeout.map(|t| Instant::now() + t);
        self
    }
}

/// A dominion space: a well-founded state order with query and successor
/// operators.
pub trait DominionSpace {
    type State: Clone;

    fn view(&self) -> &SubgameView<'_>;

    fn top(&mut self) -> Self::State;

    fn query(&mut self, state: &Self::State) -> Region;

    /// Called only with regions open in the search game.
    fn successor(&mut self, state: Self::State, region: Region, rec: &mut Recorder) -> Result<Self::State, SolveError>;

    /// Strict state order: `s1 ≺ s2`.
    fn precedes(&self, s1: &Self::State, s2: &Self::State) -> bool;

    /// Validity of a state (debug only).
    fn check_state(&self, state: &Self::State) -> Result<(), String>;

    /// Compatibility of a queried region with its state (debug only).
    fn check_compatible(&self, state: &Self::State, region: &Region) -> Result<(), String>;
}

/// Runs the dominion search: query regions and take successors until a
/// region is closed in the search game. The result is a dominion of its
/// player in that game.
pub fn search<D: DominionSpace>(space: &mut D, rec: &mut Recorder, options: &SolveOptions) -> Result<Region, SolveError> {
    let mut state = space.top();
    if options.debug_checks {
        space.check_state(&state).map_err(SolveError::InvariantViolation)?;
    }
    let mut iterations = 0u64;
    loop {
        iterations += 1;
        if iterations > options.max_iterations {
            return Err(SolveError::NonTermination(options.max_iterations));
        }
        if iterations.is_multiple_of(options.deadline_poll.max(1)) && options.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(SolveError::Timeout);
        }
        rec.stats.queries += 1;
        let region = space.query(&state);
        let view = space.view();
        let closed = is_closed_within(view.game(), view.alive(), region.player.dual(), &region.set);
        if closed {
            if options.debug_checks && region.set.len() <= REGION_ORACLE_LIMIT {
                match is_quasi_dominion(view, &region.set, region.player) {
                    Ok(true) => {}
                    Ok(false) => {
                        return Err(SolveError::InvariantViolation(format!(
                            "closed region {:?} is not won by player {}",
                            region.set, region.player
                        )))
                    }
                    Err(e) if is_guard(&e) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            rec.emit(|| TraceEvent::Dominion {
                region: region.set.to_vec(),
                player: region.player,
            });
            return Ok(region);
        }
        if options.debug_checks {
            space
                .check_compatible(&state, &region)
                .map_err(SolveError::InvariantViolation)?;
        }
        let previous = options.debug_checks.then(|| state.clone());
        state = space.successor(state, region, rec)?;
        if let Some(previous) = previous {
            if !space.precedes(&state, &previous) {
                return Err(SolveError::InvariantViolation(
                    "successor state does not precede its input".into(),
                ));
            }
            space.check_state(&state).map_err(SolveError::InvariantViolation)?;
        }
    }
}

pub(crate) fn is_guard(e: &RegionError) -> bool {
    matches!(e, RegionError::Oracle(OracleError::GuardExceeded(_)))
}

/// The solvers offered by [`solve_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Solver {
    /// Priority promotion, resetting every lower region on promotion.
    Pp,
    /// Priority promotion resetting only opponent regions.
    PpPlus,
    /// Delayed promotion.
    Dp,
    Zielonka,
    BruteForce,
}

impl Solver {
    pub const ALL: [Solver; 5] = [Solver::Pp, Solver::PpPlus, Solver::Dp, Solver::Zielonka, Solver::BruteForce];

    pub fn name(self) -> &'static str {
        match self {
            Solver::Pp => "pp",
            Solver::PpPlus => "pp+",
            Solver::Dp => "dp",
            Solver::Zielonka => "zlk",
            Solver::BruteForce => "brute",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Solver::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown solver {s:?} (expected one of pp, pp+, dp, zlk, brute)"))
    }
}

/// Result of a solve.
#[derive(Clone, Debug)]
pub struct Solution {
    /// `[W0, W1]`, a partition of the positions.
    pub winning: Partition,
    pub stats: SearchStats,
    /// Counters of each dominion search, in order.
    pub searches: Vec<SearchStats>,
    pub trace: Vec<TraceEvent>,
}

impl Solution {
    pub fn winner(&self, v: usize) -> Player {
        if self.winning[0].contains(v) {
            Player::Even
        } else {
            Player::Odd
        }
    }
}

/// Solves a game with one of the promotion policies.
pub fn solve(game: &Game, rule: Policy, options: &SolveOptions) -> Result<Solution, SolveError> {
    let started = Instant::now();
    let n = game.len();
    let mut view = game.full_view();
    if let Some(v) = view.first_dead_end() {
        return Err(SolveError::IllFormed(v));
    }
    let mut winning = [PositionSet::empty(n), PositionSet::empty(n)];
    let mut total = SearchStats::default();
    let mut searches = Vec::new();
    let mut trace = Vec::new();
    let mut attractor = Attractor::new(n);

    while !view.is_empty() {
        let search_started = Instant::now();
        let mut rec = Recorder::new(options.trace);
        let dominion = match rule {
            Policy::Pp => search(&mut PromotionSpace::new(&view, ResetRule::All), &mut rec, options)?,
            Policy::PpPlus => search(&mut PromotionSpace::new(&view, ResetRule::Opponent), &mut rec, options)?,
            Policy::Dp => search(&mut DelayedSpace::new(&view), &mut rec, options)?,
        };
        let won = attractor.compute(game, view.alive(), dominion.player, &dominion.set);
        winning[dominion.player.index()].union_with(&won);
        view = view.subgame(&won).expect("attractor lies inside the view");
        if let Some(v) = view.first_dead_end() {
            return Err(SolveError::InvariantViolation(format!(
                "removing an attractor left position {v} without moves"
            )));
        }
        rec.stats.wall_time = search_started.elapsed();
        total += rec.stats;
        searches.push(rec.stats);
        if let Some(t) = rec.trace {
            trace.extend(t);
        }
    }
    total.wall_time = started.elapsed();
    Ok(Solution {
        winning,
        stats: total,
        searches,
        trace,
    })
}

/// The three promotion policies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Policy {
    Pp,
    PpPlus,
    Dp,
}

/// Dispatches to a promotion policy or a baseline solver.
pub fn solve_with(game: &Game, solver: Solver, options: &SolveOptions) -> Result<Solution, SolveError> {
    let baseline = |w: Partition, started: Instant| Solution {
        winning: w,
        stats: SearchStats {
            wall_time: started.elapsed(),
            ..SearchStats::default()
        },
        searches: Vec::new(),
        trace: Vec::new(),
    };
    match solver {
        Solver::Pp => solve(game, Policy::Pp, options),
        Solver::PpPlus => solve(game, Policy::PpPlus, options),
        Solver::Dp => solve(game, Policy::Dp, options),
        Solver::Zielonka => {
            let started = Instant::now();
            if let Some(v) = game.full_view().first_dead_end() {
                return Err(SolveError::IllFormed(v));
            }
            Ok(baseline(zielonka_until(&game.full_view(), options.deadline)?, started))
        }
        Solver::BruteForce => {
            let started = Instant::now();
            Ok(baseline(brute_force(&game.full_view())?, started))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::tests::{t1, t2};
    use crate::generators::{random_game, worstcase_ppplus, RandomSpec, CENTER};

    #[test]
    fn search_single_even_loop() {
        let g = t2();
        let view = g.full_view();
        let mut rec = Recorder::new(false);
        let d = search(&mut PromotionSpace::new(&view, ResetRule::Opponent), &mut rec, &SolveOptions::default()).unwrap();
        assert_eq!(d.set.to_vec(), vec![0]);
        assert_eq!(d.player, Player::Even);
        assert_eq!(rec.stats.queries, 1);
        assert_eq!(rec.stats.promotions, 0);
    }

    #[test]
    fn search_t1_returns_attracted_region() {
        let g = t1();
        let view = g.full_view();
        let mut rec = Recorder::new(false);
        let d = search(&mut DelayedSpace::new(&view), &mut rec, &SolveOptions::default()).unwrap();
        assert_eq!(d.set.to_vec(), vec![0, 1]);
        assert_eq!(d.player, Player::Odd);
    }

    #[test]
    fn search_worstcase_dp() {
        let g = worstcase_ppplus(4);
        let view = g.full_view();
        let mut rec = Recorder::new(false);
        let d = search(&mut DelayedSpace::new(&view), &mut rec, &SolveOptions::default()).unwrap();
        assert_eq!(d.set.to_vec(), vec![CENTER]);
        assert_eq!(d.player, Player::Even);
        assert_eq!(rec.stats.promotions, 2);
        assert_eq!(rec.stats.flushes, 0);
    }

    #[test]
    fn solve_small_games() {
        for policy in [Policy::Pp, Policy::PpPlus, Policy::Dp] {
            let s = solve(&t1(), policy, &SolveOptions::default()).unwrap();
            assert!(s.winning[0].is_empty());
            assert_eq!(s.winning[1].to_vec(), vec![0, 1]);
            let s = solve(&t2(), policy, &SolveOptions::default()).unwrap();
            assert_eq!(s.winning[0].to_vec(), vec![0]);
            assert!(s.winning[1].is_empty());
        }
    }

    #[test]
    fn solve_worstcase_agrees_with_oracles() {
        let g = worstcase_ppplus(4);
        let opts = SolveOptions {
            debug_checks: true,
            ..SolveOptions::default()
        };
        let reference = solve_with(&g, Solver::BruteForce, &opts).unwrap().winning;
        for solver in Solver::ALL {
            assert_eq!(solve_with(&g, solver, &opts).unwrap().winning, reference, "{solver}");
        }
    }

    #[test]
    fn iteration_cap_and_deadline() {
        let g = worstcase_ppplus(8);
        let capped = SolveOptions {
            max_iterations: 5,
            ..SolveOptions::default()
        };
        assert_eq!(solve(&g, Policy::PpPlus, &capped).unwrap_err(), SolveError::NonTermination(5));
        let expired = SolveOptions {
            deadline: Some(Instant::now()),
            deadline_poll: 1,
            ..SolveOptions::default()
        };
        assert_eq!(solve(&g, Policy::PpPlus, &expired).unwrap_err(), SolveError::Timeout);
    }

    #[test]
    fn guard_maps_to_region_error() {
        let g = random_game(&RandomSpec { n: 60, k: 10, d: 2, seed: 5 }).unwrap();
        let err = solve_with(&g, Solver::BruteForce, &SolveOptions::default()).unwrap_err();
        assert!(err.is_guard());
    }

    #[test]
    fn solver_names_round_trip() {
        for s in Solver::ALL {
            assert_eq!(s.name().parse::<Solver>().unwrap(), s);
        }
        assert!("zielonka".parse::<Solver>().is_err());
    }
}
