//! Region functions, their restrictions and maximisation, best escape
//! priorities and an oracle-backed region validity check.

use thiserror::Error;

use crate::arena::{Game, Player, PositionSpec, Priority, SubgameView};
use crate::baseline::{brute_force, OracleError};
use crate::setops::{escape_within, Attractor, PositionSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegionError {
    #[error("the region has no opponent move leaving it")]
    NoExit,
    #[error("position {0} is reached by an escaping move but has no measure")]
    MissingMeasure(usize),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Filters used by [`PartialRegionFunction::restrict`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    AtLeast,
    Above,
    Below,
    SameParity,
}

impl Relation {
    pub fn holds(self, q: Priority, p: Priority) -> bool {
        match self {
            Relation::AtLeast => q >= p,
            Relation::Above => q > p,
            Relation::Below => q < p,
            Relation::SameParity => q.same_parity(p),
        }
    }
}

/// A total map from positions to measures. Entries of positions outside the
/// current search game are ignored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionFunction {
    measure: Vec<Priority>,
}

impl RegionFunction {
    /// The priority function of the game.
    pub fn from_priorities(game: &Game) -> Self {
        Self {
            measure: game.priorities().to_vec(),
        }
    }

    pub fn from_vec(measure: Vec<Priority>) -> Self {
        Self { measure }
    }

    pub fn get(&self, v: usize) -> Priority {
        self.measure[v]
    }

    pub fn set(&mut self, v: usize, q: Priority) {
        self.measure[v] = q;
    }

    pub fn as_slice(&self) -> &[Priority] {
        &self.measure
    }

    /// `r⁻¹(q)` within `domain`.
    pub fn level(&self, domain: &PositionSet, q: Priority) -> PositionSet {
        PositionSet::from_positions(domain.capacity(), domain.iter().filter(|&v| self.measure[v] == q))
    }

    /// Distinct measures of the positions in `domain`, highest first.
    pub fn range_desc(&self, domain: &PositionSet) -> Vec<Priority> {
        let mut out: Vec<Priority> = domain.iter().map(|v| self.measure[v]).collect();
        out.sort_unstable_by(|a, b| b.cmp(a));
        out.dedup();
        out
    }

    /// The partial map obtained by restricting to `domain`.
    pub fn to_partial(&self, domain: &PositionSet) -> PartialRegionFunction {
        let mut out = PartialRegionFunction::new(self.measure.len());
        for v in domain.iter() {
            out.insert(v, self.measure[v]);
        }
        out
    }

    /// `self ⊎ f`: overrides the measures on `dom(f)`.
    pub fn overlay(&mut self, f: &PartialRegionFunction) {
        for (v, q) in f.entries() {
            self.measure[v] = q;
        }
    }
}

/// A partial map from positions to measures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialRegionFunction {
    target: Vec<Option<Priority>>,
}

impl PartialRegionFunction {
    pub fn new(capacity: usize) -> Self {
        Self {
            target: vec![None; capacity],
        }
    }

    pub fn from_entries(capacity: usize, entries: impl IntoIterator<Item = (usize, Priority)>) -> Self {
        let mut out = Self::new(capacity);
        for (v, q) in entries {
            out.insert(v, q);
        }
        out
    }

    pub fn capacity(&self) -> usize {
        self.target.len()
    }

    pub fn get(&self, v: usize) -> Option<Priority> {
        self.target[v]
    }

    pub fn insert(&mut self, v: usize, q: Priority) {
        self.target[v] = Some(q);
    }

    pub fn remove(&mut self, v: usize) -> Option<Priority> {
        self.target[v].take()
    }

    pub fn clear(&mut self) {
        self.target.fill(None);
    }

    pub fn is_empty(&self) -> bool {
        self.target.iter().all(Option::is_none)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, Priority)> + '_ {
        self.target.iter().enumerate().filter_map(|(v, q)| q.map(|q| (v, q)))
    }

    pub fn domain(&self) -> PositionSet {
        PositionSet::from_positions(self.capacity(), self.entries().map(|(v, _)| v))
    }

    pub fn range(&self) -> Vec<Priority> {
        let mut out: Vec<Priority> = self.entries().map(|(_, q)| q).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// `f⁻¹(q)`.
    pub fn preimage(&self, q: Priority) -> PositionSet {
        PositionSet::from_positions(self.capacity(), self.entries().filter(|&(_, x)| x == q).map(|(v, _)| v))
    }

    /// `f ↾ { v | f(v) rel p }`.
    pub fn restrict(&self, rel: Relation, p: Priority) -> PartialRegionFunction {
        Self {
            target: self
                .target
                .iter()
                .map(|q| q.filter(|&q| rel.holds(q, p)))
                .collect(),
        }
    }
}

/// Completion `f ⊎ g`: equal to `g` on its domain and to `f` elsewhere.
pub fn completion(f: &PartialRegionFunction, g: &PartialRegionFunction) -> PartialRegionFunction {
    PartialRegionFunction {
        target: f.target.iter().zip(&g.target).map(|(a, b)| b.or(*a)).collect(),
    }
}

/// `G^{≤p}_r`: the view without the positions whose measure exceeds `p`.
pub fn subgame_at<'g>(view: &SubgameView<'g>, r: &RegionFunction, p: Priority) -> SubgameView<'g> {
    let keep = PositionSet::from_positions(view.game().len(), view.positions().filter(|&v| r.get(v) <= p));
    view.restrict_to(&keep)
}

/// The maximisation of `r` over the view: levels are processed from the
/// highest measure down, each replaced by its attractor in the subgame left
/// by the levels above it.
pub fn maximise(view: &SubgameView<'_>, r: &RegionFunction) -> RegionFunction {
    let game = view.game();
    let mut attractor = Attractor::new(game.len());
    let mut m = r.clone();
    let mut remaining = view.alive().clone();
    for q in r.range_desc(view.alive()) {
        let seeds = r.level(&remaining, q);
        if seeds.is_empty() {
            continue;
        }
        let level = attractor.compute(game, &remaining, q.player(), &seeds);
        for v in level.iter() {
            m.set(v, q);
        }
        remaining.difference_with(&level);
    }
    m
}

/// Best escape priority `bep_ᾱ(R, r)` for the α-region `region`: the least
/// measure among positions reached by opponent moves leaving the region.
pub fn bep(
    view: &SubgameView<'_>,
    region: &PositionSet,
    alpha: Player,
    measure: impl Fn(usize) -> Option<Priority>,
) -> Result<Priority, RegionError> {
    let game = view.game();
    let mut best: Option<Priority> = None;
    for v in region.iter().filter(|&v| game.owner(v) == alpha.dual()) {
        for u in view.successors(v).filter(|&u| !region.contains(u)) {
            let q = measure(u).ok_or(RegionError::MissingMeasure(u))?;
            best = Some(best.map_or(q, |b| b.min(q)));
        }
    }
    best.ok_or(RegionError::NoExit)
}

/// Positions allowed in the region passed to [`verify_region`].
pub const REGION_ORACLE_LIMIT: usize = 16;

/// Checks that `region` is an α-region of the view with respect to the
/// original priorities: the view's top priority has parity α, every
/// opponent escape sits at that priority, and α wins every play that stays
/// in the region (decided by brute force).
pub fn verify_region(view: &SubgameView<'_>, region: &PositionSet, alpha: Player) -> Result<bool, RegionError> {
    guard_region(region)?;
    let game = view.game();
    match view.max_priority().ok() {
        Some(top) => verify_region_at(view, region, alpha, top, |v| game.priority(v)),
        None => Ok(false),
    }
}

/// Checks that `region` is an α-region at measure `level`: `level` has
/// parity α, every opponent escape has measure `level` and α wins every play
/// that stays in the region on the original priorities.
pub fn verify_region_at(
    view: &SubgameView<'_>,
    region: &PositionSet,
    alpha: Player,
    level: Priority,
    measure: impl Fn(usize) -> Priority,
) -> Result<bool, RegionError> {
    guard_region(region)?;
    if level.player() != alpha {
        return Ok(false);
    }
    let escapes = escape_within(view.game(), view.alive(), alpha.dual(), region);
    if escapes.iter().any(|v| measure(v) != level) {
        return Ok(false);
    }
    is_quasi_dominion(view, region, alpha)
}

fn guard_region(region: &PositionSet) -> Result<(), RegionError> {
    if region.len() > REGION_ORACLE_LIMIT {
        return Err(OracleError::GuardExceeded(format!(
            "region of {} positions exceeds the limit of {REGION_ORACLE_LIMIT}",
            region.len()
        ))
        .into());
    }
    Ok(())
}

/// Decides whether α can force every play that never leaves `region` to be
/// won by α. Leaving moves of the opponent, and forced exits of α, are
/// redirected to a fresh sink won by α; other leaving moves of α are dropped.
pub fn is_quasi_dominion(view: &SubgameView<'_>, region: &PositionSet, alpha: Player) -> Result<bool, RegionError> {
    let game = view.game();
    let local: Vec<usize> = region.iter().collect();
    if local.is_empty() {
        return Ok(true);
    }
    let sink = local.len();
    let mut dense = vec![usize::MAX; game.len()];
    for (i, &v) in local.iter().enumerate() {
        dense[v] = i;
    }
    let top = local.iter().map(|&v| game.priority(v).0).max().unwrap();
    let sink_priority = if (top + 1) % 2 == alpha.index() as u32 { top + 1 } else { top + 2 };

    let mut spec = Vec::with_capacity(sink + 1);
    for &v in &local {
        let inside: Vec<usize> = view.successors(v).filter(|&u| region.contains(u)).map(|u| dense[u]).collect();
        let leaves = view.successors(v).any(|u| !region.contains(u));
        let mut moves = inside;
        if game.owner(v) == alpha.dual() {
            if leaves {
                moves.push(sink);
            }
        } else if moves.is_empty() {
            moves.push(sink);
        }
        if moves.is_empty() {
            // a dead end of the view: no play can continue from here
            moves.push(sink);
        }
        spec.push(PositionSpec::new(game.priority(v).0, game.owner(v), moves));
    }
    spec.push(PositionSpec::new(sink_priority, alpha, vec![sink]));
    let reduced = Game::build(spec).expect("reduced game is left-total");
    let w = brute_force(&reduced.full_view())?;
    Ok((0..sink).all(|i| w[alpha.index()].contains(i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::tests::t1;
    use crate::generators::{body_index, head_index, random_game, worstcase_ppplus, RandomSpec};
    use proptest::prelude::*;

    fn pf(entries: &[(usize, u32)]) -> PartialRegionFunction {
        PartialRegionFunction::from_entries(5, entries.iter().map(|&(v, q)| (v, Priority(q))))
    }

    // positions a=0, c=1, e=2
    #[test]
    fn restrict_examples() {
        let r = pf(&[(0, 6), (1, 4), (2, 2)]);
        assert_eq!(r.restrict(Relation::Above, Priority(4)), pf(&[(0, 6)]));
        assert_eq!(r.restrict(Relation::SameParity, Priority(4)), r);
        assert_eq!(pf(&[(0, 6)]).restrict(Relation::Below, Priority(0)), pf(&[]));
    }

    #[test]
    fn completion_examples() {
        assert_eq!(completion(&pf(&[(0, 1)]), &pf(&[(0, 2)])), pf(&[(0, 2)]));
        assert_eq!(completion(&pf(&[(0, 1)]), &pf(&[])), pf(&[(0, 1)]));
        assert_eq!(
            completion(&pf(&[(0, 1), (1, 3)]), &pf(&[(1, 7), (2, 0)])),
            pf(&[(0, 1), (1, 7), (2, 0)])
        );
    }

    #[test]
    fn subgame_at_worstcase() {
        let g = worstcase_ppplus(4);
        let r = RegionFunction::from_priorities(&g);
        let full = g.full_view();
        assert_eq!(subgame_at(&full, &r, Priority(9)).len(), 9);
        let low = subgame_at(&full, &r, Priority(4));
        assert_eq!(low.positions().collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
        let mut r2 = r.clone();
        for v in g.positions() {
            r2.set(v, Priority(g.priority(v).0 + 1));
        }
        assert!(subgame_at(&full, &r2, Priority(0)).is_empty());
    }

    #[test]
    fn maximise_worstcase_is_identity() {
        let g = worstcase_ppplus(4);
        let r = RegionFunction::from_priorities(&g);
        assert_eq!(maximise(&g.full_view(), &r), r);
    }

    #[test]
    fn maximise_pulls_lower_position_up() {
        // 0: priority 4 owner 0 loop; 1: priority 2 owner 1 only move to 0;
        // 2: priority 1 owner 1 loop. Level 4 attracts position 1.
        let g = Game::build(vec![
            PositionSpec::new(4, Player::Even, vec![0]),
            PositionSpec::new(2, Player::Odd, vec![0]),
            PositionSpec::new(1, Player::Odd, vec![2, 1]),
        ])
        .unwrap();
        let r = RegionFunction::from_priorities(&g);
        let m = maximise(&g.full_view(), &r);
        assert_eq!(m.as_slice(), &[Priority(4), Priority(4), Priority(1)]);
    }

    #[test]
    fn bep_running_example() {
        // e (owner 1) moves to a and c; a has measure 6, c has measure 4.
        let g = Game::build(vec![
            PositionSpec::new(6, Player::Even, vec![0]),
            PositionSpec::new(4, Player::Even, vec![1]),
            PositionSpec::new(2, Player::Odd, vec![0, 1]),
        ])
        .unwrap();
        let r = RegionFunction::from_priorities(&g);
        let region = PositionSet::from_positions(3, [2]);
        let q = bep(&g.full_view(), &region, Player::Even, |v| Some(r.get(v))).unwrap();
        assert_eq!(q, Priority(4));
    }

    #[test]
    fn bep_worstcase_bodies() {
        let g = worstcase_ppplus(4);
        let r = RegionFunction::from_priorities(&g);
        let v = g.full_view();
        let body4 = PositionSet::from_positions(g.len(), [body_index(4)]);
        assert_eq!(bep(&v, &body4, Player::Even, |u| Some(r.get(u))).unwrap(), Priority(6));
        let body3 = PositionSet::from_positions(g.len(), [body_index(3)]);
        assert_eq!(bep(&v, &body3, Player::Odd, |u| Some(r.get(u))).unwrap(), Priority(7));
        let center = PositionSet::from_positions(g.len(), [0]);
        assert_eq!(bep(&v, &center, Player::Even, |u| Some(r.get(u))), Err(RegionError::NoExit));
        assert_eq!(
            bep(&v, &body4, Player::Even, |_| None),
            Err(RegionError::MissingMeasure(head_index(4, 4)))
        );
    }

    #[test]
    fn verify_region_examples() {
        let g = worstcase_ppplus(4);
        let r = RegionFunction::from_priorities(&g);
        let low = subgame_at(&g.full_view(), &r, Priority(4));
        let body4 = PositionSet::from_positions(g.len(), [body_index(4)]);
        assert!(verify_region(&low, &body4, Player::Even).unwrap());
        let head9 = PositionSet::from_positions(g.len(), [head_index(4, 1)]);
        assert!(verify_region(&g.full_view(), &head9, Player::Odd).unwrap());

        let t = t1();
        assert!(!verify_region(&t.full_view(), &PositionSet::from_positions(2, [0]), Player::Even).unwrap());
        assert!(verify_region(&t.full_view(), &PositionSet::from_positions(2, [0, 1]), Player::Odd).unwrap());
    }

    /// Direct strategy enumeration for the quasi-dominion property: some
    /// positional α-strategy on the region such that every play consistent
    /// with it that stays in the region forever is won by α.
    fn quasi_dominion_by_enumeration(view: &SubgameView<'_>, region: &PositionSet, alpha: Player) -> bool {
        let g = view.game();
        let rs: Vec<usize> = region.iter().collect();
        let mine: Vec<usize> = rs.iter().copied().filter(|&v| g.owner(v) == alpha).collect();
        let options: Vec<Vec<Option<usize>>> = mine
            .iter()
            .map(|&v| {
                let inside: Vec<Option<usize>> =
                    view.successors(v).filter(|u| region.contains(*u)).map(Some).collect();
                if inside.is_empty() { vec![None] } else { inside }
            })
            .collect();
        let mut choice = vec![0usize; mine.len()];
        loop {
            // graph of plays staying in the region under this strategy
            let next = |v: usize| -> Vec<usize> {
                if let Some(i) = mine.iter().position(|&x| x == v) {
                    options[i][choice[i]].into_iter().collect()
                } else {
                    view.successors(v).filter(|u| region.contains(*u)).collect()
                }
            };
            // α loses iff some reachable cycle has opponent-parity maximum:
            // check every simple cycle through each position by its maximum
            let bad = rs.iter().any(|&top| {
                let tp = g.priority(top);
                if tp.player() == alpha {
                    return false;
                }
                // cycle through `top` using only positions of priority <= tp
                let allowed = |u: usize| g.priority(u) <= tp;
                let mut seen = vec![false; g.len()];
                let mut stack: Vec<usize> = next(top).into_iter().filter(|&u| allowed(u)).collect();
                while let Some(u) = stack.pop() {
                    if u == top {
                        return true;
                    }
                    if seen[u] {
                        continue;
                    }
                    seen[u] = true;
                    stack.extend(next(u).into_iter().filter(|&w| allowed(w)));
                }
                false
            });
            if !bad {
                return true;
            }
            let mut i = 0;
            loop {
                if i == mine.len() {
                    return false;
                }
                choice[i] += 1;
                if choice[i] < options[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }

    /// Exhaustive check over all subsets of small random games.
    #[test]
    fn quasi_dominion_double_oracle() {
        for seed in 0..120u64 {
            let n = 3 + (seed % 5) as usize;
            let g = random_game(&RandomSpec { n, k: 1 + (seed as usize % n), d: 1 + (seed as usize % 2), seed }).unwrap();
            let view = g.full_view();
            for mask in 1u32..(1 << n) {
                let region = PositionSet::from_positions(n, (0..n).filter(|i| mask >> i & 1 == 1));
                for alpha in [Player::Even, Player::Odd] {
                    assert_eq!(
                        is_quasi_dominion(&view, &region, alpha).unwrap(),
                        quasi_dominion_by_enumeration(&view, &region, alpha),
                        "seed {seed} mask {mask:b} alpha {alpha}"
                    );
                }
            }
        }
    }

    fn game_and_function() -> impl Strategy<Value = (Game, RegionFunction, u32)> {
        (3usize..12, any::<u64>(), any::<u64>()).prop_map(|(n, seed, bumps)| {
            let g = random_game(&RandomSpec { n, k: n, d: 2, seed }).unwrap();
            let mut r = RegionFunction::from_priorities(&g);
            for v in 0..n {
                let bump = (bumps >> (2 * (v % 32))) & 3;
                r.set(v, Priority(r.get(v).0 + bump as u32));
            }
            (g, r, (bumps % (n as u64 + 3)) as u32)
        })
    }

    /// Ascending sweeps of the defining equation until nothing changes.
    fn maximise_by_fixpoint(view: &SubgameView<'_>, r: &RegionFunction) -> RegionFunction {
        let levels = {
            let mut l = r.range_desc(view.alive());
            l.reverse();
            l
        };
        let mut m = r.clone();
        for _ in 0..=levels.len() {
            let before = m.clone();
            for &q in &levels {
                let sub = subgame_at(view, &m, q);
                let seeds = r.level(sub.alive(), q);
                let level = crate::setops::atr(&sub, q.player(), &seeds);
                for v in view.positions() {
                    if level.contains(v) {
                        m.set(v, q);
                    } else if m.get(v) == q {
                        // dropped from this level: fall back to its own measure
                        m.set(v, r.get(v));
                    }
                }
            }
            if m == before {
                break;
            }
        }
        m
    }

    proptest! {
        #[test]
        fn restrict_completion_splits((g, r, p) in game_and_function()) {
            let f = r.to_partial(g.full_view().alive());
            let p = Priority(p);
            prop_assert_eq!(completion(&f.restrict(Relation::AtLeast, p), &f.restrict(Relation::Below, p)), f);
        }

        #[test]
        fn maximise_laws((g, r, _p) in game_and_function()) {
            let view = g.full_view();
            let m = maximise(&view, &r);
            prop_assert_eq!(&maximise(&view, &m), &m);
            for q in m.range_desc(view.alive()) {
                let sub = subgame_at(&view, &m, q);
                let level = m.level(sub.alive(), q);
                prop_assert_eq!(&crate::setops::atr(&sub, q.player(), &level), &level);
            }
            prop_assert_eq!(&maximise_by_fixpoint(&view, &r), &m);
        }
    }
}
