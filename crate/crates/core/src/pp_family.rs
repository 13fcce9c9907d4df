//! Priority promotion dominion spaces: PP, PP⁺ and delayed promotion (DP).
//!
//! All three share the query operator: the attractor, in the subgame of the
//! current state, of the positions recorded at the current priority. They
//! differ in what happens when that region turns out to be closed in its
//! subgame but open in the search game.

use std::collections::BTreeSet;

use crate::arena::{Priority, SubgameView};
use crate::regions::{bep, maximise, subgame_at, verify_region_at, PartialRegionFunction, RegionFunction};
use crate::searcher::{is_guard, DominionSpace, Recorder, Region, SolveError, TraceEvent};
use crate::setops::{is_closed_within, Attractor, PositionSet};

/// Which lower regions a promotion destroys.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResetRule {
    /// Every region with lower measure (original PP).
    All,
    /// Only regions whose measure has the opposite parity of the target.
    Opponent,
}

/// A PP / PP⁺ state: region function and current priority.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PpState {
    pub r: RegionFunction,
    pub p: Priority,
}

/// A DP state: a PP⁺ state plus delayed promotions and the targets of the
/// instant promotions performed so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpState {
    pub base: PpState,
    pub rhat: PartialRegionFunction,
    pub promos: BTreeSet<Priority>,
}

/// Shared machinery over one search game.
struct Engine<'a, 'g> {
    view: &'a SubgameView<'g>,
    attractor: Attractor,
}

impl<'a, 'g> Engine<'a, 'g> {
    fn new(view: &'a SubgameView<'g>) -> Self {
        Self {
            view,
            attractor: Attractor::new(view.game().len()),
        }
    }

    fn top(&self) -> PpState {
        PpState {
            r: RegionFunction::from_priorities(self.view.game()),
            p: self.view.max_priority().expect("search game is non-empty"),
        }
    }

    /// Alive positions of `G^{≤p}_r`.
    fn subgame_mask(&self, r: &RegionFunction, p: Priority) -> PositionSet {
        PositionSet::from_positions(self.view.game().len(), self.view.positions().filter(|&v| r.get(v) <= p))
    }

    fn query(&mut self, s: &PpState) -> Region {
        let mask = self.subgame_mask(&s.r, s.p);
        let seeds = s.r.level(&mask, s.p);
        debug_assert!(!seeds.is_empty(), "current priority has no positions");
        let player = s.p.player();
        let set = self.attractor.compute(self.view.game(), &mask, player, &seeds);
        Region { set, player }
    }

    fn open_in_subgame(&self, s: &PpState, region: &Region) -> (bool, PositionSet) {
        let mask = self.subgame_mask(&s.r, s.p);
        let closed = is_closed_within(self.view.game(), &mask, region.player.dual(), &region.set);
        (!closed, mask)
    }

    /// Highest measure strictly below `p` among alive positions.
    fn next_below(&self, r: &RegionFunction, p: Priority) -> Option<Priority> {
        self.view.positions().map(|v| r.get(v)).filter(|&q| q < p).max()
    }

    fn bep_checked(
        &self,
        region: &Region,
        p: Priority,
        measure: impl Fn(usize) -> Option<Priority>,
    ) -> Result<Priority, SolveError> {
        let q = bep(self.view, &region.set, region.player, measure)?;
        if q.player() != region.player || q <= p {
            return Err(SolveError::InvariantViolation(format!(
                "best escape priority {q} of a region at {p} for player {} has the wrong parity or is not higher",
                region.player
            )));
        }
        Ok(q)
    }

    /// Returns the positions below `to` that lose their measure under the
    /// reset rule, skipping `exclude`.
    fn reset_victims(&self, r: &RegionFunction, to: Priority, rule: ResetRule, exclude: &PositionSet) -> Vec<usize> {
        let game = self.view.game();
        self.view
            .positions()
            .filter(|&v| !exclude.contains(v))
            .filter(|&v| {
                let q = r.get(v);
                q < to && q != game.priority(v) && (rule == ResetRule::All || !q.same_parity(to))
            })
            .collect()
    }

    /// Resets the given positions to their original priorities, reporting
    /// each affected level as the region it held before the reset.
    fn apply_resets(&self, r: &mut RegionFunction, victims: &[usize], exclude: &PositionSet, rec: &mut Recorder) {
        if rec.tracing() && !victims.is_empty() {
            let levels: BTreeSet<Priority> = victims.iter().map(|&v| r.get(v)).collect();
            for &level in levels.iter().rev() {
                let region: Vec<usize> = self
                    .view
                    .positions()
                    .filter(|&v| !exclude.contains(v) && r.get(v) == level)
                    .collect();
                rec.emit(|| TraceEvent::Reset { level, region });
            }
        }
        let game = self.view.game();
        for &v in victims {
            r.set(v, game.priority(v));
        }
        rec.stats.resets += victims.len() as u64;
    }

    /// Promotes `region` from measure `from` to `to` and resets lower
    /// regions according to `rule`.
    fn promote(&self, r: &mut RegionFunction, region: &PositionSet, from: Priority, to: Priority, rule: ResetRule, rec: &mut Recorder) {
        rec.stats.promotions += 1;
        rec.emit(|| TraceEvent::Promotion {
            region: region.to_vec(),
            from,
            to,
        });
        let victims = self.reset_victims(r, to, rule, region);
        self.apply_resets(r, &victims, region, rec);
        for v in region.iter() {
            r.set(v, to);
        }
    }

    fn assign(r: &mut RegionFunction, region: &PositionSet, p: Priority) {
        for v in region.iter() {
            r.set(v, p);
        }
    }

    fn precedes(&self, s1: &PpState, s2: &PpState) -> bool {
        precedes_on(self.view.alive(), s1, s2)
    }

    fn check_state(&self, s: &PpState) -> Result<(), String> {
        let view = self.view;
        if !view.positions().any(|v| s.r.get(v) == s.p) {
            return Err(format!("current priority {} is not a recorded measure", s.p));
        }
        let game = view.game();
        if let Some(v) = view.positions().find(|&v| s.r.get(v) < game.priority(v)) {
            return Err(format!("position {v} has a measure below its priority"));
        }
        let m = maximise(view, &s.r);
        if let Some(v) = view
            .positions()
            .find(|&v| (s.r.get(v) > s.p || m.get(v) > s.p) && s.r.get(v) != m.get(v))
        {
            return Err(format!(
                "region function is not maximal above {}: position {v} has measure {} but {} after maximisation",
                s.p,
                s.r.get(v),
                m.get(v)
            ));
        }
        for q in m.range_desc(view.alive()) {
            let sub = subgame_at(view, &m, q);
            let level = s.r.level(sub.alive(), q);
            if level.is_empty() {
                continue;
            }
            match verify_region_at(&sub, &level, q.player(), q, |v| s.r.get(v)) {
                Ok(true) => {}
                Ok(false) => return Err(format!("level {q} ({level:?}) is not a region in its subgame")),
                Err(e) if is_guard(&e) => {}
                Err(e) => return Err(e.to_string()),
            }
        }
        Ok(())
    }

    /// Clause (1): the pair is a region of the subgame at the state. Clause
    /// (2), when `must_be_maximal`: it is the attractor of the current level.
    fn check_compatible(&self, s: &PpState, region: &Region, must_be_maximal: bool) -> Result<(), String> {
        let sub = subgame_at(self.view, &s.r, s.p);
        if region.player != s.p.player() {
            return Err(format!("region player {} does not match priority {}", region.player, s.p));
        }
        if !region.set.is_subset(sub.alive()) {
            return Err("region leaves the subgame of the state".into());
        }
        match verify_region_at(&sub, &region.set, region.player, s.p, |v| s.r.get(v)) {
            Ok(true) => {}
            Ok(false) => return Err(format!("queried set {:?} is not a region", region.set)),
            Err(e) if is_guard(&e) => {}
            Err(e) => return Err(e.to_string()),
        }
        if must_be_maximal {
            let seeds = s.r.level(sub.alive(), s.p);
            let expected = Attractor::new(self.view.game().len()).compute(sub.game(), sub.alive(), region.player, &seeds);
            if expected != region.set {
                return Err(format!("open region {:?} is not the attractor of level {}", region.set, s.p));
            }
        }
        Ok(())
    }
}

/// The state order: `s1 ≺ s2` iff either some measure `q ≥ p1` of `s1`
/// has the same regions above it in both states and a strictly larger
/// region at `q` in `s1`, or the region functions agree and `p1 < p2`.
pub fn precedes(view: &SubgameView<'_>, s1: &PpState, s2: &PpState) -> bool {
    precedes_on(view.alive(), s1, s2)
}

fn precedes_on(alive: &PositionSet, s1: &PpState, s2: &PpState) -> bool {
    let (r1, r2) = (&s1.r, &s2.r);
    // the highest level touched by a difference is the only candidate for q
    let pivot = alive
        .iter()
        .filter(|&v| r1.get(v) != r2.get(v))
        .map(|v| r1.get(v).max(r2.get(v)))
        .max();
    match pivot {
        None => s1.p < s2.p,
        Some(q) => {
            q >= s1.p
                && alive.iter().any(|v| r1.get(v) == q)
                && alive.iter().all(|v| r2.get(v) != q || r1.get(v) == q)
                && alive.iter().any(|v| r1.get(v) == q && r2.get(v) != q)
        }
    }
}

/// Dominion space of PP (reset everything below a promotion target) or PP⁺
/// (reset only the opponent's regions).
pub struct PromotionSpace<'a, 'g> {
    engine: Engine<'a, 'g>,
    rule: ResetRule,
}

impl<'a, 'g> PromotionSpace<'a, 'g> {
    pub fn new(view: &'a SubgameView<'g>, rule: ResetRule) -> Self {
        Self {
            engine: Engine::new(view),
            rule,
        }
    }
}

impl DominionSpace for PromotionSpace<'_, '_> {
    type State = PpState;

    fn view(&self) -> &SubgameView<'_> {
        self.engine.view
    }

    fn top(&mut self) -> PpState {
        self.engine.top()
    }

    fn query(&mut self, state: &PpState) -> Region {
        self.engine.query(state)
    }

    fn successor(&mut self, state: PpState, region: Region, rec: &mut Recorder) -> Result<PpState, SolveError> {
        let PpState { mut r, p } = state;
        let (open, _) = self.engine.open_in_subgame(&PpState { r: r.clone(), p }, &region);
        if open {
            Engine::assign(&mut r, &region.set, p);
            let next = self
                .engine
                .next_below(&r, p)
                .ok_or_else(|| SolveError::InvariantViolation("open region covers its whole subgame".into()))?;
            return Ok(PpState { r, p: next });
        }
        let q = self.engine.bep_checked(&region, p, |v| Some(r.get(v)))?;
        self.engine.promote(&mut r, &region.set, p, q, self.rule, rec);
        Ok(PpState { r, p: q })
    }

    fn precedes(&self, s1: &PpState, s2: &PpState) -> bool {
        self.engine.precedes(s1, s2)
    }

    fn check_state(&self, state: &PpState) -> Result<(), String> {
        self.engine.check_state(state)
    }

    fn check_compatible(&self, state: &PpState, region: &Region) -> Result<(), String> {
        let (open, _) = self.engine.open_in_subgame(state, region);
        self.engine.check_compatible(state, region, open)
    }
}

/// Whether a promotion to `q` is locked in `s`: `q` overtakes a performed
/// promotion of the opposite parity, or it lands inside the span of a
/// delayed one (above the position's measure, at or below its target).
pub fn locked(q: Priority, s: &DpState) -> bool {
    locked_parts(q, &s.base.r, &s.rhat, &s.promos)
}

fn locked_parts(q: Priority, r: &RegionFunction, rhat: &PartialRegionFunction, promos: &BTreeSet<Priority>) -> bool {
    let overtakes = promos.iter().any(|&l| !l.same_parity(q) && l < q);
    overtakes || rhat.entries().any(|(v, t)| r.get(v) < q && q <= t)
}

/// The delayed-promotion dominion space.
pub struct DelayedSpace<'a, 'g> {
    engine: Engine<'a, 'g>,
}

impl<'a, 'g> DelayedSpace<'a, 'g> {
    pub fn new(view: &'a SubgameView<'g>) -> Self {
        Self {
            engine: Engine::new(view),
        }
    }

    fn combined(s_r: &RegionFunction, rhat: &PartialRegionFunction, v: usize) -> Priority {
        rhat.get(v).unwrap_or_else(|| s_r.get(v))
    }

    fn check_alignment(&self, s: &DpState) -> Result<(), String> {
        let r = &s.base.r;
        for (v, t) in s.rhat.entries() {
            let q = r.get(v);
            if !(q > s.base.p && q < t && q.same_parity(t)) {
                return Err(format!(
                    "delayed entry {v}->{t} is not aligned (measure {q}, current priority {})",
                    s.base.p
                ));
            }
        }
        for t in s.rhat.range() {
            let sub = subgame_at(self.engine.view, r, t);
            let mut set = r.level(sub.alive(), t);
            set.union_with(&s.rhat.preimage(t));
            match verify_region_at(&sub, &set, t.player(), t, |v| Self::combined(r, &s.rhat, v)) {
                Ok(true) => {}
                Ok(false) => return Err(format!("delayed level {t} ({set:?}) is not a region")),
                Err(e) if is_guard(&e) => {}
                Err(e) => return Err(e.to_string()),
            }
        }
        Ok(())
    }
}

impl DominionSpace for DelayedSpace<'_, '_> {
    type State = DpState;

    fn view(&self) -> &SubgameView<'_> {
        self.engine.view
    }

    fn top(&mut self) -> DpState {
        DpState {
            base: self.engine.top(),
            rhat: PartialRegionFunction::new(self.engine.view.game().len()),
            promos: BTreeSet::new(),
        }
    }

    fn query(&mut self, state: &DpState) -> Region {
        self.engine.query(&state.base)
    }

    fn successor(&mut self, state: DpState, region: Region, rec: &mut Recorder) -> Result<DpState, SolveError> {
        let DpState {
            base: PpState { mut r, p },
            mut rhat,
            mut promos,
        } = state;
        let engine = &self.engine;
        let probe = PpState { r, p };
        let (open, mask) = engine.open_in_subgame(&probe, &region);
        r = probe.r;

        if open {
            Engine::assign(&mut r, &region.set, p);
            let next = engine
                .next_below(&r, p)
                .ok_or_else(|| SolveError::InvariantViolation("open region covers its whole subgame".into()))?;
            return Ok(DpState {
                base: PpState { r, p: next },
                rhat,
                promos,
            });
        }

        let q = engine.bep_checked(&region, p, |v| Some(Self::combined(&r, &rhat, v)))?;
        if !locked_parts(q, &r, &rhat, &promos) {
            // instant promotion; delayed entries below q sit on levels that
            // are either reset or below the new current priority
            let stale: Vec<usize> = rhat.entries().filter(|&(v, _)| r.get(v) < q).map(|(v, _)| v).collect();
            for v in stale {
                rhat.remove(v);
            }
            engine.promote(&mut r, &region.set, p, q, ResetRule::Opponent, rec);
            promos.insert(q);
            return Ok(DpState {
                base: PpState { r, p: q },
                rhat,
                promos,
            });
        }

        Engine::assign(&mut r, &region.set, p);
        for v in region.set.iter() {
            rhat.insert(v, q);
        }
        rec.stats.delayed += 1;
        rec.emit(|| TraceEvent::Delay {
            region: region.set.to_vec(),
            from: p,
            to: q,
        });

        if region.set.len() < mask.len() {
            let next = engine
                .next_below(&r, p)
                .ok_or_else(|| SolveError::InvariantViolation("no priority left below a delayed region".into()))?;
            return Ok(DpState {
                base: PpState { r, p: next },
                rhat,
                promos,
            });
        }

        // the subgame is exhausted: apply the highest delayed promotion
        // together with every delayed promotion of the same parity
        let top = rhat.range().into_iter().max().expect("a delayed promotion was just recorded");
        let promoted = PositionSet::from_positions(
            r.as_slice().len(),
            rhat.entries().filter(|&(_, t)| t.same_parity(top)).map(|(v, _)| v),
        );
        let applied_targets = rhat.range().into_iter().filter(|t| t.same_parity(top)).count();
        r.overlay(&rhat);
        rec.stats.flushes += 1;
        rec.stats.promotions += applied_targets as u64;
        rec.emit(|| TraceEvent::Flush {
            to: top,
            promoted: promoted.to_vec(),
        });
        let victims = engine.reset_victims(&r, top, ResetRule::Opponent, &promoted);
        engine.apply_resets(&mut r, &victims, &promoted, rec);
        rhat.clear();
        promos.clear();
        Ok(DpState {
            base: PpState { r, p: top },
            rhat,
            promos,
        })
    }

    fn precedes(&self, s1: &DpState, s2: &DpState) -> bool {
        self.engine.precedes(&s1.base, &s2.base)
    }

    fn check_state(&self, state: &DpState) -> Result<(), String> {
        self.engine.check_state(&state.base)?;
        self.check_alignment(state)
    }

    fn check_compatible(&self, state: &DpState, region: &Region) -> Result<(), String> {
        let (open, _) = self.engine.open_in_subgame(&state.base, region);
        let must_be_maximal = open || {
            let r = &state.base.r;
            match bep(self.engine.view, &region.set, region.player, |v| {
                Some(Self::combined(r, &state.rhat, v))
            }) {
                Ok(q) => locked(q, state),
                Err(e) => return Err(e.to_string()),
            }
        };
        self.engine.check_compatible(&state.base, region, must_be_maximal)
    }
}
