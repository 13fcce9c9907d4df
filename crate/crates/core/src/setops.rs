//! Position sets and the one-step/fixpoint operators over subgame views:
//! controlled predecessor, attractor, escape set and interior.

use std::fmt;

use bitvec::prelude::*;

use crate::arena::{Game, Player, SubgameView};

/// A set of positions of a base game, stored as a fixed-capacity bit vector.
/// Iteration is in ascending index order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PositionSet {
    bits: BitVec<usize, Lsb0>,
}

impl PositionSet {
    pub fn empty(capacity: usize) -> Self {
        Self {
            bits: bitvec![usize, Lsb0; 0; capacity],
        }
    }

    pub fn full(capacity: usize) -> Self {
        Self {
            bits: bitvec![usize, Lsb0; 1; capacity],
        }
    }

    pub fn from_positions(capacity: usize, positions: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::empty(capacity);
        for v in positions {
            set.insert(v);
        }
        set
    }

    pub fn capacity(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.bits[v]
    }

    /// Returns whether the position was newly added.
    pub fn insert(&mut self, v: usize) -> bool {
        !self.bits.replace(v, true)
    }

    pub fn remove(&mut self, v: usize) -> bool {
        self.bits.replace(v, false)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.not_any()
    }

    pub fn clear(&mut self) {
        self.bits.fill(false);
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn union_with(&mut self, other: &PositionSet) {
        self.bits |= &other.bits;
    }

    pub fn intersect_with(&mut self, other: &PositionSet) {
        self.bits &= &other.bits;
    }

    pub fn difference_with(&mut self, other: &PositionSet) {
        for v in other.iter() {
            self.bits.set(v, false);
        }
    }

    pub fn is_subset(&self, other: &PositionSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn is_disjoint(&self, other: &PositionSet) -> bool {
        self.iter().all(|v| !other.contains(v))
    }
}

impl fmt::Debug for PositionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Controlled predecessor `pre_α(V)` in the view.
pub fn pre(view: &SubgameView<'_>, player: Player, target: &PositionSet) -> PositionSet {
    let game = view.game();
    let mut out = PositionSet::empty(game.len());
    for u in view.positions() {
        let hit = if game.owner(u) == player {
            view.successors(u).any(|w| target.contains(w))
        } else {
            view.successors(u).all(|w| target.contains(w))
        };
        if hit {
            out.insert(u);
        }
    }
    out
}

/// Escape set `esc_α(V) = pre_α(alive \ V) ∩ V`: the positions of `V` from
/// which player α can leave `V` in one move.
pub fn esc(view: &SubgameView<'_>, player: Player, set: &PositionSet) -> PositionSet {
    escape_within(view.game(), view.alive(), player, set)
}

/// Escape set over an explicit domain mask instead of a view.
pub(crate) fn escape_within(game: &Game, domain: &PositionSet, player: Player, set: &PositionSet) -> PositionSet {
    let mut out = PositionSet::empty(game.len());
    for u in set.iter() {
        let mut outside = game.successors(u).iter().filter(|&&w| domain.contains(w)).map(|&w| !set.contains(w));
        let hit = if game.owner(u) == player {
            outside.any(|o| o)
        } else {
            outside.all(|o| o)
        };
        if hit {
            out.insert(u);
        }
    }
    out
}

/// Returns whether `esc_α(V)` is empty, without materialising it.
pub(crate) fn is_closed_within(game: &Game, domain: &PositionSet, player: Player, set: &PositionSet) -> bool {
    set.iter().all(|u| {
        let mut inside = game.successors(u).iter().filter(|&&w| domain.contains(w)).map(|&w| set.contains(w));
        if game.owner(u) == player {
            inside.all(|i| i)
        } else {
            inside.any(|i| i)
        }
    })
}

/// Interior `int_α(V) = (V ∩ Ps_α) \ esc_α(V)`.
pub fn interior(view: &SubgameView<'_>, player: Player, set: &PositionSet) -> PositionSet {
    let escapes = esc(view, player, set);
    let game = view.game();
    PositionSet::from_positions(
        game.len(),
        set.iter().filter(|&v| game.owner(v) == player && !escapes.contains(v)),
    )
}

/// Attractor `atr_α(V)` in the view.
pub fn atr(view: &SubgameView<'_>, player: Player, target: &PositionSet) -> PositionSet {
    Attractor::new(view.game().len()).compute(view.game(), view.alive(), player, target)
}

/// Reusable scratch space for attractor computations.
///
/// Uses the counter-based worklist algorithm. Out-degree counters are
/// computed lazily the first time an opponent position is reached, so a
/// call costs time proportional to the moves around the attractor rather
/// than the whole domain.
#[derive(Clone, Debug)]
pub struct Attractor {
    queue: Vec<usize>,
    remaining: Vec<u32>,
    stamp: Vec<u32>,
    epoch: u32,
}

impl Attractor {
    pub fn new(capacity: usize) -> Self {
        Self {
            queue: Vec::new(),
            remaining: vec![0; capacity],
            stamp: vec![0; capacity],
            epoch: 0,
        }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        self.epoch
    }

    /// Least fixpoint of `X ↦ target ∪ pre_α(X)` over the positions in
    /// `domain`. `target` is assumed to lie inside `domain`.
    pub fn compute(&mut self, game: &Game, domain: &PositionSet, player: Player, target: &PositionSet) -> PositionSet {
        let mut result = target.clone();
        self.extend(game, domain, player, &mut result);
        result
    }

    /// Grows `set` in place to its α-attractor within `domain`.
    pub fn extend(&mut self, game: &Game, domain: &PositionSet, player: Player, set: &mut PositionSet) {
        if self.remaining.len() < game.len() {
            self.remaining.resize(game.len(), 0);
            self.stamp.resize(game.len(), 0);
        }
        let epoch = self.next_epoch();
        self.queue.clear();
        self.queue.extend(set.iter());

        while let Some(w) = self.queue.pop() {
            for &u in game.predecessors(w) {
                if !domain.contains(u) || set.contains(u) {
                    continue;
                }
                let attracted = if game.owner(u) == player {
                    true
                } else {
                    if self.stamp[u] != epoch {
                        self.stamp[u] = epoch;
                        self.remaining[u] = game.successors(u).iter().filter(|&&x| domain.contains(x)).count() as u32;
                    }
                    self.remaining[u] -= 1;
                    self.remaining[u] == 0
                };
                if attracted {
                    set.insert(u);
                    self.queue.push(u);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::tests::{t1, t2};
    use crate::generators::{random_game, worstcase_ppplus, RandomSpec};
    use proptest::prelude::*;

    fn set(n: usize, xs: &[usize]) -> PositionSet {
        PositionSet::from_positions(n, xs.iter().copied())
    }

    fn by_priority(g: &Game, p: u32) -> usize {
        g.positions().find(|&v| g.priority(v).0 == p).unwrap()
    }

    /// Direct transcription of the defining set equation over all pairs.
    fn naive_pre(view: &SubgameView<'_>, player: Player, target: &PositionSet) -> PositionSet {
        let g = view.game();
        let mut out = PositionSet::empty(g.len());
        for u in 0..g.len() {
            if !view.contains(u) {
                continue;
            }
            let succs: Vec<usize> = (0..g.len())
                .filter(|&w| view.contains(w) && g.successors(u).contains(&w))
                .collect();
            let ok = if g.owner(u) == player {
                succs.iter().any(|w| target.contains(*w))
            } else {
                succs.iter().all(|w| target.contains(*w))
            };
            if ok {
                out.insert(u);
            }
        }
        out
    }

    fn naive_atr(view: &SubgameView<'_>, player: Player, target: &PositionSet) -> PositionSet {
        let mut x = target.clone();
        loop {
            let mut next = naive_pre(view, player, &x);
            next.union_with(target);
            next.union_with(&x);
            if next == x {
                return x;
            }
            x = next;
        }
    }

    #[test]
    fn pre_examples() {
        let g = t1();
        let v = g.full_view();
        assert_eq!(pre(&v, Player::Odd, &set(2, &[1])), set(2, &[0, 1]));
        assert_eq!(pre(&v, Player::Even, &set(2, &[0])), set(2, &[]));
        assert_eq!(pre(&v, Player::Even, v.alive()), *v.alive());
    }

    #[test]
    fn atr_examples() {
        let g = t1();
        assert_eq!(atr(&g.full_view(), Player::Odd, &set(2, &[1])), set(2, &[0, 1]));

        let w = worstcase_ppplus(4);
        let head6 = by_priority(&w, 6);
        let target = set(w.len(), &[head6]);
        let a = atr(&w.full_view(), Player::Even, &target);
        assert_eq!(a, target);
    }

    #[test]
    fn esc_and_interior_on_worstcase() {
        let w = worstcase_ppplus(4);
        let head6 = by_priority(&w, 6);
        let body4 = by_priority(&w, 4);
        let v = w.full_view();
        let region = set(w.len(), &[head6, body4]);
        assert_eq!(esc(&v, Player::Odd, &region), set(w.len(), &[head6]));
        assert_eq!(interior(&v, Player::Odd, &region), set(w.len(), &[body4]));
        assert_eq!(esc(&v, Player::Odd, v.alive()), PositionSet::empty(w.len()));
    }

    #[test]
    fn esc_interior_trivial() {
        let g = t2();
        let v = g.full_view();
        assert!(esc(&v, Player::Even, &set(1, &[0])).is_empty());

        let g = t1();
        let v = g.full_view();
        assert_eq!(interior(&v, Player::Odd, &set(2, &[0, 1])), set(2, &[1]));
        assert!(interior(&v, Player::Odd, &set(2, &[0])).is_empty());
    }

    fn small_game() -> impl Strategy<Value = (Game, PositionSet, PositionSet, bool)> {
        (2usize..11, 0.0f64..1.0, 1usize..4, any::<u64>(), any::<u64>(), any::<u64>(), any::<bool>()).prop_map(
            |(n, kf, d, seed, mask_a, mask_b, odd)| {
                let k = 1 + ((n - 1) as f64 * kf) as usize;
                let g = random_game(&RandomSpec { n, k, d: d.min(n - 1), seed }).unwrap();
                let a = PositionSet::from_positions(n, (0..n).filter(|i| mask_a >> i & 1 == 1));
                let mut b = a.clone();
                b.union_with(&PositionSet::from_positions(n, (0..n).filter(|i| mask_b >> i & 1 == 1)));
                (g, a, b, odd)
            },
        )
    }

    proptest! {
        #[test]
        fn pre_matches_naive((g, a, _b, odd) in small_game()) {
            let p = if odd { Player::Odd } else { Player::Even };
            let v = g.full_view();
            prop_assert_eq!(pre(&v, p, &a), naive_pre(&v, p, &a));
        }

        #[test]
        fn atr_laws((g, a, b, odd) in small_game()) {
            let p = if odd { Player::Odd } else { Player::Even };
            let v = g.full_view();
            let xa = atr(&v, p, &a);
            let xb = atr(&v, p, &b);
            prop_assert!(a.is_subset(&xa));
            prop_assert!(xa.is_subset(&xb));
            prop_assert_eq!(&atr(&v, p, &xa), &xa);
            prop_assert_eq!(&xa, &naive_atr(&v, p, &a));
            // the complement of an attractor is a trap for the attractor's player
            prop_assert!(v.subgame(&xa).unwrap().is_well_formed());
        }

        #[test]
        fn interior_defining_equation((g, a, _b, odd) in small_game()) {
            let p = if odd { Player::Odd } else { Player::Even };
            let v = g.full_view();
            let e = esc(&v, p, &a);
            let mut complement = v.alive().clone();
            complement.difference_with(&a);
            let mut expect_esc = pre(&v, p, &complement);
            expect_esc.intersect_with(&a);
            prop_assert_eq!(&e, &expect_esc);
            let i = interior(&v, p, &a);
            for x in 0..g.len() {
                prop_assert_eq!(i.contains(x), a.contains(x) && g.owner(x) == p && !e.contains(x));
            }
            prop_assert_eq!(is_closed_within(&g, v.alive(), p.dual(), &a), esc(&v, p.dual(), &a).is_empty());
        }
    }
}
