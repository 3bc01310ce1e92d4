//! Max-parity game solving: Player O wins a play iff the largest color seen
//! infinitely often is even.
//!
//! [`solve_parity`] runs Zielonka's recursive decomposition with an explicit
//! frame stack. Subgames are contiguous segments of one vertex permutation;
//! a frame moves the attractor it removes to the front of its segment and
//! hands the remainder to its child, so memory stays linear in the arena
//! regardless of recursion depth.
//!
//! [`brute_force_solve`] enumerates positional strategies and is only meant
//! as a test oracle for small games. [`verify_solution`] checks a claimed
//! solution as a certificate.

use std::collections::VecDeque;

use petgraph::algo::kosaraju_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::arena::{ParityGame, Player};
use crate::error::{Error, Result};

/// Default guard on the number of positional strategies `brute_force_solve` enumerates.
pub const DEFAULT_ENUMERATION_GUARD: u64 = 1_000_000;

/// Winning regions and positional winning strategies.
///
/// `strategy_o[v]` is defined for O-owned vertices in `win_o`, and
/// symmetrically for Player I.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub win_o: Vec<bool>,
    pub win_i: Vec<bool>,
    pub strategy_o: Vec<Option<usize>>,
    pub strategy_i: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolutionSummary {
    pub initial_winner: Player,
    pub win_o: usize,
    pub win_i: usize,
}

impl Solution {
    fn from_winners(game: &ParityGame, winner: &[Player], strategy: &[Option<usize>]) -> Self {
        let n = game.num_vertices();
        let mut sol = Solution {
            win_o: vec![false; n],
            win_i: vec![false; n],
            strategy_o: vec![None; n],
            strategy_i: vec![None; n],
        };
        for v in 0..n {
            match winner[v] {
                Player::O => sol.win_o[v] = true,
                Player::I => sol.win_i[v] = true,
            }
            if game.owner(v) == winner[v] {
                *sol.strategy_mut(winner[v]).get_mut(v).unwrap() = strategy[v];
            }
        }
        sol
    }

    fn strategy_mut(&mut self, player: Player) -> &mut Vec<Option<usize>> {
        match player {
            Player::O => &mut self.strategy_o,
            Player::I => &mut self.strategy_i,
        }
    }

    pub fn region(&self, player: Player) -> &[bool] {
        match player {
            Player::O => &self.win_o,
            Player::I => &self.win_i,
        }
    }

    pub fn strategy(&self, player: Player) -> &[Option<usize>] {
        match player {
            Player::O => &self.strategy_o,
            Player::I => &self.strategy_i,
        }
    }

    /// Winner of `v`; panics if `v` is in neither region.
    pub fn winner(&self, v: usize) -> Player {
        if self.win_o[v] {
            Player::O
        } else if self.win_i[v] {
            Player::I
        } else {
            panic!("vertex {v} is in no winning region")
        }
    }

    pub fn summary(&self, game: &ParityGame) -> SolutionSummary {
        SolutionSummary {
            initial_winner: self.winner(game.initial()),
            win_o: self.win_o.iter().filter(|&&b| b).count(),
            win_i: self.win_i.iter().filter(|&&b| b).count(),
        }
    }
}

const UNRANKED: u32 = u32::MAX;
const UNCOUNTED: usize = usize::MAX;

/// Attractor computation over a segment `[lo, hi)` of a vertex permutation.
struct Workspace<'g> {
    game: &'g ParityGame,
    preds: Vec<Vec<usize>>,
    perm: Vec<usize>,
    pos: Vec<usize>,
    rank: Vec<u32>,
    counter: Vec<usize>,
    touched: Vec<usize>,
    queue: VecDeque<usize>,
}

impl<'g> Workspace<'g> {
    fn new(game: &'g ParityGame) -> Self {
        let n = game.num_vertices();
        Workspace {
            game,
            preds: game.predecessors(),
            perm: (0..n).collect(),
            pos: (0..n).collect(),
            rank: vec![UNRANKED; n],
            counter: vec![UNCOUNTED; n],
            touched: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    #[inline]
    fn inside(&self, lo: usize, hi: usize, v: usize) -> bool {
        (lo..hi).contains(&self.pos[v])
    }

    /// Attractor of `targets` for `player` within the segment. Members come
    /// back in breadth-first order and keep their rank in `self.rank` until
    /// [`Workspace::clear_ranks`].
    fn attract(&mut self, lo: usize, hi: usize, player: Player, targets: &[usize]) -> Vec<usize> {
        let mut members = Vec::with_capacity(targets.len());
        for &t in targets {
            debug_assert!(self.inside(lo, hi, t));
            if self.rank[t] == UNRANKED {
                self.rank[t] = 0;
                self.queue.push_back(t);
                members.push(t);
            }
        }
        while let Some(u) = self.queue.pop_front() {
            let next_rank = self.rank[u] + 1;
            for i in 0..self.preds[u].len() {
                let v = self.preds[u][i];
                if self.rank[v] != UNRANKED || !self.inside(lo, hi, v) {
                    continue;
                }
                let attracted = if self.game.owner(v) == player {
                    true
                } else {
                    if self.counter[v] == UNCOUNTED {
                        self.counter[v] = self
                            .game
                            .successors(v)
                            .iter()
                            .filter(|&&w| self.inside(lo, hi, w))
                            .count();
                        self.touched.push(v);
                    }
                    self.counter[v] -= 1;
                    self.counter[v] == 0
                };
                if attracted {
                    self.rank[v] = next_rank;
                    self.queue.push_back(v);
                    members.push(v);
                }
            }
        }
        for v in self.touched.drain(..) {
            self.counter[v] = UNCOUNTED;
        }
        members
    }

    fn clear_ranks(&mut self, members: &[usize]) {
        for &v in members {
            self.rank[v] = UNRANKED;
        }
    }

    /// Lowest-index successor of `v` inside the segment with a smaller rank.
    fn descending_successor(&self, lo: usize, hi: usize, v: usize) -> Option<usize> {
        let r = self.rank[v];
        self.game
            .successors(v)
            .iter()
            .copied()
            .filter(|&w| self.inside(lo, hi, w) && self.rank[w] < r)
            .min()
    }

    fn lowest_successor_inside(&self, lo: usize, hi: usize, v: usize) -> Option<usize> {
        self.game
            .successors(v)
            .iter()
            .copied()
            .filter(|&w| self.inside(lo, hi, w))
            .min()
    }

    /// Moves `members` (all inside the segment) to its front.
    fn move_to_front(&mut self, lo: usize, members: &[usize]) {
        for (i, &v) in members.iter().enumerate() {
            let (a, b) = (lo + i, self.pos[v]);
            self.perm.swap(a, b);
            self.pos[self.perm[a]] = a;
            self.pos[self.perm[b]] = b;
        }
    }
}

enum Stage {
    Start,
    /// The child solved the segment minus the top attractor, whose members
    /// and (for the attracting player) moves are kept here.
    AfterFirst {
        player: Player,
        removed: usize,
        moves: Vec<(usize, Option<usize>)>,
    },
    AfterSecond,
}

struct Frame {
    lo: usize,
    hi: usize,
    stage: Stage,
}

/// Attractor of `targets` for `player` in the whole game, sorted.
pub fn attractor(game: &ParityGame, player: Player, targets: &[usize]) -> Vec<usize> {
    let mut ws = Workspace::new(game);
    let mut members = ws.attract(0, game.num_vertices(), player, targets);
    members.sort_unstable();
    members
}

/// Solves `game` with Zielonka's algorithm.
///
/// Strategy ties break towards the lowest successor index.
pub fn solve_parity(game: &ParityGame) -> Solution {
    let n = game.num_vertices();
    let mut ws = Workspace::new(game);
    let mut winner = vec![Player::O; n];
    let mut strategy: Vec<Option<usize>> = vec![None; n];
    let mut stack = vec![Frame {
        lo: 0,
        hi: n,
        stage: Stage::Start,
    }];

    while let Some(frame) = stack.pop() {
        let Frame { lo, hi, stage } = frame;
        match stage {
            Stage::Start => {
                if lo == hi {
                    continue;
                }
                let top = ws.perm[lo..hi]
                    .iter()
                    .map(|&v| game.color(v))
                    .max()
                    .unwrap();
                let player = Player::of_color(top);
                let targets: Vec<usize> = ws.perm[lo..hi]
                    .iter()
                    .copied()
                    .filter(|&v| game.color(v) == top)
                    .collect();
                let attr = ws.attract(lo, hi, player, &targets);
                let moves = attr
                    .iter()
                    .map(|&v| {
                        let choice = if game.owner(v) != player {
                            None
                        } else if ws.rank[v] == 0 {
                            ws.lowest_successor_inside(lo, hi, v)
                        } else {
                            ws.descending_successor(lo, hi, v)
                        };
                        (v, choice)
                    })
                    .collect();
                ws.clear_ranks(&attr);
                ws.move_to_front(lo, &attr);
                let removed = attr.len();
                stack.push(Frame {
                    lo,
                    hi,
                    stage: Stage::AfterFirst {
                        player,
                        removed,
                        moves,
                    },
                });
                stack.push(Frame {
                    lo: lo + removed,
                    hi,
                    stage: Stage::Start,
                });
            }
            Stage::AfterFirst {
                player,
                removed,
                moves,
            } => {
                let opponent = player.opponent();
                let lost: Vec<usize> = ws.perm[lo + removed..hi]
                    .iter()
                    .copied()
                    .filter(|&v| winner[v] == opponent)
                    .collect();
                if lost.is_empty() {
                    for (v, choice) in moves {
                        winner[v] = player;
                        strategy[v] = choice;
                    }
                    continue;
                }
                let attr = ws.attract(lo, hi, opponent, &lost);
                for &v in &attr {
                    if ws.rank[v] == 0 {
                        // Keeps the child's verdict and strategy.
                        continue;
                    }
                    winner[v] = opponent;
                    strategy[v] = if game.owner(v) == opponent {
                        ws.descending_successor(lo, hi, v)
                    } else {
                        None
                    };
                }
                ws.clear_ranks(&attr);
                ws.move_to_front(lo, &attr);
                stack.push(Frame {
                    lo,
                    hi,
                    stage: Stage::AfterSecond,
                });
                stack.push(Frame {
                    lo: lo + attr.len(),
                    hi,
                    stage: Stage::Start,
                });
            }
            Stage::AfterSecond => {}
        }
    }
    Solution::from_winners(game, &winner, &strategy)
}

/// Vertices of the one-player graph (strategy fixed for `player`) from which
/// a cycle whose top color favors the opponent is reachable.
fn losing_under(game: &ParityGame, edges: &[Vec<usize>], player: Player) -> Vec<bool> {
    let n = game.num_vertices();
    let mut bad_cycle = vec![false; n];
    for v in 0..n {
        let c = game.color(v);
        if Player::of_color(c) == player {
            continue;
        }
        // Is v on a cycle through vertices with color <= c?
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = edges[v]
            .iter()
            .copied()
            .filter(|&w| game.color(w) <= c)
            .collect();
        while let Some(u) = stack.pop() {
            if u == v {
                bad_cycle[v] = true;
                break;
            }
            if std::mem::replace(&mut seen[u], true) {
                continue;
            }
            stack.extend(edges[u].iter().copied().filter(|&w| game.color(w) <= c));
        }
    }
    // Backward closure of the bad-cycle vertices.
    let mut losing = bad_cycle.clone();
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..n {
            if !losing[v] && edges[v].iter().any(|&w| losing[w]) {
                losing[v] = true;
                changed = true;
            }
        }
    }
    losing
}

/// Winning region of `player` and a uniform positional strategy on it, by
/// trying every positional strategy of `player`.
fn enumerate_region(
    game: &ParityGame,
    player: Player,
    guard: u64,
) -> Result<(Vec<bool>, Vec<Option<usize>>)> {
    let n = game.num_vertices();
    let own: Vec<usize> = (0..n).filter(|&v| game.owner(v) == player).collect();
    let mut profiles: u64 = 1;
    for &v in &own {
        profiles = profiles
            .checked_mul(game.successors(v).len() as u64)
            .filter(|&p| p <= guard)
            .ok_or_else(|| {
                Error::resource("positional strategy profiles", guard)
                    .with_context("brute-force enumeration")
            })?;
    }
    let mut choice = vec![0usize; own.len()];
    let mut region = vec![false; n];
    let mut per_profile: Vec<(Vec<usize>, Vec<bool>)> = Vec::new();
    loop {
        let mut edges: Vec<Vec<usize>> = (0..n).map(|v| game.successors(v).to_vec()).collect();
        for (i, &v) in own.iter().enumerate() {
            edges[v] = vec![game.successors(v)[choice[i]]];
        }
        let losing = losing_under(game, &edges, player);
        let wins: Vec<bool> = losing.iter().map(|l| !l).collect();
        for v in 0..n {
            region[v] |= wins[v];
        }
        per_profile.push((choice.clone(), wins));
        // Next profile in mixed radix.
        let mut i = 0;
        loop {
            if i == own.len() {
                let strategy = uniform_strategy(game, &own, &region, &per_profile);
                return Ok((region, strategy));
            }
            choice[i] += 1;
            if choice[i] < game.successors(own[i]).len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn uniform_strategy(
    game: &ParityGame,
    own: &[usize],
    region: &[bool],
    profiles: &[(Vec<usize>, Vec<bool>)],
) -> Vec<Option<usize>> {
    let mut strategy = vec![None; game.num_vertices()];
    let uniform = profiles
        .iter()
        .find(|(_, wins)| wins == region)
        .expect("positional determinacy yields a uniform winning strategy");
    for (i, &v) in own.iter().enumerate() {
        if region[v] {
            strategy[v] = Some(game.successors(v)[uniform.0[i]]);
        }
    }
    strategy
}

/// Exact solution by enumerating positional strategies of each player.
/// Fails if either player has more than `guard` positional strategies.
pub fn brute_force_solve(game: &ParityGame, guard: u64) -> Result<Solution> {
    let (win_o, strategy_o) = enumerate_region(game, Player::O, guard)?;
    let (win_i, strategy_i) = enumerate_region(game, Player::I, guard)?;
    Ok(Solution {
        win_o,
        win_i,
        strategy_o,
        strategy_i,
    })
}

/// Checks that the regions partition the vertices and that each player's
/// strategy keeps plays in her region and wins every play there.
pub fn verify_solution(game: &ParityGame, sol: &Solution) -> bool {
    let n = game.num_vertices();
    let sized = [
        sol.win_o.len(),
        sol.win_i.len(),
        sol.strategy_o.len(),
        sol.strategy_i.len(),
    ];
    if sized.iter().any(|&len| len != n) {
        return false;
    }
    if (0..n).any(|v| sol.win_o[v] == sol.win_i[v]) {
        return false;
    }
    [Player::O, Player::I]
        .into_iter()
        .all(|p| region_is_won(game, p, sol.region(p), sol.strategy(p)))
}

fn region_is_won(
    game: &ParityGame,
    player: Player,
    region: &[bool],
    strategy: &[Option<usize>],
) -> bool {
    let n = game.num_vertices();
    let mut graph: DiGraph<(), ()> = DiGraph::with_capacity(n, game.num_edges());
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    let mut restricted: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in (0..n).filter(|&v| region[v]) {
        if game.owner(v) == player {
            match strategy[v] {
                Some(w) if game.successors(v).contains(&w) && region[w] => restricted[v].push(w),
                _ => return false,
            }
        } else {
            if game.successors(v).iter().any(|&w| !region[w]) {
                return false;
            }
            restricted[v].extend_from_slice(game.successors(v));
        }
    }
    let mut bad_colors: Vec<u32> = (0..n)
        .filter(|&v| region[v] && Player::of_color(game.color(v)) != player)
        .map(|v| game.color(v))
        .collect();
    bad_colors.sort_unstable();
    bad_colors.dedup();
    for c in bad_colors {
        graph.clear_edges();
        for v in 0..n {
            if game.color(v) > c {
                continue;
            }
            for &w in &restricted[v] {
                if game.color(w) <= c {
                    graph.add_edge(nodes[v], nodes[w], ());
                }
            }
        }
        for scc in kosaraju_scc(&graph) {
            let cyclic = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
            let reaches_c = scc
                .iter()
                .any(|ix| region[ix.index()] && game.color(ix.index()) == c);
            if cyclic && reaches_c {
                return false;
            }
        }
    }
    true
}
