//! Parity game arenas built from a [`Dpa`].
//!
//! Two constructions share one [`ParityGame`] representation:
//!
//! * [`build_abstract_game`]: the delay-free game in which Player I picks
//!   witnessed behavior functions restricted to the current domain and
//!   Player O resolves them by picking a tracked state from that domain.
//! * [`build_queue_game`]: the exact delay game with lookahead `k`, encoded
//!   by a queue of pending input letters.
//!
//! In both, scoring colors sit on the vertices entered right after Player O
//! commits to a tracked state or a transition; every other vertex carries
//! the neutral color `min C`, which cannot change the limsup of a play.
//! Max-parity throughout: Player O wins iff the largest color seen infinitely
//! often is even.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::automaton::Dpa;
use crate::error::{Error, Result};
use crate::tracking::{BehaviorFunction, TrackedSet, TrackedState};

/// Default bound on the number of materialized vertices.
pub const DEFAULT_VERTEX_BUDGET: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Player {
    /// The input player (odd, spoiler).
    I,
    /// The output player (even).
    O,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::I => Player::O,
            Player::O => Player::I,
        }
    }

    /// The player favored by `color` under max-parity.
    pub fn of_color(color: u32) -> Player {
        if color.is_multiple_of(2) {
            Player::O
        } else {
            Player::I
        }
    }
}

/// A finite parity game with successor lists stored contiguously.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityGame {
    owners: Vec<Player>,
    colors: Vec<u32>,
    labels: Vec<String>,
    offsets: Vec<usize>,
    successors: Vec<usize>,
    initial: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GameStats {
    pub vertices: usize,
    pub edges: usize,
    pub vertices_i: usize,
    pub vertices_o: usize,
    pub distinct_colors: usize,
    pub min_color: u32,
    pub max_color: u32,
}

impl ParityGame {
    /// Builds a game from per-vertex data and adjacency lists. Every vertex
    /// needs at least one successor and every index must be in range.
    pub fn new(
        owners: Vec<Player>,
        colors: Vec<u32>,
        labels: Vec<String>,
        edges: Vec<Vec<usize>>,
        initial: usize,
    ) -> Result<Self> {
        let mut builder = GameBuilder::default();
        if owners.len() != colors.len()
            || owners.len() != labels.len()
            || owners.len() != edges.len()
        {
            return Err(Error::semantic(
                "game",
                "per-vertex vectors differ in length",
            ));
        }
        for ((owner, color), label) in owners.into_iter().zip(colors).zip(labels) {
            builder.add_vertex(owner, color, label);
        }
        for succ in edges {
            builder.push_successors(succ);
        }
        builder.finish(initial)
    }

    pub fn num_vertices(&self) -> usize {
        self.owners.len()
    }

    pub fn num_edges(&self) -> usize {
        self.successors.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn owner(&self, v: usize) -> Player {
        self.owners[v]
    }

    pub fn color(&self, v: usize) -> u32 {
        self.colors[v]
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.successors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn max_color(&self) -> u32 {
        self.colors.iter().copied().max().unwrap_or(0)
    }

    /// Predecessor lists, in ascending order.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.num_vertices()];
        for v in 0..self.num_vertices() {
            for &w in self.successors(v) {
                preds[w].push(v);
            }
        }
        preds
    }

    /// Every vertex has a successor and all edges point to valid vertices.
    pub fn is_successor_total(&self) -> bool {
        let n = self.num_vertices();
        self.initial < n
            && (0..n).all(|v| {
                let succ = self.successors(v);
                !succ.is_empty() && succ.iter().all(|&w| w < n)
            })
    }

    /// The same arena with owners swapped and every color shifted by one.
    pub fn dual(&self) -> ParityGame {
        ParityGame {
            owners: self.owners.iter().map(|p| p.opponent()).collect(),
            colors: self.colors.iter().map(|c| c + 1).collect(),
            ..self.clone()
        }
    }

    pub fn stats(&self) -> GameStats {
        let mut distinct = self.colors.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let vertices_o = self.owners.iter().filter(|&&p| p == Player::O).count();
        GameStats {
            vertices: self.num_vertices(),
            edges: self.num_edges(),
            vertices_i: self.num_vertices() - vertices_o,
            vertices_o,
            distinct_colors: distinct.len(),
            min_color: distinct.first().copied().unwrap_or(0),
            max_color: distinct.last().copied().unwrap_or(0),
        }
    }
}

/// Accumulates vertices and successor lists in vertex order.
#[derive(Default)]
struct GameBuilder {
    owners: Vec<Player>,
    colors: Vec<u32>,
    labels: Vec<String>,
    offsets: Vec<usize>,
    successors: Vec<usize>,
}

impl GameBuilder {
    fn add_vertex(&mut self, owner: Player, color: u32, label: String) -> usize {
        self.owners.push(owner);
        self.colors.push(color);
        self.labels.push(label);
        self.owners.len() - 1
    }

    fn len(&self) -> usize {
        self.owners.len()
    }

    /// Appends the successor list of the next vertex in order.
    fn push_successors(&mut self, succ: impl IntoIterator<Item = usize>) {
        if self.offsets.is_empty() {
            self.offsets.push(0);
        }
        self.successors.extend(succ);
        self.offsets.push(self.successors.len());
    }

    fn finish(mut self, initial: usize) -> Result<ParityGame> {
        if self.offsets.is_empty() {
            self.offsets.push(0);
        }
        let game = ParityGame {
            owners: self.owners,
            colors: self.colors,
            labels: self.labels,
            offsets: self.offsets,
            successors: self.successors,
            initial,
        };
        if game.num_vertices() == 0 {
            return Err(Error::semantic("game", "game has no vertices"));
        }
        if game.offsets.len() != game.num_vertices() + 1 {
            return Err(Error::semantic("game", "successor lists missing"));
        }
        if game.initial >= game.num_vertices() {
            return Err(Error::semantic(
                "game",
                format!("initial vertex {initial} out of range"),
            ));
        }
        for v in 0..game.num_vertices() {
            let succ = game.successors(v);
            if succ.is_empty() {
                return Err(Error::semantic(
                    format!("vertex {v}"),
                    "vertex has no successor",
                ));
            }
            if let Some(&w) = succ.iter().find(|&&w| w >= game.num_vertices()) {
                return Err(Error::semantic(
                    format!("vertex {v}"),
                    format!("successor {w} out of range"),
                ));
            }
        }
        Ok(game)
    }
}

enum AbstractVertex {
    Init,
    /// A restricted behavior function; index into the key store.
    Choice(usize),
    /// Player O's pick of a tracked state from a choice's domain.
    Picked {
        choice: usize,
        picked: TrackedState,
    },
    /// Player I's choice among all restrictions to one domain (compact form only).
    Hub(usize),
}

/// A restricted function: the domain's words followed by the value words of
/// each distinct state of the domain, in ascending state order.
struct ChoiceKey {
    words: Box<[u64]>,
    states: Vec<usize>,
}

struct AbstractBuilder<'a, L> {
    dpa: &'a Dpa,
    layer: L,
    budget: usize,
    neutral: u32,
    stride: usize,
    game: GameBuilder,
    kinds: Vec<AbstractVertex>,
    keys: Vec<ChoiceKey>,
    vertex_of_key: HashMap<Box<[u64]>, usize>,
    by_domain: HashMap<TrackedSet, Vec<usize>>,
    /// `Some` in the compact form: hub vertex per domain, and hub domains.
    hubs: Option<(HashMap<TrackedSet, usize>, Vec<TrackedSet>)>,
}

impl<'a, L> AbstractBuilder<'a, L>
where
    L: IntoIterator<Item = &'a BehaviorFunction> + Copy,
{
    fn add(
        &mut self,
        owner: Player,
        color: u32,
        label: String,
        kind: AbstractVertex,
    ) -> Result<usize> {
        if self.game.len() >= self.budget {
            return Err(Error::resource("vertex count", self.budget as u64)
                .with_context("abstract game construction"));
        }
        self.kinds.push(kind);
        Ok(self.game.add_vertex(owner, color, label))
    }

    /// Choice vertices for the distinct restrictions of layer functions to `domain`.
    fn choices_for(&mut self, domain: &TrackedSet) -> Result<Vec<usize>> {
        if let Some(ids) = self.by_domain.get(domain) {
            return Ok(ids.clone());
        }
        let states = domain.states(self.dpa);
        let mut vertices = Vec::new();
        for f in self.layer {
            let words = restriction_words(domain, &states, f);
            let vertex = match self.vertex_of_key.get(&words) {
                Some(&v) => v,
                None => {
                    let key = self.keys.len();
                    let v = self.add(
                        Player::O,
                        self.neutral,
                        format!("r{key}"),
                        AbstractVertex::Choice(key),
                    )?;
                    self.vertex_of_key.insert(words.clone(), v);
                    self.keys.push(ChoiceKey {
                        words,
                        states: states.clone(),
                    });
                    v
                }
            };
            vertices.push(vertex);
        }
        vertices.sort_unstable();
        vertices.dedup();
        self.by_domain.insert(domain.clone(), vertices.clone());
        Ok(vertices)
    }

    fn hub_for(&mut self, domain: TrackedSet) -> Result<usize> {
        let (of_domain, domains) = self.hubs.as_ref().expect("compact form");
        if let Some(&v) = of_domain.get(&domain) {
            return Ok(v);
        }
        let index = domains.len();
        let v = self.add(
            Player::I,
            self.neutral,
            format!("D{index}"),
            AbstractVertex::Hub(index),
        )?;
        let (of_domain, domains) = self.hubs.as_mut().expect("compact form");
        of_domain.insert(domain.clone(), v);
        domains.push(domain);
        Ok(v)
    }

    fn domain(&self, key: usize) -> TrackedSet {
        TrackedSet::from_words(&self.keys[key].words[..self.stride])
    }

    fn value(&self, key: usize, q: usize) -> TrackedSet {
        let key = &self.keys[key];
        let pos = key
            .states
            .binary_search(&q)
            .expect("picked state lies in the domain");
        let start = self.stride * (pos + 1);
        TrackedSet::from_words(&key.words[start..start + self.stride])
    }

    fn run(mut self) -> Result<ParityGame> {
        self.add(
            Player::I,
            self.neutral,
            "init".to_owned(),
            AbstractVertex::Init,
        )?;
        let initial_domain =
            TrackedSet::singleton(self.dpa, TrackedState::fresh(self.dpa, self.dpa.initial()));
        let mut next = 0;
        while next < self.game.len() {
            let succ = match self.kinds[next] {
                AbstractVertex::Init => self.choices_for(&initial_domain)?,
                AbstractVertex::Choice(key) => {
                    let domain = self.domain(key);
                    let mut succ = Vec::with_capacity(domain.len());
                    for picked in domain.iter(self.dpa) {
                        let label = format!("r{key}@({},{})", picked.state, picked.color);
                        succ.push(self.add(
                            Player::I,
                            picked.color,
                            label,
                            AbstractVertex::Picked {
                                choice: key,
                                picked,
                            },
                        )?);
                    }
                    succ
                }
                AbstractVertex::Picked { choice, picked } => {
                    let domain = self.value(choice, picked.state);
                    if self.hubs.is_some() {
                        vec![self.hub_for(domain)?]
                    } else {
                        self.choices_for(&domain)?
                    }
                }
                AbstractVertex::Hub(index) => {
                    let domain = self
                        .hubs
                        .as_ref()
                        .expect("hub vertices only in the compact form")
                        .1[index]
                        .clone();
                    self.choices_for(&domain)?
                }
            };
            self.game.push_successors(succ);
            next += 1;
        }
        self.game.finish(0)
    }
}

/// Builds the reachable part of the abstract game for the layer `F_k`.
///
/// Vertex 0 is the initial vertex. Choice vertices (Player O to move) stand
/// for distinct restrictions of functions in `layer` to a domain; picked
/// vertices (Player I to move) carry the color of the picked tracked state.
pub fn build_abstract_game<'a, L>(dpa: &'a Dpa, layer: L, budget: usize) -> Result<ParityGame>
where
    L: IntoIterator<Item = &'a BehaviorFunction> + Copy,
{
    abstract_game(dpa, layer, budget, false)
}

/// The abstract game with one extra Player I vertex per reachable domain.
///
/// Picked vertices get a single edge to the hub of their successor domain,
/// and the hub has the edges to the restrictions. The hub carries the
/// minimal color and every cycle through it passes a picked vertex, so
/// winners of the original vertices are unchanged while the edge count drops
/// from quadratic to roughly linear in the number of restrictions.
pub fn build_abstract_game_compact<'a, L>(
    dpa: &'a Dpa,
    layer: L,
    budget: usize,
) -> Result<ParityGame>
where
    L: IntoIterator<Item = &'a BehaviorFunction> + Copy,
{
    abstract_game(dpa, layer, budget, true)
}

fn abstract_game<'a, L>(dpa: &'a Dpa, layer: L, budget: usize, compact: bool) -> Result<ParityGame>
where
    L: IntoIterator<Item = &'a BehaviorFunction> + Copy,
{
    assert!(
        layer.into_iter().next().is_some(),
        "behavior layers are never empty"
    );
    AbstractBuilder {
        dpa,
        layer,
        budget,
        neutral: dpa.min_color(),
        stride: TrackedSet::empty(dpa).words().len(),
        game: GameBuilder::default(),
        kinds: Vec::new(),
        keys: Vec::new(),
        vertex_of_key: HashMap::new(),
        by_domain: HashMap::new(),
        hubs: compact.then(Default::default),
    }
    .run()
}

fn restriction_words(domain: &TrackedSet, states: &[usize], f: &BehaviorFunction) -> Box<[u64]> {
    let mut words = Vec::with_capacity(domain.words().len() * (states.len() + 1));
    words.extend_from_slice(domain.words());
    for &q in states {
        words.extend_from_slice(f.value_words(q));
    }
    words.into_boxed_slice()
}

/// Builds the full queue arena for the delay game with lookahead `k`.
///
/// Base positions are pairs `(q, w)` of a state and a pending input word
/// with `|w| ≤ k + 1`. Player I owns `(q, w)` for `|w| ≤ k` and appends a
/// letter; Player O owns `(q, w)` for `|w| = k + 1` and picks an output
/// letter `b`, consuming the front letter `a` of the queue. Her move leads
/// to a post-transition copy of `(δ(q, (a, b)), rest)` colored `Ω(q')`,
/// whose single successor is the base position itself. Base positions carry
/// the neutral color.
///
/// The initial position `(q_ι, ε)` is vertex 0.
pub fn build_queue_game(dpa: &Dpa, k: usize, budget: usize) -> Result<ParityGame> {
    let over = || {
        Error::resource("vertex count", budget as u64)
            .with_context(format!("queue game with lookahead {k}"))
    };
    let n = dpa.num_states();
    let m = dpa.sigma_i().len();
    // powers[j] = m^j and offsets[j] = Σ_{i<j} m^i, for j ≤ k + 2
    let mut powers = Vec::with_capacity(k + 3);
    let mut offsets = Vec::with_capacity(k + 3);
    let (mut power, mut offset) = (1usize, 0usize);
    for _ in 0..=k + 2 {
        powers.push(power);
        offsets.push(offset);
        offset = offset.checked_add(power).ok_or_else(over)?;
        power = power.checked_mul(m).ok_or_else(over)?;
    }
    let per_state = offsets[k + 2];
    let posts = powers[k];
    let total = per_state
        .checked_add(posts)
        .and_then(|x| x.checked_mul(n))
        .ok_or_else(over)?;
    if total > budget {
        return Err(over());
    }

    let neutral = dpa.min_color();
    let state_of = |r: usize| (r + dpa.initial()) % n;
    let base_id = |r: usize, len: usize, value: usize| r * per_state + offsets[len] + value;
    let post_id = |r: usize, value: usize| n * per_state + r * posts + value;
    let rank_of = |q: usize| (q + n - dpa.initial()) % n;
    let word = |len: usize, value: usize| -> String {
        (0..len)
            .map(|i| dpa.sigma_i()[(value / powers[len - 1 - i]) % m].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut builder = GameBuilder::default();
    for r in 0..n {
        let q = state_of(r);
        for len in 0..=k + 1 {
            for value in 0..powers[len] {
                let label = format!("(q{q},[{}])", word(len, value));
                if len <= k {
                    builder.add_vertex(Player::I, neutral, label);
                    builder.push_successors((0..m).map(|a| base_id(r, len + 1, value * m + a)));
                } else {
                    builder.add_vertex(Player::O, neutral, label);
                    let front = value / powers[k];
                    let rest = value % powers[k];
                    let mut succ: Vec<usize> = (0..dpa.sigma_o().len())
                        .map(|b| post_id(rank_of(dpa.successor(q, front, b)), rest))
                        .collect();
                    succ.sort_unstable();
                    succ.dedup();
                    builder.push_successors(succ);
                }
            }
        }
    }
    for r in 0..n {
        let q = state_of(r);
        for value in 0..posts {
            builder.add_vertex(
                Player::I,
                dpa.color(q),
                format!("(q{q},[{}])*", word(k, value)),
            );
            builder.push_successors([base_id(r, k, value)]);
        }
    }
    debug_assert_eq!(builder.len(), total);
    builder.finish(base_id(0, 0, 0))
}

/// Number of base positions `|Q| · Σ_{j=0}^{k+1} |Σ_I|^j` of the queue game.
pub fn queue_base_positions(dpa: &Dpa, k: usize) -> usize {
    let m = dpa.sigma_i().len();
    dpa.num_states() * (0..=k + 1).map(|j| m.pow(j as u32)).sum::<usize>()
}

fn owner_code(p: Player) -> u8 {
    match p {
        Player::O => 0,
        Player::I => 1,
    }
}

/// Renders the game in the line-based parity game interchange format:
/// a `parity <max-id>;` header, then `id color owner succ,succ "label";`
/// per vertex. Owner 0 is Player O (even), owner 1 is Player I (odd).
/// The initial vertex is not part of the format; both builders place it at 0.
pub fn export_pg(game: &ParityGame) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "parity {};", game.num_vertices() - 1);
    for v in 0..game.num_vertices() {
        let succ: Vec<String> = game.successors(v).iter().map(usize::to_string).collect();
        let _ = writeln!(
            out,
            "{v} {} {} {} \"{}\";",
            game.color(v),
            owner_code(game.owner(v)),
            succ.join(","),
            game.label(v).replace('"', "'"),
        );
    }
    out
}

/// Reads the interchange format back. An optional `start <id>;` line sets
/// the initial vertex, which otherwise defaults to 0.
pub fn import_pg(text: &str) -> Result<ParityGame> {
    let syntax = |line: usize, message: String| Error::Syntax {
        line,
        column: 1,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| syntax(1, "empty document".into()))?;
    let max_id: usize = header
        .strip_prefix("parity ")
        .and_then(|rest| rest.trim_end_matches(';').trim().parse().ok())
        .ok_or_else(|| {
            syntax(
                hline,
                format!("expected `parity <max-id>;`, got {header:?}"),
            )
        })?;
    let n = max_id + 1;
    let mut owners = vec![None; n];
    let mut colors = vec![0; n];
    let mut labels = vec![String::new(); n];
    let mut edges = vec![Vec::new(); n];
    let mut initial = 0;
    for (lineno, line) in lines {
        let line = line
            .strip_suffix(';')
            .ok_or_else(|| syntax(lineno, "missing `;`".into()))?;
        if let Some(rest) = line.strip_prefix("start ") {
            initial = rest
                .trim()
                .parse()
                .map_err(|_| syntax(lineno, "bad start vertex".into()))?;
            continue;
        }
        let (fields, label) = match line.find('"') {
            Some(i) => (&line[..i], line[i..].trim_matches('"').to_owned()),
            None => (line, String::new()),
        };
        let parts: Vec<&str> = fields.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(syntax(
                lineno,
                format!("expected 4 fields, got {}", parts.len()),
            ));
        }
        let num = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| syntax(lineno, format!("not a number: {s:?}")))
        };
        let id = num(parts[0])?;
        if id >= n {
            return Err(syntax(lineno, format!("vertex id {id} exceeds header")));
        }
        if owners[id].is_some() {
            return Err(syntax(lineno, format!("vertex {id} declared twice")));
        }
        colors[id] = num(parts[1])? as u32;
        owners[id] = Some(match parts[2] {
            "0" => Player::O,
            "1" => Player::I,
            other => return Err(syntax(lineno, format!("bad owner {other:?}"))),
        });
        edges[id] = parts[3].split(',').map(num).collect::<Result<_>>()?;
        labels[id] = label;
    }
    let owners = owners
        .into_iter()
        .enumerate()
        .map(|(v, o)| {
            o.ok_or_else(|| Error::semantic(format!("vertex {v}"), "vertex not declared"))
        })
        .collect::<Result<Vec<_>>>()?;
    ParityGame::new(owners, colors, labels, edges, initial)
}

/// A seeded random game: uniform owners, colors in `0..colors`, and between
/// one and `max_out` distinct successors per vertex. Initial vertex 0.
pub fn random_game(n: usize, colors: u32, max_out: usize, seed: u64) -> ParityGame {
    assert!(n >= 1 && colors >= 1 && max_out >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut owners = Vec::with_capacity(n);
    let mut cols = Vec::with_capacity(n);
    let mut edges = Vec::with_capacity(n);
    for _ in 0..n {
        owners.push(if rng.random_bool(0.5) {
            Player::O
        } else {
            Player::I
        });
        cols.push(rng.random_range(0..colors));
        let degree = rng.random_range(1..=max_out.min(n));
        let mut succ = rand::seq::index::sample(&mut rng, n, degree).into_vec();
        succ.sort_unstable();
        edges.push(succ);
    }
    let labels = (0..n).map(|v| format!("v{v}")).collect();
    ParityGame::new(owners, cols, labels, edges, 0).expect("random game is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{prediction_family, random_dpa};
    use crate::tracking::{behavior_identity, layer_sequence, Layer};
    use std::collections::BTreeSet;

    fn identity_layer(dpa: &Dpa) -> Layer {
        BTreeSet::from([behavior_identity(dpa)])
    }

    #[test]
    fn abstract_game_of_universal_automaton() {
        let dpa = Dpa::single_state(0, 2, 2);
        let game = build_abstract_game(&dpa, &identity_layer(&dpa), 100).unwrap();
        assert_eq!(game.num_vertices(), 3);
        assert_eq!(game.owner(0), Player::I);
        assert_eq!(game.owner(1), Player::O);
        assert_eq!(game.owner(2), Player::I);
        assert_eq!(game.successors(0), &[1]);
        assert_eq!(game.successors(1), &[2]);
        assert_eq!(game.successors(2), &[1]);
        assert_eq!(game.color(2), 0);
        assert!(game.is_successor_total());
    }

    #[test]
    fn abstract_game_of_empty_automaton() {
        let dpa = Dpa::single_state(1, 2, 2);
        let game = build_abstract_game(&dpa, &identity_layer(&dpa), 100).unwrap();
        assert_eq!(game.num_vertices(), 3);
        assert_eq!(game.color(2), 1);
        assert_eq!(game.color(0), 1);
    }

    #[test]
    fn abstract_game_is_total_and_deterministic() {
        for d in 1..=2 {
            let dpa = prediction_family(d);
            let ls = layer_sequence(&dpa, 1000).unwrap();
            for layer in ls.layers() {
                let a = build_abstract_game(&dpa, layer, 100_000).unwrap();
                let b = build_abstract_game(&dpa, layer, 100_000).unwrap();
                assert!(a.is_successor_total());
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn compact_form_preserves_winners() {
        use crate::parity_solver::solve_parity;
        for seed in 0..60 {
            let dpa = random_dpa(1 + (seed % 4) as usize, 1 + (seed % 3) as u32, 2, 2, seed);
            let ls = layer_sequence(&dpa, 1000).unwrap();
            for layer in ls.layers().skip(1) {
                let plain = build_abstract_game(&dpa, layer, 100_000).unwrap();
                let compact = build_abstract_game_compact(&dpa, layer, 100_000).unwrap();
                let hubs = (0..compact.num_vertices())
                    .filter(|&v| compact.label(v).starts_with('D'))
                    .count();
                assert_eq!(plain.num_vertices() + hubs, compact.num_vertices());
                assert!(compact.is_successor_total());
                let (a, b) = (solve_parity(&plain), solve_parity(&compact));
                assert_eq!(
                    a.winner(plain.initial()),
                    b.winner(compact.initial()),
                    "seed {seed}"
                );
                let won_by_o = |g: &ParityGame, sol: &crate::parity_solver::Solution| {
                    (0..g.num_vertices())
                        .filter(|&v| !g.label(v).starts_with('D') && sol.winner(v) == Player::O)
                        .count()
                };
                assert_eq!(won_by_o(&plain, &a), won_by_o(&compact, &b), "seed {seed}");
            }
        }
    }

    #[test]
    fn abstract_budget_is_enforced() {
        let dpa = prediction_family(2);
        let ls = layer_sequence(&dpa, 1000).unwrap();
        let err = build_abstract_game(&dpa, ls.layers().last().unwrap(), 2).unwrap_err();
        assert!(err.is_resource_limit());
    }

    #[test]
    fn queue_game_shape() {
        let univ = Dpa::single_state(0, 2, 2);
        let game = build_queue_game(&univ, 0, 1000).unwrap();
        // (q0,ε), (q0,0), (q0,1) plus one post-transition copy of (q0,ε)
        assert_eq!(queue_base_positions(&univ, 0), 3);
        assert_eq!(game.num_vertices(), 4);
        assert_eq!(game.initial(), 0);
        assert!(game.is_successor_total());
        for k in 0..4 {
            for dpa in [prediction_family(1), prediction_family(2)] {
                let game = build_queue_game(&dpa, k, 1_000_000).unwrap();
                assert!(game.is_successor_total());
                let base = game.num_vertices() - dpa.num_states() * 2usize.pow(k as u32);
                assert_eq!(base, queue_base_positions(&dpa, k));
                assert_eq!(
                    base,
                    dpa.num_states() * (0..=k + 1).map(|j| 1 << j).sum::<usize>()
                );
            }
        }
    }

    #[test]
    fn queue_game_initial_is_initial_state() {
        let mut dpa = random_dpa(3, 2, 2, 2, 11);
        // Move the initial state away from 0.
        dpa = Dpa::new(
            dpa.sigma_i().to_vec(),
            dpa.sigma_o().to_vec(),
            2,
            dpa.colors().to_vec(),
            (0..3 * 4)
                .map(|i| dpa.successor(i / 4, (i / 2) % 2, i % 2))
                .collect(),
        )
        .unwrap();
        let game = build_queue_game(&dpa, 1, 1000).unwrap();
        assert_eq!(game.label(0), "(q2,[])");
    }

    #[test]
    fn queue_budget_is_enforced() {
        let dpa = prediction_family(1);
        assert!(build_queue_game(&dpa, 10, 100)
            .unwrap_err()
            .is_resource_limit());
        assert!(build_queue_game(&dpa, 200, usize::MAX)
            .unwrap_err()
            .is_resource_limit());
    }

    #[test]
    fn neutral_color_does_not_change_limsup() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let colors: Vec<u32> = (0..20).map(|_| rng.random_range(2..7)).collect();
            let neutral = 2;
            // A periodic sequence: its limsup is the max over one period.
            let period = rng.random_range(1..colors.len());
            let tail = &colors[colors.len() - period..];
            let interleaved: Vec<u32> = tail.iter().flat_map(|&c| [neutral, c]).collect();
            assert_eq!(tail.iter().max(), interleaved.iter().max());
        }
    }

    #[test]
    fn export_has_one_line_per_vertex() {
        let dpa = Dpa::single_state(0, 2, 2);
        let game = build_abstract_game(&dpa, &identity_layer(&dpa), 100).unwrap();
        let text = export_pg(&game);
        assert_eq!(
            text,
            "parity 2;\n0 0 1 1 \"init\";\n1 0 0 2 \"r0\";\n2 0 1 1 \"r0@(0,0)\";\n"
        );
        let queue = build_queue_game(&prediction_family(2), 2, 100_000).unwrap();
        let text = export_pg(&queue);
        assert_eq!(text.lines().count(), queue.num_vertices() + 1);
        assert_eq!(import_pg(&text).unwrap(), queue);
    }

    #[test]
    fn import_rejects_garbage() {
        assert!(import_pg("").is_err());
        assert!(import_pg("parity 1;\n0 0 0 1;\n").is_err());
        assert!(import_pg("parity 0;\n0 0 2 0;\n").is_err());
        assert!(import_pg("parity 0;\n0 0 0 0\n").is_err());
        let g = import_pg("parity 1;\nstart 1;\n0 3 0 1;\n1 2 1 0,1 \"x\";\n").unwrap();
        assert_eq!(g.initial(), 1);
        assert_eq!(g.successors(1), &[0, 1]);
    }

    #[test]
    fn dual_swaps_owners_and_shifts_colors() {
        let g = random_game(6, 3, 3, 1);
        let d = g.dual();
        for v in 0..6 {
            assert_eq!(d.owner(v), g.owner(v).opponent());
            assert_eq!(d.color(v), g.color(v) + 1);
        }
    }
}
