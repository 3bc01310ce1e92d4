//! Color-tracking projection of a [`Dpa`] onto its input alphabet.
//!
//! A tracked state `(q, c)` pairs an automaton state with the maximal color
//! seen since the start of the current input block. Projecting away the
//! output letter turns the tracked automaton into a nondeterministic one over
//! `Σ_I`; the powerset step over it is [`delta_p`]. A [`BehaviorFunction`]
//! summarizes an input block `w` by mapping every start state `q` to
//! `δ_P*({(q, Ω(q))}, w)`.
//!
//! [`layer_sequence`] enumerates the layers `F_k = { f_w : |w| = k }`. Since
//! `F_{k+1}` depends only on `F_k` the sequence is eventually periodic, and
//! [`LayerSequence::layer_at`] folds arbitrarily large `k` into the stored
//! prefix.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::automaton::Dpa;
use crate::error::{Error, Result};

/// Layers smaller than this are stepped sequentially.
const PARALLEL_STEP_THRESHOLD: usize = 256;

/// An element of `Q × C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TrackedState {
    pub state: usize,
    pub color: u32,
}

impl TrackedState {
    pub const fn new(state: usize, color: u32) -> Self {
        TrackedState { state, color }
    }

    /// `(q, Ω(q))`.
    pub fn fresh(dpa: &Dpa, state: usize) -> Self {
        TrackedState::new(state, dpa.color(state))
    }
}

fn words_per_set(dpa: &Dpa) -> usize {
    (dpa.num_states() * dpa.color_set().len()).div_ceil(64)
}

#[inline]
fn slot(dpa: &Dpa, ts: TrackedState) -> usize {
    let ci = dpa
        .color_index(ts.color)
        .expect("tracked color must belong to the automaton's color set");
    ts.state * dpa.color_set().len() + ci
}

/// A subset of `Q × C`, stored as a bit pattern indexed by
/// `state * |C| + color_index`. Iteration order is ascending by state, then
/// by color.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrackedSet {
    bits: Vec<u64>,
}

impl TrackedSet {
    pub fn empty(dpa: &Dpa) -> Self {
        TrackedSet {
            bits: vec![0; words_per_set(dpa)],
        }
    }

    pub fn singleton(dpa: &Dpa, ts: TrackedState) -> Self {
        let mut set = TrackedSet::empty(dpa);
        set.insert(dpa, ts);
        set
    }

    pub fn from_states(dpa: &Dpa, states: impl IntoIterator<Item = TrackedState>) -> Self {
        let mut set = TrackedSet::empty(dpa);
        for ts in states {
            set.insert(dpa, ts);
        }
        set
    }

    pub(crate) fn from_words(words: &[u64]) -> Self {
        TrackedSet {
            bits: words.to_vec(),
        }
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.bits
    }

    pub fn insert(&mut self, dpa: &Dpa, ts: TrackedState) {
        let i = slot(dpa, ts);
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, dpa: &Dpa, ts: TrackedState) -> bool {
        if dpa.color_index(ts.color).is_none() || ts.state >= dpa.num_states() {
            return false;
        }
        let i = slot(dpa, ts);
        self.bits[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn union(&self, other: &TrackedSet) -> TrackedSet {
        TrackedSet {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a | b)
                .collect(),
        }
    }

    pub fn is_subset(&self, other: &TrackedSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn iter<'a>(&'a self, dpa: &'a Dpa) -> impl Iterator<Item = TrackedState> + 'a {
        iter_words(dpa, &self.bits)
    }

    /// The distinct automaton states occurring in the set, ascending.
    pub fn states(&self, dpa: &Dpa) -> Vec<usize> {
        let mut states: Vec<usize> = self.iter(dpa).map(|ts| ts.state).collect();
        states.dedup();
        states
    }
}

fn iter_words<'a>(dpa: &'a Dpa, words: &'a [u64]) -> impl Iterator<Item = TrackedState> + 'a {
    let nc = dpa.color_set().len();
    words.iter().enumerate().flat_map(move |(wi, &word)| {
        let mut w = word;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let bit = w.trailing_zeros() as usize;
            w &= w - 1;
            let i = wi * 64 + bit;
            Some(TrackedState::new(i / nc, dpa.color_set()[i % nc]))
        })
    })
}

/// `δ_T((q, c), (a, b)) = (q', max(c, Ω(q')))` with `q' = δ(q, (a, b))`.
pub fn delta_t(dpa: &Dpa, ts: TrackedState, input: usize, output: usize) -> TrackedState {
    let next = dpa.successor(ts.state, input, output);
    TrackedState::new(next, ts.color.max(dpa.color(next)))
}

fn step_words(dpa: &Dpa, src: &[u64], input: usize, dst: &mut [u64]) {
    dst.fill(0);
    let nc = dpa.color_set().len();
    for ts in iter_words(dpa, src) {
        for b in 0..dpa.sigma_o().len() {
            let next = delta_t(dpa, ts, input, b);
            let ci = dpa.color_index(next.color).unwrap();
            let i = next.state * nc + ci;
            dst[i / 64] |= 1 << (i % 64);
        }
    }
}

/// Powerset step over the output-projected tracked automaton:
/// the union of `δ_T(s, (a, b))` over `s ∈ set` and `b ∈ Σ_O`.
pub fn delta_p(dpa: &Dpa, set: &TrackedSet, input: usize) -> TrackedSet {
    let mut out = TrackedSet::empty(dpa);
    step_words(dpa, &set.bits, input, &mut out.bits);
    out
}

/// `δ_P*` over a whole input word.
pub fn delta_p_star(dpa: &Dpa, set: &TrackedSet, word: &[usize]) -> TrackedSet {
    word.iter()
        .fold(set.clone(), |acc, &a| delta_p(dpa, &acc, a))
}

/// The behavior of an input block: for every start state `q`, the tracked
/// states reachable from `(q, Ω(q))` under some choice of output letters.
///
/// Values are stored back to back in one buffer, `stride` words per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BehaviorFunction {
    stride: usize,
    data: Box<[u64]>,
}

impl BehaviorFunction {
    pub fn num_states(&self) -> usize {
        self.data.len() / self.stride
    }

    pub(crate) fn value_words(&self, q: usize) -> &[u64] {
        &self.data[q * self.stride..(q + 1) * self.stride]
    }

    /// `f(q)`.
    pub fn value(&self, q: usize) -> TrackedSet {
        TrackedSet::from_words(self.value_words(q))
    }

    /// `f(q, c)` for a tracked argument; the color is ignored.
    pub fn apply(&self, ts: TrackedState) -> TrackedSet {
        self.value(ts.state)
    }
}

/// The behavior of the empty block: `q ↦ {(q, Ω(q))}`.
pub fn behavior_identity(dpa: &Dpa) -> BehaviorFunction {
    let stride = words_per_set(dpa);
    let mut data = vec![0u64; stride * dpa.num_states()].into_boxed_slice();
    for q in 0..dpa.num_states() {
        let i = slot(dpa, TrackedState::fresh(dpa, q));
        data[q * stride + i / 64] |= 1 << (i % 64);
    }
    BehaviorFunction { stride, data }
}

/// Extends the summarized block by one input letter: `f'(q) = δ_P(f(q), a)`.
pub fn behavior_step(dpa: &Dpa, f: &BehaviorFunction, input: usize) -> BehaviorFunction {
    let stride = f.stride;
    let mut data = vec![0u64; f.data.len()].into_boxed_slice();
    for q in 0..f.num_states() {
        step_words(
            dpa,
            f.value_words(q),
            input,
            &mut data[q * stride..(q + 1) * stride],
        );
    }
    BehaviorFunction { stride, data }
}

/// The set `{ f_w : |w| = k }` for some `k`.
pub type Layer = BTreeSet<BehaviorFunction>;

/// `{ behavior_step(f, a) : f ∈ layer, a ∈ Σ_I }`.
pub fn step_layer(dpa: &Dpa, layer: &Layer) -> Layer {
    let inputs = dpa.sigma_i().len();
    layer
        .iter()
        .flat_map(|f| (0..inputs).map(move |a| behavior_step(dpa, f, a)))
        .collect()
}

/// Interned behavior functions with memoized single-letter steps.
#[derive(Debug, Clone, Default)]
struct FunctionTable {
    functions: Vec<BehaviorFunction>,
    ids: HashMap<BehaviorFunction, u32>,
    /// `steps[id]` holds the successor ids for each input letter, once computed.
    steps: Vec<Option<Box<[u32]>>>,
}

impl FunctionTable {
    fn intern(&mut self, f: BehaviorFunction) -> u32 {
        if let Some(&id) = self.ids.get(&f) {
            return id;
        }
        let id = u32::try_from(self.functions.len()).expect("fewer than 2^32 behavior functions");
        self.functions.push(f.clone());
        self.ids.insert(f, id);
        self.steps.push(None);
        id
    }

    /// Successor layer of a sorted id list.
    fn step(&mut self, dpa: &Dpa, layer: &[u32]) -> Vec<u32> {
        let inputs = dpa.sigma_i().len();
        let pending: Vec<u32> = layer
            .iter()
            .copied()
            .filter(|&id| self.steps[id as usize].is_none())
            .collect();
        let compute = |&id: &u32| -> Vec<BehaviorFunction> {
            let f = &self.functions[id as usize];
            (0..inputs).map(|a| behavior_step(dpa, f, a)).collect()
        };
        let computed: Vec<Vec<BehaviorFunction>> = if pending.len() >= PARALLEL_STEP_THRESHOLD {
            pending.par_iter().map(compute).collect()
        } else {
            pending.iter().map(compute).collect()
        };
        for (id, successors) in pending.into_iter().zip(computed) {
            let ids: Box<[u32]> = successors.into_iter().map(|g| self.intern(g)).collect();
            self.steps[id as usize] = Some(ids);
        }
        let mut next: Vec<u32> = layer
            .iter()
            .flat_map(|&id| self.steps[id as usize].as_deref().unwrap().iter().copied())
            .collect();
        next.sort_unstable();
        next.dedup();
        next
    }
}

/// A borrowed view of one layer of a [`LayerSequence`].
#[derive(Debug, Clone, Copy)]
pub struct LayerRef<'a> {
    table: &'a FunctionTable,
    ids: &'a [u32],
}

impl<'a> LayerRef<'a> {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &'a BehaviorFunction> + 'a {
        let table = self.table;
        self.ids
            .iter()
            .map(move |&id| &table.functions[id as usize])
    }

    pub fn to_set(&self) -> Layer {
        self.iter().cloned().collect()
    }
}

impl<'a> IntoIterator for LayerRef<'a> {
    type Item = &'a BehaviorFunction;
    type IntoIter = Box<dyn Iterator<Item = &'a BehaviorFunction> + 'a>;

    fn into_iter(self) -> Self::IntoIter {
        Box::new(self.iter())
    }
}

/// The eventually periodic sequence of layers `F_0, F_1, …`.
///
/// Stores `F_0 … F_{μ+λ-1}`, pairwise distinct, with `F_{μ+λ} = F_μ`.
/// Functions are interned once and layers are sorted id lists.
#[derive(Debug, Clone)]
pub struct LayerSequence {
    table: FunctionTable,
    layers: Vec<Arc<[u32]>>,
    preperiod: usize,
    period: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerStats {
    pub preperiod: usize,
    pub period: usize,
    pub distinct_functions: usize,
    pub layer_sizes: Vec<usize>,
}

impl LayerSequence {
    /// `μ`
    pub fn preperiod(&self) -> usize {
        self.preperiod
    }

    /// `λ`
    pub fn period(&self) -> usize {
        self.period
    }

    /// Number of stored (distinct) layers, `μ + λ`.
    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// The stored layer at position `i < μ + λ`.
    pub fn layer(&self, i: usize) -> LayerRef<'_> {
        LayerRef {
            table: &self.table,
            ids: &self.layers[i],
        }
    }

    pub fn layers(&self) -> impl Iterator<Item = LayerRef<'_>> + '_ {
        (0..self.len()).map(|i| self.layer(i))
    }

    /// Position in the stored prefix that represents `F_k`.
    pub fn fold_index(&self, k: &BigUint) -> usize {
        match k.to_usize() {
            Some(small) if small < self.layers.len() => small,
            _ => {
                let offset = (k - BigUint::from(self.preperiod)) % BigUint::from(self.period);
                self.preperiod + offset.to_usize().expect("offset below period")
            }
        }
    }

    /// `F_k`, for any `k`.
    pub fn layer_at(&self, k: &BigUint) -> LayerRef<'_> {
        self.layer(self.fold_index(k))
    }

    pub fn stats(&self) -> LayerStats {
        LayerStats {
            preperiod: self.preperiod,
            period: self.period,
            distinct_functions: self.table.functions.len(),
            layer_sizes: self.layers.iter().map(|l| l.len()).collect(),
        }
    }
}

/// Iterates `F_{i+1} = step(F_i)` from `F_0 = {identity}` until a layer
/// repeats. Fails if more than `cap` distinct layers appear.
pub fn layer_sequence(dpa: &Dpa, cap: usize) -> Result<LayerSequence> {
    let mut table = FunctionTable::default();
    let first: Arc<[u32]> = Arc::from(vec![table.intern(behavior_identity(dpa))]);
    let mut seen: HashMap<Arc<[u32]>, usize> = HashMap::from([(first.clone(), 0)]);
    let mut layers = vec![first];
    loop {
        let next: Arc<[u32]> = Arc::from(table.step(dpa, layers.last().unwrap()));
        if let Some(&i) = seen.get(&next) {
            let period = layers.len() - i;
            return Ok(LayerSequence {
                table,
                layers,
                preperiod: i,
                period,
            });
        }
        if layers.len() >= cap {
            return Err(Error::resource("layer count", cap as u64)
                .with_context("no repeated layer found; raise the layer cap"));
        }
        seen.insert(next.clone(), layers.len());
        layers.push(next);
    }
}
