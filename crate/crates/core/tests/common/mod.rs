//! Test-only oracles that recompute everything from the raw transition table.

#![allow(dead_code)]

use std::collections::BTreeSet;

use delaygame::automaton::{parse_dpa, random_dpa, run_prefix, Dpa, Letter};
use delaygame::tracking::{Layer, TrackedState};

pub fn fixture(name: &str) -> Dpa {
    let text = match name {
        "d_univ" => include_str!("../../fixtures/d_univ.json"),
        "d_empty" => include_str!("../../fixtures/d_empty.json"),
        "d_pred1" => include_str!("../../fixtures/d_pred1.json"),
        "d_pred2" => include_str!("../../fixtures/d_pred2.json"),
        other => panic!("no fixture {other}"),
    };
    parse_dpa(text).unwrap()
}

pub fn fixtures() -> Vec<(&'static str, Dpa)> {
    ["d_univ", "d_empty", "d_pred1", "d_pred2"]
        .into_iter()
        .map(|name| (name, fixture(name)))
        .collect()
}

/// The random corpus: binary alphabets, up to 4 states and 3 colors.
pub fn corpus_instance(seed: u64) -> Dpa {
    let n = 1 + (seed % 4) as usize;
    let colors = 1 + ((seed / 4) % 3) as u32;
    random_dpa(n, colors, 2, 2, 1000 + seed)
}

/// A behavior function as plain sets, one per start state.
pub type NaiveFunction = Vec<BTreeSet<(usize, u32)>>;

pub fn naive_identity(dpa: &Dpa) -> NaiveFunction {
    (0..dpa.num_states())
        .map(|q| BTreeSet::from([(q, dpa.colors()[q])]))
        .collect()
}

pub fn naive_step(dpa: &Dpa, f: &NaiveFunction, a: usize) -> NaiveFunction {
    f.iter()
        .map(|set| {
            let mut out = BTreeSet::new();
            for &(q, c) in set {
                for b in 0..dpa.sigma_o().len() {
                    let next = dpa.successor(q, a, b);
                    out.insert((next, c.max(dpa.colors()[next])));
                }
            }
            out
        })
        .collect()
}

/// `F_k` for `k = 0..=max_k` by plain k-fold stepping from `{identity}`.
pub fn naive_layers(dpa: &Dpa, max_k: usize) -> Vec<BTreeSet<NaiveFunction>> {
    let mut layers = vec![BTreeSet::from([naive_identity(dpa)])];
    for _ in 0..max_k {
        let next = layers
            .last()
            .unwrap()
            .iter()
            .flat_map(|f| (0..dpa.sigma_i().len()).map(move |a| naive_step(dpa, f, a)))
            .collect();
        layers.push(next);
    }
    layers
}

pub fn to_naive(dpa: &Dpa, layer: &Layer) -> BTreeSet<NaiveFunction> {
    layer
        .iter()
        .map(|f| {
            (0..dpa.num_states())
                .map(|q| {
                    f.value(q)
                        .iter(dpa)
                        .map(|TrackedState { state, color }| (state, color))
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// All words of the given length over an alphabet of size `size`.
pub fn words(size: usize, len: usize) -> Vec<Vec<usize>> {
    (0..len).fold(vec![vec![]], |acc, _| {
        acc.into_iter()
            .flat_map(|w| {
                (0..size).map(move |a| {
                    let mut w = w.clone();
                    w.push(a);
                    w
                })
            })
            .collect()
    })
}

/// `{ run_prefix(q, w') : w' projects to w }` by enumerating output words.
pub fn reachable_by_enumeration(dpa: &Dpa, q: usize, w: &[usize]) -> BTreeSet<(usize, u32)> {
    words(dpa.sigma_o().len(), w.len())
        .into_iter()
        .map(|outs| {
            let word: Vec<Letter> = w
                .iter()
                .zip(&outs)
                .map(|(&a, &b)| Letter::new(a, b))
                .collect();
            run_prefix(dpa, q, &word).unwrap()
        })
        .collect()
}
