//! Minimal lookahead: the factor-two approximation and the exact oracle.
//!
//! [`approx_min_lookahead`] scans `k = 1, 2, …` and stops at the first `k*`
//! for which Player O wins the abstract game built from the layer `F_k`,
//! reporting `2k* - 1`. If Player O wins the delay game with lookahead `k`
//! she wins the abstract game for `k`, and a win there yields a win in the
//! delay game with lookahead `2k - 1`; hence `k_opt ≤ 2k* - 1 ≤ 2 k_opt - 1`.
//!
//! The scan never needs to go past `μ + λ`: the abstract game for `k`
//! depends only on `F_k`, and every layer with `k ≥ 1` already occurs among
//! `F_1 … F_{μ+λ}`.
//!
//! [`exact_min_lookahead`] solves the explicit queue game for each `k` up to
//! a bound. Its size grows like `|Σ_I|^k`, so it is only usable for small `k`.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::arena::{build_abstract_game_compact, build_queue_game, Player, DEFAULT_VERTEX_BUDGET};
use crate::automaton::Dpa;
use crate::error::{Error, Result};
use crate::parity_solver::solve_parity;
use crate::tracking::{layer_sequence, LayerSequence};

/// Default cap on the number of distinct behavior layers.
pub const DEFAULT_LAYER_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub vertex_budget: usize,
    pub layer_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            vertex_budget: DEFAULT_VERTEX_BUDGET,
            layer_cap: DEFAULT_LAYER_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    /// Every `k` in order; keeps `k*` minimal.
    #[default]
    Linear,
    /// Bisection; only valid if winning the abstract game is monotone in `k`,
    /// which is not established.
    Binary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproxOptions {
    pub scan: ScanMode,
    /// Upper bound on the scanned `k`, in addition to `k_max` and `μ + λ`.
    pub cap: Option<BigUint>,
    pub limits: Limits,
    /// Number of `k` values evaluated concurrently in the linear scan.
    pub parallelism: usize,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions {
            scan: ScanMode::Linear,
            cap: None,
            limits: Limits::default(),
            parallelism: 1,
        }
    }
}

/// `2^(n²·|C| + 1)`: if Player O wins with some lookahead, she wins with this one.
pub fn k_max(dpa: &Dpa) -> BigUint {
    let n = dpa.num_states() as u64;
    let c = dpa.color_set().len() as u64;
    BigUint::one() << (n * n * c + 1)
}

/// Whether Player O wins the abstract game for `k ≥ 1`.
pub fn wins_abstract(dpa: &Dpa, k: &BigUint, limits: &Limits) -> Result<bool> {
    let layers = layer_sequence(dpa, limits.layer_cap)?;
    wins_abstract_in(dpa, &layers, k, limits.vertex_budget)
}

/// [`wins_abstract`] against a precomputed layer sequence.
pub fn wins_abstract_in(
    dpa: &Dpa,
    layers: &LayerSequence,
    k: &BigUint,
    vertex_budget: usize,
) -> Result<bool> {
    if k.bits() == 0 {
        return Err(Error::semantic("k", "the abstract game needs k >= 1"));
    }
    Ok(abstract_outcome(dpa, layers, layers.fold_index(k), vertex_budget)?.0)
}

fn abstract_outcome(
    dpa: &Dpa,
    layers: &LayerSequence,
    index: usize,
    vertex_budget: usize,
) -> Result<(bool, usize)> {
    let game = build_abstract_game_compact(dpa, layers.layer(index), vertex_budget)?;
    let solution = solve_parity(&game);
    Ok((
        solution.winner(game.initial()) == Player::O,
        game.num_vertices(),
    ))
}

/// Whether Player O wins the delay game with lookahead `k`.
pub fn wins_exact(dpa: &Dpa, k: usize, limits: &Limits) -> Result<bool> {
    Ok(exact_outcome(dpa, k, limits)?.0)
}

fn exact_outcome(dpa: &Dpa, k: usize, limits: &Limits) -> Result<(bool, usize)> {
    let game = build_queue_game(dpa, k, limits.vertex_budget)?;
    let solution = solve_parity(&game);
    Ok((
        solution.winner(game.initial()) == Player::O,
        game.num_vertices(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScannedK {
    pub k: u64,
    pub winner: Player,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ApproxOutcome {
    Win { k_star: u64, reported: u64 },
    NoWin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LayerSummary {
    pub preperiod: usize,
    pub period: usize,
}

/// Timings and sizes; not part of the deterministic result.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RunMeta {
    pub elapsed_ms: u128,
    pub largest_game_vertices: usize,
    pub games_built: usize,
}

impl RunMeta {
    fn record(&mut self, vertices: usize) {
        self.games_built += 1;
        self.largest_game_vertices = self.largest_game_vertices.max(vertices);
    }

    fn finish(&mut self, started: Instant) {
        self.elapsed_ms = Duration::as_millis(&started.elapsed());
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LookaheadReport {
    pub outcome: ApproxOutcome,
    /// Evaluated `k` values up to `k*`, ascending.
    pub scanned_ks: Vec<ScannedK>,
    pub layer_stats: LayerSummary,
    pub scan: ScanMode,
    pub effective_bound: u64,
    /// Decimal rendering of `k_max`.
    pub k_max: String,
    #[serde(skip)]
    pub meta: RunMeta,
}

impl LookaheadReport {
    pub fn reported(&self) -> Option<u64> {
        match self.outcome {
            ApproxOutcome::Win { reported, .. } => Some(reported),
            ApproxOutcome::NoWin => None,
        }
    }
}

/// Approximates the minimal lookahead within a factor of two.
pub fn approx_min_lookahead(dpa: &Dpa, opts: &ApproxOptions) -> Result<LookaheadReport> {
    let started = Instant::now();
    let layers = layer_sequence(dpa, opts.limits.layer_cap)?;
    let kmax = k_max(dpa);
    let mut bound = BigUint::from(layers.len()).min(kmax.clone());
    if let Some(cap) = &opts.cap {
        bound = bound.min(cap.clone());
    }
    let bound = bound.to_u64().expect("bounded by the layer count");

    let mut meta = RunMeta::default();
    let mut cache: HashMap<usize, bool> = HashMap::new();
    let mut scanned: Vec<ScannedK> = Vec::new();
    let budget = opts.limits.vertex_budget;

    let mut evaluate =
        |ks: &[u64], meta: &mut RunMeta, scanned: &mut Vec<ScannedK>| -> Result<Vec<bool>> {
            let indices: Vec<usize> = ks
                .iter()
                .map(|&k| layers.fold_index(&BigUint::from(k)))
                .collect();
            let mut fresh: Vec<usize> = indices
                .iter()
                .copied()
                .filter(|i| !cache.contains_key(i))
                .collect();
            fresh.sort_unstable();
            fresh.dedup();
            let solve = |&i: &usize| {
                abstract_outcome(dpa, &layers, i, budget).map_err(|e| {
                    let k = ks[indices.iter().position(|&j| j == i).unwrap()];
                    e.with_context(format!("abstract game for k = {k}"))
                })
            };
            let results: Vec<Result<(bool, usize)>> = if opts.parallelism > 1 && fresh.len() > 1 {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(opts.parallelism)
                    .build()
                    .expect("thread pool");
                pool.install(|| fresh.par_iter().map(solve).collect())
            } else {
                fresh.iter().map(solve).collect()
            };
            for (i, result) in fresh.iter().zip(results) {
                let (wins, vertices) = result?;
                meta.record(vertices);
                cache.insert(*i, wins);
            }
            let wins: Vec<bool> = indices.iter().map(|i| cache[i]).collect();
            for (&k, &w) in ks.iter().zip(&wins) {
                scanned.push(ScannedK {
                    k,
                    winner: if w { Player::O } else { Player::I },
                });
            }
            Ok(wins)
        };

    let mut k_star = None;
    match opts.scan {
        ScanMode::Linear => {
            let batch = opts.parallelism.max(1) as u64;
            let mut k = 1;
            while k <= bound && k_star.is_none() {
                let ks: Vec<u64> = (k..=bound.min(k + batch - 1)).collect();
                let wins = evaluate(&ks, &mut meta, &mut scanned)?;
                k_star = ks.iter().zip(&wins).find(|(_, &w)| w).map(|(&k, _)| k);
                k += batch;
            }
        }
        ScanMode::Binary => {
            if bound >= 1 && evaluate(&[bound], &mut meta, &mut scanned)?[0] {
                let (mut lo, mut hi) = (1, bound);
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    if evaluate(&[mid], &mut meta, &mut scanned)?[0] {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                k_star = Some(lo);
            }
        }
    }

    scanned.sort_by_key(|s| s.k);
    scanned.dedup_by_key(|s| s.k);
    if let Some(ks) = k_star {
        scanned.retain(|s| s.k <= ks);
    }
    meta.finish(started);
    Ok(LookaheadReport {
        outcome: match k_star {
            Some(k_star) => ApproxOutcome::Win {
                k_star,
                reported: 2 * k_star - 1,
            },
            None => ApproxOutcome::NoWin,
        },
        scanned_ks: scanned,
        layer_stats: LayerSummary {
            preperiod: layers.preperiod(),
            period: layers.period(),
        },
        scan: opts.scan,
        effective_bound: bound,
        k_max: kmax.to_string(),
        meta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExactOutcome {
    Exact { k_opt: u64 },
    NoWinUpTo { bound: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactReport {
    pub outcome: ExactOutcome,
    pub per_k: Vec<ScannedK>,
    /// Whether the per-k winners are monotone, as they must be.
    pub monotone: bool,
    #[serde(skip)]
    pub meta: RunMeta,
}

impl ExactReport {
    pub fn k_opt(&self) -> Option<u64> {
        match self.outcome {
            ExactOutcome::Exact { k_opt } => Some(k_opt),
            ExactOutcome::NoWinUpTo { .. } => None,
        }
    }
}

/// Smallest `k ≤ bound` for which Player O wins the delay game, by solving
/// every queue game up to `bound`.
pub fn exact_min_lookahead(dpa: &Dpa, bound: u64, limits: &Limits) -> Result<ExactReport> {
    let started = Instant::now();
    let mut meta = RunMeta::default();
    let mut per_k = Vec::new();
    for k in 0..=bound {
        let (wins, vertices) = exact_outcome(dpa, k as usize, limits)
            .map_err(|e| e.with_context(format!("queue game for k = {k}")))?;
        meta.record(vertices);
        per_k.push(ScannedK {
            k,
            winner: if wins { Player::O } else { Player::I },
        });
    }
    let first = per_k.iter().find(|s| s.winner == Player::O).map(|s| s.k);
    let monotone = per_k
        .windows(2)
        .all(|w| w[0].winner == Player::I || w[1].winner == Player::O);
    meta.finish(started);
    Ok(ExactReport {
        outcome: match first {
            Some(k_opt) => ExactOutcome::Exact { k_opt },
            None => ExactOutcome::NoWinUpTo { bound },
        },
        per_k,
        monotone,
        meta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sandwich {
    /// `k_opt ≤ reported ≤ 2·k_opt − 1`.
    Holds,
    Violated,
    /// `k_opt = 0`: the approximation starts at `k = 1` and reports at least 1.
    Boundary,
    /// The exact oracle found no win within its bound and nothing contradicts.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub k_opt: Option<u64>,
    pub reported: Option<u64>,
    pub sandwich_holds: Sandwich,
    pub exact: ExactReport,
    pub approx: LookaheadReport,
}

/// Classifies an exact result against an approximation result.
pub fn sandwich(exact: &ExactReport, approx: &LookaheadReport) -> Sandwich {
    match (exact.outcome, approx.reported()) {
        (ExactOutcome::Exact { k_opt: 0 }, Some(_)) => Sandwich::Boundary,
        (ExactOutcome::Exact { k_opt }, Some(r)) => {
            if k_opt <= r && r < 2 * k_opt {
                Sandwich::Holds
            } else {
                Sandwich::Violated
            }
        }
        // A win in the delay game implies a win in the abstract game.
        (ExactOutcome::Exact { .. }, None) => Sandwich::Violated,
        // A reported lookahead within the bound must be winning.
        (ExactOutcome::NoWinUpTo { bound }, Some(r)) if r <= bound => Sandwich::Violated,
        (ExactOutcome::NoWinUpTo { .. }, _) => Sandwich::Undetermined,
    }
}

/// Runs the exact oracle up to `bound` and the approximation side by side.
pub fn compare(dpa: &Dpa, bound: u64, opts: &ApproxOptions) -> Result<Comparison> {
    let exact = exact_min_lookahead(dpa, bound, &opts.limits)?;
    let approx = approx_min_lookahead(dpa, opts)?;
    Ok(Comparison {
        k_opt: exact.k_opt(),
        reported: approx.reported(),
        sandwich_holds: sandwich(&exact, &approx),
        exact,
        approx,
    })
}
