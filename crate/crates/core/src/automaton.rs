//! Deterministic parity automata over a product alphabet `Σ_I × Σ_O`.
//!
//! Acceptance is max-parity: a run is accepting iff the largest color seen
//! infinitely often is even. Colors are arbitrary naturals; the color set of
//! an automaton is the image of its coloring.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A letter name. Non-empty, without whitespace or commas.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Symbol(String);

impl Symbol {
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.is_empty() {
            return Err(Error::semantic("symbol", "empty symbol"));
        }
        if text.chars().any(|c| c.is_whitespace() || c == ',') {
            return Err(Error::semantic(
                "symbol",
                format!("symbol {text:?} contains whitespace or a comma"),
            ));
        }
        Ok(Symbol(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A letter of the product alphabet, as dense indices into `Σ_I` and `Σ_O`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub input: usize,
    pub output: usize,
}

impl Letter {
    pub const fn new(input: usize, output: usize) -> Self {
        Letter { input, output }
    }
}

/// An ultimately periodic word `prefix · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoWord {
    prefix: Vec<Letter>,
    cycle: Vec<Letter>,
}

impl LassoWord {
    pub fn new(prefix: Vec<Letter>, cycle: Vec<Letter>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::semantic("lasso", "cycle must be non-empty"));
        }
        Ok(LassoWord { prefix, cycle })
    }

    pub fn prefix(&self) -> &[Letter] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[Letter] {
        &self.cycle
    }
}

/// A deterministic parity automaton with a total transition function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dpa {
    sigma_i: Vec<Symbol>,
    sigma_o: Vec<Symbol>,
    initial: usize,
    /// Color of each state.
    omega: Vec<u32>,
    /// Successor table indexed by `(q * |Σ_I| + a) * |Σ_O| + b`.
    delta: Vec<usize>,
    /// Sorted image of `omega`.
    color_set: Vec<u32>,
}

impl Dpa {
    /// Builds an automaton from a dense successor table laid out as
    /// `delta[(q * |Σ_I| + a) * |Σ_O| + b]`.
    pub fn new(
        sigma_i: Vec<Symbol>,
        sigma_o: Vec<Symbol>,
        initial: usize,
        omega: Vec<u32>,
        delta: Vec<usize>,
    ) -> Result<Self> {
        check_alphabet(&sigma_i, "sigma_i")?;
        check_alphabet(&sigma_o, "sigma_o")?;
        let n = omega.len();
        if n == 0 {
            return Err(Error::semantic(
                "states",
                "automaton needs at least one state",
            ));
        }
        if initial >= n {
            return Err(Error::semantic(
                "initial",
                format!("initial state {initial} out of range (states = {n})"),
            ));
        }
        let expected = n * sigma_i.len() * sigma_o.len();
        if delta.len() != expected {
            return Err(Error::semantic(
                "transitions",
                format!("expected {expected} transitions, got {}", delta.len()),
            ));
        }
        if let Some((i, &to)) = delta.iter().enumerate().find(|(_, &to)| to >= n) {
            return Err(Error::semantic(
                format!("transitions[{i}]"),
                format!("target state {to} out of range (states = {n})"),
            ));
        }
        let mut color_set = omega.clone();
        color_set.sort_unstable();
        color_set.dedup();
        Ok(Dpa {
            sigma_i,
            sigma_o,
            initial,
            omega,
            delta,
            color_set,
        })
    }

    /// One state with the given color and a self-loop on every letter.
    pub fn single_state(color: u32, in_size: usize, out_size: usize) -> Self {
        Dpa::new(
            numbered_alphabet(in_size),
            numbered_alphabet(out_size),
            0,
            vec![color],
            vec![0; in_size * out_size],
        )
        .expect("single-state automaton is valid")
    }

    pub fn num_states(&self) -> usize {
        self.omega.len()
    }

    pub fn sigma_i(&self) -> &[Symbol] {
        &self.sigma_i
    }

    pub fn sigma_o(&self) -> &[Symbol] {
        &self.sigma_o
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn color(&self, q: usize) -> u32 {
        self.omega[q]
    }

    pub fn colors(&self) -> &[u32] {
        &self.omega
    }

    /// The color set `C`, sorted ascending.
    pub fn color_set(&self) -> &[u32] {
        &self.color_set
    }

    pub fn min_color(&self) -> u32 {
        self.color_set[0]
    }

    pub fn max_color(&self) -> u32 {
        *self.color_set.last().unwrap()
    }

    /// Position of `color` within [`Dpa::color_set`].
    pub fn color_index(&self, color: u32) -> Option<usize> {
        self.color_set.binary_search(&color).ok()
    }

    /// `δ(q, (a, b))`. Panics on out-of-range indices.
    #[inline]
    pub fn successor(&self, q: usize, a: usize, b: usize) -> usize {
        let (ni, no) = (self.sigma_i.len(), self.sigma_o.len());
        debug_assert!(a < ni && b < no);
        self.delta[(q * ni + a) * no + b]
    }

    pub fn input_index(&self, symbol: &str) -> Result<usize> {
        self.sigma_i
            .iter()
            .position(|s| s.as_str() == symbol)
            .ok_or_else(|| Error::UnknownSymbol {
                symbol: symbol.to_owned(),
                alphabet: "sigma_i",
            })
    }

    pub fn output_index(&self, symbol: &str) -> Result<usize> {
        self.sigma_o
            .iter()
            .position(|s| s.as_str() == symbol)
            .ok_or_else(|| Error::UnknownSymbol {
                symbol: symbol.to_owned(),
                alphabet: "sigma_o",
            })
    }

    /// Resolves a pair of symbol names to a [`Letter`].
    pub fn letter(&self, input: &str, output: &str) -> Result<Letter> {
        Ok(Letter::new(
            self.input_index(input)?,
            self.output_index(output)?,
        ))
    }

    fn check_letter(&self, letter: Letter) -> Result<()> {
        if letter.input >= self.sigma_i.len() {
            return Err(Error::OutOfRange {
                what: "input letter",
                index: letter.input,
                size: self.sigma_i.len(),
            });
        }
        if letter.output >= self.sigma_o.len() {
            return Err(Error::OutOfRange {
                what: "output letter",
                index: letter.output,
                size: self.sigma_o.len(),
            });
        }
        Ok(())
    }

    fn check_state(&self, q: usize) -> Result<()> {
        if q >= self.num_states() {
            return Err(Error::OutOfRange {
                what: "state",
                index: q,
                size: self.num_states(),
            });
        }
        Ok(())
    }
}

fn numbered_alphabet(size: usize) -> Vec<Symbol> {
    (0..size).map(|i| Symbol(i.to_string())).collect()
}

fn check_alphabet(alphabet: &[Symbol], name: &str) -> Result<()> {
    if alphabet.is_empty() {
        return Err(Error::semantic(name, "alphabet must be non-empty"));
    }
    let mut seen = HashMap::new();
    for (i, s) in alphabet.iter().enumerate() {
        if let Some(j) = seen.insert(s.as_str(), i) {
            return Err(Error::semantic(
                format!("{name}[{i}]"),
                format!("duplicate symbol {:?} (also at index {j})", s.as_str()),
            ));
        }
    }
    Ok(())
}

/// Runs `word` from `start` and returns the reached state together with the
/// maximal color over all visited states, `start` included.
pub fn run_prefix(dpa: &Dpa, start: usize, word: &[Letter]) -> Result<(usize, u32)> {
    dpa.check_state(start)?;
    let mut q = start;
    let mut color = dpa.color(start);
    for &letter in word {
        dpa.check_letter(letter)?;
        q = dpa.successor(q, letter.input, letter.output);
        color = color.max(dpa.color(q));
    }
    Ok((q, color))
}

/// Decides whether the run on `prefix · cycle^ω` is accepting.
pub fn accepts_lasso(dpa: &Dpa, lasso: &LassoWord) -> Result<bool> {
    let (mut q, _) = run_prefix(dpa, dpa.initial(), lasso.prefix())?;
    // State at each cycle boundary, and the max color entered during each pass.
    let mut boundary: HashMap<usize, usize> = HashMap::new();
    let mut pass_colors = Vec::new();
    loop {
        if let Some(&first) = boundary.get(&q) {
            let limsup = pass_colors[first..].iter().copied().max().unwrap();
            return Ok(limsup % 2 == 0);
        }
        boundary.insert(q, pass_colors.len());
        let mut max = 0;
        for &letter in lasso.cycle() {
            dpa.check_letter(letter)?;
            q = dpa.successor(q, letter.input, letter.output);
            max = max.max(dpa.color(q));
        }
        pass_colors.push(max);
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DpaDocument {
    sigma_i: Vec<String>,
    sigma_o: Vec<String>,
    states: usize,
    initial: usize,
    colors: Vec<u32>,
    transitions: Vec<TransitionEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionEntry {
    from: usize,
    #[serde(rename = "in")]
    input: String,
    #[serde(rename = "out")]
    output: String,
    to: usize,
}

/// Parses the JSON instance format.
pub fn parse_dpa(text: &str) -> Result<Dpa> {
    let doc: DpaDocument = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let symbols = |names: Vec<String>, field: &str| -> Result<Vec<Symbol>> {
        names
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                Symbol::new(s).map_err(|e| match e {
                    Error::Semantic { message, .. } => {
                        Error::semantic(format!("{field}[{i}]"), message)
                    }
                    other => other,
                })
            })
            .collect()
    };
    let sigma_i = symbols(doc.sigma_i, "sigma_i")?;
    let sigma_o = symbols(doc.sigma_o, "sigma_o")?;
    check_alphabet(&sigma_i, "sigma_i")?;
    check_alphabet(&sigma_o, "sigma_o")?;
    let n = doc.states;
    if n == 0 {
        return Err(Error::semantic(
            "states",
            "automaton needs at least one state",
        ));
    }
    if doc.colors.len() != n {
        return Err(Error::semantic(
            "colors",
            format!("expected {n} colors, got {}", doc.colors.len()),
        ));
    }
    if doc.initial >= n {
        return Err(Error::semantic(
            "initial",
            format!("initial state {} out of range (states = {n})", doc.initial),
        ));
    }

    let index_of =
        |alphabet: &[Symbol], name: &str| alphabet.iter().position(|s| s.as_str() == name);
    let (ni, no) = (sigma_i.len(), sigma_o.len());
    let mut delta: Vec<Option<usize>> = vec![None; n * ni * no];
    for (i, t) in doc.transitions.iter().enumerate() {
        let loc = || format!("transitions[{i}]");
        if t.from >= n {
            return Err(Error::semantic(
                loc(),
                format!("source state {} out of range (states = {n})", t.from),
            ));
        }
        if t.to >= n {
            return Err(Error::semantic(
                loc(),
                format!("target state {} out of range (states = {n})", t.to),
            ));
        }
        let a = index_of(&sigma_i, &t.input)
            .ok_or_else(|| Error::semantic(loc(), format!("unknown input symbol {:?}", t.input)))?;
        let b = index_of(&sigma_o, &t.output).ok_or_else(|| {
            Error::semantic(loc(), format!("unknown output symbol {:?}", t.output))
        })?;
        let slot = &mut delta[(t.from * ni + a) * no + b];
        if slot.is_some() {
            return Err(Error::semantic(
                loc(),
                format!(
                    "duplicate transition from {} on ({}, {})",
                    t.from, t.input, t.output
                ),
            ));
        }
        *slot = Some(t.to);
    }
    let mut table = Vec::with_capacity(delta.len());
    for (i, slot) in delta.into_iter().enumerate() {
        match slot {
            Some(to) => table.push(to),
            None => {
                let (q, a, b) = (i / (ni * no), (i / no) % ni, i % no);
                return Err(Error::semantic(
                    "transitions",
                    format!(
                        "missing transition from {q} on ({}, {})",
                        sigma_i[a], sigma_o[b]
                    ),
                ));
            }
        }
    }
    Dpa::new(sigma_i, sigma_o, doc.initial, doc.colors, table)
}

/// Canonical JSON rendering: fixed key order, one transition per line,
/// transitions sorted by `(from, in, out)` in alphabet order.
pub fn serialize_dpa(dpa: &Dpa) -> String {
    let quote = |s: &Symbol| serde_json::to_string(s.as_str()).unwrap();
    let list = |alphabet: &[Symbol]| alphabet.iter().map(quote).collect::<Vec<_>>().join(", ");
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"sigma_i\": [{}],", list(&dpa.sigma_i));
    let _ = writeln!(out, "  \"sigma_o\": [{}],", list(&dpa.sigma_o));
    let _ = writeln!(out, "  \"states\": {},", dpa.num_states());
    let _ = writeln!(out, "  \"initial\": {},", dpa.initial);
    let colors: Vec<String> = dpa.omega.iter().map(u32::to_string).collect();
    let _ = writeln!(out, "  \"colors\": [{}],", colors.join(", "));
    out.push_str("  \"transitions\": [\n");
    let total = dpa.delta.len();
    let (ni, no) = (dpa.sigma_i.len(), dpa.sigma_o.len());
    for (i, &to) in dpa.delta.iter().enumerate() {
        let (q, a, b) = (i / (ni * no), (i / no) % ni, i % no);
        let sep = if i + 1 == total { "" } else { "," };
        let _ = writeln!(
            out,
            "    {{\"from\": {q}, \"in\": {}, \"out\": {}, \"to\": {to}}}{sep}",
            quote(&dpa.sigma_i[a]),
            quote(&dpa.sigma_o[b]),
        );
    }
    out.push_str("  ]\n}\n");
    out
}

/// A seeded random automaton with numbered alphabets and initial state 0.
/// Transition targets and state colors are drawn uniformly.
pub fn random_dpa(n: usize, colors: u32, in_size: usize, out_size: usize, seed: u64) -> Dpa {
    assert!(n >= 1 && colors >= 1 && in_size >= 1 && out_size >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega: Vec<u32> = (0..n).map(|_| rng.random_range(0..colors)).collect();
    let delta: Vec<usize> = (0..n * in_size * out_size)
        .map(|_| rng.random_range(0..n))
        .collect();
    Dpa::new(
        numbered_alphabet(in_size),
        numbered_alphabet(out_size),
        0,
        omega,
        delta,
    )
    .expect("generated automaton is valid")
}

/// Safety automaton over `{0,1} × {0,1}` for `b_i = a_{i+d}`.
///
/// States store the queue of the last (up to `d`) output letters, oldest
/// first; a queue of length `len` with binary value `v` is state
/// `2^len - 1 + v`. The absorbing bad state is the last one and the only
/// state with color 1.
pub fn prediction_family(d: usize) -> Dpa {
    assert!(d >= 1, "prediction delay must be positive");
    assert!(d < usize::BITS as usize - 2, "prediction delay too large");
    let tracking = (1usize << (d + 1)) - 1;
    let bad = tracking;
    let n = tracking + 1;
    let state_of = |len: usize, value: usize| (1usize << len) - 1 + value;
    let mut delta = vec![bad; n * 4];
    for len in 0..=d {
        for value in 0..(1usize << len) {
            let q = state_of(len, value);
            for a in 0..2 {
                for b in 0..2 {
                    let to = if len < d {
                        state_of(len + 1, (value << 1) | b)
                    } else {
                        let front = value >> (d - 1);
                        if front == a {
                            let rest = value & ((1usize << (d - 1)) - 1);
                            state_of(d, (rest << 1) | b)
                        } else {
                            bad
                        }
                    };
                    delta[(q * 2 + a) * 2 + b] = to;
                }
            }
        }
    }
    let mut omega = vec![0; n];
    omega[bad] = 1;
    Dpa::new(numbered_alphabet(2), numbered_alphabet(2), 0, omega, delta)
        .expect("prediction automaton is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    const D_UNIV: &str = include_str!("../fixtures/d_univ.json");
    const D_PRED1: &str = include_str!("../fixtures/d_pred1.json");

    fn l(a: usize, b: usize) -> Letter {
        Letter::new(a, b)
    }

    #[test]
    fn parses_universal_fixture() {
        let dpa = parse_dpa(D_UNIV).unwrap();
        assert_eq!(dpa.num_states(), 1);
        assert_eq!(dpa.color_set(), &[0]);
    }

    #[test]
    fn parses_pred1_fixture() {
        let dpa = parse_dpa(D_PRED1).unwrap();
        assert_eq!(dpa.num_states(), 4);
        assert_eq!(dpa.color_set(), &[0, 1]);
        assert_eq!(dpa, prediction_family(1));
    }

    #[test]
    fn missing_transition_is_reported() {
        let text: String = D_UNIV
            .lines()
            .filter(|line| !line.contains("\"in\": \"0\", \"out\": \"1\""))
            .collect::<Vec<_>>()
            .join("\n");
        match parse_dpa(&text) {
            Err(Error::Semantic { location, message }) => {
                assert_eq!(location, "transitions");
                assert!(message.contains("missing transition"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_and_unknown_transitions_are_reported() {
        let dup = D_UNIV.replace(
            "{\"from\": 0, \"in\": \"0\", \"out\": \"1\", \"to\": 0}",
            "{\"from\": 0, \"in\": \"0\", \"out\": \"0\", \"to\": 0}",
        );
        assert!(matches!(
            parse_dpa(&dup),
            Err(Error::Semantic { ref message, .. }) if message.contains("duplicate")
        ));
        let unknown = D_UNIV.replace("\"out\": \"1\", \"to\": 0}", "\"out\": \"x\", \"to\": 0}");
        assert!(matches!(
            parse_dpa(&unknown),
            Err(Error::Semantic { ref message, .. }) if message.contains("unknown output")
        ));
        let out_of_range = D_UNIV.replacen("\"to\": 0", "\"to\": 3", 1);
        assert!(matches!(
            parse_dpa(&out_of_range),
            Err(Error::Semantic { ref location, .. }) if location == "transitions[0]"
        ));
    }

    #[test]
    fn malformed_json_is_a_syntax_error() {
        assert!(matches!(
            parse_dpa("{\"sigma_i\": [\"0\""),
            Err(Error::Syntax { line: 1, .. })
        ));
        assert!(matches!(parse_dpa("{}"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn bad_symbols_rejected() {
        let spaced = D_UNIV.replacen(
            "\"sigma_o\": [\"0\", \"1\"]",
            "\"sigma_o\": [\"0\", \"a b\"]",
            1,
        );
        assert!(matches!(
            parse_dpa(&spaced),
            Err(Error::Semantic { ref location, .. }) if location == "sigma_o[1]"
        ));
        let dup = D_UNIV.replacen(
            "\"sigma_i\": [\"0\", \"1\"]",
            "\"sigma_i\": [\"0\", \"0\"]",
            1,
        );
        assert!(matches!(parse_dpa(&dup), Err(Error::Semantic { .. })));
    }

    #[test]
    fn serialization_is_canonical() {
        let dpa = parse_dpa(D_UNIV).unwrap();
        let once = serialize_dpa(&dpa);
        assert_eq!(once, serialize_dpa(&dpa));
        assert_eq!(once, D_UNIV);
        assert_eq!(serialize_dpa(&parse_dpa(&once).unwrap()), once);
    }

    #[test]
    fn pred2_has_32_transitions() {
        let text = serialize_dpa(&prediction_family(2));
        assert_eq!(text.matches("\"from\"").count(), 32);
        assert_eq!(prediction_family(2).num_states(), 8);
    }

    #[test]
    fn run_prefix_examples() {
        let univ = parse_dpa(D_UNIV).unwrap();
        assert_eq!(run_prefix(&univ, 0, &[]).unwrap(), (0, 0));
        let pred1 = prediction_family(1);
        // q_s = 0, q_0 = 1, q_1 = 2, q_bad = 3
        assert_eq!(run_prefix(&pred1, 0, &[l(0, 1)]).unwrap(), (2, 0));
        assert_eq!(run_prefix(&pred1, 1, &[l(1, 0)]).unwrap(), (3, 1));
        assert!(matches!(
            run_prefix(&pred1, 0, &[l(2, 0)]),
            Err(Error::OutOfRange { .. })
        ));
        assert!(run_prefix(&pred1, 4, &[]).is_err());
    }

    #[test]
    fn lasso_examples() {
        let cycle = LassoWord::new(vec![], vec![l(0, 0)]).unwrap();
        assert!(accepts_lasso(&Dpa::single_state(0, 2, 2), &cycle).unwrap());
        assert!(!accepts_lasso(&Dpa::single_state(1, 2, 2), &cycle).unwrap());
        assert!(accepts_lasso(&prediction_family(1), &cycle).unwrap());
        // Predicting 1 while 0 follows falls into the bad sink.
        let wrong = LassoWord::new(vec![l(0, 1)], vec![l(0, 0)]).unwrap();
        assert!(!accepts_lasso(&prediction_family(1), &wrong).unwrap());
        assert!(LassoWord::new(vec![], vec![]).is_err());
    }

    #[test]
    fn lasso_with_alternating_colors() {
        // q0 (color 1) <-> q1 (color 2) on every letter: limsup 2.
        let dpa = Dpa::new(
            numbered_alphabet(1),
            numbered_alphabet(1),
            0,
            vec![1, 2],
            vec![1, 0],
        )
        .unwrap();
        let lasso = LassoWord::new(vec![], vec![l(0, 0)]).unwrap();
        assert!(accepts_lasso(&dpa, &lasso).unwrap());
    }

    #[test]
    fn random_dpa_is_deterministic_and_valid() {
        assert_eq!(random_dpa(1, 1, 1, 1, 99), Dpa::single_state(0, 1, 1));
        assert_eq!(random_dpa(3, 2, 2, 2, 7), random_dpa(3, 2, 2, 2, 7));
        let d = random_dpa(3, 2, 2, 2, 7);
        assert_eq!(d.num_states(), 3);
        assert!(d.colors().iter().all(|&c| c < 2));
        for q in 0..3 {
            for a in 0..2 {
                for b in 0..2 {
                    assert!(d.successor(q, a, b) < 3);
                }
            }
        }
    }

    #[test]
    fn prediction_family_shape() {
        for d in 1..=4 {
            let dpa = prediction_family(d);
            assert_eq!(dpa.num_states(), 1 << (d + 1));
            assert_eq!(dpa.colors().iter().filter(|&&c| c == 1).count(), 1);
        }
        // d = 2: states ε, 0, 1, 00, 01, 10, 11, bad
        let dpa = prediction_family(2);
        assert_eq!(dpa.successor(0, 1, 1), 2);
        assert_eq!(dpa.successor(2, 0, 0), 5); // "1" + 0 -> "10"
        assert_eq!(dpa.successor(5, 1, 1), 4); // "10": front 1 matches, -> "01"
        assert_eq!(dpa.successor(5, 0, 1), 7);
    }
}
