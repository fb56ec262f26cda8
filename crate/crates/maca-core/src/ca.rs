//! Deterministic 2-state 3-neighborhood hybrid cellular automaton engine.
//!
//! Each cell carries its own elementary rule (one of the 256 next-state
//! truth tables), so a configuration is a [`RuleVector`] rather than a
//! single rule number. The engine provides synchronous stepping, trajectory
//! tracing up to the attractor cycle, and exhaustive enumeration of the
//! attractor basins that partition the full state space.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest cell count for which the full 2^n state space is enumerated.
pub const MAX_ENUMERATION_CELLS: usize = 20;

/// Default step budget for attractor searches on wide automata, where the
/// 2^n worst-case bound is unusable.
pub const DEFAULT_STEP_BUDGET: usize = 1 << 20;

/// One of the 256 elementary next-state functions, in Wolfram numbering:
/// bit `j` of the value is the next state for neighborhood
/// `j = 4*left + 2*center + 1*right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RuleNumber(pub u8);

impl RuleNumber {
    /// Identity rule: next state equals the current center state.
    pub const IDENTITY: RuleNumber = RuleNumber(204);

    pub fn value(self) -> u8 {
        self.0
    }
}

impl fmt::Display for RuleNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Evaluates one cell update: bit `4*left + 2*center + 1*right` of `rule`.
pub fn apply_rule(rule: RuleNumber, left: bool, center: bool, right: bool) -> bool {
    let idx = ((left as u8) << 2) | ((center as u8) << 1) | (right as u8);
    (rule.0 >> idx) & 1 == 1
}

/// Per-cell rule assignment of a hybrid CA. Length equals the cell count.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RuleVector {
    rules: Vec<RuleNumber>,
}

impl RuleVector {
    pub fn new(rules: Vec<RuleNumber>) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::InvalidParameter(
                "rule vector must have at least one cell".into(),
            ));
        }
        Ok(Self { rules })
    }

    pub fn from_values(values: &[u8]) -> Result<Self> {
        Self::new(values.iter().map(|&v| RuleNumber(v)).collect())
    }

    /// Same rule in every cell.
    pub fn uniform(rule: RuleNumber, n: usize) -> Result<Self> {
        Self::new(vec![rule; n])
    }

    /// The all-204 vector: every state is a fixed point.
    pub fn identity(n: usize) -> Result<Self> {
        Self::uniform(RuleNumber::IDENTITY, n)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> &[RuleNumber] {
        &self.rules
    }

    pub fn values(&self) -> Vec<u8> {
        self.rules.iter().map(|r| r.0).collect()
    }
}

impl fmt::Display for RuleVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for r in &self.rules {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{}", r.0)?;
            first = false;
        }
        Ok(())
    }
}

/// Treatment of the missing neighbors at the lattice ends.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    /// Missing neighbors read 0.
    #[default]
    Null,
    /// The lattice wraps around.
    Periodic,
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryMode::Null => write!(f, "null"),
            BoundaryMode::Periodic => write!(f, "periodic"),
        }
    }
}

impl std::str::FromStr for BoundaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "null" => Ok(BoundaryMode::Null),
            "periodic" => Ok(BoundaryMode::Periodic),
            other => Err(Error::InvalidParameter(format!(
                "unknown boundary mode {other:?} (expected \"null\" or \"periodic\")"
            ))),
        }
    }
}

/// Fixed-width bit state of an n-cell automaton.
///
/// Cell 0 is the leftmost position in the usual bitstring rendering, and
/// ordering is lexicographic over that rendering, so `"0001" < "0010"`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CAState {
    n: usize,
    words: Vec<u64>,
}

impl CAState {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "state width must be at least 1");
        Self {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut s = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b);
        }
        s
    }

    /// Parses a `0`/`1` string, cell 0 first.
    pub fn from_bitstring(text: &str) -> Result<Self> {
        if text.is_empty() {
            return Err(Error::InvalidInput("empty bitstring".into()));
        }
        let mut s = Self::zeros(text.len());
        for (i, c) in text.chars().enumerate() {
            match c {
                '0' => {}
                '1' => s.set(i, true),
                other => {
                    return Err(Error::InvalidInput(format!(
                        "invalid bit {other:?} at position {i}"
                    )))
                }
            }
        }
        Ok(s)
    }

    /// Uniformly random state of width `n`.
    pub fn random<R: rand::Rng>(n: usize, rng: &mut R) -> Self {
        let mut s = Self::zeros(n);
        for i in 0..n {
            s.set(i, rng.gen::<bool>());
        }
        s
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.n);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.n);
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn iter_bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.n).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Packs into an integer with cell 0 as the most significant bit, so
    /// numeric order equals lexicographic bitstring order. Requires n <= 64.
    pub fn to_index(&self) -> u64 {
        debug_assert!(self.n <= 64);
        let mut idx = 0u64;
        for i in 0..self.n {
            idx = (idx << 1) | self.get(i) as u64;
        }
        idx
    }

    /// Inverse of [`CAState::to_index`].
    pub fn from_index(idx: u64, n: usize) -> Self {
        debug_assert!(n <= 64);
        let mut s = Self::zeros(n);
        for i in 0..n {
            s.set(i, (idx >> (n - 1 - i)) & 1 == 1);
        }
        s
    }
}

impl PartialOrd for CAState {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CAState {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        for i in 0..self.n.min(other.n) {
            match self.get(i).cmp(&other.get(i)) {
                std::cmp::Ordering::Equal => {}
                ord => return ord,
            }
        }
        self.n.cmp(&other.n)
    }
}

impl fmt::Display for CAState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

// States read better as bitstrings in assertion output.
impl fmt::Debug for CAState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One CA run split at the first repeated state: the pre-cycle prefix and
/// the attractor cycle, both in visit order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub transient: Vec<CAState>,
    pub cycle: Vec<CAState>,
}

impl Trajectory {
    /// Lexicographically smallest cycle state; stable identifier of the
    /// attractor across start states.
    pub fn attractor_key(&self) -> &CAState {
        self.cycle.iter().min().expect("cycle is never empty")
    }

    /// The cycle rotated so its smallest state comes first.
    pub fn canonical_cycle(&self) -> Vec<CAState> {
        canonical_rotation(&self.cycle)
    }
}

/// Rotates a cycle so the lexicographically smallest state leads.
pub fn canonical_rotation(cycle: &[CAState]) -> Vec<CAState> {
    let pivot = cycle
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1))
        .map(|(i, _)| i)
        .expect("cycle is never empty");
    let mut out = Vec::with_capacity(cycle.len());
    out.extend_from_slice(&cycle[pivot..]);
    out.extend_from_slice(&cycle[..pivot]);
    out
}

/// An attractor cycle together with every state draining to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttractorBasin {
    /// Canonical rotation: smallest state first.
    pub attractor: Vec<CAState>,
    /// All basin members, sorted.
    pub states: Vec<CAState>,
}

impl AttractorBasin {
    pub fn size(&self) -> usize {
        self.states.len()
    }

    pub fn cycle_len(&self) -> usize {
        self.attractor.len()
    }

    pub fn key(&self) -> &CAState {
        &self.attractor[0]
    }
}

fn check_width(state_len: usize, rules_len: usize) -> Result<()> {
    if state_len != rules_len {
        return Err(Error::DimensionMismatch {
            expected: rules_len,
            got: state_len,
        });
    }
    Ok(())
}

/// Synchronous update of every cell.
pub fn step(state: &CAState, rules: &RuleVector, boundary: BoundaryMode) -> Result<CAState> {
    check_width(state.len(), rules.len())?;
    Ok(step_unchecked(state, rules, boundary))
}

fn step_unchecked(state: &CAState, rules: &RuleVector, boundary: BoundaryMode) -> CAState {
    let n = state.len();
    let mut next = CAState::zeros(n);
    for i in 0..n {
        let left = if i > 0 {
            state.get(i - 1)
        } else {
            match boundary {
                BoundaryMode::Null => false,
                BoundaryMode::Periodic => state.get(n - 1),
            }
        };
        let right = if i + 1 < n {
            state.get(i + 1)
        } else {
            match boundary {
                BoundaryMode::Null => false,
                BoundaryMode::Periodic => state.get(0),
            }
        };
        next.set(i, apply_rule(rules.rules[i], left, state.get(i), right));
    }
    next
}

/// Packed single-word update for n <= 64. Cell 0 is the most significant
/// bit of the n-bit index, matching [`CAState::to_index`].
fn step_packed(state: u64, rules: &[RuleNumber], boundary: BoundaryMode) -> u64 {
    let n = rules.len();
    debug_assert!(n <= 64);
    let bit = |p: u64, i: usize| -> u8 { ((p >> (n - 1 - i)) & 1) as u8 };
    let mut next = 0u64;
    for (i, rule) in rules.iter().enumerate() {
        let left = if i > 0 {
            bit(state, i - 1)
        } else {
            match boundary {
                BoundaryMode::Null => 0,
                BoundaryMode::Periodic => bit(state, n - 1),
            }
        };
        let right = if i + 1 < n {
            bit(state, i + 1)
        } else {
            match boundary {
                BoundaryMode::Null => 0,
                BoundaryMode::Periodic => bit(state, 0),
            }
        };
        let idx = (left << 2) | (bit(state, i) << 1) | right;
        next = (next << 1) | ((rule.0 >> idx) & 1) as u64;
    }
    next
}

/// Runs the automaton from `state` until a state repeats, splitting the
/// visited sequence into transient and cycle.
///
/// `max_steps` bounds the number of updates; with `max_steps >= 2^n` the
/// budget can never be exhausted.
pub fn find_attractor(
    state: &CAState,
    rules: &RuleVector,
    boundary: BoundaryMode,
    max_steps: usize,
) -> Result<Trajectory> {
    check_width(state.len(), rules.len())?;
    if max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be >= 1".into()));
    }
    let n = state.len();
    if n <= 64 {
        let (path, split) = walk_packed(state.to_index(), rules.rules(), boundary, max_steps)?;
        let unpack = |p: &u64| CAState::from_index(*p, n);
        return Ok(Trajectory {
            transient: path[..split].iter().map(unpack).collect(),
            cycle: path[split..].iter().map(unpack).collect(),
        });
    }

    let mut seen: HashMap<CAState, usize> = HashMap::new();
    let mut path: Vec<CAState> = Vec::new();
    seen.insert(state.clone(), 0);
    path.push(state.clone());
    loop {
        let next = step_unchecked(path.last().unwrap(), rules, boundary);
        if let Some(&pos) = seen.get(&next) {
            let cycle = path.split_off(pos);
            return Ok(Trajectory {
                transient: path,
                cycle,
            });
        }
        if path.len() >= max_steps {
            return Err(Error::BudgetExhausted { max_steps });
        }
        seen.insert(next.clone(), path.len());
        path.push(next);
    }
}

/// Packed trajectory walk; returns the visited path and the index where the
/// cycle starts.
fn walk_packed(
    start: u64,
    rules: &[RuleNumber],
    boundary: BoundaryMode,
    max_steps: usize,
) -> Result<(Vec<u64>, usize)> {
    let mut seen: HashMap<u64, usize> = HashMap::new();
    let mut path: Vec<u64> = Vec::new();
    seen.insert(start, 0);
    path.push(start);
    loop {
        let next = step_packed(*path.last().unwrap(), rules, boundary);
        if let Some(&pos) = seen.get(&next) {
            return Ok((path, pos));
        }
        if path.len() >= max_steps {
            return Err(Error::BudgetExhausted { max_steps });
        }
        seen.insert(next, path.len());
        path.push(next);
    }
}

/// Smallest cycle state reached from `start`, as a packed index. This is
/// the routing key used by the classifier and avoids materializing the
/// trajectory.
pub(crate) fn attractor_key_packed(
    start: u64,
    rules: &[RuleNumber],
    boundary: BoundaryMode,
    max_steps: usize,
) -> Result<u64> {
    let (path, split) = walk_packed(start, rules, boundary, max_steps)?;
    Ok(*path[split..].iter().min().unwrap())
}

/// Exhaustively assigns every state of {0,1}^n to its attractor basin.
///
/// Basins come back sorted by canonical attractor, pairwise disjoint, with
/// sizes summing to 2^n. Capped at n <= [`MAX_ENUMERATION_CELLS`].
pub fn enumerate_basins(rules: &RuleVector, boundary: BoundaryMode) -> Result<Vec<AttractorBasin>> {
    let n = rules.len();
    if n > MAX_ENUMERATION_CELLS {
        return Err(Error::CapacityExceeded {
            n,
            max: MAX_ENUMERATION_CELLS,
        });
    }
    let total: usize = 1 << n;

    let successor: Vec<u32> = (0..total)
        .map(|s| step_packed(s as u64, rules.rules(), boundary) as u32)
        .collect();

    const UNVISITED: u32 = u32::MAX;
    const ON_PATH: u32 = u32::MAX - 1;
    let mut basin_of: Vec<u32> = vec![UNVISITED; total];
    let mut cycles: Vec<Vec<u32>> = Vec::new();
    let mut path: Vec<u32> = Vec::new();

    for s in 0..total as u32 {
        if basin_of[s as usize] != UNVISITED {
            continue;
        }
        path.clear();
        let mut cur = s;
        while basin_of[cur as usize] == UNVISITED {
            basin_of[cur as usize] = ON_PATH;
            path.push(cur);
            cur = successor[cur as usize];
        }
        let id = if basin_of[cur as usize] == ON_PATH {
            // New cycle: it starts at the first occurrence of `cur` in path.
            let start = path.iter().rposition(|&p| p == cur).unwrap();
            cycles.push(path[start..].to_vec());
            (cycles.len() - 1) as u32
        } else {
            basin_of[cur as usize]
        };
        for &p in &path {
            basin_of[p as usize] = id;
        }
    }

    // Order basins by their canonical (minimum) attractor state.
    let mut order: Vec<usize> = (0..cycles.len()).collect();
    let cycle_min = |c: &[u32]| *c.iter().min().unwrap();
    order.sort_by_key(|&i| cycle_min(&cycles[i]));
    let mut rank = vec![0u32; cycles.len()];
    for (new_id, &old_id) in order.iter().enumerate() {
        rank[old_id] = new_id as u32;
    }

    let mut members: Vec<Vec<u32>> = vec![Vec::new(); cycles.len()];
    for s in 0..total as u32 {
        members[rank[basin_of[s as usize] as usize] as usize].push(s);
    }

    let unpack = |p: u32| CAState::from_index(p as u64, n);
    Ok(order
        .into_iter()
        .map(|old_id| {
            let cycle = &cycles[old_id];
            let pivot = cycle.iter().position(|&p| p == cycle_min(cycle)).unwrap();
            let mut attractor: Vec<CAState> = Vec::with_capacity(cycle.len());
            attractor.extend(cycle[pivot..].iter().map(|&p| unpack(p)));
            attractor.extend(cycle[..pivot].iter().map(|&p| unpack(p)));
            AttractorBasin {
                attractor,
                states: members[rank[old_id] as usize]
                    .iter()
                    .map(|&p| unpack(p))
                    .collect(),
            }
        })
        .collect())
}
