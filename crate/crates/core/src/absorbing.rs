//! Absorbing sets: checking, extended types and exhaustive enumeration.
//!
//! A set `A` of variable-nodes is absorbing when every member has strictly
//! more even-degree than odd-degree neighbors among the check-nodes of the
//! subgraph induced by `A`.
//!
//! Enumeration is a rooted depth-first search. For a root `r` the set is
//! grown level by level, `A = A₀ ∪ A₁ ∪ …` with `A₀ = {r}`, where each level
//! is a non-empty subset of candidates with index greater than `r`. Once a
//! level is fixed, every check adjacent to the previous level has its final
//! degree, so the absorbing condition of that previous level is tested and
//! the branch is abandoned as soon as it fails.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tanner::TannerGraph;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbsorbingSet {
    /// Sorted, duplicate-free variable indices.
    pub members: Vec<usize>,
}

impl AbsorbingSet {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseTypeError {
    #[error("malformed extended type {0:?}")]
    Malformed(String),
}

/// Signature `ν-(ω,ε,P_c)` of an absorbing set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExtendedType {
    pub nu: usize,
    pub omega: usize,
    pub epsilon: usize,
    /// `pc[d-1]` counts induced check-nodes of degree `d`; no trailing zeros.
    pub pc: Vec<usize>,
}

impl ExtendedType {
    /// Codeword supports have no odd-degree check.
    pub fn is_codeword_support(&self) -> bool {
        self.omega == 0
    }

    pub fn short(&self) -> String {
        format!("{}-({},{})", self.nu, self.omega, self.epsilon)
    }
}

impl fmt::Display for ExtendedType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pc: Vec<String> = self.pc.iter().map(usize::to_string).collect();
        write!(
            f,
            "{}-({},{},({}))",
            self.nu,
            self.omega,
            self.epsilon,
            pc.join(",")
        )
    }
}

impl FromStr for ExtendedType {
    type Err = ParseTypeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseTypeError::Malformed(s.to_string());
        let t = s.trim();
        let (nu, rest) = t.split_once('-').ok_or_else(bad)?;
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix("))"))
            .ok_or_else(bad)?;
        let (head, pc) = inner.split_once(",(").ok_or_else(bad)?;
        let (omega, epsilon) = head.split_once(',').ok_or_else(bad)?;
        let num = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
        let pc = if pc.trim().is_empty() {
            Vec::new()
        } else {
            pc.split(',').map(num).collect::<Result<Vec<_>, _>>()?
        };
        let et = ExtendedType {
            nu: num(nu)?,
            omega: num(omega)?,
            epsilon: num(epsilon)?,
            pc,
        };
        if et.pc.last() == Some(&0) {
            return Err(bad());
        }
        Ok(et)
    }
}

// Degree of every check in the subgraph induced by `set`, sparse.
fn induced_check_degrees(g: &TannerGraph, set: &[usize]) -> BTreeMap<usize, usize> {
    let mut deg = BTreeMap::new();
    for &n in set {
        for &m in g.var_neighbors(n) {
            *deg.entry(m).or_insert(0) += 1;
        }
    }
    deg
}

/// True iff every member of `set` has more even-degree than odd-degree
/// neighboring checks in the induced subgraph. Duplicates are ignored.
pub fn as_check(g: &TannerGraph, set: &[usize]) -> bool {
    if set.is_empty() {
        return false;
    }
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    let deg = induced_check_degrees(g, &s);
    s.iter().all(|&n| {
        let odd = g
            .var_neighbors(n)
            .iter()
            .filter(|m| deg[m] % 2 == 1)
            .count();
        2 * odd < g.var_degree(n)
    })
}

/// Extended type of the subgraph induced by `set`. Meaningful for any
/// non-empty set, absorbing or not.
pub fn extended_type(g: &TannerGraph, set: &[usize]) -> ExtendedType {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    let deg = induced_check_degrees(g, &s);
    let mut pc = Vec::new();
    let (mut omega, mut epsilon) = (0, 0);
    for &d in deg.values() {
        if d % 2 == 1 {
            omega += 1;
        } else {
            epsilon += 1;
        }
        if pc.len() < d {
            pc.resize(d, 0);
        }
        pc[d - 1] += 1;
    }
    ExtendedType {
        nu: s.len(),
        omega,
        epsilon,
        pc,
    }
}

/// True iff the subgraph induced by `set` is connected, i.e. the members
/// are linked through shared checks.
pub fn is_connected(g: &TannerGraph, set: &[usize]) -> bool {
    let Some(&first) = set.first() else {
        return true;
    };
    let mut seen = vec![false; set.len()];
    seen[0] = true;
    let mut stack = vec![first];
    let mut reached = 1;
    while let Some(v) = stack.pop() {
        for (i, &u) in set.iter().enumerate() {
            if !seen[i]
                && g.var_neighbors(v)
                    .iter()
                    .any(|m| g.var_neighbors(u).contains(m))
            {
                seen[i] = true;
                reached += 1;
                stack.push(u);
            }
        }
    }
    reached == set.len()
}

/// BFS layering of the Tanner graph from a root variable: `var_layers[ℓ]`
/// holds the variables at distance 2ℓ, `check_layers[ℓ]` the checks at
/// distance 2ℓ+1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedExpansion {
    pub root: usize,
    pub var_layers: Vec<Vec<usize>>,
    pub check_layers: Vec<Vec<usize>>,
    var_depth: Vec<usize>,
    check_depth: Vec<usize>,
}

const UNREACHED: usize = usize::MAX;

impl RootedExpansion {
    pub fn new(g: &TannerGraph, root: usize) -> Self {
        let mut var_depth = vec![UNREACHED; g.n_vars()];
        let mut check_depth = vec![UNREACHED; g.n_checks()];
        let mut var_layers = vec![vec![root]];
        let mut check_layers = Vec::new();
        var_depth[root] = 0;
        let mut frontier = vec![root];
        let mut depth = 0;
        while !frontier.is_empty() {
            let mut checks = Vec::new();
            for &n in &frontier {
                for &m in g.var_neighbors(n) {
                    if check_depth[m] == UNREACHED {
                        check_depth[m] = depth;
                        checks.push(m);
                    }
                }
            }
            let mut vars = Vec::new();
            for &m in &checks {
                for &n in g.check_neighbors(m) {
                    if var_depth[n] == UNREACHED {
                        var_depth[n] = depth + 1;
                        vars.push(n);
                    }
                }
            }
            checks.sort_unstable();
            vars.sort_unstable();
            if !checks.is_empty() {
                check_layers.push(checks);
            }
            if !vars.is_empty() {
                var_layers.push(vars.clone());
            }
            frontier = vars;
            depth += 1;
        }
        Self {
            root,
            var_layers,
            check_layers,
            var_depth,
            check_depth,
        }
    }

    /// Layer index of a variable, or `None` when unreachable.
    pub fn var_depth(&self, n: usize) -> Option<usize> {
        Some(self.var_depth[n]).filter(|&d| d != UNREACHED)
    }

    pub fn check_depth(&self, m: usize) -> Option<usize> {
        Some(self.check_depth[m]).filter(|&d| d != UNREACHED)
    }

    /// Variables of layer `ℓ+1` reached from `level` (a subset of layer ℓ)
    /// through a check of layer ℓ, restricted to indices above the root.
    pub fn descendants(&self, g: &TannerGraph, level: &[usize], depth: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &a in level {
            for &m in g.var_neighbors(a) {
                if self.check_depth[m] != depth {
                    continue;
                }
                for &v in g.check_neighbors(m) {
                    if v > self.root && self.var_depth[v] == depth + 1 {
                        out.push(v);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Non-empty subsets of `candidates` with at most `budget` elements, by size
/// ascending and then lexicographically. A level left empty cannot be
/// followed by a deeper one, so the empty subset is never a completion;
/// with `budget == 0` the collection is empty.
pub fn completions(candidates: &[usize], budget: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for k in 1..=budget.min(candidates.len()) {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            out.push(idx.iter().map(|&i| candidates[i]).collect());
            let mut i = k;
            while i > 0 && idx[i - 1] == candidates.len() - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}

/// Rule deciding which variables may form the next level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Layering {
    /// Next level = variables adjacent to the current level in the induced
    /// subgraph and to no earlier level. Every connected absorbing set is
    /// produced exactly once.
    #[default]
    Induced,
    /// Next level = descendants of the current level in the BFS layering
    /// of the whole graph.
    GraphBfs,
}

struct Search<'a> {
    g: &'a TannerGraph,
    root: usize,
    nu: usize,
    expansion: Option<RootedExpansion>,
    check_count: Vec<u32>,
    in_set: Vec<bool>,
    levels: Vec<Vec<usize>>,
    // checks touched by levels strictly below the current one
    blocked: Vec<u32>,
}

impl<'a> Search<'a> {
    fn new(g: &'a TannerGraph, root: usize, nu: usize, layering: Layering) -> Self {
        let expansion = match layering {
            Layering::GraphBfs => Some(RootedExpansion::new(g, root)),
            Layering::Induced => None,
        };
        Self {
            g,
            root,
            nu,
            expansion,
            check_count: vec![0; g.n_checks()],
            in_set: vec![false; g.n_vars()],
            levels: Vec::new(),
            blocked: vec![0; g.n_checks()],
        }
    }

    fn push_level(&mut self, level: Vec<usize>) {
        for &v in &level {
            self.in_set[v] = true;
            for &m in self.g.var_neighbors(v) {
                self.check_count[m] += 1;
            }
        }
        if let Some(prev) = self.levels.last() {
            for &v in prev {
                for &m in self.g.var_neighbors(v) {
                    self.blocked[m] += 1;
                }
            }
        }
        self.levels.push(level);
    }

    fn pop_level(&mut self) {
        let level = self.levels.pop().unwrap();
        for &v in &level {
            self.in_set[v] = false;
            for &m in self.g.var_neighbors(v) {
                self.check_count[m] -= 1;
            }
        }
        if let Some(prev) = self.levels.last() {
            for &v in prev {
                for &m in self.g.var_neighbors(v) {
                    self.blocked[m] -= 1;
                }
            }
        }
    }

    fn absorbed(&self, v: usize) -> bool {
        let odd = self
            .g
            .var_neighbors(v)
            .iter()
            .filter(|&&m| self.check_count[m] % 2 == 1)
            .count();
        2 * odd < self.g.var_degree(v)
    }

    fn level_absorbed(&self, level: usize) -> bool {
        self.levels[level].iter().all(|&v| self.absorbed(v))
    }

    fn candidates(&self) -> Vec<usize> {
        let last = self.levels.last().unwrap();
        if let Some(exp) = &self.expansion {
            return exp.descendants(self.g, last, self.levels.len() - 1);
        }
        let mut out = Vec::new();
        for &a in last {
            for &m in self.g.var_neighbors(a) {
                for &v in self.g.check_neighbors(m) {
                    if v > self.root
                        && !self.in_set[v]
                        && self
                            .g
                            .var_neighbors(v)
                            .iter()
                            .all(|&c| self.blocked[c] == 0)
                    {
                        out.push(v);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn run(&mut self, size: usize, visit: &mut dyn FnMut(&[usize])) {
        let depth = self.levels.len();
        if size == self.nu {
            // all degrees are final: check the last two levels
            if depth >= 2 && !self.level_absorbed(depth - 2) {
                return;
            }
            if self.level_absorbed(depth - 1) {
                let mut set: Vec<usize> = self.levels.concat();
                set.sort_unstable();
                visit(&set);
            }
            return;
        }
        let cands = self.candidates();
        for next in completions(&cands, self.nu - size) {
            let k = next.len();
            self.push_level(next);
            if self.level_absorbed(depth - 1) {
                self.run(size + k, visit);
            }
            self.pop_level();
        }
    }
}

/// Calls `visit` with every connected absorbing set of size `nu` whose
/// smallest member is `root`, under the given layering.
pub fn as_dfs_visit(
    g: &TannerGraph,
    root: usize,
    nu: usize,
    layering: Layering,
    visit: &mut dyn FnMut(&[usize]),
) {
    assert!(nu >= 1 && nu <= g.n_vars() && root < g.n_vars());
    let mut s = Search::new(g, root, nu, layering);
    s.push_level(vec![root]);
    s.run(1, visit);
}

/// Connected absorbing sets of size `nu` with smallest member `root`.
pub fn as_dfs(g: &TannerGraph, root: usize, nu: usize) -> Vec<AbsorbingSet> {
    let mut out = Vec::new();
    as_dfs_visit(g, root, nu, Layering::Induced, &mut |s| {
        out.push(AbsorbingSet {
            members: s.to_vec(),
        })
    });
    out
}

/// Which absorbing sets an enumeration covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Coverage {
    /// Sets whose induced subgraph is connected.
    #[default]
    Connected,
    /// Also unions of check-disjoint smaller absorbing sets.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerateOptions {
    pub layering: Layering,
    pub coverage: Coverage,
    /// Keep at most this many sets per class; `None` keeps all.
    pub sample_limit: Option<usize>,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        Self {
            layering: Layering::Induced,
            coverage: Coverage::Connected,
            sample_limit: None,
        }
    }
}

/// Sets of one extended type: the exact count and either all members or a
/// deterministic sample of them.
#[derive(Debug, Clone, Default)]
pub struct ClassEntry {
    pub count: u64,
    sample: BinaryHeap<Keyed>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Keyed {
    key: u64,
    members: Vec<usize>,
}

impl Ord for Keyed {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .cmp(&other.key)
            .then_with(|| self.members.cmp(&other.members))
    }
}

impl PartialOrd for Keyed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn set_key(members: &[usize]) -> u64 {
    // splitmix64 folded over the members
    let mut h = 0x9e37_79b9_7f4a_7c15u64;
    for &m in members {
        h ^= m as u64;
        h = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    h
}

impl ClassEntry {
    fn insert(&mut self, members: Vec<usize>, limit: Option<usize>) {
        self.count += 1;
        let item = Keyed {
            key: set_key(&members),
            members,
        };
        self.sample.push(item);
        if let Some(k) = limit {
            if self.sample.len() > k {
                self.sample.pop();
            }
        }
    }

    fn merge(&mut self, other: ClassEntry, limit: Option<usize>) {
        self.count += other.count;
        for item in other.sample {
            self.sample.push(item);
            if let Some(k) = limit {
                if self.sample.len() > k {
                    self.sample.pop();
                }
            }
        }
    }

    /// Retained sets, sorted.
    pub fn sets(&self) -> Vec<AbsorbingSet> {
        let mut v: Vec<AbsorbingSet> = self
            .sample
            .iter()
            .map(|k| AbsorbingSet {
                members: k.members.clone(),
            })
            .collect();
        v.sort();
        v
    }

    /// True when every set of the class was retained.
    pub fn is_complete(&self) -> bool {
        self.sample.len() as u64 == self.count
    }
}

/// Absorbing sets of one size grouped by extended type.
#[derive(Debug, Clone, Default)]
pub struct Classification {
    pub nu: usize,
    pub classes: BTreeMap<ExtendedType, ClassEntry>,
}

impl Classification {
    pub fn total(&self) -> u64 {
        self.classes.values().map(|c| c.count).sum()
    }

    pub fn n_types(&self) -> usize {
        self.classes.len()
    }

    /// Classes eligible for training, i.e. not codeword supports.
    pub fn trainable(&self) -> impl Iterator<Item = (&ExtendedType, &ClassEntry)> {
        self.classes
            .iter()
            .filter(|(et, _)| !et.is_codeword_support())
    }

    pub fn codeword_supports(&self) -> u64 {
        self.classes
            .iter()
            .filter(|(et, _)| et.is_codeword_support())
            .map(|(_, c)| c.count)
            .sum()
    }

    /// All retained sets, sorted.
    pub fn all_sets(&self) -> Vec<AbsorbingSet> {
        let mut v: Vec<AbsorbingSet> = self.classes.values().flat_map(ClassEntry::sets).collect();
        v.sort();
        v
    }

    fn merge(&mut self, other: Classification, limit: Option<usize>) {
        for (et, entry) in other.classes {
            self.classes.entry(et).or_default().merge(entry, limit);
        }
    }

    pub const SUMMARY_CSV_HEADER: &'static str = "nu,et_string,count,is_codeword_support";

    pub fn summary_csv(&self) -> String {
        let mut out = String::from(Self::SUMMARY_CSV_HEADER);
        out.push('\n');
        for (et, c) in &self.classes {
            out.push_str(&format!(
                "{},\"{}\",{},{}\n",
                self.nu,
                et,
                c.count,
                et.is_codeword_support()
            ));
        }
        out
    }

    /// One line per retained set, `ET: n1 n2 ...` with 1-based indices.
    pub fn write_dump<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for (et, c) in &self.classes {
            for s in c.sets() {
                let idx: Vec<String> = s.members.iter().map(|n| (n + 1).to_string()).collect();
                writeln!(out, "{}: {}", et, idx.join(" "))?;
            }
        }
        Ok(())
    }
}

/// Parses a dump written by [`Classification::write_dump`].
pub fn parse_dump(text: &str) -> Result<Vec<(ExtendedType, AbsorbingSet)>, ParseTypeError> {
    let mut out = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let (et, rest) = line
            .rsplit_once(": ")
            .ok_or_else(|| ParseTypeError::Malformed(line.to_string()))?;
        let members = rest
            .split_whitespace()
            .map(|x| match x.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(ParseTypeError::Malformed(line.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push((et.parse()?, AbsorbingSet::new(members)));
    }
    Ok(out)
}

fn classify_roots(g: &TannerGraph, nu: usize, opts: &EnumerateOptions) -> Classification {
    let limit = opts.sample_limit;
    (0..g.n_vars())
        .into_par_iter()
        .fold(
            || Classification {
                nu,
                ..Default::default()
            },
            |mut acc, root| {
                as_dfs_visit(g, root, nu, opts.layering, &mut |s| {
                    let et = extended_type(g, s);
                    acc.classes.entry(et).or_default().insert(s.to_vec(), limit);
                });
                acc
            },
        )
        .reduce(
            || Classification {
                nu,
                ..Default::default()
            },
            |mut a, b| {
                a.merge(b, limit);
                a
            },
        )
}

/// Enumerates and classifies the absorbing sets of size `nu`.
///
/// With [`Coverage::All`], sets with several check-disjoint components are
/// assembled from the complete lists of smaller connected sets, which are
/// collected regardless of `sample_limit`.
pub fn enumerate_all(g: &TannerGraph, nu: usize, opts: &EnumerateOptions) -> Classification {
    assert!(nu >= 1);
    let mut result = classify_roots(g, nu, opts);
    if opts.coverage == Coverage::All && nu >= 2 {
        let full = EnumerateOptions {
            sample_limit: None,
            ..*opts
        };
        // connected sets of every size below nu, sorted
        let mut smaller: Vec<Vec<Vec<usize>>> = vec![Vec::new(); nu];
        for (k, slot) in smaller.iter_mut().enumerate().skip(1) {
            *slot = classify_roots(g, k, &full)
                .all_sets()
                .into_iter()
                .map(|s| s.members)
                .collect();
        }
        let mut unions = Classification {
            nu,
            ..Default::default()
        };
        let mut parts: Vec<&[usize]> = Vec::new();
        disjoint_unions(g, &smaller, nu, nu, None, &mut parts, &mut |set| {
            let et = extended_type(g, set);
            unions
                .classes
                .entry(et)
                .or_default()
                .insert(set.to_vec(), opts.sample_limit);
        });
        result.merge(unions, opts.sample_limit);
    }
    result
}

// Multisets of at least two pairwise check-disjoint connected sets with
// sizes summing to `nu`. Components are taken in non-increasing
// (size, members) order so each union is produced once.
fn disjoint_unions<'s>(
    g: &TannerGraph,
    smaller: &'s [Vec<Vec<usize>>],
    nu: usize,
    remaining: usize,
    bound: Option<(usize, usize)>,
    parts: &mut Vec<&'s [usize]>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if remaining == 0 {
        if parts.len() >= 2 {
            let mut set: Vec<usize> = parts.concat();
            set.sort_unstable();
            visit(&set);
        }
        return;
    }
    let max_size = bound.map_or(nu - 1, |(s, _)| s).min(remaining);
    for size in (1..=max_size).rev() {
        let list = &smaller[size];
        let end = match bound {
            Some((s, i)) if s == size => i + 1,
            _ => list.len(),
        };
        for (i, comp) in list[..end].iter().enumerate() {
            if parts.iter().all(|p| check_disjoint(g, p, comp)) {
                parts.push(comp);
                disjoint_unions(
                    g,
                    smaller,
                    nu,
                    remaining - size,
                    Some((size, i)),
                    parts,
                    visit,
                );
                parts.pop();
            }
        }
    }
}

fn check_disjoint(g: &TannerGraph, a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|&x| {
        b.iter().all(|&y| {
            x != y
                && !g
                    .var_neighbors(x)
                    .iter()
                    .any(|m| g.var_neighbors(y).contains(m))
        })
    })
}

/// Every absorbing set of size `nu` by testing all subsets. Exponential;
/// intended for verification on small instances.
pub fn brute_force(g: &TannerGraph, nu: usize) -> Vec<AbsorbingSet> {
    let n = g.n_vars();
    let mut out = Vec::new();
    if nu == 0 || nu > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..nu).collect();
    loop {
        if as_check(g, &idx) {
            out.push(AbsorbingSet {
                members: idx.clone(),
            });
        }
        let mut i = nu;
        while i > 0 && idx[i - 1] == n - nu + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..nu {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out
}
