//! Tanner graph of a binary LDPC code.
//!
//! The graph stores both adjacency views (variable → checks, check →
//! variables) with indices sorted ascending, plus a canonical edge numbering:
//! edges are ordered by variable index, then check index. Every per-edge
//! buffer in the crate (messages, weights, gradients) uses this numbering.
//!
//! Node indices are 0-based in memory and 1-based in every file format.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::ops::Range;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("variable {var}: check index {check} out of range (M = {n_checks})")]
    CheckOutOfRange {
        var: usize,
        check: usize,
        n_checks: usize,
    },
    #[error("duplicate edge between variable {var} and check {check}")]
    DuplicateEdge { var: usize, check: usize },
    #[error("bit vector has length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
}

/// Errors raised while reading an alist file. Line numbers are 1-based.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlistError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: index {index} out of range 1..={max}")]
    IndexOutOfRange {
        line: usize,
        index: usize,
        max: usize,
    },
    #[error("line {line}: declared degree {declared}, found {found} entries")]
    DegreeMismatch {
        line: usize,
        declared: usize,
        found: usize,
    },
    #[error("line {line}: duplicate edge (variable {var}, check {check})")]
    DuplicateEdge {
        line: usize,
        var: usize,
        check: usize,
    },
    #[error("line {line}: check {check} lists variable {var}, which does not list it back")]
    Inconsistent {
        line: usize,
        var: usize,
        check: usize,
    },
    #[error("unexpected end of input after line {line}")]
    Truncated { line: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    n_vars: usize,
    n_checks: usize,
    var_neighbors: Vec<Vec<usize>>,
    check_neighbors: Vec<Vec<usize>>,
    // var_offsets[n]..var_offsets[n + 1] are the edge ids of variable n
    var_offsets: Vec<usize>,
    // check_edges[m][k] is the edge id joining m and check_neighbors[m][k]
    check_edges: Vec<Vec<usize>>,
    edge_var: Vec<usize>,
    edge_check: Vec<usize>,
}

/// Parity of the hard decisions over each check-node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Syndrome {
    pub bits: Vec<u8>,
}

impl Syndrome {
    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b != 0).count()
    }
}

impl TannerGraph {
    /// Builds a graph from the check list of every variable-node.
    pub fn from_var_neighbors(
        n_checks: usize,
        var_neighbors: Vec<Vec<usize>>,
    ) -> Result<Self, GraphError> {
        let n_vars = var_neighbors.len();
        let mut var_neighbors = var_neighbors;
        for (var, checks) in var_neighbors.iter_mut().enumerate() {
            checks.sort_unstable();
            for w in checks.windows(2) {
                if w[0] == w[1] {
                    return Err(GraphError::DuplicateEdge { var, check: w[0] });
                }
            }
            if let Some(&check) = checks.last() {
                if check >= n_checks {
                    return Err(GraphError::CheckOutOfRange {
                        var,
                        check,
                        n_checks,
                    });
                }
            }
        }

        let mut var_offsets = Vec::with_capacity(n_vars + 1);
        let mut edge_var = Vec::new();
        let mut edge_check = Vec::new();
        let mut check_neighbors = vec![Vec::new(); n_checks];
        let mut check_edges = vec![Vec::new(); n_checks];
        var_offsets.push(0);
        for (var, checks) in var_neighbors.iter().enumerate() {
            for &check in checks {
                let e = edge_var.len();
                edge_var.push(var);
                edge_check.push(check);
                // variables are visited in ascending order, so these stay sorted
                check_neighbors[check].push(var);
                check_edges[check].push(e);
            }
            var_offsets.push(edge_var.len());
        }

        Ok(Self {
            n_vars,
            n_checks,
            var_neighbors,
            check_neighbors,
            var_offsets,
            check_edges,
            edge_var,
            edge_check,
        })
    }

    /// Builds a graph from a dense 0/1 parity-check matrix given row by row.
    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self, GraphError> {
        let n_checks = rows.len();
        let n_vars = rows.first().map_or(0, Vec::len);
        let mut var_neighbors = vec![Vec::new(); n_vars];
        for (m, row) in rows.iter().enumerate() {
            if row.len() != n_vars {
                return Err(GraphError::LengthMismatch {
                    got: row.len(),
                    expected: n_vars,
                });
            }
            for (n, &bit) in row.iter().enumerate() {
                if bit != 0 {
                    var_neighbors[n].push(m);
                }
            }
        }
        Self::from_var_neighbors(n_checks, var_neighbors)
    }

    /// Parses the alist interchange format.
    pub fn parse_alist(text: &str) -> Result<Self, AlistError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut last_line = 0;
        let mut next_line = |last: &mut usize| -> Result<(usize, Vec<usize>), AlistError> {
            let (no, l) = lines.next().ok_or(AlistError::Truncated { line: *last })?;
            *last = no;
            let nums = l
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| AlistError::Malformed {
                        line: no,
                        msg: format!("expected a non-negative integer, found {tok:?}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((no, nums))
        };

        let (no, header) = next_line(&mut last_line)?;
        let [n_vars, n_checks] = header[..] else {
            return Err(AlistError::Malformed {
                line: no,
                msg: "expected \"N M\"".into(),
            });
        };
        let (no, maxdeg) = next_line(&mut last_line)?;
        if maxdeg.len() != 2 {
            return Err(AlistError::Malformed {
                line: no,
                msg: "expected \"max_var_deg max_check_deg\"".into(),
            });
        }
        let (no, var_degrees) = next_line(&mut last_line)?;
        if var_degrees.len() != n_vars {
            return Err(AlistError::Malformed {
                line: no,
                msg: format!(
                    "expected {n_vars} variable degrees, found {}",
                    var_degrees.len()
                ),
            });
        }
        let (no, check_degrees) = next_line(&mut last_line)?;
        if check_degrees.len() != n_checks {
            return Err(AlistError::Malformed {
                line: no,
                msg: format!(
                    "expected {n_checks} check degrees, found {}",
                    check_degrees.len()
                ),
            });
        }

        let mut var_neighbors = Vec::with_capacity(n_vars);
        for (var, &declared) in var_degrees.iter().enumerate() {
            let (no, entries) = next_line(&mut last_line)?;
            let mut checks = Vec::with_capacity(declared);
            for &idx in entries.iter().filter(|&&x| x != 0) {
                if idx > n_checks {
                    return Err(AlistError::IndexOutOfRange {
                        line: no,
                        index: idx,
                        max: n_checks,
                    });
                }
                if checks.contains(&(idx - 1)) {
                    return Err(AlistError::DuplicateEdge {
                        line: no,
                        var: var + 1,
                        check: idx,
                    });
                }
                checks.push(idx - 1);
            }
            if checks.len() != declared {
                return Err(AlistError::DegreeMismatch {
                    line: no,
                    declared,
                    found: checks.len(),
                });
            }
            var_neighbors.push(checks);
        }

        let graph = Self::from_var_neighbors(n_checks, var_neighbors).map_err(|e| {
            AlistError::Malformed {
                line: last_line,
                msg: e.to_string(),
            }
        })?;

        // The check-side lists must mirror the variable-side lists exactly.
        for (check, &declared) in check_degrees.iter().enumerate() {
            let (no, entries) = next_line(&mut last_line)?;
            let mut vars = Vec::with_capacity(declared);
            for &idx in entries.iter().filter(|&&x| x != 0) {
                if idx > n_vars {
                    return Err(AlistError::IndexOutOfRange {
                        line: no,
                        index: idx,
                        max: n_vars,
                    });
                }
                if vars.contains(&(idx - 1)) {
                    return Err(AlistError::DuplicateEdge {
                        line: no,
                        var: idx,
                        check: check + 1,
                    });
                }
                vars.push(idx - 1);
            }
            if vars.len() != declared {
                return Err(AlistError::DegreeMismatch {
                    line: no,
                    declared,
                    found: vars.len(),
                });
            }
            vars.sort_unstable();
            if vars != graph.check_neighbors[check] {
                let var = vars
                    .iter()
                    .find(|v| !graph.check_neighbors[check].contains(v))
                    .or_else(|| {
                        graph.check_neighbors[check]
                            .iter()
                            .find(|v| !vars.contains(v))
                    })
                    .copied()
                    .unwrap_or(0);
                return Err(AlistError::Inconsistent {
                    line: no,
                    var: var + 1,
                    check: check + 1,
                });
            }
        }
        Ok(graph)
    }

    /// Serializes to alist. Rows are not padded, except that an empty row
    /// is written as a single `0`.
    pub fn to_alist(&self) -> String {
        let mut out = String::new();
        let max_v = self.var_neighbors.iter().map(Vec::len).max().unwrap_or(0);
        let max_c = self.check_neighbors.iter().map(Vec::len).max().unwrap_or(0);
        let join = |it: &mut dyn Iterator<Item = usize>| {
            let s = it.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            if s.is_empty() {
                "0".to_string()
            } else {
                s
            }
        };
        let _ = writeln!(out, "{} {}", self.n_vars, self.n_checks);
        let _ = writeln!(out, "{max_v} {max_c}");
        let _ = writeln!(
            out,
            "{}",
            join(&mut self.var_neighbors.iter().map(Vec::len))
        );
        let _ = writeln!(
            out,
            "{}",
            join(&mut self.check_neighbors.iter().map(Vec::len))
        );
        for checks in &self.var_neighbors {
            let _ = writeln!(out, "{}", join(&mut checks.iter().map(|c| c + 1)));
        }
        for vars in &self.check_neighbors {
            let _ = writeln!(out, "{}", join(&mut vars.iter().map(|v| v + 1)));
        }
        out
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    pub fn n_edges(&self) -> usize {
        self.edge_var.len()
    }

    /// ℳ(n), ascending.
    pub fn var_neighbors(&self, var: usize) -> &[usize] {
        &self.var_neighbors[var]
    }

    /// 𝒩(m), ascending.
    pub fn check_neighbors(&self, check: usize) -> &[usize] {
        &self.check_neighbors[check]
    }

    /// Edge ids of variable `var`, aligned with [`Self::var_neighbors`].
    pub fn var_edges(&self, var: usize) -> Range<usize> {
        self.var_offsets[var]..self.var_offsets[var + 1]
    }

    /// Edge ids of check `check`, aligned with [`Self::check_neighbors`].
    pub fn check_edges(&self, check: usize) -> &[usize] {
        &self.check_edges[check]
    }

    pub fn edge_var(&self, edge: usize) -> usize {
        self.edge_var[edge]
    }

    pub fn edge_check(&self, edge: usize) -> usize {
        self.edge_check[edge]
    }

    /// Canonical id of the edge (var, check), if present.
    pub fn edge_index(&self, var: usize, check: usize) -> Option<usize> {
        let checks = self.var_neighbors.get(var)?;
        checks
            .binary_search(&check)
            .ok()
            .map(|k| self.var_offsets[var] + k)
    }

    pub fn var_degree(&self, var: usize) -> usize {
        self.var_neighbors[var].len()
    }

    pub fn check_degree(&self, check: usize) -> usize {
        self.check_neighbors[check].len()
    }

    pub fn syndrome(&self, bits: &[u8]) -> Result<Syndrome, GraphError> {
        if bits.len() != self.n_vars {
            return Err(GraphError::LengthMismatch {
                got: bits.len(),
                expected: self.n_vars,
            });
        }
        let bits = self
            .check_neighbors
            .iter()
            .map(|vars| vars.iter().fold(0u8, |acc, &v| acc ^ (bits[v] & 1)))
            .collect();
        Ok(Syndrome { bits })
    }

    /// Zero-syndrome test without allocating. Panics on a length mismatch.
    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        assert_eq!(bits.len(), self.n_vars, "bit vector length");
        self.check_neighbors
            .iter()
            .all(|vars| vars.iter().fold(0u8, |acc, &v| acc ^ (bits[v] & 1)) == 0)
    }

    /// Dense parity-check matrix, one row per check.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut rows = vec![vec![0u8; self.n_vars]; self.n_checks];
        for (m, vars) in self.check_neighbors.iter().enumerate() {
            for &v in vars {
                rows[m][v] = 1;
            }
        }
        rows
    }

    /// Number of trainable weights of one BP-RNN decoder: one data-pass and
    /// one a-posteriori weight per edge.
    pub fn count_weights(&self) -> usize {
        2 * self.n_edges()
    }

    /// Girth and number of shortest cycles, or `None` for an acyclic graph.
    ///
    /// In a graph of girth 2k, two distinct shortest paths of length k
    /// between the same pair of nodes close a 2k-cycle, and every 2k-cycle
    /// arises this way once from each of its 2k nodes (paired with its
    /// antipode). The count is therefore Σ_s Σ_{d(s,t)=k} C(σ_st, 2) / 2k,
    /// where σ_st is the number of shortest s–t paths.
    pub fn girth_and_multiplicity(&self) -> Option<(usize, u64)> {
        let total = self.n_vars + self.n_checks;
        let neighbors = |u: usize| -> &[usize] {
            if u < self.n_vars {
                &self.var_neighbors[u]
            } else {
                &self.check_neighbors[u - self.n_vars]
            }
        };
        let node = |u: usize, other: usize| -> usize {
            // map a neighbor index into the joint node space
            if u < self.n_vars {
                other + self.n_vars
            } else {
                other
            }
        };

        let mut dist = vec![usize::MAX; total];
        let mut paths = vec![0u64; total];
        let mut queue = VecDeque::new();
        let mut bfs = |s: usize, depth_limit: usize, dist: &mut [usize], paths: &mut [u64]| {
            dist.fill(usize::MAX);
            paths.fill(0);
            dist[s] = 0;
            paths[s] = 1;
            queue.clear();
            queue.push_back(s);
            let mut visited = vec![s];
            while let Some(u) = queue.pop_front() {
                if dist[u] >= depth_limit {
                    continue;
                }
                for &o in neighbors(u) {
                    let w = node(u, o);
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        paths[w] = paths[u];
                        queue.push_back(w);
                        visited.push(w);
                    } else if dist[w] == dist[u] + 1 {
                        paths[w] = paths[w].saturating_add(paths[u]);
                    }
                }
            }
            visited
        };

        // first pass: the smallest depth at which two shortest paths meet
        let mut half = usize::MAX;
        for s in 0..total {
            let visited = bfs(s, half, &mut dist, &mut paths);
            for &t in &visited {
                if paths[t] >= 2 && dist[t] < half {
                    half = dist[t];
                }
            }
        }
        if half == usize::MAX {
            return None;
        }

        let mut pairs: u64 = 0;
        for s in 0..total {
            let visited = bfs(s, half, &mut dist, &mut paths);
            for &t in &visited {
                if dist[t] == half && paths[t] >= 2 {
                    pairs += paths[t] * (paths[t] - 1) / 2;
                }
            }
        }
        let girth = 2 * half;
        Some((girth, pairs / girth as u64))
    }

    /// One CSV row: `N,M,E,girth,multiplicity` (girth fields empty if acyclic).
    pub fn summary_csv_row(&self) -> String {
        match self.girth_and_multiplicity() {
            Some((g, c)) => format!(
                "{},{},{},{},{}",
                self.n_vars,
                self.n_checks,
                self.n_edges(),
                g,
                c
            ),
            None => format!("{},{},{},,", self.n_vars, self.n_checks, self.n_edges()),
        }
    }
}

pub const SUMMARY_CSV_HEADER: &str = "N,M,E,girth,multiplicity";
