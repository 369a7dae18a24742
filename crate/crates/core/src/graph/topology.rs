use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use super::GraphError;

/// Family a [`Topology`] was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyKind {
    Complete,
    Ring,
    Path,
    Grid { rows: usize, cols: usize },
    /// Node `i` links to `(i ± 2^j) mod n` for `j = 0..=floor(log2(n-1))`.
    Exponential,
    Custom,
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyKind::Complete => write!(f, "complete"),
            TopologyKind::Ring => write!(f, "ring"),
            TopologyKind::Path => write!(f, "path"),
            TopologyKind::Grid { rows, cols } => write!(f, "grid {rows}x{cols}"),
            TopologyKind::Exponential => write!(f, "exponential"),
            TopologyKind::Custom => write!(f, "custom"),
        }
    }
}

/// Parses the family name alone (`"grid"` needs dimensions, use `"grid:RxC"` or [`TopologySpec`]).
impl FromStr for TopologyKind {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "complete" => Ok(TopologyKind::Complete),
            "ring" | "cycle" => Ok(TopologyKind::Ring),
            "path" | "line" => Ok(TopologyKind::Path),
            "exponential" | "exp" => Ok(TopologyKind::Exponential),
            "custom" => Ok(TopologyKind::Custom),
            other => match other.strip_prefix("grid:") {
                Some(dims) => {
                    let (rows, cols) = parse_grid_dims(dims)?;
                    Ok(TopologyKind::Grid { rows, cols })
                }
                None => Err(GraphError::UnknownKind(s.to_string())),
            },
        }
    }
}

/// Parses `"RxC"` grid dimensions.
pub fn parse_grid_dims(s: &str) -> Result<(usize, usize), GraphError> {
    let bad = || GraphError::UnknownKind(format!("grid dimensions `{s}`"));
    let (r, c) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let rows = r.trim().parse::<usize>().map_err(|_| bad())?;
    let cols = c.trim().parse::<usize>().map_err(|_| bad())?;
    Ok((rows, cols))
}

/// Undirected connected graph on nodes `0..n`. Self-loops are implied at every node
/// and never stored; `edges` holds each unordered pair once as `(lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    kind: TopologyKind,
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Topology {
    /// Builds a topology from a custom edge list, validating indices and connectivity.
    /// Self-loop entries `(i, i)` are accepted and ignored; duplicates collapse.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::assemble(TopologyKind::Custom, n, edges)
    }

    fn assemble<I>(kind: TopologyKind, n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(GraphError::NodeOutOfRange { node: a.max(b), n });
            }
            if a != b {
                set.insert((a.min(b), a.max(b)));
            }
        }
        let topo = Topology { kind, n, edges: set };
        if !topo.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(topo)
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a == b || self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Neighbour lists, excluding the implicit self-loop.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Degrees excluding self-loops.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n
    }

    /// Writes the edge-list text format: first line `n`, then one `i j` line per edge.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.n)?;
        for &(a, b) in &self.edges {
            writeln!(out, "{a} {b}")?;
        }
        Ok(())
    }

    /// Reads the edge-list text format. Blank lines and `#` comments are skipped.
    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self, GraphError> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| GraphError::Parse {
                line: lineno,
                msg: e.to_string(),
            })?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let parse = |tok: &str| {
                tok.parse::<usize>().map_err(|_| GraphError::Parse {
                    line: lineno,
                    msg: format!("expected a non-negative integer, got `{tok}`"),
                })
            };
            let toks: Vec<&str> = body.split_whitespace().collect();
            match (n, toks.as_slice()) {
                (None, [count]) => n = Some(parse(count)?),
                (Some(_), [a, b]) => edges.push((parse(a)?, parse(b)?)),
                _ => {
                    return Err(GraphError::Parse {
                        line: lineno,
                        msg: format!("unexpected line `{body}`"),
                    })
                }
            }
        }
        let n = n.ok_or(GraphError::Parse {
            line: 0,
            msg: "missing node count".into(),
        })?;
        Topology::from_edges(n, edges)
    }
}

/// Builds one of the named topology families on `n` nodes.
pub fn build_topology(kind: TopologyKind, n: usize) -> Result<Topology, GraphError> {
    if n == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let mut edges = Vec::new();
    match kind {
        TopologyKind::Complete => {
            for a in 0..n {
                for b in a + 1..n {
                    edges.push((a, b));
                }
            }
        }
        TopologyKind::Ring => {
            for a in 0..n {
                edges.push((a, (a + 1) % n));
            }
        }
        TopologyKind::Path => {
            for a in 1..n {
                edges.push((a - 1, a));
            }
        }
        TopologyKind::Grid { rows, cols } => {
            if rows * cols != n {
                return Err(GraphError::GridMismatch { rows, cols, n });
            }
            for r in 0..rows {
                for c in 0..cols {
                    let i = r * cols + c;
                    if c + 1 < cols {
                        edges.push((i, i + 1));
                    }
                    if r + 1 < rows {
                        edges.push((i, i + cols));
                    }
                }
            }
        }
        TopologyKind::Exponential => {
            if n > 1 {
                // floor(log2(n - 1))
                let max_j = usize::BITS - 1 - (n - 1).leading_zeros();
                for j in 0..=max_j {
                    let offset = (1usize << j) % n;
                    for a in 0..n {
                        edges.push((a, (a + offset) % n));
                    }
                }
            }
        }
        TopologyKind::Custom => return Err(GraphError::CustomNeedsEdges),
    }
    Topology::assemble(kind, n, edges)
}

/// A topology family together with its size, as written on the command line
/// (`"ring 8"`, `"grid 10x10"`, `"exponential 10"`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopologySpec {
    pub kind: TopologyKind,
    pub n: usize,
}

impl TopologySpec {
    pub fn build(&self) -> Result<Topology, GraphError> {
        build_topology(self.kind, self.n)
    }

    /// Parses a family name and a size argument. For grids the size is `RxC`.
    pub fn parse(kind: &str, size: &str) -> Result<Self, GraphError> {
        if kind.trim().eq_ignore_ascii_case("grid") {
            let (rows, cols) = parse_grid_dims(size)?;
            return Ok(TopologySpec {
                kind: TopologyKind::Grid { rows, cols },
                n: rows * cols,
            });
        }
        let kind: TopologyKind = kind.parse()?;
        let n = size
            .trim()
            .parse::<usize>()
            .map_err(|_| GraphError::UnknownKind(format!("node count `{size}`")))?;
        Ok(TopologySpec { kind, n })
    }
}
