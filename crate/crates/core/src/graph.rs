//! Finite undirected connected graphs, the standard generators, and the
//! edge-list text format.
//!
//! Edges are stored once as `(u, v)` with `u < v` and indexed `0..|E|`, so the
//! engine can pick a uniform edge in O(1). A [`Graph`] can only be obtained
//! through validation, and it is immutable afterwards.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const ER_MAX_DRAWS: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    incident: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds and validates a graph. Edge orientation is irrelevant.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Structure("graph needs at least one vertex".into()));
        }
        let mut seen = HashSet::new();
        let mut normalized = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Structure(format!("edge ({u}, {v}) references a vertex >= {n}")));
            }
            if u == v {
                return Err(Error::Structure(format!("self-loop at vertex {u}")));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(Error::Structure(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
            normalized.push(e);
        }
        let mut incident = vec![Vec::new(); n];
        for (id, &(u, v)) in normalized.iter().enumerate() {
            incident[u].push(id);
            incident[v].push(id);
        }
        let g = Graph { n, edges: normalized, incident };
        if let Some(vertex) = g.first_unreachable() {
            return Err(Error::Disconnected { vertex });
        }
        Ok(g)
    }

    fn first_unreachable(&self) -> Option<usize> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for &e in &self.incident[x] {
                let y = self.other_end(e, x);
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, id: usize) -> (usize, usize) {
        self.edges[id]
    }

    /// Ids of the edges incident to `x`.
    #[inline]
    pub fn incident(&self, x: usize) -> &[usize] {
        &self.incident[x]
    }

    #[inline]
    fn other_end(&self, edge: usize, x: usize) -> usize {
        let (u, v) = self.edges[edge];
        if u == x {
            v
        } else {
            u
        }
    }

    pub fn degree(&self, x: usize) -> usize {
        self.incident[x].len()
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        if u >= self.n || v >= self.n {
            return None;
        }
        self.incident[u].iter().copied().find(|&e| self.other_end(e, u) == v && u != v)
    }

    /// Serializes to the edge-list format accepted by [`load_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

/// Re-checks every structural invariant of `g`.
pub fn validate(g: &Graph) -> Result<()> {
    Graph::new(g.n, g.edges.iter().copied()).map(|_| ())
}

/// Parses the whitespace-separated edge-list format. Lines starting with `#`
/// and blank lines are skipped; the vertex count is the largest id plus one.
pub fn load_edge_list(text: &str) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut max_id = None::<usize>;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let ids: Vec<&str> = line.split_whitespace().collect();
        if ids.len() != 2 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected two vertex ids, found {} tokens", ids.len()),
            });
        }
        let parse = |tok: &str| {
            tok.parse::<usize>()
                .map_err(|_| Error::Parse { line: lineno, message: format!("'{tok}' is not a non-negative integer") })
        };
        let (u, v) = (parse(ids[0])?, parse(ids[1])?);
        max_id = Some(max_id.unwrap_or(0).max(u).max(v));
        edges.push((u, v));
    }
    let n = max_id.map(|m| m + 1).ok_or_else(|| Error::Structure("edge list has no edges".into()))?;
    Graph::new(n, edges)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphKind {
    Complete(usize),
    Path(usize),
    Cycle(usize),
    Torus {
        width: usize,
        height: usize,
    },
    Star(usize),
    /// G(n, p) conditioned on being connected.
    ErdosRenyi {
        n: usize,
        p: f64,
    },
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Complete(n) => write!(f, "complete:{n}"),
            GraphKind::Path(n) => write!(f, "path:{n}"),
            GraphKind::Cycle(n) => write!(f, "cycle:{n}"),
            GraphKind::Torus { width, height } => write!(f, "torus:{width}x{height}"),
            GraphKind::Star(n) => write!(f, "star:{n}"),
            GraphKind::ErdosRenyi { n, p } => write!(f, "er:{n}:{p}"),
        }
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("cannot parse graph '{s}'"));
        let mut parts = s.trim().split(':');
        let name = parts.next().ok_or_else(bad)?.to_ascii_lowercase();
        let rest: Vec<&str> = parts.collect();
        let int = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let kind = match (name.as_str(), rest.as_slice()) {
            ("complete", [n]) => GraphKind::Complete(int(n)?),
            ("path", [n]) => GraphKind::Path(int(n)?),
            ("cycle", [n]) => GraphKind::Cycle(int(n)?),
            ("star", [n]) => GraphKind::Star(int(n)?),
            ("torus", [wh]) => {
                let (w, h) = wh.split_once(['x', 'X']).ok_or_else(bad)?;
                GraphKind::Torus { width: int(w)?, height: int(h)? }
            }
            ("er", [n, p]) => GraphKind::ErdosRenyi { n: int(n)?, p: p.trim().parse::<f64>().map_err(|_| bad())? },
            _ => return Err(bad()),
        };
        Ok(kind)
    }
}

/// A generated graph and the number of rejected Erdős–Rényi draws (0 for
/// the deterministic families).
#[derive(Debug, Clone)]
pub struct Generated {
    pub graph: Graph,
    pub rejected_draws: u64,
}

pub fn generate(kind: GraphKind, seed: u64) -> Result<Generated> {
    let need = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("{kind}: {what}")))
        }
    };
    let deterministic =
        |n: usize, edges: Vec<(usize, usize)>| Graph::new(n, edges).map(|graph| Generated { graph, rejected_draws: 0 });
    match kind {
        GraphKind::Complete(n) => {
            need(n >= 2, "needs n >= 2")?;
            deterministic(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect())
        }
        GraphKind::Path(n) => {
            need(n >= 2, "needs n >= 2")?;
            deterministic(n, (0..n - 1).map(|u| (u, u + 1)).collect())
        }
        GraphKind::Cycle(n) => {
            need(n >= 3, "needs n >= 3")?;
            deterministic(n, (0..n).map(|u| (u, (u + 1) % n)).collect())
        }
        GraphKind::Star(n) => {
            need(n >= 2, "needs n >= 2")?;
            deterministic(n, (1..n).map(|v| (0, v)).collect())
        }
        GraphKind::Torus { width, height } => {
            need(width >= 2 && height >= 2, "needs width, height >= 2")?;
            let id = |x: usize, y: usize| y * width + x;
            let mut seen = HashSet::new();
            let mut edges = Vec::new();
            for y in 0..height {
                for x in 0..width {
                    for (u, v) in [(id(x, y), id((x + 1) % width, y)), (id(x, y), id(x, (y + 1) % height))] {
                        if seen.insert((u.min(v), u.max(v))) {
                            edges.push((u, v));
                        }
                    }
                }
            }
            deterministic(width * height, edges)
        }
        GraphKind::ErdosRenyi { n, p } => {
            need(n >= 2, "needs n >= 2")?;
            need(p > 0.0 && p <= 1.0, "needs 0 < p <= 1")?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for rejected in 0..ER_MAX_DRAWS {
                let mut edges = Vec::new();
                for u in 0..n {
                    for v in u + 1..n {
                        if rng.random::<f64>() < p {
                            edges.push((u, v));
                        }
                    }
                }
                match Graph::new(n, edges) {
                    Ok(graph) => return Ok(Generated { graph, rejected_draws: rejected }),
                    Err(Error::Disconnected { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::invalid(format!("{kind}: no connected draw in {ER_MAX_DRAWS} attempts")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn validate_examples() {
        assert!(Graph::new(2, [(0, 1)]).is_ok());
        assert_eq!(Graph::new(3, [(0, 1)]).unwrap_err(), Error::Disconnected { vertex: 2 });
        assert!(matches!(Graph::new(1, [(0, 0)]), Err(Error::Structure(_))));
        assert!(matches!(Graph::new(2, [(0, 1), (1, 0)]), Err(Error::Structure(_))));
        assert!(matches!(Graph::new(2, [(0, 5)]), Err(Error::Structure(_))));
    }

    #[test]
    fn generator_edge_counts() {
        let count = |k: GraphKind| generate(k, 0).unwrap().graph.n_edges();
        assert_eq!(count(GraphKind::Complete(4)), 6);
        assert_eq!(count(GraphKind::Path(2)), 1);
        assert_eq!(count(GraphKind::Cycle(5)), 5);
        assert_eq!(count(GraphKind::Star(7)), 6);
        assert_eq!(count(GraphKind::Torus { width: 3, height: 3 }), 18);
        assert_eq!(count(GraphKind::Torus { width: 4, height: 4 }), 32);
        // wrap-around coincides with the direct neighbour when a side is 2
        assert_eq!(count(GraphKind::Torus { width: 2, height: 3 }), 9);
    }

    #[test]
    fn torus_matches_brute_force_neighbourhoods() {
        // independent construction: two vertices are adjacent iff they differ
        // by one step (mod side) in exactly one coordinate
        let (w, h) = (3usize, 3usize);
        let mut brute = HashSet::new();
        for a in 0..w * h {
            for b in a + 1..w * h {
                let (ax, ay, bx, by) = (a % w, a / w, b % w, b / w);
                let step = |p: usize, q: usize, m: usize| (p + 1) % m == q || (q + 1) % m == p;
                if (ay == by && step(ax, bx, w)) || (ax == bx && step(ay, by, h)) {
                    brute.insert((a, b));
                }
            }
        }
        let g = generate(GraphKind::Torus { width: w, height: h }, 0).unwrap().graph;
        let got: HashSet<_> = g.edges().iter().copied().collect();
        assert_eq!(got, brute);
        assert_eq!(brute.len(), 2 * w * h);
        assert!((0..9).all(|x| g.degree(x) == 4));
    }

    #[test]
    fn generator_parameter_errors() {
        assert!(generate(GraphKind::Complete(1), 0).is_err());
        assert!(generate(GraphKind::Cycle(2), 0).is_err());
        assert!(generate(GraphKind::ErdosRenyi { n: 5, p: 0.0 }, 0).is_err());
        assert!(generate(GraphKind::ErdosRenyi { n: 5, p: 1.5 }, 0).is_err());
    }

    #[test]
    fn parse_graph_kinds() {
        assert_eq!("complete:10".parse::<GraphKind>().unwrap(), GraphKind::Complete(10));
        assert_eq!("torus:4x4".parse::<GraphKind>().unwrap(), GraphKind::Torus { width: 4, height: 4 });
        assert_eq!("er:12:0.3".parse::<GraphKind>().unwrap(), GraphKind::ErdosRenyi { n: 12, p: 0.3 });
        assert!("wheel:5".parse::<GraphKind>().is_err());
        assert!("path:x".parse::<GraphKind>().is_err());
    }

    #[test]
    fn edge_list_examples() {
        let g = load_edge_list("0 1\n1 2\n").unwrap();
        assert_eq!(g.n_vertices(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert!(matches!(load_edge_list("0 1\n0 1\n"), Err(Error::Structure(_))));
        assert_eq!(load_edge_list("0 2\n").unwrap_err(), Error::Disconnected { vertex: 1 });
    }

    #[test]
    fn edge_list_comments_and_parse_errors() {
        let g = load_edge_list("# triangle\n\n0 1\n  1 2 \n# done\n2 0\n").unwrap();
        assert_eq!(g.n_edges(), 3);
        assert_eq!(
            load_edge_list("0 1\n1 two\n").unwrap_err(),
            Error::Parse { line: 2, message: "'two' is not a non-negative integer".into() }
        );
        assert!(matches!(load_edge_list("0 1 2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(load_edge_list("# nothing\n"), Err(Error::Structure(_))));
    }

    #[test]
    fn edge_lookup() {
        let g = generate(GraphKind::Cycle(4), 0).unwrap().graph;
        assert_eq!(g.edge_id(3, 0), Some(3));
        assert_eq!(g.edge_id(0, 2), None);
        assert_eq!(g.edge_id(0, 9), None);
    }

    proptest! {
        #[test]
        fn er_is_deterministic_and_valid(n in 2usize..16, p in 0.15f64..1.0, seed in any::<u64>()) {
            let a = generate(GraphKind::ErdosRenyi { n, p }, seed).unwrap();
            let b = generate(GraphKind::ErdosRenyi { n, p }, seed).unwrap();
            prop_assert_eq!(&a.graph, &b.graph);
            prop_assert_eq!(a.rejected_draws, b.rejected_draws);
            prop_assert!(validate(&a.graph).is_ok());
        }

        #[test]
        fn edge_list_round_trip(n in 2usize..14, p in 0.2f64..1.0, seed in any::<u64>()) {
            let g = generate(GraphKind::ErdosRenyi { n, p }, seed).unwrap().graph;
            let back = load_edge_list(&g.to_edge_list()).unwrap();
            let a: HashSet<_> = g.edges().iter().copied().collect();
            let b: HashSet<_> = back.edges().iter().copied().collect();
            prop_assert_eq!(g.n_vertices(), back.n_vertices());
            prop_assert_eq!(a, b);
        }
    }
}
