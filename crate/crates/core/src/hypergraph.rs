//! The k-uniform hypergraph and colouring types.

use crate::error::{Error, Result};

/// An immutable k-uniform hypergraph on vertices `0..n`.
///
/// Edges are sorted k-sets of vertex ids; each vertex keeps the list of
/// edge ids it belongs to, so walking the edges at a vertex is O(deg).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    k: usize,
    edges: Vec<Vec<usize>>,
    incidence: Vec<Vec<usize>>,
}

/// Outcome of the pairwise-intersection check. A hypergraph is simple when
/// any two distinct edges share at most one vertex; `violations` lists every
/// offending edge-id pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicityReport {
    pub is_simple: bool,
    pub violations: Vec<(usize, usize)>,
}

impl Hypergraph {
    /// Build and validate. Edges may be given in any vertex order; they are
    /// stored sorted. Fails on wrong arity, repeated vertices inside an
    /// edge, out-of-range ids, or duplicate edges.
    pub fn new(n: usize, k: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        if k < 2 {
            return Err(Error::Invalid(format!("k must be at least 2, got {k}")));
        }
        let mut sorted_edges = Vec::with_capacity(edges.len());
        for (id, mut e) in edges.into_iter().enumerate() {
            if e.len() != k {
                return Err(Error::Invalid(format!(
                    "edge {id} has {} vertices, expected {k}",
                    e.len()
                )));
            }
            e.sort_unstable();
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Invalid(format!("edge {id} repeats a vertex")));
            }
            if *e.last().unwrap() >= n {
                return Err(Error::Range(format!(
                    "edge {id} mentions vertex {} but n = {n}",
                    e.last().unwrap()
                )));
            }
            sorted_edges.push(e);
        }
        let mut dedup = sorted_edges.clone();
        dedup.sort_unstable();
        if dedup.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid("duplicate edge".into()));
        }
        let mut incidence = vec![Vec::new(); n];
        for (id, e) in sorted_edges.iter().enumerate() {
            for &v in e {
                incidence[v].push(id);
            }
        }
        Ok(Self {
            n,
            k,
            edges: sorted_edges,
            incidence,
        })
    }

    /// A hypergraph with no edges (isolated vertices are allowed).
    pub fn edgeless(n: usize, k: usize) -> Self {
        Self::new(n, k, Vec::new()).expect("edgeless hypergraph is always valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, id: usize) -> &[usize] {
        &self.edges[id]
    }

    pub fn edges(&self) -> impl Iterator<Item = &[usize]> {
        self.edges.iter().map(|e| e.as_slice())
    }

    /// Edge ids incident to `v`.
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence[v].len()
    }

    /// Maximum degree Δ; 0 for an edgeless hypergraph.
    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Check that any two distinct edges intersect in at most one vertex.
    ///
    /// Every vertex pair inside an edge is bucketed; a bucket holding two or
    /// more edges witnesses a violation. Two edges sharing three or more
    /// vertices appear in several buckets but are reported once.
    pub fn validate_simple(&self) -> SimplicityReport {
        use std::collections::{BTreeSet, HashMap};
        let mut by_pair: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (id, e) in self.edges.iter().enumerate() {
            for i in 0..e.len() {
                for j in (i + 1)..e.len() {
                    by_pair.entry((e[i], e[j])).or_default().push(id);
                }
            }
        }
        let mut violations = BTreeSet::new();
        for ids in by_pair.values() {
            for a in 0..ids.len() {
                for b in (a + 1)..ids.len() {
                    let (x, y) = (ids[a].min(ids[b]), ids[a].max(ids[b]));
                    violations.insert((x, y));
                }
            }
        }
        let violations: Vec<_> = violations.into_iter().collect();
        SimplicityReport {
            is_simple: violations.is_empty(),
            violations,
        }
    }

    /// A colouring is proper when no edge is mono-coloured.
    pub fn is_proper(&self, x: &Colouring) -> bool {
        self.edges
            .iter()
            .all(|e| e.iter().any(|&v| x.colour(v) != x.colour(e[0])))
    }
}

/// An assignment of colours `1..=q` to the vertices; an element of Ω = Q^V.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Colouring {
    colours: Vec<u32>,
    q: u32,
}

impl Colouring {
    pub fn new(colours: Vec<u32>, q: u32) -> Result<Self> {
        if q < 1 {
            return Err(Error::Range("q must be at least 1".into()));
        }
        if let Some(&c) = colours.iter().find(|&&c| c < 1 || c > q) {
            return Err(Error::Range(format!("colour {c} outside [1, {q}]")));
        }
        Ok(Self { colours, q })
    }

    /// Each vertex coloured independently and uniformly from `1..=q`.
    pub fn uniform_random(n: usize, q: u32, rng: &mut impl rand::Rng) -> Self {
        let colours = (0..n).map(|_| rng.gen_range(1..=q)).collect();
        Self { colours, q }
    }

    /// All vertices coloured `c`.
    pub fn constant(n: usize, c: u32, q: u32) -> Result<Self> {
        Self::new(vec![c; n], q)
    }

    pub fn len(&self) -> usize {
        self.colours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colours.is_empty()
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn colour(&self, v: usize) -> u32 {
        self.colours[v]
    }

    pub fn set_colour(&mut self, v: usize, c: u32) {
        assert!(c >= 1 && c <= self.q, "colour {c} outside [1, {}]", self.q);
        self.colours[v] = c;
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.colours
    }
}

/// Number of vertices at which two colourings disagree.
pub fn hamming(x: &Colouring, y: &Colouring) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "colourings of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.q() != y.q() {
        return Err(Error::Dimension(format!("q = {} vs q = {}", x.q(), y.q())));
    }
    Ok(x.as_slice()
        .iter()
        .zip(y.as_slice())
        .filter(|(a, b)| a != b)
        .count())
}
