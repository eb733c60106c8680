//! Brute-force ground truth for tiny instances: exact enumeration of proper
//! colourings, dense one-step evolution of the chain's law, total-variation
//! distances, and the structure of the Glauber graph on proper colourings.
//!
//! A colouring maps to the index Σ_v (colour(v) - 1) q^v, little-endian in
//! the vertex id, so single-vertex recolourings are digit surgery. All
//! operations are gated by a state budget (default 2·10^6 states).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::{Colouring, Hypergraph};
use crate::scalar::Real;

/// Default cap on q^n for the dense-vector operations.
pub const DEFAULT_STATE_BUDGET: u64 = 2_000_000;

/// q^n when it fits into the budget.
pub fn check_budget(n: usize, q: u32, budget: u64) -> Result<u64> {
    let mut states: u128 = 1;
    for _ in 0..n {
        states = states.saturating_mul(q as u128);
    }
    if states > budget as u128 {
        return Err(Error::BudgetExceeded { states, budget });
    }
    Ok(states as u64)
}

/// A dense probability vector over Ω = Q^V.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution<S: Real = f64> {
    n: usize,
    q: u32,
    probs: Vec<S>,
}

impl<S: Real> ExactDistribution<S> {
    /// The uniform distribution on all of Ω.
    pub fn uniform(n: usize, q: u32, budget: u64) -> Result<Self> {
        let states = check_budget(n, q, budget)?;
        let w = S::one() / S::from_u64(states).expect("state count fits the scalar");
        Ok(Self {
            n,
            q,
            probs: vec![w; states as usize],
        })
    }

    /// All mass on one colouring.
    pub fn point_mass(x: &Colouring, budget: u64) -> Result<Self> {
        let states = check_budget(x.len(), x.q(), budget)?;
        let mut probs = vec![S::zero(); states as usize];
        probs[encode(x) as usize] = S::one();
        Ok(Self {
            n: x.len(),
            q: x.q(),
            probs,
        })
    }

    /// A distribution from explicit nonnegative weights, normalized to
    /// total mass one.
    pub fn from_weights(n: usize, q: u32, weights: &[S], budget: u64) -> Result<Self> {
        let states = check_budget(n, q, budget)?;
        if weights.len() != states as usize {
            return Err(Error::Dimension(format!(
                "{} weights for a state space of {states}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| *w < S::zero()) {
            return Err(Error::Range("negative weight".into()));
        }
        let total = kahan_sum(weights.iter().copied());
        if total <= S::zero() {
            return Err(Error::Range("weights sum to zero".into()));
        }
        Ok(Self {
            n,
            q,
            probs: weights.iter().map(|&w| w / total).collect(),
        })
    }

    /// Uniform on the given state indices.
    pub fn uniform_on(states: &[u64], n: usize, q: u32, budget: u64) -> Result<Self> {
        let total = check_budget(n, q, budget)?;
        if states.is_empty() {
            return Err(Error::Dimension(
                "uniform distribution on an empty set".into(),
            ));
        }
        let w = S::one() / S::from_usize(states.len()).expect("support size fits the scalar");
        let mut probs = vec![S::zero(); total as usize];
        for &s in states {
            probs[s as usize] = w;
        }
        Ok(Self { n, q, probs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, state: u64) -> S {
        self.probs[state as usize]
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    /// Total mass, with compensated summation.
    pub fn total_mass(&self) -> S {
        kahan_sum(self.probs.iter().copied())
    }

    /// Mass on the given sorted state set.
    pub fn mass_on(&self, states: &[u64]) -> S {
        kahan_sum(states.iter().map(|&s| self.probs[s as usize]))
    }
}

/// Compensated (Kahan) summation.
fn kahan_sum<S: Real>(values: impl Iterator<Item = S>) -> S {
    let mut sum = S::zero();
    let mut c = S::zero();
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Index of a colouring: Σ_v (colour(v) - 1) q^v.
pub fn encode(x: &Colouring) -> u64 {
    let q = x.q() as u64;
    let mut acc = 0u64;
    let mut place = 1u64;
    for v in 0..x.len() {
        acc += (x.colour(v) as u64 - 1) * place;
        place = place.saturating_mul(q);
    }
    acc
}

/// Inverse of [`encode`].
pub fn decode(state: u64, n: usize, q: u32) -> Colouring {
    let mut s = state;
    let colours: Vec<u32> = (0..n)
        .map(|_| {
            let c = (s % q as u64) as u32 + 1;
            s /= q as u64;
            c
        })
        .collect();
    Colouring::new(colours, q).expect("decoded digits are in range")
}

fn decode_into(state: u64, q: u32, buf: &mut [u32]) {
    let mut s = state;
    for slot in buf.iter_mut() {
        *slot = (s % q as u64) as u32 + 1;
        s /= q as u64;
    }
}

fn is_proper_raw(h: &Hypergraph, cols: &[u32]) -> bool {
    h.edges().all(|e| e.iter().any(|&v| cols[v] != cols[e[0]]))
}

/// Available colours at v for a raw colour buffer.
fn available_raw(h: &Hypergraph, q: u32, cols: &[u32], v: usize, out: &mut Vec<u32>) {
    out.clear();
    'colour: for c in 1..=q {
        for &e in h.incident_edges(v) {
            let mut mono = true;
            for &u in h.edge(e) {
                if u != v && cols[u] != c {
                    mono = false;
                    break;
                }
            }
            if mono {
                continue 'colour;
            }
        }
        out.push(c);
    }
}

/// All proper colourings, as sorted state indices.
pub fn enumerate_proper(h: &Hypergraph, q: u32, budget: u64) -> Result<Vec<u64>> {
    let states = check_budget(h.n(), q, budget)?;
    let mut cols = vec![0u32; h.n()];
    let mut out = Vec::new();
    for s in 0..states {
        decode_into(s, q, &mut cols);
        if is_proper_raw(h, &cols) {
            out.push(s);
        }
    }
    Ok(out)
}

/// Number of proper colourings. Subject to the same budget as the listing.
pub fn count_proper(h: &Hypergraph, q: u32, budget: u64) -> Result<u64> {
    Ok(enumerate_proper(h, q, budget)?.len() as u64)
}

/// One exact step of the dynamics: π'(Y) = Σ_X π(X) P(X → Y), pushed
/// state by state. States with zero mass are skipped.
pub fn transition_step_exact<S: Real>(
    h: &Hypergraph,
    dist: &ExactDistribution<S>,
) -> Result<ExactDistribution<S>> {
    if dist.n() != h.n() {
        return Err(Error::Dimension(format!(
            "distribution over n = {} states on hypergraph with n = {}",
            dist.n(),
            h.n()
        )));
    }
    let n = h.n();
    let q = dist.q();
    let mut probs = vec![S::zero(); dist.len()];
    let mut cols = vec![0u32; n];
    let mut avail: Vec<u32> = Vec::with_capacity(q as usize);
    let n_scalar = S::from_usize(n).expect("n fits the scalar");

    // Precomputed place values q^v.
    let mut place = vec![1u64; n];
    for v in 1..n {
        place[v] = place[v - 1] * q as u64;
    }

    for s in 0..dist.len() as u64 {
        let p = dist.prob(s);
        if p == S::zero() {
            continue;
        }
        let p_vertex = p / n_scalar;
        decode_into(s, q, &mut cols);
        for v in 0..n {
            available_raw(h, q, &cols, v, &mut avail);
            if avail.is_empty() {
                probs[s as usize] += p_vertex;
                continue;
            }
            let w = p_vertex / S::from_usize(avail.len()).expect("q fits the scalar");
            let base = s - (cols[v] as u64 - 1) * place[v];
            for &c in &avail {
                let target = base + (c as u64 - 1) * place[v];
                probs[target as usize] += w;
            }
        }
    }
    Ok(ExactDistribution { n, q, probs })
}

/// d_TV(π, u) where u is uniform on the proper colourings.
pub fn tv_to_uniform_proper<S: Real>(
    h: &Hypergraph,
    dist: &ExactDistribution<S>,
    budget: u64,
) -> Result<S> {
    let proper = enumerate_proper(h, dist.q(), budget)?;
    tv_to_uniform_on(dist, &proper)
}

/// d_TV(π, u) for u uniform on the given sorted state set.
fn tv_to_uniform_on<S: Real>(dist: &ExactDistribution<S>, support: &[u64]) -> Result<S> {
    if support.is_empty() {
        return Err(Error::Dimension("no proper colourings exist".into()));
    }
    let u = S::one() / S::from_usize(support.len()).expect("count fits the scalar");
    let mut next = support.iter().copied().peekable();
    let two = S::from_u8(2).expect("2");
    let terms = (0..dist.len() as u64).map(|s| {
        let target = if next.peek() == Some(&s) {
            next.next();
            u
        } else {
            S::zero()
        };
        (dist.prob(s) - target).abs()
    });
    Ok(kahan_sum(terms) / two)
}

/// TV between two distributions on the same space.
pub fn tv_distance<S: Real>(a: &ExactDistribution<S>, b: &ExactDistribution<S>) -> Result<S> {
    if a.n() != b.n() || a.q() != b.q() {
        return Err(Error::Dimension("distributions on different spaces".into()));
    }
    let two = S::from_u8(2).expect("2");
    Ok(kahan_sum(
        a.probs()
            .iter()
            .zip(b.probs())
            .map(|(&x, &y)| (x - y).abs()),
    ) / two)
}

/// The exact TV-to-stationarity series from the uniform-on-Ω start:
/// entries (t, d_TV(π_t, u)) for t = 0..=steps.
pub fn mixing_profile<S: Real>(
    h: &Hypergraph,
    q: u32,
    steps: u64,
    budget: u64,
) -> Result<Vec<(u64, S)>> {
    let proper = enumerate_proper(h, q, budget)?;
    let mut dist = ExactDistribution::<S>::uniform(h.n(), q, budget)?;
    let mut out = Vec::with_capacity(steps as usize + 1);
    out.push((0, tv_to_uniform_on(&dist, &proper)?));
    for t in 1..=steps {
        dist = transition_step_exact(h, &dist)?;
        out.push((t, tv_to_uniform_on(&dist, &proper)?));
    }
    Ok(out)
}

/// Union-find with path halving and union by size.
struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            self.parent[x as usize] = self.parent[self.parent[x as usize] as usize];
            x = self.parent[x as usize];
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
    }
}

/// Component structure of the Glauber graph Γ_Q on the proper colourings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentReport {
    /// |Q|, the number of proper colourings.
    pub num_proper: u64,
    /// Component sizes in decreasing order.
    pub sizes: Vec<u64>,
    /// Fraction of Q inside the largest component (0 when Q is empty).
    pub largest_fraction: f64,
    /// Number of isolated vertices (size-1 components).
    pub isolated: u64,
}

pub(crate) struct GammaComponents {
    pub proper: Vec<u64>,
    pub component_of: Vec<u32>,
    pub report: ComponentReport,
}

/// X ~ Y iff they differ at exactly one vertex v and Y(v) ∈ A(v, X). The
/// relation is symmetric because A(v, ·) ignores the colour at v itself.
pub(crate) fn gamma_q(h: &Hypergraph, q: u32, budget: u64) -> Result<GammaComponents> {
    let proper = enumerate_proper(h, q, budget)?;
    let rank = |s: u64| proper.binary_search(&s).ok();
    let mut uf = UnionFind::new(proper.len());
    let n = h.n();
    let mut cols = vec![0u32; n];
    let mut avail: Vec<u32> = Vec::with_capacity(q as usize);
    let mut place = vec![1u64; n.max(1)];
    for v in 1..n {
        place[v] = place[v - 1] * q as u64;
    }
    for (i, &s) in proper.iter().enumerate() {
        decode_into(s, q, &mut cols);
        for v in 0..n {
            available_raw(h, q, &cols, v, &mut avail);
            debug_assert!(
                avail.contains(&cols[v]),
                "proper state missing its own colour"
            );
            let base = s - (cols[v] as u64 - 1) * place[v];
            for &c in &avail {
                if c == cols[v] {
                    continue;
                }
                let t = base + (c as u64 - 1) * place[v];
                let j = rank(t).expect("legal move from a proper state lands on a proper state");
                uf.union(i as u32, j as u32);
            }
        }
    }
    let mut size_of_root: std::collections::HashMap<u32, u64> = std::collections::HashMap::new();
    let mut component_of = vec![0u32; proper.len()];
    for (i, slot) in component_of.iter_mut().enumerate() {
        let r = uf.find(i as u32);
        *slot = r;
        *size_of_root.entry(r).or_insert(0) += 1;
    }
    let mut sizes: Vec<u64> = size_of_root.values().copied().collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let num_proper = proper.len() as u64;
    let report = ComponentReport {
        num_proper,
        largest_fraction: sizes.first().map_or(0.0, |&s| s as f64 / num_proper as f64),
        isolated: sizes.iter().filter(|&&s| s == 1).count() as u64,
        sizes,
    };
    Ok(GammaComponents {
        proper,
        component_of,
        report,
    })
}

/// Component structure of Γ_Q.
pub fn gamma_q_components(h: &Hypergraph, q: u32, budget: u64) -> Result<ComponentReport> {
    Ok(gamma_q(h, q, budget)?.report)
}

/// Degree of one colouring in Γ_Q, computed directly (no enumeration):
/// Σ_v |A(v, X) \ {X(v)}|. Zero iff the colouring is an isolated vertex,
/// i.e. blocked.
pub fn gamma_q_degree(h: &Hypergraph, x: &Colouring) -> u64 {
    let mut avail: Vec<u32> = Vec::new();
    let cols: Vec<u32> = (0..x.len()).map(|v| x.colour(v)).collect();
    (0..h.n())
        .map(|v| {
            available_raw(h, x.q(), &cols, v, &mut avail);
            avail.iter().filter(|&&c| c != cols[v]).count() as u64
        })
        .sum()
}

/// Outcome of the stationarity validation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationarityReport {
    pub components: usize,
    /// Max |π'(s) - π(s)| over all states and all uniform-on-component
    /// starting vectors.
    pub max_deviation: f64,
    /// Max mass found outside the starting component after one step.
    pub max_leak: f64,
}

/// For every component C of Γ_Q, apply one exact step to the vector uniform
/// on C: the vector must be preserved (doubly stochastic restriction) and
/// no mass may leave C.
pub fn stationarity_check(h: &Hypergraph, q: u32, budget: u64) -> Result<StationarityReport> {
    let gamma = gamma_q(h, q, budget)?;
    let mut roots: Vec<u32> = gamma.component_of.clone();
    roots.sort_unstable();
    roots.dedup();
    let mut max_deviation = 0.0f64;
    let mut max_leak = 0.0f64;
    for root in roots.iter().copied() {
        let members: Vec<u64> = gamma
            .proper
            .iter()
            .zip(&gamma.component_of)
            .filter(|&(_, &r)| r == root)
            .map(|(&s, _)| s)
            .collect();
        let dist = ExactDistribution::<f64>::uniform_on(&members, h.n(), q, budget)?;
        let next = transition_step_exact(h, &dist)?;
        for s in 0..dist.len() as u64 {
            max_deviation = max_deviation.max((next.prob(s) - dist.prob(s)).abs());
        }
        max_leak = max_leak.max(1.0 - next.mass_on(&members));
    }
    Ok(StationarityReport {
        components: roots.len(),
        max_deviation,
        max_leak,
    })
}
