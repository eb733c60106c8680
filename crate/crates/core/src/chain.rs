//! The Glauber dynamics chain with incremental per-edge bookkeeping.
//!
//! One step picks a vertex v uniformly at random, then recolours it with a
//! colour drawn uniformly from the available set A(v, X) = Q \ B(v, X),
//! where B(v, X) holds the colours c for which some edge through v has all
//! of its other vertices coloured c. The per-edge colour-count tables make a
//! step O(deg v · k + q) instead of O(deg v · k + n).

use std::sync::Arc;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::hypergraph::{Colouring, Hypergraph};
use crate::rng::{substream, Rng};

/// Colour multiset of one edge, kept as (colour, count) entries sorted by
/// colour. At most k entries; the number of entries is the edge's distinct
/// colour count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct EdgeCounts {
    entries: Vec<(u32, u32)>,
}

impl EdgeCounts {
    fn from_edge(edge: &[usize], x: &Colouring) -> Self {
        let mut t = Self {
            entries: Vec::with_capacity(edge.len()),
        };
        for &v in edge {
            t.increment(x.colour(v));
        }
        t
    }

    fn increment(&mut self, c: u32) {
        match self.entries.binary_search_by_key(&c, |&(col, _)| col) {
            Ok(i) => self.entries[i].1 += 1,
            Err(i) => self.entries.insert(i, (c, 1)),
        }
    }

    fn decrement(&mut self, c: u32) {
        let i = self
            .entries
            .binary_search_by_key(&c, |&(col, _)| col)
            .expect("decrement of absent colour");
        self.entries[i].1 -= 1;
        if self.entries[i].1 == 0 {
            self.entries.remove(i);
        }
    }

    pub(crate) fn count(&self, c: u32) -> u32 {
        self.entries
            .binary_search_by_key(&c, |&(col, _)| col)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    pub(crate) fn distinct(&self) -> usize {
        self.entries.len()
    }

    /// The colour c with count(c) - [own = c] = k - 1, i.e. the colour that
    /// the edge minus one vertex of colour `own` is mono-coloured with.
    /// Unique when it exists: two such colours would need 2(k-1) <= k.
    fn mono_excluding(&self, own: u32, k: usize) -> Option<u32> {
        let want = (k - 1) as u32;
        for &(c, cnt) in &self.entries {
            let adjusted = if c == own { cnt - 1 } else { cnt };
            if adjusted == want {
                return Some(c);
            }
        }
        None
    }
}

/// How to initialise the chain.
#[derive(Clone, Debug)]
pub enum Start {
    Colouring(Colouring),
    UniformRandom,
}

/// One chain step, as observed from outside.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepRecord {
    /// Time before the step (the step takes X_t to X_{t+1}).
    pub t: u64,
    pub vertex: usize,
    /// |A(v, X_t)|; 0 means the step was a forced self-loop.
    pub available: usize,
    pub old_colour: u32,
    pub new_colour: u32,
}

/// Aggregate counts from a run of consecutive steps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub steps: u64,
    /// Steps that actually changed a colour.
    pub changed: u64,
    /// Steps whose available set was empty (forced self-loops).
    pub empty_available: u64,
    /// (t, proper?) pairs recorded at the requested interval.
    pub proper_at: Vec<(u64, bool)>,
}

/// Glauber chain state: a colouring plus per-edge colour-count tables, a
/// mono-edge counter (so properness is O(1)) and the chain's own RNG.
#[derive(Clone, Debug)]
pub struct ChainState {
    h: Arc<Hypergraph>,
    colouring: Colouring,
    edge_counts: Vec<EdgeCounts>,
    mono_edges: usize,
    rng: Rng,
    t: u64,
}

impl ChainState {
    /// Initialise with a given colouring or a uniform-random one drawn from
    /// stream 0 of `seed`. The same stream then drives the steps.
    pub fn new(h: Arc<Hypergraph>, q: u32, start: Start, seed: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::Range(format!("q must be at least 2, got {q}")));
        }
        let mut rng = substream(seed, 0);
        let colouring = match start {
            Start::Colouring(x) => {
                if x.len() != h.n() {
                    return Err(Error::Dimension(format!(
                        "colouring of length {} on hypergraph with n = {}",
                        x.len(),
                        h.n()
                    )));
                }
                if x.q() != q {
                    return Err(Error::Dimension(format!(
                        "colouring with q = {} but chain q = {q}",
                        x.q()
                    )));
                }
                x
            }
            Start::UniformRandom => Colouring::uniform_random(h.n(), q, &mut rng),
        };
        let edge_counts: Vec<EdgeCounts> = (0..h.num_edges())
            .map(|e| EdgeCounts::from_edge(h.edge(e), &colouring))
            .collect();
        let mono_edges = edge_counts.iter().filter(|t| t.distinct() == 1).count();
        Ok(Self {
            h,
            colouring,
            edge_counts,
            mono_edges,
            rng,
            t: 0,
        })
    }

    pub fn hypergraph(&self) -> &Hypergraph {
        &self.h
    }

    pub fn hypergraph_arc(&self) -> Arc<Hypergraph> {
        Arc::clone(&self.h)
    }

    pub fn q(&self) -> u32 {
        self.colouring.q()
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn colouring(&self) -> &Colouring {
        &self.colouring
    }

    /// O(1): no edge is mono-coloured.
    pub fn is_proper(&self) -> bool {
        self.mono_edges == 0
    }

    /// The chain's own randomness, lent out to the coupling for residual
    /// colour draws.
    pub(crate) fn rng_mut(&mut self) -> &mut Rng {
        &mut self.rng
    }

    /// Advance the step counter without moving; used by the coupled driver,
    /// which performs the recolourings itself.
    pub(crate) fn bump_t(&mut self) {
        self.t += 1;
    }

    /// Number of distinct colours on edge `e`, from the count tables.
    pub fn edge_distinct(&self, e: usize) -> usize {
        self.edge_counts[e].distinct()
    }

    /// Multiplicity of colour `c` on edge `e`, from the count tables.
    pub fn edge_colour_count(&self, e: usize, c: u32) -> u32 {
        self.edge_counts[e].count(c)
    }

    /// B(v, X): sorted distinct colours blocked at `v`. O(deg v).
    pub fn blocked_colours(&self, v: usize) -> Vec<u32> {
        let k = self.h.k();
        let own = self.colouring.colour(v);
        let mut blocked: Vec<u32> = self
            .h
            .incident_edges(v)
            .iter()
            .filter_map(|&e| self.edge_counts[e].mono_excluding(own, k))
            .collect();
        blocked.sort_unstable();
        blocked.dedup();
        blocked
    }

    /// A(v, X) = {1..q} \ B(v, X), sorted. May be empty.
    pub fn available_colours(&self, v: usize) -> Vec<u32> {
        let blocked = self.blocked_colours(v);
        let mut avail = Vec::with_capacity(self.q() as usize - blocked.len());
        let mut it = blocked.iter().peekable();
        for c in 1..=self.q() {
            if it.peek() == Some(&&c) {
                it.next();
            } else {
                avail.push(c);
            }
        }
        avail
    }

    /// Arbitrary recolouring that keeps the bookkeeping consistent. Not a
    /// chain move; does not advance t.
    pub fn set_colour(&mut self, v: usize, c: u32) {
        let old = self.colouring.colour(v);
        if old == c {
            return;
        }
        for &e in self.h.incident_edges(v) {
            let table = &mut self.edge_counts[e];
            let was_mono = table.distinct() == 1;
            table.decrement(old);
            table.increment(c);
            let is_mono = table.distinct() == 1;
            match (was_mono, is_mono) {
                (true, false) => self.mono_edges -= 1,
                (false, true) => self.mono_edges += 1,
                _ => {}
            }
        }
        self.colouring.set_colour(v, c);
    }

    /// One Glauber step. Picks v uniformly, then a colour uniformly from
    /// A(v, X_t); an empty available set is a self-loop. Consumes one RNG
    /// draw for the vertex and, if the available set is nonempty, one more
    /// for the colour.
    pub fn step(&mut self) -> StepRecord {
        let v = self.rng.gen_range(0..self.h.n());
        let blocked = self.blocked_colours(v);
        let available = self.q() as usize - blocked.len();
        let old_colour = self.colouring.colour(v);
        let t = self.t;
        self.t += 1;
        if available == 0 {
            return StepRecord {
                t,
                vertex: v,
                available: 0,
                old_colour,
                new_colour: old_colour,
            };
        }
        let idx = self.rng.gen_range(0..available);
        let new_colour = nth_absent(&blocked, idx);
        self.set_colour(v, new_colour);
        StepRecord {
            t,
            vertex: v,
            available,
            old_colour,
            new_colour,
        }
    }

    /// Apply `steps` Glauber steps.
    pub fn run(&mut self, steps: u64) -> RunSummary {
        self.run_with_checkpoints(steps, 0)
    }

    /// As [`run`](Self::run), recording (t, proper?) every
    /// `checkpoint_every` steps (0 disables; the final state is always
    /// recorded when checkpoints are on).
    pub fn run_with_checkpoints(&mut self, steps: u64, checkpoint_every: u64) -> RunSummary {
        let mut summary = RunSummary {
            steps,
            ..Default::default()
        };
        for i in 0..steps {
            let rec = self.step();
            if rec.available == 0 {
                summary.empty_available += 1;
            }
            if rec.new_colour != rec.old_colour {
                summary.changed += 1;
            }
            if checkpoint_every > 0 && ((i + 1) % checkpoint_every == 0 || i + 1 == steps) {
                summary.proper_at.push((self.t, self.is_proper()));
            }
        }
        summary
    }
}

/// The idx-th (0-based) value of `1..` that is not in the sorted list
/// `absent`.
fn nth_absent(absent: &[u32], idx: usize) -> u32 {
    let mut c = idx as u32 + 1;
    for &b in absent {
        if b <= c {
            c += 1;
        } else {
            break;
        }
    }
    c
}

/// B(v, X) computed from scratch, without count tables. Used by generators
/// and as the independent oracle for the bookkeeping path.
pub fn blocked_colours_of(h: &Hypergraph, x: &Colouring, v: usize) -> Vec<u32> {
    let mut blocked: Vec<u32> = h
        .incident_edges(v)
        .iter()
        .filter_map(|&e| {
            let mut others = h.edge(e).iter().filter(|&&u| u != v);
            let first = x.colour(*others.next()?);
            others.all(|&u| x.colour(u) == first).then_some(first)
        })
        .collect();
    blocked.sort_unstable();
    blocked.dedup();
    blocked
}

/// A(v, X) computed from scratch.
pub fn available_colours_of(h: &Hypergraph, x: &Colouring, v: usize) -> Vec<u32> {
    let blocked = blocked_colours_of(h, x, v);
    (1..=x.q()).filter(|c| !blocked.contains(c)).collect()
}
