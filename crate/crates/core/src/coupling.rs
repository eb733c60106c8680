//! Two chains driven jointly: shared vertex choice, maximally coupled
//! colour choice, and the exact one-step Hamming expectation.
//!
//! The colour coupling is the standard overlap/residual construction. With
//! available sets A_X, A_Y and mmax = max(|A_X|, |A_Y|), both chains draw
//! the same colour, uniform on the intersection, with probability
//! |A_X ∩ A_Y| / mmax; otherwise each draws from its residual measure. The
//! residuals have integer weights in units of 1/(|A| · mmax): a colour in
//! the intersection weighs mmax - |A|, one outside weighs mmax. Each
//! marginal is exactly uniform on its own available set.

use std::sync::Arc;

use rand::Rng as _;

use crate::chain::{ChainState, Start};
use crate::error::{Error, Result};
use crate::hypergraph::{hamming, Hypergraph};
use crate::rng::{substream, Rng};
use crate::scalar::Weight;

/// One coupled step, as observed from outside.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoupledStepRecord {
    pub t: u64,
    pub vertex: usize,
    pub available_x: usize,
    pub available_y: usize,
    /// Whether the chains agree at the chosen vertex after the step.
    pub agreed: bool,
    /// Hamming distance after the step.
    pub hamming: usize,
}

/// Outcome of a coalescence run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoalescenceResult {
    Coalesced {
        time: u64,
    },
    Timeout {
        max_steps: u64,
        final_hamming: usize,
    },
}

impl CoalescenceResult {
    pub fn time(&self) -> Option<u64> {
        match *self {
            CoalescenceResult::Coalesced { time } => Some(time),
            CoalescenceResult::Timeout { .. } => None,
        }
    }
}

/// A pair of chains on the same hypergraph and colour set, advanced with
/// the Jerrum-style coupling. The shared stream drives the vertex choice
/// and the overlap branch; each chain's own RNG drives its residual draws.
#[derive(Clone, Debug)]
pub struct CoupledChains {
    x: ChainState,
    y: ChainState,
    shared: Rng,
    hamming: usize,
    t: u64,
}

impl CoupledChains {
    /// Couple two freshly initialised chains. Stream 0 of `seed_shared`
    /// becomes the shared randomness.
    pub fn new(x: ChainState, y: ChainState, seed_shared: u64) -> Result<Self> {
        if x.hypergraph() != y.hypergraph() {
            return Err(Error::Dimension("chains on different hypergraphs".into()));
        }
        if x.q() != y.q() {
            return Err(Error::Dimension(format!(
                "chains with q = {} and q = {}",
                x.q(),
                y.q()
            )));
        }
        let hamming = hamming(x.colouring(), y.colouring())?;
        Ok(Self {
            x,
            y,
            shared: substream(seed_shared, 0),
            hamming,
            t: 0,
        })
    }

    pub fn x(&self) -> &ChainState {
        &self.x
    }

    pub fn y(&self) -> &ChainState {
        &self.y
    }

    pub fn hamming(&self) -> usize {
        self.hamming
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Advance both chains by one coupled step.
    pub fn step(&mut self) -> CoupledStepRecord {
        let v = self.shared.gen_range(0..self.x.hypergraph().n());
        let ax = self.x.available_colours(v);
        let ay = self.y.available_colours(v);
        let (cx, cy) = couple_colours(
            &ax,
            &ay,
            &mut self.shared,
            self.x.rng_mut(),
            self.y.rng_mut(),
        );

        let before_equal = self.x.colouring().colour(v) == self.y.colouring().colour(v);
        if let Some(c) = cx {
            self.x.set_colour(v, c);
        }
        if let Some(c) = cy {
            self.y.set_colour(v, c);
        }
        let after_equal = self.x.colouring().colour(v) == self.y.colouring().colour(v);
        match (before_equal, after_equal) {
            (true, false) => self.hamming += 1,
            (false, true) => self.hamming -= 1,
            _ => {}
        }
        let t = self.t;
        self.t += 1;
        self.x.bump_t();
        self.y.bump_t();
        CoupledStepRecord {
            t,
            vertex: v,
            available_x: ax.len(),
            available_y: ay.len(),
            agreed: after_equal,
            hamming: self.hamming,
        }
    }

    /// Step until the chains agree everywhere or `max_steps` is reached.
    pub fn run_until_coalesced(&mut self, max_steps: u64) -> CoalescenceResult {
        for _ in 0..max_steps {
            if self.hamming == 0 {
                break;
            }
            self.step();
        }
        if self.hamming == 0 {
            assert_eq!(
                self.x.colouring(),
                self.y.colouring(),
                "hamming counter reached 0 on unequal colourings"
            );
            CoalescenceResult::Coalesced { time: self.t }
        } else {
            CoalescenceResult::Timeout {
                max_steps,
                final_hamming: self.hamming,
            }
        }
    }
}

/// Draw a maximally coupled pair of colours for available sets `ax`, `ay`
/// (both sorted). `None` means the corresponding chain self-loops (its
/// available set was empty). When exactly one set is empty the other
/// chain's uniform draw comes from the shared stream.
pub fn couple_colours(
    ax: &[u32],
    ay: &[u32],
    shared: &mut impl rand::Rng,
    residual_x: &mut impl rand::Rng,
    residual_y: &mut impl rand::Rng,
) -> (Option<u32>, Option<u32>) {
    match (ax.is_empty(), ay.is_empty()) {
        (true, true) => (None, None),
        (true, false) => (None, Some(ay[shared.gen_range(0..ay.len())])),
        (false, true) => (Some(ax[shared.gen_range(0..ax.len())]), None),
        (false, false) => {
            let inter = sorted_intersection(ax, ay);
            let mmax = ax.len().max(ay.len());
            let j = shared.gen_range(0..mmax);
            if j < inter.len() {
                (Some(inter[j]), Some(inter[j]))
            } else {
                let cx = residual_draw(ax, &inter, mmax, residual_x);
                let cy = residual_draw(ay, &inter, mmax, residual_y);
                (Some(cx), Some(cy))
            }
        }
    }
}

fn sorted_intersection(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Sample from the residual measure of a uniform-on-`set` marginal after
/// removing the overlap measure. Integer weights: mmax - |set| inside the
/// intersection, mmax outside.
fn residual_draw(set: &[u32], inter: &[u32], mmax: usize, rng: &mut impl rand::Rng) -> u32 {
    let own = set.len();
    let total = own * (mmax - inter.len());
    debug_assert!(total > 0, "residual branch taken with empty residual");
    let mut r = rng.gen_range(0..total);
    for &c in set {
        let w = if inter.binary_search(&c).is_ok() {
            mmax - own
        } else {
            mmax
        };
        if r < w {
            return c;
        }
        r -= w;
    }
    unreachable!("residual weights sum to the drawn range")
}

/// E[h(X_{t+1}, Y_{t+1}) | X_t, Y_t] under the coupling, by enumerating all
/// n vertex choices and the joint colour law at each. No sampling. With a
/// rational scalar the value is exact.
pub fn expected_hamming_one_step<S: Weight>(x: &ChainState, y: &ChainState) -> Result<S> {
    if x.hypergraph() != y.hypergraph() {
        return Err(Error::Dimension("chains on different hypergraphs".into()));
    }
    if x.q() != y.q() {
        return Err(Error::Dimension(format!(
            "chains with q = {} and q = {}",
            x.q(),
            y.q()
        )));
    }
    let n = x.hypergraph().n();
    let h = hamming(x.colouring(), y.colouring())?;

    // Choosing v resamples only position v, so
    //   E[h'] = (1/n) Σ_v (h - [X(v) != Y(v)] + P(X'(v) != Y'(v)))
    //         = h (1 - 1/n) + (1/n) Σ_v P_diff(v).
    let mut sum_pdiff = S::zero();
    for v in 0..n {
        let ax = x.available_colours(v);
        let ay = y.available_colours(v);
        let p_same: S = match (ax.is_empty(), ay.is_empty()) {
            (true, true) => {
                if x.colouring().colour(v) == y.colouring().colour(v) {
                    S::one()
                } else {
                    S::zero()
                }
            }
            // A self-looping chain keeps its colour; the other draws
            // uniformly, hitting it with probability [colour in A] / |A|.
            (true, false) => {
                let hit = ay.binary_search(&x.colouring().colour(v)).is_ok();
                S::ratio(hit as usize, ay.len())
            }
            (false, true) => {
                let hit = ax.binary_search(&y.colouring().colour(v)).is_ok();
                S::ratio(hit as usize, ax.len())
            }
            // Under the maximal coupling the residual supports are
            // disjoint, so agreement happens exactly on the overlap branch.
            (false, false) => {
                let inter = sorted_intersection(&ax, &ay).len();
                S::ratio(inter, ax.len().max(ay.len()))
            }
        };
        sum_pdiff = sum_pdiff + (S::one() - p_same);
    }
    let h_s = S::from_usize(h).expect("hamming distance representable");
    let n_s = S::from_usize(n).expect("vertex count representable");
    Ok(h_s.clone() - (h_s - sum_pdiff) / n_s)
}

/// Run a coupled pair from two (usually uniform-random) starts until the
/// chains agree, or report a timeout. Each chain's own stream (stream 0 of
/// its seed) draws its start and then its residual colours; stream 0 of
/// `seed_shared` drives the shared choices. Once coalesced the chains stay
/// identical, so the coalescence time is also the time the pair first
/// agrees forever.
#[allow(clippy::too_many_arguments)]
pub fn coalescence_run(
    h: Arc<Hypergraph>,
    q: u32,
    start_x: Start,
    start_y: Start,
    seed_x: u64,
    seed_y: u64,
    seed_shared: u64,
    max_steps: u64,
) -> Result<CoalescenceResult> {
    let x = ChainState::new(Arc::clone(&h), q, start_x, seed_x)?;
    let y = ChainState::new(h, q, start_y, seed_y)?;
    let mut pair = CoupledChains::new(x, y, seed_shared)?;
    Ok(pair.run_until_coalesced(max_steps))
}
