//! Instance generators: random simple hypergraphs, the (k-1)-uniform
//! blocking scaffold H1, and the blocked instances on which Glauber
//! dynamics has no moves.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::chain::available_colours_of;
use crate::error::{Error, Result};
use crate::hypergraph::{Colouring, Hypergraph};
use crate::rng::{derive_seed, substream};

/// Default attempt budget factor: a generator may propose up to
/// `factor * target` candidate edges before giving up.
pub const DEFAULT_ATTEMPT_FACTOR: u64 = 1000;

/// Default epsilon_k in the augmentation density bound
/// rho <= epsilon_k / (qm)^{k-2}.
pub const DEFAULT_EPS_K: f64 = 0.1;

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Key for an unordered vertex pair.
fn pair_key(n: usize, a: usize, b: usize) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    lo as u64 * n as u64 + hi as u64
}

/// Register all vertex pairs of `edge`; false (and no change) if any pair
/// was already taken, which is exactly a simplicity conflict.
fn claim_pairs(pairs: &mut HashSet<u64>, n: usize, edge: &[usize]) -> bool {
    for i in 0..edge.len() {
        for j in (i + 1)..edge.len() {
            if pairs.contains(&pair_key(n, edge[i], edge[j])) {
                return false;
            }
        }
    }
    for i in 0..edge.len() {
        for j in (i + 1)..edge.len() {
            pairs.insert(pair_key(n, edge[i], edge[j]));
        }
    }
    true
}

/// Rejection-sample a simple k-uniform hypergraph with exactly `target_m`
/// edges and maximum degree at most `max_deg`. Proposals are uniform k-sets
/// of the vertices still below the degree cap; a proposal is accepted iff
/// it keeps the hypergraph simple. Deterministic in `seed`.
pub fn random_simple(
    n: usize,
    k: usize,
    target_m: usize,
    max_deg: usize,
    seed: u64,
) -> Result<Hypergraph> {
    random_simple_with_budget(n, k, target_m, max_deg, seed, DEFAULT_ATTEMPT_FACTOR)
}

/// As [`random_simple`] with an explicit attempt budget factor.
pub fn random_simple_with_budget(
    n: usize,
    k: usize,
    target_m: usize,
    max_deg: usize,
    seed: u64,
    budget_factor: u64,
) -> Result<Hypergraph> {
    if k < 2 {
        return Err(Error::Range(format!("k must be at least 2, got {k}")));
    }
    // Pigeonhole feasibility: a simple hypergraph uses each vertex pair at
    // most once, and the degree cap bounds total incidences.
    if target_m as u128 * binomial(k as u64, 2) > binomial(n as u64, 2) {
        return Err(Error::FailedToGenerate {
            reason: format!(
                "{target_m} simple edges need {} vertex pairs but only {} exist",
                target_m as u128 * binomial(k as u64, 2),
                binomial(n as u64, 2)
            ),
            attempts: 0,
        });
    }
    if target_m * k > n * max_deg {
        return Err(Error::FailedToGenerate {
            reason: format!(
                "{target_m} edges need {} incidences but the degree cap allows {}",
                target_m * k,
                n * max_deg
            ),
            attempts: 0,
        });
    }

    let budget = budget_factor.saturating_mul(target_m.max(1) as u64);
    // A saturated target (every vertex at the cap) leaves nothing for pure
    // rejection to do once the leftover degree deficits cannot form a
    // k-set; when proposals stall, a few accepted edges are removed again
    // (seeded, so still deterministic) and sampling continues.
    let stall_limit: u64 = 1000;
    let backoff_edges = (2 * k).max(4);
    let mut attempts: u64 = 0;

    let mut rng = substream(seed, 0);
    let mut edges: Vec<Vec<usize>> = Vec::with_capacity(target_m);
    let mut pairs: HashSet<u64> = HashSet::new();
    let mut degree = vec![0usize; n];
    let mut alive: Vec<usize> = (0..n).collect();
    let mut stall: u64 = 0;
    let mut proposal = vec![0usize; k];

    while edges.len() < target_m {
        if alive.len() < k || stall >= stall_limit {
            stall = 0;
            if edges.is_empty() {
                return Err(Error::FailedToGenerate {
                    reason: format!("no simple edge fits below the degree cap {max_deg}"),
                    attempts,
                });
            }
            for _ in 0..backoff_edges.min(edges.len()) {
                let victim = edges.swap_remove(rng.gen_range(0..edges.len()));
                for i in 0..victim.len() {
                    for j in (i + 1)..victim.len() {
                        pairs.remove(&pair_key(n, victim[i], victim[j]));
                    }
                }
                for &v in &victim {
                    if degree[v] == max_deg {
                        alive.push(v);
                    }
                    degree[v] -= 1;
                }
            }
            continue;
        }
        if attempts >= budget {
            return Err(Error::FailedToGenerate {
                reason: format!(
                    "could not place {target_m} simple edges with max degree {max_deg}"
                ),
                attempts,
            });
        }
        attempts += 1;

        // k distinct vertices among the ones below the cap.
        let mut ok = true;
        for slot in proposal.iter_mut() {
            *slot = alive[rng.gen_range(0..alive.len())];
        }
        proposal.sort_unstable();
        for w in proposal.windows(2) {
            if w[0] == w[1] {
                ok = false;
                break;
            }
        }
        if ok {
            ok = claim_pairs(&mut pairs, n, &proposal);
        }
        if !ok {
            stall += 1;
            continue;
        }
        stall = 0;
        edges.push(proposal.clone());
        for &v in &proposal {
            degree[v] += 1;
            if degree[v] == max_deg {
                let pos = alive.iter().position(|&u| u == v).expect("v was alive");
                alive.swap_remove(pos);
            }
        }
    }
    Hypergraph::new(n, k, edges)
}

/// The (k-1)-uniform blocking scaffold: a simple hypergraph on `m` vertices
/// with exactly `q*m` edges and maximum degree at most `2 k^4 q`.
///
/// Candidate (k-1)-sets are included with the density
/// p = k^4 q / (m C(k-1,2) C(m-2,k-3)) (clamped to 1), conflicting pairs
/// are repaired greedily, the degree cap is enforced, and the survivors are
/// truncated to exactly q*m edges; a shortfall retries with fresh
/// randomness.
pub fn build_h1(m: usize, q: u32, k: usize, seed: u64) -> Result<Hypergraph> {
    if k < 3 {
        return Err(Error::Range(format!(
            "the blocking scaffold needs k >= 3, got {k}"
        )));
    }
    let s = k - 1; // edge size
    let target = q as usize * m;
    if target as u128 * binomial(s as u64, 2) > binomial(m as u64, 2) {
        return Err(Error::FailedToGenerate {
            reason: format!(
                "qm = {target} simple {s}-sets need {} vertex pairs but only {} exist",
                target as u128 * binomial(s as u64, 2),
                binomial(m as u64, 2)
            ),
            attempts: 0,
        });
    }
    let candidates = binomial(m as u64, s as u64);
    if candidates > 20_000_000 {
        return Err(Error::FailedToGenerate {
            reason: format!("candidate space of {candidates} {s}-sets is too large"),
            attempts: 0,
        });
    }

    let degree_cap = 2 * k.pow(4) * q as usize;
    let p = {
        let c1 = binomial(s as u64, 2) as f64;
        let c2 = binomial(m as u64 - 2, k as u64 - 3) as f64;
        ((k.pow(4) as f64 * f64::from(q)) / (m as f64 * c1 * c2)).min(1.0)
    };

    let retries: u64 = 1000;
    for attempt in 0..retries {
        let mut rng = substream(seed, attempt);
        let mut included: Vec<Vec<usize>> = Vec::new();
        let mut comb: Vec<usize> = (0..s).collect();
        loop {
            if p >= 1.0 || rng.gen_bool(p) {
                included.push(comb.clone());
            }
            if !next_combination(&mut comb, m) {
                break;
            }
        }
        included.shuffle(&mut rng);

        let mut pairs: HashSet<u64> = HashSet::new();
        let mut degree = vec![0usize; m];
        let mut edges: Vec<Vec<usize>> = Vec::with_capacity(target);
        for cand in included {
            if edges.len() == target {
                break;
            }
            if cand.iter().any(|&v| degree[v] >= degree_cap) {
                continue;
            }
            if !claim_pairs(&mut pairs, m, &cand) {
                continue;
            }
            for &v in &cand {
                degree[v] += 1;
            }
            edges.push(cand);
        }
        if edges.len() == target {
            return Hypergraph::new(m, s, edges);
        }
    }
    Err(Error::FailedToGenerate {
        reason: format!("could not reach qm = {target} edges at density p = {p}"),
        attempts: retries,
    })
}

/// Next lexicographic s-combination of 0..m. Returns false after the last.
fn next_combination(comb: &mut [usize], m: usize) -> bool {
    let s = comb.len();
    let mut i = s;
    while i > 0 {
        i -= 1;
        if comb[i] < m - (s - i) {
            comb[i] += 1;
            for j in (i + 1)..s {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// A hypergraph plus proper colouring with no Glauber moves: every vertex's
/// available set is exactly its own colour.
#[derive(Clone, Debug)]
pub struct BlockedInstance {
    pub hypergraph: Hypergraph,
    pub colouring: Colouring,
    /// `blocks[i]` lists the vertices of V_i; they carry colour i+1.
    pub blocks: Vec<Vec<usize>>,
    /// `h1_edges[i]` = E_i, the (k-1)-sets inside block i, in global vertex
    /// ids.
    pub h1_edges: Vec<Vec<Vec<usize>>>,
    /// `f_maps[i]` is the injection from the vertices outside block i into
    /// edge indices of E_i.
    pub f_maps: Vec<BTreeMap<usize, usize>>,
    /// Augmentation edges (at most one vertex per block), possibly empty.
    pub f2_edges: Vec<Vec<usize>>,
}

impl BlockedInstance {
    pub fn n(&self) -> usize {
        self.hypergraph.n()
    }
}

/// Build a blocked instance with q blocks of m vertices each.
///
/// Per block i an independent scaffold H_i is generated and each outside
/// vertex x gets a private edge f_i(x) in it; the hypergraph edges are
/// F_{x,i} = {x} ∪ f_i(x). Cross-block assignments can collide in the two
/// vertices {x, y}; those are repaired by reassigning within the m-edge
/// slack per block. If `augment` is given, extra edges with at most one
/// vertex per block are added with probability
/// `augment * eps_k / (qm)^{k-2}` each, rejecting any that break
/// simplicity.
pub fn blocked_instance(
    m: usize,
    q: u32,
    k: usize,
    seed: u64,
    augment: Option<f64>,
) -> Result<BlockedInstance> {
    if q < 2 {
        return Err(Error::Range(format!(
            "a blocked instance needs q >= 2, got {q}"
        )));
    }
    if let Some(a) = augment {
        if !a.is_finite() || a < 0.0 {
            return Err(Error::Range(format!(
                "augment scale must be nonnegative, got {a}"
            )));
        }
    }
    let n = q as usize * m;
    let qm = q as usize * m;

    // Independent scaffolds, one per block, shifted to global vertex ids.
    let mut h1_edges: Vec<Vec<Vec<usize>>> = Vec::with_capacity(q as usize);
    for i in 0..q as usize {
        let h1 = build_h1(m, q, k, derive_seed(seed, 1 + i as u64))?;
        let shifted: Vec<Vec<usize>> = h1
            .edges()
            .map(|e| e.iter().map(|&v| v + i * m).collect())
            .collect();
        h1_edges.push(shifted);
    }

    let block_of = |v: usize| v / m;
    let colours: Vec<u32> = (0..n).map(|v| block_of(v) as u32 + 1).collect();
    let colouring = Colouring::new(colours, q)?;

    let retries: u64 = 200;
    'retry: for attempt in 0..retries {
        let mut rng = substream(seed, 1_000_000 + attempt);

        // Random injections f_i: V \ V_i -> E_i.
        let mut f: Vec<Vec<Option<usize>>> = vec![vec![None; n]; q as usize];
        let mut used: Vec<Vec<bool>> = vec![vec![false; qm]; q as usize];
        for i in 0..q as usize {
            let mut order: Vec<usize> = (0..qm).collect();
            order.shuffle(&mut rng);
            let mut next = order.into_iter();
            for x in (0..n).filter(|&x| block_of(x) != i) {
                let e = next.next().expect("qm >= (q-1)m edges");
                f[i][x] = Some(e);
                used[i][e] = true;
            }
        }

        // F_{x,i} and F_{y,j} share {x,y} iff y ∈ f_i(x) and x ∈ f_j(y)
        // with x in block j and y in block i. Reassign f_i(x) within the
        // unused slack until no such pair remains.
        let collides =
            |f: &Vec<Vec<Option<usize>>>, h1: &[Vec<Vec<usize>>], i: usize, x: usize| -> bool {
                let j = block_of(x);
                let e = &h1[i][f[i][x].expect("assigned")];
                e.iter().any(|&y| {
                    let fy = f[j][y].expect("assigned");
                    h1[j][fy].contains(&x)
                })
            };
        let mut passes = 0usize;
        loop {
            let mut fixed_any = false;
            let mut dirty = false;
            for i in 0..q as usize {
                for x in (0..n).filter(|&x| block_of(x) != i) {
                    if !collides(&f, &h1_edges, i, x) {
                        continue;
                    }
                    dirty = true;
                    let j = block_of(x);
                    // Candidate replacement edges: unused in E_i and not
                    // poisoned (no vertex y' with x ∈ f_j(y')).
                    let mut pool: Vec<usize> = (0..qm).filter(|&e| !used[i][e]).collect();
                    pool.shuffle(&mut rng);
                    let mut replaced = false;
                    for e in pool {
                        let clean = h1_edges[i][e].iter().all(|&y| {
                            let fy = f[j][y].expect("assigned");
                            !h1_edges[j][fy].contains(&x)
                        });
                        if clean {
                            used[i][f[i][x].unwrap()] = false;
                            f[i][x] = Some(e);
                            used[i][e] = true;
                            replaced = true;
                            fixed_any = true;
                            break;
                        }
                    }
                    if !replaced {
                        continue 'retry;
                    }
                }
            }
            if !dirty {
                break;
            }
            passes += 1;
            if !fixed_any || passes > 4 * qm {
                continue 'retry;
            }
        }

        // Assemble the blocking edges.
        let mut edges: Vec<Vec<usize>> = Vec::with_capacity((q as usize - 1) * n);
        for i in 0..q as usize {
            for x in (0..n).filter(|&x| block_of(x) != i) {
                let mut edge = h1_edges[i][f[i][x].unwrap()].clone();
                edge.push(x);
                edge.sort_unstable();
                edges.push(edge);
            }
        }

        // Optional augmentation with cross-block edges.
        let mut f2_edges: Vec<Vec<usize>> = Vec::new();
        if let Some(scale) = augment {
            let rho = (scale * DEFAULT_EPS_K / (qm as f64).powi(k as i32 - 2)).clamp(0.0, 1.0);
            if (q as usize) >= k && rho > 0.0 {
                let count = binomial(q as u64, k as u64).saturating_mul((m as u128).pow(k as u32));
                if count > 20_000_000 {
                    return Err(Error::FailedToGenerate {
                        reason: format!("augmentation candidate space of {count} is too large"),
                        attempts: 0,
                    });
                }
                let mut pairs: HashSet<u64> = HashSet::new();
                for e in &edges {
                    let ok = claim_pairs(&mut pairs, n, e);
                    debug_assert!(ok, "blocking edges must be simple already");
                }
                let mut blocks_comb: Vec<usize> = (0..k).collect();
                loop {
                    // Odometer over one vertex per chosen block.
                    let mut pick = vec![0usize; k];
                    loop {
                        if rng.gen_bool(rho) {
                            let mut edge: Vec<usize> = blocks_comb
                                .iter()
                                .zip(&pick)
                                .map(|(&b, &v)| b * m + v)
                                .collect();
                            edge.sort_unstable();
                            if claim_pairs(&mut pairs, n, &edge) {
                                f2_edges.push(edge);
                            }
                        }
                        let mut pos = k;
                        loop {
                            if pos == 0 {
                                break;
                            }
                            pos -= 1;
                            pick[pos] += 1;
                            if pick[pos] < m {
                                break;
                            }
                            pick[pos] = 0;
                        }
                        if pick.iter().all(|&v| v == 0) {
                            break;
                        }
                    }
                    if !next_combination(&mut blocks_comb, q as usize) {
                        break;
                    }
                }
            }
        }

        let mut all_edges = edges.clone();
        all_edges.extend(f2_edges.iter().cloned());
        let hypergraph = Hypergraph::new(n, k, all_edges)?;

        // Validate: simple, proper, and every vertex frozen.
        if !hypergraph.validate_simple().is_simple {
            continue 'retry;
        }
        if !hypergraph.is_proper(&colouring) {
            continue 'retry;
        }
        let frozen = (0..n)
            .all(|v| available_colours_of(&hypergraph, &colouring, v) == vec![colouring.colour(v)]);
        if !frozen {
            continue 'retry;
        }

        let blocks = (0..q as usize)
            .map(|i| (i * m..(i + 1) * m).collect())
            .collect();
        let f_maps = (0..q as usize)
            .map(|i| {
                (0..n)
                    .filter(|&x| block_of(x) != i)
                    .map(|x| (x, f[i][x].unwrap()))
                    .collect()
            })
            .collect();
        return Ok(BlockedInstance {
            hypergraph,
            colouring,
            blocks,
            h1_edges,
            f_maps,
            f2_edges,
        });
    }
    Err(Error::FailedToGenerate {
        reason: "cross-block repair exhausted its slack".into(),
        attempts: retries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_simple_smallest_instance() {
        // Only one 3-set exists on 3 vertices.
        let h = random_simple(3, 3, 1, 1, 99).unwrap();
        assert_eq!(h.num_edges(), 1);
        assert_eq!(h.edge(0), &[0, 1, 2]);
    }

    #[test]
    fn random_simple_infeasible_by_pigeonhole() {
        // Any two 3-sets in [4] share at least 2 vertices.
        let err = random_simple(4, 3, 4, 3, 0).unwrap_err();
        assert!(matches!(err, Error::FailedToGenerate { .. }));
    }

    #[test]
    fn random_simple_postvalidates() {
        let h = random_simple(40, 3, 60, 8, 1).unwrap();
        assert_eq!(h.num_edges(), 60);
        assert!(h.max_degree() <= 8);
        assert!(h.validate_simple().is_simple);
    }

    #[test]
    fn random_simple_exactly_regular_cap() {
        // 20 edges of size 2 on 10 vertices with cap 4: every vertex ends
        // at degree exactly 4, which exercises the endgame restarts.
        let h = random_simple(10, 2, 20, 4, 3).unwrap();
        assert_eq!(h.num_edges(), 20);
        assert!((0..10).all(|v| h.degree(v) == 4));
    }

    #[test]
    fn random_simple_is_deterministic() {
        let a = random_simple(30, 3, 40, 6, 5).unwrap();
        let b = random_simple(30, 3, 40, 6, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn build_h1_k3_m7_is_complete_graph() {
        // qm = 21 = C(7,2): the only simple 2-uniform hypergraph with 21
        // edges on 7 vertices is K7.
        for seed in [0u64, 1, 17] {
            let h = build_h1(7, 3, 3, seed).unwrap();
            assert_eq!((h.n(), h.k(), h.num_edges()), (7, 2, 21));
            assert!(h.validate_simple().is_simple);
            assert!(h.max_degree() <= 2 * 81 * 3);
            assert_eq!(h.max_degree(), 6);
        }
    }

    #[test]
    fn build_h1_k4() {
        let h = build_h1(20, 2, 4, 1).unwrap();
        assert_eq!((h.n(), h.k(), h.num_edges()), (20, 3, 40));
        assert!(h.validate_simple().is_simple);
        assert!(h.max_degree() <= 2 * 256 * 2);
    }

    #[test]
    fn build_h1_infeasible() {
        // qm = 12 > C(4,2) = 6.
        assert!(matches!(
            build_h1(4, 3, 3, 0),
            Err(Error::FailedToGenerate { .. })
        ));
    }

    #[test]
    fn blocked_instance_m7_q3_k3() {
        let b = blocked_instance(7, 3, 3, 1, None).unwrap();
        assert_eq!(b.n(), 21);
        assert_eq!(b.hypergraph.num_edges(), 42);
        assert!(b.hypergraph.validate_simple().is_simple);
        assert!(b.hypergraph.is_proper(&b.colouring));
        for v in 0..21 {
            assert_eq!(b.colouring.colour(v), (v / 7) as u32 + 1);
            assert_eq!(
                available_colours_of(&b.hypergraph, &b.colouring, v),
                vec![b.colouring.colour(v)],
                "vertex {v} is not frozen"
            );
        }
        // f_i injective.
        for fi in &b.f_maps {
            let mut seen = HashSet::new();
            for &e in fi.values() {
                assert!(seen.insert(e));
            }
            assert_eq!(fi.len(), 14);
        }
    }

    #[test]
    fn blocked_instance_augmented_stays_blocked() {
        let b = blocked_instance(7, 3, 3, 2, Some(1.0)).unwrap();
        assert!(b.hypergraph.validate_simple().is_simple);
        assert!(b.hypergraph.is_proper(&b.colouring));
        for v in 0..b.n() {
            assert_eq!(
                available_colours_of(&b.hypergraph, &b.colouring, v),
                vec![b.colouring.colour(v)]
            );
        }
        for e in &b.f2_edges {
            let mut blocks: Vec<usize> = e.iter().map(|&v| v / 7).collect();
            blocks.dedup();
            assert_eq!(
                blocks.len(),
                e.len(),
                "F2 edge with two vertices in one block"
            );
        }
    }

    #[test]
    fn blocked_instance_is_deterministic() {
        let a = blocked_instance(7, 3, 3, 9, Some(1.0)).unwrap();
        let b = blocked_instance(7, 3, 3, 9, Some(1.0)).unwrap();
        assert_eq!(a.hypergraph, b.hypergraph);
        assert_eq!(a.colouring, b.colouring);
        assert_eq!(a.f2_edges, b.f2_edges);
    }

    #[test]
    fn next_combination_walks_lexicographically() {
        let mut c = vec![0, 1];
        let mut seen = vec![c.clone()];
        while next_combination(&mut c, 4) {
            seen.push(c.clone());
        }
        assert_eq!(
            seen,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }
}
