//! Cross-module invariants, mostly as property tests over small random
//! instances.

use std::sync::Arc;

use proptest::prelude::*;
use rand::Rng as _;

use hyperglauber::chain::{available_colours_of, blocked_colours_of, ChainState, Start};
use hyperglauber::diagnostics::{y_counts, y_counts_scratch};
use hyperglauber::generate::random_simple;
use hyperglauber::hypergraph::{hamming, Colouring, Hypergraph};
use hyperglauber::io;
use hyperglauber::oracle::{self, decode, ExactDistribution, DEFAULT_STATE_BUDGET};
use hyperglauber::rng::substream;

/// Small instances where everything stays enumerable.
fn small_instance() -> impl Strategy<Value = (Hypergraph, u32)> {
    (5usize..=9, 2usize..=3, 1usize..=6, 2u32..=3, 0u64..1000)
        .prop_filter_map("feasible generator parameters", |(n, k, m, q, seed)| {
            random_simple(n, k, m, n, seed).ok().map(|h| (h, q))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bookkeeping_matches_scratch_after_random_recolourings((h, q) in small_instance(), seed in 0u64..1000) {
        let h = Arc::new(h);
        let mut state = ChainState::new(Arc::clone(&h), q, Start::UniformRandom, seed).unwrap();
        let mut rng = substream(seed ^ 0xabcd, 1);
        for _ in 0..100 {
            let v = rng.gen_range(0..h.n());
            let c = rng.gen_range(1..=q);
            state.set_colour(v, c);
        }
        for v in 0..h.n() {
            prop_assert_eq!(
                state.blocked_colours(v),
                blocked_colours_of(&h, state.colouring(), v)
            );
            prop_assert_eq!(y_counts(&state, v), y_counts_scratch(&h, state.colouring(), v));
            let deg = h.degree(v) as u64;
            prop_assert_eq!(y_counts(&state, v).iter().sum::<u64>(), deg);
        }
        let scratch = ChainState::new(Arc::clone(&h), q, Start::Colouring(state.colouring().clone()), 0).unwrap();
        prop_assert_eq!(state.is_proper(), scratch.is_proper());
    }

    #[test]
    fn blocked_set_ignores_own_colour((h, q) in small_instance(), seed in 0u64..1000) {
        let h = Arc::new(h);
        let mut state = ChainState::new(Arc::clone(&h), q, Start::UniformRandom, seed).unwrap();
        for v in 0..h.n() {
            let before = state.blocked_colours(v);
            for c in 1..=q {
                state.set_colour(v, c);
                prop_assert_eq!(&state.blocked_colours(v), &before);
            }
        }
    }

    #[test]
    fn properness_is_absorbing((h, q) in small_instance()) {
        // Exhaustive over proper states (capped) and all legal moves.
        let states = oracle::enumerate_proper(&h, q, DEFAULT_STATE_BUDGET).unwrap();
        for &s in states.iter().take(200) {
            let x = decode(s, h.n(), q);
            for v in 0..h.n() {
                for c in available_colours_of(&h, &x, v) {
                    let mut y = x.clone();
                    y.set_colour(v, c);
                    prop_assert!(h.is_proper(&y), "move v={} c={} left properness", v, c);
                }
            }
        }
    }

    #[test]
    fn reversibility_on_proper_states((h, q) in small_instance()) {
        // For proper X and Y differing only at v with Y(v) available, the
        // available sets (hence the transition probabilities 1/(n|A|))
        // agree in both directions.
        let states = oracle::enumerate_proper(&h, q, DEFAULT_STATE_BUDGET).unwrap();
        for &s in states.iter().take(100) {
            let x = decode(s, h.n(), q);
            for v in 0..h.n() {
                let ax = available_colours_of(&h, &x, v);
                for &c in &ax {
                    if c == x.colour(v) {
                        continue;
                    }
                    let mut y = x.clone();
                    y.set_colour(v, c);
                    let ay = available_colours_of(&h, &y, v);
                    prop_assert_eq!(&ax, &ay);
                    prop_assert!(ay.contains(&x.colour(v)));
                }
            }
        }
    }

    #[test]
    fn exact_step_conserves_and_never_loses_proper_mass((h, q) in small_instance(), seed in 0u64..100) {
        // Random start distribution, a few steps: total mass 1 within
        // 1e-12, mass on proper states nondecreasing.
        let states = oracle::check_budget(h.n(), q, DEFAULT_STATE_BUDGET).unwrap();
        let mut rng = substream(seed, 2);
        let raw: Vec<f64> = (0..states).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mut current =
            ExactDistribution::<f64>::from_weights(h.n(), q, &raw, DEFAULT_STATE_BUDGET).unwrap();
        let proper = oracle::enumerate_proper(&h, q, DEFAULT_STATE_BUDGET).unwrap();
        let mut proper_mass = current.mass_on(&proper);
        for _ in 0..4 {
            current = oracle::transition_step_exact(&h, &current).unwrap();
            prop_assert!((current.total_mass() - 1.0).abs() < 1e-12);
            let next_mass = current.mass_on(&proper);
            prop_assert!(next_mass >= proper_mass - 1e-13);
            proper_mass = next_mass;
        }
    }

    #[test]
    fn proper_count_matches_inclusion_exclusion((h, q) in small_instance()) {
        let direct = oracle::count_proper(&h, q, DEFAULT_STATE_BUDGET).unwrap();
        prop_assert_eq!(direct, inclusion_exclusion_proper_count(&h, q));
    }

    #[test]
    fn hypergraph_io_roundtrip((h, q) in small_instance(), seed in 0u64..1000) {
        let mut buf = Vec::new();
        io::write_hypergraph(&h, &mut buf).unwrap();
        let back = io::read_hypergraph(buf.as_slice()).unwrap();
        prop_assert_eq!(&back, &h);

        let x = Colouring::uniform_random(h.n(), q, &mut substream(seed, 3));
        let mut buf = Vec::new();
        io::write_colouring(&x, &mut buf).unwrap();
        prop_assert_eq!(io::read_colouring(buf.as_slice()).unwrap(), x);
    }

    #[test]
    fn chain_trajectories_deterministic((h, q) in small_instance(), seed in 0u64..1000) {
        let h = Arc::new(h);
        let mut a = ChainState::new(Arc::clone(&h), q, Start::UniformRandom, seed).unwrap();
        let mut b = ChainState::new(Arc::clone(&h), q, Start::UniformRandom, seed).unwrap();
        for _ in 0..50 {
            prop_assert_eq!(a.step(), b.step());
        }
        prop_assert_eq!(a.colouring(), b.colouring());
    }
}

/// Proper-colouring count by inclusion-exclusion over mono-coloured edge
/// subsets: Σ_S (−1)^{|S|} q^{c(S)}, where c(S) counts the classes after
/// merging each edge of S. Independent of the enumeration path.
fn inclusion_exclusion_proper_count(h: &Hypergraph, q: u32) -> u64 {
    let m = h.num_edges();
    assert!(m <= 16, "subset enumeration only for tiny instances");
    let mut total: i128 = 0;
    for mask in 0u32..(1 << m) {
        let mut parent: Vec<usize> = (0..h.n()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in 0..m {
            if mask & (1 << e) != 0 {
                let verts = h.edge(e);
                let root = find(&mut parent, verts[0]);
                for &v in &verts[1..] {
                    let r = find(&mut parent, v);
                    parent[r] = root;
                }
            }
        }
        let mut classes = 0u32;
        for v in 0..h.n() {
            if find(&mut parent, v) == v {
                classes += 1;
            }
        }
        let term = (q as i128).pow(classes);
        if mask.count_ones() % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    u64::try_from(total).expect("count is nonnegative")
}

#[test]
fn sampler_matches_oracle_within_soft_bound() {
    // Module invariant: empirical endpoint distribution vs exact pi_t with
    // the generous 3*sqrt(|Omega|/N) Monte Carlo bound.
    let h = Hypergraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
    let q = 2u32;
    let t = 10u64;
    let mut dist = ExactDistribution::<f64>::uniform(3, q, DEFAULT_STATE_BUDGET).unwrap();
    for _ in 0..t {
        dist = oracle::transition_step_exact(&h, &dist).unwrap();
    }
    let h = Arc::new(h);
    let samples = 20_000u64;
    let mut counts = vec![0u64; dist.len()];
    for i in 0..samples {
        let mut state = ChainState::new(
            Arc::clone(&h),
            q,
            Start::UniformRandom,
            hyperglauber::rng::derive_seed(7, i),
        )
        .unwrap();
        state.run(t);
        counts[oracle::encode(state.colouring()) as usize] += 1;
    }
    let tv: f64 = 0.5
        * counts
            .iter()
            .enumerate()
            .map(|(s, &c)| (c as f64 / samples as f64 - dist.prob(s as u64)).abs())
            .sum::<f64>();
    let bound = 3.0 * (dist.len() as f64 / samples as f64).sqrt();
    println!("empirical TV = {tv:.5}, soft bound = {bound:.5}");
    assert!(tv <= bound, "TV {tv} above the soft bound {bound}");
}

#[test]
fn desk_chain_is_proper_after_t_delta() {
    // Monte Carlo over 100 seeds: a run of t_delta = ceil(2n ln(2n/0.05))
    // steps from a uniform-random start ends proper essentially always
    // (moves never create a mono-coloured edge, so properness only has to
    // be reached once).
    let h = Arc::new(random_simple(200, 3, 1600, 24, 1).unwrap());
    let t_delta = (2.0 * 200.0 * (8000.0f64).ln()).ceil() as u64;
    let mut proper = 0;
    for seed in 0..100u64 {
        let mut state = ChainState::new(
            Arc::clone(&h),
            48,
            Start::UniformRandom,
            hyperglauber::rng::derive_seed(90, seed),
        )
        .unwrap();
        state.run(t_delta);
        if state.is_proper() {
            proper += 1;
        }
    }
    println!("proper after t_delta: {proper}/100");
    assert!(proper >= 95, "only {proper}/100 runs ended proper");
}

#[test]
fn hamming_distance_is_a_metric_on_examples() {
    let q = 3;
    let a = Colouring::new(vec![1, 2, 3, 1], q).unwrap();
    let b = Colouring::new(vec![1, 3, 3, 2], q).unwrap();
    let c = Colouring::new(vec![2, 3, 3, 2], q).unwrap();
    let ab = hamming(&a, &b).unwrap();
    let bc = hamming(&b, &c).unwrap();
    let ac = hamming(&a, &c).unwrap();
    assert_eq!(hamming(&a, &a).unwrap(), 0);
    assert_eq!(ab, hamming(&b, &a).unwrap());
    assert!(ac <= ab + bc);
}
