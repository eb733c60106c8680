//! Goodness classification, regime condition checks and goodness
//! persistence traces.
//!
//! For a vertex v and 1 <= i <= k-1, y_{v,i} counts the edges through v
//! whose other k-1 vertices use exactly i distinct colours. A colouring is
//! eps-bad when some vertex has y_{v,i} >= eps_i q^i for some i <= k-2,
//! with eps_1 = 1/(8k) and eps_{i+1} = eps_i / (16k). All threshold
//! comparisons are done in exact rational arithmetic.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::chain::{ChainState, Start};
use crate::error::{Error, Result};
use crate::hypergraph::{Colouring, Hypergraph};

/// The sequence eps_1, ..., eps_{k-2} as exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsilonSequence {
    k: usize,
    values: Vec<BigRational>,
}

impl EpsilonSequence {
    /// Requires k >= 3 (for k < 3 the index range 1..=k-2 is empty and the
    /// goodness machinery is undefined).
    pub fn new(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::Range(format!(
                "epsilon sequence needs k >= 3, got {k}"
            )));
        }
        let mut values = Vec::with_capacity(k - 2);
        let mut eps = BigRational::new(BigInt::one(), BigInt::from(8 * k as i64));
        for _ in 1..=(k - 2) {
            values.push(eps.clone());
            eps /= BigInt::from(16 * k as i64);
        }
        Ok(Self { k, values })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// eps = eps_1 = 1/(8k).
    pub fn epsilon(&self) -> &BigRational {
        &self.values[0]
    }

    /// eps_i for 1 <= i <= k-2.
    pub fn get(&self, i: usize) -> &BigRational {
        &self.values[i - 1]
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// scale * eps_i * q^i.
    pub fn threshold(&self, i: usize, q: u32, scale: GoodnessScale) -> BigRational {
        let qi = BigRational::from_integer(BigInt::from(q).pow(i as u32));
        let scale = BigRational::from_integer(BigInt::from(scale.factor()));
        self.get(i).clone() * qi * scale
    }
}

/// The two scales the classification is used at: eps-good and 2eps-good.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GoodnessScale {
    Eps,
    TwoEps,
}

impl GoodnessScale {
    pub fn factor(self) -> u32 {
        match self {
            GoodnessScale::Eps => 1,
            GoodnessScale::TwoEps => 2,
        }
    }
}

impl Serialize for GoodnessScale {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u32(self.factor())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Good,
    Bad,
}

/// One threshold violation: vertex v has y_{v,i} at or above the scaled
/// threshold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GoodnessWitness {
    pub vertex: usize,
    pub i: usize,
    pub y: u64,
    /// scale * eps_i * q^i, printed as a rational.
    pub threshold: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GoodnessReport {
    pub scale: GoodnessScale,
    pub verdict: Verdict,
    pub witnesses: Vec<GoodnessWitness>,
    /// max_v y_{v,1}.
    pub b_max: u64,
    /// max_v y_{v,i} for i = 1..=k-1.
    pub y_max_per_i: Vec<u64>,
    /// The scaled thresholds for i = 1..=k-2, printed as rationals.
    pub thresholds: Vec<String>,
}

impl GoodnessReport {
    pub fn is_good(&self) -> bool {
        self.verdict == Verdict::Good
    }
}

/// y_{v,i} for i = 1..=k-1, from the chain's per-edge tables: if v's colour
/// appears exactly once on an edge, removing v drops the distinct count by
/// one.
pub fn y_counts(state: &ChainState, v: usize) -> Vec<u64> {
    let h = state.hypergraph();
    let k = h.k();
    let own = state.colouring().colour(v);
    let mut y = vec![0u64; k - 1];
    for &e in h.incident_edges(v) {
        let distinct = state.edge_distinct(e);
        let i = if state.edge_colour_count(e, own) == 1 {
            distinct - 1
        } else {
            distinct
        };
        y[i - 1] += 1;
    }
    y
}

/// y_{v,i} recomputed from raw colours; the independent oracle for
/// [`y_counts`].
pub fn y_counts_scratch(h: &Hypergraph, x: &Colouring, v: usize) -> Vec<u64> {
    let mut y = vec![0u64; h.k() - 1];
    for &e in h.incident_edges(v) {
        let mut cols: Vec<u32> = h
            .edge(e)
            .iter()
            .filter(|&&u| u != v)
            .map(|&u| x.colour(u))
            .collect();
        cols.sort_unstable();
        cols.dedup();
        y[cols.len() - 1] += 1;
    }
    y
}

/// Classify a state as eps-good or eps-bad at the requested scale.
pub fn goodness(state: &ChainState, scale: GoodnessScale) -> Result<GoodnessReport> {
    let h = state.hypergraph();
    let k = h.k();
    let eps = EpsilonSequence::new(k)?;
    let q = state.q();
    let thresholds: Vec<BigRational> = (1..=k - 2).map(|i| eps.threshold(i, q, scale)).collect();

    let mut witnesses = Vec::new();
    let mut b_max = 0u64;
    let mut y_max_per_i = vec![0u64; k - 1];
    for v in 0..h.n() {
        let y = y_counts(state, v);
        b_max = b_max.max(y[0]);
        for (i, (&yv, m)) in y.iter().zip(y_max_per_i.iter_mut()).enumerate() {
            *m = (*m).max(yv);
            let i = i + 1;
            if i <= k - 2 && BigRational::from_integer(BigInt::from(yv)) >= thresholds[i - 1] {
                witnesses.push(GoodnessWitness {
                    vertex: v,
                    i,
                    y: yv,
                    threshold: thresholds[i - 1].to_string(),
                });
            }
        }
    }
    let verdict = if witnesses.is_empty() {
        Verdict::Good
    } else {
        Verdict::Bad
    };
    Ok(GoodnessReport {
        scale,
        verdict,
        witnesses,
        b_max,
        y_max_per_i,
        thresholds: thresholds.iter().map(|t| t.to_string()).collect(),
    })
}

/// Overall verdict of the condition checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionVerdict {
    /// All four inequalities hold.
    Holds,
    /// q > 2 max_degree: the classical regime, outside this analysis.
    DeferToJerrum,
    /// Some inequality other than the q <= 2 max_degree guard fails.
    OutsideRegime,
}

/// The hypotheses behind the O(n log n) mixing bound, evaluated exactly,
/// plus the derived run lengths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub n: usize,
    pub k: usize,
    pub q: u32,
    pub max_degree: usize,
    pub big_k: u64,
    pub delta: f64,
    /// q <= 2 max_degree.
    pub qd_holds: bool,
    /// q^k >= K n max_degree.
    pub qk_holds: bool,
    /// max_degree <= n^{4/3} for k = 3, <= n^2 for k >= 4.
    pub del_holds: bool,
    /// 4 k max_degree / q^{k-1} < 1.
    pub lll_holds: bool,
    /// The left-hand side of the local-lemma check, as a rational and a
    /// float.
    pub lll_value: String,
    pub lll_value_f64: f64,
    pub verdict: ConditionVerdict,
    /// e^{q / 400k}.
    pub t_star: f64,
    /// 2 n ln(2n / delta).
    pub t_delta: f64,
    pub t_delta_ceil: u64,
    /// Half the minimum of eps_{k-2}(1 - 2 eps) q^{k-1} n / (e k
    /// max_degree) and q n / (2e); infinite branch dropped when the degree
    /// is 0.
    pub t_zero: f64,
    /// The smallest delta for which t_delta <= t_star:
    /// 2n exp(-e^{q/400k} / (2n)).
    pub delta_floor: f64,
}

/// Evaluate the regime conditions for (n, k, q, max_degree) with constant
/// `big_k` and target accuracy `delta`. Integer/rational comparisons only;
/// floats appear solely in the derived, reported quantities.
pub fn check_conditions(
    n: usize,
    k: usize,
    q: u32,
    max_degree: usize,
    big_k: u64,
    delta: f64,
) -> Result<ConditionReport> {
    if n == 0 || q < 1 || big_k < 1 {
        return Err(Error::Range("n, q and K must be positive".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Range(format!(
            "delta must lie in (0,1), got {delta}"
        )));
    }
    let qd_holds = u64::from(q) <= 2 * max_degree as u64;
    let q_big = BigInt::from(q);
    let qk_holds = q_big.pow(k as u32)
        >= BigInt::from(big_k) * BigInt::from(n as u64) * BigInt::from(max_degree as u64);
    let del_holds = if k == 3 {
        // Delta <= n^{4/3} checked as Delta^3 <= n^4.
        BigInt::from(max_degree as u64).pow(3) <= BigInt::from(n as u64).pow(4)
    } else {
        BigInt::from(max_degree as u64) <= BigInt::from(n as u64).pow(2)
    };
    let lll_value = BigRational::new(
        BigInt::from(4 * k as u64) * BigInt::from(max_degree as u64),
        q_big.pow(k as u32 - 1),
    );
    let lll_holds = lll_value < BigRational::one();

    let verdict = if !qd_holds {
        ConditionVerdict::DeferToJerrum
    } else if qk_holds && del_holds && lll_holds {
        ConditionVerdict::Holds
    } else {
        ConditionVerdict::OutsideRegime
    };

    let nf = n as f64;
    let qf = f64::from(q);
    let kf = k as f64;
    let t_star = (qf / (400.0 * kf)).exp();
    let t_delta = 2.0 * nf * (2.0 * nf / delta).ln();
    let t_zero = t_zero(n, k, q, max_degree)?;
    let delta_floor = 2.0 * nf * (-t_star / (2.0 * nf)).exp();

    Ok(ConditionReport {
        n,
        k,
        q,
        max_degree,
        big_k,
        delta,
        qd_holds,
        qk_holds,
        del_holds,
        lll_holds,
        lll_value_f64: lll_value.to_f64().unwrap_or(f64::NAN),
        lll_value: lll_value.to_string(),
        verdict,
        t_star,
        t_delta,
        t_delta_ceil: t_delta.ceil() as u64,
        t_zero,
        delta_floor,
    })
}

/// t_0 = (1/2) min(eps_{k-2} (1 - 2 eps) q^{k-1} n / (e k Delta), q n / (2e)),
/// the horizon up to which goodness is expected to persist. The first
/// branch is dropped for an edgeless hypergraph.
pub fn t_zero(n: usize, k: usize, q: u32, max_degree: usize) -> Result<f64> {
    let eps = EpsilonSequence::new(k)?;
    let nf = n as f64;
    let qf = f64::from(q);
    let kf = k as f64;
    let second = qf * nf / (2.0 * std::f64::consts::E);
    if max_degree == 0 {
        return Ok(0.5 * second);
    }
    let eps1 = eps.epsilon().to_f64().unwrap_or(f64::NAN);
    let eps_last = eps.values().last().unwrap().to_f64().unwrap_or(f64::NAN);
    let first = eps_last * (1.0 - 2.0 * eps1) * qf.powi(k as i32 - 1) * nf
        / (std::f64::consts::E * kf * max_degree as f64);
    Ok(0.5 * first.min(second))
}

/// One recorded checkpoint of a goodness-persistence run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceCheckpoint {
    pub t: u64,
    /// max_v (z_{v,i,t} - z_{v,i,0}) for i = 1..=k-2, where z_{v,i,t} is
    /// the prefix sum y_{v,1,t} + ... + y_{v,i,t}.
    pub max_z_delta: Vec<i64>,
    /// Whether the state is 2eps-good at this checkpoint.
    pub scale2_good: bool,
}

/// Goodness persistence along one chain trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PersistenceTrace {
    pub checkpoints: Vec<TraceCheckpoint>,
    /// eps_i q^i for i = 1..=k-2, the breach thresholds, as rationals.
    pub thresholds: Vec<String>,
    /// Whether any checkpoint had max_z_delta_i >= eps_i q^i.
    pub breached: bool,
    pub t_zero: f64,
}

/// Runs the chain for `steps` steps, maintaining the full y-matrix
/// incrementally (O(deg v · k^2) per step) and recording `checkpoints`
/// evenly spaced checkpoints plus the t = 0 baseline.
pub fn goodness_trace(
    h: Arc<Hypergraph>,
    q: u32,
    start: Start,
    steps: u64,
    checkpoints: u64,
    seed: u64,
) -> Result<PersistenceTrace> {
    if steps < 1 {
        return Err(Error::Range("trace needs at least one step".into()));
    }
    let k = h.k();
    let eps = EpsilonSequence::new(k)?;
    let state = ChainState::new(Arc::clone(&h), q, start, seed)?;
    let mut runner = TraceRunner::new(state);

    let thresholds: Vec<BigRational> = (1..=k - 2)
        .map(|i| eps.threshold(i, q, GoodnessScale::Eps))
        .collect();
    let thresholds2: Vec<BigRational> = (1..=k - 2)
        .map(|i| eps.threshold(i, q, GoodnessScale::TwoEps))
        .collect();

    let mut times: Vec<u64> = (1..=checkpoints.min(steps))
        .map(|j| (steps * j) / checkpoints.min(steps).max(1))
        .collect();
    times.dedup();

    let mut out = PersistenceTrace {
        checkpoints: Vec::with_capacity(times.len() + 1),
        thresholds: thresholds.iter().map(|t| t.to_string()).collect(),
        breached: false,
        t_zero: t_zero(h.n(), k, q, h.max_degree())?,
    };
    out.checkpoints.push(runner.checkpoint(&thresholds2));

    let mut next = times.iter().copied().peekable();
    for t in 1..=steps {
        runner.step();
        if next.peek() == Some(&t) {
            next.next();
            out.checkpoints.push(runner.checkpoint(&thresholds2));
        }
    }
    out.breached = out.checkpoints.iter().any(|cp| {
        cp.max_z_delta
            .iter()
            .zip(&thresholds)
            .any(|(&d, thr)| d >= 0 && BigRational::from_integer(BigInt::from(d)) >= thr.clone())
    });
    Ok(out)
}

/// Chain driver that maintains y_{v,i} for every vertex incrementally. Each
/// recoloured vertex v touches only the edges through v, and inside such an
/// edge only the other vertices' counts can change.
struct TraceRunner {
    state: ChainState,
    /// Shadow of the colouring, updated after each step's diff pass.
    shadow: Vec<u32>,
    /// y[v][i-1] for i = 1..=k-1.
    y: Vec<Vec<u64>>,
    /// z_{v,i,0} for i = 1..=k-2.
    z0: Vec<Vec<i64>>,
}

impl TraceRunner {
    fn new(state: ChainState) -> Self {
        let h = state.hypergraph();
        let k = h.k();
        let shadow: Vec<u32> = (0..h.n()).map(|v| state.colouring().colour(v)).collect();
        let y: Vec<Vec<u64>> = (0..h.n())
            .map(|v| y_counts_scratch(h, state.colouring(), v))
            .collect();
        let z0 = y
            .iter()
            .map(|yv| {
                let mut acc = 0i64;
                (0..k.saturating_sub(2))
                    .map(|i| {
                        acc += yv[i] as i64;
                        acc
                    })
                    .collect()
            })
            .collect();
        Self {
            state,
            shadow,
            y,
            z0,
        }
    }

    fn step(&mut self) {
        let h = self.state.hypergraph_arc();
        let rec = self.state.step();
        if rec.new_colour == rec.old_colour {
            return;
        }
        let v = rec.vertex;
        // Distinct counts of e \ {u} before the flip, for every co-vertex u.
        let mut old_i: Vec<(usize, usize, usize)> = Vec::new();
        for &e in h.incident_edges(v) {
            for &u in h.edge(e) {
                if u != v {
                    old_i.push((e, u, self.distinct_excluding(&h, e, u)));
                }
            }
        }
        self.shadow[v] = rec.new_colour;
        for (e, u, old) in old_i {
            let new = self.distinct_excluding(&h, e, u);
            if new != old {
                self.y[u][old - 1] -= 1;
                self.y[u][new - 1] += 1;
            }
        }
    }

    fn distinct_excluding(&self, h: &Hypergraph, e: usize, u: usize) -> usize {
        let mut cols: Vec<u32> = h
            .edge(e)
            .iter()
            .filter(|&&w| w != u)
            .map(|&w| self.shadow[w])
            .collect();
        cols.sort_unstable();
        cols.dedup();
        cols.len()
    }

    fn checkpoint(&self, thresholds2: &[BigRational]) -> TraceCheckpoint {
        let k = self.state.hypergraph().k();
        let idx_count = k - 2;
        let mut max_z_delta = vec![0i64; idx_count];
        for (v, yv) in self.y.iter().enumerate() {
            let mut acc = 0i64;
            for i in 0..idx_count {
                acc += yv[i] as i64;
                let delta = acc - self.z0[v][i];
                if v == 0 || delta > max_z_delta[i] {
                    max_z_delta[i] = delta;
                }
            }
        }
        let scale2_good = !self.y.iter().any(|yv| {
            yv.iter()
                .take(idx_count)
                .zip(thresholds2)
                .any(|(&y, thr)| BigRational::from_integer(BigInt::from(y)) >= thr.clone())
        });
        TraceCheckpoint {
            t: self.state.t(),
            max_z_delta,
            scale2_good,
        }
    }
}
