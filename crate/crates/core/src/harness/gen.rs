//! Seeded random models and the random objects the suites quantify over.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::PredictableTime;
use crate::model::Model;
use crate::process::Process;
use crate::random_time::{azema, exceptional_sets, is_honest, z_tau_less_one, RandomTime};
use crate::rational::{int, ratio, zero, Rational};
use crate::space::{Filtration, FiniteProbSpace, Measure, Partition};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelGenParams {
    pub max_outcomes: usize,
    pub max_horizon: usize,
    /// Upper bound on the number of assets `d`.
    pub n_assets: usize,
    /// Upper bound on the number of children of an atom at each step.
    pub max_branching: usize,
    pub honest_only: bool,
    pub force_before_set: bool,
    pub force_after_set: bool,
    pub max_rejections: usize,
    pub seed: u64,
}

impl Default for ModelGenParams {
    fn default() -> Self {
        ModelGenParams {
            max_outcomes: 12,
            max_horizon: 4,
            n_assets: 2,
            max_branching: 3,
            honest_only: false,
            force_before_set: false,
            force_after_set: false,
            max_rejections: 500,
            seed: 0,
        }
    }
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_space(rng: &mut ChaCha8Rng, n: usize) -> FiniteProbSpace {
    let weights: Vec<i64> = (0..n).map(|_| rng.random_range(1..=9)).collect();
    let total: i64 = weights.iter().sum();
    FiniteProbSpace::new(weights.iter().map(|&w| ratio(w, total)).collect())
        .expect("positive weights normalise to a probability")
}

fn refine(rng: &mut ChaCha8Rng, p: &Partition, max_branching: usize) -> Partition {
    let mut labels = vec![(0usize, 0usize); p.n_outcomes()];
    for (b, block) in p.blocks().iter().enumerate() {
        let k = rng.random_range(1..=max_branching.max(1));
        for &w in block {
            labels[w] = (b, rng.random_range(0..k));
        }
    }
    Partition::from_labels(&labels)
}

fn random_filtration(rng: &mut ChaCha8Rng, n: usize, horizon: usize, max_branching: usize) -> Filtration {
    let mut parts = Vec::with_capacity(horizon + 1);
    let first = if rng.random_bool(0.25) { refine(rng, &Partition::trivial(n), 2) } else { Partition::trivial(n) };
    parts.push(first);
    for t in 1..=horizon {
        let next = refine(rng, &parts[t - 1], max_branching);
        parts.push(next);
    }
    Filtration::new(parts).expect("successive refinements")
}

/// Random integer in `-3..=3` per block of `F_t`, centred per atom of
/// `F_{t-1}` under `measure` when one is given.
fn random_increments(
    rng: &mut ChaCha8Rng,
    f: &Filtration,
    t: usize,
    measure: Option<&Measure>,
) -> Vec<Rational> {
    let n = f.n_outcomes();
    let mut inc = vec![zero(); n];
    for block in f.at(t).blocks() {
        let v = int(rng.random_range(-3..=3));
        for &w in block {
            inc[w] = v.clone();
        }
    }
    if let Some(measure) = measure {
        for parent in f.before(t).blocks() {
            let mean = measure.block_average(&inc, parent).expect("positive mass");
            for &w in parent {
                inc[w] -= &mean;
            }
        }
    }
    inc
}

/// A random `d`-dimensional `F`-martingale under `measure` starting from a
/// random `F_0`-measurable value.
pub fn random_martingale(rng: &mut ChaCha8Rng, f: &Filtration, measure: &Measure, dim: usize) -> Process {
    random_process(rng, f, Some(measure), dim)
}

fn random_process(rng: &mut ChaCha8Rng, f: &Filtration, measure: Option<&Measure>, dim: usize) -> Process {
    let n = f.n_outcomes();
    let comps: Vec<Process> = (0..dim)
        .map(|_| {
            let mut start = vec![zero(); n];
            for block in f.at(0).blocks() {
                let v = int(rng.random_range(-2..=2));
                for &w in block {
                    start[w] = v.clone();
                }
            }
            let incs: Vec<Vec<Rational>> = (1..=f.horizon()).map(|t| random_increments(rng, f, t, measure)).collect();
            let mut level = start;
            let mut rows = vec![level.clone()];
            for inc in incs {
                level = level.iter().zip(&inc).map(|(a, b)| a + b).collect();
                rows.push(level.clone());
            }
            Process::scalar(f.horizon(), n, |t, w| rows[t][w].clone())
        })
        .collect();
    Process::stack(&comps).expect("same grid")
}

/// A random equivalent measure (integer weights `1..=9` times `P`, renormalised).
pub fn random_equivalent_measure(rng: &mut ChaCha8Rng, space: &FiniteProbSpace) -> Measure {
    let weights: Vec<Rational> = (0..space.n_outcomes()).map(|_| int(rng.random_range(1..=9))).collect();
    let total = space.expectation(&weights);
    Measure::new(space.probs().iter().zip(&weights).map(|(p, w)| p * w / &total).collect())
        .expect("positive weights")
}

/// A random process satisfying NUPBR(F): a martingale under `P` or under a
/// random equivalent measure.
pub fn random_nupbr_process(rng: &mut ChaCha8Rng, f: &Filtration, space: &FiniteProbSpace, dim: usize) -> Process {
    if rng.random_bool(0.5) {
        random_martingale(rng, f, space, dim)
    } else {
        let q = random_equivalent_measure(rng, space);
        random_martingale(rng, f, &q, dim)
    }
}

/// Last visit `sup{t : ω ∈ A_t}` of a random adapted set, with `sup ∅ = 0`.
pub fn last_visit_time(rng: &mut ChaCha8Rng, f: &Filtration) -> RandomTime {
    let n = f.n_outcomes();
    let mut last = vec![0usize; n];
    for t in 0..=f.horizon() {
        for block in f.at(t).blocks() {
            if rng.random_bool(0.5) {
                for &w in block {
                    last[w] = t;
                }
            }
        }
    }
    RandomTime::new(last.into_iter().map(Some).collect())
}

fn uniform_time(rng: &mut ChaCha8Rng, n: usize, horizon: usize) -> RandomTime {
    RandomTime::new(
        (0..n)
            .map(|_| {
                let t = rng.random_range(0..=horizon + 1);
                (t <= horizon).then_some(t)
            })
            .collect(),
    )
}

fn attempt(rng: &mut ChaCha8Rng, params: &ModelGenParams) -> Model {
    let n = rng.random_range(2..=params.max_outcomes.max(2));
    let horizon = rng.random_range(1..=params.max_horizon.max(1));
    let dim = rng.random_range(1..=params.n_assets.max(1));
    let space = random_space(rng, n);
    let f = random_filtration(rng, n, horizon, params.max_branching);
    let s = match rng.random_range(0..3) {
        0 => random_martingale(rng, &f, &space, dim),
        1 => {
            let q = random_equivalent_measure(rng, &space);
            random_martingale(rng, &f, &q, dim)
        }
        _ => random_process(rng, &f, None, dim),
    };
    let tau = if params.honest_only || rng.random_bool(0.5) {
        last_visit_time(rng, &f)
    } else {
        uniform_time(rng, n, horizon)
    };
    Model::new(space, f, s, tau).expect("generated model is consistent")
}

/// Deterministic in `params`: the same parameters give the same model.
pub fn gen_model(params: &ModelGenParams) -> Result<Model> {
    let mut rng = rng_for(params.seed, 0);
    for _ in 0..params.max_rejections.max(1) {
        let model = attempt(&mut rng, params);
        let az = azema(&model.tau, &model.f, &model.space)?;
        if params.honest_only && !(is_honest(&model.tau, &model.f) && z_tau_less_one(&model.tau, &az).unwrap_or(false)) {
            continue;
        }
        let sets = exceptional_sets(&az);
        if params.force_before_set && sets.before.is_empty() {
            continue;
        }
        if params.force_after_set && sets.after.is_empty() {
            continue;
        }
        return Ok(model);
    }
    Err(Error::Generation(format!(
        "no model met the constraints after {} attempts (seed {})",
        params.max_rejections, params.seed
    )))
}

/// A random predictable time: each still-unassigned atom of `F_{t-1}` jumps
/// at `t` with probability one half; atoms never picked get `T = ∞`.
pub fn random_predictable_time(rng: &mut ChaCha8Rng, f: &Filtration) -> PredictableTime {
    let mut times = vec![None; f.n_outcomes()];
    for t in 1..=f.horizon() {
        for block in f.before(t).blocks() {
            if times[block[0]].is_none() && rng.random_bool(0.5) {
                for &w in block {
                    times[w] = Some(t);
                }
            }
        }
    }
    PredictableTime::new(times, f).expect("announced by construction")
}

/// A random `F_T`-measurable integer variable (zero off `{T < ∞}`).
pub fn random_xi(rng: &mut ChaCha8Rng, pt: &PredictableTime, f: &Filtration) -> Vec<Rational> {
    let mut xi = vec![zero(); f.n_outcomes()];
    for t in 1..=f.horizon() {
        for block in f.at(t).blocks() {
            if pt.time(block[0]) == Some(t) {
                let v = int(rng.random_range(-3..=3));
                for &w in block {
                    xi[w] = v.clone();
                }
            }
        }
    }
    xi
}

/// Centres `xi` per atom of `F_{T-1}` over the outcomes selected by `within`
/// (the rest of the atom is left untouched).
pub fn centre_xi(
    xi: &mut [Rational],
    pt: &PredictableTime,
    f: &Filtration,
    space: &FiniteProbSpace,
    within: impl Fn(usize, usize) -> bool,
) {
    for t in 1..=f.horizon() {
        for block in f.before(t).blocks() {
            if pt.time(block[0]) != Some(t) {
                continue;
            }
            let sel: Vec<usize> = block.iter().copied().filter(|&w| within(t, w)).collect();
            if let Some(mean) = space.block_average(xi, &sel) {
                for &w in &sel {
                    xi[w] -= &mean;
                }
            }
        }
    }
}

/// A predictable staircase: `X_t` is `F_{t-1}`-measurable, stepping with
/// probability one half per atom.
pub fn random_staircase(rng: &mut ChaCha8Rng, f: &Filtration, dim: usize) -> Process {
    let n = f.n_outcomes();
    let mut rows = vec![vec![vec![zero(); dim]; n]];
    for t in 1..=f.horizon() {
        let mut row = rows[t - 1].clone();
        for block in f.before(t).blocks() {
            for k in 0..dim {
                if rng.random_bool(0.5) {
                    let step = int(rng.random_range(-2..=2));
                    for &w in block {
                        row[w][k] += &step;
                    }
                }
            }
        }
        rows.push(row);
    }
    Process::from_table(rows).expect("rectangular table")
}
