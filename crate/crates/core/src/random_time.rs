//! Random times, Azéma supermartingales and the progressively enlarged filtration.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::process::{angle_bracket, dual_optional_projection, Process};
use crate::rational::{one, zero, Rational};
use crate::space::{conditional_probability, FiniteProbSpace, Filtration, Partition};

/// `τ(ω) ∈ {0, 1, …} ∪ {∞}`; `None` stands for `∞`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RandomTime {
    times: Vec<Option<usize>>,
}

impl RandomTime {
    pub fn new(times: Vec<Option<usize>>) -> Self {
        RandomTime { times }
    }

    pub fn never(n: usize) -> Self {
        RandomTime { times: vec![None; n] }
    }

    pub fn constant(n: usize, t: usize) -> Self {
        RandomTime { times: vec![Some(t); n] }
    }

    pub fn n_outcomes(&self) -> usize {
        self.times.len()
    }

    pub fn time(&self, w: usize) -> Option<usize> {
        self.times[w]
    }

    pub fn times(&self) -> &[Option<usize>] {
        &self.times
    }

    pub fn is_finite(&self, w: usize) -> bool {
        self.times[w].is_some()
    }

    /// `τ(ω) ≤ t`.
    pub fn le(&self, w: usize, t: usize) -> bool {
        self.times[w].is_some_and(|s| s <= t)
    }

    /// `τ(ω) < t`.
    pub fn lt(&self, w: usize, t: usize) -> bool {
        self.times[w].is_some_and(|s| s < t)
    }

    /// `D_t = 1_{τ ≤ t}`.
    pub fn indicator_process(&self, horizon: usize, n: usize) -> Process {
        Process::scalar(horizon, n, |t, w| if self.le(w, t) { one() } else { zero() })
    }

    /// `{ω : τ(ω) = t}`.
    pub fn level_set(&self, t: usize) -> Vec<usize> {
        (0..self.times.len()).filter(|&w| self.times[w] == Some(t)).collect()
    }

    /// True when every `{τ ≤ t}` is a union of atoms of `F_t`.
    pub fn is_stopping_time(&self, f: &Filtration) -> bool {
        (0..=f.horizon()).all(|t| {
            let flags: Vec<bool> = (0..self.times.len()).map(|w| self.le(w, t)).collect();
            f.at(t).measurable(&flags)
        })
    }

    pub fn permuted(&self, perm: &[usize]) -> RandomTime {
        let mut times = vec![None; self.times.len()];
        for (old, &new) in perm.iter().enumerate() {
            times[new] = self.times[old];
        }
        RandomTime { times }
    }
}

/// Azéma supermartingales of a random time and the martingale `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AzemaData {
    /// `Z_t = P(τ > t | F_t)`.
    pub z: Process,
    /// `Z̃_t = P(τ ≥ t | F_t)`.
    pub z_tilde: Process,
    /// Dual optional projection of `D = 1_{[τ, ∞)}`.
    pub d_of: Process,
    /// `m = Z + D^{o,F}`.
    pub m: Process,
    /// `⟨m⟩^F`.
    pub m_bracket: Process,
}

impl AzemaData {
    pub fn z_at(&self, t: usize, w: usize) -> &Rational {
        self.z.scalar_at(t, w)
    }

    /// `Z_{t-}`: `Z_{t-1}`, and `Z_0` at time zero.
    pub fn z_left(&self, t: usize, w: usize) -> &Rational {
        self.z.scalar_at(t.saturating_sub(1), w)
    }

    pub fn z_tilde_at(&self, t: usize, w: usize) -> &Rational {
        self.z_tilde.scalar_at(t, w)
    }

    /// `Δ⟨m⟩^F_t`.
    pub fn bracket_increment(&self, t: usize, w: usize) -> Rational {
        self.m_bracket.scalar_increment(t, w)
    }

    pub fn horizon(&self) -> usize {
        self.z.horizon()
    }

    pub fn n_outcomes(&self) -> usize {
        self.z.n_outcomes()
    }

    /// `(t, ω)` lies in `{Z̃ = 0 < Z_-}` (grid times `t >= 1`).
    pub fn in_before_set(&self, t: usize, w: usize) -> bool {
        t >= 1 && self.z_tilde_at(t, w).is_zero() && self.z_left(t, w).is_positive()
    }

    /// `(t, ω)` lies in `{Z̃ = 1 > Z_-}` (grid times `t >= 1`).
    pub fn in_after_set(&self, t: usize, w: usize) -> bool {
        t >= 1 && self.z_tilde_at(t, w).is_one() && self.z_left(t, w) < &one()
    }
}

/// Computes `Z`, `Z̃`, `D^{o,F}`, `m` and `⟨m⟩^F`.
pub fn azema(tau: &RandomTime, f: &Filtration, space: &FiniteProbSpace) -> Result<AzemaData> {
    let n = space.n_outcomes();
    if tau.n_outcomes() != n {
        return Err(Error::OutcomeMismatch { expected: n, found: tau.n_outcomes() });
    }
    if f.n_outcomes() != n {
        return Err(Error::OutcomeMismatch { expected: n, found: f.n_outcomes() });
    }
    let horizon = f.horizon();
    let mut z_rows = Vec::with_capacity(horizon + 1);
    let mut zt_rows = Vec::with_capacity(horizon + 1);
    for t in 0..=horizon {
        let alive: Vec<usize> = (0..n).filter(|&w| !tau.le(w, t)).collect();
        let alive_or_now: Vec<usize> = (0..n).filter(|&w| !tau.lt(w, t)).collect();
        z_rows.push(conditional_probability(&alive, f.at(t), space));
        zt_rows.push(conditional_probability(&alive_or_now, f.at(t), space));
    }
    let z = Process::scalar(horizon, n, |t, w| z_rows[t][w].clone());
    let z_tilde = Process::scalar(horizon, n, |t, w| zt_rows[t][w].clone());
    let d_of = dual_optional_projection(&tau.indicator_process(horizon, n), f, space)?;
    let m = z.add(&d_of)?;
    let m_bracket = angle_bracket(&m, &m, f, space)?;
    Ok(AzemaData { z, z_tilde, d_of, m, m_bracket })
}

/// The progressive enlargement `G` of `F` by `τ`: atoms of `G_t` are
/// `A ∩ {τ = s}` for `s ≤ t` and `A ∩ {τ > t}`, with `A` an atom of `F_t`.
pub fn enlarge(f: &Filtration, tau: &RandomTime) -> Filtration {
    let n = f.n_outcomes();
    let parts: Vec<Partition> = (0..=f.horizon())
        .map(|t| {
            let labels: Vec<(usize, usize)> = (0..n)
                .map(|w| {
                    let key = match tau.time(w) {
                        Some(s) if s <= t => s,
                        _ => usize::MAX,
                    };
                    (f.at(t).block_index(w), key)
                })
                .collect();
            Partition::from_labels(&labels)
        })
        .collect();
    Filtration::new(parts).expect("enlargement of a filtration refines over time")
}

/// First `(t, atom of F_t)` on which `τ` is not constant over `{τ ≤ t}`.
pub fn honesty_violation(tau: &RandomTime, f: &Filtration) -> Option<(usize, Vec<usize>)> {
    for t in 0..=f.horizon() {
        for block in f.at(t).blocks() {
            let mut seen = None;
            for &w in block {
                if tau.le(w, t) {
                    match seen {
                        None => seen = tau.time(w),
                        Some(s) if Some(s) != tau.time(w) => return Some((t, block.clone())),
                        _ => {}
                    }
                }
            }
        }
    }
    None
}

/// Discrete honesty: on `{τ ≤ t}`, `τ` coincides with an `F_t`-measurable variable.
pub fn is_honest(tau: &RandomTime, f: &Filtration) -> bool {
    honesty_violation(tau, f).is_none()
}

/// `Z_{τ(ω)}(ω) < 1` for every outcome; requires `τ` finite within the horizon.
pub fn z_tau_less_one(tau: &RandomTime, az: &AzemaData) -> Result<bool> {
    for w in 0..tau.n_outcomes() {
        match tau.time(w) {
            None => return Err(Error::InfiniteTau { outcome: w }),
            Some(s) if s > az.horizon() => {
                return Err(Error::Precondition(format!(
                    "tau({w}) = {s} lies beyond the horizon {}",
                    az.horizon()
                )))
            }
            _ => {}
        }
    }
    Ok((0..tau.n_outcomes()).all(|w| az.z_at(tau.time(w).expect("finite"), w) < &one()))
}

/// The outcomes forming one time-section of an exceptional set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExceptionalEvent {
    pub t: usize,
    pub outcomes: Vec<usize>,
}

/// `{Z̃ = 0 < Z_-}` (kills NUPBR of the stopped model) and `{Z̃ = 1 > Z_-}`
/// (kills NUPBR after an honest time), listed by grid time.
///
/// On a grid every stopping time is predictable, so "totally inaccessible"
/// and "evanescent" both mean that the corresponding list is empty.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExceptionalSets {
    pub before: Vec<ExceptionalEvent>,
    pub after: Vec<ExceptionalEvent>,
}

pub fn exceptional_sets(az: &AzemaData) -> ExceptionalSets {
    let collect = |pred: &dyn Fn(usize, usize) -> bool| {
        (1..=az.horizon())
            .filter_map(|t| {
                let outcomes: Vec<usize> = (0..az.n_outcomes()).filter(|&w| pred(t, w)).collect();
                (!outcomes.is_empty()).then_some(ExceptionalEvent { t, outcomes })
            })
            .collect()
    };
    ExceptionalSets {
        before: collect(&|t, w| az.in_before_set(t, w)),
        after: collect(&|t, w| az.in_after_set(t, w)),
    }
}
