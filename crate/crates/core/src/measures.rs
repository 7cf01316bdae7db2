//! Single-jump changes of measure at a predictable time `T` and the two
//! three-way equivalences for single-jump martingales.
//!
//! Every density is built atom by atom (an atom of `F_{T-1}`, or of `G_{T-1}`
//! for the `G`-measures) and its conditional mass is checked to be one on
//! every atom at construction. Off `{T < ∞}` every density is one.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::process::{after, is_martingale, stop, Process};
use crate::random_time::{honesty_violation, AzemaData, RandomTime};
use crate::rational::{one, zero, Rational};
use crate::space::{reweight, Filtration, FiniteProbSpace, Measure, Partition};

/// A predictable time: `{T = t}` is `F_{t-1}`-measurable; `None` is `+∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictableTime {
    times: Vec<Option<usize>>,
}

impl PredictableTime {
    pub fn new(times: Vec<Option<usize>>, f: &Filtration) -> Result<Self> {
        if times.len() != f.n_outcomes() {
            return Err(Error::OutcomeMismatch { expected: f.n_outcomes(), found: times.len() });
        }
        for (w, t) in times.iter().enumerate() {
            if let Some(t) = *t {
                if t == 0 || t > f.horizon() {
                    return Err(Error::InvalidPredictableTime(format!(
                        "T({w}) = {t} is outside 1..={}",
                        f.horizon()
                    )));
                }
            }
        }
        for t in 1..=f.horizon() {
            let hits: Vec<bool> = times.iter().map(|&s| s == Some(t)).collect();
            if let Some(w) = f.before(t).first_non_measurable(&hits) {
                return Err(Error::InvalidPredictableTime(format!(
                    "{{T = {t}}} is not known at time {} (outcome {w})",
                    t - 1
                )));
            }
        }
        Ok(PredictableTime { times })
    }

    pub fn deterministic(n: usize, t: usize, f: &Filtration) -> Result<Self> {
        Self::new(vec![Some(t); n], f)
    }

    pub fn time(&self, w: usize) -> Option<usize> {
        self.times[w]
    }

    pub fn times(&self) -> &[Option<usize>] {
        &self.times
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureTag {
    /// `Q_T`
    QT,
    /// `Q̃_T`
    QTildeT,
    /// `Q'_T`
    QPrime,
    /// `Q̃'_T`
    QTildePrime,
    /// `Q^G_T` before `τ`
    QGBefore,
    /// `Q^F_T` after `τ` (density `D^F`)
    QFAfter,
    /// `Q^G_T` after `τ` (density `D^G`)
    QGAfter,
}

impl fmt::Display for MeasureTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasureTag::QT => "Q_T",
            MeasureTag::QTildeT => "Qtilde_T",
            MeasureTag::QPrime => "Qprime_T",
            MeasureTag::QTildePrime => "Qtildeprime_T",
            MeasureTag::QGBefore => "QG_T(before)",
            MeasureTag::QFAfter => "QF_T(after)",
            MeasureTag::QGAfter => "QG_T(after)",
        })
    }
}

/// A probability `density · P`, possibly only absolutely continuous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityMeasure {
    pub tag: MeasureTag,
    pub density: Vec<Rational>,
    pub measure: Measure,
}

impl DensityMeasure {
    pub fn support(&self) -> Vec<usize> {
        self.measure.support()
    }
}

/// Builds the measure after checking `E[density | atom] = 1` on every atom
/// of the conditioning partition attached to each outcome.
fn finish(
    tag: MeasureTag,
    density: Vec<Rational>,
    pt: &PredictableTime,
    horizon: usize,
    atoms: &dyn Fn(usize) -> Partition,
    space: &FiniteProbSpace,
) -> Result<DensityMeasure> {
    if let Some((w, d)) = density.iter().enumerate().find(|(_, d)| d.is_negative()) {
        return Err(Error::Internal(format!("{tag}: negative density {d} at outcome {w}")));
    }
    for t in 1..=horizon {
        let pi = atoms(t);
        for block in pi.blocks() {
            if block.iter().all(|&w| pt.time(w) == Some(t)) {
                let avg = space.block_average(&density, block).expect("positive mass");
                if !avg.is_one() {
                    return Err(Error::Internal(format!(
                        "{tag}: density averages {avg} on atom {block:?} at t={t}"
                    )));
                }
            }
        }
    }
    let measure = reweight(space, &density)?;
    Ok(DensityMeasure { tag, density, measure })
}

fn check_grid(pt: &PredictableTime, az: &AzemaData) -> Result<()> {
    if pt.times.len() != az.n_outcomes() {
        return Err(Error::OutcomeMismatch { expected: az.n_outcomes(), found: pt.times.len() });
    }
    Ok(())
}

/// `P(pred(Z̃_T(ω')) | F_{T-1})(ω)` on `{T < ∞}`.
fn cond_prob_at_t(
    az: &AzemaData,
    f: &Filtration,
    space: &FiniteProbSpace,
    t: usize,
    w: usize,
    pred: impl Fn(&Rational) -> bool,
) -> Rational {
    let block = f.before(t).block_containing(w);
    let hit: Rational = block.iter().filter(|&&v| pred(az.z_tilde_at(t, v))).map(|&v| space.prob(v)).sum();
    hit / space.mass(block)
}

/// `1_{Z̃_T ∈ E} / P(Z̃_T ∈ E | F_{T-})` where that probability is positive, `1` elsewhere.
fn conditioned_on_level(
    pt: &PredictableTime,
    az: &AzemaData,
    f: &Filtration,
    space: &FiniteProbSpace,
    pred: impl Fn(&Rational) -> bool + Copy,
) -> Vec<Rational> {
    (0..az.n_outcomes())
        .map(|w| match pt.time(w) {
            None => one(),
            Some(t) => {
                let p = cond_prob_at_t(az, f, space, t, w, pred);
                if p.is_zero() {
                    one()
                } else if pred(az.z_tilde_at(t, w)) {
                    one() / p
                } else {
                    zero()
                }
            }
        })
        .collect()
}

pub fn qt(pt: &PredictableTime, az: &AzemaData, f: &Filtration, space: &FiniteProbSpace) -> Result<DensityMeasure> {
    check_grid(pt, az)?;
    let density = conditioned_on_level(pt, az, f, space, |z| z.is_positive());
    finish(MeasureTag::QT, density, pt, f.horizon(), &|t| f.before(t).clone(), space)
}

pub fn qtilde(pt: &PredictableTime, az: &AzemaData, f: &Filtration, space: &FiniteProbSpace) -> Result<DensityMeasure> {
    check_grid(pt, az)?;
    let density = (0..az.n_outcomes())
        .map(|w| match pt.time(w) {
            Some(t) if az.z_left(t, w).is_positive() => az.z_tilde_at(t, w) / az.z_left(t, w),
            _ => one(),
        })
        .collect();
    finish(MeasureTag::QTildeT, density, pt, f.horizon(), &|t| f.before(t).clone(), space)
}

pub fn qprime(pt: &PredictableTime, az: &AzemaData, f: &Filtration, space: &FiniteProbSpace) -> Result<DensityMeasure> {
    check_grid(pt, az)?;
    let density = conditioned_on_level(pt, az, f, space, |z| z < &one());
    finish(MeasureTag::QPrime, density, pt, f.horizon(), &|t| f.before(t).clone(), space)
}

pub fn qtilde_prime(
    pt: &PredictableTime,
    az: &AzemaData,
    f: &Filtration,
    space: &FiniteProbSpace,
) -> Result<DensityMeasure> {
    check_grid(pt, az)?;
    let density = (0..az.n_outcomes())
        .map(|w| match pt.time(w) {
            Some(t) if az.z_left(t, w) < &one() => {
                (one() - az.z_tilde_at(t, w)) / (one() - az.z_left(t, w))
            }
            _ => one(),
        })
        .collect();
    finish(MeasureTag::QTildePrime, density, pt, f.horizon(), &|t| f.before(t).clone(), space)
}

/// `U^G(T) / E[U^G(T) | G_{T-}]` with `U^G(T) = 1_{T>τ} + 1_{T≤τ} Z_{T-} / Z̃_T`.
pub fn qg_before(
    pt: &PredictableTime,
    az: &AzemaData,
    tau: &RandomTime,
    g: &Filtration,
    space: &FiniteProbSpace,
) -> Result<DensityMeasure> {
    check_grid(pt, az)?;
    let u: Vec<Rational> = (0..az.n_outcomes())
        .map(|w| match pt.time(w) {
            Some(t) if !tau.lt(w, t) => az.z_left(t, w) / az.z_tilde_at(t, w),
            _ => one(),
        })
        .collect();
    let density = (0..az.n_outcomes())
        .map(|w| match pt.time(w) {
            None => one(),
            Some(t) => {
                let avg = space.block_average(&u, g.before(t).block_containing(w)).expect("positive mass");
                &u[w] / avg
            }
        })
        .collect();
    finish(MeasureTag::QGBefore, density, pt, g.horizon(), &|t| g.before(t).clone(), space)
}

/// `D^F`: the same formula as `Q'_T`, tagged for the after-`τ` statements.
pub fn qf_after(
    pt: &PredictableTime,
    az: &AzemaData,
    f: &Filtration,
    space: &FiniteProbSpace,
) -> Result<DensityMeasure> {
    let mut q = qprime(pt, az, f, space)?;
    q.tag = MeasureTag::QFAfter;
    Ok(q)
}

/// `D^G = (1 - Z_{T-}) / ((1 - Z̃_T) P(Z̃_T < 1 | F_{T-})) 1_{T>τ} + 1_{T≤τ}`;
/// requires an honest `τ`.
pub fn qg_after(
    pt: &PredictableTime,
    az: &AzemaData,
    tau: &RandomTime,
    f: &Filtration,
    g: &Filtration,
    space: &FiniteProbSpace,
) -> Result<DensityMeasure> {
    check_grid(pt, az)?;
    if let Some((t, atom)) = honesty_violation(tau, f) {
        return Err(Error::NotHonest { t, atom });
    }
    let density = (0..az.n_outcomes())
        .map(|w| match pt.time(w) {
            Some(t) if tau.lt(w, t) => {
                let p = cond_prob_at_t(az, f, space, t, w, |z| z < &one());
                (one() - az.z_left(t, w)) / ((one() - az.z_tilde_at(t, w)) * p)
            }
            _ => one(),
        })
        .collect();
    finish(MeasureTag::QGAfter, density, pt, g.horizon(), &|t| g.before(t).clone(), space)
}

/// The three assertions of a single-jump equivalence, evaluated separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThreeWay {
    pub a: bool,
    pub b: bool,
    pub c: bool,
}

impl ThreeWay {
    pub fn agree(&self) -> bool {
        self.a == self.b && self.b == self.c
    }
}

/// `ξ 1_{[T, ∞)}` after checking that `ξ` is `F_T`-measurable.
pub fn single_jump(pt: &PredictableTime, xi: &[Rational], f: &Filtration) -> Result<Process> {
    if xi.len() != f.n_outcomes() {
        return Err(Error::OutcomeMismatch { expected: f.n_outcomes(), found: xi.len() });
    }
    for t in 1..=f.horizon() {
        for block in f.at(t).blocks() {
            if pt.time(block[0]) == Some(t) && block.iter().any(|&w| xi[w] != xi[block[0]]) {
                return Err(Error::NotAdapted { t, outcome: block[0] });
            }
        }
    }
    Ok(Process::scalar(f.horizon(), f.n_outcomes(), |t, w| match pt.time(w) {
        Some(s) if s <= t => xi[w].clone(),
        _ => zero(),
    }))
}

/// `E[ξ 1_E | F_{T-}] = 0` on every atom of `{T < ∞} ∩ scope`, with `E`
/// given by `event(t, ω)`.
fn conditional_mean_vanishes(
    pt: &PredictableTime,
    xi: &[Rational],
    f: &Filtration,
    space: &FiniteProbSpace,
    scope: impl Fn(usize, usize) -> bool,
    event: impl Fn(usize, usize) -> bool,
) -> bool {
    (1..=f.horizon()).all(|t| {
        f.before(t).blocks().iter().all(|block| {
            if pt.time(block[0]) != Some(t) || !scope(t, block[0]) {
                return true;
            }
            block
                .iter()
                .filter(|&&w| event(t, w))
                .map(|&w| space.prob(w) * &xi[w])
                .sum::<Rational>()
                .is_zero()
        })
    })
}

/// `M = ξ 1_{[T,∞)}` an `F`-martingale. (a) `M` is an `F`-martingale under
/// `Q_T`; (b) `E[ξ 1_{Z̃_T = 0} | F_{T-}] = 0`; (c) `M^τ` is a `G`-martingale
/// under `Q^G_T`.
#[allow(clippy::too_many_arguments)]
pub fn verify_prop_before(
    pt: &PredictableTime,
    xi: &[Rational],
    az: &AzemaData,
    tau: &RandomTime,
    f: &Filtration,
    g: &Filtration,
    space: &FiniteProbSpace,
) -> Result<ThreeWay> {
    let m = single_jump(pt, xi, f)?;
    if !is_martingale(&m, f, space) {
        return Err(Error::Precondition("ξ 1_[T,∞) is not an F-martingale".into()));
    }
    let a = is_martingale(&m, f, &qt(pt, az, f, space)?.measure);
    let b = conditional_mean_vanishes(pt, xi, f, space, |_, _| true, |t, w| az.z_tilde_at(t, w).is_zero());
    let c = is_martingale(&stop(&m, tau), g, &qg_before(pt, az, tau, g, space)?.measure);
    Ok(ThreeWay { a, b, c })
}

/// `M = ξ 1_{Z_{T-}<1} 1_{[T,∞)}`, `τ` honest. (a) `M` is an `F`-martingale
/// under `Q^F_T`; (b) `E[ξ 1_{Z̃_T<1} | F_{T-}] = 0` on `{Z_{T-} < 1}`;
/// (c) `M - M^τ` is a `G`-martingale under `Q^G_T`.
pub fn verify_prop_after(
    pt: &PredictableTime,
    xi: &[Rational],
    az: &AzemaData,
    tau: &RandomTime,
    f: &Filtration,
    g: &Filtration,
    space: &FiniteProbSpace,
) -> Result<ThreeWay> {
    let restricted: Vec<Rational> = (0..xi.len())
        .map(|w| match pt.time(w) {
            Some(t) if az.z_left(t, w) < &one() => xi[w].clone(),
            _ => zero(),
        })
        .collect();
    let m = single_jump(pt, &restricted, f)?;
    let a = is_martingale(&m, f, &qf_after(pt, az, f, space)?.measure);
    let b = conditional_mean_vanishes(
        pt,
        xi,
        f,
        space,
        |t, w| az.z_left(t, w) < &one(),
        |t, w| az.z_tilde_at(t, w) < &one(),
    );
    let c = is_martingale(&after(&m, tau), g, &qg_after(pt, az, tau, f, g, space)?.measure);
    Ok(ThreeWay { a, b, c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random_time::{azema, enlarge};
    use crate::rational::{int, ratio};

    fn e1() -> (FiniteProbSpace, Filtration, RandomTime) {
        let space = FiniteProbSpace::uniform(2).unwrap();
        let f = Filtration::new(vec![Partition::trivial(2), Partition::discrete(2)]).unwrap();
        (space, f, RandomTime::new(vec![Some(1), Some(0)]))
    }

    #[test]
    fn e1_densities_by_hand() {
        let (space, f, tau) = e1();
        let az = azema(&tau, &f, &space).unwrap();
        let pt = PredictableTime::deterministic(2, 1, &f).unwrap();
        assert_eq!(qt(&pt, &az, &f, &space).unwrap().density, vec![int(2), zero()]);
        assert_eq!(qtilde(&pt, &az, &f, &space).unwrap().density, vec![int(2), zero()]);
        let g = enlarge(&f, &tau);
        // G₀ atoms are singletons, so Q^G_1 = P.
        assert_eq!(qg_before(&pt, &az, &tau, &g, &space).unwrap().density, vec![one(), one()]);
    }

    #[test]
    fn e1_prop_before_fails_three_ways() {
        let (space, f, tau) = e1();
        let az = azema(&tau, &f, &space).unwrap();
        let g = enlarge(&f, &tau);
        let pt = PredictableTime::deterministic(2, 1, &f).unwrap();
        let r = verify_prop_before(&pt, &[int(1), int(-1)], &az, &tau, &f, &g, &space).unwrap();
        assert_eq!(r, ThreeWay { a: false, b: false, c: false });
        let r = verify_prop_before(&pt, &[zero(), zero()], &az, &tau, &f, &g, &space).unwrap();
        assert_eq!(r, ThreeWay { a: true, b: true, c: true });
    }

    #[test]
    fn never_ending_time_leaves_p_unchanged() {
        let space = FiniteProbSpace::new(vec![ratio(1, 3), ratio(2, 3)]).unwrap();
        let f = Filtration::new(vec![Partition::trivial(2), Partition::discrete(2)]).unwrap();
        let az = azema(&RandomTime::never(2), &f, &space).unwrap();
        let pt = PredictableTime::deterministic(2, 1, &f).unwrap();
        assert_eq!(qtilde(&pt, &az, &f, &space).unwrap().density, vec![one(), one()]);
        assert_eq!(qt(&pt, &az, &f, &space).unwrap().density, vec![one(), one()]);
    }

    #[test]
    fn z_left_zero_everywhere_uses_guard_branch() {
        let space = FiniteProbSpace::uniform(2).unwrap();
        let f = Filtration::new(vec![Partition::trivial(2), Partition::discrete(2)]).unwrap();
        let tau = RandomTime::constant(2, 0);
        let az = azema(&tau, &f, &space).unwrap();
        let pt = PredictableTime::deterministic(2, 1, &f).unwrap();
        assert_eq!(qtilde(&pt, &az, &f, &space).unwrap().density, vec![one(), one()]);
        assert_eq!(qt(&pt, &az, &f, &space).unwrap().density, vec![one(), one()]);
    }

    #[test]
    fn predictable_time_must_be_announced() {
        let f = Filtration::new(vec![Partition::trivial(2), Partition::discrete(2), Partition::discrete(2)]).unwrap();
        assert!(PredictableTime::new(vec![Some(1), Some(2)], &f).is_err());
        assert!(PredictableTime::new(vec![Some(2), None], &f).is_ok());
        assert!(PredictableTime::new(vec![Some(0), None], &f).is_err());
    }

    #[test]
    fn after_measures_on_an_honest_time() {
        let space = FiniteProbSpace::uniform(4).unwrap();
        let f = Filtration::new(vec![
            Partition::trivial(4),
            Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap(),
            Partition::discrete(4),
        ])
        .unwrap();
        let tau = RandomTime::new(vec![Some(2), Some(1), Some(0), Some(0)]);
        let az = azema(&tau, &f, &space).unwrap();
        let g = enlarge(&f, &tau);
        let pt = PredictableTime::deterministic(4, 2, &f).unwrap();
        let dg = qg_after(&pt, &az, &tau, &f, &g, &space).unwrap();
        assert_eq!(dg.measure.probs().iter().sum::<Rational>(), one());
        let r = verify_prop_after(&pt, &[int(5), int(0), int(2), int(-2)], &az, &tau, &f, &g, &space).unwrap();
        assert_eq!(r, ThreeWay { a: true, b: true, c: true });
        let r = verify_prop_after(&pt, &[int(0), int(1), int(0), int(0)], &az, &tau, &f, &g, &space).unwrap();
        assert_eq!(r, ThreeWay { a: false, b: false, c: false });
    }
}
