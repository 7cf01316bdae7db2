//! Exact NUPBR decider.
//!
//! On a finite space NUPBR holds iff for every `t >= 1` and every atom `A`
//! of `H_{t-1}` (restricted to the support of the measure) the origin lies
//! in the relative interior of the convex hull of the one-step increments
//! `{ΔX_t(ω) : ω ∈ A}`. Equivalently there are strictly positive
//! conditional densities `q` with `E[q | A] = 1` and `E[q ΔX_t | A] = 0`.
//! Each pair `(t, A)` is one small exact LP.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::process::{is_martingale, Process};
use crate::rational::{l1_norm, one, zero, Rational};
use crate::space::{Filtration, Measure};

/// A one-step arbitrage: `h` held over `(t-1, t]` on `atom`, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strategy {
    pub t: usize,
    pub atom: Vec<usize>,
    pub h: Vec<Rational>,
    /// The strategy as a predictable process of the same dimension as `X`.
    pub process: Process,
}

impl Strategy {
    /// Liquidation value `(H·X)_T` on every outcome.
    pub fn terminal_value(&self, x: &Process) -> Result<Vec<Rational>> {
        let v = crate::process::predictable_integral(&self.process, x)?;
        Ok((0..x.n_outcomes()).map(|w| v.scalar_at(x.horizon(), w).clone()).collect())
    }

    /// Predictable, admissible (`H·X >= -1`), zero initial wealth, terminal
    /// value `>= 0` on the support and `> 0` on a set of positive mass.
    pub fn is_valid_certificate(&self, x: &Process, h: &Filtration, measure: &Measure) -> bool {
        if self.process.check_predictable(h).is_err() {
            return false;
        }
        let Ok(wealth) = crate::process::predictable_integral(&self.process, x) else {
            return false;
        };
        let support = measure.support();
        let admissible = (0..=x.horizon())
            .all(|t| support.iter().all(|&w| wealth.scalar_at(t, w) >= &-one()));
        let terminal: Vec<&Rational> = support.iter().map(|&w| wealth.scalar_at(x.horizon(), w)).collect();
        admissible
            && terminal.iter().all(|v| !v.is_negative())
            && terminal.iter().any(|v| v.is_positive())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NupbrVerdict {
    /// `densities` holds `q_t(ω)` (with `q_0 = 1`): strictly positive on the
    /// support, `1` off it.
    Holds { densities: Process },
    Violated { witness: Strategy },
}

impl NupbrVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, NupbrVerdict::Holds { .. })
    }

    pub fn witness(&self) -> Option<&Strategy> {
        match self {
            NupbrVerdict::Violated { witness } => Some(witness),
            NupbrVerdict::Holds { .. } => None,
        }
    }

    pub fn densities(&self) -> Option<&Process> {
        match self {
            NupbrVerdict::Holds { densities } => Some(densities),
            NupbrVerdict::Violated { .. } => None,
        }
    }
}

/// Result of one `(t, atom)` step.
enum Step {
    Densities(Vec<Rational>),
    Arbitrage(Vec<Rational>),
}

/// Strict feasibility by max-min-slack: weights `w_i = v_i + s` with
/// `Σ w_i = 1`, `Σ w_i x_i = 0`; feasible with all `w_i > 0` iff `s* > 0`.
fn interior_weights(xs: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    let n = xs.len();
    let d = xs[0].len();
    let mut objective = vec![zero(); n + 1];
    objective[n] = one();
    let mut lp = LinearProgram::new(objective);
    let mut total = vec![one(); n + 1];
    total[n] = Rational::from_integer((n as i64).into());
    lp.add(total, Relation::Eq, one());
    for k in 0..d {
        let mut row: Vec<Rational> = xs.iter().map(|x| x[k].clone()).collect();
        row.push(xs.iter().map(|x| &x[k]).sum());
        lp.add(row, Relation::Eq, zero());
    }
    match lp.solve() {
        LpOutcome::Optimal { value, x } if value.is_positive() => {
            Some(x[..n].iter().map(|v| v + &value).collect())
        }
        _ => None,
    }
}

/// Finds `h` with `h·x_i >= 0` for all `i` and `> 0` for some `i`.
fn arbitrage_direction(xs: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    let d = xs[0].len();
    let signed = |x: &Vec<Rational>| -> Vec<Rational> {
        x.iter().cloned().chain(x.iter().map(|v| -v)).collect()
    };
    let objective = xs.iter().fold(vec![zero(); 2 * d], |acc, x| {
        acc.iter().zip(signed(x)).map(|(a, b)| a + b).collect()
    });
    let mut lp = LinearProgram::new(objective);
    for x in xs {
        lp.add(signed(x), Relation::Ge, zero());
        lp.add(signed(x), Relation::Le, one());
    }
    match lp.solve() {
        LpOutcome::Optimal { value, x } if value.is_positive() => {
            let h: Vec<Rational> = (0..d).map(|k| &x[k] - &x[d + k]).collect();
            let scale = h.iter().map(Signed::abs).max().expect("nonempty");
            Some(h.into_iter().map(|v| v / &scale).collect())
        }
        _ => None,
    }
}

fn decide_step(xs: &[Vec<Rational>], ps: &[Rational]) -> Result<Step> {
    let mass: Rational = ps.iter().sum();
    let d = xs[0].len();
    let drift_free = (0..d).all(|k| xs.iter().zip(ps).map(|(x, p)| &x[k] * p).sum::<Rational>().is_zero());
    if drift_free {
        return Ok(Step::Densities(vec![one(); xs.len()]));
    }
    if let Some(w) = interior_weights(xs) {
        return Ok(Step::Densities(w.iter().zip(ps).map(|(wi, p)| wi * &mass / p).collect()));
    }
    match arbitrage_direction(xs) {
        Some(h) => Ok(Step::Arbitrage(h)),
        None => Err(Error::Internal(
            "neither strictly positive densities nor an arbitrage direction exist".into(),
        )),
    }
}

/// Decides NUPBR of `x` in filtration `h` under `measure` (on its support).
pub fn nupbr_check(x: &Process, h: &Filtration, measure: &Measure) -> Result<NupbrVerdict> {
    x.check_adapted(h)?;
    if measure.n_outcomes() != x.n_outcomes() {
        return Err(Error::OutcomeMismatch { expected: x.n_outcomes(), found: measure.n_outcomes() });
    }
    let mut densities = Process::constant(x.horizon(), x.n_outcomes(), one());
    for t in 1..=x.horizon() {
        for block in h.before(t).blocks() {
            // One LP point per charged child of the atom, so that the
            // densities come out `H_t`-measurable.
            let children: Vec<Vec<usize>> = h
                .at(t)
                .blocks()
                .iter()
                .filter(|c| block.contains(&c[0]))
                .map(|c| c.iter().copied().filter(|&w| measure.in_support(w)).collect::<Vec<_>>())
                .filter(|c| !c.is_empty())
                .collect();
            if children.is_empty() {
                continue;
            }
            let xs: Vec<Vec<Rational>> = children.iter().map(|c| x.increment(t, c[0])).collect();
            let ps: Vec<Rational> = children.iter().map(|c| measure.mass(c)).collect();
            match decide_step(&xs, &ps)? {
                Step::Densities(q) => {
                    for (child, qc) in children.iter().zip(q) {
                        for &w in child {
                            densities.set(t, w, vec![qc.clone()]);
                        }
                    }
                }
                Step::Arbitrage(hv) => {
                    let process = Process::from_fn(x.horizon(), x.n_outcomes(), x.dim(), |s, w| {
                        if s == t && block.contains(&w) {
                            hv.clone()
                        } else {
                            vec![zero(); x.dim()]
                        }
                    });
                    return Ok(NupbrVerdict::Violated {
                        witness: Strategy { t, atom: block.clone(), h: hv, process },
                    });
                }
            }
        }
    }
    Ok(NupbrVerdict::Holds { densities })
}

/// A σ-martingale density `Y` with its normalising integrand `θ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deflator {
    pub y: Process,
    pub theta: Process,
}

/// `(θ·X)_t = Σ_{s ≤ t} θ_s ΔX_s` for scalar `θ` and vector `X`.
pub fn scalar_integral(theta: &Process, x: &Process) -> Result<Process> {
    theta.same_grid(x)?;
    let mut out = Process::zeros(x.horizon(), x.n_outcomes(), x.dim());
    for t in 1..=x.horizon() {
        for w in 0..x.n_outcomes() {
            let v = out
                .at(t - 1, w)
                .iter()
                .zip(x.increment(t, w))
                .map(|(a, d)| a + theta.scalar_at(t, w) * d)
                .collect();
            out.set(t, w, v);
        }
    }
    Ok(out)
}

/// Assembles `Y_t = Π_{s ≤ t} q_s` and `θ_t = 1 / (1 + max_A |ΔX_t|₁)`.
pub fn deflator_from_densities(
    verdict: &NupbrVerdict,
    x: &Process,
    h: &Filtration,
    measure: &Measure,
) -> Result<Deflator> {
    let NupbrVerdict::Holds { densities } = verdict else {
        return Err(Error::Precondition("no deflator: the verdict is a violation".into()));
    };
    densities.same_grid(x)?;
    let mut y = Process::constant(x.horizon(), x.n_outcomes(), one());
    for t in 1..=x.horizon() {
        for w in 0..x.n_outcomes() {
            let v = y.scalar_at(t - 1, w) * densities.scalar_at(t, w);
            y.set(t, w, vec![v]);
        }
    }
    let mut theta = Process::constant(x.horizon(), x.n_outcomes(), one());
    for t in 1..=x.horizon() {
        for block in h.before(t).blocks() {
            let biggest = block
                .iter()
                .filter(|&&w| measure.in_support(w))
                .map(|&w| l1_norm(&x.increment(t, w)))
                .max()
                .unwrap_or_else(zero);
            let th = one() / (one() + biggest);
            for &w in block {
                theta.set(t, w, vec![th.clone()]);
            }
        }
    }
    Ok(Deflator { y, theta })
}

impl Deflator {
    /// `Y > 0` on the support, `Y` and `Y (θ·X)` are martingales.
    pub fn certifies(&self, x: &Process, h: &Filtration, measure: &Measure) -> Result<bool> {
        let positive = (0..=x.horizon())
            .all(|t| measure.support().iter().all(|&w| self.y.scalar_at(t, w).is_positive()));
        let gains = scalar_integral(&self.theta, x)?.scale_by(&self.y)?;
        Ok(positive && is_martingale(&self.y, h, measure) && is_martingale(&gains, h, measure))
    }
}

/// Decision and reference predicate for a predictable process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PredictableFvCheck {
    pub nupbr: bool,
    pub constant: bool,
}

impl PredictableFvCheck {
    pub fn agrees(&self) -> bool {
        self.nupbr == self.constant
    }
}

/// A predictable finite-variation process satisfies NUPBR iff it is constant.
pub fn predictable_fv_check(x: &Process, h: &Filtration, measure: &Measure) -> Result<PredictableFvCheck> {
    x.check_predictable(h)?;
    let nupbr = nupbr_check(x, h, measure)?.holds();
    let constant = (1..=x.horizon()).all(|t| {
        measure.support().iter().all(|&w| x.at(t, w) == x.at(t - 1, w))
    });
    Ok(PredictableFvCheck { nupbr, constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random_time::{enlarge, RandomTime};
    use crate::rational::{int, ratio};
    use crate::space::{FiniteProbSpace, Partition};
    use crate::process::stop;

    fn e1() -> (FiniteProbSpace, Filtration, Process, RandomTime) {
        let space = FiniteProbSpace::uniform(2).unwrap();
        let f = Filtration::new(vec![Partition::trivial(2), Partition::discrete(2)]).unwrap();
        let s = Process::scalar(1, 2, |t, w| if t == 0 { zero() } else if w == 0 { int(1) } else { int(-1) });
        (space, f, s, RandomTime::new(vec![Some(1), Some(0)]))
    }

    #[test]
    fn e1_stopped_price_has_g_arbitrage() {
        let (space, f, s, tau) = e1();
        let g = enlarge(&f, &tau);
        let verdict = nupbr_check(&stop(&s, &tau), &g, &space).unwrap();
        let w = verdict.witness().expect("violation");
        assert_eq!((w.t, w.atom.clone(), w.h.clone()), (1, vec![0], vec![int(1)]));
        assert!(w.is_valid_certificate(&stop(&s, &tau), &g, &space));
    }

    #[test]
    fn e1_f_side_holds_with_unit_densities() {
        let (space, f, s, _) = e1();
        let verdict = nupbr_check(&s, &f, &space).unwrap();
        assert_eq!(verdict.densities().unwrap(), &Process::constant(1, 2, one()));
        let defl = deflator_from_densities(&verdict, &s, &f, &space).unwrap();
        assert_eq!(defl.y, Process::constant(1, 2, one()));
        assert!(defl.certifies(&s, &f, &space).unwrap());
    }

    #[test]
    fn skewed_martingale_measure_is_found() {
        let space = FiniteProbSpace::new(vec![ratio(1, 2), ratio(1, 4), ratio(1, 4)]).unwrap();
        let f = Filtration::new(vec![Partition::trivial(3), Partition::discrete(3)]).unwrap();
        let x = Process::scalar(1, 3, |t, w| if t == 0 { zero() } else { [int(2), int(-1), int(-3)][w].clone() });
        let verdict = nupbr_check(&x, &f, &space).unwrap();
        let q = verdict.densities().unwrap();
        assert!((0..3).all(|w| q.scalar_at(1, w).is_positive()));
        let defl = deflator_from_densities(&verdict, &x, &f, &space).unwrap();
        assert!(defl.certifies(&x, &f, &space).unwrap());
        assert_eq!(defl.theta.scalar_at(1, 0), &ratio(1, 4));
    }

    #[test]
    fn positive_increments_give_unit_witness() {
        let space = FiniteProbSpace::uniform(2).unwrap();
        let f = Filtration::new(vec![Partition::trivial(2), Partition::discrete(2)]).unwrap();
        let x = Process::scalar(1, 2, |t, w| if t == 0 { zero() } else { int(w as i64 + 1) });
        let w = nupbr_check(&x, &f, &space).unwrap().witness().cloned().unwrap();
        assert_eq!(w.h, vec![int(1)]);
        assert!(w.is_valid_certificate(&x, &f, &space));
    }

    #[test]
    fn two_assets_in_a_half_plane() {
        let space = FiniteProbSpace::uniform(3).unwrap();
        let f = Filtration::new(vec![Partition::trivial(3), Partition::discrete(3)]).unwrap();
        let incs = [[int(1), int(0)], [int(-1), int(1)], [int(0), int(2)]];
        let x = Process::from_fn(1, 3, 2, |t, w| if t == 0 { vec![zero(), zero()] } else { incs[w].to_vec() });
        let w = nupbr_check(&x, &f, &space).unwrap().witness().cloned().unwrap();
        assert!(w.is_valid_certificate(&x, &f, &space));
        let incs = [[int(1), int(0)], [int(-1), int(1)], [int(0), int(-2)]];
        let x = Process::from_fn(1, 3, 2, |t, w| if t == 0 { vec![zero(), zero()] } else { incs[w].to_vec() });
        assert!(nupbr_check(&x, &f, &space).unwrap().holds());
    }

    #[test]
    fn check_restricts_to_support() {
        let space = FiniteProbSpace::uniform(2).unwrap();
        let f = Filtration::new(vec![Partition::trivial(2), Partition::discrete(2)]).unwrap();
        let x = Process::scalar(1, 2, |t, w| if t == 0 { zero() } else if w == 0 { int(1) } else { int(-1) });
        let q = crate::space::reweight(&space, &[int(2), zero()]).unwrap();
        assert!(!nupbr_check(&x, &f, &q).unwrap().holds());
        let q = crate::space::reweight(&space, &[ratio(3, 2), ratio(1, 2)]).unwrap();
        assert!(nupbr_check(&x, &f, &q).unwrap().holds());
    }

    #[test]
    fn predictable_drift_is_an_arbitrage() {
        let space = FiniteProbSpace::uniform(2).unwrap();
        let f = Filtration::new(vec![Partition::trivial(2), Partition::discrete(2), Partition::discrete(2)]).unwrap();
        let x = Process::scalar(2, 2, |t, w| if t == 2 && w == 1 { int(-3) } else { zero() });
        let check = predictable_fv_check(&x, &f, &space).unwrap();
        assert_eq!(check, PredictableFvCheck { nupbr: false, constant: false });
        let w = nupbr_check(&x, &f, &space).unwrap().witness().cloned().unwrap();
        assert_eq!((w.t, w.h.clone()), (2, vec![int(-1)]));
        let flat = Process::constant(2, 2, int(5));
        assert!(predictable_fv_check(&flat, &f, &space).unwrap().agrees());
    }

    #[test]
    fn violation_verdict_has_no_deflator() {
        let space = FiniteProbSpace::uniform(1).unwrap();
        let f = Filtration::trivial(1, 1);
        let x = Process::scalar(1, 1, |t, _| int(t as i64));
        let v = nupbr_check(&x, &f, &space).unwrap();
        assert!(matches!(deflator_from_densities(&v, &x, &f, &space), Err(Error::Precondition(_))));
    }
}
