//! Explicit `G`-martingale deflators for the model stopped at `τ` and for the
//! model after an honest time `τ`.
//!
//! Off-support conventions: `K^G := 0` off `{t ≤ τ}` and `K^(a) := 0` off
//! `{t > τ}`. At `t = 0` the left limit is `Z_0` and `Δ⟨m⟩_0 = 0`. The
//! compensated parts `m̂` and `m̂^(a)` start at zero.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::process::{after, is_martingale, optional_integral, stochastic_exponential, stop, Process};
use crate::random_time::{honesty_violation, z_tau_less_one, AzemaData, RandomTime};
use crate::rational::{one, zero, Rational};
use crate::space::{conditional_probability, Filtration, FiniteProbSpace};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeforeTauDeflator {
    pub k_g: Process,
    pub v_g: Process,
    pub m_hat: Process,
    pub l_tilde: Process,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AfterTauDeflator {
    pub k_a: Process,
    pub w_g: Process,
    pub m_hat_a: Process,
    pub l_tilde_a: Process,
}

/// `P(Z̃_t = level | F_{t-1})` for every `t` (zero at `t = 0`).
fn level_probability(az: &AzemaData, level: &Rational, f: &Filtration, space: &FiniteProbSpace) -> Process {
    let n = az.n_outcomes();
    let rows: Vec<Vec<Rational>> = (0..=az.horizon())
        .map(|t| {
            if t == 0 {
                return vec![zero(); n];
            }
            let event: Vec<usize> = (0..n).filter(|&w| az.z_tilde_at(t, w) == level).collect();
            conditional_probability(&event, f.before(t), space)
        })
        .collect();
    Process::scalar(az.horizon(), n, |t, w| rows[t][w].clone())
}

/// Running sum of `inc(t, ω)` over `t >= 1`, starting at zero.
fn accumulate(horizon: usize, n: usize, mut inc: impl FnMut(usize, usize) -> Rational) -> Process {
    let mut out = Process::zeros(horizon, n, 1);
    for t in 1..=horizon {
        for w in 0..n {
            let v = out.scalar_at(t - 1, w) + inc(t, w);
            out.set(t, w, vec![v]);
        }
    }
    out
}

fn check_inputs(az: &AzemaData, tau: &RandomTime, f: &Filtration, g: &Filtration) -> Result<()> {
    for found in [tau.n_outcomes(), f.n_outcomes(), g.n_outcomes()] {
        if found != az.n_outcomes() {
            return Err(Error::OutcomeMismatch { expected: az.n_outcomes(), found });
        }
    }
    for found in [f.horizon(), g.horizon()] {
        if found != az.horizon() {
            return Err(Error::HorizonMismatch { expected: az.horizon(), found });
        }
    }
    Ok(())
}

fn exponential_checked(n: &Process, g: &Filtration, space: &FiniteProbSpace, what: &str) -> Result<Process> {
    let e = stochastic_exponential(n)?;
    if let Some(&(t, outcome)) = e.nonpositive_factors.first() {
        return Err(Error::PositivityFailure { t, outcome });
    }
    if !is_martingale(&e.values, g, space) {
        return Err(Error::Internal(format!("{what} is not a G-martingale")));
    }
    Ok(e.values)
}

/// `L̃^(b) = ℰ(-(K^G / (1 - ΔV^G)) ⊙ m̂)` in `G`.
pub fn build_before(
    az: &AzemaData,
    tau: &RandomTime,
    f: &Filtration,
    g: &Filtration,
    space: &FiniteProbSpace,
) -> Result<BeforeTauDeflator> {
    check_inputs(az, tau, f, g)?;
    let (horizon, n) = (az.horizon(), az.n_outcomes());
    let alive = |t: usize, w: usize| !tau.lt(w, t);
    let k_g = Process::scalar(horizon, n, |t, w| {
        let zl = az.z_left(t, w);
        if !alive(t, w) || !zl.is_positive() {
            return zero();
        }
        let zl2 = zl * zl;
        &zl2 / az.z_tilde_at(t, w) / (&zl2 + az.bracket_increment(t, w))
    });
    let q = level_probability(az, &zero(), f, space);
    let v_g = accumulate(horizon, n, |t, w| if alive(t, w) { q.scalar_at(t, w).clone() } else { zero() });
    let m_hat = accumulate(horizon, n, |t, w| {
        if !alive(t, w) {
            return zero();
        }
        az.m.scalar_increment(t, w) - az.bracket_increment(t, w) / az.z_left(t, w)
    });
    let integrand = Process::scalar(horizon, n, |t, w| {
        -(k_g.scalar_at(t, w) / (one() - v_g.scalar_increment(t, w)))
    });
    let l_tilde = exponential_checked(&optional_integral(&integrand, &m_hat, g, space)?, g, space, "L̃(b)")?;
    Ok(BeforeTauDeflator { k_g, v_g, m_hat, l_tilde })
}

/// `L̃^(a) = ℰ((K^(a) / (1 - ΔW^G)) ⊙ m̂^(a))` in `G`; needs an honest `τ`
/// with `Z_τ < 1`.
pub fn build_after(
    az: &AzemaData,
    tau: &RandomTime,
    f: &Filtration,
    g: &Filtration,
    space: &FiniteProbSpace,
) -> Result<AfterTauDeflator> {
    check_inputs(az, tau, f, g)?;
    if let Some((t, atom)) = honesty_violation(tau, f) {
        return Err(Error::NotHonest { t, atom });
    }
    if !z_tau_less_one(tau, az)? {
        let outcome = (0..tau.n_outcomes())
            .find(|&w| az.z_at(tau.time(w).expect("finite"), w).is_one())
            .expect("some outcome has Z_tau = 1");
        return Err(Error::ZTauNotBelowOne { outcome });
    }
    let (horizon, n) = (az.horizon(), az.n_outcomes());
    let gone = |t: usize, w: usize| tau.lt(w, t);
    let k_a = Process::scalar(horizon, n, |t, w| {
        if !gone(t, w) {
            return zero();
        }
        let c = one() - az.z_left(t, w);
        let c2 = &c * &c;
        &c2 / (one() - az.z_tilde_at(t, w)) / (&c2 + az.bracket_increment(t, w))
    });
    let p = level_probability(az, &one(), f, space);
    let w_g = accumulate(horizon, n, |t, w| if gone(t, w) { p.scalar_at(t, w).clone() } else { zero() });
    let m_hat_a = accumulate(horizon, n, |t, w| {
        if !gone(t, w) {
            return zero();
        }
        az.m.scalar_increment(t, w) + az.bracket_increment(t, w) / (one() - az.z_left(t, w))
    });
    let integrand = Process::scalar(horizon, n, |t, w| {
        k_a.scalar_at(t, w) / (one() - w_g.scalar_increment(t, w))
    });
    let l_tilde_a = exponential_checked(&optional_integral(&integrand, &m_hat_a, g, space)?, g, space, "L̃(a)")?;
    Ok(AfterTauDeflator { k_a, w_g, m_hat_a, l_tilde_a })
}

/// Outcome of a deflation check: whether the sufficient condition holds and
/// whether the deflated process is a `G`-martingale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeflationCheck {
    pub condition: bool,
    pub deflated_martingale: bool,
}

impl DeflationCheck {
    /// The theorem: the condition implies the deflation property.
    pub fn consistent(&self) -> bool {
        !self.condition || self.deflated_martingale
    }
}

/// `ᵖ(ΔM 1_E)_t = 0` for every `t >= 1`, with `E` the given section.
fn projection_vanishes_on(
    m: &Process,
    in_set: impl Fn(usize, usize) -> bool,
    f: &Filtration,
    space: &FiniteProbSpace,
) -> bool {
    (1..=m.horizon()).all(|t| {
        f.before(t).blocks().iter().all(|block| {
            (0..m.dim()).all(|k| {
                block
                    .iter()
                    .filter(|&&w| in_set(t, w))
                    .map(|&w| space.prob(w) * &m.increment(t, w)[k])
                    .sum::<Rational>()
                    .is_zero()
            })
        })
    })
}

fn require_f_martingale(m: &Process, f: &Filtration, space: &FiniteProbSpace) -> Result<()> {
    m.check_grid(f)?;
    if !is_martingale(m, f, space) {
        return Err(Error::Precondition("M is not an F-martingale".into()));
    }
    Ok(())
}

/// `^{p,F}(ΔM 1_{Z̃=0<Z_-}) ≡ 0`, and whether `L̃^(b) M^τ` is a `G`-martingale.
pub fn verify_deflation_before(
    m: &Process,
    defl: &BeforeTauDeflator,
    tau: &RandomTime,
    az: &AzemaData,
    f: &Filtration,
    g: &Filtration,
    space: &FiniteProbSpace,
) -> Result<DeflationCheck> {
    require_f_martingale(m, f, space)?;
    let condition = projection_vanishes_on(m, |t, w| az.in_before_set(t, w), f, space);
    let deflated = stop(m, tau).scale_by(&defl.l_tilde)?;
    Ok(DeflationCheck { condition, deflated_martingale: is_martingale(&deflated, g, space) })
}

/// `^{p,F}(ΔM 1_{Z̃=1>Z_-}) ≡ 0`, and whether `L̃^(a) (M - M^τ)` is a `G`-martingale.
pub fn verify_deflation_after(
    m: &Process,
    defl: &AfterTauDeflator,
    tau: &RandomTime,
    az: &AzemaData,
    f: &Filtration,
    g: &Filtration,
    space: &FiniteProbSpace,
) -> Result<DeflationCheck> {
    require_f_martingale(m, f, space)?;
    let condition = projection_vanishes_on(m, |t, w| az.in_after_set(t, w), f, space);
    let deflated = after(m, tau).scale_by(&defl.l_tilde_a)?;
    Ok(DeflationCheck { condition, deflated_martingale: is_martingale(&deflated, g, space) })
}

/// Grid points `(t, ω)` where a jump-ratio identity fails.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JumpRatioReport {
    pub before_failures: Vec<(usize, usize)>,
    pub after_failures: Vec<(usize, usize)>,
    pub before_checked: usize,
    pub after_checked: usize,
}

impl JumpRatioReport {
    pub fn holds(&self) -> bool {
        self.before_failures.is_empty() && self.after_failures.is_empty()
    }
}

/// On `{t ≤ τ}`: `Z_{t-1} / Z̃_t = (1 - ΔV^G_t) L̃^(b)_t / L̃^(b)_{t-1}`.
/// On `{t > τ}`: `(1 - Z_{t-1}) / ((1 - Z̃_t) P(Z̃_t < 1 | F_{t-1})) = L̃^(a)_t / L̃^(a)_{t-1}`.
pub fn jump_ratio_identities(
    defl_b: &BeforeTauDeflator,
    defl_a: Option<&AfterTauDeflator>,
    az: &AzemaData,
    tau: &RandomTime,
    f: &Filtration,
    space: &FiniteProbSpace,
) -> JumpRatioReport {
    let (horizon, n) = (az.horizon(), az.n_outcomes());
    let mut report = JumpRatioReport::default();
    for t in 1..=horizon {
        for w in (0..n).filter(|&w| !tau.lt(w, t)) {
            report.before_checked += 1;
            let lhs = az.z_left(t, w) / az.z_tilde_at(t, w);
            let l = &defl_b.l_tilde;
            let rhs = (one() - defl_b.v_g.scalar_increment(t, w)) * l.scalar_at(t, w) / l.scalar_at(t - 1, w);
            if lhs != rhs {
                report.before_failures.push((t, w));
            }
        }
    }
    if let Some(defl_a) = defl_a {
        for t in 1..=horizon {
            let below_one: Vec<usize> = (0..n).filter(|&w| az.z_tilde_at(t, w) < &one()).collect();
            let p_below = conditional_probability(&below_one, f.before(t), space);
            for w in (0..n).filter(|&w| tau.lt(w, t)) {
                report.after_checked += 1;
                let d_g = (one() - az.z_left(t, w)) / ((one() - az.z_tilde_at(t, w)) * &p_below[w]);
                let l = &defl_a.l_tilde_a;
                if d_g != l.scalar_at(t, w) / l.scalar_at(t - 1, w) {
                    report.after_failures.push((t, w));
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random_time::{azema, enlarge};
    use crate::rational::{int, ratio};
    use crate::space::Partition;

    fn e1() -> (FiniteProbSpace, Filtration, Process, RandomTime) {
        let space = FiniteProbSpace::uniform(2).unwrap();
        let f = Filtration::new(vec![Partition::trivial(2), Partition::discrete(2)]).unwrap();
        let s = Process::scalar(1, 2, |t, w| if t == 0 { zero() } else if w == 0 { int(1) } else { int(-1) });
        (space, f, s, RandomTime::new(vec![Some(1), Some(0)]))
    }

    #[test]
    fn never_ending_time_gives_unit_deflator() {
        let space = FiniteProbSpace::uniform(3).unwrap();
        let f = Filtration::new(vec![Partition::trivial(3), Partition::discrete(3), Partition::discrete(3)]).unwrap();
        let tau = RandomTime::never(3);
        let az = azema(&tau, &f, &space).unwrap();
        let g = enlarge(&f, &tau);
        let d = build_before(&az, &tau, &f, &g, &space).unwrap();
        assert_eq!(d.k_g, Process::constant(2, 3, one()));
        assert_eq!(d.v_g, Process::zeros(2, 3, 1));
        assert_eq!(d.m_hat, Process::zeros(2, 3, 1));
        assert_eq!(d.l_tilde, Process::constant(2, 3, one()));
        assert!(jump_ratio_identities(&d, None, &az, &tau, &f, &space).holds());
    }

    #[test]
    fn e1_before_deflator_by_hand() {
        let (space, f, s, tau) = e1();
        let az = azema(&tau, &f, &space).unwrap();
        let g = enlarge(&f, &tau);
        let d = build_before(&az, &tau, &f, &g, &space).unwrap();
        // Δm₁ = (1/2, -1/2), Δ⟨m⟩₁ = 1/4, Z₀ = 1/2: Δm̂₁(ω1) = 1/2 - 1/2 = 0.
        assert_eq!(d.m_hat.scalar_at(1, 0), &zero());
        // Only ω1 survives to t=1 and P(Z̃₁ = 0 | F₀) = 1/2.
        assert_eq!(d.v_g.scalar_at(1, 0), &ratio(1, 2));
        assert_eq!(d.v_g.scalar_at(1, 1), &zero());
        // Z₀/Z̃₁ = 1/2 on ω1 equals (1 - 1/2) L̃₁ / L̃₀ with L̃ ≡ 1.
        assert_eq!(d.l_tilde.scalar_at(1, 0), &one());
        assert!(jump_ratio_identities(&d, None, &az, &tau, &f, &space).holds());
        let check = verify_deflation_before(&s, &d, &tau, &az, &f, &g, &space).unwrap();
        assert!(!check.condition);
        assert!(!check.deflated_martingale);
    }

    #[test]
    fn after_deflator_for_time_zero() {
        let space = FiniteProbSpace::uniform(2).unwrap();
        let f = Filtration::new(vec![Partition::trivial(2), Partition::discrete(2)]).unwrap();
        let tau = RandomTime::constant(2, 0);
        let az = azema(&tau, &f, &space).unwrap();
        let g = enlarge(&f, &tau);
        let d = build_after(&az, &tau, &f, &g, &space).unwrap();
        assert_eq!(d.m_hat_a, Process::zeros(1, 2, 1));
        assert_eq!(d.l_tilde_a, Process::constant(1, 2, one()));
        let b = build_before(&az, &tau, &f, &g, &space).unwrap();
        assert!(jump_ratio_identities(&b, Some(&d), &az, &tau, &f, &space).holds());
    }

    #[test]
    fn after_deflator_rejects_dishonest_time() {
        let space = FiniteProbSpace::uniform(2).unwrap();
        let f = Filtration::new(vec![Partition::trivial(2), Partition::trivial(2)]).unwrap();
        let tau = RandomTime::new(vec![Some(0), Some(1)]);
        let az = azema(&tau, &f, &space).unwrap();
        let g = enlarge(&f, &tau);
        assert!(matches!(build_after(&az, &tau, &f, &g, &space), Err(Error::NotHonest { t: 1, .. })));
        let never = RandomTime::never(2);
        let az = azema(&never, &f, &space).unwrap();
        let g = enlarge(&f, &never);
        assert!(matches!(build_after(&az, &never, &f, &g, &space), Err(Error::InfiniteTau { .. })));
    }

    #[test]
    fn after_set_is_charged_when_z_tilde_hits_one() {
        // τ = last time in {ω: ω ∈ {0,1}} up to t = 1; Z̃ reaches 1 on {0,1} at t = 1.
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
        let d = build_after(&az, &tau, &f, &g, &space).unwrap();
        let b = build_before(&az, &tau, &f, &g, &space).unwrap();
        assert!(jump_ratio_identities(&b, Some(&d), &az, &tau, &f, &space).holds());
        assert!(is_martingale(&d.l_tilde_a, &g, &space));
    }
}
