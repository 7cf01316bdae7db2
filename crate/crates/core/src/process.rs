//! Processes on a discrete grid and their stochastic calculus.
//!
//! Time runs over `0..=horizon`. The left limit of `X` at `t` is `X_{t-1}`
//! (and `X_0` at `t = 0`), `ΔX_t = X_t - X_{t-1}` for `t >= 1`, and a process
//! is predictable when `X_t` is `F_{t-1}`-measurable. Every process moves only
//! at grid times, so every process is thin with predictable jump times and
//! local martingales are true martingales.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::random_time::RandomTime;
use crate::rational::{dot, is_zero_vec, one, zero, Rational};
use crate::space::{FiniteProbSpace, Filtration, Measure, Partition};

/// A `(horizon + 1) × n_outcomes` table of vectors in `Q^dim`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Process {
    horizon: usize,
    n: usize,
    dim: usize,
    values: Vec<Rational>,
}

impl Process {
    pub fn from_fn(
        horizon: usize,
        n: usize,
        dim: usize,
        mut f: impl FnMut(usize, usize) -> Vec<Rational>,
    ) -> Self {
        let mut values = Vec::with_capacity((horizon + 1) * n * dim);
        for t in 0..=horizon {
            for w in 0..n {
                let v = f(t, w);
                assert_eq!(v.len(), dim, "value at (t={t}, outcome={w}) has wrong dimension");
                values.extend(v);
            }
        }
        Process { horizon, n, dim, values }
    }

    pub fn scalar(horizon: usize, n: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        Self::from_fn(horizon, n, 1, |t, w| vec![f(t, w)])
    }

    pub fn constant(horizon: usize, n: usize, value: Rational) -> Self {
        Self::scalar(horizon, n, |_, _| value.clone())
    }

    pub fn zeros(horizon: usize, n: usize, dim: usize) -> Self {
        Self::from_fn(horizon, n, dim, |_, _| vec![zero(); dim])
    }

    /// Builds a process from a table indexed `[t][outcome][component]`.
    pub fn from_table(table: Vec<Vec<Vec<Rational>>>) -> Result<Self> {
        let horizon = table.len().checked_sub(1).ok_or_else(|| Error::Format("empty table".into()))?;
        let n = table[0].len();
        let dim = table[0].first().map_or(1, Vec::len);
        let mut values = Vec::with_capacity(table.len() * n * dim);
        for row in table {
            if row.len() != n {
                return Err(Error::OutcomeMismatch { expected: n, found: row.len() });
            }
            for v in row {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
                }
                values.extend(v);
            }
        }
        Ok(Process { horizon, n, dim, values })
    }

    /// Stacks scalar processes into one vector-valued process.
    pub fn stack(components: &[Process]) -> Result<Self> {
        let first = components.first().ok_or_else(|| Error::Format("no components".into()))?;
        for c in components {
            c.same_grid(first)?;
            if c.dim != 1 {
                return Err(Error::DimensionMismatch { expected: 1, found: c.dim });
            }
        }
        Ok(Self::from_fn(first.horizon, first.n, components.len(), |t, w| {
            components.iter().map(|c| c.scalar_at(t, w).clone()).collect()
        }))
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_outcomes(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn offset(&self, t: usize, w: usize) -> usize {
        (t * self.n + w) * self.dim
    }

    pub fn at(&self, t: usize, w: usize) -> &[Rational] {
        let o = self.offset(t, w);
        &self.values[o..o + self.dim]
    }

    /// The value of a scalar process (first component otherwise).
    pub fn scalar_at(&self, t: usize, w: usize) -> &Rational {
        &self.values[self.offset(t, w)]
    }

    /// `X_{t-1}`, with `X_{0-} = X_0`.
    pub fn left(&self, t: usize, w: usize) -> &[Rational] {
        self.at(t.saturating_sub(1), w)
    }

    /// `ΔX_t`; zero at `t = 0`.
    pub fn increment(&self, t: usize, w: usize) -> Vec<Rational> {
        if t == 0 {
            return vec![zero(); self.dim];
        }
        self.at(t, w).iter().zip(self.at(t - 1, w)).map(|(a, b)| a - b).collect()
    }

    pub fn scalar_increment(&self, t: usize, w: usize) -> Rational {
        if t == 0 {
            zero()
        } else {
            self.scalar_at(t, w) - self.scalar_at(t - 1, w)
        }
    }

    /// Component `k` at time `t` across all outcomes.
    pub fn slice(&self, t: usize, k: usize) -> Vec<Rational> {
        (0..self.n).map(|w| self.at(t, w)[k].clone()).collect()
    }

    pub fn component(&self, k: usize) -> Process {
        Process::scalar(self.horizon, self.n, |t, w| self.at(t, w)[k].clone())
    }

    /// Applies `f` to every value, keeping the grid.
    pub fn map(&self, mut f: impl FnMut(usize, usize, &[Rational]) -> Vec<Rational>) -> Process {
        let mut dim = None;
        let values: Vec<Vec<Rational>> = (0..=self.horizon)
            .flat_map(|t| (0..self.n).map(move |w| (t, w)))
            .map(|(t, w)| {
                let v = f(t, w, self.at(t, w));
                dim.get_or_insert(v.len());
                v
            })
            .collect();
        let dim = dim.unwrap_or(self.dim);
        let mut it = values.into_iter();
        Process::from_fn(self.horizon, self.n, dim, |_, _| it.next().expect("sized"))
    }

    pub fn same_grid(&self, other: &Process) -> Result<()> {
        if self.horizon != other.horizon {
            return Err(Error::HorizonMismatch { expected: self.horizon, found: other.horizon });
        }
        if self.n != other.n {
            return Err(Error::OutcomeMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    fn same_shape(&self, other: &Process) -> Result<()> {
        self.same_grid(other)?;
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn add(&self, other: &Process) -> Result<Process> {
        self.same_shape(other)?;
        Ok(self.map(|t, w, v| v.iter().zip(other.at(t, w)).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Process) -> Result<Process> {
        self.same_shape(other)?;
        Ok(self.map(|t, w, v| v.iter().zip(other.at(t, w)).map(|(a, b)| a - b).collect()))
    }

    /// Pointwise product with a scalar process.
    pub fn scale_by(&self, factor: &Process) -> Result<Process> {
        self.same_grid(factor)?;
        if factor.dim != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: factor.dim });
        }
        Ok(self.map(|t, w, v| {
            let c = factor.scalar_at(t, w);
            v.iter().map(|a| a * c).collect()
        }))
    }

    /// `Σ_{s ≤ t} ΔX_s 1_{keep(s, ω)}`, starting from zero.
    pub fn filter_increments(&self, mut keep: impl FnMut(usize, usize) -> bool) -> Process {
        let mut out = Process::zeros(self.horizon, self.n, self.dim);
        for t in 1..=self.horizon {
            for w in 0..self.n {
                let mut v: Vec<Rational> = out.at(t - 1, w).to_vec();
                if keep(t, w) {
                    for (a, d) in v.iter_mut().zip(self.increment(t, w)) {
                        *a += d;
                    }
                }
                out.set(t, w, v);
            }
        }
        out
    }

    pub(crate) fn set(&mut self, t: usize, w: usize, v: Vec<Rational>) {
        debug_assert_eq!(v.len(), self.dim);
        let o = self.offset(t, w);
        for (k, x) in v.into_iter().enumerate() {
            self.values[o + k] = x;
        }
    }

    pub fn is_constant_in_time(&self) -> bool {
        (1..=self.horizon).all(|t| (0..self.n).all(|w| self.at(t, w) == self.at(0, w)))
    }

    /// First `(t, outcome)` where the process is not `filtration`-adapted.
    pub fn adaptedness_violation(&self, filtration: &Filtration) -> Option<(usize, usize)> {
        (0..=self.horizon).find_map(|t| {
            let rows: Vec<&[Rational]> = (0..self.n).map(|w| self.at(t, w)).collect();
            filtration.at(t).first_non_measurable(&rows).map(|w| (t, w))
        })
    }

    pub fn check_adapted(&self, filtration: &Filtration) -> Result<()> {
        self.check_grid(filtration)?;
        match self.adaptedness_violation(filtration) {
            Some((t, outcome)) => Err(Error::NotAdapted { t, outcome }),
            None => Ok(()),
        }
    }

    pub fn check_predictable(&self, filtration: &Filtration) -> Result<()> {
        self.check_grid(filtration)?;
        for t in 0..=self.horizon {
            let rows: Vec<&[Rational]> = (0..self.n).map(|w| self.at(t, w)).collect();
            if let Some(outcome) = filtration.before(t).first_non_measurable(&rows) {
                return Err(Error::NotPredictable { t, outcome });
            }
        }
        Ok(())
    }

    pub fn check_grid(&self, filtration: &Filtration) -> Result<()> {
        if filtration.horizon() != self.horizon {
            return Err(Error::HorizonMismatch { expected: filtration.horizon(), found: self.horizon });
        }
        if filtration.n_outcomes() != self.n {
            return Err(Error::OutcomeMismatch { expected: filtration.n_outcomes(), found: self.n });
        }
        Ok(())
    }

    /// Same process with outcomes renamed by `perm` (old index -> new index).
    pub fn permuted(&self, perm: &[usize]) -> Process {
        let mut inv = vec![0; perm.len()];
        for (old, &new) in perm.iter().enumerate() {
            inv[new] = old;
        }
        Process::from_fn(self.horizon, self.n, self.dim, |t, w| self.at(t, inv[w]).to_vec())
    }
}

fn check_scalar(x: &Process) -> Result<()> {
    if x.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: x.dim() });
    }
    Ok(())
}

fn cond_exp_full(space: &FiniteProbSpace, x: &[Rational], pi: &Partition) -> Vec<Rational> {
    crate::space::conditional_expectation(x, pi, space)
}

/// `ᵖX_t = E[X_t | F_{t-1}]` for `t >= 1` and `E[X_0 | F_0]` at time zero.
pub fn predictable_projection(x: &Process, f: &Filtration, space: &FiniteProbSpace) -> Result<Process> {
    x.check_grid(f)?;
    let mut out = Process::zeros(x.horizon(), x.n_outcomes(), x.dim());
    for t in 0..=x.horizon() {
        for k in 0..x.dim() {
            let e = cond_exp_full(space, &x.slice(t, k), f.before(t));
            for (w, v) in e.into_iter().enumerate() {
                let i = out.offset(t, w) + k;
                out.values[i] = v;
            }
        }
    }
    Ok(out)
}

fn check_nondecreasing(k: &Process) -> Result<()> {
    check_scalar(k)?;
    for t in 1..=k.horizon() {
        for w in 0..k.n_outcomes() {
            if k.scalar_increment(t, w).is_negative() {
                return Err(Error::NonMonotone { t, outcome: w });
            }
        }
    }
    Ok(())
}

/// Running sum of `E[ΔK_s | pick(s)]` with `ΔK_0 := K_0`.
fn projected_sum(
    k: &Process,
    space: &FiniteProbSpace,
    pick: impl Fn(usize) -> Partition,
) -> Process {
    let n = k.n_outcomes();
    let mut out = Process::zeros(k.horizon(), n, 1);
    for t in 0..=k.horizon() {
        let inc: Vec<Rational> =
            (0..n).map(|w| if t == 0 { k.scalar_at(0, w).clone() } else { k.scalar_increment(t, w) }).collect();
        let e = cond_exp_full(space, &inc, &pick(t));
        for (w, v) in e.into_iter().enumerate() {
            let prev = if t == 0 { zero() } else { out.scalar_at(t - 1, w).clone() };
            out.set(t, w, vec![prev + v]);
        }
    }
    out
}

/// `K^{o,F}_t = Σ_{s ≤ t} E[ΔK_s | F_s]` for a nondecreasing, possibly
/// non-adapted `K` (with `ΔK_0 = K_0`).
pub fn dual_optional_projection(k: &Process, f: &Filtration, space: &FiniteProbSpace) -> Result<Process> {
    k.check_grid(f)?;
    check_nondecreasing(k)?;
    Ok(projected_sum(k, space, |s| f.at(s).clone()))
}

/// `K^{p,F}_t = Σ_{s ≤ t} E[ΔK_s | F_{s-1}]` for a nondecreasing `K`.
pub fn dual_predictable_projection(k: &Process, f: &Filtration, space: &FiniteProbSpace) -> Result<Process> {
    k.check_grid(f)?;
    check_nondecreasing(k)?;
    Ok(compensator(k, f, space))
}

/// Dual predictable projection without the monotonicity requirement.
pub fn compensator(k: &Process, f: &Filtration, space: &FiniteProbSpace) -> Process {
    projected_sum(k, space, |s| f.before(s).clone())
}

/// Why a process failed the martingale test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MartingaleFailure {
    NotAdapted { t: usize, outcome: usize },
    /// `E[X_t | atom]` (lhs) differs from `X_{t-1}` (rhs) on the atom.
    Drift { t: usize, atom: Vec<usize>, component: usize, lhs: Rational, rhs: Rational },
}

/// Exact martingale test under `measure`, restricted to its support.
pub fn martingale_failure(x: &Process, h: &Filtration, measure: &Measure) -> Option<MartingaleFailure> {
    for t in 0..=x.horizon() {
        for block in h.at(t).blocks() {
            let live: Vec<usize> = block.iter().copied().filter(|&w| measure.in_support(w)).collect();
            if let Some(&w) = live.iter().find(|&&w| x.at(t, w) != x.at(t, live[0])) {
                return Some(MartingaleFailure::NotAdapted { t, outcome: w });
            }
        }
    }
    for t in 1..=x.horizon() {
        for block in h.before(t).blocks() {
            let live: Vec<usize> = block.iter().copied().filter(|&w| measure.in_support(w)).collect();
            if live.is_empty() {
                continue;
            }
            for k in 0..x.dim() {
                let slice = x.slice(t, k);
                let lhs = measure.block_average(&slice, &live).expect("live block has mass");
                let rhs = &x.at(t - 1, live[0])[k];
                if &lhs != rhs {
                    return Some(MartingaleFailure::Drift {
                        t,
                        atom: block.clone(),
                        component: k,
                        lhs,
                        rhs: rhs.clone(),
                    });
                }
            }
        }
    }
    None
}

pub fn is_martingale(x: &Process, h: &Filtration, measure: &Measure) -> bool {
    martingale_failure(x, h, measure).is_none()
}

/// `[M, N]_t = Σ_{s ≤ t} ΔM_s ΔN_s` (no continuous part on a grid).
pub fn square_bracket(m: &Process, n: &Process) -> Result<Process> {
    m.same_shape(n)?;
    let mut out = Process::zeros(m.horizon(), m.n_outcomes(), 1);
    for t in 1..=m.horizon() {
        for w in 0..m.n_outcomes() {
            let v = out.scalar_at(t - 1, w) + dot(&m.increment(t, w), &n.increment(t, w));
            out.set(t, w, vec![v]);
        }
    }
    Ok(out)
}

/// `⟨M, N⟩_t = Σ_{s ≤ t} E[ΔM_s ΔN_s | H_{s-1}]`.
pub fn angle_bracket(m: &Process, n: &Process, h: &Filtration, space: &FiniteProbSpace) -> Result<Process> {
    m.check_grid(h)?;
    Ok(compensator(&square_bracket(m, n)?, h, space))
}

/// `ℰ(N)` together with the grid points where a factor `1 + ΔN` is not positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StochasticExponential {
    pub values: Process,
    pub nonpositive_factors: Vec<(usize, usize)>,
}

impl StochasticExponential {
    pub fn is_positive(&self) -> bool {
        self.nonpositive_factors.is_empty()
    }
}

/// `ℰ(N)_t = Π_{1 ≤ s ≤ t} (1 + ΔN_s)`, `ℰ(N)_0 = 1`.
pub fn stochastic_exponential(n: &Process) -> Result<StochasticExponential> {
    check_scalar(n)?;
    let mut values = Process::constant(n.horizon(), n.n_outcomes(), one());
    let mut nonpositive_factors = Vec::new();
    for t in 1..=n.horizon() {
        for w in 0..n.n_outcomes() {
            let factor = one() + n.scalar_increment(t, w);
            if !factor.is_positive() {
                nonpositive_factors.push((t, w));
            }
            let v = values.scalar_at(t - 1, w) * factor;
            values.set(t, w, vec![v]);
        }
    }
    Ok(StochasticExponential { values, nonpositive_factors })
}

/// `(H·X)_t = Σ_{1 ≤ s ≤ t} H_s · ΔX_s`.
pub fn predictable_integral(h: &Process, x: &Process) -> Result<Process> {
    h.same_shape(x)?;
    let mut out = Process::zeros(x.horizon(), x.n_outcomes(), 1);
    for t in 1..=x.horizon() {
        for w in 0..x.n_outcomes() {
            let v = out.scalar_at(t - 1, w) + dot(h.at(t, w), &x.increment(t, w));
            out.set(t, w, vec![v]);
        }
    }
    Ok(out)
}

/// Compensated integral `K ⊙ N`: `Δ(K⊙N)_t = K_t ΔN_t - E[K_t ΔN_t | H_{t-1}]`.
pub fn optional_integral(
    k: &Process,
    n: &Process,
    h: &Filtration,
    space: &FiniteProbSpace,
) -> Result<Process> {
    check_scalar(k)?;
    check_scalar(n)?;
    k.same_grid(n)?;
    n.check_grid(h)?;
    let size = n.n_outcomes();
    let mut out = Process::zeros(n.horizon(), size, 1);
    for t in 1..=n.horizon() {
        let raw: Vec<Rational> = (0..size).map(|w| k.scalar_at(t, w) * n.scalar_increment(t, w)).collect();
        let comp = cond_exp_full(space, &raw, h.before(t));
        for w in 0..size {
            let v = out.scalar_at(t - 1, w) + &raw[w] - &comp[w];
            out.set(t, w, vec![v]);
        }
    }
    Ok(out)
}

/// `X^τ_t = X_{t ∧ τ}`.
pub fn stop(x: &Process, tau: &RandomTime) -> Process {
    Process::from_fn(x.horizon(), x.n_outcomes(), x.dim(), |t, w| {
        let s = match tau.time(w) {
            Some(s) => s.min(t),
            None => t,
        };
        x.at(s, w).to_vec()
    })
}

/// `X - X^τ`.
pub fn after(x: &Process, tau: &RandomTime) -> Process {
    x.sub(&stop(x, tau)).expect("same shape")
}

/// Jump law `ν({t}, dx)` of a process, per atom of `H_{t-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JumpMeasureView {
    /// `laws[t - 1][atom]` maps each nonzero jump value to its conditional mass.
    pub laws: Vec<Vec<BTreeMap<Vec<Rational>, Rational>>>,
}

impl JumpMeasureView {
    pub fn law(&self, t: usize, atom: usize) -> &BTreeMap<Vec<Rational>, Rational> {
        &self.laws[t - 1][atom]
    }

    pub fn is_empty(&self) -> bool {
        self.laws.iter().flatten().all(BTreeMap::is_empty)
    }
}

/// `x ↦ P(ΔS_t = x, ΔS_t ≠ 0 | A)` for each `t >= 1` and atom `A` of `H_{t-1}`.
pub fn jump_measure(s: &Process, h: &Filtration, space: &FiniteProbSpace) -> Result<JumpMeasureView> {
    s.check_grid(h)?;
    let mut laws = Vec::with_capacity(s.horizon());
    for t in 1..=s.horizon() {
        let per_atom = h
            .before(t)
            .blocks()
            .iter()
            .map(|block| {
                let mass = space.mass(block);
                let mut law: BTreeMap<Vec<Rational>, Rational> = BTreeMap::new();
                for &w in block {
                    let x = s.increment(t, w);
                    if !is_zero_vec(&x) {
                        *law.entry(x).or_insert_with(zero) += space.prob(w) / &mass;
                    }
                }
                law
            })
            .collect();
        laws.push(per_atom);
    }
    Ok(JumpMeasureView { laws })
}

/// Conditional expectation of a functional `W(t, ω, x)` given a jump of size `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MpMuConditional {
    values: Vec<Vec<BTreeMap<Vec<Rational>, Rational>>>,
}

impl MpMuConditional {
    /// `M^P_μ(W | P̃)(t, atom, x)`; `None` where the jump `x` has zero
    /// conditional mass (or `x = 0`), i.e. where it is undefined.
    pub fn get(&self, t: usize, atom: usize, x: &[Rational]) -> Option<&Rational> {
        self.values.get(t.checked_sub(1)?)?.get(atom)?.get(x)
    }
}

/// `E[W(t,·,x) 1_{ΔS_t = x ≠ 0} | A] / P(ΔS_t = x ≠ 0 | A)` wherever the
/// denominator is positive.
pub fn mp_mu_conditional(
    w_fn: impl Fn(usize, usize, &[Rational]) -> Rational,
    s: &Process,
    h: &Filtration,
    space: &FiniteProbSpace,
) -> Result<MpMuConditional> {
    s.check_grid(h)?;
    let mut values = Vec::with_capacity(s.horizon());
    for t in 1..=s.horizon() {
        let per_atom = h
            .before(t)
            .blocks()
            .iter()
            .map(|block| {
                let mut acc: BTreeMap<Vec<Rational>, (Rational, Rational)> = BTreeMap::new();
                for &w in block {
                    let x = s.increment(t, w);
                    if is_zero_vec(&x) {
                        continue;
                    }
                    let p = space.prob(w);
                    let val = w_fn(t, w, &x) * p;
                    let e = acc.entry(x).or_insert_with(|| (zero(), zero()));
                    e.0 += val;
                    e.1 += p;
                }
                acc.into_iter().map(|(x, (num, den))| (x, num / den)).collect()
            })
            .collect();
        values.push(per_atom);
    }
    Ok(MpMuConditional { values })
}

/// Checks `Σ_x x (1 + f_t(x)) ν({t}, dx) = 0` per `(t, atom)`, where `f` is
/// the jump parameter of the density `Y` (the conditional mean of
/// `Y_t / Y_{t-1} - 1` given the jump).
pub fn sigma_density_jump_condition(
    y: &Process,
    s: &Process,
    h: &Filtration,
    space: &FiniteProbSpace,
) -> Result<bool> {
    check_scalar(y)?;
    y.same_grid(s)?;
    if let Some((t, w)) = (0..=y.horizon())
        .flat_map(|t| (0..y.n_outcomes()).map(move |w| (t, w)))
        .find(|&(t, w)| !y.scalar_at(t, w).is_positive())
    {
        return Err(Error::Precondition(format!("density not positive at t={t}, outcome {w}")));
    }
    let f = mp_mu_conditional(
        |t, w, _| y.scalar_at(t, w) / y.scalar_at(t - 1, w) - one(),
        s,
        h,
        space,
    )?;
    let nu = jump_measure(s, h, space)?;
    for t in 1..=s.horizon() {
        for atom in 0..h.before(t).blocks().len() {
            let mut total = vec![zero(); s.dim()];
            for (x, mass) in nu.law(t, atom) {
                let fx = f.get(t, atom, x).expect("charged jump has a defined parameter");
                let weight = (one() + fx) * mass;
                for (acc, xi) in total.iter_mut().zip(x) {
                    *acc += xi * &weight;
                }
            }
            if !total.iter().all(Zero::is_zero) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Lemma-LY style check: `E[Y_t ΔX_t | H_{t-1}] = 0` for every `t >= 1`.
pub fn deflated_increments_vanish(
    y: &Process,
    x: &Process,
    h: &Filtration,
    measure: &Measure,
) -> bool {
    (1..=x.horizon()).all(|t| {
        h.before(t).blocks().iter().all(|block| {
            let live: Vec<usize> = block.iter().copied().filter(|&w| measure.in_support(w)).collect();
            if live.is_empty() {
                return true;
            }
            (0..x.dim()).all(|k| {
                let prod: Vec<Rational> = (0..x.n_outcomes())
                    .map(|w| y.scalar_at(t, w) * &x.increment(t, w)[k])
                    .collect();
                measure.block_average(&prod, &live).is_some_and(|v| v.is_zero())
            })
        })
    })
}

/// Helper shared by tests and the harness: `1` where `pred` holds, `0` elsewhere.
pub fn indicator_process(horizon: usize, n: usize, pred: impl Fn(usize, usize) -> bool) -> Process {
    Process::scalar(horizon, n, |t, w| if pred(t, w) { one() } else { zero() })
}
