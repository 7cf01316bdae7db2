//! Verification suites. Every equivalence is evaluated assertion by
//! assertion with independent computations, and the suite records whether
//! the truth values agree.
//!
//! Universal quantifiers over processes are checked by the witness built in
//! the proofs when the condition fails and by random sampling when it holds.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deflator::{build_after, build_before, jump_ratio_identities, verify_deflation_after, verify_deflation_before};
use crate::error::{Error, Result};
use crate::format::{model_digest, ModelFile};
use crate::measures::{
    qprime, qt, qtilde, qtilde_prime, single_jump, verify_prop_after, verify_prop_before, PredictableTime,
};
use crate::model::{Model, Prepared};
use crate::nupbr::{deflator_from_densities, nupbr_check, predictable_fv_check, NupbrVerdict};
use crate::process::{after, deflated_increments_vanish, is_martingale, stop, Process};
use crate::random_time::{enlarge, is_honest, z_tau_less_one};
use crate::rational::{int, zero, Rational};
use crate::space::{conditional_expectation, conditional_probability, Filtration, FiniteProbSpace, Measure};

use super::gen::{
    centre_xi, gen_model, random_equivalent_measure, random_martingale, random_nupbr_process,
    random_predictable_time, random_staircase, random_xi, rng_for, ModelGenParams,
};

/// Random processes sampled per model when a universal statement is
/// checked on the side where the condition holds.
pub const SAMPLES_PER_MODEL: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteId {
    Azema,
    DeflatorBefore,
    DeflatorAfter,
    JumpRatio,
    Main3,
    Corollary,
    Main4,
    PreservationBefore,
    Cruciallemma1,
    Cruciallemma2,
    Cruciallemma3,
    Multijumps,
    PreservationAfter,
    Cruciallemma2singlejump,
    LpSelftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Before,
    After,
    Mixed,
}

impl SuiteId {
    pub const ALL: [SuiteId; 15] = [
        SuiteId::Azema,
        SuiteId::DeflatorBefore,
        SuiteId::DeflatorAfter,
        SuiteId::JumpRatio,
        SuiteId::Main3,
        SuiteId::Corollary,
        SuiteId::Main4,
        SuiteId::PreservationBefore,
        SuiteId::Cruciallemma1,
        SuiteId::Cruciallemma2,
        SuiteId::Cruciallemma3,
        SuiteId::Multijumps,
        SuiteId::PreservationAfter,
        SuiteId::Cruciallemma2singlejump,
        SuiteId::LpSelftest,
    ];

    /// The suites whose models are honest times (the after-τ side).
    pub const AFTER: [SuiteId; 6] = [
        SuiteId::DeflatorAfter,
        SuiteId::Cruciallemma2,
        SuiteId::Cruciallemma3,
        SuiteId::Multijumps,
        SuiteId::PreservationAfter,
        SuiteId::Cruciallemma2singlejump,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteId::Azema => "azema",
            SuiteId::DeflatorBefore => "deflator-before",
            SuiteId::DeflatorAfter => "deflator-after",
            SuiteId::JumpRatio => "jump-ratio",
            SuiteId::Main3 => "main3",
            SuiteId::Corollary => "corollary",
            SuiteId::Main4 => "main4",
            SuiteId::PreservationBefore => "preservation-before",
            SuiteId::Cruciallemma1 => "cruciallemma1",
            SuiteId::Cruciallemma2 => "cruciallemma2",
            SuiteId::Cruciallemma3 => "cruciallemma3",
            SuiteId::Multijumps => "multijumps",
            SuiteId::PreservationAfter => "preservation-after",
            SuiteId::Cruciallemma2singlejump => "cruciallemma2singlejump",
            SuiteId::LpSelftest => "lp-selftest",
        }
    }

    /// Names of the entries of each case's truth vector.
    pub fn assertions(self) -> &'static [&'static str] {
        match self {
            SuiteId::Azema => &["m is an F-martingale", "E[Ztilde_t|F_t-1] = Z_t-1", "{t<=tau} in {Ztilde>0} in {Z_->0}"],
            SuiteId::DeflatorBefore | SuiteId::DeflatorAfter => {
                &["condition", "deflated process is a G-martingale", "E[L_t dM_t|G_t-1] = 0"]
            }
            SuiteId::JumpRatio => &["identity at every grid point"],
            SuiteId::Main3 => &["(a) S^tau NUPBR(G)", "(b) Stilde NUPBR(F,P)", "(c) NUPBR(F,Qtilde_T)", "(d) NUPBR(F,Q_T)"],
            SuiteId::Corollary => &["(a) {Ztilde_T=0} in {Z_T-=0}", "(b) every M^tau NUPBR(G)"],
            SuiteId::Main4 => &["(a) S^tau NUPBR(G)", "(b) Y-identity for every delta", "(c) S0_delta NUPBR(F) for every delta"],
            SuiteId::PreservationBefore => &["exceptional before-set empty", "every X^tau NUPBR(G)"],
            SuiteId::Cruciallemma1 => &["(a) M martingale under Q_T", "(b) E[xi 1{Ztilde_T=0}|F_T-] = 0", "(c) M^tau martingale under QG_T"],
            SuiteId::Cruciallemma2 => &[
                "(a) S-S^tau NUPBR(G)",
                "(b) NUPBR(F,Qtildeprime_T)",
                "(c) NUPBR(F,Qprime_T)",
                "(d) Stilde NUPBR(F,P)",
            ],
            SuiteId::Cruciallemma3 => &["(a) {Ztilde_T=1} in {Z_T-=1}", "(b) every M-M^tau NUPBR(G)"],
            SuiteId::Multijumps => &["(a) S-S^tau NUPBR(G)", "(b) Y-identity for every delta", "(c) S1_delta NUPBR(F) for every delta"],
            SuiteId::PreservationAfter => &["exceptional after-set empty", "every X-X^tau NUPBR(G)"],
            SuiteId::Cruciallemma2singlejump => &[
                "(a) M martingale under QF_T",
                "(b) E[xi 1{Ztilde_T<1}|F_T-] = 0 on {Z_T-<1}",
                "(c) M-M^tau martingale under QG_T",
            ],
            SuiteId::LpSelftest => &["verdict", "reference or permuted verdict", "reweighted verdict"],
        }
    }

    fn family(self) -> Family {
        if SuiteId::AFTER.contains(&self) {
            Family::After
        } else if matches!(self, SuiteId::Azema | SuiteId::JumpRatio | SuiteId::LpSelftest) {
            Family::Mixed
        } else {
            Family::Before
        }
    }

    /// Generation parameters for the `index`-th model: odd indices force a
    /// nonempty exceptional set, after-τ suites draw honest times only.
    pub fn model_params(self, base: &ModelGenParams, seed: u64, index: usize) -> ModelGenParams {
        let mut p = base.clone();
        p.seed = seed.wrapping_add(index as u64);
        match self.family() {
            Family::Before => {
                p.force_before_set = index % 2 == 1;
            }
            Family::After => {
                p.honest_only = true;
                p.force_after_set = index % 2 == 1;
            }
            Family::Mixed => match index % 4 {
                1 => p.force_before_set = true,
                2 => p.honest_only = true,
                3 => {
                    p.honest_only = true;
                    p.force_after_set = true;
                }
                _ => {}
            },
        }
        p
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Format(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case {
    pub label: String,
    pub truths: Vec<bool>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelOutcome {
    pub index: usize,
    pub seed: u64,
    pub digest: String,
    pub cases: Vec<Case>,
    pub error: Option<String>,
    /// Violations produced by proof witnesses, each LP-certified.
    pub witness_violations: usize,
    /// Sampled processes checked on the side where a condition holds.
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disagreement {
    pub index: usize,
    pub seed: u64,
    pub label: String,
    pub truths: Vec<bool>,
    pub error: Option<String>,
    pub model: ModelFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub suite: SuiteId,
    pub assertions: Vec<String>,
    pub seed: u64,
    pub params: ModelGenParams,
    pub models_tested: usize,
    pub cases: usize,
    pub agreements: usize,
    /// Truth vectors (as `TF..` strings) and how often each occurred.
    pub histogram: BTreeMap<String, usize>,
    pub witness_violations: usize,
    pub samples: usize,
    pub disagreements: Vec<Disagreement>,
    pub outcomes: Vec<ModelOutcome>,
    pub notes: Vec<String>,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty()
    }

    /// Cases whose first truth value is `true`.
    pub fn cases_with_first_true(&self) -> usize {
        self.outcomes.iter().flat_map(|o| &o.cases).filter(|c| c.truths.first() == Some(&true)).count()
    }
}

fn pattern(truths: &[bool]) -> String {
    truths.iter().map(|&b| if b { 'T' } else { 'F' }).collect()
}

const NOTES: [&str; 2] = [
    "universal statements over processes: proof witness when the condition fails, random samples when it holds",
    "on a discrete grid every stopping time is predictable, so the accessible and totally inaccessible variants coincide",
];

/// Runs `id` on `n_models` generated models. The report depends only on
/// `(id, n_models, seed, params)`, not on the thread count.
pub fn run_suite(id: SuiteId, n_models: usize, seed: u64, params: &ModelGenParams) -> TheoremReport {
    let mut outcomes: Vec<ModelOutcome> = (0..n_models)
        .into_par_iter()
        .map(|index| run_model(id, params, seed, index))
        .collect();
    outcomes.sort_by_key(|o| o.index);
    let mut histogram = BTreeMap::new();
    let mut disagreements = Vec::new();
    let (mut cases, mut agreements) = (0, 0);
    for o in &outcomes {
        for c in &o.cases {
            cases += 1;
            *histogram.entry(pattern(&c.truths)).or_insert(0) += 1;
            if c.ok {
                agreements += 1;
            }
        }
        let bad: Vec<&Case> = o.cases.iter().filter(|c| !c.ok).collect();
        if o.error.is_some() || !bad.is_empty() {
            let model = gen_model(&id.model_params(params, seed, o.index))
                .map(|m| ModelFile::from_model(&m))
                .ok();
            let mut push = |label: String, truths: Vec<bool>| {
                if let Some(model) = model.clone() {
                    disagreements.push(Disagreement {
                        index: o.index,
                        seed: o.seed,
                        label,
                        truths,
                        error: o.error.clone(),
                        model,
                    });
                }
            };
            if bad.is_empty() {
                push("model".into(), Vec::new());
            }
            for c in bad {
                push(c.label.clone(), c.truths.clone());
            }
            if model.is_none() {
                disagreements.push(Disagreement {
                    index: o.index,
                    seed: o.seed,
                    label: "generation".into(),
                    truths: Vec::new(),
                    error: o.error.clone(),
                    model: ModelFile::from_model(&Model::worked_example()),
                });
            }
        }
    }
    TheoremReport {
        suite: id,
        assertions: id.assertions().iter().map(|s| s.to_string()).collect(),
        seed,
        params: params.clone(),
        models_tested: n_models,
        cases,
        agreements,
        histogram,
        witness_violations: outcomes.iter().map(|o| o.witness_violations).sum(),
        samples: outcomes.iter().map(|o| o.samples).sum(),
        disagreements,
        outcomes,
        notes: NOTES.iter().map(|s| s.to_string()).collect(),
    }
}

fn run_model(id: SuiteId, base: &ModelGenParams, seed: u64, index: usize) -> ModelOutcome {
    let params = id.model_params(base, seed, index);
    let mut outcome = ModelOutcome {
        index,
        seed: params.seed,
        digest: String::new(),
        cases: Vec::new(),
        error: None,
        witness_violations: 0,
        samples: 0,
    };
    let model = match gen_model(&params) {
        Ok(m) => m,
        Err(e) => {
            outcome.error = Some(e.to_string());
            return outcome;
        }
    };
    outcome.digest = model_digest(&model);
    let result = model.prepare().and_then(|prep| {
        let mut ctx = Ctx { e: Env { p: prep }, rng: rng_for(params.seed, 1 + id as u64), out: &mut outcome };
        ctx.run(id)
    });
    if let Err(e) = result {
        outcome.error = Some(e.to_string());
    }
    outcome
}

/// Decides NUPBR and re-verifies the certificate: a violation must carry a
/// valid arbitrage, a positive verdict must yield a working deflator.
pub fn certified_check(x: &Process, h: &Filtration, measure: &Measure) -> Result<NupbrVerdict> {
    let verdict = nupbr_check(x, h, measure)?;
    match &verdict {
        NupbrVerdict::Violated { witness } => {
            if !witness.is_valid_certificate(x, h, measure) {
                return Err(Error::Internal(format!("invalid arbitrage certificate at t={}", witness.t)));
            }
        }
        NupbrVerdict::Holds { .. } => {
            if !deflator_from_densities(&verdict, x, h, measure)?.certifies(x, h, measure)? {
                return Err(Error::Internal("densities do not certify NUPBR".into()));
            }
        }
    }
    Ok(verdict)
}

fn holds(x: &Process, h: &Filtration, measure: &Measure) -> Result<bool> {
    Ok(certified_check(x, h, measure)?.holds())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Before,
    After,
}

/// The prepared model and everything derived from it without randomness.
struct Env<'a> {
    p: Prepared<'a>,
}

impl Env<'_> {
    fn m(&self) -> &Model {
        self.p.model
    }

    fn space(&self) -> &FiniteProbSpace {
        &self.p.model.space
    }

    fn f(&self) -> &Filtration {
        &self.p.model.f
    }

    fn g(&self) -> &Filtration {
        &self.p.g
    }

    fn horizon(&self) -> usize {
        self.p.model.horizon()
    }

    fn n(&self) -> usize {
        self.p.model.n_outcomes()
    }

    /// `Z̃_t(ω) = 0` before `τ`, `Z̃_t(ω) = 1` after it.
    fn extreme(&self, side: Side, t: usize, w: usize) -> bool {
        let zt = self.p.az.z_tilde_at(t, w);
        match side {
            Side::Before => zt.is_zero(),
            Side::After => zt.is_one(),
        }
    }

    /// `Z_{t-1} > 0` before `τ`, `Z_{t-1} < 1` after it.
    fn left_alive(&self, side: Side, t: usize, w: usize) -> bool {
        let zl = self.p.az.z_left(t, w);
        match side {
            Side::Before => zl.is_positive(),
            Side::After => zl < &Rational::one(),
        }
    }

    /// `Z_{t-1}` before `τ`, `1 - Z_{t-1}` after it.
    fn level(&self, side: Side, t: usize, w: usize) -> Rational {
        let zl = self.p.az.z_left(t, w);
        match side {
            Side::Before => zl.clone(),
            Side::After => Rational::one() - zl,
        }
    }

    fn in_set(&self, side: Side, t: usize, w: usize) -> bool {
        match side {
            Side::Before => self.p.az.in_before_set(t, w),
            Side::After => self.p.az.in_after_set(t, w),
        }
    }

    /// `X^τ` before, `X - X^τ` after.
    fn transform(&self, side: Side, x: &Process) -> Process {
        match side {
            Side::Before => stop(x, &self.m().tau),
            Side::After => after(x, &self.m().tau),
        }
    }

    /// `1_E - P(E | F_{T-})` with `E = {Z̃_T = 0}` (before) or `{Z̃_T = 1}` (after).
    fn witness_xi(&self, side: Side, pt: &PredictableTime) -> Vec<Rational> {
        let mut xi = vec![zero(); self.n()];
        for t in 1..=self.horizon() {
            let event: Vec<usize> = (0..self.n()).filter(|&w| self.extreme(side, t, w)).collect();
            let p = conditional_probability(&event, self.f().before(t), self.space());
            for w in (0..self.n()).filter(|&w| pt.time(w) == Some(t)) {
                let ind = if self.extreme(side, t, w) { Rational::one() } else { zero() };
                xi[w] = ind - &p[w];
            }
        }
        xi
    }

    fn restrict(&self, pt: &PredictableTime, xi: &[Rational], keep: impl Fn(usize, usize) -> bool) -> Vec<Rational> {
        (0..self.n())
            .map(|w| match pt.time(w) {
                Some(t) if keep(t, w) => xi[w].clone(),
                _ => zero(),
            })
            .collect()
    }

    /// `E[Y_t ΔS_t 1_{Z̃_t>0} | F_{t-1}] = 0` on `scope` (before), with
    /// `{Z̃_t<1}` after.
    fn identity_holds(&self, y: &Process, s: &Process, side: Side, scope: impl Fn(usize, usize) -> bool) -> bool {
        let space = self.space();
        (1..=self.horizon()).all(|t| {
            self.f().before(t).blocks().iter().all(|block| {
                if !scope(t, block[0]) {
                    return true;
                }
                (0..s.dim()).all(|k| {
                    block
                        .iter()
                        .filter(|&&w| !self.extreme(side, t, w))
                        .map(|&w| space.prob(w) * y.scalar_at(t, w) * &s.increment(t, w)[k])
                        .sum::<Rational>()
                        .is_zero()
                })
            })
        })
    }
}

/// Every grid time and one random predictable time.
fn jump_times(rng: &mut ChaCha8Rng, e: &Env) -> Result<Vec<(String, PredictableTime)>> {
    let mut out = Vec::new();
    for t in 1..=e.horizon() {
        out.push((format!("T={t}"), PredictableTime::deterministic(e.n(), t, e.f())?));
    }
    out.push(("T=random".into(), random_predictable_time(rng, e.f())));
    Ok(out)
}

fn centred_xi(
    rng: &mut ChaCha8Rng,
    e: &Env,
    pt: &PredictableTime,
    within: impl Fn(usize, usize) -> bool,
) -> Vec<Rational> {
    let mut xi = random_xi(rng, pt, e.f());
    centre_xi(&mut xi, pt, e.f(), e.space(), within);
    xi
}

/// A random F-martingale satisfying the deflation condition on the
/// exceptional set: its increments are either zero there, or centred
/// separately inside and outside it.
fn conditioned_martingale(rng: &mut ChaCha8Rng, e: &Env, side: Side, zero_inside: bool) -> Process {
    let (horizon, n) = (e.horizon(), e.n());
    let dim = rng.random_range(1..=2);
    let mut comps = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut rows = vec![vec![int(rng.random_range(-2..=2)); n]];
        for t in 1..=horizon {
            let mut inc = vec![zero(); n];
            for block in e.f().at(t).blocks() {
                let v = int(rng.random_range(-3..=3));
                for &w in block {
                    inc[w] = v.clone();
                }
            }
            for parent in e.f().before(t).blocks() {
                let (inside, outside): (Vec<usize>, Vec<usize>) =
                    parent.iter().partition(|&&w| e.in_set(side, t, w));
                if zero_inside {
                    for &w in &inside {
                        inc[w] = zero();
                    }
                } else if let Some(mean) = e.space().block_average(&inc, &inside) {
                    for &w in &inside {
                        inc[w] -= &mean;
                    }
                }
                if let Some(mean) = e.space().block_average(&inc, &outside) {
                    for &w in &outside {
                        inc[w] -= &mean;
                    }
                }
            }
            let next = rows[t - 1].iter().zip(&inc).map(|(a, b)| a + b).collect();
            rows.push(next);
        }
        comps.push(Process::scalar(horizon, n, |t, w| rows[t][w].clone()));
    }
    Process::stack(&comps).expect("same grid")
}

struct Ctx<'a, 'o> {
    e: Env<'a>,
    rng: ChaCha8Rng,
    out: &'o mut ModelOutcome,
}

impl Ctx<'_, '_> {
    fn push(&mut self, label: impl Into<String>, truths: Vec<bool>, ok: bool) {
        self.out.cases.push(Case { label: label.into(), truths, ok });
    }

    fn push_equivalence(&mut self, label: impl Into<String>, truths: Vec<bool>) {
        let ok = truths.windows(2).all(|w| w[0] == w[1]);
        self.push(label, truths, ok);
    }

    fn run(&mut self, id: SuiteId) -> Result<()> {
        match id {
            SuiteId::Azema => self.azema(),
            SuiteId::DeflatorBefore => self.deflator(Side::Before),
            SuiteId::DeflatorAfter => self.deflator(Side::After),
            SuiteId::JumpRatio => self.jump_ratio(),
            SuiteId::Main3 => self.single_jump_four_way(Side::Before),
            SuiteId::Corollary => self.single_time_condition(Side::Before),
            SuiteId::Main4 => self.truncated(Side::Before),
            SuiteId::PreservationBefore => self.preservation(Side::Before),
            SuiteId::Cruciallemma1 => self.three_way(Side::Before),
            SuiteId::Cruciallemma2 => self.single_jump_four_way(Side::After),
            SuiteId::Cruciallemma3 => self.single_time_condition(Side::After),
            SuiteId::Multijumps => self.truncated(Side::After),
            SuiteId::PreservationAfter => self.preservation(Side::After),
            SuiteId::Cruciallemma2singlejump => self.three_way(Side::After),
            SuiteId::LpSelftest => self.lp_selftest(),
        }
    }

    fn azema(&mut self) -> Result<()> {
        let e = &self.e;
        let (az, f, space) = (&e.p.az, e.f(), e.space());
        let m_mart = is_martingale(&az.m, f, space);
        let tower = (1..=e.horizon()).all(|t| {
            let zt: Vec<Rational> = (0..e.n()).map(|w| az.z_tilde_at(t, w).clone()).collect();
            let ce = conditional_expectation(&zt, f.before(t), space);
            (0..e.n()).all(|w| &ce[w] == az.z_left(t, w))
        });
        let chain = (1..=e.horizon()).all(|t| {
            (0..e.n()).all(|w| {
                let alive = !e.m().tau.lt(w, t);
                let zt_pos = az.z_tilde_at(t, w).is_positive();
                (!alive || zt_pos) && (!zt_pos || az.z_left(t, w).is_positive())
            })
        });
        let truths = vec![m_mart, tower, chain];
        let ok = truths.iter().all(|&b| b);
        self.push("azema", truths, ok);
        Ok(())
    }

    fn deflator(&mut self, side: Side) -> Result<()> {
        let e = &self.e;
        let (az, tau, f, g, space) = (&e.p.az, &e.m().tau, e.f(), e.g(), e.space());
        let (before, after_d) = match side {
            Side::Before => (Some(build_before(az, tau, f, g, space)?), None),
            Side::After => (None, Some(build_after(az, tau, f, g, space)?)),
        };
        let l = match (&before, &after_d) {
            (Some(d), _) => d.l_tilde.clone(),
            (_, Some(d)) => d.l_tilde_a.clone(),
            _ => unreachable!(),
        };
        let positive = (0..=e.horizon()).all(|t| (0..e.n()).all(|w| l.scalar_at(t, w).is_positive()));
        let mart = is_martingale(&l, g, space);
        let mut cases = vec![("deflator".to_string(), vec![positive, mart], positive && mart)];
        for (label, how) in [("M=random", None), ("M=zeroed", Some(true)), ("M=split-centred", Some(false))] {
            let m = match how {
                None => {
                    let dim = self.rng.random_range(1..=2);
                    random_martingale(&mut self.rng, f, space, dim)
                }
                Some(zero_inside) => conditioned_martingale(&mut self.rng, e, side, zero_inside),
            };
            let check = match (&before, &after_d) {
                (Some(d), _) => verify_deflation_before(&m, d, tau, az, f, g, space)?,
                (_, Some(d)) => verify_deflation_after(&m, d, tau, az, f, g, space)?,
                _ => unreachable!(),
            };
            let ly = deflated_increments_vanish(&l, &e.transform(side, &m), g, space);
            let ok = check.consistent() && ly == check.deflated_martingale;
            cases.push((label.to_string(), vec![check.condition, check.deflated_martingale, ly], ok));
        }
        self.out.samples += cases.len() - 1;
        for (label, truths, ok) in cases {
            self.push(label, truths, ok);
        }
        Ok(())
    }

    fn jump_ratio(&mut self) -> Result<()> {
        let e = &self.e;
        let (az, tau, f, g, space) = (&e.p.az, &e.m().tau, e.f(), e.g(), e.space());
        let before = build_before(az, tau, f, g, space)?;
        let after_applies =
            tau.times().iter().all(Option::is_some) && is_honest(tau, f) && z_tau_less_one(tau, az)?;
        let after_defl = if after_applies { Some(build_after(az, tau, f, g, space)?) } else { None };
        let report = jump_ratio_identities(&before, after_defl.as_ref(), az, tau, f, space);
        let b = report.before_failures.is_empty();
        self.push(format!("before ({} points)", report.before_checked), vec![b], b);
        if after_applies {
            let a = report.after_failures.is_empty();
            self.push(format!("after ({} points)", report.after_checked), vec![a], a);
        }
        Ok(())
    }

    /// `S = ξ 1_{Z_{T-}>0} 1_{[T,∞)}` before (resp. `ξ 1_{Z_{T-}<1}` after):
    /// NUPBR(G) of the transformed `S`, NUPBR(F) of `S̃`, and NUPBR(F) of `S`
    /// under the two single-jump measures.
    fn single_jump_four_way(&mut self, side: Side) -> Result<()> {
        let e = &self.e;
        let (az, f, g, space) = (&e.p.az, e.f(), e.g(), e.space());
        let mut cases = Vec::new();
        for (tl, pt) in jump_times(&mut self.rng, e)? {
            let kinds = [
                ("random", random_xi(&mut self.rng, &pt, f)),
                ("centred", centred_xi(&mut self.rng, e, &pt, |t, w| !e.extreme(side, t, w))),
                ("witness", e.witness_xi(side, &pt)),
                ("zero", vec![zero(); e.n()]),
            ];
            let (q1, q2) = match side {
                Side::Before => (qtilde(&pt, az, f, space)?, qt(&pt, az, f, space)?),
                Side::After => (qtilde_prime(&pt, az, f, space)?, qprime(&pt, az, f, space)?),
            };
            for (xl, xi) in kinds {
                let s = single_jump(&pt, &e.restrict(&pt, &xi, |t, w| e.left_alive(side, t, w)), f)?;
                let s_tilde = single_jump(&pt, &e.restrict(&pt, &xi, |t, w| !e.extreme(side, t, w)), f)?;
                let g_side = holds(&e.transform(side, &s), g, space)?;
                let tilde = holds(&s_tilde, f, space)?;
                let under_q1 = holds(&s, f, &q1.measure)?;
                let under_q2 = holds(&s, f, &q2.measure)?;
                let truths = match side {
                    Side::Before => vec![g_side, tilde, under_q1, under_q2],
                    Side::After => vec![g_side, under_q1, under_q2, tilde],
                };
                cases.push((format!("{tl}/xi={xl}"), truths));
            }
        }
        for (label, truths) in cases {
            self.push_equivalence(label, truths);
        }
        Ok(())
    }

    /// The single-jump three-way equivalences for martingales `ξ 1_{[T,∞)}`.
    fn three_way(&mut self, side: Side) -> Result<()> {
        let e = &self.e;
        let (az, tau, f, g, space) = (&e.p.az, &e.m().tau, e.f(), e.g(), e.space());
        let mut cases = Vec::new();
        for (tl, pt) in jump_times(&mut self.rng, e)? {
            let mut split = random_xi(&mut self.rng, &pt, f);
            centre_xi(&mut split, &pt, f, space, |t, w| e.extreme(side, t, w));
            centre_xi(&mut split, &pt, f, space, |t, w| !e.extreme(side, t, w));
            let kinds = [
                ("centred", centred_xi(&mut self.rng, e, &pt, |_, _| true)),
                ("split-centred", split),
                ("witness", e.witness_xi(side, &pt)),
                ("zero", vec![zero(); e.n()]),
            ];
            for (xl, xi) in kinds {
                let tw = match side {
                    Side::Before => verify_prop_before(&pt, &xi, az, tau, f, g, space)?,
                    Side::After => verify_prop_after(&pt, &xi, az, tau, f, g, space)?,
                };
                cases.push((format!("{tl}/xi={xl}"), vec![tw.a, tw.b, tw.c]));
            }
        }
        for (label, truths) in cases {
            self.push_equivalence(label, truths);
        }
        Ok(())
    }

    /// Runs the proof witness at `pt`: whether the transformed single jump
    /// keeps NUPBR(G), and whether the predictable finite-variation
    /// criterion agrees (the transformed witness is G-predictable).
    fn witness_passes(&mut self, side: Side, pt: &PredictableTime) -> Result<(bool, bool)> {
        let e = &self.e;
        let m = single_jump(pt, &e.witness_xi(side, pt), e.f())?;
        if !is_martingale(&m, e.f(), e.space()) {
            return Err(Error::Internal("witness is not an F-martingale".into()));
        }
        let x = e.transform(side, &m);
        let pass = holds(&x, e.g(), e.space())?;
        let fv = predictable_fv_check(&x, e.g(), e.space())?;
        if !pass {
            self.out.witness_violations += 1;
        }
        Ok((pass, fv.agrees() && fv.nupbr == pass))
    }

    /// `{Z̃_T = 0} ⊆ {Z_{T-} = 0}` (resp. `{Z̃_T = 1} ⊆ {Z_{T-} = 1}`) against
    /// NUPBR(G) of every stopped (resp. after-τ) single-jump martingale at `T`.
    fn single_time_condition(&mut self, side: Side) -> Result<()> {
        for (tl, pt) in jump_times(&mut self.rng, &self.e)? {
            let e = &self.e;
            let a = (0..e.n()).all(|w| match pt.time(w) {
                Some(t) => !(e.extreme(side, t, w) && e.left_alive(side, t, w)),
                None => true,
            });
            let (wit, fv_ok) = self.witness_passes(side, &pt)?;
            let mut b = wit;
            for _ in 0..SAMPLES_PER_MODEL {
                let e = &self.e;
                let xi = centred_xi(&mut self.rng, e, &pt, |_, _| true);
                let m = single_jump(&pt, &xi, e.f())?;
                b &= holds(&e.transform(side, &m), e.g(), e.space())?;
                self.out.samples += 1;
            }
            self.push(tl, vec![a, b], a == b && fv_ok);
        }
        Ok(())
    }

    fn preservation(&mut self, side: Side) -> Result<()> {
        let a = match side {
            Side::Before => self.e.p.sets.before.is_empty(),
            Side::After => self.e.p.sets.after.is_empty(),
        };
        let mut b = true;
        let mut fv_ok = true;
        for t in 1..=self.e.horizon() {
            let pt = PredictableTime::deterministic(self.e.n(), t, self.e.f())?;
            let (wit, fv) = self.witness_passes(side, &pt)?;
            b &= wit;
            fv_ok &= fv;
        }
        for _ in 0..SAMPLES_PER_MODEL {
            let e = &self.e;
            let dim = self.rng.random_range(1..=2);
            let x = random_nupbr_process(&mut self.rng, e.f(), e.space(), dim);
            b &= holds(&e.transform(side, &x), e.g(), e.space())?;
            self.out.samples += 1;
        }
        self.push("all grid times", vec![a, b], a == b && fv_ok);
        Ok(())
    }

    /// `(a) ⟺ (c)`, with `(b)` read off the deflator of each truncation.
    fn truncated(&mut self, side: Side) -> Result<()> {
        let e = &self.e;
        let mut deltas: Vec<Rational> = (1..=e.horizon())
            .flat_map(|t| (0..e.n()).map(move |w| (t, w)))
            .map(|(t, w)| e.level(side, t, w))
            .filter(|v| v.is_positive())
            .collect();
        deltas.sort();
        deltas.dedup();
        match deltas.first().cloned() {
            Some(min) => deltas.insert(0, min / int(2)),
            None => deltas.push(Rational::one()),
        }
        let dim = self.rng.random_range(1..=2);
        let x = random_nupbr_process(&mut self.rng, e.f(), e.space(), dim);
        let mut cases = Vec::new();
        for (label, s) in [("S", e.m().s.clone()), ("X", x)] {
            let a = holds(&e.transform(side, &s), e.g(), e.space())?;
            let (mut b, mut c) = (true, true);
            for delta in &deltas {
                let s_delta = s.filter_increments(|t, w| !e.extreme(side, t, w) && &e.level(side, t, w) >= delta);
                let verdict = certified_check(&s_delta, e.f(), e.space())?;
                let c_delta = verdict.holds();
                let b_delta = c_delta && {
                    let y = deflator_from_densities(&verdict, &s_delta, e.f(), e.space())?.y;
                    e.identity_holds(&y, &s, side, |t, w| &e.level(side, t, w) >= delta)
                };
                b &= b_delta;
                c &= c_delta;
            }
            cases.push((label, vec![a, b, c], a == c && b == c));
        }
        for (label, truths, ok) in cases {
            self.push(label, truths, ok);
        }
        Ok(())
    }

    fn lp_selftest(&mut self) -> Result<()> {
        let e = &self.e;
        let mut cases = Vec::new();
        for dim in 1..=2 {
            let x = random_staircase(&mut self.rng, e.f(), dim);
            let fv = predictable_fv_check(&x, e.f(), e.space())?;
            let q = random_equivalent_measure(&mut self.rng, e.space());
            let reweighted = holds(&x, e.f(), &q)?;
            let ok = fv.agrees() && reweighted == fv.nupbr;
            cases.push((format!("staircase d={dim}"), vec![fv.nupbr, fv.constant, reweighted], ok));
        }
        let mut perm: Vec<usize> = (0..e.n()).collect();
        perm.shuffle(&mut self.rng);
        let permuted = e.m().permuted(&perm);
        let pg = enlarge(&permuted.f, &permuted.tau);
        let q = random_equivalent_measure(&mut self.rng, e.space());
        let targets = [
            ("S under F", e.m().s.clone(), e.f(), permuted.s.clone(), &permuted.f),
            ("S^tau under G", stop(&e.m().s, &e.m().tau), e.g(), stop(&permuted.s, &permuted.tau), &pg),
        ];
        for (label, x, h, px, ph) in targets {
            let truths = vec![holds(&x, h, e.space())?, holds(&px, ph, &permuted.space)?, holds(&x, h, &q)?];
            let ok = truths.windows(2).all(|w| w[0] == w[1]);
            cases.push((label.to_string(), truths, ok));
        }
        for (label, truths, ok) in cases {
            self.push(label, truths, ok);
        }
        Ok(())
    }
}

/// Runs several suites with the same seed and parameters.
pub fn run_suites(ids: &[SuiteId], n_models: usize, seed: u64, params: &ModelGenParams) -> Vec<TheoremReport> {
    ids.iter().map(|&id| run_suite(id, n_models, seed, params)).collect()
}
