//! A complete finite model: space, base filtration, price process and random time.

use crate::error::{Error, Result};
use crate::process::Process;
use crate::random_time::{azema, enlarge, exceptional_sets, AzemaData, ExceptionalSets, RandomTime};
use crate::rational::{int, zero};
use crate::space::{Filtration, FiniteProbSpace, Partition};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub space: FiniteProbSpace,
    pub f: Filtration,
    pub s: Process,
    pub tau: RandomTime,
}

impl Model {
    /// Validates shapes and `F`-adaptedness of `S`.
    pub fn new(space: FiniteProbSpace, f: Filtration, s: Process, tau: RandomTime) -> Result<Self> {
        let n = space.n_outcomes();
        if f.n_outcomes() != n {
            return Err(Error::OutcomeMismatch { expected: n, found: f.n_outcomes() });
        }
        if tau.n_outcomes() != n {
            return Err(Error::OutcomeMismatch { expected: n, found: tau.n_outcomes() });
        }
        s.check_adapted(&f)?;
        Ok(Model { space, f, s, tau })
    }

    pub fn horizon(&self) -> usize {
        self.f.horizon()
    }

    pub fn n_outcomes(&self) -> usize {
        self.space.n_outcomes()
    }

    /// The two-outcome worked example: uniform `P`, `T = 1`, `F_1` discrete,
    /// `ΔS_1 = (1, -1)`, `τ = (1, 0)`.
    pub fn worked_example() -> Model {
        let space = FiniteProbSpace::uniform(2).expect("valid");
        let f = Filtration::new(vec![Partition::trivial(2), Partition::discrete(2)]).expect("valid");
        let s = Process::scalar(1, 2, |t, w| match (t, w) {
            (0, _) => zero(),
            (_, 0) => int(1),
            _ => int(-1),
        });
        Model::new(space, f, s, RandomTime::new(vec![Some(1), Some(0)])).expect("valid")
    }

    /// Derived objects used by every check: Azéma data, `G` and the exceptional sets.
    pub fn prepare(&self) -> Result<Prepared<'_>> {
        let az = azema(&self.tau, &self.f, &self.space)?;
        let g = enlarge(&self.f, &self.tau);
        let sets = exceptional_sets(&az);
        Ok(Prepared { model: self, az, g, sets })
    }

    /// The same model with outcomes renamed by `perm` (old index -> new index).
    pub fn permuted(&self, perm: &[usize]) -> Model {
        let mut probs = vec![zero(); perm.len()];
        for (old, &new) in perm.iter().enumerate() {
            probs[new] = self.space.prob(old).clone();
        }
        Model {
            space: FiniteProbSpace::new(probs).expect("permutation keeps a valid space"),
            f: self.f.permuted(perm),
            s: self.s.permuted(perm),
            tau: self.tau.permuted(perm),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Prepared<'a> {
    pub model: &'a Model,
    pub az: AzemaData,
    pub g: Filtration,
    pub sets: ExceptionalSets,
}
