//! Finite probability spaces, partitions and filtrations.
//!
//! A σ-field on a finite outcome set is identified with the partition into
//! its atoms. Atoms are kept as sorted outcome-index lists and the blocks of
//! a partition are ordered by their smallest outcome, so two partitions are
//! equal exactly when they generate the same σ-field.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, zero, Rational};

/// Nonnegative weights over a finite outcome set summing to one.
///
/// Outcomes of zero mass are kept and form the null set; conditional
/// expectations are only defined on atoms of positive mass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measure {
    probs: Vec<Rational>,
}

impl Measure {
    pub fn new(probs: Vec<Rational>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidSpace("no outcomes".into()));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| p.is_negative()) {
            return Err(Error::InvalidSpace(format!(
                "outcome {i} has negative mass {}",
                format_rational(p)
            )));
        }
        let total: Rational = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidSpace(format!(
                "masses sum to {}, not 1",
                format_rational(&total)
            )));
        }
        Ok(Measure { probs })
    }

    pub fn n_outcomes(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, outcome: usize) -> &Rational {
        &self.probs[outcome]
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn mass(&self, outcomes: &[usize]) -> Rational {
        outcomes.iter().map(|&w| &self.probs[w]).sum()
    }

    pub fn in_support(&self, outcome: usize) -> bool {
        self.probs[outcome].is_positive()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.probs.len()).filter(|&w| self.in_support(w)).collect()
    }

    pub fn null_set(&self) -> Vec<usize> {
        (0..self.probs.len()).filter(|&w| !self.in_support(w)).collect()
    }

    pub fn is_equivalent_to_full(&self) -> bool {
        self.probs.iter().all(Signed::is_positive)
    }

    pub fn expectation(&self, x: &[Rational]) -> Rational {
        self.probs.iter().zip(x).map(|(p, v)| p * v).sum()
    }

    /// Average of `x` over `block`; `None` when the block carries no mass.
    pub fn block_average(&self, x: &[Rational], block: &[usize]) -> Option<Rational> {
        let mass = self.mass(block);
        if mass.is_zero() {
            return None;
        }
        let weighted: Rational = block.iter().map(|&w| &self.probs[w] * &x[w]).sum();
        Some(weighted / mass)
    }

    /// `E[X | pi]` outcome by outcome; `None` on atoms of zero mass.
    pub fn cond_exp(&self, x: &[Rational], pi: &Partition) -> Vec<Option<Rational>> {
        debug_assert_eq!(x.len(), self.n_outcomes());
        let mut out = vec![None; x.len()];
        for block in pi.blocks() {
            let avg = self.block_average(x, block);
            for &w in block {
                out[w] = avg.clone();
            }
        }
        out
    }
}

/// A finite probability space: every outcome has strictly positive mass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteProbSpace {
    measure: Measure,
}

impl FiniteProbSpace {
    pub fn new(probs: Vec<Rational>) -> Result<Self> {
        if let Some((i, _)) = probs.iter().enumerate().find(|(_, p)| !p.is_positive()) {
            return Err(Error::InvalidSpace(format!("outcome {i} has no positive mass")));
        }
        Ok(FiniteProbSpace { measure: Measure::new(probs)? })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        let n_i64 = i64::try_from(n).map_err(|_| Error::InvalidSpace("too many outcomes".into()))?;
        if n == 0 {
            return Err(Error::InvalidSpace("no outcomes".into()));
        }
        Self::new(vec![crate::rational::ratio(1, n_i64); n])
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn n_outcomes(&self) -> usize {
        self.measure.n_outcomes()
    }

    pub fn prob(&self, outcome: usize) -> &Rational {
        self.measure.prob(outcome)
    }
}

impl std::ops::Deref for FiniteProbSpace {
    type Target = Measure;
    fn deref(&self) -> &Measure {
        &self.measure
    }
}

/// Disjoint nonempty blocks covering `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        if blocks.iter().any(Vec::is_empty) {
            return Err(Error::InvalidPartition("empty block".into()));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        let mut block_of = vec![usize::MAX; n];
        for (k, b) in blocks.iter().enumerate() {
            for w in b.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::InvalidPartition(format!("outcome {} repeated", w[0])));
                }
            }
            for &w in b {
                if w >= n {
                    return Err(Error::InvalidPartition(format!("outcome {w} out of range")));
                }
                if block_of[w] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("outcome {w} in two blocks")));
                }
                block_of[w] = k;
            }
        }
        if let Some(w) = block_of.iter().position(|&k| k == usize::MAX) {
            return Err(Error::InvalidPartition(format!("outcome {w} not covered")));
        }
        Ok(Partition { blocks, block_of })
    }

    pub fn trivial(n: usize) -> Self {
        Partition { blocks: vec![(0..n).collect()], block_of: vec![0; n] }
    }

    pub fn discrete(n: usize) -> Self {
        Partition { blocks: (0..n).map(|w| vec![w]).collect(), block_of: (0..n).collect() }
    }

    /// Groups outcomes by an arbitrary key.
    pub fn from_labels<K: Ord>(labels: &[K]) -> Self {
        let mut order: Vec<usize> = (0..labels.len()).collect();
        order.sort_by(|&a, &b| labels[a].cmp(&labels[b]).then(a.cmp(&b)));
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for w in order {
            match blocks.last_mut() {
                Some(b) if labels[b[0]] == labels[w] => b.push(w),
                _ => blocks.push(vec![w]),
            }
        }
        Partition::new(labels.len(), blocks).expect("labels induce a partition")
    }

    pub fn n_outcomes(&self) -> usize {
        self.block_of.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_index(&self, outcome: usize) -> usize {
        self.block_of[outcome]
    }

    pub fn block_containing(&self, outcome: usize) -> &[usize] {
        &self.blocks[self.block_of[outcome]]
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.n_outcomes() == coarser.n_outcomes()
            && self.blocks.iter().all(|b| {
                let k = coarser.block_of[b[0]];
                b.iter().all(|&w| coarser.block_of[w] == k)
            })
    }

    /// True when `x` is constant on every block.
    pub fn measurable<T: PartialEq>(&self, x: &[T]) -> bool {
        self.first_non_measurable(x).is_none()
    }

    pub fn first_non_measurable<T: PartialEq>(&self, x: &[T]) -> Option<usize> {
        self.blocks
            .iter()
            .find_map(|b| b.iter().copied().find(|&w| x[w] != x[b[0]]))
    }

    /// Common refinement of two partitions.
    pub fn meet(&self, other: &Partition) -> Partition {
        let labels: Vec<(usize, usize)> =
            (0..self.n_outcomes()).map(|w| (self.block_of[w], other.block_of[w])).collect();
        Partition::from_labels(&labels)
    }

    /// The same partition with outcomes renamed by `perm` (old index -> new index).
    pub fn permuted(&self, perm: &[usize]) -> Partition {
        let blocks = self.blocks.iter().map(|b| b.iter().map(|&w| perm[w]).collect()).collect();
        Partition::new(self.n_outcomes(), blocks).expect("permutation of a partition")
    }
}

/// Refining partitions indexed by `t = 0..=horizon`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filtration {
    partitions: Vec<Partition>,
}

impl Filtration {
    pub fn new(partitions: Vec<Partition>) -> Result<Self> {
        let Some(first) = partitions.first() else {
            return Err(Error::InvalidPartition("filtration needs at least time 0".into()));
        };
        let n = first.n_outcomes();
        if let Some(p) = partitions.iter().find(|p| p.n_outcomes() != n) {
            return Err(Error::OutcomeMismatch { expected: n, found: p.n_outcomes() });
        }
        refine_check(&partitions)?;
        Ok(Filtration { partitions })
    }

    /// Trivial at every time up to the horizon.
    pub fn trivial(n: usize, horizon: usize) -> Self {
        Filtration { partitions: vec![Partition::trivial(n); horizon + 1] }
    }

    pub fn horizon(&self) -> usize {
        self.partitions.len() - 1
    }

    pub fn n_outcomes(&self) -> usize {
        self.partitions[0].n_outcomes()
    }

    pub fn at(&self, t: usize) -> &Partition {
        &self.partitions[t]
    }

    /// Partition of the predictable σ-field at `t`: `F_{t-1}`, or `F_0` at `t = 0`.
    pub fn before(&self, t: usize) -> &Partition {
        &self.partitions[t.saturating_sub(1)]
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    /// True when each partition of `self` refines the same-time partition of `other`.
    pub fn refines(&self, other: &Filtration) -> bool {
        self.horizon() == other.horizon()
            && self.partitions.iter().zip(&other.partitions).all(|(a, b)| a.refines(b))
    }

    pub fn permuted(&self, perm: &[usize]) -> Filtration {
        Filtration { partitions: self.partitions.iter().map(|p| p.permuted(perm)).collect() }
    }
}

/// Checks that `partitions[t + 1]` refines `partitions[t]` for every `t`,
/// reporting the first offending time.
pub fn refine_check(partitions: &[Partition]) -> Result<()> {
    match partitions.windows(2).position(|w| !w[1].refines(&w[0])) {
        Some(t) => Err(Error::NotRefining { t }),
        None => Ok(()),
    }
}

/// `E[X | pi]` under a space with full support.
pub fn conditional_expectation(
    x: &[Rational],
    pi: &Partition,
    space: &FiniteProbSpace,
) -> Vec<Rational> {
    space
        .cond_exp(x, pi)
        .into_iter()
        .map(|v| v.expect("blocks of a finite probability space carry mass"))
        .collect()
}

/// `P(A | pi)` for an outcome set `A`.
pub fn conditional_probability(
    event: &[usize],
    pi: &Partition,
    space: &FiniteProbSpace,
) -> Vec<Rational> {
    conditional_expectation(&indicator(space.n_outcomes(), event), pi, space)
}

pub fn indicator(n: usize, event: &[usize]) -> Vec<Rational> {
    let mut x = vec![zero(); n];
    for &w in event {
        x[w] = Rational::one();
    }
    x
}

/// Applies `density` (w.r.t. `space`) and returns the new measure.
///
/// Outcomes given zero density stay in the outcome set as the null set of the
/// returned measure; check [`Measure::is_equivalent_to_full`] to tell an
/// equivalent change of measure from a merely absolutely continuous one.
pub fn reweight(space: &Measure, density: &[Rational]) -> Result<Measure> {
    if density.len() != space.n_outcomes() {
        return Err(Error::OutcomeMismatch { expected: space.n_outcomes(), found: density.len() });
    }
    if let Some((i, d)) = density.iter().enumerate().find(|(_, d)| d.is_negative()) {
        return Err(Error::InvalidDensity(format!(
            "negative density {} at outcome {i}",
            format_rational(d)
        )));
    }
    let total = space.expectation(density);
    if !total.is_one() {
        return Err(Error::InvalidDensity(format!(
            "density integrates to {}, not 1",
            format_rational(&total)
        )));
    }
    Measure::new(space.probs().iter().zip(density).map(|(p, d)| p * d).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn two_point() -> FiniteProbSpace {
        FiniteProbSpace::uniform(2).unwrap()
    }

    #[test]
    fn rejects_bad_spaces() {
        assert!(FiniteProbSpace::new(vec![ratio(1, 2), ratio(1, 3)]).is_err());
        assert!(FiniteProbSpace::new(vec![int(1), int(0)]).is_err());
        assert!(Measure::new(vec![int(1), int(0)]).is_ok());
        assert!(Measure::new(vec![int(2), int(-1)]).is_err());
    }

    #[test]
    fn conditional_expectation_extremes() {
        let space = FiniteProbSpace::new(vec![ratio(1, 4), ratio(1, 4), ratio(1, 2)]).unwrap();
        let x = vec![int(4), int(0), int(2)];
        let mean = space.expectation(&x);
        assert_eq!(conditional_expectation(&x, &Partition::trivial(3), &space), vec![mean; 3]);
        assert_eq!(conditional_expectation(&x, &Partition::discrete(3), &space), x);
    }

    #[test]
    fn weighted_average_by_hand() {
        let x = vec![int(3), int(1)];
        assert_eq!(conditional_expectation(&x, &Partition::trivial(2), &two_point()), vec![int(2); 2]);
    }

    #[test]
    fn conditional_probability_examples() {
        let s = two_point();
        let pi = Partition::trivial(2);
        assert_eq!(conditional_probability(&[0, 1], &pi, &s), vec![int(1); 2]);
        assert_eq!(conditional_probability(&[], &pi, &s), vec![int(0); 2]);
        assert_eq!(conditional_probability(&[0], &pi, &s), vec![ratio(1, 2); 2]);
    }

    #[test]
    fn refine_check_examples() {
        let n = 3;
        let constant = vec![Partition::trivial(n); 3];
        assert!(refine_check(&constant).is_ok());
        let coarsening = vec![
            Partition::trivial(n),
            Partition::discrete(n),
            Partition::new(n, vec![vec![0, 1], vec![2]]).unwrap(),
        ];
        assert_eq!(refine_check(&coarsening), Err(Error::NotRefining { t: 1 }));
        assert!(Filtration::new(vec![Partition::trivial(n), Partition::discrete(n)]).is_ok());
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 1]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 3], vec![1, 2]]).is_err());
        let p = Partition::new(3, vec![vec![2], vec![1, 0]]).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1], vec![2]]);
    }

    #[test]
    fn reweight_examples() {
        let s = two_point();
        let same = reweight(&s, &[int(1), int(1)]).unwrap();
        assert_eq!(&same, s.measure());
        let point = reweight(&s, &[int(2), int(0)]).unwrap();
        assert_eq!(point.probs(), &[int(1), int(0)]);
        assert_eq!(point.support(), vec![0]);
        assert!(!point.is_equivalent_to_full());
        let skew = reweight(&s, &[ratio(3, 2), ratio(1, 2)]).unwrap();
        assert_eq!(skew.probs(), &[ratio(3, 4), ratio(1, 4)]);
        assert!(reweight(&s, &[int(3), int(-1)]).is_err());
        assert!(reweight(&s, &[int(1), int(2)]).is_err());
    }

    #[test]
    fn cond_exp_restricts_to_support() {
        let q = Measure::new(vec![int(1), int(0), int(0)]).unwrap();
        let pi = Partition::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        let e = q.cond_exp(&[int(5), int(7), int(9)], &pi);
        assert_eq!(e, vec![Some(int(5)), Some(int(5)), None]);
    }
}
