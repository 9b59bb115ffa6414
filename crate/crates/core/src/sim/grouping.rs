use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::seeding::{self, Domain};

/// An odd-sized set of distinct examiners whose verdicts get fused together.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Crowd {
    pub member_ids: Vec<String>,
}

impl Crowd {
    pub fn k(&self) -> usize {
        self.member_ids.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupingPlan {
    pub k: usize,
    pub n_groups: usize,
    pub seed: u64,
}

impl GroupingPlan {
    pub fn new(k: usize, n_groups: usize, seed: u64) -> Result<Self, SimError> {
        if k.is_multiple_of(2) {
            return Err(SimError::InvalidPlan(format!("crowd size {k} must be odd and positive")));
        }
        if n_groups == 0 {
            return Err(SimError::InvalidPlan("n_groups must be at least 1".into()));
        }
        Ok(Self { k, n_groups, seed })
    }
}

/// Draws `plan.n_groups` crowds of `plan.k` distinct examiners.
///
/// Sampling is with replacement across crowds (an examiner can sit in many
/// crowds) and without replacement within one crowd. Members are listed in
/// population order. Group `g` uses its own stream derived from
/// `(seed, k, g)`, so plans with different `k` are independent even under the
/// same seed, and extending `n_groups` keeps earlier groups unchanged.
pub fn sample_groups<S: AsRef<str>>(
    population: &[S],
    plan: &GroupingPlan,
) -> Result<Vec<Crowd>, SimError> {
    let plan = GroupingPlan::new(plan.k, plan.n_groups, plan.seed)?;
    if population.len() < plan.k {
        return Err(SimError::InsufficientPopulation {
            needed: plan.k,
            available: population.len(),
        });
    }
    Ok((0..plan.n_groups)
        .map(|g| {
            let mut rng = seeding::stream(
                plan.seed,
                Domain::CrowdSampling,
                &[plan.k as u64, g as u64],
            );
            let mut picks = index::sample(&mut rng, population.len(), plan.k).into_vec();
            picks.sort_unstable();
            Crowd {
                member_ids: picks
                    .into_iter()
                    .map(|i| population[i].as_ref().to_owned())
                    .collect(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn full_size_groups_are_distinct_and_replayable() {
        let pop = ids(223);
        let plan = GroupingPlan::new(3, 1000, 99).unwrap();
        let a = sample_groups(&pop, &plan).unwrap();
        assert_eq!(a.len(), 1000);
        for c in &a {
            assert_eq!(c.k(), 3);
            assert_eq!(c.member_ids.iter().collect::<HashSet<_>>().len(), 3);
        }
        assert_eq!(a, sample_groups(&pop, &plan).unwrap());
        let other = sample_groups(&pop, &GroupingPlan::new(3, 1000, 100).unwrap()).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn exact_population_gives_identical_crowds() {
        let pop = ids(3);
        let groups = sample_groups(&pop, &GroupingPlan::new(3, 5, 1).unwrap()).unwrap();
        assert_eq!(groups.len(), 5);
        assert!(groups.iter().all(|c| c.member_ids == pop));
    }

    #[test]
    fn too_small_population() {
        let err = sample_groups(&ids(2), &GroupingPlan { k: 3, n_groups: 5, seed: 0 });
        assert!(matches!(
            err,
            Err(SimError::InsufficientPopulation { needed: 3, available: 2 })
        ));
    }

    #[test]
    fn invalid_plans() {
        assert!(GroupingPlan::new(4, 10, 0).is_err());
        assert!(GroupingPlan::new(0, 10, 0).is_err());
        assert!(GroupingPlan::new(3, 0, 0).is_err());
        assert!(sample_groups(&ids(10), &GroupingPlan { k: 2, n_groups: 1, seed: 0 }).is_err());
    }

    #[test]
    fn extending_n_groups_keeps_prefix() {
        let pop = ids(50);
        let short = sample_groups(&pop, &GroupingPlan::new(5, 10, 3).unwrap()).unwrap();
        let long = sample_groups(&pop, &GroupingPlan::new(5, 20, 3).unwrap()).unwrap();
        assert_eq!(short[..], long[..10]);
    }

    #[test]
    fn inclusion_is_uniform() {
        // each of 40 examiners should appear ~ n_groups * k / 40 times
        let n = 40usize;
        let pop = ids(n);
        let plan = GroupingPlan::new(5, 20_000, 11).unwrap();
        let groups = sample_groups(&pop, &plan).unwrap();
        let mut counts = vec![0usize; n];
        for c in &groups {
            for m in &c.member_ids {
                counts[m[1..].parse::<usize>().unwrap()] += 1;
            }
        }
        let p = plan.k as f64 / n as f64;
        let expected = plan.n_groups as f64 * p;
        let se = (plan.n_groups as f64 * p * (1.0 - p)).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - expected).abs() < 3.0 * se,
                "examiner {i}: {c} vs {expected} ± {se}"
            );
        }
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 39 degrees of freedom; the 99.9% quantile is about 72.1
        assert!(chi2 < 72.1, "chi-square {chi2}");
    }
}
