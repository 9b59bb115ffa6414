//! Closed-form and enumeration oracles, independent of the fusion code.
#![allow(dead_code)]

/// P(majority of k i.i.d. voters with accuracy p is correct), k odd.
pub fn binomial_majority(p: f64, k: u32) -> f64 {
    (k / 2 + 1..=k)
        .map(|j| choose(k, j) * p.powi(j as i32) * (1.0 - p).powi((k - j) as i32))
        .sum()
}

fn choose(n: u32, r: u32) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Expected MV and CF accuracy (in percent) for k i.i.d. examiners of
/// accuracy `p` whose confidence is drawn from `given_correct` /
/// `given_wrong`, with ground truth equally often 0 and 1 and weighted ties
/// going to 1. Enumerates every correctness pattern and confidence vector.
pub fn exact_mv_cf(p: f64, given_correct: &[f64], given_wrong: &[f64], k: usize) -> (f64, f64) {
    let levels = given_correct.len();
    let (mut mv, mut cf) = (0.0, 0.0);
    for truth in [0i64, 1] {
        for pattern in 0u32..(1 << k) {
            let correct: Vec<bool> = (0..k).map(|i| pattern >> i & 1 == 1).collect();
            let p_pattern: f64 = correct.iter().map(|&c| if c { p } else { 1.0 - p }).product();
            let votes: Vec<i64> = correct.iter().map(|&c| if c { truth } else { 1 - truth }).collect();
            let ones: i64 = votes.iter().sum();
            let mv_decision = if 2 * ones < k as i64 { 0 } else { 1 };
            if mv_decision == truth {
                mv += 0.5 * p_pattern;
            }
            let mut cf_hit = 0.0;
            for code in 0..levels.pow(k as u32) {
                let mut rest = code;
                let mut prob = 1.0;
                let mut margin = 0i64;
                for i in 0..k {
                    let level = rest % levels;
                    rest /= levels;
                    prob *= if correct[i] { given_correct[level] } else { given_wrong[level] };
                    let w = level as i64 + 1;
                    margin += if votes[i] == 1 { w } else { -w };
                }
                let cf_decision = if margin < 0 { 0 } else { 1 };
                if cf_decision == truth {
                    cf_hit += prob;
                }
            }
            cf += 0.5 * p_pattern * cf_hit;
        }
    }
    (100.0 * mv, 100.0 * cf)
}
