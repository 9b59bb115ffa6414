use crowdfuse::fusion::{
    confidence_fusion, majority_vote, overall_fusion, weighted_fusion, Weight, WeightKind,
};
use crowdfuse::{Decision, DecisionVector, FusionMethod, FusionScales, WeightVector};
use proptest::prelude::*;

/// Direct transcription of the weighted rule with plain integers.
fn oracle(bits: &[u8], weights: &[i64]) -> u8 {
    let ones: i64 = bits.iter().zip(weights).map(|(&d, &w)| w * i64::from(d)).sum();
    let zeros: i64 = bits.iter().zip(weights).map(|(&d, &w)| w * i64::from(1 - d)).sum();
    if ones < zeros {
        0
    } else {
        1
    }
}

fn dv(bits: &[u8]) -> DecisionVector {
    DecisionVector::from_bits(&bits.iter().map(|&b| i64::from(b)).collect::<Vec<_>>()).unwrap()
}

fn wv(ws: &[i64]) -> WeightVector {
    WeightVector::new(WeightKind::Confidence, ws.iter().map(|&w| Weight::from_integer(w)).collect()).unwrap()
}

#[test]
fn exhaustive_k3_against_oracle() {
    let mut cases = 0;
    let mut ties = 0;
    for mask in 0u8..8 {
        let bits: Vec<u8> = (0..3).map(|i| (mask >> i) & 1).collect();
        for c0 in 1..=5u8 {
            for c1 in 1..=5u8 {
                for c2 in 1..=5u8 {
                    let c = [c0, c1, c2];
                    let got = confidence_fusion(&dv(&bits), &c, &FusionScales::default()).unwrap();
                    let ws: Vec<i64> = c.iter().map(|&x| i64::from(x)).collect();
                    assert_eq!(got.decision.bit(), oracle(&bits, &ws), "d={bits:?} c={c:?}");
                    if got.margin == Weight::from_integer(0) {
                        ties += 1;
                        assert_eq!(got.decision, Decision::Manipulated);
                    }
                    cases += 1;
                }
            }
        }
    }
    assert_eq!(cases, 1000);
    assert!(ties > 0);
}

prop_compose! {
    fn crowd()(k in (0usize..4).prop_map(|h| 2 * h + 1))
        (bits in prop::collection::vec(0u8..=1, k), ws in prop::collection::vec(1i64..=60, k))
        -> (Vec<u8>, Vec<i64>) { (bits, ws) }
}

proptest! {
    #[test]
    fn uniform_weights_reduce_to_majority((bits, _) in crowd(), w in 1i64..100) {
        let d = dv(&bits);
        let constant = wv(&vec![w; bits.len()]);
        prop_assert_eq!(weighted_fusion(&d, &constant).unwrap().decision, majority_vote(&d).decision);
    }

    #[test]
    fn positive_scaling_keeps_decision((bits, ws) in crowd(), num in 1i64..50, den in 1i64..50) {
        let d = dv(&bits);
        let w = wv(&ws);
        let scaled = w.scaled(Weight::new(num, den)).unwrap();
        prop_assert_eq!(weighted_fusion(&d, &scaled).unwrap().decision, weighted_fusion(&d, &w).unwrap().decision);
    }

    #[test]
    fn matches_oracle((bits, ws) in crowd()) {
        prop_assert_eq!(weighted_fusion(&dv(&bits), &wv(&ws)).unwrap().decision.bit(), oracle(&bits, &ws));
    }

    #[test]
    fn permutation_symmetry(
        (bits, c) in crowd(),
        e in prop::collection::vec(1u8..=5, 7),
        t in prop::collection::vec(1u32..=60, 7),
        perm_seed in any::<u64>(),
    ) {
        let k = bits.len();
        let c: Vec<u8> = c.iter().map(|&x| (x % 5 + 1) as u8).collect();
        let (e, t) = (&e[..k], &t[..k]);
        let mut order: Vec<usize> = (0..k).collect();
        // Fisher-Yates driven by the seed
        let mut s = perm_seed;
        for i in (1..k).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (s >> 33) as usize % (i + 1));
        }
        let p = |v: &[u8]| order.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let pt: Vec<u32> = order.iter().map(|&i| t[i]).collect();
        let s = FusionScales::default();
        let a = overall_fusion(&dv(&bits), &c, e, t, &s).unwrap();
        let b = overall_fusion(&dv(&p(&bits)), &p(&c), &p(e), &pt, &s).unwrap();
        prop_assert_eq!(a.decision, b.decision);
        prop_assert_eq!(majority_vote(&dv(&bits)).decision, majority_vote(&dv(&p(&bits))).decision);
    }

    #[test]
    fn flipping_a_zero_to_one_never_lowers((bits, ws) in crowd(), idx in 0usize..7) {
        let i = idx % bits.len();
        prop_assume!(bits[i] == 0);
        let mut flipped = bits.clone();
        flipped[i] = 1;
        let before = weighted_fusion(&dv(&bits), &wv(&ws)).unwrap().decision;
        let after = weighted_fusion(&dv(&flipped), &wv(&ws)).unwrap().decision;
        prop_assert!(after >= before);
    }

    #[test]
    fn complement_flips_decision_off_ties((bits, ws) in crowd()) {
        let d = dv(&bits);
        let w = wv(&ws);
        let out = weighted_fusion(&d, &w).unwrap();
        prop_assume!(out.margin != Weight::from_integer(0));
        let comp = weighted_fusion(&d.complement(), &w).unwrap();
        prop_assert_eq!(comp.decision, out.decision.complement());
        prop_assert_eq!(comp.margin, -out.margin);
    }

    #[test]
    fn majority_vote_never_ties((bits, _) in crowd()) {
        let mv = majority_vote(&dv(&bits));
        prop_assert_ne!(mv.margin, Weight::from_integer(0));
        prop_assert_eq!(mv.method, FusionMethod::MV);
    }
}
