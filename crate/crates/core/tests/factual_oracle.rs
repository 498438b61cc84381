mod oracles;

use medsumm_core::factual::{aggregate_ratings, Criterion};
use medsumm_core::{
    cohen_kappa, factual_recall, mmfcm, multi_annotator_kappa, omission_and_hallucination, DisorderJudgment,
    FactAnnotation, HumanRatings,
};
use oracles::*;
use proptest::prelude::*;
use rand::Rng;

const UNIVERSE: [&str; 4] = ["fever", "cough", "skin rash", "swollen tonsils"];

fn judgment_name(j: DisorderJudgment) -> &'static str {
    match j {
        DisorderJudgment::FullyCorrect => "fully",
        DisorderJudgment::PartiallyCorrect => "partially",
        DisorderJudgment::Incorrect => "incorrect",
        DisorderJudgment::Absent => "absent",
    }
}

fn subset(mask: usize) -> Vec<&'static str> {
    (0..4).filter(|b| mask >> b & 1 == 1).map(|b| UNIVERSE[b]).collect()
}

#[test]
fn mmfcm_matches_direct_transcription_on_all_64_cases() {
    for mask in 0..16 {
        let generated = subset(mask);
        for j in DisorderJudgment::ALL {
            let a = FactAnnotation::new(UNIVERSE, &generated, j).unwrap();
            let want = mmfcm_direct(&UNIVERSE, &generated, judgment_name(j));
            assert!((mmfcm(&a).unwrap() - want).abs() <= 1e-12, "mask {mask:04b} {j:?}");
        }
    }
}

#[test]
fn mmfcm_against_partial_gold_sets() {
    for gold_mask in 1..16 {
        let gold = subset(gold_mask);
        for gen_mask in 0..16 {
            let generated = subset(gen_mask);
            for j in DisorderJudgment::ALL {
                let a = FactAnnotation::new(&gold, &generated, j).unwrap();
                let want = mmfcm_direct(&gold, &generated, judgment_name(j));
                assert!((mmfcm(&a).unwrap() - want).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn mmfcm_orders_judgments_and_counts() {
    for mask in 0..16 {
        let generated = subset(mask);
        let score = |j| mmfcm(&FactAnnotation::new(UNIVERSE, &generated, j).unwrap()).unwrap();
        let (f, p, i) = (score(DisorderJudgment::FullyCorrect), score(DisorderJudgment::PartiallyCorrect), score(DisorderJudgment::Incorrect));
        assert!(f > p && p > i);
        for s in [f, p, i, score(DisorderJudgment::Absent)] {
            assert!(s > -1.0 && s < 1.0);
        }
        for extra in 0..4 {
            if mask >> extra & 1 == 0 {
                let bigger = subset(mask | 1 << extra);
                for j in DisorderJudgment::ALL {
                    let before = mmfcm(&FactAnnotation::new(UNIVERSE, &generated, j).unwrap()).unwrap();
                    let after = mmfcm(&FactAnnotation::new(UNIVERSE, &bigger, j).unwrap()).unwrap();
                    assert!(after > before);
                }
            }
        }
    }
}

#[test]
fn recall_and_omission_sum_to_one() {
    for gold_mask in 1..16 {
        for gen_mask in 0..16 {
            let a = FactAnnotation::new(subset(gold_mask), subset(gen_mask), DisorderJudgment::Absent).unwrap();
            let (omission, hallucination) = omission_and_hallucination(&a).unwrap();
            assert_eq!(factual_recall(&a).unwrap() + omission, 1.0);
            assert!((0.0..=1.0).contains(&hallucination));
        }
    }
}

#[test]
fn kappa_hand_cases() {
    let a: Vec<usize> = [vec![0; 25], vec![1; 25]].concat();
    let b: Vec<usize> = [vec![0; 20], vec![1; 5], vec![0; 10], vec![1; 15]].concat();
    assert!((cohen_kappa(&a, &b).unwrap() - 0.4).abs() < 1e-15);
    assert!((kappa_from_confusion(&[vec![20, 5], vec![10, 15]]) - 0.4).abs() < 1e-15);
    assert_eq!(cohen_kappa(&a, &a).unwrap(), 1.0);
    assert!(cohen_kappa(&a, &b[..49]).is_err());
}

#[test]
fn independent_random_annotators_have_near_zero_kappa() {
    let mut rng = rng(10_000);
    let a: Vec<u8> = (0..10_000).map(|_| rng.random_range(0..3)).collect();
    let b: Vec<u8> = (0..10_000).map(|_| rng.random_range(0..3)).collect();
    assert!(cohen_kappa(&a, &b).unwrap().abs() < 0.05);
}

#[test]
fn multi_annotator_is_mean_of_pairs() {
    let lists = vec![vec![0, 1, 1, 0, 2], vec![0, 1, 0, 0, 2], vec![1, 1, 1, 0, 2]];
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let want = pairs.iter().map(|&(i, j)| cohen_kappa(&lists[i], &lists[j]).unwrap()).sum::<f64>() / 3.0;
    assert!((multi_annotator_kappa(&lists).unwrap() - want).abs() < 1e-15);
}

#[test]
fn rating_means() {
    let mut r = HumanRatings::default();
    r.push("s1", "a1", Criterion::Fluency, 4).unwrap();
    r.push("s1", "a2", Criterion::Fluency, 5).unwrap();
    assert!(r.push("s1", "a1", Criterion::Fluency, 6).is_err());
    let s = aggregate_ratings(&r, &[Criterion::Fluency, Criterion::Adequacy]);
    assert_eq!(s.means[&Criterion::Fluency], 4.5);
    assert_eq!(s.missing, [Criterion::Adequacy]);
}

proptest! {
    #[test]
    fn kappa_matches_confusion_oracle_and_is_symmetric(
        pairs in proptest::collection::vec((0usize..4, 0usize..4), 2..60),
    ) {
        let a: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        match (cohen_kappa(&a, &b), cohen_kappa(&b, &a)) {
            (Ok(k1), Ok(k2)) => {
                prop_assert!((k1 - k2).abs() < 1e-12);
                prop_assert!((k1 - kappa_from_confusion(&confusion(&a, &b, 4))).abs() < 1e-12);
            }
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "asymmetric outcome {:?}", other),
        }
    }

    #[test]
    fn kappa_is_invariant_under_relabeling(
        pairs in proptest::collection::vec((0usize..4, 0usize..4), 2..60),
        perm in Just([0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let a: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let ra: Vec<usize> = a.iter().map(|&x| perm[x]).collect();
        let rb: Vec<usize> = b.iter().map(|&x| perm[x]).collect();
        if let (Ok(k), Ok(kr)) = (cohen_kappa(&a, &b), cohen_kappa(&ra, &rb)) {
            prop_assert!((k - kr).abs() < 1e-12);
        }
    }
}
