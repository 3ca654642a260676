mod common;

use common::exact_metrics;
use handuse::metrics::*;
use proptest::prelude::*;

fn confusion() -> impl Strategy<Value = ConfusionCounts> {
    (0u64..500, 0u64..500, 0u64..500, 0u64..500)
        .prop_filter("non-empty", |(a, b, c, d)| a + b + c + d > 0)
        .prop_map(|(tp, fp, fn_, tn)| ConfusionCounts::new(tp, fp, fn_, tn))
}

proptest! {
    #[test]
    fn matches_rational_oracle(cm in confusion()) {
        let m = metric_set(&cm).unwrap();
        let want = exact_metrics(cm.tp, cm.fp, cm.fn_, cm.tn);
        for (got, want) in [m.mcc, m.f1, m.precision, m.recall, m.accuracy].into_iter().zip(want) {
            prop_assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn bounded(cm in confusion()) {
        let m = metric_set(&cm).unwrap();
        prop_assert!((-1.0..=1.0).contains(&m.mcc));
        for v in [m.f1, m.precision, m.recall, m.accuracy] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn micro_ignores_how_counts_are_split(cms in proptest::collection::vec(confusion(), 1..8)) {
        let pooled: ConfusionCounts = cms.iter().copied().sum();
        prop_assert_eq!(micro_average(&cms).unwrap(), metric_set(&pooled).unwrap());
        let mut rev = cms.clone();
        rev.reverse();
        prop_assert_eq!(micro_average(&rev).unwrap(), micro_average(&cms).unwrap());
    }

    #[test]
    fn macro_is_order_free_with_sample_sd(cms in proptest::collection::vec(confusion(), 2..8)) {
        let sets: Vec<MetricSet> = cms.iter().map(|c| metric_set(c).unwrap()).collect();
        let a = macro_average(&sets).unwrap();
        let mut rev = sets.clone();
        rev.reverse();
        let b = macro_average(&rev).unwrap();
        prop_assert!((a.mean.mcc - b.mean.mcc).abs() < 1e-12);
        let n = sets.len() as f64;
        let mean = sets.iter().map(|s| s.f1).sum::<f64>() / n;
        let var = sets.iter().map(|s| (s.f1 - mean).powi(2)).sum::<f64>() / (n - 1.0);
        prop_assert!((a.sd.f1 - var.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn record_builds_the_same_table(pairs in proptest::collection::vec(any::<(bool, bool)>(), 1..200)) {
        let cm = ConfusionCounts::from_pairs(pairs.iter().copied());
        let tp = pairs.iter().filter(|p| p.0 && p.1).count() as u64;
        let tn = pairs.iter().filter(|p| !p.0 && !p.1).count() as u64;
        prop_assert_eq!((cm.tp, cm.tn, cm.total()), (tp, tn, pairs.len() as u64));
    }

    #[test]
    fn kappa_and_pabak_bounded(cells in proptest::collection::vec(0u64..50, 4)) {
        prop_assume!(cells.iter().sum::<u64>() > 0);
        let t = AgreementTable::new(vec![cells[..2].to_vec(), cells[2..].to_vec()]).unwrap();
        let k = cohens_kappa(&t);
        prop_assert!((-1.0..=1.0).contains(&k));
        prop_assert!((-1.0..=1.0).contains(&pabak(&t)));
        let flipped = AgreementTable::new(vec![vec![cells[0], cells[2]], vec![cells[1], cells[3]]]).unwrap();
        prop_assert!((cohens_kappa(&flipped) - k).abs() < 1e-12);
    }
}

#[test]
fn single_participant_sd_is_zero_and_flagged() {
    let s = metric_set(&ConfusionCounts::new(3, 1, 1, 5)).unwrap();
    let m = macro_average(&[s]).unwrap();
    assert_eq!(m.sd.mcc, 0.0);
    assert!(!m.sd_defined);
}

#[test]
fn undefined_mcc_is_zero_and_counted() {
    let s = metric_set(&ConfusionCounts::new(0, 0, 0, 10)).unwrap();
    assert_eq!(s.mcc, 0.0);
    assert!(s.mcc_undefined);
    assert_eq!(macro_average(&[s, s]).unwrap().mcc_undefined_count, 2);
}
