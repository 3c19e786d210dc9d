use std::collections::BTreeMap;

use proptest::prelude::*;

use nfseer::anfis::{AnfisNet, BellMf, Consequent, Domain};
use nfseer::bank::{default_specs, BankSettings, NfBank};
use nfseer::dataset::{split_kfold, Mode, ProjectRecord};
use nfseer::eval::{mann_whitney_u, mdmre, mmre, pred};
use nfseer::isotonic::isotonic_fit;
use nfseer::rating::{Base, Modifier, RatingLevel};
use nfseer::seer::{development_effort, effective_technology, lifecycle_effort, SeerConstants, SeerInputs};

fn level() -> impl Strategy<Value = RatingLevel> {
    (
        0..Base::ALL.len(),
        prop_oneof![Just(Modifier::Minus), Just(Modifier::None), Just(Modifier::Plus)],
    )
        .prop_map(|(i, m)| RatingLevel::new(Base::ALL[i], m))
}

fn positive() -> impl Strategy<Value = f64> {
    (-2.0f64..3.0).prop_map(|e| 10f64.powf(e))
}

fn paired_sample() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..30).prop_flat_map(|n| {
        (
            prop::collection::vec(positive(), n),
            prop::collection::vec(0.0f64..2000.0, n),
        )
    })
}

fn anchor_bank() -> &'static NfBank {
    use std::sync::OnceLock;
    static BANK: OnceLock<NfBank> = OnceLock::new();
    BANK.get_or_init(|| NfBank::init_from_anchors(default_specs(), &BankSettings::default()).unwrap())
}

fn project(id: usize, kloc: f64, ratings: BTreeMap<String, RatingLevel>) -> ProjectRecord {
    ProjectRecord {
        id: format!("p{id}"),
        source: "prop".into(),
        mode: Mode::Organic,
        size_kloc: kloc,
        actual_effort_pm: 1.0,
        ratings,
        staffing_complexity: None,
    }
}

/// Random ratings drawn from each parameter's own levels.
fn ratings() -> impl Strategy<Value = BTreeMap<String, RatingLevel>> {
    let choices: Vec<(String, Vec<RatingLevel>)> =
        anchor_bank().specs().map(|s| (s.name.clone(), s.levels())).collect();
    let picks = choices.iter().map(|(_, ls)| 0..ls.len()).collect::<Vec<_>>();
    picks.prop_map(move |idx| {
        choices
            .iter()
            .zip(idx)
            .map(|((name, levels), i)| (name.clone(), levels[i]))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rating_order_matches_ordinals(a in level(), b in level()) {
        prop_assert_eq!(a.cmp(&b), a.ordinal().total_cmp(&b.ordinal()));
        let back: RatingLevel = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
        prop_assert_eq!(RatingLevel::from_ordinal(a.ordinal()), Some(a));
    }

    #[test]
    fn effort_rises_with_size_and_staffing_and_falls_with_technology(
        se in positive(), d in 0.1f64..10.0, cte in positive(), bump in 1.001f64..3.0,
    ) {
        let c = SeerConstants::default();
        let base = SeerInputs { se, d, cte, ctb: 1.0 };
        let k = lifecycle_effort(&base, &c).unwrap();
        let bigger = SeerInputs { se: se * bump, ..base };
        let busier = SeerInputs { d: d * bump, ..base };
        let better = SeerInputs { cte: cte * bump, ..base };
        prop_assert!(lifecycle_effort(&bigger, &c).unwrap() > k);
        prop_assert!(lifecycle_effort(&busier, &c).unwrap() > k);
        prop_assert!(lifecycle_effort(&better, &c).unwrap() < k);
        let e = development_effort(k, &c).unwrap();
        prop_assert_eq!(e.e_person_months, 12.0 * e.e_person_years);
    }

    #[test]
    fn technology_scales_with_ctb_and_drops_with_multipliers(
        ctb in positive(), ms in prop::collection::vec(0.2f64..5.0, 1..8), s in 0.1f64..10.0, bump in 1.01f64..2.0,
    ) {
        let cte = effective_technology(ctb, ms.iter().copied()).unwrap();
        let scaled = effective_technology(ctb * s, ms.iter().copied()).unwrap();
        prop_assert!((scaled - s * cte).abs() <= 1e-12 * scaled.abs());
        let mut raised = ms.clone();
        raised[0] *= bump;
        prop_assert!(effective_technology(ctb, raised).unwrap() < cte);
    }

    #[test]
    fn estimate_is_the_composition_of_its_stages(kloc in 0.5f64..500.0, r in ratings()) {
        let bank = anchor_bank();
        let p = project(0, kloc, r);
        let ms = bank.multipliers_for(&p).unwrap();
        let cte = effective_technology(bank.ctb(), ms.values().copied()).unwrap();
        let k = lifecycle_effort(&SeerInputs { se: kloc, d: bank.d(), cte, ctb: bank.ctb() }, bank.constants()).unwrap();
        let pm = development_effort(k, bank.constants()).unwrap().e_person_months;
        prop_assert_eq!(bank.predict(&p).unwrap(), pm);
    }

    #[test]
    fn estimate_is_linear_in_ctb_power(kloc in 0.5f64..500.0, r in ratings(), s in 0.2f64..5.0) {
        // E is proportional to ctb^-1.2.
        let bank = anchor_bank();
        let p = project(0, kloc, r);
        let e = bank.predict(&p).unwrap();
        let scaled = bank.with_ctb(bank.ctb() * s).unwrap().predict(&p).unwrap();
        prop_assert!((scaled - e * s.powf(-1.2)).abs() <= 1e-9 * e);
    }

    #[test]
    fn pred_is_monotone_in_threshold((a, p) in paired_sample(), x in 0.01f64..2.0, dx in 0.0f64..1.0) {
        let lo = pred(&a, &p, x).unwrap();
        let hi = pred(&a, &p, x + dx).unwrap();
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!(lo <= hi);
        prop_assert_eq!(pred(&a, &p, f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn relative_errors_are_scale_free((a, p) in paired_sample(), s in positive()) {
        let sa: Vec<f64> = a.iter().map(|v| v * s).collect();
        let sp: Vec<f64> = p.iter().map(|v| v * s).collect();
        let m = mmre(&a, &p).unwrap();
        prop_assert!((mmre(&sa, &sp).unwrap() - m).abs() <= 1e-9 * m.max(1.0));
        let md = mdmre(&a, &p).unwrap();
        prop_assert!((mdmre(&sa, &sp).unwrap() - md).abs() <= 1e-9 * md.max(1.0));
    }

    #[test]
    fn mann_whitney_is_symmetric(
        a in prop::collection::vec(0u8..20, 1..14), b in prop::collection::vec(0u8..20, 1..14),
    ) {
        let (a, b): (Vec<f64>, Vec<f64>) = (a.into_iter().map(f64::from).collect(), b.into_iter().map(f64::from).collect());
        let ab = mann_whitney_u(&a, &b).unwrap();
        let ba = mann_whitney_u(&b, &a).unwrap();
        prop_assert_eq!(ab.u_a + ab.u_b, (a.len() * b.len()) as f64);
        prop_assert_eq!(ab.u, ba.u);
        prop_assert!((ab.p_two_sided - ba.p_two_sided).abs() <= 1e-12);
        prop_assert!(ab.p_two_sided > 0.0 && ab.p_two_sided <= 1.0);
    }

    #[test]
    fn folds_partition_the_records(n in 2usize..60, k in 2usize..12, seed in any::<u64>(), stratify in any::<bool>()) {
        prop_assume!(k <= n);
        let records: Vec<ProjectRecord> = (0..n).map(|i| project(i, 10.0, BTreeMap::new())).collect();
        let plan = split_kfold(&records, k, seed, stratify).unwrap();
        let folds = plan.fold_indices(&records).unwrap();
        let mut seen: Vec<usize> = folds.concat();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
        let sizes = plan.fold_sizes();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        prop_assert_eq!(plan, split_kfold(&records, k, seed, stratify).unwrap());
    }

    #[test]
    fn isotonic_fit_is_a_monotone_projection(
        values in prop::collection::vec(-10.0f64..10.0, 1..25), increasing in any::<bool>(),
    ) {
        let w = vec![1.0; values.len()];
        let fit = isotonic_fit(&values, &w, increasing);
        for pair in fit.windows(2) {
            let ordered = if increasing { pair[0] <= pair[1] + 1e-12 } else { pair[0] + 1e-12 >= pair[1] };
            prop_assert!(ordered);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        prop_assert!((mean(&fit) - mean(&values)).abs() <= 1e-9);
        let again = isotonic_fit(&fit, &w, increasing);
        for (x, y) in again.iter().zip(&fit) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn anfis_output_is_a_convex_mix_of_rule_outputs(
        params in prop::collection::vec((0.3f64..2.0, 1.0f64..4.0, -1.0f64..1.0, -2.0f64..2.0), 1..6),
        x in 0.0f64..6.0, factor in 0.1f64..5.0,
    ) {
        let n = params.len();
        let mfs = params
            .iter()
            .enumerate()
            .map(|(i, &(a, b, _, _))| BellMf::new(a, b, 6.0 * (i as f64 + 0.5) / n as f64).unwrap())
            .collect();
        let qs: Vec<Consequent> = params.iter().map(|&(_, _, s, c)| Consequent::new(s, c)).collect();
        let net = AnfisNet::new(mfs, qs.clone(), Domain::new(0.0, 6.0).unwrap()).unwrap();
        let (y, trace) = net.forward(x).unwrap();
        prop_assert!((trace.normalized.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let outs: Vec<f64> = qs.iter().map(|q| q.at(x)).collect();
        let lo = outs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = outs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(y >= lo - 1e-9 && y <= hi + 1e-9);
        prop_assert!((net.scaled(factor).output(x).unwrap() - factor * y).abs() <= 1e-9 * (1.0 + y.abs()));
    }
}
