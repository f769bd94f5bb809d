mod support;

use std::collections::BTreeSet;

use proptest::prelude::*;

use sattrust_core::engine::{labels_of, lalc, limited_universe, names_of, saturate, TrustStore};
use sattrust_core::labels::{GenLabel, LabelKind};
use sattrust_core::lang::{BdLPair, Form, Trustable};
use sattrust_core::semantics::{random_model_for, semantic_entails, Valuation};

use support::{oracle, oracle_free, random_store};

fn las_forms(store: &TrustStore) -> BTreeSet<Form> {
    store.itrust().iter().chain(store.ts()).cloned().collect()
}

#[test]
fn matches_the_oracle_on_fixed_seeds() {
    for seed in 0..40 {
        let store = random_store(seed);
        let r = saturate(&store);
        assert_eq!(r.resulta(), &oracle(&store), "seed {seed}");
        assert_eq!(r.resultb(), &oracle_free(&store), "seed {seed}");
    }
}

#[test]
fn every_recorded_step_rechecks() {
    for seed in 0..40 {
        let r = saturate(&random_store(seed));
        r.validate().unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        for f in r.resulta() {
            let tree = r.proof(f).unwrap();
            assert_eq!(&tree.conclusion, f);
            tree.verify(r.store()).unwrap();
        }
    }
}

#[test]
fn derived_statements_hold_in_models_of_the_store() {
    for seed in 0..30 {
        let store = random_store(seed);
        let r = saturate(&store);
        for mseed in 0..3 {
            let m = random_model_for(&store, seed * 31 + mseed, 3);
            let v = Valuation::new(&m);
            for a in store.assumptions() {
                for w in 0..m.world_count() {
                    assert!(v.satisfies(w, a).unwrap(), "seed {seed}/{mseed}: assumption {a} fails at {w}");
                }
            }
            for f in r.resulta() {
                assert!(
                    semantic_entails(&m, store.assumptions(), f).unwrap(),
                    "seed {seed}/{mseed}: {f} not entailed"
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn confinement_and_termination(seed in any::<u64>()) {
        let store = random_store(seed);
        let r = saturate(&store);
        let allowed = lalc(las_forms(&store).iter(), store.las());
        prop_assert!(labels_of(r.resultb().iter()).is_subset(&allowed));
        let mut names = names_of(las_forms(&store).iter());
        names.extend(store.las().iter().filter_map(|s| s.name().cloned()));
        prop_assert!(names_of(r.resultb().iter()).is_subset(&names));
        let u = limited_universe(&store);
        prop_assert!(r.resulta().is_subset(&u));
        prop_assert!(r.stats().iterations <= u.len() + 1);
        prop_assert!(store.itrust().is_subset(r.resulta()));
    }

    #[test]
    fn coherence_of_bound_and_sattestors(seed in any::<u64>()) {
        let r = saturate(&random_store(seed));
        let p = r.store().principal().clone();
        for f in r.resulta() {
            if let Form::Trusts { what: Trustable::BdL(pair), .. } = f {
                let bound = Form::trusts_bdl(p.clone(), BdLPair::bound(pair.id.clone()));
                prop_assert!(r.contains(&bound), "{} without {}", f, bound);
                if pair.label.kind == LabelKind::SattDel {
                    let satt = Form::trusts_bdl(
                        p.clone(),
                        BdLPair::new(pair.id.clone(), GenLabel::satt(pair.label.base.clone())),
                    );
                    prop_assert!(r.contains(&satt));
                }
            }
        }
    }

    #[test]
    fn more_announcements_never_remove_conclusions(seed in any::<u64>(), extra in any::<u64>()) {
        let store = random_store(seed);
        let donor = random_store(extra);
        let before = saturate(&store);
        let mut bigger = store.clone();
        for s in donor.ts() {
            bigger.add_says(s.clone()).unwrap();
        }
        let after = saturate(&bigger);
        prop_assert!(before.resulta().is_subset(after.resulta()));
    }

    #[test]
    fn resultb_is_the_sattestor_free_part(seed in any::<u64>()) {
        let r = saturate(&random_store(seed));
        let free: BTreeSet<Form> = r.resulta().iter().filter(|f| f.is_sattestor_free()).cloned().collect();
        prop_assert_eq!(r.resultb(), &free);
    }
}
