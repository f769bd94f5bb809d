//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod support;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use sattrust_core::chains::{chain_violations, explain, extract_chain, validate_chain, validate_explanation};
use sattrust_core::engine::{labels_of, lalc, limited_universe, saturate, Axiom, Justification, SaturationResult, TrustStore};
use sattrust_core::ingest::{header_files, load_signature_table, load_store, parse_header, SIGNATURE_TABLE};
use sattrust_core::labels::{GenLabel, Label, LabelKind};
use sattrust_core::lang::{Form, SataId, Trustable};
use sattrust_core::semantics::{check_axioms, random_model, AxiomBounds, ModelSizes};

const STORES: u64 = 200;

type Criterion = fn() -> Result<String, String>;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture_store(set: &str) -> TrustStore {
    let base = fixtures().join(set);
    let headers = base.join("headers");
    let table = load_signature_table(&headers.join(SIGNATURE_TABLE)).unwrap();
    let opt = |name: &str| {
        let p = base.join(name);
        p.exists().then_some(p)
    };
    load_store(opt("itrust.txt").as_deref(), opt("las.txt").as_deref(), Some(&headers), &table).unwrap()
}

fn f(s: &str) -> Form {
    Form::parse(s).unwrap()
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    if took < limit {
        Ok(())
    } else {
        Err(format!("took {took:?}, limit {limit:?}"))
    }
}

/// Trusted labels of one identity, rendered.
fn trusted_labels(r: &SaturationResult, id: &SataId) -> BTreeSet<String> {
    r.resulta()
        .iter()
        .filter_map(|f| match f {
            Form::Trusts { what: Trustable::BdL(p), .. } if &p.id == id => Some(p.label.to_string()),
            _ => None,
        })
        .collect()
}

fn worked_example() -> Result<String, String> {
    let start = Instant::now();
    let store = fixture_store("worked_example");
    let r = saturate(&store);
    let fbi = SataId::new("fbi.gov", "onion4");
    let got = trusted_labels(&r, &fbi);

    let mut want: BTreeSet<String> = ["USG:DOJ:FBI", "USG:DOJ", "USG", "bound"].iter().map(|s| s.to_string()).collect();
    let allowed = lalc(store.itrust().iter().chain(store.ts()), store.las());
    for g in &allowed {
        let b = g.base.to_string();
        if b == "USG:DOJ:FBI" || b.starts_with("USG:DOJ:FBI:") {
            want.insert(format!("sattestor({b})"));
            want.insert(format!("sattestor*({b})"));
        }
    }
    if got != want {
        return Err(format!("fbi.gov trusts {got:?}, expected {want:?}"));
    }
    if !r.contains(&f("P trusts (fbi.gov, onion4, USG:DOJ:FBI)")) {
        return Err("missing P trusts (fbi.gov, onion4, USG:DOJ:FBI)".into());
    }
    within(start, Duration::from_secs(1))?;
    Ok(format!("{} labels for fbi.gov", got.len()))
}

fn civil_liberties() -> Result<String, String> {
    let start = Instant::now();
    let r = saturate(&fixture_store("civil_liberties"));
    let target = f("P trusts (eff.org, onion8, civil_liberties)");
    if !r.contains(&target) {
        return Err(format!("{target} not derived"));
    }
    within(start, Duration::from_secs(1))?;
    Ok(format!("{} statements", r.resulta().len()))
}

fn micro_example() -> Result<String, String> {
    let start = Instant::now();
    let r = saturate(&fixture_store("micro"));
    let want: BTreeSet<Form> = [
        "(D1, O1) says (D2, O2, a:b)",
        "(D2, O2) says (D2, O2, a:b)",
        "P trusts (D1, O1, sattestor(a))",
        "P trusts (D1, O1, sattestor(a:b))",
        "P trusts (D1, O1) says (D2, O2, a:b)",
        "P trusts (D2, O2) says (D2, O2, a:b)",
        "P trusts (D2, O2, a:b)",
        "P trusts (D2, O2, a)",
        "P trusts (D1, O1, bound)",
        "P trusts (D2, O2, bound)",
        "P trusts (D1, O1) says (D1, O1, bound)",
        "P trusts (D2, O2) says (D2, O2, bound)",
    ]
    .iter()
    .map(|s| f(s))
    .collect();
    if r.resulta() != &want {
        let extra: Vec<String> = r.resulta().difference(&want).map(|f| f.to_string()).collect();
        let missing: Vec<String> = want.difference(r.resulta()).map(|f| f.to_string()).collect();
        return Err(format!("extra {extra:?}, missing {missing:?}"));
    }
    let s21 = f("P trusts (D2, O2, a:b)");
    let proof = r.proof(&s21).ok_or("no proof of 21")?;
    if proof.rule != Justification::Axiom(Axiom::A2) {
        return Err(format!("21 is justified by {}", proof.rule));
    }
    within(start, Duration::from_secs(1))?;
    Ok("12 statements, 21 by A2".into())
}

fn soundness() -> Result<String, String> {
    let start = Instant::now();
    let sizes = ModelSizes { worlds: 3, names: 3, label_depth: 2 };
    for seed in 0..100 {
        let m = random_model(seed, sizes);
        let found = check_axioms(&m, AxiomBounds::default());
        if let Some(c) = found.first() {
            return Err(format!("seed {seed}: {} fails at world {}: {}", c.axiom, c.world, c.instance));
        }
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("100 models in {:?}", start.elapsed()))
}

fn oracle_equivalence() -> Result<String, String> {
    let start = Instant::now();
    for seed in 0..STORES {
        let store = support::random_store(seed);
        let r = saturate(&store);
        let want = support::oracle_free(&store);
        if r.resultb() != &want {
            return Err(format!("seed {seed}: engine and oracle disagree"));
        }
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!("{STORES} stores"))
}

fn chain_structure() -> Result<String, String> {
    let mut n = 0;
    for seed in 0..STORES {
        let r = saturate(&support::random_store(seed));
        for t in r.resulta() {
            let Form::Trusts { what: Trustable::BdL(pair), .. } = t else { continue };
            if pair.label.kind != LabelKind::SattDel {
                continue;
            }
            n += 1;
            let chain = extract_chain(&r, t).map_err(|e| format!("seed {seed}: {t}: {e}"))?;
            if !validate_chain(&r, &chain) {
                return Err(format!("seed {seed}: {t}: violates {:?}", chain_violations(&r, &chain)));
            }
            let links: Vec<(SataId, String)> = chain.links.iter().map(|l| (l.id.clone(), l.label.to_string())).collect();
            let checked = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
                support::check_chain_by_hand(&r, pair, &links, &chain.root)
            }));
            if checked.is_err() {
                return Err(format!("seed {seed}: {t}: independent check failed"));
            }
        }
    }
    Ok(format!("{n} chains"))
}

fn explanation_coverage() -> Result<String, String> {
    let mut n = 0;
    for seed in 0..STORES {
        let r = saturate(&support::random_store(seed));
        for t in r.resulta() {
            let Form::Trusts { what: Trustable::BdL(pair), .. } = t else { continue };
            let expected = match (pair.label.kind, pair.label.base.is_bound()) {
                (LabelKind::Plain, true) => 1,
                (LabelKind::Plain, false) => 2,
                (LabelKind::Satt, _) => 3,
                (LabelKind::SattDel, _) => continue,
            };
            n += 1;
            let e = explain(&r, t).map_err(|e| format!("seed {seed}: {t}: {e}"))?;
            if e.condition.case().0 != expected || !validate_explanation(&r, &e) {
                return Err(format!("seed {seed}: {t}: bad case {:?}", e.condition.case()));
            }
        }
    }
    Ok(format!("{n} statements"))
}

fn confinement() -> Result<String, String> {
    let long = "a:b:c:d:e:f:g:h:i:j";
    let store = TrustStore::new(sattrust_core::lang::Principal::client("P"))
        .with_itrust(&["P trusts (D1, O1, sattestor*(a))"])
        .unwrap()
        .with_says(&[
            &format!("(D1, O1) says (D2, O2, {long})"),
            &format!("(D2, O2) says (D2, O2, {long})"),
            &format!("(D1, O1) says (D2, O2, sattestor*({long}))"),
        ])
        .unwrap();
    let r = saturate(&store);
    let allowed = lalc(store.itrust().iter().chain(store.ts()), store.las());
    let used = labels_of(r.resultb().iter());
    if !used.is_subset(&allowed) {
        return Err("labels escape the closure".into());
    }
    let u = limited_universe(&store).len();
    let it = r.stats().iterations;
    if it > u + 1 {
        return Err(format!("{it} iterations for a universe of {u}"));
    }
    if !r.contains(&f(&format!("P trusts (D2, O2, {long})"))) {
        return Err("the ten-segment claim was not derived".into());
    }
    Ok(format!("{it} iterations, universe {u}"))
}

fn round_trips() -> Result<String, String> {
    let mut runner = TestRunner::new_with_rng(Config::default(), TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let forms = support::gen::form();
    for _ in 0..10_000 {
        let x = forms.new_tree(&mut runner).unwrap().current();
        let text = x.to_string();
        if Form::parse(&text).as_ref() != Ok(&x) {
            return Err(format!("form `{text}` does not round-trip"));
        }
    }
    let labels = support::gen::label();
    for _ in 0..1_000 {
        let l = labels.new_tree(&mut runner).unwrap().current();
        if Label::parse(&l.to_string()) != Ok(l.clone()) {
            return Err(format!("label `{l}` does not round-trip"));
        }
        let g = GenLabel::satt(l);
        if GenLabel::parse(&g.to_string()) != Ok(g.clone()) {
            return Err(format!("label `{g}` does not round-trip"));
        }
    }
    let mut files = 0;
    for set in ["worked_example", "civil_liberties", "micro"] {
        for file in header_files(&fixtures().join(set).join("headers")).map_err(|e| e.to_string())? {
            let bytes = fs::read(&file).map_err(|e| e.to_string())?;
            let h = parse_header(&bytes).map_err(|e| e.to_string())?;
            if h.to_canonical_json().as_bytes() != &bytes[..] {
                return Err(format!("{} re-serializes differently", file.display()));
            }
            files += 1;
        }
    }
    Ok(format!("10000 forms, 1000 labels, {files} headers"))
}

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        ("worked example derivation", worked_example),
        ("civil liberties delegation", civil_liberties),
        ("saturation micro example", micro_example),
        ("soundness harness", soundness),
        ("oracle equivalence", oracle_equivalence),
        ("chain structure", chain_structure),
        ("explanation coverage", explanation_coverage),
        ("termination and confinement", confinement),
        ("round trips", round_trips),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(note) => println!("PASS {} {name}: {note}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
