//! Shared test helpers: a seeded random store generator and a deliberately
//! naive fixpoint used as an oracle for the saturation engine.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sattrust_core::engine::{SchemaInstance, TrustStore};
use sattrust_core::labels::GenLabel;
use sattrust_core::lang::{Form, Principal, SataId};

const NAMES: [(&str, &str); 3] = [("D1", "O1"), ("D2", "O2"), ("D3", "O3")];
const LETTERS: [&str; 3] = ["a", "b", "c"];

fn label_text(rng: &mut ChaCha8Rng) -> String {
    // mostly under `a`, so that sattestations and claims meet
    let first = if rng.gen_bool(0.6) { "a" } else { *LETTERS.choose(rng).unwrap() };
    if rng.gen_bool(0.5) {
        return first.to_string();
    }
    let second = *LETTERS.iter().filter(|l| **l != first).collect::<Vec<_>>().choose(rng).unwrap();
    format!("{first}:{second}")
}

fn gen_text(rng: &mut ChaCha8Rng, plain_bias: f64) -> String {
    let l = label_text(rng);
    if rng.gen_bool(plain_bias) {
        return l;
    }
    if rng.gen_bool(0.5) {
        format!("sattestor({l})")
    } else {
        format!("sattestor*({l})")
    }
}

fn pair_text(id: (&str, &str), label: &str) -> String {
    format!("({}, {}, {})", id.0, id.1, label)
}

/// A random store: at most three names, labels of at most two segments over
/// `a`, `b`, `c`, up to six says-statements leaning towards
/// self-sattestation, up to two schema instances and one or two trusted
/// statements.
pub fn random_store(seed: u64) -> TrustStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = &NAMES[..rng.gen_range(1..=3)];
    let mut store = TrustStore::new(Principal::client("P"));

    let root = *names.choose(&mut rng).unwrap();
    for i in 0..rng.gen_range(1..=2) {
        let d = if i == 0 { root } else { *names.choose(&mut rng).unwrap() };
        let line = if rng.gen_bool(0.8) {
            format!("P trusts {}", pair_text(d, &gen_text(&mut rng, 0.25)))
        } else {
            let e = *names.choose(&mut rng).unwrap();
            format!("P trusts ({}, {}) says {}", d.0, d.1, pair_text(e, &gen_text(&mut rng, 0.5)))
        };
        store.add_itrust(Form::parse(&line).unwrap()).unwrap();
    }

    for _ in 0..rng.gen_range(0..=6) {
        // the first trusted name speaks more often than the rest
        let speaker = if rng.gen_bool(0.3) { root } else { *names.choose(&mut rng).unwrap() };
        let line = if rng.gen_bool(0.4) {
            // the sattestee's own concurrence
            format!("({}, {}) says {}", speaker.0, speaker.1, pair_text(speaker, &label_text(&mut rng)))
        } else {
            let e = *names.choose(&mut rng).unwrap();
            format!("({}, {}) says {}", speaker.0, speaker.1, pair_text(e, &gen_text(&mut rng, 0.5)))
        };
        store.add_says(Form::parse(&line).unwrap()).unwrap();
    }

    for _ in 0..rng.gen_range(0..=2) {
        let s = match rng.gen_range(0..4) {
            0 => SchemaInstance::LasSatt(id_of(*names.choose(&mut rng).unwrap())),
            1 => SchemaInstance::LasSattDel(id_of(*names.choose(&mut rng).unwrap())),
            _ => SchemaInstance::LasDel {
                from: GenLabel::parse(&gen_text(&mut rng, 0.6)).unwrap(),
                to: GenLabel::parse(&gen_text(&mut rng, 0.5)).unwrap(),
            },
        };
        store.add_las(s);
    }
    store
}

fn id_of(n: (&str, &str)) -> SataId {
    SataId::new(n.0, n.1)
}

// ---------------------------------------------------------------------------
// Oracle. Statements are plain tuples of strings and all rules are matched by
// enumerating every variable binding over the universe.

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum K {
    Plain,
    Satt,
    Del,
}

type Name = (String, String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum St {
    /// P trusts (d, k, l)
    T(Name, K, String),
    /// P trusts s says (d, k, l)
    Ts(Name, Name, K, String),
    /// s says (d, k, l)
    S(Name, Name, K, String),
}

/// `a` is `b` or begins with `b:`.
fn at_or_below(a: &str, b: &str) -> bool {
    a == b || (b != "bound" && a.starts_with(&format!("{b}:")))
}

fn split_gen(text: &str) -> (K, String) {
    if let Some(rest) = text.strip_prefix("sattestor*(") {
        (K::Del, rest.trim_end_matches(')').to_string())
    } else if let Some(rest) = text.strip_prefix("sattestor(") {
        (K::Satt, rest.trim_end_matches(')').to_string())
    } else {
        (K::Plain, text.to_string())
    }
}

fn gen_string(k: K, l: &str) -> String {
    match k {
        K::Plain => l.to_string(),
        K::Satt => format!("sattestor({l})"),
        K::Del => format!("sattestor*({l})"),
    }
}

fn split_name(text: &str) -> Name {
    let inner = text.trim().strip_prefix('(').unwrap().strip_suffix(')').unwrap();
    let (d, o) = inner.split_once(", ").unwrap();
    (d.to_string(), o.to_string())
}

/// Splits "(d, o, g)".
fn split_pair(text: &str) -> (Name, K, String) {
    let inner = text.trim().strip_prefix('(').unwrap().strip_suffix(')').unwrap();
    let mut parts = inner.splitn(3, ", ");
    let d = parts.next().unwrap().to_string();
    let o = parts.next().unwrap().to_string();
    let (k, l) = split_gen(parts.next().unwrap_or("bound"));
    ((d, o), k, l)
}

fn to_st(f: &Form) -> St {
    let text = f.to_string();
    let (head, tail) = match text.split_once(" says ") {
        Some((h, t)) => (h, Some(t)),
        None => (text.as_str(), None),
    };
    match (head.strip_prefix("P trusts "), tail) {
        (Some(s), Some(body)) => {
            let (d, k, l) = split_pair(body);
            St::Ts(split_name(s), d, k, l)
        }
        (Some(pair), None) => {
            let (d, k, l) = split_pair(pair);
            St::T(d, k, l)
        }
        (None, Some(body)) => {
            let (d, k, l) = split_pair(body);
            St::S(split_name(head), d, k, l)
        }
        (None, None) => panic!("not a statement: {text}"),
    }
}

fn render(st: &St) -> String {
    let pair = |d: &Name, k: K, l: &str| format!("({}, {}, {})", d.0, d.1, gen_string(k, l));
    match st {
        St::T(d, k, l) => format!("P trusts {}", pair(d, *k, l)),
        St::Ts(s, d, k, l) => format!("P trusts ({}, {}) says {}", s.0, s.1, pair(d, *k, l)),
        St::S(s, d, k, l) => format!("({}, {}) says {}", s.0, s.1, pair(d, *k, l)),
    }
}

/// Every derivable statement of the store, by brute force.
pub fn oracle(store: &TrustStore) -> BTreeSet<Form> {
    assert_eq!(store.principal(), &Principal::client("P"), "oracle reasons for P only");
    let mut have: BTreeSet<St> = store.itrust().iter().chain(store.ts()).map(to_st).collect();

    let mut dels: Vec<((K, String), (K, String))> = Vec::new();
    let mut every_satt: Vec<Name> = Vec::new();
    let mut every_del: Vec<Name> = Vec::new();
    let mut names: BTreeSet<Name> = BTreeSet::new();
    let mut bases: BTreeSet<String> = BTreeSet::new();
    for s in store.las() {
        let text = s.to_string();
        let args = text[text.find('(').unwrap() + 1..text.len() - 1].to_string();
        if text.starts_with("LAS-Del(") {
            // labels never contain ", "
            let (a, b) = args.split_once(", ").unwrap();
            let (a, b) = (split_gen(a), split_gen(b));
            bases.insert(a.1.clone());
            bases.insert(b.1.clone());
            dels.push((a, b));
        } else {
            let (d, o) = args.split_once(", ").unwrap();
            let n = (d.to_string(), o.to_string());
            names.insert(n.clone());
            if text.starts_with("LAS-Satt(") {
                every_satt.push(n);
            } else {
                every_del.push(n);
            }
        }
    }
    for st in &have {
        match st {
            St::T(d, _, l) => {
                names.insert(d.clone());
                bases.insert(l.clone());
            }
            St::Ts(s, d, _, l) | St::S(s, d, _, l) => {
                names.insert(s.clone());
                names.insert(d.clone());
                bases.insert(l.clone());
            }
        }
    }
    // close under prefixes
    let mut closed: BTreeSet<String> = BTreeSet::new();
    for b in &bases {
        if b == "bound" {
            continue;
        }
        let segs: Vec<&str> = b.split(':').collect();
        for i in 1..=segs.len() {
            closed.insert(segs[..i].join(":"));
        }
    }
    closed.insert("bound".to_string());
    let labels: Vec<String> = closed.into_iter().collect();
    let names: Vec<Name> = names.into_iter().collect();
    let kinds = [K::Plain, K::Satt, K::Del];

    loop {
        let mut new: BTreeSet<St> = BTreeSet::new();
        let t = |d: &Name, k: K, l: &str| St::T(d.clone(), k, l.to_string());
        let ts = |s: &Name, d: &Name, k: K, l: &str| St::Ts(s.clone(), d.clone(), k, l.to_string());

        for d in &names {
            for l1 in &labels {
                for l2 in &labels {
                    if !at_or_below(l2, l1) {
                        continue;
                    }
                    // A1, A9, A10
                    if have.contains(&t(d, K::Plain, l2)) {
                        new.insert(t(d, K::Plain, l1));
                    }
                    if have.contains(&t(d, K::Satt, l1)) {
                        new.insert(t(d, K::Satt, l2));
                    }
                    if have.contains(&t(d, K::Del, l1)) {
                        new.insert(t(d, K::Del, l2));
                    }
                }
                for k in kinds {
                    // A5
                    if have.contains(&t(d, k, l1)) {
                        new.insert(t(d, K::Plain, "bound"));
                    }
                    for s in &names {
                        // A6, A11
                        if have.contains(&ts(s, d, k, l1)) {
                            new.insert(ts(s, s, K::Plain, "bound"));
                        }
                        if have.contains(&St::S(s.clone(), d.clone(), k, l1.clone())) {
                            new.insert(ts(s, d, k, l1));
                        }
                    }
                    for ((k1, g1), (k2, g2)) in &dels {
                        if *k1 == k && g1 == l1 && have.contains(&t(d, k, l1)) {
                            new.insert(t(d, *k2, g2));
                        }
                    }
                }
                // A7, A8
                if have.contains(&t(d, K::Del, l1)) {
                    new.insert(t(d, K::Satt, l1));
                }
                for s in &names {
                    if have.contains(&ts(s, d, K::Del, l1)) {
                        new.insert(ts(s, d, K::Satt, l1));
                    }
                }
                if every_satt.contains(d) {
                    new.insert(t(d, K::Satt, l1));
                }
                if every_del.contains(d) {
                    new.insert(t(d, K::Del, l1));
                }
            }
        }

        // A2, A3, A4
        for d1 in &names {
            for d2 in &names {
                for l1 in &labels {
                    for l2 in &labels {
                        if !at_or_below(l2, l1) {
                            continue;
                        }
                        for l3 in &labels {
                            if !at_or_below(l3, l2) {
                                continue;
                            }
                            if have.contains(&t(d1, K::Satt, l1))
                                && have.contains(&ts(d1, d2, K::Plain, l2))
                                && have.contains(&ts(d2, d2, K::Plain, l3))
                            {
                                new.insert(t(d2, K::Plain, l2));
                            }
                            for d3 in &names {
                                if have.contains(&t(d1, K::Del, l1))
                                    && have.contains(&ts(d1, d2, K::Del, l2))
                                    && have.contains(&ts(d2, d3, K::Satt, l3))
                                {
                                    new.insert(t(d2, K::Del, l3));
                                }
                                if have.contains(&t(d1, K::Del, l1))
                                    && have.contains(&ts(d1, d2, K::Satt, l2))
                                    && have.contains(&ts(d2, d3, K::Plain, l3))
                                {
                                    new.insert(t(d2, K::Satt, l3));
                                }
                            }
                        }
                    }
                }
            }
        }

        let before = have.len();
        have.extend(new);
        if have.len() == before {
            break;
        }
    }
    have.iter().map(|st| Form::parse(&render(st)).unwrap()).collect()
}

/// The oracle's sattestor-free part.
pub fn oracle_free(store: &TrustStore) -> BTreeSet<Form> {
    oracle(store)
        .into_iter()
        .filter(|f| !f.to_string().contains("sattestor"))
        .collect()
}

// ---------------------------------------------------------------------------
// Independent chain check.

use sattrust_core::chains::RootCase;
use sattrust_core::engine::SaturationResult;
use sattrust_core::labels::{Label, LabelKind};
use sattrust_core::lang::{BdLPair, Trustable};

/// `a` equals `b` or sits below it.
pub fn below(a: &str, b: &str) -> bool {
    a == b || a.starts_with(&format!("{b}:"))
}

fn trusts(r: &SaturationResult, id: &SataId, g: GenLabel) -> Form {
    Form::trusts_bdl(r.store().principal().clone(), BdLPair::new(id.clone(), g))
}

/// Re-checks the five chain conditions with plain string comparisons.
pub fn check_chain_by_hand(r: &SaturationResult, target: &BdLPair, links: &[(SataId, String)], root: &RootCase) {
    let k = links.len() - 1;
    assert!(links.len() >= 2);
    // 1
    assert_eq!(links[k].0, target.id);
    assert_eq!(links[k].1, target.label.base.to_string());
    // 2
    let base0 = Label::parse(&links[0].1).unwrap();
    let first = trusts(r, &links[0].0, GenLabel::sattdel(base0.clone()));
    match root {
        RootCase::ItrustRoot => assert!(r.store().itrust().contains(&first)),
        RootCase::LasSattDelRoot => {
            assert!(r.store().las().contains(&SchemaInstance::LasSattDel(links[0].0.clone())))
        }
        RootCase::LasDelRoot(g) => {
            assert!(r.store().las().contains(&SchemaInstance::LasDel {
                from: g.clone(),
                to: GenLabel::sattdel(base0.clone()),
            }));
            assert!(r.contains(&trusts(r, &links[0].0, g.clone())));
        }
    }
    // 3
    for i in 0..=k {
        let l = Label::parse(&links[i].1).unwrap();
        assert!(r.contains(&trusts(r, &links[i].0, GenLabel::sattdel(l))));
        if i < k {
            assert!(below(&links[i + 1].1, &links[i].1));
        }
    }
    // 4
    for i in 1..k {
        let found = r.resulta().iter().any(|f| match f {
            Form::Trusts {
                what: Trustable::Says { speaker, body },
                ..
            } => {
                speaker == &links[i].0
                    && body.id == links[i + 1].0
                    && body.label.kind == LabelKind::SattDel
                    && below(&body.label.base.to_string(), &links[i].1)
                    && below(&links[i + 1].1, &body.label.base.to_string())
            }
            _ => false,
        });
        assert!(found, "no delegation from link {i}");
    }
    // 5
    assert_eq!(links[0].0, links[1].0);
}

// ---------------------------------------------------------------------------
// Generators for the text syntax.

pub mod gen {
    use proptest::collection::btree_set;
    use proptest::prelude::*;

    use sattrust_core::labels::{GenLabel, Label, LabelKind};
    use sattrust_core::lang::{BdLPair, Form, Principal, SataId, Trustable};

    fn segment() -> impl Strategy<Value = String> {
        "[a-zA-Z][a-zA-Z0-9_]{0,5}".prop_filter("reserved", |s| s != "bound")
    }

    pub fn label() -> impl Strategy<Value = Label> {
        prop_oneof![
            1 => Just(Label::Bound),
            6 => btree_set(segment(), 1..5).prop_flat_map(|set| {
                let v: Vec<String> = set.into_iter().collect();
                Just(v).prop_shuffle()
            })
            .prop_map(|segs| Label::parse(&segs.join(":")).unwrap()),
        ]
    }

    pub fn gen_label() -> impl Strategy<Value = GenLabel> {
        (prop::sample::select(LabelKind::ALL.to_vec()), label()).prop_map(|(k, l)| GenLabel::new(k, l))
    }

    pub fn sata() -> impl Strategy<Value = SataId> {
        ("[a-z][a-z0-9.\\-]{0,10}", "[a-z2-7]{1,16}").prop_map(|(d, o)| SataId::new(d, o))
    }

    pub fn pair() -> impl Strategy<Value = BdLPair> {
        (sata(), gen_label()).prop_map(|(id, g)| BdLPair::new(id, g))
    }

    pub fn principal() -> impl Strategy<Value = Principal> {
        prop_oneof![
            3 => "[A-Z][a-zA-Z0-9]{0,4}".prop_map(Principal::client),
            1 => sata().prop_map(Principal::Sata),
        ]
    }

    fn atom() -> impl Strategy<Value = Form> {
        prop_oneof![
            pair().prop_map(Form::BdL),
            (sata(), pair()).prop_map(|(s, b)| Form::says(s, b)),
            (principal(), pair()).prop_map(|(p, b)| Form::Trusts { who: p, what: Trustable::BdL(b) }),
            (principal(), sata(), pair()).prop_map(|(p, s, b)| Form::trusts_says(p, s, b)),
            (label(), label()).prop_map(|(n, b)| Form::WkOrder { narrower: n, broader: b }),
        ]
    }

    pub fn form() -> impl Strategy<Value = Form> {
        atom().prop_recursive(4, 16, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Form::and(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Form::implies(a, b)),
            ]
        })
    }
}
