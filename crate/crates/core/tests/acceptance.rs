//! Acceptance harness: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p kxp --test acceptance`. Criteria listed in
//! `KNOWN_UNATTAINABLE` are asserted exactly as stated and print FAIL; they
//! do not change the exit status. Any other failure exits non-zero.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::*;
use kxp::domain::{feature_set_from_names, rule_to_clause, FeatureSet, Instance, Kind, KnowledgeBase, Literal, Polarity};
use kxp::explain::{attribute_rules, Explainer};
use kxp::ingest::{quantize, Dataset, QuantizationSpec, RawTable, SchemaHints};
use kxp::miner::{cross_validate_rules, enumerate_min_rules, extract_all, Engine, ExtractionLimit};
use kxp::models::{train_boosted, train_decision_list, BoostOptions, ListOptions, Model};
use kxp::oracle::{entails, entails_bruteforce, EntailmentQuery, DEFAULT_BRUTEFORCE_BOUND};
use kxp::samples::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The perturbed ensemble score as printed cannot be reached by any path
/// through the trees, and the stated knowledge-assisted smallest CXp is not
/// subset-minimal. Both are kept as stated.
const KNOWN_UNATTAINABLE: &[&str] = &["1b-perturbed-score", "1c-smallest-cxp-with-knowledge"];

const WORKED_BUDGET: Duration = Duration::from_secs(1);
const EQUIVALENCE_QUERIES: usize = 1000;
const EQUIVALENCE_BUDGET: Duration = Duration::from_secs(300);
const MAX_QUERY_SPACE: u64 = 100_000;
const DUALITY_MODELS: usize = 200;
const ATTRIBUTION_CASES: usize = 100;
const ACCURACY_FLOOR: f64 = 0.98;
const ACCURACY_BUDGET: Duration = Duration::from_secs(600);
const MIN_DATASET_ROWS: usize = 500;

struct Report {
    failed: Vec<String>,
}

impl Report {
    fn line(&mut self, id: &str, ok: bool, detail: String) {
        let known = KNOWN_UNATTAINABLE.contains(&id);
        let status = if ok { "PASS" } else { "FAIL" };
        let note = if !ok && known { " [known unattainable]" } else { "" };
        println!("{status} {id}: {detail}{note}");
        if !ok && !known {
            self.failed.push(id.to_string());
        }
    }
}

fn set_of(model: &Model, names: &[&str]) -> FeatureSet {
    feature_set_from_names(model.space(), names).unwrap()
}

fn shown(model: &Model, sets: &[FeatureSet]) -> String {
    let parts: Vec<String> = sets
        .iter()
        .map(|s| format!("{{{}}}", s.iter().map(|&f| model.space().name(f)).collect::<Vec<_>>().join(", ")))
        .collect();
    parts.join(" ")
}

fn enumerate(model: &Model, kb: &KnowledgeBase, inst: &Instance, kind: Kind, n: usize) -> (Vec<FeatureSet>, bool) {
    let mut ex = Explainer::new(model, kb, inst).unwrap();
    let e = ex.enumerate_smallest(kind, n);
    (e.explanations, e.exhausted)
}

fn singletons(model: &Model) -> BTreeSet<FeatureSet> {
    ["Education", "Status", "Occupation", "Relationship"]
        .iter()
        .map(|n| set_of(model, &[n]))
        .collect()
}

fn worked_examples(r: &mut Report) {
    let none = KnowledgeBase::new();

    let start = Instant::now();
    let dl = income_list();
    let v = married_sales_instance();
    let (axps, _) = enumerate(&dl, &none, &v, Kind::Axp, 20);
    let (cxps, done) = enumerate(&dl, &none, &v, Kind::Cxp, 20);
    let ok = axps == vec![set_of(&dl, &["Education", "Status", "Occupation", "Relationship"])]
        && done
        && cxps.iter().cloned().collect::<BTreeSet<_>>() == singletons(&dl)
        && cxps.len() == 4;
    let t = start.elapsed();
    r.line(
        "1a-list-explanations",
        ok && t < WORKED_BUDGET,
        format!("AXps {} ; CXps {} ; {:.3}s (budget 1s)", shown(&dl, &axps), shown(&dl, &cxps), t.as_secs_f64()),
    );

    let bt = income_trees();
    let Model::Boosted(ens) = &bt else { unreachable!() };
    let score = ens.scores(&v)[0];
    r.line("1b-score", score == 1642, format!("score {score} (want 1642 at scale 10^4)"));
    let service = v.with_value(2, bt.space().value_index(2, "Service").unwrap());
    let perturbed = ens.scores(&service)[0];
    r.line(
        "1b-perturbed-score",
        perturbed == -982,
        format!("score {perturbed} with Occupation=Service (want -982)"),
    );
    let (axps, _) = enumerate(&bt, &none, &v, Kind::Axp, 20);
    let (cxps, done) = enumerate(&bt, &none, &v, Kind::Cxp, 20);
    let ok = axps == vec![set_of(&bt, &["Education", "Status", "Occupation", "Relationship"])]
        && done
        && cxps.iter().cloned().collect::<BTreeSet<_>>() == singletons(&bt)
        && cxps.len() == 4;
    r.line("1b-ensemble-explanations", ok, format!("AXps {} ; CXps {}", shown(&bt, &axps), shown(&bt, &cxps)));

    let m = status_list();
    let v = separated_service_instance();
    let kb = separated_knowledge();
    let (plain_axp, _) = enumerate(&m, &none, &v, Kind::Axp, 1);
    let (kb_axp, _) = enumerate(&m, &kb, &v, Kind::Axp, 1);
    let ok = plain_axp == vec![set_of(&m, &["Status", "Relationship", "Sex"])]
        && kb_axp == vec![set_of(&m, &["Relationship", "Sex"])];
    r.line(
        "1c-axp-with-and-without-knowledge",
        ok,
        format!("without {} ; with {}", shown(&m, &plain_axp), shown(&m, &kb_axp)),
    );
    let (plain_cxp, _) = enumerate(&m, &none, &v, Kind::Cxp, 1);
    r.line(
        "1c-smallest-cxp-without-knowledge",
        plain_cxp == vec![set_of(&m, &["Status"])],
        format!("{} (want {{Status}})", shown(&m, &plain_cxp)),
    );
    let (kb_cxp, _) = enumerate(&m, &kb, &v, Kind::Cxp, 1);
    r.line(
        "1c-smallest-cxp-with-knowledge",
        kb_cxp == vec![set_of(&m, &["Status", "Relationship"])],
        format!("{} (want {{Status, Relationship}})", shown(&m, &kb_cxp)),
    );

    let mv = majority_vote();
    let bits110 = bits(1, 1, 0);
    let mut with = Explainer::new(&mv, &majority_knowledge(), &bits110).unwrap();
    let assisted = with.find_axp(None).unwrap();
    let assisted_minimal = with.is_minimal(Kind::Axp, &assisted).unwrap();
    let (free, _) = enumerate(&mv, &none, &bits110, Kind::Axp, 20);
    let ok = assisted == set_of(&mv, &["c"]) && assisted_minimal && free == vec![set_of(&mv, &["a", "b"])];
    r.line(
        "1d-majority-vote",
        ok,
        format!("with knowledge {} ; without {}", shown(&mv, &[assisted]), shown(&mv, &free)),
    );
    let par = parity();
    let (kb_cxps, done) = enumerate(&par, &parity_knowledge(), &bits(1, 1, 1), Kind::Cxp, 20);
    r.line(
        "1d-parity",
        done && kb_cxps == vec![set_of(&par, &["c"])],
        format!("knowledge-assisted CXps {}", shown(&par, &kb_cxps)),
    );

    let ds = census_table();
    let s = ds.space();
    let husband = Literal::named(s, "Relationship", Polarity::Equals, "Husband").unwrap();
    let limit = ExtractionLimit::with_max_size(2);
    let rules = enumerate_min_rules(&ds, husband, &KnowledgeBase::new(), &limit).unwrap();
    let wanted = "IF Status = Married AND Sex = Male THEN Relationship = Husband";
    let found = rules.iter().find(|x| x.display(s) == wanted);
    let ex = extract_all(&ds, &limit, false).unwrap();
    let married = ["IF Relationship = Husband THEN Status = Married", "IF Relationship = Wife THEN Status = Married"];
    let has_married = married.iter().all(|w| ex.rules.iter().any(|x| x.display(s) == *w));
    r.line(
        "1e-mined-rules",
        found.is_some() && has_married,
        format!("married-male rule {} ; husband/wife rules {}", found.is_some(), has_married),
    );
    let blocked_ok = match found {
        Some(rule) => {
            let mut blocked = KnowledgeBase::new();
            blocked.insert(rule_to_clause(s, rule), None);
            let again = enumerate_min_rules(&ds, husband, &blocked, &limit).unwrap();
            let clause = rule_to_clause(s, rule);
            let readings = ex.rules.iter().filter(|x| rule_to_clause(s, x) == clause).count();
            !again.iter().any(|x| x.display(s) == wanted) && readings == 1
        }
        None => false,
    };
    r.line("1e-duplicate-blocking", blocked_ok, "blocked clause yields no second reading".into());
}

fn census_table() -> Dataset {
    let raw = RawTable::from_reader(include_str!("../../../data/table1.csv").as_bytes(), &SchemaHints::default()).unwrap();
    raw.into_categorical().unwrap().without_class()
}

fn oracle_equivalence(r: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce55);
    let mut disagreements = 0;
    let mut bad_witness = 0;
    let mut done = 0;
    while done < EQUIVALENCE_QUERIES {
        let space = random_space(&mut rng, 1..=8, 2..=5);
        if space.size_u64().is_none_or(|s| s > MAX_QUERY_SPACE) {
            continue;
        }
        let model = random_model(&mut rng, &space);
        let inst = random_instance(&mut rng, &space);
        let fixed: FeatureSet = (0..space.len()).filter(|_| rng.random_bool(0.4)).collect();
        let n = rng.random_range(0..=4);
        let kb = random_knowledge(&mut rng, &space, &inst, n);
        let q = EntailmentQuery { fixed: &fixed, instance: &inst, model: &model, contested: model.classify(&inst), knowledge: &kb };
        let a = entails(&q).unwrap();
        let b = entails_bruteforce(&q, DEFAULT_BRUTEFORCE_BOUND).unwrap();
        if a.entails() != b.entails() {
            disagreements += 1;
        }
        if let Some(w) = a.witness() {
            let valid = fixed.iter().all(|&f| w[f] == inst[f]) && kb.satisfied_by(w) && model.classify(w) != q.contested;
            if !valid {
                bad_witness += 1;
            }
        }
        done += 1;
    }
    let t = start.elapsed();
    r.line(
        "2-oracle-equivalence",
        disagreements == 0 && bad_witness == 0 && t < EQUIVALENCE_BUDGET,
        format!("{done} queries, {disagreements} disagreements, {bad_witness} invalid witnesses, {:.1}s (budget 300s)", t.as_secs_f64()),
    );
}

fn duality_and_monotonicity(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd0a1);
    let mut dual_fail = 0;
    let mut enum_fail = 0;
    let mut axp_mono_fail = 0;
    let mut cxp_mono_fail = 0;
    let mut size_fail = 0;
    let mut checked = 0;
    for _ in 0..DUALITY_MODELS {
        let space = random_space(&mut rng, 1..=5, 2..=3);
        let model = random_model(&mut rng, &space);
        let inst = random_instance(&mut rng, &space);
        let n = rng.random_range(1..=4);
        let kb = random_knowledge(&mut rng, &space, &inst, n);
        let none = KnowledgeBase::new();
        let nf = space.len();
        let mut sets = Vec::new();
        for k in [&none, &kb] {
            let axps = all_minimal(&model, k, &inst, Kind::Axp);
            let cxps = all_minimal(&model, k, &inst, Kind::Cxp);
            if minimal_hitting_sets(nf, &cxps) != axps || minimal_hitting_sets(nf, &axps) != cxps {
                dual_fail += 1;
            }
            for (kind, want) in [(Kind::Axp, &axps), (Kind::Cxp, &cxps)] {
                let (got, exhausted) = enumerate(&model, k, &inst, kind, 1 << 10);
                if !exhausted || got.iter().cloned().collect::<BTreeSet<_>>() != *want {
                    enum_fail += 1;
                }
            }
            sets.push((axps, cxps));
        }
        let (free_axps, free_cxps) = &sets[0];
        let (kb_axps, kb_cxps) = &sets[1];
        if !free_axps.iter().all(|x| kb_axps.iter().any(|y| y.is_subset(x))) {
            axp_mono_fail += 1;
        }
        if !kb_cxps.iter().all(|y| free_cxps.iter().any(|x| x.is_subset(y))) {
            cxp_mono_fail += 1;
        }
        let min = |s: &BTreeSet<FeatureSet>| s.iter().map(|x| x.len()).min();
        let axp_ok = min(kb_axps) <= min(free_axps);
        let cxp_ok = match (min(kb_cxps), min(free_cxps)) {
            (Some(a), Some(b)) => a >= b,
            _ => true,
        };
        if !(axp_ok && cxp_ok) {
            size_fail += 1;
        }
        checked += 1;
    }
    r.line(
        "3-duality",
        dual_fail == 0 && enum_fail == 0,
        format!("{checked} models x 2 knowledge settings: {dual_fail} duality failures, {enum_fail} enumeration mismatches"),
    );
    r.line(
        "4-monotonicity",
        axp_mono_fail == 0 && cxp_mono_fail == 0 && size_fail == 0,
        format!("{checked} instances: {axp_mono_fail} AXp, {cxp_mono_fail} CXp containment failures, {size_fail} size-inequality failures"),
    );
}

fn check_rules(ds: &Dataset, limit: &ExtractionLimit) -> (usize, usize, usize) {
    let ex = extract_all(ds, limit, false).unwrap();
    let s = ds.space();
    let mut unsound = 0;
    let mut non_minimal = 0;
    for rule in &ex.rules {
        let c = rule_to_clause(s, rule);
        if !ds.rows().iter().all(|row| c.satisfied_by(row)) {
            unsound += 1;
        }
        for drop in 0..rule.size() {
            let ante: Vec<Literal> = rule.antecedent().iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, l)| *l).collect();
            let holds = |row: &Instance| ante.iter().all(|l| l.satisfied_by(row));
            let violated = ds.rows().iter().any(|row| holds(row) && !rule.consequent().satisfied_by(row));
            let support = ds.rows().iter().filter(|row| holds(row) && rule.consequent().satisfied_by(row)).count();
            if !violated && support >= limit.min_support {
                non_minimal += 1;
            }
        }
    }
    (ex.rules.len(), unsound, non_minimal)
}

fn miner_contracts(r: &mut Report, anes: &Dataset) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut rules = 0;
    let mut unsound = 0;
    let mut non_minimal = 0;
    let mut runs = vec![(census_table(), ExtractionLimit::default()), (anes.without_class(), ExtractionLimit::default())];
    let mut mismatched = 0;
    let mut compared = 0;
    for _ in 0..60 {
        let space = random_space(&mut rng, 2..=6, 2..=4);
        let rows = rng.random_range(5..=40);
        let ds = random_dataset(&mut rng, &space, rows);
        let limit = ExtractionLimit { max_size: rng.random_range(1..=4), ..Default::default() };
        let got = extract_all(&ds, &limit, false).unwrap();
        let want = brute_force_extract(&ds, &limit);
        let same = got.rules.len() == want.len() && got.rules.iter().zip(&want).all(|(a, b)| a.same_reading(b));
        if !same {
            mismatched += 1;
        }
        compared += 1;
        runs.push((ds, limit));
    }
    for (ds, limit) in &runs {
        let (n, u, m) = check_rules(ds, limit);
        rules += n;
        unsound += u;
        non_minimal += m;
    }
    r.line(
        "5-miner-contracts",
        unsound == 0 && non_minimal == 0 && mismatched == 0,
        format!(
            "{} runs, {rules} rules: {unsound} falsified on training rows, {non_minimal} non-minimal; lattice vs exhaustive {mismatched}/{compared} mismatches",
            runs.len()
        ),
    );
}

fn load_anes() -> Dataset {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/anes96.csv");
    let raw = RawTable::from_path(path, &SchemaHints::default()).unwrap();
    let spec = QuantizationSpec::fit(&raw, 4, None).unwrap();
    quantize(&raw, &spec).unwrap()
}

fn rule_accuracy_check(r: &mut Report, anes: &Dataset) {
    let start = Instant::now();
    let report = cross_validate_rules(anes, 5, 1, &ExtractionLimit::default(), Engine::Lattice, true).unwrap();
    let t = start.elapsed();
    let mean = report.overall.mean.unwrap_or(0.0);
    r.line(
        "6-rule-accuracy",
        anes.len() >= MIN_DATASET_ROWS && mean >= ACCURACY_FLOOR && t < ACCURACY_BUDGET && !report.truncated,
        format!(
            "anes96 q=4, {} rows, 5 folds, size<=5: mean accuracy {:.4} over {} rules (floor {ACCURACY_FLOOR}), {:.1}s (budget 600s)",
            anes.len(),
            mean,
            report.overall.rules,
            t.as_secs_f64()
        ),
    );
    println!("{}", report.to_table().trim_end());
}

fn attribution(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xa77);
    let mut cases = 0;
    let mut assisted = 0;
    let mut insufficient = 0;
    let mut non_minimal = 0;
    let mut fast_path_wrong = 0;
    while cases < ATTRIBUTION_CASES || assisted < ATTRIBUTION_CASES / 4 {
        let space = random_space(&mut rng, 2..=5, 2..=3);
        let model = random_model(&mut rng, &space);
        let inst = random_instance(&mut rng, &space);
        let n = rng.random_range(1..=5);
        let kb = random_knowledge(&mut rng, &space, &inst, n);
        let mut ex = Explainer::new(&model, &kb, &inst).unwrap();
        let axp = ex.find_axp(None).unwrap();
        let a = attribute_rules(&model, &kb, &inst, &axp).unwrap();
        let holds = |idx: &[usize]| {
            let sub = kb.subset(idx);
            let q = EntailmentQuery { fixed: &axp, instance: &inst, model: &model, contested: model.classify(&inst), knowledge: &sub };
            entails_bruteforce(&q, DEFAULT_BRUTEFORCE_BOUND).unwrap().entails()
        };
        if a.knowledge_free != holds(&[]) {
            fast_path_wrong += 1;
        }
        if !holds(&a.clauses) {
            insufficient += 1;
        }
        if !a.knowledge_free {
            assisted += 1;
            for i in 0..a.clauses.len() {
                let mut fewer = a.clauses.clone();
                fewer.remove(i);
                if holds(&fewer) {
                    non_minimal += 1;
                }
            }
        }
        cases += 1;
    }
    r.line(
        "7-attribution",
        insufficient == 0 && non_minimal == 0 && fast_path_wrong == 0,
        format!("{cases} knowledge-assisted AXps ({assisted} needing knowledge): {insufficient} insufficient, {non_minimal} removable members, {fast_path_wrong} fast-path errors"),
    );
}

fn average_sizes(model: &Model, kb: &KnowledgeBase, rows: &[Instance]) -> (f64, f64) {
    let (mut axp, mut cxp, mut n_cxp) = (0usize, 0usize, 0usize);
    for v in rows {
        let (a, _) = enumerate(model, kb, v, Kind::Axp, 1);
        axp += a[0].len();
        let (c, _) = enumerate(model, kb, v, Kind::Cxp, 1);
        if let Some(c) = c.first() {
            cxp += c.len();
            n_cxp += 1;
        }
    }
    (axp as f64 / rows.len() as f64, cxp as f64 / n_cxp.max(1) as f64)
}

fn knowledge_effect(r: &mut Report, anes: &Dataset) {
    let (train, test) = anes.split(0.8, 7).unwrap();
    let kb = extract_all(&train, &ExtractionLimit::default(), true).unwrap().knowledge;
    let compatible: Vec<Instance> = test.rows().iter().filter(|v| kb.satisfied_by(v)).cloned().collect();
    let skipped = test.len() - compatible.len();
    let none = KnowledgeBase::new();
    let models: [(&str, Model); 2] = [
        ("list", train_decision_list(&train, &ListOptions::default()).unwrap().into()),
        ("trees", train_boosted(&train, &BoostOptions::default()).unwrap().into()),
    ];
    for (name, model) in &models {
        let start = Instant::now();
        let (axp0, cxp0) = average_sizes(model, &none, &compatible);
        let (axp1, cxp1) = average_sizes(model, &kb, &compatible);
        r.line(
            &format!("8-knowledge-effect-{name}"),
            axp1 < axp0 && cxp1 >= cxp0,
            format!(
                "{} test instances ({skipped} incompatible skipped), {} clauses: smallest AXp {axp0:.2} -> {axp1:.2}, smallest CXp {cxp0:.2} -> {cxp1:.2}, {:.1}s",
                compatible.len(),
                kb.len(),
                start.elapsed().as_secs_f64()
            ),
        );
    }
}

fn main() {
    let mut r = Report { failed: Vec::new() };
    worked_examples(&mut r);
    oracle_equivalence(&mut r);
    duality_and_monotonicity(&mut r);
    let anes = load_anes();
    miner_contracts(&mut r, &anes);
    rule_accuracy_check(&mut r, &anes);
    attribution(&mut r);
    knowledge_effect(&mut r, &anes);
    if !r.failed.is_empty() {
        println!("unexpected failures: {}", r.failed.join(", "));
        std::process::exit(1);
    }
}
