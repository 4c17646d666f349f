//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit status on
//! any failure. Tolerances are exact; nothing here is sampled loosely.
//!
//! Run with `cargo test -p oasis-cli --test acceptance`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use oasis_core::engine::chain_states;
use oasis_core::gen::random_kb;
use oasis_core::kg::{vocabulary, Prop};
use oasis_core::lab::{detect_races, enumerate_schedules, programs, RaceKind, StepKindMap, DEFAULT_BOUND};
use oasis_core::model::{build_template, deprecate_role, BuildDocument, RoleGrant};
use oasis_core::rdfio::{export_ntriples, import_turtle};
use oasis_core::scenario::{
    self, CaseStudy, Corpus, ALICE, BEHAVIOURS, BOB, EXEC_ROOTS, LOCKLESS_PROCESS, MODIFY_ONLY_PROCESS, PROCESS, STATES,
};
use oasis_core::validate::{check_capability, render, validate, CapabilitySource};
use oasis_core::{Assertion, Iri, KnowledgeBase};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

/// Number of randomized role/agent configurations for role gating.
const ROLE_CONFIGURATIONS: u64 = 50;
/// Number of generated graphs for the round-trip criterion.
const ROUND_TRIPS: u64 = 100;
/// Number of shuffled re-insertions for canonical export.
const SHUFFLES: u64 = 20;
/// Minimum number of subproperty pairs the vocabulary must declare.
const MIN_SUBPROPERTY_PAIRS: usize = 35;
/// Minimum number of deletion mutations in the mutation corpus.
const MIN_DELETIONS: usize = 15;
/// Wall-clock budget for the whole suite, in seconds.
const BUDGET_SECS: f64 = 60.0;

/// Outcome of one criterion: failures (empty means PASS), a one-line
/// summary, and the byte artifacts it produced for the determinism check.
#[derive(Default)]
struct Verdict {
    failures: Vec<String>,
    summary: String,
    artifacts: BTreeMap<String, Vec<u8>>,
}

impl Verdict {
    fn check(&mut self, ok: bool, failure: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(failure());
        }
    }

    fn artifact(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.artifacts.insert(name.into(), bytes.into());
    }
}

fn edge_count(kb: &KnowledgeBase, prop: Prop) -> usize {
    kb.edges(prop).len()
}

// ---------------------------------------------------------------------------
// 1. Case-study reconstruction

fn case_study_reconstruction() -> Verdict {
    let mut v = Verdict::default();

    let mut template = KnowledgeBase::new();
    build_template(&mut template, &scenario::request_lock_template_spec()).expect("template builds");
    let findings = validate(&template);
    v.check(findings.is_empty(), || format!("lock template: {}", render(&findings)));
    v.artifact("template.nt", export_ntriples(&template));

    let process = CaseStudy::build(&scenario::case_study_document()).expect("case study builds");
    let findings = validate(&process.kb);
    v.check(findings.is_empty(), || format!("process: {}", render(&findings)));
    let states: Vec<String> =
        chain_states(&process.kb, &process.iri(PROCESS)).iter().map(|s| s.local_name().to_string()).collect();
    v.check(states == STATES, || format!("process chain is {states:?}"));
    v.artifact("process.nt", export_ntriples(&process.kb));

    let corpus = Corpus::build().expect("case study realizes and runs");
    let kb = corpus.kb();
    let findings = validate(kb);
    v.check(findings.is_empty(), || format!("realization: {}", render(&findings)));
    let has = edge_count(kb, Prop::HasPlanExecution);
    let performs = edge_count(kb, Prop::PerformsPlanExecution);
    v.check(has == 3, || format!("{has} hasPlanExecution edges"));
    v.check(performs == 3, || format!("{performs} performsPlanExecution edges"));
    for root in EXEC_ROOTS {
        let iri = corpus.iri(&format!("ex:{root}"));
        v.check(kb.contains(&iri), || format!("missing execution root {root}"));
    }

    // The event hangs off the modify state and fires exactly once, there.
    let fired: Vec<(usize, usize)> = corpus.trace.steps.iter().map(|s| (s.index, s.events.len())).collect();
    v.check(fired == [(0, 0), (1, 1), (2, 0)], || format!("events fired per step: {fired:?}"));
    v.check(edge_count(kb, Prop::TriggersEvent) >= 1, || "no triggersEvent edge".into());
    v.artifact("realization.nt", export_ntriples(kb));
    v.artifact("trace.jsonl", corpus.trace.to_json_lines());

    let roles = BuildDocument {
        agents: vec![ALICE.into()],
        behaviours: scenario::case_study_document().behaviours,
        roles: vec![RoleGrant {
            agent: ALICE.into(),
            role_type: scenario::ROLE_TYPE.into(),
            behaviours: BEHAVIOURS[1..].iter().map(|b| b.to_string()).collect(),
            deprecated: false,
        }],
        ..BuildDocument::default()
    };
    let roles = CaseStudy::build(&roles).expect("role graph builds");
    let findings = validate(&roles.kb);
    v.check(findings.is_empty(), || format!("role graph: {}", render(&findings)));
    let alice = roles.iri(ALICE);
    for b in &BEHAVIOURS[1..] {
        let source = check_capability(&roles.kb, &alice, &roles.iri(b));
        v.check(matches!(source, CapabilitySource::ViaRole(_)), || format!("{b}: {source:?}"));
    }
    v.artifact("roles.nt", export_ntriples(&roles.kb));

    v.summary = format!("template, process, realization with event, role graph all validate to []; {has} hasPlanExecution, {performs} performsPlanExecution");
    v
}

// ---------------------------------------------------------------------------
// 2. Mutation suite

fn mutation_suite() -> Verdict {
    let mut v = Verdict::default();
    let corpus = Corpus::build().expect("corpus builds");
    let clean = validate(corpus.kb());
    v.check(clean.is_empty(), || format!("unmutated corpus: {}", render(&clean)));

    let mutations = scenario::mutations(&corpus);
    let deletions = mutations.iter().filter(|m| m.is_deletion()).count();
    v.check(deletions >= MIN_DELETIONS, || format!("only {deletions} deletions"));
    let mut exact = 0;
    for m in &mutations {
        let mut kb = corpus.kb().clone();
        if !m.apply(&mut kb) {
            v.failures.push(format!("{} did not change the graph", m.id));
            continue;
        }
        let findings = validate(&kb);
        let codes: BTreeSet<_> = findings.iter().map(|f| f.code).collect();
        if codes == m.expected {
            exact += 1;
        } else {
            v.failures.push(format!("{}: expected {:?}, got {:?}", m.id, m.expected, codes));
        }
        v.artifact(format!("mutation-{}", m.id), render(&findings));
    }
    v.summary = format!(
        "{exact}/{} mutations ({deletions} deletions) yield exactly their codes; 0 false positives on the clean corpus",
        mutations.len()
    );
    v
}

// ---------------------------------------------------------------------------
// 3. Role gating

struct CliRun {
    code: i32,
    stdout: String,
}

fn oasis(args: &[&str]) -> CliRun {
    let out = Command::new(env!("CARGO_BIN_EXE_oasis"))
        .args(args)
        .env_remove("OASIS_PREFIX_MAP")
        .output()
        .expect("oasis binary runs");
    CliRun { code: out.status.code().unwrap_or(-1), stdout: String::from_utf8_lossy(&out.stdout).into_owned() }
}

/// A random population of agents and role grants in which `target` holds
/// exactly one role providing the three case-study behaviours.
fn role_configuration(seed: u64) -> (BuildDocument, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agents: Vec<String> = (0..rng.gen_range(1..=4)).map(|i| format!("ex:agent{seed}_{i}")).collect();
    let target = agents[rng.gen_range(0..agents.len())].clone();
    let mut doc = scenario::document_for(&[], false);
    doc.agents = agents.clone();
    for agent in &agents {
        let grants = if *agent == target { rng.gen_range(1..=3) } else { rng.gen_range(0..=2) };
        for g in 0..grants {
            let behaviours: Vec<String> = if *agent == target && g == 0 {
                BEHAVIOURS.iter().map(|b| b.to_string()).collect()
            } else {
                let mut pool: Vec<&str> = BEHAVIOURS.to_vec();
                pool.shuffle(&mut rng);
                let keep = rng.gen_range(1..=3);
                let mut kept: Vec<String> = pool[..keep].iter().map(|b| b.to_string()).collect();
                if *agent == target {
                    // Other roles of the target never cover the behaviour it
                    // is tested on, so the first grant stays the only source.
                    kept.retain(|b| b != BEHAVIOURS[1]);
                }
                kept
            };
            if behaviours.is_empty() {
                continue;
            }
            doc.roles.push(RoleGrant {
                agent: agent.clone(),
                role_type: format!("ex:role{}", rng.gen_range(0..1000)),
                behaviours,
                deprecated: false,
            });
        }
    }
    (doc, target)
}

fn assignment_file(case: &CaseStudy, agent: &Iri) -> String {
    let mut map = serde_json::Map::new();
    for (state, behaviour) in scenario::state_behaviours(PROCESS) {
        map.insert(
            case.iri(state).to_string(),
            serde_json::json!({ "agent": agent.to_string(), "behaviour": case.iri(behaviour).to_string() }),
        );
    }
    serde_json::to_string_pretty(&map).unwrap() + "\n"
}

fn run_cli(dir: &Path, kb: &KnowledgeBase, assign: &str, stem: &str) -> CliRun {
    let kb_path = dir.join(format!("{stem}.nt"));
    let assign_path = dir.join(format!("{stem}.assign.json"));
    fs::write(&kb_path, export_ntriples(kb)).unwrap();
    fs::write(&assign_path, assign).unwrap();
    let s = |p: &Path| p.to_str().unwrap().to_string();
    oasis(&[
        "run",
        "--kb",
        &s(&kb_path),
        "--process",
        "ex:resourceModificationProcess",
        "--assign",
        &s(&assign_path),
        "--trace",
        &s(&dir.join(format!("{stem}.trace.jsonl"))),
        "--out",
        &s(&dir.join(format!("{stem}.out.nt"))),
    ])
}

fn role_gating() -> Verdict {
    let mut v = Verdict::default();
    let dir = TempDir::new().unwrap();
    let mut gated = 0;
    for seed in 0..ROLE_CONFIGURATIONS {
        let (doc, target) = role_configuration(seed);
        let mut case = CaseStudy::build(&doc).unwrap_or_else(|e| panic!("configuration {seed}: {e}"));
        let agent = case.iri(&target);
        let behaviour = case.iri(BEHAVIOURS[1]);
        let before = check_capability(&case.kb, &agent, &behaviour);
        let CapabilitySource::ViaRole(role) = before.clone() else {
            v.failures.push(format!("configuration {seed}: before deprecation {before:?}"));
            continue;
        };
        let assign = assignment_file(&case, &agent);
        let ok = run_cli(dir.path(), &case.kb, &assign, &format!("ok{seed}"));
        deprecate_role(&mut case.kb, &role).unwrap();
        let after = check_capability(&case.kb, &agent, &behaviour);
        let denied = run_cli(dir.path(), &case.kb, &assign, &format!("dep{seed}"));
        let pass = ok.code == 0
            && after == CapabilitySource::None
            && denied.code == 2
            && denied.stdout.starts_with("ROLE_DEPRECATED_USE\t");
        if pass {
            gated += 1;
        } else {
            v.failures.push(format!(
                "configuration {seed}: run before exit {}, after {after:?}, run after exit {} `{}`",
                ok.code,
                denied.code,
                denied.stdout.trim_end()
            ));
        }
        v.artifact(format!("gating-{seed}"), format!("{before:?}|{after:?}|{}|{}", ok.code, denied.stdout));
    }
    v.summary = format!(
        "{gated}/{ROLE_CONFIGURATIONS} configurations: ViaRole -> None, `oasis run` exit 2 ROLE_DEPRECATED_USE"
    );
    v
}

// ---------------------------------------------------------------------------
// 4. Serialization

fn sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn serialization() -> Verdict {
    let mut v = Verdict::default();
    let mut identical = 0;
    for seed in 0..ROUND_TRIPS {
        let kb = random_kb(seed, seed % 2 == 0).expect("generated graphs execute");
        let text = export_ntriples(&kb);
        let again = import_turtle(&text).map(|back| export_ntriples(&back));
        match again {
            Ok(t) if t == text => identical += 1,
            Ok(_) => v.failures.push(format!("graph {seed}: export(import(export)) differs")),
            Err(e) => v.failures.push(format!("graph {seed}: {e}")),
        }
        v.artifact(format!("graph-{seed}"), text);
    }

    let kb = random_kb(ROUND_TRIPS, true).unwrap();
    let reference = sha256(export_ntriples(&kb).as_bytes());
    let mut assertions: Vec<Assertion> = kb.assertions().cloned().collect();
    let mut hashes = BTreeSet::new();
    for seed in 0..SHUFFLES {
        assertions.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut shuffled = KnowledgeBase::new();
        for a in &assertions {
            shuffled.insert_raw(a.clone());
        }
        hashes.insert(sha256(export_ntriples(&shuffled).as_bytes()));
    }
    v.check(hashes.len() == 1 && hashes.contains(&reference), || {
        format!("{} distinct hashes over shuffles", hashes.len())
    });
    v.summary = format!(
        "{identical}/{ROUND_TRIPS} round trips byte-identical; {SHUFFLES} shuffles -> {} distinct hash",
        hashes.len()
    );
    v
}

// ---------------------------------------------------------------------------
// 5. Subproperty entailment

/// Transitive closure of the declared direct super-property links.
fn declared_pairs() -> Vec<(Prop, Prop)> {
    let mut pairs = Vec::new();
    for &p in Prop::ALL {
        let mut cur = vocabulary().spec(p).super_property;
        while let Some(s) = cur {
            pairs.push((p, s));
            cur = vocabulary().spec(s).super_property;
        }
    }
    pairs
}

fn subproperty_entailment() -> Verdict {
    let mut v = Verdict::default();
    let pairs = declared_pairs();
    v.check(pairs.len() >= MIN_SUBPROPERTY_PAIRS, || format!("only {} pairs", pairs.len()));
    let (s, o) = (Iri::new("http://example.org/s").unwrap(), Iri::new("http://example.org/o").unwrap());
    let mut good = 0;
    for &(sub, sup) in &pairs {
        let mut kb = KnowledgeBase::new();
        kb.assert_edge(&s, sub, &o).unwrap();
        let forward = kb.entails(&s, sup.iri(), &o).unwrap();
        let mut kb = KnowledgeBase::new();
        kb.assert_edge(&s, sup, &o).unwrap();
        let backward = kb.entails(&s, sub.iri(), &o).unwrap();
        if forward && !backward {
            good += 1;
        } else {
            v.failures.push(format!(
                "{}/{}: forward {forward}, backward {backward}",
                sub.local_name(),
                sup.local_name()
            ));
        }
    }
    let listing: String = pairs.iter().map(|(a, b)| format!("{} {}\n", a.local_name(), b.local_name())).collect();
    v.artifact("pairs", listing);
    v.summary = format!("{good}/{} pairs: sub entails super, super does not entail sub", pairs.len());
    v
}

// ---------------------------------------------------------------------------
// 6. Concurrency lab

fn concurrency_lab() -> Verdict {
    let mut v = Verdict::default();
    let document = scenario::document_for(&[ALICE, BOB], true);

    let mut case = CaseStudy::build(&document).unwrap();
    let handles = vec![case.realize(PROCESS, ALICE).unwrap(), case.realize(PROCESS, BOB).unwrap()];
    let progs = programs(&case.kb, &handles, &StepKindMap::default()).unwrap();
    let protocol_schedules = enumerate_schedules(&progs, DEFAULT_BOUND).unwrap();
    let complete = protocol_schedules.iter().filter(|s| !s.deadlock).count();
    let protocol = detect_races(&case.kb, &handles, DEFAULT_BOUND).unwrap();
    v.check(complete == protocol_schedules.len(), || "protocol schedules deadlock".into());
    v.check(protocol.is_empty(), || format!("protocol agents race: {protocol:?}"));

    let mut case = CaseStudy::build(&document).unwrap();
    let handles = vec![case.realize(PROCESS, ALICE).unwrap(), case.realize(LOCKLESS_PROCESS, BOB).unwrap()];
    let lockless = detect_races(&case.kb, &handles, DEFAULT_BOUND).unwrap();
    let unlocked = lockless.iter().filter(|r| r.kind == RaceKind::UnlockedModify).count();
    v.check(unlocked >= 1, || "no UnlockedModify without the lock protocol".into());

    let mut case = CaseStudy::build(&document).unwrap();
    let handles =
        vec![case.realize(MODIFY_ONLY_PROCESS, ALICE).unwrap(), case.realize(MODIFY_ONLY_PROCESS, BOB).unwrap()];
    let progs = programs(&case.kb, &handles, &StepKindMap::default()).unwrap();
    let unblocked = enumerate_schedules(&progs, DEFAULT_BOUND).unwrap().len();
    v.check(unblocked == 20, || format!("{unblocked} schedules for two unblocked 3-step handles"));

    let lines = |rs: &[oasis_core::lab::RaceReport]| rs.iter().map(|r| r.to_json() + "\n").collect::<String>();
    v.artifact("protocol.races", lines(&protocol));
    v.artifact("lockless.races", lines(&lockless));
    v.summary = format!(
        "protocol: {} schedules at bound {DEFAULT_BOUND}, {} races; lockless: {unlocked} UnlockedModify; unblocked: {unblocked} schedules",
        protocol_schedules.len(),
        protocol.len()
    );
    v
}

// ---------------------------------------------------------------------------
// 7. Determinism

type Criterion = (&'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 6] = [
    ("case-study reconstruction", case_study_reconstruction),
    ("mutation suite", mutation_suite),
    ("role gating", role_gating),
    ("serialization", serialization),
    ("subproperty entailment", subproperty_entailment),
    ("concurrency lab", concurrency_lab),
];

fn digests(verdicts: &[Verdict]) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for (i, v) in verdicts.iter().enumerate() {
        for (name, bytes) in &v.artifacts {
            out.insert(format!("{}/{name}", i + 1), sha256(bytes));
        }
    }
    out
}

fn report(n: usize, name: &str, v: &Verdict) -> bool {
    let pass = v.failures.is_empty();
    println!("{} {n}. {name}: {}", if pass { "PASS" } else { "FAIL" }, v.summary);
    for f in v.failures.iter().take(10) {
        println!("     - {f}");
    }
    if v.failures.len() > 10 {
        println!("     - … {} more", v.failures.len() - 10);
    }
    pass
}

fn main() -> ExitCode {
    let start = Instant::now();
    let first: Vec<Verdict> = CRITERIA.iter().map(|(_, run)| run()).collect();
    let mut all = true;
    for (i, ((name, _), v)) in CRITERIA.iter().zip(&first).enumerate() {
        all &= report(i + 1, name, v);
    }

    let second: Vec<Verdict> = CRITERIA.iter().map(|(_, run)| run()).collect();
    let (a, b) = (digests(&first), digests(&second));
    let differing: Vec<&String> = a.keys().chain(b.keys()).filter(|k| a.get(*k) != b.get(*k)).collect();
    let mut determinism = Verdict::default();
    determinism.check(!a.is_empty(), || "no artifacts were produced".into());
    for k in &differing {
        determinism.failures.push(format!("{k} differs between runs"));
    }
    determinism.summary = format!(
        "{}/{} artifact hashes identical across two runs of criteria 1-6",
        a.len().saturating_sub(differing.len()),
        a.len()
    );
    all &= report(7, "determinism", &determinism);

    let elapsed = start.elapsed().as_secs_f64();
    let within = elapsed < BUDGET_SECS;
    println!("{} runtime: {elapsed:.1}s (budget {BUDGET_SECS:.0}s)", if within { "PASS" } else { "FAIL" });
    all &= within;

    println!("{}", if all { "acceptance: all criteria PASS" } else { "acceptance: FAILED" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
