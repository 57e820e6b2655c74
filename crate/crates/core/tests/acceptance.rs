//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any hard criterion fails.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use skolem_core::frontend::{order_variables, parse_qdimacs};
use skolem_core::gen::{random_instance, GenParams};
use skolem_core::skolem::{
    cegar_skolem_observed, init_abs_ref, mono_skolem, reverse_substitute, update_abs_ref, Budget, CbState,
    CegarConfig, CegarObserver, ErrorQuery, GeneralizeStrategy, UpdateTrace,
};
use skolem_core::verify::{certify_exhaustive, certify_sat, exact_cb, TruthTable};
use skolem_core::{AigManager, Assignment, FactoredSpec, NodeRef, VarId};

const SUITE_SEED: u64 = 0x5EED_2015;
const SUITE_SIZE: u64 = 500;
const LEMMA_VARS: usize = 10;

struct Report {
    hard_failures: usize,
}

impl Report {
    fn line(&mut self, id: u32, name: &str, ok: bool, detail: String) {
        println!("[{}] {} {}: {}", if ok { "PASS" } else { "FAIL" }, id, name, detail);
        if !ok {
            self.hard_failures += 1;
        }
    }
}

fn equivalent(mgr: &AigManager, a: NodeRef, b: NodeRef, vars: &[VarId]) -> bool {
    TruthTable::of(mgr, a, vars).ok() == TruthTable::of(mgr, b, vars).ok()
}

fn golden(r: &mut Report) {
    let start = Instant::now();
    let mut problems: Vec<String> = Vec::new();
    let text = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/example1.qdimacs"))
        .expect("fixture");
    let mut spec = parse_qdimacs(&text).expect("parses");
    let all = [VarId(1), VarId(2), VarId(3), VarId(4), VarId(5)];
    let ys = [VarId(3), VarId(4), VarId(5)];

    let (mut st, psi_a) = init_abs_ref(&mut spec);
    {
        let m = &mut spec.manager;
        let (x2, y1, y2, y3) = (m.mk_var(VarId(2)), m.mk_var(VarId(3)), m.mk_var(VarId(4)), m.mk_var(VarId(5)));
        let want = [
            ("cbr1[1]", st.cbr1[0].function(), m.mk_and(x2, y1)),
            ("cbr0[1]", st.cbr0[0].function(), m.mk_and(x2, !y3)),
            ("cbr1[2]", st.cbr1[1].function(), NodeRef::FALSE),
            ("cbr0[2]", st.cbr0[1].function(), m.mk_and(y2, y3)),
            ("psiA[1]", psi_a.psi[0], m.mk_or(!x2, !y1)),
            ("psiA[2]", psi_a.psi[1], NodeRef::TRUE),
        ];
        for (name, got, exp) in want {
            if !equivalent(m, got, exp, &all) {
                problems.push(format!("{} differs", name));
            }
        }
    }

    let query = ErrorQuery::new(&mut spec);
    let mut oracle = skolem_core::sat::SatOracle::new();
    let mut refinements = 0;
    loop {
        let psi: Vec<NodeRef> = (0..st.len()).map(|i| st.abstract_psi(i)).collect();
        let cex = query.check(&mut spec.manager, &spec.x_order, &psi, &mut oracle).expect("oracle");
        match cex {
            None => break,
            Some(pi) => {
                if refinements >= 3 {
                    problems.push("more than 3 refinements".into());
                    break;
                }
                update_abs_ref(&mut spec.manager, &spec.x_order, &mut st, &pi, GeneralizeStrategy::default())
                    .expect("refines");
                refinements += 1;
            }
        }
    }
    if refinements == 0 {
        problems.push("first error formula was UNSAT".into());
    }
    let fin = reverse_substitute(&mut spec.manager, &spec.x_order, st.abstract_vector());
    let m = &mut spec.manager;
    let (y1, y3) = (m.mk_var(VarId(3)), m.mk_var(VarId(5)));
    let e1 = m.mk_or(!y1, !y3);
    let e2 = m.mk_or(!y1, y3);
    if !equivalent(m, fin.psi[0], e1, &ys) || !equivalent(m, fin.psi[1], e2, &ys) {
        problems.push("final vector differs".into());
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        problems.push(format!("took {:?}", elapsed));
    }
    let ok = problems.is_empty();
    let detail = if ok {
        format!("{} refinement(s), final vector matches, {:.1} ms", refinements, elapsed.as_secs_f64() * 1e3)
    } else {
        problems.join("; ")
    };
    r.line(1, "golden example trace", ok, detail);
}

/// Exact Cb tables for every position, or `None` above the lemma bound.
fn exact_tables(spec: &FactoredSpec) -> Option<Vec<(TruthTable, TruthTable)>> {
    if spec.n() + spec.m() > LEMMA_VARS {
        return None;
    }
    Some((0..spec.n()).map(|i| (exact_cb(spec, i, false).unwrap(), exact_cb(spec, i, true).unwrap())).collect())
}

#[derive(Default)]
struct InvariantWatch {
    exact: Option<Vec<(TruthTable, TruthTable)>>,
    cbr1_before: Vec<bool>,
    last_pi: Option<Assignment>,
    checked: usize,
    failures: Vec<String>,
    repeated: usize,
    not_excluded: usize,
}

fn holds(mgr: &AigManager, f: NodeRef, pi: &Assignment) -> bool {
    mgr.eval(f, pi).expect("total counterexample")
}

impl CegarObserver for InvariantWatch {
    fn on_counterexample(&mut self, mgr: &mut AigManager, state: &CbState, pi: &Assignment) {
        if self.last_pi.as_ref() == Some(pi) {
            self.repeated += 1;
        }
        self.cbr1_before = state.cbr1.iter().map(|s| holds(mgr, s.function(), pi)).collect();
        let Some(exact) = &self.exact else { return };
        self.checked += 1;
        let (cb0, cb1) = exact.last().expect("n >= 1");
        if cb0.value(pi) && cb1.value(pi) {
            self.failures.push("3a: both exact Cb hold at the last position".into());
        }
        let pivot = (0..state.len()).any(|m| holds(mgr, state.cbr0[m].function(), pi) && holds(mgr, state.cbr1[m].function(), pi));
        if !pivot {
            self.failures.push("3b: no pivot".into());
        }
    }

    fn on_refined(&mut self, mgr: &mut AigManager, state: &CbState, pi: &Assignment, _trace: &UpdateTrace) {
        let after: Vec<bool> = state.cbr1.iter().map(|s| holds(mgr, s.function(), pi)).collect();
        let flipped = self.cbr1_before.iter().zip(&after).any(|(&b, &a)| !b && a);
        if self.exact.is_some() && !flipped {
            self.failures.push("4: no cbr1 set flipped to 1".into());
        }
        if !flipped {
            self.not_excluded += 1;
        }
        self.last_pi = Some(pi.clone());
    }
}

struct InstanceOutcome {
    certified: bool,
    detail: Option<String>,
    lemma_checked: usize,
    lemma_failures: Vec<String>,
    soundness: Option<bool>,
    cegar_avg: f64,
    mono_avg: f64,
    repeated: usize,
    not_excluded: usize,
    budget_hit: bool,
}

fn build(index: u64) -> FactoredSpec {
    order_variables(random_instance(SUITE_SEED, index, &GenParams::default()).to_spec())
}

fn run_instance(index: u64) -> InstanceOutcome {
    let mut out = InstanceOutcome {
        certified: true,
        detail: None,
        lemma_checked: 0,
        lemma_failures: Vec::new(),
        soundness: None,
        cegar_avg: 0.0,
        mono_avg: 0.0,
        repeated: 0,
        not_excluded: 0,
        budget_hit: false,
    };
    let fail = |out: &mut InstanceOutcome, msg: String| {
        out.certified = false;
        out.detail.get_or_insert(msg);
    };

    let mut spec = build(index);
    match mono_skolem(&mut spec, &Budget::default()) {
        Ok((v, stats)) => {
            out.mono_avg = stats.avg_size;
            if !certify_exhaustive(&spec, &v).unwrap() || !certify_sat(&mut spec, &v).unwrap() {
                fail(&mut out, format!("instance {}: mono vector rejected", index));
            }
        }
        Err(e) => {
            out.budget_hit |= matches!(e, skolem_core::skolem::SynthError::Budget { .. });
            fail(&mut out, format!("instance {}: mono failed: {}", index, e));
        }
    }

    let mut spec = build(index);
    let mut watch = InvariantWatch { exact: exact_tables(&spec), ..InvariantWatch::default() };
    match cegar_skolem_observed(&mut spec, &CegarConfig::default(), &mut watch) {
        Ok(o) => {
            out.cegar_avg = o.stats.avg_size;
            if !certify_exhaustive(&spec, &o.vector).unwrap() || !certify_sat(&mut spec, &o.vector).unwrap() {
                fail(&mut out, format!("instance {}: cegar vector rejected", index));
            }
            if let Some(exact) = &watch.exact {
                let sound = exact.iter().enumerate().all(|(i, (cb0, cb1))| {
                    let r0 = TruthTable::of(&spec.manager, o.state.cbr0[i].function(), cb0.vars()).unwrap();
                    let r1 = TruthTable::of(&spec.manager, o.state.cbr1[i].function(), cb1.vars()).unwrap();
                    r0.implies(cb0) && r1.implies(cb1)
                });
                out.soundness = Some(sound);
            }
        }
        Err(e) => {
            out.budget_hit |= matches!(e, skolem_core::skolem::SynthError::Budget { .. });
            fail(&mut out, format!("instance {}: cegar failed: {}", index, e));
        }
    }
    out.lemma_checked = watch.checked;
    out.lemma_failures = watch.failures.iter().map(|f| format!("instance {}: {}", index, f)).collect();
    out.repeated = watch.repeated;
    out.not_excluded = watch.not_excluded;
    out
}

fn suite(r: &mut Report) {
    let start = Instant::now();
    let outcomes: Vec<InstanceOutcome> = (0..SUITE_SIZE).map(run_instance).collect();
    let elapsed = start.elapsed();

    let certified = outcomes.iter().filter(|o| o.certified).count();
    let first_bad = outcomes.iter().find_map(|o| o.detail.clone());
    let ok = certified == outcomes.len() && elapsed < Duration::from_secs(300);
    r.line(
        2,
        "oracle equivalence suite",
        ok,
        format!(
            "{}/{} instances certified for both engines in {:.1} s{}",
            certified,
            outcomes.len(),
            elapsed.as_secs_f64(),
            first_bad.map(|d| format!(" (first failure: {})", d)).unwrap_or_default()
        ),
    );

    let checked: usize = outcomes.iter().map(|o| o.lemma_checked).sum();
    let lemma_fail: Vec<&String> = outcomes.iter().flat_map(|o| &o.lemma_failures).collect();
    r.line(
        3,
        "lemma suite",
        lemma_fail.is_empty() && checked > 0,
        format!(
            "{} counterexamples checked, {} violations{}",
            checked,
            lemma_fail.len(),
            lemma_fail.first().map(|d| format!(" (first: {})", d)).unwrap_or_default()
        ),
    );

    let small: Vec<bool> = outcomes.iter().filter_map(|o| o.soundness).collect();
    let sound = small.iter().filter(|&&s| s).count();
    r.line(
        4,
        "refinement soundness",
        sound == small.len() && !small.is_empty(),
        format!("{}/{} small instances have every cb set below the exact Cb", sound, small.len()),
    );

    let compared: Vec<&InstanceOutcome> = outcomes.iter().filter(|o| o.certified).collect();
    let smaller = compared.iter().filter(|o| o.cegar_avg <= o.mono_avg).count();
    let frac = smaller as f64 / compared.len().max(1) as f64;
    let verdict = if frac >= 0.8 { "meets" } else { "below" };
    println!(
        "[{}] 5 size trend: cegar avg size <= mono avg size on {}/{} instances ({:.1}%), {} the 80% expectation",
        if frac >= 0.8 { "PASS" } else { "REPORT" },
        smaller,
        compared.len(),
        frac * 100.0,
        verdict
    );

    let repeated: usize = outcomes.iter().map(|o| o.repeated).sum();
    let not_excluded: usize = outcomes.iter().map(|o| o.not_excluded).sum();
    let budget = outcomes.iter().filter(|o| o.budget_hit).count();
    r.line(
        6,
        "progress and termination",
        repeated == 0 && not_excluded == 0 && budget == 0,
        format!(
            "{} repeated consecutive counterexamples, {} refinements that left π unexcluded, {} budget hits",
            repeated, not_excluded, budget
        ),
    );
}

/// Clause list read straight from the file, independent of the crate's
/// parser.
fn reference_clauses(text: &str) -> (u32, Vec<Vec<i32>>) {
    let mut vars = 0;
    let mut clauses = Vec::new();
    let mut cur = Vec::new();
    for line in text.lines().map(str::trim) {
        match line.split_whitespace().next() {
            None | Some("c") | Some("a") | Some("e") => continue,
            Some("p") => {
                vars = line.split_whitespace().nth(2).unwrap().parse().unwrap();
                continue;
            }
            _ => {}
        }
        for tok in line.split_whitespace() {
            let l: i32 = tok.parse().unwrap();
            if l == 0 {
                clauses.push(std::mem::take(&mut cur));
            } else {
                cur.push(l);
            }
        }
    }
    (vars, clauses)
}

fn format_fidelity(r: &mut Report) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut paths: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "qdimacs"))
        .collect();
    paths.sort();
    let mut bad = Vec::new();
    let mut rows = 0usize;
    for p in &paths {
        let text = fs::read_to_string(p).unwrap();
        let (nv, clauses) = reference_clauses(&text);
        let mut spec = parse_qdimacs(&text).unwrap();
        let f = spec.conjunction();
        let vars: Vec<VarId> = (1..=nv).map(VarId).collect();
        let name = p.file_name().unwrap().to_string_lossy().to_string();
        if nv as usize > LEMMA_VARS {
            bad.push(format!("{} has more than {} variables", name, LEMMA_VARS));
            continue;
        }
        for row in 0..1u32 << nv {
            let val = |l: i32| (row >> (l.unsigned_abs() - 1) & 1 == 1) == (l > 0);
            let expected = clauses.iter().all(|c| c.iter().any(|&l| val(l)));
            let pi = Assignment::from_pairs(vars.iter().map(|&v| (v, row >> (v.0 - 1) & 1 == 1)));
            if spec.manager.eval(f, &pi).unwrap() != expected {
                bad.push(format!("{} row {}", name, row));
                break;
            }
            rows += 1;
        }
    }
    r.line(
        7,
        "format fidelity",
        bad.is_empty() && !paths.is_empty(),
        format!("{} fixtures, {} assignments compared{}", paths.len(), rows, if bad.is_empty() { String::new() } else { format!(", mismatches: {:?}", bad) }),
    );
}

fn main() -> ExitCode {
    let mut r = Report { hard_failures: 0 };
    golden(&mut r);
    suite(&mut r);
    format_fidelity(&mut r);
    if r.hard_failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{} criterion/criteria failed", r.hard_failures);
        ExitCode::FAILURE
    }
}
