//! Sentence batteries, seeded experiment suites and the prime divisibility
//! demonstrator.
//!
//! Every suite is deterministic in its seed: cases are generated from
//! per-case seeds, run in parallel, and collected in case order.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::boolean::{Algebra, IdealSpec, Mask, MonotonePolicy, QuotientBA, MAX_GROUND};
use crate::rational::{self, Rational};
use crate::reduced::{
    atomic_limsup_check, fubini_iso, max_product_points, reduced_product, Family, ReducedProduct,
};
use crate::structures::{check_isomorphism, random_structure, FiniteStructure, MAX_INPUT_UNIVERSE};
use crate::syntax::{free_vars, Formula, Signature, SymbolDecl, Term};
use crate::translate::{
    judge, level_sets_from_values, pad_shift_check, psi_count, psi_values, sigma_truth,
    weak_truth_is_downward_closed, DeterminingSequence, Translator,
};

/// Stored witnesses per report; further failures are only counted.
pub const MAX_WITNESSES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CapError {
    #[error("{what} = {value} exceeds the cap of {limit}")]
    Exceeded { what: &'static str, value: usize, limit: usize },
    #[error("config: {0}")]
    Config(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
}

/// How many formulas each battery level keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatteryLimits {
    /// Open formulas kept per depth, as material for quantifiers above.
    pub open_per_depth: usize,
    /// Sentences kept per depth.
    pub closed_per_depth: usize,
    /// Formulas whose translation has more ψ's than this are left out.
    pub max_psis: usize,
}

impl Default for BatteryLimits {
    fn default() -> Self {
        BatteryLimits { open_per_depth: 48, closed_per_depth: 64, max_psis: 32 }
    }
}

/// Resource caps, checked before anything is built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    pub max_depth: usize,
    pub max_omega: usize,
    pub max_universe: usize,
    pub max_n: u32,
    pub fv_families: usize,
    pub atomic_cases: usize,
    pub preservation_cases: usize,
    pub fubini_cases: usize,
    pub principal_cases: usize,
    pub battery: BatteryLimits,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_depth: 3,
            max_omega: 4,
            max_universe: 4,
            max_n: 2,
            fv_families: 200,
            atomic_cases: 1000,
            preservation_cases: 100,
            fubini_cases: 50,
            principal_cases: 20,
            battery: BatteryLimits::default(),
        }
    }
}

impl Caps {
    pub fn from_toml(text: &str) -> Result<Self, CapError> {
        let caps: Caps = toml::from_str(text).map_err(|e| CapError::Config(e.to_string()))?;
        caps.validate()?;
        Ok(caps)
    }

    pub fn validate(&self) -> Result<(), CapError> {
        exceeds("max_depth", self.max_depth, 4)?;
        exceeds("max_omega", self.max_omega, MAX_GROUND)?;
        exceeds("max_universe", self.max_universe, MAX_INPUT_UNIVERSE)?;
        exceeds("max_n", self.max_n as usize, 6)?;
        if self.max_omega == 0 || self.max_universe == 0 {
            return Err(CapError::Config("ground set and universe sizes must be positive".into()));
        }
        Ok(())
    }

    fn depth(&self, depth: usize) -> Result<(), CapError> {
        exceeds("depth", depth, self.max_depth)
    }

    fn ns(&self, ns: &[u32]) -> Result<(), CapError> {
        ns.iter().try_for_each(|&n| exceeds("n", n as usize, self.max_n as usize))
    }
}

fn exceeds(what: &'static str, value: usize, limit: usize) -> Result<(), CapError> {
    if value > limit {
        Err(CapError::Exceeded { what, value, limit })
    } else {
        Ok(())
    }
}

/// `P/1` (Lipschitz 2), `f/2` (Lipschitz 8) and a constant `c`.
pub fn default_signature() -> Arc<Signature> {
    Arc::new(
        Signature::new(
            vec![SymbolDecl::new("P", 1, rational::int(2))],
            vec![SymbolDecl::new("f", 2, rational::int(8))],
            vec!["c".into()],
        )
        .expect("fixed signature is valid"),
    )
}

#[derive(Debug, Clone)]
pub struct Battery {
    pub signature: Arc<Signature>,
    pub depth: usize,
    pub sentences: Vec<Formula>,
}

impl Battery {
    pub fn up_to(&self, depth: usize) -> impl Iterator<Item = &Formula> {
        self.sentences.iter().filter(move |f| f.depth() <= depth)
    }
}

pub fn battery(sig: &Arc<Signature>, depth: usize) -> Result<Battery, CapError> {
    battery_with(sig, depth, &BatteryLimits::default())
}

/// Two variable names that do not clash with declared symbols.
fn variable_pool(sig: &Signature) -> Vec<String> {
    ["x", "y", "z", "u", "v", "w"]
        .iter()
        .filter(|v| sig.is_variable_name(v))
        .take(2)
        .map(|v| v.to_string())
        .collect()
}

fn tuples<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                items.iter().map(move |x| {
                    let mut t = t.clone();
                    t.push(x.clone());
                    t
                })
            })
            .collect();
    }
    out
}

/// Atomic formulas plus `Zero` and `One`, over variables from the pool,
/// the constants, and one layer of function application.
pub fn atoms(sig: &Signature) -> Vec<Formula> {
    let vars = variable_pool(sig);
    let mut simple: Vec<Term> = vars.iter().map(|v| Term::var(v)).collect();
    simple.extend(sig.consts().iter().map(|c| Term::constant(c)));
    let mut terms = simple.clone();
    for f in sig.funcs() {
        if simple.len().pow(f.arity as u32) <= 64 {
            terms.extend(tuples(&simple, f.arity).into_iter().map(|a| Term::app(&f.name, a)));
        }
    }
    let mut out = vec![Formula::Zero, Formula::One];
    for p in sig.preds() {
        let source = if terms.len().pow(p.arity as u32) <= 256 { &terms } else { &simple };
        out.extend(tuples(source, p.arity).into_iter().map(|a| Formula::atomic(&p.name, a)));
    }
    for (i, a) in terms.iter().enumerate() {
        for b in &terms[i + 1..] {
            out.push(Formula::dist(a.clone(), b.clone()));
        }
    }
    out
}

fn kind(f: &Formula) -> usize {
    match f {
        Formula::Half(_) => 0,
        Formula::Monus(..) => 1,
        Formula::Sup(..) => 2,
        _ => 3,
    }
}

/// Keeps at most `cap` candidates, drawing round-robin across top-level
/// connectives from seeded shuffles so each kind is represented.
fn select(cands: BTreeSet<Formula>, cap: usize, rng: &mut ChaCha8Rng) -> Vec<Formula> {
    if cands.len() <= cap {
        return cands.into_iter().collect();
    }
    let mut buckets: Vec<Vec<Formula>> = vec![Vec::new(); 4];
    for f in cands {
        buckets[kind(&f)].push(f);
    }
    for b in &mut buckets {
        b.shuffle(rng);
        b.reverse();
    }
    let mut out = BTreeSet::new();
    while out.len() < cap && buckets.iter().any(|b| !b.is_empty()) {
        for b in &mut buckets {
            if out.len() < cap {
                if let Some(f) = b.pop() {
                    out.insert(f);
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Restricted sentences up to `depth`, deterministic and deduplicated.
pub fn battery_with(
    sig: &Arc<Signature>,
    depth: usize,
    limits: &BatteryLimits,
) -> Result<Battery, CapError> {
    exceeds("depth", depth, 4)?;
    let vars = variable_pool(sig);
    let level0 = atoms(sig);
    let mut sentences: Vec<Formula> = level0.iter().filter(|f| f.is_sentence()).cloned().collect();
    let mut lower: Vec<Formula> = level0.clone();
    let mut previous = level0;
    for d in 1..=depth {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + d as u64);
        let mut cands = BTreeSet::new();
        for a in &previous {
            cands.insert(Formula::half(a.clone()));
            let free = free_vars(a);
            for v in vars.iter().filter(|v| free.contains(v)) {
                cands.insert(Formula::sup(v, a.clone()));
                cands.insert(Formula::inf(v, a.clone()));
            }
            for b in &lower {
                cands.insert(Formula::monus(a.clone(), b.clone()));
                cands.insert(Formula::monus(b.clone(), a.clone()));
            }
        }
        cands.retain(|f| psi_count(f) <= limits.max_psis);
        let (closed, open): (BTreeSet<_>, BTreeSet<_>) =
            cands.into_iter().partition(Formula::is_sentence);
        let closed = select(closed, limits.closed_per_depth, &mut rng);
        let open = if d < depth { select(open, limits.open_per_depth, &mut rng) } else { vec![] };
        sentences.extend(closed.iter().cloned());
        previous = closed.into_iter().chain(open).collect();
        lower.extend(previous.iter().cloned());
    }
    Ok(Battery { signature: sig.clone(), depth, sentences })
}

/// One recorded failure or finding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub case: String,
    pub kind: String,
    pub detail: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: usize,
    pub failure_count: usize,
    /// Every failure counted by kind, including those past the witness cap.
    pub failure_kinds: BTreeMap<String, usize>,
    pub failures: Vec<Witness>,
    pub finding_count: usize,
    pub findings: Vec<Witness>,
    /// Wall time; left out of the JSON so reports compare byte for byte.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64) -> Self {
        SuiteReport {
            suite: suite.into(),
            seed,
            cases: 0,
            failure_count: 0,
            failure_kinds: BTreeMap::new(),
            failures: Vec::new(),
            finding_count: 0,
            findings: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    fn fail(&mut self, w: Witness) {
        self.failure_count += 1;
        *self.failure_kinds.entry(w.kind.clone()).or_default() += 1;
        if self.failures.len() < MAX_WITNESSES {
            self.failures.push(w);
        }
    }

    fn find(&mut self, w: Witness) {
        self.finding_count += 1;
        if self.findings.len() < MAX_WITNESSES {
            self.findings.push(w);
        }
    }

    fn absorb(&mut self, outcome: CaseOutcome) {
        self.cases += outcome.cases;
        outcome.failures.into_iter().for_each(|w| self.fail(w));
        outcome.findings.into_iter().for_each(|w| self.find(w));
    }

    pub fn summary(&self) -> String {
        let mut text = format!(
            "{}: {} cases, {} failures, {} findings, seed {}, {:.2?}",
            self.suite, self.cases, self.failure_count, self.finding_count, self.seed, self.elapsed
        );
        if !self.failure_kinds.is_empty() {
            let kinds: Vec<String> = self.failure_kinds.iter().map(|(k, c)| format!("{k} {c}")).collect();
            text.push_str(&format!(" [{}]", kinds.join(", ")));
        }
        text
    }
}

#[derive(Default)]
struct CaseOutcome {
    cases: usize,
    failures: Vec<Witness>,
    findings: Vec<Witness>,
}

impl CaseOutcome {
    fn fail(&mut self, case: &str, kind: &str, detail: Value) {
        self.failures.push(Witness { case: case.into(), kind: kind.into(), detail });
    }

    fn find(&mut self, case: &str, kind: &str, detail: Value) {
        self.findings.push(Witness { case: case.into(), kind: kind.into(), detail });
    }
}

fn run_cases(
    suite: &str,
    seed: u64,
    count: usize,
    case: impl Fn(usize) -> CaseOutcome + Sync + Send,
) -> SuiteReport {
    let start = Instant::now();
    let outcomes: Vec<CaseOutcome> = (0..count).into_par_iter().map(case).collect();
    let mut report = SuiteReport::new(suite, seed);
    outcomes.into_iter().for_each(|o| report.absorb(o));
    report.elapsed = start.elapsed();
    report
}

/// Independent seed for case `i`.
pub fn case_seed(seed: u64, i: usize) -> u64 {
    let mut z = seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn omega_labels(size: usize) -> Vec<String> {
    (1..=size).map(|k| k.to_string()).collect()
}

/// A random proper ideal on `{1..size}`.
pub fn random_ideal(size: usize, rng: &mut ChaCha8Rng) -> IdealSpec {
    let full: Mask = if size == 32 { !0 } else { (1 << size) - 1 };
    let kernel = loop {
        let k = rng.random::<u32>() & full;
        if k != full {
            break k;
        }
    };
    IdealSpec::close(omega_labels(size), &[kernel]).expect("size within ground cap")
}

/// Random ground set size, ideal and member structures within the caps.
pub fn random_family(sig: &Arc<Signature>, max_omega: usize, max_universe: usize, seed: u64) -> Family {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = rng.random_range(1..=max_omega);
    let ideal = random_ideal(size, &mut rng);
    let members = (0..size)
        .map(|_| {
            let n = rng.random_range(1..=max_universe);
            random_structure(sig, n, rng.random())
        })
        .collect();
    Family::new(ideal, members).expect("members share the signature")
}

fn family_json(fam: &Family) -> Value {
    json!({
        "ideal_kernel": fam.ideal().labels_of(fam.ideal().kernel()),
        "omega": fam.ideal().omega(),
        "universe_sizes": fam.members().iter().map(FiniteStructure::size).collect::<Vec<_>>(),
    })
}

fn show_all(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(rational::format_rational).collect()
}

/// Certify every battery sentence at every `n` against `families` random
/// families. Failures are broken implications or a value outside the
/// bounds; bound widths above `2/N` and non-monotone weak truth in `ℓ` are
/// findings.
pub fn suite_fv(
    caps: &Caps,
    depth: usize,
    ns: &[u32],
    families: usize,
    seed: u64,
) -> Result<SuiteReport, CapError> {
    caps.depth(depth)?;
    caps.ns(ns)?;
    let sig = default_signature();
    let bat = battery_with(&sig, depth, &caps.battery)?;
    let translator = Translator::new();
    let cap_omega = caps.max_omega;
    let cap_universe = caps.max_universe;
    Ok(run_cases("fv", seed, families, |k| {
        let fam_seed = case_seed(seed, k);
        let fam = random_family(&sig, cap_omega, cap_universe, fam_seed);
        let mut out = CaseOutcome::default();
        let rp = match reduced_product(&fam) {
            Ok(rp) => rp,
            Err(e) => {
                out.fail(&format!("family {k}"), "construction", json!(e.to_string()));
                return out;
            }
        };
        let ba = QuotientBA::new(fam.ideal().clone());
        for (s, f) in bat.sentences.iter().enumerate() {
            let value = rp.eval_at(f, &[]).expect("battery sentences evaluate");
            for &n in ns {
                out.cases += 1;
                let case = format!("family {k} sentence {s} n {n}");
                let ds = translator.translate(f, n).expect("battery is restricted");
                let values = psi_values(&ds, &fam, &[]).expect("sentences take no arguments");
                let sets = level_sets_from_values(&values, n);
                let (st, wt) = sigma_truth(&ds, &ba, &sets);
                let cert = judge(n, value.clone(), st, wt, sets);
                let detail = || {
                    json!({
                        "sentence": f.to_string(),
                        "n": n,
                        "family_seed": fam_seed,
                        "family": family_json(&fam),
                        "value": rational::format_rational(&cert.value),
                        "psi_values": values.iter().map(|r| show_all(r)).collect::<Vec<_>>(),
                        "bounds": &cert.bounds,
                        "level_sets": &cert.level_sets,
                    })
                };
                for c in &cert.failures {
                    let mut d = detail();
                    d["ell"] = json!(c.ell);
                    out.fail(&case, &format!("{:?}", c.direction), d);
                }
                if !cert.bounds.contains(n, &cert.value) {
                    out.fail(&case, "Containment", detail());
                }
                let two_steps = rational::ratio(2, 1 << n);
                if cert.bounds.width(n).is_some_and(|w| w > two_steps) {
                    out.find(&case, "Width", detail());
                }
                if !weak_truth_is_downward_closed(&cert.bounds.weak_truth) {
                    out.find(&case, "WeakTruthNotDownwardClosed", detail());
                }
            }
        }
        out
    }))
}

/// Cases of a [`suite_fv`] report whose value left `(lower, upper]`.
pub fn containment_failures(report: &SuiteReport) -> usize {
    report.failure_kinds.get("Containment").copied().unwrap_or(0)
}

/// The literal `inf_{S∈I} sup_{γ∉S} r_γ`, by enumerating the ideal.
pub fn limsup_literal(ideal: &IdealSpec, r: &[Rational]) -> Rational {
    ideal
        .members()
        .into_iter()
        .map(|s| {
            (0..r.len())
                .filter(|g| s >> g & 1 == 0)
                .map(|g| r[g].clone())
                .max()
                .unwrap_or_else(rational::zero)
        })
        .min()
        .expect("an ideal contains the empty set")
}

/// Random atomic formula and tuple per case; the reduced-product value
/// must equal the limsup of the coordinate values, computed both from the
/// cokernel and from the ideal's member list.
pub fn suite_atomic(caps: &Caps, cases: usize, seed: u64) -> Result<SuiteReport, CapError> {
    let sig = default_signature();
    let pool: Vec<Formula> = atoms(&sig)
        .into_iter()
        .filter(|f| matches!(f, Formula::Atomic(..) | Formula::Dist(..)))
        .collect();
    let (cap_omega, cap_universe) = (caps.max_omega, caps.max_universe);
    Ok(run_cases("atomic", seed, cases, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(case_seed(seed, k));
        let fam = random_family(&sig, cap_omega, cap_universe, rng.random());
        let phi = &pool[rng.random_range(0..pool.len())];
        let args: Vec<Vec<usize>> = free_vars(phi)
            .iter()
            .map(|_| fam.members().iter().map(|s| rng.random_range(0..s.size())).collect())
            .collect();
        let mut out = CaseOutcome { cases: 1, ..Default::default() };
        let case = format!("case {k}");
        let rp = reduced_product(&fam).expect("within caps");
        let check = atomic_limsup_check(&rp, phi, &args).expect("atom evaluates");
        let coords = fam.coordinate_values(phi, &args).expect("atom evaluates");
        let literal = limsup_literal(fam.ideal(), &coords);
        if !check.holds() || check.in_product != literal {
            out.fail(
                &case,
                "LimsupMismatch",
                json!({
                    "formula": phi.to_string(),
                    "args": args,
                    "family": family_json(&fam),
                    "coordinates": show_all(&coords),
                    "in_product": rational::format_rational(&check.in_product),
                    "limsup": rational::format_rational(&check.limsup),
                    "literal": rational::format_rational(&literal),
                }),
            );
        }
        out
    }))
}

fn random_perm(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Relabeled, permuted copies of every member; battery values and
/// level-set classes must agree exactly between the two reduced products.
pub fn suite_preservation(
    caps: &Caps,
    depth: usize,
    cases: usize,
    seed: u64,
) -> Result<SuiteReport, CapError> {
    caps.depth(depth)?;
    let sig = default_signature();
    let bat = battery_with(&sig, depth, &caps.battery)?;
    let translator = Translator::new();
    let ns: Vec<u32> = (0..=caps.max_n).collect();
    let (cap_omega, cap_universe) = (caps.max_omega, caps.max_universe);
    Ok(run_cases("preservation", seed, cases, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(case_seed(seed, k));
        let fam = random_family(&sig, cap_omega, cap_universe, rng.random());
        let copies = fam
            .members()
            .iter()
            .map(|s| {
                let moved = s.permuted(&random_perm(s.size(), &mut rng));
                let labels = (0..s.size()).map(|a| format!("b{a}")).collect();
                moved.relabeled(labels).expect("fresh labels are distinct")
            })
            .collect();
        let other = Family::new(fam.ideal().clone(), copies).expect("same shape");
        let mut out = CaseOutcome::default();
        let case = format!("case {k}");
        let (ra, rb) = (reduced_product(&fam).expect("caps"), reduced_product(&other).expect("caps"));
        let ba = QuotientBA::new(fam.ideal().clone());
        for f in &bat.sentences {
            out.cases += 1;
            let (va, vb) = (ra.eval_at(f, &[]).expect("eval"), rb.eval_at(f, &[]).expect("eval"));
            if va != vb {
                out.fail(
                    &case,
                    "Value",
                    json!({"sentence": f.to_string(), "a": rational::format_rational(&va),
                           "b": rational::format_rational(&vb), "family": family_json(&fam)}),
                );
            }
            for &n in &ns {
                let ds = translator.translate(f, n).expect("restricted");
                let sa = level_sets_from_values(&psi_values(&ds, &fam, &[]).expect("eval"), n);
                let sb = level_sets_from_values(&psi_values(&ds, &other, &[]).expect("eval"), n);
                let same = sa.strict_classes(&ba) == sb.strict_classes(&ba)
                    && sa.weak_classes(&ba) == sb.weak_classes(&ba)
                    && sigma_truth(&ds, &ba, &sa) == sigma_truth(&ds, &ba, &sb);
                if !same {
                    out.fail(
                        &case,
                        "LevelSets",
                        json!({"sentence": f.to_string(), "n": n, "a": sa, "b": sb}),
                    );
                }
            }
        }
        out
    }))
}

/// Pairs of ideals with isomorphic quotient algebras used by
/// [`suite_quotient_equiv`].
pub fn quotient_pairs() -> Vec<(&'static str, IdealSpec, IdealSpec)> {
    let close = |n, g: &[Mask]| IdealSpec::close(omega_labels(n), g).expect("small ground set");
    vec![
        ("same ideal", close(2, &[0b01]), close(2, &[0b01])),
        ("four-element quotients", close(3, &[0b001]), close(2, &[])),
        (
            "two-element quotients",
            close(1, &[]),
            IdealSpec::maximal_at(omega_labels(3), 0).expect("small ground set"),
        ),
    ]
}

/// Reduced powers of one structure over ideals with isomorphic quotients
/// give equal values on every battery sentence.
pub fn suite_quotient_equiv(
    caps: &Caps,
    depth: usize,
    structures: usize,
    seed: u64,
) -> Result<SuiteReport, CapError> {
    caps.depth(depth)?;
    let sig = default_signature();
    let bat = battery_with(&sig, depth, &caps.battery)?;
    let pairs = quotient_pairs();
    let cap_universe = caps.max_universe;
    Ok(run_cases("quotient", seed, structures * pairs.len(), |k| {
        let (s, p) = (k / pairs.len(), k % pairs.len());
        let (name, i, j) = &pairs[p];
        let mut rng = ChaCha8Rng::seed_from_u64(case_seed(seed, s));
        let a = random_structure(&sig, rng.random_range(1..=cap_universe), rng.random());
        let mut out = CaseOutcome::default();
        let case = format!("structure {s} pair {name}");
        let qi = QuotientBA::new(i.clone()).size();
        let qj = QuotientBA::new(j.clone()).size();
        if qi != qj {
            out.fail(&case, "QuotientSizes", json!({"left": qi, "right": qj}));
            return out;
        }
        let ri = reduced_product(&Family::power(i.clone(), &a)).expect("caps");
        let rj = reduced_product(&Family::power(j.clone(), &a)).expect("caps");
        for f in &bat.sentences {
            out.cases += 1;
            let (vi, vj) = (ri.eval_at(f, &[]).expect("eval"), rj.eval_at(f, &[]).expect("eval"));
            if vi != vj {
                out.fail(
                    &case,
                    "Value",
                    json!({"sentence": f.to_string(), "left": rational::format_rational(&vi),
                           "right": rational::format_rational(&vj)}),
                );
            }
        }
        out
    }))
}

/// Random instances of the iterated-versus-grid reduced power comparison.
pub fn suite_fubini(caps: &Caps, cases: usize, seed: u64) -> Result<SuiteReport, CapError> {
    let sig = default_signature();
    let cap_universe = caps.max_universe.min(3);
    let point_cap = max_product_points();
    Ok(run_cases("fubini", seed, cases, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(case_seed(seed, k));
        let a = random_structure(&sig, rng.random_range(1..=cap_universe), rng.random());
        let n_inner = rng.random_range(1..=2);
        let n_outer = rng.random_range(1..=2);
        let inner = random_ideal(n_inner, &mut rng);
        let outer = random_ideal(n_outer, &mut rng);
        let mut out = CaseOutcome { cases: 1, ..Default::default() };
        let case = format!("case {k}");
        let detail = || {
            json!({
                "universe": a.size(),
                "inner_kernel": inner.labels_of(inner.kernel()),
                "inner_omega": n_inner,
                "outer_kernel": outer.labels_of(outer.kernel()),
                "outer_omega": n_outer,
            })
        };
        match fubini_iso(&a, &inner, &outer, point_cap) {
            Ok(r) if r.holds() => {}
            Ok(r) => {
                let mut d = detail();
                d["report"] = json!(format!("{r:?}"));
                out.fail(&case, "NotIsomorphic", d);
            }
            Err(e) => {
                let mut d = detail();
                d["error"] = json!(e.to_string());
                out.fail(&case, "Construction", d);
            }
        }
        out
    }))
}

/// Over the ideal generated by `Ω ∖ {γ₀}` the reduced product is
/// isomorphic to the member at `γ₀`, via the `γ₀` coordinate.
pub fn suite_principal(caps: &Caps, cases: usize, seed: u64) -> Result<SuiteReport, CapError> {
    let sig = default_signature();
    let (cap_omega, cap_universe) = (caps.max_omega, caps.max_universe);
    Ok(run_cases("principal", seed, cases, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(case_seed(seed, k));
        let base = random_family(&sig, cap_omega, cap_universe, rng.random());
        let size = base.ideal().ground_size();
        let keep = rng.random_range(0..size);
        let ideal = IdealSpec::maximal_at(omega_labels(size), keep).expect("small ground set");
        let fam = Family::new(ideal, base.members().to_vec()).expect("same shape");
        let rp = reduced_product(&fam).expect("caps");
        let map: Vec<usize> = (0..rp.class_count()).map(|c| rp.representative(c)[keep]).collect();
        let mut out = CaseOutcome { cases: 1, ..Default::default() };
        if let Err(e) = check_isomorphism(rp.structure(), &fam.members()[keep], &map) {
            out.fail(
                &format!("case {k}"),
                "NotIsomorphic",
                json!({"keep": keep + 1, "family": family_json(&fam), "mismatch": format!("{e:?}")}),
            );
        }
        out
    }))
}

/// Distinct σ's emitted for the battery at the given precisions.
pub fn emitted_sigmas(
    bat: &Battery,
    ns: &[u32],
    translator: &Translator,
) -> Vec<(String, u32, usize, crate::boolean::BoolFormula)> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for f in &bat.sentences {
        for &n in ns {
            let ds = translator.translate(f, n).expect("restricted");
            for (ell, s) in ds.sigmas.iter().enumerate() {
                if seen.insert(s.clone()) {
                    out.push((f.to_string(), n, ell, s.clone()));
                }
            }
        }
    }
    out
}

/// Every proper ideal on `{1..size}`.
pub fn all_proper_ideals(size: usize) -> Vec<IdealSpec> {
    let full: Mask = (1 << size) - 1;
    (0..full)
        .map(|k| IdealSpec::close(omega_labels(size), &[k]).expect("small ground set"))
        .collect()
}

/// Every distinct emitted σ is monotone on the quotient algebra of every
/// proper ideal on a ground set of at most `max_omega` points.
pub fn suite_monotone(
    caps: &Caps,
    depth: usize,
    ns: &[u32],
    max_omega: usize,
    policy: &MonotonePolicy,
) -> Result<SuiteReport, CapError> {
    caps.depth(depth)?;
    caps.ns(ns)?;
    exceeds("max_omega", max_omega, caps.max_omega)?;
    let bat = battery_with(&default_signature(), depth, &caps.battery)?;
    let sigmas = emitted_sigmas(&bat, ns, &Translator::new());
    let algebras: Vec<QuotientBA> =
        (1..=max_omega).flat_map(all_proper_ideals).map(QuotientBA::new).collect();
    Ok(run_cases("monotone", policy.seed, sigmas.len(), |k| {
        let (sentence, n, ell, sigma) = &sigmas[k];
        let mut out = CaseOutcome::default();
        for ba in &algebras {
            out.cases += 1;
            let ok = crate::boolean::is_monotone(sigma, ba, policy).expect("closed over y");
            if !ok {
                out.fail(
                    &format!("sigma {k}"),
                    "NotMonotone",
                    json!({"sentence": sentence, "n": n, "ell": ell, "sigma": sigma.to_string(),
                           "omega": ba.ideal().omega(), "kernel": ba.ideal().labels_of(ba.ideal().kernel())}),
                );
                break;
            }
        }
        out
    }))
}

/// `P({1,2})` and `P({1,2,3})` modulo the ideal generated by `{1}`.
pub fn pad_shift_algebras() -> Vec<QuotientBA> {
    vec![
        QuotientBA::powerset(2),
        QuotientBA::new(IdealSpec::close(omega_labels(3), &[0b001]).expect("small ground set")),
    ]
}

/// Shifting the arguments up one level and padding with the top element
/// moves every σ up one level.
pub fn suite_pad_shift(
    caps: &Caps,
    depth: usize,
    ns: &[u32],
    policy: &MonotonePolicy,
) -> Result<SuiteReport, CapError> {
    caps.depth(depth)?;
    caps.ns(ns)?;
    let bat = battery_with(&default_signature(), depth, &caps.battery)?;
    let translator = Translator::new();
    let algebras = pad_shift_algebras();
    let jobs: Vec<(usize, u32)> =
        (0..bat.sentences.len()).flat_map(|s| ns.iter().map(move |&n| (s, n))).collect();
    Ok(run_cases("pad-shift", policy.seed, jobs.len(), |k| {
        let (s, n) = jobs[k];
        let f = &bat.sentences[s];
        let ds = translator.translate(f, n).expect("restricted");
        let mut out = CaseOutcome::default();
        for (a, ba) in algebras.iter().enumerate() {
            out.cases += 1;
            let r = pad_shift_check(&ds, ba, policy);
            if let Some((ell, z)) = &r.failure {
                out.fail(
                    &format!("sentence {s} n {n} algebra {a}"),
                    "PadShift",
                    json!({"sentence": f.to_string(), "n": n, "ell": ell, "assignment": z,
                           "algebra_top": ba.one(), "sigma_below": ds.sigmas[ell - 1].to_string(),
                           "sigma_above": ds.sigmas[*ell].to_string()}),
                );
            }
        }
        out
    }))
}

fn certifies(ds: &DeterminingSequence, f: &Formula, fams: &[(Family, ReducedProduct)]) -> bool {
    fams.iter().all(|(fam, rp)| {
        let value = rp.eval_at(f, &[]).expect("eval");
        let values = psi_values(ds, fam, &[]).expect("eval");
        let sets = level_sets_from_values(&values, ds.n);
        let ba = QuotientBA::new(fam.ideal().clone());
        let (s, w) = sigma_truth(ds, &ba, &sets);
        judge(ds.n, value, s, w, sets).passed()
    })
}

/// Whether two sequences agree on `σ_ℓ` at every argument tuple over
/// `P(1)` and `P(2)`; tuple spaces above `2^16` are sampled instead.
fn sigma_agrees(a: &DeterminingSequence, b: &DeterminingSequence, ell: usize, seed: u64) -> bool {
    let slots = a.m() * (a.levels() + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [QuotientBA::powerset(1), QuotientBA::powerset(2)].iter().all(|ba| {
        let alg = Algebra::new(ba);
        let q = alg.elements().len();
        let mut args = vec![0; slots];
        let mut digits = vec![0; slots];
        let same = |args: &[Mask]| a.sigma_holds(ell, &alg, args) == b.sigma_holds(ell, &alg, args);
        match q.checked_pow(slots as u32).filter(|&t| t <= 1 << 16) {
            Some(total) => (0..total).all(|code| {
                crate::structures::decode(code, q, &mut digits);
                args.iter_mut().zip(&digits).for_each(|(x, &d)| *x = alg.elements()[d]);
                same(&args)
            }),
            None => (0..4096).all(|_| {
                args.iter_mut().for_each(|x| *x = alg.elements()[rng.random_range(0..q)]);
                same(&args)
            }),
        }
    })
}

/// Picks `samples` translations that certify on every family and have at
/// most `max_flips` σ atoms; each single-atom flip must then be caught by
/// at least one family.
pub fn suite_mutation(
    caps: &Caps,
    depth: usize,
    ns: &[u32],
    families: usize,
    samples: usize,
    max_flips: usize,
    seed: u64,
) -> Result<SuiteReport, CapError> {
    caps.depth(depth)?;
    caps.ns(ns)?;
    let sig = default_signature();
    let bat = battery_with(&sig, depth, &caps.battery)?;
    let translator = Translator::new();
    let fams: Vec<(Family, ReducedProduct)> = (0..families)
        .into_par_iter()
        .map(|k| {
            let fam = random_family(&sig, caps.max_omega, caps.max_universe, case_seed(seed, k));
            let rp = reduced_product(&fam).expect("caps");
            (fam, rp)
        })
        .collect();
    let mut jobs: Vec<(usize, u32)> =
        (0..bat.sentences.len()).flat_map(|s| ns.iter().map(move |&n| (s, n))).collect();
    jobs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut chosen = Vec::new();
    for (s, n) in jobs {
        if chosen.len() == samples {
            break;
        }
        let f = &bat.sentences[s];
        let ds = translator.translate(f, n).expect("restricted");
        let flips: usize = ds.sigmas.iter().map(|x| x.atom_count()).sum();
        if flips == 0 || flips > max_flips || !certifies(&ds, f, &fams) {
            continue;
        }
        chosen.push((f.clone(), ds));
    }
    let flips: Vec<(usize, usize, usize)> = chosen
        .iter()
        .enumerate()
        .flat_map(|(c, (_, ds))| {
            ds.sigmas
                .iter()
                .enumerate()
                .flat_map(move |(ell, x)| (0..x.atom_count()).map(move |a| (c, ell, a)))
        })
        .collect();
    let mut report = run_cases("mutation", seed, flips.len(), |k| {
        let (c, ell, atom) = flips[k];
        let (f, ds) = &chosen[c];
        let mutated = ds.with_sigma(ell, ds.sigmas[ell].flip_atom(atom));
        let mut out = CaseOutcome { cases: 1, ..Default::default() };
        if certifies(&mutated, f, &fams) {
            // a flip that leaves σ_ℓ's truth table unchanged cannot be caught
            let kind = if sigma_agrees(ds, &mutated, ell, seed) { "UndetectedEquivalent" } else { "Undetected" };
            out.fail(
                &format!("translation {c} ell {ell} atom {atom}"),
                kind,
                json!({"sentence": f.to_string(), "n": ds.n, "ell": ell, "atom": atom,
                       "mutated": mutated.sigmas[ell].to_string()}),
            );
        }
        out
    });
    if chosen.len() < samples {
        report.fail(Witness {
            case: "sampling".into(),
            kind: "TooFewTranslations".into(),
            detail: json!({"wanted": samples, "found": chosen.len()}),
        });
    }
    Ok(report)
}

/// Runs a named suite with its default sizes: `atomic`, `fv`,
/// `preservation`, `quotient`, `fubini`, or `all`.
pub fn run_named(caps: &Caps, name: &str, depth: usize, seed: u64) -> Result<Vec<SuiteReport>, CapError> {
    let ns: Vec<u32> = (0..=caps.max_n).collect();
    let one = |n: &str| -> Result<SuiteReport, CapError> {
        match n {
            "atomic" => suite_atomic(caps, caps.atomic_cases, seed),
            "fv" => suite_fv(caps, depth, &ns, caps.fv_families, seed),
            "preservation" => suite_preservation(caps, depth, caps.preservation_cases, seed),
            "quotient" => suite_quotient_equiv(caps, depth, 5, seed),
            "fubini" => suite_fubini(caps, caps.fubini_cases, seed),
            "principal" => suite_principal(caps, caps.principal_cases, seed),
            other => Err(CapError::UnknownSuite(other.into())),
        }
    };
    if name == "all" {
        ["atomic", "fv", "preservation", "quotient", "fubini", "principal"]
            .iter()
            .map(|n| one(n))
            .collect()
    } else {
        Ok(vec![one(name)?])
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DemoError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} appears in both lists")]
    Overlap(u64),
    #[error("prime lists must be strictly increasing")]
    NotIncreasing,
    #[error("prime lists must be non-empty")]
    Empty,
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Two disjoint increasing prime lists and their running products.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeSequencePair {
    pub xi: Vec<u64>,
    pub eta: Vec<u64>,
    #[serde(serialize_with = "big_list")]
    pub k_xi: Vec<BigUint>,
    #[serde(serialize_with = "big_list")]
    pub k_eta: Vec<BigUint>,
}

fn big_list<S: serde::Serializer>(xs: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|x| x.to_string()))
}

fn running_products(ps: &[u64]) -> Vec<BigUint> {
    ps.iter()
        .scan(BigUint::one(), |acc, &p| {
            *acc *= p;
            Some(acc.clone())
        })
        .collect()
}

impl PrimeSequencePair {
    pub fn new(xi: Vec<u64>, eta: Vec<u64>) -> Result<Self, DemoError> {
        for list in [&xi, &eta] {
            if list.is_empty() {
                return Err(DemoError::Empty);
            }
            if let Some(&p) = list.iter().find(|&&p| !is_prime(p)) {
                return Err(DemoError::NotPrime(p));
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(DemoError::NotIncreasing);
            }
        }
        if let Some(&p) = xi.iter().find(|p| eta.contains(p)) {
            return Err(DemoError::Overlap(p));
        }
        let (k_xi, k_eta) = (running_products(&xi), running_products(&eta));
        Ok(PrimeSequencePair { xi, eta, k_xi, k_eta })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivisibilityRow {
    /// 1-based position of the prime in the first list.
    pub m: usize,
    pub prime: u64,
    /// `j` (1-based) with `prime | k_xi(j)`.
    pub divides_xi: Vec<usize>,
    /// `j` (1-based) with `prime | k_eta(j)`.
    pub divides_eta: Vec<usize>,
    pub cofinal_from_m: bool,
    pub misses_eta: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivisibilityReport {
    pub pair: PrimeSequencePair,
    pub horizon: usize,
    /// Indices actually examined: the horizon, clipped to the list lengths.
    pub horizon_xi: usize,
    pub horizon_eta: usize,
    pub rows: Vec<DivisibilityRow>,
    pub note: String,
}

impl DivisibilityReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.cofinal_from_m && r.misses_eta)
    }
}

const DIVISIBILITY_NOTE: &str = "For each m, the m-th prime p of the first list divides every \
running product k_xi(j) with j >= m and none of the running products of the second list. A \
matrix algebra of size p therefore embeds unitally into M_k_xi(j) for all large j and into no \
M_k_eta(j); a sentence whose zero set encodes p pairwise orthogonal, pairwise equivalent \
projections summing to 1 has value 0 in the first reduced product and not in the second. That \
sentence is not evaluated here. Only finitely many prime patterns can be exhibited, so nothing \
is claimed about the number of distinct theories.";

/// Integer divisibility pattern of the running products, per prime of the
/// first list, up to `horizon` indices.
pub fn demo_matrix_divisibility(
    xi: &[u64],
    eta: &[u64],
    horizon: usize,
) -> Result<DivisibilityReport, DemoError> {
    let pair = PrimeSequencePair::new(xi.to_vec(), eta.to_vec())?;
    let hx = horizon.min(pair.k_xi.len());
    let he = horizon.min(pair.k_eta.len());
    let divides = |p: u64, ks: &[BigUint], h: usize| -> Vec<usize> {
        (1..=h).filter(|&j| (&ks[j - 1] % p).is_zero()).collect()
    };
    let rows = pair
        .xi
        .iter()
        .take(hx)
        .enumerate()
        .map(|(i, &p)| {
            let m = i + 1;
            let dx = divides(p, &pair.k_xi, hx);
            let de = divides(p, &pair.k_eta, he);
            DivisibilityRow {
                m,
                prime: p,
                cofinal_from_m: dx == (m..=hx).collect::<Vec<_>>(),
                misses_eta: de.is_empty(),
                divides_xi: dx,
                divides_eta: de,
            }
        })
        .collect();
    Ok(DivisibilityReport {
        pair,
        horizon,
        horizon_xi: hx,
        horizon_eta: he,
        rows,
        note: DIVISIBILITY_NOTE.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn small_sig() -> Arc<Signature> {
        Arc::new(
            Signature::new(vec![SymbolDecl::new("P", 1, rational::int(1))], vec![], vec!["c".into()])
                .unwrap(),
        )
    }

    #[test]
    fn depth_zero_battery() {
        let b = battery(&small_sig(), 0).unwrap();
        assert!(b.sentences.contains(&Formula::Zero));
        assert!(b.sentences.contains(&Formula::One));
        assert!(b.sentences.contains(&parse("P(c)", &small_sig()).unwrap()));
        assert!(b.sentences.iter().all(|f| f.is_sentence() && f.is_restricted()));
    }

    #[test]
    fn depth_one_battery_contents() {
        let sig = small_sig();
        let b = battery(&sig, 1).unwrap();
        for text in ["sup x . P(x)", "half(P(c))", "P(c) -. 1"] {
            assert!(b.sentences.contains(&parse(text, &sig).unwrap()), "{text}");
        }
        let again = battery(&sig, 1).unwrap();
        assert_eq!(b.sentences, again.sentences);
        let unique: HashSet<_> = b.sentences.iter().collect();
        assert_eq!(unique.len(), b.sentences.len());
    }

    #[test]
    fn default_battery_is_closed_and_restricted() {
        let b = battery(&default_signature(), 3).unwrap();
        assert!(b.sentences.iter().all(|f| f.is_sentence() && f.is_restricted() && f.depth() <= 3));
        assert!(b.sentences.iter().all(|f| psi_count(f) <= 32));
        assert!((0..=3).all(|d| b.sentences.iter().any(|f| f.depth() == d)));
    }

    #[test]
    fn caps_from_toml() {
        let caps = Caps::from_toml("max_depth = 2\n[battery]\nclosed_per_depth = 10\n").unwrap();
        assert_eq!(caps.max_depth, 2);
        assert_eq!(caps.battery.closed_per_depth, 10);
        assert_eq!(caps.battery.open_per_depth, 48);
        assert!(Caps::from_toml("max_depth = 9").is_err());
        assert!(suite_fv(&caps, 3, &[0], 1, 0).is_err());
    }

    #[test]
    fn divisibility_examples() {
        let r = demo_matrix_divisibility(&[2, 5, 11], &[3, 7, 13], 10).unwrap();
        assert!(r.holds());
        assert_eq!(r.rows[1].prime, 5);
        assert_eq!(r.rows[1].divides_xi, vec![2, 3]);
        assert!(r.rows[1].divides_eta.is_empty());
        assert_eq!(r.rows[0].divides_xi, vec![1, 2, 3]);
        let eta: Vec<String> = r.pair.k_eta.iter().map(|k| k.to_string()).collect();
        assert_eq!(eta, ["3", "21", "273"]);
        assert_eq!(demo_matrix_divisibility(&[2, 4], &[3], 5), Err(DemoError::NotPrime(4)));
        assert_eq!(demo_matrix_divisibility(&[2, 3], &[3], 5), Err(DemoError::Overlap(3)));
    }

    #[test]
    fn literal_limsup_matches_cokernel_limsup() {
        let ideal = IdealSpec::close(omega_labels(3), &[0b011]).unwrap();
        let r = vec![rational::ratio(9, 10), rational::ratio(1, 5), rational::ratio(1, 2)];
        assert_eq!(limsup_literal(&ideal, &r), rational::ratio(1, 2));
        assert_eq!(crate::boolean::limsup_ideal(&ideal, &r), rational::ratio(1, 2));
    }

    #[test]
    fn small_suites_run() {
        let caps = Caps::default();
        assert!(suite_atomic(&caps, 20, 1).unwrap().passed());
        assert!(suite_principal(&caps, 5, 1).unwrap().passed());
        assert!(suite_fubini(&caps, 5, 1).unwrap().passed());
    }
}
