//! Randomized cross-checks of the solvers against the exhaustive oracles.
//!
//! Each trial derives its own seed from the run seed and the trial index,
//! so a failing trial can be replayed in isolation and the report does not
//! depend on execution order.

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bipartite::{deficiency, rho};
use crate::degree2::{analyze_with, solve_from_analysis, tree_matching_xi, ComponentKind};
use crate::error::{Error, Result};
use crate::generators::{gen_b2sat, gen_instance, GenParams};
use crate::model::{self, Doctor, Instance, Vertex};
use crate::oracle::{
    all_stable_matchings, enumerate_matchings, envyfree_bruteforce, intersect_all,
    minimizers_bruteforce, sat_bruteforce, DEFAULT_BUDGET,
};
use crate::preprocess::{
    check_conditions, critical_hospitals, preprocess_with, BlockFn, Growth, PreprocessOptions,
};
use crate::reductions::{
    assignment_to_matching, candidate_matching, envy_pairs, isolated_clause_gadget,
    matching_to_assignment, meets_hardness_restrictions, reduce_envyfree, reduce_sat,
    solve_envyfree, B2Formula, EnvyInstance,
};
use crate::separated::solve_separated_with;
use crate::stability::{is_stable, Matching, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Preprocess,
    Separated,
    Degree2,
    Envy,
    Sat,
    Bipartite,
}

impl Mode {
    pub const ALL: [Mode; 6] =
        [Mode::Preprocess, Mode::Separated, Mode::Degree2, Mode::Envy, Mode::Sat, Mode::Bipartite];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Preprocess => "preprocess",
            Mode::Separated => "separated",
            Mode::Degree2 => "degree2",
            Mode::Envy => "envy",
            Mode::Sat => "sat",
            Mode::Bipartite => "bipartite",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub trials: usize,
    pub seed: u64,
    /// Edge budget for matching enumeration.
    pub budget: usize,
    /// `block(·)` used inside pre-processing; replaced only to check that
    /// the harness notices a broken implementation.
    pub block: BlockFn,
}

impl VerifyConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        VerifyConfig { trials, seed, budget: DEFAULT_BUDGET, block: model::block_set }
    }

    fn options(&self) -> PreprocessOptions {
        PreprocessOptions { record_trace: true, block: self.block }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub trial: usize,
    pub message: String,
    /// Serialized input of the failing trial.
    pub input: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub mode: Mode,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub first_failure: Option<Failure>,
    /// Aggregate counters, in a fixed order.
    pub counters: Vec<(&'static str, usize)>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn counter(&self, name: &str) -> usize {
        self.counters.iter().find(|c| c.0 == name).map_or(0, |c| c.1)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode: {}", self.mode)?;
        writeln!(f, "trials: {}", self.trials)?;
        writeln!(f, "passed: {}", self.passed)?;
        writeln!(f, "failed: {}", self.failed)?;
        for (name, value) in &self.counters {
            writeln!(f, "{name}: {value}")?;
        }
        if let Some(fail) = &self.first_failure {
            writeln!(f, "first failure (trial {}): {}", fail.trial, fail.message)?;
            writeln!(f, "input:")?;
            f.write_str(&fail.input)?;
        }
        Ok(())
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of trial `trial` in a run seeded with `seed`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    splitmix64(seed ^ splitmix64(trial as u64))
}

/// Outcome of one trial: `Err` carries the failure message.
type Check = std::result::Result<(), String>;

struct Counters(Vec<(&'static str, usize)>);

impl Counters {
    fn bump(&mut self, name: &'static str, by: usize) {
        match self.0.iter_mut().find(|c| c.0 == name) {
            Some(c) => c.1 += by,
            None => self.0.push((name, by)),
        }
    }
}

/// Trial body: returns the serialized input and the check result.
type Trial<'a> = dyn FnMut(usize, &mut ChaCha8Rng, &mut Counters) -> (String, Check) + 'a;

pub fn run(mode: Mode, cfg: &VerifyConfig) -> VerifyReport {
    let mut counters = Counters(Vec::new());
    for name in counter_names(mode) {
        counters.bump(name, 0);
    }
    let mut body: Box<Trial> = match mode {
        Mode::Preprocess => Box::new(|_, rng, c| preprocess_trial(cfg, rng, c)),
        Mode::Separated => Box::new(|_, rng, c| separated_trial(cfg, rng, c)),
        Mode::Degree2 => Box::new(|_, rng, c| degree2_trial(cfg, rng, c)),
        Mode::Envy => Box::new(|_, rng, c| envy_trial(cfg, rng, c)),
        Mode::Sat => Box::new(|t, rng, c| sat_trial(t, rng, c)),
        Mode::Bipartite => Box::new(|_, rng, c| bipartite_trial(rng, c)),
    };
    let mut passed = 0;
    let mut failed = 0;
    let mut first_failure = None;
    for trial in 0..cfg.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, trial));
        let outcome = catch_unwind(AssertUnwindSafe(|| body(trial, &mut rng, &mut counters)));
        let (input, check) = match outcome {
            Ok(pair) => pair,
            Err(panic) => {
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                (String::new(), Err(format!("panic: {msg}")))
            }
        };
        match check {
            Ok(()) => passed += 1,
            Err(message) => {
                failed += 1;
                first_failure.get_or_insert(Failure { trial, message, input });
            }
        }
    }
    VerifyReport { mode, trials: cfg.trials, passed, failed, first_failure, counters: counters.0 }
}

fn counter_names(mode: Mode) -> &'static [&'static str] {
    match mode {
        Mode::Preprocess => &["calm", "block steps", "stable matchings seen"],
        Mode::Separated => &["stable", "none", "closure-free"],
        Mode::Degree2 => &["stable", "none", "digraphs", "arcs", "constructed"],
        Mode::Envy => &["found", "none", "perfect matchings checked"],
        Mode::Sat => &["satisfiable", "unsatisfiable", "candidate families", "gadget checks"],
        Mode::Bipartite => &["hall violations", "submodular pairs"],
    }
}

fn internal(e: Error) -> String {
    format!("{}: {e}", e.code())
}

/// Random small instance with at most `max_edges` edges.
fn small_instance(
    rng: &mut ChaCha8Rng,
    max_side: usize,
    max_edges: usize,
    shape: impl Fn(&mut GenParams),
) -> Instance {
    loop {
        let mut p = GenParams {
            seed: rng.gen(),
            n_doctors: rng.gen_range(1..=max_side),
            n_hospitals: rng.gen_range(1..=max_side),
            max_degree: None,
            edge_prob: rng.gen_range(0.2..0.8),
            tie_prob: rng.gen_range(0.0..0.7),
            closure_prob: rng.gen_range(0.0..0.6),
            enforce_star: false,
            enforce_degree2: false,
        };
        shape(&mut p);
        let inst = gen_instance(&p).expect("valid parameters");
        if inst.edge_count() <= max_edges {
            return inst;
        }
    }
}

fn doctor_optimal(inst: &Instance, mu: &Matching, stable: &[Matching]) -> bool {
    stable.iter().all(|sigma| {
        inst.doctors().all(|d| {
            inst.doctor_rank_or_unmatched(mu.of_doctor(d))
                <= inst.doctor_rank_or_unmatched(sigma.of_doctor(d))
        })
    })
}

fn preprocess_trial(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, c: &mut Counters) -> (String, Check) {
    let inst = small_instance(rng, 5, 10.min(cfg.budget), |_| {});
    let check = (|| {
        let res = preprocess_with(&inst, &cfg.options());
        if res.trace.iter().any(|s| s.grew_by == Growth::BlockEdge) {
            c.bump("block steps", 1);
        }
        check_conditions(&inst, &res).map_err(internal)?;
        let bound = inst.edge_count() + 1;
        if res.stats.rounds > bound || res.stats.max_inner() > bound {
            return Err(format!("iteration counts {:?} exceed |E|+1", res.stats));
        }
        let stable = all_stable_matchings(&inst, cfg.budget).map_err(internal)?;
        c.bump("stable matchings seen", stable.len());
        for m in &stable {
            if m.edges().iter().any(|&e| res.forbidden.contains(e)) {
                return Err(format!("stable matching {:?} uses a forbidden edge", m.named_pairs(&inst)));
            }
        }
        if critical_hospitals(&inst, &res).is_empty() {
            c.bump("calm", 1);
            if !is_stable(&inst, &res.matching) {
                return Err("no critical hospital but μ is not stable".into());
            }
            if !doctor_optimal(&inst, &res.matching, &stable) {
                return Err("μ is not doctor-optimal".into());
            }
        }
        Ok(())
    })();
    (inst.to_string(), check)
}

fn compare_existence(inst: &Instance, out: &Outcome, stable: &[Matching]) -> Check {
    match out {
        Outcome::Stable(m) if !is_stable(inst, m) => Err("returned matching is not stable".into()),
        Outcome::Stable(_) if stable.is_empty() => Err("solver found a matching, oracle none".into()),
        Outcome::NoStable if !stable.is_empty() => Err(format!(
            "solver answered none, oracle found {:?}",
            stable[0].named_pairs(inst)
        )),
        _ => Ok(()),
    }
}

fn separated_trial(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, c: &mut Counters) -> (String, Check) {
    let closure_free = rng.gen_bool(0.25);
    let inst = small_instance(rng, 5, 12.min(cfg.budget), |p| {
        p.enforce_star = true;
        if closure_free {
            p.closure_prob = 0.0;
        }
    });
    let check = (|| {
        let res = preprocess_with(&inst, &cfg.options());
        let out = solve_separated_with(&inst, res).map_err(internal)?;
        let stable = all_stable_matchings(&inst, cfg.budget).map_err(internal)?;
        compare_existence(&inst, &out, &stable)?;
        if let Outcome::Stable(m) = &out {
            if !doctor_optimal(&inst, m, &stable) {
                return Err("returned matching is not doctor-optimal".into());
            }
        }
        c.bump(if out.exists() { "stable" } else { "none" }, 1);
        if inst.closed_hospitals().next().is_none() {
            c.bump("closure-free", 1);
        }
        Ok(())
    })();
    (inst.to_string(), check)
}

/// Degree-2 instance in which doctors tend to rank closed hospitals first,
/// so that displacement chains through closed anchors are common.
fn closed_first_degree2(rng: &mut ChaCha8Rng) -> Instance {
    let nd = rng.gen_range(2..=6);
    let nh = rng.gen_range(2..=5);
    let doctors: Vec<String> = (1..=nd).map(|i| format!("d{i}")).collect();
    let hospitals: Vec<String> = (1..=nh).map(|i| format!("h{i}")).collect();
    let closed: Vec<bool> = (0..nh).map(|_| rng.gen_bool(0.4)).collect();
    let mut b = model::InstanceBuilder::new();
    for (h, &c) in hospitals.iter().zip(&closed) {
        b.hospital(h.clone());
        if c {
            b.close(h.clone());
        }
    }
    let mut applicants: Vec<Vec<usize>> = vec![Vec::new(); nh];
    for (d, name) in doctors.iter().enumerate() {
        b.doctor(name.clone());
        let k = if rng.gen_bool(0.8) { 2 } else { 1 };
        let mut list: Vec<usize> = (0..nh).collect();
        list.shuffle(rng);
        list.truncate(k);
        if rng.gen_bool(0.75) {
            list.sort_by_key(|&h| !closed[h]);
        }
        for &h in &list {
            applicants[h].push(d);
        }
        let groups = if k == 2 && rng.gen_bool(0.2) {
            vec![list.iter().map(|&h| hospitals[h].clone()).collect()]
        } else {
            list.iter().map(|&h| vec![hospitals[h].clone()]).collect()
        };
        b.doctor_pref(name.clone(), groups);
    }
    for (h, mut list) in applicants.into_iter().enumerate() {
        list.shuffle(rng);
        let mut groups: Vec<Vec<String>> = Vec::new();
        for (i, d) in list.into_iter().enumerate() {
            match groups.last_mut() {
                Some(last) if i > 0 && rng.gen_bool(0.6) => last.push(doctors[d].clone()),
                _ => groups.push(vec![doctors[d].clone()]),
            }
        }
        b.hospital_pref(hospitals[h].clone(), groups);
    }
    b.build().expect("generated names are valid")
}

/// Random hospital lists with ties, from per-hospital applicant lists.
fn random_hospital_prefs(
    rng: &mut ChaCha8Rng,
    b: &mut model::InstanceBuilder,
    applicants: Vec<(String, Vec<String>)>,
    tie_prob: f64,
    favourites: &[(String, String)],
) {
    for (h, mut list) in applicants {
        list.shuffle(rng);
        let favourite = favourites.iter().find(|f| f.0 == h).map(|f| f.1.clone());
        let mut head = Vec::new();
        if let Some(fav) = favourite.filter(|_| rng.gen_bool(0.7)) {
            list.retain(|d| *d != fav);
            head.push(vec![fav]);
        }
        let mut groups: Vec<Vec<String>> = Vec::new();
        for (i, d) in list.into_iter().enumerate() {
            match groups.last_mut() {
                Some(last) if i > 0 && rng.gen_bool(tie_prob) => last.push(d),
                _ => groups.push(vec![d]),
            }
        }
        head.extend(groups);
        b.hospital_pref(h, head);
    }
}

/// Degree-2 instance built from one or two planted displacement chains: a
/// contested open hospital or an open two-hospital tree, followed by doctors
/// that each prefer their own anchor to the previous anchor. Hospital lists
/// are random with a bias towards the chain doctor, so the chains may or
/// may not be usable.
fn planted_chains(rng: &mut ChaCha8Rng) -> Instance {
    let mut b = model::InstanceBuilder::new();
    let mut applicants: Vec<(String, Vec<String>)> = Vec::new();
    let mut hospital = |b: &mut model::InstanceBuilder, name: String, closed: bool| {
        b.hospital(name.clone());
        if closed {
            b.close(name.clone());
        }
        applicants.push((name, Vec::new()));
    };
    let mut lists: Vec<(String, Vec<Vec<String>>)> = Vec::new();
    let mut favourites = Vec::new();
    for c in 0..rng.gen_range(1..=2) {
        let mut prev;
        if rng.gen_bool(0.5) {
            prev = format!("u{c}");
            hospital(&mut b, prev.clone(), false);
            for d in [format!("b{c}"), format!("e{c}")] {
                lists.push((d, vec![vec![prev.clone()]]));
            }
        } else {
            let (y1, y2) = (format!("y{c}"), format!("z{c}"));
            hospital(&mut b, y1.clone(), false);
            hospital(&mut b, y2.clone(), rng.gen_bool(0.2));
            lists.push((format!("e{c}"), vec![vec![y1.clone(), y2.clone()]]));
            prev = if rng.gen_bool(0.5) { y1 } else { y2 };
        }
        let len = rng.gen_range(1..=3);
        for j in 0..len {
            let anchor = format!("x{c}_{j}");
            let closed = if j + 1 == len { rng.gen_bool(0.8) } else { rng.gen_bool(0.2) };
            hospital(&mut b, anchor.clone(), closed);
            let groups = match rng.gen_range(0..10) {
                0 => vec![vec![prev.clone(), anchor.clone()]],
                1 => vec![vec![prev.clone()], vec![anchor.clone()]],
                _ => vec![vec![anchor.clone()], vec![prev.clone()]],
            };
            lists.push((format!("a{c}_{j}"), groups));
            favourites.push((prev, format!("a{c}_{j}")));
            prev = anchor;
        }
    }
    for (d, groups) in &lists {
        b.doctor(d.clone());
        for h in groups.iter().flatten() {
            applicants.iter_mut().find(|a| &a.0 == h).expect("listed hospital").1.push(d.clone());
        }
        b.doctor_pref(d.clone(), groups.clone());
    }
    random_hospital_prefs(rng, &mut b, applicants, 0.4, &favourites);
    b.build().expect("generated names are valid")
}

fn degree2_trial(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, c: &mut Counters) -> (String, Check) {
    let inst = match rng.gen_range(0..3) {
        0 => {
            let tie_prob = rng.gen_range(0.0..1.0);
            let closure_prob = rng.gen_range(0.0..0.9);
            let edge_prob = rng.gen_range(0.3..1.0);
            small_instance(rng, 6, 12.min(cfg.budget), |p| {
                p.enforce_degree2 = true;
                p.max_degree = Some(2);
                p.edge_prob = edge_prob;
                p.tie_prob = tie_prob;
                p.closure_prob = closure_prob;
            })
        }
        1 => closed_first_degree2(rng),
        _ => planted_chains(rng),
    };
    let check = (|| {
        let analysis = analyze_with(&inst, &cfg.options()).map_err(internal)?;
        if let (Some(comps), Some(graph)) = (&analysis.components, &analysis.digraph) {
            c.bump("digraphs", 1);
            c.bump("arcs", graph.arcs.len());
            let choice = &analysis.preprocess.choice;
            for comp in &comps.components {
                let (nd, nh) = (comp.doctors.len(), comp.hospitals.len());
                let leaves = comp
                    .doctors
                    .iter()
                    .filter(|&&d| inst.incident_in(Vertex::Doctor(d), choice).count() == 1)
                    .count();
                let ok = match comp.kind {
                    ComponentKind::Balanced => nd == nh && leaves == 0,
                    ComponentKind::Pendant { .. } => nd == nh && leaves == 1,
                    ComponentKind::Surplus => nh == nd + 1 && leaves == 0,
                    ComponentKind::Stranded => nd == 0 && nh == 1,
                };
                if !ok {
                    return Err(format!("component {comp:?} breaks its size or leaf invariant"));
                }
                if comp.kind == ComponentKind::Surplus {
                    for &root in &comp.hospitals {
                        let xi = tree_matching_xi(&inst, choice, comp, root).map_err(internal)?;
                        let inside = xi.edges().iter().all(|&e| choice.contains(e));
                        if xi.of_hospital(root).is_some() || xi.len() != nd || !inside {
                            return Err("tree matching breaks its postcondition".into());
                        }
                    }
                }
            }
            if graph.nodes.iter().any(|&x| graph.in_degree(x) > 1) {
                return Err("a node has in-degree above 1".into());
            }
            if graph.sources.iter().any(|&x| graph.in_degree(x) > 0) {
                return Err("a source has an entering arc".into());
            }
        }
        let out = solve_from_analysis(&inst, &analysis).map_err(internal)?;
        let stable = all_stable_matchings(&inst, cfg.budget).map_err(internal)?;
        compare_existence(&inst, &out, &stable)?;
        c.bump(if out.exists() { "stable" } else { "none" }, 1);
        let sourced = analysis.digraph.as_ref().is_some_and(|g| !g.sources.is_empty());
        if sourced && out.exists() {
            c.bump("constructed", 1);
        }
        Ok(())
    })();
    (inst.to_string(), check)
}

fn random_envy(rng: &mut ChaCha8Rng, budget: usize) -> EnvyInstance {
    let inst = small_instance(rng, 5, 12.min(budget), |p| p.closure_prob = 0.0);
    let names = |v: Vec<String>| v;
    let doctors = names(inst.doctors().map(|d| inst.doctor_name(d).to_string()).collect());
    let hospitals = names(inst.hospitals().map(|h| inst.hospital_name(h).to_string()).collect());
    let prefs: Vec<(String, Vec<Vec<String>>)> = inst
        .doctors()
        .map(|d| {
            let groups = inst
                .doctor_pref(d)
                .groups()
                .iter()
                .map(|g| g.iter().map(|&h| hospitals[h].clone()).collect())
                .collect();
            (doctors[d.0].clone(), groups)
        })
        .collect();
    EnvyInstance::new(&doctors, &hospitals, &prefs).expect("generated names are valid")
}

fn envy_trial(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, c: &mut Counters) -> (String, Check) {
    let envy = random_envy(rng, cfg.budget);
    let check = (|| {
        let inst = reduce_envyfree(&envy);
        let out = solve_envyfree(&envy);
        let brute = envyfree_bruteforce(&envy, cfg.budget).map_err(internal)?;
        match (&out, &brute) {
            (Outcome::Stable(m), Some(_)) => {
                if m.len() != inst.doctor_count() || !envy_pairs(&envy, m).is_empty() {
                    return Err("returned matching is not perfect and envy-free".into());
                }
                c.bump("found", 1);
            }
            (Outcome::NoStable, None) => c.bump("none", 1),
            _ => return Err(format!("solver {:?} disagrees with brute force {:?}", out.exists(), brute.is_some())),
        }
        let perfect: Vec<Matching> = enumerate_matchings(&inst, cfg.budget)
            .map_err(internal)?
            .filter(|m| m.len() == inst.doctor_count())
            .collect();
        for sigma in &perfect {
            if is_stable(&inst, sigma) != envy_pairs(&envy, sigma).is_empty() {
                return Err(format!("blocking and envy disagree on {:?}", sigma.named_pairs(&inst)));
            }
        }
        c.bump("perfect matchings checked", perfect.len());
        Ok(())
    })();
    (envy.to_string(), check)
}

/// Checks the isolated clause gadget: exactly three stable matchings, one
/// per pushed literal position, each containing `(p_1.5, q_1.3)`.
pub fn check_clause_gadget() -> Check {
    let (inst, c) = isolated_clause_gadget();
    let stable = all_stable_matchings(&inst, DEFAULT_BUDGET).map_err(internal)?;
    let pushed = [(&c.p[0], &c.q[0]), (&c.p[1], &c.q[1]), (&c.p[2], &c.q[1])];
    let mut patterns = Vec::new();
    for m in &stable {
        let pairs = m.named_pairs(&inst);
        let hits: Vec<usize> = (0..3)
            .filter(|&j| pairs.contains(&(pushed[j].0.as_str(), pushed[j].1.as_str())))
            .collect();
        if hits.len() != 1 {
            return Err(format!("gadget matching {pairs:?} pushes {} literals", hits.len()));
        }
        if !pairs.contains(&(c.p[4].as_str(), c.q[2].as_str())) {
            return Err(format!("gadget matching {pairs:?} misses the forced edge"));
        }
        patterns.push(hits[0]);
    }
    patterns.sort_unstable();
    if patterns != [0, 1, 2] {
        return Err(format!("gadget stable patterns are {patterns:?}"));
    }
    Ok(())
}

/// Walks the whole candidate family of a formula: every assignment combined
/// with every choice of pushed literal per clause. A candidate must be
/// stable exactly when each pushed literal is true; returns whether some
/// candidate is stable.
pub fn check_candidate_family(formula: &B2Formula) -> std::result::Result<bool, String> {
    let (inst, map) = reduce_sat(formula);
    let n = formula.variable_count();
    let m = formula.clauses().len();
    let mut any = false;
    for mask in 0u64..(1 << n) {
        let phi: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let mut pattern = vec![0usize; m];
        loop {
            let cand = candidate_matching(&inst, &map, &phi, &pattern).map_err(internal)?;
            let stable = is_stable(&inst, &cand);
            let predicted = formula
                .clauses()
                .iter()
                .zip(&pattern)
                .all(|(clause, &j)| B2Formula::literal_true(clause[j], &phi));
            if stable != predicted {
                return Err(format!("candidate φ={phi:?} pattern={pattern:?}: stable={stable}"));
            }
            any |= stable;
            let Some(t) = pattern.iter().position(|&j| j < 2) else {
                break;
            };
            pattern[t] += 1;
            pattern[..t].iter_mut().for_each(|j| *j = 0);
        }
    }
    Ok(any)
}

fn sat_trial(trial: usize, rng: &mut ChaCha8Rng, c: &mut Counters) -> (String, Check) {
    let n = if trial % 2 == 0 { 3 } else { 6 };
    let formula = gen_b2sat(n, rng.gen()).expect("n is a multiple of 3");
    let check = (|| {
        if trial == 0 {
            check_clause_gadget()?;
            c.bump("gadget checks", 1);
        }
        let (inst, map) = reduce_sat(&formula);
        if !meets_hardness_restrictions(&inst) {
            return Err("reduced instance breaks the degree or closed-first restriction".into());
        }
        let phi = sat_bruteforce(&formula).map_err(internal)?;
        match &phi {
            Some(phi) => {
                c.bump("satisfiable", 1);
                let m = assignment_to_matching(&formula, &inst, &map, phi).map_err(internal)?;
                if matching_to_assignment(&inst, &map, &m).map_err(internal)? != *phi {
                    return Err("decoding does not return the assignment".into());
                }
            }
            None => c.bump("unsatisfiable", 1),
        }
        if n == 3 {
            let any = check_candidate_family(&formula)?;
            c.bump("candidate families", 1);
            if any != phi.is_some() {
                return Err(format!("candidate family stable={any}, satisfiable={}", phi.is_some()));
            }
        }
        Ok(())
    })();
    (formula.to_string(), check)
}

fn bipartite_trial(rng: &mut ChaCha8Rng, c: &mut Counters) -> (String, Check) {
    let inst = small_instance(rng, 8, 40, |p| p.closure_prob = 0.0);
    let keep = rng.gen_range(0.3..1.0);
    let set = inst.edge_set(inst.edge_ids().filter(|_| rng.gen_bool(keep)));
    let support = inst.supported_doctors(&set);
    let pairs: Vec<(Vec<Doctor>, Vec<Doctor>)> = (0..10)
        .map(|_| {
            let mut pick = || -> Vec<Doctor> {
                let mut s: Vec<Doctor> = support.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
                s.shuffle(rng);
                s.sort();
                s
            };
            (pick(), pick())
        })
        .collect();
    let pairs_text: Vec<String> = set
        .iter()
        .map(|e| {
            let edge = inst.edge(e);
            format!("{} {}", inst.doctor_name(edge.doctor), inst.hospital_name(edge.hospital))
        })
        .collect();
    let check = (|| {
        let def = deficiency(&inst, &set);
        if !def.max_matching.to_edge_set(&inst).is_subset(&set) || def.max_matching.len() != def.nu {
            return Err("maximum matching leaves F".into());
        }
        if def.nu as i64 != support.len() as i64 + def.min_rho {
            return Err("ν differs from |D[F]| + min ρ".into());
        }
        let (min, minimizers) = minimizers_bruteforce(&inst, &set).map_err(internal)?;
        if min != def.min_rho {
            return Err(format!("min ρ {} differs from exhaustive {min}", def.min_rho));
        }
        if intersect_all(&inst, &minimizers) != def.minimal_violator {
            return Err("minimal violator differs from the intersection of minimizers".into());
        }
        for a in &minimizers {
            for b in &minimizers {
                let union: Vec<Doctor> = inst.doctors().filter(|d| a.contains(d) || b.contains(d)).collect();
                let meet: Vec<Doctor> = inst.doctors().filter(|d| a.contains(d) && b.contains(d)).collect();
                if rho(&inst, &set, &union) != min || rho(&inst, &set, &meet) != min {
                    return Err("minimizers are not closed under union and intersection".into());
                }
            }
        }
        if def.min_rho < 0 {
            c.bump("hall violations", 1);
        }
        for (x, y) in &pairs {
            let union: Vec<Doctor> = inst.doctors().filter(|d| x.contains(d) || y.contains(d)).collect();
            let meet: Vec<Doctor> = inst.doctors().filter(|d| x.contains(d) && y.contains(d)).collect();
            if rho(&inst, &set, x) + rho(&inst, &set, y) < rho(&inst, &set, &union) + rho(&inst, &set, &meet) {
                return Err(format!("submodularity fails for {x:?}, {y:?}"));
            }
        }
        c.bump("submodular pairs", pairs.len());
        Ok(())
    })();
    (format!("{inst}F:\n{}\n", pairs_text.join("\n")), check)
}

/// Runs a mode and converts a failing report into an error.
pub fn run_checked(mode: Mode, cfg: &VerifyConfig) -> Result<VerifyReport> {
    let report = run(mode, cfg);
    match &report.first_failure {
        None => Ok(report),
        Some(f) => Err(Error::Invariant(format!("{mode} trial {}: {}", f.trial, f.message))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_mode_passes_a_short_run() {
        for mode in Mode::ALL {
            let report = run(mode, &VerifyConfig::new(30, 7));
            assert!(report.all_passed(), "{report}");
            assert_eq!(report.passed, 30);
        }
    }

    #[test]
    fn mode_names_round_trip() {
        for mode in Mode::ALL {
            assert_eq!(mode.name().parse::<Mode>().unwrap(), mode);
        }
        assert!("nope".parse::<Mode>().is_err());
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = VerifyConfig::new(20, 3);
        assert_eq!(run(Mode::Degree2, &cfg), run(Mode::Degree2, &cfg));
    }
}
