//! Computes the forbidden set `R` and a matching `μ` such that:
//!
//! * no stable matching uses an edge of `R`;
//! * `μ ⊆ Ch(E∖R)`;
//! * every doctor with an edge outside `R` is matched by `μ`;
//! * `R ∩ block(Ch(E∖R)) = ∅`;
//! * each doctor weakly prefers every edge of `R(d)` to every edge of
//!   `E(d)∖R`.
//!
//! The procedure is two nested fixpoint loops. The inner loop grows the
//! working set `P` by doctor-dominated edges `Ch_D(E∖P) ∖ Ch(E∖P)` and, when
//! no such edge exists but `Ch(E∖P)` admits no doctor-saturating matching,
//! by the choice edges of the minimal Hall violator. The outer loop then
//! looks for an edge of `P` in `block(Ch(E∖P))`; if one exists at hospital
//! `h`, all of `Ch(E∖P) ∩ E(h)` is forbidden and the inner loop restarts.

use crate::bipartite;
use crate::error::{Error, Result};
use crate::model::{self, ch_doctors, ch_hospitals, EdgeId, EdgeSet, Hospital, Instance, Vertex};
use crate::stability::Matching;

/// Which rule grew the forbidden set in a trace step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Growth {
    Dominated,
    HallViolator,
    BlockEdge,
}

#[derive(Debug, Clone)]
pub struct TraceStep {
    /// Outer round (1-based).
    pub round: usize,
    /// Inner iteration within the round (1-based); 0 for block steps.
    pub iteration: usize,
    pub grew_by: Growth,
    pub added: EdgeSet,
    pub block_edge: Option<EdgeId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoopStats {
    pub rounds: usize,
    /// Number of inner iterations executed in each round.
    pub inner_iterations: Vec<usize>,
}

impl LoopStats {
    pub fn max_inner(&self) -> usize {
        self.inner_iterations.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct PreprocessResult {
    /// `R`.
    pub forbidden: EdgeSet,
    /// `μ`.
    pub matching: Matching,
    /// `L = Ch(E∖R)`.
    pub choice: EdgeSet,
    pub trace: Vec<TraceStep>,
    pub stats: LoopStats,
}

pub type BlockFn = fn(&Instance, &EdgeSet) -> Result<EdgeSet>;

#[derive(Debug, Clone, Copy)]
pub struct PreprocessOptions {
    pub record_trace: bool,
    /// Implementation of `block(·)` used by the outer loop. Only swapped
    /// out by harness sensitivity tests.
    #[doc(hidden)]
    pub block: BlockFn,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions { record_trace: true, block: model::block_set }
    }
}

pub fn preprocess(inst: &Instance) -> PreprocessResult {
    preprocess_with(inst, &PreprocessOptions::default())
}

pub fn preprocess_with(inst: &Instance, opts: &PreprocessOptions) -> PreprocessResult {
    let edge_count = inst.edge_count();
    let mut trace = Vec::new();
    let mut stats = LoopStats::default();
    let mut forbidden = inst.empty_set();
    let mut matching;

    loop {
        stats.rounds += 1;
        let round = stats.rounds;
        assert!(round <= edge_count + 1, "outer loop exceeded its bound");
        let mut working = forbidden.clone();
        let mut iteration = 0;
        loop {
            iteration += 1;
            assert!(iteration <= edge_count + 1, "inner loop exceeded its bound");
            let rest = working.complement();
            let doctor_choice = ch_doctors(inst, &rest);
            let choice = ch_hospitals(inst, &doctor_choice);
            let dominated = doctor_choice.difference(&choice);
            let (added, grew_by) = if !dominated.is_empty() {
                (dominated, Growth::Dominated)
            } else {
                let def = bipartite::deficiency(inst, &choice);
                let short = def.nu < inst.supported_doctors(&rest).len();
                matching = def.max_matching;
                if !short {
                    break;
                }
                (inst.doctors_edges_in(&def.minimal_violator, &choice), Growth::HallViolator)
            };
            debug_assert!(!added.is_empty() && added.is_disjoint(&working));
            working.union_with(&added);
            if opts.record_trace {
                trace.push(TraceStep { round, iteration, grew_by, added, block_edge: None });
            }
        }
        stats.inner_iterations.push(iteration);

        let choice = model::ch(inst, &working.complement());
        let candidates = (opts.block)(inst, &choice)
            .expect("Ch(E∖P) is flat")
            .intersection(&working);
        match candidates.first() {
            Some(b) => {
                let h = inst.edge(b).hospital;
                let added = inst.hospital_edges_in(h, &choice);
                if opts.record_trace {
                    trace.push(TraceStep {
                        round,
                        iteration: 0,
                        grew_by: Growth::BlockEdge,
                        added: added.clone(),
                        block_edge: Some(b),
                    });
                }
                working.union_with(&added);
                forbidden = working;
            }
            None => {
                forbidden = working;
                break;
            }
        }
    }

    let choice = model::ch(inst, &forbidden.complement());
    PreprocessResult { forbidden, matching, choice, trace, stats }
}

/// Unmatched open hospitals still touched by `L` or `R`.
pub fn critical_hospitals(inst: &Instance, res: &PreprocessResult) -> Vec<Hospital> {
    inst.hospitals()
        .filter(|&h| !inst.is_closed(h) && res.matching.of_hospital(h).is_none())
        .filter(|&h| {
            inst.hospital_edges(h)
                .iter()
                .any(|&e| res.choice.contains(e) || res.forbidden.contains(e))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CalmOutcome {
    /// `μ` is stable and doctor-optimal among stable matchings.
    Stable(Matching),
    Refused(Vec<Hospital>),
}

/// Returns `μ` when there is no critical hospital.
pub fn doctor_optimal_when_calm(inst: &Instance, res: &PreprocessResult) -> CalmOutcome {
    let critical = critical_hospitals(inst, res);
    if critical.is_empty() {
        CalmOutcome::Stable(res.matching.clone())
    } else {
        CalmOutcome::Refused(critical)
    }
}

/// Checks every guarantee of a result that does not need an oracle: the
/// choice set, saturation, block-freeness of `R`, the doctor-side ordering
/// of `R`, and that unmatched doctors have nothing left outside `R`.
pub fn check_conditions(inst: &Instance, res: &PreprocessResult) -> Result<()> {
    let fail = |what: &str| Err(Error::Invariant(what.to_string()));
    let rest = res.forbidden.complement();
    if res.choice != model::ch(inst, &rest) {
        return fail("L differs from Ch(E∖R)");
    }
    if !res.matching.to_edge_set(inst).is_subset(&res.choice) {
        return fail("μ is not contained in Ch(E∖R)");
    }
    for d in inst.supported_doctors(&rest) {
        if res.matching.of_doctor(d).is_none() {
            return fail("a doctor of D[E∖R] is unmatched");
        }
    }
    let blocking = model::block_set(inst, &res.choice)?;
    if !blocking.is_disjoint(&res.forbidden) {
        return fail("R meets block(Ch(E∖R))");
    }
    for d in inst.doctors() {
        let edges = inst.doctor_edges(d);
        let worst_forbidden = edges
            .iter()
            .filter(|&&e| res.forbidden.contains(e))
            .map(|&e| inst.doctor_rank(e))
            .max();
        let best_kept = edges
            .iter()
            .filter(|&&e| !res.forbidden.contains(e))
            .map(|&e| inst.doctor_rank(e))
            .min();
        if let (Some(worst), Some(best)) = (worst_forbidden, best_kept) {
            if worst > best {
                return fail("a kept edge beats a forbidden edge at its doctor");
            }
        }
        let has_choice = inst.incident_in(Vertex::Doctor(d), &res.choice).next().is_some();
        if res.matching.of_doctor(d).is_none() && has_choice {
            return fail("an unmatched doctor still has choice edges");
        }
        if !has_choice && edges.iter().any(|&e| !res.forbidden.contains(e)) {
            return fail("a doctor without choice edges keeps an edge outside R");
        }
    }
    Ok(())
}
