//! Exhaustive ground truth: matching enumeration, stable matchings,
//! envy-free matchings, satisfying assignments and deficiency minimizers.
//!
//! Every entry point has an explicit size budget and fails with
//! [`Error::Budget`] instead of truncating.

use crate::error::{Error, Result};
use crate::model::{Doctor, EdgeId, EdgeSet, Instance};
use crate::reductions::{envy_pairs, B2Formula, EnvyInstance};
use crate::stability::{is_stable, Matching};

/// Largest edge count [`enumerate_matchings`] accepts by default.
pub const DEFAULT_BUDGET: usize = 22;
/// Largest `|D[F]|` accepted by [`minimizers_bruteforce`].
pub const SUBSET_BUDGET: usize = 12;
/// Largest variable count accepted by [`sat_bruteforce`].
pub const SAT_BUDGET: usize = 20;

fn check_budget(what: &'static str, size: usize, budget: usize) -> Result<()> {
    if size > budget {
        Err(Error::Budget { what, size, budget })
    } else {
        Ok(())
    }
}

/// Streams every matching of an instance exactly once.
///
/// Matchings are produced in depth-first order of their sorted edge lists:
/// the empty matching first, and each matching is followed by its
/// extensions by a larger edge before any sibling.
pub struct Matchings<'a> {
    inst: &'a Instance,
    stack: Vec<EdgeId>,
    doctor_used: Vec<bool>,
    hospital_used: Vec<bool>,
    started: bool,
    done: bool,
}

impl<'a> Matchings<'a> {
    fn fits(&self, e: EdgeId) -> bool {
        let edge = self.inst.edge(e);
        !self.doctor_used[edge.doctor.0] && !self.hospital_used[edge.hospital.0]
    }

    fn set(&mut self, e: EdgeId, used: bool) {
        let edge = self.inst.edge(e);
        self.doctor_used[edge.doctor.0] = used;
        self.hospital_used[edge.hospital.0] = used;
    }

    /// Smallest edge at index `>= from` compatible with the current stack.
    fn next_fit(&self, from: usize) -> Option<EdgeId> {
        (from..self.inst.edge_count()).map(EdgeId).find(|&e| self.fits(e))
    }

    fn current(&self) -> Matching {
        Matching::from_edges(self.inst, self.stack.iter().copied()).expect("stack is a matching")
    }
}

impl Iterator for Matchings<'_> {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.current());
        }
        let from = self.stack.last().map_or(0, |e| e.0 + 1);
        if let Some(e) = self.next_fit(from) {
            self.set(e, true);
            self.stack.push(e);
            return Some(self.current());
        }
        while let Some(top) = self.stack.pop() {
            self.set(top, false);
            if let Some(e) = self.next_fit(top.0 + 1) {
                self.set(e, true);
                self.stack.push(e);
                return Some(self.current());
            }
        }
        self.done = true;
        None
    }
}

pub fn enumerate_matchings(inst: &Instance, budget: usize) -> Result<Matchings<'_>> {
    check_budget("edge set", inst.edge_count(), budget)?;
    Ok(Matchings {
        inst,
        stack: Vec::new(),
        doctor_used: vec![false; inst.doctor_count()],
        hospital_used: vec![false; inst.hospital_count()],
        started: false,
        done: false,
    })
}

/// Stable matchings in enumeration order.
pub fn all_stable_matchings(inst: &Instance, budget: usize) -> Result<Vec<Matching>> {
    Ok(enumerate_matchings(inst, budget)?.filter(|m| is_stable(inst, m)).collect())
}

/// First doctor-perfect matching without an envy pair, if any.
pub fn envyfree_bruteforce(envy: &EnvyInstance, budget: usize) -> Result<Option<Matching>> {
    let inst = envy.instance();
    let found = enumerate_matchings(inst, budget)?
        .find(|m| m.len() == inst.doctor_count() && envy_pairs(envy, m).is_empty());
    Ok(found)
}

/// Lexicographically first satisfying assignment, `false < true`, first
/// variable most significant.
pub fn sat_bruteforce(formula: &B2Formula) -> Result<Option<Vec<bool>>> {
    let n = formula.variable_count();
    check_budget("variable set", n, SAT_BUDGET)?;
    for mask in 0u64..(1u64 << n) {
        let phi: Vec<bool> = (0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect();
        if formula.is_satisfied_by(&phi) {
            return Ok(Some(phi));
        }
    }
    Ok(None)
}

/// `min ρ_F` over all subsets of `D[F]` and every subset attaining it, in
/// increasing bitmask order over the sorted `D[F]`.
pub fn minimizers_bruteforce(inst: &Instance, set: &EdgeSet) -> Result<(i64, Vec<Vec<Doctor>>)> {
    let support = inst.supported_doctors(set);
    check_budget("doctor support", support.len(), SUBSET_BUDGET)?;
    let mut best = i64::MAX;
    let mut minimizers = Vec::new();
    for mask in 0u32..(1u32 << support.len()) {
        let subset: Vec<Doctor> = support
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &d)| d)
            .collect();
        let value = crate::bipartite::rho(inst, set, &subset);
        if value < best {
            best = value;
            minimizers.clear();
        }
        if value == best {
            minimizers.push(subset);
        }
    }
    Ok((best, minimizers))
}

/// Intersection of a family of doctor sets (all doctors if empty).
pub fn intersect_all(inst: &Instance, family: &[Vec<Doctor>]) -> Vec<Doctor> {
    inst.doctors()
        .filter(|d| family.iter().all(|s| s.contains(d)))
        .collect()
}
