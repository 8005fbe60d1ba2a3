//! Solver for instances whose doctors rank every open hospital strictly
//! above every closed one.
//!
//! Under that condition a stable matching exists iff pre-processing leaves
//! no critical hospital, and then the pre-processing matching is stable and
//! doctor-optimal.

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::preprocess::{critical_hospitals, preprocess, PreprocessResult};
use crate::stability::{is_stable, Outcome};

/// First doctor violating the separation condition, if any.
fn star_violation(inst: &Instance) -> Option<crate::model::Doctor> {
    inst.doctors().find(|&d| {
        let edges = inst.doctor_edges(d);
        let best_closed = edges
            .iter()
            .filter(|&&e| inst.is_closed(inst.edge(e).hospital))
            .map(|&e| inst.doctor_rank(e))
            .min();
        let worst_open = edges
            .iter()
            .filter(|&&e| !inst.is_closed(inst.edge(e).hospital))
            .map(|&e| inst.doctor_rank(e))
            .max();
        matches!((best_closed, worst_open), (Some(c), Some(o)) if o >= c)
    })
}

/// True iff for every doctor, each open hospital is strictly preferred to
/// each closed hospital.
pub fn satisfies_star(inst: &Instance) -> bool {
    star_violation(inst).is_none()
}

pub fn solve_separated(inst: &Instance) -> Result<Outcome> {
    solve_separated_with(inst, preprocess(inst))
}

/// Same as [`solve_separated`] on an already computed pre-processing result.
pub fn solve_separated_with(inst: &Instance, res: PreprocessResult) -> Result<Outcome> {
    if let Some(d) = star_violation(inst) {
        return Err(Error::StarViolated(inst.doctor_name(d).to_string()));
    }
    if !critical_hospitals(inst, &res).is_empty() {
        return Ok(Outcome::NoStable);
    }
    if !is_stable(inst, &res.matching) {
        return Err(Error::Invariant("pre-processing matching is not stable".into()));
    }
    Ok(Outcome::Stable(res.matching))
}
