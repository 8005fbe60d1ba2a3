//! Choice functions, flatness and the `block` operator on edge sets.

use super::{EdgeId, EdgeSet, Instance, Relation, Vertex, UNMATCHED_RANK};
use crate::error::{Error, Result};

fn rank_at(inst: &Instance, v: Vertex, e: EdgeId) -> u32 {
    match v {
        Vertex::Doctor(_) => inst.doctor_rank(e),
        Vertex::Hospital(_) => inst.hospital_rank(e),
    }
}

/// Best rank among `set(v)`, or [`UNMATCHED_RANK`] when `set(v)` is empty.
fn best_rank(inst: &Instance, v: Vertex, set: &EdgeSet) -> u32 {
    inst.incident_in(v, set)
        .map(|e| rank_at(inst, v, e))
        .min()
        .unwrap_or(UNMATCHED_RANK)
}

/// `Ch_v(F)`: the maximal elements of `F(v)` under `≿_v`.
pub fn ch_vertex(inst: &Instance, v: Vertex, set: &EdgeSet) -> EdgeSet {
    let best = best_rank(inst, v, set);
    inst.edge_set(inst.incident_in(v, set).filter(|&e| rank_at(inst, v, e) == best))
}

/// `Ch_D(F)`: union of the doctors' choices.
pub fn ch_doctors(inst: &Instance, set: &EdgeSet) -> EdgeSet {
    let mut best = vec![UNMATCHED_RANK; inst.doctor_count()];
    for e in set.iter() {
        let d = inst.edge(e).doctor.0;
        best[d] = best[d].min(inst.doctor_rank(e));
    }
    inst.edge_set(set.iter().filter(|&e| inst.doctor_rank(e) == best[inst.edge(e).doctor.0]))
}

/// `Ch_H(F)`: union of the hospitals' choices.
pub fn ch_hospitals(inst: &Instance, set: &EdgeSet) -> EdgeSet {
    let mut best = vec![UNMATCHED_RANK; inst.hospital_count()];
    for e in set.iter() {
        let h = inst.edge(e).hospital.0;
        best[h] = best[h].min(inst.hospital_rank(e));
    }
    inst.edge_set(
        set.iter().filter(|&e| inst.hospital_rank(e) == best[inst.edge(e).hospital.0]),
    )
}

/// `Ch(F) = Ch_H(Ch_D(F))`. Always flat.
pub fn ch(inst: &Instance, set: &EdgeSet) -> EdgeSet {
    ch_hospitals(inst, &ch_doctors(inst, set))
}

/// True iff all edges of `set` sharing a vertex are tied at that vertex.
pub fn is_flat(inst: &Instance, set: &EdgeSet) -> bool {
    let mut doctor_rank = vec![None; inst.doctor_count()];
    let mut hospital_rank = vec![None; inst.hospital_count()];
    for e in set.iter() {
        let edge = inst.edge(e);
        for (slot, rank) in [
            (&mut doctor_rank[edge.doctor.0], inst.doctor_rank(e)),
            (&mut hospital_rank[edge.hospital.0], inst.hospital_rank(e)),
        ] {
            match *slot {
                None => *slot = Some(rank),
                Some(r) if r != rank => return false,
                Some(_) => {}
            }
        }
    }
    true
}

/// Position of `e` relative to the flat set `set` at `e`'s doctor:
/// `Better` for `e ≻_d F` (including `F(d) = ∅`), `Tied` for `e ∼_d F`.
pub fn doctor_relation_to_flat(inst: &Instance, e: EdgeId, set: &EdgeSet) -> Result<Relation> {
    if !is_flat(inst, set) {
        return Err(Error::NotFlat);
    }
    let d = Vertex::Doctor(inst.edge(e).doctor);
    Ok(Relation::from_ranks(inst.doctor_rank(e), best_rank(inst, d, set)))
}

/// Position of `e` relative to the flat set `set` at `e`'s hospital, which
/// must have at least one edge in `set`.
pub fn hospital_relation_to_flat(inst: &Instance, e: EdgeId, set: &EdgeSet) -> Result<Relation> {
    if !is_flat(inst, set) {
        return Err(Error::NotFlat);
    }
    let h = inst.edge(e).hospital;
    let representative = best_rank(inst, Vertex::Hospital(h), set);
    if representative == UNMATCHED_RANK {
        return Err(Error::EmptyAtHospital(inst.hospital_name(h).to_string()));
    }
    Ok(Relation::from_ranks(inst.hospital_rank(e), representative))
}

/// `block(F)` for a flat `F`: edges `(d,h) ∉ F` with `F(h) ≠ ∅` such that
/// either `e ≻_d F` and `e ≿_h F`, or `e ∼_d F` and `e ≻_h F`.
pub fn block_set(inst: &Instance, set: &EdgeSet) -> Result<EdgeSet> {
    if !is_flat(inst, set) {
        return Err(Error::NotFlat);
    }
    let mut doctor_level = vec![UNMATCHED_RANK; inst.doctor_count()];
    let mut hospital_level = vec![UNMATCHED_RANK; inst.hospital_count()];
    for e in set.iter() {
        let edge = inst.edge(e);
        doctor_level[edge.doctor.0] = inst.doctor_rank(e);
        hospital_level[edge.hospital.0] = inst.hospital_rank(e);
    }
    let mut out = inst.empty_set();
    for e in inst.edge_ids() {
        if set.contains(e) {
            continue;
        }
        let edge = inst.edge(e);
        let at_hospital = hospital_level[edge.hospital.0];
        if at_hospital == UNMATCHED_RANK {
            continue;
        }
        let at_doctor = Relation::from_ranks(inst.doctor_rank(e), doctor_level[edge.doctor.0]);
        let at_hospital = Relation::from_ranks(inst.hospital_rank(e), at_hospital);
        let blocks = match at_doctor {
            Relation::Better => at_hospital.at_least(),
            Relation::Tied => at_hospital == Relation::Better,
            Relation::Worse => false,
        };
        if blocks {
            out.insert(e);
        }
    }
    Ok(out)
}
