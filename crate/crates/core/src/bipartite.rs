//! Maximum matchings inside an edge subset and the deficiency
//! `ρ_F(X) = |Γ_F(X)| − |X|` with its inclusion-minimal minimizer.

use std::collections::VecDeque;

use crate::model::{Doctor, EdgeId, EdgeSet, Instance};
use crate::stability::Matching;

const NIL: usize = usize::MAX;

/// Maximum-cardinality matching using only edges of `set`.
///
/// Phased shortest-augmenting-path search (Hopcroft–Karp); adjacency is
/// scanned in canonical edge order so the result is deterministic.
pub fn max_matching(inst: &Instance, set: &EdgeSet) -> Matching {
    let nd = inst.doctor_count();
    let nh = inst.hospital_count();
    let adj: Vec<Vec<(usize, EdgeId)>> = inst
        .doctors()
        .map(|d| {
            inst.doctor_edges(d)
                .iter()
                .filter(|&&e| set.contains(e))
                .map(|&e| (inst.edge(e).hospital.0, e))
                .collect()
        })
        .collect();

    let mut mate_d = vec![NIL; nd];
    let mut mate_h = vec![NIL; nh];
    let mut dist = vec![0u32; nd];
    let mut cursor = vec![0usize; nd];

    loop {
        // Layer doctors by alternating distance from the free ones.
        let mut queue = VecDeque::new();
        for d in 0..nd {
            if mate_d[d] == NIL && !adj[d].is_empty() {
                dist[d] = 0;
                queue.push_back(d);
            } else {
                dist[d] = u32::MAX;
            }
        }
        let mut found = false;
        while let Some(d) = queue.pop_front() {
            for &(h, _) in &adj[d] {
                let next = mate_h[h];
                if next == NIL {
                    found = true;
                } else if dist[next] == u32::MAX {
                    dist[next] = dist[d] + 1;
                    queue.push_back(next);
                }
            }
        }
        if !found {
            break;
        }
        cursor.iter_mut().for_each(|c| *c = 0);
        for d in 0..nd {
            if mate_d[d] == NIL && !adj[d].is_empty() {
                augment(d, &adj, &mut mate_d, &mut mate_h, &mut dist, &mut cursor);
            }
        }
    }

    let mut m = Matching::empty(inst);
    for d in 0..nd {
        if mate_d[d] != NIL {
            let e = adj[d].iter().find(|&&(h, _)| h == mate_d[d]).unwrap().1;
            m.insert(inst, e).expect("augmenting paths keep a matching");
        }
    }
    m
}

fn augment(
    d: usize,
    adj: &[Vec<(usize, EdgeId)>],
    mate_d: &mut [usize],
    mate_h: &mut [usize],
    dist: &mut [u32],
    cursor: &mut [usize],
) -> bool {
    while cursor[d] < adj[d].len() {
        let h = adj[d][cursor[d]].0;
        cursor[d] += 1;
        let next = mate_h[h];
        let extends = next == NIL
            || (dist[next] == dist[d] + 1 && augment(next, adj, mate_d, mate_h, dist, cursor));
        if extends {
            mate_d[d] = h;
            mate_h[h] = d;
            return true;
        }
    }
    dist[d] = u32::MAX;
    false
}

/// Maximum matching together with the minimum deficiency and its
/// inclusion-minimal minimizer.
#[derive(Debug, Clone)]
pub struct DeficiencyResult {
    pub max_matching: Matching,
    pub nu: usize,
    /// `min_X ρ_F(X)` over `X ⊆ D[F]`; never positive.
    pub min_rho: i64,
    /// The unique inclusion-minimal minimizer, sorted. Empty iff Hall's
    /// condition holds on `F`.
    pub minimal_violator: Vec<Doctor>,
}

/// `ρ_F(X)`.
pub fn rho(inst: &Instance, set: &EdgeSet, doctors: &[Doctor]) -> i64 {
    inst.neighborhood(doctors, set).len() as i64 - doctors.len() as i64
}

/// Computes the minimal minimizer of `ρ_F` as the set of doctors reachable
/// from the unmatched doctors of `D[F]` along alternating paths (any
/// `F`-edge from a doctor, the matched edge back from a hospital).
pub fn deficiency(inst: &Instance, set: &EdgeSet) -> DeficiencyResult {
    let matching = max_matching(inst, set);
    let supported = inst.supported_doctors(set);
    let mut reached = vec![false; inst.doctor_count()];
    let mut seen_hospital = vec![false; inst.hospital_count()];
    let mut queue: VecDeque<Doctor> = supported
        .iter()
        .copied()
        .filter(|&d| matching.of_doctor(d).is_none())
        .collect();
    for d in &queue {
        reached[d.0] = true;
    }
    while let Some(d) = queue.pop_front() {
        for e in inst.incident_in(crate::model::Vertex::Doctor(d), set) {
            let h = inst.edge(e).hospital;
            if std::mem::replace(&mut seen_hospital[h.0], true) {
                continue;
            }
            let partner = matching
                .of_hospital(h)
                .map(|m| inst.edge(m).doctor)
                .expect("a free hospital next to a free doctor would augment");
            if !std::mem::replace(&mut reached[partner.0], true) {
                queue.push_back(partner);
            }
        }
    }
    let nu = matching.len();
    DeficiencyResult {
        min_rho: nu as i64 - supported.len() as i64,
        nu,
        minimal_violator: inst.doctors().filter(|d| reached[d.0]).collect(),
        max_matching: matching,
    }
}
