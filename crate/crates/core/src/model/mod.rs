//! Instances of the matching problem and the preference calculus on them.
//!
//! An [`Instance`] is a bipartite graph between doctors and hospitals in
//! which every vertex ranks its incident edges by a total preorder (ties
//! allowed), together with the set of *closed* hospitals. Vertices are
//! stored in lexicographic id order and edges in (doctor, hospital) order,
//! so every set and report derived from an instance iterates canonically.

mod calculus;
mod edge_set;
pub(crate) mod text;

use std::collections::{BTreeSet, HashMap};

pub use calculus::{
    block_set, ch, ch_doctors, ch_hospitals, ch_vertex, doctor_relation_to_flat,
    hospital_relation_to_flat, is_flat,
};
pub use edge_set::EdgeSet;
pub use text::{is_valid_id, parse_instance};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Doctor(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hospital(pub usize);

/// Index of an edge in the canonical edge order of its instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    Doctor(Doctor),
    Hospital(Hospital),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub doctor: Doctor,
    pub hospital: Hospital,
}

/// Outcome of comparing two elements of `E(v) ∪ {∅}` at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Better,
    Tied,
    Worse,
}

impl Relation {
    /// Compares two ranks where a smaller rank is preferred.
    pub fn from_ranks(left: u32, right: u32) -> Relation {
        match left.cmp(&right) {
            std::cmp::Ordering::Less => Relation::Better,
            std::cmp::Ordering::Equal => Relation::Tied,
            std::cmp::Ordering::Greater => Relation::Worse,
        }
    }

    /// `≿`: better or tied.
    pub fn at_least(self) -> bool {
        self != Relation::Worse
    }
}

/// Rank of the empty element ∅; strictly below every listed partner.
pub const UNMATCHED_RANK: u32 = u32::MAX;

/// A preference list as ordered tie groups of partner indices (group 0 is
/// the most preferred). Partners index the opposite side of the graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PrefOrder {
    groups: Vec<Vec<usize>>,
}

impl PrefOrder {
    pub fn new(groups: Vec<Vec<usize>>) -> Self {
        PrefOrder { groups: groups.into_iter().filter(|g| !g.is_empty()).collect() }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// 1-based rank of `partner`, if listed.
    pub fn rank(&self, partner: usize) -> Option<u32> {
        self.groups
            .iter()
            .position(|g| g.contains(&partner))
            .map(|i| i as u32 + 1)
    }

    pub fn partners(&self) -> impl Iterator<Item = usize> + '_ {
        self.groups.iter().flatten().copied()
    }

    pub fn len(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// An instance: graph, preferences and closed hospitals.
///
/// Immutable once built; construct it with [`InstanceBuilder`] or
/// [`parse_instance`].
#[derive(Debug, Clone)]
pub struct Instance {
    doctors: Vec<String>,
    hospitals: Vec<String>,
    closed: Vec<bool>,
    doctor_prefs: Vec<PrefOrder>,
    hospital_prefs: Vec<PrefOrder>,
    edges: Vec<Edge>,
    doctor_rank: Vec<u32>,
    hospital_rank: Vec<u32>,
    doctor_edges: Vec<Vec<EdgeId>>,
    hospital_edges: Vec<Vec<EdgeId>>,
    edge_lookup: HashMap<(usize, usize), EdgeId>,
    doctor_index: HashMap<String, usize>,
    hospital_index: HashMap<String, usize>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.doctors == other.doctors
            && self.hospitals == other.hospitals
            && self.closed == other.closed
            && self.doctor_prefs == other.doctor_prefs
            && self.hospital_prefs == other.hospital_prefs
    }
}

impl Eq for Instance {}

impl Instance {
    pub fn doctor_count(&self) -> usize {
        self.doctors.len()
    }

    pub fn hospital_count(&self) -> usize {
        self.hospitals.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn doctors(&self) -> impl Iterator<Item = Doctor> {
        (0..self.doctors.len()).map(Doctor)
    }

    pub fn hospitals(&self) -> impl Iterator<Item = Hospital> {
        (0..self.hospitals.len()).map(Hospital)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e.0]
    }

    pub fn find_edge(&self, d: Doctor, h: Hospital) -> Option<EdgeId> {
        self.edge_lookup.get(&(d.0, h.0)).copied()
    }

    pub fn doctor_name(&self, d: Doctor) -> &str {
        &self.doctors[d.0]
    }

    pub fn hospital_name(&self, h: Hospital) -> &str {
        &self.hospitals[h.0]
    }

    pub fn vertex_name(&self, v: Vertex) -> &str {
        match v {
            Vertex::Doctor(d) => self.doctor_name(d),
            Vertex::Hospital(h) => self.hospital_name(h),
        }
    }

    pub fn doctor_by_name(&self, name: &str) -> Option<Doctor> {
        self.doctor_index.get(name).copied().map(Doctor)
    }

    pub fn hospital_by_name(&self, name: &str) -> Option<Hospital> {
        self.hospital_index.get(name).copied().map(Hospital)
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<Vertex> {
        self.doctor_by_name(name)
            .map(Vertex::Doctor)
            .or_else(|| self.hospital_by_name(name).map(Vertex::Hospital))
    }

    pub fn is_closed(&self, h: Hospital) -> bool {
        self.closed[h.0]
    }

    pub fn closed_hospitals(&self) -> impl Iterator<Item = Hospital> + '_ {
        self.hospitals().filter(|&h| self.is_closed(h))
    }

    pub fn doctor_pref(&self, d: Doctor) -> &PrefOrder {
        &self.doctor_prefs[d.0]
    }

    pub fn hospital_pref(&self, h: Hospital) -> &PrefOrder {
        &self.hospital_prefs[h.0]
    }

    /// `E(d)` in canonical order.
    pub fn doctor_edges(&self, d: Doctor) -> &[EdgeId] {
        &self.doctor_edges[d.0]
    }

    /// `E(h)` in canonical order.
    pub fn hospital_edges(&self, h: Hospital) -> &[EdgeId] {
        &self.hospital_edges[h.0]
    }

    pub fn incident_edges(&self, v: Vertex) -> &[EdgeId] {
        match v {
            Vertex::Doctor(d) => self.doctor_edges(d),
            Vertex::Hospital(h) => self.hospital_edges(h),
        }
    }

    /// Rank of `e` in its doctor's list (1 = best).
    pub fn doctor_rank(&self, e: EdgeId) -> u32 {
        self.doctor_rank[e.0]
    }

    /// Rank of `e` in its hospital's list (1 = best).
    pub fn hospital_rank(&self, e: EdgeId) -> u32 {
        self.hospital_rank[e.0]
    }

    pub fn doctor_rank_or_unmatched(&self, e: Option<EdgeId>) -> u32 {
        e.map_or(UNMATCHED_RANK, |e| self.doctor_rank(e))
    }

    pub fn hospital_rank_or_unmatched(&self, e: Option<EdgeId>) -> u32 {
        e.map_or(UNMATCHED_RANK, |e| self.hospital_rank(e))
    }

    pub fn is_incident(&self, v: Vertex, e: EdgeId) -> bool {
        let edge = self.edge(e);
        match v {
            Vertex::Doctor(d) => edge.doctor == d,
            Vertex::Hospital(h) => edge.hospital == h,
        }
    }

    /// Compares `e` and `f` (each incident to `v`, or ∅) under `≿_v`.
    pub fn compare_at_vertex(
        &self,
        v: Vertex,
        e: Option<EdgeId>,
        f: Option<EdgeId>,
    ) -> Result<Relation> {
        for x in [e, f].into_iter().flatten() {
            if x.0 >= self.edge_count() || !self.is_incident(v, x) {
                return Err(Error::NotIncident(self.vertex_name(v).to_string()));
            }
        }
        let rank = |x: Option<EdgeId>| match v {
            Vertex::Doctor(_) => self.doctor_rank_or_unmatched(x),
            Vertex::Hospital(_) => self.hospital_rank_or_unmatched(x),
        };
        Ok(Relation::from_ranks(rank(e), rank(f)))
    }

    pub fn empty_set(&self) -> EdgeSet {
        EdgeSet::empty(self.edge_count())
    }

    pub fn all_edges(&self) -> EdgeSet {
        EdgeSet::full(self.edge_count())
    }

    pub fn edge_set(&self, edges: impl IntoIterator<Item = EdgeId>) -> EdgeSet {
        EdgeSet::from_edges(self.edge_count(), edges)
    }

    /// `F(v)`.
    pub fn incident_in<'a>(&'a self, v: Vertex, set: &'a EdgeSet) -> impl Iterator<Item = EdgeId> + 'a {
        self.incident_edges(v).iter().copied().filter(move |&e| set.contains(e))
    }

    /// `F(X)` for a set of doctors.
    pub fn doctors_edges_in(&self, doctors: &[Doctor], set: &EdgeSet) -> EdgeSet {
        let mut out = self.empty_set();
        for &d in doctors {
            for &e in self.doctor_edges(d) {
                if set.contains(e) {
                    out.insert(e);
                }
            }
        }
        out
    }

    pub fn hospital_edges_in(&self, h: Hospital, set: &EdgeSet) -> EdgeSet {
        self.edge_set(self.incident_in(Vertex::Hospital(h), set))
    }

    /// `D[F]`: doctors with at least one edge in `set`.
    pub fn supported_doctors(&self, set: &EdgeSet) -> Vec<Doctor> {
        let mut seen = vec![false; self.doctor_count()];
        for e in set.iter() {
            seen[self.edge(e).doctor.0] = true;
        }
        self.doctors().filter(|d| seen[d.0]).collect()
    }

    /// `Γ_F(X)`: hospitals adjacent to `doctors` through `set`.
    pub fn neighborhood(&self, doctors: &[Doctor], set: &EdgeSet) -> BTreeSet<Hospital> {
        doctors
            .iter()
            .flat_map(|&d| self.doctor_edges(d).iter().copied())
            .filter(|&e| set.contains(e))
            .map(|e| self.edge(e).hospital)
            .collect()
    }

    /// Builder pre-populated with this instance, e.g. to change the closed set.
    pub fn to_builder(&self) -> InstanceBuilder {
        let mut b = InstanceBuilder::new();
        for d in &self.doctors {
            b.doctor(d);
        }
        for h in &self.hospitals {
            b.hospital(h);
        }
        for h in self.closed_hospitals() {
            b.close(self.hospital_name(h));
        }
        for d in self.doctors() {
            let groups = self.doctor_prefs[d.0]
                .groups()
                .iter()
                .map(|g| g.iter().map(|&h| self.hospitals[h].clone()).collect())
                .collect();
            b.doctor_pref(self.doctor_name(d), groups);
        }
        for h in self.hospitals() {
            let groups = self.hospital_prefs[h.0]
                .groups()
                .iter()
                .map(|g| g.iter().map(|&d| self.doctors[d].clone()).collect())
                .collect();
            b.hospital_pref(self.hospital_name(h), groups);
        }
        b
    }

    /// Same graph and preferences with a different closed set.
    pub fn with_closed<I, S>(&self, closed: I) -> Result<Instance>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut b = self.to_builder();
        b.closed.clear();
        for h in closed {
            b.close(h.as_ref());
        }
        b.build()
    }

    pub fn max_doctor_degree(&self) -> usize {
        self.doctor_edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.doctor_edges
            .iter()
            .chain(self.hospital_edges.iter())
            .map(Vec::len)
            .max()
            .unwrap_or(0)
    }
}

/// Collects vertices, preferences and closures by name and validates them.
#[derive(Debug, Clone, Default)]
pub struct InstanceBuilder {
    doctors: Vec<String>,
    hospitals: Vec<String>,
    closed: Vec<String>,
    doctor_prefs: Vec<(String, Vec<Vec<String>>)>,
    hospital_prefs: Vec<(String, Vec<Vec<String>>)>,
}

impl InstanceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn doctor(&mut self, id: impl Into<String>) -> &mut Self {
        self.doctors.push(id.into());
        self
    }

    pub fn hospital(&mut self, id: impl Into<String>) -> &mut Self {
        self.hospitals.push(id.into());
        self
    }

    pub fn close(&mut self, id: impl Into<String>) -> &mut Self {
        self.closed.push(id.into());
        self
    }

    pub fn doctor_pref(&mut self, id: impl Into<String>, groups: Vec<Vec<String>>) -> &mut Self {
        self.doctor_prefs.push((id.into(), groups));
        self
    }

    pub fn hospital_pref(&mut self, id: impl Into<String>, groups: Vec<Vec<String>>) -> &mut Self {
        self.hospital_prefs.push((id.into(), groups));
        self
    }

    /// Shorthand taking `&str` groups, mostly for tests and generators.
    pub fn pref(&mut self, id: &str, groups: &[&[&str]]) -> &mut Self {
        let groups: Vec<Vec<String>> = groups
            .iter()
            .map(|g| g.iter().map(|s| s.to_string()).collect())
            .collect();
        if self.doctors.iter().any(|d| d == id) {
            self.doctor_pref(id, groups)
        } else {
            self.hospital_pref(id, groups)
        }
    }

    pub fn build(&self) -> Result<Instance> {
        let mut all = BTreeSet::new();
        for id in self.doctors.iter().chain(self.hospitals.iter()) {
            if !is_valid_id(id) {
                return Err(Error::syntax(0, format!("invalid id `{id}`")));
            }
            if !all.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        let mut doctors = self.doctors.clone();
        doctors.sort();
        let mut hospitals = self.hospitals.clone();
        hospitals.sort();
        let doctor_index: HashMap<String, usize> =
            doctors.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let hospital_index: HashMap<String, usize> =
            hospitals.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();

        let mut closed = vec![false; hospitals.len()];
        for id in &self.closed {
            match hospital_index.get(id) {
                Some(&h) => closed[h] = true,
                None if doctor_index.contains_key(id) => {
                    return Err(Error::ClosedNotHospital(id.clone()))
                }
                None => return Err(Error::UnknownId(id.clone())),
            }
        }

        let doctor_prefs = resolve_prefs(
            &self.doctor_prefs,
            &doctor_index,
            &hospital_index,
            doctors.len(),
        )?;
        let hospital_prefs = resolve_prefs(
            &self.hospital_prefs,
            &hospital_index,
            &doctor_index,
            hospitals.len(),
        )?;

        let mut edges = Vec::new();
        for (d, pref) in doctor_prefs.iter().enumerate() {
            for h in pref.partners() {
                if hospital_prefs[h].rank(d).is_none() {
                    return Err(Error::Asymmetric {
                        from: doctors[d].clone(),
                        to: hospitals[h].clone(),
                    });
                }
                edges.push(Edge { doctor: Doctor(d), hospital: Hospital(h) });
            }
        }
        for (h, pref) in hospital_prefs.iter().enumerate() {
            for d in pref.partners() {
                if doctor_prefs[d].rank(h).is_none() {
                    return Err(Error::Asymmetric {
                        from: hospitals[h].clone(),
                        to: doctors[d].clone(),
                    });
                }
            }
        }
        edges.sort();

        let mut doctor_edges = vec![Vec::new(); doctors.len()];
        let mut hospital_edges = vec![Vec::new(); hospitals.len()];
        let mut doctor_rank = Vec::with_capacity(edges.len());
        let mut hospital_rank = Vec::with_capacity(edges.len());
        let mut edge_lookup = HashMap::with_capacity(edges.len());
        for (i, edge) in edges.iter().enumerate() {
            let id = EdgeId(i);
            doctor_edges[edge.doctor.0].push(id);
            hospital_edges[edge.hospital.0].push(id);
            doctor_rank.push(doctor_prefs[edge.doctor.0].rank(edge.hospital.0).unwrap());
            hospital_rank.push(hospital_prefs[edge.hospital.0].rank(edge.doctor.0).unwrap());
            edge_lookup.insert((edge.doctor.0, edge.hospital.0), id);
        }

        Ok(Instance {
            doctors,
            hospitals,
            closed,
            doctor_prefs,
            hospital_prefs,
            edges,
            doctor_rank,
            hospital_rank,
            doctor_edges,
            hospital_edges,
            edge_lookup,
            doctor_index,
            hospital_index,
        })
    }
}

fn resolve_prefs(
    raw: &[(String, Vec<Vec<String>>)],
    own: &HashMap<String, usize>,
    other: &HashMap<String, usize>,
    count: usize,
) -> Result<Vec<PrefOrder>> {
    let mut prefs: Vec<Option<PrefOrder>> = vec![None; count];
    for (owner, groups) in raw {
        let &v = own.get(owner).ok_or_else(|| Error::UnknownId(owner.clone()))?;
        if prefs[v].is_some() {
            return Err(Error::DuplicateId(owner.clone()));
        }
        let mut seen = BTreeSet::new();
        let mut resolved = Vec::with_capacity(groups.len());
        for group in groups {
            let mut g = Vec::with_capacity(group.len());
            for partner in group {
                let &p = other.get(partner).ok_or_else(|| Error::UnknownId(partner.clone()))?;
                if !seen.insert(p) {
                    return Err(Error::DuplicatePrefEntry {
                        owner: owner.clone(),
                        partner: partner.clone(),
                    });
                }
                g.push(p);
            }
            g.sort_unstable();
            resolved.push(g);
        }
        prefs[v] = Some(PrefOrder::new(resolved));
    }
    Ok(prefs.into_iter().map(Option::unwrap_or_default).collect())
}
