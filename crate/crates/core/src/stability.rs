//! Matchings and blocking edges under the closure rule.
//!
//! An edge `e = (d,h) ∉ μ` weakly (strongly) blocks `μ` on `d` when
//! `e ≿_d μ(d)` (`e ≻_d μ(d)`). On `h` the same comparison applies, except
//! that a closed hospital left unmatched never participates. `e` blocks `μ`
//! when it weakly blocks on both sides and strongly blocks on at least one.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Doctor, EdgeId, EdgeSet, Hospital, Instance, Relation};

/// A set of edges with at most one edge per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matching {
    edges: Vec<EdgeId>,
    by_doctor: Vec<Option<EdgeId>>,
    by_hospital: Vec<Option<EdgeId>>,
}

impl Matching {
    pub fn empty(inst: &Instance) -> Self {
        Matching {
            edges: Vec::new(),
            by_doctor: vec![None; inst.doctor_count()],
            by_hospital: vec![None; inst.hospital_count()],
        }
    }

    pub fn from_edges(inst: &Instance, edges: impl IntoIterator<Item = EdgeId>) -> Result<Self> {
        let mut m = Self::empty(inst);
        for e in edges {
            m.insert(inst, e)?;
        }
        Ok(m)
    }

    /// Adds `e`, failing if either endpoint is already covered.
    pub fn insert(&mut self, inst: &Instance, e: EdgeId) -> Result<()> {
        if e.0 >= inst.edge_count() {
            return Err(Error::Invariant(format!("edge id {} out of range", e.0)));
        }
        let edge = inst.edge(e);
        if self.by_doctor[edge.doctor.0].is_some() {
            return Err(Error::NotMatching(inst.doctor_name(edge.doctor).to_string()));
        }
        if self.by_hospital[edge.hospital.0].is_some() {
            return Err(Error::NotMatching(inst.hospital_name(edge.hospital).to_string()));
        }
        self.by_doctor[edge.doctor.0] = Some(e);
        self.by_hospital[edge.hospital.0] = Some(e);
        let at = self.edges.partition_point(|&x| x < e);
        self.edges.insert(at, e);
        Ok(())
    }

    pub fn remove(&mut self, inst: &Instance, e: EdgeId) {
        if let Ok(at) = self.edges.binary_search(&e) {
            self.edges.remove(at);
            let edge = inst.edge(e);
            self.by_doctor[edge.doctor.0] = None;
            self.by_hospital[edge.hospital.0] = None;
        }
    }

    /// Edges in canonical order.
    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    /// `μ(d)`.
    pub fn of_doctor(&self, d: Doctor) -> Option<EdgeId> {
        self.by_doctor[d.0]
    }

    /// `μ(h)`.
    pub fn of_hospital(&self, h: Hospital) -> Option<EdgeId> {
        self.by_hospital[h.0]
    }

    pub fn to_edge_set(&self, inst: &Instance) -> EdgeSet {
        inst.edge_set(self.edges.iter().copied())
    }

    /// Pairs of names in canonical order.
    pub fn named_pairs<'a>(&self, inst: &'a Instance) -> Vec<(&'a str, &'a str)> {
        self.edges
            .iter()
            .map(|&e| {
                let edge = inst.edge(e);
                (inst.doctor_name(edge.doctor), inst.hospital_name(edge.hospital))
            })
            .collect()
    }

    /// One `<doctor> <hospital>` line per edge.
    pub fn display<'a>(&'a self, inst: &'a Instance) -> impl fmt::Display + 'a {
        MatchingDisplay { matching: self, inst }
    }
}

struct MatchingDisplay<'a> {
    matching: &'a Matching,
    inst: &'a Instance,
}

impl fmt::Display for MatchingDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (d, h) in self.matching.named_pairs(self.inst) {
            writeln!(f, "{d} {h}")?;
        }
        Ok(())
    }
}

/// Parses one `<doctor> <hospital>` pair per line. Blank lines, `#` comments
/// and `key: value` header lines (as written by `solve`) are skipped.
pub fn parse_matching(inst: &Instance, text: &str) -> Result<Matching> {
    let mut m = Matching::empty(inst);
    for (index, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line.contains(':') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(d), Some(h), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::syntax(index + 1, "expected `<doctor> <hospital>`"));
        };
        let doctor = inst.doctor_by_name(d).ok_or_else(|| Error::UnknownId(d.to_string()))?;
        let hospital = inst.hospital_by_name(h).ok_or_else(|| Error::UnknownId(h.to_string()))?;
        let e = inst
            .find_edge(doctor, hospital)
            .ok_or_else(|| Error::EdgeNotInE(d.to_string(), h.to_string()))?;
        m.insert(inst, e)?;
    }
    Ok(m)
}

/// True iff `edges` are edges of `inst` and no vertex repeats.
pub fn is_matching(inst: &Instance, edges: &[EdgeId]) -> bool {
    edges.iter().all(|e| e.0 < inst.edge_count())
        && Matching::from_edges(inst, edges.iter().copied()).is_ok()
}

/// Per-side blocking flags for one edge outside the matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockReport {
    pub edge: EdgeId,
    pub weak_on_doctor: bool,
    pub strong_on_doctor: bool,
    pub weak_on_hospital: bool,
    pub strong_on_hospital: bool,
    pub blocks: bool,
}

pub fn block_report(inst: &Instance, matching: &Matching, e: EdgeId) -> Result<BlockReport> {
    if e.0 >= inst.edge_count() {
        return Err(Error::EdgeNotInE(format!("#{}", e.0), String::new()));
    }
    let edge = inst.edge(e);
    if matching.contains(e) {
        return Err(Error::EdgeInMatching(
            inst.doctor_name(edge.doctor).to_string(),
            inst.hospital_name(edge.hospital).to_string(),
        ));
    }
    let at_doctor = Relation::from_ranks(
        inst.doctor_rank(e),
        inst.doctor_rank_or_unmatched(matching.of_doctor(edge.doctor)),
    );
    let current = matching.of_hospital(edge.hospital);
    let open = !inst.is_closed(edge.hospital) || current.is_some();
    let at_hospital =
        Relation::from_ranks(inst.hospital_rank(e), inst.hospital_rank_or_unmatched(current));

    let weak_on_doctor = at_doctor.at_least();
    let strong_on_doctor = at_doctor == Relation::Better;
    let weak_on_hospital = open && at_hospital.at_least();
    let strong_on_hospital = open && at_hospital == Relation::Better;
    Ok(BlockReport {
        edge: e,
        weak_on_doctor,
        strong_on_doctor,
        weak_on_hospital,
        strong_on_hospital,
        blocks: weak_on_doctor && weak_on_hospital && (strong_on_doctor || strong_on_hospital),
    })
}

/// Reports for every blocking edge, in canonical order.
pub fn blocking_edges(inst: &Instance, matching: &Matching) -> Vec<BlockReport> {
    inst.edge_ids()
        .filter(|&e| !matching.contains(e))
        .filter_map(|e| block_report(inst, matching, e).ok())
        .filter(|r| r.blocks)
        .collect()
}

pub fn is_stable(inst: &Instance, matching: &Matching) -> bool {
    inst.edge_ids()
        .filter(|&e| !matching.contains(e))
        .all(|e| block_report(inst, matching, e).map_or(true, |r| !r.blocks))
}

/// Answer of a decision-and-construction solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Stable(Matching),
    NoStable,
}

impl Outcome {
    pub fn matching(&self) -> Option<&Matching> {
        match self {
            Outcome::Stable(m) => Some(m),
            Outcome::NoStable => None,
        }
    }

    pub fn exists(&self) -> bool {
        matches!(self, Outcome::Stable(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_instance;

    const I1: &str = "doctors: a b\nhospitals: x y\npref a: x > y\npref b: x\npref x: a = b\npref y: a\n";

    fn edge(inst: &Instance, d: &str, h: &str) -> EdgeId {
        inst.find_edge(inst.doctor_by_name(d).unwrap(), inst.hospital_by_name(h).unwrap())
            .unwrap()
    }

    #[test]
    fn matching_predicate() {
        let inst = parse_instance(I1).unwrap();
        assert!(is_matching(&inst, &[]));
        assert!(!is_matching(&inst, &[edge(&inst, "a", "x"), edge(&inst, "b", "x")]));
        assert!(is_matching(&inst, &[edge(&inst, "a", "x")]));
        assert!(!is_matching(&inst, &[EdgeId(99)]));
    }

    #[test]
    fn closure_disables_unmatched_closed_hospital() {
        let closed = parse_instance("doctors: a\nhospitals: x\nclosed: x\npref a: x\npref x: a").unwrap();
        let r = block_report(&closed, &Matching::empty(&closed), EdgeId(0)).unwrap();
        assert!(r.strong_on_doctor && !r.weak_on_hospital && !r.blocks);

        let open = parse_instance("doctors: a\nhospitals: x\npref a: x\npref x: a").unwrap();
        let r = block_report(&open, &Matching::empty(&open), EdgeId(0)).unwrap();
        assert!(r.strong_on_doctor && r.strong_on_hospital && r.blocks);
    }

    #[test]
    fn weak_on_hospital_strong_on_doctor_blocks() {
        let inst = parse_instance(I1).unwrap();
        let mu = Matching::from_edges(&inst, [edge(&inst, "a", "y"), edge(&inst, "b", "x")]).unwrap();
        let r = block_report(&inst, &mu, edge(&inst, "a", "x")).unwrap();
        assert!(r.strong_on_doctor);
        assert!(r.weak_on_hospital && !r.strong_on_hospital);
        assert!(r.blocks);
        let reports = blocking_edges(&inst, &mu);
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].edge, edge(&inst, "a", "x"));
        assert_eq!(
            block_report(&inst, &mu, edge(&inst, "a", "y")).unwrap_err().code(),
            "E_EDGE_IN_MATCHING"
        );
    }

    #[test]
    fn closed_x_makes_a_y_stable() {
        let inst = parse_instance(I1).unwrap().with_closed(["x"]).unwrap();
        let mu = Matching::from_edges(&inst, [edge(&inst, "a", "y")]).unwrap();
        assert!(is_stable(&inst, &mu));
        assert!(blocking_edges(&inst, &mu).is_empty());
    }

    #[test]
    fn all_closed_empty_matching_is_stable() {
        let inst = parse_instance(I1).unwrap().with_closed(["x", "y"]).unwrap();
        assert!(blocking_edges(&inst, &Matching::empty(&inst)).is_empty());
    }

    #[test]
    fn parse_matching_errors() {
        let inst = parse_instance(I1).unwrap();
        assert_eq!(parse_matching(&inst, "b y\n").unwrap_err().code(), "E_EDGE_NOT_IN_E");
        assert_eq!(parse_matching(&inst, "a x\nb x\n").unwrap_err().code(), "E_NOT_MATCHING");
        assert_eq!(parse_matching(&inst, "q x\n").unwrap_err().code(), "E_UNKNOWN_ID");
        let m = parse_matching(&inst, "status: stable\n# note\nb x\na y\n").unwrap();
        assert_eq!(m.named_pairs(&inst), vec![("a", "y"), ("b", "x")]);
        assert_eq!(m.display(&inst).to_string(), "a y\nb x\n");
    }
}
