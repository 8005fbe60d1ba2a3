//! Solver for instances in which every doctor has at most two acceptable
//! hospitals.
//!
//! After pre-processing, the choice graph `G* = (D, H; L)` splits into
//! components. Components with at least one edge have no more doctors than
//! hospitals; they are either balanced (`|D_X| = |H_X|`, at most one doctor
//! with a single choice edge) or carry one surplus hospital, in which case
//! the choice graph on `H_X` is a tree. Together with lone open hospitals
//! whose edges were all forbidden, these components form the nodes of a
//! digraph whose arcs describe how a pendant doctor can be pushed to its
//! second hospital. A stable matching exists iff every source (an all-open
//! surplus component or a stranded hospital) reaches a pendant component
//! anchored at a closed hospital; the witnessing paths determine the
//! matching.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::{Doctor, EdgeId, EdgeSet, Hospital, Instance, Relation, Vertex};
use crate::preprocess::{critical_hospitals, preprocess_with, PreprocessOptions, PreprocessResult};
use crate::stability::{is_stable, Matching, Outcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComponentKind {
    /// `|D_X| = |H_X|`, every doctor has two choice edges.
    Balanced,
    /// `|D_X| = |H_X|` with exactly one doctor (`leaf`) having a single
    /// choice edge, to `anchor`. `fallback` is the leaf's other acceptable
    /// hospital, when it has one.
    Pendant { leaf: Doctor, anchor: Hospital, fallback: Option<Hospital> },
    /// `|H_X| = |D_X| + 1`; every doctor has two choice edges.
    Surplus,
    /// A single open hospital without choice edges but with forbidden ones.
    Stranded,
}

#[derive(Debug, Clone)]
pub struct Component {
    pub doctors: Vec<Doctor>,
    pub hospitals: Vec<Hospital>,
    pub kind: ComponentKind,
}

impl Component {
    pub fn is_node(&self) -> bool {
        !matches!(self.kind, ComponentKind::Balanced)
    }
}

#[derive(Debug, Clone)]
pub struct ComponentAnalysis {
    pub components: Vec<Component>,
    /// Component index of each hospital, for hospitals in some component.
    pub hospital_component: Vec<Option<usize>>,
}

fn check_degree(inst: &Instance) -> Result<()> {
    match inst.doctors().find(|&d| inst.doctor_edges(d).len() > 2) {
        Some(d) => Err(Error::Degree(inst.doctor_name(d).to_string())),
        None => Ok(()),
    }
}

fn invariant(msg: impl Into<String>) -> Error {
    Error::Invariant(msg.into())
}

/// Components of the choice graph, classified.
pub fn analyze_components(inst: &Instance, res: &PreprocessResult) -> Result<ComponentAnalysis> {
    check_degree(inst)?;
    let choice = &res.choice;
    let choice_degree = |d: Doctor| inst.incident_in(Vertex::Doctor(d), choice).count();

    let mut doctor_seen = vec![false; inst.doctor_count()];
    let mut hospital_seen = vec![false; inst.hospital_count()];
    let mut components = Vec::new();
    let mut hospital_component = vec![None; inst.hospital_count()];

    let starts = inst
        .doctors()
        .map(Vertex::Doctor)
        .chain(inst.hospitals().map(Vertex::Hospital));
    for start in starts {
        let seen = match start {
            Vertex::Doctor(d) => doctor_seen[d.0],
            Vertex::Hospital(h) => hospital_seen[h.0],
        };
        if seen || inst.incident_in(start, choice).next().is_none() {
            continue;
        }
        let mut doctors = Vec::new();
        let mut hospitals = Vec::new();
        let mut queue = VecDeque::from([start]);
        match start {
            Vertex::Doctor(d) => doctor_seen[d.0] = true,
            Vertex::Hospital(h) => hospital_seen[h.0] = true,
        }
        while let Some(v) = queue.pop_front() {
            match v {
                Vertex::Doctor(d) => doctors.push(d),
                Vertex::Hospital(h) => hospitals.push(h),
            }
            for e in inst.incident_in(v, choice) {
                let edge = inst.edge(e);
                match v {
                    Vertex::Doctor(_) if !hospital_seen[edge.hospital.0] => {
                        hospital_seen[edge.hospital.0] = true;
                        queue.push_back(Vertex::Hospital(edge.hospital));
                    }
                    Vertex::Hospital(_) if !doctor_seen[edge.doctor.0] => {
                        doctor_seen[edge.doctor.0] = true;
                        queue.push_back(Vertex::Doctor(edge.doctor));
                    }
                    _ => {}
                }
            }
        }
        doctors.sort();
        hospitals.sort();

        let leaves: Vec<Doctor> = doctors.iter().copied().filter(|&d| choice_degree(d) == 1).collect();
        let kind = match doctors.len().cmp(&hospitals.len()) {
            std::cmp::Ordering::Greater => {
                return Err(invariant("choice component has more doctors than hospitals"))
            }
            std::cmp::Ordering::Equal => match leaves.as_slice() {
                [] => ComponentKind::Balanced,
                &[leaf] => {
                    let e = inst
                        .incident_in(Vertex::Doctor(leaf), choice)
                        .next()
                        .expect("leaf has one choice edge");
                    let anchor = inst.edge(e).hospital;
                    if res.matching.of_doctor(leaf) != Some(e) {
                        return Err(invariant("pendant doctor is not matched to its anchor"));
                    }
                    let fallback = inst
                        .doctor_edges(leaf)
                        .iter()
                        .map(|&f| inst.edge(f).hospital)
                        .find(|&h| h != anchor);
                    ComponentKind::Pendant { leaf, anchor, fallback }
                }
                _ => return Err(invariant("balanced component with two single-choice doctors")),
            },
            std::cmp::Ordering::Less => {
                if !leaves.is_empty() {
                    return Err(invariant("surplus component has a single-choice doctor"));
                }
                if hospitals.len() != doctors.len() + 1 {
                    return Err(invariant("surplus component with more than one spare hospital"));
                }
                ComponentKind::Surplus
            }
        };
        let index = components.len();
        for &h in &hospitals {
            hospital_component[h.0] = Some(index);
        }
        components.push(Component { doctors, hospitals, kind });
    }

    for h in inst.hospitals() {
        if hospital_component[h.0].is_some() || inst.is_closed(h) {
            continue;
        }
        if inst.hospital_edges(h).iter().any(|&e| res.forbidden.contains(e)) {
            hospital_component[h.0] = Some(components.len());
            components.push(Component {
                doctors: Vec::new(),
                hospitals: vec![h],
                kind: ComponentKind::Stranded,
            });
        }
    }
    Ok(ComponentAnalysis { components, hospital_component })
}

/// For a surplus component, the matching that covers every doctor of the
/// component with choice edges and leaves `root` free: root the tree at
/// `root` and match each doctor to its child hospital.
pub fn tree_matching_xi(
    inst: &Instance,
    choice: &EdgeSet,
    component: &Component,
    root: Hospital,
) -> Result<Matching> {
    if component.kind != ComponentKind::Surplus || !component.hospitals.contains(&root) {
        return Err(invariant("tree matching needs a surplus component containing the root"));
    }
    let mut doctor_done = vec![false; inst.doctor_count()];
    let mut hospital_done = vec![false; inst.hospital_count()];
    hospital_done[root.0] = true;
    let mut queue = VecDeque::from([root]);
    let mut m = Matching::empty(inst);
    while let Some(h) = queue.pop_front() {
        for e in inst.incident_in(Vertex::Hospital(h), choice) {
            let d = inst.edge(e).doctor;
            if std::mem::replace(&mut doctor_done[d.0], true) {
                continue;
            }
            let child = inst
                .incident_in(Vertex::Doctor(d), choice)
                .find(|&f| f != e)
                .ok_or_else(|| invariant("surplus doctor with a single choice edge"))?;
            let w = inst.edge(child).hospital;
            if std::mem::replace(&mut hospital_done[w.0], true) {
                return Err(invariant("choice graph of a surplus component has a cycle"));
            }
            m.insert(inst, child)?;
            queue.push_back(w);
        }
    }
    if m.len() != component.doctors.len() {
        return Err(invariant("tree matching misses a doctor"));
    }
    Ok(m)
}

/// Digraph on the non-balanced components.
#[derive(Debug, Clone, Default)]
pub struct ClosureDigraph {
    /// Component indices that are nodes.
    pub nodes: Vec<usize>,
    /// `(tail, head)` component indices, sorted.
    pub arcs: Vec<(usize, usize)>,
    /// All-open surplus components and stranded hospitals.
    pub sources: Vec<usize>,
    /// Pendant components anchored at a closed hospital.
    pub sinks: Vec<usize>,
}

impl ClosureDigraph {
    pub fn out_neighbors(&self, tail: usize) -> impl Iterator<Item = usize> + '_ {
        self.arcs.iter().filter(move |a| a.0 == tail).map(|a| a.1)
    }

    pub fn in_degree(&self, head: usize) -> usize {
        self.arcs.iter().filter(|a| a.1 == head).count()
    }

    /// Shortest path (as component indices) from `source` to any sink;
    /// neighbours are explored in index order.
    pub fn path_to_sink(&self, source: usize) -> Option<Vec<usize>> {
        let mut parent = std::collections::HashMap::new();
        let mut queue = VecDeque::from([source]);
        parent.insert(source, usize::MAX);
        while let Some(x) = queue.pop_front() {
            if self.sinks.contains(&x) {
                let mut path = vec![x];
                let mut cur = x;
                while parent[&cur] != usize::MAX {
                    cur = parent[&cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for y in self.out_neighbors(x) {
                if let std::collections::hash_map::Entry::Vacant(slot) = parent.entry(y) {
                    slot.insert(x);
                    queue.push_back(y);
                }
            }
        }
        None
    }
}

pub fn build_digraph(
    inst: &Instance,
    res: &PreprocessResult,
    analysis: &ComponentAnalysis,
) -> Result<ClosureDigraph> {
    let comps = &analysis.components;
    let edge = |d: Doctor, h: Hospital| inst.find_edge(d, h).expect("edge of the instance");
    let mut arcs = Vec::new();
    for (y, comp) in comps.iter().enumerate() {
        let ComponentKind::Pendant { leaf, anchor, fallback: Some(fallback) } = comp.kind else {
            continue;
        };
        let push = edge(leaf, fallback);
        if inst.doctor_rank(edge(leaf, anchor)) >= inst.doctor_rank(push) {
            continue;
        }
        let Some(x) = analysis.hospital_component[fallback.0] else {
            continue;
        };
        if x == y {
            continue;
        }
        let allowed = match &comps[x].kind {
            ComponentKind::Balanced => false,
            ComponentKind::Pendant { leaf: other, anchor: other_anchor, .. } => {
                *other_anchor == fallback
                    && inst.hospital_rank(push) < inst.hospital_rank(edge(*other, fallback))
            }
            ComponentKind::Surplus => {
                let representative = inst
                    .incident_in(Vertex::Hospital(fallback), &res.choice)
                    .next()
                    .expect("surplus hospitals have choice edges");
                inst.hospital_rank(push) <= inst.hospital_rank(representative)
            }
            ComponentKind::Stranded => inst
                .hospital_edges(fallback)
                .iter()
                .filter(|&&e| res.forbidden.contains(e))
                .all(|&e| {
                    let d = inst.edge(e).doctor;
                    let at_doctor = Relation::from_ranks(
                        inst.doctor_rank(e),
                        inst.doctor_rank_or_unmatched(res.matching.of_doctor(d)),
                    );
                    match at_doctor {
                        Relation::Tied => inst.hospital_rank(push) <= inst.hospital_rank(e),
                        Relation::Better => inst.hospital_rank(push) < inst.hospital_rank(e),
                        Relation::Worse => true,
                    }
                }),
        };
        if allowed {
            arcs.push((x, y));
        }
    }
    arcs.sort();

    let nodes: Vec<usize> = (0..comps.len()).filter(|&i| comps[i].is_node()).collect();
    let sources: Vec<usize> = nodes
        .iter()
        .copied()
        .filter(|&i| match comps[i].kind {
            ComponentKind::Surplus => comps[i].hospitals.iter().all(|&h| !inst.is_closed(h)),
            ComponentKind::Stranded => true,
            _ => false,
        })
        .collect();
    let sinks: Vec<usize> = nodes
        .iter()
        .copied()
        .filter(|&i| matches!(comps[i].kind, ComponentKind::Pendant { anchor, .. } if inst.is_closed(anchor)))
        .collect();
    let graph = ClosureDigraph { nodes, arcs, sources, sinks };
    if graph.nodes.iter().any(|&i| graph.in_degree(i) > 1) {
        return Err(Error::Indegree);
    }
    if graph.sources.iter().any(|&i| graph.in_degree(i) > 0) {
        return Err(invariant("a source component has an entering arc"));
    }
    Ok(graph)
}

/// Everything the solver derived on the way to its answer.
#[derive(Debug, Clone)]
pub struct Degree2Analysis {
    pub preprocess: PreprocessResult,
    pub critical: Vec<Hospital>,
    /// Present only when some hospital is critical.
    pub components: Option<ComponentAnalysis>,
    pub digraph: Option<ClosureDigraph>,
}

pub fn analyze(inst: &Instance) -> Result<Degree2Analysis> {
    analyze_with(inst, &PreprocessOptions::default())
}

pub fn analyze_with(inst: &Instance, opts: &PreprocessOptions) -> Result<Degree2Analysis> {
    check_degree(inst)?;
    let res = preprocess_with(inst, opts);
    let critical = critical_hospitals(inst, &res);
    let (components, digraph) = if critical.is_empty() {
        (None, None)
    } else {
        let components = analyze_components(inst, &res)?;
        let digraph = build_digraph(inst, &res, &components)?;
        (Some(components), Some(digraph))
    };
    Ok(Degree2Analysis { preprocess: res, critical, components, digraph })
}

pub fn solve_degree2(inst: &Instance) -> Result<Outcome> {
    let analysis = analyze(inst)?;
    solve_from_analysis(inst, &analysis)
}

pub fn solve_from_analysis(inst: &Instance, analysis: &Degree2Analysis) -> Result<Outcome> {
    let res = &analysis.preprocess;
    let (Some(comps), Some(graph)) = (&analysis.components, &analysis.digraph) else {
        if !is_stable(inst, &res.matching) {
            return Err(invariant("pre-processing matching is not stable"));
        }
        return Ok(Outcome::Stable(res.matching.clone()));
    };

    let mut paths = Vec::with_capacity(graph.sources.len());
    for &source in &graph.sources {
        match graph.path_to_sink(source) {
            Some(path) => paths.push(path),
            None => return Ok(Outcome::NoStable),
        }
    }
    let mut on_path = vec![false; comps.components.len()];
    for &x in paths.iter().flatten() {
        if std::mem::replace(&mut on_path[x], true) {
            return Err(invariant("witness paths share a node"));
        }
    }

    let pendant = |i: usize| match comps.components[i].kind {
        ComponentKind::Pendant { leaf, anchor, fallback: Some(fallback) } => (leaf, anchor, fallback),
        _ => unreachable!("path interior nodes are pendant components with a fallback"),
    };

    let mut sigma: Vec<EdgeId> = res.matching.edges().to_vec();
    let retree = |component: &Component, root: Hospital, sigma: &mut Vec<EdgeId>| -> Result<()> {
        sigma.retain(|&e| !component.doctors.contains(&inst.edge(e).doctor));
        let xi = tree_matching_xi(inst, &res.choice, component, root)?;
        sigma.extend_from_slice(xi.edges());
        Ok(())
    };
    for path in &paths {
        let component = &comps.components[path[0]];
        if component.kind == ComponentKind::Surplus {
            let (_, _, root) = pendant(path[1]);
            retree(component, root, &mut sigma)?;
        }
    }
    for (i, component) in comps.components.iter().enumerate() {
        if component.kind != ComponentKind::Surplus || graph.sources.contains(&i) {
            continue;
        }
        let free = component
            .hospitals
            .iter()
            .copied()
            .find(|&h| inst.is_closed(h))
            .ok_or_else(|| invariant("non-source surplus component without a closed hospital"))?;
        retree(component, free, &mut sigma)?;
    }
    let mut removed = Vec::new();
    let mut added = Vec::new();
    for path in &paths {
        for &x in &path[1..] {
            let (leaf, anchor, fallback) = pendant(x);
            removed.push(inst.find_edge(leaf, anchor).expect("anchor edge"));
            added.push(inst.find_edge(leaf, fallback).expect("fallback edge"));
        }
    }
    sigma.retain(|e| !removed.contains(e));
    sigma.extend(added);
    let sigma = Matching::from_edges(inst, sigma)
        .map_err(|e| invariant(format!("constructed edge set is not a matching: {e}")))?;
    if !is_stable(inst, &sigma) {
        return Err(invariant("constructed matching is not stable"));
    }
    Ok(Outcome::Stable(sigma))
}
