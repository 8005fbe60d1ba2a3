//! Two reductions into the closure problem.
//!
//! * (3,B2)-SAT: every clause has three literals and every variable occurs
//!   exactly twice positively and twice negatively. Each variable becomes a
//!   small gadget whose doctor `d_i.2` sits at `t_i` (false) or `f_i`
//!   (true); each clause becomes a gadget in which exactly one of the three
//!   literal doctors `p_t.j` is pushed down to a `q` hospital, which is only
//!   safe if its literal hospital is free, i.e. the literal is true. The
//!   resulting instances have maximum degree 3 and every doctor ranks closed
//!   hospitals strictly above open ones.
//! * Envy-free matching: doctors keep their preferences, every hospital is
//!   indifferent between all its applicants, and every hospital is closed. A
//!   doctor-perfect matching is then stable iff it is envy-free.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::text::{check_pref_lines, joined, parse_sections, write_pref_line};
use crate::model::{Doctor, Instance, InstanceBuilder};
use crate::separated::solve_separated;
use crate::stability::{is_stable, Matching, Outcome};

/// A validated (3,B2) formula. Literals are signed 1-based variable indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct B2Formula {
    n: usize,
    clauses: Vec<[i32; 3]>,
}

impl B2Formula {
    pub fn new(n: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::syntax(0, "formula has no variables"));
        }
        let mut checked = Vec::with_capacity(clauses.len());
        let mut positive = vec![0usize; n + 1];
        let mut negative = vec![0usize; n + 1];
        for (t, clause) in clauses.iter().enumerate() {
            let lits: [i32; 3] = clause
                .as_slice()
                .try_into()
                .map_err(|_| Error::ClauseSize(t + 1))?;
            if lits[0] == lits[1] || lits[0] == lits[2] || lits[1] == lits[2] {
                return Err(Error::ClauseSize(t + 1));
            }
            for lit in lits {
                let var = lit.unsigned_abs() as usize;
                if lit == 0 || var > n {
                    return Err(Error::syntax(0, format!("literal {lit} out of range")));
                }
                if lit > 0 {
                    positive[var] += 1;
                } else {
                    negative[var] += 1;
                }
            }
            checked.push(lits);
        }
        if let Some(var) = (1..=n).find(|&v| positive[v] != 2 || negative[v] != 2) {
            return Err(Error::Occurrence(var));
        }
        Ok(B2Formula { n, clauses: checked })
    }

    pub fn variable_count(&self) -> usize {
        self.n
    }

    pub fn clauses(&self) -> &[[i32; 3]] {
        &self.clauses
    }

    /// `phi[i]` is the value of variable `i + 1`.
    pub fn literal_true(lit: i32, phi: &[bool]) -> bool {
        phi[lit.unsigned_abs() as usize - 1] == (lit > 0)
    }

    pub fn is_satisfied_by(&self, phi: &[bool]) -> bool {
        self.first_unsatisfied(phi).is_none()
    }

    /// 0-based index of the first clause with no true literal.
    pub fn first_unsatisfied(&self, phi: &[bool]) -> Option<usize> {
        self.clauses
            .iter()
            .position(|c| !c.iter().any(|&l| Self::literal_true(l, phi)))
    }

    /// 1-based indices of clauses containing a literal and its negation.
    pub fn complementary_clauses(&self) -> Vec<usize> {
        (0..self.clauses.len())
            .filter(|&t| {
                let c = self.clauses[t];
                c.iter().any(|&l| c.contains(&-l))
            })
            .map(|t| t + 1)
            .collect()
    }
}

impl fmt::Display for B2Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p b2sat {} {}", self.n, self.clauses.len())?;
        for c in &self.clauses {
            writeln!(f, "{} {} {} 0", c[0], c[1], c[2])?;
        }
        Ok(())
    }
}

/// Parses the `p b2sat <n> <m>` format: `c` comment lines, then one clause
/// per line, three literals followed by `0`.
pub fn parse_b2sat(text: &str) -> Result<B2Formula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let lineno = index + 1;
        let line = raw.trim();
        let mut tokens = line.split_whitespace();
        let Some(first) = tokens.clone().next() else {
            continue;
        };
        if first == "c" {
            continue;
        }
        if first == "p" {
            if header.is_some() {
                return Err(Error::syntax(lineno, "repeated header"));
            }
            let fields: Vec<&str> = tokens.collect();
            let parsed = match fields.as_slice() {
                ["p", "b2sat", n, m] => n.parse().ok().zip(m.parse().ok()),
                _ => None,
            };
            header = Some(parsed.ok_or_else(|| Error::syntax(lineno, "expected `p b2sat <n> <m>`"))?);
            continue;
        }
        let Some((n, _)) = header else {
            return Err(Error::syntax(lineno, "clause before header"));
        };
        let mut lits = Vec::new();
        let mut terminated = false;
        for tok in tokens.by_ref() {
            if terminated {
                return Err(Error::syntax(lineno, "text after terminating 0"));
            }
            let lit: i32 = tok
                .parse()
                .map_err(|_| Error::syntax(lineno, format!("invalid literal `{tok}`")))?;
            if lit == 0 {
                terminated = true;
            } else if lit.unsigned_abs() as usize > n {
                return Err(Error::syntax(lineno, format!("literal {lit} out of range")));
            } else {
                lits.push(lit);
            }
        }
        if !terminated {
            return Err(Error::syntax(lineno, "clause must end with 0"));
        }
        if lits.len() != 3 {
            return Err(Error::ClauseSize(clauses.len() + 1));
        }
        clauses.push(lits);
    }
    let (n, m) = header.ok_or_else(|| Error::syntax(0, "missing header"))?;
    if clauses.len() != m {
        return Err(Error::syntax(0, format!("header announces {m} clauses, found {}", clauses.len())));
    }
    B2Formula::new(n, clauses)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableGadget {
    pub d1: String,
    pub d2: String,
    pub h1: String,
    pub t: String,
    pub f: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseGadget {
    pub p: [String; 5],
    pub s: [String; 3],
    pub q: [String; 3],
}

impl ClauseGadget {
    fn new(t: usize) -> Self {
        ClauseGadget {
            p: std::array::from_fn(|j| format!("p_{t}.{}", j + 1)),
            s: std::array::from_fn(|j| format!("s_{t}.{}", j + 1)),
            q: std::array::from_fn(|j| format!("q_{t}.{}", j + 1)),
        }
    }

    /// Hospital below the literal hospital for literal position `j`
    /// (0-based).
    pub fn q_star(&self, j: usize) -> &str {
        if j == 0 {
            &self.q[0]
        } else {
            &self.q[1]
        }
    }
}

/// Vertex names of a reduced formula, per variable and per clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatMapping {
    pub variables: Vec<VariableGadget>,
    pub clauses: Vec<ClauseGadget>,
}

impl fmt::Display for SatMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.variables.iter().enumerate() {
            writeln!(f, "var {} {} {} {} {} {}", i + 1, v.d1, v.d2, v.h1, v.t, v.f)?;
        }
        for (t, c) in self.clauses.iter().enumerate() {
            let names: Vec<String> = c.p.iter().chain(&c.s).chain(&c.q).cloned().collect();
            writeln!(f, "clause {}{}", t + 1, joined(&names))?;
        }
        Ok(())
    }
}

/// Reads the map format written by `Display`.
pub fn parse_sat_mapping(text: &str) -> Result<SatMapping> {
    let mut map = SatMapping { variables: Vec::new(), clauses: Vec::new() };
    for (index, line) in text.lines().enumerate() {
        let lineno = index + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let own = |s: &[&str]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        match fields.as_slice() {
            [] => {}
            ["var", i, rest @ ..] if rest.len() == 5 => {
                if i.parse::<usize>().ok() != Some(map.variables.len() + 1) {
                    return Err(Error::syntax(lineno, "variables out of order"));
                }
                let r = own(rest);
                map.variables.push(VariableGadget {
                    d1: r[0].clone(),
                    d2: r[1].clone(),
                    h1: r[2].clone(),
                    t: r[3].clone(),
                    f: r[4].clone(),
                });
            }
            ["clause", t, rest @ ..] if rest.len() == 11 => {
                if t.parse::<usize>().ok() != Some(map.clauses.len() + 1) {
                    return Err(Error::syntax(lineno, "clauses out of order"));
                }
                let r = own(rest);
                map.clauses.push(ClauseGadget {
                    p: std::array::from_fn(|j| r[j].clone()),
                    s: std::array::from_fn(|j| r[5 + j].clone()),
                    q: std::array::from_fn(|j| r[8 + j].clone()),
                });
            }
            _ => return Err(Error::syntax(lineno, "expected a `var` or `clause` line")),
        }
    }
    Ok(map)
}

fn group(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn reduce_sat(formula: &B2Formula) -> (Instance, SatMapping) {
    let n = formula.variable_count();
    let variables: Vec<VariableGadget> = (1..=n)
        .map(|i| VariableGadget {
            d1: format!("d_{i}.1"),
            d2: format!("d_{i}.2"),
            h1: format!("h_{i}.1"),
            t: format!("t_{i}"),
            f: format!("f_{i}"),
        })
        .collect();
    let clauses: Vec<ClauseGadget> = (1..=formula.clauses().len()).map(ClauseGadget::new).collect();

    let literal_hospital = |lit: i32| {
        let v = &variables[lit.unsigned_abs() as usize - 1];
        if lit > 0 {
            v.t.clone()
        } else {
            v.f.clone()
        }
    };
    let mut occurrences: Vec<(Vec<String>, Vec<String>)> = vec![Default::default(); n];
    for (t, clause) in formula.clauses().iter().enumerate() {
        for (j, &lit) in clause.iter().enumerate() {
            let slot = &mut occurrences[lit.unsigned_abs() as usize - 1];
            let list = if lit > 0 { &mut slot.0 } else { &mut slot.1 };
            list.push(clauses[t].p[j].clone());
        }
    }

    let mut b = InstanceBuilder::new();
    for (v, (pos, neg)) in variables.iter().zip(&occurrences) {
        b.doctor(&v.d1).doctor(&v.d2).hospital(&v.h1).hospital(&v.t).hospital(&v.f);
        b.close(&v.t).close(&v.f);
        b.doctor_pref(&v.d1, vec![group(&[&v.h1])]);
        b.doctor_pref(&v.d2, vec![group(&[&v.t, &v.f]), group(&[&v.h1])]);
        b.hospital_pref(&v.h1, vec![group(&[&v.d1, &v.d2])]);
        b.hospital_pref(&v.t, vec![pos.clone(), group(&[&v.d2])]);
        b.hospital_pref(&v.f, vec![neg.clone(), group(&[&v.d2])]);
    }
    for (c, lits) in clauses.iter().zip(formula.clauses()) {
        for p in &c.p {
            b.doctor(p);
        }
        for h in c.s.iter().chain(&c.q) {
            b.hospital(h);
        }
        for j in 0..3 {
            b.close(&c.s[j]);
            b.doctor_pref(
                &c.p[j],
                vec![group(&[&c.s[j]]), vec![literal_hospital(lits[j])], group(&[c.q_star(j)])],
            );
            b.hospital_pref(&c.s[j], vec![group(&[&c.p[j]])]);
        }
        b.doctor_pref(&c.p[3], vec![group(&[&c.q[0], &c.q[1]])]);
        b.doctor_pref(&c.p[4], vec![group(&[&c.q[0], &c.q[2]])]);
        b.hospital_pref(&c.q[0], vec![group(&[&c.p[0], &c.p[3], &c.p[4]])]);
        b.hospital_pref(&c.q[1], vec![group(&[&c.p[1], &c.p[2], &c.p[3]])]);
        b.hospital_pref(&c.q[2], vec![group(&[&c.p[4]])]);
    }
    let inst = b.build().expect("gadget names are unique and symmetric");
    (inst, SatMapping { variables, clauses })
}

/// The clause gadget on its own, without literal hospitals: 5 doctors, 6
/// hospitals, 10 edges.
pub fn isolated_clause_gadget() -> (Instance, ClauseGadget) {
    let c = ClauseGadget::new(1);
    let mut b = InstanceBuilder::new();
    for p in &c.p {
        b.doctor(p);
    }
    for h in c.s.iter().chain(&c.q) {
        b.hospital(h);
    }
    for j in 0..3 {
        b.close(&c.s[j]);
        b.doctor_pref(&c.p[j], vec![group(&[&c.s[j]]), group(&[c.q_star(j)])]);
        b.hospital_pref(&c.s[j], vec![group(&[&c.p[j]])]);
    }
    b.doctor_pref(&c.p[3], vec![group(&[&c.q[0], &c.q[1]])]);
    b.doctor_pref(&c.p[4], vec![group(&[&c.q[0], &c.q[2]])]);
    b.hospital_pref(&c.q[0], vec![group(&[&c.p[0], &c.p[3], &c.p[4]])]);
    b.hospital_pref(&c.q[1], vec![group(&[&c.p[1], &c.p[2], &c.p[3]])]);
    b.hospital_pref(&c.q[2], vec![group(&[&c.p[4]])]);
    (b.build().expect("gadget is well formed"), c)
}

/// Maximum degree at most 3 and every doctor ranks each closed hospital
/// strictly above each open one.
pub fn meets_hardness_restrictions(inst: &Instance) -> bool {
    inst.max_degree() <= 3
        && inst.doctors().all(|d| {
            let edges = inst.doctor_edges(d);
            let worst_closed = edges
                .iter()
                .filter(|&&e| inst.is_closed(inst.edge(e).hospital))
                .map(|&e| inst.doctor_rank(e))
                .max();
            let best_open = edges
                .iter()
                .filter(|&&e| !inst.is_closed(inst.edge(e).hospital))
                .map(|&e| inst.doctor_rank(e))
                .min();
            !matches!((worst_closed, best_open), (Some(c), Some(o)) if c >= o)
        })
}

fn pair(inst: &Instance, d: &str, h: &str) -> Result<crate::model::EdgeId> {
    let doctor = inst.doctor_by_name(d).ok_or_else(|| Error::UnknownId(d.to_string()))?;
    let hospital = inst.hospital_by_name(h).ok_or_else(|| Error::UnknownId(h.to_string()))?;
    inst.find_edge(doctor, hospital)
        .ok_or_else(|| Error::EdgeNotInE(d.to_string(), h.to_string()))
}

/// The canonical matching for an assignment and a choice `pattern[t] ∈
/// {0,1,2}` of pushed literal position per clause. No satisfaction check.
pub fn candidate_matching(
    inst: &Instance,
    map: &SatMapping,
    phi: &[bool],
    pattern: &[usize],
) -> Result<Matching> {
    let mut edges = Vec::new();
    for (v, &value) in map.variables.iter().zip(phi) {
        edges.push(pair(inst, &v.d1, &v.h1)?);
        edges.push(pair(inst, &v.d2, if value { &v.f } else { &v.t })?);
    }
    for (c, &pushed) in map.clauses.iter().zip(pattern) {
        for j in 0..3 {
            let target = if j == pushed { c.q_star(j) } else { &c.s[j] };
            edges.push(pair(inst, &c.p[j], target)?);
        }
        edges.push(pair(inst, &c.p[3], if pushed == 0 { &c.q[1] } else { &c.q[0] })?);
        edges.push(pair(inst, &c.p[4], &c.q[2])?);
    }
    Matching::from_edges(inst, edges)
}

/// Stable matching of the reduced instance built from a satisfying
/// assignment; each clause pushes its first true literal.
pub fn assignment_to_matching(
    formula: &B2Formula,
    inst: &Instance,
    map: &SatMapping,
    phi: &[bool],
) -> Result<Matching> {
    if let Some(t) = formula.first_unsatisfied(phi) {
        return Err(Error::UnsatAssignment(t + 1));
    }
    let pattern: Vec<usize> = formula
        .clauses()
        .iter()
        .map(|c| c.iter().position(|&l| B2Formula::literal_true(l, phi)).expect("satisfied"))
        .collect();
    let m = candidate_matching(inst, map, phi, &pattern)?;
    if !is_stable(inst, &m) {
        return Err(Error::Invariant("matching built from a satisfying assignment is not stable".into()));
    }
    Ok(m)
}

/// `φ(α_i)` is false iff `(d_i.2, t_i)` is matched.
pub fn matching_to_assignment(inst: &Instance, map: &SatMapping, m: &Matching) -> Result<Vec<bool>> {
    map.variables
        .iter()
        .map(|v| {
            let at_t = m.contains(pair(inst, &v.d2, &v.t)?);
            let at_f = m.contains(pair(inst, &v.d2, &v.f)?);
            match (at_t, at_f) {
                (true, false) => Ok(false),
                (false, true) => Ok(true),
                _ => Err(Error::NotCanonical(format!("`{}` is at neither `{}` nor `{}`", v.d2, v.t, v.f))),
            }
        })
        .collect()
}

/// Doctors with preferences over hospitals; hospitals have none.
///
/// Stored as its reduced instance: every hospital closed and indifferent
/// between the doctors that list it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvyInstance {
    inst: Instance,
}

impl EnvyInstance {
    pub fn new(
        doctors: &[String],
        hospitals: &[String],
        prefs: &[(String, Vec<Vec<String>>)],
    ) -> Result<Self> {
        let mut b = InstanceBuilder::new();
        for d in doctors {
            b.doctor(d.clone());
        }
        for h in hospitals {
            b.hospital(h.clone()).close(h.clone());
        }
        let mut applicants: Vec<Vec<String>> = vec![Vec::new(); hospitals.len()];
        for (owner, groups) in prefs {
            let mut seen = HashSet::new();
            for h in groups.iter().flatten() {
                if !seen.insert(h) {
                    return Err(Error::DuplicatePrefEntry { owner: owner.clone(), partner: h.clone() });
                }
                if let Some(i) = hospitals.iter().position(|x| x == h) {
                    applicants[i].push(owner.clone());
                }
            }
            b.doctor_pref(owner.clone(), groups.clone());
        }
        for (h, list) in hospitals.iter().zip(applicants) {
            if !list.is_empty() {
                b.hospital_pref(h.clone(), vec![list]);
            }
        }
        Ok(EnvyInstance { inst: b.build()? })
    }

    pub fn instance(&self) -> &Instance {
        &self.inst
    }
}

impl fmt::Display for EnvyInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inst = &self.inst;
        let names = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>();
        let doctors = names(&mut inst.doctors().map(|d| inst.doctor_name(d).to_string()));
        let hospitals = names(&mut inst.hospitals().map(|h| inst.hospital_name(h).to_string()));
        writeln!(f, "doctors:{}", joined(&doctors))?;
        writeln!(f, "hospitals:{}", joined(&hospitals))?;
        for d in inst.doctors() {
            write_pref_line(f, inst.doctor_name(d), inst.doctor_pref(d).groups(), &hospitals)?;
        }
        Ok(())
    }
}

/// Instance format without a `closed:` line and without hospital pref
/// lines.
pub fn parse_envy(text: &str) -> Result<EnvyInstance> {
    let raw = parse_sections(text)?;
    if raw.closed.is_some() {
        return Err(Error::syntax(0, "envy instances have no `closed:` line"));
    }
    let doctors = raw.doctors.clone().ok_or_else(|| Error::syntax(0, "missing `doctors:` line"))?;
    let hospitals =
        raw.hospitals.clone().ok_or_else(|| Error::syntax(0, "missing `hospitals:` line"))?;
    if let Some((line, owner, _)) = raw.prefs.iter().find(|p| hospitals.contains(&p.1)) {
        return Err(Error::syntax(*line, format!("hospital `{owner}` cannot have a pref line")));
    }
    EnvyInstance::new(&doctors, &hospitals, &[])?;
    check_pref_lines(&raw, doctors.iter())?;
    let prefs: Vec<(String, Vec<Vec<String>>)> =
        raw.prefs.into_iter().map(|(_, owner, groups)| (owner, groups)).collect();
    EnvyInstance::new(&doctors, &hospitals, &prefs)
}

pub fn reduce_envyfree(envy: &EnvyInstance) -> Instance {
    envy.inst.clone()
}

/// Pairs `(d, d')` such that `d` strictly prefers the hospital of `d'` to
/// its own (an unmatched doctor prefers every acceptable hospital).
pub fn envy_pairs(envy: &EnvyInstance, m: &Matching) -> Vec<(Doctor, Doctor)> {
    let inst = &envy.inst;
    let mut pairs = Vec::new();
    for d in inst.doctors() {
        let own = inst.doctor_rank_or_unmatched(m.of_doctor(d));
        for &e in inst.doctor_edges(d) {
            if inst.doctor_rank(e) >= own {
                continue;
            }
            if let Some(other) = m.of_hospital(inst.edge(e).hospital) {
                pairs.push((d, inst.edge(other).doctor));
            }
        }
    }
    pairs.sort();
    pairs
}

/// A doctor-perfect envy-free matching, or `NoStable` when none exists.
pub fn solve_envyfree(envy: &EnvyInstance) -> Outcome {
    let inst = reduce_envyfree(envy);
    let outcome = solve_separated(&inst).expect("reduced envy instances are separated and solvable");
    match outcome {
        Outcome::Stable(m) if m.len() == inst.doctor_count() => Outcome::Stable(m),
        Outcome::Stable(_) => Outcome::NoStable,
        Outcome::NoStable => unreachable!("no open hospital can be critical"),
    }
}
