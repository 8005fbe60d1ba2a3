//! Seeded random instances and formulas.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`, whose output stream is fixed across platforms. Sampling
//! order is part of the contract: closures first, then doctor adjacency in
//! hospital order, then doctor lists, then hospital lists.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Instance, InstanceBuilder};
use crate::reductions::B2Formula;

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub seed: u64,
    pub n_doctors: usize,
    pub n_hospitals: usize,
    /// Cap on each doctor's list length; `None` for no cap.
    pub max_degree: Option<usize>,
    pub edge_prob: f64,
    /// Probability of merging two adjacent rank groups into a tie.
    pub tie_prob: f64,
    pub closure_prob: f64,
    /// Every doctor ranks open hospitals strictly above closed ones.
    pub enforce_star: bool,
    /// Every doctor has at most two acceptable hospitals.
    pub enforce_degree2: bool,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 0,
            n_doctors: 5,
            n_hospitals: 5,
            max_degree: None,
            edge_prob: 0.5,
            tie_prob: 0.3,
            closure_prob: 0.3,
            enforce_star: false,
            enforce_degree2: false,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("edge_prob", self.edge_prob),
            ("tie_prob", self.tie_prob),
            ("closure_prob", self.closure_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Params(format!("{name} = {p} is outside [0, 1]")));
            }
        }
        if self.enforce_degree2 && self.max_degree.is_some_and(|k| k > 2) {
            return Err(Error::Params("degree-2 mode needs max_degree <= 2".into()));
        }
        Ok(())
    }

    fn degree_cap(&self) -> usize {
        let cap = self.max_degree.unwrap_or(usize::MAX);
        if self.enforce_degree2 {
            cap.min(2)
        } else {
            cap
        }
    }
}

fn names(prefix: char, count: usize) -> Vec<String> {
    let width = count.to_string().len();
    (1..=count).map(|i| format!("{prefix}{i:0width$}")).collect()
}

/// Splits a ranked list into tie groups, merging each adjacent pair with
/// probability `tie_prob` unless `barrier(i)` forbids a tie between
/// positions `i` and `i + 1`.
fn tie_groups(
    rng: &mut ChaCha8Rng,
    ranked: Vec<String>,
    tie_prob: f64,
    barrier: impl Fn(usize) -> bool,
) -> Vec<Vec<String>> {
    let mut groups: Vec<Vec<String>> = Vec::new();
    for (i, item) in ranked.into_iter().enumerate() {
        let merge = i > 0 && rng.gen_bool(tie_prob) && !barrier(i - 1);
        match groups.last_mut() {
            Some(last) if merge => last.push(item),
            _ => groups.push(vec![item]),
        }
    }
    groups
}

pub fn gen_instance(p: &GenParams) -> Result<Instance> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let doctors = names('d', p.n_doctors);
    let hospitals = names('h', p.n_hospitals);
    let closed: Vec<bool> = hospitals.iter().map(|_| rng.gen_bool(p.closure_prob)).collect();

    let cap = p.degree_cap();
    let mut lists: Vec<Vec<usize>> = Vec::with_capacity(doctors.len());
    for _ in &doctors {
        let mut list: Vec<usize> = (0..hospitals.len()).filter(|_| rng.gen_bool(p.edge_prob)).collect();
        if list.len() > cap {
            list.shuffle(&mut rng);
            list.truncate(cap);
            list.sort_unstable();
        }
        lists.push(list);
    }

    let mut b = InstanceBuilder::new();
    for d in &doctors {
        b.doctor(d.clone());
    }
    for (h, &c) in hospitals.iter().zip(&closed) {
        b.hospital(h.clone());
        if c {
            b.close(h.clone());
        }
    }
    let mut applicants: Vec<Vec<usize>> = vec![Vec::new(); hospitals.len()];
    for (d, list) in lists.iter_mut().enumerate() {
        list.shuffle(&mut rng);
        if p.enforce_star {
            list.sort_by_key(|&h| closed[h]);
        }
        for &h in list.iter() {
            applicants[h].push(d);
        }
        let order = list.clone();
        let barrier = |i: usize| p.enforce_star && closed[order[i]] != closed[order[i + 1]];
        let ranked = order.iter().map(|&h| hospitals[h].clone()).collect();
        let groups = tie_groups(&mut rng, ranked, p.tie_prob, barrier);
        b.doctor_pref(doctors[d].clone(), groups);
    }
    for (h, mut list) in applicants.into_iter().enumerate() {
        list.shuffle(&mut rng);
        let ranked = list.iter().map(|&d| doctors[d].clone()).collect();
        let groups = tie_groups(&mut rng, ranked, p.tie_prob, |_| false);
        b.hospital_pref(hospitals[h].clone(), groups);
    }
    b.build()
}

/// Random (3,B2) formula with `n` variables and `4n/3` clauses: the `4n`
/// literal occurrences are shuffled into clause slots, reshuffling until no
/// clause repeats a literal.
pub fn gen_b2sat(n: usize, seed: u64) -> Result<B2Formula> {
    if n == 0 || n % 3 != 0 {
        return Err(Error::BadVariableCount(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tokens: Vec<i32> = (1..=n as i32).flat_map(|v| [v, v, -v, -v]).collect();
    loop {
        tokens.shuffle(&mut rng);
        let clauses: Vec<Vec<i32>> = tokens.chunks(3).map(<[i32]>::to_vec).collect();
        let repeats = clauses.iter().any(|c| c[0] == c[1] || c[0] == c[2] || c[1] == c[2]);
        if !repeats {
            return B2Formula::new(n, clauses);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::separated::satisfies_star;

    #[test]
    fn deterministic() {
        let p = GenParams { seed: 9, n_doctors: 12, n_hospitals: 7, ..GenParams::default() };
        assert_eq!(gen_instance(&p).unwrap().to_string(), gen_instance(&p).unwrap().to_string());
        let names = gen_instance(&p).unwrap();
        assert_eq!(names.doctor_name(crate::model::Doctor(0)), "d01");
    }

    #[test]
    fn star_and_degree_flags() {
        for seed in 0..200 {
            let p = GenParams {
                seed,
                enforce_star: true,
                enforce_degree2: true,
                tie_prob: 0.8,
                edge_prob: 0.7,
                ..GenParams::default()
            };
            let inst = gen_instance(&p).unwrap();
            assert!(satisfies_star(&inst));
            assert!(inst.max_doctor_degree() <= 2);
        }
    }

    #[test]
    fn parameter_checks() {
        let bad = GenParams { edge_prob: 1.5, ..GenParams::default() };
        assert_eq!(gen_instance(&bad).unwrap_err().code(), "E_PARAMS");
        let bad = GenParams { enforce_degree2: true, max_degree: Some(3), ..GenParams::default() };
        assert_eq!(gen_instance(&bad).unwrap_err().code(), "E_PARAMS");
    }

    #[test]
    fn formulas() {
        let f = gen_b2sat(3, 1).unwrap();
        assert_eq!(f.clauses().len(), 4);
        assert_eq!(f, gen_b2sat(3, 1).unwrap());
        assert_eq!(gen_b2sat(4, 1).unwrap_err().code(), "E_BAD_N");
        assert_eq!(gen_b2sat(0, 1).unwrap_err().code(), "E_BAD_N");
        assert_eq!(gen_b2sat(12, 5).unwrap().clauses().len(), 16);
    }
}
