//! Line-based text format for instances.
//!
//! ```text
//! # comment
//! doctors: a b
//! hospitals: x y
//! closed: x
//! pref a: x > y
//! pref b: x
//! pref x: a = b
//! pref y: a
//! ```

use std::collections::HashSet;
use std::fmt;

use super::{Instance, InstanceBuilder};
use crate::error::{Error, Result};

pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'-'))
}

/// Syntactic content of an instance-like file, before name resolution.
#[derive(Debug, Default)]
pub(crate) struct RawSections {
    pub doctors: Option<Vec<String>>,
    pub hospitals: Option<Vec<String>>,
    pub closed: Option<Vec<String>>,
    /// (line number, owner, tie groups)
    pub prefs: Vec<(usize, String, Vec<Vec<String>>)>,
}

pub(crate) fn parse_sections(text: &str) -> Result<RawSections> {
    let mut raw = RawSections::default();
    for (index, full_line) in text.lines().enumerate() {
        let lineno = index + 1;
        let line = full_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (head, rest) = line
            .split_once(':')
            .ok_or_else(|| Error::syntax(lineno, "expected `<key>: ...`"))?;
        let head = head.trim();
        let slot = match head {
            "doctors" => Some(&mut raw.doctors),
            "hospitals" => Some(&mut raw.hospitals),
            "closed" => Some(&mut raw.closed),
            _ => None,
        };
        if let Some(slot) = slot {
            if slot.is_some() {
                return Err(Error::syntax(lineno, format!("repeated `{head}:` line")));
            }
            *slot = Some(parse_ids(rest, lineno)?);
            continue;
        }
        let owner = head
            .strip_prefix("pref")
            .filter(|s| s.starts_with(char::is_whitespace))
            .map(str::trim)
            .ok_or_else(|| Error::syntax(lineno, format!("unknown key `{head}`")))?;
        if !is_valid_id(owner) {
            return Err(Error::syntax(lineno, format!("invalid id `{owner}`")));
        }
        raw.prefs.push((lineno, owner.to_string(), parse_groups(rest, lineno)?));
    }
    Ok(raw)
}

fn parse_ids(list: &str, lineno: usize) -> Result<Vec<String>> {
    list.split_whitespace()
        .map(|id| {
            if is_valid_id(id) {
                Ok(id.to_string())
            } else {
                Err(Error::syntax(lineno, format!("invalid id `{id}`")))
            }
        })
        .collect()
}

fn parse_groups(list: &str, lineno: usize) -> Result<Vec<Vec<String>>> {
    if list.trim().is_empty() {
        return Ok(Vec::new());
    }
    list.split('>')
        .map(|group| {
            group
                .split('=')
                .map(|tok| {
                    let tok = tok.trim();
                    if is_valid_id(tok) {
                        Ok(tok.to_string())
                    } else if tok.is_empty() {
                        Err(Error::syntax(lineno, "empty preference entry"))
                    } else {
                        Err(Error::syntax(lineno, format!("invalid id `{tok}`")))
                    }
                })
                .collect()
        })
        .collect()
}

/// Checks that every listed vertex has exactly one pref line and that no
/// pref line names an unlisted vertex.
pub(crate) fn check_pref_lines<'a>(
    raw: &RawSections,
    owners: impl IntoIterator<Item = &'a String>,
) -> Result<()> {
    let owners: Vec<&String> = owners.into_iter().collect();
    let known: HashSet<&str> = owners.iter().map(|s| s.as_str()).collect();
    let mut seen = HashSet::new();
    for (lineno, owner, _) in &raw.prefs {
        if !known.contains(owner.as_str()) {
            return Err(Error::UnknownId(owner.clone()));
        }
        if !seen.insert(owner.as_str()) {
            return Err(Error::syntax(*lineno, format!("second pref line for `{owner}`")));
        }
    }
    if let Some(missing) = owners.iter().find(|o| !seen.contains(o.as_str())) {
        return Err(Error::syntax(0, format!("missing pref line for `{missing}`")));
    }
    Ok(())
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let raw = parse_sections(text)?;
    let doctors = raw.doctors.clone().ok_or_else(|| Error::syntax(0, "missing `doctors:` line"))?;
    let hospitals =
        raw.hospitals.clone().ok_or_else(|| Error::syntax(0, "missing `hospitals:` line"))?;
    let mut b = InstanceBuilder::new();
    for d in &doctors {
        b.doctor(d.clone());
    }
    for h in &hospitals {
        b.hospital(h.clone());
    }
    for h in raw.closed.iter().flatten() {
        b.close(h.clone());
    }
    // Builder first, so duplicate and cross-side ids surface as E_DUP_ID.
    b.build()?;
    check_pref_lines(&raw, doctors.iter().chain(hospitals.iter()))?;
    for (_, owner, groups) in raw.prefs {
        if doctors.contains(&owner) {
            b.doctor_pref(owner, groups);
        } else {
            b.hospital_pref(owner, groups);
        }
    }
    b.build()
}

pub(crate) fn write_pref_line(
    f: &mut fmt::Formatter<'_>,
    owner: &str,
    groups: &[Vec<usize>],
    names: &[String],
) -> fmt::Result {
    write!(f, "pref {owner}:")?;
    for (i, group) in groups.iter().enumerate() {
        f.write_str(if i == 0 { " " } else { " > " })?;
        for (j, &p) in group.iter().enumerate() {
            if j > 0 {
                f.write_str(" = ")?;
            }
            f.write_str(&names[p])?;
        }
    }
    writeln!(f)
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "doctors:{}", joined(&self.doctors))?;
        writeln!(f, "hospitals:{}", joined(&self.hospitals))?;
        let closed: Vec<String> =
            self.closed_hospitals().map(|h| self.hospital_name(h).to_string()).collect();
        if !closed.is_empty() {
            writeln!(f, "closed:{}", joined(&closed))?;
        }
        for d in self.doctors() {
            write_pref_line(f, self.doctor_name(d), self.doctor_pref(d).groups(), &self.hospitals)?;
        }
        for h in self.hospitals() {
            write_pref_line(
                f,
                self.hospital_name(h),
                self.hospital_pref(h).groups(),
                &self.doctors,
            )?;
        }
        Ok(())
    }
}

pub(crate) fn joined(ids: &[String]) -> String {
    ids.iter().map(|s| format!(" {s}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_instance() {
        let inst = parse_instance("doctors: a\nhospitals: x\npref a: x\npref x: a").unwrap();
        assert_eq!(inst.edge_count(), 1);
        assert_eq!(inst.closed_hospitals().count(), 0);
    }

    #[test]
    fn closed_line_sets_closure() {
        let inst =
            parse_instance("doctors: a\nhospitals: x\nclosed: x\npref a: x\npref x: a").unwrap();
        let names: Vec<_> = inst.closed_hospitals().map(|h| inst.hospital_name(h)).collect();
        assert_eq!(names, vec!["x"]);
    }

    #[test]
    fn one_sided_edge_is_asymmetric() {
        let err = parse_instance("doctors: a\nhospitals: x\npref a: x\npref x:").unwrap_err();
        assert_eq!(err.code(), "E_ASYMMETRIC");
    }

    #[test]
    fn error_codes() {
        let cases = [
            ("doctors: a\nhospitals: x\npref a x\npref x:", "E_SYNTAX"),
            ("doctors: a\nhospitals: x\npref a: z\npref x:", "E_UNKNOWN_ID"),
            ("doctors: a a\nhospitals: x\npref a:\npref x:", "E_DUP_ID"),
            ("doctors: a\nhospitals: x\nclosed: a\npref a:\npref x:", "E_CLOSED_NOT_HOSPITAL"),
            ("doctors: a\nhospitals: x\npref a: x = x\npref x: a", "E_DUP_PREF_ENTRY"),
            ("doctors: a\nhospitals: x\npref a: x\npref a: x\npref x: a", "E_SYNTAX"),
            ("doctors: a\nhospitals: x\npref a: x", "E_SYNTAX"),
            ("doctors: a\nhospitals: x\npref a: x >\npref x: a", "E_SYNTAX"),
            ("doctors: a\nhospitals: x\npref q:\npref a:\npref x:", "E_UNKNOWN_ID"),
            ("hospitals: x\npref x:", "E_SYNTAX"),
        ];
        for (text, code) in cases {
            assert_eq!(parse_instance(text).unwrap_err().code(), code, "{text}");
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# header\n\ndoctors: a   # trailing\nhospitals: x y\npref a: y = x\npref x: a\npref y: a\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.edge_count(), 2);
        assert_eq!(
            inst.to_string(),
            "doctors: a\nhospitals: x y\npref a: x = y\npref x: a\npref y: a\n"
        );
    }

    #[test]
    fn serialization_is_canonical() {
        let text = "doctors: b a\nhospitals: y x\nclosed: y\npref b: x\npref a: y > x\npref x: b = a\npref y: a\n";
        let inst = parse_instance(text).unwrap();
        let canonical = inst.to_string();
        assert_eq!(
            canonical,
            "doctors: a b\nhospitals: x y\nclosed: y\npref a: y > x\npref b: x\npref x: a = b\npref y: a\n"
        );
        assert_eq!(parse_instance(&canonical).unwrap(), inst);
    }
}
