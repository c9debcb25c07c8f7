//! Database self-consistency: exactness of the stored EHP data, degree
//! consistency of relations, agreement of generator orders with the tables,
//! and suspension-consistency of stored E images.

use std::fmt;

use crate::bracket::Subgroup;
use crate::db::{Database, EhpMap};
use crate::ehp::map_matrix;
use crate::error::Result;
use crate::group::{BasisKind, Order};
use crate::normalize::{Normalizer, Trace};
use crate::term::Piece;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    /// A genuine inconsistency.
    Failure,
    /// A check that could not run because data is partial.
    Skipped,
    /// Informational (for example, an inert sign-unknown relation).
    Info,
}

#[derive(Debug, Clone)]
pub struct Finding {
    pub severity: Severity,
    pub what: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Failure => "FAIL",
            Severity::Skipped => "skip",
            Severity::Info => "info",
        };
        write!(f, "[{tag}] {}", self.what)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.findings
            .iter()
            .all(|f| f.severity != Severity::Failure)
    }
    pub fn failures(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Failure)
    }
    fn fail(&mut self, what: impl Into<String>) {
        self.findings.push(Finding {
            severity: Severity::Failure,
            what: what.into(),
        });
    }
    fn skip(&mut self, what: impl Into<String>) {
        self.findings.push(Finding {
            severity: Severity::Skipped,
            what: what.into(),
        });
    }
    fn info(&mut self, what: impl Into<String>) {
        self.findings.push(Finding {
            severity: Severity::Info,
            what: what.into(),
        });
    }
}

/// Run every database check; all outcomes land in the report.
pub fn validate_database(db: &Database) -> ValidationReport {
    let mut report = ValidationReport::default();

    // Generator orders against single-atom basis entries of stored groups.
    for g in db.stored_groups() {
        for be in &g.basis {
            if let BasisKind::Chain(t) = &be.kind {
                if let [Piece::Gen(a)] = t.pieces() {
                    if a.subscript > a.birth {
                        if let Some(rec) = db.generator(&a.name) {
                            if rec.order != Order::Inf && rec.order != be.order {
                                report.fail(format!(
                                    "generator `{}` has family order {} but appears in {} with order {}",
                                    a.name,
                                    rec.order,
                                    g.name(),
                                    be.order
                                ));
                            }
                        }
                    }
                }
            }
        }
    }

    // Relations: the loader enforced degree consistency; surface the inert
    // sign-unknown records so nobody expects them to fire.
    for r in db.relations() {
        if r.sign_unknown {
            report.info(format!(
                "relation `{}` is sign-unknown and is never applied",
                r.render_lhs()
            ));
        }
    }

    // Stored E images must agree with termwise suspension when computable.
    for ((m, deg), node) in db.ehp_nodes() {
        for img in node.of(EhpMap::E) {
            let suspended = match img.basis_chain.suspend(1) {
                Ok(t) => t,
                Err(_) => continue,
            };
            let computed = Normalizer::new(db).normalize_term(suspended, &mut Trace::default());
            let stored = if img.image.is_empty() {
                match db.lookup_sphere_group(deg + 1, m + 1) {
                    Ok(g) => Ok(g.zero()),
                    Err(_) => continue,
                }
            } else {
                Normalizer::new(db).normalize_sum(img.image.clone(), &mut Trace::default())
            };
            match (computed, stored) {
                (Ok(a), Ok(b)) => {
                    if a != b {
                        report.fail(format!(
                            "E image of `{}` at node ({m}, {deg}) is stored as `{b}` but suspends to `{a}`",
                            img.basis_chain
                        ));
                    }
                }
                _ => report.skip(format!(
                    "E image of `{}` at node ({m}, {deg}) not cross-checkable",
                    img.basis_chain
                )),
            }
        }
    }

    // Exactness at every encoded node.
    for (&(m, deg), _) in db.ehp_nodes() {
        check_exactness(db, m, deg, &mut report);
    }

    report
}

fn subgroups_for(
    db: &Database,
    m: u32,
    deg: u32,
    map: EhpMap,
) -> Result<Option<(Subgroup, Subgroup)>> {
    match map_matrix(db, m, deg, map)? {
        Some(data) => Ok(Some((data.image()?, data.kernel()?))),
        None => Ok(None),
    }
}

fn check_exactness(db: &Database, m: u32, deg: u32, report: &mut ValidationReport) {
    let e = subgroups_for(db, m, deg, EhpMap::E);
    let h = subgroups_for(db, m, deg, EhpMap::H);
    let p = subgroups_for(db, m, deg, EhpMap::P);
    let p_prev = if deg > 0 {
        subgroups_for(db, m, deg - 1, EhpMap::P)
    } else {
        Ok(None)
    };

    // im E = ker H at pi_(deg+1)(S^(m+1)).
    match (&e, &h) {
        (Ok(Some((im_e, _))), Ok(Some((_, ker_h)))) => {
            if !im_e.equal(ker_h) {
                report.fail(format!(
                    "exactness fails at node ({m}, {deg}): im E = {im_e} but ker H = {ker_h}"
                ));
            } else {
                report.info(format!("node ({m}, {deg}): im E = ker H"));
            }
        }
        _ => report.skip(format!("node ({m}, {deg}): im E = ker H not fully encoded")),
    }

    // im H = ker P at pi_(deg+1)(S^(2m+1)), P taken one degree down.
    match (&h, &p_prev) {
        (Ok(Some((im_h, _))), Ok(Some((_, ker_p)))) => {
            if !im_h.equal(ker_p) {
                report.fail(format!(
                    "exactness fails at node ({m}, {deg}): im H = {im_h} but ker P = {ker_p}"
                ));
            } else {
                report.info(format!("node ({m}, {deg}): im H = ker P"));
            }
        }
        _ => report.skip(format!("node ({m}, {deg}): im H = ker P not fully encoded")),
    }

    // im P = ker E at pi_deg(S^m).
    match (&p, &e) {
        (Ok(Some((im_p, _))), Ok(Some((_, ker_e)))) => {
            if !im_p.equal(ker_e) {
                report.fail(format!(
                    "exactness fails at node ({m}, {deg}): im P = {im_p} but ker E = {ker_e}"
                ));
            } else {
                report.info(format!("node ({m}, {deg}): im P = ker E"));
            }
        }
        _ => report.skip(format!("node ({m}, {deg}): im P = ker E not fully encoded")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_database_is_vacuously_valid() {
        let db = crate::db::load_database("").unwrap();
        let report = validate_database(&db);
        assert!(report.passes());
        assert!(report.findings.is_empty());
    }
}
