//! The generalized EHP sequence as stored data: applying E, H, P, solving
//! P-preimage cosets from the linear congruences, and the H-formula for
//! matrix brackets whose column entries are suspensions.
//!
//! A node `(m, N)` carries
//! `E : pi_N(S^m) -> pi_(N+1)(S^(m+1))`,
//! `H : pi_(N+1)(S^(m+1)) -> pi_(N+1)(S^(2m+1))`,
//! `P : pi_(N+2)(S^(2m+1)) -> pi_N(S^m)`,
//! each present only where the database has images for the whole source
//! basis. E falls back to termwise suspension when no lines are stored;
//! H and P are data, never derived.

use std::sync::Arc;

use crate::bracket::{check_well_defined, BracketSpec, Coset, Subgroup};
use crate::congr;
use crate::db::{Database, EhpMap};
use crate::error::{Error, Result};
use crate::group::{Element, GroupPresentation};
use crate::normalize::{Normalizer, Trace};
use crate::term::{render_sum, Term};

/// An assembled homomorphism between stored presentations.
#[derive(Debug, Clone)]
pub struct MapData {
    pub src: Arc<GroupPresentation>,
    pub dst: Arc<GroupPresentation>,
    /// `rows[i]` = coordinates of the image of the i-th source basis vector.
    pub rows: Vec<Vec<i128>>,
}

impl MapData {
    pub fn apply(&self, x: &Element) -> Result<Element> {
        if x.deg() != self.src.deg || x.target() != &self.src.target {
            return Err(Error::AmbientMismatch(x.group.name(), self.src.name()));
        }
        let mut coords = vec![0i64; self.dst.basis.len()];
        for (c, row) in x.coords.iter().zip(self.rows.iter()) {
            for (o, v) in coords.iter_mut().zip(row.iter()) {
                *o += (*c as i128 * v) as i64;
            }
        }
        Ok(Element::new(Arc::clone(&self.dst), coords))
    }

    /// Image as a subgroup of the destination.
    pub fn image(&self) -> Result<Subgroup> {
        let gens = self
            .rows
            .iter()
            .map(|r| Element::new(Arc::clone(&self.dst), r.iter().map(|&v| v as i64).collect()))
            .collect();
        Subgroup::span(Arc::clone(&self.dst), gens)
    }

    /// Kernel as a subgroup of the source.
    pub fn kernel(&self) -> Result<Subgroup> {
        let ker = congr::kernel(&self.src.cols(), &self.dst.cols(), &self.rows);
        let gens = ker
            .iter()
            .map(|r| Element::new(Arc::clone(&self.src), r.iter().map(|&v| v as i64).collect()))
            .collect();
        Subgroup::span(Arc::clone(&self.src), gens)
    }
}

fn map_degrees(m: u32, deg: u32, map: EhpMap) -> ((u32, u32), (u32, u32)) {
    match map {
        EhpMap::E => ((deg, m), (deg + 1, m + 1)),
        EhpMap::H => ((deg + 1, m + 1), (deg + 1, 2 * m + 1)),
        EhpMap::P => ((deg + 2, 2 * m + 1), (deg, m)),
    }
}

/// Assemble one map of the node `(m, deg)`. `Ok(None)` means the database
/// does not determine it (missing group or images for part of the basis).
pub fn map_matrix(db: &Database, m: u32, deg: u32, map: EhpMap) -> Result<Option<MapData>> {
    let ((sd, ss), (dd, ds)) = map_degrees(m, deg, map);
    let src = match db.lookup_sphere_group(sd, ss) {
        Ok(g) => g,
        Err(_) => return Ok(None),
    };
    if src.is_trivial() {
        let dst = match db.lookup_sphere_group(dd, ds) {
            Ok(g) => g,
            Err(_) => return Ok(None),
        };
        return Ok(Some(MapData {
            src,
            dst,
            rows: Vec::new(),
        }));
    }
    let dst = match db.lookup_sphere_group(dd, ds) {
        Ok(g) => g,
        Err(_) => return Ok(None),
    };
    let node = db.ehp_node(m, deg);
    let mut rows: Vec<Vec<i128>> = Vec::new();
    for be in &src.basis {
        let chain = be.kind.chain();
        let stored = node.and_then(|n| n.of(map).find(|i| &i.basis_chain == chain));
        let image_elem: Element = match stored {
            Some(img) => {
                if img.image.is_empty() {
                    dst.zero()
                } else {
                    let mut norm = Normalizer::new(db);
                    match norm.normalize_sum(img.image.clone(), &mut Trace::default()) {
                        Ok(e) => e,
                        Err(_) => return Ok(None),
                    }
                }
            }
            None if map == EhpMap::E => {
                // E is the suspension; compute it when the chain suspends.
                match chain.suspend(1) {
                    Ok(t) => match Normalizer::new(db).normalize_term(t, &mut Trace::default()) {
                        Ok(e) => e,
                        Err(_) => return Ok(None),
                    },
                    Err(_) => return Ok(None),
                }
            }
            None => return Ok(None),
        };
        if image_elem.is_zero() {
            rows.push(vec![0i128; dst.basis.len()]);
        } else {
            if image_elem.deg() != dst.deg || image_elem.target() != &dst.target {
                return Ok(None);
            }
            rows.push(image_elem.coords.iter().map(|&c| c as i128).collect());
        }
    }
    Ok(Some(MapData { src, dst, rows }))
}

/// Linear image of `x` under the stored map at node `(m, deg)`.
pub fn apply_map(db: &Database, m: u32, deg: u32, map: EhpMap, x: &Element) -> Result<Element> {
    let data = map_matrix(db, m, deg, map)?.ok_or(Error::NodeNotInDatabase { m, deg })?;
    data.apply(x)
}

/// `H` on an element of `pi_d(S^w)` through its node `(w-1, d-1)`. Below the
/// connectivity of `S^(2w-1)` the answer is zero with no data needed.
pub fn h_of_element(db: &Database, x: &Element) -> Result<Element> {
    let w = match x.target() {
        crate::group::Target::Sphere(w) => *w,
        t => return Err(Error::AmbientMismatch(format!("{t}"), "a sphere".into())),
    };
    let d = x.deg();
    if w < 1 || d < 2 * w - 1 {
        return Ok(Arc::new(GroupPresentation::trivial(
            d,
            2 * w - 1,
            crate::group::Provenance::Connectivity,
        ))
        .zero());
    }
    if x.is_zero() {
        let g = db.lookup_sphere_group(d, 2 * w - 1).unwrap_or_else(|_| {
            Arc::new(GroupPresentation::trivial(
                d,
                2 * w - 1,
                crate::group::Provenance::ZeroWitness,
            ))
        });
        return Ok(g.zero());
    }
    apply_map(db, w - 1, d - 1, EhpMap::H, x)
}

/// `E` on an element, preferring stored lines, falling back to termwise
/// suspension of its basis expression.
pub fn e_of_element(db: &Database, x: &Element) -> Result<Element> {
    let w = match x.target() {
        crate::group::Target::Sphere(w) => *w,
        t => return Err(Error::AmbientMismatch(format!("{t}"), "a sphere".into())),
    };
    if let Some(data) = map_matrix(db, w, x.deg(), EhpMap::E)? {
        return data.apply(x);
    }
    let terms = x
        .as_terms()
        .ok_or_else(|| Error::NotExpressible(x.to_string()))?;
    if terms.is_empty() {
        return Ok(Arc::new(GroupPresentation::trivial(
            x.deg() + 1,
            w + 1,
            crate::group::Provenance::ZeroWitness,
        ))
        .zero());
    }
    let suspended: Vec<Term> = terms
        .iter()
        .map(|t| t.suspend(1))
        .collect::<Result<Vec<_>>>()?;
    Normalizer::new(db).normalize_sum(suspended, &mut Trace::default())
}

/// The preimage coset `P^(-1)(y)` at node `(m, N)`: one representative
/// solved from the congruences against the stored P matrix, indeterminacy
/// `ker P = im H`. Requires `E(y) = 0` (exactness makes that equivalent to
/// `y` lying in the image).
pub fn p_inverse(db: &Database, m: u32, deg: u32, y: &Element) -> Result<Coset> {
    if !y.is_zero() {
        let ey = e_of_element(db, y)?;
        if !ey.is_zero() {
            return Err(Error::NotInImageOfP(y.to_string()));
        }
    }
    p_inverse_unchecked(db, m, deg, y)
}

fn p_inverse_unchecked(db: &Database, m: u32, deg: u32, y: &Element) -> Result<Coset> {
    let src = db.lookup_sphere_group(deg + 2, 2 * m + 1)?;
    if src.is_trivial() {
        if y.is_zero() {
            return Ok(Coset::zero(src));
        }
        return Err(Error::NotInImageOfP(y.to_string()));
    }
    let data = map_matrix(db, m, deg, EhpMap::P)?.ok_or(Error::NodeNotInDatabase { m, deg })?;
    let target: Vec<i128> = y.coords.iter().map(|&c| c as i128).collect();
    let sol = congr::solve(&data.src.cols(), &data.dst.cols(), &data.rows, &target)?
        .ok_or_else(|| Error::NotInImageOfP(y.to_string()))?;
    let rep = Element::new(
        Arc::clone(&data.src),
        sol.iter().map(|&v| v as i64).collect(),
    );
    let indeterminacy = data.kernel()?;
    Ok(Coset {
        representative: Some(rep),
        indeterminacy,
    })
}

/// Report of one H-formula column.
#[derive(Debug, Clone)]
pub struct HColumn {
    pub label: String,
    pub how: String,
}

#[derive(Debug, Clone)]
pub struct HFormulaResult {
    pub value: Coset,
    pub columns: Vec<HColumn>,
    pub trace: Trace,
}

/// The generalized H-formula
/// `H { a, Sigma^n b, Sigma^n c }_n = - sum_s P^(-1)(f . Sigma^(n-1) b_(.,s)) . Sigma^(n+1) c_s`
/// where `f` desuspends the row once. Each column is solved through its
/// node; when the node's P matrix is not stored but the whole ambient
/// `pi_(N+2)(S^(2m+1))` dies against the column tail, the column contributes
/// the zero coset (its preimage lives in that ambient).
pub fn h_formula(db: &Database, spec: &BracketSpec) -> Result<HFormulaResult> {
    if spec.n == 0 {
        return Err(Error::HFormulaInapplicable(
            "the bracket index must be at least 1 (the formula lives at index 1)".into(),
        ));
    }
    let report = check_well_defined(spec, db)?;
    if !report.is_well_defined() {
        let bad: Vec<&str> = report
            .ab_entries
            .iter()
            .chain(&report.bc_entries)
            .filter(|(_, z)| !*z)
            .map(|(l, _)| l.as_str())
            .collect();
        return Err(Error::NotWellDefined(bad.join("; ")));
    }
    let mut trace = report.trace;
    let f = spec.a.desuspend(1).map_err(|e| {
        Error::HFormulaInapplicable(format!("the row does not desuspend once: {e}"))
    })?;
    let w = spec.w_sphere();
    let m = w - 1;
    let result_group = db.lookup_sphere_group(spec.ambient_deg(), 2 * m + 1)?;
    let mut total = Coset::zero(Arc::clone(&result_group));
    let mut columns = Vec::new();
    for s in 0..spec.r() {
        let col_label = format!("column {}", s + 1);
        // y_s = f . Sigma^(n-1) b_(.,s)
        let mut y_terms: Vec<Term> = Vec::new();
        for k in 0..spec.ell() {
            for tf in f.entry(0, k) {
                if tf.is_zero_syntactic() {
                    continue;
                }
                for tb in spec.b.entry(k, s) {
                    if tb.is_zero_syntactic() {
                        continue;
                    }
                    y_terms.push(tf.compose(&tb.suspend(spec.n - 1)?)?);
                }
            }
        }
        let tail: Vec<Term> = spec
            .c
            .entry(s, 0)
            .iter()
            .filter(|t| !t.is_zero_syntactic())
            .map(|t| t.suspend(spec.n + 1))
            .collect::<Result<Vec<_>>>()?;
        if tail.is_empty() {
            columns.push(HColumn {
                label: col_label,
                how: "c entry is zero".into(),
            });
            continue;
        }
        if y_terms.is_empty() {
            // P^(-1)(0) = ker P composed with the tail.
            let n_deg = spec.b.col_space().summands[s] + spec.n - 1;
            let ker_contrib = kernel_times_tail(db, m, n_deg, &tail, &result_group, &mut trace)?;
            total = total.add(&ker_contrib)?;
            columns.push(HColumn {
                label: col_label,
                how: "zero column, kernel coset".into(),
            });
            continue;
        }
        // Hypothesis: Sigma(y_s) = 0 (already part of well-definedness).
        let n_deg = y_terms[0].dom();
        match try_p_inverse_column(db, m, n_deg, &y_terms, &tail, &result_group, &mut trace)? {
            Some((coset, how)) => {
                total = total.add(&coset)?;
                columns.push(HColumn {
                    label: col_label,
                    how,
                });
            }
            None => {
                return Err(Error::NodeNotInDatabase { m, deg: n_deg });
            }
        }
    }
    // The formula's leading minus.
    if let Some(rep) = &total.representative {
        total.representative = Some(rep.neg());
    }
    Ok(HFormulaResult {
        value: total,
        columns,
        trace,
    })
}

fn kernel_times_tail(
    db: &Database,
    m: u32,
    n_deg: u32,
    tail: &[Term],
    result_group: &Arc<GroupPresentation>,
    trace: &mut Trace,
) -> Result<Coset> {
    let src = db.lookup_sphere_group(n_deg + 2, 2 * m + 1)?;
    if src.is_trivial() {
        return Ok(Coset::zero(Arc::clone(result_group)));
    }
    let data =
        map_matrix(db, m, n_deg, EhpMap::P)?.ok_or(Error::NodeNotInDatabase { m, deg: n_deg })?;
    let ker = data.kernel()?;
    let gens = compose_elements_with_tail(db, &ker.canonical_basis(), tail, trace)?;
    Ok(Coset {
        representative: Some(result_group.zero()),
        indeterminacy: Subgroup::span(Arc::clone(result_group), gens)?,
    })
}

fn compose_elements_with_tail(
    db: &Database,
    elems: &[Element],
    tail: &[Term],
    trace: &mut Trace,
) -> Result<Vec<Element>> {
    let mut out = Vec::new();
    for e in elems {
        if e.is_zero() {
            continue;
        }
        let terms = e
            .as_terms()
            .ok_or_else(|| Error::NotExpressible(e.to_string()))?;
        let mut sum = Vec::new();
        for t in &terms {
            for u in tail {
                sum.push(t.compose(u)?);
            }
        }
        if sum.is_empty() {
            continue;
        }
        out.push(Normalizer::new(db).normalize_sum(sum, trace)?);
    }
    Ok(out)
}

/// One column of the H-formula: solve `P^(-1)(y)` and compose the coset with
/// the tail, or fall back to the ambient-vanishing shortcut.
fn try_p_inverse_column(
    db: &Database,
    m: u32,
    n_deg: u32,
    y_terms: &[Term],
    tail: &[Term],
    result_group: &Arc<GroupPresentation>,
    trace: &mut Trace,
) -> Result<Option<(Coset, String)>> {
    // Full route first: express y and solve the congruences.
    let full = (|| -> Result<(Coset, String)> {
        let y = Normalizer::new(db).normalize_sum(y_terms.to_vec(), trace)?;
        let pre = p_inverse_unchecked(db, m, n_deg, &y)?;
        let rep = pre
            .representative
            .as_ref()
            .expect("p_inverse always produces a representative");
        let rep_terms = rep
            .as_terms()
            .ok_or_else(|| Error::NotExpressible(rep.to_string()))?;
        let rep_elem = if rep_terms.is_empty() {
            result_group.zero()
        } else {
            let mut sum = Vec::new();
            for t in &rep_terms {
                for u in tail {
                    sum.push(t.compose(u)?);
                }
            }
            Normalizer::new(db).normalize_sum(sum, trace)?
        };
        let ind_gens =
            compose_elements_with_tail(db, &pre.indeterminacy.canonical_basis(), tail, trace)?;
        Ok((
            Coset {
                representative: Some(rep_elem),
                indeterminacy: Subgroup::span(Arc::clone(result_group), ind_gens)?,
            },
            format!("P^(-1) solved at node ({m}, {n_deg})"),
        ))
    })();
    match full {
        Ok(v) => Ok(Some(v)),
        Err(Error::NotInImageOfP(msg)) => Err(Error::NotInImageOfP(msg)),
        Err(first) => {
            // Shortcut: the whole preimage ambient dies against the tail.
            let amb = match db.lookup_sphere_group(n_deg + 2, 2 * m + 1) {
                Ok(g) => g,
                Err(_) => return Err(first),
            };
            let mut all_zero = true;
            for be in &amb.basis {
                let mut sum = Vec::new();
                for u in tail {
                    sum.push(be.kind.chain().compose(u)?);
                }
                if sum.is_empty() {
                    continue;
                }
                if !Normalizer::new(db).reduces_to_zero(sum, trace)? {
                    all_zero = false;
                    break;
                }
            }
            if all_zero {
                Ok(Some((
                    Coset::zero(Arc::clone(result_group)),
                    format!(
                        "whole preimage ambient {} dies against the tail {}",
                        amb.name(),
                        render_sum(tail)
                    ),
                )))
            } else {
                Err(first)
            }
        }
    }
}

/// `H` of the full-definition indeterminacy of a bracket:
/// `H(a . Sigma^n [Sigma U, vee X_k]) + sum_s H([Sigma^(n+1) Y_s, W] . Sigma^(n+1) c_s)`,
/// through `H(alpha . Sigma beta) = H(alpha) . Sigma beta`. Left summands
/// need every element of `[Sigma U, X_k]` to be a suspension when `n = 0`
/// (Freudenthal, a stored flag, or a trivial group); the composite tails
/// `Sigma^(n+1) c_s` are suspensions outright.
pub fn h_of_indeterminacy(db: &Database, spec: &BracketSpec) -> Result<Subgroup> {
    let w = spec.w_sphere();
    let target = db.lookup_sphere_group(spec.ambient_deg(), 2 * w - 1)?;
    let mut trace = Trace::default();
    let mut gens: Vec<Element> = Vec::new();
    let u = spec.u_sphere();
    for k in 0..spec.ell() {
        let a_entry = spec.a.entry(0, k);
        if a_entry.iter().all(Term::is_zero_syntactic) {
            continue;
        }
        let x = spec.b.row_space().summands[k];
        // Elements composed on the right of a_k are Sigma^n xi; for n = 0
        // they must still be suspensions for the push-through rule.
        if spec.n == 0 {
            let trivially_fine = u + 1 < x || db.all_suspensions(u + 1, x).is_some();
            if !trivially_fine {
                return Err(Error::HFormulaInapplicable(format!(
                    "cannot push H through a_{} . pi_{}(S^{x}): elements there are not known suspensions",
                    k + 1,
                    u + 1
                )));
            }
        }
        let a_term = match a_entry {
            [t] => t,
            _ => return Err(Error::NotExpressible(render_sum(a_entry))),
        };
        let a_elem = Normalizer::new(db).normalize_term(a_term.clone(), &mut trace)?;
        let ha = h_of_element(db, &a_elem)?;
        if ha.is_zero() {
            trace.steps.push(crate::normalize::TraceStep {
                rule: format!("H({a_term}) = 0"),
                citation: "push-through of H along a suspension tail".into(),
            });
            continue;
        }
        // Nonzero H(a_k): enumerate the stored group and push through.
        let g = db.lookup_sphere_group(u + 1, x)?;
        let ha_terms = ha
            .as_terms()
            .ok_or_else(|| Error::NotExpressible(ha.to_string()))?;
        for be in &g.basis {
            let xi = be.kind.chain().suspend(spec.n)?;
            let mut sum = Vec::new();
            for t in &ha_terms {
                sum.push(t.compose(&xi)?);
            }
            if !sum.is_empty() {
                gens.push(Normalizer::new(db).normalize_sum(sum, &mut trace)?);
            }
        }
    }
    for s in 0..spec.r() {
        let c_entry = spec.c.entry(s, 0);
        if c_entry.iter().all(Term::is_zero_syntactic) {
            continue;
        }
        let y = spec.b.col_space().summands[s];
        let g = db.lookup_sphere_group(y + spec.n + 1, w)?;
        let tail: Vec<Term> = c_entry
            .iter()
            .filter(|t| !t.is_zero_syntactic())
            .map(|t| t.suspend(spec.n + 1))
            .collect::<Result<Vec<_>>>()?;
        for be in &g.basis {
            let g_elem = Normalizer::new(db).normalize_term(be.kind.chain().clone(), &mut trace)?;
            let hg = h_of_element(db, &g_elem)?;
            if hg.is_zero() {
                continue;
            }
            let hg_terms = hg
                .as_terms()
                .ok_or_else(|| Error::NotExpressible(hg.to_string()))?;
            let mut sum = Vec::new();
            for t in &hg_terms {
                for u_t in &tail {
                    sum.push(t.compose(u_t)?);
                }
            }
            if !sum.is_empty() {
                gens.push(Normalizer::new(db).normalize_sum(sum, &mut trace)?);
            }
        }
    }
    Subgroup::span(target, gens)
}

/// `H` of a bracket known to contain an element whose `H` lies in `known`:
/// the set image `H(bracket) = rep(known) + Ind(known) + H(Ind(bracket))`.
pub fn h_via_member(db: &Database, spec: &BracketSpec, known: &Coset) -> Result<Coset> {
    let h_ind = h_of_indeterminacy(db, spec)?;
    Ok(Coset {
        representative: known.representative.clone(),
        indeterminacy: known.indeterminacy.sum(&h_ind)?,
    })
}
