//! The rewrite engine: reduces composition chains to elements of presented
//! groups using database relations and the composition calculus.
//!
//! Soundness of the moves:
//!
//! * post-composition is always additive, so a scalar on the right factor of
//!   a composition is a global multiple, represented by letting scalars sit
//!   as pieces and migrate toward the domain end;
//! * pre-composition is additive only with a suspension, so a scalar crosses
//!   an atom exactly when that atom desuspends (`Piece::scalar_crosses`);
//! * `a . [c] = c*a` for the single class `a`, so a scalar sitting right of
//!   an atom reduces modulo the order of that atom's class when the database
//!   knows it;
//! * a relation `c0 * (A1...At) = rhs` applies to a window of consecutive
//!   atoms at any uniform suspension shift at or above its minimal subscript
//!   (none at all for Whitehead squares, which do not suspend), consuming a
//!   `c0`-divisible scalar reachable from the window's right edge; splicing
//!   a multi-term right side into the middle of a chain additionally needs
//!   the remaining suffix to be a suspension;
//! * when the whole term is a global multiple `c * (prefix . suffix)` with
//!   `suffix` a suspension and `prefix` resolvable to an element killed by
//!   `c`, the term is zero.
//!
//! Rewriting is leftmost with the database's relation order, under a step
//! budget that converts any nontermination into a diagnosable error.

use std::sync::Arc;

use crate::db::{Database, RelationRecord};
use crate::error::{Error, Result};
use crate::group::{BasisKind, Element, GroupPresentation, Provenance};
use crate::term::{Piece, Term};

/// Default rewrite-step budget.
pub const DEFAULT_BUDGET: u32 = 10_000;
const MAX_PREFIX_DEPTH: u32 = 4;

/// One applied rule, for auditable output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: String,
    pub citation: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
}

impl Trace {
    fn push(&mut self, rule: impl Into<String>, citation: impl Into<String>) {
        let step = TraceStep {
            rule: rule.into(),
            citation: citation.into(),
        };
        if !self.steps.contains(&step) {
            self.steps.push(step);
        }
    }

    /// Left-hand sides of the database relations that were applied.
    pub fn relations_used(&self) -> Vec<&TraceStep> {
        self.steps
            .iter()
            .filter(|s| s.rule.starts_with("rel "))
            .collect()
    }
}

pub struct Normalizer<'a> {
    pub db: &'a Database,
    budget: u32,
}

impl<'a> Normalizer<'a> {
    pub fn new(db: &'a Database) -> Normalizer<'a> {
        Normalizer {
            db,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn with_budget(db: &'a Database, budget: u32) -> Normalizer<'a> {
        Normalizer { db, budget }
    }

    fn spend(&mut self, what: &Term) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::BudgetExhausted(what.to_string()));
        }
        self.budget -= 1;
        Ok(())
    }

    /// Reduce a formal sum to rewrite normal form: every term fully rewritten,
    /// identical chains merged, zero terms dropped.
    pub fn reduce_sum(&mut self, terms: Vec<Term>, trace: &mut Trace) -> Result<Vec<Term>> {
        let mut work: Vec<Term> = terms;
        loop {
            let mut done: Vec<Term> = Vec::new();
            for t in work {
                let parts = self.reduce_term(t, trace, 0)?;
                done.extend(parts);
            }
            let merged = merge_multiples(done);
            // Merging may create new coefficients (for example 2 * chain),
            // which can enable further kills; loop until stable.
            let mut stable = true;
            for t in &merged {
                if self.one_step(t, trace, 0)?.is_some() {
                    stable = false;
                    break;
                }
            }
            if stable {
                return Ok(merged);
            }
            work = merged;
        }
    }

    fn reduce_term(&mut self, term: Term, trace: &mut Trace, depth: u32) -> Result<Vec<Term>> {
        let mut current = vec![canonicalize(term)];
        loop {
            let mut next: Vec<Term> = Vec::new();
            let mut changed = false;
            for t in current {
                if t.is_zero_syntactic() {
                    changed = true;
                    continue;
                }
                match self.one_step(&t, trace, depth)? {
                    Some(parts) => {
                        changed = true;
                        next.extend(parts.into_iter().map(canonicalize));
                    }
                    None => next.push(t),
                }
            }
            if !changed {
                return Ok(next);
            }
            current = next;
        }
    }

    /// Apply one rewrite to the (already canonicalized) term.
    fn one_step(
        &mut self,
        term: &Term,
        trace: &mut Trace,
        depth: u32,
    ) -> Result<Option<Vec<Term>>> {
        if term.is_zero_syntactic() {
            return Ok(None);
        }
        self.spend(term)?;
        let pieces = term.pieces();

        // Scalar migration toward the domain end across suspensions.
        for i in 0..pieces.len().saturating_sub(1) {
            if pieces[i].is_scalar() && pieces[i + 1].scalar_crosses() && !pieces[i + 1].is_scalar()
            {
                let mut p = pieces.to_vec();
                p.swap(i, i + 1);
                return Ok(Some(vec![rebuild(term, p)]));
            }
        }

        // Scalar reduction modulo the order of the atom it scales.
        for i in 1..pieces.len() {
            if let Piece::Scalar(c) = pieces[i] {
                if let Some(order) = self.db.atom_order(&pieces[i - 1]) {
                    if let Some(m) = order.value() {
                        let c2 = c.rem_euclid(m);
                        if c2 != c {
                            trace.push(
                                format!("order of {} divides {m}", piece_name(&pieces[i - 1])),
                                "order reduction",
                            );
                            let mut p = pieces.to_vec();
                            if c2 == 0 {
                                return Ok(Some(Vec::new()));
                            }
                            p[i] = Piece::Scalar(c2);
                            return Ok(Some(vec![rebuild(term, p)]));
                        }
                        if c2 == 0 {
                            return Ok(Some(Vec::new()));
                        }
                    }
                }
            }
        }

        // Database relations, leftmost window first.
        let rels: Vec<&RelationRecord> = self.db.relations().iter().collect();
        for start in 0..pieces.len() {
            if pieces[start].is_scalar() {
                continue;
            }
            for rel in &rels {
                if rel.sign_unknown {
                    continue;
                }
                if let Some(result) = self.try_relation(term, start, rel)? {
                    trace.push(
                        format!("rel {} ", rel.render_lhs()).trim().to_string(),
                        rel.citation.clone(),
                    );
                    return Ok(Some(result));
                }
            }
        }

        // Global-multiple kill through a resolvable prefix.
        if let Some(Piece::Scalar(c)) = pieces.last() {
            if depth < MAX_PREFIX_DEPTH && c.abs() != 1 {
                if let Some(()) = self.try_prefix_kill(term, *c, trace, depth)? {
                    return Ok(Some(Vec::new()));
                }
            }
        }

        Ok(None)
    }

    fn try_relation(
        &mut self,
        term: &Term,
        start: usize,
        rel: &RelationRecord,
    ) -> Result<Option<Vec<Term>>> {
        let pieces = term.pieces();
        let plen = rel.lhs_atoms.len();
        if start + plen > pieces.len() {
            return Ok(None);
        }
        let window = &pieces[start..start + plen];
        if window.iter().any(Piece::is_scalar) {
            return Ok(None);
        }
        // Uniform shift match against the pattern.
        let mut shift: Option<u32> = None;
        for (pat, got) in rel.lhs_atoms.iter().zip(window.iter()) {
            let k = match (pat, got) {
                (Piece::Gen(p), Piece::Gen(g))
                    if p.name == g.name && g.subscript >= p.subscript =>
                {
                    g.subscript - p.subscript
                }
                (Piece::Whead(p), Piece::Whead(g)) if g == p => 0,
                _ => return Ok(None),
            };
            match shift {
                None => shift = Some(k),
                Some(s) if s == k => {}
                _ => return Ok(None),
            }
        }
        let shift = shift.unwrap_or(0);
        if shift > 0 {
            let has_whead = rel.lhs_atoms.iter().any(|p| matches!(p, Piece::Whead(_)))
                || rel
                    .rhs
                    .iter()
                    .any(|t| t.pieces().iter().any(|p| matches!(p, Piece::Whead(_))));
            if has_whead {
                return Ok(None);
            }
        }
        // A relation asserted at its written subscripts applies at any shift
        // upward; `min_subscript` equals the written codomain, so any match
        // is automatically at or above it.

        // Coefficient handling.
        let mut consumed_scalar: Option<(usize, i64)> = None;
        if rel.lhs_coeff != 1 {
            let mut j = start + plen;
            loop {
                if j >= pieces.len() {
                    return Ok(None);
                }
                match &pieces[j] {
                    Piece::Scalar(c) => {
                        if c % rel.lhs_coeff == 0 {
                            consumed_scalar = Some((j, c / rel.lhs_coeff));
                            break;
                        }
                        return Ok(None);
                    }
                    p if p.scalar_crosses() => j += 1,
                    _ => return Ok(None),
                }
            }
        }
        // Splicing a true sum mid-chain needs the suffix to be a suspension.
        if rel.rhs.len() >= 2 {
            let suffix_ok = pieces[start + plen..].iter().all(Piece::scalar_crosses);
            if !suffix_ok {
                return Ok(None);
            }
        }
        // Build the replacement terms.
        let mut out = Vec::new();
        for rhs in &rel.rhs {
            let shifted = rhs.suspend(shift)?;
            let mut p: Vec<Piece> = Vec::new();
            p.extend_from_slice(&pieces[..start]);
            p.extend(shifted.pieces().iter().cloned());
            for (j, piece) in pieces.iter().enumerate().skip(start + plen) {
                match consumed_scalar {
                    Some((cj, q)) if cj == j => p.push(Piece::Scalar(q)),
                    _ => p.push(piece.clone()),
                }
            }
            out.push(rebuild(term, p));
        }
        // Empty rhs: the window (with its coefficient) is zero, so the term is.
        Ok(Some(out))
    }

    /// `c * (prefix . suffix) = ((c * prefix) . suffix)` when the suffix is a
    /// suspension; zero when the database shows `c` kills the prefix class.
    fn try_prefix_kill(
        &mut self,
        term: &Term,
        c: i64,
        trace: &mut Trace,
        depth: u32,
    ) -> Result<Option<()>> {
        let pieces = term.pieces();
        let last = pieces.len() - 1; // trailing scalar position
        for split in (1..=last).rev() {
            if !pieces[split..last].iter().all(Piece::scalar_crosses) {
                continue;
            }
            let prefix = match Term::new(term.cod(), pieces[..split].to_vec()) {
                Ok(t) => t,
                Err(_) => continue,
            };
            if !self.db.has_sphere_group(prefix.dom(), prefix.cod()) {
                continue;
            }
            let mut sub = Trace::default();
            let reduced = match self.reduce_term(prefix.clone(), &mut sub, depth + 1) {
                Ok(r) => r,
                Err(_) => continue,
            };
            let elem = match self.extract_element(reduced, prefix.dom(), prefix.cod(), &mut sub) {
                Ok(e) => e,
                Err(_) => continue,
            };
            if elem.scaled(c).is_zero() {
                trace.steps.extend(sub.steps);
                trace.push(
                    format!("{c} kills {} in {}", prefix, elem.group.name()),
                    "order reduction",
                );
                return Ok(Some(()));
            }
        }
        Ok(None)
    }

    /// Express a rewrite normal form as an element of `pi_deg(S^cod)`.
    fn extract_element(
        &mut self,
        terms: Vec<Term>,
        deg: u32,
        cod: u32,
        _trace: &mut Trace,
    ) -> Result<Element> {
        if terms.is_empty() {
            // Provably zero; the full presentation is not required.
            let group = match self.db.lookup_sphere_group(deg, cod) {
                Ok(g) => g,
                Err(_) => Arc::new(GroupPresentation::trivial(
                    deg,
                    cod,
                    Provenance::ZeroWitness,
                )),
            };
            return Ok(group.zero());
        }
        let group = self.db.lookup_sphere_group(deg, cod)?;
        let mut coords = vec![0i64; group.basis.len()];
        'terms: for t in &terms {
            let (atoms, coeff) = split_global(t)?;
            for (i, b) in group.basis.iter().enumerate() {
                if let BasisKind::Chain(chain) = &b.kind {
                    if chain.pieces() == atoms.as_slice() {
                        coords[i] += coeff;
                        continue 'terms;
                    }
                }
            }
            return Err(Error::StuckTerm {
                fragment: t.to_string(),
                deg,
                sphere: cod,
            });
        }
        Ok(Element::new(group, coords))
    }

    /// Full normalization of a formal sum to an element.
    pub fn normalize_sum(&mut self, terms: Vec<Term>, trace: &mut Trace) -> Result<Element> {
        if terms.is_empty() {
            panic!("normalize_sum needs at least one term for its degree");
        }
        let (deg, cod) = (terms[0].dom(), terms[0].cod());
        for t in &terms {
            if t.dom() != deg || t.cod() != cod {
                return Err(Error::AmbientMismatch(
                    format!("pi_{}(S^{})", t.dom(), t.cod()),
                    format!("pi_{deg}(S^{cod})"),
                ));
            }
        }
        let reduced = self.reduce_sum(terms, trace)?;
        self.extract_element(reduced, deg, cod, trace)
    }

    pub fn normalize_term(&mut self, term: Term, trace: &mut Trace) -> Result<Element> {
        self.normalize_sum(vec![term], trace)
    }

    /// Whether a sum reduces to zero: rewriting kills everything, or the
    /// residue expresses as the zero element of a stored group.
    pub fn reduces_to_zero(&mut self, terms: Vec<Term>, trace: &mut Trace) -> Result<bool> {
        if terms.is_empty() {
            return Ok(true);
        }
        let (deg, cod) = (terms[0].dom(), terms[0].cod());
        let reduced = self.reduce_sum(terms, trace)?;
        if reduced.is_empty() {
            return Ok(true);
        }
        match self.extract_element(reduced, deg, cod, trace) {
            Ok(e) => Ok(e.is_zero()),
            Err(_) => Ok(false),
        }
    }
}

/// Convenience wrappers with a fresh budget.
pub fn normalize(db: &Database, term: &Term) -> Result<Element> {
    Normalizer::new(db).normalize_term(term.clone(), &mut Trace::default())
}

pub fn normalize_traced(db: &Database, term: &Term) -> Result<(Element, Trace)> {
    let mut trace = Trace::default();
    let e = Normalizer::new(db).normalize_term(term.clone(), &mut trace)?;
    Ok((e, trace))
}

pub fn normalize_sum(db: &Database, terms: &[Term]) -> Result<Element> {
    Normalizer::new(db).normalize_sum(terms.to_vec(), &mut Trace::default())
}

fn canonicalize(t: Term) -> Term {
    t.fuse_scalars()
}

fn rebuild(original: &Term, pieces: Vec<Piece>) -> Term {
    // Piece moves preserve degrees by construction.
    Term::new(original.cod(), pieces)
        .map(|t| {
            debug_assert_eq!(t.dom(), original.dom());
            t
        })
        .unwrap_or_else(|_| Term::zero(original.dom(), original.cod()))
        .fuse_scalars()
}

fn piece_name(p: &Piece) -> String {
    match p {
        Piece::Gen(a) => format!("{}_{}", a.name, a.subscript),
        Piece::Whead(n) => format!("w_{n}"),
        Piece::Scalar(c) => format!("[{c}]"),
    }
}

/// Split a normal-form term into its atom string and global coefficient.
/// Mid-chain scalars at this point are genuinely stuck.
fn split_global(t: &Term) -> Result<(Vec<Piece>, i64)> {
    let pieces = t.pieces();
    let mut atoms: Vec<Piece> = Vec::new();
    let mut coeff = 1i64;
    for (i, p) in pieces.iter().enumerate() {
        match p {
            Piece::Scalar(c) => {
                if i + 1 == pieces.len() {
                    coeff = *c;
                } else {
                    return Err(Error::StuckTerm {
                        fragment: t.to_string(),
                        deg: t.dom(),
                        sphere: t.cod(),
                    });
                }
            }
            other => atoms.push(other.clone()),
        }
    }
    Ok((atoms, coeff))
}

/// Merge terms with identical chains by adding their global coefficients.
fn merge_multiples(terms: Vec<Term>) -> Vec<Term> {
    let mut buckets: Vec<(Vec<Piece>, u32, u32, i64)> = Vec::new();
    let mut opaque: Vec<Term> = Vec::new();
    for t in terms {
        if t.is_zero_syntactic() {
            continue;
        }
        match split_global(&t) {
            Ok((atoms, coeff)) => {
                if let Some(b) = buckets
                    .iter_mut()
                    .find(|(a, d, c, _)| *a == atoms && *d == t.dom() && *c == t.cod())
                {
                    b.3 += coeff;
                } else {
                    buckets.push((atoms, t.dom(), t.cod(), coeff));
                }
            }
            Err(_) => opaque.push(t),
        }
    }
    let mut out: Vec<Term> = Vec::new();
    for (atoms, _dom, cod, coeff) in buckets {
        if coeff == 0 {
            continue;
        }
        let mut pieces = atoms;
        if coeff != 1 {
            pieces.push(Piece::Scalar(coeff));
        }
        let t = Term::new(cod, pieces).expect("merged pieces were valid");
        out.push(t);
    }
    out.extend(opaque);
    out
}
