//! Matrix Toda bracket specifications: well-definedness, indeterminacy by
//! the index-positive formula and by the full coset computation, the four
//! shape rewrites for 2 x 2 brackets with a zero corner, and subgroup/coset
//! arithmetic over presented groups.

use std::fmt;
use std::sync::Arc;

use crate::congr::{ColOrder, Echelon};
use crate::db::Database;
use crate::error::{Error, Result};
use crate::group::{Element, GroupPresentation, Order};
use crate::normalize::{Normalizer, Trace};
use crate::term::{render_sum, Term};
use crate::wedge::{image_through_row, wedge_group, FormalMatrix, WedgeSpace};

/// A subgroup of a presented group, held as generators plus the echelonized
/// span over the cyclic orders.
#[derive(Debug, Clone)]
pub struct Subgroup {
    pub ambient: Arc<GroupPresentation>,
    pub gens: Vec<Element>,
    ech: Echelon,
}

impl Subgroup {
    pub fn span(ambient: Arc<GroupPresentation>, gens: Vec<Element>) -> Result<Subgroup> {
        let cols: Vec<ColOrder> = ambient.cols();
        let mut rows: Vec<Vec<i128>> = Vec::new();
        for g in &gens {
            if g.deg() != ambient.deg || g.target() != &ambient.target {
                return Err(Error::AmbientMismatch(g.group.name(), ambient.name()));
            }
            if g.is_zero() {
                continue;
            }
            if g.coords.len() != ambient.basis.len() {
                return Err(Error::AmbientMismatch(g.group.name(), ambient.name()));
            }
            rows.push(g.coords.iter().map(|&c| c as i128).collect());
        }
        let ech = Echelon::span(&cols, &rows);
        Ok(Subgroup { ambient, gens, ech })
    }

    pub fn trivial(ambient: Arc<GroupPresentation>) -> Subgroup {
        Subgroup::span(ambient, Vec::new()).expect("empty span")
    }

    pub fn member(&self, e: &Element) -> Result<bool> {
        if e.deg() != self.ambient.deg || e.target() != &self.ambient.target {
            return Err(Error::AmbientMismatch(e.group.name(), self.ambient.name()));
        }
        if e.is_zero() {
            return Ok(true);
        }
        if e.coords.len() != self.ambient.basis.len() {
            return Err(Error::AmbientMismatch(e.group.name(), self.ambient.name()));
        }
        Ok(self
            .ech
            .contains(&e.coords.iter().map(|&c| c as i128).collect::<Vec<_>>()))
    }

    pub fn sum(&self, other: &Subgroup) -> Result<Subgroup> {
        if self.ambient.deg != other.ambient.deg || self.ambient.target != other.ambient.target {
            return Err(Error::AmbientMismatch(
                self.ambient.name(),
                other.ambient.name(),
            ));
        }
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        // Re-anchor foreign elements on our presentation.
        let gens = gens
            .into_iter()
            .map(|g| {
                if g.is_zero() && g.coords.len() != self.ambient.basis.len() {
                    self.ambient.zero()
                } else {
                    g
                }
            })
            .collect();
        Subgroup::span(Arc::clone(&self.ambient), gens)
    }

    pub fn equal(&self, other: &Subgroup) -> bool {
        self.ambient.deg == other.ambient.deg
            && self.ambient.target == other.ambient.target
            && self.ech.same_span(&other.ech)
    }

    pub fn contains_subgroup(&self, other: &Subgroup) -> bool {
        other
            .ech
            .visible_rows()
            .iter()
            .all(|r| self.ech.contains(r))
    }

    pub fn is_trivial(&self) -> bool {
        self.ech.visible_rows().is_empty()
    }

    /// Canonical echelon basis, as elements.
    pub fn canonical_basis(&self) -> Vec<Element> {
        self.ech
            .visible_rows()
            .iter()
            .map(|r| {
                Element::new(
                    Arc::clone(&self.ambient),
                    r.iter().map(|&c| c as i64).collect(),
                )
            })
            .collect()
    }

    /// Number of elements (`None` = infinite).
    pub fn order(&self) -> Option<u128> {
        self.ech.group_order()
    }

    pub fn render(&self) -> String {
        let basis = self.canonical_basis();
        if basis.is_empty() {
            return "{0}".to_string();
        }
        let parts: Vec<String> = basis.iter().map(Element::to_string).collect();
        format!("span{{ {} }}", parts.join(", "))
    }
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.equal(other)
    }
}
impl Eq for Subgroup {}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// A coset: an indeterminacy subgroup plus an optional known representative.
/// Representatives are never synthesized; they arrive from the H-formula or
/// from the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct Coset {
    pub representative: Option<Element>,
    pub indeterminacy: Subgroup,
}

impl Coset {
    pub fn zero(ambient: Arc<GroupPresentation>) -> Coset {
        Coset {
            representative: Some(ambient.zero()),
            indeterminacy: Subgroup::trivial(ambient),
        }
    }

    /// Same coset: indeterminacies equal and representatives differ by a
    /// member of the indeterminacy.
    pub fn same_coset(&self, other: &Coset) -> Result<bool> {
        if !self.indeterminacy.equal(&other.indeterminacy) {
            return Ok(false);
        }
        match (&self.representative, &other.representative) {
            (Some(a), Some(b)) => self.indeterminacy.member(&a.add(&b.neg())?),
            _ => Ok(false),
        }
    }

    pub fn add(&self, other: &Coset) -> Result<Coset> {
        let rep = match (&self.representative, &other.representative) {
            (Some(a), Some(b)) => Some(a.add(b)?),
            _ => None,
        };
        Ok(Coset {
            representative: rep,
            indeterminacy: self.indeterminacy.sum(&other.indeterminacy)?,
        })
    }

    pub fn render(&self) -> String {
        let rep = match &self.representative {
            Some(e) => e.to_string(),
            None => "(unknown)".to_string(),
        };
        format!("coset: {rep} + {}", self.indeterminacy.render())
    }
}

/// A matrix Toda bracket `{ a, Sigma^n b, Sigma^n c }_n`. The `b` and `c`
/// data are stored undesuspended (the bracket depends on them, not on their
/// suspensions); `a` is stored as written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketSpec {
    pub a: FormalMatrix,
    pub b: FormalMatrix,
    pub c: FormalMatrix,
    pub n: u32,
}

impl BracketSpec {
    pub fn new(a: FormalMatrix, b: FormalMatrix, c: FormalMatrix, n: u32) -> Result<BracketSpec> {
        if a.rows() != 1 {
            return Err(Error::Shape("the first factor must be a 1 x l row".into()));
        }
        if c.cols() != 1 {
            return Err(Error::Shape(
                "the last factor must be an r x 1 column".into(),
            ));
        }
        let expect_a_cols: Vec<u32> = b.row_space().summands.iter().map(|x| x + n).collect();
        if a.col_space().summands != expect_a_cols {
            return Err(Error::Shape(format!(
                "row domain {} must be Sigma^{n} of the middle codomain {}",
                a.col_space(),
                b.row_space()
            )));
        }
        if b.col_space().summands != c.row_space().summands {
            return Err(Error::Shape(format!(
                "middle domain {} does not match column codomain {}",
                b.col_space(),
                c.row_space()
            )));
        }
        for s in 0..c.rows() {
            for t in c.entry(s, 0) {
                if !t.is_zero_syntactic() && !t.is_suspension() {
                    return Err(Error::Shape(format!(
                        "column entry `{t}` is not a suspension (every c entry must be)"
                    )));
                }
            }
        }
        Ok(BracketSpec { a, b, c, n })
    }

    pub fn ell(&self) -> usize {
        self.b.rows()
    }
    pub fn r(&self) -> usize {
        self.b.cols()
    }
    /// Codomain sphere `W` of the bracket.
    pub fn w_sphere(&self) -> u32 {
        self.a.row_space().summands[0]
    }
    /// Domain sphere `U` of the column, undesuspended.
    pub fn u_sphere(&self) -> u32 {
        self.c.col_space().summands[0]
    }
    /// The bracket is a coset inside `[Sigma^(n+1) U, W]`.
    pub fn ambient_deg(&self) -> u32 {
        self.u_sphere() + self.n + 1
    }

    pub fn render(&self) -> String {
        format!("{{ {}; {}; {} }}_{}", self.a, self.b, self.c, self.n)
    }
}

impl fmt::Display for BracketSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Outcome of the defining compatibility check: both composites vanish.
#[derive(Debug, Clone)]
pub struct WellDefinednessReport {
    /// Entries of `a . Sigma^n b`, rendered, with their zero verdicts.
    pub ab_entries: Vec<(String, bool)>,
    /// Entries of `b . c`, rendered, with their zero verdicts.
    pub bc_entries: Vec<(String, bool)>,
    pub trace: Trace,
}

impl WellDefinednessReport {
    pub fn is_well_defined(&self) -> bool {
        self.ab_entries
            .iter()
            .chain(&self.bc_entries)
            .all(|(_, z)| *z)
    }
}

/// Normalize every entry of `a . Sigma^n b` and of `b . c`; both must be `O`.
pub fn check_well_defined(spec: &BracketSpec, db: &Database) -> Result<WellDefinednessReport> {
    let mut trace = Trace::default();
    let mut ab_entries = Vec::new();
    for s in 0..spec.r() {
        let mut sum: Vec<Term> = Vec::new();
        for k in 0..spec.ell() {
            for ta in spec.a.entry(0, k) {
                if ta.is_zero_syntactic() {
                    continue;
                }
                for tb in spec.b.entry(k, s) {
                    if tb.is_zero_syntactic() {
                        continue;
                    }
                    sum.push(ta.compose(&tb.suspend(spec.n)?)?);
                }
            }
        }
        let label = format!("(a.Sigma^{}b)[{}] = {}", spec.n, s + 1, render_sum(&sum));
        let zero = if sum.is_empty() {
            true
        } else {
            Normalizer::new(db).reduces_to_zero(sum, &mut trace)?
        };
        ab_entries.push((label, zero));
    }
    let mut bc_entries = Vec::new();
    for k in 0..spec.ell() {
        let mut sum: Vec<Term> = Vec::new();
        for s in 0..spec.r() {
            for tb in spec.b.entry(k, s) {
                if tb.is_zero_syntactic() {
                    continue;
                }
                for tc in spec.c.entry(s, 0) {
                    if tc.is_zero_syntactic() {
                        continue;
                    }
                    sum.push(tb.compose(tc)?);
                }
            }
        }
        let label = format!("(b.c)[{}] = {}", k + 1, render_sum(&sum));
        let zero = if sum.is_empty() {
            true
        } else {
            Normalizer::new(db).reduces_to_zero(sum, &mut trace)?
        };
        bc_entries.push((label, zero));
    }
    Ok(WellDefinednessReport {
        ab_entries,
        bc_entries,
        trace,
    })
}

fn ambient_group(spec: &BracketSpec, db: &Database) -> Result<Arc<GroupPresentation>> {
    db.lookup_sphere_group(spec.ambient_deg(), spec.w_sphere())
}

/// Span inside `pi_deg(S^sphere)`; when that group is not stored but every
/// generator is provably zero, the subgroup is the trivial one over a
/// zero-witness placeholder.
fn span_or_zero_witness(
    db: &Database,
    deg: u32,
    sphere: u32,
    gens: Vec<Element>,
) -> Result<Subgroup> {
    match db.lookup_sphere_group(deg, sphere) {
        Ok(amb) => Subgroup::span(amb, gens),
        Err(e) => {
            if gens.iter().all(Element::is_zero) {
                let amb = Arc::new(GroupPresentation::trivial(
                    deg,
                    sphere,
                    crate::group::Provenance::ZeroWitness,
                ));
                Subgroup::span(amb, Vec::new())
            } else {
                Err(e)
            }
        }
    }
}

/// Right-composition summands `[Sigma^(n+1) Y_s, W] . Sigma^(n+1) c_s`,
/// shared by both indeterminacy routes (the wedge on the middle splits as a
/// product, so these summands are exact at every index).
fn right_summand_gens(
    spec: &BracketSpec,
    db: &Database,
    trace: &mut Trace,
) -> Result<Vec<Element>> {
    let mut gens = Vec::new();
    for s in 0..spec.r() {
        let c_entry = spec.c.entry(s, 0);
        if c_entry.iter().all(Term::is_zero_syntactic) {
            continue;
        }
        let y = spec.b.col_space().summands[s];
        let g = db.lookup_sphere_group(y + spec.n + 1, spec.w_sphere())?;
        for be in &g.basis {
            let chain = be.kind.chain();
            let mut sum = Vec::new();
            for tc in c_entry {
                if tc.is_zero_syntactic() {
                    continue;
                }
                sum.push(chain.compose(&tc.suspend(spec.n + 1)?)?);
            }
            if sum.is_empty() {
                continue;
            }
            let e = Normalizer::new(db).normalize_sum(sum, trace)?;
            gens.push(e);
        }
    }
    Ok(gens)
}

/// The summand-wise indeterminacy formula, valid for `n >= 1` with all
/// middle-codomain summands suspensions:
/// `Ind = sum_k a_k . Sigma^n [Sigma U, X_k] + sum_s [Sigma^(n+1) Y_s, W] . Sigma^(n+1) c_s`.
pub fn indeterminacy(spec: &BracketSpec, db: &Database) -> Result<Subgroup> {
    if spec.n == 0 {
        return Err(Error::IndexFormulaInapplicable(
            "n = 0; use the full computation (indeterminacy_full)".into(),
        ));
    }
    for &x in &spec.b.row_space().summands {
        if x < 2 {
            return Err(Error::IndexFormulaInapplicable(format!(
                "summand S^{x} is not a suspension"
            )));
        }
    }
    let mut trace = Trace::default();
    summandwise_value(spec, db, &mut trace)
}

/// Evaluate the summand-wise formula without hypothesis checks (used for the
/// documented comparison against the full computation at n = 0).
pub fn summandwise_value(spec: &BracketSpec, db: &Database, trace: &mut Trace) -> Result<Subgroup> {
    let ambient = ambient_group(spec, db)?;
    let mut gens: Vec<Element> = Vec::new();
    let u = spec.u_sphere();
    for k in 0..spec.ell() {
        let a_entry = spec.a.entry(0, k);
        if a_entry.iter().all(Term::is_zero_syntactic) {
            continue;
        }
        let x = spec.b.row_space().summands[k];
        let g = db.lookup_sphere_group(u + 1, x)?;
        for be in &g.basis {
            let chain = be.kind.chain().suspend(spec.n)?;
            let mut sum = Vec::new();
            for ta in a_entry {
                if ta.is_zero_syntactic() {
                    continue;
                }
                sum.push(ta.compose(&chain)?);
            }
            if sum.is_empty() {
                continue;
            }
            gens.push(Normalizer::new(db).normalize_sum(sum, trace)?);
        }
    }
    gens.extend(right_summand_gens(spec, db, trace)?);
    Subgroup::span(ambient, gens)
}

/// The full coset computation from the definition:
/// `a . Sigma^n [Sigma U, vee X_k] + sum_s [Sigma^(n+1) Y_s, W] . Sigma^(n+1) c_s`,
/// the first summand through the wedge decomposition including Whitehead
/// product blocks.
pub fn indeterminacy_full(spec: &BracketSpec, db: &Database) -> Result<Subgroup> {
    let mut trace = Trace::default();
    indeterminacy_full_traced(spec, db, &mut trace)
}

pub fn indeterminacy_full_traced(
    spec: &BracketSpec,
    db: &Database,
    trace: &mut Trace,
) -> Result<Subgroup> {
    let ambient = ambient_group(spec, db)?;
    let u = spec.u_sphere();
    let wedge = WedgeSpace::new(spec.b.row_space().summands.clone())?;
    let g = wedge_group(db, u + 1, &wedge)?;
    let mut gens = image_through_row(db, &spec.a, &g, spec.n, trace)?;
    gens.extend(right_summand_gens(spec, db, trace)?);
    Subgroup::span(ambient, gens)
}

/// Side-by-side evaluation of the full computation and the summand-wise
/// formula on the same data (the n = 0 caveat made visible).
#[derive(Debug, Clone)]
pub struct IndeterminacyComparison {
    pub full: Subgroup,
    pub formula: Subgroup,
    pub formula_is_proper_subgroup: bool,
    pub equal: bool,
}

pub fn compare_indeterminacy_routes(
    spec: &BracketSpec,
    db: &Database,
) -> Result<IndeterminacyComparison> {
    let mut trace = Trace::default();
    let full = indeterminacy_full_traced(spec, db, &mut trace)?;
    let formula = summandwise_value(spec, db, &mut trace)?;
    let equal = full.equal(&formula);
    let formula_is_proper_subgroup = !equal && full.contains_subgroup(&formula);
    Ok(IndeterminacyComparison {
        full,
        formula,
        formula_is_proper_subgroup,
        equal,
    })
}

/// Which of the four zero-corner rewrites to apply to a 2 x 2 bracket with
/// `b22 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CornerCase {
    /// `a2 = 0`: becomes the right matrix bracket on the first row of `b`.
    A2Zero = 1,
    /// `c2 = 0`: becomes the left matrix bracket on the first column of `b`.
    C2Zero = 2,
    /// `b21 = 0`: right bracket plus the summand `a2 . Sigma^n [Sigma U, X2]`.
    B21Zero = 3,
    /// `b12 = 0`: left bracket plus the summand `[Sigma^(n+1) Y2, W] . Sigma^(n+1) c2`.
    B12Zero = 4,
}

impl CornerCase {
    pub fn from_index(i: u32) -> Option<CornerCase> {
        match i {
            1 => Some(CornerCase::A2Zero),
            2 => Some(CornerCase::C2Zero),
            3 => Some(CornerCase::B21Zero),
            4 => Some(CornerCase::B12Zero),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RewriteResult {
    pub reduced: BracketSpec,
    /// Extra subgroup summand carried out of the rewrite (empty for the
    /// first two cases).
    pub extra: Option<Subgroup>,
}

/// The four shape rewrites for `l = r = 2`, `b22 = 0`, `n >= 1`, both middle
/// codomain summands suspensions. Degenerate extra zero entries are allowed
/// (a fully degenerate row or column reduces to a plain 3-fold bracket).
pub fn corner_rewrite(
    spec: &BracketSpec,
    case: CornerCase,
    db: &Database,
) -> Result<RewriteResult> {
    if spec.n == 0 {
        return Err(Error::CornerRewritePrecondition(
            "n must be at least 1".into(),
        ));
    }
    if spec.ell() != 2 || spec.r() != 2 {
        return Err(Error::CornerRewritePrecondition(
            "shape must be 2 x 2".into(),
        ));
    }
    if !spec.b.is_zero_entry(1, 1) {
        return Err(Error::CornerRewritePrecondition("b22 must be 0".into()));
    }
    for &x in &spec.b.row_space().summands {
        if x < 2 {
            return Err(Error::CornerRewritePrecondition(format!(
                "summand S^{x} is not a suspension"
            )));
        }
    }
    let zero_ok = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::CornerRewritePrecondition(format!(
                "{what} must be 0 for this case"
            )))
        }
    };
    match case {
        CornerCase::A2Zero => {
            zero_ok(spec.a.is_zero_entry(0, 1), "a2")?;
            let a = spec.a.submatrix(&[0], &[0])?;
            let b = spec.b.submatrix(&[0], &[0, 1])?;
            let reduced = BracketSpec::new(a, b, spec.c.clone(), spec.n)?;
            Ok(RewriteResult {
                reduced,
                extra: None,
            })
        }
        CornerCase::C2Zero => {
            zero_ok(spec.c.is_zero_entry(1, 0), "c2")?;
            let b = spec.b.submatrix(&[0, 1], &[0])?;
            let c = spec.c.submatrix(&[0], &[0])?;
            let reduced = BracketSpec::new(spec.a.clone(), b, c, spec.n)?;
            Ok(RewriteResult {
                reduced,
                extra: None,
            })
        }
        CornerCase::B21Zero => {
            zero_ok(spec.b.is_zero_entry(1, 0), "b21")?;
            let a = spec.a.submatrix(&[0], &[0])?;
            let b = spec.b.submatrix(&[0], &[0, 1])?;
            let reduced = BracketSpec::new(a, b, spec.c.clone(), spec.n)?;
            // Extra summand a2 . Sigma^n [Sigma U, X2].
            let ambient = ambient_group(spec, db)?;
            let mut trace = Trace::default();
            let mut gens = Vec::new();
            let a2 = spec.a.entry(0, 1);
            if !a2.iter().all(Term::is_zero_syntactic) {
                let x2 = spec.b.row_space().summands[1];
                let g = db.lookup_sphere_group(spec.u_sphere() + 1, x2)?;
                for be in &g.basis {
                    let chain = be.kind.chain().suspend(spec.n)?;
                    let mut sum = Vec::new();
                    for t in a2 {
                        if !t.is_zero_syntactic() {
                            sum.push(t.compose(&chain)?);
                        }
                    }
                    if !sum.is_empty() {
                        gens.push(Normalizer::new(db).normalize_sum(sum, &mut trace)?);
                    }
                }
            }
            Ok(RewriteResult {
                reduced,
                extra: Some(Subgroup::span(ambient, gens)?),
            })
        }
        CornerCase::B12Zero => {
            zero_ok(spec.b.is_zero_entry(0, 1), "b12")?;
            let b = spec.b.submatrix(&[0, 1], &[0])?;
            let c = spec.c.submatrix(&[0], &[0])?;
            let reduced = BracketSpec::new(spec.a.clone(), b, c, spec.n)?;
            // Extra summand [Sigma^(n+1) Y2, W] . Sigma^(n+1) c2.
            let ambient = ambient_group(spec, db)?;
            let mut trace = Trace::default();
            let mut gens = Vec::new();
            let c2 = spec.c.entry(1, 0);
            if !c2.iter().all(Term::is_zero_syntactic) {
                let y2 = spec.b.col_space().summands[1];
                let g = db.lookup_sphere_group(y2 + spec.n + 1, spec.w_sphere())?;
                for be in &g.basis {
                    let mut sum = Vec::new();
                    for t in c2 {
                        if !t.is_zero_syntactic() {
                            sum.push(be.kind.chain().compose(&t.suspend(spec.n + 1)?)?);
                        }
                    }
                    if !sum.is_empty() {
                        gens.push(Normalizer::new(db).normalize_sum(sum, &mut trace)?);
                    }
                }
            }
            Ok(RewriteResult {
                reduced,
                extra: Some(Subgroup::span(ambient, gens)?),
            })
        }
    }
}

/// Containment-mode reduction at the index-0 view: columns of
/// `Sigma^n b` that vanish as classes are dropped together with their `c`
/// entries, each contributing the right-composition subgroup
/// `[Sigma^(n+1) Y_s, W] . Sigma^(n+1) c_s`; rows whose `a` entry and
/// surviving `b` entries all vanish are dropped. The original bracket is
/// contained in the reduced index-0 bracket plus the extras (the dropped
/// row/column inclusion summands are absorbed by the reduced bracket's own
/// indeterminacy).
#[derive(Debug, Clone)]
pub struct ReduceResult {
    pub reduced: BracketSpec,
    pub extras: Vec<(String, Subgroup)>,
    pub notes: Vec<String>,
}

pub fn reduce_to_plain(spec: &BracketSpec, db: &Database) -> Result<ReduceResult> {
    let mut notes = Vec::new();
    let mut extras: Vec<(String, Subgroup)> = Vec::new();
    let mut trace = Trace::default();
    // Zero columns of Sigma^n b (as classes).
    let mut keep_cols = Vec::new();
    for s in 0..spec.r() {
        let mut all_zero = true;
        for k in 0..spec.ell() {
            let sum: Vec<Term> = spec
                .b
                .entry(k, s)
                .iter()
                .filter(|t| !t.is_zero_syntactic())
                .map(|t| t.suspend(spec.n))
                .collect::<Result<Vec<_>>>()?;
            if sum.is_empty() {
                continue;
            }
            if !Normalizer::new(db).reduces_to_zero(sum, &mut trace)? {
                all_zero = false;
                break;
            }
        }
        if all_zero {
            let y = spec.b.col_space().summands[s];
            notes.push(format!(
                "column {} of Sigma^{}b is O; dropped against [S^{}, S^{}] . Sigma^{}c_{}",
                s + 1,
                spec.n,
                y + spec.n + 1,
                spec.w_sphere(),
                spec.n + 1,
                s + 1
            ));
            let mut gens = Vec::new();
            let c_entry = spec.c.entry(s, 0);
            if !c_entry.iter().all(Term::is_zero_syntactic) {
                let g = db.lookup_sphere_group(y + spec.n + 1, spec.w_sphere())?;
                for be in &g.basis {
                    let mut sum = Vec::new();
                    for t in c_entry {
                        if !t.is_zero_syntactic() {
                            sum.push(be.kind.chain().compose(&t.suspend(spec.n + 1)?)?);
                        }
                    }
                    if !sum.is_empty() {
                        gens.push(Normalizer::new(db).normalize_sum(sum, &mut trace)?);
                    }
                }
            }
            extras.push((
                format!(
                    "[S^{}, S^{}] . Sigma^{}c_{}",
                    y + spec.n + 1,
                    spec.w_sphere(),
                    spec.n + 1,
                    s + 1
                ),
                span_or_zero_witness(db, spec.ambient_deg(), spec.w_sphere(), gens)?,
            ));
        } else {
            keep_cols.push(s);
        }
    }
    if keep_cols.is_empty() {
        return Err(Error::NotExpressible(
            "every column of the middle matrix vanishes; nothing remains to reduce to".into(),
        ));
    }
    // Rows with zero a entry and zero surviving b entries.
    let mut keep_rows = Vec::new();
    for k in 0..spec.ell() {
        let a_zero = spec.a.is_zero_entry(0, k);
        let b_zero = keep_cols.iter().all(|&s| {
            let sum: Vec<Term> = spec
                .b
                .entry(k, s)
                .iter()
                .filter(|t| !t.is_zero_syntactic())
                .map(|t| t.suspend(spec.n))
                .collect::<Result<Vec<_>>>()
                .unwrap_or_default();
            sum.is_empty()
                || Normalizer::new(db)
                    .reduces_to_zero(sum, &mut Trace::default())
                    .unwrap_or(false)
        });
        if a_zero && b_zero {
            notes.push(format!(
                "row {} is degenerate (zero a entry and zero column rests); dropped",
                k + 1
            ));
        } else {
            keep_rows.push(k);
        }
    }
    if keep_rows.is_empty() {
        return Err(Error::NotExpressible("every row is degenerate".into()));
    }
    // Assemble the index-0 view of what survives.
    let a = spec.a.submatrix(&[0], &keep_rows)?;
    let b = spec.b.submatrix(&keep_rows, &keep_cols)?.suspend(spec.n)?;
    let c = spec.c.submatrix(&keep_cols, &[0])?.suspend(spec.n)?;
    let reduced = BracketSpec::new(a, b, c, 0)?;
    Ok(ReduceResult {
        reduced,
        extras,
        notes,
    })
}

/// `span`, for callers holding raw elements.
pub fn span(ambient: Arc<GroupPresentation>, gens: Vec<Element>) -> Result<Subgroup> {
    Subgroup::span(ambient, gens)
}

/// Split on a separator at bracket nesting depth zero.
fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' | '{' => depth += 1,
            ']' | '}' => depth = depth.saturating_sub(1),
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

/// Parse a bracket literal `{ [row] ; [matrix] ; [column] }_n`. The three
/// factors share one grammar; zero entries take their spheres from their
/// row/column mates and from the chained factors.
pub fn parse_spec(input: &str, gens: &dyn crate::term::GenLookup) -> Result<BracketSpec> {
    let s = input.trim();
    let (body, idx) = s
        .rsplit_once("}_")
        .ok_or_else(|| Error::Shape(format!("bracket literal `{s}` must end in `}}_n`")))?;
    let n: u32 = idx
        .trim()
        .parse()
        .map_err(|_| Error::Shape(format!("bad bracket index `{idx}`")))?;
    let body = body
        .trim()
        .strip_prefix('{')
        .ok_or_else(|| Error::Shape("bracket literal must start with `{`".into()))?;
    let factors = split_top_level(body, ';');
    if factors.len() != 3 {
        return Err(Error::Shape(format!(
            "bracket literal needs three factors separated by `;`, found {}",
            factors.len()
        )));
    }
    let a = crate::wedge::parse_matrix_grid(factors[0], gens)?;
    let b = crate::wedge::parse_matrix_grid(factors[1], gens)?;
    let c = crate::wedge::parse_matrix_grid(factors[2], gens)?;
    if a.rows != 1 {
        return Err(Error::Shape("the first factor must be a single row".into()));
    }
    if c.cols != 1 {
        return Err(Error::Shape(
            "the last factor must be a single column".into(),
        ));
    }
    let (ell, r) = (b.rows, b.cols);
    if a.cols != ell || c.rows != r {
        return Err(Error::Shape(format!(
            "shapes do not chain: row 1x{}, matrix {ell}x{r}, column {}x1",
            a.cols, c.rows
        )));
    }
    // W from any nonzero row entry.
    let w = a.row_cod(0).ok_or_else(|| {
        Error::Shape("cannot infer the target sphere: the row is all zero".into())
    })?;
    // X_k from the row (minus n) or from the middle matrix.
    let mut xs = Vec::with_capacity(ell);
    for k in 0..ell {
        let from_a = a
            .entry(0, k)
            .as_ref()
            .map(|ts| ts[0].dom().checked_sub(n))
            .flatten();
        let from_b = b.row_cod(k);
        let x = from_a.or(from_b).ok_or_else(|| {
            Error::Shape(format!("cannot infer wedge summand X_{} (column {k} of the row and row {k} of the matrix are zero)", k + 1))
        })?;
        xs.push(x);
    }
    // Y_s from the middle matrix or the column.
    let mut ys = Vec::with_capacity(r);
    for s_idx in 0..r {
        let y = b
            .col_dom(s_idx)
            .or_else(|| c.entry(s_idx, 0).as_ref().map(|ts| ts[0].cod()))
            .ok_or_else(|| Error::Shape(format!("cannot infer wedge summand Y_{}", s_idx + 1)))?;
        ys.push(y);
    }
    // U from any nonzero column entry.
    let u = (0..r)
        .find_map(|s_idx| c.entry(s_idx, 0).as_ref().map(|ts| ts[0].dom()))
        .ok_or_else(|| {
            Error::Shape("cannot infer the source sphere: the column is all zero".into())
        })?;
    let a_mat = a.into_matrix(
        WedgeSpace::sphere(w),
        WedgeSpace::new(xs.iter().map(|x| x + n).collect())?,
    )?;
    let b_mat = b.into_matrix(WedgeSpace::new(xs)?, WedgeSpace::new(ys.clone())?)?;
    let c_mat = c.into_matrix(WedgeSpace::new(ys)?, WedgeSpace::sphere(u))?;
    BracketSpec::new(a_mat, b_mat, c_mat, n)
}

/// Helper: `Ord`-friendly label for a subgroup order.
pub fn render_order(o: Option<u128>) -> String {
    match o {
        Some(v) => v.to_string(),
        None => "infinite".to_string(),
    }
}

/// Order of an element inside its group (`None` = infinite).
pub fn element_order(e: &Element) -> Option<u128> {
    let mut order: u128 = 1;
    for (c, b) in e.coords.iter().zip(e.group.basis.iter()) {
        if *c == 0 {
            continue;
        }
        match b.order {
            Order::Inf => return None,
            Order::Pow2(exp) => {
                let v = (*c as i128).trailing_zeros().min(exp);
                order = order.max(1u128 << (exp - v));
            }
        }
    }
    Some(order)
}
