//! Formal matrices of chains between wedges of spheres, and homotopy groups
//! of wedges through the truncated Hilton decomposition.
//!
//! A matrix entry is a formal sum of terms (the empty sum is the zero
//! class), so products can be carried around unexpanded exactly the way the
//! row-times-column calculus writes them.

use std::fmt;
use std::sync::Arc;

use crate::db::Database;
use crate::error::{Error, Result};
use crate::group::{BasisEntry, BasisKind, Element, GroupPresentation, Provenance, Target};
use crate::normalize::{Normalizer, Trace};
use crate::term::{render_sum, Term};

/// A wedge of spheres. The ambient suspension is applied eagerly, so the
/// summand indices always include it; the level is bookkeeping only and
/// does not enter equality.
#[derive(Debug, Clone, Eq)]
pub struct WedgeSpace {
    pub summands: Vec<u32>,
    pub suspension_level: u32,
}

impl PartialEq for WedgeSpace {
    fn eq(&self, other: &Self) -> bool {
        self.summands == other.summands
    }
}

impl WedgeSpace {
    pub fn new(summands: Vec<u32>) -> Result<WedgeSpace> {
        if summands.is_empty() {
            return Err(Error::Shape("a wedge needs at least one summand".into()));
        }
        Ok(WedgeSpace {
            summands,
            suspension_level: 0,
        })
    }

    pub fn sphere(n: u32) -> WedgeSpace {
        WedgeSpace {
            summands: vec![n],
            suspension_level: 0,
        }
    }

    pub fn suspend(&self, k: u32) -> WedgeSpace {
        WedgeSpace {
            summands: self.summands.iter().map(|n| n + k).collect(),
            suspension_level: self.suspension_level + k,
        }
    }

    pub fn is_sphere(&self) -> bool {
        self.summands.len() == 1
    }

    pub fn target(&self) -> Target {
        if self.is_sphere() {
            Target::Sphere(self.summands[0])
        } else {
            Target::Wedge(self.summands.clone())
        }
    }
}

impl fmt::Display for WedgeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.summands.iter().map(|n| format!("S^{n}")).collect();
        write!(f, "{}", parts.join(" v "))
    }
}

/// An `l x r` array of formal sums of chains between wedges of spheres.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalMatrix {
    rows: usize,
    cols: usize,
    /// Row-major; an empty sum is the zero entry.
    entries: Vec<Vec<Term>>,
    row_space: WedgeSpace,
    col_space: WedgeSpace,
}

impl FormalMatrix {
    pub fn new(
        row_space: WedgeSpace,
        col_space: WedgeSpace,
        entries: Vec<Vec<Term>>,
    ) -> Result<FormalMatrix> {
        let (rows, cols) = (row_space.summands.len(), col_space.summands.len());
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {rows} x {cols} = {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        for (pos, sum) in entries.iter().enumerate() {
            let (i, j) = (pos / cols, pos % cols);
            for t in sum {
                if t.cod() != row_space.summands[i] || t.dom() != col_space.summands[j] {
                    return Err(Error::Shape(format!(
                        "entry ({i},{j}) `{t}` should map S^{} -> S^{}",
                        col_space.summands[j], row_space.summands[i]
                    )));
                }
            }
        }
        Ok(FormalMatrix {
            rows,
            cols,
            entries,
            row_space,
            col_space,
        })
    }

    pub fn single(term: Term) -> FormalMatrix {
        let row_space = WedgeSpace::sphere(term.cod());
        let col_space = WedgeSpace::sphere(term.dom());
        FormalMatrix {
            rows: 1,
            cols: 1,
            entries: vec![vec![term]],
            row_space,
            col_space,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn row_space(&self) -> &WedgeSpace {
        &self.row_space
    }
    pub fn col_space(&self) -> &WedgeSpace {
        &self.col_space
    }

    pub fn entry(&self, i: usize, j: usize) -> &[Term] {
        &self.entries[i * self.cols + j]
    }

    pub fn is_zero_entry(&self, i: usize, j: usize) -> bool {
        self.entry(i, j).iter().all(Term::is_zero_syntactic)
    }

    /// Column `s` as an `l x 1` matrix.
    pub fn column(&self, s: usize) -> FormalMatrix {
        let entries: Vec<Vec<Term>> = (0..self.rows).map(|k| self.entry(k, s).to_vec()).collect();
        FormalMatrix {
            rows: self.rows,
            cols: 1,
            entries,
            row_space: self.row_space.clone(),
            col_space: WedgeSpace::sphere(self.col_space.summands[s]),
        }
    }

    /// Keep the given rows and columns (for degenerate-shape rewrites).
    pub fn submatrix(&self, keep_rows: &[usize], keep_cols: &[usize]) -> Result<FormalMatrix> {
        let row_space = WedgeSpace::new(
            keep_rows
                .iter()
                .map(|&i| self.row_space.summands[i])
                .collect(),
        )?;
        let col_space = WedgeSpace::new(
            keep_cols
                .iter()
                .map(|&j| self.col_space.summands[j])
                .collect(),
        )?;
        let mut entries = Vec::new();
        for &i in keep_rows {
            for &j in keep_cols {
                entries.push(self.entry(i, j).to_vec());
            }
        }
        FormalMatrix::new(row_space, col_space, entries)
    }

    pub fn suspend(&self, k: u32) -> Result<FormalMatrix> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for sum in &self.entries {
            entries.push(
                sum.iter()
                    .map(|t| t.suspend(k))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        FormalMatrix::new(
            self.row_space.suspend(k),
            self.col_space.suspend(k),
            entries,
        )
    }

    pub fn desuspend(&self, k: u32) -> Result<FormalMatrix> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for sum in &self.entries {
            entries.push(
                sum.iter()
                    .map(|t| t.desuspend(k))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let rs = WedgeSpace {
            summands: self.row_space.summands.iter().map(|n| n - k).collect(),
            suspension_level: self.row_space.suspension_level.saturating_sub(k),
        };
        let cs = WedgeSpace {
            summands: self.col_space.summands.iter().map(|n| n - k).collect(),
            suspension_level: self.col_space.suspension_level.saturating_sub(k),
        };
        FormalMatrix::new(rs, cs, entries)
    }

    /// Whether every term of every entry is (syntactically) a suspension.
    pub fn all_entries_suspensions(&self) -> bool {
        self.entries
            .iter()
            .flatten()
            .all(|t| t.is_zero_syntactic() || t.is_suspension())
    }
}

impl fmt::Display for FormalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut rows = Vec::new();
        for i in 0..self.rows {
            let cols: Vec<String> = (0..self.cols)
                .map(|j| render_sum(self.entry(i, j)))
                .collect();
            rows.push(cols.join(", "));
        }
        write!(f, "[{}]", rows.join(" ; "))
    }
}

/// Formal matrix product. The multiplication corresponds to composition of
/// the wedge classes when the left factor is a single row (post-composition
/// is always additive), or when every entry of the right factor is a
/// suspension, or degenerately when every dot product has at most one
/// nonzero addend.
pub fn matrix_compose(db: &Database, a: &FormalMatrix, b: &FormalMatrix) -> Result<FormalMatrix> {
    if a.col_space.summands != b.row_space.summands {
        return Err(Error::Shape(format!(
            "column space {} does not match row space {}",
            a.col_space, b.row_space
        )));
    }
    let meaningful = a.rows == 1
        || b.entries
            .iter()
            .flatten()
            .all(|t| t.is_zero_syntactic() || t.is_suspension())
        || (0..a.rows).all(|i| {
            (0..b.cols).all(|j| {
                (0..a.cols)
                    .filter(|&k| !a.is_zero_entry(i, k) && !b.is_zero_entry(k, j))
                    .count()
                    <= 1
            })
        });
    if !meaningful {
        return Err(Error::ProductNotMeaningful(
            "right factor entries are not suspensions and the sums do not collapse".into(),
        ));
    }
    let _ = db;
    let mut entries: Vec<Vec<Term>> = Vec::with_capacity(a.rows * b.cols);
    for i in 0..a.rows {
        for j in 0..b.cols {
            let mut sum: Vec<Term> = Vec::new();
            for k in 0..a.cols {
                for ta in a.entry(i, k) {
                    if ta.is_zero_syntactic() {
                        continue;
                    }
                    for tb in b.entry(k, j) {
                        if tb.is_zero_syntactic() {
                            continue;
                        }
                        // Distributing a left-factor sum over a
                        // non-suspension right term is not additive.
                        if a.entry(i, k).len() >= 2 && !tb.is_suspension() {
                            return Err(Error::ProductNotMeaningful(format!(
                                "entry ({i},{k}) is a sum and `{tb}` is not a suspension"
                            )));
                        }
                        sum.push(ta.compose(tb)?);
                    }
                }
            }
            entries.push(sum);
        }
    }
    FormalMatrix::new(a.row_space.clone(), b.col_space.clone(), entries)
}

/// Two formal matrices are equal when corresponding entries normalize to
/// equal classes.
pub fn matrices_equal(db: &Database, a: &FormalMatrix, b: &FormalMatrix) -> Result<bool> {
    if a.rows != b.rows || a.cols != b.cols {
        return Ok(false);
    }
    for i in 0..a.rows {
        for j in 0..a.cols {
            let mut norm = Normalizer::new(db);
            let mut trace = Trace::default();
            let mut sum: Vec<Term> = a.entry(i, j).to_vec();
            sum.extend(b.entry(i, j).iter().map(|t| t.scalar_mul(-1)));
            let sum: Vec<Term> = sum.into_iter().filter(|t| !t.is_zero_syntactic()).collect();
            if sum.is_empty() {
                continue;
            }
            let reduced = norm.reduce_sum(sum, &mut trace)?;
            if reduced.is_empty() {
                continue;
            }
            // Not syntactically zero; decide in the target group.
            match Normalizer::new(db).normalize_sum(reduced, &mut trace) {
                Ok(e) if e.is_zero() => continue,
                Ok(_) => return Ok(false),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(true)
}

/// A basic product of wedge summands in the Hall enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Product {
    Leaf(usize),
    Node(Box<Product>, Box<Product>),
}

impl Product {
    /// Sphere dimension of the associated Hilton factor.
    fn dim(&self, summands: &[u32]) -> u32 {
        match self {
            Product::Leaf(i) => summands[*i],
            Product::Node(a, b) => a.dim(summands) + b.dim(summands) - 1,
        }
    }
    fn label(&self) -> String {
        match self {
            Product::Leaf(i) => format!("j{}", i + 1),
            Product::Node(a, b) => format!("[{},{}]", a.label(), b.label()),
        }
    }
}

/// Left-normed basic products of the given weight on `k` generators, in the
/// standard Hall order. Weight 2 yields the pairs `[j_a, j_b]` with `a < b`;
/// higher weights iterate the left factor.
fn basic_products(k: usize, weight: u32) -> Vec<Product> {
    match weight {
        0 => Vec::new(),
        1 => (0..k).map(Product::Leaf).collect(),
        2 => {
            let mut out = Vec::new();
            for a in 0..k {
                for b in (a + 1)..k {
                    out.push(Product::Node(
                        Box::new(Product::Leaf(a)),
                        Box::new(Product::Leaf(b)),
                    ));
                }
            }
            out
        }
        w => {
            // [p, x] with p basic of weight w-1 and x a generator at least
            // the smallest leaf of p (left-normed Hall convention).
            let mut out = Vec::new();
            for p in basic_products(k, w - 1) {
                let floor = match &p {
                    Product::Node(a, _) => match a.as_ref() {
                        Product::Leaf(i) => *i,
                        _ => 0,
                    },
                    Product::Leaf(i) => *i,
                };
                for x in floor..k {
                    out.push(Product::Node(
                        Box::new(p.clone()),
                        Box::new(Product::Leaf(x)),
                    ));
                }
            }
            out
        }
    }
}

/// `pi_N` of a wedge of spheres by the Hilton decomposition, truncated when
/// the basic-product sphere exceeds `N` (its `pi_N` vanishes by
/// connectivity). Every included block must be in the database.
pub fn wedge_group(db: &Database, deg: u32, space: &WedgeSpace) -> Result<Arc<GroupPresentation>> {
    if space.is_sphere() {
        return db.lookup_sphere_group(deg, space.summands[0]);
    }
    let k = space.summands.len();
    let mut basis: Vec<BasisEntry> = Vec::new();
    for (idx, &dim) in space.summands.iter().enumerate() {
        let g = db.lookup_sphere_group(deg, dim)?;
        for b in &g.basis {
            basis.push(BasisEntry {
                label: format!("j{}.{}", idx + 1, b.label),
                kind: BasisKind::Summand {
                    idx,
                    chain: b.kind.chain().clone(),
                },
                order: b.order,
            });
        }
    }
    let min_dim = *space.summands.iter().min().unwrap();
    let mut weight = 2u32;
    // Minimal dimension at weight w is w*(min-1)+1, strictly increasing.
    while weight * (min_dim - 1) + 1 <= deg {
        for p in basic_products(k, weight) {
            let dim = p.dim(&space.summands);
            if dim > deg {
                // Truncation is sound: pi_deg(S^dim) = 0 by connectivity.
                continue;
            }
            let g = db.lookup_sphere_group(deg, dim)?;
            if g.is_trivial() {
                continue;
            }
            match &p {
                Product::Node(a, b) => match (a.as_ref(), b.as_ref()) {
                    (Product::Leaf(l), Product::Leaf(r)) => {
                        for be in &g.basis {
                            basis.push(BasisEntry {
                                label: format!("{}.{}", p.label(), be.label),
                                kind: BasisKind::Product {
                                    left: *l,
                                    right: *r,
                                    chain: be.kind.chain().clone(),
                                },
                                order: be.order,
                            });
                        }
                    }
                    _ => {
                        return Err(Error::NotExpressible(format!(
                            "basic product {} of weight {weight} carries a nontrivial group; \
                             only weight-2 product blocks are modeled",
                            p.label()
                        )))
                    }
                },
                Product::Leaf(_) => unreachable!(),
            }
        }
        weight += 1;
    }
    Ok(Arc::new(GroupPresentation {
        deg,
        target: space.target(),
        basis,
        citation: "Hilton decomposition over stored sphere groups".into(),
        provenance: Provenance::Wedge,
    }))
}

/// Images of the basis of a wedge (or sphere) group under composition with a
/// `1 x l` row, the basis chains suspended `susp` times first:
/// `row . Sigma^susp(j_k . x) = row_k . Sigma^susp(x)` and
/// `row . Sigma^susp([j_p, j_q] . x) = [row_p, row_q] . Sigma^susp(x)`,
/// the latter through a stored Whitehead instance.
pub fn image_through_row(
    db: &Database,
    row: &FormalMatrix,
    group: &GroupPresentation,
    susp: u32,
    trace: &mut Trace,
) -> Result<Vec<Element>> {
    if row.rows() != 1 {
        return Err(Error::Shape("image_through_row needs a 1 x l row".into()));
    }
    let mut out = Vec::new();
    for be in &group.basis {
        let terms: Vec<Term> = match &be.kind {
            BasisKind::Chain(chain) => {
                // Sphere-target group: the row must be 1 x 1.
                if row.cols() != 1 {
                    return Err(Error::Shape(format!(
                        "row has {} columns but the group target is a sphere",
                        row.cols()
                    )));
                }
                let x = chain.suspend(susp)?;
                row.entry(0, 0)
                    .iter()
                    .filter(|t| !t.is_zero_syntactic())
                    .map(|t| t.compose(&x))
                    .collect::<Result<Vec<_>>>()?
            }
            BasisKind::Summand { idx, chain } => {
                let x = chain.suspend(susp)?;
                row.entry(0, *idx)
                    .iter()
                    .filter(|t| !t.is_zero_syntactic())
                    .map(|t| t.compose(&x))
                    .collect::<Result<Vec<_>>>()?
            }
            BasisKind::Product { left, right, chain } => {
                let l = row.entry(0, *left);
                let r = row.entry(0, *right);
                if susp >= 1 {
                    // Sigma^susp ([j_p, j_q] . x) = 0: Whitehead products lie
                    // in the kernel of suspension, so the block contributes
                    // nothing once the group is suspended.
                    Vec::new()
                } else if l.iter().all(Term::is_zero_syntactic)
                    || r.iter().all(Term::is_zero_syntactic)
                {
                    Vec::new()
                } else {
                    let (lt, rt) = match (l, r) {
                        ([lt], [rt]) => (lt, rt),
                        _ => {
                            return Err(Error::MissingWhiteheadRelation(
                                render_sum(l),
                                render_sum(r),
                            ))
                        }
                    };
                    let w = db.whitehead_instance(lt, rt).ok_or_else(|| {
                        Error::MissingWhiteheadRelation(lt.to_string(), rt.to_string())
                    })?;
                    trace.push_whitehead(&w.citation, lt, rt);
                    vec![w.rhs.compose(&chain.suspend(susp)?)?]
                }
            }
        };
        if terms.is_empty() {
            continue;
        }
        let mut norm = Normalizer::new(db);
        let e = norm.normalize_sum(terms, trace)?;
        out.push(e);
    }
    Ok(out)
}

/// A parsed matrix literal before shape inference: `None` entries are the
/// bare `0` whose spheres are fixed by their row and column mates.
#[derive(Debug, Clone)]
pub struct MatrixGrid {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Option<Vec<Term>>>,
}

/// Parse `[a, b ; c, d]`: rows separated by `;`, entries by `,`, each entry
/// a `+`-joined chain sum or `0`.
pub fn parse_matrix_grid(input: &str, gens: &dyn crate::term::GenLookup) -> Result<MatrixGrid> {
    let s = input.trim();
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Shape(format!("matrix literal `{s}` must be bracketed")))?;
    let mut entries: Vec<Option<Vec<Term>>> = Vec::new();
    let mut cols = None;
    let row_strs: Vec<&str> = inner.split(';').collect();
    for row in &row_strs {
        let cells: Vec<&str> = row.split(',').collect();
        match cols {
            None => cols = Some(cells.len()),
            Some(c) if c == cells.len() => {}
            Some(c) => {
                return Err(Error::Shape(format!(
                    "ragged matrix literal: row has {} entries, expected {c}",
                    cells.len()
                )))
            }
        }
        for cell in cells {
            let cell = cell.trim();
            if cell == "0" {
                entries.push(None);
            } else {
                entries.push(Some(crate::term::parse_sum(cell, gens)?));
            }
        }
    }
    Ok(MatrixGrid {
        rows: row_strs.len(),
        cols: cols.unwrap_or(0),
        entries,
    })
}

impl MatrixGrid {
    pub fn entry(&self, i: usize, j: usize) -> &Option<Vec<Term>> {
        &self.entries[i * self.cols + j]
    }

    /// Resolve into a matrix between the given spaces, zero entries included.
    pub fn into_matrix(self, row_space: WedgeSpace, col_space: WedgeSpace) -> Result<FormalMatrix> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for e in self.entries {
            entries.push(e.unwrap_or_default());
        }
        FormalMatrix::new(row_space, col_space, entries)
    }

    /// Codomain sphere of some nonzero entry in row `i`.
    pub fn row_cod(&self, i: usize) -> Option<u32> {
        (0..self.cols).find_map(|j| self.entry(i, j).as_ref().map(|ts| ts[0].cod()))
    }

    /// Domain sphere of some nonzero entry in column `j`.
    pub fn col_dom(&self, j: usize) -> Option<u32> {
        (0..self.rows).find_map(|i| self.entry(i, j).as_ref().map(|ts| ts[0].dom()))
    }
}

impl Trace {
    fn push_whitehead(&mut self, citation: &str, l: &Term, r: &Term) {
        let step = crate::normalize::TraceStep {
            rule: format!("whitehead [{l}, {r}]"),
            citation: citation.to_string(),
        };
        if !self.steps.contains(&step) {
            self.steps.push(step);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hall_counts_match_the_free_lie_dimensions() {
        assert_eq!(basic_products(2, 2).len(), 1);
        assert_eq!(basic_products(2, 3).len(), 2);
        assert_eq!(basic_products(3, 2).len(), 3);
    }

    #[test]
    fn basic_product_dims_drop_one_per_bracket() {
        let summands = vec![14, 20];
        let p = &basic_products(2, 2)[0];
        assert_eq!(p.dim(&summands), 33);
        assert_eq!(p.label(), "[j1,j2]");
        for q in basic_products(2, 3) {
            assert!(q.dim(&summands) >= 46);
        }
    }
}
