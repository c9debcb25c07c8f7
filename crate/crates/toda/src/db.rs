//! The curated database: generators, group presentations, composition
//! relations, Whitehead-product instances, EHP images, and suspension-
//! surjectivity flags.
//!
//! The on-disk format is line oriented, `#` comments, fields whitespace
//! separated, the citation being the remainder of the line:
//!
//! ```text
//! gen   <name> <birth> <stem> <order|inf> <citation>
//! group pi <N> S <m> basis <chain:order ...|(none)> <citation>
//! rel   <lhs> = <rhs-sum|0> min <m> [sign-unknown] <citation>
//! wrel  <left> <right> = <chain> <citation>
//! ehp   <m> <N> <E|H|P> <basis-chain> -> <image-sum|0> <citation>
//! susp  pi <N> S <m> <citation>
//! ```
//!
//! Chains use the shared term grammar (`eta_13.omega_14.nu_30`, coefficients
//! as `4*zeta_21`, `w_n` for Whitehead squares, `iota_n` for identities).
//! Sums inside one field are written without spaces: `nubar_10+epsilon_10`.
//! A coefficient written anywhere in a relation's left-hand side scales the
//! whole left-hand class.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{BasisEntry, BasisKind, GroupPresentation, Order, Provenance, Target};
use crate::term::{parse_chain, Atom, GenInfo, GenLookup, Piece, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorRecord {
    pub name: String,
    pub birth_sphere: u32,
    pub stem: u32,
    pub order: Order,
    pub citation: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationRecord {
    /// The left-hand class is `lhs_coeff * lhs_chain`.
    pub lhs_coeff: i64,
    /// Atom pattern at the minimal valid subscripts (no scalar pieces).
    pub lhs_atoms: Vec<Piece>,
    pub lhs_cod: u32,
    /// Formal sum; empty means the left side is zero.
    pub rhs: Vec<Term>,
    pub min_subscript: u32,
    pub sign_unknown: bool,
    pub citation: String,
}

impl RelationRecord {
    pub fn render_lhs(&self) -> String {
        let t = Term::new(self.lhs_cod, self.lhs_atoms.clone()).expect("validated at load");
        if self.lhs_coeff == 1 {
            t.to_string()
        } else {
            format!("{}*{}", self.lhs_coeff, t)
        }
    }
}

/// One instance `[left, right] = rhs` of a Whitehead product of single
/// generator classes on a common sphere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhiteheadRelation {
    pub left: Term,
    pub right: Term,
    pub rhs: Term,
    pub citation: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EhpMap {
    E,
    H,
    P,
}

impl EhpMap {
    pub fn letter(self) -> &'static str {
        match self {
            EhpMap::E => "E",
            EhpMap::H => "H",
            EhpMap::P => "P",
        }
    }
}

/// `basis |-> image` line for one map at one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EhpImage {
    pub map: EhpMap,
    pub basis_chain: Term,
    /// Formal sum of chains in the map's target group; empty = 0.
    pub image: Vec<Term>,
    pub citation: String,
}

/// All stored images at the node `(m, N)`:
/// `E : pi_N(S^m) -> pi_(N+1)(S^(m+1))`,
/// `H : pi_(N+1)(S^(m+1)) -> pi_(N+1)(S^(2m+1))`,
/// `P : pi_(N+2)(S^(2m+1)) -> pi_N(S^m)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EhpNodeData {
    pub images: Vec<EhpImage>,
}

impl EhpNodeData {
    pub fn of(&self, map: EhpMap) -> impl Iterator<Item = &EhpImage> {
        self.images.iter().filter(move |i| i.map == map)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Database {
    gens: BTreeMap<String, GeneratorRecord>,
    groups: BTreeMap<(u32, u32), Arc<GroupPresentation>>,
    rels: Vec<RelationRecord>,
    wrels: Vec<WhiteheadRelation>,
    ehp: BTreeMap<(u32, u32), EhpNodeData>,
    susp_flags: BTreeMap<(u32, u32), String>,
}

impl GenLookup for Database {
    fn gen_info(&self, name: &str) -> Option<GenInfo> {
        self.gens.get(name).map(|g| GenInfo {
            birth: g.birth_sphere,
            stem: g.stem,
        })
    }
}

impl Database {
    pub fn generators(&self) -> impl Iterator<Item = &GeneratorRecord> {
        self.gens.values()
    }
    pub fn generator(&self, name: &str) -> Option<&GeneratorRecord> {
        self.gens.get(name)
    }
    pub fn relations(&self) -> &[RelationRecord] {
        &self.rels
    }
    pub fn whitehead_relations(&self) -> &[WhiteheadRelation] {
        &self.wrels
    }
    pub fn ehp_nodes(&self) -> impl Iterator<Item = (&(u32, u32), &EhpNodeData)> {
        self.ehp.iter()
    }
    pub fn ehp_node(&self, m: u32, deg: u32) -> Option<&EhpNodeData> {
        self.ehp.get(&(m, deg))
    }
    pub fn stored_groups(&self) -> impl Iterator<Item = &Arc<GroupPresentation>> {
        self.groups.values()
    }
    /// Citation for a flag that every element of `pi_deg(S^m)` is a
    /// suspension, when the database asserts it.
    pub fn all_suspensions(&self, deg: u32, sphere: u32) -> Option<&str> {
        if deg < 2 * sphere - 1 {
            // Below the first Whitehead obstruction the suspension map is
            // onto by Freudenthal.
            return Some("Freudenthal range");
        }
        self.susp_flags.get(&(deg, sphere)).map(String::as_str)
    }

    /// Stored `pi_deg(S^sphere)`, the trivial group below connectivity, or
    /// the degree-theory `Z{iota_n}` on the diagonal.
    pub fn lookup_sphere_group(&self, deg: u32, sphere: u32) -> Result<Arc<GroupPresentation>> {
        if deg < sphere {
            return Ok(Arc::new(GroupPresentation::trivial(
                deg,
                sphere,
                Provenance::Connectivity,
            )));
        }
        if let Some(g) = self.groups.get(&(deg, sphere)) {
            return Ok(Arc::clone(g));
        }
        if deg == sphere {
            return Ok(Arc::new(GroupPresentation {
                deg,
                target: Target::Sphere(sphere),
                basis: vec![BasisEntry {
                    label: format!("iota_{sphere}"),
                    kind: BasisKind::Chain(Term::iota(sphere)),
                    order: Order::Inf,
                }],
                citation: "degree theory".into(),
                provenance: Provenance::Stored,
            }));
        }
        Err(Error::GroupNotInDatabase { deg, sphere })
    }

    pub fn has_sphere_group(&self, deg: u32, sphere: u32) -> bool {
        deg <= sphere || self.groups.contains_key(&(deg, sphere))
    }

    /// Order of the single-atom class at its own sphere, when derivable:
    /// from a stored group containing the atom as a basis chain, else from
    /// the generator record provided the atom sits strictly above its birth
    /// sphere (at birth the table may differ from the family order).
    pub fn atom_order(&self, piece: &Piece) -> Option<Order> {
        match piece {
            Piece::Scalar(_) => None,
            Piece::Whead(n) => {
                let g = self.groups.get(&(2 * n - 1, *n))?;
                g.basis
                    .iter()
                    .find(|b| matches!(&b.kind, BasisKind::Chain(t) if t.pieces() == [Piece::Whead(*n)]))
                    .map(|b| b.order)
            }
            Piece::Gen(a) => {
                if let Some(g) = self.groups.get(&(a.dom(), a.cod())) {
                    if let Some(b) = g.basis.iter().find(|b| match &b.kind {
                        BasisKind::Chain(t) => {
                            t.pieces().len() == 1
                                && matches!(&t.pieces()[0], Piece::Gen(x) if x == a)
                        }
                        _ => false,
                    }) {
                        return Some(b.order);
                    }
                }
                if a.subscript > a.birth {
                    self.gens.get(&a.name).map(|g| g.order)
                } else {
                    None
                }
            }
        }
    }

    /// Find `[left, right]` among the stored Whitehead instances.
    pub fn whitehead_instance(&self, left: &Term, right: &Term) -> Option<&WhiteheadRelation> {
        self.wrels.iter().find(|w| {
            (&w.left == left && &w.right == right) || (&w.left == right && &w.right == left)
        })
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
            && self.groups.is_empty()
            && self.rels.is_empty()
            && self.wrels.is_empty()
            && self.ehp.is_empty()
    }

    /// Canonical text form; `load_database(serialize(db)) == db`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for g in self.gens.values() {
            let _ = writeln!(
                out,
                "gen {} {} {} {} {}",
                g.name, g.birth_sphere, g.stem, g.order, g.citation
            );
        }
        for ((deg, sphere), g) in &self.groups {
            let basis = if g.basis.is_empty() {
                "(none)".to_string()
            } else {
                g.basis
                    .iter()
                    .map(|b| format!("{}:{}", b.label, b.order))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            let _ = writeln!(
                out,
                "group pi {deg} S {sphere} basis {basis} {}",
                g.citation
            );
        }
        for r in &self.rels {
            let rhs = if r.rhs.is_empty() {
                "0".to_string()
            } else {
                r.rhs
                    .iter()
                    .map(Term::to_string)
                    .collect::<Vec<_>>()
                    .join("+")
            };
            let flag = if r.sign_unknown { " sign-unknown" } else { "" };
            let _ = writeln!(
                out,
                "rel {} = {rhs} min {}{flag} {}",
                r.render_lhs(),
                r.min_subscript,
                r.citation
            );
        }
        for w in &self.wrels {
            let _ = writeln!(
                out,
                "wrel {} {} = {} {}",
                w.left, w.right, w.rhs, w.citation
            );
        }
        for ((m, deg), node) in &self.ehp {
            for img in &node.images {
                let image = if img.image.is_empty() {
                    "0".to_string()
                } else {
                    img.image
                        .iter()
                        .map(Term::to_string)
                        .collect::<Vec<_>>()
                        .join("+")
                };
                let _ = writeln!(
                    out,
                    "ehp {m} {deg} {} {} -> {image} {}",
                    img.map.letter(),
                    img.basis_chain,
                    img.citation
                );
            }
        }
        for ((deg, sphere), cit) in &self.susp_flags {
            let _ = writeln!(out, "susp pi {deg} S {sphere} {cit}");
        }
        out
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col: 0,
        msg: msg.into(),
    }
}

fn with_line(e: Error, line: usize) -> Error {
    match e {
        Error::Parse { col, msg, .. } => Error::Parse { line, col, msg },
        // Reference errors keep their own kind (the caller distinguishes
        // unknown generators from plain parse failures).
        e @ (Error::UnknownGenerator(_) | Error::SubscriptBelowBirth { .. }) => e,
        other => perr(line, other.to_string()),
    }
}

/// Parse a database from its structured-text form.
pub fn load_database(source: &str) -> Result<Database> {
    let mut db = Database::default();

    // First pass: generator records, so chains in any later record resolve
    // regardless of file order.
    for (ln, raw) in source.lines().enumerate() {
        let line = ln + 1;
        let text = strip_comment(raw);
        let mut tok = text.split_whitespace();
        if tok.next() == Some("gen") {
            let name = tok
                .next()
                .ok_or_else(|| perr(line, "gen: missing name"))?
                .to_string();
            if name == "iota" || name == "w" {
                return Err(perr(line, format!("`{name}` is reserved chain syntax")));
            }
            let birth: u32 = parse_tok(&mut tok, line, "birth sphere")?;
            let stem: u32 = parse_tok(&mut tok, line, "stem")?;
            let order_tok = tok.next().ok_or_else(|| perr(line, "gen: missing order"))?;
            let order = Order::parse(order_tok).ok_or_else(|| {
                perr(
                    line,
                    format!("order `{order_tok}` must be a power of 2 or inf"),
                )
            })?;
            if birth == 0 {
                return Err(perr(line, "birth sphere must be at least 1"));
            }
            let citation = rest(tok);
            if db.gens.contains_key(&name) {
                return Err(Error::Duplicate {
                    kind: "generator",
                    name,
                });
            }
            db.gens.insert(
                name.clone(),
                GeneratorRecord {
                    name,
                    birth_sphere: birth,
                    stem,
                    order,
                    citation,
                },
            );
        }
    }

    // Second pass: everything else.
    for (ln, raw) in source.lines().enumerate() {
        let line = ln + 1;
        let text = strip_comment(raw);
        let mut tok = text.split_whitespace().peekable();
        let Some(kind) = tok.next() else { continue };
        match kind {
            "gen" => {}
            "group" => {
                expect(&mut tok, "pi", line)?;
                let deg: u32 = parse_tok(&mut tok, line, "degree")?;
                expect(&mut tok, "S", line)?;
                let sphere: u32 = parse_tok(&mut tok, line, "sphere")?;
                expect(&mut tok, "basis", line)?;
                let mut basis: Vec<BasisEntry> = Vec::new();
                let mut citation_parts: Vec<&str> = Vec::new();
                let mut in_citation = false;
                for t in tok.by_ref() {
                    if in_citation {
                        citation_parts.push(t);
                        continue;
                    }
                    if t == "(none)" {
                        in_citation = true;
                        continue;
                    }
                    if let Some((chain_s, order_s)) = t.rsplit_once(':') {
                        if let Some(order) = Order::parse(order_s) {
                            let chain =
                                parse_chain(chain_s, &db).map_err(|e| with_line(e, line))?;
                            if chain.cod() != sphere || chain.dom() != deg {
                                return Err(perr(
                                    line,
                                    format!(
                                        "basis chain `{chain_s}` has degree pi_{}(S^{}), record says pi_{deg}(S^{sphere})",
                                        chain.dom(),
                                        chain.cod()
                                    ),
                                ));
                            }
                            if basis.iter().any(|b| b.label == chain_s) {
                                return Err(perr(
                                    line,
                                    format!("duplicate basis element `{chain_s}`"),
                                ));
                            }
                            basis.push(BasisEntry {
                                label: chain_s.to_string(),
                                kind: BasisKind::Chain(chain),
                                order,
                            });
                            continue;
                        }
                    }
                    in_citation = true;
                    citation_parts.push(t);
                }
                let key = (deg, sphere);
                if db.groups.contains_key(&key) {
                    return Err(Error::Duplicate {
                        kind: "group",
                        name: format!("pi {deg} S {sphere}"),
                    });
                }
                if deg < sphere {
                    return Err(perr(
                        line,
                        "group below connectivity would shadow the trivial group",
                    ));
                }
                db.groups.insert(
                    key,
                    Arc::new(GroupPresentation {
                        deg,
                        target: Target::Sphere(sphere),
                        basis,
                        citation: citation_parts.join(" "),
                        provenance: Provenance::Stored,
                    }),
                );
            }
            "rel" => {
                let lhs_s = tok.next().ok_or_else(|| perr(line, "rel: missing lhs"))?;
                expect(&mut tok, "=", line)?;
                let rhs_s = tok.next().ok_or_else(|| perr(line, "rel: missing rhs"))?;
                expect(&mut tok, "min", line)?;
                let min_subscript: u32 = parse_tok(&mut tok, line, "min subscript")?;
                let mut sign_unknown = false;
                if tok.peek() == Some(&"sign-unknown") {
                    sign_unknown = true;
                    tok.next();
                }
                let citation = rest(tok);
                let lhs = parse_chain(lhs_s, &db).map_err(|e| with_line(e, line))?;
                // Fold every scalar in the written lhs into one leading
                // coefficient for the whole class.
                let mut lhs_coeff: i64 = 1;
                let mut lhs_atoms: Vec<Piece> = Vec::new();
                for p in lhs.pieces() {
                    match p {
                        Piece::Scalar(c) => lhs_coeff *= c,
                        other => lhs_atoms.push(other.clone()),
                    }
                }
                if lhs_atoms.is_empty() {
                    return Err(perr(line, "rel lhs must contain at least one atom"));
                }
                if lhs.cod() != min_subscript {
                    return Err(perr(
                        line,
                        format!(
                            "lhs is written at codomain {} but min subscript is {min_subscript}",
                            lhs.cod()
                        ),
                    ));
                }
                let rhs = if rhs_s == "0" {
                    Vec::new()
                } else {
                    crate::term::parse_sum(rhs_s, &db).map_err(|e| with_line(e, line))?
                };
                for t in &rhs {
                    if t.cod() != lhs.cod() || t.dom() != lhs.dom() {
                        return Err(perr(
                            line,
                            format!(
                                "rhs `{t}` lives in pi_{}(S^{}), lhs in pi_{}(S^{})",
                                t.dom(),
                                t.cod(),
                                lhs.dom(),
                                lhs.cod()
                            ),
                        ));
                    }
                }
                db.rels.push(RelationRecord {
                    lhs_coeff,
                    lhs_atoms,
                    lhs_cod: lhs.cod(),
                    rhs,
                    min_subscript,
                    sign_unknown,
                    citation,
                });
            }
            "wrel" => {
                let left_s = tok
                    .next()
                    .ok_or_else(|| perr(line, "wrel: missing left class"))?;
                let right_s = tok
                    .next()
                    .ok_or_else(|| perr(line, "wrel: missing right class"))?;
                expect(&mut tok, "=", line)?;
                let rhs_s = tok.next().ok_or_else(|| perr(line, "wrel: missing rhs"))?;
                let citation = rest(tok);
                let left = parse_chain(left_s, &db).map_err(|e| with_line(e, line))?;
                let right = parse_chain(right_s, &db).map_err(|e| with_line(e, line))?;
                let rhs = parse_chain(rhs_s, &db).map_err(|e| with_line(e, line))?;
                if left.cod() != right.cod() {
                    return Err(perr(
                        line,
                        "whitehead product factors must share a codomain sphere",
                    ));
                }
                let expected_dom = left.dom() + right.dom() - 1;
                if rhs.cod() != left.cod() || rhs.dom() != expected_dom {
                    return Err(perr(
                        line,
                        format!(
                            "[{left_s}, {right_s}] lives in pi_{expected_dom}(S^{}), rhs in pi_{}(S^{})",
                            left.cod(),
                            rhs.dom(),
                            rhs.cod()
                        ),
                    ));
                }
                db.wrels.push(WhiteheadRelation {
                    left,
                    right,
                    rhs,
                    citation,
                });
            }
            "ehp" => {
                let m: u32 = parse_tok(&mut tok, line, "node sphere m")?;
                let deg: u32 = parse_tok(&mut tok, line, "node degree N")?;
                let map_s = tok
                    .next()
                    .ok_or_else(|| perr(line, "ehp: missing map letter"))?;
                let map = match map_s {
                    "E" => EhpMap::E,
                    "H" => EhpMap::H,
                    "P" => EhpMap::P,
                    other => return Err(perr(line, format!("unknown EHP map `{other}`"))),
                };
                let basis_s = tok
                    .next()
                    .ok_or_else(|| perr(line, "ehp: missing basis chain"))?;
                expect(&mut tok, "->", line)?;
                let image_s = tok.next().ok_or_else(|| perr(line, "ehp: missing image"))?;
                let citation = rest(tok);
                let basis_chain = parse_chain(basis_s, &db).map_err(|e| with_line(e, line))?;
                let image = if image_s == "0" {
                    Vec::new()
                } else {
                    crate::term::parse_sum(image_s, &db).map_err(|e| with_line(e, line))?
                };
                // Degree sanity per map.
                let (src, dst) = match map {
                    EhpMap::E => ((deg, m), (deg + 1, m + 1)),
                    EhpMap::H => ((deg + 1, m + 1), (deg + 1, 2 * m + 1)),
                    EhpMap::P => ((deg + 2, 2 * m + 1), (deg, m)),
                };
                if (basis_chain.dom(), basis_chain.cod()) != src {
                    return Err(perr(
                        line,
                        format!(
                            "{} source at node ({m}, {deg}) is pi_{}(S^{}), basis chain is pi_{}(S^{})",
                            map.letter(),
                            src.0,
                            src.1,
                            basis_chain.dom(),
                            basis_chain.cod()
                        ),
                    ));
                }
                for t in &image {
                    if (t.dom(), t.cod()) != dst {
                        return Err(perr(
                            line,
                            format!(
                                "{} image at node ({m}, {deg}) must lie in pi_{}(S^{})",
                                map.letter(),
                                dst.0,
                                dst.1
                            ),
                        ));
                    }
                }
                let node = db.ehp.entry((m, deg)).or_default();
                if node.of(map).any(|i| i.basis_chain == basis_chain) {
                    return Err(Error::Duplicate {
                        kind: "ehp image",
                        name: format!("{} {} at ({m}, {deg})", map.letter(), basis_s),
                    });
                }
                node.images.push(EhpImage {
                    map,
                    basis_chain,
                    image,
                    citation,
                });
            }
            "susp" => {
                expect(&mut tok, "pi", line)?;
                let deg: u32 = parse_tok(&mut tok, line, "degree")?;
                expect(&mut tok, "S", line)?;
                let sphere: u32 = parse_tok(&mut tok, line, "sphere")?;
                let citation = rest(tok);
                db.susp_flags.insert((deg, sphere), citation);
            }
            other => return Err(perr(line, format!("unknown record kind `{other}`"))),
        }
    }

    check_references(&db)?;
    Ok(db)
}

/// Cross-reference checks that do not need the rewrite engine.
fn check_references(db: &Database) -> Result<()> {
    let known: BTreeSet<&str> = db.gens.keys().map(String::as_str).collect();
    let check_term = |t: &Term| -> Result<()> {
        for p in t.pieces() {
            if let Piece::Gen(Atom { name, .. }) = p {
                if !known.contains(name.as_str()) {
                    return Err(Error::UnknownGenerator(name.clone()));
                }
            }
        }
        Ok(())
    };
    for r in &db.rels {
        for p in &r.lhs_atoms {
            check_term(&Term::new(r.lhs_cod, r.lhs_atoms.clone())?)?;
            let _ = p;
        }
        for t in &r.rhs {
            check_term(t)?;
        }
    }
    for g in db.groups.values() {
        for b in &g.basis {
            check_term(b.kind.chain())?;
        }
    }
    Ok(())
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_tok<'a, T: std::str::FromStr>(
    tok: &mut impl Iterator<Item = &'a str>,
    line: usize,
    what: &str,
) -> Result<T> {
    let t = tok
        .next()
        .ok_or_else(|| perr(line, format!("missing {what}")))?;
    t.parse()
        .map_err(|_| perr(line, format!("bad {what} `{t}`")))
}

fn expect<'a>(tok: &mut impl Iterator<Item = &'a str>, want: &str, line: usize) -> Result<()> {
    match tok.next() {
        Some(t) if t == want => Ok(()),
        Some(t) => Err(perr(line, format!("expected `{want}`, found `{t}`"))),
        None => Err(perr(line, format!("expected `{want}`"))),
    }
}

fn rest<'a>(tok: impl Iterator<Item = &'a str>) -> String {
    tok.collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
# tiny fixture
gen eta 2 1 2 T62
gen nu 4 3 8 T62
group pi 9 S 5 basis nu_5.eta_8:2 T62
group pi 21 S 20 basis eta_20:2 T62
rel nu_6.eta_9 = 0 min 6 T62 5.9
susp pi 26 S 9 T62 12.9
";

    #[test]
    fn load_roundtrip() {
        let db = load_database(SMALL).unwrap();
        let text = db.serialize();
        let db2 = load_database(&text).unwrap();
        assert_eq!(db, db2);
    }

    #[test]
    fn empty_stream_is_empty_database() {
        let db = load_database("").unwrap();
        assert!(db.is_empty());
    }

    #[test]
    fn duplicate_generator_rejected() {
        let err = load_database("gen eta 2 1 2 a\ngen eta 2 1 2 b\n").unwrap_err();
        assert!(matches!(
            err,
            Error::Duplicate {
                kind: "generator",
                ..
            }
        ));
    }

    #[test]
    fn relation_referencing_unknown_generator_fails() {
        let err = load_database("rel kappa_7.eta_21 = 0 min 7 x\n").unwrap_err();
        assert!(matches!(err, Error::UnknownGenerator(_)));
    }

    #[test]
    fn degree_mismatch_diagnosed_with_line() {
        let src = "gen eta 2 1 2 a\ngroup pi 9 S 5 basis eta_5:2 bad\n";
        let err = load_database(src).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn connectivity_lookup_is_distinct_from_missing() {
        let db = load_database(SMALL).unwrap();
        let g = db.lookup_sphere_group(12, 13).unwrap();
        assert!(g.is_trivial());
        assert_eq!(g.provenance, Provenance::Connectivity);
        assert!(matches!(
            db.lookup_sphere_group(22, 13),
            Err(Error::GroupNotInDatabase {
                deg: 22,
                sphere: 13
            })
        ));
    }
}
