//! Composition chains of suspended generators between spheres.
//!
//! A term is an integer multiple of a chain `a1 . a2 . ... . at` read left to
//! right from the codomain: `a1` lands on the codomain sphere and each later
//! atom feeds the one before it. Three kinds of pieces occur:
//!
//! * a named generator at a subscript, `eta_13` (codomain `S^13`, domain
//!   determined by the generator's stem),
//! * the Whitehead square `w_n = [iota_n, iota_n] : S^(2n-1) -> S^n`,
//! * a degree map, written as a coefficient on the atom it precedes
//!   (`4*zeta_21` is the class `4 . zeta_21`, i.e. `zeta_21` composed with a
//!   degree-4 map on its domain sphere).
//!
//! Scalars are kept as explicit pieces because a scalar may only migrate
//! across an atom that is a suspension; the rewrite engine in `normalize`
//! moves them. The same grammar is used by the database and the CLI.

use std::fmt;

use crate::error::{Error, Result};

/// Birth sphere and stem of a generator family, resolved at parse time.
pub trait GenLookup {
    fn gen_info(&self, name: &str) -> Option<GenInfo>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenInfo {
    pub birth: u32,
    pub stem: u32,
}

/// A named generator instance `name_subscript`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub name: String,
    pub subscript: u32,
    pub stem: u32,
    pub birth: u32,
}

impl Atom {
    pub fn cod(&self) -> u32 {
        self.subscript
    }
    pub fn dom(&self) -> u32 {
        self.subscript + self.stem
    }
    /// Syntactic suspension test: the instance desuspends at least once.
    pub fn is_suspension(&self) -> bool {
        self.subscript > self.birth
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Piece {
    Gen(Atom),
    /// `w_n`, the Whitehead square on `S^n`.
    Whead(u32),
    /// Degree map on the sphere at this position of the chain.
    Scalar(i64),
}

impl Piece {
    pub fn is_scalar(&self) -> bool {
        matches!(self, Piece::Scalar(_))
    }
    /// Whether a scalar may migrate across this piece (the piece desuspends).
    pub fn scalar_crosses(&self) -> bool {
        match self {
            Piece::Gen(a) => a.is_suspension(),
            Piece::Whead(_) => false,
            Piece::Scalar(_) => true,
        }
    }
}

/// An integer-scaled composition chain between spheres: a class in
/// `pi_dom(S^cod)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    cod: u32,
    dom: u32,
    pieces: Vec<Piece>,
}

impl Term {
    pub fn new(cod: u32, pieces: Vec<Piece>) -> Result<Term> {
        let mut sphere = cod;
        for p in &pieces {
            match p {
                Piece::Gen(a) => {
                    if a.cod() != sphere {
                        return Err(Error::NotComposable {
                            left_dom: sphere,
                            right_cod: a.cod(),
                        });
                    }
                    if a.subscript < a.birth {
                        return Err(Error::SubscriptBelowBirth {
                            name: a.name.clone(),
                            subscript: a.subscript,
                            birth: a.birth,
                        });
                    }
                    sphere = a.dom();
                }
                Piece::Whead(n) => {
                    if *n != sphere {
                        return Err(Error::NotComposable {
                            left_dom: sphere,
                            right_cod: *n,
                        });
                    }
                    sphere = 2 * n - 1;
                }
                Piece::Scalar(_) => {}
            }
        }
        Ok(Term {
            cod,
            dom: sphere,
            pieces,
        })
    }

    /// The identity class `iota_n`.
    pub fn iota(n: u32) -> Term {
        Term {
            cod: n,
            dom: n,
            pieces: Vec::new(),
        }
    }

    /// The zero class between the given spheres.
    pub fn zero(dom: u32, cod: u32) -> Term {
        Term {
            cod,
            dom,
            pieces: vec![Piece::Scalar(0)],
        }
    }

    pub fn cod(&self) -> u32 {
        self.cod
    }
    pub fn dom(&self) -> u32 {
        self.dom
    }
    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }
    pub fn into_pieces(self) -> Vec<Piece> {
        self.pieces
    }

    pub fn is_zero_syntactic(&self) -> bool {
        self.pieces.iter().any(|p| matches!(p, Piece::Scalar(0)))
    }

    /// Syntactic suspension test: every piece desuspends, so the whole chain
    /// is a suspension and pre-composition with it is additive.
    pub fn is_suspension(&self) -> bool {
        self.cod >= 2 && self.pieces.iter().all(Piece::scalar_crosses)
    }

    /// `c * t`, recorded as composition with a degree map on the domain.
    pub fn scalar_mul(&self, c: i64) -> Term {
        if c == 1 {
            return self.clone();
        }
        let mut pieces = self.pieces.clone();
        pieces.push(Piece::Scalar(c));
        Term {
            cod: self.cod,
            dom: self.dom,
            pieces,
        }
    }

    /// `self . g` (self post-composed onto g). Coefficient behavior is not
    /// special-cased here: scalars stay as pieces at the junction and the
    /// rewrite engine moves them exactly where additivity allows.
    pub fn compose(&self, g: &Term) -> Result<Term> {
        if self.dom != g.cod {
            return Err(Error::NotComposable {
                left_dom: self.dom,
                right_cod: g.cod,
            });
        }
        let mut pieces = self.pieces.clone();
        pieces.extend(g.pieces.iter().cloned());
        Ok(Term {
            cod: self.cod,
            dom: g.dom,
            pieces,
        })
    }

    /// `Sigma^k` applied to the term. Whitehead squares refuse suspension:
    /// `Sigma w_n` is not `w_(n+1)`, so a chain containing one cannot be
    /// shifted (database relations cover the instances that matter).
    pub fn suspend(&self, k: u32) -> Result<Term> {
        if k == 0 {
            return Ok(self.clone());
        }
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            match p {
                Piece::Gen(a) => pieces.push(Piece::Gen(Atom {
                    subscript: a.subscript + k,
                    ..a.clone()
                })),
                Piece::Whead(n) => return Err(Error::WhiteheadSuspension(*n)),
                Piece::Scalar(c) => pieces.push(Piece::Scalar(*c)),
            }
        }
        Ok(Term {
            cod: self.cod + k,
            dom: self.dom + k,
            pieces,
        })
    }

    /// Desuspension by `k`, defined only when every atom stays at or above
    /// its birth sphere.
    pub fn desuspend(&self, k: u32) -> Result<Term> {
        if k == 0 {
            return Ok(self.clone());
        }
        if self.cod <= k {
            return Err(Error::CannotDesuspend {
                name: "iota".into(),
                subscript: self.cod,
                by: k,
                birth: 1,
            });
        }
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            match p {
                Piece::Gen(a) => {
                    if a.subscript < a.birth + k {
                        return Err(Error::CannotDesuspend {
                            name: a.name.clone(),
                            subscript: a.subscript,
                            by: k,
                            birth: a.birth,
                        });
                    }
                    pieces.push(Piece::Gen(Atom {
                        subscript: a.subscript - k,
                        ..a.clone()
                    }));
                }
                Piece::Whead(n) => return Err(Error::WhiteheadSuspension(*n)),
                Piece::Scalar(c) => pieces.push(Piece::Scalar(*c)),
            }
        }
        Ok(Term {
            cod: self.cod - k,
            dom: self.dom - k,
            pieces,
        })
    }

    /// Structural cleanup: merge adjacent scalars, drop unit scalars. Zero
    /// scalars collapse the term to the canonical zero.
    pub fn fuse_scalars(&self) -> Term {
        let mut pieces: Vec<Piece> = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            match p {
                Piece::Scalar(c) => {
                    if let Some(Piece::Scalar(prev)) = pieces.last_mut() {
                        *prev *= c;
                    } else {
                        pieces.push(Piece::Scalar(*c));
                    }
                }
                other => pieces.push(other.clone()),
            }
        }
        if pieces.iter().any(|p| matches!(p, Piece::Scalar(0))) {
            return Term::zero(self.dom, self.cod);
        }
        pieces.retain(|p| !matches!(p, Piece::Scalar(1)));
        Term {
            cod: self.cod,
            dom: self.dom,
            pieces,
        }
    }

    /// The atoms of the chain with scalars stripped (used for basis matching).
    pub fn atoms_only(&self) -> Vec<&Piece> {
        self.pieces.iter().filter(|p| !p.is_scalar()).collect()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero_syntactic() {
            return write!(f, "0");
        }
        if self.pieces.is_empty() {
            return write!(f, "iota_{}", self.cod);
        }
        // A scalar right of an atom is a coefficient on that atom (`a.[c]`
        // is the class `c*a`); a scalar with no atom before it is a scaled
        // identity on the sphere at its position.
        let fold = |s: &mut String, c: i64| {
            if let Some(star) = s.find('*') {
                let coeff: i64 = s[..star].parse().unwrap();
                *s = format!("{}*{}", coeff * c, &s[star + 1..]);
            } else {
                *s = format!("{c}*{s}");
            }
        };
        let mut rendered: Vec<String> = Vec::new();
        let mut sphere = self.cod;
        let mut last_was_piece = false;
        for p in &self.pieces {
            match p {
                Piece::Scalar(c) => {
                    if last_was_piece {
                        fold(rendered.last_mut().unwrap(), *c);
                    } else {
                        rendered.push(format!("{c}*iota_{sphere}"));
                        last_was_piece = true;
                    }
                }
                Piece::Gen(a) => {
                    rendered.push(format!("{}_{}", a.name, a.subscript));
                    sphere = a.dom();
                    last_was_piece = true;
                }
                Piece::Whead(n) => {
                    rendered.push(format!("w_{n}"));
                    sphere = 2 * n - 1;
                    last_was_piece = true;
                }
            }
        }
        write!(f, "{}", rendered.join("."))
    }
}

/// Render a formal sum of terms.
pub fn render_sum(terms: &[Term]) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    terms
        .iter()
        .map(Term::to_string)
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Parse a single chain. Grammar: atoms joined by `.`, subscripts after `_`,
/// optional integer coefficient prefixed with `*` on any atom, `iota_n` for
/// the identity, `w_n` for the Whitehead square. `0` alone is rejected here;
/// matrix entries handle it with shape inference.
pub fn parse_chain(input: &str, gens: &dyn GenLookup) -> Result<Term> {
    let s = input.trim();
    if s.is_empty() {
        return Err(parse_err(0, "empty chain"));
    }
    let mut pieces: Vec<Piece> = Vec::new();
    let mut cod: Option<u32> = None;
    let mut sphere: Option<u32> = None;
    for (idx, raw) in s.split('.').enumerate() {
        let raw = raw.trim();
        if raw.is_empty() {
            return Err(parse_err(idx, "empty atom between dots"));
        }
        let (coeff, body) = match raw.split_once('*') {
            Some((c, b)) => {
                let c: i64 = c
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(idx, &format!("bad coefficient `{c}`")))?;
                (Some(c), b.trim())
            }
            None => (None, raw),
        };
        let (name, sub) = body
            .rsplit_once('_')
            .ok_or_else(|| parse_err(idx, &format!("atom `{body}` has no subscript")))?;
        let sub: u32 = sub
            .parse()
            .map_err(|_| parse_err(idx, &format!("bad subscript in `{body}`")))?;
        if sub == 0 {
            return Err(parse_err(idx, "subscript must be at least 1"));
        }
        // Scalars precede the atom they scale: `4*zeta_21` is zeta . [4].
        let at_cod = |piece_cod: u32| -> Result<()> {
            match sphere {
                None => Ok(()),
                Some(s) if s == piece_cod => Ok(()),
                Some(s) => Err(Error::NotComposable {
                    left_dom: s,
                    right_cod: piece_cod,
                }),
            }
        };
        match name {
            "iota" => {
                at_cod(sub)?;
                cod.get_or_insert(sub);
                sphere = Some(sub);
                if let Some(c) = coeff {
                    pieces.push(Piece::Scalar(c));
                }
            }
            "w" => {
                at_cod(sub)?;
                cod.get_or_insert(sub);
                pieces.push(Piece::Whead(sub));
                if let Some(c) = coeff {
                    pieces.push(Piece::Scalar(c));
                }
                sphere = Some(2 * sub - 1);
            }
            _ => {
                let info = gens
                    .gen_info(name)
                    .ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
                if sub < info.birth {
                    return Err(Error::SubscriptBelowBirth {
                        name: name.to_string(),
                        subscript: sub,
                        birth: info.birth,
                    });
                }
                at_cod(sub)?;
                cod.get_or_insert(sub);
                pieces.push(Piece::Gen(Atom {
                    name: name.to_string(),
                    subscript: sub,
                    stem: info.stem,
                    birth: info.birth,
                }));
                if let Some(c) = coeff {
                    pieces.push(Piece::Scalar(c));
                }
                sphere = Some(sub + info.stem);
            }
        }
    }
    let cod = cod.expect("nonempty chain has a codomain");
    Term::new(cod, pieces)
}

/// Parse a `+`-joined formal sum of chains. A leading `-` on an addend
/// multiplies it by -1.
pub fn parse_sum(input: &str, gens: &dyn GenLookup) -> Result<Vec<Term>> {
    let s = input.trim();
    if s == "0" {
        return Err(parse_err(
            0,
            "bare `0` needs shape context; use it only as a matrix entry",
        ));
    }
    let mut terms = Vec::new();
    for part in s.split('+') {
        let part = part.trim();
        let (neg, body) = match part.strip_prefix('-') {
            Some(rest) => (true, rest.trim()),
            None => (false, part),
        };
        let t = parse_chain(body, gens)?;
        terms.push(if neg { t.scalar_mul(-1) } else { t });
    }
    let (d, c) = (terms[0].dom(), terms[0].cod());
    for t in &terms {
        if t.dom() != d || t.cod() != c {
            return Err(parse_err(0, "sum addends live between different spheres"));
        }
    }
    Ok(terms)
}

fn parse_err(col: usize, msg: &str) -> Error {
    Error::Parse {
        line: 0,
        col,
        msg: msg.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    struct Map(HashMap<&'static str, GenInfo>);
    impl GenLookup for Map {
        fn gen_info(&self, name: &str) -> Option<GenInfo> {
            self.0.get(name).copied()
        }
    }

    fn gens() -> Map {
        let mut m = HashMap::new();
        m.insert("eta", GenInfo { birth: 2, stem: 1 });
        m.insert("nu", GenInfo { birth: 4, stem: 3 });
        m.insert("zeta", GenInfo { birth: 5, stem: 11 });
        m.insert("sigma'", GenInfo { birth: 7, stem: 7 });
        Map(m)
    }

    #[test]
    fn parse_and_degrees() {
        let t = parse_chain("eta_13.nu_14", &gens()).unwrap();
        assert_eq!(t.cod(), 13);
        assert_eq!(t.dom(), 17);
        assert_eq!(t.to_string(), "eta_13.nu_14");
    }

    #[test]
    fn coefficient_stays_on_its_atom() {
        let t = parse_chain("4*zeta_21", &gens()).unwrap();
        assert_eq!(t.pieces().len(), 2);
        assert_eq!(t.to_string(), "4*zeta_21");
        let u = parse_chain("2*iota_20.zeta_20", &gens()).unwrap();
        assert_eq!(u.to_string(), "2*iota_20.zeta_20");
    }

    #[test]
    fn composability_checked() {
        assert!(parse_chain("eta_13.nu_13", &gens()).is_err());
        let a = parse_chain("eta_13", &gens()).unwrap();
        let b = parse_chain("zeta_21", &gens()).unwrap();
        assert!(a.compose(&b).is_err());
    }

    #[test]
    fn suspension_rules() {
        let t = parse_chain("sigma'_7.eta_14", &gens()).unwrap();
        let s = t.suspend(2).unwrap();
        assert_eq!(s.to_string(), "sigma'_9.eta_16");
        assert!(!t.is_suspension()); // sigma'_7 sits at its birth sphere
        assert!(s.is_suspension());
        assert_eq!(s.desuspend(2).unwrap(), t);
        assert!(s.desuspend(3).is_err());
        let w = Term::new(13, vec![Piece::Whead(13)]).unwrap();
        assert!(w.suspend(1).is_err());
    }

    #[test]
    fn suspend_then_suspend_adds() {
        let t = parse_chain("nu_5.eta_8", &gens()).unwrap();
        let a = t.suspend(2).unwrap().suspend(3).unwrap();
        let b = t.suspend(5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn iota_composes_away() {
        let i = parse_chain("iota_6", &gens()).unwrap();
        let n = parse_chain("nu_6", &gens()).unwrap();
        let c = i.compose(&n).unwrap();
        assert_eq!(c, n);
    }
}
