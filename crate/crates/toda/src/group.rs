//! Presentations of 2-local finitely generated abelian groups and their
//! elements.
//!
//! Every group the engine touches is `pi_N` of a sphere or a wedge of
//! spheres, presented by an ordered basis of named generators with cyclic
//! 2-power orders (or `Z_(2)`-free). Elements are coordinate vectors against
//! such a presentation, reduced modulo the finite orders.

use std::fmt;
use std::sync::Arc;

use crate::congr::ColOrder;
use crate::term::Term;

/// Order of a cyclic factor: a power of two, or infinite (`Z_(2)`-free).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// `2^exponent`.
    Pow2(u32),
    Inf,
}

impl Order {
    pub fn parse(s: &str) -> Option<Order> {
        if s == "inf" {
            return Some(Order::Inf);
        }
        let v: u64 = s.parse().ok()?;
        if v == 0 || (v & (v - 1)) != 0 {
            return None;
        }
        Some(Order::Pow2(v.trailing_zeros()))
    }

    pub fn value(self) -> Option<i64> {
        match self {
            Order::Pow2(e) => Some(1i64 << e),
            Order::Inf => None,
        }
    }

    pub fn divides(self, other: Order) -> bool {
        match (self, other) {
            (_, Order::Inf) => true,
            (Order::Inf, Order::Pow2(_)) => false,
            (Order::Pow2(a), Order::Pow2(b)) => a <= b,
        }
    }

    pub fn col(self) -> ColOrder {
        match self {
            Order::Pow2(e) => ColOrder::Fin(e),
            Order::Inf => ColOrder::Free,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Pow2(e) => write!(f, "{}", 1u64 << e),
            Order::Inf => write!(f, "inf"),
        }
    }
}

/// What a group is `pi_N` of.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Target {
    Sphere(u32),
    /// Wedge of spheres, by summand dimension.
    Wedge(Vec<u32>),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Sphere(m) => write!(f, "S^{m}"),
            Target::Wedge(v) => {
                let parts: Vec<String> = v.iter().map(|m| format!("S^{m}")).collect();
                write!(f, "{}", parts.join(" v "))
            }
        }
    }
}

/// Where a basis element lives inside its target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasisKind {
    /// A chain on a sphere target.
    Chain(Term),
    /// `j_idx . chain` on a wedge summand (0-based summand index).
    Summand { idx: usize, chain: Term },
    /// `[j_left, j_right] . chain` through a weight-2 basic product.
    Product {
        left: usize,
        right: usize,
        chain: Term,
    },
}

impl BasisKind {
    pub fn chain(&self) -> &Term {
        match self {
            BasisKind::Chain(t)
            | BasisKind::Summand { chain: t, .. }
            | BasisKind::Product { chain: t, .. } => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisEntry {
    pub label: String,
    pub kind: BasisKind,
    pub order: Order,
}

/// How a presentation came to exist; equality of elements ignores it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Curated record from the database file.
    Stored,
    /// `pi_N(S^m) = 0` because `N < m`.
    Connectivity,
    /// The engine proved a specific class zero without knowing the full
    /// group; the presentation is a placeholder for that zero.
    ZeroWitness,
    /// Assembled from stored sphere groups by the wedge decomposition.
    Wedge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPresentation {
    pub deg: u32,
    pub target: Target,
    pub basis: Vec<BasisEntry>,
    pub citation: String,
    pub provenance: Provenance,
}

impl GroupPresentation {
    pub fn trivial(deg: u32, sphere: u32, provenance: Provenance) -> GroupPresentation {
        GroupPresentation {
            deg,
            target: Target::Sphere(sphere),
            basis: Vec::new(),
            citation: String::new(),
            provenance,
        }
    }

    pub fn cols(&self) -> Vec<ColOrder> {
        self.basis.iter().map(|b| b.order.col()).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.is_empty()
    }

    /// Shape string such as `Z/8 + Z/2 + Z/2` (or `0`).
    pub fn shape(&self) -> String {
        if self.basis.is_empty() {
            return "0".to_string();
        }
        self.basis
            .iter()
            .map(|b| match b.order {
                Order::Pow2(e) => format!("Z/{}", 1u64 << e),
                Order::Inf => "Z(2)".to_string(),
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn name(&self) -> String {
        format!("pi_{}({})", self.deg, self.target)
    }

    pub fn zero(self: &Arc<Self>) -> Element {
        Element {
            group: Arc::clone(self),
            coords: vec![0; self.basis.len()],
        }
    }

    pub fn basis_element(self: &Arc<Self>, idx: usize) -> Element {
        let mut coords = vec![0; self.basis.len()];
        coords[idx] = 1;
        Element {
            group: Arc::clone(self),
            coords,
        }
    }

    fn reduce_coord(&self, idx: usize, c: i64) -> i64 {
        match self.basis[idx].order.value() {
            Some(m) => c.rem_euclid(m),
            None => c,
        }
    }
}

/// An element of a presented group: reduced coordinates against the basis.
#[derive(Debug, Clone)]
pub struct Element {
    pub group: Arc<GroupPresentation>,
    pub coords: Vec<i64>,
}

impl Element {
    pub fn new(group: Arc<GroupPresentation>, coords: Vec<i64>) -> Element {
        assert_eq!(
            coords.len(),
            group.basis.len(),
            "coordinate length mismatch"
        );
        let coords = coords
            .iter()
            .enumerate()
            .map(|(i, &c)| group.reduce_coord(i, c))
            .collect();
        Element { group, coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn deg(&self) -> u32 {
        self.group.deg
    }

    pub fn target(&self) -> &Target {
        &self.group.target
    }

    pub fn scaled(&self, c: i64) -> Element {
        Element::new(
            Arc::clone(&self.group),
            self.coords.iter().map(|&x| x * c).collect(),
        )
    }

    /// Addition; zero-witness placeholders absorb into the other side.
    pub fn add(&self, other: &Element) -> crate::error::Result<Element> {
        if self.deg() != other.deg() || self.target() != other.target() {
            return Err(crate::error::Error::AmbientMismatch(
                self.group.name(),
                other.group.name(),
            ));
        }
        if self.group.provenance == Provenance::ZeroWitness && self.is_zero() {
            return Ok(other.clone());
        }
        if other.group.provenance == Provenance::ZeroWitness && other.is_zero() {
            return Ok(self.clone());
        }
        if self.coords.len() != other.coords.len() {
            return Err(crate::error::Error::AmbientMismatch(
                self.group.name(),
                other.group.name(),
            ));
        }
        Ok(Element::new(
            Arc::clone(&self.group),
            self.coords
                .iter()
                .zip(other.coords.iter())
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn neg(&self) -> Element {
        self.scaled(-1)
    }

    /// Re-express the element as a formal sum of basis chains (sphere
    /// targets only). Fails on nonzero coordinates at wedge-tagged entries.
    pub fn as_terms(&self) -> Option<Vec<Term>> {
        let mut out = Vec::new();
        for (c, b) in self.coords.iter().zip(self.group.basis.iter()) {
            if *c == 0 {
                continue;
            }
            match &b.kind {
                BasisKind::Chain(t) => out.push(t.scalar_mul(*c)),
                _ => return None,
            }
        }
        Some(out)
    }
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        if self.deg() != other.deg() || self.target() != other.target() {
            return false;
        }
        if self.coords.len() == other.coords.len() && self.group.basis == other.group.basis {
            return self.coords == other.coords;
        }
        // Presentations differ (e.g. a zero witness): equal only as zeros.
        self.is_zero() && other.is_zero()
    }
}
impl Eq for Element {}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coords
            .iter()
            .zip(self.group.basis.iter())
            .filter(|(c, _)| **c != 0)
            .map(|(c, b)| {
                if *c == 1 {
                    b.label.clone()
                } else {
                    format!("{c}*{}", b.label)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
