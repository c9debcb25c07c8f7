//! Linear algebra over 2-local coordinate modules.
//!
//! An ambient module is a direct sum of cyclic pieces `Z/2^e` and free
//! pieces `Z_(2)`. Subgroups are row spans of integer vectors together with
//! the order relations `2^e * e_i`. Rows may be scaled by odd integers (these
//! are units 2-locally), so all arithmetic stays in exact integers; finite
//! coordinates are reduced modulo their orders, free coordinates are kept
//! exact and rows are divided by the odd part of their content.
//!
//! The echelon form here is a Howell-style form: pivots are processed left to
//! right, an annihilator row `(2^(e-v)) * row` is queued whenever a pivot of
//! 2-valuation `v` lands in a finite column of exponent `e`, and entries above
//! a pivot are cleared when divisible. Membership and equality tests reduce a
//! candidate vector against the form, which is exact for this class of rings.

use crate::error::{Error, Result};

/// Order of one coordinate of an ambient module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColOrder {
    /// Cyclic of order `2^exponent`.
    Fin(u32),
    /// A free `Z_(2)` coordinate.
    Free,
}

impl ColOrder {
    pub fn modulus(self) -> Option<i128> {
        match self {
            ColOrder::Fin(e) => Some(1i128 << e),
            ColOrder::Free => None,
        }
    }
}

fn v2(x: i128) -> u32 {
    debug_assert!(x != 0);
    x.trailing_zeros()
}

fn odd_part(x: i128) -> i128 {
    x >> v2(x)
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse of an odd residue modulo `2^e` (e >= 1).
fn inv_odd_mod(a: i128, e: u32) -> i128 {
    let m = 1i128 << e;
    let mut x = 1i128;
    // Newton iteration doubles correct bits each round.
    for _ in 0..7 {
        x = (x * (2 - (a % m) * x % m)) % m;
    }
    x.rem_euclid(m)
}

/// Reduce a vector coordinatewise: finite columns mod their order, then
/// divide the whole row by the odd part of its content.
fn normalize_row(cols: &[ColOrder], row: &mut [i128]) {
    for (c, x) in cols.iter().zip(row.iter_mut()) {
        if let Some(m) = c.modulus() {
            *x = x.rem_euclid(m);
        }
    }
    let mut content = 0i128;
    for &x in row.iter() {
        content = gcd(content, x);
    }
    if content != 0 {
        let o = odd_part(content);
        if o != 1 {
            for x in row.iter_mut() {
                *x /= o;
            }
            for (c, x) in cols.iter().zip(row.iter_mut()) {
                if let Some(m) = c.modulus() {
                    *x = x.rem_euclid(m);
                }
            }
        }
    }
}

fn is_zero_row(row: &[i128]) -> bool {
    row.iter().all(|&x| x == 0)
}

/// Echelonized span of a set of vectors inside an ambient module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Echelon {
    pub cols: Vec<ColOrder>,
    /// Rows sorted by pivot column; pivot entries are `odd * 2^v`.
    pub rows: Vec<Vec<i128>>,
}

impl Echelon {
    /// Span of `gens` (order rows are adjoined automatically).
    pub fn span(cols: &[ColOrder], gens: &[Vec<i128>]) -> Echelon {
        let n = cols.len();
        let mut work: Vec<Vec<i128>> = Vec::new();
        for g in gens {
            assert_eq!(g.len(), n, "generator length mismatch");
            work.push(g.clone());
        }
        for (j, c) in cols.iter().enumerate() {
            if let Some(m) = c.modulus() {
                let mut r = vec![0i128; n];
                r[j] = m;
                work.push(r);
            }
        }
        let mut basis: Vec<Option<Vec<i128>>> = vec![None; n];
        while let Some(mut r) = work.pop() {
            normalize_row(cols, &mut r);
            let mut lead = match r.iter().position(|&x| x != 0) {
                Some(j) => j,
                None => continue,
            };
            loop {
                match basis[lead].take() {
                    None => {
                        // Install, and queue the annihilator of the pivot.
                        if let ColOrder::Fin(e) = cols[lead] {
                            let v = v2(r[lead]);
                            if v < e {
                                let ann: Vec<i128> = r.iter().map(|&x| x << (e - v)).collect();
                                work.push(ann);
                            }
                        }
                        basis[lead] = Some(r);
                        break;
                    }
                    Some(b) => {
                        let (vb, vr) = (v2(b[lead]), v2(r[lead]));
                        if vr >= vb {
                            // r <- odd(b)·r - (r/2^vb)·b, clearing column `lead`.
                            let ob = odd_part(b[lead]);
                            let q = r[lead] >> vb;
                            for k in 0..n {
                                r[k] = ob * r[k] - q * b[k];
                            }
                            basis[lead] = Some(b);
                            normalize_row(cols, &mut r);
                            match r.iter().position(|&x| x != 0) {
                                Some(j) => lead = j,
                                None => break,
                            }
                        } else {
                            // Smaller valuation wins the pivot slot.
                            basis[lead] = Some(r);
                            r = b;
                            work.push(r);
                            break;
                        }
                    }
                }
            }
        }
        // Clear entries above pivots where divisible, for a stable form.
        let pivot_cols: Vec<usize> = (0..n).filter(|&j| basis[j].is_some()).collect();
        for &j in &pivot_cols {
            let b = basis[j].clone().unwrap();
            let (vj, oj) = (v2(b[j]), odd_part(b[j]));
            for &i in &pivot_cols {
                if i >= j {
                    continue;
                }
                let mut r = basis[i].take().unwrap();
                if r[j] != 0 && v2(r[j]) >= vj {
                    let q = r[j] >> vj;
                    for k in 0..n {
                        r[k] = oj * r[k] - q * b[k];
                    }
                    normalize_row(cols, &mut r);
                }
                basis[i] = Some(r);
            }
        }
        let rows: Vec<Vec<i128>> = (0..n).filter_map(|j| basis[j].clone()).collect();
        Echelon {
            cols: cols.to_vec(),
            rows,
        }
    }

    fn pivot_col(row: &[i128]) -> usize {
        row.iter().position(|&x| x != 0).unwrap()
    }

    /// Reduce `v` against the form; the residue is zero iff `v` is a member.
    /// The reduction scales `v` by odd units, which membership tolerates.
    fn reduce(&self, v: &[i128]) -> Vec<i128> {
        let mut v = v.to_vec();
        normalize_row(&self.cols, &mut v);
        for b in &self.rows {
            let j = Self::pivot_col(b);
            if v[j] == 0 {
                continue;
            }
            let (vb, ob) = (v2(b[j]), odd_part(b[j]));
            if v2(v[j]) >= vb {
                let q = v[j] >> vb;
                for k in 0..v.len() {
                    v[k] = ob * v[k] - q * b[k];
                }
                normalize_row(&self.cols, &mut v);
            }
        }
        v
    }

    pub fn contains(&self, v: &[i128]) -> bool {
        is_zero_row(&self.reduce(v))
    }

    /// Two spans are equal iff each contains the other's rows.
    pub fn same_span(&self, other: &Echelon) -> bool {
        assert_eq!(self.cols, other.cols, "ambient mismatch");
        self.rows.iter().all(|r| other.contains(r)) && other.rows.iter().all(|r| self.contains(r))
    }

    /// Rows whose image in the ambient module is nonzero (order rows and
    /// multiples drop out). Finite coordinates come out canonically reduced.
    pub fn visible_rows(&self) -> Vec<Vec<i128>> {
        self.rows
            .iter()
            .filter(|r| {
                r.iter()
                    .zip(self.cols.iter())
                    .any(|(&x, c)| match c.modulus() {
                        Some(m) => x.rem_euclid(m) != 0,
                        None => x != 0,
                    })
            })
            .cloned()
            .collect()
    }

    /// Number of elements, or `None` when the span meets a free column.
    pub fn group_order(&self) -> Option<u128> {
        let mut order: u128 = 1;
        for r in &self.rows {
            let j = Self::pivot_col(r);
            match self.cols[j] {
                ColOrder::Free => return None,
                ColOrder::Fin(e) => {
                    let v = v2(r[j]).min(e);
                    order *= 1u128 << (e - v);
                }
            }
        }
        Some(order)
    }
}

/// Solve `sum_i x_i * map[i] = target` in the destination module, where
/// `map[i]` is the image of the i-th source basis vector. Returns a
/// particular solution reduced against the kernel, or `Ok(None)` when the
/// target is not in the image.
///
/// Restriction: when the reduction has to scale the running target by an odd
/// unit and a free source coordinate is involved, there may be no integer
/// representative; this situation is reported as an error rather than
/// answered approximately. The shipped database never triggers it.
pub fn solve(
    src: &[ColOrder],
    dst: &[ColOrder],
    map: &[Vec<i128>],
    target: &[i128],
) -> Result<Option<Vec<i128>>> {
    let (ns, nd) = (src.len(), dst.len());
    assert_eq!(map.len(), ns);
    // Stacked columns: destination first, then source tags.
    let cols: Vec<ColOrder> = dst.iter().chain(src.iter()).copied().collect();
    let mut gens: Vec<Vec<i128>> = Vec::new();
    for (i, row) in map.iter().enumerate() {
        assert_eq!(row.len(), nd);
        let mut g = vec![0i128; nd + ns];
        g[..nd].copy_from_slice(row);
        g[nd + i] = 1;
        gens.push(g);
    }
    let ech = Echelon::span(&cols, &gens);

    let mut v = vec![0i128; nd + ns];
    v[..nd].copy_from_slice(target);
    let mut odd_scale: i128 = 1;
    for b in &ech.rows {
        let j = Echelon::pivot_col(b);
        if j >= nd || v[j] == 0 {
            continue;
        }
        let (vb, ob) = (v2(b[j]), odd_part(b[j]));
        if v2(v[j]) >= vb {
            let q = v[j] >> vb;
            for k in 0..v.len() {
                v[k] = ob * v[k] - q * b[k];
            }
            odd_scale *= ob;
            for (c, x) in dst.iter().zip(v.iter_mut()) {
                if let Some(m) = c.modulus() {
                    *x = x.rem_euclid(m);
                }
            }
        }
    }
    if !v[..nd]
        .iter()
        .zip(dst.iter())
        .all(|(&x, c)| match c.modulus() {
            Some(m) => x.rem_euclid(m) == 0,
            None => x == 0,
        })
    {
        return Ok(None);
    }
    // odd_scale * target = sum x_i map[i] with x = -tags; undo the unit.
    let mut x: Vec<i128> = v[nd..].iter().map(|&t| -t).collect();
    for (i, c) in src.iter().enumerate() {
        match c {
            ColOrder::Fin(e) => {
                if *e > 0 {
                    let inv = inv_odd_mod(odd_scale.rem_euclid(1i128 << e), *e);
                    x[i] = (x[i] * inv).rem_euclid(1i128 << e);
                } else {
                    x[i] = 0;
                }
            }
            ColOrder::Free => {
                if odd_scale.abs() != 1 {
                    if x[i] % odd_scale != 0 {
                        return Err(Error::NoIntegerRepresentative(format!(
                            "odd unit {odd_scale} does not divide coefficient {}",
                            x[i]
                        )));
                    }
                    x[i] /= odd_scale;
                } else {
                    x[i] *= odd_scale.signum();
                }
            }
        }
    }
    // Canonicalize against the kernel.
    let ker = kernel(src, dst, map);
    let kech = Echelon::span(src, &ker);
    let reduced = reduce_rep(&kech, &x);
    Ok(Some(reduced))
}

/// Reduce a representative against a subgroup without odd scalings, keeping
/// it an honest element of the same coset. Used to pick the deterministic
/// coset representative (smallest reachable by pivot-wise clearing).
pub fn reduce_rep(sub: &Echelon, v: &[i128]) -> Vec<i128> {
    let mut v = v.to_vec();
    for (c, x) in sub.cols.iter().zip(v.iter_mut()) {
        if let Some(m) = c.modulus() {
            *x = x.rem_euclid(m);
        }
    }
    for b in &sub.rows {
        let j = Echelon::pivot_col(b);
        if v[j] == 0 {
            continue;
        }
        let (vb, ob) = (v2(b[j]), odd_part(b[j]));
        if ob == 1 && v2(v[j]) >= vb {
            let q = v[j] >> vb;
            for k in 0..v.len() {
                v[k] -= q * b[k];
            }
            for (c, x) in sub.cols.iter().zip(v.iter_mut()) {
                if let Some(m) = c.modulus() {
                    *x = x.rem_euclid(m);
                }
            }
        }
    }
    v
}

/// Generators of the kernel of the map given by rows `map[i]`.
pub fn kernel(src: &[ColOrder], dst: &[ColOrder], map: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let (ns, nd) = (src.len(), dst.len());
    let cols: Vec<ColOrder> = dst.iter().chain(src.iter()).copied().collect();
    let mut gens: Vec<Vec<i128>> = Vec::new();
    for (i, row) in map.iter().enumerate() {
        let mut g = vec![0i128; nd + ns];
        g[..nd].copy_from_slice(row);
        g[nd + i] = 1;
        gens.push(g);
    }
    // Source order rows: x_i of order 2^e maps to 2^e * map[i] = 0 in dst.
    for (i, c) in src.iter().enumerate() {
        if let ColOrder::Fin(e) = c {
            let mut g = vec![0i128; nd + ns];
            g[nd + i] = 1i128 << e;
            gens.push(g);
        }
    }
    let ech = Echelon::span(&cols, &gens);
    ech.rows
        .iter()
        .filter(|r| {
            r[..nd]
                .iter()
                .zip(dst.iter())
                .all(|(&x, c)| match c.modulus() {
                    Some(m) => x.rem_euclid(m) == 0,
                    None => x == 0,
                })
        })
        .map(|r| r[nd..].to_vec())
        .collect()
}


#[cfg(test)]
mod more_tests {
    use super::*;

    #[test]
    fn odd_map_entries_solve_through_modular_inverses() {
        // 3x = 5 in Z/8: x = 7.
        let src = vec![ColOrder::Fin(3)];
        let dst = vec![ColOrder::Fin(3)];
        let sol = solve(&src, &dst, &[vec![3]], &[5]).unwrap().unwrap();
        assert_eq!(sol, vec![7]);
    }

    #[test]
    fn membership_sees_through_odd_units_on_free_columns() {
        // span{(3, 1)} in Z(2) + Z/2 contains (1, 1): 3 is a 2-local unit.
        let cols = vec![ColOrder::Free, ColOrder::Fin(1)];
        let e = Echelon::span(&cols, &[vec![3, 1]]);
        assert!(e.contains(&[1, 1]));
        assert!(e.contains(&[3, 1]));
        assert!(e.contains(&[2, 0]));
        assert!(!e.contains(&[1, 0]));
    }

    #[test]
    fn annihilator_rows_close_the_span() {
        // span{(2, 1)} in Z/4 + Z/2: doubling gives (0, 0), and the span is
        // exactly {0, (2,1)}.
        let cols = vec![ColOrder::Fin(2), ColOrder::Fin(1)];
        let e = Echelon::span(&cols, &[vec![2, 1]]);
        assert!(e.contains(&[2, 1]));
        assert!(!e.contains(&[2, 0]));
        assert!(!e.contains(&[0, 1]));
        assert_eq!(e.group_order(), Some(2));
    }
}
