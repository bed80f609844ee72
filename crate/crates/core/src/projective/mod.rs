//! Points and subspaces of the projective space `PG(k, q)`.
//!
//! A point is a nonzero vector of `GF(q)^(k+1)` whose first nonzero
//! coordinate is 1. A subspace is stored as the reduced row echelon basis of
//! the underlying vector subspace, so two [`Subspace`] values are equal
//! exactly when they denote the same projective subspace.
//!
//! Points are enumerated in lexicographic order of their coordinate vectors
//! (elements compared by [`Elem`] encoding). Subspaces are enumerated by pivot
//! column set in lexicographic order, then by free entries in lexicographic
//! order. Both orders are stable across runs and platforms.

mod linalg;

use std::fmt;
use std::hash::{Hash, Hasher};

use num::bigint::BigUint;
use num::{One, ToPrimitive};
use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::{Elem, Field};

/// Default cap on the number of objects any enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// The `q`-Gaussian binomial coefficient `[s choose r]_q`, exactly.
///
/// Returns 0 when `r > s`.
pub fn gaussian_binomial(s: u32, r: u32, q: u32) -> BigUint {
    if r > s {
        return BigUint::from(0u32);
    }
    let q = BigUint::from(q);
    let qs = num::pow(q.clone(), s as usize);
    let qr = num::pow(q.clone(), r as usize);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    let mut qi = BigUint::one();
    for _ in 0..r {
        num *= &qs - &qi;
        den *= &qr - &qi;
        qi *= &q;
    }
    num / den
}

/// `|PG(k, q)| = (q^(k+1) - 1) / (q - 1)`.
pub fn point_count(k: u32, q: u32) -> BigUint {
    gaussian_binomial(k + 1, 1, q)
}

/// Number of `d`-dimensional subspaces of `PG(k, q)` through a fixed point.
pub fn count_subspaces_through_point(k: u32, d: u32, q: u32) -> BigUint {
    gaussian_binomial(k, d, q)
}

fn check_cap(count: &BigUint, cap: u64) -> Result<usize> {
    match count.to_u64() {
        Some(c) if c <= cap => Ok(c as usize),
        _ => Err(Error::SizeOverflow {
            count: count.to_string(),
            cap,
        }),
    }
}

/// A normalized point of `PG(k, q)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjectivePoint {
    coords: Vec<Elem>,
}

impl ProjectivePoint {
    /// Normalizes a nonzero vector to its canonical representative.
    pub fn from_vector(field: &Field, v: &[Elem]) -> Result<ProjectivePoint> {
        let lead = v
            .iter()
            .find(|x| !x.is_zero())
            .ok_or_else(|| Error::invalid("the zero vector is not a projective point"))?;
        let inv = field.inv_nonzero(*lead);
        Ok(ProjectivePoint {
            coords: v.iter().map(|&x| field.mul(x, inv)).collect(),
        })
    }

    pub fn coords(&self) -> &[Elem] {
        &self.coords
    }

    pub fn ambient_k(&self) -> usize {
        self.coords.len() - 1
    }

    /// Position of this point in [`enumerate_points`] order.
    pub fn index(&self, q: u32) -> usize {
        point_index(&self.coords, q)
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Index of a normalized coordinate vector in lexicographic point order.
///
/// Points whose leading 1 sits further right come first; within one leading
/// position the trailing coordinates are read as a base-`q` number.
pub(crate) fn point_index(coords: &[Elem], q: u32) -> usize {
    let k = coords.len() - 1;
    let lead = coords
        .iter()
        .position(|x| !x.is_zero())
        .expect("nonzero point");
    let q = q as usize;
    // Points with leading position > lead: sum_{j=lead+1}^{k} q^(k-j).
    let before: usize = (0..k - lead).map(|e| q.pow(e as u32)).sum();
    let tail = coords[lead + 1..]
        .iter()
        .fold(0usize, |acc, x| acc * q + x.index());
    before + tail
}

/// Inverse of [`point_index`].
pub fn point_at(k: usize, field: &Field, index: usize) -> Result<ProjectivePoint> {
    let q = field.order() as usize;
    let mut rest = index;
    for lead in (0..=k).rev() {
        let block = q.pow((k - lead) as u32);
        if rest < block {
            let mut coords = vec![Elem::ZERO; k + 1];
            coords[lead] = Elem::ONE;
            for pos in (lead + 1..=k).rev() {
                coords[pos] = field.elem((rest % q) as u32)?;
                rest /= q;
            }
            return Ok(ProjectivePoint { coords });
        }
        rest -= block;
    }
    Err(Error::invalid(format!(
        "point index {index} out of range for PG({k}, {q})"
    )))
}

pub fn enumerate_points(k: usize, field: &Field) -> Result<Vec<ProjectivePoint>> {
    enumerate_points_with_cap(k, field, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_points_with_cap(
    k: usize,
    field: &Field,
    cap: u64,
) -> Result<Vec<ProjectivePoint>> {
    let count = check_cap(&point_count(k as u32, field.order()), cap)?;
    (0..count).map(|i| point_at(k, field, i)).collect()
}

/// A projective subspace of `PG(k, q)` in canonical RREF form.
#[derive(Clone)]
pub struct Subspace {
    field: Field,
    k: usize,
    rows: Vec<Vec<Elem>>,
    pivots: Vec<usize>,
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.k == other.k && self.rows == other.rows
    }
}

impl Eq for Subspace {}

impl Hash for Subspace {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.field.order().hash(state);
        self.k.hash(state);
        self.rows.hash(state);
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Subspace")
            .field("q", &self.field.order())
            .field("k", &self.k)
            .field("rows", &self.rows)
            .finish()
    }
}

impl Subspace {
    /// Projective subspace spanned by `vectors` (which may be dependent or zero).
    pub fn span(field: &Field, k: usize, vectors: &[Vec<Elem>]) -> Result<Subspace> {
        if let Some(bad) = vectors.iter().find(|v| v.len() != k + 1) {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in PG({k}, {})",
                bad.len(),
                field.order()
            )));
        }
        let mut rows = vectors.to_vec();
        let pivots = linalg::rref(field, &mut rows, k + 1);
        Ok(Subspace {
            field: field.clone(),
            k,
            rows,
            pivots,
        })
    }

    /// The rank-0 subspace (projective dimension -1).
    pub fn empty(field: &Field, k: usize) -> Subspace {
        Subspace {
            field: field.clone(),
            k,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(field: &Field, k: usize) -> Subspace {
        let rows = (0..=k)
            .map(|i| {
                let mut v = vec![Elem::ZERO; k + 1];
                v[i] = Elem::ONE;
                v
            })
            .collect();
        Subspace {
            field: field.clone(),
            k,
            rows,
            pivots: (0..=k).collect(),
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn ambient_k(&self) -> usize {
        self.k
    }

    /// Vector-space rank of the underlying subspace.
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Projective dimension; -1 for the empty subspace.
    pub fn dim(&self) -> isize {
        self.rows.len() as isize - 1
    }

    pub fn basis(&self) -> &[Vec<Elem>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn same_space(&self, other_k: usize, other_field: &Field) -> Result<()> {
        if self.k != other_k || &self.field != other_field {
            return Err(Error::DimensionMismatch(format!(
                "PG({}, {}) vs PG({}, {})",
                self.k,
                self.field.order(),
                other_k,
                other_field.order()
            )));
        }
        Ok(())
    }

    pub fn contains_vector(&self, v: &[Elem]) -> Result<bool> {
        if v.len() != self.k + 1 {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in PG({}, {})",
                v.len(),
                self.k,
                self.field.order()
            )));
        }
        let mut w = v.to_vec();
        linalg::reduce(&self.field, &self.rows, &self.pivots, &mut w);
        Ok(w.iter().all(|x| x.is_zero()))
    }

    pub fn contains(&self, pt: &ProjectivePoint) -> Result<bool> {
        self.contains_vector(pt.coords())
    }

    /// `self ∩ other`, computed as the annihilator of the sum of annihilators.
    pub fn intersection(&self, other: &Subspace) -> Result<Subspace> {
        self.same_space(other.k, &other.field)?;
        let n = self.k + 1;
        let mut ann = linalg::null_space(&self.field, &self.rows, &self.pivots, n);
        ann.extend(linalg::null_space(
            &other.field,
            &other.rows,
            &other.pivots,
            n,
        ));
        let ann_pivots = linalg::rref(&self.field, &mut ann, n);
        let mut rows = linalg::null_space(&self.field, &ann, &ann_pivots, n);
        let pivots = linalg::rref(&self.field, &mut rows, n);
        Ok(Subspace {
            field: self.field.clone(),
            k: self.k,
            rows,
            pivots,
        })
    }

    /// Number of projective points, `(q^rank - 1) / (q - 1)`.
    pub fn point_count(&self) -> BigUint {
        if self.rows.is_empty() {
            BigUint::from(0u32)
        } else {
            point_count(self.rank() as u32 - 1, self.field.order())
        }
    }

    /// Indices (in [`enumerate_points`] order) of every point on this subspace, ascending.
    ///
    /// Each point is a combination of the basis rows whose first nonzero
    /// coefficient is 1; with an RREF basis that combination is already
    /// normalized.
    pub fn point_indices(&self) -> Vec<u32> {
        let q = self.field.order();
        let r = self.rows.len();
        let n = self.k + 1;
        let mut out = Vec::new();
        let mut v = vec![Elem::ZERO; n];
        for lead in 0..r {
            let free = r - lead - 1;
            let combos = (q as usize).pow(free as u32);
            for code in 0..combos {
                v.copy_from_slice(&self.rows[lead]);
                let mut rest = code;
                for row in self.rows[lead + 1..].iter().rev() {
                    let c = Elem::from_index_unchecked(rest % q as usize);
                    rest /= q as usize;
                    if !c.is_zero() {
                        for (x, &y) in v.iter_mut().zip(row) {
                            *x = self.field.add(*x, self.field.mul(c, y));
                        }
                    }
                }
                out.push(point_index(&v, q) as u32);
            }
        }
        out.sort_unstable();
        out
    }

    pub fn points(&self) -> Vec<ProjectivePoint> {
        self.point_indices()
            .into_iter()
            .map(|i| point_at(self.k, &self.field, i as usize).expect("index from this space"))
            .collect()
    }
}

pub fn enumerate_subspaces(k: usize, d: usize, field: &Field) -> Result<Vec<Subspace>> {
    enumerate_subspaces_with_cap(k, d, field, DEFAULT_ENUMERATION_CAP)
}

/// All `d`-dimensional subspaces of `PG(k, q)`, as rank-`(d+1)` RREF matrices.
pub fn enumerate_subspaces_with_cap(
    k: usize,
    d: usize,
    field: &Field,
    cap: u64,
) -> Result<Vec<Subspace>> {
    if d > k {
        return Err(Error::invalid(format!(
            "subspace dimension {d} exceeds ambient dimension {k}"
        )));
    }
    let q = field.order();
    let expected = check_cap(&gaussian_binomial(k as u32 + 1, d as u32 + 1, q), cap)?;
    let (n, r) = (k + 1, d + 1);
    let mut out = Vec::with_capacity(expected);

    let mut pivots: Vec<usize> = (0..r).collect();
    loop {
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        // (row, column) positions that are free in this echelon shape, in reading order.
        let free: Vec<(usize, usize)> = pivots
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| (p + 1..n).filter(|&c| !is_pivot[c]).map(move |c| (i, c)))
            .collect();
        let mut digits = vec![0usize; free.len()];
        loop {
            let mut rows = vec![vec![Elem::ZERO; n]; r];
            for (i, &p) in pivots.iter().enumerate() {
                rows[i][p] = Elem::ONE;
            }
            for (&(i, c), &v) in free.iter().zip(&digits) {
                rows[i][c] = Elem::from_index_unchecked(v);
            }
            out.push(Subspace {
                field: field.clone(),
                k,
                rows,
                pivots: pivots.clone(),
            });
            // Odometer with the last free position fastest.
            let mut pos = digits.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < q as usize {
                    break;
                }
                digits[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if digits.is_empty() || pos == usize::MAX {
                break;
            }
        }
        if !next_combination(&mut pivots, n) {
            break;
        }
    }
    debug_assert_eq!(out.len(), expected);
    Ok(out)
}

/// Advances a strictly increasing index vector to the next combination in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let r = c.len();
    for i in (0..r).rev() {
        if c[i] < n - r + i {
            c[i] += 1;
            for j in i + 1..r {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Uniform random `d`-dimensional subspace through `pt`.
///
/// Completes `pt` with `d` uniform vectors and redraws until the rows are
/// independent. Every subspace through `pt` has the same number of
/// completing tuples, so the result is uniform.
pub fn sample_subspace_containing<R: Rng + ?Sized>(
    pt: &ProjectivePoint,
    d: usize,
    field: &Field,
    rng: &mut R,
) -> Result<Subspace> {
    let k = pt.ambient_k();
    if d > k {
        return Err(Error::invalid(format!(
            "subspace dimension {d} exceeds ambient dimension {k}"
        )));
    }
    if d == k {
        return Ok(Subspace::full(field, k));
    }
    let q = field.order();
    loop {
        let mut rows = Vec::with_capacity(d + 1);
        rows.push(pt.coords().to_vec());
        for _ in 0..d {
            rows.push(
                (0..=k)
                    .map(|_| Elem::from_index_unchecked(rng.gen_range(0..q) as usize))
                    .collect(),
            );
        }
        let pivots = linalg::rref(field, &mut rows, k + 1);
        if rows.len() == d + 1 {
            return Ok(Subspace {
                field: field.clone(),
                k,
                rows,
                pivots,
            });
        }
    }
}

/// A pair of `d`-subspaces meeting in exactly dimension `2d - k`.
///
/// With basis `v_0..v_k`, takes `U = span(v_0..v_d)` and
/// `W = span(v_{k-d}..v_k)`; they share `v_{k-d}..v_d`.
pub fn sharpness_pair_from_basis(
    field: &Field,
    basis: &[Vec<Elem>],
    d: usize,
) -> Result<(Subspace, Subspace)> {
    let k = basis
        .len()
        .checked_sub(1)
        .ok_or_else(|| Error::invalid("empty basis"))?;
    if 2 * d < k || d > k {
        return Err(Error::invalid(format!(
            "no sharp pair for d={d}, k={k}: need k <= 2d and d <= k"
        )));
    }
    let u = Subspace::span(field, k, &basis[..=d])?;
    let w = Subspace::span(field, k, &basis[k - d..])?;
    if u.rank() != d + 1 || w.rank() != d + 1 {
        return Err(Error::invalid("basis vectors are linearly dependent"));
    }
    Ok((u, w))
}

/// [`sharpness_pair_from_basis`] over the standard basis.
pub fn sharpness_pair(field: &Field, k: usize, d: usize) -> Result<(Subspace, Subspace)> {
    let full = Subspace::full(field, k);
    sharpness_pair_from_basis(field, full.basis(), d)
}
