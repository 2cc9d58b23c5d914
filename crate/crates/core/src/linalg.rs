//! Exact integer vectors and matrices.
//!
//! Every entry is an arbitrary-precision [`BigInt`]. The solvers here are the
//! small set the rest of the crate needs: fraction-free determinants, exact
//! solves against unimodular matrices, and Minkowski sums of finite point sets.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A lattice point produced by enumeration.
///
/// Enumeration walks an explicit bounding box, so every coordinate it can
/// produce fits in an `i64`; conversions into this form are checked.
pub type LatticePoint = Vec<i64>;

/// An integer vector with arbitrary-precision entries.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct IntVector {
    entries: Vec<BigInt>,
}

impl IntVector {
    pub fn new(entries: Vec<BigInt>) -> Self {
        IntVector { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        IntVector {
            entries: vec![BigInt::zero(); dim],
        }
    }

    pub fn unit(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[index] = BigInt::one();
        v
    }

    pub fn from_i64s(values: &[i64]) -> Self {
        IntVector {
            entries: values.iter().map(|&x| BigInt::from(x)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<BigInt> {
        self.entries
    }

    pub fn get(&self, i: usize) -> &BigInt {
        &self.entries[i]
    }

    pub fn set(&mut self, i: usize, value: BigInt) {
        self.entries[i] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|x| !x.is_negative())
    }

    pub fn sum(&self) -> BigInt {
        self.entries.iter().sum()
    }

    pub fn dot(&self, other: &IntVector) -> Result<BigInt> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn scale(&self, k: &BigInt) -> IntVector {
        IntVector {
            entries: self.entries.iter().map(|x| x * k).collect(),
        }
    }

    pub fn checked_add(&self, other: &IntVector) -> Result<IntVector> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn checked_sub(&self, other: &IntVector) -> Result<IntVector> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    /// Entries at the given positions, in the given order.
    pub fn select(&self, indices: &[usize]) -> IntVector {
        IntVector {
            entries: indices.iter().map(|&i| self.entries[i].clone()).collect(),
        }
    }

    /// gcd of the absolute values of all entries (0 for the zero vector).
    pub fn content(&self) -> BigInt {
        self.entries
            .iter()
            .fold(BigInt::zero(), |g, x| g.gcd(x))
    }

    pub fn to_lattice_point(&self) -> Result<LatticePoint> {
        self.entries
            .iter()
            .map(|x| x.to_i64().ok_or(Error::CoordinateOverflow))
            .collect()
    }

    pub fn from_lattice_point(p: &[i64]) -> Self {
        Self::from_i64s(p)
    }

    fn zip_with(&self, other: &IntVector, f: impl Fn(&BigInt, &BigInt) -> BigInt) -> IntVector {
        IntVector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }
}

impl From<Vec<BigInt>> for IntVector {
    fn from(entries: Vec<BigInt>) -> Self {
        IntVector { entries }
    }
}

impl Add for &IntVector {
    type Output = IntVector;

    /// Panics on a dimension mismatch; use [`IntVector::checked_add`] otherwise.
    fn add(self, rhs: &IntVector) -> IntVector {
        assert_eq!(self.dim(), rhs.dim(), "vector dimension mismatch");
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &IntVector {
    type Output = IntVector;

    fn sub(self, rhs: &IntVector) -> IntVector {
        assert_eq!(self.dim(), rhs.dim(), "vector dimension mismatch");
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &IntVector {
    type Output = IntVector;

    fn neg(self) -> IntVector {
        IntVector {
            entries: self.entries.iter().map(|x| -x).collect(),
        }
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

// JSON carries entries as plain numbers when they fit in 64 bits and as
// decimal strings otherwise.
pub(crate) fn serialize_bigint<S: Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x.to_i64() {
        Some(v) => s.serialize_i64(v),
        None => s.serialize_str(&x.to_string()),
    }
}

pub(crate) fn deserialize_bigint<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
    d.deserialize_any(BigIntVisitor)
}

struct BigIntVisitor;

impl Visitor<'_> for BigIntVisitor {
    type Value = BigInt;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("an integer or a decimal integer string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<BigInt, E> {
        Ok(BigInt::from(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<BigInt, E> {
        Ok(BigInt::from(v))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<BigInt, E> {
        v.trim()
            .parse()
            .map_err(|_| E::custom(format!("not an integer: {v:?}")))
    }
}

/// Serde adapter for a single [`BigInt`] field.
pub(crate) mod bigint_serde {
    pub(crate) use super::deserialize_bigint as deserialize;
    pub(crate) use super::serialize_bigint as serialize;
}

struct Entry<'a>(&'a BigInt);

impl Serialize for Entry<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_bigint(self.0, s)
    }
}

struct EntryOwned(BigInt);

impl<'de> Deserialize<'de> for EntryOwned {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        deserialize_bigint(d).map(EntryOwned)
    }
}

impl Serialize for IntVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.entries.len()))?;
        for x in &self.entries {
            seq.serialize_element(&Entry(x))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for IntVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct SeqVisitor;
        impl<'de> Visitor<'de> for SeqVisitor {
            type Value = IntVector;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an array of integers")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<IntVector, A::Error> {
                let mut entries = Vec::new();
                while let Some(EntryOwned(x)) = seq.next_element()? {
                    entries.push(x);
                }
                Ok(IntVector { entries })
            }
        }
        d.deserialize_seq(SeqVisitor)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// A dense row-major integer matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("matrix must be non-empty, got {rows}x{cols}")));
        }
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(IntMatrix { rows, cols, entries })
    }

    pub fn from_rows(rows: &[IntVector]) -> Result<Self> {
        let cols = rows.first().map(IntVector::dim).unwrap_or(0);
        if let Some(bad) = rows.iter().find(|r| r.dim() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: bad.dim(),
            });
        }
        let entries = rows.iter().flat_map(|r| r.entries().iter().cloned()).collect();
        Self::new(rows.len(), cols, entries)
    }

    /// Convenience constructor for small literal matrices.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        let vecs: Vec<IntVector> = rows.iter().map(|r| IntVector::from_i64s(r)).collect();
        Self::from_rows(&vecs)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![BigInt::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = BigInt::one();
        }
        IntMatrix {
            rows: n,
            cols: n,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vector(&self, r: usize) -> IntVector {
        IntVector::new(self.row(r).to_vec())
    }

    pub fn row_vectors(&self) -> Vec<IntVector> {
        (0..self.rows).map(|r| self.row_vector(r)).collect()
    }

    /// The submatrix made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let entries = rows.iter().flat_map(|&r| self.row(r).iter().cloned()).collect();
        Self::new(rows.len(), self.cols, entries)
    }

    /// The submatrix on the given rows and columns.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        let entries = rows
            .iter()
            .flat_map(|&r| cols.iter().map(move |&c| self.entry(r, c).clone()))
            .collect();
        Self::new(rows.len(), cols.len(), entries)
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(self.entry(r, c).clone());
            }
        }
        IntMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn mul_vec(&self, x: &IntVector) -> Result<IntVector> {
        check_dim(self.cols, x.dim())?;
        Ok(IntVector::new(
            (0..self.rows)
                .map(|r| self.row(r).iter().zip(x.entries()).map(|(a, b)| a * b).sum())
                .collect(),
        ))
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        check_dim(self.cols, other.rows)?;
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                entries.push(
                    (0..self.cols)
                        .map(|k| self.entry(r, k) * other.entry(k, c))
                        .sum(),
                );
            }
        }
        Self::new(self.rows, other.cols, entries)
    }

    /// Exact determinant by Bareiss fraction-free elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut m: Vec<Vec<BigInt>> = (0..n).map(|r| self.row(r).to_vec()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                    Some(r) => {
                        m.swap(k, r);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    // Bareiss: the division by the previous pivot is exact.
                    m[i][j] = v / &prev;
                }
                m[i][k] = BigInt::zero();
            }
            prev = m[k][k].clone();
        }
        Ok(sign * &m[n - 1][n - 1])
    }

    fn require_unimodular(&self) -> Result<BigInt> {
        let det = self.determinant()?;
        if det.abs().is_one() {
            Ok(det)
        } else {
            Err(Error::NotUnimodular { det })
        }
    }

    /// The unique integer `x` with `self * x = b`, for `|det(self)| = 1`.
    pub fn unimodular_solve(&self, b: &IntVector) -> Result<IntVector> {
        let det = self.require_unimodular()?;
        check_dim(self.rows, b.dim())?;
        self.solve_with_det(b, &det)
    }

    /// Integer inverse of a unimodular matrix.
    pub fn unimodular_inverse(&self) -> Result<IntMatrix> {
        let det = self.require_unimodular()?;
        let n = self.rows;
        let mut inv = vec![BigInt::zero(); n * n];
        for j in 0..n {
            let col = self.solve_with_det(&IntVector::unit(n, j), &det)?;
            for i in 0..n {
                inv[i * n + j] = col.get(i).clone();
            }
        }
        Self::new(n, n, inv)
    }

    // Cramer's rule; det = ±1, so multiplying by det is dividing by it.
    fn solve_with_det(&self, b: &IntVector, det: &BigInt) -> Result<IntVector> {
        let n = self.rows;
        let mut x = Vec::with_capacity(n);
        for i in 0..n {
            let mut replaced = self.clone();
            for r in 0..n {
                replaced.entries[r * n + i] = b.get(r).clone();
            }
            x.push(replaced.determinant()? * det);
        }
        Ok(IntVector::new(x))
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.entries.iter().map(|x| x.to_string().len()).max().unwrap_or(1);
        for r in 0..self.rows {
            write!(f, "[")?;
            for (c, x) in self.row(r).iter().enumerate() {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x:>width$}")?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// `{ s + t : s in S, t in T }`, deduplicated and lexicographically sorted.
pub fn minkowski_sum_points(s: &[IntVector], t: &[IntVector]) -> Result<Vec<IntVector>> {
    let dim = s.first().or(t.first()).map(IntVector::dim).unwrap_or(0);
    for p in s.iter().chain(t) {
        check_dim(dim, p.dim())?;
    }
    let sums: BTreeSet<IntVector> = s
        .iter()
        .flat_map(|a| t.iter().map(move |b| a + b))
        .collect();
    Ok(sums.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[i64]) -> IntVector {
        IntVector::from_i64s(x)
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(IntMatrix::identity(3).determinant().unwrap(), BigInt::from(1));
        let m = IntMatrix::from_i64_rows(&[&[0, 1, 0], &[-1, -1, 1], &[-1, -1, 2]]).unwrap();
        assert_eq!(m.determinant().unwrap(), BigInt::from(1));
        let m = IntMatrix::from_i64_rows(&[&[2, 0], &[0, 2]]).unwrap();
        assert_eq!(m.determinant().unwrap(), BigInt::from(4));
    }

    #[test]
    fn determinant_needs_pivoting_and_singular() {
        let m = IntMatrix::from_i64_rows(&[&[0, 1], &[1, 0]]).unwrap();
        assert_eq!(m.determinant().unwrap(), BigInt::from(-1));
        let m = IntMatrix::from_i64_rows(&[&[1, 2], &[2, 4]]).unwrap();
        assert_eq!(m.determinant().unwrap(), BigInt::from(0));
    }

    #[test]
    fn determinant_rejects_non_square() {
        let m = IntMatrix::from_i64_rows(&[&[1, 2, 3], &[4, 5, 6]]).unwrap();
        assert_eq!(m.determinant(), Err(Error::NotSquare { rows: 2, cols: 3 }));
    }

    #[test]
    fn unimodular_solve_examples() {
        let id = IntMatrix::identity(3);
        assert_eq!(id.unimodular_solve(&v(&[1, 2, 3])).unwrap(), v(&[1, 2, 3]));

        let m = IntMatrix::from_i64_rows(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, -1]]).unwrap();
        assert_eq!(m.unimodular_solve(&v(&[0, 0, -4])).unwrap(), v(&[0, 0, 4]));

        let m = IntMatrix::from_i64_rows(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]).unwrap();
        assert_eq!(m.unimodular_solve(&v(&[0, 0, 0])).unwrap(), v(&[0, 0, 0]));
    }

    #[test]
    fn unimodular_solve_reports_determinant() {
        let m = IntMatrix::from_i64_rows(&[&[2, 0], &[0, 2]]).unwrap();
        assert_eq!(
            m.unimodular_solve(&v(&[1, 1])),
            Err(Error::NotUnimodular { det: BigInt::from(4) })
        );
    }

    #[test]
    fn inverse_round_trips() {
        let m = IntMatrix::from_i64_rows(&[&[2, 1], &[1, 1]]).unwrap();
        let inv = m.unimodular_inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), IntMatrix::identity(2));
    }

    #[test]
    fn minkowski_examples() {
        let s = [v(&[1, 0]), v(&[2, 1])];
        let t = [v(&[1, 0]), v(&[0, 1])];
        let sum = minkowski_sum_points(&s, &t).unwrap();
        assert_eq!(sum, vec![v(&[1, 1]), v(&[2, 0]), v(&[2, 2]), v(&[3, 1])]);

        let zero = [v(&[0, 0])];
        assert_eq!(minkowski_sum_points(&zero, &s).unwrap(), s.to_vec());

        let seg = [v(&[0, 0]), v(&[1, 0])];
        assert_eq!(
            minkowski_sum_points(&seg, &seg).unwrap(),
            vec![v(&[0, 0]), v(&[1, 0]), v(&[2, 0])]
        );
    }

    #[test]
    fn minkowski_rejects_mixed_dimensions() {
        let s = [v(&[0, 0])];
        let t = [v(&[0, 0, 0])];
        assert!(matches!(
            minkowski_sum_points(&s, &t),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn json_entries_fall_back_to_strings() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let x = IntVector::new(vec![BigInt::from(-3), big.clone()]);
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, r#"[-3,"123456789012345678901234567890"]"#);
        let back: IntVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
    }
}
