//! Smooth complete `n`-fans with `n + 3` rays and five primitive collections.
//!
//! The rays come in five classes arranged around a pentagon,
//! `X0 = {v}`, `X1 = {y}`, `X2 = {z}`, `X3 = {t}`, `X4 = {u}`, and the
//! primitive collections are the unions of cyclically adjacent classes. The
//! rays `v_1..v_{p0}, u_2.., y_2.., t_1.., z_2..` form the standard basis (in
//! that column order); `u_1`, `y_1`, `z_1` are determined by the relations
//!
//! ```text
//! v + y = Σ c_j z_j + Σ (b_i + 1) t_i
//! y + z = u
//! z + t = 0
//! t + u = y
//! u + v = Σ c_j z_j + Σ b_i t_i
//! ```
//!
//! Rays are stored in the order `v_1..v_{p0}, u_1, u_2..u_{p4}, y_1, y_2..y_{p1},
//! t_1..t_{p3}, z_2..z_{p2}, z_1`, which puts the ray matrix in the block form
//! `[[F, G], [0, H]]` with `F` on the `S` columns and `H` on the `J` columns.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fan::{Fan, HeightVector};
use crate::linalg::{bigint_serde, IntMatrix, IntVector};

/// Parameters `(p0..p4; b_1..b_{p3}; c_2..c_{p2})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BatyrevParams {
    pub p: [usize; 5],
    pub b: IntVector,
    #[serde(default)]
    pub c: IntVector,
}

impl BatyrevParams {
    pub fn new(p: [usize; 5], b: &[i64], c: &[i64]) -> Self {
        BatyrevParams {
            p,
            b: IntVector::from_i64s(b),
            c: IntVector::from_i64s(c),
        }
    }

    /// The ambient dimension `n = Σ p - 3`.
    pub fn dim(&self) -> usize {
        self.p.iter().sum::<usize>().saturating_sub(3)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.contains(&0) {
            return Err(Error::InvalidParameters(format!(
                "every p_i must be at least 1, got {:?}",
                self.p
            )));
        }
        let [_, _, p2, p3, _] = self.p;
        if self.b.dim() != p3 {
            return Err(Error::InvalidParameters(format!(
                "b has {} entries, p3 = {p3} requires {p3}",
                self.b.dim()
            )));
        }
        if self.c.dim() != p2 - 1 {
            return Err(Error::InvalidParameters(format!(
                "c has {} entries, p2 = {p2} requires {}",
                self.c.dim(),
                p2 - 1
            )));
        }
        if !self.b.is_nonnegative() || !self.c.is_nonnegative() {
            return Err(Error::InvalidParameters(
                "b and c entries must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// The five ray classes, indexed by their pentagon position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RayClass {
    V,
    Y,
    Z,
    T,
    U,
}

impl RayClass {
    pub const ALL: [RayClass; 5] = [RayClass::V, RayClass::Y, RayClass::Z, RayClass::T, RayClass::U];

    pub fn position(self) -> usize {
        self as usize
    }

    fn letter(self) -> char {
        match self {
            RayClass::V => 'v',
            RayClass::Y => 'y',
            RayClass::Z => 'z',
            RayClass::T => 't',
            RayClass::U => 'u',
        }
    }
}

/// A ray name such as `u1` (indices are 1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RayLabel {
    pub class: RayClass,
    pub index: usize,
}

impl fmt::Display for RayLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.class.letter(), self.index)
    }
}

impl Serialize for RayLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Heights supported on `v1, u1, z1` with values `d, f, e + f`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CanonicalHeight {
    #[serde(with = "bigint_serde")]
    pub d: BigInt,
    #[serde(with = "bigint_serde")]
    pub e: BigInt,
    #[serde(with = "bigint_serde")]
    pub f: BigInt,
}

impl CanonicalHeight {
    pub fn new(d: i64, e: i64, f: i64) -> Self {
        CanonicalHeight {
            d: d.into(),
            e: e.into(),
            f: f.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("d", &self.d), ("e", &self.e), ("f", &self.f)] {
            if value.is_negative() {
                return Err(Error::NegativeCanonicalParameter {
                    name,
                    value: value.clone(),
                });
            }
        }
        Ok(())
    }

    /// Size of the simplex the polytope projects onto.
    pub fn simplex_scale(&self) -> BigInt {
        &self.e + &self.f
    }

    pub fn add(&self, other: &CanonicalHeight) -> CanonicalHeight {
        CanonicalHeight {
            d: &self.d + &other.d,
            e: &self.e + &other.e,
            f: &self.f + &other.f,
        }
    }
}

impl fmt::Display for CanonicalHeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(d={}, e={}, f={})", self.d, self.e, self.f)
    }
}

/// A primitive relation `Σ_{ρ in collection} u_ρ = Σ coeff · u_ray`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitiveRelation {
    pub collection: Vec<usize>,
    pub rhs: Vec<(BigInt, usize)>,
}

#[derive(Clone, Debug)]
pub struct BatyrevStructure {
    params: BatyrevParams,
    matrix: IntMatrix,
    fan: Fan,
    labels: Vec<RayLabel>,
    classes: [Vec<usize>; 5],
    basis_rays: Vec<usize>,
    s_cols: Vec<usize>,
    j_cols: Vec<usize>,
    t_cols: Vec<usize>,
    f_block: IntMatrix,
    g_block: IntMatrix,
    h_block: IntMatrix,
    simplex_fan: Fan,
}

impl BatyrevStructure {
    pub fn build(params: BatyrevParams) -> Result<Self> {
        params.validate()?;
        let [p0, p1, p2, p3, p4] = params.p;
        let n = params.dim();

        // Ray order: v.., u1, u2.., y1, y2.., t.., z2.., z1.
        let mut labels = Vec::with_capacity(n + 3);
        let mut classes: [Vec<usize>; 5] = Default::default();
        let mut push = |class: RayClass, index: usize, labels: &mut Vec<RayLabel>| {
            classes[class.position()].push(labels.len());
            labels.push(RayLabel { class, index });
        };
        for i in 1..=p0 {
            push(RayClass::V, i, &mut labels);
        }
        for i in 1..=p4 {
            push(RayClass::U, i, &mut labels);
        }
        for i in 1..=p1 {
            push(RayClass::Y, i, &mut labels);
        }
        for i in 1..=p3 {
            push(RayClass::T, i, &mut labels);
        }
        for i in 2..=p2 {
            push(RayClass::Z, i, &mut labels);
        }
        push(RayClass::Z, 1, &mut labels);
        // Keep z1 first within its class so classes[Z][0] is z1.
        classes[RayClass::Z.position()].rotate_right(1);

        // Column order: v.., u2.., y2.., t.., z2..
        let basis_rays: Vec<usize> = (0..labels.len())
            .filter(|&r| !(labels[r].index == 1 && matches!(labels[r].class, RayClass::U | RayClass::Y | RayClass::Z)))
            .collect();
        debug_assert_eq!(basis_rays.len(), n);
        let col_of = |ray: usize| basis_rays.iter().position(|&r| r == ray);

        let class_cols = |class: RayClass| -> Vec<usize> {
            classes[class.position()]
                .iter()
                .filter_map(|&r| col_of(r))
                .collect()
        };
        let v_cols = class_cols(RayClass::V);
        let u_cols = class_cols(RayClass::U);
        let y_cols = class_cols(RayClass::Y);
        let t_cols = class_cols(RayClass::T);
        let z_cols = class_cols(RayClass::Z);

        let mut rows = Vec::with_capacity(n + 3);
        for (r, label) in labels.iter().enumerate() {
            let mut row = IntVector::zeros(n);
            if let Some(c) = col_of(r) {
                row.set(c, 1.into());
            } else {
                match label.class {
                    RayClass::U => {
                        for &c in v_cols.iter().chain(&u_cols) {
                            row.set(c, (-1).into());
                        }
                        for (k, &c) in t_cols.iter().enumerate() {
                            row.set(c, params.b.get(k).clone());
                        }
                        for (k, &c) in z_cols.iter().enumerate() {
                            row.set(c, params.c.get(k).clone());
                        }
                    }
                    RayClass::Y => {
                        for &c in v_cols.iter().chain(&y_cols) {
                            row.set(c, (-1).into());
                        }
                        for (k, &c) in t_cols.iter().enumerate() {
                            row.set(c, params.b.get(k) + 1);
                        }
                        for (k, &c) in z_cols.iter().enumerate() {
                            row.set(c, params.c.get(k).clone());
                        }
                    }
                    RayClass::Z => {
                        for &c in z_cols.iter().chain(&t_cols) {
                            row.set(c, (-1).into());
                        }
                    }
                    RayClass::V | RayClass::T => unreachable!("v and t rays are basis rays"),
                }
            }
            rows.push(row);
        }
        let matrix = IntMatrix::from_rows(&rows)?;

        let collections: Vec<Vec<usize>> = (0..5)
            .map(|a| {
                let mut c: Vec<usize> = classes[a]
                    .iter()
                    .chain(&classes[(a + 1) % 5])
                    .copied()
                    .collect();
                c.sort_unstable();
                c
            })
            .collect();
        let fan = Fan::build(matrix.clone(), collections)?;

        let s_len = p0 + (p4 - 1) + (p1 - 1);
        let s_cols: Vec<usize> = (0..s_len).collect();
        let j_cols: Vec<usize> = (s_len..n).collect();
        let t_rows: Vec<usize> = (0..s_len + 2).collect();
        let k_rows: Vec<usize> = (s_len + 2..n + 3).collect();
        let f_block = matrix.submatrix(&t_rows, &s_cols)?;
        let g_block = matrix.submatrix(&t_rows, &j_cols)?;
        let h_block = matrix.submatrix(&k_rows, &j_cols)?;
        let lower_left = matrix.submatrix(&k_rows, &s_cols)?;
        if (0..lower_left.rows()).any(|r| lower_left.row(r).iter().any(|x| !x.is_zero())) {
            return Err(Error::breach("batyrev", "lower-left block of the ray matrix is not zero"));
        }
        let simplex_fan = Fan::build(h_block.clone(), vec![(0..k_rows.len()).collect()])?;

        let st = BatyrevStructure {
            params,
            matrix,
            fan,
            labels,
            classes,
            basis_rays,
            s_cols,
            j_cols,
            t_cols: t_cols.clone(),
            f_block,
            g_block,
            h_block,
            simplex_fan,
        };
        st.verify_relations()?;
        Ok(st)
    }

    pub fn params(&self) -> &BatyrevParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    /// The `(n+3) × n` ray matrix.
    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn labels(&self) -> &[RayLabel] {
        &self.labels
    }

    /// Ray indices of one class, in label order (so `class(Z)[0]` is `z1`).
    pub fn class(&self, class: RayClass) -> &[usize] {
        &self.classes[class.position()]
    }

    pub fn v1(&self) -> usize {
        self.class(RayClass::V)[0]
    }

    pub fn u1(&self) -> usize {
        self.class(RayClass::U)[0]
    }

    pub fn y1(&self) -> usize {
        self.class(RayClass::Y)[0]
    }

    pub fn z1(&self) -> usize {
        self.class(RayClass::Z)[0]
    }

    /// Ray whose generator is the `i`-th standard basis vector.
    pub fn basis_rays(&self) -> &[usize] {
        &self.basis_rays
    }

    /// Fiber coordinates `S = {v.., u2.., y2..}` as column indices.
    pub fn s_cols(&self) -> &[usize] {
        &self.s_cols
    }

    /// Simplex coordinates `J = {t.., z2..}` as column indices.
    pub fn j_cols(&self) -> &[usize] {
        &self.j_cols
    }

    /// Positions of the `t` coordinates inside `J`.
    pub fn t_positions_in_j(&self) -> Vec<usize> {
        self.t_cols.iter().map(|c| c - self.s_cols.len()).collect()
    }

    /// Rows `T = S ∪ {u1, y1}`; they are the first `|S| + 2` rays.
    pub fn t_rows(&self) -> std::ops::Range<usize> {
        0..self.s_cols.len() + 2
    }

    /// Rows `K = J ∪ {z1}`; they are the last `|J| + 1` rays.
    pub fn k_rows(&self) -> std::ops::Range<usize> {
        self.s_cols.len() + 2..self.matrix.rows()
    }

    pub fn f_block(&self) -> &IntMatrix {
        &self.f_block
    }

    pub fn g_block(&self) -> &IntMatrix {
        &self.g_block
    }

    pub fn h_block(&self) -> &IntMatrix {
        &self.h_block
    }

    /// The projective-space fan whose rays are the rows of `H`.
    pub fn simplex_fan(&self) -> &Fan {
        &self.simplex_fan
    }

    /// The five primitive relations, collection `X_a ∪ X_{a+1}` first.
    pub fn relations(&self) -> Vec<PrimitiveRelation> {
        let b = &self.params.b;
        let c = &self.params.c;
        let t = self.class(RayClass::T);
        // z2.. in label order (skip z1 at position 0).
        let z_rest = &self.class(RayClass::Z)[1..];
        let zs = || z_rest.iter().enumerate().map(|(k, &r)| (c.get(k).clone(), r));
        let ones = |rays: &[usize]| rays.iter().map(|&r| (BigInt::from(1), r)).collect::<Vec<_>>();
        let rhs: [Vec<(BigInt, usize)>; 5] = [
            zs().chain(t.iter().enumerate().map(|(k, &r)| (b.get(k) + 1, r))).collect(),
            ones(self.class(RayClass::U)),
            Vec::new(),
            ones(self.class(RayClass::Y)),
            zs().chain(t.iter().enumerate().map(|(k, &r)| (b.get(k).clone(), r))).collect(),
        ];
        rhs.into_iter()
            .enumerate()
            .map(|(a, rhs)| {
                let mut collection: Vec<usize> = self.classes[a]
                    .iter()
                    .chain(&self.classes[(a + 1) % 5])
                    .copied()
                    .collect();
                collection.sort_unstable();
                PrimitiveRelation {
                    collection,
                    rhs: rhs.into_iter().filter(|(k, _)| !k.is_zero()).collect(),
                }
            })
            .collect()
    }

    /// Checks every primitive relation as an exact vector identity.
    pub fn verify_relations(&self) -> Result<()> {
        let n = self.dim();
        for rel in self.relations() {
            let lhs = rel
                .collection
                .iter()
                .fold(IntVector::zeros(n), |acc, &r| &acc + &self.matrix.row_vector(r));
            let rhs = rel.rhs.iter().fold(IntVector::zeros(n), |acc, (k, r)| {
                &acc + &self.matrix.row_vector(*r).scale(k)
            });
            if lhs != rhs {
                return Err(Error::breach(
                    "batyrev",
                    format!("relation for {:?} fails: {lhs} != {rhs}", rel.collection),
                ));
            }
        }
        Ok(())
    }

    /// Height vector with `h_{v1} = d`, `h_{u1} = f`, `h_{z1} = e + f`, zero
    /// elsewhere, without checking signs.
    pub fn raw_heights(&self, h: &CanonicalHeight) -> HeightVector {
        let mut values = IntVector::zeros(self.matrix.rows());
        values.set(self.v1(), h.d.clone());
        values.set(self.u1(), h.f.clone());
        values.set(self.z1(), &h.e + &h.f);
        HeightVector::new(values)
    }

    pub fn heights_from_canonical(&self, h: &CanonicalHeight) -> Result<HeightVector> {
        h.validate()?;
        Ok(self.raw_heights(h))
    }

    /// Reads `(d, e, f)` off a height vector that is already canonical.
    pub fn read_canonical(&self, h: &HeightVector) -> Result<CanonicalHeight> {
        self.fan.check_heights(h)?;
        let keep = [self.v1(), self.u1(), self.z1()];
        if let Some(r) = (0..h.len()).find(|r| !keep.contains(r) && !h.get(*r).is_zero()) {
            return Err(Error::NonCanonicalHeight(format!(
                "entry {} = {} is nonzero",
                self.labels[r],
                h.get(r)
            )));
        }
        let f = h.get(self.u1()).clone();
        let canonical = CanonicalHeight {
            d: h.get(self.v1()).clone(),
            e: h.get(self.z1()) - &f,
            f,
        };
        canonical
            .validate()
            .map_err(|e| Error::NonCanonicalHeight(e.to_string()))?;
        Ok(canonical)
    }

    /// Reduces a convex height vector modulo the columns of the ray matrix.
    ///
    /// Returns `(d, e, f)` and `x` with `h_canonical = h_raw + A x`; the lattice
    /// points of the canonical polytope are those of the raw one shifted by `-x`.
    pub fn canonical_height(&self, h_raw: &HeightVector) -> Result<(CanonicalHeight, IntVector)> {
        self.fan.require_convex(h_raw)?;
        let n = self.dim();
        let mut x = IntVector::zeros(n);
        for (col, &ray) in self.basis_rays.iter().enumerate() {
            x.set(col, -h_raw.get(ray));
        }
        let shifted = h_raw.values() + &self.matrix.mul_vec(&x)?;
        // Only v1, u1, y1 have a nonzero first coordinate: +1, -1, -1.
        let s = shifted.get(self.y1()).clone();
        x.set(0, x.get(0) + &s);
        let canonical = HeightVector::new(h_raw.values() + &self.matrix.mul_vec(&x)?);

        let keep = [self.v1(), self.u1(), self.z1()];
        if (0..canonical.len()).any(|r| !keep.contains(&r) && !canonical.get(r).is_zero()) {
            return Err(Error::breach(
                "canonical_height",
                format!("reduction left support outside v1, u1, z1: {canonical}"),
            ));
        }
        let f = canonical.get(self.u1()).clone();
        let params = CanonicalHeight {
            d: canonical.get(self.v1()).clone(),
            e: canonical.get(self.z1()) - &f,
            f,
        };
        params.validate()?;
        Ok((params, x))
    }

    /// Number of maximal cones, `Σ p_a p_b p_c` over the five vertex covers
    /// `{a, b, c}` of the pentagon.
    pub fn expected_cone_count(&self) -> usize {
        let p = self.params.p;
        (0..5)
            .map(|a| {
                // complement of the non-adjacent pair {a, a+2}
                let (x, y, z) = ((a + 1) % 5, (a + 3) % 5, (a + 4) % 5);
                p[x] * p[y] * p[z]
            })
            .sum()
    }
}
