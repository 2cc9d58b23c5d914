//! Constructive decomposition `α = β + γ` for Batyrev fans.
//!
//! The ray matrix has the block form `[[F, G], [0, H]]`, so projecting onto
//! the `J` coordinates sends `P(A, h)` onto the simplex `(e + f)Δ`, and the
//! slice over a point `β_J` is `P(F, θ)` with `θ = π_T(h) + G β_J`. A point
//! `α` of `P + Q` is split in two stages:
//!
//! 1. split `α_J` between the two simplices, keeping `Σ_{t} β` on the side of
//!    `f` that matches `Σ_{t} α` against `f + f'`;
//! 2. inside the slice, one of the rows `u1`, `y1` does not support the
//!    polytope, and dropping or replacing it leaves a splitting fan, where the
//!    fiber point `α_S` decomposes. The decomposition is found by searching the
//!    intersection `P(F̃, θ̃) ∩ (α_S - P(F̃, θ̃'))`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::batyrev::{BatyrevStructure, CanonicalHeight};
use crate::error::{Error, Result};
use crate::fan::{Fan, HeightVector};
use crate::lattice::{bounding_box, BoxedSystem};
use crate::linalg::{IntMatrix, IntVector, LatticePoint};
use crate::polytope::{self, compare_sumset, IdpVerdict, LatticePolytope};

/// Which of `p1`, `p4` exceed one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FiberCase {
    /// `p1 = p4 = 1`
    Single,
    /// `p1, p4 >= 2`
    Both,
    /// `p1 > p4 = 1`
    YOnly,
    /// `p4 > p1 = 1`
    UOnly,
}

impl FiberCase {
    pub fn of(st: &BatyrevStructure) -> FiberCase {
        let [_, p1, _, _, p4] = st.params().p;
        match (p1 > 1, p4 > 1) {
            (false, false) => FiberCase::Single,
            (true, true) => FiberCase::Both,
            (true, false) => FiberCase::YOnly,
            (false, true) => FiberCase::UOnly,
        }
    }

    /// The case number 1 to 4.
    pub fn number(self) -> u8 {
        match self {
            FiberCase::Single => 1,
            FiberCase::Both => 2,
            FiberCase::YOnly => 3,
            FiberCase::UOnly => 4,
        }
    }
}

impl Serialize for FiberCase {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.number())
    }
}

impl<'de> Deserialize<'de> for FiberCase {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match u8::deserialize(d)? {
            1 => Ok(FiberCase::Single),
            2 => Ok(FiberCase::Both),
            3 => Ok(FiberCase::YOnly),
            4 => Ok(FiberCase::UOnly),
            n => Err(serde::de::Error::custom(format!("case must be 1-4, got {n}"))),
        }
    }
}

/// `Low` when `Σ_{t} α <= f + f'` (boundary included), else `High`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Low,
    High,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Low => "low",
            Branch::High => "high",
        })
    }
}

/// `P(H, π_K(h))`, which is always `scale · Δ_dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplexProjection {
    pub scale: BigInt,
    pub dim: usize,
    pub vertices: Vec<IntVector>,
}

/// Projects `P(A, h)` onto the `J` coordinates and checks the result against
/// the simplex `(e + f)Δ_{|J|}`.
pub fn project_to_simplex(st: &BatyrevStructure, h: &CanonicalHeight) -> Result<SimplexProjection> {
    h.validate()?;
    let full = st.raw_heights(h);
    let k_heights = HeightVector::new(IntVector::new(
        st.k_rows().map(|r| full.get(r).clone()).collect(),
    ));
    let dim = st.j_cols().len();
    let vertices = polytope::vertices(st.simplex_fan(), &k_heights)?;
    let scale = h.simplex_scale();
    let mut expected: Vec<IntVector> = vec![IntVector::zeros(dim)];
    if !scale.is_zero() {
        expected.extend((0..dim).map(|j| IntVector::unit(dim, j).scale(&scale)));
    }
    expected.sort();
    if vertices != expected {
        return Err(Error::breach(
            "project_to_simplex",
            format!("projection vertices {vertices:?} are not those of {scale}Δ_{dim}"),
        ));
    }
    Ok(SimplexProjection { scale, dim, vertices })
}

/// A split `α_J = β_J + γ_J` between `(e + f)Δ` and `(e' + f')Δ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplexSplit {
    pub beta: IntVector,
    pub gamma: IntVector,
    pub branch: Branch,
}

/// Splits a lattice point of `(e + e' + f + f')Δ`.
///
/// `t_positions` are the indices of the `t` coordinates inside `J`. The
/// `t`-sum of `β` is taken as large as its branch window allows, then the rest
/// of `β_J` is filled greedily in coordinate order.
pub fn split_simplex_point(
    alpha: &IntVector,
    t_positions: &[usize],
    h: &CanonicalHeight,
    h_prime: &CanonicalHeight,
) -> Result<SimplexSplit> {
    let total = h.simplex_scale() + h_prime.simplex_scale();
    let outside = || Error::OutsideSimplex {
        alpha: alpha.entries().to_vec(),
        scale: total.clone(),
    };
    if !alpha.is_nonnegative() || alpha.sum() > total {
        return Err(outside());
    }
    if t_positions.iter().any(|&j| j >= alpha.dim()) {
        return Err(Error::DimensionMismatch {
            expected: alpha.dim(),
            found: t_positions.len(),
        });
    }
    let is_t = |j: usize| t_positions.contains(&j);
    let a3: BigInt = t_positions.iter().map(|&j| alpha.get(j)).sum();
    let a2: BigInt = alpha.sum() - &a3;
    let a = &a3 + &a2;
    let (e, f, e2, f2) = (&h.e, &h.f, &h_prime.e, &h_prime.f);
    let zero = BigInt::zero();

    let (branch, low, high) = if a3 <= f + f2 {
        (Branch::Low, (&a3 - f2).max(zero.clone()), f.min(&a3).clone())
    } else {
        (
            Branch::High,
            f.max(&(&a3 - f2 - e2)).clone(),
            (f + e).min(&a3 - f2),
        )
    };
    if low > high {
        return Err(Error::breach(
            "split_simplex_point",
            format!("empty window [{low}, {high}] for t-sum of {alpha}"),
        ));
    }
    let b3 = high;
    let b2_low = (&a - e2 - f2 - &b3).max(zero.clone());
    let b2 = a2.clone().min(e + f - &b3);
    if b2_low > b2 {
        return Err(Error::breach(
            "split_simplex_point",
            format!("empty window [{b2_low}, {b2}] for the remaining sum of {alpha}"),
        ));
    }

    let mut beta = IntVector::zeros(alpha.dim());
    let (mut rest3, mut rest2) = (b3, b2);
    for j in 0..alpha.dim() {
        let rest = if is_t(j) { &mut rest3 } else { &mut rest2 };
        let take = alpha.get(j).min(rest).clone();
        *rest -= &take;
        beta.set(j, take);
    }
    let gamma = alpha - &beta;
    Ok(SimplexSplit { beta, gamma, branch })
}

/// `θ = π_T(h) + G · point_J`, indexed by the `T` rows.
pub fn fiber_heights(st: &BatyrevStructure, h: &CanonicalHeight, point_j: &IntVector) -> Result<HeightVector> {
    let full = st.raw_heights(h);
    let base = IntVector::new(st.t_rows().map(|r| full.get(r).clone()).collect());
    Ok(HeightVector::new(base.checked_add(&st.g_block().mul_vec(point_j)?)?))
}

/// The splitting fan used inside slices for one `(case, branch)`.
#[derive(Clone, Debug)]
pub struct ReducedFan {
    /// `T`-row indices kept, in order.
    pub rows: Vec<usize>,
    /// `θ̃[target] := θ[source]`, both as `T`-row indices.
    pub substitute: Option<(usize, usize)>,
    pub fan: Arc<Fan>,
}

impl ReducedFan {
    pub fn build(st: &BatyrevStructure, case: FiberCase, branch: Branch) -> Result<ReducedFan> {
        let [p0, p1, _, _, p4] = st.params().p;
        // T rows: v.., u1, u2.., y1, y2..
        let v: Vec<usize> = (0..p0).collect();
        let u1 = p0;
        let u: Vec<usize> = (p0..p0 + p4).collect();
        let y1 = p0 + p4;
        let y: Vec<usize> = (y1..y1 + p1).collect();
        let union = |a: &[usize], b: &[usize]| {
            let mut c: Vec<usize> = a.iter().chain(b).copied().collect();
            c.sort_unstable();
            c
        };
        let all: Vec<usize> = st.t_rows().collect();
        let (rows, collections, substitute) = match (case, branch) {
            (FiberCase::Single, Branch::High) => (union(&v, &[u1]), vec![(0..=p0).collect()], None),
            (FiberCase::Single, Branch::Low) => (union(&v, &[y1]), vec![(0..=p0).collect()], None),
            (FiberCase::Both, Branch::High) => (all, vec![union(&v, &u), y], None),
            (FiberCase::Both, Branch::Low) => (all, vec![union(&v, &y), u], None),
            (FiberCase::YOnly, b) => (
                all,
                vec![union(&v, &u), y],
                (b == Branch::Low).then_some((u1, y1)),
            ),
            (FiberCase::UOnly, b) => (
                all,
                vec![union(&v, &y), u],
                (b == Branch::High).then_some((y1, u1)),
            ),
        };
        let matrix = st.f_block().select_rows(&rows)?;
        let fan = Fan::build(matrix, collections)?;
        if !fan.is_splitting() {
            return Err(Error::breach("reduce_fiber", "reduced fan is not splitting"));
        }
        Ok(ReducedFan {
            rows,
            substitute,
            fan: Arc::new(fan),
        })
    }

    pub fn reduce(&self, theta: &HeightVector) -> HeightVector {
        let mut values = theta.values().clone();
        if let Some((target, source)) = self.substitute {
            values.set(target, theta.get(source).clone());
        }
        HeightVector::new(values.select(&self.rows))
    }
}

/// One slice, before and after removing the non-supporting row.
#[derive(Clone, Debug)]
pub struct FiberProblem {
    pub case: FiberCase,
    pub branch: Branch,
    pub f: IntMatrix,
    pub theta: HeightVector,
    pub theta_prime: HeightVector,
    pub kept_rows: Vec<usize>,
    pub f_tilde: IntMatrix,
    pub theta_tilde: HeightVector,
    pub theta_tilde_prime: HeightVector,
    pub fan: Arc<Fan>,
}

impl FiberProblem {
    pub fn primitive_collections(&self) -> &[Vec<usize>] {
        self.fan.primitive_collections()
    }
}

/// Applies the case table to `θ`, `θ'` and checks that both reduced heights
/// are convex on the reduced fan.
pub fn reduce_fiber(
    st: &BatyrevStructure,
    reduced: &ReducedFan,
    case: FiberCase,
    branch: Branch,
    theta: &HeightVector,
    theta_prime: &HeightVector,
) -> Result<FiberProblem> {
    let theta_tilde = reduced.reduce(theta);
    let theta_tilde_prime = reduced.reduce(theta_prime);
    for (name, t) in [("θ̃", &theta_tilde), ("θ̃'", &theta_tilde_prime)] {
        let conv = reduced.fan.convexity(t)?;
        if let Some(i) = conv.first_violation() {
            return Err(Error::ConvexityPostcheckFailed(format!(
                "case {}, {branch} branch: {name} = {t} has slack {} on collection {:?}",
                case.number(),
                conv.slacks[i],
                reduced.fan.primitive_collections()[i]
            )));
        }
    }
    Ok(FiberProblem {
        case,
        branch,
        f: st.f_block().clone(),
        theta: theta.clone(),
        theta_prime: theta_prime.clone(),
        kept_rows: reduced.rows.clone(),
        f_tilde: reduced.fan.rays().clone(),
        theta_tilde,
        theta_tilde_prime,
        fan: reduced.fan.clone(),
    })
}

/// Search for `β` in `P(F̃, θ̃) ∩ (α - P(F̃, θ̃'))`.
struct FiberSearch {
    dim: usize,
    rows: usize,
    coeffs: Vec<i64>,
    theta: Vec<i64>,
    theta_prime: Vec<i64>,
    p_box: (Vec<i64>, Vec<i64>),
    q_box: (Vec<i64>, Vec<i64>),
}

impl FiberSearch {
    fn new(fan: &Fan, theta: &HeightVector, theta_prime: &HeightVector) -> Result<Self> {
        let dim = fan.dim();
        let rows = fan.num_rays();
        let f: Vec<i64> = (0..rows)
            .flat_map(|r| fan.rays().row(r).iter())
            .map(|x| x.to_i64().ok_or(Error::CoordinateOverflow))
            .collect::<Result<_>>()?;
        let mut coeffs = f.clone();
        coeffs.extend(f.iter().map(|x| -x));
        Ok(FiberSearch {
            dim,
            rows,
            coeffs,
            theta: theta.values().to_lattice_point()?,
            theta_prime: theta_prime.values().to_lattice_point()?,
            p_box: bounding_box(&polytope::vertices(fan, theta)?)?,
            q_box: bounding_box(&polytope::vertices(fan, theta_prime)?)?,
        })
    }

    fn split(&self, alpha: &[i64]) -> Result<Option<LatticePoint>> {
        let f = &self.coeffs[..self.rows * self.dim];
        let mut bounds: Vec<i64> = self.theta.iter().map(|t| -t).collect();
        for r in 0..self.rows {
            let fa: i128 = f[r * self.dim..(r + 1) * self.dim]
                .iter()
                .zip(alpha)
                .map(|(&a, &x)| i128::from(a) * i128::from(x))
                .sum();
            let b = -i128::from(self.theta_prime[r]) - fa;
            bounds.push(i64::try_from(b).map_err(|_| Error::CoordinateOverflow)?);
        }
        let mut lo = Vec::with_capacity(self.dim);
        let mut hi = Vec::with_capacity(self.dim);
        for (i, a) in alpha.iter().enumerate().take(self.dim) {
            lo.push(self.p_box.0[i].max(a - self.q_box.1[i]));
            hi.push(self.p_box.1[i].min(a - self.q_box.0[i]));
        }
        Ok(BoxedSystem::from_parts(self.dim, self.coeffs.clone(), bounds, lo, hi)?.first_point())
    }
}

/// Decomposes `α_S` inside a slice whose reduced fan is splitting.
pub fn decompose_in_splitting_fiber(
    fan: &Fan,
    theta_tilde: &HeightVector,
    theta_tilde_prime: &HeightVector,
    alpha_s: &IntVector,
) -> Result<(IntVector, IntVector)> {
    let search = FiberSearch::new(fan, theta_tilde, theta_tilde_prime)?;
    let beta = search
        .split(&alpha_s.to_lattice_point()?)?
        .ok_or(Error::NoLatticePoint)?;
    let beta = IntVector::from_lattice_point(&beta);
    let gamma = alpha_s - &beta;
    Ok((beta, gamma))
}

/// `α = β + γ` with `β ∈ P`, `γ ∈ Q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionCertificate {
    pub alpha: IntVector,
    pub beta: IntVector,
    pub gamma: IntVector,
    pub case: FiberCase,
    pub branch: Branch,
}

impl DecompositionCertificate {
    /// Checks `β + γ = α`, `Aβ >= -h` and `Aγ >= -h'` directly.
    pub fn validate(&self, fan: &Fan, h: &HeightVector, h_prime: &HeightVector) -> Result<()> {
        if &self.beta + &self.gamma != self.alpha {
            return Err(Error::breach("certificate", format!("{} + {} != {}", self.beta, self.gamma, self.alpha)));
        }
        if !polytope::contains(fan, h, &self.beta)? {
            return Err(Error::breach("certificate", format!("β = {} is not in P", self.beta)));
        }
        if !polytope::contains(fan, h_prime, &self.gamma)? {
            return Err(Error::breach("certificate", format!("γ = {} is not in Q", self.gamma)));
        }
        Ok(())
    }
}

/// Counters from [`Decomposer::decompose_all_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DecomposeStats {
    pub points: usize,
    pub fibers: usize,
    /// Slices where the slice identities were checked.
    pub fibers_verified: usize,
}

/// Decomposition context for one `(structure, h, h')`.
///
/// Heights may be given in any form; they are reduced to `(d, e, f)` and all
/// points passed in or returned are in the caller's original coordinates.
#[derive(Debug)]
pub struct Decomposer<'s> {
    st: &'s BatyrevStructure,
    case: FiberCase,
    h: CanonicalHeight,
    h_prime: CanonicalHeight,
    input_heights: (HeightVector, HeightVector),
    // Canonical P is the input P shifted by -shift.
    shift: (IntVector, IntVector),
    p_heights: HeightVector,
    q_heights: HeightVector,
    sum_heights: HeightVector,
    p_box: (Vec<i64>, Vec<i64>),
    q_box: (Vec<i64>, Vec<i64>),
    p_system: BoxedSystem,
    q_system: BoxedSystem,
    reduced: [ReducedFan; 2],
}

impl<'s> Decomposer<'s> {
    pub fn new(st: &'s BatyrevStructure, h: &HeightVector, h_prime: &HeightVector) -> Result<Self> {
        let (c, x) = st.canonical_height(h)?;
        let (c2, x2) = st.canonical_height(h_prime)?;
        let p_heights = st.raw_heights(&c);
        let q_heights = st.raw_heights(&c2);
        let sum_heights = p_heights.add(&q_heights)?;
        let fan = st.fan();
        let p_box = bounding_box(&polytope::vertices(fan, &p_heights)?)?;
        let q_box = bounding_box(&polytope::vertices(fan, &q_heights)?)?;
        let p_system = BoxedSystem::new(fan.rays(), &-p_heights.values(), &p_box.0, &p_box.1)?;
        let q_system = BoxedSystem::new(fan.rays(), &-q_heights.values(), &q_box.0, &q_box.1)?;
        let case = FiberCase::of(st);
        let reduced = [
            ReducedFan::build(st, case, Branch::Low)?,
            ReducedFan::build(st, case, Branch::High)?,
        ];
        Ok(Decomposer {
            st,
            case,
            h: c,
            h_prime: c2,
            input_heights: (h.clone(), h_prime.clone()),
            shift: (x, x2),
            p_heights,
            q_heights,
            sum_heights,
            p_box,
            q_box,
            p_system,
            q_system,
            reduced,
        })
    }

    pub fn from_canonical(st: &'s BatyrevStructure, h: &CanonicalHeight, h_prime: &CanonicalHeight) -> Result<Self> {
        Self::new(st, &st.heights_from_canonical(h)?, &st.heights_from_canonical(h_prime)?)
    }

    pub fn case(&self) -> FiberCase {
        self.case
    }

    pub fn canonical(&self) -> (&CanonicalHeight, &CanonicalHeight) {
        (&self.h, &self.h_prime)
    }

    pub fn reduced_fan(&self, branch: Branch) -> &ReducedFan {
        &self.reduced[branch as usize]
    }

    /// `P`, `Q` and `P + Q` in canonical coordinates.
    pub fn canonical_polytopes(&self) -> Result<[LatticePolytope<'s>; 3]> {
        let fan = self.st.fan();
        Ok([
            LatticePolytope::new(fan, self.p_heights.clone())?,
            LatticePolytope::new(fan, self.q_heights.clone())?,
            LatticePolytope::new(fan, self.sum_heights.clone())?,
        ])
    }

    /// The slice problem over `α_J` (canonical coordinates).
    pub fn fiber_problem(&self, alpha_j: &IntVector) -> Result<(SimplexSplit, FiberProblem)> {
        let split = split_simplex_point(alpha_j, &self.st.t_positions_in_j(), &self.h, &self.h_prime)?;
        let theta = fiber_heights(self.st, &self.h, &split.beta)?;
        let theta_prime = fiber_heights(self.st, &self.h_prime, &split.gamma)?;
        let problem = reduce_fiber(
            self.st,
            self.reduced_fan(split.branch),
            self.case,
            split.branch,
            &theta,
            &theta_prime,
        )?;
        Ok((split, problem))
    }

    /// Decomposes one point of `P + Q`, given in input coordinates.
    pub fn decompose(&self, alpha: &IntVector) -> Result<DecompositionCertificate> {
        if alpha.dim() != self.st.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.st.dim(),
                found: alpha.dim(),
            });
        }
        let canonical = alpha - &(&self.shift.0 + &self.shift.1);
        if !polytope::contains(self.st.fan(), &self.sum_heights, &canonical)? {
            return Err(Error::PointNotInSum);
        }
        let alpha_j = canonical.select(self.st.j_cols());
        let (split, problem) = self.fiber_problem(&alpha_j)?;
        let search = FiberSearch::new(&problem.fan, &problem.theta_tilde, &problem.theta_tilde_prime)?;
        let alpha_s = canonical.select(self.st.s_cols()).to_lattice_point()?;
        let cert = self.assemble(&canonical, &search, &alpha_s, &split)?;
        cert.validate(self.st.fan(), &self.input_heights.0, &self.input_heights.1)?;
        Ok(cert)
    }

    fn assemble(
        &self,
        canonical: &IntVector,
        search: &FiberSearch,
        alpha_s: &[i64],
        split: &SimplexSplit,
    ) -> Result<DecompositionCertificate> {
        let beta_s = search.split(alpha_s)?.ok_or(Error::NoLatticePoint)?;
        let beta: Vec<BigInt> = beta_s
            .iter()
            .map(|&x| BigInt::from(x))
            .chain(split.beta.entries().iter().cloned())
            .collect();
        let beta = IntVector::new(beta);
        let gamma = canonical - &beta;
        // Validate in canonical coordinates before shifting back.
        let (b, g) = (beta.to_lattice_point()?, gamma.to_lattice_point()?);
        if !self.p_system.satisfies(&b) || !self.q_system.satisfies(&g) {
            return Err(Error::breach(
                "reassembly",
                format!("{canonical} = {beta} + {gamma} leaves P or Q"),
            ));
        }
        Ok(DecompositionCertificate {
            alpha: canonical + &(&self.shift.0 + &self.shift.1),
            beta: &beta + &self.shift.0,
            gamma: &gamma + &self.shift.1,
            case: self.case,
            branch: split.branch,
        })
    }

    /// Decomposes every lattice point of `P + Q`, in lexicographic order of
    /// `(α_J, α_S)`. With `verify_fibers`, each slice is also checked for
    /// `P(F, θ) = P(F̃, θ̃)` (and likewise for `θ'`) and for
    /// `P̃ + Q̃ = (P + Q)̃` on lattice points.
    pub fn decompose_all_with(
        &self,
        verify_fibers: bool,
        mut emit: impl FnMut(DecompositionCertificate) -> Result<()>,
    ) -> Result<DecomposeStats> {
        let [_, _, sum] = self.canonical_polytopes()?;
        let s_len = self.st.s_cols().len();
        let mut groups: BTreeMap<LatticePoint, Vec<LatticePoint>> = BTreeMap::new();
        for x in sum.lattice_points()? {
            groups.entry(x[s_len..].to_vec()).or_default().push(x[..s_len].to_vec());
        }
        let mut stats = DecomposeStats::default();
        for (alpha_j, alpha_s_list) in groups {
            let alpha_j_vec = IntVector::from_lattice_point(&alpha_j);
            let (split, problem) = self.fiber_problem(&alpha_j_vec)?;
            if verify_fibers {
                self.verify_fiber(&problem, &alpha_s_list)?;
                stats.fibers_verified += 1;
            }
            let search = FiberSearch::new(&problem.fan, &problem.theta_tilde, &problem.theta_tilde_prime)?;
            for alpha_s in &alpha_s_list {
                let canonical: Vec<i64> = alpha_s.iter().chain(&alpha_j).copied().collect();
                let cert = self.assemble(&IntVector::from_lattice_point(&canonical), &search, alpha_s, &split)?;
                emit(cert)?;
                stats.points += 1;
            }
            stats.fibers += 1;
        }
        Ok(stats)
    }

    /// All certificates, each validated against the input heights.
    pub fn decompose_all(&self) -> Result<Vec<DecompositionCertificate>> {
        let fan = self.st.fan();
        let mut out = Vec::new();
        self.decompose_all_with(false, |cert| {
            cert.validate(fan, &self.input_heights.0, &self.input_heights.1)?;
            out.push(cert);
            Ok(())
        })?;
        Ok(out)
    }

    fn verify_fiber(&self, problem: &FiberProblem, alpha_s_list: &[LatticePoint]) -> Result<()> {
        let s_len = self.st.s_cols().len();
        let project = |b: &(Vec<i64>, Vec<i64>)| (b.0[..s_len].to_vec(), b.1[..s_len].to_vec());
        let slice = |theta: &HeightVector, bx: (Vec<i64>, Vec<i64>)| -> Result<Vec<LatticePoint>> {
            Ok(BoxedSystem::new(&problem.f, &-theta.values(), &bx.0, &bx.1)?.points())
        };
        let reduced = |theta: &HeightVector| -> Result<Vec<LatticePoint>> {
            LatticePolytope::new(&problem.fan, theta.clone())?
                .lattice_points()
                .map(<[_]>::to_vec)
        };
        let p_slice = slice(&problem.theta, project(&self.p_box))?;
        let q_slice = slice(&problem.theta_prime, project(&self.q_box))?;
        let p_reduced = reduced(&problem.theta_tilde)?;
        let q_reduced = reduced(&problem.theta_tilde_prime)?;
        if p_slice != p_reduced || q_slice != q_reduced {
            return Err(Error::breach(
                "reduce_fiber",
                format!(
                    "removed row supports the slice (case {}, {} branch, θ = {}, θ' = {})",
                    problem.case.number(),
                    problem.branch,
                    problem.theta,
                    problem.theta_prime
                ),
            ));
        }
        let sum_theta = problem.theta.add(&problem.theta_prime)?;
        let sum_box = (
            self.p_box.0.iter().zip(&self.q_box.0).map(|(a, b)| a + b).collect(),
            self.p_box.1.iter().zip(&self.q_box.1).map(|(a, b)| a + b).collect(),
        );
        let sum_slice = slice(&sum_theta, project(&sum_box))?;
        if sum_slice != alpha_s_list {
            return Err(Error::breach(
                "fiber",
                "slice of P + Q disagrees with the enumerated points of P + Q",
            ));
        }
        if let IdpVerdict::Witness(w) = compare_sumset(&p_reduced, &q_reduced, &sum_slice) {
            return Err(Error::breach(
                "fiber",
                format!("slice sum misses {} points, first {:?}", w.len(), w[0]),
            ));
        }
        Ok(())
    }
}

/// Decomposes `α` for heights given in any convex form.
pub fn decompose(
    st: &BatyrevStructure,
    h: &HeightVector,
    h_prime: &HeightVector,
    alpha: &IntVector,
) -> Result<DecompositionCertificate> {
    Decomposer::new(st, h, h_prime)?.decompose(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::batyrev::BatyrevParams;

    fn threefold() -> BatyrevStructure {
        BatyrevStructure::build(BatyrevParams::new([2, 1, 1, 1, 1], &[1], &[])).unwrap()
    }

    fn v(x: &[i64]) -> IntVector {
        IntVector::from_i64s(x)
    }

    fn p() -> CanonicalHeight {
        CanonicalHeight::new(0, 1, 3)
    }

    fn q() -> CanonicalHeight {
        CanonicalHeight::new(2, 2, 1)
    }

    #[test]
    fn projections() {
        let st = threefold();
        let proj = project_to_simplex(&st, &p()).unwrap();
        assert_eq!(proj.vertices, vec![v(&[0]), v(&[4])]);
        assert_eq!(project_to_simplex(&st, &q()).unwrap().vertices, vec![v(&[0]), v(&[3])]);
        assert_eq!(
            project_to_simplex(&st, &p().add(&q())).unwrap().vertices,
            vec![v(&[0]), v(&[7])]
        );
        let zero = project_to_simplex(&st, &CanonicalHeight::new(5, 0, 0)).unwrap();
        assert_eq!(zero.vertices, vec![v(&[0])]);
    }

    #[test]
    fn simplex_split_examples() {
        let split = split_simplex_point(&v(&[7]), &[0], &p(), &q()).unwrap();
        assert_eq!((split.beta, split.gamma, split.branch), (v(&[4]), v(&[3]), Branch::High));
        let split = split_simplex_point(&v(&[4]), &[0], &p(), &q()).unwrap();
        assert_eq!((split.beta, split.gamma, split.branch), (v(&[3]), v(&[1]), Branch::Low));
        let split = split_simplex_point(&v(&[0]), &[0], &p(), &q()).unwrap();
        assert_eq!((split.beta, split.gamma), (v(&[0]), v(&[0])));
        assert!(matches!(
            split_simplex_point(&v(&[8]), &[0], &p(), &q()),
            Err(Error::OutsideSimplex { .. })
        ));
    }

    #[test]
    fn fiber_height_examples() {
        let st = threefold();
        assert_eq!(
            fiber_heights(&st, &p(), &v(&[4])).unwrap(),
            HeightVector::from_i64s(&[0, 0, 7, 8])
        );
        assert_eq!(
            fiber_heights(&st, &q(), &v(&[3])).unwrap(),
            HeightVector::from_i64s(&[2, 0, 4, 6])
        );
        assert_eq!(
            fiber_heights(&st, &q(), &v(&[0])).unwrap(),
            HeightVector::from_i64s(&[2, 0, 1, 0])
        );
    }

    #[test]
    fn reduce_fiber_examples() {
        let st = threefold();
        let d = Decomposer::from_canonical(&st, &p(), &q()).unwrap();
        let (_, high) = d.fiber_problem(&v(&[7])).unwrap();
        assert_eq!(high.case, FiberCase::Single);
        assert_eq!(high.branch, Branch::High);
        assert_eq!(high.kept_rows, vec![0, 1, 2]);
        assert_eq!(high.theta_tilde, HeightVector::from_i64s(&[0, 0, 7]));
        assert_eq!(high.theta_tilde_prime, HeightVector::from_i64s(&[2, 0, 4]));

        let (_, low) = d.fiber_problem(&v(&[4])).unwrap();
        assert_eq!(low.branch, Branch::Low);
        assert_eq!(low.kept_rows, vec![0, 1, 3]);
        assert_eq!(low.theta_tilde, HeightVector::from_i64s(&[0, 0, 6]));
        assert_eq!(low.theta_tilde_prime, HeightVector::from_i64s(&[2, 0, 2]));

        let (_, origin) = d.fiber_problem(&v(&[0])).unwrap();
        assert_eq!(origin.theta_tilde, HeightVector::from_i64s(&[0, 0, 0]));
        assert_eq!(origin.theta_tilde_prime, HeightVector::from_i64s(&[2, 0, 0]));
    }

    #[test]
    fn fiber_triangles() {
        let st = threefold();
        let d = Decomposer::from_canonical(&st, &p(), &q()).unwrap();
        let (_, prob) = d.fiber_problem(&v(&[7])).unwrap();
        let tri = |h: &HeightVector| polytope::vertices(&prob.fan, h).unwrap();
        assert_eq!(tri(&prob.theta_tilde), vec![v(&[0, 0]), v(&[0, 7]), v(&[7, 0])]);
        assert_eq!(tri(&prob.theta_tilde_prime), vec![v(&[-2, 0]), v(&[-2, 6]), v(&[4, 0])]);
        let sum = prob.theta_tilde.add(&prob.theta_tilde_prime).unwrap();
        assert_eq!(tri(&sum), vec![v(&[-2, 0]), v(&[-2, 13]), v(&[11, 0])]);

        let (b, g) =
            decompose_in_splitting_fiber(&prob.fan, &prob.theta_tilde, &prob.theta_tilde_prime, &v(&[-2, 13]))
                .unwrap();
        assert_eq!((b, g), (v(&[0, 7]), v(&[-2, 6])));
    }

    #[test]
    fn decompose_examples() {
        let st = threefold();
        let d = Decomposer::from_canonical(&st, &p(), &q()).unwrap();
        let cert = d.decompose(&v(&[0, 0, 0])).unwrap();
        assert_eq!((cert.beta, cert.gamma), (v(&[0, 0, 0]), v(&[0, 0, 0])));
        let cert = d.decompose(&v(&[-2, 0, 7])).unwrap();
        assert_eq!((cert.beta, cert.gamma), (v(&[0, 0, 4]), v(&[-2, 0, 3])));
        let cert = d.decompose(&v(&[-2, 0, 0])).unwrap();
        assert_eq!((cert.beta, cert.gamma), (v(&[0, 0, 0]), v(&[-2, 0, 0])));
        assert_eq!(d.decompose(&v(&[-3, 0, 0])).unwrap_err(), Error::PointNotInSum);
    }

    #[test]
    fn decompose_all_threefold() {
        let st = threefold();
        let d = Decomposer::from_canonical(&st, &p(), &q()).unwrap();
        let stats = d.decompose_all_with(true, |_| Ok(())).unwrap();
        assert_eq!(stats.points, 434);
        assert_eq!(stats.fibers, 8);
    }

    #[test]
    fn translated_heights_give_translated_certificates() {
        let st = threefold();
        let shift = v(&[1, -2, 3]);
        let base = st.heights_from_canonical(&p()).unwrap();
        let moved = HeightVector::new(base.values() + &st.matrix().mul_vec(&shift).unwrap());
        let q_heights = st.heights_from_canonical(&q()).unwrap();
        let d = Decomposer::new(&st, &moved, &q_heights).unwrap();
        // P(moved) = P(base) - shift
        let cert = d.decompose(&(&v(&[-2, 0, 7]) - &shift)).unwrap();
        assert_eq!(cert.beta, &v(&[0, 0, 4]) - &shift);
        assert_eq!(d.decompose_all().unwrap().len(), 434);
    }
}
