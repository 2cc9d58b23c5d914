//! Smooth complete simplicial fans given by rays and primitive collections.
//!
//! The maximal cones are derived: they are the `n`-element ray sets that
//! contain no primitive collection. Building a [`Fan`] validates smoothness
//! (every maximal cone is unimodular) and completeness (every ridge lies in
//! exactly two maximal cones, the ridge graph is connected, and a seeded
//! random sample of directions is covered).

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{IntMatrix, IntVector};

/// Environment variable that fixes the completeness sampler's seed.
pub const SEED_ENV: &str = "IDP_LAB_SEED";

const DEFAULT_SEED: u64 = 0x1D9_1AB5;
const SAMPLE_RANGE: i64 = 1000;

/// Parameters of the randomized direction-coverage check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompletenessCheck {
    pub samples: usize,
    pub seed: u64,
}

impl Default for CompletenessCheck {
    fn default() -> Self {
        CompletenessCheck {
            samples: 1000,
            seed: DEFAULT_SEED,
        }
    }
}

impl CompletenessCheck {
    /// Default sample count; the seed comes from `IDP_LAB_SEED` when set.
    pub fn from_env() -> Self {
        let seed = std::env::var(SEED_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_SEED);
        CompletenessCheck {
            seed,
            ..Self::default()
        }
    }
}

/// One integer height per ray; `φ_h(u_ρ) = -h_ρ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HeightVector(IntVector);

impl HeightVector {
    pub fn new(values: IntVector) -> Self {
        HeightVector(values)
    }

    pub fn from_i64s(values: &[i64]) -> Self {
        HeightVector(IntVector::from_i64s(values))
    }

    pub fn zeros(len: usize) -> Self {
        HeightVector(IntVector::zeros(len))
    }

    pub fn values(&self) -> &IntVector {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.0.dim() == 0
    }

    pub fn get(&self, ray: usize) -> &BigInt {
        self.0.get(ray)
    }

    /// Componentwise sum; `P(A, h + h') = P(A, h) + P(A, h')` for convex heights.
    pub fn add(&self, other: &HeightVector) -> Result<HeightVector> {
        Ok(HeightVector(self.0.checked_add(&other.0)?))
    }
}

impl std::fmt::Display for HeightVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// JSON form of a fan: `{ "dim", "rays", "primitive_collections" }`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanSpec {
    pub dim: usize,
    pub rays: Vec<IntVector>,
    pub primitive_collections: Vec<Vec<usize>>,
}

/// Result of evaluating the primitive-collection inequalities for one height.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convexity {
    /// `φ_h(Σ u_ρ) - Σ φ_h(u_ρ)` for each primitive collection, in fan order.
    pub slacks: Vec<BigInt>,
}

impl Convexity {
    pub fn is_convex(&self) -> bool {
        self.slacks.iter().all(|s| !s.is_negative())
    }

    pub fn is_strictly_convex(&self) -> bool {
        self.slacks.iter().all(Signed::is_positive)
    }

    /// Index of the first collection with negative slack.
    pub fn first_violation(&self) -> Option<usize> {
        self.slacks.iter().position(Signed::is_negative)
    }
}

#[derive(Clone, Debug)]
pub struct Fan {
    dim: usize,
    rays: IntMatrix,
    primitive_collections: Vec<Vec<usize>>,
    maximal_cones: Vec<Vec<usize>>,
    // Inverse of the cone matrix whose rows are the cone's rays.
    cone_inverses: Vec<IntMatrix>,
}

impl Fan {
    /// Builds and validates a fan, sampling with [`CompletenessCheck::from_env`].
    pub fn build(rays: IntMatrix, primitive_collections: Vec<Vec<usize>>) -> Result<Fan> {
        Self::build_with(rays, primitive_collections, &CompletenessCheck::from_env())
    }

    pub fn from_spec(spec: &FanSpec) -> Result<Fan> {
        if let Some(bad) = spec.rays.iter().find(|r| r.dim() != spec.dim) {
            return Err(Error::DimensionMismatch {
                expected: spec.dim,
                found: bad.dim(),
            });
        }
        Self::build(IntMatrix::from_rows(&spec.rays)?, spec.primitive_collections.clone())
    }

    pub fn build_with(
        rays: IntMatrix,
        primitive_collections: Vec<Vec<usize>>,
        check: &CompletenessCheck,
    ) -> Result<Fan> {
        let dim = rays.cols();
        let num_rays = rays.rows();
        for r in 0..num_rays {
            if !rays.row_vector(r).content().is_one() {
                return Err(Error::NonPrimitiveRay { ray: r });
            }
        }
        if num_rays <= dim {
            return Err(Error::CompletenessViolation(format!(
                "{num_rays} rays cannot span a complete fan in dimension {dim}"
            )));
        }

        let mut collections = Vec::with_capacity(primitive_collections.len());
        for c in primitive_collections {
            let set: BTreeSet<usize> = c.iter().copied().collect();
            if set.len() != c.len() {
                return Err(Error::InvalidFan(format!("collection {c:?} repeats a ray")));
            }
            if set.len() < 2 {
                return Err(Error::InvalidFan(format!(
                    "collection {c:?} has fewer than two rays"
                )));
            }
            if let Some(&bad) = set.iter().find(|&&i| i >= num_rays) {
                return Err(Error::InvalidFan(format!(
                    "collection {c:?} refers to ray {bad}, fan has {num_rays} rays"
                )));
            }
            let sorted: Vec<usize> = set.into_iter().collect();
            if collections.contains(&sorted) {
                return Err(Error::InvalidFan(format!("collection {c:?} listed twice")));
            }
            collections.push(sorted);
        }

        let mut maximal_cones = Vec::new();
        let mut cone_inverses = Vec::new();
        for cone in (0..num_rays).combinations(dim) {
            if collections.iter().any(|c| c.iter().all(|i| cone.contains(i))) {
                continue;
            }
            let m = rays.select_rows(&cone)?;
            let det = m.determinant()?;
            if !det.abs().is_one() {
                return Err(Error::SmoothnessViolation { cone, det });
            }
            cone_inverses.push(m.unimodular_inverse()?);
            maximal_cones.push(cone);
        }

        let fan = Fan {
            dim,
            rays,
            primitive_collections: collections,
            maximal_cones,
            cone_inverses,
        };
        fan.check_minimal_collections()?;
        fan.check_pseudomanifold()?;
        fan.check_sampled_coverage(check)?;
        Ok(fan)
    }

    fn check_minimal_collections(&self) -> Result<()> {
        for c in &self.primitive_collections {
            for skip in 0..c.len() {
                let proper: Vec<usize> = c
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &r)| r)
                    .collect();
                let covered = self
                    .maximal_cones
                    .iter()
                    .any(|cone| proper.iter().all(|r| cone.contains(r)));
                if !covered {
                    return Err(Error::InvalidFan(format!(
                        "collection {c:?} is not minimal: {proper:?} lies in no cone"
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_pseudomanifold(&self) -> Result<()> {
        if self.maximal_cones.is_empty() {
            return Err(Error::CompletenessViolation("no maximal cones".into()));
        }
        let mut ridges: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (i, cone) in self.maximal_cones.iter().enumerate() {
            for skip in 0..cone.len() {
                let ridge: Vec<usize> = cone
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .map(|(_, &r)| r)
                    .collect();
                ridges.entry(ridge).or_default().push(i);
            }
        }
        let mut parent: Vec<usize> = (0..self.maximal_cones.len()).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for (ridge, cones) in &ridges {
            if cones.len() != 2 {
                return Err(Error::CompletenessViolation(format!(
                    "ridge {ridge:?} lies in {} maximal cones",
                    cones.len()
                )));
            }
            let (a, b) = (root(&mut parent, cones[0]), root(&mut parent, cones[1]));
            parent[a] = b;
        }
        let first = root(&mut parent, 0);
        if (1..parent.len()).any(|i| root(&mut parent, i) != first) {
            return Err(Error::CompletenessViolation("ridge graph is disconnected".into()));
        }
        Ok(())
    }

    fn check_sampled_coverage(&self, check: &CompletenessCheck) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(check.seed);
        for _ in 0..check.samples {
            let u: Vec<i64> = (0..self.dim)
                .map(|_| rng.gen_range(-SAMPLE_RANGE..=SAMPLE_RANGE))
                .collect();
            let u = IntVector::from_i64s(&u);
            if self.find_cone(&u).is_err() {
                return Err(Error::CompletenessViolation(format!(
                    "direction {u} lies in no maximal cone"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_rays(&self) -> usize {
        self.rays.rows()
    }

    /// Ray generators as matrix rows.
    pub fn rays(&self) -> &IntMatrix {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> IntVector {
        self.rays.row_vector(i)
    }

    pub fn primitive_collections(&self) -> &[Vec<usize>] {
        &self.primitive_collections
    }

    /// Maximal cones as sorted ray-index sets, in lexicographic order.
    pub fn maximal_cones(&self) -> &[Vec<usize>] {
        &self.maximal_cones
    }

    pub fn spec(&self) -> FanSpec {
        FanSpec {
            dim: self.dim,
            rays: self.rays.row_vectors(),
            primitive_collections: self.primitive_collections.clone(),
        }
    }

    /// The first maximal cone containing `u`, with the (nonnegative, integer)
    /// coefficients of `u` over that cone's rays.
    pub fn find_cone(&self, u: &IntVector) -> Result<(usize, IntVector)> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: u.dim(),
            });
        }
        'cones: for (i, inv) in self.cone_inverses.iter().enumerate() {
            // u = A_σᵀ c, so c = (A_σ⁻¹)ᵀ u.
            let mut coeffs = Vec::with_capacity(self.dim);
            for j in 0..self.dim {
                let c: BigInt = (0..self.dim).map(|k| inv.entry(k, j) * u.get(k)).sum();
                if c.is_negative() {
                    continue 'cones;
                }
                coeffs.push(c);
            }
            return Ok((i, IntVector::new(coeffs)));
        }
        Err(Error::NotCovered)
    }

    pub fn check_heights(&self, h: &HeightVector) -> Result<()> {
        if h.len() == self.num_rays() {
            Ok(())
        } else {
            Err(Error::HeightLength {
                expected: self.num_rays(),
                found: h.len(),
            })
        }
    }

    /// `φ_h(u)`, linear on each cone with `φ_h(u_ρ) = -h_ρ`.
    pub fn support_value(&self, h: &HeightVector, u: &IntVector) -> Result<BigInt> {
        self.check_heights(h)?;
        let (cone, coeffs) = self.find_cone(u)?;
        Ok(self.maximal_cones[cone]
            .iter()
            .zip(coeffs.entries())
            .map(|(&ray, c)| -(c * h.get(ray)))
            .sum())
    }

    pub fn convexity(&self, h: &HeightVector) -> Result<Convexity> {
        self.check_heights(h)?;
        let mut slacks = Vec::with_capacity(self.primitive_collections.len());
        for c in &self.primitive_collections {
            let mut total = IntVector::zeros(self.dim);
            let mut separate = BigInt::zero();
            for &ray in c {
                total = &total + &self.ray(ray);
                separate += h.get(ray);
            }
            // φ(Σu) - Σφ(u_ρ) = φ(Σu) + Σ h_ρ
            slacks.push(self.support_value(h, &total)? + separate);
        }
        Ok(Convexity { slacks })
    }

    pub fn is_convex(&self, h: &HeightVector) -> Result<bool> {
        Ok(self.convexity(h)?.is_convex())
    }

    pub fn is_strictly_convex(&self, h: &HeightVector) -> Result<bool> {
        Ok(self.convexity(h)?.is_strictly_convex())
    }

    /// `Ok(())` when convex, otherwise [`Error::NotConvex`] naming the collection.
    pub fn require_convex(&self, h: &HeightVector) -> Result<()> {
        let conv = self.convexity(h)?;
        match conv.first_violation() {
            None => Ok(()),
            Some(i) => Err(Error::NotConvex {
                collection: self.primitive_collections[i].clone(),
                slack: conv.slacks[i].clone(),
            }),
        }
    }

    /// True iff the primitive collections are pairwise disjoint.
    pub fn is_splitting(&self) -> bool {
        self.primitive_collections
            .iter()
            .tuple_combinations()
            .all(|(a, b)| a.iter().all(|r| !b.contains(r)))
    }

    /// The point `m_σ` with `<m_σ, u_ρ> = -h_ρ` for every ray of cone `σ`.
    pub fn cone_vertex(&self, cone: usize, h: &HeightVector) -> Result<IntVector> {
        self.check_heights(h)?;
        let rhs = IntVector::new(self.maximal_cones[cone].iter().map(|&r| -h.get(r)).collect());
        self.cone_inverses[cone].mul_vec(&rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64_rows(rows).unwrap()
    }

    fn projective_plane() -> Fan {
        Fan::build(matrix(&[&[1, 0], &[0, 1], &[-1, -1]]), vec![vec![0, 1, 2]]).unwrap()
    }

    // Rays v1, v2, u1, y1, t1, z1 of the 3-fold with p = (2,1,1,1,1), b = (1).
    pub(crate) fn threefold() -> Fan {
        Fan::build(
            matrix(&[
                &[1, 0, 0],
                &[0, 1, 0],
                &[-1, -1, 1],
                &[-1, -1, 2],
                &[0, 0, 1],
                &[0, 0, -1],
            ]),
            vec![vec![0, 1, 3], vec![3, 5], vec![5, 4], vec![4, 2], vec![2, 0, 1]],
        )
        .unwrap()
    }

    fn h(values: &[i64]) -> HeightVector {
        HeightVector::from_i64s(values)
    }

    #[test]
    fn projective_plane_cones() {
        let fan = projective_plane();
        assert_eq!(fan.maximal_cones(), &[vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert!(fan.is_splitting());
    }

    #[test]
    fn threefold_has_eight_cones() {
        assert_eq!(threefold().maximal_cones().len(), 8);
    }

    #[test]
    fn half_plane_is_not_complete() {
        let err = Fan::build(matrix(&[&[1, 0], &[0, 1]]), vec![]).unwrap_err();
        assert!(matches!(err, Error::CompletenessViolation(_)), "{err:?}");
    }

    #[test]
    fn missing_ray_direction_is_detected() {
        // Three rays spanning only a half plane plus the wrong collection.
        let err = Fan::build(matrix(&[&[1, 0], &[0, 1], &[-1, 1]]), vec![vec![0, 2]]).unwrap_err();
        assert!(matches!(err, Error::CompletenessViolation(_)), "{err:?}");
    }

    #[test]
    fn non_primitive_ray_rejected() {
        let err = Fan::build(matrix(&[&[2, 0], &[0, 1], &[-1, -1]]), vec![vec![0, 1, 2]]).unwrap_err();
        assert_eq!(err, Error::NonPrimitiveRay { ray: 0 });
    }

    #[test]
    fn singular_cone_rejected() {
        // (1,0),(1,2) spans a cone of index 2.
        let err = Fan::build(
            matrix(&[&[1, 0], &[1, 2], &[-1, -1]]),
            vec![vec![0, 1, 2]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::SmoothnessViolation { .. }), "{err:?}");
    }

    #[test]
    fn find_cone_on_rays_gives_unit_coefficients() {
        let fan = threefold();
        for (ci, cone) in fan.maximal_cones().iter().enumerate() {
            for (k, &ray) in cone.iter().enumerate() {
                let (found, coeffs) = fan.find_cone(&fan.ray(ray)).unwrap();
                let cone_found = &fan.maximal_cones()[found];
                let pos = cone_found.iter().position(|&r| r == ray).unwrap();
                assert_eq!(coeffs, IntVector::unit(3, pos), "cone {ci} ray {k}");
            }
        }
    }

    #[test]
    fn find_cone_on_relation_sum() {
        let fan = threefold();
        let u = IntVector::from_i64s(&[-1, -1, 1]);
        let (cone, coeffs) = fan.find_cone(&u).unwrap();
        let cone = &fan.maximal_cones()[cone];
        let pos = cone.iter().position(|&r| r == 2).expect("cone contains u1");
        assert_eq!(coeffs, IntVector::unit(3, pos));
    }

    #[test]
    fn support_value_examples() {
        let fan = threefold();
        let heights = h(&[0, 0, 3, 0, 0, 4]);
        assert_eq!(fan.support_value(&heights, &IntVector::zeros(3)).unwrap(), BigInt::zero());
        let z1 = IntVector::from_i64s(&[0, 0, -1]);
        assert_eq!(fan.support_value(&heights, &z1).unwrap(), BigInt::from(-4));
        let two_z1 = IntVector::from_i64s(&[0, 0, -2]);
        assert_eq!(fan.support_value(&heights, &two_z1).unwrap(), BigInt::from(-8));
    }

    #[test]
    fn convexity_examples() {
        let fan = threefold();
        let zero = HeightVector::zeros(6);
        assert!(fan.is_convex(&zero).unwrap());
        assert!(!fan.is_strictly_convex(&zero).unwrap());

        assert!(fan.is_convex(&h(&[0, 0, 3, 0, 0, 4])).unwrap());

        let bad = h(&[0, 0, 5, 0, 0, 4]);
        let conv = fan.convexity(&bad).unwrap();
        let i = conv.first_violation().unwrap();
        assert_eq!(fan.primitive_collections()[i], vec![3, 5]);
        assert_eq!(conv.slacks[i], BigInt::from(-1));
        assert!(matches!(fan.require_convex(&bad), Err(Error::NotConvex { .. })));
    }

    #[test]
    fn splitting_examples() {
        let square = Fan::build(
            matrix(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]]),
            vec![vec![0, 1], vec![2, 3]],
        )
        .unwrap();
        assert!(square.is_splitting());
        assert!(!threefold().is_splitting());
    }

    #[test]
    fn wrong_height_length() {
        let fan = projective_plane();
        assert_eq!(
            fan.is_convex(&h(&[0, 0])),
            Err(Error::HeightLength { expected: 3, found: 2 })
        );
    }

    #[test]
    fn non_minimal_collection_rejected() {
        // {0,1,2} contains the real collection {0,2} of the square fan.
        let err = Fan::build(
            matrix(&[&[1, 0], &[0, 1], &[-1, 0], &[0, -1]]),
            vec![vec![0, 2], vec![1, 3], vec![0, 1, 2]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidFan(_)), "{err:?}");
    }
}
