//! Brute-force IDP search over smooth complete fans in the plane.
//!
//! Fans are grown by star subdivision (inserting `u + v` between adjacent
//! rays) from the projective plane and the Hirzebruch fans
//! `(1,0), (0,1), (-1,a), (0,-1)` with `|a| <= bound`, and identified up to
//! `GL(2, Z)` through the cyclic sequence of self-intersection numbers `a_i`
//! defined by `u_{i-1} + u_{i+1} = a_i u_i`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fan::{Fan, HeightVector};
use crate::linalg::{IntMatrix, LatticePoint};
use crate::polytope::{compare_sumset, IdpVerdict, LatticePolytope};

/// Counterexamples kept per fan in a report.
const KEPT_COUNTEREXAMPLES: usize = 20;

fn det(a: [i64; 2], b: [i64; 2]) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

/// A smooth complete planar fan, rays in counter-clockwise order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlaneFan {
    rays: Vec<[i64; 2]>,
}

impl PlaneFan {
    pub fn new(rays: Vec<[i64; 2]>) -> Result<Self> {
        let k = rays.len();
        if k < 3 {
            return Err(Error::CompletenessViolation(format!("{k} rays cannot span the plane")));
        }
        for i in 0..k {
            let (a, b) = (rays[i], rays[(i + 1) % k]);
            if det(a, b) != 1 {
                return Err(Error::SmoothnessViolation {
                    cone: vec![i, (i + 1) % k],
                    det: det(a, b).into(),
                });
            }
        }
        // Consecutive determinants of 1 still allow winding more than once.
        let winding: i64 = (0..k)
            .filter(|&i| {
                let (a, b) = (rays[i], rays[(i + 1) % k]);
                a[1] < 0 && b[1] >= 0 || a[1] >= 0 && b[1] < 0
            })
            .count() as i64;
        if winding != 2 {
            return Err(Error::CompletenessViolation("rays wind around the origin more than once".into()));
        }
        Ok(PlaneFan { rays })
    }

    pub fn projective_plane() -> Self {
        PlaneFan {
            rays: vec![[1, 0], [0, 1], [-1, -1]],
        }
    }

    pub fn hirzebruch(a: i64) -> Self {
        PlaneFan {
            rays: vec![[1, 0], [0, 1], [-1, a], [0, -1]],
        }
    }

    pub fn rays(&self) -> &[[i64; 2]] {
        &self.rays
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    /// `a_i` with `u_{i-1} + u_{i+1} = a_i u_i`.
    pub fn self_intersections(&self) -> Vec<i64> {
        let k = self.rays.len();
        (0..k)
            .map(|i| {
                let (prev, cur, next) = (self.rays[(i + k - 1) % k], self.rays[i], self.rays[(i + 1) % k]);
                let s = [prev[0] + next[0], prev[1] + next[1]];
                // s is parallel to cur and cur is primitive.
                if cur[0] != 0 {
                    s[0] / cur[0]
                } else {
                    s[1] / cur[1]
                }
            })
            .collect()
    }

    /// The lexicographically smallest rotation or reflection of the
    /// self-intersection sequence.
    pub fn canonical_key(&self) -> Vec<i64> {
        let a = self.self_intersections();
        let k = a.len();
        let mut best: Option<Vec<i64>> = None;
        for seq in [a.clone(), a.iter().rev().copied().collect()] {
            for r in 0..k {
                let rotated: Vec<i64> = (0..k).map(|i| seq[(i + r) % k]).collect();
                if best.as_ref().is_none_or(|b| rotated < *b) {
                    best = Some(rotated);
                }
            }
        }
        best.unwrap_or_default()
    }

    /// Inserts `u_i + u_{i+1}` after position `i`.
    pub fn subdivide(&self, i: usize) -> PlaneFan {
        let k = self.rays.len();
        let (a, b) = (self.rays[i], self.rays[(i + 1) % k]);
        let mut rays = self.rays.clone();
        rays.insert(i + 1, [a[0] + b[0], a[1] + b[1]]);
        PlaneFan { rays }
    }

    /// The projective plane has one primitive collection; otherwise the
    /// collections are the non-adjacent pairs.
    pub fn to_fan(&self) -> Result<Fan> {
        let k = self.rays.len();
        let collections = if k == 3 {
            vec![vec![0, 1, 2]]
        } else {
            (0..k)
                .flat_map(|i| (i + 2..k).map(move |j| (i, j)))
                .filter(|&(i, j)| !(i == 0 && j == k - 1))
                .map(|(i, j)| vec![i, j])
                .collect()
        };
        let rows: Vec<&[i64]> = self.rays.iter().map(|r| r.as_slice()).collect();
        Fan::build(IntMatrix::from_i64_rows(&rows)?, collections)
    }
}

/// Fans with exactly `num_rays` rays reachable from the seeds, one per
/// isomorphism class, ordered by canonical key.
pub fn enumerate_fans(num_rays: usize, bound: i64) -> Vec<PlaneFan> {
    let mut level: BTreeMap<Vec<i64>, PlaneFan> = BTreeMap::new();
    let p2 = PlaneFan::projective_plane();
    level.insert(p2.canonical_key(), p2);
    for size in 3..num_rays {
        let mut next: BTreeMap<Vec<i64>, PlaneFan> = BTreeMap::new();
        if size + 1 == 4 {
            for a in -bound.abs()..=bound.abs() {
                let f = PlaneFan::hirzebruch(a);
                next.entry(f.canonical_key()).or_insert(f);
            }
        }
        for fan in level.values() {
            for i in 0..fan.len() {
                let f = fan.subdivide(i);
                next.entry(f.canonical_key()).or_insert(f);
            }
        }
        level = next;
    }
    level.into_values().collect()
}

/// Heights with `h_0 = h_1 = 0` and other entries in `[0, bound]` that are
/// convex on `fan`, in lexicographic order.
///
/// Since `u_0, u_1` is a lattice basis, every convex height is a translate of
/// one with `h_0 = h_1 = 0`, and then the origin lies in the polytope, which
/// forces the remaining entries to be nonnegative.
pub fn normalized_heights(fan: &Fan, bound: i64) -> Result<Vec<HeightVector>> {
    let k = fan.num_rays();
    let mut out = Vec::new();
    let mut h = vec![0i64; k];
    loop {
        let hv = HeightVector::from_i64s(&h);
        if fan.is_convex(&hv)? {
            out.push(hv);
        }
        let mut i = k;
        loop {
            if i == 2 {
                return Ok(out);
            }
            i -= 1;
            if h[i] < bound {
                h[i] += 1;
                for x in &mut h[i + 1..] {
                    *x = 0;
                }
                break;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub h: HeightVector,
    pub h_prime: HeightVector,
    pub witnesses: Vec<LatticePoint>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FanSearchResult {
    pub rays: Vec<[i64; 2]>,
    pub self_intersections: Vec<i64>,
    pub convex_heights: usize,
    pub pairs: usize,
    pub counterexample_count: usize,
    /// The first few counterexamples in pair order.
    pub counterexamples: Vec<Counterexample>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fans2dReport {
    pub num_rays: usize,
    pub bound: i64,
    pub fans: Vec<FanSearchResult>,
    pub total_pairs: usize,
    pub total_counterexamples: usize,
}

impl Fans2dReport {
    pub fn found_counterexample(&self) -> bool {
        self.total_counterexamples > 0
    }
}

struct Prepared {
    plane: PlaneFan,
    fan: Fan,
    heights: Vec<HeightVector>,
}

fn prepare(plane: PlaneFan, bound: i64) -> Result<Prepared> {
    let fan = plane.to_fan()?;
    let heights = normalized_heights(&fan, bound)?;
    Ok(Prepared { plane, fan, heights })
}

fn pair_count(n: usize) -> u64 {
    (n as u64) * (n as u64 + 1) / 2
}

/// Checks every unordered pair of normalized heights on each fan.
///
/// Refuses to start when the number of pairs exceeds `max_instances`.
pub fn search_fans(fans: Vec<PlaneFan>, bound: i64, max_instances: Option<u64>) -> Result<Fans2dReport> {
    let num_rays = fans.first().map_or(0, PlaneFan::len);
    let prepared: Vec<Prepared> = fans
        .into_par_iter()
        .map(|p| prepare(p, bound))
        .collect::<Result<_>>()?;
    let estimated: u64 = prepared.iter().map(|p| pair_count(p.heights.len())).sum();
    if let Some(cap) = max_instances {
        if estimated > cap {
            return Err(Error::ResourceCap { estimated, cap });
        }
    }
    let fans = prepared.iter().map(search_one).collect::<Result<Vec<_>>>()?;
    Ok(Fans2dReport {
        num_rays,
        bound,
        total_pairs: fans.iter().map(|f| f.pairs).sum(),
        total_counterexamples: fans.iter().map(|f| f.counterexample_count).sum(),
        fans,
    })
}

fn search_one(p: &Prepared) -> Result<FanSearchResult> {
    let polytopes: Vec<LatticePolytope<'_>> = p
        .heights
        .iter()
        .map(|h| LatticePolytope::new(&p.fan, h.clone()))
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..polytopes.len())
        .flat_map(|i| (i..polytopes.len()).map(move |j| (i, j)))
        .collect();
    let verdicts: Vec<Option<Counterexample>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&polytopes[i], &polytopes[j]);
            let sum = a.minkowski_sum(b)?;
            Ok(
                match compare_sumset(a.lattice_points()?, b.lattice_points()?, sum.lattice_points()?) {
                    IdpVerdict::Pass => None,
                    IdpVerdict::Witness(witnesses) => Some(Counterexample {
                        h: p.heights[i].clone(),
                        h_prime: p.heights[j].clone(),
                        witnesses,
                    }),
                },
            )
        })
        .collect::<Result<_>>()?;
    let found: Vec<Counterexample> = verdicts.into_iter().flatten().collect();
    Ok(FanSearchResult {
        rays: p.plane.rays.clone(),
        self_intersections: p.plane.self_intersections(),
        convex_heights: p.heights.len(),
        pairs: pairs.len(),
        counterexample_count: found.len(),
        counterexamples: found.into_iter().take(KEPT_COUNTEREXAMPLES).collect(),
    })
}

/// Runs the search over every enumerated fan with `num_rays` rays.
pub fn run_fans2d(num_rays: usize, bound: i64, max_instances: Option<u64>) -> Result<Fans2dReport> {
    if !(3..=8).contains(&num_rays) {
        return Err(Error::InvalidParameters(format!(
            "number of rays must be between 3 and 8, got {num_rays}"
        )));
    }
    if bound < 0 {
        return Err(Error::InvalidParameters(format!("height bound must be nonnegative, got {bound}")));
    }
    search_fans(enumerate_fans(num_rays, bound), bound, max_instances)
}

/// The fan with rays `(±1, 0), (0, ±1), (±1, ±1)`: the smallest smooth
/// refinement of the normal fan of the crossed segments' sum.
pub fn octagon() -> PlaneFan {
    PlaneFan {
        rays: vec![[1, 0], [1, 1], [0, 1], [-1, 1], [-1, 0], [-1, -1], [0, -1], [1, -1]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_intersection_numbers() {
        assert_eq!(PlaneFan::projective_plane().self_intersections(), vec![-1, -1, -1]);
        assert_eq!(PlaneFan::hirzebruch(2).self_intersections(), vec![0, 2, 0, -2]);
        assert_eq!(octagon().self_intersections(), vec![2, 1, 2, 1, 2, 1, 2, 1]);
        assert!(PlaneFan::new(octagon().rays).is_ok());
    }

    #[test]
    fn rejects_bad_cycles() {
        assert!(PlaneFan::new(vec![[1, 0], [0, 1], [-1, 1], [1, -1]]).is_err());
        assert!(PlaneFan::new(vec![[1, 0], [1, 1]]).is_err());
    }

    #[test]
    fn fan_counts() {
        assert_eq!(enumerate_fans(3, 2).len(), 1);
        // F0, F1, F2
        assert_eq!(enumerate_fans(4, 2).len(), 3);
        for k in 3..=6 {
            for f in enumerate_fans(k, 2) {
                assert_eq!(f.len(), k);
                assert!(f.to_fan().is_ok());
                // Self-intersections sum to 12 - 3k on a smooth complete surface fan.
                assert_eq!(f.self_intersections().iter().sum::<i64>(), 3 * k as i64 - 12);
            }
        }
    }

    #[test]
    fn projective_plane_heights() {
        let fan = PlaneFan::projective_plane().to_fan().unwrap();
        // h_2 in {0, 1, 2}, all convex
        assert_eq!(normalized_heights(&fan, 2).unwrap().len(), 3);
    }

    #[test]
    fn small_fans_pass() {
        for k in 3..=5 {
            let report = run_fans2d(k, 2, None).unwrap();
            assert!(!report.found_counterexample(), "k = {k}");
        }
    }

    #[test]
    fn cap_refuses() {
        assert!(matches!(run_fans2d(5, 2, Some(1)), Err(Error::ResourceCap { .. })));
    }
}
