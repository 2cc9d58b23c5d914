//! Polytopes `P(A, h) = { x : A x >= -h }` over a smooth complete fan, their
//! lattice points, and the brute-force IDP oracle.

use std::collections::{BTreeSet, HashSet};
use std::sync::OnceLock;

use num_traits::Signed;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fan::{Fan, HeightVector};
use crate::lattice::{bounding_box, BoxedSystem};
use crate::linalg::{IntVector, LatticePoint};

// Sum boxes up to this many cells use a dense bitset.
const BITSET_LIMIT: u128 = 1 << 27;

/// `P(A, h)` for a convex height vector on `fan`.
#[derive(Debug)]
pub struct LatticePolytope<'f> {
    fan: &'f Fan,
    heights: HeightVector,
    vertices: Vec<IntVector>,
    points: OnceLock<Result<Vec<LatticePoint>>>,
}

impl<'f> LatticePolytope<'f> {
    pub fn new(fan: &'f Fan, heights: HeightVector) -> Result<Self> {
        fan.require_convex(&heights)?;
        let vertices = vertices(fan, &heights)?;
        Ok(LatticePolytope {
            fan,
            heights,
            vertices,
            points: OnceLock::new(),
        })
    }

    pub fn fan(&self) -> &'f Fan {
        self.fan
    }

    pub fn heights(&self) -> &HeightVector {
        &self.heights
    }

    pub fn dim(&self) -> usize {
        self.fan.dim()
    }

    /// Distinct vertices in lexicographic order.
    pub fn vertices(&self) -> &[IntVector] {
        &self.vertices
    }

    pub fn contains(&self, x: &IntVector) -> Result<bool> {
        contains(self.fan, &self.heights, x)
    }

    /// `P ∩ Z^n` in lexicographic order.
    pub fn lattice_points(&self) -> Result<&[LatticePoint]> {
        self.points
            .get_or_init(|| {
                let (lo, hi) = bounding_box(&self.vertices)?;
                let bounds = -self.heights.values();
                Ok(BoxedSystem::new(self.fan.rays(), &bounds, &lo, &hi)?.points())
            })
            .as_ref()
            .map(Vec::as_slice)
            .map_err(Clone::clone)
    }

    /// `P(A, h + h') = P(A, h) + P(A, h')`.
    pub fn minkowski_sum(&self, other: &LatticePolytope<'_>) -> Result<LatticePolytope<'f>> {
        if !std::ptr::eq(self.fan, other.fan) && self.fan.spec() != other.fan.spec() {
            return Err(Error::Unsupported(
                "Minkowski sum of polytopes over different fans".into(),
            ));
        }
        LatticePolytope::new(self.fan, add_heights(&self.heights, &other.heights)?)
    }

    pub fn report(&self) -> Result<PolytopeReport> {
        Ok(PolytopeReport {
            vertices: self.vertices.clone(),
            num_lattice_points: self.lattice_points()?.len(),
        })
    }
}

/// The vertices `m_σ = A_σ⁻¹(-h_σ)`, deduplicated and sorted.
pub fn vertices(fan: &Fan, h: &HeightVector) -> Result<Vec<IntVector>> {
    fan.require_convex(h)?;
    let mut out = BTreeSet::new();
    for cone in 0..fan.maximal_cones().len() {
        let m = fan.cone_vertex(cone, h)?;
        if !contains(fan, h, &m)? {
            return Err(Error::breach(
                "vertices",
                format!("cone vertex {m} violates a halfspace of a convex height"),
            ));
        }
        out.insert(m);
    }
    Ok(out.into_iter().collect())
}

pub fn contains(fan: &Fan, h: &HeightVector, x: &IntVector) -> Result<bool> {
    fan.check_heights(h)?;
    let ax = fan.rays().mul_vec(x)?;
    Ok(ax
        .entries()
        .iter()
        .zip(h.values().entries())
        .all(|(a, h)| !(a + h).is_negative()))
}

/// Componentwise sum; errors only on a length mismatch.
pub fn add_heights(h: &HeightVector, h2: &HeightVector) -> Result<HeightVector> {
    h.add(h2)
}

/// Outcome of the IDP check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdpVerdict {
    Pass,
    /// Lattice points of `P + Q` that are not sums of lattice points.
    Witness(Vec<LatticePoint>),
}

impl IdpVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, IdpVerdict::Pass)
    }
}

impl Serialize for IdpVerdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            IdpVerdict::Pass => s.serialize_str("pass"),
            IdpVerdict::Witness(points) => {
                let mut map = s.serialize_map(Some(1))?;
                map.serialize_entry("witnesses", points)?;
                map.end()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolytopeReport {
    pub vertices: Vec<IntVector>,
    pub num_lattice_points: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdpReport {
    pub p: PolytopeReport,
    pub q: PolytopeReport,
    pub sum: PolytopeReport,
    pub idp: IdpVerdict,
}

/// Brute-force comparison of `(P ∩ Z^n) + (Q ∩ Z^n)` with `(P + Q) ∩ Z^n`.
pub fn idp_check(p: &LatticePolytope<'_>, q: &LatticePolytope<'_>) -> Result<IdpVerdict> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let sum = p.minkowski_sum(q)?;
    Ok(compare_sumset(
        p.lattice_points()?,
        q.lattice_points()?,
        sum.lattice_points()?,
    ))
}

/// [`idp_check`] together with the statistics of `P`, `Q` and `P + Q`.
pub fn idp_report(p: &LatticePolytope<'_>, q: &LatticePolytope<'_>) -> Result<IdpReport> {
    let sum = p.minkowski_sum(q)?;
    let idp = compare_sumset(p.lattice_points()?, q.lattice_points()?, sum.lattice_points()?);
    Ok(IdpReport {
        p: p.report()?,
        q: q.report()?,
        sum: sum.report()?,
        idp,
    })
}

/// Points of `target` that are not `a + b` with `a` in `left`, `b` in `right`.
///
/// `target` is assumed to contain the sumset, so only that direction is checked.
pub fn compare_sumset(
    left: &[LatticePoint],
    right: &[LatticePoint],
    target: &[LatticePoint],
) -> IdpVerdict {
    let missing: Vec<LatticePoint> = match SumSet::build(left, right) {
        None => target.to_vec(),
        Some(set) => target.iter().filter(|x| !set.contains(x)).cloned().collect(),
    };
    if missing.is_empty() {
        IdpVerdict::Pass
    } else {
        IdpVerdict::Witness(missing)
    }
}

enum SumSet {
    Dense {
        lo: Vec<i64>,
        extent: Vec<u64>,
        bits: Vec<u64>,
    },
    Sparse(HashSet<LatticePoint>),
}

impl SumSet {
    fn build(left: &[LatticePoint], right: &[LatticePoint]) -> Option<SumSet> {
        let dim = left.first()?.len();
        right.first()?;
        let span = |pts: &[LatticePoint], i: usize| {
            pts.iter()
                .map(|p| p[i])
                .fold((i64::MAX, i64::MIN), |(l, h), x| (l.min(x), h.max(x)))
        };
        let mut lo = Vec::with_capacity(dim);
        let mut extent = Vec::with_capacity(dim);
        let mut cells: u128 = 1;
        for i in 0..dim {
            let (l1, h1) = span(left, i);
            let (l2, h2) = span(right, i);
            let l = i128::from(l1) + i128::from(l2);
            let e = (i128::from(h1) + i128::from(h2) - l + 1) as u128;
            cells = cells.saturating_mul(e);
            lo.push(l);
            extent.push(e);
        }
        if cells <= BITSET_LIMIT && lo.iter().all(|&l| i64::try_from(l).is_ok()) {
            let lo: Vec<i64> = lo.into_iter().map(|l| l as i64).collect();
            let extent: Vec<u64> = extent.into_iter().map(|e| e as u64).collect();
            let mut bits = vec![0u64; (cells as usize).div_ceil(64)];
            for a in left {
                for b in right {
                    let mut idx = 0u64;
                    for i in 0..dim {
                        idx = idx * extent[i] + (a[i] + b[i] - lo[i]) as u64;
                    }
                    bits[(idx / 64) as usize] |= 1 << (idx % 64);
                }
            }
            Some(SumSet::Dense { lo, extent, bits })
        } else {
            let set = left
                .iter()
                .flat_map(|a| right.iter().map(move |b| a.iter().zip(b).map(|(x, y)| x + y).collect()))
                .collect();
            Some(SumSet::Sparse(set))
        }
    }

    fn contains(&self, x: &[i64]) -> bool {
        match self {
            SumSet::Dense { lo, extent, bits } => {
                let mut idx = 0u64;
                for i in 0..x.len() {
                    let off = i128::from(x[i]) - i128::from(lo[i]);
                    if off < 0 || off >= i128::from(extent[i]) {
                        return false;
                    }
                    idx = idx * extent[i] + off as u64;
                }
                bits[(idx / 64) as usize] >> (idx % 64) & 1 == 1
            }
            SumSet::Sparse(set) => set.contains(x),
        }
    }
}

/// Lattice polygons given by point sets, with no fan attached.
pub mod raw {
    use super::*;

    fn cross(o: &[i64], a: &[i64], b: &[i64]) -> i128 {
        let (ax, ay) = (i128::from(a[0] - o[0]), i128::from(a[1] - o[1]));
        let (bx, by) = (i128::from(b[0] - o[0]), i128::from(b[1] - o[1]));
        ax * by - ay * bx
    }

    fn check_planar(points: &[LatticePoint]) -> Result<()> {
        if points.is_empty() {
            return Err(Error::Shape("empty point set".into()));
        }
        if let Some(p) = points.iter().find(|p| p.len() != 2) {
            return Err(Error::Unsupported(format!(
                "point-set mode handles planar input only, got a point of dimension {}",
                p.len()
            )));
        }
        // Keep cross products comfortably inside i128.
        if points.iter().flatten().any(|c| c.unsigned_abs() > 1 << 40) {
            return Err(Error::CoordinateOverflow);
        }
        Ok(())
    }

    /// Convex hull vertices in counter-clockwise order starting from the
    /// lexicographically smallest point.
    pub fn hull(points: &[LatticePoint]) -> Result<Vec<LatticePoint>> {
        check_planar(points)?;
        let mut pts = points.to_vec();
        pts.sort();
        pts.dedup();
        if pts.len() < 3 {
            return Ok(pts);
        }
        let mut lower: Vec<LatticePoint> = Vec::new();
        for p in &pts {
            while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0 {
                lower.pop();
            }
            lower.push(p.clone());
        }
        let mut upper: Vec<LatticePoint> = Vec::new();
        for p in pts.iter().rev() {
            while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0 {
                upper.pop();
            }
            upper.push(p.clone());
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Ok(lower)
    }

    /// Lattice points of the convex hull, in lexicographic order.
    pub fn lattice_points(points: &[LatticePoint]) -> Result<Vec<LatticePoint>> {
        let h = hull(points)?;
        let (lo, hi) = h.iter().fold(
            ([i64::MAX; 2], [i64::MIN; 2]),
            |(lo, hi), p| ([lo[0].min(p[0]), lo[1].min(p[1])], [hi[0].max(p[0]), hi[1].max(p[1])]),
        );
        let inside = |x: &[i64]| match h.len() {
            1 => true,
            2 => cross(&h[0], &h[1], x) == 0,
            n => (0..n).all(|i| cross(&h[i], &h[(i + 1) % n], x) >= 0),
        };
        let mut out = Vec::new();
        for a in lo[0]..=hi[0] {
            for b in lo[1]..=hi[1] {
                let x = [a, b];
                if inside(&x) {
                    out.push(x.to_vec());
                }
            }
        }
        Ok(out)
    }

    pub fn report(points: &[LatticePoint]) -> Result<PolytopeReport> {
        Ok(PolytopeReport {
            vertices: hull(points)?
                .iter()
                .map(|p| IntVector::from_lattice_point(p))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
            num_lattice_points: lattice_points(points)?.len(),
        })
    }

    /// IDP check for `conv(p)` and `conv(q)`.
    pub fn idp_report(p: &[LatticePoint], q: &[LatticePoint]) -> Result<IdpReport> {
        check_planar(p)?;
        check_planar(q)?;
        let sums: Vec<LatticePoint> = p
            .iter()
            .flat_map(|a| q.iter().map(move |b| vec![a[0] + b[0], a[1] + b[1]]))
            .collect();
        let idp = compare_sumset(&lattice_points(p)?, &lattice_points(q)?, &lattice_points(&sums)?);
        Ok(IdpReport {
            p: report(p)?,
            q: report(q)?,
            sum: report(&sums)?,
            idp,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::IntMatrix;

    fn threefold() -> Fan {
        Fan::build(
            IntMatrix::from_i64_rows(&[
                &[1, 0, 0],
                &[0, 1, 0],
                &[-1, -1, 1],
                &[-1, -1, 2],
                &[0, 0, 1],
                &[0, 0, -1],
            ])
            .unwrap(),
            vec![vec![0, 1, 3], vec![3, 5], vec![5, 4], vec![4, 2], vec![2, 0, 1]],
        )
        .unwrap()
    }

    fn pts(v: &[&[i64]]) -> Vec<IntVector> {
        v.iter().map(|x| IntVector::from_i64s(x)).collect()
    }

    #[test]
    fn threefold_vertices_and_counts() {
        let fan = threefold();
        let p = LatticePolytope::new(&fan, HeightVector::from_i64s(&[0, 0, 3, 0, 0, 4])).unwrap();
        assert_eq!(
            p.vertices(),
            pts(&[&[0, 0, 0], &[0, 0, 4], &[0, 6, 3], &[0, 7, 4], &[6, 0, 3], &[7, 0, 4]])
        );
        assert_eq!(p.lattice_points().unwrap().len(), 86);
        let q = LatticePolytope::new(&fan, HeightVector::from_i64s(&[2, 0, 1, 0, 0, 3])).unwrap();
        assert_eq!(q.lattice_points().unwrap().len(), 70);
        assert_eq!(idp_check(&p, &q).unwrap(), IdpVerdict::Pass);
    }

    #[test]
    fn zero_height_is_origin() {
        let fan = threefold();
        let p = LatticePolytope::new(&fan, HeightVector::zeros(6)).unwrap();
        assert_eq!(p.vertices(), pts(&[&[0, 0, 0]]));
        assert_eq!(p.lattice_points().unwrap(), &[vec![0, 0, 0]]);
        assert!(idp_check(&p, &p).unwrap().is_pass());
    }

    #[test]
    fn non_convex_rejected() {
        let fan = threefold();
        let err = LatticePolytope::new(&fan, HeightVector::from_i64s(&[0, 0, 5, 0, 0, 4])).unwrap_err();
        assert!(matches!(err, Error::NotConvex { .. }));
    }

    #[test]
    fn crossed_segments_witness() {
        let p = vec![vec![1, 0], vec![2, 1]];
        let q = vec![vec![1, 0], vec![0, 1]];
        let report = raw::idp_report(&p, &q).unwrap();
        assert_eq!(report.idp, IdpVerdict::Witness(vec![vec![2, 1]]));
        assert_eq!(report.sum.num_lattice_points, 5);
    }

    #[test]
    fn raw_mode_is_planar_only() {
        let p = vec![vec![0, 0, 0]];
        assert!(matches!(raw::idp_report(&p, &p), Err(Error::Unsupported(_))));
    }

    #[test]
    fn verdict_serialization() {
        assert_eq!(serde_json::to_string(&IdpVerdict::Pass).unwrap(), "\"pass\"");
        assert_eq!(
            serde_json::to_string(&IdpVerdict::Witness(vec![vec![2, 1]])).unwrap(),
            r#"{"witnesses":[[2,1]]}"#
        );
    }

    #[test]
    fn sparse_and_dense_sumsets_agree() {
        let a = vec![vec![0, 0], vec![1 << 20, 0]];
        let b = vec![vec![0, 0], vec![0, 1 << 20]];
        let target = vec![vec![0, 0], vec![1, 1], vec![1 << 20, 1 << 20]];
        assert_eq!(compare_sumset(&a, &b, &target), IdpVerdict::Witness(vec![vec![1, 1]]));
        let small = vec![vec![0, 0], vec![1, 0]];
        assert_eq!(
            compare_sumset(&small, &small, &[vec![0, 0], vec![2, 0], vec![3, 0]]),
            IdpVerdict::Witness(vec![vec![3, 0]])
        );
    }
}
