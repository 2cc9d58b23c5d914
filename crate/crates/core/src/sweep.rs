//! Parameter sweeps that run the decomposer and the brute-force IDP check
//! side by side on every grid point.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::batyrev::{BatyrevParams, BatyrevStructure, CanonicalHeight};
use crate::decompose::Decomposer;
use crate::error::{Error, Result};
use crate::polytope::{compare_sumset, IdpVerdict};

/// Inclusive integer range `[lo, hi]`; empty when `lo > hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Range(pub i64, pub i64);

impl Range {
    pub fn values(self) -> impl Iterator<Item = i64> + Clone {
        self.0..=self.1
    }

    fn len(self) -> u64 {
        if self.0 > self.1 {
            0
        } else {
            (self.1 - self.0) as u64 + 1
        }
    }
}

/// Grid of Batyrev parameters and canonical heights.
///
/// Every `p_i` ranges over `p`, every entry of `b` and `c` over `b` and `c`.
/// The primed height ranges default to the unprimed ones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub n: Range,
    #[serde(default)]
    pub p: Option<Range>,
    pub b: Range,
    pub c: Range,
    pub d: Range,
    pub e: Range,
    pub f: Range,
    #[serde(default)]
    pub d_prime: Option<Range>,
    #[serde(default)]
    pub e_prime: Option<Range>,
    #[serde(default)]
    pub f_prime: Option<Range>,
}

impl SweepGrid {
    /// `n ∈ [lo, hi]` with every other coordinate in the given ranges.
    pub fn uniform(n: Range, bc: Range, heights: Range) -> Self {
        SweepGrid {
            n,
            p: None,
            b: bc,
            c: bc,
            d: heights,
            e: heights,
            f: heights,
            d_prime: None,
            e_prime: None,
            f_prime: None,
        }
    }

    /// All valid parameter choices in the grid, in lexicographic order.
    pub fn structures(&self) -> Vec<BatyrevParams> {
        let mut out = Vec::new();
        for n in self.n.values().filter(|&n| n >= 2) {
            let total = n as usize + 3;
            let p_range = self.p.unwrap_or(Range(1, total as i64 - 4));
            let choices: Vec<usize> = p_range
                .values()
                .filter(|&x| x >= 1)
                .map(|x| x as usize)
                .collect();
            for p in std::iter::repeat_n(choices.iter().copied(), 5).multi_cartesian_product() {
                if p.iter().sum::<usize>() != total {
                    continue;
                }
                let p = [p[0], p[1], p[2], p[3], p[4]];
                for b in entries(self.b, p[3]) {
                    for c in entries(self.c, p[2] - 1) {
                        let params = BatyrevParams::new(p, &b, &c);
                        if params.validate().is_ok() {
                            out.push(params);
                        }
                    }
                }
            }
        }
        out
    }

    /// All `(h, h')` pairs, in lexicographic order of `(d, e, f, d', e', f')`.
    pub fn heights(&self) -> Vec<(CanonicalHeight, CanonicalHeight)> {
        let ranges = [
            self.d,
            self.e,
            self.f,
            self.d_prime.unwrap_or(self.d),
            self.e_prime.unwrap_or(self.e),
            self.f_prime.unwrap_or(self.f),
        ];
        ranges
            .iter()
            .map(|r| r.values())
            .multi_cartesian_product()
            .map(|v| {
                (
                    CanonicalHeight::new(v[0], v[1], v[2]),
                    CanonicalHeight::new(v[3], v[4], v[5]),
                )
            })
            .collect()
    }

    pub fn instance_count(&self) -> u64 {
        let heights = [
            self.d,
            self.e,
            self.f,
            self.d_prime.unwrap_or(self.d),
            self.e_prime.unwrap_or(self.e),
            self.f_prime.unwrap_or(self.f),
        ]
        .iter()
        .map(|r| r.len())
        .product::<u64>();
        self.structures().len() as u64 * heights
    }
}

fn entries(range: Range, len: usize) -> Vec<Vec<i64>> {
    if len == 0 {
        return vec![Vec::new()];
    }
    std::iter::repeat_n(range.values(), len)
        .multi_cartesian_product()
        .collect()
}

/// One grid point where the decomposer and the brute force disagree, or the
/// pipeline failed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepFailure {
    pub params: BatyrevParams,
    pub h: CanonicalHeight,
    pub h_prime: CanonicalHeight,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub structures: usize,
    pub instances: usize,
    /// Grid points rejected because a height is not convex.
    pub not_convex: usize,
    pub points_decomposed: usize,
    pub fibers_verified: usize,
    pub failures: Vec<SweepFailure>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

enum Outcome {
    NotConvex,
    Done { points: usize, fibers: usize },
    Failed(String),
}

/// Runs the sweep on the current rayon pool.
///
/// Refuses grids with more than `max_instances` instances.
pub fn run_sweep(grid: &SweepGrid, max_instances: Option<u64>) -> Result<SweepReport> {
    let estimated = grid.instance_count();
    if let Some(cap) = max_instances {
        if estimated > cap {
            return Err(Error::ResourceCap { estimated, cap });
        }
    }
    let params = grid.structures();
    let heights = grid.heights();
    let structures: Vec<Result<BatyrevStructure>> = params
        .par_iter()
        .map(|p| BatyrevStructure::build(p.clone()))
        .collect();

    let mut report = SweepReport {
        structures: params.len(),
        ..SweepReport::default()
    };
    for (p, st) in params.iter().zip(&structures) {
        let st = match st {
            Ok(st) => st,
            Err(e) => {
                report.failures.push(SweepFailure {
                    params: p.clone(),
                    h: CanonicalHeight::new(0, 0, 0),
                    h_prime: CanonicalHeight::new(0, 0, 0),
                    detail: format!("construction failed: {e}"),
                });
                continue;
            }
        };
        let outcomes: Vec<Outcome> = heights
            .par_iter()
            .map(|(h, h2)| run_instance(st, h, h2))
            .collect();
        for ((h, h2), outcome) in heights.iter().zip(outcomes) {
            report.instances += 1;
            match outcome {
                Outcome::NotConvex => report.not_convex += 1,
                Outcome::Done { points, fibers } => {
                    report.points_decomposed += points;
                    report.fibers_verified += fibers;
                }
                Outcome::Failed(detail) => report.failures.push(SweepFailure {
                    params: p.clone(),
                    h: h.clone(),
                    h_prime: h2.clone(),
                    detail,
                }),
            }
        }
    }
    Ok(report)
}

fn run_instance(st: &BatyrevStructure, h: &CanonicalHeight, h2: &CanonicalHeight) -> Outcome {
    let raw = st.raw_heights(h);
    let raw2 = st.raw_heights(h2);
    let dec = match Decomposer::new(st, &raw, &raw2) {
        Ok(d) => d,
        Err(Error::NotConvex { .. }) => return Outcome::NotConvex,
        Err(e) => return Outcome::Failed(format!("setup: {e}")),
    };
    let brute = dec.canonical_polytopes().and_then(|[p, q, sum]| {
        Ok(compare_sumset(p.lattice_points()?, q.lattice_points()?, sum.lattice_points()?))
    });
    let constructive = dec.decompose_all_with(true, |_| Ok(()));
    match (brute, constructive) {
        (Ok(IdpVerdict::Pass), Ok(stats)) => Outcome::Done {
            points: stats.points,
            fibers: stats.fibers_verified,
        },
        (Ok(IdpVerdict::Witness(w)), Ok(_)) => Outcome::Failed(format!(
            "brute force reports {} witnesses (first {:?}) but every point was decomposed",
            w.len(),
            w[0]
        )),
        (Err(e), _) => Outcome::Failed(format!("brute force: {e}")),
        (_, Err(e)) => Outcome::Failed(format!("decompose: {e}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surface_grid_counts() {
        let grid = SweepGrid::uniform(Range(2, 2), Range(0, 1), Range(0, 1));
        assert_eq!(grid.structures().len(), 2);
        assert_eq!(grid.instance_count(), 2 * 64);
        let report = run_sweep(&grid, None).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(report.instances, 128);
        assert_eq!(report.not_convex, 0);
    }

    #[test]
    fn empty_grid() {
        let grid = SweepGrid::uniform(Range(3, 2), Range(0, 1), Range(0, 1));
        let report = run_sweep(&grid, None).unwrap();
        assert_eq!(report, SweepReport::default());
    }

    #[test]
    fn negative_heights_are_counted() {
        let mut grid = SweepGrid::uniform(Range(2, 2), Range(0, 0), Range(0, 0));
        grid.d = Range(-1, 0);
        grid.d_prime = Some(Range(0, 0));
        let report = run_sweep(&grid, None).unwrap();
        assert_eq!(report.instances, 2);
        assert_eq!(report.not_convex, 1);
        assert!(report.passed());
    }

    #[test]
    fn cap_is_enforced() {
        let grid = SweepGrid::uniform(Range(2, 2), Range(0, 1), Range(0, 1));
        assert!(matches!(run_sweep(&grid, Some(10)), Err(Error::ResourceCap { .. })));
    }
}
