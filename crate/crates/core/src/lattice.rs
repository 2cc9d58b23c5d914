//! Lattice-point enumeration inside a box cut by halfspaces.
//!
//! The walk fixes coordinates one at a time. A row whose last nonzero
//! coefficient sits at position `k` becomes a bound on `x_k` once the earlier
//! coordinates are fixed, so infeasible prefixes are cut off as soon as
//! possible. All row evaluations run in `i128`; construction verifies that no
//! partial sum inside the box can leave that range.

use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::linalg::{IntMatrix, IntVector, LatticePoint};

const MAGNITUDE_LIMIT: i128 = 1 << 120;

/// `{ x in Z^dim : lo <= x <= hi, row_r . x >= bound_r for every r }`.
#[derive(Clone, Debug)]
pub struct BoxedSystem {
    dim: usize,
    coeffs: Vec<i64>,
    bounds: Vec<i64>,
    lo: Vec<i64>,
    hi: Vec<i64>,
    rows_by_depth: Vec<Vec<usize>>,
    infeasible: bool,
}

impl BoxedSystem {
    /// Rows of `matrix` with right-hand sides `bounds` (`matrix x >= bounds`).
    pub fn new(matrix: &IntMatrix, bounds: &IntVector, lo: &[i64], hi: &[i64]) -> Result<Self> {
        if bounds.dim() != matrix.rows() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: bounds.dim(),
            });
        }
        let coeffs = (0..matrix.rows())
            .flat_map(|r| matrix.row(r).iter())
            .map(|x| x.to_i64().ok_or(Error::CoordinateOverflow))
            .collect::<Result<Vec<_>>>()?;
        let bounds = bounds.to_lattice_point()?;
        Self::from_parts(matrix.cols(), coeffs, bounds, lo.to_vec(), hi.to_vec())
    }

    pub fn from_parts(
        dim: usize,
        coeffs: Vec<i64>,
        bounds: Vec<i64>,
        lo: Vec<i64>,
        hi: Vec<i64>,
    ) -> Result<Self> {
        if lo.len() != dim || hi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: lo.len().min(hi.len()),
            });
        }
        if coeffs.len() != bounds.len() * dim {
            return Err(Error::Shape(format!(
                "{} coefficients for {} rows of width {dim}",
                coeffs.len(),
                bounds.len()
            )));
        }
        let mut rows_by_depth = vec![Vec::new(); dim];
        let mut infeasible = lo.iter().zip(&hi).any(|(l, h)| l > h);
        for (r, &b) in bounds.iter().enumerate() {
            let row = &coeffs[r * dim..(r + 1) * dim];
            let mut magnitude = i128::from(b).abs();
            for (a, (l, h)) in row.iter().zip(lo.iter().zip(&hi)) {
                let reach = i128::from(*l).abs().max(i128::from(*h).abs());
                magnitude = i128::from(*a)
                    .abs()
                    .checked_mul(reach)
                    .and_then(|t| magnitude.checked_add(t))
                    .ok_or(Error::CoordinateOverflow)?;
            }
            if magnitude > MAGNITUDE_LIMIT {
                return Err(Error::CoordinateOverflow);
            }
            match row.iter().rposition(|&a| a != 0) {
                Some(k) => rows_by_depth[k].push(r),
                None => infeasible |= b > 0,
            }
        }
        Ok(BoxedSystem {
            dim,
            coeffs,
            bounds,
            lo,
            hi,
            rows_by_depth,
            infeasible,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All lattice points, in lexicographic order.
    pub fn points(&self) -> Vec<LatticePoint> {
        let mut out = Vec::new();
        self.walk(&mut |x| {
            out.push(x.to_vec());
            true
        });
        out
    }

    /// The lexicographically first lattice point, if any.
    pub fn first_point(&self) -> Option<LatticePoint> {
        let mut found = None;
        self.walk(&mut |x| {
            found = Some(x.to_vec());
            false
        });
        found
    }

    pub fn count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| {
            n += 1;
            true
        });
        n
    }

    /// Whether `x` satisfies every row (the box is not consulted).
    pub fn satisfies(&self, x: &[i64]) -> bool {
        x.len() == self.dim
            && self.bounds.iter().enumerate().all(|(r, &b)| {
                let row = &self.coeffs[r * self.dim..(r + 1) * self.dim];
                let value = row
                    .iter()
                    .zip(x)
                    .fold(0i128, |acc, (&a, &xi)| acc.saturating_add(i128::from(a) * i128::from(xi)));
                value >= i128::from(b)
            })
    }

    fn walk(&self, visit: &mut dyn FnMut(&[i64]) -> bool) {
        if self.infeasible {
            return;
        }
        let mut x = vec![0i64; self.dim];
        if self.dim == 0 {
            visit(&x);
            return;
        }
        self.descend(0, &mut x, visit);
    }

    // Returns false once the visitor asks to stop.
    fn descend(&self, depth: usize, x: &mut [i64], visit: &mut dyn FnMut(&[i64]) -> bool) -> bool {
        let (mut lower, mut upper) = (i128::from(self.lo[depth]), i128::from(self.hi[depth]));
        for &r in &self.rows_by_depth[depth] {
            let row = &self.coeffs[r * self.dim..(r + 1) * self.dim];
            let partial: i128 = row[..depth]
                .iter()
                .zip(&x[..depth])
                .map(|(&a, &xi)| i128::from(a) * i128::from(xi))
                .sum();
            let a = i128::from(row[depth]);
            let need = i128::from(self.bounds[r]) - partial;
            // a * x_k >= need; for a < 0 this is x_k <= floor(need / a)
            if a > 0 {
                lower = lower.max(ceil_div(need, a));
            } else {
                upper = upper.min(Integer::div_floor(&need, &a));
            }
            if lower > upper {
                return true;
            }
        }
        let mut v = lower;
        while v <= upper {
            // v lies within [lo, hi], both i64.
            x[depth] = v as i64;
            let keep_going = if depth + 1 == self.dim {
                visit(x)
            } else {
                self.descend(depth + 1, x, visit)
            };
            if !keep_going {
                return false;
            }
            v += 1;
        }
        true
    }
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -Integer::div_floor(&-a, &b)
}

/// The bounding box of a non-empty point list.
pub fn bounding_box(points: &[IntVector]) -> Result<(LatticePoint, LatticePoint)> {
    let first = points
        .first()
        .ok_or_else(|| Error::Shape("bounding box of an empty point set".into()))?
        .to_lattice_point()?;
    let (mut lo, mut hi) = (first.clone(), first);
    for p in &points[1..] {
        let p = p.to_lattice_point()?;
        for (i, &c) in p.iter().enumerate() {
            lo[i] = lo[i].min(c);
            hi[i] = hi[i].max(c);
        }
    }
    Ok((lo, hi))
}
