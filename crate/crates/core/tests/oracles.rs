//! Library results against small independent computations.

use idp_lab::batyrev::{BatyrevParams, BatyrevStructure, CanonicalHeight};
use idp_lab::decompose::Decomposer;
use idp_lab::fan::HeightVector;
use idp_lab::linalg::IntVector;
use idp_lab::polytope::LatticePolytope;

type Rows = Vec<Vec<i64>>;

fn det3(m: [[i64; 3]; 3]) -> i64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Vertices of `{x : Ax >= -h}` in dimension 3 by Cramer's rule over every
/// triple of rows. Returns integral vertices only and panics on a fractional one.
fn cramer_vertices(a: &Rows, h: &[i64]) -> Vec<Vec<i64>> {
    let m = a.len();
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let rows = [i, j, k];
                let sub = rows.map(|r| [a[r][0], a[r][1], a[r][2]]);
                let d = det3(sub);
                if d == 0 {
                    continue;
                }
                let rhs = rows.map(|r| -h[r]);
                let num: Vec<i64> = (0..3)
                    .map(|c| {
                        let mut s = sub;
                        for r in 0..3 {
                            s[r][c] = rhs[r];
                        }
                        det3(s)
                    })
                    .collect();
                // x = num / d; test A x >= -h after multiplying through by |d|.
                let sign = d.signum();
                let feasible = a
                    .iter()
                    .zip(h)
                    .all(|(row, &hi)| sign * row.iter().zip(&num).map(|(p, q)| p * q).sum::<i64>() >= -hi * d.abs());
                if !feasible {
                    continue;
                }
                assert!(num.iter().all(|n| n % d == 0), "fractional vertex");
                let x: Vec<i64> = num.iter().map(|n| n / d).collect();
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
    }
    out.sort();
    out
}

fn box_scan(a: &Rows, h: &[i64], radius: i64) -> Vec<Vec<i64>> {
    let dim = a[0].len();
    let mut out = Vec::new();
    let mut x = vec![-radius; dim];
    loop {
        if a.iter().zip(h).all(|(row, &hi)| row.iter().zip(&x).map(|(p, q)| p * q).sum::<i64>() >= -hi) {
            out.push(x.clone());
        }
        let mut i = dim;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if x[i] < radius {
                x[i] += 1;
                break;
            }
            x[i] = -radius;
        }
    }
}

fn rows_of(st: &BatyrevStructure) -> Rows {
    st.matrix()
        .row_vectors()
        .iter()
        .map(|r| r.to_lattice_point().unwrap())
        .collect()
}

fn ints(h: &HeightVector) -> Vec<i64> {
    h.values().to_lattice_point().unwrap()
}

fn structures() -> Vec<BatyrevStructure> {
    [
        BatyrevParams::new([2, 1, 1, 1, 1], &[1], &[]),
        BatyrevParams::new([1, 1, 2, 1, 1], &[0], &[1]),
        BatyrevParams::new([1, 1, 1, 2, 1], &[1, 0], &[]),
    ]
    .into_iter()
    .map(|p| BatyrevStructure::build(p).unwrap())
    .collect()
}

fn height_grid() -> Vec<CanonicalHeight> {
    let mut out = Vec::new();
    for d in 0..=2 {
        for e in 0..=2 {
            for f in 0..=2 {
                out.push(CanonicalHeight::new(d, e, f));
            }
        }
    }
    out
}

#[test]
fn vertices_match_cramer_oracle() {
    for st in structures() {
        let a = rows_of(&st);
        for c in height_grid() {
            let h = st.heights_from_canonical(&c).unwrap();
            let p = LatticePolytope::new(st.fan(), h.clone()).unwrap();
            let got: Vec<Vec<i64>> = p.vertices().iter().map(|v| v.to_lattice_point().unwrap()).collect();
            assert_eq!(got, cramer_vertices(&a, &ints(&h)), "{:?} {c}", st.params().p);
        }
    }
}

#[test]
fn lattice_points_match_box_scan() {
    for st in structures() {
        let a = rows_of(&st);
        for c in height_grid().into_iter().step_by(4) {
            let h = st.heights_from_canonical(&c).unwrap();
            let p = LatticePolytope::new(st.fan(), h.clone()).unwrap();
            assert_eq!(p.lattice_points().unwrap(), box_scan(&a, &ints(&h), 12), "{:?} {c}", st.params().p);
        }
    }
}

#[test]
fn threefold_counts_by_level() {
    let st = &structures()[0];
    let a = rows_of(st);
    let h = [0, 0, 3, 0, 0, 4];
    let points = box_scan(&a, &h, 20);
    let levels: Vec<usize> = (0..=4).map(|t| points.iter().filter(|x| x[2] == t).count()).collect();
    assert_eq!(levels, vec![1, 6, 15, 28, 36]);
    let p = LatticePolytope::new(st.fan(), HeightVector::from_i64s(&h)).unwrap();
    assert_eq!(p.lattice_points().unwrap().len(), 86);
    let q = box_scan(&a, &[2, 0, 1, 0, 0, 3], 20);
    assert_eq!(q.len(), 70);
}

#[test]
fn vertex_decomposition_is_the_only_one() {
    let st = &structures()[0];
    let h = HeightVector::from_i64s(&[0, 0, 3, 0, 0, 4]);
    let h2 = HeightVector::from_i64s(&[2, 0, 1, 0, 0, 3]);
    let a = rows_of(st);
    let alpha = [-2, 0, 0];
    let q_points = box_scan(&a, &ints(&h2), 20);
    let all: Vec<(Vec<i64>, Vec<i64>)> = box_scan(&a, &ints(&h), 20)
        .into_iter()
        .filter_map(|b| {
            let g: Vec<i64> = alpha.iter().zip(&b).map(|(x, y)| x - y).collect();
            q_points.contains(&g).then_some((b, g))
        })
        .collect();
    assert_eq!(all, vec![(vec![0, 0, 0], vec![-2, 0, 0])]);
    let cert = Decomposer::new(st, &h, &h2)
        .unwrap()
        .decompose(&IntVector::from_i64s(&alpha))
        .unwrap();
    assert_eq!(
        (cert.beta.to_lattice_point().unwrap(), cert.gamma.to_lattice_point().unwrap()),
        all[0]
    );
}

#[test]
fn every_certificate_checks_by_hand() {
    for st in structures() {
        let a = rows_of(&st);
        for (c, c2) in [(CanonicalHeight::new(1, 2, 0), CanonicalHeight::new(0, 1, 2)), (CanonicalHeight::new(2, 0, 1), CanonicalHeight::new(1, 1, 1))] {
            let h = st.heights_from_canonical(&c).unwrap();
            let h2 = st.heights_from_canonical(&c2).unwrap();
            let (hi, hi2) = (ints(&h), ints(&h2));
            let inside = |x: &[i64], hs: &[i64]| {
                a.iter().zip(hs).all(|(row, &t)| row.iter().zip(x).map(|(p, q)| p * q).sum::<i64>() >= -t)
            };
            let sum: Vec<i64> = hi.iter().zip(&hi2).map(|(x, y)| x + y).collect();
            let expected = box_scan(&a, &sum, 12);
            let certs = Decomposer::new(&st, &h, &h2).unwrap().decompose_all().unwrap();
            assert_eq!(certs.len(), expected.len());
            for cert in certs {
                let (al, b, g) = (
                    cert.alpha.to_lattice_point().unwrap(),
                    cert.beta.to_lattice_point().unwrap(),
                    cert.gamma.to_lattice_point().unwrap(),
                );
                assert!(inside(&b, &hi) && inside(&g, &hi2));
                assert_eq!(al, b.iter().zip(&g).map(|(x, y)| x + y).collect::<Vec<_>>());
            }
        }
    }
}
