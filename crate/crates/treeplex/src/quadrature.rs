//! Quadrature rules: symmetric rules exact to degree 2k on simplices,
//! tensor-product Gauss with k+1 points per direction on hypercubes.

use crate::shape::CellShape;

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_1d(n: usize) -> (Vec<f64>, Vec<f64>) {
    match n {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let a = 1.0 / 3f64.sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        3 => {
            let a = (3.0f64 / 5.0).sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        _ => panic!("unsupported Gauss order {n}"),
    }
}

fn tensor_rule(dim: usize, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (x, w) = gauss_1d(n);
    let mut pts = vec![Vec::new()];
    let mut wts = vec![1.0];
    for _ in 0..dim {
        let mut np = Vec::new();
        let mut nw = Vec::new();
        for (p, &pw) in pts.iter().zip(&wts) {
            for (xi, wi) in x.iter().zip(&w) {
                let mut q = p.clone();
                q.push(*xi);
                np.push(q);
                nw.push(pw * wi);
            }
        }
        pts = np;
        wts = nw;
    }
    (pts, wts)
}

fn permutations_of(bary: &[f64]) -> Vec<Vec<f64>> {
    fn permute(items: &[f64]) -> Vec<Vec<f64>> {
        if items.len() <= 1 {
            return vec![items.to_vec()];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.to_vec();
            let head = rest.remove(i);
            for mut tail in permute(&rest) {
                tail.insert(0, head);
                out.push(tail);
            }
        }
        out
    }
    let mut perms = permute(bary);
    perms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    perms.dedup_by(|a, b| a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() < 1e-15));
    perms
}

/// Barycentric orbit to Cartesian points on the unit simplex (first
/// barycentric coordinate belongs to the origin vertex).
fn simplex_orbit(bary: &[f64], weight: f64, pts: &mut Vec<Vec<f64>>, wts: &mut Vec<f64>) {
    for perm in permutations_of(bary) {
        pts.push(perm[1..].to_vec());
        wts.push(weight);
    }
}

/// Quadrature for an element of degree `k` on the given reference cell,
/// exact to degree 2k (simplices) or with k+1 Gauss points per direction
/// (hypercubes).
pub fn cell_rule(shape: CellShape, k: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    match shape {
        CellShape::Segment => {
            let (x, w) = gauss_1d(k + 1);
            // map [-1,1] to the unit segment
            (
                x.iter().map(|xi| vec![0.5 * (xi + 1.0)]).collect(),
                w.iter().map(|wi| 0.5 * wi).collect(),
            )
        }
        CellShape::Quadrilateral => tensor_rule(2, k + 1),
        CellShape::Hexahedron => tensor_rule(3, k + 1),
        CellShape::Triangle => {
            let mut pts = Vec::new();
            let mut wts = Vec::new();
            if k <= 1 {
                // edge-midpoint rule, degree 2
                simplex_orbit(&[0.5, 0.5, 0.0], 1.0 / 6.0, &mut pts, &mut wts);
            } else {
                // Radon's 7-point rule, degree 5
                let s15 = 15f64.sqrt();
                simplex_orbit(
                    &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
                    0.5 * 9.0 / 40.0,
                    &mut pts,
                    &mut wts,
                );
                let a = (6.0 - s15) / 21.0;
                simplex_orbit(
                    &[1.0 - 2.0 * a, a, a],
                    0.5 * (155.0 - s15) / 1200.0,
                    &mut pts,
                    &mut wts,
                );
                let b = (6.0 + s15) / 21.0;
                simplex_orbit(
                    &[1.0 - 2.0 * b, b, b],
                    0.5 * (155.0 + s15) / 1200.0,
                    &mut pts,
                    &mut wts,
                );
            }
            (pts, wts)
        }
        CellShape::Tetrahedron => {
            let mut pts = Vec::new();
            let mut wts = Vec::new();
            if k <= 1 {
                // 4-point rule, degree 2
                let a = (5.0 + 3.0 * 5f64.sqrt()) / 20.0;
                let b = (5.0 - 5f64.sqrt()) / 20.0;
                simplex_orbit(&[a, b, b, b], 1.0 / 24.0, &mut pts, &mut wts);
            } else {
                // Keast's 11-point rule, degree 4
                simplex_orbit(
                    &[0.25, 0.25, 0.25, 0.25],
                    -74.0 / 5625.0,
                    &mut pts,
                    &mut wts,
                );
                let a = 11.0 / 14.0;
                let b = 1.0 / 14.0;
                simplex_orbit(&[a, b, b, b], 343.0 / 45000.0, &mut pts, &mut wts);
                let c = (1.0 + (5.0f64 / 14.0).sqrt()) / 4.0;
                let d = (1.0 - (5.0f64 / 14.0).sqrt()) / 4.0;
                simplex_orbit(&[c, c, d, d], 28.0 / 1125.0, &mut pts, &mut wts);
            }
            (pts, wts)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|i| i as f64).product::<f64>().max(1.0)
    }

    /// Exact monomial integral over the unit simplex.
    fn simplex_integral(expo: &[usize]) -> f64 {
        let d = expo.len();
        let total: usize = expo.iter().sum();
        expo.iter().map(|&e| factorial(e)).product::<f64>() / factorial(total + d)
    }

    fn cube_integral(expo: &[usize]) -> f64 {
        expo.iter()
            .map(|&e| {
                if e % 2 == 1 {
                    0.0
                } else {
                    2.0 / (e as f64 + 1.0)
                }
            })
            .product()
    }

    fn exponents_up_to(dim: usize, total: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..dim {
            let mut next = Vec::new();
            for p in &out {
                for e in 0..=total {
                    let mut q = p.clone();
                    q.push(e);
                    next.push(q);
                }
            }
            out = next;
        }
        out.into_iter()
            .filter(|e| e.iter().sum::<usize>() <= total)
            .collect()
    }

    #[test]
    fn simplex_rules_exact_to_2k() {
        for (shape, dim) in [(CellShape::Triangle, 2), (CellShape::Tetrahedron, 3)] {
            for k in [1usize, 2] {
                let (pts, wts) = cell_rule(shape, k);
                for expo in exponents_up_to(dim, 2 * k) {
                    let num: f64 = pts
                        .iter()
                        .zip(&wts)
                        .map(|(p, w)| {
                            w * expo
                                .iter()
                                .zip(p)
                                .map(|(&e, &x)| x.powi(e as i32))
                                .product::<f64>()
                        })
                        .sum();
                    let exact = simplex_integral(&expo);
                    assert!(
                        (num - exact).abs() < 1e-14,
                        "{shape:?} k={k} expo={expo:?}: {num} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn tensor_rules_exact_per_direction() {
        for (shape, dim) in [(CellShape::Quadrilateral, 2), (CellShape::Hexahedron, 3)] {
            for k in [1usize, 2] {
                let (pts, wts) = cell_rule(shape, k);
                // exact to per-direction degree 2(k+1)-1
                let per_dir = 2 * (k + 1) - 1;
                let mut expos = vec![vec![0; dim]];
                for d in 0..dim {
                    let mut e = vec![0; dim];
                    e[d] = per_dir;
                    expos.push(e);
                }
                let mut mixed = vec![per_dir; dim];
                mixed[0] = per_dir.saturating_sub(1);
                expos.push(mixed);
                for expo in expos {
                    let num: f64 = pts
                        .iter()
                        .zip(&wts)
                        .map(|(p, w)| {
                            w * expo
                                .iter()
                                .zip(p)
                                .map(|(&e, &x)| x.powi(e as i32))
                                .product::<f64>()
                        })
                        .sum();
                    let exact = cube_integral(&expo);
                    assert!((num - exact).abs() < 1e-13, "{shape:?} k={k} {expo:?}");
                }
            }
        }
    }

    #[test]
    fn segment_rule_integrates_unit_interval() {
        for k in [1usize, 2] {
            let (pts, wts) = cell_rule(CellShape::Segment, k);
            let total: f64 = wts.iter().sum();
            assert!((total - 1.0).abs() < 1e-15);
            let m: f64 = pts.iter().zip(&wts).map(|(p, w)| w * p[0]).sum();
            assert!((m - 0.5).abs() < 1e-15, "k={k}");
        }
    }
}
