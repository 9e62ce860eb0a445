//! Affine-simplex geometry kernel.
//!
//! Everything here works on plain vertex slices so it can serve both the
//! loader-time validation and the brute-force oracles in the test suites.
//! Hot query paths in [`crate::complex`] use cached per-simplex frames
//! instead.

use nalgebra::{DMatrix, DVector};

const LIN_TOL: f64 = 1e-9;

/// Orthonormal basis of the direction space of a simplex's affine hull.
pub fn hull_frame(verts: &[DVector<f64>]) -> DMatrix<f64> {
    let n = verts[0].len();
    if verts.len() == 1 {
        return DMatrix::zeros(n, 0);
    }
    let edges: Vec<DVector<f64>> = verts[1..].iter().map(|p| p - &verts[0]).collect();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for e in edges {
        let mut w = e;
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&w);
                w -= b * c;
            }
        }
        let norm = w.norm();
        if norm > 1e-12 {
            basis.push(w / norm);
        }
    }
    if basis.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&basis)
    }
}

/// Barycentric coordinates of `x` with respect to the simplex hull, together
/// with the distance from `x` to the hull. The coordinates describe the
/// orthogonal projection of `x` onto the hull.
pub fn barycentric(verts: &[DVector<f64>], x: &DVector<f64>) -> (Vec<f64>, f64) {
    let k = verts.len() - 1;
    if k == 0 {
        return (vec![1.0], (x - &verts[0]).norm());
    }
    let edges = DMatrix::from_columns(
        &verts[1..]
            .iter()
            .map(|p| p - &verts[0])
            .collect::<Vec<_>>(),
    );
    let rhs = x - &verts[0];
    let svd = edges.clone().svd(true, true);
    let t = svd.solve(&rhs, 1e-13).expect("svd solve");
    let proj = &verts[0] + &edges * &t;
    let residual = (x - proj).norm();
    let mut lambda = Vec::with_capacity(k + 1);
    lambda.push(1.0 - t.iter().sum::<f64>());
    lambda.extend(t.iter().cloned());
    (lambda, residual)
}

/// Whether `x` lies in the closed simplex (within `tol` both in barycentric
/// slack and hull distance).
pub fn in_closed_simplex(verts: &[DVector<f64>], x: &DVector<f64>, tol: f64) -> bool {
    let (lambda, residual) = barycentric(verts, x);
    residual <= tol && lambda.iter().all(|&l| l >= -tol)
}

/// Whether `x` lies in the relative interior of the simplex.
pub fn in_open_simplex(verts: &[DVector<f64>], x: &DVector<f64>, tol: f64) -> bool {
    let (lambda, residual) = barycentric(verts, x);
    residual <= tol && lambda.iter().all(|&l| l > tol)
}

/// Projection of `x` onto the closed simplex: enumerates faces, keeps the
/// feasible affine projections, returns the closest. The minimizer lies in
/// the relative interior of some face, where the affine projection onto that
/// face's hull is stationary, so the enumeration is exhaustive.
pub fn project_closed(verts: &[DVector<f64>], x: &DVector<f64>) -> (DVector<f64>, f64) {
    let m = verts.len();
    let mut best: Option<(DVector<f64>, f64)> = None;
    for mask in 1u32..(1 << m) {
        let face: Vec<DVector<f64>> = (0..m)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| verts[i].clone())
            .collect();
        let (lambda, _) = barycentric(&face, x);
        if lambda.iter().any(|&l| l < -LIN_TOL) {
            continue;
        }
        let p: DVector<f64> = face
            .iter()
            .zip(lambda.iter())
            .map(|(v, &l)| v * l)
            .fold(DVector::zeros(x.len()), |acc, v| acc + v);
        let d = (x - &p).norm();
        if best.as_ref().is_none_or(|(_, bd)| d < *bd) {
            best = Some((p, d));
        }
    }
    best.expect("singleton faces are always feasible")
}

/// Minimum height of the simplex: the smallest distance from a vertex to the
/// affine hull of the remaining vertices. Degenerate for flat simplices.
pub fn min_height(verts: &[DVector<f64>]) -> f64 {
    if verts.len() == 1 {
        return f64::INFINITY;
    }
    let mut min = f64::INFINITY;
    for i in 0..verts.len() {
        let others: Vec<DVector<f64>> = verts
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| v.clone())
            .collect();
        let (_, residual) = barycentric(&others, &verts[i]);
        min = min.min(residual);
    }
    min
}

pub fn diameter(verts: &[DVector<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            d = d.max((&verts[i] - &verts[j]).norm());
        }
    }
    d
}

/// Axis-aligned bounding box, for pair pruning.
pub fn aabb(verts: &[DVector<f64>]) -> (DVector<f64>, DVector<f64>) {
    let n = verts[0].len();
    let mut lo = verts[0].clone();
    let mut hi = verts[0].clone();
    for v in &verts[1..] {
        for i in 0..n {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    (lo, hi)
}

pub fn aabb_gap(a: &(DVector<f64>, DVector<f64>), b: &(DVector<f64>, DVector<f64>)) -> f64 {
    let n = a.0.len();
    let mut sq = 0.0;
    for i in 0..n {
        let gap = (b.0[i] - a.1[i]).max(a.0[i] - b.1[i]).max(0.0);
        sq += gap * gap;
    }
    sq.sqrt()
}

struct AffineConstraint {
    value_at_origin: f64,
    gradient: DVector<f64>, // with respect to the local hull-intersection coordinates
    strict: bool,
}

/// Barycentric coordinate functions of a simplex restricted to an affine
/// parametrization x(xi) = x0 + B xi of a subset of its hull.
fn constraints_along(
    verts: &[DVector<f64>],
    x0: &DVector<f64>,
    dirs: &DMatrix<f64>,
    strict: bool,
) -> Vec<AffineConstraint> {
    let d = dirs.ncols();
    let (lambda0, _) = barycentric(verts, x0);
    let k = verts.len() - 1;
    let mut rows = Vec::with_capacity(k + 1);
    if k == 0 {
        rows.push(AffineConstraint {
            value_at_origin: 1.0,
            gradient: DVector::zeros(d),
            strict,
        });
        return rows;
    }
    // differential of the edge coordinates along each direction
    let edges = DMatrix::from_columns(
        &verts[1..]
            .iter()
            .map(|p| p - &verts[0])
            .collect::<Vec<_>>(),
    );
    let svd = edges.svd(true, true);
    let mut grads: Vec<DVector<f64>> = vec![DVector::zeros(d); k + 1];
    for col in 0..d {
        let dir: DVector<f64> = dirs.column(col).into();
        let dt = svd.solve(&dir, 1e-13).expect("svd solve");
        let mut sum = 0.0;
        for i in 0..k {
            grads[i + 1][col] = dt[i];
            sum += dt[i];
        }
        grads[0][col] = -sum;
    }
    for (i, grad) in grads.into_iter().enumerate() {
        rows.push(AffineConstraint {
            value_at_origin: lambda0[i],
            gradient: grad,
            strict,
        });
    }
    rows
}

/// Intersection data of the affine hulls of two simplices: a common point
/// and an orthonormal basis of the common direction space, or `None` when
/// the hulls do not meet.
fn hull_intersection(
    va: &[DVector<f64>],
    vb: &[DVector<f64>],
) -> Option<(DVector<f64>, DMatrix<f64>)> {
    let n = va[0].len();
    let ua = hull_frame(va);
    let ub = hull_frame(vb);
    let da = ua.ncols();
    let db = ub.ncols();
    let scale = diameter(va).max(diameter(vb)).max(1.0);
    if da + db == 0 {
        let x0 = va[0].clone();
        if (&x0 - &vb[0]).norm() > LIN_TOL * scale {
            return None;
        }
        return Some((x0, DMatrix::zeros(n, 0)));
    }
    let mut m = DMatrix::zeros(n, da + db);
    for j in 0..da {
        m.set_column(j, &ua.column(j));
    }
    for j in 0..db {
        let col: DVector<f64> = -DVector::from(ub.column(j));
        m.set_column(da + j, &col);
    }
    let rhs = &vb[0] - &va[0];
    let svd = m.clone().svd(true, true);
    let sol = svd.solve(&rhs, 1e-13).ok()?;
    if (&m * &sol - &rhs).norm() > LIN_TOL * scale {
        return None;
    }
    let x0 = &va[0] + &ua * sol.rows(0, da);
    // common directions: kernel of (I - P_B) restricted to span Ua; the
    // restriction matrix is tall, so its thin SVD carries the full kernel
    let mut dirs: Vec<DVector<f64>> = Vec::new();
    if da > 0 && db > 0 {
        let proj_b = &ub * ub.transpose();
        let m2 = &ua - &proj_b * &ua;
        let svd2 = m2.svd(false, true);
        let v_t = svd2.v_t.expect("svd with v_t");
        let sigma = &svd2.singular_values;
        for i in 0..v_t.nrows() {
            let small = i >= sigma.len() || sigma[i] < 1e-10;
            if small {
                dirs.push(&ua * v_t.row(i).transpose());
            }
        }
    }
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for w in dirs {
        let mut u = w;
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&u);
                u -= b * c;
            }
        }
        let norm = u.norm();
        if norm > 1e-10 {
            basis.push(u / norm);
        }
    }
    let b = if basis.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&basis)
    };
    Some((x0, b))
}

/// Maximizes the worst constraint margin over the hull intersection by
/// enumerating candidate vertices of the small LP
/// `max s  s.t.  c_j + g_j^T xi >= s` (strict rows) `/ >= 0` (closed rows).
fn max_margin(constraints: &[AffineConstraint], d: usize) -> Option<(DVector<f64>, f64)> {
    let m = constraints.len();
    let eval = |xi: &DVector<f64>| -> (f64, f64) {
        // returns (min strict margin, min closed margin)
        let mut strict = f64::INFINITY;
        let mut closed = f64::INFINITY;
        for c in constraints {
            let v = c.value_at_origin + c.gradient.dot(xi);
            if c.strict {
                strict = strict.min(v);
            } else {
                closed = closed.min(v);
            }
        }
        (strict, closed)
    };
    let mut best: Option<(DVector<f64>, f64)> = None;
    let mut consider = |xi: DVector<f64>| {
        let (strict, closed) = eval(&xi);
        if closed >= -1e-12 {
            let s = strict;
            if best.as_ref().is_none_or(|(_, bs)| s > *bs) {
                best = Some((xi, s));
            }
        }
    };
    consider(DVector::zeros(d));
    if d > 0 && m >= d + 1 {
        // candidate vertices: d+1 active constraints
        let mut index = vec![0usize; d + 1];
        enumerate_subsets(m, d + 1, &mut index, 0, 0, &mut |set: &[usize]| {
            let mut a = DMatrix::zeros(d + 1, d + 1);
            let mut b = DVector::zeros(d + 1);
            for (row, &ci) in set.iter().enumerate() {
                let c = &constraints[ci];
                for col in 0..d {
                    a[(row, col)] = c.gradient[col];
                }
                a[(row, d)] = if c.strict { -1.0 } else { 0.0 };
                b[row] = -c.value_at_origin;
            }
            if let Some(sol) = a.lu().solve(&b) {
                if sol.iter().all(|v| v.is_finite()) {
                    let xi = DVector::from_iterator(d, sol.iter().take(d).cloned());
                    consider(xi);
                }
            }
        });
    }
    best
}

fn enumerate_subsets(
    m: usize,
    k: usize,
    scratch: &mut Vec<usize>,
    start: usize,
    depth: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if depth == k {
        f(&scratch[..k]);
        return;
    }
    for i in start..m {
        scratch[depth] = i;
        enumerate_subsets(m, k, scratch, i + 1, depth + 1, f);
    }
}

/// A point in `relint(A) ∩ relint(B)` (strict flags select relative interior
/// versus closed simplex per side), or `None` when the intersection is empty.
pub fn relint_witness(
    va: &[DVector<f64>],
    vb: &[DVector<f64>],
    strict_a: bool,
    strict_b: bool,
    tol: f64,
) -> Option<DVector<f64>> {
    let (x0, dirs) = hull_intersection(va, vb)?;
    let d = dirs.ncols();
    let mut constraints = constraints_along(va, &x0, &dirs, strict_a);
    constraints.extend(constraints_along(vb, &x0, &dirs, strict_b));
    // when a side is closed, margin applies only to strict rows; when both
    // are closed, treat all rows as strict and accept nonnegative margins
    let all_closed = !strict_a && !strict_b;
    if all_closed {
        for c in &mut constraints {
            c.strict = true;
        }
    }
    let (xi, margin) = max_margin(&constraints, d)?;
    let ok = if all_closed {
        margin >= -tol
    } else {
        margin > tol
    };
    if ok {
        Some(&x0 + &dirs * xi)
    } else {
        None
    }
}

/// Whether the closed simplices intersect.
pub fn closed_simplices_touch(va: &[DVector<f64>], vb: &[DVector<f64>], tol: f64) -> bool {
    relint_witness(va, vb, false, false, tol).is_some()
}

/// Euclidean distance between two closed simplices.
pub fn simplex_distance(va: &[DVector<f64>], vb: &[DVector<f64>]) -> f64 {
    if closed_simplices_touch(va, vb, 1e-10) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    // vertex-to-simplex projections are exact and always feasible
    for v in va {
        best = best.min(project_closed(vb, v).1);
    }
    for v in vb {
        best = best.min(project_closed(va, v).1);
    }
    // face-pair stationary points
    let ma = va.len();
    let mb = vb.len();
    for mask_a in 1u32..(1 << ma) {
        let fa: Vec<DVector<f64>> = (0..ma)
            .filter(|i| mask_a & (1 << i) != 0)
            .map(|i| va[i].clone())
            .collect();
        for mask_b in 1u32..(1 << mb) {
            let fb: Vec<DVector<f64>> = (0..mb)
                .filter(|i| mask_b & (1 << i) != 0)
                .map(|i| vb[i].clone())
                .collect();
            if let Some(d) = face_pair_distance(&fa, &fb) {
                best = best.min(d);
            }
        }
    }
    best
}

/// Distance between the affine hulls of two faces when the joint minimizer
/// is feasible for both faces.
fn face_pair_distance(fa: &[DVector<f64>], fb: &[DVector<f64>]) -> Option<f64> {
    let n = fa[0].len();
    let ua = hull_frame(fa);
    let ub = hull_frame(fb);
    let da = ua.ncols();
    let db = ub.ncols();
    if da + db == 0 {
        return Some((&fa[0] - &fb[0]).norm());
    }
    let mut m = DMatrix::zeros(n, da + db);
    for j in 0..da {
        m.set_column(j, &ua.column(j));
    }
    for j in 0..db {
        let col: DVector<f64> = -DVector::from(ub.column(j));
        m.set_column(da + j, &col);
    }
    let rhs = &fb[0] - &fa[0];
    let svd = m.svd(true, true);
    let sol = svd.solve(&rhs, 1e-13).ok()?;
    let x = &fa[0] + &ua * sol.rows(0, da);
    let y = &fb[0] + &ub * sol.rows(da, db);
    let (la, ra) = barycentric(fa, &x);
    let (lb, rb) = barycentric(fb, &y);
    let feasible = ra < LIN_TOL
        && rb < LIN_TOL
        && la.iter().all(|&l| l >= -LIN_TOL)
        && lb.iter().all(|&l| l >= -LIN_TOL);
    feasible.then(|| (&x - &y).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v2(x: f64, y: f64) -> DVector<f64> {
        DVector::from_vec(vec![x, y])
    }

    #[test]
    fn barycentric_roundtrip() {
        let verts = vec![v2(0.0, 0.0), v2(1.0, 0.0), v2(0.0, 1.0)];
        let x = v2(0.25, 0.5);
        let (lambda, residual) = barycentric(&verts, &x);
        assert!(residual < 1e-12);
        assert!((lambda[0] - 0.25).abs() < 1e-12);
        assert!((lambda[1] - 0.25).abs() < 1e-12);
        assert!((lambda[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn project_closed_clamps_to_vertex() {
        let verts = vec![v2(0.0, 0.0), v2(1.0, 0.0)];
        let (p, d) = project_closed(&verts, &v2(1.4, 0.3));
        assert!((p - v2(1.0, 0.0)).norm() < 1e-12);
        assert!((d - (0.4f64 * 0.4 + 0.09).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn project_closed_interior_foot() {
        let verts = vec![v2(0.0, 0.0), v2(1.0, 0.0)];
        let (p, d) = project_closed(&verts, &v2(0.5, 0.3));
        assert!((p - v2(0.5, 0.0)).norm() < 1e-12);
        assert!((d - 0.3).abs() < 1e-12);
    }

    #[test]
    fn min_height_degenerate() {
        let thin = vec![v2(0.0, 0.0), v2(1.0, 0.0), v2(0.5, 1e-13)];
        assert!(min_height(&thin) < 1e-10);
        let ok = vec![v2(0.0, 0.0), v2(1.0, 0.0), v2(0.0, 1.0)];
        assert!(min_height(&ok) > 0.5);
    }

    #[test]
    fn collinear_overlapping_segments_intersect() {
        let a = vec![v2(0.0, 0.0), v2(2.0, 0.0)];
        let b = vec![v2(1.0, 0.0), v2(3.0, 0.0)];
        assert!(relint_witness(&a, &b, true, true, 1e-9).is_some());
    }

    #[test]
    fn crossing_segments_intersect() {
        let a = vec![v2(-1.0, -1.0), v2(1.0, 1.0)];
        let b = vec![v2(-1.0, 1.0), v2(1.0, -1.0)];
        let w = relint_witness(&a, &b, true, true, 1e-9).expect("crossing");
        assert!(w.norm() < 1e-9);
    }

    #[test]
    fn touching_at_shared_vertex_is_not_open_overlap() {
        let a = vec![v2(0.0, 0.0), v2(1.0, 1.0)];
        let b = vec![v2(0.0, 0.0), v2(1.0, -1.0)];
        assert!(relint_witness(&a, &b, true, true, 1e-9).is_none());
        assert!(closed_simplices_touch(&a, &b, 1e-9));
    }

    #[test]
    fn vertex_in_open_segment_detected() {
        let point = vec![v2(0.5, 0.0)];
        let seg = vec![v2(0.0, 0.0), v2(1.0, 0.0)];
        assert!(relint_witness(&point, &seg, true, true, 1e-9).is_some());
        let endpoint = vec![v2(0.0, 0.0)];
        assert!(relint_witness(&endpoint, &seg, true, true, 1e-9).is_none());
        // endpoint lies in the closed segment
        assert!(relint_witness(&endpoint, &seg, true, false, 1e-9).is_some());
    }

    #[test]
    fn segment_through_triangle_interior() {
        let tri = vec![v2(0.0, 0.0), v2(2.0, 0.0), v2(0.0, 2.0)];
        let seg = vec![v2(0.5, -1.0), v2(0.5, 3.0)];
        assert!(relint_witness(&tri, &seg, true, true, 1e-9).is_some());
        let outside = vec![v2(3.0, -1.0), v2(3.0, 3.0)];
        assert!(relint_witness(&tri, &outside, true, true, 1e-9).is_none());
    }

    #[test]
    fn triangle_sharing_edge_no_open_overlap() {
        let t1 = vec![v2(0.0, 0.0), v2(1.0, 0.0), v2(0.0, 1.0)];
        let t2 = vec![v2(1.0, 0.0), v2(0.0, 1.0), v2(1.0, 1.0)];
        assert!(relint_witness(&t1, &t2, true, true, 1e-9).is_none());
        assert!(closed_simplices_touch(&t1, &t2, 1e-9));
        let overlapping = vec![v2(0.1, 0.1), v2(1.0, 0.2), v2(0.2, 1.0)];
        assert!(relint_witness(&t1, &overlapping, true, true, 1e-9).is_some());
    }

    #[test]
    fn distance_between_disjoint_segments() {
        let a = vec![v2(0.0, 0.0), v2(1.0, 0.0)];
        let b = vec![v2(0.0, 1.0), v2(1.0, 1.0)];
        assert!((simplex_distance(&a, &b) - 1.0).abs() < 1e-12);
        // skew in 3d
        let a3 = vec![
            DVector::from_vec(vec![-1.0, 0.0, 0.0]),
            DVector::from_vec(vec![1.0, 0.0, 0.0]),
        ];
        let b3 = vec![
            DVector::from_vec(vec![0.0, -1.0, 0.5]),
            DVector::from_vec(vec![0.0, 1.0, 0.5]),
        ];
        assert!((simplex_distance(&a3, &b3) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn distance_zero_when_touching() {
        let a = vec![v2(0.0, 0.0), v2(1.0, 1.0)];
        let b = vec![v2(0.0, 0.0), v2(1.0, -1.0)];
        assert_eq!(simplex_distance(&a, &b), 0.0);
    }
}
