//! Reference geometries used by the verification suites and the CLI docs.
//!
//! Each builder returns an input document; run it through
//! [`crate::complex::StratifiedComplex::load`] to get the validated complex.

use crate::complex::{ComplexDocument, SimplexDocument, StratumDocument};

fn simplex(vertices: &[usize]) -> SimplexDocument {
    SimplexDocument {
        vertices: vertices.to_vec(),
    }
}

fn stratum(id: &str, dim: usize, simplices: &[usize]) -> StratumDocument {
    StratumDocument {
        id: id.to_string(),
        dim,
        simplices: simplices.to_vec(),
    }
}

fn pair(upper: &str, lower: &str) -> (String, String) {
    (upper.to_string(), lower.to_string())
}

/// The segment [-1, 1] in R^1 with vertex strata at both ends.
pub fn segment() -> ComplexDocument {
    ComplexDocument {
        ambient_dim: 1,
        points: vec![vec![-1.0], vec![1.0]],
        simplices: vec![simplex(&[0]), simplex(&[1]), simplex(&[0, 1])],
        strata: vec![
            stratum("v_neg", 0, &[0]),
            stratum("v_pos", 0, &[1]),
            stratum("edge", 1, &[2]),
        ],
        frontier: vec![pair("edge", "v_neg"), pair("edge", "v_pos")],
    }
}

/// Two arms from the origin to (1,1) and (1,-1): five strata meeting at the
/// apex.
pub fn v_complex() -> ComplexDocument {
    ComplexDocument {
        ambient_dim: 2,
        points: vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0, -1.0]],
        simplices: vec![
            simplex(&[0]),
            simplex(&[1]),
            simplex(&[2]),
            simplex(&[0, 1]),
            simplex(&[0, 2]),
        ],
        strata: vec![
            stratum("apex", 0, &[0]),
            stratum("end_up", 0, &[1]),
            stratum("end_down", 0, &[2]),
            stratum("arm_up", 1, &[3]),
            stratum("arm_down", 1, &[4]),
        ],
        frontier: vec![
            pair("arm_up", "apex"),
            pair("arm_up", "end_up"),
            pair("arm_down", "apex"),
            pair("arm_down", "end_down"),
        ],
    }
}

/// Boundary of the unit square: four corner strata and four open edges.
pub fn square_boundary() -> ComplexDocument {
    ComplexDocument {
        ambient_dim: 2,
        points: vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ],
        simplices: vec![
            simplex(&[0]),
            simplex(&[1]),
            simplex(&[2]),
            simplex(&[3]),
            simplex(&[0, 1]),
            simplex(&[1, 2]),
            simplex(&[2, 3]),
            simplex(&[3, 0]),
        ],
        strata: vec![
            stratum("c0", 0, &[0]),
            stratum("c1", 0, &[1]),
            stratum("c2", 0, &[2]),
            stratum("c3", 0, &[3]),
            stratum("e0", 1, &[4]),
            stratum("e1", 1, &[5]),
            stratum("e2", 1, &[6]),
            stratum("e3", 1, &[7]),
        ],
        frontier: vec![
            pair("e0", "c0"),
            pair("e0", "c1"),
            pair("e1", "c1"),
            pair("e1", "c2"),
            pair("e2", "c2"),
            pair("e2", "c3"),
            pair("e3", "c3"),
            pair("e3", "c0"),
        ],
    }
}

/// The segment [-1, 1] stratified with a vertex at the origin, the domain of
/// the map t -> |t|.
pub fn abs_complex() -> ComplexDocument {
    ComplexDocument {
        ambient_dim: 1,
        points: vec![vec![-1.0], vec![0.0], vec![1.0]],
        simplices: vec![
            simplex(&[0]),
            simplex(&[1]),
            simplex(&[2]),
            simplex(&[0, 1]),
            simplex(&[1, 2]),
        ],
        strata: vec![
            stratum("v_neg", 0, &[0]),
            stratum("origin", 0, &[1]),
            stratum("v_pos", 0, &[2]),
            stratum("arm_neg", 1, &[3]),
            stratum("arm_pos", 1, &[4]),
        ],
        frontier: vec![
            pair("arm_neg", "v_neg"),
            pair("arm_neg", "origin"),
            pair("arm_pos", "origin"),
            pair("arm_pos", "v_pos"),
        ],
    }
}

/// Vertex values of t -> |t| on [`abs_complex`].
pub fn abs_values() -> Vec<Vec<f64>> {
    vec![vec![1.0], vec![0.0], vec![1.0]]
}

/// Regular n-gon inscribed in the unit circle; every vertex and every open
/// edge is its own stratum (edges meet at angles, so they cannot merge).
pub fn regular_ngon(n: usize) -> ComplexDocument {
    assert!(n >= 3);
    let points: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / n as f64;
            vec![t.cos(), t.sin()]
        })
        .collect();
    let mut simplices: Vec<SimplexDocument> = (0..n).map(|i| simplex(&[i])).collect();
    for i in 0..n {
        simplices.push(simplex(&[i, (i + 1) % n]));
    }
    let mut strata: Vec<StratumDocument> =
        (0..n).map(|i| stratum(&format!("v{i}"), 0, &[i])).collect();
    for i in 0..n {
        strata.push(stratum(&format!("e{i}"), 1, &[n + i]));
    }
    let mut frontier = Vec::new();
    for i in 0..n {
        frontier.push(pair(&format!("e{i}"), &format!("v{i}")));
        frontier.push(pair(&format!("e{i}"), &format!("v{}", (i + 1) % n)));
    }
    ComplexDocument {
        ambient_dim: 2,
        points,
        simplices,
        strata,
        frontier,
    }
}

/// Two disjoint segments in R^1; the inner distance across them is infinite.
pub fn disconnected_segments() -> ComplexDocument {
    ComplexDocument {
        ambient_dim: 1,
        points: vec![vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]],
        simplices: vec![
            simplex(&[0]),
            simplex(&[1]),
            simplex(&[2]),
            simplex(&[3]),
            simplex(&[0, 1]),
            simplex(&[2, 3]),
        ],
        strata: vec![
            stratum("a0", 0, &[0]),
            stratum("a1", 0, &[1]),
            stratum("b0", 0, &[2]),
            stratum("b1", 0, &[3]),
            stratum("seg_a", 1, &[4]),
            stratum("seg_b", 1, &[5]),
        ],
        frontier: vec![
            pair("seg_a", "a0"),
            pair("seg_a", "a1"),
            pair("seg_b", "b0"),
            pair("seg_b", "b1"),
        ],
    }
}

/// U-shaped 1-complex whose parallel runs are Euclidean-close but inner-far:
/// points over the top run project perpendicularly onto the bottom run while
/// every path between them goes around through the right connector.
pub fn thin_slit() -> ComplexDocument {
    let g = 0.05;
    ComplexDocument {
        ambient_dim: 2,
        points: vec![
            vec![0.0, 0.0],
            vec![2.0, 0.0],
            vec![2.0, g],
            vec![0.0, g],
        ],
        simplices: vec![
            simplex(&[0]),
            simplex(&[1]),
            simplex(&[2]),
            simplex(&[3]),
            simplex(&[0, 1]),
            simplex(&[1, 2]),
            simplex(&[2, 3]),
        ],
        strata: vec![
            stratum("p0", 0, &[0]),
            stratum("p1", 0, &[1]),
            stratum("p2", 0, &[2]),
            stratum("p3", 0, &[3]),
            stratum("bottom", 1, &[4]),
            stratum("right", 1, &[5]),
            stratum("top", 1, &[6]),
        ],
        frontier: vec![
            pair("bottom", "p0"),
            pair("bottom", "p1"),
            pair("right", "p1"),
            pair("right", "p2"),
            pair("top", "p2"),
            pair("top", "p3"),
        ],
    }
}

/// A closed triangle in R^2 with face, edge and corner strata.
pub fn triangle() -> ComplexDocument {
    ComplexDocument {
        ambient_dim: 2,
        points: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
        simplices: vec![
            simplex(&[0]),
            simplex(&[1]),
            simplex(&[2]),
            simplex(&[0, 1]),
            simplex(&[1, 2]),
            simplex(&[2, 0]),
            simplex(&[0, 1, 2]),
        ],
        strata: vec![
            stratum("c0", 0, &[0]),
            stratum("c1", 0, &[1]),
            stratum("c2", 0, &[2]),
            stratum("e01", 1, &[3]),
            stratum("e12", 1, &[4]),
            stratum("e20", 1, &[5]),
            stratum("face", 2, &[6]),
        ],
        frontier: vec![
            pair("e01", "c0"),
            pair("e01", "c1"),
            pair("e12", "c1"),
            pair("e12", "c2"),
            pair("e20", "c2"),
            pair("e20", "c0"),
            pair("face", "e01"),
            pair("face", "e12"),
            pair("face", "e20"),
            pair("face", "c0"),
            pair("face", "c1"),
            pair("face", "c2"),
        ],
    }
}
