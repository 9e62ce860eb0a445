//! Stratified polyhedral sets: geometry, frontier-condition validation,
//! closest-point retractions, tubular neighborhoods and tube-profile
//! selection.
//!
//! A complex is a finite set of affine simplices whose open interiors are
//! pairwise disjoint, partitioned into strata. With affine simplices the
//! regularity hypotheses (tangent containment across the frontier, smooth
//! retractions near each stratum) hold by construction, so the loader can
//! check them instead of assuming them.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom;
use crate::subspace::Subspace;
use crate::tol::Tolerances;

// ---------------------------------------------------------------------------
// input documents
// ---------------------------------------------------------------------------

/// JSON input schema. Field names are part of the interchange contract.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDocument {
    pub ambient_dim: usize,
    pub points: Vec<Vec<f64>>,
    pub simplices: Vec<SimplexDocument>,
    pub strata: Vec<StratumDocument>,
    pub frontier: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplexDocument {
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StratumDocument {
    pub id: String,
    pub dim: usize,
    pub simplices: Vec<usize>,
}

impl ComplexDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// cached per-simplex geometry
// ---------------------------------------------------------------------------

/// Cached affine data of one simplex.
#[derive(Debug, Clone)]
pub struct SimplexFrame {
    pub vertices: Vec<DVector<f64>>,
    pub base: DVector<f64>,
    /// Orthonormal basis of the tangent (direction) space, n x k.
    pub tangent: DMatrix<f64>,
    /// Orthonormal basis of the normal space, n x (n-k).
    pub normal: DMatrix<f64>,
    /// Pseudo-inverse of the edge matrix; maps ambient displacements to
    /// edge coordinates.
    edge_pinv: DMatrix<f64>,
    pub diameter: f64,
    pub aabb: (DVector<f64>, DVector<f64>),
}

impl SimplexFrame {
    fn new(vertices: Vec<DVector<f64>>) -> Self {
        let n = vertices[0].len();
        let k = vertices.len() - 1;
        let base = vertices[0].clone();
        let tangent = geom::hull_frame(&vertices);
        let tangent_space =
            Subspace::from_orthonormal(tangent.clone(), &crate::tol::DEFAULT).expect("qr basis");
        let normal = tangent_space.complement().basis().clone();
        let edge_pinv = if k == 0 {
            DMatrix::zeros(0, n)
        } else {
            let edges = DMatrix::from_columns(
                &vertices[1..]
                    .iter()
                    .map(|p| p - &vertices[0])
                    .collect::<Vec<_>>(),
            );
            edges
                .svd(true, true)
                .pseudo_inverse(1e-13)
                .expect("pseudo inverse of validated simplex")
        };
        let diameter = geom::diameter(&vertices);
        let aabb = geom::aabb(&vertices);
        Self {
            vertices,
            base,
            tangent,
            normal,
            edge_pinv,
            diameter,
            aabb,
        }
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Barycentric coordinates of the hull projection of `x`, plus the
    /// distance from `x` to the hull.
    pub fn barycentric(&self, x: &DVector<f64>) -> (Vec<f64>, f64) {
        let rel = x - &self.base;
        let k = self.dim();
        if k == 0 {
            return (vec![1.0], rel.norm());
        }
        let t = &self.edge_pinv * &rel;
        let tangential = &self.tangent * (self.tangent.transpose() * &rel);
        let residual = (&rel - tangential).norm();
        let mut lambda = Vec::with_capacity(k + 1);
        lambda.push(1.0 - t.iter().sum::<f64>());
        lambda.extend(t.iter().cloned());
        (lambda, residual)
    }

    /// Orthogonal projection of `x` onto the affine hull.
    pub fn hull_project(&self, x: &DVector<f64>) -> (DVector<f64>, f64) {
        let rel = x - &self.base;
        let tangential = &self.tangent * (self.tangent.transpose() * &rel);
        let p = &self.base + &tangential;
        let d = (x - &p).norm();
        (p, d)
    }

    pub fn contains_closed(&self, x: &DVector<f64>, tol: f64) -> bool {
        let (lambda, residual) = self.barycentric(x);
        residual <= tol && lambda.iter().all(|&l| l >= -tol)
    }

    pub fn contains_open(&self, x: &DVector<f64>, tol: f64) -> bool {
        let (lambda, residual) = self.barycentric(x);
        residual <= tol && lambda.iter().all(|&l| l > tol)
    }

    /// Point with the given barycentric coordinates.
    pub fn point_at(&self, lambda: &[f64]) -> DVector<f64> {
        let mut p = DVector::zeros(self.base.len());
        for (v, &l) in self.vertices.iter().zip(lambda.iter()) {
            p += v * l;
        }
        p
    }
}

// ---------------------------------------------------------------------------
// strata and the complex
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Stratum {
    pub id: String,
    pub dim: usize,
    /// Indices into the complex simplex list.
    pub simplices: Vec<usize>,
    /// Vertex-index sets of the codimension-one faces on the relative
    /// boundary of the stratum (faces carried by exactly one member).
    boundary_ridges: Vec<Vec<usize>>,
}

/// Result of a closest-point query against one stratum.
#[derive(Debug, Clone)]
pub struct Foot {
    pub point: DVector<f64>,
    pub dist: f64,
    /// Whether the closest point lies in the open stratum; when false the
    /// query point is outside the retraction domain and `point`/`dist` hold
    /// the affine-span projection data of the nearest member, unusable for
    /// retraction.
    pub inside: bool,
    /// Member simplex attaining the minimum.
    pub member: usize,
}

#[derive(Debug)]
pub struct StratifiedComplex {
    ambient_dim: usize,
    points: Vec<DVector<f64>>,
    simplices: Vec<Vec<usize>>,
    frames: Vec<SimplexFrame>,
    strata: Vec<Stratum>,
    /// (upper, lower) pairs: lower lies in the closure of upper.
    frontier: Vec<(usize, usize)>,
    simplex_stratum: Vec<usize>,
    diameter: f64,
    tol: Tolerances,
}

impl StratifiedComplex {
    /// Load and validate a document. Violations are reported with stratum
    /// and simplex identifiers.
    pub fn load(doc: &ComplexDocument, tol: Tolerances) -> Result<Self> {
        let n = doc.ambient_dim;
        if n == 0 {
            return Err(Error::Schema("ambient_dim must be positive".into()));
        }
        if doc.points.is_empty() {
            return Err(Error::Schema("points must be nonempty".into()));
        }
        let mut points = Vec::with_capacity(doc.points.len());
        for (i, p) in doc.points.iter().enumerate() {
            if p.len() != n {
                return Err(Error::Schema(format!(
                    "point {i} has dimension {}, expected {n}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::Schema(format!("point {i} has a non-finite entry")));
            }
            points.push(DVector::from_vec(p.clone()));
        }

        // simplices: index hygiene, duplicates, degeneracy
        let mut simplices = Vec::with_capacity(doc.simplices.len());
        let mut seen = BTreeMap::new();
        for (i, s) in doc.simplices.iter().enumerate() {
            if s.vertices.is_empty() {
                return Err(Error::Schema(format!("simplex {i} has no vertices")));
            }
            if s.vertices.len() > n + 1 {
                return Err(Error::Schema(format!(
                    "simplex {i} has {} vertices in ambient dimension {n}",
                    s.vertices.len()
                )));
            }
            let mut sorted = s.vertices.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != s.vertices.len() {
                return Err(Error::Schema(format!("simplex {i} repeats a vertex")));
            }
            for &v in &s.vertices {
                if v >= points.len() {
                    return Err(Error::Schema(format!(
                        "simplex {i} references missing point {v}"
                    )));
                }
            }
            if let Some(&other) = seen.get(&sorted) {
                return Err(Error::Disjointness { a: other, b: i });
            }
            seen.insert(sorted, i);
            simplices.push(s.vertices.clone());
        }
        let frames: Vec<SimplexFrame> = simplices
            .iter()
            .map(|vs| SimplexFrame::new(vs.iter().map(|&v| points[v].clone()).collect()))
            .collect();
        for (i, f) in frames.iter().enumerate() {
            let h = geom::min_height(&f.vertices);
            if h <= tol.simplex_height {
                return Err(Error::DegenerateSimplex {
                    index: i,
                    height: h,
                });
            }
        }

        // strata: ids, dimensions, exact partition of the simplex list
        let mut ids = BTreeMap::new();
        for (si, st) in doc.strata.iter().enumerate() {
            if ids.insert(st.id.clone(), si).is_some() {
                return Err(Error::Schema(format!("duplicate stratum id '{}'", st.id)));
            }
            if st.simplices.is_empty() {
                return Err(Error::StratumInvalid {
                    stratum: st.id.clone(),
                    reason: "no member simplices".into(),
                });
            }
            for &m in &st.simplices {
                if m >= simplices.len() {
                    return Err(Error::StratumInvalid {
                        stratum: st.id.clone(),
                        reason: format!("references missing simplex {m}"),
                    });
                }
                if simplices[m].len() - 1 != st.dim {
                    return Err(Error::StratumInvalid {
                        stratum: st.id.clone(),
                        reason: format!(
                            "member simplex {m} has dimension {}, stratum declares {}",
                            simplices[m].len() - 1,
                            st.dim
                        ),
                    });
                }
            }
        }
        let mut owner = vec![usize::MAX; simplices.len()];
        for (si, st) in doc.strata.iter().enumerate() {
            for &m in &st.simplices {
                if owner[m] != usize::MAX {
                    return Err(Error::Coverage {
                        simplex: m,
                        count: 2,
                    });
                }
                owner[m] = si;
            }
        }
        if let Some(orphan) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::Coverage {
                simplex: orphan,
                count: 0,
            });
        }

        // geometric disjointness of open simplices
        for i in 0..simplices.len() {
            for j in i + 1..simplices.len() {
                if geom::aabb_gap(&frames[i].aabb, &frames[j].aabb) > tol.on_complex {
                    continue;
                }
                if geom::relint_witness(
                    &frames[i].vertices,
                    &frames[j].vertices,
                    true,
                    true,
                    tol.barycentric,
                )
                .is_some()
                {
                    return Err(Error::Disjointness { a: i, b: j });
                }
            }
        }

        // per-stratum manifold validation and boundary ridges
        let mut strata = Vec::with_capacity(doc.strata.len());
        for st in &doc.strata {
            let boundary_ridges = validate_stratum(st, &simplices, &frames, &tol)?;
            strata.push(Stratum {
                id: st.id.clone(),
                dim: st.dim,
                simplices: st.simplices.clone(),
                boundary_ridges,
            });
        }

        // frontier relation: declared pairs
        let mut frontier = Vec::new();
        for (upper_id, lower_id) in &doc.frontier {
            let &u = ids.get(upper_id).ok_or_else(|| Error::Frontier {
                reason: format!("declared pair references unknown stratum '{upper_id}'"),
            })?;
            let &l = ids.get(lower_id).ok_or_else(|| Error::Frontier {
                reason: format!("declared pair references unknown stratum '{lower_id}'"),
            })?;
            if u == l {
                return Err(Error::Frontier {
                    reason: format!("stratum '{upper_id}' declared over itself"),
                });
            }
            if frontier.contains(&(u, l)) {
                return Err(Error::Frontier {
                    reason: format!("duplicate pair ('{upper_id}', '{lower_id}')"),
                });
            }
            frontier.push((u, l));
        }
        let complex = Self {
            ambient_dim: n,
            diameter: compute_diameter(&points),
            points,
            simplices,
            frames,
            strata,
            frontier,
            simplex_stratum: owner,
            tol,
        };
        complex.validate_frontier()?;
        Ok(complex)
    }

    pub fn load_json(text: &str, tol: Tolerances) -> Result<Self> {
        Self::load(&ComplexDocument::from_json(text)?, tol)
    }

    /// Closure of each stratum must meet other strata only by containing
    /// them, and the declared relation must match the measured contact.
    fn validate_frontier(&self) -> Result<()> {
        for u in 0..self.strata.len() {
            for l in 0..self.strata.len() {
                if u == l {
                    continue;
                }
                let contact = self.strata_contact(u, l);
                let declared = self.frontier.contains(&(u, l));
                if contact {
                    if !self.stratum_contained_in_closure(l, u) {
                        return Err(Error::Frontier {
                            reason: format!(
                                "closure of '{}' meets '{}' without containing it",
                                self.strata[u].id, self.strata[l].id
                            ),
                        });
                    }
                    if !declared {
                        return Err(Error::Frontier {
                            reason: format!(
                                "'{}' lies in the closure of '{}' but the pair is not declared",
                                self.strata[l].id, self.strata[u].id
                            ),
                        });
                    }
                } else if declared {
                    return Err(Error::Frontier {
                        reason: format!(
                            "declared pair ('{}', '{}') has no geometric contact",
                            self.strata[u].id, self.strata[l].id
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    /// Whether the closure of stratum `u` meets the open stratum `l`.
    fn strata_contact(&self, u: usize, l: usize) -> bool {
        for &a in &self.strata[u].simplices {
            for &b in &self.strata[l].simplices {
                if geom::aabb_gap(&self.frames[a].aabb, &self.frames[b].aabb) > self.tol.on_complex
                {
                    continue;
                }
                if geom::relint_witness(
                    &self.frames[a].vertices,
                    &self.frames[b].vertices,
                    false,
                    true,
                    self.tol.barycentric,
                )
                .is_some()
                {
                    return true;
                }
            }
        }
        false
    }

    /// Sampled certificate that stratum `l` is contained in the closure of
    /// stratum `u` (barycentric grid on each member of `l`).
    fn stratum_contained_in_closure(&self, l: usize, u: usize) -> bool {
        for &b in &self.strata[l].simplices {
            let fb = &self.frames[b];
            for lambda in barycentric_grid(fb.dim(), 3) {
                let p = fb.point_at(&lambda);
                let covered = self.strata[u]
                    .simplices
                    .iter()
                    .any(|&a| self.frames[a].contains_closed(&p, self.tol.on_complex));
                if !covered {
                    return false;
                }
            }
        }
        true
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn simplices(&self) -> &[Vec<usize>] {
        &self.simplices
    }

    pub fn frame(&self, simplex: usize) -> &SimplexFrame {
        &self.frames[simplex]
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    pub fn stratum(&self, idx: usize) -> &Stratum {
        &self.strata[idx]
    }

    pub fn stratum_index(&self, id: &str) -> Option<usize> {
        self.strata.iter().position(|s| s.id == id)
    }

    pub fn simplex_stratum(&self, simplex: usize) -> usize {
        self.simplex_stratum[simplex]
    }

    pub fn frontier(&self) -> &[(usize, usize)] {
        &self.frontier
    }

    /// Strata strictly below `s` (contained in its closure).
    pub fn lower_frontier(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.frontier
            .iter()
            .filter(move |(u, _)| *u == s)
            .map(|(_, l)| *l)
    }

    /// Strata whose closure contains `s`.
    pub fn upper_frontier(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.frontier
            .iter()
            .filter(move |(_, l)| *l == s)
            .map(|(u, _)| *u)
    }

    /// All simplices whose closed set contains `x` (within `tol`).
    pub fn containing_simplices(&self, x: &DVector<f64>, tol: f64) -> Vec<usize> {
        (0..self.simplices.len())
            .filter(|&i| self.frames[i].contains_closed(x, tol))
            .collect()
    }

    pub fn on_complex(&self, x: &DVector<f64>) -> bool {
        (0..self.strata.len()).any(|s| self.stratum_contains(s, x))
    }

    /// Whether `x` belongs to the stratum as a point set: inside some closed
    /// member but not on the relative boundary.
    pub fn stratum_contains(&self, s: usize, x: &DVector<f64>) -> bool {
        let st = &self.strata[s];
        let tol = self.tol.on_complex;
        if !st
            .simplices
            .iter()
            .any(|&m| self.frames[m].contains_closed(x, tol))
        {
            return false;
        }
        !self.on_boundary_ridge(s, x)
    }

    fn on_boundary_ridge(&self, s: usize, x: &DVector<f64>) -> bool {
        let tol = self.tol.on_complex;
        self.strata[s].boundary_ridges.iter().any(|ridge| {
            let verts: Vec<DVector<f64>> = ridge.iter().map(|&v| self.points[v].clone()).collect();
            geom::in_closed_simplex(&verts, x, tol)
        })
    }

    /// The unique stratum containing `x`, if `x` is on the complex.
    pub fn stratum_of(&self, x: &DVector<f64>) -> Option<usize> {
        (0..self.strata.len()).find(|&s| self.stratum_contains(s, x))
    }

    /// Closest-point query against a stratum. When the closed-set minimizer
    /// lies in the open stratum the retraction data is usable; otherwise the
    /// affine-span projection of the nearest member is returned, flagged.
    pub fn closest_point(&self, s: usize, x: &DVector<f64>) -> Result<Foot> {
        if x.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: x.len(),
            });
        }
        let st = &self.strata[s];
        let mut best: Option<(DVector<f64>, f64, usize)> = None;
        for &m in &st.simplices {
            let (p, d) = geom::project_closed(&self.frames[m].vertices, x);
            if best.as_ref().is_none_or(|(_, bd, _)| d < *bd) {
                best = Some((p, d, m));
            }
        }
        let (point, dist, member) = best.expect("strata are nonempty");
        if self.stratum_contains(s, &point) {
            Ok(Foot {
                point,
                dist,
                inside: true,
                member,
            })
        } else {
            let (p, d) = self.frames[member].hull_project(x);
            Ok(Foot {
                point: p,
                dist: d,
                inside: false,
                member,
            })
        }
    }

    /// Distance from `x` to the closure of stratum `s`.
    pub fn closure_distance(&self, s: usize, x: &DVector<f64>) -> f64 {
        self.strata[s]
            .simplices
            .iter()
            .map(|&m| geom::project_closed(&self.frames[m].vertices, x).1)
            .fold(f64::INFINITY, f64::min)
    }

    /// Unit gradient of d(., S) at `x`: the direction from the retraction
    /// foot to `x`. Undefined on the stratum itself.
    pub fn distance_gradient(&self, s: usize, x: &DVector<f64>) -> Result<DVector<f64>> {
        let foot = self.closest_point(s, x)?;
        if !foot.inside {
            return Err(Error::OutsideTube {
                stratum: self.strata[s].id.clone(),
            });
        }
        if foot.dist <= self.tol.on_stratum {
            return Err(Error::GradientOnStratum { dist: foot.dist });
        }
        Ok((x - &foot.point) / foot.dist)
    }

    /// Tube membership: `d(x, S) < delta` with a usable retraction foot.
    pub fn tube_contains(&self, profile: &TubeProfile, x: &DVector<f64>) -> bool {
        match self.closest_point(profile.stratum, x) {
            Ok(foot) => foot.inside && foot.dist < profile.delta,
            Err(_) => false,
        }
    }

    /// Euclidean gap between the closures of two strata.
    pub fn stratum_gap(&self, a: usize, b: usize) -> f64 {
        let mut best = f64::INFINITY;
        for &ma in &self.strata[a].simplices {
            for &mb in &self.strata[b].simplices {
                let lower = geom::aabb_gap(&self.frames[ma].aabb, &self.frames[mb].aabb);
                if lower >= best {
                    continue;
                }
                best = best.min(geom::simplex_distance(
                    &self.frames[ma].vertices,
                    &self.frames[mb].vertices,
                ));
            }
        }
        best
    }

    /// Tangent space of the stratum along the given member simplex.
    pub fn tangent_at(&self, member: usize) -> Subspace {
        Subspace::from_orthonormal(self.frames[member].tangent.clone(), &self.tol)
            .expect("frames hold orthonormal bases")
    }
}

fn compute_diameter(points: &[DVector<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d = d.max((&points[i] - &points[j]).norm());
        }
    }
    d
}

/// All barycentric tuples with entries i/m summing to one.
pub(crate) fn barycentric_grid(dim: usize, m: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; dim + 1];
    fill_grid(dim + 1, m, 0, m, &mut current, &mut out);
    out
}

fn fill_grid(
    len: usize,
    m: usize,
    idx: usize,
    remaining: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<f64>>,
) {
    if idx == len - 1 {
        current[idx] = remaining;
        out.push(current.iter().map(|&c| c as f64 / m as f64).collect());
        return;
    }
    for c in 0..=remaining {
        current[idx] = c;
        fill_grid(len, m, idx + 1, remaining - c, current, out);
    }
}

/// Validates that a multi-simplex stratum is a manifold patch: each interior
/// ridge is carried by exactly two members with matching tangent planes.
/// Returns the boundary ridges (vertex-index sets carried by one member).
fn validate_stratum(
    st: &StratumDocument,
    simplices: &[Vec<usize>],
    frames: &[SimplexFrame],
    tol: &Tolerances,
) -> Result<Vec<Vec<usize>>> {
    if st.dim == 0 {
        return Ok(Vec::new());
    }
    let mut ridges: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for &m in &st.simplices {
        let verts = &simplices[m];
        for omit in 0..verts.len() {
            let mut face: Vec<usize> = verts
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != omit)
                .map(|(_, &v)| v)
                .collect();
            face.sort_unstable();
            ridges.entry(face).or_default().push(m);
        }
    }
    let mut boundary = Vec::new();
    for (face, members) in ridges {
        match members.len() {
            1 => boundary.push(face),
            2 => {
                let ta = Subspace::from_orthonormal(frames[members[0]].tangent.clone(), tol)
                    .expect("frame basis");
                let tb = Subspace::from_orthonormal(frames[members[1]].tangent.clone(), tol)
                    .expect("frame basis");
                let angle = ta.angle(&tb).expect("equal ambient dims");
                if angle > tol.ridge_tangent {
                    return Err(Error::StratumInvalid {
                        stratum: st.id.clone(),
                        reason: format!(
                            "tangent planes differ by {angle:.3e} across interior ridge {face:?}"
                        ),
                    });
                }
            }
            k => {
                return Err(Error::StratumInvalid {
                    stratum: st.id.clone(),
                    reason: format!("ridge {face:?} carried by {k} members"),
                });
            }
        }
    }
    Ok(boundary)
}

// ---------------------------------------------------------------------------
// tube profiles
// ---------------------------------------------------------------------------

/// A constant tube radius for one stratum. Constant profiles have derivative
/// zero, which kills the scale term in the bump chain rule and keeps the
/// certified gradient bound at `mu / d(x, S)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TubeProfile {
    pub stratum: usize,
    pub delta: f64,
}

impl TubeProfile {
    pub fn new(stratum: usize, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Schema(format!(
                "tube radius must lie in (0,1), got {delta}"
            )));
        }
        Ok(Self { stratum, delta })
    }
}

/// Why each tube radius was selected, for the certificate report.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileCertificate {
    pub stratum: String,
    pub delta: f64,
    /// Smallest positive closure gap to a same-dimension stratum, if any;
    /// 4*delta never exceeds it.
    pub same_dim_gap: Option<f64>,
    /// Same-dimension strata whose closures touch this one; their tube
    /// disjointness is certified on complex samples instead of by gap.
    pub zero_gap_partners: Vec<String>,
    pub halvings: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileSelection {
    pub profiles: Vec<TubeProfile>,
    pub certificates: Vec<ProfileCertificate>,
    pub sample_count: usize,
}

/// Selects constant tube radii: `delta_S <= mu`, at most a quarter of the
/// gap to every same-dimension stratum, then shrunk by halving until the
/// sampled certificates hold (tube disjointness on the complex, retraction
/// single-valuedness, and `d(x,S) <= d(x,Y)` for frontier strata `Y` of `S`
/// at sampled tube points).
pub fn choose_profiles(
    complex: &StratifiedComplex,
    mu: f64,
    spec: &crate::sample::SamplerSpec,
) -> Result<ProfileSelection> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::Schema(format!("mu must lie in (0,1), got {mu}")));
    }
    let strata = complex.strata();
    let kappa = strata.len();
    let mut deltas = vec![mu; kappa];
    let mut same_dim_gap: Vec<Option<f64>> = vec![None; kappa];
    let mut zero_gap: Vec<Vec<usize>> = vec![Vec::new(); kappa];
    for a in 0..kappa {
        for b in 0..kappa {
            if a == b || strata[a].dim != strata[b].dim {
                continue;
            }
            let gap = complex.stratum_gap(a, b);
            if gap > complex.tolerances().on_complex {
                deltas[a] = deltas[a].min(gap / 4.0);
                same_dim_gap[a] = Some(same_dim_gap[a].map_or(gap, |g: f64| g.min(gap)));
            } else if !zero_gap[a].contains(&b) {
                zero_gap[a].push(b);
            }
        }
    }

    let mut sampler = crate::sample::Sampler::new(complex, spec.seed);
    let samples: Vec<crate::sample::OnComplexSample> =
        (0..spec.samples).map(|_| sampler.on_complex()).collect();
    // closest-point data is radius-independent; cache it per (sample, stratum)
    let feet: Vec<Vec<Foot>> = samples
        .iter()
        .map(|s| {
            (0..kappa)
                .map(|st| complex.closest_point(st, &s.point).expect("dims match"))
                .collect()
        })
        .collect();

    let mut halvings = vec![0usize; kappa];
    let max_rounds = 40;
    let mut last_collision: Option<(usize, usize)> = None;
    for round in 0..=max_rounds {
        let mut shrink = vec![false; kappa];
        for (si, foot_row) in feet.iter().enumerate() {
            let x = &samples[si].point;
            let in_tube: Vec<usize> = (0..kappa)
                .filter(|&s| foot_row[s].inside && foot_row[s].dist < deltas[s])
                .collect();
            // tubes of same-dimension strata must not both contain a point
            // of the complex
            for w in 0..in_tube.len() {
                for v in w + 1..in_tube.len() {
                    let (a, b) = (in_tube[w], in_tube[v]);
                    if strata[a].dim == strata[b].dim {
                        let larger = if deltas[a] >= deltas[b] { a } else { b };
                        shrink[larger] = true;
                        last_collision = Some((a, b));
                    }
                }
            }
            // frontier ordering: inside the tube of S the distance to S must
            // not exceed the distance to any frontier stratum of S
            for &s in &in_tube {
                for y in complex.lower_frontier(s) {
                    let dy = complex.closure_distance(y, x);
                    if foot_row[s].dist > dy + complex.tolerances().inequality_slack {
                        shrink[s] = true;
                    }
                }
            }
        }
        // retraction single-valuedness probes in the tubes
        for s in 0..kappa {
            if strata[s].dim == complex.ambient_dim() {
                continue;
            }
            for _ in 0..16 {
                if let Some(probe) = sampler.tube_probe(s, deltas[s]) {
                    match complex.closest_point(s, &probe.point) {
                        Ok(foot) if foot.inside => {
                            if (&foot.point - &probe.foot).norm()
                                > 1e-6 * complex.diameter().max(1.0)
                            {
                                shrink[s] = true;
                            }
                        }
                        _ => shrink[s] = true,
                    }
                }
            }
        }
        if !shrink.iter().any(|&s| s) {
            break;
        }
        if round == max_rounds {
            let (a, b) = last_collision.unwrap_or((0, 0));
            return Err(Error::TubeCollision {
                a: strata[a].id.clone(),
                b: strata[b].id.clone(),
                gap: complex.stratum_gap(a, b),
            });
        }
        for s in 0..kappa {
            if shrink[s] {
                deltas[s] /= 2.0;
                halvings[s] += 1;
            }
        }
    }

    let profiles: Vec<TubeProfile> = (0..kappa)
        .map(|s| TubeProfile::new(s, deltas[s]))
        .collect::<Result<_>>()?;
    let certificates = (0..kappa)
        .map(|s| ProfileCertificate {
            stratum: strata[s].id.clone(),
            delta: deltas[s],
            same_dim_gap: same_dim_gap[s],
            zero_gap_partners: zero_gap[s].iter().map(|&b| strata[b].id.clone()).collect(),
            halvings: halvings[s],
        })
        .collect();
    Ok(ProfileSelection {
        profiles,
        certificates,
        sample_count: spec.samples,
    })
}

// ---------------------------------------------------------------------------
// (w)-condition measurement
// ---------------------------------------------------------------------------

/// Measured tangent-angle data for one frontier pair: for affine simplex
/// strata the tangent of the lower stratum is contained in the tangent of
/// the upper one, so the measured constant is zero up to rounding.
#[derive(Debug, Clone, Serialize)]
pub struct WPairReport {
    pub upper: String,
    pub lower: String,
    pub max_angle: f64,
    pub max_ratio: f64,
    pub samples: usize,
}

pub fn w_condition_report(
    complex: &StratifiedComplex,
    samples_per_pair: usize,
    seed: u64,
) -> Vec<WPairReport> {
    let mut sampler = crate::sample::Sampler::new(complex, seed);
    let mut out = Vec::new();
    for &(u, l) in complex.frontier() {
        let mut max_angle: f64 = 0.0;
        let mut max_ratio: f64 = 0.0;
        for _ in 0..samples_per_pair {
            let y = sampler.in_stratum(u);
            let foot = complex
                .closest_point(l, &y.point)
                .expect("dimensions match");
            let x_tangent = complex.tangent_at(foot.member);
            let y_tangent = complex.tangent_at(y.simplex);
            let angle = x_tangent.angle(&y_tangent).expect("equal ambient dims");
            max_angle = max_angle.max(angle);
            let dist = (&y.point - &foot.point).norm();
            if dist > 1e-12 {
                max_ratio = max_ratio.max(angle / dist);
            }
        }
        out.push(WPairReport {
            upper: complex.stratum(u).id.clone(),
            lower: complex.stratum(l).id.clone(),
            max_angle,
            max_ratio,
            samples: samples_per_pair,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sample::{Sampler, SamplerSpec};
    use crate::tol::DEFAULT;

    fn load(doc: &ComplexDocument) -> StratifiedComplex {
        StratifiedComplex::load(doc, DEFAULT).expect("fixture loads")
    }

    /// Unit segment on the x-axis of R^2 with vertex strata.
    fn flat_segment() -> StratifiedComplex {
        load(&ComplexDocument {
            ambient_dim: 2,
            points: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            simplices: vec![
                SimplexDocument { vertices: vec![0] },
                SimplexDocument { vertices: vec![1] },
                SimplexDocument {
                    vertices: vec![0, 1],
                },
            ],
            strata: vec![
                StratumDocument {
                    id: "a".into(),
                    dim: 0,
                    simplices: vec![0],
                },
                StratumDocument {
                    id: "b".into(),
                    dim: 0,
                    simplices: vec![1],
                },
                StratumDocument {
                    id: "seg".into(),
                    dim: 1,
                    simplices: vec![2],
                },
            ],
            frontier: vec![
                ("seg".to_string(), "a".to_string()),
                ("seg".to_string(), "b".to_string()),
            ],
        })
    }

    fn v(x: f64, y: f64) -> DVector<f64> {
        DVector::from_vec(vec![x, y])
    }

    #[test]
    fn segment_fixture_has_three_strata() {
        let c = load(&fixtures::segment());
        assert_eq!(c.strata().len(), 3);
        assert_eq!(c.frontier().len(), 2);
    }

    #[test]
    fn overlapping_segments_rejected() {
        let doc = ComplexDocument {
            ambient_dim: 1,
            points: vec![vec![0.0], vec![2.0], vec![1.0], vec![3.0]],
            simplices: vec![
                SimplexDocument {
                    vertices: vec![0, 1],
                },
                SimplexDocument {
                    vertices: vec![2, 3],
                },
            ],
            strata: vec![
                StratumDocument {
                    id: "s1".into(),
                    dim: 1,
                    simplices: vec![0],
                },
                StratumDocument {
                    id: "s2".into(),
                    dim: 1,
                    simplices: vec![1],
                },
            ],
            frontier: vec![],
        };
        let err = StratifiedComplex::load(&doc, DEFAULT);
        assert!(matches!(err, Err(Error::Disjointness { .. })), "{err:?}");
    }

    #[test]
    fn v_complex_valid_with_expected_frontier() {
        let c = load(&fixtures::v_complex());
        assert_eq!(c.strata().len(), 5);
        let apex = c.stratum_index("apex").unwrap();
        let arm_up = c.stratum_index("arm_up").unwrap();
        let arm_down = c.stratum_index("arm_down").unwrap();
        assert!(c.lower_frontier(arm_up).any(|l| l == apex));
        assert!(c.lower_frontier(arm_down).any(|l| l == apex));
        assert_eq!(c.lower_frontier(apex).count(), 0);
    }

    #[test]
    fn degenerate_simplex_rejected() {
        let doc = ComplexDocument {
            ambient_dim: 2,
            points: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 1e-12]],
            simplices: vec![SimplexDocument {
                vertices: vec![0, 1, 2],
            }],
            strata: vec![StratumDocument {
                id: "t".into(),
                dim: 2,
                simplices: vec![0],
            }],
            frontier: vec![],
        };
        assert!(matches!(
            StratifiedComplex::load(&doc, DEFAULT),
            Err(Error::DegenerateSimplex { .. })
        ));
    }

    #[test]
    fn missing_frontier_declaration_rejected() {
        let mut doc = fixtures::segment();
        doc.frontier.pop();
        assert!(matches!(
            StratifiedComplex::load(&doc, DEFAULT),
            Err(Error::Frontier { .. })
        ));
    }

    #[test]
    fn collinear_pair_may_merge_into_one_stratum() {
        let doc = ComplexDocument {
            ambient_dim: 1,
            points: vec![vec![0.0], vec![1.0], vec![2.0]],
            simplices: vec![
                SimplexDocument { vertices: vec![0] },
                SimplexDocument { vertices: vec![2] },
                SimplexDocument {
                    vertices: vec![0, 1],
                },
                SimplexDocument {
                    vertices: vec![1, 2],
                },
            ],
            strata: vec![
                StratumDocument {
                    id: "a".into(),
                    dim: 0,
                    simplices: vec![0],
                },
                StratumDocument {
                    id: "b".into(),
                    dim: 0,
                    simplices: vec![1],
                },
                StratumDocument {
                    id: "interior".into(),
                    dim: 1,
                    simplices: vec![2, 3],
                },
            ],
            frontier: vec![
                ("interior".to_string(), "a".to_string()),
                ("interior".to_string(), "b".to_string()),
            ],
        };
        let c = load(&doc);
        let s = c.stratum_index("interior").unwrap();
        // midpoint vertex is an interior ridge: the stratum contains it
        assert!(c.stratum_contains(s, &DVector::from_vec(vec![1.0])));
        assert!(!c.stratum_contains(s, &DVector::from_vec(vec![0.0])));
    }

    #[test]
    fn bent_stratum_rejected() {
        let doc = ComplexDocument {
            ambient_dim: 2,
            points: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.5]],
            simplices: vec![
                SimplexDocument { vertices: vec![0] },
                SimplexDocument { vertices: vec![2] },
                SimplexDocument {
                    vertices: vec![0, 1],
                },
                SimplexDocument {
                    vertices: vec![1, 2],
                },
            ],
            strata: vec![
                StratumDocument {
                    id: "a".into(),
                    dim: 0,
                    simplices: vec![0],
                },
                StratumDocument {
                    id: "b".into(),
                    dim: 0,
                    simplices: vec![1],
                },
                StratumDocument {
                    id: "bent".into(),
                    dim: 1,
                    simplices: vec![2, 3],
                },
            ],
            frontier: vec![
                ("bent".to_string(), "a".to_string()),
                ("bent".to_string(), "b".to_string()),
            ],
        };
        assert!(matches!(
            StratifiedComplex::load(&doc, DEFAULT),
            Err(Error::StratumInvalid { .. })
        ));
    }

    #[test]
    fn closest_point_on_stratum() {
        let c = flat_segment();
        let seg = c.stratum_index("seg").unwrap();
        let x = v(0.3, 0.0);
        let foot = c.closest_point(seg, &x).unwrap();
        assert!(foot.inside);
        assert!(foot.dist < 1e-12);
        assert!((foot.point - x).norm() < 1e-12);
    }

    #[test]
    fn closest_point_perpendicular_foot() {
        let c = flat_segment();
        let seg = c.stratum_index("seg").unwrap();
        let foot = c.closest_point(seg, &v(0.5, 0.3)).unwrap();
        assert!(foot.inside);
        assert!((foot.dist - 0.3).abs() < 1e-12);
        assert!((foot.point - v(0.5, 0.0)).norm() < 1e-12);
    }

    /// Brute-force oracle: minimum distance over a dense net of the closed
    /// stratum.
    fn net_oracle(c: &StratifiedComplex, s: usize, x: &DVector<f64>, n: usize) -> (DVector<f64>, f64) {
        let mut best: Option<(DVector<f64>, f64)> = None;
        for &m in &c.stratum(s).simplices {
            let frame = c.frame(m);
            for i in 0..=n {
                let t = i as f64 / n as f64;
                let p = frame.point_at(&[1.0 - t, t]);
                let d = (x - &p).norm();
                if best.as_ref().is_none_or(|(_, bd)| d < *bd) {
                    best = Some((p, d));
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn closest_point_outside_shadow() {
        let c = flat_segment();
        let seg = c.stratum_index("seg").unwrap();
        let x = v(1.4, 0.3);
        let foot = c.closest_point(seg, &x).unwrap();
        assert!(!foot.inside);
        // affine-span projection data is returned, flagged unusable
        assert!((foot.point.clone() - v(1.4, 0.0)).norm() < 1e-12);
        assert!((foot.dist - 0.3).abs() < 1e-12);
        // oracle: the true nearest point of the closed stratum is the vertex
        let (op, od) = net_oracle(&c, seg, &x, 10_000);
        assert!((op - v(1.0, 0.0)).norm() < 2e-4);
        assert!((od - 0.5f64).abs() < 1e-4);
    }

    #[test]
    fn distance_gradient_examples() {
        let c = flat_segment();
        let seg = c.stratum_index("seg").unwrap();
        let g = c.distance_gradient(seg, &v(0.5, 0.3)).unwrap();
        assert!((g - v(0.0, 1.0)).norm() < 1e-12);

        let a = c.stratum_index("a").unwrap();
        let x = v(-0.6, 0.8);
        let g = c.distance_gradient(a, &x).unwrap();
        assert!((g - v(-0.6, 0.8)).norm() < 1e-12);

        // undefined on the stratum
        assert!(matches!(
            c.distance_gradient(seg, &v(0.5, 0.0)),
            Err(Error::GradientOnStratum { .. })
        ));
    }

    #[test]
    fn distance_gradient_matches_finite_differences() {
        let c = load(&fixtures::v_complex());
        let mut sampler = Sampler::new(&c, 11);
        let step = 1e-6;
        let mut checked = 0;
        for s in 0..c.strata().len() {
            for _ in 0..20 {
                let Some(probe) = sampler.tube_probe_in(s, 0.3, 0.2, 0.8) else {
                    continue;
                };
                let g = match c.distance_gradient(s, &probe.point) {
                    Ok(g) => g,
                    Err(_) => continue,
                };
                let mut fd = DVector::zeros(2);
                let mut valid = true;
                for i in 0..2 {
                    let mut hi = probe.point.clone();
                    let mut lo = probe.point.clone();
                    hi[i] += step;
                    lo[i] -= step;
                    let (Ok(fh), Ok(fl)) = (c.closest_point(s, &hi), c.closest_point(s, &lo))
                    else {
                        valid = false;
                        break;
                    };
                    if !(fh.inside && fl.inside) {
                        valid = false;
                        break;
                    }
                    fd[i] = (fh.dist - fl.dist) / (2.0 * step);
                }
                if !valid {
                    continue;
                }
                assert!(
                    (g.clone() - fd.clone()).norm() < 1e-4 * g.norm().max(1.0),
                    "gradient {g:?} vs fd {fd:?}"
                );
                checked += 1;
            }
        }
        assert!(checked > 20, "too few valid probes: {checked}");
    }

    #[test]
    fn tube_membership() {
        let c = flat_segment();
        let seg = c.stratum_index("seg").unwrap();
        let profile = TubeProfile::new(seg, 0.25).unwrap();
        assert!(c.tube_contains(&profile, &v(0.5, 0.0)));
        // boundary is strict
        assert!(!c.tube_contains(&profile, &v(0.5, 0.25)));
        // beyond the open-simplex shadow, even though the affine span is near
        let x = v(1.4, 0.2);
        assert!(!c.tube_contains(&profile, &x));
        let (_, od) = net_oracle(&c, seg, &x, 10_000);
        assert!(od > profile.delta, "net oracle distance {od}");
    }

    #[test]
    fn profiles_on_segment() {
        let c = load(&fixtures::segment());
        let sel = choose_profiles(&c, 0.5, &SamplerSpec::new(500, 7)).unwrap();
        for cert in &sel.certificates {
            assert!(cert.delta <= 0.5 + 1e-12);
            if cert.stratum.starts_with('v') {
                // gap between the vertices is 2
                assert!(cert.delta <= 0.5);
                assert_eq!(cert.same_dim_gap, Some(2.0));
            }
        }
    }

    #[test]
    fn profiles_single_point_stratum() {
        let doc = ComplexDocument {
            ambient_dim: 2,
            points: vec![vec![0.25, -0.5]],
            simplices: vec![SimplexDocument { vertices: vec![0] }],
            strata: vec![StratumDocument {
                id: "p".into(),
                dim: 0,
                simplices: vec![0],
            }],
            frontier: vec![],
        };
        let c = load(&doc);
        let sel = choose_profiles(&c, 0.3, &SamplerSpec::new(100, 3)).unwrap();
        assert_eq!(sel.profiles[0].delta, 0.3);
    }

    #[test]
    fn profiles_v_complex_zero_dim_tubes_disjoint() {
        let c = load(&fixtures::v_complex());
        let sel = choose_profiles(&c, 0.2, &SamplerSpec::new(1000, 5)).unwrap();
        // pairwise gaps of the 0-strata certify disjointness: gap >= 4 delta
        for cert in &sel.certificates {
            if let Some(gap) = cert.same_dim_gap {
                assert!(4.0 * cert.delta <= gap + 1e-12, "{cert:?}");
            }
        }
        let apex = c.stratum_index("apex").unwrap();
        let sel_gap = sel.certificates[apex].same_dim_gap.unwrap();
        assert!((sel_gap - 2.0f64.sqrt()).abs() < 1e-12);
        // arms touch at the apex: certified by sampling, not by gap
        let arm = c.stratum_index("arm_up").unwrap();
        assert_eq!(sel.certificates[arm].zero_gap_partners, vec!["arm_down"]);
    }

    #[test]
    fn w_condition_measures_zero_for_affine_strata() {
        let c = load(&fixtures::v_complex());
        let report = w_condition_report(&c, 50, 9);
        for pair in report {
            assert!(pair.max_angle < 1e-10, "{pair:?}");
        }
    }
}
