//! Geometric zeros of the two-photon path function.
//!
//! Where `Ψ` reduces to a real function (free space, perfect mirror) its zero
//! set is traced as polylines by marching squares, with every vertex refined
//! by bisection along its grid edge; tangential zeros that never change sign
//! are found by local minimization from grid minima. For complex `Ψ`
//! (finite-permittivity substrates, spheres) zeros are generically isolated
//! and the structure is described by sub-threshold masks of `|Ψ|²` and
//! refined local minima.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::correlation::Scene;
use crate::error::{Error, Result};
use crate::greens::{image_sum, planar_reflection};
use crate::model::{DimerConfig, Environment, GridSpec, K0};

/// Target residual `|Ψ|` of refined vertices.
pub const VERTEX_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    Interference,
    TrivialQuenching,
    EpsIndependent,
    /// A refined local minimum of `|Ψ|²` that is not an exact zero.
    LocalMinimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Vertex {
    pub theta: f64,
    pub theta_p: f64,
    /// `|Ψ|` at the vertex.
    pub residual: f64,
    /// `| |ψ₁(θ)ψ₂(θ′)| - |ψ₁(θ′)ψ₂(θ)| |`.
    pub amplitude_mismatch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Feature {
    pub kind: FeatureKind,
    pub vertices: Vec<Vertex>,
    pub closed: bool,
    /// The feature is its own image under `θ ↔ θ′`.
    pub self_symmetric: bool,
    /// The image under `θ ↔ θ′` is a distinct feature that was folded into this one.
    pub has_partner: bool,
}

impl Feature {
    pub fn max_residual(&self) -> f64 {
        self.vertices.iter().map(|v| v.residual).fold(0.0, f64::max)
    }

    pub fn is_point(&self) -> bool {
        self.vertices.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroLocus {
    pub grid: GridSpec,
    pub features: Vec<Feature>,
}

impl ZeroLocus {
    /// Number of distinct interference branches, counting a feature and its
    /// mirror image once.
    pub fn branch_count(&self) -> usize {
        self.features.iter().filter(|f| f.kind == FeatureKind::Interference).count()
    }

    /// All vertices including the mirror images of folded partners.
    pub fn expanded_vertices(&self) -> Vec<Vertex> {
        let mut out = Vec::new();
        for f in &self.features {
            out.extend(f.vertices.iter().copied());
            if f.has_partner {
                out.extend(f.vertices.iter().map(|v| Vertex { theta: v.theta_p, theta_p: v.theta, ..*v }));
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("locus serializes")
    }
}

/// Real function whose sign changes trace `Ψ = 0`, when one exists.
pub fn real_reduction(scene: &Scene) -> Option<Box<dyn Fn(f64, f64) -> f64 + Send + Sync>> {
    let (z1, z2) = (scene.dimer.z1, scene.dimer.z2);
    match scene.environment {
        Environment::FreeSpace => {
            let z12 = z2 - z1;
            Some(Box::new(move |t: f64, tp: f64| (0.5 * K0 * z12 * (t.cos() - tp.cos())).cos()))
        }
        Environment::PerfectMirror if scene.dimer.is_vertical() => Some(Box::new(move |t: f64, tp: f64| {
            let (c, cp) = (t.cos(), tp.cos());
            (K0 * z1 * c).cos() * (K0 * z2 * cp).cos() + (K0 * z1 * cp).cos() * (K0 * z2 * c).cos()
        })),
        _ => None,
    }
}

fn vertex(scene: &Scene, theta: f64, theta_p: f64) -> Result<Vertex> {
    let a = scene.psi(theta)?;
    let b = scene.psi(theta_p)?;
    let psi = a[0] * b[1] + b[0] * a[1];
    Ok(Vertex {
        theta,
        theta_p,
        residual: psi.norm(),
        amplitude_mismatch: ((a[0] * b[1]).norm() - (b[0] * a[1]).norm()).abs(),
    })
}

/// Bisection for the root of `f` between `lo` (value `flo`) and `hi`.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    if f(hi).abs() < flo.abs() {
        hi
    } else {
        lo
    }
}

/// Derivative-free compass search for a local minimum of `f` inside the box.
pub fn compass_minimize<F: Fn(f64, f64) -> f64>(
    f: F,
    start: (f64, f64),
    step: f64,
    bounds: (f64, f64),
    tol: f64,
) -> (f64, f64, f64) {
    let clamp = |v: f64| v.clamp(bounds.0, bounds.1);
    let (mut x, mut y) = start;
    let mut fx = f(x, y);
    let mut h = step;
    let mut iterations = 0;
    while h > tol && iterations < 100_000 {
        iterations += 1;
        let mut improved = false;
        for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
            let (nx, ny) = (clamp(x + dx * h), clamp(y + dy * h));
            let v = f(nx, ny);
            if v < fx {
                x = nx;
                y = ny;
                fx = v;
                improved = true;
                break;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (x, y, fx)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Edge {
    /// Between nodes `(i, j)` and `(i, j + 1)`.
    H(usize, usize),
    /// Between nodes `(i, j)` and `(i + 1, j)`.
    V(usize, usize),
}

fn sample<F: Fn(f64, f64) -> f64 + Sync>(f: &F, angles: &[f64]) -> Vec<f64> {
    let n = angles.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| angles.iter().map(|&tp| f(angles[i], tp)).collect())
        .collect();
    rows.into_iter().flatten().collect()
}

/// Traces the sign-change set of `f` on the grid. Returns polylines as
/// lists of `(θ, θ′)` points and whether each is closed.
fn marching_squares<F: Fn(f64, f64) -> f64 + Sync>(f: &F, grid: &GridSpec) -> Vec<(Vec<(f64, f64)>, bool)> {
    let angles = grid.angles();
    let n = angles.len();
    let vals = sample(f, &angles);
    let pos = |i: usize, j: usize| vals[i * n + j] >= 0.0;

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let (a, b, c, d) = (pos(i, j), pos(i, j + 1), pos(i + 1, j + 1), pos(i + 1, j));
            let top = Edge::H(i, j);
            let right = Edge::V(i, j + 1);
            let bottom = Edge::H(i + 1, j);
            let left = Edge::V(i, j);
            let mut crossed = Vec::with_capacity(4);
            if a != b {
                crossed.push(top);
            }
            if b != c {
                crossed.push(right);
            }
            if c != d {
                crossed.push(bottom);
            }
            if d != a {
                crossed.push(left);
            }
            match crossed.len() {
                2 => segments.push((crossed[0], crossed[1])),
                4 => {
                    let centre = f(0.5 * (angles[i] + angles[i + 1]), 0.5 * (angles[j] + angles[j + 1])) >= 0.0;
                    if centre == a {
                        segments.push((top, right));
                        segments.push((bottom, left));
                    } else {
                        segments.push((left, top));
                        segments.push((right, bottom));
                    }
                }
                _ => {}
            }
        }
    }

    let locate = |e: Edge| -> (f64, f64) {
        match e {
            Edge::H(i, j) => {
                let t = angles[i];
                let tp = bisect(|x| f(t, x), angles[j], angles[j + 1]);
                (t, tp)
            }
            Edge::V(i, j) => {
                let tp = angles[j];
                let t = bisect(|x| f(x, tp), angles[i], angles[i + 1]);
                (t, tp)
            }
        }
    };

    let mut adjacency: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(*a).or_default().push(k);
        adjacency.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    let walk = |start_edge: Edge, first: usize, used: &mut Vec<bool>| -> (Vec<Edge>, bool) {
        let mut chain = vec![start_edge];
        let mut seg = first;
        let mut at = start_edge;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == at { b } else { a };
            chain.push(next);
            if next == start_edge {
                return (chain, true);
            }
            at = next;
            match adjacency[&next].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => return (chain, false),
            }
        }
    };
    let mut ends: Vec<Edge> = adjacency.iter().filter(|(_, v)| v.len() == 1).map(|(e, _)| *e).collect();
    ends.sort_by_key(edge_order);
    for e in ends {
        let s = adjacency[&e][0];
        if !used[s] {
            let (chain, closed) = walk(e, s, &mut used);
            lines.push((chain, closed));
        }
    }
    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.sort_by_key(|&k| edge_order(&segments[k].0));
    for k in order {
        if !used[k] {
            let (chain, closed) = walk(segments[k].0, k, &mut used);
            lines.push((chain, closed));
        }
    }
    lines
        .into_iter()
        .map(|(chain, closed)| {
            let mut pts: Vec<(f64, f64)> = chain.iter().map(|&e| locate(e)).collect();
            if closed {
                pts.pop();
            }
            (pts, closed)
        })
        .collect()
}

fn edge_order(e: &Edge) -> (usize, usize, u8) {
    match *e {
        Edge::H(i, j) => (i, j, 0),
        Edge::V(i, j) => (i, j, 1),
    }
}

/// Grid nodes that are local minima of `|f|` without a sign change around
/// them, refined by compass search; kept when the refined `|f|` is below `tol`.
fn tangential_zeros<F: Fn(f64, f64) -> f64 + Sync>(f: &F, grid: &GridSpec, tol: f64) -> Vec<(f64, f64)> {
    let angles = grid.angles();
    let n = angles.len();
    let vals = sample(f, &angles);
    let peak = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut found: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = vals[i * n + j];
            if v.abs() > 1e-2 * peak {
                continue;
            }
            let mut is_min = true;
            let mut sign_change = false;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= n as i64 || b >= n as i64 {
                        continue;
                    }
                    let w = vals[a as usize * n + b as usize];
                    if w.abs() < v.abs() {
                        is_min = false;
                    }
                    if (w >= 0.0) != (v >= 0.0) {
                        sign_change = true;
                    }
                }
            }
            if !is_min || sign_change {
                continue;
            }
            let (x, y, r) = compass_minimize(
                |a, b| f(a, b).abs(),
                (angles[i], angles[j]),
                grid.step(),
                (grid.theta_min, grid.theta_max),
                1e-14,
            );
            if r < tol && !found.iter().any(|p| (p.0 - x).abs() < 1e-6 && (p.1 - y).abs() < 1e-6) {
                found.push((x, y));
            }
        }
    }
    found
}

fn signature(points: &[(f64, f64)], swap: bool) -> Vec<(i64, i64)> {
    let mut s: Vec<(i64, i64)> = points
        .iter()
        .map(|&(a, b)| {
            let (x, y) = if swap { (b, a) } else { (a, b) };
            ((x * 1e7).round() as i64, (y * 1e7).round() as i64)
        })
        .collect();
    s.sort_unstable();
    s.dedup();
    s
}

/// Folds mirror-image pairs into one feature and orders features
/// lexicographically by their first vertex.
fn fold_symmetric(mut features: Vec<Feature>) -> Vec<Feature> {
    let coords = |f: &Feature| f.vertices.iter().map(|v| (v.theta, v.theta_p)).collect::<Vec<_>>();
    for f in &mut features {
        let c = coords(f);
        f.self_symmetric = signature(&c, false) == signature(&c, true);
        if !f.closed && f.vertices.len() > 1 {
            let (a, b) = (f.vertices[0], *f.vertices.last().unwrap());
            if (b.theta, b.theta_p) < (a.theta, a.theta_p) {
                f.vertices.reverse();
            }
        } else if f.closed {
            let k = (0..f.vertices.len())
                .min_by(|&x, &y| {
                    let (p, q) = (f.vertices[x], f.vertices[y]);
                    (p.theta, p.theta_p).partial_cmp(&(q.theta, q.theta_p)).unwrap()
                })
                .unwrap_or(0);
            f.vertices.rotate_left(k);
        }
    }
    let sigs: Vec<_> = features.iter().map(|f| signature(&coords(f), false)).collect();
    let mirrored: Vec<_> = features.iter().map(|f| signature(&coords(f), true)).collect();
    let mut drop = vec![false; features.len()];
    for a in 0..features.len() {
        if drop[a] || features[a].self_symmetric {
            continue;
        }
        for b in a + 1..features.len() {
            if !drop[b] && features[b].kind == features[a].kind && mirrored[a] == sigs[b] {
                let first_a = (features[a].vertices[0].theta, features[a].vertices[0].theta_p);
                let first_b = (features[b].vertices[0].theta, features[b].vertices[0].theta_p);
                let (keep, gone) = if first_a <= first_b { (a, b) } else { (b, a) };
                features[keep].has_partner = true;
                drop[gone] = true;
                break;
            }
        }
    }
    let mut out: Vec<Feature> = features.into_iter().zip(drop).filter(|(_, d)| !d).map(|(f, _)| f).collect();
    out.sort_by(|x, y| {
        let (p, q) = (x.vertices[0], y.vertices[0]);
        (p.theta, p.theta_p).partial_cmp(&(q.theta, q.theta_p)).unwrap()
    });
    out
}

/// Extracts the zero set of `Ψ` on `grid`.
pub fn zero_locus(scene: &Scene, grid: &GridSpec) -> Result<ZeroLocus> {
    grid.validate(&scene.environment)?;
    if !scene.is_polarization_independent() {
        return Err(Error::Unsupported("zero extraction needs a scalar path function".into()));
    }
    let mut features = Vec::new();
    match real_reduction(scene) {
        Some(f) => {
            for (pts, closed) in marching_squares(&f, grid) {
                let vertices = pts.iter().map(|&(t, tp)| vertex(scene, t, tp)).collect::<Result<Vec<_>>>()?;
                features.push(Feature {
                    kind: FeatureKind::Interference,
                    vertices,
                    closed,
                    self_symmetric: false,
                    has_partner: false,
                });
            }
            for (t, tp) in tangential_zeros(&f, grid, 1e-12) {
                let v = vertex(scene, t, tp)?;
                if v.residual < VERTEX_TOL {
                    features.push(Feature {
                        kind: FeatureKind::Interference,
                        vertices: vec![v],
                        closed: false,
                        self_symmetric: false,
                        has_partner: false,
                    });
                }
            }
            if scene.environment == Environment::PerfectMirror {
                for z in trivial_zeros(&scene.dimer, &scene.environment)? {
                    if z.theta >= grid.theta_min && z.theta <= grid.theta_max {
                        features.push(Feature {
                            kind: FeatureKind::TrivialQuenching,
                            vertices: vec![vertex(scene, z.theta, z.theta)?],
                            closed: false,
                            self_symmetric: false,
                            has_partner: false,
                        });
                    }
                }
            }
        }
        None => {
            for v in refined_minima(scene, grid, 1e-3)? {
                let kind = if v.residual < VERTEX_TOL { FeatureKind::Interference } else { FeatureKind::LocalMinimum };
                features.push(Feature { kind, vertices: vec![v], closed: false, self_symmetric: false, has_partner: false });
            }
        }
    }
    Ok(ZeroLocus { grid: *grid, features: fold_symmetric(features) })
}

/// Strict local minima of `|Ψ|²` on the grid below `rel` times the map
/// maximum, each refined by compass search.
pub fn refined_minima(scene: &Scene, grid: &GridSpec, rel: f64) -> Result<Vec<Vertex>> {
    let angles = grid.angles();
    let n = angles.len();
    let psi = angles.iter().map(|&t| scene.psi(t)).collect::<Result<Vec<_>>>()?;
    let field: Vec<f64> = (0..n * n)
        .map(|k| {
            let (a, b) = (&psi[k / n], &psi[k % n]);
            (a[0] * b[1] + b[0] * a[1]).norm_sqr()
        })
        .collect();
    let peak = field.iter().cloned().fold(0.0, f64::max);
    let eval = |t: f64, tp: f64| scene.two_photon(t, tp).map(|z| z.norm_sqr()).unwrap_or(f64::INFINITY);
    let mut out: Vec<Vertex> = Vec::new();
    for i in 0..n {
        for j in i..n {
            let v = field[i * n + j];
            if v > rel * peak {
                continue;
            }
            let mut is_min = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= n as i64 || b >= n as i64 {
                        continue;
                    }
                    if field[a as usize * n + b as usize] < v {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if !is_min {
                continue;
            }
            let (x, y, _) =
                compass_minimize(eval, (angles[i], angles[j]), grid.step(), (grid.theta_min, grid.theta_max), 1e-13);
            if !out.iter().any(|p| (p.theta - x).abs() < 1e-6 && (p.theta_p - y).abs() < 1e-6) {
                out.push(vertex(scene, x, y)?);
            }
        }
    }
    Ok(out)
}

/// Integer pair `(n, m)` with `cos θ = n/(2z₁₂)`, `cos θ′ = m/(2z₁₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsCandidate {
    pub n: u32,
    pub m: u32,
    pub theta: f64,
    pub theta_p: f64,
    /// Largest modulus among the four grouped terms of `Ψ`.
    pub max_group_term: f64,
    /// Largest `|Ψ|²` over the check permittivities.
    pub max_psi2: f64,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum EpsIndependentZeros {
    /// The geometry has no permittivity-independent zeros.
    NotAdmitted,
    Candidates { candidates: Vec<EpsCandidate> },
}

impl EpsIndependentZeros {
    pub fn verified(&self) -> Vec<EpsCandidate> {
        match self {
            EpsIndependentZeros::NotAdmitted => Vec::new(),
            EpsIndependentZeros::Candidates { candidates } => {
                candidates.iter().filter(|c| c.verified).copied().collect()
            }
        }
    }
}

/// The four grouped terms of the substrate `Ψ`: direct-direct,
/// direct-image (two orderings) and image-image, each stripped of its
/// Fresnel factor.
pub fn grouped_terms(z1: f64, z2: f64, theta: f64, theta_p: f64) -> [Complex64; 4] {
    let (c, cp) = (theta.cos(), theta_p.cos());
    let e = |x: f64| Complex64::from_polar(1.0, x);
    let (a1, a2, b1, b2) = (K0 * z1 * c, K0 * z2 * c, K0 * z1 * cp, K0 * z2 * cp);
    [
        e(-(a1 + b2)) + e(-(b1 + a2)),
        e(-a1 + b2) + e(b1 - a2),
        e(a1 - b2) + e(-b1 + a2),
        e(a1 + b2) + e(b1 + a2),
    ]
}

/// Permittivities used to confirm that a candidate is independent of the substrate.
pub fn check_permittivities() -> Vec<Environment> {
    vec![
        Environment::PerfectMirror,
        Environment::Substrate { epsilon: Complex64::new(2.13, 0.0) },
        Environment::Substrate { epsilon: Complex64::new(-5.0, 0.1) },
        Environment::Substrate { epsilon: Complex64::new(-3.0, 0.01) },
        Environment::FreeSpace,
    ]
}

/// `|Ψ|²` of vertical dipoles at `z1`, `z2` over a planar environment.
pub fn planar_psi2(env: &Environment, z1: f64, z2: f64, theta: f64, theta_p: f64) -> Result<f64> {
    let (r, _) = planar_reflection(env, theta)?;
    let (rq, _) = planar_reflection(env, theta_p)?;
    let a = [image_sum(theta, z1, r.value), image_sum(theta, z2, r.value)];
    let b = [image_sum(theta_p, z1, rq.value), image_sum(theta_p, z2, rq.value)];
    Ok((a[0] * b[1] + b[0] * a[1]).norm_sqr())
}

/// Candidate permittivity-independent zeros for emitters at `z1 < z2`,
/// each checked term by term.
pub fn eps_independent_zeros(env: &Environment, z1: f64, z2: f64) -> Result<EpsIndependentZeros> {
    if matches!(env, Environment::Sphere { .. }) {
        return Ok(EpsIndependentZeros::NotAdmitted);
    }
    let z12 = z2 - z1;
    if !(z12 > 0.0) {
        return Err(Error::Domain(format!("need z2 > z1, got z1 = {z1}, z2 = {z2}")));
    }
    let upper = 2.0 * z12;
    let mut candidates = Vec::new();
    let mut n = 1u32;
    while (n as f64) < upper {
        let mut m = 1u32;
        while (m as f64) < upper {
            if n != m {
                let theta = (n as f64 / upper).acos();
                let theta_p = (m as f64 / upper).acos();
                let max_group_term = grouped_terms(z1, z2, theta, theta_p).iter().map(|t| t.norm()).fold(0.0, f64::max);
                let mut max_psi2: f64 = 0.0;
                for e in check_permittivities() {
                    max_psi2 = max_psi2.max(planar_psi2(&e, z1, z2, theta, theta_p)?);
                }
                candidates.push(EpsCandidate {
                    n,
                    m,
                    theta,
                    theta_p,
                    max_group_term,
                    max_psi2,
                    verified: max_group_term < 1e-12 && max_psi2 < 1e-12,
                });
            }
            m += 1;
        }
        n += 1;
    }
    Ok(EpsIndependentZeros::Candidates { candidates })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrivialZero {
    /// 1 or 2.
    pub emitter: u8,
    pub order: u32,
    pub theta: f64,
}

/// Directions in which one emitter above a perfect mirror is fully quenched,
/// `cos θ = (2n+1)/(4 z_i)`.
pub fn trivial_zeros(dimer: &DimerConfig, env: &Environment) -> Result<Vec<TrivialZero>> {
    if *env != Environment::PerfectMirror {
        return Err(Error::Unsupported("trivial quenching zeros are defined for the perfect mirror".into()));
    }
    if !dimer.is_vertical() {
        return Err(Error::Unsupported("trivial zeros assume vertical dipoles".into()));
    }
    let mut out = Vec::new();
    for (idx, z) in [(1u8, dimer.z1), (2u8, dimer.z2)] {
        if z <= 0.0 {
            continue;
        }
        let mut n = 0u32;
        loop {
            let c = (2 * n + 1) as f64 / (4.0 * z);
            if c > 1.0 {
                break;
            }
            out.push(TrivialZero { emitter: idx, order: n, theta: c.acos() });
            n += 1;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub pixels: usize,
    /// Fraction of the grid covered.
    pub area: f64,
    pub min_value: f64,
    pub argmin: (usize, usize),
    /// Touches `θ = θ_max` or `θ′ = θ_max` (the grazing edge for substrates).
    pub touches_far_edge: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimaMask {
    pub grid: GridSpec,
    pub threshold: f64,
    pub mask: Vec<bool>,
    /// Four-connected components, largest first (ties by position).
    pub components: Vec<Component>,
    labels: Vec<u32>,
}

impl MinimaMask {
    /// Marks grid points with `field < threshold`, scaled by the field maximum
    /// when `relative` is set.
    pub fn new(field: &[f64], grid: &GridSpec, threshold: f64, relative: bool) -> Self {
        let n = grid.n;
        assert_eq!(field.len(), n * n, "field does not match grid");
        let limit = if relative { threshold * field.iter().cloned().fold(0.0, f64::max) } else { threshold };
        let mask: Vec<bool> = field.iter().map(|&v| v < limit).collect();
        let mut labels = vec![0u32; n * n];
        let mut comps = Vec::new();
        let mut stack = Vec::new();
        for start in 0..n * n {
            if !mask[start] || labels[start] != 0 {
                continue;
            }
            let id = comps.len() as u32 + 1;
            labels[start] = id;
            stack.push(start);
            let mut c = Component { pixels: 0, area: 0.0, min_value: f64::INFINITY, argmin: (0, 0), touches_far_edge: false };
            while let Some(k) = stack.pop() {
                let (i, j) = (k / n, k % n);
                c.pixels += 1;
                if field[k] < c.min_value {
                    c.min_value = field[k];
                    c.argmin = (i, j);
                }
                if i == n - 1 || j == n - 1 {
                    c.touches_far_edge = true;
                }
                let mut push = |q: usize| {
                    if mask[q] && labels[q] == 0 {
                        labels[q] = id;
                        stack.push(q);
                    }
                };
                if i > 0 {
                    push(k - n);
                }
                if i + 1 < n {
                    push(k + n);
                }
                if j > 0 {
                    push(k - 1);
                }
                if j + 1 < n {
                    push(k + 1);
                }
            }
            c.area = c.pixels as f64 / (n * n) as f64;
            comps.push(c);
        }
        MinimaMask { grid: *grid, threshold: limit, mask, components: comps, labels }
    }

    pub fn area(&self) -> f64 {
        self.mask.iter().filter(|&&m| m).count() as f64 / self.mask.len() as f64
    }

    pub fn at(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.grid.n + j]
    }

    /// Index into `components` of the component containing the node nearest `(θ, θ′)`.
    pub fn component_at(&self, theta: f64, theta_p: f64) -> Option<usize> {
        let (i, j) = (self.grid.nearest(theta), self.grid.nearest(theta_p));
        match self.labels[i * self.grid.n + j] {
            0 => None,
            id => Some(id as usize - 1),
        }
    }

    /// Fraction of the grid where exactly one of the two masks is set.
    pub fn symmetric_difference_area(&self, other: &MinimaMask) -> f64 {
        assert_eq!(self.mask.len(), other.mask.len());
        self.mask.iter().zip(&other.mask).filter(|(a, b)| a != b).count() as f64 / self.mask.len() as f64
    }

    /// Pointwise intersection of several masks on the same grid.
    pub fn intersection(masks: &[&MinimaMask]) -> Vec<bool> {
        let len = masks[0].mask.len();
        (0..len).map(|k| masks.iter().all(|m| m.mask[k])).collect()
    }

    pub fn to_csv(&self) -> String {
        let n = self.grid.n;
        let mut out = String::with_capacity(n * n * 2);
        for i in 0..n {
            for j in 0..n {
                if j > 0 {
                    out.push(',');
                }
                out.push(if self.mask[i * n + j] { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

/// Sub-threshold mask of `|Ψ|²` for `scene`.
pub fn minima_map(scene: &Scene, grid: &GridSpec, threshold: f64, relative: bool) -> Result<MinimaMask> {
    let m = crate::map::map_sweep(scene, grid, crate::map::Payload::Psi2, None)?;
    Ok(MinimaMask::new(&m.real_values(), grid, threshold, relative))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn free(z12: f64) -> Scene {
        Scene::new(Environment::FreeSpace, DimerConfig::axial(0.0, z12)).unwrap()
    }

    fn mirror(z1: f64, z2: f64) -> Scene {
        Scene::new(Environment::PerfectMirror, DimerConfig::axial(z1, z2)).unwrap()
    }

    fn full() -> GridSpec {
        GridSpec::new(0.0, PI, 361)
    }

    fn half(n: usize) -> GridSpec {
        GridSpec::new(0.0, FRAC_PI_2, n)
    }

    #[test]
    fn free_space_phase_condition_on_every_vertex() {
        for z12 in [0.5, 1.0, 1.5] {
            let locus = zero_locus(&free(z12), &full()).unwrap();
            assert!(!locus.is_empty());
            for v in locus.expanded_vertices() {
                let phase = K0 * z12 * (v.theta.cos() - v.theta_p.cos()).abs();
                let k = ((phase / PI - 1.0) / 2.0).round();
                assert!((phase - (2.0 * k + 1.0) * PI).abs() < 1e-8, "z12 {z12}: phase {phase}");
                assert!(v.residual < VERTEX_TOL);
                assert!(v.amplitude_mismatch < 1e-8);
            }
        }
    }

    #[test]
    fn quarter_wave_collapses_to_corners() {
        let locus = zero_locus(&free(0.25), &full()).unwrap();
        let pts: Vec<_> = locus.expanded_vertices().iter().map(|v| (v.theta, v.theta_p)).collect();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().any(|p| p.0.abs() < 1e-6 && (p.1 - PI).abs() < 1e-6));
        assert!(pts.iter().any(|p| (p.0 - PI).abs() < 1e-6 && p.1.abs() < 1e-6));
    }

    #[test]
    fn short_free_dimer_has_no_zeros() {
        assert!(zero_locus(&free(0.2), &full()).unwrap().is_empty());
    }

    #[test]
    fn mirror_fig2_has_three_branches() {
        let locus = zero_locus(&mirror(0.6, 0.8), &half(361)).unwrap();
        assert_eq!(locus.branch_count(), 3);
        for f in &locus.features {
            assert!(f.max_residual() < VERTEX_TOL);
        }
    }

    #[test]
    fn mirror_zeros_without_minimum_separation() {
        assert!(zero_locus(&mirror(0.3, 0.5), &half(181)).unwrap().branch_count() > 0);
        let low = zero_locus(&mirror(0.1, 0.2), &half(181)).unwrap();
        assert!(low.is_empty());
    }

    #[test]
    fn branch_count_grows_with_height() {
        let mut last = 0;
        for z2 in [0.8, 0.9, 1.0, 1.1, 1.25, 1.4, 1.55, 1.7] {
            let b = zero_locus(&mirror(0.6, z2), &half(361)).unwrap().branch_count();
            assert!(b >= last, "z2 = {z2}: {b} < {last}");
            last = b;
        }
    }

    #[test]
    fn fig3_eps_independent_points() {
        let z = eps_independent_zeros(&Environment::PerfectMirror, 0.6, 1.7).unwrap();
        let v = z.verified();
        assert_eq!(v.len(), 2);
        let deg: Vec<_> = v.iter().map(|c| (c.theta.to_degrees(), c.theta_p.to_degrees())).collect();
        assert_relative_eq!(deg[0].0, 62.96, epsilon = 0.01);
        assert_relative_eq!(deg[0].1, 24.62, epsilon = 0.01);
        assert_relative_eq!(deg[1].0, 24.62, epsilon = 0.01);
    }

    #[test]
    fn even_pairs_fail_verification() {
        let z = eps_independent_zeros(&Environment::PerfectMirror, 0.0, 1.6).unwrap();
        let EpsIndependentZeros::Candidates { candidates } = z else { panic!() };
        for c in &candidates {
            assert_eq!(c.verified, (c.n + c.m) % 2 == 1, "{c:?}");
        }
        assert!(candidates.iter().any(|c| (c.n, c.m) == (1, 3) && !c.verified));
    }

    #[test]
    fn no_eps_independent_zeros_below_one_wavelength() {
        for z12 in [0.3, 0.99, 1.0] {
            let z = eps_independent_zeros(&Environment::PerfectMirror, 0.2, 0.2 + z12).unwrap();
            assert!(matches!(z, EpsIndependentZeros::Candidates { ref candidates } if candidates.is_empty()));
        }
        let sphere = Environment::Sphere { epsilon: Complex64::new(2.0, 0.0), radius: 0.4, offset: 0.7 };
        assert_eq!(eps_independent_zeros(&sphere, 0.7, -0.7).unwrap(), EpsIndependentZeros::NotAdmitted);
    }

    #[test]
    fn trivial_zero_angles() {
        let z = trivial_zeros(&DimerConfig::axial(0.2, 0.8), &Environment::PerfectMirror).unwrap();
        let cos: Vec<_> = z.iter().map(|t| (t.emitter, t.theta.cos())).collect();
        assert_eq!(cos.len(), 2);
        assert_relative_eq!(cos[0].1, 0.3125, epsilon = 1e-15);
        assert_relative_eq!(cos[1].1, 0.9375, epsilon = 1e-15);
        assert!(cos.iter().all(|c| c.0 == 2));
        let mut last = 0;
        for k in 0..=90 {
            let z2 = 0.8 + 0.01 * k as f64;
            let n = trivial_zeros(&DimerConfig::axial(0.6, z2), &Environment::PerfectMirror).unwrap().len();
            assert!(n >= last);
            last = n;
        }
    }

    #[test]
    fn mask_contains_locus_and_shrinks() {
        let s = mirror(0.6, 0.8);
        let g = half(181);
        let m = minima_map(&s, &g, 1e-2, false).unwrap();
        let tight = minima_map(&s, &g, 1e-4, false).unwrap();
        assert!(tight.mask.iter().zip(&m.mask).all(|(t, l)| !t || *l));
        let locus = zero_locus(&s, &g).unwrap();
        for v in locus.expanded_vertices() {
            // The nearest node to an exact zero lies within half a cell, where |Ψ|² is small.
            let (i, j) = (g.nearest(v.theta), g.nearest(v.theta_p));
            let val = s.two_photon(g.angle(i), g.angle(j)).unwrap().norm_sqr();
            assert!(val < 1e-2 || !m.at(i, j));
        }
        assert!(m.area() > tight.area());
    }

    #[test]
    fn components_are_four_connected() {
        let g = GridSpec::new(0.0, 1.0, 4);
        #[rustfmt::skip]
        let field = [
            0.0, 1.0, 1.0, 1.0,
            1.0, 0.0, 1.0, 1.0,
            1.0, 1.0, 1.0, 0.0,
            1.0, 1.0, 0.0, 0.0,
        ];
        let m = MinimaMask::new(&field, &g, 0.5, false);
        assert_eq!(m.components.len(), 3);
        assert_eq!(m.components.iter().filter(|c| c.touches_far_edge).count(), 1);
        assert_eq!(m.component_at(0.0, 0.0), Some(0));
        assert_eq!(m.component_at(0.0, 1.0), None);
        assert_eq!(m.to_csv().lines().next().unwrap(), "1,0,0,0");
    }

    #[test]
    fn compass_search_finds_quadratic_minimum() {
        let (x, y, v) = compass_minimize(|a, b| (a - 0.3).powi(2) + 2.0 * (b + 0.1).powi(2), (0.0, 0.0), 0.1, (-1.0, 1.0), 1e-12);
        assert!((x - 0.3).abs() < 1e-10 && (y + 0.1).abs() < 1e-10 && v < 1e-20);
    }
}
