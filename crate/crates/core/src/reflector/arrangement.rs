//! Edges and vertices of the body cut out by a finite family.
//!
//! Writing `g_j(x) = (1 - <x, y_j>) / p_j`, the radial function is
//! `1 / max_j g_j`. Every `g_j` is affine in `x`, so the locus where members
//! `a` and `b` tie is a small circle of the sphere (two points of the circle
//! for n = 1), and the part of it where they are minimal is a union of arcs
//! cut out by one cosine inequality per other member.
//!
//! An objective of the form `rho(x) (k + <x, v>)` is affine in the surface
//! point on each face, and a ratio of affine functions of `x` along each
//! edge, so its maximum over the surface is found among finitely many
//! closed-form candidates.

use std::f64::consts::TAU;

use nalgebra::Vector3;

use super::family::Family;
use crate::sphere::Direction;

/// `rho(x) * (k + <x, v>)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Affine {
    pub k: f64,
    pub v: Vector3<f64>,
}

impl Affine {
    /// `<X, u>` for the surface point `X`.
    pub fn linear(u: &Direction) -> Self {
        Self {
            k: 0.0,
            v: *u.vector(),
        }
    }

    /// `|X| |Y| - <X, Y>`, the extended focal objective.
    pub fn focal(y: &Vector3<f64>) -> Self {
        Self { k: y.norm(), v: -y }
    }

    #[inline]
    pub fn weight(&self, x: &Direction) -> f64 {
        self.k + x.vector().dot(&self.v)
    }
}

#[derive(Clone, Debug)]
struct Circle {
    center: Vector3<f64>,
    e1: Vector3<f64>,
    e2: Vector3<f64>,
    radius: f64,
}

impl Circle {
    fn at(&self, t: f64) -> Vector3<f64> {
        self.center + (self.e1 * t.cos() + self.e2 * t.sin()) * self.radius
    }

    /// Coefficients `(A, P, Q)` of `k + <x(t), v> = A + P cos t + Q sin t`.
    fn trig(&self, k: f64, v: &Vector3<f64>) -> (f64, f64, f64) {
        (
            k + self.center.dot(v),
            self.radius * self.e1.dot(v),
            self.radius * self.e2.dot(v),
        )
    }
}

/// Part `[lo, hi]` of a tie circle on which the tied members are minimal,
/// with a bounding cap and the largest radius along it.
#[derive(Clone, Debug)]
struct Arc {
    lo: f64,
    hi: f64,
    cap_center: Vector3<f64>,
    cap_cos: f64,
    cap_sin: f64,
    rho_max: f64,
}

impl Arc {
    fn new(circle: &Circle, family: &Family, a: usize, lo: f64, hi: f64) -> Self {
        let mid = 0.5 * (lo + hi);
        let cap_center = circle.at(mid).normalize();
        // Farthest point from the midpoint: an endpoint, or the opposite
        // point of the circle when the arc is longer than half of it.
        let far = if hi - lo > std::f64::consts::PI {
            circle.at(mid + std::f64::consts::PI)
        } else {
            circle.at(lo)
        };
        let cap_cos = far.normalize().dot(&cap_center).clamp(-1.0, 1.0);
        let (d0, pd, qd) = circle.trig(1.0, &(-family.axis(a).vector()));
        let denom = |t: f64| d0 + pd * t.cos() + qd * t.sin();
        let lowest = (qd.atan2(pd) + std::f64::consts::PI).rem_euclid(TAU);
        let mut dmin = denom(lo).min(denom(hi));
        if (lowest >= lo && lowest <= hi) || (lowest + TAU >= lo && lowest + TAU <= hi) {
            dmin = dmin.min(denom(lowest));
        }
        let rho_max = if dmin > 0.0 {
            family.param(a) / dmin
        } else {
            f64::INFINITY
        };
        Self {
            lo,
            hi,
            cap_center,
            cap_cos,
            cap_sin: (1.0 - cap_cos * cap_cos).max(0.0).sqrt(),
            rho_max,
        }
    }

    /// Upper bound of `rho (k + <x, v>)` on the arc.
    fn bound(&self, obj: &Affine) -> f64 {
        let vn = obj.v.norm();
        let w = if vn == 0.0 {
            obj.k
        } else {
            let c = self.cap_center.dot(&obj.v) / vn;
            // cos(max(0, angle(center, v) - cap radius)).
            let best_cos = if c >= self.cap_cos {
                1.0
            } else {
                c * self.cap_cos + (1.0 - c * c).max(0.0).sqrt() * self.cap_sin
            };
            obj.k + vn * best_cos
        };
        if w <= 0.0 {
            0.0
        } else {
            self.rho_max * w
        }
    }
}

#[derive(Clone, Debug)]
struct Edge {
    a: usize,
    circle: Circle,
    arcs: Vec<Arc>,
}

#[derive(Clone, Debug)]
pub(crate) struct Arrangement {
    edges: Vec<Edge>,
    /// Nearest members of each member, checked first in face tests.
    nearest: Vec<Vec<usize>>,
    /// Members that own part of the surface.
    has_face: Vec<bool>,
    eta: f64,
    /// Vertex directions with their radii.
    vertices: Vec<(Direction, f64)>,
}

/// Slack, in units of `max 1/p_j`, with which tie constraints are accepted.
const SLACK: f64 = 1e-12;

/// Nearest members (by axis angle) checked first when cutting a tie circle.
const NEAREST: usize = 24;

/// Members ordered so that the ones most likely to cut a tie circle of `a`
/// come first: the nearest axes, then everything else.
fn cut_order(family: &Family) -> Vec<Vec<usize>> {
    let n = family.len();
    (0..n)
        .map(|a| {
            let ya = family.axis(a);
            let mut near: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != a)
                .map(|j| (-ya.dot(family.axis(j)), j))
                .collect();
            let k = NEAREST.min(near.len());
            if k < near.len() {
                near.select_nth_unstable_by(k, |x, y| x.0.total_cmp(&y.0));
                near.truncate(k);
            }
            near.sort_by(|x, y| x.0.total_cmp(&y.0));
            near.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

/// A candidate maximizer with an upper bound on its value.
struct Candidate {
    x: Direction,
    bound: f64,
}

impl Arrangement {
    pub fn new(family: &Family, dim: u32) -> Self {
        let n = family.len();
        let gscale = (0..n).map(|j| 1.0 / family.param(j)).fold(0.0, f64::max);
        let eta = SLACK * gscale;
        let order = cut_order(family);
        let mut has_face = vec![n == 1; n];
        let mut arcs: Vec<(f64, f64)> = Vec::new();
        let mut scratch: Vec<(f64, f64)> = Vec::new();
        let mut edges = Vec::new();
        let mut vertices = Vec::new();
        let mut push_vertex = |x: Vector3<f64>| {
            let d = Direction::from_unit(x.normalize());
            vertices.push((d, family.radius(&d).0));
        };
        for a in 0..n {
            let others = || order[a].iter().copied().chain(0..n);
            for b in a + 1..n {
                let Some(circle) = tie_circle(family, a, b, dim) else { continue };
                if dim == 1 {
                    for t in [0.0, std::f64::consts::PI] {
                        let x = circle.at(t);
                        if dominates(family, a, b, &x, eta, others()) {
                            push_vertex(x);
                            has_face[a] = true;
                            has_face[b] = true;
                        }
                    }
                    continue;
                }
                arcs.clear();
                arcs.push((0.0, TAU));
                for j in others() {
                    if j == a || j == b {
                        continue;
                    }
                    let v = family.axis(j).vector() / family.param(j)
                        - family.axis(a).vector() / family.param(a);
                    let k = 1.0 / family.param(a) - 1.0 / family.param(j) + eta;
                    let (c, p, q) = circle.trig(k, &v);
                    intersect_into(&arcs, allowed(c, p, q), &mut scratch);
                    std::mem::swap(&mut arcs, &mut scratch);
                    if arcs.is_empty() {
                        break;
                    }
                }
                if arcs.is_empty() {
                    continue;
                }
                for &(lo, hi) in &arcs {
                    if hi - lo < TAU {
                        for t in [lo, hi] {
                            push_vertex(polish_vertex(family, a, b, circle.at(t)));
                        }
                    }
                }
                has_face[a] = true;
                has_face[b] = true;
                let arcs = arcs
                    .iter()
                    .map(|&(lo, hi)| Arc::new(&circle, family, a, lo, hi))
                    .collect();
                edges.push(Edge { a, circle, arcs });
            }
        }
        vertices.sort_by(|p, q| {
            let (u, v) = (p.0.vector(), q.0.vector());
            u.x.total_cmp(&v.x)
                .then(u.y.total_cmp(&v.y))
                .then(u.z.total_cmp(&v.z))
        });
        vertices.dedup_by(|p, q| p.0.vector() == q.0.vector());
        Self {
            edges,
            nearest: order,
            has_face,
            eta,
            vertices,
        }
    }

    /// Points where three or more members meet (two on the circle).
    pub fn vertices(&self) -> impl Iterator<Item = &Direction> {
        self.vertices.iter().map(|(d, _)| d)
    }

    #[cfg(test)]
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    #[cfg(test)]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Maximizes `rho(x) (k + <x, v>)` over the surface.
    ///
    /// Candidate values use the radius of the candidate's own member, which
    /// is exact on its face or edge and never below the true radius, so
    /// arcs and faces that cannot beat the running best are skipped and only
    /// the leading candidates are re-evaluated with the whole family.
    pub fn maximize(&self, family: &Family, obj: &Affine) -> Option<(Direction, f64)> {
        let mut cands: Vec<Candidate> = Vec::new();
        let mut lead = f64::NEG_INFINITY;
        let mut offer = |x: Direction, rho: f64, lead: &mut f64| {
            let bound = rho * obj.weight(&x);
            if bound.is_finite() {
                *lead = lead.max(bound);
                cands.push(Candidate { x, bound });
            }
        };

        for (x, rho) in &self.vertices {
            offer(*x, *rho, &mut lead);
        }

        for e in &self.edges {
            if e.arcs.iter().all(|arc| arc.bound(obj) <= lead) {
                continue;
            }
            let ya = family.axis(e.a);
            let (a0, p0, q0) = e.circle.trig(obj.k, &obj.v);
            let (d0, pd, qd) = e.circle.trig(1.0, &(-ya.vector()));
            // d/dt (N/D) = 0  <=>  alpha cos t + beta sin t + gamma = 0.
            let alpha = q0 * d0 - a0 * qd;
            let beta = a0 * pd - p0 * d0;
            let gamma = q0 * pd - p0 * qd;
            let r = alpha.hypot(beta);
            let scale = (a0.abs() + p0.abs() + q0.abs()) * (d0.abs() + pd.abs() + qd.abs());
            let ts = if r > 1e-15 * scale {
                let c = (-gamma / r).clamp(-1.0, 1.0);
                let phi = beta.atan2(alpha);
                let w = c.acos();
                [phi + w, phi - w]
            } else {
                [e.arcs[0].lo; 2]
            };
            for t in ts {
                let t = t.rem_euclid(TAU);
                if !e.arcs.iter().any(|arc| t >= arc.lo - 1e-12 && t <= arc.hi + 1e-12) {
                    continue;
                }
                let x = Direction::from_unit(e.circle.at(t).normalize());
                offer(x, family.term(e.a, &x), &mut lead);
            }
        }

        // Faces: the objective is `k p_a + <X, k y_a + v>` on member a.
        for a in 0..family.len() {
            if !self.has_face[a] {
                continue;
            }
            let y = family.axis(a).vector();
            let w = y * obj.k + obj.v;
            let wn = w.norm();
            if wn == 0.0 || y.dot(&w) >= -1e-15 * wn {
                continue;
            }
            let u = w / wn;
            let x = Direction::from_unit((y - u * (2.0 * y.dot(&u))).normalize());
            let rho = family.term(a, &x);
            if rho * obj.weight(&x) <= lead {
                continue;
            }
            let others = self.nearest[a].iter().copied().chain(0..family.len());
            if dominates(family, a, a, x.vector(), self.eta, others) {
                offer(x, rho, &mut lead);
            }
        }

        let top = cands.iter().max_by(|a, b| a.bound.total_cmp(&b.bound))?;
        let first = family.radius(&top.x).0 * obj.weight(&top.x);
        let mut rest: Vec<&Candidate> = cands.iter().filter(|c| c.bound > first).collect();
        rest.sort_by(|a, b| b.bound.total_cmp(&a.bound));
        let mut best: Option<(Direction, f64)> = first.is_finite().then_some((top.x, first));
        for c in rest {
            if let Some((_, v)) = best {
                if c.bound <= v {
                    break;
                }
            }
            let value = family.radius(&c.x).0 * obj.weight(&c.x);
            if value.is_finite() && best.is_none_or(|b| value > b.1) {
                best = Some((c.x, value));
            }
        }
        best
    }
}

/// Tie locus of members `a` and `b`, or `None` if it misses the sphere.
fn tie_circle(family: &Family, a: usize, b: usize, dim: u32) -> Option<Circle> {
    let (pa, pb) = (family.param(a), family.param(b));
    let w = family.axis(a).vector() / pa - family.axis(b).vector() / pb;
    let c = 1.0 / pa - 1.0 / pb;
    let wn = w.norm();
    if wn <= 1e-14 * (1.0 / pa + 1.0 / pb) {
        return None;
    }
    let n = w / wn;
    let d = c / wn;
    if d.abs() >= 1.0 {
        return None;
    }
    let radius = (1.0 - d * d).sqrt();
    let (e1, e2) = if dim == 1 {
        let t = Vector3::new(-n.y, n.x, 0.0).normalize();
        (t, Vector3::zeros())
    } else {
        let helper = if n.x.abs() < 0.6 { Vector3::x() } else { Vector3::y() };
        let e1 = (helper - n * n.dot(&helper)).normalize();
        (e1, n.cross(&e1))
    };
    Some(Circle {
        center: n * d,
        e1,
        e2,
        radius,
    })
}

/// Recomputes a vertex on the tie circle of `a` and `b` as the exact triple
/// tie with the strongest third member near `x`.
fn polish_vertex(family: &Family, a: usize, b: usize, x: Vector3<f64>) -> Vector3<f64> {
    let g = |j: usize| (1.0 - x.dot(family.axis(j).vector())) / family.param(j);
    let Some(c) = (0..family.len())
        .filter(|&j| j != a && j != b)
        .max_by(|&i, &j| g(i).total_cmp(&g(j)))
    else {
        return x;
    };
    let plane = |j: usize| {
        (
            family.axis(a).vector() / family.param(a) - family.axis(j).vector() / family.param(j),
            1.0 / family.param(a) - 1.0 / family.param(j),
        )
    };
    let ((w1, c1), (w2, c2)) = (plane(b), plane(c));
    let m = w1.cross(&w2);
    let mn = m.norm();
    if mn <= 1e-12 * w1.norm() * w2.norm() {
        return x;
    }
    // Point of the line in span(w1, w2), then the two sphere intersections.
    let (g11, g12, g22) = (w1.dot(&w1), w1.dot(&w2), w2.dot(&w2));
    let det = g11 * g22 - g12 * g12;
    let alpha = (c1 * g22 - c2 * g12) / det;
    let beta = (c2 * g11 - c1 * g12) / det;
    let x0 = w1 * alpha + w2 * beta;
    let s = 1.0 - x0.norm_squared();
    if s < 0.0 {
        return x;
    }
    let dir = m / mn;
    let t = s.sqrt();
    let (p, q) = (x0 + dir * t, x0 - dir * t);
    let best = if (p - x).norm() <= (q - x).norm() { p } else { q };
    if (best - x).norm() <= 1e-6 {
        best
    } else {
        x
    }
}

/// Whether `a` (tied with `b`) is minimal at `x` up to slack `eta` in `1/rho`,
/// checking members in the order given.
fn dominates(
    family: &Family,
    a: usize,
    b: usize,
    x: &Vector3<f64>,
    eta: f64,
    mut members: impl Iterator<Item = usize>,
) -> bool {
    let g = |j: usize| (1.0 - x.dot(family.axis(j).vector())) / family.param(j);
    let ga = g(a);
    members.all(|j| j == a || j == b || g(j) <= ga + eta)
}

/// `{t : c + p cos t + q sin t >= 0}` as at most two sorted intervals of
/// `[0, 2π]`.
fn allowed(c: f64, p: f64, q: f64) -> ([(f64, f64); 2], usize) {
    let none = [(0.0, 0.0); 2];
    let b = p.hypot(q);
    if c >= b {
        return ([(0.0, TAU), (0.0, 0.0)], 1);
    }
    if c < -b || b == 0.0 {
        return (none, 0);
    }
    let phi = q.atan2(p);
    let w = (-c / b).clamp(-1.0, 1.0).acos();
    let lo = (phi - w).rem_euclid(TAU);
    let hi = lo + 2.0 * w;
    if hi <= TAU {
        ([(lo, hi), (0.0, 0.0)], 1)
    } else {
        ([(0.0, hi - TAU), (lo, TAU)], 2)
    }
}

fn intersect_into(a: &[(f64, f64)], (b, nb): ([(f64, f64); 2], usize), out: &mut Vec<(f64, f64)>) {
    out.clear();
    for &(a0, a1) in a {
        for &(b0, b1) in &b[..nb] {
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo <= hi {
                out.push((lo, hi));
            }
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{make_grid, maximize_near, LocalSearch};

    /// Oracle: local search from every discrete local maximum of a fine grid.
    fn searched_max(family: &Family, obj: &Affine) -> f64 {
        let g = make_grid(2, 4).unwrap();
        let value = |x: &Direction| family.radius(x).0 * obj.weight(x);
        let cfg = LocalSearch::for_grid(&g, 1e-12);
        (0..g.len())
            .filter(|&i| g.neighbors(i).iter().all(|&j| value(g.point(j)) <= value(g.point(i))))
            .map(|i| maximize_near(2, *g.point(i), &value, &cfg).unwrap().1)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn lens_has_one_closed_edge() {
        let f = Family::new([(Direction::e3(), 1.0, 0), (-Direction::e3(), 1.0, 1)]);
        let arr = Arrangement::new(&f, 2);
        assert_eq!(arr.edge_count(), 1);
        assert_eq!(arr.vertex_count(), 0);
        // Focal objective at -e1 peaks on the edge at x = e1 with value 2.
        let (x, v) = arr.maximize(&f, &Affine::focal(&-Vector3::x())).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
        assert!(x.angle(&Direction::e1()) < 1e-7);
        // Support in direction e3 is attained at the upper pole.
        let (x, v) = arr.maximize(&f, &Affine::linear(&Direction::e3())).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
        assert!(x.angle(&Direction::e3()) < 1e-7);
    }

    #[test]
    fn matches_dense_sampling_on_random_families() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let g = make_grid(2, 2).unwrap();
        for _ in 0..6 {
            let members: Vec<_> = (0..8)
                .map(|_| {
                    let i = rng.random_range(0..g.len());
                    (*g.point(i), rng.random_range(0.5..3.0), i)
                })
                .collect();
            let f = Family::new(members);
            if f.distinct_axes() < 2 {
                continue;
            }
            let arr = Arrangement::new(&f, 2);
            for _ in 0..5 {
                let u = Direction::new(Vector3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ))
                .unwrap();
                for obj in [Affine::linear(&u), Affine::focal(u.vector())] {
                    let (x, v) = arr.maximize(&f, &obj).unwrap();
                    assert_eq!(v, f.radius(&x).0 * obj.weight(&x));
                    let searched = searched_max(&f, &obj);
                    assert!(v >= searched - 1e-12, "{v} < {searched}");
                    assert!(v <= searched + 1e-7, "{v} vs {searched}");
                }
            }
        }
    }

    #[test]
    fn circle_vertices_for_two_members() {
        // Two members on the circle: p(e1) = p(-e1) = 1 tie at ±e2.
        let f = Family::new([(Direction::e1(), 1.0, 0), (-Direction::e1(), 1.0, 1)]);
        let arr = Arrangement::new(&f, 1);
        assert_eq!(arr.vertex_count(), 2);
        let (_, v) = arr.maximize(&f, &Affine::focal(&Vector3::y())).unwrap();
        // At x = -e2: rho = 1, 1 - <x, e2> = 2.
        assert!((v - 2.0).abs() < 1e-14);
    }
}
