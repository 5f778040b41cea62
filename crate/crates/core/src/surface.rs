//! Marked surfaces carrying (m+2)-angulations, as combinatorial maps.
//!
//! A surface is described by its boundary circles (cyclic lists of marked
//! points, counter-clockwise), the arcs joining marked points, and the face
//! walks. Each face is a closed counter-clockwise walk of directed edges —
//! arc traversals or boundary edges — with the face interior on the left.
//! Every arc is traversed exactly twice (once per direction) and every
//! boundary edge exactly once. This representation covers discs, annuli and
//! any other oriented surface with marked points on its boundary, without
//! needing geometric coordinates.
//!
//! Discs may instead be described by a point count and a list of chords;
//! the face walks are then reconstructed by planar subdivision.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::quiver::ParseError;

/// A directed edge inside a face walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeRef {
    /// Traversal of an arc; `forward` means from its first declared
    /// endpoint to the second.
    Arc { arc: usize, forward: bool },
    /// The boundary edge of component `comp` from position `pos` to
    /// position `pos + 1` (mod size), in the circle's own direction.
    Boundary { comp: usize, pos: usize },
}

/// One boundary circle; `points` are global point indices in
/// counter-clockwise order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub points: Vec<usize>,
}

/// An arc between two marked points (its endpoints may coincide).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc {
    pub id: String,
    pub ends: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub id: String,
    pub walk: Vec<EdgeRef>,
}

/// A validated combinatorial map. Either a proper `(m+2)`-angulation (every
/// face has m+2 edges) or a partial triangulation (triangle and square
/// faces; see [`crate::build`]).
#[derive(Clone, Debug)]
pub struct Angulation {
    m: usize,
    partial: bool,
    points: Vec<String>,
    components: Vec<Component>,
    arcs: Vec<Arc>,
    faces: Vec<Face>,
    // Caches built during validation.
    point_loc: Vec<(usize, usize)>,
    arc_loc: Vec<[(usize, usize); 2]>,
    bnd_loc: Vec<Vec<(usize, usize)>>,
}

impl PartialEq for Angulation {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m
            && self.partial == other.partial
            && self.points == other.points
            && self.components == other.components
            && self.arcs == other.arcs
            && self.faces == other.faces
    }
}

impl Eq for Angulation {}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("the face-size parameter m must be at least 1")]
    InvalidM,
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
    #[error("name {0:?} contains a reserved character (whitespace, '.', ':' or '#')")]
    BadName(String),
    #[error("point index {point} out of range in {what}")]
    PointOutOfRange { what: String, point: usize },
    #[error("boundary components must list every point exactly once; point {0} is listed {1} times")]
    PointCoverage(usize, usize),
    #[error("face {face}: edge {pos} does not continue where the previous edge ended")]
    WalkNotClosed { face: String, pos: usize },
    #[error("face {face} has {size} edges, expected {expected}")]
    FaceSize {
        face: String,
        size: usize,
        expected: String,
    },
    #[error("arc {arc} is traversed {count} times in direction {dir}; expected exactly once")]
    ArcCoverage { arc: String, dir: char, count: usize },
    #[error("boundary edge {comp}:{pos} appears {count} times in face walks; expected exactly once")]
    BoundaryCoverage {
        comp: String,
        pos: usize,
        count: usize,
    },
    #[error("the corner fan at point {point} does not close up against the boundary (the map is pinched, not a surface)")]
    PinchedBoundary { point: String },
    #[error("arc {0} references an unknown point or component")]
    UnknownReference(String),
    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),
    #[error("chords {0:?} and {1:?} cross")]
    CrossingDiagonals((usize, usize), (usize, usize)),
    #[error("chord {0:?} is degenerate (endpoints equal, adjacent, or out of range)")]
    BadDiagonal((usize, usize)),
    #[error("duplicate chord {0:?}")]
    DuplicateDiagonal((usize, usize)),
    #[error("operation requires a full angulation, not a partial triangulation")]
    PartialNotSupported,
    #[error("the disc and surface formats describe surfaces without interior marked points; got none")]
    Empty,
}

fn check_name(s: &str) -> Result<(), SurfaceError> {
    if s.is_empty()
        || s.chars()
            .any(|c| c.is_whitespace() || c == '.' || c == ':' || c == '#')
    {
        return Err(SurfaceError::BadName(s.to_string()));
    }
    Ok(())
}

// Point names additionally allow '.', as in the `<boundary>.<index>`
// naming scheme of the surface format.
fn check_point_name(s: &str) -> Result<(), SurfaceError> {
    if s.is_empty()
        || s.chars()
            .any(|c| c.is_whitespace() || c == ':' || c == '#')
    {
        return Err(SurfaceError::BadName(s.to_string()));
    }
    Ok(())
}

impl Angulation {
    /// Builds and fully validates an `(m+2)`-angulation.
    pub fn new_angulation(
        m: usize,
        points: Vec<String>,
        components: Vec<Component>,
        arcs: Vec<Arc>,
        faces: Vec<Face>,
    ) -> Result<Self, SurfaceError> {
        if m == 0 {
            return Err(SurfaceError::InvalidM);
        }
        Self::build(m, false, points, components, arcs, faces)
    }

    /// Builds a validated partial triangulation (faces of size 3 or 4; see
    /// [`crate::build::validate_partial`] for the remaining rules).
    pub fn new_partial(
        points: Vec<String>,
        components: Vec<Component>,
        arcs: Vec<Arc>,
        faces: Vec<Face>,
    ) -> Result<Self, SurfaceError> {
        Self::build(0, true, points, components, arcs, faces)
    }

    fn build(
        m: usize,
        partial: bool,
        points: Vec<String>,
        components: Vec<Component>,
        arcs: Vec<Arc>,
        faces: Vec<Face>,
    ) -> Result<Self, SurfaceError> {
        if points.is_empty() {
            return Err(SurfaceError::Empty);
        }
        let mut seen = HashSet::new();
        for p in &points {
            check_point_name(p)?;
            if !seen.insert(p.clone()) {
                return Err(SurfaceError::DuplicateName(p.clone()));
            }
        }
        let mut seen = HashSet::new();
        for c in &components {
            check_name(&c.name)?;
            if !seen.insert(c.name.clone()) {
                return Err(SurfaceError::DuplicateName(c.name.clone()));
            }
        }
        let mut seen = HashSet::new();
        for a in &arcs {
            check_name(&a.id)?;
            if !seen.insert(a.id.clone()) {
                return Err(SurfaceError::DuplicateName(a.id.clone()));
            }
            for p in [a.ends.0, a.ends.1] {
                if p >= points.len() {
                    return Err(SurfaceError::PointOutOfRange {
                        what: format!("arc {}", a.id),
                        point: p,
                    });
                }
            }
        }
        let mut seen = HashSet::new();
        for f in &faces {
            check_name(&f.id)?;
            if !seen.insert(f.id.clone()) {
                return Err(SurfaceError::DuplicateName(f.id.clone()));
            }
        }
        // Every point sits on exactly one circle, at one position.
        let mut point_loc = vec![(usize::MAX, usize::MAX); points.len()];
        let mut counts = vec![0usize; points.len()];
        for (ci, c) in components.iter().enumerate() {
            for (pi, &p) in c.points.iter().enumerate() {
                if p >= points.len() {
                    return Err(SurfaceError::PointOutOfRange {
                        what: format!("component {}", c.name),
                        point: p,
                    });
                }
                counts[p] += 1;
                point_loc[p] = (ci, pi);
            }
        }
        if let Some(p) = counts.iter().position(|&k| k != 1) {
            return Err(SurfaceError::PointCoverage(p, counts[p]));
        }

        let ang = Angulation {
            m,
            partial,
            points,
            components,
            arcs,
            faces,
            point_loc,
            arc_loc: Vec::new(),
            bnd_loc: Vec::new(),
        };
        ang.finish_validation()
    }

    fn finish_validation(mut self) -> Result<Self, SurfaceError> {
        // Walk closure and face sizes.
        for f in &self.faces {
            if f.walk.is_empty() {
                return Err(SurfaceError::FaceSize {
                    face: f.id.clone(),
                    size: 0,
                    expected: "a nonempty walk".into(),
                });
            }
            let ok_size = if self.partial {
                f.walk.len() == 3 || f.walk.len() == 4
            } else {
                f.walk.len() == self.m + 2
            };
            if !ok_size {
                return Err(SurfaceError::FaceSize {
                    face: f.id.clone(),
                    size: f.walk.len(),
                    expected: if self.partial {
                        "3 or 4".into()
                    } else {
                        format!("{}", self.m + 2)
                    },
                });
            }
            for (i, &e) in f.walk.iter().enumerate() {
                self.check_edge(e, &f.id)?;
                let next = f.walk[(i + 1) % f.walk.len()];
                self.check_edge(next, &f.id)?;
                if self.edge_head(e) != self.edge_tail(next) {
                    return Err(SurfaceError::WalkNotClosed {
                        face: f.id.clone(),
                        pos: (i + 1) % f.walk.len(),
                    });
                }
            }
        }
        // Coverage: each arc traversal once per direction, each boundary
        // edge exactly once.
        let mut arc_loc = vec![[(usize::MAX, usize::MAX); 2]; self.arcs.len()];
        let mut arc_counts = vec![[0usize; 2]; self.arcs.len()];
        let mut bnd_loc: Vec<Vec<(usize, usize)>> = self
            .components
            .iter()
            .map(|c| vec![(usize::MAX, usize::MAX); c.points.len()])
            .collect();
        let mut bnd_counts: Vec<Vec<usize>> = self
            .components
            .iter()
            .map(|c| vec![0usize; c.points.len()])
            .collect();
        for (fi, f) in self.faces.iter().enumerate() {
            for (i, &e) in f.walk.iter().enumerate() {
                match e {
                    EdgeRef::Arc { arc, forward } => {
                        let d = usize::from(!forward);
                        arc_counts[arc][d] += 1;
                        arc_loc[arc][d] = (fi, i);
                    }
                    EdgeRef::Boundary { comp, pos } => {
                        bnd_counts[comp][pos] += 1;
                        bnd_loc[comp][pos] = (fi, i);
                    }
                }
            }
        }
        for (ai, counts) in arc_counts.iter().enumerate() {
            for (d, &k) in counts.iter().enumerate() {
                if k != 1 {
                    return Err(SurfaceError::ArcCoverage {
                        arc: self.arcs[ai].id.clone(),
                        dir: if d == 0 { '+' } else { '-' },
                        count: k,
                    });
                }
            }
        }
        for (ci, counts) in bnd_counts.iter().enumerate() {
            for (pos, &k) in counts.iter().enumerate() {
                if k != 1 {
                    return Err(SurfaceError::BoundaryCoverage {
                        comp: self.components[ci].name.clone(),
                        pos,
                        count: k,
                    });
                }
            }
        }
        self.arc_loc = arc_loc;
        self.bnd_loc = bnd_loc;
        // Corner fans: walking around the corner of each point must cross
        // each incident arc exactly once and come out on the next boundary
        // edge of the same circle. Anything else is a pinched non-surface.
        let mut arc_degree = vec![0usize; self.points.len()];
        for a in &self.arcs {
            arc_degree[a.ends.0] += 1;
            arc_degree[a.ends.1] += 1;
        }
        for (ci, c) in self.components.iter().enumerate() {
            for pos in 0..c.points.len() {
                let q = c.points[(pos + 1) % c.points.len()];
                let ok = match self.hop_successor(ci, pos) {
                    Some((succ, crossings)) => {
                        succ == (ci, (pos + 1) % c.points.len()) && crossings == arc_degree[q]
                    }
                    None => false,
                };
                if !ok {
                    return Err(SurfaceError::PinchedBoundary {
                        point: self.points[q].clone(),
                    });
                }
            }
        }
        Ok(self)
    }

    fn check_edge(&self, e: EdgeRef, face: &str) -> Result<(), SurfaceError> {
        let ok = match e {
            EdgeRef::Arc { arc, .. } => arc < self.arcs.len(),
            EdgeRef::Boundary { comp, pos } => {
                comp < self.components.len() && pos < self.components[comp].points.len()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(SurfaceError::UnknownReference(format!("face {face}")))
        }
    }

    /// Follows the face walks around the head of boundary edge
    /// `(comp, pos)` until the next boundary edge, counting crossed arcs.
    /// `None` if the hop chain loops without end.
    fn hop_successor(&self, comp: usize, pos: usize) -> Option<((usize, usize), usize)> {
        let mut crossings = 0;
        let (mut fi, mut i) = self.bnd_loc[comp][pos];
        loop {
            let walk = &self.faces[fi].walk;
            let next = walk[(i + 1) % walk.len()];
            match next {
                EdgeRef::Boundary { comp, pos } => return Some(((comp, pos), crossings)),
                EdgeRef::Arc { arc, forward } => {
                    crossings += 1;
                    if crossings > 2 * self.arcs.len() + 1 {
                        return None;
                    }
                    let opposite = usize::from(forward);
                    let (f2, i2) = self.arc_loc[arc][opposite];
                    fi = f2;
                    i = i2;
                }
            }
        }
    }

    /// Face-size parameter; faces have `m() + 2` edges. Zero for partial
    /// triangulations, whose faces are triangles and squares instead.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_partial(&self) -> bool {
        self.partial
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn point_name(&self, p: usize) -> &str {
        &self.points[p]
    }

    pub fn point_names(&self) -> &[String] {
        &self.points
    }

    /// The circle and position a point sits on.
    pub fn point_location(&self, p: usize) -> (usize, usize) {
        self.point_loc[p]
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc_index(&self, id: &str) -> Option<usize> {
        self.arcs.iter().position(|a| a.id == id)
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face_index(&self, id: &str) -> Option<usize> {
        self.faces.iter().position(|f| f.id == id)
    }

    /// Where the given arc traversal appears: (face index, walk position).
    pub fn arc_location(&self, arc: usize, forward: bool) -> (usize, usize) {
        self.arc_loc[arc][usize::from(!forward)]
    }

    /// Where the given boundary edge appears: (face index, walk position).
    pub fn boundary_location(&self, comp: usize, pos: usize) -> (usize, usize) {
        self.bnd_loc[comp][pos]
    }

    pub fn edge_tail(&self, e: EdgeRef) -> usize {
        match e {
            EdgeRef::Arc { arc, forward } => {
                let a = &self.arcs[arc];
                if forward {
                    a.ends.0
                } else {
                    a.ends.1
                }
            }
            EdgeRef::Boundary { comp, pos } => self.components[comp].points[pos],
        }
    }

    pub fn edge_head(&self, e: EdgeRef) -> usize {
        match e {
            EdgeRef::Arc { arc, forward } => {
                let a = &self.arcs[arc];
                if forward {
                    a.ends.1
                } else {
                    a.ends.0
                }
            }
            EdgeRef::Boundary { comp, pos } => {
                let pts = &self.components[comp].points;
                pts[(pos + 1) % pts.len()]
            }
        }
    }

    /// Marked points incident to at least one arc, grouped per boundary
    /// component.
    pub fn arc_incident_points(&self) -> Vec<BTreeSet<usize>> {
        let mut out = vec![BTreeSet::new(); self.components.len()];
        for a in &self.arcs {
            for p in [a.ends.0, a.ends.1] {
                out[self.point_loc[p].0].insert(p);
            }
        }
        out
    }

    /// Maximal boundary runs between consecutive arc-incident points, per
    /// component, in counter-clockwise order (components that no arc
    /// touches contribute none).
    pub fn boundary_segments(&self) -> Vec<BoundarySegment> {
        let mt = self.arc_incident_points();
        let mut out = Vec::new();
        for (ci, c) in self.components.iter().enumerate() {
            let size = c.points.len();
            let stops: Vec<usize> = (0..size).filter(|&i| mt[ci].contains(&c.points[i])).collect();
            if stops.is_empty() {
                continue;
            }
            for (si, &start) in stops.iter().enumerate() {
                let end = stops[(si + 1) % stops.len()];
                let edge_count = if stops.len() == 1 {
                    size
                } else {
                    (end + size - start) % size
                };
                let (face, _) = self.bnd_loc[ci][start];
                debug_assert!((1..edge_count).all(|k| {
                    self.bnd_loc[ci][(start + k) % size].0 == face
                }));
                out.push(BoundarySegment {
                    component: ci,
                    start_pos: start,
                    end_pos: end,
                    weight: edge_count - 1,
                    face,
                });
            }
        }
        out
    }

    /// Number of faces whose walk contains no boundary edge.
    pub fn internal_face_count(&self) -> usize {
        self.faces
            .iter()
            .filter(|f| {
                f.walk
                    .iter()
                    .all(|e| matches!(e, EdgeRef::Arc { .. }))
            })
            .count()
    }

    /// Faces owning two or more boundary runs, in face order.
    pub fn degenerate_faces(&self) -> Vec<usize> {
        let mut owned = vec![0usize; self.faces.len()];
        for s in self.boundary_segments() {
            owned[s.face] += 1;
        }
        (0..self.faces.len()).filter(|&f| owned[f] >= 2).collect()
    }

    pub fn is_degenerate(&self) -> bool {
        !self.degenerate_faces().is_empty()
    }

    /// Boundary circles re-derived by hopping along face corners rather
    /// than read from the declared components. On a valid map this
    /// reproduces the declared circles.
    pub fn boundary_components_by_walk(&self) -> Vec<Vec<usize>> {
        let mut visited: HashSet<(usize, usize)> = HashSet::new();
        let mut out = Vec::new();
        for (ci, c) in self.components.iter().enumerate() {
            if c.points.is_empty() || visited.contains(&(ci, 0)) {
                continue;
            }
            let mut circle = Vec::new();
            let mut cur = (ci, 0);
            loop {
                visited.insert(cur);
                circle.push(self.components[cur.0].points[cur.1]);
                let (next, _) = self
                    .hop_successor(cur.0, cur.1)
                    .expect("validated surfaces have closed corner fans");
                if next == (ci, 0) {
                    break;
                }
                cur = next;
            }
            out.push(circle);
        }
        out
    }

    /// Non-fatal oddities worth surfacing to a user.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (ci, mt) in self.arc_incident_points().iter().enumerate() {
            if mt.is_empty() {
                out.push(format!(
                    "boundary component {} carries no arc endpoints; it contributes nothing",
                    self.components[ci].name
                ));
            }
        }
        out
    }

    /// Whether the map is a disc: one boundary circle and Euler
    /// characteristic one (faces − arcs).
    pub fn is_disc(&self) -> bool {
        self.components.len() == 1
            && self.faces.len() as i64 - self.arcs.len() as i64 == 1
    }

    /// A copy with every name prefixed, for building disjoint unions.
    pub fn renamed(&self, prefix: &str) -> Angulation {
        let mut out = self.clone();
        for p in &mut out.points {
            *p = format!("{prefix}{p}");
        }
        for c in &mut out.components {
            c.name = format!("{prefix}{}", c.name);
        }
        for a in &mut out.arcs {
            a.id = format!("{prefix}{}", a.id);
        }
        for f in &mut out.faces {
            f.id = format!("{prefix}{}", f.id);
        }
        out
    }
}

/// One maximal boundary run between consecutive arc-incident points.
/// `start_pos`/`end_pos` are positions on the component's circle; when a
/// circle has a single arc-incident point the run wraps the whole circle
/// and the two coincide.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundarySegment {
    pub component: usize,
    pub start_pos: usize,
    pub end_pos: usize,
    /// Number of interior points of the run (none of them arc-incident).
    pub weight: usize,
    /// The unique face whose walk contains the run.
    pub face: usize,
}

impl BoundarySegment {
    pub fn start_point(&self, a: &Angulation) -> usize {
        a.components()[self.component].points[self.start_pos]
    }

    pub fn end_point(&self, a: &Angulation) -> usize {
        a.components()[self.component].points[self.end_pos]
    }

    /// Positions of the run's boundary edges, in order.
    pub fn edge_positions(&self, a: &Angulation) -> Vec<usize> {
        let size = a.components()[self.component].points.len();
        (0..=self.weight).map(|k| (self.start_pos + k) % size).collect()
    }

    /// Positions of the run's interior points, in order.
    pub fn interior_positions(&self, a: &Angulation) -> Vec<usize> {
        let size = a.components()[self.component].points.len();
        (1..=self.weight).map(|k| (self.start_pos + k) % size).collect()
    }
}

/// Merges two disjoint surfaces into one map (same `m`, no shared names).
pub fn disjoint_union(a: &Angulation, b: &Angulation) -> Result<Angulation, SurfaceError> {
    if a.is_partial() || b.is_partial() {
        return Err(SurfaceError::PartialNotSupported);
    }
    if a.m() != b.m() {
        return Err(SurfaceError::InfeasibleParameters(format!(
            "cannot union an {}-angulation with an {}-angulation",
            a.m() + 2,
            b.m() + 2
        )));
    }
    let dp = a.points.len();
    let dc = a.components.len();
    let da = a.arcs.len();
    let mut points = a.points.clone();
    points.extend(b.points.iter().cloned());
    let mut components = a.components.clone();
    components.extend(b.components.iter().map(|c| Component {
        name: c.name.clone(),
        points: c.points.iter().map(|&p| p + dp).collect(),
    }));
    let mut arcs = a.arcs.clone();
    arcs.extend(b.arcs.iter().map(|x| Arc {
        id: x.id.clone(),
        ends: (x.ends.0 + dp, x.ends.1 + dp),
    }));
    let mut faces = a.faces.clone();
    faces.extend(b.faces.iter().map(|f| Face {
        id: f.id.clone(),
        walk: f
            .walk
            .iter()
            .map(|&e| match e {
                EdgeRef::Arc { arc, forward } => EdgeRef::Arc {
                    arc: arc + da,
                    forward,
                },
                EdgeRef::Boundary { comp, pos } => EdgeRef::Boundary {
                    comp: comp + dc,
                    pos,
                },
            })
            .collect(),
    }));
    Angulation::new_angulation(a.m(), points, components, arcs, faces)
}

fn chord_is_sane(n: usize, (a, b): (usize, usize)) -> bool {
    a < n && b < n && a != b && (b + n - a) % n != 1 && (a + n - b) % n != 1
}

fn chords_cross(n: usize, (a, b): (usize, usize), (c, d): (usize, usize)) -> bool {
    if a == c || a == d || b == c || b == d {
        return false;
    }
    let inside = |x: usize| {
        let rel = (x + n - a) % n;
        rel > 0 && rel < (b + n - a) % n
    };
    inside(c) != inside(d)
}

/// Subdivides a disc with `n` boundary points by the given chords and
/// returns the interior face walks, counter-clockwise, in a deterministic
/// order. `EdgeRef::Arc` indices refer to the chord list; the single
/// boundary circle is component 0.
pub fn faces_from_disc_diagonals(
    n: usize,
    diagonals: &[(usize, usize)],
) -> Result<Vec<Vec<EdgeRef>>, SurfaceError> {
    if n < 3 {
        return Err(SurfaceError::InfeasibleParameters(format!(
            "a disc needs at least 3 marked points, got {n}"
        )));
    }
    let mut seen = HashSet::new();
    for (i, &d) in diagonals.iter().enumerate() {
        if !chord_is_sane(n, d) {
            return Err(SurfaceError::BadDiagonal(d));
        }
        if !seen.insert((d.0.min(d.1), d.0.max(d.1))) {
            return Err(SurfaceError::DuplicateDiagonal(d));
        }
        for &e in &diagonals[..i] {
            if chords_cross(n, d, e) {
                return Err(SurfaceError::CrossingDiagonals(e, d));
            }
        }
    }
    // Rotation system: at each point, neighbours sorted counter-clockwise.
    let mut nbrs: Vec<Vec<usize>> = (0..n).map(|p| vec![(p + 1) % n, (p + n - 1) % n]).collect();
    for &(a, b) in diagonals {
        nbrs[a].push(b);
        nbrs[b].push(a);
    }
    for (p, list) in nbrs.iter_mut().enumerate() {
        list.sort_by_key(|&q| (q + n - p) % n);
    }
    // Face tracing with the interior on the left: after arriving along
    // u→v, leave along the neighbour just clockwise of u around v.
    let next_edge = |u: usize, v: usize| {
        let list = &nbrs[v];
        let k = list.iter().position(|&w| w == u).expect("edge endpoint");
        (v, list[(k + list.len() - 1) % list.len()])
    };
    let mut arc_by_pair: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, &(a, b)) in diagonals.iter().enumerate() {
        arc_by_pair.insert((a.min(b), a.max(b)), i);
    }
    let mut starts: Vec<(usize, usize)> = (0..n).map(|p| (p, (p + 1) % n)).collect();
    for &(a, b) in diagonals {
        starts.push((a, b));
        starts.push((b, a));
    }
    let mut traced: HashSet<(usize, usize)> = HashSet::new();
    let mut walks = Vec::new();
    for start in starts {
        if traced.contains(&start) {
            continue;
        }
        let mut vertices = Vec::new();
        let mut cur = start;
        loop {
            traced.insert(cur);
            vertices.push(cur.0);
            cur = next_edge(cur.0, cur.1);
            if cur == start {
                break;
            }
        }
        let walk: Vec<EdgeRef> = (0..vertices.len())
            .map(|i| {
                let u = vertices[i];
                let v = vertices[(i + 1) % vertices.len()];
                if v == (u + 1) % n {
                    Ok(EdgeRef::Boundary { comp: 0, pos: u })
                } else if u == (v + 1) % n {
                    // A clockwise boundary edge can only border the outer
                    // face, which is never traced from our start edges.
                    Err(SurfaceError::InfeasibleParameters(format!(
                        "clockwise boundary edge {u}->{v} inside a face"
                    )))
                } else {
                    let arc = arc_by_pair[&(u.min(v), u.max(v))];
                    Ok(EdgeRef::Arc {
                        arc,
                        forward: diagonals[arc].0 == u,
                    })
                }
            })
            .collect::<Result<_, _>>()?;
        walks.push(walk);
    }
    Ok(walks)
}

/// Assembles a disc angulation from a point count and chords. Points are
/// named `0..n-1` counter-clockwise, chords become arcs `t1, t2, ...` in
/// order, faces are derived by planar subdivision and named `F1, F2, ...`.
pub fn disc_angulation(
    m: usize,
    n: usize,
    diagonals: &[(usize, usize)],
) -> Result<Angulation, SurfaceError> {
    let walks = faces_from_disc_diagonals(n, diagonals)?;
    let points: Vec<String> = (0..n).map(|p| p.to_string()).collect();
    let components = vec![Component {
        name: "c0".to_string(),
        points: (0..n).collect(),
    }];
    let arcs: Vec<Arc> = diagonals
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| Arc {
            id: format!("t{}", i + 1),
            ends: (a, b),
        })
        .collect();
    let faces: Vec<Face> = walks
        .into_iter()
        .enumerate()
        .map(|(i, walk)| Face {
            id: format!("F{}", i + 1),
            walk,
        })
        .collect();
    Angulation::new_angulation(m, points, components, arcs, faces)
}

/// A seeded random `(m+2)`-angulation of a disc with `arc_count` arcs. The
/// marked-point count is forced by the disc identity
/// (`points = m·arcs + m + 2`). The polygon is split recursively at a
/// uniformly chosen allowable chord, so every angulation of the disc has
/// positive probability; equal seeds give identical output.
pub fn random_disc_angulation(
    m: usize,
    arc_count: usize,
    seed: u64,
) -> Result<Angulation, SurfaceError> {
    let (n, diagonals) = random_disc_diagonals(m, arc_count, seed)?;
    disc_angulation(m, n, &diagonals)
}

/// The raw `(point count, chords)` behind [`random_disc_angulation`];
/// useful for shrinking counterexamples at the chord level.
pub fn random_disc_diagonals(
    m: usize,
    arc_count: usize,
    seed: u64,
) -> Result<(usize, Vec<(usize, usize)>), SurfaceError> {
    if m == 0 {
        return Err(SurfaceError::InvalidM);
    }
    let n = m * arc_count + m + 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut diagonals = Vec::with_capacity(arc_count);
    let mut stack: Vec<Vec<usize>> = vec![(0..n).collect()];
    while let Some(poly) = stack.pop() {
        let k = poly.len();
        if k == m + 2 {
            continue;
        }
        // Chords poly[i]..poly[j] leaving both sides subdividable: each
        // side's size must be ≡ 2 (mod m), i.e. j − i ≡ 1 (mod m).
        let allowable: Vec<(usize, usize)> = (0..k)
            .flat_map(|i| (i + 2..k).map(move |j| (i, j)))
            .filter(|&(i, j)| (j - i) % m == 1 % m && k - (j - i) >= 2)
            .collect();
        debug_assert!(!allowable.is_empty());
        let (i, j) = allowable[rng.gen_range(0..allowable.len())];
        diagonals.push((poly[i], poly[j]));
        // Recurse on the far side first so the near side is split next
        // (stack order), keeping arc numbering depth-first.
        stack.push(poly[j..].iter().chain(&poly[..=i]).copied().collect());
        stack.push(poly[i..=j].to_vec());
    }
    Ok((n, diagonals))
}

fn parse_edge_token(tok: &str) -> Option<(char, &str, &str)> {
    let mut parts = tok.splitn(3, ':');
    let kind = parts.next()?;
    let a = parts.next()?;
    let b = parts.next()?;
    if kind.len() != 1 {
        return None;
    }
    Some((kind.chars().next().unwrap(), a, b))
}

/// Parses any of the three angulation formats (`angulation disc`,
/// `angulation surface`, `angulation partial`).
pub fn parse_angulation(text: &str) -> Result<Angulation, ParseError> {
    let err = |line: usize, msg: String| ParseError { line, msg };
    let mut header: Option<(usize, String)> = None;
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if header.is_none() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() == 2 && fields[0] == "angulation" {
                header = Some((i + 1, fields[1].to_string()));
                continue;
            }
            return Err(err(
                i + 1,
                "expected header \"angulation disc|surface|partial\"".into(),
            ));
        }
        lines.push((i + 1, line.to_string()));
    }
    let (_, kind) = header.ok_or_else(|| err(1, "empty input".into()))?;
    match kind.as_str() {
        "disc" => parse_disc_body(&lines),
        "surface" => parse_surface_body(&lines, false),
        "partial" => parse_surface_body(&lines, true),
        other => Err(err(1, format!("unknown angulation kind {other:?}"))),
    }
}

fn parse_disc_body(lines: &[(usize, String)]) -> Result<Angulation, ParseError> {
    let err = |line: usize, msg: String| ParseError { line, msg };
    let mut m: Option<usize> = None;
    let mut n: Option<usize> = None;
    let mut arcs: Vec<(usize, String, usize, usize)> = Vec::new();
    for (lineno, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        match f[0] {
            "m" if f.len() == 2 => {
                m = Some(
                    f[1].parse()
                        .map_err(|_| err(*lineno, "m must be a positive integer".into()))?,
                );
            }
            "points" if f.len() == 2 => {
                n = Some(
                    f[1].parse()
                        .map_err(|_| err(*lineno, "points takes a count".into()))?,
                );
            }
            "arc" if f.len() == 4 => {
                let parse_pt = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| err(*lineno, format!("bad point {s:?}")))
                };
                arcs.push((*lineno, f[1].to_string(), parse_pt(f[2])?, parse_pt(f[3])?));
            }
            other => return Err(err(*lineno, format!("unexpected directive {other:?}"))),
        }
    }
    let m = m.ok_or_else(|| err(0, "missing m line".into()))?;
    let n = n.ok_or_else(|| err(0, "missing points line".into()))?;
    let diagonals: Vec<(usize, usize)> = arcs.iter().map(|&(_, _, a, b)| (a, b)).collect();
    let mut ang = disc_angulation(m, n, &diagonals)
        .map_err(|e| err(arcs.first().map_or(0, |a| a.0), e.to_string()))?;
    // Re-apply the declared arc ids (disc_angulation names them t1, t2, …).
    for (i, (lineno, id, _, _)) in arcs.iter().enumerate() {
        check_name(id).map_err(|e| err(*lineno, e.to_string()))?;
        ang.arcs[i].id = id.clone();
    }
    let ids: Vec<&String> = ang.arcs.iter().map(|a| &a.id).collect();
    let mut seen = HashSet::new();
    for (i, id) in ids.iter().enumerate() {
        if !seen.insert(*id) {
            return Err(err(arcs[i].0, format!("duplicate arc id {id:?}")));
        }
    }
    Ok(ang)
}

fn parse_surface_body(lines: &[(usize, String)], partial: bool) -> Result<Angulation, ParseError> {
    let err = |line: usize, msg: String| ParseError { line, msg };
    let mut m: Option<usize> = None;
    let mut comps: Vec<(usize, String, usize)> = Vec::new();
    let mut arcs: Vec<(usize, String, String, String)> = Vec::new();
    let mut faces: Vec<(usize, String, Vec<String>)> = Vec::new();
    for (lineno, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        match f[0] {
            "m" if f.len() == 2 && !partial => {
                m = Some(
                    f[1].parse()
                        .map_err(|_| err(*lineno, "m must be a positive integer".into()))?,
                );
            }
            "boundary" if f.len() == 3 => {
                let count: usize = f[2]
                    .parse()
                    .map_err(|_| err(*lineno, "boundary takes a name and a point count".into()))?;
                if count == 0 {
                    return Err(err(*lineno, "a boundary circle needs at least one point".into()));
                }
                comps.push((*lineno, f[1].to_string(), count));
            }
            "arc" if f.len() == 4 => {
                arcs.push((
                    *lineno,
                    f[1].to_string(),
                    f[2].to_string(),
                    f[3].to_string(),
                ));
            }
            "face" if f.len() >= 2 => {
                faces.push((
                    *lineno,
                    f[1].to_string(),
                    f[2..].iter().map(|s| s.to_string()).collect(),
                ));
            }
            other => return Err(err(*lineno, format!("unexpected directive {other:?}"))),
        }
    }
    // Global point table: component points named `<comp>.<idx>`.
    let mut points = Vec::new();
    let mut components = Vec::new();
    let mut comp_index: HashMap<String, usize> = HashMap::new();
    for (lineno, name, count) in &comps {
        if comp_index.insert(name.clone(), components.len()).is_some() {
            return Err(err(*lineno, format!("duplicate boundary name {name:?}")));
        }
        let base = points.len();
        for i in 0..*count {
            points.push(format!("{name}.{i}"));
        }
        components.push(Component {
            name: name.clone(),
            points: (base..base + count).collect(),
        });
    }
    let point_ref = |lineno: usize, s: &str| -> Result<usize, ParseError> {
        let (name, idx) = s
            .rsplit_once('.')
            .ok_or_else(|| err(lineno, format!("point reference {s:?} is not <boundary>.<index>")))?;
        let ci = *comp_index
            .get(name)
            .ok_or_else(|| err(lineno, format!("unknown boundary {name:?}")))?;
        let i: usize = idx
            .parse()
            .map_err(|_| err(lineno, format!("bad point index in {s:?}")))?;
        components[ci]
            .points
            .get(i)
            .copied()
            .ok_or_else(|| err(lineno, format!("point {s} is out of range")))
    };
    let mut arc_list = Vec::new();
    let mut arc_index: HashMap<String, usize> = HashMap::new();
    for (lineno, id, p, q) in &arcs {
        if arc_index.insert(id.clone(), arc_list.len()).is_some() {
            return Err(err(*lineno, format!("duplicate arc id {id:?}")));
        }
        arc_list.push(Arc {
            id: id.clone(),
            ends: (point_ref(*lineno, p)?, point_ref(*lineno, q)?),
        });
    }
    let mut face_list = Vec::new();
    for (lineno, id, tokens) in &faces {
        let mut walk = Vec::new();
        for tok in tokens {
            let bad = || err(*lineno, format!("bad edge token {tok:?}"));
            let (kind, a, b) = parse_edge_token(tok).ok_or_else(bad)?;
            match kind {
                'a' => {
                    let arc = *arc_index.get(a).ok_or_else(|| {
                        err(*lineno, format!("unknown arc {a:?} in face {id}"))
                    })?;
                    let forward = match b {
                        "+" => true,
                        "-" => false,
                        _ => return Err(bad()),
                    };
                    walk.push(EdgeRef::Arc { arc, forward });
                }
                'b' => {
                    let comp = *comp_index.get(a).ok_or_else(|| {
                        err(*lineno, format!("unknown boundary {a:?} in face {id}"))
                    })?;
                    let pos: usize = b.parse().map_err(|_| bad())?;
                    if pos >= components[comp].points.len() {
                        return Err(err(
                            *lineno,
                            format!("boundary position {pos} out of range in face {id}"),
                        ));
                    }
                    walk.push(EdgeRef::Boundary { comp, pos });
                }
                _ => return Err(bad()),
            }
        }
        face_list.push(Face {
            id: id.clone(),
            walk,
        });
    }
    let built = if partial {
        Angulation::new_partial(points, components, arc_list, face_list)
    } else {
        let m = m.ok_or_else(|| err(0, "missing m line".into()))?;
        Angulation::new_angulation(m, points, components, arc_list, face_list)
    };
    built.map_err(|e| err(0, e.to_string()))
}

/// Canonical text form. Discs (single circle, Euler characteristic 1, no
/// loop arcs, not partial) use the chord shorthand; everything else writes
/// circles and face walks explicitly with points referenced positionally.
pub fn serialize_angulation(a: &Angulation) -> String {
    let has_loop = a.arcs().iter().any(|x| x.ends.0 == x.ends.1);
    if !a.is_partial() && a.is_disc() && !has_loop {
        let c = &a.components()[0];
        let pos_of: HashMap<usize, usize> =
            c.points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut out = format!("angulation disc\nm {}\npoints {}\n", a.m(), c.points.len());
        for arc in a.arcs() {
            out.push_str(&format!(
                "arc {} {} {}\n",
                arc.id, pos_of[&arc.ends.0], pos_of[&arc.ends.1]
            ));
        }
        return out;
    }
    let mut out = if a.is_partial() {
        String::from("angulation partial\n")
    } else {
        format!("angulation surface\nm {}\n", a.m())
    };
    for c in a.components() {
        out.push_str(&format!("boundary {} {}\n", c.name, c.points.len()));
    }
    let pos_name = |p: usize| {
        let (ci, pi) = a.point_location(p);
        format!("{}.{}", a.components()[ci].name, pi)
    };
    for arc in a.arcs() {
        out.push_str(&format!(
            "arc {} {} {}\n",
            arc.id,
            pos_name(arc.ends.0),
            pos_name(arc.ends.1)
        ));
    }
    for f in a.faces() {
        out.push_str(&format!("face {}", f.id));
        for &e in &f.walk {
            match e {
                EdgeRef::Arc { arc, forward } => {
                    out.push_str(&format!(
                        " a:{}:{}",
                        a.arcs()[arc].id,
                        if forward { '+' } else { '-' }
                    ));
                }
                EdgeRef::Boundary { comp, pos } => {
                    out.push_str(&format!(" b:{}:{}", a.components()[comp].name, pos));
                }
            }
        }
        out.push('\n');
    }
    out
}
