//! From angulations to gentle bound quivers.
//!
//! The quiver of an angulation has one vertex per arc. Every corner — two
//! arc traversals meeting consecutively in a face walk — gives an arrow
//! from the first arc to the second, and two corners that share their
//! middle traversal inside the same face give a length-two relation. For
//! partial triangulations (triangles and squares) the same corner rule
//! applies; the shape constraints ensure relations only ever come from
//! squares.

use thiserror::Error;

use crate::quiver::BoundQuiver;
use crate::surface::{Angulation, Component, EdgeRef, Face, SurfaceError};

/// A corner of a face: arc traversals at walk positions `pos` and
/// `pos + 1` meeting at `point`.
#[derive(Clone, Debug)]
pub(crate) struct Corner {
    pub(crate) face: usize,
    pub(crate) pos: usize,
    pub(crate) in_edge: (usize, bool),
    pub(crate) out_edge: (usize, bool),
    #[allow(dead_code)]
    pub(crate) point: usize,
}

pub(crate) fn corner_id(a: &Angulation, c: &Corner) -> String {
    let sign = |forward: bool| if forward { '+' } else { '-' };
    format!(
        "{}:{}{}:{}{}",
        a.point_name(c.point),
        a.arcs()[c.in_edge.0].id,
        sign(c.in_edge.1),
        a.arcs()[c.out_edge.0].id,
        sign(c.out_edge.1),
    )
}

pub(crate) fn corners(a: &Angulation) -> Vec<Corner> {
    let mut out = Vec::new();
    for (fi, f) in a.faces().iter().enumerate() {
        let len = f.walk.len();
        for pos in 0..len {
            let e = f.walk[pos];
            let next = f.walk[(pos + 1) % len];
            if let (EdgeRef::Arc { arc: a1, forward: d1 }, EdgeRef::Arc { arc: a2, forward: d2 }) =
                (e, next)
            {
                out.push(Corner {
                    face: fi,
                    pos,
                    in_edge: (a1, d1),
                    out_edge: (a2, d2),
                    point: a.edge_head(e),
                });
            }
        }
    }
    out
}

/// The gentle bound quiver of an angulation (full or partial): vertices
/// are arcs, arrows are corners (named `<point>:<in>:<out>` so that they
/// survive surgery on the boundary unchanged), and relations pair corners
/// adjacent in the same face walk.
pub fn build_quiver(a: &Angulation) -> BoundQuiver {
    let cs = corners(a);
    let vertices: Vec<String> = a.arcs().iter().map(|x| x.id.clone()).collect();
    let mut arrows: Vec<(String, String, String)> = cs
        .iter()
        .map(|c| {
            (
                corner_id(a, c),
                a.arcs()[c.in_edge.0].id.clone(),
                a.arcs()[c.out_edge.0].id.clone(),
            )
        })
        .collect();
    arrows.sort();
    let mut relations = Vec::new();
    for c in &cs {
        let len = a.faces()[c.face].walk.len();
        let follow = cs
            .iter()
            .find(|d| d.face == c.face && d.pos == (c.pos + 1) % len);
        if let Some(d) = follow {
            relations.push((corner_id(a, c), corner_id(a, d)));
        }
    }
    relations.sort();
    relations.dedup();
    BoundQuiver::from_parts(vertices, arrows, relations)
        .expect("corners of a validated angulation form a well-defined bound quiver")
}

/// Shape rules a partial triangulation must satisfy before it can be
/// inflated or given a quiver.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum PartialViolation {
    #[error("expected a partial triangulation (triangles and squares)")]
    NotPartial,
    #[error("partial triangulations must be discs")]
    NotADisc,
    #[error("square face {face} has {count} boundary edges; it must have exactly one")]
    SquareBoundaryEdges { face: String, count: usize },
    #[error("triangle face {face} has no boundary edge")]
    InternalTriangle { face: String },
}

/// Checks the square/triangle shape rules; an empty list means the
/// partial triangulation is admissible.
pub fn validate_partial(a: &Angulation) -> Vec<PartialViolation> {
    let mut out = Vec::new();
    if !a.is_partial() {
        out.push(PartialViolation::NotPartial);
        return out;
    }
    if !a.is_disc() {
        out.push(PartialViolation::NotADisc);
    }
    for f in a.faces() {
        let bnd = f
            .walk
            .iter()
            .filter(|e| matches!(e, EdgeRef::Boundary { .. }))
            .count();
        if f.walk.len() == 4 && bnd != 1 {
            out.push(PartialViolation::SquareBoundaryEdges {
                face: f.id.clone(),
                count: bnd,
            });
        }
        if f.walk.len() == 3 && bnd == 0 {
            out.push(PartialViolation::InternalTriangle { face: f.id.clone() });
        }
    }
    out
}

/// [`build_quiver`] gated on the partial shape rules.
pub fn build_quiver_partial(a: &Angulation) -> Result<BoundQuiver, Vec<PartialViolation>> {
    let violations = validate_partial(a);
    if violations.is_empty() {
        Ok(build_quiver(a))
    } else {
        Err(violations)
    }
}

#[derive(Debug, Error)]
pub enum InflateError {
    #[error("inflation needs m at least 2 (a square already has 4 edges)")]
    SmallM,
    #[error("not an admissible partial triangulation: {0:?}")]
    BadPartial(Vec<PartialViolation>),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// Grows an admissible partial triangulation into a full
/// `(m+2)`-angulation of the same disc by padding each face's boundary
/// run with fresh marked points, inserted right after the run's starting
/// point. Arcs, corners, and hence the quiver are untouched.
pub fn inflate(a: &Angulation, m: usize) -> Result<Angulation, InflateError> {
    if m < 2 {
        return Err(InflateError::SmallM);
    }
    let violations = validate_partial(a);
    if !violations.is_empty() {
        return Err(InflateError::BadPartial(violations));
    }

    // Insertions per boundary edge: fresh points going right after that
    // edge's tail point. Keyed by (component, position).
    let mut insertions: Vec<Vec<Vec<String>>> = a
        .components()
        .iter()
        .map(|c| vec![Vec::new(); c.points.len()])
        .collect();
    let existing: std::collections::HashSet<&String> = a.point_names().iter().collect();
    let mut counter = 0usize;
    let mut next_fresh = || {
        loop {
            let name = format!("fresh{counter}");
            counter += 1;
            if !existing.contains(&name) {
                return name;
            }
        }
    };
    for f in a.faces() {
        let need = (m + 2) - f.walk.len();
        if need == 0 {
            continue;
        }
        let len = f.walk.len();
        // The face's single boundary run starts at the first boundary edge
        // preceded by an arc; a face that is all boundary anchors at its
        // first edge.
        let anchor = (0..len)
            .find(|&i| {
                matches!(f.walk[i], EdgeRef::Boundary { .. })
                    && matches!(f.walk[(i + len - 1) % len], EdgeRef::Arc { .. })
            })
            .unwrap_or(0);
        if let EdgeRef::Boundary { comp, pos } = f.walk[anchor] {
            insertions[comp][pos] = (0..need).map(|_| next_fresh()).collect();
        }
    }

    let mut points = a.point_names().to_vec();
    let mut components = Vec::new();
    // old (comp, pos) -> new pos of the same point
    let mut pos_map: Vec<Vec<usize>> = Vec::new();
    for (ci, c) in a.components().iter().enumerate() {
        let mut new_points = Vec::new();
        let mut map = Vec::new();
        for (pi, &p) in c.points.iter().enumerate() {
            map.push(new_points.len());
            new_points.push(p);
            for name in &insertions[ci][pi] {
                new_points.push(points.len());
                points.push(name.clone());
            }
        }
        pos_map.push(map);
        components.push(Component {
            name: c.name.clone(),
            points: new_points,
        });
    }

    let faces: Vec<Face> = a
        .faces()
        .iter()
        .map(|f| Face {
            id: f.id.clone(),
            walk: f
                .walk
                .iter()
                .flat_map(|&e| match e {
                    EdgeRef::Arc { .. } => vec![e],
                    EdgeRef::Boundary { comp, pos } => {
                        let start = pos_map[comp][pos];
                        (0..=insertions[comp][pos].len())
                            .map(|k| EdgeRef::Boundary {
                                comp,
                                pos: start + k,
                            })
                            .collect()
                    }
                })
                .collect(),
        })
        .collect();

    Ok(Angulation::new_angulation(
        m,
        points,
        components,
        a.arcs().to_vec(),
        faces,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::samples;
    use crate::surface::disc_angulation;

    fn arrow_pairs(q: &BoundQuiver) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = q
            .arrows()
            .iter()
            .map(|a| {
                (
                    q.vertex_name(a.source).to_string(),
                    q.vertex_name(a.target).to_string(),
                )
            })
            .collect();
        out.sort();
        out
    }

    fn relation_pairs(q: &BoundQuiver) -> Vec<((String, String), (String, String))> {
        let mut out: Vec<_> = q
            .relations()
            .map(|(x, y)| {
                let a = q.arrow(x);
                let b = q.arrow(y);
                (
                    (
                        q.vertex_name(a.source).to_string(),
                        q.vertex_name(a.target).to_string(),
                    ),
                    (
                        q.vertex_name(b.source).to_string(),
                        q.vertex_name(b.target).to_string(),
                    ),
                )
            })
            .collect();
        out.sort();
        out
    }

    fn pair(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    #[test]
    fn d2_quiver_is_the_a7_gentle_algebra() {
        let q = build_quiver(&samples::d2());
        assert_eq!(
            q.vertex_names(),
            ["t1", "t2", "t3", "t4", "t5", "t6", "t7"]
        );
        assert_eq!(
            arrow_pairs(&q),
            vec![
                pair("t1", "t2"),
                pair("t2", "t3"),
                pair("t4", "t3"),
                pair("t5", "t4"),
                pair("t5", "t6"),
                pair("t6", "t7"),
            ]
        );
        assert_eq!(
            relation_pairs(&q),
            vec![
                (pair("t1", "t2"), pair("t2", "t3")),
                (pair("t5", "t6"), pair("t6", "t7")),
            ]
        );
        assert!(crate::quiver::validate_gentle(&q).is_empty());
    }

    #[test]
    fn annulus_quiver_is_a3_with_one_relation() {
        let q = build_quiver(&samples::annulus());
        assert_eq!(q.vertex_names(), ["t1", "t2", "t3"]);
        assert_eq!(arrow_pairs(&q), vec![pair("t1", "t2"), pair("t2", "t3")]);
        assert_eq!(
            relation_pairs(&q),
            vec![(pair("t1", "t2"), pair("t2", "t3"))]
        );
        // Corner names pin down where the arrows live on the surface.
        let ids: Vec<&str> = q.arrows().iter().map(|a| a.id.as_str()).collect();
        assert_eq!(ids, ["o.0:t1-:t2+", "o.3:t2+:t3+"]);
    }

    #[test]
    fn pinwheel_quiver_is_a_full_relation_cycle() {
        let q = build_quiver(&samples::hexagon_pinwheel());
        assert_eq!(
            arrow_pairs(&q),
            vec![pair("t1", "t2"), pair("t2", "t3"), pair("t3", "t1")]
        );
        assert_eq!(q.relation_count(), 3);
        assert!(crate::quiver::validate_gentle(&q).is_empty());
    }

    #[test]
    fn pentagon_fan_quiver_is_a2() {
        let a = disc_angulation(1, 5, &[(0, 2), (0, 3)]).unwrap();
        let q = build_quiver(&a);
        assert_eq!(arrow_pairs(&q), vec![pair("t2", "t1")]);
        assert_eq!(q.relation_count(), 0);
    }

    #[test]
    fn four_circles_quiver_has_no_relations() {
        let q = build_quiver(&samples::four_circles());
        assert_eq!(
            arrow_pairs(&q),
            vec![
                pair("t2", "t1"),
                pair("t2", "t3"),
                pair("t4", "t1"),
                pair("t4", "t3"),
            ]
        );
        assert_eq!(q.relation_count(), 0);
        assert!(crate::quiver::validate_gentle(&q).is_empty());
    }

    #[test]
    fn partial_quiver_of_the_fan_square_disc() {
        let p = samples::p1_partial();
        let q = build_quiver_partial(&p).unwrap();
        assert_eq!(q.vertex_names(), ["t1", "t2", "t3", "t4"]);
        assert_eq!(
            arrow_pairs(&q),
            vec![pair("t2", "t1"), pair("t3", "t2"), pair("t4", "t3")]
        );
        assert_eq!(
            relation_pairs(&q),
            vec![(pair("t4", "t3"), pair("t3", "t2"))]
        );
        assert!(crate::quiver::validate_gentle(&q).is_empty());
    }

    #[test]
    fn partial_shape_rules_are_enforced() {
        // The pinwheel triangulation, reinterpreted as a partial
        // triangulation, has an internal triangle.
        let points: Vec<String> = (0..6).map(|p| p.to_string()).collect();
        let components = vec![Component {
            name: "c0".into(),
            points: (0..6).collect(),
        }];
        let arcs = samples::hexagon_pinwheel().arcs().to_vec();
        let b = |pos: usize| EdgeRef::Boundary { comp: 0, pos };
        let fwd = |arc: usize| EdgeRef::Arc { arc, forward: true };
        let bwd = |arc: usize| EdgeRef::Arc {
            arc,
            forward: false,
        };
        let faces = vec![
            Face {
                id: "F1".into(),
                walk: vec![b(0), b(1), bwd(0)],
            },
            Face {
                id: "F2".into(),
                walk: vec![b(2), b(3), bwd(1)],
            },
            Face {
                id: "F3".into(),
                walk: vec![b(4), b(5), bwd(2)],
            },
            Face {
                id: "F4".into(),
                walk: vec![fwd(0), fwd(1), fwd(2)],
            },
        ];
        let p = Angulation::new_partial(points, components, arcs, faces).unwrap();
        assert_eq!(
            validate_partial(&p),
            vec![PartialViolation::InternalTriangle { face: "F4".into() }]
        );
        assert!(build_quiver_partial(&p).is_err());

        // An annulus-shaped partial triangulation is rejected as well.
        let text = crate::surface::serialize_angulation(&samples::annulus())
            .replace("angulation surface\nm 2\n", "angulation partial\n");
        let ann = crate::surface::parse_angulation(&text).unwrap();
        let v = validate_partial(&ann);
        assert!(v.contains(&PartialViolation::NotADisc));
        assert_eq!(
            validate_partial(&samples::d2()),
            vec![PartialViolation::NotPartial]
        );
    }

    #[test]
    fn inflation_preserves_the_quiver_literally() {
        let p = samples::p1_partial();
        let base = build_quiver_partial(&p).unwrap();
        for m in 2..=6 {
            let full = inflate(&p, m).unwrap();
            assert!(!full.is_partial());
            assert_eq!(full.m(), m);
            assert_eq!(full.arcs(), p.arcs());
            assert_eq!(build_quiver(&full), base);
        }
    }

    #[test]
    fn inflation_point_counts_and_distribution() {
        let p = samples::p1_partial();
        let m3 = inflate(&p, 3).unwrap();
        assert_eq!(m3.point_count(), 17);
        // Gains per face in face order: triangles need 2, the square 1.
        let gains: Vec<usize> = m3
            .faces()
            .iter()
            .zip(p.faces())
            .map(|(nf, of)| nf.walk.len() - of.walk.len())
            .collect();
        assert_eq!(gains, [2, 2, 1, 2, 2]);
        let m2 = inflate(&p, 2).unwrap();
        assert_eq!(m2.point_count(), 12);
        assert!(inflate(&p, 1).is_err());
        assert!(inflate(&samples::d2(), 3).is_err());
    }

    #[test]
    fn inflated_triangulation_is_a_valid_angulation() {
        let p = samples::p1_partial();
        for m in 2..=4 {
            let full = inflate(&p, m).unwrap();
            assert!(full.is_disc());
            assert_eq!(full.faces().len(), 5);
            assert_eq!(full.point_count(), 4 * m + m + 2);
            assert!(!full.is_degenerate());
        }
    }
}
