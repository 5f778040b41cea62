//! Boundary-bridge surgery and the closed-form invariant.
//!
//! A face of an `(m+2)`-angulation is *degenerate* when its walk touches
//! the boundary in two or more separate runs; such a face bridges parts of
//! the boundary that the closed formula would otherwise count separately.
//! [`remove_boundary_bridges`] cuts every degenerate face along its arc
//! runs into non-degenerate faces, padding each piece with fresh marked
//! points. The surgery leaves arcs and corners — and hence the quiver —
//! untouched, while the boundary circles reconnect, so the per-component
//! counts become meaningful. [`merge_inverse_bridge`] performs the reverse
//! surgery and is used to manufacture degenerate test instances.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::quiver::AgFunction;
use crate::surface::{Angulation, Component, EdgeRef, Face, SurfaceError};

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("this operation needs a full angulation, not a partial triangulation")]
    PartialInput,
    #[error("unknown face {0:?}")]
    UnknownFace(String),
    #[error("infeasible surgery: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// A point of the surface being rebuilt: either an existing point or the
/// `k`-th freshly created one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum P {
    Old(usize),
    Fresh(usize),
}

/// An edge of a face under construction; boundary positions are not known
/// until the circles are rebuilt, so boundary edges carry their tail point.
#[derive(Clone, Copy, Debug)]
enum ProtoEdge {
    Arc { arc: usize, forward: bool },
    Link(P),
}

/// Replaces faces and boundary structure in one pass: removes the given
/// boundary edges and interior points, adds fresh points and successor
/// links, rebuilds the circles from the surviving links, and re-addresses
/// every boundary reference.
struct Surgery<'a> {
    a: &'a Angulation,
    deleted_edges: HashSet<(usize, usize)>,
    deleted_points: HashSet<usize>,
    fresh_names: Vec<String>,
    links: Vec<(P, P)>,
    /// face index -> replacement faces (empty vec = plain removal)
    replacements: BTreeMap<usize, Vec<(String, Vec<ProtoEdge>)>>,
}

impl<'a> Surgery<'a> {
    fn new(a: &'a Angulation) -> Self {
        Surgery {
            a,
            deleted_edges: HashSet::new(),
            deleted_points: HashSet::new(),
            fresh_names: Vec::new(),
            links: Vec::new(),
            replacements: BTreeMap::new(),
        }
    }

    /// Deletes a boundary run (edges from `start_pos`, `edge_count` of
    /// them) together with its interior points.
    fn delete_run(&mut self, comp: usize, start_pos: usize, edge_count: usize) {
        let size = self.a.components()[comp].points.len();
        for k in 0..edge_count {
            self.deleted_edges.insert((comp, (start_pos + k) % size));
        }
        for k in 1..edge_count {
            self.deleted_points
                .insert(self.a.components()[comp].points[(start_pos + k) % size]);
        }
    }

    fn fresh(&mut self, name: String) -> P {
        self.fresh_names.push(name);
        P::Fresh(self.fresh_names.len() - 1)
    }

    fn apply(self) -> Result<Angulation, SurfaceError> {
        let a = self.a;
        // New global point table: surviving old points, then fresh ones.
        let mut points = Vec::new();
        let mut old_map: HashMap<usize, usize> = HashMap::new();
        for (p, name) in a.point_names().iter().enumerate() {
            if !self.deleted_points.contains(&p) {
                old_map.insert(p, points.len());
                points.push(name.clone());
            }
        }
        let fresh_base = points.len();
        points.extend(self.fresh_names.iter().cloned());
        let resolve = |p: P| match p {
            P::Old(q) => old_map[&q],
            P::Fresh(k) => fresh_base + k,
        };
        // Successor permutation on the new points.
        let mut succ: HashMap<usize, usize> = HashMap::new();
        for (ci, c) in a.components().iter().enumerate() {
            for pos in 0..c.points.len() {
                if self.deleted_edges.contains(&(ci, pos)) {
                    continue;
                }
                let tail = old_map[&c.points[pos]];
                let head = old_map[&c.points[(pos + 1) % c.points.len()]];
                let prev = succ.insert(tail, head);
                debug_assert!(prev.is_none());
            }
        }
        for &(tail, head) in &self.links {
            let prev = succ.insert(resolve(tail), resolve(head));
            debug_assert!(prev.is_none(), "surgery links collide with surviving edges");
        }
        // Rebuild the circles. Points are keyed so circles come out in a
        // reproducible order and rotation: old points by their original
        // circle position, fresh points after them by creation order.
        let key = |p: usize| -> (usize, usize, usize) {
            if p < fresh_base {
                let orig = a
                    .point_names()
                    .iter()
                    .position(|n| n == &points[p])
                    .expect("surviving point keeps its name");
                let (ci, pos) = a.point_location(orig);
                (0, ci, pos)
            } else {
                (1, p - fresh_base, 0)
            }
        };
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by_key(|&p| key(p));
        let mut seen = vec![false; points.len()];
        let mut components = Vec::new();
        let mut where_is: HashMap<usize, (usize, usize)> = HashMap::new();
        for &start in &order {
            if seen[start] {
                continue;
            }
            let mut circle = Vec::new();
            let mut cur = start;
            loop {
                seen[cur] = true;
                where_is.insert(cur, (components.len(), circle.len()));
                circle.push(cur);
                cur = *succ
                    .get(&cur)
                    .expect("every surviving point keeps a successor");
                if cur == start {
                    break;
                }
            }
            components.push(Component {
                name: format!("c{}", components.len()),
                points: circle,
            });
        }
        // Assemble the face list: untouched faces are re-addressed in
        // place, replaced faces expand into their new pieces.
        let remap = |e: EdgeRef| match e {
            EdgeRef::Arc { .. } => e,
            EdgeRef::Boundary { comp, pos } => {
                debug_assert!(!self.deleted_edges.contains(&(comp, pos)));
                let tail = old_map[&a.components()[comp].points[pos]];
                let (nc, np) = where_is[&tail];
                EdgeRef::Boundary { comp: nc, pos: np }
            }
        };
        let arcs: Vec<crate::surface::Arc> = a
            .arcs()
            .iter()
            .map(|x| crate::surface::Arc {
                id: x.id.clone(),
                ends: (old_map[&x.ends.0], old_map[&x.ends.1]),
            })
            .collect();
        let mut faces = Vec::new();
        for (fi, f) in a.faces().iter().enumerate() {
            match self.replacements.get(&fi) {
                None => faces.push(Face {
                    id: f.id.clone(),
                    walk: f.walk.iter().map(|&e| remap(e)).collect(),
                }),
                Some(pieces) => {
                    for (id, proto) in pieces {
                        let walk = proto
                            .iter()
                            .map(|&pe| match pe {
                                ProtoEdge::Arc { arc, forward } => EdgeRef::Arc { arc, forward },
                                ProtoEdge::Link(p) => {
                                    let (nc, np) = where_is[&resolve(p)];
                                    EdgeRef::Boundary { comp: nc, pos: np }
                                }
                            })
                            .collect();
                        faces.push(Face {
                            id: id.clone(),
                            walk,
                        });
                    }
                }
            }
        }
        Angulation::new_angulation(a.m(), points, components, arcs, faces)
    }
}

/// Splits a face walk, rotated to start on an arc that follows a boundary
/// edge, into alternating (arc run, boundary run) groups.
fn alternating_runs(walk: &[EdgeRef]) -> Vec<(Vec<(usize, bool)>, Vec<(usize, usize)>)> {
    let len = walk.len();
    let start = (0..len)
        .find(|&i| {
            matches!(walk[i], EdgeRef::Arc { .. })
                && matches!(walk[(i + len - 1) % len], EdgeRef::Boundary { .. })
        })
        .expect("walk has both arcs and boundary edges");
    let rotated: Vec<EdgeRef> = (0..len).map(|k| walk[(start + k) % len]).collect();
    let mut groups = Vec::new();
    let mut i = 0;
    while i < len {
        let mut arcs = Vec::new();
        while i < len {
            match rotated[i] {
                EdgeRef::Arc { arc, forward } => {
                    arcs.push((arc, forward));
                    i += 1;
                }
                EdgeRef::Boundary { .. } => break,
            }
        }
        let mut bnd = Vec::new();
        while i < len {
            match rotated[i] {
                EdgeRef::Boundary { comp, pos } => {
                    bnd.push((comp, pos));
                    i += 1;
                }
                EdgeRef::Arc { .. } => break,
            }
        }
        groups.push((arcs, bnd));
    }
    groups
}

struct FreshNames {
    taken: HashSet<String>,
    counter: usize,
}

impl FreshNames {
    fn new(a: &Angulation) -> Self {
        FreshNames {
            taken: a.point_names().iter().cloned().collect(),
            counter: 0,
        }
    }

    fn next(&mut self) -> String {
        loop {
            let name = format!("fresh{}", self.counter);
            self.counter += 1;
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }
}

fn unique_face_id(taken: &mut HashSet<String>, base: String) -> String {
    let mut id = base;
    while !taken.insert(id.clone()) {
        id.push('x');
    }
    id
}

/// Cuts every degenerate face along its arc runs. Each arc run of `k`
/// arcs becomes its own `(m+2)`-gon, closed off by a fresh boundary run
/// with `m + 1 - k` interior points; the bridged boundary runs disappear.
/// Non-degenerate angulations come back unchanged, so the operation is
/// idempotent, and the quiver of the result is literally the input's.
pub fn remove_boundary_bridges(a: &Angulation) -> Result<Angulation, BridgeError> {
    if a.is_partial() {
        return Err(BridgeError::PartialInput);
    }
    let degenerate = a.degenerate_faces();
    if degenerate.is_empty() {
        return Ok(a.clone());
    }
    let m = a.m();
    let mut surgery = Surgery::new(a);
    let mut fresh = FreshNames::new(a);
    let mut face_ids: HashSet<String> = a.faces().iter().map(|f| f.id.clone()).collect();
    for &fi in &degenerate {
        face_ids.remove(&a.faces()[fi].id);
    }
    for &fi in &degenerate {
        let face = &a.faces()[fi];
        let groups = alternating_runs(&face.walk);
        let mut pieces = Vec::new();
        for (part, (arcs, bnd)) in groups.iter().enumerate() {
            debug_assert!(!arcs.is_empty() && !bnd.is_empty());
            let (comp, start_pos) = bnd[0];
            surgery.delete_run(comp, start_pos, bnd.len());
            let k = arcs.len();
            debug_assert!(k <= m, "an arc run of a degenerate face spans at most m arcs");
            let interior = m + 1 - k;
            let first = EdgeRef::Arc {
                arc: arcs[0].0,
                forward: arcs[0].1,
            };
            let last = EdgeRef::Arc {
                arc: arcs[k - 1].0,
                forward: arcs[k - 1].1,
            };
            let mut walk: Vec<ProtoEdge> = arcs
                .iter()
                .map(|&(arc, forward)| ProtoEdge::Arc { arc, forward })
                .collect();
            // Fresh boundary run from the run's head back to its tail.
            let mut tail = P::Old(a.edge_head(last));
            for _ in 0..interior {
                walk.push(ProtoEdge::Link(tail));
                let f = surgery.fresh(fresh.next());
                surgery.links.push((tail, f));
                tail = f;
            }
            walk.push(ProtoEdge::Link(tail));
            surgery.links.push((tail, P::Old(a.edge_tail(first))));
            let id = if part == 0 {
                unique_face_id(&mut face_ids, face.id.clone())
            } else {
                unique_face_id(&mut face_ids, format!("{}_{}", face.id, part + 1))
            };
            pieces.push((id, walk));
        }
        surgery.replacements.insert(fi, pieces);
    }
    Ok(surgery.apply()?)
}

/// The closed-form invariant: after bridge removal, each internal face
/// contributes `(0, m+2)`, and every boundary circle carrying arc
/// endpoints contributes one pair `(a_i, b_i)` — its arc-incident point
/// count and the sum of `m - w` over its boundary runs.
pub fn ag_invariant_formula(a: &Angulation) -> Result<AgFunction, BridgeError> {
    if a.is_partial() {
        return Err(BridgeError::PartialInput);
    }
    let bridged = remove_boundary_bridges(a)?;
    per_component_counts(&bridged)
}

/// The same counts read off without removing boundary bridges first; on
/// degenerate angulations this is exactly the computation the bridge
/// removal step exists to correct.
pub fn naive_per_component(a: &Angulation) -> Result<AgFunction, BridgeError> {
    if a.is_partial() {
        return Err(BridgeError::PartialInput);
    }
    per_component_counts(a)
}

fn per_component_counts(a: &Angulation) -> Result<AgFunction, BridgeError> {
    let m = a.m();
    let mut out = AgFunction::new();
    for _ in 0..a.internal_face_count() {
        out.add((0, m + 2));
    }
    let mt = a.arc_incident_points();
    let segments = a.boundary_segments();
    for (ci, set) in mt.iter().enumerate() {
        if set.is_empty() {
            continue;
        }
        let mut b = 0usize;
        for s in segments.iter().filter(|s| s.component == ci) {
            if s.weight > m {
                return Err(BridgeError::Infeasible(format!(
                    "boundary run of weight {} exceeds m = {} on component {}",
                    s.weight,
                    m,
                    a.components()[ci].name
                )));
            }
            b += m - s.weight;
        }
        out.add((set.len(), b));
    }
    Ok(out)
}

/// Reverse surgery: welds the selected faces — each with a single
/// boundary run — into one degenerate face. The walk alternates the
/// faces' arc runs with fresh boundary runs of the given interior
/// weights; feasibility requires `Σ kᵢ + Σ (wᵢ + 1) = m + 2`. Arcs and
/// corners are untouched, so the quiver and the closed formula are
/// invariant under this mutation.
pub fn merge_inverse_bridge(
    a: &Angulation,
    face_ids: &[&str],
    weights: &[usize],
) -> Result<Angulation, BridgeError> {
    if a.is_partial() {
        return Err(BridgeError::PartialInput);
    }
    let r = face_ids.len();
    if r < 2 || weights.len() != r {
        return Err(BridgeError::Infeasible(format!(
            "need at least two faces and one weight per face; got {} faces, {} weights",
            r,
            weights.len()
        )));
    }
    let mut indices = Vec::with_capacity(r);
    for id in face_ids {
        let fi = a
            .face_index(id)
            .ok_or_else(|| BridgeError::UnknownFace(id.to_string()))?;
        if indices.contains(&fi) {
            return Err(BridgeError::Infeasible(format!("face {id} selected twice")));
        }
        indices.push(fi);
    }
    let segments = a.boundary_segments();
    let mut runs = Vec::with_capacity(r);
    for &fi in &indices {
        let owned: Vec<_> = segments.iter().filter(|s| s.face == fi).collect();
        if owned.len() != 1 {
            return Err(BridgeError::Infeasible(format!(
                "face {} owns {} boundary runs; the merge needs exactly one",
                a.faces()[fi].id,
                owned.len()
            )));
        }
        let groups = alternating_runs(&a.faces()[fi].walk);
        debug_assert_eq!(groups.len(), 1);
        runs.push(groups.into_iter().next().unwrap());
    }
    let total_arcs: usize = runs.iter().map(|(arcs, _)| arcs.len()).sum();
    let total_fresh: usize = weights.iter().map(|w| w + 1).sum();
    if total_arcs + total_fresh != a.m() + 2 {
        return Err(BridgeError::Infeasible(format!(
            "merged walk would have {} edges; an {}-angulation needs {}",
            total_arcs + total_fresh,
            a.m() + 2,
            a.m() + 2
        )));
    }
    let mut surgery = Surgery::new(a);
    let mut fresh = FreshNames::new(a);
    let mut walk = Vec::new();
    for (i, (arcs, bnd)) in runs.iter().enumerate() {
        let (comp, start_pos) = bnd[0];
        surgery.delete_run(comp, start_pos, bnd.len());
        walk.extend(
            arcs.iter()
                .map(|&(arc, forward)| ProtoEdge::Arc { arc, forward }),
        );
        let last = EdgeRef::Arc {
            arc: arcs[arcs.len() - 1].0,
            forward: arcs[arcs.len() - 1].1,
        };
        let next_arcs = &runs[(i + 1) % r].0;
        let next_first = EdgeRef::Arc {
            arc: next_arcs[0].0,
            forward: next_arcs[0].1,
        };
        let mut tail = P::Old(a.edge_head(last));
        for _ in 0..weights[i] {
            walk.push(ProtoEdge::Link(tail));
            let f = surgery.fresh(fresh.next());
            surgery.links.push((tail, f));
            tail = f;
        }
        walk.push(ProtoEdge::Link(tail));
        surgery.links.push((tail, P::Old(a.edge_tail(next_first))));
    }
    let primary = indices[0];
    surgery
        .replacements
        .insert(primary, vec![(a.faces()[primary].id.clone(), walk)]);
    for &fi in &indices[1..] {
        surgery.replacements.insert(fi, Vec::new());
    }
    Ok(surgery.apply()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build::{build_quiver, inflate};
    use crate::surface::samples;
    use crate::surface::{disc_angulation, parse_angulation, serialize_angulation};
    use crate::walk::ag_invariant_direct;

    fn ag(pairs: &[(usize, usize)]) -> AgFunction {
        AgFunction::from_pairs(pairs)
    }

    #[test]
    fn bridging_is_identity_on_non_degenerate_input() {
        let a = samples::d2();
        assert_eq!(remove_boundary_bridges(&a).unwrap(), a);
        let hex = samples::hexagon_pinwheel();
        assert_eq!(remove_boundary_bridges(&hex).unwrap(), hex);
    }

    #[test]
    fn bridged_annulus_is_a_ten_point_disc() {
        let a = samples::annulus();
        let b = remove_boundary_bridges(&a).unwrap();
        assert_eq!(b.components().len(), 1);
        assert_eq!(b.components()[0].points.len(), 10);
        assert!(b.is_disc());
        assert!(!b.is_degenerate());
        let circle: Vec<&str> = b.components()[0]
            .points
            .iter()
            .map(|&p| b.point_name(p))
            .collect();
        assert_eq!(
            circle,
            ["o.0", "o.1", "o.2", "o.3", "fresh2", "fresh3", "i.0", "i.1", "fresh0", "fresh1"]
        );
        let weights: Vec<usize> = b.boundary_segments().iter().map(|s| s.weight).collect();
        assert_eq!(weights, [2, 2, 0, 2]);
        // The surgery is idempotent and preserves the quiver literally.
        assert_eq!(remove_boundary_bridges(&b).unwrap(), b);
        assert_eq!(build_quiver(&b), build_quiver(&a));
    }

    #[test]
    fn annulus_formula_and_naive_counts() {
        let a = samples::annulus();
        assert_eq!(ag_invariant_formula(&a).unwrap(), ag(&[(4, 2)]));
        assert_eq!(naive_per_component(&a).unwrap(), ag(&[(2, 2), (2, 4)]));
        assert_eq!(
            ag_invariant_direct(&build_quiver(&a)).unwrap(),
            ag(&[(4, 2)])
        );
    }

    #[test]
    fn formula_matches_direct_on_reference_surfaces() {
        let d2 = samples::d2();
        assert_eq!(ag_invariant_formula(&d2).unwrap(), ag(&[(8, 6)]));
        assert_eq!(
            ag_invariant_direct(&build_quiver(&d2)).unwrap(),
            ag(&[(8, 6)])
        );

        let hex = samples::hexagon_pinwheel();
        assert_eq!(ag_invariant_formula(&hex).unwrap(), ag(&[(3, 0), (0, 3)]));
        assert_eq!(
            ag_invariant_direct(&build_quiver(&hex)).unwrap(),
            ag(&[(3, 0), (0, 3)])
        );

        let four = samples::four_circles();
        assert_eq!(
            ag_invariant_formula(&four).unwrap(),
            ag(&[(2, 2), (2, 2)])
        );
        assert_eq!(
            ag_invariant_direct(&build_quiver(&four)).unwrap(),
            ag(&[(2, 2), (2, 2)])
        );
    }

    #[test]
    fn four_circles_bridge_to_two_discs() {
        let four = samples::four_circles();
        let b = remove_boundary_bridges(&four).unwrap();
        assert_eq!(b.components().len(), 2);
        assert!(b.components().iter().all(|c| c.points.len() == 8));
        assert!(!b.is_degenerate());
        assert_eq!(build_quiver(&b), build_quiver(&four));
        assert_eq!(ag_invariant_formula(&b).unwrap(), ag(&[(2, 2), (2, 2)]));
    }

    #[test]
    fn degenerate_octagon_splits_into_two_single_arc_discs() {
        let a = disc_angulation(2, 8, &[(0, 3), (4, 7)]).unwrap();
        assert!(a.is_degenerate());
        let b = remove_boundary_bridges(&a).unwrap();
        assert_eq!(b.components().len(), 2);
        assert!(b.components().iter().all(|c| c.points.len() == 6));
        assert_eq!(b.faces().len(), 4);
        assert_eq!(ag_invariant_formula(&a).unwrap(), ag(&[(2, 0), (2, 0)]));
        assert_eq!(naive_per_component(&a).unwrap(), ag(&[(4, 4)]));
    }

    #[test]
    fn formula_is_invariant_under_inflation() {
        let p = samples::p1_partial();
        for m in 2..=6 {
            let full = inflate(&p, m).unwrap();
            assert_eq!(ag_invariant_formula(&full).unwrap(), ag(&[(5, 3)]));
            assert_eq!(
                ag_invariant_direct(&build_quiver(&full)).unwrap(),
                ag(&[(5, 3)])
            );
        }
    }

    #[test]
    fn merge_welds_two_faces_into_a_degenerate_one() {
        // A hexagon split by one chord; merging its two faces turns the
        // disc into an annulus with one marked point per circle.
        let a = disc_angulation(2, 6, &[(0, 3)]).unwrap();
        let merged = merge_inverse_bridge(&a, &["F1", "F2"], &[0, 0]).unwrap();
        assert_eq!(merged.components().len(), 2);
        assert!(merged
            .components()
            .iter()
            .all(|c| c.points.len() == 1));
        assert_eq!(merged.faces().len(), 1);
        assert!(merged.is_degenerate());
        assert_eq!(build_quiver(&merged), build_quiver(&a));
        assert_eq!(
            ag_invariant_formula(&merged).unwrap(),
            ag_invariant_formula(&a).unwrap()
        );
        // Bridging the merged surface restores a 6-point disc.
        let back = remove_boundary_bridges(&merged).unwrap();
        assert!(back.is_disc());
        assert_eq!(back.point_count(), 6);
        assert!(!back.is_degenerate());
        assert_eq!(build_quiver(&back), build_quiver(&a));
    }

    #[test]
    fn merge_rejects_infeasible_selections() {
        let a = disc_angulation(2, 6, &[(0, 3)]).unwrap();
        assert!(merge_inverse_bridge(&a, &["F1"], &[0]).is_err());
        assert!(merge_inverse_bridge(&a, &["F1", "F1"], &[0, 0]).is_err());
        assert!(merge_inverse_bridge(&a, &["F1", "nope"], &[0, 0]).is_err());
        // Weights must land the walk exactly on m + 2 edges.
        assert!(merge_inverse_bridge(&a, &["F1", "F2"], &[1, 0]).is_err());
        // Internal faces own no boundary run.
        let hex = samples::hexagon_pinwheel();
        let internal = hex
            .faces()
            .iter()
            .find(|f| f.walk.iter().all(|e| matches!(e, EdgeRef::Arc { .. })))
            .unwrap();
        assert!(merge_inverse_bridge(&hex, &[&internal.id, "F1"], &[0, 0]).is_err());
    }

    #[test]
    fn bridged_surfaces_serialize_and_reparse() {
        let b = remove_boundary_bridges(&samples::annulus()).unwrap();
        let text = serialize_angulation(&b);
        assert!(text.starts_with("angulation disc\nm 2\npoints 10\n"));
        let again = parse_angulation(&text).unwrap();
        assert_eq!(again.point_count(), 10);
        assert_eq!(
            ag_invariant_formula(&again).unwrap(),
            ag_invariant_formula(&b).unwrap()
        );
    }

    #[test]
    fn partial_input_is_rejected() {
        let p = samples::p1_partial();
        assert!(matches!(
            remove_boundary_bridges(&p),
            Err(BridgeError::PartialInput)
        ));
        assert!(matches!(
            ag_invariant_formula(&p),
            Err(BridgeError::PartialInput)
        ));
    }
}
