//! Threads of a gentle bound quiver and the sign functions on them.
//!
//! A *permitted thread* is a maximal path that avoids the relations; a
//! *forbidden thread* is a maximal path whose every consecutive pair is a
//! relation, with pairwise-distinct arrows. On top of the nontrivial ones,
//! each vertex with at most one incoming and at most one outgoing arrow
//! carries trivial threads: a permitted `h_x` when the in/out composition is
//! not a relation (or an arrow is missing), a forbidden `p_x` when it is a
//! relation (or an arrow is missing). An oriented cycle all of whose turns
//! are relations shows up as a family of cyclic forbidden threads, one per
//! rotation; these stay out of the thread pairing and are reported
//! separately.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::quiver::{least_rotation, BoundQuiver};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ThreadKind {
    Permitted,
    Forbidden,
}

/// A permitted or forbidden thread. Trivial threads carry no arrows and sit
/// at a single vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Thread {
    pub kind: ThreadKind,
    arrows: Vec<usize>,
    start: usize,
    end: usize,
    /// True for the rotations of a full-relation cycle.
    pub cyclic: bool,
}

impl Thread {
    fn trivial(kind: ThreadKind, vertex: usize) -> Self {
        Thread {
            kind,
            arrows: Vec::new(),
            start: vertex,
            end: vertex,
            cyclic: false,
        }
    }

    fn nontrivial(kind: ThreadKind, arrows: Vec<usize>, bq: &BoundQuiver, cyclic: bool) -> Self {
        let start = bq.arrow(arrows[0]).source;
        let end = bq.arrow(*arrows.last().unwrap()).target;
        Thread {
            kind,
            arrows,
            start,
            end,
            cyclic,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.arrows.is_empty()
    }

    /// Number of arrows.
    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }

    pub fn arrows(&self) -> &[usize] {
        &self.arrows
    }

    pub fn source(&self) -> usize {
        self.start
    }

    pub fn target(&self) -> usize {
        self.end
    }

    /// Sort key implementing the canonical thread order: start vertex, then
    /// first arrow (trivial threads first), then length.
    pub fn sort_key(&self) -> (usize, Option<usize>, usize) {
        (self.start, self.arrows.first().copied(), self.arrows.len())
    }

    /// Human-readable name: `h_x`/`p_x` for trivial threads, the
    /// space-separated arrow ids otherwise.
    pub fn label(&self, bq: &BoundQuiver) -> String {
        if self.is_trivial() {
            let prefix = match self.kind {
                ThreadKind::Permitted => "h",
                ThreadKind::Forbidden => "p",
            };
            format!("{}_{}", prefix, bq.vertex_name(self.start))
        } else {
            self.arrows
                .iter()
                .map(|&a| bq.arrow(a).id.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        }
    }
}

/// All threads of a quiver, plus its full-relation cycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreadSystem {
    /// Permitted threads in canonical order.
    pub permitted: Vec<Thread>,
    /// Forbidden threads in canonical order, cyclic rotations included.
    pub forbidden: Vec<Thread>,
    /// Full-relation cycles, each rotated to its least arrow.
    pub cycles: Vec<Vec<usize>>,
}

impl ThreadSystem {
    /// The forbidden threads that take part in the thread pairing: all but
    /// the rotations of full-relation cycles.
    pub fn pairable_forbidden(&self) -> impl Iterator<Item = &Thread> {
        self.forbidden.iter().filter(|f| !f.cyclic)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ThreadError {
    /// Maximal-path extension never terminates: an oriented cycle avoiding
    /// all relations. Such an algebra is infinite-dimensional, not gentle.
    #[error("arrows {} form an oriented cycle avoiding every relation; thread extension does not terminate", .0.join(" "))]
    PermittedCycle(Vec<String>),
    /// An arrow extends in more than one way (or a relation chain merges),
    /// which only happens when the quiver is not gentle.
    #[error("thread through arrow {0} is not unique; the quiver is not gentle")]
    Ambiguous(String),
}

/// Enumerates permitted threads, forbidden threads and full-relation cycles.
///
/// Expects a gentle quiver; on other input it either returns a meaningful
/// [`ThreadError`] or a thread set for whatever structure it could follow
/// uniquely.
pub fn enumerate_threads(bq: &BoundQuiver) -> Result<ThreadSystem, ThreadError> {
    let permitted_nontrivial = maximal_paths(
        bq,
        |a| bq.permitted_successors(a),
        |a| bq.permitted_predecessors(a),
    )?;
    let mut permitted: Vec<Thread> = permitted_nontrivial
        .covering
        .into_iter()
        .map(|arrows| Thread::nontrivial(ThreadKind::Permitted, arrows, bq, false))
        .collect();
    if let Some(cycle) = permitted_nontrivial.cycles.into_iter().next() {
        return Err(ThreadError::PermittedCycle(
            cycle.iter().map(|&a| bq.arrow(a).id.clone()).collect(),
        ));
    }

    let forbidden_nontrivial = maximal_paths(
        bq,
        |a| bq.forbidden_successors(a),
        |a| bq.forbidden_predecessors(a),
    )?;
    let mut forbidden: Vec<Thread> = forbidden_nontrivial
        .covering
        .into_iter()
        .map(|arrows| Thread::nontrivial(ThreadKind::Forbidden, arrows, bq, false))
        .collect();
    let cycles = forbidden_nontrivial.cycles;
    for cycle in &cycles {
        for k in 0..cycle.len() {
            let mut rotation = cycle[k..].to_vec();
            rotation.extend_from_slice(&cycle[..k]);
            forbidden.push(Thread::nontrivial(ThreadKind::Forbidden, rotation, bq, true));
        }
    }

    for x in 0..bq.vertex_count() {
        let ins = bq.incoming(x);
        let outs = bq.outgoing(x);
        if ins.len() > 1 || outs.len() > 1 {
            continue;
        }
        match (ins.first(), outs.first()) {
            (Some(&b), Some(&g)) => {
                if bq.in_relation(b, g) {
                    forbidden.push(Thread::trivial(ThreadKind::Forbidden, x));
                } else {
                    permitted.push(Thread::trivial(ThreadKind::Permitted, x));
                }
            }
            _ => {
                permitted.push(Thread::trivial(ThreadKind::Permitted, x));
                forbidden.push(Thread::trivial(ThreadKind::Forbidden, x));
            }
        }
    }

    permitted.sort_by_key(Thread::sort_key);
    forbidden.sort_by_key(Thread::sort_key);
    Ok(ThreadSystem {
        permitted,
        forbidden,
        cycles,
    })
}

struct PathCover {
    covering: Vec<Vec<usize>>,
    cycles: Vec<Vec<usize>>,
}

/// Partitions the arrows into maximal paths of the successor map, plus the
/// cycles on which no path starts. `succ`/`pred` must be inverse partial
/// maps with at most one value each (gentleness); anything else errors.
fn maximal_paths(
    bq: &BoundQuiver,
    succ: impl Fn(usize) -> Vec<usize>,
    pred: impl Fn(usize) -> Vec<usize>,
) -> Result<PathCover, ThreadError> {
    let n = bq.arrow_count();
    let mut covered = vec![false; n];
    let mut covering = Vec::new();
    let ambiguous = |a: usize| ThreadError::Ambiguous(bq.arrow(a).id.clone());
    for a in 0..n {
        let preds = pred(a);
        if preds.len() > 1 {
            return Err(ambiguous(a));
        }
        if !preds.is_empty() {
            continue;
        }
        let mut seq = vec![a];
        covered[a] = true;
        loop {
            let next = succ(*seq.last().unwrap());
            if next.len() > 1 {
                return Err(ambiguous(*seq.last().unwrap()));
            }
            match next.first() {
                None => break,
                Some(&s) if covered[s] => return Err(ambiguous(s)),
                Some(&s) => {
                    seq.push(s);
                    covered[s] = true;
                }
            }
        }
        covering.push(seq);
    }
    // Everything left sits on cycles of the successor map.
    let mut cycles = BTreeSet::new();
    for a in 0..n {
        if covered[a] {
            continue;
        }
        let mut seq = vec![a];
        covered[a] = true;
        loop {
            let next = succ(*seq.last().unwrap());
            if next.len() > 1 {
                return Err(ambiguous(*seq.last().unwrap()));
            }
            match next.first() {
                Some(&s) if s == a => break,
                Some(&s) if !covered[s] => {
                    seq.push(s);
                    covered[s] = true;
                }
                // Running into an already-covered arrow (or a dead end) means
                // two chains merged, which gentleness forbids.
                _ => return Err(ambiguous(*seq.last().unwrap())),
            }
        }
        cycles.insert(least_rotation(&seq));
    }
    Ok(PathCover {
        covering,
        cycles: cycles.into_iter().collect(),
    })
}

/// A choice of signs on arrows. Two functions σ, ε: arrows → {−1, +1}
/// subject to, for all arrows α, β:
///
/// 1. same source ⇒ σ(α) = −σ(β),
/// 2. same target ⇒ ε(α) = −ε(β),
/// 3. t(α) = s(β) and αβ not a relation ⇒ σ(β) = −ε(α),
/// 4. t(α) = s(β) and αβ a relation ⇒ σ(β) = ε(α).
///
/// Rule 4 pins ε where only a relation continues the path; without it the
/// thread pairing loses uniqueness at relation-only junctions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignAssignment {
    sigma: Vec<i8>,
    epsilon: Vec<i8>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("sign constraints around arrow {arrow} are contradictory; the quiver is not gentle")]
pub struct SignConflict {
    pub arrow: String,
}

impl SignAssignment {
    pub fn from_parts(sigma: Vec<i8>, epsilon: Vec<i8>) -> Self {
        SignAssignment { sigma, epsilon }
    }

    pub fn sigma(&self, arrow: usize) -> i8 {
        self.sigma[arrow]
    }

    pub fn epsilon(&self, arrow: usize) -> i8 {
        self.epsilon[arrow]
    }

    /// Negates σ and ε on the given arrows. Flipping a whole connected
    /// component preserves the constraints (each constraint couples arrows
    /// meeting at a vertex).
    pub fn flipped(&self, arrows: &[usize]) -> SignAssignment {
        let mut out = self.clone();
        for &a in arrows {
            out.sigma[a] = -out.sigma[a];
            out.epsilon[a] = -out.epsilon[a];
        }
        out
    }

    /// σ of a thread: sign of its first arrow; for trivial threads the
    /// value that makes the adjacent extension fail (out-arrow rule first).
    pub fn thread_sigma(&self, t: &Thread, bq: &BoundQuiver) -> i8 {
        if let Some(&first) = t.arrows().first() {
            return self.sigma[first];
        }
        let x = t.source();
        let out = bq.outgoing(x).first();
        let inn = bq.incoming(x).first();
        match t.kind {
            ThreadKind::Permitted => match (out, inn) {
                (Some(&g), _) => -self.sigma[g],
                (None, Some(&b)) => self.epsilon[b],
                (None, None) => 1,
            },
            ThreadKind::Forbidden => match (out, inn) {
                (Some(&g), _) => -self.sigma[g],
                (None, Some(&b)) => -self.epsilon[b],
                (None, None) => -1,
            },
        }
    }

    /// ε of a thread: sign of its last arrow; trivial threads satisfy
    /// ε(h_x) = −σ(h_x) and ε(p_x) = σ(p_x).
    pub fn thread_epsilon(&self, t: &Thread, bq: &BoundQuiver) -> i8 {
        if let Some(&last) = t.arrows().last() {
            return self.epsilon[last];
        }
        match t.kind {
            ThreadKind::Permitted => -self.thread_sigma(t, bq),
            ThreadKind::Forbidden => self.thread_sigma(t, bq),
        }
    }

    /// Lists every violated sign constraint, described for humans. Empty on
    /// a valid assignment.
    pub fn violations(&self, bq: &BoundQuiver) -> Vec<String> {
        let mut out = Vec::new();
        for (u, v, rel, what) in constraint_edges(bq) {
            let lhs = self.value(u);
            let rhs = self.value(v);
            if lhs != rel * rhs {
                out.push(format!(
                    "{}: {} = {} but {} = {}",
                    what,
                    var_name(bq, u),
                    lhs,
                    var_name(bq, v),
                    rhs
                ));
            }
        }
        out
    }

    fn value(&self, var: usize) -> i8 {
        if var % 2 == 0 {
            self.sigma[var / 2]
        } else {
            self.epsilon[var / 2]
        }
    }
}

fn var_name(bq: &BoundQuiver, var: usize) -> String {
    let kind = if var % 2 == 0 { "sigma" } else { "epsilon" };
    format!("{}({})", kind, bq.arrow(var / 2).id)
}

/// Constraint edges as (variable, variable, ±1, description); variable
/// `2a` is σ(arrow a), `2a+1` is ε(arrow a). Each edge demands
/// `value(u) = rel * value(v)`.
fn constraint_edges(bq: &BoundQuiver) -> Vec<(usize, usize, i8, String)> {
    let mut edges = Vec::new();
    for v in 0..bq.vertex_count() {
        let outs = bq.outgoing(v);
        if let [b, g] = outs {
            edges.push((
                2 * b,
                2 * g,
                -1,
                format!(
                    "arrows {} and {} share source {}",
                    bq.arrow(*b).id,
                    bq.arrow(*g).id,
                    bq.vertex_name(v)
                ),
            ));
        }
        let ins = bq.incoming(v);
        if let [b, g] = ins {
            edges.push((
                2 * b + 1,
                2 * g + 1,
                -1,
                format!(
                    "arrows {} and {} share target {}",
                    bq.arrow(*b).id,
                    bq.arrow(*g).id,
                    bq.vertex_name(v)
                ),
            ));
        }
        for &a in ins {
            for &b in outs {
                let (rel, how) = if bq.in_relation(a, b) {
                    (1, "compose into a relation")
                } else {
                    (-1, "compose freely")
                };
                edges.push((
                    2 * b,
                    2 * a + 1,
                    rel,
                    format!("arrows {} and {} {}", bq.arrow(a).id, bq.arrow(b).id, how),
                ));
            }
        }
    }
    edges
}

/// Constructs a sign assignment satisfying the four constraints.
///
/// Deterministic: constraint-graph components are seeded in a fixed way —
/// the component's σ variable of least arrow gets +1 (its least ε variable
/// if the component touches no σ at all) — and the choice propagates. A
/// gentle quiver always admits an assignment; a contradiction is reported
/// as [`SignConflict`].
pub fn assign_signs(bq: &BoundQuiver) -> Result<SignAssignment, SignConflict> {
    let n = bq.arrow_count();
    let mut adj: Vec<Vec<(usize, i8)>> = vec![Vec::new(); 2 * n];
    for (u, v, rel, _) in constraint_edges(bq) {
        adj[u].push((v, rel));
        adj[v].push((u, rel));
    }
    let mut value = vec![0i8; 2 * n];
    for start in 0..2 * n {
        if value[start] != 0 {
            continue;
        }
        // Collect the whole component first to find its seed variable.
        let mut component = vec![start];
        let mut seen = vec![start];
        {
            let mut stack = vec![start];
            let mut mark = std::collections::HashSet::new();
            mark.insert(start);
            while let Some(u) = stack.pop() {
                for &(v, _) in &adj[u] {
                    if mark.insert(v) {
                        component.push(v);
                        seen.push(v);
                        stack.push(v);
                    }
                }
            }
        }
        component.sort_unstable();
        let seed = component
            .iter()
            .copied()
            .find(|u| u % 2 == 0)
            .unwrap_or(component[0]);
        value[seed] = 1;
        let mut queue = std::collections::VecDeque::from([seed]);
        while let Some(u) = queue.pop_front() {
            for &(v, rel) in &adj[u] {
                let want = rel * value[u];
                if value[v] == 0 {
                    value[v] = want;
                    queue.push_back(v);
                } else if value[v] != want {
                    return Err(SignConflict {
                        arrow: bq.arrow(v / 2).id.clone(),
                    });
                }
            }
        }
    }
    let sigma = (0..n).map(|a| value[2 * a]).collect();
    let epsilon = (0..n).map(|a| value[2 * a + 1]).collect();
    Ok(SignAssignment { sigma, epsilon })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::BoundQuiver;

    fn five_vertex() -> BoundQuiver {
        BoundQuiver::from_parts(
            (1..=5).map(|v| v.to_string()).collect(),
            vec![
                ("a1".into(), "1".into(), "3".into()),
                ("a2".into(), "2".into(), "1".into()),
                ("a3".into(), "3".into(), "4".into()),
                ("a4".into(), "4".into(), "2".into()),
                ("a5".into(), "4".into(), "5".into()),
            ],
            vec![("a3".into(), "a5".into()), ("a4".into(), "a2".into())],
        )
        .unwrap()
    }

    /// Linear seven-vertex quiver 1→2→3←4←5→6→7 with relations a1a2, a5a6.
    fn seven_vertex() -> BoundQuiver {
        BoundQuiver::from_parts(
            (1..=7).map(|v| v.to_string()).collect(),
            vec![
                ("a1".into(), "1".into(), "2".into()),
                ("a2".into(), "2".into(), "3".into()),
                ("a3".into(), "4".into(), "3".into()),
                ("a4".into(), "5".into(), "4".into()),
                ("a5".into(), "5".into(), "6".into()),
                ("a6".into(), "6".into(), "7".into()),
            ],
            vec![("a1".into(), "a2".into()), ("a5".into(), "a6".into())],
        )
        .unwrap()
    }

    fn full_relation_triangle() -> BoundQuiver {
        BoundQuiver::from_parts(
            vec!["1".into(), "2".into(), "3".into()],
            vec![
                ("a".into(), "1".into(), "2".into()),
                ("b".into(), "2".into(), "3".into()),
                ("c".into(), "3".into(), "1".into()),
            ],
            vec![
                ("a".into(), "b".into()),
                ("b".into(), "c".into()),
                ("c".into(), "a".into()),
            ],
        )
        .unwrap()
    }

    fn labels(threads: &[Thread], bq: &BoundQuiver) -> Vec<String> {
        threads.iter().map(|t| t.label(bq)).collect()
    }

    #[test]
    fn five_vertex_thread_sets() {
        let bq = five_vertex();
        let ts = enumerate_threads(&bq).unwrap();
        assert_eq!(
            labels(&ts.permitted, &bq),
            ["h_1", "a2 a1 a3 a4", "h_3", "a5", "h_5"]
        );
        assert_eq!(
            labels(&ts.forbidden, &bq),
            ["a1", "p_2", "a3 a5", "a4 a2", "p_5"]
        );
        assert!(ts.cycles.is_empty());
    }

    #[test]
    fn seven_vertex_thread_sets() {
        let bq = seven_vertex();
        let ts = enumerate_threads(&bq).unwrap();
        assert_eq!(
            labels(&ts.permitted, &bq),
            ["h_1", "a1", "a2", "h_4", "a4 a3", "a5", "a6", "h_7"]
        );
        assert_eq!(
            labels(&ts.forbidden, &bq),
            ["p_1", "a1 a2", "p_2", "a3", "a4", "a5 a6", "p_6", "p_7"]
        );
        assert!(ts.cycles.is_empty());
        let lengths: Vec<usize> = ts.forbidden.iter().map(Thread::len).collect();
        assert_eq!(lengths.iter().sum::<usize>(), 6);
    }

    #[test]
    fn triangle_full_relation_cycle() {
        let bq = full_relation_triangle();
        let ts = enumerate_threads(&bq).unwrap();
        assert_eq!(labels(&ts.permitted, &bq), ["a", "b", "c"]);
        // Three trivial forbidden threads plus the three rotations.
        assert_eq!(
            labels(&ts.forbidden, &bq),
            ["p_1", "a b c", "p_2", "b c a", "p_3", "c a b"]
        );
        assert_eq!(ts.forbidden.iter().filter(|f| f.cyclic).count(), 3);
        assert_eq!(ts.pairable_forbidden().count(), 3);
        assert_eq!(ts.cycles, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn two_arrow_loop_with_one_relation_is_not_a_cycle() {
        // a: 1→2, b: 2→1 with ab = 0: the forbidden thread a b starts and
        // ends at vertex 1 but does not wrap (ba is not a relation), so it
        // still takes part in the pairing.
        let bq = BoundQuiver::from_parts(
            vec!["1".into(), "2".into()],
            vec![
                ("a".into(), "1".into(), "2".into()),
                ("b".into(), "2".into(), "1".into()),
            ],
            vec![("a".into(), "b".into())],
        )
        .unwrap();
        let ts = enumerate_threads(&bq).unwrap();
        assert_eq!(labels(&ts.permitted, &bq), ["h_1", "b a"]);
        assert_eq!(labels(&ts.forbidden, &bq), ["a b", "p_2"]);
        assert!(ts.cycles.is_empty());
        assert_eq!(ts.pairable_forbidden().count(), 2);
    }

    #[test]
    fn relationless_cycle_is_an_error() {
        let bq = BoundQuiver::from_parts(
            vec!["1".into(), "2".into()],
            vec![
                ("a".into(), "1".into(), "2".into()),
                ("b".into(), "2".into(), "1".into()),
            ],
            vec![],
        )
        .unwrap();
        assert_eq!(
            enumerate_threads(&bq).unwrap_err(),
            ThreadError::PermittedCycle(vec!["a".into(), "b".into()])
        );
    }

    #[test]
    fn isolated_vertex_has_both_trivial_threads() {
        let bq = BoundQuiver::from_parts(vec!["x".into()], vec![], vec![]).unwrap();
        let ts = enumerate_threads(&bq).unwrap();
        assert_eq!(labels(&ts.permitted, &bq), ["h_x"]);
        assert_eq!(labels(&ts.forbidden, &bq), ["p_x"]);
    }

    #[test]
    fn every_arrow_in_exactly_one_maximal_structure() {
        for bq in [five_vertex(), seven_vertex(), full_relation_triangle()] {
            let ts = enumerate_threads(&bq).unwrap();
            let mut seen_p = vec![0usize; bq.arrow_count()];
            for t in ts.permitted.iter().filter(|t| !t.is_trivial()) {
                for &a in t.arrows() {
                    seen_p[a] += 1;
                }
            }
            assert!(seen_p.iter().all(|&k| k == 1));
            let mut seen_f = vec![0usize; bq.arrow_count()];
            for t in ts.forbidden.iter().filter(|t| !t.is_trivial() && !t.cyclic) {
                for &a in t.arrows() {
                    seen_f[a] += 1;
                }
            }
            for c in &ts.cycles {
                for &a in c {
                    seen_f[a] += 1;
                }
            }
            assert!(seen_f.iter().all(|&k| k == 1));
        }
    }

    #[test]
    fn five_vertex_sign_assignment() {
        let bq = five_vertex();
        let sa = assign_signs(&bq).unwrap();
        assert_eq!(sa.violations(&bq), Vec::<String>::new());
        let a = |id: &str| bq.arrow_index(id).unwrap();
        assert_eq!(sa.sigma(a("a1")), 1);
        assert_eq!(sa.epsilon(a("a2")), -1);
        assert_eq!(sa.sigma(a("a4")), -sa.sigma(a("a5")));
        // The relation a4 a2 forces epsilon(a4) = sigma(a2).
        assert_eq!(sa.epsilon(a("a4")), sa.sigma(a("a2")));
    }

    #[test]
    fn five_vertex_thread_signs() {
        let bq = five_vertex();
        let sa = assign_signs(&bq).unwrap();
        let ts = enumerate_threads(&bq).unwrap();
        let find = |list: &[Thread], label: &str| -> Thread {
            list.iter().find(|t| t.label(&bq) == label).unwrap().clone()
        };
        let h1 = find(&ts.permitted, "h_1");
        assert_eq!(sa.thread_sigma(&h1, &bq), -1);
        assert_eq!(sa.thread_epsilon(&h1, &bq), 1);
        let h3 = find(&ts.permitted, "h_3");
        assert_eq!(sa.thread_sigma(&h3, &bq), -1);
        assert_eq!(sa.thread_epsilon(&h3, &bq), 1);
        let h5 = find(&ts.permitted, "h_5");
        assert_eq!(sa.thread_sigma(&h5, &bq), 1);
        assert_eq!(sa.thread_epsilon(&h5, &bq), -1);
        let p2 = find(&ts.forbidden, "p_2");
        assert_eq!(sa.thread_sigma(&p2, &bq), -1);
        assert_eq!(sa.thread_epsilon(&p2, &bq), -1);
        let p5 = find(&ts.forbidden, "p_5");
        assert_eq!(sa.thread_sigma(&p5, &bq), -1);
        assert_eq!(sa.thread_epsilon(&p5, &bq), -1);
        let long = find(&ts.permitted, "a2 a1 a3 a4");
        assert_eq!(sa.thread_sigma(&long, &bq), 1);
        assert_eq!(sa.thread_epsilon(&long, &bq), 1);
    }

    #[test]
    fn opposite_sigma_for_shared_source() {
        let bq = BoundQuiver::from_parts(
            vec!["c".into(), "x".into(), "y".into()],
            vec![
                ("a".into(), "c".into(), "x".into()),
                ("b".into(), "c".into(), "y".into()),
            ],
            vec![],
        )
        .unwrap();
        let sa = assign_signs(&bq).unwrap();
        assert_eq!(sa.sigma(0), -sa.sigma(1));
        assert!(sa.violations(&bq).is_empty());
    }

    #[test]
    fn component_flip_preserves_constraints_but_single_flip_breaks_them() {
        let bq = five_vertex();
        let sa = assign_signs(&bq).unwrap();
        let all: Vec<usize> = (0..bq.arrow_count()).collect();
        assert!(sa.flipped(&all).violations(&bq).is_empty());
        assert!(!sa.flipped(&[0]).violations(&bq).is_empty());
    }

    #[test]
    fn unconstrained_epsilon_defaults_to_plus_one() {
        // Single arrow: both sigma and epsilon sit in singleton components.
        let bq = BoundQuiver::from_parts(
            vec!["1".into(), "2".into()],
            vec![("a".into(), "1".into(), "2".into())],
            vec![],
        )
        .unwrap();
        let sa = assign_signs(&bq).unwrap();
        assert_eq!(sa.sigma(0), 1);
        assert_eq!(sa.epsilon(0), 1);
    }
}
