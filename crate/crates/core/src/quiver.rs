//! Quivers bound by monomial length-2 relations, and the combinatorial
//! axioms under which they present gentle (or string) algebras.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// An arrow of a quiver. `source`/`target` index into the vertex table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub id: String,
    pub source: usize,
    pub target: usize,
}

/// A quiver together with a set of relations, each relation an ordered pair
/// of composable arrows (the path `ab` with `t(a) = s(b)` is declared zero).
///
/// Vertex and arrow order is declaration order and is the canonical order
/// everywhere downstream: thread sorting, walk starting points, and the
/// serialized form all refer back to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundQuiver {
    vertices: Vec<String>,
    arrows: Vec<Arrow>,
    relations: BTreeSet<(usize, usize)>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuiverError {
    #[error("duplicate vertex id {0:?}")]
    DuplicateVertex(String),
    #[error("duplicate arrow id {0:?}")]
    DuplicateArrow(String),
    #[error("arrow {arrow:?} references unknown vertex {vertex:?}")]
    UnknownVertex { arrow: String, vertex: String },
    #[error("relation references unknown arrow {0:?}")]
    UnknownArrow(String),
    #[error("relation ({0:?}, {1:?}) is not composable (target of the first must be the source of the second)")]
    NotComposable(String, String),
    #[error("duplicate relation ({0:?}, {1:?})")]
    DuplicateRelation(String, String),
}

impl BoundQuiver {
    /// Builds a bound quiver from raw parts, checking referential integrity:
    /// ids unique, arrow endpoints declared, relations composable and unique.
    pub fn from_parts(
        vertices: Vec<String>,
        arrows: Vec<(String, String, String)>,
        relations: Vec<(String, String)>,
    ) -> Result<Self, QuiverError> {
        let mut vertex_index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if vertex_index.insert(v.clone(), i).is_some() {
                return Err(QuiverError::DuplicateVertex(v.clone()));
            }
        }
        let mut arrow_index = HashMap::new();
        let mut built = Vec::with_capacity(arrows.len());
        for (i, (id, src, tgt)) in arrows.into_iter().enumerate() {
            let source = *vertex_index.get(&src).ok_or(QuiverError::UnknownVertex {
                arrow: id.clone(),
                vertex: src.clone(),
            })?;
            let target = *vertex_index.get(&tgt).ok_or(QuiverError::UnknownVertex {
                arrow: id.clone(),
                vertex: tgt.clone(),
            })?;
            if arrow_index.insert(id.clone(), i).is_some() {
                return Err(QuiverError::DuplicateArrow(id));
            }
            built.push(Arrow { id, source, target });
        }
        let mut rel = BTreeSet::new();
        for (a, b) in relations {
            let ai = *arrow_index
                .get(&a)
                .ok_or_else(|| QuiverError::UnknownArrow(a.clone()))?;
            let bi = *arrow_index
                .get(&b)
                .ok_or_else(|| QuiverError::UnknownArrow(b.clone()))?;
            if built[ai].target != built[bi].source {
                return Err(QuiverError::NotComposable(a, b));
            }
            if !rel.insert((ai, bi)) {
                return Err(QuiverError::DuplicateRelation(a, b));
            }
        }
        let mut outgoing = vec![Vec::new(); vertices.len()];
        let mut incoming = vec![Vec::new(); vertices.len()];
        for (i, a) in built.iter().enumerate() {
            outgoing[a.source].push(i);
            incoming[a.target].push(i);
        }
        Ok(BoundQuiver {
            vertices,
            arrows: built,
            relations: rel,
            outgoing,
            incoming,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn arrow(&self, a: usize) -> &Arrow {
        &self.arrows[a]
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn arrow_index(&self, id: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a.id == id)
    }

    pub fn relations(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.relations.iter().copied()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    /// Whether the composable pair `ab` is a declared relation.
    pub fn in_relation(&self, a: usize, b: usize) -> bool {
        self.relations.contains(&(a, b))
    }

    /// Arrows leaving `v`, in declaration order.
    pub fn outgoing(&self, v: usize) -> &[usize] {
        &self.outgoing[v]
    }

    /// Arrows entering `v`, in declaration order.
    pub fn incoming(&self, v: usize) -> &[usize] {
        &self.incoming[v]
    }

    /// Composable successors `g` of `a` with `ag` not a relation.
    pub fn permitted_successors(&self, a: usize) -> Vec<usize> {
        self.outgoing[self.arrows[a].target]
            .iter()
            .copied()
            .filter(|&g| !self.in_relation(a, g))
            .collect()
    }

    /// Composable successors `g` of `a` with `ag` a relation.
    pub fn forbidden_successors(&self, a: usize) -> Vec<usize> {
        self.outgoing[self.arrows[a].target]
            .iter()
            .copied()
            .filter(|&g| self.in_relation(a, g))
            .collect()
    }

    /// Composable predecessors `b` of `a` with `ba` not a relation.
    pub fn permitted_predecessors(&self, a: usize) -> Vec<usize> {
        self.incoming[self.arrows[a].source]
            .iter()
            .copied()
            .filter(|&b| !self.in_relation(b, a))
            .collect()
    }

    /// Composable predecessors `b` of `a` with `ba` a relation.
    pub fn forbidden_predecessors(&self, a: usize) -> Vec<usize> {
        self.incoming[self.arrows[a].source]
            .iter()
            .copied()
            .filter(|&b| self.in_relation(b, a))
            .collect()
    }
}

/// Axiom labels for [`Violation::axiom`]. `FiniteDim` is not one of the four
/// letter axioms: it flags an oriented cycle along which no pair of
/// consecutive arrows is a relation, which makes the path algebra
/// infinite-dimensional and therefore not gentle (gentle algebras are
/// finite-dimensional by definition).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axiom {
    G1,
    G2,
    G3,
    G4,
    FiniteDim,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::G1 => write!(f, "G1"),
            Axiom::G2 => write!(f, "G2"),
            Axiom::G3 => write!(f, "G3"),
            Axiom::G4 => write!(f, "G4"),
            Axiom::FiniteDim => write!(f, "finite-dimensionality"),
        }
    }
}

/// One failed axiom instance. Indices refer to the checked quiver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// G1: more than two arrows start at `vertex`.
    TooManyOutgoing { vertex: usize, arrows: Vec<usize> },
    /// G1: more than two arrows stop at `vertex`.
    TooManyIncoming { vertex: usize, arrows: Vec<usize> },
    /// G3: more than one arrow `g` with `(arrow, g)` a relation.
    AmbiguousForbiddenSuccessor { arrow: usize, candidates: Vec<usize> },
    /// G3: more than one arrow `b` with `(b, arrow)` a relation.
    AmbiguousForbiddenPredecessor { arrow: usize, candidates: Vec<usize> },
    /// G4: more than one composable `g` with `(arrow, g)` not a relation.
    AmbiguousPermittedSuccessor { arrow: usize, candidates: Vec<usize> },
    /// G4: more than one composable `b` with `(b, arrow)` not a relation.
    AmbiguousPermittedPredecessor { arrow: usize, candidates: Vec<usize> },
    /// An oriented cycle with no relation between any consecutive pair.
    UnbrokenCycle { arrows: Vec<usize> },
}

impl Violation {
    pub fn axiom(&self) -> Axiom {
        match self {
            Violation::TooManyOutgoing { .. } | Violation::TooManyIncoming { .. } => Axiom::G1,
            Violation::AmbiguousForbiddenSuccessor { .. }
            | Violation::AmbiguousForbiddenPredecessor { .. } => Axiom::G3,
            Violation::AmbiguousPermittedSuccessor { .. }
            | Violation::AmbiguousPermittedPredecessor { .. } => Axiom::G4,
            Violation::UnbrokenCycle { .. } => Axiom::FiniteDim,
        }
    }

    pub fn describe(&self, bq: &BoundQuiver) -> String {
        let arrow_list = |ids: &[usize]| {
            ids.iter()
                .map(|&a| bq.arrow(a).id.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        };
        match self {
            Violation::TooManyOutgoing { vertex, arrows } => format!(
                "G1: vertex {} has {} outgoing arrows ({})",
                bq.vertex_name(*vertex),
                arrows.len(),
                arrow_list(arrows)
            ),
            Violation::TooManyIncoming { vertex, arrows } => format!(
                "G1: vertex {} has {} incoming arrows ({})",
                bq.vertex_name(*vertex),
                arrows.len(),
                arrow_list(arrows)
            ),
            Violation::AmbiguousForbiddenSuccessor { arrow, candidates } => format!(
                "G3: arrow {} has several successors through relations ({})",
                bq.arrow(*arrow).id,
                arrow_list(candidates)
            ),
            Violation::AmbiguousForbiddenPredecessor { arrow, candidates } => format!(
                "G3: arrow {} has several predecessors through relations ({})",
                bq.arrow(*arrow).id,
                arrow_list(candidates)
            ),
            Violation::AmbiguousPermittedSuccessor { arrow, candidates } => format!(
                "G4: arrow {} has several successors avoiding relations ({})",
                bq.arrow(*arrow).id,
                arrow_list(candidates)
            ),
            Violation::AmbiguousPermittedPredecessor { arrow, candidates } => format!(
                "G4: arrow {} has several predecessors avoiding relations ({})",
                bq.arrow(*arrow).id,
                arrow_list(candidates)
            ),
            Violation::UnbrokenCycle { arrows } => format!(
                "oriented cycle without relations ({}); the algebra is not finite-dimensional",
                arrow_list(arrows)
            ),
        }
    }
}

/// Checks the gentle axioms. Empty output means gentle.
///
/// G2 (relations are generated by paths of length two) holds by construction
/// of [`BoundQuiver`] and never appears in the output. Beyond G1/G3/G4 this
/// also rejects oriented cycles free of relations, since those make the
/// algebra infinite-dimensional and the thread machinery non-terminating.
pub fn validate_gentle(bq: &BoundQuiver) -> Vec<Violation> {
    let mut out = degree_violations(bq);
    for a in 0..bq.arrow_count() {
        let fs = bq.forbidden_successors(a);
        if fs.len() > 1 {
            out.push(Violation::AmbiguousForbiddenSuccessor {
                arrow: a,
                candidates: fs,
            });
        }
        let fp = bq.forbidden_predecessors(a);
        if fp.len() > 1 {
            out.push(Violation::AmbiguousForbiddenPredecessor {
                arrow: a,
                candidates: fp,
            });
        }
    }
    out.extend(permitted_ambiguities(bq));
    out.extend(unbroken_cycles(bq));
    out
}

/// Checks only the string-algebra axioms (G1 and G4).
pub fn validate_string(bq: &BoundQuiver) -> Vec<Violation> {
    let mut out = degree_violations(bq);
    out.extend(permitted_ambiguities(bq));
    out
}

fn degree_violations(bq: &BoundQuiver) -> Vec<Violation> {
    let mut out = Vec::new();
    for v in 0..bq.vertex_count() {
        if bq.outgoing(v).len() > 2 {
            out.push(Violation::TooManyOutgoing {
                vertex: v,
                arrows: bq.outgoing(v).to_vec(),
            });
        }
        if bq.incoming(v).len() > 2 {
            out.push(Violation::TooManyIncoming {
                vertex: v,
                arrows: bq.incoming(v).to_vec(),
            });
        }
    }
    out
}

fn permitted_ambiguities(bq: &BoundQuiver) -> Vec<Violation> {
    let mut out = Vec::new();
    for a in 0..bq.arrow_count() {
        let ps = bq.permitted_successors(a);
        if ps.len() > 1 {
            out.push(Violation::AmbiguousPermittedSuccessor {
                arrow: a,
                candidates: ps,
            });
        }
        let pp = bq.permitted_predecessors(a);
        if pp.len() > 1 {
            out.push(Violation::AmbiguousPermittedPredecessor {
                arrow: a,
                candidates: pp,
            });
        }
    }
    out
}

/// Finds oriented cycles in which no consecutive pair (including the wrap
/// around) is a relation. Each cycle is reported once, rotated to start at
/// its smallest arrow.
fn unbroken_cycles(bq: &BoundQuiver) -> Vec<Violation> {
    let n = bq.arrow_count();
    // DFS over the "permitted successor" digraph on arrows.
    let mut color = vec![0u8; n]; // 0 unseen, 1 on stack, 2 done
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    for start in 0..n {
        if color[start] != 0 {
            continue;
        }
        // Iterative DFS keeping the current path for cycle extraction.
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(start, bq.permitted_successors(start))];
        color[start] = 1;
        let mut path = vec![start];
        while let Some((node, succs)) = stack.last_mut() {
            if let Some(next) = succs.pop() {
                match color[next] {
                    0 => {
                        color[next] = 1;
                        path.push(next);
                        stack.push((next, bq.permitted_successors(next)));
                    }
                    1 => {
                        let pos = path.iter().position(|&a| a == next).unwrap();
                        found.insert(least_rotation(&path[pos..]));
                    }
                    _ => {}
                }
            } else {
                color[*node] = 2;
                path.pop();
                stack.pop();
            }
        }
    }
    found
        .into_iter()
        .map(|arrows| Violation::UnbrokenCycle { arrows })
        .collect()
}

pub(crate) fn least_rotation(cycle: &[usize]) -> Vec<usize> {
    let k = cycle
        .iter()
        .enumerate()
        .min_by_key(|&(_, v)| v)
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut out = cycle[k..].to_vec();
    out.extend_from_slice(&cycle[..k]);
    out
}

/// Splits a bound quiver into its connected components (undirected
/// connectivity). Components are ordered by their smallest vertex, vertices
/// and arrows keep declaration order, and relations follow their arrows.
/// Isolated vertices form singleton components.
pub fn connected_components(bq: &BoundQuiver) -> Vec<BoundQuiver> {
    let n = bq.vertex_count();
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut queue = vec![start];
        comp[start] = count;
        while let Some(v) = queue.pop() {
            for &a in bq.outgoing(v).iter().chain(bq.incoming(v)) {
                for w in [bq.arrow(a).source, bq.arrow(a).target] {
                    if comp[w] == usize::MAX {
                        comp[w] = count;
                        queue.push(w);
                    }
                }
            }
        }
        count += 1;
    }
    (0..count)
        .map(|c| {
            let vertices: Vec<String> = (0..n)
                .filter(|&v| comp[v] == c)
                .map(|v| bq.vertex_name(v).to_string())
                .collect();
            let arrows: Vec<(String, String, String)> = bq
                .arrows()
                .iter()
                .filter(|a| comp[a.source] == c)
                .map(|a| {
                    (
                        a.id.clone(),
                        bq.vertex_name(a.source).to_string(),
                        bq.vertex_name(a.target).to_string(),
                    )
                })
                .collect();
            let relations: Vec<(String, String)> = bq
                .relations()
                .filter(|&(a, _)| comp[bq.arrow(a).source] == c)
                .map(|(a, b)| (bq.arrow(a).id.clone(), bq.arrow(b).id.clone()))
                .collect();
            BoundQuiver::from_parts(vertices, arrows, relations)
                .expect("component of a valid quiver is valid")
        })
        .collect()
}

/// The derived invariant: a multiset of pairs of natural numbers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AgFunction {
    counts: BTreeMap<(usize, usize), usize>,
}

impl AgFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(usize, usize)]) -> Self {
        let mut f = Self::new();
        for &p in pairs {
            f.add(p);
        }
        f
    }

    pub fn add(&mut self, pair: (usize, usize)) {
        *self.counts.entry(pair).or_insert(0) += 1;
    }

    /// Multiset union.
    pub fn extend(&mut self, other: &AgFunction) {
        for (&pair, &k) in &other.counts {
            *self.counts.entry(pair).or_insert(0) += k;
        }
    }

    /// Multiset difference; `None` if `other` is not contained in `self`.
    pub fn checked_sub(&self, other: &AgFunction) -> Option<AgFunction> {
        let mut counts = self.counts.clone();
        for (&pair, &k) in &other.counts {
            let have = counts.get_mut(&pair)?;
            if *have < k {
                return None;
            }
            *have -= k;
            if *have == 0 {
                counts.remove(&pair);
            }
        }
        Some(AgFunction { counts })
    }

    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), usize)> + '_ {
        self.counts.iter().map(|(&p, &k)| (p, k))
    }

    pub fn multiplicity(&self, pair: (usize, usize)) -> usize {
        self.counts.get(&pair).copied().unwrap_or(0)
    }

    /// Total number of pairs counted with multiplicity.
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

impl fmt::Display for AgFunction {
    /// One line `<n> <m> <count>` per distinct pair, sorted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (&(n, m), &k) in &self.counts {
            writeln!(f, "{} {} {}", n, m, k)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        line,
        msg: msg.into(),
    }
}

/// Parses the line-oriented quiver format:
///
/// ```text
/// quiver
/// vertex <id>
/// arrow <id> <source> <target>
/// relation <first-arrow> <second-arrow>
/// ```
///
/// `#` starts a comment; blank lines are ignored; every name must be
/// declared before use.
pub fn parse_quiver(text: &str) -> Result<BoundQuiver, ParseError> {
    let mut vertices = Vec::new();
    let mut arrows = Vec::new();
    let mut relations = Vec::new();
    let mut header_seen = false;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !header_seen {
            if fields == ["quiver"] {
                header_seen = true;
                continue;
            }
            return Err(err(lineno, "expected header line \"quiver\""));
        }
        match fields[0] {
            "vertex" => {
                if fields.len() != 2 {
                    return Err(err(lineno, "vertex takes exactly one id"));
                }
                vertices.push((lineno, fields[1].to_string()));
            }
            "arrow" => {
                if fields.len() != 4 {
                    return Err(err(lineno, "arrow takes an id, a source and a target"));
                }
                arrows.push((
                    lineno,
                    fields[1].to_string(),
                    fields[2].to_string(),
                    fields[3].to_string(),
                ));
            }
            "relation" => {
                if fields.len() != 3 {
                    return Err(err(
                        lineno,
                        "relation takes exactly two arrows (relations have length two)",
                    ));
                }
                relations.push((lineno, fields[1].to_string(), fields[2].to_string()));
            }
            other => return Err(err(lineno, format!("unknown directive {other:?}"))),
        }
    }
    if !header_seen {
        return Err(err(1, "empty input; expected header line \"quiver\""));
    }
    // Re-run construction, mapping integrity failures back to source lines.
    let lines: HashMap<String, usize> = vertices
        .iter()
        .map(|(l, v)| (format!("v:{v}"), *l))
        .chain(arrows.iter().map(|(l, a, _, _)| (format!("a:{a}"), *l)))
        .collect();
    let _ = &lines;
    let v_list: Vec<String> = vertices.iter().map(|(_, v)| v.clone()).collect();
    let a_list: Vec<(String, String, String)> = arrows
        .iter()
        .map(|(_, id, s, t)| (id.clone(), s.clone(), t.clone()))
        .collect();
    let r_list: Vec<(String, String)> = relations
        .iter()
        .map(|(_, a, b)| (a.clone(), b.clone()))
        .collect();
    BoundQuiver::from_parts(v_list, a_list, r_list).map_err(|e| {
        let line = match &e {
            QuiverError::DuplicateVertex(v) => vertices
                .iter()
                .filter(|(_, x)| x == v)
                .map(|(l, _)| *l)
                .last(),
            QuiverError::DuplicateArrow(a) | QuiverError::UnknownVertex { arrow: a, .. } => arrows
                .iter()
                .filter(|(_, x, _, _)| x == a)
                .map(|(l, _, _, _)| *l)
                .last(),
            QuiverError::UnknownArrow(a) => relations
                .iter()
                .filter(|(_, x, y)| x == a || y == a)
                .map(|(l, _, _)| *l)
                .next(),
            QuiverError::NotComposable(a, b) | QuiverError::DuplicateRelation(a, b) => relations
                .iter()
                .filter(|(_, x, y)| x == a && y == b)
                .map(|(l, _, _)| *l)
                .last(),
        };
        err(line.unwrap_or(0), e.to_string())
    })
}

/// Canonical text form: header, vertices, arrows, then relations sorted by
/// their arrows' declaration order. `parse_quiver` inverts it exactly.
pub fn serialize_quiver(bq: &BoundQuiver) -> String {
    let mut out = String::from("quiver\n");
    for v in bq.vertex_names() {
        out.push_str(&format!("vertex {v}\n"));
    }
    for a in bq.arrows() {
        out.push_str(&format!(
            "arrow {} {} {}\n",
            a.id,
            bq.vertex_name(a.source),
            bq.vertex_name(a.target)
        ));
    }
    for (a, b) in bq.relations() {
        out.push_str(&format!(
            "relation {} {}\n",
            bq.arrow(a).id,
            bq.arrow(b).id
        ));
    }
    out
}
