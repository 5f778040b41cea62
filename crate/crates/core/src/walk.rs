//! The alternating thread walk that computes the derived invariant directly
//! from a bound quiver.
//!
//! Permitted and forbidden threads are paired through two bijections: φ
//! sends a permitted thread `H` to the forbidden thread ending at `t(H)`
//! with opposite ε, and ψ sends a forbidden thread `F` to the permitted
//! thread starting at `s(F)` with opposite σ. Starting from an unvisited
//! permitted thread, alternating φ and ψ eventually returns to the start;
//! each such tour contributes one pair `(n, Σℓ(F_i))`. Cycles made entirely
//! of relations stay outside the pairing and contribute `(0, length)` each.

use thiserror::Error;

use crate::quiver::{AgFunction, BoundQuiver};
use crate::threads::{
    assign_signs, enumerate_threads, SignAssignment, SignConflict, Thread, ThreadError,
    ThreadSystem,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WalkError {
    #[error(transparent)]
    Threads(#[from] ThreadError),
    #[error(transparent)]
    Signs(#[from] SignConflict),
    /// The φ/ψ partner was not unique (or missing). Never happens on a
    /// gentle quiver; reported instead of panicking on damaged input.
    #[error("thread {thread} has {found} {role} partners instead of one")]
    PairingFailure {
        role: &'static str,
        thread: String,
        found: usize,
    },
}

/// Everything the walk needs: the quiver, its threads, and a choice of
/// signs.
pub struct ThreadContext<'q> {
    pub quiver: &'q BoundQuiver,
    pub threads: ThreadSystem,
    pub signs: SignAssignment,
}

impl<'q> ThreadContext<'q> {
    pub fn new(quiver: &'q BoundQuiver) -> Result<Self, WalkError> {
        let threads = enumerate_threads(quiver)?;
        let signs = assign_signs(quiver)?;
        Ok(ThreadContext {
            quiver,
            threads,
            signs,
        })
    }

    /// Same, but with caller-chosen signs (the invariant must not depend on
    /// the choice, which tests exercise by flipping components).
    pub fn with_signs(quiver: &'q BoundQuiver, signs: SignAssignment) -> Result<Self, WalkError> {
        let threads = enumerate_threads(quiver)?;
        Ok(ThreadContext {
            quiver,
            threads,
            signs,
        })
    }

    fn is_isolated(&self, t: &Thread) -> bool {
        t.is_trivial()
            && self.quiver.incoming(t.source()).is_empty()
            && self.quiver.outgoing(t.source()).is_empty()
    }

    /// φ: the forbidden thread ending where `h` ends, with opposite ε. At a
    /// vertex without arrows the signs cannot oppose each other, so the two
    /// trivial threads pair up directly.
    pub fn phi(&self, h: &Thread) -> Result<&Thread, WalkError> {
        let matches: Vec<&Thread> = if self.is_isolated(h) {
            self.threads
                .pairable_forbidden()
                .filter(|f| f.is_trivial() && f.source() == h.source())
                .collect()
        } else {
            let want = -self.signs.thread_epsilon(h, self.quiver);
            self.threads
                .pairable_forbidden()
                .filter(|f| {
                    f.target() == h.target()
                        && self.signs.thread_epsilon(f, self.quiver) == want
                })
                .collect()
        };
        if matches.len() == 1 {
            Ok(matches[0])
        } else {
            Err(WalkError::PairingFailure {
                role: "forbidden",
                thread: h.label(self.quiver),
                found: matches.len(),
            })
        }
    }

    /// ψ: the permitted thread starting where `f` starts, with opposite σ;
    /// at an arrowless vertex, `h_x` itself.
    pub fn psi(&self, f: &Thread) -> Result<&Thread, WalkError> {
        let matches: Vec<&Thread> = if self.is_isolated(f) {
            self.threads
                .permitted
                .iter()
                .filter(|h| h.is_trivial() && h.source() == f.source())
                .collect()
        } else {
            let want = -self.signs.thread_sigma(f, self.quiver);
            self.threads
                .permitted
                .iter()
                .filter(|h| {
                    h.source() == f.source() && self.signs.thread_sigma(h, self.quiver) == want
                })
                .collect()
        };
        if matches.len() == 1 {
            Ok(matches[0])
        } else {
            Err(WalkError::PairingFailure {
                role: "permitted",
                thread: f.label(self.quiver),
                found: matches.len(),
            })
        }
    }
}

/// One φ/ψ step: a permitted thread and its forbidden partner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkStep {
    pub permitted: Thread,
    pub forbidden: Thread,
}

/// One closed tour of the walk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkTour {
    pub steps: Vec<WalkStep>,
    /// `(number of steps, total forbidden length)`.
    pub pair: (usize, usize),
}

/// A full record of the walk: the tours in starting order, then one
/// `(0, length)` pair per full-relation cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkTrace {
    pub tours: Vec<WalkTour>,
    pub cycle_pairs: Vec<(usize, usize)>,
}

impl WalkTrace {
    pub fn invariant(&self) -> AgFunction {
        let mut f = AgFunction::new();
        for tour in &self.tours {
            f.add(tour.pair);
        }
        for &p in &self.cycle_pairs {
            f.add(p);
        }
        f
    }
}

/// Runs the walk over every permitted thread, starting each tour at the
/// canonically least unvisited one.
pub fn ag_walk(ctx: &ThreadContext) -> Result<WalkTrace, WalkError> {
    let total = ctx.threads.permitted.len();
    let mut visited = vec![false; total];
    let position = |t: &Thread| {
        ctx.threads
            .permitted
            .iter()
            .position(|u| u == t)
            .expect("psi returns a thread from the permitted list")
    };
    let mut tours = Vec::new();
    for start in 0..total {
        if visited[start] {
            continue;
        }
        let mut steps = Vec::new();
        let mut at = start;
        loop {
            visited[at] = true;
            let h = &ctx.threads.permitted[at];
            let f = ctx.phi(h)?;
            steps.push(WalkStep {
                permitted: h.clone(),
                forbidden: f.clone(),
            });
            let next = position(ctx.psi(f)?);
            if next == start {
                break;
            }
            if visited[next] {
                // ψ∘φ must be a permutation; revisiting mid-tour means the
                // input was not gentle.
                return Err(WalkError::PairingFailure {
                    role: "permitted",
                    thread: ctx.threads.permitted[next].label(ctx.quiver),
                    found: 2,
                });
            }
            at = next;
        }
        let length_sum = steps.iter().map(|s| s.forbidden.len()).sum();
        let pair = (steps.len(), length_sum);
        tours.push(WalkTour { steps, pair });
    }
    let cycle_pairs = ctx.threads.cycles.iter().map(|c| (0, c.len())).collect();
    Ok(WalkTrace { tours, cycle_pairs })
}

/// The derived invariant of a bound quiver, straight from the thread walk.
pub fn ag_invariant_direct(bq: &BoundQuiver) -> Result<AgFunction, WalkError> {
    let ctx = ThreadContext::new(bq)?;
    Ok(ag_walk(&ctx)?.invariant())
}
