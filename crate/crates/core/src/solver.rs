//! Kleene ascent in antichain space.
//!
//! R₀ is the bottom antichain and Rₖ₊₁ = Ψ(Rₖ). Every step is checked to ascend. The ascent
//! stops on structural equality (converged), on the empty antichain (infeasible, since
//! Ψ({}) = {}), or when the budget is spent, in which case the last step is only a lower bound.

use std::fmt;

use serde_json::{json, Value as Json};

use crate::compose::{DpTree, EvalContext};
use crate::error::{Error, Result};
use crate::posets::{Antichain, TaggedAntichain, Value};

/// Maximum number of Ψ applications per loop evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IterationBudget(usize);

impl IterationBudget {
    pub const DEFAULT: usize = 1000;

    pub fn new(max_iterations: usize) -> Result<IterationBudget> {
        if max_iterations == 0 {
            return Err(Error::InvalidValue("iteration budget must be positive".into()));
        }
        Ok(IterationBudget(max_iterations))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl Default for IterationBudget {
    fn default() -> Self {
        IterationBudget(Self::DEFAULT)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceStatus {
    /// steps[k] = steps[k+1].
    Converged(usize),
    /// The last step is the empty antichain.
    Infeasible,
    /// The last step is a lower bound on the least fixed point.
    IterationCapReached,
}

impl TraceStatus {
    pub fn label(self) -> &'static str {
        match self {
            TraceStatus::Converged(_) => "converged",
            TraceStatus::Infeasible => "infeasible",
            TraceStatus::IterationCapReached => "iteration_cap_reached",
        }
    }
}

/// The Kleene chain R₀ ⪯ R₁ ⪯ … of one loop evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct AscentTrace {
    pub steps: Vec<Antichain>,
    pub status: TraceStatus,
}

impl AscentTrace {
    /// Number of Ψ applications performed.
    pub fn iterations(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    pub fn last(&self) -> &Antichain {
        self.steps.last().expect("a trace holds at least R₀")
    }

    /// True if every step is below the next one.
    pub fn is_ascending(&self) -> bool {
        self.steps.windows(2).all(|w| w[0].leq(&w[1]).unwrap_or(false))
    }

    /// JSON lines, one object per step; intermediate steps have status `ascending`.
    pub fn to_json_lines(&self, trace_index: usize) -> String {
        let mut out = String::new();
        let n = self.steps.len();
        for (k, step) in self.steps.iter().enumerate() {
            let status = if k + 1 == n { self.status.label() } else { "ascending" };
            let line = json!({
                "trace": trace_index,
                "step": k,
                "antichain": step.elements().iter().map(value_to_json).collect::<Vec<_>>(),
                "status": status,
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

/// Numbers as JSON numbers, TOP as "⊤", labels as strings, tuples as arrays.
pub fn value_to_json(v: &Value) -> Json {
    match v {
        Value::Nat(n) => json!(n),
        Value::Real(r) => json!(r.get()),
        Value::Label(s) => json!(&**s),
        Value::Top => json!("⊤"),
        Value::Tuple(vs) => Json::Array(vs.iter().map(value_to_json).collect()),
    }
}

/// Kleene ascent on plain antichains.
pub fn kleene_lfp<F>(bottom: Antichain, budget: IterationBudget, mut psi: F) -> Result<AscentTrace>
where
    F: FnMut(&Antichain) -> Result<Antichain>,
{
    let (trace, _) = kleene_tagged(TaggedAntichain::untagged(bottom), budget, |r| {
        Ok(TaggedAntichain::untagged(psi(&r.values())?))
    })?;
    Ok(trace)
}

/// Kleene ascent carrying coproduct tags; convergence compares values only.
/// Returns the trace and the tagged last step.
pub(crate) fn kleene_tagged<F>(
    bottom: TaggedAntichain,
    budget: IterationBudget,
    mut psi: F,
) -> Result<(AscentTrace, TaggedAntichain)>
where
    F: FnMut(&TaggedAntichain) -> Result<TaggedAntichain>,
{
    let mut current = bottom;
    let mut steps = vec![current.values()];
    for k in 0..budget.get() {
        let next = psi(&current)?;
        let next_plain = next.values();
        if !steps[k].leq(&next_plain)? {
            return Err(Error::NonMonotoneStep { step: k });
        }
        let same = next_plain == steps[k];
        steps.push(next_plain);
        current = next;
        if current.is_empty() {
            return Ok((AscentTrace { steps, status: TraceStatus::Infeasible }, current));
        }
        if same {
            return Ok((AscentTrace { steps, status: TraceStatus::Converged(k) }, current));
        }
    }
    Ok((AscentTrace { steps, status: TraceStatus::IterationCapReached }, current))
}

/// Ψ(r) = r structurally.
pub fn check_fixed_point<F>(mut psi: F, r: &Antichain) -> Result<bool>
where
    F: FnMut(&Antichain) -> Result<Antichain>,
{
    Ok(psi(r)? == *r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    Infeasible,
    /// Some loop ran out of budget: the antichain is a lower bound, not the answer.
    IterationCapReached,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Converged => "converged",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::IterationCapReached => "iteration_cap_reached",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub antichain: TaggedAntichain,
    /// One trace per loop evaluation, in evaluation order.
    pub traces: Vec<AscentTrace>,
    pub status: SolveStatus,
}

impl SolveResult {
    pub fn trace_json_lines(&self) -> String {
        self.traces.iter().enumerate().map(|(i, t)| t.to_json_lines(i)).collect()
    }
}

/// Evaluates `tree` at `f`, collecting loop traces.
pub fn solve(tree: &DpTree, f: &Value, budget: IterationBudget) -> Result<SolveResult> {
    let mut ctx = EvalContext::new(budget);
    let antichain = tree.eval_in(f, &mut ctx)?;
    let capped = ctx.traces.iter().any(|t| t.status == TraceStatus::IterationCapReached);
    let status = if capped {
        SolveStatus::IterationCapReached
    } else if antichain.is_empty() {
        SolveStatus::Infeasible
    } else {
        SolveStatus::Converged
    };
    Ok(SolveResult { antichain, traces: ctx.traces, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posets::Poset;

    fn nat_singleton(n: u64) -> Antichain {
        Antichain::singleton(Poset::nat(), Value::Nat(n)).unwrap()
    }

    #[test]
    fn identity_converges_at_bottom() {
        let t = kleene_lfp(Poset::nat().bottom_antichain(), IterationBudget::default(), |r| Ok(r.clone())).unwrap();
        assert_eq!(t.status, TraceStatus::Converged(0));
        assert_eq!(t.steps, vec![nat_singleton(0), nat_singleton(0)]);
    }

    #[test]
    fn successor_exhausts_budget() {
        let budget = IterationBudget::new(10).unwrap();
        let t = kleene_lfp(Poset::nat().bottom_antichain(), budget, |r| {
            let Value::Nat(n) = r.elements()[0] else { unreachable!() };
            Ok(nat_singleton(n + 1))
        })
        .unwrap();
        assert_eq!(t.status, TraceStatus::IterationCapReached);
        assert_eq!(t.last(), &nat_singleton(10));
        assert_eq!(t.iterations(), 10);
        assert!(t.is_ascending());
    }

    #[test]
    fn empty_step_is_infeasible() {
        let t = kleene_lfp(Poset::nat().bottom_antichain(), IterationBudget::default(), |_| {
            Ok(Antichain::empty(Poset::nat()))
        })
        .unwrap();
        assert_eq!(t.status, TraceStatus::Infeasible);
        assert!(t.last().is_empty());
    }

    #[test]
    fn descending_map_is_rejected() {
        let r = kleene_lfp(nat_singleton(5), IterationBudget::default(), |_| Ok(nat_singleton(1)));
        assert_eq!(r.unwrap_err(), Error::NonMonotoneStep { step: 0 });
    }

    #[test]
    fn fixed_point_checks() {
        let succ = |r: &Antichain| -> Result<Antichain> {
            Ok(match r.elements().first() {
                Some(Value::Nat(n)) => nat_singleton(n + 1),
                _ => r.clone(),
            })
        };
        assert!(!check_fixed_point(succ, &nat_singleton(0)).unwrap());
        assert!(check_fixed_point(succ, &Antichain::empty(Poset::nat())).unwrap());
    }

    #[test]
    fn budget_must_be_positive() {
        assert!(IterationBudget::new(0).is_err());
        assert_eq!(IterationBudget::default().get(), 1000);
    }

    #[test]
    fn json_lines_have_stable_fields() {
        let t = AscentTrace {
            steps: vec![nat_singleton(0), Antichain::singleton(Poset::nat(), Value::Top).unwrap()],
            status: TraceStatus::IterationCapReached,
        };
        let s = t.to_json_lines(0);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], r#"{"antichain":[0],"status":"ascending","step":0,"trace":0}"#);
        assert_eq!(lines[1], r#"{"antichain":["⊤"],"status":"iteration_cap_reached","step":1,"trace":0}"#);
    }
}
