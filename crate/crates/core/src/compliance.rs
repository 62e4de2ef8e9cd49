//! Judging a trace: final verdicts, accountability and explanations.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::Serialize;
use serde_json::json;

use crate::commitment::{Commitment, CommitmentId, Principal, Provenance};
use crate::event::Event;
use crate::lifecycle::CommitmentState;
use crate::protocol::Protocol;
use crate::state::SocialState;
use crate::trace::{Trace, TraceError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Discharged,
    Violated,
    /// Detached with a consequent still pending at the horizon.
    Outstanding,
    /// Still conditional at the horizon.
    Conditional,
    Expired,
    Released,
    /// Cancelled before it detached. Counted apart from compliance.
    Withdrawn,
    Delegated,
    Assigned,
}

impl Verdict {
    pub fn of(state: CommitmentState) -> Verdict {
        match state {
            CommitmentState::Conditional => Verdict::Conditional,
            CommitmentState::Detached => Verdict::Outstanding,
            CommitmentState::Discharged => Verdict::Discharged,
            CommitmentState::Violated => Verdict::Violated,
            CommitmentState::Expired => Verdict::Expired,
            CommitmentState::Released => Verdict::Released,
            // A detached commitment that is cancelled is violated instead.
            CommitmentState::Cancelled => Verdict::Withdrawn,
            CommitmentState::Delegated => Verdict::Delegated,
            CommitmentState::Assigned => Verdict::Assigned,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Discharged => "discharged",
            Verdict::Violated => "violated",
            Verdict::Outstanding => "outstanding",
            Verdict::Conditional => "conditional",
            Verdict::Expired => "expired",
            Verdict::Released => "released",
            Verdict::Withdrawn => "withdrawn",
            Verdict::Delegated => "delegated",
            Verdict::Assigned => "assigned",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitmentVerdict {
    pub id: CommitmentId,
    pub verdict: Verdict,
    pub debtor: Principal,
    pub creditor: Principal,
    pub text: String,
    /// Causes of each transition, creation first.
    pub justification: Vec<Provenance>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub id: CommitmentId,
    pub accountable: Principal,
    pub owed_to: Principal,
    /// Ancestors through delegation or assignment, oldest first.
    pub chain: Vec<CommitmentId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PrincipalSummary {
    pub compliant: bool,
    /// Verdicts of commitments this principal is debtor of.
    pub counts: BTreeMap<Verdict, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplianceReport {
    pub horizon: u64,
    pub verdicts: Vec<CommitmentVerdict>,
    pub violations: Vec<Violation>,
    pub principals: BTreeMap<Principal, PrincipalSummary>,
    pub state: SocialState,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("no commitment {0} in the report")]
pub struct UnknownCommitment(pub CommitmentId);

/// Replay `trace` up to `horizon` (default: its last event), close it with a
/// clock tick at the horizon, and judge every commitment.
pub fn check(trace: &Trace, protocol: &Protocol, horizon: Option<u64>) -> Result<ComplianceReport, TraceError> {
    let horizon = horizon.unwrap_or_else(|| trace.events.iter().map(|e| e.time).max().unwrap_or(0));
    let state = trace.replay_until(protocol, Some(horizon))?;
    let seq = trace.events.iter().map(|e| e.seq).max().unwrap_or(0) + 1;
    let state = state
        .observe_domain_event(&Event::tick(seq, horizon))
        .map_err(|source| TraceError::Apply { seq, source })?;
    Ok(judge(state, horizon, &trace.principals()))
}

fn ancestry(state: &SocialState, c: &Commitment) -> Vec<CommitmentId> {
    let mut chain = Vec::new();
    let mut cur = c.parent;
    while let Some(id) = cur {
        chain.push(id);
        cur = state.get(id).and_then(|p| p.parent);
    }
    chain.reverse();
    chain
}

fn judge(state: SocialState, horizon: u64, principals: &[Principal]) -> ComplianceReport {
    let mut summaries: BTreeMap<Principal, PrincipalSummary> = principals
        .iter()
        .map(|p| (p.clone(), PrincipalSummary { compliant: true, ..Default::default() }))
        .collect();
    let mut verdicts = Vec::new();
    let mut violations = Vec::new();
    for c in state.commitments() {
        let verdict = Verdict::of(c.state);
        let summary = summaries.entry(c.debtor.clone()).or_insert_with(|| PrincipalSummary {
            compliant: true,
            ..Default::default()
        });
        *summary.counts.entry(verdict).or_default() += 1;
        summaries.entry(c.creditor.clone()).or_insert_with(|| PrincipalSummary {
            compliant: true,
            ..Default::default()
        });
        if verdict == Verdict::Violated {
            violations.push(Violation {
                id: c.id,
                accountable: c.debtor.clone(),
                owed_to: c.creditor.clone(),
                chain: ancestry(&state, c),
            });
        }
        verdicts.push(CommitmentVerdict {
            id: c.id,
            verdict,
            debtor: c.debtor.clone(),
            creditor: c.creditor.clone(),
            text: c.atom().to_string(),
            justification: c.history.iter().map(|t| t.cause.clone()).collect(),
        });
    }
    for v in &violations {
        if let Some(s) = summaries.get_mut(&v.accountable) {
            s.compliant = false;
        }
    }
    ComplianceReport {
        horizon,
        verdicts,
        violations,
        principals: summaries,
        state,
    }
}

/// One step in the history of a commitment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub commitment: CommitmentId,
    pub cause: Provenance,
    pub event: Option<Event>,
    pub state: CommitmentState,
    pub created: bool,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.event {
            Some(e) => write!(f, "{} {e}: ", self.commitment)?,
            None => write!(f, "{} {}: ", self.commitment, self.cause)?,
        }
        if self.created {
            write!(f, "created {}", self.state.as_str())
        } else {
            f.write_str(self.state.as_str())
        }
    }
}

/// The transitions of `id`, preceded by those of the commitment it was
/// delegated or assigned from.
pub fn explain(report: &ComplianceReport, id: CommitmentId) -> Result<Vec<Step>, UnknownCommitment> {
    let state = &report.state;
    let c = state.get(id).ok_or(UnknownCommitment(id))?;
    let mut steps = Vec::new();
    for ancestor in ancestry(state, c).into_iter().chain([id]) {
        let a = state.get(ancestor).expect("ancestors exist");
        for (i, t) in a.history.iter().enumerate() {
            steps.push(Step {
                commitment: ancestor,
                cause: t.cause.clone(),
                event: state.event_for(&t.cause).cloned(),
                state: t.state,
                created: i == 0,
            });
        }
    }
    Ok(steps)
}

impl ComplianceReport {
    pub fn all_compliant(&self) -> bool {
        self.principals.values().all(|s| s.compliant)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "horizon {}", self.horizon);
        let _ = writeln!(out, "commitments:");
        if self.verdicts.is_empty() {
            let _ = writeln!(out, "  (none)");
        }
        for v in &self.verdicts {
            let _ = writeln!(out, "  {} {:<11} {}", v.id, v.verdict, v.text);
        }
        let _ = writeln!(out, "violations:");
        if self.violations.is_empty() {
            let _ = writeln!(out, "  (none)");
        }
        for v in &self.violations {
            let _ = write!(out, "  {} accountable {} owed to {}", v.id, v.accountable, v.owed_to);
            if !v.chain.is_empty() {
                let chain: Vec<String> = v.chain.iter().map(ToString::to_string).collect();
                let _ = write!(out, " via {}", chain.join(" -> "));
            }
            out.push('\n');
        }
        let _ = writeln!(out, "principals:");
        for (p, s) in &self.principals {
            let counts: Vec<String> = s.counts.iter().map(|(v, n)| format!("{v} {n}")).collect();
            let status = if s.compliant { "compliant" } else { "NOT compliant" };
            if counts.is_empty() {
                let _ = writeln!(out, "  {p}: {status}");
            } else {
                let _ = writeln!(out, "  {p}: {status} ({})", counts.join(", "));
            }
        }
        if self.all_compliant() {
            let _ = writeln!(out, "all principals compliant");
        } else {
            let _ = writeln!(out, "{} violation(s)", self.violations.len());
        }
        out
    }

    /// One JSON object per line: verdicts, then violations, then principals.
    pub fn to_records(&self) -> String {
        let mut out = String::new();
        for v in &self.verdicts {
            let r = json!({
                "record": "verdict",
                "id": v.id.0,
                "verdict": v.verdict,
                "debtor": v.debtor,
                "creditor": v.creditor,
                "commitment": v.text,
                "justification": v.justification.iter().map(ToString::to_string).collect::<Vec<_>>(),
            });
            let _ = writeln!(out, "{r}");
        }
        for v in &self.violations {
            let r = json!({
                "record": "violation",
                "id": v.id.0,
                "accountable": v.accountable,
                "owed_to": v.owed_to,
                "chain": v.chain.iter().map(|c| c.0).collect::<Vec<_>>(),
            });
            let _ = writeln!(out, "{r}");
        }
        for (p, s) in &self.principals {
            let counts: BTreeMap<&str, usize> = s.counts.iter().map(|(v, n)| (v.as_str(), *n)).collect();
            let r = json!({
                "record": "principal",
                "principal": p,
                "compliant": s.compliant,
                "counts": counts,
            });
            let _ = writeln!(out, "{r}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse, parse_commitment};
    use crate::protocol::Casting;
    use crate::proposition::Value;
    use crate::trace::Setup;

    const SRC: &str = "\
protocol Deal
  roles B, S
  param item: value
  message offer: S -> B (item)
    create C(S, B, pay(B, item), deliver(S, item))
  message hand: S -> B (item)
    delegate C(S, B, _, _) to \"Sam\"
";

    fn trace_with(events: Vec<Event>) -> Trace {
        let mut t = Trace::new(Casting::new().cast("B", "Bob").cast("S", "Sue"));
        t.events = events;
        t
    }

    fn offer(seq: u64) -> Event {
        Event::sent(seq, "offer", Principal::new("Sue"), Principal::new("Bob"), vec![Value::atom("x")], seq)
    }

    fn domain(seq: u64, name: &str, who: &str) -> Event {
        Event::domain(seq, name, vec![Value::atom(who), Value::atom("x")], seq)
    }

    #[test]
    fn empty_trace_is_compliant() {
        let r = check(&Trace::default(), &parse(SRC).unwrap(), None).unwrap();
        assert!(r.verdicts.is_empty());
        assert!(r.all_compliant());
    }

    #[test]
    fn open_horizon_is_outstanding_not_violated() {
        let p = parse(SRC).unwrap();
        let r = check(&trace_with(vec![offer(1), domain(2, "pay", "Bob")]), &p, None).unwrap();
        assert_eq!(r.verdicts[0].verdict, Verdict::Outstanding);
        assert!(r.all_compliant());
        let r = check(&trace_with(vec![offer(1), domain(2, "pay", "Bob"), domain(3, "deliver", "Sue")]), &p, None).unwrap();
        assert_eq!(r.verdicts[0].verdict, Verdict::Discharged);
    }

    #[test]
    fn deadline_violation_names_the_debtor() {
        let p = parse(SRC).unwrap();
        let mut t = trace_with(vec![]);
        t.setups.push(Setup {
            label: "d".into(),
            commitment: parse_commitment("C(S, B, T, deliver(S, \"x\") . tick(10))").unwrap(),
        });
        let r = check(&t, &p, Some(5)).unwrap();
        assert_eq!(r.verdicts[0].verdict, Verdict::Outstanding);
        let r = check(&t, &p, Some(10)).unwrap();
        assert_eq!(r.verdicts[0].verdict, Verdict::Violated);
        assert_eq!(r.violations[0].accountable, Principal::new("Sue"));
        assert_eq!(r.violations[0].owed_to, Principal::new("Bob"));
        assert!(!r.principals[&Principal::new("Sue")].compliant);
        assert!(r.principals[&Principal::new("Bob")].compliant);
    }

    #[test]
    fn explain_follows_delegation() {
        let p = parse(SRC).unwrap();
        let hand = Event::sent(2, "hand", Principal::new("Sue"), Principal::new("Bob"), vec![Value::atom("x")], 2);
        let r = check(&trace_with(vec![offer(1), hand]), &p, None).unwrap();
        let steps = explain(&r, CommitmentId(1)).unwrap();
        let shown: Vec<String> = steps.iter().map(ToString::to_string).collect();
        assert_eq!(
            shown,
            [
                "#0 offer(x) Sue -> Bob [sent]: created conditional",
                "#0 hand(x) Sue -> Bob [sent]: delegated",
                "#1 hand(x) Sue -> Bob [sent]: created conditional",
            ]
        );
        assert_eq!(explain(&r, CommitmentId(9)), Err(UnknownCommitment(CommitmentId(9))));
    }
}
