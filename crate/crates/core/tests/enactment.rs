//! Simulation, replay and local views agree with each other.

use commitlab::compliance::Verdict;
use commitlab::demo::{self, APPOINTMENT_SHOWUP_SCENARIO, WRAPPED_ORDERING_PROTOCOL};
use commitlab::dsl;
use commitlab::{
    check, run, Casting, CommitmentFilter, CommitmentState, Event, Principal, Scenario, SocialState, Trace, Value,
};

fn showup(seed: u64) -> Scenario {
    let mut s = Scenario::parse(APPOINTMENT_SHOWUP_SCENARIO).unwrap();
    s.seed = seed;
    s
}

fn states(s: &SocialState) -> Vec<CommitmentState> {
    s.commitments().map(|c| c.state).collect()
}

#[test]
fn runs_are_deterministic_in_the_seed() {
    let p = demo::appointment_protocol();
    for seed in 0..20 {
        let a = run(&p, &showup(seed)).unwrap();
        let b = run(&p, &showup(seed)).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.trace.to_jsonl(), b.trace.to_jsonl());
    }
}

#[test]
fn engine_state_equals_replay_of_its_trace() {
    let p = demo::appointment_protocol();
    for seed in 0..50 {
        let e = run(&p, &showup(seed)).unwrap();
        assert!(e.quiescent);
        assert_eq!(e.trace.replay(&p).unwrap(), e.global, "seed {seed}");
        for (who, view) in &e.views {
            assert_eq!(&e.trace.local_view(&p, who).unwrap(), view, "seed {seed}, {who}");
        }
    }
}

#[test]
fn trace_lines_round_trip() {
    let p = demo::appointment_protocol();
    for seed in 0..10 {
        let t = run(&p, &showup(seed)).unwrap().trace;
        let back = Trace::from_jsonl(&t.to_jsonl()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.replay(&p).unwrap(), t.replay(&p).unwrap());
    }
}

#[test]
fn replay_until_equals_replay_of_prefix() {
    let p = demo::appointment_protocol();
    let t = run(&p, &showup(3)).unwrap().trace;
    let end = t.events.iter().map(|e| e.time).max().unwrap();
    for h in 0..=end + 1 {
        let mut prefix = t.clone();
        prefix.events.retain(|e| e.time <= h);
        assert_eq!(t.replay_until(&p, Some(h)).unwrap(), prefix.replay(&p).unwrap(), "horizon {h}");
    }
}

#[test]
fn replay_is_a_fixpoint_of_progress() {
    let p = demo::appointment_protocol();
    for seed in 0..10 {
        let s = run(&p, &showup(seed)).unwrap().global;
        assert_eq!(s.progress().unwrap(), s);
    }
}

#[test]
fn showing_up_discharges_both_appointment_commitments() {
    let p = demo::appointment_protocol();
    for seed in 0..20 {
        let e = run(&p, &showup(seed)).unwrap();
        assert!(states(&e.global).iter().all(|s| *s == CommitmentState::Discharged), "seed {seed}");
        let report = check(&e.trace, &p, None).unwrap();
        assert!(report.all_compliant());
        assert!(report.verdicts.iter().all(|v| v.verdict == Verdict::Discharged));
    }
}

#[test]
fn observing_showups_discharges_the_final_pair() {
    let p = demo::appointment_protocol();
    let t = demo::demo_trace();
    let mut s = t.replay(&p).unwrap();
    let active: Vec<_> = s.active().into_iter().map(|c| c.id).collect();
    assert_eq!(active.len(), 2);
    let last = t.events.last().unwrap();
    for (i, who) in ["Bianca", "Alessia"].into_iter().enumerate() {
        let seq = last.seq + 1 + i as u64;
        let e = Event::domain(seq, "showUp", vec![Value::atom(who), Value::atom("1400")], last.time + 1);
        s = s.observe_domain_event(&e).unwrap();
    }
    for id in active {
        assert_eq!(s.get(id).unwrap().state, CommitmentState::Discharged);
    }
}

#[test]
fn showing_up_at_another_slot_does_not_discharge() {
    let p = demo::appointment_protocol();
    let t = demo::demo_trace();
    let last = t.events.last().unwrap();
    let s = t
        .replay(&p)
        .unwrap()
        .observe_domain_event(&Event::domain(
            last.seq + 1,
            "showUp",
            vec![Value::atom("Bianca"), Value::atom("1600")],
            last.time + 1,
        ))
        .unwrap();
    assert_eq!(s.active().len(), 2);
}

#[test]
fn query_filters_select_by_party_and_state() {
    let p = demo::appointment_protocol();
    let s = demo::demo_trace().replay(&p).unwrap();
    let bianca_owes = s.query(&CommitmentFilter::default().debtor("Bianca").active());
    assert_eq!(bianca_owes.len(), 1);
    assert_eq!(bianca_owes[0].creditor, Principal::new("Alessia"));
    let owed_bianca = s.query(&CommitmentFilter::default().creditor("Bianca").active());
    assert_eq!(owed_bianca.len(), 1);
    assert_eq!(s.query(&CommitmentFilter::default().state(CommitmentState::Discharged)).len(), 2);
    assert_eq!(s.query(&CommitmentFilter::default().involving("Bianca")).len(), 4);
    assert_eq!(s.query(&CommitmentFilter::default().involving("Nobody")).len(), 0);
    assert_eq!(s.query(&CommitmentFilter::default()).len(), s.len());
}

fn wrapped_trace(order: [&str; 2]) -> Trace {
    let mut t = Trace::new(Casting::new().cast("PHY", "Alessia").cast("PAT", "Bianca"));
    let phy = Principal::new("Alessia");
    let pat = Principal::new("Bianca");
    t.events.push(Event::sent(1, "register", phy.clone(), pat.clone(), vec![], 0));
    for (i, name) in order.into_iter().enumerate() {
        let (from, to, args) = if name == "availableSlots" {
            (phy.clone(), pat.clone(), vec![Value::set(["1400"])])
        } else {
            (pat.clone(), phy.clone(), vec![])
        };
        t.events.push(Event::sent(2 + i as u64, name, from, to, args, 1 + i as u64));
    }
    t
}

#[test]
fn offer_before_request_violates_the_wrapped_ordering() {
    let p = dsl::load(WRAPPED_ORDERING_PROTOCOL).unwrap();
    let bad = check(&wrapped_trace(["availableSlots", "requestAppointment"]), &p, None).unwrap();
    let v: Vec<_> = bad.violations.iter().collect();
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].accountable, Principal::new("Alessia"));

    let good = check(&wrapped_trace(["requestAppointment", "availableSlots"]), &p, None).unwrap();
    assert!(good.violations.is_empty());
}
