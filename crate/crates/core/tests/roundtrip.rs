//! Printing then parsing a protocol gives the same protocol back.

use commitlab::dsl::{self, parse, print};
use commitlab::{
    CommitmentAtom, EventAtom, MeaningClause, MessageSchema, OrderingConstraint, ParamDecl, ParamType, Proposition,
    Protocol, Role, Term, Value,
};
use proptest::prelude::*;

fn ident(prefix: &'static str) -> impl Strategy<Value = String> {
    (0..6u8).prop_map(move |i| format!("{prefix}{i}"))
}

fn literal() -> impl Strategy<Value = String> {
    prop_oneof![
        (0..2000u32).prop_map(|n| n.to_string()),
        Just("-5".to_string()),
        "[a-zA-Z \"\\\\\t\n_.-]{0,8}",
    ]
}

fn term() -> impl Strategy<Value = Term> {
    prop_oneof![
        ident("v").prop_map(Term::Var),
        literal().prop_map(|s| Term::Lit(Value::Atom(s))),
        prop::collection::vec(literal(), 0..3).prop_map(|items| Term::Lit(Value::Set(items))),
        Just(Term::Any),
    ]
}

fn event() -> impl Strategy<Value = EventAtom> {
    (ident("e"), prop::collection::vec(term(), 0..3)).prop_map(|(name, args)| EventAtom::new(name, args))
}

fn proposition() -> impl Strategy<Value = Proposition> {
    let leaf = prop_oneof![
        Just(Proposition::Top),
        Just(Proposition::Wildcard),
        event().prop_map(Proposition::Event),
        (event(), event()).prop_map(|(a, b)| Proposition::Before(a, b)),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Proposition::And),
            (term(), term(), inner.clone(), inner.clone())
                .prop_map(|(d, c, a, q)| Proposition::commitment(d, c, a, q)),
            (ident("x"), prop::collection::vec(term(), 1..3), inner.clone()).prop_map(|(v, mut dom, body)| {
                // A single variable is a parameter domain; any other single
                // term is written as a one-element set.
                if let [Term::Var(_)] = dom.as_slice() {
                    dom.push(Term::Lit(Value::atom("1")));
                }
                Proposition::exists_in(v, dom, body)
            }),
            (ident("v"), inner).prop_map(|(v, body)| Proposition::exists_in("x0", vec![Term::Var(v)], body)),
        ]
    })
}

fn commitment() -> impl Strategy<Value = CommitmentAtom> {
    (term(), term(), proposition(), proposition()).prop_map(|(d, c, a, q)| CommitmentAtom::new(d, c, a, q))
}

fn clause() -> impl Strategy<Value = MeaningClause> {
    prop_oneof![
        commitment().prop_map(MeaningClause::Create),
        commitment().prop_map(MeaningClause::Release),
        commitment().prop_map(MeaningClause::Cancel),
        (commitment(), term()).prop_map(|(target, to)| MeaningClause::Delegate { target, to }),
        (commitment(), term()).prop_map(|(target, to)| MeaningClause::Assign { target, to }),
    ]
}

fn protocol() -> impl Strategy<Value = Protocol> {
    let roles = prop::collection::vec(ident("R"), 0..4);
    let params = prop::collection::vec((ident("p"), any::<bool>()), 0..4);
    let messages = prop::collection::vec(
        (
            ident("m"),
            ident("R"),
            ident("R"),
            prop::collection::vec(ident("p"), 0..3),
            prop::collection::vec(clause(), 0..3),
        ),
        0..4,
    );
    let orderings = prop::collection::vec((event(), event()), 0..2);
    (ident("P"), roles, params, messages, orderings).prop_map(|(name, roles, params, messages, orderings)| Protocol {
        name,
        roles: roles.into_iter().map(Role::new).collect(),
        params: params
            .into_iter()
            .map(|(name, set)| ParamDecl {
                name,
                ty: if set { ParamType::Set } else { ParamType::Value },
            })
            .collect(),
        messages: messages
            .into_iter()
            .map(|(name, s, r, params, meaning)| MessageSchema {
                name,
                sender: Role::new(s),
                receiver: Role::new(r),
                params,
                meaning,
            })
            .collect(),
        orderings: orderings
            .into_iter()
            .map(|(before, after)| OrderingConstraint { before, after })
            .collect(),
        source: Default::default(),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn print_then_parse_is_identity(p in protocol()) {
        let printed = print(&p);
        let parsed = parse(&printed).map_err(|d| TestCaseError::fail(format!("{printed}\n{d:?}")))?;
        prop_assert_eq!(&parsed, &p, "{}", printed);
        prop_assert_eq!(print(&parsed), printed);
    }

    #[test]
    fn propositions_round_trip_through_source(q in proposition()) {
        let src = {
            let c = CommitmentAtom::new(Term::atom("a"), Term::atom("b"), q.clone(), Proposition::Top);
            c.to_source()
        };
        let back = dsl::parse_commitment(&src).map_err(|d| TestCaseError::fail(format!("{src}\n{d:?}")))?;
        prop_assert_eq!(back.antecedent, q);
    }
}

#[test]
fn bundled_protocols_round_trip() {
    use commitlab::demo::*;
    for src in [APPOINTMENT_PROTOCOL, BAD_ORDERING_PROTOCOL, WRAPPED_ORDERING_PROTOCOL] {
        let p = parse(src).unwrap();
        let printed = print(&p);
        assert_eq!(parse(&printed).unwrap(), p);
        assert_eq!(print(&parse(&printed).unwrap()), printed);
    }
}
