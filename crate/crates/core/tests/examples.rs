use lambda_h::syntax::Mode;

mod running_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/running_example.rs"));
}
mod eidetic_trace {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/eidetic_trace.rs"));
}
mod type_checking {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/type_checking.rs"));
}
mod space_fact {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/space_fact.rs"));
}
mod differential {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/differential.rs"));
}
mod coercion_algebra {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/coercion_algebra.rs"));
}
mod oracle_and_choice {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/oracle_and_choice.rs"));
}
mod runtime_terms {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/runtime_terms.rs"));
}
mod function_proxies {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/function_proxies.rs"));
}
mod algebra_properties {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/algebra_properties.rs"));
}

#[test]
fn running_example_runs() {
    let got = running_example::run_example().unwrap();
    assert_eq!(got, ["blame l1", "-1", "blame l3", "blame l1"]);
}

#[test]
fn eidetic_trace_runs() {
    let rules = eidetic_trace::run_example().unwrap();
    assert_eq!(rules[..3], ["E-Coerce", "E-CastInnerE/E-Coerce", "E-CastMergeE"]);
}

#[test]
fn type_checking_runs() {
    type_checking::run_example().unwrap();
}

#[test]
fn space_fact_runs() {
    let rows = space_fact::run_example().unwrap();
    let pending = |m: Mode| rows.iter().filter(|r| r.0 == m).map(|r| r.2).collect::<Vec<_>>();
    let e = pending(Mode::Eidetic);
    assert!(e.iter().all(|&p| p == e[0]));
    let c = pending(Mode::Classic);
    assert!(c[0] < c[1] && c[1] < c[2]);
}

#[test]
fn differential_runs() {
    assert_eq!(differential::run_example().unwrap(), 0);
}

#[test]
fn coercion_algebra_runs() {
    let merged = coercion_algebra::run_example().unwrap();
    assert_eq!(merged, "[{x:Int|x >= 0}^l1, {x:Int|x mod 2 = 0}^l2]");
}

#[test]
fn oracle_and_choice_runs() {
    let (lo, hi, plain, smart) = oracle_and_choice::run_example().unwrap();
    assert_eq!((lo.as_str(), hi.as_str()), ("blame l3", "blame l3"));
    assert!(smart < plain);
}

#[test]
fn runtime_terms_runs() {
    assert!(runtime_terms::run_example().unwrap() > 0);
}

#[test]
fn function_proxies_runs() {
    for (mode, _, wrappers) in function_proxies::run_example().unwrap() {
        assert_eq!(wrappers, if mode == Mode::Classic { 3 } else { 1 });
    }
}

#[test]
fn algebra_properties_runs() {
    assert_eq!(algebra_properties::run_example().unwrap(), 0);
}
