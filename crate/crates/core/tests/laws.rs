use catkap::instantiations::DhParams;
use catkap::laws::{broken_dh, check_model, LawConfig};
use catkap::protocols::{InstanceSpec, ProtocolKind};
use catkap::registry::{default_params, Instance, INSTANCE_NAMES};

fn quick() -> LawConfig {
    LawConfig {
        triples: 2000,
        checks: 200,
        max_dim: 3,
        ..LawConfig::default()
    }
}

#[test]
fn registered_models_obey_their_laws() {
    for name in INSTANCE_NAMES {
        let spec = InstanceSpec {
            name: name.to_string(),
            params: default_params(name).unwrap(),
        };
        let report = Instance::build(&spec, ProtocolKind::Ckap, 2).unwrap().check_laws(&quick()).unwrap();
        assert!(report.is_clean(), "{name}: {:?}", report.first_violation());
        assert!(report.outcomes.iter().all(|o| o.checked > 0));
    }
}

#[test]
fn enriched_models_check_more_laws() {
    let count = |name: &str| {
        let spec = InstanceSpec {
            name: name.into(),
            params: default_params(name).unwrap(),
        };
        Instance::build(&spec, ProtocolKind::Ckap, 2)
            .unwrap()
            .check_laws(&quick())
            .unwrap()
            .outcomes
            .len()
    };
    assert!(count("mpf") > count("dh"));
    assert!(count("t-dh") > count("mpf"));
}

#[test]
fn wrong_composition_is_caught_with_a_witness() {
    let broken = broken_dh(DhParams { p: 23, g: 5, s: 22 }).unwrap();
    let report = check_model(&broken, &quick()).unwrap();
    let bad = report.first_violation().expect("a violation");
    let w = bad.violation.as_ref().unwrap();
    assert_ne!(w.lhs, w.rhs);
    assert!(!w.inputs.is_empty());
}

#[test]
fn laws_are_reproducible_for_a_seed() {
    let broken = broken_dh(DhParams { p: 23, g: 5, s: 22 }).unwrap();
    let a = check_model(&broken, &quick()).unwrap();
    let b = check_model(&broken, &quick()).unwrap();
    assert_eq!(a, b);
}
