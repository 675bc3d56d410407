use catkap::instantiations::{kolee_category, ConjugationParams, DhParams};
use catkap::netsim::{brute_force_dh, brute_force_generic, run_session, AttackOutcome, Broker, EavesdropperView};
use catkap::protocols::{InstanceSpec, ProtocolKind, SessionConfig};
use catkap::registry::{default_params, Instance};
use catkap::Error;
use serde_json::{json, Value};

fn session(name: &str, params: Value, seeds: [u64; 2]) -> (EavesdropperView, Value) {
    let spec = InstanceSpec {
        name: name.into(),
        params,
    };
    let run = run_session(&SessionConfig::new(ProtocolKind::Ckap, spec, seeds.to_vec()), &mut Broker::default()).unwrap();
    assert!(run.outcome.agreement);
    let key = run.outcome.keys["alice"].clone();
    (run.view, key)
}

#[test]
fn dh_search_recovers_every_toy_key() {
    let params = DhParams { p: 23, g: 5, s: 22 };
    for seed in 0..40 {
        let (view, key) = session("dh", json!(params), [seed, seed + 500]);
        match brute_force_dh(&view, &params, None).unwrap() {
            AttackOutcome::Recovered { index, key: found } => {
                assert!(index < 22);
                assert_eq!(found, key);
            }
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn dh_search_respects_bound_and_ceiling() {
    let params = DhParams { p: 65267, g: 4, s: 32633 };
    let (view, _) = session("dh", json!(params), [1, 2]);
    let alice = view.message_from("alice").unwrap().payload.clone();
    let found = brute_force_dh(&view, &params, None).unwrap();
    let AttackOutcome::Recovered { index, .. } = found else { panic!() };
    assert!(index >= 2);
    assert_eq!(brute_force_dh(&view, &params, Some(index)).unwrap(), AttackOutcome::Exhausted { searched: index });
    assert!(matches!(brute_force_dh(&view, &params, Some((1 << 24) + 1)), Err(Error::ParamsTooLarge(_))));
    assert!(alice.is_string());

    let big = DhParams { p: 2147483579, g: 4, s: 1073741789 };
    let (view, _) = session("dh", json!(big), [1, 2]);
    assert!(matches!(brute_force_dh(&view, &big, None), Err(Error::ParamsTooLarge(_))));
    assert_eq!(
        brute_force_dh(&view, &big, Some(1000)).unwrap(),
        AttackOutcome::Exhausted { searched: 1000 }
    );
}

#[test]
fn dh_search_rejects_foreign_views() {
    let params = DhParams { p: 23, g: 5, s: 22 };
    let (view, _) = session("kolee", default_params("kolee").unwrap(), [1, 2]);
    assert!(matches!(brute_force_dh(&view, &params, None), Err(Error::InvalidParams(_))));
}

#[test]
fn kolee_conjugation_scan_recovers_the_key() {
    let params: ConjugationParams = serde_json::from_value(default_params("kolee").unwrap()).unwrap();
    let model = kolee_category(params.clone()).unwrap();
    for seed in 0..100 {
        let (view, key) = session("kolee", json!(params), [seed, seed + 1]);
        match brute_force_generic(&view, &model, None).unwrap() {
            AttackOutcome::Recovered { key: found, index } => {
                assert!(index < 48);
                assert_eq!(found, key, "seed {seed}");
            }
            other => panic!("{other:?}"),
        }
    }
    let (view, _) = session("kolee", json!(params), [3, 4]);
    let AttackOutcome::Recovered { index, .. } = brute_force_generic(&view, &model, None).unwrap() else {
        panic!()
    };
    if index > 0 {
        assert_eq!(
            brute_force_generic(&view, &model, Some(index)).unwrap(),
            AttackOutcome::Exhausted { searched: index }
        );
    }
}

#[test]
fn models_without_secret_enumeration_are_refused() {
    let spec = InstanceSpec {
        name: "broken-dh".into(),
        params: default_params("broken-dh").unwrap(),
    };
    let run = run_session(&SessionConfig::new(ProtocolKind::Ckap, spec.clone(), vec![1, 2]), &mut Broker::default()).unwrap();
    let Instance::Broken(m) = Instance::build(&spec, ProtocolKind::Ckap, 2).unwrap() else { panic!() };
    assert!(matches!(brute_force_generic(&run.view, &m, Some(10)), Err(Error::NotEnumerable(_))));
}

#[test]
fn large_secret_spaces_need_a_bound() {
    let spec = InstanceSpec {
        name: "mpf".into(),
        params: default_params("mpf").unwrap(),
    };
    let run = run_session(&SessionConfig::new(ProtocolKind::Ckap, spec.clone(), vec![1, 2]), &mut Broker::default()).unwrap();
    let Instance::Mpf(m) = Instance::build(&spec, ProtocolKind::Ckap, 2).unwrap() else { panic!() };
    assert!(matches!(brute_force_generic(&run.view, &m, None), Err(Error::ParamsTooLarge(_))));
    assert!(matches!(
        brute_force_generic(&run.view, &m, Some(3)),
        Ok(AttackOutcome::Exhausted { searched: 3 }) | Ok(AttackOutcome::Recovered { .. })
    ));
}
