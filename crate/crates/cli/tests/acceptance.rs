//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use catkap::instantiations::{dh_category, kolee_category, mpf_model, ConjugationParams, DhParams, MpfParams};
use catkap::laws::{broken_dh, check_model, LawConfig};
use catkap::netsim::{brute_force_dh, run_session, AttackOutcome, Broker, SEARCH_CEILING};
use catkap::protocols::{
    lift_ckap_transcript, CkapParty, EckapOptions, EckapParty, InstanceSpec, ProtocolKind, PublicSetup, Role,
    SessionConfig,
};
use catkap::registry::{build_setup, default_params, Instance};
use catkap::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

const SESSIONS: u64 = 1000;

const DH31: DhParams = DhParams {
    p: 2147483579,
    g: 4,
    s: 1073741789,
};

const DH16: DhParams = DhParams {
    p: 65267,
    g: 4,
    s: 32633,
};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn spec(name: &str, params: Value) -> InstanceSpec {
    InstanceSpec {
        name: name.into(),
        params,
    }
}

fn kolee_params() -> ConjugationParams {
    serde_json::from_value(default_params("kolee").unwrap()).unwrap()
}

fn mpf_params(k: usize) -> MpfParams {
    let base = (0..k)
        .map(|i| (0..k).map(|j| 2 + (7 * i as u64 + 3 * j as u64) * 1_000_003).collect())
        .collect();
    MpfParams {
        p: 2147483579,
        k,
        base,
    }
}

// ---- standalone oracles ----

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

/// Square-and-multiply.
fn modpow(base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    let mut b = base % m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

type M2 = [[u64; 2]; 2];

fn m2(entries: &[u64]) -> M2 {
    [[entries[0], entries[1]], [entries[2], entries[3]]]
}

fn m2_mul(a: &M2, b: &M2, q: u64) -> M2 {
    let mut c = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = (a[i][0] * b[0][j] + a[i][1] * b[1][j]) % q;
        }
    }
    c
}

fn m2_inv(a: &M2, q: u64) -> M2 {
    let det = (a[0][0] * a[1][1] + q * q - a[0][1] * a[1][0] % q) % q;
    let di = modpow(det, q - 2, q);
    [
        [a[1][1] * di % q, (q - a[0][1]) * di % q],
        [(q - a[1][0]) * di % q, a[0][0] * di % q],
    ]
}

/// `(W^Y)_ij = prod_k w_ik^(y_kj)`.
fn mpf_right(w: &[Vec<u64>], y: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let k = w.len();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| (0..k).fold(1, |acc, t| mul_mod(acc, modpow(w[i][t], y[t][j], p), p)))
                .collect()
        })
        .collect()
}

/// `(^X W)_ij = prod_k w_kj^(x_ik)`.
fn mpf_left(x: &[Vec<u64>], w: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let k = w.len();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| (0..k).fold(1, |acc, t| mul_mod(acc, modpow(w[t][j], x[i][t], p), p)))
                .collect()
        })
        .collect()
}

fn square(entries: &[u64], k: usize) -> Vec<Vec<u64>> {
    entries.chunks(k).map(<[u64]>::to_vec).collect()
}

// ---- criteria ----

fn agreement_suite() -> Verdict {
    let started = Instant::now();
    let mut runs = Vec::new();
    let mut check = |label: &str, cfg: &dyn Fn(u64) -> SessionConfig| -> Result<(), String> {
        for i in 0..SESSIONS {
            let c = cfg(i);
            let run = run_session(&c, &mut Broker::default()).map_err(|e| format!("{label} #{i}: {e}"))?;
            if !run.outcome.agreement {
                return Err(format!("{label} session {i} disagreed"));
            }
        }
        runs.push(format!("{label} {SESSIONS}"));
        Ok(())
    };
    let dh31 = json!(DH31);
    check("ckap/dh", &|i| SessionConfig::new(ProtocolKind::Ckap, spec("dh", dh31.clone()), vec![2 * i, 2 * i + 1]))?;
    check("ckap/kolee", &|i| {
        SessionConfig::new(ProtocolKind::Ckap, spec("kolee", json!(kolee_params())), vec![2 * i, 2 * i + 1])
    })?;
    check("eckap/mpf", &|i| {
        let k = 1 + (i % 4) as usize;
        SessionConfig::new(ProtocolKind::Eckap, spec("mpf", json!(mpf_params(k))), vec![2 * i, 2 * i + 1])
            .with_setup_seed(i)
    })?;
    check("eckap/t-dh", &|i| {
        SessionConfig::new(ProtocolKind::Eckap, spec("t-dh", dh31.clone()), vec![2 * i, 2 * i + 1])
            .with_setup_seed(i)
    })?;
    for n in [2usize, 3, 5, 8] {
        check(&format!("multi/dh n={n}"), &|i| {
            let seeds = (0..n as u64).map(|j| i * 16 + j).collect();
            SessionConfig::new(ProtocolKind::Multi, spec("dh", dh31.clone()), seeds).with_setup_seed(i)
        })?;
    }
    let elapsed = started.elapsed();
    if elapsed >= Duration::from_secs(120) {
        return Err(format!("all agreed but took {:.1} s", elapsed.as_secs_f64()));
    }
    Ok(format!("{}; {:.1} s", runs.join(", "), elapsed.as_secs_f64()))
}

fn find_seed(role: Role, exponent: u64) -> u64 {
    let dh = dh_category(DhParams { p: 23, g: 5, s: 22 }).unwrap();
    (0..)
        .find(|&seed| {
            let p = CkapParty::new(&dh, role, "", dh.generator(), &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
            *p.secret().payload() == exponent
        })
        .unwrap()
}

fn dh_toy_equivalence() -> Verdict {
    let (m, n) = (6, 15);
    let seeds = vec![find_seed(Role::Alice, m), find_seed(Role::Bob, n)];
    let cfg = SessionConfig::new(ProtocolKind::Ckap, spec("dh", json!({"p": 23, "g": 5, "s": 22})), seeds.clone())
        .disclosing(true, true);
    let run = run_session(&cfg, &mut Broker::default()).map_err(|e| e.to_string())?;
    let t = &run.transcript;
    let offer = |who: &str| t.message_from(who).map(|m| m.payload.clone());
    let (oa, ob) = (modpow(5, m, 23), modpow(5, n, 23));
    let key = modpow(oa, n, 23);
    if (oa, ob, key) != (8, 19, 2) || modpow(ob, m, 23) != key {
        return Err(format!("oracle gives offers {oa}, {ob} and key {key}"));
    }
    let got = (offer("alice"), offer("bob"), run.outcome.keys.get("alice").cloned());
    let want = (Some(json!("8")), Some(json!("19")), Some(json!("2")));
    if got != want || run.outcome.keys.get("bob") != Some(&json!("2")) {
        return Err(format!("transcript has {got:?}"));
    }
    Ok(format!("seeds {seeds:?} give m=6, n=15; offers 8, 19; key 2"))
}

fn kolee_equivalence() -> Verdict {
    let params = kolee_params();
    let model = kolee_category(params.clone()).unwrap();
    let q = params.q;
    let g = (
        m2(&params.g[0].concat()),
        m2(&params.g[1].concat()),
    );
    for i in 0..SESSIONS {
        let seeds = [3 * i, 3 * i + 1];
        let secret = |role, seed| {
            let p = CkapParty::new(&model, role, "", model.public_element(), &mut ChaCha20Rng::seed_from_u64(seed))
                .unwrap();
            p.secret().payload().clone()
        };
        let a = secret(Role::Alice, seeds[0]);
        let b = secret(Role::Bob, seeds[1]);
        let (a1, a2) = (m2(a.first.entries()), m2(a.second.entries()));
        let (b1, b2) = (m2(b.first.entries()), m2(b.second.entries()));
        let ab = (m2_mul(&a1, &b1, q), m2_mul(&a2, &b2, q));
        let k1 = m2_mul(&m2_mul(&ab.0, &g.0, q), &m2_inv(&ab.0, q), q);
        let k2 = m2_mul(&m2_mul(&ab.1, &g.1, q), &m2_inv(&ab.1, q), q);
        let expected = json!([k1.concat(), k2.concat()]);
        let cfg = SessionConfig::new(ProtocolKind::Ckap, spec("kolee", json!(params)), seeds.to_vec());
        let run = run_session(&cfg, &mut Broker::default()).map_err(|e| e.to_string())?;
        for (who, key) in &run.outcome.keys {
            if *key != expected {
                return Err(format!("session {i}: {who} has {key}, evaluator gives {expected}"));
            }
        }
    }
    Ok(format!("{SESSIONS} sessions at q=7, d=2"))
}

fn mpf_equivalence() -> Verdict {
    for i in 0..SESSIONS {
        let k = 1 + (i % 4) as usize;
        let params = mpf_params(k);
        let p = params.p;
        let model = mpf_model(params.clone()).unwrap();
        let opts = EckapOptions::polynomial(k, k, 2);
        let setup = build_setup(&model, ProtocolKind::Eckap, 2, &opts, i).map_err(|e| e.to_string())?;
        let PublicSetup::Eckap(setup) = setup else { unreachable!() };
        let seeds = [5 * i, 5 * i + 2];
        let secrets = |role, seed| {
            let party = EckapParty::new(&model, role, "", &setup, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
            let (psi, omega) = party.secrets();
            (square(psi.entries(), k), square(omega.entries(), k))
        };
        let (psi_a, omega_a) = secrets(Role::Alice, seeds[0]);
        let (psi_b, omega_b) = secrets(Role::Bob, seeds[1]);
        let w = &params.base;
        let from_bob = mpf_left(&omega_b, &mpf_right(w, &psi_b, p), p);
        let key = mpf_left(&omega_a, &mpf_right(&from_bob, &psi_a, p), p);
        let expected: Vec<Value> = key.concat().iter().map(|x| json!(x.to_string())).collect();

        let cfg = SessionConfig::new(ProtocolKind::Eckap, spec("mpf", json!(params)), seeds.to_vec())
            .with_setup_seed(i)
            .with_eckap(opts);
        let run = run_session(&cfg, &mut Broker::default()).map_err(|e| e.to_string())?;
        for (who, got) in &run.outcome.keys {
            if got["entries"] != json!(expected) {
                return Err(format!("session {i} (k={k}): {who} has {}, evaluator gives {expected:?}", got["entries"]));
            }
        }
    }
    Ok(format!("{SESSIONS} sessions at p=2147483579, k=1..4"))
}

fn reduction() -> Verdict {
    let cases = [("dh", json!(DH16)), ("kolee", json!(kolee_params()))];
    for (name, params) in cases {
        let lifted = spec(&format!("t-{name}"), params.clone());
        let inst = Instance::build(&lifted, ProtocolKind::Eckap, 2).map_err(|e| e.to_string())?;
        for seed in 0..100u64 {
            let seeds = vec![seed, seed + 7];
            let ckap = SessionConfig::new(ProtocolKind::Ckap, spec(name, params.clone()), seeds.clone())
                .disclosing(true, true);
            let eckap = SessionConfig::new(ProtocolKind::Eckap, lifted.clone(), seeds)
                .with_eckap(EckapOptions::reduction())
                .disclosing(true, true);
            let c = run_session(&ckap, &mut Broker::default()).map_err(|e| e.to_string())?;
            let e = run_session(&eckap, &mut Broker::default()).map_err(|e| e.to_string())?;
            let lifted_c = match &inst {
                Instance::TDh(t) => lift_ckap_transcript(t, &c.transcript, lifted.clone()),
                Instance::TKoLee(t) => lift_ckap_transcript(t, &c.transcript, lifted.clone()),
                _ => unreachable!(),
            }
            .map_err(|e| e.to_string())?;
            if lifted_c.to_json_string() != e.transcript.to_json_string() {
                return Err(format!("{name} seed {seed}: transcripts differ"));
            }
        }
    }
    Ok("100 seeds each for dh and kolee, byte-identical".into())
}

fn law_suites() -> Verdict {
    let cfg = LawConfig::default();
    let models = [
        ("dh", default_params("dh").unwrap()),
        ("dh", json!(DH31)),
        ("kolee", default_params("kolee").unwrap()),
        ("mpf", json!(mpf_params(4))),
        ("t-dh", default_params("t-dh").unwrap()),
        ("t-kolee", default_params("t-kolee").unwrap()),
    ];
    let mut summary = Vec::new();
    for (name, params) in models {
        let inst = Instance::build(&spec(name, params), ProtocolKind::Ckap, 2).map_err(|e| e.to_string())?;
        let report = inst.check_laws(&cfg).map_err(|e| e.to_string())?;
        if let Some(bad) = report.first_violation() {
            return Err(format!("{}: {} violated: {:?}", report.model, bad.law, bad.violation));
        }
        let assoc = report.outcomes.iter().find(|o| o.law == "associativity").unwrap();
        let others = report.outcomes.iter().filter(|o| o.law != "associativity").map(|o| o.checked).min().unwrap();
        if assoc.checked < cfg.triples || others < cfg.checks {
            return Err(format!("{}: too few checks ({} triples, min {others})", report.model, assoc.checked));
        }
        summary.push(report.model);
    }
    let broken = check_model(&broken_dh(DhParams { p: 23, g: 5, s: 22 }).unwrap(), &cfg).map_err(|e| e.to_string())?;
    let Some(bad) = broken.first_violation() else {
        return Err("broken fixture passed every law".into());
    };
    let w = bad.violation.as_ref().unwrap();
    println!(
        "      broken fixture witness ({}): inputs {} lhs {} rhs {}",
        bad.law,
        Value::from(w.inputs.clone()),
        w.lhs,
        w.rhs
    );
    Ok(format!("clean: {}; broken fixture caught", summary.join(", ")))
}

fn attack_demo() -> Verdict {
    let mut slowest = Duration::ZERO;
    for i in 0..100u64 {
        let cfg = SessionConfig::new(ProtocolKind::Ckap, spec("dh", json!(DH16)), vec![i, i + 1000]);
        let run = run_session(&cfg, &mut Broker::default()).map_err(|e| e.to_string())?;
        let started = Instant::now();
        let outcome = brute_force_dh(&run.view, &DH16, None).map_err(|e| e.to_string())?;
        let took = started.elapsed();
        slowest = slowest.max(took);
        match outcome {
            AttackOutcome::Recovered { key, .. } if key == run.outcome.keys["alice"] => {}
            other => return Err(format!("transcript {i}: {other:?}")),
        }
        if took >= Duration::from_secs(1) {
            return Err(format!("transcript {i} took {:.3} s", took.as_secs_f64()));
        }
    }
    let guard_params = DH31;
    assert!(guard_params.s >= 1 << 25);
    let cfg = SessionConfig::new(ProtocolKind::Ckap, spec("dh", json!(guard_params)), vec![1, 2]);
    let run = run_session(&cfg, &mut Broker::default()).map_err(|e| e.to_string())?;
    match brute_force_dh(&run.view, &guard_params, None) {
        Err(Error::ParamsTooLarge(_)) => {}
        other => return Err(format!("guard did not trigger at s={}: {other:?}", guard_params.s)),
    }
    Ok(format!(
        "100/100 recovered at s={}, slowest {:.4} s; s={} refused (ceiling {SEARCH_CEILING})",
        DH16.s,
        slowest.as_secs_f64(),
        guard_params.s
    ))
}

fn cli_determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_catkap");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let params = dir.path().join("dh16.json");
    std::fs::write(&params, json!(DH16).to_string()).map_err(|e| e.to_string())?;
    let p = params.to_str().unwrap().to_string();
    let invocations: Vec<Vec<String>> = (0..20u64)
        .map(|i| {
            let seeds = format!("{},{}", i * 3, i * 3 + 1);
            let mut args: Vec<String> = match i % 5 {
                0 => vec!["--protocol", "ckap", "--inst", "dh", "--params", &p],
                1 => vec!["--protocol", "ckap", "--inst", "kolee"],
                2 => vec!["--protocol", "eckap", "--inst", "mpf"],
                3 => vec!["--protocol", "eckap", "--inst", "t-dh", "--dim", "3"],
                _ => vec!["--protocol", "multi", "--inst", "dh", "--params", &p, "--parties", "5"],
            }
            .into_iter()
            .map(String::from)
            .collect();
            let seeds = if i % 5 == 4 { i.to_string() } else { seeds };
            args.extend(["--seeds".into(), seeds, "--setup-seed".into(), i.to_string()]);
            if i % 2 == 0 {
                args.push("--disclose-keys".into());
            }
            args
        })
        .collect();
    let run = |args: &[String], out: &Path| -> Result<Vec<u8>, String> {
        let status = Command::new(bin)
            .arg("run")
            .args(args)
            .arg("--out")
            .arg(out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("{args:?}: {}", String::from_utf8_lossy(&status.stderr)));
        }
        std::fs::read(out).map_err(|e| e.to_string())
    };
    for (i, args) in invocations.iter().enumerate() {
        let a = run(args, &dir.path().join(format!("{i}a.json")))?;
        let b = run(args, &dir.path().join(format!("{i}b.json")))?;
        if a != b {
            return Err(format!("invocation {i} ({args:?}) wrote different bytes"));
        }
    }
    Ok("20 invocations, byte-identical transcripts".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("agreement suite", agreement_suite),
        ("dh toy equivalence (p=23, m=6, n=15)", dh_toy_equivalence),
        ("ko-lee conjugation equivalence", kolee_equivalence),
        ("matrix power function equivalence", mpf_equivalence),
        ("free enrichment reduction", reduction),
        ("law suites", law_suites),
        ("attack demo", attack_demo),
        ("cli determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (name, criterion) in criteria {
        let started = Instant::now();
        let verdict = criterion();
        let secs = started.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.1} s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{secs:.1} s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
