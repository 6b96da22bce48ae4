mod common;

use std::io::BufReader;
use std::net::TcpListener;
use std::sync::{Arc, Mutex};

use chandas::decode::{
    generate, run_batch, DecodeConfig, DecodeError, GenerateRequest, SamplerSpec, Scanner,
};
use chandas::lm::protocol::{read_frame, write_frame, Request, Response, DEFAULT_TIMEOUT};
use chandas::lm::{LocalLm, RemoteLm, TokenId, Vocab};
use chandas::meter::{classify, compile, scan, MeterSpec};
use common::{admissible, model, FixedLm};

fn config(sampler: SamplerSpec, seed: u64) -> DecodeConfig {
    DecodeConfig {
        sampler,
        seed,
        ..DecodeConfig::default()
    }
}

#[test]
fn forced_move_ignores_probabilities() {
    let spec = MeterSpec::from_pattern("two", 1, 2, "lg").unwrap();
    let vocab = Vocab::build(&["का क"]);
    for sampler in SamplerSpec::all() {
        for seed in 0..10 {
            let mut lm = FixedLm::new(vocab.clone(), &["का", "क"], false);
            let g = generate(&mut lm, &spec, &config(sampler, seed), &GenerateRequest::default()).unwrap();
            assert_eq!(vocab.text(g.tokens[0]), Some("क"));
            assert_eq!(g.text, "कका ॥");
            assert!(g.verdict.is_full());
        }
    }
}

#[test]
fn greedy_takes_the_more_probable_survivor() {
    let spec = MeterSpec::from_pattern("one", 1, 1, ".").unwrap();
    let vocab = Vocab::build(&["क ख"]);
    let mut lm = FixedLm::new(vocab.clone(), &["ख", "क"], false);
    let g = generate(&mut lm, &spec, &DecodeConfig::default(), &GenerateRequest::default()).unwrap();
    assert_eq!(g.text, "ख ॥");
}

#[test]
fn escalation_finds_a_conjunct() {
    // Twenty-five open short syllables first: they fill positions 1-6, but
    // the sixth must become heavy, which needs a following cluster.
    let consonants = [
        "क", "ख", "ग", "घ", "च", "छ", "ज", "झ", "ट", "ठ", "ड", "ढ", "ण", "त", "थ", "द", "ध",
        "न", "प", "फ", "ब", "भ", "म", "य", "र",
    ];
    let vocab = Vocab::build(&["स्त"]);
    let mut preferred = consonants.to_vec();
    preferred.push("स्त");
    let mut lm = FixedLm::new(vocab, &preferred, true);
    let g = generate(
        &mut lm,
        &MeterSpec::anustubh(),
        &DecodeConfig::default(),
        &GenerateRequest::default(),
    )
    .unwrap();
    assert!(g.verdict.is_full());
    let escalations: usize = g.steps.iter().map(|s| s.escalations).sum();
    assert!(escalations >= 1);
    assert!(g.steps.iter().any(|s| s.k == 50));
    assert!(g.steps.iter().all(|s| s.survived <= s.examined));
}

#[test]
fn dead_end_when_nothing_fits() {
    let vocab = Vocab::build(&["का"]);
    let mut lm = FixedLm::new(vocab, &["का"], false);
    let cfg = DecodeConfig {
        k_init: 1,
        k_max: Some(1),
        ..DecodeConfig::default()
    };
    match generate(&mut lm, &MeterSpec::anustubh(), &cfg, &GenerateRequest::default()) {
        Err(DecodeError::DeadEnd(p)) => {
            assert_eq!(p.syllables, 4);
            assert_eq!(p.text, "काकाकाका");
            assert_eq!(p.k_max, 1);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn short_server_answers_trigger_wider_requests() {
    let spec = MeterSpec::from_pattern("two", 1, 2, "lg").unwrap();
    let vocab = Vocab::build(&["का क"]);
    let ka = vocab.id("का").unwrap();
    let k = vocab.id("क").unwrap();
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let seen: Arc<Mutex<Vec<usize>>> = Arc::default();
    let log = seen.clone();
    let digest = vocab.digest();
    let size = vocab.len();
    std::thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut writer = stream;
        while let Some(req) = read_frame::<Request>(&mut reader).unwrap() {
            let resp = match req {
                Request::Hello { vocab_hash } => {
                    assert_eq!(vocab_hash, digest);
                    Response::Ok { vocab_size: size }
                }
                Request::Next { m, .. } => {
                    let m = m.unwrap_or(25);
                    log.lock().unwrap().push(m);
                    // Only the guru token until asked for more than 25.
                    let mut top = vec![(ka, (0.7f64).ln())];
                    if m > 25 {
                        top.push((k, (0.3f64).ln()));
                    }
                    Response::Dist { top }
                }
                Request::Bye => break,
            };
            write_frame(&mut writer, &resp).unwrap();
        }
    });
    let mut lm = RemoteLm::connect_tcp(addr, vocab, DEFAULT_TIMEOUT).unwrap();
    let g = generate(&mut lm, &spec, &DecodeConfig::default(), &GenerateRequest::default()).unwrap();
    assert_eq!(g.text, "कका ॥");
    let seen = seen.lock().unwrap().clone();
    assert_eq!(&seen[..2], &[25, 50]);
    assert_eq!(g.steps[0].escalations, 1);
}

#[test]
fn single_pada_meter_yields_eight_syllables() {
    let spec = MeterSpec::from_pattern("pada", 1, 8, "....lgg.").unwrap();
    let m = model();
    for seed in 0..40 {
        let g = generate(
            &mut LocalLm::new(m),
            &spec,
            &config(SamplerSpec::multinomial(), seed),
            &GenerateRequest::default(),
        )
        .unwrap();
        assert_eq!(g.syllables, 8);
        assert_eq!(scan(&g.text).unwrap().len(), 8);
        assert!(classify(&spec, &g.text).unwrap().is_full());
    }
}

#[test]
fn every_sampler_yields_full_verses() {
    let m = model();
    let spec = MeterSpec::anustubh();
    for sampler in SamplerSpec::all() {
        for seed in 0..20 {
            match generate(&mut LocalLm::new(m), &spec, &config(sampler, seed), &GenerateRequest::default()) {
                Ok(g) => {
                    assert!(classify(&spec, &g.text).unwrap().is_full(), "{}", g.text);
                    assert!(!g.degraded);
                }
                Err(DecodeError::DeadEnd(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn contrastive_without_representations_falls_back_to_greedy() {
    let spec = MeterSpec::from_pattern("one", 1, 1, ".").unwrap();
    let vocab = Vocab::build(&["क ख"]);
    let mut lm = FixedLm::new(vocab, &["ख", "क"], false);
    let g = generate(
        &mut lm,
        &spec,
        &config(SamplerSpec::contrastive(), 0),
        &GenerateRequest::default(),
    )
    .unwrap();
    assert!(g.degraded);
    assert!(g.record(false).stats.degraded);
    assert_eq!(g.text, "ख ॥");
}

#[test]
fn cache_does_not_change_output() {
    let m = model();
    let spec = MeterSpec::anustubh();
    for sampler in SamplerSpec::all() {
        for seed in 0..10 {
            let run = |cache| {
                let cfg = DecodeConfig {
                    cache_capacity: cache,
                    ..config(sampler, seed)
                };
                generate(&mut LocalLm::new(m), &spec, &cfg, &GenerateRequest::default())
                    .map(|g| (g.tokens, g.text))
                    .map_err(|e| e.to_string())
            };
            assert_eq!(run(0), run(1000));
            assert_eq!(run(3), run(1000));
        }
    }
}

#[test]
fn greedy_is_reproducible() {
    let m = model();
    let spec = MeterSpec::anustubh();
    let a = generate(&mut LocalLm::new(m), &spec, &DecodeConfig::default(), &GenerateRequest::default()).unwrap();
    let b = generate(&mut LocalLm::new(m), &spec, &DecodeConfig::default(), &GenerateRequest::default()).unwrap();
    assert_eq!(a.tokens, b.tokens);
    assert_eq!(
        serde_json::to_string(&a.record(false)).unwrap(),
        serde_json::to_string(&b.record(false)).unwrap()
    );
}

#[test]
fn forced_prefix_and_prompt() {
    let m = model();
    let spec = MeterSpec::anustubh();
    let request = GenerateRequest {
        prompt_context: m.vocab().tokenize("रामः ").unwrap(),
        prefix: "सीता ".into(),
    };
    let g = generate(&mut LocalLm::new(m), &spec, &DecodeConfig::default(), &request).unwrap();
    assert!(g.text.starts_with("सीता "));
    assert!(g.verdict.is_full());

    let bad = GenerateRequest {
        prefix: "का का का का का".into(),
        ..GenerateRequest::default()
    };
    assert!(matches!(
        generate(&mut LocalLm::new(m), &spec, &DecodeConfig::default(), &bad),
        Err(DecodeError::Prefix(_))
    ));
}

#[test]
fn unmasked_generation_is_scored_after_the_fact() {
    let m = model();
    let spec = MeterSpec::anustubh();
    let cfg = DecodeConfig {
        mask: false,
        ..config(SamplerSpec::multinomial(), 3)
    };
    let outcomes = run_batch(&mut LocalLm::new(m), &spec, &cfg, &vec![GenerateRequest::default(); 30]).unwrap();
    for o in &outcomes {
        let g = o.as_ref().unwrap();
        assert_eq!(classify(&spec, &g.text).unwrap(), g.verdict);
    }
}

/// Replays generations and compares the mask on every vocabulary token, at
/// every step, with the brute-force reference.
#[test]
fn mask_matches_reference_on_generated_prefixes() {
    let m = model();
    let spec = MeterSpec::anustubh();
    let vocab = m.vocab();
    for (sampler, seed) in [(SamplerSpec::Greedy, 0), (SamplerSpec::multinomial(), 1), (SamplerSpec::nucleus(), 2)] {
        let g = generate(&mut LocalLm::new(m), &spec, &config(sampler, seed), &GenerateRequest::default()).unwrap();
        let mut cached = Scanner::new(&spec, 1000);
        let mut plain = Scanner::new(&spec, 0);
        let mut last: Option<&str> = None;
        for &id in &g.tokens {
            for cand in 0..vocab.len() as TokenId {
                if vocab.is_special(cand) {
                    continue;
                }
                let text = vocab.text(cand).unwrap();
                let expected = admissible(&spec, cached.text(), last, text);
                let a = cached.check(text);
                let b = plain.check(text);
                assert_eq!(a, b, "{:?} + {text:?}", cached.text());
                assert_eq!(a.is_ok(), expected, "{:?} + {text:?}: {a:?}", cached.text());
            }
            let t = vocab.text(id).unwrap();
            cached.accept(t).unwrap();
            plain.accept(t).unwrap();
            assert!(compile(&spec).prefix_ok(cached.weights()).unwrap());
            last = Some(t);
        }
        assert!(cached.is_complete());
    }
}
