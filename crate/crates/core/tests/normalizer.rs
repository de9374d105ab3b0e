mod common;

use std::time::Instant;

use common::random_scramble;
use num_bigint::BigInt;
use pd2::init::SeedBasis;
use pd2::normalizer::{normalize_to_depth, verify_certificate};
use pd2::standard::{build_r1, standard_r1, CharKind, OrientationCharacter, PairPresentation, StandardWordSpec};
use pd2::{FreeWord, GeneratorSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn chi(p: u64, kind: CharKind) -> OrientationCharacter {
    OrientationCharacter::new(p, kind).unwrap()
}

#[test]
fn exact_standard_word_needs_no_correction() {
    let c = chi(3, CharKind::Trivial);
    let gens = GeneratorSet::new(2, 1).unwrap();
    let spec = StandardWordSpec::new(2, 1, c).unwrap();
    let pair = PairPresentation::new(gens, standard_r1(&spec).unwrap()).unwrap();
    let cert = normalize_to_depth(&pair, c, 5, None).unwrap();
    assert_eq!(cert.steps.len(), 3);
    assert!(cert.steps.iter().all(|s| s.t.iter().all(|t| t.is_empty())));
    assert!(verify_certificate(&cert, &pair).unwrap());
}

#[test]
fn scrambled_round_trip_timing() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (p, kind, n, b) in [(3, CharKind::Trivial, 2, 1), (3, CharKind::Up(1), 2, 0), (2, CharKind::MinusTimes(2), 2, 1)] {
        let c = chi(p, kind);
        let gens = GeneratorSet::new(n, b).unwrap();
        let spec = StandardWordSpec::new(n, b, c).unwrap();
        let start = Instant::now();
        for _ in 0..3 {
            let phi = random_scramble(&mut rng, gens, 4);
            let s0 = phi.apply(&standard_r1(&spec).unwrap());
            let pair = PairPresentation::new(gens, s0).unwrap();
            let pert = |rng: &mut ChaCha8Rng| {
                let a = rng.gen_range(1..=gens.rank());
                let bb = rng.gen_range(1..=gens.rank());
                FreeWord::generator(gens, a).unwrap().commutator(&FreeWord::generator(gens, bb).unwrap()).unwrap()
            };
            let seed = SeedBasis {
                x: phi.images[..n].iter().map(|w| w.multiply(&pert(&mut rng)).unwrap()).collect(),
                conjugators: phi.conjugators.iter().map(|h| h.multiply(&pert(&mut rng)).unwrap()).collect(),
            };
            let cert = normalize_to_depth(&pair, c, 5, Some(&seed)).unwrap();
            assert!(cert.residual_weight >= 6);
            assert!(verify_certificate(&cert, &pair).unwrap());
            let _ = build_r1(&spec, &phi.images).unwrap();
            let _ = BigInt::from(0);
        }
        eprintln!("p={p} {kind} n={n} b={b}: {:?} for 3", start.elapsed());
    }
}

fn word(gens: GeneratorSet, pairs: &[(usize, i64)]) -> FreeWord {
    FreeWord::from_pairs(gens, pairs).unwrap()
}

#[test]
fn refine_step_examples() {
    use pd2::init::initialize_mod3;
    use pd2::normalizer::Normalizer;

    // q = 0: s₀ = [x₁,x₂]·[x₁,[x₁,x₂]]
    let gens = GeneratorSet::new(2, 0).unwrap();
    let c = chi(3, CharKind::Trivial);
    let x1 = word(gens, &[(1, 1)]);
    let x2 = word(gens, &[(2, 1)]);
    let comm = x1.commutator(&x2).unwrap();
    let s0 = comm.multiply(&x1.commutator(&comm).unwrap()).unwrap();
    let pair = PairPresentation::new(gens, s0).unwrap();
    let norm = Normalizer::new(&pair, c, 3).unwrap();
    let init = initialize_mod3(&pair, c, None, 1 << 20).unwrap();
    let state = norm.start(&init).unwrap();
    assert_eq!(norm.collector().filtration_weight(&state.residual), 3);
    let (next, rec) = norm.refine_step(&state).unwrap();
    assert_eq!(rec.j, 3);
    assert!(norm.collector().filtration_weight(&next.residual) >= 4);
    assert_eq!(next.j, 4);

    // identity residual: nothing moves
    let (again, rec) = {
        let pair = PairPresentation::new(gens, comm.clone()).unwrap();
        let norm = Normalizer::new(&pair, c, 3).unwrap();
        let state = norm.start(&initialize_mod3(&pair, c, None, 1 << 20).unwrap()).unwrap();
        assert!(state.residual.is_identity());
        norm.refine_step(&state).unwrap()
    };
    assert!(again.residual.is_identity());
    assert!(rec.t.iter().all(|t| t.is_empty()));

    // q = 2: residual x₁⁴ = π²ξ₁ is absorbed into λ₁
    let c = chi(2, CharKind::MinusTimes(2));
    let spec = StandardWordSpec::new(2, 0, c).unwrap();
    let s0 = word(gens, &[(1, 4)]).multiply(&standard_r1(&spec).unwrap()).unwrap();
    let pair = PairPresentation::new(gens, s0).unwrap();
    let norm = Normalizer::new(&pair, c, 3).unwrap();
    let state = norm.start(&initialize_mod3(&pair, c, None, 1 << 20).unwrap()).unwrap();
    let (next, rec) = norm.refine_step(&state).unwrap();
    assert_eq!(rec.alpha, vec!["1".to_string(), "0".to_string()]);
    assert_eq!(next.lambda, vec![BigInt::from(4), BigInt::from(0)]);
    assert!(next.residual.is_identity());
}

#[test]
fn corrupted_certificates_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let c = chi(3, CharKind::Up(1));
    let gens = GeneratorSet::new(2, 1).unwrap();
    let spec = StandardWordSpec::new(2, 1, c).unwrap();
    let phi = random_scramble(&mut rng, gens, 4);
    let pair = PairPresentation::new(gens, phi.apply(&standard_r1(&spec).unwrap())).unwrap();
    let seed = SeedBasis {
        x: phi.images[..2].iter().map(|w| w.multiply(&word(gens, &[(1, -1), (3, -1), (1, 1), (3, 1)])).unwrap()).collect(),
        conjugators: phi.conjugators.clone(),
    };
    let cert = normalize_to_depth(&pair, c, 4, Some(&seed)).unwrap();
    assert!(verify_certificate(&cert, &pair).unwrap());
    assert!(cert.steps.iter().any(|s| s.t.iter().any(|t| !t.is_empty())));

    // one t entry changed, hash resealed
    let mut bad = cert.clone();
    let step = bad.steps.iter_mut().find(|s| s.t.iter().any(|t| !t.is_empty())).unwrap();
    let t = step.t.iter_mut().find(|t| !t.is_empty()).unwrap();
    let bumped: BigInt = t[0].1.parse::<BigInt>().unwrap() + 1;
    t[0].1 = bumped.to_string();
    let bad = bad.seal();
    assert!(!verify_certificate(&bad, &pair).unwrap());

    // stale hash
    let mut stale = cert.clone();
    stale.residual_weight += 1;
    assert!(!verify_certificate(&stale, &pair).unwrap());

    // final basis that does not generate: x₂ ↦ x₁
    let mut degenerate = cert.clone();
    degenerate.initial.x[1] = degenerate.initial.x[0].clone();
    let degenerate = degenerate.seal();
    assert!(!verify_certificate(&degenerate, &pair).unwrap());

    // different pair
    let other = PairPresentation::new(gens, standard_r1(&spec).unwrap()).unwrap();
    assert!(!verify_certificate(&cert, &other).unwrap());

    // malformed
    let mut broken = cert.clone();
    broken.steps.pop();
    assert!(verify_certificate(&broken.seal(), &pair).is_err());
}

#[test]
fn initialization_failures() {
    use pd2::init::initialize_mod3;
    use pd2::InitFailure;

    let init_err = |pair: &PairPresentation, c| match initialize_mod3(pair, c, None, 1 << 20) {
        Err(pd2::Error::Init(f)) => f,
        other => panic!("expected an initialisation failure, got {other:?}"),
    };

    // s₀ = s₁³ at p = 3
    let gens = GeneratorSet::new(0, 1).unwrap();
    let pair = PairPresentation::new(gens, word(gens, &[(1, 3)])).unwrap();
    let f = init_err(&pair, chi(3, CharKind::Trivial));
    assert!(matches!(f, InitFailure::HomologyObstruction(_)));
    assert!(f.is_conclusive());
    let err = normalize_to_depth(&pair, chi(3, CharKind::Trivial), 3, None).unwrap_err();
    assert!(matches!(err, pd2::Error::Init(InitFailure::HomologyObstruction(_))));

    // capped relator x₁³ in rank 2: degenerate
    let gens = GeneratorSet::new(2, 1).unwrap();
    let pair = PairPresentation::new(gens, word(gens, &[(1, 3), (3, 1)])).unwrap();
    assert!(matches!(init_err(&pair, chi(3, CharKind::Up(1))), InitFailure::Degenerate(_)));

    // q-invariant 9 against a character with q = 3
    let x1 = word(gens, &[(1, 1)]);
    let x2 = word(gens, &[(2, 1)]);
    let s0 = word(gens, &[(1, 9)]).multiply(&x1.commutator(&x2).unwrap()).unwrap().multiply(&word(gens, &[(3, 1)])).unwrap();
    let pair = PairPresentation::new(gens, s0).unwrap();
    assert!(matches!(init_err(&pair, chi(3, CharKind::Up(1))), InitFailure::Degenerate(_)));

    // seed that is off modulo G₃
    let spec = StandardWordSpec::new(2, 1, chi(3, CharKind::Trivial)).unwrap();
    let pair = PairPresentation::new(gens, standard_r1(&spec).unwrap()).unwrap();
    let seed = SeedBasis { x: vec![x2.clone(), x1.clone()], conjugators: vec![FreeWord::identity(gens)] };
    match initialize_mod3(&pair, chi(3, CharKind::Trivial), Some(&seed), 1 << 20) {
        Err(pd2::Error::Init(f @ InitFailure::SeedMismatch(_))) => assert!(!f.is_conclusive()),
        other => panic!("{other:?}"),
    }
}

#[test]
fn search_finds_a_basis_when_designated_generators_fail() {
    use pd2::init::initialize_mod3;
    use pd2::nilpotent::{Collector, TruncationParams};

    let c = chi(2, CharKind::MinusPower(2));
    let gens = GeneratorSet::new(2, 0).unwrap();
    let spec = StandardWordSpec::new(2, 0, c).unwrap();
    // r₁ in the basis (x₂, x₁x₂)
    let images = vec![word(gens, &[(2, 1)]), word(gens, &[(1, 1), (2, 1)])];
    let s0 = build_r1(&spec, &images).unwrap();
    let pair = PairPresentation::new(gens, s0.clone()).unwrap();
    let init = initialize_mod3(&pair, c, None, 1 << 20).unwrap();
    assert_ne!(init.x, vec![word(gens, &[(1, 1)]), word(gens, &[(2, 1)])]);
    let col: Collector<BigInt> = Collector::new(2, TruncationParams::new(2, 2, 2).unwrap()).unwrap();
    let r1 = col.collect(&build_r1(&spec, &init.words(&pair).unwrap()).unwrap()).unwrap();
    let z = col.multiply(&col.inverse(&r1).unwrap(), &col.collect(&s0).unwrap()).unwrap();
    assert!(col.filtration_weight(&z) >= 3);
    let cert = normalize_to_depth(&pair, c, 4, None).unwrap();
    assert!(verify_certificate(&cert, &pair).unwrap());
}

#[test]
fn rescaling_makes_peripheral_exponent_one() {
    use pd2::init::initialize_mod3;

    // s₀ = [x₁,x₂]·s₁⁴ at p = 3: s₁ is replaced by s₁⁴
    let gens = GeneratorSet::new(2, 1).unwrap();
    let c = chi(3, CharKind::Trivial);
    let s0 = word(gens, &[(1, -1), (2, -1), (1, 1), (2, 1), (3, 4)]);
    let pair = PairPresentation::new(gens, s0).unwrap();
    let init = initialize_mod3(&pair, c, None, 1 << 20).unwrap();
    assert_eq!(init.mu, vec![BigInt::from(4)]);
    let cert = normalize_to_depth(&pair, c, 4, None).unwrap();
    assert!(verify_certificate(&cert, &pair).unwrap());
}

#[test]
fn capping_off() {
    use pd2::normalizer::{cap_off, CapOutcome};
    use pd2::standard::cup_form;

    let gens = GeneratorSet::new(2, 1).unwrap();
    let s0 = word(gens, &[(1, -1), (2, -1), (1, 1), (2, 1), (3, 1)]);
    let pair = PairPresentation::new(gens, s0).unwrap();
    match cap_off(&pair, 1).unwrap() {
        CapOutcome::Demushkin(r) => {
            let closed = GeneratorSet::new(2, 0).unwrap();
            assert_eq!(r, word(closed, &[(1, -1), (2, -1), (1, 1), (2, 1)]));
            assert!(cup_form(&r, 3).unwrap().nondegenerate);
        }
        other => panic!("{other:?}"),
    }

    let gens = GeneratorSet::new(0, 2).unwrap();
    let pair = PairPresentation::new(gens, word(gens, &[(1, 1), (2, 1)])).unwrap();
    match cap_off(&pair, 2).unwrap() {
        CapOutcome::TwoPeripherals(p) => {
            let one = GeneratorSet::new(0, 1).unwrap();
            assert_eq!(p.s0, word(one, &[(1, 1)]));
        }
        other => panic!("{other:?}"),
    }

    // twice on a standard (n=2, b=2) pair
    let c = chi(3, CharKind::Trivial);
    let gens = GeneratorSet::new(2, 2).unwrap();
    let spec = StandardWordSpec::new(2, 2, c).unwrap();
    let pair = PairPresentation::new(gens, standard_r1(&spec).unwrap()).unwrap();
    let CapOutcome::Pair(once) = cap_off(&pair, 1).unwrap() else { panic!() };
    assert!(verify_certificate(&normalize_to_depth(&once, c, 3, None).unwrap(), &once).unwrap());
    let CapOutcome::Demushkin(r) = cap_off(&once, 1).unwrap() else { panic!() };
    assert!(cup_form(&r, 3).unwrap().nondegenerate);

    assert!(cap_off(&pair, 3).is_err());
}

#[test]
fn certificates_are_deterministic() {
    let c = chi(2, CharKind::MinusPower(2));
    let gens = GeneratorSet::new(2, 1).unwrap();
    let run = || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = StandardWordSpec::new(2, 1, c).unwrap();
        let phi = random_scramble(&mut rng, gens, 5);
        let pair = PairPresentation::new(gens, phi.apply(&standard_r1(&spec).unwrap())).unwrap();
        let seed = SeedBasis { x: phi.images[..2].to_vec(), conjugators: phi.conjugators.clone() };
        normalize_to_depth(&pair, c, 4, Some(&seed)).unwrap().to_json()
    };
    assert_eq!(run(), run());
}

fn scrambled_pair(rng: &mut ChaCha8Rng, spec: &StandardWordSpec) -> (PairPresentation, SeedBasis) {
    let gens = spec.gens();
    let phi = random_scramble(rng, gens, 4);
    let pair = PairPresentation::new(gens, phi.apply(&standard_r1(spec).unwrap())).unwrap();
    let seed = SeedBasis { x: phi.images[..spec.n].to_vec(), conjugators: phi.conjugators.clone() };
    (pair, seed)
}

#[test]
fn refinement_is_monotone_at_every_depth() {
    use pd2::init::{initialize_for_class, SEARCH_BOUND};
    use pd2::normalizer::Normalizer;

    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (p, kind, n, b) in [(3, CharKind::Trivial, 2, 1), (3, CharKind::Up(1), 2, 1), (2, CharKind::MinusPower(2), 2, 1), (2, CharKind::MinusTimes(2), 1, 1)] {
        let c = chi(p, kind);
        let spec = StandardWordSpec::new(n, b, c).unwrap();
        for depth in 3..=5 {
            let (pair, seed) = scrambled_pair(&mut rng, &spec);
            let normalizer = Normalizer::new(&pair, c, depth).unwrap();
            let init = initialize_for_class(&pair, c, Some(&seed), SEARCH_BOUND, depth + 1).unwrap();
            let mut state = normalizer.start(&init).unwrap();
            assert!(normalizer.collector().filtration_weight(&state.residual) >= state.j);
            while state.j <= depth {
                let (next, record) = normalizer.refine_step(&state).unwrap();
                assert_eq!(record.j, state.j);
                assert_eq!(next.j, state.j + 1);
                assert!(normalizer.collector().filtration_weight(&next.residual) >= next.j, "{spec:?} j={}", state.j);
                state = next;
            }
            let cert = normalizer.run(&init).unwrap();
            assert!(verify_certificate(&cert, &pair).unwrap());
        }
    }
}

#[test]
fn capped_pairs_normalize_again() {
    use pd2::normalizer::{cap_off, CapOutcome};
    use pd2::standard::cup_form;

    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for (p, kind, n) in [(3, CharKind::Trivial, 2), (2, CharKind::MinusTimes(2), 2), (3, CharKind::Up(1), 2)] {
        let c = chi(p, kind);
        let spec = StandardWordSpec::new(n, 2, c).unwrap();
        let (pair, seed) = scrambled_pair(&mut rng, &spec);
        assert!(verify_certificate(&normalize_to_depth(&pair, c, 4, Some(&seed)).unwrap(), &pair).unwrap());

        let CapOutcome::Pair(once) = cap_off(&pair, 1).unwrap() else { panic!("expected a pair") };
        let smaller = once.gens;
        let relabel: Vec<FreeWord> = (1..=pair.gens.rank())
            .map(|g| match g {
                g if g <= n => FreeWord::generator(smaller, g).unwrap(),
                g if g == n + 1 => FreeWord::identity(smaller),
                g => FreeWord::generator(smaller, g - 1).unwrap(),
            })
            .collect();
        let moved = |w: &FreeWord| w.apply_endomorphism(&relabel).unwrap();
        let seed = SeedBasis { x: seed.x.iter().map(moved).collect(), conjugators: seed.conjugators[1..].iter().map(moved).collect() };
        let cert = normalize_to_depth(&once, c, 4, Some(&seed)).unwrap();
        assert!(verify_certificate(&cert, &once).unwrap());

        let CapOutcome::Demushkin(r) = cap_off(&once, 1).unwrap() else { panic!("expected a closed word") };
        assert!(cup_form(&r, p).unwrap().nondegenerate);
    }
}
