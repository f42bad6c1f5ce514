//! Cross-cutting adversary properties: causality compliance, Pauli-frame
//! identities, no-signaling bounds, bank accounting, and agreement between
//! the exact enumerator and the Monte Carlo sampler.

mod common;

use qpv_core::adversaries::AttackKind;
use qpv_core::analysis::{enumerate, exact_success, monte_carlo, Leaf};
use qpv_core::protocols::ProtocolKind;
use qpv_core::qstate::{Engine, Gate1Q};
use qpv_core::rng::{RandomSource, RngStream};
use qpv_core::scenario::{run_round, ScenarioConfig};
use std::f64::consts::FRAC_1_SQRT_2;

fn all_attacks() -> Vec<AttackKind> {
    vec![
        AttackKind::P1Intercept,
        AttackKind::P1Teleport1Epr,
        AttackKind::P1Mod2Epr,
        AttackKind::P1Mod1Epr,
        AttackKind::P2LocalMeasure {
            alpha: [1.0, 0.0],
            beta: [0.0, 0.0],
        },
        AttackKind::P2OneEpr,
        AttackKind::P2Mod5Epr,
        AttackKind::P1Oracle2n,
        AttackKind::P1OracleHybrid { m: 3 },
        AttackKind::P2OracleFull,
        AttackKind::NaiveWait,
    ]
}

/// Every attack/protocol combination runs clean through the scheduler: no
/// causality violations, no ownership errors, for many sampled rounds.
#[test]
fn every_attack_runs_clean_everywhere_it_applies() {
    for attack in all_attacks() {
        for protocol in attack.compatible_protocols() {
            let config = ScenarioConfig::new(protocol)
                .with_n(2)
                .with_attack(attack.clone())
                .with_seed(401);
            config.validate().unwrap();
            for i in 0..50u64 {
                let mut rng = RngStream::for_trial(401, i);
                run_round(&config, &mut rng, None).unwrap_or_else(|e| {
                    panic!("{attack:?} on {protocol:?} trial {i}: {e}")
                });
            }
        }
    }
}

/// Teleportation decode identity, exhaustively: for every (x, θ) and every
/// Bell outcome, measuring the teleported state in the θ basis gives
/// λ = x ⊕ k_θ.
#[test]
fn pauli_frame_reconstruction_identity() {
    let result = enumerate(|source| {
        let x = source.bit();
        let theta = source.bit();
        let mut engine = Engine::new();
        let q = engine.alloc_basis(x);
        if theta {
            engine.apply_gate(q, Gate1Q::H).unwrap();
        }
        let (a, b) = engine.alloc_epr();
        let k = engine.bell_measure(q, a, source).unwrap();
        let lambda = engine.measure_basis(b, theta, source).unwrap();
        Ok(Leaf {
            accept: lambda == x ^ k.k_for_basis(theta),
            ..Leaf::default()
        })
    })
    .unwrap();
    assert_eq!(result.branch_count, 16);
    assert!((result.probability - 1.0).abs() < 1e-12);
}

/// Discrimination succeeds at cos^2(π/8) for every individual challenge,
/// not just on average.
#[test]
fn intercept_success_is_uniform_over_challenges() {
    use qpv_core::analysis::exact_conditional;
    use qpv_core::protocols::Challenge;
    let cos2 = 0.5 + 0.5 * FRAC_1_SQRT_2;
    let config = ScenarioConfig::new(ProtocolKind::P1)
        .with_attack(AttackKind::P1Intercept)
        .with_seed(430);
    for x in [false, true] {
        for theta in [false, true] {
            let exact = exact_conditional(&config, &Challenge::P1 { x, theta }).unwrap();
            assert!(
                (exact.probability - cos2).abs() < 1e-12,
                "(x={x}, theta={theta}): {}",
                exact.probability
            );
        }
    }
}

/// Teleport-backed responses land on both verifiers exactly at the
/// light-cone deadline, from any interception points.
#[test]
fn teleport_attack_hits_the_deadline_exactly() {
    for (e0, e1) in [(0.5, 1.5), (0.25, 1.75), (0.9, 1.2)] {
        let mut config = ScenarioConfig::new(ProtocolKind::P1)
            .with_attack(AttackKind::P1Teleport1Epr)
            .with_seed(431);
        config.e0_pos = e0;
        config.e1_pos = e1;
        for i in 0..20u64 {
            let mut rng = RngStream::for_trial(431, i);
            let out = run_round(&config, &mut rng, None).unwrap();
            assert!(out.verdict.accept);
            for r in out.transcript.responses.iter().flatten() {
                assert!((r.t_arrive - 2.0).abs() < 1e-12, "({e0}, {e1}): {}", r.t_arrive);
            }
        }
    }
}

/// Conditional on correction-free return teleports, the two-qubit oracle
/// attack reports z with the honest statistics: every reported value is
/// accepted, and P(z=1 | cond) averages the per-oracle honest rates
/// (exactly 1/4 for every challenge, since exactly one oracle value makes
/// z=1 possible at rate 1/2).
#[test]
fn p2oracle_conditional_z_matches_honest() {
    use qpv_core::analysis::exact_conditional;
    use qpv_core::protocols::{draw_challenge, honest_z_distribution, Challenge};
    let check = |n: usize, challenge: &Challenge| {
        let config = ScenarioConfig::new(ProtocolKind::P2Oracle)
            .with_n(n)
            .with_attack(AttackKind::P2OracleFull)
            .with_seed(432);
        let exact = exact_conditional(&config, challenge).unwrap();
        let avg = 0.5
            * (honest_z_distribution(ProtocolKind::P2Oracle, challenge, Some(false))
                + honest_z_distribution(ProtocolKind::P2Oracle, challenge, Some(true)));
        assert!(
            (exact.z1_given_cond() - avg).abs() < 1e-12,
            "n={n} {challenge:?}: {} vs {avg}",
            exact.z1_given_cond()
        );
        // Every conditional report is consistent with the round's oracle.
        assert!(
            (exact.rate("accept_and_cond") - exact.rate("cond")).abs() < 1e-12,
            "n={n} {challenge:?}: rejected reports inside the success branch"
        );
    };

    // Exhaustive challenges at n = 1, sampled at n = 2 and 3.
    for bits in 0..32u64 {
        let b = qpv_core::bits::uint_to_bits(bits, 5);
        check(
            1,
            &Challenge::P2Oracle {
                x0: b[0],
                x1: b[1],
                theta: b[2],
                y0: vec![b[3]],
                y1: vec![b[4]],
            },
        );
    }
    let mut rng = RngStream::from_seed(433);
    for n in [2usize, 3] {
        for _ in 0..8 {
            let challenge = draw_challenge(ProtocolKind::P2Oracle, n, &mut rng);
            check(n, &challenge);
        }
    }
}

/// Without entanglement or cross communication beyond the strategy's own
/// broadcast, single-round success stays at the discrimination bound.
#[test]
fn no_signaling_sanity_bound() {
    let cos2 = 0.5 + 0.5 * FRAC_1_SQRT_2;
    let config = ScenarioConfig::new(ProtocolKind::P1)
        .with_attack(AttackKind::P1Intercept)
        .with_seed(402);
    let trials = 100_000;
    let est = monte_carlo(&config, trials, 402).unwrap();
    let sigma = (cos2 * (1.0 - cos2) / trials as f64).sqrt();
    assert!(
        est.p_hat <= cos2 + 4.0 * sigma,
        "p_hat {} above bound {}",
        est.p_hat,
        cos2
    );
}

/// Hybrid attack success is monotone nondecreasing in the bank size, and
/// pairs consumed never exceed the bank.
#[test]
fn hybrid_success_monotone_and_bank_bounded() {
    let n = 3usize;
    let mut last = 0.0f64;
    for m in 0..=8u64 {
        let config = ScenarioConfig::new(ProtocolKind::P1Oracle)
            .with_n(n)
            .with_attack(AttackKind::P1OracleHybrid { m })
            .with_seed(403);
        let exact = exact_success(&config).unwrap();
        assert!(
            exact.probability >= last - 1e-12,
            "m={m}: {} < {}",
            exact.probability,
            last
        );
        last = exact.probability;

        let mut rng = RngStream::from_seed(403 + m);
        let out = run_round(&config, &mut rng, None).unwrap();
        assert!(u64::from(out.transcript.telemetry.pairs_consumed) <= m);
    }
}

/// The single-pair strategy against the product-basis protocol cannot win
/// every round, and the full-bank strategies consume what they claim.
#[test]
fn one_pair_heuristic_strictly_below_two_pair() {
    let one = exact_success(
        &ScenarioConfig::new(ProtocolKind::P1Mod)
            .with_attack(AttackKind::P1Mod1Epr)
            .with_seed(404),
    )
    .unwrap();
    let two = exact_success(
        &ScenarioConfig::new(ProtocolKind::P1Mod)
            .with_attack(AttackKind::P1Mod2Epr)
            .with_seed(404),
    )
    .unwrap();
    assert!(one.probability < two.probability - 1e-6);
}

/// Repeating the one-qubit protocol k times drives intercept success to
/// cos^(2k)(π/8): all k independent rounds must be accepted.
#[test]
fn intercept_success_decays_exponentially_over_rounds() {
    let cos2 = 0.5 + 0.5 * FRAC_1_SQRT_2;
    let config = ScenarioConfig::new(ProtocolKind::P1)
        .with_attack(AttackKind::P1Intercept)
        .with_seed(405);
    for k in 1..=5usize {
        let result = enumerate(|source| {
            let mut all = true;
            for _ in 0..k {
                let out = run_round(&config, source, None).map_err(|e| {
                    qpv_core::analysis::AnalysisError::Round(e.to_string())
                })?;
                all &= out.verdict.accept;
            }
            Ok(Leaf {
                accept: all,
                ..Leaf::default()
            })
        })
        .unwrap();
        let expected = cos2.powi(k as i32);
        assert!(
            (result.probability - expected).abs() < 1e-9,
            "k={k}: {} vs {expected}",
            result.probability
        );
    }
}

/// The entanglement-swap identity behind the single-pair strategy, by
/// brute-force contraction: projecting (V0, E0) onto Bell state a and
/// (V1, E1) onto Bell state b, with (E0, E1) sharing an EPR pair, acts on
/// the verifiers' joint state as the Bell projector indexed a XOR b (with
/// amplitude weight 1/2).
#[test]
fn double_bell_measurement_projects_on_xor_bell_state() {
    use num_complex::Complex64;
    use qpv_core::qstate::bell_vectors;

    let mut rng = RngStream::from_seed(410);
    let bells = bell_vectors();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let epr = [
        Complex64::new(h, 0.0),
        Complex64::ZERO,
        Complex64::ZERO,
        Complex64::new(h, 0.0),
    ];
    for _ in 0..10 {
        // Random verifier pair state chi over (V0, V1).
        let chi = common::kron(
            &common::random_qubit(&mut rng),
            &common::random_qubit(&mut rng),
        );
        // Full state over (V0, E0, V1, E1) = chi ⊗ EPR, reordered.
        let mut state = vec![Complex64::ZERO; 16];
        for v0 in 0..2 {
            for e0 in 0..2 {
                for v1 in 0..2 {
                    for e1 in 0..2 {
                        state[(v0 << 3) | (e0 << 2) | (v1 << 1) | e1] =
                            chi[(v0 << 1) | v1] * epr[(e0 << 1) | e1];
                    }
                }
            }
        }
        for (ai, ba) in bells.iter().enumerate() {
            for (bi, bb) in bells.iter().enumerate() {
                let mut amp = Complex64::ZERO;
                for v0 in 0..2usize {
                    for e0 in 0..2usize {
                        for v1 in 0..2usize {
                            for e1 in 0..2usize {
                                amp += ba[(v0 << 1) | e0].conj()
                                    * bb[(v1 << 1) | e1].conj()
                                    * state[(v0 << 3) | (e0 << 2) | (v1 << 1) | e1];
                            }
                        }
                    }
                }
                // XOR of the (k0, k1) encodings = XOR of basis indices here.
                let expected = common::dot(&bells[ai ^ bi], &chi);
                assert!(
                    (amp.norm() - expected.norm() / 2.0).abs() < 1e-12,
                    "a={ai} b={bi}: |amp| {} vs {}",
                    amp.norm(),
                    expected.norm() / 2.0
                );
            }
        }
    }
}

/// Per-label sweep of the full-bank oracle attack: success stays 1 for
/// every oracle width.
#[test]
fn oracle_attack_sweep_over_n_is_flat_at_one() {
    use qpv_core::analysis::{sweep, SweepParam};
    use qpv_core::scenario::Mode;
    let mut template = ScenarioConfig::new(ProtocolKind::P1Oracle)
        .with_attack(AttackKind::P1Oracle2n)
        .with_seed(411);
    template.mode = Mode::Exact;
    let rows = sweep(&template, SweepParam::N, &[1, 2, 3]).unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let exact = row.exact.unwrap();
        assert!(
            (exact.probability - 1.0).abs() <= 1e-12,
            "n={}: {}",
            row.value,
            exact.probability
        );
    }
}

/// The exact enumerator and the Monte Carlo sampler describe the same
/// distribution: over repeated seeds, the 95% Wilson interval covers the
/// exact value in at least 90% of runs (deterministic seed set).
#[test]
fn sampler_agrees_with_enumerator() {
    let scenarios = [
        ScenarioConfig::new(ProtocolKind::P1)
            .with_attack(AttackKind::P1Intercept),
        ScenarioConfig::new(ProtocolKind::P2Mod)
            .with_attack(AttackKind::P2Mod5Epr),
        ScenarioConfig::new(ProtocolKind::P2).with_attack(AttackKind::P2LocalMeasure {
            alpha: [1.0, 0.0],
            beta: [0.0, 0.0],
        }),
    ];
    for config in scenarios {
        let exact = exact_success(&config).unwrap();
        let mut covered = 0;
        let reps = 20;
        for seed in 0..reps {
            let est = monte_carlo(&config, 2_000, 500 + seed).unwrap();
            if est.ci_lo <= exact.probability && exact.probability <= est.ci_hi {
                covered += 1;
            }
        }
        assert!(
            covered * 10 >= reps * 9,
            "{:?}: only {covered}/{reps} intervals covered {}",
            config.attack,
            exact.probability
        );
    }
}

/// Branch-tree conservation: enumerated leaf probabilities sum to 1 for
/// every attack scenario small enough to enumerate.
#[test]
fn branch_probabilities_sum_to_one() {
    for attack in all_attacks() {
        for protocol in attack.compatible_protocols() {
            let config = ScenarioConfig::new(protocol)
                .with_n(2)
                .with_attack(attack.clone())
                .with_seed(406);
            let exact = exact_success(&config).unwrap();
            assert!(
                (exact.prob_mass - 1.0).abs() < 1e-12,
                "{attack:?} on {protocol:?}: mass {}",
                exact.prob_mass
            );
        }
    }
}

/// Attacks keep working off the midpoints as long as the geometry leaves
/// enough light-cone budget (interception times satisfy the cross
/// constraint). Off-center placement also flips the delivery order of the
/// two interceptions, exercising teleport-before-swap composition.
#[test]
fn attacks_survive_asymmetric_adversary_positions() {
    // E1 closer to V1 than the midpoint: she intercepts first.
    let mut config = ScenarioConfig::new(ProtocolKind::P2Mod)
        .with_attack(AttackKind::P2Mod5Epr)
        .with_seed(420);
    config.e0_pos = 0.5;
    config.e1_pos = 1.6;
    let asym = exact_success(&config).unwrap();
    config.e0_pos = 0.5;
    config.e1_pos = 1.5;
    let sym = exact_success(&config).unwrap();
    assert!((asym.rate("cond") - 0.0625).abs() < 1e-12);
    assert!(
        (asym.probability - sym.probability).abs() < 1e-12,
        "{} vs {}",
        asym.probability,
        sym.probability
    );

    // Teleport attacks answer both verifiers at exactly t + 2d from any
    // interception points.
    let mut config = ScenarioConfig::new(ProtocolKind::P1)
        .with_attack(AttackKind::P1Teleport1Epr)
        .with_seed(421);
    config.e0_pos = 0.3;
    config.e1_pos = 1.8;
    let exact = exact_success(&config).unwrap();
    assert!((exact.probability - 1.0).abs() < 1e-12);
}

/// The waiting baseline is rejected as late on every protocol: the near
/// verifier is answered on time and correctly, the far one after the
/// deadline.
#[test]
fn naive_wait_is_late_on_every_protocol() {
    use qpv_core::simnet::Reason;
    for protocol in ProtocolKind::ALL {
        let config = ScenarioConfig::new(protocol)
            .with_n(2)
            .with_attack(AttackKind::NaiveWait)
            .with_seed(422);
        for i in 0..20u64 {
            let mut rng = RngStream::for_trial(422, i);
            let out = run_round(&config, &mut rng, None).unwrap();
            assert!(!out.verdict.accept, "{protocol:?}");
            assert_eq!(out.verdict.per_verifier[1], Reason::Late, "{protocol:?}");
            assert_eq!(out.verdict.per_verifier[0], Reason::Ok, "{protocol:?}");
        }
    }
}

/// The local-measurement strategy's possibility-semantics acceptance for
/// the computational basis: frozen from first principles. With θ uniform,
/// failures occur only at θ=1 when the coin calls z=1 on disagreeing
/// outcomes while the bits were equal: 1 - 1/16 = 15/16.
#[test]
fn local_measure_possibility_acceptance_value() {
    let config = ScenarioConfig::new(ProtocolKind::P2)
        .with_attack(AttackKind::P2LocalMeasure {
            alpha: [1.0, 0.0],
            beta: [0.0, 0.0],
        })
        .with_seed(407);
    let exact = exact_success(&config).unwrap();
    assert!(
        (exact.probability - 15.0 / 16.0).abs() < 1e-12,
        "p = {}",
        exact.probability
    );
}

/// The five-pair attack's unconditional acceptance sits strictly between
/// the success-branch rate and certainty.
#[test]
fn five_epr_unconditional_acceptance_bounds() {
    let config = ScenarioConfig::new(ProtocolKind::P2Mod)
        .with_attack(AttackKind::P2Mod5Epr)
        .with_seed(408);
    let exact = exact_success(&config).unwrap();
    assert!(
        exact.probability > 1.0 / 16.0 + 1e-6 && exact.probability < 1.0 - 1e-6,
        "p = {}",
        exact.probability
    );
}
