use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use super::*;
use crate::linalg::{haar_random_unitary, inversion_count, I, ZERO};

fn haar(k: usize, seed: u64) -> UnitaryMatrix {
    haar_random_unitary(k, seed).unwrap()
}

fn perm_unitary(image: &[usize]) -> UnitaryMatrix {
    UnitaryMatrix::new(PermutationMatrix::new(image.to_vec()).unwrap().to_matrix()).unwrap()
}

#[test]
fn sequences() {
    assert_eq!(beam_splitter_sequence(6, 1), vec![-1, 1, 3, 5]);
    assert_eq!(beam_splitter_sequence(6, 2), vec![0, 2, 4, 6]);
    let interior: Vec<i64> = beam_splitter_sequence(6, 2)
        .into_iter()
        .filter(|&m| !is_boundary(6, m))
        .collect();
    assert_eq!(interior, vec![0, 2, 4]);
    assert_eq!(beam_splitter_sequence(2, 1), vec![-1, 1]);
    for k in 1..=13 {
        for n in 1..=4 {
            assert_eq!(beam_splitter_sequence(k, n).len(), k / 2 + 1);
        }
    }
}

#[test]
fn coin_params_examples() {
    let (a, p) = solve_coin_params(ONE).unwrap();
    assert!((a - FRAC_PI_4).abs() < 1e-15 && p.abs() < 1e-15);
    assert_eq!(solve_coin_params(ZERO).unwrap(), (FRAC_PI_2, 0.0));
    let (a, p) = solve_coin_params(I).unwrap();
    assert!((a - FRAC_PI_4).abs() < 1e-15 && (p - FRAC_PI_4).abs() < 1e-15);
    assert!(solve_coin_params(C64::new(f64::NAN, 0.0)).is_err());
    assert!(solve_coin_params(C64::new(0.0, f64::INFINITY)).is_err());
    let (a, _) = solve_coin_params(C64::new(-1e20, 0.0)).unwrap();
    assert!(a > 0.0 && a <= 1.0 / RATIO_CLAMP * 1.0000001);
}

proptest::proptest! {
    #[test]
    fn coin_params_satisfy_ratio(re in -50.0f64..50.0, im in -50.0f64..50.0) {
        let r = C64::new(re, im);
        let (a, p) = solve_coin_params(r).unwrap();
        proptest::prop_assert!(a > 0.0 && a <= FRAC_PI_2);
        proptest::prop_assert!(p > -FRAC_PI_2 && p <= FRAC_PI_2);
        let back = C64::from_polar(1.0 / a.tan(), 2.0 * p);
        proptest::prop_assert!((back - r).norm() <= 1e-12 * (1.0 + r.norm()));
    }

    #[test]
    fn compile_round_trip_small(k in 1usize..7, seed in 0u64..10_000) {
        let u = haar(k, seed);
        let res = compile(&u, DEFAULT_TOLERANCE).unwrap();
        proptest::prop_assert!(verify(&res, &u).unwrap() <= 1e-9);
        proptest::prop_assert!(res.steps_used <= k);
    }
}

#[test]
fn one_mode_is_a_phase() {
    let theta = 0.7;
    let u =
        UnitaryMatrix::new(ComplexMatrix::from_diagonal(&[C64::from_polar(1.0, theta)])).unwrap();
    let res = compile(&u, DEFAULT_TOLERANCE).unwrap();
    assert_eq!(res.steps_used, 0);
    assert!((res.diag[0] - C64::from_polar(1.0, -theta)).norm() < 1e-15);
    assert!(verify(&res, &u).unwrap() < 1e-15);
}

#[test]
fn six_mode_structure() {
    let u = haar(6, 7);
    let res = compile(&u, DEFAULT_TOLERANCE).unwrap();
    assert!(res.steps_used <= 6);
    assert_eq!(res.schedule.programmed_count(), 15);
    assert!(verify(&res, &u).unwrap() <= 1e-9);
    let first = &res.schedule.steps()[0];
    let kinds: Vec<(i64, bool)> = first
        .slots
        .iter()
        .map(|s| (s.m, s.kind == SlotKind::BoundaryX))
        .collect();
    assert_eq!(kinds, vec![(-1, true), (1, false), (3, false), (5, true)]);
    assert!(first.slots[1].is_programmed() && first.slots[2].is_programmed());
    let second = &res.schedule.steps()[1];
    assert!(second.slots[..3]
        .iter()
        .all(BeamSplitterSlot::is_programmed));
    assert_eq!(second.slots[3].kind, SlotKind::BoundaryX);
    for d in &res.diag {
        assert!((d.norm() - 1.0).abs() <= 1e-10);
    }
    // the walk block itself is unitary
    let w = walk_block(&res.schedule).unwrap();
    for j in 0..6 {
        let norm: f64 = (0..6).map(|i| w[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() <= 1e-10);
    }
    assert_eq!(res.mode_set, (-2..=7).collect::<Vec<_>>());
    assert_eq!(res.interior_modes(), (0..6).collect::<Vec<_>>());
}

#[test]
fn reversal_uses_only_swaps() {
    let u = perm_unitary(&[3, 2, 1, 0]);
    let res = compile(&u, DEFAULT_TOLERANCE).unwrap();
    assert!(verify(&res, &u).unwrap() <= 1e-9);
    for s in res.schedule.slots() {
        if let SlotKind::Programmed { alpha, .. } = s.kind {
            assert!((alpha - FRAC_PI_2).abs() < 1e-12);
        }
    }
}

#[test]
fn pauli_x_two_modes() {
    let u = perm_unitary(&[1, 0]);
    let res = compile(&u, DEFAULT_TOLERANCE).unwrap();
    assert!(res.steps_used <= 2);
    assert!(verify(&res, &u).unwrap() <= 1e-9);
}

#[test]
fn tampering_is_detected() {
    let u = haar(5, 11);
    let mut res = compile(&u, DEFAULT_TOLERANCE).unwrap();
    let slot = res
        .schedule
        .slots()
        .find(|s| s.is_programmed())
        .copied()
        .unwrap();
    let s = res.schedule.slot_mut(slot.step, slot.m).unwrap();
    if let SlotKind::Programmed { alpha, phi } = s.kind {
        s.kind = SlotKind::Programmed {
            alpha,
            phi: phi + 0.1,
        };
    }
    assert!(verify(&res, &u).unwrap() > 1e-3);
}

#[test]
fn round_trip_many() {
    let mut count = 0;
    for k in 2..=12 {
        for seed in 0..20 {
            let u = haar(k, 1000 * k as u64 + seed);
            let res = compile(&u, DEFAULT_TOLERANCE).unwrap();
            let r = verify(&res, &u).unwrap();
            assert!(r <= 1e-9, "K={k} seed={seed} residual {r:e}");
            assert!(res.steps_used <= k);
            assert!(res.schedule.programmed_count() <= k * (k - 1) / 2);
            for s in res.schedule.slots() {
                assert!(s.coin().unitarity_defect() <= 1e-10);
                if let SlotKind::Programmed { alpha, phi } = s.kind {
                    assert!((0.0..=FRAC_PI_2).contains(&alpha));
                    assert!(phi > -FRAC_PI_2 && phi <= FRAC_PI_2);
                }
            }
            count += 1;
        }
    }
    assert!(count >= 200);
}

#[test]
fn deterministic() {
    let u = haar(8, 3);
    assert_eq!(
        compile(&u, DEFAULT_TOLERANCE).unwrap(),
        compile(&u, DEFAULT_TOLERANCE).unwrap()
    );
}

#[test]
fn initial_list_fully_inverted_and_sort_sound() {
    for k in 1..=12 {
        let d = pafa_decompose(&haar(k, 5)).unwrap();
        let mut f = d.f.image().to_vec();
        assert_eq!(inversion_count(&f), k * (k - 1) / 2);
        let mut n = 0;
        let mut swaps = 0;
        while !is_sorted(&f) {
            n += 1;
            for (m, swapped) in sort_round(&mut f.clone(), n) {
                if swapped {
                    let before = inversion_count(&f);
                    f.swap(m as usize, m as usize + 1);
                    assert_eq!(inversion_count(&f), before - 1);
                    swaps += 1;
                }
            }
        }
        assert!(n as usize <= k);
        assert_eq!(swaps, k * (k - 1) / 2);
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn odd_even_sort_bound_exhaustive() {
    for k in 1..=7 {
        for p in permutations(k) {
            let mut f = p.clone();
            let mut n = 0;
            while !is_sorted(&f) {
                n += 1;
                sort_round(&mut f, n);
            }
            assert!(n as usize <= k, "{p:?} needed {n} rounds");
        }
    }
}

#[test]
fn permutation_targets_compile() {
    for p in permutations(4) {
        let u = perm_unitary(&p);
        let res = compile(&u, DEFAULT_TOLERANCE).unwrap();
        assert!(verify(&res, &u).unwrap() <= 1e-9, "{p:?}");
    }
}

#[test]
fn odd_dimensions_leave_spare_mode_untouched() {
    let u = haar(5, 2);
    let res = compile(&u, DEFAULT_TOLERANCE).unwrap();
    for s in res.schedule.slots() {
        if s.m == 4 {
            assert_eq!(s.kind, SlotKind::BoundaryX);
        }
    }
    assert!(verify(&res, &u).unwrap() <= 1e-9);
}

#[test]
fn shift_compensation_coins() {
    let id = BeamSplitterSlot {
        step: 1,
        m: 0,
        kind: SlotKind::Identity,
    };
    assert_eq!(id.coin(), Mat2::PAULI_X);
    let b = BeamSplitterSlot {
        step: 1,
        m: -1,
        kind: SlotKind::BoundaryX,
    };
    assert_eq!(b.coin(), Mat2::PAULI_X);
    let swap = BeamSplitterSlot {
        step: 2,
        m: 0,
        kind: SlotKind::Programmed {
            alpha: FRAC_PI_2,
            phi: 0.0,
        },
    };
    let z = Mat2::diag(ONE, -ONE);
    assert!(swap.coin().max_abs_diff(&z) < 1e-15);

    // two-mode walk: schedule with a single programmed slot realizes T on modes (0, 1)
    let mut sched = CoinSchedule::identity(2, 2).unwrap();
    let t = Mat2::beam_splitter(0.3, -0.4);
    sched.slot_mut(2, 0).unwrap().kind = SlotKind::Programmed {
        alpha: 0.3,
        phi: -0.4,
    };
    let w = walk_block(&sched).unwrap();
    assert!(w.max_abs_diff(&t.to_matrix()) < 1e-15);
    let field = apply_shift_compensation(&sched);
    assert!(field.get(2, 0).max_abs_diff(&t.mul(&Mat2::PAULI_X)) < 1e-15);
    assert_eq!(field.get(1, 1), Mat2::PAULI_X);
}

#[test]
fn footprint_reduction() {
    let idle = CoinSchedule::identity(4, 4).unwrap();
    let reduced = reduce_footprint(&idle);
    assert_eq!(reduced.num_steps(), 0);
    assert!(
        walk_block(&reduced)
            .unwrap()
            .max_abs_diff(&walk_block(&idle).unwrap())
            < 1e-15
    );

    let res = compile_with(
        &haar(4, 1),
        &CompileOptions {
            reduce: false,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(reduce_footprint(&res.schedule), res.schedule);

    // programmed, identity, programmed: the lone idle step stays
    let mut lone = CoinSchedule::identity(4, 3).unwrap();
    lone.slot_mut(1, 1).unwrap().kind = SlotKind::Programmed {
        alpha: 0.4,
        phi: 0.1,
    };
    lone.slot_mut(3, 1).unwrap().kind = SlotKind::Programmed {
        alpha: 0.2,
        phi: -0.3,
    };
    assert_eq!(reduce_footprint(&lone), lone);

    // programmed, identity, identity, programmed: the idle pair goes
    let mut pair = CoinSchedule::identity(4, 4).unwrap();
    pair.slot_mut(1, 1).unwrap().kind = SlotKind::Programmed {
        alpha: 0.4,
        phi: 0.1,
    };
    pair.slot_mut(4, 0).unwrap().kind = SlotKind::Programmed {
        alpha: 0.2,
        phi: -0.3,
    };
    let r = reduce_footprint(&pair);
    assert_eq!(r.num_steps(), 2);
    assert!(
        walk_block(&r)
            .unwrap()
            .max_abs_diff(&walk_block(&pair).unwrap())
            < 1e-14
    );
}

#[test]
fn schedule_validation() {
    let mut bad = CoinSchedule::identity(4, 2).unwrap().steps().to_vec();
    bad[0].slots[0].kind = SlotKind::Identity;
    assert!(CoinSchedule::new(4, bad).is_err());
    let mut bad = CoinSchedule::identity(4, 2).unwrap().steps().to_vec();
    bad.remove(0);
    assert!(CoinSchedule::new(4, bad).is_err());
}

#[test]
fn json_round_trip() {
    let u = haar(7, 4);
    let res = compile(&u, DEFAULT_TOLERANCE).unwrap();
    let text = schedule_to_json(&res);
    assert!(text.contains("\"kind\": \"boundaryX\""));
    let back = schedule_from_json(&text).unwrap();
    assert_eq!(back, res);
    assert!(verify(&back, &u).unwrap() <= 1e-9);
    assert!(schedule_from_json("{\"dim\": 2}").is_err());
    let broken = text.replacen("\"programmed\", \"alpha\"", "\"programmed\", \"beta\"", 1);
    assert!(schedule_from_json(&broken).is_err());
}

#[test]
fn rejected_inputs() {
    let u = haar(3, 1);
    let opts = CompileOptions {
        strategy: Strategy::Bruhat,
        ..Default::default()
    };
    assert!(matches!(
        compile_with(&u, &opts),
        Err(Error::NotSupported(_))
    ));
    let mut m = u.matrix().clone();
    m[(0, 0)] += C64::new(0.1, 0.0);
    assert!(matches!(
        compile_matrix(&m, &CompileOptions::default()),
        Err(Error::InvalidArgument(_))
    ));
    let other = compile(&haar(4, 1), DEFAULT_TOLERANCE).unwrap();
    assert!(matches!(
        verify(&other, &u),
        Err(Error::InvalidDimension(_))
    ));
}
