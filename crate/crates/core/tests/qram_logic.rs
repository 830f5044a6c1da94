mod common;

use std::collections::BTreeMap;

use common::{expected_output, max_deviation, random_address, random_data};

use num_complex::Complex64;
use phonon_qram::qram::{
    check_trace_against_schedule, AddressState, Config, DataMode, DataRegister, Gate, Level, Qram,
    QramConfig, Rails, SparseState,
};
use phonon_qram::scheduler::build_schedule;
use phonon_qram::{Encoding, Error};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn qram(n: u32, enc: Encoding, mode: DataMode) -> Qram {
    Qram::new(QramConfig::new(n, enc), mode).unwrap()
}

fn cfg(pairs: &[(u16, Level)]) -> Config {
    Config::from_pairs(pairs.iter().copied())
}

#[test]
fn set_address_swaps_ancilla_into_control() {
    let q = qram(2, Encoding::SingleRail, DataMode::Classical);
    let anc = q.layout.ancilla[1][1][0];
    let ctl = q.layout.control[1][1][0];
    let out = q.set_address(&SparseState::basis(cfg(&[(anc, Level::E)])), 1).unwrap();
    assert_eq!(out.amplitude(&cfg(&[(ctl, Level::E)])), c(1.0, 0.0));

    let other = q.layout.ancilla[1][0][0];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let s: SparseState = [(cfg(&[(anc, Level::E)]), c(h, 0.0)), (cfg(&[(other, Level::E)]), c(0.0, h))].into_iter().collect();
    let out = q.set_address(&s, 1).unwrap();
    assert_eq!(out.amplitude(&cfg(&[(ctl, Level::E)])), c(h, 0.0));
    assert_eq!(out.amplitude(&cfg(&[(q.layout.control[1][0][0], Level::E)])), c(0.0, h));
}

#[test]
fn route_follows_control() {
    let q = qram(2, Encoding::SingleRail, DataMode::Classical);
    let l = &q.layout;
    let payload = l.ancilla[0][0][0];
    let out = q.route_address(&SparseState::basis(cfg(&[(payload, Level::E)])), 0).unwrap();
    assert_eq!(out.amplitude(&cfg(&[(l.ancilla[1][0][0], Level::E)])), c(1.0, 0.0));

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let ctl = l.control[0][0][0];
    let s: SparseState = [
        (cfg(&[(payload, Level::E)]), c(h, 0.0)),
        (cfg(&[(payload, Level::E), (ctl, Level::E)]), c(h, 0.0)),
    ]
    .into_iter()
    .collect();
    let out = q.route_address(&s, 0).unwrap();
    assert_eq!(out.amplitude(&cfg(&[(l.ancilla[1][0][0], Level::E)])), c(h, 0.0));
    assert_eq!(out.amplitude(&cfg(&[(l.ancilla[1][1][0], Level::E), (ctl, Level::E)])), c(h, 0.0));

    assert!(matches!(q.route_address(&s, 2), Err(Error::ProtocolOrder(_))));
}

#[test]
fn route_chain_reaches_addressed_leaf() {
    let n = 3;
    let q = qram(n, Encoding::SingleRail, DataMode::Classical);
    let l = &q.layout;
    for address in 0..8usize {
        // Brute-force path: set the control on each node along the path.
        let mut node = 0;
        let mut conf = cfg(&[(l.ancilla[0][0][0], Level::E)]);
        for level in 0..n as usize {
            let bit = (address >> (n as usize - 1 - level)) & 1;
            if bit == 1 {
                conf.set(l.control[level][node][0], Level::E);
            }
            node = 2 * node + bit;
        }
        let mut s = SparseState::basis(conf);
        for level in 0..n as usize {
            s = q.route_address(&s, level).unwrap();
        }
        let (conf, _) = s.iter().next().unwrap();
        assert_eq!(conf.get(l.ancilla[n as usize][address][0]), Level::E, "address {address}");
        assert_eq!(node, address);
    }
}

#[test]
fn classical_read_phases() {
    let q = qram(1, Encoding::SingleRail, DataMode::Classical);
    let leaf = q.layout.ancilla[1][1][0];
    let s = SparseState::basis(cfg(&[(leaf, Level::E)]));
    let zero = q.read_classical(&s, &DataRegister::Classical(vec![true, false])).unwrap();
    assert_eq!(zero.amplitude(&cfg(&[(leaf, Level::E)])), c(1.0, 0.0));
    let one = q.read_classical(&s, &DataRegister::Classical(vec![false, true])).unwrap();
    assert_eq!(one.amplitude(&cfg(&[(leaf, Level::E)])), c(-1.0, 0.0));
    let quantum = DataRegister::Quantum(vec![[c(1.0, 0.0), c(0.0, 0.0)]; 2]);
    assert!(matches!(q.read_classical(&s, &quantum), Err(Error::ModeMismatch { .. })));
    assert!(matches!(q.read_quantum(&s, &DataRegister::Classical(vec![false; 2])), Err(Error::ModeMismatch { .. })));
}

#[test]
fn hybrid_release_examples() {
    let q = qram(2, Encoding::HybridDualRail, DataMode::Classical);
    let reg = q.layout.register[1][0];
    let root = q.layout.ancilla[0][0][0];
    let zero = q.hybrid_release(&SparseState::basis(Config::ground()), 1).unwrap();
    assert_eq!(zero.amplitude(&cfg(&[(root, Level::E)])), c(1.0, 0.0));
    let one = q.hybrid_release(&SparseState::basis(cfg(&[(reg, Level::E)])), 1).unwrap();
    assert_eq!(one.amplitude(&cfg(&[(reg, Level::E)])), c(1.0, 0.0));

    let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
    let s: SparseState = [(Config::ground(), a), (cfg(&[(reg, Level::E)]), b)].into_iter().collect();
    let released = q.hybrid_release(&s, 1).unwrap();
    assert_eq!(released.amplitude(&cfg(&[(root, Level::E)])), a);
    let back = q.hybrid_unrelease(&released, 1).unwrap();
    assert!((back.inner(&s).norm() - 1.0).abs() < 1e-10);

    assert!(matches!(q.hybrid_release(&released, 2), Err(Error::ProtocolOrder(_))));
    let plain = qram(2, Encoding::SingleRail, DataMode::Classical);
    assert!(matches!(plain.hybrid_release(&s, 1), Err(Error::ModeMismatch { .. })));
}

#[test]
fn lost_tree_excitation_leaves_f() {
    let q = qram(2, Encoding::HybridDualRail, DataMode::Classical);
    let reg = q.layout.register[1][0];
    let released = q.hybrid_release(&SparseState::basis(Config::ground()), 1).unwrap();
    let lost: SparseState = released.iter().map(|(_, a)| (Config::ground(), *a)).collect();
    let back = q.hybrid_unrelease(&lost, 1).unwrap();
    assert_eq!(back.amplitude(&cfg(&[(reg, Level::F)])).norm(), 1.0);
}

#[test]
fn table_lookup_examples() {
    let q = qram(2, Encoding::SingleRail, DataMode::Classical);
    let data = DataRegister::Classical(vec![false, true, true, false]);
    let out = q.query(&AddressState::from_bits("10").unwrap(), &data).unwrap();
    let amps = out.register_amplitudes();
    assert!((amps[&(2, 1)] - c(1.0, 0.0)).norm() < 1e-12);

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let addr = AddressState(vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);
    let data = DataRegister::Classical(vec![true, false, false, true]);
    for enc in Encoding::ALL {
        let out = qram(2, enc, DataMode::Classical).query(&addr, &data).unwrap();
        let amps = out.register_amplitudes();
        assert!((amps[&(0, 1)] - c(h, 0.0)).norm() < 1e-12, "{enc}");
        assert!((amps[&(3, 1)] - c(h, 0.0)).norm() < 1e-12, "{enc}");
        assert!((out.register_purity() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn encodings_agree_at_depth_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for mode in [DataMode::Classical, DataMode::Quantum] {
        for _ in 0..10 {
            let addr = random_address(&mut rng, 2);
            let data = random_data(&mut rng, mode, 2);
            let maps: Vec<BTreeMap<_, _>> = Encoding::ALL
                .iter()
                .map(|&e| {
                    let out = qram(1, e, mode).query(&addr, &data).unwrap();
                    out.terms().into_iter().map(|t| ((t.address, t.bus), t.amplitude)).fold(BTreeMap::new(), |mut m, (k, a)| {
                        *m.entry(k).or_insert(c(0.0, 0.0)) += a * a.conj();
                        m
                    })
                })
                .collect();
            for m in &maps[1..] {
                for (k, v) in m {
                    assert!((maps[0][k] - v).norm() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn quantum_read_depth_one() {
    let psi0 = [c(0.6, 0.0), c(0.8, 0.0)];
    let psi1 = [c(0.0, 0.6), c(0.8, 0.0)];
    for enc in Encoding::ALL {
        let q = qram(1, enc, DataMode::Quantum);
        let data = DataRegister::Quantum(vec![psi0, psi1]);
        let addr = AddressState::from_bits("1").unwrap();
        let out = q.query(&addr, &data).unwrap();
        let want = expected_output(&q.layout, &addr, &data);
        assert!(max_deviation(&out.final_state, &want) < 1e-10, "{enc}");
        let zero = DataRegister::Quantum(vec![[c(1.0, 0.0), c(0.0, 0.0)]; 2]);
        for j in 0..2 {
            let out = q.query(&AddressState::basis(2, j).unwrap(), &zero).unwrap();
            assert!(out.terms().iter().all(|t| t.bus == Some(0)));
        }
    }
}

#[test]
fn query_matches_ideal_output() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in 1..=3u32 {
        let size = 1usize << n;
        for enc in Encoding::ALL {
            for mode in [DataMode::Classical, DataMode::Quantum] {
                let q = qram(n, enc, mode);
                for _ in 0..20 {
                    let data = random_data(&mut rng, mode, size);
                    for j in 0..size {
                        let addr = AddressState::basis(size, j).unwrap();
                        let out = q.query(&addr, &data).unwrap();
                        let dev = max_deviation(&out.final_state, &expected_output(&q.layout, &addr, &data));
                        assert!(dev < 1e-10, "n={n} {enc} {mode:?} j={j}: {dev}");
                        assert!(out.tree_residual() < 1e-12);
                        assert!((out.register_purity() - 1.0).abs() < 1e-10);
                    }
                }
                for _ in 0..10 {
                    let data = random_data(&mut rng, mode, size);
                    let addr = random_address(&mut rng, size);
                    let out = q.query(&addr, &data).unwrap();
                    let dev = max_deviation(&out.final_state, &expected_output(&q.layout, &addr, &data));
                    assert!(dev < 1e-10, "n={n} {enc} {mode:?}: {dev}");
                    assert!(out.tree_residual() < 1e-12);
                    if mode == DataMode::Classical {
                        assert!((out.register_purity() - 1.0).abs() < 1e-10);
                    }
                }
            }
        }
    }
}

#[test]
fn zero_data_is_identity_on_address() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for enc in Encoding::ALL {
        let q = qram(3, enc, DataMode::Classical);
        let addr = random_address(&mut rng, 8);
        let out = q.query(&addr, &DataRegister::Classical(vec![false; 8])).unwrap();
        let amps = out.register_amplitudes();
        for (j, a) in addr.0.iter().enumerate() {
            assert!((amps.get(&(j, 0)).copied().unwrap_or_default() - a).norm() < 1e-12);
        }
    }
}

#[test]
fn support_stays_within_memory_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for enc in [Encoding::SingleRail, Encoding::HybridDualRail] {
        let q = qram(4, enc, DataMode::Classical);
        let data = random_data(&mut rng, DataMode::Classical, 16);
        let program = q.compile(&data).unwrap();
        let mut state = q.initial_state(&random_address(&mut rng, 16), &data).unwrap();
        for op in &program.ops {
            for g in &op.gates {
                state = g.apply(&state);
            }
            // The bus |+⟩ doubles the address branches.
            assert!(state.len() <= 2 * 16, "{enc}: {} branches", state.len());
            assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn traces_replay_on_schedule() {
    for n in 1..=5u32 {
        for enc in Encoding::ALL {
            let q = qram(n, enc, DataMode::Classical);
            let program = q.compile(&DataRegister::Classical(vec![false; 1 << n])).unwrap();
            let problems = check_trace_against_schedule(&program, &build_schedule(n, enc).unwrap());
            assert!(problems.is_empty(), "n={n} {enc}: {problems:?}");
            let json = program.trace_json();
            assert!(json["ops"].as_array().unwrap().len() == program.ops.len());
        }
    }
}

#[test]
fn malformed_configuration_strings() {
    let q = qram(1, Encoding::SingleRail, DataMode::Classical);
    let codec = q.layout.codec();
    assert!(matches!(codec.parse("gg"), Err(Error::InvariantViolation(_))));
    assert!(AddressState::from_bits("10x").is_err());
    assert!(AddressState::from_bits("").is_err());
}

// Dense oracle: the same gate list on a full d^S state vector.

struct Dense {
    d: usize,
    slots: usize,
    v: Vec<Complex64>,
}

impl Dense {
    fn digit(&self, idx: usize, s: u16) -> usize {
        (idx / self.d.pow(s as u32)) % self.d
    }

    fn with_digit(&self, idx: usize, s: u16, val: usize) -> usize {
        let p = self.d.pow(s as u32);
        idx - self.digit(idx, s) * p + val * p
    }

    fn from_sparse(state: &SparseState, d: usize, slots: usize) -> Dense {
        let mut v = vec![c(0.0, 0.0); d.pow(slots as u32)];
        for (conf, a) in state.iter() {
            let idx: usize = conf.excited().iter().map(|&(s, l)| l as usize * d.pow(s as u32)).sum();
            v[idx] += a;
        }
        Dense { d, slots, v }
    }

    fn apply(&mut self, gate: &Gate) {
        let mut out = vec![c(0.0, 0.0); self.v.len()];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for idx in 0..self.v.len() {
            let a = self.v[idx];
            if a == c(0.0, 0.0) {
                continue;
            }
            let dg = |s| self.digit(idx, s);
            let swap = |i: usize, x: u16, y: u16| {
                let (dx, dy) = (self.digit(i, x), self.digit(i, y));
                self.with_digit(self.with_digit(i, x, dy), y, dx)
            };
            match *gate {
                Gate::Swap(x, y) => out[swap(idx, x, y)] += a,
                Gate::GeExchange(x, y) => {
                    let t = if dg(x) + dg(y) == 1 { swap(idx, x, y) } else { idx };
                    out[t] += a;
                }
                Gate::LevelFlip { slot, lo, hi } => {
                    let v = dg(slot);
                    let t = if v == lo as usize {
                        self.with_digit(idx, slot, hi as usize)
                    } else if v == hi as usize {
                        self.with_digit(idx, slot, lo as usize)
                    } else {
                        idx
                    };
                    out[t] += a;
                }
                Gate::Route { control, source, left, right } => {
                    let dest = if dg(control) == 0 { left } else { right };
                    out[swap(idx, source, dest)] += a;
                }
                Gate::CSwap { control, a: x, b: y } => {
                    out[if dg(control) != 0 { swap(idx, x, y) } else { idx }] += a;
                }
                Gate::PhaseIfExcited(s) | Gate::PauliZ(Rails::Single(s)) => {
                    out[idx] += if dg(s) == 1 { -a } else { a };
                }
                Gate::PauliZ(Rails::Dual(x, y)) => {
                    out[idx] += if dg(x) == 0 && dg(y) == 1 { -a } else { a };
                }
                Gate::Hadamard(Rails::Single(s)) => match dg(s) {
                    0 => {
                        out[idx] += a * h;
                        out[self.with_digit(idx, s, 1)] += a * h;
                    }
                    1 => {
                        out[self.with_digit(idx, s, 0)] += a * h;
                        out[idx] -= a * h;
                    }
                    _ => out[idx] += a,
                },
                Gate::Hadamard(Rails::Dual(x, y)) => match (dg(x), dg(y)) {
                    (1, 0) => {
                        out[idx] += a * h;
                        out[swap(idx, x, y)] += a * h;
                    }
                    (0, 1) => {
                        out[swap(idx, x, y)] += a * h;
                        out[idx] -= a * h;
                    }
                    _ => out[idx] += a,
                },
            }
        }
        self.v = out;
    }

    fn deviation(&self, state: &SparseState) -> f64 {
        let other = Dense::from_sparse(state, self.d, self.slots);
        self.v.iter().zip(&other.v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

#[test]
fn sparse_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let cases = [
        (1, Encoding::SingleRail, DataMode::Classical),
        (2, Encoding::SingleRail, DataMode::Classical),
        (1, Encoding::HybridDualRail, DataMode::Classical),
        (2, Encoding::HybridDualRail, DataMode::Classical),
        (1, Encoding::StandardDualRailVacuum, DataMode::Classical),
        (1, Encoding::SingleRail, DataMode::Quantum),
        (1, Encoding::HybridDualRail, DataMode::Quantum),
    ];
    for (n, enc, mode) in cases {
        let q = qram(n, enc, mode);
        let size = 1 << n;
        let data = random_data(&mut rng, mode, size);
        let addr = random_address(&mut rng, size);
        let program = q.compile(&data).unwrap();
        let initial = q.initial_state(&addr, &data).unwrap();
        let d = if enc == Encoding::HybridDualRail { 3 } else { 2 };
        let mut dense = Dense::from_sparse(&initial, d, q.layout.slots());
        for g in program.gates() {
            dense.apply(g);
        }
        let sparse = program.run(&initial).unwrap();
        let dev = dense.deviation(&sparse);
        assert!(dev < 1e-12, "n={n} {enc} {mode:?}: {dev}");
    }
}

proptest! {
    #[test]
    fn permutation_gates_conserve_quanta(
        levels in proptest::collection::vec(0u8..3, 6),
        a in 0u16..6, b in 0u16..6, ctl in 0u16..6,
    ) {
        let conf = Config::from_pairs(levels.iter().enumerate().map(|(i, &l)| {
            (i as u16, [Level::G, Level::E, Level::F][l as usize])
        }));
        let others: Vec<u16> = (0..6).filter(|&s| s != ctl && s != a).collect();
        let gates = [
            Gate::Swap(a, b),
            Gate::GeExchange(a, b),
            Gate::CSwap { control: ctl, a, b },
            Gate::Route { control: ctl, source: a, left: others[0], right: others[1] },
        ];
        for g in gates {
            if g.conserves_quanta() {
                let (out, _) = g.permute(&conf).unwrap();
                prop_assert_eq!(out.quanta(), conf.quanta());
            }
        }
    }
}
