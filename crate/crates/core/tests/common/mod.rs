#![allow(dead_code)]

use num_complex::Complex64;
use phonon_qram::qram::{AddressState, Config, DataMode, DataRegister, Layout, Level, SparseState};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_qubit(rng: &mut ChaCha8Rng) -> [Complex64; 2] {
    let v = [c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))];
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / norm, v[1] / norm]
}

pub fn random_address(rng: &mut ChaCha8Rng, size: usize) -> AddressState {
    let v: Vec<_> = (0..size).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    AddressState(v.into_iter().map(|a| a / norm).collect())
}

pub fn random_data(rng: &mut ChaCha8Rng, mode: DataMode, size: usize) -> DataRegister {
    match mode {
        DataMode::Classical => DataRegister::Classical((0..size).map(|_| rng.gen_bool(0.5)).collect()),
        DataMode::Quantum => DataRegister::Quantum((0..size).map(|_| random_qubit(rng)).collect()),
    }
}

/// Σ α_j |j⟩|D_j⟩ built directly from the layout, with quantum cells
/// consumed for the queried address and left in place elsewhere.
pub fn expected_output(layout: &Layout, address: &AddressState, data: &DataRegister) -> SparseState {
    let n = layout.n as usize;
    let mut out = SparseState::empty();
    let put = |conf: &mut Config, k: usize, bit: usize, quantum_bus: bool| {
        let reg = &layout.register[k];
        if reg.len() == 2 {
            if quantum_bus {
                if bit == 1 {
                    conf.set(reg[1], Level::E);
                }
            } else {
                conf.set(reg[bit], Level::E);
            }
        } else if bit == 1 {
            conf.set(reg[0], Level::E);
        }
    };
    for (j, &alpha) in address.0.iter().enumerate() {
        if alpha.norm() == 0.0 {
            continue;
        }
        let mut base = Config::ground();
        for k in 0..n {
            put(&mut base, k, (j >> (n - 1 - k)) & 1, false);
        }
        match data {
            DataRegister::Classical(bits) => {
                put(&mut base, n, bits[j] as usize, false);
                out.add(base, alpha);
            }
            DataRegister::Quantum(cells) => {
                base.set(layout.data_control[j], Level::E);
                let mut branch = SparseState::empty();
                for b in 0..2 {
                    let mut conf = base.clone();
                    put(&mut conf, n, b, true);
                    branch.add(conf, alpha * cells[j][b]);
                }
                for (i, cell) in cells.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let slot = layout.data[i];
                    branch = branch.map(|conf, a, emit| {
                        emit(conf.clone(), a * cell[0]);
                        let mut one = conf.clone();
                        one.set(slot, Level::E);
                        emit(one, a * cell[1]);
                    });
                }
                for (conf, a) in branch.iter() {
                    out.add(conf.clone(), *a);
                }
            }
        }
    }
    out
}

pub fn max_deviation(a: &SparseState, b: &SparseState) -> f64 {
    let mut keys: Vec<&Config> = a.iter().map(|(k, _)| k).collect();
    keys.extend(b.iter().map(|(k, _)| k));
    keys.into_iter().map(|k| (a.amplitude(k) - b.amplitude(k)).norm()).fold(0.0, f64::max)
}
