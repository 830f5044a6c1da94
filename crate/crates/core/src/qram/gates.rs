use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use super::state::{Config, Level, SparseState, Slot};

/// A qubit carried on one slot, or a dual-rail qubit on two
/// (logical 0 = first rail excited, logical 1 = second rail excited).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rails {
    Single(Slot),
    Dual(Slot, Slot),
}

/// Ideal gates of the logical model. All except `Hadamard` permute basis
/// configurations up to a phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Gate {
    Swap(Slot, Slot),
    /// Exchanges `|eg⟩ ↔ |ge⟩` only.
    GeExchange(Slot, Slot),
    /// Swaps levels `lo` and `hi` of one transmon.
    LevelFlip { slot: Slot, lo: Level, hi: Level },
    /// Moves `source` into `left` when `control` is in ground, into `right` otherwise.
    Route { control: Slot, source: Slot, left: Slot, right: Slot },
    /// Swaps `a` and `b` when `control` is excited.
    CSwap { control: Slot, a: Slot, b: Slot },
    /// Phase −1 when `slot` is in `|e⟩`.
    PhaseIfExcited(Slot),
    Hadamard(Rails),
    PauliZ(Rails),
}

impl Gate {
    /// True for gates that conserve the excitation number.
    pub fn conserves_quanta(&self) -> bool {
        !matches!(self, Gate::LevelFlip { .. } | Gate::Hadamard(Rails::Single(_)))
    }

    /// Permutation-type action on one configuration; `None` for `Hadamard`.
    pub fn permute(&self, c: &Config) -> Option<(Config, f64)> {
        let mut out = c.clone();
        let mut sign = 1.0;
        match *self {
            Gate::Swap(a, b) => out.swap(a, b),
            Gate::GeExchange(a, b) => match (c.get(a), c.get(b)) {
                (Level::E, Level::G) | (Level::G, Level::E) => out.swap(a, b),
                _ => {}
            },
            Gate::LevelFlip { slot, lo, hi } => {
                let l = c.get(slot);
                if l == lo {
                    out.set(slot, hi);
                } else if l == hi {
                    out.set(slot, lo);
                }
            }
            Gate::Route { control, source, left, right } => {
                let dest = if c.get(control) == Level::G { left } else { right };
                out.swap(source, dest);
            }
            Gate::CSwap { control, a, b } => {
                if c.get(control) != Level::G {
                    out.swap(a, b);
                }
            }
            Gate::PhaseIfExcited(s) => {
                if c.get(s) == Level::E {
                    sign = -1.0;
                }
            }
            Gate::PauliZ(Rails::Single(s)) => {
                if c.get(s) == Level::E {
                    sign = -1.0;
                }
            }
            Gate::PauliZ(Rails::Dual(r0, r1)) => {
                if c.get(r0) == Level::G && c.get(r1) == Level::E {
                    sign = -1.0;
                }
            }
            Gate::Hadamard(_) => return None,
        }
        Some((out, sign))
    }

    pub fn apply(&self, state: &SparseState) -> SparseState {
        state.map(|c, a, emit| match self.permute(c) {
            Some((c2, sign)) => emit(c2, a * sign),
            None => hadamard(self, c, a, emit),
        })
    }
}

fn hadamard(gate: &Gate, c: &Config, a: Complex64, emit: &mut dyn FnMut(Config, Complex64)) {
    let h = FRAC_1_SQRT_2;
    // (zero, one) configurations of the addressed qubit, or None outside its subspace.
    let basis = |c: &Config| -> Option<(Config, Config, bool)> {
        match *gate {
            Gate::Hadamard(Rails::Single(s)) => {
                let l = c.get(s);
                if l == Level::F {
                    return None;
                }
                let mut zero = c.clone();
                zero.set(s, Level::G);
                let mut one = c.clone();
                one.set(s, Level::E);
                Some((zero, one, l == Level::E))
            }
            Gate::Hadamard(Rails::Dual(r0, r1)) => {
                let is_one = match (c.get(r0), c.get(r1)) {
                    (Level::E, Level::G) => false,
                    (Level::G, Level::E) => true,
                    _ => return None,
                };
                let mut zero = c.clone();
                zero.set(r0, Level::E);
                zero.set(r1, Level::G);
                let mut one = c.clone();
                one.set(r0, Level::G);
                one.set(r1, Level::E);
                Some((zero, one, is_one))
            }
            _ => unreachable!("only Hadamard lacks a permutation form"),
        }
    };
    match basis(c) {
        None => emit(c.clone(), a),
        Some((zero, one, is_one)) => {
            emit(zero, a * h);
            emit(one, if is_one { -a * h } else { a * h });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(pairs: &[(Slot, Level)]) -> Config {
        Config::from_pairs(pairs.iter().copied())
    }

    #[test]
    fn swap_moves_excitation() {
        let s = SparseState::basis(cfg(&[(0, Level::E)]));
        let out = Gate::Swap(0, 1).apply(&s);
        assert_eq!(out.amplitude(&cfg(&[(1, Level::E)])).re, 1.0);
    }

    #[test]
    fn ge_exchange_ignores_f() {
        let c = cfg(&[(0, Level::F)]);
        assert_eq!(Gate::GeExchange(0, 1).permute(&c).unwrap().0, c);
        let c = cfg(&[(0, Level::E), (1, Level::E)]);
        assert_eq!(Gate::GeExchange(0, 1).permute(&c).unwrap().0, c);
    }

    #[test]
    fn route_by_control() {
        let g = Gate::Route { control: 0, source: 1, left: 2, right: 3 };
        let c = cfg(&[(1, Level::E)]);
        assert_eq!(g.permute(&c).unwrap().0, cfg(&[(2, Level::E)]));
        let c = cfg(&[(0, Level::E), (1, Level::E)]);
        assert_eq!(g.permute(&c).unwrap().0, cfg(&[(0, Level::E), (3, Level::E)]));
    }

    #[test]
    fn hadamard_is_involution() {
        let s: SparseState = [(cfg(&[]), Complex64::new(0.6, 0.0)), (cfg(&[(0, Level::E)]), Complex64::new(0.0, 0.8))]
            .into_iter()
            .collect();
        for rails in [Rails::Single(0), Rails::Dual(1, 0)] {
            let g = Gate::Hadamard(rails);
            let back = g.apply(&g.apply(&s));
            assert!((back.inner(&s).re - 1.0).abs() < 1e-14);
        }
    }
}
