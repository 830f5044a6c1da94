//! Gate-level simulation of a bucket-brigade query over the binary tree.
//!
//! Routing is ideal here: every conditional route is an exact controlled
//! swap. Timing follows [`crate::scheduler`], so the exported gate trace can
//! be replayed against the schedule.

mod gates;
mod protocol;
mod state;

pub use gates::{Gate, Rails};
pub use protocol::{
    check_trace_against_schedule, Op, OpKind, OutputTerm, Qram, QueryOutcome, QueryProgram,
};
pub use state::{Config, ConfigCodec, Level, Slot, SparseState};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::encoding::Encoding;
use crate::error::{Error, Result};
use crate::units::Time;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QramConfig {
    pub n: u32,
    pub t: Time,
    #[serde(default = "zero_time")]
    pub t_f: Time,
    pub encoding: Encoding,
}

fn zero_time() -> Time {
    Time::ZERO
}

/// Largest tree accepted. Full-amplitude queries are practical to about
/// n = 6; basis-trajectory replay goes further.
pub const MAX_DEPTH: u32 = 10;

impl QramConfig {
    pub fn new(n: u32, encoding: Encoding) -> Self {
        QramConfig { n, t: Time::from_ns(350.0), t_f: Time::ZERO, encoding }
    }

    pub fn memory_size(&self) -> usize {
        1 << self.n
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_DEPTH {
            return Err(Error::invalid(format!("tree depth must be in 1..={MAX_DEPTH}, got {}", self.n)));
        }
        if !(self.t.ns() > 0.0 && self.t.ns().is_finite()) {
            return Err(Error::invalid(format!("routing step must be positive, got {} ns", self.t.ns())));
        }
        if !(self.t_f.ns() >= 0.0 && self.t_f.ns().is_finite()) {
            return Err(Error::invalid(format!("t_f must be non-negative, got {} ns", self.t_f.ns())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataMode {
    Classical,
    Quantum,
}

impl DataMode {
    pub fn name(self) -> &'static str {
        match self {
            DataMode::Classical => "classical",
            DataMode::Quantum => "quantum",
        }
    }
}

/// Memory contents: one bit or one qubit `(c0, c1)` per address.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataRegister {
    Classical(Vec<bool>),
    Quantum(Vec<[Complex64; 2]>),
}

impl DataRegister {
    pub fn mode(&self) -> DataMode {
        match self {
            DataRegister::Classical(_) => DataMode::Classical,
            DataRegister::Quantum(_) => DataMode::Quantum,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            DataRegister::Classical(d) => d.len(),
            DataRegister::Quantum(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self, memory_size: usize) -> Result<()> {
        if self.len() != memory_size {
            return Err(Error::invalid(format!("data register has {} cells, expected {memory_size}", self.len())));
        }
        if let DataRegister::Quantum(cells) = self {
            for (i, c) in cells.iter().enumerate() {
                let norm = c[0].norm_sqr() + c[1].norm_sqr();
                if (norm - 1.0).abs() > 1e-10 {
                    return Err(Error::invalid(format!("data qubit {i} has norm {norm}")));
                }
            }
        }
        Ok(())
    }
}

/// Normalized amplitudes `α_j` over basis addresses; bit `a_0` is the most
/// significant bit of `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AddressState(pub Vec<Complex64>);

impl AddressState {
    pub fn basis(memory_size: usize, j: usize) -> Result<Self> {
        if j >= memory_size {
            return Err(Error::invalid(format!("address {j} outside memory of size {memory_size}")));
        }
        let mut v = vec![Complex64::new(0.0, 0.0); memory_size];
        v[j] = Complex64::new(1.0, 0.0);
        Ok(AddressState(v))
    }

    /// Parses a bit string such as `"101"`, most significant bit first.
    pub fn from_bits(bits: &str) -> Result<Self> {
        if bits.is_empty() || !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::invalid(format!("malformed address {bits:?}")));
        }
        let j = usize::from_str_radix(bits, 2).map_err(|e| Error::invalid(e.to_string()))?;
        AddressState::basis(1 << bits.len(), j)
    }

    pub fn validate(&self, memory_size: usize) -> Result<()> {
        if self.0.len() != memory_size {
            return Err(Error::invalid(format!(
                "address state has {} amplitudes, expected {memory_size}",
                self.0.len()
            )));
        }
        let norm: f64 = self.0.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("address state norm is {norm}")));
        }
        Ok(())
    }
}

/// Physical qubits of one query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layout {
    pub n: u32,
    pub encoding: Encoding,
    pub mode: DataMode,
    /// `[k][rail]`, `k = n` is the bus.
    pub register: Vec<Vec<Slot>>,
    /// `[level][node][rail]` for levels `0..=n`; level `n` holds the leaves.
    pub ancilla: Vec<Vec<Vec<Slot>>>,
    /// `[level][node][rail]` for levels `0..n`.
    pub control: Vec<Vec<Vec<Slot>>>,
    pub data_control: Vec<Slot>,
    pub data: Vec<Slot>,
    pub names: Vec<String>,
}

impl Layout {
    pub fn new(n: u32, encoding: Encoding, mode: DataMode) -> Self {
        let rails = encoding.rails();
        let mut names = Vec::new();
        let mut alloc = |name: String| {
            names.push(name);
            (names.len() - 1) as Slot
        };
        let register = (0..=n)
            .map(|k| (0..rails).map(|r| alloc(format!("reg{k}.{r}"))).collect())
            .collect();
        let mut ancilla = Vec::new();
        let mut control = Vec::new();
        for l in 0..=n {
            let nodes = 1usize << l;
            ancilla.push(
                (0..nodes)
                    .map(|i| (0..rails).map(|r| alloc(format!("anc{l}.{i}.{r}"))).collect())
                    .collect(),
            );
            if l < n {
                control.push(
                    (0..nodes)
                        .map(|i| (0..rails).map(|r| alloc(format!("ctl{l}.{i}.{r}"))).collect())
                        .collect(),
                );
            }
        }
        let (mut data_control, mut data) = (Vec::new(), Vec::new());
        if mode == DataMode::Quantum {
            for j in 0..1usize << n {
                data_control.push(alloc(format!("dc{j}")));
                data.push(alloc(format!("d{j}")));
            }
        }
        Layout { n, encoding, mode, register, ancilla, control, data_control, data, names }
    }

    pub fn slots(&self) -> usize {
        self.names.len()
    }

    pub fn codec(&self) -> ConfigCodec {
        ConfigCodec { slots: self.slots() }
    }

    pub fn memory_size(&self) -> usize {
        1 << self.n
    }

    /// Rail whose excitation steers a router or carries the bus.
    pub fn control_rail(&self) -> usize {
        if self.encoding.is_standard() {
            1
        } else {
            0
        }
    }

    /// Memory cell wired to leaf `leaf`. Hybrid trees route on the inverted
    /// bit (the excitation in the tree marks logical 0), so their wiring is
    /// mirrored.
    pub fn cell_of_leaf(&self, leaf: usize) -> usize {
        if self.encoding == Encoding::HybridDualRail {
            leaf ^ (self.memory_size() - 1)
        } else {
            leaf
        }
    }

    pub fn is_register(&self, slot: Slot) -> bool {
        self.register.iter().flatten().any(|&s| s == slot)
    }

    pub fn is_data(&self, slot: Slot) -> bool {
        self.data.contains(&slot) || self.data_control.contains(&slot)
    }

    pub fn is_tree(&self, slot: Slot) -> bool {
        !self.is_register(slot) && !self.is_data(slot)
    }

    /// Register qubit `k` as a gate operand.
    pub fn register_rails(&self, k: usize) -> Rails {
        let r = &self.register[k];
        if r.len() == 2 {
            Rails::Dual(r[0], r[1])
        } else {
            Rails::Single(r[0])
        }
    }
}
