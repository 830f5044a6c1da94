use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a physical qubit in a [`super::Layout`].
pub type Slot = u16;

/// Transmon level of one slot. Phonon carriers are only ever `G` or `E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    G,
    E,
    F,
}

impl Level {
    pub fn symbol(self) -> char {
        match self {
            Level::G => 'g',
            Level::E => 'e',
            Level::F => 'f',
        }
    }

    pub fn from_symbol(c: char) -> Option<Level> {
        match c {
            'g' | '0' => Some(Level::G),
            'e' | '1' => Some(Level::E),
            'f' | '2' => Some(Level::F),
            _ => None,
        }
    }

    /// Excitation number: 0, 1 or 2.
    pub fn quanta(self) -> u32 {
        self as u32
    }
}

/// Basis configuration: the non-ground slots, sorted by slot.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Config(Vec<(Slot, Level)>);

impl Config {
    pub fn ground() -> Self {
        Config(Vec::new())
    }

    pub fn from_pairs<I: IntoIterator<Item = (Slot, Level)>>(pairs: I) -> Self {
        let mut c = Config::ground();
        for (s, l) in pairs {
            c.set(s, l);
        }
        c
    }

    pub fn get(&self, slot: Slot) -> Level {
        match self.0.binary_search_by_key(&slot, |p| p.0) {
            Ok(i) => self.0[i].1,
            Err(_) => Level::G,
        }
    }

    pub fn set(&mut self, slot: Slot, level: Level) {
        match (self.0.binary_search_by_key(&slot, |p| p.0), level) {
            (Ok(i), Level::G) => {
                self.0.remove(i);
            }
            (Ok(i), l) => self.0[i].1 = l,
            (Err(_), Level::G) => {}
            (Err(i), l) => self.0.insert(i, (slot, l)),
        }
    }

    pub fn swap(&mut self, a: Slot, b: Slot) {
        let (la, lb) = (self.get(a), self.get(b));
        self.set(a, lb);
        self.set(b, la);
    }

    pub fn excited(&self) -> &[(Slot, Level)] {
        &self.0
    }

    pub fn quanta(&self) -> u32 {
        self.0.iter().map(|p| p.1.quanta()).sum()
    }

    /// Keeps only slots for which `keep` holds.
    pub fn restrict<F: Fn(Slot) -> bool>(&self, keep: F) -> Config {
        Config(self.0.iter().copied().filter(|p| keep(p.0)).collect())
    }
}

/// Sparse state vector over [`Config`]s.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseState {
    amps: BTreeMap<Config, Complex64>,
}

/// Amplitudes with modulus below this are dropped after each gate.
pub const PRUNE: f64 = 1e-15;

impl SparseState {
    pub fn empty() -> Self {
        SparseState::default()
    }

    pub fn basis(config: Config) -> Self {
        let mut s = SparseState::default();
        s.amps.insert(config, Complex64::new(1.0, 0.0));
        s
    }

    pub fn add(&mut self, config: Config, amp: Complex64) {
        *self.amps.entry(config).or_insert(Complex64::new(0.0, 0.0)) += amp;
    }

    pub fn amplitude(&self, config: &Config) -> Complex64 {
        self.amps.get(config).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Config, &Complex64)> {
        self.amps.iter()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn prune(&mut self) {
        self.amps.retain(|_, a| a.norm() >= PRUNE);
    }

    /// Applies a linear map given per basis configuration.
    pub fn map<F>(&self, f: F) -> SparseState
    where
        F: Fn(&Config, Complex64, &mut dyn FnMut(Config, Complex64)),
    {
        let mut out = SparseState::default();
        for (c, &a) in &self.amps {
            f(c, a, &mut |c2, a2| out.add(c2, a2));
        }
        out.prune();
        out
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &SparseState) -> Complex64 {
        self.amps.iter().map(|(c, a)| a.conj() * other.amplitude(c)).sum()
    }

    pub fn into_map(self) -> BTreeMap<Config, Complex64> {
        self.amps
    }
}

impl FromIterator<(Config, Complex64)> for SparseState {
    fn from_iter<I: IntoIterator<Item = (Config, Complex64)>>(iter: I) -> Self {
        let mut s = SparseState::default();
        for (c, a) in iter {
            s.add(c, a);
        }
        s
    }
}

/// Renders and parses configuration strings: one level symbol per slot.
#[derive(Debug, Clone, Copy)]
pub struct ConfigCodec {
    pub slots: usize,
}

impl ConfigCodec {
    pub fn render(&self, config: &Config) -> String {
        (0..self.slots).map(|s| config.get(s as Slot).symbol()).collect()
    }

    pub fn parse(&self, text: &str) -> Result<Config> {
        let chars: Vec<char> = text.chars().collect();
        if chars.len() != self.slots {
            return Err(Error::InvariantViolation(format!(
                "configuration string has {} slots, layout has {}",
                chars.len(),
                self.slots
            )));
        }
        let mut c = Config::ground();
        for (i, ch) in chars.into_iter().enumerate() {
            let level = Level::from_symbol(ch)
                .ok_or_else(|| Error::InvariantViolation(format!("bad level symbol {ch:?} at slot {i}")))?;
            c.set(i as Slot, level);
        }
        Ok(c)
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(s, l)| format!("{s}:{}", l.symbol())).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_and_get_keep_sorted() {
        let mut c = Config::ground();
        c.set(5, Level::E);
        c.set(1, Level::F);
        c.set(3, Level::E);
        assert_eq!(c.excited(), &[(1, Level::F), (3, Level::E), (5, Level::E)]);
        c.set(3, Level::G);
        assert_eq!(c.get(3), Level::G);
        assert_eq!(c.quanta(), 3);
        c.swap(1, 2);
        assert_eq!(c.get(2), Level::F);
        assert_eq!(c.get(1), Level::G);
    }

    #[test]
    fn codec_round_trip() {
        let codec = ConfigCodec { slots: 6 };
        let c = codec.parse("gegfgg").unwrap();
        assert_eq!(codec.render(&c), "gegfgg");
        assert!(matches!(codec.parse("gxg"), Err(Error::InvariantViolation(_))));
        assert!(matches!(codec.parse("gegfgx"), Err(Error::InvariantViolation(_))));
    }
}
