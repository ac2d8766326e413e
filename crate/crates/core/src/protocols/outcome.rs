use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A measurement outcome in `{+1, -1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    /// Table index: `+1 -> 0`, `-1 -> 1`.
    pub fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Protocol {
    /// Measure `Pi^B_k`, outcome `z`.
    MeasureB,
    /// X-type weak measurement of `Pi^A_j`, then `Pi^B_k`; outcomes `(x, z)`.
    WeakXThenB,
    /// Y-type weak measurement of `Pi^A_j`, then `Pi^B_k`; outcomes `(y, z)`.
    WeakYThenB,
    /// Measure `Pi^A_j` with probability `p_m`, else a fair coin; outcome `x`.
    NoisyA,
    /// Discard the system and flip a fair coin; outcome `y`.
    Coin,
    /// Apply `D_j . D_j^dagger` with probability `p_d`, then `Pi^B_k`; outcome `z`.
    DephaseThenB,
}

impl Protocol {
    pub const ALL: [Protocol; 6] = [
        Protocol::MeasureB,
        Protocol::WeakXThenB,
        Protocol::WeakYThenB,
        Protocol::NoisyA,
        Protocol::Coin,
        Protocol::DephaseThenB,
    ];

    /// Protocol number, 1 through 6.
    pub fn id(self) -> u8 {
        match self {
            Protocol::MeasureB => 1,
            Protocol::WeakXThenB => 2,
            Protocol::WeakYThenB => 3,
            Protocol::NoisyA => 4,
            Protocol::Coin => 5,
            Protocol::DephaseThenB => 6,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        Protocol::ALL.get(usize::from(id).wrapping_sub(1)).copied().ok_or(Error::InvalidProtocol(id))
    }

    pub fn uses_j(self) -> bool {
        matches!(self, Protocol::WeakXThenB | Protocol::WeakYThenB | Protocol::NoisyA | Protocol::DephaseThenB)
    }

    pub fn uses_k(self) -> bool {
        matches!(self, Protocol::MeasureB | Protocol::WeakXThenB | Protocol::WeakYThenB | Protocol::DephaseThenB)
    }

    pub fn has_x(self) -> bool {
        matches!(self, Protocol::WeakXThenB | Protocol::NoisyA)
    }

    pub fn has_y(self) -> bool {
        matches!(self, Protocol::WeakYThenB | Protocol::Coin)
    }

    pub fn has_z(self) -> bool {
        self.uses_k()
    }

    /// All outcomes in canonical order: `z` varies fastest, `+1` before `-1`.
    pub fn outcomes(self) -> Vec<Outcome> {
        let mut out = Vec::with_capacity(4);
        let firsts: &[Option<Sign>] = if self.has_x() || self.has_y() { &[Some(Sign::Plus), Some(Sign::Minus)] } else { &[None] };
        let zs: &[Option<Sign>] = if self.has_z() { &[Some(Sign::Plus), Some(Sign::Minus)] } else { &[None] };
        for &first in firsts {
            for &z in zs {
                out.push(Outcome {
                    x: if self.has_x() { first } else { None },
                    y: if self.has_y() { first } else { None },
                    z,
                });
            }
        }
        out
    }
}

/// One protocol run's result. Unused coordinates are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Outcome {
    pub x: Option<Sign>,
    pub y: Option<Sign>,
    pub z: Option<Sign>,
}

impl Outcome {
    /// Whether the populated coordinates match the protocol's arity.
    pub fn fits(&self, protocol: Protocol) -> bool {
        self.x.is_some() == protocol.has_x() && self.y.is_some() == protocol.has_y() && self.z.is_some() == protocol.has_z()
    }

    /// Position in `protocol.outcomes()`, or `None` if the arity is wrong.
    pub fn index_in(&self, protocol: Protocol) -> Option<usize> {
        if !self.fits(protocol) {
            return None;
        }
        let first = self.x.or(self.y).map_or(0, Sign::index);
        let z = self.z.map_or(0, Sign::index);
        Some(if protocol.has_z() { 2 * first + z } else { first })
    }
}

/// A protocol together with the indices it acts on. Unused indices are 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Setting {
    pub protocol: Protocol,
    pub j: usize,
    pub k: usize,
}

impl Setting {
    pub fn new(protocol: Protocol, j: usize, k: usize) -> Self {
        Self {
            protocol,
            j: if protocol.uses_j() { j } else { 0 },
            k: if protocol.uses_k() { k } else { 0 },
        }
    }

    /// Every distinct `(protocol, j, k)` cell in dimension `d`.
    pub fn grid(d: usize) -> Vec<Setting> {
        let mut out = Vec::new();
        for p in Protocol::ALL {
            Self::cells_of(p, d, &mut out);
        }
        out
    }

    /// Position of this cell in `Setting::grid(d)`.
    pub fn grid_index(&self, d: usize) -> usize {
        let offset = |p: Protocol| Protocol::ALL.iter().take_while(|&&q| q != p).map(|&q| Self::cell_count(q, d)).sum::<usize>();
        let ks = if self.protocol.uses_k() { d } else { 1 };
        let j = if self.protocol.uses_j() { self.j } else { 0 };
        let k = if self.protocol.uses_k() { self.k } else { 0 };
        offset(self.protocol) + j * ks + k
    }

    pub fn cell_count(protocol: Protocol, d: usize) -> usize {
        (if protocol.uses_j() { d } else { 1 }) * (if protocol.uses_k() { d } else { 1 })
    }

    /// The cells of one protocol.
    pub fn cells(protocol: Protocol, d: usize) -> Vec<Setting> {
        let mut out = Vec::new();
        Self::cells_of(protocol, d, &mut out);
        out
    }

    fn cells_of(p: Protocol, d: usize, out: &mut Vec<Setting>) {
        let js = if p.uses_j() { d } else { 1 };
        let ks = if p.uses_k() { d } else { 1 };
        for j in 0..js {
            for k in 0..ks {
                out.push(Setting { protocol: p, j, k });
            }
        }
    }
}

/// Probability table of one protocol over its outcomes in canonical order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OutcomeLaw {
    pub protocol: Protocol,
    pub entries: Vec<(Outcome, f64)>,
}

impl OutcomeLaw {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    pub fn probability(&self, outcome: &Outcome) -> f64 {
        self.entries.iter().find(|(o, _)| o == outcome).map_or(0.0, |(_, p)| *p)
    }

    /// Inverse-CDF lookup for `u` in `[0, 1)`. Round-off past the last
    /// cumulative weight falls on the last outcome with positive mass.
    pub fn invert(&self, u: f64) -> Outcome {
        let mut acc = 0.0;
        for (o, p) in &self.entries {
            acc += p;
            if u < acc {
                return *o;
            }
        }
        self.entries.iter().rev().find(|(_, p)| *p > 0.0).or(self.entries.last()).map(|(o, _)| *o).expect("law has outcomes")
    }

    pub fn max_abs_diff(&self, other: &OutcomeLaw) -> f64 {
        self.entries.iter().map(|(o, p)| (p - other.probability(o)).abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protocol_ids_round_trip() {
        for p in Protocol::ALL {
            assert_eq!(Protocol::from_id(p.id()).unwrap(), p);
        }
        assert!(Protocol::from_id(0).is_err());
        assert!(Protocol::from_id(7).is_err());
    }

    #[test]
    fn outcome_arity() {
        assert_eq!(Protocol::MeasureB.outcomes().len(), 2);
        assert_eq!(Protocol::WeakXThenB.outcomes().len(), 4);
        assert_eq!(Protocol::Coin.outcomes().len(), 2);
        for p in Protocol::ALL {
            assert!(p.outcomes().iter().all(|o| o.fits(p)));
            for (i, o) in p.outcomes().iter().enumerate() {
                assert_eq!(o.index_in(p), Some(i));
            }
        }
        let o = Protocol::MeasureB.outcomes()[0];
        assert_eq!(o.index_in(Protocol::Coin), None);
    }

    #[test]
    fn grid_size() {
        // d + 3 d^2 + d + 1 cells
        assert_eq!(Setting::grid(2).len(), 2 + 12 + 2 + 1);
        assert_eq!(Setting::grid(3).len(), 3 + 27 + 3 + 1);
        for d in 1..5 {
            for (i, s) in Setting::grid(d).iter().enumerate() {
                assert_eq!(s.grid_index(d), i);
            }
        }
    }
}
