//! Elementary (classical) cellular automata on periodic rows, and the
//! embedding of reversible block CA as permutation-unitary quantum
//! models.

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::CMatrix;
use crate::mqca::{MargolusQCA, Tiling};
use crate::scalar::{cone, Float};

/// One of the 256 elementary update rules, keyed by Wolfram number.
///
/// Neighbourhood (left, centre, right) read as a 3-bit value selects
/// that bit of the rule number as the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleTable {
    number: u8,
}

impl RuleTable {
    pub fn new(number: u8) -> Self {
        RuleTable { number }
    }

    pub fn number(&self) -> u8 {
        self.number
    }

    /// Output bit for the neighbourhood (left, centre, right).
    pub fn output(&self, left: bool, centre: bool, right: bool) -> bool {
        let idx = ((left as u8) << 2) | ((centre as u8) << 1) | (right as u8);
        (self.number >> idx) & 1 == 1
    }

    /// The eight outputs, for neighbourhoods 111 down to 000.
    pub fn table(&self) -> [bool; 8] {
        let mut t = [false; 8];
        for (i, slot) in t.iter_mut().enumerate() {
            let idx = 7 - i;
            *slot = (self.number >> idx) & 1 == 1;
        }
        t
    }
}

/// A periodic row of binary cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitRow {
    bits: Vec<bool>,
}

impl BitRow {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.len() < 3 {
            return Err(Error::config(format!(
                "rows need at least 3 cells, got {}",
                bits.len()
            )));
        }
        Ok(BitRow { bits })
    }

    /// Parses a string of '0'/'1' characters, leftmost cell first.
    pub fn parse(text: &str) -> Result<Self> {
        let bits = text
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::usage(format!("row cells must be 0 or 1, got '{other}'"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        BitRow::new(bits)
    }

    /// All-zero row with a single 1 at the centre cell.
    pub fn single_seed(width: usize) -> Result<Self> {
        let mut bits = vec![false; width];
        if width >= 3 {
            bits[width / 2] = true;
        }
        BitRow::new(bits)
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Cell value with periodic wrap.
    pub fn bit(&self, i: i64) -> bool {
        let w = self.bits.len() as i64;
        self.bits[i.rem_euclid(w) as usize]
    }

    /// Dot/hash rendering for terminal output.
    pub fn art(&self) -> String {
        self.bits.iter().map(|&b| if b { '#' } else { '.' }).collect()
    }
}

impl std::fmt::Display for BitRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Updates every cell simultaneously from its three-cell neighbourhood,
/// wrapping at the row ends.
pub fn eca_step(rule: RuleTable, row: &BitRow) -> BitRow {
    let bits = (0..row.width() as i64)
        .map(|i| rule.output(row.bit(i - 1), row.bit(i), row.bit(i + 1)))
        .collect();
    BitRow { bits }
}

/// Runs `steps` updates; returns `steps + 1` rows starting with the
/// input.
pub fn eca_run(rule: RuleTable, row: &BitRow, steps: usize) -> Vec<BitRow> {
    let mut rows = Vec::with_capacity(steps + 1);
    rows.push(row.clone());
    for _ in 0..steps {
        let next = eca_step(rule, rows.last().unwrap());
        rows.push(next);
    }
    rows
}

/// Embeds a reversible block CA as a quantum model whose block
/// unitaries are the 0/1 permutation matrices of `perm` (block state
/// `j` maps to `perm[j]`). Basis states then evolve exactly as the
/// classical automaton.
pub fn reversible_block_to_mqca<T: Float>(
    perm: &[usize],
    lattice: Lattice,
    tiling_a: Tiling,
    tiling_b: Tiling,
) -> Result<MargolusQCA<T>> {
    let mut seen = vec![false; perm.len()];
    for &image in perm {
        if image >= perm.len() || seen[image] {
            return Err(Error::usage(
                "block permutation table must be a bijection on block states",
            ));
        }
        seen[image] = true;
    }
    for (t, which) in [(&tiling_a, "first"), (&tiling_b, "second")] {
        if perm.len() != 1usize << t.block_size() {
            return Err(Error::usage(format!(
                "permutation covers {} block states but the {which} tiling's blocks have {}",
                perm.len(),
                1usize << t.block_size()
            )));
        }
    }
    let dim = perm.len();
    let mut m = CMatrix::<T>::zeros(dim, dim);
    for (j, &image) in perm.iter().enumerate() {
        m[(image, j)] = cone();
    }
    MargolusQCA::new(lattice, tiling_a, tiling_b, m.clone(), m)
}
