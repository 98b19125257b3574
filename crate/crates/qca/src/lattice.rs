//! Finite periodic lattice geometry.
//!
//! Sites live on a 1- or 2-dimensional grid with periodic boundaries.
//! Every site has a canonical linear index (first axis fastest); the
//! state-vector layer assigns bit `i` of a basis label to the site with
//! linear index `i`.

use crate::error::{Error, Result};

/// Default upper bound on simulable qubit count (2^24 amplitudes).
pub const DEFAULT_SITE_CAP: usize = 24;

/// Environment variable overriding [`site_cap`].
pub const SITE_CAP_ENV: &str = "QCA_MAX_QUBITS";

/// Maximum number of sites a state vector may be allocated for.
///
/// Reads `QCA_MAX_QUBITS` if set and parseable, otherwise
/// [`DEFAULT_SITE_CAP`].
pub fn site_cap() -> usize {
    std::env::var(SITE_CAP_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_SITE_CAP)
}

/// Integer coordinates of a lattice site, one entry per axis.
///
/// Coordinates may be arbitrary integers; addressing through a
/// [`Lattice`] reduces them modulo the extents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SiteIndex {
    pub coords: Vec<i64>,
}

impl SiteIndex {
    pub fn new(coords: impl Into<Vec<i64>>) -> Self {
        SiteIndex { coords: coords.into() }
    }
}

impl From<i64> for SiteIndex {
    fn from(x: i64) -> Self {
        SiteIndex { coords: vec![x] }
    }
}

impl From<(i64, i64)> for SiteIndex {
    fn from((x, y): (i64, i64)) -> Self {
        SiteIndex { coords: vec![x, y] }
    }
}

/// Finite periodic lattice of qubit sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    extents: Vec<usize>,
}

impl Lattice {
    /// Builds a lattice with the given per-axis extents.
    ///
    /// The dimension (number of extents) must be 1 or 2 and every extent
    /// must be at least 1.
    pub fn new(extents: &[usize]) -> Result<Self> {
        if extents.is_empty() || extents.len() > 2 {
            return Err(Error::config(format!(
                "lattice dimension must be 1 or 2, got {}",
                extents.len()
            )));
        }
        if extents.iter().any(|&e| e == 0) {
            return Err(Error::config("lattice extents must be positive"));
        }
        Ok(Lattice { extents: extents.to_vec() })
    }

    /// One-dimensional ring of `n` sites.
    pub fn ring(n: usize) -> Result<Self> {
        Lattice::new(&[n])
    }

    pub fn dimension(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    /// Total number of sites.
    pub fn num_sites(&self) -> usize {
        self.extents.iter().product()
    }

    /// Reduces each coordinate into `[0, extent)`.
    pub fn canonical(&self, site: &SiteIndex) -> SiteIndex {
        let coords = site
            .coords
            .iter()
            .zip(&self.extents)
            .map(|(&c, &e)| c.rem_euclid(e as i64))
            .collect();
        SiteIndex { coords }
    }

    /// Canonical linear index of a site (first axis fastest).
    pub fn linear(&self, site: &SiteIndex) -> usize {
        debug_assert_eq!(site.coords.len(), self.dimension());
        let canon = self.canonical(site);
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (c, e) in canon.coords.iter().zip(&self.extents) {
            idx += (*c as usize) * stride;
            stride *= e;
        }
        idx
    }

    /// Site at a given linear index.
    pub fn site_at(&self, linear: usize) -> SiteIndex {
        debug_assert!(linear < self.num_sites());
        let mut rem = linear;
        let coords = self
            .extents
            .iter()
            .map(|&e| {
                let c = (rem % e) as i64;
                rem /= e;
                c
            })
            .collect();
        SiteIndex { coords }
    }

    /// Linear index of `site` shifted by `offset`, wrapped periodically.
    pub fn shifted(&self, site: usize, offset: &[i64]) -> usize {
        let mut s = self.site_at(site);
        for (c, o) in s.coords.iter_mut().zip(offset) {
            *c += o;
        }
        self.linear(&s)
    }

    /// Wrapped L∞ distance between two sites.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        let sa = self.site_at(a);
        let sb = self.site_at(b);
        sa.coords
            .iter()
            .zip(&sb.coords)
            .zip(&self.extents)
            .map(|((&ca, &cb), &e)| {
                let d = (ca - cb).unsigned_abs() as usize;
                d.min(e - d)
            })
            .max()
            .unwrap_or(0)
    }

    /// All linear site indices in canonical order.
    pub fn sites(&self) -> impl Iterator<Item = usize> {
        0..self.num_sites()
    }

    /// Largest wrapped L∞ distance realizable on this lattice.
    pub fn max_distance(&self) -> usize {
        self.extents.iter().map(|&e| e / 2).max().unwrap_or(0)
    }
}

/// Finite set of coordinate offsets defining each site's neighbourhood.
///
/// Always contains the zero offset, so a site is its own neighbour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighbourhoodScheme {
    offsets: Vec<Vec<i64>>,
}

impl NeighbourhoodScheme {
    /// Builds a scheme from offsets, inserting the zero vector if absent.
    pub fn new(dimension: usize, offsets: &[Vec<i64>]) -> Result<Self> {
        if dimension == 0 || dimension > 2 {
            return Err(Error::config("neighbourhood dimension must be 1 or 2"));
        }
        let mut all: Vec<Vec<i64>> = Vec::new();
        let zero = vec![0i64; dimension];
        if !offsets.contains(&zero) {
            all.push(zero);
        }
        for o in offsets {
            if o.len() != dimension {
                return Err(Error::config(format!(
                    "offset {:?} has wrong dimension, expected {}",
                    o, dimension
                )));
            }
            if !all.contains(o) {
                all.push(o.clone());
            }
        }
        Ok(NeighbourhoodScheme { offsets: all })
    }

    /// Nearest-neighbour scheme: zero plus ±1 along each axis.
    pub fn nearest_neighbour(dimension: usize) -> Self {
        let mut offsets = vec![vec![0i64; dimension]];
        for ax in 0..dimension {
            for s in [-1i64, 1] {
                let mut o = vec![0i64; dimension];
                o[ax] = s;
                offsets.push(o);
            }
        }
        NeighbourhoodScheme { offsets }
    }

    /// All sites within L∞ radius `r` (1-D: {-r..r}).
    pub fn ball(dimension: usize, r: i64) -> Self {
        let mut offsets = Vec::new();
        match dimension {
            1 => {
                for x in -r..=r {
                    offsets.push(vec![x]);
                }
            }
            _ => {
                for x in -r..=r {
                    for y in -r..=r {
                        offsets.push(vec![x, y]);
                    }
                }
            }
        }
        NeighbourhoodScheme { offsets }
    }

    pub fn offsets(&self) -> &[Vec<i64>] {
        &self.offsets
    }

    /// Offsets other than zero, i.e. the proper neighbours.
    pub fn nonzero_offsets(&self) -> impl Iterator<Item = &Vec<i64>> {
        self.offsets.iter().filter(|o| o.iter().any(|&c| c != 0))
    }

    /// Maximum L∞ norm over the offsets.
    pub fn radius(&self) -> usize {
        self.offsets
            .iter()
            .map(|o| o.iter().map(|c| c.unsigned_abs() as usize).max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Linear indices of the proper neighbours of `site`, wrapped; the
    /// site itself is excluded and duplicates from wrapping collapse.
    pub fn neighbours(&self, lattice: &Lattice, site: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for o in self.nonzero_offsets() {
            let n = lattice.shifted(site, o);
            if n != site && !out.contains(&n) {
                out.push(n);
            }
        }
        out
    }
}
