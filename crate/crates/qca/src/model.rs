//! A common one-step interface over the three models, so verification
//! and the command line can treat any of them as "a lattice plus a
//! step map".

use crate::cqca::ColouredQCA;
use crate::ctqca::{ContinuousQCA, CtqcaSchedule, TrotterParams};
use crate::error::Result;
use crate::lattice::Lattice;
use crate::mqca::MargolusQCA;
use crate::scalar::Float;
use crate::state::StateVector;

/// Anything that advances a state vector by one discrete step.
///
/// `spatial_period` is the per-axis shift granularity at which the
/// step commutes with lattice translations; `declared_radius` is the
/// largest distance one step can move information.
pub trait Automaton<T: Float> {
    fn lattice(&self) -> &Lattice;
    fn step(&self, state: &mut StateVector<T>) -> Result<()>;
    fn spatial_period(&self) -> Vec<usize>;
    fn declared_radius(&self) -> usize;
    fn describe(&self) -> String;
}

impl<T: Float> Automaton<T> for MargolusQCA<T> {
    fn lattice(&self) -> &Lattice {
        self.lattice()
    }

    fn step(&self, state: &mut StateVector<T>) -> Result<()> {
        MargolusQCA::step(self, state)
    }

    fn spatial_period(&self) -> Vec<usize> {
        self.period()
    }

    fn declared_radius(&self) -> usize {
        MargolusQCA::declared_radius(self)
    }

    fn describe(&self) -> String {
        format!(
            "block-partitioned model on {} sites",
            self.lattice().num_sites()
        )
    }
}

impl<T: Float> Automaton<T> for ColouredQCA<T> {
    fn lattice(&self) -> &Lattice {
        self.lattice()
    }

    fn step(&self, state: &mut StateVector<T>) -> Result<()> {
        ColouredQCA::step(self, state)
    }

    fn spatial_period(&self) -> Vec<usize> {
        self.period()
    }

    fn declared_radius(&self) -> usize {
        ColouredQCA::declared_radius(self)
    }

    fn describe(&self) -> String {
        format!(
            "coloured model on {} sites, {} substeps",
            self.lattice().num_sites(),
            self.schedule().len()
        )
    }
}

/// Continuous model advanced one product-formula step at a time.
#[derive(Debug, Clone)]
pub struct TrotterStepper<T: Float> {
    pub model: ContinuousQCA<T>,
    pub params: TrotterParams<T>,
}

impl<T: Float> Automaton<T> for TrotterStepper<T> {
    fn lattice(&self) -> &Lattice {
        self.model.lattice()
    }

    fn step(&self, state: &mut StateVector<T>) -> Result<()> {
        self.model.trotter_step(state, &self.params)
    }

    fn spatial_period(&self) -> Vec<usize> {
        // The layer split can be coarser than the colour pattern, so
        // covariance only holds at shifts preserving every layer.
        let lattice = self.model.lattice();
        let layers: Vec<Vec<Vec<usize>>> = self
            .model
            .commuting_layers()
            .iter()
            .map(|layer| {
                let mut sets: Vec<Vec<usize>> = layer
                    .iter()
                    .map(|t| {
                        let mut s = t.sites.clone();
                        s.sort_unstable();
                        s
                    })
                    .collect();
                sets.sort();
                sets
            })
            .collect();
        let colour_period = self.model.period();
        (0..lattice.dimension())
            .map(|axis| {
                let extent = lattice.extents()[axis];
                (1..=extent)
                    .find(|&shift| {
                        extent % shift == 0
                            && shift % colour_period[axis] == 0
                            && layers.iter().all(|sets| {
                                let mut shifted: Vec<Vec<usize>> = sets
                                    .iter()
                                    .map(|term| {
                                        let mut s: Vec<usize> = term
                                            .iter()
                                            .map(|&site| {
                                                shift_site(lattice, site, axis, shift as i64)
                                            })
                                            .collect();
                                        s.sort_unstable();
                                        s
                                    })
                                    .collect();
                                shifted.sort();
                                &shifted == sets
                            })
                    })
                    .unwrap_or(extent)
            })
            .collect()
    }

    fn declared_radius(&self) -> usize {
        self.model.trotter_radius(self.params.order)
    }

    fn describe(&self) -> String {
        format!(
            "continuous model on {} sites, product-formula step",
            self.model.lattice().num_sites()
        )
    }
}

/// Continuous model advanced by exact evolution over a fixed interval.
#[derive(Debug, Clone)]
pub struct ExactStepper<T: Float> {
    pub model: ContinuousQCA<T>,
    pub t_step: T,
}

impl<T: Float> Automaton<T> for ExactStepper<T> {
    fn lattice(&self) -> &Lattice {
        self.model.lattice()
    }

    fn step(&self, state: &mut StateVector<T>) -> Result<()> {
        self.model.exact_evolve(state, self.t_step)
    }

    fn spatial_period(&self) -> Vec<usize> {
        self.model.period()
    }

    fn declared_radius(&self) -> usize {
        // Exact evolution has no strict light cone on a finite ring.
        self.model.lattice().max_distance()
    }

    fn describe(&self) -> String {
        format!(
            "continuous model on {} sites, exact step",
            self.model.lattice().num_sites()
        )
    }
}

/// Piecewise-constant schedule advanced one full pass at a time.
#[derive(Debug, Clone)]
pub struct ScheduleStepper<T: Float> {
    pub schedule: CtqcaSchedule<T>,
    pub lattice: Lattice,
}

impl<T: Float> Automaton<T> for ScheduleStepper<T> {
    fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn step(&self, state: &mut StateVector<T>) -> Result<()> {
        self.schedule.exact_evolve(state)
    }

    fn spatial_period(&self) -> Vec<usize> {
        let mut period: Vec<usize> = vec![1; self.lattice.dimension()];
        for seg in &self.schedule.segments {
            for (p, q) in period.iter_mut().zip(seg.model.period()) {
                *p = lcm(*p, q);
            }
        }
        period
    }

    fn declared_radius(&self) -> usize {
        self.lattice.max_distance()
    }

    fn describe(&self) -> String {
        format!(
            "piecewise-constant continuous schedule, {} segments",
            self.schedule.segments.len()
        )
    }
}

fn lcm(a: usize, b: usize) -> usize {
    if a == 0 || b == 0 {
        return 0;
    }
    let gcd = |mut x: usize, mut y: usize| {
        while y != 0 {
            let r = x % y;
            x = y;
            y = r;
        }
        x
    };
    a / gcd(a, b) * b
}

/// Linear index of `site` shifted by `amount` along `axis`.
fn shift_site(lattice: &Lattice, site: usize, axis: usize, amount: i64) -> usize {
    let mut offset = vec![0i64; lattice.dimension()];
    offset[axis] = amount;
    lattice.shifted(site, &offset)
}
