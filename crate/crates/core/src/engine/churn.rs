//! Join/leave process driven by the mobility factor.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChurnModel {
    mobility_factor: f64,
    scan_interval: f64,
}

impl ChurnModel {
    pub fn new(mobility_factor: f64, scan_interval: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mobility_factor) {
            return Err(Error::Config(format!(
                "mobility factor {mobility_factor} outside [0, 1]"
            )));
        }
        if !(scan_interval.is_finite() && scan_interval > 0.0) {
            return Err(Error::Config("scan interval must be > 0".into()));
        }
        Ok(Self {
            mobility_factor,
            scan_interval,
        })
    }

    pub fn mobility_factor(&self) -> f64 {
        self.mobility_factor
    }

    pub fn scan_interval(&self) -> f64 {
        self.scan_interval
    }

    pub fn is_active(&self) -> bool {
        self.mobility_factor > 0.0
    }

    /// Half of the mobility factor leaves, half joins, per scan.
    pub fn per_scan_probability(&self) -> f64 {
        self.mobility_factor / 2.0
    }

    pub fn leaves<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        rng.random_bool(self.per_scan_probability())
    }

    pub fn joins<R: Rng + ?Sized>(&self, rng: &mut R, population_target: usize) -> u64 {
        let p = self.per_scan_probability();
        if p == 0.0 || population_target == 0 {
            return 0;
        }
        Binomial::new(population_target as u64, p)
            .expect("p checked in constructor")
            .sample(rng)
    }
}
