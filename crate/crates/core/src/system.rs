use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::lindblad::{build_liouvillian, steady_state, Liouvillian};
use crate::qubit::{BathSpec, DensityMatrix, MonitorConfig, QubitParams, Rates};

/// Full physical setup: qubit, the rates of each bath, and the monitor.
#[derive(Clone, Debug, PartialEq)]
pub struct System {
    pub qubit: QubitParams,
    pub monitor: MonitorConfig,
    baths: Vec<Rates>,
}

impl System {
    /// Treats the given total rates as one effective bath.
    pub fn from_rates(qubit: QubitParams, rates: Rates, monitor: MonitorConfig) -> Self {
        System {
            qubit,
            monitor,
            baths: vec![rates],
        }
    }

    pub fn from_baths(qubit: QubitParams, spec: &BathSpec, monitor: MonitorConfig) -> Self {
        System {
            qubit,
            monitor,
            baths: spec.per_bath_rates(&qubit),
        }
    }

    /// Per-bath rates, in the order the baths were given.
    pub fn bath_rates(&self) -> &[Rates] {
        &self.baths
    }

    pub fn rates(&self) -> Rates {
        self.baths.iter().fold(Rates::default(), |acc, r| acc + *r)
    }

    pub fn with_monitor(&self, monitor: MonitorConfig) -> Self {
        System {
            monitor,
            ..self.clone()
        }
    }

    pub fn liouvillian(&self) -> Liouvillian {
        build_liouvillian(&self.qubit, &self.rates(), &self.monitor)
    }

    pub fn steady_state(&self) -> Result<DensityMatrix> {
        steady_state(&self.liouvillian())
    }
}

