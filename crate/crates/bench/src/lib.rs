//! Fixtures shared by the benchmarks.

use hdt_core::{hermitian_eig, CouplingSpec, HamiltonianSet, Monitor, ProtocolConfig, Spectral, Variant};

pub struct Instance {
    pub hs: HamiltonianSet,
    pub spectral: Spectral,
    pub spec: CouplingSpec,
}

pub fn instance(variant: Variant, n_s: usize, n_b: usize) -> Instance {
    let spec = CouplingSpec::with_defaults(variant, n_s, n_b);
    let hs = HamiltonianSet::build(&spec).expect("default couplings build");
    let spectral = hermitian_eig(hs.h()).expect("Hermitian by construction");
    Instance { hs, spectral, spec }
}

impl Instance {
    pub fn protocol(&self, total_time: f64, n: usize) -> ProtocolConfig {
        ProtocolConfig::new(total_time, n, self.spec.partition().expect("valid sizes")).expect("valid protocol")
    }

    pub fn monitor(&self, cfg: &ProtocolConfig) -> Monitor {
        Monitor::new(&self.spectral, cfg).expect("matching partition")
    }
}
