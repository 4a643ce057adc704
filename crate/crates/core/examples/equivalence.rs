//! Quaternion and rotation-matrix particle runs compared in law.

use sohq::ibm::equivalence::{equivalence_in_law, EquivalenceConfig};
use sohq::ibm::{Initial, Kernel, Representation, SimConfig};
use sohq::quat::UnitQuat;

fn main() {
    let cfg = EquivalenceConfig {
        sim: SimConfig {
            n_particles: 128,
            v0: 1.0,
            nu: 1.0,
            diffusion: 1.0,
            kernel: Kernel::Indicator { radius: 10.0 },
            dt: 0.01,
            t_end: 20.0,
            domain: [1.0; 3],
            seed: 0,
            representation: Representation::Quaternion,
            initial: Initial::Aligned { q: UnitQuat::IDENTITY },
        },
        n_seeds: 4,
        burn_in: 5.0,
        sample_every: 1.0,
    };
    let report = equivalence_in_law(&cfg).unwrap();
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
}
