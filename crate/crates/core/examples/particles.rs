//! A particle simulation from a disordered start, printing the order.

use sohq::ibm::{run, Initial, Kernel, Representation, SimConfig};

fn main() {
    let config = SimConfig {
        n_particles: 400,
        v0: 1.0,
        nu: 1.0,
        diffusion: 0.2,
        kernel: Kernel::Smooth { radius: 1.0 },
        dt: 0.02,
        t_end: 20.0,
        domain: [4.0; 3],
        seed: 3,
        representation: Representation::Quaternion,
        initial: Initial::Uniform,
    };
    let sim = run(config, 100, |s| {
        let o = s.observables();
        println!("t = {:>5.1}: order {:.4}, polar speed {:.4}, energy {:+.4}", o.time, o.nematic_order, o.polar_speed, o.energy);
        Ok(())
    })
    .unwrap();
    println!("degenerate averages: {}", sim.degenerate_count);
}
