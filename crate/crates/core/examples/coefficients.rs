//! Coefficients of the macroscopic equations as functions of the noise ratio.

use sohq::coeffs::compute;
use sohq::equilibria::NoiseRatio;
use sohq::gci::solve_h;

fn main() {
    println!("{:>6} {:>10} {:>10} {:>8} {:>10} {:>10} {:>10}", "d", "c1", "c2", "c3", "c4", "ct2", "ct4");
    for d in [0.1, 0.2, 0.5, 1.0, 2.0, 5.0] {
        let d = NoiseRatio::new(d).unwrap();
        let c = compute(d, &solve_h(d, 256).unwrap()).unwrap();
        println!("{:>6} {:>10.6} {:>10.6} {:>8.4} {:>10.6} {:>10.6} {:>10.6}", d.get(), c.c1, c.c2, c.c3, c.c4, c.ct2, c.ct4);
    }
}
