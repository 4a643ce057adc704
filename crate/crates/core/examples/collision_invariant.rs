//! Solving for the generalized collision invariant profile.

use sohq::equilibria::NoiseRatio;
use sohq::gci::solve_h;

fn main() {
    let d = NoiseRatio::new(1.0).unwrap();
    let table = solve_h(d, 256).unwrap();
    println!("nodes: {}, max residual: {:.2e}", table.n_nodes(), table.residual_max);
    for r in [0.1, 0.25, 0.5, 0.75, 1.0] {
        let (h, dh) = table.eval(r);
        println!("r = {r:.2}: h = {h:+.8}, h' = {dh:+.8}");
    }
    for theta in [0.5, 1.0, 2.0, 3.0] {
        println!("theta = {theta:.1}: k = {:+.8}", table.k(theta));
    }
}
