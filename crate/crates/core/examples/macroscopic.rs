//! The one-dimensional macroscopic solver on a density bump.

use sohq::coeffs::compute;
use sohq::equilibria::NoiseRatio;
use sohq::gci::solve_h;
use sohq::quat::Quat;
use sohq::sohq_pde::{check_cfl, step, term_tables, PdeConfig, PdeInitial};

fn main() {
    let cfg = PdeConfig {
        n_cells: 256,
        dx: 0.05,
        dt: 0.01,
        t_end: 2.0,
        d: NoiseRatio::new(1.0).unwrap(),
        initial: PdeInitial::Bump { rho0: 1.0, amplitude: 0.5, width: 1.0, q: Quat::new(0.8, 0.2, 0.4, 0.4).normalize().unwrap() },
        output_every: None,
        gci_nodes: 256,
    };
    let c = compute(cfg.d, &solve_h(cfg.d, cfg.gci_nodes).unwrap()).unwrap();
    check_cfl(cfg.dt, cfg.dx, &c).unwrap();
    let mut field = cfg.initial_field().unwrap();
    let m0 = field.mass();
    for n in 0..cfg.n_steps() {
        if n % 50 == 0 {
            let peak = field.rho.iter().copied().fold(f64::MIN, f64::max);
            let e1 = field.qbar[field.len() / 2].e1();
            println!("t = {:.2}: peak rho {peak:.5}, e1 at centre {:?}", n as f64 * cfg.dt, e1.0);
        }
        step(&mut field, &c, cfg.dt).unwrap();
    }
    let defect = term_tables(&field, &c).iter().map(|t| t.max_defect()).fold(0.0, f64::max);
    println!("mass drift {:.2e}, term-table defect {defect:.2e}", (field.mass() - m0).abs() / m0);
}
