//! Quaternion algebra and the double cover of SO(3).

use sohq::linalg::Vec3;
use sohq::quat::{Quat, UnitQuat};

fn main() {
    let q = UnitQuat::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), std::f64::consts::FRAC_PI_2).unwrap();
    let r = Quat::new(0.8, 0.1, -0.4, 0.3).normalize().unwrap();

    println!("q        = {:?}", q.quat().to_array());
    println!("q e1     = {:?}", q.rotate(Vec3::unit(0)).0);
    println!("Phi(q)   = {:?}", q.to_matrix().0);
    println!("Phi(-q) == Phi(q): {}", (-q).to_matrix().max_abs_diff(&q.to_matrix()) < 1e-15);

    let (a, b) = (q.to_matrix(), r.to_matrix());
    println!("Phi(qr) - Phi(q)Phi(r): {:.1e}", (q * r).to_matrix().max_abs_diff(&(a * b)));
    println!("A.B / 2 = {:.12}, (q.r)^2 - 1/4 = {:.12}", 0.5 * a.half_dot(&b), q.dot(r).powi(2) - 0.25);

    let (axis, theta) = r.to_axis_angle();
    println!("r: axis {:?}, angle {theta:.6}", axis.0);
}
