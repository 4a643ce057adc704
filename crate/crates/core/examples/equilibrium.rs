//! Sampling the nematic equilibrium and checking its order parameter.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sohq::equilibria::{i_squared, normalizer, EquilibriumDist, NoiseRatio};
use sohq::nematic::{principal, QTensor, TieBreak};
use sohq::quat::Quat;

fn main() {
    let qbar = Quat::new(0.5, 0.5, -0.5, 0.5).normalize().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for d in [0.2, 1.0, 5.0] {
        let d = NoiseRatio::new(d).unwrap();
        let dist = EquilibriumDist::new(d, qbar);
        let samples = dist.sample(50_000, &mut rng);
        let empirical = samples.iter().map(|q| q.dot(qbar).powi(2)).sum::<f64>() / samples.len() as f64;
        let mean = principal(&QTensor::build(&samples, None).unwrap(), Some(qbar), TieBreak::Reject).unwrap();
        println!(
            "d = {:>4}: Z = {:>10.4}, I^2 = {:.5}, sample mean = {:.5}, |qbar_hat . qbar| = {:.6}",
            d.get(),
            normalizer(d),
            i_squared(d),
            empirical,
            mean.qbar.dot(qbar).abs()
        );
    }
}
