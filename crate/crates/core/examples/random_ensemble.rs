//! Landmarks of random-hopping chains: where the exceptional point, the
//! zero eigenvalue and the current maximum fall, per sample and on average.
//!
//! cargo run --release --example random_ensemble -- 9 40

use bethe_pt::random::{analyze_sample, ensemble_landmarks, RandomChainSpec, Sampling};

fn main() -> bethe_pt::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(9, |s| s.parse().unwrap());
    let samples: usize = args.next().map_or(40, |s| s.parse().unwrap());
    let spec = RandomChainSpec::new(2.0, 0.1, n, 20240611)?;

    let s = analyze_sample(&spec, 0)?;
    println!(
        "sample 0, delta 0.1: EP at {:.9} (E = {:.4}i), zero at {:?}, max current {:.6} at {:.6}",
        s.gamma_ep, s.ep_energy.im, s.gamma_zero, s.max_j, s.gamma_max_j
    );

    let spec = spec.with_sampling(Sampling::Antithetic);
    let stats = ensemble_landmarks(&spec, samples, &[0.05, 0.1, 0.15, 0.2])?;
    println!("\ndelta  EP mean (std)        max-current mean (std)   failures");
    for d in &stats.per_delta {
        println!(
            "{:<6} {:.5} ({:.5})      {:.5} ({:.5})          {}",
            d.delta, d.gamma_ep.mean, d.gamma_ep.std, d.gamma_max_j.mean, d.gamma_max_j.std, d.failures
        );
    }
    Ok(())
}
