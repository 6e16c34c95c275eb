use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};

use crate::config::ArrivalModel;
use crate::error::{Error, Result};

/// Draws the arrival timestamps of one UE for one frame.
///
/// Returns `frame_packets` non-decreasing times, each `>= frame_start`.
pub fn sample_frame_arrivals<R: Rng + ?Sized>(
    rng: &mut R,
    model: ArrivalModel,
    lambda: f64,
    frame_packets: usize,
    frame_start: f64,
) -> Result<Vec<f64>> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::config(format!("arrival parameter must be finite and > 0, got {lambda}")));
    }
    let mut t = frame_start;
    let mut out = Vec::with_capacity(frame_packets);
    match model {
        ArrivalModel::PoissonGap => {
            let gap = Poisson::new(lambda).map_err(|e| Error::config(e.to_string()))?;
            for _ in 0..frame_packets {
                t += gap.sample(rng);
                out.push(t);
            }
        }
        ArrivalModel::ExponentialRate => {
            let gap = Exp::new(lambda).map_err(|e| Error::config(e.to_string()))?;
            for _ in 0..frame_packets {
                t += gap.sample(rng);
                out.push(t);
            }
        }
    }
    Ok(out)
}

/// One exponential service draw with mean `mu_s`, strictly positive.
pub fn sample_service<R: Rng + ?Sized>(rng: &mut R, mu_s: f64) -> f64 {
    let exp = Exp::new(1.0 / mu_s).expect("mu_s validated positive");
    loop {
        let t = exp.sample(rng);
        if t > 0.0 {
            return t;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    #[test]
    fn zero_packets() {
        let v = sample_frame_arrivals(&mut seeded_rng(1), ArrivalModel::PoissonGap, 3.0, 0, 10.0).unwrap();
        assert!(v.is_empty());
    }

    #[test]
    fn reproducible_and_sorted() {
        for model in [ArrivalModel::PoissonGap, ArrivalModel::ExponentialRate] {
            let a = sample_frame_arrivals(&mut seeded_rng(5), model, 3.0, 500, 42.0).unwrap();
            let b = sample_frame_arrivals(&mut seeded_rng(5), model, 3.0, 500, 42.0).unwrap();
            assert_eq!(a.len(), 500);
            assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
            assert!(a[0] >= 42.0);
            assert!(a.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn poisson_gap_mean() {
        let n = 100_000;
        let v = sample_frame_arrivals(&mut seeded_rng(9), ArrivalModel::PoissonGap, 3.0, n, 0.0).unwrap();
        let mean_gap = v[n - 1] / n as f64;
        assert!((2.97..=3.03).contains(&mean_gap), "{mean_gap}");
    }

    #[test]
    fn exponential_rate_mean() {
        let n = 100_000;
        let v = sample_frame_arrivals(&mut seeded_rng(9), ArrivalModel::ExponentialRate, 4.0, n, 0.0).unwrap();
        let mean_gap = v[n - 1] / n as f64;
        assert!((mean_gap - 0.25).abs() < 0.0025, "{mean_gap}");
    }

    #[test]
    fn bad_lambda() {
        for l in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            let r = sample_frame_arrivals(&mut seeded_rng(1), ArrivalModel::PoissonGap, l, 3, 0.0);
            assert!(matches!(r, Err(Error::Config(_))));
        }
    }

    #[test]
    fn service_mean_and_support() {
        let mut rng = seeded_rng(21);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_service(&mut rng, 1.0)).collect();
        assert!(draws.iter().all(|&t| t > 0.0));
        let mean = draws.iter().sum::<f64>() / n as f64;
        assert!((0.99..=1.01).contains(&mean), "{mean}");
    }

    #[test]
    fn service_reproducible() {
        assert_eq!(sample_service(&mut seeded_rng(4), 2.0).to_bits(), sample_service(&mut seeded_rng(4), 2.0).to_bits());
    }
}
