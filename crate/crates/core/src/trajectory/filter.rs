//! [Alpha beta filter] smoothing for drawn paths.
//!
//! [Alpha beta filter]: https://en.wikipedia.org/wiki/Alpha_beta_filter

use super::{PathError, PixelSample};
use crate::scalar::Scalar;

/// Velocity gain of the critically damped alpha-beta family for position gain `alpha`.
pub fn critically_damped_beta<T: Scalar>(alpha: T) -> T {
    alpha * alpha / (T::lit(2.0) - alpha)
}

/// Two-state (position, velocity) fixed-gain tracker over one coordinate.
#[derive(Debug, Clone, Copy)]
pub struct AlphaBetaTracker<T> {
    alpha: T,
    beta: T,
    x: Option<T>,
    v: T,
}

impl<T: Scalar> AlphaBetaTracker<T> {
    pub fn new(alpha: T, beta: T) -> Self {
        Self { alpha, beta, x: None, v: T::zero() }
    }

    pub fn critically_damped(alpha: T) -> Self {
        Self::new(alpha, critically_damped_beta(alpha))
    }

    pub fn update(&mut self, z: T, dt: T) -> T {
        match self.x {
            None => {
                self.x = Some(z);
                z
            }
            Some(x) => {
                if dt <= T::zero() {
                    // repeated timestamp: correct position only
                    let r = z - x;
                    let nx = z - (T::one() - self.alpha) * r;
                    self.x = Some(nx);
                    return nx;
                }
                let predicted = x + self.v * dt;
                let r = z - predicted;
                // exact at alpha = 1 and at r = 0
                let nx = z - (T::one() - self.alpha) * r;
                self.v += self.beta * r / dt;
                self.x = Some(nx);
                nx
            }
        }
    }
}

/// Filters both screen coordinates with critically damped trackers of position gain `alpha`.
pub fn smooth<T: Scalar>(raw: &[PixelSample<T>], alpha: T) -> Result<Vec<PixelSample<T>>, PathError> {
    if raw.is_empty() {
        return Err(PathError::Empty);
    }
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(PathError::InvalidParameter("alpha must lie in (0, 1]"));
    }
    let mut fx = AlphaBetaTracker::critically_damped(alpha);
    let mut fy = AlphaBetaTracker::critically_damped(alpha);
    let mut prev_t = raw[0].t;
    Ok(raw
        .iter()
        .map(|s| {
            let dt = s.t - prev_t;
            prev_t = s.t;
            PixelSample::new(fx.update(s.x, dt), fy.update(s.y, dt), s.t)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn line_samples(n: usize) -> Vec<PixelSample<f64>> {
        (0..n).map(|i| PixelSample::new(100.0 + 2.0 * i as f64, 300.0 - 1.0 * i as f64, i as f64 / 30.0)).collect()
    }

    #[test]
    fn constant_path_is_fixed_point() {
        let raw = vec![PixelSample::new(12.5, 7.25, 0.0); 1]
            .into_iter()
            .chain((1..50).map(|i| PixelSample::new(12.5, 7.25, i as f64 * 0.03)))
            .collect::<Vec<_>>();
        let out = smooth(&raw, 0.7).unwrap();
        assert_eq!(out, raw);
    }

    #[test]
    fn unit_alpha_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let noise = Normal::new(0.0, 5.0).unwrap();
        let raw: Vec<_> = line_samples(80)
            .into_iter()
            .map(|s| PixelSample::new(s.x + noise.sample(&mut rng), s.y + noise.sample(&mut rng), s.t))
            .collect();
        assert_eq!(smooth(&raw, 1.0).unwrap(), raw);
    }

    #[test]
    fn length_and_timestamps_preserved() {
        let raw = line_samples(33);
        let out = smooth(&raw, 0.7).unwrap();
        assert_eq!(out.len(), raw.len());
        assert!(out.iter().zip(&raw).all(|(a, b)| a.t == b.t));
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(smooth::<f64>(&[], 0.7), Err(PathError::Empty)));
        assert!(smooth(&line_samples(3), 0.0).is_err());
        assert!(smooth(&line_samples(3), 1.5).is_err());
    }

    #[test]
    fn beta_follows_alpha() {
        assert!((critically_damped_beta(0.7f64) - 0.49 / 1.3).abs() < 1e-15);
        assert_eq!(critically_damped_beta(1.0f64), 1.0);
    }

    #[test]
    fn repeated_timestamps_do_not_blow_up() {
        let raw: Vec<PixelSample<f64>> =
            vec![PixelSample::new(0.0, 0.0, 0.0), PixelSample::new(1.0, 1.0, 0.0), PixelSample::new(2.0, 2.0, 0.1)];
        let out = smooth(&raw, 0.7).unwrap();
        assert!(out.iter().all(|s| s.x.is_finite() && s.y.is_finite()));
    }

    #[test]
    fn f32_smoothing() {
        let raw: Vec<PixelSample<f32>> = (0..10).map(|i| PixelSample::new(i as f32, 0.0, i as f32 * 0.1)).collect();
        assert_eq!(smooth(&raw, 1.0f32).unwrap(), raw);
    }
}
