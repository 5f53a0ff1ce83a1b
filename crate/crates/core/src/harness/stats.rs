use serde::Serialize;

/// Mean with its spread over `n` independent trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub n: usize,
    pub mean: f64,
    pub stddev: f64,
    pub stderr: f64,
}

impl Stat {
    /// Sample statistics, accumulated left to right so equal inputs give
    /// equal bits.
    pub fn from_samples(xs: &[f64]) -> Stat {
        let n = xs.len();
        if n == 0 {
            return Stat { n, mean: f64::NAN, stddev: f64::NAN, stderr: f64::NAN };
        }
        let mean = xs.iter().fold(0.0, |a, x| a + x) / n as f64;
        let var = if n > 1 { xs.iter().fold(0.0, |a, x| a + (x - mean) * (x - mean)) / (n - 1) as f64 } else { 0.0 };
        let stddev = var.sqrt();
        Stat { n, mean, stddev, stderr: stddev / (n as f64).sqrt() }
    }

    /// Ratio of means `mean(num) / mean(den)` over paired samples, with a
    /// delta-method standard error. `stddev` is the spread of the linearized
    /// residuals `num - R den`, scaled by `mean(den)`.
    pub fn ratio_of_means(num: &[f64], den: &[f64]) -> Stat {
        assert_eq!(num.len(), den.len());
        let n = num.len();
        let num_mean = Stat::from_samples(num).mean;
        let den_mean = Stat::from_samples(den).mean;
        if den_mean == 0.0 {
            let mean = if num_mean == 0.0 { 1.0 } else { f64::INFINITY };
            return Stat { n, mean, stddev: 0.0, stderr: 0.0 };
        }
        let r = num_mean / den_mean;
        let resid: Vec<f64> = num.iter().zip(den).map(|(y, x)| y - r * x).collect();
        let s = Stat::from_samples(&resid);
        Stat { n, mean: r, stddev: s.stddev / den_mean, stderr: s.stderr / den_mean }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_stats() {
        let s = Stat::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.stddev - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.stderr - s.stddev / 2.0).abs() < 1e-15);
        assert_eq!(Stat::from_samples(&[7.0]).stddev, 0.0);
    }

    #[test]
    fn ratio_of_proportional_samples_is_exact() {
        let den = [2.0, 4.0, 6.0];
        let num = [1.0, 2.0, 3.0];
        let r = Stat::ratio_of_means(&num, &den);
        assert_eq!(r.mean, 0.5);
        assert_eq!(r.stderr, 0.0);
        assert_eq!(Stat::ratio_of_means(&[0.0], &[0.0]).mean, 1.0);
    }
}
