//! Configurations and piecewise-linear paths in configuration space.

use serde::{Deserialize, Serialize};

/// A point in d-dimensional configuration space: point-robot coordinates or
/// joint angles in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Config(pub Vec<f64>);

impl Config {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn distance(&self, other: &Config) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn lerp(&self, other: &Config, t: f64) -> Config {
        Config(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + t * (b - a))
                .collect(),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl std::ops::Deref for Config {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Config {
    fn from(v: Vec<f64>) -> Self {
        Config(v)
    }
}

/// An ordered waypoint sequence. Cost is the summed Euclidean length in
/// configuration space, which satisfies the triangle inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<Config>,
}

impl Path {
    pub fn new(waypoints: Vec<Config>) -> Self {
        Path { waypoints }
    }

    pub fn length(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| w[0].distance(&w[1]))
            .sum()
    }

    pub fn first(&self) -> &Config {
        &self.waypoints[0]
    }

    pub fn last(&self) -> &Config {
        self.waypoints.last().expect("path has at least one waypoint")
    }

    /// Resample to exactly `n` waypoints (n >= 2) equally spaced by
    /// arclength. The first and last waypoints are cloned bit-exactly so that
    /// endpoint pinning survives resampling; interior waypoints lie on the
    /// original polyline.
    pub fn resample(&self, n: usize) -> Path {
        assert!(n >= 2, "resample needs at least two waypoints");
        let total = self.length();
        if self.waypoints.len() < 2 || total <= 0.0 {
            let first = self.first().clone();
            let mut waypoints = vec![first; n];
            *waypoints.last_mut().unwrap() = self.last().clone();
            return Path { waypoints };
        }

        let mut cumulative = Vec::with_capacity(self.waypoints.len());
        cumulative.push(0.0);
        for w in self.waypoints.windows(2) {
            let last = *cumulative.last().unwrap();
            cumulative.push(last + w[0].distance(&w[1]));
        }

        let mut out = Vec::with_capacity(n);
        out.push(self.first().clone());
        let mut seg = 0usize;
        for k in 1..n - 1 {
            let target = total * k as f64 / (n - 1) as f64;
            while seg + 2 < cumulative.len() && cumulative[seg + 1] < target {
                seg += 1;
            }
            let span = cumulative[seg + 1] - cumulative[seg];
            let t = if span > 0.0 {
                (target - cumulative[seg]) / span
            } else {
                0.0
            };
            out.push(self.waypoints[seg].lerp(&self.waypoints[seg + 1], t));
        }
        out.push(self.last().clone());
        Path { waypoints: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn cfg(v: &[f64]) -> Config {
        Config(v.to_vec())
    }

    #[test]
    fn length_examples() {
        let p = Path::new(vec![cfg(&[0.0, 0.0]), cfg(&[3.0, 4.0])]);
        assert_relative_eq!(p.length(), 5.0);
        let p = Path::new(vec![cfg(&[0.0, 0.0]), cfg(&[1.0, 0.0]), cfg(&[1.0, 1.0])]);
        assert_relative_eq!(p.length(), 2.0);
    }

    #[test]
    fn length_satisfies_triangle_inequality() {
        let mut rng = crate::rng::stream_rng(11, 9);
        for _ in 0..200 {
            let rnd = |rng: &mut rand_chacha::ChaCha8Rng| {
                cfg(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            };
            let a = rnd(&mut rng);
            let m = rnd(&mut rng);
            let b = rnd(&mut rng);
            let direct = Path::new(vec![a.clone(), b.clone()]).length();
            let via = Path::new(vec![a, m, b]).length();
            assert!(direct <= via + 1e-12);
        }
    }

    #[test]
    fn resample_pins_endpoints_bit_exactly() {
        let p = Path::new(vec![
            cfg(&[0.1 + 0.2, 0.0]), // deliberately not representable exactly
            cfg(&[0.7, 0.3]),
            cfg(&[1.0, 1.0]),
        ]);
        let r = p.resample(20);
        assert_eq!(r.waypoints.len(), 20);
        assert_eq!(r.first().0, p.first().0);
        assert_eq!(r.last().0, p.last().0);
        // resampling is arclength-preserving for polylines up to interior
        // corner cutting, so length can only shrink
        assert!(r.length() <= p.length() + 1e-12);
    }

    #[test]
    fn resample_handles_degenerate_paths() {
        let p = Path::new(vec![cfg(&[0.5, 0.5]), cfg(&[0.5, 0.5])]);
        let r = p.resample(5);
        assert_eq!(r.waypoints.len(), 5);
        assert_relative_eq!(r.length(), 0.0);
    }

    #[test]
    fn resample_spacing_is_uniform() {
        let p = Path::new(vec![cfg(&[0.0, 0.0]), cfg(&[1.0, 0.0]), cfg(&[1.0, 2.0])]);
        let r = p.resample(31);
        let total = r.length();
        for w in r.waypoints.windows(2) {
            assert_relative_eq!(w[0].distance(&w[1]), total / 30.0, epsilon = 1e-9);
        }
    }
}
