//! Large-scale path loss, Rician small-scale fading, and user mobility.
//!
//! A channel coefficient is `h = sqrt(beta) * g` where `beta` is the
//! distance-dependent large-scale gain and `g` is a unit-mean-power Rician
//! fade. Users live on a ground plane inside a rectangle centered at the
//! origin; the console antenna sits `height` meters above that plane and
//! users drift with a clipped per-axis random walk between slots.

use num_complex::Complex64;
use rand::Rng;

/// Large-scale and small-scale fading parameters shared by all links.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingParams {
    /// Reference large-scale gain at 1 m (linear).
    pub beta0: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Rician K-factor (linear, not dB).
    pub rice_k: f64,
    /// Deterministic line-of-sight component, unit magnitude.
    pub los: Complex64,
}

impl FadingParams {
    pub fn new(beta0: f64, alpha: f64, rice_k: f64, los: Complex64) -> Self {
        assert!(beta0 > 0.0, "beta0 must be positive, got {beta0}");
        assert!(alpha >= 0.0, "alpha must be non-negative, got {alpha}");
        assert!(rice_k >= 0.0, "rice_k must be non-negative, got {rice_k}");
        assert!(
            (los.norm() - 1.0).abs() < 1e-12,
            "LOS component must have unit magnitude, got |los| = {}",
            los.norm()
        );
        Self { beta0, alpha, rice_k, los }
    }
}

impl Default for FadingParams {
    fn default() -> Self {
        Self::new(1e-3, 2.0, 3.0, Complex64::new(1.0, 0.0))
    }
}

/// Ground-plane layout of the users and the console for one episode.
///
/// Coordinates live in `[-area_x/2, area_x/2] x [-area_y/2, area_y/2]`.
/// The console position is fixed within an episode; users random-walk.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    /// Per-user ground positions in meters.
    pub positions: Vec<[f64; 2]>,
    /// Console ground position in meters.
    pub console: [f64; 2],
    /// Vertical separation between the user plane and the console antenna.
    pub height: f64,
    /// Full side lengths of the walk region in meters.
    pub area: [f64; 2],
}

impl Topology {
    /// Draws user and console positions uniformly over the area.
    pub fn sample<R: Rng>(
        num_users: usize,
        area: [f64; 2],
        height: f64,
        rng: &mut R,
    ) -> Self {
        assert!(area[0] > 0.0 && area[1] > 0.0, "area sides must be positive");
        assert!(height >= 0.0, "height must be non-negative");
        let draw = |rng: &mut R| {
            [
                rng.gen_range(-area[0] / 2.0..=area[0] / 2.0),
                rng.gen_range(-area[1] / 2.0..=area[1] / 2.0),
            ]
        };
        let positions = (0..num_users).map(|_| draw(rng)).collect();
        let console = draw(rng);
        Self { positions, console, height, area }
    }

    /// 3-D distance from user `n` to the console antenna.
    pub fn distance_to_console(&self, n: usize) -> f64 {
        distance(self.positions[n], self.console, self.height)
    }

    /// Perturbs every user by an independent uniform offset in
    /// `[-step, +step]` per axis, then clips back into the area.
    pub fn random_walk<R: Rng>(&mut self, step: f64, rng: &mut R) {
        assert!(step >= 0.0, "walk step must be non-negative");
        if step == 0.0 {
            return;
        }
        let half = [self.area[0] / 2.0, self.area[1] / 2.0];
        for pos in &mut self.positions {
            for axis in 0..2 {
                let moved = pos[axis] + rng.gen_range(-step..=step);
                pos[axis] = moved.clamp(-half[axis], half[axis]);
            }
        }
    }
}

/// Euclidean 3-D distance between a user at `xu` and the console at `mc`,
/// with `height` meters of vertical separation.
pub fn distance(xu: [f64; 2], mc: [f64; 2], height: f64) -> f64 {
    assert!(height >= 0.0, "height must be non-negative");
    let dx = xu[0] - mc[0];
    let dy = xu[1] - mc[1];
    (dx * dx + dy * dy + height * height).sqrt()
}

/// Large-scale gain `beta = beta0 * d^(-alpha)`.
pub fn path_gain(dist: f64, params: &FadingParams) -> f64 {
    assert!(dist > 0.0, "path gain undefined at zero distance");
    params.beta0 * dist.powf(-params.alpha)
}

/// One Rician small-scale fade with unit mean power:
/// `g = sqrt(K/(K+1)) * los + sqrt(1/(K+1)) * g_sc`, `g_sc ~ CN(0, 1)`.
pub fn sample_small_scale<R: Rng>(params: &FadingParams, rng: &mut R) -> Complex64 {
    let k = params.rice_k;
    let scatter = complex_normal(rng);
    params.los * (k / (k + 1.0)).sqrt() + scatter * (1.0 / (k + 1.0)).sqrt()
}

/// Standard circularly-symmetric complex normal draw, `CN(0, 1)`:
/// real and imaginary parts are independent `N(0, 1/2)`.
pub fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    // Box-Muller on two uniforms; u1 is kept away from 0 for the log.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let radius = (-2.0 * u1.ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(radius * angle.cos(), radius * angle.sin()) * 0.5_f64.sqrt()
}

/// Full channel coefficient `h = sqrt(beta) * g`.
pub fn channel_coeff(beta: f64, g: Complex64) -> Complex64 {
    assert!(beta >= 0.0, "large-scale gain must be non-negative");
    g * beta.sqrt()
}

/// Received power gain `|h|^2`.
pub fn power_gain(h: Complex64) -> f64 {
    h.norm_sqr()
}
