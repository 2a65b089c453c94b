//! Deterministic maximization helpers: coarse grids with compass-search
//! refinement. Evaluation order is fixed, and ties keep the earliest
//! candidate, so results do not depend on scheduling.

/// Maximizes `f` over the unit sphere parameterized by polar/azimuthal
/// angles: a `n_theta × n_phi` coarse grid followed by [`refine_max`].
/// Returns (value, theta, phi).
pub fn sphere_max<F: Fn(f64, f64) -> f64>(f: F, n_theta: usize, n_phi: usize) -> (f64, f64, f64) {
    let pi = std::f64::consts::PI;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..=n_theta {
        let theta = pi * i as f64 / n_theta as f64;
        for j in 0..n_phi {
            let phi = 2.0 * pi * j as f64 / n_phi as f64;
            let v = f(theta, phi);
            if v > best.0 {
                best = (v, theta, phi);
            }
        }
    }
    let step = pi / n_theta as f64;
    refine_max(f, best, step)
}

/// Compass-search refinement of a 2-parameter maximum: step in the four
/// axis directions, keep strict improvements, halve the step otherwise.
/// The step floor of 1e-9 rad leaves the value converged far below 1e-12
/// for smooth maxima.
pub fn refine_max<F: Fn(f64, f64) -> f64>(
    f: F,
    start: (f64, f64, f64),
    step0: f64,
) -> (f64, f64, f64) {
    let (mut val, mut x, mut y) = start;
    let mut step = step0;
    while step > 1e-9 {
        let mut moved = false;
        for (dx, dy) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let v = f(x + dx, y + dy);
            if v > val {
                val = v;
                x += dx;
                y += dy;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (val, x, y)
}

/// Compass-search refinement in four parameters, used by the CHSH
/// optimization.
pub fn refine_max4<F: Fn([f64; 4]) -> f64>(f: F, start: (f64, [f64; 4]), step0: f64) -> (f64, [f64; 4]) {
    let (mut val, mut x) = start;
    let mut step = step0;
    while step > 1e-9 {
        let mut moved = false;
        for axis in 0..4 {
            for sign in [1.0, -1.0] {
                let mut trial = x;
                trial[axis] += sign * step;
                let v = f(trial);
                if v > val {
                    val = v;
                    x = trial;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (val, x)
}

/// Unit vector from polar/azimuthal angles, with the polar axis along the
/// first Stokes/Bloch component.
pub fn unit_vector(theta: f64, phi: f64) -> [f64; 3] {
    [theta.cos(), theta.sin() * phi.cos(), theta.sin() * phi.sin()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_max_finds_dot_product_maximum() {
        let target = [0.6, -0.64, 0.48];
        let (val, theta, phi) = sphere_max(
            |t, p| {
                let n = unit_vector(t, p);
                n[0] * target[0] + n[1] * target[1] + n[2] * target[2]
            },
            32,
            64,
        );
        assert!((val - 1.0).abs() < 1e-12);
        let n = unit_vector(theta, phi);
        for k in 0..3 {
            assert!((n[k] - target[k]).abs() < 1e-5);
        }
    }

    #[test]
    fn refine_max4_climbs_quadratic() {
        let f = |x: [f64; 4]| -(x[0] - 0.3).powi(2) - (x[1] + 1.1).powi(2) - (x[2]).powi(2) - (x[3] - 2.0).powi(2);
        let (val, x) = refine_max4(f, (f([0.0; 4]), [0.0; 4]), 0.5);
        assert!(val > -1e-15);
        assert!((x[0] - 0.3).abs() < 1e-7);
        assert!((x[3] - 2.0).abs() < 1e-7);
    }
}
