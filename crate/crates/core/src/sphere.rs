//! Direction nets on the unit sphere with quadrature weights.

use crate::linalg::Vector;
use std::f64::consts::PI;

/// Unit directions with weights summing to the area of `S^{d-1}` (counting measure on `S^0`).
#[derive(Debug, Clone)]
pub struct DirectionNet {
    pub dim: usize,
    pub dirs: Vec<Vector>,
    pub weights: Vec<f64>,
}

impl DirectionNet {
    /// Uniform angles in 2D, Fibonacci sphere in 3D, `{+1, -1}` in 1D.
    pub fn new(dim: usize, n: usize) -> Self {
        match dim {
            1 => Self::s0(),
            2 => Self::circle(n, 0.0),
            3 => Self::fibonacci(n),
            _ => panic!("direction nets are implemented for d <= 3"),
        }
    }

    pub fn s0() -> Self {
        DirectionNet {
            dim: 1,
            dirs: vec![Vector::from_element(1, 1.0), Vector::from_element(1, -1.0)],
            weights: vec![1.0, 1.0],
        }
    }

    /// `n` equally spaced angles starting at `phase`, in counterclockwise order.
    pub fn circle(n: usize, phase: f64) -> Self {
        let h = 2.0 * PI / n as f64;
        let dirs = (0..n)
            .map(|k| {
                let t = phase + h * k as f64;
                Vector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect();
        DirectionNet { dim: 2, dirs, weights: vec![h; n] }
    }

    pub fn fibonacci(n: usize) -> Self {
        let golden = PI * (3.0 - 5f64.sqrt());
        let dirs = (0..n)
            .map(|k| {
                let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let t = golden * k as f64;
                Vector::from_vec(vec![r * t.cos(), r * t.sin(), z])
            })
            .collect();
        DirectionNet { dim: 3, dirs, weights: vec![4.0 * PI / n as f64; n] }
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_sphere_area() {
        let c = DirectionNet::circle(100, 0.3);
        assert!((c.weights.iter().sum::<f64>() - 2.0 * PI).abs() < 1e-12);
        let f = DirectionNet::fibonacci(500);
        assert!((f.weights.iter().sum::<f64>() - 4.0 * PI).abs() < 1e-12);
        assert!(f.dirs.iter().all(|u| (u.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn fibonacci_integrates_z_squared() {
        let f = DirectionNet::fibonacci(4096);
        let q: f64 = f.dirs.iter().zip(&f.weights).map(|(u, w)| w * u[2] * u[2]).sum();
        assert!((q - 4.0 * PI / 3.0).abs() < 1e-5);
    }
}
