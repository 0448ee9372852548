use crate::error::{invalid, Result};
use crate::grid::{smooth_cutoff, Point};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Number of samples of `Ω` on the circle for planar kernels.
pub const ANGLE_SAMPLES: usize = 256;

/// Named kernels of ρ type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedKernel {
    /// `(x_1 - y_1)/|x - y|^{n+1-α}`.
    Hilbert,
    /// `1/|x - y|^{n-α}`.
    RieszLike,
    /// `(x_1 - y_1)/|x - y|^{n+1-α} · (1 + 1/(2 + |log|x - y||))`.
    LogDini,
}

/// Smoothness modulus `ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulus {
    /// `ρ(t) = t`.
    Lipschitz,
    /// `ρ(t) = 1/(1 + log(1/t))²`.
    LogSquared,
}

impl Modulus {
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Modulus::Lipschitz => t,
            Modulus::LogSquared => {
                let t = t.min(1.0);
                1.0 / (1.0 + (1.0 / t).ln()).powi(2)
            }
        }
    }

    /// `ρ̃(t) = ρ(t) + t`.
    pub fn tilde(&self, t: f64) -> f64 {
        self.eval(t) + t
    }

    /// `∫_0^1 ρ(t) dt/t` in the variable `u = log(1/t)`, with an error when the tail does not
    /// settle.
    pub fn dini_integral(&self) -> Result<f64> {
        let g = |u: f64| match self {
            Modulus::Lipschitz => (-u).exp(),
            Modulus::LogSquared => 1.0 / (1.0 + u).powi(2),
        };
        let simpson = |a: f64, b: f64| {
            let steps = 512;
            let du = (b - a) / steps as f64;
            let mut acc = g(a) + g(b);
            for k in 1..steps {
                acc += g(a + k as f64 * du) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * du / 3.0
        };
        let mut total = simpson(0.0, 1.0);
        let mut prev_piece = f64::INFINITY;
        let mut a = 1.0;
        for _ in 0..40 {
            let piece = simpson(a, 2.0 * a);
            total += piece;
            if piece <= 1e-9 * total || (piece < prev_piece && piece <= 1e-4 * total && a >= 1e6) {
                return Ok(total);
            }
            prev_piece = piece;
            a *= 2.0;
        }
        Err(invalid("modulus fails the Dini condition"))
    }
}

/// JSON form of a kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum KernelDescriptor {
    /// `Ω(x'/|x'|)/|x|^{n-α}`; `omega` is `[Ω(+1), Ω(-1)]` on the line or 256 equally spaced
    /// angles on the circle.
    Homogeneous {
        #[serde(default)]
        alpha: f64,
        omega: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
    },
    RhoType {
        name: NamedKernel,
        #[serde(default)]
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
enum Form {
    Homogeneous(Vec<f64>),
    Named(NamedKernel),
}

/// Validated kernel on a grid of fixed dimension, optionally truncated near the diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    dim: usize,
    alpha: f64,
    form: Form,
    delta: Option<f64>,
    exponent: f64,
}

impl KernelSpec {
    pub fn homogeneous(dim: usize, alpha: f64, omega: Vec<f64>) -> Result<Self> {
        check_alpha(dim, alpha)?;
        let expected = if dim == 1 { 2 } else { ANGLE_SAMPLES };
        if omega.len() != expected {
            return Err(invalid(format!("Ω table needs {expected} values in dimension {dim}, got {}", omega.len())));
        }
        if omega.iter().any(|v| !v.is_finite()) {
            return Err(invalid("Ω table has non-finite entries"));
        }
        let mut omega = omega;
        if alpha == 0.0 {
            let mean = omega.iter().sum::<f64>() / omega.len() as f64;
            if dim == 2 && mean.abs() < 1e-6 {
                omega.iter_mut().for_each(|v| *v -= mean);
            } else if mean.abs() > 1e-10 {
                return Err(invalid(format!("Ω has mean {mean:e}; α = 0 needs mean zero")));
            }
        }
        Ok(Self { dim, alpha, form: Form::Homogeneous(omega), delta: None, exponent: dim as f64 - alpha })
    }

    /// Homogeneous kernel with `Ω` sampled from a function of the angle.
    pub fn homogeneous_from_fn(dim: usize, alpha: f64, omega: impl Fn(f64) -> f64) -> Result<Self> {
        let table = if dim == 1 {
            vec![omega(0.0), omega(std::f64::consts::PI)]
        } else {
            (0..ANGLE_SAMPLES).map(|k| omega(TAU * k as f64 / ANGLE_SAMPLES as f64)).collect()
        };
        Self::homogeneous(dim, alpha, table)
    }

    /// The odd kernel `Ω(±1) = ±1` on the line, `1/(x - y)` when `α = 0`.
    pub fn hilbert_type(alpha: f64) -> Result<Self> {
        Self::homogeneous(1, alpha, vec![1.0, -1.0])
    }

    pub fn named(dim: usize, alpha: f64, name: NamedKernel) -> Result<Self> {
        check_alpha(dim, alpha)?;
        let k = Self { dim, alpha, form: Form::Named(name), delta: None, exponent: dim as f64 - alpha };
        k.modulus().dini_integral()?;
        Ok(k)
    }

    pub fn from_descriptor(desc: &KernelDescriptor, dim: usize) -> Result<Self> {
        let (k, delta) = match desc {
            KernelDescriptor::Homogeneous { alpha, omega, delta } => (Self::homogeneous(dim, *alpha, omega.clone())?, *delta),
            KernelDescriptor::RhoType { name, alpha, delta } => (Self::named(dim, *alpha, *name)?, *delta),
        };
        match delta {
            Some(d) => k.with_truncation(d),
            None => Ok(k),
        }
    }

    pub fn descriptor(&self) -> KernelDescriptor {
        match &self.form {
            Form::Homogeneous(o) => {
                KernelDescriptor::Homogeneous { alpha: self.alpha, omega: o.clone(), delta: self.delta }
            }
            Form::Named(n) => KernelDescriptor::RhoType { name: *n, alpha: self.alpha, delta: self.delta },
        }
    }

    /// `K^δ = K·(1 - φ_δ(x - y))`; `δ = 0` removes the truncation.
    pub fn with_truncation(&self, delta: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(invalid(format!("truncation radius {delta} must be non-negative")));
        }
        let mut k = self.clone();
        k.delta = (delta > 0.0).then_some(delta);
        Ok(k)
    }

    pub fn without_truncation(&self) -> Self {
        let mut k = self.clone();
        k.delta = None;
        k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn truncation(&self) -> Option<f64> {
        self.delta
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self.form, Form::Homogeneous(_))
    }

    pub fn omega_table(&self) -> Option<&[f64]> {
        match &self.form {
            Form::Homogeneous(o) => Some(o),
            Form::Named(_) => None,
        }
    }

    pub fn modulus(&self) -> Modulus {
        match self.form {
            Form::Named(NamedKernel::LogDini) => Modulus::LogSquared,
            _ => Modulus::Lipschitz,
        }
    }

    /// `C_K` with `|K(x, y)| ≤ C_K |x - y|^{α-n}`.
    pub fn size_constant(&self) -> f64 {
        match &self.form {
            Form::Homogeneous(o) => o.iter().fold(0.0, |a, v| a.max(v.abs())),
            Form::Named(NamedKernel::LogDini) => 1.5,
            Form::Named(_) => 1.0,
        }
    }

    /// `Ω` at the direction of `z` (homogeneous kernels only; 0 otherwise).
    pub fn omega(&self, z: Point) -> f64 {
        match &self.form {
            Form::Homogeneous(o) if self.dim == 1 => {
                if z[0] >= 0.0 {
                    o[0]
                } else {
                    o[1]
                }
            }
            Form::Homogeneous(o) => omega_at_angle(o, z[1].atan2(z[0])),
            Form::Named(_) => 0.0,
        }
    }

    /// `K(x, y)` without truncation; zero on the diagonal.
    pub fn base(&self, x: Point, y: Point) -> f64 {
        let z = [x[0] - y[0], if self.dim == 2 { x[1] - y[1] } else { 0.0 }];
        let r = if self.dim == 1 { z[0].abs() } else { z[0].hypot(z[1]) };
        if r == 0.0 {
            return 0.0;
        }
        let size = if self.exponent == 1.0 {
            r
        } else if self.exponent == 2.0 {
            r * r
        } else {
            r.powf(self.exponent)
        };
        match &self.form {
            Form::Homogeneous(_) => self.omega(z) / size,
            Form::Named(NamedKernel::Hilbert) => z[0] / r / size,
            Form::Named(NamedKernel::RieszLike) => 1.0 / size,
            Form::Named(NamedKernel::LogDini) => z[0] / r / size * (1.0 + 1.0 / (2.0 + r.ln().abs())),
        }
    }

    /// `K(x, y)`, or `K^δ(x, y)` when a truncation radius is set.
    pub fn eval(&self, x: Point, y: Point) -> f64 {
        let k = self.base(x, y);
        match self.delta {
            None => k,
            Some(d) => {
                let r = if self.dim == 1 { (x[0] - y[0]).abs() } else { (x[0] - y[0]).hypot(x[1] - y[1]) };
                k * (1.0 - smooth_cutoff(r / d))
            }
        }
    }

    /// Direction maximising `|Ω|` (first on ties): a unit vector and the angle-table index.
    pub fn argmax_direction(&self) -> Option<(Point, usize)> {
        let o = self.omega_table()?;
        let mut best = 0;
        for (i, v) in o.iter().enumerate() {
            if v.abs() > o[best].abs() {
                best = i;
            }
        }
        let dir = if self.dim == 1 {
            [if best == 0 { 1.0 } else { -1.0 }, 0.0]
        } else {
            let t = TAU * best as f64 / ANGLE_SAMPLES as f64;
            [t.cos(), t.sin()]
        };
        Some((dir, best))
    }
}

fn check_alpha(dim: usize, alpha: f64) -> Result<()> {
    if dim != 1 && dim != 2 {
        return Err(invalid(format!("dimension {dim} unsupported")));
    }
    if alpha >= 0.0 && alpha < dim as f64 {
        Ok(())
    } else {
        Err(invalid(format!("α = {alpha} not in [0, {dim})")))
    }
}

fn omega_at_angle(table: &[f64], theta: f64) -> f64 {
    let n = table.len();
    let u = theta.rem_euclid(TAU) / TAU * n as f64;
    let i = (u.floor() as usize) % n;
    let a = u - u.floor();
    table[i] * (1.0 - a) + table[(i + 1) % n] * a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hilbert_type_values() {
        let k = KernelSpec::hilbert_type(0.0).unwrap();
        assert_eq!(k.eval([2.0, 0.0], [0.0, 0.0]), 0.5);
        assert_eq!(k.eval([0.0, 0.0], [2.0, 0.0]), -0.5);
        assert_eq!(k.eval([1.0, 0.0], [1.0, 0.0]), 0.0);
        let n = KernelSpec::named(1, 0.0, NamedKernel::Hilbert).unwrap();
        assert_eq!(n.eval([2.0, 0.0], [0.5, 0.0]), k.eval([2.0, 0.0], [0.5, 0.0]));
    }

    #[test]
    fn mean_zero_enforced() {
        assert!(KernelSpec::homogeneous(1, 0.0, vec![1.0, 1.0]).is_err());
        assert!(KernelSpec::homogeneous(1, 0.5, vec![1.0, 1.0]).is_ok());
        let nearly = KernelSpec::homogeneous_from_fn(2, 0.0, |t| t.cos() + 1e-8).unwrap();
        let s: f64 = nearly.omega_table().unwrap().iter().sum();
        assert!(s.abs() < 1e-12);
        assert!(KernelSpec::homogeneous_from_fn(2, 0.0, |t| t.cos() + 0.1).is_err());
        assert!(KernelSpec::hilbert_type(1.0).is_err());
        assert!(KernelSpec::hilbert_type(-0.1).is_err());
    }

    #[test]
    fn truncation_removes_near_diagonal() {
        let k = KernelSpec::hilbert_type(0.0).unwrap().with_truncation(0.5).unwrap();
        assert_eq!(k.eval([0.2, 0.0], [0.0, 0.0]), 0.0);
        assert_eq!(k.eval([2.0, 0.0], [0.0, 0.0]), 0.5);
        let mid = k.eval([0.4, 0.0], [0.0, 0.0]);
        assert!(mid > 0.0 && mid < 2.5);
    }

    #[test]
    fn dini_integrals() {
        assert!((Modulus::Lipschitz.dini_integral().unwrap() - 1.0).abs() < 1e-6);
        assert!((Modulus::LogSquared.dini_integral().unwrap() - 1.0).abs() < 1e-3);
        assert_eq!(Modulus::LogSquared.tilde(0.5), Modulus::LogSquared.eval(0.5) + 0.5);
    }

    #[test]
    fn planar_angle_interpolation() {
        let k = KernelSpec::homogeneous_from_fn(2, 1.0, |t| t.cos()).unwrap();
        let v = k.omega([1.0, 1.0]);
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3);
        let (dir, idx) = k.argmax_direction().unwrap();
        assert_eq!(idx, 0);
        assert_eq!(dir, [1.0, 0.0]);
    }

    #[test]
    fn descriptor_round_trip() {
        let js = r#"{"variant":"homogeneous","alpha":0.0,"omega":[1.0,-1.0],"delta":0.25}"#;
        let d: KernelDescriptor = serde_json::from_str(js).unwrap();
        let k = KernelSpec::from_descriptor(&d, 1).unwrap();
        assert_eq!(k.truncation(), Some(0.25));
        assert_eq!(k.descriptor(), d);
        let r: KernelDescriptor = serde_json::from_str(r#"{"variant":"rho_type","name":"log_dini"}"#).unwrap();
        assert!(KernelSpec::from_descriptor(&r, 1).is_ok());
    }
}
