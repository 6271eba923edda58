//! Smooth cutoff functions shared by the dyadic blocks and the cutoff `Ψ`.
//!
//! All are built from the `C^∞` step `x ↦ g(x)/(g(x)+g(1−x))` with
//! `g(t) = e^{−1/t}` for `t > 0`, which is exactly 0 for `x ≤ 0` and exactly
//! 1 for `x ≥ 1`.

#[inline]
fn g(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth monotone step: 0 on `(−∞, 0]`, 1 on `[1, ∞)`.
#[inline]
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = g(x);
        a / (a + g(1.0 - x))
    }
}

/// Even plateau cutoff equal to 1 on `|z| ≤ a` and 0 on `|z| ≥ b`.
#[inline]
pub fn plateau(z: f64, a: f64, b: f64) -> f64 {
    1.0 - smooth_step((z.abs() - a) / (b - a))
}

/// `ψ`: 1 on `[0, 3/4]`, supported in `[0, 4/3]`.
#[inline]
pub fn psi(z: f64) -> f64 {
    plateau(z, 0.75, 4.0 / 3.0)
}

/// `φ(z) = ψ(z/2) − ψ(z)`: supported in `[3/4, 8/3]`, 1 on `[4/3, 3/2]`.
#[inline]
pub fn phi(z: f64) -> f64 {
    psi(0.5 * z) - psi(z)
}

/// `χ`: 1 on `[0, 1]`, 0 beyond 2.
#[inline]
pub fn chi(z: f64) -> f64 {
    plateau(z, 1.0, 2.0)
}

/// Multiplier of the dyadic block `q ≥ −1` at frequency magnitude `z`.
#[inline]
pub fn block_multiplier(q: i32, z: f64) -> f64 {
    match q {
        q if q < -1 => 0.0,
        -1 => psi(z),
        q => phi(z / f64::powi(2.0, q)),
    }
}

/// Multiplier of the low-frequency cutoff `S_q = Σ_{q' ≤ q−1} Δ_{q'}`.
#[inline]
pub fn low_pass_multiplier(q: i32, z: f64) -> f64 {
    if q <= -1 {
        0.0
    } else {
        psi(z / f64::powi(2.0, q))
    }
}
