//! Brute-force number-basis oracle.
//!
//! Propagates the exact von Neumann dynamics of the driven mode in a
//! truncated Fock space. Deliberately simple: its value is independence from
//! the Gaussian fast path, not speed.

use crate::error::{Error, Result};
use crate::gaussian::ThermalSpec;
use crate::ode::Rk45;
use crate::protocol::RampSpec;
use num_complex::Complex64;

/// Density matrix in the truncated number basis.
#[derive(Clone, Debug)]
pub struct TruncatedState {
    pub dim: usize,
    /// Row-major ρ_{nm} = ⟨n|ρ|m⟩.
    pub rho: Vec<Complex64>,
    /// Population accumulated in the top tenth of the basis.
    pub leakage: f64,
}

impl TruncatedState {
    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|n| self.rho[n * self.dim + n].re).sum()
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² for Hermitian ρ is the squared Frobenius norm.
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn occupation(&self) -> f64 {
        (0..self.dim)
            .map(|n| n as f64 * self.rho[n * self.dim + n].re)
            .sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|n| self.rho[n * self.dim + n].re).collect()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let mut worst = 0.0_f64;
        for n in 0..self.dim {
            for m in 0..n {
                let d = (self.rho[n * self.dim + m] - self.rho[m * self.dim + n].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// ⟨a²⟩ = Σ ρ_{n,n-2} √(n(n-1)).
    pub fn pair_amplitude(&self) -> Complex64 {
        (2..self.dim)
            .map(|n| {
                self.rho[n * self.dim + n - 2] * ((n * (n - 1)) as f64).sqrt()
            })
            .sum()
    }

    /// Second quadrature moments (⟨x̃²⟩, sym ⟨x̃p̃⟩, ⟨p̃²⟩) with x̃ = a+a†,
    /// p̃ = i(a†-a); normalized so the vacuum gives (1, 0, 1).
    pub fn second_moments(&self) -> (f64, f64, f64) {
        let n_bar = self.occupation();
        let a2 = self.pair_amplitude();
        let xx = 1.0 + 2.0 * n_bar + 2.0 * a2.re;
        let pp = 1.0 + 2.0 * n_bar - 2.0 * a2.re;
        let xp = 2.0 * a2.im;
        (xx, xp, pp)
    }

    /// Eigenvalues of the quadrature covariance matrix, ascending. These are
    /// what can be compared against the Gaussian solver without fixing a
    /// quadrature ordering convention.
    pub fn covariance_eigenvalues(&self) -> (f64, f64) {
        let (xx, xp, pp) = self.second_moments();
        let tr = xx + pp;
        let half_gap = (0.25 * (xx - pp).powi(2) + xp * xp).sqrt();
        (0.5 * tr - half_gap, 0.5 * tr + half_gap)
    }
}

/// Dense Hermitian matrix of ω a†a - (ωg²/4)(a+a†)² in the number basis.
/// Real symmetric, banded: couples n with n and n±2.
pub fn build_hamiltonian(g: f64, omega: f64, dim: usize) -> Vec<f64> {
    let (diag, off) = banded_hamiltonian(g, omega, dim);
    let mut h = vec![0.0; dim * dim];
    for n in 0..dim {
        h[n * dim + n] = diag[n];
        if n + 2 < dim {
            h[n * dim + n + 2] = off[n];
            h[(n + 2) * dim + n] = off[n];
        }
    }
    h
}

fn banded_hamiltonian(g: f64, omega: f64, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let c = omega * g * g / 4.0;
    let diag: Vec<f64> = (0..dim)
        .map(|n| omega * n as f64 - c * (2.0 * n as f64 + 1.0))
        .collect();
    let off: Vec<f64> = (0..dim.saturating_sub(2))
        .map(|n| -c * (((n + 1) * (n + 2)) as f64).sqrt())
        .collect();
    (diag, off)
}

// State layout for the ODE: [re ρ_00, im ρ_00, re ρ_01, ...], row-major.
fn von_neumann_rhs(spec: &RampSpec, dim: usize) -> impl FnMut(f64, &[f64], &mut [f64]) + '_ {
    let mut a = vec![Complex64::new(0.0, 0.0); dim * dim];
    move |t, y, dy| {
        let g = spec.coupling_at(t).expect("inside cycle");
        let (diag, off) = banded_hamiltonian(g, spec.omega, dim);
        // A = Hρ, exploiting the band structure of H.
        for i in 0..dim {
            for j in 0..dim {
                let idx = i * dim + j;
                let rho = |r: usize, c: usize| {
                    Complex64::new(y[2 * (r * dim + c)], y[2 * (r * dim + c) + 1])
                };
                let mut v = diag[i] * rho(i, j);
                if i + 2 < dim {
                    v += off[i] * rho(i + 2, j);
                }
                if i >= 2 {
                    v += off[i - 2] * rho(i - 2, j);
                }
                a[idx] = v;
            }
        }
        // dρ/dt = -i(Hρ - ρH) = -i(A - A†) for Hermitian ρ and real H.
        for i in 0..dim {
            for j in 0..dim {
                let d = a[i * dim + j] - a[j * dim + i].conj();
                let v = Complex64::new(0.0, -1.0) * d;
                dy[2 * (i * dim + j)] = v.re;
                dy[2 * (i * dim + j) + 1] = v.im;
            }
        }
    }
}

/// Evolve a truncated thermal state through the cycle.
pub fn propagate(spec: &RampSpec, th: &ThermalSpec, dim: usize, tol: f64) -> Result<TruncatedState> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("dim = {dim} must be >= 2")));
    }
    let mut y = vec![0.0_f64; 2 * dim * dim];
    // Truncated geometric populations, renormalized on the finite basis.
    let raw: Vec<f64> = (0..dim).map(|n| th.population(n)).collect();
    let norm: f64 = raw.iter().sum();
    for (n, p) in raw.iter().enumerate() {
        y[2 * (n * dim + n)] = p / norm;
    }

    let solver = Rk45::new(tol, tol * 1e-2, spec.tau / 100.0);
    let mut f = von_neumann_rhs(spec, dim);
    solver.integrate_observed(&mut f, 0.0, spec.tau, &mut y, &mut |_, _| {})?;
    solver.integrate_observed(&mut f, spec.tau, 2.0 * spec.tau, &mut y, &mut |_, _| {})?;

    let rho: Vec<Complex64> = (0..dim * dim)
        .map(|i| Complex64::new(y[2 * i], y[2 * i + 1]))
        .collect();
    let band = (dim / 10).max(2);
    let leakage: f64 = (dim - band..dim).map(|n| rho[n * dim + n].re).sum();
    let state = TruncatedState { dim, rho, leakage };
    if leakage > 1e-6 {
        return Err(Error::BasisLeak { dim, leak: leakage });
    }
    Ok(state)
}

/// Schrödinger-propagate the first `n_cols` basis states through the cycle;
/// returns the final amplitude vectors. This is the raw material for a
/// brute-force two-point-measurement distribution.
pub fn propagate_basis_columns(
    spec: &RampSpec,
    dim: usize,
    tol: f64,
    n_cols: usize,
) -> Result<Vec<Vec<Complex64>>> {
    if n_cols > dim {
        return Err(Error::InvalidParameter(format!(
            "n_cols = {n_cols} exceeds dim = {dim}"
        )));
    }
    let solver = Rk45::new(tol, tol * 1e-2, spec.tau / 100.0);
    let mut out = Vec::with_capacity(n_cols);
    for n in 0..n_cols {
        let mut y = vec![0.0_f64; 2 * dim];
        y[2 * n] = 1.0;
        let mut f = |t: f64, y: &[f64], dy: &mut [f64]| {
            let g = spec.coupling_at(t).expect("inside cycle");
            let (diag, off) = banded_hamiltonian(g, spec.omega, dim);
            for i in 0..dim {
                let psi = |r: usize| Complex64::new(y[2 * r], y[2 * r + 1]);
                let mut v = diag[i] * psi(i);
                if i + 2 < dim {
                    v += off[i] * psi(i + 2);
                }
                if i >= 2 {
                    v += off[i - 2] * psi(i - 2);
                }
                let d = Complex64::new(0.0, -1.0) * v;
                dy[2 * i] = d.re;
                dy[2 * i + 1] = d.im;
            }
        };
        solver.integrate_observed(&mut f, 0.0, spec.tau, &mut y, &mut |_, _| {})?;
        solver.integrate_observed(&mut f, spec.tau, 2.0 * spec.tau, &mut y, &mut |_, _| {})?;
        let col: Vec<Complex64> = (0..dim)
            .map(|i| Complex64::new(y[2 * i], y[2 * i + 1]))
            .collect();
        let top: f64 = col[dim - dim / 10..].iter().map(|z| z.norm_sqr()).sum();
        if top > 1e-6 {
            return Err(Error::BasisLeak { dim, leak: top });
        }
        out.push(col);
    }
    Ok(out)
}

/// Dense matrix of the squeeze operator exp[(s/2)(a² - a†²)], real in the
/// number basis. Scaling-and-squaring with a Taylor core; used only as a
/// recurrence-free oracle for the overlap series.
pub fn squeeze_operator_matrix(s: f64, dim: usize) -> Vec<f64> {
    let mut b = vec![0.0_f64; dim * dim];
    for n in 0..dim.saturating_sub(2) {
        let v = 0.5 * s * (((n + 1) * (n + 2)) as f64).sqrt();
        b[n * dim + n + 2] = v;
        b[(n + 2) * dim + n] = -v;
    }
    let norm: f64 = (0..dim)
        .map(|i| (0..dim).map(|j| b[i * dim + j].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = norm.log2().ceil().max(0.0) as u32 + 3;
    let scale = 0.5_f64.powi(squarings as i32);
    let scaled: Vec<f64> = b.iter().map(|v| v * scale).collect();

    // exp(scaled) by Taylor series; the scaled norm is ≤ 1/8 so 18 terms is
    // far below f64 resolution.
    let mut result = identity(dim);
    let mut term = identity(dim);
    for k in 1..=18 {
        term = matmul(&term, &scaled, dim);
        let inv_k = 1.0 / k as f64;
        for v in term.iter_mut() {
            *v *= inv_k;
        }
        for (r, t) in result.iter_mut().zip(&term) {
            *r += t;
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result, dim);
    }
    result
}

fn identity(dim: usize) -> Vec<f64> {
    let mut m = vec![0.0; dim * dim];
    for i in 0..dim {
        m[i * dim + i] = 1.0;
    }
    m
}

fn matmul(a: &[f64], b: &[f64], dim: usize) -> Vec<f64> {
    let mut c = vec![0.0; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik == 0.0 {
                continue;
            }
            let row = &b[k * dim..(k + 1) * dim];
            let out = &mut c[i * dim..(i + 1) * dim];
            for (o, &v) in out.iter_mut().zip(row) {
                *o += aik * v;
            }
        }
    }
    c
}
