//! The discrete energy `ψ = I₁ + I₂ − K`, its `μ`-weighted gradient and the weak-form residual.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::field::DiscreteField;
use crate::kernel::KernelMatrix;
use crate::manifold::DirichletDomain;
use crate::nonlinearity::Nonlinearity;
use crate::numeric::{abs_pow, abs_pow_diff, conjugate, csum, powf, signed_pow, CompensatedSum};

/// `ψ` and its three components.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EnergyBreakdown {
    pub psi: f64,
    /// `[u]^p / p`.
    pub i1: f64,
    /// `Σ_Ω |u_i|^p μ_i / p`.
    pub i2: f64,
    /// `Σ_Ω F(x_i, u_i) μ_i`.
    pub k: f64,
}

impl EnergyBreakdown {
    pub fn from_parts(i1: f64, i2: f64, k: f64) -> Self {
        Self { psi: i1 + i2 - k, i1, i2, k }
    }
}

/// Energy functional of the Dirichlet problem on a fixed kernel and domain.
///
/// `I₂` is written over the whole manifold in the continuum; fields vanish off
/// `Ω`, so it is summed over the interior only.
#[derive(Debug, Clone, Copy)]
pub struct EnergyFunctional<'a> {
    kernel: &'a KernelMatrix,
    domain: &'a DirichletDomain,
    nl: &'a Nonlinearity,
}

impl<'a> EnergyFunctional<'a> {
    pub fn new(kernel: &'a KernelMatrix, domain: &'a DirichletDomain, nl: &'a Nonlinearity) -> Result<Self> {
        check_len(kernel.len(), domain.len())?;
        if let Some(w) = &nl.weight {
            check_len(kernel.len(), w.len())?;
        }
        Ok(Self { kernel, domain, nl })
    }

    pub fn kernel(&self) -> &'a KernelMatrix {
        self.kernel
    }

    pub fn domain(&self) -> &'a DirichletDomain {
        self.domain
    }

    pub fn nonlinearity(&self) -> &'a Nonlinearity {
        self.nl
    }

    pub fn p(&self) -> f64 {
        self.kernel.p()
    }

    pub fn len(&self) -> usize {
        self.kernel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Rejects fields of the wrong size or with nonzero exterior values.
    pub fn check_field(&self, u: &[f64]) -> Result<()> {
        check_len(self.len(), u.len())?;
        if let Some(&i) = self.domain.exterior().iter().find(|&&i| u[i] != 0.0) {
            return Err(Error::InvalidDomain(format!("field is nonzero at exterior vertex {i}")));
        }
        Ok(())
    }

    pub fn eval_energy(&self, u: &[f64]) -> Result<EnergyBreakdown> {
        self.check_field(u)?;
        let p = self.p();
        let mu = self.kernel.measure();
        let i1 = self.kernel.gagliardo_seminorm_p(u)? / p;
        let i2 = csum(self.domain.interior().iter().map(|&i| abs_pow(u[i], p) * mu[i])) / p;
        let mut k = CompensatedSum::new();
        for &i in self.domain.interior() {
            k.add(self.nl.eval_F(i, u[i])? * mu[i]);
        }
        Ok(EnergyBreakdown::from_parts(i1, i2, k.value()))
    }

    pub fn psi(&self, u: &[f64]) -> Result<f64> {
        Ok(self.eval_energy(u)?.psi)
    }

    /// `ψ(new) − ψ(old)`, summed termwise so that it stays accurate when the two
    /// fields are close.
    pub fn psi_difference(&self, old: &[f64], new: &[f64]) -> Result<f64> {
        self.check_field(old)?;
        self.check_field(new)?;
        let p = self.p();
        let n = self.len();
        let w = self.kernel.weights();
        let mut pairs = CompensatedSum::new();
        for i in 0..n {
            let row = w.row(i);
            for j in (i + 1)..n {
                if old[i] == new[i] && old[j] == new[j] {
                    continue;
                }
                pairs.add(abs_pow_diff(old[i] - old[j], new[i] - new[j], p) * row[j]);
            }
        }
        let mu = self.kernel.measure();
        let mut local = CompensatedSum::new();
        for &i in self.domain.interior() {
            if old[i] == new[i] {
                continue;
            }
            local.add(abs_pow_diff(old[i], new[i], p) * mu[i] / p);
            local.add(-self.nl.primitive_difference(i, old[i], new[i])? * mu[i]);
        }
        Ok(2.0 * pairs.value() / p + local.value())
    }

    /// `g` with `⟨g, v⟩_μ = ⟨ψ'(u), v⟩` for every admissible `v`; zero off `Ω`.
    pub fn eval_gradient(&self, u: &[f64]) -> Result<DiscreteField> {
        self.check_field(u)?;
        let p = self.p();
        let lm = self.kernel.operator_times_measure(u)?;
        let mu = self.kernel.measure();
        let mut g = vec![0.0; u.len()];
        for &i in self.domain.interior() {
            g[i] = lm[i] / mu[i] + signed_pow(u[i], p) - self.nl.eval_f(i, u[i])?;
        }
        Ok(DiscreteField::from_raw(g))
    }

    /// `⟨a, b⟩_μ` over the interior.
    pub fn mu_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        let mu = self.kernel.measure();
        csum(self.domain.interior().iter().map(|&i| a[i] * b[i] * mu[i]))
    }

    /// `(Σ_Ω |g_i|^{p'} μ_i)^{1/p'}` for a gradient already evaluated.
    pub fn dual_norm(&self, g: &[f64]) -> f64 {
        let q = conjugate(self.p());
        let mu = self.kernel.measure();
        let s = csum(self.domain.interior().iter().map(|&i| abs_pow(g[i], q) * mu[i]));
        powf(s, 1.0 / q)
    }

    /// Dual norm of the gradient; zero exactly at discrete weak solutions.
    pub fn residual_norm(&self, u: &[f64]) -> Result<f64> {
        Ok(self.dual_norm(&self.eval_gradient(u)?))
    }

    /// `‖u‖ = ([u]^p + Σ_Ω |u_i|^p μ_i)^{1/p}`.
    pub fn w_norm(&self, u: &[f64]) -> Result<f64> {
        let p = self.p();
        let e = self.eval_energy_quadratic_parts(u)?;
        Ok(powf(p * (e.0 + e.1), 1.0 / p))
    }

    /// `(I₁, I₂)` without touching the nonlinearity.
    fn eval_energy_quadratic_parts(&self, u: &[f64]) -> Result<(f64, f64)> {
        self.check_field(u)?;
        let p = self.p();
        let mu = self.kernel.measure();
        let i1 = self.kernel.gagliardo_seminorm_p(u)? / p;
        let i2 = csum(self.domain.interior().iter().map(|&i| abs_pow(u[i], p) * mu[i])) / p;
        Ok((i1, i2))
    }

    /// `I₁ + I₂`.
    pub fn convex_part(&self, u: &[f64]) -> Result<f64> {
        let (a, b) = self.eval_energy_quadratic_parts(u)?;
        Ok(a + b)
    }

    /// Interior values as a vector (for solvers working on `Ω` only).
    pub fn interior_values(&self, u: &[f64]) -> Vec<f64> {
        self.domain.interior().iter().map(|&i| u[i]).collect()
    }
}
