use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use rand::Rng as _;

use crate::error::{check_len, Error, Result};
use crate::manifold::DirichletDomain;
use crate::rng::Rng;

/// A real value per vertex, zero on the exterior of its domain.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DiscreteField {
    values: Vec<f64>,
}

impl DiscreteField {
    /// Wraps `values`, rejecting nonzero exterior entries.
    pub fn new(values: Vec<f64>, domain: &DirichletDomain) -> Result<Self> {
        check_len(domain.len(), values.len())?;
        if let Some(&i) = domain.exterior().iter().find(|&&i| values[i] != 0.0) {
            return Err(Error::InvalidDomain(format!(
                "field is {} at exterior vertex {i}; fields must vanish outside the domain",
                values[i]
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("field value at vertex {i} is not finite")));
        }
        Ok(Self { values })
    }

    /// Wraps `values` after zeroing the exterior.
    pub fn projected(mut values: Vec<f64>, domain: &DirichletDomain) -> Result<Self> {
        check_len(domain.len(), values.len())?;
        for &i in domain.exterior() {
            values[i] = 0.0;
        }
        Self::new(values, domain)
    }

    /// Wraps values the caller already knows to be admissible.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(domain: &DirichletDomain) -> Self {
        Self { values: vec![0.0; domain.len()] }
    }

    /// Interior indicator: 1 on `Ω`, 0 elsewhere.
    pub fn indicator(domain: &DirichletDomain) -> Self {
        Self::from_interior(domain, |_| 1.0)
    }

    /// Field with `f(i)` on interior vertices.
    pub fn from_interior(domain: &DirichletDomain, mut f: impl FnMut(usize) -> f64) -> Self {
        let mut values = vec![0.0; domain.len()];
        for &i in domain.interior() {
            values[i] = f(i);
        }
        Self { values }
    }

    /// Interior values drawn uniformly from `[lo, hi)`, in interior-index order.
    pub fn random_uniform(domain: &DirichletDomain, lo: f64, hi: f64, rng: &mut Rng) -> Self {
        Self::from_interior(domain, |_| rng.gen_range(lo..hi))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `t · self`.
    pub fn scaled(&self, t: f64) -> Self {
        Self { values: self.values.iter().map(|v| t * v).collect() }
    }

    /// `self + t · dir`; both vanish on the exterior so the result does too.
    pub fn axpy(&self, t: f64, dir: &DiscreteField) -> Self {
        Self { values: self.values.iter().zip(&dir.values).map(|(u, d)| u + t * d).collect() }
    }

    pub fn sup_distance(&self, other: &DiscreteField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

impl Deref for DiscreteField {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}
