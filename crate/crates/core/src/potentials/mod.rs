//! Catalog of Kato-decomposable potentials with metadata, the numerical
//! Kato-class surrogate and the unit-ball comparability constant.

mod catalog;
mod comparability;
mod kato;

pub use catalog::{GrowthCheck, GrowthClass, NegativeSupport, PotentialKind, SingularTerm, Singularity};
pub use comparability::{ball_samples, comparability_constant};
pub use kato::{kato_check, semigroup_kato_well, KatoConfig, KatoReport, KatoVerdict};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stable::StableParams;

/// A potential `V` on `ℝ^d` together with its metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    kind: PotentialKind,
    dim: usize,
    growth: GrowthClass,
    singularities: Vec<Singularity>,
    negative_support: NegativeSupport,
    /// Warnings about parameters outside the Kato conditions.
    flags: Vec<String>,
}

impl PotentialSpec {
    /// Builds the catalog entry `kind` for the process `params`.
    pub fn new(kind: PotentialKind, params: &StableParams) -> Result<Self> {
        kind.validate(params.dim())?;
        let dim = params.dim();
        Ok(Self {
            growth: kind.growth_class(),
            singularities: kind.singularities(dim),
            negative_support: kind.negative_support(),
            flags: kind.kato_flags(params),
            kind,
            dim,
        })
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn growth_class(&self) -> GrowthClass {
        self.growth
    }

    pub fn singularities(&self) -> &[Singularity] {
        &self.singularities
    }

    pub fn negative_support(&self) -> NegativeSupport {
        self.negative_support
    }

    pub fn flags(&self) -> &[String] {
        &self.flags
    }

    /// `V(x)`; `±∞` exactly at singular points.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.kind.eval(x)
    }

    /// `V(x)` on the first coordinate axis; the common case `d = 1`.
    pub fn evaluate_1d(&self, x: f64) -> f64 {
        if self.dim == 1 {
            self.kind.eval(&[x])
        } else {
            let mut p = vec![0.0; self.dim];
            p[0] = x;
            self.kind.eval(&p)
        }
    }

    pub fn positive_part(&self, x: &[f64]) -> f64 {
        self.evaluate(x).max(0.0)
    }

    pub fn negative_part(&self, x: &[f64]) -> f64 {
        (-self.evaluate(x)).max(0.0)
    }

    /// `V(x)` clipped to `[-cap, cap]`; without a cap, singular values are an error.
    pub fn evaluate_capped(&self, x: &[f64], cap: Option<f64>) -> Result<f64> {
        let v = self.evaluate(x);
        match cap {
            Some(c) => Ok(v.clamp(-c, c)),
            None if v.is_finite() => Ok(v),
            None => Err(Error::SingularGridPoint { x: x.to_vec() }),
        }
    }

    /// One-dimensional points where `V` is singular or discontinuous.
    pub fn breakpoints_1d(&self) -> Vec<f64> {
        self.kind.breakpoints_1d()
    }

    /// Numerical confirmation of the declared growth class.
    pub fn growth_check(&self) -> GrowthCheck {
        catalog::growth_check(self)
    }

    /// `V + c`.
    pub fn shifted(&self, c: f64, params: &StableParams) -> Result<Self> {
        self.plus(PotentialKind::Constant { c }, params)
    }

    /// `V + W` for a catalog term `W`.
    pub fn plus(&self, other: PotentialKind, params: &StableParams) -> Result<Self> {
        let mut terms = match &self.kind {
            PotentialKind::Sum { terms } => terms.clone(),
            k => vec![k.clone()],
        };
        terms.push(other);
        Self::new(PotentialKind::Sum { terms }, params)
    }
}

/// Catalog lookup by name, as used by configuration files.
pub fn catalog(kind: PotentialKind, params: &StableParams) -> Result<PotentialSpec> {
    PotentialSpec::new(kind, params)
}
