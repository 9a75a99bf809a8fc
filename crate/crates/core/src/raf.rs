//! Fault-rate composition and the Reliability Acceleration Factor.
//!
//! A component's fault rate scales linearly with its area and its operating
//! time relative to a reference unit, times a coverage factor `f` describing
//! how much of that rate survives the protection attached to it:
//! `lambda = sum(f_i * OR_i * AR_i) * lambda_unit`.
//!
//! RAF is the ratio of the protected system's MTBF to the unprotected one.
//! For a protected module D (coverage `f_D`) plus its corrector C, and with
//! the corrector's repair treated as instantaneous,
//! `RAF = 1 / (f_D * OR_D * AR_D + OR_C * AR_C)`.

use thiserror::Error;

use crate::markov::{models, solve_mtbf, MarkovError, MarkovModel};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RafError {
    #[error("no components given")]
    NoComponents,
    #[error("component `{name}`: {field} = {value} out of range")]
    InvalidProfile { name: String, field: &'static str, value: String },
    #[error("unit fault rate must be positive, got {0}")]
    NonPositiveUnitRate(String),
    #[error("inconsistent rates: {0}")]
    InconsistentRates(String),
    #[error("original system has infinite MTBF; RAF undefined")]
    InfiniteOriginalMtbf,
    #[error(transparent)]
    Markov(#[from] MarkovError),
}

/// Coverage factor `f`, operating ratio `OR` and area ratio `AR` of one
/// component relative to the reference unit.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentProfile<T> {
    pub name: String,
    /// In `[0, 1]`; 1 means unprotected, 0 means every fault is handled.
    pub coverage: T,
    pub operating_ratio: T,
    pub area_ratio: T,
}

impl<T: Real> ComponentProfile<T> {
    pub fn new(name: impl Into<String>, coverage: T, operating_ratio: T, area_ratio: T) -> Result<Self, RafError> {
        let profile = Self { name: name.into(), coverage, operating_ratio, area_ratio };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<(), RafError> {
        let bad =
            |field, value: T| RafError::InvalidProfile { name: self.name.clone(), field, value: value.to_string() };
        if !(self.coverage >= T::zero() && self.coverage <= T::one()) {
            return Err(bad("f", self.coverage));
        }
        if !(self.operating_ratio >= T::zero()) || !self.operating_ratio.is_finite() {
            return Err(bad("OR", self.operating_ratio));
        }
        if !(self.area_ratio >= T::zero()) || !self.area_ratio.is_finite() {
            return Err(bad("AR", self.area_ratio));
        }
        Ok(())
    }

    /// `f * OR * AR`.
    pub fn weight(&self) -> T {
        self.coverage * self.operating_ratio * self.area_ratio
    }

    /// `OR * AR`, ignoring coverage (a corrector has no protection of its own).
    pub fn exposure(&self) -> T {
        self.operating_ratio * self.area_ratio
    }
}

pub fn system_fault_rate<T: Real>(components: &[ComponentProfile<T>], lambda_unit: T) -> Result<T, RafError> {
    if components.is_empty() {
        return Err(RafError::NoComponents);
    }
    if !(lambda_unit > T::zero()) || !lambda_unit.is_finite() {
        return Err(RafError::NonPositiveUnitRate(lambda_unit.to_string()));
    }
    let mut total = T::zero();
    for c in components {
        c.validate()?;
        total = total + c.weight() * lambda_unit;
    }
    Ok(total)
}

/// Transition rates of the protected-system chain
/// ([`models::fault_tolerant_system`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtSystemRates<T> {
    /// Fault rate of the protected module; `lambda_d1 + lambda_d2`.
    pub lambda_d: T,
    /// Part of `lambda_d` the corrector handles.
    pub lambda_d1: T,
    /// Part of `lambda_d` the corrector cannot handle.
    pub lambda_d2: T,
    pub lambda_c: T,
    pub mu_d: T,
}

impl<T: Real> FtSystemRates<T> {
    pub fn from_split(lambda_d1: T, lambda_d2: T, lambda_c: T, mu_d: T) -> Result<Self, RafError> {
        let rates = Self { lambda_d: lambda_d1 + lambda_d2, lambda_d1, lambda_d2, lambda_c, mu_d };
        rates.validate()?;
        Ok(rates)
    }

    /// Rates implied by profiles: the protected module contributes
    /// `OR_D * AR_D * lambda_unit`, split by coverage `f_D` into an unhandled
    /// share and a handled share; the corrector adds
    /// `OR_C * AR_C * lambda_unit`.
    pub fn from_profiles(
        protected: &ComponentProfile<T>,
        corrector: &ComponentProfile<T>,
        lambda_unit: T,
        mu_d: T,
    ) -> Result<Self, RafError> {
        protected.validate()?;
        corrector.validate()?;
        if !(lambda_unit > T::zero()) || !lambda_unit.is_finite() {
            return Err(RafError::NonPositiveUnitRate(lambda_unit.to_string()));
        }
        let lambda_d = protected.exposure() * lambda_unit;
        let lambda_d2 = protected.coverage * lambda_d;
        let lambda_d1 = (T::one() - protected.coverage) * lambda_d;
        let lambda_c = corrector.exposure() * lambda_unit;
        Self::from_split(lambda_d1, lambda_d2, lambda_c, mu_d)
    }

    pub fn validate(&self) -> Result<(), RafError> {
        let all = [self.lambda_d, self.lambda_d1, self.lambda_d2, self.lambda_c, self.mu_d];
        if all.iter().any(|r| !(*r >= T::zero()) || !r.is_finite()) {
            return Err(RafError::InconsistentRates(format!("negative or non-finite rate in {self:?}")));
        }
        let sum = self.lambda_d1 + self.lambda_d2;
        let tol = T::lit(1e-12) * self.lambda_d.max(T::min_positive_value());
        if (sum - self.lambda_d).abs() > tol {
            return Err(RafError::InconsistentRates(format!(
                "lambda_d1 + lambda_d2 = {sum} != lambda_d = {}",
                self.lambda_d
            )));
        }
        if self.lambda_d1 > T::zero() && !(self.mu_d > T::zero()) {
            return Err(RafError::InconsistentRates("handled faults need a positive repair rate".into()));
        }
        Ok(())
    }

    /// `(1 + lambda_d1 / mu_d) / (lambda_d2 + lambda_c)`: includes the time
    /// spent repairing handled faults.
    pub fn mtbf_exact(&self) -> T {
        let repair = if self.lambda_d1 > T::zero() { self.lambda_d1 / self.mu_d } else { T::zero() };
        (T::one() + repair) / (self.lambda_d2 + self.lambda_c)
    }

    /// `1 / (lambda_d2 + lambda_c)`: the `mu_d -> infinity` limit.
    pub fn mtbf_instant_repair(&self) -> T {
        T::one() / (self.lambda_d2 + self.lambda_c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RafResult<T> {
    pub raf: T,
    pub mtbf_original: T,
    pub mtbf_ft: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RafOutcome<T> {
    Bounded(RafResult<T>),
    /// The protected system never fails.
    Unbounded,
}

impl<T: Real> RafOutcome<T> {
    pub fn raf(&self) -> Option<T> {
        match self {
            Self::Bounded(r) => Some(r.raf),
            Self::Unbounded => None,
        }
    }
}

/// Closed-form RAF with the unprotected fault rate normalized to 1. The
/// corrector's coverage field is ignored.
pub fn raf_closed_form<T: Real>(
    protected: &ComponentProfile<T>,
    corrector: &ComponentProfile<T>,
) -> Result<RafOutcome<T>, RafError> {
    protected.validate()?;
    corrector.validate()?;
    let denominator = protected.weight() + corrector.exposure();
    if denominator == T::zero() {
        return Ok(RafOutcome::Unbounded);
    }
    let mtbf_ft = T::one() / denominator;
    Ok(RafOutcome::Bounded(RafResult { raf: mtbf_ft, mtbf_original: T::one(), mtbf_ft }))
}

pub fn raf_from_markov<T: Real>(original: &MarkovModel<T>, ft: &MarkovModel<T>) -> Result<RafOutcome<T>, RafError> {
    let mtbf_original = solve_mtbf(original)?.mtbf;
    let mtbf_ft = solve_mtbf(ft)?.mtbf;
    if mtbf_original.is_infinite() {
        return Err(RafError::InfiniteOriginalMtbf);
    }
    if mtbf_ft.is_infinite() {
        return Ok(RafOutcome::Unbounded);
    }
    Ok(RafOutcome::Bounded(RafResult { raf: mtbf_ft / mtbf_original, mtbf_original, mtbf_ft }))
}

/// RAF from profiles through the Markov chains: unit rate 1, repair rate
/// `mu_d`.
pub fn raf_from_profiles_markov<T: Real>(
    protected: &ComponentProfile<T>,
    corrector: &ComponentProfile<T>,
    mu_d: T,
) -> Result<RafOutcome<T>, RafError> {
    let rates = FtSystemRates::from_profiles(protected, corrector, T::one(), mu_d)?;
    if rates.lambda_d2 + rates.lambda_c == T::zero() {
        return Ok(RafOutcome::Unbounded);
    }
    raf_from_markov(&models::original_system(T::one()), &models::fault_tolerant_system(&rates))
}
