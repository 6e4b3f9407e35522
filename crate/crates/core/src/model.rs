//! Model parameters and the closed-form quantities of the capacity model.
//!
//! Node labels are 1-based ranks: label 1 has the largest capacity. Vectors
//! returned by this module are indexed by `label - 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `α (τ − 1) = 1`.
const ALPHA_TAU_TOL: f64 = 1e-12;

/// The constant `c` in `L_N ≥ c N / (1 − α)`.
pub const TOTAL_CAPACITY_C: f64 = 0.9;

pub fn alpha_of_tau(tau: f64) -> f64 {
    1.0 / (tau - 1.0)
}

pub fn tau_of_alpha(alpha: f64) -> f64 {
    1.0 + 1.0 / alpha
}

/// Canonical slowly diverging choices for `l(N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LFamily {
    /// `ln ln ln ln N`
    Llll,
    /// `ln ln ln N`
    Lll,
}

impl LFamily {
    /// Value of the family at `n`. Fails when the iterated log is undefined
    /// or not positive.
    pub fn value(self, n: u64) -> Result<f64> {
        let v = match self {
            LFamily::Lll => iterated_ln(n as f64, 3),
            LFamily::Llll => iterated_ln(n as f64, 4),
        };
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::invalid(
                "l",
                format!(
                    "l-family {} is not positive at N = {n} (value {v})",
                    self.name()
                ),
            ))
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LFamily::Llll => "llll",
            LFamily::Lll => "lll",
        }
    }
}

impl std::str::FromStr for LFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "llll" => Ok(LFamily::Llll),
            "lll" => Ok(LFamily::Lll),
            other => Err(Error::invalid(
                "l-family",
                format!("unknown family `{other}`"),
            )),
        }
    }
}

/// `ln` applied `depth` times. Returns NaN once the argument leaves the
/// domain of `ln`.
pub fn iterated_ln(x: f64, depth: usize) -> f64 {
    (0..depth).fold(x, |acc, _| if acc > 0.0 { acc.ln() } else { f64::NAN })
}

/// Root parameters of the model: node count, exponent and the scalar `l(N)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    n: u64,
    tau: f64,
    alpha: f64,
    l_value: f64,
}

impl ModelParams {
    /// Builds parameters from `τ`. Accepted range is `2 < τ ≤ 3`
    /// (`1/2 ≤ α < 1`); the bounds module additionally rejects `τ = 3`.
    pub fn new(n: u64, tau: f64, l_value: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "node count must be at least 1"));
        }
        if !(tau > 2.0 && tau <= 3.0) {
            return Err(Error::invalid(
                "tau",
                format!("need 2 < tau <= 3, got {tau}"),
            ));
        }
        if !(l_value.is_finite() && l_value > 0.0) {
            return Err(Error::invalid("l", format!("need l > 0, got {l_value}")));
        }
        let alpha = alpha_of_tau(tau);
        debug_assert!((alpha * (tau - 1.0) - 1.0).abs() < ALPHA_TAU_TOL);
        Ok(Self {
            n,
            tau,
            alpha,
            l_value,
        })
    }

    pub fn from_alpha(n: u64, alpha: f64, l_value: f64) -> Result<Self> {
        if !(0.5..1.0).contains(&alpha) {
            return Err(Error::invalid(
                "alpha",
                format!("need 1/2 <= alpha < 1, got {alpha}"),
            ));
        }
        let mut p = Self::new(n, tau_of_alpha(alpha), l_value)?;
        // keep the caller's alpha bit-exact
        p.alpha = alpha;
        Ok(p)
    }

    pub fn with_family(n: u64, tau: f64, family: LFamily) -> Result<Self> {
        Self::new(n, tau, family.value(n)?)
    }

    pub fn with_l(self, l_value: f64) -> Result<Self> {
        let mut p = Self::new(self.n, self.tau, l_value)?;
        p.alpha = self.alpha;
        Ok(p)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn l_value(&self) -> f64 {
        self.l_value
    }

    fn check_label(&self, i: u64) -> Result<()> {
        if i == 0 || i > self.n {
            Err(Error::IndexOutOfRange {
                index: i,
                n: self.n,
            })
        } else {
            Ok(())
        }
    }

    #[inline]
    pub(crate) fn capacity_unchecked(&self, i: u64) -> f64 {
        (self.n as f64 / i as f64).powf(self.alpha)
    }

    /// `λ_i = (N/i)^α` for a 1-based label `i`.
    pub fn capacity(&self, i: u64) -> Result<f64> {
        self.check_label(i)?;
        Ok(self.capacity_unchecked(i))
    }

    /// All capacities, index `k` holding label `k + 1`.
    pub fn capacities(&self) -> Vec<f64> {
        (1..=self.n).map(|i| self.capacity_unchecked(i)).collect()
    }

    /// `L_N` by direct summation, smallest terms first.
    pub fn total_capacity(&self) -> f64 {
        (1..=self.n).rev().map(|i| self.capacity_unchecked(i)).sum()
    }

    /// `λ_i λ_j / L_N`. Recomputes `L_N`; use [`edge_mean_with`] in loops.
    ///
    /// [`edge_mean_with`]: ModelParams::edge_mean_with
    pub fn edge_mean(&self, i: u64, j: u64) -> Result<f64> {
        self.edge_mean_with(i, j, self.total_capacity())
    }

    pub fn edge_mean_with(&self, i: u64, j: u64, total_capacity: f64) -> Result<f64> {
        self.check_label(i)?;
        self.check_label(j)?;
        Ok(self.capacity_unchecked(i) * self.capacity_unchecked(j) / total_capacity)
    }

    /// Whether `N > 10^{1/(1−α)}`, the condition under which `c = 9/10` holds.
    pub fn total_capacity_bound_applies(&self) -> bool {
        (self.n as f64).log10() > 1.0 / (1.0 - self.alpha)
    }

    /// `(9/10) N / (1 − α)` when the bound applies, otherwise the trivial 0.
    pub fn total_capacity_lower_bound(&self) -> f64 {
        if self.total_capacity_bound_applies() {
            TOTAL_CAPACITY_C * self.n as f64 / (1.0 - self.alpha)
        } else {
            0.0
        }
    }

    pub fn communication_range_check(
        &self,
        thresholds: &RangeThresholds,
    ) -> CommunicationRangeFlag {
        let mut reasons = Vec::new();
        if self.alpha > thresholds.max_alpha {
            reasons.push(format!(
                "alpha = {} exceeds {} (not in lower half of the exponent range)",
                self.alpha, thresholds.max_alpha
            ));
        }
        if !self.total_capacity_bound_applies() {
            reasons.push(format!(
                "N = {} does not exceed 10^(1/(1-alpha)) = {:.6e}",
                self.n,
                10f64.powf(1.0 / (1.0 - self.alpha))
            ));
        }
        if (self.n as f64) < thresholds.min_n {
            reasons.push(format!("N = {} is below {}", self.n, thresholds.min_n));
        }
        CommunicationRangeFlag {
            in_range: reasons.is_empty(),
            reasons,
        }
    }
}

/// Concrete thresholds of the communication-range predicate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeThresholds {
    pub max_alpha: f64,
    pub min_n: f64,
}

impl Default for RangeThresholds {
    fn default() -> Self {
        Self {
            max_alpha: 0.75,
            min_n: 1e3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunicationRangeFlag {
    pub in_range: bool,
    pub reasons: Vec<String>,
}
