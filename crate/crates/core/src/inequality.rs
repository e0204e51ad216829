//! The finite-N Leggett-type inequality
//!
//! ```text
//! |sum_phi_1 E + sum_zero_1 E| + |sum_phi_2 E + sum_zero_2 E| <= 4N - 2 K(N) |sin(phi/2)|
//! ```
//!
//! with `K(N) = cot(pi / 2N)`. For `N = 2` the right-hand side is
//! `8 - 2|sin(phi/2)|`. Quantum mechanics predicts `2 N V (1 + cos phi)` for
//! a singlet with visibility `V`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{canonical_layout, GroupId, MeasurementLayout, UnitVec3};
use crate::optim::{grid_golden, parabolic_polish};
use crate::quantum::PolarizationState;
use crate::scalar::Real;

/// `cot(pi / 2N)`.
pub fn k_factor<T: Real>(n: usize) -> Result<T> {
    check_order(n)?;
    let x = T::PI() / (T::lit(2.0) * T::from_usize_lossy(n));
    Ok(x.cos() / x.sin())
}

/// Right-hand side divided by `N`: `4 - 2 (K/N) |sin(phi/2)|`.
pub fn bound_normalized<T: Real>(n: usize, phi: T) -> Result<T> {
    check_phi(phi)?;
    let c = k_factor::<T>(n)? / T::from_usize_lossy(n);
    Ok(T::lit(4.0) - T::lit(2.0) * c * (phi / T::lit(2.0)).sin().abs())
}

/// Unnormalized bound `N (4 - 2 (K/N) |sin(phi/2)|)`.
pub fn bound<T: Real>(n: usize, phi: T) -> Result<T> {
    check_phi(phi)?;
    let k = k_factor::<T>(n)?;
    Ok(T::lit(4.0) * T::from_usize_lossy(n) - T::lit(2.0) * k * (phi / T::lit(2.0)).sin().abs())
}

/// Quantum value of the left-hand side for a singlet of visibility `V`
/// measured on the canonical layout: `2 N V (1 + cos phi)`.
pub fn quantum_s<T: Real>(n: usize, phi: T, visibility: T) -> Result<T> {
    check_order(n)?;
    check_phi(phi)?;
    if !(visibility >= T::zero() && visibility <= T::one()) {
        return Err(Error::range("visibility", visibility.as_f64(), 0.0, 1.0));
    }
    Ok(T::lit(2.0) * T::from_usize_lossy(n) * visibility * (T::one() + phi.cos()))
}

fn check_order(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidOrder(n))
    } else {
        Ok(())
    }
}

fn check_phi<T: Real>(phi: T) -> Result<()> {
    if phi >= T::zero() && phi <= T::PI() {
        Ok(())
    } else {
        Err(Error::range("phi", phi.as_f64(), 0.0, std::f64::consts::PI))
    }
}

/// One inequality instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeggettInequality<T: Real = f64> {
    n: usize,
    phi: T,
}

impl<T: Real> LeggettInequality<T> {
    pub fn new(n: usize, phi: T) -> Result<Self> {
        check_order(n)?;
        check_phi(phi)?;
        Ok(Self { n, phi })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn bound(&self) -> T {
        bound(self.n, self.phi).expect("validated")
    }

    pub fn bound_normalized(&self) -> T {
        bound_normalized(self.n, self.phi).expect("validated")
    }

    pub fn layout(&self) -> MeasurementLayout<T> {
        canonical_layout(self.n, self.phi).expect("validated")
    }

    pub fn quantum_s(&self, visibility: T) -> Result<T> {
        quantum_s(self.n, self.phi, visibility)
    }
}

/// Anything that predicts or measures `E(a, b)`.
pub trait CorrelationSource<T: Real> {
    fn correlation(&self, a: &UnitVec3<T>, b: &UnitVec3<T>) -> T;
}

impl<T: Real> CorrelationSource<T> for PolarizationState<T> {
    fn correlation(&self, a: &UnitVec3<T>, b: &UnitVec3<T>) -> T {
        PolarizationState::correlation(self, a, b)
    }
}

impl<T: Real, F> CorrelationSource<T> for F
where
    F: Fn(&UnitVec3<T>, &UnitVec3<T>) -> T,
{
    fn correlation(&self, a: &UnitVec3<T>, b: &UnitVec3<T>) -> T {
        self(a, b)
    }
}

/// A single correlation entering the left-hand side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term<T> {
    pub group: GroupId,
    /// Position within the group (`xi = n pi / N`).
    pub n: usize,
    /// Index of the distinct measurement this slot reads.
    pub pair_id: usize,
    pub value: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport<T> {
    pub n: usize,
    pub phi: T,
    #[serde(rename = "S")]
    pub s: T,
    pub bound: T,
    pub margin: T,
    #[serde(rename = "S_normalized")]
    pub s_normalized: T,
    pub bound_normalized: T,
    /// Signed sums inside the two moduli.
    pub moduli: [T; 2],
    #[serde(rename = "sigma_S")]
    pub sigma_s: Option<T>,
    /// `margin / sigma_S`, in standard deviations.
    pub significance: Option<T>,
    pub terms: Vec<Term<T>>,
}

impl<T: Real> EvaluationReport<T> {
    pub fn violated(&self) -> bool {
        self.margin > T::zero()
    }
}

/// Evaluates the left-hand side on `layout`, querying `source` once per
/// distinct setting pair. `sigmas`, when present, holds one standard error
/// per distinct pair (see [`MeasurementLayout::distinct`]).
pub fn evaluate<T: Real, S: CorrelationSource<T> + ?Sized>(
    source: &S,
    layout: &MeasurementLayout<T>,
    sigmas: Option<&[T]>,
) -> Result<EvaluationReport<T>> {
    let distinct = layout.distinct();
    let values: Vec<T> = distinct
        .first_slots()
        .iter()
        .map(|&slot| {
            let p = layout.pair(slot);
            source.correlation(&p.a, &p.b)
        })
        .collect();
    evaluate_distinct(&values, layout, sigmas)
}

/// Same as [`evaluate`] with the correlations already known, one per
/// distinct pair in layout order.
pub fn evaluate_distinct<T: Real>(
    values: &[T],
    layout: &MeasurementLayout<T>,
    sigmas: Option<&[T]>,
) -> Result<EvaluationReport<T>> {
    let distinct = layout.distinct();
    if values.len() != distinct.len() {
        return Err(Error::Input(format!(
            "expected {} correlations, got {}",
            distinct.len(),
            values.len()
        )));
    }
    let limit = T::one() + T::check_tol();
    if let Some((i, v)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| v.is_nan() || v.abs() > limit)
    {
        return Err(Error::Input(format!(
            "correlation of pair {i} is {v}, outside [-1, 1]"
        )));
    }
    if let Some(s) = sigmas {
        if s.len() != distinct.len() {
            return Err(Error::Input(format!(
                "expected {} sigmas, got {}",
                distinct.len(),
                s.len()
            )));
        }
        if let Some(bad) = s.iter().find(|x| !x.is_finite() || **x < T::zero()) {
            return Err(Error::Input(format!("invalid sigma {bad}")));
        }
    }

    let mut moduli = [T::zero(); 2];
    let mut terms = Vec::with_capacity(4 * layout.n());
    for (slot, _) in layout.slots() {
        let pair_id = distinct.index_of(slot);
        let value = values[pair_id];
        moduli[slot.group.modulus()] = moduli[slot.group.modulus()] + value;
        terms.push(Term {
            group: slot.group,
            n: slot.n,
            pair_id,
            value,
        });
    }
    let s = moduli[0].abs() + moduli[1].abs();
    let n = layout.n();
    let bound = bound(n, layout.phi())?;
    let margin = s - bound;

    // dS/dE_p sums sign(modulus) over every slot reading pair p
    let sigma_s = sigmas.map(|sig| {
        let var = (0..distinct.len()).fold(T::zero(), |acc, p| {
            let deriv = distinct.occurrences(p).iter().fold(T::zero(), |d, slot| {
                d + moduli[slot.group.modulus()].signum()
            });
            let t = deriv * sig[p];
            acc + t * t
        });
        var.sqrt()
    });
    let significance = sigma_s.and_then(|sd| (sd > T::zero()).then(|| margin / sd));
    let nf = T::from_usize_lossy(n);
    Ok(EvaluationReport {
        n,
        phi: layout.phi(),
        s,
        bound,
        margin,
        s_normalized: s / nf,
        bound_normalized: bound / nf,
        moduli,
        sigma_s,
        significance,
        terms,
    })
}

/// What "optimal angle" means.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Minimize `bound / S_quantum`, i.e. the critical visibility.
    #[default]
    Ratio,
    /// Maximize `S_quantum - bound` at unit visibility.
    Difference,
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ratio" => Ok(Criterion::Ratio),
            "difference" => Ok(Criterion::Difference),
            other => Err(Error::Input(format!("unknown criterion '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimum<T> {
    pub n: usize,
    pub criterion: Criterion,
    pub phi_star: T,
    /// `bound / S_quantum` at `phi_star`: the visibility needed to violate.
    pub v_crit: T,
    pub bound_at_star: T,
    pub s_at_star: T,
}

/// Critical visibility `bound(N, phi) / S_quantum(N, phi, 1)`.
pub fn critical_visibility<T: Real>(n: usize, phi: T) -> Result<T> {
    Ok(bound(n, phi)? / quantum_s(n, phi, T::one())?)
}

/// Closed-form optimum. With `c = K(N)/N` and `s = sin(phi/2)`:
/// ratio optimum `s = (2 - sqrt(4 - c^2)) / c`, difference optimum `s = c/4`.
pub fn optimal_angle<T: Real>(n: usize, criterion: Criterion) -> Result<Optimum<T>> {
    let c = k_factor::<T>(n)? / T::from_usize_lossy(n);
    let two = T::lit(2.0);
    let s = match criterion {
        Criterion::Ratio => (two - (T::lit(4.0) - c * c).sqrt()) / c,
        Criterion::Difference => c / T::lit(4.0),
    };
    optimum_at(n, criterion, two * s.asin())
}

/// Numerical optimum by grid scan over `(0, pi)`, golden-section
/// refinement and a parabolic polish; independent of the closed form.
pub fn optimal_angle_numeric<T: Real>(n: usize, criterion: Criterion) -> Result<Optimum<T>> {
    check_order(n)?;
    let objective = |phi: T| -> T {
        let b = bound(n, phi).unwrap_or(T::infinity());
        let q = quantum_s(n, phi, T::one()).unwrap_or(T::zero());
        match criterion {
            Criterion::Ratio => b / q,
            Criterion::Difference => b - q,
        }
    };
    let eps = T::lit(1e-6);
    let coarse = grid_golden(objective, eps, T::PI() - eps, 4001);
    let h = T::epsilon().cbrt() * T::lit(10.0);
    let fine = parabolic_polish(objective, coarse, h, 3);
    optimum_at(n, criterion, fine.x)
}

fn optimum_at<T: Real>(n: usize, criterion: Criterion, phi: T) -> Result<Optimum<T>> {
    let b = bound(n, phi)?;
    let q = quantum_s(n, phi, T::one())?;
    Ok(Optimum {
        n,
        criterion,
        phi_star: phi,
        v_crit: b / q,
        bound_at_star: b,
        s_at_star: q,
    })
}
