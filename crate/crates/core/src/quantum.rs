//! Bell-diagonal two-photon polarization states.
//!
//! A state is described by the diagonal `(t1, t2, t3)` of its correlation
//! matrix. Marginals are unbiased, so for settings `a`, `b` on the Poincaré
//! sphere the correlation is `E(a, b) = t1 a1 b1 + t2 a2 b2 + t3 a3 b3`.
//! Axis convention: x = diagonal/antidiagonal, y = circular, z = H/V.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::UnitVec3;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "StateDoc<T>",
    into = "StateDoc<T>",
    bound(
        serialize = "T: Real + Serialize",
        deserialize = "T: Real + Deserialize<'de>"
    )
)]
pub struct PolarizationState<T: Real = f64> {
    t: [T; 3],
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc<T> {
    t: [T; 3],
}

impl<T: Real> TryFrom<StateDoc<T>> for PolarizationState<T> {
    type Error = Error;

    fn try_from(doc: StateDoc<T>) -> Result<Self> {
        Self::new(doc.t[0], doc.t[1], doc.t[2])
    }
}

impl<T: Real> From<PolarizationState<T>> for StateDoc<T> {
    fn from(s: PolarizationState<T>) -> Self {
        StateDoc { t: s.t }
    }
}

/// Joint outcome probabilities, indexed `[++, +-, -+, --]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeProbs<T> {
    pub pp: T,
    pub pm: T,
    pub mp: T,
    pub mm: T,
}

impl<T: Real> OutcomeProbs<T> {
    pub fn to_array(&self) -> [T; 4] {
        [self.pp, self.pm, self.mp, self.mm]
    }

    pub fn sum(&self) -> T {
        self.pp + self.pm + self.mp + self.mm
    }

    /// `sum alpha beta p(alpha, beta)`.
    pub fn signed_sum(&self) -> T {
        self.pp + self.mm - self.pm - self.mp
    }
}

impl<T: Real> PolarizationState<T> {
    /// Validates physicality: the Bell-diagonal weights must be nonnegative.
    pub fn new(t1: T, t2: T, t3: T) -> Result<Self> {
        let t = [t1, t2, t3];
        if t.iter().any(|x| !x.is_finite()) {
            return Err(Error::Unphysical(format!("non-finite entry in {t:?}")));
        }
        let s = Self { t };
        let w = s.bell_weights();
        if let Some(bad) = w.iter().find(|&&x| x < -T::check_tol()) {
            return Err(Error::Unphysical(format!(
                "t = ({t1}, {t2}, {t3}) gives Bell weight {bad} < 0"
            )));
        }
        Ok(s)
    }

    /// `|psi->`, correlation `-a.b`.
    pub fn singlet() -> Self {
        Self { t: [-T::one(); 3] }
    }

    /// Singlet mixed with white noise; `E(a, b) = -V a.b`.
    pub fn werner(visibility: T) -> Result<Self> {
        check_visibility("visibility", visibility)?;
        Self::new(-visibility, -visibility, -visibility)
    }

    /// Singlet with independent visibilities along x, y, z.
    pub fn per_axis(v1: T, v2: T, v3: T) -> Result<Self> {
        check_visibility("v1", v1)?;
        check_visibility("v2", v2)?;
        check_visibility("v3", v3)?;
        Self::new(-v1, -v2, -v3)
    }

    #[inline]
    pub fn t(&self) -> [T; 3] {
        self.t
    }

    /// Weights of the four Bell states in the mixture.
    pub fn bell_weights(&self) -> [T; 4] {
        let [t1, t2, t3] = self.t;
        let q = T::lit(0.25);
        [
            (T::one() - t1 - t2 - t3) * q,
            (T::one() - t1 + t2 + t3) * q,
            (T::one() + t1 - t2 + t3) * q,
            (T::one() + t1 + t2 - t3) * q,
        ]
    }

    pub fn correlation(&self, a: &UnitVec3<T>, b: &UnitVec3<T>) -> T {
        let [t1, t2, t3] = self.t;
        t1 * a.x() * b.x() + t2 * a.y() * b.y() + t3 * a.z() * b.z()
    }

    /// Born-rule probabilities `(1 + alpha beta E) / 4`.
    pub fn outcome_probs(&self, a: &UnitVec3<T>, b: &UnitVec3<T>) -> OutcomeProbs<T> {
        let e = self.correlation(a, b);
        let q = T::lit(0.25);
        let same = ((T::one() + e) * q).max(T::zero());
        let diff = ((T::one() - e) * q).max(T::zero());
        OutcomeProbs {
            pp: same,
            pm: diff,
            mp: diff,
            mm: same,
        }
    }
}

fn check_visibility<T: Real>(name: &'static str, v: T) -> Result<()> {
    if v >= T::zero() && v <= T::one() {
        Ok(())
    } else {
        Err(Error::range(name, v.as_f64(), 0.0, 1.0))
    }
}
