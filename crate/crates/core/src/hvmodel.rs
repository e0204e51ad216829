//! Nonlocal-realistic models built from Malus-law subensembles, and a
//! numerical check that they stay below the inequality's bound.
//!
//! In a subensemble both photons carry definite polarizations `u` (Alice)
//! and `v` (Bob). Malus' law fixes the local means `<A> = u.a` and
//! `<B> = v.b`; nonnegativity of the four joint probabilities then confines
//! the correlation to
//!
//! ```text
//! -1 + |u.a + v.b|  <=  <AB>  <=  1 - |u.a - v.b|
//! ```
//!
//! The correlation itself may depend nonlocally on both settings.
//!
//! [`relaxed_max_s`] maximizes the left-hand side of the inequality over
//! single subensembles, choosing every correlation independently at the end
//! of its interval that favours the modulus. This can only overestimate what
//! the model class reaches. Mixing subensembles with a density `F(u, v)`
//! cannot exceed the single-subensemble supremum either, because each
//! modulus is convex in the mixture weights. So `relaxed_max_s <= bound` is
//! a conservative numerical test of the bound.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{MeasurementLayout, UnitVec3};
use crate::inequality::bound;
use crate::optim::golden_section;
use crate::scalar::{clamp_unit, Real};

/// Photon pair with definite polarizations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct Subensemble<T: Real = f64> {
    pub u: UnitVec3<T>,
    pub v: UnitVec3<T>,
}

/// Malus' law on the Poincaré sphere: mean outcome `u.a`.
#[inline]
pub fn malus_marginal<T: Real>(u: &UnitVec3<T>, a: &UnitVec3<T>) -> T {
    clamp_unit(u.dot(a))
}

/// Admissible range of `<AB>` for one setting pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationInterval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> CorrelationInterval<T> {
    /// Interval for the two local means `ma = <A>`, `mb = <B>`.
    #[inline]
    pub fn from_marginals(ma: T, mb: T) -> Self {
        Self {
            lo: -T::one() + (ma + mb).abs(),
            hi: T::one() - (ma - mb).abs(),
        }
    }

    pub fn contains(&self, e: T) -> bool {
        self.lo <= e && e <= self.hi
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }
}

pub fn correlation_interval<T: Real>(
    s: &Subensemble<T>,
    a: &UnitVec3<T>,
    b: &UnitVec3<T>,
) -> CorrelationInterval<T> {
    CorrelationInterval::from_marginals(malus_marginal(&s.u, a), malus_marginal(&s.v, b))
}

/// Setting pairs of a layout split by modulus; every slot is kept, so a
/// shared pair appears in both.
struct Moduli<T: Real> {
    pairs: [Vec<(UnitVec3<T>, UnitVec3<T>)>; 2],
}

impl<T: Real> Moduli<T> {
    fn new(layout: &MeasurementLayout<T>) -> Self {
        let mut pairs: [Vec<_>; 2] = Default::default();
        for (slot, p) in layout.slots() {
            pairs[slot.group.modulus()].push((p.a, p.b));
        }
        Self { pairs }
    }

    fn value(&self, s: &Subensemble<T>) -> T {
        self.pairs.iter().fold(T::zero(), |acc, m| {
            let (hi, lo) = m.iter().fold((T::zero(), T::zero()), |(h, l), (a, b)| {
                let iv = correlation_interval(s, a, b);
                (h + iv.hi, l + iv.lo)
            });
            acc + hi.max(-lo)
        })
    }
}

/// Relaxed left-hand side of one subensemble: per modulus
/// `max(sum hi, -sum lo)`, summed over both moduli.
pub fn relaxed_s<T: Real>(layout: &MeasurementLayout<T>, s: &Subensemble<T>) -> T {
    Moduli::new(layout).value(s)
}

/// Search budget for [`relaxed_max_s`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Fibonacci points per sphere; `grid^2` subensembles are scanned.
    pub grid: usize,
    /// Compass-search iterations per refined seed.
    pub refine: usize,
    /// Number of best grid cells that get refined.
    pub seeds: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            grid: 317,
            refine: 200,
            seeds: 16,
        }
    }
}

impl SearchParams {
    fn validate(&self) -> Result<()> {
        if self.grid < 8 {
            return Err(Error::Input(format!(
                "grid must have at least 8 points per sphere, got {}",
                self.grid
            )));
        }
        if self.seeds == 0 || self.seeds > self.grid * self.grid {
            return Err(Error::Input(format!("invalid seed count {}", self.seeds)));
        }
        Ok(())
    }

    pub fn subensembles(&self) -> usize {
        self.grid * self.grid
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct SearchResult<T: Real = f64> {
    pub relaxed_max_s: T,
    /// Best value found on the coarse grid alone.
    pub grid_max_s: T,
    pub bound: T,
    /// `bound - relaxed_max_s`; nonnegative when the bound holds.
    pub gap: T,
    pub argmax: Subensemble<T>,
    pub evaluated: usize,
}

/// Deterministic spherical Fibonacci lattice with `m` points.
pub fn fibonacci_sphere<T: Real>(m: usize) -> Vec<UnitVec3<T>> {
    let golden_angle = T::PI() * (T::lit(3.0) - T::lit(5.0).sqrt());
    let mf = T::from_usize_lossy(m);
    (0..m)
        .map(|i| {
            let fi = T::from_usize_lossy(i);
            let z = T::one() - (T::lit(2.0) * fi + T::one()) / mf;
            let theta = z.acos();
            let phi = (fi * golden_angle) % (T::lit(2.0) * T::PI());
            UnitVec3::from_spherical(theta, phi)
        })
        .collect()
}

/// Orthonormal tangent basis at `p`.
fn tangents<T: Real>(p: &UnitVec3<T>) -> [UnitVec3<T>; 2] {
    let helper = if p.x().abs() < T::lit(0.8) {
        UnitVec3::x_axis()
    } else {
        UnitVec3::y_axis()
    };
    let [x, y, z] = p.cross(&helper);
    let t1 = UnitVec3::normalized(x, y, z).expect("helper not parallel");
    let [x, y, z] = p.cross(&t1);
    let t2 = UnitVec3::normalized(x, y, z).expect("orthogonal");
    [t1, t2]
}

/// Rotates `p` by `angle` along the great circle towards tangent `t`.
fn great_circle_step<T: Real>(p: &UnitVec3<T>, t: &UnitVec3<T>, angle: T) -> UnitVec3<T> {
    let (s, c) = angle.sin_cos();
    UnitVec3::normalized(
        c * p.x() + s * t.x(),
        c * p.y() + s * t.y(),
        c * p.z() + s * t.z(),
    )
    .expect("nonzero")
}

/// Rodrigues rotation of `p` about unit `axis`.
fn rotate_about<T: Real>(p: &UnitVec3<T>, axis: &UnitVec3<T>, angle: T) -> UnitVec3<T> {
    let (s, c) = angle.sin_cos();
    let k = axis;
    let kxp = k.cross(p);
    let kdp = k.dot(p) * (T::one() - c);
    UnitVec3::normalized(
        p.x() * c + kxp[0] * s + k.x() * kdp,
        p.y() * c + kxp[1] * s + k.y() * kdp,
        p.z() * c + kxp[2] * s + k.z() * kdp,
    )
    .expect("rotation preserves norm")
}

/// Compass search on `S^2 x S^2`. Moves are `+-step` along the two local
/// angular coordinates of `u` and of `v`, plus a common rotation of both
/// about each coordinate axis; the latter follows ridges such as
/// `v = -u`, where the relaxed value has a kink. Moves to the best
/// improving neighbour and halves the step when none improves. Local
/// coordinates avoid the degenerate azimuth at the poles.
fn compass_refine<T: Real>(
    moduli: &Moduli<T>,
    start: Subensemble<T>,
    step: T,
    iters: usize,
) -> (T, Subensemble<T>) {
    let mut x = start;
    let mut fx = moduli.value(&start);
    let mut h = step;
    let floor = T::epsilon() * T::lit(16.0);
    for _ in 0..iters {
        if h < floor {
            break;
        }
        let tu = tangents(&x.u);
        let tv = tangents(&x.v);
        let mut best: Option<(T, Subensemble<T>)> = None;
        for k in 0..7 {
            for dir in [h, -h] {
                let y = match k {
                    0 | 1 => Subensemble {
                        u: great_circle_step(&x.u, &tu[k], dir),
                        v: x.v,
                    },
                    2 | 3 => Subensemble {
                        u: x.u,
                        v: great_circle_step(&x.v, &tv[k - 2], dir),
                    },
                    _ => {
                        let axis = UnitVec3::axis(k - 4);
                        Subensemble {
                            u: rotate_about(&x.u, &axis, dir),
                            v: rotate_about(&x.v, &axis, dir),
                        }
                    }
                };
                let fy = moduli.value(&y);
                if fy > best.map_or(fx, |b| b.0) {
                    best = Some((fy, y));
                }
            }
        }
        match best {
            Some((fy, y)) => {
                fx = fy;
                x = y;
            }
            None => h = h / T::lit(2.0),
        }
    }
    (fx, x)
}

/// Largest relaxed left-hand side over single subensembles.
///
/// Scans `grid^2` subensembles from a spherical Fibonacci lattice for both
/// `u` and `v`, then refines the `seeds` best cells by compass search in
/// spherical angles. The result does not depend on thread scheduling.
pub fn relaxed_max_s<T: Real>(
    layout: &MeasurementLayout<T>,
    params: &SearchParams,
) -> Result<SearchResult<T>> {
    params.validate()?;
    let moduli = Moduli::new(layout);
    let points = fibonacci_sphere::<T>(params.grid);

    // best v for every u, then keep the top rows
    let mut rows: Vec<(T, usize, usize)> = (0..points.len())
        .into_par_iter()
        .map(|iu| {
            let u = points[iu];
            let mut best = (T::neg_infinity(), iu, 0);
            for (iv, v) in points.iter().enumerate() {
                let val = moduli.value(&Subensemble { u, v: *v });
                if val > best.0 {
                    best = (val, iu, iv);
                }
            }
            best
        })
        .collect();
    rows.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    let grid_max = rows[0].0;

    let step = (T::lit(4.0) * T::PI() / T::from_usize_lossy(params.grid)).sqrt();
    let seeds = params.seeds.min(rows.len());
    let refined: Vec<(T, Subensemble<T>)> = rows[..seeds]
        .par_iter()
        .map(|&(val, iu, iv)| {
            let start = Subensemble {
                u: points[iu],
                v: points[iv],
            };
            let (fr, sr) = compass_refine(&moduli, start, step, params.refine);
            if fr >= val {
                (fr, sr)
            } else {
                (val, start)
            }
        })
        .collect();
    // first maximum in seed order
    let (best, argmax) = refined
        .into_iter()
        .fold(None, |acc: Option<(T, Subensemble<T>)>, cur| match acc {
            Some(a) if a.0 >= cur.0 => Some(a),
            _ => Some(cur),
        })
        .expect("at least one seed");
    let b = bound(layout.n(), layout.phi())?;
    Ok(SearchResult {
        relaxed_max_s: best,
        grid_max_s: grid_max,
        bound: b,
        gap: b - best,
        argmax,
        evaluated: params.subensembles() + seeds * params.refine * 14,
    })
}

/// Writes the coarse-grid landscape as CSV with header
/// `u_theta,u_phi,v_theta,v_phi,relaxed_S`.
pub fn write_landscape<T: Real, W: Write>(
    layout: &MeasurementLayout<T>,
    grid: usize,
    out: W,
) -> Result<()> {
    if grid < 8 {
        return Err(Error::Input(format!("grid must be >= 8, got {grid}")));
    }
    let moduli = Moduli::new(layout);
    let points = fibonacci_sphere::<T>(grid);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["u_theta", "u_phi", "v_theta", "v_phi", "relaxed_S"])?;
    for u in &points {
        let (ut, up) = u.to_spherical();
        for v in &points {
            let (vt, vp) = v.to_spherical();
            let s = moduli.value(&Subensemble { u: *u, v: *v });
            w.write_record([ut, up, vt, vp, s].map(|x| format!("{}", x.as_f64())))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `sum_{k<N} |cos(k pi / N - x)|` for the lemma below.
pub fn cosine_sum<T: Real>(n: usize, x: T) -> T {
    let nf = T::from_usize_lossy(n);
    (0..n).fold(T::zero(), |acc, k| {
        acc + (T::from_usize_lossy(k) * T::PI() / nf - x).cos().abs()
    })
}

/// Numerical minimum over `x` of [`cosine_sum`], which the bound's
/// derivation needs to be at least `cot(pi / 2N)`.
///
/// The sum has period `pi / N`, so one period is scanned with step at most
/// `1e-6` rad and the best cell refined by golden section.
pub fn cosine_sum_min<T: Real>(n: usize) -> Result<T> {
    if n < 2 {
        return Err(Error::InvalidOrder(n));
    }
    let period = T::PI() / T::from_usize_lossy(n);
    let cells = (period.as_f64() / 1e-6).ceil() as usize;
    let step = period / T::from_usize_lossy(cells);
    let (_, best) = (0..=cells)
        .into_par_iter()
        .map(|i| (cosine_sum(n, step * T::from_usize_lossy(i)), i))
        .reduce(
            || (T::infinity(), usize::MAX),
            |a, b| {
                if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    let lo = step * T::from_usize_lossy(best.saturating_sub(1));
    let hi = step * T::from_usize_lossy(best + 1);
    let m = golden_section(|x| cosine_sum(n, x), lo, hi, T::zero(), 200);
    Ok(m.value)
}
