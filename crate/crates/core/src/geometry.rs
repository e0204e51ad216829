//! Poincaré-sphere vectors, measurement planes and the grouped setting
//! layouts that enter the finite-N inequality.
//!
//! A layout consists of two orthogonal planes. In each plane there are two
//! groups of `N` setting pairs: one where Bob's vector is rotated by `phi`
//! away from Alice's, and one where the two coincide. Successive pairs of a
//! group are rotated by `pi / N` inside the plane.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{clamp_unit, Real};

/// Tolerance used when validating layouts loaded from documents.
const DOC_TOL: f64 = 1e-9;

/// Point on the unit Poincaré sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "[T; 3]",
    into = "[T; 3]",
    bound(
        serialize = "T: Real + Serialize",
        deserialize = "T: Real + Deserialize<'de>"
    )
)]
pub struct UnitVec3<T: Real = f64> {
    x: T,
    y: T,
    z: T,
}

impl<T: Real> UnitVec3<T> {
    /// Builds a vector that must already have unit norm.
    pub fn new(x: T, y: T, z: T) -> Result<Self> {
        let norm2 = x * x + y * y + z * z;
        if !norm2.is_finite() || (norm2 - T::one()).abs() > T::check_tol() {
            return Err(Error::Input(format!(
                "vector ({x}, {y}, {z}) is not unit norm (|v|^2 = {norm2})"
            )));
        }
        Ok(Self { x, y, z })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(x: T, y: T, z: T) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm <= T::zero() {
            return Err(Error::Input(format!("cannot normalize ({x}, {y}, {z})")));
        }
        Ok(Self {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    /// Polar angle `theta` from +z, azimuth `phi` from +x.
    pub fn from_spherical(theta: T, phi: T) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self {
            x: st * cp,
            y: st * sp,
            z: ct,
        }
    }

    /// `(theta, phi)` with `theta` in `[0, pi]` and `phi` in `(-pi, pi]`.
    pub fn to_spherical(&self) -> (T, T) {
        (clamp_unit(self.z).acos(), self.y.atan2(self.x))
    }

    pub fn x_axis() -> Self {
        Self {
            x: T::one(),
            y: T::zero(),
            z: T::zero(),
        }
    }

    pub fn y_axis() -> Self {
        Self {
            x: T::zero(),
            y: T::one(),
            z: T::zero(),
        }
    }

    pub fn z_axis() -> Self {
        Self {
            x: T::zero(),
            y: T::zero(),
            z: T::one(),
        }
    }

    /// Basis axis by index (0 = x, 1 = y, 2 = z).
    pub fn axis(i: usize) -> Self {
        match i {
            0 => Self::x_axis(),
            1 => Self::y_axis(),
            2 => Self::z_axis(),
            _ => panic!("axis index {i} out of range"),
        }
    }

    #[inline]
    pub fn x(&self) -> T {
        self.x
    }

    #[inline]
    pub fn y(&self) -> T {
        self.y
    }

    #[inline]
    pub fn z(&self) -> T {
        self.z
    }

    #[inline]
    pub fn to_array(&self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Self) -> [T; 3] {
        [
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        ]
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    /// Componentwise closeness.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        (self.x - other.x).abs() <= tol
            && (self.y - other.y).abs() <= tol
            && (self.z - other.z).abs() <= tol
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> UnitVec3<U> {
        UnitVec3 {
            x: U::lit(self.x.as_f64()),
            y: U::lit(self.y.as_f64()),
            z: U::lit(self.z.as_f64()),
        }
    }
}

impl<T: Real> Neg for UnitVec3<T> {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

impl<T: Real> TryFrom<[T; 3]> for UnitVec3<T> {
    type Error = Error;

    fn try_from(v: [T; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }
}

impl<T: Real> From<UnitVec3<T>> for [T; 3] {
    fn from(v: UnitVec3<T>) -> Self {
        v.to_array()
    }
}

impl<T: Real> fmt::Display for UnitVec3<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6}, {:.6})", self.x, self.y, self.z)
    }
}

// Plain 3-vector arithmetic used internally when combining basis vectors.
#[derive(Clone, Copy)]
struct Raw<T>([T; 3]);

impl<T: Real> Add for Raw<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Raw([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<T: Real> Sub for Raw<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Raw([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<T: Real> Mul<T> for Raw<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Raw([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl<T: Real> From<UnitVec3<T>> for Raw<T> {
    fn from(v: UnitVec3<T>) -> Self {
        Raw(v.to_array())
    }
}

/// Angle between two unit vectors, in `[0, pi]`.
pub fn angle_between<T: Real>(a: &UnitVec3<T>, b: &UnitVec3<T>) -> T {
    clamp_unit(a.dot(b)).acos()
}

/// Orthonormal basis of a measurement plane with its right-handed normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "PlaneFrameDoc<T>",
    bound(
        serialize = "T: Real + Serialize",
        deserialize = "T: Real + Deserialize<'de>"
    )
)]
pub struct PlaneFrame<T: Real = f64> {
    e1: UnitVec3<T>,
    e2: UnitVec3<T>,
    normal: UnitVec3<T>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
struct PlaneFrameDoc<T: Real> {
    e1: UnitVec3<T>,
    e2: UnitVec3<T>,
    #[serde(default)]
    normal: Option<UnitVec3<T>>,
}

impl<T: Real> TryFrom<PlaneFrameDoc<T>> for PlaneFrame<T> {
    type Error = Error;

    fn try_from(doc: PlaneFrameDoc<T>) -> Result<Self> {
        let frame = PlaneFrame::new(doc.e1, doc.e2)?;
        if let Some(n) = doc.normal {
            if !n.approx_eq(&frame.normal, T::lit(DOC_TOL)) {
                return Err(Error::Schema("plane normal is not e1 x e2".into()));
            }
        }
        Ok(frame)
    }
}

impl<T: Real> PlaneFrame<T> {
    pub fn new(e1: UnitVec3<T>, e2: UnitVec3<T>) -> Result<Self> {
        let d = e1.dot(&e2);
        if d.abs() > T::check_tol() {
            return Err(Error::Input(format!(
                "plane basis is not orthogonal (e1.e2 = {d})"
            )));
        }
        let [x, y, z] = e1.cross(&e2);
        let normal = UnitVec3::normalized(x, y, z)?;
        Ok(Self { e1, e2, normal })
    }

    /// The x-y plane; normal +z.
    pub fn xy() -> Self {
        Self {
            e1: UnitVec3::x_axis(),
            e2: UnitVec3::y_axis(),
            normal: UnitVec3::z_axis(),
        }
    }

    /// The y-z plane; normal +x.
    pub fn yz() -> Self {
        Self {
            e1: UnitVec3::y_axis(),
            e2: UnitVec3::z_axis(),
            normal: UnitVec3::x_axis(),
        }
    }

    #[inline]
    pub fn e1(&self) -> &UnitVec3<T> {
        &self.e1
    }

    #[inline]
    pub fn e2(&self) -> &UnitVec3<T> {
        &self.e2
    }

    #[inline]
    pub fn normal(&self) -> &UnitVec3<T> {
        &self.normal
    }

    /// In-plane orientation of `v`, i.e. `atan2(v.e2, v.e1)`.
    pub fn angle_of(&self, v: &UnitVec3<T>) -> T {
        v.dot(&self.e2).atan2(v.dot(&self.e1))
    }
}

/// `cos(angle) e1 + sin(angle) e2`.
pub fn rotate_in_plane<T: Real>(frame: &PlaneFrame<T>, angle: T) -> UnitVec3<T> {
    let (s, c) = angle.sin_cos();
    let Raw([x, y, z]) = Raw::from(frame.e1) * c + Raw::from(frame.e2) * s;
    UnitVec3 { x, y, z }
}

/// One correlation measurement: Alice measures along `a`, Bob along `b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    bound(
        serialize = "T: Real + Serialize",
        deserialize = "T: Real + Deserialize<'de>"
    )
)]
pub struct SettingPair<T: Real = f64> {
    pub a: UnitVec3<T>,
    pub b: UnitVec3<T>,
    /// In-plane orientation of `a`.
    pub xi: T,
    /// Angle between `a` and `b`.
    pub phi: T,
}

impl<T: Real> SettingPair<T> {
    /// Same physical measurement (both vectors coincide within `tol`).
    pub fn same_settings(&self, other: &Self, tol: T) -> bool {
        self.a.approx_eq(&other.a, tol) && self.b.approx_eq(&other.b, tol)
    }
}

/// Identifies one of the four groups of a layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupId {
    #[serde(rename = "phi_1")]
    Phi1,
    #[serde(rename = "zero_1")]
    Zero1,
    #[serde(rename = "phi_2")]
    Phi2,
    #[serde(rename = "zero_2")]
    Zero2,
}

impl GroupId {
    /// Serialization order.
    pub const ALL: [GroupId; 4] = [GroupId::Phi1, GroupId::Zero1, GroupId::Phi2, GroupId::Zero2];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Which modulus of the inequality (0 or 1) the group belongs to.
    #[inline]
    pub fn modulus(self) -> usize {
        self.index() / 2
    }

    #[inline]
    pub fn is_phi(self) -> bool {
        matches!(self, GroupId::Phi1 | GroupId::Phi2)
    }

    pub fn label(self) -> &'static str {
        match self {
            GroupId::Phi1 => "phi_1",
            GroupId::Zero1 => "zero_1",
            GroupId::Phi2 => "phi_2",
            GroupId::Zero2 => "zero_2",
        }
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Position of one pair inside a layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub group: GroupId,
    pub n: usize,
}

/// The `4 x N` grouped setting pairs of one inequality instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "LayoutDoc<T>",
    bound(
        serialize = "T: Real + Serialize",
        deserialize = "T: Real + Deserialize<'de>"
    )
)]
pub struct MeasurementLayout<T: Real = f64> {
    n: usize,
    phi: T,
    planes: [PlaneFrame<T>; 2],
    groups: [Vec<SettingPair<T>>; 4],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
struct LayoutDoc<T: Real> {
    n: usize,
    phi: T,
    planes: [PlaneFrame<T>; 2],
    groups: Vec<Vec<SettingPair<T>>>,
}

impl<T: Real> TryFrom<LayoutDoc<T>> for MeasurementLayout<T> {
    type Error = Error;

    fn try_from(doc: LayoutDoc<T>) -> Result<Self> {
        let LayoutDoc {
            n,
            phi,
            planes,
            groups,
        } = doc;
        let groups: [Vec<SettingPair<T>>; 4] = groups
            .try_into()
            .map_err(|g: Vec<_>| Error::Schema(format!("expected 4 groups, found {}", g.len())))?;
        let layout = MeasurementLayout {
            n,
            phi,
            planes,
            groups,
        };
        layout.validate(T::lit(DOC_TOL)).map_err(|e| match e {
            Error::Schema(_) => e,
            other => Error::Schema(other.to_string()),
        })?;
        Ok(layout)
    }
}

/// Builds the canonical layout: plane 1 = span(x, y), plane 2 = span(y, z),
/// Alice at `n pi / N`, Bob offset by `+phi` in plane 1 and `-phi` in plane 2.
///
/// For `N = 2` the distinct vectors are `a1..a3 = x, y, z` and
/// `b1 = (cos, sin, 0)`, `b2 = (-sin, cos, 0)`, `b3 = (0, cos, -sin)`,
/// `b4 = (0, sin, cos)`, `b5..b7 = a1..a3`.
pub fn canonical_layout<T: Real>(n: usize, phi: T) -> Result<MeasurementLayout<T>> {
    if n < 2 {
        return Err(Error::InvalidOrder(n));
    }
    if !(phi >= T::zero() && phi <= T::PI()) {
        return Err(Error::range("phi", phi.as_f64(), 0.0, std::f64::consts::PI));
    }
    let planes = [PlaneFrame::xy(), PlaneFrame::yz()];
    let senses = [T::one(), -T::one()];
    let step = T::PI() / T::from_usize_lossy(n);

    let mut groups: [Vec<SettingPair<T>>; 4] = Default::default();
    for id in GroupId::ALL {
        let plane = id.modulus();
        let frame = &planes[plane];
        let offset = if id.is_phi() {
            senses[plane] * phi
        } else {
            T::zero()
        };
        let pair_phi = if id.is_phi() { phi } else { T::zero() };
        groups[id.index()] = (0..n)
            .map(|k| {
                let xi = step * T::from_usize_lossy(k);
                SettingPair {
                    a: rotate_in_plane(frame, xi),
                    b: rotate_in_plane(frame, xi + offset),
                    xi,
                    phi: pair_phi,
                }
            })
            .collect();
    }
    Ok(MeasurementLayout {
        n,
        phi,
        planes,
        groups,
    })
}

impl<T: Real> MeasurementLayout<T> {
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn phi(&self) -> T {
        self.phi
    }

    #[inline]
    pub fn plane(&self, i: usize) -> &PlaneFrame<T> {
        &self.planes[i]
    }

    #[inline]
    pub fn planes(&self) -> &[PlaneFrame<T>; 2] {
        &self.planes
    }

    #[inline]
    pub fn group(&self, id: GroupId) -> &[SettingPair<T>] {
        &self.groups[id.index()]
    }

    pub fn pair(&self, slot: Slot) -> &SettingPair<T> {
        &self.groups[slot.group.index()][slot.n]
    }

    /// All `4N` slots in serialization order.
    pub fn slots(&self) -> impl Iterator<Item = (Slot, &SettingPair<T>)> + '_ {
        GroupId::ALL.into_iter().flat_map(move |group| {
            self.groups[group.index()]
                .iter()
                .enumerate()
                .map(move |(n, p)| (Slot { group, n }, p))
        })
    }

    /// Deduplicated setting pairs. A pair that occurs in several slots (for
    /// the canonical layout with even `N`, Alice and Bob both along `y`)
    /// is a single measurement.
    pub fn distinct(&self) -> DistinctPairs {
        let tol = T::lit(1e-9).max(T::check_tol());
        let mut first: Vec<Slot> = Vec::new();
        let mut slot_map: [Vec<usize>; 4] = Default::default();
        for (slot, pair) in self.slots() {
            let found = first
                .iter()
                .position(|s| self.pair(*s).same_settings(pair, tol));
            let idx = found.unwrap_or_else(|| {
                first.push(slot);
                first.len() - 1
            });
            slot_map[slot.group.index()].push(idx);
        }
        let mut occurrences = vec![Vec::new(); first.len()];
        for id in GroupId::ALL {
            for (n, &idx) in slot_map[id.index()].iter().enumerate() {
                occurrences[idx].push(Slot { group: id, n });
            }
        }
        DistinctPairs {
            first,
            slot_map,
            occurrences,
        }
    }

    /// Checks all structural invariants with tolerance `tol`.
    pub fn validate(&self, tol: T) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidOrder(self.n));
        }
        if !(self.phi >= T::zero() && self.phi <= T::PI() + tol) {
            return Err(Error::range(
                "phi",
                self.phi.as_f64(),
                0.0,
                std::f64::consts::PI,
            ));
        }
        let [p1, p2] = &self.planes;
        if p1.normal().dot(p2.normal()).abs() > tol {
            return Err(Error::Schema(
                "measurement planes are not orthogonal".into(),
            ));
        }
        let step = T::PI() / T::from_usize_lossy(self.n);
        for id in GroupId::ALL {
            let group = &self.groups[id.index()];
            if group.len() != self.n {
                return Err(Error::Schema(format!(
                    "group {id} has {} pairs, expected {}",
                    group.len(),
                    self.n
                )));
            }
            let frame = &self.planes[id.modulus()];
            let want_phi = if id.is_phi() { self.phi } else { T::zero() };
            for (k, pair) in group.iter().enumerate() {
                let ctx = || format!("group {id} pair {k}");
                if (pair.phi - want_phi).abs() > tol {
                    return Err(Error::Schema(format!("{}: phi mismatch", ctx())));
                }
                if (angle_between(&pair.a, &pair.b) - want_phi).abs() > T::lit(1e-6).max(tol) {
                    return Err(Error::Schema(format!(
                        "{}: angle between a and b differs from phi",
                        ctx()
                    )));
                }
                if !rotate_in_plane(frame, pair.xi).approx_eq(&pair.a, tol) {
                    return Err(Error::Schema(format!("{}: a does not match xi", ctx())));
                }
                if pair.b.dot(frame.normal()).abs() > tol {
                    return Err(Error::Schema(format!("{}: b leaves the plane", ctx())));
                }
                if k > 0 {
                    let d = pair.xi - group[k - 1].xi;
                    if (d - step).abs() > tol {
                        return Err(Error::Schema(format!("{}: xi spacing is not pi/N", ctx())));
                    }
                }
            }
        }
        Ok(())
    }

    /// JSON document for this layout.
    pub fn to_json(&self) -> Result<String>
    where
        T: Serialize,
    {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Mapping between the `4N` slots of a layout and its distinct measurements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistinctPairs {
    first: Vec<Slot>,
    slot_map: [Vec<usize>; 4],
    occurrences: Vec<Vec<Slot>>,
}

impl DistinctPairs {
    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    /// Slot where distinct pair `idx` first occurs.
    pub fn first_slot(&self, idx: usize) -> Slot {
        self.first[idx]
    }

    pub fn first_slots(&self) -> &[Slot] {
        &self.first
    }

    /// Distinct index of a slot.
    pub fn index_of(&self, slot: Slot) -> usize {
        self.slot_map[slot.group.index()][slot.n]
    }

    pub fn occurrences(&self, idx: usize) -> &[Slot] {
        &self.occurrences[idx]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn phi_max() -> f64 {
        2.0 * (4.0 - 15f64.sqrt()).asin()
    }

    fn v(x: f64, y: f64, z: f64) -> UnitVec3 {
        UnitVec3::new(x, y, z).unwrap()
    }

    #[test]
    fn unit_vec_rejects_non_unit() {
        assert!(UnitVec3::new(1.0, 1.0, 0.0).is_err());
        assert!(UnitVec3::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(UnitVec3::<f64>::normalized(0.0, 0.0, 0.0).is_err());
        let n = UnitVec3::<f64>::normalized(3.0, 0.0, 4.0).unwrap();
        assert!((n.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotate_examples() {
        let f = PlaneFrame::xy();
        assert!(rotate_in_plane(&f, 0.0).approx_eq(&v(1.0, 0.0, 0.0), 1e-15));
        let pm = phi_max();
        let b1 = rotate_in_plane(&f, pm);
        assert!(b1.approx_eq(&v(pm.cos(), pm.sin(), 0.0), 1e-15));
        let b2 = rotate_in_plane(&f, FRAC_PI_2 + pm);
        assert!(b2.approx_eq(&v(-pm.sin(), pm.cos(), 0.0), 1e-15));
    }

    #[test]
    fn angle_examples() {
        let pm = phi_max();
        let a1 = UnitVec3::x_axis();
        let a2 = UnitVec3::y_axis();
        let b1 = v(pm.cos(), pm.sin(), 0.0);
        assert_eq!(angle_between(&a1, &a1), 0.0);
        assert!((angle_between(&a1, &b1) - pm).abs() < 1e-12);
        assert!((angle_between(&a1, &a2) - FRAC_PI_2).abs() < 1e-15);
        assert!((angle_between(&a1, &-a1) - PI).abs() < 1e-15);
    }

    #[test]
    fn canonical_n2_matches_published_vectors() {
        let pm = phi_max();
        let (s, c) = pm.sin_cos();
        let l = canonical_layout(2, pm).unwrap();
        let a = [v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0), v(0.0, 0.0, 1.0)];
        let b = [
            v(c, s, 0.0),
            v(-s, c, 0.0),
            v(0.0, c, -s),
            v(0.0, s, c),
            a[0],
            a[1],
            a[2],
        ];
        let expect = |g: GroupId, k: usize, ai: usize, bi: usize| {
            let p = l.group(g)[k];
            assert!(p.a.approx_eq(&a[ai], 1e-10), "{g} {k} a");
            assert!(p.b.approx_eq(&b[bi], 1e-10), "{g} {k} b");
        };
        // |E11 + E22 + E15 + E26| + |E23 + E34 + E26 + E37|
        expect(GroupId::Phi1, 0, 0, 0);
        expect(GroupId::Phi1, 1, 1, 1);
        expect(GroupId::Zero1, 0, 0, 4);
        expect(GroupId::Zero1, 1, 1, 5);
        expect(GroupId::Phi2, 0, 1, 2);
        expect(GroupId::Phi2, 1, 2, 3);
        expect(GroupId::Zero2, 0, 1, 5);
        expect(GroupId::Zero2, 1, 2, 6);

        let d = l.distinct();
        assert_eq!(d.len(), 7);
        let shared = d.index_of(Slot {
            group: GroupId::Zero1,
            n: 1,
        });
        assert_eq!(
            d.occurrences(shared),
            &[
                Slot {
                    group: GroupId::Zero1,
                    n: 1
                },
                Slot {
                    group: GroupId::Zero2,
                    n: 0
                }
            ]
        );
        let alice: Vec<_> = l.slots().map(|(_, p)| p.a).collect();
        let mut distinct_a: Vec<UnitVec3> = Vec::new();
        for x in alice {
            if !distinct_a.iter().any(|y| y.approx_eq(&x, 1e-10)) {
                distinct_a.push(x);
            }
        }
        assert_eq!(distinct_a.len(), 3);
    }

    #[test]
    fn canonical_zero_angle_degenerates() {
        let l = canonical_layout(2, 0.0).unwrap();
        for (_, p) in l.slots() {
            assert!(p.a.approx_eq(&p.b, 1e-15));
        }
    }

    #[test]
    fn canonical_n3_spacing() {
        let l = canonical_layout(3, 0.3).unwrap();
        assert_eq!(l.slots().count(), 12);
        let xi: Vec<f64> = l.group(GroupId::Phi1).iter().map(|p| p.xi).collect();
        for (got, want) in xi.iter().zip([0.0, PI / 3.0, 2.0 * PI / 3.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(l.distinct().len(), 12);
    }

    #[test]
    fn canonical_rejects_bad_input() {
        assert!(matches!(
            canonical_layout(1, 0.1),
            Err(Error::InvalidOrder(1))
        ));
        assert!(canonical_layout(2, -0.1).is_err());
        assert!(canonical_layout(2, 3.2).is_err());
        assert!(canonical_layout(2, f64::NAN).is_err());
    }

    #[test]
    fn plane_normals_orthogonal() {
        let l = canonical_layout(4, 1.0).unwrap();
        assert_eq!(l.plane(0).normal().dot(l.plane(1).normal()), 0.0);
        assert!(PlaneFrame::new(UnitVec3::x_axis(), v(0.6, 0.8, 0.0)).is_err());
    }

    #[test]
    fn layout_json_roundtrip_and_validation() {
        let l = canonical_layout(2, phi_max()).unwrap();
        let json = l.to_json().unwrap();
        let back: MeasurementLayout = serde_json::from_str(&json).unwrap();
        assert_eq!(back, l);

        let mut doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        doc["groups"][0][1]["xi"] = serde_json::json!(0.3);
        let err = serde_json::from_value::<MeasurementLayout>(doc).unwrap_err();
        assert!(err.to_string().contains("xi"), "{err}");

        let mut doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        doc["groups"].as_array_mut().unwrap().pop();
        assert!(serde_json::from_value::<MeasurementLayout>(doc).is_err());
    }

    #[test]
    fn generic_f32_layout() {
        let l = canonical_layout(2, 0.25_f32).unwrap();
        for (_, p) in l.slots() {
            assert!((p.a.norm() - 1.0).abs() < 1e-6);
        }
        assert_eq!(l.distinct().len(), 7);
    }

    fn arb_frame() -> impl Strategy<Value = PlaneFrame> {
        (0.0..PI, -PI..PI, -PI..PI).prop_map(|(t, p, psi)| {
            let n = UnitVec3::from_spherical(t, p);
            // any unit vector orthogonal to n
            let helper = if n.x().abs() < 0.9 {
                UnitVec3::x_axis()
            } else {
                UnitVec3::y_axis()
            };
            let [x, y, z] = n.cross(&helper);
            let u = UnitVec3::normalized(x, y, z).unwrap();
            let [x, y, z] = n.cross(&u);
            let w = UnitVec3::normalized(x, y, z).unwrap();
            let e1 = rotate_in_plane(&PlaneFrame::new(u, w).unwrap(), psi);
            let e2 = rotate_in_plane(&PlaneFrame::new(u, w).unwrap(), psi + FRAC_PI_2);
            PlaneFrame::new(e1, e2).unwrap()
        })
    }

    proptest! {
        #[test]
        fn rotation_stays_unit_and_in_plane(f in arb_frame(), theta in -10.0..10.0f64) {
            let r = rotate_in_plane(&f, theta);
            prop_assert!((r.norm() - 1.0).abs() < 1e-12);
            prop_assert!(r.dot(f.normal()).abs() < 1e-12);
        }

        #[test]
        fn layout_pairs_have_group_angle(n in 2usize..9, phi in 0.0..PI) {
            let l = canonical_layout(n, phi).unwrap();
            for (slot, p) in l.slots() {
                let want = if slot.group.is_phi() { phi } else { 0.0 };
                prop_assert!((p.phi - want).abs() == 0.0);
                // acos is ill-conditioned at 0 and pi, compare cosines there.
                prop_assert!((p.a.dot(&p.b) - want.cos()).abs() < 1e-10);
                if want > 1e-4 && want < PI - 1e-4 {
                    prop_assert!((angle_between(&p.a, &p.b) - want).abs() < 1e-10);
                }
            }
            prop_assert!(l.validate(1e-9).is_ok());
        }
    }
}
