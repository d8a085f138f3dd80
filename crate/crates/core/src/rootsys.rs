//! Restricted root systems of rank one and two, their Weyl groups and chambers.
//!
//! Roots are stored as covectors in an orthonormal basis of the flat, so a
//! root `λ` acts on a point `Z` by the dot product of coefficient vectors. In
//! rank two the fundamental roots are fixed by the angle `θ` of the family:
//!
//! ```text
//! λ₁(x₁, x₂) = x₂,    λ₂(x₁, x₂) = x₁ sin θ − x₂ cos θ
//! ```
//!
//! and the rest of the positive system is the closure of `{λ₁, λ₂}` under the
//! dihedral Weyl group intersected with the positive half-space. No root
//! length normalization is imposed beyond that, so b2 and g2 come out with
//! all roots of unit length. Nothing here assumes crystallographic
//! integrality.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used for orbit deduplication, chamber tests and group closure.
pub const WEYL_TOL: f64 = 1e-12;

/// Root system family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "a1")]
    A1,
    #[serde(rename = "bc1")]
    Bc1,
    #[serde(rename = "a1xa1")]
    A1xA1,
    #[serde(rename = "a2")]
    A2,
    #[serde(rename = "b2")]
    B2,
    #[serde(rename = "g2")]
    G2,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::A1,
        Family::Bc1,
        Family::A1xA1,
        Family::A2,
        Family::B2,
        Family::G2,
    ];

    pub fn rank(self) -> usize {
        match self {
            Family::A1 | Family::Bc1 => 1,
            _ => 2,
        }
    }

    /// Chamber angle of a rank-two family.
    pub fn theta(self) -> Option<f64> {
        match self {
            Family::A2 => Some(PI / 3.0),
            Family::B2 => Some(PI / 4.0),
            Family::G2 => Some(PI / 6.0),
            Family::A1xA1 => Some(PI / 2.0),
            Family::A1 | Family::Bc1 => None,
        }
    }

    /// Order of the Weyl group.
    pub fn weyl_order(self) -> usize {
        match self {
            Family::A1 | Family::Bc1 => 2,
            Family::A1xA1 => 4,
            Family::A2 => 6,
            Family::B2 => 8,
            Family::G2 => 12,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::A1 => "a1",
            Family::Bc1 => "bc1",
            Family::A1xA1 => "a1xa1",
            Family::A2 => "a2",
            Family::B2 => "b2",
            Family::G2 => "g2",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// A point of the flat in orthonormal coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChamberPoint(pub Vec<f64>);

impl ChamberPoint {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        ChamberPoint(coords.into())
    }

    pub fn origin(rank: usize) -> Self {
        ChamberPoint(vec![0.0; rank])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn dist(&self, other: &ChamberPoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl Deref for ChamberPoint {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<&[f64]> for ChamberPoint {
    fn from(v: &[f64]) -> Self {
        ChamberPoint(v.to_vec())
    }
}

/// A positive root with its multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub coeffs: Vec<f64>,
    pub mult: u32,
}

impl Root {
    pub fn eval(&self, z: &[f64]) -> f64 {
        self.coeffs.iter().zip(z).map(|(a, x)| a * x).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|a| a * a).sum()
    }
}

/// An element of the Weyl group, stored as an orthogonal `r × r` matrix
/// acting on the flat (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct WeylElement {
    rank: usize,
    m: Vec<f64>,
}

impl WeylElement {
    fn identity(rank: usize) -> Self {
        let mut m = vec![0.0; rank * rank];
        for i in 0..rank {
            m[i * rank + i] = 1.0;
        }
        WeylElement { rank, m }
    }

    /// Reflection in the hyperplane `ker λ`.
    fn reflection(coeffs: &[f64]) -> Self {
        let rank = coeffs.len();
        let nsq: f64 = coeffs.iter().map(|a| a * a).sum();
        let mut m = WeylElement::identity(rank).m;
        for i in 0..rank {
            for j in 0..rank {
                m[i * rank + j] -= 2.0 * coeffs[i] * coeffs[j] / nsq;
            }
        }
        WeylElement { rank, m }
    }

    fn compose(&self, other: &WeylElement) -> WeylElement {
        let r = self.rank;
        let mut m = vec![0.0; r * r];
        for i in 0..r {
            for j in 0..r {
                m[i * r + j] = (0..r).map(|k| self.m[i * r + k] * other.m[k * r + j]).sum();
            }
        }
        WeylElement { rank: r, m }
    }

    fn approx_eq(&self, other: &WeylElement) -> bool {
        self.m.iter().zip(&other.m).all(|(a, b)| (a - b).abs() <= WEYL_TOL)
    }

    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        let r = self.rank;
        (0..r).map(|i| (0..r).map(|k| self.m[i * r + k] * z[k]).sum()).collect()
    }

    pub fn matrix(&self) -> &[f64] {
        &self.m
    }

    pub fn is_identity(&self) -> bool {
        self.approx_eq(&WeylElement::identity(self.rank))
    }
}

/// Position of a point relative to the Weyl chamber.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Interior,
    /// On the wall of the given positive root (index into `roots()`).
    Wall(usize),
    Exterior,
}

/// Serialized form: `{family, theta, roots: [{coeffs, mult}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RootSystemData {
    family: Family,
    theta: Option<f64>,
    roots: Vec<Root>,
}

/// A restricted root system of rank one or two with multiplicities.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RootSystemData", into = "RootSystemData")]
pub struct RootSystem {
    family: Family,
    theta: Option<f64>,
    roots: Vec<Root>,
    /// Weyl orbit id of each positive root.
    orbit: Vec<usize>,
    /// Indices of the fundamental roots in `roots`.
    simple: Vec<usize>,
    weyl: Vec<WeylElement>,
}

impl From<RootSystem> for RootSystemData {
    fn from(rs: RootSystem) -> Self {
        RootSystemData {
            family: rs.family,
            theta: rs.theta,
            roots: rs.roots,
        }
    }
}

impl TryFrom<RootSystemData> for RootSystem {
    type Error = Error;

    fn try_from(d: RootSystemData) -> Result<Self> {
        RootSystem::from_roots(d.family, d.roots, d.theta)
    }
}

/// Closure of a set of generators into a finite matrix group.
fn generate_group(rank: usize, gens: &[WeylElement]) -> Result<Vec<WeylElement>> {
    let mut group = vec![WeylElement::identity(rank)];
    let mut frontier = 0;
    while frontier < group.len() {
        let g = group[frontier].clone();
        for s in gens {
            let h = s.compose(&g);
            if !group.iter().any(|k| k.approx_eq(&h)) {
                group.push(h);
                if group.len() > 64 {
                    return Err(Error::InvalidRootSystem(
                        "reflections do not generate a finite group".into(),
                    ));
                }
            }
        }
        frontier += 1;
    }
    Ok(group)
}

fn fundamental_roots(family: Family) -> Vec<Vec<f64>> {
    match family.theta() {
        Some(theta) => vec![vec![0.0, 1.0], vec![theta.sin(), -theta.cos()]],
        None => vec![vec![1.0]],
    }
}

/// A point strictly inside the chamber, used to decide root positivity.
fn chamber_reference(family: Family) -> Vec<f64> {
    match family.theta() {
        Some(theta) => vec![(theta / 2.0).cos(), (theta / 2.0).sin()],
        None => vec![1.0],
    }
}

fn coeffs_close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= WEYL_TOL)
}

impl RootSystem {
    /// Builds the positive system of `family` with multiplicities given per
    /// root orbit.
    ///
    /// Labels: rank one uses `lambda` and (bc1 only) `2lambda`; rank two uses
    /// `lambda1` / `lambda2` for the Weyl orbit of each fundamental root.
    /// `all` sets every orbit not otherwise named.
    pub fn build(family: Family, multiplicities: &BTreeMap<String, i64>) -> Result<Self> {
        for (label, &value) in multiplicities {
            if value <= 0 {
                return Err(Error::NonPositiveMultiplicity {
                    label: label.clone(),
                    value,
                });
            }
        }
        let default = multiplicities.get("all").copied();

        if family.rank() == 1 {
            let allowed: &[&str] = match family {
                Family::A1 => &["lambda", "all"],
                _ => &["lambda", "2lambda", "all"],
            };
            if let Some(bad) = multiplicities.keys().find(|k| !allowed.contains(&k.as_str())) {
                return Err(Error::UnknownRootLabel(bad.clone()));
            }
            let get = |label: &str| -> Result<u32> {
                multiplicities
                    .get(label)
                    .copied()
                    .or(default)
                    .map(|v| v as u32)
                    .ok_or_else(|| Error::MissingMultiplicity(label.to_string()))
            };
            let mut roots = vec![Root {
                coeffs: vec![1.0],
                mult: get("lambda")?,
            }];
            if family == Family::Bc1 {
                roots.push(Root {
                    coeffs: vec![2.0],
                    mult: get("2lambda")?,
                });
            }
            return RootSystem::from_roots(family, roots, None);
        }

        if let Some(bad) = multiplicities
            .keys()
            .find(|k| !["lambda1", "lambda2", "all"].contains(&k.as_str()))
        {
            return Err(Error::UnknownRootLabel(bad.clone()));
        }
        let (coeffs, orbit, simple, weyl) = Self::closure(family)?;
        let n_orbits = orbit.iter().max().map_or(0, |m| m + 1);
        let mut orbit_mult: Vec<Option<u32>> = vec![None; n_orbits];
        for (k, label) in ["lambda1", "lambda2"].iter().enumerate() {
            if let Some(&v) = multiplicities.get(*label) {
                let o = orbit[simple[k]];
                match orbit_mult[o] {
                    Some(prev) if prev != v as u32 => {
                        return Err(Error::ConflictingMultiplicity(format!(
                            "lambda1 and lambda2 lie in one orbit for {family} but were given {prev} and {v}"
                        )))
                    }
                    _ => orbit_mult[o] = Some(v as u32),
                }
            }
        }
        for (o, slot) in orbit_mult.iter_mut().enumerate() {
            if slot.is_none() {
                *slot = default.map(|v| v as u32);
            }
            if slot.is_none() {
                let label = if orbit[simple[0]] == o { "lambda1" } else { "lambda2" };
                return Err(Error::MissingMultiplicity(label.to_string()));
            }
        }
        let roots = coeffs
            .into_iter()
            .zip(&orbit)
            .map(|(c, &o)| Root {
                coeffs: c,
                mult: orbit_mult[o].unwrap(),
            })
            .collect();
        Ok(RootSystem {
            family,
            theta: family.theta(),
            roots,
            orbit,
            simple,
            weyl,
        })
    }

    /// Positive roots (fundamental first), their orbit ids, the fundamental
    /// indices and the Weyl group of a rank-two family.
    #[allow(clippy::type_complexity)]
    fn closure(family: Family) -> Result<(Vec<Vec<f64>>, Vec<usize>, Vec<usize>, Vec<WeylElement>)> {
        let fund = fundamental_roots(family);
        let gens: Vec<WeylElement> = fund.iter().map(|a| WeylElement::reflection(a)).collect();
        let weyl = generate_group(2, &gens)?;
        let reference = chamber_reference(family);

        let mut roots: Vec<Vec<f64>> = fund.clone();
        let mut orbit: Vec<usize> = vec![0, 1];
        for (k, a) in fund.iter().enumerate() {
            for w in &weyl {
                let b = w.apply(a);
                let pos: f64 = b.iter().zip(&reference).map(|(x, y)| x * y).sum();
                if pos <= 0.0 {
                    continue;
                }
                if let Some(idx) = roots.iter().position(|c| coeffs_close(c, &b)) {
                    // The second fundamental root can turn out to be in the orbit of the first.
                    if orbit[idx] != orbit[k] {
                        let (keep, drop) = (orbit[idx].min(orbit[k]), orbit[idx].max(orbit[k]));
                        orbit.iter_mut().filter(|o| **o == drop).for_each(|o| *o = keep);
                    }
                } else {
                    roots.push(b);
                    orbit.push(orbit[k]);
                }
            }
        }
        // Deterministic order: fundamental roots first, the rest by angle.
        let mut rest: Vec<(Vec<f64>, usize)> = roots.drain(2..).zip(orbit.drain(2..)).collect();
        rest.sort_by(|a, b| {
            let ta = a.0[1].atan2(a.0[0]);
            let tb = b.0[1].atan2(b.0[0]);
            ta.partial_cmp(&tb).unwrap()
        });
        for (c, o) in rest {
            roots.push(c);
            orbit.push(o);
        }
        // Compact orbit ids to 0..k.
        let mut ids: Vec<usize> = orbit.clone();
        ids.sort_unstable();
        ids.dedup();
        let orbit = orbit.iter().map(|o| ids.iter().position(|x| x == o).unwrap()).collect();
        Ok((roots, orbit, vec![0, 1], weyl))
    }

    /// Rebuilds a root system from raw root data, checking that it is closed
    /// under its own Weyl reflections.
    pub fn from_roots(family: Family, roots: Vec<Root>, theta: Option<f64>) -> Result<Self> {
        let rank = family.rank();
        if roots.is_empty() {
            return Err(Error::InvalidRootSystem("no roots".into()));
        }
        for r in &roots {
            if r.coeffs.len() != rank {
                return Err(Error::RankMismatch {
                    expected: rank,
                    got: r.coeffs.len(),
                });
            }
            if r.norm_sq() <= WEYL_TOL * WEYL_TOL {
                return Err(Error::InvalidRootSystem("zero root covector".into()));
            }
            if r.mult == 0 {
                return Err(Error::NonPositiveMultiplicity {
                    label: format!("{:?}", r.coeffs),
                    value: 0,
                });
            }
        }
        if let (Some(expected), Some(given)) = (family.theta(), theta) {
            if (expected - given).abs() > 1e-9 {
                return Err(Error::InvalidRootSystem(format!(
                    "theta {given} does not match family {family} (expected {expected})"
                )));
            }
        }
        if rank == 1 {
            let weyl = vec![WeylElement::identity(1), WeylElement::reflection(&[1.0])];
            let orbit = (0..roots.len()).collect();
            if roots.iter().any(|r| r.coeffs[0] <= 0.0) {
                return Err(Error::InvalidRootSystem("rank-one roots must be positive".into()));
            }
            return Ok(RootSystem {
                family,
                theta: None,
                roots,
                orbit,
                simple: vec![0],
                weyl,
            });
        }

        let (coeffs, orbit, simple, weyl) = Self::closure(family)?;
        if coeffs.len() != roots.len() || !coeffs.iter().all(|c| roots.iter().any(|r| coeffs_close(&r.coeffs, c))) {
            return Err(Error::InvalidRootSystem(format!(
                "roots do not form the positive system of {family}"
            )));
        }
        // Reorder the given multiplicities to the canonical root order.
        let canonical: Vec<Root> = coeffs
            .iter()
            .map(|c| {
                let r = roots.iter().find(|r| coeffs_close(&r.coeffs, c)).unwrap();
                Root {
                    coeffs: c.clone(),
                    mult: r.mult,
                }
            })
            .collect();
        for (i, a) in canonical.iter().enumerate() {
            for (j, b) in canonical.iter().enumerate() {
                if orbit[i] == orbit[j] && a.mult != b.mult {
                    return Err(Error::ConflictingMultiplicity(format!(
                        "roots #{i} and #{j} are W-conjugate with multiplicities {} and {}",
                        a.mult, b.mult
                    )));
                }
            }
        }
        Ok(RootSystem {
            family,
            theta: family.theta(),
            roots: canonical,
            orbit,
            simple,
            weyl,
        })
    }

    /// Convenience constructor with every multiplicity equal to `m`.
    pub fn uniform(family: Family, m: u32) -> Self {
        let mut map = BTreeMap::new();
        map.insert("all".to_string(), m as i64);
        RootSystem::build(family, &map).expect("uniform multiplicities are always valid")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rank(&self) -> usize {
        self.family.rank()
    }

    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn simple_roots(&self) -> &[usize] {
        &self.simple
    }

    /// Weyl-orbit id of each positive root.
    pub fn orbits(&self) -> &[usize] {
        &self.orbit
    }

    pub fn weyl_group(&self) -> &[WeylElement] {
        &self.weyl
    }

    /// Sum of the multiplicities.
    pub fn total_multiplicity(&self) -> u32 {
        self.roots.iter().map(|r| r.mult).sum()
    }

    /// Total dimension `n = r + Σ m_λ`.
    pub fn total_dimension(&self) -> u32 {
        self.rank() as u32 + self.total_multiplicity()
    }

    /// The generating reflections (one per fundamental root).
    pub fn generators(&self) -> Vec<WeylElement> {
        self.simple
            .iter()
            .map(|&i| WeylElement::reflection(&self.roots[i].coeffs))
            .collect()
    }

    /// `{w·Z : w ∈ W}` with duplicates removed.
    pub fn weyl_orbit(&self, z: &ChamberPoint) -> Vec<ChamberPoint> {
        let mut out: Vec<ChamberPoint> = Vec::with_capacity(self.weyl.len());
        for w in &self.weyl {
            let p = ChamberPoint(w.apply(z));
            if !out.iter().any(|q| q.dist(&p) <= WEYL_TOL) {
                out.push(p);
            }
        }
        out
    }

    pub fn chamber_membership(&self, z: &ChamberPoint) -> Membership {
        let values: Vec<f64> = self.roots.iter().map(|r| r.eval(z)).collect();
        if values.iter().any(|&v| v < -WEYL_TOL) {
            Membership::Exterior
        } else if let Some(i) = values.iter().position(|&v| v.abs() <= WEYL_TOL) {
            Membership::Wall(i)
        } else {
            Membership::Interior
        }
    }

    /// Maps `Z` into the closed chamber by fundamental reflections. Returns
    /// the image and the index (into `weyl_group()`) of the element applied.
    pub fn reflect_into_chamber(&self, z: &ChamberPoint) -> (ChamberPoint, usize) {
        let rank = self.rank();
        let mut p = z.0.clone();
        let mut g = WeylElement::identity(rank);
        let gens = self.generators();
        // Each reflection strictly decreases the number of negative roots, so
        // |Δ₊| + 1 rounds always suffice.
        for _ in 0..=self.roots.len() + 1 {
            let neg = self.simple.iter().position(|&i| self.roots[i].eval(&p) < -WEYL_TOL);
            match neg {
                None => {
                    let idx = self
                        .weyl
                        .iter()
                        .position(|w| w.approx_eq(&g))
                        .expect("composed reflections must be a group element");
                    return (ChamberPoint(p), idx);
                }
                Some(k) => {
                    p = gens[k].apply(&p);
                    g = gens[k].compose(&g);
                }
            }
        }
        panic!("reflect_into_chamber did not converge: reflections are mis-specified");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mults(pairs: &[(&str, i64)]) -> BTreeMap<String, i64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn a1_single_root() {
        let rs = RootSystem::build(Family::A1, &mults(&[("lambda", 1)])).unwrap();
        assert_eq!(rs.rank(), 1);
        assert_eq!(rs.roots().len(), 1);
        assert_eq!(rs.roots()[0].eval(&[3.5]), 3.5);
        assert_eq!(rs.total_dimension(), 2);
    }

    #[test]
    fn bc1_needs_doubled_root() {
        let err = RootSystem::build(Family::Bc1, &mults(&[("lambda", 1)])).unwrap_err();
        assert!(matches!(err, Error::MissingMultiplicity(ref l) if l == "2lambda"));
        let rs = RootSystem::build(Family::Bc1, &mults(&[("lambda", 2), ("2lambda", 1)])).unwrap();
        assert_eq!(rs.roots()[1].coeffs, vec![2.0]);
        assert_eq!(rs.total_dimension(), 4);
    }

    #[test]
    fn a1xa1_is_orthogonal() {
        let rs = RootSystem::build(Family::A1xA1, &mults(&[("lambda1", 1), ("lambda2", 1)])).unwrap();
        assert_eq!(rs.theta(), Some(PI / 2.0));
        assert_eq!(rs.roots().len(), 2);
        let dot: f64 = rs.roots()[0]
            .coeffs
            .iter()
            .zip(&rs.roots()[1].coeffs)
            .map(|(a, b)| a * b)
            .sum();
        assert!(dot.abs() < 1e-15);
    }

    #[test]
    fn a2_has_three_positive_roots() {
        let rs = RootSystem::build(Family::A2, &mults(&[("all", 1)])).unwrap();
        assert_eq!(rs.roots().len(), 3);
        // The third root is λ₁ + λ₂.
        let sum: Vec<f64> = (0..2)
            .map(|i| rs.roots()[0].coeffs[i] + rs.roots()[1].coeffs[i])
            .collect();
        assert!(coeffs_close(&rs.roots()[2].coeffs, &sum));
        assert_eq!(rs.orbits(), &[0, 0, 0]);
    }

    #[test]
    fn positive_system_sizes() {
        for (f, n) in [(Family::B2, 4), (Family::G2, 6)] {
            let rs = RootSystem::uniform(f, 1);
            assert_eq!(rs.roots().len(), n, "{f}");
            assert_eq!(rs.orbits().iter().max(), Some(&1), "{f} has two orbits");
        }
    }

    #[test]
    fn multiplicity_errors() {
        assert!(matches!(
            RootSystem::build(Family::A2, &mults(&[("lambda1", 0)])),
            Err(Error::NonPositiveMultiplicity { .. })
        ));
        assert!(matches!(
            RootSystem::build(Family::B2, &mults(&[("lambda1", 1)])),
            Err(Error::MissingMultiplicity(_))
        ));
        assert!(matches!(
            RootSystem::build(Family::A2, &mults(&[("lambda1", 1), ("lambda2", 2)])),
            Err(Error::ConflictingMultiplicity(_))
        ));
        assert!(matches!(
            RootSystem::build(Family::A1, &mults(&[("2lambda", 1)])),
            Err(Error::UnknownRootLabel(_))
        ));
        assert!(matches!("e8".parse::<Family>(), Err(Error::UnknownFamily(_))));
    }

    #[test]
    fn fundamental_parametrization() {
        for f in [Family::A1xA1, Family::A2, Family::B2, Family::G2] {
            let rs = RootSystem::uniform(f, 1);
            let th = f.theta().unwrap();
            let z = [0.37, -1.25];
            assert!((rs.roots()[0].eval(&z) - z[1]).abs() < 1e-15);
            assert!((rs.roots()[1].eval(&z) - (z[0] * th.sin() - z[1] * th.cos())).abs() < 1e-15);
        }
    }

    #[test]
    fn chamber_membership_examples() {
        let a2 = RootSystem::uniform(Family::A2, 1);
        assert_eq!(
            a2.chamber_membership(&ChamberPoint::new([1.0, 0.3])),
            Membership::Interior
        );
        assert_eq!(
            a2.chamber_membership(&ChamberPoint::new([1.0, -0.1])),
            Membership::Exterior
        );
        let a1a1 = RootSystem::uniform(Family::A1xA1, 1);
        assert_eq!(
            a1a1.chamber_membership(&ChamberPoint::new([1.0, 0.0])),
            Membership::Wall(0)
        );
    }

    #[test]
    fn orbit_examples() {
        let a1a1 = RootSystem::uniform(Family::A1xA1, 1);
        let orbit = a1a1.weyl_orbit(&ChamberPoint::new([1.0, 2.0]));
        assert_eq!(orbit.len(), 4);
        for (x, y) in [(1.0, 2.0), (-1.0, 2.0), (1.0, -2.0), (-1.0, -2.0)] {
            assert!(orbit
                .iter()
                .any(|p| (p[0] - x).abs() < 1e-12 && (p[1] - y).abs() < 1e-12));
        }
        let a2 = RootSystem::uniform(Family::A2, 1);
        assert_eq!(a2.weyl_orbit(&ChamberPoint::new([1.0, 0.2])).len(), 6);
        assert_eq!(a2.weyl_orbit(&ChamberPoint::origin(2)).len(), 1);
    }

    #[test]
    fn reflect_examples() {
        let a1a1 = RootSystem::uniform(Family::A1xA1, 1);
        let (p, w) = a1a1.reflect_into_chamber(&ChamberPoint::new([-1.0, 2.0]));
        assert!((p[0] - 1.0).abs() < 1e-15 && (p[1] - 2.0).abs() < 1e-15);
        let g = &a1a1.weyl_group()[w];
        let close = |u: Vec<f64>, v: [f64; 2]| (u[0] - v[0]).abs() < 1e-14 && (u[1] - v[1]).abs() < 1e-14;
        assert!(close(g.apply(&[-1.0, 2.0]), [1.0, 2.0]));
        assert!(close(g.apply(&[3.0, 5.0]), [-3.0, 5.0]));

        let (q, w) = a1a1.reflect_into_chamber(&ChamberPoint::new([1.0, 2.0]));
        assert_eq!(q.0, vec![1.0, 2.0]);
        assert!(a1a1.weyl_group()[w].is_identity());
    }

    #[test]
    fn json_round_trip() {
        let rs = RootSystem::uniform(Family::G2, 2);
        let s = serde_json::to_string(&rs).unwrap();
        let back: RootSystem = serde_json::from_str(&s).unwrap();
        assert_eq!(back.roots(), rs.roots());
        assert_eq!(back.weyl_group().len(), 12);

        let bad = r#"{"family":"a2","theta":1.0,"roots":[{"coeffs":[0,1],"mult":1}]}"#;
        assert!(serde_json::from_str::<RootSystem>(bad).is_err());
    }
}
