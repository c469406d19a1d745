use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::validate_variables;

/// Width of the excluded bands at the poles of a colatitude coordinate.
pub const POLE_BAND: f64 = 1e-3;

/// How a coordinate wraps, if at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoordKind {
    /// Ordinary open interval.
    Open,
    /// Periodic with the given period; the box spans exactly one period.
    Periodic { period: f64 },
    /// Colatitude on a sphere, `(0, pi)` minus pole bands.
    Polar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coordinate {
    pub name: String,
    pub kind: CoordKind,
    pub lo: f64,
    pub hi: f64,
}

impl Coordinate {
    pub fn open(name: &str, lo: f64, hi: f64) -> Coordinate {
        Coordinate {
            name: name.to_string(),
            kind: CoordKind::Open,
            lo,
            hi,
        }
    }

    /// Unbounded coordinate; suitable for target charts.
    pub fn line(name: &str) -> Coordinate {
        Coordinate::open(name, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn periodic(name: &str, lo: f64, period: f64) -> Coordinate {
        Coordinate {
            name: name.to_string(),
            kind: CoordKind::Periodic { period },
            lo,
            hi: lo + period,
        }
    }

    /// Angle with period `2 pi` starting at 0.
    pub fn angle(name: &str) -> Coordinate {
        Coordinate::periodic(name, 0.0, 2.0 * PI)
    }

    pub fn polar(name: &str) -> Coordinate {
        Coordinate {
            name: name.to_string(),
            kind: CoordKind::Polar,
            lo: POLE_BAND,
            hi: PI - POLE_BAND,
        }
    }
}

/// A single coordinate chart: ordered names plus a box per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    names: Arc<[String]>,
    coords: Vec<Coordinate>,
}

impl Chart {
    pub fn new(coords: Vec<Coordinate>) -> Result<Chart> {
        if coords.is_empty() {
            return Err(Error::Invalid("a chart needs at least one coordinate".into()));
        }
        let names: Vec<&str> = coords.iter().map(|c| c.name.as_str()).collect();
        let names = validate_variables(&names)?;
        for c in &coords {
            if c.lo.is_nan() || c.hi.is_nan() || c.lo >= c.hi {
                return Err(Error::Invalid(format!(
                    "coordinate `{}` has an empty interval ({}, {})",
                    c.name, c.lo, c.hi
                )));
            }
            if let CoordKind::Periodic { period } = c.kind {
                if !(period > 0.0 && period.is_finite()) {
                    return Err(Error::Invalid(format!(
                        "coordinate `{}` has non-positive period {period}",
                        c.name
                    )));
                }
            }
        }
        Ok(Chart { names, coords })
    }

    /// Open chart with the same interval on every coordinate.
    pub fn cube(names: &[&str], lo: f64, hi: f64) -> Result<Chart> {
        Chart::new(names.iter().map(|n| Coordinate::open(n, lo, hi)).collect())
    }

    /// Unbounded chart (target manifolds).
    pub fn lines(names: &[&str]) -> Result<Chart> {
        Chart::new(names.iter().map(|n| Coordinate::line(n)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn coordinates(&self) -> &[Coordinate] {
        &self.coords
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(&self.coords)
                .all(|(x, c)| *x > c.lo && *x < c.hi)
    }

    /// Whether every coordinate is periodic or polar (integration over the box is closed).
    pub fn is_closed(&self) -> bool {
        self.coords
            .iter()
            .all(|c| !matches!(c.kind, CoordKind::Open))
    }

    /// The box shrunk by `frac` of its width on each side.
    pub fn shrunk_box(&self, frac: f64) -> Vec<(f64, f64)> {
        self.coords
            .iter()
            .map(|c| {
                let w = c.hi - c.lo;
                (c.lo + frac * w, c.hi - frac * w)
            })
            .collect()
    }

    /// Disjoint union of coordinates, `self` first.
    pub fn product(&self, other: &Chart) -> Result<Chart> {
        for n in other.names.iter() {
            if self.index_of(n).is_some() {
                return Err(Error::CoordinateClash(n.clone()));
            }
        }
        let mut coords = self.coords.clone();
        coords.extend(other.coords.iter().cloned());
        Chart::new(coords)
    }

    fn finite_box(&self, frac: f64) -> Result<Vec<(f64, f64)>> {
        let b = self.shrunk_box(frac);
        if let Some((c, _)) = self
            .coords
            .iter()
            .zip(&b)
            .find(|(_, (lo, hi))| !(lo.is_finite() && hi.is_finite()))
        {
            return Err(Error::Invalid(format!(
                "coordinate `{}` has an unbounded interval; sampling needs a finite box",
                c.name
            )));
        }
        Ok(b)
    }

    /// `count` points drawn uniformly from the box shrunk by 1% per side.
    pub fn random_points(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let b = self.finite_box(0.01)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..count)
            .map(|_| b.iter().map(|(lo, hi)| rng.gen_range(*lo..*hi)).collect())
            .collect())
    }

    /// Cell-centered grid with `per_axis` points per coordinate, last coordinate fastest.
    pub fn grid_points(&self, per_axis: usize) -> Result<Vec<Vec<f64>>> {
        let b = self.finite_box(0.0)?;
        let m = self.dim();
        let total = per_axis.checked_pow(m as u32).ok_or_else(|| {
            Error::Invalid(format!("grid of {per_axis}^{m} points is too large"))
        })?;
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; m];
        for _ in 0..total {
            out.push(
                idx.iter()
                    .zip(&b)
                    .map(|(&k, (lo, hi))| lo + (k as f64 + 0.5) * (hi - lo) / per_axis as f64)
                    .collect(),
            );
            crate::tensor::increment(&mut idx, &vec![per_axis; m]);
        }
        Ok(out)
    }

    /// Copy with coordinates renamed in order.
    pub fn renamed(&self, names: &[&str]) -> Result<Chart> {
        if names.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} names for a {}-dimensional chart",
                names.len(),
                self.dim()
            )));
        }
        Chart::new(
            self.coords
                .iter()
                .zip(names)
                .map(|(c, n)| Coordinate {
                    name: n.to_string(),
                    ..c.clone()
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Chart::new(vec![]).is_err());
        assert!(Chart::new(vec![Coordinate::open("x", 1.0, 0.0)]).is_err());
        assert!(Chart::new(vec![Coordinate::periodic("x", 0.0, -1.0)]).is_err());
        assert!(Chart::cube(&["x", "x"], 0.0, 1.0).is_err());
    }

    #[test]
    fn product_rejects_clashes() {
        let a = Chart::cube(&["x", "y"], 0.0, 1.0).unwrap();
        let b = Chart::cube(&["y"], 0.0, 1.0).unwrap();
        assert_eq!(a.product(&b), Err(Error::CoordinateClash("y".into())));
        let c = Chart::new(vec![Coordinate::angle("t")]).unwrap();
        let ac = a.product(&c).unwrap();
        assert_eq!(ac.dim(), 3);
        assert!(!ac.is_closed());
        assert!(c.is_closed());
    }

    #[test]
    fn sampling() {
        let c = Chart::cube(&["x", "y"], -1.0, 1.0).unwrap();
        let g = c.grid_points(2).unwrap();
        assert_eq!(g, vec![vec![-0.5, -0.5], vec![-0.5, 0.5], vec![0.5, -0.5], vec![0.5, 0.5]]);
        let r = c.random_points(100, 3).unwrap();
        assert_eq!(r, c.random_points(100, 3).unwrap());
        assert!(r.iter().all(|p| p.iter().all(|x| x.abs() <= 0.98)));
        assert!(Chart::lines(&["y"]).unwrap().random_points(1, 0).is_err());
    }

    #[test]
    fn shrunk_box_and_containment() {
        let c = Chart::cube(&["x"], 0.0, 10.0).unwrap();
        assert_eq!(c.shrunk_box(0.01), vec![(0.1, 9.9)]);
        assert!(c.contains(&[5.0]));
        assert!(!c.contains(&[10.0]));
    }
}
