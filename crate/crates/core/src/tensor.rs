//! Dense tensors evaluated at a point.

use std::fmt;

use crate::error::{Error, Result};

/// Position of an index slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variance {
    Up,
    Down,
}

/// Dense multi-index array of reals with per-slot variance.
///
/// Storage is row-major: the last index varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorValue {
    shape: Vec<usize>,
    variance: Vec<Variance>,
    data: Vec<f64>,
}

impl TensorValue {
    pub fn zeros(shape: &[usize], variance: &[Variance]) -> TensorValue {
        assert_eq!(shape.len(), variance.len(), "one variance per slot");
        TensorValue {
            shape: shape.to_vec(),
            variance: variance.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], variance: &[Variance], data: Vec<f64>) -> Result<TensorValue> {
        if shape.len() != variance.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} slots but {} variance flags",
                shape.len(),
                variance.len()
            )));
        }
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} needs {n} entries, got {}",
                data.len()
            )));
        }
        Ok(TensorValue {
            shape: shape.to_vec(),
            variance: variance.to_vec(),
            data,
        })
    }

    pub fn from_fn(
        shape: &[usize],
        variance: &[Variance],
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> TensorValue {
        let mut t = TensorValue::zeros(shape, variance);
        let mut idx = vec![0; shape.len()];
        for k in 0..t.data.len() {
            t.data[k] = f(&idx);
            increment(&mut idx, shape);
        }
        t
    }

    /// A scalar (rank 0).
    pub fn scalar(v: f64) -> TensorValue {
        TensorValue {
            shape: vec![],
            variance: vec![],
            data: vec![v],
        }
    }

    pub fn vector(v: Vec<f64>, variance: Variance) -> TensorValue {
        TensorValue {
            shape: vec![v.len()],
            variance: vec![variance],
            data: v,
        }
    }

    /// Matrix given row by row.
    pub fn matrix(rows: usize, cols: usize, variance: [Variance; 2], data: Vec<f64>) -> TensorValue {
        assert_eq!(rows * cols, data.len());
        TensorValue {
            shape: vec![rows, cols],
            variance: variance.to_vec(),
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &n)| {
                debug_assert!(i < n);
                acc * n + i
            })
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let k = self.offset(idx);
        self.data[k] = v;
    }

    /// Largest absolute entry; 0 for an empty tensor. NaN propagates as infinity.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m: f64, &x| {
            if x.is_nan() {
                f64::INFINITY
            } else {
                m.max(x.abs())
            }
        })
    }

    pub fn scaled(&self, s: f64) -> TensorValue {
        let mut t = self.clone();
        t.data.iter_mut().for_each(|x| *x *= s);
        t
    }

    fn check_same_shape(&self, other: &TensorValue) -> Result<()> {
        if self.shape != other.shape || self.variance != other.variance {
            return Err(Error::ShapeMismatch(format!(
                "{:?}{:?} vs {:?}{:?}",
                self.shape, self.variance, other.shape, other.variance
            )));
        }
        Ok(())
    }

    pub fn sub(&self, other: &TensorValue) -> Result<TensorValue> {
        self.check_same_shape(other)?;
        let mut t = self.clone();
        t.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a -= b);
        Ok(t)
    }

    pub fn add(&self, other: &TensorValue) -> Result<TensorValue> {
        self.check_same_shape(other)?;
        let mut t = self.clone();
        t.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
        Ok(t)
    }

    /// Contracts `slot` with a square matrix: `out[.., a, ..] = sum_b m[a][b] t[.., b, ..]`.
    fn contract_slot(&self, slot: usize, m: &TensorValue, new: Variance) -> Result<TensorValue> {
        let n = self.shape[slot];
        if m.shape != [n, n] {
            return Err(Error::ShapeMismatch(format!(
                "slot {slot} has dimension {n}, metric shape {:?}",
                m.shape
            )));
        }
        let mut variance = self.variance.clone();
        variance[slot] = new;
        let mut idx2 = vec![0; self.rank()];
        Ok(TensorValue::from_fn(&self.shape, &variance, |idx| {
            idx2.copy_from_slice(idx);
            (0..n)
                .map(|b| {
                    idx2[slot] = b;
                    m.data[idx[slot] * n + b] * self.get(&idx2)
                })
                .sum()
        }))
    }

    /// Raises `slot` with the inverse metric `ginv` (2-up).
    pub fn raise(&self, slot: usize, ginv: &TensorValue) -> Result<TensorValue> {
        if self.variance.get(slot) != Some(&Variance::Down) {
            return Err(Error::ShapeMismatch(format!("slot {slot} is not a lower index")));
        }
        self.contract_slot(slot, ginv, Variance::Up)
    }

    /// Lowers `slot` with the metric `g` (2-down).
    pub fn lower(&self, slot: usize, g: &TensorValue) -> Result<TensorValue> {
        if self.variance.get(slot) != Some(&Variance::Up) {
            return Err(Error::ShapeMismatch(format!("slot {slot} is not an upper index")));
        }
        self.contract_slot(slot, g, Variance::Down)
    }

    /// Largest deviation from symmetry in slots `(i, j)`.
    pub fn asymmetry(&self, i: usize, j: usize) -> f64 {
        let mut worst: f64 = 0.0;
        let mut idx = vec![0; self.rank()];
        let mut swapped = vec![0; self.rank()];
        for k in 0..self.data.len() {
            swapped.copy_from_slice(&idx);
            swapped.swap(i, j);
            worst = worst.max((self.data[k] - self.get(&swapped)).abs());
            increment(&mut idx, &self.shape);
        }
        worst
    }
}

/// Odometer increment of a multi-index.
pub(crate) fn increment(idx: &mut [usize], shape: &[usize]) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < shape[k] {
            return;
        }
        idx[k] = 0;
    }
}

impl fmt::Display for TensorValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rank() {
            0 => write!(f, "{:.12e}", self.data[0]),
            1 => {
                let parts: Vec<String> = self.data.iter().map(|x| format!("{x:.12e}")).collect();
                write!(f, "[{}]", parts.join(", "))
            }
            2 => {
                let cols = self.shape[1];
                for (r, row) in self.data.chunks(cols).enumerate() {
                    let parts: Vec<String> = row.iter().map(|x| format!("{x:>20.12e}")).collect();
                    if r > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "[{}]", parts.join(","))?;
                }
                Ok(())
            }
            _ => {
                let mut idx = vec![0; self.rank()];
                let mut first = true;
                for &x in &self.data {
                    if x != 0.0 {
                        if !first {
                            writeln!(f)?;
                        }
                        first = false;
                        write!(f, "{idx:?} = {x:.12e}")?;
                    }
                    increment(&mut idx, &self.shape);
                }
                if first {
                    write!(f, "(all components zero)")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Variance::{Down, Up};

    fn minkowski2() -> (TensorValue, TensorValue) {
        let g = TensorValue::matrix(2, 2, [Down, Down], vec![1.0, 0.0, 0.0, -1.0]);
        (g.clone(), TensorValue::matrix(2, 2, [Up, Up], g.data().to_vec()))
    }

    #[test]
    fn raise_then_lower_round_trips() {
        let (g, ginv) = minkowski2();
        let t = TensorValue::from_fn(&[2, 2, 2], &[Down, Up, Down], |i| {
            (i[0] * 4 + i[1] * 2 + i[2]) as f64 - 3.5
        });
        let back = t.raise(0, &ginv).unwrap().lower(0, &g).unwrap();
        assert!(back.sub(&t).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn raise_wrong_variance_is_rejected() {
        let (_, ginv) = minkowski2();
        let v = TensorValue::vector(vec![1.0, 2.0], Up);
        assert!(v.raise(0, &ginv).is_err());
    }

    #[test]
    fn shape_checks() {
        assert!(TensorValue::from_vec(&[2, 2], &[Down, Down], vec![0.0; 3]).is_err());
        let a = TensorValue::zeros(&[2], &[Up]);
        let b = TensorValue::zeros(&[2], &[Down]);
        assert!(a.sub(&b).is_err());
    }

    #[test]
    fn asymmetry_measure() {
        let t = TensorValue::matrix(2, 2, [Down, Down], vec![1.0, 2.0, 2.5, 3.0]);
        assert_eq!(t.asymmetry(0, 1), 0.5);
    }
}
