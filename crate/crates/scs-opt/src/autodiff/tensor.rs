use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Dense row-major `f64` tensor.
///
/// Rank is arbitrary but the ops in this crate only ever produce rank-1 and
/// rank-2 values; a scalar is represented as shape `[1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    /// Zero-filled tensor.  Rejects shapes whose element count overflows.
    pub fn zeros(shape: &[usize]) -> Result<Tensor> {
        let n = checked_numel(shape)?;
        Ok(Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; n],
        })
    }

    /// Wraps existing data, checking that it fills the shape exactly.
    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Tensor> {
        let n = checked_numel(shape)?;
        if n != data.len() {
            return Err(Error::Shape {
                op: "from_vec",
                node: None,
                detail: format!("shape {shape:?} holds {n} elements, data has {}", data.len()),
            });
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    /// Single-element tensor of shape `[1]`.
    pub fn scalar(x: f64) -> Tensor {
        Tensor {
            shape: vec![1],
            data: vec![x],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn numel(&self) -> usize {
        self.data.len()
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

    /// The value of a single-element tensor.
    pub fn item(&self) -> Result<f64> {
        if self.data.len() == 1 {
            Ok(self.data[0])
        } else {
            Err(Error::NotScalar {
                node: usize::MAX,
                len: self.data.len(),
            })
        }
    }

    /// `(rows, cols)` for rank-2 tensors, treating rank-1 as a single row.
    pub fn rank2(&self) -> Option<(usize, usize)> {
        match self.shape.len() {
            1 => Some((1, self.shape[0])),
            2 => Some((self.shape[0], self.shape[1])),
            _ => None,
        }
    }
}

fn checked_numel(shape: &[usize]) -> Result<usize> {
    let mut n: usize = 1;
    for &d in shape {
        n = n.checked_mul(d).ok_or(Error::Shape {
            op: "shape",
            node: None,
            detail: format!("element count of {shape:?} overflows usize"),
        })?;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_rejects_wrong_element_count() {
        let err = Tensor::from_vec(&[2, 3], vec![0.0; 5]).unwrap_err();
        assert!(matches!(err, Error::Shape { op: "from_vec", .. }));
    }

    #[test]
    fn shape_product_overflow_is_rejected() {
        let err = Tensor::zeros(&[usize::MAX, 2]).unwrap_err();
        assert!(matches!(err, Error::Shape { .. }));
    }

    #[test]
    fn scalar_is_shape_one() {
        let s = Tensor::scalar(2.5);
        assert_eq!(s.shape(), &[1]);
        assert_eq!(s.item().unwrap(), 2.5);
    }

    #[test]
    fn rank2_treats_vectors_as_single_rows() {
        let v = Tensor::from_vec(&[3], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(v.rank2(), Some((1, 3)));
        let m = Tensor::zeros(&[2, 4]).unwrap();
        assert_eq!(m.rank2(), Some((2, 4)));
    }
}
