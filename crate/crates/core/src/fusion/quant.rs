//! Blockwise symmetric absmax 4-bit quantization.
//!
//! Each block of `block_size` consecutive elements (row-major) stores one
//! scale `absmax / 7` and one signed code in `[-7, 7]` per element. Codes are
//! packed two per byte for storage.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const QUANT_LEVELS: f64 = 7.0;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedTensor {
    codes: Vec<i8>,
    scales: Vec<f64>,
    shape: (usize, usize),
    block_size: usize,
}

impl QuantizedTensor {
    pub fn quantize(tensor: ArrayView2<'_, f64>, block_size: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::invalid("quantization block size must be at least 1"));
        }
        let values: Vec<f64> = tensor.iter().copied().collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("cannot quantize non-finite values"));
        }
        let mut codes = Vec::with_capacity(values.len());
        let mut scales = Vec::with_capacity(values.len().div_ceil(block_size));
        for block in values.chunks(block_size) {
            let absmax = block.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = absmax / QUANT_LEVELS;
            scales.push(scale);
            for &v in block {
                let code = if scale == 0.0 { 0.0 } else { (v / scale).round().clamp(-QUANT_LEVELS, QUANT_LEVELS) };
                codes.push(code as i8);
            }
        }
        Ok(QuantizedTensor { codes, scales, shape: tensor.dim(), block_size })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn codes(&self) -> &[i8] {
        &self.codes
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    #[inline]
    fn value(&self, flat: usize) -> f64 {
        f64::from(self.codes[flat]) * self.scales[flat / self.block_size]
    }

    pub fn dequantize(&self) -> Array2<f64> {
        let (r, c) = self.shape;
        Array2::from_shape_fn((r, c), |(i, j)| self.value(i * c + j))
    }

    pub fn dequantize_row(&self, row: usize) -> Vec<f64> {
        let c = self.shape.1;
        (row * c..(row + 1) * c).map(|k| self.value(k)).collect()
    }

    /// `x · Wᵀ` without materializing `W`; `x` is `n × cols`, the result `n × rows`.
    pub fn matmul_transposed(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let (rows, cols) = self.shape;
        assert_eq!(x.ncols(), cols, "matmul_transposed: inner dimension");
        let mut out = Array2::zeros((x.nrows(), rows));
        for i in 0..rows {
            let w = self.dequantize_row(i);
            for (n, xr) in x.outer_iter().enumerate() {
                out[[n, i]] = xr.iter().zip(&w).map(|(a, b)| a * b).sum();
            }
        }
        out
    }

    /// `y · W`; `y` is `n × rows`, the result `n × cols`.
    pub fn left_matmul(&self, y: ArrayView2<'_, f64>) -> Array2<f64> {
        let (rows, cols) = self.shape;
        assert_eq!(y.ncols(), rows, "left_matmul: inner dimension");
        let mut out = Array2::zeros((y.nrows(), cols));
        for i in 0..rows {
            let w = self.dequantize_row(i);
            for n in 0..y.nrows() {
                let coeff = y[[n, i]];
                if coeff == 0.0 {
                    continue;
                }
                for (o, wv) in out.row_mut(n).iter_mut().zip(&w) {
                    *o += coeff * wv;
                }
            }
        }
        out
    }

    /// Two's-complement nibbles, low nibble first.
    pub fn packed_codes(&self) -> Vec<u8> {
        self.codes
            .chunks(2)
            .map(|pair| {
                let lo = (pair[0] as u8) & 0x0F;
                let hi = pair.get(1).map_or(0, |&c| (c as u8) & 0x0F);
                lo | (hi << 4)
            })
            .collect()
    }

    pub fn from_packed(packed: &[u8], scales: Vec<f64>, shape: (usize, usize), block_size: usize) -> Result<Self> {
        let len = shape.0 * shape.1;
        if block_size == 0 || packed.len() != len.div_ceil(2) || scales.len() != len.div_ceil(block_size) {
            return Err(Error::invalid("packed quantized tensor has inconsistent sizes"));
        }
        let nibble = |n: u8| -> i8 { ((n << 4) as i8) >> 4 };
        let mut codes = Vec::with_capacity(len);
        for &b in packed {
            codes.push(nibble(b & 0x0F));
            codes.push(nibble(b >> 4));
        }
        codes.truncate(len);
        if codes.iter().any(|c| c.unsigned_abs() > QUANT_LEVELS as u8) {
            return Err(Error::invalid("quantization code outside [-7, 7]"));
        }
        Ok(QuantizedTensor { codes, scales, shape, block_size })
    }
}

/// Storage form: packed codes as hex plus per-block scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedTensorRepr {
    pub rows: usize,
    pub cols: usize,
    pub block_size: usize,
    pub scales: Vec<f64>,
    pub codes_hex: String,
}

impl From<&QuantizedTensor> for QuantizedTensorRepr {
    fn from(q: &QuantizedTensor) -> Self {
        QuantizedTensorRepr {
            rows: q.shape.0,
            cols: q.shape.1,
            block_size: q.block_size,
            scales: q.scales.clone(),
            codes_hex: hex::encode(q.packed_codes()),
        }
    }
}

impl TryFrom<QuantizedTensorRepr> for QuantizedTensor {
    type Error = Error;

    fn try_from(r: QuantizedTensorRepr) -> Result<Self> {
        let packed = hex::decode(&r.codes_hex).map_err(|e| Error::invalid(format!("bad code hex: {e}")))?;
        QuantizedTensor::from_packed(&packed, r.scales, (r.rows, r.cols), r.block_size)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_tensor_round_trips_exactly() {
        let z = Array2::<f64>::zeros((3, 5));
        let q = QuantizedTensor::quantize(z.view(), 4).unwrap();
        assert_eq!(q.dequantize(), z);
        assert!(q.scales().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn hand_quantized_block() {
        let t = array![[7.0, -7.0, 3.5]];
        let q = QuantizedTensor::quantize(t.view(), 3).unwrap();
        assert_eq!(q.codes(), &[7, -7, 4]);
        assert_eq!(q.dequantize(), array![[7.0, -7.0, 4.0]]);
    }

    #[test]
    fn block_zero_is_rejected() {
        assert!(QuantizedTensor::quantize(array![[1.0]].view(), 0).is_err());
    }

    #[test]
    fn matmuls_agree_with_dequantized_dense() {
        let w = array![[0.5, -1.0, 2.0], [1.5, 0.25, -0.75]];
        let q = QuantizedTensor::quantize(w.view(), 4).unwrap();
        let d = q.dequantize();
        let x = array![[1.0, 2.0, 3.0], [-1.0, 0.5, 0.0]];
        let got = q.matmul_transposed(x.view());
        let want = x.dot(&d.t());
        assert!((&got - &want).iter().all(|v| v.abs() < 1e-12));
        let y = array![[1.0, -2.0], [0.5, 0.25]];
        let got = q.left_matmul(y.view());
        let want = y.dot(&d);
        assert!((&got - &want).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn packing_round_trips() {
        let w = array![[0.1, -0.9, 0.33, 0.0, -0.2], [0.7, 0.05, -0.6, 0.45, 0.9]];
        let q = QuantizedTensor::quantize(w.view(), 3).unwrap();
        let repr = QuantizedTensorRepr::from(&q);
        let back = QuantizedTensor::try_from(repr).unwrap();
        assert_eq!(back, q);
    }
}
