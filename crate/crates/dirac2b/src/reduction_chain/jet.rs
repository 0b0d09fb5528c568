//! Matrix-valued functions of `r` carried as their derivative sequence
//! `(f, f', f'', ...)`, combined with the Leibniz rule.

use nalgebra::DMatrix;

fn binomial(n: usize, k: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

#[derive(Debug, Clone)]
pub struct MatJet(pub Vec<DMatrix<f64>>);

impl MatJet {
    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn value(&self) -> &DMatrix<f64> {
        &self.0[0]
    }

    pub fn mul(&self, other: &MatJet) -> MatJet {
        let n = self.0.len().min(other.0.len());
        MatJet(
            (0..n)
                .map(|d| {
                    let mut acc = &self.0[0] * &other.0[d];
                    for k in 1..=d {
                        acc += (&self.0[k] * &other.0[d - k]) * binomial(d, k);
                    }
                    acc
                })
                .collect(),
        )
    }

    pub fn add(&self, other: &MatJet) -> MatJet {
        let n = self.0.len().min(other.0.len());
        MatJet((0..n).map(|d| &self.0[d] + &other.0[d]).collect())
    }

    pub fn sub(&self, other: &MatJet) -> MatJet {
        let n = self.0.len().min(other.0.len());
        MatJet((0..n).map(|d| &self.0[d] - &other.0[d]).collect())
    }

    pub fn scale(&self, s: f64) -> MatJet {
        MatJet(self.0.iter().map(|m| m * s).collect())
    }

    pub fn neg(&self) -> MatJet {
        self.scale(-1.0)
    }

    /// Derivative jet; one order shorter.
    pub fn derivative(&self) -> MatJet {
        MatJet(self.0[1..].to_vec())
    }

    pub fn transpose(&self) -> MatJet {
        MatJet(self.0.iter().map(|m| m.transpose()).collect())
    }

    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> MatJet {
        MatJet(
            self.0
                .iter()
                .map(|m| m.view((rows.start, cols.start), (rows.len(), cols.len())).into_owned())
                .collect(),
        )
    }

    pub fn congruence(&self, o: &DMatrix<f64>) -> MatJet {
        let ot = o.transpose();
        MatJet(self.0.iter().map(|m| o * m * &ot).collect())
    }

    /// Inverse jet; `None` if the value is singular.
    pub fn inverse(&self) -> Option<MatJet> {
        let x0 = self.0[0].clone().try_inverse()?;
        let mut out = vec![x0.clone()];
        for d in 1..self.0.len() {
            let mut acc = DMatrix::zeros(x0.nrows(), x0.ncols());
            for k in 1..=d {
                acc += (&self.0[k] * &out[d - k]) * binomial(d, k);
            }
            out.push(-(&x0 * acc));
        }
        Some(MatJet(out))
    }
}

/// Scalar derivative sequence.
#[derive(Debug, Clone)]
pub struct ScalarJet(pub Vec<f64>);

impl ScalarJet {
    pub fn sqrt(&self) -> ScalarJet {
        let s0 = self.0[0].sqrt();
        let mut s = vec![s0];
        for d in 1..self.0.len() {
            let mut acc = self.0[d];
            for k in 1..d {
                acc -= binomial(d, k) * s[k] * s[d - k];
            }
            s.push(acc / (2.0 * s0));
        }
        ScalarJet(s)
    }

    pub fn recip(&self) -> ScalarJet {
        let x0 = 1.0 / self.0[0];
        let mut x = vec![x0];
        for d in 1..self.0.len() {
            let mut acc = 0.0;
            for k in 1..=d {
                acc += binomial(d, k) * self.0[k] * x[d - k];
            }
            x.push(-x0 * acc);
        }
        ScalarJet(x)
    }
}

/// Diagonal matrix jet from per-entry scalar jets.
pub fn diag_jet(entries: &[ScalarJet]) -> MatJet {
    let n = entries.len();
    let len = entries.iter().map(|e| e.0.len()).min().unwrap_or(0);
    MatJet(
        (0..len)
            .map(|d| DMatrix::from_fn(n, n, |i, k| if i == k { entries[i].0[d] } else { 0.0 }))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_jet(c: &[f64], r: f64, order: usize) -> ScalarJet {
        // derivatives of sum c_k r^k
        ScalarJet(
            (0..=order)
                .map(|d| {
                    c.iter()
                        .enumerate()
                        .map(|(k, ck)| {
                            if k < d {
                                0.0
                            } else {
                                let mut f = 1.0;
                                for i in 0..d {
                                    f *= (k - i) as f64;
                                }
                                ck * f * r.powi((k - d) as i32)
                            }
                        })
                        .sum()
                })
                .collect(),
        )
    }

    #[test]
    fn sqrt_and_recip() {
        let f = poly_jet(&[2.0, 1.0, 0.5, 0.1], 0.7, 4);
        let s = f.sqrt();
        let r = 0.7f64;
        let h = 1e-3;
        let val = |x: f64| (2.0 + x + 0.5 * x * x + 0.1 * x * x * x).sqrt();
        let d1 = (val(r + h) - val(r - h)) / (2.0 * h);
        let d2 = (val(r + h) - 2.0 * val(r) + val(r - h)) / (h * h);
        assert!((s.0[1] - d1).abs() < 1e-6);
        assert!((s.0[2] - d2).abs() < 1e-5);
        let inv = f.recip();
        let ival = |x: f64| 1.0 / (2.0 + x + 0.5 * x * x + 0.1 * x * x * x);
        let i1 = (ival(r + h) - ival(r - h)) / (2.0 * h);
        assert!((inv.0[1] - i1).abs() < 1e-6);
    }

    #[test]
    fn matrix_inverse_jet() {
        let a = MatJet(vec![
            DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]),
            DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.2, -0.4]),
            DMatrix::from_row_slice(2, 2, &[0.05, 0.0, 0.0, 0.3]),
        ]);
        let inv = a.inverse().unwrap();
        let prod = a.mul(&inv);
        assert!((&prod.0[0] - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-14);
        assert!(prod.0[1].abs().max() < 1e-14);
        assert!(prod.0[2].abs().max() < 1e-14);
    }
}
