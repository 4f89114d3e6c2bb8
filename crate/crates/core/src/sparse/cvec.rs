use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A complex vector stored as separate real and imaginary parts.
///
/// Every real operator in the crate acts on the two parts independently, so
/// this layout lets the inner solves stay in real arithmetic.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexVec {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexVec {
    pub fn new(re: Vec<f64>, im: Vec<f64>) -> Self {
        assert_eq!(re.len(), im.len(), "real and imaginary parts differ in length");
        Self { re, im }
    }

    pub fn zeros(n: usize) -> Self {
        Self { re: vec![0.0; n], im: vec![0.0; n] }
    }

    pub fn from_real(re: Vec<f64>) -> Self {
        let im = vec![0.0; re.len()];
        Self { re, im }
    }

    pub fn from_complex(z: &[Complex64]) -> Self {
        Self { re: z.iter().map(|c| c.re).collect(), im: z.iter().map(|c| c.im).collect() }
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.re.iter().zip(&self.im).map(|(&r, &i)| Complex64::new(r, i)).collect()
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn get(&self, i: usize) -> Complex64 {
        Complex64::new(self.re[i], self.im[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re.iter().chain(&self.im).map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Hermitian inner product `<self, other> = sum conj(self_i) * other_i`.
    pub fn dot(&self, other: &Self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.len() {
            acc += self.get(i).conj() * other.get(i);
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.re.iter().chain(&self.im).all(|v| v.is_finite())
    }

    /// `a * self + b * other` for complex scalars.
    pub fn lin_comb(a: Complex64, x: &Self, b: Complex64, y: &Self) -> Self {
        let n = x.len();
        let mut out = Self::zeros(n);
        for i in 0..n {
            let z = a * x.get(i) + b * y.get(i);
            out.re[i] = z.re;
            out.im[i] = z.im;
        }
        out
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        Self::lin_comb(a, self, Complex64::new(0.0, 0.0), self)
    }

    /// `self += a * x` for a complex scalar.
    pub fn axpy(&mut self, a: Complex64, x: &Self) {
        for i in 0..self.len() {
            let (xr, xi) = (x.re[i], x.im[i]);
            self.re[i] += a.re * xr - a.im * xi;
            self.im[i] += a.re * xi + a.im * xr;
        }
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: self.im.iter().map(|v| -v).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_dot_is_conjugate_linear_in_first_slot() {
        let i = Complex64::i();
        let x = ComplexVec::new(vec![1.0], vec![1.0]);
        let y = ComplexVec::new(vec![2.0], vec![0.0]);
        assert_eq!(x.dot(&y), Complex64::new(2.0, -2.0));
        assert_eq!(x.scaled(i).dot(&y), -i * x.dot(&y));
    }

    #[test]
    fn axpy_matches_lin_comb() {
        let a = Complex64::new(0.5, -2.0);
        let x = ComplexVec::new(vec![1.0, -3.0], vec![0.25, 4.0]);
        let mut y = ComplexVec::new(vec![2.0, 1.0], vec![-1.0, 0.0]);
        let expect = ComplexVec::lin_comb(Complex64::new(1.0, 0.0), &y, a, &x);
        y.axpy(a, &x);
        assert_eq!(y, expect);
    }
}
