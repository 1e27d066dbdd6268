use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64 as C64;

/// A 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[C64 { re: 0.0, im: 0.0 }; 2]; 2]);
    pub const IDENTITY: Mat2 = Mat2([
        [C64 { re: 1.0, im: 0.0 }, C64 { re: 0.0, im: 0.0 }],
        [C64 { re: 0.0, im: 0.0 }, C64 { re: 1.0, im: 0.0 }],
    ]);

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn conj(&self) -> Self {
        Mat2(self.0.map(|row| row.map(|z| z.conj())))
    }

    /// `sigma_1 M sigma_1`.
    pub fn sigma1_conjugate(&self) -> Self {
        let m = &self.0;
        Mat2([[m[1][1], m[1][0]], [m[0][1], m[0][0]]])
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2(self.0.map(|row| row.map(|z| z * s)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.0[r][c]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let mut r = self;
        r += o;
        r
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, o: Mat2) {
        for i in 0..2 {
            for j in 0..2 {
                self.0[i][j] += o.0[i][j];
            }
        }
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let mut r = self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] -= o.0[i][j];
            }
        }
        r
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Mul<C64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: C64) -> Mat2 {
        self.scale(s)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        self.scale(C64::new(s, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_determinant() {
        let a = Mat2::new(C64::new(1.0, 1.0), C64::new(2.0, 0.0), C64::new(0.0, -1.0), C64::new(3.0, 0.5));
        let b = a.sigma1_conjugate();
        assert!(((a * b).det() - a.det() * b.det()).norm() < 1e-14);
        assert_eq!(a * Mat2::IDENTITY, a);
        assert_eq!(b.sigma1_conjugate(), a);
    }
}
