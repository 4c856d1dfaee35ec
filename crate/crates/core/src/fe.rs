//! Reference-element machinery: Gauss rules, tensor-product Lagrange bases on
//! `[-1, 1]^2` and cubic Hermite shape functions on `[0, 1]`.

/// Gauss-Legendre points and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    match n {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let a = 1.0 / 3f64.sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        3 => {
            let a = (3.0f64 / 5.0).sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let s = (6.0f64 / 5.0).sqrt();
            let a = ((3.0 - 2.0 * s) / 7.0).sqrt();
            let b = ((3.0 + 2.0 * s) / 7.0).sqrt();
            let wa = (18.0 + 30f64.sqrt()) / 36.0;
            let wb = (18.0 - 30f64.sqrt()) / 36.0;
            (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
        }
        5 => {
            let r = (10.0f64 / 7.0).sqrt();
            let a = (5.0 - 2.0 * r).sqrt() / 3.0;
            let b = (5.0 + 2.0 * r).sqrt() / 3.0;
            let w0 = 128.0 / 225.0;
            let s70 = 70f64.sqrt();
            let wa = (322.0 + 13.0 * s70) / 900.0;
            let wb = (322.0 - 13.0 * s70) / 900.0;
            (vec![-b, -a, 0.0, a, b], vec![wb, wa, w0, wa, wb])
        }
        _ => panic!("gauss_legendre: {n} points not tabulated"),
    }
}

/// Tensor-product rule on the reference square.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn tensor(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                points.push([x[i], x[j]]);
                weights.push(w[i] * w[j]);
            }
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// 1D quadratic Lagrange basis on nodes {-1, 0, 1}: values and derivatives.
#[inline]
pub fn lagrange2(s: f64) -> ([f64; 3], [f64; 3]) {
    (
        [0.5 * s * (s - 1.0), 1.0 - s * s, 0.5 * s * (s + 1.0)],
        [s - 0.5, -2.0 * s, s + 0.5],
    )
}

/// 1D linear Lagrange basis on nodes {-1, 1}.
#[inline]
pub fn lagrange1(s: f64) -> ([f64; 2], [f64; 2]) {
    ([0.5 * (1.0 - s), 0.5 * (1.0 + s)], [-0.5, 0.5])
}

/// Q2 basis on the reference square; local node `a + 3 b` sits at lattice
/// offset `(a, b)`. Returns values and reference gradients.
pub fn q2_basis(p: [f64; 2]) -> ([f64; 9], [[f64; 2]; 9]) {
    let (lx, dx) = lagrange2(p[0]);
    let (ly, dy) = lagrange2(p[1]);
    let mut val = [0.0; 9];
    let mut grad = [[0.0; 2]; 9];
    for b in 0..3 {
        for a in 0..3 {
            let k = a + 3 * b;
            val[k] = lx[a] * ly[b];
            grad[k] = [dx[a] * ly[b], lx[a] * dy[b]];
        }
    }
    (val, grad)
}

/// Q1 basis on the reference square; local node `a + 2 b` sits at corner `(a, b)`.
pub fn q1_basis(p: [f64; 2]) -> ([f64; 4], [[f64; 2]; 4]) {
    let (lx, dx) = lagrange1(p[0]);
    let (ly, dy) = lagrange1(p[1]);
    let mut val = [0.0; 4];
    let mut grad = [[0.0; 2]; 4];
    for b in 0..2 {
        for a in 0..2 {
            let k = a + 2 * b;
            val[k] = lx[a] * ly[b];
            grad[k] = [dx[a] * ly[b], lx[a] * dy[b]];
        }
    }
    (val, grad)
}

/// Cubic Hermite shape functions on an element of length `len`, evaluated at
/// the local coordinate `s` in `[0, 1]`. Ordering: (value0, slope0, value1, slope1).
/// Returns values, first and second derivatives with respect to the physical
/// coordinate.
pub fn hermite(s: f64, len: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
    let s2 = s * s;
    let s3 = s2 * s;
    let val = [
        1.0 - 3.0 * s2 + 2.0 * s3,
        len * (s - 2.0 * s2 + s3),
        3.0 * s2 - 2.0 * s3,
        len * (-s2 + s3),
    ];
    let d1 = [
        (-6.0 * s + 6.0 * s2) / len,
        1.0 - 4.0 * s + 3.0 * s2,
        (6.0 * s - 6.0 * s2) / len,
        -2.0 * s + 3.0 * s2,
    ];
    let d2 = [
        (-6.0 + 12.0 * s) / (len * len),
        (-4.0 + 6.0 * s) / len,
        (6.0 - 12.0 * s) / (len * len),
        (-2.0 + 6.0 * s) / len,
    ];
    (val, d1, d2)
}

#[inline]
pub fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

#[inline]
pub fn inv2(m: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let d = det2(m);
    [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
}

/// Cofactor matrix, `det(m) * m^{-T}`.
#[inline]
pub fn cof2(m: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [[m[1][1], -m[1][0]], [-m[0][1], m[0][0]]]
}

#[inline]
pub fn matmul2(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// Largest singular value of a 2x2 matrix.
pub fn spectral_norm2(m: &[[f64; 2]; 2]) -> f64 {
    let a = m[0][0] * m[0][0] + m[1][0] * m[1][0];
    let b = m[0][0] * m[0][1] + m[1][0] * m[1][1];
    let d = m[0][1] * m[0][1] + m[1][1] * m[1][1];
    let tr = a + d;
    let disc = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
    (0.5 * (tr + disc)).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rules_integrate_polynomials_exactly() {
        for n in 1..=5 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn q2_partition_of_unity() {
        for p in [[0.3, -0.7], [-1.0, 1.0], [0.0, 0.0]] {
            let (v, g) = q2_basis(p);
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            let gx: f64 = g.iter().map(|g| g[0]).sum();
            let gy: f64 = g.iter().map(|g| g[1]).sum();
            assert!(gx.abs() < 1e-14 && gy.abs() < 1e-14);
        }
    }

    #[test]
    fn hermite_reproduces_cubic() {
        // f(z) = z^3 on [1, 3]
        let len = 2.0;
        let dofs = [1.0, 3.0, 27.0, 27.0];
        for s in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let (v, d1, d2) = hermite(s, len);
            let z = 1.0 + s * len;
            let f: f64 = v.iter().zip(&dofs).map(|(a, b)| a * b).sum();
            let f1: f64 = d1.iter().zip(&dofs).map(|(a, b)| a * b).sum();
            let f2: f64 = d2.iter().zip(&dofs).map(|(a, b)| a * b).sum();
            assert!((f - z * z * z).abs() < 1e-12);
            assert!((f1 - 3.0 * z * z).abs() < 1e-12);
            assert!((f2 - 6.0 * z).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_norm_of_rotation_and_diag() {
        let r = [[0.0, -1.0], [1.0, 0.0]];
        assert!((spectral_norm2(&r) - 1.0).abs() < 1e-15);
        let d = [[3.0, 0.0], [0.0, -5.0]];
        assert!((spectral_norm2(&d) - 5.0).abs() < 1e-14);
    }
}
