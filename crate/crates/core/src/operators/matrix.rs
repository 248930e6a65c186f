use serde::{Deserialize, Serialize};

/// Symmetric matrix of size 1–3, stored as its upper triangle
/// (00, 01, 02, 11, 12, 22).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    e: [f64; 6],
}

const SLOT: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];

impl SymMatrix {
    pub fn zeros(dim: usize) -> SymMatrix {
        assert!((1..=3).contains(&dim), "matrix dimension must be 1..=3");
        SymMatrix { dim, e: [0.0; 6] }
    }

    pub fn identity(dim: usize) -> SymMatrix {
        SymMatrix::diag(&vec![1.0; dim])
    }

    pub fn diag(d: &[f64]) -> SymMatrix {
        let mut m = SymMatrix::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m.set(i, i, *v);
        }
        m
    }

    /// Builds from a closure over the upper triangle (i ≤ j).
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> SymMatrix {
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Q diag(d) Qᵀ where the columns of `q` are orthonormal.
    pub fn from_eigen(q: &[[f64; 3]; 3], d: &[f64]) -> SymMatrix {
        let dim = d.len();
        SymMatrix::from_fn(dim, |i, j| (0..dim).map(|k| q[i][k] * d[k] * q[j][k]).sum())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.e[SLOT[i][j]]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.e[SLOT[i][j]] = v;
    }

    pub fn add(&self, o: &SymMatrix) -> SymMatrix {
        SymMatrix::from_fn(self.dim, |i, j| self.get(i, j) + o.get(i, j))
    }

    pub fn sub(&self, o: &SymMatrix) -> SymMatrix {
        SymMatrix::from_fn(self.dim, |i, j| self.get(i, j) - o.get(i, j))
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix::from_fn(self.dim, |i, j| s * self.get(i, j))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius inner product A:M.
    pub fn contract(&self, o: &SymMatrix) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.get(i, j) * o.get(i, j);
            }
        }
        s
    }

    pub fn frobenius(&self) -> f64 {
        self.contract(self).sqrt()
    }

    pub fn mul_vec(&self, v: &[f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = (0..self.dim).map(|j| self.get(i, j) * v[j]).sum();
        }
        out
    }

    pub fn det(&self) -> f64 {
        let g = |i, j| self.get(i, j);
        match self.dim {
            1 => g(0, 0),
            2 => g(0, 0) * g(1, 1) - g(0, 1) * g(0, 1),
            _ => {
                g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(1, 2))
                    - g(0, 1) * (g(0, 1) * g(2, 2) - g(1, 2) * g(0, 2))
                    + g(0, 2) * (g(0, 1) * g(1, 2) - g(1, 1) * g(0, 2))
            }
        }
    }

    /// Eigenvalues in ascending order (first `dim` entries meaningful).
    ///
    /// Closed form in dimensions 1–2, trigonometric cubic in dimension 3
    /// with cyclic Jacobi as fallback.
    pub fn eigenvalues(&self) -> [f64; 3] {
        match self.dim {
            1 => [self.get(0, 0), 0.0, 0.0],
            2 => {
                let (a, b, c) = (self.get(0, 0), self.get(0, 1), self.get(1, 1));
                let mean = 0.5 * (a + c);
                let rad = (0.5 * (a - c)).hypot(b);
                [mean - rad, mean + rad, 0.0]
            }
            _ => match self.eigenvalues_cubic() {
                Some(ev) => ev,
                None => self.eigen_jacobi().0,
            },
        }
    }

    fn eigenvalues_cubic(&self) -> Option<[f64; 3]> {
        let g = |i, j| self.get(i, j);
        let p1 = g(0, 1) * g(0, 1) + g(0, 2) * g(0, 2) + g(1, 2) * g(1, 2);
        let scale = self.frobenius();
        if scale == 0.0 {
            return Some([0.0; 3]);
        }
        if p1 == 0.0 {
            let mut d = [g(0, 0), g(1, 1), g(2, 2)];
            d.sort_by(f64::total_cmp);
            return Some(d);
        }
        let q = self.trace() / 3.0;
        let p2 = (g(0, 0) - q).powi(2) + (g(1, 1) - q).powi(2) + (g(2, 2) - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let b = SymMatrix::from_fn(3, |i, j| {
            (self.get(i, j) - if i == j { q } else { 0.0 }) / p
        });
        let r = (0.5 * b.det()).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e_hi = q + 2.0 * p * phi.cos();
        let e_lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let e_mid = 3.0 * q - e_hi - e_lo;
        let ev = [e_lo, e_mid, e_hi];
        // Accept only if the characteristic invariants are reproduced.
        let c2: f64 = g(0, 0) * g(1, 1) + g(0, 0) * g(2, 2) + g(1, 1) * g(2, 2) - p1;
        let ok = (ev[0] * ev[1] + ev[0] * ev[2] + ev[1] * ev[2] - c2).abs() <= 1e-12 * scale * scale
            && (ev[0] * ev[1] * ev[2] - self.det()).abs() <= 1e-12 * scale.powi(3)
            && ev[0] <= ev[1]
            && ev[1] <= ev[2];
        ok.then_some(ev)
    }

    /// Cyclic Jacobi: ascending eigenvalues and eigenvectors as columns.
    pub fn eigen_jacobi(&self) -> ([f64; 3], [[f64; 3]; 3]) {
        let n = self.dim;
        let mut a = [[0.0; 3]; 3];
        for (i, row) in a.iter_mut().enumerate().take(n) {
            for (j, v) in row.iter_mut().enumerate().take(n) {
                *v = self.get(i, j);
            }
        }
        let mut v = [[0.0; 3]; 3];
        for (i, row) in v.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        let scale = self.frobenius().max(f64::MIN_POSITIVE);
        for _sweep in 0..64 {
            let off: f64 = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum();
            if off.sqrt() <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q] == 0.0 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                    for row in v.iter_mut().take(n) {
                        let vkp = row[p];
                        let vkq = row[q];
                        row[p] = c * vkp - s * vkq;
                        row[q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| a[x][x].total_cmp(&a[y][y]));
        let mut vals = [0.0; 3];
        let mut vecs = [[0.0; 3]; 3];
        for (slot, &k) in order.iter().enumerate() {
            vals[slot] = a[k][k];
            for r in 0..n {
                vecs[r][slot] = v[r][k];
            }
        }
        (vals, vecs)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues()[self.dim - 1]
    }

    /// Operator (spectral) norm.
    pub fn op_norm(&self) -> f64 {
        let ev = self.eigenvalues();
        ev[..self.dim].iter().fold(0.0, |m, e| m.max(e.abs()))
    }
}
