//! Shared oracles for the integration suites. Everything here is
//! independent of the library's spectral rotation path.

use num_complex::Complex64;

/// Dense complex matrix just big enough for oracle work.
#[derive(Clone)]
pub struct Dense {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl Dense {
    pub fn zeros(dim: usize) -> Self {
        Dense { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn scale(&self, s: Complex64) -> Dense {
        Dense { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, rhs: &Dense) -> Dense {
        Dense {
            dim: self.dim,
            data: self.data.iter().zip(rhs.data.iter()).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Dense) -> Dense {
        let n = self.dim;
        let mut out = Dense::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..n {
                    out.data[i * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        out
    }

    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// exp(A) by scaling-and-squaring with a 24-term Taylor series.
pub fn expm(a: &Dense) -> Dense {
    let norm = a.max_norm() * a.dim as f64;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a.scale(Complex64::new(1.0 / 2f64.powi(squarings as i32), 0.0));
    let mut result = Dense::identity(a.dim);
    let mut term = Dense::identity(a.dim);
    for k in 1..=24 {
        term = term.matmul(&scaled).scale(Complex64::new(1.0 / k as f64, 0.0));
        result = result.add(&term);
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

/// Copy one of the library's operators into the oracle representation.
pub fn dense_from_operator(op: &mzsim::spin::OperatorMatrix) -> Dense {
    let dim = op.dim();
    let mut out = Dense::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            out.data[r * dim + c] = op.entry(r, c);
        }
    }
    out
}

/// Largest entrywise deviation between an oracle matrix and a library unitary.
pub fn max_diff_unitary(a: &Dense, u: &mzsim::spin::UnitaryMatrix) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..a.dim {
        for c in 0..a.dim {
            worst = worst.max((a.at(r, c) - u.entry(r, c)).norm());
        }
    }
    worst
}
