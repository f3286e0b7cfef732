//! Dense real polynomials, coefficients stored in ascending powers, generic
//! over the float type so the root-free distance can run in double-double.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Float;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T = f64>(Vec<T>);

impl<T: Float> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(T::zero());
        }
        Poly(coeffs)
    }

    pub fn zero() -> Self {
        Poly(vec![T::zero()])
    }

    pub fn constant(c: T) -> Self {
        Poly(vec![c])
    }

    /// Build from coefficients listed highest power first.
    pub fn from_descending(desc: &[T]) -> Self {
        Poly::new(desc.iter().rev().copied().collect())
    }

    pub fn coeffs(&self) -> &[T] {
        &self.0
    }

    /// Nominal degree (length - 1), counting trailing zero coefficients.
    pub fn nominal_degree(&self) -> usize {
        self.0.len() - 1
    }

    /// Degree after dropping exactly-zero leading coefficients; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn trimmed(&self) -> Poly<T> {
        Poly(self.0[..=self.degree()].to_vec())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn eval(&self, z: T) -> T {
        self.0.iter().rev().fold(T::zero(), |acc, &c| acc * z + c)
    }

    /// `z^d q(1/z)` with `d` the nominal degree.
    pub fn reciprocal(&self) -> Poly<T> {
        Poly(self.0.iter().rev().copied().collect())
    }

    pub fn derivative(&self) -> Poly<T> {
        if self.0.len() == 1 {
            return Poly::zero();
        }
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * T::from(k).expect("small integer"))
                .collect(),
        )
    }

    /// `z * self`.
    pub fn shift(&self) -> Poly<T> {
        let mut c = Vec::with_capacity(self.0.len() + 1);
        c.push(T::zero());
        c.extend_from_slice(&self.0);
        Poly(c)
    }

    pub fn scale(&self, s: T) -> Poly<T> {
        Poly(self.0.iter().map(|&c| c * s).collect())
    }

    pub fn pow(&self, k: usize) -> Poly<T> {
        (0..k).fold(Poly::constant(T::one()), |acc, _| &acc * self)
    }

    /// Coefficients converted to another float type.
    pub fn cast<U: Float>(&self) -> Poly<U> {
        Poly(self.0.iter().map(|&c| U::from(c).expect("finite coefficient")).collect())
    }
}

impl<T: Float> Add for &Poly<T> {
    type Output = Poly<T>;
    fn add(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.0.len().max(rhs.0.len());
        let get = |v: &[T], i: usize| v.get(i).copied().unwrap_or_else(T::zero);
        Poly((0..n).map(|i| get(&self.0, i) + get(&rhs.0, i)).collect())
    }
}

impl<T: Float> Sub for &Poly<T> {
    type Output = Poly<T>;
    fn sub(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.0.len().max(rhs.0.len());
        let get = |v: &[T], i: usize| v.get(i).copied().unwrap_or_else(T::zero);
        Poly((0..n).map(|i| get(&self.0, i) - get(&rhs.0, i)).collect())
    }
}

impl<T: Float> Mul for &Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: &Poly<T>) -> Poly<T> {
        let mut out = vec![T::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in rhs.0.iter().enumerate() {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Poly(out)
    }
}

impl<T: Float> Neg for &Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        self.scale(-T::one())
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum<T: Float>(values: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp = comp + ((sum - t) + v);
        } else {
            comp = comp + ((v - t) + sum);
        }
        sum = t;
    }
    sum + comp
}

/// Power sums `P_k = sum_i a_i^k`, `k = 0..=max_power`, of the roots of the
/// monic polynomial `p`, via Newton's identities on its coefficients.
pub fn root_power_sums<T: Float>(p: &Poly<T>, max_power: usize) -> Vec<T> {
    let p = p.trimmed();
    let n = p.degree();
    let lead = p.0[n];
    // c[i] is the coefficient of z^{n-i} in the monic normalisation.
    let c: Vec<T> = (0..=n).map(|i| p.0[n - i] / lead).collect();
    let int = |k: usize| T::from(k).expect("small integer");
    let mut sums = Vec::with_capacity(max_power + 1);
    sums.push(int(n));
    for k in 1..=max_power {
        let mut terms: Vec<T> = (1..k.min(n + 1)).map(|i| -c[i] * sums[k - i]).collect();
        if k <= n {
            terms.push(-int(k) * c[k]);
        }
        sums.push(compensated_sum(terms));
    }
    sums
}

/// `sum_k q(a_k)` over the roots `a_k` of `p`, evaluated from power sums only.
pub fn sum_over_roots<T: Float>(power_sums: &[T], q: &Poly<T>) -> T {
    assert!(
        power_sums.len() > q.nominal_degree(),
        "not enough power sums for a degree-{} polynomial",
        q.nominal_degree()
    );
    compensated_sum(q.0.iter().zip(power_sums).map(|(&c, &s)| c * s))
}

/// Sylvester matrix of `p` and `q` at their true degrees (exactly-zero
/// leading coefficients dropped), row-major. Empty when either is constant.
pub fn sylvester<T: Float>(p: &Poly<T>, q: &Poly<T>) -> Vec<Vec<T>> {
    let p = p.trimmed();
    let q = q.trimmed();
    let n = p.degree();
    let m = q.degree();
    if n == 0 || m == 0 {
        return Vec::new();
    }
    let size = n + m;
    let mut syl = vec![vec![T::zero(); size]; size];
    for row in 0..m {
        for (k, &c) in p.0.iter().rev().enumerate() {
            syl[row][row + k] = c;
        }
    }
    for row in 0..n {
        for (k, &c) in q.0.iter().rev().enumerate() {
            syl[m + row][row + k] = c;
        }
    }
    syl
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant<T: Float>(mut a: Vec<Vec<T>>) -> T {
    let n = a.len();
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).expect("finite entries"))
            .expect("non-empty range");
        if a[pivot][col].is_zero() {
            return T::zero();
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det = det * a[col][col];
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] = a[row][k] - f * v;
            }
        }
    }
    det
}

/// Resultant as the determinant of the Sylvester matrix. `p` must be
/// non-constant.
pub fn resultant<T: Float>(p: &Poly<T>, q: &Poly<T>) -> T {
    let n = p.degree();
    let q = q.trimmed();
    if q.degree() == 0 {
        return q.0[0].powi(n as i32);
    }
    determinant(sylvester(p, &q))
}

/// Hadamard bound on `|Res(p, q)|`: the product of Sylvester row norms.
pub fn resultant_bound<T: Float>(p: &Poly<T>, q: &Poly<T>) -> T {
    let q = q.trimmed();
    if q.degree() == 0 {
        return q.0[0].abs().powi(p.degree() as i32);
    }
    sylvester(p, &q)
        .iter()
        .map(|r| r.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt())
        .fold(T::one(), |acc, v| acc * v)
}
