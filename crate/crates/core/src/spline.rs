//! Cubic spline interpolation with natural or clamped end conditions,
//! exact piecewise integration, and Gauss-Legendre quadrature helpers.

/// End condition for a cubic spline.
#[derive(Clone, Copy, Debug)]
pub enum EndCondition {
    /// Second derivative zero at both ends.
    Natural,
    /// Prescribed first derivatives at the two ends.
    Clamped(f64, f64),
}

/// Piecewise cubic interpolant through `(x_i, y_i)`.
///
/// Outside the knot range the spline is extended linearly with the endpoint
/// slope, which keeps evaluation well defined for the slightly enlarged
/// domains used by chart extraction.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: &[f64], y: &[f64], end: EndCondition) -> Self {
        assert_eq!(x.len(), y.len());
        let n = x.len();
        assert!(n >= 3, "spline needs at least three knots");
        for w in x.windows(2) {
            assert!(w[1] > w[0], "knots must be strictly increasing");
        }

        // Tridiagonal system for the knot second derivatives.
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];

        for i in 1..n - 1 {
            let hm = x[i] - x[i - 1];
            let hp = x[i + 1] - x[i];
            sub[i] = hm / 6.0;
            diag[i] = (hm + hp) / 3.0;
            sup[i] = hp / 6.0;
            rhs[i] = (y[i + 1] - y[i]) / hp - (y[i] - y[i - 1]) / hm;
        }
        match end {
            EndCondition::Natural => {
                diag[0] = 1.0;
                diag[n - 1] = 1.0;
            }
            EndCondition::Clamped(d0, dn) => {
                let h0 = x[1] - x[0];
                diag[0] = h0 / 3.0;
                sup[0] = h0 / 6.0;
                rhs[0] = (y[1] - y[0]) / h0 - d0;
                let hn = x[n - 1] - x[n - 2];
                sub[n - 1] = hn / 6.0;
                diag[n - 1] = hn / 3.0;
                rhs[n - 1] = dn - (y[n - 1] - y[n - 2]) / hn;
            }
        }

        // Thomas algorithm.
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = sup[0] / diag[0];
        d[0] = rhs[0] / diag[0];
        for i in 1..n {
            let denom = diag[i] - sub[i] * c[i - 1];
            c[i] = sup[i] / denom;
            d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
        }
        let mut m = vec![0.0; n];
        m[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }

        CubicSpline {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        }
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.x.len();
        match self
            .x
            .binary_search_by(|v| v.partial_cmp(&x).expect("non-finite knot query"))
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// Polynomial coefficients on segment `i`: S(x) = a + b t + c t^2 + d t^3
    /// with t = x - x_i.
    fn coeffs(&self, i: usize) -> (f64, f64, f64, f64) {
        let h = self.x[i + 1] - self.x[i];
        let a = self.y[i];
        let c = self.m[i] / 2.0;
        let d = (self.m[i + 1] - self.m[i]) / (6.0 * h);
        let b = (self.y[i + 1] - self.y[i]) / h - h * (2.0 * self.m[i] + self.m[i + 1]) / 6.0;
        (a, b, c, d)
    }

    pub fn eval(&self, xq: f64) -> f64 {
        let n = self.x.len();
        if xq < self.x[0] {
            return self.y[0] + self.deriv(self.x[0]) * (xq - self.x[0]);
        }
        if xq > self.x[n - 1] {
            return self.y[n - 1] + self.deriv(self.x[n - 1]) * (xq - self.x[n - 1]);
        }
        let i = self.segment(xq);
        let (a, b, c, d) = self.coeffs(i);
        let t = xq - self.x[i];
        a + t * (b + t * (c + t * d))
    }

    pub fn deriv(&self, xq: f64) -> f64 {
        let n = self.x.len();
        let xc = xq.clamp(self.x[0], self.x[n - 1]);
        let i = self.segment(xc);
        let (_, b, c, d) = self.coeffs(i);
        let t = xc - self.x[i];
        b + t * (2.0 * c + 3.0 * t * d)
    }

    pub fn deriv2(&self, xq: f64) -> f64 {
        let n = self.x.len();
        if xq <= self.x[0] {
            return self.m[0];
        }
        if xq >= self.x[n - 1] {
            return self.m[n - 1];
        }
        let i = self.segment(xq);
        let h = self.x[i + 1] - self.x[i];
        let t = xq - self.x[i];
        self.m[i] + (self.m[i + 1] - self.m[i]) * t / h
    }

    /// Exact integral of the spline from the first knot to each knot.
    pub fn cumulative_at_knots(&self) -> Vec<f64> {
        let n = self.x.len();
        let mut acc = vec![0.0; n];
        for i in 0..n - 1 {
            let h = self.x[i + 1] - self.x[i];
            let (a, b, c, d) = self.coeffs(i);
            let seg = h * (a + h * (b / 2.0 + h * (c / 3.0 + h * d / 4.0)));
            acc[i + 1] = acc[i] + seg;
        }
        acc
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }
}

/// Nodes and weights of the 5-point Gauss-Legendre rule on [-1, 1].
pub const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// 5-point Gauss-Legendre quadrature of `f` over `[a, b]`.
pub fn gauss5<F: Fn(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (t, w) in GL5 {
        acc += w * f(mid + half * t);
    }
    acc * half
}
