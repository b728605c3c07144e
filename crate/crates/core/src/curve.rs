//! Discrete differential geometry of open planar curves.
//!
//! Curves are sampled on a uniform parameter grid over [0, 1] and oriented
//! left to right along the supporting line. The unit normal is the
//! counterclockwise rotation of the unit tangent, `n = R tau`, and the scalar
//! curvature is defined through `kappa_vec = kappa * n`. With this pairing an
//! upper circular arc traversed left to right has negative scalar curvature.

use crate::error::Error;
use crate::spline::{gauss5, CubicSpline, EndCondition};
use crate::vec2::Vec2;
use crate::Result;

/// Metric values below this are treated as a degenerate parametrization.
pub const METRIC_FLOOR: f64 = 1e-10;

/// Minimum number of intervals; fourth-order stencils need the support.
pub const MIN_INTERVALS: usize = 8;

/// A discretized open planar curve on a uniform grid over [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct SampledCurve {
    sigma: Vec<f64>,
    points: Vec<Vec2>,
}

/// Per-node tangent, normal, scalar curvature and metric of a curve.
#[derive(Clone, Debug)]
pub struct DifferentialData {
    pub tangent: Vec<Vec2>,
    pub normal: Vec<Vec2>,
    pub kappa: Vec<f64>,
    pub metric: Vec<f64>,
}

/// One scalar value per node of an owning grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Self {
        ScalarField { values }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl SampledCurve {
    /// Build a curve from node positions on the uniform grid.
    pub fn from_points(points: Vec<Vec2>) -> Result<Self> {
        if points.len() < MIN_INTERVALS + 1 {
            return Err(Error::IncompatibleInitialCurve(format!(
                "need at least {} nodes, got {}",
                MIN_INTERVALS + 1,
                points.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::IncompatibleInitialCurve(
                "non-finite node position".into(),
            ));
        }
        let n = points.len() - 1;
        let sigma = (0..=n).map(|i| i as f64 / n as f64).collect();
        Ok(SampledCurve { sigma, points })
    }

    /// Build a curve from an explicit grid; the grid must be uniform on [0, 1].
    pub fn new(sigma: Vec<f64>, points: Vec<Vec2>) -> Result<Self> {
        if sigma.len() != points.len() {
            return Err(Error::IncompatibleInitialCurve(
                "grid and point counts differ".into(),
            ));
        }
        let n = sigma.len() - 1;
        let h = 1.0 / n as f64;
        let uniform = sigma
            .iter()
            .enumerate()
            .all(|(i, &s)| (s - i as f64 * h).abs() < 1e-12);
        if !uniform || sigma[0] != 0.0 || (sigma[n] - 1.0).abs() > 1e-15 {
            return Err(Error::IncompatibleInitialCurve(
                "grid must be uniform on [0, 1]".into(),
            ));
        }
        Self::from_points(points)
    }

    pub fn n_intervals(&self) -> usize {
        self.points.len() - 1
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_intervals() as f64
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Vec2 {
        self.points[i]
    }

    pub(crate) fn points_mut(&mut self) -> &mut [Vec2] {
        &mut self.points
    }

    /// Tangent, normal, curvature and metric by second-order differences
    /// (centered in the interior, one-sided at the ends).
    pub fn differential_data(&self) -> Result<DifferentialData> {
        let n = self.n_intervals();
        let h = self.h();
        let p = &self.points;

        let d1 = |i: usize| -> Vec2 {
            if i == 0 {
                (p[0] * -3.0 + p[1] * 4.0 - p[2]) / (2.0 * h)
            } else if i == n {
                (p[n] * 3.0 - p[n - 1] * 4.0 + p[n - 2]) / (2.0 * h)
            } else {
                (p[i + 1] - p[i - 1]) / (2.0 * h)
            }
        };
        let d2 = |i: usize| -> Vec2 {
            if i == 0 {
                (p[0] * 2.0 - p[1] * 5.0 + p[2] * 4.0 - p[3]) / (h * h)
            } else if i == n {
                (p[n] * 2.0 - p[n - 1] * 5.0 + p[n - 2] * 4.0 - p[n - 3]) / (h * h)
            } else {
                (p[i + 1] - p[i] * 2.0 + p[i - 1]) / (h * h)
            }
        };

        let mut tangent = Vec::with_capacity(n + 1);
        let mut normal = Vec::with_capacity(n + 1);
        let mut kappa = Vec::with_capacity(n + 1);
        let mut metric = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let v1 = d1(i);
            let g = v1.norm();
            if g < METRIC_FLOOR {
                return Err(Error::DegenerateCurve {
                    sigma: self.sigma[i],
                    metric: g,
                    threshold: METRIC_FLOOR,
                });
            }
            let tau = v1 / g;
            let nor = tau.rot90();
            kappa.push(d2(i).dot(nor) / (g * g));
            tangent.push(tau);
            normal.push(nor);
            metric.push(g);
        }
        Ok(DifferentialData {
            tangent,
            normal,
            kappa,
            metric,
        })
    }

    /// Curve length by the composite trapezoid rule on the metric.
    ///
    /// The metric here uses fourth-order differences so that quadrature, not
    /// differentiation, limits the accuracy.
    pub fn arclength(&self) -> Result<f64> {
        let metric = self.metric_fourth_order()?;
        Ok(trapezoid_uniform(&metric, self.h()))
    }

    /// Node metric |df/dsigma| by fourth-order differences.
    fn metric_fourth_order(&self) -> Result<Vec<f64>> {
        let n = self.n_intervals();
        let h = self.h();
        let p = &self.points;
        let mut metric = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let v = if i == 0 {
                (p[0] * -25.0 + p[1] * 48.0 - p[2] * 36.0 + p[3] * 16.0 - p[4] * 3.0)
                    / (12.0 * h)
            } else if i == 1 {
                (p[0] * -3.0 - p[1] * 10.0 + p[2] * 18.0 - p[3] * 6.0 + p[4]) / (12.0 * h)
            } else if i == n - 1 {
                (p[n] * 3.0 + p[n - 1] * 10.0 - p[n - 2] * 18.0 + p[n - 3] * 6.0 - p[n - 4])
                    / (12.0 * h)
            } else if i == n {
                (p[n] * 25.0 - p[n - 1] * 48.0 + p[n - 2] * 36.0 - p[n - 3] * 16.0
                    + p[n - 4] * 3.0)
                    / (12.0 * h)
            } else {
                (p[i - 2] - p[i - 1] * 8.0 + p[i + 1] * 8.0 - p[i + 2]) / (12.0 * h)
            };
            let g = v.norm();
            if g < METRIC_FLOOR {
                return Err(Error::DegenerateCurve {
                    sigma: self.sigma[i],
                    metric: g,
                    threshold: METRIC_FLOOR,
                });
            }
            metric.push(g);
        }
        Ok(metric)
    }

    /// Energy `L + cos(alpha) * ([f(0)]_x - [f(1)]_x)`.
    pub fn energy(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < std::f64::consts::PI) {
            return Err(Error::InvalidAngle(alpha));
        }
        let l = self.arclength()?;
        let n = self.n_intervals();
        Ok(l + alpha.cos() * (self.points[0].x - self.points[n].x))
    }

    /// L2 norm of the curvature with respect to arc length.
    pub fn curvature_l2(&self) -> Result<f64> {
        let data = self.differential_data()?;
        let integrand: Vec<f64> = data
            .kappa
            .iter()
            .zip(&data.metric)
            .map(|(k, g)| k * k * g)
            .collect();
        Ok(trapezoid_uniform(&integrand, self.h()).sqrt())
    }

    /// Ratio of the two sides of the curvature lower bound
    /// `1/L <= (sqrt(2) sin(alpha))^-1 * max |kappa|`; at most 1 for curves
    /// meeting the line at angle `alpha` on both ends.
    pub fn kappabound_ratio(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < std::f64::consts::PI) {
            return Err(Error::InvalidAngle(alpha));
        }
        let data = self.differential_data()?;
        let n = self.n_intervals();
        let want0 = Vec2::new(alpha.cos(), alpha.sin());
        let want1 = Vec2::new(alpha.cos(), -alpha.sin());
        let e0 = (data.tangent[0] - want0).norm();
        let e1 = (data.tangent[n] - want1).norm();
        if e0 > 1e-2 || e1 > 1e-2 {
            return Err(Error::AngleMismatch(format!(
                "tangent deviations {e0:.2e}, {e1:.2e} from (cos a, +-sin a)"
            )));
        }
        let l = trapezoid_uniform(&data.metric, self.h());
        let kmax = data.kappa.iter().fold(0.0_f64, |m, k| m.max(k.abs()));
        let rhs = kmax / (std::f64::consts::SQRT_2 * alpha.sin());
        Ok((1.0 / l) / rhs)
    }

    /// Signed area between the curve and the axis segment joining its
    /// endpoints, positive above the axis.
    pub fn enclosed_area(&self) -> Result<f64> {
        let n = self.n_intervals();
        let ymax = self.points[0].y.abs().max(self.points[n].y.abs());
        if ymax > 1e-8 {
            return Err(Error::EndpointsOffAxis(ymax));
        }
        let mut a = 0.0;
        for i in 0..n {
            a += 0.5 * (self.points[i].y + self.points[i + 1].y)
                * (self.points[i + 1].x - self.points[i].x);
        }
        Ok(a)
    }

    /// Shift every node horizontally by `h`; intrinsic quantities unchanged.
    pub fn translate(&self, h: f64) -> SampledCurve {
        let points = self.points.iter().map(|p| *p + Vec2::new(h, 0.0)).collect();
        SampledCurve {
            sigma: self.sigma.clone(),
            points,
        }
    }

    /// Cubic-spline representation of the two coordinates over sigma, with
    /// clamped end slopes estimated by sixth-order one-sided stencils.
    pub fn component_splines(&self) -> (CubicSpline, CubicSpline) {
        let xs: Vec<f64> = self.points.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = self.points.iter().map(|p| p.y).collect();
        let dx = (end_derivative(&xs, self.h(), false), end_derivative(&xs, self.h(), true));
        let dy = (end_derivative(&ys, self.h(), false), end_derivative(&ys, self.h(), true));
        (
            CubicSpline::new(&self.sigma, &xs, EndCondition::Clamped(dx.0, dx.1)),
            CubicSpline::new(&self.sigma, &ys, EndCondition::Clamped(dy.0, dy.1)),
        )
    }

    /// Reparametrize proportional to arc length onto `n_out` intervals.
    ///
    /// The geometric image is preserved up to spline interpolation error and
    /// the endpoints are fixed exactly.
    pub fn resample_uniform_arclength(&self, n_out: usize) -> Result<SampledCurve> {
        Ok(self.resample_uniform_with_map(n_out)?.0)
    }

    /// Like [`Self::resample_uniform_arclength`], additionally returning the
    /// orientation-preserving parameter map `beta` with
    /// `resampled(sigma_k) = original(beta_k)`.
    pub fn resample_uniform_with_map(&self, n_out: usize) -> Result<(SampledCurve, Vec<f64>)> {
        if n_out < MIN_INTERVALS {
            return Err(Error::IncompatibleInitialCurve(format!(
                "resample target {n_out} below minimum {MIN_INTERVALS}"
            )));
        }
        // Reject degenerate inputs up front.
        let _ = self.differential_data()?;

        let (sx, sy) = self.component_splines();
        let speed = |s: f64| sx.deriv(s).hypot(sy.deriv(s));

        let n = self.n_intervals();
        let mut cum = vec![0.0; n + 1];
        for i in 0..n {
            cum[i + 1] = cum[i] + gauss5(self.sigma[i], self.sigma[i + 1], speed);
        }
        let total = cum[n];

        let mut points = Vec::with_capacity(n_out + 1);
        let mut beta = Vec::with_capacity(n_out + 1);
        points.push(self.points[0]);
        beta.push(0.0);
        for k in 1..n_out {
            let target = total * k as f64 / n_out as f64;
            // Bracket by the cumulative table, then refine with safeguarded
            // Newton on s(sigma) = target.
            let mut seg = cum.partition_point(|&c| c < target).saturating_sub(1);
            seg = seg.min(n - 1);
            let seg_lo = self.sigma[seg];
            let mut lo = seg_lo;
            let mut hi = self.sigma[seg + 1];
            let mut s = lo + (hi - lo) * (target - cum[seg]) / (cum[seg + 1] - cum[seg]);
            for _ in 0..50 {
                let val = cum[seg] + gauss5(seg_lo, s, &speed) - target;
                if val.abs() < 1e-14 * total {
                    break;
                }
                if val > 0.0 {
                    hi = s;
                } else {
                    lo = s;
                }
                let next = s - val / speed(s);
                s = if next > lo && next < hi {
                    next
                } else {
                    0.5 * (lo + hi)
                };
            }
            points.push(Vec2::new(sx.eval(s), sy.eval(s)));
            beta.push(s);
        }
        points.push(self.points[n]);
        beta.push(1.0);
        Ok((SampledCurve::from_points(points)?, beta))
    }
}

/// Sixth-order one-sided first derivative at the first (or last) grid node.
fn end_derivative(vals: &[f64], h: f64, right: bool) -> f64 {
    const C: [f64; 7] = [
        -49.0 / 20.0,
        6.0,
        -15.0 / 2.0,
        20.0 / 3.0,
        -15.0 / 4.0,
        6.0 / 5.0,
        -1.0 / 6.0,
    ];
    let n = vals.len();
    let mut acc = 0.0;
    for (k, c) in C.iter().enumerate() {
        let v = if right { vals[n - 1 - k] } else { vals[k] };
        acc += c * v;
    }
    if right {
        -acc / h
    } else {
        acc / h
    }
}

/// Composite trapezoid rule on a uniform grid.
pub fn trapezoid_uniform(vals: &[f64], h: f64) -> f64 {
    let n = vals.len();
    let mut acc = 0.5 * (vals[0] + vals[n - 1]);
    for v in &vals[1..n - 1] {
        acc += v;
    }
    acc * h
}
