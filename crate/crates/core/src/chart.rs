//! Curvilinear coordinates around a reference curve.
//!
//! A chart is built from a reference curve Phi* parametrized proportional to
//! arc length, a contact angle alpha, and the switching cutoff eta. The map
//!
//! `Psi(sigma, q) = Phi*(sigma) + q (n(sigma) + cot(alpha) eta(sigma) tau(sigma))`
//!
//! carries the strip [0, 1] x (-d, d) to a tube around the curve; the
//! tangential correction tilts the endpoint fibers onto the supporting line
//! (at sigma = 0 the fiber direction is (-1/sin(alpha), 0), at sigma = 1 it is
//! (+1/sin(alpha), 0)). Nearby curves are written as height functions
//! `f0(phi(sigma)) = Psi(sigma, rho(sigma))` over the chart.

use serde::Serialize;

use crate::curve::{SampledCurve, ScalarField};
use crate::error::Error;
use crate::spline::CubicSpline;
use crate::vec2::Vec2;
use crate::Result;

/// Transition profile of the cutoff between its plateaus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EtaProfile {
    /// 3t^2 - 2t^3; max slope 3/2 on the unit band.
    Cubic,
    /// 6t^5 - 15t^4 + 10t^3; max slope 15/8 on the unit band. C^2 overall.
    Quintic,
}

/// Cutoff eta: -1 on [0, 1/6), 0 on [2/6, 4/6), +1 on [5/6, 1], with a
/// monotone smoothstep on the two transition bands.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EtaSpec {
    pub profile: EtaProfile,
}

impl Default for EtaSpec {
    fn default() -> Self {
        EtaSpec {
            profile: EtaProfile::Quintic,
        }
    }
}

impl EtaSpec {
    fn smoothstep(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self.profile {
            EtaProfile::Cubic => t * t * (3.0 - 2.0 * t),
            EtaProfile::Quintic => t * t * t * (10.0 + t * (-15.0 + 6.0 * t)),
        }
    }

    fn smoothstep_deriv(&self, t: f64) -> f64 {
        if !(0.0..=1.0).contains(&t) {
            return 0.0;
        }
        match self.profile {
            EtaProfile::Cubic => 6.0 * t * (1.0 - t),
            EtaProfile::Quintic => 30.0 * t * t * (1.0 - t) * (1.0 - t),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        const B: f64 = 1.0 / 6.0;
        if x < B {
            -1.0
        } else if x < 2.0 * B {
            -1.0 + self.smoothstep((x - B) / B)
        } else if x < 4.0 * B {
            0.0
        } else if x < 5.0 * B {
            self.smoothstep((x - 4.0 * B) / B)
        } else {
            1.0
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        const B: f64 = 1.0 / 6.0;
        if !(0.0..=1.0).contains(&x) {
            0.0
        } else if (B..2.0 * B).contains(&x) {
            self.smoothstep_deriv((x - B) / B) / B
        } else if (4.0 * B..5.0 * B).contains(&x) {
            self.smoothstep_deriv((x - 4.0 * B) / B) / B
        } else {
            0.0
        }
    }

    /// Sup norm of eta', known in closed form: 6 * max smoothstep slope.
    pub fn prime_norm(&self) -> f64 {
        match self.profile {
            EtaProfile::Cubic => 9.0,
            EtaProfile::Quintic => 11.25,
        }
    }
}

/// Which reading of the constant C-hat enters `C_alpha`.
///
/// The constant is stated both as `sqrt(2) sin(alpha)` and as its reciprocal
/// in different places; the reciprocal reading is consistent with the
/// curvature lower bound and is the default.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CHatReading {
    /// C-hat = (sqrt(2) sin(alpha))^-1 (default).
    Reciprocal,
    /// C-hat = sqrt(2) sin(alpha).
    Direct,
}

impl CHatReading {
    pub fn value(self, alpha: f64) -> f64 {
        let b = std::f64::consts::SQRT_2 * alpha.sin();
        match self {
            CHatReading::Reciprocal => 1.0 / b,
            CHatReading::Direct => b,
        }
    }
}

/// Scale entering the derivative ball radius xi_1.
#[derive(Clone, Copy, Debug)]
pub enum Xi1Scale {
    /// Length of the reference curve.
    RefLength,
    /// Externally supplied lower bound on metric and length.
    MetricFloor(f64),
}

/// Every explicit admissibility constant of the chart, all re-derivable from
/// `(alpha, kappa_norm, l_phi, eta_prime_norm, lambda)`.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantsReport {
    pub alpha: f64,
    pub c_hat_reading: CHatReading,
    pub c_hat: f64,
    pub c_alpha: f64,
    /// C_alpha under the non-selected C-hat reading, for comparison.
    pub c_alpha_alt: f64,
    pub c_alpha_bar: f64,
    pub d: f64,
    pub k0: f64,
    /// +infinity when alpha = pi/2.
    pub k1: f64,
    pub xi0: f64,
    pub xi1: f64,
    pub lambda: f64,
    pub lambda_max: f64,
    pub eta_prime_norm: f64,
    pub kappa_norm: f64,
    pub l_phi: f64,
    /// Residuals of the reference-curve endpoint conditions (y, angle, kappa).
    pub bound_residual_y: f64,
    pub bound_residual_angle: f64,
    pub bound_residual_kappa: f64,
}

/// Evaluate every constant from raw inputs. Kept free of chart state so tests
/// can cross-check a chart's report independently.
pub fn evaluate_constants(
    alpha: f64,
    kappa_norm: f64,
    l_phi: f64,
    eta_prime_norm: f64,
    lambda: Option<f64>,
    reading: CHatReading,
) -> ConstantsReport {
    let is_orthogonal = (alpha - std::f64::consts::FRAC_PI_2).abs() < 1e-14;
    let cot = if is_orthogonal {
        0.0
    } else {
        alpha.cos() / alpha.sin()
    };
    let cot_abs = cot.abs();
    let a = (cot * cot + 1.0).sqrt();

    let c_hat = reading.value(alpha);
    let c_hat_alt = match reading {
        CHatReading::Reciprocal => CHatReading::Direct.value(alpha),
        CHatReading::Direct => CHatReading::Reciprocal.value(alpha),
    };
    let denom = |ch: f64| 1.0 + cot * cot + ch * cot_abs * eta_prime_norm;
    let c_alpha = 1.0 / denom(c_hat);
    let c_alpha_alt = 1.0 / denom(c_hat_alt);

    let d = c_alpha / kappa_norm;
    let k0 = 1.0 / (2.0 * kappa_norm * denom(c_hat));
    let k1 = if is_orthogonal {
        f64::INFINITY
    } else {
        l_phi / (12.0 * cot_abs)
    };

    // Small-cot guard: the sine argument grows without bound as cot -> 0;
    // cap it at pi/2 where the sine bound saturates.
    let guard = if is_orthogonal {
        1.0
    } else {
        let arg = 1.0 / (2.0 * (4.0 * 144.0_f64).powi(2) * cot * cot);
        arg.min(std::f64::consts::FRAC_PI_2).sin()
    };
    let lam_bound_1 = ((a - cot_abs) / 4.0).sin().min(guard) / (c_alpha * a);
    let lam_bound_2 = (1.0 / (6.0 * a)).min(if is_orthogonal {
        1.0
    } else {
        1.0 / (144.0 * cot_abs)
    });
    let lambda_max = lam_bound_1.min(lam_bound_2);
    let lambda = lambda.unwrap_or(0.9 * lambda_max);

    let c_alpha_bar =
        1.0 - ((lambda * c_alpha * cot).powi(2) + (1.0 - lambda * c_alpha).powi(2)).sqrt();

    let sin = alpha.sin();
    let xi0 = c_alpha_bar.min(sin * sin / 2.0) / kappa_norm;
    let xi1_factor = ((a - cot_abs) / 4.0)
        .min(if is_orthogonal {
            1.0
        } else {
            1.0 / (2.0 * (4.0 * 144.0_f64).powi(2) * cot * cot)
        })
        .min(sin / 2.0);
    let xi1 = xi1_factor * l_phi;

    ConstantsReport {
        alpha,
        c_hat_reading: reading,
        c_hat,
        c_alpha,
        c_alpha_alt,
        c_alpha_bar,
        d,
        k0,
        k1,
        xi0,
        xi1,
        lambda,
        lambda_max,
        eta_prime_norm,
        kappa_norm,
        l_phi,
        bound_residual_y: 0.0,
        bound_residual_angle: 0.0,
        bound_residual_kappa: 0.0,
    }
}

/// Options for chart construction.
#[derive(Clone, Debug)]
pub struct ChartOptions {
    pub eta: EtaSpec,
    pub c_hat: CHatReading,
    /// Fixed shrink factor; `None` selects 0.9 * lambda_max.
    pub lambda: Option<f64>,
    /// Override for the measured sup norm of the reference curvature
    /// (analytic fixtures).
    pub kappa_norm_override: Option<f64>,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions {
            eta: EtaSpec::default(),
            c_hat: CHatReading::Reciprocal,
            lambda: None,
            kappa_norm_override: None,
        }
    }
}

/// Reference curve plus curvilinear coordinates and admissibility constants.
#[derive(Clone, Debug)]
pub struct ChartSpec {
    phi_star: SampledCurve,
    alpha: f64,
    eta: EtaSpec,
    /// Parameter map from the stored uniform grid back to the input curve.
    beta: Vec<f64>,
    sx: CubicSpline,
    sy: CubicSpline,
    l_phi: f64,
    constants: ConstantsReport,
}

impl ChartSpec {
    pub fn new(phi_star: &SampledCurve, alpha: f64, options: ChartOptions) -> Result<ChartSpec> {
        if !(alpha > 0.0 && alpha < std::f64::consts::PI) {
            return Err(Error::InvalidAngle(alpha));
        }
        let n = phi_star.n_intervals();
        let y_end = phi_star.point(0).y.abs().max(phi_star.point(n).y.abs());
        if y_end > 1e-8 {
            return Err(Error::EndpointsOffAxis(y_end));
        }

        let (uniform, beta) = phi_star.resample_uniform_with_map(n)?;
        let (sx, sy) = uniform.component_splines();
        let l_phi = uniform.arclength()?;

        // Measured endpoint residuals of the reference-curve conditions.
        let data = uniform.differential_data()?;
        let ang0 = angle_difference(data.tangent[0].angle(), alpha);
        let ang1 = angle_difference(data.tangent[n].angle(), -alpha);
        let residual_angle = ang0.abs().max(ang1.abs());
        let residual_kappa = data.kappa[0].abs().max(data.kappa[n].abs());

        if residual_angle > 5e-2 {
            return Err(Error::AngleMismatch(format!(
                "reference endpoint angle off by {residual_angle:.3e} rad"
            )));
        }

        let kappa_norm = match options.kappa_norm_override {
            Some(k) => k,
            None => {
                let mut sup: f64 = 0.0;
                let fine = 6 * n;
                for i in 0..=fine {
                    let s = i as f64 / fine as f64;
                    sup = sup.max(kappa_from_splines(&sx, &sy, s).abs());
                }
                sup
            }
        };
        if !(kappa_norm > 0.0) {
            return Err(Error::IncompatibleInitialCurve(
                "reference curvature norm must be positive".into(),
            ));
        }

        let mut constants = evaluate_constants(
            alpha,
            kappa_norm,
            l_phi,
            options.eta.prime_norm(),
            options.lambda,
            options.c_hat,
        );
        constants.bound_residual_y = y_end;
        constants.bound_residual_angle = residual_angle;
        constants.bound_residual_kappa = residual_kappa;

        if !(constants.lambda > 0.0 && constants.lambda <= constants.lambda_max) {
            return Err(Error::IncompatibleInitialCurve(format!(
                "lambda {} outside (0, lambda_max = {}]",
                constants.lambda, constants.lambda_max
            )));
        }

        Ok(ChartSpec {
            phi_star: uniform,
            alpha,
            eta: options.eta,
            beta,
            sx,
            sy,
            l_phi,
            constants,
        })
    }

    pub fn phi_star(&self) -> &SampledCurve {
        &self.phi_star
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eta(&self) -> &EtaSpec {
        &self.eta
    }

    pub fn length(&self) -> f64 {
        self.l_phi
    }

    pub fn d(&self) -> f64 {
        self.constants.d
    }

    pub fn lambda(&self) -> f64 {
        self.constants.lambda
    }

    pub fn constants(&self) -> &ConstantsReport {
        &self.constants
    }

    fn cot(&self) -> f64 {
        if (self.alpha - std::f64::consts::FRAC_PI_2).abs() < 1e-14 {
            0.0
        } else {
            self.alpha.cos() / self.alpha.sin()
        }
    }

    /// Reference position; linear extension beyond [0, 1].
    pub fn position(&self, sigma: f64) -> Vec2 {
        Vec2::new(self.sx.eval(sigma), self.sy.eval(sigma))
    }

    fn d1(&self, sigma: f64) -> Vec2 {
        let s = sigma.clamp(0.0, 1.0);
        Vec2::new(self.sx.deriv(s), self.sy.deriv(s))
    }

    fn d2(&self, sigma: f64) -> Vec2 {
        if !(0.0..=1.0).contains(&sigma) {
            return Vec2::ZERO;
        }
        Vec2::new(self.sx.deriv2(sigma), self.sy.deriv2(sigma))
    }

    pub fn tangent(&self, sigma: f64) -> Vec2 {
        self.d1(sigma).normalized()
    }

    pub fn normal(&self, sigma: f64) -> Vec2 {
        self.tangent(sigma).rot90()
    }

    pub fn kappa(&self, sigma: f64) -> f64 {
        if !(0.0..=1.0).contains(&sigma) {
            return 0.0;
        }
        kappa_from_splines(&self.sx, &self.sy, sigma)
    }

    /// Fiber direction of the chart, `dPsi/dq = n + cot(alpha) eta tau`.
    pub fn fiber(&self, sigma: f64) -> Vec2 {
        self.normal(sigma) + self.cot() * self.eta.eval(sigma) * self.tangent(sigma)
    }

    /// Evaluate the curvilinear map at `(sigma, q)`, `|q| < d`.
    pub fn eval(&self, sigma: f64, q: f64) -> Result<Vec2> {
        let d = self.constants.d;
        if !(q.abs() < d) {
            return Err(Error::OutsideTube { sigma, q, limit: d });
        }
        Ok(self.position(sigma) + q * self.fiber(sigma))
    }

    /// Jacobian determinant of Psi at `(sigma, q)`.
    pub fn jacobian(&self, sigma: f64, q: f64) -> f64 {
        let g = self.d1(sigma).norm();
        let tau = self.tangent(sigma);
        let d2 = self.d2(sigma);
        // tau' = (I - tau tau^T) d2 / g, n' = R tau'.
        let tau_p = (d2 - tau * d2.dot(tau)) / g;
        let n_p = tau_p.rot90();
        let cot = self.cot();
        let e = self.eta.eval(sigma);
        let ep = self.eta.deriv(sigma);
        let dpsi_dsigma = self.d1(sigma) + q * (n_p + cot * (ep * tau + e * tau_p));
        let dpsi_dq = self.fiber(sigma);
        dpsi_dsigma.cross(dpsi_dq)
    }

    /// Sample |det DPsi| over `[0, 1] x [-lambda d, lambda d]` and compare
    /// against the lower bound `(1 - lambda) L`.
    pub fn jacobian_check(&self, n_sigma: usize, n_q: usize) -> JacobianReport {
        let lam_d = self.constants.lambda * self.constants.d;
        let bound = (1.0 - self.constants.lambda) * self.l_phi;
        let mut min_abs = f64::INFINITY;
        let mut argmin = (0.0, 0.0);
        for i in 0..=n_sigma {
            let s = i as f64 / n_sigma as f64;
            for j in 0..=n_q {
                let q = -lam_d + 2.0 * lam_d * j as f64 / n_q as f64;
                let det = self.jacobian(s, q).abs();
                if det < min_abs {
                    min_abs = det;
                    argmin = (s, q);
                }
            }
        }
        // Equality is attained when the sampled point realizes the curvature
        // sup that defined d; allow rounding there.
        JacobianReport {
            min_abs_det: min_abs,
            bound,
            at: argmin,
            pass: min_abs > bound * (1.0 - 1e-9),
        }
    }

    /// Express `f0` as a height function over the chart by continuation in
    /// sigma with damped Newton at each node.
    pub fn extract_height(&self, f0: &SampledCurve) -> Result<HeightField> {
        let m = self.phi_star.n_intervals();
        let lam_d = self.constants.lambda * self.constants.d;
        let tol = 1e-10 * self.l_phi;
        let (fx, fy) = f0.component_splines();
        let sin_a = self.alpha.sin();

        let mut rho = Vec::with_capacity(m + 1);
        let mut phi = Vec::with_capacity(m + 1);
        let mut min_alignment = f64::INFINITY;

        // Endpoint fibers run along the axis, so both ends pin analytically.
        let rho0 = -sin_a * (f0.point(0).x - self.position(0.0).x);
        let rho1 = sin_a * (f0.point(f0.n_intervals()).x - self.position(1.0).x);

        for j in 0..=m {
            let sigma = self.phi_star.sigma()[j];
            let (p, r) = if j == 0 {
                (0.0, rho0)
            } else if j == m {
                (1.0, rho1)
            } else {
                let mut p = *phi.last().unwrap();
                let mut r = *rho.last().unwrap();
                // Continuation: the previous solution seeds the next node.
                let mut residual = f64::INFINITY;
                let mut converged = false;
                for _ in 0..50 {
                    let pos = Vec2::new(fx.eval(p), fy.eval(p));
                    let fval = pos - (self.position(sigma) + r * self.fiber(sigma));
                    residual = fval.norm();
                    if residual < tol {
                        converged = true;
                        break;
                    }
                    let dfdp = Vec2::new(fx.deriv(p), fy.deriv(p));
                    let dfdr = -self.fiber(sigma);
                    let det = dfdp.cross(dfdr);
                    if det.abs() < 1e-14 {
                        break;
                    }
                    // Solve J [dp, dr] = -F by Cramer's rule.
                    let mut dp = (-fval.x * dfdr.y + fval.y * dfdr.x) / det;
                    let mut dr = (-dfdp.x * fval.y + dfdp.y * fval.x) / det;
                    // Damped backtracking, factor 0.5.
                    for _ in 0..20 {
                        let cand = Vec2::new(fx.eval(p + dp), fy.eval(p + dp))
                            - (self.position(sigma) + (r + dr) * self.fiber(sigma));
                        if cand.norm() < residual {
                            break;
                        }
                        dp *= 0.5;
                        dr *= 0.5;
                    }
                    p += dp;
                    r += dr;
                }
                if !converged {
                    return Err(Error::NewtonDivergence { sigma, residual });
                }
                (p, r)
            };

            if !(r.abs() < lam_d) {
                return Err(Error::OutsideTube {
                    sigma,
                    q: r,
                    limit: lam_d,
                });
            }
            if let Some(&prev) = phi.last() {
                if p <= prev {
                    return Err(Error::NonMonotone { sigma });
                }
            }
            let n_curve = Vec2::new(fx.deriv(p), fy.deriv(p)).normalized().rot90();
            min_alignment = min_alignment.min(n_curve.dot(self.fiber(sigma)));
            phi.push(p);
            rho.push(r);
        }

        Ok(HeightField {
            rho: ScalarField::new(rho),
            phi,
            min_normal_alignment: min_alignment,
        })
    }

    /// Run the full reference-curve verdict for the initial curve `f0`.
    ///
    /// Checks, in order: the endpoint conditions of `f0`, the C0 and C1 balls
    /// after arc-length alignment, boundary positivity near the ends, tube
    /// containment with height extraction, and the height bounds K0/3, K1/3.
    pub fn verify_reference(&self, f0: &SampledCurve, xi1_scale: Xi1Scale) -> VerifyReport {
        let mut checks = Vec::new();
        let push = |checks: &mut Vec<VerifyCheck>, name: &str, measured: f64, threshold: f64| {
            checks.push(VerifyCheck {
                name: name.to_string(),
                measured,
                threshold,
                pass: measured < threshold,
            });
        };

        // 1. Initial conditions of f0: endpoints on the axis, contact angle.
        let nf = f0.n_intervals();
        let y_end = f0.point(0).y.abs().max(f0.point(nf).y.abs());
        push(&mut checks, "endpoints-on-axis", y_end, 1e-8);
        let angle_res = match f0.differential_data() {
            Ok(d) => angle_difference(d.tangent[0].angle(), self.alpha)
                .abs()
                .max(angle_difference(d.tangent[nf].angle(), -self.alpha).abs()),
            Err(_) => f64::INFINITY,
        };
        push(&mut checks, "contact-angle", angle_res, 1e-2);
        if !checks.iter().all(|c| c.pass) {
            return VerifyReport {
                checks,
                pass: false,
                height: None,
            };
        }

        // 2./3. C0 and C1 balls after proportional-arc-length alignment: both
        // curves are compared at the parameters beta that uniformize the
        // reference.
        let m = self.phi_star.n_intervals();
        let (fx, fy) = f0.component_splines();
        let aligned: Vec<Vec2> = self
            .beta
            .iter()
            .map(|&b| Vec2::new(fx.eval(b), fy.eval(b)))
            .collect();
        let mut c0 = 0.0_f64;
        for (j, p) in aligned.iter().enumerate() {
            c0 = c0.max((*p - self.phi_star.point(j)).norm());
        }
        push(&mut checks, "c0-ball", c0, self.constants.xi0);

        let xi1 = match xi1_scale {
            Xi1Scale::RefLength => self.constants.xi1,
            Xi1Scale::MetricFloor(k) => self.constants.xi1 / self.l_phi * k,
        };
        let h = 1.0 / m as f64;
        let deriv_at = |pts: &[Vec2], j: usize| -> Vec2 {
            if j == 0 {
                (pts[0] * -3.0 + pts[1] * 4.0 - pts[2]) / (2.0 * h)
            } else if j == m {
                (pts[m] * 3.0 - pts[m - 1] * 4.0 + pts[m - 2]) / (2.0 * h)
            } else {
                (pts[j + 1] - pts[j - 1]) / (2.0 * h)
            }
        };
        let mut c1 = 0.0_f64;
        let ref_pts = self.phi_star.points();
        for j in 0..=m {
            c1 = c1.max((deriv_at(&aligned, j) - deriv_at(ref_pts, j)).norm());
        }
        push(&mut checks, "c1-ball", c1, xi1);

        // 4. Boundary positivity: f0 must stay above the axis until the
        // reference has risen to height xi0.
        let (x_cut, y_cut) = self.positivity_window();
        let mut min_y = f64::INFINITY;
        for (j, p) in aligned.iter().enumerate() {
            let s = self.phi_star.sigma()[j];
            if j > 0 && j < m && (s < x_cut || s > y_cut) {
                min_y = min_y.min(p.y);
            }
        }
        if min_y.is_infinite() {
            min_y = 0.0;
        }
        push(&mut checks, "boundary-positivity", -min_y, 1e-12);

        // 5./6. Tube containment and height extraction.
        let height = match self.extract_height(f0) {
            Ok(hf) => {
                push(
                    &mut checks,
                    "tube-containment",
                    hf.rho.sup_norm(),
                    self.constants.lambda * self.constants.d,
                );
                // Injectivity certificate: alignment must exceed 1/2.
                checks.push(VerifyCheck {
                    name: "injectivity-alignment".into(),
                    measured: hf.min_normal_alignment,
                    threshold: 0.5,
                    pass: hf.min_normal_alignment > 0.5,
                });
                Some(hf)
            }
            Err(_) => {
                checks.push(VerifyCheck {
                    name: "tube-containment".into(),
                    measured: f64::INFINITY,
                    threshold: self.constants.lambda * self.constants.d,
                    pass: false,
                });
                return VerifyReport {
                    checks,
                    pass: false,
                    height: None,
                };
            }
        };
        let height = height.expect("height present on extraction success");

        // 7. Height bounds.
        push(
            &mut checks,
            "rho-bound",
            height.rho.sup_norm(),
            self.constants.k0 / 3.0,
        );
        if self.constants.k1.is_finite() {
            let vals = &height.rho.values;
            let mut drho_max = 0.0_f64;
            for j in 0..=m {
                let d = if j == 0 {
                    (-3.0 * vals[0] + 4.0 * vals[1] - vals[2]) / (2.0 * h)
                } else if j == m {
                    (3.0 * vals[m] - 4.0 * vals[m - 1] + vals[m - 2]) / (2.0 * h)
                } else {
                    (vals[j + 1] - vals[j - 1]) / (2.0 * h)
                };
                drho_max = drho_max.max(d.abs());
            }
            push(&mut checks, "drho-bound", drho_max, self.constants.k1 / 3.0);
        }

        let pass = checks.iter().all(|c| c.pass);
        VerifyReport {
            checks,
            pass,
            height: Some(height),
        }
    }

    /// First and last parameters at which the reference curve reaches height
    /// xi0; the positivity check applies outside this window.
    fn positivity_window(&self) -> (f64, f64) {
        let xi0 = self.constants.xi0;
        let pts = self.phi_star.points();
        let sig = self.phi_star.sigma();
        let m = self.phi_star.n_intervals();
        let mut x_cut = sig[m / 2];
        for j in 0..m {
            if pts[j].y < xi0 && pts[j + 1].y >= xi0 {
                let t = (xi0 - pts[j].y) / (pts[j + 1].y - pts[j].y);
                x_cut = sig[j] + t * (sig[j + 1] - sig[j]);
                break;
            }
        }
        let mut y_cut = sig[m / 2];
        for j in (0..m).rev() {
            if pts[j + 1].y < xi0 && pts[j].y >= xi0 {
                let t = (xi0 - pts[j + 1].y) / (pts[j].y - pts[j + 1].y);
                y_cut = sig[j + 1] - t * (sig[j + 1] - sig[j]);
                break;
            }
        }
        (x_cut.min(y_cut), y_cut.max(x_cut))
    }

    /// Realize a height field as a sampled curve, `sigma -> Psi(sigma, rho)`.
    pub fn realize(&self, height: &HeightField) -> Result<SampledCurve> {
        let m = self.phi_star.n_intervals();
        let mut pts = Vec::with_capacity(m + 1);
        for j in 0..=m {
            let sigma = self.phi_star.sigma()[j];
            pts.push(self.eval(sigma, height.rho.values[j])?);
        }
        SampledCurve::from_points(pts)
    }
}

/// Scalar curvature of the spline curve at `sigma` in the `n = R tau` pairing.
fn kappa_from_splines(sx: &CubicSpline, sy: &CubicSpline, sigma: f64) -> f64 {
    let d1 = Vec2::new(sx.deriv(sigma), sy.deriv(sigma));
    let d2 = Vec2::new(sx.deriv2(sigma), sy.deriv2(sigma));
    let g = d1.norm();
    d2.dot(d1.rot90() / g) / (g * g)
}

fn angle_difference(a: f64, b: f64) -> f64 {
    let mut d = a - b;
    while d > std::f64::consts::PI {
        d -= 2.0 * std::f64::consts::PI;
    }
    while d < -std::f64::consts::PI {
        d += 2.0 * std::f64::consts::PI;
    }
    d
}

/// A curve written as a graph over a chart: `f0(phi(sigma)) = Psi(sigma, rho)`.
#[derive(Clone, Debug)]
pub struct HeightField {
    pub rho: ScalarField,
    pub phi: Vec<f64>,
    /// min over nodes of <n_curve, dPsi/dq>; above 1/2 certifies injectivity.
    pub min_normal_alignment: f64,
}

/// Result of sampling the chart Jacobian.
#[derive(Clone, Debug, Serialize)]
pub struct JacobianReport {
    pub min_abs_det: f64,
    pub bound: f64,
    pub at: (f64, f64),
    pub pass: bool,
}

/// One named admissibility check with its measured value and threshold.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyCheck {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl VerifyCheck {
    pub fn margin(&self) -> f64 {
        self.threshold - self.measured
    }
}

/// Outcome of `verify_reference`, one entry per check.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub checks: Vec<VerifyCheck>,
    pub pass: bool,
    pub height: Option<HeightField>,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&VerifyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!(
                "{:22} {}  measured {:.4e} vs {:.4e}\n",
                c.name,
                if c.pass { "pass" } else { "FAIL" },
                c.measured,
                c.threshold
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn semicircle_chart(n: usize) -> ChartSpec {
        let semi = fixtures::semicircle(n);
        ChartSpec::new(
            &semi,
            FRAC_PI_2,
            ChartOptions {
                kappa_norm_override: Some(1.0),
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn eta_plateau_values_and_monotonicity() {
        let eta = EtaSpec::default();
        assert_eq!(eta.eval(0.1), -1.0);
        assert_eq!(eta.eval(0.5), 0.0);
        assert_eq!(eta.eval(0.95), 1.0);
        assert!((eta.prime_norm() - 11.25).abs() < 1e-15);
        let mut prev = -1.0;
        let mut measured_slope: f64 = 0.0;
        for i in 0..=10_000 {
            let x = i as f64 / 10_000.0;
            let v = eta.eval(x);
            assert!(v >= prev - 1e-15, "eta not monotone at {x}");
            measured_slope = measured_slope.max(eta.deriv(x));
            prev = v;
        }
        assert!((measured_slope - 11.25).abs() < 1e-4);
    }

    #[test]
    fn constants_orthogonal_chart() {
        let chart = semicircle_chart(200);
        let c = chart.constants();
        assert!((c.c_alpha - 1.0).abs() < 1e-12);
        assert!((c.d - 1.0).abs() < 1e-12);
        assert!((c.k0 - 0.5).abs() < 1e-12);
        assert!((c.c_alpha_bar - c.lambda).abs() < 1e-12);
        assert!((c.lambda_max - 1.0 / 6.0).abs() < 1e-12);
        assert!(c.k1.is_infinite());
        // lambda_max = min(sin(1/4), 1/6); sin(1/4) ~ 0.2474 loses to 1/6.
        assert!((0.25_f64.sin() - 0.2474).abs() < 1e-4);
    }

    #[test]
    fn constants_match_independent_evaluation() {
        for &alpha in &[FRAC_PI_4, 1.0, FRAC_PI_2, 2.0] {
            let arc = fixtures::circle_arc(1.0, alpha, 160);
            let chart = ChartSpec::new(&arc, alpha, ChartOptions::default()).unwrap();
            let c = chart.constants();
            let reference = evaluate_constants(
                alpha,
                c.kappa_norm,
                c.l_phi,
                11.25,
                Some(c.lambda),
                CHatReading::Reciprocal,
            );
            assert!((c.c_alpha - reference.c_alpha).abs() < 1e-12);
            assert!((c.d - reference.d).abs() < 1e-12);
            assert!((c.k0 - reference.k0).abs() < 1e-12);
            assert!((c.xi0 - reference.xi0).abs() < 1e-12);
            assert!((c.xi1 - reference.xi1).abs() < 1e-12);
            if c.k1.is_finite() {
                assert!((c.k1 - reference.k1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn c_hat_readings_both_reported() {
        // cot(pi/4) = 1, quintic eta: C_alpha = 1/(2 + C_hat * 11.25).
        let arc = fixtures::circle_arc(1.0, FRAC_PI_4, 160);
        let chart = ChartSpec::new(
            &arc,
            FRAC_PI_4,
            ChartOptions {
                kappa_norm_override: Some(1.0),
                ..Default::default()
            },
        )
        .unwrap();
        let c = chart.constants();
        let c_hat = CHatReading::Reciprocal.value(FRAC_PI_4);
        assert!((c.c_alpha - 1.0 / (2.0 + c_hat * 11.25)).abs() < 1e-12);
        // Both readings coincide at alpha = pi/4 where sqrt(2) sin = 1.
        assert!((c.c_alpha_alt - c.c_alpha).abs() < 1e-12);
    }

    #[test]
    fn chart_eval_basics() {
        let chart = semicircle_chart(200);
        for &s in &[0.0, 0.25, 0.5, 1.0] {
            let p = chart.eval(s, 0.0).unwrap();
            assert!((p - chart.position(s)).norm() < 1e-15);
        }
        // alpha = pi/2: pure normal displacement, outward at the apex.
        let p = chart.eval(0.5, 0.1).unwrap();
        assert!((p.norm() - 1.1).abs() < 1e-6, "radius {}", p.norm());
        assert!(matches!(
            chart.eval(0.5, 1.0),
            Err(Error::OutsideTube { .. })
        ));
    }

    #[test]
    fn chart_eval_tangential_correction() {
        let arc = fixtures::circle_arc(1.0, FRAC_PI_4, 400);
        let chart = ChartSpec::new(&arc, FRAC_PI_4, ChartOptions::default()).unwrap();
        // eta = -1 near sigma = 0: displacement has tangential part -q cot(alpha).
        let s = 0.05;
        let q = 0.01;
        let disp = chart.eval(s, q).unwrap() - chart.position(s);
        let tangential = disp.dot(chart.tangent(s));
        assert!(
            (tangential - (-0.01)).abs() < 1e-9,
            "tangential {tangential}"
        );
    }

    #[test]
    fn endpoint_fibers_stay_on_axis() {
        for &alpha in &[0.6, FRAC_PI_4, 1.9] {
            let arc = fixtures::circle_arc(1.0, alpha, 300);
            let chart = ChartSpec::new(&arc, alpha, ChartOptions::default()).unwrap();
            for &q in &[-0.01, 0.005, 0.02] {
                let left = chart.eval(0.0, q).unwrap();
                let right = chart.eval(1.0, q).unwrap();
                assert!(left.y.abs() < 1e-6, "alpha {alpha}: left y = {:e}", left.y);
                assert!(
                    right.y.abs() < 1e-6,
                    "alpha {alpha}: right y = {:e}",
                    right.y
                );
            }
        }
    }

    #[test]
    fn jacobian_on_reference_row_is_length() {
        let chart = semicircle_chart(200);
        for &s in &[0.0, 0.3, 0.77, 1.0] {
            assert!((chart.jacobian(s, 0.0) - PI).abs() < 2e-4);
        }
    }

    #[test]
    fn jacobian_check_meets_lower_bound() {
        // d derives from the measured curvature sup, which makes the lemma
        // bound self-consistent on the sampled grid.
        let semi = fixtures::semicircle(400);
        let chart = ChartSpec::new(&semi, FRAC_PI_2, ChartOptions::default()).unwrap();
        let report = chart.jacobian_check(200, 50);
        assert!(
            report.pass,
            "min {} vs bound {}",
            report.min_abs_det, report.bound
        );
        // For alpha = pi/2 the determinant is L (1 - q kappa); the sampled
        // minimum sits at the tube edge.
        let lam = chart.lambda();
        assert!(
            (report.min_abs_det - (1.0 - lam) * chart.length()).abs() < 1e-4 * chart.length()
        );
    }

    #[test]
    fn extract_height_identity() {
        let chart = semicircle_chart(200);
        let hf = chart.extract_height(chart.phi_star()).unwrap();
        assert!(hf.rho.sup_norm() < 1e-12);
        for (j, &p) in hf.phi.iter().enumerate() {
            assert!((p - j as f64 / 200.0).abs() < 1e-12);
        }
    }

    #[test]
    fn extract_height_constant_offset() {
        let chart = semicircle_chart(200);
        let m = 200;
        let q0 = 0.05;
        let pts: Vec<Vec2> = (0..=m)
            .map(|j| chart.eval(j as f64 / m as f64, q0).unwrap())
            .collect();
        let f0 = SampledCurve::from_points(pts).unwrap();
        let hf = chart.extract_height(&f0).unwrap();
        for j in 0..=m {
            assert!((hf.rho.values[j] - q0).abs() < 1e-8);
            assert!((hf.phi[j] - j as f64 / m as f64).abs() < 1e-8);
        }
        assert!(hf.min_normal_alignment > 0.5);
    }

    #[test]
    fn extract_height_roundtrip_random_fields() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let chart = semicircle_chart(200);
        let m = 200;
        // Stay inside both the K0/3 ball and the lambda-shrunken tube.
        let cap = (chart.constants().k0 / 3.0).min(chart.lambda() * chart.d());
        for _ in 0..5 {
            let coef: Vec<f64> = (1..=4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let field = |s: f64| -> f64 {
                coef.iter()
                    .enumerate()
                    .map(|(k, a)| a * ((k + 1) as f64 * PI * s).cos())
                    .sum()
            };
            let sup = (0..=m)
                .map(|j| field(j as f64 / m as f64).abs())
                .fold(0.0_f64, f64::max);
            let scale = 0.9 * cap / sup;
            let rho: Vec<f64> = (0..=m)
                .map(|j| scale * field(j as f64 / m as f64))
                .collect();
            let pts: Vec<Vec2> = (0..=m)
                .map(|j| chart.eval(j as f64 / m as f64, rho[j]).unwrap())
                .collect();
            let f0 = SampledCurve::from_points(pts).unwrap();
            let hf = chart.extract_height(&f0).unwrap();
            for j in 0..=m {
                assert!(
                    (hf.rho.values[j] - rho[j]).abs() < 1e-8,
                    "rho error {:e}",
                    (hf.rho.values[j] - rho[j]).abs()
                );
                assert!((hf.phi[j] - j as f64 / m as f64).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn extract_detects_outside_tube() {
        let chart = semicircle_chart(100);
        let m = 100;
        let lam_d = chart.lambda() * chart.d();
        let pts: Vec<Vec2> = (0..=m)
            .map(|j| {
                let s = j as f64 / m as f64;
                let q = 2.0 * lam_d * (PI * s).sin().powi(2);
                chart.position(s) + q * chart.fiber(s)
            })
            .collect();
        let f0 = SampledCurve::from_points(pts).unwrap();
        assert!(matches!(
            chart.extract_height(&f0),
            Err(Error::OutsideTube { .. })
        ));
    }

    #[test]
    fn verify_reference_accepts_itself() {
        let chart = semicircle_chart(200);
        let report = chart.verify_reference(chart.phi_star(), Xi1Scale::RefLength);
        assert!(report.pass, "{}", report.summary());
        let rho = report.height.as_ref().unwrap().rho.sup_norm();
        assert!(rho < 1e-12);
    }

    #[test]
    fn verify_reference_accepts_small_height_field() {
        let chart = semicircle_chart(200);
        let m = 200;
        let k0 = chart.constants().k0;
        let rho_amp = 0.9 * k0 / 3.0;
        let pts: Vec<Vec2> = (0..=m)
            .map(|j| {
                let s = j as f64 / m as f64;
                let q = rho_amp * (2.0 * PI * s).cos() * 0.5;
                chart.eval(s, q).unwrap()
            })
            .collect();
        let f0 = SampledCurve::from_points(pts).unwrap();
        let report = chart.verify_reference(&f0, Xi1Scale::RefLength);
        assert!(report.pass, "{}", report.summary());
        let c = report.check("rho-bound").unwrap();
        assert!(c.margin() > 0.0);
    }

    #[test]
    fn verify_reference_rejects_angle_violation() {
        let chart = semicircle_chart(200);
        // Shear so the endpoint tangent angle is off by about 0.1 rad.
        let pts: Vec<Vec2> = chart
            .phi_star()
            .points()
            .iter()
            .map(|p| Vec2::new(p.x + 0.1 * p.y, p.y))
            .collect();
        let f0 = SampledCurve::from_points(pts).unwrap();
        let report = chart.verify_reference(&f0, Xi1Scale::RefLength);
        assert!(!report.pass);
        assert!(!report.check("contact-angle").unwrap().pass);
    }

    #[test]
    fn constants_scale_covariance() {
        let small = fixtures::circle_arc(1.0, 1.1, 200);
        let big = fixtures::circle_arc(3.0, 1.1, 200);
        let cs = ChartSpec::new(&small, 1.1, ChartOptions::default()).unwrap();
        let cb = ChartSpec::new(&big, 1.1, ChartOptions::default()).unwrap();
        let (a, b) = (cs.constants(), cb.constants());
        let c = 3.0;
        assert!((b.d - c * a.d).abs() < 1e-6);
        assert!((b.xi0 - c * a.xi0).abs() < 1e-6);
        assert!((b.k0 - c * a.k0).abs() < 1e-6);
        assert!((b.c_alpha - a.c_alpha).abs() < 1e-9);
        assert!((b.c_alpha_bar - a.c_alpha_bar).abs() < 1e-9);
        assert!((b.lambda_max - a.lambda_max).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        let semi = fixtures::semicircle(64);
        assert!(matches!(
            ChartSpec::new(&semi, PI, ChartOptions::default()),
            Err(Error::InvalidAngle(_))
        ));
        let lifted = fixtures::segment(Vec2::new(0.0, 0.5), Vec2::new(1.0, 0.5), 16);
        assert!(matches!(
            ChartSpec::new(&lifted, FRAC_PI_2, ChartOptions::default()),
            Err(Error::EndpointsOffAxis(_))
        ));
    }
}
