//! Analytic seed curves used by experiments and tests.

use crate::curve::SampledCurve;
use crate::vec2::Vec2;

/// Circular arc of radius `r` meeting the axis at contact angle `alpha` on
/// both sides, traversed left to right. Parametrized proportional to arc
/// length; endpoints at (-r sin(alpha), 0) and (r sin(alpha), 0).
pub fn circle_arc(r: f64, alpha: f64, n: usize) -> SampledCurve {
    let pts = (0..=n)
        .map(|i| {
            let s = i as f64 / n as f64;
            let th = (2.0 * s - 1.0) * alpha;
            Vec2::new(r * th.sin(), r * (th.cos() - alpha.cos()))
        })
        .collect();
    SampledCurve::from_points(pts).expect("arc fixture is regular")
}

/// Upper unit semicircle from (-1, 0) to (1, 0).
pub fn semicircle(n: usize) -> SampledCurve {
    circle_arc(1.0, std::f64::consts::FRAC_PI_2, n)
}

/// Straight segment from `a` to `b`.
pub fn segment(a: Vec2, b: Vec2, n: usize) -> SampledCurve {
    let pts = (0..=n)
        .map(|i| {
            let s = i as f64 / n as f64;
            a + (b - a) * s
        })
        .collect();
    SampledCurve::from_points(pts).expect("segment fixture is regular")
}

/// Ellipse arc `(a cos t, b sin t)` for `t` between `th0` and `th1`.
pub fn ellipse_arc(a: f64, b: f64, th0: f64, th1: f64, n: usize) -> SampledCurve {
    let pts = (0..=n)
        .map(|i| {
            let s = i as f64 / n as f64;
            let th = th0 + (th1 - th0) * s;
            Vec2::new(a * th.cos(), b * th.sin())
        })
        .collect();
    SampledCurve::from_points(pts).expect("ellipse fixture is regular")
}

/// Circular arc with a radial bump `1 + amp * sin^2(pi sigma)` about the arc
/// center. The window vanishes to first order at the ends, so the endpoint
/// positions and the contact angle are preserved exactly.
pub fn perturbed_arc(r: f64, alpha: f64, amp: f64, n: usize) -> SampledCurve {
    let center = Vec2::new(0.0, -r * alpha.cos());
    let pts = (0..=n)
        .map(|i| {
            let s = i as f64 / n as f64;
            let th = (2.0 * s - 1.0) * alpha;
            let bump = (std::f64::consts::PI * s).sin().powi(2);
            center + Vec2::new(th.sin(), th.cos()) * (r * (1.0 + amp * bump))
        })
        .collect();
    SampledCurve::from_points(pts).expect("perturbed arc fixture is regular")
}

/// Strongly asymmetric two-lobe curve with a thin neck, meeting the axis at
/// contact angle `alpha`. Used to provoke curvature concentration under the
/// flow; the neck height is a fraction of the lobe heights.
pub fn asymmetric_blowup_seed(alpha: f64, n: usize) -> SampledCurve {
    // Height profile: a parabolic base fixing the contact angle exactly plus
    // two Gaussian lobes of very different size separated by a low saddle.
    // The window vanishes to first order at the ends so the lobes do not
    // disturb the endpoint slopes.
    let width = 2.0;
    let t = alpha.tan();
    let lobe = |s: f64, c: f64, w: f64| (-((s - c) / w).powi(2)).exp();
    let window = |s: f64| (std::f64::consts::PI * s).sin().powi(2);
    let pts = (0..=n)
        .map(|i| {
            let s = i as f64 / n as f64;
            let base = t * s * (1.0 - s);
            let bumps = 0.55 * lobe(s, 0.30, 0.12) + 0.16 * lobe(s, 0.70, 0.06);
            let y = width * (base + bumps * window(s));
            Vec2::new(width * (s - 0.5), y)
        })
        .collect();
    SampledCurve::from_points(pts).expect("blow-up seed fixture is regular")
}
