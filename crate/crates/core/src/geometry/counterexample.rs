//! The ε-neighbourhood of a three-edge star whose vertex violates the smallness
//! condition, and the closed-form Rayleigh-quotient factor of its trial function.

use crate::num::{add, dot, perp, scale, shoelace_area, Point, Real};

use super::patch::{fan_quads, Patch, PatchComplex, Region, SideSpec, StripFrame};
use super::GeometryError;

pub const DEFAULT_CUTOFF: f64 = 3.0;

/// `G(α, c) = (8c cos α + 3π² sin α − 16c) / (((3π² − 4) cos α + 3π² c sin α + 8) c)`.
pub fn counterexample_gap_factor<T: Real>(alpha: T, c: T) -> Result<T, GeometryError> {
    let pi2 = T::PI() * T::PI();
    let three_pi2 = T::lit(3.0) * pi2;
    let (s, co) = alpha.sin_cos();
    let num = T::lit(8.0) * c * co + three_pi2 * s - T::lit(16.0) * c;
    let den = ((three_pi2 - T::lit(4.0)) * co + three_pi2 * c * s + T::lit(8.0)) * c;
    if den.abs() < T::lit(1e-12) {
        return Err(GeometryError::Pole(den.as_f64()));
    }
    Ok(num / den)
}

/// One edge of the star: unit direction and the local coordinate where its strip begins.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arm<T> {
    pub dir: Point<T>,
    pub x0: T,
}

#[derive(Clone, Debug)]
pub struct CounterexampleDomain<T> {
    pub complex: PatchComplex<T>,
    pub arms: Vec<Arm<T>>,
    pub alpha: T,
    pub length: T,
    pub eps: T,
    /// Strips are split at local `x = cutoff·ε` when set.
    pub cutoff: Option<T>,
}

impl<T: Real> CounterexampleDomain<T> {
    /// Arm frame: `x` measured from the strip start, `y ∈ (−1, 1)` across.
    pub fn frame(&self, arm: usize) -> StripFrame<T> {
        arm_frame(&self.arms[arm], self.eps)
    }

    /// Area of the vertex piece `A_{ε,j}`.
    pub fn vertex_piece_area(&self, arm: usize) -> T {
        self.complex
            .patches
            .iter()
            .filter(|p| p.region == Region::Vertex(0) && p.arm == Some(arm))
            .map(Patch::area)
            .sum()
    }
}

fn arm_frame<T: Real>(a: &Arm<T>, eps: T) -> StripFrame<T> {
    StripFrame {
        origin: [T::zero(), T::zero()],
        dir: a.dir,
        x_offset: -a.x0,
        y_scale: eps,
    }
}

/// Star with arms `(1, 0)`, `(−cos α, ± sin α)` of length `ℓ` and its exact
/// ε-neighbourhood (flat Dirichlet ends), without a cutoff split.
pub fn build_counterexample_domain<T: Real>(
    alpha: T,
    length: T,
    eps: T,
) -> Result<CounterexampleDomain<T>, GeometryError> {
    build(alpha, length, eps, None)
}

/// As [`build_counterexample_domain`], with every strip split at `x = c·ε` so
/// the mesh resolves the kink of the cut-off function.
pub fn build_counterexample_domain_with_cutoff<T: Real>(
    alpha: T,
    length: T,
    eps: T,
    c: T,
) -> Result<CounterexampleDomain<T>, GeometryError> {
    build(alpha, length, eps, Some(c))
}

fn build<T: Real>(alpha: T, length: T, eps: T, cutoff: Option<T>) -> Result<CounterexampleDomain<T>, GeometryError> {
    let degenerate = |m: &str| Err(GeometryError::Degenerate(m.to_string()));
    if !(alpha > T::lit(0.05) && alpha <= T::FRAC_PI_2() + T::lit(1e-12)) {
        return degenerate("α must lie in [0.05, π/2]; beyond π/2 the ε-neighbourhood has a circular arc");
    }
    if !(eps > T::zero() && eps < length / T::lit(4.0)) {
        return degenerate("ε must lie in (0, ℓ/4)");
    }
    let (s, c) = alpha.sin_cos();
    let dirs = [[T::one(), T::zero()], [-c, -s], [-c, s]];
    // counter-clockwise order: 0 (angle 0), 2 (π − α), 1 (π + α)
    let ccw = [0usize, 2, 1];
    let gap_after = |w: usize| -> T {
        match w {
            0 | 2 => T::PI() - alpha,
            _ => T::lit(2.0) * alpha,
        }
    };
    let half_cot = |g: T| (g * T::lit(0.5)).cos() / (g * T::lit(0.5)).sin();
    let mut arms = vec![
        Arm {
            dir: [T::zero(), T::zero()],
            x0: T::zero()
        };
        3
    ];
    let mut corner_proj = [(T::zero(), T::zero()); 3];
    for w in 0..3 {
        let j = ccw[w];
        let before = half_cot(gap_after((w + 2) % 3)) * eps;
        let after = half_cot(gap_after(w)) * eps;
        corner_proj[j] = (before, after);
        arms[j] = Arm {
            dir: dirs[j],
            x0: before.max(after),
        };
    }
    for a in &arms {
        let rest = length - a.x0;
        if !(rest > T::zero()) {
            return degenerate("strip shorter than the vertex region");
        }
        if let Some(cc) = cutoff {
            if !(cc * eps < rest) {
                return degenerate("cutoff beyond the strip end");
            }
        }
    }

    let mut patches = Vec::new();
    let d = SideSpec::Dirichlet;
    let i = SideSpec::Internal;
    for j in 0..3 {
        let a = arms[j];
        let u = a.dir;
        let n = perp(u);
        let at = |x: T, y: T| add(scale(x, u), scale(y, n));
        let (p_before, p_after) = corner_proj[j];
        let frame = arm_frame(&a, eps);

        // A_j: origin, corner before, strip start, corner after
        let mut poly = vec![[T::zero(), T::zero()], at(p_before, -eps)];
        let tol = T::lit(1e-9) * eps;
        if a.x0 > p_before + tol {
            poly.push(at(a.x0, -eps));
        }
        poly.push(at(a.x0, eps));
        if a.x0 > p_after + tol {
            poly.push(at(p_after, eps));
        }
        let seg = piece_sides(&poly, a.x0, eps, u, n);
        if !(shoelace_area(&poly) > T::zero()) {
            return degenerate("vertex piece has no area");
        }
        let centroid = super::shape::polygon_centroid(&poly);
        for (corners, sides) in fan_quads(&poly, &seg, centroid) {
            let mut p = Patch::flat(corners, Region::Vertex(0), sides);
            p.frame = Some(frame);
            p.arm = Some(j);
            patches.push(p);
        }

        let mut cuts = vec![a.x0];
        if let Some(cc) = cutoff {
            cuts.push(a.x0 + cc * eps);
        }
        cuts.push(length);
        for w in cuts.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            for (corners, sides) in [
                (
                    [at(x0, -eps), at(x1, -eps), at(x1, T::zero()), at(x0, T::zero())],
                    [d, i, i, i],
                ),
                (
                    [at(x0, T::zero()), at(x1, T::zero()), at(x1, eps), at(x0, eps)],
                    [i, i, d, i],
                ),
            ] {
                let mut sides = sides;
                if x1 == length {
                    sides[1] = d;
                }
                patches.push(Patch {
                    corners,
                    region: Region::Edge(j),
                    sides,
                    coefficients: super::Coefficients::Flat,
                    frame: Some(frame),
                    arm: Some(j),
                });
            }
        }
    }
    let complex = PatchComplex::new(patches, eps)?;
    Ok(CounterexampleDomain {
        complex,
        arms,
        alpha,
        length,
        eps,
        cutoff,
    })
}

/// Side specs for a vertex piece: segments on the outer lines `y = ±ε` are
/// Dirichlet, everything else is glued.
fn piece_sides<T: Real>(poly: &[Point<T>], x0: T, eps: T, u: Point<T>, n: Point<T>) -> Vec<SideSpec> {
    let tol = T::lit(1e-12) * (eps + x0.abs());
    let local = |p: Point<T>| (dot(p, u), dot(p, n));
    (0..poly.len())
        .map(|k| {
            let (_, ya) = local(poly[k]);
            let (_, yb) = local(poly[(k + 1) % poly.len()]);
            let on_line = |y: T| (y.abs() - eps).abs() <= tol;
            if on_line(ya) && on_line(yb) && (ya - yb).abs() <= tol {
                SideSpec::Dirichlet
            } else {
                SideSpec::Internal
            }
        })
        .collect()
}
