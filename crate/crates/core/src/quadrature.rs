//! Gauss–Legendre rules and quadrature grids on the real line and on
//! indented contours in the complex plane.

use num_complex::Complex64 as C64;
use num_traits::{Float, FloatConst};

use crate::error::{Error, Result};

/// Gauss–Legendre rule on `[-1, 1]`, generic over the scalar type.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Float + FloatConst> GaussLegendre<T> {
    /// Nodes are the roots of `P_n`, found by Newton iteration from the
    /// Tricomi initial guesses; they are returned in ascending order.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let one = T::one();
        let two = one + one;
        let quarter = one / (two * two);
        let half = one / two;
        let nf = T::from(n).unwrap();
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        for i in 0..n.div_ceil(2) {
            let ii = T::from(i + 1).unwrap();
            let mut x = (T::PI() * (ii - quarter) / (nf + half)).cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= T::epsilon() * (one + one) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = two / ((one - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Nodes and weights mapped affinely to `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let two = T::one() + T::one();
        let mid = (a + b) / two;
        let half = (b - a) / two;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        self.mapped(a, b).fold(T::zero(), |acc, (x, w)| acc + w * f(x))
    }

    /// Composite rule with `panels` equal panels on `[a, b]`.
    pub fn composite<F: FnMut(T) -> T>(&self, a: T, b: T, panels: usize, mut f: F) -> T {
        let h = (b - a) / T::from(panels.max(1)).unwrap();
        (0..panels.max(1))
            .map(|j| {
                let lo = a + h * T::from(j).unwrap();
                self.integrate(lo, lo + h, &mut f)
            })
            .fold(T::zero(), |acc, v| acc + v)
    }
}

fn legendre_with_derivative<T: Float>(n: usize, x: T) -> (T, T) {
    let one = T::one();
    let mut p0 = one;
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from(k).unwrap();
        let p2 = ((kf + kf - one) * x * p1 - (kf - one) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from(n).unwrap();
    let d = nf * (x * p1 - p0) / (x * x - one);
    (p1, d)
}

/// Points per Gauss–Legendre panel on contour grids.
pub const PANEL_NODES: usize = 24;
/// Maximal panel length on contour grids.
pub const PANEL_WIDTH: f64 = 0.5;
/// Default start of the mapped tails `|Re s| > S`.
pub const DEFAULT_TRUNCATION: f64 = 12.0;
const TAIL_LEVELS: usize = 50;
const TAIL_NODES: usize = 12;
const SELF_TEST_TOL: f64 = 1e-12;

/// Geometry of an integration contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContourShape {
    /// The real axis.
    RealLine,
    /// Real axis with the triangular dip `-a/4 -> -ia/4 -> a/4`.
    SigmaA(f64),
    /// Real axis with a triangular indentation of half-width `|depth|` at
    /// `center`; positive depth dips below the axis, negative rises above.
    Indented { center: f64, depth: f64 },
    /// Uniform trapezoid grid on `[-S, S]` (collocation grid for the RHP).
    Uniform { step: f64 },
}

/// Quadrature nodes and complex weights along an oriented contour.
#[derive(Debug, Clone)]
pub struct ContourGrid {
    nodes: Vec<C64>,
    weights: Vec<C64>,
    truncation: f64,
    shape: ContourShape,
}

impl ContourGrid {
    pub fn real_line(truncation: f64) -> Result<Self> {
        Self::build(ContourShape::RealLine, truncation)
    }

    pub fn sigma_a(a: f64, truncation: f64) -> Result<Self> {
        Self::build(ContourShape::SigmaA(a), truncation)
    }

    pub fn indented(center: f64, depth: f64, truncation: f64) -> Result<Self> {
        Self::build(ContourShape::Indented { center, depth }, truncation)
    }

    /// Uniform grid `s_j = j h`, `|s_j| <= S`, with trapezoid weights.
    pub fn uniform(step: f64, truncation: f64) -> Result<Self> {
        if !(step > 0.0 && truncation > step) {
            return Err(Error::InvalidParameter(format!(
                "uniform grid with step {step} and truncation {truncation}"
            )));
        }
        let n = (truncation / step - 1e-9).ceil() as i64;
        let nodes: Vec<C64> = (-n..=n).map(|j| C64::new(j as f64 * step, 0.0)).collect();
        let weights = vec![C64::new(step, 0.0); nodes.len()];
        let grid = Self {
            nodes,
            weights,
            truncation: n as f64 * step,
            shape: ContourShape::Uniform { step },
        };
        grid.self_test()?;
        Ok(grid)
    }

    fn build(shape: ContourShape, truncation: f64) -> Result<Self> {
        let (center, depth) = match shape {
            ContourShape::RealLine => (0.0, 0.0),
            ContourShape::SigmaA(a) => {
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::InvalidParameter(format!("Sigma_a with a = {a}")));
                }
                (0.0, a / 4.0)
            }
            ContourShape::Indented { center, depth } => (center, depth),
            ContourShape::Uniform { step } => return Self::uniform(step, truncation),
        };
        if !(truncation.is_finite() && truncation > 0.0) {
            return Err(Error::InvalidParameter(format!("truncation {truncation}")));
        }
        let s_cut = truncation.max(center.abs() + depth.abs() + 1.0);
        let gl = GaussLegendre::<f64>::new(PANEL_NODES);

        let mut vertices = vec![C64::new(-s_cut, 0.0)];
        if depth != 0.0 {
            let w = depth.abs();
            vertices.push(C64::new(center - w, 0.0));
            vertices.push(C64::new(center, -depth));
            vertices.push(C64::new(center + w, 0.0));
        }
        vertices.push(C64::new(s_cut, 0.0));

        let mut nodes = Vec::new();
        let mut weights = Vec::new();

        // Left tail s = -S/u, u in (0, 1], oriented left to right.
        push_tail(s_cut, -1.0, &mut nodes, &mut weights);
        for seg in vertices.windows(2) {
            let (z0, z1) = (seg[0], seg[1]);
            for (t0, t1) in segment_breaks(z0, z1, depth.abs(), center) {
                let dz = z1 - z0;
                for (x, w) in gl.mapped(t0, t1) {
                    nodes.push(z0 + dz * x);
                    weights.push(dz * w);
                }
            }
        }
        push_tail(s_cut, 1.0, &mut nodes, &mut weights);

        let grid = Self {
            nodes,
            weights,
            truncation: s_cut,
            shape,
        };
        grid.self_test()?;
        Ok(grid)
    }

    fn self_test(&self) -> Result<()> {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let got = self.integrate(|s| (-s * s).exp());
        let err = (got - sqrt_pi).norm();
        if err > SELF_TEST_TOL {
            return Err(Error::MethodDisagreement {
                what: "contour grid Gaussian self-test",
                a: got.re,
                b: sqrt_pi,
                tol: SELF_TEST_TOL,
            });
        }
        Ok(())
    }

    pub fn integrate<F: FnMut(C64) -> C64>(&self, mut f: F) -> C64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(s))
            .sum()
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Half-width of the directly sampled `|Re s|` range; beyond it the
    /// Gauss–Legendre grids use the `s = S/u` tail map.
    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn shape(&self) -> ContourShape {
        self.shape
    }

    /// Distance from `k` to the nearest contour segment.
    pub fn distance_to(&self, k: C64) -> f64 {
        let (center, depth) = match self.shape {
            ContourShape::RealLine | ContourShape::Uniform { .. } => return k.im.abs(),
            ContourShape::SigmaA(a) => (0.0, a / 4.0),
            ContourShape::Indented { center, depth } => (center, depth),
        };
        let w = depth.abs();
        let left = C64::new(center - w, 0.0);
        let bottom = C64::new(center, -depth);
        let right = C64::new(center + w, 0.0);
        let on_axis = if (k.re - center).abs() >= w {
            k.im.abs()
        } else {
            f64::INFINITY
        };
        let to_axis_ends = (k - left).norm().min((k - right).norm());
        on_axis
            .min(to_axis_ends)
            .min(segment_distance(k, left, bottom))
            .min(segment_distance(k, bottom, right))
    }
}

fn push_tail(s_cut: f64, sign: f64, nodes: &mut Vec<C64>, weights: &mut Vec<C64>) {
    // Dyadic panels [2^-(j+1), 2^-j] in u resolve logarithmic behaviour at u = 0.
    let gl = GaussLegendre::<f64>::new(TAIL_NODES);
    let mut pts = Vec::with_capacity(TAIL_LEVELS * TAIL_NODES);
    let mut hi = 1.0;
    for _ in 0..TAIL_LEVELS {
        let lo = 0.5 * hi;
        for (u, w) in gl.mapped(lo, hi) {
            pts.push((sign * s_cut / u, s_cut * w / (u * u)));
        }
        hi = lo;
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (s, w) in pts {
        nodes.push(C64::new(s, 0.0));
        weights.push(C64::new(w, 0.0));
    }
}

/// Panel breakpoints in the segment parameter `t in [0, 1]`. Axis segments
/// next to an indentation of half-width `w` start with panels of width `w`
/// that double until they reach `PANEL_WIDTH`.
fn segment_breaks(z0: C64, z1: C64, w: f64, center: f64) -> Vec<(f64, f64)> {
    let len = (z1 - z0).norm();
    let on_axis = z0.im == 0.0 && z1.im == 0.0;
    let mut cuts = vec![0.0];
    if on_axis && w > 0.0 {
        // Distance along the segment measured from the end nearest the dip.
        let toward_dip = (z1.re - center).abs() < (z0.re - center).abs();
        let mut dists = vec![0.0];
        let mut d = 0.0;
        let mut step = w.min(PANEL_WIDTH);
        while d + step < len {
            d += step;
            dists.push(d);
            step = (2.0 * step).min(PANEL_WIDTH);
        }
        dists.push(len);
        let mut ts: Vec<f64> = dists
            .iter()
            .map(|&d| if toward_dip { 1.0 - d / len } else { d / len })
            .collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        cuts = ts;
    } else {
        let panels = ((len / PANEL_WIDTH).ceil() as usize).max(1);
        for p in 1..=panels {
            cuts.push(p as f64 / panels as f64);
        }
    }
    cuts.windows(2).map(|c| (c[0], c[1])).collect()
}

fn segment_distance(k: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let t = ((k - a) * ab.conj()).re / ab.norm_sqr();
    let t = t.clamp(0.0, 1.0);
    (k - (a + ab * t)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let gl = GaussLegendre::<f64>::new(10);
        let v = gl.integrate(-1.0, 2.0, |x| x.powi(19) - 3.0 * x.powi(4));
        let exact = (2f64.powi(20) - 1.0) / 20.0 - 3.0 * (32.0 + 1.0) / 5.0;
        assert!((v - exact).abs() < 1e-9 * exact.abs());
        let s: f64 = gl.weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_single_precision() {
        let gl = GaussLegendre::<f32>::new(8);
        let v = gl.integrate(0.0, 1.0, |x| x.exp());
        assert!((v - (std::f32::consts::E - 1.0)).abs() < 1e-6);
    }

    #[test]
    fn nodes_sorted_and_symmetric() {
        let gl = GaussLegendre::<f64>::new(PANEL_NODES);
        for w in gl.nodes().windows(2) {
            assert!(w[0] < w[1]);
        }
        for i in 0..PANEL_NODES {
            assert!((gl.nodes()[i] + gl.nodes()[PANEL_NODES - 1 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn contour_grids_pass_self_test() {
        ContourGrid::real_line(12.0).unwrap();
        ContourGrid::sigma_a(1.0, 12.0).unwrap();
        ContourGrid::sigma_a(2.0, 12.0).unwrap();
        ContourGrid::indented(3.3, -0.25, 12.0).unwrap();
        ContourGrid::uniform(0.1, 12.0).unwrap();
    }

    #[test]
    fn tail_map_captures_algebraic_decay() {
        let g = ContourGrid::real_line(12.0).unwrap();
        let v = g.integrate(|s| 1.0 / (s * s + 1.0));
        assert!((v.re - std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn tail_map_captures_logarithmic_decay() {
        // int_1^inf ln(s)/s^2 ds = 1
        let g = ContourGrid::real_line(12.0).unwrap();
        let v = g.integrate(|s| if s.re.abs() > 1.0 { (s.re.abs().ln() / (s.re * s.re)).into() } else { C64::new(0.0, 0.0) });
        assert!((v.re - 2.0).abs() < 1e-12, "{}", v.re);
    }

    #[test]
    fn sigma_a_orientation_and_distance() {
        let g = ContourGrid::sigma_a(1.0, 12.0).unwrap();
        let re: Vec<f64> = g.nodes().iter().map(|z| z.re).collect();
        for w in re.windows(2) {
            assert!(w[0] <= w[1]);
        }
        assert!((g.distance_to(C64::new(0.0, 0.0)) - 0.25 / 2f64.sqrt()).abs() < 1e-15);
        // Cauchy integral of 1/(s - k) over the dipped contour sees k = 0 from below.
        let v = g.integrate(|s| (-s * s).exp() / (s - C64::new(0.0, 0.0)));
        let pv_zero = 0.0;
        assert!((v - C64::new(pv_zero, std::f64::consts::PI)).norm() < 1e-12);
    }
}
