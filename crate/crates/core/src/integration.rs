//! Pathwise integrals: the exact simple-integrand sum, left-point Föllmer
//! sums, and the Itô–Föllmer decomposition of `∫ ∂U/∂y(s, x(s-)) dx(s)`.
//!
//! Föllmer sums on `[a, b]` at level `l` use the partition
//! `{a} ∪ {level-l nodes in (a, b)} ∪ {b}`; splitting at a partition node
//! therefore splits the sum into the two interval sums. The integrand is
//! evaluated at the partition node value `x(t_k)`; a jump at `t_{k+1}` is
//! then paid for with the holding fixed before it, which is what the
//! left-limit notation `φ(t, x(t^-))` describes in the limit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// A piecewise-constant integrand: `c_0` on `[t_0, t_1]`, `c_i` on `(t_i, t_{i+1}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpleIntegrand {
    pub breakpoints: Vec<f64>,
    pub coefficients: Vec<f64>,
}

impl SimpleIntegrand {
    pub fn new(breakpoints: Vec<f64>, coefficients: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || coefficients.len() + 1 != breakpoints.len() {
            return Err(Error::param(
                "coefficients",
                "need one coefficient per interval and at least one interval",
            ));
        }
        if breakpoints.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::param("breakpoints", "must be nondecreasing"));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::param("breakpoints", "must start at 0"));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("integrand coefficient".into()));
        }
        Ok(Self {
            breakpoints,
            coefficients,
        })
    }

    /// `c` on the whole horizon.
    pub fn constant(c: f64, horizon: f64) -> Result<Self> {
        Self::new(vec![0.0, horizon], vec![c])
    }

    fn indices(&self, x: &Trajectory) -> Result<Vec<usize>> {
        let grid = x.grid();
        let idx = self
            .breakpoints
            .iter()
            .map(|&t| grid.index_of(t))
            .collect::<Result<Vec<_>>>()?;
        if *idx.last().unwrap() != grid.steps() {
            return Err(Error::param("breakpoints", "must end at the horizon"));
        }
        Ok(idx)
    }
}

/// The simple integral `∫_0^t y dx` evaluated exactly.
pub fn integrate_simple(y: &SimpleIntegrand, x: &Trajectory, t: f64) -> Result<f64> {
    let idx = y.indices(x)?;
    let k_t = x.grid().index_of(t)?;
    Ok(simple_sum(&idx, &y.coefficients, x.values(), k_t))
}

/// `Σ_{i<k-1} c_i [x(t_{i+1}) − x(t_i)] + c_{k-1} [x(t) − x(t_{k-1})]` with `k` the first breakpoint `>= t`.
pub(crate) fn simple_sum(breaks: &[usize], c: &[f64], v: &[f64], k_t: usize) -> f64 {
    let k = breaks.partition_point(|&b| b < k_t);
    if k == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..k - 1 {
        sum += c[i] * (v[breaks[i + 1]] - v[breaks[i]]);
    }
    sum + c[k - 1] * (v[k_t] - v[breaks[k - 1]])
}

/// Nodes of the level-`level` partition of `[a, b]` (fine-grid indices), endpoints included.
pub fn partition_nodes(x: &Trajectory, a: usize, b: usize, level: u32) -> Result<Vec<usize>> {
    let stride = x.grid().stride(level)?;
    let mut nodes = vec![a];
    let mut k = (a / stride + 1) * stride;
    while k < b {
        nodes.push(k);
        k += stride;
    }
    if b > a {
        nodes.push(b);
    }
    Ok(nodes)
}

fn finite(v: f64, what: &str, t: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("{what} at t = {t}")))
    }
}

/// Left-point Föllmer sum `Σ φ(t_k, x(t_k)) (x(t_{k+1}) − x(t_k))` over the level-`level` partition of `[0, T]`.
pub fn follmer_integral<F>(phi: F, x: &Trajectory, level: u32) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    follmer_integral_on(phi, x, 0, x.steps(), level)
}

/// [`follmer_integral`] restricted to `[t_a, t_b]` given as fine-grid indices.
pub fn follmer_integral_on<F>(phi: F, x: &Trajectory, a: usize, b: usize, level: u32) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    if a > b || b > x.steps() {
        return Err(Error::param("interval", "need 0 <= a <= b <= N"));
    }
    let nodes = partition_nodes(x, a, b, level)?;
    let v = x.values();
    let mut sum = 0.0;
    for w in nodes.windows(2) {
        let t = x.time(w[0]);
        let h = finite(phi(t, v[w[0]]), "integrand", t)?;
        sum += h * (v[w[1]] - v[w[0]]);
    }
    Ok(sum)
}

/// A smooth field `U(t, y)` with its partial derivatives.
pub trait SmoothField {
    fn u(&self, t: f64, y: f64) -> f64;
    fn u_t(&self, t: f64, y: f64) -> f64;
    fn u_y(&self, t: f64, y: f64) -> f64;
    fn u_yy(&self, t: f64, y: f64) -> f64;
}

/// `U(t, y) = a + b·y + c·y²/2`, so `∂U/∂y = b + c·y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticField {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadraticField {
    /// `U = y`.
    pub const IDENTITY: Self = Self {
        a: 0.0,
        b: 1.0,
        c: 0.0,
    };
    /// `U = y²/2`.
    pub const HALF_SQUARE: Self = Self {
        a: 0.0,
        b: 0.0,
        c: 1.0,
    };
}

impl SmoothField for QuadraticField {
    fn u(&self, _t: f64, y: f64) -> f64 {
        self.a + self.b * y + 0.5 * self.c * y * y
    }
    fn u_t(&self, _t: f64, _y: f64) -> f64 {
        0.0
    }
    fn u_y(&self, _t: f64, y: f64) -> f64 {
        self.b + self.c * y
    }
    fn u_yy(&self, _t: f64, _y: f64) -> f64 {
        self.c
    }
}

/// A field given by four closures.
pub struct FnField<U, Ut, Uy, Uyy> {
    pub u: U,
    pub u_t: Ut,
    pub u_y: Uy,
    pub u_yy: Uyy,
}

impl<U, Ut, Uy, Uyy> SmoothField for FnField<U, Ut, Uy, Uyy>
where
    U: Fn(f64, f64) -> f64,
    Ut: Fn(f64, f64) -> f64,
    Uy: Fn(f64, f64) -> f64,
    Uyy: Fn(f64, f64) -> f64,
{
    fn u(&self, t: f64, y: f64) -> f64 {
        (self.u)(t, y)
    }
    fn u_t(&self, t: f64, y: f64) -> f64 {
        (self.u_t)(t, y)
    }
    fn u_y(&self, t: f64, y: f64) -> f64 {
        (self.u_y)(t, y)
    }
    fn u_yy(&self, t: f64, y: f64) -> f64 {
        (self.u_yy)(t, y)
    }
}

/// The terms of `∫_a^b ∂U/∂y dx = boundary − time_integral − qv_term − jump_sum`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub a: f64,
    pub b: f64,
    pub level: u32,
    /// `U(b, x(b)) − U(a, x(a))`.
    pub boundary: f64,
    /// `∫_a^b ∂U/∂t(s, x(s-)) ds`.
    pub time_integral: f64,
    /// `½ ∫_a^b ∂²U/∂y²(s, x(s-)) d⟨x⟩^c_s`.
    pub qv_term: f64,
    /// `Σ_{a<s≤b} [U(s, x(s)) − U(s, x(s-)) − ∂U/∂y(s, x(s-)) Δx(s)]`.
    pub jump_sum: f64,
    /// `boundary − time_integral − qv_term − jump_sum`.
    pub u: f64,
    /// The left-point Föllmer sum of `∂U/∂y` on `[a, b]`.
    pub riemann: f64,
    /// `|u − riemann|`.
    pub residual: f64,
}

impl DecompositionReport {
    /// Sum of the absolute values of the four terms.
    pub fn scale(&self) -> f64 {
        self.boundary.abs() + self.time_integral.abs() + self.qv_term.abs() + self.jump_sum.abs()
    }

    /// `residual / scale` (0 when every term vanishes).
    pub fn relative_residual(&self) -> f64 {
        let s = self.scale();
        if s == 0.0 {
            self.residual
        } else {
            self.residual / s
        }
    }
}

/// Itô–Föllmer decomposition of `∫_a^b ∂U/∂y(s, x(s-)) dx(s)` at level `level`.
///
/// Time and QV integrals use the left-point rule on the same partition as
/// the Riemann sum. The QV integrator is the continuous part of `⟨x⟩`
/// measured on the trajectory's own (finest) grid.
pub fn ito_follmer_decomposition<U: SmoothField + ?Sized>(
    field: &U,
    x: &Trajectory,
    a: f64,
    b: f64,
    level: u32,
) -> Result<DecompositionReport> {
    if !(a < b) {
        return Err(Error::param("interval", "need a < b"));
    }
    let grid = x.grid();
    let (ia, ib) = (grid.index_of(a)?, grid.index_of(b)?);
    decomposition_on(field, x, ia, ib, level)
}

pub(crate) fn decomposition_on<U: SmoothField + ?Sized>(
    field: &U,
    x: &Trajectory,
    ia: usize,
    ib: usize,
    level: u32,
) -> Result<DecompositionReport> {
    let nodes = partition_nodes(x, ia, ib, level)?;
    let v = x.values();
    // cumulative continuous QV on the finest grid
    let mut cont_qv = vec![0.0; ib - ia + 1];
    for k in ia..ib {
        let d = x.pre_jump_value(k + 1) - v[k];
        cont_qv[k + 1 - ia] = cont_qv[k - ia] + d * d;
    }
    let (ta, tb) = (x.time(ia), x.time(ib));
    let boundary = finite(field.u(tb, v[ib]), "U", tb)? - finite(field.u(ta, v[ia]), "U", ta)?;
    let mut time_integral = 0.0;
    let mut qv = 0.0;
    let mut riemann = 0.0;
    for w in nodes.windows(2) {
        let (p, q) = (w[0], w[1]);
        let t = x.time(p);
        let dt = x.time(q) - t;
        time_integral += finite(field.u_t(t, v[p]), "dU/dt", t)? * dt;
        qv += finite(field.u_yy(t, v[p]), "d2U/dy2", t)? * (cont_qv[q - ia] - cont_qv[p - ia]);
        riemann += finite(field.u_y(t, v[p]), "dU/dy", t)? * (v[q] - v[p]);
    }
    let qv_term = 0.5 * qv;
    let mut jump_sum = 0.0;
    for m in x.jumps_in(ia, ib) {
        let s = x.time(m.index);
        let after = v[m.index];
        let term = field.u(s, after) - field.u(s, m.left) - field.u_y(s, m.left) * (after - m.left);
        jump_sum += finite(term, "jump term", s)?;
    }
    let u = boundary - time_integral - qv_term - jump_sum;
    Ok(DecompositionReport {
        a: ta,
        b: tb,
        level,
        boundary,
        time_integral,
        qv_term,
        jump_sum,
        u,
        riemann,
        residual: (u - riemann).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::trajectory::{make_trajectory, JumpMark};

    fn step_path() -> Trajectory {
        make_trajectory(&[0.0, 0.5, 1.0], &[100.0, 110.0, 110.0], &[(1, 100.0)]).unwrap()
    }

    fn wiggly(level: u32) -> Trajectory {
        let g = Grid::new(1.0, level).unwrap();
        let v = (0..g.len())
            .map(|k| 100.0 + 5.0 * (k as f64 * 0.37).sin() + k as f64 * 0.01)
            .collect();
        Trajectory::new(g, v, vec![]).unwrap()
    }

    #[test]
    fn simple_integral_examples() {
        let x = step_path();
        let one = SimpleIntegrand::constant(1.0, 1.0).unwrap();
        assert_eq!(integrate_simple(&one, &x, 1.0).unwrap(), 10.0);
        let zero = SimpleIntegrand::constant(0.0, 1.0).unwrap();
        assert_eq!(integrate_simple(&zero, &x, 1.0).unwrap(), 0.0);
        let y = SimpleIntegrand::new(vec![0.0, 0.5, 1.0], vec![2.0, -1.0]).unwrap();
        assert_eq!(integrate_simple(&y, &x, 1.0).unwrap(), 20.0);
        assert_eq!(integrate_simple(&y, &x, 0.5).unwrap(), 20.0);
        assert_eq!(integrate_simple(&y, &x, 0.0).unwrap(), 0.0);
        let off = SimpleIntegrand::new(vec![0.0, 0.3, 1.0], vec![2.0, -1.0]).unwrap();
        assert!(matches!(
            integrate_simple(&off, &x, 1.0),
            Err(Error::OffGrid { .. })
        ));
    }

    #[test]
    fn follmer_constant_telescopes() {
        let x = wiggly(8);
        for level in 0..=8 {
            let s = follmer_integral(|_, _| 1.0, &x, level).unwrap();
            assert!((s - (x.terminal() - x.x0())).abs() < 1e-10);
        }
        let y = step_path();
        assert_eq!(follmer_integral(|_, _| 1.0, &y, 1).unwrap(), 10.0);
        assert!(follmer_integral(|_, v| 1.0 / (v - 100.0), &y, 1).is_err());
    }

    #[test]
    fn interval_sums_add_up() {
        let x = wiggly(10);
        let whole = follmer_integral_on(|t, v| v * t, &x, 0, 1024, 4).unwrap();
        let left = follmer_integral_on(|t, v| v * t, &x, 0, 384, 4).unwrap();
        let right = follmer_integral_on(|t, v| v * t, &x, 384, 1024, 4).unwrap();
        assert!((whole - left - right).abs() <= 1e-12 * whole.abs());
        let partition = partition_nodes(&x, 333, 1024, 4).unwrap();
        assert_eq!(partition[..3], [333, 384, 448]);
    }

    #[test]
    fn linear_field_reproduces_increment() {
        let x = wiggly(10);
        let r = ito_follmer_decomposition(&QuadraticField::IDENTITY, &x, 0.25, 0.75, 6).unwrap();
        let exact = x.value_at(0.75).unwrap() - x.value_at(0.25).unwrap();
        assert_eq!(r.u, exact);
        assert!(r.residual <= 1e-12 * exact.abs().max(1.0));
        assert_eq!((r.time_integral, r.qv_term, r.jump_sum), (0.0, 0.0, 0.0));
    }

    #[test]
    fn jump_term_of_half_square() {
        let x = step_path();
        let r = ito_follmer_decomposition(&QuadraticField::HALF_SQUARE, &x, 0.0, 1.0, 1).unwrap();
        assert_eq!(r.jump_sum, 50.0);
        assert_eq!(r.qv_term, 0.0);
        assert_eq!(r.u, r.boundary - r.time_integral - r.qv_term - r.jump_sum);
        // Riemann sum: 100·10 + 110·0
        assert_eq!(r.riemann, 1000.0);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn rejects_bad_intervals() {
        let x = step_path();
        let f = QuadraticField::HALF_SQUARE;
        assert!(ito_follmer_decomposition(&f, &x, 0.5, 0.5, 1).is_err());
        assert!(ito_follmer_decomposition(&f, &x, 0.2, 1.0, 1).is_err());
    }

    #[test]
    fn time_dependent_field() {
        let g = Grid::new(1.0, 2).unwrap();
        let x = Trajectory::new(g, vec![1.0, 2.0, 2.0, 3.0, 3.0], vec![JumpMark { index: 3, left: 2.0 }]).unwrap();
        let field = FnField {
            u: |t: f64, y: f64| t * y,
            u_t: |_t: f64, y: f64| y,
            u_y: |t: f64, _y: f64| t,
            u_yy: |_t: f64, _y: f64| 0.0,
        };
        let r = ito_follmer_decomposition(&field, &x, 0.0, 1.0, 2).unwrap();
        assert_eq!(r.boundary, 3.0);
        assert_eq!(r.time_integral, 0.25 * (1.0 + 2.0 + 2.0 + 3.0));
        assert_eq!(r.jump_sum, 0.0);
        assert_eq!(r.riemann, 0.5 * 1.0);
    }
}
