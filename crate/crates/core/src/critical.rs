//! Critical points of a field realization inside a disc.
//!
//! The disc is first tested as a whole; if that is inconclusive it is
//! covered by a square grid whose cells are refined as a quadtree. For a
//! cell with centre `c` and half-diagonal `h`, Taylor's theorem with the
//! third-derivative bound `T` gives, for every `z` in the cell,
//! `|grad(z) - grad(c) - H(c)(z - c)| <= sqrt(2) T h^2` and
//! `||H(z) - H(c)|| <= 2 sqrt(2) T h`. A cell is discarded when the first
//! bound keeps `grad` away from zero, Newton is run from `c` when the second
//! keeps the Hessian invertible (so the cell holds at most one zero), and
//! the cell is split otherwise.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldJet, FieldSample};

pub const DEFAULT_NEWTON_TOL: f64 = 1e-10;
pub const DEDUP_RADIUS: f64 = 1e-6;
pub const DEGENERACY_FLOOR: f64 = 1e-12;
/// A wavelength over 8.
pub const MAX_GRID_STEP: f64 = PI / 4.0;
pub const DEFAULT_GRID_STEP: f64 = PI / 16.0;
pub const MAX_NEWTON_ITERATIONS: usize = 60;
/// Newton steps applied after the tolerance is first met.
pub const POLISH_STEPS: usize = 2;
/// Quadtree levels below the grid.
pub const MAX_DEPTH: u32 = 10;

/// Relative slack on the Taylor bounds against rounding.
const BOUND_SLACK: f64 = 1.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Min,
    Max,
    Saddle,
}

impl CriticalKind {
    pub const EVERY: [CriticalKind; 3] = [CriticalKind::Min, CriticalKind::Max, CriticalKind::Saddle];

    pub fn name(self) -> &'static str {
        match self {
            CriticalKind::Min => "min",
            CriticalKind::Max => "max",
            CriticalKind::Saddle => "saddle",
        }
    }

    pub fn is_extremum(self) -> bool {
        self != CriticalKind::Saddle
    }
}

impl fmt::Display for CriticalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub location: [f64; 2],
    pub value: f64,
    pub hessian: Matrix2<f64>,
    pub kind: CriticalKind,
    /// `|grad|` at the accepted point.
    pub newton_residual: f64,
}

impl CriticalPoint {
    pub fn det_hessian(&self) -> f64 {
        self.hessian.determinant()
    }

    pub fn trace_hessian(&self) -> f64 {
        self.hessian.trace()
    }

    pub fn row(&self) -> PointRow {
        PointRow {
            x: self.location[0],
            y: self.location[1],
            value: self.value,
            kind: self.kind,
            det_hessian: self.det_hessian(),
            trace_hessian: self.trace_hessian(),
        }
    }
}

/// Flat export record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointRow {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub kind: CriticalKind,
    pub det_hessian: f64,
    pub trace_hessian: f64,
}

/// Kind from the Hessian signature.
pub fn classify(hessian: &Matrix2<f64>) -> Result<CriticalKind> {
    classify_with_floor(hessian, DEGENERACY_FLOOR)
}

pub fn classify_with_floor(hessian: &Matrix2<f64>, floor: f64) -> Result<CriticalKind> {
    let det = hessian.determinant();
    if !(det.abs() > floor) {
        return Err(Error::DegenerateHessian { det, floor });
    }
    Ok(if det < 0.0 {
        CriticalKind::Saddle
    } else if hessian.trace() > 0.0 {
        CriticalKind::Min
    } else {
        CriticalKind::Max
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinderConfig {
    pub grid_step: f64,
    pub newton_tol: f64,
    pub dedup_radius: f64,
    pub degeneracy_floor: f64,
    pub max_depth: u32,
}

impl Default for FinderConfig {
    fn default() -> Self {
        FinderConfig {
            grid_step: DEFAULT_GRID_STEP,
            newton_tol: DEFAULT_NEWTON_TOL,
            dedup_radius: DEDUP_RADIUS,
            degeneracy_floor: DEGENERACY_FLOOR,
            max_depth: MAX_DEPTH,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FinderReport {
    pub points: Vec<CriticalPoint>,
    /// Smallest cells that were neither discarded nor certified.
    pub unresolved_cells: usize,
    /// Converged points discarded for `|det H| <= floor`.
    pub degenerate: usize,
    pub cells_examined: usize,
}

impl FinderReport {
    pub fn count(&self, kind: CriticalKind) -> usize {
        self.points.iter().filter(|p| p.kind == kind).count()
    }
}

/// Critical points in the open disc `|z| < rho`.
pub fn find_critical_points(
    field: &FieldSample,
    rho: f64,
    grid_step: f64,
    newton_tol: f64,
) -> Result<FinderReport> {
    let config = FinderConfig {
        grid_step,
        newton_tol,
        ..FinderConfig::default()
    };
    find_critical_points_with(field, rho, &config)
}

enum CellTest {
    Excluded,
    Unique,
    Undecided,
}

struct Finder<'a> {
    field: &'a FieldSample,
    rho: f64,
    /// Newton iterates must stay in `|z| <= limit`.
    limit: f64,
    third: f64,
    config: FinderConfig,
    report: FinderReport,
    degenerate_at: Vec<[f64; 2]>,
}

fn symmetric_eigenvalues(h: &Matrix2<f64>) -> (f64, f64) {
    let mean = 0.5 * (h[(0, 0)] + h[(1, 1)]);
    let rad = (0.5 * (h[(0, 0)] - h[(1, 1)])).hypot(h[(0, 1)]);
    (mean - rad, mean + rad)
}

impl Finder<'_> {
    fn jet(&self, z: [f64; 2]) -> Result<FieldJet> {
        self.field.eval_jet(z)
    }

    fn test_cell(&self, jet: &FieldJet, h: f64) -> CellTest {
        let (lo, hi) = symmetric_eigenvalues(&jet.hessian);
        let smin = lo.abs().min(hi.abs());
        let smax = lo.abs().max(hi.abs());
        let g = jet.gradient.norm();
        let remainder = BOUND_SLACK * SQRT_2 * self.third * h * h;
        let mut lower = g - smax * h;
        if smin > 0.0 {
            if let Some(inv) = jet.hessian.try_inverse() {
                lower = lower.max(smin * ((inv * jet.gradient).norm() - h));
            }
        }
        if lower > remainder {
            CellTest::Excluded
        } else if smin > BOUND_SLACK * 2.0 * SQRT_2 * self.third * h {
            CellTest::Unique
        } else {
            CellTest::Undecided
        }
    }

    /// Newton on the gradient from `z0`; the converged point and its jet.
    fn newton(&self, z0: [f64; 2]) -> Option<([f64; 2], FieldJet)> {
        let tol = self.config.newton_tol;
        let mut z = Vector2::new(z0[0], z0[1]);
        let mut polish = 0;
        let mut best: Option<(Vector2<f64>, FieldJet)> = None;
        for _ in 0..MAX_NEWTON_ITERATIONS + POLISH_STEPS {
            if z.norm() > self.limit {
                break;
            }
            let jet = self.jet([z[0], z[1]]).ok()?;
            let g = jet.gradient.norm();
            if g <= tol {
                if best.is_none_or(|(_, b)| g <= b.gradient.norm()) {
                    best = Some((z, jet));
                }
                if polish == POLISH_STEPS {
                    break;
                }
                polish += 1;
            } else if polish > 0 {
                break;
            }
            let inv = jet.hessian.try_inverse()?;
            let mut step = -(inv * jet.gradient);
            let len = step.norm();
            if !len.is_finite() {
                break;
            }
            if len > self.config.grid_step {
                step *= self.config.grid_step / len;
            }
            z += step;
        }
        best.map(|(z, jet)| ([z[0], z[1]], jet))
    }

    fn accept(&mut self, z: [f64; 2], jet: FieldJet) {
        if !(z[0].hypot(z[1]) < self.rho) {
            return;
        }
        let near = |p: &[f64; 2]| (p[0] - z[0]).hypot(p[1] - z[1]) <= self.config.dedup_radius;
        if self.report.points.iter().any(|p| near(&p.location)) || self.degenerate_at.iter().any(near)
        {
            return;
        }
        match classify_with_floor(&jet.hessian, self.config.degeneracy_floor) {
            Ok(kind) => self.report.points.push(CriticalPoint {
                location: z,
                value: jet.value,
                hessian: jet.hessian,
                kind,
                newton_residual: jet.gradient.norm(),
            }),
            Err(_) => {
                log::debug!("discarding degenerate critical point at {z:?}");
                self.report.degenerate += 1;
                self.degenerate_at.push(z);
            }
        }
    }

    /// Square cell of centre `c` and half side `s`.
    fn process(&mut self, c: [f64; 2], s: f64, depth: u32) -> Result<()> {
        let h = SQRT_2 * s;
        if c[0].hypot(c[1]) - h > self.rho {
            return Ok(());
        }
        self.report.cells_examined += 1;
        let jet = self.jet(c)?;
        let test = self.test_cell(&jet, h);
        let inside = |z: [f64; 2]| (z[0] - c[0]).abs().max((z[1] - c[1]).abs()) <= s * (1.0 + 1e-9);
        match test {
            CellTest::Excluded => return Ok(()),
            CellTest::Unique => {
                if let Some((z, zj)) = self.newton(c) {
                    self.accept(z, zj);
                    if inside(z) {
                        return Ok(());
                    }
                }
            }
            CellTest::Undecided => {}
        }
        if depth >= self.config.max_depth {
            if let CellTest::Undecided = test {
                if let Some((z, zj)) = self.newton(c) {
                    self.accept(z, zj);
                }
                self.report.unresolved_cells += 1;
            }
            return Ok(());
        }
        let q = 0.5 * s;
        for (dx, dy) in [(-q, -q), (q, -q), (-q, q), (q, q)] {
            self.process([c[0] + dx, c[1] + dy], q, depth + 1)?;
        }
        Ok(())
    }
}

/// [`find_critical_points`] with every tolerance explicit.
pub fn find_critical_points_with(
    field: &FieldSample,
    rho: f64,
    config: &FinderConfig,
) -> Result<FinderReport> {
    let step = config.grid_step;
    if !(step > 0.0 && step <= MAX_GRID_STEP) {
        return Err(Error::Domain {
            name: "grid_step",
            value: step,
            requirement: "0 < grid_step <= 2 pi / 8",
        });
    }
    if !(config.newton_tol > 0.0) {
        return Err(Error::Domain {
            name: "newton_tol",
            value: config.newton_tol,
            requirement: "> 0",
        });
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain {
            name: "rho",
            value: rho,
            requirement: "finite and > 0",
        });
    }
    if rho + step > field.domain_radius {
        return Err(Error::Domain {
            name: "rho",
            value: rho,
            requirement: "rho + grid_step <= field domain radius",
        });
    }
    let mut finder = Finder {
        field,
        rho,
        limit: rho + step,
        third: field.third_derivative_bound(rho + 2.0 * step),
        config: *config,
        report: FinderReport::default(),
        degenerate_at: Vec::new(),
    };

    // The whole disc as one cell.
    let origin = finder.jet([0.0, 0.0])?;
    finder.report.cells_examined += 1;
    match finder.test_cell(&origin, rho) {
        CellTest::Excluded => return Ok(finder.report),
        CellTest::Unique => {
            if let Some((z, jet)) = finder.newton([0.0, 0.0]) {
                if z[0].hypot(z[1]) <= rho {
                    finder.accept(z, jet);
                    return Ok(finder.report);
                }
            }
        }
        CellTest::Undecided => {}
    }

    let cells = ((rho + step) / step).ceil() as i64;
    let half = 0.5 * step;
    for j in -cells..cells {
        for i in -cells..cells {
            let c = [(i as f64 + 0.5) * step, (j as f64 + 0.5) * step];
            finder.process(c, half, 0)?;
        }
    }
    Ok(finder.report)
}

/// Moves a point by `steps` further Newton steps; the displacement.
pub fn repolish_displacement(field: &FieldSample, point: &CriticalPoint, steps: usize) -> Result<f64> {
    let mut z = Vector2::new(point.location[0], point.location[1]);
    let start = z;
    for _ in 0..steps {
        let jet = field.eval_jet([z[0], z[1]])?;
        let inv = jet.hessian.try_inverse().ok_or(Error::DegenerateHessian {
            det: jet.hessian.determinant(),
            floor: 0.0,
        })?;
        z -= inv * jet.gradient;
    }
    Ok((z - start).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::sample_field;
    use num_complex::Complex64;

    fn mode(n: i64, order: usize, radius: f64) -> FieldSample {
        let mut a = vec![Complex64::new(0.0, 0.0); 2 * order + 1];
        a[(n + order as i64) as usize] = Complex64::new(1.0, 0.0);
        FieldSample::from_coefficients(a, radius).unwrap()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&Matrix2::new(1.0, 0.0, 0.0, 1.0)).unwrap(), CriticalKind::Min);
        assert_eq!(classify(&Matrix2::new(-1.0, 0.0, 0.0, -1.0)).unwrap(), CriticalKind::Max);
        assert_eq!(classify(&Matrix2::new(1.0, 0.0, 0.0, -1.0)).unwrap(), CriticalKind::Saddle);
        assert!(matches!(
            classify(&Matrix2::new(1.0, 0.0, 0.0, 1e-13)),
            Err(Error::DegenerateHessian { .. })
        ));
    }

    #[test]
    fn no_critical_point_near_a_sloped_origin() {
        // Re(J_1(r) e^{i theta}) = x / 2 + O(r^3).
        let f = mode(1, 4, 2.0);
        let rep = find_critical_points(&f, 0.05, DEFAULT_GRID_STEP, DEFAULT_NEWTON_TOL).unwrap();
        assert!(rep.points.is_empty());
        assert_eq!(rep.unresolved_cells, 0);
    }

    #[test]
    fn radial_mode_has_one_maximum() {
        let f = mode(0, 4, 3.0);
        let rep = find_critical_points(&f, 1.0, DEFAULT_GRID_STEP, DEFAULT_NEWTON_TOL).unwrap();
        assert_eq!(rep.points.len(), 1);
        let p = rep.points[0];
        assert_eq!(p.kind, CriticalKind::Max);
        assert!(p.location[0].hypot(p.location[1]) < 1e-12);
        assert!((p.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn preconditions() {
        let f = sample_field(1, 3.0).unwrap();
        assert!(find_critical_points(&f, 1.0, 1.0, 1e-10).is_err());
        assert!(find_critical_points(&f, 2.9, 0.2, 1e-10).is_err());
        assert!(find_critical_points(&f, -1.0, 0.2, 1e-10).is_err());
        assert!(find_critical_points(&f, 1.0, 0.2, 0.0).is_err());
    }

    /// Newton from a dense lattice of starts, keeping zeros well inside.
    fn brute_force(f: &FieldSample, rho: f64) -> Vec<[f64; 2]> {
        let finder = Finder {
            field: f,
            rho,
            limit: rho + 0.2,
            third: 0.0,
            config: FinderConfig::default(),
            report: FinderReport::default(),
            degenerate_at: Vec::new(),
        };
        let mut out: Vec<[f64; 2]> = Vec::new();
        let n = 160;
        for i in 0..n {
            for j in 0..n {
                let z = [
                    -rho + 2.0 * rho * (i as f64 + 0.5) / n as f64,
                    -rho + 2.0 * rho * (j as f64 + 0.5) / n as f64,
                ];
                if z[0].hypot(z[1]) > rho {
                    continue;
                }
                if let Some((p, _)) = finder.newton(z) {
                    if p[0].hypot(p[1]) < rho && !out.iter().any(|q| (q[0] - p[0]).hypot(q[1] - p[1]) < 1e-6) {
                        out.push(p);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn matches_dense_newton() {
        for seed in 0..6 {
            let f = sample_field(seed, 4.0).unwrap();
            let rho = 3.0;
            let rep = find_critical_points(&f, rho, DEFAULT_GRID_STEP, DEFAULT_NEWTON_TOL).unwrap();
            assert_eq!(rep.unresolved_cells, 0);
            let dense = brute_force(&f, rho);
            for p in &dense {
                assert!(
                    rep.points.iter().any(|q| (q.location[0] - p[0]).hypot(q.location[1] - p[1]) < 1e-8),
                    "seed {seed}: dense point {p:?} missed"
                );
            }
            assert!(rep.points.len() >= dense.len());
        }
    }

    #[test]
    fn invariants_of_returned_points() {
        for seed in 10..20 {
            let f = sample_field(seed, 5.0).unwrap();
            let rep = find_critical_points(&f, 4.0, DEFAULT_GRID_STEP, DEFAULT_NEWTON_TOL).unwrap();
            for (i, p) in rep.points.iter().enumerate() {
                assert!(p.location[0].hypot(p.location[1]) < 4.0);
                assert!(p.newton_residual <= DEFAULT_NEWTON_TOL);
                assert!(p.det_hessian().abs() > DEGENERACY_FLOOR);
                assert_eq!(classify(&p.hessian).unwrap(), p.kind);
                assert!(repolish_displacement(&f, p, 5).unwrap() < 1e-10);
                for q in &rep.points[i + 1..] {
                    let d = (p.location[0] - q.location[0]).hypot(p.location[1] - q.location[1]);
                    assert!(d > DEDUP_RADIUS);
                }
            }
        }
    }

    #[test]
    fn stable_under_grid_refinement() {
        for seed in 30..36 {
            let f = sample_field(seed, 4.0).unwrap();
            let a = find_critical_points(&f, 3.0, DEFAULT_GRID_STEP, DEFAULT_NEWTON_TOL).unwrap();
            let b = find_critical_points(&f, 3.0, DEFAULT_GRID_STEP / 2.0, DEFAULT_NEWTON_TOL).unwrap();
            let unmatched = a
                .points
                .iter()
                .filter(|p| {
                    !b.points.iter().any(|q| {
                        (p.location[0] - q.location[0]).hypot(p.location[1] - q.location[1]) < 1e-8
                    })
                })
                .count();
            let slack = a.unresolved_cells + b.unresolved_cells;
            assert!(unmatched <= slack && a.points.len().abs_diff(b.points.len()) <= slack);
        }
    }

    #[test]
    fn deterministic() {
        let f = sample_field(99, 3.0).unwrap();
        let a = find_critical_points(&f, 2.0, DEFAULT_GRID_STEP, DEFAULT_NEWTON_TOL).unwrap();
        let b = find_critical_points(&f, 2.0, DEFAULT_GRID_STEP, DEFAULT_NEWTON_TOL).unwrap();
        assert_eq!(a, b);
    }
}
