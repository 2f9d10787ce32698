//! Two-dimensional airfoil domain.
//!
//! Foils use a PARSEC variant with ten parameters: separate upper and lower
//! leading-edge radii, crest position, height and curvature for each
//! surface, and trailing-edge direction and wedge angles. The trailing-edge
//! point and thickness are fixed to the base foil. Each surface is
//! `z(x) = Σ_{n=1..6} a_n x^{n−1/2}`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::elites::{ElitesError, FeatureAxis, FeatureSpec};
use crate::genome::Bounds;
use crate::linalg::solve_dense;
use crate::sail::Domain;

pub const PARAMETER_COUNT: usize = 10;

pub const PARAMETER_NAMES: [&str; PARAMETER_COUNT] = [
    "r_le_up", "r_le_lo", "x_up", "z_up", "z_xx_up", "x_lo", "z_lo", "z_xx_lo", "alpha_te", "beta_te",
];

/// Genome positions of the two feature parameters.
pub const X_UP: usize = 2;
pub const Z_UP: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("expected {PARAMETER_COUNT} parameters, got {0}")]
    ParameterCount(usize),
    #[error("parameter {name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("singular PARSEC constraint system for the {0} surface")]
    Singular(&'static str),
    #[error("need at least {min} points per surface, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error("polyline is self-intersecting")]
    SelfIntersecting,
    #[error("polyline needs at least three points")]
    Degenerate,
    #[error("coordinate file line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// The ten shape parameters. Angles are in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsecGenome {
    pub r_le_up: f64,
    pub r_le_lo: f64,
    pub x_up: f64,
    pub z_up: f64,
    pub z_xx_up: f64,
    pub x_lo: f64,
    pub z_lo: f64,
    pub z_xx_lo: f64,
    pub alpha_te: f64,
    pub beta_te: f64,
}

impl ParsecGenome {
    pub fn from_slice(v: &[f64]) -> Result<Self, GeometryError> {
        let &[r_le_up, r_le_lo, x_up, z_up, z_xx_up, x_lo, z_lo, z_xx_lo, alpha_te, beta_te] = v else {
            return Err(GeometryError::ParameterCount(v.len()));
        };
        Ok(Self {
            r_le_up,
            r_le_lo,
            x_up,
            z_up,
            z_xx_up,
            x_lo,
            z_lo,
            z_xx_lo,
            alpha_te,
            beta_te,
        })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.r_le_up,
            self.r_le_lo,
            self.x_up,
            self.z_up,
            self.z_xx_up,
            self.x_lo,
            self.z_lo,
            self.z_xx_lo,
            self.alpha_te,
            self.beta_te,
        ]
    }

    /// PARSEC description of an RAE2822-like transonic section, used as the
    /// default base foil.
    pub fn rae2822() -> Self {
        Self {
            r_le_up: 0.00853,
            r_le_lo: 0.00853,
            x_up: 0.431,
            z_up: 0.063,
            z_xx_up: -0.432,
            x_lo: 0.345,
            z_lo: -0.058,
            z_xx_lo: 0.699,
            alpha_te: -3.0,
            beta_te: 10.0,
        }
    }

    /// Default search box around [`ParsecGenome::rae2822`].
    pub fn default_bounds() -> Bounds {
        Bounds::new(
            vec![0.004, 0.004, 0.15, 0.03, -0.8, 0.2, -0.09, 0.3, -8.0, 4.0],
            vec![0.014, 0.014, 0.65, 0.10, -0.2, 0.5, -0.03, 1.1, 0.0, 16.0],
        )
        .expect("default PARSEC bounds are valid")
    }
}

/// `(X_up, Z_up)`; the features are genome values in this domain.
pub fn foil_features(g: &ParsecGenome) -> [f64; 2] {
    [g.x_up, g.z_up]
}

/// Fixed trailing edge: mid-point height and thickness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrailingEdge {
    pub z: f64,
    pub thickness: f64,
}

impl Default for TrailingEdge {
    fn default() -> Self {
        Self { z: 0.0, thickness: 0.0 }
    }
}

const EXPONENTS: [f64; 6] = [0.5, 1.5, 2.5, 3.5, 4.5, 5.5];

/// One surface polynomial `z(x) = Σ a_n x^{n−1/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surface {
    pub coefficients: [f64; 6],
}

impl Surface {
    pub fn z(&self, x: f64) -> f64 {
        let s = x.sqrt();
        // Horner in sqrt(x): z = s·(a1 + x·(a2 + x·(a3 + ...)))
        let c = &self.coefficients;
        s * (c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * (c[4] + x * c[5])))))
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .zip(EXPONENTS)
            .map(|(a, e)| a * e * x.powf(e - 1.0))
            .sum()
    }

    pub fn curvature(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .zip(EXPONENTS)
            .map(|(a, e)| a * e * (e - 1.0) * x.powf(e - 2.0))
            .sum()
    }

    fn solve(
        a1: f64,
        crest_x: f64,
        crest_z: f64,
        crest_curvature: f64,
        te_z: f64,
        te_slope: f64,
        name: &'static str,
    ) -> Result<Self, GeometryError> {
        let e = &EXPONENTS[1..];
        let x = crest_x;
        let mut m = Vec::with_capacity(25);
        m.extend(e.iter().map(|_| 1.0));
        m.extend(e.iter().copied());
        m.extend(e.iter().map(|&p| x.powf(p)));
        m.extend(e.iter().map(|&p| p * x.powf(p - 1.0)));
        m.extend(e.iter().map(|&p| p * (p - 1.0) * x.powf(p - 2.0)));
        let rhs = vec![
            te_z - a1,
            te_slope - 0.5 * a1,
            crest_z - a1 * x.sqrt(),
            -0.5 * a1 / x.sqrt(),
            crest_curvature + 0.25 * a1 * x.powf(-1.5),
        ];
        let rest = solve_dense(m, rhs).ok_or(GeometryError::Singular(name))?;
        let mut coefficients = [0.0; 6];
        coefficients[0] = a1;
        coefficients[1..].copy_from_slice(&rest);
        Ok(Self { coefficients })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsecFoil {
    pub upper: Surface,
    pub lower: Surface,
}

fn check_genome(g: &ParsecGenome) -> Result<(), GeometryError> {
    let v = g.to_vec();
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(GeometryError::OutOfRange {
            name: PARAMETER_NAMES[i],
            value: v[i],
        });
    }
    for (name, value, ok) in [
        ("r_le_up", g.r_le_up, g.r_le_up > 0.0),
        ("r_le_lo", g.r_le_lo, g.r_le_lo > 0.0),
        ("x_up", g.x_up, g.x_up > 0.0 && g.x_up < 1.0),
        ("x_lo", g.x_lo, g.x_lo > 0.0 && g.x_lo < 1.0),
    ] {
        if !ok {
            return Err(GeometryError::OutOfRange { name, value });
        }
    }
    Ok(())
}

/// Solves both surface polynomials.
///
/// Upper surface: `a1 = √(2 r_le_up)`, passes through the crest with zero
/// slope and curvature `z_xx_up`, ends at the trailing edge with slope
/// `tan(α − β/2)`. The lower surface mirrors this with `a1 = −√(2 r_le_lo)`
/// and slope `tan(α + β/2)`.
pub fn parsec_surfaces(g: &ParsecGenome, te: TrailingEdge) -> Result<ParsecFoil, GeometryError> {
    check_genome(g)?;
    let half_wedge = 0.5 * g.beta_te;
    let upper = Surface::solve(
        (2.0 * g.r_le_up).sqrt(),
        g.x_up,
        g.z_up,
        g.z_xx_up,
        te.z + 0.5 * te.thickness,
        (g.alpha_te - half_wedge).to_radians().tan(),
        "upper",
    )?;
    let lower = Surface::solve(
        -(2.0 * g.r_le_lo).sqrt(),
        g.x_lo,
        g.z_lo,
        g.z_xx_lo,
        te.z - 0.5 * te.thickness,
        (g.alpha_te + half_wedge).to_radians().tan(),
        "lower",
    )?;
    Ok(ParsecFoil { upper, lower })
}

pub const MIN_SURFACE_POINTS: usize = 41;

/// Cosine-spaced stations from 0 to 1.
pub fn cosine_stations(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()))
        .collect()
}

/// Closed polyline in Selig order: trailing edge, upper surface to the
/// leading edge, lower surface back to the trailing edge.
#[derive(Debug, Clone, PartialEq)]
pub struct FoilCoords {
    points: Vec<(f64, f64)>,
}

impl FoilCoords {
    pub fn new(points: Vec<(f64, f64)>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    fn leading_edge_index(&self) -> usize {
        self.points
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Upper surface ordered from the leading edge to the trailing edge.
    pub fn upper(&self) -> Vec<(f64, f64)> {
        let le = self.leading_edge_index();
        self.points[..=le].iter().rev().copied().collect()
    }

    /// Lower surface ordered from the leading edge to the trailing edge.
    pub fn lower(&self) -> Vec<(f64, f64)> {
        let le = self.leading_edge_index();
        self.points[le..].to_vec()
    }
}

/// Samples both surfaces at `n_points` cosine-spaced stations each. The
/// leading-edge point is shared, so the polyline has `2·n_points − 1`
/// points.
pub fn parsec_to_coords(g: &ParsecGenome, te: TrailingEdge, n_points: usize) -> Result<FoilCoords, GeometryError> {
    if n_points < MIN_SURFACE_POINTS {
        return Err(GeometryError::TooFewPoints {
            min: MIN_SURFACE_POINTS,
            got: n_points,
        });
    }
    let foil = parsec_surfaces(g, te)?;
    Ok(sample_foil(&foil, te, &cosine_stations(n_points)))
}

/// Samples at `stations` (ascending, from 0 to 1). The end points are set to
/// the trailing edge exactly rather than to the rounded polynomial value.
pub fn sample_foil(foil: &ParsecFoil, te: TrailingEdge, stations: &[f64]) -> FoilCoords {
    let mut points = Vec::with_capacity(2 * stations.len() - 1);
    points.extend(stations.iter().rev().map(|&x| (x, foil.upper.z(x))));
    points.extend(stations.iter().skip(1).map(|&x| (x, foil.lower.z(x))));
    let last = points.len() - 1;
    points[0] = (1.0, te.z + 0.5 * te.thickness);
    points[last] = (1.0, te.z - 0.5 * te.thickness);
    FoilCoords { points }
}

fn shoelace(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (x0, z0) = points[i];
            let (x1, z1) = points[(i + 1) % n];
            x0 * z1 - x1 * z0
        })
        .sum();
    0.5 * twice.abs()
}

fn x_monotone(chain: &[(f64, f64)]) -> bool {
    chain.windows(2).all(|w| w[1].0 > w[0].0)
}

/// Linear interpolation of an x-sorted chain.
fn interpolate(chain: &[(f64, f64)], x: f64) -> f64 {
    let i = chain.partition_point(|p| p.0 < x);
    if i == 0 {
        return chain[0].1;
    }
    if i == chain.len() {
        return chain[chain.len() - 1].1;
    }
    let (x0, z0) = chain[i - 1];
    let (x1, z1) = chain[i];
    z0 + (z1 - z0) * (x - x0) / (x1 - x0)
}

/// Largest amount by which the upper chain falls below the lower chain,
/// checked at the stations of both chains. Negative when the upper surface
/// stays strictly above.
fn max_crossing(upper: &[(f64, f64)], lower: &[(f64, f64)]) -> f64 {
    if same_stations(upper, lower) {
        let n = upper.len();
        return (1..n - 1)
            .map(|i| lower[i].1 - upper[i].1)
            .fold(f64::NEG_INFINITY, f64::max);
    }
    let (x_lo, x_hi) = (
        upper[0].0.max(lower[0].0),
        upper[upper.len() - 1].0.min(lower[lower.len() - 1].0),
    );
    let interior = |x: f64| x > x_lo && x < x_hi;
    let a = upper
        .iter()
        .filter(|p| interior(p.0))
        .map(|&(x, z)| interpolate(lower, x) - z);
    let b = lower
        .iter()
        .filter(|p| interior(p.0))
        .map(|&(x, z)| z - interpolate(upper, x));
    a.chain(b).fold(f64::NEG_INFINITY, f64::max)
}

fn same_stations(upper: &[(f64, f64)], lower: &[(f64, f64)]) -> bool {
    upper.len() == lower.len() && upper.iter().zip(lower).all(|(u, l)| u.0 == l.0)
}

fn max_thickness(upper: &[(f64, f64)], lower: &[(f64, f64)]) -> f64 {
    if same_stations(upper, lower) {
        return upper.iter().zip(lower).map(|(u, l)| u.1 - l.1).fold(0.0, f64::max);
    }
    upper
        .iter()
        .map(|&(x, z)| z - interpolate(lower, x))
        .fold(0.0, f64::max)
}

fn segments_intersect(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> bool {
    let orient = |a: (f64, f64), b: (f64, f64), c: (f64, f64)| {
        let v = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
        if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        }
    };
    let on_segment = |a: (f64, f64), b: (f64, f64), c: (f64, f64)| {
        c.0 >= a.0.min(b.0) && c.0 <= a.0.max(b.0) && c.1 >= a.1.min(b.1) && c.1 <= a.1.max(b.1)
    };
    let (o1, o2, o3, o4) = (
        orient(p1, p2, q1),
        orient(p1, p2, q2),
        orient(q1, q2, p1),
        orient(q1, q2, p2),
    );
    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && on_segment(p1, p2, q1))
        || (o2 == 0 && on_segment(p1, p2, q2))
        || (o3 == 0 && on_segment(q1, q2, p1))
        || (o4 == 0 && on_segment(q1, q2, p2))
}

fn is_simple_polygon(points: &[(f64, f64)]) -> bool {
    let mut pts = points.to_vec();
    if pts.len() > 1 && pts[0] == pts[pts.len() - 1] {
        pts.pop();
    }
    let n = pts.len();
    let seg = |i: usize| (pts[i], pts[(i + 1) % n]);
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (a, b) = seg(i);
            let (c, d) = seg(j);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Enclosed area of a closed polyline (shoelace formula).
///
/// Foil-shaped polylines (two x-monotone chains meeting at the minimum-x
/// point, upper never below lower) are accepted directly; anything else is
/// checked for self-intersection.
pub fn foil_area(coords: &FoilCoords) -> Result<f64, GeometryError> {
    let pts = coords.points();
    if pts.len() < 3 {
        return Err(GeometryError::Degenerate);
    }
    let (upper, lower) = (coords.upper(), coords.lower());
    let foil_shaped = upper.len() >= 2
        && lower.len() >= 2
        && x_monotone(&upper)
        && x_monotone(&lower)
        && max_crossing(&upper, &lower) <= 0.0;
    if !foil_shaped && !is_simple_polygon(pts) {
        return Err(GeometryError::SelfIntersecting);
    }
    Ok(shoelace(pts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvalidReason {
    NonFinite,
    NonMonotone,
    SurfaceCrossing,
    TooThick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Invalid(InvalidReason),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

pub const DEFAULT_MAX_THICKNESS: f64 = 0.3;

/// Rejects foils whose upper surface dips below the lower surface inside
/// `(0, 1)`, with non-finite ordinates, or thicker than `thickness_bound`.
pub fn geometric_validity(coords: &FoilCoords, thickness_bound: f64) -> Validity {
    if coords.points().iter().any(|(x, z)| !x.is_finite() || !z.is_finite()) {
        return Validity::Invalid(InvalidReason::NonFinite);
    }
    let (upper, lower) = (coords.upper(), coords.lower());
    if upper.len() < 2 || lower.len() < 2 || !x_monotone(&upper) || !x_monotone(&lower) {
        return Validity::Invalid(InvalidReason::NonMonotone);
    }
    if max_crossing(&upper, &lower) > 0.0 {
        return Validity::Invalid(InvalidReason::SurfaceCrossing);
    }
    if max_thickness(&upper, &lower) > thickness_bound {
        return Validity::Invalid(InvalidReason::TooThick);
    }
    Validity::Valid
}

pub const DEFAULT_SURFACE_POINTS: usize = 151;

/// Geometry settings shared by every candidate of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct AirfoilGeometry {
    pub trailing_edge: TrailingEdge,
    pub surface_points: usize,
    pub max_thickness: f64,
}

impl Default for AirfoilGeometry {
    fn default() -> Self {
        Self {
            trailing_edge: TrailingEdge::default(),
            surface_points: DEFAULT_SURFACE_POINTS,
            max_thickness: DEFAULT_MAX_THICKNESS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeError {
    Construction(GeometryError),
    Invalid(InvalidReason),
}

impl std::fmt::Display for ShapeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Construction(e) => write!(f, "{e}"),
            Self::Invalid(r) => write!(f, "invalid geometry: {r:?}"),
        }
    }
}

impl AirfoilGeometry {
    pub fn coords(&self, genome: &[f64]) -> Result<FoilCoords, GeometryError> {
        let g = ParsecGenome::from_slice(genome)?;
        parsec_to_coords(&g, self.trailing_edge, self.surface_points)
    }

    /// Coordinates and enclosed area of a geometrically valid genome.
    pub fn shape(&self, genome: &[f64]) -> Result<(FoilCoords, f64), ShapeError> {
        let coords = self.coords(genome).map_err(ShapeError::Construction)?;
        if let Validity::Invalid(reason) = geometric_validity(&coords, self.max_thickness) {
            return Err(ShapeError::Invalid(reason));
        }
        // valid foils are two monotone, non-crossing chains
        let area = shoelace(coords.points());
        Ok((coords, area))
    }

    pub fn area(&self, genome: &[f64]) -> Option<f64> {
        self.shape(genome).ok().map(|(_, a)| a)
    }
}

/// The airfoil design problem: search box, geometry settings and the base
/// foil reference, with `(X_up, Z_up)` as features.
#[derive(Debug, Clone, PartialEq)]
pub struct AirfoilDomain {
    pub bounds: Bounds,
    pub geometry: AirfoilGeometry,
    pub base: BaseFoilReference,
}

impl Domain for AirfoilDomain {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn features(&self, genome: &[f64]) -> Vec<f64> {
        vec![genome[X_UP], genome[Z_UP]]
    }

    fn area(&self, genome: &[f64]) -> Option<f64> {
        self.geometry.area(genome)
    }

    fn base(&self) -> &BaseFoilReference {
        &self.base
    }
}

/// Feature map over the `(X_up, Z_up)` bounds of `bounds`.
pub fn feature_spec(bounds: &Bounds, bins: usize) -> Result<FeatureSpec, ElitesError> {
    FeatureSpec::new(
        [X_UP, Z_UP]
            .iter()
            .map(|&d| FeatureAxis::new(PARAMETER_NAMES[d], bounds.lower()[d], bounds.upper()[d], bins))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConditions {
    /// Degrees.
    pub angle_of_attack: f64,
    pub mach: f64,
    pub reynolds: f64,
}

impl Default for FlowConditions {
    fn default() -> Self {
        Self {
            angle_of_attack: 2.7,
            mach: 0.5,
            reynolds: 1e6,
        }
    }
}

/// Area and lift of the base foil under the run's flow conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseFoilReference {
    pub area_base: f64,
    pub lift_base: f64,
}

impl BaseFoilReference {
    pub fn new(area_base: f64, lift_base: f64) -> Option<Self> {
        (area_base.is_finite() && area_base > 0.0 && lift_base.is_finite()).then_some(Self { area_base, lift_base })
    }
}

/// `(C_L / lift_base)²` below the base lift, 1 otherwise.
pub fn lift_penalty(lift: f64, lift_base: f64) -> f64 {
    if lift < lift_base {
        (lift / lift_base).powi(2)
    } else {
        1.0
    }
}

/// `(1 − |area − area_base| / area_base)^7`, floored at zero once the
/// deviation reaches 100%.
pub fn area_penalty(area: f64, area_base: f64) -> f64 {
    let deviation = (area - area_base).abs() / area_base;
    (1.0 - deviation).max(0.0).powi(7)
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// `1 − P(C_L < lift_base)` under `N(mu, sigma²)`. A zero `sigma` falls
/// back to the deterministic lift penalty on `mu`.
pub fn probabilistic_lift_penalty(mu: f64, sigma: f64, lift_base: f64) -> f64 {
    if sigma > 0.0 {
        // 1 − Φ((base − μ)/σ) = Φ((μ − base)/σ)
        normal_cdf((mu - lift_base) / sigma)
    } else {
        lift_penalty(mu, lift_base)
    }
}

/// `drag_term × penalty_lift × penalty_area`.
pub fn fitness(drag_term: f64, lift: f64, area: f64, base: &BaseFoilReference) -> f64 {
    drag_term * lift_penalty(lift, base.lift_base) * area_penalty(area, base.area_base)
}

/// Writes Selig-format coordinates: a name line, then `x z` per line.
pub fn write_selig(name: &str, coords: &FoilCoords) -> String {
    let mut out = String::with_capacity(32 * coords.points().len());
    let _ = writeln!(out, "{name}");
    for (x, z) in coords.points() {
        let _ = writeln!(out, "{x:.12} {z:.12}");
    }
    out
}

pub fn parse_selig(text: &str) -> Result<(String, FoilCoords), GeometryError> {
    let mut lines = text.lines();
    let name = lines.next().unwrap_or_default().trim().to_string();
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |reason: &str| GeometryError::Parse {
            line: i + 2,
            reason: reason.to_string(),
        };
        let mut fields = line.split_whitespace().map(str::parse::<f64>);
        let (Some(Ok(x)), Some(Ok(z)), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err("expected two numbers"));
        };
        points.push((x, z));
    }
    if points.len() < 3 {
        return Err(GeometryError::Degenerate);
    }
    Ok((name, FoilCoords::new(points)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base() -> ParsecGenome {
        ParsecGenome::rae2822()
    }

    #[test]
    fn crest_and_trailing_edge_constraints() {
        let g = base();
        let te = TrailingEdge::default();
        let f = parsec_surfaces(&g, te).unwrap();
        assert!((f.upper.z(g.x_up) - g.z_up).abs() < 1e-12);
        assert!((f.lower.z(g.x_lo) - g.z_lo).abs() < 1e-12);
        assert!(f.upper.slope(g.x_up).abs() < 1e-10);
        assert!((f.upper.curvature(g.x_up) - g.z_xx_up).abs() < 1e-9);
        assert!((f.lower.curvature(g.x_lo) - g.z_xx_lo).abs() < 1e-9);
        assert!((f.upper.z(1.0) - te.z).abs() < 1e-14);
        assert!((f.upper.slope(1.0) - (-8f64).to_radians().tan()).abs() < 1e-10);
        assert!((f.lower.slope(1.0) - 2f64.to_radians().tan()).abs() < 1e-10);
    }

    #[test]
    fn coords_layout() {
        let c = parsec_to_coords(&base(), TrailingEdge::default(), 41).unwrap();
        let p = c.points();
        assert_eq!(p.len(), 81);
        assert_eq!(p[0], (1.0, 0.0));
        assert_eq!(p[0], p[80]);
        assert_eq!(p[40].0, 0.0);
        assert_eq!(c.upper().len(), 41);
        assert_eq!(c.lower().len(), 41);
        assert!(parsec_to_coords(&base(), TrailingEdge::default(), 40).is_err());
    }

    #[test]
    fn base_foil_is_valid() {
        let c = parsec_to_coords(&base(), TrailingEdge::default(), 101).unwrap();
        assert_eq!(geometric_validity(&c, DEFAULT_MAX_THICKNESS), Validity::Valid);
        let area = foil_area(&c).unwrap();
        assert!(area > 0.06 && area < 0.1, "area {area}");
        assert!(ParsecGenome::default_bounds().contains(&base().to_vec()));
    }

    #[test]
    fn crossed_surfaces_are_invalid() {
        let mut g = base();
        g.z_up = -0.07;
        g.x_up = g.x_lo;
        let c = parsec_to_coords(&g, TrailingEdge::default(), 61).unwrap();
        assert_eq!(
            geometric_validity(&c, DEFAULT_MAX_THICKNESS),
            Validity::Invalid(InvalidReason::SurfaceCrossing)
        );
        assert_eq!(foil_area(&c).unwrap_err(), GeometryError::SelfIntersecting);
        let thick = FoilCoords::new(vec![(1.0, 0.0), (0.5, 0.3), (0.0, 0.0), (0.5, -0.2), (1.0, 0.0)]);
        assert_eq!(
            geometric_validity(&thick, 0.3),
            Validity::Invalid(InvalidReason::TooThick)
        );
        let nan = FoilCoords::new(vec![(1.0, 0.0), (0.0, f64::NAN), (1.0, 0.0)]);
        assert_eq!(
            geometric_validity(&nan, 0.3),
            Validity::Invalid(InvalidReason::NonFinite)
        );
    }

    #[test]
    fn polygon_areas() {
        let square = FoilCoords::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert_relative_eq!(foil_area(&square).unwrap(), 1.0);
        let flat = FoilCoords::new(vec![(1.0, 0.0), (0.5, 0.0), (0.0, 0.0), (0.5, 0.0), (1.0, 0.0)]);
        assert_eq!(foil_area(&flat).unwrap(), 0.0);
        let bowtie = FoilCoords::new(vec![(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]);
        assert_eq!(foil_area(&bowtie).unwrap_err(), GeometryError::SelfIntersecting);
        assert_eq!(
            foil_area(&FoilCoords::new(vec![(0.0, 0.0)])).unwrap_err(),
            GeometryError::Degenerate
        );
    }

    #[test]
    fn out_of_range_genomes() {
        let mut g = base();
        g.r_le_up = 0.0;
        assert!(matches!(
            parsec_surfaces(&g, TrailingEdge::default()),
            Err(GeometryError::OutOfRange { name: "r_le_up", .. })
        ));
        let mut g = base();
        g.x_lo = 1.0;
        assert!(parsec_surfaces(&g, TrailingEdge::default()).is_err());
        assert_eq!(
            ParsecGenome::from_slice(&[0.0; 9]).unwrap_err(),
            GeometryError::ParameterCount(9)
        );
    }

    #[test]
    fn features_are_crest_parameters() {
        let mut g = base();
        g.x_up = 0.4;
        g.z_up = 0.08;
        assert_eq!(foil_features(&g), [0.4, 0.08]);
        let v = g.to_vec();
        assert_eq!((v[X_UP], v[Z_UP]), (0.4, 0.08));
        assert_eq!(ParsecGenome::from_slice(&v).unwrap(), g);
    }

    #[test]
    fn penalty_arithmetic() {
        let b = BaseFoilReference::new(0.08, 0.6).unwrap();
        assert_eq!(fitness(5.5, 0.6, 0.08, &b), 5.5);
        assert_eq!(lift_penalty(0.3, 0.6), 0.25);
        assert_eq!(lift_penalty(0.9, 0.6), 1.0);
        assert!((area_penalty(0.088, 0.08) - 0.478_296_9).abs() < 1e-12);
        assert!((area_penalty(0.072, 0.08) - 0.478_296_9).abs() < 1e-12);
        assert_eq!(area_penalty(0.2, 0.08), 0.0);
        assert_eq!(area_penalty(0.0, 0.08), 0.0);
        assert!(BaseFoilReference::new(0.0, 0.5).is_none());
    }

    #[test]
    fn probabilistic_penalty() {
        assert_eq!(probabilistic_lift_penalty(0.6, 0.1, 0.6), 0.5);
        assert!(probabilistic_lift_penalty(0.6 + 10.0 * 0.02, 0.02, 0.6) >= 1.0 - 1e-6);
        // 1 − Φ(1), reference value
        assert!((probabilistic_lift_penalty(0.5, 0.1, 0.6) - 0.158_655_253_931_457_05).abs() < 1e-12);
        assert_eq!(probabilistic_lift_penalty(0.7, 0.0, 0.6), 1.0);
        assert_eq!(probabilistic_lift_penalty(0.3, 0.0, 0.6), 0.25);
    }

    #[test]
    fn selig_roundtrip() {
        let c = parsec_to_coords(&base(), TrailingEdge::default(), 41).unwrap();
        let text = write_selig("base", &c);
        assert!(text.starts_with("base\n"));
        let (name, back) = parse_selig(&text).unwrap();
        assert_eq!(name, "base");
        assert_eq!(back.points().len(), c.points().len());
        for (a, b) in back.points().iter().zip(c.points()) {
            assert!((a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
        }
        assert!(parse_selig("x\n1 2 3\n").is_err());
    }
}
