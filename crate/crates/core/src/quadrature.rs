//! Symmetric Gaussian rules on triangles and Gauss-Legendre rules on edges.
//!
//! Triangle rules are the classical fully symmetric positive-weight rules
//! (Dunavant) with orbit parameters refined to 22 significant digits. Points
//! are stored in barycentric coordinates and weights sum to the reference
//! area 1/2, so `sum w f(x)` integrates over the reference triangle.

#![allow(clippy::excessive_precision)]

use alloc::vec::Vec;

use crate::geometry::TriangleGeometry;
use crate::mesh::Mesh;
use crate::{Error, Point, Result};

/// Degree used for right-hand sides and error norms.
pub const STANDARD_DEGREE: usize = 8;

#[derive(Debug, Clone, Copy)]
enum Orbit {
    Centroid(f64),
    /// `(a, a, 1 - 2a)` and permutations.
    Two(f64, f64),
    /// `(a, b, 1 - a - b)` and permutations.
    Six(f64, f64, f64),
}

const DEG1: &[Orbit] = &[Orbit::Centroid(1.0)];
const DEG2: &[Orbit] = &[Orbit::Two(0.166_666_666_666_666_666_67, 0.333_333_333_333_333_333_33)];
const DEG4: &[Orbit] = &[
    Orbit::Two(0.445_948_490_915_964_886_318_3, 0.223_381_589_678_011_465_695),
    Orbit::Two(0.091_576_213_509_770_743_459_57, 0.109_951_743_655_321_867_638_3),
];
const DEG5: &[Orbit] = &[
    Orbit::Centroid(0.225),
    Orbit::Two(0.470_142_064_105_115_089_770_4, 0.132_394_152_788_506_180_737_6),
    Orbit::Two(0.101_286_507_323_456_338_801, 0.125_939_180_544_827_152_595_7),
];
const DEG8: &[Orbit] = &[
    Orbit::Centroid(0.144_315_607_677_787_168_251_1),
    Orbit::Two(0.459_292_588_292_723_156_028_8, 0.095_091_634_267_284_624_793_9),
    Orbit::Two(0.170_569_307_751_760_206_622_3, 0.103_217_370_534_718_250_281_8),
    Orbit::Two(0.050_547_228_317_030_975_458_42, 0.032_458_497_623_198_080_310_93),
    Orbit::Six(
        0.263_112_829_634_638_113_421_8,
        0.008_394_777_409_957_605_337_214,
        0.027_230_314_174_434_994_264_84,
    ),
];
const DEG10: &[Orbit] = &[
    Orbit::Centroid(0.090_817_990_382_753_580_095_29),
    Orbit::Two(0.485_577_633_383_657_377_367_5, 0.036_725_957_756_466_704_717_01),
    Orbit::Two(0.109_481_575_485_037_054_795_5, 0.045_321_059_435_527_934_782_61),
    Orbit::Six(
        0.141_707_219_414_879_954_756_7,
        0.307_939_838_764_120_950_165_2,
        0.072_757_916_845_420_108_604_32,
    ),
    Orbit::Six(
        0.025_003_534_762_686_386_073_99,
        0.246_672_560_639_902_693_917_3,
        0.028_327_242_531_057_484_836_74,
    ),
    Orbit::Six(
        0.009_540_815_400_299_457_580_153,
        0.066_803_251_012_200_265_773_54,
        0.009_421_666_963_732_823_459_927,
    ),
];

const TRIANGLE_TABLE: &[(usize, &[Orbit])] =
    &[(1, DEG1), (2, DEG2), (4, DEG4), (5, DEG5), (8, DEG8), (10, DEG10)];

/// A quadrature rule on the reference triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    /// Barycentric coordinates of the points.
    pub points: Vec<[f64; 3]>,
    /// Weights, summing to 1/2.
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

impl TriangleRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Iterates over `(barycentric point, weight)`.
    pub fn iter(&self) -> impl Iterator<Item = (&[f64; 3], f64)> + '_ {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

/// Smallest tabulated symmetric rule exact for all polynomials of total
/// degree `degree` (at most 10).
pub fn triangle_rule(degree: usize) -> Result<TriangleRule> {
    let degree = degree.max(1);
    let (exact_degree, orbits) = TRIANGLE_TABLE
        .iter()
        .find(|(d, _)| *d >= degree)
        .ok_or(Error::UnsupportedDegree(degree))?;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for orbit in orbits.iter() {
        match *orbit {
            Orbit::Centroid(w) => {
                points.push([1.0 / 3.0; 3]);
                weights.push(w);
            }
            Orbit::Two(a, w) => {
                let b = 1.0 - 2.0 * a;
                for p in [[a, a, b], [a, b, a], [b, a, a]] {
                    points.push(p);
                    weights.push(w);
                }
            }
            Orbit::Six(a, b, w) => {
                let c = 1.0 - a - b;
                for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
                    points.push(p);
                    weights.push(w);
                }
            }
        }
    }
    for w in &mut weights {
        *w *= 0.5;
    }
    Ok(TriangleRule { points, weights, exact_degree: *exact_degree })
}

// Gauss-Legendre nodes on [0, 1] (lower half; the rule is symmetric) and
// weights summing to 1.
const GAUSS_LEGENDRE: &[(&[f64], &[f64])] = &[
    (&[0.5], &[1.0]),
    (&[0.211_324_865_405_187_117_745_4], &[0.5]),
    (&[0.112_701_665_379_258_311_482_1, 0.5], &[0.277_777_777_777_777_777_777_8, 0.444_444_444_444_444_444_444_4]),
    (
        &[0.069_431_844_202_973_712_388_03, 0.330_009_478_207_571_867_598_7],
        &[0.173_927_422_568_726_928_686_5, 0.326_072_577_431_273_071_313_5],
    ),
    (
        &[0.046_910_077_030_668_003_601_19, 0.230_765_344_947_158_454_481_8, 0.5],
        &[0.118_463_442_528_094_543_757_1, 0.239_314_335_249_683_234_020_6, 0.284_444_444_444_444_444_444_4],
    ),
    (
        &[0.033_765_242_898_423_986_093_85, 0.169_395_306_766_867_743_169_3, 0.380_690_406_958_401_545_684_7],
        &[0.085_662_246_189_585_172_520_15, 0.180_380_786_524_069_303_784_9, 0.233_956_967_286_345_523_694_9],
    ),
    (
        &[
            0.025_446_043_828_620_737_736_91,
            0.129_234_407_200_302_780_068_1,
            0.297_077_424_311_301_416_546_7,
            0.5,
        ],
        &[
            0.064_742_483_084_434_846_635_31,
            0.139_852_695_744_638_333_950_7,
            0.190_915_025_252_559_472_475_2,
            0.208_979_591_836_734_693_877_6,
        ],
    ),
    (
        &[
            0.019_855_071_751_231_884_158_22,
            0.101_666_761_293_186_630_204_2,
            0.237_233_795_041_835_507_091_1,
            0.408_282_678_752_175_097_530_3,
        ],
        &[
            0.050_614_268_145_188_129_576_27,
            0.111_190_517_226_687_235_272_2,
            0.156_853_322_938_943_643_669,
            0.181_341_891_689_180_991_482_6,
        ],
    ),
];

/// A Gauss-Legendre rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRule {
    /// Parametric coordinates in `[0, 1]`, increasing.
    pub points: Vec<f64>,
    /// Weights, summing to 1.
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

impl EdgeRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// The `n`-point Gauss-Legendre rule on `[0, 1]`, `1 <= n <= 8`.
pub fn gauss_legendre(n: usize) -> Result<EdgeRule> {
    if n == 0 || n > GAUSS_LEGENDRE.len() {
        return Err(Error::UnsupportedDegree(2 * n.max(1) - 1));
    }
    let (half_x, half_w) = GAUSS_LEGENDRE[n - 1];
    let mut points = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (x, w) in half_x.iter().zip(half_w.iter()) {
        points.push(*x);
        weights.push(*w);
    }
    // mirror, skipping the midpoint for odd n
    let mirrored = if n % 2 == 1 { half_x.len() - 1 } else { half_x.len() };
    for i in (0..mirrored).rev() {
        points.push(1.0 - half_x[i]);
        weights.push(half_w[i]);
    }
    Ok(EdgeRule { points, weights, exact_degree: 2 * n - 1 })
}

/// Gauss-Legendre rule on `[0, 1]` exact for polynomials of `degree` (at most 15).
pub fn edge_rule(degree: usize) -> Result<EdgeRule> {
    gauss_legendre(degree / 2 + 1)
}

/// Integrates `integrand` (a function of the physical point) over triangle
/// `tri` with an affine pull-back of `rule`.
pub fn integrate_on_triangle<F>(rule: &TriangleRule, mesh: &Mesh, tri: usize, integrand: F) -> f64
where
    F: Fn(Point) -> f64,
{
    let geom = TriangleGeometry::new(mesh, tri);
    let jac = 2.0 * geom.area;
    rule.iter().map(|(lam, w)| w * integrand(geom.point(lam))).sum::<f64>() * jac
}
