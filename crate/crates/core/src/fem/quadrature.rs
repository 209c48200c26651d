use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// How the coverage integrand `1 / sum_j chi_j` is integrated per element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureSpec {
    /// Equal weights at the `d + 1` corners. Each corner is evaluated as
    /// the limit from inside its element (moved a relative
    /// [`CORNER_INSET`] towards the centroid), so a corner lying on another
    /// subdomain's boundary counts that subdomain only for the elements
    /// that actually enter it.
    CornerAverage,
    /// The element barycenter.
    Barycenter,
    /// Fully symmetric rule with positive weights and 1, 4 or 10 points.
    SymmetricFixedOrder(usize),
    /// Uniform samples, drawn from a stream keyed by `(seed, element)`.
    MonteCarlo { samples_per_element: usize, seed: u64 },
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::CornerAverage
    }
}

/// Relative distance by which corner-average points are pulled towards the
/// element centroid.
pub const CORNER_INSET: f64 = 1e-4;

/// Barycentric abscissa and weight.
pub type QuadraturePoint<T> = (Vec<T>, T);

// Gauss-Legendre on [0, 1], given as (node, weight); symmetric about 1/2.
const GAUSS4: [(f64, f64); 2] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_84),
    (0.330_009_478_207_571_87, 0.326_072_577_431_273_1),
];
const GAUSS10: [(f64, f64); 5] = [
    (0.013_046_735_741_414_128, 0.033_335_672_154_344_034),
    (0.067_468_316_655_507_73, 0.074_725_674_575_290_18),
    (0.160_295_215_850_487_78, 0.109_543_181_257_991),
    (0.283_302_302_935_376_4, 0.134_633_359_654_998_26),
    (0.425_562_830_509_184_4, 0.147_762_112_357_376_5),
];

// Triangle, 4 points: centroid plus one (a, a, 1 - 2a) orbit, all weights
// 1/4; exact for quadratics.
const TRI4_A: f64 = 0.140_883_243_603_458_05;
// Triangle, 10 points: centroid, one (a, a, 1 - 2a) orbit and one
// (a, b, 1 - a - b) orbit; exact for quintics.
const TRI10_CENTER: f64 = 0.203_751_650_469_500_58;
const TRI10_S21: (f64, f64) = (0.086_763_091_944_810_88, 0.088_079_150_470_294_92);
const TRI10_S111: (f64, f64, f64) = (0.069_299_097_153_936_17, 0.348_031_918_920_915_3, 0.088_668_483_019_935_78);
// Tetrahedron, 4 points: (a, a, a, 1 - 3a) orbit; exact for quadratics.
const TET4_A: f64 = 0.138_196_601_125_010_5;
// Tetrahedron, 10 points: (a, a, a, 1 - 3a) and (b, b, 1/2 - b, 1/2 - b)
// orbits; exact for cubics.
const TET10_S31: (f64, f64) = (0.112_587_708_161_383_11, 0.100_367_250_341_741_72);
const TET10_S22: (f64, f64) = (0.092_973_237_083_611_6, 0.099_755_166_438_838_85);

fn permutations(p: &[f64]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    let n = p.len();
    let mut idx: Vec<usize> = (0..n).collect();
    // Heap's algorithm, then dedup exact repeats
    fn heap(k: usize, idx: &mut Vec<usize>, p: &[f64], out: &mut Vec<Vec<f64>>) {
        if k == 1 {
            let v: Vec<f64> = idx.iter().map(|&i| p[i]).collect();
            if !out.contains(&v) {
                out.push(v);
            }
            return;
        }
        for i in 0..k {
            heap(k - 1, idx, p, out);
            if k % 2 == 0 {
                idx.swap(i, k - 1);
            } else {
                idx.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut idx, p, &mut out);
    out.sort_by(|a, b| b.partial_cmp(a).unwrap());
    out
}

fn orbit<T: Real>(generator: &[f64], weight: f64, out: &mut Vec<QuadraturePoint<T>>) {
    for p in permutations(generator) {
        out.push((p.into_iter().map(T::lit).collect(), T::lit(weight)));
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::SymmetricFixedOrder(n) if ![1, 4, 10].contains(&n) => Err(Error::InvalidArgument(
                format!("symmetric rules exist for 1, 4 or 10 points, not {n}"),
            )),
            Self::MonteCarlo { samples_per_element: 0, .. } => {
                Err(Error::InvalidArgument("Monte Carlo needs at least one sample".into()))
            }
            _ => Ok(()),
        }
    }

    /// Barycentric points and weights (summing to one) for element
    /// `element` of a `d`-dimensional mesh.
    pub fn rule<T: Real>(&self, d: usize, element: usize) -> Result<Vec<QuadraturePoint<T>>> {
        self.validate()?;
        let k = d + 1;
        let centroid = || (vec![T::one() / T::of(k); k], T::one());
        Ok(match *self {
            Self::CornerAverage => {
                let inset = T::lit(CORNER_INSET);
                let side = inset / T::of(k);
                (0..k)
                    .map(|c| {
                        let mut b = vec![side; k];
                        b[c] = T::one() - side * T::of(k - 1);
                        (b, T::one() / T::of(k))
                    })
                    .collect()
            }
            Self::Barycenter | Self::SymmetricFixedOrder(1) => vec![centroid()],
            Self::SymmetricFixedOrder(n) => fixed_rule(d, n),
            Self::MonteCarlo { samples_per_element, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(element as u64);
                let w = T::one() / T::of(samples_per_element);
                (0..samples_per_element)
                    .map(|_| {
                        // normalized exponentials are uniform on the simplex
                        let e: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
                        let s: f64 = e.iter().sum();
                        (e.iter().map(|x| T::lit(x / s)).collect(), w)
                    })
                    .collect()
            }
        })
    }
}

fn fixed_rule<T: Real>(d: usize, n: usize) -> Vec<QuadraturePoint<T>> {
    let mut out = Vec::with_capacity(n);
    match (d, n) {
        (1, 4) => {
            for (x, w) in GAUSS4 {
                orbit(&[x, 1.0 - x], w, &mut out);
            }
        }
        (1, 10) => {
            for (x, w) in GAUSS10 {
                orbit(&[x, 1.0 - x], w, &mut out);
            }
        }
        (2, 4) => {
            out.push((vec![T::one() / T::lit(3.0); 3], T::lit(0.25)));
            orbit(&[TRI4_A, TRI4_A, 1.0 - 2.0 * TRI4_A], 0.25, &mut out);
        }
        (2, 10) => {
            out.push((vec![T::one() / T::lit(3.0); 3], T::lit(TRI10_CENTER)));
            let (a, w) = TRI10_S21;
            orbit(&[a, a, 1.0 - 2.0 * a], w, &mut out);
            let (a, b, w) = TRI10_S111;
            orbit(&[a, b, 1.0 - a - b], w, &mut out);
        }
        (3, 4) => orbit(&[TET4_A, TET4_A, TET4_A, 1.0 - 3.0 * TET4_A], 0.25, &mut out),
        (3, 10) => {
            let (a, w) = TET10_S31;
            orbit(&[a, a, a, 1.0 - 3.0 * a], w, &mut out);
            let (b, w) = TET10_S22;
            orbit(&[b, b, 0.5 - b, 0.5 - b], w, &mut out);
        }
        _ => unreachable!("validated rule ({d}, {n})"),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Mean of prod_i b_i^{k_i} over the unit simplex.
    fn exact_moment(d: usize, ks: &[usize]) -> f64 {
        factorial(d) * ks.iter().map(|&k| factorial(k)).product::<f64>() / factorial(d + ks.iter().sum::<usize>())
    }

    fn exponents(k: usize, deg: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..k {
            out = out
                .into_iter()
                .flat_map(|v: Vec<usize>| {
                    let used: usize = v.iter().sum();
                    (0..=deg - used).map(move |e| {
                        let mut w = v.clone();
                        w.push(e);
                        w
                    })
                })
                .collect();
        }
        out
    }

    fn check_degree(d: usize, n: usize, degree: usize) {
        let rule: Vec<QuadraturePoint<f64>> = QuadratureSpec::SymmetricFixedOrder(n).rule(d, 0).unwrap();
        assert_eq!(rule.len(), n, "d = {d}, n = {n}");
        assert!(rule.iter().all(|(b, w)| *w > 0.0 && b.iter().all(|x| *x >= 0.0)));
        let total: f64 = rule.iter().map(|r| r.1).sum();
        assert!((total - 1.0).abs() < 1e-14);
        for ks in exponents(d + 1, degree) {
            let q: f64 = rule
                .iter()
                .map(|(b, w)| w * b.iter().zip(&ks).map(|(x, &k)| x.powi(k as i32)).product::<f64>())
                .sum();
            assert!((q - exact_moment(d, &ks)).abs() < 1e-13, "d = {d}, n = {n}, exponents {ks:?}");
        }
    }

    #[test]
    fn fixed_rules_are_exact_to_their_degree() {
        check_degree(1, 4, 7);
        check_degree(1, 10, 19);
        check_degree(2, 4, 2);
        check_degree(2, 10, 5);
        check_degree(3, 4, 2);
        check_degree(3, 10, 3);
    }

    #[test]
    fn weights_sum_to_one_for_every_scheme() {
        for d in 1..=3 {
            for q in [
                QuadratureSpec::CornerAverage,
                QuadratureSpec::Barycenter,
                QuadratureSpec::SymmetricFixedOrder(1),
                QuadratureSpec::MonteCarlo { samples_per_element: 7, seed: 1 },
            ] {
                let rule: Vec<QuadraturePoint<f64>> = q.rule(d, 3).unwrap();
                let s: f64 = rule.iter().map(|r| r.1).sum();
                assert!((s - 1.0).abs() < 1e-14);
                for (b, _) in rule {
                    assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn monte_carlo_is_reproducible_per_element() {
        let q = QuadratureSpec::MonteCarlo { samples_per_element: 5, seed: 42 };
        let a: Vec<QuadraturePoint<f64>> = q.rule(2, 11).unwrap();
        let b: Vec<QuadraturePoint<f64>> = q.rule(2, 11).unwrap();
        let c: Vec<QuadraturePoint<f64>> = q.rule(2, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_order_rejected() {
        assert!(QuadratureSpec::SymmetricFixedOrder(7).rule::<f64>(2, 0).is_err());
    }
}
